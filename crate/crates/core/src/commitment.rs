//! Hash-based commitments: `c = H(tag || nonce || m)` with a fresh 256-bit nonce.

use rand::RngCore;
use sha2::digest::consts::U32;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Domain separation prefix for every commitment digest.
pub const DOMAIN_TAG: &[u8; 8] = b"SASKA-01";

pub const COMMITMENT_LEN: usize = 32;
pub const NONCE_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommitError {
    #[error("cannot commit to an empty message")]
    EmptyMessage,
    #[error("decommitment does not open the commitment")]
    OpenFailed,
    #[error("random source failed: {0}")]
    RngFailure(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Commitment([u8; COMMITMENT_LEN]);

impl Commitment {
    pub fn from_bytes(bytes: [u8; COMMITMENT_LEN]) -> Self {
        Commitment(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; COMMITMENT_LEN] {
        &self.0
    }
}

/// Opening information: the nonce and the committed message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decommitment {
    nonce: [u8; NONCE_LEN],
    message: Vec<u8>,
}

impl Decommitment {
    pub fn new(nonce: [u8; NONCE_LEN], message: Vec<u8>) -> Self {
        Decommitment { nonce, message }
    }

    pub fn nonce(&self) -> &[u8; NONCE_LEN] {
        &self.nonce
    }

    pub fn message(&self) -> &[u8] {
        &self.message
    }
}

fn digest<H: Digest<OutputSize = U32>>(nonce: &[u8; NONCE_LEN], message: &[u8]) -> Commitment {
    let mut h = H::new();
    h.update(DOMAIN_TAG);
    h.update(nonce);
    h.update(message);
    Commitment(h.finalize().into())
}

/// Commits to `message` with SHA-256.
pub fn commit<R: RngCore + ?Sized>(
    message: &[u8],
    rng: &mut R,
) -> Result<(Commitment, Decommitment), CommitError> {
    commit_with::<Sha256, R>(message, rng)
}

/// Opens with SHA-256, returning the committed message.
pub fn open<'d>(c: &Commitment, d: &'d Decommitment) -> Result<&'d [u8], CommitError> {
    open_with::<Sha256>(c, d)
}

pub fn commit_with<H: Digest<OutputSize = U32>, R: RngCore + ?Sized>(
    message: &[u8],
    rng: &mut R,
) -> Result<(Commitment, Decommitment), CommitError> {
    if message.is_empty() {
        return Err(CommitError::EmptyMessage);
    }
    let mut nonce = [0u8; NONCE_LEN];
    rng.try_fill_bytes(&mut nonce)
        .map_err(|e| CommitError::RngFailure(e.to_string()))?;
    let c = digest::<H>(&nonce, message);
    Ok((
        c,
        Decommitment {
            nonce,
            message: message.to_vec(),
        },
    ))
}

pub fn open_with<'d, H: Digest<OutputSize = U32>>(
    c: &Commitment,
    d: &'d Decommitment,
) -> Result<&'d [u8], CommitError> {
    if digest::<H>(&d.nonce, &d.message) == *c {
        Ok(&d.message)
    } else {
        Err(CommitError::OpenFailed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use sha2::Sha512_256;
    use std::collections::HashSet;

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(0x5a5)
    }

    #[test]
    fn round_trip() {
        let (c, d) = commit(b"ab", &mut rng()).unwrap();
        assert_eq!(c.as_bytes().len(), 32);
        assert_eq!(open(&c, &d).unwrap(), b"ab");
    }

    #[test]
    fn digest_layout() {
        let (c, d) = commit(b"hello", &mut rng()).unwrap();
        let mut input = DOMAIN_TAG.to_vec();
        input.extend_from_slice(d.nonce());
        input.extend_from_slice(b"hello");
        let expected: [u8; 32] = Sha256::digest(&input).into();
        assert_eq!(c.as_bytes(), &expected);
    }

    #[test]
    fn empty_message_rejected() {
        assert_eq!(commit(b"", &mut rng()), Err(CommitError::EmptyMessage));
    }

    #[test]
    fn fresh_nonces_give_distinct_commitments() {
        let mut r = rng();
        let (c1, _) = commit(b"same", &mut r).unwrap();
        let (c2, _) = commit(b"same", &mut r).unwrap();
        assert_ne!(c1, c2);
    }

    #[test]
    fn nonce_freshness_over_many_commits() {
        let mut r = rng();
        let seen: HashSet<_> = (0..10_000)
            .map(|_| commit(b"m", &mut r).unwrap().0)
            .collect();
        assert_eq!(seen.len(), 10_000);
    }

    #[test]
    fn every_nonce_bit_flip_fails() {
        let (c, d) = commit(b"payload", &mut rng()).unwrap();
        for bit in 0..NONCE_LEN * 8 {
            let mut nonce = *d.nonce();
            nonce[bit / 8] ^= 1 << (bit % 8);
            let bad = Decommitment::new(nonce, d.message().to_vec());
            assert_eq!(open(&c, &bad), Err(CommitError::OpenFailed), "bit {bit}");
        }
    }

    #[test]
    fn every_message_and_commitment_bit_flip_fails() {
        let (c, d) = commit(b"short m", &mut rng()).unwrap();
        for bit in 0..d.message().len() * 8 {
            let mut m = d.message().to_vec();
            m[bit / 8] ^= 1 << (bit % 8);
            let bad = Decommitment::new(*d.nonce(), m);
            assert_eq!(open(&c, &bad), Err(CommitError::OpenFailed));
        }
        for bit in 0..COMMITMENT_LEN * 8 {
            let mut bytes = *c.as_bytes();
            bytes[bit / 8] ^= 1 << (bit % 8);
            assert_eq!(
                open(&Commitment::from_bytes(bytes), &d),
                Err(CommitError::OpenFailed)
            );
        }
    }

    #[test]
    fn every_message_octet_change_fails() {
        let (c, d) = commit(b"0123456789", &mut rng()).unwrap();
        for i in 0..d.message().len() {
            let mut m = d.message().to_vec();
            m[i] = m[i].wrapping_add(1);
            assert_eq!(
                open(&c, &Decommitment::new(*d.nonce(), m)),
                Err(CommitError::OpenFailed)
            );
        }
        // appending or truncating also fails
        let mut longer = d.message().to_vec();
        longer.push(0);
        assert!(open(&c, &Decommitment::new(*d.nonce(), longer)).is_err());
        let shorter = d.message()[..9].to_vec();
        assert!(open(&c, &Decommitment::new(*d.nonce(), shorter)).is_err());
    }

    #[test]
    fn pluggable_hash() {
        let (c, d) = commit_with::<Sha512_256, _>(b"xyz", &mut rng()).unwrap();
        assert_eq!(open_with::<Sha512_256>(&c, &d).unwrap(), b"xyz");
        assert_eq!(open_with::<Sha256>(&c, &d), Err(CommitError::OpenFailed));
    }

    #[test]
    fn rng_failure_surfaces() {
        struct Broken;
        impl rand::RngCore for Broken {
            fn next_u32(&mut self) -> u32 {
                unreachable!()
            }
            fn next_u64(&mut self) -> u64 {
                unreachable!()
            }
            fn fill_bytes(&mut self, _: &mut [u8]) {
                unreachable!()
            }
            fn try_fill_bytes(&mut self, _: &mut [u8]) -> Result<(), rand::Error> {
                Err(rand::Error::new("entropy exhausted"))
            }
        }
        assert!(matches!(
            commit(b"m", &mut Broken),
            Err(CommitError::RngFailure(_))
        ));
    }

    proptest! {
        #[test]
        fn open_inverts_commit(m in proptest::collection::vec(any::<u8>(), 1..4096), seed in any::<u64>()) {
            let mut r = ChaCha20Rng::seed_from_u64(seed);
            let (c, d) = commit(&m, &mut r).unwrap();
            prop_assert_eq!(open(&c, &d).unwrap(), &m[..]);
        }
    }
}
