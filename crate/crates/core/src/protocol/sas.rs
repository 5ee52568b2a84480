use std::fmt;

use rand::RngCore;

use super::ProtocolError;

/// Bit length used when none is configured: 5 hex digits.
pub const DEFAULT_K: u8 = 20;
pub const MAX_K: u8 = 64;

pub fn check_k(k: u8) -> Result<(), ProtocolError> {
    if (1..=MAX_K).contains(&k) {
        Ok(())
    } else {
        Err(ProtocolError::InvalidK(k))
    }
}

fn mask(k: u8) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

/// Number of octets holding a `k`-bit string.
pub fn octet_len(k: u8) -> usize {
    (k as usize).div_ceil(8)
}

/// A party's random `k`-bit authentication nonce.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AuthNonce {
    bits: u64,
    k: u8,
}

impl AuthNonce {
    /// Fails if `k` is out of range or `bits` has anything set above bit `k`.
    pub fn new(bits: u64, k: u8) -> Result<Self, ProtocolError> {
        check_k(k)?;
        if bits & !mask(k) != 0 {
            return Err(ProtocolError::Malformed(format!(
                "nonce has bits set above k = {k}"
            )));
        }
        Ok(AuthNonce { bits, k })
    }

    pub fn generate<R: RngCore + ?Sized>(k: u8, rng: &mut R) -> Result<Self, ProtocolError> {
        check_k(k)?;
        let mut buf = [0u8; 8];
        rng.try_fill_bytes(&mut buf)
            .map_err(|e| ProtocolError::RngFailure(e.to_string()))?;
        Ok(AuthNonce {
            bits: u64::from_be_bytes(buf) & mask(k),
            k,
        })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    /// Big-endian, `ceil(k/8)` octets, unused high bits zero.
    pub fn to_octets(&self) -> Vec<u8> {
        self.bits.to_be_bytes()[8 - octet_len(self.k)..].to_vec()
    }

    pub fn from_octets(octets: &[u8], k: u8) -> Result<Self, ProtocolError> {
        check_k(k)?;
        if octets.len() != octet_len(k) {
            return Err(ProtocolError::Malformed(format!(
                "nonce is {} octets, expected {} for k = {k}",
                octets.len(),
                octet_len(k)
            )));
        }
        let bits = octets.iter().fold(0u64, |acc, &b| (acc << 8) | b as u64);
        Self::new(bits, k)
    }
}

/// Short authentication string `N_local xor N_remote`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sas {
    bits: u64,
    k: u8,
}

impl Sas {
    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn k(&self) -> u8 {
        self.k
    }
}

pub fn compute_sas(local: &AuthNonce, remote: &AuthNonce) -> Result<Sas, ProtocolError> {
    if local.k != remote.k {
        return Err(ProtocolError::LengthMismatch {
            local: local.k,
            remote: remote.k,
        });
    }
    Ok(Sas {
        bits: local.bits ^ remote.bits,
        k: local.k,
    })
}

/// Uppercase hex, `ceil(k/4)` digits, zero padded.
pub fn format_sas(sas: &Sas) -> String {
    let digits = (sas.k as usize).div_ceil(4);
    format!("{:0digits$X}", sas.bits)
}

impl fmt::Display for Sas {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_sas(self))
    }
}
