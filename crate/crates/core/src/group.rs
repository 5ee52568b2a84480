//! Diffie-Hellman over the prime-order subgroup of the integers mod `p`.

use std::fmt;

use rand::RngCore;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::int::{random_below, GroupInt};

/// Miller-Rabin rounds used when validating parameters.
pub const PRIMALITY_ROUNDS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("{name} = {value} is not prime")]
    NotPrime { name: &'static str, value: String },
    #[error("subgroup order q does not divide p - 1")]
    OrderMismatch,
    #[error("subgroup order must be at least 3")]
    DegenerateOrder,
    #[error("g does not generate the order-q subgroup")]
    BadGenerator,
    #[error("peer share is not an element of the order-q subgroup")]
    SubgroupCheckFailed,
    #[error("private exponent outside [1, q - 1]")]
    ExponentOutOfRange,
    #[error("parameter does not fit the integer backend")]
    Overflow,
    #[error("random source failed: {0}")]
    RngFailure(String),
}

pub(crate) fn rng_failure(e: rand::Error) -> GroupError {
    GroupError::RngFailure(e.to_string())
}

/// `base^exponent mod modulus`.
///
/// Requires `modulus >= 2`. Not constant time.
pub fn mod_exp<T: GroupInt>(base: &T, exponent: &T, modulus: &T) -> T {
    debug_assert!(modulus > &T::one());
    base.pow_mod(exponent, modulus)
}

/// Probabilistic primality test with `rounds` random Miller-Rabin witnesses.
pub fn is_probable_prime<T: GroupInt, R: RngCore + ?Sized>(
    n: &T,
    rounds: usize,
    rng: &mut R,
) -> Result<bool, GroupError> {
    let two = T::from_u8(2).unwrap();
    let three = T::from_u8(3).unwrap();
    if n < &two {
        return Ok(false);
    }
    if n <= &three {
        return Ok(true);
    }
    if n.is_even() {
        return Ok(false);
    }
    let n_minus_one = n.clone() - T::one();
    let mut d = n_minus_one.clone();
    let mut s = 0u32;
    while d.is_even() {
        d = d / two.clone();
        s += 1;
    }
    // witnesses are drawn from [2, n - 2]
    let span = n.clone() - three.clone();
    'witness: for _ in 0..rounds {
        let a = random_below(&span, rng).map_err(rng_failure)? + two.clone();
        let mut x = a.pow_mod(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.mul_mod(&x, n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

/// Public group description `(p, q, g)`: `g` generates the subgroup of prime
/// order `q` in the multiplicative group mod the prime `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DhParams<T> {
    p: T,
    q: T,
    g: T,
}

impl<T: GroupInt> DhParams<T> {
    /// Validates `(p, q, g)` using the thread-local CSPRNG for primality witnesses.
    pub fn validate(p: T, q: T, g: T) -> Result<Self, GroupError> {
        Self::validate_with_rng(p, q, g, &mut rand::thread_rng())
    }

    pub fn validate_with_rng<R: RngCore + ?Sized>(
        p: T,
        q: T,
        g: T,
        rng: &mut R,
    ) -> Result<Self, GroupError> {
        if !is_probable_prime(&p, PRIMALITY_ROUNDS, rng)? {
            return Err(GroupError::NotPrime {
                name: "p",
                value: p.to_string(),
            });
        }
        if !is_probable_prime(&q, PRIMALITY_ROUNDS, rng)? {
            return Err(GroupError::NotPrime {
                name: "q",
                value: q.to_string(),
            });
        }
        if !(p.clone() - T::one()).is_multiple_of(&q) {
            return Err(GroupError::OrderMismatch);
        }
        if q < T::from_u8(3).unwrap() {
            return Err(GroupError::DegenerateOrder);
        }
        if g <= T::one() || g >= p || !g.pow_mod(&q, &p).is_one() {
            return Err(GroupError::BadGenerator);
        }
        Ok(DhParams { p, q, g })
    }

    /// Trusted constants only; every built-in set is re-validated in tests.
    pub(crate) fn new_unchecked(p: T, q: T, g: T) -> Self {
        DhParams { p, q, g }
    }

    pub fn p(&self) -> &T {
        &self.p
    }

    pub fn q(&self) -> &T {
        &self.q
    }

    pub fn g(&self) -> &T {
        &self.g
    }

    /// Subgroup membership: `1 < x < p` and `x^q = 1 (mod p)`.
    pub fn is_member(&self, x: &T) -> bool {
        x > &T::one() && x < &self.p && x.pow_mod(&self.q, &self.p).is_one()
    }

    /// Converts the parameters to another integer backend.
    pub fn convert<U: GroupInt>(&self) -> Result<DhParams<U>, GroupError> {
        let conv = |x: &T| U::from_be_bytes(&x.to_be_bytes_min()).ok_or(GroupError::Overflow);
        Ok(DhParams {
            p: conv(&self.p)?,
            q: conv(&self.q)?,
            g: conv(&self.g)?,
        })
    }
}

/// Secret exponent in `[1, q - 1]`.
#[derive(Clone, PartialEq, Eq)]
pub struct PrivateShare<T> {
    exponent: T,
}

impl<T> fmt::Debug for PrivateShare<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("PrivateShare(..)")
    }
}

impl<T: GroupInt> PrivateShare<T> {
    pub fn generate<R: RngCore + ?Sized>(
        params: &DhParams<T>,
        rng: &mut R,
    ) -> Result<Self, GroupError> {
        let span = params.q.clone() - T::one();
        let exponent = random_below(&span, rng).map_err(rng_failure)? + T::one();
        Ok(PrivateShare { exponent })
    }

    pub fn from_exponent(params: &DhParams<T>, exponent: T) -> Result<Self, GroupError> {
        if exponent.is_zero() || exponent >= params.q {
            return Err(GroupError::ExponentOutOfRange);
        }
        Ok(PrivateShare { exponent })
    }

    pub fn exponent(&self) -> &T {
        &self.exponent
    }

    pub fn public_share(&self, params: &DhParams<T>) -> PublicShare<T> {
        pub_share(params, self)
    }
}

/// `g^x mod p` for some private `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PublicShare<T> {
    value: T,
}

impl<T: GroupInt> PublicShare<T> {
    /// Accepts a received element only if it lies in the order-q subgroup.
    pub fn from_untrusted(params: &DhParams<T>, value: T) -> Result<Self, GroupError> {
        if params.is_member(&value) {
            Ok(PublicShare { value })
        } else {
            Err(GroupError::SubgroupCheckFailed)
        }
    }

    pub fn value(&self) -> &T {
        &self.value
    }

    pub fn into_value(self) -> T {
        self.value
    }
}

pub fn pub_share<T: GroupInt>(params: &DhParams<T>, private: &PrivateShare<T>) -> PublicShare<T> {
    PublicShare {
        value: params.g.pow_mod(&private.exponent, &params.p),
    }
}

/// `peer^x mod p`, after checking that `peer` is in the order-q subgroup.
pub fn derive_key<T: GroupInt>(
    params: &DhParams<T>,
    peer: &T,
    private: &PrivateShare<T>,
) -> Result<SessionKey<T>, GroupError> {
    if !params.is_member(peer) {
        return Err(GroupError::SubgroupCheckFailed);
    }
    let value = peer.pow_mod(&private.exponent, &params.p);
    let octets = value.to_be_bytes_min();
    Ok(SessionKey { value, octets })
}

/// Shared secret `g^(ab) mod p`.
#[derive(Clone, PartialEq, Eq)]
pub struct SessionKey<T> {
    value: T,
    octets: Vec<u8>,
}

impl<T> fmt::Debug for SessionKey<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SessionKey").finish_non_exhaustive()
    }
}

impl<T: GroupInt> SessionKey<T> {
    pub fn value(&self) -> &T {
        &self.value
    }

    /// Minimal big-endian encoding of the key.
    pub fn octets(&self) -> &[u8] {
        &self.octets
    }

    /// First 8 hex digits of SHA-256 over the key octets.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(&self.octets);
        digest[..4].iter().map(|b| format!("{b:02x}")).collect()
    }
}
