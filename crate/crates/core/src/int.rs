//! Unsigned integer backends for group arithmetic.
//!
//! Everything above this module is written against [`GroupInt`], so the same
//! protocol code runs on machine words for toy groups (fast simulation) and on
//! [`BigUint`] for real parameter sets.

use std::fmt::{Debug, Display};
use std::hash::Hash;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{FromPrimitive, Num, ToPrimitive, Unsigned, Zero};
use rand::RngCore;

/// An unsigned integer type usable as a modulus, exponent and group element.
pub trait GroupInt:
    Clone
    + Debug
    + Display
    + Eq
    + Ord
    + Hash
    + Integer
    + Unsigned
    + Num
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    /// `self * rhs mod modulus`. Operands must already be reduced.
    fn mul_mod(&self, rhs: &Self, modulus: &Self) -> Self;

    /// Number of significant bits; zero has zero bits.
    fn bit_len(&self) -> u64;

    /// Value of bit `i` (least significant is 0).
    fn bit(&self, i: u64) -> bool;

    /// Minimal big-endian magnitude. Zero encodes as an empty vector.
    fn to_be_bytes_min(&self) -> Vec<u8>;

    /// Parses a big-endian magnitude. Returns `None` if it does not fit.
    fn from_be_bytes(bytes: &[u8]) -> Option<Self>;

    /// `base^exponent mod modulus` by left-to-right square and multiply.
    fn pow_mod(&self, exponent: &Self, modulus: &Self) -> Self {
        if modulus.is_one() {
            return Self::zero();
        }
        let mut acc = Self::one();
        let base = self.mod_floor(modulus);
        for i in (0..exponent.bit_len()).rev() {
            acc = acc.mul_mod(&acc, modulus);
            if exponent.bit(i) {
                acc = acc.mul_mod(&base, modulus);
            }
        }
        acc
    }

    /// Parses a decimal string.
    fn parse_decimal(s: &str) -> Option<Self> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        Self::from_str_radix(s, 10).ok()
    }
}

/// Draws an integer uniformly from `[0, bound)` by rejection sampling on
/// masked random octets. Fails only if the random source fails.
pub fn random_below<T: GroupInt, R: RngCore + ?Sized>(
    bound: &T,
    rng: &mut R,
) -> Result<T, rand::Error> {
    assert!(!bound.is_zero(), "empty range");
    let bits = bound.bit_len();
    let len = bits.div_ceil(8) as usize;
    let top_mask = match bits % 8 {
        0 => 0xff,
        r => (1u8 << r) - 1,
    };
    let mut buf = vec![0u8; len];
    loop {
        rng.try_fill_bytes(&mut buf)?;
        buf[0] &= top_mask;
        // bound fits in `len` octets, so any masked candidate fits in T.
        let candidate = T::from_be_bytes(&buf).expect("candidate fits below bound");
        if &candidate < bound {
            return Ok(candidate);
        }
    }
}

macro_rules! impl_word {
    ($t:ty, $wide:ty) => {
        impl GroupInt for $t {
            fn mul_mod(&self, rhs: &Self, modulus: &Self) -> Self {
                ((*self as $wide * *rhs as $wide) % *modulus as $wide) as $t
            }

            fn bit_len(&self) -> u64 {
                (<$t>::BITS - self.leading_zeros()) as u64
            }

            fn bit(&self, i: u64) -> bool {
                i < <$t>::BITS as u64 && (self >> i) & 1 == 1
            }

            fn to_be_bytes_min(&self) -> Vec<u8> {
                let skip = (self.leading_zeros() / 8) as usize;
                self.to_be_bytes()[skip..].to_vec()
            }

            fn from_be_bytes(bytes: &[u8]) -> Option<Self> {
                let start = bytes.iter().position(|&b| b != 0).unwrap_or(bytes.len());
                let digits = &bytes[start..];
                if digits.len() > std::mem::size_of::<$t>() {
                    return None;
                }
                Some(digits.iter().fold(0, |acc, &b| (acc << 8) | b as $t))
            }
        }
    };
}

impl_word!(u32, u64);
impl_word!(u64, u128);

impl GroupInt for BigUint {
    fn mul_mod(&self, rhs: &Self, modulus: &Self) -> Self {
        (self * rhs) % modulus
    }

    fn bit_len(&self) -> u64 {
        self.bits()
    }

    fn bit(&self, i: u64) -> bool {
        BigUint::bit(self, i)
    }

    fn to_be_bytes_min(&self) -> Vec<u8> {
        if self.is_zero() {
            Vec::new()
        } else {
            self.to_bytes_be()
        }
    }

    fn from_be_bytes(bytes: &[u8]) -> Option<Self> {
        Some(BigUint::from_bytes_be(bytes))
    }

    // Montgomery ladder from num-bigint; much faster on 2048-bit moduli.
    fn pow_mod(&self, exponent: &Self, modulus: &Self) -> Self {
        self.modpow(exponent, modulus)
    }
}
