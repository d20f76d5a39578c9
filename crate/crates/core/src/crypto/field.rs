//! Prime fields used for threshold sharing.
//!
//! [`FieldElement`] lives in the scalar field of secp256k1, so a service
//! private key can be shared as-is. [`Fp257`] is a tiny field used by the
//! exhaustive secrecy checks.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use k256::elliptic_curve::ff::{Field as _, PrimeField};
use k256::Scalar;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CryptoError;

/// Arithmetic needed by Shamir sharing and Lagrange interpolation.
pub trait ShareField:
    Copy + Eq + fmt::Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_u64(v: u64) -> Self;
    fn invert(&self) -> Option<Self>;
    fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self;
}

/// An element of the secp256k1 group-order field.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct FieldElement(pub(crate) Scalar);

impl FieldElement {
    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.to_bytes().into()
    }

    /// Parses a big-endian value; rejects values `>= P`.
    pub fn from_bytes(bytes: &[u8; 32]) -> Result<Self, CryptoError> {
        Option::from(Scalar::from_repr((*bytes).into())).map(FieldElement).ok_or(CryptoError::OutOfRange)
    }

    pub fn is_zero(&self) -> bool {
        bool::from(self.0.is_zero())
    }

    pub fn scalar(&self) -> &Scalar {
        &self.0
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FieldElement(0x{})", hex::encode(self.to_bytes()))
    }
}

impl Serialize for FieldElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(self.to_bytes()))
    }
}

impl<'de> Deserialize<'de> for FieldElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let raw = hex::decode(&s).map_err(serde::de::Error::custom)?;
        let arr: [u8; 32] = raw.try_into().map_err(|_| serde::de::Error::custom("expected 32 bytes"))?;
        FieldElement::from_bytes(&arr).map_err(serde::de::Error::custom)
    }
}

impl Add for FieldElement {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        FieldElement(self.0 + rhs.0)
    }
}

impl Sub for FieldElement {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        FieldElement(self.0 - rhs.0)
    }
}

impl Mul for FieldElement {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        FieldElement(self.0 * rhs.0)
    }
}

impl Neg for FieldElement {
    type Output = Self;
    fn neg(self) -> Self {
        FieldElement(-self.0)
    }
}

impl ShareField for FieldElement {
    fn zero() -> Self {
        FieldElement(Scalar::ZERO)
    }
    fn one() -> Self {
        FieldElement(Scalar::ONE)
    }
    fn from_u64(v: u64) -> Self {
        FieldElement(Scalar::from(v))
    }
    fn invert(&self) -> Option<Self> {
        Option::from(self.0.invert()).map(FieldElement)
    }
    fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        FieldElement(Scalar::random(rng))
    }
}

/// The field of integers modulo 257.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fp257(u16);

impl Fp257 {
    pub const MODULUS: u16 = 257;

    pub fn new(v: u64) -> Self {
        Fp257((v % Self::MODULUS as u64) as u16)
    }

    pub fn value(&self) -> u16 {
        self.0
    }

    /// All 257 elements in ascending order.
    pub fn all() -> impl Iterator<Item = Fp257> {
        (0..Self::MODULUS).map(Fp257)
    }
}

impl fmt::Debug for Fp257 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Add for Fp257 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Fp257((self.0 + rhs.0) % Self::MODULUS)
    }
}

impl Sub for Fp257 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Fp257((self.0 + Self::MODULUS - rhs.0) % Self::MODULUS)
    }
}

impl Mul for Fp257 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Fp257(((self.0 as u32 * rhs.0 as u32) % Self::MODULUS as u32) as u16)
    }
}

impl Neg for Fp257 {
    type Output = Self;
    fn neg(self) -> Self {
        Fp257((Self::MODULUS - self.0) % Self::MODULUS)
    }
}

impl ShareField for Fp257 {
    fn zero() -> Self {
        Fp257(0)
    }
    fn one() -> Self {
        Fp257(1)
    }
    fn from_u64(v: u64) -> Self {
        Fp257::new(v)
    }
    fn invert(&self) -> Option<Self> {
        if self.0 == 0 {
            return None;
        }
        // Fermat: a^(p-2)
        let mut acc = Fp257::one();
        let mut base = *self;
        let mut e = Self::MODULUS - 2;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        Some(acc)
    }
    fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Fp257::new(rng.next_u64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_field_inverse_is_exhaustively_correct() {
        for a in Fp257::all().skip(1) {
            assert_eq!(a * a.invert().unwrap(), Fp257::one(), "a = {a:?}");
        }
        assert!(Fp257::zero().invert().is_none());
    }

    #[test]
    fn big_field_bytes_round_trip_and_range() {
        let x = FieldElement::from_u64(42);
        assert_eq!(FieldElement::from_bytes(&x.to_bytes()).unwrap(), x);
        assert_eq!(x.to_bytes()[31], 42);
        assert!(FieldElement::from_bytes(&[0xff; 32]).is_err());
    }

    #[test]
    fn big_field_negation_wraps() {
        let one = FieldElement::one();
        assert_eq!(one + (-one), FieldElement::zero());
        assert_eq!(one.invert().unwrap(), one);
    }
}
