//! (t, n) threshold sharing by polynomial evaluation and Lagrange recovery.

use std::collections::BTreeSet;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::field::{FieldElement, ShareField};
use super::CryptoError;

/// One evaluation `(index, f(index))` of the sharing polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Share<F = FieldElement> {
    pub index: u16,
    pub value: F,
}

impl Share<FieldElement> {
    pub const ENCODED_LEN: usize = 34;

    /// `index (2 bytes BE) || value (32 bytes BE)`.
    pub fn to_bytes(&self) -> [u8; Self::ENCODED_LEN] {
        let mut out = [0u8; Self::ENCODED_LEN];
        out[..2].copy_from_slice(&self.index.to_be_bytes());
        out[2..].copy_from_slice(&self.value.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() != Self::ENCODED_LEN {
            return Err(CryptoError::Malformed("share length"));
        }
        let index = u16::from_be_bytes([bytes[0], bytes[1]]);
        if index == 0 {
            return Err(CryptoError::Malformed("share index zero"));
        }
        let value: [u8; 32] = bytes[2..].try_into().expect("length checked");
        Ok(Share { index, value: FieldElement::from_bytes(&value)? })
    }
}

fn check_threshold(t: usize, n: usize) -> Result<(), CryptoError> {
    if t == 0 || t > n || n > u16::MAX as usize {
        return Err(CryptoError::InvalidThreshold { t, n });
    }
    Ok(())
}

/// Evaluates `coeffs[0] + coeffs[1] x + ...` by Horner's rule.
pub(crate) fn eval_poly<F: ShareField>(coeffs: &[F], x: F) -> F {
    coeffs.iter().rev().fold(F::zero(), |acc, c| acc * x + *c)
}

/// Splits `secret` into `n` shares, any `t` of which recover it.
pub fn split<F: ShareField, R: RngCore + CryptoRng>(
    secret: F,
    t: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Share<F>>, CryptoError> {
    check_threshold(t, n)?;
    let mut coeffs = Vec::with_capacity(t);
    coeffs.push(secret);
    coeffs.extend((1..t).map(|_| F::random(rng)));
    Ok((1..=n as u16).map(|i| Share { index: i, value: eval_poly(&coeffs, F::from_u64(i as u64)) }).collect())
}

/// Recovers the constant term from the first `t` of `shares`.
///
/// Every supplied share is checked for a distinct, non-zero index.
pub fn restore<F: ShareField>(shares: &[Share<F>], t: usize) -> Result<F, CryptoError> {
    if t == 0 {
        return Err(CryptoError::InvalidThreshold { t, n: shares.len() });
    }
    if shares.len() < t {
        return Err(CryptoError::InsufficientShares { have: shares.len(), need: t });
    }
    let mut seen = BTreeSet::new();
    for s in shares {
        if s.index == 0 || !seen.insert(s.index) {
            return Err(CryptoError::DuplicateIndex(s.index));
        }
    }
    Ok(interpolate_at_zero(&shares[..t]))
}

/// Lagrange interpolation of `points` evaluated at x = 0.
pub(crate) fn interpolate_at_zero<F: ShareField>(points: &[Share<F>]) -> F {
    let mut acc = F::zero();
    for (j, pj) in points.iter().enumerate() {
        let xj = F::from_u64(pj.index as u64);
        let mut num = F::one();
        let mut den = F::one();
        for (m, pm) in points.iter().enumerate() {
            if m == j {
                continue;
            }
            let xm = F::from_u64(pm.index as u64);
            num = num * xm;
            den = den * (xm - xj);
        }
        let basis = num * den.invert().expect("distinct indices give non-zero denominators");
        acc = acc + pj.value * basis;
    }
    acc
}
