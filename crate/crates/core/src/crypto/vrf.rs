//! Elliptic-curve VRF on secp256k1 (try-and-increment hash-to-curve, Keccak
//! challenge), following the structure of ECVRF.
//!
//! Proof layout: `Gamma (33) || c (16) || s (32)`.

use k256::elliptic_curve::ops::Reduce;
use k256::elliptic_curve::sec1::{FromEncodedPoint, ToEncodedPoint};
use k256::{AffinePoint, EncodedPoint, FieldBytes, ProjectivePoint, Scalar, U256};
use serde::{Deserialize, Serialize};

use super::field::FieldElement;
use super::hash::{hash_concat, Digest32};
use super::keys::{public_key_of, PublicKey};
use super::CryptoError;

const SUITE: &[u8] = b"timed-tx/ecvrf-secp256k1-keccak";
const CHALLENGE_LEN: usize = 16;
pub const PROOF_LEN: usize = 33 + CHALLENGE_LEN + 32;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VrfEvidence {
    /// The pseudo-random output.
    pub r: Digest32,
    pub proof: Vec<u8>,
    pub input_msg: Vec<u8>,
}

fn encode(p: &ProjectivePoint) -> [u8; 33] {
    p.to_affine().to_encoded_point(true).as_bytes().try_into().expect("compressed point")
}

fn decode(b: &[u8]) -> Option<ProjectivePoint> {
    let enc = EncodedPoint::from_bytes(b).ok()?;
    Option::<AffinePoint>::from(AffinePoint::from_encoded_point(&enc)).map(ProjectivePoint::from)
}

fn scalar_from_digest(d: &Digest32) -> Scalar {
    <Scalar as Reduce<U256>>::reduce_bytes(&FieldBytes::from(d.0))
}

fn hash_to_curve(pk: &PublicKey, msg: &[u8]) -> ProjectivePoint {
    for ctr in 0u8..=255 {
        let x = hash_concat(&[SUITE, &[0x01], pk.as_bytes(), msg, &[ctr, 0x00]]);
        let mut candidate = [0u8; 33];
        candidate[0] = 0x02;
        candidate[1..].copy_from_slice(&x.0);
        if let Some(p) = decode(&candidate) {
            return p;
        }
    }
    // Each attempt succeeds with probability ~1/2.
    unreachable!("hash_to_curve exhausted 256 attempts")
}

fn challenge(
    h: &ProjectivePoint,
    gamma: &ProjectivePoint,
    u: &ProjectivePoint,
    v: &ProjectivePoint,
) -> [u8; CHALLENGE_LEN] {
    let d = hash_concat(&[SUITE, &[0x02], &encode(h), &encode(gamma), &encode(u), &encode(v), &[0x00]]);
    d.0[..CHALLENGE_LEN].try_into().expect("len")
}

fn challenge_scalar(c: &[u8; CHALLENGE_LEN]) -> Scalar {
    let mut wide = [0u8; 32];
    wide[32 - CHALLENGE_LEN..].copy_from_slice(c);
    scalar_from_digest(&Digest32(wide))
}

fn output_from_gamma(gamma: &ProjectivePoint) -> Digest32 {
    hash_concat(&[SUITE, &[0x03], &encode(gamma), &[0x00]])
}

/// Evaluates the VRF; deterministic in `(sk, msg)`.
pub fn vrf_eval(sk: &FieldElement, msg: &[u8]) -> Result<VrfEvidence, CryptoError> {
    let pk = public_key_of(sk)?;
    let h = hash_to_curve(&pk, msg);
    let gamma = h * sk.0;
    let nonce = {
        let k = scalar_from_digest(&hash_concat(&[SUITE, b"nonce", &sk.to_bytes(), &encode(&h)]));
        if bool::from(k.is_zero()) {
            Scalar::ONE
        } else {
            k
        }
    };
    let c = challenge(&h, &gamma, &(ProjectivePoint::GENERATOR * nonce), &(h * nonce));
    let s = nonce + challenge_scalar(&c) * sk.0;
    let mut proof = Vec::with_capacity(PROOF_LEN);
    proof.extend_from_slice(&encode(&gamma));
    proof.extend_from_slice(&c);
    proof.extend_from_slice(&s.to_bytes());
    Ok(VrfEvidence { r: output_from_gamma(&gamma), proof, input_msg: msg.to_vec() })
}

/// Checks `proof` for `(pk, msg)` and returns the VRF output it commits to.
pub fn vrf_verify(pk: &PublicKey, msg: &[u8], proof: &[u8]) -> Result<Digest32, CryptoError> {
    if proof.len() != PROOF_LEN {
        return Err(CryptoError::InvalidProof);
    }
    let gamma = decode(&proof[..33]).ok_or(CryptoError::InvalidProof)?;
    let c: [u8; CHALLENGE_LEN] = proof[33..33 + CHALLENGE_LEN].try_into().expect("len");
    let s_bytes: [u8; 32] = proof[33 + CHALLENGE_LEN..].try_into().expect("len");
    let s = FieldElement::from_bytes(&s_bytes).map_err(|_| CryptoError::InvalidProof)?.0;
    let y = pk.point().map_err(|_| CryptoError::InvalidProof)?;
    let h = hash_to_curve(pk, msg);
    let cs = challenge_scalar(&c);
    let u = ProjectivePoint::GENERATOR * s - y * cs;
    let v = h * s - gamma * cs;
    if challenge(&h, &gamma, &u, &v) != c {
        return Err(CryptoError::InvalidProof);
    }
    Ok(output_from_gamma(&gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::keys::{KeyKind, KeyPair};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn unique_output_per_key_and_message() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let kp = KeyPair::generate(KeyKind::UserService, &mut rng);
        let a = vrf_eval(kp.secret(), b"bn=10").unwrap();
        let b = vrf_eval(kp.secret(), b"bn=10").unwrap();
        assert_eq!(a, b);
        let c = vrf_eval(kp.secret(), b"bn=11").unwrap();
        assert_ne!(a.r, c.r);
        assert_eq!(a.proof.len(), PROOF_LEN);
    }

    #[test]
    fn proof_under_other_key_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(22);
        let a = KeyPair::generate(KeyKind::UserService, &mut rng);
        let b = KeyPair::generate(KeyKind::UserService, &mut rng);
        let ev = vrf_eval(a.secret(), b"m").unwrap();
        assert_eq!(vrf_verify(a.public(), b"m", &ev.proof).unwrap(), ev.r);
        assert!(matches!(vrf_verify(b.public(), b"m", &ev.proof), Err(CryptoError::InvalidProof)));
        assert!(vrf_verify(a.public(), b"other", &ev.proof).is_err());
        let mut forged = ev.proof.clone();
        forged[40] ^= 1;
        assert!(vrf_verify(a.public(), b"m", &forged).is_err());
        assert!(vrf_verify(a.public(), b"m", &ev.proof[..10]).is_err());
    }
}
