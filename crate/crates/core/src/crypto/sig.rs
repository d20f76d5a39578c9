//! ECDSA over secp256k1 with public-key recovery.

use k256::ecdsa::{RecoveryId, Signature as EcdsaSignature, SigningKey, VerifyingKey};
use serde::{Deserialize, Serialize};

use super::field::FieldElement;
use super::hash::Digest32;
use super::keys::{Address, PublicKey};
use super::CryptoError;

/// `(v, r, s)` with `v` the recovery id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub v: u8,
    pub r: [u8; 32],
    pub s: [u8; 32],
}

impl Signature {
    pub const ENCODED_LEN: usize = 65;

    /// `r || s || v`.
    pub fn to_bytes(&self) -> [u8; 65] {
        let mut out = [0u8; 65];
        out[..32].copy_from_slice(&self.r);
        out[32..64].copy_from_slice(&self.s);
        out[64] = self.v;
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, CryptoError> {
        if b.len() != 65 {
            return Err(CryptoError::MalformedSignature);
        }
        Ok(Signature { r: b[..32].try_into().expect("len"), s: b[32..64].try_into().expect("len"), v: b[64] })
    }
}

/// Deterministic (RFC 6979) signature over a 32-byte digest.
pub fn sign(sk: &FieldElement, digest: &Digest32) -> Result<Signature, CryptoError> {
    let key = SigningKey::from_bytes(&sk.to_bytes().into()).map_err(|_| CryptoError::Malformed("signing key"))?;
    let (sig, rid) = key.sign_prehash_recoverable(digest.as_bytes()).map_err(|_| CryptoError::Malformed("signing"))?;
    let bytes = sig.to_bytes();
    Ok(Signature { v: rid.to_byte(), r: bytes[..32].try_into().expect("len"), s: bytes[32..].try_into().expect("len") })
}

/// Recovers the signer's public key.
pub fn recover(digest: &Digest32, sig: &Signature) -> Result<PublicKey, CryptoError> {
    let mut rs = [0u8; 64];
    rs[..32].copy_from_slice(&sig.r);
    rs[32..].copy_from_slice(&sig.s);
    let ecdsa = EcdsaSignature::from_slice(&rs).map_err(|_| CryptoError::MalformedSignature)?;
    let rid = RecoveryId::from_byte(sig.v).ok_or(CryptoError::MalformedSignature)?;
    let vk = VerifyingKey::recover_from_prehash(digest.as_bytes(), &ecdsa, rid)
        .map_err(|_| CryptoError::MalformedSignature)?;
    PublicKey::from_bytes(vk.to_encoded_point(true).as_bytes())
}

/// Recovers the signer's address.
pub fn verify(digest: &Digest32, sig: &Signature) -> Result<Address, CryptoError> {
    recover(digest, sig).map(|pk| pk.address())
}
