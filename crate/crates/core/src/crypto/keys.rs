//! Key pairs, addresses and hybrid public-key encryption.

use std::fmt;

use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use k256::elliptic_curve::ff::Field;
use k256::elliptic_curve::sec1::{FromEncodedPoint, ToEncodedPoint};
use k256::{AffinePoint, EncodedPoint, ProjectivePoint, Scalar};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use super::field::FieldElement;
use super::hash::{hash, hash_concat};
use super::CryptoError;

/// A 20-byte account or contract address.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Address(pub [u8; 20]);

impl Address {
    pub const ZERO: Address = Address([0u8; 20]);

    /// Last 20 bytes of the Keccak-256 of the uncompressed point (without the 0x04 tag).
    pub fn from_public_key(pk: &PublicKey) -> Address {
        let point = pk.point().expect("public keys are validated on construction");
        let uncompressed = point.to_encoded_point(false);
        let d = hash(&uncompressed.as_bytes()[1..]);
        let mut out = [0u8; 20];
        out.copy_from_slice(&d.0[12..]);
        Address(out)
    }

    /// Deterministic contract address from the creator and its creation counter.
    pub fn for_contract(creator: &Address, nonce: u64) -> Address {
        let d = hash_concat(&[b"create", &creator.0, &nonce.to_be_bytes()]);
        let mut out = [0u8; 20];
        out.copy_from_slice(&d.0[12..]);
        Address(out)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    /// Accepts 40 hex digits, with or without a `0x` prefix.
    pub fn from_hex(s: &str) -> Option<Address> {
        let raw = hex::decode(s.strip_prefix("0x").unwrap_or(s)).ok()?;
        Some(Address(raw.try_into().ok()?))
    }

    pub fn short(&self) -> String {
        hex::encode(&self.0[..4])
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", self.to_hex())
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", self.to_hex())
    }
}

/// A compressed SEC1 secp256k1 public key.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PublicKey([u8; 33]);

impl PublicKey {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        let arr: [u8; 33] = bytes.try_into().map_err(|_| CryptoError::Malformed("public key length"))?;
        let pk = PublicKey(arr);
        pk.point()?;
        Ok(pk)
    }

    pub fn as_bytes(&self) -> &[u8; 33] {
        &self.0
    }

    pub(crate) fn point(&self) -> Result<ProjectivePoint, CryptoError> {
        let enc = EncodedPoint::from_bytes(self.0).map_err(|_| CryptoError::Malformed("public key encoding"))?;
        Option::<AffinePoint>::from(AffinePoint::from_encoded_point(&enc))
            .map(ProjectivePoint::from)
            .ok_or(CryptoError::Malformed("public key not on curve"))
    }

    pub(crate) fn from_point(p: &ProjectivePoint) -> PublicKey {
        let enc = p.to_affine().to_encoded_point(true);
        PublicKey(enc.as_bytes().try_into().expect("compressed point is 33 bytes"))
    }

    pub fn address(&self) -> Address {
        Address::from_public_key(self)
    }
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({})", hex::encode(self.0))
    }
}

impl Serialize for Address {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Address {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Address::from_hex(&s).ok_or_else(|| serde::de::Error::custom("bad address"))
    }
}

impl Serialize for PublicKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(self.0))
    }
}

impl<'de> Deserialize<'de> for PublicKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let raw = hex::decode(&s).map_err(serde::de::Error::custom)?;
        PublicKey::from_bytes(&raw).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KeyKind {
    /// Controls an externally owned account.
    Account,
    /// One-shot key an executor registers for a single service.
    Service,
    /// The leader's per-service key that encrypts payloads and drives the VRF.
    UserService,
}

#[derive(Clone, PartialEq, Eq)]
pub struct KeyPair {
    sk: FieldElement,
    pk: PublicKey,
    pub kind: KeyKind,
}

impl KeyPair {
    pub fn generate<R: RngCore + CryptoRng>(kind: KeyKind, rng: &mut R) -> KeyPair {
        loop {
            let s = Scalar::random(&mut *rng);
            if !bool::from(s.is_zero()) {
                return KeyPair::from_secret(FieldElement(s), kind).expect("non-zero scalar");
            }
        }
    }

    pub fn from_secret(sk: FieldElement, kind: KeyKind) -> Result<KeyPair, CryptoError> {
        Ok(KeyPair { pk: public_key_of(&sk)?, sk, kind })
    }

    pub fn secret(&self) -> &FieldElement {
        &self.sk
    }

    pub fn public(&self) -> &PublicKey {
        &self.pk
    }

    pub fn address(&self) -> Address {
        self.pk.address()
    }
}

impl fmt::Debug for KeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("KeyPair").field("pk", &self.pk).field("kind", &self.kind).finish_non_exhaustive()
    }
}

/// Derives the public key of a non-zero secret.
pub fn public_key_of(sk: &FieldElement) -> Result<PublicKey, CryptoError> {
    if sk.is_zero() {
        return Err(CryptoError::Malformed("zero secret key"));
    }
    Ok(PublicKey::from_point(&(ProjectivePoint::GENERATOR * sk.0)))
}

const ECIES_DOMAIN: &[u8] = b"timed-tx/ecies/v1";
const EPHEMERAL_LEN: usize = 33;

fn stream_key(shared: &ProjectivePoint, ephemeral: &PublicKey) -> Key {
    let shared_x = shared.to_affine().to_encoded_point(true);
    let d = hash_concat(&[ECIES_DOMAIN, &shared_x.as_bytes()[1..], ephemeral.as_bytes()]);
    Key::clone_from_slice(&d.0)
}

/// ECIES: ephemeral ECDH on secp256k1, Keccak key derivation, ChaCha20-Poly1305.
///
/// Layout: `ephemeral pk (33) || ciphertext || tag (16)`.
pub fn encrypt<R: RngCore + CryptoRng>(pk: &PublicKey, plaintext: &[u8], rng: &mut R) -> Result<Vec<u8>, CryptoError> {
    let recipient = pk.point()?;
    let eph = KeyPair::generate(KeyKind::Account, rng);
    let shared = recipient * eph.sk.0;
    let cipher = ChaCha20Poly1305::new(&stream_key(&shared, &eph.pk));
    // The key is fresh per message, so a fixed nonce is never reused under one key.
    let body =
        cipher.encrypt(Nonce::from_slice(&[0u8; 12]), plaintext).map_err(|_| CryptoError::Malformed("encryption"))?;
    let mut out = Vec::with_capacity(EPHEMERAL_LEN + body.len());
    out.extend_from_slice(eph.pk.as_bytes());
    out.extend_from_slice(&body);
    Ok(out)
}

pub fn decrypt(sk: &FieldElement, ciphertext: &[u8]) -> Result<Vec<u8>, CryptoError> {
    if ciphertext.len() < EPHEMERAL_LEN + 16 {
        return Err(CryptoError::DecryptionFailed { layer: 0 });
    }
    let eph =
        PublicKey::from_bytes(&ciphertext[..EPHEMERAL_LEN]).map_err(|_| CryptoError::DecryptionFailed { layer: 0 })?;
    let shared = eph.point()? * sk.0;
    let cipher = ChaCha20Poly1305::new(&stream_key(&shared, &eph));
    cipher
        .decrypt(Nonce::from_slice(&[0u8; 12]), &ciphertext[EPHEMERAL_LEN..])
        .map_err(|_| CryptoError::DecryptionFailed { layer: 0 })
}
