//! Cryptographic primitives: Keccak-256, threshold sharing, ECIES, ECDSA with
//! recovery, a secp256k1 VRF and onion wrapping of shares.
//!
//! All randomness is drawn from a caller-supplied RNG, so every operation is
//! a pure function of its inputs and the RNG seed.

pub mod field;
pub mod hash;
pub mod keys;
pub mod onion;
pub mod shamir;
pub mod sig;
pub mod vrf;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

pub use field::{FieldElement, Fp257, ShareField};
pub use hash::{hash, hash_concat, Digest32};
pub use keys::{decrypt, encrypt, public_key_of, Address, KeyKind, KeyPair, PublicKey};
pub use onion::{onion_peel, onion_peel_group, onion_wrap, Onion};
pub use shamir::{restore as ss_restore, split as ss_split, Share};
pub use sig::{recover, sign, verify, Signature};
pub use vrf::{vrf_eval, vrf_verify, VrfEvidence};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("invalid threshold t={t} for n={n}")]
    InvalidThreshold { t: usize, n: usize },
    #[error("insufficient shares: have {have}, need {need}")]
    InsufficientShares { have: usize, need: usize },
    #[error("duplicate share index {0}")]
    DuplicateIndex(u16),
    #[error("decryption failed at layer {layer}")]
    DecryptionFailed { layer: usize },
    #[error("malformed signature")]
    MalformedSignature,
    #[error("invalid VRF proof")]
    InvalidProof,
    #[error("empty key list")]
    EmptyKeyList,
    #[error("insufficient keys: have {have}, need {need}")]
    InsufficientKeys { have: usize, need: usize },
    #[error("value out of field range")]
    OutOfRange,
    #[error("malformed input: {0}")]
    Malformed(&'static str),
}

/// The deterministic RNG used throughout the simulator.
pub type DetRng = ChaCha20Rng;

pub fn seeded_rng(seed: u64) -> DetRng {
    ChaCha20Rng::seed_from_u64(seed)
}
