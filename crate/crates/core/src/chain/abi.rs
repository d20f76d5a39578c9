//! Call data: a 4-byte selector followed by bincode-encoded arguments.

use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::crypto::hash;

use super::Revert;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Selector(pub [u8; 4]);

impl Selector {
    /// First four bytes of the Keccak-256 of a canonical signature string.
    pub fn of(signature: &str) -> Selector {
        let d = hash(signature.as_bytes());
        Selector([d.0[0], d.0[1], d.0[2], d.0[3]])
    }

    pub fn to_hex(&self) -> String {
        format!("0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

pub fn encode_call<T: Serialize>(selector: Selector, args: &T) -> Vec<u8> {
    let mut out = selector.0.to_vec();
    out.extend(bincode::serialize(args).expect("call arguments serialize"));
    out
}

pub fn split_call(data: &[u8]) -> Option<(Selector, &[u8])> {
    if data.len() < 4 {
        return None;
    }
    Some((Selector([data[0], data[1], data[2], data[3]]), &data[4..]))
}

pub fn decode_args<T: DeserializeOwned>(args: &[u8]) -> Result<T, Revert> {
    bincode::deserialize(args).map_err(|e| Revert::new("bad-calldata", e.to_string()))
}

/// Encodes a value for code or return data.
pub fn encode<T: Serialize>(v: &T) -> Vec<u8> {
    bincode::serialize(v).expect("value serializes")
}
