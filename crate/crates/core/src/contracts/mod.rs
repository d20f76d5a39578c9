//! Bulletin board, proxy and supplemental contracts, plus a small target
//! contract used as a payload destination.

pub mod bulletin;
pub mod params;
pub mod proxy;
pub mod selection;
pub mod supplemental;
pub mod target;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::chain::{abi, Contract, ContractFactory, Revert, Selector, Wei};
use crate::crypto::{hash, hash_concat, Address, Digest32};

pub use bulletin::{BulletinBoard, ExecutorRecord, ServiceRecord, ServiceState};
pub use params::{format_wei, parse_wei, ConfigError, Economics};
pub use proxy::{Proxy, ProxyInit};
pub use selection::{select_committee, select_with, verify_slot, RegistryEntry};
pub use supplemental::{Supplemental, SupplementalInit};
pub use target::Target;

/// Canonical signatures whose Keccak prefixes are the function selectors.
pub mod signatures {
    pub const REGISTER: &str = "register(bytes33,bytes33[])";
    pub const TOP_UP: &str = "topUp()";
    pub const ADD_KEYS: &str = "addKeys(bytes33[])";
    pub const WITHDRAW: &str = "withdraw(uint256)";
    pub const NOTIFY: &str = "notify()";
    pub const LEAD: &str = "lead(uint64,uint64,bytes33,bytes32,bytes,uint64,uint16,uint16,uint16,address,address[])";
    pub const INVALID: &str = "invalid(address,uint32)";
    pub const CONVICT: &str = "convict(address,address,uint8,address,uint256)";
    pub const BIND: &str = "bind(address,address)";
    pub const SETTLE: &str = "settle(address)";
    pub const FOLLOW: &str = "follow(bytes32,uint256)";
    pub const LEAK: &str = "leak(bytes32,bytes33)";
    pub const EXECUTE: &str = "execute(address,uint256,bytes,bytes32,uint32,bytes65)";
    pub const DEPLOY: &str = "deploy(address,bytes,bytes65)";
    pub const FINALIZE: &str = "finalize()";
    pub const REVEAL: &str = "reveal(bytes32)";
    pub const MISSING: &str = "missing(address)";
    pub const FAKE: &str = "fake(address)";
    pub const SET: &str = "set(uint64)";
}

/// Selector for a canonical signature.
pub fn sel(signature: &str) -> Selector {
    Selector::of(signature)
}

pub const TAG_BULLETIN: [u8; 4] = *b"CB1\0";
pub const TAG_PROXY: [u8; 4] = *b"CP1\0";
pub const TAG_SUPPLEMENTAL: [u8; 4] = *b"CS1\0";
pub const TAG_TARGET: [u8; 4] = *b"CT1\0";

/// Creation code: a 4-byte tag followed by the encoded constructor input.
pub fn code<T: Serialize>(tag: [u8; 4], init: &T) -> Vec<u8> {
    let mut out = tag.to_vec();
    out.extend(abi::encode(init));
    out
}

/// `(l, t, n)`: onion depth, restore threshold and share count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub l: u16,
    pub t: u16,
    pub n: u16,
}

impl ProtocolParams {
    pub fn new(l: u16, t: u16, n: u16) -> ProtocolParams {
        ProtocolParams { l, t, n }
    }

    pub fn committee_size(&self) -> usize {
        self.l as usize * self.n as usize
    }

    pub fn is_valid(&self) -> bool {
        self.l >= 1 && self.t >= 1 && self.t <= self.n
    }

    /// 0-based committee slots holding the keys for share `i` (1-based).
    pub fn group(&self, share: u16) -> std::ops::Range<usize> {
        let l = self.l as usize;
        let start = l * (share as usize - 1);
        start..start + l
    }

    /// Share (1-based) whose onion uses committee slot `slot` (0-based).
    pub fn share_of_slot(&self, slot: usize) -> u16 {
        (slot / self.l as usize) as u16 + 1
    }
}

impl fmt::Display for ProtocolParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{l={}, t={}, n={}}}", self.l, self.t, self.n)
    }
}

/// Inclusive block window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timer {
    pub start: u64,
    pub end: u64,
}

impl Timer {
    pub fn new(start: u64, end: u64) -> Timer {
        Timer { start, end }
    }

    pub fn contains(&self, block: u64) -> bool {
        self.start <= block && block <= self.end
    }

    pub fn len(&self) -> u64 {
        self.end + 1 - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    /// Last block of epoch 1; the window splits in half.
    pub fn epoch1_end(&self) -> u64 {
        self.start + self.len() / 2 - 1
    }

    pub fn epoch2_start(&self) -> u64 {
        self.epoch1_end() + 1
    }

    pub fn epoch2_len(&self) -> u64 {
        self.end - self.epoch1_end()
    }
}

/// A transaction the proxy makes on a user's behalf.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payload {
    /// `None` creates a contract from `data`.
    pub to: Option<Address>,
    pub value: Wei,
    pub data: Vec<u8>,
}

impl Payload {
    pub fn transfer(to: Address, value: Wei) -> Payload {
        Payload { to: Some(to), value, data: Vec::new() }
    }

    pub fn call(to: Address, value: Wei, data: Vec<u8>) -> Payload {
        Payload { to: Some(to), value, data }
    }

    pub fn create(code: Vec<u8>, value: Wei) -> Payload {
        Payload { to: None, value, data: code }
    }

    pub fn encode(&self) -> Vec<u8> {
        abi::encode(self)
    }

    pub fn decode(bytes: &[u8]) -> Option<Payload> {
        bincode::deserialize(bytes).ok()
    }

    /// Hiding commitment stored on-chain in place of the payload.
    pub fn commitment(&self, salt: &[u8; 32]) -> Digest32 {
        hash_concat(&[salt, &self.encode()])
    }
}

/// Message a payload owner signs to authorise execution through a proxy.
pub fn execution_digest(proxy: &Address, commitment: &Digest32) -> Digest32 {
    hash_concat(&[&proxy.0, &commitment.0])
}

/// Message the leader signs to authorise a supplemental deployment.
pub fn deployment_digest(proxy: &Address, supplemental_code: &[u8]) -> Digest32 {
    hash_concat(&[&proxy.0, &hash(supplemental_code).0])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Offense {
    Leak,
    Missing,
    Fake,
}

impl fmt::Display for Offense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Offense::Leak => "LEAK",
            Offense::Missing => "MISSING",
            Offense::Fake => "FAKE",
        })
    }
}

/// Instantiates the four contract kinds from tagged code.
#[derive(Clone, Copy, Debug, Default)]
pub struct StandardFactory;

impl ContractFactory for StandardFactory {
    fn creation_function(&self, code: &[u8]) -> Option<&'static str> {
        match code.get(..4)?.try_into().ok()? {
            TAG_BULLETIN => Some("deploy_bulletin"),
            TAG_PROXY => Some("deploy_proxy"),
            TAG_SUPPLEMENTAL => Some("deploy"),
            TAG_TARGET => Some("deploy_target"),
            _ => None,
        }
    }

    fn instantiate(&self, code: &[u8]) -> Result<Box<dyn Contract>, Revert> {
        let bad = || Revert::code("bad-code");
        let tag: [u8; 4] = code.get(..4).ok_or_else(bad)?.try_into().map_err(|_| bad())?;
        let body = &code[4..];
        Ok(match tag {
            TAG_BULLETIN => Box::new(BulletinBoard::new(abi::decode_args(body)?)),
            TAG_PROXY => Box::new(Proxy::new(abi::decode_args(body)?)),
            TAG_SUPPLEMENTAL => Box::new(Supplemental::new(abi::decode_args(body)?)),
            TAG_TARGET => Box::new(Target::default()),
            _ => return Err(bad()),
        })
    }
}

/// Maps selectors to schedule names for a static function table.
pub(crate) fn resolve(
    cache: &'static std::sync::OnceLock<Vec<(Selector, &'static str)>>,
    table: &'static [(&'static str, &'static str)],
    s: Selector,
) -> Option<&'static str> {
    cache
        .get_or_init(|| table.iter().map(|(sig, name)| (sel(sig), *name)).collect())
        .iter()
        .find(|(x, _)| *x == s)
        .map(|(_, n)| *n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timer_halves() {
        let t = Timer::new(50, 60);
        assert_eq!(t.len(), 11);
        assert_eq!(t.epoch1_end(), 54);
        assert_eq!(t.epoch2_len(), 6);
        let active: Vec<u64> = (40..70).filter(|b| t.contains(*b)).collect();
        assert_eq!(active, (50..=60).collect::<Vec<_>>());
        let even = Timer::new(10, 19);
        assert_eq!((even.epoch1_end(), even.epoch2_len()), (14, 5));
    }

    #[test]
    fn share_groups() {
        let p = ProtocolParams::new(3, 4, 10);
        assert_eq!(p.committee_size(), 30);
        assert_eq!(p.group(1), 0..3);
        assert_eq!(p.group(10), 27..30);
        assert_eq!(p.share_of_slot(0), 1);
        assert_eq!(p.share_of_slot(29), 10);
        assert!(!ProtocolParams::new(2, 4, 3).is_valid());
    }

    #[test]
    fn selectors_are_distinct() {
        use signatures::*;
        let all = [
            REGISTER, TOP_UP, ADD_KEYS, WITHDRAW, NOTIFY, LEAD, INVALID, CONVICT, BIND, SETTLE, FOLLOW, LEAK, EXECUTE,
            DEPLOY, FINALIZE, REVEAL, MISSING, FAKE, SET,
        ];
        let mut s: Vec<_> = all.iter().map(|x| sel(x)).collect();
        s.sort();
        s.dedup();
        assert_eq!(s.len(), all.len());
    }

    #[test]
    fn factory_rejects_unknown_tag() {
        assert!(StandardFactory.instantiate(b"XX1\0").is_err());
        assert!(StandardFactory.instantiate(b"C").is_err());
        assert_eq!(StandardFactory.creation_function(&code(TAG_PROXY, &0u8)), Some("deploy_proxy"));
    }
}
