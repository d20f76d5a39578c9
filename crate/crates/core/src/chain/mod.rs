//! Deterministic single-ledger simulator: accounts, signed transactions,
//! contract hosting, gas metering and a replayable trace.

pub mod abi;
pub mod gas;
pub mod ledger;
pub mod trace;
pub mod tx;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::crypto::Address;
pub use abi::{decode_args, encode, encode_call, split_call, Selector};
pub use gas::{GasEntry, GasSchedule, WEI_PER_ETHER};
pub use ledger::{CallContext, Contract, ContractFactory, Env, Event, Ledger, Receipt, Status, MAX_CALL_DEPTH};
pub use trace::{parse_trace, TraceParseError, TraceRecord};
pub use tx::Transaction;

pub type Wei = u128;

/// Contract-level failure; rolls back the transaction except for its fee.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Revert {
    pub code: String,
    pub detail: String,
}

impl Revert {
    pub fn new(code: &str, detail: String) -> Revert {
        Revert { code: code.to_string(), detail }
    }

    pub fn code(code: &str) -> Revert {
        Revert::new(code, String::new())
    }
}

impl fmt::Display for Revert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.detail.is_empty() {
            f.write_str(&self.code)
        } else {
            write!(f, "{}: {}", self.code, self.detail)
        }
    }
}

impl std::error::Error for Revert {}

/// Transaction rejected before inclusion; nothing is charged.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("signature does not match sender")]
    BadSignature,
    #[error("bad nonce: expected {expected}, got {got}")]
    BadNonce { expected: u64, got: u64 },
    #[error("insufficient balance: need {need} wei, have {have}")]
    InsufficientBalance { need: Wei, have: Wei },
}

/// `require`-style guard for contract code.
pub fn ensure(cond: bool, code: &str) -> Result<(), Revert> {
    if cond {
        Ok(())
    } else {
        Err(Revert::code(code))
    }
}
