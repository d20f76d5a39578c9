use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::crypto::Address;

use super::Wei;

/// One line of a transaction trace: `block|from|to|selector|value_wei|gas_used|status`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub block: u64,
    pub from: Address,
    pub to: Option<Address>,
    /// `0x`-prefixed hex, `create` for deployments, `-` for transfers.
    pub selector: String,
    pub value_wei: Wei,
    pub gas_used: u64,
    pub success: bool,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let to = self.to.map(|a| a.to_hex()).unwrap_or_else(|| "-".into());
        write!(
            f,
            "{}|{}|{}|{}|{}|{}|{}",
            self.block,
            self.from.to_hex(),
            to,
            self.selector,
            self.value_wei,
            self.gas_used,
            if self.success { "SUCCESS" } else { "REVERT" }
        )
    }
}

#[derive(Debug, thiserror::Error)]
#[error("malformed trace line: {0}")]
pub struct TraceParseError(pub String);

impl FromStr for TraceRecord {
    type Err = TraceParseError;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let err = || TraceParseError(line.to_string());
        let parts: Vec<&str> = line.trim().split('|').collect();
        if parts.len() != 7 {
            return Err(err());
        }
        let addr = |s: &str| Address::from_hex(s).ok_or_else(err);
        Ok(TraceRecord {
            block: parts[0].parse().map_err(|_| err())?,
            from: addr(parts[1])?,
            to: if parts[2] == "-" { None } else { Some(addr(parts[2])?) },
            selector: parts[3].to_string(),
            value_wei: parts[4].parse().map_err(|_| err())?,
            gas_used: parts[5].parse().map_err(|_| err())?,
            success: match parts[6] {
                "SUCCESS" => true,
                "REVERT" => false,
                _ => return Err(err()),
            },
        })
    }
}

/// Parses a whole trace, skipping blank lines.
pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>, TraceParseError> {
    text.lines().filter(|l| !l.trim().is_empty()).map(str::parse).collect()
}
