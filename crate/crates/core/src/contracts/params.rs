use serde::{Deserialize, Serialize};

use crate::chain::{Wei, WEI_PER_ETHER};

pub const ECONOMICS_VERSION: u32 = 1;

/// Monetary and timing parameters shared by all three contracts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Economics {
    /// Deposit locked per concurrent service.
    pub delta_d: Wei,
    /// Pay per reputation unit.
    pub delta_p: Wei,
    /// Bonus for the caller of `execute`.
    pub zeta: Wei,
    pub r_l: u32,
    pub r_u: u32,
    pub delta_r: u32,
    pub leader_deposit: Wei,
    /// Minimum follower fee on top of `zeta`.
    pub pool_fee: Wei,
    /// Reporter's part of a confiscated deposit after gas reimbursement, in basis points.
    pub reporter_share_bps: u32,
    /// Blocks the watchdog has to itself after the reveal window.
    pub priority_delay: u64,
    /// Reveal window length; `None` means half of epoch 2.
    pub reveal_window: Option<u64>,
    /// Blocks after `lead` during which a service counts as SCHEDULED.
    pub verification_window: u64,
}

impl Default for Economics {
    fn default() -> Self {
        let ether = WEI_PER_ETHER;
        Economics {
            delta_d: ether,
            delta_p: ether / 100,
            zeta: ether / 200,
            r_l: 1,
            r_u: 10,
            delta_r: 1,
            leader_deposit: ether,
            // $0.40 at 199.73 USD/ether.
            pool_fee: 2_002_703_649_927_402,
            reporter_share_bps: 5000,
            priority_delay: 5,
            reveal_window: None,
            verification_window: 3,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("unsupported config version {0}")]
    Version(u32),
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

/// Text form of [`Economics`]; amounts are strings such as `"0.01 ether"`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EconomicsFile {
    version: u32,
    delta_d: String,
    delta_p: String,
    zeta: String,
    r_l: u32,
    r_u: u32,
    delta_r: u32,
    leader_deposit: String,
    pool_fee: String,
    reporter_share_bps: u32,
    priority_delay: u64,
    #[serde(default)]
    reveal_window: Option<u64>,
    verification_window: u64,
}

/// Parses `123`, `123 wei`, `1.5 gwei` or `0.01 ether`.
pub fn parse_wei(s: &str) -> Result<Wei, ConfigError> {
    let bad = || ConfigError::Parse(format!("bad amount {s:?}"));
    let s = s.trim();
    let (num, unit) = match s.split_once(char::is_whitespace) {
        Some((n, u)) => (n.trim(), u.trim()),
        None => (s, "wei"),
    };
    let decimals = match unit {
        "wei" => 0u32,
        "gwei" => 9,
        "ether" | "eth" => 18,
        _ => return Err(bad()),
    };
    let (int, frac) = num.split_once('.').unwrap_or((num, ""));
    if int.is_empty() && frac.is_empty() || frac.len() > decimals as usize {
        return Err(bad());
    }
    let digits = |d: &str| -> Result<Wei, ConfigError> {
        if d.is_empty() {
            return Ok(0);
        }
        if !d.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        d.parse::<Wei>().map_err(|_| bad())
    };
    let scale = 10u128.pow(decimals);
    let frac_scaled = digits(frac)? * 10u128.pow(decimals - frac.len() as u32);
    digits(int)?.checked_mul(scale).and_then(|v| v.checked_add(frac_scaled)).ok_or_else(bad)
}

pub fn format_wei(w: Wei) -> String {
    w.to_string()
}

impl Economics {
    pub fn from_toml(text: &str) -> Result<Economics, ConfigError> {
        let f: EconomicsFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        if f.version != ECONOMICS_VERSION {
            return Err(ConfigError::Version(f.version));
        }
        let e = Economics {
            delta_d: parse_wei(&f.delta_d)?,
            delta_p: parse_wei(&f.delta_p)?,
            zeta: parse_wei(&f.zeta)?,
            r_l: f.r_l,
            r_u: f.r_u,
            delta_r: f.delta_r,
            leader_deposit: parse_wei(&f.leader_deposit)?,
            pool_fee: parse_wei(&f.pool_fee)?,
            reporter_share_bps: f.reporter_share_bps,
            priority_delay: f.priority_delay,
            reveal_window: f.reveal_window,
            verification_window: f.verification_window,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn to_toml(&self) -> String {
        let f = EconomicsFile {
            version: ECONOMICS_VERSION,
            delta_d: format_wei(self.delta_d),
            delta_p: format_wei(self.delta_p),
            zeta: format_wei(self.zeta),
            r_l: self.r_l,
            r_u: self.r_u,
            delta_r: self.delta_r,
            leader_deposit: format_wei(self.leader_deposit),
            pool_fee: format_wei(self.pool_fee),
            reporter_share_bps: self.reporter_share_bps,
            priority_delay: self.priority_delay,
            reveal_window: self.reveal_window,
            verification_window: self.verification_window,
        };
        toml::to_string(&f).expect("economics serialize")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.delta_d == 0 {
            return bad("delta_d must be positive");
        }
        if self.delta_r == 0 {
            return bad("delta_r must be positive");
        }
        if self.r_l > self.r_u {
            return bad("r_l exceeds r_u");
        }
        if self.reporter_share_bps > 10_000 {
            return bad("reporter_share_bps exceeds 10000");
        }
        Ok(())
    }

    /// Minimum fee `follow` accepts.
    pub fn min_follow_fee(&self) -> Wei {
        self.pool_fee + self.zeta
    }

    /// Number of reputation steps above the floor.
    pub fn reputation_steps(&self, r: u32) -> u32 {
        (r.saturating_sub(self.r_l)) / self.delta_r
    }
}
