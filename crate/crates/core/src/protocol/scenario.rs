//! Versioned scenario configuration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chain::{Wei, WEI_PER_ETHER};
use crate::contracts::params::{parse_wei, ConfigError};
use crate::contracts::ProtocolParams;

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Misbehavior {
    /// Never discloses the service key.
    Withhold,
    /// Discloses a key that does not match the registered one.
    Fake,
    /// The key reaches an outside account, which reports it.
    Leak,
    /// Discloses the key to the committee before the timer starts.
    PrematureReveal,
    /// Unreachable in epoch 1, honest afterwards.
    OfflineEpoch1,
}

impl Misbehavior {
    pub const ALL: [Misbehavior; 5] = [
        Misbehavior::Withhold,
        Misbehavior::Fake,
        Misbehavior::Leak,
        Misbehavior::PrematureReveal,
        Misbehavior::OfflineEpoch1,
    ];

    /// True for behaviour the contracts treat as an offense.
    pub fn is_offense(&self) -> bool {
        !matches!(self, Misbehavior::OfflineEpoch1)
    }
}

impl fmt::Display for Misbehavior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Misbehavior::Withhold => "withhold",
            Misbehavior::Fake => "fake",
            Misbehavior::Leak => "leak",
            Misbehavior::PrematureReveal => "premature_reveal",
            Misbehavior::OfflineEpoch1 => "offline_epoch1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown offense {0:?}")]
pub struct UnknownOffense(pub String);

impl FromStr for Misbehavior {
    type Err = UnknownOffense;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Misbehavior::ALL
            .into_iter()
            .find(|m| m.to_string() == s.to_ascii_lowercase().replace('-', "_"))
            .ok_or_else(|| UnknownOffense(s.to_string()))
    }
}

/// Who an injection applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InjectionTarget {
    /// 0-based committee slot.
    Slot(usize),
    /// 0-based registry index; must end up in the committee.
    Executor(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Injection {
    pub target: InjectionTarget,
    pub offense: Misbehavior,
    /// Block for waiting-phase offenses; defaults to the first block after verification.
    pub at: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeaderTamper {
    None,
    SubstituteSlot,
    ForgeProof,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PayloadSpec {
    /// Send `value` to a fresh recipient account.
    Transfer { value: Wei },
    /// Call `set(v)` on the shared target contract.
    Invoke { value: Wei, set: u64 },
    /// Create a new target contract holding `value`.
    Create { value: Wei },
}

impl PayloadSpec {
    pub fn value(&self) -> Wei {
        match self {
            PayloadSpec::Transfer { value } | PayloadSpec::Invoke { value, .. } | PayloadSpec::Create { value } => {
                *value
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaderSpec {
    pub fund: Wei,
    pub payload: PayloadSpec,
    pub tamper: LeaderTamper,
    pub tamper_slot: usize,
    /// Committee slots that never receive the schedule delivery.
    pub omit_delivery: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FollowerSpec {
    pub fund: Wei,
    /// `None` pays the minimum fee.
    pub fee: Option<Wei>,
    pub payload: PayloadSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub params: ProtocolParams,
    pub executors: usize,
    pub deposit_units: u32,
    pub keys_per_executor: usize,
    pub online_probability: f64,
    /// Blocks from scheduling to timer start.
    pub delay: u64,
    pub length: u64,
    pub leader: LeaderSpec,
    pub followers: Vec<FollowerSpec>,
    pub injections: Vec<Injection>,
}

impl Scenario {
    /// An honest baseline with the given parameters.
    pub fn honest(name: &str, params: ProtocolParams, executors: usize, seed: u64) -> Scenario {
        Scenario {
            name: name.to_string(),
            seed,
            params,
            executors,
            deposit_units: 2,
            keys_per_executor: 2,
            online_probability: 1.0,
            delay: 10,
            length: 20,
            leader: LeaderSpec {
                fund: WEI_PER_ETHER,
                payload: PayloadSpec::Transfer { value: WEI_PER_ETHER / 2 },
                tamper: LeaderTamper::None,
                tamper_slot: 0,
                omit_delivery: Vec::new(),
            },
            followers: Vec::new(),
            injections: Vec::new(),
        }
    }

    pub fn with_injection(mut self, target: InjectionTarget, offense: Misbehavior) -> Scenario {
        self.injections.push(Injection { target, offense, at: None });
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if !self.params.is_valid() {
            return bad(format!("invalid params {}", self.params));
        }
        if self.params.committee_size() > self.executors {
            return bad(format!(
                "committee of {} exceeds registry of {}",
                self.params.committee_size(),
                self.executors
            ));
        }
        if self.deposit_units == 0 || self.keys_per_executor == 0 {
            return bad("executors need a deposit and at least one key".into());
        }
        if !(0.0..=1.0).contains(&self.online_probability) {
            return bad("online_probability must lie in [0, 1]".into());
        }
        if self.delay < 6 {
            return bad("delay must be at least 6 blocks".into());
        }
        if self.length < 4 {
            return bad("length must be at least 4 blocks".into());
        }
        if self.leader.fund < self.leader.payload.value() {
            return bad("leader fund below payload value".into());
        }
        for (i, f) in self.followers.iter().enumerate() {
            if f.fund < f.payload.value() {
                return bad(format!("follower {i} fund below payload value"));
            }
        }
        let nl = self.params.committee_size();
        for inj in &self.injections {
            match inj.target {
                InjectionTarget::Slot(s) if s >= nl => return bad(format!("slot {s} outside committee of {nl}")),
                InjectionTarget::Executor(e) if e >= self.executors => {
                    return bad(format!("executor {e} outside registry"))
                }
                _ => {}
            }
        }
        for s in &self.leader.omit_delivery {
            if *s >= nl {
                return bad(format!("omit_delivery slot {s} outside committee"));
            }
        }
        if self.leader.tamper != LeaderTamper::None && self.leader.tamper_slot >= nl {
            return bad("tamper_slot outside committee".into());
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Scenario, ConfigError> {
        let f: ScenarioFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        let s = f.into_scenario()?;
        s.validate()?;
        Ok(s)
    }
}

// Text form.

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    version: u32,
    name: String,
    seed: u64,
    params: ParamsFile,
    registry: RegistryFile,
    timer: TimerFile,
    leader: LeaderFile,
    #[serde(default)]
    followers: Vec<FollowerFile>,
    #[serde(default)]
    injections: Vec<InjectionFile>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    l: u16,
    t: u16,
    n: u16,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    executors: usize,
    #[serde(default = "default_units")]
    deposit_units: u32,
    #[serde(default = "default_units")]
    keys_per_executor: u32,
    #[serde(default = "default_online")]
    online_probability: f64,
}

fn default_units() -> u32 {
    2
}

fn default_online() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TimerFile {
    delay: u64,
    length: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PayloadFile {
    kind: String,
    #[serde(default)]
    value: Option<String>,
    #[serde(default)]
    set: Option<u64>,
}

impl PayloadFile {
    fn into_spec(self) -> Result<PayloadSpec, ConfigError> {
        let value = match &self.value {
            Some(v) => parse_wei(v)?,
            None => 0,
        };
        match self.kind.as_str() {
            "transfer" => Ok(PayloadSpec::Transfer { value }),
            "invoke" => Ok(PayloadSpec::Invoke {
                value,
                set: self.set.ok_or_else(|| ConfigError::Parse("invoke payload needs `set`".into()))?,
            }),
            "create" => Ok(PayloadSpec::Create { value }),
            k => Err(ConfigError::Parse(format!("unknown payload kind {k:?}"))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeaderFile {
    fund: String,
    payload: PayloadFile,
    #[serde(default)]
    tamper: Option<String>,
    #[serde(default)]
    tamper_slot: usize,
    #[serde(default)]
    omit_delivery: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FollowerFile {
    fund: String,
    #[serde(default)]
    fee: Option<String>,
    payload: PayloadFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InjectionFile {
    #[serde(default)]
    slot: Option<usize>,
    #[serde(default)]
    executor: Option<usize>,
    offense: String,
    #[serde(default)]
    at: Option<u64>,
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario, ConfigError> {
        if self.version != SCENARIO_VERSION {
            return Err(ConfigError::Version(self.version));
        }
        let tamper = match self.leader.tamper.as_deref() {
            None | Some("none") => LeaderTamper::None,
            Some("substitute_slot") => LeaderTamper::SubstituteSlot,
            Some("forge_proof") => LeaderTamper::ForgeProof,
            Some(t) => return Err(ConfigError::Parse(format!("unknown tamper mode {t:?}"))),
        };
        let mut followers = Vec::new();
        for f in self.followers {
            followers.push(FollowerSpec {
                fund: parse_wei(&f.fund)?,
                fee: f.fee.as_deref().map(parse_wei).transpose()?,
                payload: f.payload.into_spec()?,
            });
        }
        let mut injections = Vec::new();
        for i in self.injections {
            let target = match (i.slot, i.executor) {
                (Some(s), None) => InjectionTarget::Slot(s),
                (None, Some(e)) => InjectionTarget::Executor(e),
                _ => return Err(ConfigError::Parse("injection needs exactly one of `slot`, `executor`".into())),
            };
            let offense = i.offense.parse().map_err(|e: UnknownOffense| ConfigError::Parse(e.to_string()))?;
            injections.push(Injection { target, offense, at: i.at });
        }
        Ok(Scenario {
            name: self.name,
            seed: self.seed,
            params: ProtocolParams::new(self.params.l, self.params.t, self.params.n),
            executors: self.registry.executors,
            deposit_units: self.registry.deposit_units,
            keys_per_executor: self.registry.keys_per_executor as usize,
            online_probability: self.registry.online_probability,
            delay: self.timer.delay,
            length: self.timer.length,
            leader: LeaderSpec {
                fund: parse_wei(&self.leader.fund)?,
                payload: self.leader.payload.into_spec()?,
                tamper,
                tamper_slot: self.leader.tamper_slot,
                omit_delivery: self.leader.omit_delivery,
            },
            followers,
            injections,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
version = 1
name = "sample"
seed = 3

[params]
l = 2
t = 2
n = 3

[registry]
executors = 8

[timer]
delay = 10
length = 12

[leader]
fund = "1 ether"
payload = { kind = "invoke", set = 42 }

[[followers]]
fund = "0.1 ether"
payload = { kind = "transfer", value = "0.05 ether" }

[[injections]]
slot = 1
offense = "premature-reveal"
at = 6
"#;

    #[test]
    fn parses_sample() {
        let s = Scenario::from_toml(SAMPLE).unwrap();
        assert_eq!(s.params, ProtocolParams::new(2, 2, 3));
        assert_eq!(s.leader.payload, PayloadSpec::Invoke { value: 0, set: 42 });
        assert_eq!(s.followers.len(), 1);
        assert_eq!(s.injections[0].offense, Misbehavior::PrematureReveal);
        assert_eq!(s.injections[0].target, InjectionTarget::Slot(1));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(Scenario::from_toml("not toml").is_err());
        assert!(Scenario::from_toml(&SAMPLE.replace("version = 1", "version = 2")).is_err());
        assert!(Scenario::from_toml(&SAMPLE.replace("executors = 8", "executors = 5")).is_err());
        assert!(Scenario::from_toml(&SAMPLE.replace("premature-reveal", "bribe")).is_err());
        assert!(Scenario::from_toml(&SAMPLE.replace("slot = 1", "slot = 6")).is_err());
    }

    #[test]
    fn offense_names_round_trip() {
        for m in Misbehavior::ALL {
            assert_eq!(m.to_string().parse::<Misbehavior>().unwrap(), m);
        }
        assert!("bribe".parse::<Misbehavior>().is_err());
    }
}
