//! Scenarios shipped with the crate.

use super::Scenario;
use crate::contracts::ConfigError;

macro_rules! bundle {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../scenarios/", $name, ".toml")))),*]
    };
}

pub const BUNDLED: &[(&str, &str)] = bundle![
    "opt_clean",
    "opt_pool",
    "pes_one_withholder",
    "pes_epoch2_recovery",
    "pes_failure",
    "leak_reported",
    "premature_reveal",
    "invalid_committee",
    "fake_key",
];

pub fn names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn load(name: &str) -> Option<Result<Scenario, ConfigError>> {
    source(name).map(Scenario::from_toml)
}
