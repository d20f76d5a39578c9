//! Cost analytics: per-path totals, committee scaling and pooling.

pub mod render;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chain::{GasSchedule, Wei};
use crate::protocol::RunSummary;

pub use render::{render_delimited, render_pooling_delimited, render_pooling_text, render_text};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CostPath {
    Opt,
    Pes,
    Pool,
}

impl CostPath {
    pub const ALL: [CostPath; 3] = [CostPath::Opt, CostPath::Pes, CostPath::Pool];
}

impl fmt::Display for CostPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CostPath::Opt => "OPT",
            CostPath::Pes => "PES",
            CostPath::Pool => "POOL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown path {0:?}")]
pub struct UnknownPath(pub String);

impl FromStr for CostPath {
    type Err = UnknownPath;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CostPath::ALL
            .into_iter()
            .find(|p| p.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownPath(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Leader,
    Follower,
    Executor,
}

impl Party {
    /// Who sends a given service function.
    pub fn of(function: &str) -> Party {
        match function {
            "deploy_proxy" | "lead" | "settle" => Party::Leader,
            "follow" => Party::Follower,
            _ => Party::Executor,
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Leader => "leader",
            Party::Follower => "follower",
            Party::Executor => "executors",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineItem {
    pub function: String,
    pub party: Party,
    pub calls: u64,
    pub gas_each: u64,
    pub gas: u64,
    pub fee_wei: Wei,
    pub usd: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub path: CostPath,
    pub committee_size: u64,
    pub items: Vec<LineItem>,
    pub total_gas: u64,
    pub total_fee_wei: Wei,
    pub total_usd: f64,
    pub by_party: BTreeMap<Party, f64>,
}

impl CostReport {
    fn build(schedule: &GasSchedule, path: CostPath, nl: u64, calls: &[(&str, u64)]) -> CostReport {
        let mut items = Vec::new();
        for &(function, n) in calls.iter().filter(|c| c.1 > 0) {
            let gas_each = schedule.gas_for(function, nl);
            let gas = gas_each * n;
            items.push(LineItem {
                function: function.to_string(),
                party: Party::of(function),
                calls: n,
                gas_each,
                gas,
                fee_wei: schedule.fee_wei(gas),
                usd: schedule.gas_to_usd(gas),
            });
        }
        let mut by_party = BTreeMap::new();
        for i in &items {
            *by_party.entry(i.party).or_insert(0.0) += i.usd;
        }
        CostReport {
            path,
            committee_size: nl,
            total_gas: items.iter().map(|i| i.gas).sum(),
            total_fee_wei: items.iter().map(|i| i.fee_wei).sum(),
            total_usd: items.iter().map(|i| i.usd).sum(),
            items,
            by_party,
        }
    }

    pub fn item(&self, function: &str) -> Option<&LineItem> {
        self.items.iter().find(|i| i.function == function)
    }
}

pub fn path_cost(schedule: &GasSchedule, path: CostPath, nl: u64, payloads: u64) -> CostReport {
    pes_cost_with_reports(schedule, path, nl, payloads, 0, 0)
}

/// Like [`path_cost`], with `missing` and `fake` reports added to a PES run.
pub fn pes_cost_with_reports(
    schedule: &GasSchedule,
    path: CostPath,
    nl: u64,
    payloads: u64,
    missing: u64,
    fake: u64,
) -> CostReport {
    let calls: Vec<(&str, u64)> = match path {
        CostPath::Opt => vec![("deploy_proxy", 1), ("lead", 1), ("execute", payloads)],
        CostPath::Pes => vec![
            ("deploy_proxy", 1),
            ("lead", 1),
            ("execute", payloads),
            ("deploy", 1),
            ("reveal", nl),
            ("missing", missing),
            ("fake", fake),
        ],
        CostPath::Pool => vec![("follow", 1)],
    };
    CostReport::build(schedule, path, nl, &calls)
}

/// Report priced from the service transactions a run actually sent.
pub fn run_cost(schedule: &GasSchedule, summary: &RunSummary) -> CostReport {
    let path = if summary.path.current == crate::protocol::Path::Pes { CostPath::Pes } else { CostPath::Opt };
    let calls: Vec<(&str, u64)> = summary.service_ops.iter().map(|(f, n)| (f.as_str(), *n)).collect();
    CostReport::build(schedule, path, summary.committee_size as u64, &calls)
}

pub fn scaling_curve(schedule: &GasSchedule, path: CostPath, nls: &[u64]) -> Vec<(u64, f64)> {
    nls.iter().map(|&nl| (nl, path_cost(schedule, path, nl, 1).total_usd)).collect()
}

/// Least-squares `(intercept, slope)`.
pub fn affine_fit(points: &[(u64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 as f64 - mx) * (p.1 - my)).sum();
    let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    (my - slope * mx, slope)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolingReport {
    pub committee_size: u64,
    pub followers: u64,
    pub follower_fee_usd: f64,
    /// Leader OPT cost less the fees collected from followers.
    pub leader_adjusted_cost: f64,
    /// follow() gas, the fee, and the execute() call its payload needs.
    pub per_follower_cost: f64,
    /// Everything spent on the pool divided by its `followers + 1` requests.
    pub average_per_request: f64,
}

impl PoolingReport {
    pub fn pool_size(&self) -> u64 {
        self.followers + 1
    }
}

pub fn pooling_report(schedule: &GasSchedule, nl: u64, followers: u64, follower_fee: Wei) -> PoolingReport {
    let opt = path_cost(schedule, CostPath::Opt, nl, 1).total_usd;
    let fee = schedule.wei_to_usd(follower_fee);
    let f = followers as f64;
    let per_follower = schedule.gas_to_usd(schedule.gas_for("follow", nl) + schedule.gas_for("execute", nl)) + fee;
    PoolingReport {
        committee_size: nl,
        followers,
        follower_fee_usd: fee,
        leader_adjusted_cost: opt - f * fee,
        per_follower_cost: per_follower,
        average_per_request: (opt + f * per_follower) / (f + 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s() -> GasSchedule {
        GasSchedule::default()
    }

    #[test]
    fn opt_items() {
        let r = path_cost(&s(), CostPath::Opt, 30, 1);
        assert_eq!(r.total_gas, 1114612 + 141512 + 21864 * 30 + 108542);
        assert_eq!(r.items.len(), 3);
        let sum: f64 = r.items.iter().map(|i| i.usd).sum();
        assert!((sum - r.total_usd).abs() < 1e-12);
        assert_eq!(r.by_party.len(), 2);
    }

    #[test]
    fn pes_adds_reveals_and_reports() {
        let base = path_cost(&s(), CostPath::Pes, 10, 1);
        assert_eq!(base.item("reveal").unwrap().calls, 10);
        let more = pes_cost_with_reports(&s(), CostPath::Pes, 10, 1, 2, 1);
        assert_eq!(more.total_gas, base.total_gas + 2 * 65766 + 1279726);
    }

    #[test]
    fn pool_is_flat() {
        let c = scaling_curve(&s(), CostPath::Pool, &[1, 30, 60]);
        assert!(c.windows(2).all(|w| w[0].1 == w[1].1));
    }

    #[test]
    fn fit_recovers_line() {
        let pts: Vec<(u64, f64)> = (0..5).map(|x| (x, 2.0 + 0.5 * x as f64)).collect();
        let (a, b) = affine_fit(&pts);
        assert!((a - 2.0).abs() < 1e-12 && (b - 0.5).abs() < 1e-12);
    }

    #[test]
    fn no_followers_is_plain_opt() {
        let r = pooling_report(&s(), 30, 0, 0);
        assert_eq!(r.average_per_request, path_cost(&s(), CostPath::Opt, 30, 1).total_usd);
    }

    #[test]
    fn path_names() {
        assert_eq!("pes".parse::<CostPath>().unwrap(), CostPath::Pes);
        assert!("all".parse::<CostPath>().is_err());
    }
}
