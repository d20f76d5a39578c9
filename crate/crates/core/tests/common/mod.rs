#![allow(dead_code)]

use timed_tx::chain::GasSchedule;
use timed_tx::contracts::{Economics, Offense, ProtocolParams, ServiceState};
use timed_tx::protocol::{InjectionTarget, Misbehavior, Path, RunSummary, Scenario, Simulation};

pub fn run(sc: Scenario) -> Simulation {
    Simulation::run(sc, Economics::default(), GasSchedule::default()).expect("scenario runs")
}

pub fn honest(l: u16, t: u16, n: u16, executors: usize, seed: u64) -> Scenario {
    Scenario::honest("prop", ProtocolParams::new(l, t, n), executors, seed)
}

pub fn expected_offense(m: Misbehavior) -> Offense {
    match m {
        Misbehavior::Withhold => Offense::Missing,
        Misbehavior::Fake => Offense::Fake,
        _ => Offense::Leak,
    }
}

pub const MATRIX_OFFENSES: [Misbehavior; 4] =
    [Misbehavior::Withhold, Misbehavior::Fake, Misbehavior::Leak, Misbehavior::PrematureReveal];

pub struct MatrixCell {
    pub slot: usize,
    pub offense: Misbehavior,
    pub summary: RunSummary,
}

impl MatrixCell {
    pub fn path_ok(&self) -> bool {
        self.summary.path.current == Path::Pes && self.summary.terminal == ServiceState::Success
    }

    pub fn conviction_ok(&self) -> bool {
        let got: Vec<(usize, Offense)> = self.summary.convictions.iter().map(|c| (c.slot, c.offense)).collect();
        got == vec![(self.slot, expected_offense(self.offense))]
    }
}

/// Every single-offender injection at {2,2,3}.
pub fn misbehavior_matrix(seed: u64) -> Vec<MatrixCell> {
    let p = ProtocolParams::new(2, 2, 3);
    let mut out = Vec::new();
    for slot in 0..p.committee_size() {
        for offense in MATRIX_OFFENSES {
            let sc = honest(2, 2, 3, 9, seed + slot as u64).with_injection(InjectionTarget::Slot(slot), offense);
            out.push(MatrixCell { slot, offense, summary: run(sc).summary() });
        }
    }
    out
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u64..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Largest number of shares any coalition of `tl - 1` members opens after scheduling.
pub fn worst_coalition(l: u16, t: u16, n: u16, seed: u64) -> usize {
    let p = ProtocolParams::new(l, t, n);
    let mut sim =
        Simulation::setup(honest(l, t, n, p.committee_size() + 2, seed), Economics::default(), GasSchedule::default())
            .expect("setup");
    sim.leader_schedule().expect("schedule");
    subsets(p.committee_size(), (t * l) as usize - 1)
        .iter()
        .map(|c| timed_tx::adversary::coalition_shares(&sim, c).len())
        .max()
        .unwrap_or(0)
}
