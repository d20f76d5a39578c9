use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contracts::{select_committee, ProtocolParams, RegistryEntry};
use crate::crypto::{hash_concat, Address, DetRng, Digest32};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SybilParams {
    pub g_s: u64,
    pub g_o: u64,
    pub l: u16,
    pub t: u16,
    pub n: u16,
    /// Deposit per service, in ether.
    pub delta_d: f64,
}

impl SybilParams {
    pub fn new(g_s: u64, g_o: u64, l: u16, t: u16, n: u16, delta_d: f64) -> SybilParams {
        SybilParams { g_s, g_o, l, t, n, delta_d }
    }

    pub fn protocol(&self) -> ProtocolParams {
        ProtocolParams::new(self.l, self.t, self.n)
    }

    pub fn registry_size(&self) -> u64 {
        self.g_s + self.g_o
    }
}

/// Chance that one share's whole group is adversarial, treating picks as independent.
pub fn sybil_capture_prob(p: &SybilParams) -> f64 {
    (p.g_s as f64 / p.registry_size() as f64).powi(p.l as i32)
}

/// Ether the adversary locks to expect `t` captured shares.
pub fn sybil_budget(p: &SybilParams) -> f64 {
    if p.g_s == 0 {
        return f64::INFINITY;
    }
    p.t as f64 * p.g_s as f64 * p.delta_d / (p.n as f64 * sybil_capture_prob(p))
}

pub fn sybil_optimum(l: u16, g_o: u64) -> Option<u64> {
    (l >= 2).then(|| (l as u64 - 1) * g_o)
}

/// Exhaustive minimisation of `sybil_budget` over `g_s` in `lo..=hi`.
pub fn sybil_grid_argmin(base: &SybilParams, lo: u64, hi: u64) -> u64 {
    (lo.max(1)..=hi)
        .map(|g_s| (g_s, sybil_budget(&SybilParams { g_s, ..*base })))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        .0
}

fn ln_choose(n: u64, k: u64) -> f64 {
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Expected captured shares when the committee is a uniform sample without
/// replacement, which is what selection draws from a shuffled registry.
pub fn hypergeometric_capture(p: &SybilParams) -> f64 {
    let l = p.l as u64;
    if p.g_s < l {
        return 0.0;
    }
    p.n as f64 * (ln_choose(p.g_s, l) - ln_choose(p.registry_size(), l)).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub trials: u64,
    pub mean: f64,
    pub std_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub binomial: f64,
    pub hypergeometric: f64,
}

impl MonteCarlo {
    pub fn within(&self, expected: f64, k_se: f64) -> bool {
        (self.mean - expected).abs() <= k_se * self.std_err.max(f64::EPSILON)
    }
}

fn synthetic_address(i: u64) -> Address {
    let mut a = [0u8; 20];
    a[12..].copy_from_slice(&i.to_be_bytes());
    a[0] = 0xee;
    Address(a)
}

fn index_of(a: &Address) -> u64 {
    u64::from_be_bytes(a.0[12..].try_into().expect("8 bytes"))
}

fn one_trial(p: &SybilParams, seed: u64, trial: u64) -> u32 {
    let mut rng = DetRng::from_seed(hash_concat(&[b"sybil", &seed.to_be_bytes(), &trial.to_be_bytes()]).0);
    let mut registry: Vec<RegistryEntry> =
        (0..p.registry_size()).map(|i| RegistryEntry { addr: synthetic_address(i), available: true }).collect();
    registry.shuffle(&mut rng);
    let r = Digest32(rng.gen());
    let params = p.protocol();
    let committee = select_committee(&registry, &r, params.committee_size()).expect("registry large enough");
    (1..=p.n).filter(|s| committee[params.group(*s)].iter().all(|a| index_of(a) < p.g_s)).count() as u32
}

/// Captured-share statistics over `trials` runs of the real selection code.
pub fn sybil_monte_carlo(p: &SybilParams, trials: u64, seed: u64) -> MonteCarlo {
    assert!(trials >= 1);
    assert!(p.g_o >= 1, "at least one independent executor");
    assert!(p.protocol().committee_size() as u64 <= p.registry_size(), "committee exceeds registry");
    let counts: Vec<u32> = (0..trials).into_par_iter().map(|i| one_trial(p, seed, i)).collect();
    let n = trials as f64;
    let mean = counts.iter().map(|c| *c as f64).sum::<f64>() / n;
    let var = if trials > 1 { counts.iter().map(|c| (*c as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    let std_err = (var / n).sqrt();
    MonteCarlo {
        trials,
        mean,
        std_err,
        ci_low: mean - 1.96 * std_err,
        ci_high: mean + 1.96 * std_err,
        binomial: p.n as f64 * sybil_capture_prob(p),
        hypergeometric: hypergeometric_capture(p),
    }
}

/// One line of the Sybil analysis table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SybilRow {
    pub l: u16,
    pub g_o: u64,
    pub optimum: Option<u64>,
    pub grid_argmin: u64,
    /// Exact budget at the optimum.
    pub min_budget: f64,
    /// The simplified bound `(l-1) g_o Δd`.
    pub simple_bound: f64,
}

pub fn sybil_row(l: u16, g_o: u64, t: u16, n: u16, delta_d: f64) -> SybilRow {
    let base = SybilParams::new(1, g_o, l, t, n, delta_d);
    let grid_argmin = sybil_grid_argmin(&base, 1, 10 * g_o);
    let g_s = sybil_optimum(l, g_o).unwrap_or(grid_argmin);
    SybilRow {
        l,
        g_o,
        optimum: sybil_optimum(l, g_o),
        grid_argmin,
        min_budget: sybil_budget(&SybilParams { g_s, ..base }),
        simple_bound: (l as f64 - 1.0) * g_o as f64 * delta_d,
    }
}
