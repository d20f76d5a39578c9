//! One pass/fail line per acceptance criterion. Exits non-zero if any fail.

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use timed_tx::adversary::{
    bribery_budget, sybil_grid_argmin, sybil_monte_carlo, sybil_optimum, BriberyParams, SybilParams,
};
use timed_tx::chain::GasSchedule;
use timed_tx::contracts::Economics;
use timed_tx::crypto::{seeded_rng, ss_split, DetRng, Fp257};
use timed_tx::econ::{affine_fit, path_cost, pooling_report, scaling_curve, CostPath};
use timed_tx::protocol::{bundled, FollowerSpec, PayloadSpec, Simulation, Step};

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn within(got: f64, want: f64, rel: f64) -> bool {
    (got - want).abs() <= rel * want.abs()
}

fn c1_table() -> Outcome {
    let g = GasSchedule::default();
    // (function, committee size, gas, usd) as tabulated
    let table: [(&str, u64, u64, f64); 10] = [
        ("deploy_proxy", 30, 1114612, 5.08),
        ("lead", 30, 797432, 3.64),
        ("invalid", 30, 2196769, 10.02),
        ("follow", 30, 31198, 0.14),
        ("leak", 30, 1264782, 5.78),
        ("execute", 30, 108542, 0.49),
        ("deploy", 30, 2419116, 11.04),
        ("reveal", 30, 89727, 0.41),
        ("missing", 30, 65766, 0.30),
        ("fake", 30, 1279726, 5.85),
    ];
    let mut gas_ok = true;
    let mut misses = Vec::new();
    for (f, nl, gas, usd) in table {
        let metered = g.gas_for(f, nl);
        gas_ok &= metered == gas;
        let got = g.gas_to_usd(metered);
        if !within(got, usd, 0.01) {
            misses.push(format!("{f} ${got:.4} vs ${usd:.2} ({:+.2}%)", 100.0 * (got - usd) / usd));
        }
    }
    Outcome {
        pass: gas_ok && misses.is_empty(),
        detail: format!("gas exact: {gas_ok}; usd outside 1%: [{}]", misses.join("; ")),
    }
}

fn c2_paths() -> Outcome {
    let g = GasSchedule::default();
    let opt = path_cost(&g, CostPath::Opt, 30, 1).total_usd;
    let pes = path_cost(&g, CostPath::Pes, 30, 1).total_usd;
    let pool = path_cost(&g, CostPath::Pool, 30, 1).total_usd;
    Outcome {
        pass: within(opt, 9.21, 0.02) && within(pes, 32.55, 0.02) && within(pool, 0.14, 0.02),
        detail: format!("OPT ${opt:.4} PES ${pes:.4} POOL ${pool:.4}"),
    }
}

fn c3_scaling() -> Outcome {
    let g = GasSchedule::default();
    let nls: Vec<u64> = (1..=6).map(|k| 10 * k).collect();
    let fit = |p| {
        let pts = scaling_curve(&g, p, &nls);
        let (a, b) = affine_fit(&pts);
        let resid = pts.iter().map(|(x, y)| (y - a - b * *x as f64).abs()).fold(0.0, f64::max);
        (b, resid)
    };
    let (opt, r1) = fit(CostPath::Opt);
    let (pes, r2) = fit(CostPath::Pes);
    let (pool, r3) = fit(CostPath::Pool);
    let affine = r1.max(r2).max(r3) < 1e-9;
    Outcome {
        pass: affine && within(opt, 0.10, 0.10) && within(pes - opt, 0.41, 0.10) && pool == 0.0,
        detail: format!("OPT slope ${opt:.4}; PES minus OPT ${:.4}; POOL slope {pool}; affine {affine}", pes - opt),
    }
}

fn c4_pooling() -> Outcome {
    let g = GasSchedule::default();
    let fee = Economics::default().pool_fee;
    let want = [(4u64, 3.0), (8, 2.0), (20, 1.4)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (size, target) in want {
        let avg = pooling_report(&g, 30, size - 1, fee).average_per_request;
        ok &= within(avg, target, 0.20);
        parts.push(format!("size {size}: ${avg:.3} (target ~${target})"));
    }
    let monotone = (1..=40u64)
        .map(|f| pooling_report(&g, 30, f, fee).average_per_request)
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| w[1] < w[0]);
    Outcome { pass: ok && monotone, detail: format!("{}; monotone {monotone}", parts.join(", ")) }
}

fn c5_offchain() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, (l, t, n)) in [(1u64, (1, 1, 1)), (10, (2, 3, 5)), (30, (3, 4, 10))] {
        let s = run(honest(l, t, n, k as usize + 2, k)).summary();
        let opt = s.offchain.opt_bytes();
        ok &= opt == 32 * k * k;
        parts.push(format!("k={k}: {opt} B"));
        for f in [1u64, 4] {
            let mut sc = honest(l, t, n, k as usize + 2, 100 + k + f);
            for _ in 0..f {
                sc.followers.push(FollowerSpec { fund: 0, fee: None, payload: PayloadSpec::Transfer { value: 0 } });
            }
            let s = run(sc).summary();
            let step7 = s.offchain.bytes(Step::Follow);
            ok &= step7 == 32 * f * k && s.offchain.opt_bytes() == 32 * k * k;
            parts.push(format!("k={k} f={f}: {step7} B"));
        }
    }
    Outcome { pass: ok, detail: parts.join(", ") }
}

fn c6_secrecy() -> Outcome {
    let worst = worst_coalition(2, 2, 3, 6);
    let mut rng = seeded_rng(6);
    let shares = ss_split(Fp257::new(123), 2, 3, &mut rng).unwrap();
    // With t = 2 a single share admits exactly one polynomial per candidate secret.
    let consistent = shares.iter().all(|s| {
        let x = Fp257::new(s.index as u64);
        Fp257::all().all(|secret| Fp257::all().filter(|a1| secret + *a1 * x == s.value).count() == 1)
    });
    Outcome {
        pass: worst <= 1 && consistent,
        detail: format!("max shares over all 20 coalitions of 3: {worst}; single shares consistent with all 257 secrets: {consistent}"),
    }
}

fn c7_sybil() -> Outcome {
    let mut argmin_ok = true;
    for l in 2..=6u16 {
        for g_o in [10u64, 100, 1000] {
            let base = SybilParams::new(1, g_o, l, 4, 10, 1.0);
            argmin_ok &= Some(sybil_grid_argmin(&base, 1, 10 * g_o)) == sybil_optimum(l, g_o);
        }
    }
    let trials = 10_000;
    let mut binom_ok = true;
    let mut hyper_ok = true;
    let mut worst_binom: f64 = 0.0;
    let mut points = vec![SybilParams::new(50, 50, 2, 4, 10, 1.0)];
    for g_o in [100u64, 1000] {
        for l in 2..=6u16 {
            points.push(SybilParams::new((l as u64 - 1) * g_o, g_o, l, 4, 10, 1.0));
        }
    }
    for p in &points {
        let mc = sybil_monte_carlo(p, trials, 7);
        binom_ok &= mc.within(mc.binomial, 3.0);
        hyper_ok &= mc.within(mc.hypergeometric, 3.0);
        worst_binom = worst_binom.max((mc.mean - mc.binomial).abs() / mc.std_err);
    }
    for l in 2..=6u16 {
        let p = SybilParams::new((l as u64 - 1) * 10, 10, l, 4, 10, 1.0);
        hyper_ok &= sybil_monte_carlo(&p, trials, 7).within(timed_tx::adversary::hypergeometric_capture(&p), 3.0);
    }
    Outcome {
        pass: argmin_ok && binom_ok && hyper_ok,
        detail: format!(
            "argmin at (l-1)g_o for all 15 points: {argmin_ok}; binomial within 3 SE at {} points: {binom_ok} (worst {worst_binom:.2} SE); exact mean within 3 SE incl. g_o=10: {hyper_ok}",
            points.len()
        ),
    }
}

fn brute_bribery(p: &BriberyParams) -> u128 {
    let mut total = 0u128;
    for &r in &p.target_reputations {
        total += p.delta_d;
        let k = (r - p.r_l) / p.delta_r;
        for i in 0..=k {
            total += i as u128 * (k - i + 1) as u128 * p.delta_r as u128 * p.delta_p;
        }
    }
    total
}

fn c8_bribery() -> Outcome {
    let mut rng = DetRng::seed_from_u64(8);
    let mut agree = true;
    for _ in 0..100 {
        let r_l = rng.gen_range(0..5u64);
        let delta_r = rng.gen_range(1..4u64);
        let steps = rng.gen_range(0..12u64);
        let tl = rng.gen_range(1..40usize);
        let p = BriberyParams {
            target_reputations: (0..tl).map(|_| r_l + delta_r * rng.gen_range(0..=steps)).collect(),
            delta_d: rng.gen_range(0..10u128.pow(19)),
            delta_r,
            delta_p: rng.gen_range(0..10u128.pow(17)),
            r_l,
            r_u: r_l + delta_r * steps,
        };
        agree &= bribery_budget(&p).unwrap() == brute_bribery(&p);
    }
    let fresh = BriberyParams {
        target_reputations: vec![1; 12],
        delta_d: 10u128.pow(18),
        delta_r: 1,
        delta_p: 10u128.pow(16),
        r_l: 1,
        r_u: 10,
    };
    let fresh_ok = bribery_budget(&fresh).unwrap() == 12 * 10u128.pow(18);
    Outcome {
        pass: agree && fresh_ok,
        detail: format!("100 random sets agree: {agree}; fresh targets give tl*dd: {fresh_ok}"),
    }
}

fn c9_matrix() -> Outcome {
    let cells = misbehavior_matrix(9);
    let bad: Vec<String> = cells
        .iter()
        .filter(|c| !(c.path_ok() && c.conviction_ok() && c.summary.conserved))
        .map(|c| format!("slot {} {}", c.slot, c.offense))
        .collect();
    Outcome { pass: bad.is_empty(), detail: format!("{} cells, failing: [{}]", cells.len(), bad.join(", ")) }
}

fn c10_determinism() -> Outcome {
    let mut bad = Vec::new();
    for name in bundled::names() {
        let sc = bundled::load(name).unwrap().unwrap();
        let go =
            || Simulation::run(sc.clone(), Economics::default(), GasSchedule::default()).unwrap().ledger.trace_text();
        if go() != go() {
            bad.push(name);
        }
    }
    Outcome { pass: bad.is_empty(), detail: format!("{} scenarios, differing: {bad:?}", bundled::BUNDLED.len()) }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 gas table", c1_table),
        ("2 path totals", c2_paths),
        ("3 scaling", c3_scaling),
        ("4 pooling", c4_pooling),
        ("5 off-chain audit", c5_offchain),
        ("6 secrecy", c6_secrecy),
        ("7 sybil argmin", c7_sybil),
        ("8 bribery bound", c8_bribery),
        ("9 misbehavior matrix", c9_matrix),
        ("10 determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {name} ({:.2}s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
