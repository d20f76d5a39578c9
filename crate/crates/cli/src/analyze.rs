use std::fmt::Write as _;

use anyhow::{bail, Result};
use timed_tx::adversary::{bribery_budget, sybil_monte_carlo, sybil_row, BriberyParams, SybilParams};
use timed_tx::chain::{GasSchedule, WEI_PER_ETHER};
use timed_tx::contracts::Economics;
use timed_tx::econ::{
    path_cost, pooling_report, render_delimited, render_pooling_delimited, render_pooling_text, CostPath,
};

use crate::range::Span;

fn small<T: TryFrom<u64>>(v: u64, what: &str) -> Result<T> {
    match T::try_from(v) {
        Ok(x) => Ok(x),
        Err(_) => bail!("{what} {v} out of range"),
    }
}

pub struct SybilArgs {
    pub l: Span,
    pub g_o: Span,
    pub t: u16,
    pub n: u16,
    pub delta_d: f64,
    pub trials: u64,
    pub seed: u64,
}

pub fn sybil(a: &SybilArgs) -> Result<Vec<(&'static str, String)>> {
    if a.t == 0 || a.n < a.t {
        bail!("need 1 <= t <= n");
    }
    let mut csv = String::from("l,g_o,optimum,grid_argmin,min_budget,simple_bound");
    if a.trials > 0 {
        csv.push_str(",mc_mean,mc_std_err,binomial,exact");
    }
    csv.push('\n');
    for &l in &a.l.0 {
        let l: u16 = small(l, "l")?;
        if l < 2 {
            bail!("l must be at least 2");
        }
        for &g_o in &a.g_o.0 {
            if g_o == 0 {
                bail!("g_o must be positive");
            }
            let r = sybil_row(l, g_o, a.t, a.n, a.delta_d);
            let opt = r.optimum.map(|v| v.to_string()).unwrap_or_default();
            write!(csv, "{l},{g_o},{opt},{},{:.6},{:.6}", r.grid_argmin, r.min_budget, r.simple_bound).unwrap();
            if a.trials > 0 {
                let p = SybilParams::new(r.grid_argmin, g_o, l, a.t, a.n, a.delta_d);
                let mc = sybil_monte_carlo(&p, a.trials, a.seed);
                write!(csv, ",{:.6},{:.6},{:.6},{:.6}", mc.mean, mc.std_err, mc.binomial, mc.hypergeometric).unwrap();
            }
            csv.push('\n');
        }
    }
    Ok(vec![("sybil.csv", csv)])
}

pub fn bribery(econ: &Economics, tl: &Span, reps: Option<&Span>) -> Result<Vec<(&'static str, String)>> {
    let (r_l, r_u, step) = (econ.r_l as u64, econ.r_u as u64, econ.delta_r as u64);
    let reps: Vec<u64> = match reps {
        Some(s) => s.0.clone(),
        None => (r_l..=r_u).step_by(step.max(1) as usize).collect(),
    };
    let mut csv = String::from("tl,reputation,budget_wei,budget_ether\n");
    for &k in &tl.0 {
        for &r in &reps {
            let p = BriberyParams {
                target_reputations: vec![r; k as usize],
                delta_d: econ.delta_d,
                delta_r: step,
                delta_p: econ.delta_p,
                r_l,
                r_u,
            };
            let b = bribery_budget(&p)?;
            writeln!(csv, "{k},{r},{b},{:.6}", b as f64 / WEI_PER_ETHER as f64).unwrap();
        }
    }
    Ok(vec![("bribery.csv", csv)])
}

pub fn cost(g: &GasSchedule, path: &str, nls: &Span, payloads: u64) -> Result<Vec<(&'static str, String)>> {
    let paths: Vec<CostPath> = if path == "all" { CostPath::ALL.to_vec() } else { vec![path.parse()?] };
    let mut curve = String::from("nl");
    for p in &paths {
        write!(curve, ",{}_usd", p.to_string().to_lowercase()).unwrap();
    }
    curve.push('\n');
    let mut reports = Vec::new();
    for &nl in &nls.0 {
        if nl == 0 {
            bail!("nl must be positive");
        }
        write!(curve, "{nl}").unwrap();
        for &p in &paths {
            let r = path_cost(g, p, nl, payloads);
            write!(curve, ",{:.6}", r.total_usd).unwrap();
            reports.push(r);
        }
        curve.push('\n');
    }
    Ok(vec![("cost_curve.csv", curve), ("cost_breakdown.csv", render_delimited(&reports))])
}

pub fn pooling(g: &GasSchedule, econ: &Economics, nl: u64, f: &Span) -> Result<Vec<(&'static str, String)>> {
    if nl == 0 {
        bail!("nl must be positive");
    }
    let rows: Vec<_> = f.0.iter().map(|&f| pooling_report(g, nl, f, econ.pool_fee)).collect();
    Ok(vec![("pooling.csv", render_pooling_delimited(&rows)), ("pooling.txt", render_pooling_text(&rows))])
}
