//! Text and delimited renderings.
//!
//! Delimited cost records are `path,nl,function,party,calls,gas_each,gas,fee_wei,usd`
//! with one `TOTAL` row per report. Pooling records are
//! `nl,followers,pool_size,fee_usd,leader_adjusted,per_follower,average`.

use std::fmt::Write;

use super::{CostReport, PoolingReport};

pub fn render_text(reports: &[CostReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let _ = writeln!(out, "path {}  committee {}", r.path, r.committee_size);
        let _ = writeln!(
            out,
            "  {:<14} {:<10} {:>6} {:>10} {:>12} {:>10}",
            "function", "party", "calls", "gas/call", "gas", "usd"
        );
        for i in &r.items {
            let _ = writeln!(
                out,
                "  {:<14} {:<10} {:>6} {:>10} {:>12} {:>10.4}",
                i.function,
                i.party.to_string(),
                i.calls,
                i.gas_each,
                i.gas,
                i.usd
            );
        }
        let _ = writeln!(
            out,
            "  {:<14} {:<10} {:>6} {:>10} {:>12} {:>10.4}",
            "total", "", "", "", r.total_gas, r.total_usd
        );
        for (p, usd) in &r.by_party {
            let _ = writeln!(out, "    {:<12} {:>10.4}", p.to_string(), usd);
        }
        out.push('\n');
    }
    out
}

pub fn render_delimited(reports: &[CostReport]) -> String {
    let mut out = String::from("path,nl,function,party,calls,gas_each,gas,fee_wei,usd\n");
    for r in reports {
        for i in &r.items {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{:.6}",
                r.path, r.committee_size, i.function, i.party, i.calls, i.gas_each, i.gas, i.fee_wei, i.usd
            );
        }
        let _ = writeln!(
            out,
            "{},{},TOTAL,,,,{},{},{:.6}",
            r.path, r.committee_size, r.total_gas, r.total_fee_wei, r.total_usd
        );
    }
    out
}

pub fn render_pooling_text(rows: &[PoolingReport]) -> String {
    let mut out = format!(
        "{:>4} {:>9} {:>9} {:>8} {:>15} {:>12} {:>11}\n",
        "nl", "followers", "pool_size", "fee_usd", "leader_adjusted", "per_follower", "average"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>4} {:>9} {:>9} {:>8.4} {:>15.4} {:>12.4} {:>11.4}",
            r.committee_size,
            r.followers,
            r.pool_size(),
            r.follower_fee_usd,
            r.leader_adjusted_cost,
            r.per_follower_cost,
            r.average_per_request
        );
    }
    out
}

pub fn render_pooling_delimited(rows: &[PoolingReport]) -> String {
    let mut out = String::from("nl,followers,pool_size,fee_usd,leader_adjusted,per_follower,average\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6},{:.6}",
            r.committee_size,
            r.followers,
            r.pool_size(),
            r.follower_fee_usd,
            r.leader_adjusted_cost,
            r.per_follower_cost,
            r.average_per_request
        );
    }
    out
}
