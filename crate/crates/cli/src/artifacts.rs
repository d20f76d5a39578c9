use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use timed_tx::econ::{render_text, run_cost};
use timed_tx::protocol::{OffchainAudit, OffchainMessage, RunSummary, Simulation};

pub const TRACE: &str = "trace.log";
pub const OFFCHAIN: &str = "offchain.json";
pub const SUMMARY: &str = "summary.json";
pub const COSTS: &str = "costs.txt";

#[derive(Serialize)]
struct OffchainFile<'a> {
    audit: &'a OffchainAudit,
    opt_bytes: u64,
    total_bytes: u64,
    messages: &'a [OffchainMessage],
}

pub fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// File name and contents of every artifact of a finished run.
pub fn render(sim: &Simulation) -> (RunSummary, Vec<(&'static str, String)>) {
    let summary = sim.summary();
    let off = OffchainFile {
        audit: &summary.offchain,
        opt_bytes: summary.offchain.opt_bytes(),
        total_bytes: summary.offchain.total_bytes(),
        messages: sim.bus.messages(),
    };
    let costs = render_text(&[run_cost(sim.ledger.schedule(), &summary)]);
    let files =
        vec![(TRACE, sim.ledger.trace_text()), (OFFCHAIN, json(&off)), (SUMMARY, json(&summary)), (COSTS, costs)];
    (summary, files)
}

pub fn write_all(dir: &Path, files: &[(&str, String)]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, body) in files {
        let p = dir.join(name);
        fs::write(&p, body).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}
