mod analyze;
mod artifacts;
mod range;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use timed_tx::chain::GasSchedule;
use timed_tx::contracts::Economics;
use timed_tx::protocol::{bundled, Scenario, SimError, Simulation};

use range::Span;

const OUT_ENV: &str = "TIMED_TX_OUT";

// stdout may be a closed pipe; writing is best effort
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "timed-tx", version, about = "Deterministic timed transaction simulator")]
struct Cli {
    /// Gas schedule TOML (defaults to the built-in schedule).
    #[arg(long, global = true)]
    gas_schedule: Option<PathBuf>,
    /// Economics TOML (defaults to the built-in parameters).
    #[arg(long, global = true)]
    economics: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write its artifacts.
    Run {
        /// Bundled scenario name or path to a scenario TOML.
        scenario: String,
        /// Overrides the seed in the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory [default: $TIMED_TX_OUT/<name> or out/<name>].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analytic reports.
    Analyze {
        #[command(subcommand)]
        kind: Analysis,
        /// Output directory [default: $TIMED_TX_OUT or out].
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
    /// Rerun every bundled scenario and compare with the committed artifacts.
    VerifyGolden {
        #[arg(long, default_value = concat!(env!("CARGO_MANIFEST_DIR"), "/golden"))]
        golden: PathBuf,
        /// Rewrite the golden files instead of comparing.
        #[arg(long)]
        update: bool,
    },
    /// List bundled scenarios.
    List,
}

#[derive(Subcommand)]
enum Analysis {
    /// Sybil budget minimisation over the committee registry.
    Sybil {
        #[arg(long, default_value = "2..6")]
        l: Span,
        #[arg(long = "g-o", alias = "g_o", default_value = "10,100,1000")]
        g_o: Span,
        #[arg(long, default_value_t = 4)]
        t: u16,
        #[arg(long, default_value_t = 10)]
        n: u16,
        /// Deposit per identity, in ether.
        #[arg(long, default_value_t = 1.0)]
        delta_d: f64,
        /// Monte Carlo trials at each optimum; 0 skips sampling.
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Bribery cost for tl targets at each reputation level.
    Bribery {
        #[arg(long, default_value = "1..10")]
        tl: Span,
        /// Reputation levels [default: every level from r_l to r_u].
        #[arg(long)]
        reputation: Option<Span>,
    },
    /// Per-path cost curves.
    Cost {
        /// opt, pes, pool or all.
        #[arg(long, default_value = "all")]
        path: String,
        #[arg(long, default_value = "10..60:10")]
        nl: Span,
        #[arg(long, default_value_t = 1)]
        payloads: u64,
    },
    /// Average cost per request as followers join.
    Pooling {
        #[arg(long, default_value = "0..19")]
        f: Span,
        #[arg(long, default_value_t = 30)]
        nl: u64,
    },
}

/// Failure classes with distinct exit codes.
enum Failure {
    Config(anyhow::Error),
    Infeasible(anyhow::Error),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

fn config<T>(r: Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Config)
}

fn default_out() -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"))
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn load_gas(p: Option<&Path>) -> Result<GasSchedule> {
    let Some(p) = p else { return Ok(GasSchedule::default()) };
    let g = GasSchedule::from_toml(&read(p)?).with_context(|| format!("parsing {}", p.display()))?;
    g.validate().map_err(|e| anyhow!("{}: {e}", p.display()))?;
    Ok(g)
}

fn load_econ(p: Option<&Path>) -> Result<Economics> {
    let Some(p) = p else { return Ok(Economics::default()) };
    let e = Economics::from_toml(&read(p)?).with_context(|| format!("parsing {}", p.display()))?;
    Ok(e)
}

fn load_scenario(arg: &str) -> Result<Scenario> {
    let p = Path::new(arg);
    if p.is_file() {
        return Scenario::from_toml(&read(p)?).with_context(|| format!("parsing {arg}"));
    }
    match bundled::load(arg) {
        Some(r) => r.with_context(|| format!("bundled scenario {arg}")),
        None => Err(anyhow!(
            "no scenario file or bundled scenario named {arg:?} (bundled: {})",
            bundled::names().collect::<Vec<_>>().join(", ")
        )),
    }
}

fn simulate(sc: Scenario, econ: Economics, gas: GasSchedule) -> Result<Simulation, Failure> {
    Simulation::run(sc, econ, gas).map_err(|e| match e {
        SimError::Config(_) => Failure::Config(e.into()),
        SimError::Infeasible(_) | SimError::UnknownTarget(_) => Failure::Infeasible(e.into()),
        _ => Failure::Other(e.into()),
    })
}

fn emit(out: &Path, files: &[(&str, String)]) -> Result<()> {
    artifacts::write_all(out, files)?;
    for (name, _) in files {
        say!("wrote {}", out.join(name).display());
    }
    Ok(())
}

fn verify_golden(dir: &Path, update: bool, econ: &Economics, gas: &GasSchedule) -> Result<bool, Failure> {
    let mut clean = true;
    for name in bundled::names() {
        let sc = config(load_scenario(name))?;
        let sim = simulate(sc, econ.clone(), gas.clone())?;
        let (_, files) = artifacts::render(&sim);
        let sub = dir.join(name);
        if update {
            artifacts::write_all(&sub, &files)?;
            say!("{name}: updated");
            continue;
        }
        let mut diffs = Vec::new();
        for (file, body) in &files {
            let want = fs::read_to_string(sub.join(file)).unwrap_or_default();
            if want != *body {
                let line = want.lines().zip(body.lines()).position(|(a, b)| a != b);
                let line = line.unwrap_or_else(|| want.lines().count().min(body.lines().count())) + 1;
                diffs.push(format!("{file} (line {line})"));
            }
        }
        if diffs.is_empty() {
            say!("{name}: ok");
        } else {
            clean = false;
            say!("{name}: MISMATCH {}", diffs.join(", "));
        }
    }
    Ok(clean)
}

fn exec(cli: Cli) -> Result<bool, Failure> {
    let gas = config(load_gas(cli.gas_schedule.as_deref()))?;
    let econ = config(load_econ(cli.economics.as_deref()))?;
    match cli.cmd {
        Cmd::Run { scenario, seed, out } => {
            let mut sc = config(load_scenario(&scenario))?;
            if let Some(s) = seed {
                sc.seed = s;
            }
            let out = out.unwrap_or_else(|| default_out().join(&sc.name));
            let sim = simulate(sc, econ, gas)?;
            let (summary, files) = artifacts::render(&sim);
            emit(&out, &files)?;
            let epoch = summary.executed_epoch.map(|e| format!(" in epoch {e}")).unwrap_or_default();
            say!(
                "{}: {} via {}{epoch}, {} conviction(s)",
                summary.name,
                format!("{:?}", summary.terminal).to_uppercase(),
                format!("{:?}", summary.path.current).to_uppercase(),
                summary.convictions.len()
            );
            Ok(true)
        }
        Cmd::Analyze { kind, out } => {
            let out = out.unwrap_or_else(default_out);
            let files = match kind {
                Analysis::Sybil { l, g_o, t, n, delta_d, trials, seed } => {
                    analyze::sybil(&analyze::SybilArgs { l, g_o, t, n, delta_d, trials, seed })
                }
                Analysis::Bribery { tl, reputation } => analyze::bribery(&econ, &tl, reputation.as_ref()),
                Analysis::Cost { path, nl, payloads } => analyze::cost(&gas, &path, &nl, payloads),
                Analysis::Pooling { f, nl } => analyze::pooling(&gas, &econ, nl, &f),
            };
            let files = config(files)?;
            say!("{}", files[0].1.trim_end());
            emit(&out, &files)?;
            Ok(true)
        }
        Cmd::VerifyGolden { golden, update } => verify_golden(&golden, update, &econ, &gas),
        Cmd::List => {
            for n in bundled::names() {
                say!("{n}");
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match exec(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            let (code, e) = match f {
                Failure::Config(e) => (2, e),
                Failure::Infeasible(e) => (3, e),
                Failure::Other(e) => (1, e),
            };
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
