//! Python module `timedtx`.

// pyo3 0.22 macro expansion trips this on every `PyResult` return.
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

use timed_tx::adversary::{self, BriberyParams, SybilParams};
use timed_tx::chain::GasSchedule;
use timed_tx::contracts::Economics;
use timed_tx::crypto::{self, Digest32, FieldElement, Fp257, KeyKind, PublicKey, Share, ShareField};
use timed_tx::econ::{self, CostPath};
use timed_tx::protocol::{bundled, Scenario, Simulation};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn value_to_py(py: Python<'_>, v: &Value) -> PyResult<PyObject> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_py(py),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py(py)
            } else if let Ok(big) = n.as_str().parse::<u128>() {
                // wei amounts beyond i64
                big.into_py(py)
            } else {
                n.as_f64().ok_or_else(|| err(format!("number {n}")))?.into_py(py)
            }
        }
        Value::String(s) => s.into_py(py),
        Value::Array(a) => {
            let items = a.iter().map(|x| value_to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new_bound(py, items).into_py(py)
        }
        Value::Object(m) => {
            let d = PyDict::new_bound(py);
            for (k, x) in m {
                d.set_item(k, value_to_py(py, x)?)?;
            }
            d.into_py(py)
        }
    })
}

fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<PyObject> {
    value_to_py(py, &serde_json::to_value(v).map_err(err)?)
}

fn digest(msg: &[u8]) -> Digest32 {
    crypto::hash(msg)
}

#[pyclass(name = "KeyPair", module = "timedtx")]
struct PyKeyPair(crypto::KeyPair);

#[pymethods]
impl PyKeyPair {
    /// Deterministic account key from `seed`.
    #[staticmethod]
    fn from_seed(seed: u64) -> Self {
        PyKeyPair(crypto::KeyPair::generate(KeyKind::Account, &mut crypto::seeded_rng(seed)))
    }

    #[staticmethod]
    fn from_secret(secret: [u8; 32]) -> PyResult<Self> {
        let sk = FieldElement::from_bytes(&secret).map_err(err)?;
        crypto::KeyPair::from_secret(sk, KeyKind::Account).map(PyKeyPair).map_err(err)
    }

    #[getter]
    fn address(&self) -> String {
        self.0.address().to_string()
    }

    #[getter]
    fn public_key<'py>(&self, py: Python<'py>) -> Bound<'py, pyo3::types::PyBytes> {
        pyo3::types::PyBytes::new_bound(py, self.0.public().as_bytes())
    }

    /// Recoverable signature over the Keccak digest of `msg`.
    fn sign<'py>(&self, py: Python<'py>, msg: &[u8]) -> PyResult<Bound<'py, pyo3::types::PyBytes>> {
        let sig = crypto::sign(self.0.secret(), &digest(msg)).map_err(err)?;
        Ok(pyo3::types::PyBytes::new_bound(py, &sig.to_bytes()))
    }

    fn decrypt<'py>(&self, py: Python<'py>, ciphertext: &[u8]) -> PyResult<Bound<'py, pyo3::types::PyBytes>> {
        let pt = crypto::decrypt(self.0.secret(), ciphertext).map_err(err)?;
        Ok(pyo3::types::PyBytes::new_bound(py, &pt))
    }

    fn vrf<'py>(
        &self,
        py: Python<'py>,
        msg: &[u8],
    ) -> PyResult<(Bound<'py, pyo3::types::PyBytes>, Bound<'py, pyo3::types::PyBytes>)> {
        let ev = crypto::vrf_eval(self.0.secret(), msg).map_err(err)?;
        Ok((pyo3::types::PyBytes::new_bound(py, ev.r.as_bytes()), pyo3::types::PyBytes::new_bound(py, &ev.proof)))
    }

    fn __repr__(&self) -> String {
        format!("KeyPair({})", self.0.address())
    }
}

/// Address that produced `sig` over `msg`.
#[pyfunction]
fn recover_address(msg: &[u8], sig: &[u8]) -> PyResult<String> {
    let sig = crypto::Signature::from_bytes(sig).map_err(err)?;
    crypto::verify(&digest(msg), &sig).map(|a| a.to_string()).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (public_key, plaintext, seed=0))]
fn encrypt(py: Python<'_>, public_key: &[u8], plaintext: &[u8], seed: u64) -> PyResult<PyObject> {
    let pk = PublicKey::from_bytes(public_key).map_err(err)?;
    let ct = crypto::encrypt(&pk, plaintext, &mut crypto::seeded_rng(seed)).map_err(err)?;
    Ok(pyo3::types::PyBytes::new_bound(py, &ct).into_py(py))
}

#[pyfunction]
fn vrf_verify(py: Python<'_>, public_key: &[u8], msg: &[u8], proof: &[u8]) -> PyResult<PyObject> {
    let pk = PublicKey::from_bytes(public_key).map_err(err)?;
    let r = crypto::vrf_verify(&pk, msg, proof).map_err(err)?;
    Ok(pyo3::types::PyBytes::new_bound(py, r.as_bytes()).into_py(py))
}

/// Shares of a 32-byte secret over the secp256k1 scalar field.
#[pyfunction]
#[pyo3(signature = (secret, t, n, seed=0))]
fn split_secret(py: Python<'_>, secret: [u8; 32], t: usize, n: usize, seed: u64) -> PyResult<Vec<(u16, PyObject)>> {
    let s = FieldElement::from_bytes(&secret).map_err(err)?;
    let shares = crypto::ss_split(s, t, n, &mut crypto::seeded_rng(seed)).map_err(err)?;
    Ok(shares
        .iter()
        .map(|sh| (sh.index, pyo3::types::PyBytes::new_bound(py, &sh.value.to_bytes()).into_py(py)))
        .collect())
}

#[pyfunction]
fn restore_secret(py: Python<'_>, shares: Vec<(u16, [u8; 32])>, t: usize) -> PyResult<PyObject> {
    let shares = shares
        .into_iter()
        .map(|(index, v)| FieldElement::from_bytes(&v).map(|value| Share { index, value }))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let s = crypto::ss_restore(&shares, t).map_err(err)?;
    Ok(pyo3::types::PyBytes::new_bound(py, &s.to_bytes()).into_py(py))
}

/// Shares over the toy field of 257 elements.
#[pyfunction]
#[pyo3(signature = (secret, t, n, seed=0))]
fn split_small(secret: u64, t: usize, n: usize, seed: u64) -> PyResult<Vec<(u16, u16)>> {
    let shares = crypto::ss_split(Fp257::new(secret), t, n, &mut crypto::seeded_rng(seed)).map_err(err)?;
    Ok(shares.iter().map(|s| (s.index, s.value.value())).collect())
}

#[pyfunction]
fn restore_small(shares: Vec<(u16, u64)>, t: usize) -> PyResult<u16> {
    let shares: Vec<Share<Fp257>> =
        shares.into_iter().map(|(index, v)| Share { index, value: Fp257::from_u64(v) }).collect();
    crypto::ss_restore(&shares, t).map(|s| s.value()).map_err(err)
}

#[pyclass(name = "RunResult", module = "timedtx", frozen)]
struct RunResult {
    summary: timed_tx::protocol::RunSummary,
    #[pyo3(get)]
    trace: String,
    messages: Vec<timed_tx::protocol::OffchainMessage>,
}

#[pymethods]
impl RunResult {
    #[getter]
    fn name(&self) -> &str {
        &self.summary.name
    }

    /// SUCCESS, FAILURE or CANCELLED.
    #[getter]
    fn terminal(&self) -> String {
        format!("{:?}", self.summary.terminal).to_uppercase()
    }

    /// OPT or PES.
    #[getter]
    fn path(&self) -> String {
        format!("{:?}", self.summary.path.current).to_uppercase()
    }

    #[getter]
    fn executed_epoch(&self) -> Option<u8> {
        self.summary.executed_epoch
    }

    /// `(slot, offense)` for every conviction.
    #[getter]
    fn convictions(&self) -> Vec<(usize, String)> {
        self.summary.convictions.iter().map(|c| (c.slot, c.offense.to_string())).collect()
    }

    #[getter]
    fn conserved(&self) -> bool {
        self.summary.conserved
    }

    #[getter]
    fn summary(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &self.summary)
    }

    #[getter]
    fn offchain(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &self.summary.offchain)
    }

    #[getter]
    fn offchain_messages(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &self.messages)
    }

    fn __repr__(&self) -> String {
        format!("RunResult({}: {} via {})", self.summary.name, self.terminal(), self.path())
    }
}

#[pyfunction]
fn bundled_scenarios() -> Vec<&'static str> {
    bundled::names().collect()
}

/// Runs a bundled scenario by name, or a scenario given as TOML text.
#[pyfunction]
#[pyo3(signature = (scenario, seed=None, economics=None, gas_schedule=None))]
fn run_scenario(
    py: Python<'_>,
    scenario: &str,
    seed: Option<u64>,
    economics: Option<&str>,
    gas_schedule: Option<&str>,
) -> PyResult<RunResult> {
    let mut sc = match bundled::load(scenario) {
        Some(r) => r.map_err(err)?,
        None => Scenario::from_toml(scenario).map_err(err)?,
    };
    if let Some(s) = seed {
        sc.seed = s;
    }
    let econ = economics.map(Economics::from_toml).transpose().map_err(err)?.unwrap_or_default();
    let gas = gas_schedule.map(GasSchedule::from_toml).transpose().map_err(err)?.unwrap_or_default();
    let sim = py.allow_threads(|| Simulation::run(sc, econ, gas)).map_err(err)?;
    Ok(RunResult { summary: sim.summary(), trace: sim.ledger.trace_text(), messages: sim.bus.messages().to_vec() })
}

#[pyfunction]
#[pyo3(signature = (g_s, g_o, l, t, n, delta_d=1.0))]
fn sybil_budget(g_s: u64, g_o: u64, l: u16, t: u16, n: u16, delta_d: f64) -> f64 {
    adversary::sybil_budget(&SybilParams::new(g_s, g_o, l, t, n, delta_d))
}

#[pyfunction]
fn sybil_capture_prob(g_s: u64, g_o: u64, l: u16, t: u16, n: u16) -> f64 {
    adversary::sybil_capture_prob(&SybilParams::new(g_s, g_o, l, t, n, 1.0))
}

#[pyfunction]
fn sybil_optimum(l: u16, g_o: u64) -> Option<u64> {
    adversary::sybil_optimum(l, g_o)
}

#[pyfunction]
#[pyo3(signature = (g_s, g_o, l, t, n, trials=10_000, seed=1))]
#[allow(clippy::too_many_arguments)]
fn sybil_monte_carlo(
    py: Python<'_>,
    g_s: u64,
    g_o: u64,
    l: u16,
    t: u16,
    n: u16,
    trials: u64,
    seed: u64,
) -> PyResult<PyObject> {
    let p = SybilParams::new(g_s, g_o, l, t, n, 1.0);
    let mc = py.allow_threads(|| adversary::sybil_monte_carlo(&p, trials, seed));
    to_py(py, &mc)
}

/// Budget in wei to bribe executors at the given reputations.
#[pyfunction]
fn bribery_budget(
    reputations: Vec<u64>,
    delta_d: u128,
    delta_r: u64,
    delta_p: u128,
    r_l: u64,
    r_u: u64,
) -> PyResult<u128> {
    let p = BriberyParams { target_reputations: reputations, delta_d, delta_r, delta_p, r_l, r_u };
    adversary::bribery_budget(&p).map_err(err)
}

#[pyfunction]
fn gas_for(function: &str, nl: u64) -> PyResult<u64> {
    let g = GasSchedule::default();
    g.entry(function).ok_or_else(|| err(format!("unknown function {function:?}")))?;
    Ok(g.gas_for(function, nl))
}

#[pyfunction]
#[pyo3(signature = (path, nl, payloads=1))]
fn path_cost(py: Python<'_>, path: &str, nl: u64, payloads: u64) -> PyResult<PyObject> {
    let p: CostPath = path.parse().map_err(err)?;
    to_py(py, &econ::path_cost(&GasSchedule::default(), p, nl, payloads))
}

#[pyfunction]
#[pyo3(signature = (nl, followers, fee_wei=None))]
fn pooling_report(py: Python<'_>, nl: u64, followers: u64, fee_wei: Option<u128>) -> PyResult<PyObject> {
    let fee = fee_wei.unwrap_or(Economics::default().pool_fee);
    to_py(py, &econ::pooling_report(&GasSchedule::default(), nl, followers, fee))
}

#[pymodule]
pub fn timedtx(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKeyPair>()?;
    m.add_class::<RunResult>()?;
    m.add_function(wrap_pyfunction!(recover_address, m)?)?;
    m.add_function(wrap_pyfunction!(encrypt, m)?)?;
    m.add_function(wrap_pyfunction!(vrf_verify, m)?)?;
    m.add_function(wrap_pyfunction!(split_secret, m)?)?;
    m.add_function(wrap_pyfunction!(restore_secret, m)?)?;
    m.add_function(wrap_pyfunction!(split_small, m)?)?;
    m.add_function(wrap_pyfunction!(restore_small, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(sybil_budget, m)?)?;
    m.add_function(wrap_pyfunction!(sybil_capture_prob, m)?)?;
    m.add_function(wrap_pyfunction!(sybil_optimum, m)?)?;
    m.add_function(wrap_pyfunction!(sybil_monte_carlo, m)?)?;
    m.add_function(wrap_pyfunction!(bribery_budget, m)?)?;
    m.add_function(wrap_pyfunction!(gas_for, m)?)?;
    m.add_function(wrap_pyfunction!(path_cost, m)?)?;
    m.add_function(wrap_pyfunction!(pooling_report, m)?)?;
    Ok(())
}
