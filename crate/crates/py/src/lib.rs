//! Python bindings: link-budget formulas, the capture campaign and the
//! state-vector teleportation protocol.

use atomnet_core::atomics::{self, BellOutcome};
use atomnet_core::teleport;
use atomnet_core::{capture_sim, linkmath, rng};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: atomnet_core::Error) -> PyErr {
    match e {
        atomnet_core::Error::Exhausted { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(name = "LinkBudget", from_py_object)]
#[derive(Clone)]
struct PyLinkBudget {
    inner: linkmath::LinkBudget,
}

#[pymethods]
impl PyLinkBudget {
    /// Defaults are the 15 dB, p = 0.75, N = 30, 30 ns budget.
    #[new]
    #[pyo3(signature = (loss_db=15.0, p_miss=0.75, n_cycles=30, eta_joint=1.0, eta_single=None, t_fluor=30e-9, trial_overhead=0.0))]
    fn new(
        loss_db: f64,
        p_miss: f64,
        n_cycles: u32,
        eta_joint: f64,
        eta_single: Option<f64>,
        t_fluor: f64,
        trial_overhead: f64,
    ) -> PyResult<Self> {
        let inner = linkmath::LinkBudget {
            loss_db,
            p_miss,
            n_cycles,
            eta_joint,
            eta_single: eta_single.unwrap_or(eta_joint),
            t_fluor,
            trial_overhead,
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn loss_db(&self) -> f64 {
        self.inner.loss_db
    }

    #[getter]
    fn p_miss(&self) -> f64 {
        self.inner.p_miss
    }

    #[getter]
    fn n_cycles(&self) -> u32 {
        self.inner.n_cycles
    }

    #[getter]
    fn eta_joint(&self) -> f64 {
        self.inner.eta_joint
    }

    #[getter]
    fn eta_single(&self) -> f64 {
        self.inner.eta_single
    }

    #[getter]
    fn t_fluor(&self) -> f64 {
        self.inner.t_fluor
    }

    #[getter]
    fn trial_overhead(&self) -> f64 {
        self.inner.trial_overhead
    }

    fn survival(&self) -> f64 {
        self.inner.survival()
    }

    fn epsilon(&self) -> f64 {
        self.inner.epsilon()
    }

    fn coincidence_prob(&self) -> f64 {
        self.inner.coincidence_prob()
    }

    fn mean_trials_per_pair(&self) -> f64 {
        self.inner.mean_trials_per_pair()
    }

    fn herald_fidelity(&self) -> PyResult<f64> {
        self.inner.herald_fidelity().map_err(to_py)
    }

    fn pair_generation_time(&self) -> f64 {
        linkmath::pair_generation_time(&self.inner)
    }

    fn __repr__(&self) -> String {
        let b = &self.inner;
        format!(
            "LinkBudget(loss_db={}, p_miss={}, n_cycles={}, eta_joint={}, eta_single={}, t_fluor={}, trial_overhead={})",
            b.loss_db, b.p_miss, b.n_cycles, b.eta_joint, b.eta_single, b.t_fluor, b.trial_overhead
        )
    }
}

#[pyclass(name = "DetectorModel", from_py_object)]
#[derive(Clone)]
struct PyDetectorModel {
    inner: teleport::DetectorModel,
}

#[pymethods]
impl PyDetectorModel {
    #[new]
    fn new(p_miss: f64, n_cycles: u32) -> PyResult<Self> {
        Ok(Self {
            inner: teleport::DetectorModel::new(p_miss, n_cycles).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn perfect() -> Self {
        Self {
            inner: teleport::DetectorModel::perfect(),
        }
    }

    #[getter]
    fn p_miss(&self) -> f64 {
        self.inner.p_miss()
    }

    #[getter]
    fn n_cycles(&self) -> u32 {
        self.inner.n_cycles()
    }

    fn epsilon(&self) -> f64 {
        self.inner.epsilon()
    }
}

#[pyclass(name = "OscillatorFrame", from_py_object)]
#[derive(Clone)]
struct PyOscillatorFrame {
    inner: atomics::OscillatorFrame,
}

#[pymethods]
impl PyOscillatorFrame {
    #[new]
    #[pyo3(signature = (omega_m_t=0.0, xi=-std::f64::consts::FRAC_PI_2))]
    fn new(omega_m_t: f64, xi: f64) -> Self {
        Self {
            inner: atomics::OscillatorFrame::new(omega_m_t, xi),
        }
    }

    #[getter]
    fn omega_m_t(&self) -> f64 {
        self.inner.omega_m_t
    }

    #[getter]
    fn xi(&self) -> f64 {
        self.inner.xi
    }

    fn theta(&self) -> Complex64 {
        self.inner.theta()
    }
}

fn frame_or_default(frame: Option<PyOscillatorFrame>) -> atomics::OscillatorFrame {
    frame.map(|f| f.inner).unwrap_or_default()
}

#[pyclass(name = "TeleportRecord", frozen, get_all)]
struct PyTeleportRecord {
    alpha0: Complex64,
    beta0: Complex64,
    outcome: String,
    reported_outcome: String,
    fidelity: f64,
}

#[pymethods]
impl PyTeleportRecord {
    fn __repr__(&self) -> String {
        format!(
            "TeleportRecord(outcome={}, reported_outcome={}, fidelity={})",
            self.outcome, self.reported_outcome, self.fidelity
        )
    }
}

impl From<teleport::TeleportRecord> for PyTeleportRecord {
    fn from(r: teleport::TeleportRecord) -> Self {
        Self {
            alpha0: r.alpha0,
            beta0: r.beta0,
            outcome: r.outcome.to_string(),
            reported_outcome: r.reported_outcome.to_string(),
            fidelity: r.fidelity,
        }
    }
}

#[pyclass(name = "CampaignStats", frozen, get_all)]
struct PyCampaignStats {
    trials_total: u64,
    pairs_declared: u64,
    pairs_true: u64,
    empirical_fidelity: f64,
    mean_trials_per_pair: f64,
    elapsed_sim_time: f64,
    confidence_halfwidth: f64,
    mean_time_per_pair: f64,
}

#[pymethods]
impl PyCampaignStats {
    fn __repr__(&self) -> String {
        format!(
            "CampaignStats(pairs_declared={}, trials_total={}, empirical_fidelity={}, mean_time_per_pair={})",
            self.pairs_declared, self.trials_total, self.empirical_fidelity, self.mean_time_per_pair
        )
    }
}

#[pyfunction]
fn survival_prob(loss_db: f64) -> PyResult<f64> {
    linkmath::survival_prob(loss_db).map_err(to_py)
}

#[pyfunction]
fn false_positive_prob(p_miss: f64, n_cycles: u32) -> PyResult<f64> {
    linkmath::false_positive_prob(p_miss, n_cycles).map_err(to_py)
}

/// SNR in dB, or None when epsilon is zero.
#[pyfunction]
fn snr_db(epsilon: f64) -> PyResult<Option<f64>> {
    Ok(linkmath::snr_db(epsilon).map_err(to_py)?.db())
}

#[pyfunction]
fn epsilon_from_snr(snr_db: f64) -> f64 {
    linkmath::epsilon_from_snr(snr_db)
}

#[pyfunction]
fn expected_trials(loss_db: f64) -> f64 {
    linkmath::expected_trials(loss_db)
}

#[pyfunction]
fn coincidence_prob(survival: f64, eta_joint: f64, eta_single: f64, epsilon: f64) -> f64 {
    linkmath::coincidence_prob(survival, eta_joint, eta_single, epsilon)
}

#[pyfunction]
fn herald_fidelity(survival: f64, eta_joint: f64, eta_single: f64, epsilon: f64) -> PyResult<f64> {
    linkmath::herald_fidelity(survival, eta_joint, eta_single, epsilon).map_err(to_py)
}

/// Rows are true outcomes, columns reported outcomes, both ordered A+, A-, B+, B-.
#[pyfunction]
fn confusion_matrix(detector: PyDetectorModel) -> Vec<Vec<f64>> {
    teleport::confusion_matrix(&detector.inner)
        .iter()
        .map(|r| r.to_vec())
        .collect()
}

#[pyfunction]
#[pyo3(signature = (alpha0, beta0, frame=None))]
fn bell_branch_weights(
    alpha0: Complex64,
    beta0: Complex64,
    frame: Option<PyOscillatorFrame>,
) -> PyResult<Vec<f64>> {
    let frame = frame_or_default(frame);
    let pair = teleport::transferred_pair(alpha0, beta0, &frame).map_err(to_py)?;
    Ok(teleport::bell_branch_weights(&pair, &frame)
        .map_err(to_py)?
        .to_vec())
}

#[pyfunction]
#[pyo3(signature = (alpha0, beta0, seed, frame=None, detector=None))]
fn teleport_once(
    alpha0: Complex64,
    beta0: Complex64,
    seed: u64,
    frame: Option<PyOscillatorFrame>,
    detector: Option<PyDetectorModel>,
) -> PyResult<PyTeleportRecord> {
    let det = detector
        .map(|d| d.inner)
        .unwrap_or_else(teleport::DetectorModel::perfect);
    let mut stream = rng::stream(seed);
    teleport::teleport_once(alpha0, beta0, &frame_or_default(frame), &det, &mut stream)
        .map(Into::into)
        .map_err(to_py)
}

/// Teleportation post-selected on `branch` ("A+", "A-", "B+" or "B-").
#[pyfunction]
#[pyo3(signature = (alpha0, beta0, branch, frame=None))]
fn teleport_forced(
    alpha0: Complex64,
    beta0: Complex64,
    branch: &str,
    frame: Option<PyOscillatorFrame>,
) -> PyResult<PyTeleportRecord> {
    let branch: BellOutcome = branch.parse().map_err(to_py)?;
    teleport::teleport_forced(alpha0, beta0, &frame_or_default(frame), branch)
        .map(Into::into)
        .map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (budget, target_pairs, seed, workers=1))]
fn run_campaign(
    py: Python<'_>,
    budget: PyLinkBudget,
    target_pairs: u64,
    seed: u64,
    workers: usize,
) -> PyResult<PyCampaignStats> {
    let stats = py
        .detach(|| capture_sim::run_campaign(&budget.inner, target_pairs, seed, workers))
        .map_err(to_py)?;
    Ok(PyCampaignStats {
        trials_total: stats.trials_total,
        pairs_declared: stats.pairs_declared,
        pairs_true: stats.pairs_true,
        empirical_fidelity: stats.empirical_fidelity,
        mean_trials_per_pair: stats.mean_trials_per_pair,
        elapsed_sim_time: stats.elapsed_sim_time,
        confidence_halfwidth: stats.confidence_halfwidth,
        mean_time_per_pair: stats.mean_time_per_pair(),
    })
}

#[pymodule]
fn atomnet(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLinkBudget>()?;
    m.add_class::<PyDetectorModel>()?;
    m.add_class::<PyOscillatorFrame>()?;
    m.add_class::<PyTeleportRecord>()?;
    m.add_class::<PyCampaignStats>()?;
    m.add_function(wrap_pyfunction!(survival_prob, m)?)?;
    m.add_function(wrap_pyfunction!(false_positive_prob, m)?)?;
    m.add_function(wrap_pyfunction!(snr_db, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_from_snr, m)?)?;
    m.add_function(wrap_pyfunction!(expected_trials, m)?)?;
    m.add_function(wrap_pyfunction!(coincidence_prob, m)?)?;
    m.add_function(wrap_pyfunction!(herald_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(confusion_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(bell_branch_weights, m)?)?;
    m.add_function(wrap_pyfunction!(teleport_once, m)?)?;
    m.add_function(wrap_pyfunction!(teleport_forced, m)?)?;
    m.add_function(wrap_pyfunction!(run_campaign, m)?)?;
    Ok(())
}
