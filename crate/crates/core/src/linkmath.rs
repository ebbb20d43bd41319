//! Closed-form link budget for one entanglement link: fiber survival,
//! false-positive probability of the cycling-transition readout, effective
//! SNR, repetition count, pair-generation time and herald fidelity.

use std::fmt;

use crate::error::{Error, Result};

/// Parameters of one two-arm entanglement link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Net loss per arm in dB.
    pub loss_db: f64,
    /// Probability the detector misses a single fluorescence photon.
    pub p_miss: f64,
    /// Repetitions of the cycling transition per readout.
    pub n_cycles: u32,
    /// Joint loading probability given both photons arrive.
    pub eta_joint: f64,
    /// Loading probability given exactly one photon arrives.
    pub eta_single: f64,
    /// Fluorescent photon emission time per cycle, seconds.
    pub t_fluor: f64,
    /// Extra time charged to every capture trial, seconds.
    pub trial_overhead: f64,
}

impl LinkBudget {
    /// 10 km link at 3 dB/km split over two arms, 25% photon detection,
    /// 30 readout cycles of 30 ns, unit loading.
    pub fn baseline() -> Self {
        Self {
            loss_db: 15.0,
            p_miss: 0.75,
            n_cycles: 30,
            eta_joint: 1.0,
            eta_single: 1.0,
            t_fluor: 30e-9,
            trial_overhead: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} = {v}")));
        if !(self.loss_db >= 0.0 && self.loss_db.is_finite()) {
            return bad("loss_db", self.loss_db);
        }
        if !(0.0..=1.0).contains(&self.p_miss) {
            return bad("p_miss", self.p_miss);
        }
        if self.n_cycles == 0 {
            return bad("n_cycles", 0.0);
        }
        if !(self.eta_joint > 0.0 && self.eta_joint <= 1.0) {
            return bad("eta_joint", self.eta_joint);
        }
        if !(self.eta_single > 0.0 && self.eta_single <= 1.0) {
            return bad("eta_single", self.eta_single);
        }
        if !(self.t_fluor > 0.0 && self.t_fluor.is_finite()) {
            return bad("t_fluor", self.t_fluor);
        }
        if !(self.trial_overhead >= 0.0 && self.trial_overhead.is_finite()) {
            return bad("trial_overhead", self.trial_overhead);
        }
        Ok(())
    }

    pub fn survival(&self) -> f64 {
        10f64.powf(-self.loss_db / 10.0)
    }

    pub fn epsilon(&self) -> f64 {
        self.p_miss.powi(self.n_cycles as i32)
    }

    /// Simulated time consumed by one capture trial.
    pub fn trial_duration(&self) -> f64 {
        f64::from(self.n_cycles) * self.t_fluor + self.trial_overhead
    }

    pub fn coincidence_prob(&self) -> f64 {
        coincidence_prob(
            self.survival(),
            self.eta_joint,
            self.eta_single,
            self.epsilon(),
        )
    }

    /// Mean of the geometric number of trials until a coincidence.
    pub fn mean_trials_per_pair(&self) -> f64 {
        1.0 / self.coincidence_prob()
    }

    pub fn herald_fidelity(&self) -> Result<f64> {
        herald_fidelity(
            self.survival(),
            self.eta_joint,
            self.eta_single,
            self.epsilon(),
        )
    }
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self::baseline()
    }
}

fn check_prob(what: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} must lie in [0, 1], got {p}"
        )))
    }
}

/// λ = 10^(−L/10).
pub fn survival_prob(loss_db: f64) -> Result<f64> {
    if loss_db.is_nan() || loss_db < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "loss must be non-negative, got {loss_db} dB"
        )));
    }
    Ok(10f64.powf(-loss_db / 10.0))
}

/// ε = p^N.
pub fn false_positive_prob(p_miss: f64, n_cycles: u32) -> Result<f64> {
    check_prob("p_miss", p_miss)?;
    if n_cycles == 0 {
        return Err(Error::InvalidParameter(
            "n_cycles must be at least 1".into(),
        ));
    }
    Ok(p_miss.powi(n_cycles as i32))
}

/// Effective signal-to-noise ratio of the readout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Snr {
    Finite(f64),
    /// ε = 0.
    Unbounded,
}

impl Snr {
    pub fn db(self) -> Option<f64> {
        match self {
            Snr::Finite(s) => Some(s),
            Snr::Unbounded => None,
        }
    }
}

impl fmt::Display for Snr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Snr::Finite(s) => write!(f, "{s}"),
            Snr::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// S = −10·log10(ε).
pub fn snr_db(epsilon: f64) -> Result<Snr> {
    check_prob("epsilon", epsilon)?;
    if epsilon == 0.0 {
        return Ok(Snr::Unbounded);
    }
    Ok(Snr::Finite(-10.0 * epsilon.log10()))
}

/// ε = 10^(−S/10).
pub fn epsilon_from_snr(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Loss-only repetition count 1/λ² = 10^(L/5).
pub fn expected_trials(loss_db: f64) -> f64 {
    10f64.powf(loss_db / 5.0)
}

/// t_fluor × N × 10^(2L/10).
pub fn pair_generation_time(budget: &LinkBudget) -> f64 {
    budget.t_fluor * f64::from(budget.n_cycles) * 10f64.powf(2.0 * budget.loss_db / 10.0)
}

/// Absorption-configuration weights (both, exactly one, neither).
fn absorption_weights(survival: f64, eta_joint: f64, eta_single: f64) -> (f64, f64, f64) {
    let both = survival * survival * eta_joint;
    let one = 2.0 * survival * (1.0 - survival) * eta_single;
    (both, one, 1.0 - both - one)
}

/// Probability that both nodes herald in one trial.
pub fn coincidence_prob(survival: f64, eta_joint: f64, eta_single: f64, epsilon: f64) -> f64 {
    let (q2, q1, q0) = absorption_weights(survival, eta_joint, eta_single);
    q2 + q1 * epsilon + q0 * epsilon * epsilon
}

/// Probability that a declared coincidence is a genuine pair.
///
/// A node that absorbed always heralds; a node that did not heralds with
/// probability ε. With q₂, q₁, q₀ the probabilities that both, exactly one
/// and neither node absorbed, the fidelity is q₂ / (q₂ + q₁ε + q₀ε²).
pub fn herald_fidelity(
    survival: f64,
    eta_joint: f64,
    eta_single: f64,
    epsilon: f64,
) -> Result<f64> {
    check_prob("survival", survival)?;
    check_prob("eta_joint", eta_joint)?;
    check_prob("eta_single", eta_single)?;
    check_prob("epsilon", epsilon)?;
    let (q2, _, _) = absorption_weights(survival, eta_joint, eta_single);
    let declared = coincidence_prob(survival, eta_joint, eta_single, epsilon);
    if declared <= 0.0 {
        return Err(Error::InvalidParameter("no coincidence is possible".into()));
    }
    Ok(q2 / declared)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn survival_examples() {
        assert_eq!(survival_prob(0.0).unwrap(), 1.0);
        assert!((survival_prob(15.0).unwrap() - 0.0316228).abs() < 1e-6);
        assert!((survival_prob(10.0).unwrap() - 0.1).abs() < 1e-16);
        assert!(survival_prob(-1.0).is_err());
    }

    #[test]
    fn false_positive_examples() {
        let eps = false_positive_prob(0.75, 30).unwrap();
        assert!(((eps - 1.787e-4) / 1.787e-4).abs() < 1e-3);
        assert_eq!(false_positive_prob(0.0, 7).unwrap(), 0.0);
        assert_eq!(false_positive_prob(1.0, 7).unwrap(), 1.0);
        assert!(false_positive_prob(1.5, 7).is_err());
        assert!(false_positive_prob(0.5, 0).is_err());
    }

    #[test]
    fn snr_examples() {
        let eps = false_positive_prob(0.75, 30).unwrap();
        assert!((snr_db(eps).unwrap().db().unwrap() - 37.5).abs() < 0.1);
        assert!((snr_db(0.1).unwrap().db().unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(snr_db(1.0).unwrap(), Snr::Finite(0.0));
        assert_eq!(snr_db(0.0).unwrap(), Snr::Unbounded);
        assert_eq!(Snr::Unbounded.to_string(), "unbounded");
    }

    #[test]
    fn expected_trials_examples() {
        assert_eq!(expected_trials(15.0), 1000.0);
        assert_eq!(expected_trials(0.0), 1.0);
        assert!((expected_trials(5.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn pair_time_examples() {
        let base = LinkBudget::baseline();
        assert!((pair_generation_time(&base) - 9.0e-4).abs() < 1e-18);
        let lossless = LinkBudget {
            loss_db: 0.0,
            n_cycles: 7,
            t_fluor: 2e-9,
            ..base
        };
        assert!((pair_generation_time(&lossless) / 14e-9 - 1.0).abs() < 1e-15);
        let single = LinkBudget {
            n_cycles: 1,
            ..base
        };
        assert!((pair_generation_time(&single) - 3.0e-5).abs() < 1e-18);
    }

    #[test]
    fn herald_fidelity_examples() {
        assert_eq!(herald_fidelity(0.2, 0.7, 0.4, 0.0).unwrap(), 1.0);
        let eps = false_positive_prob(0.75, 30).unwrap();
        assert!((herald_fidelity(0.0316, 1.0, 1.0, eps).unwrap() - 0.9891).abs() < 1e-3);
        assert_eq!(herald_fidelity(1.0, 1.0, 1.0, 0.3).unwrap(), 1.0);
        assert!(herald_fidelity(0.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn budget_validation() {
        assert!(LinkBudget::baseline().validate().is_ok());
        assert!(LinkBudget {
            eta_joint: 0.0,
            ..LinkBudget::baseline()
        }
        .validate()
        .is_err());
        assert!(LinkBudget {
            loss_db: -3.0,
            ..LinkBudget::baseline()
        }
        .validate()
        .is_err());
        assert!(LinkBudget {
            t_fluor: 0.0,
            ..LinkBudget::baseline()
        }
        .validate()
        .is_err());
    }
}
