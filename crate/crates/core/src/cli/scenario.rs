//! Scenario files (TOML).
//!
//! Every section is optional and falls back to the built-in scenario, except
//! `seed`, which must always be given.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::atomics::OscillatorFrame;
use crate::linkmath::LinkBudget;
use crate::teleport::DetectorModel;

/// Built-in scenario: the rubidium link figures.
pub const DEFAULT_SCENARIO: &str = r#"seed = 42
teleport_inputs = "random(1000)"

[budget]
loss_db = 15.0
p_miss = 0.75
n_cycles = 30
eta_joint = 1.0
eta_single = 1.0
t_fluor = 3.0e-8
trial_overhead = 0.0

[frame]
omega_m_t = 0.0
xi = -1.5707963267948966

[capture]
target_pairs = 1000
workers = 0
per_trial_csv = false
"#;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub teleport_inputs: TeleportInputs,
    #[serde(default)]
    pub budget: BudgetSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorSection>,
    #[serde(default)]
    pub frame: FrameSection,
    #[serde(default)]
    pub capture: CaptureSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BudgetSection {
    pub loss_db: f64,
    pub p_miss: f64,
    pub n_cycles: u32,
    pub eta_joint: f64,
    /// Defaults to `eta_joint` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_single: Option<f64>,
    pub t_fluor: f64,
    pub trial_overhead: f64,
}

impl Default for BudgetSection {
    fn default() -> Self {
        let p = LinkBudget::baseline();
        Self {
            loss_db: p.loss_db,
            p_miss: p.p_miss,
            n_cycles: p.n_cycles,
            eta_joint: p.eta_joint,
            eta_single: None,
            t_fluor: p.t_fluor,
            trial_overhead: p.trial_overhead,
        }
    }
}

impl BudgetSection {
    pub fn to_budget(&self) -> LinkBudget {
        LinkBudget {
            loss_db: self.loss_db,
            p_miss: self.p_miss,
            n_cycles: self.n_cycles,
            eta_joint: self.eta_joint,
            eta_single: self.eta_single.unwrap_or(self.eta_joint),
            t_fluor: self.t_fluor,
            trial_overhead: self.trial_overhead,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub p_miss: f64,
    pub n_cycles: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameSection {
    pub omega_m_t: f64,
    pub xi: f64,
}

impl Default for FrameSection {
    fn default() -> Self {
        let f = OscillatorFrame::default();
        Self {
            omega_m_t: f.omega_m_t,
            xi: f.xi,
        }
    }
}

impl From<FrameSection> for OscillatorFrame {
    fn from(f: FrameSection) -> Self {
        OscillatorFrame::new(f.omega_m_t, f.xi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CaptureSection {
    pub target_pairs: u64,
    /// 0 = one worker per core.
    pub workers: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_trials_per_pair: Option<u64>,
    pub per_trial_csv: bool,
}

impl Default for CaptureSection {
    fn default() -> Self {
        Self {
            target_pairs: 1000,
            workers: 0,
            max_trials_per_pair: None,
            per_trial_csv: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputState {
    /// [re, im]
    pub alpha0: [f64; 2],
    /// [re, im]
    pub beta0: [f64; 2],
}

impl InputState {
    pub fn amplitudes(&self) -> (Complex64, Complex64) {
        (
            Complex64::new(self.alpha0[0], self.alpha0[1]),
            Complex64::new(self.beta0[0], self.beta0[1]),
        )
    }
}

/// Either an explicit list of (α₀, β₀) or `"random(count)"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInputs", into = "RawInputs")]
pub enum TeleportInputs {
    Random(u64),
    Explicit(Vec<InputState>),
}

impl Default for TeleportInputs {
    fn default() -> Self {
        TeleportInputs::Random(1000)
    }
}

impl TeleportInputs {
    pub fn len(&self) -> u64 {
        match self {
            TeleportInputs::Random(n) => *n,
            TeleportInputs::Explicit(v) => v.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawInputs {
    Text(String),
    List(Vec<InputState>),
}

impl TryFrom<RawInputs> for TeleportInputs {
    type Error = String;

    fn try_from(raw: RawInputs) -> Result<Self, String> {
        match raw {
            RawInputs::List(v) => Ok(TeleportInputs::Explicit(v)),
            RawInputs::Text(s) => s
                .trim()
                .strip_prefix("random(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|n| n.trim().parse().ok())
                .map(TeleportInputs::Random)
                .ok_or_else(|| {
                    format!("expected \"random(<count>)\" or a list of inputs, got {s:?}")
                }),
        }
    }
}

impl From<TeleportInputs> for RawInputs {
    fn from(t: TeleportInputs) -> Self {
        match t {
            TeleportInputs::Random(n) => RawInputs::Text(format!("random({n})")),
            TeleportInputs::Explicit(v) => RawInputs::List(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    LossDb,
    PMiss,
    NCycles,
    EtaJoint,
    EtaSingle,
    TFluor,
}

impl SweepParameter {
    const ALL: [SweepParameter; 6] = [
        SweepParameter::LossDb,
        SweepParameter::PMiss,
        SweepParameter::NCycles,
        SweepParameter::EtaJoint,
        SweepParameter::EtaSingle,
        SweepParameter::TFluor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::LossDb => "loss_db",
            SweepParameter::PMiss => "p_miss",
            SweepParameter::NCycles => "n_cycles",
            SweepParameter::EtaJoint => "eta_joint",
            SweepParameter::EtaSingle => "eta_single",
            SweepParameter::TFluor => "t_fluor",
        }
    }

    /// Copy of `budget` with this parameter set to `value`.
    pub fn set(self, budget: &LinkBudget, value: f64) -> LinkBudget {
        let mut b = *budget;
        match self {
            SweepParameter::LossDb => b.loss_db = value,
            SweepParameter::PMiss => b.p_miss = value,
            SweepParameter::NCycles => b.n_cycles = value.round() as u32,
            SweepParameter::EtaJoint => b.eta_joint = value,
            SweepParameter::EtaSingle => b.eta_single = value,
            SweepParameter::TFluor => b.t_fluor = value,
        }
        b
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown sweep parameter `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub steps: u32,
}

impl Sweep {
    /// Evenly spaced points from `start` to `stop` inclusive.
    pub fn points(&self) -> Result<Vec<f64>, String> {
        if self.steps == 0 {
            return Err("sweep needs at least one step".into());
        }
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err("sweep bounds must be finite".into());
        }
        if self.steps == 1 {
            return Ok(vec![self.start]);
        }
        let span = self.stop - self.start;
        let last = f64::from(self.steps - 1);
        Ok((0..self.steps)
            .map(|i| self.start + span * f64::from(i) / last)
            .collect())
    }
}

impl FromStr for Sweep {
    type Err = String;

    /// `name:start:stop:steps`
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [name, start, stop, steps] = parts[..] else {
            return Err(format!("expected name:start:stop:steps, got `{s}`"));
        };
        let num = |v: &str| v.parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
        Ok(Sweep {
            parameter: name.parse()?,
            start: num(start)?,
            stop: num(stop)?,
            steps: steps.parse().map_err(|e| format!("`{steps}`: {e}"))?,
        })
    }
}

impl Scenario {
    pub fn builtin() -> Self {
        Self::from_toml(DEFAULT_SCENARIO).expect("built-in scenario parses")
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| e.to_string())?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn budget(&self) -> LinkBudget {
        self.budget.to_budget()
    }

    pub fn detector(&self) -> Result<DetectorModel, String> {
        DetectorModel::new(self.budget.p_miss, self.budget.n_cycles).map_err(|e| e.to_string())
    }

    pub fn frame(&self) -> OscillatorFrame {
        self.frame.into()
    }

    pub fn validate(&self) -> Result<(), String> {
        if let Some(det) = &self.detector {
            if det.p_miss != self.budget.p_miss || det.n_cycles != self.budget.n_cycles {
                return Err(format!(
                    "detector (p_miss={}, n_cycles={}) disagrees with budget (p_miss={}, n_cycles={})",
                    det.p_miss, det.n_cycles, self.budget.p_miss, self.budget.n_cycles
                ));
            }
        }
        self.budget().validate().map_err(|e| e.to_string())?;
        if self.capture.target_pairs == 0 {
            return Err("capture.target_pairs must be at least 1".into());
        }
        if self.capture.max_trials_per_pair == Some(0) {
            return Err("capture.max_trials_per_pair must be at least 1".into());
        }
        if let Some(sweep) = &self.sweep {
            sweep.points()?;
        }
        Ok(())
    }

    /// Sets the detector parameters on the budget and on the detector
    /// section, keeping the two consistent.
    pub fn set_detector(&mut self, p_miss: Option<f64>, n_cycles: Option<u32>) {
        if let Some(p) = p_miss {
            self.budget.p_miss = p;
        }
        if let Some(n) = n_cycles {
            self.budget.n_cycles = n;
        }
        if let Some(det) = &mut self.detector {
            det.p_miss = self.budget.p_miss;
            det.n_cycles = self.budget.n_cycles;
        }
    }
}
