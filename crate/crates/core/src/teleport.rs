//! End-to-end atomic teleportation.
//!
//! Atom 1 carries the unknown state, atoms 2 (Alice) and 3 (Bob) share the
//! captured entangled pair. Alice transfers atom 1 into atom 2, maps the Bell
//! basis of atom 2 onto bare levels, identifies the Bell state by sequential
//! elimination with fluorescence probes and sends two classical bits; Bob
//! applies the matching correction to atom 3.
//!
//! Probes are projective whether or not the detector registers the
//! fluorescence. A fluorescing atom goes unnoticed with probability
//! ε = p_miss^n_cycles; a dark atom never produces a detection.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, RngCore};

pub use crate::atomics::BellOutcome;
use crate::atomics::{
    apply_pulses, atom_state, bell_map_sequence, bell_state, AtomLevel, NamedPulse,
    OscillatorFrame, PulseSpec, ATOM_DIM,
};
use crate::csvfmt;
use crate::error::{Error, Result};
use crate::linkmath;
use crate::qcore::{Branch, ProbeOutcome, SpaceLabel, StateVector, EXACT_TOL};

pub const ATOM1: &str = "atom1";
pub const ATOM2: &str = "atom2";
pub const ATOM3: &str = "atom3";

/// Per-cycle miss probability and number of cycling-transition repetitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    p_miss: f64,
    n_cycles: u32,
}

impl DetectorModel {
    pub fn new(p_miss: f64, n_cycles: u32) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_miss) {
            return Err(Error::InvalidParameter(format!(
                "p_miss must lie in [0, 1], got {p_miss}"
            )));
        }
        if n_cycles == 0 {
            return Err(Error::InvalidParameter(
                "n_cycles must be at least 1".into(),
            ));
        }
        Ok(Self { p_miss, n_cycles })
    }

    pub fn perfect() -> Self {
        Self {
            p_miss: 0.0,
            n_cycles: 1,
        }
    }

    pub fn p_miss(&self) -> f64 {
        self.p_miss
    }

    pub fn n_cycles(&self) -> u32 {
        self.n_cycles
    }

    /// Probability that a fluorescing atom is reported dark.
    pub fn epsilon(&self) -> f64 {
        linkmath::false_positive_prob(self.p_miss, self.n_cycles)
            .expect("validated on construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProbeStep {
    ProbeC1,
    ProbeD,
    ProbeC2,
}

impl ProbeStep {
    pub fn name(self) -> &'static str {
        match self {
            ProbeStep::ProbeC1 => "probe_c_1",
            ProbeStep::ProbeD => "probe_d",
            ProbeStep::ProbeC2 => "probe_c_2",
        }
    }

    /// Bell state reported when this probe registers fluorescence.
    pub fn reports(self) -> BellOutcome {
        match self {
            ProbeStep::ProbeC1 => BellOutcome::APlus,
            ProbeStep::ProbeD => BellOutcome::BPlus,
            ProbeStep::ProbeC2 => BellOutcome::BMinus,
        }
    }
}

impl fmt::Display for ProbeStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeEntry {
    pub step: ProbeStep,
    /// Population in the probed levels just before the probe.
    pub true_population: f64,
    pub fluoresced: bool,
    pub detected: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FluorescenceLog {
    pub entries: Vec<ProbeEntry>,
}

#[derive(Debug, Clone)]
pub struct BellMeasurement {
    pub reported: BellOutcome,
    /// Branch the joint state actually collapsed into.
    pub true_outcome: BellOutcome,
    pub atom3: StateVector,
    pub log: FluorescenceLog,
}

#[derive(Debug, Clone)]
pub struct TeleportRecord {
    pub alpha0: Complex64,
    pub beta0: Complex64,
    pub outcome: BellOutcome,
    pub reported_outcome: BellOutcome,
    pub fidelity: f64,
    pub log: FluorescenceLog,
}

pub const CSV_HEADER: &str =
    "seed,alpha0_re,alpha0_im,beta0_re,beta0_im,true_branch,reported_branch,fidelity";

impl TeleportRecord {
    pub fn csv_row(&self, seed: u64) -> String {
        format!(
            "{seed},{},{},{},{},{},{},{}",
            csvfmt::float(self.alpha0.re),
            csvfmt::float(self.alpha0.im),
            csvfmt::float(self.beta0.re),
            csvfmt::float(self.beta0.im),
            self.outcome,
            self.reported_outcome,
            csvfmt::float(self.fidelity),
        )
    }
}

fn normalize_pair(alpha0: Complex64, beta0: Complex64) -> Result<(Complex64, Complex64)> {
    let norm = (alpha0.norm_sqr() + beta0.norm_sqr()).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    Ok((alpha0 / norm, beta0 / norm))
}

/// |φ₁⟩ = α₀|c⟩ + β₀·θ|a⟩ on atom 1.
pub fn prepare_phi1(
    alpha0: Complex64,
    beta0: Complex64,
    frame: &OscillatorFrame,
) -> Result<StateVector> {
    let (alpha0, beta0) = normalize_pair(alpha0, beta0)?;
    atom_state(
        ATOM1,
        &[
            (AtomLevel::C, alpha0),
            (AtomLevel::A, beta0 * frame.theta()),
        ],
    )
}

pub fn pair_space() -> SpaceLabel {
    SpaceLabel::new([(ATOM2, ATOM_DIM), (ATOM3, ATOM_DIM)]).expect("distinct names")
}

/// (|a⟩₂|b⟩₃ + |b⟩₂|a⟩₃)/√2.
pub fn entangled_pair_state() -> StateVector {
    let space = pair_space();
    let mut amps = vec![Complex64::new(0.0, 0.0); space.total_dim()];
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    for (l2, l3) in [(AtomLevel::A, AtomLevel::B), (AtomLevel::B, AtomLevel::A)] {
        amps[space.index_of(&[l2.index(), l3.index()]).expect("in range")] = h;
    }
    StateVector::new(space, amps).expect("normalized")
}

/// Atom-1/atom-2 basis action of the coherence transfer:
/// c₁a₂→c₁c₂, c₁b₂→c₁d₂, a₁a₂→c₁a₂, a₁b₂→c₁b₂.
const TRANSFER_MAP: [((AtomLevel, AtomLevel), (AtomLevel, AtomLevel)); 4] = [
    ((AtomLevel::C, AtomLevel::A), (AtomLevel::C, AtomLevel::C)),
    ((AtomLevel::C, AtomLevel::B), (AtomLevel::C, AtomLevel::D)),
    ((AtomLevel::A, AtomLevel::A), (AtomLevel::C, AtomLevel::A)),
    ((AtomLevel::A, AtomLevel::B), (AtomLevel::C, AtomLevel::B)),
];

/// Permutation of the 36 atom-1/atom-2 product levels extending
/// [`TRANSFER_MAP`]; unmapped sources fill unused targets in index order.
fn transfer_permutation() -> [usize; ATOM_DIM * ATOM_DIM] {
    let pair = |(l1, l2): (AtomLevel, AtomLevel)| l1.index() * ATOM_DIM + l2.index();
    let mut perm = [usize::MAX; ATOM_DIM * ATOM_DIM];
    let mut used = [false; ATOM_DIM * ATOM_DIM];
    for (src, dst) in TRANSFER_MAP {
        perm[pair(src)] = pair(dst);
        used[pair(dst)] = true;
    }
    let mut free = (0..ATOM_DIM * ATOM_DIM).filter(|&t| !used[t]);
    for slot in perm.iter_mut().filter(|p| **p == usize::MAX) {
        *slot = free.next().expect("counts match");
    }
    perm
}

/// Ideal transfer of atom 1's state into atom 2, leaving atom 1 in |c⟩.
///
/// `joint` must live on atoms 1⊗2⊗3 with atom 1 confined to {a, c} and
/// atom 2 confined to {a, b}.
pub fn pellizzari_transfer(joint: &StateVector) -> Result<StateVector> {
    let space = joint.space();
    let names: Vec<_> = space
        .subsystems()
        .iter()
        .map(|s| (s.name.as_str(), s.dim))
        .collect();
    if names != [(ATOM1, ATOM_DIM), (ATOM2, ATOM_DIM), (ATOM3, ATOM_DIM)] {
        return Err(Error::Precondition(
            "transfer expects subsystems atom1, atom2, atom3".into(),
        ));
    }
    let pop1 = joint.level_populations(ATOM1)?;
    let pop2 = joint.level_populations(ATOM2)?;
    let stray1: f64 = pop1
        .iter()
        .enumerate()
        .filter(|(l, _)| ![0, 2].contains(l))
        .map(|(_, p)| p)
        .sum();
    let stray2: f64 = pop2
        .iter()
        .enumerate()
        .filter(|(l, _)| ![0, 1].contains(l))
        .map(|(_, p)| p)
        .sum();
    if stray1 > EXACT_TOL || stray2 > EXACT_TOL {
        return Err(Error::Precondition(format!(
            "transfer domain: atom1 outside {{a,c}} = {stray1:e}, atom2 outside {{a,b}} = {stray2:e}"
        )));
    }
    let perm = transfer_permutation();
    let amps = joint.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for (src12, &dst12) in perm.iter().enumerate() {
        for l3 in 0..ATOM_DIM {
            out[dst12 * ATOM_DIM + l3] = amps[src12 * ATOM_DIM + l3];
        }
    }
    StateVector::new(space.clone(), out)
}

/// Unnormalized atom-3 amplitude vectors multiplying each Bell state of
/// atom 2 in a state on atoms 2⊗3, in [`BellOutcome::ALL`] order.
pub fn bell_decomposition(
    state23: &StateVector,
    frame: &OscillatorFrame,
) -> Result<[Vec<Complex64>; 4]> {
    if state23.space() != &pair_space() {
        return Err(Error::SpaceMismatch);
    }
    let amps = state23.amplitudes();
    Ok(BellOutcome::ALL.map(|kind| {
        let bell = bell_state(kind, frame);
        (0..ATOM_DIM)
            .map(|l3| {
                (0..ATOM_DIM)
                    .map(|l2| bell.amplitudes()[l2].conj() * amps[l2 * ATOM_DIM + l3])
                    .sum()
            })
            .collect()
    }))
}

/// Born weight of each Bell branch of a state on atoms 2⊗3.
pub fn bell_branch_weights(state23: &StateVector, frame: &OscillatorFrame) -> Result<[f64; 4]> {
    Ok(bell_decomposition(state23, frame)?.map(|v| v.iter().map(|a| a.norm_sqr()).sum()))
}

/// Prepares |φ₁⟩ ⊗ |ψ₂₃⟩, transfers atom 1 into atom 2 and returns the
/// resulting state of atoms 2⊗3.
pub fn transferred_pair(
    alpha0: Complex64,
    beta0: Complex64,
    frame: &OscillatorFrame,
) -> Result<StateVector> {
    let joint = prepare_phi1(alpha0, beta0, frame)?.tensor(&entangled_pair_state())?;
    let (level, rest) = pellizzari_transfer(&joint)?.factor_out(ATOM1)?;
    debug_assert_eq!(level, AtomLevel::C.index());
    Ok(rest)
}

enum Steering<'a> {
    Sampled {
        epsilon: f64,
        rng: &'a mut dyn RngCore,
    },
    Forced(BellOutcome),
}

struct Elimination<'a> {
    state: StateVector,
    steering: Steering<'a>,
    log: FluorescenceLog,
    first_fluorescence: Option<ProbeStep>,
}

impl Elimination<'_> {
    fn pulse(&mut self, pulse: NamedPulse) -> Result<()> {
        self.state = pulse.spec().apply_to(&self.state, ATOM2)?;
        Ok(())
    }

    /// Projective fluorescence probe of `levels` on atom 2; returns whether
    /// the detector registered light.
    fn probe(&mut self, step: ProbeStep, levels: &[AtomLevel]) -> Result<bool> {
        let idx: Vec<usize> = levels.iter().map(|l| l.index()).collect();
        let pops = self.state.level_populations(ATOM2)?;
        let true_population = idx.iter().map(|&i| pops[i]).sum();
        let (m, detected) = match &mut self.steering {
            Steering::Forced(branch) => {
                let wanted = if step.reports() == *branch {
                    ProbeOutcome::In
                } else {
                    ProbeOutcome::Out
                };
                let m = self.state.measure(ATOM2, &idx, Branch::Forced(wanted))?;
                let fl = m.outcome == ProbeOutcome::In;
                (m, fl)
            }
            Steering::Sampled { epsilon, rng } => {
                let m = self
                    .state
                    .measure(ATOM2, &idx, Branch::Sampled(&mut **rng))?;
                let fl = m.outcome == ProbeOutcome::In;
                let detected = fl && rng.random::<f64>() >= *epsilon;
                (m, detected)
            }
        };
        let fluoresced = m.outcome == ProbeOutcome::In;
        self.state = m.collapsed;
        if fluoresced && self.first_fluorescence.is_none() {
            self.first_fluorescence = Some(step);
        }
        self.log.entries.push(ProbeEntry {
            step,
            true_population,
            fluoresced,
            detected,
        });
        Ok(detected)
    }

    fn run(mut self) -> Result<BellMeasurement> {
        use AtomLevel::*;
        let reported = 'elimination: {
            self.pulse(NamedPulse::ShelveD)?;
            if self.probe(ProbeStep::ProbeC1, &[C])? {
                break 'elimination BellOutcome::APlus;
            }
            self.pulse(NamedPulse::UnshelveD)?;
            if self.probe(ProbeStep::ProbeD, &[C, D])? {
                break 'elimination BellOutcome::BPlus;
            }
            self.pulse(NamedPulse::SwapAc)?;
            self.pulse(NamedPulse::SwapBd)?;
            self.pulse(NamedPulse::ShelveD)?;
            if self.probe(ProbeStep::ProbeC2, &[C])? {
                break 'elimination BellOutcome::BMinus;
            }
            BellOutcome::AMinus
        };
        let true_outcome = self
            .first_fluorescence
            .map_or(BellOutcome::AMinus, ProbeStep::reports);
        let (_, atom3) = self.state.factor_out(ATOM2)?;
        Ok(BellMeasurement {
            reported,
            true_outcome,
            atom3,
            log: self.log,
        })
    }
}

fn check_pair_state(state: &StateVector) -> Result<()> {
    if state.space() != &pair_space() {
        return Err(Error::Precondition(
            "Bell measurement expects subsystems atom2, atom3".into(),
        ));
    }
    Ok(())
}

/// Sequential-elimination Bell measurement on atom 2 of a state on atoms
/// 2⊗3 to which [`bell_map_sequence`] has already been applied.
pub fn sequential_bell_measurement<R: RngCore>(
    state: &StateVector,
    det: &DetectorModel,
    rng: &mut R,
) -> Result<BellMeasurement> {
    check_pair_state(state)?;
    Elimination {
        state: state.clone(),
        steering: Steering::Sampled {
            epsilon: det.epsilon(),
            rng,
        },
        log: FluorescenceLog::default(),
        first_fluorescence: None,
    }
    .run()
}

/// Same measurement with a perfect detector, post-selected on `branch`.
pub fn sequential_bell_measurement_forced(
    state: &StateVector,
    branch: BellOutcome,
) -> Result<BellMeasurement> {
    check_pair_state(state)?;
    Elimination {
        state: state.clone(),
        steering: Steering::Forced(branch),
        log: FluorescenceLog::default(),
        first_fluorescence: None,
    }
    .run()
}

pub fn correction_pulses(outcome: BellOutcome) -> Vec<PulseSpec> {
    let pulses: &[NamedPulse] = match outcome {
        BellOutcome::APlus => &[],
        BellOutcome::AMinus => &[NamedPulse::PhaseFlipA],
        BellOutcome::BPlus => &[NamedPulse::SwapAb],
        BellOutcome::BMinus => &[NamedPulse::SwapAb, NamedPulse::PhaseFlipA],
    };
    pulses.iter().map(|p| p.spec()).collect()
}

/// Bob's correction of atom 3 given Alice's message.
pub fn bob_correction(outcome: BellOutcome, atom3: &StateVector) -> Result<StateVector> {
    let name = match atom3.space().subsystems() {
        [only] if only.dim == ATOM_DIM => only.name.clone(),
        _ => {
            return Err(Error::Precondition(
                "correction expects a single six-level atom".into(),
            ))
        }
    };
    let pops = atom3.level_populations(&name)?;
    let stray: f64 = pops[AtomLevel::C.index()..].iter().sum();
    if stray > EXACT_TOL {
        return Err(Error::Precondition(format!(
            "atom 3 population outside {{a,b}}: {stray:e}"
        )));
    }
    apply_pulses(atom3, &correction_pulses(outcome), &name)
}

/// α₀|b⟩ + β₀|a⟩ on atom 3.
pub fn teleport_target(alpha0: Complex64, beta0: Complex64) -> Result<StateVector> {
    let (alpha0, beta0) = normalize_pair(alpha0, beta0)?;
    atom_state(ATOM3, &[(AtomLevel::B, alpha0), (AtomLevel::A, beta0)])
}

fn finish(alpha0: Complex64, beta0: Complex64, m: BellMeasurement) -> Result<TeleportRecord> {
    let corrected = bob_correction(m.reported, &m.atom3)?;
    let fidelity = corrected.fidelity(&teleport_target(alpha0, beta0)?)?;
    let (alpha0, beta0) = normalize_pair(alpha0, beta0)?;
    Ok(TeleportRecord {
        alpha0,
        beta0,
        outcome: m.true_outcome,
        reported_outcome: m.reported,
        fidelity,
        log: m.log,
    })
}

fn mapped_pair(
    alpha0: Complex64,
    beta0: Complex64,
    frame: &OscillatorFrame,
) -> Result<StateVector> {
    apply_pulses(
        &transferred_pair(alpha0, beta0, frame)?,
        &bell_map_sequence(frame),
        ATOM2,
    )
}

/// One full teleportation with a sampled measurement record.
pub fn teleport_once<R: RngCore>(
    alpha0: Complex64,
    beta0: Complex64,
    frame: &OscillatorFrame,
    det: &DetectorModel,
    rng: &mut R,
) -> Result<TeleportRecord> {
    let mapped = mapped_pair(alpha0, beta0, frame)?;
    finish(
        alpha0,
        beta0,
        sequential_bell_measurement(&mapped, det, rng)?,
    )
}

/// Teleportation with a perfect detector, post-selected on Bell branch `branch`.
pub fn teleport_forced(
    alpha0: Complex64,
    beta0: Complex64,
    frame: &OscillatorFrame,
    branch: BellOutcome,
) -> Result<TeleportRecord> {
    let mapped = mapped_pair(alpha0, beta0, frame)?;
    finish(
        alpha0,
        beta0,
        sequential_bell_measurement_forced(&mapped, branch)?,
    )
}

/// Exact probability of reporting each Bell state given the true one, rows
/// indexed by the true state, by enumeration of every detect/miss sequence.
pub fn confusion_matrix(det: &DetectorModel) -> [[f64; 4]; 4] {
    let eps = det.epsilon();
    let mut matrix = [[0.0; 4]; 4];
    for truth in BellOutcome::ALL {
        let row = &mut matrix[truth.index()];
        enumerate_elimination(0, truth.mapped_level(), 1.0, eps, row);
    }
    matrix
}

fn classical_pulse(level: AtomLevel, pulse: NamedPulse) -> AtomLevel {
    let (u, v) = pulse.spec().pair;
    if level == u {
        v
    } else if level == v {
        u
    } else {
        level
    }
}

/// Follows a bare level through the elimination steps, branching on
/// detected/missed at every fluorescing probe.
fn enumerate_elimination(step: usize, level: AtomLevel, weight: f64, eps: f64, row: &mut [f64; 4]) {
    use AtomLevel::*;
    let (level, bright, on_detect) = match step {
        0 => {
            let l = classical_pulse(level, NamedPulse::ShelveD);
            (l, l == C, BellOutcome::APlus)
        }
        1 => {
            let l = classical_pulse(level, NamedPulse::UnshelveD);
            (l, matches!(l, C | D), BellOutcome::BPlus)
        }
        2 => {
            let l = [NamedPulse::SwapAc, NamedPulse::SwapBd, NamedPulse::ShelveD]
                .into_iter()
                .fold(level, classical_pulse);
            (l, l == C, BellOutcome::BMinus)
        }
        _ => {
            row[BellOutcome::AMinus.index()] += weight;
            return;
        }
    };
    if bright {
        row[on_detect.index()] += weight * (1.0 - eps);
        enumerate_elimination(step + 1, level, weight * eps, eps, row);
    } else {
        enumerate_elimination(step + 1, level, weight, eps, row);
    }
}
