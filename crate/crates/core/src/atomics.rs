//! Rubidium 5S₁/₂ ground-sublevel model, named Raman pulses and Bell-basis
//! utilities.
//!
//! Excited states are adiabatically eliminated: every coherent operation is
//! an effective two-level rotation between ground sublevels, written in the
//! rotating frame of the shared oscillator.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qcore::{two_level_rotation, Operator, SpaceLabel, StateVector};

/// Number of modelled ground sublevels per atom.
pub const ATOM_DIM: usize = 6;

/// Ground sublevels. Indices are fixed and used for serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomLevel {
    /// F=2, m_F=−1
    A = 0,
    /// F=2, m_F=+1
    B = 1,
    /// F=1, m_F=−1
    C = 2,
    /// F=1, m_F=+1
    D = 3,
    /// Auxiliary shelf in the F=2 manifold.
    X = 4,
    /// F=1, m_F=0
    Z = 5,
}

impl AtomLevel {
    pub const ALL: [AtomLevel; ATOM_DIM] = [
        AtomLevel::A,
        AtomLevel::B,
        AtomLevel::C,
        AtomLevel::D,
        AtomLevel::X,
        AtomLevel::Z,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            AtomLevel::A => "a",
            AtomLevel::B => "b",
            AtomLevel::C => "c",
            AtomLevel::D => "d",
            AtomLevel::X => "x",
            AtomLevel::Z => "z",
        }
    }
}

impl fmt::Display for AtomLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The four Bell states of atom 2, in message order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellOutcome {
    APlus = 0,
    AMinus = 1,
    BPlus = 2,
    BMinus = 3,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [
        BellOutcome::APlus,
        BellOutcome::AMinus,
        BellOutcome::BPlus,
        BellOutcome::BMinus,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Two-bit classical message: A+ → 00, A− → 01, B+ → 10, B− → 11.
    pub fn message(self) -> [bool; 2] {
        let i = self.index();
        [i & 0b10 != 0, i & 0b01 != 0]
    }

    pub fn from_message(bits: [bool; 2]) -> Self {
        Self::ALL[(usize::from(bits[0]) << 1) | usize::from(bits[1])]
    }

    pub fn label(self) -> &'static str {
        match self {
            BellOutcome::APlus => "A+",
            BellOutcome::AMinus => "A-",
            BellOutcome::BPlus => "B+",
            BellOutcome::BMinus => "B-",
        }
    }

    /// Bare level this Bell state is mapped onto by [`bell_map_sequence`].
    pub fn mapped_level(self) -> AtomLevel {
        match self {
            BellOutcome::APlus => AtomLevel::C,
            BellOutcome::AMinus => AtomLevel::B,
            BellOutcome::BPlus => AtomLevel::D,
            BellOutcome::BMinus => AtomLevel::A,
        }
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for BellOutcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|o| o.label() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown Bell outcome `{s}`")))
    }
}

/// Oscillator phase reference shared by state preparation and measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorFrame {
    /// Accumulated phase ω_M·t at the reference instant.
    pub omega_m_t: f64,
    /// Oscillator phase offset ξ.
    pub xi: f64,
}

impl OscillatorFrame {
    pub fn new(omega_m_t: f64, xi: f64) -> Self {
        Self { omega_m_t, xi }
    }

    /// θ = exp[−i(ω_M t + ξ)].
    pub fn theta(&self) -> Complex64 {
        Complex64::from_polar(1.0, -(self.omega_m_t + self.xi))
    }
}

impl Default for OscillatorFrame {
    fn default() -> Self {
        Self {
            omega_m_t: 0.0,
            xi: -FRAC_PI_2,
        }
    }
}

/// Effective Raman rotation between two ground sublevels.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSpec {
    pub pair: (AtomLevel, AtomLevel),
    pub area: f64,
    pub phase: f64,
    pub label: String,
}

impl PulseSpec {
    pub fn new(
        pair: (AtomLevel, AtomLevel),
        area: f64,
        phase: f64,
        label: impl Into<String>,
    ) -> Self {
        Self {
            pair,
            area,
            phase,
            label: label.into(),
        }
    }

    pub fn operator(&self) -> Operator {
        two_level_rotation(
            ATOM_DIM,
            self.pair.0.index(),
            self.pair.1.index(),
            self.area,
            self.phase,
        )
        .expect("atom levels are distinct and in range")
    }

    /// Same pair and phase with negated area, which is the adjoint rotation.
    pub fn inverse(&self) -> Self {
        Self {
            pair: self.pair,
            area: -self.area,
            phase: self.phase,
            label: format!("{}^-1", self.label),
        }
    }

    fn inverse_named(&self, label: &str) -> Self {
        Self {
            label: label.to_string(),
            ..self.inverse()
        }
    }

    pub fn apply_to(&self, state: &StateVector, atom: &str) -> Result<StateVector> {
        state.apply(&self.operator(), atom)
    }
}

/// Applies `pulses` in order to subsystem `atom`.
pub fn apply_pulses(state: &StateVector, pulses: &[PulseSpec], atom: &str) -> Result<StateVector> {
    pulses
        .iter()
        .try_fold(state.clone(), |s, p| p.apply_to(&s, atom))
}

/// Composite single-atom unitary of a pulse train.
pub fn sequence_operator(pulses: &[PulseSpec]) -> Operator {
    pulses.iter().fold(Operator::identity(ATOM_DIM), |acc, p| {
        p.operator()
            .compose(&acc)
            .expect("all pulses act on one atom")
    })
}

pub fn inverse_sequence(pulses: &[PulseSpec]) -> Vec<PulseSpec> {
    pulses.iter().rev().map(PulseSpec::inverse).collect()
}

pub fn atom_space(name: &str) -> SpaceLabel {
    SpaceLabel::single(name, ATOM_DIM).expect("non-empty atom space")
}

/// Single-atom state with the given level amplitudes (renormalized).
pub fn atom_state(name: &str, components: &[(AtomLevel, Complex64)]) -> Result<StateVector> {
    let mut amps = vec![Complex64::new(0.0, 0.0); ATOM_DIM];
    for &(level, amp) in components {
        amps[level.index()] += amp;
    }
    StateVector::new(atom_space(name), amps)
}

/// Bell state on an atom named `atom2`:
/// A± = (|c⟩ ± θ|b⟩)/√2, B± = (|d⟩ ± θ|a⟩)/√2.
pub fn bell_state(kind: BellOutcome, frame: &OscillatorFrame) -> StateVector {
    let theta = frame.theta();
    let (ground, partner, sign) = match kind {
        BellOutcome::APlus => (AtomLevel::C, AtomLevel::B, 1.0),
        BellOutcome::AMinus => (AtomLevel::C, AtomLevel::B, -1.0),
        BellOutcome::BPlus => (AtomLevel::D, AtomLevel::A, 1.0),
        BellOutcome::BMinus => (AtomLevel::D, AtomLevel::A, -1.0),
    };
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    atom_state("atom2", &[(ground, h), (partner, h * theta * sign)]).expect("non-zero Bell state")
}

/// Phase of the π/2 mapping pulses that tracks the preparation oscillator.
///
/// Under the rotation convention of [`two_level_rotation`], the pulse on
/// (u, v) sends (|u⟩ + θ|v⟩)/√2 to |u⟩ exactly when e^{iφ} = i·θ̄.
fn mapping_phase(frame: &OscillatorFrame) -> f64 {
    FRAC_PI_2 + frame.omega_m_t + frame.xi
}

/// Two π/2 pulses mapping A+ → c, A− → b, B+ → d, B− → a.
pub fn bell_map_sequence(frame: &OscillatorFrame) -> Vec<PulseSpec> {
    let phase = mapping_phase(frame);
    vec![
        PulseSpec::new((AtomLevel::C, AtomLevel::B), FRAC_PI_2, phase, "map_cb"),
        PulseSpec::new((AtomLevel::D, AtomLevel::A), FRAC_PI_2, phase, "map_da"),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedPulse {
    ShelveD,
    UnshelveD,
    SwapAc,
    SwapBd,
    SwapAb,
    PhaseFlipA,
}

impl NamedPulse {
    pub const ALL: [NamedPulse; 6] = [
        NamedPulse::ShelveD,
        NamedPulse::UnshelveD,
        NamedPulse::SwapAc,
        NamedPulse::SwapBd,
        NamedPulse::SwapAb,
        NamedPulse::PhaseFlipA,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NamedPulse::ShelveD => "shelve_d",
            NamedPulse::UnshelveD => "unshelve_d",
            NamedPulse::SwapAc => "swap_ac",
            NamedPulse::SwapBd => "swap_bd",
            NamedPulse::SwapAb => "swap_ab",
            NamedPulse::PhaseFlipA => "phase_flip_a",
        }
    }

    pub fn spec(self) -> PulseSpec {
        use AtomLevel::*;
        let (pair, area) = match self {
            NamedPulse::ShelveD => ((D, X), PI),
            NamedPulse::UnshelveD => return NamedPulse::ShelveD.spec().inverse_named("unshelve_d"),
            NamedPulse::SwapAc => ((A, C), PI),
            NamedPulse::SwapBd => ((B, D), PI),
            NamedPulse::SwapAb => ((A, B), PI),
            NamedPulse::PhaseFlipA => ((A, Z), 2.0 * PI),
        };
        PulseSpec::new(pair, area, 0.0, self.name())
    }
}

impl FromStr for NamedPulse {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPulse(s.to_string()))
    }
}

/// Looks a protocol pulse up by name.
pub fn named_pulse(name: &str) -> Result<PulseSpec> {
    Ok(name.parse::<NamedPulse>()?.spec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn level(l: AtomLevel) -> StateVector {
        atom_state("atom2", &[(l, c(1.0, 0.0))]).unwrap()
    }

    #[test]
    fn level_indices_are_fixed() {
        let names: Vec<_> = AtomLevel::ALL
            .iter()
            .map(|l| (l.index(), l.name()))
            .collect();
        assert_eq!(
            names,
            [(0, "a"), (1, "b"), (2, "c"), (3, "d"), (4, "x"), (5, "z")]
        );
    }

    #[test]
    fn message_bits() {
        let bits: Vec<_> = BellOutcome::ALL.iter().map(|o| o.message()).collect();
        assert_eq!(
            bits,
            [[false, false], [false, true], [true, false], [true, true]]
        );
        for o in BellOutcome::ALL {
            assert_eq!(BellOutcome::from_message(o.message()), o);
            assert_eq!(o.label().parse::<BellOutcome>().unwrap(), o);
        }
    }

    #[test]
    fn bell_states_at_unit_theta() {
        let frame = OscillatorFrame::new(0.0, 0.0);
        assert_eq!(frame.theta(), c(1.0, 0.0));
        let h = FRAC_1_SQRT_2;
        let a_plus = bell_state(BellOutcome::APlus, &frame);
        let expected = atom_state(
            "atom2",
            &[(AtomLevel::C, c(h, 0.0)), (AtomLevel::B, c(h, 0.0))],
        )
        .unwrap();
        assert!((a_plus.fidelity(&expected).unwrap() - 1.0).abs() < 1e-15);
        assert!((a_plus.amplitudes()[AtomLevel::B.index()] - c(h, 0.0)).norm() < 1e-15);

        let b_minus = bell_state(BellOutcome::BMinus, &frame);
        assert!((b_minus.amplitudes()[AtomLevel::D.index()] - c(h, 0.0)).norm() < 1e-15);
        assert!((b_minus.amplitudes()[AtomLevel::A.index()] - c(-h, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn bell_states_orthonormal_for_any_frame() {
        for phase in [0.0, 0.3, 1.7, -2.9] {
            let frame = OscillatorFrame::new(phase, 0.4);
            for (i, x) in BellOutcome::ALL.iter().enumerate() {
                for (j, y) in BellOutcome::ALL.iter().enumerate() {
                    let overlap = bell_state(*x, &frame)
                        .fidelity(&bell_state(*y, &frame))
                        .unwrap();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((overlap - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn bell_map_examples() {
        let frame = OscillatorFrame::new(0.8, -FRAC_PI_2);
        let seq = bell_map_sequence(&frame);
        assert_eq!(seq.len(), 2);
        assert!(seq.iter().all(|p| p.area == FRAC_PI_2));

        let out = apply_pulses(&bell_state(BellOutcome::APlus, &frame), &seq, "atom2").unwrap();
        assert!((out.fidelity(&level(AtomLevel::C)).unwrap() - 1.0).abs() < 1e-12);
        let out = apply_pulses(&bell_state(BellOutcome::BMinus, &frame), &seq, "atom2").unwrap();
        assert!((out.fidelity(&level(AtomLevel::A)).unwrap() - 1.0).abs() < 1e-12);

        let d = level(AtomLevel::D);
        let round = apply_pulses(
            &apply_pulses(&d, &seq, "atom2").unwrap(),
            &inverse_sequence(&seq),
            "atom2",
        )
        .unwrap();
        for (x, y) in round.amplitudes().iter().zip(d.amplitudes()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn named_pulse_examples() {
        let state = atom_state(
            "atom2",
            &[(AtomLevel::A, c(0.6, 0.0)), (AtomLevel::B, c(0.0, 0.8))],
        )
        .unwrap();
        let flipped = named_pulse("phase_flip_a")
            .unwrap()
            .apply_to(&state, "atom2")
            .unwrap();
        assert!((flipped.amplitudes()[0] - c(-0.6, 0.0)).norm() < 1e-12);
        assert!((flipped.amplitudes()[1] - c(0.0, 0.8)).norm() < 1e-12);

        let pair = [
            named_pulse("shelve_d").unwrap(),
            named_pulse("unshelve_d").unwrap(),
        ];
        assert!(sequence_operator(&pair).max_abs_diff(&Operator::identity(ATOM_DIM)) < 1e-12);

        let swapped = named_pulse("swap_ab")
            .unwrap()
            .apply_to(&level(AtomLevel::A), "atom2")
            .unwrap();
        assert!((swapped.fidelity(&level(AtomLevel::B)).unwrap() - 1.0).abs() < 1e-12);

        assert_eq!(
            named_pulse("teleport").unwrap_err(),
            Error::UnknownPulse("teleport".into())
        );
    }

    #[test]
    fn named_pulses_touch_only_their_pair() {
        for p in NamedPulse::ALL {
            let spec = p.spec();
            let op = spec.operator();
            assert!(op.unitarity_defect() < 1e-12);
            for l in AtomLevel::ALL {
                if l != spec.pair.0 && l != spec.pair.1 {
                    for k in 0..ATOM_DIM {
                        let want = if k == l.index() { 1.0 } else { 0.0 };
                        assert!(
                            (op.entry(k, l.index()) - c(want, 0.0)).norm() < 1e-15,
                            "{} on {l}",
                            p.name()
                        );
                    }
                }
            }
        }
    }
}
