//! Exact complex linear algebra over labelled composite qudit spaces.
//!
//! Amplitudes are stored densely in row-major order: the first subsystem of a
//! [`SpaceLabel`] is the most significant digit of the flat index.

use num_complex::Complex64;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};

/// Tolerance used for exact-arithmetic checks on unit-norm states.
pub const EXACT_TOL: f64 = 1e-12;

/// A forced measurement branch whose probability does not exceed this is
/// rejected.
pub const FORCED_BRANCH_TOL: f64 = 1e-15;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subsystem {
    pub name: String,
    pub dim: usize,
}

/// Ordered list of named subsystems making up a composite space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceLabel {
    subsystems: Vec<Subsystem>,
}

impl SpaceLabel {
    pub fn new<I, S>(subsystems: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut out: Vec<Subsystem> = Vec::new();
        for (name, dim) in subsystems {
            let name = name.into();
            if dim == 0 {
                return Err(Error::EmptySubsystem(name));
            }
            if out.iter().any(|s| s.name == name) {
                return Err(Error::NameCollision(name));
            }
            out.push(Subsystem { name, dim });
        }
        if out.is_empty() {
            return Err(Error::InvalidParameter(
                "space needs at least one subsystem".into(),
            ));
        }
        Ok(Self { subsystems: out })
    }

    pub fn single(name: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new([(name.into(), dim)])
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::UnknownSubsystem(name.to_string()))
    }

    pub fn dim_of(&self, name: &str) -> Result<usize> {
        Ok(self.subsystems[self.position(name)?].dim)
    }

    /// Flat-index distance between consecutive levels of the subsystem at `pos`.
    fn stride(&self, pos: usize) -> usize {
        self.subsystems[pos + 1..].iter().map(|s| s.dim).product()
    }

    /// `self` followed by `other`; names must be disjoint.
    pub fn concat(&self, other: &SpaceLabel) -> Result<Self> {
        Self::new(
            self.subsystems
                .iter()
                .chain(other.subsystems.iter())
                .map(|s| (s.name.clone(), s.dim)),
        )
    }

    fn without(&self, pos: usize) -> Result<Self> {
        Self::new(
            self.subsystems
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != pos)
                .map(|(_, s)| (s.name.clone(), s.dim)),
        )
    }

    /// Flat index of a multi-index given as one level per subsystem.
    pub fn index_of(&self, levels: &[usize]) -> Result<usize> {
        if levels.len() != self.subsystems.len() {
            return Err(Error::DimensionMismatch {
                expected: self.subsystems.len(),
                actual: levels.len(),
            });
        }
        let mut idx = 0;
        for (&level, sub) in levels.iter().zip(&self.subsystems) {
            if level >= sub.dim {
                return Err(Error::LevelOutOfRange {
                    index: level,
                    dim: sub.dim,
                });
            }
            idx = idx * sub.dim + level;
        }
        Ok(idx)
    }
}

/// Normalized pure state on a [`SpaceLabel`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: SpaceLabel,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Builds a normalized copy of `amplitudes`.
    pub fn new(space: SpaceLabel, amplitudes: Vec<Complex64>) -> Result<Self> {
        let expected = space.total_dim();
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: amplitudes.len(),
            });
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(Self { space, amplitudes })
    }

    /// Computational basis state at flat index `index`.
    pub fn basis(space: SpaceLabel, index: usize) -> Result<Self> {
        let dim = space.total_dim();
        if index >= dim {
            return Err(Error::LevelOutOfRange { index, dim });
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self { space, amplitudes })
    }

    pub fn space(&self) -> &SpaceLabel {
        &self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, levels: &[usize]) -> Result<Complex64> {
        Ok(self.amplitudes[self.space.index_of(levels)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Tensor product; subsystems of `self` come first.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let space = self.space.concat(&other.space)?;
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|&a| other.amplitudes.iter().map(move |&b| a * b))
            .collect();
        Ok(Self { space, amplitudes })
    }

    /// Applies `op` to subsystem `target`, identity elsewhere.
    pub fn apply(&self, op: &Operator, target: &str) -> Result<Self> {
        let pos = self.space.position(target)?;
        let dim = self.space.subsystems[pos].dim;
        if op.dim != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: op.dim,
            });
        }
        let stride = self.space.stride(pos);
        let block = stride * dim;
        let mut out = vec![ZERO; self.amplitudes.len()];
        let mut column = vec![ZERO; dim];
        for outer in (0..self.amplitudes.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (k, c) in column.iter_mut().enumerate() {
                    *c = self.amplitudes[base + k * stride];
                }
                for row in 0..dim {
                    out[base + row * stride] =
                        (0..dim).map(|k| op.matrix[row * dim + k] * column[k]).sum();
                }
            }
        }
        Ok(Self {
            space: self.space.clone(),
            amplitudes: out,
        })
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch);
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// |⟨self|other⟩|², insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().min(1.0))
    }

    /// Reduced populations of every level of subsystem `target`.
    pub fn level_populations(&self, target: &str) -> Result<Vec<f64>> {
        let pos = self.space.position(target)?;
        let dim = self.space.subsystems[pos].dim;
        let stride = self.space.stride(pos);
        let mut pops = vec![0.0; dim];
        for (i, a) in self.amplitudes.iter().enumerate() {
            pops[(i / stride) % dim] += a.norm_sqr();
        }
        Ok(pops)
    }

    /// Splits off `target` when the state is a product of a single level of
    /// `target` with the rest. Returns that level and the remaining state.
    pub fn factor_out(&self, target: &str) -> Result<(usize, StateVector)> {
        let pos = self.space.position(target)?;
        let pops = self.level_populations(target)?;
        let (level, &weight) = pops
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("subsystem dimension is positive");
        if (1.0 - weight) > EXACT_TOL * 10.0 {
            return Err(Error::Precondition(format!(
                "subsystem `{target}` is not in a single level (max population {weight})"
            )));
        }
        let dim = self.space.subsystems[pos].dim;
        let stride = self.space.stride(pos);
        let rest: Vec<Complex64> = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| (i / stride) % dim == level)
            .map(|(_, &a)| a)
            .collect();
        let space = self.space.without(pos)?;
        Ok((level, StateVector::new(space, rest)?))
    }

    /// Projective two-outcome measurement of whether `target` lies in `levels`.
    pub fn measure(
        &self,
        target: &str,
        levels: &[usize],
        branch: Branch<'_>,
    ) -> Result<Measurement> {
        if levels.is_empty() {
            return Err(Error::EmptyLevelSet);
        }
        let pos = self.space.position(target)?;
        let dim = self.space.subsystems[pos].dim;
        if let Some(&bad) = levels.iter().find(|&&l| l >= dim) {
            return Err(Error::LevelOutOfRange { index: bad, dim });
        }
        let mut inside = vec![false; dim];
        for &l in levels {
            inside[l] = true;
        }
        let stride = self.space.stride(pos);
        let p_in: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| inside[(i / stride) % dim])
            .map(|(_, a)| a.norm_sqr())
            .sum::<f64>()
            .clamp(0.0, 1.0);

        let outcome = match branch {
            Branch::Forced(o) => o,
            Branch::Sampled(rng) => {
                if rng.random::<f64>() < p_in {
                    ProbeOutcome::In
                } else {
                    ProbeOutcome::Out
                }
            }
        };
        let probability = match outcome {
            ProbeOutcome::In => p_in,
            ProbeOutcome::Out => 1.0 - p_in,
        };
        if probability <= FORCED_BRANCH_TOL {
            return Err(Error::ZeroProbabilityBranch(probability));
        }
        let keep = outcome == ProbeOutcome::In;
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                if inside[(i / stride) % dim] == keep {
                    a
                } else {
                    ZERO
                }
            })
            .collect();
        let collapsed = StateVector::new(self.space.clone(), amplitudes)?;
        Ok(Measurement {
            outcome,
            probability,
            collapsed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProbeOutcome {
    In,
    Out,
}

/// How a measurement selects its outcome.
pub enum Branch<'a> {
    /// Draw the outcome by the Born rule from the given stream.
    Sampled(&'a mut dyn RngCore),
    /// Post-select the given outcome.
    Forced(ProbeOutcome),
}

#[derive(Debug, Clone)]
pub struct Measurement {
    pub outcome: ProbeOutcome,
    pub probability: f64,
    pub collapsed: StateVector,
}

/// Square matrix acting on a single subsystem, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    matrix: Vec<Complex64>,
}

impl Operator {
    pub fn identity(dim: usize) -> Self {
        let mut matrix = vec![ZERO; dim * dim];
        for i in 0..dim {
            matrix[i * dim + i] = ONE;
        }
        Self { dim, matrix }
    }

    pub fn from_rows(dim: usize, matrix: Vec<Complex64>) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: matrix.len(),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut matrix = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                matrix[c * n + r] = self.matrix[r * n + c].conj();
            }
        }
        Self { dim: n, matrix }
    }

    /// Matrix product `self · rhs`, i.e. `rhs` acts first.
    pub fn compose(&self, rhs: &Operator) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: rhs.dim,
            });
        }
        let n = self.dim;
        let mut matrix = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                matrix[r * n + c] = (0..n)
                    .map(|k| self.matrix[r * n + k] * rhs.matrix[k * n + c])
                    .sum();
            }
        }
        Ok(Self { dim: n, matrix })
    }

    /// Largest elementwise difference to `other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.matrix
            .iter()
            .zip(&other.matrix)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// ‖U†U − I‖_max.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint()
            .compose(self)
            .expect("same dimension")
            .max_abs_diff(&Operator::identity(self.dim))
    }
}

/// Two-level rotation between levels `u` and `v` of a `dim`-level system.
///
/// With `s = sin(area/2)` and `c = cos(area/2)`:
/// `|u⟩ → c|u⟩ − i·e^{−i·phase}·s|v⟩` and `|v⟩ → −i·e^{i·phase}·s|u⟩ + c|v⟩`.
/// All other levels are left untouched.
pub fn two_level_rotation(
    dim: usize,
    u: usize,
    v: usize,
    area: f64,
    phase: f64,
) -> Result<Operator> {
    for idx in [u, v] {
        if idx >= dim {
            return Err(Error::LevelOutOfRange { index: idx, dim });
        }
    }
    if u == v {
        return Err(Error::EqualLevels(u));
    }
    let (s, c) = (area / 2.0).sin_cos();
    let minus_i = Complex64::new(0.0, -1.0);
    let mut op = Operator::identity(dim);
    let n = dim;
    op.matrix[u * n + u] = Complex64::new(c, 0.0);
    op.matrix[v * n + v] = Complex64::new(c, 0.0);
    op.matrix[v * n + u] = minus_i * Complex64::from_polar(s, -phase);
    op.matrix[u * n + v] = minus_i * Complex64::from_polar(s, phase);
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn qubit() -> SpaceLabel {
        SpaceLabel::single("q", 2).unwrap()
    }

    #[test]
    fn make_state_normalizes() {
        let s = StateVector::new(qubit(), vec![c(2.0, 0.0), ZERO]).unwrap();
        assert_eq!(s.amplitudes(), &[ONE, ZERO]);

        let four = SpaceLabel::single("q", 4).unwrap();
        let s = StateVector::new(four, vec![ONE; 4]).unwrap();
        for a in s.amplitudes() {
            assert!((a - c(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn make_state_errors() {
        assert_eq!(
            StateVector::new(qubit(), vec![ONE]).unwrap_err(),
            Error::DimensionMismatch {
                expected: 2,
                actual: 1
            }
        );
        assert_eq!(
            StateVector::new(qubit(), vec![ZERO, ZERO]).unwrap_err(),
            Error::ZeroVector
        );
    }

    #[test]
    fn space_rejects_duplicate_names() {
        assert!(matches!(
            SpaceLabel::new([("a", 2), ("a", 3)]),
            Err(Error::NameCollision(_))
        ));
        let s = SpaceLabel::new([("a", 2), ("b", 3)]).unwrap();
        assert_eq!(s.total_dim(), 6);
    }

    #[test]
    fn tensor_orders_first_operand_first() {
        let zero = StateVector::basis(SpaceLabel::single("x", 2).unwrap(), 0).unwrap();
        let one = StateVector::basis(SpaceLabel::single("y", 2).unwrap(), 1).unwrap();
        let t = zero.tensor(&one).unwrap();
        assert_eq!(t.amplitude(&[0, 1]).unwrap(), ONE);
        assert_eq!(t.norm_sqr(), 1.0);

        let (al, be) = (c(0.6, 0.0), c(0.0, 0.8));
        let sup = StateVector::new(SpaceLabel::single("x", 2).unwrap(), vec![al, be]).unwrap();
        let y0 = StateVector::basis(SpaceLabel::single("y", 2).unwrap(), 0).unwrap();
        let t = sup.tensor(&y0).unwrap();
        assert_eq!(t.amplitudes(), &[al, ZERO, be, ZERO]);

        assert!(matches!(zero.tensor(&zero), Err(Error::NameCollision(_))));
    }

    #[test]
    fn rotation_special_areas() {
        let id = two_level_rotation(3, 0, 2, 0.0, 1.3).unwrap();
        assert!(id.max_abs_diff(&Operator::identity(3)) < 1e-15);

        let full = two_level_rotation(3, 0, 2, 2.0 * PI, 0.7).unwrap();
        assert!((full.entry(0, 0) + ONE).norm() < 1e-15);
        assert!((full.entry(2, 2) + ONE).norm() < 1e-15);
        assert_eq!(full.entry(1, 1), ONE);
        assert!(full.entry(0, 2).norm() < 1e-15);
    }

    #[test]
    fn rotation_errors() {
        assert_eq!(
            two_level_rotation(2, 0, 2, 1.0, 0.0).unwrap_err(),
            Error::LevelOutOfRange { index: 2, dim: 2 }
        );
        assert_eq!(
            two_level_rotation(2, 1, 1, 1.0, 0.0).unwrap_err(),
            Error::EqualLevels(1)
        );
    }

    #[test]
    fn half_pulse_maps_phased_superposition_to_lower_level() {
        // (|u⟩ + e^{iχ}|v⟩)/√2 → |u⟩ when the pulse phase is π/2 − χ.
        for chi in [0.0, 0.4, -2.1, PI] {
            let s = StateVector::new(qubit(), vec![ONE, Complex64::from_polar(1.0, chi)]).unwrap();
            let op = two_level_rotation(2, 0, 1, PI / 2.0, PI / 2.0 - chi).unwrap();
            let out = s.apply(&op, "q").unwrap();
            let target = StateVector::basis(qubit(), 0).unwrap();
            assert!(
                (out.fidelity(&target).unwrap() - 1.0).abs() < 1e-12,
                "chi={chi}"
            );
        }
    }

    #[test]
    fn apply_examples() {
        let s = StateVector::new(
            SpaceLabel::single("q", 4).unwrap(),
            vec![c(0.5, 0.1), c(0.2, -0.3), ZERO, ZERO],
        )
        .unwrap();
        assert_eq!(s.apply(&Operator::identity(4), "q").unwrap(), s);

        let full = two_level_rotation(4, 2, 3, 2.0 * PI, 0.3).unwrap();
        assert_eq!(s.apply(&full, "q").unwrap(), s);

        let flip = two_level_rotation(2, 0, 1, PI, 0.9).unwrap();
        let out = StateVector::basis(qubit(), 0)
            .unwrap()
            .apply(&flip, "q")
            .unwrap();
        assert!((out.amplitudes()[1].norm_sqr() - 1.0).abs() < 1e-12);

        assert!(matches!(
            s.apply(&flip, "q"),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            s.apply(&full, "nope"),
            Err(Error::UnknownSubsystem(_))
        ));
    }

    #[test]
    fn apply_targets_correct_subsystem() {
        let space = SpaceLabel::new([("a", 2), ("b", 3)]).unwrap();
        let s = StateVector::basis(space, 0).unwrap();
        let op = two_level_rotation(3, 0, 2, PI, 0.0).unwrap();
        let out = s.apply(&op, "b").unwrap();
        assert!((out.amplitude(&[0, 2]).unwrap().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn measure_examples() {
        let c_state = StateVector::basis(qubit(), 0).unwrap();
        let m = c_state
            .measure("q", &[0], Branch::Forced(ProbeOutcome::In))
            .unwrap();
        assert_eq!((m.outcome, m.probability), (ProbeOutcome::In, 1.0));
        assert_eq!(m.collapsed, c_state);

        let plus = StateVector::new(qubit(), vec![ONE, ONE]).unwrap();
        let m = plus
            .measure("q", &[0], Branch::Forced(ProbeOutcome::In))
            .unwrap();
        assert!((m.probability - 0.5).abs() < 1e-15);
        assert!((m.collapsed.fidelity(&c_state).unwrap() - 1.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = c_state
            .measure("q", &[0], Branch::Sampled(&mut rng))
            .unwrap();
        assert_eq!(m.outcome, ProbeOutcome::In);
    }

    #[test]
    fn measure_errors() {
        let c_state = StateVector::basis(qubit(), 0).unwrap();
        assert_eq!(
            c_state
                .measure("q", &[], Branch::Forced(ProbeOutcome::In))
                .unwrap_err(),
            Error::EmptyLevelSet
        );
        assert!(matches!(
            c_state.measure("q", &[1], Branch::Forced(ProbeOutcome::In)),
            Err(Error::ZeroProbabilityBranch(_))
        ));
    }

    #[test]
    fn factor_out_product_state() {
        let a = StateVector::basis(SpaceLabel::single("a", 3).unwrap(), 2).unwrap();
        let b = StateVector::new(
            SpaceLabel::single("b", 2).unwrap(),
            vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)],
        )
        .unwrap();
        let (level, rest) = a.tensor(&b).unwrap().factor_out("a").unwrap();
        assert_eq!(level, 2);
        assert!((rest.fidelity(&b).unwrap() - 1.0).abs() < 1e-15);

        let entangled = StateVector::new(
            SpaceLabel::new([("a", 2), ("b", 2)]).unwrap(),
            vec![ONE, ZERO, ZERO, ONE],
        )
        .unwrap();
        assert!(matches!(
            entangled.factor_out("a"),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn fidelity_examples() {
        let psi = StateVector::new(qubit(), vec![c(0.3, 0.4), c(0.5, -0.1)]).unwrap();
        assert!((psi.fidelity(&psi).unwrap() - 1.0).abs() < 1e-15);
        let rotated = StateVector::new(
            qubit(),
            psi.amplitudes()
                .iter()
                .map(|a| a * Complex64::from_polar(1.0, 2.2))
                .collect(),
        )
        .unwrap();
        assert!((psi.fidelity(&rotated).unwrap() - 1.0).abs() < 1e-14);
        let zero = StateVector::basis(qubit(), 0).unwrap();
        let one = StateVector::basis(qubit(), 1).unwrap();
        assert_eq!(zero.fidelity(&one).unwrap(), 0.0);

        let other = StateVector::basis(SpaceLabel::single("r", 2).unwrap(), 0).unwrap();
        assert_eq!(zero.fidelity(&other).unwrap_err(), Error::SpaceMismatch);
    }
}
