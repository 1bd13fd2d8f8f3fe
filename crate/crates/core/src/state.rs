//! Dense state vectors, small unitaries and parameterized state families.
//!
//! Composite indices follow the row-major convention: in a product
//! `a ⊗ b ⊗ c` the first factor is the most significant digit of the
//! basis index. Every module that builds projectors relies on this.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance on `|Σ|a_k|² - 1|` accepted by [`StateVector::new`].
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Tolerance on `max |U†U - I|` accepted by [`UnitaryMatrix::new`].
pub const UNITARY_TOLERANCE: f64 = 1e-12;

/// Default central-difference step for state and probability derivatives.
pub const DEFAULT_STEP: f64 = 1e-5;

/// A normalized pure state in a finite-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
}

impl StateVector {
    /// Wraps `amplitudes`, rejecting vectors whose squared norm is not 1.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::EmptyInput("state vector has no amplitudes"));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm_sq.is_finite() || (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self {
            amplitudes: DVector::from_vec(amplitudes),
        })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized { norm_sq: norm * norm });
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    /// Computational basis state `|k⟩` of a `dim`-level system.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut amplitudes = DVector::zeros(dim);
        amplitudes[k] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn as_slice(&self) -> &[C64] {
        self.amplitudes.as_slice()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `U|self⟩`.
    pub fn evolve(&self, unitary: &UnitaryMatrix) -> Result<StateVector> {
        unitary.apply(self)
    }
}

/// A unitary matrix acting on a `dim`-level system.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    entries: DMatrix<C64>,
}

impl UnitaryMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        let defect = unitarity_defect(&entries);
        if !(defect <= UNITARY_TOLERANCE) {
            return Err(Error::NotUnitary { defect });
        }
        Ok(Self { entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        check_dim(self.dim(), state.dim())?;
        let out = &self.entries * &state.amplitudes;
        // norm is checked here, never restored
        StateVector::new(out.as_slice().to_vec())
    }
}

/// `max |U†U - I|` over all entries.
pub fn unitarity_defect(entries: &DMatrix<C64>) -> f64 {
    let n = entries.nrows();
    let product = entries.adjoint() * entries;
    let identity = DMatrix::<C64>::identity(n, n);
    (product - identity)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// A point `x = (x_1, …, x_m)` in parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPoint {
    values: Vec<f64>,
}

impl ParameterPoint {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteParameter { index });
        }
        Ok(Self { values })
    }

    pub fn two(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b])
    }

    pub fn num_params(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Copy of `self` with `delta` added to component `i`.
    pub fn shifted(&self, i: usize, delta: f64) -> Self {
        let mut values = self.values.clone();
        values[i] += delta;
        Self { values }
    }
}

/// An axis-aligned box `[lower_i, upper_i)` in parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ParamBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::EmptyInput("parameter box has no axes"));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidArgument(format!(
                    "axis {i} has empty or non-finite range [{lo}, {hi})"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn num_params(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &ParameterPoint) -> bool {
        x.num_params() == self.num_params()
            && x
                .values()
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| v >= lo && v < hi)
    }

    /// Uniform draw from the box.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ParameterPoint {
        let values = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>())
            .collect();
        ParameterPoint { values }
    }
}

/// How a family's Jacobian is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    CentralDifference { step: f64 },
}

impl Default for DerivativeMode {
    fn default() -> Self {
        DerivativeMode::CentralDifference { step: DEFAULT_STEP }
    }
}

/// A smooth map `x ↦ |ψ_x⟩`.
///
/// Implementations must return amplitudes as a deterministic function of
/// `x`; derivative columns are taken in that gauge without any per-call
/// phase fixing.
pub trait StateFamily: Send + Sync {
    fn dim(&self) -> usize;

    fn num_params(&self) -> usize;

    fn evaluate(&self, x: &ParameterPoint) -> Result<StateVector>;

    fn derivative_mode(&self) -> DerivativeMode {
        DerivativeMode::default()
    }

    /// Closed-form `∂|ψ⟩/∂x_i` columns, if the family has them.
    fn analytic_jacobian(&self, _x: &ParameterPoint) -> Option<Result<Vec<DVector<C64>>>> {
        None
    }

    /// Region outside which the family is undefined. Central differences
    /// switch to one-sided stencils within one step of its edges.
    fn domain(&self) -> Option<ParamBox> {
        None
    }

    fn param_names(&self) -> Vec<String> {
        (1..=self.num_params()).map(|i| format!("x{i}")).collect()
    }
}

/// Derivative columns `∂|ψ_x⟩/∂x_i` together with the base state `|ψ_x⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateJacobian {
    base: StateVector,
    columns: Vec<DVector<C64>>,
}

impl StateJacobian {
    pub fn new(base: StateVector, columns: Vec<DVector<C64>>) -> Result<Self> {
        for (i, col) in columns.iter().enumerate() {
            check_dim(base.dim(), col.len())?;
            if col.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::DerivativeFailure { column: i });
            }
        }
        Ok(Self { base, columns })
    }

    pub fn base(&self) -> &StateVector {
        &self.base
    }

    pub fn columns(&self) -> &[DVector<C64>] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &DVector<C64> {
        &self.columns[i]
    }

    pub fn num_params(&self) -> usize {
        self.columns.len()
    }

    /// `max_i |Re⟨ψ|∂_iψ⟩|`; zero for an exactly normalized family.
    pub fn normalization_defect(&self) -> f64 {
        self.columns
            .iter()
            .map(|c| self.base.amplitudes().dotc(c).re.abs())
            .fold(0.0, f64::max)
    }
}

/// The qubit rotation `U(θ, φ) = [[cos θ/2, -e^{-iφ} sin θ/2], [e^{iφ} sin θ/2, cos θ/2]]`.
pub fn qubit_unitary(theta: f64, phi: f64) -> UnitaryMatrix {
    let (s, c) = (theta / 2.0).sin_cos();
    let phase = C64::from_polar(1.0, phi);
    let entries = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(c, 0.0),
            -phase.conj() * s,
            phase * s,
            C64::new(c, 0.0),
        ],
    );
    UnitaryMatrix { entries }
}

/// Kronecker product of raw amplitude vectors, first factor most significant.
pub(crate) fn kron_vectors<'a, I>(factors: I) -> DVector<C64>
where
    I: IntoIterator<Item = &'a DVector<C64>>,
{
    let mut out = DVector::from_element(1, C64::new(1.0, 0.0));
    for factor in factors {
        let mut next = DVector::zeros(out.len() * factor.len());
        for (i, a) in out.iter().enumerate() {
            for (j, b) in factor.iter().enumerate() {
                next[i * factor.len() + j] = a * b;
            }
        }
        out = next;
    }
    out
}

/// `|s_1⟩ ⊗ |s_2⟩ ⊗ …` in row-major index order.
pub fn tensor_product(states: &[StateVector]) -> Result<StateVector> {
    if states.is_empty() {
        return Err(Error::EmptyInput("tensor product of zero states"));
    }
    let product = kron_vectors(states.iter().map(|s| s.amplitudes()));
    StateVector::new(product.as_slice().to_vec())
}

/// Jacobian of `family` at `x` using the family's own derivative mode.
pub fn derivatives(family: &dyn StateFamily, x: &ParameterPoint) -> Result<StateJacobian> {
    derivatives_with(family, x, family.derivative_mode())
}

/// Jacobian of `family` at `x` using an explicit derivative mode.
pub fn derivatives_with(
    family: &dyn StateFamily,
    x: &ParameterPoint,
    mode: DerivativeMode,
) -> Result<StateJacobian> {
    check_dim(family.num_params(), x.num_params())?;
    let base = family.evaluate(x)?;
    let columns = match mode {
        DerivativeMode::Analytic => family.analytic_jacobian(x).ok_or_else(|| {
            Error::InvalidArgument("family has no analytic Jacobian".into())
        })??,
        DerivativeMode::CentralDifference { step } => {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::InvalidArgument(format!("step {step} must be positive")));
            }
            let domain = family.domain();
            (0..x.num_params())
                .map(|i| finite_difference_column(family, x, &base, i, step, domain.as_ref()))
                .collect::<Result<Vec<_>>>()?
        }
    };
    if columns.len() != x.num_params() {
        return Err(Error::DimensionMismatch {
            expected: x.num_params(),
            got: columns.len(),
        });
    }
    StateJacobian::new(base, columns)
}

fn finite_difference_column(
    family: &dyn StateFamily,
    x: &ParameterPoint,
    base: &StateVector,
    i: usize,
    h: f64,
    domain: Option<&ParamBox>,
) -> Result<DVector<C64>> {
    let eval = |delta: f64| -> Result<DVector<C64>> {
        Ok(family.evaluate(&x.shifted(i, delta))?.amplitudes().clone())
    };
    let near_lower = domain.is_some_and(|d| x.get(i) - h < d.lower()[i]);
    let near_upper = domain.is_some_and(|d| x.get(i) + h >= d.upper()[i]);
    let f0 = base.amplitudes();
    let k = |v: f64| C64::new(v, 0.0);
    let inv = k(1.0 / (2.0 * h));
    let column = match (near_lower, near_upper) {
        // second-order one-sided stencils
        (true, false) => (eval(h)? * k(4.0) - f0 * k(3.0) - eval(2.0 * h)?) * inv,
        (false, true) => (f0 * k(3.0) - eval(-h)? * k(4.0) + eval(-2.0 * h)?) * inv,
        _ => (eval(h)? - eval(-h)?) * inv,
    };
    if column.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::DerivativeFailure { column: i });
    }
    Ok(column)
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Single qubit `|n⟩ = U(θ, φ)|0⟩` parameterized by `(θ, φ)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct QubitFamily {
    pub mode: Option<DerivativeMode>,
}

impl QubitFamily {
    pub fn analytic() -> Self {
        Self {
            mode: Some(DerivativeMode::Analytic),
        }
    }

    pub fn finite_difference(step: f64) -> Self {
        Self {
            mode: Some(DerivativeMode::CentralDifference { step }),
        }
    }
}

impl StateFamily for QubitFamily {
    fn dim(&self) -> usize {
        2
    }

    fn num_params(&self) -> usize {
        2
    }

    fn evaluate(&self, x: &ParameterPoint) -> Result<StateVector> {
        check_dim(2, x.num_params())?;
        let (s, c) = (x.get(0) / 2.0).sin_cos();
        Ok(StateVector {
            amplitudes: DVector::from_vec(vec![
                C64::new(c, 0.0),
                C64::from_polar(s, x.get(1)),
            ]),
        })
    }

    fn derivative_mode(&self) -> DerivativeMode {
        self.mode.unwrap_or(DerivativeMode::Analytic)
    }

    fn analytic_jacobian(&self, x: &ParameterPoint) -> Option<Result<Vec<DVector<C64>>>> {
        if x.num_params() != 2 {
            return Some(Err(Error::DimensionMismatch {
                expected: 2,
                got: x.num_params(),
            }));
        }
        let (s, c) = (x.get(0) / 2.0).sin_cos();
        let phase = C64::from_polar(1.0, x.get(1));
        let d_theta = DVector::from_vec(vec![C64::new(-s / 2.0, 0.0), phase * (c / 2.0)]);
        let d_phi = DVector::from_vec(vec![C64::new(0.0, 0.0), C64::i() * phase * s]);
        Some(Ok(vec![d_theta, d_phi]))
    }

    fn param_names(&self) -> Vec<String> {
        vec!["theta".into(), "phi".into()]
    }
}

/// A family that ignores its parameters.
#[derive(Debug, Clone)]
pub struct ConstantFamily {
    pub state: StateVector,
    pub num_params: usize,
}

impl StateFamily for ConstantFamily {
    fn dim(&self) -> usize {
        self.state.dim()
    }

    fn num_params(&self) -> usize {
        self.num_params
    }

    fn evaluate(&self, x: &ParameterPoint) -> Result<StateVector> {
        check_dim(self.num_params, x.num_params())?;
        Ok(self.state.clone())
    }
}
