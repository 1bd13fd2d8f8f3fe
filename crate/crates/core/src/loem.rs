//! Orthogonal probe sets, product states `U(x)^{⊗d}(|ψ_0⟩ ⊗ … ⊗ |ψ_{d-1}⟩)`,
//! the four-port entangling measurement and its outcome probabilities.
//!
//! For qubits the probes are `|0⟩, |1⟩` and the encoded state is the
//! antiparallel pair `U(Nθ, Nφ)|0⟩ ⊗ U(Nθ, Nφ)|1⟩`. Measuring it in the
//! basis `|01⟩, |10⟩, Φ⁺, Φ⁻` (ports 1 to 4, in that order) gives
//!
//! ```text
//! P1 = cos⁴(Nθ/2)          P2 = sin⁴(Nθ/2)
//! P3 = sin²(Nθ) sin²(Nφ)/2  P4 = sin²(Nθ) cos²(Nφ)/2
//! ```

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::information::{InfoKind, InfoMatrix};
use crate::state::{
    check_dim, kron_vectors, qubit_unitary, DerivativeMode, ParameterPoint, StateFamily, StateVector,
    UnitaryMatrix, C64,
};

pub const ORTHONORMAL_TOLERANCE: f64 = 1e-12;

/// Largest probe dimension accepted by [`orthogonal_probes`] (`6^6 = 46656`).
pub const MAX_PROBE_DIM: usize = 6;

/// Output port names in measurement order.
pub const PORT_LABELS: [&str; 4] = ["01", "10", "phi_plus", "phi_minus"];

/// A complete orthonormal set of `d` probe states in `C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalProbeSet {
    probes: Vec<StateVector>,
}

impl OrthogonalProbeSet {
    pub fn new(probes: Vec<StateVector>) -> Result<Self> {
        let d = probes.first().map(StateVector::dim).ok_or(Error::EmptyInput("probe set"))?;
        check_dim(d, probes.len())?;
        for p in &probes {
            check_dim(d, p.dim())?;
        }
        let defect = gram_defect(&probes);
        if defect > ORTHONORMAL_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "probes are not orthonormal (max |<i|j> - δ_ij| = {defect:e})"
            )));
        }
        Ok(Self { probes })
    }

    pub fn dim(&self) -> usize {
        self.probes.len()
    }

    pub fn probes(&self) -> &[StateVector] {
        &self.probes
    }
}

fn gram_defect(vectors: &[StateVector]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            let g = a.amplitudes().dotc(b.amplitudes());
            worst = worst.max((g - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Computational basis `|0⟩, …, |d-1⟩` of `C^d`.
pub fn orthogonal_probes(d: usize) -> Result<OrthogonalProbeSet> {
    if !(2..=MAX_PROBE_DIM).contains(&d) {
        return Err(Error::DimensionOutOfRange(d));
    }
    OrthogonalProbeSet::new((0..d).map(|k| StateVector::basis(d, k)).collect())
}

/// A complete orthonormal measurement basis `{|k⟩}` with `E_k = |k⟩⟨k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglingBasis {
    vectors: Vec<StateVector>,
}

impl EntanglingBasis {
    pub fn new(vectors: Vec<StateVector>) -> Result<Self> {
        let dim = vectors.first().map(StateVector::dim).ok_or(Error::EmptyInput("basis"))?;
        check_dim(dim, vectors.len())?;
        for v in &vectors {
            check_dim(dim, v.dim())?;
        }
        let mut resolution = DMatrix::<C64>::zeros(dim, dim);
        for v in &vectors {
            resolution += v.amplitudes() * v.amplitudes().adjoint();
        }
        let defect = (resolution - DMatrix::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if defect > ORTHONORMAL_TOLERANCE || gram_defect(&vectors) > ORTHONORMAL_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "basis is not orthonormal and complete (defect {defect:e})"
            )));
        }
        Ok(Self { vectors })
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }
}

/// Outcome probabilities `P(k|x)` of a projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        if let Some(k) = probs.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidDistribution(format!(
                "outcome {k} has probability {}",
                probs[k]
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

/// A smooth map `x ↦ U(x)` on `C^d`.
pub trait UnitaryFamily: Send + Sync {
    fn dim(&self) -> usize;

    fn num_params(&self) -> usize;

    fn unitary(&self, x: &ParameterPoint) -> Result<UnitaryMatrix>;

    /// `∂U/∂x_k` for every parameter, when available in closed form.
    fn unitary_derivatives(&self, _x: &ParameterPoint) -> Option<Result<Vec<DMatrix<C64>>>> {
        None
    }

    fn param_names(&self) -> Vec<String> {
        (1..=self.num_params()).map(|i| format!("x{i}")).collect()
    }
}

/// `U(Nθ, Nφ)` acting on one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitRotation {
    pub n_iter: u32,
}

impl Default for QubitRotation {
    fn default() -> Self {
        Self { n_iter: 1 }
    }
}

impl UnitaryFamily for QubitRotation {
    fn dim(&self) -> usize {
        2
    }

    fn num_params(&self) -> usize {
        2
    }

    fn unitary(&self, x: &ParameterPoint) -> Result<UnitaryMatrix> {
        check_dim(2, x.num_params())?;
        let n = self.n_iter as f64;
        Ok(qubit_unitary(n * x.get(0), n * x.get(1)))
    }

    fn unitary_derivatives(&self, x: &ParameterPoint) -> Option<Result<Vec<DMatrix<C64>>>> {
        if let Err(e) = check_dim(2, x.num_params()) {
            return Some(Err(e));
        }
        let n = self.n_iter as f64;
        let (s, c) = (n * x.get(0) / 2.0).sin_cos();
        let phase = C64::from_polar(1.0, n * x.get(1));
        let half_n = 0.5 * n;
        let d_theta = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(-s * half_n, 0.0),
                -phase.conj() * (c * half_n),
                phase * (c * half_n),
                C64::new(-s * half_n, 0.0),
            ],
        );
        let d_phi = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::i() * phase.conj() * (s * n),
                C64::i() * phase * (s * n),
                C64::new(0.0, 0.0),
            ],
        );
        Some(Ok(vec![d_theta, d_phi]))
    }

    fn param_names(&self) -> Vec<String> {
        vec!["theta".into(), "phi".into()]
    }
}

/// `U(x) = exp(−i Σ_k x_k G_k)` for Hermitian generators `G_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorFamily {
    generators: Vec<DMatrix<C64>>,
}

impl GeneratorFamily {
    pub fn new(generators: Vec<DMatrix<C64>>) -> Result<Self> {
        let d = generators
            .first()
            .map(|g| g.nrows())
            .ok_or(Error::EmptyInput("generator family"))?;
        for g in &generators {
            check_dim(d, g.nrows())?;
            check_dim(d, g.ncols())?;
            let asymmetry = (g - g.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if asymmetry > 1e-12 {
                return Err(Error::NotSymmetric { asymmetry });
            }
        }
        Ok(Self { generators })
    }

    /// `m` random Hermitian generators on `C^d`, each rescaled to unit
    /// spectral radius.
    pub fn random<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Self {
        let generators = (0..m)
            .map(|_| {
                let a = DMatrix::<C64>::from_fn(d, d, |_, _| {
                    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
                });
                let h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
                let radius = SymmetricEigen::new(h.clone())
                    .eigenvalues
                    .iter()
                    .fold(0.0f64, |acc, v| acc.max(v.abs()));
                h / C64::new(radius.max(f64::MIN_POSITIVE), 0.0)
            })
            .collect();
        Self { generators }
    }

    pub fn generators(&self) -> &[DMatrix<C64>] {
        &self.generators
    }

    fn hamiltonian(&self, x: &ParameterPoint) -> Result<DMatrix<C64>> {
        check_dim(self.generators.len(), x.num_params())?;
        let d = self.generators[0].nrows();
        Ok(self
            .generators
            .iter()
            .zip(x.values())
            .fold(DMatrix::zeros(d, d), |acc, (g, &v)| acc + g * C64::new(v, 0.0)))
    }
}

/// Divided difference of `λ ↦ e^{-iλ}`.
fn exp_divided_difference(a: f64, b: f64) -> C64 {
    let gap = a - b;
    if gap.abs() < 1e-9 {
        -C64::i() * C64::from_polar(1.0, -0.5 * (a + b))
    } else {
        (C64::from_polar(1.0, -a) - C64::from_polar(1.0, -b)) / gap
    }
}

impl UnitaryFamily for GeneratorFamily {
    fn dim(&self) -> usize {
        self.generators[0].nrows()
    }

    fn num_params(&self) -> usize {
        self.generators.len()
    }

    fn unitary(&self, x: &ParameterPoint) -> Result<UnitaryMatrix> {
        let eig = SymmetricEigen::new(self.hamiltonian(x)?);
        let v = &eig.eigenvectors;
        let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, -l)));
        UnitaryMatrix::new(v * phases * v.adjoint())
    }

    fn unitary_derivatives(&self, x: &ParameterPoint) -> Option<Result<Vec<DMatrix<C64>>>> {
        let h = match self.hamiltonian(x) {
            Ok(h) => h,
            Err(e) => return Some(Err(e)),
        };
        let eig = SymmetricEigen::new(h);
        let v = &eig.eigenvectors;
        let lambda = &eig.eigenvalues;
        let d = lambda.len();
        let kernel = DMatrix::from_fn(d, d, |a, b| exp_divided_difference(lambda[a], lambda[b]));
        Some(Ok(self
            .generators
            .iter()
            .map(|g| {
                let rotated = v.adjoint() * g * v;
                v * rotated.component_mul(&kernel) * v.adjoint()
            })
            .collect()))
    }
}

/// `|Ψ_x⟩ = U(x)^{⊗d} (|ψ_0⟩ ⊗ … ⊗ |ψ_{d-1}⟩)`.
pub fn loem_state(
    unitary_family: &dyn UnitaryFamily,
    x: &ParameterPoint,
    probes: &OrthogonalProbeSet,
) -> Result<StateVector> {
    product_state(unitary_family, x, probes.probes())
}

fn product_state(
    unitary_family: &dyn UnitaryFamily,
    x: &ParameterPoint,
    probes: &[StateVector],
) -> Result<StateVector> {
    check_dim(unitary_family.dim(), probes[0].dim())?;
    let u = unitary_family.unitary(x)?;
    let factors = probes.iter().map(|p| u.apply(p)).collect::<Result<Vec<_>>>()?;
    StateVector::new(kron_vectors(factors.iter().map(StateVector::amplitudes)).as_slice().to_vec())
}

/// The state family `x ↦ U(x)^{⊗k} (|p_1⟩ ⊗ … ⊗ |p_k⟩)` for fixed probes.
///
/// With a complete orthogonal probe set this is the LOEM encoding. With
/// `k` copies of the same probe it is the identical-copy state used as the
/// incompatible reference.
#[derive(Debug, Clone)]
pub struct ProductFamily<U> {
    unitary: U,
    probes: Vec<StateVector>,
    mode: DerivativeMode,
}

impl<U: UnitaryFamily> ProductFamily<U> {
    pub fn loem(unitary: U, probes: &OrthogonalProbeSet) -> Result<Self> {
        Self::with_probes(unitary, probes.probes().to_vec())
    }

    pub fn identical_copies(unitary: U, probe: StateVector, copies: usize) -> Result<Self> {
        Self::with_probes(unitary, vec![probe; copies])
    }

    fn with_probes(unitary: U, probes: Vec<StateVector>) -> Result<Self> {
        if probes.is_empty() {
            return Err(Error::EmptyInput("product family needs a probe"));
        }
        for p in &probes {
            check_dim(unitary.dim(), p.dim())?;
        }
        let x0 = ParameterPoint::new(vec![0.0; unitary.num_params()])?;
        let mode = if unitary.unitary_derivatives(&x0).is_some() {
            DerivativeMode::Analytic
        } else {
            DerivativeMode::default()
        };
        Ok(Self {
            unitary,
            probes,
            mode,
        })
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn unitary(&self) -> &U {
        &self.unitary
    }
}

impl<U: UnitaryFamily> StateFamily for ProductFamily<U> {
    fn dim(&self) -> usize {
        self.unitary.dim().pow(self.probes.len() as u32)
    }

    fn num_params(&self) -> usize {
        self.unitary.num_params()
    }

    fn evaluate(&self, x: &ParameterPoint) -> Result<StateVector> {
        product_state(&self.unitary, x, &self.probes)
    }

    fn derivative_mode(&self) -> DerivativeMode {
        self.mode
    }

    fn analytic_jacobian(&self, x: &ParameterPoint) -> Option<Result<Vec<DVector<C64>>>> {
        let d_u = self.unitary.unitary_derivatives(x)?;
        Some((|| {
            let d_u = d_u?;
            let u = self.unitary.unitary(x)?;
            let factors: Vec<DVector<C64>> =
                self.probes.iter().map(|p| u.entries() * p.amplitudes()).collect();
            Ok(d_u
                .iter()
                .map(|du| {
                    // product rule over the tensor factors
                    let mut column = DVector::zeros(self.dim());
                    for slot in 0..factors.len() {
                        let moved = du * self.probes[slot].amplitudes();
                        column += kron_vectors(
                            factors
                                .iter()
                                .enumerate()
                                .map(|(k, f)| if k == slot { &moved } else { f }),
                        );
                    }
                    column
                })
                .collect())
        })())
    }

    fn param_names(&self) -> Vec<String> {
        self.unitary.param_names()
    }
}

/// `U(Nθ, Nφ)|0⟩ ⊗ U(Nθ, Nφ)|1⟩` in closed form.
pub fn antiparallel_state(theta: f64, phi: f64, n_iter: u32) -> StateVector {
    assert!(n_iter >= 1, "iteration count must be at least 1");
    let n = n_iter as f64;
    let (a, b) = (n * theta, n * phi);
    let half_sin = 0.5 * a.sin();
    let amplitudes = vec![
        -C64::from_polar(half_sin, -b),
        C64::new((a / 2.0).cos().powi(2), 0.0),
        C64::new(-(a / 2.0).sin().powi(2), 0.0),
        C64::from_polar(half_sin, b),
    ];
    StateVector::new(amplitudes).expect("antiparallel state is normalized")
}

/// The antiparallel pair as a two-parameter family in `(θ, φ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntiparallelFamily {
    pub n_iter: u32,
    pub mode: DerivativeMode,
}

impl AntiparallelFamily {
    pub fn new(n_iter: u32) -> Self {
        assert!(n_iter >= 1, "iteration count must be at least 1");
        Self {
            n_iter,
            mode: DerivativeMode::Analytic,
        }
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }
}

impl StateFamily for AntiparallelFamily {
    fn dim(&self) -> usize {
        4
    }

    fn num_params(&self) -> usize {
        2
    }

    fn evaluate(&self, x: &ParameterPoint) -> Result<StateVector> {
        check_dim(2, x.num_params())?;
        Ok(antiparallel_state(x.get(0), x.get(1), self.n_iter))
    }

    fn derivative_mode(&self) -> DerivativeMode {
        self.mode
    }

    fn analytic_jacobian(&self, x: &ParameterPoint) -> Option<Result<Vec<DVector<C64>>>> {
        if let Err(e) = check_dim(2, x.num_params()) {
            return Some(Err(e));
        }
        let n = self.n_iter as f64;
        let (a, b) = (n * x.get(0), n * x.get(1));
        let (sa, ca) = a.sin_cos();
        let half_n = 0.5 * n;
        let down = C64::from_polar(1.0, -b);
        let up = C64::from_polar(1.0, b);
        let d_theta = DVector::from_vec(vec![
            -down * (half_n * ca),
            C64::new(-half_n * sa, 0.0),
            C64::new(-half_n * sa, 0.0),
            up * (half_n * ca),
        ]);
        let d_phi = DVector::from_vec(vec![
            C64::i() * down * (half_n * sa),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::i() * up * (half_n * sa),
        ]);
        Some(Ok(vec![d_theta, d_phi]))
    }

    fn param_names(&self) -> Vec<String> {
        vec!["theta".into(), "phi".into()]
    }
}

/// `|01⟩, |10⟩, (|00⟩ + |11⟩)/√2, (|00⟩ − |11⟩)/√2`, in port order.
pub fn bell_like_basis() -> EntanglingBasis {
    let v = |a: [f64; 4]| {
        StateVector::new(a.iter().map(|&r| C64::new(r, 0.0)).collect()).expect("normalized")
    };
    let r = FRAC_1_SQRT_2;
    EntanglingBasis::new(vec![
        v([0.0, 1.0, 0.0, 0.0]),
        v([0.0, 0.0, 1.0, 0.0]),
        v([r, 0.0, 0.0, r]),
        v([r, 0.0, 0.0, -r]),
    ])
    .expect("bell-like basis is orthonormal")
}

/// `P_k = |⟨k|Ψ⟩|²`.
pub fn born_probabilities(state: &StateVector, basis: &EntanglingBasis) -> Result<OutcomeDistribution> {
    check_dim(basis.dim(), state.dim())?;
    let probs = basis
        .vectors()
        .iter()
        .map(|k| k.amplitudes().dotc(state.amplitudes()).norm_sqr().min(1.0))
        .collect();
    OutcomeDistribution::new(probs)
}

/// The four closed-form port probabilities.
pub fn outcome_probabilities(theta: f64, phi: f64, n_iter: u32) -> OutcomeDistribution {
    OutcomeDistribution {
        probs: port_probabilities(theta, phi, n_iter).to_vec(),
    }
}

pub(crate) fn port_probabilities(theta: f64, phi: f64, n_iter: u32) -> [f64; 4] {
    assert!(n_iter >= 1, "iteration count must be at least 1");
    let n = n_iter as f64;
    let (a, b) = (n * theta, n * phi);
    let (sh, ch) = (a / 2.0).sin_cos();
    let sin_sq = a.sin().powi(2);
    [
        ch.powi(4),
        sh.powi(4),
        0.5 * sin_sq * b.sin().powi(2),
        0.5 * sin_sq * b.cos().powi(2),
    ]
}

/// The four-port model `x = (θ, φ) ↦ (P1, …, P4)` for [`crate::information::fim`].
pub fn four_port_model(n_iter: u32) -> impl Fn(&ParameterPoint) -> Result<Vec<f64>> + Send + Sync {
    move |x| {
        check_dim(2, x.num_params())?;
        Ok(port_probabilities(x.get(0), x.get(1), n_iter).to_vec())
    }
}

/// `diag(2N², 2N² sin²(Nθ))`.
pub fn antiparallel_qfim_closed(theta: f64, n_iter: u32) -> InfoMatrix {
    assert!(n_iter >= 1, "iteration count must be at least 1");
    let n = n_iter as f64;
    let scale = 2.0 * n * n;
    InfoMatrix::diagonal(&[scale, scale * (n * theta).sin().powi(2)], InfoKind::Quantum)
        .and_then(|q| q.with_labels(["theta", "phi"]))
        .expect("diagonal with non-negative entries")
}
