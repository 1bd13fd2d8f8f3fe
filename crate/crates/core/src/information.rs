//! Quantum and classical Fisher information, SLD operators, the mean
//! Uhlmann curvature and Cramér-Rao bound matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::state::{check_dim, derivatives, ParamBox, ParameterPoint, StateFamily, StateJacobian, StateVector, C64};

pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
pub const PSD_TOLERANCE: f64 = 1e-10;
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Maximum disagreement allowed between the two curvature routes.
pub const CURVATURE_AGREEMENT: f64 = 1e-8;

/// Outcomes below this probability are candidates for the 0/0 limit.
pub const FIM_ZERO_PROBABILITY: f64 = 1e-12;
/// Derivative magnitude separating a removable 0/0 from divergent information.
pub const FIM_ZERO_DERIVATIVE: f64 = 1e-9;

/// Smallest `|det(M·info)|` accepted by [`crb_bound`].
pub const DET_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfoKind {
    Quantum,
    Classical,
}

/// A symmetric positive-semidefinite information matrix (QFIM or FIM).
#[derive(Debug, Clone, PartialEq)]
pub struct InfoMatrix {
    entries: DMatrix<f64>,
    kind: InfoKind,
    labels: Vec<String>,
}

impl InfoMatrix {
    pub fn new(entries: DMatrix<f64>, kind: InfoKind) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                expected: entries.nrows(),
                got: entries.ncols(),
            });
        }
        let asymmetry = (&entries - entries.transpose())
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        if !(asymmetry <= SYMMETRY_TOLERANCE) {
            return Err(Error::NotSymmetric { asymmetry });
        }
        let entries = (&entries + entries.transpose()) * 0.5;
        let min_eigenvalue = min_eigenvalue(&entries);
        if min_eigenvalue < -PSD_TOLERANCE {
            return Err(Error::NotPositiveSemidefinite { min_eigenvalue });
        }
        let labels = (1..=entries.nrows()).map(|i| format!("x{i}")).collect();
        Ok(Self {
            entries,
            kind,
            labels,
        })
    }

    pub fn diagonal(values: &[f64], kind: InfoKind) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(values)), kind)
    }

    /// Attach parameter names used in error messages.
    pub fn with_labels<S: Into<String>>(mut self, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        check_dim(self.dim(), labels.len())?;
        self.labels = labels;
        Ok(self)
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn kind(&self) -> InfoKind {
        self.kind
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn max_abs_diff(&self, other: &InfoMatrix) -> f64 {
        (&self.entries - &other.entries)
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Antisymmetric mean Uhlmann curvature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureMatrix {
    entries: DMatrix<f64>,
}

impl CurvatureMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let defect = (&entries + entries.transpose())
            .iter()
            .map(|v| v.abs())
            .fold(0.0, f64::max);
        if !(defect <= SYMMETRY_TOLERANCE) {
            return Err(Error::NotSymmetric { asymmetry: defect });
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Pure-state symmetric logarithmic derivative `L = 2(|∂ψ⟩⟨ψ| + |ψ⟩⟨∂ψ|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SldOperator {
    entries: DMatrix<C64>,
}

impl SldOperator {
    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.entries * v
    }

    /// `Tr(ρL)` for `ρ = |ψ⟩⟨ψ|`.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        check_dim(self.entries.nrows(), state.dim())?;
        Ok(state.amplitudes().dotc(&self.apply(state.amplitudes())).re)
    }
}

/// A Cramér-Rao bound matrix `(M·I)^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundMatrix {
    entries: DMatrix<f64>,
    shots: u64,
}

impl BoundMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// The bound multiplied back by `M`, i.e. the single-shot `I^{-1}`.
    pub fn per_shot(&self) -> DMatrix<f64> {
        &self.entries * self.shots as f64
    }
}

fn check_jacobian(state: &StateVector, jac: &StateJacobian) -> Result<()> {
    check_dim(state.dim(), jac.base().dim())?;
    for col in jac.columns() {
        check_dim(state.dim(), col.len())?;
    }
    Ok(())
}

/// `Q_ij = 4 Re(⟨∂_iψ|∂_jψ⟩ − ⟨∂_iψ|ψ⟩⟨ψ|∂_jψ⟩)`.
pub fn qfim_pure(state: &StateVector, jac: &StateJacobian) -> Result<InfoMatrix> {
    check_jacobian(state, jac)?;
    let psi = state.amplitudes();
    let m = jac.num_params();
    let berry: Vec<C64> = jac.columns().iter().map(|d| psi.dotc(d)).collect();
    let mut q = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let overlap = jac.column(i).dotc(jac.column(j));
            let value = 4.0 * (overlap - berry[i].conj() * berry[j]).re;
            q[(i, j)] = value;
            q[(j, i)] = value;
        }
    }
    InfoMatrix::new(q, InfoKind::Quantum)
}

/// QFIM of `family` at `x`, labelled with the family's parameter names.
pub fn family_qfim(family: &dyn StateFamily, x: &ParameterPoint) -> Result<InfoMatrix> {
    let jac = derivatives(family, x)?;
    qfim_pure(jac.base(), &jac)?.with_labels(family.param_names())
}

pub fn sld_pure(state: &StateVector, deriv: &DVector<C64>) -> Result<SldOperator> {
    check_dim(state.dim(), deriv.len())?;
    let psi = state.amplitudes();
    let half = deriv * psi.adjoint();
    let entries = (&half + half.adjoint()) * C64::new(2.0, 0.0);
    let defect = (&entries - entries.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if defect > HERMITIAN_TOLERANCE {
        return Err(Error::NotSymmetric { asymmetry: defect });
    }
    Ok(SldOperator { entries })
}

/// `𝒰_ij = (i/4)⟨ψ|[L_i, L_j]|ψ⟩` evaluated with explicit SLD matrices.
pub fn curvature_from_sld(state: &StateVector, jac: &StateJacobian) -> Result<CurvatureMatrix> {
    check_jacobian(state, jac)?;
    let psi = state.amplitudes();
    let m = jac.num_params();
    let images: Vec<DVector<C64>> = jac
        .columns()
        .iter()
        .map(|d| Ok(sld_pure(state, d)?.apply(psi)))
        .collect::<Result<_>>()?;
    let mut u = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            // L Hermitian: ⟨ψ|L_i L_j|ψ⟩ = (L_iψ)†(L_jψ)
            let forward = images[i].dotc(&images[j]);
            let commutator = forward - forward.conj();
            let value = (C64::i() * 0.25 * commutator).re;
            u[(i, j)] = value;
            u[(j, i)] = -value;
        }
    }
    CurvatureMatrix::new(u)
}

/// Pure-state reduction `𝒰_ij = −2 Im⟨∂_iψ|∂_jψ⟩`.
pub fn curvature_from_overlaps(jac: &StateJacobian) -> CurvatureMatrix {
    let m = jac.num_params();
    let mut u = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in (i + 1)..m {
            let value = -2.0 * jac.column(i).dotc(jac.column(j)).im;
            u[(i, j)] = value;
            u[(j, i)] = -value;
        }
    }
    CurvatureMatrix { entries: u }
}

/// Mean Uhlmann curvature, cross-checked between the SLD and overlap routes.
pub fn uhlmann_curvature(state: &StateVector, jac: &StateJacobian) -> Result<CurvatureMatrix> {
    let direct = curvature_from_sld(state, jac)?;
    let reduced = curvature_from_overlaps(jac);
    let difference = (direct.entries() - reduced.entries())
        .iter()
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    if !(difference <= CURVATURE_AGREEMENT) {
        return Err(Error::InternalConsistency { difference });
    }
    Ok(direct)
}

/// Weak commutativity: every curvature entry below `tol`.
pub fn wcc_holds(curv: &CurvatureMatrix, tol: f64) -> bool {
    debug_assert!(tol > 0.0);
    curv.max_abs() < tol
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("no outcomes".into()));
    }
    if let Some(k) = p.iter().position(|v| !v.is_finite() || *v < -1e-15) {
        return Err(Error::InvalidDistribution(format!(
            "outcome {k} has probability {}",
            p[k]
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
    }
    Ok(())
}

/// `F_ij = Σ_k ∂_iP_k ∂_jP_k / P_k` with central-difference derivatives.
///
/// Outcomes with `P_k < 1e-12` and all `|∂P_k| < 1e-9` are dropped as the
/// removable 0/0 limit. A vanishing probability with a non-vanishing slope
/// is reported as [`Error::SingularFim`].
pub fn fim<F>(model: F, x: &ParameterPoint, h: f64) -> Result<InfoMatrix>
where
    F: Fn(&ParameterPoint) -> Result<Vec<f64>>,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step {h} must be positive")));
    }
    let m = x.num_params();
    let center = model(x)?;
    check_distribution(&center)?;
    let k = center.len();
    let mut grads = DMatrix::<f64>::zeros(m, k);
    for i in 0..m {
        let plus = model(&x.shifted(i, h))?;
        let minus = model(&x.shifted(i, -h))?;
        check_distribution(&plus)?;
        check_distribution(&minus)?;
        check_dim(k, plus.len())?;
        check_dim(k, minus.len())?;
        for outcome in 0..k {
            grads[(i, outcome)] = (plus[outcome] - minus[outcome]) / (2.0 * h);
        }
    }
    let mut f = DMatrix::zeros(m, m);
    for (outcome, &p) in center.iter().enumerate() {
        let slope = grads.column(outcome).iter().map(|v| v.abs()).fold(0.0, f64::max);
        if p < FIM_ZERO_PROBABILITY {
            if slope < FIM_ZERO_DERIVATIVE {
                continue;
            }
            return Err(Error::SingularFim {
                outcome,
                probability: p,
                derivative: slope,
            });
        }
        let g = grads.column(outcome);
        f += (g * g.transpose()) / p;
    }
    InfoMatrix::new(f, InfoKind::Classical)
}

/// `(M·info)^{-1}`, rejecting matrices with `|det(M·info)| < 1e-12`.
pub fn crb_bound(info: &InfoMatrix, shots: u64) -> Result<BoundMatrix> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let scaled = info.entries() * shots as f64;
    let lu = scaled.clone().lu();
    let det = lu.determinant();
    if !(det.abs() >= DET_CUTOFF) {
        return Err(Error::SingularBound {
            parameter: weakest_parameter(info),
            det,
        });
    }
    let entries = lu.try_inverse().ok_or_else(|| Error::SingularBound {
        parameter: weakest_parameter(info),
        det,
    })?;
    Ok(BoundMatrix {
        entries: (&entries + entries.transpose()) * 0.5,
        shots,
    })
}

/// Label of the parameter dominating the softest eigendirection.
fn weakest_parameter(info: &InfoMatrix) -> String {
    let eig = SymmetricEigen::new(info.entries().clone());
    let (soft, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &v)| if v < best.1 { (i, v) } else { best });
    let vector = eig.eigenvectors.column(soft);
    let (index, _) = vector
        .iter()
        .enumerate()
        .fold((0, -1.0), |best, (i, v)| if v.abs() > best.1 { (i, v.abs()) } else { best });
    info.labels()[index].clone()
}

/// Point drawn for sample `index` of [`average_qfim`].
pub fn average_qfim_point(domain: &ParamBox, seed: u64, index: u64) -> ParameterPoint {
    domain.sample(&mut substream(seed, 0, index))
}

/// Mean QFIM over points drawn uniformly from `domain`.
///
/// Sample `i` draws from its own substream, and the sum is taken in index
/// order, so the result does not depend on the thread pool size.
pub fn average_qfim(
    family: &dyn StateFamily,
    domain: &ParamBox,
    samples: usize,
    seed: u64,
) -> Result<InfoMatrix> {
    if samples == 0 {
        return Err(Error::InvalidArgument("average_qfim needs at least one sample".into()));
    }
    check_dim(family.num_params(), domain.num_params())?;
    let matrices: Vec<DMatrix<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let x = average_qfim_point(domain, seed, i);
            let jac = derivatives(family, &x)?;
            Ok(qfim_pure(jac.base(), &jac)?.entries)
        })
        .collect::<Result<_>>()?;
    let m = family.num_params();
    let sum = matrices.iter().fold(DMatrix::zeros(m, m), |acc, q| acc + q);
    InfoMatrix::new(sum / samples as f64, InfoKind::Quantum)?.with_labels(family.param_names())
}
