//! Port-count sampling, maximum-likelihood estimation of `(θ, φ)` and
//! repeated-trial campaigns.
//!
//! With `a = Nθ`, `b = Nφ` and `s = sin²(a/2)` the four-port multinomial
//! log-likelihood separates into
//!
//! ```text
//! (2n₁ + n₃₄) log(1 − s) + (2n₂ + n₃₄) log s  +  n₃ log sin²b + n₄ log cos²b
//! ```
//!
//! so the estimator is available in closed form: `ŝ = (2n₂ + n₃₄)/(2M)`,
//! `tan² b̂ = n₃/n₄`. [`mle_grid`] maximizes the same likelihood by brute
//! force and serves as the independent check.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::information::crb_bound;
use crate::loem::{antiparallel_qfim_closed, outcome_probabilities, port_probabilities, OutcomeDistribution};
use crate::rng::substream;

/// Fraction of failed estimates above which a campaign is rejected.
pub const MAX_FAILURE_FRACTION: f64 = 0.10;

/// Golden-section iterations per coordinate in [`mle_grid`].
pub const GOLDEN_ITERATIONS: usize = 40;

/// Default number of Poisson resamples behind each error bar.
pub const DEFAULT_RESAMPLES: usize = 100;

/// Upper end `π/(2N)` of the identifiable range for `θ` and `φ`.
pub fn identifiable_limit(n_iter: u32) -> f64 {
    FRAC_PI_2 / n_iter as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseModel {
    /// Counts sum exactly to the number of shots.
    Multinomial,
    /// Each port is an independent Poisson variable with mean `M·p_k`.
    Poisson,
}

/// Photon counts at the four output ports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CountVector {
    counts: [u64; 4],
}

impl CountVector {
    pub fn new(counts: [u64; 4]) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> [u64; 4] {
        self.counts
    }

    pub fn get(&self, port: usize) -> u64 {
        self.counts[port]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimateStatus {
    Ok,
    /// `n₃ + n₄ = 0`: the likelihood does not depend on `φ`.
    PhiUnidentifiable,
    /// The maximum sits on the edge of `[0, π/(2N)]²`.
    Boundary,
}

/// A joint estimate `(θ̂, φ̂)`. `phi_hat` is NaN when `φ` is unidentifiable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub theta_hat: f64,
    pub phi_hat: f64,
    pub status: EstimateStatus,
}

/// One repeated-trial campaign at fixed true parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub theta_true: f64,
    pub phi_true: f64,
    pub n_iter: u32,
    pub shots: u64,
    pub repeats: usize,
    pub seed: u64,
    pub noise_model: NoiseModel,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iter == 0 {
            return Err(Error::InvalidArgument("iteration count N must be at least 1".into()));
        }
        check_identifiable(self.theta_true, self.phi_true, self.n_iter)?;
        if self.shots == 0 {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        if self.repeats < 2 {
            return Err(Error::InvalidArgument("repeats must be at least 2".into()));
        }
        Ok(())
    }
}

/// Checks `0 ≤ θ < π/(2N)` and `0 ≤ φ < π/(2N)`.
pub fn check_identifiable(theta: f64, phi: f64, n_iter: u32) -> Result<()> {
    let limit = identifiable_limit(n_iter);
    for (name, value) in [("theta", theta), ("phi", phi)] {
        if !(value >= 0.0 && value < limit) {
            return Err(Error::ConstraintViolation {
                constraint: format!("0 <= {name} < pi/(2N) with N = {n_iter}"),
                detail: format!("{name} = {value} rad, limit {limit} rad"),
            });
        }
    }
    Ok(())
}

/// Summary of a campaign. Standard errors are those of the sample means
/// behind each `M×` quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialStatistics {
    pub shots: u64,
    pub mse_theta: f64,
    pub mse_phi: f64,
    pub covariance: f64,
    pub m_times_mse_theta: f64,
    pub m_times_mse_phi: f64,
    pub m_times_covariance: f64,
    pub se_m_mse_theta: f64,
    pub se_m_mse_phi: f64,
    pub se_m_covariance: f64,
    pub err_theta: Option<f64>,
    pub err_phi: Option<f64>,
    pub n_used: usize,
    pub n_failed: usize,
}

/// Draws port counts for `shots` detections.
pub fn sample_counts<R: Rng + ?Sized>(
    probs: &OutcomeDistribution,
    shots: u64,
    noise_model: NoiseModel,
    rng: &mut R,
) -> Result<CountVector> {
    let p = probs.probs();
    if p.len() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: p.len(),
        });
    }
    let mut counts = [0u64; 4];
    match noise_model {
        NoiseModel::Multinomial => {
            // sequential conditional binomials
            let mut remaining = shots;
            let mut mass = 1.0;
            for k in 0..3 {
                if remaining == 0 {
                    break;
                }
                let q = if mass > 0.0 { (p[k] / mass).clamp(0.0, 1.0) } else { 0.0 };
                let draw = Binomial::new(remaining, q)
                    .map_err(|e| Error::InvalidDistribution(e.to_string()))?
                    .sample(rng);
                counts[k] = draw;
                remaining -= draw;
                mass -= p[k];
            }
            counts[3] = remaining;
        }
        NoiseModel::Poisson => {
            for k in 0..4 {
                let mean = shots as f64 * p[k];
                if mean > 0.0 {
                    let draw: f64 = Poisson::new(mean)
                        .map_err(|e| Error::InvalidDistribution(e.to_string()))?
                        .sample(rng);
                    counts[k] = draw as u64;
                }
            }
        }
    }
    Ok(CountVector { counts })
}

fn status_from_counts(counts: &CountVector) -> EstimateStatus {
    let [n1, n2, n3, n4] = counts.counts;
    if n3 + n4 == 0 {
        EstimateStatus::PhiUnidentifiable
    } else if n3 == 0 || n4 == 0 || n2 > n1 {
        EstimateStatus::Boundary
    } else {
        EstimateStatus::Ok
    }
}

/// Closed-form maximizer of the four-port likelihood on `[0, π/(2N)]²`.
pub fn mle_closed_form(counts: &CountVector, n_iter: u32) -> Result<Estimate> {
    let total = counts.total();
    if total == 0 {
        return Err(Error::NoCounts);
    }
    let [_, n2, n3, n4] = counts.counts;
    let n = n_iter as f64;
    let limit = identifiable_limit(n_iter);
    let n34 = n3 + n4;
    let s_hat = (2 * n2 + n34) as f64 / (2 * total) as f64;
    // the likelihood rises monotonically in θ up to the edge when ŝ > 1/2
    let theta_hat = ((2.0 / n) * s_hat.sqrt().asin()).min(limit);
    let phi_hat = match (n3, n4) {
        (0, 0) => f64::NAN,
        (_, 0) => limit,
        _ => (n3 as f64 / n4 as f64).sqrt().atan() / n,
    };
    Ok(Estimate {
        theta_hat,
        phi_hat,
        status: status_from_counts(counts),
    })
}

/// `Σ_k n_k log P_k(θ, φ; N)` with `0·log 0 = 0`.
pub fn log_likelihood(counts: &CountVector, theta: f64, phi: f64, n_iter: u32) -> f64 {
    port_probabilities(theta, phi, n_iter)
        .iter()
        .zip(counts.counts)
        .map(|(&p, c)| match c {
            0 => 0.0,
            c if p > 0.0 => c as f64 * p.ln(),
            _ => f64::NEG_INFINITY,
        })
        .sum()
}

/// Brute-force maximizer: grid search over `[0, π/(2N)]²` followed by
/// golden-section refinement along each coordinate.
pub fn mle_grid(counts: &CountVector, n_iter: u32, resolution: usize) -> Result<Estimate> {
    if resolution < 16 {
        return Err(Error::InvalidArgument(format!(
            "grid resolution {resolution} below the minimum of 16"
        )));
    }
    if counts.total() == 0 {
        return Err(Error::NoCounts);
    }
    let limit = identifiable_limit(n_iter);
    let step = limit / (resolution - 1) as f64;
    let ll = |t: f64, p: f64| log_likelihood(counts, t, p, n_iter);

    let mut best = (0.0, 0.0, f64::NEG_INFINITY);
    // θ-major scan with strict improvement keeps the lexicographically
    // smallest point among ties
    for i in 0..resolution {
        let t = i as f64 * step;
        for j in 0..resolution {
            let p = j as f64 * step;
            let v = ll(t, p);
            if v > best.2 {
                best = (t, p, v);
            }
        }
    }

    let (mut theta, mut phi, mut value) = best;
    let lo = (theta - step).max(0.0);
    let hi = (theta + step).min(limit);
    let t = golden_section_max(|t| ll(t, phi), lo, hi);
    let v = ll(t, phi);
    if v > value {
        theta = t;
        value = v;
    }
    let lo = (phi - step).max(0.0);
    let hi = (phi + step).min(limit);
    let p = golden_section_max(|p| ll(theta, p), lo, hi);
    if ll(theta, p) > value {
        phi = p;
    }

    let status = status_from_counts(counts);
    if status == EstimateStatus::PhiUnidentifiable {
        phi = f64::NAN;
    }
    Ok(Estimate {
        theta_hat: theta,
        phi_hat: phi,
        status,
    })
}

fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERATIONS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Independent estimates at the true parameters, summarized as M×MSE.
///
/// Estimates with an unidentifiable `φ` (and Poisson draws with zero total
/// counts) are excluded and counted in `n_failed`. Edge-of-domain
/// estimates are genuine maximizers and stay in the statistics.
pub fn run_trials(config: &TrialConfig) -> Result<TrialStatistics> {
    run_trials_in_group(config, 0)
}

fn run_trials_in_group(config: &TrialConfig, group: u64) -> Result<TrialStatistics> {
    config.validate()?;
    let probs = outcome_probabilities(config.theta_true, config.phi_true, config.n_iter);
    let estimates: Vec<Option<Estimate>> = (0..config.repeats as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = substream(config.seed, group, trial);
            let counts = sample_counts(&probs, config.shots, config.noise_model, &mut rng)?;
            match mle_closed_form(&counts, config.n_iter) {
                Ok(e) if e.status != EstimateStatus::PhiUnidentifiable => Ok(Some(e)),
                Ok(_) | Err(Error::NoCounts) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let used: Vec<Estimate> = estimates.iter().flatten().copied().collect();
    let n_failed = config.repeats - used.len();
    if n_failed as f64 > MAX_FAILURE_FRACTION * config.repeats as f64 || used.len() < 2 {
        return Err(Error::DegenerateConfiguration {
            failed: n_failed,
            repeats: config.repeats,
        });
    }
    Ok(summarize(&used, config))
}

fn mean(values: impl Iterator<Item = f64>) -> (f64, usize) {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (sum / count as f64, count)
}

/// Standard error of the mean of `values`.
fn standard_error(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let (m, _) = mean(values.iter().copied());
    let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

fn summarize(used: &[Estimate], config: &TrialConfig) -> TrialStatistics {
    let shots = config.shots as f64;
    let sq_theta: Vec<f64> = used.iter().map(|e| (e.theta_hat - config.theta_true).powi(2)).collect();
    let sq_phi: Vec<f64> = used.iter().map(|e| (e.phi_hat - config.phi_true).powi(2)).collect();
    let (mse_theta, n) = mean(sq_theta.iter().copied());
    let (mse_phi, _) = mean(sq_phi.iter().copied());
    let (mean_theta, _) = mean(used.iter().map(|e| e.theta_hat));
    let (mean_phi, _) = mean(used.iter().map(|e| e.phi_hat));
    let products: Vec<f64> = used
        .iter()
        .map(|e| (e.theta_hat - mean_theta) * (e.phi_hat - mean_phi))
        .collect();
    let covariance = products.iter().sum::<f64>() / (n as f64 - 1.0);
    TrialStatistics {
        shots: config.shots,
        mse_theta,
        mse_phi,
        covariance,
        m_times_mse_theta: shots * mse_theta,
        m_times_mse_phi: shots * mse_phi,
        m_times_covariance: shots * covariance,
        se_m_mse_theta: shots * standard_error(&sq_theta),
        se_m_mse_phi: shots * standard_error(&sq_phi),
        se_m_covariance: shots * standard_error(&products),
        err_theta: None,
        err_phi: None,
        n_used: n,
        n_failed: config.repeats - n,
    }
}

/// Spread of M×MSE over `resamples` Poisson-noise repetitions of the
/// campaign; repetition `b` draws from substream group `b + 1`.
pub fn error_bars(config: &TrialConfig, resamples: usize) -> Result<(f64, f64)> {
    if resamples < 2 {
        return Err(Error::InvalidArgument("error bars need at least 2 resamples".into()));
    }
    let poisson = TrialConfig {
        noise_model: NoiseModel::Poisson,
        ..config.clone()
    };
    let runs: Vec<(f64, f64)> = (0..resamples as u64)
        .into_par_iter()
        .map(|b| {
            let stats = run_trials_in_group(&poisson, b + 1)?;
            Ok((stats.m_times_mse_theta, stats.m_times_mse_phi))
        })
        .collect::<Result<_>>()?;
    let sd = |values: Vec<f64>| standard_error(&values) * (values.len() as f64).sqrt();
    Ok((
        sd(runs.iter().map(|r| r.0).collect()),
        sd(runs.iter().map(|r| r.1).collect()),
    ))
}

/// Runs [`run_trials`] and fills in the Poisson error bars.
pub fn run_trials_with_error_bars(config: &TrialConfig, resamples: usize) -> Result<TrialStatistics> {
    let mut stats = run_trials(config)?;
    let (err_theta, err_phi) = error_bars(config, resamples)?;
    stats.err_theta = Some(err_theta);
    stats.err_phi = Some(err_phi);
    Ok(stats)
}

/// Single-shot bound `(Q^{-1})_ii` for the antiparallel state, i.e. the
/// value M×MSE approaches.
pub fn qcrb_per_shot(theta: f64, n_iter: u32) -> Result<(f64, f64)> {
    let bound = crb_bound(&antiparallel_qfim_closed(theta, n_iter), 1)?;
    Ok((bound.get(0, 0), bound.get(1, 1)))
}

/// Reference scaling `1/(2N)` and `1/(2N sin²(Nθ))` of `N` independent
/// single-pass uses.
pub fn shot_noise_limit(theta: f64, n_iter: u32) -> (f64, f64) {
    let n = n_iter as f64;
    (1.0 / (2.0 * n), 1.0 / (2.0 * n * (n * theta).sin().powi(2)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergRow {
    pub n_iter: u32,
    pub m_times_mse_theta: f64,
    pub m_times_mse_phi: f64,
    pub se_m_mse_theta: f64,
    pub se_m_mse_phi: f64,
    pub qcrb_theta: f64,
    pub qcrb_phi: f64,
    pub snl_theta: f64,
    pub snl_phi: f64,
}

/// One multinomial campaign per iteration count, compared with the QCRB
/// and the shot-noise reference.
pub fn heisenberg_sweep(
    theta: f64,
    phi: f64,
    n_list: &[u32],
    shots: u64,
    repeats: usize,
    seed: u64,
) -> Result<Vec<HeisenbergRow>> {
    if n_list.is_empty() {
        return Err(Error::EmptyInput("iteration list"));
    }
    for &n in n_list {
        if n == 0 {
            return Err(Error::InvalidArgument("iteration count N must be at least 1".into()));
        }
        check_identifiable(theta, phi, n)?;
    }
    n_list
        .iter()
        .map(|&n_iter| {
            let stats = run_trials(&TrialConfig {
                theta_true: theta,
                phi_true: phi,
                n_iter,
                shots,
                repeats,
                seed,
                noise_model: NoiseModel::Multinomial,
            })?;
            let (qcrb_theta, qcrb_phi) = qcrb_per_shot(theta, n_iter)?;
            let (snl_theta, snl_phi) = shot_noise_limit(theta, n_iter);
            Ok(HeisenbergRow {
                n_iter,
                m_times_mse_theta: stats.m_times_mse_theta,
                m_times_mse_phi: stats.m_times_mse_phi,
                se_m_mse_theta: stats.se_m_mse_theta,
                se_m_mse_phi: stats.se_m_mse_phi,
                qcrb_theta,
                qcrb_phi,
                snl_theta,
                snl_phi,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn config(theta_deg: f64, phi_deg: f64, n_iter: u32) -> TrialConfig {
        TrialConfig {
            theta_true: theta_deg.to_radians(),
            phi_true: phi_deg.to_radians(),
            n_iter,
            shots: 10_000,
            repeats: 400,
            seed: 7,
            noise_model: NoiseModel::Multinomial,
        }
    }

    #[test]
    fn deterministic_outcome_sampling() {
        let probs = OutcomeDistribution::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let mut rng = substream(1, 0, 0);
        let c = sample_counts(&probs, 100, NoiseModel::Multinomial, &mut rng).unwrap();
        assert_eq!(c.counts(), [100, 0, 0, 0]);
        let c = sample_counts(&probs, 100, NoiseModel::Poisson, &mut rng).unwrap();
        assert_eq!(&c.counts()[1..], &[0, 0, 0]);
    }

    #[test]
    fn poisson_port_mean() {
        let probs = OutcomeDistribution::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let draws: Vec<f64> = (0..2000)
            .map(|i| {
                let mut rng = substream(3, 0, i);
                sample_counts(&probs, 100, NoiseModel::Poisson, &mut rng).unwrap().get(0) as f64
            })
            .collect();
        let (m, _) = mean(draws.iter().copied());
        // standard error of the mean is √(100/2000) ≈ 0.22
        assert!((m - 100.0).abs() < 1.2, "mean {m}");
    }

    #[test]
    fn uniform_sampling_within_five_sigma() {
        let probs = OutcomeDistribution::new(vec![0.25; 4]).unwrap();
        let shots = 1_000_000u64;
        let sigma = (shots as f64 * 0.25 * 0.75).sqrt();
        for seed in 0..5 {
            let mut rng = substream(seed, 0, 0);
            let c = sample_counts(&probs, shots, NoiseModel::Multinomial, &mut rng).unwrap();
            assert_eq!(c.total(), shots);
            for k in 0..4 {
                assert!((c.get(k) as f64 - 0.25 * shots as f64).abs() < 5.0 * sigma);
            }
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let probs = outcome_probabilities(0.7, 0.3, 1);
        let a = sample_counts(&probs, 10_000, NoiseModel::Multinomial, &mut substream(11, 0, 5)).unwrap();
        let b = sample_counts(&probs, 10_000, NoiseModel::Multinomial, &mut substream(11, 0, 5)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn closed_form_examples() {
        let e = mle_closed_form(&CountVector::new([1000, 0, 0, 0]), 1).unwrap();
        assert_eq!(e.theta_hat, 0.0);
        assert_eq!(e.status, EstimateStatus::PhiUnidentifiable);

        let e = mle_closed_form(&CountVector::new([2500; 4]), 1).unwrap();
        assert!((e.theta_hat - FRAC_PI_2).abs() < 1e-15);
        assert!((e.phi_hat - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(e.status, EstimateStatus::Ok);

        let e = mle_closed_form(&CountVector::new([8100, 100, 900, 900]), 1).unwrap();
        assert!((e.theta_hat - 2.0 * 0.1f64.sqrt().asin()).abs() < 1e-15);
        assert!((e.theta_hat - 0.6435).abs() < 1e-4);
        assert!((e.phi_hat - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn closed_form_boundary_cases() {
        let e = mle_closed_form(&CountVector::new([500, 10, 0, 40]), 2).unwrap();
        assert_eq!((e.phi_hat, e.status), (0.0, EstimateStatus::Boundary));
        let e = mle_closed_form(&CountVector::new([500, 10, 40, 0]), 2).unwrap();
        assert_eq!((e.phi_hat, e.status), (identifiable_limit(2), EstimateStatus::Boundary));
        let e = mle_closed_form(&CountVector::new([10, 500, 40, 40]), 1).unwrap();
        assert_eq!((e.theta_hat, e.status), (FRAC_PI_2, EstimateStatus::Boundary));
        assert_eq!(mle_closed_form(&CountVector::new([0; 4]), 1), Err(Error::NoCounts));
    }

    #[test]
    fn grid_examples() {
        let e = mle_grid(&CountVector::new([1000, 0, 0, 0]), 1, 64).unwrap();
        assert_eq!(e.theta_hat, 0.0);
        assert_eq!(e.status, EstimateStatus::PhiUnidentifiable);
        assert!(mle_grid(&CountVector::new([1, 1, 1, 1]), 1, 8).is_err());
        assert_eq!(mle_grid(&CountVector::new([0; 4]), 1, 64), Err(Error::NoCounts));
    }

    #[test]
    fn grid_matches_closed_form_on_spec_vectors() {
        for counts in [[2500, 2500, 2500, 2500], [8100, 100, 900, 900]] {
            let c = CountVector::new(counts);
            let a = mle_closed_form(&c, 1).unwrap();
            let b = mle_grid(&c, 1, 128).unwrap();
            // comparison-based search resolves a flat maximum to ~√ε
            assert!((a.theta_hat - b.theta_hat).abs() < 1e-7);
            assert!((a.phi_hat - b.phi_hat).abs() < 1e-7);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = config(95.0, 36.0, 1);
        assert!(matches!(c.validate(), Err(Error::ConstraintViolation { .. })));
        c.theta_true = 0.5;
        c.repeats = 1;
        assert!(c.validate().is_err());
        c.repeats = 2;
        c.shots = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn single_shot_campaign_runs() {
        let mut c = config(85.0, 36.0, 1);
        c.shots = 1;
        c.repeats = 50;
        // with one detection φ is mostly unidentifiable; either outcome is acceptable
        match run_trials(&c) {
            Ok(stats) => assert!(stats.m_times_mse_theta >= 0.0),
            Err(Error::DegenerateConfiguration { .. }) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn degenerate_configuration_is_reported() {
        let mut c = config(0.01, 36.0, 1);
        c.shots = 100;
        assert!(matches!(run_trials(&c), Err(Error::DegenerateConfiguration { .. })));
    }

    #[test]
    fn m_times_mse_is_shots_times_mse() {
        let stats = run_trials(&config(40.0, 36.0, 1)).unwrap();
        assert_eq!(stats.m_times_mse_theta, stats.mse_theta * 10_000.0);
        assert_eq!(stats.m_times_mse_phi, stats.mse_phi * 10_000.0);
        assert_eq!(stats.n_used + stats.n_failed, 400);
    }

    #[test]
    fn trials_are_independent_of_pool_size() {
        let c = config(55.0, 36.0, 1);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| run_trials_with_error_bars(&c, 4).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn error_bars_are_reproducible() {
        let c = config(40.0, 36.0, 1);
        assert_eq!(error_bars(&c, 2).unwrap(), error_bars(&c, 2).unwrap());
        assert!(error_bars(&c, 1).is_err());
    }

    #[test]
    fn sweep_rejects_out_of_range_iteration() {
        let t = 8.5f64.to_radians();
        match heisenberg_sweep(t, t, &[1, 5, 11], 1000, 10, 1) {
            Err(Error::ConstraintViolation { constraint, .. }) => assert!(constraint.contains("N = 11")),
            other => panic!("expected constraint violation, got {other:?}"),
        }
    }

    #[test]
    fn shot_noise_and_qcrb_references() {
        let t = 8.5f64.to_radians();
        let (q_theta, q_phi) = qcrb_per_shot(t, 10).unwrap();
        assert!((q_theta - 0.005).abs() < 1e-15);
        assert!((q_phi - 1.0 / (200.0 * (10.0 * t).sin().powi(2))).abs() < 1e-15);
        let (s_theta, _) = shot_noise_limit(t, 10);
        assert!((s_theta - 0.05).abs() < 1e-15);
    }
}
