//! Independent oracles shared by the integration suites. Nothing here calls
//! into the derivative, information or estimation code it is used to check.

#![allow(dead_code)]

use num_complex::Complex64 as C64;

/// Central-difference Jacobian of a raw amplitude map.
pub fn fd_jacobian<F>(f: F, x: &[f64], h: f64) -> Vec<Vec<C64>>
where
    F: Fn(&[f64]) -> Vec<C64>,
{
    (0..x.len())
        .map(|i| {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[i] += h;
            minus[i] -= h;
            let (a, b) = (f(&plus), f(&minus));
            a.iter().zip(&b).map(|(p, m)| (p - m) / (2.0 * h)).collect()
        })
        .collect()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn kron(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// `|n⟩ = cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`, written out by hand.
pub fn bloch(theta: f64, phi: f64) -> Vec<C64> {
    vec![
        C64::new((theta / 2.0).cos(), 0.0),
        C64::from_polar((theta / 2.0).sin(), phi),
    ]
}

/// Four-port probabilities written out independently of the library.
pub fn ports(theta: f64, phi: f64, n: u32) -> [f64; 4] {
    let a = n as f64 * theta;
    let b = n as f64 * phi;
    [
        (a / 2.0).cos().powi(4),
        (a / 2.0).sin().powi(4),
        a.sin().powi(2) * b.sin().powi(2) / 2.0,
        a.sin().powi(2) * b.cos().powi(2) / 2.0,
    ]
}

pub fn log_likelihood(counts: [u64; 4], theta: f64, phi: f64, n: u32) -> f64 {
    ports(theta, phi, n)
        .iter()
        .zip(counts)
        .filter(|(_, c)| *c > 0)
        .map(|(p, c)| c as f64 * p.ln())
        .sum()
}

/// Central-difference gradient of the log-likelihood.
pub fn likelihood_gradient(counts: [u64; 4], theta: f64, phi: f64, n: u32, h: f64) -> [f64; 2] {
    [
        (log_likelihood(counts, theta + h, phi, n) - log_likelihood(counts, theta - h, phi, n)) / (2.0 * h),
        (log_likelihood(counts, theta, phi + h, n) - log_likelihood(counts, theta, phi - h, n)) / (2.0 * h),
    ]
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}
