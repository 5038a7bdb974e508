//! Shared oracles for the integration suites: closed-form pmfs and
//! reference summations that deliberately avoid the library's log-gamma and
//! normalizer code paths.

// Each integration target compiles its own copy; not every target uses
// every oracle.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Closed-form negative binomial pmf values P(0..=kmax) for NB(v, p),
/// computed by the elementary product recurrence in plain arithmetic.
pub fn nb_pmf_closed(v: f64, p: f64, kmax: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax as usize + 1);
    let mut t = (1.0 - p).powf(v);
    for k in 0..=kmax {
        out.push(t);
        t *= p * (v + k as f64) / (k as f64 + 1.0);
    }
    out
}

/// Closed-form Poisson pmf values.
pub fn poisson_pmf_closed(p: f64, kmax: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax as usize + 1);
    let mut t = (-p).exp();
    for k in 0..=kmax {
        out.push(t);
        t *= p / (k as f64 + 1.0);
    }
    out
}

/// COM-Poisson pmf values, normalizer by direct linear-domain summation.
pub fn com_poisson_pmf_closed(p: f64, s: f64, kmax: u64) -> Vec<f64> {
    let mut terms = Vec::new();
    let mut t = 1.0_f64;
    let mut z = 0.0_f64;
    let mut k = 0u64;
    loop {
        terms.push(t);
        z += t;
        t *= p / (k as f64 + 1.0).powf(s);
        k += 1;
        if (t < z * 1e-18 && k > kmax) || k > 500_000 {
            break;
        }
    }
    (0..=kmax)
        .map(|k| terms.get(k as usize).copied().unwrap_or(0.0) / z)
        .collect()
}

/// Draws a valid parameter point (nu, p, alpha, beta) with alpha > beta and
/// p inside the practical restriction p <= 10^(alpha-beta) (capped).
pub fn random_valid_point(rng: &mut ChaCha8Rng) -> (f64, f64, f64, f64) {
    let nu: f64 = rng.random_range(0.2..5.0);
    let gap: f64 = rng.random_range(0.2..3.0);
    let beta: f64 = rng.random_range(-2.0..2.0);
    let alpha = beta + gap;
    let frac: f64 = rng.random_range(0.05..0.9);
    let p = frac * 10f64.powf(gap).min(30.0);
    (nu, p, alpha, beta)
}

