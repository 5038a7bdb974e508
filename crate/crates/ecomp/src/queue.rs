//! Single-server birth-death queue with state-dependent rates
//! λ_k = (ν + k)^β λ and μ_k = k^α μ, whose steady state is the
//! ECOMP(ν, λ/μ, α, β) distribution.
//!
//! Two routes to the stationary distribution are provided: an exact
//! product-form solve on a truncated state space, and a Gillespie-style
//! event simulation of the continuous-time chain.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dist::{Ecomp, EcompParams};
use crate::error::{Error, Result};
use crate::series::ConvergenceConfig;

/// Fraction of the horizon discarded before occupancy is recorded.
const DEFAULT_BURN_IN: f64 = 0.2;

/// Absolute ceiling on the simulated state space.
const HARD_STATE_CAP: usize = 1_000_000;

/// Queue specification. The induced parameter point (ν, p = λ/μ, α, β) must
/// lie in the ECOMP parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueSpec {
    lambda: f64,
    mu: f64,
    nu: f64,
    alpha: f64,
    beta: f64,
    state_cap: usize,
}

impl QueueSpec {
    /// Builds a spec, validating the induced distribution. With
    /// `state_cap = None` the cap defaults to the smallest state whose
    /// survival probability is below 1e−10, bounded by 1e5.
    pub fn new(
        lambda: f64,
        mu: f64,
        nu: f64,
        alpha: f64,
        beta: f64,
        state_cap: Option<usize>,
    ) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 || !mu.is_finite() || mu <= 0.0 {
            return Err(Error::InvalidParameterSpace(format!(
                "queue rates must be positive and finite, got lambda = {lambda}, mu = {mu}"
            )));
        }
        let params = EcompParams::new(nu, lambda / mu, alpha, beta)?;
        let cap = match state_cap {
            Some(c) => {
                if c < 10 {
                    return Err(Error::InvalidParameterSpace(format!(
                        "state cap must be at least 10, got {c}"
                    )));
                }
                c
            }
            None => {
                let dist = Ecomp::from_params(params)?;
                let mut cum = 0.0;
                let mut cap = 100_000;
                for (k, pk) in dist.pmf_iter() {
                    cum += pk;
                    if 1.0 - cum < 1e-10 {
                        cap = (k as usize + 1).max(10);
                        break;
                    }
                    if k >= 100_000 {
                        break;
                    }
                }
                cap.min(100_000)
            }
        };
        Ok(QueueSpec {
            lambda,
            mu,
            nu,
            alpha,
            beta,
            state_cap: cap,
        })
    }

    pub fn state_cap(&self) -> usize {
        self.state_cap
    }

    pub fn traffic_intensity(&self) -> f64 {
        self.lambda / self.mu
    }

    /// The ECOMP parameter point this queue induces.
    pub fn induced_params(&self) -> EcompParams {
        EcompParams::new(self.nu, self.lambda / self.mu, self.alpha, self.beta)
            .expect("validated at construction")
    }

    /// State-dependent arrival and service rates at state k: arrivals occur
    /// at (ν+k)^β λ for every k ≥ 0; service occurs at k^α μ for k ≥ 1 and
    /// is 0 in the empty state.
    pub fn rates(&self, k: u64) -> (f64, f64) {
        let arrival = (self.nu + k as f64).powf(self.beta) * self.lambda;
        let service = if k == 0 {
            0.0
        } else {
            (k as f64).powf(self.alpha) * self.mu
        };
        (arrival, service)
    }

    /// Exact stationary distribution on states 0..=state_cap from the
    /// product-form balance recursion π_{k+1} = π_k λ_k / μ_{k+1},
    /// normalized. Accumulated in the log domain.
    pub fn solve_truncated(&self) -> SteadyStateEstimate {
        let n = self.state_cap + 1;
        let mut log_pi = Vec::with_capacity(n);
        let mut cur = 0.0_f64;
        log_pi.push(cur);
        for k in 0..self.state_cap as u64 {
            let (arr, _) = self.rates(k);
            let (_, svc_next) = self.rates(k + 1);
            cur += (arr / svc_next).ln();
            log_pi.push(cur);
        }
        let max = log_pi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = log_pi.iter().map(|&l| (l - max).exp()).sum();
        let occupancy: Vec<f64> = log_pi.iter().map(|&l| (l - max).exp() / total).collect();

        // Per-state detailed-balance residual of the normalized solution,
        // relative to the probability flow (the absolute flow scales with
        // the polynomially growing rates).
        let mut residual = 0.0_f64;
        for k in 0..self.state_cap as u64 {
            let (arr, _) = self.rates(k);
            let (_, svc_next) = self.rates(k + 1);
            let flow = occupancy[k as usize] * arr;
            if flow > 0.0 {
                let r = (flow - occupancy[k as usize + 1] * svc_next).abs() / flow;
                residual = residual.max(r);
            }
        }
        SteadyStateEstimate {
            occupancy,
            method: SteadyStateMethod::ExactTruncated {
                max_balance_residual: residual,
            },
        }
    }

    /// Event-by-event simulation of the continuous-time chain. Occupancy is
    /// time-weighted over the portion of the horizon after a 20% burn-in.
    /// Deterministic for a given seed (ChaCha8).
    ///
    /// The recorded state range grows beyond `state_cap` if the chain
    /// wanders higher, up to a hard limit, after which the simulation fails.
    pub fn simulate_ctmc(&self, horizon: f64, seed: u64) -> Result<SteadyStateEstimate> {
        if !horizon.is_finite() || horizon <= 0.0 {
            return Err(Error::Domain(format!(
                "simulation horizon must be positive and finite, got {horizon}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let burn_end = DEFAULT_BURN_IN * horizon;
        let mut weights = vec![0.0_f64; self.state_cap + 1];
        let mut state = 0u64;
        let mut t = 0.0_f64;
        while t < horizon {
            let (arr, svc) = self.rates(state);
            let total = arr + svc;
            // Exponential holding time at the current state.
            let u: f64 = rng.random();
            let dt = -(1.0 - u).ln() / total;
            let leave = (t + dt).min(horizon);
            // Credit time past the burn-in to the current state.
            let credited = (leave - t.max(burn_end)).max(0.0);
            if credited > 0.0 {
                if state as usize >= weights.len() {
                    if state as usize >= HARD_STATE_CAP {
                        return Err(Error::StateCapExceeded {
                            cap: HARD_STATE_CAP,
                        });
                    }
                    weights.resize(state as usize + 1, 0.0);
                }
                weights[state as usize] += credited;
            }
            t += dt;
            if t >= horizon {
                break;
            }
            let up: f64 = rng.random();
            if up * total < arr {
                state += 1;
                if state as usize >= HARD_STATE_CAP {
                    return Err(Error::StateCapExceeded {
                        cap: HARD_STATE_CAP,
                    });
                }
            } else {
                state -= 1;
            }
        }
        let total_time: f64 = weights.iter().sum();
        if total_time <= 0.0 {
            return Err(Error::Domain(
                "simulation horizon too short: no time observed past burn-in".into(),
            ));
        }
        let occupancy = weights.iter().map(|w| w / total_time).collect();
        Ok(SteadyStateEstimate {
            occupancy,
            method: SteadyStateMethod::SimulatedCtmc {
                sim_time: total_time,
            },
        })
    }

    /// The stationary occupancy predicted by the distribution itself,
    /// renormalized on 0..=state_cap.
    pub fn analytic_occupancy(&self, cfg: &ConvergenceConfig) -> Result<Vec<f64>> {
        let dist = Ecomp::with_config(self.induced_params(), *cfg)?;
        let mut probs: Vec<f64> = Vec::with_capacity(self.state_cap + 1);
        for (k, pk) in dist.pmf_iter() {
            probs.push(pk);
            if k as usize == self.state_cap {
                break;
            }
        }
        let total: f64 = probs.iter().sum();
        Ok(probs.into_iter().map(|p| p / total).collect())
    }
}

/// How a steady-state estimate was produced, with its quality measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SteadyStateMethod {
    /// Product-form balance solve; carries the largest relative
    /// detailed-balance residual across adjacent state pairs.
    ExactTruncated { max_balance_residual: f64 },
    /// Event simulation; carries the time observed past burn-in.
    SimulatedCtmc { sim_time: f64 },
}

/// Stationary (or long-run empirical) occupancy over states 0..cap.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateEstimate {
    pub occupancy: Vec<f64>,
    pub method: SteadyStateMethod,
}

impl SteadyStateEstimate {
    /// Total variation distance to another occupancy vector; shorter
    /// vectors are zero-padded.
    pub fn total_variation(&self, other: &[f64]) -> f64 {
        let n = self.occupancy.len().max(other.len());
        let mut tv = 0.0;
        for i in 0..n {
            let a = self.occupancy.get(i).copied().unwrap_or(0.0);
            let b = other.get(i).copied().unwrap_or(0.0);
            tv += (a - b).abs();
        }
        tv / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_examples() {
        let q = QueueSpec::new(2.0, 1.0, 2.0, 3.0, 2.0, Some(50)).unwrap();
        let (a0, s0) = q.rates(0);
        assert_eq!(s0, 0.0);
        assert!((a0 - 4.0 * 2.0).abs() < 1e-12); // ν^β λ = 4λ
        let (a3, s3) = q.rates(3);
        assert!((a3 - 25.0 * 2.0).abs() < 1e-12);
        assert!((s3 - 27.0).abs() < 1e-12);

        // ν=1, β=0, α=1: constant arrivals, linear service
        let q = QueueSpec::new(1.5, 1.0, 1.0, 1.0, 0.0, Some(50)).unwrap();
        for k in 1..5 {
            let (a, s) = q.rates(k);
            assert!((a - 1.5).abs() < 1e-12);
            assert!((s - k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(QueueSpec::new(0.0, 1.0, 1.0, 1.0, 0.0, None).is_err());
        assert!(QueueSpec::new(1.0, 1.0, 1.0, 1.0, 1.0, None).is_err()); // p = 1 on diagonal
        assert!(QueueSpec::new(1.0, 2.0, 1.0, 1.0, 0.0, Some(3)).is_err()); // cap too small
    }

    #[test]
    fn truncated_solve_is_poisson_for_linear_service() {
        let q = QueueSpec::new(0.5, 1.0, 1.0, 1.0, 0.0, Some(60)).unwrap();
        let est = q.solve_truncated();
        let pois = Ecomp::poisson(0.5).unwrap();
        for k in 0..20u64 {
            let want = pois.pmf(k);
            assert!((est.occupancy[k as usize] - want).abs() < 1e-12);
        }
        match est.method {
            SteadyStateMethod::ExactTruncated {
                max_balance_residual,
            } => assert!(max_balance_residual < 1e-12),
            _ => panic!(),
        }
    }

    #[test]
    fn truncated_solve_mode_and_ratio() {
        let q = QueueSpec::new(2.0, 1.0, 2.0, 3.0, 2.0, Some(80)).unwrap();
        let est = q.solve_truncated();
        let argmax = est
            .occupancy
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k)
            .unwrap();
        assert_eq!(argmax, 3);
        // occupancy(k+1)/occupancy(k) = p (ν+k)^β / (k+1)^α
        let p = q.traffic_intensity();
        for k in 0..20usize {
            let want = p * (2.0 + k as f64).powi(2) / (k as f64 + 1.0).powi(3);
            let got = est.occupancy[k + 1] / est.occupancy[k];
            assert!((got / want - 1.0).abs() < 1e-11, "k = {k}");
        }
    }

    #[test]
    fn truncated_solve_matches_analytic_pmf() {
        let q = QueueSpec::new(2.0, 1.0, 2.0, 3.0, 2.0, None).unwrap();
        let est = q.solve_truncated();
        let analytic = q.analytic_occupancy(&ConvergenceConfig::default()).unwrap();
        assert!(est.total_variation(&analytic) < 1e-10);
    }

    #[test]
    fn simulation_reproducible_and_converging() {
        let q = QueueSpec::new(2.0, 1.0, 2.0, 3.0, 2.0, None).unwrap();
        let a = q.simulate_ctmc(5e3, 7).unwrap();
        let b = q.simulate_ctmc(5e3, 7).unwrap();
        assert_eq!(a.occupancy, b.occupancy);

        let exact = q.solve_truncated();
        let tv = a.total_variation(&exact.occupancy);
        assert!(tv < 0.05, "tv = {tv}");
    }

    #[test]
    fn simulation_mean_matches_poisson_steady_state() {
        // ν=1, β=0, α=1 is the infinite-server analogue: stationary mean p.
        let q = QueueSpec::new(3.0, 1.0, 1.0, 1.0, 0.0, None).unwrap();
        let est = q.simulate_ctmc(2e4, 11).unwrap();
        let mean: f64 = est
            .occupancy
            .iter()
            .enumerate()
            .map(|(k, w)| k as f64 * w)
            .sum();
        assert!((mean - 3.0).abs() < 0.1, "mean = {mean}");
    }
}
