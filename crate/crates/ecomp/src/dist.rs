//! The ECOMP(ν, p, α, β) distribution: parameter validation, pmf / cdf /
//! survival / hazard, moments, mode structure, dispersion classification,
//! and constructors for the named special cases.
//!
//! The pmf is P(X = k) ∝ {(ν)_k}^β p^k / (k!)^α on k = 0, 1, 2, …, with the
//! normalizing constant evaluated by [`crate::series`].

use crate::error::{Error, Result};
use crate::series::{self, ConvergenceConfig, LogNormalizer, SeriesSpec};
use crate::special::{ln_gamma, ln_pochhammer_unchecked};

/// Validated parameter quadruple (ν, p, α, β).
///
/// The parameter space is {ν > 0, p > 0, α > β} ∪ {ν > 0, 0 < p < 1, α = β}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcompParams {
    nu: f64,
    p: f64,
    alpha: f64,
    beta: f64,
}

impl EcompParams {
    pub fn new(nu: f64, p: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !nu.is_finite() || !p.is_finite() || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParameterSpace(format!(
                "parameters must be finite, got nu = {nu}, p = {p}, alpha = {alpha}, beta = {beta}"
            )));
        }
        if nu <= 0.0 {
            return Err(Error::InvalidParameterSpace(format!(
                "nu must be > 0, got nu = {nu} (nu = 0 degenerates to a point mass at zero)"
            )));
        }
        if p <= 0.0 {
            return Err(Error::InvalidParameterSpace(format!("p must be > 0, got p = {p}")));
        }
        if alpha < beta {
            return Err(Error::InvalidParameterSpace(format!(
                "alpha >= beta is required, got alpha = {alpha} < beta = {beta}"
            )));
        }
        if alpha == beta && p >= 1.0 {
            return Err(Error::InvalidParameterSpace(format!(
                "alpha = beta requires 0 < p < 1, got p = {p}"
            )));
        }
        Ok(EcompParams { nu, p, alpha, beta })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Dispersion classification against the Poisson, COM-Poisson, and
    /// GCOM-Poisson baselines.
    ///
    /// Points on no stated region map to `Undetermined` rather than being
    /// extrapolated.
    pub fn dispersion_class(&self) -> DispersionClass {
        let (a, b) = (self.alpha, self.beta);
        let is_poisson = (b == 0.0 && a == 1.0) || (self.nu == 1.0 && a == b);
        let vs_poisson = if is_poisson {
            Dispersion::Equi
        } else if b > 0.0 && b <= a && a <= 1.0 {
            Dispersion::Over
        } else if (a <= 1.0 && b < 0.0) || (a > 1.0 && b > 0.0) || (a > 1.0 && b < 0.0) {
            Dispersion::Under
        } else {
            Dispersion::Undetermined
        };
        let vs_com_poisson = if b == 0.0 {
            Dispersion::Equi
        } else if b > 0.0 {
            // a >= b > 0 always holds inside the parameter space
            Dispersion::Over
        } else {
            Dispersion::Under
        };
        let vs_gcom_poisson = if a == 1.0 {
            Dispersion::Equi
        } else if a < 1.0 {
            // b <= a < 1
            Dispersion::Over
        } else if b > 1.0 {
            Dispersion::Under
        } else {
            Dispersion::Undetermined
        };
        DispersionClass {
            vs_poisson,
            vs_com_poisson,
            vs_gcom_poisson,
        }
    }
}

impl std::fmt::Display for EcompParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "ECOMP(nu = {}, p = {}, alpha = {}, beta = {})",
            self.nu, self.p, self.alpha, self.beta
        )
    }
}

/// Variance relative to a baseline distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dispersion {
    Over,
    Under,
    Equi,
    Undetermined,
}

/// Dispersion of an ECOMP parameter point against the three baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DispersionClass {
    pub vs_poisson: Dispersion,
    pub vs_com_poisson: Dispersion,
    pub vs_gcom_poisson: Dispersion,
}

/// Mode structure of a pmf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeInfo {
    /// One mode, or two adjacent modes, sorted ascending.
    pub modes: Vec<u64>,
    pub kind: ModeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    UniqueAtZero,
    UniqueInterior,
    Dual,
}

/// Mean and variance; `approximate` is set when the normalizer was only
/// available through the asymptotic formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub approximate: bool,
}

/// Relative tolerance for detecting the dual-mode equality
/// (ν+k−1)^β p = k^α; exact float equality is measure zero.
const DUAL_MODE_REL_TOL: f64 = 1e-9;

/// An ECOMP distribution with its normalizing constant evaluated and cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecomp {
    params: EcompParams,
    cfg: ConvergenceConfig,
    log_norm: LogNormalizer,
}

impl Ecomp {
    pub fn new(nu: f64, p: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::from_params(EcompParams::new(nu, p, alpha, beta)?)
    }

    pub fn from_params(params: EcompParams) -> Result<Self> {
        Self::with_config(params, ConvergenceConfig::default())
    }

    pub fn with_config(params: EcompParams, cfg: ConvergenceConfig) -> Result<Self> {
        let log_norm = series::log_normalizer(&params, &cfg)?;
        Ok(Ecomp {
            params,
            cfg,
            log_norm,
        })
    }

    // --- special-case constructors -------------------------------------

    /// Poisson(p): ν = 1, β = 0, α = 1.
    pub fn poisson(p: f64) -> Result<Self> {
        Self::new(1.0, p, 1.0, 0.0)
    }

    /// Negative binomial NB(ν, p): α = β = 1, requires 0 < p < 1.
    pub fn negative_binomial(nu: f64, p: f64) -> Result<Self> {
        Self::new(nu, p, 1.0, 1.0)
    }

    /// COM-Poisson(p, s): ν = 1, β = 0, α = s.
    pub fn com_poisson(p: f64, s: f64) -> Result<Self> {
        Self::new(1.0, p, s, 0.0)
    }

    /// COM-negative-binomial(ν, p, α): β = 1.
    pub fn com_negative_binomial(nu: f64, p: f64, alpha: f64) -> Result<Self> {
        Self::new(nu, p, alpha, 1.0)
    }

    /// GCOM-Poisson(ν, p, β): α = 1.
    pub fn gcom_poisson(nu: f64, p: f64, beta: f64) -> Result<Self> {
        Self::new(nu, p, 1.0, beta)
    }

    /// The γ-generalized negative binomial: α = β = γ, requires 0 < p < 1.
    pub fn ngnb(nu: f64, gamma: f64, p: f64) -> Result<Self> {
        Self::new(nu, p, gamma, gamma)
    }

    /// Exponential combination of NB(ν, λ) and COM-Poisson(μ, θ) with
    /// weight β: the result is ECOMP(ν, λ^β μ^{1−β}, θ(1−β) + β, β).
    pub fn exponential_combination(
        nu: f64,
        nb_lambda: f64,
        comp_mu: f64,
        comp_theta: f64,
        beta: f64,
    ) -> Result<Self> {
        if !nb_lambda.is_finite() || nb_lambda <= 0.0 || !comp_mu.is_finite() || comp_mu <= 0.0 {
            return Err(Error::InvalidParameterSpace(format!(
                "exponential combination requires lambda > 0 and mu > 0, got lambda = {nb_lambda}, mu = {comp_mu}"
            )));
        }
        let p = nb_lambda.powf(beta) * comp_mu.powf(1.0 - beta);
        let alpha = comp_theta * (1.0 - beta) + beta;
        Self::new(nu, p, alpha, beta)
    }

    // --- accessors ------------------------------------------------------

    pub fn params(&self) -> &EcompParams {
        &self.params
    }

    pub fn config(&self) -> &ConvergenceConfig {
        &self.cfg
    }

    pub fn log_normalizer(&self) -> &LogNormalizer {
        &self.log_norm
    }

    // --- pmf ------------------------------------------------------------

    /// Natural log of P(X = k) = β log (ν)_k − α log k! + k log p − log S.
    pub fn ln_pmf(&self, k: u64) -> f64 {
        let EcompParams { nu, p, alpha, beta } = self.params;
        beta * ln_pochhammer_unchecked(nu, k) - alpha * ln_gamma(k as f64 + 1.0)
            + k as f64 * p.ln()
            - self.log_norm.log_value
    }

    pub fn pmf(&self, k: u64) -> f64 {
        self.ln_pmf(k).exp()
    }

    /// The recurrence multiplier P(X = k+1)/P(X = k) = p (ν+k)^β / (k+1)^α.
    pub fn pmf_ratio(&self, k: u64) -> f64 {
        let EcompParams { nu, p, alpha, beta } = self.params;
        let kf = k as f64;
        (p.ln() + beta * (nu + kf).ln() - alpha * (kf + 1.0).ln()).exp()
    }

    /// One step of the probability recurrence: given pk = P(X = k), returns
    /// P(X = k+1).
    pub fn pmf_recurrence_step(&self, k: u64, pk: f64) -> f64 {
        pk * self.pmf_ratio(k)
    }

    // --- cdf / survival / hazard ----------------------------------------

    /// P(X ≤ t), accumulated through the recurrence in the linear domain.
    pub fn cdf(&self, t: u64) -> f64 {
        let mut sum = 0.0;
        for (k, pk) in self.pmf_iter() {
            sum += pk;
            if k == t {
                break;
            }
        }
        sum.min(1.0)
    }

    /// P(X ≥ t) = 1 − cdf(t − 1), with the deep tail summed directly so the
    /// value stays accurate when the complement would cancel.
    pub fn survival(&self, t: u64) -> f64 {
        if t == 0 {
            return 1.0;
        }
        let below = self.cdf(t - 1);
        if below <= 0.5 {
            return 1.0 - below;
        }
        (self.pmf(t) * self.tail_factor(t)).min(1.0)
    }

    /// Failure rate r(t) = P(X = t) / P(X ≥ t). Computed from the tail sum
    /// relative to P(X = t), which stays finite even where the pmf
    /// underflows.
    pub fn hazard(&self, t: u64) -> f64 {
        1.0 / self.tail_factor(t)
    }

    /// Σ_{k ≥ t} P(k) / P(t), via cumulative products of the term ratio.
    fn tail_factor(&self, t: u64) -> f64 {
        let mut total = 0.0_f64;
        let mut term = 1.0_f64;
        let mut j = 0u64;
        loop {
            total += term;
            let ratio = self.pmf_ratio(t + j);
            term *= ratio;
            j += 1;
            if (ratio < 1.0 && term < 1e-17 * total)
                || total >= 1e300
                || j as usize >= self.cfg.max_terms
            {
                break;
            }
        }
        total
    }

    // --- moments ----------------------------------------------------------

    /// Mean and variance by direct series accumulation. When the normalizer
    /// is only available asymptotically, the approximate mean and its
    /// derivative in log p are returned instead, flagged `approximate`.
    pub fn mean_variance(&self) -> Moments {
        if self.log_norm.is_asymptotic() {
            let gap = self.params.alpha - self.params.beta;
            let mean = series::approx_mean(&self.params).expect("asymptotic requires alpha > beta");
            let variance = self.params.p.powf(1.0 / gap) / gap;
            return Moments {
                mean,
                variance,
                approximate: true,
            };
        }
        let (mut s0, mut s1, mut s2) = (0.0_f64, 0.0_f64, 0.0_f64);
        let mut prev_ratio = f64::INFINITY;
        // On the diagonal the ratio may climb toward p < 1; the geometric
        // bound must then use p as the supremum of the remaining ratios.
        let diagonal = self.params.alpha == self.params.beta;
        let limit_ratio = if diagonal { self.params.p } else { 0.0 };
        for (k, pk) in self.pmf_iter() {
            let kf = k as f64;
            s0 += pk;
            s1 += kf * pk;
            s2 += kf * kf * pk;
            let ratio = self.pmf_ratio(k);
            if ratio < 1.0 && (ratio <= prev_ratio || diagonal) && k > 0 {
                // Geometric bounds on the remaining weighted tails.
                let e = ratio.max(limit_ratio);
                let g0 = e / (1.0 - e);
                let g1 = e / ((1.0 - e) * (1.0 - e));
                let g2 = e * (1.0 + e) / ((1.0 - e) * (1.0 - e) * (1.0 - e));
                let tail2 = pk * (kf * kf * g0 + 2.0 * kf * g1 + g2);
                if tail2 <= 1e-13 * s2.max(1e-300) && pk * g0 <= 1e-13 {
                    break;
                }
            }
            prev_ratio = ratio;
            if k as usize >= self.cfg.max_terms {
                break;
            }
        }
        let mean = s1 / s0;
        Moments {
            mean,
            variance: s2 / s0 - mean * mean,
            approximate: false,
        }
    }

    /// r-th factorial moment E[X (X−1) ⋯ (X−r+1)], r ≥ 1, through the
    /// shifted-series identity
    /// μ[r] = {(ν)_r}^β p^r S(ν+r; r+1; p) / ((r!)^{α−1} S(ν; 1; p)).
    pub fn factorial_moment(&self, r: u32) -> Result<f64> {
        if r == 0 {
            return Err(Error::Domain("factorial moment order must be >= 1".into()));
        }
        let EcompParams { nu, p, alpha, beta } = self.params;
        let shifted = SeriesSpec {
            upper: nu + r as f64,
            extras: Vec::new(),
            lower: r as f64 + 1.0,
            alpha: alpha - 1.0,
            beta,
            p,
        };
        let num = series::log_series_truncated(&shifted, &self.cfg)?;
        let log_m = beta * ln_pochhammer_unchecked(nu, r as u64) + r as f64 * p.ln()
            + num.log_value
            - (alpha - 1.0) * ln_gamma(r as f64 + 1.0)
            - self.log_norm.log_value;
        Ok(log_m.exp())
    }

    // --- mode structure ---------------------------------------------------

    /// Location of the pmf's mode(s).
    ///
    /// For ν ≥ 1 the pmf is log-concave and the closed-form ratio criteria
    /// apply; the walk below finds where the recurrence ratio crosses 1.
    /// For 0 < ν < 1 the pmf may be bimodal with one local maximum pinned at
    /// zero, so an exhaustive scan of the pmf is used instead.
    pub fn mode_structure(&self) -> ModeInfo {
        if self.params.nu >= 1.0 {
            self.mode_by_ratio_walk()
        } else {
            self.mode_by_scan()
        }
    }

    fn mode_by_ratio_walk(&self) -> ModeInfo {
        let mut k = 0u64;
        loop {
            let ratio = self.pmf_ratio(k);
            if (ratio - 1.0).abs() <= DUAL_MODE_REL_TOL {
                return ModeInfo {
                    modes: vec![k, k + 1],
                    kind: ModeKind::Dual,
                };
            }
            if ratio < 1.0 {
                return if k == 0 {
                    ModeInfo {
                        modes: vec![0],
                        kind: ModeKind::UniqueAtZero,
                    }
                } else {
                    ModeInfo {
                        modes: vec![k],
                        kind: ModeKind::UniqueInterior,
                    }
                };
            }
            k += 1;
            if k as usize > self.cfg.max_terms {
                // Far beyond any practical support; fall back to the scan.
                return self.mode_by_scan();
            }
        }
    }

    fn mode_by_scan(&self) -> ModeInfo {
        let mut best_k = 0u64;
        let mut best_p = f64::NEG_INFINITY;
        let mut cum = 0.0;
        let mut last_k = 0u64;
        for (k, pk) in self.pmf_iter() {
            if pk > best_p {
                best_p = pk;
                best_k = k;
            }
            cum += pk;
            last_k = k;
            if cum >= 1.0 - 1e-12 || k as usize >= self.cfg.max_terms {
                break;
            }
        }
        let _ = last_k;
        // Adjacent near-ties become a dual mode.
        let mut modes = vec![best_k];
        for neighbor in [best_k.checked_sub(1), Some(best_k + 1)].into_iter().flatten() {
            let pn = self.pmf(neighbor);
            if ((pn - best_p) / best_p).abs() <= DUAL_MODE_REL_TOL {
                modes.push(neighbor);
            }
        }
        modes.sort_unstable();
        modes.dedup();
        let kind = if modes.len() == 2 {
            ModeKind::Dual
        } else if modes == [0] {
            ModeKind::UniqueAtZero
        } else {
            ModeKind::UniqueInterior
        };
        ModeInfo { modes, kind }
    }

    // --- internal pmf iteration -------------------------------------------

    /// Iterator over (k, P(X = k)) driven by the recurrence, re-anchored to
    /// the log pmf every block so that multiplicative drift stays bounded
    /// and underflowed starts recover.
    pub(crate) fn pmf_iter(&self) -> PmfIter<'_> {
        PmfIter {
            dist: self,
            k: 0,
            pk: self.ln_pmf(0).exp(),
        }
    }
}

const PMF_ITER_ANCHOR_BLOCK: u64 = 1024;

pub(crate) struct PmfIter<'a> {
    dist: &'a Ecomp,
    k: u64,
    pk: f64,
}

impl Iterator for PmfIter<'_> {
    type Item = (u64, f64);

    fn next(&mut self) -> Option<(u64, f64)> {
        let out = (self.k, self.pk);
        let next_k = self.k + 1;
        self.pk = if next_k.is_multiple_of(PMF_ITER_ANCHOR_BLOCK) || self.pk == 0.0 {
            self.dist.ln_pmf(next_k).exp()
        } else {
            self.pk * self.dist.pmf_ratio(self.k)
        };
        self.k = next_k;
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn validation_examples() {
        assert!(EcompParams::new(2.0, 0.5, 1.0, 1.0).is_ok());
        assert!(matches!(
            EcompParams::new(2.0, 1.5, 1.0, 1.0),
            Err(Error::InvalidParameterSpace(_))
        ));
        assert!(EcompParams::new(2.86, 1.26, -1.07, -1.13).is_ok());
        assert!(EcompParams::new(0.0, 0.5, 1.0, 0.0).is_err());
        assert!(EcompParams::new(1.0, 0.5, 0.5, 1.0).is_err());
        assert!(EcompParams::new(1.0, f64::NAN, 1.0, 0.0).is_err());
    }

    #[test]
    fn ln_pmf_poisson_reduction() {
        let d = Ecomp::new(1.0, 0.5, 1.0, 0.0).unwrap();
        let want = (0.5f64 * (-0.5f64).exp()).ln();
        assert!((d.ln_pmf(1) - want).abs() < 1e-13);
    }

    #[test]
    fn ln_pmf_negative_binomial_reduction() {
        // NB(2, 0.5): P(1) = (2)_1 · 0.5 · (1 − 0.5)^2 = 0.25
        let d = Ecomp::negative_binomial(2.0, 0.5).unwrap();
        assert!((d.ln_pmf(1) - 0.25f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn ln_pmf_fitted_count_zero_scale() {
        // At the rounded Corbet estimates the zero-count cell is close to
        // the fitted value 304.97/924 (rounding of the estimates moves it a
        // few counts).
        let d = Ecomp::new(2.86, 1.26, -1.07, -1.13).unwrap();
        let expected0 = 924.0 * d.pmf(0);
        assert!(
            (expected0 - 304.97).abs() < 10.0,
            "924 * pmf(0) = {expected0}"
        );
    }

    #[test]
    fn recurrence_examples() {
        let d = Ecomp::poisson(0.7).unwrap();
        for k in 0..5 {
            assert!((d.pmf_ratio(k) - 0.7 / (k as f64 + 1.0)).abs() < 1e-14);
        }
        let d = Ecomp::new(2.0, 2.0, 3.0, 2.0).unwrap();
        assert!((d.pmf_ratio(2) - 2.0 * 16.0 / 27.0).abs() < 1e-13);
    }

    #[test]
    fn recurrence_chain_matches_direct_log_pmf() {
        let d = Ecomp::new(0.5, 1.2, 2.8, 2.5).unwrap();
        let mut pk = d.pmf(0);
        for k in 0..50 {
            pk = d.pmf_recurrence_step(k, pk);
        }
        let direct = d.pmf(50);
        assert!(
            ((pk - direct) / direct).abs() < 1e-12,
            "chained {pk} vs direct {direct}"
        );
    }

    #[test]
    fn survival_and_hazard_basics() {
        let d = Ecomp::new(2.0, 1.5, 3.0, 2.0).unwrap();
        assert_eq!(d.survival(0), 1.0);
        assert!((d.hazard(0) - d.pmf(0)).abs() < 1e-13);

        // NB(2, 0.5): survival(1) = 1 − P(0) = 0.75
        let nb = Ecomp::negative_binomial(2.0, 0.5).unwrap();
        assert!((nb.survival(1) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn hazard_nondecreasing_for_log_concave_case() {
        let d = Ecomp::new(2.0, 1.5, 3.0, 2.0).unwrap();
        let mut prev = 0.0;
        for t in 0..=100 {
            let h = d.hazard(t);
            assert!(h >= prev - 1e-12, "hazard dipped at t = {t}: {h} < {prev}");
            prev = h;
        }
    }

    #[test]
    fn hazard_matches_shifted_series_identity() {
        // The tail relative to P(t) is the two-upper-parameter series
        // Σ_j {(ν+t)_j}^β (1)_j p^j / ({(t+1)_j}^α j!) — the (1)_j cancels
        // the j! and leaves {(t+1)_j}^α — so the failure rate is its
        // reciprocal.
        let d = Ecomp::new(0.8, 1.3, 2.4, 1.1).unwrap();
        for t in [0u64, 1, 2, 5, 9] {
            let spec = SeriesSpec {
                upper: d.params().nu() + t as f64,
                extras: vec![1.0],
                lower: t as f64 + 1.0,
                alpha: d.params().alpha(),
                beta: d.params().beta(),
                p: d.params().p(),
            };
            let tail = series::log_series_truncated(&spec, d.config()).unwrap();
            let want = (-tail.log_value).exp();
            let got = d.hazard(t);
            assert!(
                ((got - want) / want).abs() < 1e-11,
                "t = {t}: hazard {got} vs series route {want}"
            );
        }
    }

    #[test]
    fn cdf_plus_tail_survival_consistent() {
        let d = Ecomp::new(2.0, 2.0, 3.0, 2.0).unwrap();
        for t in 1..30u64 {
            let s = d.survival(t);
            let c = d.cdf(t - 1);
            assert!((s + c - 1.0).abs() < 1e-11, "t = {t}");
        }
    }

    #[test]
    fn factorial_moment_reductions() {
        // NB(2, 0.5): mean = ν p / (1 − p) = 2
        let nb = Ecomp::negative_binomial(2.0, 0.5).unwrap();
        assert!((nb.factorial_moment(1).unwrap() - 2.0).abs() < 1e-11);
        // Poisson(0.7): μ[2] = p² = 0.49
        let pois = Ecomp::poisson(0.7).unwrap();
        assert!((pois.factorial_moment(2).unwrap() - 0.49).abs() < 1e-12);
        assert!(pois.factorial_moment(0).is_err());
    }

    #[test]
    fn factorial_moment_matches_direct_sum() {
        let d = Ecomp::new(0.5, 1.2, 2.8, 2.5).unwrap();
        let m1 = d.factorial_moment(1).unwrap();
        // 40-digit reference for the same point: 0.6607054881824044
        assert!((m1 - 0.6607054881824044).abs() < 1e-12, "m1 = {m1}");
        let direct: f64 = d.pmf_iter().take(400).map(|(k, pk)| k as f64 * pk).sum();
        assert!(((m1 - direct) / direct).abs() < 1e-10);
    }

    #[test]
    fn mean_variance_reductions() {
        let pois = Ecomp::poisson(0.5).unwrap();
        let m = pois.mean_variance();
        assert!((m.mean - 0.5).abs() < 1e-12);
        assert!((m.variance - 0.5).abs() < 1e-12);
        assert!(!m.approximate);

        let nb = Ecomp::negative_binomial(2.0, 0.5).unwrap();
        let m = nb.mean_variance();
        assert!((m.mean - 2.0).abs() < 1e-11);
        assert!((m.variance - 4.0).abs() < 1e-10);
    }

    #[test]
    fn mean_variance_asymptotic_flagged() {
        let d = Ecomp::new(1.5, 3.0, 3.1, 3.0).unwrap();
        assert!(d.log_normalizer().is_asymptotic());
        let m = d.mean_variance();
        assert!(m.approximate);
        // approx mean = p^10 + (1 − 3.1 + 2·2·3)/(2·0.1) hand-checked
        let want = 3f64.powi(10) + (1.0 - 3.1 + 2.0 * 3.0) / 0.2;
        assert!((m.mean - want).abs() < 1e-9 * want);
        assert!((m.variance - 3f64.powi(10) / 0.1).abs() < 1e-9 * m.variance);
    }

    #[test]
    fn mode_structure_worked_examples() {
        // ν=2, α=3, β=2: p < 0.25 gives a unique mode at zero
        let d = Ecomp::new(2.0, 0.2, 3.0, 2.0).unwrap();
        let m = d.mode_structure();
        assert_eq!(m.kind, ModeKind::UniqueAtZero);
        assert_eq!(m.modes, vec![0]);

        // 1.6875 < p < 2.560 gives a unique mode at 3
        let d = Ecomp::new(2.0, 2.0, 3.0, 2.0).unwrap();
        let m = d.mode_structure();
        assert_eq!(m.kind, ModeKind::UniqueInterior);
        assert_eq!(m.modes, vec![3]);

        // p = 216/49 gives two modes at 5 and 6
        let d = Ecomp::new(2.0, 216.0 / 49.0, 3.0, 2.0).unwrap();
        let m = d.mode_structure();
        assert_eq!(m.kind, ModeKind::Dual);
        assert_eq!(m.modes, vec![5, 6]);

        // boundary of the zero-mode region: p ν^β = 1 puts modes at {0, 1}
        let d = Ecomp::new(2.0, 0.25, 3.0, 2.0).unwrap();
        let m = d.mode_structure();
        assert_eq!(m.kind, ModeKind::Dual);
        assert_eq!(m.modes, vec![0, 1]);
    }

    #[test]
    fn mode_structure_scan_for_small_nu() {
        let d = Ecomp::new(0.5, 1.2, 2.8, 2.5).unwrap();
        let m = d.mode_structure();
        // exhaustive check against a plain argmax
        let (argmax, _) = (0..200u64)
            .map(|k| (k, d.pmf(k)))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        assert!(m.modes.contains(&argmax));
    }

    #[test]
    fn dispersion_examples() {
        let over = EcompParams::new(3.0, 0.5, 1.0, 1.0).unwrap();
        assert_eq!(over.dispersion_class().vs_poisson, Dispersion::Over);

        let under = EcompParams::new(2.0, 1.5, 3.0, 2.0).unwrap();
        assert_eq!(under.dispersion_class().vs_poisson, Dispersion::Under);

        let equi = EcompParams::new(1.0, 0.5, 1.0, 0.0).unwrap();
        assert_eq!(equi.dispersion_class().vs_poisson, Dispersion::Equi);

        // β = 0, α ≠ 1 is on no stated region
        let und = EcompParams::new(1.0, 0.5, 0.5, 0.0).unwrap();
        assert_eq!(und.dispersion_class().vs_poisson, Dispersion::Undetermined);
        assert_eq!(und.dispersion_class().vs_com_poisson, Dispersion::Equi);

        let vs = EcompParams::new(2.0, 1.5, 3.0, 2.0).unwrap().dispersion_class();
        assert_eq!(vs.vs_com_poisson, Dispersion::Over);
        assert_eq!(vs.vs_gcom_poisson, Dispersion::Under);
    }

    #[test]
    fn special_case_embeddings() {
        let nb = Ecomp::negative_binomial(2.0, 0.5).unwrap();
        assert_eq!(
            *nb.params(),
            EcompParams::new(2.0, 0.5, 1.0, 1.0).unwrap()
        );
        let comp = Ecomp::com_poisson(0.8, 2.0).unwrap();
        assert_eq!(
            *comp.params(),
            EcompParams::new(1.0, 0.8, 2.0, 0.0).unwrap()
        );
        // NGNB with γ = 1 is NB
        let ngnb = Ecomp::ngnb(2.0, 1.0, 0.5).unwrap();
        for k in 0..20 {
            assert!((ngnb.ln_pmf(k) - nb.ln_pmf(k)).abs() < 1e-12);
        }
        assert!(Ecomp::negative_binomial(2.0, 1.5).is_err());
    }

    #[test]
    fn exponential_combination_cases() {
        // β = 1 recovers NB(ν, λ)
        let d = Ecomp::exponential_combination(2.0, 0.5, 0.8, 2.0, 1.0).unwrap();
        let nb = Ecomp::negative_binomial(2.0, 0.5).unwrap();
        assert_eq!(d.params(), nb.params());

        // β = 0 recovers COM-Poisson(μ, θ) as a distribution: ν becomes
        // irrelevant, so the parameter tuples differ but the pmfs agree.
        let d = Ecomp::exponential_combination(2.0, 0.5, 0.8, 2.0, 0.0).unwrap();
        let comp = Ecomp::com_poisson(0.8, 2.0).unwrap();
        assert!((d.params().p() - 0.8).abs() < 1e-15);
        assert!((d.params().alpha() - 2.0).abs() < 1e-15);
        for k in 0..20 {
            assert!((d.ln_pmf(k) - comp.ln_pmf(k)).abs() < 1e-12);
        }

        // interior weight: p = √(λμ) = √0.4, α = θ/2 + 1/2 = 1.5
        let d = Ecomp::exponential_combination(2.0, 0.5, 0.8, 2.0, 0.5).unwrap();
        assert!((d.params().p() - 0.4f64.sqrt()).abs() < 1e-15);
        assert!((d.params().alpha() - 1.5).abs() < 1e-15);

        // an induced point outside the space is rejected (α = β with p ≥ 1)
        assert!(Ecomp::exponential_combination(2.0, 3.0, 3.0, 1.0, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn pmf_sums_to_one(
            nu in 0.2f64..4.0,
            gap in 0.3f64..3.0,
            beta in -2.0f64..2.0,
            p_frac in 0.05f64..0.9,
        ) {
            let alpha = beta + gap;
            let p = p_frac * 10f64.powf(gap).min(30.0);
            let d = Ecomp::new(nu, p, alpha, beta).unwrap();
            let mut sum = 0.0;
            for (k, pk) in d.pmf_iter() {
                sum += pk;
                if (1.0 - sum).abs() < 1e-13 || k > 300_000 {
                    break;
                }
            }
            prop_assert!((sum - 1.0).abs() < 1e-10, "sum = {sum}");
        }

        #[test]
        fn recurrence_consistent_with_direct(
            nu in 0.2f64..4.0,
            gap in 0.3f64..3.0,
            beta in -2.0f64..2.0,
            p_frac in 0.05f64..0.9,
        ) {
            let alpha = beta + gap;
            let p = p_frac * 10f64.powf(gap).min(30.0);
            let d = Ecomp::new(nu, p, alpha, beta).unwrap();
            let mut pk = d.pmf(0);
            for k in 0..200u64 {
                pk = d.pmf_recurrence_step(k, pk);
                let direct = d.pmf(k + 1);
                if direct > 1e-290 {
                    prop_assert!(((pk - direct) / direct).abs() < 1e-11,
                        "k = {}: chained {pk} vs direct {direct}", k + 1);
                }
            }
        }

        #[test]
        fn mode_walk_agrees_with_scan(
            nu in 1.0f64..5.0,
            gap in 0.3f64..3.0,
            beta in -2.0f64..2.0,
            p_frac in 0.05f64..0.9,
        ) {
            let alpha = beta + gap;
            let p = p_frac * 10f64.powf(gap).min(30.0);
            let d = Ecomp::new(nu, p, alpha, beta).unwrap();
            let walk = d.mode_by_ratio_walk();
            let scan = d.mode_by_scan();
            prop_assert!(
                walk.modes.iter().any(|m| scan.modes.contains(m)),
                "walk {:?} vs scan {:?}", walk.modes, scan.modes
            );
        }
    }
}
