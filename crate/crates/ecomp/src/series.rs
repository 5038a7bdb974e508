//! Log-domain evaluation of the generalized hypergeometric-type series
//!
//! ```text
//!   S(a1, …, am; b; p) = Σ_k  {(a1)_k}^β (a2)_k ⋯ (am)_k p^k / ({(b)_k}^α k!)
//! ```
//!
//! with truncated summation under a geometric tail bound, plus a Laplace
//! asymptotic approximation for the regime where truncation is impractical.
//! With m = 1 and b = 1 the series is the ECOMP normalizing constant
//! Σ_k {(ν)_k}^β p^k / (k!)^{α}.

use crate::dist::EcompParams;
use crate::error::{Error, Result};
use crate::special::{ln_gamma, ln_pochhammer_unchecked};

/// Specification of one series instance.
///
/// `alpha` here is the exponent carried by the lower Pochhammer `(b)_k`; the
/// `1/k!` factor is always present. The ECOMP normalizer therefore uses
/// `alpha = α − 1` together with `lower = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSpec {
    /// Leading upper parameter a1, carrying the exponent β.
    pub upper: f64,
    /// Additional upper parameters a2 … am, each with exponent 1.
    pub extras: Vec<f64>,
    /// Lower parameter b, carrying the exponent α.
    pub lower: f64,
    /// Exponent on the lower Pochhammer.
    pub alpha: f64,
    /// Exponent on the leading upper Pochhammer.
    pub beta: f64,
    /// Series argument, p > 0.
    pub p: f64,
}

impl SeriesSpec {
    /// The ECOMP normalizing constant Σ {(ν)_k}^β p^k / (k!)^α as a series
    /// spec (m = 1, b = 1, lower exponent α − 1).
    pub fn ecomp_normalizer(params: &EcompParams) -> Self {
        SeriesSpec {
            upper: params.nu(),
            extras: Vec::new(),
            lower: 1.0,
            alpha: params.alpha() - 1.0,
            beta: params.beta(),
            p: params.p(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.upper.is_finite() || self.upper <= 0.0 {
            return Err(Error::Domain(format!(
                "series upper parameter must be > 0, got {}",
                self.upper
            )));
        }
        for (i, a) in self.extras.iter().enumerate() {
            if !a.is_finite() || *a <= 0.0 {
                return Err(Error::Domain(format!(
                    "series extra upper parameter {i} must be > 0, got {a}"
                )));
            }
        }
        if !self.lower.is_finite() || self.lower <= 0.0 {
            return Err(Error::Domain(format!(
                "series lower parameter must be > 0, got {}",
                self.lower
            )));
        }
        if !self.p.is_finite() || self.p <= 0.0 {
            return Err(Error::Domain(format!("series argument must be > 0, got {}", self.p)));
        }
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::Domain("series exponents must be finite".into()));
        }
        Ok(())
    }

    /// Natural log of the k-th term.
    pub fn log_term(&self, k: u64) -> f64 {
        let mut t = self.beta * ln_pochhammer_unchecked(self.upper, k)
            + k as f64 * self.p.ln()
            - self.alpha * ln_pochhammer_unchecked(self.lower, k)
            - ln_gamma(k as f64 + 1.0);
        for a in &self.extras {
            t += ln_pochhammer_unchecked(*a, k);
        }
        t
    }

    /// Successive-term ratio t_{k+1}/t_k
    /// = p (a1+k)^β Π(ai+k) / ((b+k)^α (k+1)).
    pub fn term_ratio(&self, k: u64) -> f64 {
        self.log_term_ratio(k).exp()
    }

    fn log_term_ratio(&self, k: u64) -> f64 {
        let kf = k as f64;
        let mut r = self.p.ln() + self.beta * (self.upper + kf).ln()
            - self.alpha * (self.lower + kf).ln()
            - (kf + 1.0).ln();
        for a in &self.extras {
            r += (a + kf).ln();
        }
        r
    }

    /// Power of k by which the term ratio decays: ratio(k) ~ p k^{-decay}.
    fn ratio_decay(&self) -> f64 {
        self.alpha + 1.0 - self.beta - self.extras.len() as f64
    }
}

/// How a normalizer value was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalizerMethod {
    /// Truncated summation; carries the truncation point and the geometric
    /// bound on the relative tail.
    Truncated {
        truncation_point: usize,
        relative_error_bound: f64,
    },
    /// Laplace asymptotic approximation; no error bound available.
    Asymptotic,
}

/// Natural log of a series sum together with how it was computed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalizer {
    pub log_value: f64,
    pub method: NormalizerMethod,
}

impl LogNormalizer {
    pub fn is_asymptotic(&self) -> bool {
        matches!(self.method, NormalizerMethod::Asymptotic)
    }
}

/// Convergence controls for truncated summation and the dispatch rule for
/// switching to the asymptotic formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceConfig {
    /// Target relative tail bound for truncation.
    pub rel_tol: f64,
    /// Hard cap on the number of terms.
    pub max_terms: usize,
    /// Switch to the asymptotic formula when α − β falls below this and
    /// p > 1.
    pub asymptotic_gap_threshold: f64,
    /// Also switch when the predicted term peak p^{1/(α−β)} exceeds this
    /// budget (truncation would need well over this many terms).
    pub asymptotic_term_budget: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            rel_tol: 1e-12,
            max_terms: 200_000,
            asymptotic_gap_threshold: 0.05,
            asymptotic_term_budget: 50_000,
        }
    }
}

impl ConvergenceConfig {
    /// A config that never dispatches to the asymptotic formula. Likelihood
    /// code uses this: an approximate normalizer, scaled by the sample size,
    /// would distort the likelihood surface by far more than the optimizer
    /// tolerance.
    pub fn truncated_only(mut self) -> Self {
        self.asymptotic_gap_threshold = 0.0;
        self.asymptotic_term_budget = usize::MAX;
        self
    }
}

/// Truncated summation of the series in the log domain.
///
/// Terms are accumulated with a running-max log-sum-exp so that sums whose
/// terms span hundreds of orders of magnitude stay finite. Summation stops
/// at the first m past the term-ratio peak where the ratio ε_m = t_{m+1}/t_m
/// is below 1 and the geometric tail bound t_{m+1}/(1 − ε_m) is at most
/// `rel_tol` times the partial sum.
pub fn log_series_truncated(spec: &SeriesSpec, cfg: &ConvergenceConfig) -> Result<LogNormalizer> {
    spec.validate()?;
    if !(cfg.rel_tol > 0.0 && cfg.rel_tol < 1.0) || cfg.max_terms < 1 {
        return Err(Error::Domain(format!(
            "convergence config requires 0 < rel_tol < 1 and max_terms >= 1, got rel_tol = {}, max_terms = {}",
            cfg.rel_tol, cfg.max_terms
        )));
    }

    // Exponent arithmetic like (α − 1) + 1 − β leaves float dust on the
    // diagonal; anything this small is indistinguishable from a constant
    // ratio over any feasible number of terms.
    let decay = {
        let d = spec.ratio_decay();
        if d.abs() <= 1e-9 {
            0.0
        } else {
            d
        }
    };
    if decay < 0.0 {
        return Err(Error::Domain(
            "series diverges: term ratio grows without bound".into(),
        ));
    }
    if decay == 0.0 && spec.p >= 1.0 {
        return Err(Error::Domain(
            "series diverges: term ratio tends to p >= 1".into(),
        ));
    }
    if decay > 0.0 {
        // The ratio falls below 1 only near k* = p^{1/decay}; refuse early
        // when that alone exceeds the term budget.
        let k_star = spec.p.powf(1.0 / decay);
        if k_star > cfg.max_terms as f64 {
            return Err(Error::NonConvergent {
                max_terms: cfg.max_terms,
                last_ratio: spec.term_ratio(0),
                at: 0,
            });
        }
    }

    // Ratio limit as k → ∞: p for decay = 0, else 0. The geometric bound
    // must use the supremum of the remaining ratios.
    let limit_ratio = if decay == 0.0 { spec.p } else { 0.0 };

    let mut max_log = f64::NEG_INFINITY;
    let mut acc = 0.0_f64;
    let mut prev_ratio = f64::INFINITY;
    let log_rel_tol = cfg.rel_tol.ln();
    // Once the requested bound is met, keep adding terms until they fall
    // below the float resolution of the partial sum, so the returned value
    // is as accurate as the representation allows.
    const LOG_EXHAUSTED: f64 = -37.0; // ln(8e-17)
    let mut achieved: Option<(usize, f64)> = None;

    for k in 0..cfg.max_terms {
        let lt = spec.log_term(k as u64);
        if lt > max_log {
            acc = acc * (max_log - lt).exp() + 1.0;
            max_log = lt;
        } else {
            acc += (lt - max_log).exp();
        }
        let ratio = spec.term_ratio(k as u64);
        // The geometric bound needs the supremum of the remaining ratios:
        // past the peak that is the current ratio; in the asymptotically
        // constant case (decay 0) the ratios may still be climbing toward
        // the limit p < 1, which then bounds them.
        if ratio < 1.0 && (ratio <= prev_ratio || decay == 0.0) {
            let eff = ratio.max(limit_ratio);
            let log_sum = max_log + acc.ln();
            let log_tail_bound = lt + ratio.ln() - (-eff).ln_1p();
            if log_tail_bound <= log_rel_tol + log_sum {
                achieved = Some((k, (log_tail_bound - log_sum).exp()));
                if log_tail_bound <= LOG_EXHAUSTED + log_sum {
                    break;
                }
            }
        }
        prev_ratio = ratio;
    }

    match achieved {
        Some((truncation_point, relative_error_bound)) => Ok(LogNormalizer {
            log_value: max_log + acc.ln(),
            method: NormalizerMethod::Truncated {
                truncation_point,
                relative_error_bound,
            },
        }),
        None => Err(Error::NonConvergent {
            max_terms: cfg.max_terms,
            last_ratio: prev_ratio,
            at: cfg.max_terms,
        }),
    }
}

/// Laplace asymptotic approximation of the log of the ECOMP normalizer
/// Σ {(ν)_k}^β p^k / (k!)^α, valid for α > β and most accurate for large p
/// and small α − β.
///
/// The saddle-point evaluation applies to the gamma form
/// Σ {Γ(ν+k)}^β p^k / (k!)^α; converting to the rising-factorial form
/// divides by Γ(ν)^β, hence the last term. At ν = 1 or β = 0 this reduces
/// to the classical COM-Poisson normalizer approximation.
pub fn log_series_asymptotic(nu: f64, p: f64, alpha: f64, beta: f64) -> Result<LogNormalizer> {
    if !nu.is_finite() || nu <= 0.0 {
        return Err(Error::Domain(format!("asymptotic formula requires nu > 0, got {nu}")));
    }
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::Domain(format!("asymptotic formula requires p > 0, got {p}")));
    }
    let gap = alpha - beta;
    if !gap.is_finite() || gap <= 0.0 {
        return Err(Error::Domain(format!(
            "asymptotic formula requires alpha > beta, got alpha = {alpha}, beta = {beta}"
        )));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let log_value = (1.0 - alpha + (2.0 * nu - 1.0) * beta) / (2.0 * gap) * p.ln()
        + gap * p.powf(1.0 / gap)
        - 0.5 * (gap - 1.0) * two_pi.ln()
        - 0.5 * gap.ln()
        - beta * ln_gamma(nu);
    Ok(LogNormalizer {
        log_value,
        method: NormalizerMethod::Asymptotic,
    })
}

/// Log of the ECOMP normalizing constant, dispatching between truncated
/// summation and the asymptotic approximation.
///
/// The asymptotic route is taken only where truncation is impractical:
/// p > 1 together with either α − β below the configured threshold or a
/// predicted term peak beyond the configured budget.
pub fn log_normalizer(params: &EcompParams, cfg: &ConvergenceConfig) -> Result<LogNormalizer> {
    let gap = params.alpha() - params.beta();
    if params.p() > 1.0 && gap > 0.0 {
        let peak = params.p().powf(1.0 / gap);
        if gap < cfg.asymptotic_gap_threshold || peak > cfg.asymptotic_term_budget as f64 {
            return log_series_asymptotic(params.nu(), params.p(), params.alpha(), params.beta());
        }
    }
    log_series_truncated(&SeriesSpec::ecomp_normalizer(params), cfg)
}

/// Approximate mean p^{1/(α−β)} + (1 − α + (2ν−1)β) / (2(α−β)), the
/// derivative in log p of the asymptotic log-normalizer. Requires α > β.
pub fn approx_mean(params: &EcompParams) -> Result<f64> {
    let gap = params.alpha() - params.beta();
    if !gap.is_finite() || gap <= 0.0 {
        return Err(Error::Domain(format!(
            "approximate mean requires alpha > beta, got alpha = {}, beta = {}",
            params.alpha(),
            params.beta()
        )));
    }
    Ok(params.p().powf(1.0 / gap)
        + (1.0 - params.alpha() + (2.0 * params.nu() - 1.0) * params.beta()) / (2.0 * gap))
}
