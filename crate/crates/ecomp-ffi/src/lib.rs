//! C ABI for the extended Conway-Maxwell-Poisson distribution.
//!
//! Handles are opaque pointers created and destroyed by this library; every
//! fallible call returns an [`EcompStatus`] and writes results through out
//! pointers. The header mirroring this interface is `include/ecomp.h`.
//!
//! Thread safety: a distribution handle is immutable after creation and may
//! be shared across threads; a sampler handle is stateful and must not be
//! used from two threads at once.

use std::ffi::{c_char, c_int, CStr};
use std::ptr;

use ecomp::fit::{fit, FitConfig, FrequencyTable, Model};
use ecomp::{Ecomp, EcompParams, Error, ModeKind, Sampler};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcompStatus {
    Ok = 0,
    /// Parameters outside the ECOMP parameter space.
    InvalidParams = 1,
    /// Argument outside the domain of the operation.
    DomainError = 2,
    /// Series or cdf extension failed to converge.
    NonConvergent = 3,
    /// A required pointer was null.
    NullPointer = 4,
    /// Simulation left the supported state range.
    StateCapExceeded = 5,
    /// No optimizer start converged.
    NoConvergence = 6,
    /// Too few observations for the free parameters.
    DataTooSparse = 7,
    /// Degenerate expected frequency in a goodness-of-fit cell.
    DegenerateCells = 8,
    /// Malformed frequency table.
    InvalidTable = 9,
}

fn status_of(e: &Error) -> EcompStatus {
    match e {
        Error::InvalidParameterSpace(_) => EcompStatus::InvalidParams,
        Error::Domain(_) => EcompStatus::DomainError,
        Error::NonConvergent { .. } => EcompStatus::NonConvergent,
        Error::StateCapExceeded { .. } => EcompStatus::StateCapExceeded,
        Error::NoConvergence => EcompStatus::NoConvergence,
        Error::DataTooSparse { .. } => EcompStatus::DataTooSparse,
        Error::DegenerateCells(_) => EcompStatus::DegenerateCells,
        Error::InvalidTable(_) | Error::Parse { .. } => EcompStatus::InvalidTable,
    }
}

/// Opaque distribution handle.
pub struct EcompDist(Ecomp);

/// Opaque sampler handle.
pub struct EcompSampler(Sampler);

/// Flat fit summary for the C side.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EcompFitSummary {
    pub nu: f64,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub loglik: f64,
    pub aic: f64,
    pub chisq: f64,
    pub df: i64,
    pub p_value: f64,
    /// 1 when the optimizer converged.
    pub converged: c_int,
    /// 1 when the estimate sits on a sub-model boundary.
    pub at_boundary: c_int,
}

/// Mode-structure kinds, mirrored from the Rust enum.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcompModeKind {
    UniqueAtZero = 0,
    UniqueInterior = 1,
    Dual = 2,
}

const VERSION: &CStr = c"0.1.0";

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ecomp_version() -> *const c_char {
    VERSION.as_ptr()
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn ecomp_status_describe(status: EcompStatus) -> *const c_char {
    let s: &CStr = match status {
        EcompStatus::Ok => c"ok",
        EcompStatus::InvalidParams => c"parameters outside the ECOMP parameter space",
        EcompStatus::DomainError => c"argument outside the domain of the operation",
        EcompStatus::NonConvergent => c"series did not converge within the term budget",
        EcompStatus::NullPointer => c"null pointer argument",
        EcompStatus::StateCapExceeded => c"simulation exceeded the state cap",
        EcompStatus::NoConvergence => c"no optimizer start converged",
        EcompStatus::DataTooSparse => c"too few observations for the free parameters",
        EcompStatus::DegenerateCells => c"degenerate expected frequency in a cell",
        EcompStatus::InvalidTable => c"malformed frequency table",
    };
    s.as_ptr()
}

/// Creates a distribution handle. On success writes the handle to `out`.
///
/// # Safety
/// `out` must be a valid pointer to writable memory.
#[no_mangle]
pub unsafe extern "C" fn ecomp_dist_new(
    nu: f64,
    p: f64,
    alpha: f64,
    beta: f64,
    out: *mut *mut EcompDist,
) -> EcompStatus {
    if out.is_null() {
        return EcompStatus::NullPointer;
    }
    match Ecomp::new(nu, p, alpha, beta) {
        Ok(d) => {
            unsafe { *out = Box::into_raw(Box::new(EcompDist(d))) };
            EcompStatus::Ok
        }
        Err(e) => {
            unsafe { *out = ptr::null_mut() };
            status_of(&e)
        }
    }
}

/// Frees a distribution handle; a null handle is a no-op.
///
/// # Safety
/// `dist` must have come from [`ecomp_dist_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ecomp_dist_free(dist: *mut EcompDist) {
    if !dist.is_null() {
        drop(unsafe { Box::from_raw(dist) });
    }
}

unsafe fn dist_ref<'a>(dist: *const EcompDist) -> Option<&'a Ecomp> {
    unsafe { dist.as_ref() }.map(|d| &d.0)
}

macro_rules! scalar_query {
    ($(#[$doc:meta])* $name:ident, |$d:ident, $k:ident| $expr:expr) => {
        $(#[$doc])*
        /// # Safety
        /// `dist` must be a live handle; `out` must be writable.
        #[no_mangle]
        pub unsafe extern "C" fn $name(
            dist: *const EcompDist,
            $k: u64,
            out: *mut f64,
        ) -> EcompStatus {
            let Some($d) = (unsafe { dist_ref(dist) }) else {
                return EcompStatus::NullPointer;
            };
            if out.is_null() {
                return EcompStatus::NullPointer;
            }
            unsafe { *out = $expr };
            EcompStatus::Ok
        }
    };
}

scalar_query!(
    /// Natural log of P(X = k).
    ecomp_dist_log_pmf, |d, k| d.ln_pmf(k)
);
scalar_query!(
    /// P(X = k).
    ecomp_dist_pmf, |d, k| d.pmf(k)
);
scalar_query!(
    /// P(X <= k).
    ecomp_dist_cdf, |d, k| d.cdf(k)
);
scalar_query!(
    /// P(X >= k).
    ecomp_dist_survival, |d, k| d.survival(k)
);
scalar_query!(
    /// Failure rate P(X = k) / P(X >= k).
    ecomp_dist_hazard, |d, k| d.hazard(k)
);

/// Log of the normalizing constant; `asymptotic` (may be null) receives 1
/// when the value came from the asymptotic approximation.
///
/// # Safety
/// `dist` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecomp_dist_log_normalizer(
    dist: *const EcompDist,
    out: *mut f64,
    asymptotic: *mut c_int,
) -> EcompStatus {
    let Some(d) = (unsafe { dist_ref(dist) }) else {
        return EcompStatus::NullPointer;
    };
    if out.is_null() {
        return EcompStatus::NullPointer;
    }
    unsafe {
        *out = d.log_normalizer().log_value;
        if !asymptotic.is_null() {
            *asymptotic = c_int::from(d.log_normalizer().is_asymptotic());
        }
    }
    EcompStatus::Ok
}

/// Mean and variance; `approximate` (may be null) receives 1 when the
/// asymptotic fallback was used.
///
/// # Safety
/// `dist` must be a live handle; `out_mean` and `out_variance` writable.
#[no_mangle]
pub unsafe extern "C" fn ecomp_dist_mean_variance(
    dist: *const EcompDist,
    out_mean: *mut f64,
    out_variance: *mut f64,
    approximate: *mut c_int,
) -> EcompStatus {
    let Some(d) = (unsafe { dist_ref(dist) }) else {
        return EcompStatus::NullPointer;
    };
    if out_mean.is_null() || out_variance.is_null() {
        return EcompStatus::NullPointer;
    }
    let m = d.mean_variance();
    unsafe {
        *out_mean = m.mean;
        *out_variance = m.variance;
        if !approximate.is_null() {
            *approximate = c_int::from(m.approximate);
        }
    }
    EcompStatus::Ok
}

/// r-th factorial moment, r >= 1.
///
/// # Safety
/// `dist` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecomp_dist_factorial_moment(
    dist: *const EcompDist,
    r: u32,
    out: *mut f64,
) -> EcompStatus {
    let Some(d) = (unsafe { dist_ref(dist) }) else {
        return EcompStatus::NullPointer;
    };
    if out.is_null() {
        return EcompStatus::NullPointer;
    }
    match d.factorial_moment(r) {
        Ok(v) => {
            unsafe { *out = v };
            EcompStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Mode structure. `modes` must hold 2 entries; `n_modes` receives 1 or 2.
///
/// # Safety
/// `dist` must be a live handle; `modes` must point to two writable u64;
/// `n_modes` and `kind` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecomp_dist_mode(
    dist: *const EcompDist,
    modes: *mut u64,
    n_modes: *mut usize,
    kind: *mut EcompModeKind,
) -> EcompStatus {
    let Some(d) = (unsafe { dist_ref(dist) }) else {
        return EcompStatus::NullPointer;
    };
    if modes.is_null() || n_modes.is_null() || kind.is_null() {
        return EcompStatus::NullPointer;
    }
    let info = d.mode_structure();
    unsafe {
        for (i, m) in info.modes.iter().take(2).enumerate() {
            *modes.add(i) = *m;
        }
        *n_modes = info.modes.len().min(2);
        *kind = match info.kind {
            ModeKind::UniqueAtZero => EcompModeKind::UniqueAtZero,
            ModeKind::UniqueInterior => EcompModeKind::UniqueInterior,
            ModeKind::Dual => EcompModeKind::Dual,
        };
    }
    EcompStatus::Ok
}

/// Creates a sampler handle over the given parameter point. Draws are
/// reproducible for a given seed.
///
/// # Safety
/// `out` must be a valid pointer to writable memory.
#[no_mangle]
pub unsafe extern "C" fn ecomp_sampler_new(
    nu: f64,
    p: f64,
    alpha: f64,
    beta: f64,
    seed: u64,
    out: *mut *mut EcompSampler,
) -> EcompStatus {
    if out.is_null() {
        return EcompStatus::NullPointer;
    }
    match Ecomp::new(nu, p, alpha, beta) {
        Ok(d) => {
            let s = Sampler::new(d, seed);
            unsafe { *out = Box::into_raw(Box::new(EcompSampler(s))) };
            EcompStatus::Ok
        }
        Err(e) => {
            unsafe { *out = ptr::null_mut() };
            status_of(&e)
        }
    }
}

/// Frees a sampler handle; a null handle is a no-op.
///
/// # Safety
/// `sampler` must have come from [`ecomp_sampler_new`] and not be freed
/// twice.
#[no_mangle]
pub unsafe extern "C" fn ecomp_sampler_free(sampler: *mut EcompSampler) {
    if !sampler.is_null() {
        drop(unsafe { Box::from_raw(sampler) });
    }
}

/// Fills `buf` with `n` draws.
///
/// # Safety
/// `sampler` must be a live handle used by one thread at a time; `buf` must
/// point to `n` writable u64 slots.
#[no_mangle]
pub unsafe extern "C" fn ecomp_sampler_fill(
    sampler: *mut EcompSampler,
    buf: *mut u64,
    n: usize,
) -> EcompStatus {
    let Some(s) = (unsafe { sampler.as_mut() }) else {
        return EcompStatus::NullPointer;
    };
    if buf.is_null() && n > 0 {
        return EcompStatus::NullPointer;
    }
    for i in 0..n {
        match s.0.draw() {
            Ok(x) => unsafe { *buf.add(i) = x },
            Err(e) => return status_of(&e),
        }
    }
    EcompStatus::Ok
}

/// Maximum-likelihood fit of a frequency table with default settings.
///
/// `counts` and `freqs` are parallel arrays of `n_cells` fully observed
/// rows. When `tail_freq > 0`, a censored cell "tail_threshold or more"
/// with that frequency is appended. `model` is 0 ecomp, 1 comnb, 2 gcomp,
/// 3 nb, 4 comp, 5 poisson.
///
/// # Safety
/// `counts` and `freqs` must point to `n_cells` readable entries; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecomp_fit(
    counts: *const u64,
    freqs: *const u64,
    n_cells: usize,
    tail_threshold: u64,
    tail_freq: u64,
    model: c_int,
    out: *mut EcompFitSummary,
) -> EcompStatus {
    if out.is_null() || (n_cells > 0 && (counts.is_null() || freqs.is_null())) {
        return EcompStatus::NullPointer;
    }
    let model = match model {
        0 => Model::Ecomp,
        1 => Model::ComNb,
        2 => Model::GComp,
        3 => Model::Nb,
        4 => Model::Comp,
        5 => Model::Poisson,
        _ => return EcompStatus::DomainError,
    };
    let cells: Vec<(u64, u64)> = (0..n_cells)
        .map(|i| unsafe { (*counts.add(i), *freqs.add(i)) })
        .collect();
    let tail = (tail_freq > 0).then_some((tail_threshold, tail_freq));
    let table = match FrequencyTable::new(cells, tail) {
        Ok(t) => t,
        Err(e) => return status_of(&e),
    };
    match fit(&table, &FitConfig::for_model(model)) {
        Ok(r) => {
            unsafe {
                *out = EcompFitSummary {
                    nu: r.params.nu(),
                    p: r.params.p(),
                    alpha: r.params.alpha(),
                    beta: r.params.beta(),
                    loglik: r.loglik,
                    aic: r.aic,
                    chisq: r.chisq,
                    df: r.df,
                    p_value: r.p_value,
                    converged: c_int::from(r.converged),
                    at_boundary: c_int::from(r.at_boundary),
                };
            }
            EcompStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Convenience check used by bindings to confirm that a parameter point is
/// inside the distribution's parameter space without building a handle.
#[no_mangle]
pub extern "C" fn ecomp_params_valid(nu: f64, p: f64, alpha: f64, beta: f64) -> EcompStatus {
    match EcompParams::new(nu, p, alpha, beta) {
        Ok(_) => EcompStatus::Ok,
        Err(e) => status_of(&e),
    }
}
