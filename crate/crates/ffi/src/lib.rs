//! C ABI over `checkercop`.
//!
//! Objects are opaque handles created by `cc_*_new`/`cc_*_from_*` and
//! released with the matching `cc_*_free`. Every function returns a
//! [`CcStatus`]; on failure a message is available from
//! [`cc_last_error_message`] on the same thread. Results are written through
//! out-pointers, which are left untouched on failure.
//!
//! The header `include/checkercop.h` is generated from this file by the
//! build script.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use checkercop::inference::independence_test;
use checkercop::statistics::StatsReport;
use checkercop::{CheckerboardCopula, DiscreteMargin, Error, JointPmf, MarginSpec, MultiplierConfig, MultiplierLaw, RankedSample};

/// Result code of every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Validation = 3,
    UnsupportedDimension = 4,
    Boundary = 5,
    DegenerateMargin = 6,
    Parse = 7,
    Io = 8,
    Numeric = 9,
    Panic = 10,
}

/// Multiplier distribution for [`cc_independence_test`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcLaw {
    Normal = 0,
    Rademacher = 1,
}

/// Sample statistics. Entries undefined for the sample (bivariate-only
/// measures when d > 2, Kendall's tau when n < 2) are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct CcStats {
    pub n: usize,
    pub d: usize,
    pub kendall_tau: f64,
    pub spearman_rho: f64,
    pub spearman_rho_multivariate: f64,
    pub chi_squared: f64,
    pub g_squared: f64,
    pub cramer_von_mises: f64,
}

/// Outcome of the multiplier-bootstrap independence test.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct CcTestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub replicates: usize,
}

/// Discrete margin handle.
pub struct CcMargin(DiscreteMargin);

/// Checkerboard copula handle.
pub struct CcCopula(CheckerboardCopula);

/// Ranked sample handle.
pub struct CcSample(RankedSample);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> CcStatus {
    match e {
        Error::Domain(_) => CcStatus::Domain,
        Error::Validation(_) => CcStatus::Validation,
        Error::UnsupportedDimension { .. } => CcStatus::UnsupportedDimension,
        Error::Boundary { .. } => CcStatus::Boundary,
        Error::DegenerateMargin(_) => CcStatus::DegenerateMargin,
        Error::Parse { .. } => CcStatus::Parse,
        Error::Io { .. } => CcStatus::Io,
        Error::Numeric(_) => CcStatus::Numeric,
    }
}

struct Fail(CcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(CcStatus::NullPointer, format!("null pointer: {what}"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CcStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal panic: {msg}"));
            CcStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(CcStatus::Validation, format!("{what} is not valid UTF-8")))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

/// Message describing the last failure on the calling thread, or an empty
/// string. The pointer stays valid until the next failing call on the
/// same thread.
#[no_mangle]
pub extern "C" fn cc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Margin with support {0, ..., len-1} and the given probabilities.
#[no_mangle]
pub unsafe extern "C" fn cc_margin_from_pmf(pmf: *const f64, len: usize, out: *mut *mut CcMargin) -> CcStatus {
    guard(|| {
        let m = DiscreteMargin::from_pmf(slice(pmf, len, "pmf")?.to_vec())?;
        write(out, boxed(CcMargin(m)), "out")
    })
}

/// Margin from a name such as `F1`, `binomial(3,0.5)`, `poisson(20)` or
/// `geometric(0.8)`.
#[no_mangle]
pub unsafe extern "C" fn cc_margin_from_spec(spec: *const c_char, out: *mut *mut CcMargin) -> CcStatus {
    guard(|| {
        let m = text(spec, "spec")?.parse::<MarginSpec>()?.build()?;
        write(out, boxed(CcMargin(m)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_margin_free(m: *mut CcMargin) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of support points.
#[no_mangle]
pub unsafe extern "C" fn cc_margin_len(m: *const CcMargin, out: *mut usize) -> CcStatus {
    guard(|| write(out, handle(m, "margin")?.0.len(), "out"))
}

/// F(k) for the category index k (negative k gives 0).
#[no_mangle]
pub unsafe extern "C" fn cc_margin_cdf(m: *const CcMargin, k: isize, out: *mut f64) -> CcStatus {
    guard(|| {
        let v = handle(m, "margin")?.0.cdf(k)?;
        write(out, v, "out")
    })
}

/// Smallest category index k with F(k) >= u, for u in (0, 1].
#[no_mangle]
pub unsafe extern "C" fn cc_margin_quantile(m: *const CcMargin, u: f64, out: *mut usize) -> CcStatus {
    guard(|| {
        let v = handle(m, "margin")?.0.quantile(u)?;
        write(out, v, "out")
    })
}

/// Checkerboard copula of a joint pmf given as a row-major array of
/// `prod(shape)` cell probabilities.
#[no_mangle]
pub unsafe extern "C" fn cc_copula_from_cells(
    shape: *const usize,
    dim: usize,
    cells: *const f64,
    len: usize,
    out: *mut *mut CcCopula,
) -> CcStatus {
    guard(|| {
        let pmf = JointPmf::from_cells(slice(shape, dim, "shape")?.to_vec(), slice(cells, len, "cells")?.to_vec())?;
        write(out, boxed(CcCopula(CheckerboardCopula::build(pmf))), "out")
    })
}

/// Checkerboard copula of the product of `count` margins.
#[no_mangle]
pub unsafe extern "C" fn cc_copula_from_margins(
    margins: *const *const CcMargin,
    count: usize,
    out: *mut *mut CcCopula,
) -> CcStatus {
    guard(|| {
        let ms = slice(margins, count, "margins")?
            .iter()
            .map(|&m| handle(m, "margin").map(|m| m.0.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let pmf = JointPmf::product(ms)?;
        write(out, boxed(CcCopula(CheckerboardCopula::build(pmf))), "out")
    })
}

/// Empirical checkerboard copula of a sample.
#[no_mangle]
pub unsafe extern "C" fn cc_copula_from_sample(s: *const CcSample, out: *mut *mut CcCopula) -> CcStatus {
    guard(|| {
        let c = handle(s, "sample")?.0.empirical_checkerboard();
        write(out, boxed(CcCopula(c)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_copula_free(c: *mut CcCopula) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cc_copula_dim(c: *const CcCopula, out: *mut usize) -> CcStatus {
    guard(|| write(out, handle(c, "copula")?.0.dim(), "out"))
}

/// C(u) for a point `u` of length `dim`.
#[no_mangle]
pub unsafe extern "C" fn cc_copula_cdf(c: *const CcCopula, u: *const f64, dim: usize, out: *mut f64) -> CcStatus {
    guard(|| {
        let v = handle(c, "copula")?.0.cdf(slice(u, dim, "u")?)?;
        write(out, v, "out")
    })
}

/// Density of the copula at an interior point.
#[no_mangle]
pub unsafe extern "C" fn cc_copula_density(c: *const CcCopula, u: *const f64, dim: usize, out: *mut f64) -> CcStatus {
    guard(|| {
        let v = handle(c, "copula")?.0.density(slice(u, dim, "u")?)?;
        write(out, v, "out")
    })
}

/// Population Kendall's tau (bivariate only).
#[no_mangle]
pub unsafe extern "C" fn cc_copula_tau(c: *const CcCopula, out: *mut f64) -> CcStatus {
    guard(|| {
        let v = handle(c, "copula")?.0.population_tau()?;
        write(out, v, "out")
    })
}

/// Population Spearman's rho (multivariate version for d > 2).
#[no_mangle]
pub unsafe extern "C" fn cc_copula_rho(c: *const CcCopula, out: *mut f64) -> CcStatus {
    guard(|| {
        let v = handle(c, "copula")?.0.population_rho()?;
        write(out, v, "out")
    })
}

/// Integrated squared distance to the independence copula.
#[no_mangle]
pub unsafe extern "C" fn cc_copula_gap(c: *const CcCopula, out: *mut f64) -> CcStatus {
    guard(|| write(out, handle(c, "copula")?.0.independence_gap(), "out"))
}

/// Sample of `n` observations in `d` coordinates, row-major.
#[no_mangle]
pub unsafe extern "C" fn cc_sample_new(data: *const f64, n: usize, d: usize, out: *mut *mut CcSample) -> CcStatus {
    guard(|| {
        let len = n
            .checked_mul(d)
            .ok_or_else(|| Fail(CcStatus::Validation, "n * d overflows".into()))?;
        let values = slice(data, len, "data")?;
        if d == 0 {
            return Err(Error::UnsupportedDimension { expected: ">= 2".into(), got: 0 }.into());
        }
        let rows: Vec<&[f64]> = values.chunks_exact(d).collect();
        let s = RankedSample::rank(&rows)?;
        write(out, boxed(CcSample(s)), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_sample_free(s: *mut CcSample) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cc_sample_stats(s: *const CcSample, out: *mut CcStats) -> CcStatus {
    guard(|| {
        let r = StatsReport::compute(&handle(s, "sample")?.0)?;
        let or_nan = |v: Option<f64>| v.unwrap_or(f64::NAN);
        let stats = CcStats {
            n: r.n,
            d: r.d,
            kendall_tau: or_nan(r.tau),
            spearman_rho: or_nan(r.rho),
            spearman_rho_multivariate: r.rho_d,
            chi_squared: or_nan(r.chi2),
            g_squared: or_nan(r.g2),
            cramer_von_mises: r.cvm,
        };
        write(out, stats, "out")
    })
}

/// Multiplier-bootstrap test of independence with `replicates` multiplier
/// draws seeded by `seed`. Same inputs give the same p-value.
#[no_mangle]
pub unsafe extern "C" fn cc_independence_test(
    s: *const CcSample,
    replicates: usize,
    law: CcLaw,
    seed: u64,
    out: *mut CcTestResult,
) -> CcStatus {
    guard(|| {
        let sample = handle(s, "sample")?;
        let law = match law {
            CcLaw::Normal => MultiplierLaw::Normal,
            CcLaw::Rademacher => MultiplierLaw::Rademacher,
        };
        let cfg = MultiplierConfig::new(replicates, seed)?.with_law(law);
        let r = independence_test(&sample.0, &cfg)?;
        write(out, CcTestResult { statistic: r.statistic, p_value: r.p_value, replicates: r.replicates }, "out")
    })
}
