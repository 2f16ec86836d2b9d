//! C ABI for `shiftcode`.
//!
//! Objects cross the boundary as opaque handles created by `*_from_json` or
//! `shc_code_fixture` and released with the matching `*_free`. Every fallible
//! call returns a [`ShcStatus`]; on failure `shc_last_error` describes the
//! problem on the calling thread. Strings handed out by the library are
//! NUL-terminated UTF-8 JSON and must be released with `shc_string_free`.
//! Configuration arguments take an `AnalysisConfig` as JSON, or NULL for the
//! defaults.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use serde::Serialize;
use serde_json::{json, Value};
use shiftcode::blockcode::SlidingBlockCode;
use shiftcode::classdeg::class_degree;
use shiftcode::decomp::{build_decomposition, degree_on_sofic, Decomposition};
use shiftcode::fixtures::named_fixture;
use shiftcode::fto::{degree_report, is_finite_to_one};
use shiftcode::io::{
    code_from_json, code_to_value, measure_from_json, measure_to_value, potential_from_json, presentation_from_json,
    presentation_to_value, ytilde_to_value,
};
use shiftcode::relopt::{build_relaxation_for, solve_relaxation, support_report};
use shiftcode::shiftspace::{is_irreducible, Presentation};
use shiftcode::thermo::{equilibrium_state, pressure, sofic_equilibrium_state, Potential};
use shiftcode::{AnalysisConfig, Error};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    NotIrreducible = 5,
    EmptyShift = 6,
    NotFiniteToOne = 7,
    ResourceLimit = 8,
    Inconclusive = 9,
    SolverFailed = 10,
    Io = 11,
    Internal = 12,
}

impl From<&Error> for ShcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse(_) => ShcStatus::Parse,
            Error::NotIrreducible => ShcStatus::NotIrreducible,
            Error::EmptyShift => ShcStatus::EmptyShift,
            Error::NotFiniteToOne => ShcStatus::NotFiniteToOne,
            Error::ResourceLimit { .. } => ShcStatus::ResourceLimit,
            Error::StabilizationInconclusive => ShcStatus::Inconclusive,
            Error::Infeasible(_) | Error::SolverStalled(_) => ShcStatus::SolverFailed,
            Error::Io(_) => ShcStatus::Io,
            _ => ShcStatus::InvalidInput,
        }
    }
}

/// A shift presented by a labeled graph.
pub struct ShcPresentation {
    inner: Presentation,
}

/// A sliding block code.
pub struct ShcCode {
    inner: SlidingBlockCode,
}

/// A verified factorization of a code.
pub struct ShcDecomposition {
    inner: Decomposition,
    codomain: Vec<String>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(ShcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(ShcStatus::from(&e), e.to_string())
    }
}

type Out<T> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> Out<()>) -> ShcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ShcStatus::Ok,
        Ok(Err(Failure(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            ShcStatus::Internal
        }
    }
}

fn null() -> Failure {
    Failure(ShcStatus::NullPointer, "null pointer argument".into())
}

unsafe fn text<'a>(p: *const c_char) -> Out<&'a str> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(ShcStatus::InvalidUtf8, e.to_string()))
}

unsafe fn opt_text<'a>(p: *const c_char) -> Out<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p).map(Some)
    }
}

unsafe fn get<'a, T>(p: *const T) -> Out<&'a T> {
    p.as_ref().ok_or_else(null)
}

unsafe fn config(p: *const c_char) -> Out<AnalysisConfig> {
    match opt_text(p)? {
        Some(s) => serde_json::from_str(s).map_err(|e| Failure(ShcStatus::Parse, format!("config: {e}"))),
        None => Ok(AnalysisConfig::default()),
    }
}

fn potential(s: Option<&str>, x: &Presentation, cfg: &AnalysisConfig) -> Out<Potential> {
    Ok(match s {
        Some(s) => potential_from_json(s, x, &cfg.limits)?,
        None => Potential::zero(x, &cfg.limits)?,
    })
}

fn irreducible(x: &Presentation) -> Out<()> {
    if is_irreducible(x) {
        Ok(())
    } else {
        Err(Error::NotIrreducible.into())
    }
}

unsafe fn put<T>(out: *mut T, v: T) -> Out<()> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

unsafe fn put_handle<T>(out: *mut *mut T, v: T) -> Out<()> {
    if out.is_null() {
        return Err(null());
    }
    out.write(Box::into_raw(Box::new(v)));
    Ok(())
}

unsafe fn put_json(out: *mut *mut c_char, v: impl Serialize) -> Out<()> {
    let s = serde_json::to_string(&v).map_err(|e| Failure(ShcStatus::Internal, e.to_string()))?;
    let c = CString::new(s).map_err(|e| Failure(ShcStatus::Internal, e.to_string()))?;
    if out.is_null() {
        return Err(null());
    }
    out.write(c.into_raw());
    Ok(())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn shc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn shc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by the library.
///
/// # Safety
/// `s` is NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn shc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn shc_presentation_from_json(json: *const c_char, out: *mut *mut ShcPresentation) -> ShcStatus {
    guard(|| {
        let inner = presentation_from_json(text(json)?)?;
        put_handle(out, ShcPresentation { inner })
    })
}

/// # Safety
/// `p` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn shc_presentation_to_json(p: *const ShcPresentation, out: *mut *mut c_char) -> ShcStatus {
    guard(|| put_json(out, presentation_to_value(&get(p)?.inner)))
}

/// # Safety
/// `p` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn shc_presentation_free(p: *mut ShcPresentation) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Parses a code whose domain is given inline.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn shc_code_from_json(json: *const c_char, out: *mut *mut ShcCode) -> ShcStatus {
    guard(|| {
        let inner = code_from_json(text(json)?, None, &AnalysisConfig::default().limits)?;
        put_handle(out, ShcCode { inner })
    })
}

/// One of the built-in codes: `merge`, `xor`, `golden-mean-identity`, ...
///
/// # Safety
/// `name` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn shc_code_fixture(name: *const c_char, out: *mut *mut ShcCode) -> ShcStatus {
    guard(|| {
        let name = text(name)?;
        let f = named_fixture(name)
            .ok_or_else(|| Failure(ShcStatus::InvalidInput, format!("unknown fixture {name:?}")))?;
        put_handle(out, ShcCode { inner: f.code })
    })
}

/// # Safety
/// `c` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn shc_code_to_json(c: *const ShcCode, out: *mut *mut c_char) -> ShcStatus {
    guard(|| put_json(out, code_to_value(&get(c)?.inner)))
}

/// A copy of the domain of `c`.
///
/// # Safety
/// `c` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn shc_code_domain(c: *const ShcCode, out: *mut *mut ShcPresentation) -> ShcStatus {
    guard(|| put_handle(out, ShcPresentation { inner: get(c)?.inner.domain().clone() }))
}

/// # Safety
/// `c` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn shc_code_free(c: *mut ShcCode) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// `c` is a live handle; `config` is NULL or a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn shc_code_is_finite_to_one(c: *const ShcCode, config: *const c_char, out: *mut bool) -> ShcStatus {
    guard(|| {
        let cfg = self::config(config)?;
        put(out, is_finite_to_one(&get(c)?.inner, &cfg.limits)?.finite_to_one)
    })
}

/// Degree of a finite-to-one code on an irreducible domain, which may be
/// sofic for 1-block codes.
///
/// # Safety
/// `c` is a live handle; `config` is NULL or a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn shc_code_degree(c: *const ShcCode, config: *const c_char, out: *mut usize) -> ShcStatus {
    guard(|| {
        let cfg = self::config(config)?;
        let pi = &get(c)?.inner;
        irreducible(pi.domain())?;
        let d = if pi.domain().kind().is_sft() { degree_report(pi, &cfg)? } else { degree_on_sofic(pi, &cfg)? };
        if !d.finite_to_one {
            return Err(Error::NotFiniteToOne.into());
        }
        put(out, d.degree.ok_or(Error::StabilizationInconclusive)?)
    })
}

/// Class degree with its witness; `report` may be NULL.
///
/// # Safety
/// `c` is a live handle; `config` is NULL or a NUL-terminated string;
/// `out` is writable; `report` is NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn shc_code_class_degree(
    c: *const ShcCode,
    config: *const c_char,
    out: *mut usize,
    report: *mut *mut c_char,
) -> ShcStatus {
    guard(|| {
        let cfg = self::config(config)?;
        let pi = &get(c)?.inner;
        irreducible(pi.domain())?;
        let r = class_degree(pi, &cfg)?;
        put(out, r.class_degree)?;
        if !report.is_null() {
            put_json(report, &r)?;
        }
        Ok(())
    })
}

/// Factors `c` and verifies the factorization. Succeeds even when a check
/// fails; inspect `shc_decomposition_report`.
///
/// # Safety
/// `c` is a live handle; `config` is NULL or a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn shc_decompose(c: *const ShcCode, config: *const c_char, out: *mut *mut ShcDecomposition) -> ShcStatus {
    guard(|| {
        let cfg = self::config(config)?;
        let pi = &get(c)?.inner;
        let inner = build_decomposition(pi, &cfg)?;
        put_handle(out, ShcDecomposition { inner, codomain: pi.codomain().to_vec() })
    })
}

/// # Safety
/// `d` is a live handle; `all_passed` is NULL or writable; `report` is NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn shc_decomposition_report(
    d: *const ShcDecomposition,
    all_passed: *mut bool,
    report: *mut *mut c_char,
) -> ShcStatus {
    guard(|| {
        let d = &get(d)?.inner;
        if !all_passed.is_null() {
            put(all_passed, d.report.all_passed)?;
        }
        if !report.is_null() {
            put_json(report, json!({ "class_degree": &d.class_degree, "verification": &d.report }))?;
        }
        Ok(())
    })
}

/// The class-degree-one factor, defined on the domain of the original code.
///
/// # Safety
/// `d` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn shc_decomposition_pi1(d: *const ShcDecomposition, out: *mut *mut ShcCode) -> ShcStatus {
    guard(|| put_handle(out, ShcCode { inner: get(d)?.inner.pi1.clone() }))
}

/// The finite-to-one factor, a 1-block code on the intermediate shift.
///
/// # Safety
/// `d` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn shc_decomposition_pi2(d: *const ShcDecomposition, out: *mut *mut ShcCode) -> ShcStatus {
    guard(|| put_handle(out, ShcCode { inner: get(d)?.inner.pi2.clone() }))
}

/// The intermediate shift with its symbol decorations.
///
/// # Safety
/// `d` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn shc_decomposition_ytilde_json(d: *const ShcDecomposition, out: *mut *mut c_char) -> ShcStatus {
    guard(|| {
        let h = get(d)?;
        let x_names = h.inner.normalized.domain.alphabet().to_vec();
        put_json(out, ytilde_to_value(&h.inner, &h.codomain, &x_names))
    })
}

/// # Safety
/// `d` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn shc_decomposition_free(d: *mut ShcDecomposition) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Topological pressure of `phi` (JSON, NULL for zero) on `x`.
///
/// # Safety
/// `x` is a live handle; `phi` and `config` are NULL or NUL-terminated strings; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn shc_pressure(
    x: *const ShcPresentation,
    phi: *const c_char,
    config: *const c_char,
    out: *mut f64,
) -> ShcStatus {
    guard(|| {
        let cfg = self::config(config)?;
        let x = &get(x)?.inner;
        irreducible(x)?;
        let phi = potential(opt_text(phi)?, x, &cfg)?;
        put(out, pressure(x, &phi, &cfg)?.value)
    })
}

/// Equilibrium state of `phi` on `x` as JSON. Sofic shifts report the
/// measure on their cover together with the cover labels.
///
/// # Safety
/// `x` is a live handle; `phi` and `config` are NULL or NUL-terminated strings; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn shc_equilibrium(
    x: *const ShcPresentation,
    phi: *const c_char,
    config: *const c_char,
    out: *mut *mut c_char,
) -> ShcStatus {
    guard(|| {
        let cfg = self::config(config)?;
        let x = &get(x)?.inner;
        irreducible(x)?;
        let phi = potential(opt_text(phi)?, x, &cfg)?;
        let p = pressure(x, &phi, &cfg)?.value;
        let v: Value = if x.kind().is_sft() {
            json!({ "pressure": p, "measure": measure_to_value(&equilibrium_state(x, &phi, &cfg)?) })
        } else {
            let hm = sofic_equilibrium_state(x, &phi, &cfg)?;
            let labels: Vec<&String> = hm.map.iter().map(|&s| &hm.alphabet[s]).collect();
            json!({ "pressure": p, "cover_measure": measure_to_value(&hm.base), "labels": labels })
        };
        put_json(out, v)
    })
}

/// Maximizes relative pressure over lifts of the Markov measure `nu` at
/// the given order, from `seeds` starting points.
///
/// # Safety
/// `c` is a live handle; `nu` is a NUL-terminated string; `phi` and `config`
/// are NULL or NUL-terminated strings; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn shc_max_relative_pressure(
    c: *const ShcCode,
    nu: *const c_char,
    phi: *const c_char,
    order: usize,
    seeds: usize,
    config: *const c_char,
    out: *mut *mut c_char,
) -> ShcStatus {
    guard(|| {
        let cfg = self::config(config)?;
        let pi = &get(c)?.inner;
        irreducible(pi.domain())?;
        let nu = measure_from_json(text(nu)?)?;
        let phi = potential(opt_text(phi)?, pi.domain(), &cfg)?;
        let (problem, nc) = build_relaxation_for(pi, &nu, &phi, order, &cfg)?;
        let solved = solve_relaxation(&problem, seeds, &cfg)?;
        let support = support_report(&solved, &nc.domain, cfg.tolerances.support_floor);
        put_json(out, json!({ "solve": &solved, "support": &support }))
    })
}
