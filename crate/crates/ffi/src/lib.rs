//! C ABI for the subgauss-lab numerical laboratory.
//!
//! Conventions:
//! - every entry point returns a `SlabStatus`; outputs go through pointers;
//! - `SlabSpec` is an opaque handle created by `slab_spec_from_json` and
//!   released by `slab_spec_free`;
//! - strings returned by the library are UTF-8, NUL-terminated, and must be
//!   released with `slab_string_free`;
//! - on any non-ok status, `slab_last_error` returns a thread-local message
//!   valid until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use subgauss_lab::config;
use subgauss_lab::conv::CfParams;
use subgauss_lab::diag;
use subgauss_lab::dist::DistributionSpec;
use subgauss_lab::div::{self, TailCertificate};
use subgauss_lab::llt;
use subgauss_lab::sweep::{self, MethodPreference};
use subgauss_lab::tilt;

/// Status codes returned by every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlabStatus {
    Ok = 0,
    InvalidArgument = 1,
    ParseError = 2,
    ComputeError = 3,
    InternalPanic = 4,
}

/// Opaque handle to a validated distribution spec.
pub struct SlabSpec {
    spec: DistributionSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&ch| ch != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn classify(err: &subgauss_lab::Error) -> SlabStatus {
    use subgauss_lab::Error::*;
    match err {
        ParseError(_) | ValidationError(_) | RejectsInadmissibleC { .. }
        | RejectsNonStandardized(_) => SlabStatus::ParseError,
        _ => SlabStatus::ComputeError,
    }
}

fn guarded<F: FnOnce() -> SlabStatus>(f: F) -> SlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            SlabStatus::InternalPanic
        }
    }
}

fn string_out(s: String, out: *mut *mut c_char) -> SlabStatus {
    match CString::new(s) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            SlabStatus::Ok
        }
        Err(_) => {
            set_error("output contained an interior NUL");
            SlabStatus::InternalPanic
        }
    }
}

/// Library version as a static string (never freed).
#[no_mangle]
pub extern "C" fn slab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message describing the most recent failure on this thread.
#[no_mangle]
pub extern "C" fn slab_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parse and validate a spec document (same JSON schema as the CLI).
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be non-null.
#[no_mangle]
pub unsafe extern "C" fn slab_spec_from_json(
    json: *const c_char,
    out: *mut *mut SlabSpec,
) -> SlabStatus {
    if json.is_null() || out.is_null() {
        set_error("null pointer argument");
        return SlabStatus::InvalidArgument;
    }
    guarded(|| {
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("spec document is not valid UTF-8");
                return SlabStatus::InvalidArgument;
            }
        };
        let doc: serde_json::Value = match serde_json::from_str(text) {
            Ok(v) => v,
            Err(e) => {
                set_error(&format!("invalid JSON: {e}"));
                return SlabStatus::ParseError;
            }
        };
        match config::parse_spec(&doc) {
            Ok(spec) => {
                let handle = Box::new(SlabSpec { spec });
                unsafe { *out = Box::into_raw(handle) };
                SlabStatus::Ok
            }
            Err(e) => {
                set_error(&format!("{e}"));
                classify(&e)
            }
        }
    })
}

/// Release a spec handle.
///
/// # Safety
/// `spec` must come from `slab_spec_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn slab_spec_free(spec: *mut SlabSpec) {
    if !spec.is_null() {
        drop(unsafe { Box::from_raw(spec) });
    }
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must come from a slab_* call that documents this deallocator.
#[no_mangle]
pub unsafe extern "C" fn slab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Full diagnostics report as a JSON string.
///
/// # Safety
/// `spec` must be a live handle; `out_json` must be non-null.
#[no_mangle]
pub unsafe extern "C" fn slab_diagnose_json(
    spec: *const SlabSpec,
    out_json: *mut *mut c_char,
) -> SlabStatus {
    if spec.is_null() || out_json.is_null() {
        set_error("null pointer argument");
        return SlabStatus::InvalidArgument;
    }
    let spec = unsafe { &(*spec).spec };
    guarded(|| {
        let run = || -> subgauss_lab::Result<String> {
            let prof = tilt::default_profile(spec)?;
            let rep = diag::diagnose(spec, &prof)?;
            Ok(serde_json::to_string_pretty(&rep).expect("report serializes"))
        };
        match run() {
            Ok(s) => string_out(s, out_json),
            Err(e) => {
                set_error(&format!("{e}"));
                classify(&e)
            }
        }
    })
}

/// Divergence report for Z_n over the default alpha ladder, as JSON.
///
/// # Safety
/// `spec` must be a live handle; `out_json` must be non-null.
#[no_mangle]
pub unsafe extern "C" fn slab_divergence_json(
    spec: *const SlabSpec,
    n: u32,
    out_json: *mut *mut c_char,
) -> SlabStatus {
    if spec.is_null() || out_json.is_null() {
        set_error("null pointer argument");
        return SlabStatus::InvalidArgument;
    }
    let spec = unsafe { &(*spec).spec };
    guarded(|| {
        let run = || -> subgauss_lab::Result<String> {
            let sd = llt::density_auto(spec, n)?;
            let parts = if matches!(spec, DistributionSpec::TrigGaussian { .. }) {
                None
            } else {
                let prof = tilt::default_profile(spec)?;
                let base = subgauss_lab::conv::gridconv_for_spec(spec, 1, None)?;
                let (t1, _, _) = div::t_inf(&base, None)?;
                Some((prof, 1.0 + t1))
            };
            let cert = parts.as_ref().map(|(p, c)| TailCertificate {
                spec,
                profile: p,
                c_base: *c,
            });
            let rep = div::report(&sd, &div::DEFAULT_ALPHAS, cert.as_ref())?;
            Ok(serde_json::to_string_pretty(&rep).expect("report serializes"))
        };
        match run() {
            Ok(s) => string_out(s, out_json),
            Err(e) => {
                set_error(&format!("{e}"));
                classify(&e)
            }
        }
    })
}

/// T_inf(p_n || phi) and its maximizer.
///
/// # Safety
/// `spec` must be a live handle; `out_t_inf` and `out_argmax` non-null.
#[no_mangle]
pub unsafe extern "C" fn slab_t_inf(
    spec: *const SlabSpec,
    n: u32,
    out_t_inf: *mut f64,
    out_argmax: *mut f64,
) -> SlabStatus {
    if spec.is_null() || out_t_inf.is_null() || out_argmax.is_null() {
        set_error("null pointer argument");
        return SlabStatus::InvalidArgument;
    }
    let spec = unsafe { &(*spec).spec };
    guarded(|| {
        let run = || -> subgauss_lab::Result<(f64, f64)> {
            let sd = llt::density_auto(spec, n)?;
            let parts = if matches!(spec, DistributionSpec::TrigGaussian { .. }) {
                None
            } else {
                let prof = tilt::default_profile(spec)?;
                let base = subgauss_lab::conv::gridconv_for_spec(spec, 1, None)?;
                let (t1, _, _) = div::t_inf(&base, None)?;
                Some((prof, 1.0 + t1))
            };
            let cert = parts.as_ref().map(|(p, c)| TailCertificate {
                spec,
                profile: p,
                c_base: *c,
            });
            let (t, x, _) = div::t_inf(&sd, cert.as_ref())?;
            Ok((t, x))
        };
        match run() {
            Ok((t, x)) => {
                unsafe {
                    *out_t_inf = t;
                    *out_argmax = x;
                }
                SlabStatus::Ok
            }
            Err(e) => {
                set_error(&format!("{e}"));
                classify(&e)
            }
        }
    })
}

/// Rate sweep over an n ladder, as the sweep-summary JSON.
///
/// # Safety
/// `spec` must be a live handle; `n_list` must point to `n_len` entries;
/// `out_json` must be non-null.
#[no_mangle]
pub unsafe extern "C" fn slab_sweep_json(
    spec: *const SlabSpec,
    n_list: *const u32,
    n_len: usize,
    out_json: *mut *mut c_char,
) -> SlabStatus {
    if spec.is_null() || n_list.is_null() || out_json.is_null() || n_len == 0 {
        set_error("null pointer or empty ladder");
        return SlabStatus::InvalidArgument;
    }
    let spec = unsafe { &(*spec).spec };
    let ladder = unsafe { std::slice::from_raw_parts(n_list, n_len) }.to_vec();
    guarded(|| {
        let pref = match spec {
            DistributionSpec::TrigGaussian { .. } => MethodPreference::Spectral,
            _ => MethodPreference::Auto,
        };
        match sweep::run_sweep(spec, &ladder, pref) {
            Ok(sw) => string_out(
                serde_json::to_string_pretty(&sw).expect("sweep serializes"),
                out_json,
            ),
            Err(e) => {
                set_error(&format!("{e}"));
                classify(&e)
            }
        }
    })
}

/// Density of Z_n tabulated on its natural grid, written as parallel arrays.
/// Returns the number of points through `out_len` after filling at most
/// `cap` entries of `xs`/`ps` (call with cap = 0 to query the size).
///
/// # Safety
/// `spec` must be a live handle; `xs`/`ps` must hold `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn slab_density_grid(
    spec: *const SlabSpec,
    n: u32,
    xs: *mut f64,
    ps: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> SlabStatus {
    if spec.is_null() || out_len.is_null() {
        set_error("null pointer argument");
        return SlabStatus::InvalidArgument;
    }
    let spec = unsafe { &(*spec).spec };
    guarded(|| {
        let run = || -> subgauss_lab::Result<(Vec<f64>, Vec<f64>)> {
            let sd = match spec {
                DistributionSpec::TrigGaussian { .. } => {
                    subgauss_lab::conv::density_zn_spectral(spec, n)?
                }
                _ if n == 1 => subgauss_lab::conv::gridconv_for_spec(spec, 1, None)?,
                _ => subgauss_lab::conv::density_zn_cf(spec, n, CfParams::default())?,
            };
            Ok(match &sd.payload {
                subgauss_lab::conv::Payload::Grid(g) => {
                    let xs: Vec<f64> = (0..g.n_points()).map(|i| g.x_at(i)).collect();
                    (xs, g.values.clone())
                }
                subgauss_lab::conv::Payload::Spectral(_) => {
                    let m = 4097usize;
                    let xs: Vec<f64> = (0..m).map(|i| -12.0 + 24.0 * i as f64 / (m - 1) as f64).collect();
                    let ps: Vec<f64> = xs.iter().map(|&x| sd.density_at(x)).collect();
                    (xs, ps)
                }
            })
        };
        match run() {
            Ok((gx, gp)) => {
                unsafe { *out_len = gx.len() };
                if cap > 0 {
                    if xs.is_null() || ps.is_null() {
                        set_error("null output buffers with nonzero cap");
                        return SlabStatus::InvalidArgument;
                    }
                    let m = cap.min(gx.len());
                    unsafe {
                        ptr::copy_nonoverlapping(gx.as_ptr(), xs, m);
                        ptr::copy_nonoverlapping(gp.as_ptr(), ps, m);
                    }
                }
                SlabStatus::Ok
            }
            Err(e) => {
                set_error(&format!("{e}"));
                classify(&e)
            }
        }
    })
}
