//! C ABI over gdtau. Symbols are opaque handles created by `gdtau_symbol_*`
//! and released with [`gdtau_symbol_free`]. Every call returns a
//! [`GdtauStatus`]; on failure [`gdtau_last_error`] describes it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use gdtau::cli::{self, Command, Options};
use gdtau::factorization::{wiener_hopf_auto, DEFAULT_TOL};
use gdtau::laurent::{inverse_transform, DEFAULT_SAMPLES};
use gdtau::symbols::{covering_spec, gd_symbol_auto, rational_spec, SymbolSpec, TimeVector};
use gdtau::tau::{tau_numeric, tau_stable};
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GdtauStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The numerical routine reported an error.
    Computation = 3,
    Panic = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GdtauCommand {
    Verify = 0,
    Tau = 1,
    Converge = 2,
    Factorize = 3,
    Spectral = 4,
}

/// Opaque symbol handle.
pub struct GdtauSymbol {
    spec: SymbolSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn guard(f: impl FnOnce() -> Result<(), (GdtauStatus, String)>) -> GdtauStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GdtauStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside gdtau");
            GdtauStatus::Panic
        }
    }
}

fn computation(e: gdtau::Error) -> (GdtauStatus, String) {
    let status = match e {
        gdtau::Error::Spec(_) | gdtau::Error::Analyticity(_) | gdtau::Error::Config(_) => {
            GdtauStatus::InvalidArgument
        }
        _ => GdtauStatus::Computation,
    };
    (status, e.to_string())
}

fn null(what: &str) -> (GdtauStatus, String) {
    (GdtauStatus::NullPointer, format!("{what} is null"))
}

/// Reads `len` complex numbers from split real and imaginary arrays; a null
/// `im` means all imaginary parts are zero.
unsafe fn complex_array(re: *const f64, im: *const f64, len: usize) -> Result<Vec<Complex64>, (GdtauStatus, String)> {
    if re.is_null() {
        return Err(null("re"));
    }
    let re = std::slice::from_raw_parts(re, len);
    let im = if im.is_null() {
        vec![0.0; len]
    } else {
        std::slice::from_raw_parts(im, len).to_vec()
    };
    Ok(re.iter().zip(im).map(|(a, b)| Complex64::new(*a, b)).collect())
}

/// Real times t₁..t_len; the entries t_k with n | k must be zero.
unsafe fn times(spec: &SymbolSpec, t: *const f64, len: usize) -> Result<TimeVector, (GdtauStatus, String)> {
    if t.is_null() && len > 0 {
        return Err(null("t"));
    }
    let vals: &[f64] = if len == 0 { &[] } else { std::slice::from_raw_parts(t, len) };
    let n = spec.n();
    for (i, v) in vals.iter().enumerate() {
        if !v.is_finite() {
            return Err((GdtauStatus::InvalidArgument, format!("t_{} is not finite", i + 1)));
        }
        if (i + 1) % n == 0 && *v != 0.0 {
            return Err((
                GdtauStatus::InvalidArgument,
                format!("t_{} must be 0 for n = {n}", i + 1),
            ));
        }
    }
    Ok(TimeVector::real(vals, n, true))
}

unsafe fn store_symbol(spec: SymbolSpec, out: *mut *mut GdtauSymbol) {
    *out = Box::into_raw(Box::new(GdtauSymbol { spec }));
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next gdtau call on the same thread.
#[no_mangle]
pub extern "C" fn gdtau_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// 𝒲(z) = diag(1 − c_i²/z).
///
/// # Safety
/// `c_re` (and `c_im` unless null) must point to `len` doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gdtau_symbol_rational(
    c_re: *const f64,
    c_im: *const f64,
    len: usize,
    out: *mut *mut GdtauSymbol,
) -> GdtauStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let c = complex_array(c_re, c_im, len)?;
        store_symbol(rational_spec(&c).map_err(computation)?, out);
        Ok(())
    })
}

/// Symmetric n-covering with branch points a_j.
///
/// # Safety
/// As for [`gdtau_symbol_rational`].
#[no_mangle]
pub unsafe extern "C" fn gdtau_symbol_covering(
    a_re: *const f64,
    a_im: *const f64,
    len: usize,
    n: usize,
    out: *mut *mut GdtauSymbol,
) -> GdtauStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let a = complex_array(a_re, a_im, len)?;
        store_symbol(covering_spec(&a, n).map_err(computation)?, out);
        Ok(())
    })
}

/// # Safety
/// `symbol` must come from a `gdtau_symbol_*` constructor and not be used
/// afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn gdtau_symbol_free(symbol: *mut GdtauSymbol) {
    if !symbol.is_null() {
        drop(Box::from_raw(symbol));
    }
}

/// Block size n, or 0 for a null handle.
///
/// # Safety
/// `symbol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gdtau_symbol_n(symbol: *const GdtauSymbol) -> usize {
    symbol.as_ref().map_or(0, |s| s.spec.n())
}

unsafe fn symbol_ref<'a>(symbol: *const GdtauSymbol) -> Result<&'a SymbolSpec, (GdtauStatus, String)> {
    symbol.as_ref().map(|s| &s.spec).ok_or_else(|| null("symbol"))
}

unsafe fn write_complex(z: Complex64, re: *mut f64, im: *mut f64) -> Result<(), (GdtauStatus, String)> {
    if re.is_null() || im.is_null() {
        return Err(null("output"));
    }
    *re = z.re;
    *im = z.im;
    Ok(())
}

/// τ_{W,N}(t) = det T_N(𝒲(t; z)).
///
/// # Safety
/// `t` must point to `len` doubles; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn gdtau_tau_numeric(
    symbol: *const GdtauSymbol,
    t: *const f64,
    len: usize,
    blocks: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> GdtauStatus {
    guard(|| {
        let spec = symbol_ref(symbol)?;
        if blocks == 0 {
            return Err((GdtauStatus::InvalidArgument, "blocks must be positive".into()));
        }
        let tv = times(spec, t, len)?;
        write_complex(tau_numeric(spec, &tv, blocks).map_err(computation)?, out_re, out_im)
    })
}

/// Stable τ_W(t) as a Fredholm determinant; `out_err` (nullable) receives
/// the finite-section error estimate.
///
/// # Safety
/// As for [`gdtau_tau_numeric`].
#[no_mangle]
pub unsafe extern "C" fn gdtau_tau_stable(
    symbol: *const GdtauSymbol,
    t: *const f64,
    len: usize,
    tol: f64,
    out_re: *mut f64,
    out_im: *mut f64,
    out_err: *mut f64,
) -> GdtauStatus {
    guard(|| {
        let spec = symbol_ref(symbol)?;
        if !(tol > 0.0) {
            return Err((GdtauStatus::InvalidArgument, "tol must be positive".into()));
        }
        let tv = times(spec, t, len)?;
        let st = tau_stable(spec, &tv, tol).map_err(computation)?;
        write_complex(st.value, out_re, out_im)?;
        if !out_err.is_null() {
            *out_err = st.fredholm.est_error;
        }
        Ok(())
    })
}

/// Certificate of the factorization 𝒲(t; z) = T₋T₊.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GdtauFactorCertificate {
    pub band: usize,
    pub residual: f64,
    pub leakage: f64,
    pub cond: f64,
    pub det_plus_deviation: f64,
}

/// # Safety
/// `t` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gdtau_factorize(
    symbol: *const GdtauSymbol,
    t: *const f64,
    len: usize,
    out: *mut GdtauFactorCertificate,
) -> GdtauStatus {
    guard(|| {
        let spec = symbol_ref(symbol)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let tv = times(spec, t, len)?;
        let lm = gd_symbol_auto(spec, &tv, spec.default_depth()).map_err(computation)?;
        let m = (4 * (lm.hi() - lm.lo() + 1) as usize)
            .next_power_of_two()
            .max(DEFAULT_SAMPLES);
        let x = inverse_transform(&lm, m).map_err(computation)?;
        let f = wiener_hopf_auto(&x, (-lm.lo()) as usize, DEFAULT_TOL).map_err(computation)?;
        *out = GdtauFactorCertificate {
            band: f.band(),
            residual: f.residual,
            leakage: f.leakage,
            cond: f.cond,
            det_plus_deviation: f.det_plus_deviation().map_err(computation)?,
        };
        Ok(())
    })
}

/// Runs a CLI command on a config file. `out_dir` may be null for the usual
/// precedence. `exit_code` receives 0, 1 or 2 as the binary would return.
///
/// # Safety
/// `config_path` and a non-null `out_dir` must be NUL-terminated UTF-8;
/// `exit_code` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gdtau_run(
    config_path: *const c_char,
    command: GdtauCommand,
    out_dir: *const c_char,
    seed: u64,
    exit_code: *mut i32,
) -> GdtauStatus {
    guard(|| {
        if config_path.is_null() {
            return Err(null("config_path"));
        }
        if exit_code.is_null() {
            return Err(null("exit_code"));
        }
        let utf8 = |p: *const c_char| -> Result<PathBuf, (GdtauStatus, String)> {
            CStr::from_ptr(p)
                .to_str()
                .map(PathBuf::from)
                .map_err(|_| (GdtauStatus::InvalidArgument, "path is not UTF-8".into()))
        };
        let opts = Options {
            config: utf8(config_path)?,
            out: if out_dir.is_null() { None } else { Some(utf8(out_dir)?) },
            tol: None,
            threads: None,
            seed,
        };
        let cmd = match command {
            GdtauCommand::Verify => Command::Verify,
            GdtauCommand::Tau => Command::Tau,
            GdtauCommand::Converge => Command::Converge,
            GdtauCommand::Factorize => Command::Factorize,
            GdtauCommand::Spectral => Command::Spectral,
        };
        *exit_code = cli::run(cmd, &opts);
        Ok(())
    })
}
