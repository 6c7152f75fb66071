//! C ABI over the `sara` library.
//!
//! Objects are opaque handles created by `*_new` and released by `*_free`.
//! Every fallible call returns a [`SaraStatus`]; on failure the message is
//! available from [`sara_last_error_message`] on the same thread.
//!
//! Complex vectors are interleaved `double` pairs `(re, im)`; lengths count
//! complex elements. Images are real, row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sara::linops::parse_basis_list;
use sara::reweight::{sara_reconstruct as reconstruct, ReweightParams};
use sara::sensing::{
    build_gaussian, build_spread_spectrum, build_vdfourier, calibrate_noise, simulate_measurements, NoiseModel,
    SensingOperator,
};
use sara::solvers::SolverParams;
use sara::{Complex64, Dictionary, Error, Image};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaraStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Resource = 3,
    Io = 4,
    NotConverged = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaraSensingKind {
    SpreadSpectrum = 0,
    Gaussian = 1,
    /// Variable-density Fourier sampling; uses the `decay` argument.
    VdFourier = 2,
}

/// Opaque analysis dictionary.
pub struct SaraDictionary(Dictionary);

/// Opaque measurement operator.
pub struct SaraOperator(SensingOperator);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaraNoise {
    pub sigma_n: f64,
    pub isnr_db: f64,
    pub epsilon: f64,
    pub sigma_alpha: f64,
}

/// Inner solver settings. The data-fidelity radius comes from [`SaraNoise`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaraSolverParams {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub dr_gamma: f64,
    pub dr_lambda: f64,
    pub ball_proj_tol: f64,
    pub ball_proj_max_iters: usize,
    pub prox_tol: f64,
    pub prox_max_iters: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaraReweightParams {
    pub beta: f64,
    pub eta: f64,
    pub n_max: usize,
}

/// Summary of a reconstruction.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaraReport {
    /// Weighted solves performed, including the first unweighted one.
    pub solves: usize,
    pub inner_iterations: usize,
    pub gamma: f64,
    pub rho: f64,
    pub objective: f64,
    pub residual_norm: f64,
    /// False if any inner solve hit its iteration cap.
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SaraStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidArgument(_) | Error::Config(_) => SaraStatus::InvalidArgument,
            Error::Resource(_) => SaraStatus::Resource,
            Error::Io { .. } => SaraStatus::Io,
            Error::ProjectionNotConverged { .. } => SaraStatus::NotConverged,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(SaraStatus::NullPointer, format!("{what} is null"))
}

fn bad(msg: String) -> Failure {
    Failure(SaraStatus::InvalidArgument, msg)
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SaraStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SaraStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            SaraStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn complex_in(p: *const f64, len: usize, what: &str) -> Result<Vec<Complex64>, Failure> {
    let s = slice(p, 2 * len, what)?;
    Ok(s.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

unsafe fn complex_out(v: &[Complex64], p: *mut f64, len: usize, what: &str) -> Result<(), Failure> {
    if len != v.len() {
        return Err(bad(format!("{what} has room for {len} elements, {} needed", v.len())));
    }
    for (dst, c) in slice_mut(p, 2 * len, what)?.chunks_exact_mut(2).zip(v) {
        dst[0] = c.re;
        dst[1] = c.im;
    }
    Ok(())
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn expect_len(what: &str, got: usize, want: usize) -> Result<(), Failure> {
    if got != want {
        return Err(bad(format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn sara_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sara_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Dictionary over `width x height` images. `bases` is a comma-separated list
/// such as `"db1-db8,dirac"`.
///
/// # Safety
/// `bases` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sara_dictionary_new(
    bases: *const c_char,
    depth: usize,
    width: usize,
    height: usize,
    out: *mut *mut SaraDictionary,
) -> SaraStatus {
    guard(|| {
        if bases.is_null() {
            return Err(null("bases"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = CStr::from_ptr(bases)
            .to_str()
            .map_err(|_| bad("bases is not UTF-8".into()))?;
        let dict = Dictionary::new(&parse_basis_list(spec)?, depth, width, height)?;
        *out = Box::into_raw(Box::new(SaraDictionary(dict)));
        Ok(())
    })
}

/// # Safety
/// `dict` must come from [`sara_dictionary_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sara_dictionary_free(dict: *mut SaraDictionary) {
    if !dict.is_null() {
        drop(Box::from_raw(dict));
    }
}

/// Number of pixels N; 0 for a null handle.
///
/// # Safety
/// `dict` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sara_dictionary_signal_len(dict: *const SaraDictionary) -> usize {
    dict.as_ref().map_or(0, |d| d.0.signal_len())
}

/// Number of coefficients D = qN; 0 for a null handle.
///
/// # Safety
/// `dict` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sara_dictionary_coeff_len(dict: *const SaraDictionary) -> usize {
    dict.as_ref().map_or(0, |d| d.0.coeff_len())
}

/// Analysis coefficients of a complex image.
///
/// # Safety
/// `x` holds `x_len` complex values and `out` room for `out_len`.
#[no_mangle]
pub unsafe extern "C" fn sara_dictionary_analysis(
    dict: *const SaraDictionary,
    x: *const f64,
    x_len: usize,
    out: *mut f64,
    out_len: usize,
) -> SaraStatus {
    guard(|| {
        let d = &handle(dict, "dict")?.0;
        let alpha = d.analysis(&complex_in(x, x_len, "x")?)?;
        complex_out(&alpha, out, out_len, "out")
    })
}

/// Image synthesized from coefficients; the adjoint of the analysis.
///
/// # Safety
/// `alpha` holds `alpha_len` complex values and `out` room for `out_len`.
#[no_mangle]
pub unsafe extern "C" fn sara_dictionary_synthesis(
    dict: *const SaraDictionary,
    alpha: *const f64,
    alpha_len: usize,
    out: *mut f64,
    out_len: usize,
) -> SaraStatus {
    guard(|| {
        let d = &handle(dict, "dict")?.0;
        let x = d.synthesis(&complex_in(alpha, alpha_len, "alpha")?)?;
        complex_out(&x, out, out_len, "out")
    })
}

/// Measurement operator taking `m` samples of a `width x height` image.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sara_operator_new(
    kind: SaraSensingKind,
    width: usize,
    height: usize,
    m: usize,
    seed: u64,
    decay: f64,
    out: *mut *mut SaraOperator,
) -> SaraStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let op = match kind {
            SaraSensingKind::SpreadSpectrum => build_spread_spectrum(width, height, m, seed)?,
            SaraSensingKind::Gaussian => build_gaussian(width, height, m, seed)?,
            SaraSensingKind::VdFourier => build_vdfourier(width, height, m, seed, decay)?,
        };
        *out = Box::into_raw(Box::new(SaraOperator(op)));
        Ok(())
    })
}

/// # Safety
/// `op` must come from [`sara_operator_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sara_operator_free(op: *mut SaraOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Number of measurements M; 0 for a null handle.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sara_operator_m(op: *const SaraOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.m())
}

/// Number of pixels N; 0 for a null handle.
///
/// # Safety
/// `op` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sara_operator_n(op: *const SaraOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.n())
}

/// `out = Phi x`.
///
/// # Safety
/// `x` holds `n` complex values and `out` room for `m`.
#[no_mangle]
pub unsafe extern "C" fn sara_operator_apply(
    op: *const SaraOperator,
    x: *const f64,
    n: usize,
    out: *mut f64,
    m: usize,
) -> SaraStatus {
    guard(|| {
        let o = &handle(op, "op")?.0;
        expect_len("x", n, o.n())?;
        complex_out(&o.apply(&complex_in(x, n, "x")?), out, m, "out")
    })
}

/// `out = Phi^* y`.
///
/// # Safety
/// `y` holds `m` complex values and `out` room for `n`.
#[no_mangle]
pub unsafe extern "C" fn sara_operator_adjoint(
    op: *const SaraOperator,
    y: *const f64,
    m: usize,
    out: *mut f64,
    n: usize,
) -> SaraStatus {
    guard(|| {
        let o = &handle(op, "op")?.0;
        expect_len("y", m, o.m())?;
        complex_out(&o.apply_adjoint(&complex_in(y, m, "y")?), out, n, "out")
    })
}

/// Noise level giving `isnr_db` on the clean measurements of `image`, with
/// the ball radius and the sparsity-domain level for `dict`.
///
/// # Safety
/// `image` holds `n` values and `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sara_calibrate_noise(
    op: *const SaraOperator,
    dict: *const SaraDictionary,
    image: *const f64,
    n: usize,
    isnr_db: f64,
    out: *mut SaraNoise,
) -> SaraStatus {
    guard(|| {
        let o = &handle(op, "op")?.0;
        let d = &handle(dict, "dict")?.0;
        expect_len("image", n, o.n())?;
        if out.is_null() {
            return Err(null("out"));
        }
        let nm = calibrate_noise(&o.apply_real(slice(image, n, "image")?), isnr_db, d.coeff_len())?;
        *out = SaraNoise {
            sigma_n: nm.sigma_n,
            isnr_db: nm.isnr_db,
            epsilon: nm.epsilon,
            sigma_alpha: nm.sigma_alpha,
        };
        Ok(())
    })
}

/// `y = Phi x + n` with complex Gaussian noise of level `noise->sigma_n`.
///
/// # Safety
/// `image` holds `n` values, `y_out` room for `m` complex values.
#[no_mangle]
pub unsafe extern "C" fn sara_simulate_measurements(
    op: *const SaraOperator,
    noise: *const SaraNoise,
    image: *const f64,
    n: usize,
    seed: u64,
    y_out: *mut f64,
    m: usize,
) -> SaraStatus {
    guard(|| {
        let o = &handle(op, "op")?.0;
        let nm = noise_model(handle(noise, "noise")?);
        let (w, h) = o.dims();
        expect_len("image", n, w * h)?;
        let img = Image::new(w, h, slice(image, n, "image")?.to_vec())?;
        let meas = simulate_measurements(&img, o, &nm, seed)?;
        complex_out(&meas.y, y_out, m, "y_out")
    })
}

fn noise_model(n: &SaraNoise) -> NoiseModel {
    NoiseModel {
        sigma_n: n.sigma_n,
        isnr_db: n.isnr_db,
        epsilon: n.epsilon,
        sigma_alpha: n.sigma_alpha,
    }
}

#[no_mangle]
pub extern "C" fn sara_solver_params_default() -> SaraSolverParams {
    let p = SolverParams::default();
    SaraSolverParams {
        max_iters: p.max_iters,
        rel_tol: p.rel_tol,
        dr_gamma: p.dr_gamma,
        dr_lambda: p.dr_lambda,
        ball_proj_tol: p.ball_proj_tol,
        ball_proj_max_iters: p.ball_proj_max_iters,
        prox_tol: p.prox_tol,
        prox_max_iters: p.prox_max_iters,
    }
}

#[no_mangle]
pub extern "C" fn sara_reweight_params_default() -> SaraReweightParams {
    let p = ReweightParams::default();
    SaraReweightParams {
        beta: p.beta,
        eta: p.eta,
        n_max: p.n_max,
    }
}

/// Reweighted reconstruction from measurements `y`. `reweight` and `solver`
/// may be NULL for defaults; `n_max = 1` gives the unweighted solve.
/// `report` may be NULL.
///
/// # Safety
/// `y` holds `m` complex values, `x_out` room for `n` values.
#[no_mangle]
pub unsafe extern "C" fn sara_reconstruct(
    op: *const SaraOperator,
    dict: *const SaraDictionary,
    y: *const f64,
    m: usize,
    noise: *const SaraNoise,
    reweight: *const SaraReweightParams,
    solver: *const SaraSolverParams,
    x_out: *mut f64,
    n: usize,
    report: *mut SaraReport,
) -> SaraStatus {
    guard(|| {
        let o = &handle(op, "op")?.0;
        let d = &handle(dict, "dict")?.0;
        let nm = noise_model(handle(noise, "noise")?);
        expect_len("y", m, o.m())?;
        expect_len("x_out", n, o.n())?;
        if o.dims() != d.dims() {
            return Err(bad("operator and dictionary image sizes differ".into()));
        }
        let rw = reweight
            .as_ref()
            .copied()
            .unwrap_or_else(|| sara_reweight_params_default());
        let sp = solver.as_ref().copied().unwrap_or_else(|| sara_solver_params_default());
        let rw = ReweightParams {
            beta: rw.beta,
            eta: rw.eta,
            n_max: rw.n_max,
        };
        let sp = SolverParams {
            epsilon: nm.epsilon,
            max_iters: sp.max_iters,
            rel_tol: sp.rel_tol,
            dr_gamma: sp.dr_gamma,
            dr_lambda: sp.dr_lambda,
            ball_proj_tol: sp.ball_proj_tol,
            ball_proj_max_iters: sp.ball_proj_max_iters,
            prox_tol: sp.prox_tol,
            prox_max_iters: sp.prox_max_iters,
        };
        sp.validate()?;
        let (x, state) = reconstruct(&complex_in(y, m, "y")?, o, d, &nm, &rw, &sp)?;
        slice_mut(x_out, n, "x_out")?.copy_from_slice(&x);
        if let Some(r) = report.as_mut() {
            let last = state.history.last();
            *r = SaraReport {
                solves: state.t,
                inner_iterations: state.total_inner_iterations(),
                gamma: state.gamma,
                rho: state.rho,
                objective: last.map_or(f64::NAN, |h| h.objective),
                residual_norm: last.map_or(f64::NAN, |h| h.residual_norm),
                converged: state.history.iter().all(|h| h.converged),
            };
        }
        Ok(())
    })
}

/// `20 log10(|x| / |x - x_hat|)` in dB.
///
/// # Safety
/// `x` and `x_hat` hold `n` values, `out` is a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sara_snr(x: *const f64, x_hat: *const f64, n: usize, out: *mut f64) -> SaraStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = sara::metrics::snr(slice(x, n, "x")?, slice(x_hat, n, "x_hat")?)?;
        Ok(())
    })
}
