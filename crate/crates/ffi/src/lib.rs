//! C ABI for the regforge control toolkit.
//!
//! Models and trajectories are opaque handles created by `rf_*_new` style
//! functions and released with the matching `rf_*_free`. Every fallible call
//! returns an [`RfStatus`]; on failure [`rf_last_error_message`] describes
//! what went wrong on the calling thread. Matrices are dense row-major
//! `double` buffers.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use num_complex::Complex64;
use regforge::lti::{self, Matrix, Polynomial, StateSpaceModel, TransferFunction};
use regforge::plant::{self, GeneratorParams, PlantParams, PlantPreset, TurbineParams};
use regforge::riccati::{lqr_gain, CostWeights};
use regforge::sim::{self, SimConfig, TimeSeries};
use regforge::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RfStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    Unsupported = 3,
    Numerical = 4,
    Panic = 5,
}

/// Transfer function handle.
pub struct RfTransferFunction(TransferFunction);

/// State-space model handle.
pub struct RfStateSpace(StateSpaceModel);

/// Simulated trajectory handle.
pub struct RfTimeSeries(TimeSeries);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RfPlantParams {
    pub tau_t: f64,
    pub k1: f64,
    pub n: f64,
    pub l_f: f64,
    pub r_f: f64,
    pub l_a: f64,
    pub r_a: f64,
    pub r_l: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RfPreset {
    Exact = 0,
    PaperRounded = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RfElectricalReport {
    pub omega: f64,
    pub v_out: f64,
    pub i_a: f64,
    pub e_g: f64,
    pub p_out: f64,
    pub p_in: f64,
    pub efficiency: f64,
}

/// Step-response metrics. Undefined times are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RfStepMetrics {
    pub steady_state: f64,
    pub overshoot_pct: f64,
    pub settling_time: f64,
    pub rise_time: f64,
    pub degenerate: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure {
    status: RfStatus,
    message: String,
}

impl Failure {
    fn new(status: RfStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }

    fn null(what: &str) -> Self {
        Failure::new(RfStatus::NullPointer, format!("`{what}` is null"))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Unsupported(_) => RfStatus::Unsupported,
            Error::Singular
            | Error::SingularLoop
            | Error::PoleAtOrigin
            | Error::NotConverged { .. } => RfStatus::Numerical,
            _ => RfStatus::InvalidArgument,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            RfStatus::Ok
        }
        Ok(Err(fail)) => {
            set_last_error(&fail.message);
            fail.status
        }
        Err(_) => {
            set_last_error("internal panic");
            RfStatus::Panic
        }
    }
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(what))
}

unsafe fn store<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn matrix(p: *const f64, rows: usize, cols: usize, what: &str) -> Result<Matrix, Failure> {
    let data = input(p, rows * cols, what)?.to_vec();
    Ok(Matrix::from_vec(rows, cols, data)?)
}

fn plant_params(p: &RfPlantParams) -> PlantParams {
    PlantParams {
        turbine: TurbineParams { tau_t: p.tau_t },
        generator: GeneratorParams {
            k1: p.k1,
            n: p.n,
            l_f: p.l_f,
            r_f: p.r_f,
            l_a: p.l_a,
            r_a: p.r_a,
            r_l: p.r_l,
        },
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn rf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Reference parameter set of the turbine-generator plant.
#[no_mangle]
pub extern "C" fn rf_plant_params_reference() -> RfPlantParams {
    let p = PlantParams::reference();
    RfPlantParams {
        tau_t: p.turbine.tau_t,
        k1: p.generator.k1,
        n: p.generator.n,
        l_f: p.generator.l_f,
        r_f: p.generator.r_f,
        l_a: p.generator.l_a,
        r_a: p.generator.r_a,
        r_l: p.generator.r_l,
    }
}

/// Builds `num(s)/den(s)` from coefficients, highest power first.
///
/// # Safety
/// `num` and `den` must point to `num_len` and `den_len` readable doubles;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_tf_new(
    num: *const f64,
    num_len: usize,
    den: *const f64,
    den_len: usize,
    out: *mut *mut RfTransferFunction,
) -> RfStatus {
    guard(|| {
        let tf = TransferFunction::from_coeffs(
            input(num, num_len, "num")?,
            input(den, den_len, "den")?,
        )?;
        store(out, Box::into_raw(Box::new(RfTransferFunction(tf))), "out")
    })
}

/// # Safety
/// `tf` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rf_tf_free(tf: *mut RfTransferFunction) {
    if !tf.is_null() {
        drop(Box::from_raw(tf));
    }
}

/// Copies numerator and denominator coefficients. Each `*_len` is set to the
/// required length; nothing is copied into a buffer that is too small (the
/// call then fails with `InvalidArgument`).
///
/// # Safety
/// Buffers must hold `*_cap` doubles; length pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_tf_coeffs(
    tf: *const RfTransferFunction,
    num: *mut f64,
    num_cap: usize,
    num_len: *mut usize,
    den: *mut f64,
    den_cap: usize,
    den_len: *mut usize,
) -> RfStatus {
    guard(|| {
        let tf = &deref(tf, "tf")?.0;
        let (n, d) = (tf.num().coeffs(), tf.den().coeffs());
        store(num_len, n.len(), "num_len")?;
        store(den_len, d.len(), "den_len")?;
        if num_cap < n.len() || den_cap < d.len() {
            return Err(Failure::new(
                RfStatus::InvalidArgument,
                "coefficient buffer too small",
            ));
        }
        output(num, n.len(), "num")?.copy_from_slice(n);
        output(den, d.len(), "den")?.copy_from_slice(d);
        Ok(())
    })
}

/// # Safety
/// `tf` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_tf_dc_gain(tf: *const RfTransferFunction, out: *mut f64) -> RfStatus {
    guard(|| store(out, lti::dc_gain(&deref(tf, "tf")?.0)?, "out"))
}

/// Controllable canonical realization.
///
/// # Safety
/// `tf` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_tf_to_ss(
    tf: *const RfTransferFunction,
    out: *mut *mut RfStateSpace,
) -> RfStatus {
    guard(|| {
        let ss = lti::tf_to_ss(&deref(tf, "tf")?.0)?;
        store(out, Box::into_raw(Box::new(RfStateSpace(ss))), "out")
    })
}

/// Plant transfer function from physical parameters.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_plant_tf(
    params: *const RfPlantParams,
    preset: RfPreset,
    out: *mut *mut RfTransferFunction,
) -> RfStatus {
    guard(|| {
        let p = plant_params(deref(params, "params")?);
        p.validate()?;
        let preset = match preset {
            RfPreset::Exact => PlantPreset::Exact,
            RfPreset::PaperRounded => PlantPreset::PaperRounded,
        };
        let tf = plant::plant_model(&p, preset);
        store(out, Box::into_raw(Box::new(RfTransferFunction(tf))), "out")
    })
}

/// Steady electrical operating point for a constant steam flow (g/s).
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_steady_state_report(
    params: *const RfPlantParams,
    flow: f64,
    out: *mut RfElectricalReport,
) -> RfStatus {
    guard(|| {
        let r = plant::steady_state_report(&plant_params(deref(params, "params")?), flow)?;
        let report = RfElectricalReport {
            omega: r.omega,
            v_out: r.v_out,
            i_a: r.i_a,
            e_g: r.e_g,
            p_out: r.p_out,
            p_in: r.p_in,
            efficiency: r.efficiency,
        };
        store(out, report, "out")
    })
}

/// State-space model from row-major `a` (n×n), `b` (n×m), `c` (p×n), `d` (p×m).
///
/// # Safety
/// Each buffer must hold the stated number of doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_ss_new(
    n: usize,
    m: usize,
    p: usize,
    a: *const f64,
    b: *const f64,
    c: *const f64,
    d: *const f64,
    out: *mut *mut RfStateSpace,
) -> RfStatus {
    guard(|| {
        let ss = StateSpaceModel::new(
            matrix(a, n, n, "a")?,
            matrix(b, n, m, "b")?,
            matrix(c, p, n, "c")?,
            matrix(d, p, m, "d")?,
        )?;
        store(out, Box::into_raw(Box::new(RfStateSpace(ss))), "out")
    })
}

/// # Safety
/// `ss` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rf_ss_free(ss: *mut RfStateSpace) {
    if !ss.is_null() {
        drop(Box::from_raw(ss));
    }
}

/// States, inputs and outputs of a model.
///
/// # Safety
/// `ss` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_ss_dims(
    ss: *const RfStateSpace,
    n: *mut usize,
    m: *mut usize,
    p: *mut usize,
) -> RfStatus {
    guard(|| {
        let ss = &deref(ss, "ss")?.0;
        store(n, ss.states(), "n")?;
        store(m, ss.inputs(), "m")?;
        store(p, ss.outputs(), "p")
    })
}

/// Copies the four matrices row-major into buffers sized per [`rf_ss_dims`].
///
/// # Safety
/// `ss` must be a live handle; buffers must be large enough.
#[no_mangle]
pub unsafe extern "C" fn rf_ss_copy(
    ss: *const RfStateSpace,
    a: *mut f64,
    b: *mut f64,
    c: *mut f64,
    d: *mut f64,
) -> RfStatus {
    guard(|| {
        let ss = &deref(ss, "ss")?.0;
        for (src, dst, what) in [
            (ss.a(), a, "a"),
            (ss.b(), b, "b"),
            (ss.c(), c, "c"),
            (ss.d(), d, "d"),
        ] {
            output(dst, src.as_slice().len(), what)?.copy_from_slice(src.as_slice());
        }
        Ok(())
    })
}

/// Characteristic polynomial of a row-major n×n matrix; `coeffs` receives
/// n+1 values, highest power first.
///
/// # Safety
/// `a` must hold n·n doubles and `coeffs` n+1.
#[no_mangle]
pub unsafe extern "C" fn rf_char_poly(n: usize, a: *const f64, coeffs: *mut f64) -> RfStatus {
    guard(|| {
        let a = matrix(a, n, n, "a")?;
        let p = lti::char_poly(&a);
        output(coeffs, n + 1, "coeffs")?.copy_from_slice(&p.padded(n + 1));
        Ok(())
    })
}

/// Routh-Hurwitz test; `out` is true when every root is in the open left
/// half plane.
///
/// # Safety
/// `coeffs` must hold `len` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn rf_is_hurwitz(coeffs: *const f64, len: usize, out: *mut bool) -> RfStatus {
    guard(|| {
        let p = Polynomial::new(input(coeffs, len, "coeffs")?);
        store(out, lti::is_hurwitz(&p)?, "out")
    })
}

/// LQR gain for `(A, B)` with weights `Q` (n×n) and `R` (m×m). `k` receives
/// the m×n gain row-major; `residual` (optional) the Riccati residual norm.
///
/// # Safety
/// Buffers must hold the stated sizes; `residual` may be null.
#[no_mangle]
pub unsafe extern "C" fn rf_lqr_gain(
    n: usize,
    m: usize,
    a: *const f64,
    b: *const f64,
    q: *const f64,
    r: *const f64,
    k: *mut f64,
    residual: *mut f64,
) -> RfStatus {
    guard(|| {
        let weights = CostWeights::new(matrix(q, n, n, "q")?, matrix(r, m, m, "r")?)?;
        let lqr = lqr_gain(&matrix(a, n, n, "a")?, &matrix(b, n, m, "b")?, &weights)?;
        output(k, m * n, "k")?.copy_from_slice(lqr.k.as_slice());
        if !residual.is_null() {
            residual.write(lqr.solution.residual_norm);
        }
        Ok(())
    })
}

/// Single-input pole placement. Poles are given as separate real and
/// imaginary parts and must be closed under conjugation; `k` receives n gains.
///
/// # Safety
/// `a` must hold n·n doubles, `b`, `poles_re`, `poles_im` and `k` n each.
#[no_mangle]
pub unsafe extern "C" fn rf_place_poles(
    n: usize,
    a: *const f64,
    b: *const f64,
    poles_re: *const f64,
    poles_im: *const f64,
    k: *mut f64,
) -> RfStatus {
    guard(|| {
        let re = input(poles_re, n, "poles_re")?;
        let im = input(poles_im, n, "poles_im")?;
        let poles: Vec<Complex64> = re
            .iter()
            .zip(im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        let gain = regforge::observer::place_poles(
            &matrix(a, n, n, "a")?,
            &matrix(b, n, 1, "b")?,
            &poles,
        )?;
        output(k, n, "k")?.copy_from_slice(&gain);
        Ok(())
    })
}

/// Step response of a SISO model from rest with fixed step `dt`.
///
/// # Safety
/// `ss` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_simulate(
    ss: *const RfStateSpace,
    dt: f64,
    duration: f64,
    amplitude: f64,
    out: *mut *mut RfTimeSeries,
) -> RfStatus {
    guard(|| {
        let cfg = SimConfig {
            dt,
            duration,
            amplitude,
            ..SimConfig::default()
        };
        let ts = sim::simulate(&deref(ss, "ss")?.0, &cfg)?;
        store(out, Box::into_raw(Box::new(RfTimeSeries(ts))), "out")
    })
}

/// # Safety
/// `ts` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rf_series_free(ts: *mut RfTimeSeries) {
    if !ts.is_null() {
        drop(Box::from_raw(ts));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `ts` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_series_len(ts: *const RfTimeSeries) -> usize {
    ts.as_ref().map_or(0, |t| t.0.len())
}

/// Whether the run stopped early on an unbounded value.
///
/// # Safety
/// `ts` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_series_diverged(ts: *const RfTimeSeries) -> bool {
    ts.as_ref().is_some_and(|t| t.0.diverged)
}

/// Copies times, inputs and outputs; any buffer may be null to skip it.
/// Each non-null buffer must hold [`rf_series_len`] doubles.
///
/// # Safety
/// `ts` must be a live handle; buffers must be large enough.
#[no_mangle]
pub unsafe extern "C" fn rf_series_copy(
    ts: *const RfTimeSeries,
    t: *mut f64,
    u: *mut f64,
    y: *mut f64,
) -> RfStatus {
    guard(|| {
        let ts = &deref(ts, "ts")?.0;
        for (src, dst) in [(&ts.times, t), (&ts.inputs, u), (&ts.outputs, y)] {
            if !dst.is_null() {
                slice::from_raw_parts_mut(dst, src.len()).copy_from_slice(src);
            }
        }
        Ok(())
    })
}

/// Overshoot, 2 % settling time and 10-90 % rise time of a step response.
///
/// # Safety
/// `ts` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_step_metrics(
    ts: *const RfTimeSeries,
    out: *mut RfStepMetrics,
) -> RfStatus {
    guard(|| {
        let m = sim::step_metrics(&deref(ts, "ts")?.0)?;
        let metrics = RfStepMetrics {
            steady_state: m.steady_state,
            overshoot_pct: m.overshoot_pct,
            settling_time: m.settling_time.unwrap_or(f64::NAN),
            rise_time: m.rise_time.unwrap_or(f64::NAN),
            degenerate: m.degenerate,
        };
        store(out, metrics, "out")
    })
}
