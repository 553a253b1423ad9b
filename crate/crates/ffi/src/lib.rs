//! C ABI over `lti_sysid`.
//!
//! Every object crosses the boundary as an opaque pointer that the caller
//! releases with the matching `*_free`. Functions return an [`LtiStatus`];
//! on failure [`lti_last_error_message`] describes what went wrong on the
//! calling thread. Matrices are passed as row-major `double` arrays.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use lti_sysid::bounds::{corollary2_bound, theorem1_bound, BoundReport};
use lti_sysid::estimators::{assemble_data_matrices, ols_final_sample, ols_full, ols_unequal_length};
use lti_sysid::experiments::{builtin_system, random_system};
use lti_sysid::lti::{load_dataset, save_dataset, simulate_dataset, true_markov};
use lti_sysid::numerics::Matrix;
use lti_sysid::{MarkovMatrix, NoiseConfig, Realization, RolloutDataset, SysIdError, SystemModel};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtiStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    DimensionMismatch = 3,
    NotFound = 4,
    Io = 5,
    /// Rank deficiency, under-excitation, instability or non-convergence.
    Numeric = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Which estimator `lti_estimate` runs.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtiMethod {
    Full = 0,
    FinalSample = 1,
    UnequalLength = 2,
}

/// Which realization matrix to copy out.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtiRealizationPart {
    A = 0,
    B = 1,
    C = 2,
    D = 3,
}

/// Standard deviations of the input and the three noise sources.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LtiNoise {
    pub sigma_u: f64,
    pub sigma_w: f64,
    pub sigma_v: f64,
    pub sigma_0: f64,
}

/// Plain-data copy of a bound evaluation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LtiBound {
    pub n_threshold: usize,
    pub valid: bool,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub bound_value: f64,
    pub f_norm: f64,
    pub dv_norm: f64,
    pub h_norm: f64,
}

pub struct LtiSystem(SystemModel);
pub struct LtiDataset(RolloutDataset);
pub struct LtiMarkov(MarkovMatrix);
pub struct LtiRealization(Realization);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &SysIdError) -> LtiStatus {
    match e {
        SysIdError::DimensionMismatch(_) => LtiStatus::DimensionMismatch,
        SysIdError::NotFound(_) => LtiStatus::NotFound,
        SysIdError::Io(_) => LtiStatus::Io,
        e if e.is_numeric() => LtiStatus::Numeric,
        _ => LtiStatus::InvalidInput,
    }
}

struct Failure(LtiStatus, String);

impl From<SysIdError> for Failure {
    fn from(e: SysIdError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(LtiStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LtiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LtiStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LtiStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_slot<'a, T>(p: *mut *mut T) -> Result<&'a mut *mut T, Failure> {
    let slot = p.as_mut().ok_or_else(|| null("output pointer"))?;
    *slot = ptr::null_mut();
    Ok(slot)
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(LtiStatus::InvalidInput, format!("{what} is not valid UTF-8")))
}

unsafe fn read_matrix(data: *const f64, rows: usize, cols: usize, what: &str) -> Result<Matrix, Failure> {
    if rows * cols == 0 {
        return Ok(Matrix::zeros(rows, cols));
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(Matrix::from_row_slice(rows, cols, std::slice::from_raw_parts(data, rows * cols)))
}

unsafe fn write_matrix(m: &Matrix, out: *mut f64, len: usize) -> Result<(), Failure> {
    let needed = m.nrows() * m.ncols();
    if len < needed {
        return Err(Failure(
            LtiStatus::BufferTooSmall,
            format!("buffer holds {len} values, need {needed}"),
        ));
    }
    if needed == 0 {
        return Ok(());
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    let dst = std::slice::from_raw_parts_mut(out, needed);
    for (i, row) in m.row_iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            dst[i * m.ncols() + j] = *x;
        }
    }
    Ok(())
}

fn boxed<T>(slot: &mut *mut T, value: T) {
    *slot = Box::into_raw(Box::new(value));
}

fn noise_config(n: &LtiNoise) -> Result<NoiseConfig, Failure> {
    Ok(NoiseConfig::new(n.sigma_u, n.sigma_w, n.sigma_v, n.sigma_0)?)
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lti_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a system from row-major matrices: `a` is n×n, `b` n×m, `c` p×n,
/// `d` p×m, `bw` n×q and `dv` p×l.
///
/// # Safety
/// Each non-empty matrix pointer must reference enough values for its shape.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn lti_system_new(
    n: usize,
    m: usize,
    p: usize,
    q: usize,
    l: usize,
    a: *const f64,
    b: *const f64,
    c: *const f64,
    d: *const f64,
    bw: *const f64,
    dv: *const f64,
    out: *mut *mut LtiSystem,
) -> LtiStatus {
    guard(|| {
        let slot = out_slot(out)?;
        let sys = SystemModel::new(
            read_matrix(a, n, n, "a")?,
            read_matrix(b, n, m, "b")?,
            read_matrix(c, p, n, "c")?,
            read_matrix(d, p, m, "d")?,
            read_matrix(bw, n, q, "bw")?,
            read_matrix(dv, p, l, "dv")?,
        )?;
        boxed(slot, LtiSystem(sys));
        Ok(())
    })
}

/// Looks up a builtin system such as `newton`, `newton_delta(0.5)` or
/// `unstable_3x3`.
///
/// # Safety
/// `name` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn lti_system_builtin(name: *const c_char, out: *mut *mut LtiSystem) -> LtiStatus {
    guard(|| {
        let slot = out_slot(out)?;
        boxed(slot, LtiSystem(builtin_system(c_str(name, "name")?)?));
        Ok(())
    })
}

/// Random system with n=3, m=2, p=2 drawn from `seed`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lti_system_random(seed: u64, out: *mut *mut LtiSystem) -> LtiStatus {
    guard(|| {
        let slot = out_slot(out)?;
        boxed(slot, LtiSystem(random_system(seed, 3, 2, 2)?));
        Ok(())
    })
}

/// Writes the dimensions n, m, p, q, l. Any output pointer may be NULL.
///
/// # Safety
/// `sys` must come from this library; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lti_system_dims(
    sys: *const LtiSystem,
    n: *mut usize,
    m: *mut usize,
    p: *mut usize,
    q: *mut usize,
    l: *mut usize,
) -> LtiStatus {
    guard(|| {
        let s = &deref(sys, "system")?.0;
        for (dst, v) in [(n, s.n()), (m, s.m()), (p, s.p()), (q, s.q()), (l, s.l())] {
            if let Some(d) = dst.as_mut() {
                *d = v;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `sys` must be NULL or a pointer returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn lti_system_free(sys: *mut LtiSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Simulates `n_rollouts` rollouts of length `length`.
///
/// # Safety
/// `sys` must come from this library and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lti_simulate(
    sys: *const LtiSystem,
    noise: LtiNoise,
    n_rollouts: usize,
    length: usize,
    seed: u64,
    out: *mut *mut LtiDataset,
) -> LtiStatus {
    guard(|| {
        let slot = out_slot(out)?;
        let sys = &deref(sys, "system")?.0;
        let ds = simulate_dataset(sys, &noise_config(&noise)?, n_rollouts, length, seed, "ffi")?;
        boxed(slot, LtiDataset(ds));
        Ok(())
    })
}

/// Loads a dataset directory written by `lti_dataset_save` or the CLI.
///
/// # Safety
/// `dir` must be a NUL-terminated path and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lti_dataset_load(dir: *const c_char, out: *mut *mut LtiDataset) -> LtiStatus {
    guard(|| {
        let slot = out_slot(out)?;
        boxed(slot, LtiDataset(load_dataset(Path::new(c_str(dir, "dir")?))?));
        Ok(())
    })
}

/// # Safety
/// `ds` must come from this library and `dir` must be a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn lti_dataset_save(ds: *const LtiDataset, dir: *const c_char) -> LtiStatus {
    guard(|| {
        save_dataset(&deref(ds, "dataset")?.0, Path::new(c_str(dir, "dir")?))?;
        Ok(())
    })
}

/// # Safety
/// `ds` must come from this library; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lti_dataset_shape(
    ds: *const LtiDataset,
    n_rollouts: *mut usize,
    length: *mut usize,
) -> LtiStatus {
    guard(|| {
        let ds = &deref(ds, "dataset")?.0;
        if let Some(n) = n_rollouts.as_mut() {
            *n = ds.n_rollouts();
        }
        if let Some(t) = length.as_mut() {
            *t = ds.rollout_length();
        }
        Ok(())
    })
}

/// # Safety
/// `ds` must be NULL or a pointer returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn lti_dataset_free(ds: *mut LtiDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Estimates `t1` Markov blocks. `t1 = 0` means the rollout length; the
/// final-sample method only accepts that.
///
/// # Safety
/// `ds` must come from this library and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lti_estimate(
    ds: *const LtiDataset,
    method: LtiMethod,
    t1: usize,
    out: *mut *mut LtiMarkov,
) -> LtiStatus {
    guard(|| {
        let slot = out_slot(out)?;
        let ds = &deref(ds, "dataset")?.0;
        let t2 = ds.rollout_length();
        let t1 = if t1 == 0 { t2 } else { t1 };
        let est = match method {
            LtiMethod::Full => ols_full(&assemble_data_matrices(ds, t1)?)?,
            LtiMethod::UnequalLength => ols_unequal_length(&assemble_data_matrices(ds, t1)?)?,
            LtiMethod::FinalSample if t1 == t2 => ols_final_sample(ds)?,
            LtiMethod::FinalSample => {
                return Err(Failure(
                    LtiStatus::InvalidInput,
                    "the final-sample method estimates all rollout-length blocks".into(),
                ))
            }
        };
        boxed(slot, LtiMarkov(est.g_hat));
        Ok(())
    })
}

/// Exact Markov parameters `[D, CB, CAB, …]` with `horizon` blocks.
///
/// # Safety
/// `sys` must come from this library and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lti_true_markov(sys: *const LtiSystem, horizon: usize, out: *mut *mut LtiMarkov) -> LtiStatus {
    guard(|| {
        let slot = out_slot(out)?;
        boxed(slot, LtiMarkov(true_markov(&deref(sys, "system")?.0, horizon)?));
        Ok(())
    })
}

/// Rows (p), block width (m) and number of blocks.
///
/// # Safety
/// `g` must come from this library; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lti_markov_shape(
    g: *const LtiMarkov,
    rows: *mut usize,
    block_width: *mut usize,
    horizon: *mut usize,
) -> LtiStatus {
    guard(|| {
        let g = &deref(g, "markov")?.0;
        for (dst, v) in [(rows, g.rows()), (block_width, g.block_width()), (horizon, g.horizon())] {
            if let Some(d) = dst.as_mut() {
                *d = v;
            }
        }
        Ok(())
    })
}

/// Copies the p × (m·horizon) block row into `out` in row-major order.
///
/// # Safety
/// `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lti_markov_copy(g: *const LtiMarkov, out: *mut f64, len: usize) -> LtiStatus {
    guard(|| write_matrix(deref(g, "markov")?.0.block_row(), out, len))
}

/// Spectral norm of the difference of two equally shaped block rows.
///
/// # Safety
/// Both handles must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lti_markov_distance(a: *const LtiMarkov, b: *const LtiMarkov, out: *mut f64) -> LtiStatus {
    guard(|| {
        let d = deref(a, "a")?.0.distance(&deref(b, "b")?.0)?;
        *out.as_mut().ok_or_else(|| null("out"))? = d;
        Ok(())
    })
}

/// # Safety
/// `g` must be NULL or a pointer returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn lti_markov_free(g: *mut LtiMarkov) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Ho-Kalman realization of order `order` from a `t1` × `t2h` Hankel layout.
///
/// # Safety
/// `g` must come from this library and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lti_ho_kalman(
    g: *const LtiMarkov,
    order: usize,
    t1: usize,
    t2h: usize,
    out: *mut *mut LtiRealization,
) -> LtiStatus {
    guard(|| {
        let slot = out_slot(out)?;
        let r = lti_sysid::ho_kalman(&deref(g, "markov")?.0, order, t1, t2h)?;
        boxed(slot, LtiRealization(r));
        Ok(())
    })
}

/// # Safety
/// `r` must come from this library; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn lti_realization_shape(
    r: *const LtiRealization,
    part: LtiRealizationPart,
    rows: *mut usize,
    cols: *mut usize,
) -> LtiStatus {
    guard(|| {
        let (nr, nc) = part_of(&deref(r, "realization")?.0, part).shape();
        if let Some(x) = rows.as_mut() {
            *x = nr;
        }
        if let Some(x) = cols.as_mut() {
            *x = nc;
        }
        Ok(())
    })
}

fn part_of(r: &Realization, part: LtiRealizationPart) -> &Matrix {
    match part {
        LtiRealizationPart::A => &r.a,
        LtiRealizationPart::B => &r.b,
        LtiRealizationPart::C => &r.c,
        LtiRealizationPart::D => &r.d,
    }
}

/// Copies one of Â, B̂, Ĉ, D̂ in row-major order.
///
/// # Safety
/// `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn lti_realization_copy(
    r: *const LtiRealization,
    part: LtiRealizationPart,
    out: *mut f64,
    len: usize,
) -> LtiStatus {
    guard(|| write_matrix(part_of(&deref(r, "realization")?.0, part), out, len))
}

/// True when the order gap warning fired; the text is then available
/// through `lti_last_error_message` until the next call.
///
/// # Safety
/// `r` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn lti_realization_has_warning(r: *const LtiRealization) -> bool {
    match r.as_ref().and_then(|r| r.0.warning.clone()) {
        Some(w) => {
            set_error(w);
            true
        }
        None => false,
    }
}

/// Markov parameters of the realization with `horizon` blocks.
///
/// # Safety
/// `r` must come from this library and `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lti_realization_markov(
    r: *const LtiRealization,
    horizon: usize,
    out: *mut *mut LtiMarkov,
) -> LtiStatus {
    guard(|| {
        let slot = out_slot(out)?;
        boxed(slot, LtiMarkov(deref(r, "realization")?.0.markov(horizon)?));
        Ok(())
    })
}

/// # Safety
/// `r` must be NULL or a pointer returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn lti_realization_free(r: *mut LtiRealization) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

fn bound_out(rep: BoundReport) -> LtiBound {
    LtiBound {
        n_threshold: rep.n_threshold,
        valid: rep.valid,
        c0: rep.c0,
        c1: rep.c1,
        c2: rep.c2,
        bound_value: rep.bound_value,
        f_norm: rep.f_norm,
        dv_norm: rep.dv_norm,
        h_norm: rep.h_norm,
    }
}

/// High-probability error bound for zero initial states.
///
/// # Safety
/// `sys` must come from this library and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lti_theorem1_bound(
    sys: *const LtiSystem,
    noise: LtiNoise,
    horizon: usize,
    n_rollouts: usize,
    delta: f64,
    out: *mut LtiBound,
) -> LtiStatus {
    guard(|| {
        let dst = out.as_mut().ok_or_else(|| null("out"))?;
        let rep = theorem1_bound(&deref(sys, "system")?.0, &noise_config(&noise)?, horizon, n_rollouts, delta)?;
        *dst = bound_out(rep);
        Ok(())
    })
}

/// Error bound including random initial states.
///
/// # Safety
/// `sys` must come from this library and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lti_corollary2_bound(
    sys: *const LtiSystem,
    noise: LtiNoise,
    horizon: usize,
    n_rollouts: usize,
    delta: f64,
    out: *mut LtiBound,
) -> LtiStatus {
    guard(|| {
        let dst = out.as_mut().ok_or_else(|| null("out"))?;
        let rep = corollary2_bound(&deref(sys, "system")?.0, &noise_config(&noise)?, horizon, n_rollouts, delta)?;
        *dst = bound_out(rep);
        Ok(())
    })
}
