//! C ABI over `ncmart-core`.
//!
//! Every fallible function returns an [`NcmStatus`]; on failure the message
//! is kept per thread and read back with [`ncm_last_error_message`]. Objects
//! live behind opaque handles released by their `_free` function. Matrices
//! cross the boundary as two row-major `N×N` arrays of `double`, real and
//! imaginary parts; a NULL imaginary pointer reads as zero on input and is
//! skipped on output.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use ncmart_core::cuculescu::{cuculescu_projections, theoretical_constant_c0};
use ncmart_core::decomposition::{decompose, Decomposition};
use ncmart_core::harness::{self, ExperimentConfig};
use ncmart_core::martingale::{random_positive_martingale, MartingaleSequence};
use ncmart_core::{CMatrix, Complex64, Error, Filtration, Operator, TracialContext};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDimensions = 3,
    ContextMismatch = 4,
    NotHermitian = 5,
    NotPositive = 6,
    NotProjection = 7,
    NotMartingale = 8,
    NumericalBreakdown = 9,
    Config = 10,
    Io = 11,
    /// A Rust panic was caught at the boundary.
    Panic = 12,
}

impl From<&Error> for NcmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::ContextMismatch { .. } => NcmStatus::ContextMismatch,
            Error::NotHermitian { .. } => NcmStatus::NotHermitian,
            Error::NotPositive { .. } => NcmStatus::NotPositive,
            Error::NotProjection { .. } => NcmStatus::NotProjection,
            Error::InvalidDimensions(_) => NcmStatus::InvalidDimensions,
            Error::InvalidArgument(_) => NcmStatus::InvalidArgument,
            Error::NotMartingale(_) => NcmStatus::NotMartingale,
            Error::NumericalBreakdown(_) => NcmStatus::NumericalBreakdown,
            Error::Config(_) => NcmStatus::Config,
            Error::Io(_) => NcmStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcmFiltrationKind {
    /// `M_{2^k} ⊗ 1` for `k = 1..=depth`; `2^depth` must divide `dim`.
    Tensor = 0,
    /// Diagonal matrices constant on dyadic blocks.
    DyadicDiagonal = 1,
    /// The tensor filtration conjugated by a seeded Haar unitary.
    Conjugated = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcmPart {
    /// Column part `dy`.
    Column = 0,
    /// Row part `dz`.
    Row = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcmCommand {
    Verify = 0,
    BgSweep = 1,
    Llogl = 2,
    C0 = 3,
}

pub struct NcmFiltration {
    inner: Arc<Filtration>,
}

pub struct NcmMartingale {
    inner: MartingaleSequence,
}

pub struct NcmDecomposition {
    inner: Decomposition,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NcmDecompositionReport {
    pub martingale_difference: f64,
    pub reconstruction: f64,
    /// `‖dy‖_{L²(l²_C)} + ‖dz‖_{L²(l²_R)}`.
    pub l2_value: f64,
    pub l2_norm: f64,
    pub weak_value: f64,
    pub l1_norm: f64,
    pub weak_ratio: f64,
    pub square_expansion: f64,
    pub row_square_expansion: f64,
    pub components: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NcmCuculescuSummary {
    /// `τ(1 − q)`.
    pub trace_complement: f64,
    /// `‖x‖_1 / λ`.
    pub trace_bound: f64,
    pub all_pass: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NcmC0 {
    pub c0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub k_theory: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NcmRunSummary {
    pub rows: usize,
    pub failed: usize,
    pub all_pass: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> Result<(), (NcmStatus, String)>) -> NcmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            NcmStatus::Ok
        }
        Ok(Err((s, m))) => {
            set_error(m);
            s
        }
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {m}"));
            NcmStatus::Panic
        }
    }
}

fn fail(e: Error) -> (NcmStatus, String) {
    (NcmStatus::from(&e), e.to_string())
}

fn null(what: &str) -> (NcmStatus, String) {
    (NcmStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (NcmStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (NcmStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn read_matrix(
    ctx: TracialContext,
    re: *const f64,
    im: *const f64,
    len: usize,
) -> Result<Operator, (NcmStatus, String)> {
    let n = ctx.dim();
    if re.is_null() {
        return Err(null("re"));
    }
    if len != n * n {
        return Err(fail(Error::InvalidDimensions(format!("expected {} entries, got {len}", n * n))));
    }
    let re = std::slice::from_raw_parts(re, len);
    let im = (!im.is_null()).then(|| std::slice::from_raw_parts(im, len));
    let m = CMatrix::from_fn(n, n, |i, j| Complex64::new(re[i * n + j], im.map_or(0.0, |v| v[i * n + j])));
    Operator::new(ctx, m).map_err(fail)
}

unsafe fn write_matrix(x: &Operator, re: *mut f64, im: *mut f64, len: usize) -> Result<(), (NcmStatus, String)> {
    let n = x.dim();
    if re.is_null() {
        return Err(null("re"));
    }
    if len != n * n {
        return Err(fail(Error::InvalidDimensions(format!("expected {} entries, got {len}", n * n))));
    }
    let re = std::slice::from_raw_parts_mut(re, len);
    let mut im = (!im.is_null()).then(|| std::slice::from_raw_parts_mut(im, len));
    let m = x.matrix();
    for i in 0..n {
        for j in 0..n {
            re[i * n + j] = m[(i, j)].re;
            if let Some(v) = im.as_deref_mut() {
                v[i * n + j] = m[(i, j)].im;
            }
        }
    }
    Ok(())
}

unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, (NcmStatus, String)> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p).to_str().map(Some).map_err(|_| (NcmStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ncm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `cap > 0`) and returns its full length in
/// bytes, excluding the terminator. The message is empty after a success.
///
/// # Safety
/// `buf` must be NULL or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn ncm_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && cap > 0 {
            let k = e.len().min(cap - 1);
            ptr::copy_nonoverlapping(e.as_ptr().cast(), buf, k);
            *buf.add(k) = 0;
        }
        e.len()
    })
}

/// Builds a filtration of `depth` levels on `M_dim`. `seed` is used by
/// `Conjugated` only.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ncm_filtration_new(
    kind: NcmFiltrationKind,
    dim: usize,
    depth: usize,
    seed: u64,
    out: *mut *mut NcmFiltration,
) -> NcmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let ctx = TracialContext::new(dim).map_err(fail)?;
        let f = match kind {
            NcmFiltrationKind::Tensor => Filtration::tensor(ctx, depth),
            NcmFiltrationKind::DyadicDiagonal => Filtration::dyadic_diagonal(ctx, depth),
            NcmFiltrationKind::Conjugated => {
                Filtration::tensor(ctx, depth).and_then(|b| Filtration::conjugated_seeded(&b, seed))
            }
        }
        .map_err(fail)?;
        *out = Box::into_raw(Box::new(NcmFiltration { inner: Arc::new(f) }));
        Ok(())
    })
}

/// # Safety
/// `f` must be NULL or a handle from [`ncm_filtration_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ncm_filtration_free(f: *mut NcmFiltration) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Matrix dimension `N`, or 0 for NULL.
///
/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncm_filtration_dim(f: *const NcmFiltration) -> usize {
    f.as_ref().map_or(0, |f| f.inner.context().dim())
}

/// Number of levels, or 0 for NULL.
///
/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncm_filtration_depth(f: *const NcmFiltration) -> usize {
    f.as_ref().map_or(0, |f| f.inner.depth())
}

/// Writes `E_level(x)`; levels are numbered from 1.
///
/// # Safety
/// `f` must be a live handle; the arrays must hold `len = N*N` doubles.
#[no_mangle]
pub unsafe extern "C" fn ncm_filtration_expectation(
    f: *const NcmFiltration,
    level: usize,
    re: *const f64,
    im: *const f64,
    len: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> NcmStatus {
    guard(|| {
        let f = handle(f, "filtration")?;
        let x = read_matrix(*f.inner.context(), re, im, len)?;
        let e = f.inner.expectation(level, &x).map_err(fail)?;
        write_matrix(&e, out_re, out_im, len)
    })
}

/// The martingale `x_n = E_n(x_∞)`. The filtration handle may be freed
/// afterwards.
///
/// # Safety
/// `f` must be a live handle; the arrays must hold `len = N*N` doubles.
#[no_mangle]
pub unsafe extern "C" fn ncm_martingale_from_final(
    f: *const NcmFiltration,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut NcmMartingale,
) -> NcmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let f = handle(f, "filtration")?;
        let x = read_matrix(*f.inner.context(), re, im, len)?;
        let m = MartingaleSequence::from_final(f.inner.clone(), &x).map_err(fail)?;
        *out = Box::into_raw(Box::new(NcmMartingale { inner: m }));
        Ok(())
    })
}

/// A seeded positive martingale with `‖x_∞‖_1 = norm1`.
///
/// # Safety
/// `f` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ncm_martingale_random_positive(
    f: *const NcmFiltration,
    seed: u64,
    norm1: f64,
    out: *mut *mut NcmMartingale,
) -> NcmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let f = handle(f, "filtration")?;
        let m = random_positive_martingale(f.inner.clone(), seed, norm1).map_err(fail)?;
        *out = Box::into_raw(Box::new(NcmMartingale { inner: m }));
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncm_martingale_free(m: *mut NcmMartingale) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of terms, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncm_martingale_len(m: *const NcmMartingale) -> usize {
    m.as_ref().map_or(0, |m| m.inner.len())
}

/// Writes the term `x_n`, `n` counted from 1.
///
/// # Safety
/// `m` must be a live handle; the arrays must hold `len = N*N` doubles.
#[no_mangle]
pub unsafe extern "C" fn ncm_martingale_term(
    m: *const NcmMartingale,
    n: usize,
    out_re: *mut f64,
    out_im: *mut f64,
    len: usize,
) -> NcmStatus {
    guard(|| {
        let m = handle(m, "martingale")?;
        let x = n
            .checked_sub(1)
            .and_then(|k| m.inner.terms().get(k))
            .ok_or_else(|| fail(Error::InvalidArgument(format!("term {n} out of 1..={}", m.inner.len()))))?;
        write_matrix(x, out_re, out_im, len)
    })
}

/// Cuculescu projections of a positive martingale at level `lambda`.
///
/// # Safety
/// `m` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ncm_cuculescu(
    m: *const NcmMartingale,
    lambda: f64,
    out: *mut NcmCuculescuSummary,
) -> NcmStatus {
    guard(|| {
        let m = handle(m, "martingale")?;
        let out = out_ptr(out, "out")?;
        let r = cuculescu_projections(&m.inner, lambda).map_err(fail)?;
        let rep = r.check_invariants(&m.inner).map_err(fail)?;
        *out = NcmCuculescuSummary {
            trace_complement: rep.trace.lhs,
            trace_bound: rep.trace.rhs,
            all_pass: rep.all_pass(),
        };
        Ok(())
    })
}

/// Splits `dx = dy + dz` into column and row parts.
///
/// # Safety
/// `m` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ncm_decompose(m: *const NcmMartingale, out: *mut *mut NcmDecomposition) -> NcmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let m = handle(m, "martingale")?;
        let d = decompose(&m.inner).map_err(fail)?;
        *out = Box::into_raw(Box::new(NcmDecomposition { inner: d }));
        Ok(())
    })
}

/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ncm_decomposition_free(d: *mut NcmDecomposition) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ncm_decomposition_report(
    d: *const NcmDecomposition,
    out: *mut NcmDecompositionReport,
) -> NcmStatus {
    guard(|| {
        let d = handle(d, "decomposition")?;
        let out = out_ptr(out, "out")?;
        let r = d.inner.verify().map_err(fail)?;
        *out = NcmDecompositionReport {
            martingale_difference: r.martingale_difference,
            reconstruction: r.reconstruction,
            l2_value: r.l2_value,
            l2_norm: r.l2_norm,
            weak_value: r.weak_value,
            l1_norm: r.l1_norm,
            weak_ratio: r.weak_ratio,
            square_expansion: r.square_expansion,
            row_square_expansion: r.row_square_expansion,
            components: r.components,
        };
        Ok(())
    })
}

/// Writes the `n`-th difference (from 1) of the column or row part.
///
/// # Safety
/// `d` must be a live handle; the arrays must hold `len = N*N` doubles.
#[no_mangle]
pub unsafe extern "C" fn ncm_decomposition_difference(
    d: *const NcmDecomposition,
    part: NcmPart,
    n: usize,
    out_re: *mut f64,
    out_im: *mut f64,
    len: usize,
) -> NcmStatus {
    guard(|| {
        let d = handle(d, "decomposition")?;
        let seq = match part {
            NcmPart::Column => d.inner.dy(),
            NcmPart::Row => d.inner.dz(),
        };
        let x = n
            .checked_sub(1)
            .and_then(|k| seq.diffs().get(k))
            .ok_or_else(|| fail(Error::InvalidArgument(format!("difference {n} out of 1..={}", seq.len()))))?;
        write_matrix(x, out_re, out_im, len)
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ncm_theoretical_constant_c0(out: *mut NcmC0) -> NcmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let r = theoretical_constant_c0();
        *out = NcmC0 { c0: r.c0, alpha: r.alpha, beta: r.beta, k_theory: r.k_theory };
        Ok(())
    })
}

/// Runs a harness experiment. `config_json` (NULL for defaults) is an
/// experiment configuration; when `out_dir` is non-NULL, `report.csv` and
/// `summary.json` are written there.
///
/// # Safety
/// The strings must be NULL or NUL-terminated; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ncm_run_experiment(
    command: NcmCommand,
    config_json: *const c_char,
    out_dir: *const c_char,
    out: *mut NcmRunSummary,
) -> NcmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let cfg = match opt_str(config_json, "config_json")? {
            Some(t) => ExperimentConfig::from_json(t).map_err(fail)?,
            None => ExperimentConfig::default(),
        };
        let r = match command {
            NcmCommand::Verify => harness::run_verification_suite(&cfg),
            NcmCommand::BgSweep => harness::bg_constant_sweep(&cfg),
            NcmCommand::Llogl => harness::llogl_check(&cfg),
            NcmCommand::C0 => harness::c0_report(&cfg),
        }
        .map_err(fail)?;
        if let Some(dir) = opt_str(out_dir, "out_dir")? {
            r.write(Path::new(dir)).map_err(fail)?;
        }
        *out = NcmRunSummary { rows: r.rows.len(), failed: r.failures().count(), all_pass: r.all_pass() };
        Ok(())
    })
}
