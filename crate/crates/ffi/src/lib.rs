//! C ABI over `qheat`.
//!
//! Every function returns a [`QhStatus`]. On failure the message is kept per
//! thread and can be read with [`qh_last_error_message`]. Matrices are dense
//! row-major `double` arrays; a joint distribution is laid out as
//! `p[m * dim + n]`, with `n` the first and `m` the final energy outcome.
//! Objects behind a `QhSystem*` are owned by the library and released with
//! [`qh_system_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use qheat::analysis::{
    beta_eff_closed_form, beta_eff_from_joint, char_from_joint, BetaEffResult, DEFAULT_SEARCH_RANGE,
};
use qheat::linalg::{eig_hermitian, CMatrix, EigenSystem, HermitianMatrix, RealMatrix, C64};
use qheat::model::{
    alphabeta_to_populations, populations_to_alphabeta, spin1_operators, AlphaBeta, EnergySpectrum,
    InitialState, Observable,
};
use qheat::protocol::{
    build_chain, exact_joint, run_monte_carlo, JointOutcomeDistribution, MonteCarloConfig,
    WaitingTimeSpec,
};
use qheat::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QhStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotHermitian = 3,
    NotUnitary = 4,
    DimensionMismatch = 5,
    NoConvergence = 6,
    DegenerateSpectrum = 7,
    RequiresThreeLevels = 8,
    ZeroPopulation = 9,
    NotNormalized = 10,
    BracketNotFound = 11,
    ResidualTooLarge = 12,
    NonFinite = 13,
    Panic = 99,
}

impl From<&Error> for QhStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NonHermitianInput { .. } => QhStatus::NotHermitian,
            Error::NonUnitaryBasis { .. } => QhStatus::NotUnitary,
            Error::DimensionMismatch { .. } => QhStatus::DimensionMismatch,
            Error::InvalidDimension(_)
            | Error::InvalidPopulations(_)
            | Error::InvalidSpec(_)
            | Error::DegenerateDirection => QhStatus::InvalidArgument,
            Error::NoConvergence { .. } => QhStatus::NoConvergence,
            Error::DegenerateSpectrum { .. } => QhStatus::DegenerateSpectrum,
            Error::RequiresThreeLevels(_) => QhStatus::RequiresThreeLevels,
            Error::ZeroPopulation { .. } => QhStatus::ZeroPopulation,
            Error::NotNormalized { .. } => QhStatus::NotNormalized,
            Error::BracketNotFound { .. } => QhStatus::BracketNotFound,
            Error::ResidualTooLarge { .. } => QhStatus::ResidualTooLarge,
            Error::NonFinite(_) => QhStatus::NonFinite,
        }
    }
}

/// Hamiltonian eigensystem together with the measured observable.
pub struct QhSystem {
    eigen: EigenSystem,
    spectrum: EnergySpectrum,
    observable: Observable,
}

/// Outcome of a `β_eff` search.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QhBetaEff {
    pub value: f64,
    pub residual: f64,
    /// `G'(0)` vanished; `value` is 0.
    pub degenerate: bool,
}

impl From<&BetaEffResult> for QhBetaEff {
    fn from(r: &BetaEffResult) -> Self {
        QhBetaEff {
            value: r.value,
            residual: r.residual,
            degenerate: r.degenerate,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(QhStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail((&e).into(), e.to_string())
    }
}

type FfiResult<T> = Result<T, Fail>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> QhStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            QhStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            QhStatus::Panic
        }
    }
}

fn null(name: &str) -> Fail {
    Fail(QhStatus::NullPointer, format!("{name} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(QhStatus::InvalidArgument, msg.into())
}

unsafe fn input<'a, T>(p: *const T, len: usize, name: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, name: &str) -> FfiResult<&'a mut [T]> {
    if p.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn system<'a>(sys: *const QhSystem) -> FfiResult<&'a QhSystem> {
    sys.as_ref().ok_or_else(|| null("system"))
}

unsafe fn complex_matrix(
    dim: usize,
    re: *const f64,
    im: *const f64,
    name: &str,
) -> FfiResult<HermitianMatrix> {
    let re = input(re, dim * dim, name)?;
    let im = if im.is_null() {
        None
    } else {
        Some(slice::from_raw_parts(im, dim * dim))
    };
    let m = CMatrix::from_fn(dim, |i, j| {
        let k = i * dim + j;
        C64::new(re[k], im.map_or(0.0, |v| v[k]))
    });
    Ok(HermitianMatrix::new(m)?)
}

fn build_system(h: &HermitianMatrix, o: &HermitianMatrix) -> FfiResult<QhSystem> {
    let eigen = eig_hermitian(h)?;
    let spectrum = EnergySpectrum::from_eigensystem(&eigen)?;
    let observable = Observable::from_operator(o, &eigen)?;
    Ok(QhSystem {
        eigen,
        spectrum,
        observable,
    })
}

unsafe fn store(out: *mut *mut QhSystem, sys: QhSystem) {
    *out = Box::into_raw(Box::new(sys));
}

/// Builds a system from a Hamiltonian and an observable, each given as
/// `dim * dim` real and imaginary parts. Imaginary parts may be null.
///
/// # Safety
/// Non-null arrays must hold `dim * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qh_system_new(
    dim: usize,
    h_re: *const f64,
    h_im: *const f64,
    obs_re: *const f64,
    obs_im: *const f64,
    out: *mut *mut QhSystem,
) -> QhStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if dim < 2 {
            return Err(invalid(format!("dim = {dim}; need at least 2")));
        }
        let h = complex_matrix(dim, h_re, h_im, "h_re")?;
        let o = complex_matrix(dim, obs_re, obs_im, "obs_re")?;
        store(out, build_system(&h, &o)?);
        Ok(())
    })
}

/// Spin-1 system `H = w1·Sz + w2·Sx` (or `w1·Sz² + w2·Sx` when `squared`),
/// measuring `Sz`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qh_system_spin1(
    w1: f64,
    w2: f64,
    squared: bool,
    out: *mut *mut QhSystem,
) -> QhStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (sz, sx) = spin1_operators();
        let base = if squared { sz.square() } else { sz.clone() };
        let h = base.combine(w1, &sx, w2)?;
        store(out, build_system(&h, &sz)?);
        Ok(())
    })
}

/// Releases a system. Null is ignored.
///
/// # Safety
/// `sys` must come from a constructor of this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn qh_system_free(sys: *mut QhSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Hilbert-space dimension, or 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qh_system_dim(sys: *const QhSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.eigen.dim())
}

/// Energy levels in ascending order.
///
/// # Safety
/// `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qh_system_levels(
    sys: *const QhSystem,
    out: *mut f64,
    len: usize,
) -> QhStatus {
    guard(|| {
        let s = system(sys)?;
        let levels = s.spectrum.levels();
        if len != levels.len() {
            return Err(Error::DimensionMismatch {
                expected: levels.len(),
                actual: len,
            }
            .into());
        }
        output(out, len, "out")?.copy_from_slice(levels);
        Ok(())
    })
}

unsafe fn populations(s: &QhSystem, c: *const f64, len: usize) -> FfiResult<InitialState> {
    let dim = s.eigen.dim();
    if len != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: len,
        }
        .into());
    }
    Ok(InitialState::new(input(c, len, "populations")?.to_vec())?)
}

fn write_joint(p: &JointOutcomeDistribution, out: &mut [f64]) {
    let dim = p.dim();
    for m in 0..dim {
        for n in 0..dim {
            out[m * dim + n] = p.get(m, n);
        }
    }
}

/// Exact joint distribution of first and final energy outcomes for
/// waiting times `taus[0..m]`. `out` receives `dim * dim` entries.
///
/// # Safety
/// `c` holds `c_len` doubles, `taus` holds `m` doubles, `out` holds `dim * dim`.
#[no_mangle]
pub unsafe extern "C" fn qh_exact_joint(
    sys: *const QhSystem,
    c: *const f64,
    c_len: usize,
    taus: *const f64,
    m: usize,
    out: *mut f64,
) -> QhStatus {
    guard(|| {
        let s = system(sys)?;
        let state = populations(s, c, c_len)?;
        let chain = build_chain(&s.eigen, &s.observable, input(taus, m, "taus")?)?;
        let p = exact_joint(&state, &chain)?;
        write_joint(&p, output(out, c_len * c_len, "out")?);
        Ok(())
    })
}

/// Monte Carlo outcome counts with fixed waiting time `tau`. Results are
/// identical for any `workers`. `counts` receives `dim * dim` entries.
///
/// # Safety
/// `c` holds `c_len` doubles and `counts` holds `dim * dim` integers.
#[no_mangle]
pub unsafe extern "C" fn qh_monte_carlo(
    sys: *const QhSystem,
    c: *const f64,
    c_len: usize,
    tau: f64,
    m: usize,
    realizations: u64,
    seed: u64,
    workers: usize,
    counts: *mut u64,
) -> QhStatus {
    guard(|| {
        let s = system(sys)?;
        let state = populations(s, c, c_len)?;
        if workers == 0 {
            return Err(invalid("workers must be at least 1"));
        }
        let cfg = MonteCarloConfig {
            realizations,
            master_seed: seed,
            workers,
            ..Default::default()
        };
        let run = run_monte_carlo(
            &state,
            &s.eigen,
            &s.observable,
            WaitingTimeSpec::Fixed(tau),
            m,
            &cfg,
        )?;
        let raw = run
            .joint
            .counts()
            .ok_or_else(|| invalid("sampler returned no counts"))?;
        output(counts, c_len * c_len, "counts")?.copy_from_slice(raw);
        Ok(())
    })
}

unsafe fn joint(s: &QhSystem, p: *const f64, len: usize) -> FfiResult<JointOutcomeDistribution> {
    let dim = s.eigen.dim();
    if len != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            actual: len,
        }
        .into());
    }
    let p = input(p, len, "p")?;
    if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(invalid("joint entries must be finite and non-negative"));
    }
    Ok(JointOutcomeDistribution::from_matrix(RealMatrix::from_fn(
        dim,
        |m, n| p[m * dim + n],
    )))
}

/// `G(ε) = Σ p[m][n] e^{-ε(E_m - E_n)}` for a joint distribution of
/// `p_len = dim * dim` entries.
///
/// # Safety
/// `p` holds `p_len` doubles and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qh_characteristic(
    sys: *const QhSystem,
    p: *const f64,
    p_len: usize,
    eps: f64,
    out: *mut f64,
) -> QhStatus {
    guard(|| {
        let s = system(sys)?;
        let j = joint(s, p, p_len)?;
        *output(out, 1, "out")?.first_mut().unwrap() = char_from_joint(&j, &s.spectrum, eps);
        Ok(())
    })
}

/// Nonzero root of `G(β) = 1` for a joint distribution, searched in the
/// default range.
///
/// # Safety
/// `p` holds `p_len` doubles and `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qh_beta_eff_joint(
    sys: *const QhSystem,
    p: *const f64,
    p_len: usize,
    out: *mut QhBetaEff,
) -> QhStatus {
    guard(|| {
        let s = system(sys)?;
        let j = joint(s, p, p_len)?;
        let r = beta_eff_from_joint(&j, &s.spectrum, DEFAULT_SEARCH_RANGE)?;
        *out.as_mut().ok_or_else(|| null("out"))? = (&r).into();
        Ok(())
    })
}

unsafe fn spectrum3(levels: *const f64) -> FfiResult<EnergySpectrum> {
    Ok(EnergySpectrum::new(input(levels, 3, "levels")?.to_vec())?)
}

/// `β_eff` of the large-`M` limit, where the final state is uniform, for a
/// three-level spectrum and initial populations.
///
/// # Safety
/// `levels` and `c` hold 3 doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn qh_beta_eff_closed_form(
    levels: *const f64,
    c: *const f64,
    out: *mut QhBetaEff,
) -> QhStatus {
    guard(|| {
        let e = spectrum3(levels)?;
        let s = InitialState::new(input(c, 3, "c")?.to_vec())?;
        let r = beta_eff_closed_form(&s, &e, DEFAULT_SEARCH_RANGE)?;
        *out.as_mut().ok_or_else(|| null("out"))? = (&r).into();
        Ok(())
    })
}

/// Populations `c_k ∝ exp(-βE_k + (α/v)g_k)` of a three-level spectrum.
///
/// # Safety
/// `levels` holds 3 doubles and `out` receives 3.
#[no_mangle]
pub unsafe extern "C" fn qh_alphabeta_to_populations(
    levels: *const f64,
    alpha: f64,
    beta: f64,
    out: *mut f64,
) -> QhStatus {
    guard(|| {
        let e = spectrum3(levels)?;
        let s = alphabeta_to_populations(AlphaBeta::new(alpha, beta)?, &e)?;
        output(out, 3, "out")?.copy_from_slice(s.populations());
        Ok(())
    })
}

/// Inverse of [`qh_alphabeta_to_populations`]. All populations must be
/// positive.
///
/// # Safety
/// `levels` and `c` hold 3 doubles; `alpha` and `beta` are writable.
#[no_mangle]
pub unsafe extern "C" fn qh_populations_to_alphabeta(
    levels: *const f64,
    c: *const f64,
    alpha: *mut f64,
    beta: *mut f64,
) -> QhStatus {
    guard(|| {
        let e = spectrum3(levels)?;
        let s = InitialState::new(input(c, 3, "c")?.to_vec())?;
        let ab = populations_to_alphabeta(&s, &e)?;
        *alpha.as_mut().ok_or_else(|| null("alpha"))? = ab.alpha;
        *beta.as_mut().ok_or_else(|| null("beta"))? = ab.beta;
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn qh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
