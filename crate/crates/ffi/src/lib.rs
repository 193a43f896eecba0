//! C ABI over the core library: an opaque handle for reduced single-mode
//! states plus scalar evaluators for the closed-form laws. Every fallible
//! call returns a [`TmssStatus`]; results travel through out-pointers so the
//! return channel stays free for the status code. The C header in
//! `include/tmss.h` is regenerated from this file on every build.
//!
//! Thread safety: handles are not synchronized; share one handle across
//! threads only behind the caller's own lock. The error message buffer is
//! thread local.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_complex::Complex64;
use tmss_core::fock::FockSpace;
use tmss_core::metrology::{qfi_mixed, Generator};
use tmss_core::probe::{probe, ProbeParams};
use tmss_core::states::{smss_space, StateFamily};
use tmss_core::stats::{
    e_even_odd, e_phi, e_tmss, entanglement_boundary, family_state, g2_closed, g2_numeric, mean_n,
    mean_n_closed, odd_projection_stats, wigner_closed, wigner_generic, wigner_parity, PhasePoint,
};
use tmss_core::{DensityMatrix, Error};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmssStatus {
    /// The call succeeded and the out-parameters are valid.
    Ok = 0,
    /// A pointer was null or a parameter sat outside its domain.
    InvalidArgument = 1,
    /// The quantity has no value at these parameters (for example the
    /// second-order coherence of the vacuum, or the odd state at zero
    /// squeezing). Not an input error.
    Undefined = 2,
    /// A numerical guard tripped: truncation overflow, norm drift, or a
    /// degenerate normalization. The inputs were plausible; the truncated
    /// computation could not be completed faithfully.
    Numerical = 3,
    /// A panic was caught at the language boundary. No state is leaked, but
    /// treat the library instance as suspect and report the message.
    Panic = 4,
}

/// State family selector mirroring the library's reduced-state menu.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmssFamily {
    /// Thermal state; reduced state of the plain two-mode squeezed vacuum.
    Thermal = 0,
    /// Reduced state of the even two-mode superposition.
    Even = 1,
    /// Reduced state of the odd two-mode superposition.
    Odd = 2,
    /// Single-mode squeezed vacuum (pure).
    Smss = 3,
}

impl TmssFamily {
    fn core(self) -> StateFamily {
        match self {
            TmssFamily::Thermal => StateFamily::Thermal,
            TmssFamily::Even => StateFamily::Even,
            TmssFamily::Odd => StateFamily::Odd,
            TmssFamily::Smss => StateFamily::Smss,
        }
    }
}

/// Opaque reduced single-mode state in its truncated Fock space.
pub struct TmssReducedState {
    rho: DensityMatrix,
    space: FockSpace,
    family: StateFamily,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message.into());
}

fn status_of(err: &Error) -> TmssStatus {
    if err.is_numerical_guard() {
        return TmssStatus::Numerical;
    }
    match err {
        Error::OddStateAtZeroSqueezing | Error::DegenerateSuperposition { .. } => {
            TmssStatus::Undefined
        }
        _ => TmssStatus::InvalidArgument,
    }
}

fn fail(err: &Error) -> TmssStatus {
    set_error(err.to_string());
    status_of(err)
}

fn undefined(message: &str) -> TmssStatus {
    set_error(message);
    TmssStatus::Undefined
}

fn invalid(message: &str) -> TmssStatus {
    set_error(message);
    TmssStatus::InvalidArgument
}

/// Runs a body behind a panic catcher so unwinds never cross the ABI.
fn guarded(body: impl FnOnce() -> TmssStatus) -> TmssStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic crossed the ABI guard");
            TmssStatus::Panic
        }
    }
}

fn check_lambda(lambda: f64) -> Option<TmssStatus> {
    if lambda.is_finite() && (0.0..1.0).contains(&lambda) {
        None
    } else {
        Some(invalid(&format!("lambda must lie in [0, 1), got {lambda}")))
    }
}

/// Writes `value` through `out`, or reports a null pointer. The pointer must
/// be valid for a write of T whenever it is non-null; that contract sits with
/// the C caller and is restated on every exported function.
fn put<T>(out: *mut T, value: T) -> TmssStatus {
    if out.is_null() {
        return invalid("output pointer is null");
    }
    unsafe { *out = value };
    TmssStatus::Ok
}

fn state_ref<'a>(state: *const TmssReducedState) -> Result<&'a TmssReducedState, TmssStatus> {
    unsafe { state.as_ref() }.ok_or_else(|| invalid("state handle is null"))
}

/// Library version as a static NUL-terminated string; never free it.
#[no_mangle]
pub extern "C" fn tmss_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the most recent error message of this thread into `buf` (up to
/// `cap - 1` bytes plus a NUL) and returns the full message length in bytes.
/// Pass a null `buf` or zero `cap` to query the length alone. The message is
/// only meaningful directly after a non-Ok status.
#[no_mangle]
pub unsafe extern "C" fn tmss_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Builds the reduced state of `family` at squeezing parameter `lambda`
/// (lambda = tanh^2 r) on a Fock space sized so the neglected geometric tail
/// stays below `tail_tol`. On success writes a heap handle through `out`;
/// release it with `tmss_reduced_state_free`.
#[no_mangle]
pub unsafe extern "C" fn tmss_reduced_state_new(
    family: TmssFamily,
    lambda: f64,
    tail_tol: f64,
    out: *mut *mut TmssReducedState,
) -> TmssStatus {
    guarded(|| {
        let status = put(out, std::ptr::null_mut());
        if status != TmssStatus::Ok {
            return status;
        }
        let core_family = family.core();
        let space = match core_family {
            StateFamily::Smss => smss_space(lambda, tail_tol),
            _ => FockSpace::for_lambda(lambda, tail_tol),
        };
        let space = match space {
            Ok(space) => space,
            Err(err) => return fail(&err),
        };
        match family_state(core_family, lambda, &space) {
            Ok(rho) => {
                let handle = Box::new(TmssReducedState {
                    rho,
                    space,
                    family: core_family,
                });
                put(out, Box::into_raw(handle))
            }
            Err(err) => fail(&err),
        }
    })
}

/// Releases a handle from `tmss_reduced_state_new`. A null pointer is a
/// harmless no-op; anything else must come from this library exactly once.
#[no_mangle]
pub unsafe extern "C" fn tmss_reduced_state_free(state: *mut TmssReducedState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Dimension of the truncated Fock space backing the state (cutoff + 1).
#[no_mangle]
pub unsafe extern "C" fn tmss_reduced_state_dim(
    state: *const TmssReducedState,
    out: *mut usize,
) -> TmssStatus {
    guarded(|| match state_ref(state) {
        Ok(s) => put(out, s.space.dim()),
        Err(status) => status,
    })
}

/// Mean occupation number of the state.
#[no_mangle]
pub unsafe extern "C" fn tmss_reduced_state_mean_n(
    state: *const TmssReducedState,
    out: *mut f64,
) -> TmssStatus {
    guarded(|| match state_ref(state) {
        Ok(s) => put(out, mean_n(&s.rho)),
        Err(status) => status,
    })
}

/// Second-order coherence g2(0) of the state; `Undefined` when the mean
/// occupation vanishes.
#[no_mangle]
pub unsafe extern "C" fn tmss_reduced_state_g2(
    state: *const TmssReducedState,
    out: *mut f64,
) -> TmssStatus {
    guarded(|| match state_ref(state) {
        Ok(s) => match g2_numeric(&s.rho) {
            Some(value) => put(out, value),
            None => undefined("g2(0) is undefined for a state without photons"),
        },
        Err(status) => status,
    })
}

/// Purity tr(rho^2) of the state.
#[no_mangle]
pub unsafe extern "C" fn tmss_reduced_state_purity(
    state: *const TmssReducedState,
    out: *mut f64,
) -> TmssStatus {
    guarded(|| match state_ref(state) {
        Ok(s) => put(out, s.rho.purity()),
        Err(status) => status,
    })
}

/// Population of Fock level `n`; `InvalidArgument` beyond the cutoff.
#[no_mangle]
pub unsafe extern "C" fn tmss_reduced_state_population(
    state: *const TmssReducedState,
    n: usize,
    out: *mut f64,
) -> TmssStatus {
    guarded(|| match state_ref(state) {
        Ok(s) => {
            if n >= s.space.dim() {
                return invalid(&format!(
                    "level {n} is outside the truncated space of dimension {}",
                    s.space.dim()
                ));
            }
            put(out, s.rho.matrix()[(n, n)].re)
        }
        Err(status) => status,
    })
}

/// Wigner function at the phase-space point (q, p), with the convention
/// alpha = q + i p. Number-diagonal families use the alternating Laguerre
/// sum; the squeezed vacuum goes through the displaced parity expectation.
/// Accuracy degrades once q^2 + p^2 approaches the space's cutoff.
#[no_mangle]
pub unsafe extern "C" fn tmss_reduced_state_wigner(
    state: *const TmssReducedState,
    q: f64,
    p: f64,
    out: *mut f64,
) -> TmssStatus {
    guarded(|| match state_ref(state) {
        Ok(s) => {
            if !(q.is_finite() && p.is_finite()) {
                return invalid("phase-space coordinates must be finite");
            }
            let value = match s.family {
                StateFamily::Smss => match wigner_parity(&s.rho, Complex64::new(q, p)) {
                    Ok(value) => value,
                    Err(err) => return fail(&err),
                },
                _ => wigner_generic(&s.rho, PhasePoint::new(q, p)),
            };
            put(out, value)
        }
        Err(status) => status,
    })
}

/// Quantum Fisher information for displacement along the quadrature at
/// `angle` (radians; 0 is the q axis).
#[no_mangle]
pub unsafe extern "C" fn tmss_reduced_state_qfi(
    state: *const TmssReducedState,
    angle: f64,
    out: *mut f64,
) -> TmssStatus {
    guarded(|| match state_ref(state) {
        Ok(s) => {
            if !angle.is_finite() {
                return invalid("quadrature angle must be finite");
            }
            match qfi_mixed(&s.rho, &Generator::quadrature(angle, &s.space)) {
                Ok(value) => put(out, value),
                Err(err) => fail(&err),
            }
        }
        Err(status) => status,
    })
}

/// Excited-to-ground inversion read by a carrier probe pulse after kicking
/// the state by alpha = alpha_re + i alpha_im. `eta_x` is the probe
/// Lamb-Dicke parameter and `omega` the carrier Rabi frequency.
#[no_mangle]
pub unsafe extern "C" fn tmss_reduced_state_probe(
    state: *const TmssReducedState,
    alpha_re: f64,
    alpha_im: f64,
    eta_x: f64,
    omega: f64,
    out: *mut f64,
) -> TmssStatus {
    guarded(|| match state_ref(state) {
        Ok(s) => {
            let params = ProbeParams { eta_x, omega };
            match probe(&s.rho, Complex64::new(alpha_re, alpha_im), &params) {
                Ok(result) => put(out, result.p_eg),
                Err(err) => fail(&err),
            }
        }
        Err(status) => status,
    })
}

/// Closed-form g2(0) of a family at `lambda`; `Undefined` where the family
/// carries no photons.
#[no_mangle]
pub unsafe extern "C" fn tmss_g2_closed(
    family: TmssFamily,
    lambda: f64,
    out: *mut f64,
) -> TmssStatus {
    guarded(|| {
        if let Some(status) = check_lambda(lambda) {
            return status;
        }
        match g2_closed(family.core(), lambda) {
            Some(value) => put(out, value),
            None => undefined("g2(0) is undefined for a state without photons"),
        }
    })
}

/// Closed-form mean occupation of a family at `lambda`.
#[no_mangle]
pub unsafe extern "C" fn tmss_mean_n_closed(
    family: TmssFamily,
    lambda: f64,
    out: *mut f64,
) -> TmssStatus {
    guarded(|| {
        if let Some(status) = check_lambda(lambda) {
            return status;
        }
        put(out, mean_n_closed(family.core(), lambda))
    })
}

/// Closed-form Wigner function of the thermal, even, or odd family at the
/// point (q, p). The squeezed vacuum has no closed form here; query it
/// through a state handle instead.
#[no_mangle]
pub unsafe extern "C" fn tmss_wigner_closed(
    family: TmssFamily,
    lambda: f64,
    q: f64,
    p: f64,
    out: *mut f64,
) -> TmssStatus {
    guarded(|| {
        if !(q.is_finite() && p.is_finite()) {
            return invalid("phase-space coordinates must be finite");
        }
        match wigner_closed(family.core(), lambda, PhasePoint::new(q, p)) {
            Ok(value) => put(out, value),
            Err(err) => fail(&err),
        }
    })
}

/// Linear-entropy entanglement of the plain two-mode squeezed vacuum.
#[no_mangle]
pub unsafe extern "C" fn tmss_entanglement_tmss(lambda: f64, out: *mut f64) -> TmssStatus {
    guarded(|| {
        if let Some(status) = check_lambda(lambda) {
            return status;
        }
        put(out, e_tmss(lambda))
    })
}

/// Linear-entropy entanglement of the superposition with relative phase
/// `phi` (radians).
#[no_mangle]
pub unsafe extern "C" fn tmss_entanglement_superposition(
    lambda: f64,
    phi: f64,
    out: *mut f64,
) -> TmssStatus {
    guarded(|| {
        if let Some(status) = check_lambda(lambda) {
            return status;
        }
        if !phi.is_finite() {
            return invalid("relative phase must be finite");
        }
        put(out, e_phi(lambda, phi.cos()))
    })
}

/// Linear-entropy entanglement shared by the even and odd members.
#[no_mangle]
pub unsafe extern "C" fn tmss_entanglement_even_odd(lambda: f64, out: *mut f64) -> TmssStatus {
    guarded(|| {
        if let Some(status) = check_lambda(lambda) {
            return status;
        }
        put(out, e_even_odd(lambda))
    })
}

/// Squeezing parameter lambda at which the phi-superposition is exactly as
/// entangled as the plain pair state; `Undefined` when the two curves never
/// cross for this phase.
#[no_mangle]
pub unsafe extern "C" fn tmss_entanglement_boundary(phi: f64, out: *mut f64) -> TmssStatus {
    guarded(|| {
        if !phi.is_finite() {
            return invalid("relative phase must be finite");
        }
        match entanglement_boundary(phi.cos()) {
            Some(value) => put(out, value),
            None => undefined("no equality point exists for this relative phase"),
        }
    })
}

/// Probability of heralding the odd member from a pair state at `lambda`,
/// and the heralded state's single-pair weight.
#[no_mangle]
pub unsafe extern "C" fn tmss_odd_projection_stats(
    lambda: f64,
    out_p_project: *mut f64,
    out_p_single: *mut f64,
) -> TmssStatus {
    guarded(|| {
        if let Some(status) = check_lambda(lambda) {
            return status;
        }
        let (p_project, p_single) = odd_projection_stats(lambda);
        let status = put(out_p_project, p_project);
        if status != TmssStatus::Ok {
            return status;
        }
        put(out_p_single, p_single)
    })
}

/// Interference contrast of the carrier probe, cos(2 Phi); zero exactly at
/// the blind spots where 1/eta_x^2 is an integer.
#[no_mangle]
pub unsafe extern "C" fn tmss_probe_contrast(eta_x: f64, omega: f64, out: *mut f64) -> TmssStatus {
    guarded(|| {
        let params = ProbeParams { eta_x, omega };
        if let Err(err) = params.validate() {
            return fail(&err);
        }
        put(out, params.contrast())
    })
}
