//! Photon statistics, Wigner functions, and entanglement measures, each with
//! a closed-form route and an independent numeric route so the two can audit
//! each other.
//!
//! Phase-space convention: a point (q, p) is the complex coordinate
//! alpha = q + ip of the displaced-parity construction, so s^2 = q^2 + p^2 =
//! |alpha|^2 and the vacuum has variance 1/4 in each coordinate. With this
//! choice the Fock-state kernel (2/pi)(-1)^n L_n(4 s^2) e^{-2 s^2}, the
//! closed Gaussian forms, and the displaced-parity evaluation agree and
//! integrate to one over dq dp.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{displacement, DensityMatrix, FockSpace, StateVector};
use crate::states::{rho_even, rho_odd, smss_ket, thermal_rho, StateFamily};

/// Phase-space point; `q` and `p` are the real and imaginary parts of the
/// complex coordinate alpha.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64) -> Self {
        Self { q, p }
    }

    pub fn from_alpha(alpha: C64) -> Self {
        Self {
            q: alpha.re,
            p: alpha.im,
        }
    }

    pub fn alpha(&self) -> C64 {
        C64::new(self.q, self.p)
    }

    /// Squared phase-space radius s^2 = q^2 + p^2 = |alpha|^2.
    pub fn s_sq(&self) -> f64 {
        self.q * self.q + self.p * self.p
    }
}

/// One-stop photon-statistics summary of a single-mode state.
#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub populations: Vec<f64>,
    pub mean_n: f64,
    /// None when the state carries no photons (the correlation is 0/0).
    pub g2: Option<f64>,
    pub purity: f64,
}

impl StatsReport {
    pub fn from_rho(rho: &DensityMatrix) -> Self {
        Self {
            populations: rho.populations(),
            mean_n: mean_n(rho),
            g2: g2_numeric(rho),
            purity: rho.purity(),
        }
    }
}

/// <n> = sum_n n rho_nn (the number operator is diagonal, so only the
/// diagonal of rho contributes).
pub fn mean_n(rho: &DensityMatrix) -> f64 {
    rho.populations()
        .iter()
        .enumerate()
        .map(|(n, p)| n as f64 * p)
        .sum()
}

/// <a†a†aa> = sum_n n(n-1) rho_nn, again a number-diagonal moment.
pub fn second_factorial_moment(rho: &DensityMatrix) -> f64 {
    rho.populations()
        .iter()
        .enumerate()
        .map(|(n, p)| (n * n.saturating_sub(1)) as f64 * p)
        .sum()
}

/// g^(2)(0) = <a†a†aa> / <a†a>^2 from matrix moments. None for states with
/// no photons, where the ratio is 0/0.
pub fn g2_numeric(rho: &DensityMatrix) -> Option<f64> {
    let mean = mean_n(rho);
    if mean < 1e-12 {
        return None;
    }
    Some(second_factorial_moment(rho) / (mean * mean))
}

/// Closed-form g^(2)(0) per family as a function of lambda = tanh^2 r.
/// None where the state degenerates to vacuum (or, for the odd family, does
/// not exist) at lambda = 0.
pub fn g2_closed(family: StateFamily, lambda: f64) -> Option<f64> {
    if lambda == 0.0 {
        return None;
    }
    let l2 = lambda * lambda;
    Some(match family {
        StateFamily::Even => 2.0 + (1.0 - l2) / (2.0 * l2),
        StateFamily::Odd => 2.0 - 2.0 * (1.0 - l2) / ((1.0 + l2) * (1.0 + l2)),
        StateFamily::Thermal => 2.0,
        StateFamily::Smss => 2.0 + 1.0 / lambda,
    })
}

/// Closed-form <n> per family as a function of lambda.
pub fn mean_n_closed(family: StateFamily, lambda: f64) -> f64 {
    let l2 = lambda * lambda;
    match family {
        StateFamily::Even => 2.0 * l2 / (1.0 - l2),
        StateFamily::Odd => (1.0 + l2) / (1.0 - l2),
        StateFamily::Thermal => lambda / (1.0 - lambda),
        StateFamily::Smss => lambda / (1.0 - lambda),
    }
}

/// Reduced/probe state of a family at the given lambda on the given space.
pub fn family_state(family: StateFamily, lambda: f64, space: &FockSpace) -> Result<DensityMatrix> {
    match family {
        StateFamily::Even => rho_even(lambda, space),
        StateFamily::Odd => rho_odd(lambda, space),
        StateFamily::Thermal => thermal_rho(lambda, space),
        StateFamily::Smss => {
            let r = crate::states::r_from_lambda(lambda)?;
            Ok(DensityMatrix::from_pure(&smss_ket(r, 0.0, space)?))
        }
    }
}

/// Scaled Laguerre values psi_n = L_n(x) e^{-x/2} for n = 0..=n_max; each is
/// the parity-stripped Fock-state Wigner kernel and stays in [-1, 1], so the
/// recurrence cannot overflow.
fn laguerre_envelope(n_max: usize, x: f64) -> Vec<f64> {
    let e = (-x / 2.0).exp();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(e);
    if n_max == 0 {
        return out;
    }
    out.push((1.0 - x) * e);
    for n in 1..n_max {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 - x) * out[n] - nf * out[n - 1]) / (nf + 1.0);
        out.push(next);
    }
    out
}

/// Wigner function of a number-diagonal single-mode state via the Fock sum
/// W = sum_n P_n (2/pi)(-1)^n L_n(4 s^2) e^{-2 s^2}. Off-diagonal structure
/// is ignored (and warned about); use [`wigner_parity`] for general states.
pub fn wigner_generic(rho: &DensityMatrix, pt: PhasePoint) -> f64 {
    let d = rho.dim();
    let mut max_offdiag = 0.0f64;
    for i in 0..d {
        for j in 0..i {
            max_offdiag = max_offdiag.max(rho.matrix()[(i, j)].norm());
        }
    }
    if max_offdiag > 1e-8 {
        log::warn!(
            "wigner_generic on a state with off-diagonal weight {max_offdiag:.3e}; \
             only the number-diagonal part contributes"
        );
    }
    let psi = laguerre_envelope(d - 1, 4.0 * pt.s_sq());
    let mut acc = 0.0;
    let mut sign = 1.0;
    for (n, p) in rho.populations().iter().enumerate() {
        acc += p * sign * psi[n];
        sign = -sign;
    }
    acc * 2.0 / std::f64::consts::PI
}

/// Closed-form Wigner functions: a single Gaussian for the thermal family
/// and two-Gaussian forms for the even/odd reduced states. The SMSS family
/// has no closed form here.
pub fn wigner_closed(family: StateFamily, lambda: f64, pt: PhasePoint) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "lambda must lie in [0, 1), got {lambda}"
        )));
    }
    let s_sq = pt.s_sq();
    let narrow = (-2.0 * ((1.0 - lambda) / (1.0 + lambda)) * s_sq).exp();
    match family {
        StateFamily::Thermal => {
            Ok(2.0 / std::f64::consts::PI * ((1.0 - lambda) / (1.0 + lambda)) * narrow)
        }
        StateFamily::Even | StateFamily::Odd => {
            let wide = (-2.0 * ((1.0 + lambda) / (1.0 - lambda)) * s_sq).exp();
            let lobes = (1.0 - lambda) * narrow;
            let spike = (1.0 + lambda) * wide;
            match family {
                StateFamily::Even => Ok((lobes + spike) / std::f64::consts::PI),
                StateFamily::Odd => {
                    if lambda == 0.0 {
                        return Err(Error::OddStateAtZeroSqueezing);
                    }
                    Ok((lobes - spike) / (std::f64::consts::PI * lambda))
                }
                _ => unreachable!(),
            }
        }
        StateFamily::Smss => Err(Error::InvalidParameter(
            "no closed Wigner form is provided for the single-mode squeezed family".into(),
        )),
    }
}

/// Wigner function by displaced parity, (2/pi) Tr[D†(alpha) rho D(alpha) Pi],
/// valid for any single-mode state. Truncation quality is the displacement
/// operator's concern; it warns when alpha is too large for the cutoff.
pub fn wigner_parity(rho: &DensityMatrix, alpha: C64) -> Result<f64> {
    if rho.shape().len() != 1 {
        return Err(Error::ShapeMismatch {
            left: rho.shape().to_vec(),
            right: vec![rho.dim()],
        });
    }
    let space = FockSpace::with_cutoff(rho.dim() - 1);
    let d_op = displacement(alpha, &space);
    let moved = d_op.matrix().adjoint() * rho.matrix() * d_op.matrix();
    let mut acc = 0.0;
    let mut sign = 1.0;
    for n in 0..rho.dim() {
        acc += sign * moved[(n, n)].re;
        sign = -sign;
    }
    Ok(acc * 2.0 / std::f64::consts::PI)
}

/// Linear entropy of entanglement 1 - Tr(rho_1^2) of a pure two-factor
/// state, computed by reshaping the amplitudes and taking one Gram matrix.
pub fn entanglement_numeric(psi: &StateVector) -> Result<f64> {
    let shape = psi.shape();
    if shape.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "entanglement needs a two-factor pure state, got shape {shape:?}"
        )));
    }
    let (d1, d2) = (shape[0], shape[1]);
    // amplitudes flat-indexed i*d2 + j read column-major as a d2 x d1 matrix
    let b = DMatrix::<C64>::from_column_slice(d2, d1, psi.amplitudes().as_slice());
    let gram = b.adjoint() * &b;
    let purity: f64 = gram.iter().map(|z| z.norm_sqr()).sum();
    Ok(1.0 - purity)
}

/// Entanglement of the plain two-mode squeezed vacuum: 2 lambda / (1 + lambda).
pub fn e_tmss(lambda: f64) -> f64 {
    2.0 * lambda / (1.0 + lambda)
}

/// Entanglement of the phase-phi superposition (plus sign) as a function of
/// lambda and eps = cos(phi). The minus-sign state is eps -> -eps.
pub fn e_phi(lambda: f64, eps: f64) -> f64 {
    let l2 = lambda * lambda;
    let up = 1.0 + eps;
    let dn = 1.0 - eps;
    let num = up * up + l2 * dn * dn;
    let den = (up + lambda * dn).powi(2);
    1.0 - ((1.0 - l2) / (1.0 + l2)) * num / den
}

/// Shared entanglement of the even and odd superpositions:
/// 2 lambda^2 / (1 + lambda^2).
pub fn e_even_odd(lambda: f64) -> f64 {
    2.0 * lambda * lambda / (1.0 + lambda * lambda)
}

/// The lambda at which the superposition's entanglement crosses the plain
/// squeezed vacuum's, sqrt((1+eps)/(1-eps)); None when the crossing lies at
/// or beyond lambda = 1 (eps >= 0), where the superposition never wins.
pub fn entanglement_boundary(eps: f64) -> Option<f64> {
    if eps >= 0.0 || eps <= -1.0 {
        return None;
    }
    Some(((1.0 + eps) / (1.0 - eps)).sqrt())
}

/// Probability of projecting a two-mode squeezed vacuum onto its odd part,
/// P_O = lambda/(1+lambda), together with the heralded state's single-pair
/// weight P_1 = 1 - lambda^2.
pub fn odd_projection_stats(lambda: f64) -> (f64, f64) {
    (lambda / (1.0 + lambda), 1.0 - lambda * lambda)
}

/// Sign-change bisection root finder; None when the bracket does not change
/// sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Composite Simpson integral of `f` over the square
/// [-half_width, half_width]^2; `points_per_axis` must be odd and >= 3.
pub fn simpson_2d<F: Fn(PhasePoint) -> f64>(
    f: F,
    half_width: f64,
    points_per_axis: usize,
) -> Result<f64> {
    if points_per_axis < 3 || points_per_axis % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "Simpson rule needs an odd point count >= 3, got {points_per_axis}"
        )));
    }
    let n = points_per_axis;
    let h = 2.0 * half_width / (n - 1) as f64;
    let weight = |i: usize| -> f64 {
        if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut acc = 0.0;
    for i in 0..n {
        let q = -half_width + i as f64 * h;
        let wi = weight(i);
        for j in 0..n {
            let p = -half_width + j as f64 * h;
            acc += wi * weight(j) * f(PhasePoint::new(q, p));
        }
    }
    Ok(acc * h * h / 9.0)
}
