//! State factory for two-mode squeezed vacua, their coherent superpositions,
//! the even/odd limiting kets, single-mode reduced states, and single-mode
//! squeezed vacuum.
//!
//! Every closed-form constructor has an independent operator-exponential
//! counterpart (`*_oracle`) built from nothing but ladder operators and
//! `exp`; tests hold the two routes against each other so neither can drift
//! silently.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, FockSpace, StateVector};
use crate::linalg::expm_action;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Squeezing parameters: magnitude `r`, squeezing phase `theta` (the phase
/// of xi = r e^{i theta}), and superposition phase `phi`.
///
/// `lambda = tanh^2 r` is the natural abscissa for every photon-number law
/// in this crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeParams {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SqueezeParams {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) || !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "squeeze parameters must be finite with r >= 0, got r={r}, theta={theta}, phi={phi}"
            )));
        }
        Ok(Self { r, theta, phi })
    }

    /// tanh^2 r, the two-mode photon-pair weight.
    pub fn lambda(&self) -> f64 {
        self.r.tanh().powi(2)
    }

    /// cos phi, the superposition interference weight.
    pub fn eps(&self) -> f64 {
        self.phi.cos()
    }

    /// xi = r e^{i theta}.
    pub fn xi(&self) -> C64 {
        C64::from_polar(self.r, self.theta)
    }

    /// -e^{i theta} tanh r, the per-pair amplitude ratio of the two-mode
    /// squeezed vacuum.
    pub fn pair_ratio(&self) -> C64 {
        -C64::from_polar(self.r.tanh(), self.theta)
    }

    pub fn with_phi(&self, phi: f64) -> Self {
        Self { phi, ..*self }
    }
}

/// Inverse of `lambda = tanh^2 r`.
pub fn r_from_lambda(lambda: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "lambda must lie in [0, 1), got {lambda}"
        )));
    }
    Ok(lambda.sqrt().atanh())
}

/// Relative sign between the two squeezed components of a superposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(&self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Single-mode state families that share the photon statistics machinery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateFamily {
    /// Reduced state of the even two-mode superposition.
    Even,
    /// Reduced state of the odd two-mode superposition.
    Odd,
    /// Thermal state; also the reduced state of a plain two-mode squeezed
    /// vacuum.
    Thermal,
    /// Single-mode squeezed vacuum (pure).
    Smss,
}

impl StateFamily {
    pub const ALL: [StateFamily; 4] = [
        StateFamily::Even,
        StateFamily::Odd,
        StateFamily::Thermal,
        StateFamily::Smss,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            StateFamily::Even => "even",
            StateFamily::Odd => "odd",
            StateFamily::Thermal => "thermal",
            StateFamily::Smss => "smss",
        }
    }
}

/// Two-mode squeezed vacuum sum_n c_n |n, n> with
/// c_n = (-e^{i theta} tanh r)^n / cosh r.
pub fn tmss_ket(params: &SqueezeParams, space: &FockSpace) -> Result<StateVector> {
    space.check_tail(params.lambda())?;
    let d = space.dim();
    let ratio = params.pair_ratio();
    let mut amps = DVector::<C64>::zeros(d * d);
    let mut coeff = c(1.0);
    for n in 0..d {
        amps[n * d + n] = coeff;
        coeff *= ratio;
    }
    StateVector::new(amps, vec![d, d])
}

/// Two-mode squeezed vacuum through the operator exponential
/// exp(xi* ab - xi a†b†)|0,0>, evaluated without densifying the generator.
/// Independent of [`tmss_ket`]'s closed form.
pub fn squeeze_oracle(params: &SqueezeParams, space: &FockSpace) -> Result<StateVector> {
    space.check_tail(params.lambda())?;
    let d = space.dim();
    let xi = params.xi();
    let xi_conj = xi.conj();
    let apply = |v: &DVector<C64>| -> DVector<C64> {
        let mut out = DVector::<C64>::zeros(d * d);
        for m in 0..d {
            for n in 0..d {
                let idx = m * d + n;
                let mut acc = C64::default();
                if m + 1 < d && n + 1 < d {
                    let w = (((m + 1) * (n + 1)) as f64).sqrt();
                    acc += xi_conj * c(w) * v[(m + 1) * d + (n + 1)];
                }
                if m >= 1 && n >= 1 {
                    let w = ((m * n) as f64).sqrt();
                    acc -= xi * c(w) * v[(m - 1) * d + (n - 1)];
                }
                out[idx] = acc;
            }
        }
        out
    };
    let mut vac = DVector::<C64>::zeros(d * d);
    vac[0] = c(1.0);
    let evolved = expm_action(apply, &vac, 2.0 * params.r * d as f64);
    StateVector::new(evolved, vec![d, d])
}

/// Exact pre-normalization weight of the superposition
/// |psi(xi)> +/- e^{i phi} |psi(-xi)>, with each component normalized:
/// 2[(1 + lambda) +/- cos(phi) (1 - lambda)] / (1 + lambda).
/// The physical normalization constant is the inverse square root of this.
pub fn superposition_norm_sq(params: &SqueezeParams, sign: Sign) -> f64 {
    let lambda = params.lambda();
    let eps = params.eps();
    2.0 * ((1.0 + lambda) + sign.factor() * eps * (1.0 - lambda)) / (1.0 + lambda)
}

/// Normalized superposition of opposite-phase two-mode squeezed vacua,
/// |psi(xi)> +/- e^{i phi} |psi(-xi)>. Flipping xi -> -xi multiplies c_n by
/// (-1)^n, so the amplitudes are c_n (1 +/- e^{i phi} (-1)^n).
pub fn superposition_ket(
    params: &SqueezeParams,
    sign: Sign,
    space: &FockSpace,
) -> Result<StateVector> {
    space.check_tail(params.lambda())?;
    let norm_sq = superposition_norm_sq(params, sign);
    if norm_sq < 1e-12 {
        return Err(Error::DegenerateSuperposition { norm_sq });
    }
    let d = space.dim();
    let ratio = params.pair_ratio();
    let phase = C64::from_polar(1.0, params.phi) * c(sign.factor());
    let mut amps = DVector::<C64>::zeros(d * d);
    let mut coeff = c(1.0);
    let mut parity = 1.0;
    for n in 0..d {
        amps[n * d + n] = coeff * (c(1.0) + phase * c(parity));
        coeff *= ratio;
        parity = -parity;
    }
    StateVector::new(amps, vec![d, d])
}

/// Even superposition at phi = 0: only |2n, 2n> components survive.
pub fn even_ket(params: &SqueezeParams, space: &FockSpace) -> Result<StateVector> {
    space.check_tail(params.lambda())?;
    let d = space.dim();
    let ratio_sq = params.pair_ratio().powu(2);
    let mut amps = DVector::<C64>::zeros(d * d);
    let mut coeff = c(1.0);
    let mut n = 0usize;
    while n < d {
        amps[n * d + n] = coeff;
        coeff *= ratio_sq;
        n += 2;
    }
    StateVector::new(amps, vec![d, d])
}

/// Odd superposition at phi = 0: only |2n+1, 2n+1> components survive.
/// Undefined at r = 0, where the odd component vanishes identically.
pub fn odd_ket(params: &SqueezeParams, space: &FockSpace) -> Result<StateVector> {
    if params.r == 0.0 {
        return Err(Error::OddStateAtZeroSqueezing);
    }
    space.check_tail(params.lambda())?;
    let d = space.dim();
    let ratio_sq = params.pair_ratio().powu(2);
    let mut amps = DVector::<C64>::zeros(d * d);
    // amplitudes relative to the |1,1> component to avoid underflow at small r
    let mut coeff = c(1.0);
    let mut n = 1usize;
    while n < d {
        amps[n * d + n] = coeff;
        coeff *= ratio_sq;
        n += 2;
    }
    StateVector::new(amps, vec![d, d])
}

/// Single-mode reduced state of [`superposition_ket`]: diagonal with
/// populations proportional to lambda^n [1 +/- (-1)^n cos(phi)]. The
/// squeezing phase theta drops out entirely.
pub fn reduced_rho(params: &SqueezeParams, sign: Sign, space: &FockSpace) -> Result<DensityMatrix> {
    space.check_tail(params.lambda())?;
    let norm_sq = superposition_norm_sq(params, sign);
    if norm_sq < 1e-12 {
        return Err(Error::DegenerateSuperposition { norm_sq });
    }
    let lambda = params.lambda();
    let eps = params.eps() * sign.factor();
    let d = space.dim();
    let mut pops = Vec::with_capacity(d);
    let mut weight = 1.0f64;
    let mut parity = 1.0f64;
    for _ in 0..d {
        pops.push(weight * (1.0 + parity * eps));
        weight *= lambda;
        parity = -parity;
    }
    DensityMatrix::from_populations(&pops, vec![d])
}

/// Thermal state with populations proportional to lambda^n; equals the
/// reduced state of a plain two-mode squeezed vacuum with the same lambda.
pub fn thermal_rho(lambda: f64, space: &FockSpace) -> Result<DensityMatrix> {
    check_lambda(lambda)?;
    space.check_tail(lambda)?;
    let d = space.dim();
    let mut pops = Vec::with_capacity(d);
    let mut weight = 1.0f64;
    for _ in 0..d {
        pops.push(weight);
        weight *= lambda;
    }
    DensityMatrix::from_populations(&pops, vec![d])
}

/// Reduced state of the even superposition: populations proportional to
/// lambda^{2n} on even levels, zero on odd levels.
pub fn rho_even(lambda: f64, space: &FockSpace) -> Result<DensityMatrix> {
    check_lambda(lambda)?;
    space.check_tail(lambda)?;
    let d = space.dim();
    let mut pops = vec![0.0f64; d];
    let mut weight = 1.0f64;
    let mut n = 0usize;
    while n < d {
        pops[n] = weight;
        weight *= lambda * lambda;
        n += 2;
    }
    DensityMatrix::from_populations(&pops, vec![d])
}

/// Reduced state of the odd superposition: populations proportional to
/// lambda^{2n+1} on odd levels. Its distribution is the even one's shifted
/// up by exactly one photon.
pub fn rho_odd(lambda: f64, space: &FockSpace) -> Result<DensityMatrix> {
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return Err(Error::OddStateAtZeroSqueezing);
    }
    space.check_tail(lambda)?;
    let d = space.dim();
    let mut pops = vec![0.0f64; d];
    let mut weight = 1.0f64;
    let mut n = 1usize;
    while n < d {
        pops[n] = weight;
        weight *= lambda * lambda;
        n += 2;
    }
    DensityMatrix::from_populations(&pops, vec![d])
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "lambda must lie in [0, 1), got {lambda}"
        )));
    }
    Ok(())
}

/// Smallest cutoff so the single-mode squeezed vacuum's photon-number tail
/// falls below `tail_tol`. Populations obey
/// P_{2n+2} / P_{2n} = lambda (2n+1)/(2n+2), so the remaining mass beyond
/// 2n is bounded by P_{2n} lambda / (1 - lambda).
pub fn smss_cutoff(lambda: f64, tail_tol: f64) -> Result<usize> {
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return Ok(1);
    }
    let mut p = 1.0f64; // un-normalized P_0; normalization only helps
    let mut n = 0usize;
    loop {
        let tail_bound = p * lambda / (1.0 - lambda);
        if tail_bound < tail_tol {
            return Ok(n + 1);
        }
        p *= lambda * (2 * n + 1) as f64 / (2 * n + 2) as f64;
        n += 2;
        if n > 1_000_000 {
            return Err(Error::InvalidParameter(format!(
                "no practical cutoff reaches tail {tail_tol:.1e} for lambda = {lambda}"
            )));
        }
    }
}

/// Fock space sized for a single-mode squeezed vacuum by [`smss_cutoff`].
pub fn smss_space(lambda: f64, tail_tol: f64) -> Result<FockSpace> {
    FockSpace::new(smss_cutoff(lambda, tail_tol)?.max(2), tail_tol)
}

/// Single-mode squeezed vacuum
/// (1/sqrt(cosh r)) sum_n (-e^{i theta} tanh r)^n sqrt((2n)!)/(2^n n!) |2n>.
pub fn smss_ket(r: f64, theta: f64, space: &FockSpace) -> Result<StateVector> {
    let params = SqueezeParams::new(r, theta, 0.0)?;
    check_smss_fit(params.lambda(), space)?;
    let d = space.dim();
    let ratio = params.pair_ratio();
    let mut amps = DVector::<C64>::zeros(d);
    let mut coeff = c(1.0);
    let mut n = 0usize;
    while 2 * n < d {
        amps[2 * n] = coeff;
        // c_{2n+2}/c_{2n} = ratio * sqrt((2n+1)(2n+2)) / (2n+2)
        let step = ((2 * n + 1) as f64 * (2 * n + 2) as f64).sqrt() / (2 * n + 2) as f64;
        coeff *= ratio * c(step);
        n += 1;
    }
    StateVector::new(amps, vec![d])
}

/// Single-mode squeezed vacuum through the operator exponential
/// exp((xi* a^2 - xi a†^2)/2)|0>. Independent of [`smss_ket`].
pub fn smss_oracle(r: f64, theta: f64, space: &FockSpace) -> Result<StateVector> {
    let params = SqueezeParams::new(r, theta, 0.0)?;
    check_smss_fit(params.lambda(), space)?;
    let d = space.dim();
    let xi = params.xi();
    let half_conj = xi.conj() * c(0.5);
    let half = xi * c(0.5);
    let apply = |v: &DVector<C64>| -> DVector<C64> {
        let mut out = DVector::<C64>::zeros(d);
        for n in 0..d {
            let mut acc = C64::default();
            if n + 2 < d {
                let w = (((n + 1) * (n + 2)) as f64).sqrt();
                acc += half_conj * c(w) * v[n + 2];
            }
            if n >= 2 {
                let w = ((n * (n - 1)) as f64).sqrt();
                acc -= half * c(w) * v[n - 2];
            }
            out[n] = acc;
        }
        out
    };
    let mut vac = DVector::<C64>::zeros(d);
    vac[0] = c(1.0);
    let evolved = expm_action(apply, &vac, r * d as f64);
    StateVector::new(evolved, vec![d])
}

fn check_smss_fit(lambda: f64, space: &FockSpace) -> Result<()> {
    let needed = smss_cutoff(lambda, space.tail_tol())?;
    if space.cutoff() < needed {
        return Err(Error::CutoffTooSmall {
            cutoff: space.cutoff(),
            lambda,
            tail: f64::NAN,
            tol: space.tail_tol(),
        });
    }
    Ok(())
}
