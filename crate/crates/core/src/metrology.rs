//! Quantum Fisher information for displacement estimation: quadrature
//! generators, the pure-state variance form, the mixed-state spectral sum,
//! and sweeps across the single-mode state families.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{create, destroy, DensityMatrix, FockSpace, Operator, StateVector};
use crate::linalg::eigh;
use crate::states::{r_from_lambda, smss_ket, smss_space, StateFamily};
use crate::stats::{family_state, mean_n_closed};

/// Default floor on eigenvalue-pair sums in the spectral QFI formula.
pub const QFI_EIGEN_FLOOR: f64 = 1e-12;

/// Hermitian quadrature generator X(angle) = a e^{-i angle} + a† e^{i angle}.
/// A displacement of magnitude y along phase-space direction d is generated
/// by X(d + pi/2), so angle-invariance of the QFI means isotropic
/// sensitivity.
#[derive(Debug, Clone)]
pub struct Generator {
    angle: f64,
    op: Operator,
}

impl Generator {
    pub fn quadrature(angle: f64, space: &FockSpace) -> Self {
        let a = destroy(space);
        let ad = create(space);
        let op = &a.scale(C64::from_polar(1.0, -angle)) + &ad.scale(C64::from_polar(1.0, angle));
        debug_assert!(op.hermitian_defect() < 1e-12);
        Self { angle, op }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }
}

/// Variance of the quadrature X(angle) in a single-mode state.
pub fn quadrature_variance(rho: &DensityMatrix, angle: f64) -> Result<f64> {
    let space = FockSpace::with_cutoff(rho.dim() - 1);
    let g = Generator::quadrature(angle, &space);
    let g_sq = g.operator() * g.operator();
    let mean = rho.expectation(g.operator())?.re;
    let mean_sq = rho.expectation(&g_sq)?.re;
    Ok(mean_sq - mean * mean)
}

/// QFI of a pure state: F = 4 (<G^2> - <G>^2).
pub fn qfi_pure(psi: &StateVector, g: &Generator) -> Result<f64> {
    if psi.shape() != g.op.shape() {
        return Err(Error::ShapeMismatch {
            left: psi.shape().to_vec(),
            right: g.op.shape().to_vec(),
        });
    }
    let g_psi = g.op.apply_raw(psi.amplitudes());
    let mean = psi.amplitudes().dotc(&g_psi).re;
    let mean_sq = g_psi.norm_squared();
    Ok(4.0 * (mean_sq - mean * mean))
}

/// QFI of a mixed state by the spectral sum
/// F = 2 sum_{ij} (w_i - w_j)^2/(w_i + w_j) |<i|G|j>|^2 over the
/// eigen-decomposition of rho, skipping pairs whose weight sum falls below
/// `floor` (the formula is singular on the kernel).
pub fn qfi_mixed_with_floor(rho: &DensityMatrix, g: &Generator, floor: f64) -> Result<f64> {
    if rho.shape() != g.op.shape() {
        return Err(Error::ShapeMismatch {
            left: rho.shape().to_vec(),
            right: g.op.shape().to_vec(),
        });
    }
    let (values, vectors) = eigh(rho.matrix());
    // roundoff guard: tiny negative weights are zero
    let weights: Vec<f64> = values.iter().map(|&w| w.max(0.0)).collect();
    let g_eigen = vectors.adjoint() * g.op.matrix() * &vectors;
    let d = weights.len();
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            let sum = weights[i] + weights[j];
            if sum <= floor {
                continue;
            }
            let diff = weights[i] - weights[j];
            acc += diff * diff / sum * g_eigen[(i, j)].norm_sqr();
        }
    }
    Ok(2.0 * acc)
}

/// [`qfi_mixed_with_floor`] at the default floor.
pub fn qfi_mixed(rho: &DensityMatrix, g: &Generator) -> Result<f64> {
    qfi_mixed_with_floor(rho, g, QFI_EIGEN_FLOOR)
}

/// Choice of x-coordinate for QFI sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QfiAbscissa {
    /// The squeezing weight lambda = tanh^2 r.
    Lambda,
    /// Each family's own mean excitation number at that lambda.
    MeanN,
}

#[derive(Debug, Clone, Serialize)]
pub struct QfiFamilyCurve {
    pub family: StateFamily,
    /// (abscissa value, QFI) pairs in grid order.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct QfiCurve {
    pub abscissa: QfiAbscissa,
    pub families: Vec<QfiFamilyCurve>,
}

/// QFI curves over a lambda grid for the requested families. Mixed families
/// go through the spectral sum; the pure single-mode squeezed family uses
/// the variance form with the antisqueezed quadrature X(pi/2), its best
/// direction.
pub fn qfi_sweep(
    families: &[StateFamily],
    abscissa: QfiAbscissa,
    lambdas: &[f64],
    tail_tol: f64,
) -> Result<QfiCurve> {
    let mut curves = Vec::with_capacity(families.len());
    for &family in families {
        let mut points = Vec::with_capacity(lambdas.len());
        for &lambda in lambdas {
            if !(0.0..=0.95).contains(&lambda) {
                return Err(Error::InvalidParameter(format!(
                    "QFI sweep lambda grid must stay in [0, 0.95], got {lambda}"
                )));
            }
            let f = match family {
                StateFamily::Smss => {
                    let space = smss_space(lambda, tail_tol)?;
                    let psi = smss_ket(r_from_lambda(lambda)?, 0.0, &space)?;
                    let g = Generator::quadrature(std::f64::consts::FRAC_PI_2, &space);
                    qfi_pure(&psi, &g)?
                }
                _ => {
                    let space = FockSpace::for_lambda(lambda, tail_tol)?;
                    let rho = family_state(family, lambda, &space)?;
                    let g = Generator::quadrature(0.0, &space);
                    qfi_mixed(&rho, &g)?
                }
            };
            let x = match abscissa {
                QfiAbscissa::Lambda => lambda,
                QfiAbscissa::MeanN => mean_n_closed(family, lambda),
            };
            points.push((x, f));
        }
        curves.push(QfiFamilyCurve { family, points });
    }
    Ok(QfiCurve {
        abscissa,
        families: curves,
    })
}

/// Uniform average of the single-mode squeezed state's QFI over quadrature
/// angles in [center - half_width, center + half_width], by midpoint rule.
/// Models a probe without control over the displacement direction.
pub fn smss_spread_average(
    lambda: f64,
    center: f64,
    half_width: f64,
    samples: usize,
    tail_tol: f64,
) -> Result<f64> {
    if samples == 0 {
        return Err(Error::InvalidParameter(
            "spread average needs at least one sample".into(),
        ));
    }
    let space = smss_space(lambda, tail_tol)?;
    let psi = smss_ket(r_from_lambda(lambda)?, 0.0, &space)?;
    let mut acc = 0.0;
    for k in 0..samples {
        let frac = (k as f64 + 0.5) / samples as f64;
        let angle = center - half_width + 2.0 * half_width * frac;
        acc += qfi_pure(&psi, &Generator::quadrature(angle, &space))?;
    }
    Ok(acc / samples as f64)
}
