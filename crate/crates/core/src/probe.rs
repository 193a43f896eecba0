//! Displacement sensing with a number-dependent carrier pulse.
//!
//! A weak force displaces the motional state by some unknown alpha. A
//! carrier pulse whose Rabi frequency picks up a second-order Lamb-Dicke
//! correction, H_c = (Omega/2)[1 - eta^2 (a†a + 1/2)] sigma_x, then rotates
//! the qubit by an angle that depends on the phonon number. Choosing the
//! pulse time tau so that Omega eta^2 tau / 2 = pi/2 makes consecutive
//! number states contribute with alternating sign, so the inversion
//! <sigma_z> measured afterwards is proportional to the Wigner function of
//! the displaced state at the origin. Scanning nothing at all and just
//! watching the inversion drop therefore detects the force, regardless of
//! its direction, because the states this probe targets have circularly
//! symmetric Wigner functions.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{self, DensityMatrix, FockSpace, Operator};
use crate::stats;

/// Default detection threshold: a displacement counts as detected when the
/// inversion magnitude falls below half its zero-displacement value.
pub const DEFAULT_DETECTION_THRESHOLD: f64 = 0.5;

/// Readout contrast below which the probe is effectively blind and
/// parameter validation logs a warning.
pub const CONTRAST_WARN_FLOOR: f64 = 1e-2;

/// Carrier pulse parameters. The pulse time is not free: it is fixed by the
/// pi/2 condition on the number-dependent part of the Rabi frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeParams {
    /// Lamb-Dicke parameter of the probed mode.
    pub eta_x: f64,
    /// Carrier Rabi frequency.
    pub omega: f64,
}

impl Default for ProbeParams {
    fn default() -> Self {
        // eta = 0.1 is a blind spot: the contrast cos(2 Phi) = sin(pi/eta^2)
        // vanishes whenever 1/eta^2 is an integer. 0.11 sits near a maximum.
        Self {
            eta_x: 0.11,
            omega: 0.05,
        }
    }
}

impl ProbeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta_x > 0.0 && self.eta_x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "probe Lamb-Dicke parameter must be positive, got {}",
                self.eta_x
            )));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "carrier Rabi frequency must be positive, got {}",
                self.omega
            )));
        }
        if self.contrast().abs() < CONTRAST_WARN_FLOOR {
            log::warn!(
                "probe contrast cos(2 Phi) = {:.3e} is nearly zero at eta_x = {}; \
                 the inversion signal will be unusably small",
                self.contrast(),
                self.eta_x
            );
        }
        Ok(())
    }

    /// Pulse time fixed by Omega eta^2 tau / 2 = pi/2.
    pub fn tau(&self) -> f64 {
        std::f64::consts::PI / (self.omega * self.eta_x * self.eta_x)
    }

    /// Rotation angle of the number-independent part, Phi = Omega tau/2 - pi/4.
    pub fn phi(&self) -> f64 {
        0.5 * self.omega * self.tau() - std::f64::consts::FRAC_PI_4
    }

    /// Readout contrast cos(2 Phi) = sin(pi / eta^2): the inversion measured
    /// on the vacuum, and the scale factor between inversion and Wigner
    /// value everywhere else.
    pub fn contrast(&self) -> f64 {
        (2.0 * self.phi()).cos()
    }
}

/// One probe evaluation: the displacement that was applied, the inversion
/// the carrier readout produced, and the displaced-parity Wigner value of
/// the input state at the same point for reference.
#[derive(Clone, Copy, Debug)]
pub struct ProbeResult {
    pub alpha: C64,
    pub p_eg: f64,
    pub wigner_ref: f64,
}

/// Carrier pulse propagator on qubit (x) mode, qubit factor first with
/// basis order |g>, |e>.
///
/// With `exact` the number-conditioned form is built directly: each Fock
/// level n gets the qubit rotation exp(-i (Phi - pi n/2) sigma_x). Without
/// it the propagator is exponentiated from the stated Hamiltonian through
/// its spectral decomposition. The two agree to roundoff; keeping both
/// routes makes that checkable instead of assumed.
pub fn carrier_unitary(params: &ProbeParams, space: &FockSpace, exact: bool) -> Result<Operator> {
    params.validate()?;
    let d = space.dim();
    let phi = params.phi();
    if exact {
        let mut m = DMatrix::<C64>::zeros(2 * d, 2 * d);
        for n in 0..d {
            let theta = phi - std::f64::consts::FRAC_PI_2 * n as f64;
            let (cos, sin) = (theta.cos(), theta.sin());
            m[(n, n)] = C64::new(cos, 0.0);
            m[(d + n, d + n)] = C64::new(cos, 0.0);
            m[(n, d + n)] = C64::new(0.0, -sin);
            m[(d + n, n)] = C64::new(0.0, -sin);
        }
        return Operator::new(m, vec![2, d]);
    }
    let sigma_x = Operator::new(
        DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::default(),
                C64::new(1.0, 0.0),
                C64::new(1.0, 0.0),
                C64::default(),
            ],
        ),
        vec![2],
    )?;
    let num = fock::number(space);
    let mut rabi = DMatrix::<C64>::zeros(d, d);
    for n in 0..d {
        let f = 0.5
            * params.omega
            * (1.0 - params.eta_x * params.eta_x * (num.matrix()[(n, n)].re + 0.5));
        rabi[(n, n)] = C64::new(f, 0.0);
    }
    let h = fock::tensor(&[&sigma_x, &Operator::new(rabi, vec![d])?])?;
    let u = crate::linalg::unitary_from_hermitian(h.matrix(), params.tau());
    Operator::new(u, vec![2, d])
}

/// Inversion observable pulled back through the pulse: the mode-space
/// operator M with <sigma_z>_after = Tr[rho M] when the qubit starts in
/// |e>. M = U_ee† U_ee - U_ge† U_ge from the qubit blocks of U.
fn inversion_observable(u: &Operator) -> Result<DMatrix<C64>> {
    let shape = u.shape();
    if shape.len() != 2 || shape[0] != 2 {
        return Err(Error::BadFactor {
            index: 0,
            shape: shape.to_vec(),
        });
    }
    let d = shape[1];
    let m = u.matrix();
    let u_ee = m.view((d, d), (d, d));
    let u_ge = m.view((0, d), (d, d));
    Ok(u_ee.adjoint() * u_ee - u_ge.adjoint() * u_ge)
}

/// Embeds a single-mode state at the bottom of a space with enough headroom
/// that displacing by `alpha` keeps all populated columns of D inside the
/// unitarity-protected interior band.
fn embed_with_headroom(rho_v: &DensityMatrix, alpha: C64) -> Result<(DensityMatrix, FockSpace)> {
    let d = rho_v.dim();
    if alpha.norm_sqr() == 0.0 {
        return Ok((rho_v.clone(), FockSpace::with_cutoff(d - 1)));
    }
    let mut d_big = d + fock::displacement_band(alpha, d);
    d_big = d + fock::displacement_band(alpha, d_big);
    let mut m = DMatrix::<C64>::zeros(d_big, d_big);
    m.view_mut((0, 0), (d, d)).copy_from(rho_v.matrix());
    Ok((
        DensityMatrix::new(m, vec![d_big])?,
        FockSpace::with_cutoff(d_big - 1),
    ))
}

fn probe_with(
    rho_v: &DensityMatrix,
    alpha: C64,
    params: &ProbeParams,
    exact: bool,
) -> Result<ProbeResult> {
    if rho_v.shape().len() != 1 {
        return Err(Error::ShapeMismatch {
            left: rho_v.shape().to_vec(),
            right: vec![rho_v.dim()],
        });
    }
    let (rho_big, space) = embed_with_headroom(rho_v, alpha)?;
    let displaced = if alpha.norm_sqr() == 0.0 {
        rho_big.clone()
    } else {
        fock::displacement(alpha, &space).sandwich(&rho_big)?
    };
    let u = carrier_unitary(params, &space, exact)?;
    let observable = inversion_observable(&u)?;
    let d = space.dim();
    let mut acc = C64::default();
    for i in 0..d {
        for j in 0..d {
            acc += displaced.matrix()[(i, j)] * observable[(j, i)];
        }
    }
    let wigner_ref = stats::wigner_parity(&rho_big, alpha)?;
    Ok(ProbeResult {
        alpha,
        p_eg: acc.re,
        wigner_ref,
    })
}

/// Runs the full protocol on a single-mode state: displace by `alpha`,
/// start the qubit in |e>, apply the carrier pulse, read out <sigma_z>.
/// `wigner_ref` in the result is the displaced-parity Wigner value of the
/// undisplaced input at the same point, for comparison against the
/// inversion; the proportionality between the two is a measured outcome
/// here, never an input.
pub fn probe(rho_v: &DensityMatrix, alpha: C64, params: &ProbeParams) -> Result<ProbeResult> {
    probe_with(rho_v, alpha, params, true)
}

/// Same protocol with shot noise: the qubit is measured `shots` times and
/// the inversion estimated from the counts. Deterministic in `seed`.
pub fn probe_sampled(
    rho_v: &DensityMatrix,
    alpha: C64,
    params: &ProbeParams,
    shots: u64,
    seed: u64,
) -> Result<ProbeResult> {
    if shots == 0 {
        return Err(Error::InvalidParameter(
            "sampled probe needs at least one shot".into(),
        ));
    }
    let ideal = probe(rho_v, alpha, params)?;
    let p_excited = (0.5 * (1.0 + ideal.p_eg)).clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut excited = 0u64;
    for _ in 0..shots {
        if rng.gen::<f64>() < p_excited {
            excited += 1;
        }
    }
    Ok(ProbeResult {
        p_eg: 2.0 * excited as f64 / shots as f64 - 1.0,
        ..ideal
    })
}

/// Outcome of a threshold test for "did a force act".
#[derive(Clone, Copy, Debug)]
pub struct Detection {
    pub detected: bool,
    /// How far below the threshold the signal fell (positive means detected).
    pub margin: f64,
    pub inversion_at_zero: f64,
    pub inversion_at_alpha: f64,
}

/// Decides whether a displacement acted on the state: detected when the
/// inversion magnitude at `alpha_true` drops below `threshold` times its
/// zero-displacement magnitude. For circularly symmetric states the
/// decision depends only on |alpha_true|.
pub fn detect_displacement(
    rho_v: &DensityMatrix,
    alpha_true: C64,
    threshold: f64,
    params: &ProbeParams,
) -> Result<Detection> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "detection threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let zero = probe(rho_v, C64::default(), params)?.p_eg;
    let displaced = probe(rho_v, alpha_true, params)?.p_eg;
    let margin = threshold * zero.abs() - displaced.abs();
    Ok(Detection {
        detected: margin > 0.0,
        margin,
        inversion_at_zero: zero,
        inversion_at_alpha: displaced,
    })
}

/// Least-squares affine fit of inversion against reference Wigner value
/// over a set of probe results. The protocol promises a single scalar
/// relating the two; this reports that scalar and how well it holds.
#[derive(Clone, Copy, Debug)]
pub struct AffineFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

pub fn fit_inversion(points: &[ProbeResult]) -> Result<AffineFit> {
    if points.len() < 2 {
        return Err(Error::InvalidParameter(
            "inversion fit needs at least two probe points".into(),
        ));
    }
    let n = points.len() as f64;
    let mean_w = points.iter().map(|p| p.wigner_ref).sum::<f64>() / n;
    let mean_p = points.iter().map(|p| p.p_eg).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for p in points {
        cov += (p.wigner_ref - mean_w) * (p.p_eg - mean_p);
        var += (p.wigner_ref - mean_w) * (p.wigner_ref - mean_w);
    }
    if var == 0.0 {
        return Err(Error::InvalidParameter(
            "inversion fit is degenerate: all reference Wigner values coincide".into(),
        ));
    }
    let slope = cov / var;
    let intercept = mean_p - slope * mean_w;
    let max_residual = points
        .iter()
        .map(|p| (p.p_eg - slope * p.wigner_ref - intercept).abs())
        .fold(0.0, f64::max);
    Ok(AffineFit {
        slope,
        intercept,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{self, StateFamily};
    use crate::stats::PhasePoint;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn even_state(r: f64) -> DensityMatrix {
        let lambda = r.tanh().powi(2);
        let space = FockSpace::for_lambda(lambda, 1e-10).unwrap();
        states::rho_even(lambda, &space).unwrap()
    }

    fn odd_state(r: f64) -> DensityMatrix {
        let lambda = r.tanh().powi(2);
        let space = FockSpace::for_lambda(lambda, 1e-10).unwrap();
        states::rho_odd(lambda, &space).unwrap()
    }

    #[test]
    fn pulse_time_satisfies_the_pi_half_condition() {
        let p = ProbeParams::default();
        p.validate().unwrap();
        assert_abs_diff_eq!(
            0.5 * p.omega * p.eta_x * p.eta_x * p.tau(),
            std::f64::consts::FRAC_PI_2,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            p.phi(),
            0.5 * p.omega * p.tau() - std::f64::consts::FRAC_PI_4,
            epsilon = 1e-12
        );
        // contrast depends on eta alone (Omega cancels out of Phi)
        let faster = ProbeParams { omega: 0.4, ..p };
        assert_abs_diff_eq!(p.contrast(), faster.contrast(), epsilon = 1e-9);
        assert!(p.contrast() > 0.89 && p.contrast() < 0.91);
        // 1/eta^2 integer kills the signal entirely
        let blind = ProbeParams { eta_x: 0.1, ..p };
        assert!(blind.contrast().abs() < 1e-9);
        assert!(ProbeParams { eta_x: -0.1, ..p }.validate().is_err());
        assert!(ProbeParams { omega: 0.0, ..p }.validate().is_err());
    }

    #[test]
    fn carrier_variants_agree_and_are_unitary() {
        let params = ProbeParams::default();
        let space = FockSpace::with_cutoff(24);
        for exact in [true, false] {
            let u = carrier_unitary(&params, &space, exact).unwrap();
            let defect = (u.matrix().adjoint() * u.matrix()
                - DMatrix::<C64>::identity(2 * space.dim(), 2 * space.dim()))
            .map(|z| z.norm())
            .max();
            assert!(defect < 1e-10, "exact = {exact}: defect {defect:.3e}");
        }
        let rho = even_state(0.8);
        let alpha = C64::new(0.7, -0.3);
        let direct = probe_with(&rho, alpha, &params, true).unwrap();
        let exponentiated = probe_with(&rho, alpha, &params, false).unwrap();
        assert_abs_diff_eq!(direct.p_eg, exponentiated.p_eg, epsilon = 1e-10);
    }

    #[test]
    fn vacuum_probe_reads_the_contrast() {
        let params = ProbeParams::default();
        let space = FockSpace::with_cutoff(6);
        let vacuum = states::thermal_rho(0.0, &space).unwrap();
        let result = probe(&vacuum, C64::default(), &params).unwrap();
        assert_abs_diff_eq!(result.p_eg, params.contrast(), epsilon = 1e-12);
        assert_abs_diff_eq!(
            result.wigner_ref,
            2.0 / std::f64::consts::PI,
            epsilon = 1e-12
        );
    }

    #[test]
    fn integer_phase_reduces_to_a_bare_parity_readout() {
        // Phi = pi/(2 eta^2) - pi/4 = 10 pi at eta = 1/sqrt(20.5), so the
        // pulse reads out parity with unit contrast and the inversion must
        // match the closed Wigner form times pi/2.
        let params = ProbeParams {
            eta_x: (1.0 / 20.5f64).sqrt(),
            omega: 0.05,
        };
        assert_abs_diff_eq!(params.contrast(), 1.0, epsilon = 1e-9);
        let lambda = 0.8f64.tanh().powi(2);
        let rho = even_state(0.8);
        let alpha = C64::new(0.4, 0.0);
        let got = probe(&rho, alpha, &params).unwrap();
        let closed =
            stats::wigner_closed(StateFamily::Even, lambda, PhasePoint::from_alpha(alpha)).unwrap();
        assert_abs_diff_eq!(
            got.p_eg,
            std::f64::consts::FRAC_PI_2 * closed,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(got.wigner_ref, closed, epsilon = 1e-10);
    }

    #[test]
    fn inversion_tracks_the_closed_wigner_form() {
        let params = ProbeParams::default();
        let expected_slope = std::f64::consts::FRAC_PI_2 * params.contrast();
        for (rho, family) in [
            (even_state(0.8), StateFamily::Even),
            (odd_state(0.8), StateFamily::Odd),
        ] {
            let lambda = 0.8f64.tanh().powi(2);
            let points: Vec<ProbeResult> = (0..20)
                .map(|k| {
                    let alpha = C64::new(1.6 * k as f64 / 19.0, 0.0);
                    probe(&rho, alpha, &params).unwrap()
                })
                .collect();
            let fit = fit_inversion(&points).unwrap();
            assert!(
                fit.max_residual <= 1e-8,
                "{family:?}: residual {:.3e}",
                fit.max_residual
            );
            assert!(
                fit.intercept.abs() <= 1e-9,
                "{family:?}: intercept {:.3e}",
                fit.intercept
            );
            assert_abs_diff_eq!(fit.slope, expected_slope, epsilon = 1e-8);
            // the reference itself must match the closed form, so the fit
            // ties the carrier readout all the way back to it
            for p in &points {
                let closed =
                    stats::wigner_closed(family, lambda, PhasePoint::from_alpha(p.alpha)).unwrap();
                assert_abs_diff_eq!(p.wigner_ref, closed, epsilon = 1e-9);
                if closed.abs() > 1e-6 {
                    assert!((p.p_eg / closed - fit.slope).abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn even_inversion_at_origin_is_squeezing_independent() {
        let params = ProbeParams::default();
        let baseline = probe(&even_state(0.5), C64::default(), &params)
            .unwrap()
            .p_eg;
        for r in [1.0, 1.5] {
            let p = probe(&even_state(r), C64::default(), &params).unwrap().p_eg;
            assert_abs_diff_eq!(p, baseline, epsilon = 1e-8);
        }
    }

    #[test]
    fn origin_is_extremal_for_both_superpositions() {
        let params = ProbeParams::default();
        let even = even_state(1.0);
        let odd = odd_state(1.0);
        let scan: Vec<f64> = (0..12).map(|k| 1.8 * k as f64 / 11.0).collect();
        let even_pts: Vec<f64> = scan
            .iter()
            .map(|&s| probe(&even, C64::new(s, 0.0), &params).unwrap().p_eg)
            .collect();
        let odd_pts: Vec<f64> = scan
            .iter()
            .map(|&s| probe(&odd, C64::new(s, 0.0), &params).unwrap().p_eg)
            .collect();
        for k in 1..scan.len() {
            assert!(even_pts[0] > even_pts[k]);
            assert!(odd_pts[0] < odd_pts[k]);
        }
        assert!(even_pts.iter().all(|p| p.abs() <= 1.0 + 1e-12));
    }

    #[test]
    fn detection_flags_forces_beyond_the_central_peak() {
        let params = ProbeParams::default();
        let rho = even_state(1.5);
        let quiet = detect_displacement(&rho, C64::default(), 0.5, &params).unwrap();
        assert!(!quiet.detected);
        let pushed = detect_displacement(&rho, C64::new(1.5, 0.0), 0.5, &params).unwrap();
        assert!(pushed.detected);
        assert!(pushed.margin > 0.0);
        // decision and margin are blind to the force direction
        for k in 1..8 {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / 8.0;
            let turned =
                detect_displacement(&rho, C64::from_polar(1.5, angle), 0.5, &params).unwrap();
            assert_eq!(turned.detected, pushed.detected);
            assert_abs_diff_eq!(turned.margin, pushed.margin, epsilon = 1e-8);
        }
        assert!(detect_displacement(&rho, C64::default(), 0.0, &params).is_err());
        assert!(detect_displacement(&rho, C64::default(), 1.0, &params).is_err());
    }

    #[test]
    fn sampling_reproduces_the_ideal_signal_and_its_seed() {
        let params = ProbeParams::default();
        let rho = even_state(0.5);
        let ideal = probe(&rho, C64::default(), &params).unwrap();
        let sampled = probe_sampled(&rho, C64::default(), &params, 200_000, 7).unwrap();
        // 4 sigma of the binomial estimator
        let sigma = (1.0 - ideal.p_eg * ideal.p_eg).max(0.0).sqrt() / (200_000f64).sqrt();
        assert!((sampled.p_eg - ideal.p_eg).abs() < 4.0 * sigma + 1e-9);
        let again = probe_sampled(&rho, C64::default(), &params, 200_000, 7).unwrap();
        assert_eq!(sampled.p_eg, again.p_eg);
        assert!(probe_sampled(&rho, C64::default(), &params, 0, 7).is_err());
    }

    #[test]
    fn probe_rejects_multi_mode_input() {
        let space = FockSpace::with_cutoff(40);
        let pair =
            states::tmss_ket(&states::SqueezeParams::new(0.3, 0.0, 0.0).unwrap(), &space).unwrap();
        let rho = DensityMatrix::from_pure(&pair);
        assert!(probe(&rho, C64::default(), &ProbeParams::default()).is_err());
        assert!(fit_inversion(&[]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn inversion_is_phase_blind(
            r in 0.2f64..1.0,
            radius in 0.0f64..1.5,
            angle in 0.0f64..std::f64::consts::TAU,
        ) {
            let params = ProbeParams::default();
            let rho = odd_state(r);
            let on_axis = probe(&rho, C64::new(radius, 0.0), &params).unwrap().p_eg;
            let turned = probe(&rho, C64::from_polar(radius, angle), &params).unwrap().p_eg;
            prop_assert!((on_axis - turned).abs() < 1e-10);
        }
    }
}
