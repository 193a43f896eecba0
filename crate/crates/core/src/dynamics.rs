//! Generic Schrodinger-picture time evolution: classic fourth-order
//! Runge-Kutta on d|psi>/dt = -i H(t) |psi| with per-evaluation hermiticity
//! audits and cumulative norm-drift accounting.
//!
//! This dense, structure-blind route is the reference propagator; hot paths
//! with known Hamiltonian structure implement their own stepping and are
//! cross-validated against this one.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{Operator, StateVector};

/// Knobs for [`evolve`]. `samples` counts recorded states including both
/// endpoints; `norm_budget` bounds the accumulated per-step |1 - norm|
/// before the run is declared unhealthy.
#[derive(Debug, Clone)]
pub struct EvolveOptions {
    pub samples: usize,
    pub norm_budget: f64,
    pub hermiticity_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            samples: 2,
            norm_budget: 1e-6,
            hermiticity_tol: 1e-10,
        }
    }
}

/// Recorded trajectory. States are stored normalized; `norm_drift` is the
/// sum of |1 - norm| over every step taken, a proxy for integrator error.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    pub norm_drift: f64,
}

impl Evolution {
    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("evolution records endpoints")
    }
}

/// Evolves `psi0` under `hamiltonian(t)` from t = 0 to `t_final` with step
/// size at most `dt_max` (the actual step divides `t_final` exactly).
///
/// Every Hamiltonian evaluation is checked for hermiticity; the state is
/// renormalized each step, with deviations charged against
/// `options.norm_budget`.
pub fn evolve<H>(
    hamiltonian: H,
    psi0: &StateVector,
    t_final: f64,
    dt_max: f64,
    options: &EvolveOptions,
) -> Result<Evolution>
where
    H: Fn(f64) -> Operator,
{
    if !(t_final >= 0.0) || !(dt_max > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "evolution needs t_final >= 0 and dt_max > 0, got {t_final}, {dt_max}"
        )));
    }
    let shape = psi0.shape().to_vec();
    let audit = |t: f64, op: &Operator| -> Result<()> {
        if op.shape() != shape.as_slice() {
            return Err(Error::ShapeMismatch {
                left: op.shape().to_vec(),
                right: shape.clone(),
            });
        }
        let defect = op.hermitian_defect();
        if defect > options.hermiticity_tol {
            return Err(Error::NonHermitianHamiltonian { t, defect });
        }
        Ok(())
    };

    if t_final == 0.0 {
        return Ok(Evolution {
            times: vec![0.0],
            states: vec![psi0.clone()],
            norm_drift: 0.0,
        });
    }

    let n_steps = (t_final / dt_max).ceil().max(1.0) as usize;
    let dt = t_final / n_steps as f64;
    let samples = options.samples.max(2).min(n_steps + 1);
    // step indices at which to record, always including 0 and n_steps
    let mut sample_steps: Vec<usize> = (0..samples).map(|k| k * n_steps / (samples - 1)).collect();
    sample_steps.dedup();

    let minus_i = C64::new(0.0, -1.0);
    let mut psi: DVector<C64> = psi0.amplitudes().clone();
    let mut times = Vec::with_capacity(sample_steps.len());
    let mut states = Vec::with_capacity(sample_steps.len());
    let mut drift = 0.0f64;
    let mut next_sample = 0usize;

    let record =
        |step: usize, psi: &DVector<C64>, times: &mut Vec<f64>, states: &mut Vec<StateVector>| {
            times.push(step as f64 * dt);
            states.push(
                StateVector::new(psi.clone(), shape.clone()).expect("normalized trajectory state"),
            );
        };
    record(0, &psi, &mut times, &mut states);
    next_sample += 1;

    // H(t_step + dt) is reused as the next step's H(t_step)
    let mut h_start = hamiltonian(0.0);
    audit(0.0, &h_start)?;
    for step in 0..n_steps {
        let t = step as f64 * dt;
        let h_mid = hamiltonian(t + 0.5 * dt);
        audit(t + 0.5 * dt, &h_mid)?;
        let h_end = hamiltonian(t + dt);
        audit(t + dt, &h_end)?;

        let k1 = h_start.apply_raw(&psi) * minus_i;
        let k2 = h_mid.apply_raw(&(&psi + &k1 * C64::new(0.5 * dt, 0.0))) * minus_i;
        let k3 = h_mid.apply_raw(&(&psi + &k2 * C64::new(0.5 * dt, 0.0))) * minus_i;
        let k4 = h_end.apply_raw(&(&psi + &k3 * C64::new(dt, 0.0))) * minus_i;
        psi +=
            (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);

        let norm = psi.norm();
        drift += (norm - 1.0).abs();
        if drift > options.norm_budget {
            return Err(Error::NormDrift {
                drift,
                budget: options.norm_budget,
            });
        }
        psi /= C64::new(norm, 0.0);

        if next_sample < sample_steps.len() && step + 1 == sample_steps[next_sample] {
            record(step + 1, &psi, &mut times, &mut states);
            next_sample += 1;
        }
        h_start = h_end;
    }

    Ok(Evolution {
        times,
        states,
        norm_drift: drift,
    })
}
