//! Trapped-ion generation of two-mode squeezed superpositions: the full
//! two-colour interaction-picture Hamiltonian, the effective pair-creation
//! Hamiltonian it approximates, lockstep comparison trajectories, and qubit
//! projection of the evolved state.
//!
//! The comparison run needs ~5e5 RK4 steps on a qubit x mode x mode space,
//! so the hot path avoids building the Hamiltonian as a dense matrix.
//! Each mode displacement factors as D(i eta e^{i w t}) = P(t) D(eta) P(t)*
//! with P(t) = diag((i e^{i w t})^n) and D(eta) real, so a step costs a few
//! real matrix products against cached D(eta) blocks plus diagonal phase
//! scalings.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{self, displacement, qubit, tensor, FockSpace, Operator, StateVector};

/// Which of the two drive tones at detuning +/-(omega_x + omega_y) are on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tones {
    Both,
    PlusOnly,
    MinusOnly,
}

impl Tones {
    fn detunings(self, sum: f64) -> Vec<f64> {
        match self {
            Tones::Both => vec![sum, -sum],
            Tones::PlusOnly => vec![sum],
            Tones::MinusOnly => vec![-sum],
        }
    }
}

/// Measurement outcome on the electronic qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QubitOutcome {
    G,
    E,
}

/// Drive and trap parameters, in units of the x mode frequency.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IonParams {
    pub omega_x: f64,
    pub omega_y: f64,
    /// Carrier coupling strength.
    pub omega: f64,
    pub eta_x: f64,
    pub eta_y: f64,
    pub tones: Tones,
}

impl Default for IonParams {
    fn default() -> Self {
        Self {
            omega_x: 1.0,
            omega_y: 1.2,
            omega: 0.05,
            eta_x: 0.1,
            eta_y: 0.1,
            tones: Tones::Both,
        }
    }
}

impl IonParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.omega_x, self.omega_y, self.omega];
        if positive.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidParameter(
                "mode frequencies and coupling strength must be positive".into(),
            ));
        }
        // eta = 0 is allowed as the carrier-only degenerate limit
        if ![self.eta_x, self.eta_y]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
        {
            return Err(Error::InvalidParameter(
                "Lamb-Dicke parameters must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// Effective pair-creation rate chi = eta_x eta_y Omega / 2.
    pub fn chi(&self) -> f64 {
        0.5 * self.eta_x * self.eta_y * self.omega
    }

    /// Integration step that resolves the fastest drive phase.
    pub fn default_dt(&self) -> f64 {
        0.01 / self.omega_x.max(self.omega_y)
    }
}

/// Full two-colour Hamiltonian at time t as a dense operator on
/// qubit x mode x mode, built directly from displacement matrices. This is
/// the reference route; the structured engine below must match it.
pub fn h_full(t: f64, p: &IonParams, space_a: &FockSpace, space_b: &FockSpace) -> Result<Operator> {
    p.validate()?;
    let alpha_a = C64::from_polar(p.eta_x, std::f64::consts::FRAC_PI_2 + p.omega_x * t);
    let alpha_b = C64::from_polar(p.eta_y, std::f64::consts::FRAC_PI_2 + p.omega_y * t);
    let d_a = displacement(alpha_a, space_a);
    let d_b = displacement(alpha_b, space_b);
    let raising = tensor(&[&qubit::sigma_plus(), &d_a, &d_b])?;
    let mut h = Operator::zeros(raising.shape());
    for delta in p.tones.detunings(p.omega_x + p.omega_y) {
        let term = raising.scale(C64::from_polar(0.5 * p.omega, -delta * t));
        h = &h + &(&term + &term.dagger());
    }
    Ok(h)
}

/// Effective Hamiltonian -chi sigma_x (ab + a'b') obtained from the
/// two-colour drive after averaging over the fast phases.
pub fn h_eff(p: &IonParams, space_a: &FockSpace, space_b: &FockSpace) -> Result<Operator> {
    p.validate()?;
    if p.tones != Tones::Both {
        return Err(Error::InvalidParameter(
            "the effective pair-creation form requires both drive tones".into(),
        ));
    }
    let a = fock::destroy(space_a);
    let b = fock::destroy(space_b);
    let pair = &tensor(&[&qubit::sigma_x(), &a, &b])?
        + &tensor(&[&qubit::sigma_x(), &a.dagger(), &b.dagger()])?;
    Ok(pair.scale(C64::new(-p.chi(), 0.0)))
}

/// Qubit-conditioned state blocks in split real storage. Each block is a
/// (db x 2 da) real matrix [Re | Im] of the mode amplitudes Psi[j, i] with
/// i the first-mode and j the second-mode occupation.
#[derive(Debug, Clone)]
struct FastQb {
    g: DMatrix<f64>,
    e: DMatrix<f64>,
    da: usize,
    db: usize,
}

impl FastQb {
    fn zeros(da: usize, db: usize) -> Self {
        Self {
            g: DMatrix::zeros(db, 2 * da),
            e: DMatrix::zeros(db, 2 * da),
            da,
            db,
        }
    }

    fn ground_vacuum(da: usize, db: usize) -> Self {
        let mut q = Self::zeros(da, db);
        q.g[(0, 0)] = 1.0;
        q
    }

    fn to_state(&self) -> Result<StateVector> {
        let (da, db) = (self.da, self.db);
        let mut amps = nalgebra::DVector::zeros(2 * da * db);
        for (qi, block) in [&self.g, &self.e].into_iter().enumerate() {
            for i in 0..da {
                for j in 0..db {
                    amps[qi * da * db + i * db + j] = C64::new(block[(j, i)], block[(j, da + i)]);
                }
            }
        }
        StateVector::new(amps, vec![2, da, db])
    }

    fn copy_from(&mut self, other: &Self) {
        self.g.copy_from(&other.g);
        self.e.copy_from(&other.e);
    }

    fn axpy(&mut self, alpha: f64, x: &Self) {
        self.g.zip_apply(&x.g, |a, b| *a += alpha * b);
        self.e.zip_apply(&x.e, |a, b| *a += alpha * b);
    }

    fn scale_mut(&mut self, s: f64) {
        self.g *= s;
        self.e *= s;
    }

    fn norm_squared(&self) -> f64 {
        self.g.norm_squared() + self.e.norm_squared()
    }

    /// <self|other> over both qubit blocks.
    fn overlap(&self, other: &Self) -> C64 {
        let (da, db) = (self.da, self.db);
        let mut re = 0.0;
        let mut im = 0.0;
        for (a, b) in [(&self.g, &other.g), (&self.e, &other.e)] {
            for i in 0..da {
                for j in 0..db {
                    let (ar, ai) = (a[(j, i)], a[(j, da + i)]);
                    let (br, bi) = (b[(j, i)], b[(j, da + i)]);
                    re += ar * br + ai * bi;
                    im += ar * bi - ai * br;
                }
            }
        }
        C64::new(re, im)
    }

    fn mean_phonons(&self) -> f64 {
        self.weighted_population(|i, j| (i + j) as f64)
    }

    fn mode_means(&self) -> (f64, f64) {
        (
            self.weighted_population(|i, _| i as f64),
            self.weighted_population(|_, j| j as f64),
        )
    }

    /// Total population on the highest level of either mode.
    fn top_population(&self) -> f64 {
        self.weighted_population(|i, j| {
            if i == self.da - 1 || j == self.db - 1 {
                1.0
            } else {
                0.0
            }
        })
    }

    fn weighted_population(&self, weight: impl Fn(usize, usize) -> f64) -> f64 {
        let (da, db) = (self.da, self.db);
        let mut acc = 0.0;
        for block in [&self.g, &self.e] {
            for i in 0..da {
                for j in 0..db {
                    let p = block[(j, i)] * block[(j, i)] + block[(j, da + i)] * block[(j, da + i)];
                    acc += weight(i, j) * p;
                }
            }
        }
        acc
    }
}

/// Scratch for one classical RK4 step.
struct Rk4Ws {
    k1: FastQb,
    k2: FastQb,
    k3: FastQb,
    k4: FastQb,
    tmp: FastQb,
}

impl Rk4Ws {
    fn new(da: usize, db: usize) -> Self {
        Self {
            k1: FastQb::zeros(da, db),
            k2: FastQb::zeros(da, db),
            k3: FastQb::zeros(da, db),
            k4: FastQb::zeros(da, db),
            tmp: FastQb::zeros(da, db),
        }
    }
}

fn rk4_step(
    rhs: &mut impl FnMut(f64, &FastQb, &mut FastQb),
    t: f64,
    dt: f64,
    y: &mut FastQb,
    ws: &mut Rk4Ws,
) {
    rhs(t, y, &mut ws.k1);
    ws.tmp.copy_from(y);
    ws.tmp.axpy(0.5 * dt, &ws.k1);
    rhs(t + 0.5 * dt, &ws.tmp, &mut ws.k2);
    ws.tmp.copy_from(y);
    ws.tmp.axpy(0.5 * dt, &ws.k2);
    rhs(t + 0.5 * dt, &ws.tmp, &mut ws.k3);
    ws.tmp.copy_from(y);
    ws.tmp.axpy(dt, &ws.k3);
    rhs(t + dt, &ws.tmp, &mut ws.k4);
    y.axpy(dt / 6.0, &ws.k1);
    y.axpy(dt / 3.0, &ws.k2);
    y.axpy(dt / 3.0, &ws.k3);
    y.axpy(dt / 6.0, &ws.k4);
}

/// Renormalizes in place and returns the drift |norm - 1| that was removed.
fn renormalize(y: &mut FastQb) -> f64 {
    let norm = y.norm_squared().sqrt();
    y.scale_mut(1.0 / norm);
    (norm - 1.0).abs()
}

/// Structured evaluator for -i H_full(t) psi.
struct FullEngine {
    omega: f64,
    omega_x: f64,
    omega_y: f64,
    sum: f64,
    tones: Tones,
    ga: DMatrix<f64>,
    gat: DMatrix<f64>,
    gb: DMatrix<f64>,
    gbt: DMatrix<f64>,
    da: usize,
    db: usize,
    phi_a: Vec<C64>,
    phi_b: Vec<C64>,
    // joint phase table P[j, i] = phi_b[j] phi_a[i], split storage
    pr: DMatrix<f64>,
    pi: DMatrix<f64>,
    y: DMatrix<f64>,
    z: DMatrix<f64>,
    w: DMatrix<f64>,
}

/// Real displacement matrix D(eta) for a nonnegative amplitude.
fn real_displacement(eta: f64, space: &FockSpace) -> DMatrix<f64> {
    displacement(C64::new(eta, 0.0), space)
        .matrix()
        .map(|z| z.re)
}

impl FullEngine {
    fn new(p: &IonParams, space_a: &FockSpace, space_b: &FockSpace) -> Result<Self> {
        p.validate()?;
        let ga = real_displacement(p.eta_x, space_a);
        let gb = real_displacement(p.eta_y, space_b);
        let (da, db) = (space_a.dim(), space_b.dim());
        Ok(Self {
            omega: p.omega,
            omega_x: p.omega_x,
            omega_y: p.omega_y,
            sum: p.omega_x + p.omega_y,
            tones: p.tones,
            gat: ga.transpose(),
            ga,
            gbt: gb.transpose(),
            gb,
            da,
            db,
            phi_a: vec![C64::new(1.0, 0.0); da],
            phi_b: vec![C64::new(1.0, 0.0); db],
            pr: DMatrix::zeros(db, da),
            pi: DMatrix::zeros(db, da),
            y: DMatrix::zeros(db, 2 * da),
            z: DMatrix::zeros(db, 2 * da),
            w: DMatrix::zeros(db, 2 * da),
        })
    }

    /// Drive amplitude c(t) multiplying M sigma+ in H(t).
    fn drive(&self, t: f64) -> C64 {
        match self.tones {
            Tones::Both => C64::new(self.omega * (self.sum * t).cos(), 0.0),
            Tones::PlusOnly => C64::from_polar(0.5 * self.omega, -self.sum * t),
            Tones::MinusOnly => C64::from_polar(0.5 * self.omega, self.sum * t),
        }
    }

    fn set_time(&mut self, t: f64) {
        fill_mode_phases(self.omega_x, t, &mut self.phi_a);
        fill_mode_phases(self.omega_y, t, &mut self.phi_b);
        for i in 0..self.da {
            let ca = self.phi_a[i];
            for j in 0..self.db {
                let p = self.phi_b[j] * ca;
                self.pr[(j, i)] = p.re;
                self.pi[(j, i)] = p.im;
            }
        }
    }

    /// out = scale * D_b(t) X D_a(t)^T with D = P G P* in each mode.
    fn apply_displaced(
        &mut self,
        x: &DMatrix<f64>,
        out: &mut DMatrix<f64>,
        scale: C64,
        dagger: bool,
    ) {
        let (da, db) = (self.da, self.db);
        sandwich_conj(x, &self.pr, &self.pi, da, db, &mut self.y);
        let (left, right) = if dagger {
            (&self.gbt, &self.ga)
        } else {
            (&self.gb, &self.gat)
        };
        self.z.gemm(1.0, left, &self.y, 0.0);
        self.w
            .columns_mut(0, da)
            .gemm(1.0, &self.z.columns(0, da), right, 0.0);
        self.w
            .columns_mut(da, da)
            .gemm(1.0, &self.z.columns(da, da), right, 0.0);
        sandwich_scaled(&self.w, &self.pr, &self.pi, scale, da, db, out);
    }

    /// out = -i H(t) x.
    fn rhs(&mut self, t: f64, x: &FastQb, out: &mut FastQb) {
        self.set_time(t);
        let c = self.drive(t);
        let neg_i = C64::new(0.0, -1.0);
        self.apply_displaced(&x.g, &mut out.e, neg_i * c, false);
        self.apply_displaced(&x.e, &mut out.g, neg_i * c.conj(), true);
    }
}

fn fill_mode_phases(omega: f64, t: f64, out: &mut [C64]) {
    let step = C64::new(0.0, 1.0) * C64::from_polar(1.0, omega * t);
    let mut cur = C64::new(1.0, 0.0);
    for slot in out.iter_mut() {
        *slot = cur;
        cur *= step;
    }
}

/// y = conj(P) .* x elementwise on split storage.
fn sandwich_conj(
    x: &DMatrix<f64>,
    pr: &DMatrix<f64>,
    pi: &DMatrix<f64>,
    da: usize,
    db: usize,
    y: &mut DMatrix<f64>,
) {
    let xs = x.as_slice();
    let prs = pr.as_slice();
    let pis = pi.as_slice();
    let ys = y.as_mut_slice();
    for i in 0..da {
        let re0 = i * db;
        let im0 = (da + i) * db;
        let p0 = i * db;
        for j in 0..db {
            let (xr, xi) = (xs[re0 + j], xs[im0 + j]);
            let (a, b) = (prs[p0 + j], pis[p0 + j]);
            ys[re0 + j] = xr * a + xi * b;
            ys[im0 + j] = xi * a - xr * b;
        }
    }
}

/// out = scale * P .* w elementwise on split storage.
fn sandwich_scaled(
    w: &DMatrix<f64>,
    pr: &DMatrix<f64>,
    pi: &DMatrix<f64>,
    scale: C64,
    da: usize,
    db: usize,
    out: &mut DMatrix<f64>,
) {
    let ws = w.as_slice();
    let prs = pr.as_slice();
    let pis = pi.as_slice();
    let os = out.as_mut_slice();
    for i in 0..da {
        let re0 = i * db;
        let im0 = (da + i) * db;
        let p0 = i * db;
        for j in 0..db {
            let (wr, wi) = (ws[re0 + j], ws[im0 + j]);
            let (a, b) = (prs[p0 + j], pis[p0 + j]);
            let tr = wr * a - wi * b;
            let ti = wr * b + wi * a;
            os[re0 + j] = scale.re * tr - scale.im * ti;
            os[im0 + j] = scale.re * ti + scale.im * tr;
        }
    }
}

/// Structured evaluator for -i H_eff psi with H_eff = -chi sigma_x (ab + a'b').
struct EffEngine {
    chi: f64,
    da: usize,
    db: usize,
    /// sq[(j, i)] = sqrt((i+1)(j+1))
    sq: DMatrix<f64>,
}

impl EffEngine {
    fn new(chi: f64, da: usize, db: usize) -> Self {
        let sq = DMatrix::from_fn(db, da, |j, i| (((i + 1) * (j + 1)) as f64).sqrt());
        Self { chi, da, db, sq }
    }

    /// dst = i chi (ab + a'b') src on one qubit block, split storage.
    fn apply_pair(&self, src: &DMatrix<f64>, dst: &mut DMatrix<f64>) {
        let (da, db, chi) = (self.da, self.db, self.chi);
        for i in 0..da {
            for j in 0..db {
                let mut kr = 0.0;
                let mut ki = 0.0;
                if i + 1 < da && j + 1 < db {
                    let c = self.sq[(j, i)];
                    kr += c * src[(j + 1, i + 1)];
                    ki += c * src[(j + 1, da + i + 1)];
                }
                if i > 0 && j > 0 {
                    let c = self.sq[(j - 1, i - 1)];
                    kr += c * src[(j - 1, i - 1)];
                    ki += c * src[(j - 1, da + i - 1)];
                }
                dst[(j, i)] = -chi * ki;
                dst[(j, da + i)] = chi * kr;
            }
        }
    }

    fn rhs(&self, x: &FastQb, out: &mut FastQb) {
        self.apply_pair(&x.e, &mut out.g);
        self.apply_pair(&x.g, &mut out.e);
    }
}

/// One sampled point of the full-vs-effective comparison.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComparisonRecord {
    pub chi_t: f64,
    /// Composite overlap |<psi_eff|psi_full>|^2 including the qubit factor.
    pub fidelity: f64,
    pub n_full: f64,
    pub n_eff: f64,
}

/// Result of a lockstep full-vs-effective integration.
#[derive(Debug, Clone)]
pub struct IonComparison {
    pub records: Vec<ComparisonRecord>,
    pub norm_drift_full: f64,
    pub norm_drift_eff: f64,
    /// Post-hoc Lamb-Dicke figures eta^2 (2 max<n> + 1) per mode.
    pub lamb_dicke_x: f64,
    pub lamb_dicke_y: f64,
    pub final_full: StateVector,
    pub final_eff: StateVector,
}

const TOP_POPULATION_ABORT: f64 = 1e-4;
const TOP_POPULATION_WARN: f64 = 1e-6;
const NORM_DRIFT_BUDGET: f64 = 1e-8;

/// Integrates |g,0,0> under both the full two-colour Hamiltonian and the
/// effective pair-creation Hamiltonian on a shared RK4 grid, recording the
/// composite fidelity and both phonon trajectories at `samples` evenly
/// spaced times up to chi t = chi_t_max.
pub fn simulate_comparison(
    p: &IonParams,
    space_a: &FockSpace,
    space_b: &FockSpace,
    chi_t_max: f64,
    samples: usize,
    dt_max: Option<f64>,
) -> Result<IonComparison> {
    p.validate()?;
    let chi = p.chi();
    if !(chi > 0.0) {
        return Err(Error::InvalidParameter(
            "comparison needs a nonzero pair-creation rate".into(),
        ));
    }
    if !(chi_t_max > 0.0) || samples < 2 {
        return Err(Error::InvalidParameter(
            "comparison needs chi_t_max > 0 and at least two samples".into(),
        ));
    }
    let t_final = chi_t_max / chi;
    let dt_max = dt_max.unwrap_or_else(|| p.default_dt());
    let n_steps = (t_final / dt_max).ceil().max(1.0) as usize;
    let dt = t_final / n_steps as f64;

    let (da, db) = (space_a.dim(), space_b.dim());
    let mut full = FullEngine::new(p, space_a, space_b)?;
    let eff = EffEngine::new(chi, da, db);

    let mut y_full = FastQb::ground_vacuum(da, db);
    let mut y_eff = FastQb::ground_vacuum(da, db);
    let mut ws_full = Rk4Ws::new(da, db);
    let mut ws_eff = Rk4Ws::new(da, db);

    let mut sample_steps: Vec<usize> = (0..samples)
        .map(|k| (k as f64 / (samples - 1) as f64 * n_steps as f64).round() as usize)
        .collect();
    sample_steps.dedup();

    let mut records = Vec::with_capacity(sample_steps.len());
    let mut drift_full = 0.0;
    let mut drift_eff = 0.0;
    let mut max_mean = (0.0f64, 0.0f64);

    let mut record =
        |step: usize, y_full: &FastQb, y_eff: &FastQb, max_mean: &mut (f64, f64)| -> Result<()> {
            let t = step as f64 * dt;
            let top = y_full.top_population().max(y_eff.top_population());
            if top > TOP_POPULATION_ABORT {
                return Err(Error::CutoffOverflow {
                    t,
                    population: top,
                    limit: TOP_POPULATION_ABORT,
                });
            }
            if top > TOP_POPULATION_WARN {
                log::warn!(
                    "top Fock level holds population {top:.3e} at t = {t:.3}; \
                 results may be truncation limited"
                );
            }
            let (ma, mb) = y_full.mode_means();
            max_mean.0 = max_mean.0.max(ma);
            max_mean.1 = max_mean.1.max(mb);
            records.push(ComparisonRecord {
                chi_t: chi * t,
                fidelity: y_eff.overlap(y_full).norm_sqr(),
                n_full: y_full.mean_phonons(),
                n_eff: y_eff.mean_phonons(),
            });
            Ok(())
        };

    record(0, &y_full, &y_eff, &mut max_mean)?;
    let mut next_sample = 1usize;
    for step in 0..n_steps {
        let t = step as f64 * dt;
        rk4_step(
            &mut |t, x, out| full.rhs(t, x, out),
            t,
            dt,
            &mut y_full,
            &mut ws_full,
        );
        rk4_step(
            &mut |_, x, out| eff.rhs(x, out),
            t,
            dt,
            &mut y_eff,
            &mut ws_eff,
        );
        drift_full += renormalize(&mut y_full);
        drift_eff += renormalize(&mut y_eff);
        if next_sample < sample_steps.len() && step + 1 == sample_steps[next_sample] {
            record(step + 1, &y_full, &y_eff, &mut max_mean)?;
            next_sample += 1;
        }
    }
    let worst = drift_full.max(drift_eff);
    if worst > NORM_DRIFT_BUDGET {
        return Err(Error::NormDrift {
            drift: worst,
            budget: NORM_DRIFT_BUDGET,
        });
    }

    Ok(IonComparison {
        records,
        norm_drift_full: drift_full,
        norm_drift_eff: drift_eff,
        lamb_dicke_x: p.eta_x * p.eta_x * (2.0 * max_mean.0 + 1.0),
        lamb_dicke_y: p.eta_y * p.eta_y * (2.0 * max_mean.1 + 1.0),
        final_full: y_full.to_state()?,
        final_eff: y_eff.to_state()?,
    })
}

/// Evolves |g,0,0> under the effective Hamiltonian alone up to
/// chi t = chi_t. The generator is time independent and tiny, so the
/// default step only needs to resolve chi * dim.
pub fn evolve_effective(
    p: &IonParams,
    space_a: &FockSpace,
    space_b: &FockSpace,
    chi_t: f64,
    dt_max: Option<f64>,
) -> Result<StateVector> {
    p.validate()?;
    let chi = p.chi();
    if !(chi > 0.0) || !(chi_t > 0.0) {
        return Err(Error::InvalidParameter(
            "effective evolution needs chi > 0 and chi_t > 0".into(),
        ));
    }
    let (da, db) = (space_a.dim(), space_b.dim());
    let t_final = chi_t / chi;
    let dt_max = dt_max.unwrap_or(0.01 / (chi * da.max(db) as f64));
    let n_steps = (t_final / dt_max).ceil().max(1.0) as usize;
    let dt = t_final / n_steps as f64;
    let eff = EffEngine::new(chi, da, db);
    let mut y = FastQb::ground_vacuum(da, db);
    let mut ws = Rk4Ws::new(da, db);
    let mut drift = 0.0;
    for step in 0..n_steps {
        rk4_step(
            &mut |_, x, out| eff.rhs(x, out),
            step as f64 * dt,
            dt,
            &mut y,
            &mut ws,
        );
        drift += renormalize(&mut y);
    }
    if drift > NORM_DRIFT_BUDGET {
        return Err(Error::NormDrift {
            drift,
            budget: NORM_DRIFT_BUDGET,
        });
    }
    let top = y.top_population();
    if top > TOP_POPULATION_ABORT {
        return Err(Error::CutoffOverflow {
            t: t_final,
            population: top,
            limit: TOP_POPULATION_ABORT,
        });
    }
    y.to_state()
}

/// Projects the electronic qubit of a qubit x modes state onto an outcome,
/// returning the renormalized motional state and the Born probability.
pub fn project_qubit(psi: &StateVector, outcome: QubitOutcome) -> Result<(StateVector, f64)> {
    let shape = psi.shape();
    if shape.len() < 2 || shape[0] != 2 {
        return Err(Error::BadFactor {
            index: 0,
            shape: shape.to_vec(),
        });
    }
    let block_len: usize = shape[1..].iter().product();
    let offset = match outcome {
        QubitOutcome::G => 0,
        QubitOutcome::E => block_len,
    };
    let block = psi.amplitudes().rows(offset, block_len).clone_owned();
    let probability = block.norm_squared();
    if probability < 1e-12 {
        return Err(Error::ZeroProbabilityOutcome { probability });
    }
    Ok((StateVector::new(block, shape[1..].to_vec())?, probability))
}
