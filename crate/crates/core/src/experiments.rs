//! The experiment runner: each experiment turns configuration into tables
//! of numbers that correspond to one figure or claim of the study, then
//! writes them through [`crate::output`].

use std::path::PathBuf;

use num_complex::Complex64 as C64;

use crate::config::{GridConfig, RunConfig};
use crate::error::{Error, Result};
use crate::fock::FockSpace;
use crate::ion::IonParams;
use crate::metrology::{self, QfiAbscissa};
use crate::output::{self, Cell, Manifest, Table};
use crate::probe::{self, ProbeParams};
use crate::states::{self, StateFamily};
use crate::stats;

/// Everything the runner knows how to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    PopulationsWigner,
    G2Sweep,
    OddSource,
    EntanglementMap,
    EntanglementSlice,
    QfiSweep,
    IonSim,
    ProbeScan,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::PopulationsWigner,
        Experiment::G2Sweep,
        Experiment::OddSource,
        Experiment::EntanglementMap,
        Experiment::EntanglementSlice,
        Experiment::QfiSweep,
        Experiment::IonSim,
        Experiment::ProbeScan,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::PopulationsWigner => "populations-wigner",
            Experiment::G2Sweep => "g2-sweep",
            Experiment::OddSource => "odd-source",
            Experiment::EntanglementMap => "entanglement-map",
            Experiment::EntanglementSlice => "entanglement-slice",
            Experiment::QfiSweep => "qfi-sweep",
            Experiment::IonSim => "ion-sim",
            Experiment::ProbeScan => "probe-scan",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Experiment::ALL
            .iter()
            .copied()
            .find(|e| e.name() == name)
            .ok_or_else(|| {
                let known: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                Error::InvalidParameter(format!(
                    "unknown experiment '{name}'; expected one of {}",
                    known.join(", ")
                ))
            })
    }
}

/// Runs one experiment end to end and returns the paths written (data
/// files plus the `run.json` manifest).
pub fn run_experiment(experiment: Experiment, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let (tables, seed) = match experiment {
        Experiment::PopulationsWigner => (populations_wigner(cfg)?, None),
        Experiment::G2Sweep => (g2_sweep(cfg)?, None),
        Experiment::OddSource => (odd_source(cfg)?, None),
        Experiment::EntanglementMap => (entanglement_map(cfg)?, None),
        Experiment::EntanglementSlice => (entanglement_slice(cfg)?, None),
        Experiment::QfiSweep => (qfi_sweep(cfg)?, None),
        Experiment::IonSim => (ion_sim(cfg)?, None),
        Experiment::ProbeScan => probe_scan(cfg)?,
    };
    let manifest = Manifest {
        experiment: experiment.name(),
        artifact_version: env!("CARGO_PKG_VERSION"),
        format: cfg.output.format,
        seed,
        files: Vec::new(),
        config: cfg,
    };
    output::write_run(&cfg.output.directory, manifest, &tables)
}

fn lambda_of(r: f64) -> f64 {
    r.tanh().powi(2)
}

fn populations_wigner(cfg: &RunConfig) -> Result<Vec<(String, Table)>> {
    let pc = &cfg.populations_wigner;
    let lambda = lambda_of(pc.r);
    let space = FockSpace::new(
        FockSpace::for_lambda(lambda, pc.tail_tol)?
            .cutoff()
            .max(pc.max_n),
        pc.tail_tol,
    )?;
    let mut tables = Vec::new();

    let mut columns = vec!["n".to_string()];
    columns.extend(pc.families.iter().map(|f| format!("p_{}", f.label())));
    let mut pops = Table::new(columns);
    let family_pops: Vec<Vec<f64>> = pc
        .families
        .iter()
        .map(|&f| Ok(stats::family_state(f, lambda, &space)?.populations()))
        .collect::<Result<_>>()?;
    for n in 0..=pc.max_n {
        let mut row = vec![Cell::Int(n as i64)];
        row.extend(family_pops.iter().map(|p| Cell::Num(p[n])));
        pops.push(row);
    }
    tables.push(("populations".to_string(), pops));

    let axis = GridConfig::new(-pc.grid_half_width, pc.grid_half_width, pc.grid_points).values();
    for &family in &pc.families {
        let mut table = Table::new(vec!["q", "p", "w"]);
        for &q in &axis {
            for &p in &axis {
                let w = stats::wigner_closed(family, lambda, stats::PhasePoint::new(q, p))?;
                table.push(vec![Cell::Num(q), Cell::Num(p), Cell::Num(w)]);
            }
        }
        tables.push((format!("wigner_{}", family.label()), table));
    }
    Ok(tables)
}

fn g2_sweep(cfg: &RunConfig) -> Result<Vec<(String, Table)>> {
    let order = [
        StateFamily::Thermal,
        StateFamily::Even,
        StateFamily::Odd,
        StateFamily::Smss,
    ];
    let mut table = Table::new(vec![
        "lambda_r",
        "g2_thermal",
        "g2_even",
        "g2_odd",
        "g2_smss",
    ]);
    for lambda in cfg.g2_sweep.lambda.values() {
        let mut row = vec![Cell::Num(lambda)];
        for family in order {
            let g2 = stats::g2_closed(family, lambda).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "g2 of the {} family is undefined at lambda = {lambda}",
                    family.label()
                ))
            })?;
            row.push(Cell::Num(g2));
        }
        table.push(row);
    }
    Ok(vec![("g2_sweep".to_string(), table)])
}

fn odd_source(cfg: &RunConfig) -> Result<Vec<(String, Table)>> {
    let mut table = Table::new(vec!["lambda_r", "r", "p_project_odd", "p_single_photon"]);
    for lambda in cfg.odd_source.lambda.values() {
        let (p_odd, p_single) = stats::odd_projection_stats(lambda);
        table.push(vec![
            Cell::Num(lambda),
            Cell::Num(states::r_from_lambda(lambda)?),
            Cell::Num(p_odd),
            Cell::Num(p_single),
        ]);
    }
    Ok(vec![("odd_source".to_string(), table)])
}

fn entanglement_map(cfg: &RunConfig) -> Result<Vec<(String, Table)>> {
    let mc = &cfg.entanglement_map;
    let mut map = Table::new(vec!["phi", "lambda_r", "e_phi"]);
    for phi in mc.phi.values() {
        let eps = phi.cos();
        for lambda in mc.lambda.values() {
            map.push(vec![
                Cell::Num(phi),
                Cell::Num(lambda),
                Cell::Num(stats::e_phi(lambda, eps)),
            ]);
        }
    }
    let mut boundary = Table::new(vec!["phi", "lambda_boundary"]);
    for phi in mc.phi.values() {
        if let Some(lb) = stats::entanglement_boundary(phi.cos()) {
            boundary.push(vec![Cell::Num(phi), Cell::Num(lb)]);
        }
    }
    Ok(vec![
        ("entanglement_map".to_string(), map),
        ("entanglement_boundary".to_string(), boundary),
    ])
}

fn entanglement_slice(cfg: &RunConfig) -> Result<Vec<(String, Table)>> {
    let sc = &cfg.entanglement_slice;
    let eps = sc.phi.cos();
    let mut table = Table::new(vec!["r", "lambda_r", "e_tmss", "e_phi", "e_even_odd"]);
    for r in sc.r.values() {
        let lambda = lambda_of(r);
        table.push(vec![
            Cell::Num(r),
            Cell::Num(lambda),
            Cell::Num(stats::e_tmss(lambda)),
            Cell::Num(stats::e_phi(lambda, eps)),
            Cell::Num(stats::e_even_odd(lambda)),
        ]);
    }
    Ok(vec![("entanglement_slice".to_string(), table)])
}

fn qfi_sweep(cfg: &RunConfig) -> Result<Vec<(String, Table)>> {
    let qc = &cfg.qfi_sweep;
    let lambdas = qc.lambda.values();
    let curve = metrology::qfi_sweep(&qc.families, qc.abscissa, &lambdas, qc.tail_tol)?;
    let mut table = Table::new(vec!["family", "theta_half_width", "x", "qfi"]);
    for family_curve in &curve.families {
        for &(x, f) in &family_curve.points {
            table.push(vec![
                family_curve.family.label().into(),
                Cell::Num(0.0),
                Cell::Num(x),
                Cell::Num(f),
            ]);
        }
    }
    // extra pure-squeezed curves averaged over a quadrature-angle interval
    // around the optimum, one per configured half-width
    for &half_width in &qc.spread_half_widths {
        for &lambda in &lambdas {
            let f = metrology::smss_spread_average(
                lambda,
                std::f64::consts::FRAC_PI_2,
                half_width,
                qc.spread_samples,
                qc.tail_tol,
            )?;
            let x = match qc.abscissa {
                QfiAbscissa::Lambda => lambda,
                QfiAbscissa::MeanN => stats::mean_n_closed(StateFamily::Smss, lambda),
            };
            table.push(vec![
                "smss-avg".into(),
                Cell::Num(half_width),
                Cell::Num(x),
                Cell::Num(f),
            ]);
        }
    }
    Ok(vec![("qfi_sweep".to_string(), table)])
}

fn ion_sim(cfg: &RunConfig) -> Result<Vec<(String, Table)>> {
    let ic = &cfg.ion_sim;
    let params = IonParams {
        omega_x: ic.omega_x,
        omega_y: ic.omega_y,
        omega: ic.omega,
        eta_x: ic.eta_x,
        eta_y: ic.eta_y,
        tones: ic.tones,
    };
    let space_a = FockSpace::with_cutoff(ic.cutoff);
    let space_b = FockSpace::with_cutoff(ic.cutoff);
    let dt_max = Some(params.default_dt() * ic.dt_factor);
    let comparison = crate::ion::simulate_comparison(
        &params,
        &space_a,
        &space_b,
        ic.chi_t_max,
        ic.samples,
        dt_max,
    )?;
    let mut table = Table::new(vec!["chi_t", "fidelity", "n_full", "n_eff"]);
    for rec in &comparison.records {
        table.push(vec![
            Cell::Num(rec.chi_t),
            Cell::Num(rec.fidelity),
            Cell::Num(rec.n_full),
            Cell::Num(rec.n_eff),
        ]);
    }
    let mut diag = Table::new(vec![
        "norm_drift_full",
        "norm_drift_eff",
        "lamb_dicke_x",
        "lamb_dicke_y",
    ]);
    diag.push(vec![
        Cell::Num(comparison.norm_drift_full),
        Cell::Num(comparison.norm_drift_eff),
        Cell::Num(comparison.lamb_dicke_x),
        Cell::Num(comparison.lamb_dicke_y),
    ]);
    Ok(vec![
        ("ion_sim".to_string(), table),
        ("ion_diagnostics".to_string(), diag),
    ])
}

fn probe_scan(cfg: &RunConfig) -> Result<(Vec<(String, Table)>, Option<u64>)> {
    let pc = &cfg.probe_scan;
    let lambda = lambda_of(pc.r);
    let space = match pc.family {
        StateFamily::Smss => states::smss_space(lambda, pc.tail_tol)?,
        _ => FockSpace::for_lambda(lambda, pc.tail_tol)?,
    };
    let rho = stats::family_state(pc.family, lambda, &space)?;
    let params = ProbeParams {
        eta_x: pc.eta_x,
        omega: pc.omega,
    };
    params.validate()?;
    let radii = GridConfig::new(0.0, pc.alpha_max, pc.points).values();
    let mut results = Vec::with_capacity(radii.len());
    for (k, &radius) in radii.iter().enumerate() {
        let alpha = C64::new(radius, 0.0);
        let result = if pc.shots == 0 {
            probe::probe(&rho, alpha, &params)?
        } else {
            probe::probe_sampled(
                &rho,
                alpha,
                &params,
                pc.shots,
                pc.seed.wrapping_add(k as u64),
            )?
        };
        results.push(result);
    }
    let reference = results[0].p_eg.abs();
    let mut table = Table::new(vec!["alpha_abs", "p_eg", "wigner_ref", "detected"]);
    for (radius, result) in radii.iter().zip(&results) {
        let detected = result.p_eg.abs() < pc.threshold * reference;
        table.push(vec![
            Cell::Num(*radius),
            Cell::Num(result.p_eg),
            Cell::Num(result.wigner_ref),
            Cell::Int(detected as i64),
        ]);
    }
    let fit = probe::fit_inversion(&results)?;
    let mut fit_table = Table::new(vec!["slope", "intercept", "max_residual", "contrast"]);
    fit_table.push(vec![
        Cell::Num(fit.slope),
        Cell::Num(fit.intercept),
        Cell::Num(fit.max_residual),
        Cell::Num(params.contrast()),
    ]);
    let seed = (pc.shots > 0).then_some(pc.seed);
    Ok((
        vec![
            ("probe_scan".to_string(), table),
            ("probe_fit".to_string(), fit_table),
        ],
        seed,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn test_config() -> (RunConfig, tempfile::TempDir) {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::default();
        cfg.output.directory = dir.path().to_path_buf();
        (cfg, dir)
    }

    fn num(cell: &Cell) -> f64 {
        match cell {
            Cell::Num(v) => *v,
            Cell::Int(v) => *v as f64,
            Cell::Text(t) => panic!("expected a number, got '{t}'"),
        }
    }

    #[test]
    fn g2_reference_row_matches_the_closed_laws() {
        let (cfg, _dir) = test_config();
        let tables = g2_sweep(&cfg).unwrap();
        let table = &tables[0].1;
        assert_eq!(
            table.columns,
            ["lambda_r", "g2_thermal", "g2_even", "g2_odd", "g2_smss"]
        );
        let row = table
            .rows
            .iter()
            .find(|row| (num(&row[0]) - 0.5).abs() < 1e-12)
            .expect("default grid must contain lambda = 0.5");
        assert_abs_diff_eq!(num(&row[1]), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(num(&row[2]), 3.5, epsilon = 1e-12);
        assert_abs_diff_eq!(num(&row[3]), 1.04, epsilon = 1e-12);
        assert_abs_diff_eq!(num(&row[4]), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_squeezing_populations_need_the_odd_family_excluded() {
        let (mut cfg, _dir) = test_config();
        cfg.populations_wigner.r = 0.0;
        let err = populations_wigner(&cfg).unwrap_err();
        assert!(matches!(err, Error::OddStateAtZeroSqueezing));

        cfg.populations_wigner.families = vec![StateFamily::Thermal, StateFamily::Even];
        let tables = populations_wigner(&cfg).unwrap();
        let pops = &tables[0].1;
        assert_eq!(num(&pops.rows[0][1]), 1.0);
        assert_eq!(num(&pops.rows[0][2]), 1.0);
        assert_eq!(num(&pops.rows[1][1]), 0.0);
        assert_eq!(tables.len(), 3);
    }

    #[test]
    fn entanglement_boundary_rows_sit_on_the_equality_curve() {
        let (cfg, _dir) = test_config();
        let tables = entanglement_map(&cfg).unwrap();
        let boundary = &tables[1].1;
        assert!(!boundary.rows.is_empty());
        for row in &boundary.rows {
            let phi = num(&row[0]);
            let lb = num(&row[1]);
            assert_abs_diff_eq!(
                stats::e_phi(lb, phi.cos()),
                stats::e_tmss(lb),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn qfi_table_carries_plain_and_averaged_curves() {
        let (mut cfg, _dir) = test_config();
        cfg.qfi_sweep.lambda = GridConfig::new(0.1, 0.5, 3);
        cfg.qfi_sweep.spread_samples = 16;
        let tables = qfi_sweep(&cfg).unwrap();
        let table = &tables[0].1;
        // 4 families x 3 points + 2 spreads x 3 points
        assert_eq!(table.rows.len(), 18);
        for row in &table.rows {
            assert!(num(&row[3]) >= 0.0);
        }
        let averaged: Vec<_> = table
            .rows
            .iter()
            .filter(|row| matches!(&row[0], Cell::Text(t) if t == "smss-avg"))
            .collect();
        assert_eq!(averaged.len(), 6);
        // averaging over a symmetric window can only lower the optimum
        let plain: Vec<_> = table
            .rows
            .iter()
            .filter(|row| matches!(&row[0], Cell::Text(t) if t == "smss"))
            .collect();
        for (avg, best) in averaged.iter().take(3).zip(&plain) {
            assert!(num(&avg[3]) <= num(&best[3]) + 1e-9);
        }
    }

    #[test]
    fn short_ion_run_emits_trajectories_and_diagnostics() {
        let (mut cfg, _dir) = test_config();
        cfg.ion_sim.cutoff = 4;
        cfg.ion_sim.chi_t_max = 2e-3;
        cfg.ion_sim.samples = 3;
        cfg.ion_sim.dt_factor = 5.0;
        let tables = ion_sim(&cfg).unwrap();
        let table = &tables[0].1;
        assert_eq!(table.columns, ["chi_t", "fidelity", "n_full", "n_eff"]);
        assert_eq!(table.rows.len(), 3);
        let last = table.rows.last().unwrap();
        assert_abs_diff_eq!(num(&last[0]), 2e-3, epsilon = 1e-12);
        assert!(num(&last[1]) > 0.999);
        assert!(num(&tables[1].1.rows[0][0]) < 1e-8);
    }

    #[test]
    fn probe_scan_detects_only_displaced_points() {
        let (mut cfg, _dir) = test_config();
        cfg.probe_scan.r = 0.5;
        cfg.probe_scan.points = 6;
        cfg.probe_scan.alpha_max = 1.5;
        let (tables, seed) = probe_scan(&cfg).unwrap();
        assert!(seed.is_none());
        let scan = &tables[0].1;
        assert_eq!(num(&scan.rows[0][3]), 0.0);
        assert_eq!(num(&scan.rows.last().unwrap()[3]), 1.0);
        let fit = &tables[1].1;
        assert!(num(&fit.rows[0][2]) < 1e-8);

        cfg.probe_scan.shots = 5000;
        cfg.probe_scan.seed = 11;
        let (_, seed) = probe_scan(&cfg).unwrap();
        assert_eq!(seed, Some(11));
    }

    #[test]
    fn run_experiment_writes_data_and_manifest() {
        let (mut cfg, dir) = test_config();
        cfg.entanglement_slice.r = GridConfig::new(0.0, 1.0, 5);
        let files = run_experiment(Experiment::EntanglementSlice, &cfg).unwrap();
        assert_eq!(files.len(), 2);
        assert!(files[0].ends_with("entanglement_slice.csv"));
        assert!(files[1].ends_with("run.json"));
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&files[1]).unwrap()).unwrap();
        assert_eq!(manifest["experiment"], "entanglement-slice");
        assert_eq!(manifest["files"][0], "entanglement_slice.csv");
        assert!(manifest["config"]["entanglement-slice"]["r"]["points"] == 5);
        assert!(manifest.get("seed").is_none());
        drop(dir);
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(Experiment::from_name(e.name()).unwrap(), e);
        }
        assert!(Experiment::from_name("nope").is_err());
    }
}
