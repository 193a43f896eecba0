//! Run configuration for the experiment runner.
//!
//! A single TOML file holds one section per experiment plus an output
//! section; every key has a default, so an empty file (or no file at all)
//! is a complete configuration. Unknown keys are rejected rather than
//! ignored so that typos fail loudly. When no path is given on the command
//! line, the `TMSS_CONFIG_DIR` environment variable may point at a
//! directory containing `tmss.toml`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ion::Tones;
use crate::metrology::QfiAbscissa;
use crate::states::StateFamily;

/// Name of the config file looked up inside `TMSS_CONFIG_DIR`.
pub const CONFIG_FILE_NAME: &str = "tmss.toml";

/// Environment variable naming a directory with a default config file.
pub const CONFIG_DIR_ENV: &str = "TMSS_CONFIG_DIR";

/// Data file format for experiment output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// An inclusive, evenly spaced grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            min: 0.0,
            max: 1.0,
            points: 2,
        }
    }
}

impl GridConfig {
    pub fn new(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return Err(Error::InvalidParameter(format!(
                "{name} grid must satisfy min <= max and be finite, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.points == 0 || (self.points == 1 && self.max > self.min) {
            return Err(Error::InvalidParameter(format!(
                "{name} grid with range [{}, {}] needs at least two points",
                self.min, self.max
            )));
        }
        Ok(())
    }

    /// Grid values as convex combinations of the endpoints, so both ends
    /// are hit exactly and symmetric reference points land cleanly.
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        (0..self.points)
            .map(|i| {
                let t = i as f64 / (self.points - 1) as f64;
                self.min * (1.0 - t) + self.max * t
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Directory that receives data files and the run manifest.
    pub directory: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("runs"),
            format: OutputFormat::Csv,
        }
    }
}

/// Fock populations and Wigner maps of the three reduced states at one
/// squeezing value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct PopulationsWignerConfig {
    pub r: f64,
    pub families: Vec<StateFamily>,
    /// Highest Fock index in the population table.
    pub max_n: usize,
    /// Wigner maps cover the square [-w, w] x [-w, w].
    pub grid_half_width: f64,
    pub grid_points: usize,
    pub tail_tol: f64,
}

impl Default for PopulationsWignerConfig {
    fn default() -> Self {
        Self {
            r: 1.0,
            families: vec![StateFamily::Thermal, StateFamily::Even, StateFamily::Odd],
            max_n: 10,
            grid_half_width: 3.0,
            grid_points: 41,
            tail_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct G2SweepConfig {
    pub lambda: GridConfig,
}

impl Default for G2SweepConfig {
    fn default() -> Self {
        // starts above zero because g2 is undefined on the vacuum; the
        // 0.05 spacing lands exactly on the lambda = 0.5 reference row
        Self {
            lambda: GridConfig::new(0.05, 0.95, 19),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct OddSourceConfig {
    pub lambda: GridConfig,
}

impl Default for OddSourceConfig {
    fn default() -> Self {
        Self {
            lambda: GridConfig::new(0.0, 0.95, 20),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct EntanglementMapConfig {
    pub lambda: GridConfig,
    pub phi: GridConfig,
}

impl Default for EntanglementMapConfig {
    fn default() -> Self {
        Self {
            lambda: GridConfig::new(0.0, 0.95, 40),
            phi: GridConfig::new(0.0, std::f64::consts::TAU, 81),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct EntanglementSliceConfig {
    /// Relative phase of the superposition the slice tracks.
    pub phi: f64,
    pub r: GridConfig,
}

impl Default for EntanglementSliceConfig {
    fn default() -> Self {
        Self {
            phi: std::f64::consts::PI + std::f64::consts::PI / 10.0,
            r: GridConfig::new(0.0, 1.5, 61),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct QfiSweepConfig {
    pub abscissa: QfiAbscissa,
    pub lambda: GridConfig,
    pub families: Vec<StateFamily>,
    /// Half-widths of the angle intervals for the averaged pure-squeezed
    /// curves; one extra curve per entry.
    pub spread_half_widths: Vec<f64>,
    pub spread_samples: usize,
    pub tail_tol: f64,
}

impl Default for QfiSweepConfig {
    fn default() -> Self {
        Self {
            abscissa: QfiAbscissa::Lambda,
            // starts above zero: the odd family is undefined at lambda = 0
            lambda: GridConfig::new(0.02, 0.9, 45),
            families: vec![
                StateFamily::Thermal,
                StateFamily::Even,
                StateFamily::Odd,
                StateFamily::Smss,
            ],
            spread_half_widths: vec![std::f64::consts::FRAC_PI_8, std::f64::consts::FRAC_PI_4],
            spread_samples: 64,
            tail_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct IonSimConfig {
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega: f64,
    pub eta_x: f64,
    pub eta_y: f64,
    pub tones: Tones,
    /// Fock cutoff per mode.
    pub cutoff: usize,
    pub chi_t_max: f64,
    pub samples: usize,
    /// Multiplies the default integrator step.
    pub dt_factor: f64,
}

impl Default for IonSimConfig {
    fn default() -> Self {
        Self {
            omega_x: 1.0,
            omega_y: 1.2,
            omega: 0.05,
            eta_x: 0.1,
            eta_y: 0.1,
            tones: Tones::Both,
            cutoff: 30,
            chi_t_max: 1.0,
            samples: 50,
            dt_factor: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct ProbeScanConfig {
    pub family: StateFamily,
    pub r: f64,
    pub tail_tol: f64,
    /// Scan runs over |alpha| from 0 to this value.
    pub alpha_max: f64,
    pub points: usize,
    pub eta_x: f64,
    pub omega: f64,
    pub threshold: f64,
    /// 0 means the noiseless protocol; otherwise each point is estimated
    /// from this many measurement shots.
    pub shots: u64,
    pub seed: u64,
}

impl Default for ProbeScanConfig {
    fn default() -> Self {
        Self {
            family: StateFamily::Even,
            r: 1.5,
            tail_tol: 1e-10,
            alpha_max: 2.0,
            points: 50,
            eta_x: 0.11,
            omega: 0.05,
            threshold: 0.5,
            shots: 0,
            seed: 0,
        }
    }
}

/// The whole configuration: one section per experiment plus output
/// settings. Field names map to kebab-case TOML sections.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct RunConfig {
    pub output: OutputConfig,
    pub populations_wigner: PopulationsWignerConfig,
    pub g2_sweep: G2SweepConfig,
    pub odd_source: OddSourceConfig,
    pub entanglement_map: EntanglementMapConfig,
    pub entanglement_slice: EntanglementSliceConfig,
    pub qfi_sweep: QfiSweepConfig,
    pub ion_sim: IonSimConfig,
    pub probe_scan: ProbeScanConfig,
}

impl RunConfig {
    /// Parses a TOML string, rejecting unknown keys.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads configuration with the documented fallback chain: explicit
    /// path if given, else `$TMSS_CONFIG_DIR/tmss.toml` if that file
    /// exists, else built-in defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let resolved = match path {
            Some(p) => Some(p.to_path_buf()),
            None => std::env::var_os(CONFIG_DIR_ENV)
                .map(|dir| Path::new(&dir).join(CONFIG_FILE_NAME))
                .filter(|p| p.is_file()),
        };
        match resolved {
            Some(p) => {
                let text = std::fs::read_to_string(&p).map_err(|e| {
                    Error::InvalidParameter(format!("cannot read config {}: {e}", p.display()))
                })?;
                Self::from_toml(&text)
            }
            None => {
                let cfg = Self::default();
                cfg.validate()?;
                Ok(cfg)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pw = &self.populations_wigner;
        require_finite_nonneg("populations-wigner r", pw.r)?;
        require_positive("populations-wigner grid-half-width", pw.grid_half_width)?;
        if pw.grid_points < 2 {
            return Err(Error::InvalidParameter(
                "populations-wigner grid-points must be at least 2".into(),
            ));
        }
        if pw.families.is_empty() {
            return Err(Error::InvalidParameter(
                "populations-wigner needs at least one family".into(),
            ));
        }
        if pw.families.contains(&StateFamily::Smss) {
            return Err(Error::InvalidParameter(
                "populations-wigner covers the reduced families only (thermal, even, odd)".into(),
            ));
        }
        require_positive("populations-wigner tail-tol", pw.tail_tol)?;

        self.g2_sweep.lambda.validate("g2-sweep lambda")?;
        self.odd_source.lambda.validate("odd-source lambda")?;
        self.entanglement_map
            .lambda
            .validate("entanglement-map lambda")?;
        self.entanglement_map.phi.validate("entanglement-map phi")?;
        self.entanglement_slice.r.validate("entanglement-slice r")?;
        require_finite_nonneg(
            "entanglement-slice r minimum",
            self.entanglement_slice.r.min,
        )?;

        let qfi = &self.qfi_sweep;
        qfi.lambda.validate("qfi-sweep lambda")?;
        if qfi.families.is_empty() {
            return Err(Error::InvalidParameter(
                "qfi-sweep needs at least one family".into(),
            ));
        }
        if qfi.spread_samples == 0 && !qfi.spread_half_widths.is_empty() {
            return Err(Error::InvalidParameter(
                "qfi-sweep spread-samples must be positive when spreads are requested".into(),
            ));
        }
        for &hw in &qfi.spread_half_widths {
            require_finite_nonneg("qfi-sweep spread half-width", hw)?;
        }
        require_positive("qfi-sweep tail-tol", qfi.tail_tol)?;

        let ion = &self.ion_sim;
        require_positive("ion-sim omega-x", ion.omega_x)?;
        require_positive("ion-sim omega-y", ion.omega_y)?;
        require_positive("ion-sim omega", ion.omega)?;
        require_finite_nonneg("ion-sim eta-x", ion.eta_x)?;
        require_finite_nonneg("ion-sim eta-y", ion.eta_y)?;
        if ion.cutoff == 0 {
            return Err(Error::InvalidParameter(
                "ion-sim cutoff must be at least 1".into(),
            ));
        }
        require_positive("ion-sim chi-t-max", ion.chi_t_max)?;
        if ion.samples < 2 {
            return Err(Error::InvalidParameter(
                "ion-sim needs at least two samples".into(),
            ));
        }
        require_positive("ion-sim dt-factor", ion.dt_factor)?;

        let probe = &self.probe_scan;
        require_finite_nonneg("probe-scan r", probe.r)?;
        require_positive("probe-scan tail-tol", probe.tail_tol)?;
        require_finite_nonneg("probe-scan alpha-max", probe.alpha_max)?;
        if probe.points < 2 {
            return Err(Error::InvalidParameter(
                "probe-scan needs at least two points".into(),
            ));
        }
        require_positive("probe-scan eta-x", probe.eta_x)?;
        require_positive("probe-scan omega", probe.omega)?;
        if !(probe.threshold > 0.0 && probe.threshold < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "probe-scan threshold must lie in (0, 1), got {}",
                probe.threshold
            )));
        }
        Ok(())
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn require_finite_nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be non-negative and finite, got {v}"
        )))
    }
}
