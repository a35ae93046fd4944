//! Run configuration and file formats.
//!
//! Configs and results are JSON, tabular outputs are CSV. Floats are written
//! in shortest round-trip form, so every value reads back bit-identically.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{ArrayGeometry, DirectionAngles, LinkScenario, RadioParams, DEFAULT_CARRIER_HZ, SPEED_OF_LIGHT};
use crate::codebook::{PhaseCodebook, PhaseProfile};
use crate::error::{Error, Result};
use crate::experiments::{AngleGrid, ExperimentSetup};
use crate::pattern::BeamPattern;
use crate::response_model::{Breakpoint, ResponseSamples, ResponseTimeModel};
use crate::solver::{JointOptions, SolveResult};

pub const DEFAULT_MODEL: &str = "default";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub n_x: usize,
    pub n_z: usize,
    pub spacing_m: f64,
    pub wavelength_m: f64,
    pub column_tied: bool,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        let wavelength_m = SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ;
        Self {
            n_x: crate::channel::DEFAULT_COLUMNS,
            n_z: crate::channel::DEFAULT_ROWS,
            spacing_m: wavelength_m * 0.5,
            wavelength_m,
            column_tied: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookConfig {
    pub q: usize,
}

impl Default for CodebookConfig {
    fn default() -> Self {
        Self { q: 256 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleConfig {
    pub az_deg: f64,
    #[serde(default = "broadside_el")]
    pub el_deg: f64,
}

fn broadside_el() -> f64 {
    90.0
}

impl AngleConfig {
    pub fn azimuth(az_deg: f64) -> Self {
        Self { az_deg, el_deg: 90.0 }
    }

    pub fn direction(&self) -> Result<DirectionAngles<f64>> {
        DirectionAngles::new(self.az_deg, self.el_deg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    pub aoa: AngleConfig,
    pub aod: AngleConfig,
    #[serde(default = "default_kappa")]
    pub snr_fraction: f64,
}

fn default_kappa() -> f64 {
    0.95
}

/// `"zero"` or an explicit list of codebook indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawInitial", into = "RawInitial")]
pub enum InitialProfile {
    #[default]
    Zero,
    Indices(Vec<usize>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawInitial {
    Name(String),
    Indices(Vec<usize>),
}

impl TryFrom<RawInitial> for InitialProfile {
    type Error = String;

    fn try_from(raw: RawInitial) -> std::result::Result<Self, String> {
        match raw {
            RawInitial::Name(s) if s == "zero" => Ok(InitialProfile::Zero),
            RawInitial::Name(s) => Err(format!("initial_profile must be \"zero\" or a list, got \"{s}\"")),
            RawInitial::Indices(v) => Ok(InitialProfile::Indices(v)),
        }
    }
}

impl From<InitialProfile> for RawInitial {
    fn from(p: InitialProfile) -> Self {
        match p {
            InitialProfile::Zero => RawInitial::Name("zero".into()),
            InitialProfile::Indices(v) => RawInitial::Indices(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub grid: AngleGrid,
    pub workers: usize,
    pub seed: u64,
    pub kappa: f64,
    pub quantization_levels: Vec<usize>,
    pub hist_bin_ms: f64,
    pub max_sweeps: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let setup = ExperimentSetup::default();
        Self {
            grid: setup.bulk_grid,
            workers: setup.workers,
            seed: 0,
            kappa: setup.kappa,
            quantization_levels: setup.quantization_levels,
            hist_bin_ms: setup.hist_bin_ms,
            max_sweeps: setup.joint.max_sweeps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub radio: RadioParams<f64>,
    #[serde(default)]
    pub codebook: CodebookConfig,
    /// `"default"` or a path to a model JSON file.
    #[serde(default = "default_model_name")]
    pub model: String,
    #[serde(default)]
    pub beams: Vec<BeamConfig>,
    #[serde(default)]
    pub initial_profile: InitialProfile,
    #[serde(default)]
    pub experiment: ExperimentConfig,
}

fn default_model_name() -> String {
    DEFAULT_MODEL.into()
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            radio: RadioParams::default(),
            codebook: CodebookConfig::default(),
            model: default_model_name(),
            beams: Vec::new(),
            initial_profile: InitialProfile::Zero,
            experiment: ExperimentConfig::default(),
        }
    }
}

fn check_angle(name: &str, a: &AngleConfig) -> Result<()> {
    for (field, v) in [("az_deg", a.az_deg), ("el_deg", a.el_deg)] {
        if !(0.0..=180.0).contains(&v) {
            return Err(Error::Validation(format!("{name}.{field} must be in [0, 180]")));
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        if g.n_x == 0 || g.n_z == 0 {
            return Err(Error::Validation("geometry.n_x and geometry.n_z must be >= 1".into()));
        }
        if !(g.spacing_m > 0.0 && g.spacing_m.is_finite()) {
            return Err(Error::Validation("geometry.spacing_m must be positive".into()));
        }
        if !(g.wavelength_m > 0.0 && g.wavelength_m.is_finite()) {
            return Err(Error::Validation("geometry.wavelength_m must be positive".into()));
        }
        self.radio.validate()?;
        if self.codebook.q < 2 {
            return Err(Error::Validation("codebook.q must be >= 2".into()));
        }
        if self.model.is_empty() {
            return Err(Error::Validation("model must be \"default\" or a path".into()));
        }
        for (l, b) in self.beams.iter().enumerate() {
            check_angle(&format!("beams[{l}].aoa"), &b.aoa)?;
            check_angle(&format!("beams[{l}].aod"), &b.aod)?;
            if !(b.snr_fraction > 0.0 && b.snr_fraction <= 1.0) {
                return Err(Error::Validation(format!("beams[{l}].snr_fraction must be in (0, 1]")));
            }
        }
        if let InitialProfile::Indices(v) = &self.initial_profile {
            let controls = if g.column_tied { g.n_x } else { g.n_x * g.n_z };
            if v.len() != controls {
                return Err(Error::Validation(format!(
                    "initial_profile has {} entries for {controls} controls",
                    v.len()
                )));
            }
            if v.iter().any(|&q| q >= self.codebook.q) {
                return Err(Error::Validation("initial_profile indices must be < codebook.q".into()));
            }
        }
        let e = &self.experiment;
        if e.workers == 0 {
            return Err(Error::Validation("experiment.workers must be >= 1".into()));
        }
        if e.grid.points == 0
            || !(0.0..=180.0).contains(&e.grid.lo_deg)
            || !(0.0..=180.0).contains(&e.grid.hi_deg)
            || e.grid.lo_deg > e.grid.hi_deg
        {
            return Err(Error::Validation(
                "experiment.grid needs points >= 1 and 0 <= lo_deg <= hi_deg <= 180".into(),
            ));
        }
        if !(e.kappa > 0.0 && e.kappa <= 1.0) {
            return Err(Error::Validation("experiment.kappa must be in (0, 1]".into()));
        }
        if e.quantization_levels.is_empty() || e.quantization_levels.iter().any(|&q| q < 2) {
            return Err(Error::Validation(
                "experiment.quantization_levels must be nonempty with every entry >= 2".into(),
            ));
        }
        if !(e.hist_bin_ms > 0.0 && e.hist_bin_ms.is_finite()) {
            return Err(Error::Validation("experiment.hist_bin_ms must be positive".into()));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<ArrayGeometry<f64>> {
        let g = &self.geometry;
        ArrayGeometry::new(g.n_x, g.n_z, g.spacing_m, g.wavelength_m, g.column_tied)
    }

    pub fn codebook(&self) -> Result<PhaseCodebook> {
        PhaseCodebook::new(self.codebook.q)
    }

    /// Relative model paths are resolved against `base_dir`.
    pub fn model(&self, base_dir: Option<&Path>) -> Result<ResponseTimeModel<f64>> {
        if self.model == DEFAULT_MODEL {
            return Ok(ResponseTimeModel::default_model());
        }
        read_model_json(&self.model_path(base_dir))
    }

    fn model_path(&self, base_dir: Option<&Path>) -> PathBuf {
        let p = PathBuf::from(&self.model);
        match base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p,
        }
    }

    pub fn links(&self) -> Result<Vec<LinkScenario<f64>>> {
        let geometry = self.geometry()?;
        self.beams
            .iter()
            .map(|b| LinkScenario::new(geometry.clone(), self.radio, b.aoa.direction()?, b.aod.direction()?))
            .collect()
    }

    pub fn initial_profile(&self) -> Result<PhaseProfile> {
        let codebook = self.codebook()?;
        let controls = self.geometry()?.control_count();
        match &self.initial_profile {
            InitialProfile::Zero => Ok(PhaseProfile::zeros(codebook, controls)),
            InitialProfile::Indices(v) => {
                if v.len() != controls {
                    return Err(Error::ShapeMismatch(format!(
                        "initial profile has {} entries for {controls} controls",
                        v.len()
                    )));
                }
                PhaseProfile::new(codebook, v.clone())
            }
        }
    }

    pub fn experiment_setup(&self, base_dir: Option<&Path>) -> Result<ExperimentSetup> {
        let e = &self.experiment;
        Ok(ExperimentSetup {
            geometry: self.geometry()?,
            radio: self.radio,
            model: self.model(base_dir)?,
            codebook: self.codebook()?,
            kappa: e.kappa,
            workers: e.workers,
            bulk_grid: e.grid,
            quantization_levels: e.quantization_levels.clone(),
            hist_bin_ms: e.hist_bin_ms,
            joint: JointOptions {
                max_sweeps: e.max_sweeps,
            },
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

fn parse_error(location: &str, e: serde_json::Error) -> Error {
    Error::Parse {
        location: format!("{location}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    }
}

/// Parses and validates a config. `location` names the source in errors.
pub fn parse_config(text: &str, location: &str) -> Result<RunConfig> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| parse_error(location, e))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    parse_config(&text, &path.display().to_string())
}

pub fn save_config(config: &RunConfig, path: &Path) -> Result<()> {
    fs::write(path, config.to_json())?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    breakpoints: Vec<Breakpoint<f64>>,
}

pub fn model_to_json(model: &ResponseTimeModel<f64>) -> String {
    let mut s = serde_json::to_string_pretty(&ModelFile {
        breakpoints: model.breakpoints().to_vec(),
    })
    .expect("model serializes");
    s.push('\n');
    s
}

pub fn parse_model_json(text: &str, location: &str) -> Result<ResponseTimeModel<f64>> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| parse_error(location, e))?;
    ResponseTimeModel::new(file.breakpoints)
}

pub fn read_model_json(path: &Path) -> Result<ResponseTimeModel<f64>> {
    parse_model_json(&fs::read_to_string(path)?, &path.display().to_string())
}

pub fn write_model_json(model: &ResponseTimeModel<f64>, path: &Path) -> Result<()> {
    fs::write(path, model_to_json(model))?;
    Ok(())
}

/// Reads `phase_deg,time_ms` rows.
pub fn parse_samples_csv(text: &str, location: &str) -> Result<ResponseSamples<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse {
        location: location.into(),
        message: e.to_string(),
    })?;
    if headers.iter().collect::<Vec<_>>() != ["phase_deg", "time_ms"] {
        return Err(Error::Parse {
            location: format!("{location}:1"),
            message: "expected header phase_deg,time_ms".into(),
        });
    }
    let mut points = Vec::new();
    for (i, row) in reader.deserialize::<(f64, f64)>().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            location: format!("{location}:{}", i + 2),
            message: e.to_string(),
        })?;
        points.push(row);
    }
    ResponseSamples::new(points)
}

pub fn read_samples_csv(path: &Path) -> Result<ResponseSamples<f64>> {
    parse_samples_csv(&fs::read_to_string(path)?, &path.display().to_string())
}

pub fn pattern_csv(pattern: &BeamPattern<f64>) -> String {
    let mut s = String::from("angle_deg,gain_db\n");
    for (a, g) in pattern.angles_deg.iter().zip(&pattern.gain_db) {
        s.push_str(&format!("{a},{g}\n"));
    }
    s
}

/// Profile file consumed by the pattern command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub indices: Vec<usize>,
    /// Beam whose incident direction is used; defaults to the first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beam: Option<usize>,
}

pub fn parse_profile_json(text: &str, location: &str) -> Result<ProfileFile> {
    serde_json::from_str(text).map_err(|e| parse_error(location, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamResult {
    pub beam: usize,
    pub indices: Vec<usize>,
    pub tau_ms: f64,
    pub achieved_re: f64,
    pub achieved_snr: f64,
    pub threshold_snr: f64,
    pub feasible: bool,
}

impl From<&SolveResult<f64>> for BeamResult {
    fn from(r: &SolveResult<f64>) -> Self {
        Self {
            beam: 0,
            indices: r.profile.indices().to_vec(),
            tau_ms: r.tau_ms,
            achieved_re: r.achieved_re,
            achieved_snr: r.achieved_snr,
            threshold_snr: r.threshold_snr,
            feasible: r.feasible,
        }
    }
}

/// Output of the solve command, carrying the resolved config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: String,
    pub total_ms: f64,
    pub beams: Vec<BeamResult>,
    pub config: RunConfig,
}

impl SolveReport {
    pub fn new(method: &str, results: &[SolveResult<f64>], config: &RunConfig) -> Self {
        let beams: Vec<BeamResult> = results
            .iter()
            .enumerate()
            .map(|(l, r)| BeamResult {
                beam: l,
                ..BeamResult::from(r)
            })
            .collect();
        Self {
            method: method.into(),
            total_ms: beams.iter().map(|b| b.tau_ms).sum(),
            beams,
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(r#"{"beams":[{"aoa":{"az_deg":45},"aod":{"az_deg":135}}]}"#, "mem").unwrap();
        assert_eq!(cfg.codebook.q, 256);
        assert_eq!(cfg.geometry, GeometryConfig::default());
        assert_eq!(cfg.beams[0].aoa.el_deg, 90.0);
        assert_eq!(cfg.beams[0].snr_fraction, 0.95);
        assert_eq!(cfg.initial_profile, InitialProfile::Zero);
        assert_eq!(cfg.model, "default");
        assert_eq!(cfg.experiment.grid.points, 21);
    }

    #[test]
    fn small_codebook_is_rejected() {
        match parse_config(r#"{"beams":[],"codebook":{"q":0}}"#, "mem") {
            Err(Error::Validation(m)) => assert_eq!(m, "codebook.q must be >= 2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_location() {
        match parse_config("{\n  \"beams\": [,]\n}", "cfg.json") {
            Err(Error::Parse { location, .. }) => assert!(location.starts_with("cfg.json:2:")),
            other => panic!("{other:?}"),
        }
        match parse_config(r#"{"beams":[],"bogus":1}"#, "mem") {
            Err(Error::Parse { message, .. }) => assert!(message.contains("bogus")),
            other => panic!("{other:?}"),
        }
        assert!(parse_config(r#"{"initial_profile":"ones"}"#, "mem").is_err());
    }

    #[test]
    fn validation_names_the_field() {
        let bad = [
            (
                r#"{"beams":[{"aoa":{"az_deg":45},"aod":{"az_deg":135},"snr_fraction":1.5}]}"#,
                "snr_fraction",
            ),
            (r#"{"geometry":{"spacing_m":-1}}"#, "spacing_m"),
            (
                r#"{"radio":{"p_bs":0,"g_bs":1,"g_mt":1,"sigma2":1,"delta":1,"rho":1,"mu":1}}"#,
                "p_bs",
            ),
            (r#"{"initial_profile":[0,1]}"#, "initial_profile"),
            (r#"{"experiment":{"workers":0}}"#, "workers"),
        ];
        for (text, field) in bad {
            match parse_config(text, "mem") {
                Err(Error::Validation(m)) => assert!(m.contains(field), "{m}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn config_round_trips() {
        let cfg = RunConfig {
            beams: [140.0, 120.0, 60.0, 40.0]
                .iter()
                .map(|&d| BeamConfig {
                    aoa: AngleConfig::azimuth(90.0),
                    aod: AngleConfig::azimuth(d),
                    snr_fraction: 0.95,
                })
                .collect(),
            initial_profile: InitialProfile::Indices(vec![3; 12]),
            ..RunConfig::default()
        };
        let text = cfg.to_json();
        let back = parse_config(&text, "mem").unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn model_json_round_trips() {
        let m = ResponseTimeModel::default_model();
        let back = parse_model_json(&model_to_json(&m), "mem").unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn samples_csv() {
        let s = parse_samples_csv("phase_deg,time_ms\n-360,80\n0,0\n360,20\n", "mem").unwrap();
        assert_eq!(s.points().len(), 3);
        assert!(parse_samples_csv("phase,time\n0,0\n", "mem").is_err());
        match parse_samples_csv("phase_deg,time_ms\n0,0\nx,1\n", "s.csv") {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "s.csv:3"),
            other => panic!("{other:?}"),
        }
    }
}
