use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use lcris::experiments::Experiment;
use lcris::io::{self, RunConfig, SolveReport};
use lcris::pattern::{angle_grid, beam_pattern};
use lcris::response_model::fit_model;
use lcris::solver::{self, JointOptions, SolveResult};
use lcris::{Error, PhaseProfile};

#[derive(Parser)]
#[command(
    name = "lcris",
    version,
    about = "Response-time-aware beam design for liquid-crystal RIS"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a convex response-time model to measured samples.
    FitModel {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        breakpoints: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Design the configured beam sequence.
    Solve {
        method: SolveMethod,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the far-field pattern of a profile.
    Pattern {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        profile: PathBuf,
        /// `lo:hi:step` in degrees.
        #[arg(long, default_value = "0:180:0.25")]
        grid: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an evaluation scenario and write its report directory.
    Experiment {
        name: ExperimentName,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMethod {
    Single,
    Joint,
    Legacy,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentName {
    SingleBeam,
    JointBeam,
    AngularSeparation,
    BeamCount,
    Bulk,
    Quantization,
}

impl From<ExperimentName> for Experiment {
    fn from(e: ExperimentName) -> Self {
        match e {
            ExperimentName::SingleBeam => Experiment::SingleBeam,
            ExperimentName::JointBeam => Experiment::JointBeam,
            ExperimentName::AngularSeparation => Experiment::AngularSeparation,
            ExperimentName::BeamCount => Experiment::BeamCount,
            ExperimentName::Bulk => Experiment::Bulk,
            ExperimentName::Quantization => Experiment::Quantization,
        }
    }
}

fn diagnostic(value: serde_json::Value) {
    eprintln!("{value}");
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible { .. } => 1,
        _ => 2,
    }
}

fn error_json(e: &Error) -> serde_json::Value {
    let kind = match e {
        Error::Infeasible { .. } => "infeasible",
        Error::Parse { .. } => "parse",
        Error::Validation(_) => "validation",
        Error::Io(_) => "io",
        _ => "invalid-input",
    };
    let mut value = json!({ "error": kind, "message": e.to_string() });
    match e {
        Error::Infeasible {
            beam,
            best_re,
            required,
        } => {
            value["beam"] = json!(beam);
            value["best_real_part"] = json!(best_re);
            value["required_real_part"] = json!(required);
        }
        Error::Parse { location, .. } => value["location"] = json!(location),
        _ => {}
    }
    value
}

fn config_dir(path: &Path) -> Option<&Path> {
    path.parent().filter(|p| !p.as_os_str().is_empty())
}

fn parse_grid(spec: &str) -> lcris::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Validation(format!("grid must be lo:hi:step, got \"{spec}\""));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<lcris::Result<Vec<f64>>>()?;
    if v[0] < 0.0 || v[1] > 180.0 {
        return Err(Error::Validation("grid must lie within [0, 180]".into()));
    }
    angle_grid(v[0], v[1], v[2])
}

fn solve(method: SolveMethod, config_path: &Path, out: &Path) -> lcris::Result<()> {
    let cfg = io::load_config(config_path)?;
    if cfg.beams.is_empty() {
        return Err(Error::Validation("beams must list at least one beam".into()));
    }
    let model = cfg.model(config_dir(config_path))?;
    let codebook = cfg.codebook()?;
    let links = cfg.links()?;
    let initial = cfg.initial_profile()?;
    let legacy = solver::solve_legacy(&links, &model, codebook, &initial)?;
    let alphas = links
        .iter()
        .zip(&legacy)
        .zip(&cfg.beams)
        .map(|((l, p), b)| Ok(b.snr_fraction * b.snr_fraction * l.snr(p)?))
        .collect::<lcris::Result<Vec<f64>>>()?;
    let (name, beams) = match method {
        SolveMethod::Single => (
            "single",
            solver::solve_sequential(&links, &model, codebook, &initial, &alphas)?.beams,
        ),
        SolveMethod::Joint => {
            let options = JointOptions {
                max_sweeps: cfg.experiment.max_sweeps,
            };
            (
                "joint",
                solver::solve_joint(&links, &model, codebook, &initial, &alphas, options)?.beams,
            )
        }
        SolveMethod::Legacy => {
            let mut prev = initial.clone();
            let mut beams = Vec::with_capacity(links.len());
            for ((link, profile), &alpha) in links.iter().zip(legacy).zip(&alphas) {
                let r = SolveResult::evaluate(link.coupling(), &model, &prev, profile, alpha)?;
                prev = r.profile.clone();
                beams.push(r);
            }
            ("legacy", beams)
        }
    };
    fs::write(out, SolveReport::new(name, &beams, &cfg).to_json())?;
    Ok(())
}

fn pattern(config_path: &Path, profile_path: &Path, grid: &str, out: &Path) -> lcris::Result<()> {
    let cfg: RunConfig = io::load_config(config_path)?;
    let location = profile_path.display().to_string();
    let file = io::parse_profile_json(&fs::read_to_string(profile_path)?, &location)?;
    let beam_index = file.beam.unwrap_or(0);
    let beam = cfg.beams.get(beam_index).ok_or_else(|| {
        Error::Validation(format!(
            "profile refers to beam {beam_index}, config has {}",
            cfg.beams.len()
        ))
    })?;
    let geometry = cfg.geometry()?;
    let profile = PhaseProfile::new(cfg.codebook()?, file.indices)?;
    let links = cfg.links()?;
    let pat = beam_pattern(
        &geometry,
        links[beam_index].incident(),
        &profile,
        &parse_grid(grid)?,
        beam.aod.el_deg,
    )?;
    fs::write(out, io::pattern_csv(&pat))?;
    Ok(())
}

fn run(cli: Cli) -> lcris::Result<()> {
    match cli.command {
        Command::FitModel {
            samples,
            breakpoints,
            out,
        } => {
            let model = fit_model(&io::read_samples_csv(&samples)?, breakpoints)?;
            io::write_model_json(&model, &out)
        }
        Command::Solve { method, config, out } => solve(method, &config, &out),
        Command::Pattern {
            config,
            profile,
            grid,
            out,
        } => pattern(&config, &profile, &grid, &out),
        Command::Experiment { name, config, out } => {
            let cfg = io::load_config(&config)?;
            let setup = cfg.experiment_setup(config_dir(&config))?;
            Experiment::from(name).run(&setup)?.write_dir(&out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            diagnostic(json!({ "error": "usage", "message": e.to_string() }));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            diagnostic(error_json(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
