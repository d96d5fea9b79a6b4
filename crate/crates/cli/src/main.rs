use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use phasefrac::io::{
    bar_chart_svg, load_dataset, load_library, phase_curves_svg, read_spectrum_file,
    save_library, write_atomic, write_bar_data, write_dataset, write_json, write_phase_curves,
    write_predictions, IoError, PhaseOverlay,
};
use phasefrac::solver::{estimate_composition, fit_phase_library, Init, SolverConfig, SolverError};
use phasefrac::spectra::CoreError;
use phasefrac::synth::{SynthError, SynthPlan};
use phasefrac::validation::{loocv_with_jobs, resubstitution, ValidationError};
use phasefrac::{EvalReport, FitTrace, Spectrum};

/// A manifest fraction at least this close to 1 marks a monophase sample.
const PURE_FRACTION: f64 = 1.0 - 1e-6;

#[derive(Debug, Parser)]
#[command(name = "phasefrac", version, about = "Phase fractions from powder diffraction spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn one pattern per phase from a labelled manifest.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        /// Library file to write.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Estimate the phase fractions of one spectrum.
    Predict {
        #[arg(long)]
        library: PathBuf,
        #[arg(long)]
        spectrum: PathBuf,
        /// Also write the table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Leave-one-out cross-validation.
    Cv {
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory for predictions, bar-chart data and the report.
        #[arg(long)]
        out: PathBuf,
        /// Folds run concurrently on this many threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Fit on every sample and score the same samples.
    Resub {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Write a seeded synthetic dataset and its ground-truth library.
    Synth {
        #[arg(long, value_enum, conflicts_with = "config", required_unless_present = "config")]
        preset: Option<Preset>,
        /// JSON plan file, as an alternative to a preset.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the plan's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Per-phase curve files and a plot of a library.
    ExportPhases {
        #[arg(long)]
        library: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overlay the monophase samples of this manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    PaperShaped,
    CiSmall,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum InitArg {
    Mean,
    Random,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Convergence tolerance.
    #[arg(long, default_value_t = SolverConfig::default().convergence_tol)]
    tol: f64,
    #[arg(long, default_value_t = SolverConfig::default().max_iterations)]
    max_iters: usize,
    /// Seed for random pattern initialization.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "mean")]
    init: InitArg,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig, CliError> {
        let config = SolverConfig {
            max_iterations: self.max_iters,
            convergence_tol: self.tol,
            init_seed: self.seed,
            init: match self.init {
                InitArg::Mean => Init::WeightedMean,
                InitArg::Random => Init::Random,
            },
        };
        config
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(config)
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) | CliError::Core(_) | CliError::Synth(_) => 2,
            CliError::Solver(e) => solver_code(e),
            CliError::Validation(e) => match e {
                ValidationError::Fold { source, .. } | ValidationError::Solver(source) => {
                    solver_code(source)
                }
                ValidationError::ThreadPool(_) => 3,
                _ => 2,
            },
        }
    }
}

fn solver_code(e: &SolverError) -> u8 {
    match e {
        // bad inputs rather than a failed fit
        SolverError::DimensionMismatch(_) | SolverError::Core(_) => 2,
        SolverError::InvalidConfig(_) => 1,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Train {
            manifest,
            out,
            solver,
        } => train(&manifest, &out, &solver.config()?),
        Command::Predict {
            library,
            spectrum,
            out,
            solver,
        } => predict(&library, &spectrum, out.as_deref(), &solver.config()?),
        Command::Cv {
            manifest,
            out,
            jobs,
            solver,
        } => cv(&manifest, &out, jobs, &solver.config()?),
        Command::Resub {
            manifest,
            out,
            solver,
        } => resub(&manifest, out.as_deref(), &solver.config()?),
        Command::Synth {
            preset,
            config,
            out,
            seed,
        } => synth(preset, config.as_deref(), &out, seed),
        Command::ExportPhases {
            library,
            out,
            manifest,
        } => export_phases(&library, &out, manifest.as_deref()),
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| {
        CliError::Io(IoError::Io {
            path: dir.to_path_buf(),
            source,
        })
    })
}

fn print_trace(label: &str, trace: &FitTrace) {
    println!(
        "{label}: {} sweeps, converged {}, objective {:e} -> {:e}",
        trace.sweeps_used,
        trace.converged,
        trace.initial_objective,
        trace.final_objective()
    );
}

fn print_report(report: &EvalReport) {
    println!("mean rho: {}", report.mean_rho);
    println!("mae: {}", report.mae);
    println!("mean cosine: {}", report.mean_cosine);
    println!("dominant accuracy: {}", report.dominant_accuracy);
}

fn train(manifest: &Path, out: &Path, config: &SolverConfig) -> Result<(), CliError> {
    let dataset = load_dataset(manifest)?;
    let (library, trace) = fit_phase_library(&dataset, config)?;
    save_library(&library, out)?;
    print_trace("training", &trace);
    println!("library written to {}", out.display());
    Ok(())
}

fn predict(
    library: &Path,
    spectrum: &Path,
    out: Option<&Path>,
    config: &SolverConfig,
) -> Result<(), CliError> {
    let library = load_library(library)?;
    let xy = read_spectrum_file(spectrum)?;
    let grid = library.grid();
    let same = xy.angles.len() == grid.len()
        && grid
            .angles()
            .iter()
            .zip(&xy.angles)
            .all(|(a, b)| a.to_bits() == b.to_bits());
    if !same {
        return Err(CoreError::GridMismatch(format!(
            "{} is not on the library's angle grid",
            spectrum.display()
        ))
        .into());
    }
    let label = spectrum.display().to_string();
    let spectrum = Spectrum::new(&label, xy.intensities, Arc::clone(grid))?;
    let (composition, _) = estimate_composition(&spectrum, &library, config)?;

    let mut table = String::from("phase,fraction\n");
    for (name, f) in library.phase_names().iter().zip(composition.fractions()) {
        println!("{name}\t{f}");
        table.push_str(&format!("{name},{f}\n"));
    }
    if let Some(out) = out {
        write_atomic(out, table.as_bytes())?;
    }
    Ok(())
}

fn cv(manifest: &Path, out: &Path, jobs: usize, config: &SolverConfig) -> Result<(), CliError> {
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let dataset = load_dataset(manifest)?;
    let result = loocv_with_jobs(&dataset, config, jobs)?;
    create_dir(out)?;
    let ids: Vec<String> = result.fold_predictions.iter().map(|(id, _)| id.clone()).collect();
    let predictions = result.predictions();
    let actuals = dataset.compositions();
    write_predictions(
        &out.join("predictions.csv"),
        dataset.phase_names(),
        &result.fold_predictions,
    )?;
    write_bar_data(&out.join("figure1_bars.csv"), &ids, &actuals, &predictions)?;
    write_atomic(
        &out.join("figure1.svg"),
        bar_chart_svg(&ids, &actuals, &predictions).as_bytes(),
    )?;
    write_json(&out.join("report.json"), &result.report)?;

    for ((id, train), infer) in ids
        .iter()
        .zip(&result.per_fold_traces)
        .zip(&result.per_fold_inference)
    {
        println!(
            "fold {id}: training {} sweeps, inference {} sweeps",
            train.sweeps_used, infer.sweeps_used
        );
    }
    print_report(&result.report);
    Ok(())
}

fn resub(manifest: &Path, out: Option<&Path>, config: &SolverConfig) -> Result<(), CliError> {
    let dataset = load_dataset(manifest)?;
    let result = resubstitution(&dataset, config)?;
    if let Some(out) = out {
        create_dir(out)?;
        write_predictions(
            &out.join("predictions.csv"),
            dataset.phase_names(),
            &result.predictions,
        )?;
        write_json(&out.join("report.json"), &result.report)?;
    }
    print_trace("training", &result.train_trace);
    print_report(&result.report);
    Ok(())
}

fn synth(
    preset: Option<Preset>,
    config: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let mut plan = match (preset, config) {
        (Some(Preset::PaperShaped), _) => SynthPlan::paper_shaped(),
        (Some(Preset::CiSmall), _) => SynthPlan::ci_small(),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|source| {
                if source.kind() == std::io::ErrorKind::NotFound {
                    IoError::MissingFile(path.to_path_buf())
                } else {
                    IoError::Io {
                        path: path.to_path_buf(),
                        source,
                    }
                }
            })?;
            serde_json::from_str(&text).map_err(|e| IoError::Parse {
                path: path.to_path_buf(),
                line: Some(e.line() as u64),
                message: e.to_string(),
            })?
        }
        (None, None) => return Err(CliError::Usage("give --preset or --config".into())),
    };
    if let Some(seed) = seed {
        plan.seed = seed;
    }
    let (library, dataset) = plan.generate()?;
    create_dir(out)?;
    let manifest = write_dataset(&dataset, out, "manifest.csv")?;
    save_library(&library, &out.join("library.json"))?;
    println!(
        "{} samples, {} phases, {} angles written to {}",
        dataset.num_samples(),
        dataset.num_phases(),
        dataset.num_angles(),
        manifest.display()
    );
    Ok(())
}

fn export_phases(library: &Path, out: &Path, manifest: Option<&Path>) -> Result<(), CliError> {
    let library = load_library(library)?;
    let mut overlays = Vec::new();
    if let Some(manifest) = manifest {
        let dataset = load_dataset(manifest)?;
        if !dataset.grid().same_as(library.grid()) {
            return Err(CoreError::GridMismatch(format!(
                "{} is not on the library's angle grid",
                manifest.display()
            ))
            .into());
        }
        if dataset.phase_names() != library.phase_names() {
            return Err(CoreError::PhaseMismatch(format!(
                "{} and the library name different phases",
                manifest.display()
            ))
            .into());
        }
        for s in dataset.samples() {
            let j = s.composition.dominant_phase();
            if s.composition.fractions()[j] >= PURE_FRACTION {
                overlays.push(PhaseOverlay {
                    phase: j,
                    sample_id: s.id.clone(),
                    intensities: s.spectrum.intensities().to_vec(),
                });
            }
        }
    }
    create_dir(out)?;
    let written = write_phase_curves(out, &library, &overlays)?;
    write_atomic(
        &out.join("figure2.svg"),
        phase_curves_svg(&library, &overlays).as_bytes(),
    )?;
    println!(
        "{} phase curves written to {} ({} monophase overlays)",
        written.len(),
        out.display(),
        overlays.len()
    );
    Ok(())
}
