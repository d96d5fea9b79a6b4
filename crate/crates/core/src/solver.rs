//! Non-negative coordinate descent for the linear mixing model
//! `y_i(s) ≈ Σ_j α_j(s) x_i(j)`.
//!
//! Training holds the fractions α fixed and learns the monophase patterns x;
//! inference holds x fixed and estimates α for one spectrum, projecting back
//! onto the simplex after every sweep. Each coordinate update is the exact
//! one-dimensional minimizer of the squared error, clipped at zero.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::spectra::{normalize_weights, Composition, CoreError, Dataset, PhaseLibrary, Spectrum};

/// Floor of the denominator in the relative objective change.
const REL_CHANGE_FLOOR: f64 = 1e-30;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),
    #[error("UnobservedPhase: phase `{name}` (index {index}) never appears in the training labels")]
    UnobservedPhase { index: usize, name: String },
    #[error("ZeroPattern: library pattern `{name}` (index {index}) is identically zero")]
    ZeroPattern { index: usize, name: String },
    #[error("DegenerateFit: every phase fraction clipped to zero in sweep {sweep}")]
    DegenerateFit { sweep: usize },
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// How the training patterns are seeded before the first sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Init {
    /// α-weighted mean of the training spectra.
    #[default]
    WeightedMean,
    /// Uniform random values in `[0, max intensity]`, drawn from `init_seed`.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Relative objective change for training, L∞ change in α for inference.
    pub convergence_tol: f64,
    pub init_seed: u64,
    pub init: Init,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            convergence_tol: 1e-8,
            init_seed: 0,
            init: Init::WeightedMean,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.max_iterations == 0 {
            return Err(SolverError::InvalidConfig("max_iterations must be ≥ 1".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(SolverError::InvalidConfig("convergence_tol must be > 0".into()));
        }
        Ok(())
    }
}

/// Objective history of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitTrace {
    /// E² before the first sweep.
    pub initial_objective: f64,
    /// E² after each full sweep (after renormalization, for inference).
    pub objective_per_sweep: Vec<f64>,
    pub sweeps_used: usize,
    pub converged: bool,
}

impl FitTrace {
    pub fn final_objective(&self) -> f64 {
        self.objective_per_sweep
            .last()
            .copied()
            .unwrap_or(self.initial_objective)
    }
}

fn check_training_dims(
    dataset: &Dataset,
    library: &PhaseLibrary,
    compositions: &[Composition],
) -> Result<(), SolverError> {
    if compositions.len() != dataset.num_samples() {
        return Err(SolverError::DimensionMismatch(format!(
            "{} compositions for {} samples",
            compositions.len(),
            dataset.num_samples()
        )));
    }
    if library.num_angles() != dataset.num_angles() || !library.grid().same_as(dataset.grid()) {
        return Err(SolverError::DimensionMismatch(
            "library and dataset grids differ".into(),
        ));
    }
    if let Some(c) = compositions.iter().find(|c| c.len() != library.num_phases()) {
        return Err(SolverError::DimensionMismatch(format!(
            "composition over {} phases, library has {}",
            c.len(),
            library.num_phases()
        )));
    }
    Ok(())
}

/// Squared residual of one spectrum against `Σ_j weights_j · pattern_j`.
pub fn spectrum_sse(
    spectrum: &[f64],
    library: &PhaseLibrary,
    weights: &[f64],
) -> Result<f64, SolverError> {
    if spectrum.len() != library.num_angles() || weights.len() != library.num_phases() {
        return Err(SolverError::DimensionMismatch(format!(
            "spectrum of length {} / {} weights against a {}x{} library",
            spectrum.len(),
            weights.len(),
            library.num_phases(),
            library.num_angles()
        )));
    }
    Ok(residual_sse(spectrum, library.patterns(), weights))
}

fn residual_sse(spectrum: &[f64], patterns: &[Vec<f64>], weights: &[f64]) -> f64 {
    spectrum
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let model: f64 = patterns.iter().zip(weights).map(|(x, a)| a * x[i]).sum();
            let r = y - model;
            r * r
        })
        .sum()
}

/// E² summed over every sample and angle.
pub fn sse(
    dataset: &Dataset,
    library: &PhaseLibrary,
    compositions: &[Composition],
) -> Result<f64, SolverError> {
    check_training_dims(dataset, library, compositions)?;
    Ok(dataset
        .samples()
        .iter()
        .zip(compositions)
        .map(|(s, c)| residual_sse(s.spectrum.intensities(), library.patterns(), c.fractions()))
        .sum())
}

/// Exact minimizer of E² over the single coordinate `x_i(j)`, clipped at 0:
///
/// `max{ Σ_s α_j(s) (y_i(s) − Σ_{j'≠j} α_j'(s) x_i(j')) / Σ_s α_j(s)², 0 }`
pub fn update_phase_intensity(
    i: usize,
    j: usize,
    dataset: &Dataset,
    library: &PhaseLibrary,
    compositions: &[Composition],
) -> Result<f64, SolverError> {
    check_training_dims(dataset, library, compositions)?;
    if i >= library.num_angles() || j >= library.num_phases() {
        return Err(SolverError::DimensionMismatch(format!(
            "coordinate ({i}, {j}) outside a {}x{} library",
            library.num_angles(),
            library.num_phases()
        )));
    }
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for (s, c) in dataset.samples().iter().zip(compositions) {
        let alpha = c.fractions();
        let others: f64 = (0..alpha.len())
            .filter(|&jj| jj != j)
            .map(|jj| alpha[jj] * library.pattern(jj)[i])
            .sum();
        numerator += alpha[j] * (s.spectrum.intensities()[i] - others);
        denominator += alpha[j] * alpha[j];
    }
    if denominator <= 0.0 {
        return Err(unobserved(j, library.phase_names()));
    }
    Ok((numerator / denominator).max(0.0))
}

fn unobserved(index: usize, names: &[String]) -> SolverError {
    SolverError::UnobservedPhase {
        index,
        name: names[index].clone(),
    }
}

/// Learns one pattern per phase from the labelled dataset.
pub fn fit_phase_library(
    dataset: &Dataset,
    config: &SolverConfig,
) -> Result<(PhaseLibrary, FitTrace), SolverError> {
    config.validate()?;
    let energy = dataset.phase_energy();
    if let Some(j) = energy.iter().position(|&e| e <= 0.0) {
        return Err(unobserved(j, dataset.phase_names()));
    }
    let initial = match config.init {
        Init::WeightedMean => weighted_mean_patterns(dataset),
        Init::Random => random_patterns(dataset, config.init_seed),
    };
    fit_from(dataset, initial, config)
}

/// Training started from a caller-supplied library instead of the default
/// initialization.
pub fn fit_phase_library_from(
    dataset: &Dataset,
    initial: &PhaseLibrary,
    config: &SolverConfig,
) -> Result<(PhaseLibrary, FitTrace), SolverError> {
    config.validate()?;
    check_training_dims(dataset, initial, &dataset.compositions())?;
    if !initial.accepts_composition(&dataset.samples()[0].composition) {
        return Err(SolverError::DimensionMismatch(
            "initial library covers different phases".into(),
        ));
    }
    let energy = dataset.phase_energy();
    if let Some(j) = energy.iter().position(|&e| e <= 0.0) {
        return Err(unobserved(j, dataset.phase_names()));
    }
    fit_from(dataset, initial.patterns().to_vec(), config)
}

fn weighted_mean_patterns(dataset: &Dataset) -> Vec<Vec<f64>> {
    let m = dataset.num_phases();
    let k = dataset.num_angles();
    let mut patterns = vec![vec![0.0; k]; m];
    let mut weight = vec![0.0; m];
    for s in dataset.samples() {
        let y = s.spectrum.intensities();
        for (j, &a) in s.composition.fractions().iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            weight[j] += a;
            for (x, v) in patterns[j].iter_mut().zip(y) {
                *x += a * v;
            }
        }
    }
    for (p, w) in patterns.iter_mut().zip(&weight) {
        p.iter_mut().for_each(|x| *x /= w);
    }
    patterns
}

fn random_patterns(dataset: &Dataset, seed: u64) -> Vec<Vec<f64>> {
    let peak = dataset
        .samples()
        .iter()
        .flat_map(|s| s.spectrum.intensities().iter().copied())
        .fold(0.0_f64, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dataset.num_phases())
        .map(|_| {
            (0..dataset.num_angles())
                .map(|_| rng.random::<f64>() * peak)
                .collect()
        })
        .collect()
}

/// Precomputed sufficient statistics for training: the label Gram matrix
/// `G = Σ_s α(s) α(s)ᵀ` and the projections `b_i(j) = Σ_s α_j(s) y_i(s)`.
/// With these, one coordinate update costs O(M) instead of O(N·M).
struct TrainingStats {
    gram: Vec<Vec<f64>>,
    /// `proj[j][i]`
    proj: Vec<Vec<f64>>,
}

impl TrainingStats {
    fn new(dataset: &Dataset) -> Self {
        let m = dataset.num_phases();
        let k = dataset.num_angles();
        let mut gram = vec![vec![0.0; m]; m];
        let mut proj = vec![vec![0.0; k]; m];
        for s in dataset.samples() {
            let alpha = s.composition.fractions();
            for a in 0..m {
                for b in 0..m {
                    gram[a][b] += alpha[a] * alpha[b];
                }
                if alpha[a] != 0.0 {
                    for (p, y) in proj[a].iter_mut().zip(s.spectrum.intensities()) {
                        *p += alpha[a] * y;
                    }
                }
            }
        }
        Self { gram, proj }
    }
}

fn training_objective(dataset: &Dataset, patterns: &[Vec<f64>]) -> f64 {
    dataset
        .samples()
        .iter()
        .map(|s| residual_sse(s.spectrum.intensities(), patterns, s.composition.fractions()))
        .sum()
}

fn fit_from(
    dataset: &Dataset,
    mut patterns: Vec<Vec<f64>>,
    config: &SolverConfig,
) -> Result<(PhaseLibrary, FitTrace), SolverError> {
    let m = dataset.num_phases();
    let k = dataset.num_angles();
    let stats = TrainingStats::new(dataset);

    let initial_objective = training_objective(dataset, &patterns);
    let mut previous = initial_objective;
    let mut objective_per_sweep = Vec::new();
    let mut converged = false;

    for _ in 0..config.max_iterations {
        for j in 0..m {
            let g = &stats.gram[j];
            for i in 0..k {
                let mut numerator = stats.proj[j][i];
                for jj in 0..m {
                    if jj != j {
                        numerator -= g[jj] * patterns[jj][i];
                    }
                }
                patterns[j][i] = (numerator / g[j]).max(0.0);
            }
        }
        let objective = training_objective(dataset, &patterns);
        objective_per_sweep.push(objective);
        let change = (previous - objective).abs() / previous.max(REL_CHANGE_FLOOR);
        previous = objective;
        if change < config.convergence_tol {
            converged = true;
            break;
        }
    }

    let library = PhaseLibrary::new(
        patterns,
        Arc::clone(dataset.phase_names()),
        Arc::clone(dataset.grid()),
    )?;
    let trace = FitTrace {
        initial_objective,
        sweeps_used: objective_per_sweep.len(),
        objective_per_sweep,
        converged,
    };
    Ok((library, trace))
}

fn check_spectrum(spectrum: &Spectrum, library: &PhaseLibrary) -> Result<(), SolverError> {
    if !library.accepts_spectrum(spectrum) {
        return Err(SolverError::Core(CoreError::GridMismatch(
            "spectrum grid differs from the library grid".into(),
        )));
    }
    Ok(())
}

fn check_patterns(library: &PhaseLibrary) -> Result<(), SolverError> {
    match library
        .patterns()
        .iter()
        .position(|p| p.iter().all(|&v| v == 0.0))
    {
        Some(index) => Err(SolverError::ZeroPattern {
            index,
            name: library.phase_names()[index].clone(),
        }),
        None => Ok(()),
    }
}

/// Exact minimizer of the spectrum's E² over the single weight `α_j`,
/// clipped at 0:
///
/// `max{ Σ_i x_i(j) (y_i − Σ_{j'≠j} α_j' x_i(j')) / Σ_i x_i(j)², 0 }`
pub fn update_fraction(
    j: usize,
    spectrum: &Spectrum,
    library: &PhaseLibrary,
    alpha: &[f64],
) -> Result<f64, SolverError> {
    check_spectrum(spectrum, library)?;
    if alpha.len() != library.num_phases() || j >= library.num_phases() {
        return Err(SolverError::DimensionMismatch(format!(
            "phase {j} / {} weights for {} phases",
            alpha.len(),
            library.num_phases()
        )));
    }
    let x = library.pattern(j);
    let denominator: f64 = x.iter().map(|v| v * v).sum();
    if denominator <= 0.0 {
        return Err(SolverError::ZeroPattern {
            index: j,
            name: library.phase_names()[j].clone(),
        });
    }
    let numerator: f64 = spectrum
        .intensities()
        .iter()
        .enumerate()
        .map(|(i, y)| {
            let others: f64 = (0..alpha.len())
                .filter(|&jj| jj != j)
                .map(|jj| alpha[jj] * library.pattern(jj)[i])
                .sum();
            x[i] * (y - others)
        })
        .sum();
    Ok((numerator / denominator).max(0.0))
}

/// Pattern Gram matrix `P = X Xᵀ`, reusable across spectra for one library.
#[derive(Debug, Clone)]
pub struct InferenceModel<'a> {
    library: &'a PhaseLibrary,
    gram: Vec<Vec<f64>>,
}

impl<'a> InferenceModel<'a> {
    pub fn new(library: &'a PhaseLibrary) -> Result<Self, SolverError> {
        check_patterns(library)?;
        let m = library.num_phases();
        let mut gram = vec![vec![0.0; m]; m];
        for a in 0..m {
            for b in a..m {
                let v: f64 = library
                    .pattern(a)
                    .iter()
                    .zip(library.pattern(b))
                    .map(|(p, q)| p * q)
                    .sum();
                gram[a][b] = v;
                gram[b][a] = v;
            }
        }
        Ok(Self { library, gram })
    }

    pub fn library(&self) -> &PhaseLibrary {
        self.library
    }

    /// Fixed-point iteration: one coordinate sweep over the phases in
    /// declared order, then rescale onto the simplex. Stops when no
    /// fraction moves by `convergence_tol` or more across a sweep.
    pub fn estimate(
        &self,
        spectrum: &Spectrum,
        config: &SolverConfig,
    ) -> Result<(Composition, FitTrace), SolverError> {
        config.validate()?;
        check_spectrum(spectrum, self.library)?;
        let m = self.library.num_phases();
        let y = spectrum.intensities();
        let proj: Vec<f64> = self
            .library
            .patterns()
            .iter()
            .map(|x| x.iter().zip(y).map(|(a, b)| a * b).sum())
            .collect();

        let mut alpha = vec![1.0 / m as f64; m];
        let initial_objective = residual_sse(y, self.library.patterns(), &alpha);
        let mut objective_per_sweep = Vec::new();
        let mut converged = false;

        for sweep in 1..=config.max_iterations {
            let before = alpha.clone();
            for j in 0..m {
                let g = &self.gram[j];
                let mut numerator = proj[j];
                for jj in 0..m {
                    if jj != j {
                        numerator -= g[jj] * alpha[jj];
                    }
                }
                alpha[j] = (numerator / g[j]).max(0.0);
            }
            alpha = match normalize_weights(&alpha) {
                Ok(a) => a,
                Err(CoreError::AllZero) => return Err(SolverError::DegenerateFit { sweep }),
                Err(e) => return Err(e.into()),
            };
            objective_per_sweep.push(residual_sse(y, self.library.patterns(), &alpha));
            let change = alpha
                .iter()
                .zip(&before)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if change < config.convergence_tol {
                converged = true;
                break;
            }
        }

        let composition = Composition::new(alpha, Arc::clone(self.library.phase_names()))?;
        let trace = FitTrace {
            initial_objective,
            sweeps_used: objective_per_sweep.len(),
            objective_per_sweep,
            converged,
        };
        Ok((composition, trace))
    }
}

/// Estimates the phase fractions of one spectrum against a fitted library.
pub fn estimate_composition(
    spectrum: &Spectrum,
    library: &PhaseLibrary,
    config: &SolverConfig,
) -> Result<(Composition, FitTrace), SolverError> {
    InferenceModel::new(library)?.estimate(spectrum, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{phase_names, validate_dataset, AngleGrid, RawSample};

    fn grid(k: usize) -> Arc<AngleGrid> {
        Arc::new(AngleGrid::linspace(0.0, 1.0, k).unwrap())
    }

    fn dataset(rows: &[(&[f64], &[f64])], m: usize) -> Dataset {
        let k = rows[0].0.len();
        let raw = rows
            .iter()
            .enumerate()
            .map(|(s, (y, a))| RawSample {
                id: format!("s{s}"),
                intensities: y.to_vec(),
                fractions: a.to_vec(),
            })
            .collect();
        validate_dataset(raw, grid(k), phase_names((0..m).map(|j| format!("p{j}")))).unwrap()
    }

    fn library(ds: &Dataset, patterns: Vec<Vec<f64>>) -> PhaseLibrary {
        PhaseLibrary::new(patterns, ds.phase_names().clone(), ds.grid().clone()).unwrap()
    }

    #[test]
    fn sse_examples() {
        let ds = dataset(&[(&[1.0, 0.0], &[1.0])], 1);
        let lib = library(&ds, vec![vec![0.0, 0.0]]);
        assert_eq!(sse(&ds, &lib, &ds.compositions()).unwrap(), 1.0);

        let ds = dataset(&[(&[1.0, 2.0], &[0.5, 0.5])], 2);
        let lib = library(&ds, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!((sse(&ds, &lib, &ds.compositions()).unwrap() - 2.5).abs() < 1e-15);

        let ds = dataset(&[(&[1.0, 2.0], &[1.0, 0.0]), (&[3.0, 1.0], &[0.0, 1.0])], 2);
        let lib = library(&ds, vec![vec![1.0, 2.0], vec![3.0, 1.0]]);
        assert_eq!(sse(&ds, &lib, &ds.compositions()).unwrap(), 0.0);
        assert!(matches!(
            sse(&ds, &lib, &ds.compositions()[..1]),
            Err(SolverError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn update_phase_intensity_pure_samples_average() {
        let ds = dataset(&[(&[1.0, 4.0], &[1.0]), (&[3.0, 2.0], &[1.0])], 1);
        let lib = library(&ds, vec![vec![0.0, 0.0]]);
        let c = ds.compositions();
        assert_eq!(update_phase_intensity(0, 0, &ds, &lib, &c).unwrap(), 2.0);
        assert_eq!(update_phase_intensity(1, 0, &ds, &lib, &c).unwrap(), 3.0);
    }

    #[test]
    fn update_phase_intensity_clips_negative() {
        // the other phase already over-explains the reading
        let ds = dataset(&[(&[1.0], &[0.5, 0.5])], 2);
        let lib = library(&ds, vec![vec![0.0], vec![10.0]]);
        assert_eq!(
            update_phase_intensity(0, 0, &ds, &lib, &ds.compositions()).unwrap(),
            0.0
        );
    }

    #[test]
    fn update_phase_intensity_matches_brute_force_line_search() {
        let ds = dataset(&[(&[1.0], &[1.0, 0.0]), (&[2.0], &[0.0, 1.0])], 2);
        let c = ds.compositions();
        let lib = library(&ds, vec![vec![0.0], vec![2.0]]);
        let closed = update_phase_intensity(0, 0, &ds, &lib, &c).unwrap();
        assert_eq!(closed, 1.0);

        let mut best = (f64::INFINITY, 0.0);
        for step in 0..=40_000 {
            let v = step as f64 * 1e-4;
            let trial = library(&ds, vec![vec![v], vec![2.0]]);
            let e = sse(&ds, &trial, &c).unwrap();
            if e < best.0 {
                best = (e, v);
            }
        }
        assert!((best.1 - closed).abs() <= 1e-4);
    }

    #[test]
    fn unobserved_phase_is_an_error() {
        let ds = dataset(
            &[(&[1.0, 1.0], &[1.0, 0.0, 0.0]), (&[1.0, 2.0], &[0.5, 0.5, 0.0])],
            3,
        );
        assert_eq!(
            fit_phase_library(&ds, &SolverConfig::default()).unwrap_err(),
            SolverError::UnobservedPhase {
                index: 2,
                name: "p2".into()
            }
        );
        let lib = library(&ds, vec![vec![1.0, 1.0]; 3]);
        assert!(matches!(
            update_phase_intensity(0, 2, &ds, &lib, &ds.compositions()),
            Err(SolverError::UnobservedPhase { index: 2, .. })
        ));
    }

    #[test]
    fn pure_samples_are_interpolated_in_one_sweep() {
        let ds = dataset(
            &[
                (&[1.0, 0.0, 2.0], &[1.0, 0.0]),
                (&[0.0, 3.0, 1.0], &[0.0, 1.0]),
            ],
            2,
        );
        let (lib, trace) = fit_phase_library(&ds, &SolverConfig::default()).unwrap();
        assert_eq!(lib.pattern(0), &[1.0, 0.0, 2.0]);
        assert_eq!(lib.pattern(1), &[0.0, 3.0, 1.0]);
        assert_eq!(trace.sweeps_used, 1);
        assert!(trace.converged);
        assert_eq!(trace.final_objective(), 0.0);
    }

    #[test]
    fn random_init_is_seeded() {
        let ds = dataset(
            &[
                (&[1.0, 0.5, 2.0], &[0.7, 0.3]),
                (&[0.2, 3.0, 1.0], &[0.1, 0.9]),
                (&[0.6, 1.0, 1.0], &[0.5, 0.5]),
            ],
            2,
        );
        let cfg = SolverConfig {
            init: Init::Random,
            init_seed: 7,
            ..Default::default()
        };
        let a = fit_phase_library(&ds, &cfg).unwrap();
        let b = fit_phase_library(&ds, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn config_validation() {
        let ds = dataset(&[(&[1.0], &[1.0])], 1);
        let bad = SolverConfig {
            max_iterations: 0,
            ..Default::default()
        };
        assert!(matches!(
            fit_phase_library(&ds, &bad),
            Err(SolverError::InvalidConfig(_))
        ));
        let bad = SolverConfig {
            convergence_tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    fn spectrum(y: &[f64]) -> Spectrum {
        Spectrum::new("y", y.to_vec(), grid(y.len())).unwrap()
    }

    fn lib3(k: usize, patterns: Vec<Vec<f64>>) -> PhaseLibrary {
        let m = patterns.len();
        PhaseLibrary::new(
            patterns,
            phase_names((0..m).map(|j| format!("p{j}"))),
            grid(k),
        )
        .unwrap()
    }

    #[test]
    fn update_fraction_examples() {
        let lib = lib3(3, vec![vec![1.0, 2.0, 0.0], vec![0.0, 1.0, 1.0]]);
        let y = spectrum(&[1.0, 2.0, 0.0]);
        assert!((update_fraction(0, &y, &lib, &[0.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);

        let y = spectrum(&[0.0, 0.0, 5.0]);
        assert_eq!(update_fraction(0, &y, &lib, &[0.0, 0.0]).unwrap(), 0.0);

        let lib = lib3(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let y = spectrum(&[0.3, 0.7]);
        assert!((update_fraction(0, &y, &lib, &[0.0, 0.7]).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn zero_pattern_rejected() {
        let lib = lib3(2, vec![vec![1.0, 0.0], vec![0.0, 0.0]]);
        let y = spectrum(&[0.3, 0.7]);
        assert!(matches!(
            update_fraction(1, &y, &lib, &[0.5, 0.5]),
            Err(SolverError::ZeroPattern { index: 1, .. })
        ));
        assert!(matches!(
            estimate_composition(&y, &lib, &SolverConfig::default()),
            Err(SolverError::ZeroPattern { index: 1, .. })
        ));
    }

    #[test]
    fn single_phase_always_one() {
        let lib = lib3(3, vec![vec![1.0, 2.0, 3.0]]);
        for scale in [1e-3, 1.0, 1e4] {
            let y = spectrum(&[scale, 0.5 * scale, 7.0 * scale]);
            let (c, _) = estimate_composition(&y, &lib, &SolverConfig::default()).unwrap();
            assert_eq!(c.fractions(), &[1.0]);
        }
    }

    #[test]
    fn orthogonal_spectrum_is_degenerate() {
        let lib = lib3(3, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        let y = spectrum(&[0.0, 0.0, 1.0]);
        assert_eq!(
            estimate_composition(&y, &lib, &SolverConfig::default()).unwrap_err(),
            SolverError::DegenerateFit { sweep: 1 }
        );
    }

    #[test]
    fn estimate_rejects_foreign_grid() {
        let lib = lib3(3, vec![vec![1.0, 0.0, 0.0]]);
        let other = Arc::new(AngleGrid::linspace(0.0, 2.0, 3).unwrap());
        let y = Spectrum::new("y", vec![1.0, 0.0, 0.0], other).unwrap();
        assert!(matches!(
            estimate_composition(&y, &lib, &SolverConfig::default()),
            Err(SolverError::Core(CoreError::GridMismatch(_)))
        ));
    }
}
