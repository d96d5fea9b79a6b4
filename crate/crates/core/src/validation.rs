//! Leave-one-out cross-validation and resubstitution scoring.

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::metrics::{EvalReport, MetricsError};
use crate::solver::{
    estimate_composition, fit_phase_library, FitTrace, InferenceModel, SolverConfig, SolverError,
};
use crate::spectra::{Composition, Dataset};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ValidationError {
    #[error("NotEnoughSamples: cross-validation needs at least 2 samples, got {0}")]
    NotEnoughSamples(usize),
    #[error(
        "PhaseDropout: holding out sample `{sample}` (fold {fold}) leaves phase `{phase}` with no training support"
    )]
    PhaseDropout {
        fold: usize,
        sample: String,
        phase: String,
    },
    #[error("fold {fold} (sample `{sample}`): {source}")]
    Fold {
        fold: usize,
        sample: String,
        #[source]
        source: SolverError,
    },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone)]
pub struct CvResult {
    /// Held-out sample id and its prediction, in dataset order.
    pub fold_predictions: Vec<(String, Composition)>,
    pub report: EvalReport,
    /// Training trace of each fold.
    pub per_fold_traces: Vec<FitTrace>,
    /// Inference trace of each held-out prediction.
    pub per_fold_inference: Vec<FitTrace>,
    pub wall_time: f64,
}

impl CvResult {
    pub fn predictions(&self) -> Vec<Composition> {
        self.fold_predictions.iter().map(|(_, c)| c.clone()).collect()
    }
}

/// Every `(fold, phase)` pair for which the training split of that fold has
/// no sample containing the phase.
pub fn fold_dropouts(dataset: &Dataset) -> Vec<(usize, usize)> {
    let mut support = vec![0usize; dataset.num_phases()];
    for s in dataset.samples() {
        for (c, &a) in support.iter_mut().zip(s.composition.fractions()) {
            if a > 0.0 {
                *c += 1;
            }
        }
    }
    let mut out = Vec::new();
    for (k, s) in dataset.samples().iter().enumerate() {
        for (j, &a) in s.composition.fractions().iter().enumerate() {
            let remaining = support[j] - usize::from(a > 0.0);
            if remaining == 0 {
                out.push((k, j));
            }
        }
    }
    out
}

fn run_fold(
    dataset: &Dataset,
    fold: usize,
    config: &SolverConfig,
) -> Result<(Composition, FitTrace, FitTrace), ValidationError> {
    let held_out = &dataset.samples()[fold];
    let wrap = |source| ValidationError::Fold {
        fold,
        sample: held_out.id.clone(),
        source,
    };
    // The training split is built without the held-out sample.
    let training = dataset
        .without(fold)
        .ok_or(ValidationError::NotEnoughSamples(dataset.num_samples()))?;
    let (library, train_trace) = fit_phase_library(&training, config).map_err(wrap)?;
    let (prediction, infer_trace) =
        estimate_composition(&held_out.spectrum, &library, config).map_err(wrap)?;
    Ok((prediction, train_trace, infer_trace))
}

/// Leave-one-out cross-validation with folds run sequentially.
pub fn loocv(dataset: &Dataset, config: &SolverConfig) -> Result<CvResult, ValidationError> {
    loocv_with_jobs(dataset, config, 1)
}

/// Leave-one-out cross-validation on up to `jobs` worker threads. Results
/// are collected in dataset order, so they do not depend on `jobs`.
pub fn loocv_with_jobs(
    dataset: &Dataset,
    config: &SolverConfig,
    jobs: usize,
) -> Result<CvResult, ValidationError> {
    let n = dataset.num_samples();
    if n < 2 {
        return Err(ValidationError::NotEnoughSamples(n));
    }
    config.validate()?;
    if let Some(&(fold, phase)) = fold_dropouts(dataset).first() {
        return Err(ValidationError::PhaseDropout {
            fold,
            sample: dataset.samples()[fold].id.clone(),
            phase: dataset.phase_names()[phase].clone(),
        });
    }

    let start = Instant::now();
    let outcomes: Vec<_> = if jobs <= 1 {
        (0..n).map(|k| run_fold(dataset, k, config)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| ValidationError::ThreadPool(e.to_string()))?;
        pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|k| run_fold(dataset, k, config))
                .collect()
        })
    };

    let mut fold_predictions = Vec::with_capacity(n);
    let mut per_fold_traces = Vec::with_capacity(n);
    let mut per_fold_inference = Vec::with_capacity(n);
    for (sample, outcome) in dataset.samples().iter().zip(outcomes) {
        let (prediction, train, infer) = outcome?;
        fold_predictions.push((sample.id.clone(), prediction));
        per_fold_traces.push(train);
        per_fold_inference.push(infer);
    }
    let predictions: Vec<_> = fold_predictions.iter().map(|(_, c)| c.clone()).collect();
    let report = EvalReport::new(&dataset.compositions(), &predictions)?;
    Ok(CvResult {
        fold_predictions,
        report,
        per_fold_traces,
        per_fold_inference,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Training-set evaluation: fit on every sample, then predict every sample.
#[derive(Debug, Clone)]
pub struct ResubResult {
    pub predictions: Vec<(String, Composition)>,
    pub report: EvalReport,
    pub train_trace: FitTrace,
}

pub fn resubstitution(
    dataset: &Dataset,
    config: &SolverConfig,
) -> Result<ResubResult, ValidationError> {
    let (library, train_trace) = fit_phase_library(dataset, config)?;
    let model = InferenceModel::new(&library)?;
    let predictions = dataset
        .samples()
        .iter()
        .map(|s| {
            model
                .estimate(&s.spectrum, config)
                .map(|(c, _)| (s.id.clone(), c))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let predicted: Vec<_> = predictions.iter().map(|(_, c)| c.clone()).collect();
    let report = EvalReport::new(&dataset.compositions(), &predicted)?;
    Ok(ResubResult {
        predictions,
        report,
        train_trace,
    })
}

pub fn resubstitution_eval(
    dataset: &Dataset,
    config: &SolverConfig,
) -> Result<EvalReport, ValidationError> {
    resubstitution(dataset, config).map(|r| r.report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{phase_names, validate_dataset, AngleGrid, RawSample};
    use std::sync::Arc;

    fn dataset(rows: Vec<(Vec<f64>, Vec<f64>)>) -> Dataset {
        let k = rows[0].0.len();
        let m = rows[0].1.len();
        let raw = rows
            .into_iter()
            .enumerate()
            .map(|(s, (intensities, fractions))| RawSample {
                id: format!("s{s}"),
                intensities,
                fractions,
            })
            .collect();
        validate_dataset(
            raw,
            Arc::new(AngleGrid::linspace(0.0, 1.0, k).unwrap()),
            phase_names((0..m).map(|j| format!("p{j}"))),
        )
        .unwrap()
    }

    #[test]
    fn two_pure_samples_drop_out_in_both_folds() {
        let ds = dataset(vec![
            (vec![1.0, 0.0], vec![1.0, 0.0]),
            (vec![0.0, 1.0], vec![0.0, 1.0]),
        ]);
        assert_eq!(fold_dropouts(&ds), vec![(0, 0), (1, 1)]);
        match loocv(&ds, &SolverConfig::default()) {
            Err(ValidationError::PhaseDropout { fold, phase, .. }) => {
                assert_eq!(fold, 0);
                assert_eq!(phase, "p0");
            }
            other => panic!("expected PhaseDropout, got {other:?}"),
        }
    }

    #[test]
    fn single_sample_cannot_be_cross_validated() {
        let ds = dataset(vec![(vec![1.0, 2.0], vec![1.0])]);
        assert!(matches!(
            loocv(&ds, &SolverConfig::default()),
            Err(ValidationError::NotEnoughSamples(1))
        ));
    }

    #[test]
    fn resub_single_pure_sample() {
        let ds = dataset(vec![(vec![1.0, 2.0], vec![1.0])]);
        let report = resubstitution_eval(&ds, &SolverConfig::default()).unwrap();
        assert_eq!(report.mean_rho, 1.0);
    }

    #[test]
    fn resub_reports_unobserved_phase() {
        let ds = dataset(vec![(vec![1.0, 2.0], vec![1.0, 0.0])]);
        assert!(matches!(
            resubstitution_eval(&ds, &SolverConfig::default()),
            Err(ValidationError::Solver(SolverError::UnobservedPhase { index: 1, .. }))
        ));
    }

    #[test]
    fn loocv_on_exact_two_phase_mixtures() {
        let x0 = [1.0, 0.2, 0.0, 0.5];
        let x1 = [0.0, 0.4, 1.0, 0.1];
        let rows = [0.0, 0.25, 0.5, 0.75, 1.0, 0.6]
            .iter()
            .map(|&a| {
                let y = x0.iter().zip(&x1).map(|(p, q)| a * p + (1.0 - a) * q).collect();
                (y, vec![a, 1.0 - a])
            })
            .collect();
        let ds = dataset(rows);
        let cfg = SolverConfig {
            max_iterations: 2000,
            ..Default::default()
        };
        let cv = loocv(&ds, &cfg).unwrap();
        assert_eq!(cv.fold_predictions.len(), 6);
        assert!(cv.report.mean_rho > 0.999, "{}", cv.report.mean_rho);
        let par = loocv_with_jobs(&ds, &cfg, 3).unwrap();
        assert_eq!(cv.predictions(), par.predictions());
    }
}
