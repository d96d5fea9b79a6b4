//! Composition-level scores: ρ, mean absolute error, cosine similarity and
//! dominant-phase accuracy.

use std::f64::consts::SQRT_2;

use serde::Serialize;
use thiserror::Error;

use crate::spectra::Composition;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("PhaseMismatch: {0}")]
    PhaseMismatch(String),
    #[error("EmptyInput: no compositions to score")]
    EmptyInput,
}

fn check_pair(actual: &Composition, predicted: &Composition) -> Result<(), MetricsError> {
    if !actual.same_phases(predicted) {
        return Err(MetricsError::PhaseMismatch(
            "compositions are over different phase lists".into(),
        ));
    }
    Ok(())
}

fn check_lists(actuals: &[Composition], predictions: &[Composition]) -> Result<(), MetricsError> {
    if actuals.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    if actuals.len() != predictions.len() {
        return Err(MetricsError::PhaseMismatch(format!(
            "{} actual vs {} predicted compositions",
            actuals.len(),
            predictions.len()
        )));
    }
    actuals
        .iter()
        .zip(predictions)
        .try_for_each(|(a, p)| check_pair(a, p))
}

/// `1 − ‖α − α̂‖₂ / √2`. Two simplex points are at most √2 apart, so the
/// result lies in [0, 1].
pub fn rho(actual: &Composition, predicted: &Composition) -> Result<f64, MetricsError> {
    check_pair(actual, predicted)?;
    let dist = actual
        .fractions()
        .iter()
        .zip(predicted.fractions())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(1.0 - dist / SQRT_2)
}

/// Mean of `|α_{s,j} − α̂_{s,j}|` over all N samples and M phases.
pub fn mae(actuals: &[Composition], predictions: &[Composition]) -> Result<f64, MetricsError> {
    check_lists(actuals, predictions)?;
    let m = actuals[0].len();
    let total: f64 = actuals
        .iter()
        .zip(predictions)
        .flat_map(|(a, p)| a.fractions().iter().zip(p.fractions()))
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(total / (actuals.len() * m) as f64)
}

pub fn cosine_similarity(
    actual: &Composition,
    predicted: &Composition,
) -> Result<f64, MetricsError> {
    check_pair(actual, predicted)?;
    let a = actual.fractions();
    let b = predicted.fractions();
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(dot / (na * nb))
}

/// Fraction of samples whose predicted dominant phase matches the true one.
/// Ties resolve to the lowest phase index on both sides.
pub fn dominant_phase_accuracy(
    actuals: &[Composition],
    predictions: &[Composition],
) -> Result<f64, MetricsError> {
    check_lists(actuals, predictions)?;
    let hits = actuals
        .iter()
        .zip(predictions)
        .filter(|(a, p)| a.dominant_phase() == p.dominant_phase())
        .count();
    Ok(hits as f64 / actuals.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleScore {
    pub rho: f64,
    pub cosine: f64,
    pub abs_errors: Vec<f64>,
    pub dominant_hit: bool,
}

impl SampleScore {
    pub fn new(actual: &Composition, predicted: &Composition) -> Result<Self, MetricsError> {
        Ok(Self {
            rho: rho(actual, predicted)?,
            cosine: cosine_similarity(actual, predicted)?,
            abs_errors: actual
                .fractions()
                .iter()
                .zip(predicted.fractions())
                .map(|(a, b)| (a - b).abs())
                .collect(),
            dominant_hit: actual.dominant_phase() == predicted.dominant_phase(),
        })
    }
}

/// Per-sample scores plus their aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_sample: Vec<SampleScore>,
    pub mean_rho: f64,
    pub mae: f64,
    pub mean_cosine: f64,
    pub dominant_accuracy: f64,
}

impl EvalReport {
    pub fn new(actuals: &[Composition], predictions: &[Composition]) -> Result<Self, MetricsError> {
        check_lists(actuals, predictions)?;
        let per_sample = actuals
            .iter()
            .zip(predictions)
            .map(|(a, p)| SampleScore::new(a, p))
            .collect::<Result<Vec<_>, _>>()?;
        let n = per_sample.len() as f64;
        Ok(Self {
            mean_rho: per_sample.iter().map(|s| s.rho).sum::<f64>() / n,
            mean_cosine: per_sample.iter().map(|s| s.cosine).sum::<f64>() / n,
            mae: mae(actuals, predictions)?,
            dominant_accuracy: dominant_phase_accuracy(actuals, predictions)?,
            per_sample,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::phase_names;

    fn comp(v: &[f64]) -> Composition {
        Composition::new(
            v.to_vec(),
            phase_names((0..v.len()).map(|j| format!("p{j}"))),
        )
        .unwrap()
    }

    #[test]
    fn rho_worked_examples() {
        assert!((rho(&comp(&[0.5, 0.5]), &comp(&[0.6, 0.4])).unwrap() - 0.9).abs() < 1e-12);
        assert!(rho(&comp(&[1.0, 0.0]), &comp(&[0.0, 1.0])).unwrap().abs() < 1e-12);
        let a = comp(&[0.2, 0.3, 0.5]);
        assert_eq!(rho(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn mae_examples() {
        let a = [comp(&[0.3, 0.7]), comp(&[1.0, 0.0])];
        assert_eq!(mae(&a, &a).unwrap(), 0.0);
        assert_eq!(mae(&[comp(&[1.0, 0.0])], &[comp(&[0.0, 1.0])]).unwrap(), 1.0);
        let p = [comp(&[0.4, 0.6]), comp(&[1.0, 0.0])];
        assert!((mae(&a, &p).unwrap() - 0.05).abs() < 1e-12);
        assert_eq!(mae(&[], &[]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn cosine_examples() {
        let a = comp(&[0.1, 0.9]);
        assert!((cosine_similarity(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            cosine_similarity(&comp(&[1.0, 0.0]), &comp(&[0.0, 1.0])).unwrap(),
            0.0
        );
        let c = cosine_similarity(&comp(&[0.5, 0.5]), &comp(&[1.0, 0.0])).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn dominant_accuracy_examples() {
        let a: Vec<_> = (0..10).map(|_| comp(&[0.8, 0.2])).collect();
        assert_eq!(dominant_phase_accuracy(&a, &a).unwrap(), 1.0);

        assert_eq!(
            dominant_phase_accuracy(&[comp(&[0.5, 0.5])], &[comp(&[0.4, 0.6])]).unwrap(),
            0.0
        );

        let mut p = a.clone();
        p[3] = comp(&[0.1, 0.9]);
        assert!((dominant_phase_accuracy(&a, &p).unwrap() - 0.9).abs() < 1e-15);
        assert_eq!(dominant_phase_accuracy(&[], &[]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn mismatched_phases_rejected() {
        let a = comp(&[0.5, 0.5]);
        let b = Composition::new(vec![0.5, 0.5], phase_names(["x", "y"])).unwrap();
        assert!(matches!(rho(&a, &b), Err(MetricsError::PhaseMismatch(_))));
        assert!(matches!(
            cosine_similarity(&a, &b),
            Err(MetricsError::PhaseMismatch(_))
        ));
        assert!(matches!(
            mae(&[a.clone()], &[a.clone(), a]),
            Err(MetricsError::PhaseMismatch(_))
        ));
    }

    #[test]
    fn report_aggregates() {
        let a = [comp(&[0.5, 0.5]), comp(&[1.0, 0.0])];
        let p = [comp(&[0.6, 0.4]), comp(&[1.0, 0.0])];
        let r = EvalReport::new(&a, &p).unwrap();
        assert!((r.mean_rho - 0.95).abs() < 1e-12);
        assert!((r.mae - 0.05).abs() < 1e-12);
        assert_eq!(r.dominant_accuracy, 1.0);
        assert_eq!(r.per_sample.len(), 2);
        assert!(r.per_sample[0].dominant_hit);
    }
}
