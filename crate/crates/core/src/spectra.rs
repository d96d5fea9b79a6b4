//! Domain types shared by the solver, metrics, validation and I/O layers.
//!
//! Every type here is validated on construction and immutable afterwards, so
//! a value that exists is a value that satisfies its invariants.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Absolute tolerance on the sum of an internally produced composition.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Absolute tolerance on the sum of an externally supplied composition.
/// Rows inside this band are renormalized, rows outside are rejected.
pub const INGEST_SUM_TOL: f64 = 1e-6;

/// Shared, ordered list of phase identifiers.
pub type PhaseNames = Arc<[String]>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("AllZero: every weight is zero, cannot normalize")]
    AllZero,
    #[error("EmptyGrid: an angle grid needs at least one point")]
    EmptyGrid,
    #[error("UnsortedGrid: angles must be strictly increasing (index {index})")]
    UnsortedGrid { index: usize },
    #[error("GridMismatch: {0}")]
    GridMismatch(String),
    #[error("NegativeIntensity: sample `{sample}` has intensity {value} at index {index}")]
    NegativeIntensity { sample: String, index: usize, value: f64 },
    #[error("ZeroSpectrum: sample `{0}` has no positive intensity")]
    ZeroSpectrum(String),
    #[error("BadComposition: {0}")]
    BadComposition(String),
    #[error("PhaseMismatch: {0}")]
    PhaseMismatch(String),
    #[error("DuplicatePhase: phase name `{0}` appears more than once")]
    DuplicatePhase(String),
    #[error("DuplicateSample: sample id `{0}` appears more than once")]
    DuplicateSample(String),
    #[error("EmptyDataset: a dataset needs at least one sample")]
    EmptyDataset,
}

/// Strictly increasing 2θ positions, in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleGrid {
    angles: Vec<f64>,
}

impl AngleGrid {
    pub fn new(angles: Vec<f64>) -> Result<Self, CoreError> {
        if angles.is_empty() {
            return Err(CoreError::EmptyGrid);
        }
        for (index, w) in angles.windows(2).enumerate() {
            // also rejects NaN
            if !(w[1] > w[0]) {
                return Err(CoreError::UnsortedGrid { index: index + 1 });
            }
        }
        if !angles[0].is_finite() || !angles[angles.len() - 1].is_finite() {
            return Err(CoreError::UnsortedGrid { index: 0 });
        }
        Ok(Self { angles })
    }

    /// `points` evenly spaced angles from `start` to `stop` inclusive.
    pub fn linspace(start: f64, stop: f64, points: usize) -> Result<Self, CoreError> {
        if points == 0 {
            return Err(CoreError::EmptyGrid);
        }
        if points == 1 {
            return Self::new(vec![start]);
        }
        let step = (stop - start) / (points - 1) as f64;
        Self::new((0..points).map(|i| start + step * i as f64).collect())
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Bitwise equality of every angle.
    pub fn same_as(&self, other: &AngleGrid) -> bool {
        self.angles.len() == other.angles.len()
            && self
                .angles
                .iter()
                .zip(&other.angles)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

fn same_grid(a: &Arc<AngleGrid>, b: &Arc<AngleGrid>) -> bool {
    Arc::ptr_eq(a, b) || a.same_as(b)
}

fn same_names(a: &PhaseNames, b: &PhaseNames) -> bool {
    Arc::ptr_eq(a, b) || a[..] == b[..]
}

/// Non-negative intensities measured on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    intensities: Vec<f64>,
    grid: Arc<AngleGrid>,
}

impl Spectrum {
    /// Builds a spectrum, rejecting wrong lengths, negative or non-finite
    /// values and all-zero readings. `label` only feeds error messages.
    pub fn new(
        label: &str,
        intensities: Vec<f64>,
        grid: Arc<AngleGrid>,
    ) -> Result<Self, CoreError> {
        if intensities.len() != grid.len() {
            return Err(CoreError::GridMismatch(format!(
                "sample `{label}` has {} intensities but the grid has {} angles",
                intensities.len(),
                grid.len()
            )));
        }
        check_nonnegative(label, &intensities)?;
        if !intensities.iter().any(|&v| v > 0.0) {
            return Err(CoreError::ZeroSpectrum(label.to_string()));
        }
        Ok(Self { intensities, grid })
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn grid(&self) -> &Arc<AngleGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intensities.is_empty()
    }

    /// Copy with every intensity multiplied by `factor` (> 0).
    pub fn scaled(&self, factor: f64) -> Result<Self, CoreError> {
        Self::new(
            "scaled",
            self.intensities.iter().map(|v| v * factor).collect(),
            Arc::clone(&self.grid),
        )
    }
}

fn check_nonnegative(label: &str, values: &[f64]) -> Result<(), CoreError> {
    match values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
        Some(index) => Err(CoreError::NegativeIntensity {
            sample: label.to_string(),
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// Divides non-negative weights by their sum.
pub fn normalize_weights(raw: &[f64]) -> Result<Vec<f64>, CoreError> {
    if let Some(v) = raw.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(CoreError::BadComposition(format!("invalid weight {v}")));
    }
    let total: f64 = raw.iter().sum();
    if total <= 0.0 {
        return Err(CoreError::AllZero);
    }
    Ok(raw.iter().map(|v| v / total).collect())
}

/// Phase fractions on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    fractions: Vec<f64>,
    phase_names: PhaseNames,
}

impl Composition {
    /// Accepts fractions that already sum to one within [`SIMPLEX_TOL`].
    pub fn new(fractions: Vec<f64>, phase_names: PhaseNames) -> Result<Self, CoreError> {
        Self::check_len(&fractions, &phase_names)?;
        if let Some(v) = fractions.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(CoreError::BadComposition(format!("negative fraction {v}")));
        }
        let total: f64 = fractions.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(CoreError::BadComposition(format!(
                "fractions sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            fractions,
            phase_names,
        })
    }

    /// Normalizes arbitrary non-negative weights onto the simplex.
    pub fn normalize(raw: &[f64], phase_names: PhaseNames) -> Result<Self, CoreError> {
        Self::check_len(raw, &phase_names)?;
        let fractions = normalize_weights(raw)?;
        Ok(Self {
            fractions,
            phase_names,
        })
    }

    /// Ingestion path for labelled data: a row summing to 1 within
    /// [`INGEST_SUM_TOL`] is renormalized, anything else is rejected.
    pub fn from_labels(raw: &[f64], phase_names: PhaseNames) -> Result<Self, CoreError> {
        Self::check_len(raw, &phase_names)?;
        if let Some(v) = raw.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(CoreError::BadComposition(format!("negative fraction {v}")));
        }
        let total: f64 = raw.iter().sum();
        if (total - 1.0).abs() > INGEST_SUM_TOL {
            return Err(CoreError::BadComposition(format!(
                "fractions sum to {total}, outside 1 ± {INGEST_SUM_TOL}"
            )));
        }
        Self::normalize(raw, phase_names)
    }

    /// One-hot composition for phase `index`.
    pub fn pure(index: usize, phase_names: PhaseNames) -> Self {
        let mut fractions = vec![0.0; phase_names.len()];
        fractions[index] = 1.0;
        Self {
            fractions,
            phase_names,
        }
    }

    fn check_len(values: &[f64], names: &PhaseNames) -> Result<(), CoreError> {
        if values.len() != names.len() || names.is_empty() {
            return Err(CoreError::PhaseMismatch(format!(
                "{} fractions for {} phases",
                values.len(),
                names.len()
            )));
        }
        Ok(())
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn phase_names(&self) -> &PhaseNames {
        &self.phase_names
    }

    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }

    /// Index of the largest fraction; the lowest index wins ties.
    pub fn dominant_phase(&self) -> usize {
        let mut best = 0;
        for (j, &f) in self.fractions.iter().enumerate().skip(1) {
            if f > self.fractions[best] {
                best = j;
            }
        }
        best
    }

    pub fn same_phases(&self, other: &Composition) -> bool {
        same_names(&self.phase_names, &other.phase_names)
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (name, v)) in self.phase_names.iter().zip(&self.fractions).enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{name}={v:.4}")?;
        }
        Ok(())
    }
}

/// One estimated monophase pattern per phase, all on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseLibrary {
    patterns: Vec<Vec<f64>>,
    phase_names: PhaseNames,
    grid: Arc<AngleGrid>,
}

impl PhaseLibrary {
    pub fn new(
        patterns: Vec<Vec<f64>>,
        phase_names: PhaseNames,
        grid: Arc<AngleGrid>,
    ) -> Result<Self, CoreError> {
        check_unique_names(&phase_names)?;
        if patterns.len() != phase_names.len() || patterns.is_empty() {
            return Err(CoreError::PhaseMismatch(format!(
                "{} patterns for {} phase names",
                patterns.len(),
                phase_names.len()
            )));
        }
        for (name, pattern) in phase_names.iter().zip(&patterns) {
            if pattern.len() != grid.len() {
                return Err(CoreError::GridMismatch(format!(
                    "pattern `{name}` has {} points but the grid has {}",
                    pattern.len(),
                    grid.len()
                )));
            }
            check_nonnegative(name, pattern)?;
        }
        Ok(Self {
            patterns,
            phase_names,
            grid,
        })
    }

    pub fn patterns(&self) -> &[Vec<f64>] {
        &self.patterns
    }

    pub fn pattern(&self, j: usize) -> &[f64] {
        &self.patterns[j]
    }

    pub fn phase_names(&self) -> &PhaseNames {
        &self.phase_names
    }

    pub fn grid(&self) -> &Arc<AngleGrid> {
        &self.grid
    }

    pub fn num_phases(&self) -> usize {
        self.patterns.len()
    }

    pub fn num_angles(&self) -> usize {
        self.grid.len()
    }

    pub fn accepts_spectrum(&self, spectrum: &Spectrum) -> bool {
        same_grid(&self.grid, spectrum.grid())
    }

    pub fn accepts_composition(&self, composition: &Composition) -> bool {
        same_names(&self.phase_names, composition.phase_names())
    }
}

fn check_unique_names(names: &[String]) -> Result<(), CoreError> {
    for (k, name) in names.iter().enumerate() {
        if names[..k].contains(name) {
            return Err(CoreError::DuplicatePhase(name.clone()));
        }
    }
    Ok(())
}

/// Unvalidated labelled sample, as read from disk or generated.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSample {
    pub id: String,
    pub intensities: Vec<f64>,
    pub fractions: Vec<f64>,
}

/// A validated labelled sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub spectrum: Spectrum,
    pub composition: Composition,
}

/// Labelled samples sharing one grid and one phase list.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    grid: Arc<AngleGrid>,
    phase_names: PhaseNames,
}

/// Checks raw samples against the grid and phase list and builds a [`Dataset`].
pub fn validate_dataset(
    samples: Vec<RawSample>,
    grid: Arc<AngleGrid>,
    phase_names: PhaseNames,
) -> Result<Dataset, CoreError> {
    check_unique_names(&phase_names)?;
    if phase_names.is_empty() {
        return Err(CoreError::PhaseMismatch("no phases declared".into()));
    }
    let mut built = Vec::with_capacity(samples.len());
    for raw in samples {
        if built.iter().any(|s: &Sample| s.id == raw.id) {
            return Err(CoreError::DuplicateSample(raw.id));
        }
        let spectrum = Spectrum::new(&raw.id, raw.intensities, Arc::clone(&grid))?;
        let composition = Composition::from_labels(&raw.fractions, Arc::clone(&phase_names))
            .map_err(|e| match e {
                CoreError::BadComposition(msg) => {
                    CoreError::BadComposition(format!("sample `{}`: {msg}", raw.id))
                }
                CoreError::AllZero => {
                    CoreError::BadComposition(format!("sample `{}`: all fractions zero", raw.id))
                }
                other => other,
            })?;
        built.push(Sample {
            id: raw.id,
            spectrum,
            composition,
        });
    }
    Dataset::from_samples(built, grid, phase_names)
}

impl Dataset {
    /// Builds a dataset from already validated samples, re-checking that they
    /// share the grid and phase list.
    pub fn from_samples(
        samples: Vec<Sample>,
        grid: Arc<AngleGrid>,
        phase_names: PhaseNames,
    ) -> Result<Self, CoreError> {
        if samples.is_empty() {
            return Err(CoreError::EmptyDataset);
        }
        for s in &samples {
            if !same_grid(&grid, s.spectrum.grid()) {
                return Err(CoreError::GridMismatch(format!(
                    "sample `{}` was measured on a different grid",
                    s.id
                )));
            }
            if !same_names(&phase_names, s.composition.phase_names()) {
                return Err(CoreError::PhaseMismatch(format!(
                    "sample `{}` is labelled with a different phase list",
                    s.id
                )));
            }
        }
        Ok(Self {
            samples,
            grid,
            phase_names,
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn grid(&self) -> &Arc<AngleGrid> {
        &self.grid
    }

    pub fn phase_names(&self) -> &PhaseNames {
        &self.phase_names
    }

    pub fn num_samples(&self) -> usize {
        self.samples.len()
    }

    pub fn num_phases(&self) -> usize {
        self.phase_names.len()
    }

    pub fn num_angles(&self) -> usize {
        self.grid.len()
    }

    pub fn compositions(&self) -> Vec<Composition> {
        self.samples.iter().map(|s| s.composition.clone()).collect()
    }

    /// Copy of the dataset with sample `index` removed, or `None` when it
    /// is the only sample.
    pub fn without(&self, index: usize) -> Option<Dataset> {
        if self.samples.len() < 2 || index >= self.samples.len() {
            return None;
        }
        let samples = self
            .samples
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != index)
            .map(|(_, s)| s.clone())
            .collect();
        Some(Dataset {
            samples,
            grid: Arc::clone(&self.grid),
            phase_names: Arc::clone(&self.phase_names),
        })
    }

    /// Σ_s α_j(s)² for every phase j.
    pub fn phase_energy(&self) -> Vec<f64> {
        let mut energy = vec![0.0; self.num_phases()];
        for s in &self.samples {
            for (e, a) in energy.iter_mut().zip(s.composition.fractions()) {
                *e += a * a;
            }
        }
        energy
    }
}

pub fn phase_names<I, S>(names: I) -> PhaseNames
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    names.into_iter().map(Into::into).collect::<Vec<String>>().into()
}
