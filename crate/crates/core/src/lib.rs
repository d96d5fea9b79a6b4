//! Supervised phase-fraction estimation for powder diffraction spectra.
//!
//! Training learns one monophase pattern per crystalline phase from spectra
//! labelled with known phase fractions; inference estimates the fractions
//! of an unlabelled spectrum as a non-negative, sum-to-one mixture of those
//! patterns. Both steps are exact non-negative coordinate descent on the
//! squared residual of the linear mixing model.
//!
//! ```
//! use phasefrac::solver::{estimate_composition, fit_phase_library, SolverConfig};
//! use phasefrac::synth::SynthPlan;
//!
//! let (_truth, dataset) = SynthPlan::ci_small().generate().unwrap();
//! let config = SolverConfig::default();
//! let (library, _) = fit_phase_library(&dataset, &config).unwrap();
//! let sample = &dataset.samples()[0];
//! let (estimate, _) = estimate_composition(&sample.spectrum, &library, &config).unwrap();
//! assert!((estimate.fractions()[0] - sample.composition.fractions()[0]).abs() < 1e-6);
//! ```

pub mod io;
pub mod metrics;
pub mod solver;
pub mod spectra;
pub mod synth;
pub mod validation;

pub use metrics::{EvalReport, SampleScore};
pub use solver::{FitTrace, SolverConfig};
pub use spectra::{AngleGrid, Composition, Dataset, PhaseLibrary, Spectrum};
pub use validation::CvResult;
