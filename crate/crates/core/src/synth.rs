//! Seeded synthetic powder patterns, mixtures and a brute-force simplex
//! oracle used to check the solver.
//!
//! Phase patterns are sums of pseudo-Voigt peaks over a constant background.
//! Samples are exact linear mixtures of those patterns plus optional
//! Gaussian noise clipped at zero. All randomness derives from one base
//! seed, with a separate stream per phase and per sample, so generation is
//! reproducible and independent of evaluation order.

use std::f64::consts::LN_2;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spectra::{
    phase_names, validate_dataset, AngleGrid, Composition, CoreError, Dataset, PhaseLibrary,
    PhaseNames, RawSample, Spectrum,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("InvalidPeak: {0}")]
    InvalidPeak(String),
    #[error("InvalidConfig: {0}")]
    InvalidConfig(String),
    #[error("PhaseMismatch: {0}")]
    PhaseMismatch(String),
    #[error("TooManyPhases: exhaustive search supports at most {max} phases, got {got}")]
    TooManyPhases { max: usize, got: usize },
    #[error("InvalidStep: lattice step {0} does not divide 1 evenly")]
    InvalidStep(f64),
    #[error("SamplingFailed: {0}")]
    SamplingFailed(String),
    #[error(transparent)]
    Core(#[from] CoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakSpec {
    pub center: f64,
    pub amplitude: f64,
    pub fwhm: f64,
    /// Lorentzian share of the profile.
    pub eta: f64,
}

impl PeakSpec {
    pub fn new(center: f64, amplitude: f64, fwhm: f64, eta: f64) -> Result<Self, SynthError> {
        let peak = Self {
            center,
            amplitude,
            fwhm,
            eta,
        };
        peak.validate()?;
        Ok(peak)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.fwhm > 0.0) || !(self.amplitude >= 0.0) || !(0.0..=1.0).contains(&self.eta) {
            return Err(SynthError::InvalidPeak(format!("{self:?}")));
        }
        Ok(())
    }
}

/// `amplitude · [η·L + (1−η)·G]` with unit-height Lorentzian and Gaussian
/// profiles sharing the peak's full width at half maximum.
pub fn pseudo_voigt(theta: f64, peak: &PeakSpec) -> f64 {
    let u = (theta - peak.center) / peak.fwhm;
    let lorentz = 1.0 / (1.0 + 4.0 * u * u);
    let gauss = (-4.0 * LN_2 * u * u).exp();
    peak.amplitude * (peak.eta * lorentz + (1.0 - peak.eta) * gauss)
}

/// Parameters of the pattern and noise generator.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub grid: Arc<AngleGrid>,
    /// Inclusive bounds on the number of peaks per phase.
    pub peaks_per_phase: (usize, usize),
    pub amplitude_range: (f64, f64),
    pub fwhm_range: (f64, f64),
    pub eta_range: (f64, f64),
    /// Noise standard deviation as a fraction of the library maximum.
    pub noise_sigma: f64,
    pub background_level: f64,
    pub seed: u64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |what: &str| Err(SynthError::InvalidConfig(what.to_string()));
        if self.peaks_per_phase.0 > self.peaks_per_phase.1 {
            return bad("peaks_per_phase lower bound exceeds upper bound");
        }
        let (a0, a1) = self.amplitude_range;
        if !(a0 >= 0.0 && a1 >= a0) {
            return bad("amplitude_range must satisfy 0 ≤ lo ≤ hi");
        }
        let (w0, w1) = self.fwhm_range;
        if !(w0 > 0.0 && w1 >= w0) {
            return bad("fwhm_range must satisfy 0 < lo ≤ hi");
        }
        let (e0, e1) = self.eta_range;
        if !(e0 >= 0.0 && e1 >= e0 && e1 <= 1.0) {
            return bad("eta_range must lie within [0, 1]");
        }
        if !(self.noise_sigma >= 0.0) {
            return bad("noise_sigma must be ≥ 0");
        }
        if !(self.background_level >= 0.0) {
            return bad("background_level must be ≥ 0");
        }
        Ok(())
    }
}

const STREAM_PHASE: u64 = 0x5048_4153_4500_0001;
const STREAM_NOISE: u64 = 0x4e4f_4953_4500_0002;
const STREAM_COMPOSITION: u64 = 0x434f_4d50_0000_0003;

/// splitmix64 finalizer over the combined inputs.
fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(index.wrapping_mul(0xbf58_476d_1ce4_e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Random peak list for one phase.
pub fn gen_peaks(config: &SynthConfig, phase_seed: u64) -> Result<Vec<PeakSpec>, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_PHASE, phase_seed));
    let (lo, hi) = config.peaks_per_phase;
    let count = rng.random_range(lo..=hi);
    let angles = config.grid.angles();
    let span = (angles[0], angles[angles.len() - 1]);
    (0..count)
        .map(|_| {
            PeakSpec::new(
                uniform(&mut rng, span),
                uniform(&mut rng, config.amplitude_range),
                uniform(&mut rng, config.fwhm_range),
                uniform(&mut rng, config.eta_range),
            )
        })
        .collect()
}

/// Deterministic monophase pattern: seeded pseudo-Voigt peaks plus the
/// constant background, evaluated on the config grid.
pub fn gen_phase_pattern(config: &SynthConfig, phase_seed: u64) -> Result<Spectrum, SynthError> {
    let peaks = gen_peaks(config, phase_seed)?;
    let intensities = config
        .grid
        .angles()
        .iter()
        .map(|&t| config.background_level + peaks.iter().map(|p| pseudo_voigt(t, p)).sum::<f64>())
        .collect();
    Ok(Spectrum::new(
        &format!("phase-{phase_seed}"),
        intensities,
        Arc::clone(&config.grid),
    )?)
}

/// Library of generated patterns, phase `j` using phase seed `j`.
pub fn gen_library(config: &SynthConfig, names: PhaseNames) -> Result<PhaseLibrary, SynthError> {
    let patterns = (0..names.len())
        .map(|j| gen_phase_pattern(config, j as u64).map(|s| s.intensities().to_vec()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PhaseLibrary::new(patterns, names, Arc::clone(&config.grid))?)
}

/// Forward model `y_i(s) = Σ_j α_j(s) x_i(j) + ε_i(s)`, with ε Gaussian of
/// standard deviation `noise_sigma · max(x)` and the result clipped at zero.
/// Sample ids are `s001`, `s002`, ...; labels are the given compositions.
pub fn mix_samples(
    library: &PhaseLibrary,
    compositions: &[Composition],
    config: &SynthConfig,
) -> Result<Dataset, SynthError> {
    config.validate()?;
    if !library.grid().same_as(&config.grid) {
        return Err(SynthError::Core(CoreError::GridMismatch(
            "library grid differs from the synth config grid".into(),
        )));
    }
    if let Some(c) = compositions.iter().find(|c| !library.accepts_composition(c)) {
        return Err(SynthError::PhaseMismatch(format!(
            "composition over {} phases does not match the library's {}",
            c.len(),
            library.num_phases()
        )));
    }
    let peak = library
        .patterns()
        .iter()
        .flatten()
        .fold(0.0_f64, |a, &b| a.max(b));
    let sigma = config.noise_sigma * peak;
    let width = (compositions.len().max(1)).to_string().len().max(3);

    let raw = compositions
        .iter()
        .enumerate()
        .map(|(s, c)| {
            let mut y: Vec<f64> = (0..library.num_angles())
                .map(|i| {
                    c.fractions()
                        .iter()
                        .zip(library.patterns())
                        .map(|(a, x)| a * x[i])
                        .sum()
                })
                .collect();
            if sigma > 0.0 {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(derive_seed(config.seed, STREAM_NOISE, s as u64));
                let noise = Normal::new(0.0, sigma)
                    .map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
                for v in y.iter_mut() {
                    *v = (*v + noise.sample(&mut rng)).max(0.0);
                }
            }
            Ok(RawSample {
                id: format!("s{:0width$}", s + 1),
                intensities: y,
                fractions: c.fractions().to_vec(),
            })
        })
        .collect::<Result<Vec<_>, SynthError>>()?;
    Ok(validate_dataset(
        raw,
        Arc::clone(library.grid()),
        Arc::clone(library.phase_names()),
    )?)
}

/// How the labels of a synthetic dataset are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositionPlan {
    pub samples: usize,
    /// Start with one pure sample per phase.
    pub include_vertices: bool,
    /// Inclusive bounds on the number of phases present in a mixed sample.
    pub min_phases: usize,
    pub max_phases: usize,
    /// Mixed samples are redrawn until the largest fraction exceeds the
    /// second largest by at least this much.
    pub min_dominance_margin: f64,
    /// Every phase must appear in at least this many samples.
    pub min_support: usize,
}

/// Draws labels: optional simplex vertices first, then mixtures of
/// `min_phases..=max_phases` randomly chosen phases with uniform
/// (flat Dirichlet) weights.
pub fn sample_compositions(
    plan: &CompositionPlan,
    names: &PhaseNames,
    seed: u64,
) -> Result<Vec<Composition>, SynthError> {
    let m = names.len();
    if plan.min_phases == 0 || plan.min_phases > plan.max_phases || plan.max_phases > m {
        return Err(SynthError::InvalidConfig(format!(
            "phases per sample {}..={} invalid for {m} phases",
            plan.min_phases, plan.max_phases
        )));
    }
    if plan.include_vertices && plan.samples < m {
        return Err(SynthError::InvalidConfig(format!(
            "{} samples cannot hold {m} vertices",
            plan.samples
        )));
    }
    const ATTEMPTS: u64 = 1000;
    for attempt in 0..ATTEMPTS {
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_COMPOSITION, attempt));
        let mut out = Vec::with_capacity(plan.samples);
        if plan.include_vertices {
            out.extend((0..m).map(|j| Composition::pure(j, Arc::clone(names))));
        }
        while out.len() < plan.samples {
            out.push(draw_mixture(&mut rng, plan, names)?);
        }
        let supported = (0..m).all(|j| {
            out.iter().filter(|c| c.fractions()[j] > 0.0).count() >= plan.min_support
        });
        if supported {
            return Ok(out);
        }
    }
    Err(SynthError::SamplingFailed(format!(
        "no draw gave every phase {} supporting samples",
        plan.min_support
    )))
}

fn draw_mixture(
    rng: &mut ChaCha8Rng,
    plan: &CompositionPlan,
    names: &PhaseNames,
) -> Result<Composition, SynthError> {
    let m = names.len();
    for _ in 0..10_000 {
        let k = rng.random_range(plan.min_phases..=plan.max_phases);
        let mut phases: Vec<usize> = (0..m).collect();
        // partial Fisher-Yates
        for a in 0..k {
            let b = rng.random_range(a..m);
            phases.swap(a, b);
        }
        let mut weights = vec![0.0; m];
        for &j in &phases[..k] {
            let w: f64 = Exp1.sample(rng);
            weights[j] = w;
        }
        let mut sorted = weights.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = weights.iter().sum();
        let margin = if m > 1 { (sorted[0] - sorted[1]) / total } else { 1.0 };
        if margin >= plan.min_dominance_margin && weights.iter().all(|&w| w == 0.0 || w / total > 1e-3) {
            return Ok(Composition::normalize(&weights, Arc::clone(names))?);
        }
    }
    Err(SynthError::SamplingFailed(format!(
        "could not draw a mixture with dominance margin {}",
        plan.min_dominance_margin
    )))
}

/// Serializable description of a whole synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthPlan {
    pub grid_start: f64,
    pub grid_stop: f64,
    pub grid_points: usize,
    pub phases: usize,
    pub peaks_per_phase: (usize, usize),
    pub amplitude_range: (f64, f64),
    pub fwhm_range: (f64, f64),
    pub eta_range: (f64, f64),
    pub noise_sigma: f64,
    pub background_level: f64,
    pub seed: u64,
    pub compositions: CompositionPlan,
}

impl SynthPlan {
    /// K = 200 over 5–85°, three phases, twelve samples (vertices plus
    /// three-phase interior points), no noise.
    pub fn ci_small() -> Self {
        Self {
            grid_start: 5.0,
            grid_stop: 85.0,
            grid_points: 200,
            phases: 3,
            peaks_per_phase: (3, 6),
            amplitude_range: (200.0, 1000.0),
            fwhm_range: (0.8, 2.0),
            eta_range: (0.0, 1.0),
            noise_sigma: 0.0,
            background_level: 10.0,
            seed: 2024,
            compositions: CompositionPlan {
                samples: 12,
                include_vertices: true,
                min_phases: 3,
                max_phases: 3,
                min_dominance_margin: 0.05,
                min_support: 2,
            },
        }
    }

    /// K = 4000 over 5–85°, seven phases, 46 samples of mostly one to three
    /// phases, noise at 1% of the peak maximum.
    pub fn paper_shaped() -> Self {
        Self {
            grid_start: 5.0,
            grid_stop: 85.0,
            grid_points: 4000,
            phases: 7,
            peaks_per_phase: (5, 15),
            amplitude_range: (100.0, 1000.0),
            fwhm_range: (0.1, 0.4),
            eta_range: (0.0, 1.0),
            noise_sigma: 0.01,
            background_level: 20.0,
            seed: 46,
            compositions: CompositionPlan {
                samples: 46,
                include_vertices: true,
                min_phases: 2,
                max_phases: 3,
                min_dominance_margin: 0.05,
                min_support: 2,
            },
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "ci-small" => Some(Self::ci_small()),
            "paper-shaped" => Some(Self::paper_shaped()),
            _ => None,
        }
    }

    pub fn phase_names(&self) -> PhaseNames {
        phase_names((1..=self.phases).map(|j| format!("phase{j}")))
    }

    pub fn synth_config(&self) -> Result<SynthConfig, SynthError> {
        let config = SynthConfig {
            grid: Arc::new(AngleGrid::linspace(
                self.grid_start,
                self.grid_stop,
                self.grid_points,
            )?),
            peaks_per_phase: self.peaks_per_phase,
            amplitude_range: self.amplitude_range,
            fwhm_range: self.fwhm_range,
            eta_range: self.eta_range,
            noise_sigma: self.noise_sigma,
            background_level: self.background_level,
            seed: self.seed,
        };
        config.validate()?;
        Ok(config)
    }

    /// Ground-truth library and the labelled dataset mixed from it.
    pub fn generate(&self) -> Result<(PhaseLibrary, Dataset), SynthError> {
        if self.phases == 0 {
            return Err(SynthError::InvalidConfig("at least one phase required".into()));
        }
        let config = self.synth_config()?;
        let names = self.phase_names();
        let library = gen_library(&config, Arc::clone(&names))?;
        let compositions = sample_compositions(&self.compositions, &names, self.seed)?;
        let dataset = mix_samples(&library, &compositions, &config)?;
        Ok((library, dataset))
    }
}

/// Largest phase count accepted by [`oracle_simplex_search`].
pub const ORACLE_MAX_PHASES: usize = 4;

/// Exhaustive search over the simplex lattice `{n·step : Σ n = 1/step}`
/// for the weights minimizing the spectrum's squared residual. Points are
/// visited in lexicographic order and only a strictly smaller error
/// replaces the incumbent, so ties go to the lexicographically smallest.
pub fn oracle_simplex_search(
    spectrum: &Spectrum,
    library: &PhaseLibrary,
    step: f64,
) -> Result<Composition, SynthError> {
    let m = library.num_phases();
    if m > ORACLE_MAX_PHASES {
        return Err(SynthError::TooManyPhases {
            max: ORACLE_MAX_PHASES,
            got: m,
        });
    }
    if !library.accepts_spectrum(spectrum) {
        return Err(SynthError::Core(CoreError::GridMismatch(
            "spectrum grid differs from the library grid".into(),
        )));
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(SynthError::InvalidStep(step));
    }
    let units = (1.0 / step).round();
    if (units * step - 1.0).abs() > 1e-9 {
        return Err(SynthError::InvalidStep(step));
    }
    let units = units as usize;

    // E²(α) = yᵀy − 2 αᵀ(Xy) + αᵀ(XXᵀ)α
    let y = spectrum.intensities();
    let yy: f64 = y.iter().map(|v| v * v).sum();
    let xy: Vec<f64> = library
        .patterns()
        .iter()
        .map(|x| x.iter().zip(y).map(|(a, b)| a * b).sum())
        .collect();
    let xx: Vec<Vec<f64>> = library
        .patterns()
        .iter()
        .map(|a| {
            library
                .patterns()
                .iter()
                .map(|b| a.iter().zip(b).map(|(p, q)| p * q).sum())
                .collect()
        })
        .collect();
    let objective = |alpha: &[f64]| -> f64 {
        let mut e = yy;
        for a in 0..m {
            e -= 2.0 * alpha[a] * xy[a];
            for b in 0..m {
                e += alpha[a] * xx[a][b] * alpha[b];
            }
        }
        e
    };

    let mut counts = vec![0usize; m];
    let mut alpha = vec![0.0; m];
    let mut best: Option<(f64, Vec<usize>)> = None;
    visit_lattice(0, units, &mut counts, &mut |counts| {
        for (a, &c) in alpha.iter_mut().zip(counts.iter()) {
            *a = c as f64 / units as f64;
        }
        let e = objective(&alpha);
        if best.as_ref().is_none_or(|(b, _)| e < *b) {
            best = Some((e, counts.to_vec()));
        }
    });
    let (_, counts) = best.expect("lattice has at least one point");
    let fractions = counts.iter().map(|&c| c as f64 / units as f64).collect();
    Ok(Composition::new(fractions, Arc::clone(library.phase_names()))?)
}

fn visit_lattice(
    position: usize,
    remaining: usize,
    counts: &mut [usize],
    f: &mut impl FnMut(&[usize]),
) {
    if position + 1 == counts.len() {
        counts[position] = remaining;
        f(counts);
        return;
    }
    for c in 0..=remaining {
        counts[position] = c;
        visit_lattice(position + 1, remaining - c, counts, f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(k: usize) -> SynthConfig {
        SynthPlan {
            grid_points: k,
            ..SynthPlan::ci_small()
        }
        .synth_config()
        .unwrap()
    }

    #[test]
    fn pseudo_voigt_half_maximum() {
        for eta in [0.0, 0.3, 1.0] {
            let p = PeakSpec::new(30.0, 7.5, 0.4, eta).unwrap();
            assert_eq!(pseudo_voigt(30.0, &p), 7.5);
            assert!((pseudo_voigt(30.2, &p) - 3.75).abs() < 1e-9);
            assert!((pseudo_voigt(29.8, &p) - 3.75).abs() < 1e-9);
        }
    }

    #[test]
    fn peak_validation() {
        assert!(PeakSpec::new(1.0, 1.0, 0.0, 0.5).is_err());
        assert!(PeakSpec::new(1.0, -1.0, 1.0, 0.5).is_err());
        assert!(PeakSpec::new(1.0, 1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn pattern_is_seeded() {
        let c = config(300);
        let a = gen_phase_pattern(&c, 3).unwrap();
        assert_eq!(a, gen_phase_pattern(&c, 3).unwrap());
        assert_ne!(a, gen_phase_pattern(&c, 4).unwrap());
        let max = a.intensities().iter().cloned().fold(0.0, f64::max);
        assert!(max > c.background_level);
    }

    #[test]
    fn background_only_pattern() {
        let c = SynthConfig {
            peaks_per_phase: (0, 0),
            background_level: 5.0,
            ..config(50)
        };
        let s = gen_phase_pattern(&c, 0).unwrap();
        assert!(s.intensities().iter().all(|&v| v == 5.0));
    }

    #[test]
    fn mixing_is_the_forward_model() {
        let c = config(100);
        let names = phase_names(["a", "b"]);
        let lib = gen_library(&c, names.clone()).unwrap();
        let comps = vec![
            Composition::pure(1, names.clone()),
            Composition::new(vec![0.5, 0.5], names.clone()).unwrap(),
        ];
        let ds = mix_samples(&lib, &comps, &c).unwrap();
        assert_eq!(ds.samples()[0].spectrum.intensities(), lib.pattern(1));
        for (i, v) in ds.samples()[1].spectrum.intensities().iter().enumerate() {
            let mid = 0.5 * lib.pattern(0)[i] + 0.5 * lib.pattern(1)[i];
            assert!((v - mid).abs() < 1e-12);
        }
        assert_eq!(ds.samples()[0].id, "s001");
    }

    #[test]
    fn noisy_mixing_reproducible_and_nonnegative() {
        let c = SynthConfig {
            noise_sigma: 0.05,
            background_level: 0.0,
            ..config(100)
        };
        let names = phase_names(["a", "b"]);
        let lib = gen_library(&c, names.clone()).unwrap();
        let comps = vec![Composition::new(vec![0.3, 0.7], names).unwrap(); 4];
        let a = mix_samples(&lib, &comps, &c).unwrap();
        assert_eq!(a, mix_samples(&lib, &comps, &c).unwrap());
        assert_ne!(
            a.samples()[0].spectrum.intensities(),
            a.samples()[1].spectrum.intensities()
        );
        assert!(a
            .samples()
            .iter()
            .all(|s| s.spectrum.intensities().iter().all(|&v| v >= 0.0)));
    }

    #[test]
    fn mixing_rejects_foreign_phases() {
        let c = config(20);
        let lib = gen_library(&c, phase_names(["a", "b"])).unwrap();
        let comps = vec![Composition::pure(0, phase_names(["a", "c"]))];
        assert!(matches!(
            mix_samples(&lib, &comps, &c),
            Err(SynthError::PhaseMismatch(_))
        ));
    }

    #[test]
    fn compositions_follow_plan() {
        let plan = SynthPlan::paper_shaped();
        let names = plan.phase_names();
        let comps = sample_compositions(&plan.compositions, &names, 1).unwrap();
        assert_eq!(comps.len(), 46);
        for (j, c) in comps.iter().take(7).enumerate() {
            assert_eq!(c.fractions()[j], 1.0);
        }
        for c in &comps[7..] {
            let present = c.fractions().iter().filter(|&&v| v > 0.0).count();
            assert!((2..=3).contains(&present));
        }
        for j in 0..7 {
            assert!(comps.iter().filter(|c| c.fractions()[j] > 0.0).count() >= 2);
        }
    }

    #[test]
    fn oracle_small_cases() {
        let grid = Arc::new(AngleGrid::linspace(0.0, 1.0, 3).unwrap());
        let names = phase_names(["a", "b"]);
        let lib = PhaseLibrary::new(
            vec![vec![1.0, 0.0, 2.0], vec![0.0, 3.0, 0.0]],
            names,
            grid.clone(),
        )
        .unwrap();
        let y = Spectrum::new("y", vec![1.0, 0.0, 2.0], grid.clone()).unwrap();
        assert_eq!(oracle_simplex_search(&y, &lib, 0.01).unwrap().fractions(), &[1.0, 0.0]);
        let y = Spectrum::new("y", vec![0.5, 1.5, 1.0], grid).unwrap();
        let c = oracle_simplex_search(&y, &lib, 0.01).unwrap();
        assert!((c.fractions()[0] - 0.5).abs() < 1e-12);
        assert!((c.fractions()[1] - 0.5).abs() < 1e-12);
        assert!(matches!(
            oracle_simplex_search(&y, &lib, 0.3),
            Err(SynthError::InvalidStep(_))
        ));
    }

    #[test]
    fn oracle_refuses_many_phases() {
        let c = config(20);
        let lib = gen_library(&c, phase_names(["a", "b", "c", "d", "e"])).unwrap();
        let y = gen_phase_pattern(&c, 0).unwrap();
        assert_eq!(
            oracle_simplex_search(&y, &lib, 0.1).unwrap_err(),
            SynthError::TooManyPhases { max: 4, got: 5 }
        );
    }

    #[test]
    fn presets_generate() {
        let (lib, ds) = SynthPlan::ci_small().generate().unwrap();
        assert_eq!(lib.num_phases(), 3);
        assert_eq!(ds.num_samples(), 12);
        assert_eq!(ds.num_angles(), 200);
        assert!(SynthPlan::preset("paper-shaped").is_some());
        assert!(SynthPlan::preset("huge").is_none());
    }
}
