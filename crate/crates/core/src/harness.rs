//! Brute-force estimation and prediction-versus-simulation reports.
//!
//! Realizations are processed in fixed chunks of [`CHUNK`] indices. Each chunk
//! is reduced sequentially and chunk results are merged in a fixed binary
//! tree, so the output depends only on the configuration and seed, not on the
//! number of worker threads.

use crate::error::{Error, Result};
use crate::euclidean::{euclidean_variance_formula, fluctuation_power_points, RadialSpectrum, ShellGrid};
use crate::integrand::{Integrand, IntegrandSpec};
use crate::rng;
use crate::samplers::{analytic_expected_power, analytic_expected_radial, draw, SampleDomain, SamplePattern, SamplerSpec};
use crate::spectra::{predict_expected, BlockLabel, PowerByBlock, VariancePrediction};
use crate::sphere::{pattern_coefficients_sphere, power_by_degree};
use crate::stats::{fit_slope, pairwise_sum, z_score, SampleMoments};
use crate::torus::{basis_norm, box_len, frequency_at, pattern_coefficients, power_by_block, torus_variance_formula};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::Range;

/// Realizations per reduction chunk.
pub const CHUNK: u64 = 512;
/// Standardized-difference threshold for PASS.
pub const Z_THRESHOLD: f64 = 4.0;
/// Variance differences at or below this count as zero.
pub const VARIANCE_ABS_TOL: f64 = 1e-20;
/// Largest truncation tail, relative to the predicted variance, for PASS.
pub const TAIL_FRACTION: f64 = 0.1;

/// Truncation of the spectral sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TruncationSpec {
    Bandwidth { bandwidth: u32 },
    MaxDegree { max_degree: u32 },
    Shells { grid: ShellGrid },
}

/// One experiment: a sampler, an integrand, a truncation, `R` and a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub sampler: SamplerSpec,
    pub integrand: IntegrandSpec,
    pub truncation: TruncationSpec,
    pub realizations: u64,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.sampler.validate()?;
        if self.realizations < 2 {
            return Err(Error::TooFewRealizations(self.realizations));
        }
        match (&self.sampler.domain, &self.truncation) {
            (SampleDomain::Torus { .. }, TruncationSpec::Bandwidth { .. }) => {}
            (SampleDomain::Sphere, TruncationSpec::MaxDegree { .. }) => {}
            (SampleDomain::Window { window }, TruncationSpec::Shells { grid }) => grid.validate(window.dim)?,
            (d, t) => return Err(Error::Config(format!("truncation {t:?} does not fit the {} domain", d.name()))),
        }
        self.integrand.resolve(&self.sampler.domain)?;
        Ok(())
    }

    pub fn domain(&self) -> SampleDomain {
        self.sampler.domain
    }

    fn band(&self) -> u32 {
        match self.truncation {
            TruncationSpec::Bandwidth { bandwidth } => bandwidth,
            TruncationSpec::MaxDegree { max_degree } => max_degree,
            TruncationSpec::Shells { grid } => grid.count as u32,
        }
    }
}

/// A sampler's expected spectrum: per block, or per shell on a window.
#[derive(Debug, Clone, PartialEq)]
pub enum ExpectedSpectrum {
    Blocks(PowerByBlock),
    Radial(RadialSpectrum),
}

impl ExpectedSpectrum {
    pub fn to_json(&self) -> String {
        match self {
            Self::Blocks(p) => p.to_json(),
            Self::Radial(r) => r.to_json(),
        }
    }

    pub fn to_csv(&self) -> String {
        match self {
            Self::Blocks(p) => p.to_csv(),
            Self::Radial(r) => r.to_csv(),
        }
    }

    /// Parses either JSON form.
    pub fn from_json(text: &str) -> Result<Self> {
        match PowerByBlock::from_json(text) {
            Ok(p) => Ok(Self::Blocks(p)),
            Err(first) => RadialSpectrum::from_json(text).map(Self::Radial).map_err(|_| first),
        }
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))
}

/// Runs `f` on every chunk of `0..realizations`, returning results in chunk order.
fn map_chunks<T, F>(realizations: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Range<u64>) -> Result<T> + Sync,
{
    let chunks: Vec<Range<u64>> =
        (0..realizations.div_ceil(CHUNK)).map(|c| c * CHUNK..((c + 1) * CHUNK).min(realizations)).collect();
    if workers <= 1 {
        return chunks.into_iter().map(f).collect();
    }
    pool(workers)?.install(|| chunks.into_par_iter().map(&f).collect())
}

/// Merges in a fixed binary tree.
fn tree_merge<T: Clone>(items: &[T], merge: &impl Fn(&T, &T) -> T) -> Option<T> {
    match items.len() {
        0 => None,
        1 => Some(items[0].clone()),
        n => {
            let (a, b) = items.split_at(n / 2);
            Some(merge(&tree_merge(a, merge)?, &tree_merge(b, merge)?))
        }
    }
}

/// Running mean and sum of squared deviations per component.
#[derive(Debug, Clone, PartialEq)]
struct Moments {
    n: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self { n: 0.0, mean: vec![0.0; len], m2: vec![0.0; len] }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1.0;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let d = v - *m;
            *m += d / self.n;
            *s += d * (v - *m);
        }
    }

    fn merge(a: &Self, b: &Self) -> Self {
        let n = a.n + b.n;
        if n == 0.0 {
            return a.clone();
        }
        let mut out = Self::new(a.mean.len());
        out.n = n;
        for i in 0..a.mean.len() {
            let d = b.mean[i] - a.mean[i];
            out.mean[i] = a.mean[i] + d * b.n / n;
            out.m2[i] = a.m2[i] + b.m2[i] + d * d * a.n * b.n / n;
        }
        out
    }

    fn se(&self) -> Vec<f64> {
        self.m2.iter().map(|s| (s / (self.n - 1.0) / self.n).max(0.0).sqrt()).collect()
    }
}

/// Per-block power of one pattern, flattened in the spectrum's block order.
fn pattern_power(pattern: &SamplePattern, config: &ExperimentConfig) -> Result<Vec<f64>> {
    match (pattern, config.truncation) {
        (SamplePattern::Torus(p), TruncationSpec::Bandwidth { bandwidth }) => {
            Ok(pattern_coefficients(p, config.sampler.domain.point_dim(), bandwidth)?.power_values())
        }
        (SamplePattern::Sphere(p), TruncationSpec::MaxDegree { max_degree }) => {
            Ok(pattern_coefficients_sphere(p, max_degree)?.degree_power())
        }
        (SamplePattern::Window(p), TruncationSpec::Shells { grid }) => {
            let SampleDomain::Window { window } = config.sampler.domain else { unreachable!() };
            Ok(fluctuation_power_points(p, window, grid)?.power)
        }
        _ => Err(Error::Config("truncation does not match the pattern domain".into())),
    }
}

fn build_spectrum(config: &ExperimentConfig, mean: &[f64], se: Option<&[f64]>) -> Result<ExpectedSpectrum> {
    Ok(match (config.sampler.domain, config.truncation) {
        (SampleDomain::Torus { dim }, TruncationSpec::Bandwidth { bandwidth }) => {
            ExpectedSpectrum::Blocks(power_by_block(dim, bandwidth, mean, se))
        }
        (SampleDomain::Sphere, TruncationSpec::MaxDegree { .. }) => ExpectedSpectrum::Blocks(power_by_degree(mean, se)),
        (SampleDomain::Window { window }, TruncationSpec::Shells { grid }) => {
            let power = mean.iter().map(|p| p.max(0.0)).collect();
            let r = RadialSpectrum::new(window, grid, power)?;
            ExpectedSpectrum::Radial(match se {
                Some(se) => r.with_se(se.to_vec()),
                None => r,
            })
        }
        _ => return Err(Error::Config("truncation does not match the domain".into())),
    })
}

/// Per-block power of one fixed pattern under the configured truncation.
pub fn pattern_spectrum(pattern: &SamplePattern, config: &ExperimentConfig) -> Result<ExpectedSpectrum> {
    config.validate()?;
    build_spectrum(config, &pattern_power(pattern, config)?, None)
}

fn estimate_moments(config: &ExperimentConfig, workers: usize, weights: Option<&[f64]>) -> Result<Moments> {
    let chunks = map_chunks(config.realizations, workers, |range| {
        let mut acc: Option<Moments> = None;
        for r in range {
            let mut p = pattern_power(&draw(&config.sampler, config.seed, r)?, config)?;
            if let Some(w) = weights {
                let terms: Vec<f64> = w.iter().zip(&p).map(|(a, b)| a * b).collect();
                p.push(pairwise_sum(&terms));
            }
            acc.get_or_insert_with(|| Moments::new(p.len())).push(&p);
        }
        Ok(acc.expect("non-empty chunk"))
    })?;
    Ok(tree_merge(&chunks, &Moments::merge).expect("at least one chunk"))
}

/// `E|Ŝ_λ|²` estimated as the mean per-block power over `R` draws, with
/// standard errors. On a window the trivial part is removed shell by shell.
pub fn estimate_expected_power(config: &ExperimentConfig, workers: usize) -> Result<ExpectedSpectrum> {
    config.validate()?;
    let m = estimate_moments(config, workers, None)?;
    build_spectrum(config, &m.mean, Some(&m.se()))
}

fn block_labels(config: &ExperimentConfig) -> Vec<BlockLabel> {
    match (config.sampler.domain, config.truncation) {
        (SampleDomain::Torus { dim }, TruncationSpec::Bandwidth { bandwidth }) => {
            (0..box_len(dim, bandwidth)).map(|i| BlockLabel::Torus(frequency_at(dim, bandwidth, i))).collect()
        }
        (_, TruncationSpec::MaxDegree { max_degree }) => (0..=max_degree).map(BlockLabel::Sphere).collect(),
        (_, TruncationSpec::Shells { grid }) => {
            (0..=grid.count).map(|k| BlockLabel::Shell { index: k, radius: grid.radius(k), width: grid.spacing }).collect()
        }
        _ => Vec::new(),
    }
}

/// Coefficients `c_λ` with predicted variance `Σ_λ c_λ E|Ŝ_λ|²`, in the
/// order of a pattern's flattened block power.
pub fn variance_weights(config: &ExperimentConfig) -> Result<Vec<f64>> {
    let labels = block_labels(config);
    let unit = build_spectrum(config, &vec![1.0; labels.len()], None)?;
    let prediction = predict(config, &unit)?;
    Ok(labels
        .iter()
        .map(|l| prediction.contributions.iter().find(|c| &c.label == l).map_or(0.0, |c| c.contribution))
        .collect())
}

/// Sample moments of the Monte Carlo estimate over `R` realizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McStatistics {
    pub realizations: u64,
    pub mean: Complex64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
}

impl From<SampleMoments> for McStatistics {
    fn from(m: SampleMoments) -> Self {
        Self {
            realizations: m.count as u64,
            mean: m.mean,
            variance: m.variance,
            se_mean: m.se_mean,
            se_variance: m.se_variance,
        }
    }
}

/// Empirical mean and variance of `(1/N) Σ F(s_i)`; the variance uses the
/// `R − 1` denominator and its standard error the fourth central moment.
pub fn empirical_mc_statistics(config: &ExperimentConfig, workers: usize) -> Result<McStatistics> {
    config.validate()?;
    let integrand = config.integrand.resolve(&config.sampler.domain)?;
    let chunks = map_chunks(config.realizations, workers, |range| {
        range.map(|r| integrand.mc_estimate(&draw(&config.sampler, config.seed, r)?)).collect::<Result<Vec<_>>>()
    })?;
    let values: Vec<Complex64> = chunks.into_iter().flatten().collect();
    Ok(SampleMoments::from_values(&values).expect("at least two realizations").into())
}

/// Where the sampler spectrum behind a prediction came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumSource {
    Analytic,
    Estimated,
    File,
}

/// Closed-form sampler spectrum for the configuration, if one exists.
pub fn analytic_spectrum(config: &ExperimentConfig) -> Result<Option<ExpectedSpectrum>> {
    Ok(match config.truncation {
        TruncationSpec::Shells { grid } => analytic_expected_radial(&config.sampler, grid)?.map(ExpectedSpectrum::Radial),
        _ => analytic_expected_power(&config.sampler, config.band())?.map(ExpectedSpectrum::Blocks),
    })
}

/// `E v̂_0` for the domain's orthonormal trivial basis function.
fn mean_trivial_sampler(domain: &SampleDomain) -> Complex64 {
    match domain {
        SampleDomain::Torus { dim } => Complex64::new(basis_norm(*dim), 0.0),
        SampleDomain::Sphere => Complex64::new(1.0 / (4.0 * PI).sqrt(), 0.0),
        SampleDomain::Window { window } => Complex64::new(basis_norm(window.dim), 0.0),
    }
}

/// Closed-form expected value and variance from a sampler spectrum.
pub fn predict(config: &ExperimentConfig, sampler: &ExpectedSpectrum) -> Result<VariancePrediction> {
    config.validate()?;
    let integrand = config.integrand.resolve(&config.sampler.domain)?;
    let expected = predict_expected(integrand.trivial_coefficient(), mean_trivial_sampler(&config.sampler.domain));
    let prediction = match (&integrand, sampler, config.truncation) {
        (Integrand::Torus(_), ExpectedSpectrum::Blocks(s), TruncationSpec::Bandwidth { bandwidth }) => {
            torus_variance_formula(&integrand.power(bandwidth)?, s)?
        }
        (Integrand::Sphere(_), ExpectedSpectrum::Blocks(s), TruncationSpec::MaxDegree { max_degree }) => {
            crate::sphere::sphere_variance_formula(&integrand.power(max_degree)?, s)?
        }
        (Integrand::Window { .. }, ExpectedSpectrum::Radial(s), TruncationSpec::Shells { grid }) => {
            euclidean_variance_formula(&integrand.radial_power(grid)?, s)?
        }
        _ => return Err(Error::Config("sampler spectrum does not match the experiment domain".into())),
    };
    Ok(prediction.with_expected(expected))
}

/// One row of the predicted-versus-estimated sampler power table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockComparison {
    pub label: String,
    pub dim: f64,
    pub power_integrand: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power_sampler_predicted: Option<f64>,
    pub power_sampler_estimated: f64,
    pub se: f64,
    pub z: f64,
    pub contribution: f64,
}

/// Prediction joined with simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceReport {
    pub domain: String,
    pub n: usize,
    pub realizations: u64,
    pub seed: u64,
    pub spectrum_source: SpectrumSource,
    pub prediction: VariancePrediction,
    /// Standard error of the predicted variance (0 for closed-form spectra).
    pub prediction_se: f64,
    pub true_mean: Complex64,
    pub empirical: McStatistics,
    pub z_mean: f64,
    pub z_variance: f64,
    pub blocks: Vec<BlockComparison>,
    pub tail_ok: bool,
    pub formal: bool,
    pub pass: bool,
}

impl VarianceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per block: label, dim, power_F, power_S_hat, se, contribution.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,dim,power_F,power_S_hat,se,contribution\n");
        for b in &self.blocks {
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{:e}\n",
                b.label, b.dim, b.power_integrand, b.power_sampler_estimated, b.se, b.contribution
            ));
        }
        out
    }
}

fn flat_blocks(spectrum: &ExpectedSpectrum) -> Vec<(BlockLabel, f64, f64, f64)> {
    match spectrum {
        ExpectedSpectrum::Blocks(p) => {
            p.blocks().map(|(l, b)| (l.clone(), b.dim, b.power, b.se.unwrap_or(0.0))).collect()
        }
        ExpectedSpectrum::Radial(r) => r
            .to_power_by_block()
            .blocks()
            .map(|(l, b)| (l.clone(), b.dim, b.power, b.se.unwrap_or(0.0)))
            .collect(),
    }
}

/// Which sampler spectrum [`compare_with`] feeds the predictor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumChoice {
    PreferAnalytic,
    Estimated,
}

/// [`compare_with`] using the closed-form sampler spectrum when one exists.
pub fn compare(config: &ExperimentConfig, workers: usize) -> Result<VarianceReport> {
    compare_with(config, workers, SpectrumChoice::PreferAnalytic)
}

/// Prediction, simulation, and their comparison.
///
/// An estimated sampler spectrum comes from an independent stream of draws;
/// the standard error of the resulting predicted variance is measured
/// directly from the per-draw linear predictions and added in quadrature to
/// the empirical one. The report passes when both z-scores are within
/// [`Z_THRESHOLD`] and a known truncation tail is at most [`TAIL_FRACTION`]
/// of the predicted variance.
pub fn compare_with(config: &ExperimentConfig, workers: usize, choice: SpectrumChoice) -> Result<VarianceReport> {
    config.validate()?;
    let integrand = config.integrand.resolve(&config.sampler.domain)?;
    let weights = variance_weights(config)?;
    let estimate_config = ExperimentConfig { seed: rng::derive_seed(config.seed, 1), ..config.clone() };
    let m = estimate_moments(&estimate_config, workers, Some(&weights))?;
    let blocks_len = weights.len();
    let estimated = build_spectrum(config, &m.mean[..blocks_len], Some(&m.se()[..blocks_len]))?;
    let analytic = match choice {
        SpectrumChoice::PreferAnalytic => analytic_spectrum(config)?,
        SpectrumChoice::Estimated => None,
    };
    let (source, sampler, prediction_se) = match &analytic {
        Some(a) => (SpectrumSource::Analytic, a, 0.0),
        None => (SpectrumSource::Estimated, &estimated, m.se()[blocks_len]),
    };
    let prediction = predict(config, sampler)?;
    let empirical = empirical_mc_statistics(config, workers)?;

    let analytic_blocks = analytic.as_ref().map(flat_blocks);
    let mut blocks = Vec::new();
    for (i, (label, dim, power, se)) in flat_blocks(&estimated).into_iter().enumerate() {
        let row = prediction.contributions.iter().find(|c| c.label == label);
        let predicted = analytic_blocks.as_ref().map(|a| a[i].2);
        blocks.push(BlockComparison {
            label: label.to_string(),
            dim,
            power_integrand: row.map_or(0.0, |c| c.power_integrand),
            power_sampler_predicted: predicted,
            power_sampler_estimated: power,
            se,
            z: predicted.map_or(0.0, |p| z_score(p, power, se, VARIANCE_ABS_TOL)),
            contribution: row.map_or(0.0, |c| c.contribution),
        });
    }

    let true_mean = integrand.mean();
    let mean_tol = 1e-13 * (1.0 + true_mean.norm());
    let z_mean = z_score(0.0, (empirical.mean - true_mean).norm(), empirical.se_mean, mean_tol);
    let combined_se = (empirical.se_variance.powi(2) + prediction_se.powi(2)).sqrt();
    let z_variance = z_score(prediction.variance, empirical.variance, combined_se, VARIANCE_ABS_TOL);
    let tail_ok = !prediction.tail_known || prediction.tail_estimate <= TAIL_FRACTION * prediction.variance;
    let pass = z_mean <= Z_THRESHOLD && z_variance <= Z_THRESHOLD && tail_ok;
    Ok(VarianceReport {
        domain: config.sampler.domain.name().into(),
        n: config.sampler.n,
        realizations: config.realizations,
        seed: config.seed,
        spectrum_source: source,
        formal: prediction.formal,
        prediction,
        prediction_se,
        true_mean,
        empirical,
        z_mean,
        z_variance,
        blocks,
        tail_ok,
        pass,
    })
}

/// Empirical variance against `N` and the least-squares slope in log-log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub n: Vec<usize>,
    pub variance: Vec<f64>,
    pub slope: f64,
}

/// Runs `empirical_mc_statistics` for each `N` (the sampler's strata, if any,
/// are rebuilt for one-dimensional grids) and fits `log Var` on `log N`.
pub fn convergence_slope(base: &ExperimentConfig, ns: &[usize], workers: usize) -> Result<SlopeFit> {
    let mut variance = Vec::with_capacity(ns.len());
    for &n in ns {
        let mut config = base.clone();
        config.sampler.n = n;
        if let crate::samplers::PatternKind::JitteredGrid { strata } = &mut config.sampler.pattern {
            *strata = None;
        }
        if let crate::samplers::PatternKind::FixedPatternRandomized { .. } = config.sampler.pattern {
            return Err(Error::InvalidSampler("fixed patterns have a fixed size".into()));
        }
        variance.push(empirical_mc_statistics(&config, workers)?.variance);
    }
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = variance.iter().map(|v| v.ln()).collect();
    Ok(SlopeFit { n: ns.to_vec(), variance, slope: fit_slope(&x, &y) })
}
