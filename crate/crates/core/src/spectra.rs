//! Domain-agnostic spectra and the closed-form predictors.
//!
//! Both predictors assume the integrand and sampler spectra are expressed in
//! one orthonormal basis per block; all domain measure factors live inside
//! the coefficients. Under that convention:
//!
//! * expected value = `ŵ_0 · conj(E[ŝ_0])`
//! * variance = `Σ_{λ ≠ 0} ‖π_λ(w)‖² · E‖π_λ(s)‖² / dim(λ)`
//!
//! The trivial block is excluded by label, never by thresholding its power.

use crate::error::{Error, Result};
use crate::stats::pairwise_sum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Domain tag shared by every block of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Domain {
    Torus { dim: usize },
    Sphere,
    Euclidean { dim: usize },
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Torus { dim } => write!(f, "torus(d={dim})"),
            Domain::Sphere => write!(f, "sphere"),
            Domain::Euclidean { dim } => write!(f, "euclidean(d={dim})"),
        }
    }
}

/// Label of one irreducible block.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockLabel {
    /// Integer frequency `λ ∈ Z^d`.
    Torus(Vec<i64>),
    /// Spherical-harmonic degree `l`.
    Sphere(u32),
    /// Radial shell `index` at `radius = index · width`.
    Shell { index: usize, radius: f64, width: f64 },
}

impl BlockLabel {
    pub fn trivial(domain: Domain) -> Self {
        match domain {
            Domain::Torus { dim } => BlockLabel::Torus(vec![0; dim]),
            Domain::Sphere => BlockLabel::Sphere(0),
            Domain::Euclidean { .. } => BlockLabel::Shell { index: 0, radius: 0.0, width: 0.0 },
        }
    }

    pub fn is_trivial(&self) -> bool {
        match self {
            BlockLabel::Torus(k) => k.iter().all(|&c| c == 0),
            BlockLabel::Sphere(l) => *l == 0,
            BlockLabel::Shell { index, .. } => *index == 0,
        }
    }

    /// Basis dimension for blocks with a finite basis (1 on the torus,
    /// `2l + 1` on the sphere).
    pub fn basis_dim(&self) -> Option<usize> {
        match self {
            BlockLabel::Torus(_) => Some(1),
            BlockLabel::Sphere(l) => Some(2 * *l as usize + 1),
            BlockLabel::Shell { .. } => None,
        }
    }

    fn matches(&self, domain: Domain) -> bool {
        match (self, domain) {
            (BlockLabel::Torus(k), Domain::Torus { dim }) => k.len() == dim,
            (BlockLabel::Sphere(_), Domain::Sphere) => true,
            (BlockLabel::Shell { .. }, Domain::Euclidean { .. }) => true,
            _ => false,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            BlockLabel::Torus(_) => 0,
            BlockLabel::Sphere(_) => 1,
            BlockLabel::Shell { .. } => 2,
        }
    }
}

impl PartialEq for BlockLabel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BlockLabel {}

impl PartialOrd for BlockLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Shells compare by index; radius and width are carried for reporting and
// their agreement is enforced through the truncation check.
impl Ord for BlockLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (BlockLabel::Torus(a), BlockLabel::Torus(b)) => a.cmp(b),
            (BlockLabel::Sphere(a), BlockLabel::Sphere(b)) => a.cmp(b),
            (BlockLabel::Shell { index: a, .. }, BlockLabel::Shell { index: b, .. }) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for BlockLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockLabel::Torus(k) => {
                let parts: Vec<String> = k.iter().map(i64::to_string).collect();
                write!(f, "t({})", parts.join(" "))
            }
            BlockLabel::Sphere(l) => write!(f, "l{l}"),
            BlockLabel::Shell { index, radius, .. } => write!(f, "s{index}@{radius:.6}"),
        }
    }
}

/// Where a spectrum was cut off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Truncation {
    /// Torus box `‖λ‖∞ ≤ bandwidth`.
    Bandwidth { bandwidth: u32 },
    /// Sphere degrees `0..=max_degree`.
    MaxDegree { max_degree: u32 },
    /// Euclidean shells `0..count` spaced by `spacing`.
    Shells { count: usize, spacing: f64 },
}

/// Power beyond the truncation, when it is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailPower {
    pub known: bool,
    pub power: f64,
}

impl TailPower {
    pub const UNKNOWN: Self = Self { known: false, power: 0.0 };

    pub fn known(power: f64) -> Self {
        Self { known: true, power: power.max(0.0) }
    }
}

/// Coefficients of one block. Torus and sphere blocks hold basis
/// coefficients; Euclidean shells hold directional samples instead.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientBlock {
    pub coefficients: Vec<Complex64>,
    pub directional: bool,
}

/// `v̂_λ^m = ⟨v, b_λ^m⟩` for every block inside a truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    domain: Domain,
    truncation: Truncation,
    blocks: BTreeMap<BlockLabel, CoefficientBlock>,
}

impl SpectralCoefficients {
    pub fn new(domain: Domain, truncation: Truncation) -> Self {
        Self { domain, truncation, blocks: BTreeMap::new() }
    }

    /// Inserts a block of basis coefficients, checking the label's domain and
    /// basis dimension.
    pub fn insert(&mut self, label: BlockLabel, coefficients: Vec<Complex64>) -> Result<()> {
        self.check_label(&label)?;
        if let Some(dim) = label.basis_dim() {
            if dim != coefficients.len() {
                return Err(Error::DimensionMismatch { expected: dim, actual: coefficients.len() });
            }
        }
        let directional = label.basis_dim().is_none();
        self.blocks.insert(label, CoefficientBlock { coefficients, directional });
        Ok(())
    }

    fn check_label(&self, label: &BlockLabel) -> Result<()> {
        if label.matches(self.domain) {
            Ok(())
        } else {
            Err(Error::DomainMismatch(self.domain.to_string(), label.to_string()))
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&BlockLabel, &CoefficientBlock)> {
        self.blocks.iter()
    }

    pub fn get(&self, label: &BlockLabel) -> Option<&CoefficientBlock> {
        self.blocks.get(label)
    }

    /// Trivial coefficient `v̂_0` (zero when absent).
    pub fn trivial_coefficient(&self) -> Complex64 {
        self.blocks
            .get(&BlockLabel::trivial(self.domain))
            .and_then(|b| b.coefficients.first().copied())
            .unwrap_or_default()
    }

    /// `⟨v, w⟩ = Σ_λ Σ_m v̂_λ^m conj(ŵ_λ^m)` over shared blocks.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let terms: Vec<Complex64> = self
            .blocks
            .iter()
            .filter_map(|(label, a)| {
                other.blocks.get(label).map(|b| {
                    a.coefficients.iter().zip(&b.coefficients).map(|(x, y)| x * y.conj()).sum()
                })
            })
            .collect();
        pairwise_sum(&terms)
    }
}

/// Power and dimension of one block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockPower {
    pub power: f64,
    pub dim: f64,
    /// Standard error when the power is an estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
}

/// `‖π_λ(v)‖²` and `dim(V^λ)` per block.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerByBlock {
    domain: Domain,
    truncation: Truncation,
    blocks: BTreeMap<BlockLabel, BlockPower>,
    tail: TailPower,
}

impl PowerByBlock {
    /// Empty spectrum holding only the trivial block (power 0, dimension 1).
    pub fn new(domain: Domain, truncation: Truncation) -> Self {
        let mut blocks = BTreeMap::new();
        blocks.insert(BlockLabel::trivial(domain), BlockPower { power: 0.0, dim: 1.0, se: None });
        Self { domain, truncation, blocks, tail: TailPower::UNKNOWN }
    }

    pub fn insert(&mut self, label: BlockLabel, power: BlockPower) -> Result<()> {
        if !label.matches(self.domain) {
            return Err(Error::DomainMismatch(self.domain.to_string(), label.to_string()));
        }
        if !(power.power >= 0.0) || !(power.dim > 0.0) {
            return Err(Error::Config(format!(
                "block {label}: power must be >= 0 and dim > 0 (got {}, {})",
                power.power, power.dim
            )));
        }
        self.blocks.insert(label, power);
        Ok(())
    }

    pub fn with_tail(mut self, tail: TailPower) -> Self {
        self.tail = tail;
        self
    }

    pub fn set_tail(&mut self, tail: TailPower) {
        self.tail = tail;
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn tail(&self) -> TailPower {
        self.tail
    }

    pub fn get(&self, label: &BlockLabel) -> Option<&BlockPower> {
        self.blocks.get(label)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&BlockLabel, &BlockPower)> {
        self.blocks.iter()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Sum of all block powers, trivial included.
    pub fn total_power(&self) -> f64 {
        let p: Vec<f64> = self.blocks.values().map(|b| b.power).collect();
        pairwise_sum(&p)
    }

    /// Multiplies every power by `factor` (e.g. `|c|²` when scaling an integrand by `c`).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for b in out.blocks.values_mut() {
            b.power *= factor;
            b.se = b.se.map(|s| s * factor);
        }
        out.tail.power *= factor;
        out
    }
}

/// `‖π_λ(v)‖² = Σ_m |v̂_λ^m|²` for every block; dimensions come from the labels.
///
/// Directional (Euclidean) blocks report the mean squared magnitude of their
/// samples with dimension 1.
pub fn power_from_coefficients(c: &SpectralCoefficients) -> PowerByBlock {
    let mut out = PowerByBlock::new(c.domain, c.truncation);
    for (label, block) in &c.blocks {
        let sq: Vec<f64> = block.coefficients.iter().map(|z| z.norm_sqr()).collect();
        let (power, dim) = match label.basis_dim() {
            Some(dim) => (pairwise_sum(&sq), dim as f64),
            None => (pairwise_sum(&sq) / sq.len().max(1) as f64, 1.0),
        };
        out.insert(label.clone(), BlockPower { power, dim, se: None })
            .expect("labels were validated on insertion");
    }
    out
}

/// `ŵ_0 · conj(E[v̂_0])`.
pub fn predict_expected(w_trivial: Complex64, mean_sampler_trivial: Complex64) -> Complex64 {
    w_trivial * mean_sampler_trivial.conj()
}

/// One non-trivial block's share of the predicted variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockContribution {
    pub label: BlockLabel,
    pub dim: f64,
    pub power_integrand: f64,
    pub power_sampler: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampler_se: Option<f64>,
    pub contribution: f64,
}

/// Predicted mean and variance of a Monte Carlo estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariancePrediction {
    /// Set when the caller supplied trivial coefficients.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_value: Option<Complex64>,
    pub variance: f64,
    pub contributions: Vec<BlockContribution>,
    pub tail_estimate: f64,
    pub tail_known: bool,
    /// Marks predictions that rest on a formal (non-compact) extension.
    pub formal: bool,
}

impl VariancePrediction {
    pub fn with_expected(mut self, value: Complex64) -> Self {
        self.expected_value = Some(value);
        self
    }

    /// CSV with one row per non-trivial block.
    pub fn contributions_csv(&self) -> String {
        let mut out = String::from("label,dim,power_integrand,power_sampler,contribution\n");
        for c in &self.contributions {
            out.push_str(&format!(
                "{},{:e},{:e},{:e},{:e}\n",
                c.label, c.dim, c.power_integrand, c.power_sampler, c.contribution
            ));
        }
        out
    }
}

fn check_compatible(a: &PowerByBlock, b: &PowerByBlock) -> Result<()> {
    if a.domain != b.domain {
        return Err(Error::DomainMismatch(a.domain.to_string(), b.domain.to_string()));
    }
    if a.truncation != b.truncation {
        return Err(Error::TruncationMismatch);
    }
    Ok(())
}

/// `Σ_{λ≠0} power_F(λ) · power_S(λ) / dim(λ)`.
///
/// Blocks missing from the sampler spectrum contribute zero. The tail estimate
/// is the integrand's out-of-band power times the largest in-band
/// `power_S / dim`; when the integrand tail is unknown it is 0 and
/// `tail_known` is false.
pub fn predict_variance(integrand: &PowerByBlock, sampler_expected: &PowerByBlock) -> Result<VariancePrediction> {
    check_compatible(integrand, sampler_expected)?;
    let mut contributions = Vec::new();
    let max_sampler_density = sampler_expected
        .blocks
        .iter()
        .filter(|(l, _)| !l.is_trivial())
        .map(|(_, s)| s.power / s.dim)
        .fold(0.0f64, f64::max);
    for (label, f) in integrand.blocks.iter().filter(|(l, _)| !l.is_trivial()) {
        let s = sampler_expected.blocks.get(label);
        let power_sampler = s.map_or(0.0, |s| s.power);
        contributions.push(BlockContribution {
            label: label.clone(),
            dim: f.dim,
            power_integrand: f.power,
            power_sampler,
            sampler_se: s.and_then(|s| s.se),
            contribution: f.power * power_sampler / f.dim,
        });
    }
    let terms: Vec<f64> = contributions.iter().map(|c| c.contribution).collect();
    let tail = integrand.tail;
    Ok(VariancePrediction {
        expected_value: None,
        variance: pairwise_sum(&terms),
        contributions,
        tail_estimate: if tail.known { tail.power * max_sampler_density } else { 0.0 },
        tail_known: tail.known,
        formal: false,
    })
}

// ---------------------------------------------------------------------------
// JSON schema: {domain, truncation, tail, blocks: [{label, dim, coefficients | power}]}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpectrumFile {
    domain: Domain,
    truncation: Truncation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tail: Option<TailPower>,
    blocks: Vec<BlockRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockRecord {
    label: BlockLabel,
    dim: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coefficients: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    se: Option<f64>,
}

impl PowerByBlock {
    pub fn to_json(&self) -> String {
        let file = SpectrumFile {
            domain: self.domain,
            truncation: self.truncation,
            tail: Some(self.tail),
            blocks: self
                .blocks
                .iter()
                .map(|(label, b)| BlockRecord {
                    label: label.clone(),
                    dim: b.dim,
                    coefficients: None,
                    power: Some(b.power),
                    se: b.se,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("spectrum serializes")
    }

    /// Parses the spectrum JSON schema; coefficient records are reduced to power.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpectrumFile = serde_json::from_str(text)?;
        let mut out = Self::new(file.domain, file.truncation).with_tail(file.tail.unwrap_or(TailPower::UNKNOWN));
        for rec in file.blocks {
            let power = match (rec.power, &rec.coefficients) {
                (Some(p), _) => p,
                (None, Some(c)) => c.iter().map(|[re, im]| re * re + im * im).sum(),
                (None, None) => {
                    return Err(Error::Config(format!("block {} has neither power nor coefficients", rec.label)))
                }
            };
            out.insert(rec.label, BlockPower { power, dim: rec.dim, se: rec.se })?;
        }
        Ok(out)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,dim,power,se\n");
        for (label, b) in &self.blocks {
            let se = b.se.map(|s| format!("{s:e}")).unwrap_or_default();
            out.push_str(&format!("{label},{:e},{:e},{se}\n", b.dim, b.power));
        }
        out
    }
}

impl SpectralCoefficients {
    pub fn to_json(&self) -> String {
        let file = SpectrumFile {
            domain: self.domain,
            truncation: self.truncation,
            tail: None,
            blocks: self
                .blocks
                .iter()
                .map(|(label, b)| BlockRecord {
                    label: label.clone(),
                    dim: label.basis_dim().unwrap_or(1) as f64,
                    coefficients: Some(b.coefficients.iter().map(|z| [z.re, z.im]).collect()),
                    power: None,
                    se: None,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("spectrum serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpectrumFile = serde_json::from_str(text)?;
        let mut out = Self::new(file.domain, file.truncation);
        for rec in file.blocks {
            let coeffs = rec
                .coefficients
                .ok_or_else(|| Error::Config(format!("block {} has no coefficients", rec.label)))?;
            out.insert(rec.label, coeffs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())?;
        }
        Ok(out)
    }
}
