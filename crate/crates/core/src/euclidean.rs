//! Radially averaged spectra on Euclidean windows and the formal shell predictor.
//!
//! Transforms use the raw convention `X̂(q) = Σ_j w_j e^{-i⟨q, p_j⟩}`: weights
//! `1/N` for point patterns, `F(p_j)·h^d` on a midpoint grid for functions.
//! Shell `k` is the annulus of width `Δλ` around `λ_k = k·Δλ`; its power is
//! the average of `|X̂(r u)|²` over directions `u` and radial subsamples `r`,
//! times the nominal shell size `λ_k^{d-1}|S^{d-1}|`. Shell 0 holds `|X̂(0)|²`.
//!
//! In a periodic window the spectrum lives on the reciprocal lattice
//! `(2π/T)·Z^d`; each frequency is evaluated at its nearest lattice point, and
//! shells `k ≥ 1` never see the lattice origin. In a non-periodic window the
//! transform is evaluated at `q` itself.

use crate::error::{Error, Result};
use crate::spectra::{BlockContribution, BlockLabel, BlockPower, Domain, PowerByBlock, Truncation, VariancePrediction};
use crate::sphere::gauss_legendre;
use crate::stats::pairwise_sum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

/// The box `[0, T)^d`, optionally with periodic boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EuclideanWindow {
    pub dim: usize,
    pub side: f64,
    #[serde(default)]
    pub periodic: bool,
}

impl EuclideanWindow {
    pub fn new(dim: usize, side: f64, periodic: bool) -> Result<Self> {
        let w = Self { dim, side, periodic };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::Config(format!("window dimension must be 1, 2 or 3, got {}", self.dim)));
        }
        if !(self.side > 0.0) || !self.side.is_finite() {
            return Err(Error::Config(format!("window side must be positive, got {}", self.side)));
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    /// Spacing of the reciprocal lattice, `2π/T`.
    pub fn lattice_spacing(&self) -> f64 {
        TAU / self.side
    }

    pub fn domain(&self) -> Domain {
        Domain::Euclidean { dim: self.dim }
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim && p.iter().all(|&x| (0.0..self.side).contains(&x))
    }

    /// Cyclic shift of `p` by `shift`, wrapped into the window.
    pub fn shifted(&self, p: &[f64], shift: &[f64]) -> Vec<f64> {
        p.iter()
            .zip(shift)
            .map(|(x, s)| {
                let y = (x + s).rem_euclid(self.side);
                if y >= self.side { 0.0 } else { y }
            })
            .collect()
    }

    /// Nearest reciprocal-lattice index of `q`.
    pub fn lattice_index(&self, q: &[f64]) -> Vec<i64> {
        q.iter().map(|x| (x / self.lattice_spacing()).round() as i64).collect()
    }

    /// `(1/|W|) ∫_W e^{-i⟨q, p⟩} dp`, the transform of the normalized window.
    pub fn characteristic(&self, q: &[f64]) -> Complex64 {
        q.iter().fold(Complex64::new(1.0, 0.0), |acc, &x| {
            let h = 0.5 * x * self.side;
            let sinc = if h.abs() < 1e-8 { 1.0 - h * h / 6.0 } else { h.sin() / h };
            acc * Complex64::from_polar(sinc, -h)
        })
    }
}

/// `|S^{d-1}|`, with `|S^0| = 2` counting the pair `{±1}`.
pub fn unit_sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => TAU,
        3 => 4.0 * PI,
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Radial shell grid `λ_k = k·Δλ`, `k = 0..=count`, with a directional order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellGrid {
    pub count: usize,
    pub spacing: f64,
    /// Number of directions per shell (requested; d = 3 rounds up to a
    /// product grid, d = 1 always uses `±1`).
    #[serde(default = "default_directions")]
    pub directions: usize,
    /// Radial midpoints sampled across each shell's width; 1 evaluates at
    /// the nominal radius only.
    #[serde(default = "default_subsamples")]
    pub subsamples: usize,
}

fn default_directions() -> usize {
    32
}

fn default_subsamples() -> usize {
    1
}

impl ShellGrid {
    pub fn new(count: usize, spacing: f64, directions: usize) -> Self {
        Self { count, spacing, directions, subsamples: 1 }
    }

    pub fn with_subsamples(mut self, subsamples: usize) -> Self {
        self.subsamples = subsamples;
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.subsamples < 1 {
            return Err(Error::InvalidShells("need at least one radial subsample".into()));
        }
        if self.count < 1 {
            return Err(Error::InvalidShells("need at least one non-trivial shell".into()));
        }
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(Error::InvalidShells(format!("shell spacing must be positive, got {}", self.spacing)));
        }
        let min = match dim {
            2 => 8,
            3 => 26,
            _ => 0,
        };
        if self.directions < min {
            return Err(Error::InvalidShells(format!(
                "{dim}-d shells need at least {min} directions, got {}",
                self.directions
            )));
        }
        Ok(())
    }

    pub fn radius(&self, k: usize) -> f64 {
        k as f64 * self.spacing
    }

    pub fn truncation(&self) -> Truncation {
        Truncation::Shells { count: self.count, spacing: self.spacing }
    }

    /// Trapezoid weight of shell `k`.
    pub fn weight(&self, k: usize) -> f64 {
        if k == 0 || k == self.count { 0.5 * self.spacing } else { self.spacing }
    }
}

/// Unit directions with weights summing to 1.
pub fn directional_quadrature(dim: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
    match dim {
        1 => vec![(vec![1.0], 0.5), (vec![-1.0], 0.5)],
        2 => {
            let n = order.max(1);
            (0..n)
                .map(|j| {
                    let (s, c) = (TAU * j as f64 / n as f64).sin_cos();
                    (vec![c, s], 1.0 / n as f64)
                })
                .collect()
        }
        3 => {
            let nt = ((order as f64 / 2.0).sqrt().ceil() as usize).max(1);
            let np = 2 * nt;
            let (xs, ws) = gauss_legendre(nt);
            let mut out = Vec::with_capacity(nt * np);
            for (&z, &w) in xs.iter().zip(&ws) {
                let r = (1.0 - z * z).max(0.0).sqrt();
                for j in 0..np {
                    let (s, c) = (TAU * j as f64 / np as f64).sin_cos();
                    out.push((vec![r * c, r * s, z], 0.5 * w / np as f64));
                }
            }
            out
        }
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Per-shell power on a window and shell grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSpectrum {
    pub window: EuclideanWindow,
    pub grid: ShellGrid,
    pub power: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<Vec<f64>>,
}

impl RadialSpectrum {
    /// Validates the shape and non-negativity of `power` (length `count + 1`).
    pub fn new(window: EuclideanWindow, grid: ShellGrid, power: Vec<f64>) -> Result<Self> {
        window.validate()?;
        grid.validate(window.dim)?;
        if power.len() != grid.count + 1 {
            return Err(Error::InvalidShells(format!("expected {} shells, got {}", grid.count + 1, power.len())));
        }
        if power.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::InvalidShells("shell powers must be non-negative".into()));
        }
        Ok(Self { window, grid, power, se: None })
    }

    pub fn with_se(mut self, se: Vec<f64>) -> Self {
        self.se = Some(se);
        self
    }

    /// `λ^{d-1}|S^{d-1}|` at shell `k`.
    pub fn shell_size(&self, k: usize) -> f64 {
        shell_size(self.window.dim, self.grid.radius(k))
    }

    /// Shell with the largest power among `k ≥ 1`.
    pub fn peak_shell(&self) -> usize {
        (1..self.power.len()).max_by(|&a, &b| self.power[a].total_cmp(&self.power[b])).unwrap_or(0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda,power,shell_size,se\n");
        for (k, p) in self.power.iter().enumerate() {
            let se = self.se.as_ref().map_or(String::new(), |s| format!("{:e}", s[k]));
            out.push_str(&format!("{:e},{:e},{:e},{se}\n", self.grid.radius(k), p, self.shell_size(k)));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("radial spectrum serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Self = serde_json::from_str(text)?;
        Self::new(s.window, s.grid, s.power.clone()).map(|r| match s.se {
            Some(se) => r.with_se(se),
            None => r,
        })
    }

    /// The same data as a [`PowerByBlock`], with shell sizes as dimensions.
    pub fn to_power_by_block(&self) -> PowerByBlock {
        let mut out = PowerByBlock::new(self.window.domain(), self.grid.truncation());
        for (k, &p) in self.power.iter().enumerate() {
            let dim = if k == 0 { 1.0 } else { self.shell_size(k) };
            let label = BlockLabel::Shell { index: k, radius: self.grid.radius(k), width: self.grid.spacing };
            let se = self.se.as_ref().map(|s| s[k]);
            out.insert(label, BlockPower { power: p, dim, se }).expect("shell label");
        }
        out
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.window != other.window || self.grid != other.grid {
            return Err(Error::InvalidShells("radial spectra are on different windows or shell grids".into()));
        }
        Ok(())
    }
}

pub fn shell_size(dim: usize, radius: f64) -> f64 {
    radius.powi(dim as i32 - 1) * unit_sphere_area(dim)
}

/// Tabulates a power function of frequency onto shells.
///
/// `power_at(q)` is called at the evaluation frequency of each shell direction
/// (the nearest lattice point in a periodic window). Shells `k ≥ 1` of a
/// periodic window read 0 wherever they snap to the lattice origin. Shell 0 is
/// `dc_power`.
pub fn tabulate<P>(window: EuclideanWindow, grid: ShellGrid, dc_power: f64, power_at: P) -> Result<RadialSpectrum>
where
    P: Fn(&[f64]) -> f64,
{
    window.validate()?;
    grid.validate(window.dim)?;
    let dirs = directional_quadrature(window.dim, grid.directions);
    let mut power = Vec::with_capacity(grid.count + 1);
    power.push(dc_power);
    let sub = grid.subsamples;
    for k in 1..=grid.count {
        let lambda = grid.radius(k);
        let terms: Vec<f64> = (0..sub)
            .flat_map(|j| {
                let r = lambda + grid.spacing * ((j as f64 + 0.5) / sub as f64 - 0.5);
                dirs.iter().map(move |(u, w)| (r, u, w))
            })
            .map(|(r, u, w)| {
                let q: Vec<f64> = u.iter().map(|c| c * r).collect();
                match evaluation_frequency(&window, &q) {
                    Some(q) => w * power_at(&q),
                    None => 0.0,
                }
            })
            .collect();
        power.push(pairwise_sum(&terms) / sub as f64 * shell_size(window.dim, lambda));
    }
    RadialSpectrum::new(window, grid, power)
}

fn evaluation_frequency(window: &EuclideanWindow, q: &[f64]) -> Option<Vec<f64>> {
    if !window.periodic {
        return Some(q.to_vec());
    }
    let k = window.lattice_index(q);
    if k.iter().all(|&c| c == 0) {
        return None;
    }
    Some(k.iter().map(|&c| c as f64 * window.lattice_spacing()).collect())
}

fn transform(points: &[Vec<f64>], weights: &[Complex64], q: &[f64]) -> Complex64 {
    let terms: Vec<Complex64> = points
        .iter()
        .zip(weights)
        .map(|(p, w)| {
            let phase: f64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
            w * Complex64::cis(-phase)
        })
        .collect();
    pairwise_sum(&terms)
}

fn check_points(points: &[Vec<f64>], window: &EuclideanWindow) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptyPattern);
    }
    if let Some(p) = points.iter().find(|p| p.len() != window.dim) {
        return Err(Error::DimensionMismatch { expected: window.dim, actual: p.len() });
    }
    Ok(())
}

/// Shell powers of `Ŝ(q) = (1/N) Σ e^{-i⟨q, s_j⟩}`.
pub fn radial_power_points(points: &[Vec<f64>], window: EuclideanWindow, grid: ShellGrid) -> Result<RadialSpectrum> {
    check_points(points, &window)?;
    let w = vec![Complex64::new(1.0 / points.len() as f64, 0.0); points.len()];
    tabulate(window, grid, 1.0, |q| transform(points, &w, q).norm_sqr())
}

/// Shell powers of `Ŝ(q) − C(q)`, with `C` the normalized window transform:
/// the pattern spectrum with its trivial (window-mean) part removed.
pub fn fluctuation_power_points(points: &[Vec<f64>], window: EuclideanWindow, grid: ShellGrid) -> Result<RadialSpectrum> {
    check_points(points, &window)?;
    let w = vec![Complex64::new(1.0 / points.len() as f64, 0.0); points.len()];
    tabulate(window, grid, 0.0, |q| {
        let s = transform(points, &w, q);
        if window.periodic { s.norm_sqr() } else { (s - window.characteristic(q)).norm_sqr() }
    })
}

/// Midpoint grid with `resolution` nodes per axis, and the node volume.
pub fn midpoint_grid(window: &EuclideanWindow, resolution: usize) -> (Vec<Vec<f64>>, f64) {
    let h = window.side / resolution as f64;
    let total = resolution.pow(window.dim as u32);
    let nodes = (0..total)
        .map(|mut idx| {
            (0..window.dim)
                .map(|_| {
                    let i = idx % resolution;
                    idx /= resolution;
                    (i as f64 + 0.5) * h
                })
                .collect()
        })
        .collect();
    (nodes, h.powi(window.dim as i32))
}

fn function_samples<F>(f: &F, window: &EuclideanWindow, resolution: usize) -> Result<(Vec<Vec<f64>>, Vec<Complex64>)>
where
    F: Fn(&[f64]) -> Complex64,
{
    if resolution < 2 {
        return Err(Error::InsufficientResolution(format!("function grid needs at least 2 nodes per axis, got {resolution}")));
    }
    let (nodes, cell) = midpoint_grid(window, resolution);
    let values = nodes.iter().map(|p| f(p) * cell).collect();
    Ok((nodes, values))
}

/// Shell powers of `F̂(q) = ∫_W F e^{-i⟨q, p⟩} dp` by the midpoint rule.
pub fn radial_power_function<F>(f: F, window: EuclideanWindow, grid: ShellGrid, resolution: usize) -> Result<RadialSpectrum>
where
    F: Fn(&[f64]) -> Complex64,
{
    window.validate()?;
    let (nodes, w) = function_samples(&f, &window, resolution)?;
    let dc = pairwise_sum(&w).norm_sqr();
    tabulate(window, grid, dc, |q| transform(&nodes, &w, q).norm_sqr())
}

/// Shell powers of the transform of `F − mean_W(F)`.
pub fn fluctuation_power_function<F>(f: F, window: EuclideanWindow, grid: ShellGrid, resolution: usize) -> Result<RadialSpectrum>
where
    F: Fn(&[f64]) -> Complex64,
{
    window.validate()?;
    let (nodes, w) = function_samples(&f, &window, resolution)?;
    let mean = pairwise_sum(&w) / nodes.len() as f64;
    let centered: Vec<Complex64> = w.iter().map(|v| v - mean).collect();
    tabulate(window, grid, 0.0, |q| transform(&nodes, &centered, q).norm_sqr())
}

/// Formal shell predictor
/// `(1/((2π)^d |W|)) Σ_{k≥1} w_k · P_F(λ_k) · P_S(λ_k) / (λ_k^{d-1}|S^{d-1}|)`
/// with trapezoid weights `w_k`.
///
/// The normalization makes this the variance of the window-mean estimator
/// `(1/N) Σ F(s_j)`. The `k = 0` integrand is 0, so the DC point mass never
/// enters; subtracting its product again would double count it, and shell 0
/// is therefore not used.
pub fn euclidean_variance_formula(integrand: &RadialSpectrum, sampler: &RadialSpectrum) -> Result<VariancePrediction> {
    integrand.check_grid(sampler)?;
    let window = integrand.window;
    let norm = 1.0 / (TAU.powi(window.dim as i32) * window.volume());
    let contributions: Vec<BlockContribution> = (1..=integrand.grid.count)
        .map(|k| {
            let size = integrand.shell_size(k);
            let (pf, ps) = (integrand.power[k], sampler.power[k]);
            BlockContribution {
                label: BlockLabel::Shell { index: k, radius: integrand.grid.radius(k), width: integrand.grid.spacing },
                dim: size,
                power_integrand: pf,
                power_sampler: ps,
                sampler_se: sampler.se.as_ref().map(|s| s[k]),
                contribution: norm * integrand.grid.weight(k) * pf * ps / size,
            }
        })
        .collect();
    let terms: Vec<f64> = contributions.iter().map(|c| c.contribution).collect();
    Ok(VariancePrediction {
        expected_value: None,
        variance: pairwise_sum(&terms),
        contributions,
        tail_estimate: 0.0,
        tail_known: false,
        formal: true,
    })
}

/// Torus predictor with frequencies grouped into shells by `|q|`, where the
/// lattice point `k` sits at `q = (2π/T)·k`: `Σ_shells (Σ power_F)(Σ power_S) / #points`.
///
/// For samplers whose expected power depends only on `|k|` this equals the
/// plain torus sum.
pub fn shell_aggregated_torus_variance(integrand: &PowerByBlock, sampler: &PowerByBlock, side: f64, spacing: f64) -> Result<f64> {
    let Domain::Torus { .. } = integrand.domain() else {
        return Err(Error::DomainMismatch("torus".into(), integrand.domain().to_string()));
    };
    if sampler.domain() != integrand.domain() {
        return Err(Error::DomainMismatch(integrand.domain().to_string(), sampler.domain().to_string()));
    }
    let mut shells: BTreeMap<i64, (f64, f64, usize)> = BTreeMap::new();
    for (label, f) in integrand.blocks().filter(|(l, _)| !l.is_trivial()) {
        let BlockLabel::Torus(k) = label else { continue };
        let radius = TAU / side * (k.iter().map(|&c| (c * c) as f64).sum::<f64>()).sqrt();
        let entry = shells.entry((radius / spacing).round() as i64).or_default();
        entry.0 += f.power / f.dim;
        entry.1 += sampler.get(label).map_or(0.0, |s| s.power / s.dim);
        entry.2 += 1;
    }
    let terms: Vec<f64> = shells.values().map(|(f, s, n)| f * s / *n as f64).collect();
    Ok(pairwise_sum(&terms))
}
