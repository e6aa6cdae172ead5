//! Homogeneous sampling patterns on the torus, the sphere and Euclidean windows.
//!
//! Every built-in pattern is a base construction composed with one uniformly
//! random group element per realization: a toroidal shift, a rotation, or a
//! cyclic shift of the window. Randomness is addressed by
//! `(seed, realization, slot)` through [`crate::rng`], so any realization can
//! be regenerated on its own.

use crate::error::{Error, Result};
use crate::euclidean::{tabulate, EuclideanWindow, RadialSpectrum, ShellGrid};
use crate::rng::{self, GROUP_SLOT};
use crate::sphere::{fibonacci_points, power_by_degree, uniform_point, uniform_rotation, SpherePoint};
use crate::spectra::PowerByBlock;
use crate::torus::{box_len, frequency_at, power_by_block, TorusPoint};
use nalgebra::UnitQuaternion;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Where a pattern lives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SampleDomain {
    Torus { dim: usize },
    Sphere,
    Window { window: EuclideanWindow },
}

impl SampleDomain {
    pub fn validate(&self) -> Result<()> {
        match self {
            SampleDomain::Torus { dim } if *dim == 0 => Err(Error::Config("torus dimension must be positive".into())),
            SampleDomain::Window { window } => window.validate(),
            _ => Ok(()),
        }
    }

    /// Coordinate count of a point.
    pub fn point_dim(&self) -> usize {
        match self {
            SampleDomain::Torus { dim } => *dim,
            SampleDomain::Sphere => 3,
            SampleDomain::Window { window } => window.dim,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SampleDomain::Torus { .. } => "torus",
            SampleDomain::Sphere => "sphere",
            SampleDomain::Window { .. } => "window",
        }
    }

    /// Period of the flat coordinates (`2π` on the torus, `T` on a window).
    fn period(&self) -> f64 {
        match self {
            SampleDomain::Window { window } => window.side,
            _ => TAU,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PatternKind {
    IidUniform,
    /// One uniform point per cell of a `strata[0] × … × strata[d-1]` grid.
    JitteredGrid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        strata: Option<Vec<usize>>,
    },
    /// Rank-1 lattice `{ j·g / N mod 1 }` scaled to the period.
    ShiftedLattice {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generator: Option<Vec<i64>>,
    },
    FibonacciRotated,
    /// A fixed base pattern moved by a random group element.
    FixedPatternRandomized { base: Vec<Vec<f64>> },
}

/// A sampling-pattern distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerSpec {
    pub domain: SampleDomain,
    /// Points per pattern.
    pub n: usize,
    pub pattern: PatternKind,
}

impl SamplerSpec {
    pub fn new(domain: SampleDomain, n: usize, pattern: PatternKind) -> Result<Self> {
        let spec = Self { domain, n, pattern };
        spec.validate()?;
        Ok(spec)
    }

    pub fn iid(domain: SampleDomain, n: usize) -> Result<Self> {
        Self::new(domain, n, PatternKind::IidUniform)
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if self.n == 0 {
            return Err(Error::InvalidSampler("pattern needs at least one point".into()));
        }
        let flat = !matches!(self.domain, SampleDomain::Sphere);
        match &self.pattern {
            PatternKind::IidUniform => {}
            PatternKind::JitteredGrid { .. } | PatternKind::ShiftedLattice { .. } if !flat => {
                return Err(Error::InvalidSampler("grid and lattice patterns need a torus or window".into()));
            }
            PatternKind::JitteredGrid { .. } => {
                self.strata()?;
            }
            PatternKind::ShiftedLattice { .. } => {
                self.generator()?;
            }
            PatternKind::FibonacciRotated if flat => {
                return Err(Error::InvalidSampler("fibonacci-rotated is a sphere pattern".into()));
            }
            PatternKind::FibonacciRotated => {}
            PatternKind::FixedPatternRandomized { base } => {
                if base.len() != self.n {
                    return Err(Error::InvalidSampler(format!("base has {} points, n is {}", base.len(), self.n)));
                }
                self.base_pattern()?;
            }
        }
        Ok(())
    }

    /// Strata per axis for a jittered grid.
    pub fn strata(&self) -> Result<Vec<usize>> {
        let PatternKind::JitteredGrid { strata } = &self.pattern else {
            return Err(Error::InvalidSampler("not a jittered grid".into()));
        };
        let dim = self.domain.point_dim();
        let strata = match strata {
            Some(s) => s.clone(),
            None => {
                let side = (self.n as f64).powf(1.0 / dim as f64).round() as usize;
                vec![side; dim]
            }
        };
        if strata.len() != dim || strata.iter().any(|&s| s == 0) || strata.iter().product::<usize>() != self.n {
            return Err(Error::InvalidSampler(format!(
                "strata {strata:?} must have {dim} positive entries multiplying to {}",
                self.n
            )));
        }
        Ok(strata)
    }

    /// Lattice generator (defaults to all ones).
    pub fn generator(&self) -> Result<Vec<i64>> {
        let PatternKind::ShiftedLattice { generator } = &self.pattern else {
            return Err(Error::InvalidSampler("not a shifted lattice".into()));
        };
        let dim = self.domain.point_dim();
        let g = generator.clone().unwrap_or_else(|| vec![1; dim]);
        if g.len() != dim {
            return Err(Error::InvalidSampler(format!("generator needs {dim} entries, got {}", g.len())));
        }
        Ok(g)
    }

    /// Whether every generator entry is coprime to `n`, which makes each
    /// coordinate projection a full regular grid.
    pub fn lattice_coprime(&self) -> Option<bool> {
        let g = self.generator().ok()?;
        Some(g.iter().all(|&x| gcd(x.unsigned_abs(), self.n as u64) == 1))
    }

    fn base_pattern(&self) -> Result<SamplePattern> {
        let PatternKind::FixedPatternRandomized { base } = &self.pattern else {
            return Err(Error::InvalidSampler("not a fixed pattern".into()));
        };
        SamplePattern::from_coords(&self.domain, base)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `N` points on one domain.
#[derive(Debug, Clone, PartialEq)]
pub enum SamplePattern {
    Torus(Vec<TorusPoint>),
    Sphere(Vec<SpherePoint>),
    Window(Vec<Vec<f64>>),
}

impl SamplePattern {
    /// Validates raw coordinates for `domain` (torus coordinates are wrapped;
    /// sphere points must be unit vectors; window points must lie inside).
    pub fn from_coords(domain: &SampleDomain, coords: &[Vec<f64>]) -> Result<Self> {
        let dim = domain.point_dim();
        if let Some(p) = coords.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, actual: p.len() });
        }
        if let Some(p) = coords.iter().find(|p| p.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidPoint(format!("{p:?}")));
        }
        match domain {
            SampleDomain::Torus { .. } => Ok(Self::Torus(coords.iter().map(|p| TorusPoint::new(p.clone())).collect())),
            SampleDomain::Sphere => coords
                .iter()
                .map(|p| SpherePoint::new(p[0], p[1], p[2]))
                .collect::<Result<Vec<_>>>()
                .map(Self::Sphere),
            SampleDomain::Window { window } => {
                if let Some(p) = coords.iter().find(|p| !window.contains(p)) {
                    return Err(Error::InvalidPoint(format!("{p:?} lies outside the window")));
                }
                Ok(Self::Window(coords.to_vec()))
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Torus(p) => p.len(),
            Self::Sphere(p) => p.len(),
            Self::Window(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn domain_name(&self) -> &'static str {
        match self {
            Self::Torus(_) => "torus",
            Self::Sphere(_) => "sphere",
            Self::Window(_) => "window",
        }
    }

    /// Plain coordinates (unit vectors on the sphere).
    pub fn coords(&self) -> Vec<Vec<f64>> {
        match self {
            Self::Torus(p) => p.iter().map(|x| x.coords().to_vec()).collect(),
            Self::Sphere(p) => p.iter().map(|x| vec![x.x(), x.y(), x.z()]).collect(),
            Self::Window(p) => p.clone(),
        }
    }
}

/// A measure-preserving map of the domain.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    Shift(Vec<f64>),
    Rotation(UnitQuaternion<f64>),
    CyclicShift(Vec<f64>),
}

impl GroupElement {
    pub fn identity(domain: &SampleDomain) -> Self {
        match domain {
            SampleDomain::Torus { dim } => Self::Shift(vec![0.0; *dim]),
            SampleDomain::Sphere => Self::Rotation(UnitQuaternion::identity()),
            SampleDomain::Window { window } => Self::CyclicShift(vec![0.0; window.dim]),
        }
    }

    /// The element used by `realization` under `seed`.
    pub fn random(domain: &SampleDomain, seed: u64, realization: u64) -> Self {
        let mut r = rng::stream(seed, realization, GROUP_SLOT);
        match domain {
            SampleDomain::Torus { dim } => Self::Shift((0..*dim).map(|_| TAU * rng::unit(&mut r)).collect()),
            SampleDomain::Sphere => {
                let (a, b, c) = (rng::unit(&mut r), rng::unit(&mut r), rng::unit(&mut r));
                Self::Rotation(uniform_rotation(a, b, c))
            }
            SampleDomain::Window { window } => {
                Self::CyclicShift((0..window.dim).map(|_| window.side * rng::unit(&mut r)).collect())
            }
        }
    }
}

/// `γ(base)`, applied pointwise.
pub fn homogenize(base: &SamplePattern, element: &GroupElement, domain: &SampleDomain) -> Result<SamplePattern> {
    match (base, element, domain) {
        (SamplePattern::Torus(p), GroupElement::Shift(s), _) => {
            Ok(SamplePattern::Torus(p.iter().map(|x| x.shifted(s)).collect()))
        }
        (SamplePattern::Sphere(p), GroupElement::Rotation(q), _) => {
            Ok(SamplePattern::Sphere(p.iter().map(|x| x.rotated(q)).collect()))
        }
        (SamplePattern::Window(p), GroupElement::CyclicShift(s), SampleDomain::Window { window }) => {
            Ok(SamplePattern::Window(p.iter().map(|x| window.shifted(x, s)).collect()))
        }
        _ => Err(Error::DomainMismatch(base.domain_name().into(), domain.name().into())),
    }
}

/// One realization together with the base pattern and group element behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub base: SamplePattern,
    pub element: GroupElement,
    pub pattern: SamplePattern,
}

pub fn draw(spec: &SamplerSpec, seed: u64, realization: u64) -> Result<SamplePattern> {
    draw_detailed(spec, seed, realization).map(|d| d.pattern)
}

pub fn draw_detailed(spec: &SamplerSpec, seed: u64, realization: u64) -> Result<Draw> {
    spec.validate()?;
    let base = base_pattern(spec, seed, realization)?;
    let element = GroupElement::random(&spec.domain, seed, realization);
    let pattern = homogenize(&base, &element, &spec.domain)?;
    Ok(Draw { base, element, pattern })
}

fn point_uniforms(seed: u64, realization: u64, index: usize, count: usize) -> Vec<f64> {
    let mut r = rng::stream(seed, realization, rng::point_slot(index));
    (0..count).map(|_| rng::unit(&mut r)).collect()
}

/// Coordinates of the base construction in `[0, 1)^d` for flat domains.
fn unit_cube_points(spec: &SamplerSpec, seed: u64, realization: u64) -> Result<Vec<Vec<f64>>> {
    let dim = spec.domain.point_dim();
    let n = spec.n;
    Ok(match &spec.pattern {
        PatternKind::IidUniform => (0..n).map(|j| point_uniforms(seed, realization, j, dim)).collect(),
        PatternKind::JitteredGrid { .. } => {
            let strata = spec.strata()?;
            (0..n)
                .map(|j| {
                    let u = point_uniforms(seed, realization, j, dim);
                    let mut rest = j;
                    let mut cell = vec![0usize; dim];
                    for axis in (0..dim).rev() {
                        cell[axis] = rest % strata[axis];
                        rest /= strata[axis];
                    }
                    (0..dim).map(|a| (cell[a] as f64 + u[a]) / strata[a] as f64).collect()
                })
                .collect()
        }
        PatternKind::ShiftedLattice { .. } => {
            let g = spec.generator()?;
            let big = n as i64;
            (0..n)
                .map(|j| g.iter().map(|&gi| ((j as i64 * gi).rem_euclid(big)) as f64 / n as f64).collect())
                .collect()
        }
        PatternKind::FibonacciRotated | PatternKind::FixedPatternRandomized { .. } => {
            return Err(Error::InvalidSampler("not a unit-cube construction".into()))
        }
    })
}

fn base_pattern(spec: &SamplerSpec, seed: u64, realization: u64) -> Result<SamplePattern> {
    match (&spec.domain, &spec.pattern) {
        (_, PatternKind::FixedPatternRandomized { .. }) => spec.base_pattern(),
        (SampleDomain::Sphere, PatternKind::IidUniform) => Ok(SamplePattern::Sphere(
            (0..spec.n)
                .map(|j| {
                    let u = point_uniforms(seed, realization, j, 2);
                    uniform_point(u[0], u[1])
                })
                .collect(),
        )),
        (SampleDomain::Sphere, PatternKind::FibonacciRotated) => Ok(SamplePattern::Sphere(fibonacci_points(spec.n))),
        (SampleDomain::Sphere, _) => Err(Error::InvalidSampler("unsupported sphere pattern".into())),
        (domain, _) => {
            let period = domain.period();
            let unit = unit_cube_points(spec, seed, realization)?;
            match domain {
                SampleDomain::Window { window } => Ok(SamplePattern::Window(
                    unit.into_iter()
                        .map(|p| p.into_iter().map(|x| (x * period).min(window.side * (1.0 - f64::EPSILON))).collect())
                        .collect(),
                )),
                _ => Ok(SamplePattern::Torus(
                    unit.into_iter().map(|p| TorusPoint::new(p.into_iter().map(|x| x * period).collect::<Vec<_>>())).collect(),
                )),
            }
        }
    }
}

/// Stratum of each flat point relative to a shift, for jittered-grid checks.
pub fn strata_counts(points: &[Vec<f64>], strata: &[usize], period: f64, shift: &[f64]) -> Vec<usize> {
    let total: usize = strata.iter().product();
    let mut counts = vec![0; total];
    for p in points {
        let mut idx = 0;
        for (axis, &s) in strata.iter().enumerate() {
            let x = (p[axis] - shift[axis]).rem_euclid(period) / period;
            idx = idx * s + ((x * s as f64) as usize).min(s - 1);
        }
        counts[idx] += 1;
    }
    counts
}

fn sinc_sq(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (x.sin() / x).powi(2)
    }
}

/// Raw `E|Ŝ_k|²` at a non-zero lattice frequency `k` for flat patterns with
/// a closed form, or `None`.
fn lattice_power(spec: &SamplerSpec, k: &[i64]) -> Result<Option<f64>> {
    let n = spec.n as f64;
    Ok(match &spec.pattern {
        PatternKind::IidUniform => Some(1.0 / n),
        PatternKind::ShiftedLattice { .. } => {
            let g = spec.generator()?;
            let dot: i64 = g.iter().zip(k).map(|(a, b)| a * b).sum();
            Some(if dot.rem_euclid(spec.n as i64) == 0 { 1.0 } else { 0.0 })
        }
        PatternKind::JitteredGrid { .. } => {
            let strata = spec.strata()?;
            let prod: f64 = k.iter().zip(&strata).map(|(&ki, &s)| sinc_sq(PI * ki as f64 / s as f64)).product();
            Some((1.0 - prod) / n)
        }
        _ => None,
    })
}

/// Closed-form expected power `E|Ŝ_λ|²` at truncation `band`, for patterns
/// that have one (iid, jittered grid and shifted lattice on the torus; iid on
/// the sphere). Returns `None` otherwise.
pub fn analytic_expected_power(spec: &SamplerSpec, band: u32) -> Result<Option<PowerByBlock>> {
    spec.validate()?;
    match spec.domain {
        SampleDomain::Torus { dim } => {
            let norm = TAU.powi(-(dim as i32));
            let mut power = Vec::with_capacity(box_len(dim, band));
            for i in 0..box_len(dim, band) {
                let k = frequency_at(dim, band, i);
                if k.iter().all(|&c| c == 0) {
                    power.push(norm);
                    continue;
                }
                match lattice_power(spec, &k)? {
                    Some(p) => power.push(p * norm),
                    None => return Ok(None),
                }
            }
            Ok(Some(power_by_block(dim, band, &power, None)))
        }
        SampleDomain::Sphere if matches!(spec.pattern, PatternKind::IidUniform) || spec.n == 1 => {
            let n = spec.n as f64;
            let power: Vec<f64> = (0..=band).map(|l| f64::from(2 * l + 1) / (4.0 * PI * n)).collect();
            let mut out = power_by_degree(&power, None);
            let mut trivial = *out.get(&crate::spectra::BlockLabel::Sphere(0)).expect("trivial block");
            trivial.power = 1.0 / (4.0 * PI);
            out.insert(crate::spectra::BlockLabel::Sphere(0), trivial)?;
            Ok(Some(out))
        }
        _ => Ok(None),
    }
}

/// Closed-form expected fluctuation shell power on a window, where one exists:
/// iid in any window, and jittered grid or shifted lattice in a periodic one.
pub fn analytic_expected_radial(spec: &SamplerSpec, grid: ShellGrid) -> Result<Option<RadialSpectrum>> {
    spec.validate()?;
    let SampleDomain::Window { window } = spec.domain else {
        return Err(Error::DomainMismatch("window".into(), spec.domain.name().into()));
    };
    let n = spec.n as f64;
    if !window.periodic {
        if !matches!(spec.pattern, PatternKind::IidUniform) {
            return Ok(None);
        }
        return tabulate(window, grid, 0.0, |q| (1.0 - window.characteristic(q).norm_sqr()) / n).map(Some);
    }
    if lattice_power(spec, &vec![1; window.dim])?.is_none() {
        return Ok(None);
    }
    tabulate(window, grid, 0.0, |q| {
        let k = window.lattice_index(q);
        lattice_power(spec, &k).ok().flatten().unwrap_or(0.0)
    })
    .map(Some)
}

/// Sphere points of a pattern.
pub fn sphere_points(pattern: &SamplePattern) -> Option<&[SpherePoint]> {
    match pattern {
        SamplePattern::Sphere(p) => Some(p),
        _ => None,
    }
}

/// Torus points of a pattern.
pub fn torus_points(pattern: &SamplePattern) -> Option<&[TorusPoint]> {
    match pattern {
        SamplePattern::Torus(p) => Some(p),
        _ => None,
    }
}
