//! Spherical harmonic analysis on the unit 2-sphere.
//!
//! `Y_l^m` are the complex orthonormal harmonics with the Condon–Shortley
//! phase, `Y_l^{-m} = (-1)^m conj(Y_l^m)`. Coefficients for all `(l, m)` up to
//! a maximum degree are stored flat at index `l² + l + m`.

use crate::error::{Error, Result};
use crate::spectra::{
    predict_variance, BlockLabel, BlockPower, Domain, PowerByBlock, SpectralCoefficients, TailPower, Truncation,
    VariancePrediction,
};
use crate::stats::pairwise_sum;
use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Unit-norm tolerance for [`SpherePoint::new`].
pub const UNIT_TOL: f64 = 1e-12;

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    v: Vector3<f64>,
}

impl SpherePoint {
    /// Requires `‖(x, y, z)‖ = 1` to within [`UNIT_TOL`].
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Vector3::new(x, y, z);
        if (v.norm() - 1.0).abs() > UNIT_TOL || !v.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidPoint(format!("({x}, {y}, {z}) is not a unit vector")));
        }
        Ok(Self { v })
    }

    /// Projects a nonzero vector onto the sphere.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let v = Vector3::new(x, y, z);
        let n = v.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidPoint(format!("cannot normalize ({x}, {y}, {z})")));
        }
        Ok(Self { v: v / n })
    }

    /// Point with colatitude `theta` and longitude `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let s = theta.sin();
        Self { v: Vector3::new(s * phi.cos(), s * phi.sin(), theta.cos()) }
    }

    pub fn north() -> Self {
        Self { v: Vector3::z() }
    }

    pub fn x(&self) -> f64 {
        self.v.x
    }

    pub fn y(&self) -> f64 {
        self.v.y
    }

    pub fn z(&self) -> f64 {
        self.v.z
    }

    pub fn vector(&self) -> Vector3<f64> {
        self.v
    }

    /// Colatitude in `[0, π]`.
    pub fn theta(&self) -> f64 {
        self.v.x.hypot(self.v.y).atan2(self.v.z)
    }

    /// Longitude in `[0, 2π)`.
    pub fn phi(&self) -> f64 {
        crate::torus::wrap(self.v.y.atan2(self.v.x))
    }

    pub fn antipode(&self) -> Self {
        Self { v: -self.v }
    }

    pub fn rotated(&self, rotation: &UnitQuaternion<f64>) -> Self {
        let w = rotation * self.v;
        // Renormalize so repeated rotations stay on the sphere.
        Self { v: w / w.norm() }
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.v.dot(&other.v)
    }
}

/// Uniform rotation from three uniforms in `[0, 1)` by the subgroup
/// algorithm: a uniform rotation about the pole composed with a uniform choice
/// of where the pole goes, written in quaternion form.
pub fn uniform_rotation(u1: f64, u2: f64, u3: f64) -> UnitQuaternion<f64> {
    let a = (1.0 - u1).sqrt();
    let b = u1.sqrt();
    let (s2, c2) = (TAU * u2).sin_cos();
    let (s3, c3) = (TAU * u3).sin_cos();
    UnitQuaternion::from_quaternion(Quaternion::new(b * c3, a * s2, a * c2, b * s3))
}

/// Uniform point on the sphere from two uniforms (Archimedes' projection).
pub fn uniform_point(u1: f64, u2: f64) -> SpherePoint {
    let z = 1.0 - 2.0 * u1;
    let r = (1.0 - z * z).max(0.0).sqrt();
    let (s, c) = (TAU * u2).sin_cos();
    SpherePoint { v: Vector3::new(r * c, r * s, z) }
}

/// Spherical Fibonacci point set with `n` points.
pub fn fibonacci_points(n: usize) -> Vec<SpherePoint> {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = TAU * (i as f64 / golden).fract();
            SpherePoint { v: Vector3::new(r * phi.cos(), r * phi.sin(), z) }
        })
        .collect()
}

/// Flat index of `(l, m)`.
pub fn sh_index(l: u32, m: i64) -> usize {
    (i64::from(l) * i64::from(l) + i64::from(l) + m) as usize
}

/// Number of `(l, m)` pairs with `l ≤ lmax`.
pub fn sh_count(lmax: u32) -> usize {
    ((lmax + 1) * (lmax + 1)) as usize
}

/// Normalized associated Legendre values `P̄_l^m(cos θ)` for `0 ≤ m ≤ l ≤ lmax`
/// at index `l(l+1)/2 + m`, such that `Y_l^m = P̄_l^m(cos θ) e^{imφ}`.
///
/// The sectoral terms are seeded from `sin θ` directly and the recurrence in
/// `l` carries the normalization, which keeps it stable to high degree.
fn legendre_table(lmax: u32, cos_theta: f64, sin_theta: f64) -> Vec<f64> {
    let n = lmax as usize;
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut p = vec![0.0; (n + 1) * (n + 2) / 2];
    p[0] = 1.0 / (4.0 * PI).sqrt();
    for m in 1..=n {
        let mf = m as f64;
        p[idx(m, m)] = -((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin_theta * p[idx(m - 1, m - 1)];
    }
    for m in 0..n {
        p[idx(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * cos_theta * p[idx(m, m)];
    }
    for m in 0..=n {
        let mf = m as f64;
        for l in (m + 2)..=n {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[idx(l, m)] = a * (cos_theta * p[idx(l - 1, m)] - b * p[idx(l - 2, m)]);
        }
    }
    p
}

/// All `Y_l^m(p)` for `l ≤ lmax`, at [`sh_index`].
pub fn sh_all(lmax: u32, p: &SpherePoint) -> Vec<Complex64> {
    let sin_theta = p.x().hypot(p.y());
    let table = legendre_table(lmax, p.z(), sin_theta);
    let phi = p.y().atan2(p.x());
    let mut out = vec![Complex64::default(); sh_count(lmax)];
    for l in 0..=lmax as usize {
        for m in 0..=l {
            let y = Complex64::from_polar(table[l * (l + 1) / 2 + m], m as f64 * phi);
            out[sh_index(l as u32, m as i64)] = y;
            if m > 0 {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out[sh_index(l as u32, -(m as i64))] = y.conj() * sign;
            }
        }
    }
    out
}

/// `Y_l^m(p)`.
pub fn eval_sh(l: u32, m: i64, p: &SpherePoint) -> Result<Complex64> {
    if m.unsigned_abs() > u64::from(l) {
        return Err(Error::InvalidHarmonic { l, m });
    }
    Ok(sh_all(l, p)[sh_index(l, m)])
}

/// Coefficients `F̂_l^m` for `l ≤ lmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalSpectrum {
    lmax: u32,
    coeffs: Vec<Complex64>,
    tail: TailPower,
}

impl SphericalSpectrum {
    pub fn zeros(lmax: u32) -> Self {
        Self { lmax, coeffs: vec![Complex64::default(); sh_count(lmax)], tail: TailPower::known(0.0) }
    }

    /// Builds `Σ c Y_l^m` from `(l, m, c)` terms.
    pub fn from_terms(terms: &[(u32, i64, Complex64)]) -> Result<Self> {
        let lmax = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let mut out = Self::zeros(lmax);
        for &(l, m, c) in terms {
            if m.unsigned_abs() > u64::from(l) {
                return Err(Error::InvalidHarmonic { l, m });
            }
            out.coeffs[sh_index(l, m)] += c;
        }
        Ok(out)
    }

    pub fn with_tail(mut self, tail: TailPower) -> Self {
        self.tail = tail;
        self
    }

    pub fn lmax(&self) -> u32 {
        self.lmax
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// The `2l + 1` coefficients of degree `l`, ordered `m = -l..=l`.
    pub fn degree(&self, l: u32) -> &[Complex64] {
        &self.coeffs[sh_index(l, -i64::from(l))..=sh_index(l, i64::from(l))]
    }

    pub fn get(&self, l: u32, m: i64) -> Complex64 {
        if l > self.lmax || m.unsigned_abs() > u64::from(l) {
            Complex64::default()
        } else {
            self.coeffs[sh_index(l, m)]
        }
    }

    /// `Σ_m |F̂_l^m|²` for each degree.
    pub fn degree_power(&self) -> Vec<f64> {
        (0..=self.lmax)
            .map(|l| {
                let sq: Vec<f64> = self.degree(l).iter().map(|z| z.norm_sqr()).collect();
                pairwise_sum(&sq)
            })
            .collect()
    }

    /// Per-degree power at truncation `lmax` (padding with zeros or moving
    /// higher degrees into the tail).
    pub fn power_at(&self, lmax: u32) -> PowerByBlock {
        let own = self.degree_power();
        let dense: Vec<f64> = (0..=lmax as usize).map(|l| own.get(l).copied().unwrap_or(0.0)).collect();
        let outside: f64 = own.iter().skip(lmax as usize + 1).sum();
        let tail = if self.tail.known { TailPower::known(self.tail.power + outside) } else { TailPower::UNKNOWN };
        power_by_degree(&dense, None).with_tail(tail)
    }

    pub fn power(&self) -> PowerByBlock {
        self.power_at(self.lmax)
    }

    pub fn to_coefficients(&self) -> SpectralCoefficients {
        let mut out = SpectralCoefficients::new(Domain::Sphere, Truncation::MaxDegree { max_degree: self.lmax });
        for l in 0..=self.lmax {
            out.insert(BlockLabel::Sphere(l), self.degree(l).to_vec()).expect("sphere label");
        }
        out
    }

    pub fn evaluate(&self, p: &SpherePoint) -> Complex64 {
        let y = sh_all(self.lmax, p);
        let terms: Vec<Complex64> = self.coeffs.iter().zip(&y).map(|(c, y)| c * y).collect();
        pairwise_sum(&terms)
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        let terms: Vec<Complex64> = (0..=self.lmax.min(other.lmax))
            .flat_map(|l| {
                let li = i64::from(l);
                (-li..=li).map(move |m| (l, m))
            })
            .map(|(l, m)| self.get(l, m) * other.get(l, m).conj())
            .collect();
        pairwise_sum(&terms)
    }
}

/// Wraps per-degree powers as a [`PowerByBlock`] with dimensions `2l + 1`.
pub fn power_by_degree(power: &[f64], se: Option<&[f64]>) -> PowerByBlock {
    let lmax = power.len().saturating_sub(1) as u32;
    let mut out = PowerByBlock::new(Domain::Sphere, Truncation::MaxDegree { max_degree: lmax });
    for (l, &p) in power.iter().enumerate() {
        let block = BlockPower { power: p.max(0.0), dim: (2 * l + 1) as f64, se: se.map(|s| s[l]) };
        out.insert(BlockLabel::Sphere(l as u32), block).expect("sphere label");
    }
    out
}

/// `Ŝ_l^m = (1/N) Σ_j conj(Y_l^m(s_j))`.
pub fn pattern_coefficients_sphere(points: &[SpherePoint], lmax: u32) -> Result<SphericalSpectrum> {
    if points.is_empty() {
        return Err(Error::EmptyPattern);
    }
    let mut acc = vec![Vec::with_capacity(points.len()); sh_count(lmax)];
    for p in points {
        for (bucket, y) in acc.iter_mut().zip(sh_all(lmax, p)) {
            bucket.push(y.conj());
        }
    }
    let n = points.len() as f64;
    let coeffs = acc.iter().map(|b| pairwise_sum(b) / n).collect();
    Ok(SphericalSpectrum { lmax, coeffs, tail: TailPower::known(0.0) })
}

/// `(1/N) Σ_i F(s_i)` for a band-limited `F`.
pub fn mc_estimate_sphere(f: &SphericalSpectrum, points: &[SpherePoint]) -> Result<Complex64> {
    if points.is_empty() {
        return Err(Error::EmptyPattern);
    }
    let values: Vec<Complex64> = points.iter().map(|p| f.evaluate(p)).collect();
    Ok(pairwise_sum(&values) / points.len() as f64)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        nodes[n - 1 - i] = -x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Product quadrature: Gauss–Legendre in `cos θ` times the trapezoid rule in `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereQuadrature {
    pub theta_nodes: usize,
    pub phi_nodes: usize,
}

impl SphereQuadrature {
    /// Smallest grid that integrates products of degree-`lmax` harmonics exactly.
    pub fn for_degree(lmax: u32) -> Self {
        Self { theta_nodes: lmax as usize + 1, phi_nodes: 2 * lmax as usize + 1 }
    }

    /// Nodes with weights summing to `4π`.
    pub fn nodes(&self) -> Vec<(SpherePoint, f64)> {
        let (xs, ws) = gauss_legendre(self.theta_nodes);
        let dphi = TAU / self.phi_nodes as f64;
        let mut out = Vec::with_capacity(self.theta_nodes * self.phi_nodes);
        for (&x, &w) in xs.iter().zip(&ws) {
            let s = (1.0 - x * x).max(0.0).sqrt();
            for j in 0..self.phi_nodes {
                let (sp, cp) = (dphi * j as f64).sin_cos();
                out.push((SpherePoint { v: Vector3::new(s * cp, s * sp, x) }, w * dphi));
            }
        }
        out
    }
}

/// `F̂_l^m = ∫ F conj(Y_l^m)` by product quadrature; exact for `F` of degree
/// at most `lmax` when the grid has `≥ lmax + 1` latitude and `≥ 2 lmax + 1`
/// longitude nodes.
pub fn function_coefficients_sphere<F>(f: F, lmax: u32, quadrature: SphereQuadrature) -> Result<SphericalSpectrum>
where
    F: Fn(&SpherePoint) -> Complex64,
{
    let need = SphereQuadrature::for_degree(lmax);
    if quadrature.theta_nodes < need.theta_nodes || quadrature.phi_nodes < need.phi_nodes {
        return Err(Error::InsufficientResolution(format!(
            "degree {lmax} needs at least {} x {} nodes, got {} x {}",
            need.theta_nodes, need.phi_nodes, quadrature.theta_nodes, quadrature.phi_nodes
        )));
    }
    let nodes = quadrature.nodes();
    let mut acc = vec![Vec::with_capacity(nodes.len()); sh_count(lmax)];
    for (p, w) in &nodes {
        let fv = f(p) * *w;
        for (bucket, y) in acc.iter_mut().zip(sh_all(lmax, p)) {
            bucket.push(fv * y.conj());
        }
    }
    let coeffs = acc.iter().map(|b| pairwise_sum(b)).collect();
    Ok(SphericalSpectrum { lmax, coeffs, tail: TailPower::UNKNOWN })
}

/// `Σ_{l≥1} [Σ_m |F̂_l^m|²] [Σ_m E|Ŝ_l^m|²] / (2l + 1)`.
pub fn sphere_variance_formula(integrand: &PowerByBlock, sampler: &PowerByBlock) -> Result<VariancePrediction> {
    for spectrum in [integrand, sampler] {
        if spectrum.domain() != Domain::Sphere {
            return Err(Error::DomainMismatch("sphere".into(), spectrum.domain().to_string()));
        }
        for (label, b) in spectrum.blocks() {
            if let BlockLabel::Sphere(l) = label {
                if b.dim != f64::from(2 * l + 1) {
                    return Err(Error::Config(format!("degree {l} must have dimension {}", 2 * l + 1)));
                }
            }
        }
    }
    predict_variance(integrand, sampler)
}
