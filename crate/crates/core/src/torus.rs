//! Fourier analysis on the torus `[0, 2π)^d` in the orthonormal basis
//! `b_λ(p) = e^{i⟨λ,p⟩} / (2π)^{d/2}`, `λ ∈ Z^d`.
//!
//! Spectra are stored densely over the box `‖λ‖∞ ≤ L`, flattened
//! lexicographically with the first axis varying slowest.

use crate::error::{Error, Result};
use crate::spectra::{
    predict_variance, BlockLabel, BlockPower, Domain, PowerByBlock, SpectralCoefficients, TailPower, Truncation,
    VariancePrediction,
};
use crate::stats::pairwise_sum;
use num_complex::Complex64;
use std::f64::consts::TAU;

/// A point of the torus; every coordinate lies in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    /// Reduces each coordinate modulo `2π`.
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        Self(coords.into().into_iter().map(wrap).collect())
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Translation `p ↦ p + shift (mod 2π)`.
    pub fn shifted(&self, shift: &[f64]) -> Self {
        Self(self.0.iter().zip(shift).map(|(a, b)| wrap(a + b)).collect())
    }
}

/// `x mod 2π` in `[0, 2π)`.
pub fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// `(2π)^{-d/2}`.
pub fn basis_norm(dim: usize) -> f64 {
    TAU.powf(-(dim as f64) / 2.0)
}

/// Dense coefficients over the box `‖λ‖∞ ≤ bandwidth`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSpectrum {
    dim: usize,
    bandwidth: u32,
    coeffs: Vec<Complex64>,
}

impl TorusSpectrum {
    pub fn zeros(dim: usize, bandwidth: u32) -> Self {
        let len = box_len(dim, bandwidth);
        Self { dim, bandwidth, coeffs: vec![Complex64::default(); len] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> u32 {
        self.bandwidth
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn domain(&self) -> Domain {
        Domain::Torus { dim: self.dim }
    }

    pub fn truncation(&self) -> Truncation {
        Truncation::Bandwidth { bandwidth: self.bandwidth }
    }

    /// Frequency at a flat index.
    pub fn frequency(&self, index: usize) -> Vec<i64> {
        frequency_at(self.dim, self.bandwidth, index)
    }

    pub fn index_of(&self, freq: &[i64]) -> Option<usize> {
        box_index(self.dim, self.bandwidth, freq)
    }

    /// Coefficient at `freq` (zero outside the box).
    pub fn get(&self, freq: &[i64]) -> Complex64 {
        self.index_of(freq).map(|i| self.coeffs[i]).unwrap_or_default()
    }

    pub fn set(&mut self, freq: &[i64], value: Complex64) -> Result<()> {
        let i = self.index_of(freq).ok_or_else(|| {
            Error::Config(format!("frequency {freq:?} outside bandwidth {}", self.bandwidth))
        })?;
        self.coeffs[i] = value;
        Ok(())
    }

    pub fn trivial(&self) -> Complex64 {
        self.get(&vec![0; self.dim])
    }

    /// `|ĉ_λ|²` in flat order.
    pub fn power_values(&self) -> Vec<f64> {
        self.coeffs.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Per-frequency power (all dimensions 1).
    pub fn power(&self) -> PowerByBlock {
        power_by_block(self.dim, self.bandwidth, &self.power_values(), None)
    }

    pub fn to_coefficients(&self) -> SpectralCoefficients {
        let mut out = SpectralCoefficients::new(self.domain(), self.truncation());
        for (i, &c) in self.coeffs.iter().enumerate() {
            out.insert(BlockLabel::Torus(self.frequency(i)), vec![c]).expect("torus label");
        }
        out
    }

    /// `Σ_λ a_λ conj(b_λ)` over the common box.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let terms: Vec<Complex64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| a * other.get(&self.frequency(i)).conj())
            .collect();
        pairwise_sum(&terms)
    }
}

pub fn box_len(dim: usize, bandwidth: u32) -> usize {
    (2 * bandwidth as usize + 1).pow(dim as u32)
}

fn box_index(dim: usize, bandwidth: u32, freq: &[i64]) -> Option<usize> {
    let side = 2 * bandwidth as i64 + 1;
    if freq.len() != dim {
        return None;
    }
    let mut idx = 0i64;
    for &k in freq {
        if k.abs() > bandwidth as i64 {
            return None;
        }
        idx = idx * side + k + bandwidth as i64;
    }
    Some(idx as usize)
}

pub fn frequency_at(dim: usize, bandwidth: u32, mut index: usize) -> Vec<i64> {
    let side = 2 * bandwidth as usize + 1;
    let mut out = vec![0i64; dim];
    for slot in out.iter_mut().rev() {
        *slot = (index % side) as i64 - bandwidth as i64;
        index /= side;
    }
    out
}

/// Wraps dense per-frequency powers (and optional standard errors) as a
/// [`PowerByBlock`].
pub fn power_by_block(dim: usize, bandwidth: u32, power: &[f64], se: Option<&[f64]>) -> PowerByBlock {
    let mut out = PowerByBlock::new(Domain::Torus { dim }, Truncation::Bandwidth { bandwidth });
    for (i, &p) in power.iter().enumerate() {
        let label = BlockLabel::Torus(frequency_at(dim, bandwidth, i));
        let block = BlockPower { power: p.max(0.0), dim: 1.0, se: se.map(|s| s[i]) };
        out.insert(label, block).expect("torus label");
    }
    out
}

/// A band-limited integrand `F(p) = Σ_λ F̂_λ b_λ(p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandlimitedTorusFunction {
    spectrum: TorusSpectrum,
    real: bool,
    tail: TailPower,
}

impl BandlimitedTorusFunction {
    pub fn new(spectrum: TorusSpectrum) -> Self {
        Self { spectrum, real: false, tail: TailPower::known(0.0) }
    }

    /// Builds `Σ c_k e^{i⟨k,p⟩}` from plain exponential coefficients.
    pub fn from_exponentials(dim: usize, terms: &[(Vec<i64>, Complex64)]) -> Result<Self> {
        let bandwidth = terms.iter().flat_map(|(k, _)| k.iter().map(|c| c.unsigned_abs())).max().unwrap_or(0);
        let mut spectrum = TorusSpectrum::zeros(dim, bandwidth as u32);
        let scale = 1.0 / basis_norm(dim);
        for (k, c) in terms {
            if k.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: k.len() });
            }
            let prev = spectrum.get(k);
            spectrum.set(k, prev + c * scale)?;
        }
        Ok(Self::new(spectrum))
    }

    /// Marks the function as real-valued (`F̂_{-λ} = conj(F̂_λ)`).
    pub fn with_real_flag(mut self, real: bool) -> Self {
        self.real = real;
        self
    }

    pub fn with_tail(mut self, tail: TailPower) -> Self {
        self.tail = tail;
        self
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn spectrum(&self) -> &TorusSpectrum {
        &self.spectrum
    }

    pub fn dim(&self) -> usize {
        self.spectrum.dim
    }

    pub fn bandwidth(&self) -> u32 {
        self.spectrum.bandwidth
    }

    /// Largest `|F̂_{-λ} - conj(F̂_λ)|`.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let s = &self.spectrum;
        (0..s.coeffs.len())
            .map(|i| {
                let neg: Vec<i64> = s.frequency(i).iter().map(|k| -k).collect();
                (s.get(&neg) - s.coeffs[i].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn evaluate(&self, p: &[f64]) -> Complex64 {
        let s = &self.spectrum;
        let phases = axis_phases(p, s.bandwidth, 1.0);
        let terms: Vec<Complex64> =
            (0..s.coeffs.len()).map(|i| s.coeffs[i] * tensor_phase(&phases, s.dim, s.bandwidth, i)).collect();
        pairwise_sum(&terms) * basis_norm(s.dim)
    }

    /// Power spectrum padded (or cropped) to `bandwidth`; power outside the
    /// box is added to the tail.
    pub fn power_at(&self, bandwidth: u32) -> PowerByBlock {
        let own = &self.spectrum;
        let mut dense = vec![0.0; box_len(own.dim, bandwidth)];
        let mut outside = 0.0;
        for (i, c) in own.coeffs.iter().enumerate() {
            let k = own.frequency(i);
            match box_index(own.dim, bandwidth, &k) {
                Some(j) => dense[j] = c.norm_sqr(),
                None => outside += c.norm_sqr(),
            }
        }
        let tail = if self.tail.known { TailPower::known(self.tail.power + outside) } else { TailPower::UNKNOWN };
        power_by_block(own.dim, bandwidth, &dense, None).with_tail(tail)
    }
}

/// Per-axis `e^{sign·iλx}` for `λ ∈ [-L, L]`, laid out `[axis][λ + L]`.
fn axis_phases(p: &[f64], bandwidth: u32, sign: f64) -> Vec<Vec<Complex64>> {
    let l = bandwidth as i64;
    p.iter()
        .map(|&x| (-l..=l).map(|k| Complex64::cis(sign * k as f64 * x)).collect())
        .collect()
}

fn tensor_phase(phases: &[Vec<Complex64>], dim: usize, bandwidth: u32, mut index: usize) -> Complex64 {
    let side = 2 * bandwidth as usize + 1;
    let mut out = Complex64::new(1.0, 0.0);
    for axis in (0..dim).rev() {
        out *= phases[axis][index % side];
        index /= side;
    }
    out
}

fn check_points(points: &[TorusPoint], dim: usize) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptyPattern);
    }
    for p in points {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: p.dim() });
        }
    }
    Ok(())
}

/// `Ŝ_λ = (1 / (N (2π)^{d/2})) Σ_j e^{-i⟨λ, s_j⟩}` by direct summation.
pub fn pattern_coefficients(points: &[TorusPoint], dim: usize, bandwidth: u32) -> Result<TorusSpectrum> {
    check_points(points, dim)?;
    let mut out = TorusSpectrum::zeros(dim, bandwidth);
    let len = out.coeffs.len();
    let mut acc = vec![Vec::with_capacity(points.len()); len];
    for p in points {
        let phases = axis_phases(p.coords(), bandwidth, -1.0);
        for (i, bucket) in acc.iter_mut().enumerate() {
            bucket.push(tensor_phase(&phases, dim, bandwidth, i));
        }
    }
    let scale = basis_norm(dim) / points.len() as f64;
    for (c, bucket) in out.coeffs.iter_mut().zip(&acc) {
        *c = pairwise_sum(bucket) * scale;
    }
    Ok(out)
}

/// Analysis of an arbitrary function by the rectangle rule on a regular
/// `M^d` grid; exact for trigonometric polynomials of bandwidth `< M - L`.
pub fn function_coefficients<F>(f: F, dim: usize, bandwidth: u32, resolution: usize) -> Result<BandlimitedTorusFunction>
where
    F: Fn(&[f64]) -> Complex64,
{
    if resolution <= 2 * bandwidth as usize {
        return Err(Error::InsufficientResolution(format!(
            "grid resolution {resolution} must exceed twice the bandwidth {bandwidth}"
        )));
    }
    let m = resolution;
    let mut shape = vec![m; dim];
    let mut data: Vec<Complex64> = (0..m.pow(dim as u32))
        .map(|mut idx| {
            let mut p = vec![0.0; dim];
            for slot in p.iter_mut().rev() {
                *slot = TAU * (idx % m) as f64 / m as f64;
                idx /= m;
            }
            f(&p)
        })
        .collect();
    let l = bandwidth as i64;
    let side = 2 * bandwidth as usize + 1;
    let weights: Vec<Vec<Complex64>> = (-l..=l)
        .map(|k| {
            (0..m)
                .map(|j| {
                    let turns = (k * j as i64).rem_euclid(m as i64) as f64 / m as f64;
                    Complex64::cis(-TAU * turns)
                })
                .collect()
        })
        .collect();
    for axis in 0..dim {
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product();
        let mut next = vec![Complex64::default(); outer * side * inner];
        for o in 0..outer {
            for (k, w) in weights.iter().enumerate() {
                for i in 0..inner {
                    let terms: Vec<Complex64> =
                        (0..m).map(|j| data[(o * m + j) * inner + i] * w[j]).collect();
                    next[(o * side + k) * inner + i] = pairwise_sum(&terms);
                }
            }
        }
        data = next;
        shape[axis] = side;
    }
    let scale = 1.0 / (basis_norm(dim) * (m as f64).powi(dim as i32));
    let coeffs = data.into_iter().map(|c| c * scale).collect();
    Ok(BandlimitedTorusFunction::new(TorusSpectrum { dim, bandwidth, coeffs }).with_tail(TailPower::UNKNOWN))
}

/// `(1/N) Σ_i F(s_i)`.
pub fn mc_estimate(f: &BandlimitedTorusFunction, points: &[TorusPoint]) -> Result<Complex64> {
    check_points(points, f.dim())?;
    let values: Vec<Complex64> = points.iter().map(|p| f.evaluate(p.coords())).collect();
    Ok(pairwise_sum(&values) / points.len() as f64)
}

/// Torus variance `Σ_{λ≠0} |F̂_λ|² E|Ŝ_λ|²`: the generic predictor with every
/// block one-dimensional.
pub fn torus_variance_formula(integrand: &PowerByBlock, sampler: &PowerByBlock) -> Result<VariancePrediction> {
    for spectrum in [integrand, sampler] {
        if !matches!(spectrum.domain(), Domain::Torus { .. }) {
            return Err(Error::DomainMismatch("torus".into(), spectrum.domain().to_string()));
        }
        if let Some((label, _)) = spectrum.blocks().find(|(_, b)| b.dim != 1.0) {
            return Err(Error::Config(format!("torus block {label} must be one-dimensional")));
        }
    }
    predict_variance(integrand, sampler)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn pts1(xs: &[f64]) -> Vec<TorusPoint> {
        xs.iter().map(|&x| TorusPoint::new(vec![x])).collect()
    }

    fn cosine() -> BandlimitedTorusFunction {
        let half = Complex64::new(0.5, 0.0);
        BandlimitedTorusFunction::from_exponentials(1, &[(vec![1], half), (vec![-1], half)])
            .unwrap()
            .with_real_flag(true)
    }

    /// Midpoint-rule quadrature of `∫ f(p) e^{-ikp} dp / √(2π)` on a fine grid,
    /// independent of the library's transform.
    fn quadrature_coefficient(f: impl Fn(f64) -> f64, k: i64, m: usize) -> Complex64 {
        let h = TAU / m as f64;
        let sum: Complex64 = (0..m)
            .map(|j| {
                let p = (j as f64 + 0.5) * h;
                Complex64::cis(-(k as f64) * p) * f(p)
            })
            .sum();
        sum * h / TAU.sqrt()
    }

    #[test]
    fn wrap_reduces_into_range() {
        assert_eq!(TorusPoint::new(vec![-PI]).coords(), &[PI]);
        assert_eq!(TorusPoint::new(vec![TAU]).coords(), &[0.0]);
        assert!(wrap(-1e-300) < TAU);
    }

    #[test]
    fn trivial_pattern_coefficient() {
        for d in 1..=3 {
            let p: Vec<TorusPoint> = (0..5).map(|i| TorusPoint::new(vec![0.3 * i as f64; d])).collect();
            let s = pattern_coefficients(&p, d, 1).unwrap();
            assert!((s.trivial() - Complex64::new(basis_norm(d), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn pattern_coefficient_examples() {
        let s = pattern_coefficients(&pts1(&[0.0]), 1, 1).unwrap();
        assert!((s.get(&[1]) - Complex64::new(1.0 / TAU.sqrt(), 0.0)).norm() < 1e-15);
        let s = pattern_coefficients(&pts1(&[0.0, PI]), 1, 1).unwrap();
        assert!(s.get(&[1]).norm() < 1e-15);
    }

    #[test]
    fn empty_pattern_is_error() {
        assert!(matches!(pattern_coefficients(&[], 1, 1), Err(Error::EmptyPattern)));
        assert!(matches!(
            pattern_coefficients(&[TorusPoint::new(vec![0.0, 1.0])], 1, 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn constant_function_coefficients() {
        let f = function_coefficients(|_| Complex64::new(1.0, 0.0), 1, 3, 16).unwrap();
        assert!((f.spectrum().get(&[0]) - Complex64::new(TAU.sqrt(), 0.0)).norm() < 1e-12);
        for k in [-3i64, -2, -1, 1, 2, 3] {
            assert!(f.spectrum().get(&[k]).norm() < 1e-13);
        }
    }

    #[test]
    fn cosine_function_coefficients_match_quadrature() {
        let oracle = quadrature_coefficient(f64::cos, 1, 20_000);
        assert!((oracle.re - PI / TAU.sqrt()).abs() < 1e-9);
        let f = function_coefficients(|p| Complex64::new(p[0].cos(), 0.0), 1, 4, 16).unwrap();
        for k in [-1i64, 1] {
            assert!((f.spectrum().get(&[k]) - oracle).norm() < 1e-9);
        }
        assert!(f.spectrum().get(&[2]).norm() < 1e-13);
        assert!(f.spectrum().get(&[0]).norm() < 1e-13);
    }

    #[test]
    fn basis_function_analyses_to_unit_coefficient() {
        let k = [2i64, -1];
        let f = move |p: &[f64]| Complex64::cis(k[0] as f64 * p[0] + k[1] as f64 * p[1]) * basis_norm(2);
        let got = function_coefficients(f, 2, 3, 9).unwrap();
        for i in 0..got.spectrum().coefficients().len() {
            let freq = got.spectrum().frequency(i);
            let want = if freq == k { 1.0 } else { 0.0 };
            assert!((got.spectrum().coefficients()[i] - Complex64::new(want, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn insufficient_resolution_is_error() {
        let r = function_coefficients(|_| Complex64::default(), 1, 4, 8);
        assert!(matches!(r, Err(Error::InsufficientResolution(_))));
    }

    #[test]
    fn mc_estimate_examples() {
        let one = BandlimitedTorusFunction::from_exponentials(1, &[(vec![0], Complex64::new(1.0, 0.0))]).unwrap();
        assert!((mc_estimate(&one, &pts1(&[0.1, 2.0, 5.0])).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let cos = cosine();
        assert!((mc_estimate(&cos, &pts1(&[0.0])).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let sym = pts1(&[0.0, PI / 2.0, PI, 1.5 * PI]);
        assert!(mc_estimate(&cos, &sym).unwrap().norm() < 1e-14);
    }

    #[test]
    fn cosine_is_conjugate_symmetric() {
        assert!(cosine().is_real());
        assert!(cosine().conjugate_asymmetry() < 1e-15);
        let exp = BandlimitedTorusFunction::from_exponentials(1, &[(vec![1], Complex64::new(1.0, 0.0))]).unwrap();
        assert!(exp.conjugate_asymmetry() > 0.1);
    }

    #[test]
    fn variance_formula_examples() {
        let f = cosine().power_at(2);
        let n = 8.0;
        let mut s = vec![1.0 / (TAU * n); 5];
        s[2] = 1.0 / TAU;
        let iid = power_by_block(1, 2, &s, None);
        let v = torus_variance_formula(&f, &iid).unwrap().variance;
        assert!((v - 1.0 / (2.0 * n)).abs() < 1e-15);

        let constant = BandlimitedTorusFunction::from_exponentials(1, &[(vec![0], Complex64::new(3.0, 0.0))]).unwrap();
        assert_eq!(torus_variance_formula(&constant.power_at(2), &iid).unwrap().variance, 0.0);
    }

    #[test]
    fn shifted_four_point_grid_integrates_cosine_exactly() {
        // Exhaustive over shifts: |Ŝ_{±1}| vanishes for a regular 4-point grid.
        for j in 0..64 {
            let u = TAU * j as f64 / 64.0;
            let grid: Vec<TorusPoint> = (0..4).map(|i| TorusPoint::new(vec![u + TAU * i as f64 / 4.0])).collect();
            let s = pattern_coefficients(&grid, 1, 1).unwrap();
            let v = torus_variance_formula(&cosine().power_at(1), &s.power()).unwrap().variance;
            assert!(v < 1e-30, "shift {u}: {v}");
            assert!(mc_estimate(&cosine(), &grid).unwrap().norm() < 1e-14);
        }
    }

    #[test]
    fn power_at_moves_out_of_band_power_to_tail() {
        let p = cosine().power_at(0);
        assert_eq!(p.len(), 1);
        assert!(p.tail().known);
        assert!((p.tail().power - PI).abs() < 1e-14);
    }

    fn point_strategy(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(0.0..TAU, dim), 1..12)
    }

    proptest! {
        #[test]
        fn spectral_identity_holds(points in point_strategy(2), re in prop::collection::vec(-1.0f64..1.0, 25), im in prop::collection::vec(-1.0f64..1.0, 25)) {
            let mut spectrum = TorusSpectrum::zeros(2, 2);
            for (i, c) in spectrum.coeffs.iter_mut().enumerate() {
                *c = Complex64::new(re[i], im[i]);
            }
            let f = BandlimitedTorusFunction::new(spectrum);
            let pts: Vec<TorusPoint> = points.into_iter().map(TorusPoint::new).collect();
            let direct = mc_estimate(&f, &pts).unwrap();
            let spectral = f.spectrum().inner(&pattern_coefficients(&pts, 2, 2).unwrap());
            prop_assert!((direct - spectral).norm() < 1e-10);
        }

        #[test]
        fn power_is_translation_invariant(points in point_strategy(2), shift in prop::collection::vec(0.0..TAU, 2)) {
            let pts: Vec<TorusPoint> = points.into_iter().map(TorusPoint::new).collect();
            let moved: Vec<TorusPoint> = pts.iter().map(|p| p.shifted(&shift)).collect();
            let a = pattern_coefficients(&pts, 2, 3).unwrap().power_values();
            let b = pattern_coefficients(&moved, 2, 3).unwrap().power_values();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn analysis_synthesis_round_trip(re in prop::collection::vec(-1.0f64..1.0, 7), im in prop::collection::vec(-1.0f64..1.0, 7)) {
            let mut spectrum = TorusSpectrum::zeros(1, 3);
            for (i, c) in spectrum.coeffs.iter_mut().enumerate() {
                *c = Complex64::new(re[i], im[i]);
            }
            let f = BandlimitedTorusFunction::new(spectrum.clone());
            let back = function_coefficients(|p| f.evaluate(p), 1, 3, 11).unwrap();
            for (a, b) in back.spectrum().coefficients().iter().zip(spectrum.coefficients()) {
                prop_assert!((a - b).norm() < 1e-10);
            }
            // Parseval against the grid quadrature of |f|².
            let m = 64;
            let quad: f64 = (0..m).map(|j| f.evaluate(&[TAU * j as f64 / m as f64]).norm_sqr()).sum::<f64>() * TAU / m as f64;
            let total = spectrum.power_values().iter().sum::<f64>();
            prop_assert!((quad - total).abs() <= 1e-8 * total.max(1e-300));
        }
    }
}
