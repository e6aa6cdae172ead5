//! Analytic test integrands and their configuration form.

use crate::error::{Error, Result};
use crate::euclidean::{fluctuation_power_function, EuclideanWindow, RadialSpectrum, ShellGrid};
use crate::samplers::{SampleDomain, SamplePattern};
use crate::sphere::{mc_estimate_sphere, SphericalSpectrum};
use crate::spectra::PowerByBlock;
use crate::stats::pairwise_sum;
use crate::torus::{basis_norm, mc_estimate, BandlimitedTorusFunction};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// `c · e^{i⟨k, p⟩}` (on a window, `p` is rescaled to `2πp/T`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentialTerm {
    pub freq: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// `c · Y_l^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicTerm {
    pub l: u32,
    pub m: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum IntegrandSpec {
    Constant { value: f64 },
    /// `cos(frequency · x_axis)`; torus or window only.
    Cos {
        #[serde(default)]
        axis: usize,
        #[serde(default = "one")]
        frequency: i64,
    },
    /// `Σ_{k=1}^{terms} decay^k cos(k x_0)`; torus or window only.
    Smooth {
        #[serde(default = "default_smooth_terms")]
        terms: u32,
        #[serde(default = "default_decay")]
        decay: f64,
    },
    Exponentials { terms: Vec<ExponentialTerm> },
    Harmonics { terms: Vec<HarmonicTerm> },
}

fn one() -> i64 {
    1
}

fn default_smooth_terms() -> u32 {
    6
}

fn default_decay() -> f64 {
    0.5
}

impl IntegrandSpec {
    pub fn resolve(&self, domain: &SampleDomain) -> Result<Integrand> {
        match domain {
            SampleDomain::Sphere => self.sphere().map(Integrand::Sphere),
            SampleDomain::Torus { dim } => self.torus(*dim).map(Integrand::Torus),
            SampleDomain::Window { window } => {
                Ok(Integrand::Window { window: *window, f: self.torus(window.dim)? })
            }
        }
    }

    fn torus(&self, dim: usize) -> Result<BandlimitedTorusFunction> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let terms: Vec<(Vec<i64>, Complex64)> = match self {
            IntegrandSpec::Constant { value } => vec![(vec![0; dim], c(*value, 0.0))],
            IntegrandSpec::Cos { axis, frequency } => {
                if *axis >= dim {
                    return Err(Error::Config(format!("cos axis {axis} out of range for dimension {dim}")));
                }
                let mut k = vec![0; dim];
                k[*axis] = *frequency;
                let neg: Vec<i64> = k.iter().map(|x| -x).collect();
                vec![(k, c(0.5, 0.0)), (neg, c(0.5, 0.0))]
            }
            IntegrandSpec::Smooth { terms, decay } => (1..=i64::from(*terms))
                .flat_map(|k| {
                    let a = 0.5 * decay.powi(k as i32);
                    let mut f = vec![0; dim];
                    f[0] = k;
                    let neg: Vec<i64> = f.iter().map(|x| -x).collect();
                    [(f, c(a, 0.0)), (neg, c(a, 0.0))]
                })
                .collect(),
            IntegrandSpec::Exponentials { terms } => terms.iter().map(|t| (t.freq.clone(), c(t.re, t.im))).collect(),
            IntegrandSpec::Harmonics { .. } => {
                return Err(Error::Config("harmonic integrands need the sphere domain".into()))
            }
        };
        let f = BandlimitedTorusFunction::from_exponentials(dim, &terms)?;
        let real = f.conjugate_asymmetry() < 1e-15;
        Ok(f.with_real_flag(real))
    }

    fn sphere(&self) -> Result<SphericalSpectrum> {
        let terms: Vec<(u32, i64, Complex64)> = match self {
            IntegrandSpec::Constant { value } => vec![(0, 0, Complex64::new(value * (4.0 * PI).sqrt(), 0.0))],
            IntegrandSpec::Harmonics { terms } => terms.iter().map(|t| (t.l, t.m, Complex64::new(t.re, t.im))).collect(),
            _ => return Err(Error::Config("sphere integrands must be constant or harmonics".into())),
        };
        SphericalSpectrum::from_terms(&terms)
    }
}

/// An integrand bound to a sampling domain.
#[derive(Debug, Clone, PartialEq)]
pub enum Integrand {
    Torus(BandlimitedTorusFunction),
    Sphere(SphericalSpectrum),
    /// A torus function read through `p ↦ 2πp/T`.
    Window { window: EuclideanWindow, f: BandlimitedTorusFunction },
}

impl Integrand {
    /// The integral over the domain divided by its measure.
    pub fn mean(&self) -> Complex64 {
        match self {
            Integrand::Torus(f) | Integrand::Window { f, .. } => f.spectrum().trivial() * basis_norm(f.dim()),
            Integrand::Sphere(s) => s.get(0, 0) / (4.0 * PI).sqrt(),
        }
    }

    /// Orthonormal trivial coefficient `ŵ_0`.
    pub fn trivial_coefficient(&self) -> Complex64 {
        match self {
            Integrand::Torus(f) | Integrand::Window { f, .. } => f.spectrum().trivial(),
            Integrand::Sphere(s) => s.get(0, 0),
        }
    }

    /// Bandwidth (torus/window) or maximum degree (sphere).
    pub fn band(&self) -> u32 {
        match self {
            Integrand::Torus(f) | Integrand::Window { f, .. } => f.bandwidth(),
            Integrand::Sphere(s) => s.lmax(),
        }
    }

    pub fn evaluate_window(&self, p: &[f64]) -> Complex64 {
        match self {
            Integrand::Window { window, f } => {
                let scaled: Vec<f64> = p.iter().map(|x| TAU * x / window.side).collect();
                f.evaluate(&scaled)
            }
            Integrand::Torus(f) => f.evaluate(p),
            Integrand::Sphere(_) => panic!("sphere integrand evaluated at a flat point"),
        }
    }

    /// `(1/N) Σ F(s_i)`.
    pub fn mc_estimate(&self, pattern: &SamplePattern) -> Result<Complex64> {
        match (self, pattern) {
            (Integrand::Torus(f), SamplePattern::Torus(p)) => mc_estimate(f, p),
            (Integrand::Sphere(s), SamplePattern::Sphere(p)) => mc_estimate_sphere(s, p),
            (Integrand::Window { .. }, SamplePattern::Window(p)) => {
                if p.is_empty() {
                    return Err(Error::EmptyPattern);
                }
                let values: Vec<Complex64> = p.iter().map(|x| self.evaluate_window(x)).collect();
                Ok(pairwise_sum(&values) / p.len() as f64)
            }
            _ => Err(Error::DomainMismatch(self.domain_name().into(), pattern.domain_name().into())),
        }
    }

    /// Per-block power at truncation `band` (torus or sphere).
    pub fn power(&self, band: u32) -> Result<PowerByBlock> {
        match self {
            Integrand::Torus(f) => Ok(f.power_at(band)),
            Integrand::Sphere(s) => Ok(s.power_at(band)),
            Integrand::Window { .. } => Err(Error::Config("window integrands have radial spectra".into())),
        }
    }

    /// Fluctuation shell power on a window, from a midpoint grid fine enough to
    /// resolve the integrand's frequencies exactly.
    pub fn radial_power(&self, grid: ShellGrid) -> Result<RadialSpectrum> {
        match self {
            Integrand::Window { window, f } => {
                let resolution = (4 * (f.bandwidth() as usize + 1)).max(16);
                fluctuation_power_function(|p| self.evaluate_window(p), *window, grid, resolution)
            }
            _ => Err(Error::Config("radial spectra need a window integrand".into())),
        }
    }

    fn domain_name(&self) -> &'static str {
        match self {
            Integrand::Torus(_) => "torus",
            Integrand::Sphere(_) => "sphere",
            Integrand::Window { .. } => "window",
        }
    }
}
