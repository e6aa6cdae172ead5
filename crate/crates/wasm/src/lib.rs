//! Browser bindings for the demo page in `www/`.
//!
//! Each export returns a JSON string. The `*_json` functions hold the logic
//! and run natively as well; the exported wrappers only convert errors.

use serde_json::json;
use spectral_variance::harness::{
    analytic_spectrum, empirical_mc_statistics, estimate_expected_power, predict, ExpectedSpectrum, ExperimentConfig,
    TruncationSpec,
};
use spectral_variance::integrand::IntegrandSpec;
use spectral_variance::samplers::{draw, torus_points, PatternKind, SampleDomain, SamplerSpec};
use spectral_variance::spectra::BlockLabel;
use spectral_variance::stats::fit_slope;
use spectral_variance::torus::{frequency_at, pattern_coefficients};
use std::f64::consts::PI;
use wasm_bindgen::prelude::*;

const SMOOTH_BAND: u32 = 6;

fn pattern_kind(name: &str) -> Result<PatternKind, String> {
    Ok(match name {
        "iid" => PatternKind::IidUniform,
        "jittered" => PatternKind::JitteredGrid { strata: None },
        "lattice" => PatternKind::ShiftedLattice { generator: None },
        "fibonacci" => PatternKind::FibonacciRotated,
        other => return Err(format!("unknown pattern `{other}`")),
    })
}

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Predicted and empirical variance of the smooth test integrand on the
/// circle for N = 4, 8, ..., up to `max_n`, with the fitted log-log slope.
pub fn variance_curve_json(pattern: &str, max_n: u32, realizations: u32, seed: u64) -> Result<String, String> {
    let ns: Vec<usize> = (2..=10).map(|e| 1usize << e).take_while(|&n| n <= max_n as usize).collect();
    if ns.len() < 2 {
        return Err("max_n must be at least 8".into());
    }
    let mut predicted = Vec::new();
    let mut empirical = Vec::new();
    let mut se = Vec::new();
    for &n in &ns {
        let config = ExperimentConfig {
            sampler: SamplerSpec::new(SampleDomain::Torus { dim: 1 }, n, pattern_kind(pattern)?).map_err(text)?,
            integrand: IntegrandSpec::Smooth { terms: SMOOTH_BAND, decay: 0.5 },
            truncation: TruncationSpec::Bandwidth { bandwidth: SMOOTH_BAND },
            realizations: u64::from(realizations),
            seed,
        };
        let spectrum = analytic_spectrum(&config).map_err(text)?.ok_or("no closed form for this pattern")?;
        predicted.push(predict(&config, &spectrum).map_err(text)?.variance);
        let s = empirical_mc_statistics(&config, 1).map_err(text)?;
        empirical.push(s.variance);
        se.push(s.se_variance);
    }
    let logn: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let slope = |v: &[f64]| -> Option<f64> {
        v.iter().all(|&x| x > 0.0).then(|| fit_slope(&logn, &v.iter().map(|x| x.ln()).collect::<Vec<_>>()))
    };
    Ok(json!({
        "n": ns,
        "predicted": predicted,
        "empirical": empirical,
        "se": se,
        "slope_predicted": slope(&predicted),
        "slope_empirical": slope(&empirical),
    })
    .to_string())
}

/// One realization of a pattern on the 2-torus and its per-frequency power
/// `|Ŝ_k|²` for `‖k‖∞ ≤ bandwidth`.
pub fn torus_pattern_json(pattern: &str, n: u32, bandwidth: u32, seed: u64, realization: u32) -> Result<String, String> {
    let spec = SamplerSpec::new(SampleDomain::Torus { dim: 2 }, n as usize, pattern_kind(pattern)?).map_err(text)?;
    let drawn = draw(&spec, seed, u64::from(realization)).map_err(text)?;
    let points = torus_points(&drawn).ok_or("not a torus pattern")?;
    let power = pattern_coefficients(points, 2, bandwidth).map_err(text)?.power_values();
    let freqs: Vec<Vec<i64>> = (0..power.len()).map(|i| frequency_at(2, bandwidth, i)).collect();
    Ok(json!({
        "points": drawn.coords(),
        "frequencies": freqs,
        "power": power,
    })
    .to_string())
}

/// Estimated expected power per spherical-harmonic degree, next to the
/// i.i.d. reference `(2l + 1)/(4πN)`.
pub fn sphere_power_json(pattern: &str, n: u32, lmax: u32, realizations: u32, seed: u64) -> Result<String, String> {
    let config = ExperimentConfig {
        sampler: SamplerSpec::new(SampleDomain::Sphere, n as usize, pattern_kind(pattern)?).map_err(text)?,
        integrand: IntegrandSpec::Constant { value: 1.0 },
        truncation: TruncationSpec::MaxDegree { max_degree: lmax },
        realizations: u64::from(realizations),
        seed,
    };
    let ExpectedSpectrum::Blocks(spectrum) = estimate_expected_power(&config, 1).map_err(text)? else {
        return Err("expected a per-degree spectrum".into());
    };
    let mut power = Vec::new();
    let mut se = Vec::new();
    let mut iid = Vec::new();
    for l in 0..=lmax {
        let b = spectrum.get(&BlockLabel::Sphere(l)).ok_or("missing degree")?;
        power.push(b.power);
        se.push(b.se.unwrap_or(0.0));
        iid.push(if l == 0 { 1.0 / (4.0 * PI) } else { (2 * l + 1) as f64 / (4.0 * PI * n as f64) });
    }
    Ok(json!({ "degree": (0..=lmax).collect::<Vec<_>>(), "power": power, "se": se, "iid": iid }).to_string())
}

#[wasm_bindgen]
pub fn variance_curve(pattern: &str, max_n: u32, realizations: u32, seed: u32) -> Result<String, JsValue> {
    variance_curve_json(pattern, max_n, realizations, u64::from(seed)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn torus_pattern(pattern: &str, n: u32, bandwidth: u32, seed: u32, realization: u32) -> Result<String, JsValue> {
    torus_pattern_json(pattern, n, bandwidth, u64::from(seed), realization).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sphere_power(pattern: &str, n: u32, lmax: u32, realizations: u32, seed: u32) -> Result<String, JsValue> {
    sphere_power_json(pattern, n, lmax, realizations, u64::from(seed)).map_err(|e| JsValue::from_str(&e))
}
