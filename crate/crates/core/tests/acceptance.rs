//! Acceptance criteria, one line per criterion. Exits nonzero if any fails.

use spectral_variance::euclidean::{radial_power_points, shell_aggregated_torus_variance, EuclideanWindow, ShellGrid};
use spectral_variance::harness::{
    analytic_spectrum, compare, convergence_slope, empirical_mc_statistics, predict, ExperimentConfig, TruncationSpec,
};
use spectral_variance::integrand::{ExponentialTerm, HarmonicTerm, IntegrandSpec};
use spectral_variance::repcheck::{
    builtin_group_catalog, character_norm, cross_rep_average, inner, random_vector, schur_bilinear_average,
};
use spectral_variance::samplers::{draw, homogenize, GroupElement, PatternKind, SampleDomain, SamplePattern, SamplerSpec};
use spectral_variance::sphere::pattern_coefficients_sphere;
use spectral_variance::torus::pattern_coefficients;
use std::f64::consts::{PI, TAU};
use std::process::Command;
use std::time::Instant;

const SEED: u64 = 20_240_601;
/// Below this the directional error is converged and only rounding remains.
const ROUNDING_FLOOR: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn exp(freq: &[i64], re: f64) -> ExponentialTerm {
    ExponentialTerm { freq: freq.to_vec(), re, im: 0.0 }
}

fn cos_iid(n: usize, realizations: u64) -> ExperimentConfig {
    ExperimentConfig {
        sampler: SamplerSpec::iid(SampleDomain::Torus { dim: 1 }, n).unwrap(),
        integrand: IntegrandSpec::Cos { axis: 0, frequency: 1 },
        truncation: TruncationSpec::Bandwidth { bandwidth: 3 },
        realizations,
        seed: SEED,
    }
}

fn lemma1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for entry in builtin_group_catalog() {
        for irrep in &entry.irreps {
            let dim = irrep.rep.dim();
            for t in 0..64 {
                let [x, y, v, w] = [0, 1, 2, 3].map(|k| random_vector(dim, SEED, t, k));
                let lhs = schur_bilinear_average(&irrep.rep, &x, &y, &v, &w).unwrap();
                let rhs = inner(&x, &v) * inner(&y, &w).conj() / dim as f64;
                worst = worst.max((lhs - rhs).norm());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst <= 1e-12 && secs < 1.0, format!("max abs error {worst:.2e} (tol 1e-12), {secs:.3} s (limit 1 s)"))
}

fn lemma2() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for entry in builtin_group_catalog() {
        for (i, a) in entry.irreps.iter().enumerate() {
            for (j, b) in entry.irreps.iter().enumerate() {
                if i == j {
                    continue;
                }
                pairs += 1;
                for t in 0..64 {
                    let [v1, w1] = [0, 1].map(|k| random_vector(a.rep.dim(), SEED, t, k));
                    let [v2, w2] = [2, 3].map(|k| random_vector(b.rep.dim(), SEED, t, k));
                    worst = worst.max(cross_rep_average(&a.rep, &b.rep, &v1, &w1, &v2, &w2).unwrap().norm());
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-12 && secs < 1.0,
        format!("{pairs} ordered pairs, max |average| {worst:.2e} (tol 1e-12), {secs:.3} s (limit 1 s)"),
    )
}

fn characters() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for entry in builtin_group_catalog() {
        let order = entry.group.order() as f64;
        for irrep in &entry.irreps {
            count += 1;
            worst = worst.max(((character_norm(&irrep.rep) - order) / order).abs());
        }
    }
    outcome(worst <= 1e-9, format!("{count} irreps, max relative error {worst:.2e} (tol 1e-9)"))
}

fn torus_closed_form() -> Outcome {
    let mut worst = 0.0f64;
    for n in [4, 8, 32] {
        let c = cos_iid(n, 2);
        let v = predict(&c, &analytic_spectrum(&c).unwrap().unwrap()).unwrap().variance;
        let exact = 1.0 / (2.0 * n as f64);
        worst = worst.max(((v - exact) / exact).abs());
    }
    outcome(worst <= 1e-10, format!("N in {{4, 8, 32}}, max relative error {worst:.2e} (tol 1e-10)"))
}

fn torus_brute_force() -> Outcome {
    let start = Instant::now();
    let r = compare(&cos_iid(8, 100_000), 8).unwrap();
    let secs = start.elapsed().as_secs_f64();
    outcome(
        r.z_variance <= 4.0 && secs < 30.0,
        format!(
            "predicted {:.6e}, empirical {:.6e} ± {:.1e}, |z| = {:.2} (limit 4), {secs:.1} s (limit 30 s)",
            r.prediction.variance, r.empirical.variance, r.empirical.se_variance, r.z_variance
        ),
    )
}

fn exact_integration() -> Outcome {
    let integrand = IntegrandSpec::Exponentials {
        terms: vec![exp(&[0], 1.0), exp(&[1], 0.5), exp(&[-1], 0.5), exp(&[2], 0.3), exp(&[-3], 0.2)],
    };
    let c = ExperimentConfig {
        sampler: SamplerSpec::new(SampleDomain::Torus { dim: 1 }, 8, PatternKind::ShiftedLattice { generator: None })
            .unwrap(),
        integrand,
        truncation: TruncationSpec::Bandwidth { bandwidth: 3 },
        realizations: 10_000,
        seed: SEED,
    };
    let predicted = predict(&c, &analytic_spectrum(&c).unwrap().unwrap()).unwrap().variance;
    let empirical = empirical_mc_statistics(&c, 4).unwrap().variance;
    outcome(
        predicted == 0.0 && empirical <= 1e-20,
        format!("predicted {predicted:e}, empirical {empirical:.2e} (limit 1e-20)"),
    )
}

fn sphere() -> Outcome {
    let start = Instant::now();
    let c = ExperimentConfig {
        sampler: SamplerSpec::iid(SampleDomain::Sphere, 10).unwrap(),
        integrand: IntegrandSpec::Harmonics { terms: vec![HarmonicTerm { l: 1, m: 0, re: 1.0, im: 0.0 }] },
        truncation: TruncationSpec::MaxDegree { max_degree: 1 },
        realizations: 100_000,
        seed: SEED,
    };
    let r = compare(&c, 8).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let exact = 1.0 / (40.0 * PI);
    let rel = ((r.prediction.variance - exact) / exact).abs();
    outcome(
        rel <= 1e-10 && r.z_variance <= 4.0 && secs < 60.0,
        format!(
            "predicted {:.6e} (relative error {rel:.1e}), empirical {:.6e}, |z| = {:.2}, {secs:.1} s (limit 60 s)",
            r.prediction.variance, r.empirical.variance, r.z_variance
        ),
    )
}

fn unbiasedness() -> Outcome {
    let window = EuclideanWindow::new(2, 3.0, true).unwrap();
    let torus_f = IntegrandSpec::Exponentials {
        terms: vec![exp(&[0, 0], 2.0), exp(&[1, 0], 0.5), exp(&[-1, 0], 0.5), exp(&[2, 1], 0.7), exp(&[3, -2], 0.4)],
    };
    let sphere_f = IntegrandSpec::Harmonics {
        terms: vec![
            HarmonicTerm { l: 0, m: 0, re: 1.5, im: 0.0 },
            HarmonicTerm { l: 1, m: 0, re: 0.8, im: 0.0 },
            HarmonicTerm { l: 3, m: -2, re: 0.3, im: 0.4 },
        ],
    };
    let cases: Vec<(&str, SamplerSpec, IntegrandSpec, TruncationSpec)> = vec![
        (
            "torus1 iid",
            SamplerSpec::iid(SampleDomain::Torus { dim: 1 }, 8).unwrap(),
            IntegrandSpec::Smooth { terms: 6, decay: 0.5 },
            TruncationSpec::Bandwidth { bandwidth: 6 },
        ),
        (
            "torus2 jittered",
            SamplerSpec::new(SampleDomain::Torus { dim: 2 }, 16, PatternKind::JitteredGrid { strata: None }).unwrap(),
            torus_f.clone(),
            TruncationSpec::Bandwidth { bandwidth: 3 },
        ),
        (
            "torus2 lattice",
            SamplerSpec::new(
                SampleDomain::Torus { dim: 2 },
                13,
                PatternKind::ShiftedLattice { generator: Some(vec![1, 5]) },
            )
            .unwrap(),
            torus_f.clone(),
            TruncationSpec::Bandwidth { bandwidth: 3 },
        ),
        (
            "sphere iid",
            SamplerSpec::iid(SampleDomain::Sphere, 10).unwrap(),
            sphere_f.clone(),
            TruncationSpec::MaxDegree { max_degree: 3 },
        ),
        (
            "sphere fibonacci",
            SamplerSpec::new(SampleDomain::Sphere, 12, PatternKind::FibonacciRotated).unwrap(),
            sphere_f,
            TruncationSpec::MaxDegree { max_degree: 3 },
        ),
        (
            "window2 iid",
            SamplerSpec::iid(SampleDomain::Window { window }, 10).unwrap(),
            torus_f,
            TruncationSpec::Shells { grid: ShellGrid::new(8, 1.0, 16) },
        ),
    ];
    let mut all = true;
    let mut parts = Vec::new();
    for (name, sampler, integrand, truncation) in cases {
        let c = ExperimentConfig { sampler, integrand, truncation, realizations: 20_000, seed: SEED };
        let truth = c.integrand.resolve(&c.sampler.domain).unwrap().mean();
        let s = empirical_mc_statistics(&c, 8).unwrap();
        let err = (s.mean - truth).norm();
        // Exact samplers have se_mean at rounding level; the floor covers that.
        let ok = err <= 4.0 * s.se_mean + 1e-13 * (1.0 + truth.norm());
        all &= ok;
        parts.push(format!("{name} {:.2}se", if s.se_mean > 0.0 { err / s.se_mean } else { 0.0 }));
    }
    outcome(all, parts.join(", "))
}

fn invariance() -> Outcome {
    let torus = SampleDomain::Torus { dim: 2 };
    let base = draw(&SamplerSpec::iid(torus, 16).unwrap(), SEED, 0).unwrap();
    let SamplePattern::Torus(tp) = &base else { unreachable!() };
    let reference = pattern_coefficients(tp, 2, 6).unwrap().power_values();
    let sphere_base = draw(&SamplerSpec::iid(SampleDomain::Sphere, 20).unwrap(), SEED, 0).unwrap();
    let SamplePattern::Sphere(sp) = &sphere_base else { unreachable!() };
    let sphere_ref = pattern_coefficients_sphere(sp, 12).unwrap().degree_power();

    let window = EuclideanWindow::new(2, 2.0, true).unwrap();
    let wdomain = SampleDomain::Window { window };
    let grid = ShellGrid::new(24, 0.5, 32);
    let wbase = draw(&SamplerSpec::iid(wdomain, 12).unwrap(), SEED, 0).unwrap();
    let wref = radial_power_points(&wbase.coords(), window, grid).unwrap().power;

    let (mut t_err, mut s_err, mut w_err) = (0.0f64, 0.0f64, 0.0f64);
    for g in 1..=20 {
        let moved = homogenize(&base, &GroupElement::random(&torus, SEED + 1, g), &torus).unwrap();
        let SamplePattern::Torus(mp) = &moved else { unreachable!() };
        let p = pattern_coefficients(mp, 2, 6).unwrap().power_values();
        t_err = reference.iter().zip(&p).fold(t_err, |m, (a, b)| m.max((a - b).abs()));

        let rot = homogenize(&sphere_base, &GroupElement::random(&SampleDomain::Sphere, SEED + 2, g), &SampleDomain::Sphere)
            .unwrap();
        let SamplePattern::Sphere(rp) = &rot else { unreachable!() };
        let q = pattern_coefficients_sphere(rp, 12).unwrap().degree_power();
        s_err = sphere_ref.iter().zip(&q).fold(s_err, |m, (a, b)| m.max((a - b).abs()));

        let shifted = homogenize(&wbase, &GroupElement::random(&wdomain, SEED + 3, g), &wdomain).unwrap();
        let w = radial_power_points(&shifted.coords(), window, grid).unwrap().power;
        w_err = wref.iter().zip(&w).fold(w_err, |m, (a, b)| m.max((a - b).abs()));
    }

    // Rotations about the centre of a non-periodic window only move the
    // direction set, so the error is pure directional quadrature error.
    let open = EuclideanWindow::new(2, 4.0, false).unwrap();
    let pts: Vec<Vec<f64>> = (0..10)
        .map(|j| {
            let (r, a) = (0.2 + 0.17 * j as f64, 2.4 * j as f64);
            vec![2.0 + r * a.cos(), 2.0 + r * a.sin()]
        })
        .collect();
    let mut rot_errors = Vec::new();
    for dirs in [16, 32, 64, 128] {
        let grid = ShellGrid::new(12, 0.5, dirs);
        let before = radial_power_points(&pts, open, grid).unwrap().power;
        let mut worst = 0.0f64;
        for g in 0..20 {
            let a = TAU * (0.05 + 0.9 * g as f64 / 20.0) / dirs as f64 + 0.3 * g as f64;
            let rotated: Vec<Vec<f64>> = pts
                .iter()
                .map(|p| {
                    let (x, y) = (p[0] - 2.0, p[1] - 2.0);
                    vec![2.0 + a.cos() * x - a.sin() * y, 2.0 + a.sin() * x + a.cos() * y]
                })
                .collect();
            let after = radial_power_points(&rotated, open, grid).unwrap().power;
            worst = before.iter().zip(&after).fold(worst, |m, (a, b)| m.max((a - b).abs()));
        }
        rot_errors.push(worst);
    }
    let shrinking = rot_errors.windows(2).all(|w| w[1] <= w[0] || w[1] <= ROUNDING_FLOOR);
    outcome(
        t_err <= 1e-10 && s_err <= 1e-10 && w_err <= 1e-10 && shrinking,
        format!(
            "torus {t_err:.1e}, sphere {s_err:.1e}, window shift {w_err:.1e} (tol 1e-10); \
             window rotation error at 16/32/64/128 directions {:.1e}/{:.1e}/{:.1e}/{:.1e}",
            rot_errors[0], rot_errors[1], rot_errors[2], rot_errors[3]
        ),
    )
}

fn slopes() -> Outcome {
    let start = Instant::now();
    let ns = [8, 16, 32, 64, 128];
    let mut c = ExperimentConfig {
        sampler: SamplerSpec::iid(SampleDomain::Torus { dim: 1 }, 8).unwrap(),
        integrand: IntegrandSpec::Smooth { terms: 6, decay: 0.5 },
        truncation: TruncationSpec::Bandwidth { bandwidth: 6 },
        realizations: 10_000,
        seed: SEED,
    };
    let iid = convergence_slope(&c, &ns, 8).unwrap().slope;
    c.sampler.pattern = PatternKind::JitteredGrid { strata: None };
    let jittered = convergence_slope(&c, &ns, 8).unwrap().slope;
    let secs = start.elapsed().as_secs_f64();
    outcome(
        (iid + 1.0).abs() <= 0.3 && jittered <= -2.0 && secs < 300.0,
        format!("iid slope {iid:.3} (want -1 ± 0.3), jittered slope {jittered:.3} (want <= -2), {secs:.1} s"),
    )
}

fn euclidean_consistency() -> Outcome {
    let window = EuclideanWindow::new(1, TAU, true).unwrap();
    let integrand = IntegrandSpec::Exponentials {
        terms: vec![exp(&[1], 0.5), exp(&[-1], 0.5), exp(&[2], 0.25), exp(&[-2], 0.25)],
    };
    let torus = ExperimentConfig {
        sampler: SamplerSpec::iid(SampleDomain::Torus { dim: 1 }, 8).unwrap(),
        integrand: integrand.clone(),
        truncation: TruncationSpec::Bandwidth { bandwidth: 4 },
        realizations: 2,
        seed: SEED,
    };
    let f = torus.integrand.resolve(&torus.sampler.domain).unwrap().power(4).unwrap();
    let analytic = analytic_spectrum(&torus).unwrap().unwrap();
    let spectrum = match &analytic {
        spectral_variance::harness::ExpectedSpectrum::Blocks(b) => b,
        _ => unreachable!(),
    };
    let cell = TAU / window.side;
    let mut gaps = Vec::new();
    let mut formal = true;
    for spacing in [cell / 10.0, cell / 20.0] {
        let reference = shell_aggregated_torus_variance(&f, spectrum, window.side, spacing).unwrap();
        let grid = ShellGrid::new((4.0 * cell / spacing) as usize, spacing, 2).with_subsamples(8);
        let c = ExperimentConfig {
            sampler: SamplerSpec::iid(SampleDomain::Window { window }, 8).unwrap(),
            integrand: integrand.clone(),
            truncation: TruncationSpec::Shells { grid },
            realizations: 2,
            seed: SEED,
        };
        let p = predict(&c, &analytic_spectrum(&c).unwrap().unwrap()).unwrap();
        formal &= p.formal;
        gaps.push(((p.variance - reference) / reference).abs());
    }
    outcome(
        formal && gaps[0] <= 0.05 && gaps[1] < gaps[0],
        format!("relative gap {:.4} at spacing cell/10, {:.4} at cell/20 (limit 0.05, must shrink)", gaps[0], gaps[1]),
    )
}

fn run_compare(dir: &std::path::Path, config: &std::path::Path, workers: u32) -> (i32, String, String) {
    let status = Command::new(env!("CARGO_BIN_EXE_spectral-variance"))
        .args(["compare", "--config"])
        .arg(config)
        .args(["--workers", &workers.to_string(), "--out"])
        .arg(dir)
        .output()
        .expect("binary runs");
    let json = std::fs::read_to_string(dir.join("report.json")).unwrap_or_default();
    let csv = std::fs::read_to_string(dir.join("report.csv")).unwrap_or_default();
    (status.status.code().unwrap_or(-1), json, csv)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("config.json");
    let file = spectral_variance::config::ConfigFile::new(cos_iid(8, 20_000));
    std::fs::write(&config, file.to_json()).unwrap();
    let runs: Vec<(i32, String, String)> = [("a", 1), ("b", 1), ("w2", 2), ("w8", 8)]
        .iter()
        .map(|(name, w)| run_compare(&tmp.path().join(name), &config, *w))
        .collect();
    let identical = runs[0].1 == runs[1].1 && runs[0].2 == runs[1].2 && !runs[0].1.is_empty();
    let variance = |s: &str| -> f64 {
        let v: serde_json::Value = serde_json::from_str(s).unwrap();
        v["empirical"]["variance"].as_f64().unwrap()
    };
    let base = variance(&runs[0].1);
    let spread = runs[2..].iter().map(|r| (variance(&r.1) - base).abs()).fold(0.0, f64::max);
    let codes: Vec<i32> = runs.iter().map(|r| r.0).collect();
    outcome(
        identical && spread <= 1e-12 && codes.iter().all(|&c| c == 0),
        format!("repeat byte-identical: {identical}, max variance spread over 1/2/8 workers {spread:.1e}, exit codes {codes:?}"),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 12] = [
        (1, "schur average on irreducible blocks", lemma1),
        (2, "cross averages of non-isomorphic irreps", lemma2),
        (3, "character norms", characters),
        (4, "torus closed form vs analytic", torus_closed_form),
        (5, "torus closed form vs brute force", torus_brute_force),
        (6, "exact integration by shifted lattice", exact_integration),
        (7, "sphere Y_1^0 iid", sphere),
        (8, "unbiasedness", unbiasedness),
        (9, "invariance of power", invariance),
        (10, "convergence slopes", slopes),
        (11, "euclidean formal consistency", euclidean_consistency),
        (12, "determinism", determinism),
    ];
    let filter: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (id, name, check) in criteria {
        if filter.is_some_and(|f| f != id) {
            continue;
        }
        let o = check();
        println!("criterion {id:>2} {}: {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
