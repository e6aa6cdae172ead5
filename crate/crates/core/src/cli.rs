//! The `spectral-variance` command-line tool.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage
//! and input errors. Each command that writes files also writes
//! `manifest.json` to its output directory.

use crate::config::ConfigFile;
use crate::error::{Error, Result};
use crate::harness::{
    analytic_spectrum, compare, empirical_mc_statistics, estimate_expected_power, pattern_spectrum, predict,
    ExpectedSpectrum, SpectrumSource,
};
use crate::io::read_pattern;
use crate::repcheck::{builtin_group_catalog, catalog_entry, verify_entry, IdentityCheck};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "spectral-variance", version, about = "Spectral variance analysis for Monte Carlo integration")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Experiment file (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 1 gives the reference schedule.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: u32,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Validate inputs and stop.
    #[arg(long, global = true)]
    pub dry_run: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the representation identities on catalog groups.
    VerifyGroup {
        /// Z2, Z3, Z4, Z8, D4 or `all`.
        #[arg(long, default_value = "all")]
        group: String,
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
        #[arg(long, default_value_t = 64)]
        trials: u64,
    },
    /// Closed-form expected value and variance.
    Predict,
    /// Empirical Monte Carlo statistics.
    Simulate,
    /// Prediction against simulation; fails on disagreement.
    Compare,
    /// Expected sampler spectrum, or the spectrum of a point file.
    Spectrum,
}

#[derive(Debug, Serialize)]
pub struct OutputDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub workers: u32,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputDigest>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

struct Outputs {
    dir: PathBuf,
    written: Vec<OutputDigest>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.written.push(OutputDigest { file: name.into(), sha256: sha256_hex(contents.as_bytes()) });
        Ok(())
    }

    fn finish(self, command: &str, config: Option<ConfigFile>, global: &GlobalArgs, start: Instant) -> Result<()> {
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed: config.as_ref().map(|c| c.experiment.seed),
            config,
            workers: global.workers,
            wall_clock_seconds: start.elapsed().as_secs_f64(),
            outputs: self.written,
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(self.dir.join("manifest.json"), text + "\n")?;
        Ok(())
    }
}

fn load_config(global: &GlobalArgs) -> Result<ConfigFile> {
    let path = global.config.as_ref().ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut config = ConfigFile::load(path)?;
    if let Some(seed) = global.seed {
        config.experiment.seed = seed;
    }
    Ok(config)
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => EXIT_FAIL,
                _ => EXIT_USAGE,
            }
        }
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    let g = &cli.global;
    let start = Instant::now();
    let workers = g.workers as usize;
    match &cli.command {
        Command::VerifyGroup { group, tolerance, trials } => {
            let entries = if group.eq_ignore_ascii_case("all") {
                builtin_group_catalog()
            } else {
                vec![catalog_entry(group)?]
            };
            if g.dry_run {
                println!("dry run: {} group(s) selected", entries.len());
                return Ok(EXIT_PASS);
            }
            let seed = g.seed.unwrap_or(0);
            let rows: Vec<IdentityCheck> =
                entries.iter().flat_map(|e| verify_entry(e, *tolerance, *trials, seed)).collect();
            let mut csv = String::from("group,irrep,identity,max_error,tolerance,status\n");
            println!("{:<6} {:<8} {:<26} {:>12} {:>6}", "group", "irrep", "identity", "max_error", "status");
            for r in &rows {
                let status = if r.pass { "PASS" } else { "FAIL" };
                println!("{:<6} {:<8} {:<26} {:>12.3e} {:>6}", r.group, r.irrep, r.identity.to_string(), r.max_error, status);
                csv.push_str(&format!("{},{},{},{:e},{:e},{status}\n", r.group, r.irrep, r.identity, r.max_error, r.tolerance));
            }
            let pass = rows.iter().all(|r| r.pass);
            let mut out = Outputs::new(&g.out)?;
            out.write("verify_group.csv", &csv)?;
            out.finish("verify-group", None, g, start)?;
            Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Predict => {
            let config = load_config(g)?;
            let exp = &config.experiment;
            let (source, sampler) = match (&config.sampler_spectrum, analytic_spectrum(exp)?) {
                (Some(path), _) => (SpectrumSource::File, ExpectedSpectrum::from_json(&std::fs::read_to_string(path)?)?),
                (None, Some(a)) => (SpectrumSource::Analytic, a),
                (None, None) => {
                    return Err(Error::Config(
                        "no sampler spectrum: this pattern has no closed form, set `sampler_spectrum`".into(),
                    ))
                }
            };
            if g.dry_run {
                println!("dry run: config valid, spectrum source {source:?}");
                return Ok(EXIT_PASS);
            }
            let prediction = predict(exp, &sampler)?;
            let mut out = Outputs::new(&g.out)?;
            out.write("prediction.json", &json(&prediction)?)?;
            out.write("contributions.csv", &prediction.contributions_csv())?;
            let e = prediction.expected_value.unwrap_or_default();
            println!("expected value: {:.10e} {:+.10e}i", e.re, e.im);
            println!("variance:       {:.10e}", prediction.variance);
            if prediction.formal {
                println!("FORMAL: euclidean prediction");
            }
            out.finish("predict", Some(config), g, start)?;
            Ok(EXIT_PASS)
        }
        Command::Simulate => {
            let config = load_config(g)?;
            if g.dry_run {
                println!("dry run: config valid");
                return Ok(EXIT_PASS);
            }
            let stats = empirical_mc_statistics(&config.experiment, workers)?;
            let mut out = Outputs::new(&g.out)?;
            out.write("statistics.json", &json(&stats)?)?;
            println!("mean:     {} ± {:.3e}", stats.mean, stats.se_mean);
            println!("variance: {:.10e} ± {:.3e}", stats.variance, stats.se_variance);
            out.finish("simulate", Some(config), g, start)?;
            Ok(EXIT_PASS)
        }
        Command::Compare => {
            let config = load_config(g)?;
            if g.dry_run {
                println!("dry run: config valid");
                return Ok(EXIT_PASS);
            }
            let report = compare(&config.experiment, workers)?;
            let mut out = Outputs::new(&g.out)?;
            out.write("report.json", &(report.to_json() + "\n"))?;
            out.write("report.csv", &report.to_csv())?;
            println!("predicted variance: {:.10e}", report.prediction.variance);
            println!("empirical variance: {:.10e} ± {:.3e}", report.empirical.variance, report.empirical.se_variance);
            println!("z (variance): {:.3}  z (mean): {:.3}", report.z_variance, report.z_mean);
            if report.formal {
                println!("FORMAL: euclidean prediction");
            }
            println!("{}", if report.pass { "PASS" } else { "FAIL" });
            out.finish("compare", Some(config), g, start)?;
            Ok(if report.pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Spectrum => {
            let config = load_config(g)?;
            let exp = &config.experiment;
            let pattern = match &config.pattern_file {
                Some(path) => Some(read_pattern(path, &exp.sampler.domain)?),
                None => None,
            };
            if g.dry_run {
                println!("dry run: config valid");
                return Ok(EXIT_PASS);
            }
            let spectrum = match &pattern {
                Some(p) => pattern_spectrum(p, exp)?,
                None => estimate_expected_power(exp, workers)?,
            };
            let mut out = Outputs::new(&g.out)?;
            out.write("spectrum.json", &(spectrum.to_json() + "\n"))?;
            out.write("spectrum.csv", &spectrum.to_csv())?;
            println!("wrote spectrum to {}", g.out.display());
            out.finish("spectrum", Some(config), g, start)?;
            Ok(EXIT_PASS)
        }
    }
}
