//! Plain-text point files: one point per line, whitespace-separated
//! coordinates. Blank lines and lines starting with `#` are skipped.

use crate::error::{Error, Result};
use crate::samplers::{SampleDomain, SamplePattern};
use std::path::Path;

pub fn parse_points(text: &str, source: &str) -> Result<Vec<Vec<f64>>> {
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let p = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse { path: source.into(), line: i + 1, msg: e.to_string() })?;
        if let Some(first) = points.first().map(Vec::len) {
            if first != p.len() {
                return Err(Error::Parse {
                    path: source.into(),
                    line: i + 1,
                    msg: format!("expected {first} coordinates, found {}", p.len()),
                });
            }
        }
        points.push(p);
    }
    Ok(points)
}

pub fn parse_pattern(text: &str, source: &str, domain: &SampleDomain) -> Result<SamplePattern> {
    SamplePattern::from_coords(domain, &parse_points(text, source)?)
}

pub fn read_pattern(path: &Path, domain: &SampleDomain) -> Result<SamplePattern> {
    parse_pattern(&std::fs::read_to_string(path)?, &path.display().to_string(), domain)
}

/// Round-trips exactly through [`parse_pattern`].
pub fn format_pattern(pattern: &SamplePattern) -> String {
    let mut out = String::new();
    for p in pattern.coords() {
        let line: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
