//! Data ingestion, option parsing, run configuration and CSV emission.
//!
//! Every parser here is total: malformed input becomes an [`Error`], never a
//! panic. Tabular output is CSV with metadata in a `# key=value` preamble.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::selection::Selector;
use crate::sim::EstimatorRecipe;

/// Reads a sample: one value per line or a single-column CSV, with an
/// optional non-numeric header on the first content line. Blank lines and
/// `#` comments are skipped.
pub fn ingest_str(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut seen_content = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let cell = raw.trim();
        if cell.is_empty() || cell.starts_with('#') {
            continue;
        }
        let first = !seen_content;
        seen_content = true;
        let cell = single_column(cell, line)?;
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(v) => {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite value `{v}`"),
                })
            }
            Err(_) if first && is_header(cell) => {}
            Err(_) => {
                return Err(Error::Parse {
                    line,
                    message: format!("`{cell}` is not a number"),
                })
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyData);
    }
    Ok(out)
}

pub fn ingest(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    ingest_str(&text)
}

fn single_column(cell: &str, line: usize) -> Result<&str> {
    let mut fields = cell.split(',').map(str::trim);
    let head = fields.next().unwrap_or("");
    if fields.any(|f| !f.is_empty()) {
        return Err(Error::Parse {
            line,
            message: "expected a single column".into(),
        });
    }
    Ok(head.trim_matches('"'))
}

// A header must look like a name, so that `nan`, `inf` and typos such as
// `1.0x` are reported rather than silently skipped.
fn is_header(cell: &str) -> bool {
    let lower = cell.to_ascii_lowercase();
    let numeric_words = ["nan", "inf", "+inf", "-inf", "infinity", "+infinity", "-infinity"];
    cell.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && !numeric_words.contains(&lower.as_str())
}

/// The index requested on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaSpec {
    Value(f64),
    Auto(Selector),
}

impl FromStr for AlphaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s.to_ascii_lowercase().as_str() {
            "hj" => Self::Value(0.0),
            "ll" => Self::Value(1.0),
            "hg" => Self::Value(2.0),
            "auto1" => Self::Auto(Selector::Direct),
            "auto2" => Self::Auto(Selector::Amsre),
            "auto3" => Self::Auto(Selector::SplitAmse),
            _ => Self::Value(finite(s, "alpha")?),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthSpec {
    Value(f64),
    Auto,
}

impl FromStr for BandwidthSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Self::Auto);
        }
        Ok(Self::Value(positive(s, "bandwidth")?))
    }
}

/// Evaluation grid `min:max:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        crate::estimator::linspace(self.min, self.max, self.count)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let [a, b, k] = parts[..] else {
            return Err(Error::InvalidParameter(format!("grid `{s}` is not of the form min:max:count")));
        };
        let min = finite(a, "grid minimum")?;
        let max = finite(b, "grid maximum")?;
        let count: usize = k
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("grid count `{k}` is not a whole number")))?;
        if !(max > min) {
            return Err(Error::InvalidParameter(format!("grid maximum {max} must exceed minimum {min}")));
        }
        if !(max - min).is_finite() {
            return Err(Error::InvalidParameter(format!("grid span {min}:{max} overflows")));
        }
        if !(2..=10_000_000).contains(&count) {
            return Err(Error::InvalidParameter(format!("grid count {count} must be between 2 and 10^7")));
        }
        Ok(Self { min, max, count })
    }
}

/// Parses one estimator name: `kde`, `hj`, `ll`, `hg`, `alpha_o`,
/// `auto1`..`auto3`, a bare number or `alpha<number>`.
pub fn parse_estimator(s: &str) -> Result<EstimatorRecipe> {
    let t = s.trim().to_ascii_lowercase();
    match t.as_str() {
        "kde" => return Ok(EstimatorRecipe::Kde),
        "alpha_o" | "ideal" => return Ok(EstimatorRecipe::IdealAlpha),
        _ => {}
    }
    let body = t.strip_prefix("alpha").unwrap_or(&t);
    Ok(match AlphaSpec::from_str(body)? {
        AlphaSpec::Value(a) => EstimatorRecipe::Alpha(a),
        AlphaSpec::Auto(sel) => EstimatorRecipe::Selected(sel),
    })
}

/// Comma-separated estimator list, duplicates removed in order.
pub fn parse_estimator_list(s: &str) -> Result<Vec<EstimatorRecipe>> {
    let mut out: Vec<EstimatorRecipe> = Vec::new();
    for item in s.split(',') {
        if item.trim().is_empty() {
            continue;
        }
        let r = parse_estimator(item)?;
        if !out.contains(&r) {
            out.push(r);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidParameter("empty estimator list".into()));
    }
    Ok(out)
}

fn finite(s: &str, what: &str) -> Result<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::InvalidParameter(format!("{what} `{}` is not a finite number", s.trim()))),
    }
}

fn positive(s: &str, what: &str) -> Result<f64> {
    let v = finite(s, what)?;
    if v <= 0.0 {
        return Err(Error::InvalidParameter(format!("{what} must be positive, got {v}")));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Estimate,
    Select,
    RatioTable,
    Simulate,
    Zoo,
}

/// Run settings as read from a TOML file. Every field is optional so that
/// a file can be layered under command-line flags with [`RunConfig::overlay`].
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: Option<Command>,
    pub input: Option<String>,
    pub output: Option<String>,
    pub alpha: Option<String>,
    pub bandwidth: Option<String>,
    pub grid: Option<String>,
    pub method: Option<u8>,
    pub density: Option<String>,
    pub n: Option<usize>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub estimators: Option<String>,
    pub threads: Option<usize>,
    pub long: Option<bool>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map_or(0, |s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Fields set in `top` win.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        RunConfig {
            command: top.command.or(self.command),
            input: top.input.or(self.input),
            output: top.output.or(self.output),
            alpha: top.alpha.or(self.alpha),
            bandwidth: top.bandwidth.or(self.bandwidth),
            grid: top.grid.or(self.grid),
            method: top.method.or(self.method),
            density: top.density.or(self.density),
            n: top.n.or(self.n),
            reps: top.reps.or(self.reps),
            seed: top.seed.or(self.seed),
            estimators: top.estimators.or(self.estimators),
            threads: top.threads.or(self.threads),
            long: top.long.or(self.long),
        }
    }

    /// Checks that every present field parses and is in range.
    pub fn validate(&self) -> Result<()> {
        if let Some(a) = &self.alpha {
            a.parse::<AlphaSpec>()?;
        }
        if let Some(b) = &self.bandwidth {
            b.parse::<BandwidthSpec>()?;
        }
        if let Some(g) = &self.grid {
            g.parse::<GridSpec>()?;
        }
        if let Some(m) = self.method {
            Selector::from_index(m)
                .ok_or_else(|| Error::InvalidParameter(format!("method must be 1, 2 or 3, got {m}")))?;
        }
        if let Some(e) = &self.estimators {
            parse_estimator_list(e)?;
        }
        for (name, v) in [("n", self.n), ("reps", self.reps), ("threads", self.threads)] {
            if v == Some(0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

fn line_of(text: &str, byte: usize) -> usize {
    text.as_bytes()[..byte.min(text.len())]
        .iter()
        .filter(|b| **b == b'\n')
        .count()
        + 1
}

/// `# key=value` lines. Newlines inside values are flattened.
pub fn preamble(meta: &[(String, String)]) -> String {
    let mut s = String::new();
    for (k, v) in meta {
        let _ = writeln!(s, "# {}={}", k.trim(), v.replace(['\n', '\r'], " "));
    }
    s
}

/// Density curve CSV with header `x,fhat`. Numbers use the shortest
/// representation that round-trips, so identical inputs give identical bytes.
pub fn curve_csv(meta: &[(String, String)], grid: &[f64], values: &[f64]) -> String {
    let mut s = preamble(meta);
    s.push_str("x,fhat\n");
    for (x, v) in grid.iter().zip(values) {
        let _ = writeln!(s, "{},{}", Num(*x), Num(*v));
    }
    s
}

/// Shortest round-trip formatting, in exponent form for very small or very
/// large magnitudes.
#[derive(Debug, Clone, Copy)]
pub struct Num(pub f64);

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a = self.0.abs();
        if a != 0.0 && !(1e-4..1e15).contains(&a) {
            write!(f, "{:e}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// A parsed curve CSV: metadata pairs and the `(x, fhat)` columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CurveFile {
    pub meta: Vec<(String, String)>,
    pub x: Vec<f64>,
    pub fhat: Vec<f64>,
}

impl CurveFile {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// Reads back the output of [`curve_csv`].
pub fn parse_curve_csv(text: &str) -> Result<CurveFile> {
    let mut out = CurveFile::default();
    let mut header = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(m) = l.strip_prefix('#') {
            if header {
                return Err(Error::Parse {
                    line,
                    message: "metadata after the header".into(),
                });
            }
            let (k, v) = m.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: "metadata line without `=`".into(),
            })?;
            out.meta.push((k.trim().to_string(), v.to_string()));
            continue;
        }
        if !header {
            if l != "x,fhat" {
                return Err(Error::Parse {
                    line,
                    message: format!("expected header `x,fhat`, found `{l}`"),
                });
            }
            header = true;
            continue;
        }
        let (a, b) = l.split_once(',').ok_or_else(|| Error::Parse {
            line,
            message: "expected two columns".into(),
        })?;
        let parse = |c: &str| {
            c.trim().parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("`{}` is not a number", c.trim()),
            })
        };
        out.x.push(parse(a)?);
        out.fhat.push(parse(b)?);
    }
    if !header {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: "missing header `x,fhat`".into(),
        });
    }
    Ok(out)
}
