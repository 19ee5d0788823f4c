//! File formats: CSV tables and the JSON reports built on the core types.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so
//! parsing an emitted file and emitting it again reproduces it byte for byte.

use std::fmt::Write as _;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::poly::MonicPolynomial;
use crate::rays::{RayLanding, RayPath, RayTerminal};
use crate::scalar::Real;
use crate::shift_locus::{Extrapolation, LandingDiagnostics, ParamRayPoint, Verdict};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A parsed CSV table of numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, head) = lines.next().ok_or(FormatError::Csv { line: 1, reason: "empty file".into() })?;
        let header: Vec<String> = head.split(',').map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for (i, line) in lines {
            let row = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| FormatError::Csv { line: i + 1, reason: e.to_string() })?;
            if row.len() != header.len() {
                return Err(FormatError::Csv {
                    line: i + 1,
                    reason: format!("{} fields, header has {}", row.len(), header.len()),
                });
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn emit(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn push_row(out: &mut String, cells: &[String]) {
    out.push_str(&cells.join(","));
    out.push('\n');
}

/// `angle_index,re,im,green_residual`, where the residual is `|G(z) − level|`.
pub fn equipotential_csv<T: Real>(points: &[Complex<T>], residuals: &[T]) -> String {
    let mut out = String::from("angle_index,re,im,green_residual\n");
    for (k, (z, r)) in points.iter().zip(residuals).enumerate() {
        push_row(&mut out, &[k.to_string(), z.re.to_string(), z.im.to_string(), r.to_string()]);
    }
    out
}

/// `s,re,im,green_residual`, one row per sample, decreasing potential.
pub fn ray_csv<T: Real>(path: &RayPath<T>) -> String {
    let mut out = String::from("s,re,im,green_residual\n");
    for s in &path.samples {
        push_row(
            &mut out,
            &[s.potential.to_string(), s.point.re.to_string(), s.point.im.to_string(), s.green_residual.to_string()],
        );
    }
    out
}

/// JSON companion of a ray CSV.
#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct RaySidecar<'a, T> {
    pub angle: String,
    pub samples: usize,
    pub terminal: &'a RayTerminal<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub landing: Option<&'a RayLanding<T>>,
    /// Set when the trace stopped early; the CSV then holds the partial path.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// `r`, then `a_k_re,a_k_im` for `k = 0..d−2`, then `residual`.
pub fn param_ray_csv<T: Real>(degree: u32, points: &[ParamRayPoint<T>]) -> String {
    let mut head = vec!["r".to_string()];
    for k in 0..degree.saturating_sub(1) {
        head.push(format!("a{k}_re"));
        head.push(format!("a{k}_im"));
    }
    head.push("residual".into());
    let mut out = String::new();
    push_row(&mut out, &head);
    for p in points {
        let mut cells = vec![p.r.to_string()];
        for a in p.poly.coeffs() {
            cells.push(a.re.to_string());
            cells.push(a.im.to_string());
        }
        cells.push(p.residual.to_string());
        push_row(&mut out, &cells);
    }
    out
}

/// Landing report written by `paramray --land`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real + Deserialize<'de>"))]
pub struct LandingReport<T> {
    pub portrait: String,
    pub schedule: Vec<T>,
    pub increments: Vec<T>,
    pub decay_ratio: T,
    pub schedule_factor: u64,
    pub sub_geometric: bool,
    pub method: Extrapolation,
    pub extrapolated: MonicPolynomial<T>,
    pub error_estimate: T,
    pub max_residual: T,
    pub tolerance: T,
    pub verdict: Verdict,
}

impl<T: Real> LandingReport<T> {
    pub fn new(portrait: String, d: &LandingDiagnostics<T>, tolerance: T) -> Self {
        Self {
            portrait,
            schedule: d.r_schedule.clone(),
            increments: d.cauchy_increments.clone(),
            decay_ratio: d.decay_ratio,
            schedule_factor: d.schedule_factor,
            sub_geometric: d.sub_geometric,
            method: d.method,
            extrapolated: d.extrapolated_limit.clone(),
            error_estimate: d.error_estimate,
            max_residual: d.max_residual,
            tolerance,
            verdict: d.verdict,
        }
    }
}

/// Pretty JSON with a trailing newline; the form every command writes.
pub fn to_json<S: Serialize + ?Sized>(value: &S) -> Result<String, FormatError> {
    let mut s = serde_json::to_string_pretty(value)?;
    let _ = writeln!(s);
    Ok(s)
}
