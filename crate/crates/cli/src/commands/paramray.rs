use std::path::PathBuf;

use clap::Args;
use paramray::io::{param_ray_csv, LandingReport};
use paramray::portrait::validate_portrait;
use paramray::shift_locus::{continue_param_ray_with, landing_probe_with, ContinuationOptions, LandingOptions, ShiftError};
use paramray::{Angle, ParamPoint};
use serde::Serialize;

use super::{emit, load_portrait, to_json, write_artifact};
use crate::error::{domain, numeric, usage, AppError, AppResult};
use crate::Ctx;

#[derive(Args, Debug)]
pub struct ParamRayArgs {
    /// Portrait JSON.
    #[arg(long, conflicts_with = "theta")]
    pub portrait: Option<PathBuf>,
    /// Quadratic portrait of angle `p/q`.
    #[arg(long)]
    pub theta: Option<Angle>,
    #[arg(long)]
    pub r_from: Option<f64>,
    #[arg(long)]
    pub r_to: Option<f64>,
    /// Ratio between consecutive recorded potentials.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Run the landing probe instead of a plain continuation.
    #[arg(long)]
    pub land: bool,
    /// Smallest potential reached by the landing probe.
    #[arg(long)]
    pub r_min: Option<f64>,
    /// Landing tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Stem of the generated files.
    #[arg(long, default_value = "paramray")]
    pub name: String,
}

#[derive(Serialize)]
struct Summary {
    portrait: String,
    points: usize,
    last_r: Option<f64>,
    csv: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn classify(e: ShiftError) -> AppError {
    match e {
        ShiftError::InvalidPortrait(_) => domain(e),
        ShiftError::InvalidArgument(_) => usage(e),
        _ => numeric(e),
    }
}

pub fn run(ctx: &Ctx, a: ParamRayArgs) -> AppResult<()> {
    let cfg = &ctx.config;
    let portrait = load_portrait(a.portrait.as_deref(), a.theta.as_ref())?;
    let report = validate_portrait(&portrait);
    if !report.valid {
        return Err(domain(report.summary()));
    }
    let label = portrait.to_string();
    let degree = portrait.degree();
    let mut points: Vec<ParamPoint> = Vec::new();
    let csv_name = format!("{}.csv", a.name);

    if a.land {
        let r_min = cfg.pick(a.r_min, "r_min", 1e-4)?;
        let tol = cfg.pick(a.tol, "tol", 1e-3)?;
        let mut opts = LandingOptions::default();
        opts.max_rho = cfg.pick(a.rho, "rho", opts.max_rho)?;
        let result = landing_probe_with(&portrait, r_min, tol, &opts, |p| points.push(p.clone()));
        write_artifact(ctx, &csv_name, &param_ray_csv(degree, &points))?;
        let diag = result.map_err(classify)?;
        let json = to_json(&LandingReport::new(label, &diag, tol));
        write_artifact(ctx, &format!("{}.landing.json", a.name), &json)?;
        return emit(ctx, &json);
    }

    let r_from = cfg.pick(a.r_from, "r_from", 10.0)?;
    let r_to = cfg.pick(a.r_to, "r_to", 0.1)?;
    let rho = cfg.pick(a.rho, "rho", 0.8)?;
    let result = continue_param_ray_with(&portrait, r_from, r_to, rho, &ContinuationOptions::default(), |p| {
        points.push(p.clone())
    });
    write_artifact(ctx, &csv_name, &param_ray_csv(degree, &points))?;
    let failure = result.err().map(classify);
    let summary = Summary {
        portrait: label,
        points: points.len(),
        last_r: points.last().map(|p| p.r),
        csv: csv_name,
        error: failure.as_ref().map(ToString::to_string),
    };
    emit(ctx, &to_json(&summary))?;
    failure.map_or(Ok(()), Err)
}
