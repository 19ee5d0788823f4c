use std::path::PathBuf;

use clap::Args;
use num_complex::Complex;
use paramray::io::{equipotential_csv, ray_csv, RaySidecar};
use paramray::potential::equipotential_in;
use paramray::rays::{landing_point_in, trace_ray_in, RayAngle, RayError, RayLanding, StepControl};
use paramray::{Angle, Field, Ray};

use super::{emit, load_poly, parse_point, to_json, write_artifact};
use crate::error::{domain, numeric, usage, AppError, AppResult};
use crate::svg::{render, Overlay};
use crate::Ctx;

#[derive(Args, Debug)]
pub struct RayArgs {
    /// Polynomial JSON.
    #[arg(long, conflicts_with = "c")]
    pub poly: Option<PathBuf>,
    /// Quadratic `z² + c`, given as `re,im`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub c: Option<Complex<f64>>,
    /// External angle `p/q`.
    #[arg(long)]
    pub theta: Angle,
    /// Starting potential [default: max(4, 2·largest critical rate)].
    #[arg(long)]
    pub s_start: Option<f64>,
    /// Final potential; 0 traces until the ray lands or splits.
    #[arg(long)]
    pub s_end: Option<f64>,
    /// Potential ratio per step.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Also extrapolate the landing point (connected Julia sets only).
    #[arg(long)]
    pub land: bool,
    /// Tolerance of the landing extrapolation.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Equipotential levels to sample and draw.
    #[arg(long = "equipotential", value_name = "LEVEL")]
    pub equipotentials: Vec<f64>,
    /// Samples per equipotential.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Write an SVG overlay on the Julia set.
    #[arg(long)]
    pub svg: bool,
    /// Raster side in pixels.
    #[arg(long)]
    pub svg_size: Option<usize>,
    /// Escape-time iteration cap for the raster.
    #[arg(long)]
    pub iter_cap: Option<usize>,
    /// Path of the ray CSV [default: NAME.csv in the output directory].
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Stem of the generated files.
    #[arg(long, default_value = "ray")]
    pub name: String,
}

pub fn run(ctx: &Ctx, a: RayArgs) -> AppResult<()> {
    let cfg = &ctx.config;
    let f = load_poly(a.poly.as_deref(), a.c)?;
    let field = Field::new(&f).map_err(domain)?;
    let s_start = cfg.pick(a.s_start, "s_start", 4f64.max(2.0 * field.max_value_rate()))?;
    let s_end = cfg.pick(a.s_end, "s_end", 0.0)?;
    let mut ctrl = StepControl::default();
    ctrl.rho = cfg.pick(a.rho, "ray_rho", ctrl.rho)?;
    if !(ctrl.rho > 0.0 && ctrl.rho < 1.0) {
        return Err(usage(format!("rho must lie in (0, 1), got {}", ctrl.rho)));
    }
    let angle = RayAngle::Exact(a.theta.clone());

    let (path, mut failure): (Ray, Option<AppError>) = match trace_ray_in(&field, &angle, s_start, s_end, &ctrl) {
        Ok(p) => (p, None),
        Err(RayError::Diverged { s, partial }) => {
            let msg = format!("ray tracing diverged at potential {s}; partial path kept");
            (*partial, Some(numeric(msg)))
        }
        Err(e @ (RayError::Range { .. } | RayError::Seed { .. })) => return Err(usage(e)),
        Err(e) => return Err(numeric(e)),
    };

    let mut landing: Option<RayLanding<f64>> = None;
    // The landing estimate runs its own trace, so it is tried even after a
    // partial path; the first failure decides the exit code.
    if a.land {
        let tol = cfg.pick(a.tol, "tol", 1e-6)?;
        match landing_point_in(&field, &angle, tol, &ctrl) {
            Ok((_, l)) => landing = Some(l),
            Err(e @ RayError::NotConnected(_)) => failure = failure.or(Some(domain(e))),
            Err(e) => failure = failure.or(Some(numeric(e))),
        }
    }

    let sidecar = RaySidecar {
        angle: a.theta.to_string(),
        samples: path.samples.len(),
        terminal: &path.terminal,
        landing: landing.as_ref(),
        error: failure.as_ref().map(ToString::to_string),
    };
    let json = to_json(&sidecar);
    match &a.csv {
        Some(p) => std::fs::write(p, ray_csv(&path)).map_err(|e| usage(format!("{}: {e}", p.display())))?,
        None => {
            write_artifact(ctx, &format!("{}.csv", a.name), &ray_csv(&path))?;
        }
    }
    write_artifact(ctx, &format!("{}.json", a.name), &json)?;

    let n = cfg.pick(a.samples, "samples", 512)?;
    let mut curves = Vec::new();
    for (k, &level) in a.equipotentials.iter().enumerate() {
        let pts = equipotential_in(&field, level, n).map_err(numeric)?;
        let res: Vec<f64> = pts.iter().map(|&z| (field.green(z).green - level).abs()).collect();
        write_artifact(ctx, &format!("{}.eq{k}.csv", a.name), &equipotential_csv(&pts, &res))?;
        curves.push(pts);
    }

    if a.svg {
        let size = cfg.pick(a.svg_size, "svg_size", 400)?;
        let cap = cfg.pick(a.iter_cap, "iter_cap", 200)?;
        let ray_pts: Vec<Complex<f64>> = path.samples.iter().map(|s| s.point).collect();
        let mut overlays: Vec<Overlay<'_>> = curves.iter().map(|c| Overlay { points: c, color: "#1f5fbf" }).collect();
        overlays.push(Overlay { points: &ray_pts, color: "#d02020" });
        write_artifact(ctx, &format!("{}.svg", a.name), &render(&f, &overlays, size, cap))?;
    }

    emit(ctx, &json)?;
    failure.map_or(Ok(()), Err)
}
