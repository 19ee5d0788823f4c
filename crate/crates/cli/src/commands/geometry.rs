use std::path::PathBuf;

use clap::{Args, ValueEnum};
use num_complex::Complex;
use paramray::geometry::{
    area_rho_star, backward_stability_probe_with, modulus, shape_with, validate_m_nested, validate_scattered,
    AnnulusSpec, BackwardStabilityOptions, GeometryError, Metric, NestedDiskSystem, TestMap,
};
use paramray::{Disk, Region};
use serde::Serialize;

use super::{emit, load_poly, parse_list, parse_point, parse_polygon, read_json, to_json};
use crate::error::{domain, numeric, usage, AppError, AppResult};
use crate::{Ctx, GeometryCmd};

fn parse_disk(s: &str) -> Result<Disk, String> {
    match parse_list(s)?.as_slice() {
        [x, y, r] => Ok(Disk { c: Complex::new(*x, *y), r: *r }),
        _ => Err(format!("expected cx,cy,r, got `{s}`")),
    }
}

fn parse_annulus(s: &str) -> Result<[f64; 4], String> {
    match parse_list(s)?.as_slice() {
        &[x, y, a, b] => Ok([x, y, a, b]),
        _ => Err(format!("expected cx,cy,r_in,r_out, got `{s}`")),
    }
}

fn geometry_error(e: GeometryError) -> AppError {
    match e {
        GeometryError::LiftFailure { .. } => numeric(e),
        _ => domain(e),
    }
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct RegionArgs {
    /// Round disk `cx,cy,r`.
    #[arg(long, value_parser = parse_disk, allow_hyphen_values = true)]
    pub disk: Option<Disk>,
    /// Counterclockwise vertices `x,y x,y …`.
    #[arg(long, allow_hyphen_values = true)]
    pub polygon: Option<String>,
}

impl RegionArgs {
    fn region(&self) -> AppResult<Region> {
        match (&self.disk, &self.polygon) {
            (Some(d), _) => Region::disk(d.c, d.r).map_err(domain),
            (_, Some(p)) => Region::polygon(parse_polygon(p).map_err(usage)?).map_err(domain),
            _ => Err(usage("give --disk or --polygon")),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MetricArg {
    Euclidean,
    Chordal,
}

#[derive(Args, Debug)]
pub struct ShapeArgs {
    #[command(flatten)]
    pub region: RegionArgs,
    /// Base point `x,y` inside the region.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub point: Complex<f64>,
    #[arg(long, value_enum, default_value = "euclidean")]
    pub metric: MetricArg,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct AnnulusArgs {
    /// Round annulus about 0: `R_IN R_OUT`.
    #[arg(long, num_args = 2, value_names = ["R_IN", "R_OUT"])]
    pub concentric: Option<Vec<f64>>,
    /// Round annulus `cx,cy,r_in,r_out`.
    #[arg(long, value_parser = parse_annulus, allow_hyphen_values = true)]
    pub annulus: Option<[f64; 4]>,
    /// Outer then inner disk, each `cx,cy,r`.
    #[arg(long, num_args = 2, value_parser = parse_disk, allow_hyphen_values = true, value_names = ["OUTER", "INNER"])]
    pub pair: Option<Vec<Disk>>,
}

impl AnnulusArgs {
    fn spec(&self) -> AppResult<AnnulusSpec<f64>> {
        let spec = if let Some(v) = &self.concentric {
            AnnulusSpec::concentric(Complex::new(0.0, 0.0), v[0], v[1])
        } else if let Some([x, y, a, b]) = self.annulus {
            AnnulusSpec::concentric(Complex::new(x, y), a, b)
        } else if let Some(p) = &self.pair {
            AnnulusSpec::circle_pair(p[0], p[1])
        } else {
            return Err(usage("give --concentric, --annulus or --pair"));
        };
        spec.map_err(domain)
    }
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct RhoStarArgs {
    #[arg(long, value_parser = parse_disk, allow_hyphen_values = true)]
    pub disk: Option<Disk>,
    #[arg(long, allow_hyphen_values = true)]
    pub polygon: Option<String>,
    #[arg(long, value_parser = parse_annulus, allow_hyphen_values = true)]
    pub annulus: Option<[f64; 4]>,
    #[arg(long, num_args = 2, value_parser = parse_disk, allow_hyphen_values = true, value_names = ["OUTER", "INNER"])]
    pub pair: Option<Vec<Disk>>,
}

#[derive(Args, Debug)]
pub struct NestedArgs {
    /// Disk system JSON.
    #[arg(long)]
    pub file: PathBuf,
    /// Required modulus of each gap annulus.
    #[arg(long)]
    pub m: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ScatteredArgs {
    /// Disk system JSON.
    #[arg(long)]
    pub file: PathBuf,
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Test maps JSON; a built-in catalogue adapted to the system otherwise.
    #[arg(long)]
    pub maps: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ManeArgs {
    /// Polynomial JSON.
    #[arg(long, conflicts_with = "c")]
    pub poly: Option<PathBuf>,
    /// Quadratic `z² + c`, given as `re,im`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub c: Option<Complex<f64>>,
    /// Disk center `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub center: Complex<f64>,
    #[arg(long)]
    pub radius: f64,
    /// Number of pullback levels.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Levels excluded from the monotonicity test.
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Bound on component degrees [default: the degree].
    #[arg(long)]
    pub eta: Option<usize>,
    /// Boundary samples on the circle.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Serialize)]
struct ShapeOut {
    metric: Metric,
    point: Complex<f64>,
    shape: f64,
}

#[derive(Serialize)]
struct Value {
    value: f64,
}

#[derive(Serialize)]
struct ProbeOut {
    center: Complex<f64>,
    radius: f64,
    depth: usize,
    level: Vec<usize>,
    components: Vec<usize>,
    max_diameter: Vec<f64>,
    min_diameter: Vec<f64>,
    max_degree: Vec<usize>,
    degree_sum: Vec<usize>,
    burn_in: usize,
    degree_bound: usize,
    monotone_after_burn_in: bool,
    degrees_bounded: bool,
    degree_sums_exact: bool,
    shrink_factor: f64,
    stable: bool,
}

pub fn run(ctx: &Ctx, cmd: GeometryCmd) -> AppResult<()> {
    let cfg = &ctx.config;
    match cmd {
        GeometryCmd::Shape(a) => {
            let region = a.region.region()?;
            let metric = match a.metric {
                MetricArg::Euclidean => Metric::Euclidean,
                MetricArg::Chordal => Metric::Chordal,
            };
            let shape = shape_with(&region, a.point, metric).map_err(geometry_error)?;
            emit(ctx, &to_json(&ShapeOut { metric, point: a.point, shape }))
        }
        GeometryCmd::Modulus(a) => {
            let value = modulus(&a.spec()?).map_err(geometry_error)?;
            emit(ctx, &to_json(&Value { value }))
        }
        GeometryCmd::Rhostar(a) => {
            let value = if let Some(d) = a.disk {
                area_rho_star(&d)
            } else if let Some(p) = &a.polygon {
                let region = Region::polygon(parse_polygon(p).map_err(usage)?).map_err(domain)?;
                area_rho_star(&region)
            } else {
                let spec = AnnulusArgs { concentric: None, annulus: a.annulus, pair: a.pair }.spec()?;
                area_rho_star(&spec)
            }
            .map_err(geometry_error)?;
            emit(ctx, &to_json(&Value { value }))
        }
        GeometryCmd::Nested(a) => {
            let sys: NestedDiskSystem<f64> = read_json(&a.file)?;
            let m = cfg.pick(a.m, "m", 1.0)?;
            let report = validate_m_nested(&sys, m);
            emit(ctx, &to_json(&report))?;
            if report.passed {
                Ok(())
            } else {
                Err(domain(format!("system is not {m}-nested")))
            }
        }
        GeometryCmd::Scattered(a) => {
            let sys: NestedDiskSystem<f64> = read_json(&a.file)?;
            let lambda = cfg.pick(a.lambda, "lambda", 0.5)?;
            let maps: Vec<TestMap<f64>> = match &a.maps {
                Some(p) => read_json(p)?,
                None => sys.hull().map(|h| TestMap::catalogue(&h)).unwrap_or_default(),
            };
            let report = validate_scattered(&sys, &maps, lambda).map_err(geometry_error)?;
            emit(ctx, &to_json(&report))?;
            if report.passed {
                Ok(())
            } else {
                Err(domain(format!("system is not {lambda}-scattered")))
            }
        }
        GeometryCmd::Mane(a) => {
            let f = load_poly(a.poly.as_deref(), a.c)?;
            let disk = Region::disk(a.center, a.radius).map_err(domain)?;
            let depth = cfg.pick(a.depth, "depth", 8)?;
            let mut opts = BackwardStabilityOptions::default();
            opts.burn_in = cfg.pick(a.burn_in, "burn_in", opts.burn_in)?;
            opts.degree_bound = match a.eta {
                Some(e) => Some(e),
                None => cfg.get("eta")?,
            };
            opts.preimage.circle_samples = cfg.pick(a.samples, "samples", opts.preimage.circle_samples)?;
            let r = backward_stability_probe_with(&f, &disk, depth, &opts).map_err(geometry_error)?;
            eprintln!("{:>5} {:>10} {:>14} {:>10}", "level", "components", "max_diameter", "max_degree");
            for s in &r.levels {
                eprintln!("{:>5} {:>10} {:>14.6e} {:>10}", s.level, s.components, s.max_diameter, s.max_degree);
            }
            let out = ProbeOut {
                center: a.center,
                radius: a.radius,
                depth,
                level: r.levels.iter().map(|s| s.level).collect(),
                components: r.levels.iter().map(|s| s.components).collect(),
                max_diameter: r.levels.iter().map(|s| s.max_diameter).collect(),
                min_diameter: r.levels.iter().map(|s| s.min_diameter).collect(),
                max_degree: r.levels.iter().map(|s| s.max_degree).collect(),
                degree_sum: r.levels.iter().map(|s| s.degree_sum).collect(),
                burn_in: r.burn_in,
                degree_bound: r.degree_bound,
                monotone_after_burn_in: r.monotone_after_burn_in,
                degrees_bounded: r.degrees_bounded,
                degree_sums_exact: r.degree_sums_exact,
                shrink_factor: r.shrink_factor,
                stable: r.stable,
            };
            emit(ctx, &to_json(&out))
        }
    }
}
