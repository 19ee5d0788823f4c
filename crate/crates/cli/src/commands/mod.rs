pub mod geometry;
pub mod paramray;
pub mod portrait;
pub mod ray;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use ::paramray::{CriticalPortrait, Poly};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{domain, usage, AppResult};
use crate::Ctx;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> AppResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| domain(format!("{}: {e}", path.display())))
}

/// `x,y` as a complex number.
pub fn parse_point(s: &str) -> Result<Complex<f64>, String> {
    match parse_list(s)?.as_slice() {
        [x, y] => Ok(Complex::new(*x, *y)),
        _ => Err(format!("expected x,y, got `{s}`")),
    }
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"))).collect()
}

/// Space separated `x,y` vertices.
pub fn parse_polygon(s: &str) -> Result<Vec<Complex<f64>>, String> {
    s.split_whitespace().map(parse_point).collect()
}

/// The polynomial from `--poly FILE` or, for degree two, `--c re,im`.
pub fn load_poly(file: Option<&Path>, c: Option<Complex<f64>>) -> AppResult<Poly> {
    match (file, c) {
        (Some(p), None) => read_json(p),
        (None, Some(c)) => Ok(Poly::quadratic(c)),
        _ => Err(usage("give exactly one of --poly or --c")),
    }
}

pub fn load_portrait(file: Option<&Path>, theta: Option<&::paramray::Angle>) -> AppResult<CriticalPortrait> {
    match (file, theta) {
        (Some(p), None) => read_json(p),
        (None, Some(t)) => Ok(::paramray::portrait::quadratic_portrait(t)),
        _ => Err(usage("give exactly one of --portrait or --theta")),
    }
}

pub fn to_json<S: Serialize + ?Sized>(v: &S) -> String {
    ::paramray::io::to_json(v).expect("report types serialize")
}

/// The JSON result goes to `--out` when given, else stdout.
pub fn emit(ctx: &Ctx, text: &str) -> AppResult<()> {
    match &ctx.out {
        Some(p) => std::fs::write(p, text).map_err(|e| usage(format!("{}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(usage)
        }
    }
}

/// Writes a generated file under the output directory.
pub fn write_artifact(ctx: &Ctx, name: &str, text: &str) -> AppResult<PathBuf> {
    std::fs::create_dir_all(&ctx.out_dir).map_err(|e| usage(format!("{}: {e}", ctx.out_dir.display())))?;
    let path = ctx.out_dir.join(name);
    std::fs::write(&path, text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(path)
}
