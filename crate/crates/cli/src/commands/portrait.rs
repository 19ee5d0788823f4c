use clap::Args;
use paramray::portrait::{classify_portrait, enumerate_portraits, quadratic_portrait, validate_portrait, EnumerationLimits, PortraitError};
use paramray::{Angle, CriticalPortrait};
use serde::Serialize;

use super::{emit, read_json, to_json};
use crate::error::{domain, numeric, usage, AppResult};
use crate::{Ctx, PortraitCmd};

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub degree: u32,
    /// Largest denominator allowed in a block.
    #[arg(long)]
    pub max_den: Option<u64>,
    /// Stop with an error beyond this many portraits.
    #[arg(long)]
    pub max_portraits: Option<usize>,
}

#[derive(Args, Debug)]
pub struct QuadraticArgs {
    /// Angle `p/q`.
    #[arg(long)]
    pub theta: Angle,
}

#[derive(Serialize)]
struct Classified<'a> {
    portrait: &'a CriticalPortrait,
    class: paramray::portrait::PortraitClass,
}

#[derive(Serialize)]
struct Enumerated {
    degree: u32,
    max_den: u64,
    count: usize,
    portraits: Vec<CriticalPortrait>,
}

fn portrait_error(e: PortraitError) -> crate::error::AppError {
    match e {
        PortraitError::ResourceCap(_) => numeric(e),
        PortraitError::Degree(_) | PortraitError::Parse(_) => usage(e),
        _ => domain(e),
    }
}

pub fn run(ctx: &Ctx, cmd: PortraitCmd) -> AppResult<()> {
    match cmd {
        PortraitCmd::Validate(a) => {
            let p: CriticalPortrait = read_json(&a.file)?;
            let report = validate_portrait(&p);
            emit(ctx, &to_json(&report))?;
            if report.valid {
                Ok(())
            } else {
                Err(domain(report.summary()))
            }
        }
        PortraitCmd::Classify(a) => {
            let p: CriticalPortrait = read_json(&a.file)?;
            let class = classify_portrait(&p).map_err(portrait_error)?;
            emit(ctx, &to_json(&Classified { portrait: &p, class }))
        }
        PortraitCmd::Enumerate(a) => {
            let max_den = ctx.config.pick(a.max_den, "max_den", 6)?;
            let mut limits = EnumerationLimits::default();
            limits.max_portraits = ctx.config.pick(a.max_portraits, "max_portraits", limits.max_portraits)?;
            let portraits = enumerate_portraits(a.degree, max_den, limits).map_err(portrait_error)?;
            emit(ctx, &to_json(&Enumerated { degree: a.degree, max_den, count: portraits.len(), portraits }))
        }
        PortraitCmd::Quadratic(a) => emit(ctx, &to_json(&quadratic_portrait(&a.theta))),
    }
}
