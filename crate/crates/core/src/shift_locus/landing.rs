//! Following a parameter ray to small `r` and estimating where it lands.
//!
//! Samples are taken at `r_k = r_min·F^{K−k}` with `F = d^p`, `p` the
//! common eventual period of the block images. Near a landing point with
//! repelling dynamics the ray is asymptotically self-similar under
//! `r ↦ r/F`, so on this schedule the increments shrink geometrically and
//! Aitken's Δ² is consistent. Parabolic landing is much slower (algebraic in
//! `1/log(1/r)`); it is recognized by Aitken estimates that keep drifting,
//! and the limit is then fitted in `t = 1/log(1/r)`.

use num_complex::Complex;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{ContinuationOptions, ShiftError, Tracker};
use crate::linalg;
use crate::poly::MonicPolynomial;
use crate::portrait::CriticalPortrait;
use crate::rays::decay_ratio;
use crate::scalar::{from_usize, lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Landed,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    Aitken,
    /// Least squares in `t = 1/log(1/r)` with powers `1, t², …, t⁵`.
    LogFit,
}

#[derive(Debug, Clone, Copy)]
pub struct LandingOptions<T> {
    pub continuation: ContinuationOptions<T>,
    /// Continuation starts at the first schedule point at or above this.
    pub r_top: T,
    /// Largest intermediate continuation ratio between schedule points.
    pub max_rho: T,
    /// Increments entering the decay ratio.
    pub window: usize,
    /// Decay ratio below which convergence may be geometric.
    pub geometric_ratio: T,
    /// Aitken drift (relative to the last increment) below which it is.
    pub aitken_drift: T,
    /// The logarithmic fit uses every continuation point with
    /// `r ≤ r_min·10^fit_decades`.
    pub fit_decades: T,
    /// Cap on `F = d^p`.
    pub max_factor: u64,
}

impl<T: Real> Default for LandingOptions<T> {
    fn default() -> Self {
        Self {
            continuation: ContinuationOptions::default(),
            r_top: lit(10.0),
            max_rho: lit(0.85),
            window: 5,
            geometric_ratio: lit(0.95),
            aitken_drift: lit(0.1),
            fit_decades: lit(2.0),
            max_factor: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct LandingDiagnostics<T> {
    pub r_schedule: Vec<T>,
    pub limits: Vec<MonicPolynomial<T>>,
    pub cauchy_increments: Vec<T>,
    pub extrapolated_limit: MonicPolynomial<T>,
    pub decay_ratio: T,
    /// `F` with samples at `r_min·F^j`.
    pub schedule_factor: u64,
    pub sub_geometric: bool,
    pub method: Extrapolation,
    /// Change of the extrapolated limit when the last samples are dropped.
    pub error_estimate: T,
    pub max_residual: T,
    pub verdict: Verdict,
}

fn schedule_factor(portrait: &CriticalPortrait, cap: u64) -> u64 {
    let d = portrait.degree() as u64;
    let p = (0..portrait.blocks().len())
        .map(|j| portrait.block_image(j).orbit(portrait.degree()).period as u64)
        .fold(1u64, |a, b| a.lcm(&b));
    let mut f = 1u64;
    for _ in 0..p {
        f = f.saturating_mul(d);
        if f > cap {
            return d;
        }
    }
    f
}

fn flat<T: Real>(p: &MonicPolynomial<T>) -> Vec<Complex<T>> {
    p.coeffs().to_vec()
}

fn l2<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (p, q)| s + (*p - *q).norm_sqr()).sqrt()
}

fn aitken<T: Real>(x0: &[Complex<T>], x1: &[Complex<T>], x2: &[Complex<T>]) -> Vec<Complex<T>> {
    (0..x2.len())
        .map(|i| {
            let d1 = x2[i] - x1[i];
            let den = x2[i] - x1[i] * lit::<T>(2.0) + x0[i];
            if den.norm() <= T::epsilon() * (T::one() + x2[i].norm()) {
                x2[i]
            } else {
                x2[i] - d1 * d1 / den
            }
        })
        .collect()
}

/// Least-squares value at `t = 0` of `Σ b_k t^k` over `powers`. There is
/// no linear term: the parabolic model is `K/(log(1/r) + B)²`.
fn log_fit<T: Real>(ts: &[T], xs: &[Vec<Complex<T>>], powers: &[i32]) -> Option<Vec<Complex<T>>> {
    let n = powers.len();
    if ts.len() < n + 3 {
        return None;
    }
    let tmax = ts.iter().fold(T::zero(), |m, &t| m.max(t));
    let basis = |t: T| -> Vec<T> { powers.iter().map(|&p| (t / tmax).powi(p)).collect() };
    let mut ata = vec![Complex::new(T::zero(), T::zero()); n * n];
    for &t in ts {
        let b = basis(t);
        for i in 0..n {
            for j in 0..n {
                ata[i * n + j] = ata[i * n + j] + Complex::new(b[i] * b[j], T::zero());
            }
        }
    }
    let dim = xs[0].len();
    let mut out = Vec::with_capacity(dim);
    for c in 0..dim {
        let mut atb = vec![Complex::new(T::zero(), T::zero()); n];
        for (t, x) in ts.iter().zip(xs) {
            let b = basis(*t);
            for i in 0..n {
                atb[i] = atb[i] + x[c] * b[i];
            }
        }
        let coef = linalg::solve(&ata, &atb)?;
        out.push(coef[0]);
    }
    Some(out)
}

/// Runs the probe with default options.
pub fn landing_probe<T: Real>(portrait: &CriticalPortrait, r_min: T, tol: T) -> Result<LandingDiagnostics<T>, ShiftError> {
    landing_probe_with(portrait, r_min, tol, &LandingOptions::default(), |_| {})
}

/// Continues the ray down to `r_min` and extrapolates its limit. The
/// verdict is `landed` when increments decay (`decay_ratio < 1`) and the
/// extrapolated limit is stable to `tol`.
pub fn landing_probe_with<T: Real>(
    portrait: &CriticalPortrait,
    r_min: T,
    tol: T,
    opts: &LandingOptions<T>,
    mut on_point: impl FnMut(&super::ParamRayPoint<T>),
) -> Result<LandingDiagnostics<T>, ShiftError> {
    if !(r_min > T::zero() && r_min < opts.r_top) {
        return Err(ShiftError::InvalidArgument(format!("r_min must lie in (0, {}), got {r_min}", opts.r_top)));
    }
    let factor = schedule_factor(portrait, opts.max_factor);
    let ft = from_usize::<T>(factor as usize);
    let big_k = ((opts.r_top / r_min).ln() / ft.ln()).ceil().to_usize().unwrap_or(1).max(1);
    let sub = ((ft.ln() / (T::one() / opts.max_rho).ln()).ceil()).to_usize().unwrap_or(1).max(1);
    let rho = ft.powf(-T::one() / from_usize::<T>(sub));
    let r_at = |k: usize| r_min * ft.powi((big_k - k) as i32);

    let mut tr = Tracker::new(portrait, r_at(0), opts.continuation)?;
    let first = tr.point();
    on_point(&first);
    let mut r_schedule = vec![first.r];
    let mut max_residual = first.residual;
    let mut dense = vec![(first.r, flat(&first.poly))];
    let mut limits = vec![first.poly];
    for k in 1..=big_k {
        let top = r_at(k - 1);
        for i in 1..sub {
            tr.advance(top * rho.powi(i as i32))?;
            let p = tr.point();
            max_residual = max_residual.max(p.residual);
            dense.push((p.r, flat(&p.poly)));
        }
        tr.advance(r_at(k))?;
        let p = tr.point();
        on_point(&p);
        max_residual = max_residual.max(p.residual);
        r_schedule.push(p.r);
        dense.push((p.r, flat(&p.poly)));
        limits.push(p.poly);
    }

    let xs: Vec<Vec<Complex<T>>> = limits.iter().map(flat).collect();
    let cauchy_increments: Vec<T> = xs.windows(2).map(|w| l2(&w[1], &w[0])).collect();
    let decay = decay_ratio(&cauchy_increments, opts.window);
    let n = xs.len();

    let (aitken_last, drift) = if n >= 4 {
        let a1 = aitken(&xs[n - 3], &xs[n - 2], &xs[n - 1]);
        let a0 = aitken(&xs[n - 4], &xs[n - 3], &xs[n - 2]);
        let last_inc = cauchy_increments[cauchy_increments.len() - 1];
        let drift = if last_inc > T::zero() { l2(&a1, &a0) / last_inc } else { T::zero() };
        let err = l2(&a1, &a0);
        (Some((a1, err)), drift)
    } else {
        (None, T::infinity())
    };
    let geometric = decay < opts.geometric_ratio && drift < opts.aitken_drift;

    let fit = |powers: &[i32]| -> Option<Vec<Complex<T>>> {
        let r_max = r_min * lit::<T>(10.0).powf(opts.fit_decades);
        let sel: Vec<&(T, Vec<Complex<T>>)> = dense.iter().filter(|(r, _)| *r <= r_max).collect();
        let ts: Vec<T> = sel.iter().map(|(r, _)| T::one() / (T::one() / *r).ln()).collect();
        let xs: Vec<Vec<Complex<T>>> = sel.iter().map(|(_, x)| x.clone()).collect();
        log_fit(&ts, &xs, powers)
    };

    let (method, limit, error_estimate) = match (&aitken_last, geometric) {
        (Some((a, err)), true) => (Extrapolation::Aitken, a.clone(), *err),
        _ => match (fit(&[0, 2, 3, 4, 5]), fit(&[0, 2, 3, 4])) {
            (Some(a), Some(b)) => {
                let e = l2(&a, &b);
                (Extrapolation::LogFit, a, e)
            }
            _ => match &aitken_last {
                Some((a, err)) => (Extrapolation::Aitken, a.clone(), *err),
                None => (Extrapolation::Aitken, xs[n - 1].clone(), T::infinity()),
            },
        },
    };
    let extrapolated_limit = MonicPolynomial::new(portrait.degree(), limit)?;
    let verdict = if decay < T::one() && error_estimate <= tol { Verdict::Landed } else { Verdict::Inconclusive };
    Ok(LandingDiagnostics {
        r_schedule,
        limits,
        cauchy_increments,
        extrapolated_limit,
        decay_ratio: decay,
        schedule_factor: factor,
        sub_geometric: !geometric,
        method,
        error_estimate,
        max_residual,
        verdict,
    })
}
