//! Reading the critical portrait off a shift-locus polynomial.

use num_complex::Complex;

use super::ShiftError;
use crate::poly::{aberth, MonicPolynomial};
use crate::portrait::{Angle, CriticalPortrait, PortraitBlock};
use crate::potential::PotentialField;
use crate::rays::{point_near_level, RayAngle, StepControl};
use crate::scalar::{from_usize, lit, Real};

#[derive(Debug, Clone, Copy)]
pub struct PortraitRecoveryOptions {
    /// Largest denominator accepted when snapping angles to rationals.
    pub max_den: u64,
    /// Acceptance window (in turns) for the snapped rational.
    pub window: f64,
    /// Allowed spread of the critical value escape rates.
    pub rate_tol: f64,
    /// Rays are followed down to potential `(r/d)(1 + level_gap)`.
    pub level_gap: f64,
}

impl Default for PortraitRecoveryOptions {
    fn default() -> Self {
        Self { max_den: 1_000_000, window: 1e-7, rate_tol: 1e-6, level_gap: 1e-6 }
    }
}

/// First continued-fraction convergent of `x` (mod 1) within `window`
/// whose denominator does not exceed `max_den`.
pub fn snap_angle(x: f64, max_den: u64, window: f64) -> Option<Angle> {
    if !x.is_finite() {
        return None;
    }
    let x = x.rem_euclid(1.0);
    let (mut h0, mut h1) = (0u128, 1u128);
    let (mut k0, mut k1) = (1u128, 0u128);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        if a > 1e15 {
            break;
        }
        let a = a as u128;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > max_den as u128 {
            break;
        }
        if (x - h2 as f64 / k2 as f64).abs() < window {
            let num = (h2 % k2) as u64;
            return Angle::new(num, k2 as u64).ok();
        }
        let frac = y - y.floor();
        if frac <= 0.0 {
            break;
        }
        y = 1.0 / frac;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
    }
    None
}

pub fn portrait_of<T: Real>(f: &MonicPolynomial<T>, r_hint: Option<T>) -> Result<CriticalPortrait, ShiftError> {
    portrait_of_with(f, r_hint, &PortraitRecoveryOptions::default())
}

/// For each critical point `c` of multiplicity `m`, the critical value ray
/// angle `φ` is read from `ψ(f(c))`; of the `d` preimage angles `(φ+k)/d`
/// the `m+1` whose rays run into `c` form its block. Each preimage ray is
/// followed to just above the critical level and attributed to the nearest
/// root of `f(z) = f(c)`.
pub fn portrait_of_with<T: Real>(
    f: &MonicPolynomial<T>,
    r_hint: Option<T>,
    opts: &PortraitRecoveryOptions,
) -> Result<CriticalPortrait, ShiftError> {
    let field = PotentialField::new(f)?;
    let d = f.degree();
    let dt = from_usize::<T>(d as usize);
    let crit = field.critical_points().to_vec();
    let rates: Vec<f64> = crit.iter().map(|c| (c.2 * dt).to_f64_lossy()).collect();
    let rmin = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let rmax = rates.iter().cloned().fold(0.0, f64::max);
    let hint_off = r_hint.map_or(false, |h| (h.to_f64_lossy() - rmax).abs() > opts.rate_tol * rmax.max(1.0));
    if !(rmin > 0.0) || rmax - rmin > opts.rate_tol || hint_off {
        return Err(ShiftError::NotInShiftLocus { rates });
    }
    let ctrl = StepControl::<T>::default();
    let mut blocks = Vec::new();
    let mut raw = Vec::new();
    let mut snapped = Vec::new();
    for &(c, _, _) in &crit {
        let v = f.evaluate(c);
        let phi = field.log_bottcher(v, None)?.im / T::TAU();
        raw.push(phi.to_f64_lossy().rem_euclid(1.0));
        snapped.push(snap_angle(phi.to_f64_lossy(), opts.max_den, opts.window));
    }
    if snapped.iter().any(Option::is_none) {
        return Err(ShiftError::AngleResolution { raw });
    }
    for (j, &(c, mult, rate)) in crit.iter().enumerate() {
        let phi = snapped[j].clone().expect("checked above");
        let v = f.evaluate(c);
        let mut shifted = f.full_coeffs();
        shifted[0] = shifted[0] - v;
        let mut roots = aberth(&shifted, 7)?;
        roots.sort_by(|a, b| (*a - c).norm().partial_cmp(&(*b - c).norm()).unwrap_or(std::cmp::Ordering::Equal));
        let others: Vec<Complex<T>> = roots[(mult + 1).min(roots.len())..].to_vec();
        let mut angles = Vec::new();
        for k in 0..d {
            let a = phi.preimage(d, k);
            let end = point_near_level(&field, &RayAngle::Exact(a.clone()), rate, lit(opts.level_gap), &ctrl)
                .map_err(|e| ShiftError::Ray(e.to_string()))?;
            let to_c = (end - c).norm();
            if others.iter().all(|o| (end - *o).norm() > to_c) {
                angles.push(a);
            }
        }
        if angles.len() != mult + 1 {
            return Err(ShiftError::Ray(format!(
                "{} preimage rays of {} reach the critical point {}, expected {}",
                angles.len(),
                phi,
                c,
                mult + 1
            )));
        }
        blocks.push(PortraitBlock::new(angles).map_err(|e| ShiftError::InvalidPortrait(e.to_string()))?);
    }
    CriticalPortrait::new(d, blocks)
        .and_then(CriticalPortrait::validated)
        .map_err(|e| ShiftError::InvalidPortrait(e.to_string()))
}
