//! Dynamical external rays: tracing, bifurcation at precritical points and
//! landing extrapolation.

use num_complex::Complex;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::poly::MonicPolynomial;
use crate::portrait::Angle;
use crate::potential::{PotentialError, PotentialField};
use crate::scalar::{from_usize, lit, wrap_pi, Real};

/// Ray angle: exact rational, or a float for quick looks at arbitrary angles.
#[derive(Debug, Clone, PartialEq)]
pub enum RayAngle<T> {
    Exact(Angle),
    Approx(T),
}

impl<T: Real> RayAngle<T> {
    pub fn value(&self) -> T {
        match self {
            RayAngle::Exact(a) => a.to_real(),
            RayAngle::Approx(t) => *t - t.floor(),
        }
    }

    /// `d^n θ mod 1`.
    pub fn frac_pow(&self, d: u32, n: usize) -> T {
        match self {
            RayAngle::Exact(a) => a.times_pow(d, n).to_real(),
            RayAngle::Approx(t) => {
                let dd: T = from_usize(d as usize);
                let mut x = *t - t.floor();
                for _ in 0..n {
                    x = x * dd;
                    x = x - x.floor();
                }
                x
            }
        }
    }

    pub fn times(&self, d: u32) -> Self {
        match self {
            RayAngle::Exact(a) => RayAngle::Exact(a.times(d)),
            RayAngle::Approx(_) => RayAngle::Approx(self.frac_pow(d, 1)),
        }
    }

    /// Eventual period under multiplication by `d` (1 for float angles).
    pub fn period(&self, d: u32) -> usize {
        match self {
            RayAngle::Exact(a) => a.orbit(d).period,
            RayAngle::Approx(_) => 1,
        }
    }
}

impl<T: Real> From<Angle> for RayAngle<T> {
    fn from(a: Angle) -> Self {
        RayAngle::Exact(a)
    }
}

impl<T: Real> Serialize for RayAngle<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            RayAngle::Exact(a) => a.serialize(s),
            RayAngle::Approx(t) => s.serialize_f64(t.to_f64_lossy()),
        }
    }
}

/// Step and tolerance settings for ray tracing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl<T> {
    /// Geometric potential ratio between samples.
    pub rho: T,
    /// Ratio used once the potential is below `fine_below`.
    pub rho_fine: T,
    pub fine_below: T,
    /// Corrector stops when the lifted residual is below `newton_tol·min(s, 1)`.
    pub newton_tol: T,
    pub max_newton: usize,
    /// Smallest relative potential step before giving up.
    pub min_step: T,
    pub max_steps: usize,
    /// Increment size below which a connected-case ray counts as landed.
    pub landing_tol: T,
    /// Relative offsets above a bifurcation level used by the two-scale test.
    pub eta_coarse: T,
    pub eta_fine: T,
    /// Largest accepted corrector move relative to the predictor move.
    pub jump_ratio: T,
    /// Largest predicted move per step relative to `1 + |z|`; far out the
    /// ray is exponential in `s` and long steps can land on a sibling ray.
    pub max_move: T,
    /// Potential below which tracing stops unconditionally.
    pub s_floor: T,
}

impl<T: Real> Default for StepControl<T> {
    fn default() -> Self {
        Self {
            rho: lit(0.85),
            rho_fine: lit(0.95),
            fine_below: lit(0.05),
            newton_tol: lit(1e-11),
            max_newton: 40,
            min_step: lit(1e-12),
            max_steps: 200_000,
            landing_tol: lit(1e-10),
            eta_coarse: lit(1e-4),
            eta_fine: lit(1e-8),
            jump_ratio: lit(0.5),
            max_move: lit(0.25),
            s_floor: lit(1e-14),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RaySample<T> {
    pub potential: T,
    pub point: Complex<T>,
    /// `|G(point) − potential|`.
    pub green_residual: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationReason {
    ReachedEnd,
    PotentialFloor,
    StepLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RayTerminal<T> {
    Landed { point: Complex<T> },
    Bifurcated { point: Complex<T>, r_f: T },
    Truncated { reason: TruncationReason },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct RayPath<T> {
    pub angle: RayAngle<T>,
    pub samples: Vec<RaySample<T>>,
    pub terminal: RayTerminal<T>,
}

/// Landing estimate from the period-aligned subsequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct RayLanding<T> {
    pub point: Complex<T>,
    /// Potentials of the aligned subsequence (ratio `d^{-p}`).
    pub potentials: Vec<T>,
    pub points: Vec<Complex<T>>,
    /// Aitken estimates, one per triple.
    pub estimates: Vec<Complex<T>>,
    pub cauchy_increments: Vec<T>,
    pub decay_ratio: T,
    pub period: usize,
}

#[derive(Debug, Error)]
pub enum RayError<T: Real> {
    #[error("invalid potential range: start {start}, end {end}")]
    Range { start: f64, end: f64 },
    #[error("start potential {s_start} is not above the critical rate {rate}")]
    Seed { s_start: f64, rate: f64 },
    #[error("corrector failed at potential {s}; {kept} samples kept", kept = partial.samples.len())]
    Diverged { s: f64, partial: Box<RayPath<T>> },
    #[error("no landing detected down to potential {s_min}")]
    NoConvergence { s_min: f64, diagnostics: Box<RayLanding<T>> },
    #[error("filled Julia set is not connected (largest critical rate {0})")]
    NotConnected(f64),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

struct Tracer<'a, T: Real> {
    field: &'a PotentialField<T>,
    angle: &'a RayAngle<T>,
    ctrl: &'a StepControl<T>,
    degree: u32,
    phases: std::cell::RefCell<Vec<T>>,
}

enum StepFail {
    Corrector,
}

impl<'a, T: Real> Tracer<'a, T> {
    fn new(field: &'a PotentialField<T>, angle: &'a RayAngle<T>, ctrl: &'a StepControl<T>) -> Self {
        Self { field, angle, ctrl, degree: field.poly().degree(), phases: Default::default() }
    }

    fn phase(&self, n: usize) -> T {
        let mut cache = self.phases.borrow_mut();
        while cache.len() <= n {
            let k = cache.len();
            cache.push(self.angle.frac_pow(self.degree, k));
        }
        cache[n]
    }

    /// Lifted residual `log ψ(z) − (s + 2πiθ)` modulo the lift lattice, and `d log ψ/dz`.
    fn residual(&self, z: Complex<T>, s: T) -> Option<(Complex<T>, Complex<T>)> {
        let l = self.field.lift(z)?;
        let phi = self.phase(l.n);
        let re = l.lambda.re - s / l.inv_dn;
        let im = wrap_pi(l.lambda.im - T::TAU() * phi);
        Some((Complex::new(re, im) * l.inv_dn, l.tangent))
    }

    /// Residual the corrector can resolve: the requested relative tolerance,
    /// or the rounding floor when that is larger. Rounding `w_j = f^j(z)`
    /// moves `z` by about `ε|w_j|/|(f^j)'(z)|`, which dominates `ε|z|` near a
    /// critical point.
    fn tol(&self, s: T, z: Complex<T>, dl: Complex<T>) -> T {
        let f = self.field.poly();
        let far = self.field.far_radius();
        let (mut w, mut dw) = (z, Complex::new(T::one(), T::zero()));
        let mut spread = z.norm();
        for _ in 0..self.field.options().max_iter {
            if w.norm() > far {
                break;
            }
            let (v, dv) = f.eval_with_derivative(w);
            dw = dw * dv;
            w = v;
            let g = dw.norm();
            if g > T::zero() {
                spread = spread.max(w.norm() / g);
            }
        }
        (self.ctrl.newton_tol * s.min(T::one())).max(lit::<T>(16.0) * T::epsilon() * spread * dl.norm())
    }

    fn correct(&self, z0: Complex<T>, s: T) -> Option<Complex<T>> {
        let mut z = z0;
        for _ in 0..self.ctrl.max_newton {
            let (r, dl) = self.residual(z, s)?;
            let step = r / dl;
            if !(step.re.is_finite() && step.im.is_finite()) {
                return None;
            }
            if r.norm() <= self.tol(s, z, dl) {
                // One more step is nearly free and lands at rounding level.
                let polished = z - step;
                return match self.residual(polished, s) {
                    Some((r2, _)) if r2.norm() <= r.norm() => Some(polished),
                    _ => Some(z),
                };
            }
            z = z - step;
        }
        None
    }

    /// First point on the ray, at a potential where `ψ ≈ id` is a safe seed.
    fn seed(&self, s_start: T) -> Option<(Complex<T>, T)> {
        let s_top = s_start.max(self.field.far_radius().ln() + lit(2.0));
        let guess = Complex::from_polar(s_top.exp(), T::TAU() * self.angle.value());
        Some((self.correct(guess, s_top)?, s_top))
    }

    /// Predictor–corrector from `(z, s)` to potential `target`, halving on failure.
    fn step_to(&self, mut z: Complex<T>, mut s: T, target: T) -> Result<Complex<T>, StepFail> {
        let mut next = target;
        while s > target {
            let (_, dl) = self.residual(z, s).ok_or(StepFail::Corrector)?;
            let pred_move = Complex::new(next - s, T::zero()) / dl;
            let pred = z + pred_move;
            let short = pred_move.norm() <= self.ctrl.max_move * (T::one() + z.norm());
            let accepted = short.then(|| self.correct(pred, next)).flatten().filter(|zc| {
                (*zc - pred).norm() <= self.ctrl.jump_ratio * pred_move.norm() + T::epsilon() * (T::one() + z.norm())
            });
            match accepted {
                Some(zc) => {
                    z = zc;
                    s = next;
                    next = target;
                }
                None => {
                    let half = (s - next) * lit(0.5);
                    if half <= self.ctrl.min_step * s {
                        return Err(StepFail::Corrector);
                    }
                    next = s - half;
                }
            }
        }
        Ok(z)
    }

    fn rho(&self, s: T) -> T {
        if s < self.ctrl.fine_below {
            self.ctrl.rho_fine
        } else {
            self.ctrl.rho
        }
    }

    /// Follows the ray from `(z, s)` down to `target` without recording.
    fn descend(&self, mut z: Complex<T>, mut s: T, target: T) -> Result<Complex<T>, StepFail> {
        while s > target {
            let next = (s * self.rho(s)).max(target);
            z = self.step_to(z, s, next)?;
            s = next;
        }
        Ok(z)
    }

    fn sample(&self, s: T, z: Complex<T>) -> RaySample<T> {
        let g = self.field.green(z).green;
        RaySample { potential: s, point: z, green_residual: (g - s).abs() }
    }
}

/// Point of the ray at potential `s`; no bifurcation checks, so `s` should
/// lie above the critical point rates.
pub fn point_on_ray<T: Real>(
    field: &PotentialField<T>,
    angle: &RayAngle<T>,
    s: T,
    ctrl: &StepControl<T>,
) -> Result<Complex<T>, RayError<T>> {
    if !(s > T::zero()) {
        return Err(RayError::Range { start: s.to_f64_lossy(), end: 0.0 });
    }
    let tr = Tracer::new(field, angle, ctrl);
    let fail = |s: T| RayError::Diverged {
        s: s.to_f64_lossy(),
        partial: Box::new(RayPath {
            angle: angle.clone(),
            samples: vec![],
            terminal: RayTerminal::Truncated { reason: TruncationReason::ReachedEnd },
        }),
    };
    let (z, s_top) = tr.seed(s).ok_or_else(|| fail(s))?;
    tr.descend(z, s_top, s).map_err(|_| fail(s))
}

/// Point of the ray at potential `b(1 + gap)`, approached geometrically in
/// `s − b` from `b(1 + 0.1)`. Used to reach a critical level where the ray
/// has a square-root type singularity. No bifurcation checks are made above
/// `b`, so `b` must be the highest critical level crossed.
pub(crate) fn point_near_level<T: Real>(
    field: &PotentialField<T>,
    angle: &RayAngle<T>,
    b: T,
    gap: T,
    ctrl: &StepControl<T>,
) -> Result<Complex<T>, RayError<T>> {
    let tr = Tracer::new(field, angle, ctrl);
    let start_gap = lit::<T>(0.1).max(gap);
    let s_start = b * (T::one() + start_gap);
    let fail = |s: T| RayError::Diverged {
        s: s.to_f64_lossy(),
        partial: Box::new(RayPath {
            angle: angle.clone(),
            samples: vec![],
            terminal: RayTerminal::Truncated { reason: TruncationReason::ReachedEnd },
        }),
    };
    let (z_top, s_top) = tr.seed(s_start).ok_or_else(|| fail(s_start))?;
    let mut z = tr.descend(z_top, s_top, s_start).map_err(|_| fail(s_start))?;
    let mut g = start_gap;
    while g > gap {
        let g_new = (g * lit(0.3)).max(gap);
        z = tr.step_to(z, b * (T::one() + g), b * (T::one() + g_new)).map_err(|_| fail(b * (T::one() + g)))?;
        g = g_new;
    }
    Ok(z)
}

/// Traces `R_f(θ)` for `f` with a precomputed field.
pub fn trace_ray_in<T: Real>(
    field: &PotentialField<T>,
    angle: &RayAngle<T>,
    s_start: T,
    s_end: T,
    ctrl: &StepControl<T>,
) -> Result<RayPath<T>, RayError<T>> {
    if !(s_start > s_end && s_end >= T::zero()) {
        return Err(RayError::Range { start: s_start.to_f64_lossy(), end: s_end.to_f64_lossy() });
    }
    let value_rate = field.max_value_rate();
    if s_start <= value_rate {
        return Err(RayError::Seed { s_start: s_start.to_f64_lossy(), rate: value_rate.to_f64_lossy() });
    }
    let tr = Tracer::new(field, angle, ctrl);
    let f = field.poly();
    let mut path = RayPath {
        angle: angle.clone(),
        samples: Vec::new(),
        terminal: RayTerminal::Truncated { reason: TruncationReason::ReachedEnd },
    };
    let diverged = |s: T, path: RayPath<T>| RayError::Diverged { s: s.to_f64_lossy(), partial: Box::new(path) };

    let Some((z_top, s_top)) = tr.seed(s_start) else {
        return Err(diverged(s_start, path));
    };
    let mut z = match tr.descend(z_top, s_top, s_start) {
        Ok(z) => z,
        Err(_) => return Err(diverged(s_start, path)),
    };
    let mut s = s_start;
    path.samples.push(tr.sample(s, z));

    let levels = bifurcation_levels(field, s_start, s_end.max(ctrl.s_floor));
    let mut li = 0;
    let floor = ctrl.s_floor.max(s_end);

    for _ in 0..ctrl.max_steps {
        if s <= s_end {
            return Ok(path);
        }
        if s <= ctrl.s_floor {
            path.terminal = RayTerminal::Truncated { reason: TruncationReason::PotentialFloor };
            return Ok(path);
        }
        let next = (s * tr.rho(s)).max(floor);
        while li < levels.len() && levels[li].0 >= s {
            li += 1;
        }
        if li < levels.len() && next <= levels[li].0 * (T::one() + ctrl.eta_coarse) {
            let b = levels[li].0;
            let group: Vec<(usize, usize)> = levels[li..]
                .iter()
                .take_while(|l| (l.0 - b).abs() <= b * lit(1e-12))
                .map(|l| (l.1, l.2))
                .collect();
            li += group.len();
            let s1 = b * (T::one() + ctrl.eta_coarse);
            let s2 = b * (T::one() + ctrl.eta_fine);
            if s1 < s {
                z = match tr.step_to(z, s, s1) {
                    Ok(z) => z,
                    Err(_) => return Err(diverged(s, path)),
                };
                s = s1;
                path.samples.push(tr.sample(s, z));
            }
            let z1 = z;
            // Approach the level geometrically in s − b.
            let mut gap = s - b;
            let target_gap = s2 - b;
            while gap > target_gap {
                let new_gap = (gap * lit(0.3)).max(target_gap);
                z = match tr.step_to(z, b + gap, b + new_gap) {
                    Ok(z) => z,
                    Err(_) => return Err(diverged(b + gap, path)),
                };
                gap = new_gap;
                s = b + gap;
                path.samples.push(tr.sample(s, z));
            }
            let z2 = z;
            for (ci, k) in group {
                let c = field.critical_points()[ci].0;
                let w1 = iterate(f, z1, k);
                let w2 = iterate(f, z2, k);
                let (d1, d2) = ((w1 - c).norm(), (w2 - c).norm());
                if d2 < lit::<T>(0.5) * d1 {
                    let x = if k == 0 { c } else { refine_precritical(f, z2, c, k) };
                    path.terminal = RayTerminal::Bifurcated { point: x, r_f: b };
                    return Ok(path);
                }
            }
            continue;
        }
        z = match tr.step_to(z, s, next) {
            Ok(z) => z,
            Err(_) => return Err(diverged(s, path)),
        };
        s = next;
        path.samples.push(tr.sample(s, z));
        if let Some(p) = landed(&path.samples, ctrl.landing_tol) {
            path.terminal = RayTerminal::Landed { point: p };
            return Ok(path);
        }
    }
    path.terminal = RayTerminal::Truncated { reason: TruncationReason::StepLimit };
    Ok(path)
}

/// Traces `R_f(θ)` from potential `s_start` down to `s_end`.
pub fn trace_ray<T: Real>(
    f: &MonicPolynomial<T>,
    theta: &Angle,
    s_start: T,
    s_end: T,
    ctrl: &StepControl<T>,
) -> Result<RayPath<T>, RayError<T>> {
    let field = PotentialField::new(f)?;
    trace_ray_in(&field, &RayAngle::Exact(theta.clone()), s_start, s_end, ctrl)
}

/// `(level, critical index, k)` for `G(c)/d^k` in `(s_min, s_max)`, descending.
fn bifurcation_levels<T: Real>(field: &PotentialField<T>, s_max: T, s_min: T) -> Vec<(T, usize, usize)> {
    let d: T = from_usize(field.poly().degree() as usize);
    let mut out = Vec::new();
    for (i, &(_, _, g)) in field.critical_points().iter().enumerate() {
        if !(g > T::zero()) {
            continue;
        }
        let mut b = g;
        let mut k = 0;
        while b > s_min && k < 200 {
            if b < s_max {
                out.push((b, i, k));
            }
            b = b / d;
            k += 1;
        }
    }
    out.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    out
}

fn iterate<T: Real>(f: &MonicPolynomial<T>, mut z: Complex<T>, k: usize) -> Complex<T> {
    for _ in 0..k {
        z = f.evaluate(z);
    }
    z
}

/// Newton on `f^k(x) = c` from a nearby point of the ray.
fn refine_precritical<T: Real>(f: &MonicPolynomial<T>, z0: Complex<T>, c: Complex<T>, k: usize) -> Complex<T> {
    let mut x = z0;
    for _ in 0..50 {
        let mut w = x;
        let mut dw = Complex::new(T::one(), T::zero());
        for _ in 0..k {
            let (v, dv) = f.eval_with_derivative(w);
            dw = dw * dv;
            w = v;
        }
        let step = (w - c) / dw;
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        x = x - step;
        if step.norm() <= T::epsilon() * lit::<T>(4.0) * (T::one() + x.norm()) {
            break;
        }
    }
    x
}

fn aitken<T: Real>(z0: Complex<T>, z1: Complex<T>, z2: Complex<T>) -> Complex<T> {
    let a = z2 - z1;
    let b = z1 - z0;
    let den = a - b;
    if den.norm() <= T::epsilon() * (a.norm() + b.norm()) {
        return z2;
    }
    z2 - a * a / den
}

/// Landing test on the sample tail: three consecutive increments below
/// `tol`, each no larger than the previous one.
fn landed<T: Real>(samples: &[RaySample<T>], tol: T) -> Option<Complex<T>> {
    let n = samples.len();
    if n < 4 {
        return None;
    }
    let inc: Vec<T> = (n - 3..n).map(|i| (samples[i].point - samples[i - 1].point).norm()).collect();
    let small = inc.iter().all(|&x| x < tol);
    let decreasing = inc.windows(2).all(|w| w[1] <= w[0]);
    (small && decreasing).then(|| aitken(samples[n - 3].point, samples[n - 2].point, samples[n - 1].point))
}

/// Landing point of `R_f(θ)` for connected `K_f`, extrapolated by Aitken on
/// samples spaced by `d^{-p}` in potential (`p` the eventual period of `θ`),
/// where the approach to a repelling cycle is asymptotically geometric.
pub fn landing_point<T: Real>(
    f: &MonicPolynomial<T>,
    theta: &Angle,
    tol: T,
) -> Result<(Complex<T>, RayLanding<T>), RayError<T>> {
    let field = PotentialField::new(f)?;
    landing_point_in(&field, &RayAngle::Exact(theta.clone()), tol, &StepControl::default())
}

pub fn landing_point_in<T: Real>(
    field: &PotentialField<T>,
    angle: &RayAngle<T>,
    tol: T,
    ctrl: &StepControl<T>,
) -> Result<(Complex<T>, RayLanding<T>), RayError<T>> {
    if !field.is_connected() {
        return Err(RayError::NotConnected(field.max_point_rate().to_f64_lossy()));
    }
    let d = field.poly().degree();
    let mut period = angle.period(d);
    let log_d = (d as f64).ln();
    if period as f64 * log_d > 20.0 * std::f64::consts::LN_2 {
        period = ((20.0 * std::f64::consts::LN_2) / log_d).floor().max(1.0) as usize;
    }
    let log_factor = period as f64 * log_d;
    let m = (log_factor / (1.0f64 / 0.9).ln()).ceil() as usize;
    let rho: T = lit((-log_factor / m as f64).exp());

    let tr = Tracer::new(field, angle, ctrl);
    let s0 = T::one();
    let diverged_at = |s: T| RayError::Diverged {
        s: s.to_f64_lossy(),
        partial: Box::new(RayPath {
            angle: angle.clone(),
            samples: vec![],
            terminal: RayTerminal::Truncated { reason: TruncationReason::ReachedEnd },
        }),
    };
    let (z_top, s_top) = tr.seed(s0).ok_or_else(|| diverged_at(s0))?;
    let mut z = tr.descend(z_top, s_top, s0).map_err(|_| diverged_at(s0))?;
    let mut s = s0;
    let mut diag = RayLanding {
        point: z,
        potentials: vec![s],
        points: vec![z],
        estimates: Vec::new(),
        cauchy_increments: Vec::new(),
        decay_ratio: T::nan(),
        period,
    };
    let mut agreements = 0;
    loop {
        for _ in 0..m {
            let next = s * rho;
            z = tr.step_to(z, s, next).map_err(|_| diverged_at(s))?;
            s = next;
        }
        let prev = *diag.points.last().unwrap();
        diag.potentials.push(s);
        diag.points.push(z);
        diag.cauchy_increments.push((z - prev).norm());
        diag.decay_ratio = decay_ratio(&diag.cauchy_increments, 5);
        let n = diag.points.len();
        if n >= 3 {
            let est = aitken(diag.points[n - 3], diag.points[n - 2], diag.points[n - 1]);
            if let Some(last) = diag.estimates.last() {
                if (est - *last).norm() < tol {
                    agreements += 1;
                } else {
                    agreements = 0;
                }
            }
            diag.estimates.push(est);
            diag.point = est;
            if agreements >= 3 {
                return Ok((est, diag));
            }
        }
        if s * rho.powi(m as i32) < ctrl.s_floor {
            return Err(RayError::NoConvergence { s_min: s.to_f64_lossy(), diagnostics: Box::new(diag) });
        }
    }
}

/// Geometric mean of consecutive increment ratios over the last `window` increments.
pub(crate) fn decay_ratio<T: Real>(inc: &[T], window: usize) -> T {
    let n = inc.len();
    if n < 2 {
        return T::nan();
    }
    let start = n.saturating_sub(window);
    let tail = &inc[start..];
    let mut acc = T::zero();
    let mut cnt = 0;
    for w in tail.windows(2) {
        if w[0] > T::zero() && w[1] > T::zero() {
            acc = acc + (w[1] / w[0]).ln();
            cnt += 1;
        }
    }
    if cnt == 0 {
        return T::zero();
    }
    (acc / from_usize::<T>(cnt)).exp()
}

/// `max |f(R_f(θ)(s)) − R_f(dθ)(d·s)|` over `s_grid`, both rays traced independently.
pub fn ray_functoriality_check<T: Real>(f: &MonicPolynomial<T>, theta: &Angle, s_grid: &[T]) -> Result<T, RayError<T>> {
    let field = PotentialField::new(f)?;
    let ctrl = StepControl::default();
    let d = f.degree();
    let a = RayAngle::Exact(theta.clone());
    let b = RayAngle::Exact(theta.times(d));
    let dd: T = from_usize(d as usize);
    let mut worst = T::zero();
    for &s in s_grid {
        let z1 = point_on_ray(&field, &a, s, &ctrl)?;
        let z2 = point_on_ray(&field, &b, dd * s, &ctrl)?;
        worst = worst.max((f.evaluate(z1) - z2).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    #[test]
    fn power_map_real_ray() {
        let f = MonicPolynomial::<f64>::power(2).unwrap();
        let path = trace_ray(&f, &Angle::zero(), 1.0, 0.01, &StepControl::default()).unwrap();
        assert_eq!(path.terminal, RayTerminal::Truncated { reason: TruncationReason::ReachedEnd });
        for smp in &path.samples {
            assert!(smp.point.im.abs() < 1e-12);
            assert!((smp.point.re - smp.potential.exp()).abs() < 1e-10);
            assert!(smp.green_residual < 1e-9);
        }
        assert!(path.samples.windows(2).all(|w| w[1].potential < w[0].potential));
        assert!((path.samples.last().unwrap().potential - 0.01).abs() < 1e-15);
    }

    #[test]
    fn chebyshev_ray_lands_at_two() {
        let f = MonicPolynomial::quadratic(c(-2.0, 0.0));
        let path = trace_ray(&f, &Angle::zero(), 2.0, 1e-12, &StepControl::default()).unwrap();
        match path.terminal {
            RayTerminal::Landed { point } => assert!((point - c(2.0, 0.0)).norm() < 1e-8, "{point}"),
            t => panic!("unexpected terminal {t:?}"),
        }
        let (p, _) = landing_point(&f, &Angle::zero(), 1e-10).unwrap();
        assert!((p - c(2.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn disconnected_rays_bifurcate_at_precritical_points() {
        // For z^2 - 6 the critical value lies on the 1/2-ray, so 1/4 and 3/4
        // meet at 0 and their preimages 1/8, 7/8 meet at sqrt(6).
        let f = MonicPolynomial::quadratic(c(-6.0, 0.0));
        let field = PotentialField::new(&f).unwrap();
        let rate = crate::potential::critical_value_rates_in(&field)[0].1;
        let ctrl = StepControl::default();
        for (num, den, point, r_f) in [(1u64, 4u64, c(0.0, 0.0), rate / 2.0), (3, 4, c(0.0, 0.0), rate / 2.0), (1, 8, c(6f64.sqrt(), 0.0), rate / 4.0)] {
            let path = trace_ray_in(&field, &RayAngle::Exact(Angle::frac(num, den)), 3.0, 1e-6, &ctrl).unwrap();
            match path.terminal {
                RayTerminal::Bifurcated { point: x, r_f: r } => {
                    assert!((x - point).norm() < 1e-12, "{num}/{den}: {x}");
                    assert!((r - r_f).abs() < 1e-12);
                }
                t => panic!("{num}/{den}: unexpected terminal {t:?}"),
            }
        }
        let path = trace_ray_in(&field, &RayAngle::Exact(Angle::frac(1, 2)), 3.0, 1e-12, &ctrl).unwrap();
        match path.terminal {
            RayTerminal::Landed { point } => assert!((point - c(-3.0, 0.0)).norm() < 1e-8),
            t => panic!("unexpected terminal {t:?}"),
        }
    }

    #[test]
    fn disconnected_ray_missing_critical_point_continues() {
        // The 0-ray of z^2 - 6 runs along (3, ∞) and never meets 0.
        let f = MonicPolynomial::quadratic(c(-6.0, 0.0));
        let path = trace_ray(&f, &Angle::zero(), 3.0, 1e-3, &StepControl::default()).unwrap();
        assert!(matches!(path.terminal, RayTerminal::Truncated { .. } | RayTerminal::Landed { .. }));
        let last = path.samples.last().unwrap().point;
        assert!(last.re > 3.0 && last.im.abs() < 1e-9);
    }

    #[test]
    fn landing_examples() {
        let z2 = MonicPolynomial::<f64>::power(2).unwrap();
        let (p, _) = landing_point(&z2, &Angle::zero(), 1e-10).unwrap();
        assert!((p - c(1.0, 0.0)).norm() < 1e-8);

        let f = MonicPolynomial::quadratic(c(0.0, 1.0));
        let (p, diag) = landing_point(&f, &Angle::frac(1, 6), 1e-10).unwrap();
        assert!((p - c(0.0, 1.0)).norm() < 1e-8, "{p}");
        assert!(diag.decay_ratio < 1.0);
        // The landing point's orbit follows the angle's orbit: 1/3 and 2/3 land on the 2-cycle.
        let (q1, _) = landing_point(&f, &Angle::frac(1, 3), 1e-10).unwrap();
        let (q2, _) = landing_point(&f, &Angle::frac(2, 3), 1e-10).unwrap();
        assert!((q1 - f.evaluate(p)).norm() < 1e-7);
        assert!((q2 - f.evaluate(q1)).norm() < 1e-7);
    }

    #[test]
    fn landing_requires_connected_julia_set() {
        let f = MonicPolynomial::quadratic(c(-6.0, 0.0));
        assert!(matches!(landing_point(&f, &Angle::zero(), 1e-9), Err(RayError::NotConnected(_))));
    }

    #[test]
    fn functoriality_examples() {
        let z2 = MonicPolynomial::<f64>::power(2).unwrap();
        assert!(ray_functoriality_check(&z2, &Angle::frac(1, 3), &[0.5, 1.0]).unwrap() < 1e-9);
        let z3 = MonicPolynomial::<f64>::power(3).unwrap();
        assert!(ray_functoriality_check(&z3, &Angle::zero(), &[0.5, 1.0]).unwrap() < 1e-12);
        let f = MonicPolynomial::quadratic(c(0.0, 1.0));
        assert!(ray_functoriality_check(&f, &Angle::frac(1, 6), &[0.25, 0.5]).unwrap() < 1e-8);
    }

    #[test]
    fn approx_angles_match_exact() {
        let f = MonicPolynomial::quadratic(c(-0.5, 0.3));
        let field = PotentialField::new(&f).unwrap();
        let ctrl = StepControl::default();
        let a = point_on_ray(&field, &RayAngle::Exact(Angle::frac(1, 5)), 0.3, &ctrl).unwrap();
        let b = point_on_ray(&field, &RayAngle::Approx(0.2), 0.3, &ctrl).unwrap();
        assert!((a - b).norm() < 1e-9);
    }

    #[test]
    fn periodic_landing_point_is_periodic() {
        let f = MonicPolynomial::quadratic(c(0.0, 1.0));
        for (num, den, per) in [(1u64, 7u64, 3usize), (1, 3, 2), (1, 15, 4)] {
            let (z, _) = landing_point(&f, &Angle::frac(num, den), 1e-9).unwrap();
            let mut w = z;
            for _ in 0..per {
                w = f.evaluate(w);
            }
            assert!((w - z).norm() < 1e-8, "{num}/{den}: {z} -> {w}");
        }
    }
}
