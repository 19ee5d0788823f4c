//! Parameter rays in the shift locus.
//!
//! `f_r(Θ)` is the centered monic polynomial whose critical points realize
//! the portrait `Θ` and whose critical values all sit at Böttcher coordinate
//! `e^{r + 2πi·m_d(θ_j)}`. As `r` decreases the family traces the parameter
//! ray of `Θ`; [`landing_probe`] follows it towards the connectedness locus.

mod landing;
mod recover;
mod system;

use num_complex::Complex;
use serde::Serialize;
use thiserror::Error;

pub use landing::{landing_probe, landing_probe_with, Extrapolation, LandingDiagnostics, LandingOptions, Verdict};
pub use recover::{portrait_of, portrait_of_with, snap_angle, PortraitRecoveryOptions};

use crate::linalg;
use crate::poly::{MonicPolynomial, PolyError};
use crate::portrait::CriticalPortrait;
use crate::potential::PotentialError;
use crate::scalar::{from_usize, lit, Real};
use system::System;

#[derive(Debug, Error)]
pub enum ShiftError {
    #[error("invalid portrait: {0}")]
    InvalidPortrait(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("Newton diverged at r = {r} (residual {residual:e})")]
    NewtonDivergence { r: f64, residual: f64, last: Vec<[f64; 2]> },
    #[error("no branch witness and r = {r} is below the unambiguous level {threshold}")]
    BranchAmbiguity { r: f64, threshold: f64 },
    #[error("critical points merged at r = {r} (relative distance {distance:e})")]
    MultiplicityCollision { r: f64, distance: f64 },
    #[error("continuation stalled between r = {last_good_r} and r = {target_r}")]
    ContinuationStall { last_good_r: f64, target_r: f64 },
    #[error("guess does not match the portrait: {0}")]
    GuessMismatch(String),
    #[error("critical value rates {rates:?} are not all equal")]
    NotInShiftLocus { rates: Vec<f64> },
    #[error("recovered angles {raw:?} are not close to rationals")]
    AngleResolution { raw: Vec<f64> },
    #[error("ray tracing failed: {0}")]
    Ray(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Lifted arguments `Im log ψ(v_j)` per block, carried along a continuation.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct BranchWitness<T> {
    pub lifted_args: Vec<T>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct ParamRayPoint<T> {
    pub r: T,
    pub poly: MonicPolynomial<T>,
    /// Largest `|log ψ(v_j) − (r + 2πi·m_d(θ_j))|` over the blocks.
    pub residual: T,
    pub newton_steps: usize,
    /// Critical points in block order.
    pub critical_points: Vec<Complex<T>>,
    #[serde(skip)]
    pub witness: BranchWitness<T>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions<T> {
    /// Residual tolerance, relative to `min(r, 1)`.
    pub tol: T,
    pub max_newton: usize,
    /// Smallest `r` at which the branch is fixed without a witness.
    pub unambiguous_r: T,
    /// Relative distance below which critical points count as merged.
    pub collision_tol: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self { tol: lit(1e-12), max_newton: 60, unambiguous_r: lit(5.0), collision_tol: lit(1e-9) }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ContinuationOptions<T> {
    pub solver: SolverOptions<T>,
    /// Where continuation starts when `r_from` is below `unambiguous_r`.
    pub r_top: T,
    /// Maximum number of `ρ → √ρ` refinements per step.
    pub max_refinements: usize,
    /// Accept a corrected point only within this fraction of the predicted move.
    pub jump_ratio: T,
    /// Largest predicted move per step relative to `1 + |x|`.
    pub max_move: T,
}

impl<T: Real> Default for ContinuationOptions<T> {
    fn default() -> Self {
        Self { solver: SolverOptions::default(), r_top: lit(10.0), max_refinements: 24, jump_ratio: lit(0.5), max_move: lit(0.25) }
    }
}

fn coeff_vec<T: Real>(x: &[Complex<T>]) -> Vec<[f64; 2]> {
    x.iter().map(|c| [c.re.to_f64_lossy(), c.im.to_f64_lossy()]).collect()
}

fn norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |m, c| m.max(c.norm()))
}

fn dist<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (p, q)| m.max((*p - *q).norm()))
}

/// Damped Newton on the Böttcher system. Returns `(x, residual, steps)`.
fn newton<T: Real>(
    sys: &System<T>,
    x0: &[Complex<T>],
    r: T,
    targets: &[T],
    opts: &SolverOptions<T>,
) -> Result<(Vec<Complex<T>>, T, usize), ShiftError> {
    let n = sys.unknowns();
    let fail = |x: &[Complex<T>], res: T| ShiftError::NewtonDivergence {
        r: r.to_f64_lossy(),
        residual: res.to_f64_lossy(),
        last: coeff_vec(sys.poly(x).coeffs()),
    };
    let mut x = sys.symmetrize(x0.to_vec());
    let Some(mut cur) = sys.eval_bottcher(&x, r, targets, Some(0)) else {
        return Err(fail(&x, T::infinity()));
    };
    let tol_r = opts.tol * r.min(T::one());
    let tmax = targets.iter().fold(T::zero(), |m, t| m.max(t.abs()));
    let mut floor;
    let mut polished = false;
    for step in 0..opts.max_newton {
        let res = norm(&cur.residual);
        let mut jac = vec![Complex::new(T::zero(), T::zero()); n * n];
        for i in 0..n {
            let col = if i == 0 {
                cur.column.clone()
            } else {
                match sys.eval_bottcher(&x, r, targets, Some(i)) {
                    Some(e) => e.column,
                    None => return Err(fail(&x, res)),
                }
            };
            for k in 0..n {
                jac[k * n + i] = col[k];
            }
        }
        // Rounding floor: the orbit of v_j loses digits near the Julia set,
        // which shows up as a large Jacobian.
        let jnorm = norm(&jac);
        floor = lit::<T>(32.0) * T::epsilon() * (r + tmax + jnorm * (T::one() + norm(&x)));
        if res <= tol_r.max(floor) {
            if polished {
                return Ok((x, res, step));
            }
            polished = true;
        }
        let rhs: Vec<_> = cur.residual.iter().map(|v| -*v).collect();
        let Some(delta) = linalg::solve(&jac, &rhs) else {
            return Err(fail(&x, res));
        };
        let mut lambda = T::one();
        let mut accepted = None;
        for _ in 0..30 {
            let trial = sys.symmetrize(x.iter().zip(&delta).map(|(a, b)| *a + *b * lambda).collect());
            if let Some(e) = sys.eval_bottcher(&trial, r, targets, Some(0)) {
                let tres = norm(&e.residual);
                if tres < res || (polished && tres <= res * lit(2.0)) || tres <= floor {
                    accepted = Some((trial, e));
                    break;
                }
            }
            lambda = lambda * lit(0.5);
        }
        let Some((xn, e)) = accepted else {
            if polished {
                return Ok((x, res, step));
            }
            return Err(fail(&x, res));
        };
        let small = dist(&xn, &x) <= lit::<T>(8.0) * T::epsilon() * (T::one() + norm(&x));
        x = xn;
        cur = e;
        if polished || small {
            let res = norm(&cur.residual);
            if res <= tol_r.max(floor) * lit(4.0) {
                return Ok((x, res, step + 1));
            }
        }
    }
    Err(fail(&x, norm(&cur.residual)))
}

fn make_point<T: Real>(sys: &System<T>, x: &[Complex<T>], r: T, targets: &[T], res: T, steps: usize) -> ParamRayPoint<T> {
    ParamRayPoint {
        r,
        poly: sys.poly(x),
        residual: res,
        newton_steps: steps,
        critical_points: sys.critical_points(x),
        witness: BranchWitness { lifted_args: targets.to_vec() },
    }
}

fn check_collision<T: Real>(sys: &System<T>, x: &[Complex<T>], r: T, opts: &SolverOptions<T>) -> Result<(), ShiftError> {
    match sys.collision(x) {
        Some(dmin) if dmin < opts.collision_tol => {
            Err(ShiftError::MultiplicityCollision { r: r.to_f64_lossy(), distance: dmin.to_f64_lossy() })
        }
        _ => Ok(()),
    }
}

/// Seed from the asymptotics `ψ ≈ id`: critical values at `e^{r+2πiφ_j}`,
/// critical points started along the block centroid directions at scale
/// `e^{r/d}` and polished by Newton on `f(c_j) = V_j`.
fn seed_x<T: Real>(sys: &System<T>, r: T, variant: usize) -> Option<Vec<Complex<T>>> {
    let d = from_usize::<T>(sys.degree as usize);
    let lam = (r / d).exp();
    let m = sys.unknowns();
    let values: Vec<Complex<T>> = sys.phis.iter().map(|&p| Complex::from_polar((r).exp(), T::TAU() * p)).collect();
    // Variants rotate and rescale the centroid picture.
    let twist = Complex::from_polar(
        T::one() + lit::<T>(0.15) * from_usize::<T>(variant % 3),
        lit::<T>(0.3) * from_usize::<T>(variant / 3) * if variant % 2 == 0 { T::one() } else { -T::one() },
    );
    let mut c: Vec<Complex<T>> = sys.centroids.iter().map(|&w| w * twist * lam).collect();
    let total = from_usize::<T>(sys.degree as usize - 1);
    let mean = c.iter().zip(&sys.mults).fold(Complex::new(T::zero(), T::zero()), |a, (v, &k)| a + *v * from_usize::<T>(k)) / total;
    for v in c.iter_mut() {
        *v = *v - mean;
    }
    let mut x: Vec<Complex<T>> = c[..m - 1].to_vec();
    x.push(Complex::new(T::zero(), T::zero()));
    let f0: Vec<Complex<T>> = sys.critical_values(&x);
    let a0 = f0.iter().zip(&values).fold(Complex::new(T::zero(), T::zero()), |a, (f, v)| a + (*v - *f)) / from_usize::<T>(m);
    x[m - 1] = a0;
    for _ in 0..200 {
        let cur = sys.eval_algebraic(&x, &values, Some(0));
        let res = norm(&cur.residual);
        if res < lit::<T>(64.0) * T::epsilon() {
            break;
        }
        let mut jac = vec![Complex::new(T::zero(), T::zero()); m * m];
        for i in 0..m {
            let col = if i == 0 { cur.column.clone() } else { sys.eval_algebraic(&x, &values, Some(i)).column };
            for k in 0..m {
                jac[k * m + i] = col[k];
            }
        }
        let rhs: Vec<_> = cur.residual.iter().map(|v| -*v).collect();
        let delta = linalg::solve(&jac, &rhs)?;
        let mut lambda = T::one();
        let mut moved = false;
        for _ in 0..40 {
            let trial: Vec<_> = x.iter().zip(&delta).map(|(a, b)| *a + *b * lambda).collect();
            if norm(&sys.eval_algebraic(&trial, &values, None).residual) < res {
                x = trial;
                moved = true;
                break;
            }
            lambda = lambda * lit(0.5);
        }
        if !moved {
            break;
        }
    }
    let x = sys.symmetrize(x);
    let ok = norm(&sys.eval_algebraic(&x, &values, None).residual) < lit(1e-6);
    ok.then_some(x)
}

/// Solves at `r ≥ unambiguous_r` from the centroid seeds, keeping the first
/// solution whose recovered portrait is `Θ`.
fn start<T: Real>(
    sys: &System<T>,
    portrait: &CriticalPortrait,
    r: T,
    opts: &SolverOptions<T>,
) -> Result<(Vec<Complex<T>>, Vec<T>, T, usize), ShiftError> {
    if r < opts.unambiguous_r {
        return Err(ShiftError::BranchAmbiguity { r: r.to_f64_lossy(), threshold: opts.unambiguous_r.to_f64_lossy() });
    }
    let mut last_err = None;
    let variants = if sys.unknowns() == 1 { 1 } else { 12 };
    for variant in 0..variants {
        let Some(x0) = seed_x(sys, r, variant) else { continue };
        let targets = sys.targets_from_args(&x0);
        match newton(sys, &x0, r, &targets, opts) {
            Ok((x, res, steps)) => {
                if sys.unknowns() == 1 {
                    return Ok((x, targets, res, steps));
                }
                let poly = sys.poly(&x);
                match portrait_of(&poly, Some(r)) {
                    Ok(p) if &p == portrait => return Ok((x, targets, res, steps)),
                    Ok(p) => last_err = Some(ShiftError::GuessMismatch(format!("seed {variant} realizes {p}"))),
                    Err(e) => last_err = Some(e),
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| ShiftError::NewtonDivergence { r: r.to_f64_lossy(), residual: f64::INFINITY, last: vec![] }))
}

/// Asymptotic seed `f_r(Θ)` for large `r`.
pub fn initial_guess<T: Real>(portrait: &CriticalPortrait, r_large: T) -> Result<MonicPolynomial<T>, ShiftError> {
    let sys = System::<T>::new(portrait)?;
    let opts = SolverOptions::<T>::default();
    if r_large < opts.unambiguous_r {
        return Err(ShiftError::InvalidArgument(format!(
            "r_large = {} is below the threshold {}",
            r_large,
            opts.unambiguous_r
        )));
    }
    let x = seed_x(&sys, r_large, 0).ok_or_else(|| ShiftError::NewtonDivergence {
        r: r_large.to_f64_lossy(),
        residual: f64::INFINITY,
        last: vec![],
    })?;
    Ok(sys.poly(&x))
}

/// Maps a guess polynomial onto the unknowns by matching its critical
/// points to blocks with equal multiplicity, choosing the assignment whose
/// critical value arguments best match the block images.
fn x_from_guess<T: Real>(sys: &System<T>, guess: &MonicPolynomial<T>) -> Result<Vec<Complex<T>>, ShiftError> {
    if guess.degree() != sys.degree {
        return Err(ShiftError::GuessMismatch(format!("degree {} vs {}", guess.degree(), sys.degree)));
    }
    let cps = guess.critical_points(lit(1e-6))?.points;
    let m = sys.unknowns();
    if cps.len() != m {
        return Err(ShiftError::GuessMismatch(format!("{} critical points, {} blocks", cps.len(), m)));
    }
    let mut best: Option<(T, Vec<usize>)> = None;
    let mut perm: Vec<usize> = (0..m).collect();
    permute(&mut perm, 0, &mut |p| {
        if p.iter().enumerate().any(|(j, &k)| cps[k].multiplicity != sys.mults[j]) {
            return;
        }
        let cost = p.iter().enumerate().fold(T::zero(), |acc, (j, &k)| {
            let v = guess.evaluate(cps[k].location);
            acc + crate::scalar::wrap_pi(v.arg() - T::TAU() * sys.phis[j]).abs()
        });
        if best.as_ref().map_or(true, |b| cost < b.0) {
            best = Some((cost, p.to_vec()));
        }
    });
    let (_, p) = best.ok_or_else(|| ShiftError::GuessMismatch("critical multiplicities differ from block sizes".into()))?;
    let mut x: Vec<Complex<T>> = (0..m - 1).map(|j| cps[p[j]].location).collect();
    x.push(guess.coeffs()[0]);
    Ok(x)
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

/// Solves for `f_r(Θ)` from `guess`. Without a witness the branch of each
/// `log ψ(v_j)` is read off `arg v_j`, which needs `r ≥ unambiguous_r`.
pub fn solve_f_r<T: Real>(
    portrait: &CriticalPortrait,
    r: T,
    guess: &MonicPolynomial<T>,
    witness: Option<&BranchWitness<T>>,
) -> Result<ParamRayPoint<T>, ShiftError> {
    solve_f_r_with(portrait, r, guess, witness, &SolverOptions::default())
}

pub fn solve_f_r_with<T: Real>(
    portrait: &CriticalPortrait,
    r: T,
    guess: &MonicPolynomial<T>,
    witness: Option<&BranchWitness<T>>,
    opts: &SolverOptions<T>,
) -> Result<ParamRayPoint<T>, ShiftError> {
    if !(r > T::zero()) || !r.is_finite() {
        return Err(ShiftError::InvalidArgument(format!("r must be positive, got {r}")));
    }
    let sys = System::<T>::new(portrait)?;
    let x0 = x_from_guess(&sys, guess)?;
    let targets = match witness {
        Some(w) if w.lifted_args.len() == sys.unknowns() => w.lifted_args.clone(),
        Some(w) => {
            return Err(ShiftError::InvalidArgument(format!(
                "witness has {} entries for {} blocks",
                w.lifted_args.len(),
                sys.unknowns()
            )))
        }
        None if r >= opts.unambiguous_r => sys.targets_from_args(&x0),
        None => {
            return Err(ShiftError::BranchAmbiguity { r: r.to_f64_lossy(), threshold: opts.unambiguous_r.to_f64_lossy() })
        }
    };
    let (x, res, steps) = newton(&sys, &x0, r, &targets, opts)?;
    check_collision(&sys, &x, r, opts)?;
    Ok(make_point(&sys, &x, r, &targets, res, steps))
}

/// `dx/dr` along the ray: differentiating `L(v_j(x)) = r + i·t_j` gives
/// `J·dx/dr = (1, …, 1)`.
fn ray_tangent<T: Real>(sys: &System<T>, x: &[Complex<T>], r: T, targets: &[T]) -> Option<Vec<Complex<T>>> {
    let n = sys.unknowns();
    let mut jac = vec![Complex::new(T::zero(), T::zero()); n * n];
    for i in 0..n {
        let col = sys.eval_bottcher(x, r, targets, Some(i))?.column;
        for k in 0..n {
            jac[k * n + i] = col[k];
        }
    }
    linalg::solve(&jac, &vec![Complex::new(T::one(), T::zero()); n])
}

/// Tracks one parameter ray: current solution, its tangent for the
/// predictor, and the fixed lifted targets.
pub(crate) struct Tracker<T> {
    sys: System<T>,
    opts: ContinuationOptions<T>,
    targets: Vec<T>,
    x: Vec<Complex<T>>,
    r: T,
    tangent: Vec<Complex<T>>,
    last_res: T,
    last_steps: usize,
}

impl<T: Real> Tracker<T> {
    /// Solves at `r_start`, or at `r_top` and continues down if `r_start`
    /// is below the unambiguous level.
    pub fn new(portrait: &CriticalPortrait, r_start: T, opts: ContinuationOptions<T>) -> Result<Self, ShiftError> {
        let sys = System::<T>::new(portrait)?;
        let r0 = if r_start >= opts.solver.unambiguous_r { r_start } else { opts.r_top.max(opts.solver.unambiguous_r) };
        let (x, targets, res, steps) = start(&sys, portrait, r0, &opts.solver)?;
        let tangent = ray_tangent(&sys, &x, r0, &targets)
            .ok_or(ShiftError::ContinuationStall { last_good_r: r0.to_f64_lossy(), target_r: r_start.to_f64_lossy() })?;
        let mut tr = Self { sys, opts, targets, x, r: r0, tangent, last_res: res, last_steps: steps };
        let rho = lit::<T>(0.85);
        while tr.r > r_start {
            let next = (tr.r * rho).max(r_start);
            tr.advance(next)?;
        }
        Ok(tr)
    }

    pub fn point(&self) -> ParamRayPoint<T> {
        make_point(&self.sys, &self.x, self.r, &self.targets, self.last_res, self.last_steps)
    }

    pub fn r(&self) -> T {
        self.r
    }

    /// Euler predictor, Newton corrector, and a jump guard: the corrected
    /// point must lie within `jump_ratio` of the predicted move.
    fn try_step(&self, r_new: T) -> Option<(Vec<Complex<T>>, Vec<Complex<T>>, T, usize)> {
        let dr = r_new - self.r;
        let pred: Vec<Complex<T>> = self.x.iter().zip(&self.tangent).map(|(a, v)| *a + *v * dr).collect();
        // Long predicted moves are refused outright: at large r the ray is
        // exponential in r and Newton could settle on a neighbouring ray.
        if dist(&pred, &self.x) > self.opts.max_move * (T::one() + norm(&self.x)) {
            return None;
        }
        let (x, res, steps) = newton(&self.sys, &pred, r_new, &self.targets, &self.opts.solver).ok()?;
        let moved = dist(&pred, &self.x);
        let miss = dist(&x, &pred);
        let slack = lit::<T>(1e-12) * (T::one() + norm(&self.x));
        if miss > self.opts.jump_ratio * moved + slack {
            return None;
        }
        if let Some(dmin) = self.sys.collision(&x) {
            if dmin < self.opts.solver.collision_tol {
                return None;
            }
        }
        let tangent = ray_tangent(&self.sys, &x, r_new, &self.targets)?;
        Some((x, tangent, res, steps))
    }

    /// Moves the solution to `r_target < r`, halving the step in `log r`
    /// (`ρ → √ρ`) on failure.
    pub fn advance(&mut self, r_target: T) -> Result<(), ShiftError> {
        // Per-step ratio; square-rooted on failure, squared back on success.
        let mut q = r_target / self.r;
        let mut depth = 0usize;
        while self.r > r_target {
            let goal = (self.r * q).max(r_target);
            match self.try_step(goal) {
                Some((x, tangent, res, steps)) => {
                    self.x = x;
                    self.tangent = tangent;
                    self.r = goal;
                    self.last_res = res;
                    self.last_steps = steps;
                    if depth > 0 {
                        depth -= 1;
                        q = q * q;
                    }
                }
                None => {
                    depth += 1;
                    if depth > self.opts.max_refinements {
                        if let Some(dmin) = self.sys.collision(&self.x) {
                            if dmin < lit::<T>(1e3) * self.opts.solver.collision_tol {
                                return Err(ShiftError::MultiplicityCollision {
                                    r: self.r.to_f64_lossy(),
                                    distance: dmin.to_f64_lossy(),
                                });
                            }
                        }
                        return Err(ShiftError::ContinuationStall {
                            last_good_r: self.r.to_f64_lossy(),
                            target_r: r_target.to_f64_lossy(),
                        });
                    }
                    q = (goal / self.r).sqrt();
                }
            }
        }
        Ok(())
    }
}

/// Continues the parameter ray along `r_k = r_from·ρ^k` down to `r_to`.
pub fn continue_param_ray<T: Real>(
    portrait: &CriticalPortrait,
    r_from: T,
    r_to: T,
    rho: T,
) -> Result<Vec<ParamRayPoint<T>>, ShiftError> {
    continue_param_ray_with(portrait, r_from, r_to, rho, &ContinuationOptions::default(), |_| {})
}

/// As [`continue_param_ray`], reporting each point as it is accepted so a
/// caller can keep the partial path when the continuation stalls.
pub fn continue_param_ray_with<T: Real>(
    portrait: &CriticalPortrait,
    r_from: T,
    r_to: T,
    rho: T,
    opts: &ContinuationOptions<T>,
    mut on_point: impl FnMut(&ParamRayPoint<T>),
) -> Result<Vec<ParamRayPoint<T>>, ShiftError> {
    if !(r_from > r_to && r_to > T::zero()) {
        return Err(ShiftError::InvalidArgument(format!("need r_from > r_to > 0, got {r_from}, {r_to}")));
    }
    if !(rho > T::zero() && rho < T::one()) {
        return Err(ShiftError::InvalidArgument(format!("rho must lie in (0, 1), got {rho}")));
    }
    let mut tr = Tracker::new(portrait, r_from, *opts)?;
    let mut out = vec![tr.point()];
    on_point(&out[0]);
    let mut k = 1i32;
    while tr.r() > r_to {
        let next = (r_from * rho.powi(k)).max(r_to);
        tr.advance(next)?;
        let p = tr.point();
        on_point(&p);
        out.push(p);
        k += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
