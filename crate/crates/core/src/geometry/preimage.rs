//! Components of `f^{-k}(B)` by lifting the boundary of `B`.
//!
//! A level-`k` boundary curve is a closed polyline whose vertices satisfy
//! `f^k(z) = γ(t)` for the boundary parametrization `γ` of `B`, with `t`
//! running over `[0, m)` for a component of degree `m`. Lifting a parent
//! curve through `f` starting from each of the `d` roots of `f(z) = u_0`
//! ends at another such root; the cycles of that permutation are the
//! children, and a cycle of length `ℓ` has degree `ℓ` times the parent's.
//! Vertices are computed by Newton on `f^k` directly, so no error is
//! inherited from the parent polyline.

use num_complex::Complex;
use serde::Serialize;

use super::{diameter_of, GeometryError, Region};
use crate::poly::{aberth, MonicPolynomial};
use crate::scalar::{from_usize, lit, Real};

#[derive(Debug, Clone, Copy)]
pub struct PreimageOptions<T> {
    /// Boundary samples for a round disk.
    pub circle_samples: usize,
    /// Samples per polygon edge.
    pub per_edge: usize,
    /// A closed lift must end within `match_tol·(1 + |z|)` of a start root.
    pub match_tol: T,
    /// Critical values of `f^k` closer than this to the boundary are refused.
    pub collision_tol: T,
    /// Parameter bisections allowed per step.
    pub max_bisect: usize,
    /// Retries with doubled sampling when lifts fail to close up cleanly.
    pub max_doublings: usize,
}

impl<T: Real> Default for PreimageOptions<T> {
    fn default() -> Self {
        Self {
            circle_samples: 256,
            per_edge: 16,
            match_tol: lit(1e-9),
            collision_tol: lit(1e-8),
            max_bisect: 40,
            max_doublings: 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct PreimageComponent<T> {
    /// Degree of `f^k` on the component.
    pub degree: usize,
    /// Index of the level `k−1` component this maps onto (`None` at level 1).
    pub parent: Option<usize>,
    pub diameter: T,
    pub boundary: Vec<Complex<T>>,
    /// Boundary parameter of each vertex, in `[0, degree)`.
    #[serde(skip)]
    pub params: Vec<T>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound(serialize = "T: Real"))]
pub struct PreimageLevel<T> {
    pub level: usize,
    pub components: Vec<PreimageComponent<T>>,
}

impl<T: Real> PreimageLevel<T> {
    pub fn degree_sum(&self) -> usize {
        self.components.iter().map(|c| c.degree).sum()
    }
}

/// `f^k(z)`, its derivative and the rounding scale `Σ_j |w_j| / |(f^j)'(z)|`
/// of the orbit pulled back to `z`.
fn iterate<T: Real>(f: &MonicPolynomial<T>, k: usize, z: Complex<T>) -> (Complex<T>, Complex<T>, T) {
    let mut w = z;
    let mut dw = Complex::new(T::one(), T::zero());
    let mut err = T::zero();
    for _ in 0..k {
        let (v, dv) = f.eval_with_derivative(w);
        dw = dw * dv;
        w = v;
        err = err + (T::one() + w.norm()) / dw.norm();
    }
    (w, dw, err)
}

struct Lifter<'a, T> {
    f: &'a MonicPolynomial<T>,
    region: &'a Region<T>,
    level: usize,
    max_bisect: usize,
}

impl<T: Real> Lifter<'_, T> {
    /// Newton on `f^k(z) = γ(t_b)` from `z_a`, refusing steps where the
    /// corrector strays from the predictor or the derivative changes a lot.
    fn step(&self, z_a: Complex<T>, t_b: T) -> Option<Complex<T>> {
        let w_b = self.region.point_at(t_b);
        let (w_a, d_a, _) = iterate(self.f, self.level, z_a);
        if d_a.norm() == T::zero() {
            return None;
        }
        let pred = z_a - (w_a - w_b) / d_a;
        let moved = (pred - z_a).norm();
        let eps = T::epsilon();
        let mut z = pred;
        for _ in 0..12 {
            let (w, d, err) = iterate(self.f, self.level, z);
            if d.norm() == T::zero() {
                return None;
            }
            let dz = (w - w_b) / d;
            z = z - dz;
            let floor = lit::<T>(16.0) * eps * (T::one() + z.norm() + err);
            if dz.norm() <= floor {
                let (_, d_b, _) = iterate(self.f, self.level, z);
                let drift = (z - pred).norm();
                let ok = drift <= lit::<T>(0.25) * moved + lit::<T>(4.0) * floor && (d_b / d_a - T::one()).norm() <= lit(0.5);
                return ok.then_some(z);
            }
        }
        None
    }

    /// Continues the lift through the parameters `ts` (ending at `t_end`),
    /// bisecting where a step is refused.
    fn lift(&self, z0: Complex<T>, ts: &[T], t_end: T) -> Result<(Vec<T>, Vec<Complex<T>>), GeometryError> {
        let mut out_t = vec![ts[0]];
        let mut out_z = vec![z0];
        let (mut t, mut z) = (ts[0], z0);
        for &target in ts[1..].iter().chain(std::iter::once(&t_end)) {
            let mut stack = vec![target];
            while let Some(&tb) = stack.last() {
                match self.step(z, tb) {
                    Some(zb) => {
                        t = tb;
                        z = zb;
                        stack.pop();
                        if !stack.is_empty() || tb != t_end {
                            out_t.push(t);
                            out_z.push(z);
                        }
                    }
                    None => {
                        if stack.len() > self.max_bisect {
                            return Err(GeometryError::LiftFailure {
                                level: self.level,
                                reason: format!("step refused near parameter {t} at {z}"),
                            });
                        }
                        stack.push((t + tb) * lit(0.5));
                    }
                }
            }
        }
        // Closing vertex, matched against the start roots by the caller.
        out_z.push(z);
        Ok((out_t, out_z))
    }
}

/// Boundary curve of a component: parameters in `[0, degree)` and vertices.
struct Curve<T> {
    ts: Vec<T>,
    zs: Vec<Complex<T>>,
    degree: usize,
}

fn critical_value_check<T: Real>(
    f: &MonicPolynomial<T>,
    region: &Region<T>,
    depth: usize,
    tol: T,
) -> Result<(), GeometryError> {
    let crit = f.critical_points(lit(1e-9))?;
    let scale = T::one() + region.diameter();
    for cp in &crit.points {
        let mut v = cp.location;
        for level in 1..=depth {
            v = f.evaluate(v);
            let dist = region.boundary_distance(v);
            if dist <= tol * scale {
                return Err(GeometryError::BranchCollision {
                    level,
                    value: [v.re.to_f64_lossy(), v.im.to_f64_lossy()],
                    distance: dist.to_f64_lossy(),
                });
            }
        }
    }
    Ok(())
}

fn children<T: Real>(
    f: &MonicPolynomial<T>,
    region: &Region<T>,
    level: usize,
    parent: &Curve<T>,
    opts: &PreimageOptions<T>,
) -> Result<Vec<Curve<T>>, GeometryError> {
    let d = f.degree() as usize;
    let u0 = parent.zs[0];
    let mut shifted = f.full_coeffs();
    shifted[0] = shifted[0] - u0;
    let mut roots = aberth(&shifted, level as u64)?;
    for r in roots.iter_mut() {
        for _ in 0..4 {
            let (v, dv) = f.eval_with_derivative(*r);
            if dv.norm() == T::zero() {
                break;
            }
            *r = *r - (v - u0) / dv;
        }
    }
    let mut sep = T::infinity();
    for i in 0..d {
        for j in i + 1..d {
            sep = sep.min((roots[i] - roots[j]).norm());
        }
    }
    if sep <= opts.collision_tol * (T::one() + roots.iter().fold(T::zero(), |m, r| m.max(r.norm()))) {
        return Err(GeometryError::BranchCollision {
            level,
            value: [u0.re.to_f64_lossy(), u0.im.to_f64_lossy()],
            distance: sep.to_f64_lossy(),
        });
    }
    let lifter = Lifter { f, region, level, max_bisect: opts.max_bisect };
    let t_end = from_usize::<T>(parent.degree);
    let mut ts = parent.ts.clone();
    let mut last_reason = String::new();
    for _ in 0..=opts.max_doublings {
        let mut lifts = Vec::with_capacity(d);
        let mut next = Vec::with_capacity(d);
        let mut ok = true;
        for &r in &roots {
            let (lt, mut lz) = lifter.lift(r, &ts, t_end)?;
            let end = lz.pop().expect("lift has a closing vertex");
            let near: Vec<usize> =
                (0..d).filter(|&j| (roots[j] - end).norm() <= opts.match_tol * (T::one() + end.norm())).collect();
            if near.len() != 1 {
                ok = false;
                last_reason = format!("lift from {r} ends at {end}, matching {} start roots", near.len());
                break;
            }
            next.push(near[0]);
            lifts.push((lt, lz));
        }
        let mut seen = vec![false; d];
        for &j in &next {
            if std::mem::replace(&mut seen[j], true) {
                ok = false;
                last_reason = "two lifts close up at the same root".into();
            }
        }
        if ok {
            let mut done = vec![false; d];
            let mut out = Vec::new();
            for s in 0..d {
                if done[s] {
                    continue;
                }
                let mut curve = Curve { ts: Vec::new(), zs: Vec::new(), degree: 0 };
                let mut j = s;
                while !done[j] {
                    done[j] = true;
                    let offset = from_usize::<T>(curve.degree);
                    curve.ts.extend(lifts[j].0.iter().map(|&t| t + offset));
                    curve.zs.extend_from_slice(&lifts[j].1);
                    curve.degree += parent.degree;
                    j = next[j];
                }
                out.push(curve);
            }
            return Ok(out);
        }
        // Resolution doubling.
        let mut finer = Vec::with_capacity(2 * ts.len());
        for (i, &t) in ts.iter().enumerate() {
            finer.push(t);
            let nxt = ts.get(i + 1).copied().unwrap_or(t_end);
            finer.push((t + nxt) * lit(0.5));
        }
        ts = finer;
    }
    Err(GeometryError::LiftFailure { level, reason: last_reason })
}

pub fn preimage_components<T: Real>(
    f: &MonicPolynomial<T>,
    disk: &Region<T>,
    depth: usize,
) -> Result<Vec<PreimageLevel<T>>, GeometryError> {
    preimage_components_with(f, disk, depth, &PreimageOptions::default())
}

/// Boundaries of every component of `f^{-k}(disk)` for `k = 1..=depth`.
pub fn preimage_components_with<T: Real>(
    f: &MonicPolynomial<T>,
    disk: &Region<T>,
    depth: usize,
    opts: &PreimageOptions<T>,
) -> Result<Vec<PreimageLevel<T>>, GeometryError> {
    critical_value_check(f, disk, depth, opts.collision_tol)?;
    let ts = disk.parameter_grid(opts.circle_samples, opts.per_edge);
    let zs = ts.iter().map(|&t| disk.point_at(t)).collect();
    let mut parents = vec![Curve { ts, zs, degree: 1 }];
    let mut levels = Vec::with_capacity(depth);
    for level in 1..=depth {
        let mut curves = Vec::new();
        let mut comps = Vec::new();
        for (pi, p) in parents.iter().enumerate() {
            for c in children(f, disk, level, p, opts)? {
                comps.push(PreimageComponent {
                    degree: c.degree,
                    parent: (level > 1).then_some(pi),
                    diameter: diameter_of(&c.zs),
                    boundary: c.zs.clone(),
                    params: c.ts.clone(),
                });
                curves.push(c);
            }
        }
        levels.push(PreimageLevel { level, components: comps });
        parents = curves;
    }
    Ok(levels)
}

#[derive(Debug, Clone, Copy)]
pub struct BackwardStabilityOptions<T> {
    /// Levels excluded from the monotonicity test.
    pub burn_in: usize,
    /// Bound `η` on the covering degree; `None` means `d`.
    pub degree_bound: Option<usize>,
    pub preimage: PreimageOptions<T>,
}

impl<T: Real> Default for BackwardStabilityOptions<T> {
    fn default() -> Self {
        Self { burn_in: 2, degree_bound: None, preimage: PreimageOptions::default() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelStats<T> {
    pub level: usize,
    pub components: usize,
    pub max_diameter: T,
    pub min_diameter: T,
    pub max_degree: usize,
    pub degree_sum: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BackwardStabilityReport<T> {
    pub levels: Vec<LevelStats<T>>,
    pub burn_in: usize,
    pub degree_bound: usize,
    /// Max diameter non-increasing from level `burn_in + 1` on.
    pub monotone_after_burn_in: bool,
    pub degrees_bounded: bool,
    /// Degrees at level `k` add up to `d^k`.
    pub degree_sums_exact: bool,
    /// Last max diameter over the first.
    pub shrink_factor: T,
    pub stable: bool,
}

pub fn backward_stability_probe<T: Real>(
    f: &MonicPolynomial<T>,
    disk: &Region<T>,
    n_max: usize,
) -> Result<BackwardStabilityReport<T>, GeometryError> {
    backward_stability_probe_with(f, disk, n_max, &BackwardStabilityOptions::default())
}

/// Per-level component statistics of `f^{-k}(disk)`, `k ≤ n_max`.
pub fn backward_stability_probe_with<T: Real>(
    f: &MonicPolynomial<T>,
    disk: &Region<T>,
    n_max: usize,
    opts: &BackwardStabilityOptions<T>,
) -> Result<BackwardStabilityReport<T>, GeometryError> {
    let levels = preimage_components_with(f, disk, n_max, &opts.preimage)?;
    let d = f.degree() as usize;
    let bound = opts.degree_bound.unwrap_or(d);
    let stats: Vec<LevelStats<T>> = levels
        .iter()
        .map(|l| LevelStats {
            level: l.level,
            components: l.components.len(),
            max_diameter: l.components.iter().fold(T::zero(), |m, c| m.max(c.diameter)),
            min_diameter: l.components.iter().fold(T::infinity(), |m, c| m.min(c.diameter)),
            max_degree: l.components.iter().map(|c| c.degree).max().unwrap_or(0),
            degree_sum: l.degree_sum(),
        })
        .collect();
    let after: Vec<T> = stats.iter().filter(|s| s.level > opts.burn_in).map(|s| s.max_diameter).collect();
    let monotone = after.windows(2).all(|w| w[1] <= w[0]);
    let degrees_bounded = stats.iter().all(|s| s.max_degree <= bound);
    let degree_sums_exact = stats.iter().all(|s| Some(s.degree_sum) == d.checked_pow(s.level as u32));
    let shrink_factor = match (stats.first(), stats.last()) {
        (Some(a), Some(b)) if a.max_diameter > T::zero() => b.max_diameter / a.max_diameter,
        _ => T::one(),
    };
    Ok(BackwardStabilityReport {
        stable: monotone && degrees_bounded && degree_sums_exact,
        levels: stats,
        burn_in: opts.burn_in,
        degree_bound: bound,
        monotone_after_burn_in: monotone,
        degrees_bounded,
        degree_sums_exact,
        shrink_factor,
    })
}
