//! Green's function, its gradient and the Böttcher coordinate.

pub(crate) mod lift;

use num_complex::Complex;
use serde::Serialize;
use thiserror::Error;

use crate::dual::Dual;
use crate::poly::{MonicPolynomial, PolyError};
use crate::portrait::Angle;
use crate::rays::{self, RayAngle, StepControl};
use crate::scalar::{from_usize, lit, Real};
pub(crate) use lift::Lifted;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("point ({re}, {im}) does not escape within {iterations} iterations")]
    NonEscaping { re: f64, im: f64, iterations: usize },
    #[error("potential {green} is not above the critical level {level}; a branch witness is required")]
    BranchAmbiguity { green: f64, level: f64 },
    #[error("level {level} is not above the largest critical value rate {max_rate}")]
    LevelBelowCritical { level: f64, max_rate: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("gradient ascent toward infinity stalled at potential {0}")]
    AscentStalled(f64),
    #[error("equipotential sample {index} failed: {reason}")]
    Equipotential { index: usize, reason: String },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialOptions<T> {
    /// Escape iterations before a point is declared non-escaping.
    pub max_iter: usize,
    /// Stopping radius cap for the Green iteration.
    pub big_radius: T,
}

impl<T: Real> Default for PotentialOptions<T> {
    fn default() -> Self {
        Self { max_iter: 2048, big_radius: T::big_radius() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialSample<T> {
    pub point: Complex<T>,
    pub green: T,
    pub iterations_used: usize,
    /// `∇G` written as `∂G/∂x + i ∂G/∂y`.
    pub gradient: Complex<T>,
    pub escaped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BottcherValue<T> {
    pub point: Complex<T>,
    pub value: Complex<T>,
    /// `log ψ` on the chosen branch; its imaginary part is continuous along
    /// witness-chained paths.
    pub log_value: Complex<T>,
    pub branch_witness: Option<Complex<T>>,
}

/// Green's function at `z`. Iteration stops once the second-order tail of
/// the series is below `tol` (or at the big radius), then the first-order
/// tail is added.
pub fn green<T: Real>(f: &MonicPolynomial<T>, z: Complex<T>, tol: T) -> PotentialSample<T> {
    green_with(f, z, tol, &PotentialOptions::default())
}

pub fn green_with<T: Real>(
    f: &MonicPolynomial<T>,
    z: Complex<T>,
    tol: T,
    opts: &PotentialOptions<T>,
) -> PotentialSample<T> {
    let d: T = from_usize(f.degree() as usize);
    let r_esc = f.escape_radius();
    let r_cap = opts.big_radius.max(r_esc);
    let s_mag = f.coeffs().iter().fold(T::zero(), |acc, c| acc + c.norm());
    let tol = tol.max(T::min_positive_value());
    let mut w = z;
    let mut p = Complex::new(T::one(), T::zero());
    let mut inv_dn = T::one();
    for n in 0..=opts.max_iter {
        let r = w.norm();
        if r >= r_cap || (r >= r_esc && (s_mag / (r * r)).powi(2) <= tol) {
            let u = Dual::variable(w.inv());
            let mut q = Dual::zero();
            for &c in f.coeffs() {
                q = q * u + Dual::constant(c);
            }
            let rat = Dual::one() + q * u * u;
            let green = (r.ln() + rat.value.norm().ln() / d) * inv_dn;
            let drat_dw = -rat.tangent * u.value * u.value;
            let dl = p * (w.inv() + drat_dw / (rat.value * d));
            return PotentialSample { point: z, green, iterations_used: n, gradient: dl.conj(), escaped: true };
        }
        if n == opts.max_iter || !r.is_finite() {
            break;
        }
        let (fw, dfw) = f.eval_with_derivative(w);
        p = p * dfw / d;
        inv_dn = inv_dn / d;
        w = fw;
    }
    PotentialSample {
        point: z,
        green: T::zero(),
        iterations_used: opts.max_iter,
        gradient: Complex::new(T::zero(), T::zero()),
        escaped: false,
    }
}

/// `∇G(z)` from the chain rule along the escaping orbit.
pub fn green_gradient<T: Real>(f: &MonicPolynomial<T>, z: Complex<T>) -> Result<Complex<T>, PotentialError> {
    let s = green(f, z, lit(1e-30));
    if !s.escaped {
        return Err(non_escaping(z, s.iterations_used));
    }
    Ok(s.gradient)
}

fn non_escaping<T: Real>(z: Complex<T>, iterations: usize) -> PotentialError {
    PotentialError::NonEscaping { re: z.re.to_f64_lossy(), im: z.im.to_f64_lossy(), iterations }
}

/// Critical point data together with escape rates; computed once per polynomial.
#[derive(Debug, Clone)]
pub struct PotentialField<T> {
    f: MonicPolynomial<T>,
    opts: PotentialOptions<T>,
    r_far: T,
    critical: Vec<(Complex<T>, usize, T)>,
}

impl<T: Real> PotentialField<T> {
    pub fn new(f: &MonicPolynomial<T>) -> Result<Self, PotentialError> {
        Self::with_options(f, PotentialOptions::default())
    }

    pub fn with_options(f: &MonicPolynomial<T>, opts: PotentialOptions<T>) -> Result<Self, PotentialError> {
        let tol = lit::<T>(1e-8).max(T::epsilon().sqrt());
        let critical = f
            .critical_points(tol)?
            .points
            .into_iter()
            .map(|p| (p.location, p.multiplicity, green_with(f, p.location, lit(1e-30), &opts).green))
            .collect();
        Ok(Self { f: f.clone(), opts, r_far: f.escape_radius(), critical })
    }

    pub fn poly(&self) -> &MonicPolynomial<T> {
        &self.f
    }

    pub fn options(&self) -> &PotentialOptions<T> {
        &self.opts
    }

    /// `(location, multiplicity, G(location))` for each critical point.
    pub fn critical_points(&self) -> &[(Complex<T>, usize, T)] {
        &self.critical
    }

    pub fn max_point_rate(&self) -> T {
        self.critical.iter().fold(T::zero(), |m, c| m.max(c.2))
    }

    pub fn max_value_rate(&self) -> T {
        self.max_point_rate() * from_usize(self.f.degree() as usize)
    }

    pub fn is_connected(&self) -> bool {
        self.max_point_rate() == T::zero()
    }

    pub fn far_radius(&self) -> T {
        self.r_far
    }

    pub(crate) fn lift(&self, z: Complex<T>) -> Option<Lifted<T>> {
        lift::lift_z(self.f.degree(), self.f.coeffs(), z, self.r_far, self.opts.max_iter)
    }

    pub fn green(&self, z: Complex<T>) -> PotentialSample<T> {
        green_with(&self.f, z, lit(1e-30), &self.opts)
    }

    /// `log ψ(z)`. With a witness (a nearby value of `log ψ`), the residue
    /// whose imaginary part is nearest the witness is taken. Without one the
    /// branch is found by continuity along the gradient line to infinity,
    /// which needs `G(z)` above every critical point.
    pub fn log_bottcher(&self, z: Complex<T>, witness: Option<Complex<T>>) -> Result<Complex<T>, PotentialError> {
        let l = self.lift(z).ok_or_else(|| non_escaping(z, self.opts.max_iter))?;
        if let Some(w) = witness {
            return Ok(choose_branch(&l, w.im));
        }
        if l.n == 0 {
            return Ok(l.lambda);
        }
        let level = self.max_point_rate();
        let g = l.green();
        if g <= level * (T::one() + lit(1e-9)) {
            return Err(PotentialError::BranchAmbiguity { green: g.to_f64_lossy(), level: level.to_f64_lossy() });
        }
        self.ascend_and_descend(z, l, level)
    }

    fn ascend_and_descend(&self, z: Complex<T>, l0: Lifted<T>, level: T) -> Result<Complex<T>, PotentialError> {
        let mut path = vec![l0];
        let mut p = z;
        let dz = |q: Complex<T>| -> Option<Complex<T>> { self.lift(q).map(|l| l.tangent.inv()) };
        while path.last().map(|l| l.n).unwrap_or(0) > 0 {
            let g = path.last().unwrap().green();
            if path.len() > 10_000 {
                return Err(PotentialError::AscentStalled(g.to_f64_lossy()));
            }
            let h = lit::<T>(0.25) * (g - level);
            let half = lit::<T>(0.5) * h;
            let stalled = || PotentialError::AscentStalled(g.to_f64_lossy());
            let k1 = dz(p).ok_or_else(stalled)?;
            let k2 = dz(p + k1 * half).ok_or_else(stalled)?;
            let k3 = dz(p + k2 * half).ok_or_else(stalled)?;
            let k4 = dz(p + k3 * h).ok_or_else(stalled)?;
            p = p + (k1 + k2 * lit::<T>(2.0) + k3 * lit::<T>(2.0) + k4) * (h / lit::<T>(6.0));
            path.push(self.lift(p).ok_or_else(stalled)?);
        }
        let mut log = path.last().unwrap().lambda;
        for l in path.iter().rev().skip(1) {
            log = choose_branch(l, log.im);
        }
        Ok(log)
    }

    pub fn bottcher(&self, z: Complex<T>, witness: Option<Complex<T>>) -> Result<BottcherValue<T>, PotentialError> {
        let wlog = witness.map(|w| {
            if w.norm() > T::zero() {
                w.ln()
            } else {
                Complex::new(T::zero(), T::zero())
            }
        });
        let log_value = self.log_bottcher(z, wlog)?;
        Ok(BottcherValue { point: z, value: log_value.exp(), log_value, branch_witness: witness })
    }
}

/// Picks `log ψ = (Λ + 2πik)/d^n` with imaginary part nearest `target_im`.
pub(crate) fn choose_branch<T: Real>(l: &Lifted<T>, target_im: T) -> Complex<T> {
    let spacing = T::TAU() * l.inv_dn;
    let base = l.lambda.im * l.inv_dn;
    let k = ((target_im - base) / spacing).round();
    Complex::new(l.lambda.re * l.inv_dn, base + k * spacing)
}

/// Böttcher coordinate `ψ_f(z)`; see [`PotentialField::log_bottcher`].
pub fn bottcher<T: Real>(
    f: &MonicPolynomial<T>,
    z: Complex<T>,
    branch_witness: Option<Complex<T>>,
) -> Result<BottcherValue<T>, PotentialError> {
    PotentialField::new(f)?.bottcher(z, branch_witness)
}

/// `n_samples` points of `{G = r}` at Böttcher angles `k/n_samples`.
pub fn equipotential<T: Real>(f: &MonicPolynomial<T>, r: T, n_samples: usize) -> Result<Vec<Complex<T>>, PotentialError> {
    let field = PotentialField::new(f)?;
    equipotential_in(&field, r, n_samples)
}

pub fn equipotential_in<T: Real>(field: &PotentialField<T>, r: T, n_samples: usize) -> Result<Vec<Complex<T>>, PotentialError> {
    if n_samples < 8 {
        return Err(PotentialError::InvalidArgument(format!("need at least 8 samples, got {n_samples}")));
    }
    if !(r > T::zero()) {
        return Err(PotentialError::InvalidArgument("level must be positive".into()));
    }
    let max_rate = field.max_value_rate();
    if r <= max_rate {
        return Err(PotentialError::LevelBelowCritical { level: r.to_f64_lossy(), max_rate: max_rate.to_f64_lossy() });
    }
    let ctrl = StepControl::default();
    let mut out = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let angle = RayAngle::Exact(Angle::frac(k as u64, n_samples as u64));
        let mut z = rays::point_on_ray(field, &angle, r, &ctrl)
            .map_err(|e| PotentialError::Equipotential { index: k, reason: e.to_string() })?;
        for _ in 0..8 {
            let s = field.green(z);
            let err = s.green - r;
            if err.abs() <= lit::<T>(1e-14) * (T::one() + r) {
                break;
            }
            z = z - s.gradient * (err / s.gradient.norm_sqr());
        }
        out.push(z);
    }
    Ok(out)
}

/// Escape rate of each distinct critical value.
pub fn critical_value_rates<T: Real>(f: &MonicPolynomial<T>) -> Result<Vec<(Complex<T>, T)>, PotentialError> {
    let field = PotentialField::new(f)?;
    Ok(critical_value_rates_in(&field))
}

pub fn critical_value_rates_in<T: Real>(field: &PotentialField<T>) -> Vec<(Complex<T>, T)> {
    let f = field.poly();
    let mut out: Vec<(Complex<T>, T)> = Vec::new();
    for &(c, _, _) in field.critical_points() {
        let v = f.evaluate(c);
        let scale = T::one() + v.norm();
        if out.iter().any(|(u, _)| (*u - v).norm() <= lit::<T>(1e-10) * scale) {
            continue;
        }
        out.push((v, field.green(v).green));
    }
    out
}
