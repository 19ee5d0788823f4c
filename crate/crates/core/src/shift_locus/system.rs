//! The nonlinear system defining `f_r(Θ)`.
//!
//! Unknowns are `x = (c_1, …, c_{m−1}, a_0)`. The last critical point is
//! fixed by centering, `c_m = −Σ_{j<m} m_j c_j / m_m`, so the centering
//! equation never has to be solved. Coefficients come from integrating
//! `f′ = d·Π(z − c_j)^{m_j}`.

use num_complex::Complex;

use super::ShiftError;
use crate::dual::Dual;
use crate::poly::MonicPolynomial;
use crate::portrait::CriticalPortrait;
use crate::potential::choose_branch;
use crate::potential::lift::lift;
use crate::scalar::{from_usize, lit, Real};

#[derive(Debug, Clone)]
pub(crate) struct System<T> {
    pub degree: u32,
    /// `m_j = #Θ_j − 1`.
    pub mults: Vec<usize>,
    /// `m_d(θ_j)` as a real in `[0, 1)`.
    pub phis: Vec<T>,
    /// Mean of `e^{2πiθ}` over each block.
    pub centroids: Vec<Complex<T>>,
    /// For a conjugation-invariant portrait, the block index of each
    /// block's mirror image. Then `f_r(Θ)` has real coefficients.
    pub mirror: Option<Vec<usize>>,
    pub max_iter: usize,
}

/// One evaluation: residuals and the derivative column along a direction.
pub(crate) struct Eval<T> {
    pub residual: Vec<Complex<T>>,
    pub column: Vec<Complex<T>>,
}

impl<T: Real> System<T> {
    pub fn new(portrait: &CriticalPortrait) -> Result<Self, ShiftError> {
        let report = crate::portrait::validate_portrait(portrait);
        if !report.valid {
            return Err(ShiftError::InvalidPortrait(report.summary()));
        }
        let d = portrait.degree();
        let mut mults = Vec::new();
        let mut phis = Vec::new();
        let mut centroids = Vec::new();
        for (j, b) in portrait.blocks().iter().enumerate() {
            mults.push(b.multiplicity());
            phis.push(portrait.block_image(j).to_real::<T>());
            let sum = b
                .angles()
                .iter()
                .fold(Complex::new(T::zero(), T::zero()), |acc, a| acc + Complex::from_polar(T::one(), T::TAU() * a.to_real::<T>()));
            centroids.push(sum / from_usize::<T>(b.len()));
        }
        let blocks = portrait.blocks();
        let mirror = blocks
            .iter()
            .map(|b| {
                let m = crate::portrait::PortraitBlock::new(b.angles().iter().map(|a| a.negated()).collect()).ok()?;
                blocks.iter().position(|c| *c == m)
            })
            .collect::<Option<Vec<usize>>>();
        Ok(Self { degree: d, mults, phis, centroids, mirror, max_iter: 4096 })
    }

    pub fn unknowns(&self) -> usize {
        self.mults.len()
    }

    fn crit<N>(&self, x: &[N]) -> Vec<N>
    where
        N: Copy + std::ops::Add<Output = N> + std::ops::Neg<Output = N>,
        N: Scale<T>,
    {
        let m = self.mults.len();
        let mut c: Vec<N> = x[..m - 1].to_vec();
        let mut acc: Option<N> = None;
        for j in 0..m - 1 {
            let t = c[j].scale(from_usize(self.mults[j]));
            acc = Some(match acc {
                Some(a) => a + t,
                None => t,
            });
        }
        let last = match acc {
            Some(a) => -(a.scale(T::one() / from_usize::<T>(self.mults[m - 1]))),
            None => x[m - 1].scale(T::zero()),
        };
        c.push(last);
        c
    }

    /// Projects onto real polynomials when the portrait is symmetric, so
    /// real rays stay exactly real.
    pub fn symmetrize(&self, x: Vec<Complex<T>>) -> Vec<Complex<T>> {
        let Some(mirror) = &self.mirror else { return x };
        let c = self.critical_points(&x);
        let half = lit::<T>(0.5);
        let m = self.unknowns();
        let mut out: Vec<Complex<T>> = (0..m - 1).map(|j| (c[j] + c[mirror[j]].conj()) * half).collect();
        out.push(Complex::new(x[m - 1].re, T::zero()));
        out
    }

    /// Critical points for a plain unknown vector.
    pub fn critical_points(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        self.crit(x)
    }

    /// `a_0..a_{d−2}` as duals.
    fn coeffs_dual(&self, crit: &[Dual<T>], a0: Dual<T>) -> Vec<Dual<T>> {
        let d = self.degree as usize;
        // Π (z − c_j)^{m_j}, ascending.
        let mut p = vec![Dual::one()];
        for (c, &mj) in crit.iter().zip(&self.mults) {
            for _ in 0..mj {
                let mut q = vec![Dual::zero(); p.len() + 1];
                for (k, &pk) in p.iter().enumerate() {
                    q[k + 1] = q[k + 1] + pk;
                    q[k] = q[k] - *c * pk;
                }
                p = q;
            }
        }
        let mut a = Vec::with_capacity(d - 1);
        a.push(a0);
        for k in 0..d.saturating_sub(2) {
            a.push(p[k].scale(from_usize::<T>(d) / from_usize::<T>(k + 1)));
        }
        a
    }

    fn duals(&self, x: &[Complex<T>], dir: Option<usize>) -> Vec<Dual<T>> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| if Some(i) == dir { Dual::variable(v) } else { Dual::constant(v) })
            .collect()
    }

    pub fn poly(&self, x: &[Complex<T>]) -> MonicPolynomial<T> {
        let xd = self.duals(x, None);
        let crit = self.crit(&xd);
        let a = self.coeffs_dual(&crit, xd[xd.len() - 1]);
        MonicPolynomial::new(self.degree, a.iter().map(|c| c.value).collect()).expect("coefficient count matches degree")
    }

    fn eval_full(coeffs: &[Dual<T>], z: Dual<T>) -> Dual<T> {
        // z^d + 0·z^{d−1} + Σ a_k z^k, with the z^{d−1} term absent.
        let mut acc = z;
        for k in (0..coeffs.len()).rev() {
            acc = acc * z + coeffs[k];
        }
        acc
    }

    /// Smallest distance between distinct critical points relative to their scale.
    pub fn collision(&self, x: &[Complex<T>]) -> Option<T> {
        let c = self.critical_points(x);
        let scale = c.iter().fold(T::one(), |m, v| m.max(v.norm()));
        let mut best: Option<T> = None;
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                let dist = (c[i] - c[j]).norm() / scale;
                best = Some(best.map_or(dist, |b: T| b.min(dist)));
            }
        }
        best
    }

    /// Algebraic residuals `(f(c_j) − V_j)/|V_j|`, used to build seeds.
    pub fn eval_algebraic(&self, x: &[Complex<T>], values: &[Complex<T>], dir: Option<usize>) -> Eval<T> {
        let xd = self.duals(x, dir);
        let crit = self.crit(&xd);
        let a = self.coeffs_dual(&crit, xd[xd.len() - 1]);
        let mut residual = Vec::new();
        let mut column = Vec::new();
        for (c, v) in crit.iter().zip(values) {
            let fc = Self::eval_full(&a, *c);
            let s = T::one() / v.norm();
            residual.push((fc.value - v) * s);
            column.push(fc.tangent * s);
        }
        Eval { residual, column }
    }

    /// Böttcher residuals `log ψ(v_j) − T_j` with `T_j = r + i·targets[j]`,
    /// taking the branch of `log ψ` nearest the target. `None` if a critical
    /// value fails to escape.
    pub fn eval_bottcher(&self, x: &[Complex<T>], r: T, targets: &[T], dir: Option<usize>) -> Option<Eval<T>> {
        let xd = self.duals(x, dir);
        let crit = self.crit(&xd);
        let a = self.coeffs_dual(&crit, xd[xd.len() - 1]);
        let radius = escape_radius(&a);
        let mut residual = Vec::new();
        let mut column = Vec::new();
        for (c, &t) in crit.iter().zip(targets) {
            let v = Self::eval_full(&a, *c);
            let l = lift(self.degree, &a, v, radius, self.max_iter)?;
            let log_psi = choose_branch(&l, t);
            residual.push(log_psi - Complex::new(r, t));
            column.push(l.tangent);
        }
        Some(Eval { residual, column })
    }

    /// Critical values `f(c_j)` in block order.
    pub fn critical_values(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        let xd = self.duals(x, None);
        let crit = self.crit(&xd);
        let a = self.coeffs_dual(&crit, xd[xd.len() - 1]);
        crit.iter().map(|c| Self::eval_full(&a, *c).value).collect()
    }

    /// Initial lifted arguments `2π(φ_j + N_j)` with `N_j` chosen so the
    /// target is nearest `arg v_j`; valid while `ψ ≈ id` on the critical values.
    pub fn targets_from_args(&self, x: &[Complex<T>]) -> Vec<T> {
        self.critical_values(x)
            .iter()
            .zip(&self.phis)
            .map(|(v, &phi)| {
                let base = T::TAU() * phi;
                base + T::TAU() * ((v.arg() - base) / T::TAU()).round()
            })
            .collect()
    }
}

fn escape_radius<T: Real>(a: &[Dual<T>]) -> T {
    let s = a.iter().fold(T::zero(), |m, c| m + c.value.norm());
    lit::<T>(4.0).max(lit::<T>(2.0) * (T::one() + s))
}

/// Real scaling shared by complex numbers and duals.
pub(crate) trait Scale<T> {
    fn scale(self, s: T) -> Self;
}

impl<T: Real> Scale<T> for Complex<T> {
    fn scale(self, s: T) -> Self {
        self * s
    }
}

impl<T: Real> Scale<T> for Dual<T> {
    fn scale(self, s: T) -> Self {
        Dual::scale(self, s)
    }
}
