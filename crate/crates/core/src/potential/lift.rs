//! Lifted logarithm of the Böttcher coordinate.
//!
//! For `n` the first index with `|f^n(z)| ≥ R`, `Λ = log ψ(f^n z)` is computed
//! from the convergent product on `|w| ≥ R` with every logarithm principal.
//! Then `d^n·log ψ(z) ≡ Λ (mod 2πi)`, and picking the right residue is the
//! caller's business. Tangents are carried scaled by `d^{-k}` so the
//! derivative `d log ψ / dp` comes out directly without overflow.

use num_complex::Complex;

use crate::dual::Dual;
use crate::scalar::{from_usize, Real};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Lifted<T> {
    /// Escape index: first `n` with `|f^n(z)| ≥ R`.
    pub n: usize,
    /// `log ψ(f^n z)` with principal logarithms.
    pub lambda: Complex<T>,
    /// Derivative of `log ψ(z)` along the dual direction (branch independent).
    pub tangent: Complex<T>,
    /// `d^{-n}`.
    pub inv_dn: T,
}

impl<T: Real> Lifted<T> {
    pub fn green(&self) -> T {
        self.lambda.re * self.inv_dn
    }
}

#[inline]
fn step<T: Real>(coeffs: &[Dual<T>], z: Dual<T>, s: T) -> Dual<T> {
    let mut acc = z;
    for k in (0..coeffs.len()).rev() {
        acc = acc * z + Dual::new(coeffs[k].value, coeffs[k].tangent * s);
    }
    acc
}

/// `f(w)/w^d` as a polynomial in `u = 1/w`.
#[inline]
fn ratio<T: Real>(coeffs: &[Dual<T>], u: Dual<T>, s: T) -> Dual<T> {
    let mut acc = Dual::zero();
    for c in coeffs.iter() {
        acc = acc * u + Dual::new(c.value, c.tangent * s);
    }
    Dual::one() + acc * u * u
}

/// Runs the lift. `coeffs` are `a_0..a_{d-2}` with tangents for the
/// parameter direction; `z` carries its own tangent. Returns `None` when the
/// orbit does not reach `radius` within `max_iter` steps.
pub(crate) fn lift<T: Real>(
    degree: u32,
    coeffs: &[Dual<T>],
    z: Dual<T>,
    radius: T,
    max_iter: usize,
) -> Option<Lifted<T>> {
    let inv_d = T::one() / from_usize::<T>(degree as usize);
    let mut w = z;
    let mut s = T::one();
    let mut n = 0usize;
    while !(w.value.norm() >= radius) {
        if n >= max_iter || !w.value.re.is_finite() || !w.value.im.is_finite() {
            return None;
        }
        w = step(coeffs, w, s).scale_tangent(inv_d);
        s = s * inv_d;
        n += 1;
    }
    let inv_dn = s;
    let mut acc_val = w.value.ln();
    let mut acc_tan = w.tangent / w.value;
    let coeff_mag = coeffs.iter().fold(T::zero(), |m, c| m + c.value.norm());
    let mut weight = inv_d;
    for _ in 0..64 {
        let u = Dual::one() / w;
        if coeff_mag * u.value.norm_sqr() * weight < T::epsilon() * T::epsilon() {
            break;
        }
        let lr = ratio(coeffs, u, s).ln();
        acc_val = acc_val + lr.value * weight;
        acc_tan = acc_tan + lr.tangent * inv_d;
        w = step(coeffs, w, s).scale_tangent(inv_d);
        if !w.value.re.is_finite() || !w.value.im.is_finite() {
            break;
        }
        s = s * inv_d;
        weight = weight * inv_d;
    }
    Some(Lifted { n, lambda: acc_val, tangent: acc_tan, inv_dn })
}

/// Lift with respect to `z` only.
pub(crate) fn lift_z<T: Real>(
    degree: u32,
    coeffs: &[Complex<T>],
    z: Complex<T>,
    radius: T,
    max_iter: usize,
) -> Option<Lifted<T>> {
    let duals: Vec<Dual<T>> = coeffs.iter().map(|&c| Dual::constant(c)).collect();
    lift(degree, &duals, Dual::variable(z), radius, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_map_is_identity() {
        let z = Complex::new(1.7, 0.4);
        let l = lift_z::<f64>(3, &[Complex::new(0.0, 0.0); 2], z, 4.0, 100).unwrap();
        let log_psi = Complex::new(l.lambda.re * l.inv_dn, 0.0);
        assert!((log_psi.re - z.norm().ln()).abs() < 1e-14);
        assert!((l.tangent - z.inv()).norm() < 1e-13);
    }

    #[test]
    fn chebyshev_far_value() {
        // z = w + 1/w for z^2 - 2; at z = 10, w = 5 + sqrt(24).
        let l = lift_z::<f64>(2, &[Complex::new(-2.0, 0.0)], Complex::new(10.0, 0.0), 6.0, 100).unwrap();
        assert_eq!(l.n, 0);
        assert!((l.lambda.re - (5.0 + 24f64.sqrt()).ln()).abs() < 1e-14);
        assert!(l.lambda.im.abs() < 1e-15);
    }

    #[test]
    fn parameter_tangent_matches_difference() {
        // d/dc of log ψ_{z^2+c}(z) at a fixed escaping z.
        let z = Complex::new(0.3, 1.1);
        let c0 = Complex::new(-0.4, 0.9);
        let l = lift(2, &[Dual::variable(c0)], Dual::constant(z), 6.0, 200).unwrap();
        let h = 1e-6;
        let val = |c: Complex<f64>| {
            let m = lift_z(2, &[c], z, 6.0, 200).unwrap();
            assert_eq!(m.n, l.n);
            Complex::new(m.lambda.re, m.lambda.im) * m.inv_dn
        };
        let fd = (val(c0 + h) - val(c0 - h)) / (2.0 * h);
        assert!((fd - l.tangent).norm() < 1e-6 * (1.0 + fd.norm()), "{fd} vs {}", l.tangent);
    }
}
