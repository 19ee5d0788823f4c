//! Monic centered polynomials `z^d + a_{d-2} z^{d-2} + … + a_0`.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::dual::Dual;
use crate::scalar::{from_usize, lit, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("degree must be at least 2, got {0}")]
    Degree(u32),
    #[error("degree {degree} needs {expected} lower coefficients a_0..a_(d-2), got {got}")]
    CoefficientCount { degree: u32, expected: usize, got: usize },
    #[error("non-finite coefficient a_{0}")]
    NonFinite(usize),
    #[error("root finder did not converge after {0} sweeps")]
    NoConvergence(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonicPolynomial<T> {
    degree: u32,
    coeffs: Vec<Complex<T>>,
}

/// Critical point with its multiplicity as a root of `f'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint<T> {
    pub location: Complex<T>,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSet<T> {
    pub points: Vec<CriticalPoint<T>>,
}

impl<T: Real> CriticalSet<T> {
    pub fn total_multiplicity(&self) -> usize {
        self.points.iter().map(|p| p.multiplicity).sum()
    }
}

/// Forward orbit truncated at the first exit from the escape disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit<T> {
    pub points: Vec<Complex<T>>,
    pub escaped: bool,
}

impl<T: Real> MonicPolynomial<T> {
    pub fn new(degree: u32, coeffs: Vec<Complex<T>>) -> Result<Self, PolyError> {
        if degree < 2 {
            return Err(PolyError::Degree(degree));
        }
        let expected = degree as usize - 1;
        if coeffs.len() != expected {
            return Err(PolyError::CoefficientCount { degree, expected, got: coeffs.len() });
        }
        if let Some(k) = coeffs.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(PolyError::NonFinite(k));
        }
        Ok(Self { degree, coeffs })
    }

    /// `z^d`.
    pub fn power(degree: u32) -> Result<Self, PolyError> {
        let n = (degree as usize).saturating_sub(1);
        Self::new(degree, vec![Complex::new(T::zero(), T::zero()); n])
    }

    /// `z^2 + c`.
    pub fn quadratic(c: Complex<T>) -> Self {
        Self { degree: 2, coeffs: vec![c] }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// `a_0..a_{d-2}`.
    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == T::zero())
    }

    pub fn conj(&self) -> Self {
        Self { degree: self.degree, coeffs: self.coeffs.iter().map(|c| c.conj()).collect() }
    }

    pub fn evaluate(&self, z: Complex<T>) -> Complex<T> {
        let mut acc = z;
        for k in (0..self.coeffs.len()).rev() {
            acc = acc * z + self.coeffs[k];
        }
        acc
    }

    /// `(f(z), f'(z))`.
    pub fn eval_with_derivative(&self, z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let d = self.evaluate_dual(Dual::variable(z));
        (d.value, d.tangent)
    }

    pub fn derivative(&self, z: Complex<T>) -> Complex<T> {
        self.eval_with_derivative(z).1
    }

    pub fn evaluate_dual(&self, z: Dual<T>) -> Dual<T> {
        let mut acc = z;
        for k in (0..self.coeffs.len()).rev() {
            acc = acc * z + Dual::constant(self.coeffs[k]);
        }
        acc
    }

    /// Coefficients of `f` in ascending order, length `d + 1`.
    pub fn full_coeffs(&self) -> Vec<Complex<T>> {
        let mut out = self.coeffs.clone();
        out.push(Complex::new(T::zero(), T::zero()));
        out.push(Complex::new(T::one(), T::zero()));
        out
    }

    /// Ascending coefficients of the monic polynomial `f'/d`, degree `d − 1`.
    pub fn monic_derivative_coeffs(&self) -> Vec<Complex<T>> {
        let d: T = from_usize(self.degree as usize);
        let full = self.full_coeffs();
        (1..full.len()).map(|k| full[k] * (from_usize::<T>(k) / d)).collect()
    }

    /// `max(4, 2(1 + Σ|a_k|))`; outside this radius `|f(z)| ≥ 2|z|`.
    pub fn escape_radius(&self) -> T {
        let s = self.coeffs.iter().fold(T::zero(), |acc, c| acc + c.norm());
        lit::<T>(4.0).max(lit::<T>(2.0) * (T::one() + s))
    }

    /// `z, f(z), …, f^n(z)`, truncated before the first point outside the disk.
    pub fn orbit(&self, z: Complex<T>, n: usize, escape_radius: T) -> Orbit<T> {
        let mut points = Vec::with_capacity(n + 1);
        let mut w = z;
        for k in 0..=n {
            if !(w.norm() <= escape_radius) {
                return Orbit { points, escaped: true };
            }
            points.push(w);
            if k < n {
                w = self.evaluate(w);
            }
        }
        Orbit { points, escaped: false }
    }

    /// Roots of `f'` with multiplicities. Roots closer than `tol` are merged,
    /// as are looser clusters whose mean is a numerically multiple root.
    pub fn critical_points(&self, tol: T) -> Result<CriticalSet<T>, PolyError> {
        let p = self.monic_derivative_coeffs();
        let roots = aberth(&p, 0x5eed)?;
        Ok(CriticalSet { points: cluster_roots(&p, &roots, tol) })
    }
}

fn horner<T: Real>(p: &[Complex<T>], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut v = Complex::new(T::zero(), T::zero());
    let mut dv = v;
    for c in p.iter().rev() {
        dv = dv * z + v;
        v = v * z + c;
    }
    (v, dv)
}

/// Simultaneous root finding for a monic polynomial (ascending coefficients).
pub(crate) fn aberth<T: Real>(p: &[Complex<T>], seed: u64) -> Result<Vec<Complex<T>>, PolyError> {
    let n = p.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![-p[0]]);
    }
    let bound = T::one() + p[..n].iter().fold(T::zero(), |m, c| m.max(c.norm()));
    let centroid = -p[n - 1] / from_usize::<T>(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const SWEEPS: usize = 500;
    const RESTARTS: usize = 6;
    let scale = p.iter().fold(T::one(), |m, c| m.max(c.norm()));
    for attempt in 0..RESTARTS {
        let phase: f64 = if attempt == 0 { 0.4 } else { rng.random::<f64>() * std::f64::consts::TAU };
        let radius = bound * lit(0.5 + 0.1 * attempt as f64);
        let mut z: Vec<Complex<T>> = (0..n)
            .map(|k| {
                let a = phase + std::f64::consts::TAU * k as f64 / n as f64;
                centroid + Complex::from_polar(radius, lit(a))
            })
            .collect();
        let mut done = vec![false; n];
        for _ in 0..SWEEPS {
            for i in 0..n {
                if done[i] {
                    continue;
                }
                let (v, dv) = horner(p, z[i]);
                if v.norm() == T::zero() {
                    done[i] = true;
                    continue;
                }
                let ratio = v / dv;
                let mut s = Complex::new(T::zero(), T::zero());
                for j in 0..n {
                    if j != i {
                        let diff = z[i] - z[j];
                        if diff.norm() > T::zero() {
                            s = s + diff.inv();
                        }
                    }
                }
                let w = ratio / (Complex::new(T::one(), T::zero()) - ratio * s);
                if !(w.re.is_finite() && w.im.is_finite()) {
                    break;
                }
                z[i] = z[i] - w;
                let floor = T::epsilon() * lit(8.0) * (T::one() + z[i].norm());
                if w.norm() <= floor || horner(p, z[i]).0.norm() <= T::epsilon() * scale {
                    done[i] = true;
                }
            }
            if done.iter().all(|&b| b) {
                return Ok(z);
            }
        }
        // Multiple roots converge only linearly; accept when residuals are at the noise floor.
        let ok = z.iter().all(|&zi| {
            let (v, _) = horner(p, zi);
            let mag = p.iter().enumerate().fold(T::zero(), |acc, (k, c)| acc + c.norm() * zi.norm().powi(k as i32));
            v.norm() <= mag * lit(1e-9) && zi.re.is_finite() && zi.im.is_finite()
        });
        if ok {
            return Ok(z);
        }
    }
    Err(PolyError::NoConvergence(SWEEPS * RESTARTS))
}

fn cluster_roots<T: Real>(p: &[Complex<T>], roots: &[Complex<T>], tol: T) -> Vec<CriticalPoint<T>> {
    let n = roots.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    let scale = T::one() + roots.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    let loose = lit::<T>(1e-4) * scale;
    for i in 0..n {
        for j in i + 1..n {
            let dist = (roots[i] - roots[j]).norm();
            let merge = dist < tol || (dist < loose && is_multiple(p, (roots[i] + roots[j]) * lit::<T>(0.5), scale));
            if merge {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Complex<T>, usize)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => {
                g.1 = g.1 + roots[i];
                g.2 += 1;
            }
            None => groups.push((r, roots[i], 1)),
        }
    }
    groups
        .into_iter()
        .map(|(_, sum, m)| {
            let mean = sum / from_usize::<T>(m);
            CriticalPoint { location: polish_multiple(p, mean, m), multiplicity: m }
        })
        .collect()
}

/// An `m`-fold root of `p` is a simple root of `p^(m-1)`; a few Newton steps
/// there recover full precision lost to the cluster spread.
fn polish_multiple<T: Real>(p: &[Complex<T>], z0: Complex<T>, m: usize) -> Complex<T> {
    if m < 2 {
        return z0;
    }
    let mut q = p.to_vec();
    for _ in 0..m - 1 {
        q = (1..q.len()).map(|k| q[k] * from_usize::<T>(k)).collect();
    }
    let mut z = z0;
    for _ in 0..8 {
        let (v, dv) = horner(&q, z);
        if dv.norm() == T::zero() {
            break;
        }
        let step = v / dv;
        if !(step.re.is_finite() && step.im.is_finite()) || step.norm() > lit::<T>(1e-3) * (T::one() + z.norm()) {
            return z0;
        }
        z = z - step;
        if step.norm() <= T::epsilon() * (T::one() + z.norm()) {
            break;
        }
    }
    z
}

/// `p` and `p'` both vanish at `z` relative to the polynomial's scale.
fn is_multiple<T: Real>(p: &[Complex<T>], z: Complex<T>, scale: T) -> bool {
    let (v, dv) = horner(p, z);
    let mag = p.iter().enumerate().fold(T::zero(), |acc, (k, c)| acc + c.norm() * scale.powi(k as i32));
    v.norm() <= mag * lit(1e-12) && dv.norm() <= mag * lit(1e-6)
}

#[derive(Serialize, Deserialize)]
struct PolyRepr {
    degree: u32,
    coeffs: Vec<[f64; 2]>,
}

impl<T: Real> Serialize for MonicPolynomial<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyRepr {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| [c.re.to_f64_lossy(), c.im.to_f64_lossy()]).collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for MonicPolynomial<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = PolyRepr::deserialize(d)?;
        let coeffs = repr.coeffs.iter().map(|[re, im]| Complex::new(lit(*re), lit(*im))).collect();
        MonicPolynomial::new(repr.degree, coeffs).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        Complex::new(re, im)
    }

    #[test]
    fn evaluation_examples() {
        let z2 = MonicPolynomial::<f64>::power(2).unwrap();
        assert_eq!(z2.evaluate(c(1.0, 1.0)), c(0.0, 2.0));
        assert_eq!(MonicPolynomial::quadratic(c(0.0, 1.0)).evaluate(c(0.0, 0.0)), c(0.0, 1.0));
        assert_eq!(MonicPolynomial::<f64>::power(3).unwrap().evaluate(c(2.0, 0.0)), c(8.0, 0.0));
    }

    #[test]
    fn overflow_is_infinite_not_panic() {
        let f = MonicPolynomial::quadratic(c(0.0, 0.0));
        let v = f.evaluate(c(1e200, 0.0));
        assert!(!v.norm().is_finite());
    }

    #[test]
    fn critical_point_examples() {
        let cs = MonicPolynomial::quadratic(c(0.3, -0.1)).critical_points(1e-8).unwrap();
        assert_eq!(cs.points.len(), 1);
        assert!(cs.points[0].location.norm() < 1e-14);

        let cs = MonicPolynomial::<f64>::power(3).unwrap().critical_points(1e-8).unwrap();
        assert_eq!(cs.points.len(), 1);
        assert_eq!(cs.points[0].multiplicity, 2);
        assert!(cs.points[0].location.norm() < 1e-10);

        let f = MonicPolynomial::new(3, vec![c(0.0, 0.0), c(-3.0, 0.0)]).unwrap();
        let mut locs: Vec<f64> = f.critical_points(1e-8).unwrap().points.iter().map(|p| p.location.re).collect();
        locs.sort_by(f64::total_cmp);
        assert!((locs[0] + 1.0).abs() < 1e-12 && (locs[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perturbed_double_root_is_merged() {
        // f'/4 = z^3 - 3z + 2 = (z - 1)^2 (z + 2).
        let f = MonicPolynomial::new(4, vec![c(0.7, 0.0), c(8.0, 0.0), c(-6.0, 0.0)]).unwrap();
        let cs = f.critical_points(1e-8).unwrap();
        assert_eq!(cs.total_multiplicity(), 3);
        let double = cs.points.iter().find(|p| p.multiplicity == 2).expect("double root found");
        assert!((double.location - c(1.0, 0.0)).norm() < 1e-7);
    }

    #[test]
    fn orbit_examples() {
        let f = MonicPolynomial::quadratic(c(0.0, 1.0));
        let o = f.orbit(c(0.0, 0.0), 5, f.escape_radius());
        assert_eq!(o.points, vec![c(0.0, 0.0), c(0.0, 1.0), c(-1.0, 1.0), c(0.0, -1.0), c(-1.0, 1.0), c(0.0, -1.0)]);
        assert!(!o.escaped);

        let f = MonicPolynomial::<f64>::power(2).unwrap();
        let o = f.orbit(c(2.0, 0.0), 3, 100.0);
        assert_eq!(o.points, vec![c(2.0, 0.0), c(4.0, 0.0), c(16.0, 0.0)]);
        assert!(o.escaped);

        let f = MonicPolynomial::quadratic(c(-2.0, 0.0));
        let o = f.orbit(c(2.0, 0.0), 4, f.escape_radius());
        assert_eq!(o.points, vec![c(2.0, 0.0); 5]);
    }

    #[test]
    fn json_round_trip() {
        let f = MonicPolynomial::new(3, vec![c(0.5, -1.0), c(-3.0, 0.0)]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"degree":3,"coeffs":[[0.5,-1.0],[-3.0,0.0]]}"#);
        let back: MonicPolynomial<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<MonicPolynomial<f64>>(r#"{"degree":3,"coeffs":[[1,0]]}"#).is_err());
    }

    #[test]
    fn single_precision_works() {
        let f = MonicPolynomial::<f32>::new(3, vec![Complex::new(0.0, 0.0), Complex::new(-3.0, 0.0)]).unwrap();
        let cs = f.critical_points(1e-4).unwrap();
        assert_eq!(cs.total_multiplicity(), 2);
    }

    fn coeff() -> impl Strategy<Value = C> {
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| c(a, b))
    }

    proptest! {
        #[test]
        fn real_coefficients_commute_with_conjugation(
            a in proptest::collection::vec(-2.0..2.0f64, 1..5), re in -3.0..3.0f64, im in -3.0..3.0f64
        ) {
            let f = MonicPolynomial::new(a.len() as u32 + 1, a.iter().map(|&x| c(x, 0.0)).collect()).unwrap();
            let z = c(re, im);
            let lhs = f.evaluate(z.conj());
            let rhs = f.evaluate(z).conj();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
        }

        #[test]
        fn derivative_matches_central_difference(
            a in proptest::collection::vec(coeff(), 1..5), re in -1.5..1.5f64, im in -1.5..1.5f64
        ) {
            let f = MonicPolynomial::new(a.len() as u32 + 1, a).unwrap();
            let z = c(re, im);
            let h = 1e-5;
            let fd = (f.evaluate(z + h) - f.evaluate(z - h)) / (2.0 * h);
            let exact = f.derivative(z);
            prop_assert!((fd - exact).norm() <= 1e-7 * (1.0 + exact.norm()));
        }

        #[test]
        fn critical_multiplicities_sum(a in proptest::collection::vec(coeff(), 1..7)) {
            let f = MonicPolynomial::new(a.len() as u32 + 1, a).unwrap();
            let cs = f.critical_points(1e-8).unwrap();
            prop_assert_eq!(cs.total_multiplicity(), f.degree() as usize - 1);
            for p in &cs.points {
                prop_assert!(f.derivative(p.location).norm() < 1e-6 * (1.0 + p.location.norm()).powi(f.degree() as i32));
            }
        }
    }
}
