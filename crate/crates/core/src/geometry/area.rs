//! The `ρ*` area `∬ 1/(4π²|w|²)`.
//!
//! With `ω = log|w| d(arg w)` we have `dω = |w|^{-2} dA` on `ℂ*`, so every
//! area is a boundary integral as long as the origin stays off the closed
//! region. For an annulus whose hole contains the origin the two boundary
//! circles still bound the region, so the same formula applies.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{AnnulusSpec, Boundary, Disk, GeometryError, Region};
use crate::quad::integrate;
use crate::scalar::{lit, Real};

const REL_TOL: f64 = 1e-11;

fn normalize<T: Real>(x: T) -> T {
    x / (T::TAU() * T::TAU())
}

/// `∮ log|h(γ)| Im(h'/h(γ) γ') dt` around a circle, counterclockwise.
fn circle_form<T: Real>(disk: &Disk<T>, log_abs: impl Fn(Complex<T>) -> T, dlog: impl Fn(Complex<T>) -> Complex<T>) -> T {
    let g = |t: T| {
        let e = Complex::from_polar(T::one(), t);
        let z = disk.c + e * disk.r;
        let dz = Complex::new(T::zero(), disk.r) * e;
        log_abs(z) * (dlog(z) * dz).im
    };
    integrate(g, T::zero(), T::TAU(), T::epsilon(), lit(REL_TOL)).0
}

fn segment_form<T: Real>(a: Complex<T>, b: Complex<T>) -> T {
    let g = |t: T| {
        let w = a + (b - a) * t;
        w.norm().ln() * ((b - a) / w).im
    };
    integrate(g, T::zero(), T::one(), T::epsilon(), lit(REL_TOL)).0
}

fn identity_form<T: Real>(disk: &Disk<T>) -> T {
    circle_form(disk, |z| z.norm().ln(), |z| z.inv())
}

pub trait RhoStarArea<T: Real> {
    fn area_rho_star(&self) -> Result<T, GeometryError>;
}

impl<T: Real> RhoStarArea<T> for Disk<T> {
    fn area_rho_star(&self) -> Result<T, GeometryError> {
        self.check()?;
        if self.c.norm() <= self.r * (T::one() + lit(1e-12)) {
            return Err(GeometryError::OriginInside);
        }
        Ok(normalize(identity_form(self)))
    }
}

impl<T: Real> RhoStarArea<T> for Region<T> {
    fn area_rho_star(&self) -> Result<T, GeometryError> {
        match self.boundary() {
            Boundary::Circle(d) => d.area_rho_star(),
            Boundary::Polyline(v) => {
                let origin = Complex::new(T::zero(), T::zero());
                let scale = v.iter().fold(T::zero(), |m, p| m.max(p.norm()));
                if self.contains(origin) || self.boundary_distance(origin) <= lit::<T>(1e-12) * scale {
                    return Err(GeometryError::OriginInside);
                }
                let n = v.len();
                Ok(normalize((0..n).fold(T::zero(), |s, i| s + segment_form(v[i], v[(i + 1) % n]))))
            }
        }
    }
}

impl<T: Real> RhoStarArea<T> for AnnulusSpec<T> {
    fn area_rho_star(&self) -> Result<T, GeometryError> {
        self.validate()?;
        let (outer, inner) = (self.outer(), self.inner());
        let origin = Complex::new(T::zero(), T::zero());
        let in_hole = (origin - inner.c).norm() < inner.r * (T::one() - lit(1e-12));
        if !in_hole && (origin - outer.c).norm() <= outer.r * (T::one() + lit(1e-12)) {
            return Err(GeometryError::OriginInside);
        }
        Ok(normalize(identity_form(&outer) - identity_form(&inner)))
    }
}

pub fn area_rho_star<T: Real, D: RhoStarArea<T> + ?Sized>(domain: &D) -> Result<T, GeometryError> {
    domain.area_rho_star()
}

/// Univalent test maps `h` for the scattering check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub enum TestMap<T> {
    /// `a z + b`
    Affine { a: Complex<T>, b: Complex<T> },
    /// `1 / (z − pole)`
    Inversion { pole: Complex<T> },
    /// `exp(P(z))`, coefficients ascending. Univalent only where `P` is
    /// injective with imaginary part varying by less than `2π`; the caller
    /// is responsible for that.
    ExpPoly { coeffs: Vec<Complex<T>> },
}

impl<T: Real> TestMap<T> {
    pub fn identity() -> Self {
        Self::Affine { a: Complex::new(T::one(), T::zero()), b: Complex::new(T::zero(), T::zero()) }
    }

    fn poly(coeffs: &[Complex<T>], z: Complex<T>) -> (Complex<T>, Complex<T>) {
        let mut p = Complex::new(T::zero(), T::zero());
        let mut dp = p;
        for c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        match self {
            Self::Affine { a, b } => a * z + b,
            Self::Inversion { pole } => (z - pole).inv(),
            Self::ExpPoly { coeffs } => Self::poly(coeffs, z).0.exp(),
        }
    }

    fn log_abs(&self, z: Complex<T>) -> T {
        match self {
            Self::ExpPoly { coeffs } => Self::poly(coeffs, z).0.re,
            _ => self.eval(z).norm().ln(),
        }
    }

    /// `h'/h`.
    fn dlog(&self, z: Complex<T>) -> Complex<T> {
        match self {
            Self::Affine { a, b } => a / (a * z + b),
            Self::Inversion { pole } => -(z - pole).inv(),
            Self::ExpPoly { coeffs } => Self::poly(coeffs, z).1,
        }
    }

    /// Rejects maps that vanish, blow up or degenerate on the union of `disks`.
    pub(crate) fn admissible(&self, disks: &[Disk<T>]) -> Result<(), String> {
        let inside = |p: Complex<T>| disks.iter().any(|d| (p - d.c).norm() <= d.r * (T::one() + lit(1e-9)));
        match self {
            Self::Affine { a, b } => {
                if a.norm() == T::zero() {
                    return Err("constant map".into());
                }
                let zero = -b / a;
                if inside(zero) {
                    return Err(format!("h vanishes at {zero}"));
                }
            }
            Self::Inversion { pole } => {
                if inside(*pole) {
                    return Err(format!("pole {pole} lies on the hull"));
                }
            }
            Self::ExpPoly { coeffs } => {
                if coeffs.iter().skip(1).all(|c| c.norm() == T::zero()) {
                    return Err("constant exponent".into());
                }
            }
        }
        Ok(())
    }

    /// A few maps adapted to disks inside `hull`: a translation moving the
    /// hull away from 0, an inversion about a point outside it and two
    /// exponentials whose exponent is injective with small imaginary range.
    pub fn catalogue(hull: &Disk<T>) -> Vec<Self> {
        let one = Complex::new(T::one(), T::zero());
        let r = hull.r;
        let shift = Complex::new(lit::<T>(3.0) * r, T::zero()) - hull.c;
        let k = lit::<T>(0.6) * T::PI() / r;
        let eps = lit::<T>(0.25) / r;
        vec![
            Self::Affine { a: one, b: shift },
            Self::Inversion { pole: hull.c + Complex::new(T::zero(), lit::<T>(1.5) * r) },
            Self::ExpPoly { coeffs: vec![-hull.c * k, one * k] },
            Self::ExpPoly {
                coeffs: vec![(-hull.c * k) + hull.c * hull.c * (k * eps), one * k - hull.c * (lit::<T>(2.0) * k * eps), one * (k * eps)],
            },
        ]
    }
}

/// `Area(ρ*, h(D))` through the pullback `∬_D |h'|²/(4π²|h|²)`.
pub fn pulled_back_area<T: Real>(h: &TestMap<T>, disk: &Disk<T>) -> T {
    normalize(circle_form(disk, |z| h.log_abs(z), |z| h.dlog(z)))
}
