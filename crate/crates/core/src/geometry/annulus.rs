//! Round annuli and their moduli.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::{Disk, GeometryError};
use crate::scalar::{from_usize, lit, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub enum AnnulusSpec<T> {
    RoundConcentric { center: Complex<T>, r_in: T, r_out: T },
    /// `outer ∖ closure(inner)`; the closed inner disk sits in the open outer one.
    CirclePair { outer: Disk<T>, inner: Disk<T> },
}

impl<T: Real> AnnulusSpec<T> {
    pub fn concentric(center: Complex<T>, r_in: T, r_out: T) -> Result<Self, GeometryError> {
        let a = Self::RoundConcentric { center, r_in, r_out };
        a.validate()?;
        Ok(a)
    }

    pub fn circle_pair(outer: Disk<T>, inner: Disk<T>) -> Result<Self, GeometryError> {
        let a = Self::CirclePair { outer, inner };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        match *self {
            Self::RoundConcentric { center, r_in, r_out } => {
                Disk::new(center, r_out)?;
                if !(r_in > T::zero() && r_out > r_in) {
                    return Err(GeometryError::InvalidAnnulus(format!("need 0 < r_in < r_out, got {r_in}, {r_out}")));
                }
                Ok(())
            }
            Self::CirclePair { outer, inner } => {
                outer.check()?;
                inner.check()?;
                let gap = outer.r - (inner.c - outer.c).norm() - inner.r;
                if gap < -lit::<T>(1e-12) * outer.r {
                    return Err(GeometryError::InvalidAnnulus("inner disk is not inside the outer disk".into()));
                }
                if gap <= lit::<T>(1e-12) * outer.r {
                    return Err(GeometryError::DegenerateAnnulus { gap: gap.to_f64_lossy() });
                }
                Ok(())
            }
        }
    }

    pub fn outer(&self) -> Disk<T> {
        match *self {
            Self::RoundConcentric { center, r_out, .. } => Disk { c: center, r: r_out },
            Self::CirclePair { outer, .. } => outer,
        }
    }

    pub fn inner(&self) -> Disk<T> {
        match *self {
            Self::RoundConcentric { center, r_in, .. } => Disk { c: center, r: r_in },
            Self::CirclePair { inner, .. } => inner,
        }
    }

    /// Full preimage under `z ↦ z^d` of an annulus centered at the origin.
    pub fn power_preimage(&self, d: u32) -> Result<Self, GeometryError> {
        self.validate()?;
        match *self {
            Self::RoundConcentric { center, r_in, r_out } if center.norm() == T::zero() && d >= 1 => {
                let e = T::one() / from_usize::<T>(d as usize);
                Self::concentric(center, r_in.powf(e), r_out.powf(e))
            }
            _ => Err(GeometryError::InvalidAnnulus("power preimages need a round annulus about 0".into())),
        }
    }
}

/// `z ↦ (a z + b) / (c z + d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mobius<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub c: Complex<T>,
    pub d: Complex<T>,
}

impl<T: Real> Mobius<T> {
    pub fn new(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Option<Self> {
        let det = a * d - b * c;
        (det.norm() > T::zero()).then_some(Self { a, b, c, d })
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
        Self { a: o, b: z, c: z, d: o }
    }

    pub fn apply(&self, z: Complex<T>) -> Complex<T> {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Self) -> Self {
        Self {
            a: self.a * inner.a + self.b * inner.c,
            b: self.a * inner.b + self.b * inner.d,
            c: self.c * inner.a + self.d * inner.c,
            d: self.c * inner.b + self.d * inner.d,
        }
    }

    pub fn inverse(&self) -> Self {
        Self { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Image of a disk whose closure avoids the pole; `None` otherwise.
    pub fn map_disk(&self, disk: &Disk<T>) -> Option<Disk<T>> {
        if self.c.norm() == T::zero() {
            let k = self.a / self.d;
            return Some(Disk { c: k * disk.c + self.b / self.d, r: k.norm() * disk.r });
        }
        let pole = -self.d / self.c;
        let off = pole - disk.c;
        if off.norm() <= disk.r {
            return None;
        }
        // The reflection of the pole in the circle goes to the image center.
        let mirror = disk.c + off * (disk.r * disk.r / off.norm_sqr());
        let c = self.apply(mirror);
        let r = (self.apply(disk.c + Complex::new(disk.r, T::zero())) - c).norm();
        Some(Disk { c, r })
    }
}

/// A Möbius map sending the outer circle to the unit circle and the inner
/// circle to `|w| = ρ`, together with `ρ`.
pub fn concentric_normalization<T: Real>(spec: &AnnulusSpec<T>) -> Result<(Mobius<T>, T), GeometryError> {
    spec.validate()?;
    let (outer, inner) = (spec.outer(), spec.inner());
    let zero = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    // w = (z − c_out)/R
    let to_unit = Mobius { a: one, b: -outer.c, c: zero, d: Complex::new(outer.r, T::zero()) };
    let a_c = (inner.c - outer.c) / outer.r;
    let s = inner.r / outer.r;
    let a = a_c.norm();
    if a <= lit::<T>(1e-15) {
        return Ok((to_unit, s));
    }
    // Rotate the inner center onto the positive axis.
    let rot = Mobius { a: a_c.conj() / a, b: zero, c: zero, d: one };
    // Common symmetric point p of both circles, inside the inner one.
    let q = T::one() + a * a - s * s;
    let disc = (q * q - lit::<T>(4.0) * a * a).max(T::zero()).sqrt();
    let p = lit::<T>(2.0) * a / (q + disc);
    let pc = Complex::new(p, T::zero());
    let blaschke = Mobius { a: one, b: -pc, c: -pc, d: one };
    let m = blaschke.compose(&rot).compose(&to_unit);
    let img = m.map_disk(&inner).ok_or_else(|| GeometryError::InvalidAnnulus("normalization failed".into()))?;
    Ok((m, img.r))
}

/// `mod A = log(R/r)/2π` after normalization to a round annulus.
pub fn modulus<T: Real>(spec: &AnnulusSpec<T>) -> Result<T, GeometryError> {
    match *spec {
        AnnulusSpec::RoundConcentric { r_in, r_out, .. } => {
            spec.validate()?;
            Ok((r_out / r_in).ln() / T::TAU())
        }
        AnnulusSpec::CirclePair { .. } => {
            let (_, rho) = concentric_normalization(spec)?;
            Ok(-rho.ln() / T::TAU())
        }
    }
}
