//! Distortion geometry: shape, moduli of annuli, the `ρ*` area, nested disk
//! systems and backward stability of disks under polynomial pullback.

mod annulus;
mod area;
mod disks;
mod preimage;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::poly::PolyError;
use crate::scalar::{from_usize, lit, Real};

pub use annulus::{concentric_normalization, modulus, AnnulusSpec, Mobius};
pub use area::{area_rho_star, pulled_back_area, RhoStarArea, TestMap};
pub use disks::{
    validate_m_nested, validate_scattered, DiskTriple, LabelRatio, MNestedReport, NestedDiskSystem, NestedViolation,
    ScatteredReport,
};
pub use preimage::{
    backward_stability_probe, backward_stability_probe_with, preimage_components, preimage_components_with,
    BackwardStabilityOptions, BackwardStabilityReport, LevelStats, PreimageComponent, PreimageLevel, PreimageOptions,
};

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("point lies on the boundary (distance {distance:e})")]
    OnBoundary { distance: f64 },
    #[error("point lies outside the region")]
    OutsideRegion,
    #[error("invalid disk: {0}")]
    InvalidDisk(String),
    #[error("invalid annulus: {0}")]
    InvalidAnnulus(String),
    #[error("degenerate annulus: boundary circles touch (gap {gap:e})")]
    DegenerateAnnulus { gap: f64 },
    #[error("the origin lies in the closed region, where the rho* density is singular")]
    OriginInside,
    #[error("invalid disk system: {0}")]
    InvalidSystem(String),
    #[error("test map {index} is not admissible on the hull: {reason}")]
    MapHitsOrigin { index: usize, reason: String },
    #[error("level {level}: boundary passes within {distance:e} of the critical value ({}, {})", value[0], value[1])]
    BranchCollision { level: usize, value: [f64; 2], distance: f64 },
    #[error("level {level}: lifting failed: {reason}")]
    LiftFailure { level: usize, reason: String },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Closed round disk `{|z − c| < r}` (open for intersection tests).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct Disk<T> {
    pub c: Complex<T>,
    pub r: T,
}

impl<T: Real> Disk<T> {
    pub fn new(c: Complex<T>, r: T) -> Result<Self, GeometryError> {
        let d = Self { c, r };
        d.check()?;
        Ok(d)
    }

    pub(crate) fn check(&self) -> Result<(), GeometryError> {
        if !(self.r > T::zero() && self.r.is_finite() && self.c.re.is_finite() && self.c.im.is_finite()) {
            return Err(GeometryError::InvalidDisk(format!("center {} radius {}", self.c, self.r)));
        }
        Ok(())
    }

    fn slack(&self, other: &Self) -> T {
        lit::<T>(1e-12) * (self.r + other.r + self.c.norm() + other.c.norm())
    }

    pub fn contains_point(&self, z: Complex<T>) -> bool {
        (z - self.c).norm() < self.r
    }

    /// Closure of `self` inside closure of `other`, up to rounding.
    pub fn is_within(&self, other: &Self) -> bool {
        (self.c - other.c).norm() + self.r <= other.r + self.slack(other)
    }

    /// Closure of `self` inside the open disk `other`.
    pub fn is_compactly_within(&self, other: &Self) -> bool {
        (self.c - other.c).norm() + self.r < other.r - self.slack(other)
    }

    /// The open disks meet.
    pub fn meets(&self, other: &Self) -> bool {
        (self.c - other.c).norm() < self.r + other.r - self.slack(other)
    }

    pub fn same_as(&self, other: &Self) -> bool {
        let s = self.slack(other);
        (self.c - other.c).norm() <= s && (self.r - other.r).abs() <= s
    }
}

/// Distance used by [`shape_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
    /// Chordal distance `2|a − b| / √((1+|a|²)(1+|b|²))` on the sphere.
    Chordal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Boundary<T> {
    Circle(Disk<T>),
    /// Vertices of a closed, simple, positively oriented polygon.
    Polyline(Vec<Complex<T>>),
}

/// A Jordan domain with an optional marked interior point.
#[derive(Debug, Clone, PartialEq)]
pub struct Region<T> {
    boundary: Boundary<T>,
    basepoint: Option<Complex<T>>,
}

fn cross<T: Real>(a: Complex<T>, b: Complex<T>) -> T {
    a.re * b.im - a.im * b.re
}

fn segments_cross<T: Real>(p1: Complex<T>, p2: Complex<T>, q1: Complex<T>, q2: Complex<T>) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    let z = T::zero();
    if ((d1 > z && d2 < z) || (d1 < z && d2 > z)) && ((d3 > z && d4 < z) || (d3 < z && d4 > z)) {
        return true;
    }
    // Collinear overlaps count as crossings.
    let on = |a: Complex<T>, b: Complex<T>, p: Complex<T>, d: T| {
        d == z && p.re >= a.re.min(b.re) && p.re <= a.re.max(b.re) && p.im >= a.im.min(b.im) && p.im <= a.im.max(b.im)
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

pub(crate) fn segment_distance<T: Real>(a: Complex<T>, b: Complex<T>, z: Complex<T>) -> T {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == T::zero() {
        return (z - a).norm();
    }
    let t = ((z - a).re * ab.re + (z - a).im * ab.im) / len2;
    let t = t.max(T::zero()).min(T::one());
    (z - (a + ab * t)).norm()
}

impl<T: Real> Region<T> {
    pub fn disk(c: Complex<T>, r: T) -> Result<Self, GeometryError> {
        Ok(Self { boundary: Boundary::Circle(Disk::new(c, r)?), basepoint: None })
    }

    /// A polygon; a repeated closing vertex is dropped. The vertices must
    /// run counterclockwise and the polygon must not self-intersect.
    pub fn polygon(mut vertices: Vec<Complex<T>>) -> Result<Self, GeometryError> {
        if vertices.len() > 1 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::InvalidRegion(format!("a polygon needs 3 vertices, got {n}")));
        }
        if vertices.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(GeometryError::InvalidRegion("non-finite vertex".into()));
        }
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    if vertices[i] == vertices[j] {
                        return Err(GeometryError::InvalidRegion(format!("repeated vertex {}", vertices[i])));
                    }
                    continue;
                }
                if segments_cross(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n]) {
                    return Err(GeometryError::InvalidRegion(format!("edges {i} and {j} intersect")));
                }
            }
        }
        let region = Self { boundary: Boundary::Polyline(vertices), basepoint: None };
        if region.area() <= T::zero() {
            return Err(GeometryError::InvalidRegion("vertices are not counterclockwise".into()));
        }
        Ok(region)
    }

    pub fn with_basepoint(mut self, z: Complex<T>) -> Result<Self, GeometryError> {
        self.check_inside(z)?;
        self.basepoint = Some(z);
        Ok(self)
    }

    pub fn boundary(&self) -> &Boundary<T> {
        &self.boundary
    }

    pub fn basepoint(&self) -> Option<Complex<T>> {
        self.basepoint
    }

    pub fn as_disk(&self) -> Option<Disk<T>> {
        match &self.boundary {
            Boundary::Circle(d) => Some(*d),
            Boundary::Polyline(_) => None,
        }
    }

    fn scale(&self) -> T {
        match &self.boundary {
            Boundary::Circle(d) => d.r + d.c.norm(),
            Boundary::Polyline(v) => v.iter().fold(T::zero(), |m, p| m.max(p.norm())),
        }
    }

    /// Interior test (the boundary itself is not inside).
    pub fn contains(&self, z: Complex<T>) -> bool {
        match &self.boundary {
            Boundary::Circle(d) => d.contains_point(z),
            Boundary::Polyline(v) => {
                let n = v.len();
                let mut inside = false;
                for i in 0..n {
                    let (a, b) = (v[i], v[(i + 1) % n]);
                    if (a.im > z.im) != (b.im > z.im) {
                        let x = a.re + (z.im - a.im) / (b.im - a.im) * (b.re - a.re);
                        if z.re < x {
                            inside = !inside;
                        }
                    }
                }
                inside && self.boundary_distance(z) > T::zero()
            }
        }
    }

    /// Euclidean distance from `z` to the boundary curve.
    pub fn boundary_distance(&self, z: Complex<T>) -> T {
        match &self.boundary {
            Boundary::Circle(d) => ((z - d.c).norm() - d.r).abs(),
            Boundary::Polyline(v) => {
                let n = v.len();
                (0..n).fold(T::infinity(), |m, i| m.min(segment_distance(v[i], v[(i + 1) % n], z)))
            }
        }
    }

    /// Largest Euclidean distance from `z` to a boundary point.
    pub fn far_distance(&self, z: Complex<T>) -> T {
        match &self.boundary {
            Boundary::Circle(d) => (z - d.c).norm() + d.r,
            Boundary::Polyline(v) => v.iter().fold(T::zero(), |m, p| m.max((p - z).norm())),
        }
    }

    pub fn diameter(&self) -> T {
        match &self.boundary {
            Boundary::Circle(d) => d.r + d.r,
            Boundary::Polyline(v) => diameter_of(v),
        }
    }

    /// Euclidean area.
    pub fn area(&self) -> T {
        match &self.boundary {
            Boundary::Circle(d) => T::PI() * d.r * d.r,
            Boundary::Polyline(v) => {
                let n = v.len();
                (0..n).fold(T::zero(), |s, i| s + cross(v[i], v[(i + 1) % n])) * lit(0.5)
            }
        }
    }

    fn check_inside(&self, z: Complex<T>) -> Result<(), GeometryError> {
        let dist = self.boundary_distance(z);
        if dist <= lit::<T>(1e-12) * (T::one() + self.scale()) {
            return Err(GeometryError::OnBoundary { distance: dist.to_f64_lossy() });
        }
        if !self.contains(z) {
            return Err(GeometryError::OutsideRegion);
        }
        Ok(())
    }

    /// Boundary point at parameter `t ∈ [0, 1)`, counterclockwise; polygons
    /// spend `1/n` of the parameter on each edge.
    pub fn point_at(&self, t: T) -> Complex<T> {
        let t = t - t.floor();
        match &self.boundary {
            Boundary::Circle(d) => d.c + Complex::from_polar(d.r, T::TAU() * t),
            Boundary::Polyline(v) => {
                let n = v.len();
                let s = t * from_usize::<T>(n);
                let i = s.floor().to_usize().unwrap_or(0).min(n - 1);
                let u = s - from_usize::<T>(i);
                v[i] + (v[(i + 1) % n] - v[i]) * u
            }
        }
    }

    /// Initial boundary parameters: uniform for circles, each polygon edge
    /// split into `per_edge` pieces.
    pub(crate) fn parameter_grid(&self, circle_samples: usize, per_edge: usize) -> Vec<T> {
        let m = match &self.boundary {
            Boundary::Circle(_) => circle_samples.max(8),
            Boundary::Polyline(v) => v.len() * per_edge.max(1),
        };
        (0..m).map(|i| from_usize::<T>(i) / from_usize::<T>(m)).collect()
    }
}

/// `max/min` distance from `z` to the boundary, Euclidean.
pub fn shape<T: Real>(region: &Region<T>, z: Complex<T>) -> Result<T, GeometryError> {
    shape_with(region, z, Metric::Euclidean)
}

fn chordal<T: Real>(a: Complex<T>, b: Complex<T>) -> T {
    let two = lit::<T>(2.0);
    two * (a - b).norm() / ((T::one() + a.norm_sqr()) * (T::one() + b.norm_sqr())).sqrt()
}

/// `Shape(U, z)` in the chosen metric. The chordal variant samples the
/// boundary and refines the extremes by golden-section search.
pub fn shape_with<T: Real>(region: &Region<T>, z: Complex<T>, metric: Metric) -> Result<T, GeometryError> {
    region.check_inside(z)?;
    match metric {
        Metric::Euclidean => Ok(region.far_distance(z) / region.boundary_distance(z)),
        Metric::Chordal => {
            let g = |t: T| chordal(region.point_at(t), z);
            let n = match region.boundary() {
                Boundary::Circle(_) => 2048,
                Boundary::Polyline(v) => 64 * v.len(),
            };
            let h = T::one() / from_usize::<T>(n);
            let samples: Vec<T> = (0..n).map(|i| g(from_usize::<T>(i) * h)).collect();
            let (mut imin, mut imax) = (0, 0);
            for (i, &s) in samples.iter().enumerate() {
                if s < samples[imin] {
                    imin = i;
                }
                if s > samples[imax] {
                    imax = i;
                }
            }
            let lo = golden(|t| g(t), from_usize::<T>(imin) * h - h, from_usize::<T>(imin) * h + h);
            let hi = -golden(|t| -g(t), from_usize::<T>(imax) * h - h, from_usize::<T>(imax) * h + h);
            Ok(hi.max(samples[imax]) / lo.min(samples[imin]))
        }
    }
}

/// Minimum value of a unimodal `f` on `[a, b]`.
fn golden<T: Real>(f: impl Fn(T) -> T, mut a: T, mut b: T) -> T {
    let phi = lit::<T>(0.618_033_988_749_894_8);
    let mut x1 = b - (b - a) * phi;
    let mut x2 = a + (b - a) * phi;
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - (b - a) * phi;
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + (b - a) * phi;
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

/// Convex hull by the monotone chain.
fn hull<T: Real>(points: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap_or(std::cmp::Ordering::Equal).then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut out: Vec<Complex<T>> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let start = out.len();
        let iter: Box<dyn Iterator<Item = &Complex<T>>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while out.len() >= start + 2 && cross(out[out.len() - 1] - out[out.len() - 2], q - out[out.len() - 2]) <= T::zero() {
                out.pop();
            }
            out.push(q);
        }
        out.pop();
    }
    out
}

/// Largest distance between two of the points.
pub fn diameter_of<T: Real>(points: &[Complex<T>]) -> T {
    let h = hull(points);
    let mut best = T::zero();
    for i in 0..h.len() {
        for j in i + 1..h.len() {
            best = best.max((h[i] - h[j]).norm());
        }
    }
    best
}
