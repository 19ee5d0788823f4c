//! Numerics for monic centered polynomials `z^d + a_{d−2} z^{d−2} + … + a_0`.
//!
//! * [`portrait`]: exact angles, critical portraits and their combinatorics.
//! * [`potential`]: Green's function and Böttcher coordinates.
//! * [`rays`]: external rays traced by continuation in the potential.
//! * [`shift_locus`]: parameter rays `r ↦ f_r(Θ)` and landing probes.
//! * [`geometry`]: shape, moduli, the `ρ*` area, disk systems and backward
//!   stability of disks.
//! * [`io`]: CSV and JSON formats.
//!
//! Numeric code is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix `f64`, with `…32` variants for `f32`.

pub mod dual;
pub mod geometry;
pub mod io;
pub(crate) mod linalg;
pub mod poly;
pub mod portrait;
pub mod potential;
pub mod quad;
pub mod rays;
pub mod scalar;
pub mod shift_locus;

pub use portrait::{Angle, CriticalPortrait, PortraitBlock};
pub use scalar::Real;

pub type Poly = poly::MonicPolynomial<f64>;
pub type Poly32 = poly::MonicPolynomial<f32>;
pub type Field = potential::PotentialField<f64>;
pub type Field32 = potential::PotentialField<f32>;
pub type Ray = rays::RayPath<f64>;
pub type Ray32 = rays::RayPath<f32>;
pub type ParamPoint = shift_locus::ParamRayPoint<f64>;
pub type ParamPoint32 = shift_locus::ParamRayPoint<f32>;
pub type Landing = shift_locus::LandingDiagnostics<f64>;
pub type Landing32 = shift_locus::LandingDiagnostics<f32>;
pub type Region = geometry::Region<f64>;
pub type Region32 = geometry::Region<f32>;
pub type Disk = geometry::Disk<f64>;
pub type Disk32 = geometry::Disk<f32>;
