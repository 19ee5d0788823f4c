mod common;

use std::f64::consts::PI;

use common::{c, C};
use paramray::geometry::{area_rho_star, modulus, preimage_components, shape, AnnulusSpec, Mobius};
use paramray::{Disk, Poly, Region};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;

/// Star-shaped polygon about `center`, counterclockwise by construction.
fn star_polygon() -> impl Strategy<Value = (Vec<(f64, f64)>, f64)> {
    (prop::collection::vec((0.0..1.0f64, 0.6..1.0f64), 6..14), 0.5..1.0f64)
}

fn build_star(spec: &(Vec<(f64, f64)>, f64), center: C, scale: f64) -> Vec<C> {
    let n = spec.0.len();
    (0..n)
        .map(|k| {
            let (jitter, radius) = spec.0[k];
            let t = (k as f64 + 0.8 * jitter) / n as f64;
            center + C::from_polar(scale * radius, 2.0 * PI * t)
        })
        .collect()
}

fn disk(x: f64, y: f64, r: f64) -> Disk {
    Disk::new(c(x, y), r).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn circle_pair_modulus_is_mobius_invariant(
        (ox, oy, or) in (-2.0..2.0f64, -2.0..2.0f64, 0.5..2.0f64),
        (t, u, v) in (0.0..1.0f64, 0.0..1.0f64, 0.1..0.8f64),
        (pa, pd, a, b) in (0.0..1.0f64, 0.3..3.0f64, (-2.0..2.0f64, -2.0..2.0f64), (-2.0..2.0f64, -2.0..2.0f64)),
    ) {
        let outer = disk(ox, oy, or);
        let r_in = v * or * 0.9;
        let room = or - r_in;
        let off = C::from_polar(0.9 * room * t, 2.0 * PI * u);
        let inner = disk(ox + off.re, oy + off.im, r_in);
        // Pole outside the closed outer disk, so both images are disks.
        let pole = outer.c + C::from_polar(or * (1.0 + pd), 2.0 * PI * pa);
        let m = Mobius::new(c(a.0, a.1), c(b.0, b.1), c(1.0, 0.0), -pole);
        prop_assume!(m.is_some());
        let m = m.unwrap();
        prop_assume!((c(a.0, a.1) * -pole - c(b.0, b.1)).norm() > 1e-2);
        let before = modulus(&AnnulusSpec::circle_pair(outer, inner).unwrap()).unwrap();
        let (mo, mi) = (m.map_disk(&outer).unwrap(), m.map_disk(&inner).unwrap());
        let after = modulus(&AnnulusSpec::circle_pair(mo, mi).unwrap()).unwrap();
        prop_assert!((before - after).abs() < 1e-9 * (1.0 + before), "{} vs {}", before, after);
    }

    #[test]
    fn area_is_bounded_by_shape_and_diameter(spec in star_polygon(), (x, y) in (-5.0..5.0f64, -5.0..5.0f64)) {
        let center = c(x, y);
        let region = Region::polygon(build_star(&spec, center, spec.1)).unwrap();
        let s = shape(&region, center).unwrap();
        let d = region.diameter();
        prop_assert!(s >= 1.0);
        prop_assert!(region.area() <= PI / 4.0 * s * s * d * d * (1.0 + 1e-12));
    }

    #[test]
    fn rho_star_area_of_off_origin_disks(r in 0.01..1.0f64, t in 1.05..20.0f64, phi in 0.0..(2.0 * PI)) {
        let center = C::from_polar(r * t, phi);
        let got = area_rho_star(&Region::disk(center, r).unwrap()).unwrap();
        let want = -(1.0 - 1.0 / (t * t)).ln() / (4.0 * PI);
        prop_assert!((got - want).abs() < 1e-6 * want.max(1.0), "{} vs {}", got, want);
    }

    #[test]
    fn rho_star_area_of_round_annuli(r_in in 0.01..2.0f64, k in 1.01..50.0f64) {
        let a = AnnulusSpec::concentric(c(0.0, 0.0), r_in, r_in * k).unwrap();
        let got = area_rho_star(&a).unwrap();
        prop_assert!((got - k.ln() / (2.0 * PI)).abs() < 1e-6);
    }
}

#[test]
fn rho_star_area_ratio_is_bounded_below() {
    let mut runner = TestRunner::deterministic();
    let strategy = (star_polygon(), 0.0..(2.0 * PI), 10.0..40.0f64, 0.0..1.0f64, 1e-3..10.0f64);
    for cap in [2.0f64, 4.0] {
        let mut accepted = 0;
        let mut worst = f64::INFINITY;
        while accepted < 100 {
            let (spec, phi, dist, grow, scale) = strategy.new_tree(&mut runner).unwrap().current();
            let mut e = build_star(&spec, c(0.0, 0.0), scale);
            let reach = e.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            let r_u = reach * (1.0 + grow * (cap - 1.0));
            let x = C::from_polar(dist * r_u, phi);
            for z in &mut e {
                *z += x;
            }
            let region = Region::polygon(e).unwrap();
            let diam = region.diameter();
            if shape(&region, x).unwrap() > cap || 2.0 * r_u > cap * diam {
                continue;
            }
            accepted += 1;
            let ratio = area_rho_star(&region).unwrap() / area_rho_star(&Region::disk(x, r_u).unwrap()).unwrap();
            worst = worst.min(ratio);
        }
        // Euclidean: inradius ≥ reach / C and r_U ≤ C·reach. The density
        // 1/|z|² varies by at most (11/9)² over U since |x| ≥ 10 r_U.
        let bound = (9.0f64 / 11.0).powi(2) / cap.powi(4);
        assert!(worst >= bound, "C = {cap}: worst ratio {worst} below {bound}");
    }
}

#[test]
fn preimage_degrees_sum_to_the_iterate_degree() {
    let mut runner = TestRunner::deterministic();
    let strategy = ((-0.7..0.3f64, -0.6..0.6f64), (-0.5..0.5f64, -0.5..0.5f64), 0.05..0.6f64);
    let mut checked = 0;
    for _ in 0..40 {
        let ((cre, cim), (x, y), r) = strategy.new_tree(&mut runner).unwrap().current();
        let f = Poly::quadratic(c(cre, cim));
        let Ok(levels) = preimage_components(&f, &Region::disk(c(x, y), r).unwrap(), 3) else {
            continue;
        };
        checked += 1;
        for (k, level) in levels.iter().enumerate() {
            assert_eq!(level.degree_sum(), 1 << (k + 1), "c = {cre}+{cim}i, level {}", k + 1);
            for comp in &level.components {
                for &z in &comp.boundary {
                    let mut w = z;
                    for _ in 0..=k {
                        w = f.evaluate(w);
                    }
                    assert!(((w - c(x, y)).norm() - r).abs() < 1e-7, "boundary point off the circle");
                }
            }
        }
    }
    assert!(checked >= 20, "only {checked} configurations avoided critical values");
}
