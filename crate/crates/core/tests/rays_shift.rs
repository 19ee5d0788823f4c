mod common;

use common::c;
use paramray::portrait::quadratic_portrait;
use paramray::rays::{landing_point, trace_ray, RayTerminal, StepControl};
use paramray::shift_locus::continue_param_ray;
use paramray::{Angle, CriticalPortrait, Field, Poly};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ray_samples_sit_on_their_potentials(num in 0u64..31, cre in -0.8..0.3f64, cim in -0.6..0.6f64) {
        let f = Poly::quadratic(c(cre, cim));
        let field = Field::new(&f).unwrap();
        let s_start = 4f64.max(2.0 * field.max_value_rate());
        let path = trace_ray(&f, &Angle::frac(num, 31), s_start, 0.05, &StepControl::default());
        prop_assume!(path.is_ok());
        let path = path.unwrap();
        for w in path.samples.windows(2) {
            prop_assert!(w[1].potential < w[0].potential);
        }
        for s in &path.samples {
            let g = common::green(2, &[c(cre, cim)], s.point, 4000);
            prop_assert!((g - s.potential).abs() < 1e-9 * (1.0 + s.potential), "G = {} at s = {}", g, s.potential);
        }
    }

    #[test]
    fn quadratic_parameter_ray_is_the_mandelbrot_ray(num in 1u64..40, den in prop::sample::select(vec![5u64, 7, 12, 24, 40])) {
        prop_assume!(num < den);
        let portrait = quadratic_portrait(&Angle::frac(num, den));
        let path = continue_param_ray(&portrait, 8.0, 0.05, 0.7).unwrap();
        for p in &path {
            let cc = p.poly.coeffs()[0];
            // |ψ_c(c)| = e^r, i.e. G_c(c) = r, by direct iteration.
            let g = common::green(2, &[cc], cc, 4000);
            prop_assert!((g - p.r).abs() < 1e-9, "r = {}: G = {}", p.r, g);
            prop_assert!(p.residual < 1e-9);
        }
        for w in path.windows(2) {
            prop_assert!((w[0].poly.coeffs()[0] - w[1].poly.coeffs()[0]).norm() >= 1e-12);
        }
    }
}

#[test]
fn conjugate_portraits_give_conjugate_polynomials() {
    let p = CriticalPortrait::from_fracs(3, &[&[(1, 9), (4, 9)], &[(5, 9), (8, 9)]]).unwrap_or_else(|_| {
        CriticalPortrait::from_fracs(3, &[&[(1, 6), (1, 2)], &[(2, 3), (5, 6)]]).unwrap()
    });
    let q = p.conjugate();
    let a = continue_param_ray(&p, 10.0, 0.5, 0.8).unwrap();
    let b = continue_param_ray(&q, 10.0, 0.5, 0.8).unwrap();
    for (x, y) in a.iter().zip(&b) {
        for (u, v) in x.poly.coeffs().iter().zip(y.poly.coeffs()) {
            assert!((u - v.conj()).norm() < 1e-10);
        }
    }
}

#[test]
fn cubic_critical_value_rates_equal_r() {
    let p = CriticalPortrait::from_fracs(3, &[&[(1, 9), (4, 9), (7, 9)]]).unwrap();
    for pt in continue_param_ray(&p, 6.0, 0.3, 0.75).unwrap() {
        let coeffs = pt.poly.coeffs().to_vec();
        for &cp in &pt.critical_points {
            let g = common::green(3, &coeffs, pt.poly.evaluate(cp), 4000);
            assert!((g - pt.r).abs() < 1e-8, "r = {}: {g}", pt.r);
        }
    }
}

#[test]
fn periodic_rays_land_on_cycles() {
    for (cc, num, den) in [
        (c(-1.0, 0.0), 1u64, 3u64),
        (c(-2.0, 0.0), 1, 3),
        (c(0.2, 0.0), 2, 5),
        (c(0.0, 0.0), 1, 3),
        (c(0.0, 1.0), 1, 7),
    ] {
        let f = Poly::quadratic(cc);
        let theta = Angle::frac(num, den);
        let period = theta.orbit(2).period;
        // Slow geometric convergence near weakly repelling cycles; 1e-7 is
        // what the basilica attains.
        let (z, _) = landing_point(&f, &theta, 1e-7).unwrap();
        let mut w = z;
        for _ in 0..period {
            w = f.evaluate(w);
        }
        assert!((w - z).norm() < 1e-5, "{theta} for c = {cc}: |f^p(z) - z| = {:e}", (w - z).norm());
    }
}

#[test]
fn disconnected_half_ray_bifurcates() {
    let f = Poly::quadratic(c(0.5, 0.0));
    let path = trace_ray(&f, &Angle::frac(1, 2), 4.0, 0.0, &StepControl::default()).unwrap();
    assert!(matches!(path.terminal, RayTerminal::Bifurcated { .. }));
}
