use num_complex::Complex;

use super::*;
use crate::potential::{critical_value_rates, PotentialField};

fn quad(theta: (u64, u64)) -> CriticalPortrait {
    crate::portrait::quadratic_portrait(&crate::portrait::Angle::frac(theta.0, theta.1))
}

fn cubic_star() -> CriticalPortrait {
    CriticalPortrait::from_fracs(3, &[&[(1, 9), (4, 9), (7, 9)]]).unwrap()
}

/// Recomputes `ψ(v_j)` from scratch and compares with `e^{r + 2πiφ_j}`.
fn bottcher_defect(p: &ParamRayPoint<f64>, portrait: &CriticalPortrait) -> f64 {
    let field = PotentialField::new(&p.poly).unwrap();
    let mut worst: f64 = 0.0;
    for (j, c) in p.critical_points.iter().enumerate() {
        let v = p.poly.evaluate(*c);
        let w = Complex::new(0.0, p.witness.lifted_args[j]);
        let lg = field.log_bottcher(v, Some(w)).unwrap();
        let phi: f64 = portrait.block_image(j).to_real();
        let want = Complex::new(p.r, std::f64::consts::TAU * phi);
        let got = Complex::new(lg.re, lg.im);
        let diff = Complex::from_polar(1.0, (got - want).im);
        worst = worst.max((lg.re - p.r).abs()).max((diff - 1.0).norm());
    }
    worst
}

#[test]
fn large_r_quadratic_is_near_identity() {
    let g = initial_guess::<f64>(&quad((1, 6)), 10.0).unwrap();
    let want = Complex::from_polar(10f64.exp(), std::f64::consts::PI / 3.0);
    assert!((g.coeffs()[0] - want).norm() < 1e-9 * want.norm());
    let g = initial_guess::<f64>(&cubic_star(), 10.0).unwrap();
    let want = Complex::from_polar(10f64.exp(), std::f64::consts::TAU / 3.0);
    assert!((g.coeffs()[0] - want).norm() < 1e-9 * want.norm());
    assert!(g.coeffs()[1].norm() < 1e-6);
}

#[test]
fn half_ray_at_r10_is_negative_real() {
    let p = quad((1, 2));
    let g = initial_guess::<f64>(&p, 10.0).unwrap();
    let pt = solve_f_r(&p, 10.0, &g, None).unwrap();
    let c = pt.poly.coeffs()[0];
    assert!(c.re < 0.0 && c.im.abs() < 1e-6, "{c}");
    assert!((c.re + 10f64.exp()).abs() < 1.0, "{c}");
}

#[test]
fn sixth_path_residuals() {
    let p = quad((1, 6));
    let path = continue_param_ray(&p, 10.0, 0.1, 0.8).unwrap();
    assert!(path.len() > 10);
    for pt in &path {
        assert!(pt.residual < 1e-10, "r = {} residual {}", pt.r, pt.residual);
        assert!(bottcher_defect(pt, &p) < 1e-9);
        let rates = critical_value_rates(&pt.poly).unwrap();
        assert!(rates.iter().all(|(_, g)| (g - pt.r).abs() < 1e-8));
    }
    for w in path.windows(2) {
        let dist = (w[0].poly.coeffs()[0] - w[1].poly.coeffs()[0]).norm();
        assert!(dist >= 1e-12);
    }
}

#[test]
fn cubic_star_round_trip() {
    let p = cubic_star();
    let path = continue_param_ray(&p, 10.0, 0.5, 0.7).unwrap();
    for pt in path.iter().filter(|pt| [2.0f64, 1.0, 0.5].iter().any(|r| (pt.r - r).abs() < 1e-12)) {
        assert_eq!(portrait_of(&pt.poly, Some(pt.r)).unwrap(), p);
    }
}

#[test]
fn snapping() {
    assert_eq!(snap_angle(1.0 / 12.0 + 1e-12, 1_000_000, 1e-7).unwrap(), crate::portrait::Angle::frac(1, 12));
    assert_eq!(snap_angle(0.999_999_999_99, 1_000_000, 1e-7).unwrap(), crate::portrait::Angle::zero());
    assert!(snap_angle(std::f64::consts::PI - 3.0, 100, 1e-9).is_none());
}

#[test]
fn z2_minus_6_portrait() {
    let f = MonicPolynomial::quadratic(Complex::new(-6.0, 0.0));
    let p = portrait_of(&f, None).unwrap();
    assert_eq!(p, quad((1, 2)));
}

#[test]
fn misiurewicz_sixth_lands_at_i() {
    let d = landing_probe::<f64>(&quad((1, 6)), 1e-6, 1e-3).unwrap();
    assert_eq!(d.verdict, Verdict::Landed);
    assert!(!d.sub_geometric);
    assert!(d.decay_ratio < 0.95);
    assert!((d.extrapolated_limit.coeffs()[0] - Complex::new(0.0, 1.0)).norm() < 1e-6);
    assert_eq!(d.schedule_factor, 4);
    for w in d.r_schedule.windows(2) {
        assert!(w[1] < w[0]);
    }
}

#[test]
fn chebyshev_tip_and_root_point() {
    let d = landing_probe::<f64>(&quad((1, 2)), 1e-6, 1e-4).unwrap();
    assert!((d.extrapolated_limit.coeffs()[0] - Complex::new(-2.0, 0.0)).norm() < 1e-8);
    assert!(d.limits.iter().all(|p| p.coeffs()[0].im.abs() < 1e-10));
    let d = landing_probe::<f64>(&quad((0, 1)), 1e-6, 1e-3).unwrap();
    assert!(d.sub_geometric);
    assert_eq!(d.method, Extrapolation::LogFit);
    assert!((d.extrapolated_limit.coeffs()[0] - Complex::new(0.25, 0.0)).norm() < 1e-3);
}

#[test]
fn two_block_cubic_round_trip_and_symmetry() {
    let p = CriticalPortrait::from_fracs(3, &[&[(1, 6), (1, 2)], &[(0, 1), (2, 3)]]).unwrap();
    let path = continue_param_ray::<f64>(&p, 10.0, 1.0, 0.8).unwrap();
    let last = path.last().unwrap();
    assert!((last.r - 1.0).abs() < 1e-12);
    assert_eq!(portrait_of(&last.poly, Some(1.0)).unwrap(), p);
    assert!(bottcher_defect(last, &p) < 1e-9);
    let q = p.conjugate();
    let conj = continue_param_ray(&q, 10.0, 1.0, 0.8).unwrap();
    let a = last.poly.conj();
    let b = &conj.last().unwrap().poly;
    for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
        assert!((x - y).norm() < 1e-10, "{x} vs {y}");
    }
}

#[test]
fn solver_errors() {
    let p = quad((1, 6));
    let g = MonicPolynomial::quadratic(Complex::new(0.1, 0.5));
    assert!(matches!(solve_f_r(&p, 1.0, &g, None), Err(ShiftError::BranchAmbiguity { .. })));
    let bad = CriticalPortrait::from_fracs(3, &[&[(0, 1), (1, 2)]]).unwrap();
    assert!(matches!(continue_param_ray::<f64>(&bad, 10.0, 1.0, 0.8), Err(ShiftError::InvalidPortrait(_))));
    assert!(matches!(continue_param_ray::<f64>(&p, 1.0, 2.0, 0.8), Err(ShiftError::InvalidArgument(_))));
    let inside = MonicPolynomial::quadratic(Complex::new(-1.0, 0.0));
    assert!(matches!(portrait_of(&inside, None), Err(ShiftError::NotInShiftLocus { .. })));
}

#[test]
fn witness_chaining_from_public_solver() {
    let p = quad((1, 6));
    let g = initial_guess::<f64>(&p, 10.0).unwrap();
    let top = solve_f_r(&p, 10.0, &g, None).unwrap();
    let path = continue_param_ray(&p, 10.0, 2.0, 0.8).unwrap();
    let low = path.last().unwrap();
    let again = solve_f_r(&p, 2.0, &low.poly, Some(&top.witness)).unwrap();
    assert!((again.poly.coeffs()[0] - low.poly.coeffs()[0]).norm() < 1e-12);
}

#[test]
fn f32_path() {
    let path = continue_param_ray::<f32>(&quad((1, 6)), 10.0, 0.5, 0.8).unwrap();
    let c = path.last().unwrap().poly.coeffs()[0];
    let c64 = continue_param_ray::<f64>(&quad((1, 6)), 10.0, 0.5, 0.8).unwrap().last().unwrap().poly.coeffs()[0];
    assert!(((c.re as f64 - c64.re).powi(2) + (c.im as f64 - c64.im).powi(2)).sqrt() < 1e-3);
}

