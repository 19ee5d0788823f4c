//! Adaptive Gauss–Kronrod (7/15) quadrature.

use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut k = fc * T::lit(WGK[7]);
    let mut g = fc * T::lit(WG[3]);
    for i in 0..7 {
        let dx = half * T::lit(XGK[i]);
        let s = f(mid - dx) + f(mid + dx);
        k = k + s * T::lit(WGK[i]);
        if i % 2 == 1 {
            g = g + s * T::lit(WG[i / 2]);
        }
    }
    (k * half, ((k - g) * half).abs())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `abs_tol` or relative
/// tolerance `rel_tol`, whichever is looser. Returns the estimate and the
/// summed error estimate.
pub fn integrate<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, abs_tol: T, rel_tol: T) -> (T, T) {
    let mut stack = vec![(a, b, kronrod(&mut f, a, b))];
    let mut total = T::zero();
    let mut err = T::zero();
    let mut evals = 0usize;
    let whole = stack[0].2 .0.abs();
    while let Some((lo, hi, (val, e))) = stack.pop() {
        evals += 1;
        let local_tol = abs_tol.max(rel_tol * whole) * (hi - lo) / (b - a);
        if e <= local_tol || evals > 200_000 || (hi - lo).abs() < (b - a).abs() * T::lit(1e-13) {
            total = total + val;
            err = err + e;
            continue;
        }
        let mid = (lo + hi) * T::lit(0.5);
        stack.push((lo, mid, kronrod(&mut f, lo, mid)));
        stack.push((mid, hi, kronrod(&mut f, mid, hi)));
    }
    (total, err)
}
