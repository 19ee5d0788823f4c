//! Dense complex solves for the small Newton systems (size ≤ degree).

use num_complex::Complex;

use crate::scalar::Real;

/// Solves `a·x = b` by Gaussian elimination with partial pivoting.
/// `a` is row-major `n×n`. Returns `None` for a numerically singular matrix.
pub(crate) fn solve<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Option<Vec<Complex<T>>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().fold(T::zero(), |acc, v| acc.max(v.norm()));
    if scale == T::zero() {
        return None;
    }
    for col in 0..n {
        let (pivot, pmag) = (col..n)
            .map(|r| (r, m[r * n + col].norm()))
            .fold((col, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmag <= scale * T::epsilon() * T::lit(1e-2) {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            x.swap(col, pivot);
        }
        let p = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / p;
            if f == Complex::new(T::zero(), T::zero()) {
                continue;
            }
            for k in col..n {
                let v = m[col * n + k];
                m[r * n + k] = m[r * n + k] - f * v;
            }
            let xc = x[col];
            x[r] = x[r] - f * xc;
        }
    }
    for col in (0..n).rev() {
        let mut acc = x[col];
        for k in col + 1..n {
            acc = acc - m[col * n + k] * x[k];
        }
        x[col] = acc / m[col * n + col];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_with_pivoting() {
        let c = |re: f64, im: f64| Complex::new(re, im);
        let a = vec![c(0.0, 0.0), c(2.0, 1.0), c(1.0, 0.0), c(3.0, -1.0)];
        let x_true = vec![c(1.0, 2.0), c(-0.5, 0.25)];
        let b = vec![a[0] * x_true[0] + a[1] * x_true[1], a[2] * x_true[0] + a[3] * x_true[1]];
        let x = solve(&a, &b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-14);
        }
    }

    #[test]
    fn singular_is_none() {
        let a = vec![Complex::new(1.0, 0.0), Complex::new(2.0, 0.0), Complex::new(2.0, 0.0), Complex::new(4.0, 0.0)];
        assert!(solve(&a, &[Complex::new(1.0, 0.0), Complex::new(0.0, 0.0)]).is_none());
    }
}
