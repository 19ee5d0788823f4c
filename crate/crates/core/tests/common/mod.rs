//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's numerics; each routine is a direct, slow computation.
#![allow(dead_code)]

use std::collections::HashMap;

use num_complex::Complex;

pub type C = Complex<f64>;

pub fn c(re: f64, im: f64) -> C {
    Complex::new(re, im)
}

/// Horner evaluation of `z^d + Σ a_k z^k`.
pub fn eval(d: u32, coeffs: &[C], z: C) -> C {
    let mut acc = c(1.0, 0.0);
    for k in (0..d as usize).rev() {
        acc = acc * z + coeffs.get(k).copied().unwrap_or(c(0.0, 0.0));
    }
    acc
}

/// `G(z) = lim log|f^n(z)| / d^n`, iterating until `|f^n(z)| > 1e30`.
/// Returns 0 for points that stay bounded for `max_iter` steps.
pub fn green(d: u32, coeffs: &[C], z: C, max_iter: usize) -> f64 {
    let mut w = z;
    let mut scale = 1.0;
    for _ in 0..max_iter {
        if w.norm() > 1e30 {
            return w.norm().ln() * scale;
        }
        w = eval(d, coeffs, w);
        scale /= d as f64;
    }
    0.0
}

/// `c < −2` with `G_c(c) = r` for `z² + c`, by bisection on the real line.
pub fn real_bisection(r: f64) -> f64 {
    let g = |x: f64| green(2, &[c(x, 0.0)], c(x, 0.0), 4000);
    let (mut lo, mut hi) = (-2.0 * r.exp() - 4.0, -2.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Whether `num/den` is periodic under doubling, by walking its orbit.
pub fn doubling_periodic(num: u64, den: u64) -> bool {
    let g = gcd(num, den);
    let (n, m) = (num / g, den / g);
    let mut x = n;
    for _ in 0..=m {
        x = (2 * x) % m;
        if x == n {
            return true;
        }
    }
    false
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Extremal length of the curve family joining the two boundary circles,
/// from the Dirichlet energy of a P1 finite element solution on a mesh whose
/// spokes join `c_in + r_in e^{it}` to `c_out + r_out e^{it}`. The modulus is
/// the reciprocal of that energy.
pub fn fem_modulus(c_out: C, r_out: f64, c_in: C, r_in: f64, nt: usize, ns: usize) -> f64 {
    let idx = |i: usize, j: usize| (i % nt) * (ns + 1) + j;
    let node = |i: usize, j: usize| -> C {
        let t = std::f64::consts::TAU * (i % nt) as f64 / nt as f64;
        let e = C::from_polar(1.0, t);
        let s = j as f64 / ns as f64;
        (c_in + e * r_in) * (1.0 - s) + (c_out + e * r_out) * s
    };
    let n = nt * (ns + 1);
    let mut k: HashMap<(usize, usize), f64> = HashMap::new();
    let mut add_tri = |v: [(usize, usize); 3]| {
        let p: Vec<C> = v.iter().map(|&(i, j)| node(i, j)).collect();
        let ids: Vec<usize> = v.iter().map(|&(i, j)| idx(i, j)).collect();
        let area = 0.5 * ((p[1] - p[0]).conj() * (p[2] - p[0])).im.abs();
        for a in 0..3 {
            for b in 0..3 {
                let ea = p[(a + 2) % 3] - p[(a + 1) % 3];
                let eb = p[(b + 2) % 3] - p[(b + 1) % 3];
                let dot = ea.re * eb.re + ea.im * eb.im;
                *k.entry((ids[a], ids[b])).or_insert(0.0) += dot / (4.0 * area);
            }
        }
    };
    for i in 0..nt {
        for j in 0..ns {
            add_tri([(i, j), (i + 1, j), (i + 1, j + 1)]);
            add_tri([(i, j), (i + 1, j + 1), (i, j + 1)]);
        }
    }
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (&(a, b), &v) in &k {
        rows[a].push((b, v));
    }
    let fixed = |a: usize| {
        let j = a % (ns + 1);
        (j == 0 || j == ns).then_some(if j == ns { 1.0 } else { 0.0 })
    };
    let mut u: Vec<f64> = (0..n).map(|a| (a % (ns + 1)) as f64 / ns as f64).collect();
    let apply = |x: &[f64], out: &mut [f64]| {
        for a in 0..n {
            out[a] = if fixed(a).is_some() { 0.0 } else { rows[a].iter().filter(|(b, _)| fixed(*b).is_none()).map(|&(b, v)| v * x[b]).sum() };
        }
    };
    // b = −K_{free,fixed} u_fixed, then conjugate gradients on the free block.
    let mut rhs = vec![0.0; n];
    for a in 0..n {
        if fixed(a).is_none() {
            rhs[a] = -rows[a].iter().filter_map(|&(b, v)| fixed(b).map(|ub| v * ub)).sum::<f64>();
        }
    }
    let mut x: Vec<f64> = (0..n).map(|a| if fixed(a).is_some() { 0.0 } else { u[a] }).collect();
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = (0..n).map(|a| rhs[a] - ax[a]).collect();
    let mut p = r.clone();
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    let mut ap = vec![0.0; n];
    for _ in 0..20 * n {
        if rr.sqrt() < 1e-13 {
            break;
        }
        apply(&p, &mut ap);
        let alpha = rr / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for a in 0..n {
            x[a] += alpha * p[a];
            r[a] -= alpha * ap[a];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        for a in 0..n {
            p[a] = r[a] + (rr_new / rr) * p[a];
        }
        rr = rr_new;
    }
    for a in 0..n {
        u[a] = fixed(a).unwrap_or(x[a]);
    }
    let energy: f64 = (0..n).map(|a| rows[a].iter().map(|&(b, v)| u[a] * v * u[b]).sum::<f64>()).sum();
    1.0 / energy
}

/// Connected components (8-neighbour) of `{z : |f^k(z) − center| < radius}`
/// on a `res × res` grid over `[−half, half]²`, for `k = 1..=depth`.
pub fn grid_component_counts(d: u32, coeffs: &[C], center: C, radius: f64, depth: usize, res: usize, half: f64) -> Vec<usize> {
    assert!(depth <= 8);
    let h = 2.0 * half / res as f64;
    let mut mask = vec![0u8; res * res];
    for row in 0..res {
        let y = -half + (row as f64 + 0.5) * h;
        for col in 0..res {
            let mut w = c(-half + (col as f64 + 0.5) * h, y);
            let mut bits = 0u8;
            for k in 0..depth {
                w = eval(d, coeffs, w);
                if (w - center).norm() < radius {
                    bits |= 1 << k;
                }
                if w.norm() > 1e6 {
                    break;
                }
            }
            mask[row * res + col] = bits;
        }
    }
    let mut counts = Vec::with_capacity(depth);
    let mut stack = Vec::new();
    for k in 0..depth {
        let bit = 1u8 << k;
        let mut seen = vec![false; res * res];
        let mut count = 0;
        for start in 0..res * res {
            if mask[start] & bit == 0 || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(p) = stack.pop() {
                let (r0, c0) = ((p / res) as isize, (p % res) as isize);
                for dr in -1..=1 {
                    for dc in -1..=1 {
                        let (r1, c1) = (r0 + dr, c0 + dc);
                        if r1 < 0 || c1 < 0 || r1 >= res as isize || c1 >= res as isize {
                            continue;
                        }
                        let q = r1 as usize * res + c1 as usize;
                        if mask[q] & bit != 0 && !seen[q] {
                            seen[q] = true;
                            stack.push(q);
                        }
                    }
                }
            }
        }
        counts.push(count);
    }
    counts
}

/// Largest of the last `n` successive ratios of a positive sequence.
pub fn tail_ratio(v: &[f64], n: usize) -> f64 {
    let tail = &v[v.len().saturating_sub(n)..];
    tail.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max)
}
