//! Escape-time raster of the filled Julia set with curve overlays.

use std::fmt::Write as _;

use num_complex::Complex;
use paramray::Poly;

pub struct Overlay<'a> {
    pub points: &'a [Complex<f64>],
    pub color: &'a str,
}

/// Iterations before `|z|` exceeds `radius`, or `None` if it never does.
fn escape_time(f: &Poly, mut z: Complex<f64>, radius: f64, cap: usize) -> Option<usize> {
    for n in 0..cap {
        if z.norm_sqr() > radius * radius {
            return Some(n);
        }
        z = f.evaluate(z);
    }
    None
}

/// Square window around the filled Julia set, found on a coarse grid.
fn window(f: &Poly, radius: f64, cap: usize) -> (Complex<f64>, f64) {
    const N: usize = 128;
    let step = 2.0 * radius / N as f64;
    let (mut lo, mut hi) = (Complex::new(f64::MAX, f64::MAX), Complex::new(f64::MIN, f64::MIN));
    for i in 0..=N {
        for j in 0..=N {
            let z = Complex::new(-radius + i as f64 * step, -radius + j as f64 * step);
            if escape_time(f, z, radius, cap).is_none() {
                lo = Complex::new(lo.re.min(z.re), lo.im.min(z.im));
                hi = Complex::new(hi.re.max(z.re), hi.im.max(z.im));
            }
        }
    }
    if lo.re > hi.re {
        // Cantor dust the grid missed; show the escape disk.
        return (Complex::new(0.0, 0.0), radius);
    }
    let half = 0.5 * (hi.re - lo.re).max(hi.im - lo.im) + 2.0 * step;
    ((lo + hi) * 0.5, half * 1.15)
}

/// SVG of `size × size` pixels. Interior pixels are black, escaping ones
/// are shaded by escape time, and each overlay is drawn as a polyline.
pub fn render(f: &Poly, overlays: &[Overlay<'_>], size: usize, cap: usize) -> String {
    let radius = f.escape_radius();
    let (center, half) = window(f, radius, cap);
    let px = 2.0 * half / size as f64;
    let x0 = center.re - half;
    let y1 = center.im + half;
    let shade = |e: Option<usize>| -> &'static str {
        match e {
            None => "#000",
            Some(n) if n < 3 => "#fff",
            Some(n) if n < 6 => "#ddd",
            Some(n) if n < 12 => "#aaa",
            Some(_) => "#777",
        }
    };

    let row_runs = |row: usize| -> String {
        let y = y1 - (row as f64 + 0.5) * px;
        let mut line = String::new();
        let mut start = 0;
        let mut current = shade(escape_time(f, Complex::new(x0 + 0.5 * px, y), radius, cap));
        for col in 1..=size {
            let next = if col < size {
                shade(escape_time(f, Complex::new(x0 + (col as f64 + 0.5) * px, y), radius, cap))
            } else {
                ""
            };
            if next != current {
                if current != "#fff" {
                    let _ = writeln!(line, r#"<rect x="{start}" y="{row}" width="{}" height="1" fill="{current}"/>"#, col - start);
                }
                start = col;
                current = next;
            }
        }
        line
    };
    // Rows are independent; bands go to scoped threads and are joined in order.
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(size.max(1));
    let band = size.div_ceil(threads.max(1));
    let rows: Vec<String> = std::thread::scope(|sc| {
        let handles: Vec<_> = (0..threads)
            .map(|t| {
                let row_runs = &row_runs;
                sc.spawn(move || ((t * band)..((t + 1) * band).min(size)).map(row_runs).collect::<String>())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("raster thread")).collect()
    });

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}" shape-rendering="crispEdges">"#
    );
    let _ = writeln!(out, r##"<rect width="{size}" height="{size}" fill="#fff"/>"##);
    out.extend(rows);
    for o in overlays {
        let mut pts = String::new();
        for z in o.points {
            let (u, v) = ((z.re - x0) / px, (y1 - z.im) / px);
            // Far samples only stretch the path; the viewBox clips them anyway.
            if u.abs() > 4.0 * size as f64 || v.abs() > 4.0 * size as f64 {
                continue;
            }
            let _ = write!(pts, "{u:.3},{v:.3} ");
        }
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            pts.trim_end(),
            o.color
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basilica_has_interior() {
        let f = Poly::quadratic(Complex::new(-1.0, 0.0));
        let pts = [Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)];
        let svg = render(&f, &[Overlay { points: &pts, color: "red" }], 40, 100);
        assert!(svg.contains("fill=\"#000\""));
        assert!(svg.contains("<polyline"));
        assert_eq!(svg, render(&f, &[Overlay { points: &pts, color: "red" }], 40, 100));
    }
}
