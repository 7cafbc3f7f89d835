//! Real roots of polynomials of degree at most three.

use std::f64::consts::PI;

/// Real roots of `a z³ + b z² + c z + d`, ascending, each polished by Newton
/// steps on the original coefficients. Returns `None` for the zero polynomial.
pub fn real_roots(a: f64, b: f64, c: f64, d: f64) -> Option<Vec<f64>> {
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if scale == 0.0 {
        return None;
    }
    let (a, b, c, d) = (a / scale, b / scale, c / scale, d / scale);
    let mut roots = if a == 0.0 {
        quadratic_roots(b, c, d)?
    } else if a.abs() < 1e-9 * b.abs().max(c.abs()).max(d.abs()) {
        // One root escapes to infinity; the others follow the quadratic part.
        let mut q = quadratic_roots(b, c, d).unwrap_or_default();
        let sum: f64 = q.iter().sum();
        if q.len() == 2 {
            q.push(-b / a - sum);
        }
        q
    } else {
        monic_cubic_roots(b / a, c / a, d / a)
    };
    if a != 0.0 || b != 0.0 {
        for z in roots.iter_mut() {
            *z = polish(a, b, c, d, *z);
        }
    }
    roots.sort_by(f64::total_cmp);
    Some(roots)
}

/// Roots of `a z² + b z + c` using the cancellation-free form.
fn quadratic_roots(a: f64, b: f64, c: f64) -> Option<Vec<f64>> {
    if a == 0.0 {
        if b == 0.0 {
            return if c == 0.0 { None } else { Some(vec![]) };
        }
        return Some(vec![-c / b]);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Some(vec![]);
    }
    let sign = if b >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (b + sign * disc.sqrt());
    if q == 0.0 {
        return Some(vec![0.0, 0.0]);
    }
    Some(vec![q / a, c / q])
}

fn monic_cubic_roots(p: f64, q: f64, r: f64) -> Vec<f64> {
    // z = y - p/3 gives y³ + big_p y + big_q = 0.
    let shift = p / 3.0;
    let big_p = q - p * p / 3.0;
    let big_q = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
    let disc = (big_q / 2.0).powi(2) + (big_p / 3.0).powi(3);
    if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-big_q / 2.0 + sq).cbrt();
        let v = (-big_q / 2.0 - sq).cbrt();
        vec![u + v - shift]
    } else if big_p == 0.0 {
        vec![-shift]
    } else {
        let m = 2.0 * (-big_p / 3.0).sqrt();
        let arg = (3.0 * big_q / (big_p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * PI * f64::from(k) / 3.0).cos() - shift)
            .collect()
    }
}

fn polish(a: f64, b: f64, c: f64, d: f64, mut z: f64) -> f64 {
    for _ in 0..4 {
        let f = ((a * z + b) * z + c) * z + d;
        let df = (3.0 * a * z + 2.0 * b) * z + c;
        if df == 0.0 || !f.is_finite() {
            break;
        }
        let next = z - f / df;
        if !next.is_finite() || (f.abs() <= f64::EPSILON * scale_at(a, b, c, d, z)) {
            break;
        }
        // Keep the step only if it lowers the residual.
        let fn_ = ((a * next + b) * next + c) * next + d;
        if fn_.abs() >= f.abs() {
            break;
        }
        z = next;
    }
    z
}

fn scale_at(a: f64, b: f64, c: f64, d: f64, z: f64) -> f64 {
    (a * z * z * z).abs() + (b * z * z).abs() + (c * z).abs() + d.abs()
}

/// Relative defect `|p(z)| / Σ|terms|`, used to certify a root.
pub fn relative_defect(a: f64, b: f64, c: f64, d: f64, z: f64) -> f64 {
    let value = ((a * z + b) * z + c) * z + d;
    let scale = scale_at(a, b, c, d, z);
    if scale == 0.0 {
        0.0
    } else {
        value.abs() / scale
    }
}
