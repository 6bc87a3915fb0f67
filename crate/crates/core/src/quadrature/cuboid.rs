//! Closed-form Newtonian potential of a uniform cuboid and its gradient.
//!
//! `newton_potential(p, lo, hi) = int_box dy / |p - y|` (no `1/4 pi`).

use crate::vec3::Vec3;

/// `ln(x + sqrt(x^2 + rho2))`, stable for negative `x`.
#[inline]
fn log_x_plus_r(x: f64, r: f64, rho2: f64) -> f64 {
    if x >= 0.0 {
        (x + r).ln()
    } else {
        (rho2 / (r - x)).ln()
    }
}

/// `c * ln(x + r)` with the convention `0 * ln(0) = 0`.
#[inline]
fn coeff_log(c: f64, x: f64, r: f64, rho2: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * log_x_plus_r(x, r, rho2)
    }
}

#[inline]
fn coeff_atan(c: f64, num: f64, den: f64) -> f64 {
    if c == 0.0 || num == 0.0 {
        0.0
    } else {
        c * (num / den).atan()
    }
}

/// Corner antiderivative with `d^3 F / dX dY dZ = 1 / R`.
fn corner_potential(x: f64, y: f64, z: f64) -> f64 {
    let (x2, y2, z2) = (x * x, y * y, z * z);
    let r = (x2 + y2 + z2).sqrt();
    if r == 0.0 {
        return 0.0;
    }
    coeff_log(y * z, x, r, y2 + z2) + coeff_log(x * z, y, r, x2 + z2) + coeff_log(x * y, z, r, x2 + y2)
        - 0.5 * coeff_atan(x2, y * z, x * r)
        - 0.5 * coeff_atan(y2, x * z, y * r)
        - 0.5 * coeff_atan(z2, x * y, z * r)
}

/// Corner antiderivative of `1 / R` over a rectangle `(Y, Z)` at offset `X`.
fn corner_face(x: f64, y: f64, z: f64) -> f64 {
    let (x2, y2, z2) = (x * x, y * y, z * z);
    let r = (x2 + y2 + z2).sqrt();
    if r == 0.0 {
        return 0.0;
    }
    coeff_log(y, z, r, x2 + y2) + coeff_log(z, y, r, x2 + z2) - coeff_atan(x, y * z, x * r)
}

/// `int_{[lo, hi]} dy / |p - y|`.
pub fn newton_potential(p: Vec3, lo: Vec3, hi: Vec3) -> f64 {
    let xs = [lo[0] - p[0], hi[0] - p[0]];
    let ys = [lo[1] - p[1], hi[1] - p[1]];
    let zs = [lo[2] - p[2], hi[2] - p[2]];
    let mut total = 0.0;
    for (a, x) in xs.iter().enumerate() {
        for (b, y) in ys.iter().enumerate() {
            for (c, z) in zs.iter().enumerate() {
                let sign = if (a + b + c) % 2 == 1 { 1.0 } else { -1.0 };
                total += sign * corner_potential(*x, *y, *z);
            }
        }
    }
    total
}

/// `int_{[lo, hi]} dY dZ / sqrt(X^2 + Y^2 + Z^2)` for rectangles in the plane `X`.
fn face_integral(x: f64, ylo: f64, yhi: f64, zlo: f64, zhi: f64) -> f64 {
    corner_face(x, yhi, zhi) - corner_face(x, ylo, zhi) - corner_face(x, yhi, zlo)
        + corner_face(x, ylo, zlo)
}

/// Gradient of [`newton_potential`] with respect to the observation point `p`.
pub fn newton_potential_gradient(p: Vec3, lo: Vec3, hi: Vec3) -> Vec3 {
    let mut g = [0.0; 3];
    for a in 0..3 {
        let b = (a + 1) % 3;
        let c = (a + 2) % 3;
        let face = |xa: f64| {
            face_integral(xa - p[a], lo[b] - p[b], hi[b] - p[b], lo[c] - p[c], hi[c] - p[c])
        };
        // d/dp_a int 1/|p-y| dy = -(face(hi) - face(lo))
        g[a] = face(lo[a]) - face(hi[a]);
    }
    g
}
