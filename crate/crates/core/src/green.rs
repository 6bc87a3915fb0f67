//! Free-space Green's functions for `curl curl - k^2`.
//!
//! The dyadic kernel is `G = g I + (1/k^2) grad grad g` with
//! `g = exp(ik r) / (4 pi r)`. Writing `x = r xhat`, the second derivatives are
//!
//! ```text
//! d_i d_j g = g * [ (ik r - 1)/r^2 * delta_ij + (3 - 3ik r - k^2 r^2)/r^2 * xhat_i xhat_j ]
//! ```
//!
//! so that `G = g * [ alpha delta_ij + beta xhat_i xhat_j ]` with
//! `alpha = 1 + (ik r - 1)/(k r)^2` and `beta = (3 - 3ik r - (k r)^2)/(k r)^2`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Result, VieError};
use crate::vec3::{self, CVec3, Vec3};

/// Symmetric complex 3x3 matrix, stored as its six distinct entries
/// `[xx, yy, zz, xy, xz, yz]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicValue {
    packed: [Complex64; 6],
}

/// Position of `(i, j)` in the packed storage.
pub const fn packed_index(i: usize, j: usize) -> usize {
    match (i, j) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (0, 1) | (1, 0) => 3,
        (0, 2) | (2, 0) => 4,
        _ => 5,
    }
}

impl DyadicValue {
    pub fn from_packed(packed: [Complex64; 6]) -> Self {
        Self { packed }
    }

    /// `alpha I + beta u u^T`.
    pub fn isotropic_plus_rank_one(alpha: Complex64, beta: Complex64, u: Vec3) -> Self {
        Self {
            packed: [
                alpha + beta * u[0] * u[0],
                alpha + beta * u[1] * u[1],
                alpha + beta * u[2] * u[2],
                beta * u[0] * u[1],
                beta * u[0] * u[2],
                beta * u[1] * u[2],
            ],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.packed[packed_index(i, j)]
    }

    pub fn packed(&self) -> [Complex64; 6] {
        self.packed
    }

    pub fn entries(&self) -> [[Complex64; 3]; 3] {
        let mut m = [[Complex64::new(0.0, 0.0); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.get(i, j);
            }
        }
        m
    }

    pub fn apply(&self, v: CVec3) -> CVec3 {
        [0, 1, 2].map(|i| (0..3).map(|j| self.get(i, j) * v[j]).sum())
    }
}

fn radius(x: Vec3) -> Result<f64> {
    let r = vec3::norm(x);
    if r == 0.0 || !r.is_finite() {
        Err(VieError::Singularity)
    } else {
        Ok(r)
    }
}

/// `exp(ik|x|) / (4 pi |x|)`.
pub fn scalar_green(x: Vec3, k: f64) -> Result<Complex64> {
    let r = radius(x)?;
    Ok(green_at(r, k))
}

#[inline]
pub(crate) fn green_at(r: f64, k: f64) -> Complex64 {
    Complex64::new(0.0, k * r).exp() / (4.0 * PI * r)
}

/// `grad g(x) = g (ik - 1/r) x / r`.
pub fn grad_scalar_green(x: Vec3, k: f64) -> Result<CVec3> {
    let r = radius(x)?;
    let f = green_at(r, k) * Complex64::new(-1.0 / r, k) / r;
    Ok(x.map(|c| f * c))
}

/// Closed-form dyadic Green tensor `g delta_ij + (1/k^2) d_i d_j g`.
pub fn green_tensor(x: Vec3, k: f64) -> Result<DyadicValue> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(VieError::Parameter(format!("green_tensor needs k > 0, got {k}")));
    }
    let r = radius(x)?;
    let (alpha, beta) = tensor_radial_factors(r, k);
    Ok(DyadicValue::isotropic_plus_rank_one(alpha, beta, vec3::scale(x, 1.0 / r)))
}

/// `(g alpha, g beta)` so that `G = g alpha I + g beta xhat xhat^T`.
#[inline]
pub(crate) fn tensor_radial_factors(r: f64, k: f64) -> (Complex64, Complex64) {
    let g = green_at(r, k);
    let kr = k * r;
    let kr2 = kr * kr;
    let ikr = Complex64::new(0.0, kr);
    let alpha = 1.0 + (ikr - 1.0) / kr2;
    let beta = (3.0 - 3.0 * ikr - kr2) / kr2;
    (g * alpha, g * beta)
}

/// Directional derivative `(dir . grad) G(x)`, entries of a symmetric matrix.
pub fn green_tensor_directional_derivative(x: Vec3, k: f64, dir: Vec3) -> Result<DyadicValue> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(VieError::Parameter(format!("green_tensor needs k > 0, got {k}")));
    }
    let r = radius(x)?;
    let u = vec3::scale(x, 1.0 / r);
    let e = Complex64::new(0.0, k * r).exp() / (4.0 * PI);
    let i = Complex64::i();
    let (r2, r3, r4) = (r * r, r * r * r, r * r * r * r);
    let k2 = k * k;
    // radial derivatives of g*alpha and g*beta
    let da = e * (i * k / r - 2.0 / r2 - 3.0 * i / (k * r3) + 3.0 / (k2 * r4));
    let db = e * (-i * k / r + 4.0 / r2 + 9.0 * i / (k * r3) - 9.0 / (k2 * r4));
    let (_, gb) = tensor_radial_factors(r, k);
    let ud = vec3::dot(u, dir);
    let mut packed = [Complex64::new(0.0, 0.0); 6];
    for a in 0..3 {
        for b in a..3 {
            let delta = if a == b { 1.0 } else { 0.0 };
            let v = da * ud * delta
                + db * ud * u[a] * u[b]
                + gb * (dir[a] * u[b] + dir[b] * u[a] - 2.0 * u[a] * u[b] * ud) / r;
            packed[packed_index(a, b)] = v;
        }
    }
    Ok(DyadicValue::from_packed(packed))
}

/// Fourier-space tensor
/// `(delta_ij - xi_i xi_j / k^2) / ((2 pi)^3 (|xi|^2 - k^2))`.
pub fn green_tensor_fourier(xi: Vec3, k: f64) -> Result<DyadicValue> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(VieError::Parameter(format!("green_tensor_fourier needs k > 0, got {k}")));
    }
    let k2 = k * k;
    let denom = vec3::dot(xi, xi) - k2;
    if denom.abs() <= 1e-14 * k2 {
        return Err(VieError::ResonantDenominator);
    }
    let c = 1.0 / ((2.0 * PI).powi(3) * denom);
    let mut packed = [Complex64::new(0.0, 0.0); 6];
    for a in 0..3 {
        for b in a..3 {
            let delta = if a == b { 1.0 } else { 0.0 };
            packed[packed_index(a, b)] = Complex64::from(c * (delta - xi[a] * xi[b] / k2));
        }
    }
    Ok(DyadicValue::from_packed(packed))
}
