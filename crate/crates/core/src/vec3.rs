//! Minimal fixed-size vector helpers for positions and complex field vectors.

use num_complex::Complex64;

pub type Vec3 = [f64; 3];
pub type CVec3 = [Complex64; 3];

pub const CZERO3: CVec3 = [Complex64::new(0.0, 0.0); 3];

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn cadd(a: CVec3, b: CVec3) -> CVec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn csub(a: CVec3, b: CVec3) -> CVec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn cscale(a: CVec3, s: Complex64) -> CVec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Bilinear (non-conjugating) dot product of a real and a complex vector.
#[inline]
pub fn rdot(a: Vec3, b: CVec3) -> Complex64 {
    b[0] * a[0] + b[1] * a[1] + b[2] * a[2]
}

/// Bilinear (non-conjugating) dot product.
#[inline]
pub fn cdot(a: CVec3, b: CVec3) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cnorm(a: CVec3) -> f64 {
    (a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr()).sqrt()
}

/// Cross product of a real vector with a complex vector.
#[inline]
pub fn rcross(a: Vec3, b: CVec3) -> CVec3 {
    [
        b[2] * a[1] - b[1] * a[2],
        b[0] * a[2] - b[2] * a[0],
        b[1] * a[0] - b[0] * a[1],
    ]
}

#[inline]
pub fn ccross(a: CVec3, b: CVec3) -> CVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn to_complex(a: Vec3) -> CVec3 {
    [a[0].into(), a[1].into(), a[2].into()]
}
