//! Integrals of `g` and `grad g` over a single grid cell with constant density.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::cuboid::{newton_potential, newton_potential_gradient};
use super::QuadratureRule;
use crate::geometry::ScattererGrid;
use crate::green::green_at;
use crate::vec3::{self, CVec3, Vec3};

fn distance_to_box(x: Vec3, lo: Vec3, hi: Vec3) -> f64 {
    let d = [0, 1, 2].map(|a| (lo[a] - x[a]).max(0.0).max(x[a] - hi[a]));
    vec3::norm(d)
}

/// `(exp(ik r) - 1) / (4 pi r)`, continuous at `r = 0`.
#[inline]
fn smooth_remainder(r: f64, k: f64) -> Complex64 {
    let kr = k * r;
    if kr < 1e-4 {
        // series: ik - k^2 r / 2 - i k^3 r^2 / 6
        Complex64::new(-k * kr / 2.0, k - k * kr * kr / 6.0) / (4.0 * PI)
    } else {
        (Complex64::new(0.0, kr).exp() - 1.0) / (4.0 * PI * r)
    }
}

/// Radial derivative of [`smooth_remainder`].
#[inline]
fn smooth_remainder_dr(r: f64, k: f64) -> Complex64 {
    let kr = k * r;
    if kr < 1e-4 {
        Complex64::new(-k * k / 2.0, -k * k * kr / 3.0) / (4.0 * PI)
    } else {
        let e = Complex64::new(0.0, kr).exp();
        (e * Complex64::new(0.0, k) * r - (e - 1.0)) / (4.0 * PI * r * r)
    }
}

/// `int_cell g(target - y) dy`.
///
/// Near the cell the kernel is split as `1/(4 pi r) + (exp(ikr) - 1)/(4 pi r)`:
/// the Newtonian part uses the closed-form cuboid potential and the bounded
/// remainder the near-field Gauss rule.
pub fn integrate_g_cell(target: Vec3, cell: [usize; 3], grid: &ScattererGrid, k: f64, rule: &QuadratureRule) -> Complex64 {
    let lo = grid.cell_min_corner(cell);
    let h = grid.spacing();
    integrate_g_box(target, lo, h, k, rule)
}

pub(crate) fn integrate_g_box(target: Vec3, lo: Vec3, h: f64, k: f64, rule: &QuadratureRule) -> Complex64 {
    let hi = lo.map(|v| v + h);
    let vol = h * h * h;
    if distance_to_box(target, lo, hi) < rule.near_field_radius * h {
        let newton = newton_potential(target, lo, hi) / (4.0 * PI);
        let rest: Complex64 = rule
            .near_points()
            .iter()
            .map(|(t, w)| {
                let y = [0, 1, 2].map(|a| lo[a] + t[a] * h);
                smooth_remainder(vec3::norm(vec3::sub(target, y)), k) * *w
            })
            .sum();
        newton + rest * vol
    } else {
        let sum: Complex64 = rule
            .far_points()
            .iter()
            .map(|(t, w)| {
                let y = [0, 1, 2].map(|a| lo[a] + t[a] * h);
                green_at(vec3::norm(vec3::sub(target, y)), k) * *w
            })
            .sum();
        sum * vol
    }
}

/// `int_cell grad_x g(target - y) dy`, with the same near-field split as
/// [`integrate_g_cell`] and the closed-form cuboid potential gradient.
pub fn integrate_grad_g_cell(target: Vec3, cell: [usize; 3], grid: &ScattererGrid, k: f64, rule: &QuadratureRule) -> CVec3 {
    let lo = grid.cell_min_corner(cell);
    let h = grid.spacing();
    let hi = lo.map(|v| v + h);
    let vol = h * h * h;
    let near = distance_to_box(target, lo, hi) < rule.near_field_radius * h;
    let pts = if near { rule.near_points() } else { rule.far_points() };
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    for (t, w) in &pts {
        let y = [0, 1, 2].map(|a| lo[a] + t[a] * h);
        let d = vec3::sub(target, y);
        let r = vec3::norm(d);
        if r == 0.0 {
            continue;
        }
        let radial = if near {
            smooth_remainder_dr(r, k)
        } else {
            green_at(r, k) * Complex64::new(-1.0 / r, k)
        };
        for a in 0..3 {
            acc[a] += radial * (d[a] / r) * *w;
        }
    }
    let mut out = acc.map(|v| v * vol);
    if near {
        let g = newton_potential_gradient(target, lo, hi);
        for a in 0..3 {
            out[a] += g[a] / (4.0 * PI);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{voxelize, ScattererShape};

    const UNIT_CUBE_SELF: f64 = 0.189_400_538_709_237;

    fn unit_grid(h: f64) -> ScattererGrid {
        voxelize(&ScattererShape::cube([0.0; 3], 41.0 * h).unwrap(), h).unwrap()
    }

    #[test]
    fn static_self_term_matches_reference_and_scales_as_h_squared() {
        for h in [1.0, 0.25, 0.03] {
            let grid = unit_grid(h);
            let c = [20, 20, 20];
            let centre = grid.cell_center(c);
            let v = integrate_g_cell(centre, c, &grid, 0.0, &QuadratureRule::default());
            assert!(v.im == 0.0);
            assert!((v.re - h * h * UNIT_CUBE_SELF).abs() < 1e-12 * h * h, "h={h}: {}", v.re);
        }
    }

    #[test]
    fn far_cell_reduces_to_midpoint_rule() {
        // midpoint error is -(kh)^2/24 relative
        let h = 0.1;
        let k = 1.0;
        let grid = unit_grid(h);
        let c = [5, 5, 5];
        let centre = grid.cell_center(c);
        let target = vec3::add(centre, [20.0 * h, 0.0, 0.0]);
        let v = integrate_g_cell(target, c, &grid, k, &QuadratureRule::default());
        let mid = green_at(20.0 * h, k) * h.powi(3);
        assert!((v - mid).norm() / mid.norm() < 1e-3);
    }

    #[test]
    fn near_and_far_branches_agree_at_the_switch() {
        let h = 0.2;
        let k = 1.5;
        let grid = unit_grid(h);
        let c = [10, 10, 10];
        let target = vec3::add(grid.cell_center(c), [2.6 * h, 0.3 * h, 0.0]);
        let near = QuadratureRule { near_field_radius: 10.0, ..QuadratureRule::default() };
        let far = QuadratureRule { near_field_radius: 0.0, order: 8, ..QuadratureRule::default() };
        let a = integrate_g_cell(target, c, &grid, k, &near);
        let b = integrate_g_cell(target, c, &grid, k, &far);
        assert!((a - b).norm() / b.norm() < 1e-8);
        let ga = integrate_grad_g_cell(target, c, &grid, k, &near);
        let gb = integrate_grad_g_cell(target, c, &grid, k, &far);
        for i in 0..3 {
            assert!((ga[i] - gb[i]).norm() < 1e-8 * vec3::cnorm(gb));
        }
    }

    #[test]
    fn gradient_matches_finite_differences_of_cell_integral() {
        let h = 0.3;
        let k = 1.1;
        let grid = unit_grid(h);
        let c = [7, 7, 7];
        let target = vec3::add(grid.cell_center(c), [0.2 * h, -0.1 * h, 0.35 * h]);
        let rule = QuadratureRule { near_order: 12, ..QuadratureRule::default() };
        let g = integrate_grad_g_cell(target, c, &grid, k, &rule);
        let step = 1e-5 * h;
        for a in 0..3 {
            let mut p = target;
            let mut m = target;
            p[a] += step;
            m[a] -= step;
            let fd = (integrate_g_cell(p, c, &grid, k, &rule) - integrate_g_cell(m, c, &grid, k, &rule)) / (2.0 * step);
            assert!((fd - g[a]).norm() < 1e-6 * vec3::cnorm(g), "axis {a}: {fd} vs {}", g[a]);
        }
    }

    #[test]
    fn remainder_series_is_continuous() {
        let k = 3.0;
        for r in [3.3e-5, 3.34e-5] {
            let series = smooth_remainder(r, k);
            let direct = (Complex64::new(0.0, k * r).exp() - 1.0) / (4.0 * PI * r);
            assert!((series - direct).norm() < 1e-9);
        }
    }
}
