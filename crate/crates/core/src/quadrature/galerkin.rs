//! Galerkin matrix entries for trilinear hat functions on a uniform grid.
//!
//! With hats `phi_m(x) = phi((x - x_m) / h)` the double integrals reduce
//! exactly to single integrals against correlations of the 1D hat
//! `lambda(t) = max(0, 1 - |t|)`:
//!
//! ```text
//! a(w) = int lambda(t)  lambda(t - w)  dt   (cubic B-spline, support [-2, 2])
//! b(w) = int lambda'(t) lambda(t - w)  dt = a'(w)
//! c(w) = int lambda'(t) lambda'(t - w) dt = -a''(w)
//! ```
//!
//! For the node offset `delta = n_mp - n_m` and `s = u / h` (with `u = x - y`):
//!
//! ```text
//! S(delta)    = h^5 int ghat(s) a(s0+d0) a(s1+d1) a(s2+d2) ds
//! D_ii(delta) = h^3 int ghat(s) c(si+di) a(sj+dj) a(sk+dk) ds
//! D_ij(delta) = -h^3 int ghat(s) b(si+di) b(sj+dj) a(sk+dk) ds      (i != j)
//! ```
//!
//! where `ghat(s) = exp(i kappa |s|) / (4 pi |s|)` and `kappa = k h`. The
//! `D` forms carry both derivatives on the hats, which is the integration by
//! parts of `int dphi_m/dx_i (dg/dx_j) phi_mp` over `y` (valid because the
//! hats vanish on the boundary of their support). The integrand is
//! polynomial on each unit knot cell of `[-2, 2]^3 - delta`; the cells that
//! touch `s = 0` use the corner-singular rule.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::cell::integrate_g_box;
use super::QuadratureRule;
use crate::geometry::ScattererGrid;
use crate::green::packed_index;
use crate::vec3::{self, Vec3};

/// Hat autocorrelation `a(w)`.
#[inline]
pub fn hat_corr(w: f64) -> f64 {
    let x = w.abs();
    if x <= 1.0 {
        2.0 / 3.0 - x * x + 0.5 * x * x * x
    } else if x < 2.0 {
        let t = 2.0 - x;
        t * t * t / 6.0
    } else {
        0.0
    }
}

/// Derivative-hat correlation `b(w) = a'(w)` (odd).
#[inline]
pub fn hat_corr_d(w: f64) -> f64 {
    let x = w.abs();
    let v = if x <= 1.0 {
        -2.0 * x + 1.5 * x * x
    } else if x < 2.0 {
        let t = 2.0 - x;
        -0.5 * t * t
    } else {
        0.0
    };
    v * w.signum()
}

/// Derivative-derivative correlation `c(w) = -a''(w)` (even).
#[inline]
pub fn hat_corr_dd(w: f64) -> f64 {
    let x = w.abs();
    if x <= 1.0 {
        2.0 - 3.0 * x
    } else if x < 2.0 {
        -(2.0 - x)
    } else {
        0.0
    }
}

/// Dimensionless entries for one node offset; see the module docs for the
/// scaling back to physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetEntries {
    /// `S / h^5`.
    pub s: Complex64,
    /// `D / h^3`, packed `[xx, yy, zz, xy, xz, yz]`.
    pub d: [Complex64; 6],
}

impl OffsetEntries {
    const ZERO: Self = Self {
        s: Complex64::new(0.0, 0.0),
        d: [Complex64::new(0.0, 0.0); 6],
    };
}

/// Visits every quadrature point of the knot cells covering `[-2,2]^3 - delta`.
fn for_each_point<F: FnMut(Vec3, f64)>(delta: [i64; 3], rule: &QuadratureRule, far: &[(Vec3, f64)], near: &[(Vec3, f64)], corner: &[(Vec3, f64)], mut f: F) {
    for j0 in -2i64..2 {
        for j1 in -2i64..2 {
            for j2 in -2i64..2 {
                let lo = [(j0 - delta[0]) as f64, (j1 - delta[1]) as f64, (j2 - delta[2]) as f64];
                let touches = lo.iter().all(|&l| l == 0.0 || l == -1.0);
                if touches {
                    // reflect so that the singular corner sits at t = 0
                    let sign = lo.map(|l| if l == 0.0 { 1.0 } else { -1.0 });
                    for (t, w) in corner {
                        f([t[0] * sign[0], t[1] * sign[1], t[2] * sign[2]], *w);
                    }
                    continue;
                }
                let dist = vec3::norm(lo.map(|l| l.max(0.0).max(-(l + 1.0))));
                let pts = if dist < rule.near_field_radius { near } else { far };
                for (t, w) in pts {
                    f([lo[0] + t[0], lo[1] + t[1], lo[2] + t[2]], *w);
                }
            }
        }
    }
}

#[inline]
fn ghat(r: f64, kappa: f64) -> Complex64 {
    Complex64::new(0.0, kappa * r).exp() / (4.0 * PI * r)
}

struct RulePoints {
    rule: QuadratureRule,
    far: Vec<(Vec3, f64)>,
    near: Vec<(Vec3, f64)>,
    corner: Vec<(Vec3, f64)>,
}

impl RulePoints {
    fn new(rule: &QuadratureRule) -> Self {
        Self {
            rule: *rule,
            far: rule.far_points(),
            near: rule.near_points(),
            corner: rule.corner_points(),
        }
    }

    fn visit<F: FnMut(Vec3, f64)>(&self, delta: [i64; 3], f: F) {
        for_each_point(delta, &self.rule, &self.far, &self.near, &self.corner, f)
    }
}

fn offset_entries_with(delta: [i64; 3], kappa: f64, pts: &RulePoints) -> OffsetEntries {
    let mut out = OffsetEntries::ZERO;
    pts.visit(delta, |s, w| {
        let r = vec3::norm(s);
        let gw = ghat(r, kappa) * w;
        let mut a = [0.0; 3];
        let mut b = [0.0; 3];
        let mut c = [0.0; 3];
        for ax in 0..3 {
            let v = s[ax] + delta[ax] as f64;
            a[ax] = hat_corr(v);
            b[ax] = hat_corr_d(v);
            c[ax] = hat_corr_dd(v);
        }
        out.s += gw * (a[0] * a[1] * a[2]);
        out.d[0] += gw * (c[0] * a[1] * a[2]);
        out.d[1] += gw * (a[0] * c[1] * a[2]);
        out.d[2] += gw * (a[0] * a[1] * c[2]);
        out.d[3] -= gw * (b[0] * b[1] * a[2]);
        out.d[4] -= gw * (b[0] * a[1] * b[2]);
        out.d[5] -= gw * (a[0] * b[1] * b[2]);
    });
    out
}

/// Dimensionless `S` and `D` entries for the node offset `delta` at `kappa = k h`.
pub fn offset_entries(delta: [i64; 3], kappa: f64, rule: &QuadratureRule) -> OffsetEntries {
    offset_entries_with(delta, kappa, &RulePoints::new(rule))
}

/// `D / h^3` evaluated with the derivative left on the kernel,
/// `int dphi_m/dx_i (dg/dx_j) phi_mp`: an `O(1/r^2)` singular integrand.
/// Returned unsymmetrised as `[i][j]`.
pub fn offset_grad_entries_kernel_form(delta: [i64; 3], kappa: f64, rule: &QuadratureRule) -> [[Complex64; 3]; 3] {
    let pts = RulePoints::new(rule);
    let mut out = [[Complex64::new(0.0, 0.0); 3]; 3];
    pts.visit(delta, |s, w| {
        let r = vec3::norm(s);
        let radial = ghat(r, kappa) * Complex64::new(-1.0 / r, kappa) / r * w;
        let mut a = [0.0; 3];
        let mut b = [0.0; 3];
        for ax in 0..3 {
            let v = s[ax] + delta[ax] as f64;
            a[ax] = hat_corr(v);
            b[ax] = hat_corr_d(v);
        }
        for i in 0..3 {
            let weight = b[i] * a[(i + 1) % 3] * a[(i + 2) % 3];
            for j in 0..3 {
                out[i][j] += radial * (s[j] * weight);
            }
        }
    });
    out
}

fn node_delta(grid: &ScattererGrid, m: usize, mp: usize) -> [i64; 3] {
    let a = grid.interior_nodes()[m];
    let b = grid.interior_nodes()[mp];
    [0, 1, 2].map(|i| b[i] as i64 - a[i] as i64)
}

/// `int int phi_m(x) g(x - y) phi_mp(y) dy dx`.
pub fn galerkin_g_entry(m: usize, mp: usize, grid: &ScattererGrid, k: f64, rule: &QuadratureRule) -> Complex64 {
    let h = grid.spacing();
    offset_entries(node_delta(grid, m, mp), k * h, rule).s * h.powi(5)
}

/// `int dphi_m/dx_i(x) int dg(x - y)/dx_j phi_mp(y) dy dx`, axes `i, j` in `0..3`.
pub fn galerkin_grad_entry(m: usize, i: usize, mp: usize, j: usize, grid: &ScattererGrid, k: f64, rule: &QuadratureRule) -> Complex64 {
    let h = grid.spacing();
    offset_entries(node_delta(grid, m, mp), k * h, rule).d[packed_index(i, j)] * h.powi(3)
}

/// [`galerkin_grad_entry`] computed with the gradient kept on the kernel.
pub fn galerkin_grad_entry_kernel_form(m: usize, i: usize, mp: usize, j: usize, grid: &ScattererGrid, k: f64, rule: &QuadratureRule) -> Complex64 {
    let h = grid.spacing();
    offset_grad_entries_kernel_form(node_delta(grid, m, mp), k * h, rule)[i][j] * h.powi(3)
}

/// Hat function of node `n` (grid units) evaluated at `x`.
fn hat_value(grid: &ScattererGrid, node: [usize; 3], x: Vec3) -> f64 {
    let p = grid.node_position(node);
    let h = grid.spacing();
    (0..3).map(|a| (1.0 - ((x[a] - p[a]) / h).abs()).max(0.0)).product()
}

/// The eight cells of a node's support, as minimum corners.
fn support_cells(grid: &ScattererGrid, node: [usize; 3]) -> [Vec3; 8] {
    let h = grid.spacing();
    let p = grid.node_position(node);
    std::array::from_fn(|c| {
        [
            p[0] - h + h * (c & 1) as f64,
            p[1] - h + h * ((c >> 1) & 1) as f64,
            p[2] - h + h * ((c >> 2) & 1) as f64,
        ]
    })
}

/// [`galerkin_g_entry`] by direct cell-wise quadrature: outer Gauss over the
/// test support, inner integral per trial cell with the trilinear hat split
/// as `phi(x) + (phi(y) - phi(x))`, the first part through
/// [`super::integrate_g_cell`]'s closed-form near-field treatment.
pub fn galerkin_g_entry_cellwise(m: usize, mp: usize, grid: &ScattererGrid, k: f64, rule: &QuadratureRule) -> Complex64 {
    let h = grid.spacing();
    let vol = h * h * h;
    let nm = grid.interior_nodes()[m];
    let nmp = grid.interior_nodes()[mp];
    let outer = rule.near_points();
    let inner = rule.near_points();
    let mut total = Complex64::new(0.0, 0.0);
    for test_lo in support_cells(grid, nm) {
        for (t, wo) in &outer {
            let x = [0, 1, 2].map(|a| test_lo[a] + t[a] * h);
            let phi_x = hat_value(grid, nm, x);
            let mut inner_sum = Complex64::new(0.0, 0.0);
            for trial_lo in support_cells(grid, nmp) {
                // trilinear polynomial of the trial hat on this cell, extended to x
                let p = grid.node_position(nmp);
                let poly = |y: Vec3| -> f64 {
                    (0..3)
                        .map(|a| {
                            let centre = trial_lo[a] + 0.5 * h;
                            let sgn = if centre > p[a] { -1.0 } else { 1.0 };
                            1.0 + sgn * (y[a] - p[a]) / h
                        })
                        .product()
                };
                let px = poly(x);
                let base = integrate_g_box(x, trial_lo, h, k, rule) * px;
                let rest: Complex64 = inner
                    .iter()
                    .map(|(s, wi)| {
                        let y = [0, 1, 2].map(|a| trial_lo[a] + s[a] * h);
                        let r = vec3::norm(vec3::sub(x, y));
                        if r == 0.0 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            ghat(r, k) * ((poly(y) - px) * wi)
                        }
                    })
                    .sum();
                inner_sum += base + rest * vol;
            }
            total += inner_sum * (phi_x * wo);
        }
    }
    total * vol
}

/// Dimensionless kernel entries for every node offset within a box,
/// stored for the nonnegative octant and unfolded by reflection symmetry:
/// `S` and `D_ii` are even in each offset component, `D_ij` (`i != j`) is
/// odd in components `i` and `j`.
#[derive(Debug, Clone)]
pub struct KernelTable {
    extent: [usize; 3],
    kappa: f64,
    h: f64,
    rule: QuadratureRule,
    entries: Vec<OffsetEntries>,
}

impl KernelTable {
    /// Entries for `|delta_a| < extent[a]`, i.e. all offsets between nodes
    /// spanning `extent` nodes per axis.
    pub fn build(extent: [usize; 3], k: f64, h: f64, rule: &QuadratureRule) -> Self {
        let kappa = k * h;
        let pts = RulePoints::new(rule);
        let total = extent[0] * extent[1] * extent[2];
        let entries: Vec<OffsetEntries> = (0..total)
            .into_par_iter()
            .map(|idx| {
                let d2 = idx % extent[2];
                let d1 = (idx / extent[2]) % extent[1];
                let d0 = idx / (extent[1] * extent[2]);
                offset_entries_with([d0 as i64, d1 as i64, d2 as i64], kappa, &pts)
            })
            .collect();
        Self {
            extent,
            kappa,
            h,
            rule: *rule,
            entries,
        }
    }

    pub fn extent(&self) -> [usize; 3] {
        self.extent
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    /// Dimensionless entries at an arbitrary offset inside the table range.
    pub fn get(&self, delta: [i64; 3]) -> OffsetEntries {
        let abs = delta.map(|d| d.unsigned_abs() as usize);
        assert!(
            (0..3).all(|a| abs[a] < self.extent[a]),
            "offset {delta:?} outside kernel table extent {:?}",
            self.extent
        );
        let mut e = self.entries[(abs[0] * self.extent[1] + abs[1]) * self.extent[2] + abs[2]];
        let sg = delta.map(|d| if d < 0 { -1.0 } else { 1.0 });
        e.d[3] *= sg[0] * sg[1];
        e.d[4] *= sg[0] * sg[2];
        e.d[5] *= sg[1] * sg[2];
        e
    }

    /// Physical `S` entry.
    pub fn s(&self, delta: [i64; 3]) -> Complex64 {
        self.get(delta).s * self.h.powi(5)
    }

    /// Physical `D_ij` entry.
    pub fn d(&self, delta: [i64; 3], i: usize, j: usize) -> Complex64 {
        self.get(delta).d[packed_index(i, j)] * self.h.powi(3)
    }
}
