//! Quadrature for the weakly singular Galerkin integrals.
//!
//! Smooth integrands use tensor-product Gauss-Legendre rules. Integrals whose
//! kernel is singular at a corner of the integration cube use a Duffy-type
//! rule: the cube is split into three pyramids with apex at the singular
//! corner and each is mapped to `s * (1, t, u)`, whose Jacobian `s^2`
//! cancels the `1/r` and `1/r^2` singularities.

pub mod cell;
pub mod cuboid;
pub mod galerkin;
pub mod gauss;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VieError};
use crate::vec3::Vec3;
use gauss::GaussRule;

pub use cell::{integrate_g_cell, integrate_grad_g_cell};
pub use galerkin::{
    galerkin_g_entry, galerkin_g_entry_cellwise, galerkin_grad_entry, galerkin_grad_entry_kernel_form,
    KernelTable, OffsetEntries,
};

/// Orders and near-field switch shared by all cell and Galerkin integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    /// Gauss points per axis for well-separated cells.
    pub order: usize,
    /// Gauss points per axis (and per Duffy direction) for near cells.
    pub near_order: usize,
    /// Cells closer than `near_field_radius * h` to the singular point use
    /// `near_order`; cells touching it use the singular treatment.
    pub near_field_radius: f64,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self {
            order: 3,
            near_order: 5,
            near_field_radius: 2.0,
        }
    }
}

impl QuadratureRule {
    pub fn new(order: usize, near_order: usize, near_field_radius: f64) -> Result<Self> {
        let rule = Self {
            order,
            near_order,
            near_field_radius,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 || self.near_order == 0 || self.order > 64 || self.near_order > 64 {
            return Err(VieError::Parameter(format!(
                "quadrature orders must lie in 1..=64 (got {} / {})",
                self.order, self.near_order
            )));
        }
        if !(self.near_field_radius >= 0.0 && self.near_field_radius.is_finite()) {
            return Err(VieError::Parameter("near-field radius must be nonnegative".into()));
        }
        Ok(())
    }

    /// Same rule with both orders doubled.
    pub fn doubled(&self) -> Self {
        Self {
            order: 2 * self.order,
            near_order: 2 * self.near_order,
            ..*self
        }
    }

    /// Tensor rule on the unit cube for well-separated cells.
    pub fn far_points(&self) -> Vec<(Vec3, f64)> {
        tensor_points(self.order)
    }

    /// Tensor rule on the unit cube for near cells.
    pub fn near_points(&self) -> Vec<(Vec3, f64)> {
        tensor_points(self.near_order)
    }

    /// Rule on the unit cube for integrands singular at the corner `(0,0,0)`.
    pub fn corner_points(&self) -> Vec<(Vec3, f64)> {
        corner_singular_points(self.near_order + 1)
    }
}

/// Tensor-product Gauss rule on `[0, 1]^3`; weights sum to one.
pub fn tensor_points(order: usize) -> Vec<(Vec3, f64)> {
    let g = GaussRule::new(order);
    let mut pts = Vec::with_capacity(order * order * order);
    for (x, wx) in g.nodes.iter().zip(&g.weights) {
        for (y, wy) in g.nodes.iter().zip(&g.weights) {
            for (z, wz) in g.nodes.iter().zip(&g.weights) {
                pts.push(([*x, *y, *z], wx * wy * wz));
            }
        }
    }
    pts
}

/// Duffy rule on `[0, 1]^3` for integrands with an `O(1/r)` or `O(1/r^2)`
/// singularity at the origin corner; weights sum to one.
pub fn corner_singular_points(order: usize) -> Vec<(Vec3, f64)> {
    let g = GaussRule::new(order);
    let mut pts = Vec::with_capacity(3 * order * order * order);
    for face in 0..3 {
        for (s, ws) in g.nodes.iter().zip(&g.weights) {
            for (t, wt) in g.nodes.iter().zip(&g.weights) {
                for (u, wu) in g.nodes.iter().zip(&g.weights) {
                    let mut p = [0.0; 3];
                    p[face] = *s;
                    p[(face + 1) % 3] = s * t;
                    p[(face + 2) % 3] = s * u;
                    pts.push((p, ws * wt * wu * s * s));
                }
            }
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec3;

    #[test]
    fn weights_sum_to_unit_volume() {
        let rule = QuadratureRule::default();
        for pts in [rule.far_points(), rule.near_points(), rule.corner_points()] {
            let total: f64 = pts.iter().map(|p| p.1).sum();
            assert!((total - 1.0).abs() < 1e-13);
            assert!(pts.iter().all(|(p, _)| p.iter().all(|c| (0.0..=1.0).contains(c))));
        }
    }

    #[test]
    fn corner_rule_integrates_inverse_distance() {
        // int_{[0,1]^3} dy / |y| = 8 * (value over [-1/2,1/2]^3) / 4, by dilation
        let exact = cuboid::newton_potential([0.0; 3], [0.0; 3], [1.0; 3]);
        let approx: f64 = corner_singular_points(8)
            .iter()
            .map(|(p, w)| w / vec3::norm(*p))
            .sum();
        assert!((approx - exact).abs() / exact < 1e-10, "{approx} vs {exact}");
    }

    #[test]
    fn corner_rule_integrates_inverse_square_kernel() {
        // int y_0 / |y|^3 over the unit cube equals the x-gradient of the potential at the corner
        let exact = -cuboid::newton_potential_gradient([0.0; 3], [0.0; 3], [1.0; 3])[0];
        let approx: f64 = corner_singular_points(10)
            .iter()
            .map(|(p, w)| w * p[0] / vec3::norm(*p).powi(3))
            .sum();
        assert!((approx - exact).abs() / exact < 1e-8, "{approx} vs {exact}");
    }

    #[test]
    fn invalid_rules_are_rejected() {
        assert!(QuadratureRule::new(0, 5, 2.0).is_err());
        assert!(QuadratureRule::new(3, 5, -1.0).is_err());
        assert!(QuadratureRule::new(3, 5, 2.0).is_ok());
    }
}
