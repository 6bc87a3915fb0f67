//! Field reconstruction from Galerkin coefficients.
//!
//! Inside the discretized body the field is the hat expansion. Outside it,
//! the scattered part is `V(x) = p * int_D G(x - y) E_h(y) dy`, evaluated by
//! cell-wise Gauss quadrature with subdivision of cells close to `x`.

mod diagnostics;
mod farfield;

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::BasisSet;
use crate::error::{Result, VieError};
use crate::geometry::ScattererGrid;
use crate::green::{green_tensor, green_tensor_directional_derivative, grad_scalar_green};
use crate::medium::{MediumParams, PlaneWave, Wavenumbers};
use crate::quadrature::tensor_points;
use crate::vec3::{self, CVec3, Vec3, CZERO3};

pub use diagnostics::{
    boundary_diagnostic, radiation_check, surface_samples, BoundaryReport, BoundaryRow, RadiationReport, RadiationRow,
};
pub use farfield::{cross_sections, AngularRule, CrossSectionKind, CrossSections, FarFieldSample};

/// Cells closer than this many spacings to the evaluation point are subdivided.
const NEAR_CELLS: f64 = 2.0;
const CLOUD_ORDER: usize = 3;

/// A weighted source point `w * E_h(y)` of the volume quadrature.
#[derive(Debug, Clone, Copy)]
struct Source {
    y: Vec3,
    j: CVec3,
}

/// Field evaluated at a point, with location flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldValue {
    pub value: CVec3,
    /// `x` lies in an interior cell (hat reconstruction was used).
    pub interior: bool,
    /// `x` is within one cell of the discretized boundary.
    pub boundary_layer: bool,
}

#[derive(Debug, Clone)]
pub struct FieldSolution {
    coefficients: Vec<Complex64>,
    grid: Arc<ScattererGrid>,
    basis: Arc<BasisSet>,
    medium: MediumParams,
    waves: Wavenumbers,
    incident: PlaneWave,
    /// Interior cells with their base-order source points.
    cells: Vec<([usize; 3], std::ops::Range<usize>)>,
    sources: Vec<Source>,
}

impl FieldSolution {
    pub fn new(
        grid: Arc<ScattererGrid>,
        basis: Arc<BasisSet>,
        medium: MediumParams,
        incident: PlaneWave,
        coefficients: Vec<Complex64>,
    ) -> Result<Self> {
        if coefficients.len() != 3 * basis.len() {
            return Err(VieError::Dimension(format!(
                "expected {} coefficients, got {}",
                3 * basis.len(),
                coefficients.len()
            )));
        }
        let waves = medium.wavenumbers()?;
        let mut sol = Self {
            coefficients,
            grid,
            basis,
            medium,
            waves,
            incident,
            cells: Vec::new(),
            sources: Vec::new(),
        };
        let pts = tensor_points(CLOUD_ORDER);
        let h = sol.grid.spacing();
        let vol = h * h * h;
        let per_cell: Vec<Vec<Source>> = sol
            .grid
            .interior_cells()
            .par_iter()
            .map(|&c| {
                let lo = sol.grid.cell_min_corner(c);
                pts.iter()
                    .map(|(t, w)| {
                        let y = [0, 1, 2].map(|a| lo[a] + t[a] * h);
                        Source { y, j: vec3::cscale(sol.reconstruct_in_cell(c, *t), Complex64::from(w * vol)) }
                    })
                    .collect()
            })
            .collect();
        for (c, src) in sol.grid.interior_cells().iter().zip(per_cell) {
            let start = sol.sources.len();
            sol.sources.extend(src);
            sol.cells.push((*c, start..sol.sources.len()));
        }
        Ok(sol)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn grid(&self) -> &ScattererGrid {
        &self.grid
    }

    pub fn basis(&self) -> &BasisSet {
        &self.basis
    }

    pub fn medium(&self) -> &MediumParams {
        &self.medium
    }

    pub fn wavenumbers(&self) -> Wavenumbers {
        self.waves
    }

    pub fn incident(&self) -> &PlaneWave {
        &self.incident
    }

    /// Moments `E_im = int E_i phi_m dx` of the reconstructed field.
    pub fn projected_coefficients(&self) -> Vec<Complex64> {
        let mm = self.basis.len();
        let mut out = vec![Complex64::new(0.0, 0.0); 3 * mm];
        for c in 0..3 {
            self.basis
                .gram()
                .matvec(&self.coefficients[c * mm..(c + 1) * mm], &mut out[c * mm..(c + 1) * mm]);
        }
        out
    }

    fn reconstruct_in_cell(&self, c: [usize; 3], t: Vec3) -> CVec3 {
        let mm = self.basis.len();
        let mut e = CZERO3;
        for corner in 0..8 {
            let bits = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let node = [0, 1, 2].map(|a| (c[a] + bits[a]) as i64);
            if let Some(m) = self.grid.node_basis_index(node) {
                let w: f64 = (0..3).map(|a| if bits[a] == 1 { t[a] } else { 1.0 - t[a] }).product();
                for i in 0..3 {
                    e[i] += self.coefficients[i * mm + m] * w;
                }
            }
        }
        e
    }

    /// Hat reconstruction `sum_m c_im phi_m(x)`, zero outside the interior cells.
    pub fn reconstruct(&self, x: Vec3) -> CVec3 {
        match self.grid.cell_of_point(x) {
            Some(c) if self.grid.is_interior_cell(c.map(|v| v as i64)) => {
                let lo = self.grid.cell_min_corner(c);
                let h = self.grid.spacing();
                let t = [0, 1, 2].map(|a| ((x[a] - lo[a]) / h).clamp(0.0, 1.0));
                self.reconstruct_in_cell(c, t)
            }
            _ => CZERO3,
        }
    }

    fn interior_cell_at(&self, x: Vec3) -> Option<[usize; 3]> {
        self.grid
            .cell_of_point(x)
            .filter(|c| self.grid.is_interior_cell(c.map(|v| v as i64)))
    }

    fn near_boundary(&self, x: Vec3, interior: bool) -> bool {
        let h = self.grid.spacing();
        let o = self.grid.origin();
        let base = [0, 1, 2].map(|a| ((x[a] - o[a]) / h).floor() as i64);
        for d0 in -1..=1 {
            for d1 in -1..=1 {
                for d2 in -1..=1 {
                    let c = [base[0] + d0, base[1] + d1, base[2] + d2];
                    if self.grid.is_interior_cell(c) != interior {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Visits `(y, weight * E_h(y))` for a quadrature of `int_D (.) E_h dy`
    /// adapted to the distance from `x`.
    fn for_each_source(&self, x: Vec3, mut f: impl FnMut(Vec3, CVec3)) {
        let h = self.grid.spacing();
        for (c, range) in &self.cells {
            let lo = self.grid.cell_min_corner(*c);
            let dist = (0..3)
                .map(|a| (lo[a] - x[a]).max(x[a] - lo[a] - h).max(0.0).powi(2))
                .sum::<f64>()
                .sqrt();
            if dist >= NEAR_CELLS * h {
                for s in &self.sources[range.clone()] {
                    f(s.y, s.j);
                }
                continue;
            }
            let n = ((4.0 * h / dist.max(h / 16.0)).ceil() as usize).clamp(2, 64);
            let sub = h / n as f64;
            let vol = sub * sub * sub;
            let pts = tensor_points(CLOUD_ORDER);
            for i0 in 0..n {
                for i1 in 0..n {
                    for i2 in 0..n {
                        let idx = [i0, i1, i2];
                        for (t, w) in &pts {
                            let tl = [0, 1, 2].map(|a| (idx[a] as f64 + t[a]) / n as f64);
                            let y = [0, 1, 2].map(|a| lo[a] + tl[a] * h);
                            f(y, vec3::cscale(self.reconstruct_in_cell(*c, tl), Complex64::from(w * vol)));
                        }
                    }
                }
            }
        }
    }

    /// Scattered field `V(x)` from the volume representation. `x` must not
    /// lie in an interior cell.
    pub fn scattered_exterior(&self, x: Vec3) -> CVec3 {
        let p = self.waves.contrast;
        if p == Complex64::new(0.0, 0.0) {
            return CZERO3;
        }
        let k = self.waves.k;
        let mut acc = CZERO3;
        self.for_each_source(x, |y, j| {
            if let Ok(g) = green_tensor(vec3::sub(x, y), k) {
                acc = vec3::cadd(acc, g.apply(j));
            }
        });
        vec3::cscale(acc, p)
    }

    /// Radial derivative `(xhat . grad) V` at an exterior point.
    pub fn scattered_directional_derivative(&self, x: Vec3, dir: Vec3) -> CVec3 {
        let p = self.waves.contrast;
        if p == Complex64::new(0.0, 0.0) {
            return CZERO3;
        }
        let k = self.waves.k;
        let mut acc = CZERO3;
        self.for_each_source(x, |y, j| {
            if let Ok(g) = green_tensor_directional_derivative(vec3::sub(x, y), k, dir) {
                acc = vec3::cadd(acc, g.apply(j));
            }
        });
        vec3::cscale(acc, p)
    }

    /// Total field `E(x)`.
    pub fn eval_field(&self, x: Vec3) -> FieldValue {
        match self.interior_cell_at(x) {
            Some(_) => FieldValue {
                value: self.reconstruct(x),
                interior: true,
                boundary_layer: self.near_boundary(x, true),
            },
            None => FieldValue {
                value: vec3::cadd(self.incident.field(self.waves.k, x), self.scattered_exterior(x)),
                interior: false,
                boundary_layer: self.near_boundary(x, false),
            },
        }
    }

    pub fn eval_fields(&self, xs: &[Vec3]) -> Vec<FieldValue> {
        xs.par_iter().map(|&x| self.eval_field(x)).collect()
    }

    /// `H = curl E / (i omega mu0)` at an exterior point. The dyadic part of
    /// the kernel is a gradient and drops out of the curl, leaving
    /// `curl V = p int grad g(x - y) x E_h(y) dy`.
    pub fn eval_h(&self, x: Vec3) -> Result<CVec3> {
        if self.interior_cell_at(x).is_some() {
            return Err(VieError::UnsupportedLocation(format!(
                "H is only available outside the scatterer; {x:?} is inside"
            )));
        }
        let k = self.waves.k;
        let mut curl = self.incident.curl(k, x);
        let p = self.waves.contrast;
        if p != Complex64::new(0.0, 0.0) {
            let mut acc = CZERO3;
            self.for_each_source(x, |y, j| {
                if let Ok(g) = grad_scalar_green(vec3::sub(x, y), k) {
                    acc = vec3::cadd(acc, vec3::ccross(g, j));
                }
            });
            curl = vec3::cadd(curl, vec3::cscale(acc, p));
        }
        let denom = Complex64::new(0.0, self.medium.omega * self.medium.mu0);
        Ok(curl.map(|c| c / denom))
    }

    /// Far-field amplitude `A(xhat)` with `V(r xhat) ~ exp(ikr)/r A(xhat)`.
    pub fn far_field(&self, xhat: Vec3) -> Result<FarFieldSample> {
        farfield::far_field(self, xhat)
    }

    fn sources(&self) -> &[Source] {
        &self.sources
    }
}

#[cfg(test)]
mod tests;
