use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::FieldSolution;
use crate::error::{Result, VieError};
use crate::geometry::ScattererShape;
use crate::vec3::{self, CVec3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiationRow {
    pub direction: Vec3,
    pub radius: f64,
    /// `r |V_r - ik V|`.
    pub scaled_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiationReport {
    pub rows: Vec<RadiationRow>,
    /// Largest (least negative) per-direction least-squares slope of
    /// `log |V_r - ik V|` against `log r`. `None` if the residual vanishes.
    pub slope: Option<f64>,
}

/// Tabulates the Sommerfeld residual along rays.
pub fn radiation_check(sol: &FieldSolution, directions: &[Vec3], radii: &[f64]) -> Result<RadiationReport> {
    if radii.len() < 2 || radii.windows(2).any(|w| !(w[1] > w[0])) || !(radii[0] > 0.0) {
        return Err(VieError::Parameter("radii must be positive and strictly increasing (at least two)".into()));
    }
    let k = sol.wavenumbers().k;
    let ik = Complex64::new(0.0, k);
    let mut rows = Vec::new();
    let mut slope: Option<f64> = None;
    for &d in directions {
        let n = vec3::norm(d);
        if !(n > 0.0) {
            return Err(VieError::Parameter("direction must be nonzero".into()));
        }
        let u = vec3::scale(d, 1.0 / n);
        let res: Vec<f64> = radii
            .par_iter()
            .map(|&r| {
                let x = vec3::scale(u, r);
                let v = sol.scattered_exterior(x);
                let vr = sol.scattered_directional_derivative(x, u);
                vec3::cnorm([0, 1, 2].map(|c| vr[c] - ik * v[c]))
            })
            .collect();
        for (&r, &q) in radii.iter().zip(&res) {
            rows.push(RadiationRow { direction: u, radius: r, scaled_residual: q * r });
        }
        if res.iter().all(|&q| q > 0.0) {
            let s = loglog_slope(radii, &res);
            slope = Some(slope.map_or(s, |prev: f64| prev.max(s)));
        }
    }
    Ok(RadiationReport { rows, slope })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// `n` points on the analytic surface of `shape`, from a Fibonacci lattice
/// of directions about the box centre. Returns `(point, outward normal)`.
pub fn surface_samples(shape: &ScattererShape, n: usize) -> Result<Vec<(Vec3, Vec3)>> {
    let bb = shape.bounding_box();
    let c = [0, 1, 2].map(|a| 0.5 * (bb.min[a] + bb.max[a]));
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let rho = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            let probe = vec3::add(c, [rho * phi.cos(), rho * phi.sin(), z]);
            shape
                .surface_projection(probe)
                .ok_or_else(|| VieError::Parameter("shape has no analytic surface projection".into()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryRow {
    pub point: Vec3,
    pub normal: Vec3,
    /// `|N x (E+ - E-)| / max(|E+|, |E-|)`.
    pub tangential: f64,
    /// `|N . (eps'/eps0 E+ - E-)| / max(|E+|, |E-|)`.
    pub normal_jump: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryReport {
    pub delta: f64,
    pub rows: Vec<BoundaryRow>,
    pub mean_tangential: f64,
    pub mean_normal: f64,
}

/// Interface-condition mismatch at pairs `s -/+ delta N` straddling the surface.
pub fn boundary_diagnostic(sol: &FieldSolution, samples: &[(Vec3, Vec3)], delta: f64) -> Result<BoundaryReport> {
    if !(delta > 0.0) || samples.is_empty() {
        return Err(VieError::Parameter("boundary diagnostic needs delta > 0 and at least one sample".into()));
    }
    let eps_rel = sol.medium().relative_permittivity();
    let rows: Vec<BoundaryRow> = samples
        .par_iter()
        .map(|&(s, nrm)| {
            let inside = sol.eval_field(vec3::add(s, vec3::scale(nrm, -delta))).value;
            let outside = sol.eval_field(vec3::add(s, vec3::scale(nrm, delta))).value;
            let scale = vec3::cnorm(inside).max(vec3::cnorm(outside));
            let jump: CVec3 = [0, 1, 2].map(|c| inside[c] - outside[c]);
            let tang = vec3::cnorm(vec3::rcross(nrm, jump));
            let dn = vec3::rdot(nrm, inside) * eps_rel - vec3::rdot(nrm, outside);
            let (tangential, normal_jump) = if scale > 0.0 { (tang / scale, dn.norm() / scale) } else { (0.0, 0.0) };
            BoundaryRow { point: s, normal: nrm, tangential, normal_jump }
        })
        .collect();
    let n = rows.len() as f64;
    Ok(BoundaryReport {
        delta,
        mean_tangential: rows.iter().map(|r| r.tangential).sum::<f64>() / n,
        mean_normal: rows.iter().map(|r| r.normal_jump).sum::<f64>() / n,
        rows,
    })
}
