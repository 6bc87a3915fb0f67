use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FieldSolution;
use crate::error::{Result, VieError};
use crate::quadrature::gauss::GaussRule;
use crate::vec3::{self, CVec3, Vec3, CZERO3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarFieldSample {
    pub direction: Vec3,
    pub amplitude: CVec3,
}

/// `A(xhat) = p/(4 pi) (I - xhat xhat^T) int exp(-ik xhat.y) E_h(y) dy`.
pub(super) fn far_field(sol: &FieldSolution, xhat: Vec3) -> Result<FarFieldSample> {
    let n = vec3::norm(xhat);
    if !((n - 1.0).abs() < 1e-9) {
        return Err(VieError::Parameter(format!("far-field direction must be a unit vector, |xhat| = {n}")));
    }
    let waves = sol.wavenumbers();
    let p = waves.contrast;
    if p == Complex64::new(0.0, 0.0) {
        return Ok(FarFieldSample { direction: xhat, amplitude: CZERO3 });
    }
    let k = waves.k;
    let mut acc = CZERO3;
    for s in sol.sources() {
        let phase = Complex64::from_polar(1.0, -k * vec3::dot(xhat, s.y));
        for c in 0..3 {
            acc[c] += s.j[c] * phase;
        }
    }
    let radial = vec3::rdot(xhat, acc);
    let f = p / (4.0 * std::f64::consts::PI);
    let amplitude = [0, 1, 2].map(|c| (acc[c] - radial * xhat[c]) * f);
    Ok(FarFieldSample { direction: xhat, amplitude })
}

/// Product rule on the unit sphere: Gauss-Legendre in `cos(theta)`,
/// uniform in `phi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AngularRule {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for AngularRule {
    fn default() -> Self {
        Self { n_theta: 24, n_phi: 48 }
    }
}

impl AngularRule {
    /// `(theta, phi, direction, weight)` with weights summing to `4 pi`.
    pub fn points(&self) -> Vec<(f64, f64, Vec3, f64)> {
        let g = GaussRule::new(self.n_theta);
        let dphi = 2.0 * std::f64::consts::PI / self.n_phi as f64;
        let mut out = Vec::with_capacity(self.n_theta * self.n_phi);
        for (t, w) in g.nodes.iter().zip(&g.weights) {
            let mu = 2.0 * t - 1.0;
            let theta = mu.acos();
            let st = (1.0 - mu * mu).max(0.0).sqrt();
            for j in 0..self.n_phi {
                let phi = j as f64 * dphi;
                out.push((theta, phi, [st * phi.cos(), st * phi.sin(), mu], 2.0 * w * dphi));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossSectionKind {
    /// Lossless medium: the forward-amplitude identity gives the scattering cross section.
    Scattering,
    /// Lossy medium: it gives extinction, which exceeds scattering by the absorption.
    Extinction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSections {
    pub sigma_scat: f64,
    /// `(4 pi / k) Im(conj(e) . A(d))`.
    pub optical_theorem: f64,
    pub optical_theorem_kind: CrossSectionKind,
}

/// Both values are normalized by `|amplitude|^2` of the incident wave.
pub fn cross_sections(sol: &FieldSolution, rule: &AngularRule) -> Result<CrossSections> {
    let kind = if sol.medium().is_lossless() {
        CrossSectionKind::Scattering
    } else {
        CrossSectionKind::Extinction
    };
    let pw = sol.incident();
    let a2 = pw.amplitude().norm_sqr();
    let sigma_scat: f64 = rule
        .points()
        .par_iter()
        .map(|&(_, _, d, w)| far_field(sol, d).map(|s| w * vec3::cnorm(s.amplitude).powi(2)))
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum::<f64>()
        / a2;
    let forward = far_field(sol, pw.direction())?.amplitude;
    let e = pw.polarization();
    let proj: Complex64 = (0..3).map(|c| e[c].conj() * forward[c]).sum::<Complex64>() * pw.amplitude().conj();
    let k = sol.wavenumbers().k;
    let optical_theorem = 4.0 * std::f64::consts::PI / k * proj.im / a2;
    Ok(CrossSections { sigma_scat, optical_theorem, optical_theorem_kind: kind })
}
