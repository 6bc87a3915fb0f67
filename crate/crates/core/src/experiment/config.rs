use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VieError};
use crate::field::AngularRule;
use crate::geometry::ScattererShape;
use crate::medium::{MediumParams, PlaneWave, EPS0, MU0};
use crate::quadrature::QuadratureRule;
use crate::solver::{SolverChoice, SolverOptions};

/// Flat experiment description. Every key is optional unless noted, and
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `sphere`, `cube`, `cuboid` or `ellipsoid` (required).
    pub shape: String,
    #[serde(default)]
    pub center: [f64; 3],
    /// Sphere radius.
    pub radius: Option<f64>,
    /// Cube edge.
    pub side: Option<f64>,
    /// Cuboid edges.
    pub sides: Option<[f64; 3]>,
    /// Ellipsoid semi-axes.
    pub semi_axes: Option<[f64; 3]>,

    /// Real part of the relative permittivity (required).
    pub eps_rel: f64,
    /// Imaginary part of the relative permittivity; exclusive with `sigma`.
    pub eps_rel_imag: Option<f64>,
    /// Conductivity in S/m; exclusive with `eps_rel_imag`.
    pub sigma: Option<f64>,
    /// Angular frequency; exactly one of `omega` and `k`.
    pub omega: Option<f64>,
    /// Exterior wavenumber; exactly one of `omega` and `k`.
    pub k: Option<f64>,

    /// Grid spacing; exactly one of `h` and `cells_per_diameter`.
    pub h: Option<f64>,
    pub cells_per_diameter: Option<f64>,

    #[serde(default = "default_direction")]
    pub direction: [f64; 3],
    #[serde(default = "default_polarization")]
    pub polarization: [f64; 3],
    #[serde(default)]
    pub polarization_imag: [f64; 3],
    #[serde(default = "one")]
    pub amplitude: f64,

    #[serde(default = "default_solver")]
    pub solver: SolverChoice,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_dense_cap")]
    pub dense_cap: usize,
    #[serde(default = "default_restart")]
    pub restart: usize,
    #[serde(default)]
    pub precondition: bool,

    #[serde(default = "default_order")]
    pub quad_order: usize,
    #[serde(default = "default_near_order")]
    pub quad_near_order: usize,
    #[serde(default = "default_near_radius")]
    pub quad_near_radius: f64,

    /// Far-field table: `far_theta` polar angles in `[0, pi]` (inclusive)
    /// times `far_phi` azimuths in `[0, 2 pi)`.
    #[serde(default = "default_far_theta")]
    pub far_theta: usize,
    #[serde(default = "default_far_phi")]
    pub far_phi: usize,
    /// Angular rule for the scattering cross section.
    #[serde(default = "default_cross_theta")]
    pub cross_theta: usize,
    #[serde(default = "default_cross_phi")]
    pub cross_phi: usize,

    #[serde(default)]
    pub probes: Vec<[f64; 3]>,
    /// Extra probe points drawn uniformly on a sphere of `probe_radius`.
    #[serde(default)]
    pub random_probes: usize,
    pub probe_radius: Option<f64>,

    /// Surface sample pairs for the interface diagnostic (0 disables it).
    #[serde(default)]
    pub boundary_samples: usize,
    /// Offset along the normal; defaults to `h / 2`.
    pub boundary_delta: Option<f64>,
    #[serde(default)]
    pub radiation_check: bool,

    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub dump_system: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_direction() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}
fn default_polarization() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}
fn one() -> f64 {
    1.0
}
fn default_solver() -> SolverChoice {
    SolverChoice::Auto
}
fn default_tol() -> f64 {
    SolverOptions::default().tol
}
fn default_max_iter() -> usize {
    SolverOptions::default().max_iter
}
fn default_dense_cap() -> usize {
    SolverOptions::default().dense_cap
}
fn default_restart() -> usize {
    SolverOptions::default().restart
}
fn default_order() -> usize {
    QuadratureRule::default().order
}
fn default_near_order() -> usize {
    QuadratureRule::default().near_order
}
fn default_near_radius() -> f64 {
    QuadratureRule::default().near_field_radius
}
fn default_far_theta() -> usize {
    19
}
fn default_far_phi() -> usize {
    36
}
fn default_cross_theta() -> usize {
    AngularRule::default().n_theta
}
fn default_cross_phi() -> usize {
    AngularRule::default().n_phi
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("vie-output")
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| VieError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; a relative `output_dir` is resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| VieError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if cfg.output_dir.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.output_dir = dir.join(&cfg.output_dir);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.build_shape()?;
        self.medium()?.validate()?;
        self.incident()?;
        self.spacing()?;
        self.quadrature()?;
        self.solver_options().validate()?;
        if self.far_theta < 2 || self.far_phi < 1 || self.cross_theta < 1 || self.cross_phi < 1 {
            return Err(VieError::Config("angular grids need far_theta >= 2 and positive counts".into()));
        }
        if self.random_probes > 0 && !self.probe_radius.is_some_and(|r| r > 0.0) {
            return Err(VieError::Config("random_probes needs a positive probe_radius".into()));
        }
        if self.boundary_delta.is_some_and(|d| !(d > 0.0)) {
            return Err(VieError::Config("boundary_delta must be positive".into()));
        }
        Ok(())
    }

    fn need(&self, name: &str, v: Option<f64>) -> Result<f64> {
        v.ok_or_else(|| VieError::Config(format!("shape '{}' needs key '{name}'", self.shape)))
    }

    fn need3(&self, name: &str, v: Option<[f64; 3]>) -> Result<[f64; 3]> {
        v.ok_or_else(|| VieError::Config(format!("shape '{}' needs key '{name}'", self.shape)))
    }

    pub fn build_shape(&self) -> Result<ScattererShape> {
        let used = [
            ("radius", self.radius.is_some()),
            ("side", self.side.is_some()),
            ("sides", self.sides.is_some()),
            ("semi_axes", self.semi_axes.is_some()),
        ];
        let own = match self.shape.as_str() {
            "sphere" => "radius",
            "cube" => "side",
            "cuboid" => "sides",
            "ellipsoid" => "semi_axes",
            other => {
                return Err(VieError::Config(format!(
                    "unknown shape '{other}' (expected sphere, cube, cuboid or ellipsoid)"
                )))
            }
        };
        if let Some((name, _)) = used.iter().find(|(n, set)| *set && *n != own) {
            return Err(VieError::Config(format!("key '{name}' does not apply to shape '{}'", self.shape)));
        }
        let c = self.center;
        match own {
            "radius" => ScattererShape::sphere(c, self.need("radius", self.radius)?),
            "side" => ScattererShape::cube(c, self.need("side", self.side)?),
            "sides" => ScattererShape::cuboid(c, self.need3("sides", self.sides)?),
            _ => ScattererShape::ellipsoid(c, self.need3("semi_axes", self.semi_axes)?),
        }
    }

    pub fn medium(&self) -> Result<MediumParams> {
        let omega = match (self.omega, self.k) {
            (Some(w), None) => w,
            (None, Some(k)) => k / (EPS0 * MU0).sqrt(),
            _ => return Err(VieError::Config("set exactly one of 'omega' and 'k'".into())),
        };
        let sigma = match (self.sigma, self.eps_rel_imag) {
            (Some(_), Some(_)) => {
                return Err(VieError::Config("set at most one of 'sigma' and 'eps_rel_imag'".into()))
            }
            (Some(s), None) => s,
            (None, Some(im)) => im * EPS0 * omega,
            (None, None) => 0.0,
        };
        let m = MediumParams::in_vacuum(omega, self.eps_rel, sigma);
        m.validate().map_err(|e| VieError::Config(e.to_string()))?;
        Ok(m)
    }

    pub fn incident(&self) -> Result<PlaneWave> {
        let pol = [0, 1, 2].map(|c| Complex64::new(self.polarization[c], self.polarization_imag[c]));
        PlaneWave::new(self.direction, pol, Complex64::from(self.amplitude))
            .map_err(|e| VieError::Config(e.to_string()))
    }

    /// Grid spacing from `h` or `cells_per_diameter`.
    pub fn spacing(&self) -> Result<f64> {
        match (self.h, self.cells_per_diameter) {
            (Some(h), None) if h > 0.0 => Ok(h),
            (None, Some(n)) if n > 0.0 => Ok(self.build_shape()?.bounding_box().min_extent() / n),
            (Some(_), Some(_)) | (None, None) => {
                Err(VieError::Config("set exactly one of 'h' and 'cells_per_diameter'".into()))
            }
            _ => Err(VieError::Config("grid resolution must be positive".into())),
        }
    }

    pub fn quadrature(&self) -> Result<QuadratureRule> {
        QuadratureRule::new(self.quad_order, self.quad_near_order, self.quad_near_radius)
            .map_err(|e| VieError::Config(e.to_string()))
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            method: self.solver,
            tol: self.tol,
            max_iter: self.max_iter,
            dense_cap: self.dense_cap,
            restart: self.restart,
            precondition: self.precondition,
            ..SolverOptions::default()
        }
    }

    pub fn cross_section_rule(&self) -> AngularRule {
        AngularRule { n_theta: self.cross_theta, n_phi: self.cross_phi }
    }

    /// `(theta, phi)` pairs of the far-field table, theta-major.
    pub fn far_field_angles(&self) -> Vec<(f64, f64)> {
        let pi = std::f64::consts::PI;
        let mut out = Vec::with_capacity(self.far_theta * self.far_phi);
        for i in 0..self.far_theta {
            let theta = pi * i as f64 / (self.far_theta - 1) as f64;
            for j in 0..self.far_phi {
                out.push((theta, 2.0 * pi * j as f64 / self.far_phi as f64));
            }
        }
        out
    }
}
