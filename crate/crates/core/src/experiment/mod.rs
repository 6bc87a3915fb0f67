//! Configuration-driven experiments: build, solve, post-process, write.

mod config;
mod output;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::assembly::{assemble, GalerkinSystem};
use crate::basis::{build_basis, BasisSet};
use crate::error::{Result, VieError};
use crate::field::{
    boundary_diagnostic, cross_sections, radiation_check, surface_samples, BoundaryReport, CrossSectionKind,
    CrossSections, FieldSolution, RadiationReport,
};
use crate::geometry::{voxelize, ScattererGrid, ScattererShape, ShapeKind};
use crate::oracles::MieSolution;
use crate::solver::{solve, SolveMethod, SolveReport};
use crate::vec3::{self, CVec3, Vec3};

pub use config::ExperimentConfig;
pub use output::{fmt9, round9};

/// Everything produced by one run, before anything is written.
#[derive(Debug)]
pub struct RunResult {
    pub config: ExperimentConfig,
    pub shape: ScattererShape,
    pub grid: Arc<ScattererGrid>,
    pub basis: Arc<BasisSet>,
    pub system: GalerkinSystem,
    pub report: SolveReport,
    pub solution: FieldSolution,
    pub cross_sections: CrossSections,
    pub probes: Vec<Vec3>,
    pub boundary: Option<BoundaryReport>,
    pub radiation: Option<RadiationReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub num_basis: usize,
    pub unknowns: usize,
    pub interior_cells: usize,
    pub h: f64,
    pub k: f64,
    pub eps_rel_re: f64,
    pub eps_rel_im: f64,
    pub method: SolveMethod,
    pub iterations: usize,
    pub relative_residual: f64,
    pub sigma_scat: f64,
    pub optical_theorem: f64,
    pub optical_theorem_kind: CrossSectionKind,
    pub mie_sigma_scat: Option<f64>,
    pub boundary_mean_tangential: Option<f64>,
    pub boundary_mean_normal: Option<f64>,
    pub radiation_slope: Option<f64>,
}

impl Summary {
    pub fn line(&self) -> String {
        format!(
            "M={} method={} residual={} sigma_scat={}",
            self.num_basis,
            match self.method {
                SolveMethod::Dense => "dense",
                SolveMethod::Iterative => "iterative",
            },
            fmt9(self.relative_residual),
            fmt9(self.sigma_scat)
        )
    }
}

/// Mie reference for sphere configs.
pub fn mie_reference(cfg: &ExperimentConfig) -> Result<Option<MieSolution>> {
    let shape = cfg.build_shape()?;
    let ShapeKind::Sphere { center, radius } = shape.kind() else {
        return Ok(None);
    };
    let medium = cfg.medium()?;
    let k = medium.wavenumbers()?.k;
    Ok(Some(MieSolution::new(radius, medium.relative_permittivity(), k)?.centered_at(center)))
}

fn probe_points(cfg: &ExperimentConfig) -> Vec<Vec3> {
    let mut pts = cfg.probes.clone();
    if cfg.random_probes > 0 {
        let r = cfg.probe_radius.unwrap_or(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.random_probes {
            let z: f64 = rng.random_range(-1.0..1.0);
            let phi: f64 = rng.random_range(0.0..2.0 * std::f64::consts::PI);
            let s = (1.0 - z * z).sqrt();
            pts.push(vec3::add(cfg.center, [r * s * phi.cos(), r * s * phi.sin(), r * z]));
        }
    }
    pts
}

/// Runs voxelize, basis, assembly, solve and the post-processing in memory.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<RunResult> {
    cfg.validate()?;
    let shape = cfg.build_shape()?;
    let h = cfg.spacing()?;
    let medium = cfg.medium()?;
    let incident = cfg.incident()?;
    let grid = Arc::new(voxelize(&shape, h)?);
    let basis = Arc::new(build_basis(&grid)?);
    let system = assemble(&grid, &basis, &medium, &incident, &cfg.quadrature()?)?;
    let (coefficients, report) = solve(&system, &cfg.solver_options())?;
    let solution = FieldSolution::new(grid.clone(), basis.clone(), medium, incident, coefficients)?;
    let cross = cross_sections(&solution, &cfg.cross_section_rule())?;
    let boundary = if cfg.boundary_samples > 0 {
        let samples = surface_samples(&shape, cfg.boundary_samples)?;
        Some(boundary_diagnostic(&solution, &samples, cfg.boundary_delta.unwrap_or(0.5 * h))?)
    } else {
        None
    };
    let radiation = if cfg.radiation_check {
        let k = solution.wavenumbers().k;
        let d = shape.bounding_box().diameter();
        let r0 = (20.0 * d).max(50.0 / k);
        let radii: Vec<f64> = (0..4).map(|i| r0 * 2f64.powi(i)).collect();
        let dirs = [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, -0.6, 0.8]];
        Some(radiation_check(&solution, &dirs, &radii)?)
    } else {
        None
    };
    Ok(RunResult {
        config: cfg.clone(),
        shape,
        grid,
        basis,
        system,
        report,
        solution,
        cross_sections: cross,
        probes: probe_points(cfg),
        boundary,
        radiation,
    })
}

impl RunResult {
    pub fn summary(&self) -> Result<Summary> {
        let eps = self.solution.medium().relative_permittivity();
        Ok(Summary {
            num_basis: self.basis.len(),
            unknowns: 3 * self.basis.len(),
            interior_cells: self.grid.interior_cells().len(),
            h: self.grid.spacing(),
            k: self.solution.wavenumbers().k,
            eps_rel_re: eps.re,
            eps_rel_im: eps.im,
            method: self.report.method,
            iterations: self.report.iterations,
            relative_residual: self.report.relative_residual,
            sigma_scat: self.cross_sections.sigma_scat,
            optical_theorem: self.cross_sections.optical_theorem,
            optical_theorem_kind: self.cross_sections.optical_theorem_kind,
            mie_sigma_scat: mie_reference(&self.config)?.map(|m| m.sigma_scat()),
            boundary_mean_tangential: self.boundary.as_ref().map(|b| b.mean_tangential),
            boundary_mean_normal: self.boundary.as_ref().map(|b| b.mean_normal),
            radiation_slope: self.radiation.as_ref().and_then(|r| r.slope),
        })
    }

    /// Far-field amplitudes on the configured `(theta, phi)` table.
    pub fn far_field_table(&self) -> Result<Vec<(f64, f64, CVec3)>> {
        use rayon::prelude::*;
        self.config
            .far_field_angles()
            .par_iter()
            .map(|&(t, p)| {
                let d = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
                self.solution.far_field(d).map(|s| (t, p, s.amplitude))
            })
            .collect()
    }

    /// Writes every output file into `config.output_dir`.
    pub fn write_outputs(&self) -> Result<Summary> {
        let dir = &self.config.output_dir;
        std::fs::create_dir_all(dir)?;
        let summary = self.summary()?;
        output::write_far_field(&dir.join("far_field.csv"), &self.far_field_table()?)?;
        let values = self.solution.eval_fields(&self.probes);
        output::write_probes(&dir.join("probes.csv"), &self.probes, &values)?;
        if let Some(b) = &self.boundary {
            output::write_boundary(&dir.join("boundary.csv"), b)?;
        }
        if let Some(r) = &self.radiation {
            output::write_radiation(&dir.join("radiation.csv"), r)?;
        }
        if self.config.dump_system {
            self.system.write_binary(&dir.join("system.bin"))?;
        }
        output::write_json(&dir.join("summary.json"), &summary)?;
        Ok(summary)
    }
}

/// `run_pipeline` followed by `write_outputs`.
pub fn run(cfg: &ExperimentConfig) -> Result<Summary> {
    run_pipeline(cfg)?.write_outputs()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRow {
    pub h: f64,
    pub num_basis: usize,
    pub sigma_scat: f64,
    /// Angular L2 norm of `A_l - A_(l-1)`.
    pub far_field_difference: Option<f64>,
    /// `log(d_(l-1) / d_l) / log(h_(l-1) / h_l)`.
    pub empirical_order: Option<f64>,
    /// `|sigma - sigma_mie| / sigma_mie` for spheres.
    pub mie_relative_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<LevelRow>,
    /// Consecutive far-field differences strictly decrease.
    pub monotone_decrease: bool,
}

/// Re-runs the experiment at each spacing in `levels` (coarse to fine).
pub fn convergence_study(cfg: &ExperimentConfig, levels: &[f64]) -> Result<ConvergenceReport> {
    if levels.len() < 3 {
        return Err(VieError::Config("a convergence study needs at least three levels".into()));
    }
    let mie = mie_reference(cfg)?;
    let rule = cfg.cross_section_rule();
    let dirs = rule.points();
    let mut rows: Vec<LevelRow> = Vec::new();
    let mut prev: Option<Vec<CVec3>> = None;
    for &h in levels {
        let mut level_cfg = cfg.clone();
        level_cfg.h = Some(h);
        level_cfg.cells_per_diameter = None;
        level_cfg.boundary_samples = 0;
        level_cfg.radiation_check = false;
        let res = run_pipeline(&level_cfg)?;
        let amps = dirs
            .iter()
            .map(|&(_, _, d, _)| res.solution.far_field(d).map(|s| s.amplitude))
            .collect::<Result<Vec<_>>>()?;
        let diff = prev.as_ref().map(|p| {
            dirs.iter()
                .zip(p.iter().zip(&amps))
                .map(|(&(_, _, _, w), (a, b))| w * vec3::cnorm(vec3::csub(*a, *b)).powi(2))
                .sum::<f64>()
                .sqrt()
        });
        let order = match (rows.last(), diff) {
            (Some(last), Some(d)) => last
                .far_field_difference
                .filter(|&dp| dp > 0.0 && d > 0.0)
                .map(|dp| (dp / d).ln() / (last.h / h).ln()),
            _ => None,
        };
        let sigma = res.cross_sections.sigma_scat;
        rows.push(LevelRow {
            h,
            num_basis: res.basis.len(),
            sigma_scat: sigma,
            far_field_difference: diff,
            empirical_order: order,
            mie_relative_error: mie.as_ref().map(|m| (sigma - m.sigma_scat()).abs() / m.sigma_scat()),
        });
        prev = Some(amps);
    }
    let diffs: Vec<f64> = rows.iter().filter_map(|r| r.far_field_difference).collect();
    let monotone_decrease = diffs.windows(2).all(|w| w[1] < w[0]);
    Ok(ConvergenceReport { levels: rows, monotone_decrease })
}

/// Convergence study plus `convergence.csv` and `convergence.json`.
pub fn run_convergence(cfg: &ExperimentConfig, levels: &[f64]) -> Result<ConvergenceReport> {
    let rep = convergence_study(cfg, levels)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    output::write_convergence(&cfg.output_dir.join("convergence.csv"), &rep)?;
    output::write_json(&cfg.output_dir.join("convergence.json"), &rep)?;
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MieSummary {
    pub size_parameter: f64,
    pub truncation: usize,
    pub sigma_scat: f64,
    pub sigma_ext: f64,
}

/// Oracle-only run for sphere configs: Mie far-field table on the
/// configured angular grid, amplitude functions and a summary.
pub fn run_mie(cfg: &ExperimentConfig) -> Result<MieSummary> {
    cfg.validate()?;
    let mie = mie_reference(cfg)?
        .ok_or_else(|| VieError::Config(format!("the Mie oracle needs shape = \"sphere\", got '{}'", cfg.shape)))?;
    let incident = cfg.incident()?;
    let table: Vec<(f64, f64, CVec3)> = cfg
        .far_field_angles()
        .into_iter()
        .map(|(t, p)| (t, p, mie.far_field([t.sin() * p.cos(), t.sin() * p.sin(), t.cos()], &incident)))
        .collect();
    std::fs::create_dir_all(&cfg.output_dir)?;
    output::write_far_field(&cfg.output_dir.join("mie_far_field.csv"), &table)?;
    let thetas: Vec<f64> = (0..cfg.far_theta)
        .map(|i| std::f64::consts::PI * i as f64 / (cfg.far_theta - 1) as f64)
        .collect();
    std::fs::write(cfg.output_dir.join("mie_amplitudes.csv"), mie.amplitude_csv(&thetas))?;
    let summary = MieSummary {
        size_parameter: mie.size_parameter(),
        truncation: mie.truncation(),
        sigma_scat: mie.sigma_scat(),
        sigma_ext: mie.sigma_ext(),
    };
    output::write_json(&cfg.output_dir.join("mie_summary.json"), &summary)?;
    Ok(summary)
}
