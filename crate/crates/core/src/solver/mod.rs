//! Solvers for the Galerkin system: dense LU and restarted GMRES on the
//! FFT matvec.

mod fft3;
mod fast;
mod gmres;

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assembly::GalerkinSystem;
use crate::error::{Result, VieError};

pub use fast::FftOperator;
pub use fft3::{smooth_size, Fft3};
pub use gmres::{gmres, GmresOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    /// Dense when `3M <= auto_dense_limit`, iterative otherwise.
    Auto,
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: SolveMethod,
    pub iterations: usize,
    pub relative_residual: f64,
    /// Wall time in seconds.
    pub elapsed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub method: SolverChoice,
    pub tol: f64,
    pub max_iter: usize,
    pub dense_cap: usize,
    pub auto_dense_limit: usize,
    pub restart: usize,
    pub precondition: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: SolverChoice::Auto,
            tol: 1e-8,
            max_iter: 2000,
            dense_cap: 6000,
            auto_dense_limit: 1500,
            restart: 60,
            precondition: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(VieError::Parameter(format!("solver tolerance must lie in (0, 1), got {}", self.tol)));
        }
        if self.max_iter == 0 || self.restart == 0 {
            return Err(VieError::Parameter("max_iter and restart must be positive".into()));
        }
        Ok(())
    }
}

fn rel_residual(ax: &[Complex64], b: &[Complex64]) -> f64 {
    let r: f64 = ax.iter().zip(b).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if nb == 0.0 {
        r
    } else {
        r / nb
    }
}

/// Solves with the method picked by `opts`.
pub fn solve(sys: &GalerkinSystem, opts: &SolverOptions) -> Result<(Vec<Complex64>, SolveReport)> {
    opts.validate()?;
    let dense = match opts.method {
        SolverChoice::Dense => true,
        SolverChoice::Iterative => false,
        SolverChoice::Auto => sys.dim() <= opts.auto_dense_limit.min(opts.dense_cap),
    };
    if dense {
        solve_dense_capped(sys, opts.dense_cap)
    } else {
        solve_iterative_with(sys, opts)
    }
}

/// LU solve of the materialized matrix, with the default dense cap.
pub fn solve_dense(sys: &GalerkinSystem) -> Result<(Vec<Complex64>, SolveReport)> {
    solve_dense_capped(sys, SolverOptions::default().dense_cap)
}

pub fn solve_dense_capped(sys: &GalerkinSystem, cap: usize) -> Result<(Vec<Complex64>, SolveReport)> {
    let n = sys.dim();
    if n > cap {
        return Err(VieError::Dimension(format!("system size {n} exceeds dense cap {cap}")));
    }
    let start = Instant::now();
    let a = sys.operator.to_dense();
    let (x, _) = lu_solve(&a, &sys.rhs)?;
    let ax = &a * DVector::from_column_slice(&x);
    let relative_residual = rel_residual(ax.as_slice(), &sys.rhs);
    Ok((
        x,
        SolveReport {
            method: SolveMethod::Dense,
            iterations: 0,
            relative_residual,
            elapsed: start.elapsed().as_secs_f64(),
        },
    ))
}

/// Partial-pivot LU solve. Returns the solution and the ratio of the
/// largest to the smallest pivot magnitude, a cheap lower bound on the
/// condition number.
pub fn lu_solve(a: &DMatrix<Complex64>, b: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(VieError::Dimension(format!(
            "matrix {}x{} with right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let lu = a.clone().lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition < 1e14) {
        return Err(VieError::SingularMatrix { condition });
    }
    let x = lu
        .solve(&DVector::from_column_slice(b))
        .ok_or(VieError::SingularMatrix { condition })?;
    Ok((x.as_slice().to_vec(), condition))
}

/// GMRES on the FFT matvec with default restart and no preconditioning.
pub fn solve_iterative(sys: &GalerkinSystem, tol: f64, max_iter: usize) -> Result<(Vec<Complex64>, SolveReport)> {
    let opts = SolverOptions {
        method: SolverChoice::Iterative,
        tol,
        max_iter,
        ..SolverOptions::default()
    };
    solve_iterative_with(sys, &opts)
}

pub fn solve_iterative_with(sys: &GalerkinSystem, opts: &SolverOptions) -> Result<(Vec<Complex64>, SolveReport)> {
    opts.validate()?;
    let start = Instant::now();
    let fast = FftOperator::new(&sys.operator);
    let precond = if opts.precondition {
        let op = &sys.operator;
        let mm = op.num_basis();
        let d0 = op.block([0, 0, 0]);
        Some((0..3 * mm).map(|r| 1.0 / d0[r / mm]).collect::<Vec<_>>())
    } else {
        None
    };
    let out = gmres(
        |x, y| fast.apply(x, y),
        &sys.rhs,
        opts.tol,
        opts.max_iter,
        opts.restart,
        precond.as_deref(),
    );
    if !out.converged {
        return Err(VieError::NonConvergence {
            iterations: out.iterations,
            residual: out.relative_residual,
        });
    }
    Ok((
        out.x,
        SolveReport {
            method: SolveMethod::Iterative,
            iterations: out.iterations,
            relative_residual: out.relative_residual,
            elapsed: start.elapsed().as_secs_f64(),
        },
    ))
}
