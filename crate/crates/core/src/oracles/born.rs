use std::sync::Arc;

use crate::assembly::incident_projection;
use crate::basis::{build_basis, gram_solve, BasisSet};
use crate::error::{Result, VieError};
use crate::field::FieldSolution;
use crate::geometry::ScattererGrid;
use crate::medium::{MediumParams, PlaneWave};
use crate::vec3::{CVec3, Vec3};

/// One fixed-point step `E0 + T E0 + gamma Q E0`.
///
/// `E0` is replaced by its hat projection, so the volume integral runs
/// through the same basis and quadrature as the solver's field evaluation;
/// the only thing skipped is the linear solve.
#[derive(Debug, Clone)]
pub struct BornField {
    inner: FieldSolution,
}

impl BornField {
    pub fn new(grid: Arc<ScattererGrid>, medium: MediumParams, incident: PlaneWave) -> Result<Self> {
        let basis = Arc::new(build_basis(&grid)?);
        Self::with_basis(grid, basis, medium, incident)
    }

    pub fn with_basis(
        grid: Arc<ScattererGrid>,
        basis: Arc<BasisSet>,
        medium: MediumParams,
        incident: PlaneWave,
    ) -> Result<Self> {
        let k = medium.wavenumbers()?.k;
        let b = incident_projection(&basis, &incident, k);
        let c0 = gram_solve(basis.gram(), &b, 1e-14);
        let inner = FieldSolution::new(grid, basis, medium, incident, c0)?;
        Ok(Self { inner })
    }

    /// Total Born field at an exterior point.
    pub fn eval(&self, x: Vec3) -> Result<CVec3> {
        let f = self.inner.eval_field(x);
        if f.interior {
            return Err(VieError::UnsupportedLocation(format!(
                "the Born field is evaluated outside the scatterer; {x:?} is inside"
            )));
        }
        Ok(f.value)
    }

    /// Scattered part `T E0 + gamma Q E0`.
    pub fn scattered(&self, x: Vec3) -> Result<CVec3> {
        let e = self.eval(x)?;
        let e0 = self.inner.incident().field(self.inner.wavenumbers().k, x);
        Ok([0, 1, 2].map(|c| e[c] - e0[c]))
    }

    pub fn as_solution(&self) -> &FieldSolution {
        &self.inner
    }
}

/// Convenience wrapper evaluating a single point.
pub fn born_field(grid: &ScattererGrid, medium: &MediumParams, incident: &PlaneWave, x: Vec3) -> Result<CVec3> {
    BornField::new(Arc::new(grid.clone()), *medium, *incident)?.eval(x)
}
