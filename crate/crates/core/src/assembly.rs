//! The Galerkin linear system.
//!
//! Testing the field equation with each hat and integrating the gradient
//! term by parts gives, for component `i` and test hat `m`,
//!
//! ```text
//! sum_m' <phi_m, phi_m'> c_im' - p sum_m' S_mm' c_im' + gamma sum_j sum_m' D^ij_mm' c_jm' = <E0_i, phi_m>
//! ```
//!
//! with `S` and `D` from [`crate::quadrature::galerkin`]. Unknowns are the
//! expansion coefficients `c_im` of `E_i = sum_m c_im phi_m`, ordered
//! component-major: index `i * M + m`.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{BasisSet, SparseSym};
use crate::error::{Result, VieError};
use crate::geometry::ScattererGrid;
use crate::green::packed_index;
use crate::medium::{MediumParams, PlaneWave, Wavenumbers};
use crate::quadrature::galerkin::hat_corr;
use crate::quadrature::{tensor_points, KernelTable, QuadratureRule};

/// Matrix of the Galerkin system; entries depend only on node offsets.
#[derive(Debug, Clone)]
pub struct GalerkinOperator {
    nodes: Vec<[usize; 3]>,
    h: f64,
    waves: Wavenumbers,
    gram: SparseSym,
    /// `None` at zero contrast, where the matrix is exactly the block Gram matrix.
    table: Option<KernelTable>,
    span_lo: [usize; 3],
    span_hi: [usize; 3],
}

impl GalerkinOperator {
    pub fn build(grid: &ScattererGrid, basis: &BasisSet, medium: &MediumParams, rule: &QuadratureRule) -> Result<Self> {
        rule.validate()?;
        if basis.len() != grid.interior_nodes().len() || basis.spacing() != grid.spacing() {
            return Err(VieError::Dimension("basis was not built from this grid".into()));
        }
        let waves = medium.wavenumbers()?;
        let (lo, hi) = grid.node_span();
        let table = if waves.contrast == Complex64::new(0.0, 0.0) {
            None
        } else {
            let extent = [0, 1, 2].map(|a| hi[a] - lo[a] + 1);
            Some(KernelTable::build(extent, waves.k, grid.spacing(), rule))
        };
        Ok(Self {
            nodes: basis.nodes().to_vec(),
            h: grid.spacing(),
            waves,
            gram: basis.gram().clone(),
            table,
            span_lo: lo,
            span_hi: hi,
        })
    }

    pub fn num_basis(&self) -> usize {
        self.nodes.len()
    }

    pub fn dim(&self) -> usize {
        3 * self.nodes.len()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn wavenumbers(&self) -> Wavenumbers {
        self.waves
    }

    pub fn nodes(&self) -> &[[usize; 3]] {
        &self.nodes
    }

    pub fn gram(&self) -> &SparseSym {
        &self.gram
    }

    pub fn kernel_table(&self) -> Option<&KernelTable> {
        self.table.as_ref()
    }

    /// Inclusive node-index span of the basis.
    pub fn node_span(&self) -> ([usize; 3], [usize; 3]) {
        (self.span_lo, self.span_hi)
    }

    /// Packed 3x3 block `[xx, yy, zz, xy, xz, yz]` coupling two nodes that
    /// are `delta` apart.
    pub fn block(&self, delta: [i64; 3]) -> [Complex64; 6] {
        let h3 = self.h.powi(3);
        let gram = if delta.iter().all(|d| d.abs() <= 1) {
            h3 * hat_corr(delta[0] as f64) * hat_corr(delta[1] as f64) * hat_corr(delta[2] as f64)
        } else {
            0.0
        };
        let mut out = [Complex64::new(0.0, 0.0); 6];
        for c in out.iter_mut().take(3) {
            *c = Complex64::from(gram);
        }
        if let Some(t) = &self.table {
            let e = t.get(delta);
            let diag = -self.waves.contrast * e.s * self.h.powi(5);
            for (c, v) in out.iter_mut().enumerate() {
                *v += self.waves.gamma * e.d[c] * h3;
                if c < 3 {
                    *v += diag;
                }
            }
        }
        out
    }

    /// Entry `A[(i, m), (j, mp)]`.
    pub fn entry(&self, i: usize, m: usize, j: usize, mp: usize) -> Complex64 {
        let a = self.nodes[m];
        let b = self.nodes[mp];
        let delta = [0, 1, 2].map(|x| b[x] as i64 - a[x] as i64);
        self.block(delta)[packed_index(i, j)]
    }

    /// Scalar-kernel part `S[(m, mp)]` (physical units).
    pub fn s_entry(&self, m: usize, mp: usize) -> Complex64 {
        let a = self.nodes[m];
        let b = self.nodes[mp];
        match &self.table {
            Some(t) => t.s([0, 1, 2].map(|x| b[x] as i64 - a[x] as i64)),
            None => Complex64::new(0.0, 0.0),
        }
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mm = self.num_basis();
        let n = 3 * mm;
        let mut a = DMatrix::<Complex64>::zeros(n, n);
        // nalgebra is column-major: fill column by column in parallel
        a.as_mut_slice()
            .par_chunks_mut(n)
            .enumerate()
            .for_each(|(col, column)| {
                let j = col / mm;
                let mp = col % mm;
                for m in 0..mm {
                    let nb = self.nodes[mp];
                    let na = self.nodes[m];
                    let block = self.block([0, 1, 2].map(|x| nb[x] as i64 - na[x] as i64));
                    for i in 0..3 {
                        column[i * mm + m] = block[packed_index(i, j)];
                    }
                }
            });
        a
    }

    /// Block Gram matrix applied to `x`.
    pub fn gram_apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let mm = self.num_basis();
        for c in 0..3 {
            self.gram.matvec(&x[c * mm..(c + 1) * mm], &mut y[c * mm..(c + 1) * mm]);
        }
    }
}

/// `A c = b` for one incident field.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub operator: Arc<GalerkinOperator>,
    pub rhs: Vec<Complex64>,
}

impl GalerkinSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// Same matrix, right-hand side for another incident field.
    pub fn with_incident(&self, basis: &BasisSet, incident: &PlaneWave) -> Self {
        Self {
            operator: Arc::clone(&self.operator),
            rhs: incident_projection(basis, incident, self.operator.waves.k),
        }
    }

    /// Raw dump: `rows: u64, cols: u64`, then `A` row-major as `(re, im)`
    /// f64 pairs, then `len: u64` and `b` as pairs; all little-endian.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let a = self.operator.to_dense();
        let n = a.nrows();
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        out.write_all(&(n as u64).to_le_bytes())?;
        out.write_all(&(a.ncols() as u64).to_le_bytes())?;
        for r in 0..n {
            for c in 0..a.ncols() {
                let v = a[(r, c)];
                out.write_all(&v.re.to_le_bytes())?;
                out.write_all(&v.im.to_le_bytes())?;
            }
        }
        out.write_all(&(self.rhs.len() as u64).to_le_bytes())?;
        for v in &self.rhs {
            out.write_all(&v.re.to_le_bytes())?;
            out.write_all(&v.im.to_le_bytes())?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `b[(i, m)] = int E0_i phi_m dx`, order-5 Gauss on each support cell.
pub fn incident_projection(basis: &BasisSet, incident: &PlaneWave, k: f64) -> Vec<Complex64> {
    let mm = basis.len();
    let h = basis.spacing();
    let vol = h * h * h;
    let pts = tensor_points(5);
    let per_node: Vec<[Complex64; 3]> = (0..mm)
        .into_par_iter()
        .map(|m| {
            let p = basis.node_position(m);
            let mut acc = [Complex64::new(0.0, 0.0); 3];
            for corner in 0..8 {
                let lo = [
                    p[0] - h + h * (corner & 1) as f64,
                    p[1] - h + h * ((corner >> 1) & 1) as f64,
                    p[2] - h + h * ((corner >> 2) & 1) as f64,
                ];
                for (t, w) in &pts {
                    let x = [0, 1, 2].map(|a| lo[a] + t[a] * h);
                    let phi = basis.value(m, x);
                    let e = incident.field(k, x);
                    for c in 0..3 {
                        acc[c] += e[c] * (phi * w);
                    }
                }
            }
            acc.map(|v| v * vol)
        })
        .collect();
    let mut b = vec![Complex64::new(0.0, 0.0); 3 * mm];
    for (m, v) in per_node.iter().enumerate() {
        for c in 0..3 {
            b[c * mm + m] = v[c];
        }
    }
    b
}

/// Builds `A` and `b`.
pub fn assemble(
    grid: &ScattererGrid,
    basis: &BasisSet,
    medium: &MediumParams,
    incident: &PlaneWave,
    rule: &QuadratureRule,
) -> Result<GalerkinSystem> {
    let operator = GalerkinOperator::build(grid, basis, medium, rule)?;
    let rhs = incident_projection(basis, incident, operator.waves.k);
    Ok(GalerkinSystem {
        operator: Arc::new(operator),
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::geometry::{voxelize, ScattererShape};

    fn setup(eps_rel: f64, sigma: f64) -> (ScattererGrid, BasisSet, MediumParams, PlaneWave) {
        let grid = voxelize(&ScattererShape::sphere([0.0; 3], 1.0).unwrap(), 0.34).unwrap();
        let basis = build_basis(&grid).unwrap();
        let medium = MediumParams::in_vacuum_with_wavenumber(0.8, eps_rel, sigma);
        let pw = PlaneWave::linear([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], 1.0).unwrap();
        (grid, basis, medium, pw)
    }

    #[test]
    fn zero_contrast_matrix_is_block_gram() {
        let (grid, basis, medium, pw) = setup(1.0, 0.0);
        let sys = assemble(&grid, &basis, &medium, &pw, &QuadratureRule::default()).unwrap();
        let a = sys.operator.to_dense();
        let mm = basis.len();
        for r in 0..3 * mm {
            for c in 0..3 * mm {
                let expect = if r / mm == c / mm { basis.gram().get(r % mm, c % mm) } else { 0.0 };
                assert_eq!(a[(r, c)], Complex64::from(expect));
            }
        }
    }

    #[test]
    fn matrix_is_complex_symmetric_and_sized() {
        let (grid, basis, medium, pw) = setup(2.0, 0.0);
        let sys = assemble(&grid, &basis, &medium, &pw, &QuadratureRule::default()).unwrap();
        let a = sys.operator.to_dense();
        assert_eq!(a.nrows(), 3 * basis.len());
        assert_eq!(sys.rhs.len(), 3 * basis.len());
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for r in 0..a.nrows() {
            for c in 0..r {
                assert!((a[(r, c)] - a[(c, r)]).norm() <= 1e-12 * scale);
            }
        }
        let mm = basis.len();
        for m in 0..mm {
            for mp in 0..mm {
                let s = sys.operator.s_entry(m, mp);
                assert!((s - sys.operator.s_entry(mp, m)).norm() <= 1e-10 * s.norm());
            }
        }
    }

    #[test]
    fn scalar_kernel_does_not_couple_components_without_gamma() {
        // the off-diagonal component blocks are gamma * D only
        let (grid, basis, medium, pw) = setup(1.7, 0.0);
        let sys = assemble(&grid, &basis, &medium, &pw, &QuadratureRule::default()).unwrap();
        let op = &sys.operator;
        let t = op.kernel_table().unwrap();
        let g = op.wavenumbers().gamma;
        for (m, mp) in [(0, 0), (0, 3), (5, 2)] {
            let na = op.nodes()[m];
            let nb = op.nodes()[mp];
            let d = [0, 1, 2].map(|x| nb[x] as i64 - na[x] as i64);
            let expect = g * t.d(d, 0, 2);
            assert!((op.entry(0, m, 2, mp) - expect).norm() <= 1e-14 * expect.norm().max(1e-300));
        }
    }

    #[test]
    fn rhs_is_linear_in_amplitude() {
        let (_, basis, _, pw) = setup(2.0, 0.0);
        let k = 0.8;
        let lam = Complex64::new(0.3, -1.7);
        let b1 = incident_projection(&basis, &pw, k);
        let b2 = incident_projection(&basis, &pw.with_amplitude(lam), k);
        for (x, y) in b1.iter().zip(&b2) {
            assert!((x * lam - y).norm() < 1e-15 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn binary_dump_layout() {
        let (grid, basis, medium, pw) = setup(2.0, 0.0);
        let sys = assemble(&grid, &basis, &medium, &pw, &QuadratureRule::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("system.bin");
        sys.write_binary(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let n = sys.dim();
        assert_eq!(bytes.len(), 16 + n * n * 16 + 8 + n * 16);
        let rd = |off: usize| f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
        assert_eq!(u64::from_le_bytes(bytes[0..8].try_into().unwrap()), n as u64);
        let a = sys.operator.to_dense();
        // row 1, column 2
        let off = 16 + (n + 2) * 16;
        assert_eq!(rd(off), a[(1, 2)].re);
        assert_eq!(rd(off + 8), a[(1, 2)].im);
        let b_off = 16 + n * n * 16 + 8;
        assert_eq!(rd(b_off + 16 * 3), sys.rhs[3].re);
    }
}
