//! Trilinear nodal hat functions on the interior nodes of a voxelised body.
//!
//! Every hat is supported on the eight cells around its node, all of which
//! are interior, so the hats vanish on the boundary of the voxelised body.

use num_complex::Complex64;

use crate::error::{Result, VieError};
use crate::geometry::ScattererGrid;
use crate::quadrature::galerkin::hat_corr;
use crate::vec3::Vec3;

/// Real symmetric sparse matrix in compressed-row form.
#[derive(Debug, Clone)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSym {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        match r.binary_search(&j) {
            Ok(p) => self.vals[self.row_ptr[i] + p],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| x[j] * v).sum();
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Hat basis `phi_m(x) = prod_a lambda((x_a - node_a) / h)` on the interior nodes.
#[derive(Debug, Clone)]
pub struct BasisSet {
    h: f64,
    origin: Vec3,
    nodes: Vec<[usize; 3]>,
    gram: SparseSym,
}

impl BasisSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn node(&self, m: usize) -> [usize; 3] {
        self.nodes[m]
    }

    pub fn nodes(&self) -> &[[usize; 3]] {
        &self.nodes
    }

    pub fn gram(&self) -> &SparseSym {
        &self.gram
    }

    pub fn node_position(&self, m: usize) -> Vec3 {
        let n = self.nodes[m];
        [0, 1, 2].map(|a| self.origin[a] + n[a] as f64 * self.h)
    }

    /// The eight support cells of `phi_m`.
    pub fn support(&self, m: usize) -> [[usize; 3]; 8] {
        let n = self.nodes[m];
        std::array::from_fn(|c| [n[0] - 1 + (c & 1), n[1] - 1 + ((c >> 1) & 1), n[2] - 1 + ((c >> 2) & 1)])
    }

    pub fn value(&self, m: usize, x: Vec3) -> f64 {
        let p = self.node_position(m);
        (0..3).map(|a| (1.0 - ((x[a] - p[a]) / self.h).abs()).max(0.0)).product()
    }

    /// `int phi_m dx = h^3`.
    pub fn integral(&self) -> f64 {
        self.h.powi(3)
    }
}

/// Builds the hat basis and its exact Gram matrix
/// `<phi_m, phi_m'> = h^3 prod_a a(delta_a)`.
pub fn build_basis(grid: &ScattererGrid) -> Result<BasisSet> {
    let nodes = grid.interior_nodes().to_vec();
    if nodes.is_empty() {
        return Err(VieError::GridTooCoarse);
    }
    let h = grid.spacing();
    let vol = h * h * h;
    let mut row_ptr = Vec::with_capacity(nodes.len() + 1);
    let mut cols = Vec::with_capacity(nodes.len() * 27);
    let mut vals = Vec::with_capacity(nodes.len() * 27);
    row_ptr.push(0);
    for n in &nodes {
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(27);
        for d0 in -1i64..=1 {
            for d1 in -1i64..=1 {
                for d2 in -1i64..=1 {
                    let q = [n[0] as i64 + d0, n[1] as i64 + d1, n[2] as i64 + d2];
                    if let Some(j) = grid.node_basis_index(q) {
                        let v = vol * hat_corr(d0 as f64) * hat_corr(d1 as f64) * hat_corr(d2 as f64);
                        row.push((j, v));
                    }
                }
            }
        }
        row.sort_by_key(|e| e.0);
        for (j, v) in row {
            cols.push(j);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(BasisSet {
        h,
        origin: grid.origin(),
        gram: SparseSym {
            n: nodes.len(),
            row_ptr,
            cols,
            vals,
        },
        nodes,
    })
}

/// Solves `gram x = b` for each of `ncomp` stacked blocks by conjugate
/// gradients (the Gram matrix is SPD with condition number below 27).
pub fn gram_solve(gram: &SparseSym, b: &[Complex64], tol: f64) -> Vec<Complex64> {
    let n = gram.dim();
    assert_eq!(b.len() % n, 0);
    let mut out = vec![Complex64::new(0.0, 0.0); b.len()];
    for (bb, xx) in b.chunks(n).zip(out.chunks_mut(n)) {
        let bnorm = norm(bb);
        if bnorm == 0.0 {
            continue;
        }
        let mut r = bb.to_vec();
        let mut p = r.clone();
        let mut ap = vec![Complex64::new(0.0, 0.0); n];
        let mut rr = norm(&r).powi(2);
        for _ in 0..10 * n + 100 {
            gram.matvec(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| (a.conj() * b).re).sum();
            let alpha = rr / pap;
            for i in 0..n {
                xx[i] += p[i] * alpha;
                r[i] -= ap[i] * alpha;
            }
            let rr_new = norm(&r).powi(2);
            if rr_new.sqrt() <= tol * bnorm {
                break;
            }
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..n {
                p[i] = r[i] + p[i] * beta;
            }
        }
    }
    out
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{voxelize, ScattererShape};

    #[test]
    fn cube_basis_size_and_gram_diagonal() {
        let n: usize = 5;
        let h = 0.2;
        let grid = voxelize(&ScattererShape::cube([0.0; 3], n as f64 * h).unwrap(), h).unwrap();
        let basis = build_basis(&grid).unwrap();
        assert_eq!(basis.len(), (n - 1).pow(3));
        for m in 0..basis.len() {
            assert!((basis.gram().get(m, m) - (2.0 * h / 3.0).powi(3)).abs() < 1e-15);
        }
    }

    #[test]
    fn gram_row_sums_equal_hat_integral_on_full_patches() {
        let h = 0.3;
        let grid = voxelize(&ScattererShape::cube([0.0; 3], 6.0 * h).unwrap(), h).unwrap();
        let basis = build_basis(&grid).unwrap();
        for m in 0..basis.len() {
            let n = basis.node(m).map(|v| v as i64);
            let full = (0..27).all(|c| {
                let d = [c % 3 - 1, (c / 3) % 3 - 1, c / 9 - 1];
                grid.node_basis_index([n[0] + d[0], n[1] + d[1], n[2] + d[2]]).is_some()
            });
            if full {
                let sum: f64 = basis.gram().row(m).map(|e| e.1).sum();
                assert!((sum - h.powi(3)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gram_is_positive_definite_and_symmetric() {
        let h = 1.0;
        let grid = voxelize(&ScattererShape::cube([0.0; 3], 4.0).unwrap(), h).unwrap();
        let basis = build_basis(&grid).unwrap();
        assert_eq!(basis.len(), 27);
        let dense = basis.gram().to_dense();
        assert_eq!(dense, dense.transpose());
        let eig = nalgebra::SymmetricEigen::new(dense);
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 0.0, "smallest eigenvalue {min}");
    }

    #[test]
    fn hats_vanish_outside_interior_region() {
        let grid = voxelize(&ScattererShape::sphere([0.0; 3], 1.0).unwrap(), 0.25).unwrap();
        let basis = build_basis(&grid).unwrap();
        for m in 0..basis.len() {
            for c in basis.support(m) {
                assert!(grid.is_interior_cell(c.map(|v| v as i64)));
            }
            let p = basis.node_position(m);
            assert!((basis.value(m, p) - 1.0).abs() < 1e-14);
            assert_eq!(basis.value(m, [p[0] + 0.25, p[1], p[2]]), 0.0);
        }
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let grid = voxelize(&ScattererShape::sphere([0.0; 3], 1.0).unwrap(), 1.2).unwrap();
        assert_eq!(build_basis(&grid).unwrap_err(), VieError::GridTooCoarse);
    }

    #[test]
    fn gram_solve_inverts_gram() {
        let grid = voxelize(&ScattererShape::sphere([0.0; 3], 1.0).unwrap(), 0.2).unwrap();
        let basis = build_basis(&grid).unwrap();
        let n = basis.len();
        let x: Vec<Complex64> = (0..2 * n).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut b = vec![Complex64::new(0.0, 0.0); 2 * n];
        basis.gram().matvec(&x[..n], &mut b[..n]);
        basis.gram().matvec(&x[n..], &mut b[n..]);
        let y = gram_solve(basis.gram(), &b, 1e-14);
        let err: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err / norm(&x) < 1e-12);
    }
}
