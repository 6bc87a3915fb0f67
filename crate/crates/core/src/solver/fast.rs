//! Matrix-free product with the Galerkin matrix.
//!
//! Every block `A[m, m']` depends only on `node(m') - node(m)` and is even
//! under `delta -> -delta`, so `y = A x` is a discrete convolution over the
//! node bounding box. Each of the six distinct tensor components is
//! convolved by zero-padded FFT.

use num_complex::Complex64;

use super::fft3::{smooth_size, Fft3};
use crate::assembly::GalerkinOperator;
use crate::green::packed_index;

#[derive(Debug)]
pub struct FftOperator {
    fft: Fft3,
    /// Flat padded-grid index for each basis node.
    slots: Vec<usize>,
    /// Node bounding box; inputs vanish and outputs are read only inside it.
    extent: [usize; 3],
    /// Transformed kernels, packed `[xx, yy, zz, xy, xz, yz]`.
    kernels: [Vec<Complex64>; 6],
}

impl FftOperator {
    pub fn new(op: &GalerkinOperator) -> Self {
        let (lo, hi) = op.node_span();
        let extent = [0, 1, 2].map(|a| hi[a] - lo[a] + 1);
        let local: Vec<[usize; 3]> = op
            .nodes()
            .iter()
            .map(|n| [0, 1, 2].map(|a| n[a] - lo[a]))
            .collect();
        Self::from_blocks(extent, &local, |d| op.block(d))
    }

    /// Builds the operator for nodes at `local` positions inside a box of
    /// `extent` nodes, with block function `block(delta)`.
    pub fn from_blocks(
        extent: [usize; 3],
        local: &[[usize; 3]],
        block: impl Fn([i64; 3]) -> [Complex64; 6],
    ) -> Self {
        let dims = extent.map(|l| smooth_size(2 * l - 1));
        let fft = Fft3::new(dims);
        let n = fft.len();
        let mut kernels: [Vec<Complex64>; 6] = std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n]);
        let wrap = |i: usize, a: usize| -> Option<i64> {
            if i < extent[a] {
                Some(i as i64)
            } else if i + extent[a] > dims[a] {
                Some(i as i64 - dims[a] as i64)
            } else {
                None
            }
        };
        for i0 in 0..dims[0] {
            let Some(d0) = wrap(i0, 0) else { continue };
            for i1 in 0..dims[1] {
                let Some(d1) = wrap(i1, 1) else { continue };
                for i2 in 0..dims[2] {
                    let Some(d2) = wrap(i2, 2) else { continue };
                    let b = block([d0, d1, d2]);
                    let idx = (i0 * dims[1] + i1) * dims[2] + i2;
                    for c in 0..6 {
                        kernels[c][idx] = b[c];
                    }
                }
            }
        }
        let mut scratch = Vec::new();
        for k in kernels.iter_mut() {
            fft.forward(k, &mut scratch);
        }
        let slots = local
            .iter()
            .map(|p| (p[0] * dims[1] + p[1]) * dims[2] + p[2])
            .collect();
        Self { fft, slots, extent, kernels }
    }

    pub fn dim(&self) -> usize {
        3 * self.slots.len()
    }

    pub fn padded_dims(&self) -> [usize; 3] {
        self.fft.dims()
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let mm = self.slots.len();
        assert_eq!(x.len(), 3 * mm);
        assert_eq!(y.len(), 3 * mm);
        let n = self.fft.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut scratch = Vec::new();
        let mut xs: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![zero; n]);
        for (j, buf) in xs.iter_mut().enumerate() {
            for (m, &s) in self.slots.iter().enumerate() {
                buf[s] = x[j * mm + m];
            }
            self.fft.forward_pruned(buf, &mut scratch, self.extent);
        }
        let mut out = vec![zero; n];
        for i in 0..3 {
            let [k0, k1, k2] = [0, 1, 2].map(|j| &self.kernels[packed_index(i, j)]);
            for (t, o) in out.iter_mut().enumerate() {
                *o = k0[t] * xs[0][t] + k1[t] * xs[1][t] + k2[t] * xs[2][t];
            }
            self.fft.inverse_pruned(&mut out, &mut scratch, self.extent);
            for (m, &s) in self.slots.iter().enumerate() {
                y[i * mm + m] = out[s];
            }
        }
    }
}
