//! In-place 3D FFT on a row-major `[n0][n1][n2]` array built from 1D
//! transforms along the contiguous axis and cyclic axis rotations.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

/// Smallest `n >= min` whose prime factors are all 2, 3 or 5.
pub fn smooth_size(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut r = n;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return n;
        }
        n += 1;
    }
}

pub struct Fft3 {
    dims: [usize; 3],
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("dims", &self.dims).finish()
    }
}

impl Fft3 {
    pub fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = dims.map(|n| planner.plan_fft(n, FftDirection::Forward));
        let inverse = dims.map(|n| planner.plan_fft(n, FftDirection::Inverse));
        Self { dims, forward, inverse }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, data: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>) {
        self.run(data, scratch, &self.forward, |_, _, _| true);
    }

    /// Inverse transform including the `1/N` factor.
    pub fn inverse(&self, data: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>) {
        self.run(data, scratch, &self.inverse, |_, _, _| true);
        self.normalize(data);
    }

    /// Forward transform of data that vanishes outside the leading
    /// `extent` block; lines known to be zero are skipped.
    pub fn forward_pruned(&self, data: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>, extent: [usize; 3]) {
        // pass 0 lines are (x, y), pass 1 lines are (z, x), pass 2 lines are (y, z)
        self.run(data, scratch, &self.forward, |pass, a, b| match pass {
            0 => a < extent[0] && b < extent[1],
            1 => b < extent[0],
            _ => true,
        });
    }

    /// Inverse transform that is only accurate inside the leading `extent`
    /// block; lines that cannot reach it are skipped.
    pub fn inverse_pruned(&self, data: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>, extent: [usize; 3]) {
        self.run(data, scratch, &self.inverse, |pass, a, b| match pass {
            0 => true,
            1 => a < extent[2],
            _ => a < extent[1] && b < extent[2],
        });
        self.normalize(data);
    }

    fn normalize(&self, data: &mut [Complex64]) {
        let s = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|v| *v *= s);
    }

    fn run(
        &self,
        data: &mut Vec<Complex64>,
        scratch: &mut Vec<Complex64>,
        plans: &[Arc<dyn Fft<f64>>; 3],
        keep: impl Fn(usize, usize, usize) -> bool,
    ) {
        assert_eq!(data.len(), self.len());
        scratch.resize(data.len(), Complex64::new(0.0, 0.0));
        let mut work = Vec::new();
        // layout [a][b][c]: transform c, then rotate to [c][a][b]
        let mut shape = self.dims;
        let mut axis = 2;
        for pass in 0..3 {
            let plan = &plans[axis];
            let n = shape[2];
            work.resize(plan.get_inplace_scratch_len(), Complex64::new(0.0, 0.0));
            for a in 0..shape[0] {
                for b in 0..shape[1] {
                    if keep(pass, a, b) {
                        let start = (a * shape[1] + b) * n;
                        plan.process_with_scratch(&mut data[start..start + n], &mut work);
                    }
                }
            }
            transpose(data, scratch, shape[0] * shape[1], n);
            std::mem::swap(data, scratch);
            shape = [shape[2], shape[0], shape[1]];
            axis = (axis + 2) % 3;
        }
    }
}

/// `dst[c * rows + r] = src[r * cols + c]`, blocked for cache reuse.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const B: usize = 32;
    for r0 in (0..rows).step_by(B) {
        let r1 = (r0 + B).min(rows);
        for c0 in (0..cols).step_by(B) {
            let c1 = (c0 + B).min(cols);
            for r in r0..r1 {
                for c in c0..c1 {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}
