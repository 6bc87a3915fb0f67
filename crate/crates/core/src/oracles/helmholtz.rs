use num_complex::Complex64;

use crate::error::{Result, VieError};
use crate::vec3::{CVec3, Vec3};

/// Finite-difference residual of `curl curl E - k^2 E - p E = 0` at `x`.
///
/// Uses `curl curl E = grad(div E) - laplacian E` with second-order central
/// differences of step `step`: `(f(x+s e_a) - 2 f(x) + f(x-s e_a)) / s^2`
/// on the diagonal and the four-point cross stencil for mixed derivatives
/// (19 field evaluations). The result is `|residual| / (k^2 |E(x)|)`, which
/// is dimensionless.
pub fn helmholtz_residual(
    field: impl Fn(Vec3) -> CVec3,
    x: Vec3,
    k: f64,
    p: Complex64,
    step: f64,
) -> Result<f64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(VieError::Parameter(format!("wavenumber must be positive, got {k}")));
    }
    let scale = x.iter().fold(1.0 / k, |m, v| m.max(v.abs()));
    if !(step.is_finite() && step > 0.0) || step < 1e-7 * scale || x.iter().any(|&v| v + step == v) {
        return Err(VieError::Parameter(format!(
            "finite-difference step {step} is too small for |x| = {scale}"
        )));
    }
    let at = |da: [i32; 3]| field([0, 1, 2].map(|c| x[c] + da[c] as f64 * step));
    let f0 = at([0, 0, 0]);
    let s2 = step * step;
    // hess[a][b][c] = d_a d_b E_c
    let mut hess = [[[Complex64::new(0.0, 0.0); 3]; 3]; 3];
    for a in 0..3 {
        let mut e = [0; 3];
        e[a] = 1;
        let fp = at(e);
        let fm = at(e.map(|v| -v));
        for c in 0..3 {
            hess[a][a][c] = (fp[c] - 2.0 * f0[c] + fm[c]) / s2;
        }
        for b in a + 1..3 {
            let mut pp = [0; 3];
            pp[a] = 1;
            pp[b] = 1;
            let mut pm = pp;
            pm[b] = -1;
            let (fpp, fpm) = (at(pp), at(pm));
            let (fmp, fmm) = (at(pm.map(|v| -v)), at(pp.map(|v| -v)));
            for c in 0..3 {
                let v = (fpp[c] - fpm[c] - fmp[c] + fmm[c]) / (4.0 * s2);
                hess[a][b][c] = v;
                hess[b][a][c] = v;
            }
        }
    }
    let kk = Complex64::from(k * k) + p;
    let mut res = 0.0;
    for i in 0..3 {
        let grad_div: Complex64 = (0..3).map(|j| hess[i][j][j]).sum();
        let lap: Complex64 = (0..3).map(|j| hess[j][j][i]).sum();
        res += (grad_div - lap - kk * f0[i]).norm_sqr();
    }
    let en = f0.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if en == 0.0 {
        return Err(VieError::Parameter("field vanishes at the evaluation point".into()));
    }
    Ok(res.sqrt() / (k * k * en))
}
