use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// True relative residual of `x`, from a fresh matvec.
    pub relative_residual: f64,
    pub converged: bool,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Restarted GMRES with optional right diagonal preconditioning `M^-1 = diag(precond)`.
///
/// The stopping test always uses the true residual `||b - A x|| / ||b||`;
/// the Arnoldi estimate only decides when to leave a cycle early.
pub fn gmres(
    apply: impl Fn(&[Complex64], &mut [Complex64]),
    b: &[Complex64],
    tol: f64,
    max_iter: usize,
    restart: usize,
    precond: Option<&[Complex64]>,
) -> GmresOutcome {
    let n = b.len();
    let zero = Complex64::new(0.0, 0.0);
    let bnorm = norm(b);
    let mut x = vec![zero; n];
    if bnorm == 0.0 {
        return GmresOutcome { x, iterations: 0, relative_residual: 0.0, converged: true };
    }
    let pre = |v: &[Complex64]| -> Vec<Complex64> {
        match precond {
            Some(p) => v.iter().zip(p).map(|(a, b)| a * b).collect(),
            None => v.to_vec(),
        }
    };
    let mut ax = vec![zero; n];
    let mut best_x = x.clone();
    let mut best = 1.0;
    let mut iterations = 0;
    loop {
        apply(&x, &mut ax);
        let r: Vec<Complex64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let rel = norm(&r) / bnorm;
        if rel < best {
            best = rel;
            best_x.clone_from(&x);
        }
        if rel <= tol {
            return GmresOutcome { x, iterations, relative_residual: rel, converged: true };
        }
        if iterations >= max_iter {
            return GmresOutcome { x: best_x, iterations, relative_residual: best, converged: false };
        }
        let beta = norm(&r);
        let m = restart.min(max_iter - iterations);
        let mut v: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|z| z / beta).collect());
        let mut hcol: Vec<Vec<Complex64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<Complex64> = Vec::with_capacity(m);
        let mut g = vec![zero; m + 1];
        g[0] = Complex64::from(beta);
        let mut w = vec![zero; n];
        let mut k = 0;
        while k < m {
            apply(&pre(&v[k]), &mut w);
            let mut h = vec![zero; k + 2];
            // modified Gram-Schmidt
            for (j, vj) in v.iter().enumerate() {
                let hij = dotc(vj, &w);
                h[j] = hij;
                for (wi, vi) in w.iter_mut().zip(vj) {
                    *wi -= hij * vi;
                }
            }
            let hn = norm(&w);
            h[k + 1] = Complex64::from(hn);
            for j in 0..k {
                let t = cs[j] * h[j] + sn[j] * h[j + 1];
                h[j + 1] = -sn[j].conj() * h[j] + cs[j] * h[j + 1];
                h[j] = t;
            }
            let (c, s, rr) = givens(h[k], h[k + 1]);
            cs.push(c);
            sn.push(s);
            h[k] = rr;
            h[k + 1] = zero;
            g[k + 1] = -s.conj() * g[k];
            g[k] *= c;
            hcol.push(h);
            iterations += 1;
            k += 1;
            if hn == 0.0 || g[k].norm() / bnorm <= 0.5 * tol {
                break;
            }
            v.push(w.iter().map(|z| z / hn).collect());
        }
        // back substitution on the k x k triangle
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for j in i + 1..k {
                acc -= hcol[j][i] * y[j];
            }
            y[i] = acc / hcol[i][i];
        }
        let mut update = vec![zero; n];
        for (j, yj) in y.iter().enumerate() {
            for (u, vj) in update.iter_mut().zip(&v[j]) {
                *u += yj * vj;
            }
        }
        for (xi, u) in x.iter_mut().zip(pre(&update)) {
            *xi += u;
        }
    }
}

/// Complex Givens rotation zeroing `b` against `a`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0), a);
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn, Complex64::from(bn));
    }
    let r = an.hypot(bn);
    let alpha = a / an;
    let c = an / r;
    let s = alpha * b.conj() / r;
    (c, s, alpha * r)
}
