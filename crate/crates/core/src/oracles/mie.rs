//! Mie series for a homogeneous sphere.
//!
//! Self-contained on purpose: nothing here calls into the kernels,
//! quadrature or solver, so agreement with the solver is an independent
//! check.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Result, VieError};
use crate::medium::PlaneWave;

/// `ceil(x + 4 x^(1/3) + 2)`.
pub fn default_truncation(size_parameter: f64) -> usize {
    (size_parameter + 4.0 * size_parameter.cbrt() + 2.0).ceil() as usize
}

/// Small-sphere limit `(8 pi / 3) k^4 a^6 |(eps - 1)/(eps + 2)|^2`.
pub fn rayleigh_cross_section(k: f64, radius: f64, eps_rel: Complex64) -> f64 {
    let f = (eps_rel - 1.0) / (eps_rel + 2.0);
    8.0 * PI / 3.0 * k.powi(4) * radius.powi(6) * f.norm_sqr()
}

#[derive(Debug, Clone)]
pub struct MieSolution {
    radius: f64,
    center: [f64; 3],
    eps_rel: Complex64,
    k: f64,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl MieSolution {
    /// Sphere of `radius` at the origin in vacuum with wavenumber `k`.
    pub fn new(radius: f64, eps_rel: Complex64, k: f64) -> Result<Self> {
        let l = default_truncation(k * radius);
        Self::with_truncation(radius, eps_rel, k, l)
    }

    pub fn with_truncation(radius: f64, eps_rel: Complex64, k: f64, order: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite() && k > 0.0 && k.is_finite()) {
            return Err(VieError::Parameter("Mie sphere needs positive radius and wavenumber".into()));
        }
        if !(eps_rel.re.is_finite() && eps_rel.im.is_finite()) || eps_rel.im < 0.0 || order == 0 {
            return Err(VieError::Parameter(format!("invalid Mie input eps_rel = {eps_rel}, order = {order}")));
        }
        let x = k * radius;
        let m = eps_rel.sqrt();
        let (a, b) = coefficients(x, m, order);
        Ok(Self { radius, center: [0.0; 3], eps_rel, k, a, b })
    }

    /// Moves the sphere; far-field phases are referred to the origin.
    pub fn centered_at(mut self, center: [f64; 3]) -> Self {
        self.center = center;
        self
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn eps_rel(&self) -> Complex64 {
        self.eps_rel
    }

    pub fn size_parameter(&self) -> f64 {
        self.k * self.radius
    }

    pub fn truncation(&self) -> usize {
        self.a.len()
    }

    /// True when the series is cut below the default order.
    pub fn truncation_warning(&self) -> bool {
        self.truncation() < default_truncation(self.size_parameter())
    }

    pub fn a(&self) -> &[Complex64] {
        &self.a
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    /// `(2 pi / k^2) sum (2n+1)(|a_n|^2 + |b_n|^2)`.
    pub fn sigma_scat(&self) -> f64 {
        let s: f64 = (1..=self.truncation())
            .map(|n| (2 * n + 1) as f64 * (self.a[n - 1].norm_sqr() + self.b[n - 1].norm_sqr()))
            .sum();
        2.0 * PI / (self.k * self.k) * s
    }

    /// `(2 pi / k^2) sum (2n+1) Re(a_n + b_n)`.
    pub fn sigma_ext(&self) -> f64 {
        let s: f64 = (1..=self.truncation())
            .map(|n| (2 * n + 1) as f64 * (self.a[n - 1] + self.b[n - 1]).re)
            .sum();
        2.0 * PI / (self.k * self.k) * s
    }

    /// Amplitude functions `(S1, S2)` at scattering angle `theta`.
    pub fn amplitude_functions(&self, theta: f64) -> (Complex64, Complex64) {
        let mu = theta.cos();
        let mut pi_prev = 0.0;
        let mut pi_n = 1.0;
        let mut s1 = Complex64::new(0.0, 0.0);
        let mut s2 = Complex64::new(0.0, 0.0);
        for n in 1..=self.truncation() {
            let nf = n as f64;
            let tau = nf * mu * pi_n - (nf + 1.0) * pi_prev;
            let f = (2.0 * nf + 1.0) / (nf * (nf + 1.0));
            s1 += f * (self.a[n - 1] * pi_n + self.b[n - 1] * tau);
            s2 += f * (self.a[n - 1] * tau + self.b[n - 1] * pi_n);
            let next = ((2.0 * nf + 1.0) * mu * pi_n - (nf + 1.0) * pi_prev) / nf;
            pi_prev = pi_n;
            pi_n = next;
        }
        (s1, s2)
    }

    /// Scattering amplitude `A(xhat)` with `E_s ~ exp(ikr)/r A(xhat)`, for
    /// any incident direction and (complex) polarization.
    pub fn far_field(&self, xhat: [f64; 3], incident: &PlaneWave) -> [Complex64; 3] {
        let d = incident.direction();
        let ex = perpendicular(d);
        let ey = cross(d, ex);
        let pol = incident.polarization();
        let px: Complex64 = (0..3).map(|c| pol[c] * ex[c]).sum();
        let py: Complex64 = (0..3).map(|c| pol[c] * ey[c]).sum();
        let (lx, ly, lz) = (dot(xhat, ex), dot(xhat, ey), dot(xhat, d));
        let theta = lz.clamp(-1.0, 1.0).acos();
        let phi = ly.atan2(lx);
        let (s1, s2) = self.amplitude_functions(theta);
        let (ct, st, cp, sp) = (theta.cos(), theta.sin(), phi.cos(), phi.sin());
        let th_hat = [0, 1, 2].map(|c| ct * cp * ex[c] + ct * sp * ey[c] - st * d[c]);
        let ph_hat = [0, 1, 2].map(|c| -sp * ex[c] + cp * ey[c]);
        let f = Complex64::new(0.0, 1.0 / self.k);
        // x-polarized:  cos(phi) S2 theta_hat - sin(phi) S1 phi_hat
        // y-polarized:  sin(phi) S2 theta_hat + cos(phi) S1 phi_hat
        let ct_coef = px * cp * s2 + py * sp * s2;
        let cp_coef = -px * sp * s1 + py * cp * s1;
        let shift = Complex64::from_polar(1.0, self.k * (dot(d, self.center) - dot(xhat, self.center)));
        let scale = f * incident.amplitude() * shift;
        [0, 1, 2].map(|c| scale * (ct_coef * th_hat[c] + cp_coef * ph_hat[c]))
    }

    /// CSV table of `theta, Re S1, Im S1, Re S2, Im S2` for regression pinning.
    pub fn amplitude_csv(&self, thetas: &[f64]) -> String {
        let mut out = String::from("theta,re_s1,im_s1,re_s2,im_s2\n");
        for &t in thetas {
            let (s1, s2) = self.amplitude_functions(t);
            let _ = writeln!(out, "{t:.8e},{:.8e},{:.8e},{:.8e},{:.8e}", s1.re, s1.im, s2.re, s2.im);
        }
        out
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// A unit vector orthogonal to `d`, equal to `x` for `d = z`.
fn perpendicular(d: [f64; 3]) -> [f64; 3] {
    let seed = if d[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let t = dot(seed, d);
    let v = [0, 1, 2].map(|c| seed[c] - t * d[c]);
    let n = dot(v, v).sqrt();
    v.map(|c| c / n)
}

/// Bohren-Huffman recurrences: downward logarithmic derivative inside,
/// upward Riccati-Bessel functions outside.
fn coefficients(x: f64, m: Complex64, order: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let mx = m * x;
    let nmx = (order as f64).max(mx.norm()).ceil() as usize + 15;
    let mut dlog = vec![Complex64::new(0.0, 0.0); nmx + 1];
    for n in (1..=nmx).rev() {
        let r = n as f64 / mx;
        dlog[n - 1] = r - 1.0 / (dlog[n] + r);
    }
    let mut psi0 = x.cos();
    let mut psi1 = x.sin();
    let mut chi0 = -x.sin();
    let mut chi1 = x.cos();
    let mut xi1 = Complex64::new(psi1, -chi1);
    let mut a = Vec::with_capacity(order);
    let mut b = Vec::with_capacity(order);
    for n in 1..=order {
        let nf = n as f64;
        let psi = (2.0 * nf - 1.0) / x * psi1 - psi0;
        let chi = (2.0 * nf - 1.0) / x * chi1 - chi0;
        let xi = Complex64::new(psi, -chi);
        let da = dlog[n] / m + nf / x;
        let db = dlog[n] * m + nf / x;
        a.push((da * psi - psi1) / (da * xi - xi1));
        b.push((db * psi - psi1) / (db * xi - xi1));
        psi0 = psi1;
        psi1 = psi;
        chi0 = chi1;
        chi1 = chi;
        xi1 = Complex64::new(psi1, -chi1);
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pw(d: [f64; 3], e: [f64; 3]) -> PlaneWave {
        PlaneWave::linear(d, e, 1.0).unwrap()
    }

    fn sphere_integral(m: &MieSolution, inc: &PlaneWave) -> f64 {
        let n_t = 40;
        let n_p = 80;
        let mut total = 0.0;
        let g = crate::quadrature::gauss::GaussRule::new(n_t);
        for (t, w) in g.nodes.iter().zip(&g.weights) {
            let mu = 2.0 * t - 1.0;
            let st = (1.0 - mu * mu).sqrt();
            for j in 0..n_p {
                let phi = 2.0 * PI * j as f64 / n_p as f64;
                let a = m.far_field([st * phi.cos(), st * phi.sin(), mu], inc);
                total += 2.0 * w * (2.0 * PI / n_p as f64) * a.iter().map(|c| c.norm_sqr()).sum::<f64>();
            }
        }
        total
    }

    #[test]
    fn vacuum_sphere_does_not_scatter() {
        let m = MieSolution::new(1.0, Complex64::from(1.0), 2.0).unwrap();
        assert!(m.a().iter().chain(m.b()).all(|c| c.norm() < 1e-15));
        let a = m.far_field([0.0, 1.0, 0.0], &pw([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]));
        assert!(a.iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn small_sphere_approaches_rayleigh() {
        let m = MieSolution::new(0.3, Complex64::from(1.5), 1.0).unwrap();
        let r = rayleigh_cross_section(1.0, 0.3, Complex64::from(1.5));
        assert!((m.sigma_scat() / r - 1.0).abs() < 0.05, "{} vs {r}", m.sigma_scat());
    }

    #[test]
    fn optical_theorem_lossless() {
        for (x, eps) in [(0.5, 2.0), (2.0, 3.0), (5.0, 1.7)] {
            let m = MieSolution::new(x, Complex64::from(eps), 1.0).unwrap();
            let inc = pw([0.0, 0.0, 1.0], [1.0, 0.0, 0.0]);
            let fwd = m.far_field([0.0, 0.0, 1.0], &inc);
            let ot = 4.0 * PI * fwd[0].im;
            assert!((ot / m.sigma_scat() - 1.0).abs() < 1e-6);
            assert!((m.sigma_ext() / m.sigma_scat() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn known_reference_values() {
        // Bohren & Huffman sample run: m = 1.55, radius 0.525, wavelength 0.6328
        let x = 2.0 * PI * 0.525 / 0.6328;
        let m = MieSolution::new(x, Complex64::from(1.55 * 1.55), 1.0).unwrap();
        let qsca = m.sigma_scat() / (PI * x * x);
        assert!((qsca - 3.10543).abs() < 1e-4, "qsca {qsca}");
        let qback = 4.0 * m.amplitude_functions(PI).0.norm_sqr() / (x * x);
        assert!((qback - 2.92534).abs() < 1e-4, "qback {qback}");
    }

    #[test]
    fn far_field_integrates_to_sigma_scat_for_any_incidence() {
        let m = MieSolution::new(1.2, Complex64::new(2.5, 0.3), 1.0).unwrap();
        let d = [0.36, 0.48, 0.8];
        let e = [0.8, 0.0, -0.36];
        let n = dot(e, e).sqrt();
        let inc = pw(d, e.map(|c| c / n));
        let s = sphere_integral(&m, &inc);
        assert!((s / m.sigma_scat() - 1.0).abs() < 1e-8);
        let fwd = m.far_field(d, &inc);
        let pol = inc.polarization();
        let proj: Complex64 = (0..3).map(|c| pol[c].conj() * fwd[c]).sum();
        assert!((4.0 * PI * proj.im / m.sigma_ext() - 1.0).abs() < 1e-8);
        assert!(m.sigma_ext() > m.sigma_scat());
    }

    #[test]
    fn far_field_is_transverse() {
        let m = MieSolution::new(1.0, Complex64::from(2.0), 1.3).unwrap();
        let inc = pw([0.0, 1.0, 0.0], [0.0, 0.0, 1.0]);
        let u = [0.48, 0.6, 0.64];
        let a = m.far_field(u, &inc);
        let r: Complex64 = (0..3).map(|c| a[c] * u[c]).sum();
        assert!(r.norm() < 1e-14);
    }

    #[test]
    fn truncation_beyond_default_is_converged() {
        let m = MieSolution::new(0.5, Complex64::from(2.0), 1.0).unwrap();
        let more = MieSolution::with_truncation(0.5, Complex64::from(2.0), 1.0, m.truncation() + 10).unwrap();
        assert!((more.sigma_scat() / m.sigma_scat() - 1.0).abs() < 1e-8);
        assert!(!m.truncation_warning());
        let short = MieSolution::with_truncation(0.5, Complex64::from(2.0), 1.0, 1).unwrap();
        assert!(short.truncation_warning());
    }

    #[test]
    fn csv_has_header_and_rows() {
        let m = MieSolution::new(0.5, Complex64::from(2.0), 1.0).unwrap();
        let csv = m.amplitude_csv(&[0.0, 1.0, PI]);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("theta,re_s1"));
    }
}
