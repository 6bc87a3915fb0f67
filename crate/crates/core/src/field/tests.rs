use std::sync::Arc;

use num_complex::Complex64;

use super::*;
use crate::assembly::assemble;
use crate::basis::build_basis;
use crate::geometry::{voxelize, ScattererShape};
use crate::quadrature::QuadratureRule;
use crate::solver::solve_dense;

fn solved(eps: f64, sigma: f64, h: f64, amplitude: f64) -> FieldSolution {
    let shape = ScattererShape::sphere([0.0; 3], 1.0).unwrap();
    let grid = Arc::new(voxelize(&shape, h).unwrap());
    let basis = Arc::new(build_basis(&grid).unwrap());
    let medium = MediumParams::in_vacuum_with_wavenumber(0.6, eps, sigma);
    let pw = PlaneWave::linear([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], amplitude).unwrap();
    let sys = assemble(&grid, &basis, &medium, &pw, &QuadratureRule::default()).unwrap();
    let (c, _) = solve_dense(&sys).unwrap();
    FieldSolution::new(grid, basis, medium, pw, c).unwrap()
}

fn rel(a: CVec3, b: CVec3) -> f64 {
    vec3::cnorm(vec3::csub(a, b)) / vec3::cnorm(b)
}

#[test]
fn zero_contrast_reproduces_incident_field_outside() {
    let sol = solved(1.0, 0.0, 0.4, 1.0);
    let k = sol.wavenumbers().k;
    for x in [[2.0, 0.3, -0.1], [0.0, 0.0, 1.5], [10.0, -4.0, 3.0]] {
        let f = sol.eval_field(x);
        assert!(!f.interior);
        assert_eq!(f.value, sol.incident().field(k, x));
    }
    let a = sol.far_field([0.0, 0.6, 0.8]).unwrap();
    assert_eq!(a.amplitude, CZERO3);
    let cs = cross_sections(&sol, &AngularRule::default()).unwrap();
    assert_eq!(cs.sigma_scat, 0.0);
    assert_eq!(cs.optical_theorem, 0.0);
}

#[test]
fn interior_reconstruction_is_continuous_across_faces() {
    let sol = solved(2.0, 0.0, 0.4, 1.0);
    let g = sol.grid();
    let o = g.origin();
    let h = g.spacing();
    let c = g.interior_cells()[g.interior_cells().len() / 2];
    // a point on the face between c and c + e_x
    let face_x = o[0] + (c[0] + 1) as f64 * h;
    let y = o[1] + (c[1] as f64 + 0.3) * h;
    let z = o[2] + (c[2] as f64 + 0.7) * h;
    let left = sol.reconstruct([face_x - 1e-12, y, z]);
    let right = sol.reconstruct([face_x + 1e-12, y, z]);
    assert!(vec3::cnorm(vec3::csub(left, right)) < 1e-9);
    assert!(sol.eval_field([face_x, y, z]).interior);
}

#[test]
fn far_field_matches_large_radius_evaluation() {
    let sol = solved(2.0, 0.0, 0.4, 1.0);
    let k = sol.wavenumbers().k;
    let u = vec3::scale([0.3, -0.5, 0.8], 1.0 / vec3::norm([0.3, -0.5, 0.8]));
    let r = 1000.0 / k;
    let v = sol.scattered_exterior(vec3::scale(u, r));
    let scaled = vec3::cscale(v, Complex64::from_polar(r, -k * r));
    let a = sol.far_field(u).unwrap().amplitude;
    assert!(rel(scaled, a) < 1e-2, "rel {}", rel(scaled, a));
    assert!(sol.far_field([1.0, 1.0, 0.0]).is_err());
}

#[test]
fn scattered_field_decays_like_one_over_r() {
    let sol = solved(2.0, 0.0, 0.4, 1.0);
    let k = sol.wavenumbers().k;
    let u = [0.0, 0.6, 0.8];
    let v1 = vec3::cnorm(sol.scattered_exterior(vec3::scale(u, 100.0 / k)));
    let v2 = vec3::cnorm(sol.scattered_exterior(vec3::scale(u, 200.0 / k)));
    assert!((v1 / v2 - 2.0).abs() < 0.1);
    let w1 = vec3::cnorm(sol.scattered_exterior(vec3::scale(u, 500.0 / k))) * 500.0;
    let w2 = vec3::cnorm(sol.scattered_exterior(vec3::scale(u, 1000.0 / k))) * 1000.0;
    assert!((w1 / w2 - 1.0).abs() < 0.01);
}

#[test]
fn h_field_matches_finite_difference_curl() {
    let sol = solved(2.0, 0.1, 0.4, 1.0);
    let k = sol.wavenumbers().k;
    let x = [1.8, -0.4, 0.9];
    let step = 1e-4 / k;
    let e = |p: Vec3| sol.eval_field(p).value;
    let d = |a: usize| {
        let mut xp = x;
        let mut xm = x;
        xp[a] += step;
        xm[a] -= step;
        let (fp, fm) = (e(xp), e(xm));
        [0, 1, 2].map(|c| (fp[c] - fm[c]) / (2.0 * step))
    };
    let (dx, dy, dz) = (d(0), d(1), d(2));
    let curl = [dy[2] - dz[1], dz[0] - dx[2], dx[1] - dy[0]];
    let denom = Complex64::new(0.0, sol.medium().omega * sol.medium().mu0);
    let fd = curl.map(|c| c / denom);
    let h = sol.eval_h(x).unwrap();
    assert!(rel(h, fd) < 1e-4, "rel {}", rel(h, fd));
    assert!(matches!(sol.eval_h([0.0; 3]), Err(VieError::UnsupportedLocation(_))));
}

#[test]
fn incident_only_h_is_plane_wave() {
    let sol = solved(1.0, 0.0, 0.4, 1.0);
    let m = *sol.medium();
    let k = sol.wavenumbers().k;
    let x = [3.0, 1.0, -2.0];
    let h = sol.eval_h(x).unwrap();
    let pw = sol.incident();
    let expect = vec3::cscale(
        vec3::rcross(pw.direction(), pw.polarization()),
        pw.amplitude() * Complex64::from_polar(k / (m.omega * m.mu0), k * vec3::dot(pw.direction(), x)),
    );
    assert!(rel(h, expect) < 1e-12);
}

#[test]
fn far_zone_h_to_e_ratio() {
    let sol = solved(2.0, 0.0, 0.4, 1.0);
    let m = *sol.medium();
    let k = sol.wavenumbers().k;
    let x = vec3::scale([0.0, 0.6, 0.8], 100.0 / k);
    let v = sol.scattered_exterior(x);
    let hs = vec3::csub(
        sol.eval_h(x).unwrap(),
        sol.incident().curl(k, x).map(|c| c / Complex64::new(0.0, m.omega * m.mu0)),
    );
    let ratio = vec3::cnorm(hs) / (vec3::cnorm(v) * k / (m.omega * m.mu0));
    assert!((ratio - 1.0).abs() < 0.02, "ratio {ratio}");
}

#[test]
fn outputs_are_linear_in_amplitude() {
    let a = solved(2.0, 0.2, 0.5, 1.0);
    let b = solved(2.0, 0.2, 0.5, 2.0);
    for x in [[2.0, 0.0, 0.0], [0.1, 0.2, 0.1], [0.0, -3.0, 1.0]] {
        let fa = a.eval_field(x).value;
        let fb = b.eval_field(x).value;
        assert!(rel(fb, vec3::cscale(fa, Complex64::from(2.0))) < 1e-10);
    }
    let fa = a.far_field([0.0, 0.0, 1.0]).unwrap().amplitude;
    let fb = b.far_field([0.0, 0.0, 1.0]).unwrap().amplitude;
    assert!(rel(fb, vec3::cscale(fa, Complex64::from(2.0))) < 1e-10);
    let ca = cross_sections(&a, &AngularRule { n_theta: 8, n_phi: 16 }).unwrap();
    let cb = cross_sections(&b, &AngularRule { n_theta: 8, n_phi: 16 }).unwrap();
    assert!((ca.sigma_scat - cb.sigma_scat).abs() < 1e-10 * ca.sigma_scat);
    assert_eq!(ca.optical_theorem_kind, CrossSectionKind::Extinction);
}

#[test]
fn far_field_is_transverse_and_energy_is_consistent() {
    let sol = solved(1.5, 0.0, 0.4, 1.0);
    let a = sol.far_field([0.6, 0.0, 0.8]).unwrap().amplitude;
    assert!(vec3::rdot([0.6, 0.0, 0.8], a).norm() < 1e-14 * vec3::cnorm(a));
    let cs = cross_sections(&sol, &AngularRule::default()).unwrap();
    assert_eq!(cs.optical_theorem_kind, CrossSectionKind::Scattering);
    assert!(cs.sigma_scat > 0.0);
    let mismatch = (cs.optical_theorem - cs.sigma_scat).abs() / cs.sigma_scat;
    assert!(mismatch < 0.05, "optical theorem mismatch {mismatch}");
}

#[test]
fn angular_rule_integrates_polynomials() {
    let rule = AngularRule { n_theta: 6, n_phi: 12 };
    let pts = rule.points();
    let total: f64 = pts.iter().map(|p| p.3).sum();
    assert!((total - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    let z2: f64 = pts.iter().map(|p| p.3 * p.2[2] * p.2[2]).sum();
    assert!((z2 - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    let x2y2: f64 = pts.iter().map(|p| p.3 * (p.2[0] * p.2[1]).powi(2)).sum();
    assert!((x2y2 - 4.0 * std::f64::consts::PI / 15.0).abs() < 1e-12);
}

#[test]
fn radiation_residual_decays_faster_than_one_over_r() {
    let sol = solved(2.0, 0.0, 0.4, 1.0);
    let k = sol.wavenumbers().k;
    let radii: Vec<f64> = [20.0, 40.0, 80.0, 160.0].iter().map(|r| r / k).collect();
    let rep = radiation_check(&sol, &[[0.0, 0.0, 1.0], [1.0, 1.0, 0.0]], &radii).unwrap();
    assert_eq!(rep.rows.len(), 8);
    assert!(rep.slope.unwrap() < -1.0, "slope {:?}", rep.slope);
    let zero = solved(1.0, 0.0, 0.4, 1.0);
    let rep = radiation_check(&zero, &[[0.0, 0.0, 1.0]], &radii).unwrap();
    assert!(rep.rows.iter().all(|r| r.scaled_residual == 0.0));
    assert!(radiation_check(&zero, &[[0.0, 0.0, 1.0]], &[2.0, 1.0]).is_err());
}

#[test]
fn boundary_diagnostic_zero_contrast_outside_is_incident() {
    // at zero contrast the exterior side is E0 exactly and the interior side
    // is the hat projection of E0, which vanishes on the discrete boundary
    let sol = solved(1.0, 0.0, 0.25, 1.0);
    let shape = ScattererShape::sphere([0.0; 3], 1.0).unwrap();
    let samples = surface_samples(&shape, 20).unwrap();
    let rep = boundary_diagnostic(&sol, &samples, 0.125).unwrap();
    assert_eq!(rep.rows.len(), 20);
    for row in &rep.rows {
        assert!(row.tangential.is_finite() && row.normal_jump.is_finite());
    }
    assert!(boundary_diagnostic(&sol, &samples, 0.0).is_err());
}

#[test]
fn boundary_mismatch_invariant_under_rotation() {
    // rotate the incident direction and polarization by 90 degrees about z;
    // the sphere and cubic grid are invariant under that rotation
    let shape = ScattererShape::sphere([0.0; 3], 1.0).unwrap();
    let grid = Arc::new(voxelize(&shape, 0.4).unwrap());
    let basis = Arc::new(build_basis(&grid).unwrap());
    let medium = MediumParams::in_vacuum_with_wavenumber(0.6, 1.5, 0.0);
    let run = |pw: PlaneWave| {
        let sys = assemble(&grid, &basis, &medium, &pw, &QuadratureRule::default()).unwrap();
        let (c, _) = solve_dense(&sys).unwrap();
        FieldSolution::new(grid.clone(), basis.clone(), medium, pw, c).unwrap()
    };
    let a = run(PlaneWave::linear([1.0, 0.0, 0.0], [0.0, 0.0, 1.0], 1.0).unwrap());
    let b = run(PlaneWave::linear([0.0, 1.0, 0.0], [0.0, 0.0, 1.0], 1.0).unwrap());
    let pts = [([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]), ([0.6, 0.0, 0.8], [0.6, 0.0, 0.8])];
    let rot = |p: Vec3| [-p[1], p[0], p[2]];
    let pts_b: Vec<(Vec3, Vec3)> = pts.iter().map(|&(p, n)| (rot(p), rot(n))).collect();
    let ra = boundary_diagnostic(&a, &pts, 0.2).unwrap();
    let rb = boundary_diagnostic(&b, &pts_b, 0.2).unwrap();
    for (x, y) in ra.rows.iter().zip(&rb.rows) {
        assert!((x.tangential - y.tangential).abs() < 1e-10);
        assert!((x.normal_jump - y.normal_jump).abs() < 1e-10);
    }
}

#[test]
fn projected_coefficients_are_gram_times_c() {
    let sol = solved(2.0, 0.0, 0.5, 1.0);
    let e = sol.projected_coefficients();
    let mm = sol.basis().len();
    let m = mm / 2;
    let expect: Complex64 = sol.basis().gram().row(m).map(|(j, g)| sol.coefficients()[j] * g).sum();
    assert!((e[m] - expect).norm() < 1e-14 * expect.norm().max(1e-300));
}
