//! Monte Carlo references from `tests/golden/generate.py` (1e7 samples per
//! entry, fixed seed), for `h = 1`.

use num_complex::Complex64;

pub struct Golden {
    pub kappa: f64,
    pub value: Complex64,
    pub se_re: f64,
    pub se_im: f64,
}

/// `int int phi(x) g(x - y) phi(y)` for the self pair.
pub const S_SELF: [Golden; 2] = [
    Golden { kappa: 0.0, value: Complex64::new(1.074_518_140_5e-1, 0.0), se_re: 2.503e-5, se_im: 0.0 },
    Golden { kappa: 0.5, value: Complex64::new(9.845_936_766_7e-2, 3.816_228_115_8e-2), se_re: 2.581e-5, se_im: 3.807e-7 },
];

/// `int int d0 phi(x) g(x - y) d0 phi(y)` for the self pair.
pub const D_SELF: [Golden; 2] = [
    Golden { kappa: 0.0, value: Complex64::new(9.857_188_737_2e-2, 0.0), se_re: 1.459e-4, se_im: 0.0 },
    Golden { kappa: 0.5, value: Complex64::new(1.067_866_908_7e-1, 3.136_707_996_8e-3), se_re: 1.373e-4, se_im: 4.764e-5 },
];

pub fn within_three_se(v: Complex64, g: &Golden) -> bool {
    // a zero standard error means the component is exactly zero
    let re_ok = (v.re - g.value.re).abs() <= 3.0 * g.se_re.max(1e-15);
    let im_ok = (v.im - g.value.im).abs() <= 3.0 * g.se_im.max(1e-15);
    re_ok && im_ok
}
