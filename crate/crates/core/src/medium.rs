//! Material parameters, derived wavenumbers and the incident plane wave.
//!
//! Time dependence is `exp(-i omega t)` throughout. With that convention the
//! complex permittivity `eps' = eps + i sigma / omega` has a nonnegative
//! imaginary part for lossy media and the outgoing scalar kernel is
//! `exp(ik|x|) / (4 pi |x|)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VieError};
use crate::vec3::{self, CVec3, Vec3};

/// Vacuum permittivity in F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability in H/m.
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Exterior medium `(eps0, sigma = 0, mu0)` and the homogeneous interior
/// `(eps, sigma, mu0)` at angular frequency `omega`. SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    pub omega: f64,
    pub eps0: f64,
    pub mu0: f64,
    pub eps: f64,
    pub sigma: f64,
}

/// Wavenumbers and contrasts derived from a [`MediumParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavenumbers {
    /// Exterior wavenumber, `k = omega sqrt(eps0 mu0) > 0`.
    pub k: f64,
    /// Interior wavenumber with `Im K >= 0`.
    pub k_inner: Complex64,
    /// Contrast `p = K^2 - k^2` inside the scatterer.
    pub contrast: Complex64,
    /// Normalised contrast `gamma = (K^2 - k^2) / k^2`.
    pub gamma: Complex64,
}

impl MediumParams {
    /// Scatterer in vacuum with relative permittivity `eps_rel` and conductivity `sigma`.
    pub fn in_vacuum(omega: f64, eps_rel: f64, sigma: f64) -> Self {
        Self {
            omega,
            eps0: EPS0,
            mu0: MU0,
            eps: eps_rel * EPS0,
            sigma,
        }
    }

    /// Picks `omega` so that the exterior wavenumber equals `k`.
    pub fn in_vacuum_with_wavenumber(k: f64, eps_rel: f64, sigma: f64) -> Self {
        let omega = k / (EPS0 * MU0).sqrt();
        Self::in_vacuum(omega, eps_rel, sigma)
    }

    /// `eps' = eps + i sigma / omega`.
    pub fn complex_permittivity(&self) -> Complex64 {
        Complex64::new(self.eps, self.sigma / self.omega)
    }

    /// Complex relative permittivity `eps' / eps0`.
    pub fn relative_permittivity(&self) -> Complex64 {
        self.complex_permittivity() / self.eps0
    }

    pub fn is_lossless(&self) -> bool {
        self.sigma == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega", self.omega),
            ("eps0", self.eps0),
            ("mu0", self.mu0),
            ("eps", self.eps),
            ("sigma", self.sigma),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(VieError::Parameter(format!("{name} is not finite ({v})")));
            }
        }
        if self.omega <= 0.0 || self.eps0 <= 0.0 || self.mu0 <= 0.0 {
            return Err(VieError::Parameter(
                "omega, eps0 and mu0 must be positive".into(),
            ));
        }
        if self.sigma < 0.0 {
            return Err(VieError::Parameter("sigma must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn wavenumbers(&self) -> Result<Wavenumbers> {
        derive_wavenumbers(self)
    }
}

/// `k^2 = omega^2 eps0 mu0`, `K^2 = omega^2 eps' mu0`, `gamma = (K^2 - k^2) / k^2`.
pub fn derive_wavenumbers(m: &MediumParams) -> Result<Wavenumbers> {
    m.validate()?;
    let k_sq = m.omega * m.omega * m.eps0 * m.mu0;
    let big_k_sq = m.complex_permittivity() * (m.omega * m.omega * m.mu0);
    let mut k_inner = big_k_sq.sqrt();
    if k_inner.im < 0.0 {
        k_inner = -k_inner;
    }
    // gamma from the permittivity ratio so that eps == eps0, sigma == 0 gives exactly 0
    let gamma = Complex64::new(m.eps - m.eps0, m.sigma / m.omega) / m.eps0;
    Ok(Wavenumbers {
        k: k_sq.sqrt(),
        k_inner,
        contrast: gamma * k_sq,
        gamma,
    })
}

/// Incident plane wave `amplitude * e * exp(i k d.x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    direction: Vec3,
    polarization: CVec3,
    amplitude: Complex64,
}

impl PlaneWave {
    /// Normalises `direction` and `polarization`; the polarization must be
    /// transverse to the direction.
    pub fn new(direction: Vec3, polarization: CVec3, amplitude: Complex64) -> Result<Self> {
        let dn = vec3::norm(direction);
        if !(dn.is_finite() && dn > 0.0) {
            return Err(VieError::Parameter("plane-wave direction must be nonzero".into()));
        }
        let d = vec3::scale(direction, 1.0 / dn);
        let en = vec3::cnorm(polarization);
        if !(en.is_finite() && en > 0.0) {
            return Err(VieError::Parameter("plane-wave polarization must be nonzero".into()));
        }
        let along = vec3::rdot(d, polarization);
        if along.norm() > 1e-9 * en {
            return Err(VieError::Parameter(format!(
                "polarization is not transverse to the direction (|e.d|/|e| = {:.3e})",
                along.norm() / en
            )));
        }
        let e = vec3::csub(polarization, vec3::cscale(vec3::to_complex(d), along));
        let e = vec3::cscale(e, Complex64::from(1.0 / vec3::cnorm(e)));
        if !amplitude.re.is_finite() || !amplitude.im.is_finite() {
            return Err(VieError::Parameter("plane-wave amplitude is not finite".into()));
        }
        Ok(Self {
            direction: d,
            polarization: e,
            amplitude,
        })
    }

    /// Real linear polarization shorthand.
    pub fn linear(direction: Vec3, polarization: Vec3, amplitude: f64) -> Result<Self> {
        Self::new(direction, vec3::to_complex(polarization), amplitude.into())
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn polarization(&self) -> CVec3 {
        self.polarization
    }

    pub fn amplitude(&self) -> Complex64 {
        self.amplitude
    }

    pub fn with_amplitude(&self, amplitude: Complex64) -> Self {
        Self { amplitude, ..*self }
    }

    /// Complex-conjugated incident field (lossless time-reversal partner).
    pub fn conjugate(&self) -> Self {
        Self {
            direction: self.direction,
            polarization: self.polarization.map(|c| c.conj()),
            amplitude: self.amplitude.conj(),
        }
    }

    /// Field value; see [`incident_field`].
    pub fn field(&self, k: f64, x: Vec3) -> CVec3 {
        incident_field(self, k, x)
    }

    /// `curl E0 = i k d x E0`.
    pub fn curl(&self, k: f64, x: Vec3) -> CVec3 {
        let e = incident_field(self, k, x);
        vec3::cscale(vec3::rcross(self.direction, e), Complex64::new(0.0, k))
    }
}

/// `amplitude * e * exp(i k d.x)`.
pub fn incident_field(pw: &PlaneWave, k: f64, x: Vec3) -> CVec3 {
    let phase = Complex64::new(0.0, k * vec3::dot(pw.direction, x)).exp() * pw.amplitude;
    vec3::cscale(pw.polarization, phase)
}
