//! Material parameters and the scalar functions of `(η, h₀, m)` that decide
//! the propagation regime.
//!
//! `Υ` and `Λ` vanish together; `Λ = 2h₀²m²Υ`. Root searches use `Υ`
//! because `Λ` also has a trivial zero at `m = 0` and is identically zero
//! when `h₀ = 0`.

use crate::error::{Error, Result};
use crate::numerics::{bracketed_root, scan_sign_change};

/// Number of uniform scan points used to bracket `m_c` and `h₀*`.
pub const SCAN_POINTS: usize = 512;
/// Absolute tolerance of the `m_c` and `h₀*` roots.
pub const ROOT_TOL: f64 = 1e-10;

/// Isotropic couple-stress material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    /// Shear modulus.
    pub g: f64,
    /// Mass density.
    pub rho: f64,
    /// Characteristic length `ℓ`.
    pub ell: f64,
    pub eta: f64,
    /// Normalized rotational inertia `h₀ = √(J/4ρ)/ℓ`.
    pub h0: f64,
}

impl Material {
    pub fn new(g: f64, rho: f64, ell: f64, eta: f64, h0: f64) -> Result<Self> {
        if !(g > 0.0) || !(rho > 0.0) || !(ell > 0.0) {
            return Err(Error::Domain(format!(
                "G, rho and ell must be positive (G={g}, rho={rho}, ell={ell})"
            )));
        }
        if !(eta > -1.0 && eta < 1.0) {
            return Err(Error::Domain(format!("eta must lie in (-1, 1), got {eta}")));
        }
        if !(h0 >= 0.0) || !h0.is_finite() {
            return Err(Error::Domain(format!("h0 must be non-negative, got {h0}")));
        }
        Ok(Material { g, rho, ell, eta, h0 })
    }

    /// Unit modulus, density and length: everything in normalized units.
    pub fn normalized(eta: f64, h0: f64) -> Result<Self> {
        Material::new(1.0, 1.0, 1.0, eta, h0)
    }

    /// Shear wave speed.
    pub fn c_s(&self) -> f64 {
        (self.g / self.rho).sqrt()
    }

    /// Rotational inertia `J = 4ρ(h₀ℓ)²`.
    pub fn rotational_inertia(&self) -> f64 {
        4.0 * self.rho * (self.h0 * self.ell).powi(2)
    }

    /// Characteristic length in bending, `ℓ/√2`.
    pub fn ell_bending(&self) -> f64 {
        self.ell / std::f64::consts::SQRT_2
    }

    /// Characteristic length in torsion, `ℓ√(1+η)`.
    pub fn ell_torsion(&self) -> f64 {
        self.ell * (1.0 + self.eta).sqrt()
    }

    pub fn critical_speed(&self) -> Result<f64> {
        critical_speed(self.eta, self.h0)
    }
}

/// Normalized crack speed `m = V/c_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationState {
    pub m: f64,
}

impl PropagationState {
    pub fn new(m: f64) -> Result<Self> {
        if !(m >= 0.0) || !m.is_finite() {
            return Err(Error::Domain(format!("crack speed must be non-negative, got {m}")));
        }
        Ok(PropagationState { m })
    }

    /// Crack speed in physical units.
    pub fn velocity(&self, material: &Material) -> f64 {
        self.m * material.c_s()
    }

    /// Checks the sub-Rayleigh condition required by the crack solution.
    pub fn require_sub_rayleigh(&self, material: &Material) -> Result<()> {
        let regime = classify_regime(material.eta, material.h0, self.m)?;
        if regime.rayleigh != Rayleigh::SubRayleigh {
            return Err(Error::Regime(format!(
                "m = {} is not sub-Rayleigh for eta = {}, h0 = {}",
                self.m, material.eta, material.h0
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rayleigh {
    SubRayleigh,
    SuperRayleigh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sonic {
    Subsonic,
    Supersonic,
}

/// Regime of a point of the `(m, h₀)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Regime {
    pub rayleigh: Rayleigh,
    pub sonic: Sonic,
}

fn root_arg(h0: f64, m: f64) -> Result<f64> {
    if h0 == 0.0 {
        return Ok(1.0);
    }
    let a = 1.0 - 2.0 * h0 * h0 * m * m;
    // Round-off at exactly h0·m = 1/√2.
    if a < 0.0 && a > -1e-14 {
        return Ok(0.0);
    }
    if a < 0.0 {
        return Err(Error::Domain(format!(
            "1 - 2 h0^2 m^2 = {a} is negative (h0 = {h0}, m = {m})"
        )));
    }
    Ok(a)
}

/// `Υ(η, h₀, m)`; its sign decides the sub/super-Rayleigh regime.
pub fn upsilon(eta: f64, h0: f64, m: f64) -> Result<f64> {
    let a = root_arg(h0, m)?;
    let v = a.sqrt();
    let hm2 = h0 * h0 * m * m;
    Ok((1.0 - eta * eta - 2.0 * hm2 + 2.0 * v * (1.0 + eta - hm2)) / (1.0 + v))
}

/// `Λ(η, h₀, m) = (1+η)²v − (v²+η)²` with `v = √(1−2h₀²m²)`.
pub fn lambda_surface(eta: f64, h0: f64, m: f64) -> Result<f64> {
    let a = root_arg(h0, m)?;
    let v = a.sqrt();
    Ok((1.0 + eta).powi(2) * v - (a + eta).powi(2))
}

/// Upper end of the admissible speed interval, `min(1, 1/(√2 h₀))`.
fn speed_cap(h0: f64) -> f64 {
    if h0 == 0.0 {
        1.0
    } else {
        let cap = 1.0 / (std::f64::consts::SQRT_2 * h0);
        // h0 = 1/√2 must give exactly 1.
        if cap > 1.0 - 1e-12 {
            1.0
        } else {
            cap
        }
    }
}

/// Critical speed `m_c`: the smallest zero of `Λ` (equivalently `Υ`) in
/// `(0, min(1, 1/(√2h₀))]`, or exactly 1 when there is none below 1.
pub fn critical_speed(eta: f64, h0: f64) -> Result<f64> {
    if !(eta > -1.0 && eta < 1.0) || !(h0 >= 0.0) {
        return Err(Error::Domain(format!("eta = {eta}, h0 = {h0} out of range")));
    }
    let cap = speed_cap(h0);
    let f = |m: f64| upsilon(eta, h0, m.min(cap)).unwrap_or(f64::NAN);
    // Υ(η, h₀, 0) = (1+η)(3−η)/2 > 0, so scanning from a tiny positive m is safe.
    match scan_sign_change(f, 0.0, cap, SCAN_POINTS) {
        Some((lo, hi)) => {
            let root = bracketed_root(f, lo, hi, ROOT_TOL)?;
            // A root within the bisection tolerance of the cap is the cap itself.
            Ok(if root >= cap - 1e2 * ROOT_TOL { cap } else { root })
        }
        None => Ok(cap),
    }
}

/// `h₀*(η)`: the rotational inertia at which `m_c` reaches 1, i.e. the root
/// of `Λ(η, h₀, 1) = 0` in `(0, 1/√2]`.
pub fn h0_star(eta: f64) -> Result<f64> {
    if !(eta > -1.0 && eta < 1.0) {
        return Err(Error::Domain(format!("eta = {eta} out of range")));
    }
    let hmax = std::f64::consts::FRAC_1_SQRT_2;
    let f = |h: f64| upsilon(eta, h.min(hmax), 1.0).unwrap_or(f64::NAN);
    let (lo, hi) = scan_sign_change(f, 0.0, hmax, SCAN_POINTS)
        .ok_or(Error::NoBracket { lo: 0.0, hi: hmax })?;
    bracketed_root(f, lo, hi, ROOT_TOL)
}

/// Decay parameter `ζ = √(2√(1−m²)/Υ)` of the pole of `1/Ψ`.
pub fn zeta(eta: f64, h0: f64, m: f64) -> Result<f64> {
    if !(m < 1.0) {
        return Err(Error::Regime(format!("zeta needs m < 1, got {m}")));
    }
    let u = upsilon(eta, h0, m)?;
    if !(u > 0.0) {
        return Err(Error::Regime(format!(
            "zeta needs Upsilon > 0, got {u} (eta = {eta}, h0 = {h0}, m = {m})"
        )));
    }
    Ok((2.0 * (1.0 - m * m).sqrt() / u).sqrt())
}

pub fn classify_regime(eta: f64, h0: f64, m: f64) -> Result<Regime> {
    if !(m >= 0.0) {
        return Err(Error::Domain(format!("crack speed must be non-negative, got {m}")));
    }
    let sonic = if m < 1.0 { Sonic::Subsonic } else { Sonic::Supersonic };
    let limit = critical_speed(eta, h0)?.min(1.0);
    let rayleigh = if m < limit { Rayleigh::SubRayleigh } else { Rayleigh::SuperRayleigh };
    Ok(Regime { rayleigh, sonic })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn upsilon_examples() {
        assert!((upsilon(0.0, 0.0, 0.5).unwrap() - 1.5).abs() < 1e-15);
        assert!((upsilon(0.9, 0.0, 0.5).unwrap() - 1.995).abs() < 1e-14);
        assert!(upsilon(-0.9, 0.707, 0.441).unwrap().abs() < 1e-2);
        assert!(upsilon(0.0, 1.0, 0.9).is_err());
    }

    #[test]
    fn lambda_examples() {
        for m in [0.0, 0.3, 0.9, 2.0] {
            assert_eq!(lambda_surface(0.0, 0.0, m).unwrap(), 0.0);
        }
        assert!(lambda_surface(0.0, FRAC_1_SQRT_2, 1.0).unwrap().abs() < 1e-15);
        assert!(lambda_surface(-0.9, 0.707, 0.441).unwrap().abs() < 1e-2);
    }

    #[test]
    fn lambda_is_scaled_upsilon() {
        for &(eta, h0, m) in &[(0.3, 0.5, 0.7), (-0.6, 0.9, 0.5), (0.9, 0.2, 0.99)] {
            let l = lambda_surface(eta, h0, m).unwrap();
            let u = upsilon(eta, h0, m).unwrap();
            assert!((l - 2.0 * h0 * h0 * m * m * u).abs() < 1e-14);
        }
    }

    #[test]
    fn critical_speeds() {
        assert_eq!(critical_speed(0.0, FRAC_1_SQRT_2).unwrap(), 1.0);
        assert!((critical_speed(-0.9, 0.707).unwrap() - 0.441).abs() < 0.005);
        for eta in [-0.9, 0.0, 0.9] {
            assert_eq!(critical_speed(eta, 0.01).unwrap(), 1.0);
        }
    }

    #[test]
    fn h0_star_examples() {
        assert!((h0_star(0.0).unwrap() - FRAC_1_SQRT_2).abs() < 1e-10);
        let h = h0_star(0.9).unwrap();
        assert!(lambda_surface(0.9, h, 1.0).unwrap().abs() < 1e-10);
        let h = h0_star(-0.9).unwrap();
        assert!(h > 0.0 && h <= FRAC_1_SQRT_2);
    }

    #[test]
    fn zeta_values() {
        assert!((zeta(0.0, 0.0, 0.0).unwrap() - (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let u = upsilon(0.4, 0.6, 0.0).unwrap();
        assert!((zeta(0.4, 0.6, 0.0).unwrap() - (2.0 / u).sqrt()).abs() < 1e-15);
        assert!(zeta(0.0, 0.3, 1.0).unwrap_err().is_regime());
        let mc = critical_speed(-0.9, 0.707).unwrap();
        assert!(zeta(-0.9, 0.707, mc * (1.0 - 1e-9)).unwrap() > 1e3);
    }

    #[test]
    fn regimes() {
        let r = classify_regime(0.9, 0.01, 0.5).unwrap();
        assert_eq!(r, Regime { rayleigh: Rayleigh::SubRayleigh, sonic: Sonic::Subsonic });
        let r = classify_regime(-0.9, 0.707, 0.6).unwrap();
        assert_eq!(r, Regime { rayleigh: Rayleigh::SuperRayleigh, sonic: Sonic::Subsonic });
        let r = classify_regime(0.0, 0.0, 1.5).unwrap();
        assert_eq!(r, Regime { rayleigh: Rayleigh::SuperRayleigh, sonic: Sonic::Supersonic });
    }

    #[test]
    fn material_validation() {
        assert!(Material::new(1.0, 1.0, 1.0, 1.0, 0.1).is_err());
        assert!(Material::new(-1.0, 1.0, 1.0, 0.0, 0.1).is_err());
        let m = Material::new(4.0, 1.0, 2.0, 0.5, 0.25).unwrap();
        assert_eq!(m.c_s(), 2.0);
        assert_eq!(m.rotational_inertia(), 4.0 * 0.25);
        assert!(m.ell_bending() > 0.0 && m.ell_torsion() > 0.0);
    }
}
