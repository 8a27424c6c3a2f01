//! Closed-form solution of the steady Mode III crack in classical
//! elasticity under the same load family, used as an oracle for the
//! couple-stress pipeline.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::energy;
use crate::error::{Error, Result};
use crate::kernel::{sqrt_plus, FactorizedKernel};
use crate::loading::{taylor_coefficients, LoadProfile, CONTOUR_RADIUS};
use crate::numerics::{adaptive_integral, factorial, gamma_half_minus, QuadratureSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalSolution {
    pub h_coeffs: Vec<Complex64>,
    /// `√(1 − m²)`.
    pub nu: f64,
    pub profile: LoadProfile,
    pub g: f64,
}

/// Near-tip value: stress ahead of the tip, opening behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassicalNearTip {
    Sigma23(f64),
    Opening(f64),
}

impl ClassicalSolution {
    pub fn new(profile: LoadProfile, m: f64, g: f64) -> Result<Self> {
        if !(m >= 0.0 && m < 1.0) {
            return Err(Error::Regime(format!("classical solution needs 0 <= m < 1, got {m}")));
        }
        Ok(ClassicalSolution { h_coeffs: h_coefficients(profile.p, profile.l), nu: (1.0 - m * m).sqrt(), profile, g })
    }

    /// Real factor `(−1)^p/(p!Γ(1/2−p))` shared by the near-tip terms.
    fn amplitude(&self) -> f64 {
        let p = self.profile.p;
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        sign / (factorial(p) * gamma_half_minus(p))
    }
}

/// `H_j = (−1)^j/j!·√π/Γ(1/2−j)·(i/L)^{−1/2}` for `j = 0..=p`.
pub fn h_coefficients(p: u32, l: f64) -> Vec<Complex64> {
    let base = sqrt_plus(Complex64::new(0.0, 1.0 / l)).inv();
    (0..=p)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            base * sign * PI.sqrt() / (factorial(j) * gamma_half_minus(j))
        })
        .collect()
}

/// The same coefficients from the contour integral around `s = i/L`.
pub fn h_coefficients_contour(p: u32, l: f64) -> Result<Vec<Complex64>> {
    taylor_coefficients(&FactorizedKernel::unit(), l, CONTOUR_RADIUS, p as usize + 1)
}

/// Leading near-tip term: `σ₂₃ ∝ X^{−1/2}` for `X > 0`, `w ∝ (−X)^{1/2}`
/// for `X < 0`.
pub fn classical_neartip(x: f64, sol: &ClassicalSolution) -> Result<ClassicalNearTip> {
    let t0 = sol.profile.t0;
    let root_l = sol.profile.l.sqrt();
    if x > 0.0 {
        Ok(ClassicalNearTip::Sigma23(sol.amplitude() * t0 / root_l * x.powf(-0.5)))
    } else if x < 0.0 {
        Ok(ClassicalNearTip::Opening(sol.amplitude() * 2.0 * t0 / (sol.nu * sol.g * root_l) * (-x).sqrt()))
    } else {
        Err(Error::Domain("the near-tip fields are singular at X = 0".into()))
    }
}

/// `K_III = lim √(2πX) σ₂₃`.
pub fn classical_sif(sol: &ClassicalSolution) -> f64 {
    sol.amplitude() * (2.0 * PI / sol.profile.l).sqrt() * sol.profile.t0
}

/// Classical energy release rate.
pub fn classical_err(sol: &ClassicalSolution, m: f64) -> Result<f64> {
    energy::err_classical(&sol.profile, m, sol.g)
}

/// `σ₂₃(X)` for `X > 0` by inverting `Σ₂₃⁺ = T₀ s₊^{1/2}𝓘⁺`.
///
/// The load term inverts to zero ahead of the tip, leaving
/// `−(T₀/2π)∫ s₊^{1/2}𝓘⁻ e^{−isX} ds`; closing the path around the branch
/// cut on the negative imaginary axis gives a Laplace integral.
pub fn classical_sigma23(x: f64, sol: &ClassicalSolution) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("sigma23 is defined for X > 0, got {x}")));
    }
    let (l, p) = (sol.profile.l, sol.profile.p as i32);
    let h = &sol.h_coeffs;
    let spec = QuadratureSpec::with_tol(1e-14, 1e-12);
    // y = v² absorbs the √y at the origin.
    let est = adaptive_integral(
        |v: f64| {
            let y = v * v;
            let i_minus: Complex64 =
                h.iter().enumerate().map(|(j, hj)| hj / (1.0 + y * l).powi(p + 1 - j as i32)).sum();
            2.0 * v * v * i_minus * (-x * y).exp()
        },
        0.0,
        f64::INFINITY,
        &spec,
    )?;
    let pre = Complex64::new(0.0, sol.profile.t0 / PI) * Complex64::from_polar(1.0, -0.25 * PI);
    let v = pre * est.value;
    if v.im.abs() > 1e-8 * v.re.abs() {
        return Err(Error::NotReal(v));
    }
    Ok(v.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sol(p: u32) -> ClassicalSolution {
        ClassicalSolution::new(LoadProfile::new(1.5, 2.0, p).unwrap(), 0.6, 3.0).unwrap()
    }

    #[test]
    fn first_coefficients() {
        let h = h_coefficients(1, 2.0);
        let base = sqrt_plus(Complex64::new(0.0, 0.5)).inv();
        assert!((h[0] - base).norm() < 1e-14);
        assert!((h[1] - 0.5 * base).norm() < 1e-14);
    }

    #[test]
    fn contour_matches_closed_form() {
        for l in [0.5, 2.0, 10.0] {
            let a = h_coefficients(6, l);
            let b = h_coefficients_contour(6, l).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() <= 1e-10 * x.norm());
            }
        }
    }

    #[test]
    fn intensity_factor() {
        let s = sol(0);
        assert!((classical_sif(&s) - 1.5 * (2.0f64 / 2.0).sqrt()).abs() < 1e-14);
        let s1 = sol(1);
        assert!((classical_sif(&s1) - 0.5 * classical_sif(&s)).abs() < 1e-14);
    }

    #[test]
    fn energy_from_intensity_factor() {
        for p in 0..4 {
            let s = sol(p);
            let k = classical_sif(&s);
            let e = classical_err(&s, 0.6).unwrap();
            assert!((e - k * k / (2.0 * s.g * s.nu)).abs() < 1e-13 * e);
        }
    }

    #[test]
    fn product_is_scale_free() {
        let s = sol(2);
        let at = |x: f64| match (classical_neartip(x, &s).unwrap(), classical_neartip(-x, &s).unwrap()) {
            (ClassicalNearTip::Sigma23(a), ClassicalNearTip::Opening(b)) => a * b,
            _ => unreachable!(),
        };
        let r = at(1e-3);
        for x in [1e-5, 0.01, 0.3, 2.0] {
            assert!((at(x) - r).abs() < 1e-13 * r.abs());
        }
        assert!(classical_neartip(0.0, &s).is_err());
    }

    #[test]
    fn inversion_matches_near_tip() {
        for p in 0..3 {
            let s = sol(p);
            let x = 1e-6;
            let full = classical_sigma23(x, &s).unwrap();
            let ClassicalNearTip::Sigma23(tip) = classical_neartip(x, &s).unwrap() else { unreachable!() };
            assert!((full / tip - 1.0).abs() < 0.01, "{p}: {full} vs {tip}");
        }
    }
}
