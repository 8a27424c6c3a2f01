//! Crack-face loading `τ(X) ∝ (X/L)^p e^{X/L}` and the additive split of
//! `k⁺(sℓ)/[(sℓ)₊^{1/2}(1+isL)^{1+p}]` into `𝒢⁻ + 𝒢⁺`.

use std::sync::Arc;

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::kernel::{sqrt_minus, sqrt_plus, FactorizedKernel};
use crate::numerics::{adaptive_integral, contour_coefficients, factorial, gamma_half_minus, QuadratureSpec};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Radius of the coefficient contour in the variable `u = 1 + isL`.
pub const CONTOUR_RADIUS: f64 = 0.4;

/// Taylor terms kept beyond `p` for evaluating `𝒢⁺` close to `s = i/L`.
const EXTRA_TERMS: usize = 40;

/// Relative tolerance of the `F` versus `I₁/I₂` cross-check.
pub const CROSS_CHECK_TOL: f64 = 1e-6;

/// Traction family with resultant `t0`, length `l` and exponent `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadProfile {
    pub t0: f64,
    pub l: f64,
    pub p: u32,
}

impl LoadProfile {
    pub fn new(t0: f64, l: f64, p: u32) -> Result<Self> {
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(Error::Domain(format!("T0 must be positive, got {t0}")));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Domain(format!("L must be positive, got {l}")));
        }
        Ok(LoadProfile { t0, l, p })
    }

    /// `τ(X)` on the crack faces, `X < 0`.
    pub fn traction(&self, x: f64) -> Result<f64> {
        if !(x < 0.0) {
            return Err(Error::Domain(format!("traction is defined for X < 0, got {x}")));
        }
        Ok(self.traction_unchecked(x))
    }

    fn traction_unchecked(&self, x: f64) -> f64 {
        let r = -x / self.l;
        self.t0 / self.l * r.powi(self.p as i32) * (-r).exp() / factorial(self.p)
    }

    /// `T₀/(1 + isL)^{1+p}`.
    pub fn transform(&self, s: Complex64) -> Result<Complex64> {
        let u = 1.0 + I * s * self.l;
        if u.norm() < 1e-300 {
            return Err(Error::Pole(s));
        }
        Ok(self.t0 / u.powi(self.p as i32 + 1))
    }

    /// `∫ τ(X)|X|^{−1/2} dX` over the crack faces.
    pub fn half_moment(&self) -> f64 {
        let p = self.p as f64;
        self.t0 * gamma(p + 0.5) / (gamma(p + 1.0) * self.l.sqrt())
    }

    /// `K_p = (−1)^p√π/(p!Γ(1/2−p))`.
    pub fn k_p(&self) -> f64 {
        k_p(self.p)
    }
}

pub fn k_p(p: u32) -> f64 {
    let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
    sign * std::f64::consts::PI.sqrt() / (factorial(p) * gamma_half_minus(p))
}

/// Taylor coefficients in `u = 1 + iξL/ℓ` of `k⁺(ξ)/ξ₊^{1/2}` about
/// `ξ = iℓ/L`; the first `count` are returned. Lengths are in units of `ℓ`.
pub fn taylor_coefficients(
    kernel: &FactorizedKernel,
    l_over_ell: f64,
    radius: f64,
    count: usize,
) -> Result<Vec<Complex64>> {
    if !(radius > 0.0 && radius < 1.0) {
        // The branch point ξ = 0 sits at u = 1.
        return Err(Error::Domain(format!("contour radius {radius} must lie in (0, 1)")));
    }
    let lt = l_over_ell;
    let phi = |u: Complex64| {
        let xi = I * (1.0 - u) / lt;
        match kernel.k_plus(xi) {
            Ok(kp) => kp / sqrt_plus(xi),
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }
    };
    let coeffs = contour_coefficients(phi, Complex64::new(0.0, 0.0), radius, count)?;
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Quadrature { value: Complex64::new(f64::NAN, 0.0), error: f64::INFINITY });
    }
    Ok(coeffs)
}

/// `F₀, …, F_p` for the given kernel and load (lengths in units of `ℓ`).
pub fn split_coefficients(kernel: &FactorizedKernel, l_over_ell: f64, p: u32) -> Result<Vec<Complex64>> {
    taylor_coefficients(kernel, l_over_ell, CONTOUR_RADIUS, p as usize + 1)
}

/// Everything the field and energy formulas need about the split.
#[derive(Debug, Clone)]
pub struct SplitData {
    pub profile: LoadProfile,
    pub ell: f64,
    pub zeta: f64,
    /// `F₀ … F_p` followed by the higher Taylor terms.
    taylor: Vec<Complex64>,
    /// Liouville constant `F = 𝒢⁻(−iζ/ℓ)`.
    pub f: Complex64,
    pub kernel: Arc<FactorizedKernel>,
}

impl SplitData {
    pub fn new(kernel: Arc<FactorizedKernel>, profile: LoadProfile, ell: f64) -> Result<Self> {
        let params = *kernel
            .params()
            .ok_or_else(|| Error::Domain("the split needs a couple-stress kernel".into()))?;
        if !(ell > 0.0) {
            return Err(Error::Domain(format!("ell must be positive, got {ell}")));
        }
        let lt = profile.l / ell;
        let zeta = params.zeta();
        // Distance from the contour centre to u(−iζ) is ζL/ℓ + 1.
        if !(CONTOUR_RADIUS < (1.0f64).min(1.0 + zeta * lt)) {
            return Err(Error::Domain("contour radius reaches a singularity".into()));
        }
        let taylor = taylor_coefficients(&kernel, lt, CONTOUR_RADIUS, profile.p as usize + 1 + EXTRA_TERMS)?;
        let mut split = SplitData { profile, ell, zeta, taylor, f: Complex64::new(0.0, 0.0), kernel };
        split.f = split.g_minus_xi(Complex64::new(0.0, -zeta));
        Ok(split)
    }

    pub fn l_over_ell(&self) -> f64 {
        self.profile.l / self.ell
    }

    pub fn f_coeffs(&self) -> &[Complex64] {
        &self.taylor[..=self.profile.p as usize]
    }

    /// `𝒢⁻` at dimensionless `ξ = sℓ`.
    pub fn g_minus_xi(&self, xi: Complex64) -> Complex64 {
        let u = 1.0 + I * xi * self.l_over_ell();
        let p = self.profile.p as i32;
        self.f_coeffs().iter().enumerate().map(|(j, f)| f / u.powi(p + 1 - j as i32)).sum()
    }

    /// `𝒢⁺` at dimensionless `ξ`, for `Im ξ ≥ 0`.
    pub fn g_plus_xi(&self, xi: Complex64) -> Result<Complex64> {
        let u = 1.0 + I * xi * self.l_over_ell();
        let p = self.profile.p as usize;
        if u.norm() < 0.5 * CONTOUR_RADIUS {
            // Tail of the Taylor series; avoids cancellation near the pole.
            return Ok(self.taylor[p + 1..].iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * u + c));
        }
        let whole = self.kernel.k_plus(xi)? / (sqrt_plus(xi) * u.powi(p as i32 + 1));
        Ok(whole - self.g_minus_xi(xi))
    }

    /// `𝒢⁻(s)` at physical wavenumber `s`.
    pub fn g_minus(&self, s: Complex64) -> Complex64 {
        self.g_minus_xi(s * self.ell)
    }

    /// `𝒢⁺(s)` at physical wavenumber `s`, `Im s ≥ 0`.
    pub fn g_plus(&self, s: Complex64) -> Result<Complex64> {
        self.g_plus_xi(s * self.ell)
    }

    /// `F` recomputed as the ratio `I₁/I₂` of two real-line integrals.
    pub fn liouville_alt(&self) -> Result<Complex64> {
        let params = self.kernel.params().expect("checked in new");
        let spec = QuadratureSpec { max_subdivisions: 4000, ..QuadratureSpec::with_tol(1e-13, 1e-11) };
        let weight = |xi: f64| -> Result<Complex64> {
            let z = Complex64::new(xi, 0.0);
            let km = self.kernel.k_minus(z)?;
            Ok(1.0 / (sqrt_minus(z) * params.psi(z) * km))
        };
        let mut sums = [Complex64::new(0.0, 0.0); 2];
        for sign in [1.0, -1.0] {
            for (idx, with_g) in [(0, true), (1, false)] {
                let mut failure = None;
                let mut f = |xi: f64| match weight(xi) {
                    Ok(w) => {
                        if with_g {
                            w * self.g_minus_xi(Complex64::new(xi, 0.0))
                        } else {
                            w
                        }
                    }
                    Err(e) => {
                        failure.get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    }
                };
                // ξ = u² near the origin removes the inverse square root.
                let head = adaptive_integral(|u: f64| f(sign * u * u) * 2.0 * u, 0.0, 1.0, &spec)?;
                let tail = adaptive_integral(|x: f64| f(sign * x), 1.0, f64::INFINITY, &spec)?;
                if let Some(e) = failure {
                    return Err(e);
                }
                sums[idx] += head.value + tail.value;
            }
        }
        Ok(sums[0] / sums[1])
    }
}

/// Liouville constant `F`, cross-checked against `I₁/I₂`.
///
/// Returns `(F, F_alt)`; a relative disagreement above [`CROSS_CHECK_TOL`]
/// is an error carrying both values.
pub fn liouville_constant(split: &SplitData) -> Result<(Complex64, Complex64)> {
    let f = split.f;
    let f_alt = split.liouville_alt()?;
    if (f - f_alt).norm() > CROSS_CHECK_TOL * f.norm() {
        return Err(Error::CrossCheck { f, f_alt });
    }
    Ok((f, f_alt))
}
