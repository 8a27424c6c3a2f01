//! Dynamic energy release rate and its classical comparison.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{factorize, KernelParams};
use crate::loading::{LoadProfile, SplitData};
use crate::material::{self, Material};
use crate::numerics::{adaptive_integral, QuadratureSpec};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Default factor in the limit-speed proxy `m = factor·min(1, m_c)`.
pub const LIMIT_FACTOR: f64 = 1.0 - 1e-3;

/// Tolerance of the factorization quadrature used by the sweeps.
pub const KERNEL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrResult {
    pub e: f64,
    pub e_cl: f64,
    pub ratio: f64,
    pub m: f64,
    pub eta: f64,
    pub h0: f64,
    pub p: u32,
    pub l_over_ell: f64,
}

/// `𝓔 = Re[2iF²T₀²/(GℓΥ)]`.
pub fn err_couple(f: Complex64, material: &Material, m: f64, profile: &LoadProfile) -> Result<f64> {
    let upsilon = material::upsilon(material.eta, material.h0, m)?;
    if !(upsilon > 0.0) || !(m < 1.0) {
        return Err(Error::Regime(format!("m = {m} is not sub-Rayleigh")));
    }
    let e = 2.0 * I * f * f * profile.t0 * profile.t0 / (material.g * material.ell * upsilon);
    if e.im.abs() > 1e-8 * e.re.abs() {
        return Err(Error::NotReal(e));
    }
    Ok(e.re)
}

/// `𝓔^cl = T₀²K_p²/(GL√(1−m²))`.
pub fn err_classical(profile: &LoadProfile, m: f64, g: f64) -> Result<f64> {
    if !(m >= 0.0 && m < 1.0) {
        return Err(Error::Regime(format!("classical energy needs 0 <= m < 1, got {m}")));
    }
    let kp = profile.k_p();
    Ok(profile.t0 * profile.t0 * kp * kp / (g * profile.l * (1.0 - m * m).sqrt()))
}

/// `𝓔/𝓔^cl` from its own closed form `Re[2iF²L√(1−m²)/(ℓK_p²Υ)]`.
pub fn err_ratio(f: Complex64, material: &Material, m: f64, profile: &LoadProfile) -> Result<f64> {
    let upsilon = material::upsilon(material.eta, material.h0, m)?;
    let kp = profile.k_p();
    let r = 2.0 * I * f * f * profile.l * (1.0 - m * m).sqrt() / (material.ell * kp * kp * upsilon);
    if r.im.abs() > 1e-8 * r.re.abs() {
        return Err(Error::NotReal(r));
    }
    Ok(r.re)
}

/// Small-length limit `(∫τ|X|^{−1/2}dX)²/(πG√(1−m²))` for a general load
/// `tau` on `X < 0`.
pub fn err_smalllength_limit<F>(tau: F, m: f64, g: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(m >= 0.0 && m < 1.0) {
        return Err(Error::Regime(format!("limit needs 0 <= m < 1, got {m}")));
    }
    // X = −u² removes the inverse square root.
    let spec = QuadratureSpec::with_tol(1e-14, 1e-13);
    let moment = adaptive_integral(|u: f64| Complex64::new(2.0 * tau(-u * u), 0.0), 0.0, f64::INFINITY, &spec)?;
    let j = moment.value.re;
    if !j.is_finite() {
        return Err(Error::Domain("load moment is not finite".into()));
    }
    Ok(limit_from_moment(j, m, g))
}

/// Small-length limit for the built-in load family, from the closed-form
/// moment `T₀Γ(p+½)/(Γ(p+1)√L)`.
pub fn err_smalllength_limit_family(profile: &LoadProfile, m: f64, g: f64) -> Result<f64> {
    if !(m >= 0.0 && m < 1.0) {
        return Err(Error::Regime(format!("limit needs 0 <= m < 1, got {m}")));
    }
    Ok(limit_from_moment(profile.half_moment(), m, g))
}

fn limit_from_moment(j: f64, m: f64, g: f64) -> f64 {
    j * j / (std::f64::consts::PI * g * (1.0 - m * m).sqrt())
}

/// Builds the kernel factorization and the split for one configuration.
pub fn build_split(material: &Material, m: f64, profile: LoadProfile) -> Result<SplitData> {
    let params = KernelParams::new(m, material.eta, material.h0)?;
    let kernel = factorize(&params, KERNEL_TOL)?;
    SplitData::new(Arc::new(kernel), profile, material.ell)
}

/// Energy release rate, classical value and ratio at one point.
pub fn evaluate(material: &Material, m: f64, profile: LoadProfile) -> Result<ErrResult> {
    let split = build_split(material, m, profile)?;
    let e = err_couple(split.f, material, m, &profile)?;
    let e_cl = err_classical(&profile, m, material.g)?;
    Ok(ErrResult {
        e,
        e_cl,
        ratio: e / e_cl,
        m,
        eta: material.eta,
        h0: material.h0,
        p: profile.p,
        l_over_ell: profile.l / material.ell,
    })
}

/// The limit-speed proxy `factor·min(1, m_c)`.
pub fn limit_speed(eta: f64, h0: f64, factor: f64) -> Result<f64> {
    Ok(factor * material::critical_speed(eta, h0)?.min(1.0))
}

/// One row of [`err_max_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct MaxRow {
    pub h0: f64,
    pub m: f64,
    pub result: std::result::Result<ErrResult, String>,
}

/// `𝓔` and `𝓔/𝓔^cl` at the limit-speed proxy for each `h₀`. A failing row
/// is recorded and the sweep continues.
pub fn err_max_sweep(material: &Material, h0_grid: &[f64], profile: LoadProfile, factor: f64) -> Vec<MaxRow> {
    h0_grid
        .par_iter()
        .map(|&h0| {
            let mat = Material { h0, ..*material };
            match limit_speed(material.eta, h0, factor) {
                Ok(m) => MaxRow { h0, m, result: evaluate(&mat, m, profile).map_err(|e| e.to_string()) },
                Err(e) => MaxRow { h0, m: f64::NAN, result: Err(e.to_string()) },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loading::k_p;

    #[test]
    fn classical_values() {
        let prof = LoadProfile::new(2.0, 3.0, 0).unwrap();
        let e = err_classical(&prof, 0.0, 5.0).unwrap();
        assert!((e - 4.0 / 15.0).abs() < 1e-15);
        let e6 = err_classical(&prof, 0.6, 5.0).unwrap();
        assert!((e6 - 4.0 / (0.8 * 15.0)).abs() < 1e-15);
        assert!(err_classical(&prof, 1.0, 5.0).is_err());
    }

    #[test]
    fn limit_equals_classical_for_family() {
        for p in 0..6 {
            let prof = LoadProfile::new(1.3, 2.5, p).unwrap();
            let a = err_smalllength_limit_family(&prof, 0.4, 2.0).unwrap();
            let b = err_classical(&prof, 0.4, 2.0).unwrap();
            assert!((a - b).abs() <= 1e-12 * b);
            let prof2 = prof;
            let num = err_smalllength_limit(|x| prof2.traction(x).unwrap_or(0.0), 0.4, 2.0).unwrap();
            assert!((num - b).abs() <= 1e-10 * b, "{p}");
        }
        assert!((k_p(3) - 0.3125).abs() < 1e-15);
    }

    #[test]
    fn ratio_paths_agree() {
        let mat = Material::normalized(0.5, 0.6).unwrap();
        let prof = LoadProfile::new(1.0, 4.0, 1).unwrap();
        let r = evaluate(&mat, 0.3, prof).unwrap();
        let split = build_split(&mat, 0.3, prof).unwrap();
        let direct = err_ratio(split.f, &mat, 0.3, &prof).unwrap();
        assert!((r.ratio - direct).abs() <= 1e-10 * direct);
        assert!(r.e > 0.0);
    }

    #[test]
    fn sweep_marks_failures() {
        let mat = Material::normalized(0.0, 0.6).unwrap();
        let prof = LoadProfile::new(1.0, 10.0, 0).unwrap();
        let rows = err_max_sweep(&mat, &[0.3, 0.6], prof, LIMIT_FACTOR);
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.result.is_ok()));
        let rows = err_max_sweep(&mat, &[0.3], prof, 1.5);
        assert!(rows[0].result.is_err());
    }
}
