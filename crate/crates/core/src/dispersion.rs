//! Antiplane couple-stress surface waves: the dispersion determinant and
//! its roots `m_R(ω)`, `m_R(k)`.
//!
//! With `K = (kℓ)²` the determinant of the 2×2 boundary matrix factors as
//! `(α − β)·N(K)`, where
//!
//! ```text
//! N = αβ(α² + β² + 2ηK) + α²β² − η²K²,
//! α² + β² = 2 + 2(1 − h₀²m²)K,   α²β² = 2(1 − m²)K + (1 − 2h₀²m²)K².
//! ```
//!
//! Root finding works on `N` with `αβ` continued as a signed square root of
//! `α²β²`, which stays real and changes sign where `β` stops decaying. This
//! is what makes the η = 0 shear-wave root visible to bisection.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{bracketed_root, scan_sign_change};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    /// `ωℓ/c_s`.
    pub omega_norm: f64,
    /// `kℓ`.
    pub k_norm: f64,
    /// `v_R/c_s`.
    pub m_r: f64,
}

/// Decay exponents and amplitudes of a surface wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceModeShape {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub a: Complex64,
    pub b: Complex64,
}

/// Which variable the dispersion curve is parameterized by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Grid values are `ωℓ/c_s`.
    Frequency,
    /// Grid values are `kℓ`.
    Wavenumber,
}

/// A traced dispersion branch.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionCurve {
    pub points: Vec<DispersionPoint>,
    /// Indices whose root moved by more than 5% from the previous point.
    pub jumps: Vec<usize>,
    /// Other admissible roots seen at the same grid point, `(index, m_R)`.
    pub alternates: Vec<(usize, f64)>,
}

const ROOT_TOL: f64 = 1e-13;
const SCAN_LO: f64 = 0.01;
const SCAN_HI: f64 = 3.0;
const SCAN_POINTS: usize = 1200;

fn chi_alpha_beta(m: f64, k2: f64, h0: f64) -> (Complex64, Complex64, Complex64) {
    let m2 = m * m;
    let chi2 = 1.0 + 2.0 * (1.0 - h0 * h0) * m2 * k2 + h0.powi(4) * m2 * m2 * k2 * k2;
    let chi = Complex64::new(chi2, 0.0).sqrt();
    let base = Complex64::new(1.0 + (1.0 - h0 * h0 * m2) * k2, 0.0);
    (chi, (base + chi).sqrt(), (base - chi).sqrt())
}

fn boundary_matrix(m: f64, k2: f64, eta: f64, h0: f64) -> ([[Complex64; 2]; 2], Complex64, Complex64) {
    let (_, a, b) = chi_alpha_beta(m, k2, h0);
    let c = 2.0 + k2 * (2.0 + eta - 2.0 * h0 * h0 * m * m);
    let row0 = [a * a * a - a * c, b * b * b - b * c];
    let row1 = [a * a + eta * k2, b * b + eta * k2];
    ([row0, row1], a, b)
}

/// Determinant of the surface-wave boundary matrix at `(m_R, ωℓ/c_s)`.
///
/// When `α` and `β` are a complex-conjugate pair the determinant is purely
/// imaginary; the phase of `α − β` is removed so the returned value is real
/// and carries the sign of `N`. Its large-ω behaviour is
/// `Λ(η, h₀, m_R)·(ωℓ/(m_R c_s))⁵`.
pub fn dispersion_det(m_r: f64, omega_norm: f64, eta: f64, h0: f64) -> Result<f64> {
    if !(m_r > 0.0) || !(omega_norm > 0.0) {
        return Err(Error::Domain(format!(
            "m_R and omega must be positive (m_R = {m_r}, omega = {omega_norm})"
        )));
    }
    let k2 = (omega_norm / m_r).powi(2);
    let (d, a, b) = boundary_matrix(m_r, k2, eta, h0);
    if (a + b).norm() == 0.0 {
        return Err(Error::Branch("alpha + beta vanishes".into()));
    }
    let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
    let diff = a - b;
    if diff.norm() == 0.0 {
        return Ok(0.0);
    }
    Ok((det * diff.conj()).re / diff.norm())
}

/// Null vector of the boundary matrix, normalized so that `A = 1`.
pub fn mode_shape(m_r: f64, omega_norm: f64, eta: f64, h0: f64) -> Result<SurfaceModeShape> {
    let k2 = (omega_norm / m_r).powi(2);
    let (d, alpha, beta) = boundary_matrix(m_r, k2, eta, h0);
    if !(alpha.re > 0.0 && beta.re > 0.0) {
        return Err(Error::Branch(format!("non-decaying mode: alpha = {alpha}, beta = {beta}")));
    }
    let b = -d[1][0] / d[1][1];
    Ok(SurfaceModeShape { alpha, beta, a: Complex64::new(1.0, 0.0), b })
}

/// `N(K)/(1+K)²` with `αβ` continued as a signed root (see module docs).
pub fn reduced_det(m: f64, k2: f64, eta: f64, h0: f64) -> f64 {
    let (p, s) = alpha_beta_product(m, k2, h0);
    let sum2 = 2.0 + 2.0 * (1.0 - h0 * h0 * m * m) * k2;
    (s * (sum2 + 2.0 * eta * k2) + p - eta * eta * k2 * k2) / (1.0 + k2).powi(2)
}

fn alpha_beta_product(m: f64, k2: f64, h0: f64) -> (f64, f64) {
    let p = 2.0 * (1.0 - m * m) * k2 + (1.0 - 2.0 * h0 * h0 * m * m) * k2 * k2;
    (p, p.signum() * p.abs().sqrt())
}

/// Plane shear-wave phase speed `m² = (1 + k²ℓ²/2)/(1 + h₀²k²ℓ²)`.
pub fn shear_phase_speed(k_norm: f64, h0: f64) -> f64 {
    let k2 = k_norm * k_norm;
    ((1.0 + 0.5 * k2) / (1.0 + h0 * h0 * k2)).sqrt()
}

fn k2_of(axis: Axis, x: f64, m: f64) -> f64 {
    match axis {
        Axis::Frequency => (x / m).powi(2),
        Axis::Wavenumber => x * x,
    }
}

fn admissible(axis: Axis, x: f64, m: f64, h0: f64) -> bool {
    let k2 = k2_of(axis, x, m);
    let (p, _) = alpha_beta_product(m, k2, h0);
    p >= -1e-9 * (1.0 + k2 * k2)
}

/// All admissible roots in `[lo, hi]`, found on a uniform scan.
fn roots_in(axis: Axis, x: f64, eta: f64, h0: f64, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    let f = |m: f64| reduced_det(m, k2_of(axis, x, m), eta, h0);
    let mut roots = Vec::new();
    let mut a = lo;
    let step = (hi - lo) / n as f64;
    while a < hi - 0.5 * step {
        let b = (a + step).min(hi);
        if let Some((l, r)) = scan_sign_change(f, a, b, 1) {
            let root = bracketed_root(f, l, r, ROOT_TOL)?;
            if admissible(axis, x, root, h0) && roots.last().is_none_or(|&q: &f64| (root - q).abs() > 1e-9) {
                roots.push(root);
            }
        }
        a = b;
    }
    Ok(roots)
}

/// Scan ceiling: at least 3, and beyond the plane shear speed at this grid
/// value so that supersonic branches of weakly inertial materials are seen.
fn scan_hi(axis: Axis, x: f64, h0: f64) -> f64 {
    let shear = match axis {
        Axis::Wavenumber => shear_phase_speed(x, h0),
        Axis::Frequency => {
            let b = h0 * h0 * x * x - 1.0;
            (0.5 * (-b + (b * b + 2.0 * x * x).sqrt())).sqrt()
        }
    };
    SCAN_HI.max(1.05 * shear)
}

fn full_scan(axis: Axis, x: f64, eta: f64, h0: f64) -> Result<Vec<f64>> {
    let hi = scan_hi(axis, x, h0);
    let n = (SCAN_POINTS as f64 * hi / SCAN_HI).ceil() as usize;
    roots_in(axis, x, eta, h0, SCAN_LO, hi, n)
}

/// Surface-wave speed at one grid value, without continuation: the slowest
/// admissible root.
pub fn phase_speed(axis: Axis, x: f64, eta: f64, h0: f64) -> Result<f64> {
    let roots = full_scan(axis, x, eta, h0)?;
    roots.first().copied().ok_or(Error::RootLoss { last_x: x, last_m: f64::NAN })
}

/// Traces `m_R` over a strictly increasing grid of `ωℓ/c_s` or `kℓ`,
/// following the branch by continuation from the previous root.
pub fn trace_curve(grid: &[f64], axis: Axis, eta: f64, h0: f64) -> Result<DispersionCurve> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Domain("dispersion grid must be positive and strictly increasing".into()));
    }
    let mut points = Vec::with_capacity(grid.len());
    let mut jumps = Vec::new();
    let mut alternates = Vec::new();
    let mut prev: Option<f64> = None;
    for (i, &x) in grid.iter().enumerate() {
        let m = match prev {
            None => {
                let roots = full_scan(axis, x, eta, h0)?;
                let first = *roots.first().ok_or(Error::RootLoss { last_x: x, last_m: f64::NAN })?;
                alternates.extend(roots.iter().skip(1).map(|&r| (i, r)));
                first
            }
            Some(mp) => {
                let window = roots_in(axis, x, eta, h0, 0.9 * mp, 1.1 * mp, 64)?;
                let pick = window
                    .iter()
                    .copied()
                    .min_by(|a, b| (a - mp).abs().total_cmp(&(b - mp).abs()));
                match pick {
                    Some(r) => r,
                    None => {
                        let roots = full_scan(axis, x, eta, h0)?;
                        let r = roots
                            .iter()
                            .copied()
                            .min_by(|a, b| (a - mp).abs().total_cmp(&(b - mp).abs()))
                            .ok_or(Error::RootLoss { last_x: grid[i - 1], last_m: mp })?;
                        alternates.extend(roots.iter().filter(|&&q| q != r).map(|&q| (i, q)));
                        r
                    }
                }
            }
        };
        if let Some(mp) = prev {
            if (m - mp).abs() > 0.05 * mp {
                jumps.push(i);
            }
        }
        let (omega_norm, k_norm) = match axis {
            Axis::Frequency => (x, x / m),
            Axis::Wavenumber => (x * m, x),
        };
        points.push(DispersionPoint { omega_norm, k_norm, m_r: m });
        prev = Some(m);
    }
    Ok(DispersionCurve { points, jumps, alternates })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::{critical_speed, lambda_surface};

    #[test]
    fn shear_speed_examples() {
        assert_eq!(shear_phase_speed(0.0, 0.4), 1.0);
        assert!((shear_phase_speed(3.0, std::f64::consts::FRAC_1_SQRT_2) - 1.0).abs() < 1e-15);
        assert!((shear_phase_speed(1.0, 0.0) - 1.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn eta_zero_is_shear() {
        for &(k, h0) in &[(0.5, 0.3), (2.0, 0.8), (10.0, 0.0)] {
            let m = phase_speed(Axis::Wavenumber, k, 0.0, h0).unwrap();
            assert!((m - shear_phase_speed(k, h0)).abs() < 1e-10, "k={k} h0={h0}");
        }
    }

    #[test]
    fn massless_rotations_are_supersonic() {
        let lo = dispersion_det(1.0 + 1e-3, 1.0, 0.5, 0.0).unwrap();
        let m = phase_speed(Axis::Frequency, 1.0, 0.5, 0.0).unwrap();
        assert!(m > 1.0);
        let hi = dispersion_det(m * 1.01, 1.0, 0.5, 0.0).unwrap();
        assert!(lo.signum() != hi.signum(), "{lo} {hi}");
    }

    #[test]
    fn leading_coefficient_is_lambda() {
        let (eta, h0, m) = (0.4, 0.8, 0.6);
        let w = 1e5;
        let d = dispersion_det(m, w, eta, h0).unwrap() / w.powi(5);
        let l = lambda_surface(eta, h0, m).unwrap() / m.powi(5);
        assert!((d / l - 1.0).abs() < 1e-3, "{d} vs {l}");
    }

    #[test]
    fn det_and_reduced_share_roots() {
        let (eta, h0) = (0.9, 0.8);
        let m = phase_speed(Axis::Frequency, 2.0, eta, h0).unwrap();
        let k2 = (2.0 / m).powi(2);
        let (_, a, b) = chi_alpha_beta(m, k2, h0);
        let d = dispersion_det(m, 2.0, eta, h0).unwrap();
        assert!(d.abs() < 1e-9 * (a - b).norm() * (1.0 + k2).powi(2));
    }

    #[test]
    fn high_frequency_limit() {
        let (eta, h0) = (0.9, 0.8);
        let grid: Vec<f64> = (0..=60).map(|i| 10f64.powf(-1.0 + 4.0 * i as f64 / 60.0)).collect();
        let curve = trace_curve(&grid, Axis::Frequency, eta, h0).unwrap();
        let last = curve.points.last().unwrap();
        assert!((last.m_r - critical_speed(eta, h0).unwrap()).abs() < 1e-3);
    }

    #[test]
    fn decaying_mode_shape() {
        let m = phase_speed(Axis::Frequency, 1.0, 0.5, 0.6).unwrap();
        let s = mode_shape(m, 1.0, 0.5, 0.6).unwrap();
        assert!(s.alpha.re > 0.0 && s.beta.re > 0.0);
    }
}
