//! The Wiener-Hopf symbol of the moving crack and its factorization
//! `k = k⁻/k⁺`.
//!
//! Everything here works in the dimensionless variable `ξ = sℓ`. The kernel
//! is normalized with `|ξ|` on the real axis so that it is real, even,
//! positive and tends to one at both ends of the line; its logarithm is then
//! split by a Cauchy integral.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::material::{self, Material, PropagationState, Rayleigh};
use crate::numerics::{adaptive_integral, gauss_legendre, QuadratureSpec};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Speed and material constants entering the symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub m: f64,
    pub eta: f64,
    pub h0: f64,
    upsilon: f64,
    nu: f64,
    q: f64,
}

impl KernelParams {
    /// Validates that `(m, η, h₀)` is a sub-Rayleigh point.
    pub fn new(m: f64, eta: f64, h0: f64) -> Result<Self> {
        let regime = material::classify_regime(eta, h0, m)?;
        if regime.rayleigh != Rayleigh::SubRayleigh {
            return Err(Error::Regime(format!(
                "m = {m} is not sub-Rayleigh for eta = {eta}, h0 = {h0}"
            )));
        }
        let upsilon = material::upsilon(eta, h0, m)?;
        if !(upsilon > 0.0) {
            return Err(Error::Regime(format!("Upsilon = {upsilon} is not positive")));
        }
        let q = (1.0 - 2.0 * h0 * h0 * m * m).max(0.0).sqrt();
        Ok(KernelParams { m, eta, h0, upsilon, nu: (1.0 - m * m).sqrt(), q })
    }

    pub fn from_state(material: &Material, state: &PropagationState) -> Result<Self> {
        Self::new(state.m, material.eta, material.h0)
    }

    pub fn upsilon(&self) -> f64 {
        self.upsilon
    }

    /// `√(1 − m²)`.
    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `√(1 − 2h₀²m²)`.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// Position `ζ` of the zeros `±iζ` of `Ψ`.
    pub fn zeta(&self) -> f64 {
        (2.0 * self.nu / self.upsilon).sqrt()
    }

    /// `Ψ(ξ) = Υξ² + 2√(1−m²)`.
    pub fn psi(&self, xi: Complex64) -> Complex64 {
        self.upsilon * xi * xi + 2.0 * self.nu
    }

    /// Normalized kernel at real `t`.
    pub fn k_real(&self, t: f64) -> f64 {
        let t = t.abs();
        if t == 0.0 {
            return 1.0;
        }
        let (q, eta) = (self.q, self.eta);
        let u = t * t;
        let s = (2.0 * self.nu * self.nu + q * q * u).sqrt();
        let sum2 = 2.0 + (1.0 + q * q) * u;
        let tt = (sum2 + 2.0 * t * s).sqrt();
        let psi = self.upsilon * u + 2.0 * self.nu;
        // N/t, with αβ = tS.
        let n = s * (sum2 + 2.0 * eta * u) + t * s * s - eta * eta * u * t;
        n / (tt * psi)
    }

    /// Symbol pieces continued off the positive real axis.
    ///
    /// `t_hint` selects the sign of `T = α + β` closest to a previous value,
    /// which keeps `T` continuous along a path.
    pub fn symbol(&self, xi: Complex64, t_hint: Option<Complex64>) -> Symbol {
        let (q, eta) = (self.q, self.eta);
        let x2 = xi * xi;
        let s = (2.0 * self.nu * self.nu + q * q * x2).sqrt();
        let ab = xi * s;
        let sum2 = 2.0 + (1.0 + q * q) * x2;
        let t2 = sum2 + 2.0 * ab;
        let scale = (1.0 + q) * xi;
        let mut t = if scale.norm() > 0.0 { scale * (t2 / (scale * scale)).sqrt() } else { t2.sqrt() };
        if let Some(h) = t_hint {
            if (-t - h).norm() < (t - h).norm() {
                t = -t;
            }
        }
        let n = ab * (sum2 + 2.0 * eta * x2) + ab * ab - eta * eta * x2 * x2;
        Symbol { s, ab, sum2, t, n, psi: self.psi(xi) }
    }

    /// Continued kernel `N/(ξ T Ψ)`.
    pub fn k_continued(&self, sym: &Symbol, xi: Complex64) -> Complex64 {
        sym.n / (xi * sym.t * sym.psi)
    }
}

/// Pieces of the symbol at one complex point: `S = αβ/ξ`, `αβ`,
/// `α² + β²`, `T = α + β`, the numerator `N` and `Ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Symbol {
    pub s: Complex64,
    pub ab: Complex64,
    pub sum2: Complex64,
    pub t: Complex64,
    pub n: Complex64,
    pub psi: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValues {
    pub chi: Complex64,
    pub alpha: Complex64,
    pub beta: Complex64,
    pub psi: Complex64,
    pub k: Complex64,
}

/// Evaluates `χ, α, β, Ψ` and the normalized kernel at `ξ`.
///
/// Principal square roots throughout, with `n(ξ) = √(ξ²)`; on the real axis
/// this gives `n = |ξ|` and an even kernel.
pub fn kernel_eval(xi: Complex64, params: &KernelParams) -> Result<KernelValues> {
    let (m, h0, eta) = (params.m, params.h0, params.eta);
    let x2 = xi * xi;
    let hm2 = h0 * h0 * m * m;
    let chi = (1.0 + 2.0 * (1.0 - h0 * h0) * m * m * x2 + hm2 * hm2 * x2 * x2).sqrt();
    let alpha = (1.0 + (1.0 - hm2) * x2 + chi).sqrt();
    // β from α²β² avoids the cancellation in 1 + (1−h₀²m²)ξ² − χ.
    let n_xi = x2.sqrt();
    let ab = n_xi * (2.0 * params.nu * params.nu + params.q * params.q * x2).sqrt();
    let beta = if alpha.norm() > 0.0 { ab / alpha } else { Complex64::new(0.0, 0.0) };
    let psi = params.psi(xi);
    if psi.norm() <= 1e-14 * (1.0 + params.upsilon * x2.norm()) {
        return Err(Error::Pole(xi));
    }
    let k = if xi.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        let sum2 = alpha * alpha + beta * beta;
        let num = ab * (sum2 + 2.0 * eta * x2) + ab * ab - eta * eta * x2 * x2;
        num / (n_xi * psi * (alpha + beta))
    };
    Ok(KernelValues { chi, alpha, beta, psi, k })
}

/// The function whose logarithm is split.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Symbolic {
    Couple(KernelParams),
    /// `k ≡ 1`, for the classical problem.
    Unit,
}

impl Symbolic {
    fn log_k(&self, t: f64) -> f64 {
        match self {
            Symbolic::Couple(p) => p.k_real(t).ln(),
            Symbolic::Unit => 0.0,
        }
    }
}

// Grid layout: a head panel, then geometric panels up to GRID_END.
const GRID_HEAD: f64 = 1e-10;
const GRID_END: f64 = 1e10;
const GRID_RATIO: f64 = 1.25;
const GRID_ORDER: usize = 16;
/// Points with `Im z ≥ GRID_MIN_SLOPE·|z|` use the cached grid.
const GRID_MIN_SLOPE: f64 = 0.125;
/// Largest error in `Φ` tolerated when the adaptive budget runs out.
const ROUND_OFF_FLOOR: f64 = 1e-11;

/// `k⁺` and `k⁻` as evaluable functions.
///
/// `k⁺(z) = exp(−Φ(z))` for `Im z ≥ 0` and `k⁻(z) = 1/k⁺(−z)`, where
/// `Φ(z) = (z/πi)∫₀^∞ log k(t)/(t² − z²) dt`.
#[derive(Debug, Clone)]
pub struct FactorizedKernel {
    symbolic: Symbolic,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    log_k: Vec<f64>,
    spec: QuadratureSpec,
}

/// Factorizes the kernel at `params`; `tol` is the absolute tolerance of the
/// adaptive quadrature used near the real axis.
pub fn factorize(params: &KernelParams, tol: f64) -> Result<FactorizedKernel> {
    FactorizedKernel::build(Symbolic::Couple(*params), tol)
}

impl FactorizedKernel {
    /// The trivial factorization of `k ≡ 1`.
    pub fn unit() -> Self {
        Self::build(Symbolic::Unit, 1e-13).expect("unit kernel is always valid")
    }

    fn build(symbolic: Symbolic, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
        }
        let (gx, gw) = gauss_legendre(GRID_ORDER);
        let mut edges = vec![0.0, GRID_HEAD];
        while *edges.last().unwrap() < GRID_END {
            let next = edges.last().unwrap() * GRID_RATIO;
            edges.push(next);
        }
        let mut nodes = Vec::with_capacity(edges.len() * GRID_ORDER);
        let mut weights = Vec::with_capacity(edges.len() * GRID_ORDER);
        for w in edges.windows(2) {
            let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for (x, wt) in gx.iter().zip(&gw) {
                nodes.push(c + h * x);
                weights.push(h * wt);
            }
        }
        let mut log_k = Vec::with_capacity(nodes.len());
        for &t in &nodes {
            let g = symbolic.log_k(t);
            if !g.is_finite() {
                return Err(Error::Regime(format!("kernel is not positive at t = {t}")));
            }
            log_k.push(g);
        }
        let spec = QuadratureSpec { max_subdivisions: 4000, ..QuadratureSpec::with_tol(tol, 1e-13) };
        Ok(FactorizedKernel { symbolic, nodes, weights, log_k, spec })
    }

    pub fn params(&self) -> Option<&KernelParams> {
        match &self.symbolic {
            Symbolic::Couple(p) => Some(p),
            Symbolic::Unit => None,
        }
    }

    pub fn is_unit(&self) -> bool {
        self.symbolic == Symbolic::Unit
    }

    /// The normalized kernel on the real axis.
    pub fn k(&self, t: f64) -> f64 {
        match &self.symbolic {
            Symbolic::Couple(p) => p.k_real(t),
            Symbolic::Unit => 1.0,
        }
    }

    /// `Φ(z)` for `Im z ≥ 0`.
    pub fn phi(&self, z: Complex64) -> Result<Complex64> {
        if z.im < 0.0 {
            return Err(Error::Branch(format!("Phi needs Im z >= 0, got {z}")));
        }
        if self.is_unit() || z.norm() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if z.im >= GRID_MIN_SLOPE * z.norm() {
            Ok(self.phi_grid(z))
        } else {
            self.phi_adaptive(z)
        }
    }

    /// Sums the cached grid; accurate away from the real axis.
    pub fn phi_grid(&self, z: Complex64) -> Complex64 {
        let z2 = z * z;
        let mut acc = Complex64::new(0.0, 0.0);
        for ((t, w), g) in self.nodes.iter().zip(&self.weights).zip(&self.log_k) {
            acc += w * g / (t * t - z2);
        }
        z / (PI * I) * acc
    }

    /// Adaptive quadrature of the subtracted integrand, valid up to and on the
    /// real axis.
    pub fn phi_adaptive(&self, z: Complex64) -> Result<Complex64> {
        let c = z.re.abs();
        let gc = self.symbolic.log_k(c);
        let z2 = z * z;
        let f = |t: f64| {
            let d = t * t - z2;
            if d.norm() == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                (self.symbolic.log_k(t) - gc) / d
            }
        };
        // Φ carries a factor z, so the integral only needs tol/|z|.
        let zn = z.norm();
        let spec = QuadratureSpec { abs_tol: self.spec.abs_tol / zn, ..self.spec };
        let mut total = Complex64::new(0.0, 0.0);
        let mut error = 0.0;
        let mid = 2.0 * c + 1.0;
        let pieces = [(0.0, c), (c, mid), (mid, f64::INFINITY)];
        for (lo, hi) in pieces {
            if hi <= lo {
                continue;
            }
            let est = match adaptive_integral(f, lo, hi, &spec) {
                Ok(e) => e,
                // The subtracted integrand has a round-off floor near t = c;
                // accept it when it is harmless for Φ.
                Err(Error::Quadrature { value, error }) if zn * error <= ROUND_OFF_FLOOR => {
                    crate::numerics::Estimate { value, error }
                }
                Err(e) => return Err(e),
            };
            total += est.value;
            error += est.error;
        }
        debug_assert!(zn * error <= ROUND_OFF_FLOOR.max(self.spec.abs_tol * 10.0));
        Ok(z / (PI * I) * total + 0.5 * gc)
    }

    /// `k⁺(z)`, analytic and zero-free for `Im z > 0`.
    pub fn k_plus(&self, z: Complex64) -> Result<Complex64> {
        Ok((-self.phi(z)?).exp())
    }

    /// `k⁻(z) = 1/k⁺(−z)`, analytic and zero-free for `Im z < 0`.
    pub fn k_minus(&self, z: Complex64) -> Result<Complex64> {
        if z.im > 0.0 {
            return Err(Error::Branch(format!("k_minus needs Im z <= 0, got {z}")));
        }
        Ok(self.phi(-z)?.exp())
    }

    /// `k⁺(0)`.
    pub fn k_plus_zero(&self) -> f64 {
        1.0
    }

    /// Largest `|k⁻/k⁺ − k|/k` over real sample points.
    pub fn identity_residue(&self, ts: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &t in ts {
            let z = Complex64::new(t, 0.0);
            let k = self.k(t);
            worst = worst.max((self.k_minus(z)? / self.k_plus(z)? - k).norm() / k);
        }
        Ok(worst)
    }
}

/// `ξ₊^{1/2}`: analytic for `Im ξ > 0`, cut along the negative imaginary axis.
pub fn sqrt_plus(z: Complex64) -> Complex64 {
    let mut a = z.arg();
    if a < -0.5 * PI {
        a += 2.0 * PI;
    }
    Complex64::from_polar(z.norm().sqrt(), 0.5 * a)
}

/// `ξ₋^{1/2}`: analytic for `Im ξ < 0`, cut along the positive imaginary axis.
pub fn sqrt_minus(z: Complex64) -> Complex64 {
    let mut a = z.arg();
    if a > 0.5 * PI {
        a -= 2.0 * PI;
    }
    Complex64::from_polar(z.norm().sqrt(), 0.5 * a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn origin_values() {
        let p = KernelParams::new(0.3, 0.5, 0.6).unwrap();
        let v = kernel_eval(c(0.0, 0.0), &p).unwrap();
        assert!((v.chi - 1.0).norm() < 1e-15);
        assert!((v.alpha - 2f64.sqrt()).norm() < 1e-15);
        assert!(v.beta.norm() < 1e-15);
        assert!((v.psi - 2.0 * (1.0 - 0.09f64).sqrt()).norm() < 1e-15);
        assert_eq!(p.k_real(0.0), 1.0);
    }

    #[test]
    fn static_collapse() {
        let p = KernelParams::new(0.0, 0.2, 0.6).unwrap();
        for x in [-3.0, -0.1, 0.5, 7.0] {
            let v = kernel_eval(c(x, 0.0), &p).unwrap();
            assert!((v.chi - 1.0).norm() < 1e-14);
            assert!((v.alpha.re - (2.0 + x * x).sqrt()).abs() < 1e-13);
            assert!((v.beta.re - x.abs()).abs() < 1e-13);
        }
    }

    #[test]
    fn real_forms_agree() {
        let p = KernelParams::new(0.3, 0.5, 0.6).unwrap();
        for x in [1e-6, 0.01, 0.4, 1.0, 3.0, 50.0, 1e4] {
            let v = kernel_eval(c(x, 0.0), &p).unwrap();
            let sym = p.symbol(c(x, 0.0), None);
            let kc = p.k_continued(&sym, c(x, 0.0));
            assert!((v.k.re - p.k_real(x)).abs() < 1e-12, "{x}");
            assert!(v.k.im.abs() < 1e-14);
            assert!((kc - p.k_real(x)).norm() < 1e-12);
            assert!((p.k_real(-x) - p.k_real(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn tends_to_one() {
        let p = KernelParams::new(0.3, 0.5, 0.6).unwrap();
        assert!((p.k_real(1e3) - 1.0).abs() <= 1e-2);
        assert!((p.k_real(1e8) - 1.0).abs() <= 1e-7);
    }

    #[test]
    fn pole_at_zeta() {
        let p = KernelParams::new(0.3, 0.5, 0.6).unwrap();
        let z = p.zeta();
        assert!((z - material::zeta(0.5, 0.6, 0.3).unwrap()).abs() < 1e-12);
        assert!(matches!(kernel_eval(c(0.0, z), &p), Err(Error::Pole(_))));
        assert!(matches!(kernel_eval(c(0.0, -z), &p), Err(Error::Pole(_))));
    }

    #[test]
    fn rejects_super_rayleigh() {
        let e = KernelParams::new(0.6, -0.9, 0.707).unwrap_err();
        assert!(e.is_regime());
        assert!(KernelParams::new(1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn factorization_identity() {
        let p = KernelParams::new(0.3, 0.5, 0.6).unwrap();
        let f = factorize(&p, 1e-13).unwrap();
        for x in [-20.0, -1.0, -0.05, 0.02, 0.7, 3.0, 150.0] {
            let z = c(x, 0.0);
            let r = f.k_minus(z).unwrap() / f.k_plus(z).unwrap();
            assert!((r.re / p.k_real(x) - 1.0).abs() < 1e-12);
            assert!(r.im.abs() < 1e-12);
        }
    }

    #[test]
    fn grid_matches_adaptive() {
        let p = KernelParams::new(0.6, 0.9, 0.8).unwrap();
        let f = factorize(&p, 1e-14).unwrap();
        for z in [c(0.3, 0.2), c(-2.0, 1.0), c(0.0, 5.0), c(40.0, 9.0), c(1e-3, 1e-3)] {
            let a = f.phi_grid(z);
            let b = f.phi_adaptive(z).unwrap();
            assert!((a - b).norm() < 1e-10, "{z}: {a} vs {b}");
        }
    }

    #[test]
    fn unit_kernel() {
        let f = FactorizedKernel::unit();
        for z in [c(0.3, 0.2), c(-1.0, 0.0), c(0.0, 4.0)] {
            assert_eq!(f.k_plus(z).unwrap(), c(1.0, 0.0));
            assert_eq!(f.k_minus(-z).unwrap(), c(1.0, 0.0));
        }
    }

    #[test]
    fn half_powers() {
        let s = sqrt_plus(c(0.0, -1.0));
        assert!((s - Complex64::from_polar(1.0, -0.25 * PI)).norm() < 1e-15);
        for x in [0.3, 4.0] {
            assert!((sqrt_plus(c(x, 0.0)) - x.sqrt()).norm() < 1e-15);
            assert!((sqrt_minus(c(x, 0.0)) - x.sqrt()).norm() < 1e-15);
            let prod = sqrt_plus(c(-x, 0.0)) * sqrt_minus(c(-x, 0.0));
            assert!((prod - x).norm() < 1e-14);
        }
    }
}
