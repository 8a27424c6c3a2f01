//! Crack-line fields by Fourier inversion.
//!
//! Every field has the form `f(X) = 2c·Re ∫₀^∞ Q(ξ) e^{−iXξ/ℓ} dξ` after
//! folding the real line with conjugate symmetry. The half-line integral is
//! rotated onto a ray `ξ = t·e^{∓iθ}` in the half-plane where the exponential
//! decays (down for `X > 0`, up for `X < 0`), which turns the slowly decaying
//! oscillatory integrand into an exponentially damped one. `θ` stays below
//! half the angle of the nearest singularity of the symbol, so the sector
//! swept by the rotation is analytic.
//!
//! The integrand is tabulated once on the ray; each `X` is then a weighted sum.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::kernel::{sqrt_minus, sqrt_plus, FactorizedKernel, KernelParams};
use crate::loading::SplitData;
use crate::material::Material;
use crate::numerics::gauss_legendre;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest ray angle.
pub const MAX_RAY_ANGLE: f64 = PI / 6.0;
/// Rays closer than this to a singularity are refused.
const MIN_RAY_ANGLE: f64 = PI / 180.0;

// Ray table layout.
const TABLE_HEAD: f64 = 1e-10;
const TABLE_END: f64 = 1e9;
const TABLE_RATIO: f64 = 1.5;
const TABLE_ORDER: usize = 16;
/// Nodes with damping exponent `X·Im(ξ)` beyond this are dropped.
const DAMPING_CUTOFF: f64 = 50.0;
/// Largest damping or phase change across one Gauss panel.
const PANEL_SPREAD: f64 = 4.0;

/// Tip-zone cutoff for the total-shear maximum, in units of `ℓ`.
pub const TIP_WINDOW: f64 = 1e-3;
/// Default number of points of a field grid.
pub const DEFAULT_GRID_POINTS: usize = 400;
/// Fit window for the opening behind the tip, `|X|/ℓ`.
pub const FIT_WINDOW_BEHIND: (f64, f64) = (1e-5, 1e-3);
/// Fit window for the stresses ahead of the tip, `X/ℓ`. Kept close to the
/// tip because `μ₂₂` carries a constant next to its `X^{−1/2}` term.
pub const FIT_WINDOW_AHEAD: (f64, f64) = (1e-7, 1e-5);
const FIT_POINTS: usize = 21;

/// Crack-line quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    /// Crack opening `w(X)`, `X < 0`.
    Opening,
    /// Reduced traction `p₃(X)`, `X > 0`.
    Traction,
    SigmaShear,
    TauShear,
    CoupleStress,
    /// `t₂₃ = σ₂₃ + τ₂₃`.
    TotalShear,
}

impl FieldKind {
    pub const ALL: [FieldKind; 6] = [
        FieldKind::Opening,
        FieldKind::Traction,
        FieldKind::SigmaShear,
        FieldKind::TauShear,
        FieldKind::CoupleStress,
        FieldKind::TotalShear,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Opening => "w",
            FieldKind::Traction => "p3",
            FieldKind::SigmaShear => "sigma23",
            FieldKind::TauShear => "tau23",
            FieldKind::CoupleStress => "mu22",
            FieldKind::TotalShear => "t23",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        FieldKind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Whether the field lives behind the tip (`X < 0`).
    pub fn behind_tip(self) -> bool {
        self == FieldKind::Opening
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldProfile {
    pub kind: FieldKind,
    pub x_grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// Stresses on the line ahead of the tip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineStresses {
    pub sigma23: f64,
    pub tau23: f64,
    pub mu22: f64,
    pub t23: f64,
}

/// Leading near-tip terms: `w ≈ C_w(−X)^{3/2}`, `t₂₃ ≈ C_t X^{−3/2}`,
/// `μ₂₂ ≈ C_mu X^{−1/2}` and `p₃ ≈ C_p X^{−3/2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearTipCoefficients {
    pub c_w: f64,
    pub c_t: f64,
    pub c_mu: f64,
    pub c_p: f64,
}

/// A fitted power law next to its closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    pub slope: f64,
    /// Prefactor fitted with the exponent held at `expected_slope`.
    pub prefactor: f64,
    pub expected_slope: f64,
    pub expected_prefactor: f64,
}

impl PowerFit {
    pub fn slope_error(&self) -> f64 {
        (self.slope - self.expected_slope).abs()
    }

    pub fn prefactor_error(&self) -> f64 {
        (self.prefactor / self.expected_prefactor - 1.0).abs()
    }
}

/// Near-tip fits of `w`, `t₂₃` and `μ₂₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearTipFit {
    pub w: PowerFit,
    pub t23: PowerFit,
    pub mu22: PowerFit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalShearMax {
    pub t23max: f64,
    pub x_at: f64,
}

/// Nodes and tabulated integrands on one ray.
#[derive(Debug, Clone)]
struct RayTable {
    /// Points `ξ` on the ray, by increasing modulus.
    xi: Vec<Complex64>,
    /// Quadrature weight times `dξ/dt`.
    weight: Vec<Complex64>,
    /// Integrands, one vector per tabulated quantity.
    values: Vec<Vec<Complex64>>,
}

impl RayTable {
    fn sum(&self, column: usize, x: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let values = &self.values[column];
        for ((xi, w), q) in self.xi.iter().zip(&self.weight).zip(values) {
            let arg = -I * x * xi;
            if arg.re < -DAMPING_CUTOFF {
                break;
            }
            acc += w * q * arg.exp();
        }
        acc
    }
}

// Columns of the lower table.
const COL_CORE: usize = 0;
const COL_SIGMA: usize = 1;
const COL_TAU: usize = 2;
const COL_MU: usize = 3;
const COL_P3: usize = 4;

/// Field evaluator for one material, speed and load.
#[derive(Debug, Clone)]
pub struct FieldSolver {
    pub split: Arc<SplitData>,
    pub params: KernelParams,
    pub g: f64,
    theta: f64,
    lower: RayTable,
    upper: RayTable,
}

impl FieldSolver {
    pub fn new(material: &Material, split: Arc<SplitData>) -> Result<Self> {
        let params = *split
            .kernel
            .params()
            .ok_or_else(|| Error::Domain("fields need a couple-stress kernel".into()))?;
        if (params.eta - material.eta).abs() > 0.0 || (params.h0 - material.h0).abs() > 0.0 {
            return Err(Error::Domain("kernel and material disagree".into()));
        }
        if (split.ell - material.ell).abs() > 1e-14 * material.ell {
            return Err(Error::Domain("split and material use different ell".into()));
        }
        let theta = ray_angle(&params)?;
        let lower = build_lower(&split, &params, theta)?;
        let upper = build_upper(&split, &params, theta)?;
        Ok(FieldSolver { split, params, g: material.g, theta, lower, upper })
    }

    /// The ray angle in radians.
    pub fn ray_angle(&self) -> f64 {
        self.theta
    }

    fn ell(&self) -> f64 {
        self.split.ell
    }

    fn t0(&self) -> f64 {
        self.split.profile.t0
    }

    /// `2·Re` of the ray integral of one column, at dimensionless `x`.
    fn folded(&self, table: &RayTable, column: usize, x: f64) -> f64 {
        2.0 * table.sum(column, x).re
    }

    /// `w(X)`. For `X > 0` the same integral evaluates the opening ahead of
    /// the tip, which must vanish.
    pub fn crack_opening(&self, x: f64) -> Result<f64> {
        if x == 0.0 || !x.is_finite() {
            return Err(Error::Domain(format!("opening needs X != 0, got {x}")));
        }
        let c = self.t0() / (PI * self.g);
        let xt = x / self.ell();
        Ok(if xt < 0.0 {
            c * self.folded(&self.upper, 0, xt)
        } else {
            c * self.folded(&self.lower, COL_CORE, xt)
        })
    }

    /// `p₃(X)` for `X > 0`.
    pub fn traction_ahead(&self, x: f64) -> Result<f64> {
        let xt = self.ahead(x)?;
        Ok(self.t0() / (2.0 * PI * self.ell()) * self.folded(&self.lower, COL_P3, xt))
    }

    fn ahead(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Domain(format!("field ahead of the tip needs X > 0, got {x}")));
        }
        Ok(x / self.ell())
    }

    /// `σ₂₃, τ₂₃, μ₂₂` and `t₂₃` at `X > 0`.
    pub fn stresses_on_line(&self, x: f64) -> Result<LineStresses> {
        let xt = self.ahead(x)?;
        let (t0, ell, eta) = (self.t0(), self.ell(), self.params.eta);
        let sigma23 = -t0 / (PI * ell) * self.folded(&self.lower, COL_SIGMA, xt);
        let tau23 = -t0 / (2.0 * PI * ell) * self.folded(&self.lower, COL_TAU, xt);
        let mu22 = -t0 * (1.0 + eta) / PI * self.folded(&self.lower, COL_MU, xt);
        Ok(LineStresses { sigma23, tau23, mu22, t23: sigma23 + tau23 })
    }

    pub fn field(&self, kind: FieldKind, x: f64) -> Result<f64> {
        match kind {
            FieldKind::Opening => {
                if !(x < 0.0) {
                    return Err(Error::Domain(format!("opening is defined for X < 0, got {x}")));
                }
                self.crack_opening(x)
            }
            FieldKind::Traction => self.traction_ahead(x),
            FieldKind::SigmaShear => Ok(self.stresses_on_line(x)?.sigma23),
            FieldKind::TauShear => Ok(self.stresses_on_line(x)?.tau23),
            FieldKind::CoupleStress => Ok(self.stresses_on_line(x)?.mu22),
            FieldKind::TotalShear => Ok(self.stresses_on_line(x)?.t23),
        }
    }

    /// Evaluates `kind` on a grid, in parallel.
    pub fn profile(&self, kind: FieldKind, x_grid: &[f64]) -> Result<FieldProfile> {
        let values = x_grid.par_iter().map(|&x| self.field(kind, x)).collect::<Result<Vec<_>>>()?;
        Ok(FieldProfile { kind, x_grid: x_grid.to_vec(), values })
    }

    /// Closed-form near-tip coefficients.
    pub fn neartip_coefficients(&self) -> Result<NearTipCoefficients> {
        let p = &self.params;
        let (f, t0, ell, g) = (self.split.f, self.t0(), self.ell(), self.g);
        let (eta, u) = (p.eta, p.upsilon());
        let hm2 = p.h0 * p.h0 * p.m * p.m;
        let sqrt_pi = PI.sqrt();
        let il = I * ell;
        let c_w = -8.0 * f * t0 * il.powf(-1.5) / (3.0 * sqrt_pi * g * u);
        let c_t = -f * t0 * (1.0 + eta - 2.0 * hm2) * il.sqrt() / (2.0 * sqrt_pi * u);
        let c_mu = 2.0 * f * t0 * (p.q() - eta) * (1.0 + eta) * il.sqrt() / (sqrt_pi * u * (1.0 + p.q()));
        let c_p = -t0 * f * il.sqrt() / (2.0 * sqrt_pi);
        Ok(NearTipCoefficients { c_w: real(c_w)?, c_t: real(c_t)?, c_mu: real(c_mu)?, c_p: real(c_p)? })
    }

    /// Fits `w`, `t₂₃` and `μ₂₂` near the tip: slopes by a free log-log fit,
    /// prefactors with the exponent fixed.
    pub fn fit_near_tip(&self) -> Result<NearTipFit> {
        let c = self.neartip_coefficients()?;
        let ell = self.ell();
        let behind: Vec<f64> = log_grid(FIT_WINDOW_BEHIND.0, FIT_WINDOW_BEHIND.1, FIT_POINTS).iter().map(|x| x * ell).collect();
        let ahead: Vec<f64> = log_grid(FIT_WINDOW_AHEAD.0, FIT_WINDOW_AHEAD.1, FIT_POINTS).iter().map(|x| x * ell).collect();
        let w = behind.iter().map(|&x| self.crack_opening(-x)).collect::<Result<Vec<_>>>()?;
        let lines = ahead.iter().map(|&x| self.stresses_on_line(x)).collect::<Result<Vec<_>>>()?;
        let t: Vec<f64> = lines.iter().map(|v| v.t23).collect();
        let mu: Vec<f64> = lines.iter().map(|v| v.mu22).collect();
        let fit = |x: &[f64], y: &[f64], s: f64, c: f64| PowerFit {
            slope: fit_power_law(x, y).0,
            prefactor: fit_prefactor(x, y, s),
            expected_slope: s,
            expected_prefactor: c,
        };
        Ok(NearTipFit { w: fit(&behind, &w, 1.5, c.c_w), t23: fit(&ahead, &t, -1.5, c.c_t), mu22: fit(&ahead, &mu, -0.5, c.c_mu) })
    }

    /// Coefficient `a` of the far-field decay `p₃ ≈ a X^{−3/2}`.
    pub fn traction_tail(&self) -> Result<f64> {
        let split = &self.split;
        let g0: Complex64 = split.f_coeffs().iter().sum();
        let k0 = split.kernel.k_plus_zero();
        let a = self.t0() * (split.f - g0) * self.ell().sqrt() / (k0 * gamma(-0.5) * I.powf(-0.5));
        real(a)
    }

    /// Finite-part integral of `p₃` over the line ahead of the tip; the
    /// balance condition says it equals `T₀`.
    ///
    /// The `X^{−3/2}` tip term is removed with an `e^{−X/ℓ}` cut-off and
    /// restored through its finite part `Γ(−1/2)ℓ^{−1/2}`. The remainder
    /// behaves like `X^{−1/2}(A + B ln X)` at the tip and like `a X^{−3/2}`
    /// far away; both ends are integrated analytically.
    pub fn traction_balance(&self) -> Result<f64> {
        let ell = self.ell();
        let c_p = self.neartip_coefficients()?.c_p;
        let rem = |x: f64| -> Result<f64> {
            Ok(self.traction_ahead(x)? - c_p * x.powf(-1.5) * (-x / ell).exp())
        };
        let x_lo = 1e-6 * ell;
        let x_hi = 1e4 * ell.max(self.split.profile.l);

        // Tip piece from a fit through two points.
        let (x1, x2) = (0.25 * x_lo, x_lo);
        let (r1, r2) = (rem(x1)? * x1.sqrt(), rem(x2)? * x2.sqrt());
        let b = (r2 - r1) / (x2.ln() - x1.ln());
        let a = r1 - b * x1.ln();
        let head = 2.0 * x_lo.sqrt() * (a + b * (x_lo.ln() - 2.0));

        // Body on log-spaced Gauss panels.
        let (gx, gw) = gauss_legendre(16);
        let (y_lo, y_hi) = (x_lo.ln(), x_hi.ln());
        let panels = ((y_hi - y_lo) / (0.25 * std::f64::consts::LN_10)).ceil() as usize;
        let dy = (y_hi - y_lo) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * 16);
        for k in 0..panels {
            let c = y_lo + (k as f64 + 0.5) * dy;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push((c + 0.5 * dy * x, 0.5 * dy * w));
            }
        }
        let body = nodes
            .par_iter()
            .map(|&(y, w)| {
                let x = y.exp();
                Ok(w * x * rem(x)?)
            })
            .collect::<Result<Vec<f64>>>()?
            .iter()
            .sum::<f64>();

        let tail = 2.0 * self.traction_tail()? / x_hi.sqrt();
        Ok(head + body + tail + c_p * gamma(-0.5) / ell.sqrt())
    }

    /// Maximum of `t₂₃` over `[x_min, x_max]`: a log-grid scan refined by
    /// golden-section search.
    pub fn max_total_shear(&self, x_min: f64, x_max: f64) -> Result<TotalShearMax> {
        if !(x_min > 0.0 && x_max > x_min) {
            return Err(Error::Domain(format!("degenerate window [{x_min}, {x_max}]")));
        }
        let grid = log_grid(x_min, x_max, 200);
        let values = self.profile(FieldKind::TotalShear, &grid)?.values;
        let (best, _) = values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let lo = grid[best.saturating_sub(1)].ln();
        let hi = grid[(best + 1).min(grid.len() - 1)].ln();
        let f = |y: f64| self.field(FieldKind::TotalShear, y.exp());
        let (y, v) = golden_max(f, lo, hi, 1e-10)?;
        let (x_at, t23max) = if v >= values[best] { (y.exp(), v) } else { (grid[best], values[best]) };
        Ok(TotalShearMax { t23max, x_at })
    }

    /// `max t₂₃` over the default window `[10⁻³ℓ, 100·max(L, ℓ)]`.
    pub fn max_total_shear_default(&self) -> Result<TotalShearMax> {
        let ell = self.ell();
        self.max_total_shear(TIP_WINDOW * ell, 100.0 * ell.max(self.split.profile.l))
    }

    /// Largest `|Q(−x) − conj Q(x)|/|Q(x)|` of the unfolded opening
    /// integrand over real sample points: the symmetry that makes the
    /// folded inversion real.
    pub fn conjugate_symmetry_residue(&self, samples: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &x in samples {
            let a = self.opening_integrand_real(x)?;
            let b = self.opening_integrand_real(-x)?;
            worst = worst.max((b - a.conj()).norm() / a.norm());
        }
        Ok(worst)
    }

    /// Unfolded opening integrand on the real axis, built from the
    /// real-line definitions rather than from the ray continuation.
    pub fn opening_integrand_real(&self, x: f64) -> Result<Complex64> {
        let z = Complex64::new(x, 0.0);
        let km = self.split.kernel.k_minus(z)?;
        Ok((self.split.g_minus_xi(z) - self.split.f) / (sqrt_minus(z) * self.params.psi(z) * km))
    }
}

fn real(z: Complex64) -> Result<f64> {
    if z.im.abs() > 1e-10 * z.norm() {
        return Err(Error::NotReal(z));
    }
    Ok(z.re)
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
fn golden_max<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol * (1.0 + a.abs()) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// `n` points from `lo` to `hi`, evenly spaced in `log x`. Interpolating in
/// base 10 keeps whole decades exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == n {
                hi
            } else {
                10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)
            }
        })
        .collect()
}

/// Least-squares fit of `ln|y| = s·ln|x| + ln|c|`; returns `(s, c)` with the
/// sign of `c` taken from the data.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.abs().ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    let sign = y.iter().map(|v| v.signum()).sum::<f64>().signum();
    (slope, sign * (my - slope * mx).exp())
}

/// Prefactor `c` of `y ≈ c|x|^s` with the exponent held fixed: the mean of
/// `y|x|^{−s}`.
pub fn fit_prefactor(x: &[f64], y: &[f64], exponent: f64) -> f64 {
    x.iter().zip(y).map(|(a, b)| b * a.abs().powf(-exponent)).sum::<f64>() / x.len() as f64
}

/// Roots of the polynomial with coefficients `c[0] + c[1]z + …` by
/// Durand-Kerner iteration.
fn poly_roots(c: &[f64]) -> Vec<Complex64> {
    let scale = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut deg = c.len() - 1;
    while deg > 0 && c[deg].abs() <= 1e-14 * scale {
        deg -= 1;
    }
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let monic: Vec<f64> = c[..=deg].iter().map(|v| v / lead).collect();
    let eval = |z: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, v| acc * z + v);
    let radius = 1.0 + monic[..deg].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut roots: Vec<Complex64> =
        (0..deg).map(|k| Complex64::from_polar(radius, 0.4 + 2.0 * PI * k as f64 / deg as f64)).collect();
    for _ in 0..500 {
        let mut moved: f64 = 0.0;
        for i in 0..deg {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    den *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / den;
            roots[i] -= step;
            moved = moved.max(step.norm() / (1.0 + roots[i].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    roots
}

/// Angle from the positive real axis of the nearest genuine singularity of
/// the symbol (zeros of `N` and of `T`), halved and capped at
/// [`MAX_RAY_ANGLE`].
pub fn ray_angle(params: &KernelParams) -> Result<f64> {
    let (q, eta, nu) = (params.q(), params.eta, params.nu());
    let (m, h0) = (params.m, params.h0);
    let nu2 = nu * nu;
    let b = 1.0 + q * q + 2.0 * eta;
    let d = eta * eta - q * q;
    // N = 0 after squaring away S, in z = ξ².
    let n_poly = [
        8.0 * nu2,
        8.0 * nu2 * b + 4.0 * q * q - 4.0 * nu2 * nu2,
        2.0 * nu2 * b * b + 4.0 * q * q * b + 4.0 * d * nu2,
        q * q * b * b - d * d,
    ];
    // χ² = 0 contains the zeros of T².
    let hm2 = h0 * h0 * m * m;
    let t_poly = [1.0, 2.0 * (1.0 - h0 * h0) * m * m, hm2 * hm2];
    let mut min_angle = 0.5 * PI;
    for (poly, is_n) in [(&n_poly[..], true), (&t_poly[..], false)] {
        for z in poly_roots(poly) {
            let xi = z.sqrt();
            let sym = params.symbol(xi, None);
            let (value, scale) = if is_n {
                (sym.n, (sym.ab * sym.sum2).norm() + (sym.ab * sym.ab).norm() + (eta * eta * z * z).norm())
            } else {
                (sym.sum2 + 2.0 * sym.ab, sym.sum2.norm() + (2.0 * sym.ab).norm())
            };
            // Roots introduced by squaring live on another sheet.
            if value.norm() > 1e-6 * scale {
                continue;
            }
            min_angle = min_angle.min(xi.arg().abs());
        }
    }
    let theta = MAX_RAY_ANGLE.min(0.5 * min_angle);
    if theta < MIN_RAY_ANGLE {
        return Err(Error::Regime(format!(
            "a singularity of the symbol lies {:.3e} rad from the real axis",
            min_angle
        )));
    }
    Ok(theta)
}

/// Ray nodes `t` and weights, dense enough that damping and phase change by
/// at most [`PANEL_SPREAD`] across any panel that survives the cutoff.
fn ray_nodes(theta: f64) -> Vec<(f64, f64)> {
    let (gx, gw) = gauss_legendre(TABLE_ORDER);
    let mut out = Vec::new();
    // Head panel in t = u², which absorbs a t^{-1/2} endpoint.
    let uh = TABLE_HEAD.sqrt();
    for (x, w) in gx.iter().zip(&gw) {
        let u = 0.5 * uh * (x + 1.0);
        out.push((u * u, 0.5 * uh * w * 2.0 * u));
    }
    let spread = DAMPING_CUTOFF * (TABLE_RATIO - 1.0) * (1.0 + 1.0 / theta.tan());
    let sub = (spread / PANEL_SPREAD).ceil().max(1.0) as usize;
    let mut a = TABLE_HEAD;
    while a < TABLE_END {
        let b = a * TABLE_RATIO;
        let h = (b - a) / sub as f64;
        for k in 0..sub {
            let c = a + (k as f64 + 0.5) * h;
            for (x, w) in gx.iter().zip(&gw) {
                out.push((c + 0.5 * h * x, 0.5 * h * w));
            }
        }
        a = b;
    }
    out
}

/// Continues `T` along the ray from its value `√2` at the origin.
fn symbols_on_ray(params: &KernelParams, xi: &[Complex64]) -> Vec<crate::kernel::Symbol> {
    let mut hint = Complex64::new(2f64.sqrt(), 0.0);
    xi.iter()
        .map(|&z| {
            let s = params.symbol(z, Some(hint));
            hint = s.t;
            s
        })
        .collect()
}

fn build_lower(split: &SplitData, params: &KernelParams, theta: f64) -> Result<RayTable> {
    let dir = Complex64::from_polar(1.0, -theta);
    let nodes = ray_nodes(theta);
    let xi: Vec<Complex64> = nodes.iter().map(|&(t, _)| dir * t).collect();
    let weight = nodes.iter().map(|&(_, w)| dir * w).collect();
    let syms = symbols_on_ray(params, &xi);
    let kernel: &FactorizedKernel = &split.kernel;
    let (eta, q2, f) = (params.eta, params.q() * params.q(), split.f);
    let rows = xi
        .par_iter()
        .zip(syms.par_iter())
        .map(|(&z, sym)| {
            let km = kernel.k_minus(z)?;
            let gm = split.g_minus_xi(z);
            let x2 = z * z;
            let core = (gm - f) / (sqrt_minus(z) * sym.psi * km);
            let sf = (sym.ab - eta * x2) / sym.t;
            let tf = (sym.ab * sym.ab + (sym.sum2 + sym.ab) * eta * x2 - q2 * x2 * (eta * x2 - sym.ab)) / sym.t;
            let k = params.k_continued(sym, z);
            let p3 = sqrt_plus(z) * k * (f - gm) / km;
            Ok([core, sf * core, tf * core, I * z * sf * core, p3])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![Vec::with_capacity(rows.len()); 5];
    for row in rows {
        for (col, v) in values.iter_mut().zip(row) {
            col.push(v);
        }
    }
    Ok(RayTable { xi, weight, values })
}

fn build_upper(split: &SplitData, params: &KernelParams, theta: f64) -> Result<RayTable> {
    let dir = Complex64::from_polar(1.0, theta);
    let nodes = ray_nodes(theta);
    let xi: Vec<Complex64> = nodes.iter().map(|&(t, _)| dir * t).collect();
    let weight = nodes.iter().map(|&(_, w)| dir * w).collect();
    let syms = symbols_on_ray(params, &xi);
    let f = split.f;
    let column = xi
        .par_iter()
        .zip(syms.par_iter())
        .map(|(&z, sym)| {
            // 1/(Ψk⁻) = ξT/(N k⁺) above the real axis.
            let kp = split.kernel.k_plus(z)?;
            Ok((split.g_minus_xi(z) - f) / sqrt_minus(z) * z * sym.t / (sym.n * kp))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RayTable { xi, weight, values: vec![column] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::factorize;
    use crate::loading::LoadProfile;

    fn solver(m: f64, eta: f64, h0: f64, p: u32, lt: f64) -> FieldSolver {
        let mat = Material::normalized(eta, h0).unwrap();
        let k = factorize(&KernelParams::new(m, eta, h0).unwrap(), 1e-13).unwrap();
        let split = SplitData::new(Arc::new(k), LoadProfile::new(1.0, lt, p).unwrap(), 1.0).unwrap();
        FieldSolver::new(&mat, Arc::new(split)).unwrap()
    }

    #[test]
    fn roots_of_cubic() {
        let r = poly_roots(&[-6.0, 11.0, -6.0, 1.0]);
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        for (a, b) in re.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_is_logarithmic() {
        let g = log_grid(1e-3, 10.0, 5);
        assert_eq!(g.len(), 5);
        assert!((g[1] / g[0] - 10.0).abs() < 1e-12);
        assert_eq!(g[4], 10.0);
    }

    #[test]
    fn power_law_fit() {
        let x = log_grid(1e-3, 1.0, 10);
        let y: Vec<f64> = x.iter().map(|v| -3.0 * v.powf(-1.5)).collect();
        let (s, c) = fit_power_law(&x, &y);
        assert!((s + 1.5).abs() < 1e-12);
        assert!((c + 3.0).abs() < 1e-10);
    }

    #[test]
    fn opening_vanishes_ahead_and_at_tip() {
        let s = solver(0.3, 0.5, 0.6, 1, 2.0);
        let scale = s.crack_opening(-1.0).unwrap().abs();
        for x in [0.1, 1.0, 5.0] {
            assert!(s.crack_opening(x).unwrap().abs() < 1e-8 * scale, "{x}");
        }
        assert!(s.crack_opening(-1e-9).unwrap().abs() < 1e-6 * scale);
    }

    #[test]
    fn near_tip_coefficients_are_real() {
        let s = solver(0.3, 0.5, 0.6, 1, 2.0);
        let c = s.neartip_coefficients().unwrap();
        assert!(c.c_w.is_finite() && c.c_t.is_finite() && c.c_mu.is_finite());
    }
}
