//! Quadrature, contour coefficients and root finding shared by the solver.
//!
//! All routines are deterministic: identical inputs give bit-identical
//! outputs.

use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerances and limits for the integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Length of the non-oscillatory head in [`oscillatory_halfline`].
    pub truncation_radius: f64,
    /// Minimum number of series terms before the accelerated sum is trusted.
    pub tail_order: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            truncation_radius: 0.0,
            tail_order: 8,
        }
    }
}

impl QuadratureSpec {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        QuadratureSpec { abs_tol, rel_tol, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Domain("quadrature tolerances must be positive".into()));
        }
        if self.truncation_radius < 0.0 {
            return Err(Error::Domain("truncation radius must be non-negative".into()));
        }
        Ok(())
    }
}

/// A quadrature result with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

// 15-point Kronrod extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kron += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]`.
///
/// `b` may be `f64::INFINITY`, in which case the half line is mapped onto a
/// finite interval. Integrable endpoint singularities are fine because the
/// rule never samples the endpoints.
pub fn adaptive_integral<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> Complex64,
{
    spec.validate()?;
    if b.is_infinite() {
        if b < 0.0 || !a.is_finite() {
            return Err(Error::Domain("only [a, +inf) is supported".into()));
        }
        let g = move |u: f64| {
            let one_minus = 1.0 - u;
            f(a + u / one_minus) / (one_minus * one_minus)
        };
        return adaptive_finite(g, 0.0, 1.0, spec);
    }
    adaptive_finite(f, a, b, spec)
}

struct Part {
    lo: f64,
    hi: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Part {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}

impl Eq for Part {}

impl PartialOrd for Part {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Part {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn adaptive_finite<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> Complex64,
{
    if a == b {
        return Ok(Estimate { value: Complex64::new(0.0, 0.0), error: 0.0 });
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut parts = BinaryHeap::new();
    parts.push(Part { lo: a, hi: b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    let mut splits = 0;
    loop {
        if err <= spec.abs_tol.max(spec.rel_tol * total.norm()) {
            break;
        }
        if splits >= spec.max_subdivisions {
            return Err(Error::Quadrature { value: total, error: err });
        }
        let worst = parts.pop().expect("at least one part");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Interval cannot be split further in floating point.
            return Err(Error::Quadrature { value: total, error: err });
        }
        let (v1, e1) = gk15(&mut f, worst.lo, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.hi);
        parts.push(Part { lo: worst.lo, hi: mid, value: v1, error: e1 });
        parts.push(Part { lo: mid, hi: worst.hi, value: v2, error: e2 });
        splits += 1;
        if splits % 64 == 0 {
            // Re-summing avoids drift from repeated subtraction.
            total = parts.iter().map(|p| p.value).sum();
            err = parts.iter().map(|p| p.error).sum();
        } else {
            total += v1 + v2 - worst.value;
            err += e1 + e2 - worst.error;
        }
    }
    total = parts.iter().map(|p| p.value).sum();
    err = parts.iter().map(|p| p.error).sum();
    Ok(Estimate { value: total, error: err })
}

/// `∫₀^∞ f(t) e^{-i·freq·t} dt` for smooth, algebraically decaying `f`.
///
/// The head `[0, truncation_radius]` is integrated directly; beyond it the
/// line is cut at half periods and the partial sums are accelerated with
/// Wynn's epsilon algorithm.
pub fn oscillatory_halfline<F>(mut f: F, freq: f64, spec: &QuadratureSpec) -> Result<Estimate>
where
    F: FnMut(f64) -> Complex64,
{
    spec.validate()?;
    if freq == 0.0 {
        return adaptive_integral(f, 0.0, f64::INFINITY, spec);
    }
    let w = freq;
    let mut g = move |t: f64| f(t) * Complex64::from_polar(1.0, -w * t);
    let head_end = spec.truncation_radius;
    let head = adaptive_integral(&mut g, 0.0, head_end, spec)?;
    let step = PI / freq.abs();

    let max_terms = 200.max(4 * spec.tail_order);
    let mut partial = Vec::with_capacity(max_terms);
    let mut sum = head.value;
    let mut piece_err = head.error;
    let mut previous: Option<Complex64> = None;
    for k in 0..max_terms {
        let lo = head_end + k as f64 * step;
        let piece = adaptive_integral(&mut g, lo, lo + step, spec)?;
        sum += piece.value;
        piece_err += piece.error;
        partial.push(sum);
        if partial.len() < spec.tail_order.max(3) {
            continue;
        }
        let est = wynn_epsilon(&partial);
        if let Some(prev) = previous {
            let diff = (est - prev).norm();
            let tol = spec.abs_tol.max(spec.rel_tol * est.norm());
            if diff <= tol {
                return Ok(Estimate { value: est, error: diff + piece_err });
            }
        }
        previous = Some(est);
    }
    Err(Error::Acceleration { terms: max_terms })
}

/// Wynn's epsilon extrapolation of a sequence of partial sums.
///
/// Returns the entry of highest even order in the last complete diagonal.
pub fn wynn_epsilon(sums: &[Complex64]) -> Complex64 {
    let n = sums.len();
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    // e[k] holds column k of the table for the current diagonal.
    let mut prev_col: Vec<Complex64> = sums.to_vec();
    let mut prev_prev: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut best = sums[n - 1];
    let mut order = 0;
    while prev_col.len() > 1 {
        let mut next = Vec::with_capacity(prev_col.len() - 1);
        for j in 0..prev_col.len() - 1 {
            let d = prev_col[j + 1] - prev_col[j];
            if d.norm() == 0.0 {
                return best;
            }
            next.push(prev_prev[j + 1] + d.inv());
        }
        order += 1;
        if order % 2 == 0 {
            let candidate = next[next.len() - 1];
            if candidate.re.is_finite() && candidate.im.is_finite() {
                best = candidate;
            } else {
                return best;
            }
        }
        prev_prev = prev_col;
        prev_col = next;
    }
    best
}

/// Number of trapezoid points on the circle in [`contour_coefficients`].
pub const CONTOUR_POINTS: usize = 256;

fn trapezoid_coefficients<G>(g: &G, center: Complex64, radius: f64, count: usize) -> Vec<Complex64>
where
    G: Fn(Complex64) -> Complex64,
{
    let n = CONTOUR_POINTS;
    let samples: Vec<(f64, Complex64)> = (0..n)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n as f64;
            (theta, g(center + Complex64::from_polar(radius, theta)))
        })
        .collect();
    (0..count)
        .map(|j| {
            let s: Complex64 = samples
                .iter()
                .map(|(theta, v)| v * Complex64::from_polar(1.0, -(j as f64) * theta))
                .sum();
            s / (n as f64 * radius.powi(j as i32))
        })
        .collect()
}

/// First `count` Taylor coefficients of `g` about `center`, by the trapezoid
/// rule on the circle of the given radius.
///
/// The computation is repeated at half the radius; a disagreement in the
/// terms `a_j (r/2)^j` larger than `1e-8` of their scale means `g` is not
/// analytic on the disc.
pub fn contour_coefficients<G>(
    g: G,
    center: Complex64,
    radius: f64,
    count: usize,
) -> Result<Vec<Complex64>>
where
    G: Fn(Complex64) -> Complex64,
{
    if !(radius > 0.0) {
        return Err(Error::Domain("contour radius must be positive".into()));
    }
    let full = trapezoid_coefficients(&g, center, radius, count);
    let half = trapezoid_coefficients(&g, center, 0.5 * radius, count);
    // Round-off in coefficient j grows like (r/2)^{-j}, so compare the
    // terms a_j (r/2)^j rather than the raw coefficients.
    let r = 0.5 * radius;
    let scale = full
        .iter()
        .enumerate()
        .map(|(j, c)| c.norm() * r.powi(j as i32))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let change = full
        .iter()
        .zip(&half)
        .enumerate()
        .map(|(j, (a, b))| (a - b).norm() * r.powi(j as i32))
        .fold(0.0, f64::max);
    if change > 1e-8 * scale {
        return Err(Error::Analyticity { change });
    }
    Ok(full)
}

/// Root of `f` in `[lo, hi]` to absolute tolerance `tol`.
///
/// Every iteration bisects, so convergence is guaranteed; a secant probe is
/// tried first and returns immediately when it lands on an exact zero.
pub fn bracketed_root<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoBracket { lo: a, hi: b });
    }
    for _ in 0..400 {
        if b - a <= tol {
            break;
        }
        let xs = b - fb * (b - a) / (fb - fa);
        if xs > a && xs < b {
            let fs = f(xs);
            if fs == 0.0 {
                return Ok(xs);
            }
            if fs.signum() == fa.signum() {
                a = xs;
                fa = fs;
            } else {
                b = xs;
                fb = fs;
            }
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
    }
    Ok(0.5 * (a + b))
}

/// First sign change of `f` on `n` uniform steps from `lo` to `hi`.
pub fn scan_sign_change<F>(mut f: F, lo: f64, hi: f64, n: usize) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let mut x0 = lo;
    let mut f0 = f(lo);
    for i in 1..=n {
        let x1 = lo + (hi - lo) * i as f64 / n as f64;
        let f1 = f(x1);
        if f0 == 0.0 || f0.signum() != f1.signum() || f1 == 0.0 {
            return Some((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    None
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `Γ(1/2 − j)` through the reflection identity, avoiding the poles and
/// sign changes of a direct evaluation.
pub fn gamma_half_minus(j: u32) -> f64 {
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    sign * PI / statrs::function::gamma::gamma(j as f64 + 0.5)
}

/// `n!` as a float.
pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}
