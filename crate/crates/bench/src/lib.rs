//! Fixtures shared by the pipeline benchmarks.

use std::sync::Arc;

use crackwave_core::energy::build_split;
use crackwave_core::{FieldSolver, KernelParams, LoadProfile, Material, SplitData};

/// Reference state used across benchmarks: `(η, h₀, m, p, L/ℓ)`.
pub const CASES: [(f64, f64, f64, u32, f64); 3] =
    [(-0.9, 0.707, 0.3, 1, 10.0), (0.0, 0.707, 0.3, 1, 10.0), (0.9, 0.01, 0.3, 0, 0.5)];

pub fn label(case: &(f64, f64, f64, u32, f64)) -> String {
    format!("eta={}_h0={}_p={}_L={}", case.0, case.1, case.3, case.4)
}

pub fn params(case: &(f64, f64, f64, u32, f64)) -> KernelParams {
    KernelParams::new(case.2, case.0, case.1).expect("valid bench case")
}

pub fn split(case: &(f64, f64, f64, u32, f64)) -> (Material, SplitData) {
    let mat = Material::normalized(case.0, case.1).expect("valid bench case");
    let prof = LoadProfile::new(1.0, case.4, case.3).expect("valid bench case");
    let s = build_split(&mat, case.2, prof).expect("valid bench case");
    (mat, s)
}

pub fn solver(case: &(f64, f64, f64, u32, f64)) -> FieldSolver {
    let (mat, s) = split(case);
    FieldSolver::new(&mat, Arc::new(s)).expect("valid bench case")
}
