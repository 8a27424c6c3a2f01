//! Steady-state Mode III crack propagating in a couple-stress elastic
//! solid: surface-wave dispersion, Wiener-Hopf factorization, crack-line
//! fields and the dynamic energy release rate.

pub mod classical_oracle;
pub mod dispersion;
pub mod energy;
pub mod error;
pub mod fields;
pub mod kernel;
pub mod loading;
pub mod material;
pub mod numerics;

pub use classical_oracle::ClassicalSolution;
pub use dispersion::{Axis, DispersionCurve, DispersionPoint};
pub use energy::ErrResult;
pub use error::{Error, Result};
pub use fields::{FieldKind, FieldProfile, FieldSolver, LineStresses, NearTipCoefficients, TotalShearMax};
pub use kernel::{FactorizedKernel, KernelParams, KernelValues};
pub use loading::{LoadProfile, SplitData};
pub use material::{Material, PropagationState, Regime};
pub use num_complex::Complex64;
