use approx::assert_relative_eq;
use crackwave_core::classical_oracle::{h_coefficients, h_coefficients_contour};
use crackwave_core::energy::{err_classical, err_smalllength_limit_family, evaluate, KERNEL_TOL};
use crackwave_core::fields::{fit_power_law, fit_prefactor, log_grid};
use crackwave_core::kernel::factorize;
use crackwave_core::material::{critical_speed, h0_star, upsilon};
use crackwave_core::{Complex64, KernelParams, LoadProfile, Material};
use proptest::prelude::*;

fn sub_rayleigh() -> impl Strategy<Value = (f64, f64, f64)> {
    (-0.9f64..0.9, 0.01f64..1.0, 0.0f64..0.95).prop_map(|(eta, h0, frac)| {
        let mc = critical_speed(eta, h0).unwrap().min(1.0);
        (eta, h0, frac * mc)
    })
}

proptest! {
    #[test]
    fn kernel_positive_and_normalized((eta, h0, m) in sub_rayleigh(), t in 1e-4f64..1e4) {
        let p = KernelParams::new(m, eta, h0).unwrap();
        prop_assert!(p.k_real(t) > 0.0);
        prop_assert_eq!(p.k_real(0.0), 1.0);
        prop_assert!((p.k_real(1e9) - 1.0).abs() < 1e-6);
        prop_assert_eq!(p.k_real(-t), p.k_real(t));
    }

    #[test]
    fn upsilon_positive_below_critical((eta, h0, m) in sub_rayleigh()) {
        prop_assert!(upsilon(eta, h0, m).unwrap() > 0.0);
    }

    #[test]
    fn log_grid_is_monotone(lo in 1e-8f64..1.0, span in 1.5f64..1e6, n in 2usize..300) {
        let g = log_grid(lo, lo * span, n);
        prop_assert_eq!(g.len(), n);
        prop_assert_eq!(g[0], lo);
        prop_assert_eq!(g[n - 1], lo * span);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn power_fit_recovers_exact_law(s in -1.5f64..1.5, c in 0.1f64..10.0) {
        let x = log_grid(1e-6, 1e-3, 15);
        let y: Vec<f64> = x.iter().map(|v| c * v.powf(s)).collect();
        let (slope, pref) = fit_power_law(&x, &y);
        prop_assert!((slope - s).abs() < 1e-9);
        prop_assert!((pref - c).abs() < 1e-8 * c);
        prop_assert!((fit_prefactor(&x, &y, s) - c).abs() < 1e-10 * c);
    }

    #[test]
    fn smalllength_limit_matches_classical(p in 0u32..6, m in 0.0f64..0.95, l in 0.1f64..50.0) {
        let prof = LoadProfile::new(1.0, l, p).unwrap();
        let a = err_smalllength_limit_family(&prof, m, 1.0).unwrap();
        let b = err_classical(&prof, m, 1.0).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn factorization_reproduces_kernel((eta, h0, m) in sub_rayleigh()) {
        let k = factorize(&KernelParams::new(m, eta, h0).unwrap(), KERNEL_TOL).unwrap();
        let r = k.identity_residue(&log_grid(1e-3, 1e3, 60)).unwrap();
        prop_assert!(r < 1e-8, "residue {r}");
    }

    #[test]
    fn energy_release_rate_positive((eta, h0, m) in sub_rayleigh(), p in 0u32..3) {
        let mat = Material::normalized(eta, h0).unwrap();
        let r = evaluate(&mat, m, LoadProfile::new(1.0, 10.0, p).unwrap()).unwrap();
        prop_assert!(r.e > 0.0 && r.e_cl > 0.0);
        prop_assert!(r.e.is_finite() && (r.ratio - r.e / r.e_cl).abs() < 1e-9 * r.ratio);
    }
}

#[test]
fn h_coefficients_closed_form_matches_contour() {
    for l in [0.3, 2.0, 25.0] {
        let a = h_coefficients(5, l);
        let b = h_coefficients_contour(5, l).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() <= 1e-10 * x.norm());
        }
    }
}

#[test]
fn pure_shear_reference_values() {
    assert_relative_eq!(critical_speed(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap(), 1.0, epsilon = 1e-8);
    assert_relative_eq!(h0_star(0.0).unwrap(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-8);
    assert_relative_eq!(critical_speed(-0.9, 0.707).unwrap(), 0.441, epsilon = 5e-3);
}

#[test]
fn plus_factor_is_unity_at_origin() {
    let k = factorize(&KernelParams::new(0.3, 0.0, 0.707).unwrap(), KERNEL_TOL).unwrap();
    assert_relative_eq!(k.k_plus_zero(), 1.0, epsilon = 1e-12);
    let z = k.k_plus(Complex64::new(0.0, 0.0)).unwrap();
    assert_relative_eq!(z.re, 1.0, epsilon = 1e-12);
}

#[test]
fn super_rayleigh_speed_is_rejected() {
    let mat = Material::normalized(-0.9, 0.707).unwrap();
    let e = evaluate(&mat, 0.6, LoadProfile::new(1.0, 10.0, 0).unwrap()).unwrap_err();
    assert!(e.is_regime(), "{e}");
}
