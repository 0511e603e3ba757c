use std::f64::consts::PI;

use cavsim::analysis::{
    cat_parity_limit, cat_parity_vs_time, fit_cat_cut, fit_exp_cos, fit_exponential, kerr_estimates, predicted_t2,
    t2_decomposition, thermal_dephasing_rate, Measured,
};
use cavsim::dynamics::{build_static_hamiltonian, collapse_channels, evolve_sampled, EvolutionSpec, SystemParams};
use cavsim::hilbert::{cat_state, parity_operator, FockSpace, CAVITY};
use cavsim::units::{two_pi, KHZ, MS, US};
use cavsim::{Error, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

#[test]
fn exponential_exact_ringdown() {
    let x = grid(0.0, 0.5, 60);
    let y: Vec<f64> = x.iter().map(|t| 0.9 * (-t / 0.110).exp() + 0.02).collect();
    let f = fit_exponential(&x, &y).unwrap();
    assert!(((f.value("tau") - 0.110) / 0.110).abs() < 1e-6);
    assert!(f.sigma("tau") >= 0.0);
}

#[test]
fn exponential_rejects_constant() {
    let x = grid(0.0, 1.0, 10);
    assert!(matches!(fit_exponential(&x, &[0.3; 10]), Err(Error::DegenerateData(_))));
}

#[test]
fn exponential_noisy_degraded_cavity() {
    let x = grid(0.0, 0.12, 80);
    let noise = Normal::new(0.0, 0.01).unwrap();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = x.iter().map(|t| (-t / 0.030).exp() + noise.sample(&mut rng)).collect();
        let tau = fit_exponential(&x, &y).unwrap().value("tau");
        assert!((tau / 0.030 - 1.0).abs() < 0.03, "seed {seed}: {tau}");
    }
}

fn ramsey(t: f64, tau: f64, f: f64) -> f64 {
    0.5 + 0.5 * (-t / tau).exp() * (2.0 * PI * f * t).cos()
}

#[test]
fn exp_cos_exact_and_noisy() {
    let x = grid(0.0, 100.0 * MS, 101);
    let y: Vec<f64> = x.iter().map(|t| ramsey(*t, 34.0 * MS, 40.0)).collect();
    let f = fit_exp_cos(&x, &y).unwrap();
    assert!((f.value("tau") / (34.0 * MS) - 1.0).abs() < 1e-6);
    assert!((f.value("frequency") - 40.0).abs() < 1e-6);

    let noise = Normal::new(0.0, 0.02).unwrap();
    let mut errs: Vec<f64> = (0..100)
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let y: Vec<f64> = x.iter().map(|t| ramsey(*t, 34.0 * MS, 40.0) + noise.sample(&mut rng)).collect();
            (fit_exp_cos(&x, &y).unwrap().value("tau") / (34.0 * MS) - 1.0).abs()
        })
        .collect();
    errs.sort_by(|a, b| a.total_cmp(b));
    assert!(errs[50] < 0.02, "median {}", errs[50]);
    assert!(errs[94] < 0.05, "95th {}", errs[94]);
}

#[test]
fn exp_cos_without_oscillation_matches_exponential() {
    let x = grid(0.0, 80.0 * MS, 41);
    let y: Vec<f64> = x.iter().map(|t| 0.8 * (-t / (20.0 * MS)).exp() + 0.1).collect();
    let a = fit_exp_cos(&x, &y).unwrap().value("tau");
    let b = fit_exponential(&x, &y).unwrap().value("tau");
    assert!((a / b - 1.0).abs() < 1e-6);
}

/// Imaginary-axis cut of an even cat with real α, evaluated analytically.
fn analytic_cut(alpha: f64, y: f64) -> f64 {
    let n = alpha * alpha;
    let lobes = 2.0 * (-2.0 * (n + y * y)).exp();
    let fringe = 2.0 * (-2.0 * y * y).exp() * (4.0 * alpha * y).cos();
    (lobes + fringe) / (2.0 * (1.0 + (-2.0 * n).exp()))
}

#[test]
fn cat_cut_recovers_size() {
    for (s, n) in [(128.0f64, 241), (1024.0, 801)] {
        let alpha = s.sqrt() / 2.0;
        let x = grid(-1.5, 1.5, n);
        let w: Vec<f64> = x.iter().map(|y| analytic_cut(alpha, *y)).collect();
        let f = fit_cat_cut(&x, &w).unwrap();
        assert!((f.size / s - 1.0).abs() < 0.01, "S={s}: {}", f.size);
        assert!(f.size_sigma >= 0.0);
    }
    let x = grid(-1.5, 1.5, 61);
    assert!(fit_cat_cut(&x, &vec![0.0; 61]).is_err());
}

#[test]
fn thermal_dephasing_examples() {
    assert_eq!(thermal_dephasing_rate(two_pi(42.0 * KHZ), two_pi(1.45 * KHZ), 0.0).unwrap(), 0.0);
    let g = thermal_dephasing_rate(two_pi(42.0 * KHZ), two_pi(1.45 * KHZ), 1.2e-3).unwrap();
    assert!((1.0 / g / (92.0 * MS) - 1.0).abs() < 0.05, "{}", 1.0 / g);
    let t2 = predicted_t2(25.7 * MS, two_pi(197.0 * KHZ), two_pi(1.88 * KHZ), 0.072).unwrap();
    assert!((t2 / (1.2 * MS) - 1.0).abs() < 0.10, "{t2}");
}

#[test]
fn thermal_dephasing_large_chi_limit() {
    let gamma = two_pi(1.0 * KHZ);
    for ratio in [100.0, 300.0, 1000.0] {
        for nth in [1e-4, 1e-3, 1e-2] {
            let g = thermal_dephasing_rate(ratio * gamma, gamma, nth).unwrap();
            assert!(((g - nth * gamma) / g).abs() <= 0.05, "χ/Γ={ratio}, n={nth}");
        }
    }
}

#[test]
fn decomposition_examples() {
    let b = t2_decomposition(
        Measured::new(25.6 * MS, 0.2 * MS),
        Measured::new(34.0 * MS, 1.0 * MS),
        Measured::new(92.0 * MS, 15.0 * MS),
    )
    .unwrap();
    assert!(b.t_phi_lower_bound > 0.5, "{}", b.t_phi_lower_bound);
    assert!(b.residual_rate >= 0.0);
    let sum = b.one_over_2t1 + b.heating_rate + b.residual_rate;
    assert!((1.0 / b.predicted_t2 - sum).abs() < 1e-12 * sum);

    let lifetime = t2_decomposition(25.6 * MS, 51.2 * MS, f64::INFINITY).unwrap();
    assert_eq!(lifetime.residual_rate, 0.0);

    let err = t2_decomposition(25.6 * MS, 40.0 * MS, 92.0 * MS);
    assert!(matches!(err, Err(Error::Unphysical(_))));
}

#[test]
fn cat_parity_closed_form() {
    assert!((cat_parity_vs_time(3.0, true, 25.6 * MS, 0.0).unwrap() - 4.0 / PI).abs() < 1e-12);
    // 1/e point of the limit form for the 1024-photon cat
    let t = 50.0 * US;
    let v = cat_parity_limit(256.0, true, 25.6 * MS, t);
    assert!((v / (4.0 / PI) - (-1.0f64).exp()).abs() < 1e-12);
    let full = cat_parity_vs_time(8.0, true, 25.6 * MS, 0.256 * MS).unwrap();
    let lim = cat_parity_limit(8.0, true, 25.6 * MS, 0.256 * MS);
    assert!((full / lim - 1.0).abs() < 0.01);
}

#[test]
fn cat_parity_matches_lindblad() {
    let p = SystemParams::table_i();
    let s = FockSpace::cavity(24).unwrap();
    let cat = cat_state(&s, CAVITY, C64::new(2.0, 0.0), true).unwrap();
    let spec = EvolutionSpec::new(build_static_hamiltonian(&p, &s).unwrap(), 0.0, 3.0 * p.t1_c)
        .with_collapse(collapse_channels(&p, &s).unwrap());
    let times = grid(0.0, 3.0 * p.t1_c, 13);
    let tr = evolve_sampled(&cat, &spec, &times, &[parity_operator(&s, CAVITY).unwrap()]).unwrap();
    for (t, e) in times.iter().zip(&tr.expectations) {
        let w = cat_parity_vs_time(4.0, true, p.t1_c, *t).unwrap() * PI / 4.0;
        assert!((e[0].re - w).abs() < 0.01 * w.abs().max(1e-3), "t={t}");
    }
}

#[test]
fn kerr_figures() {
    let k = kerr_estimates(&SystemParams::table_i(), 256.0).unwrap();
    assert!((k.n_crit - 579.0).abs() < 1.0);
    // one significant figure, as quoted
    assert_eq!((k.t_g_min / US * 10.0).round(), 2.0);
    assert!((k.t_col / (4.3 * MS) - 1.0).abs() < 0.10);
    assert!((k.k_c / two_pi(3.02) - 1.0).abs() < 0.01);
}
