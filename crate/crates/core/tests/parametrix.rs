use std::f64::consts::PI;

use flatdet::linalg::{c, real, C64};
use flatdet::parametrix::*;
use num_traits::Zero;

fn potentials() -> Vec<Potential> {
    ["sin", "1 + sin", "0.5*cos(2x) - sin", "2 + 1/3*cos(x)", "3/2"]
        .iter()
        .map(|s| Potential::parse(s).unwrap())
        .collect()
}

/// Value of `Σ c(x) ξ^a (ξ² + v(x) - λ)^{-b}`.
fn eval_symbol(s: &LaurentSymbol, v: &Potential, x: f64, xi: f64, lambda: C64) -> C64 {
    let d = real(xi * xi + v.eval(x)) - lambda;
    s.terms().map(|(a, b, coeff)| coeff.eval(x) * xi.powi(a as i32) * d.powi(-b)).sum()
}

#[test]
fn recursion_identity_is_exact() {
    for v in potentials() {
        for n in 0..=6 {
            let s = parametrix_symbols(&v, n).unwrap();
            assert!(s.identity_holds(), "v = {}, N = {n}", v.label());
            assert_eq!(s.q.len(), n + 2);
            assert_eq!(s.truncation_tail, 0.0);
        }
    }
}

#[test]
fn recursion_identity_holds_pointwise() {
    // apply Σ_α (-i)^α/α! ∂_ξ^α(ξ² + v - λ) ∂_x^α to the numeric q^N with
    // x-derivatives by finite differences
    let h = 1e-3;
    for v in potentials() {
        let s = parametrix_symbols(&v, 4).unwrap();
        let total = s.total();
        for &(x, xi, lambda) in &[(0.3, 1.5, c(-1.0, 0.5)), (2.0, -0.7, c(-3.0, -2.0)), (4.4, 3.0, c(0.5, 4.0))] {
            let f = |y: f64| eval_symbol(&total, &v, y, xi, lambda);
            let d1 = (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h);
            let d2 = (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h);
            let d = real(xi * xi + v.eval(x)) - lambda;
            let lhs = d * f(x) + c(0.0, -2.0 * xi) * d1 - d2;
            let rhs = 1.0 + eval_symbol(&s.remainder, &v, x, xi, lambda);
            assert!((lhs - rhs).norm() < 1e-8, "v = {}: {lhs} vs {rhs}", v.label());
        }
    }
}

#[test]
fn homogeneous_kernels_scale_with_order() {
    // ξ^a d̃^{-b} with a - 2b = -2 - N scales like t^{(N-1)/2} at x = y
    let zero = Potential::zero();
    for (a, b) in [(0u32, 2i32), (2, 3), (4, 4), (0, 3), (2, 5)] {
        let n = 2 * b - a as i32 - 2;
        let k = SymbolKernel::new(&LaurentSymbol::term(a, b, Fourier::one()), &zero).unwrap();
        let t = 0.01;
        let ratio = k.eval(t, 1.0, 1.0) / k.eval(t / 2.0, 1.0, 1.0);
        let fit = fit_power_law(&[(t / 2.0, 1.0), (t, ratio.re)]).unwrap().exponent;
        assert!((fit - (n as f64 - 1.0) / 2.0).abs() < 1e-10, "a={a}, b={b}: {fit}");
    }
}

#[test]
fn remainder_is_the_heat_operator_applied_to_k_n() {
    let v = Potential::parse("sin").unwrap();
    let k = ApproximateHeatKernel::new(&v, 4).unwrap();
    let (t, h, ht) = (0.05, 1e-3, 1e-5);
    for &(x, y) in &[(0.5, 0.5), (1.0, 1.2), (3.0, 2.6)] {
        let dt = (k.k_n(t + ht, x, y) - k.k_n(t - ht, x, y)) / (2.0 * ht);
        let dk = apply_d_numeric(|z| k.k_n(t, z, y), &v, x, h);
        let s = k.s_n(t, x, y);
        assert!((dt + dk - s).norm() < 1e-6, "({x},{y}): {} vs {s}", dt + dk);
    }
}

#[test]
fn remainder_sup_norm_scaling() {
    let v = Potential::parse("sin").unwrap();
    let ts = log_spaced(1e-3, 1e-1, 9);
    let xs = circle_grid(64);
    for n in [2usize, 4] {
        let k = ApproximateHeatKernel::new(&v, n).unwrap();
        let fit = remainder_scaling(&k, &ts, &xs).unwrap();
        let want = (n as f64 - 1.0) / 2.0;
        assert!((fit.exponent - want).abs() <= 0.2 * want, "N = {n}: exponent {}", fit.exponent);
    }
}

#[test]
fn parametrix_matches_spectral_oracle() {
    let v = Potential::parse("sin").unwrap();
    let k = ApproximateHeatKernel::new(&v, 4).unwrap();
    let ts = log_spaced(1e-3, 1e-1, 5);
    let acc = parametrix_accuracy(&k, &ts, &circle_grid(32)).unwrap();
    assert!(acc.bound_constant.is_finite() && acc.bound_constant < 1.0);
    // the diagonal error decays at least as fast as the bound
    assert!(acc.fit.exponent >= 1.5 * 0.8);
    assert!(acc.oracle_error < 1e-15);
}

#[test]
fn constant_potential_kernel_is_exact() {
    let v = Potential::parse("2.25").unwrap();
    let k = ApproximateHeatKernel::new(&v, 4).unwrap();
    for t in [0.001, 0.01, 0.1] {
        let want = (4.0 * PI * t).powf(-0.5) * (-2.25 * t).exp();
        assert!((k.k_n(t, 1.0, 1.0).re - want).abs() < 1e-12 * want);
    }
}

#[test]
fn volterra_improves_on_the_parametrix() {
    let v = Potential::parse("sin").unwrap();
    let k = ApproximateHeatKernel::new(&v, 4).unwrap();
    let settings = VolterraSettings::default();
    let mut sizes = Vec::new();
    for t in [0.1, 0.05, 0.025] {
        let r = volterra_correct(&k, 1, t, 0.7, 0.7, &settings).unwrap();
        let oracle = SpectralHeatOracle::new(&v, t, SpectralHeatOracle::default_modes(t)).unwrap().eval(0.7, 0.7);
        assert!((r.value - oracle).norm() < (r.base - oracle).norm());
        sizes.push(r.corrections[0].norm());
    }
    // successive halvings of t shrink the correction by 2^{(N+1)/2} within a factor 2
    let expected = 2f64.powf(2.5);
    for w in sizes.windows(2) {
        let ratio = w[0] / w[1];
        assert!(ratio > expected / 2.0 && ratio < expected * 2.0, "ratio {ratio}");
    }
}

#[test]
fn volterra_second_correction_is_smaller() {
    let v = Potential::parse("sin").unwrap();
    let k = ApproximateHeatKernel::new(&v, 4).unwrap();
    let settings = VolterraSettings { grid: 128, nodes: 8, refinement_tol: 1e-2 };
    let r = volterra_correct(&k, 2, 0.1, 0.7, 0.7, &settings).unwrap();
    assert!(r.corrections[1].norm() < 0.1 * r.corrections[0].norm());
    assert!(volterra_correct(&k, 4, 0.1, 0.7, 0.7, &settings).is_err());
}

#[test]
fn free_volterra_corrections_vanish() {
    let k = ApproximateHeatKernel::new(&Potential::zero(), 4).unwrap();
    let r = volterra_correct(&k, 1, 0.05, 1.0, 2.0, &VolterraSettings::default()).unwrap();
    assert_eq!(r.corrections[0], real(0.0));
}

#[test]
fn heat_coefficients_exact_values() {
    let sqrt_pi = PI.sqrt();
    let b = heat_coefficients(&Potential::zero(), 6, None).unwrap();
    assert!((b[0].value.re - sqrt_pi).abs() < 1e-15);
    assert!(b[1..].iter().all(|c| c.over_sqrt_pi.is_zero()));
    for v in potentials() {
        let b = heat_coefficients(&v, 7, None).unwrap();
        for c in b.iter().filter(|c| c.k % 2 == 1) {
            assert!(c.over_sqrt_pi.is_zero(), "v = {}, B_{} = {}", v.label(), c.k, c.value);
        }
    }
    let b = heat_coefficients(&Potential::parse("sin").unwrap(), 4, None).unwrap();
    assert!(b[2].over_sqrt_pi.is_zero());
    let b = heat_coefficients(&Potential::parse("1 + sin").unwrap(), 4, None).unwrap();
    assert!((b[2].value.re + sqrt_pi).abs() < 1e-15);
}

#[test]
fn heat_coefficients_reproduce_the_oracle_trace() {
    for v in potentials() {
        let b = heat_coefficients(&v, 6, None).unwrap();
        for t in [0.002, 0.01] {
            let oracle = SpectralHeatOracle::new(&v, t, SpectralHeatOracle::default_modes(t)).unwrap();
            let series: f64 = b.iter().map(|c| c.value.re * t.powf((c.k as f64 - 1.0) / 2.0)).sum();
            // first omitted term is t^{7/2} B_8
            assert!((oracle.trace() - series).abs() < 50.0 * t.powf(3.5), "v = {}, t = {t}", v.label());
        }
    }
}

#[test]
fn odd_total_order_coefficients_vanish_with_an_operator() {
    let parse = |s: &str| Potential::parse(s).unwrap().series().clone();
    let ops = [
        DiffOperator { coeffs: vec![Fourier::zero(), Fourier::one()] },
        DiffOperator { coeffs: vec![parse("sin"), parse("cos")] },
        DiffOperator { coeffs: vec![parse("1"), parse("0"), parse("2 + cos")] },
    ];
    let v = Potential::parse("1 + sin").unwrap();
    for (i, op) in ops.iter().enumerate() {
        let l = op.order();
        let b = heat_coefficients(&v, 6, Some(op)).unwrap();
        for c in &b {
            if (c.k + l) % 2 == 1 {
                assert!(c.over_sqrt_pi.is_zero(), "l = {l}, B_{} = {}", c.k, c.value);
            }
        }
        // ∂_x is antisymmetric against a symmetric kernel, so its trace vanishes
        assert_eq!(b.iter().any(|c| !c.over_sqrt_pi.is_zero()), i > 0);
    }
}

#[test]
fn oracle_semigroup_property() {
    let v = Potential::parse("sin").unwrap();
    let t = 0.05;
    let k1 = SpectralHeatOracle::new(&v, t, 64).unwrap();
    let k2 = SpectralHeatOracle::new(&v, 2.0 * t, 64).unwrap();
    let ys = circle_grid(256);
    let h = 2.0 * PI / 256.0;
    for &(x, z) in &[(0.3, 0.3), (1.0, 1.4), (5.0, 0.2)] {
        let conv: C64 = ys.iter().map(|&y| k1.eval(x, y) * k1.eval(z, y).conj()).sum::<C64>() * h;
        assert!((conv - k2.eval(x, z)).norm() < 1e-8);
    }
}
