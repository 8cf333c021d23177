mod common;

use common::*;
use rfso_core::specfun::{
    bessel_k, delta_vec, gaussian_q, meijer_g, meijer_g_residue_sum, meijer_g_small_arg,
    meijer_g_small_arg_order, MeijerGSpec,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn exponential_identity() {
    let spec = MeijerGSpec::new(1, 0, vec![], vec![0.0]).unwrap();
    let mut worst = 0.0f64;
    for i in 0..=60 {
        let z = 1e-3 * (20e3f64).powf(i as f64 / 60.0);
        worst = worst.max(rel(meijer_g(&spec, z).unwrap(), (-z).exp()));
    }
    assert!(worst < 1e-10, "worst relative error {worst:e}");
}

#[test]
fn bessel_reduction() {
    // G^{2,0}_{0,2}(z | ν/2, −ν/2) = 2 K_ν(2√z)
    for &nu in &[0.1, 0.5, 1.3, 3.2] {
        let spec = MeijerGSpec::new(2, 0, vec![], vec![nu / 2.0, -nu / 2.0]).unwrap();
        for i in 0..=20 {
            let z = 1e-4 * 1e5f64.powf(i as f64 / 20.0);
            let g = meijer_g(&spec, z).unwrap();
            let k = 2.0 * bessel_k(nu, 2.0 * z.sqrt()).unwrap();
            assert!(rel(g, k) < 1e-9, "ν={nu} z={z}: {g} vs {k}");
        }
    }
}

#[test]
fn bessel_k_against_series() {
    for &nu in &[0.3, 1.7, 3.2, -2.4] {
        for &x in &[0.01, 0.5, 1.0, 2.5] {
            let k = bessel_k(nu, x).unwrap();
            let s = bessel_k_series(nu, x);
            assert!(rel(k, s) < 1e-10, "ν={nu} x={x}: {k} vs {s}");
        }
        // series cancels for larger x; use the integral representation instead
        for &x in &[6.0, 40.0, 650.0] {
            let k = bessel_k(nu, x).unwrap();
            let upper = (60.0 / x + 1.0f64).acosh() + 1.0;
            let s = simpson(|t| (-x * (t.cosh() - 1.0)).exp() * (nu * t).cosh(), 0.0, upper, 20_000)
                * (-x).exp();
            assert!(rel(k, s) < 1e-10, "ν={nu} x={x}: {k} vs {s}");
        }
    }
}

#[test]
fn gaussian_q_against_erfc_oracle() {
    let q1 = gaussian_q(1.0);
    assert!((q1 - 0.5 * erfc_ref(1.0 / 2f64.sqrt())).abs() < 1e-15);
    assert!((q1 - 0.158_655_253_931_457_05).abs() < 1e-15);
    for i in 0..=100 {
        let x = i as f64 * 0.1;
        let r = 0.5 * erfc_ref(x / 2f64.sqrt());
        assert!(rel(gaussian_q(x), r) < 1e-12, "x={x}");
    }
}

fn well_separated(v: &[f64]) -> bool {
    (0..v.len()).all(|i| (0..i).all(|j| {
        let d = v[i] - v[j];
        (d - d.round()).abs() > 0.06
    }))
}

fn random_shape(rng: &mut TestRng, shape: usize, r: usize) -> (usize, usize, Vec<f64>, Vec<f64>) {
    // right-family heads ~ Δ(r:ξ²), Δ(r:α), Δ(r:n), ζ₀ with ζ₀ near 0;
    // redrawn until every pair of poles is simple
    let (xi2, mut b) = loop {
        let xi2 = rng.range(0.1, 3.0);
        let alpha = rng.range(1.1, 7.0);
        let n = rng.range(0.6, 5.5);
        let mut b = delta_vec(r, xi2);
        b.extend(delta_vec(r, alpha));
        b.extend(delta_vec(r, n));
        b.push(rng.range(-0.25, 0.05));
        if well_separated(&b) {
            break (xi2, b);
        }
    };
    let zero = b.pop().unwrap();
    let upper_xi = delta_vec(r, xi2 + 1.0);
    match shape {
        // G^{3r,1}_{r+1,3r+1}(· | 1, Δ(r:ξ²+1); Δ(r:ξ²), Δ(r:α), Δ(r:n), 0)
        0 => {
            let mut a = vec![rng.range(0.7, 1.3)];
            a.extend(upper_xi);
            b.push(zero);
            (3 * r, 1, a, b)
        }
        // G^{3r+1,0}_{r,3r+1}(· | Δ(r:ξ²+1); τ4)
        1 => {
            b.push(zero);
            (3 * r + 1, 0, upper_xi, b)
        }
        // G^{3r+1,1}_{r+1,3r+1}(· | a₁, Δ(r:ξ²+1); τ4)
        2 => {
            b.push(zero);
            let mut a = vec![rng.range(0.1, 0.6)];
            a.extend(upper_xi);
            (3 * r + 1, 1, a, b)
        }
        // G^{3,0}_{1,3}(· | ξ²+1; ξ², α, n)
        _ => (3, 0, vec![xi2 + 1.0], vec![b[0], b[1], b[2]]),
    }
}

#[test]
fn randomized_shapes_against_slater_series() {
    let mut rng = TestRng::new(2024);
    let mut worst = 0.0f64;
    for case in 0..56 {
        let shape = case % 4;
        let r = if shape == 3 { 1 } else { 1 + (case / 4) % 2 };
        let (m, n, a, b) = random_shape(&mut rng, shape, r);
        let z = (rng.range(0.05f64.ln(), 3f64.ln())).exp();
        let spec = MeijerGSpec::new(m, n, a.clone(), b.clone()).unwrap();
        let g = meijer_g(&spec, z).unwrap();
        let s = meijer_slater(m, n, &a, &b, z);
        let e = rel(g, s);
        worst = worst.max(e);
        assert!(e < 1e-8, "case {case} shape {shape} r={r} z={z}: {g} vs {s} (a={a:?} b={b:?})");
    }
    eprintln!("worst relative deviation {worst:e}");
}

#[test]
fn structured_pdf_shape_against_slater() {
    // G^{3,0}_{1,3}(z | ξ²+1; ξ², α, n) with α = 4.2, ξ = 0.7, n = 1..5, z = 0.7
    for n in 1..=5 {
        let b = vec![0.49, 4.2, n as f64];
        let a = vec![1.49];
        let spec = MeijerGSpec::new(3, 0, a.clone(), b.clone()).unwrap();
        let g = meijer_g(&spec, 0.7).unwrap();
        let s = meijer_slater(3, 0, &a, &b, 0.7);
        assert!(rel(g, s) < 1e-8, "n={n}: {g} vs {s}");
    }
}

#[test]
fn coincident_poles_against_perturbed_oracle() {
    // outage shape with b = [ξ², α, n, 0], n integer: double poles at n, n+1, …
    for &(n, z) in &[(1.0, 0.3), (3.0, 0.05), (2.0, 1.5)] {
        let b = vec![0.49, 4.2, n, 0.0];
        let a = vec![1.49];
        let spec = MeijerGSpec::new(4, 0, a.clone(), b.clone()).unwrap();
        let g = meijer_g(&spec, z).unwrap();
        let o = meijer_slater_perturbed(4, 0, &a, &b, 3, z);
        assert!(rel(g, o) < 1e-7, "n={n} z={z}: {g} vs {o}");
        let rs = meijer_g_residue_sum(&spec, z, 40).unwrap();
        assert!(rel(rs, g) < 1e-9, "residue sum {rs} vs contour {g}");
    }
}

#[test]
fn permutation_invariance() {
    let a = vec![1.0, 1.245, 1.745];
    let b1 = vec![0.245, 0.745, 2.1, 2.6, 1.5, 2.0, -0.1];
    let b2 = vec![2.6, 0.745, 2.0, 0.245, 1.5, 2.1, -0.1];
    let g1 = meijer_g(&MeijerGSpec::new(6, 1, a.clone(), b1).unwrap(), 0.4).unwrap();
    let g2 = meijer_g(&MeijerGSpec::new(6, 1, a, b2).unwrap(), 0.4).unwrap();
    assert!(rel(g1, g2) < 1e-9);
}

#[test]
fn small_argument_expansion() {
    // CDF shape, r = 2, reference-like parameters (simple poles)
    let r = 2;
    let mut b = delta_vec(r, 0.49);
    b.extend(delta_vec(r, 4.2));
    b.extend(delta_vec(r, 3.0));
    b.push(0.0);
    let mut a = vec![1.0];
    a.extend(delta_vec(r, 1.49));
    let spec = MeijerGSpec::new(3 * r, 1, a, b).unwrap();
    for &z in &[1e-2, 1e-3, 1e-4] {
        let g = meijer_g(&spec, z).unwrap();
        let lead = meijer_g_small_arg(&spec, z).unwrap();
        assert!(rel(lead, g) < 1e-2, "z={z}: leading {lead} vs {g}");
        let full = meijer_g_small_arg_order(&spec, z, 6).unwrap();
        assert!(rel(full, g) < 1e-6, "z={z}: order-6 {full} vs {g}");
    }
    // leading exponent is the smallest head: doubling z scales by 2^{0.245}
    let z = 1e-8;
    let ratio = meijer_g_small_arg(&spec, 2.0 * z).unwrap() / meijer_g_small_arg(&spec, z).unwrap();
    assert!((ratio.log2() - 0.245).abs() < 1e-3);
}

#[test]
fn degenerate_heads_are_rejected_by_strict_expansion() {
    let spec = MeijerGSpec::new(4, 0, vec![1.49], vec![0.49, 4.2, 2.0, 0.0]).unwrap();
    assert!(matches!(meijer_g_small_arg(&spec, 1e-3), Err(rfso_core::Error::DegenerateParameters(_))));
}

#[test]
fn colliding_families_are_unsupported() {
    // a₁ − b₁ = 2 with n = m = 1: pole of Γ(b₁−s) meets pole of Γ(1−a₁+s)
    let spec = MeijerGSpec::new(1, 1, vec![2.5], vec![0.5]).unwrap();
    assert!(matches!(meijer_g(&spec, 0.5), Err(rfso_core::Error::UnsupportedParameters(_))));
}

#[test]
fn interleaved_families_use_detour() {
    // G^{1,1}_{1,1}(z | a; b) = Γ(1−a+b) z^b (1+z)^{a−b−1}; a − 1 = 0.7 > b = 0.2
    let (a, b, z) = (1.7, 0.2, 0.8f64);
    let spec = MeijerGSpec::new(1, 1, vec![a], vec![b]).unwrap();
    // p = q = 1 has decay exponent 1 > 0
    let exact = gamma(1.0 - a + b) * z.powf(b) * (1.0 + z).powf(a - b - 1.0);
    let g = meijer_g(&spec, z).unwrap();
    assert!(rel(g, exact) < 1e-9, "{g} vs {exact}");
}
