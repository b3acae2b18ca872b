//! Library results against references computed independently in this file.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use qbatt_core::dynamics::{
    jc_evolution, propagate_tilted_driven, ModelParams, TiltGenerator, TiltSpec,
};
use qbatt_core::fcs::fidelity_excited;
use qbatt_core::fockspace::{partial_trace, DensityMatrix, HilbertLayout, Subsystem};
use qbatt_core::states::{
    make_coherent, phase_randomized_weights, squeezed_amplitudes, thermalized_fock_weights,
};
use qbatt_core::C64;

fn big(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn factorial(n: usize) -> BigRational {
    (1..=n as u64).fold(BigRational::one(), |acc, k| acc * big(k))
}

fn binomial(n: usize, k: usize) -> BigRational {
    if k > n {
        return BigRational::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Exact thermal-noise weight for a rational mean occupation `num/den`.
fn thermal_exact(m: usize, n: usize, num: u64, den: u64) -> f64 {
    let nth = BigRational::new(BigInt::from(num), BigInt::from(den));
    let x = &nth / (&nth + BigRational::one());
    let mut sum = BigRational::zero();
    for k in 0..=m {
        for kp in 0..=m {
            let b = binomial(n, m - k) * binomial(n, m - kp);
            if b.is_zero() {
                continue;
            }
            let e = k + kp + n - m;
            let mut t = b * factorial(e) * num_traits::pow(x.clone(), e + 1)
                / (factorial(k) * factorial(kp));
            if (k + kp) % 2 == 1 {
                t = -t;
            }
            sum += t;
        }
    }
    (factorial(m) / (factorial(n) * nth) * sum)
        .to_f64()
        .unwrap()
}

#[test]
fn thermal_weights_match_exact_rationals() {
    for (n, num, den) in [(0usize, 1u64, 50u64), (1, 1, 50), (3, 1, 10), (5, 1, 5)] {
        let w = thermalized_fock_weights(n, num as f64 / den as f64, 30).unwrap();
        for (m, wm) in w.iter().enumerate() {
            let exact = thermal_exact(m, n, num, den);
            assert!(
                (wm - exact).abs() <= 1e-12 + 1e-8 * exact,
                "N={n} n_th={num}/{den} m={m}: {wm} vs {exact}"
            );
        }
    }
}

/// Generalised Laguerre polynomial by the three-term recurrence.
fn laguerre(k: usize, a: f64, x: f64) -> f64 {
    let (mut l0, mut l1) = (1.0, 1.0 + a - x);
    if k == 0 {
        return l0;
    }
    for j in 1..k {
        let jf = j as f64;
        let l2 = ((2.0 * jf + 1.0 + a - x) * l1 - (jf + a) * l0) / (jf + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// `|⟨m|D(β)|N⟩|²` as a function of `x = |β|²`.
fn displaced_overlap(m: usize, n: usize, x: f64) -> f64 {
    let (lo, hi) = (m.min(n), m.max(n));
    let ratio: f64 = (lo + 1..=hi).map(|k| 1.0 / k as f64).product();
    let l = laguerre(lo, (hi - lo) as f64, x);
    ratio * x.powi((hi - lo) as i32) * (-x).exp() * l * l
}

/// Weight of `|m⟩` after random Gaussian displacements of variance `n_th`,
/// integrated over the radius with Simpson's rule in units of `n_th`.
fn thermal_quadrature(m: usize, n: usize, nth: f64) -> f64 {
    let steps = 40_000;
    let top = 60.0;
    let h = top / steps as f64;
    let f = |u: f64| (-u).exp() * displaced_overlap(m, n, nth * u);
    let mut s = f(0.0) + f(top);
    for i in 1..steps {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn thermal_weights_match_noise_channel_quadrature() {
    for (n, nth) in [(2usize, 0.02), (5, 0.02), (3, 0.2)] {
        let w = thermalized_fock_weights(n, nth, 14).unwrap();
        for (m, wm) in w.iter().enumerate() {
            let q = thermal_quadrature(m, n, nth);
            assert!((wm - q).abs() < 1e-8, "N={n} n_th={nth} m={m}: {wm} vs {q}");
        }
    }
}

fn hermite(n: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Squeezed coherent amplitude for real squeezing `r > 0` and real
/// displacement `a`, from the closed Hermite form.
fn squeezed_direct(n: usize, r: f64, a: f64) -> f64 {
    let t = r.tanh();
    let nf: f64 = (1..=n).map(|k| k as f64).product();
    let arg = a * (1.0 + t) / (2.0 * t).sqrt();
    (0.5 * t).powf(n as f64 / 2.0) / (nf * r.cosh()).sqrt()
        * (-0.5 * a * a * (1.0 + t)).exp()
        * hermite(n, arg)
}

#[test]
fn squeezed_amplitudes_match_hermite_form() {
    for (r, a) in [(0.6, 3.905 * (-0.6f64).exp()), (0.3, 1.2), (1.0, 0.4)] {
        // α̃ = a·e^{r} maps onto the displacement a for real squeezing
        let amps = squeezed_amplitudes(C64::new(r, 0.0), C64::new(a * r.exp(), 0.0), 30).unwrap();
        for (n, p) in amps.iter().enumerate() {
            let want = squeezed_direct(n, r, a);
            assert!(
                (p.re - want).abs() < 1e-10 && p.im.abs() < 1e-12,
                "r={r} a={a} n={n}"
            );
        }
    }
}

#[test]
fn randomized_weights_depend_on_moduli_only() {
    let r = 0.5;
    let a = 1.3;
    let reference: Vec<f64> = (0..30).map(|n| squeezed_direct(n, r, a).powi(2)).collect();
    // rotate the squeezing and displacement together; the displacement
    // modulus stays a
    for phi in [0.0, 0.7, 2.0] {
        let zeta = C64::from_polar(r, phi);
        let alpha = C64::from_polar(a, phi / 2.0);
        let alpha_tilde = alpha * r.cosh() + alpha.conj() * C64::from_polar(1.0, phi) * r.sinh();
        let w = phase_randomized_weights(zeta, alpha_tilde, 30).unwrap();
        for (x, y) in w.iter().zip(&reference) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}

#[test]
fn coherent_populations() {
    let rho = make_coherent(C64::new(5f64.sqrt(), 0.0), 40).unwrap();
    let p5 = rho.entries()[(5, 5)].re;
    assert!((p5 - 0.17547).abs() < 1e-5);
    assert!((rho.mean_photons().unwrap() - 5.0).abs() < 1e-8);
}

fn sqrt_psd(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = m.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

/// `(Tr √(√ρ σ √ρ))²`.
fn uhlmann(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> f64 {
    let s = sqrt_psd(rho);
    let inner = &s * sigma * &s;
    let eig = inner.symmetric_eigen();
    eig.eigenvalues
        .iter()
        .map(|l| l.max(0.0).sqrt())
        .sum::<f64>()
        .powi(2)
}

#[test]
fn excited_fidelity_matches_uhlmann() {
    let target = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(1.0, 0.0),
            C64::default(),
            C64::default(),
            C64::default(),
        ],
    );
    let layout = HilbertLayout::new(1, 8).unwrap();
    let params = ModelParams::resonant(0.01).with_detuning_ratio(2e-3);
    let mut w = vec![0.0; layout.dim()];
    // |g⟩ ⊗ (|2⟩ + |3⟩ mixture), with a coherent admixture added below
    w[8 + 2] = 0.6;
    w[8 + 3] = 0.4;
    let mut rho0 = DensityMatrix::from_diagonal(layout, &w)
        .unwrap()
        .entries()
        .clone();
    let c = C64::new(0.0, 0.2);
    rho0[(8 + 2, 8 + 3)] = c;
    rho0[(8 + 3, 8 + 2)] = c.conj();
    let rho0 = DensityMatrix::new(layout, rho0).unwrap();
    for g_tau in [0.2, 0.9, 1.7, 2.6] {
        let u = jc_evolution(g_tau / 0.01, &params, 8).unwrap();
        let out = u.entries() * rho0.entries() * u.entries().adjoint();
        let full = DensityMatrix::new(layout, out).unwrap();
        let q = partial_trace(&full, &[Subsystem::Qubit(1)]).unwrap();
        let f = fidelity_excited(&q).unwrap();
        let want = uhlmann(q.entries(), &target);
        // the matrix square root of a nearly pure state costs about √ε
        assert!((f - want).abs() < 1e-7, "gτ={g_tau}: {f} vs {want}");
    }
}

#[test]
fn constant_coupling_ode_matches_closed_form() {
    let d = 7;
    let layout = HilbertLayout::new(1, d).unwrap();
    let mut w = vec![0.0; layout.dim()];
    w[d + 3] = 0.7;
    w[d + 1] = 0.3;
    let rho0 = DensityMatrix::from_diagonal(layout, &w).unwrap();
    let tilt = TiltSpec {
        generator: TiltGenerator::SingleQubit(1),
        chi: 0.0,
    };
    for (ratio, g_tau) in [(0.0, 1.3), (1e-3, 0.8)] {
        let params = ModelParams::resonant(0.01).with_detuning_ratio(ratio);
        let t = params.time_from_g_tau(g_tau);
        let ode = propagate_tilted_driven(&rho0, &params, tilt, t, 1e-11).unwrap();
        let u = jc_evolution(t, &params, d).unwrap();
        let exact = u.entries() * rho0.entries() * u.entries().adjoint();
        let err = (&ode.entries - exact)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "ratio {ratio}: {err:e}");
    }
}
