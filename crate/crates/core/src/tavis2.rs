//! Closed-form statistics for two resonant qubits charged in parallel from a
//! Fock state `|N⟩`, written with scalars only.
//!
//! This module deliberately imports nothing from the rest of the crate so it
//! can serve as an independent reference for the matrix code paths.

use num_complex::Complex64 as C64;

/// Same floor as the numeric pipeline: variances below it count as zero.
const VAR_FLOOR: f64 = 1e-12;

/// Populations after time `g_tau` starting from `|gg⟩ ⊗ |N⟩`: `f` is the
/// probability of `|ee⟩`, `h` that of `|eg⟩` (and, by symmetry, of `|ge⟩`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FHPair {
    pub f: f64,
    pub h: f64,
    pub n: usize,
    pub g_tau: f64,
}

impl FHPair {
    /// Probability that qubit 1 ends up excited.
    pub fn single(&self) -> f64 {
        self.f + self.h
    }
}

pub fn eval_fh(n: usize, g_tau: f64) -> FHPair {
    if n == 0 {
        return FHPair {
            f: 0.0,
            h: 0.0,
            n,
            g_tau,
        };
    }
    let nf = n as f64;
    let k = 2.0 * nf - 1.0;
    let w = (2.0 * k).sqrt() * g_tau;
    let f = ((-1.0 + w.cos()) / k).powi(2) * nf * (nf - 1.0);
    let h = w.sin().powi(2) * nf / (2.0 * k);
    FHPair { f, h, n, g_tau }
}

fn ratio(mean: f64, var: f64) -> f64 {
    if var < VAR_FLOOR {
        if mean * mean > VAR_FLOOR {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        mean * mean / var
    }
}

/// Single-qubit SNR `(f+h) / (1 − (f+h))`; `f64::INFINITY` marks divergence.
pub fn oracle_snr(n: usize, g_tau: f64) -> f64 {
    let p = eval_fh(n, g_tau).single();
    ratio(p, p * (1.0 - p))
}

/// Generating function of the energy taken by qubit 1, with energy quantum 1.
pub fn oracle_gf(n: usize, g_tau: f64, chi: f64) -> C64 {
    let p = eval_fh(n, g_tau).single();
    C64::new(0.0, chi).exp() * p + (1.0 - p)
}

/// Mean and variance of the energy taken by both qubits together.
pub fn oracle_collective(n: usize, g_tau: f64) -> (f64, f64) {
    let FHPair { f, h, .. } = eval_fh(n, g_tau);
    // |ee⟩ carries two quanta, |eg⟩ and |ge⟩ one each
    let mean = 2.0 * f + 2.0 * h;
    let second = 4.0 * f + 2.0 * h;
    (mean, second - mean * mean)
}

/// Mean and variance of the energy taken by qubit 1 alone.
pub fn oracle_single(n: usize, g_tau: f64) -> (f64, f64) {
    let p = eval_fh(n, g_tau).single();
    (p, p - p * p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn endpoints() {
        let z = eval_fh(4, 0.0);
        assert_eq!((z.f, z.h), (0.0, 0.0));
        assert_eq!(oracle_snr(3, 0.0), 0.0);
        assert_eq!(oracle_gf(3, 1.2, 0.0), C64::new(1.0, 0.0));
        let e = eval_fh(0, 1.3);
        assert_eq!((e.f, e.h), (0.0, 0.0));
    }

    #[test]
    fn single_photon() {
        for &t in &[0.1, 0.7, 2.3] {
            let p = eval_fh(1, t);
            assert_eq!(p.f, 0.0);
            assert!((p.h - (2f64.sqrt() * t).sin().powi(2) / 2.0).abs() < 1e-15);
        }
        assert!((oracle_snr(1, PI / (2.0 * 2f64.sqrt())) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_photons_half_period() {
        let t = PI / 6f64.sqrt();
        let p = eval_fh(2, t);
        assert!((p.f - 8.0 / 9.0).abs() < 1e-14);
        assert!(p.h.abs() < 1e-15);
        assert!((oracle_snr(2, t) - 8.0).abs() < 1e-10);
    }

    #[test]
    fn periodic_in_chi() {
        let a = oracle_gf(3, 0.9, 0.4);
        let b = oracle_gf(3, 0.9, 0.4 + 2.0 * PI);
        assert!((a - b).norm() < 1e-14);
    }
}
