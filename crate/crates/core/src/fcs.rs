//! Full counting statistics of the energy taken by the qubits: generating
//! functions, first two moments, SNR and fidelity.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{tc2_block_exp, TiltedState};
use crate::error::{Error, Result};
use crate::fockspace::{CMatrix, DensityMatrix};

/// Variances below this count as zero when forming the SNR.
pub const VAR_FLOOR: f64 = 1e-12;
/// Default counting-field step for finite differences.
pub const FD_STEP: f64 = 0.05;
/// Negative variances down to this size are treated as roundoff.
pub const VAR_CLIP: f64 = 1e-10;

/// Real number or the `+∞` sentinel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extended {
    Finite(f64),
    Infinite,
}

/// Signal-to-noise ratio; `Infinite` marks a vanishing variance with a
/// nonzero mean (deterministic charging).
pub type Snr = Extended;

impl Extended {
    pub fn value(&self) -> f64 {
        match *self {
            Snr::Finite(x) => x,
            Snr::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Snr::Infinite)
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Snr::Finite(x) => Some(x),
            Snr::Infinite => None,
        }
    }

    /// Total order with `Infinite` above every finite value.
    pub fn total_cmp(&self, other: &Snr) -> Ordering {
        self.value().total_cmp(&other.value())
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Snr::Finite(x) => write!(f, "{x}"),
            Snr::Infinite => f.write_str("inf"),
        }
    }
}

/// `mean² / variance` with the divergence sentinel below `var_floor`.
pub fn snr_from(mean: f64, variance: f64, var_floor: f64) -> Snr {
    let m2 = mean * mean;
    if variance < var_floor {
        if m2 > var_floor {
            Snr::Infinite
        } else {
            Snr::Finite(0.0)
        }
    } else {
        Snr::Finite(m2 / variance)
    }
}

/// First two moments of the exchanged energy at one sample time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyStats {
    pub mean: f64,
    pub variance: f64,
    pub snr: Snr,
    pub g_tau: f64,
    /// Estimated finite-difference error when it exceeded the budget.
    pub precision_warning: Option<f64>,
}

impl EnergyStats {
    pub fn from_moments(mean: f64, second: f64, g_tau: f64) -> Self {
        let mut variance = second - mean * mean;
        if (-VAR_CLIP..0.0).contains(&variance) {
            variance = 0.0;
        }
        Self {
            mean,
            variance,
            snr: snr_from(mean, variance, VAR_FLOOR),
            g_tau,
            precision_warning: None,
        }
    }

    pub fn zero(g_tau: f64) -> Self {
        Self::from_moments(0.0, 0.0, g_tau)
    }

    pub fn at(mut self, g_tau: f64) -> Self {
        self.g_tau = g_tau;
        self
    }
}

pub fn snr(stats: &EnergyStats, var_floor: f64) -> Snr {
    snr_from(stats.mean, stats.variance, var_floor)
}

/// `𝒢(χ) = Tr ρ_χ(t)`.
pub fn generating_function(rho_chi: &TiltedState) -> C64 {
    rho_chi.trace()
}

fn stencil(g: &dyn Fn(f64) -> C64, h: f64) -> (C64, C64) {
    let (gm2, gm1, g0, gp1, gp2) = (g(-2.0 * h), g(-h), g(0.0), g(h), g(2.0 * h));
    let d1 = (gm2 - gm1 * 8.0 + gp1 * 8.0 - gp2) / (12.0 * h);
    let d2 = (-gm2 + gm1 * 16.0 - g0 * 30.0 + gp1 * 16.0 - gp2) / (12.0 * h * h);
    (d1, d2)
}

/// Moments from five-point central differences of `𝒢` at `χ = 0`, with one
/// Richardson step between `h` and `h/2`.
pub fn moments_fd<F: Fn(f64) -> C64>(gf_sampler: F, h_chi: f64) -> EnergyStats {
    let (d1h, d2h) = stencil(&gf_sampler, h_chi);
    let (d1q, d2q) = stencil(&gf_sampler, h_chi / 2.0);
    let d1 = (d1q * 16.0 - d1h) / 15.0;
    let d2 = (d2q * 16.0 - d2h) / 15.0;
    let mean = (C64::new(0.0, -1.0) * d1).re;
    let second = -d2.re;
    let mut stats = EnergyStats::from_moments(mean, second, 0.0);
    let estimate = ((d1q - d1h).norm() / 15.0).max((d2q - d2h).norm() / 15.0);
    if estimate > 1e-6 * second.abs().max(1.0) {
        stats.precision_warning = Some(estimate);
    }
    stats
}

/// Exact moments from outcome probabilities and their energies.
pub fn moments_trace(components: &[(f64, f64)]) -> Result<EnergyStats> {
    let total: f64 = components.iter().map(|c| c.0).sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::Normalization(total));
    }
    let mean = components.iter().map(|&(w, e)| w * e).sum();
    let second = components.iter().map(|&(w, e)| w * e * e).sum();
    Ok(EnergyStats::from_moments(mean, second, 0.0))
}

/// Fidelity with `|e⟩`, which for a pure target is the excited population.
pub fn fidelity_excited(rho_qub: &DensityMatrix) -> Result<f64> {
    let l = rho_qub.layout();
    if l.num_qubits() != 1 || l.has_cavity() {
        return Err(Error::LayoutMismatch(
            "fidelity needs a single-qubit state".into(),
        ));
    }
    Ok(rho_qub.entries()[(0, 0)].re.clamp(0.0, 1.0))
}

fn block_weight(a: &CMatrix, rho: &CMatrix) -> f64 {
    (a * rho * a.adjoint()).trace().re
}

/// Outcome weights `Tr(a_{i4} ρ a_{i4}†)` for two ground-state qubits.
pub fn tc2_weights(rho_cav: &CMatrix, g_tau: f64) -> Result<[f64; 4]> {
    let blocks = tc2_block_exp(g_tau, rho_cav.nrows())?;
    Ok([
        block_weight(blocks[0][3].entries(), rho_cav),
        block_weight(blocks[1][3].entries(), rho_cav),
        block_weight(blocks[2][3].entries(), rho_cav),
        block_weight(blocks[3][3].entries(), rho_cav),
    ])
}

fn fock_cavity(n: usize) -> CMatrix {
    let d = n + 3;
    let mut m = CMatrix::zeros(d, d);
    m[(n, n)] = C64::new(1.0, 0.0);
    m
}

/// Energy taken by qubit 1 of two resonant qubits charged from `|N⟩`,
/// computed from the analytic blocks.
pub fn tc2_single_qubit_stats(n: usize, g_tau: f64) -> Result<EnergyStats> {
    if n == 0 {
        return Ok(EnergyStats::zero(g_tau));
    }
    let w = tc2_weights(&fock_cavity(n), g_tau)?;
    Ok(moments_trace(&[(w[0] + w[1], 1.0), (w[2] + w[3], 0.0)])?.at(g_tau))
}

/// Energy taken by both qubits together.
pub fn tc2_two_qubit_stats(n: usize, g_tau: f64) -> Result<EnergyStats> {
    if n == 0 {
        return Ok(EnergyStats::zero(g_tau));
    }
    let w = tc2_weights(&fock_cavity(n), g_tau)?;
    Ok(moments_trace(&[(w[0], 2.0), (w[1] + w[2], 1.0), (w[3], 0.0)])?.at(g_tau))
}
