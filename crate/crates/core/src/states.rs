//! Initial cavity and qubit states.
//!
//! Smooth photon-number distributions are truncated where the tail drops
//! below [`TAIL_TOL`] and renormalised; the discarded mass is reported so
//! callers can put it in a manifest.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{DensityMatrix, HilbertLayout};

/// Largest photon-number tail that may be dropped by truncation.
pub const TAIL_TOL: f64 = 1e-10;
/// Hard cap on the cavity truncation chosen automatically.
pub const MAX_CAVITY_DIM: usize = 64;
/// Below this thermal occupation the noiseless limit is used.
pub const NTH_ZERO: f64 = 1e-12;
/// Largest accepted roundoff estimate for the thermalized-Fock double sum,
/// relative to the total probability mass.
pub const THERMAL_SUM_TOL: f64 = 1e-8;

/// Declarative initial cavity state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CavityStateSpec {
    Fock { n: usize },
    Coherent { alpha: C64 },
    SqueezedCoherent { zeta: C64, alpha_tilde: C64 },
    PhaseRandomizedSqueezed { zeta: C64, alpha_tilde: C64 },
    ThermalizedFock { n: usize, n_th: f64 },
    AttenuatedFock { n: usize, p: f64 },
}

/// A materialised cavity state together with the probability mass that the
/// truncation removed before renormalisation.
#[derive(Clone, Debug)]
pub struct CavityState {
    pub rho: DensityMatrix,
    pub discarded_tail: f64,
}

impl CavityStateSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CavityStateSpec::Coherent { alpha } if !is_finite(alpha) => {
                Err(Error::OutOfRange("alpha must be finite".into()))
            }
            CavityStateSpec::SqueezedCoherent { zeta, alpha_tilde }
            | CavityStateSpec::PhaseRandomizedSqueezed { zeta, alpha_tilde } => {
                if !is_finite(zeta) || !is_finite(alpha_tilde) {
                    Err(Error::OutOfRange(
                        "zeta and alpha_tilde must be finite".into(),
                    ))
                } else {
                    Ok(())
                }
            }
            CavityStateSpec::ThermalizedFock { n_th, .. } if !(n_th >= 0.0 && n_th.is_finite()) => {
                Err(Error::OutOfRange(format!("n_th = {n_th} must be >= 0")))
            }
            CavityStateSpec::AttenuatedFock { p, .. } if !(0.0..=1.0).contains(&p) => {
                Err(Error::OutOfRange(format!("p = {p} must lie in [0, 1]")))
            }
            _ => Ok(()),
        }
    }

    /// Photon budget used to normalise averaged figures of merit. For noisy
    /// Fock states this is the nominal `N`, not the true mean.
    pub fn nominal_mean_photons(&self) -> f64 {
        match *self {
            CavityStateSpec::Fock { n }
            | CavityStateSpec::ThermalizedFock { n, .. }
            | CavityStateSpec::AttenuatedFock { n, .. } => n as f64,
            CavityStateSpec::Coherent { alpha } => alpha.norm_sqr(),
            CavityStateSpec::SqueezedCoherent { zeta, alpha_tilde }
            | CavityStateSpec::PhaseRandomizedSqueezed { zeta, alpha_tilde } => {
                displacement(zeta, alpha_tilde).norm_sqr() + zeta.norm().sinh().powi(2)
            }
        }
    }

    /// Whether the support is bounded by a Fock number.
    pub fn is_fock_class(&self) -> bool {
        matches!(
            self,
            CavityStateSpec::Fock { .. } | CavityStateSpec::AttenuatedFock { .. }
        )
    }

    /// Truncation for a run with `num_qubits` qubits: `N + M + 3` for
    /// Fock-class states, otherwise the smallest dimension whose tail is below
    /// [`TAIL_TOL`] (never below `N + M + 3` for thermalized Fock states).
    pub fn required_cavity_dim(&self, num_qubits: usize) -> Result<usize> {
        self.validate()?;
        let floor = |n: usize| (n + num_qubits + 3).max(2);
        match *self {
            CavityStateSpec::Fock { n } | CavityStateSpec::AttenuatedFock { n, .. } => Ok(floor(n)),
            CavityStateSpec::ThermalizedFock { n, n_th } => {
                let w = thermalized_fock_weights(n, n_th, MAX_CAVITY_DIM)?;
                Ok(tail_dimension(&w, "thermalized Fock state")?.max(floor(n)))
            }
            CavityStateSpec::Coherent { alpha } => tail_dimension(
                &poisson_weights(alpha.norm_sqr(), MAX_CAVITY_DIM),
                "coherent state",
            ),
            CavityStateSpec::SqueezedCoherent { zeta, alpha_tilde } => tail_dimension(
                &squeezed_populations(zeta, alpha_tilde, MAX_CAVITY_DIM)?,
                "squeezed state",
            ),
            CavityStateSpec::PhaseRandomizedSqueezed { zeta, alpha_tilde } => {
                let w = phase_randomized_weights(zeta, alpha_tilde, MAX_CAVITY_DIM)?;
                tail_dimension(&w, "squeezed state")
            }
        }
    }

    pub fn materialize(&self, cavity_dim: usize) -> Result<CavityState> {
        self.validate()?;
        let layout = HilbertLayout::cavity(cavity_dim)?;
        match *self {
            CavityStateSpec::Fock { n } => Ok(CavityState {
                rho: make_fock(n, cavity_dim)?,
                discarded_tail: 0.0,
            }),
            CavityStateSpec::AttenuatedFock { n, p } => Ok(CavityState {
                rho: make_attenuated_fock(n, p, cavity_dim)?,
                discarded_tail: 0.0,
            }),
            CavityStateSpec::Coherent { alpha } => {
                let long = poisson_weights(alpha.norm_sqr(), cavity_dim.max(4 * MAX_CAVITY_DIM));
                ensure_dim(&long, cavity_dim, "coherent state")?;
                let amps = coherent_amplitudes(alpha, cavity_dim);
                pure_truncated(layout, amps, "coherent state")
            }
            CavityStateSpec::SqueezedCoherent { zeta, alpha_tilde } => {
                let long =
                    squeezed_populations(zeta, alpha_tilde, cavity_dim.max(4 * MAX_CAVITY_DIM))?;
                ensure_dim(&long, cavity_dim, "squeezed coherent state")?;
                let amps = squeezed_amplitudes(zeta, alpha_tilde, cavity_dim)?;
                pure_truncated(layout, amps, "squeezed coherent state")
            }
            CavityStateSpec::PhaseRandomizedSqueezed { zeta, alpha_tilde } => {
                let long = phase_randomized_weights(
                    zeta,
                    alpha_tilde,
                    cavity_dim.max(4 * MAX_CAVITY_DIM),
                )?;
                ensure_dim(&long, cavity_dim, "phase-randomized squeezed state")?;
                let w = phase_randomized_weights(zeta, alpha_tilde, cavity_dim)?;
                diagonal_truncated(layout, w, "phase-randomized squeezed state")
            }
            CavityStateSpec::ThermalizedFock { n, n_th } => {
                let w = thermalized_fock_weights(n, n_th, cavity_dim)?;
                diagonal_truncated(layout, w, "thermalized Fock state")
            }
        }
    }
}

fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn tail_dimension(weights: &[f64], what: &str) -> Result<usize> {
    let mut kept = 0.0;
    for (d, w) in weights.iter().enumerate() {
        kept += w;
        if 1.0 - kept < TAIL_TOL && d + 1 >= 2 {
            return Ok(d + 1);
        }
    }
    Err(Error::Truncation {
        what: format!("{what} (tail {:.3e} at the cap)", 1.0 - kept),
        required: weights.len() + 1,
        given: weights.len(),
    })
}

fn check_tail(kept: f64, cavity_dim: usize, what: &str) -> Result<f64> {
    let tail = (1.0 - kept).max(0.0);
    if tail >= TAIL_TOL {
        return Err(Error::Truncation {
            what: format!("{what} (tail {tail:.3e})"),
            required: cavity_dim + 1,
            given: cavity_dim,
        });
    }
    Ok(tail)
}

fn pure_truncated(layout: HilbertLayout, amps: Vec<C64>, what: &str) -> Result<CavityState> {
    let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    let tail = check_tail(kept, layout.dim(), what)?;
    let s = kept.sqrt();
    let normed: Vec<C64> = amps.iter().map(|a| a / s).collect();
    Ok(CavityState {
        rho: DensityMatrix::pure(layout, &normed)?,
        discarded_tail: tail,
    })
}

/// Fails with the dimension actually required when `cavity_dim` cuts off more
/// than [`TAIL_TOL`] of `weights` (which must extend past `cavity_dim`).
fn ensure_dim(weights: &[f64], cavity_dim: usize, what: &str) -> Result<()> {
    let kept: f64 = weights.iter().take(cavity_dim).sum();
    if 1.0 - kept < TAIL_TOL {
        return Ok(());
    }
    let required = tail_dimension(weights, what)?;
    Err(Error::Truncation {
        what: format!("{what} (tail {:.3e})", 1.0 - kept),
        required,
        given: cavity_dim,
    })
}

fn diagonal_truncated(layout: HilbertLayout, weights: Vec<f64>, what: &str) -> Result<CavityState> {
    let kept: f64 = weights.iter().sum();
    let tail = check_tail(kept, layout.dim(), what)?;
    let normed: Vec<f64> = weights.iter().map(|w| w / kept).collect();
    Ok(CavityState {
        rho: DensityMatrix::from_diagonal(layout, &normed)?,
        discarded_tail: tail,
    })
}

/// `|N⟩⟨N|`.
pub fn make_fock(n: usize, cavity_dim: usize) -> Result<DensityMatrix> {
    if n >= cavity_dim {
        return Err(Error::Truncation {
            what: format!("Fock state |{n}>"),
            required: n + 1,
            given: cavity_dim,
        });
    }
    let mut w = vec![0.0; cavity_dim];
    w[n] = 1.0;
    DensityMatrix::from_diagonal(HilbertLayout::cavity(cavity_dim)?, &w)
}

/// Poisson weights `e^{-λ} λ^n / n!` for `n < count`.
pub fn poisson_weights(lambda: f64, count: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(count);
    let mut log_term = -lambda;
    for n in 0..count {
        if n > 0 {
            log_term += lambda.ln() - (n as f64).ln();
        }
        w.push(if lambda == 0.0 {
            if n == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            log_term.exp()
        });
    }
    w
}

/// Coherent-state amplitudes `e^{-|α|²/2} αⁿ/√n!`.
pub fn coherent_amplitudes(alpha: C64, count: usize) -> Vec<C64> {
    let mut amps = Vec::with_capacity(count);
    let mut a = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..count {
        if n > 0 {
            a = a * alpha / (n as f64).sqrt();
        }
        amps.push(a);
    }
    amps
}

/// Pure coherent state, renormalised on the truncation.
pub fn make_coherent(alpha: C64, cavity_dim: usize) -> Result<DensityMatrix> {
    Ok(CavityStateSpec::Coherent { alpha }
        .materialize(cavity_dim)?
        .rho)
}

/// Displacement `α` entering the Hermite expansion for the pair `(ζ, α̃)`:
/// `α = α̃ cosh r − α̃* e^{iφ} sinh r`, i.e. the state `S(ζ) D(α̃) |0⟩`,
/// whose mean photon number is `α̃² e^{−2r} + sinh² r` for real parameters.
pub fn displacement(zeta: C64, alpha_tilde: C64) -> C64 {
    let r = zeta.norm();
    let phase = if r > 0.0 {
        zeta / r
    } else {
        C64::new(1.0, 0.0)
    };
    alpha_tilde * r.cosh() - alpha_tilde.conj() * phase * r.sinh()
}

/// Amplitudes `p_n(ζ, α)` of the squeezed coherent state for `n < count`.
///
/// The Hermite series is evaluated through the scaled recurrence
/// `K_{n+1} = ((α + α* u) K_n − u √n K_{n−1}) / √(n+1)` with
/// `u = e^{iφ} tanh r`, which avoids the `√u` branch and the growth of `H_n`.
pub fn squeezed_amplitudes(zeta: C64, alpha_tilde: C64, count: usize) -> Result<Vec<C64>> {
    let r = zeta.norm();
    let phase = if r > 0.0 {
        zeta / r
    } else {
        C64::new(1.0, 0.0)
    };
    let alpha = displacement(zeta, alpha_tilde);
    let u = phase * r.tanh();
    let pref =
        (-(alpha.norm_sqr() + alpha.conj() * alpha.conj() * u) / 2.0).exp() / r.cosh().sqrt();
    let drive = alpha + alpha.conj() * u;
    let mut amps = Vec::with_capacity(count);
    let (mut k_prev, mut k) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    for n in 0..count {
        let p = pref * k;
        if !is_finite(p) || !is_finite(k) {
            return Err(Error::Overflow(format!(
                "squeezed amplitude recurrence overflowed at n = {n} (r = {r})"
            )));
        }
        amps.push(p);
        let next = (drive * k - u * (n as f64).sqrt() * k_prev) / ((n + 1) as f64).sqrt();
        k_prev = k;
        k = next;
    }
    Ok(amps)
}

/// `|p_n|²`. Differs from [`phase_randomized_weights`] once `α̃` and `ζ`
/// carry a relative phase.
fn squeezed_populations(zeta: C64, alpha_tilde: C64, count: usize) -> Result<Vec<f64>> {
    Ok(squeezed_amplitudes(zeta, alpha_tilde, count)?
        .iter()
        .map(|p| p.norm_sqr())
        .collect())
}

/// Pure squeezed coherent state, renormalised on the truncation.
pub fn make_squeezed_coherent(
    zeta: C64,
    alpha_tilde: C64,
    cavity_dim: usize,
) -> Result<DensityMatrix> {
    Ok(CavityStateSpec::SqueezedCoherent { zeta, alpha_tilde }
        .materialize(cavity_dim)?
        .rho)
}

/// Photon-number distribution of the phase-randomized squeezed state. It
/// depends on `r` and `|α|` only and equals `p_n²` for real parameters.
pub fn phase_randomized_weights(zeta: C64, alpha_tilde: C64, count: usize) -> Result<Vec<f64>> {
    let r = zeta.norm();
    let a = displacement(zeta, alpha_tilde).norm();
    // Evaluate at real ζ = r and real displacement |α|: pick α̃ so that the
    // mapped displacement is |α| (α̃ = |α| e^{r} for real ζ).
    let amps = squeezed_amplitudes(C64::new(r, 0.0), C64::new(a * r.exp(), 0.0), count)?;
    Ok(amps.iter().map(|p| p.norm_sqr()).collect())
}

/// Diagonal phase-randomized squeezed state, renormalised on the truncation.
pub fn make_phase_randomized(
    zeta: C64,
    alpha_tilde: C64,
    cavity_dim: usize,
) -> Result<DensityMatrix> {
    Ok(
        CavityStateSpec::PhaseRandomizedSqueezed { zeta, alpha_tilde }
            .materialize(cavity_dim)?
            .rho,
    )
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Weights `p_m(n̄, N)` of a Fock state exposed to additive thermal noise,
/// for `m < count`.
///
/// The alternating double sum is accumulated in log space with explicit
/// signs. A roundoff estimate `4ε Σ|terms|` is tracked per `m`; when the
/// total estimate exceeds [`THERMAL_SUM_TOL`] the parameters are rejected.
pub fn thermalized_fock_weights(n: usize, n_th: f64, count: usize) -> Result<Vec<f64>> {
    if !(n_th >= 0.0) || !n_th.is_finite() {
        return Err(Error::OutOfRange(format!("n_th = {n_th} must be >= 0")));
    }
    if n_th < NTH_ZERO {
        let mut w = vec![0.0; count];
        if n < count {
            w[n] = 1.0;
        }
        return Ok(w);
    }
    let ln_x = (n_th / (n_th + 1.0)).ln();
    let ln_pref_common = -ln_factorial(n) - (1.0 + n_th).ln();
    let mut weights = Vec::with_capacity(count);
    let mut roundoff = 0.0;
    let mut logs: Vec<(f64, f64)> = Vec::new();
    for m in 0..count {
        logs.clear();
        let k_min = m.saturating_sub(n);
        let ln_pref = ln_factorial(m) + ln_pref_common;
        for k in k_min..=m {
            for kp in k_min..=m {
                // exponent e = k + k' + N − m ≥ |N − m| ≥ 0 on the support
                let e = k + kp + n - m;
                let lt = ln_pref - ln_factorial(k) - ln_factorial(kp)
                    + ln_binomial(n, m - k)
                    + ln_binomial(n, m - kp)
                    + ln_factorial(e)
                    + e as f64 * ln_x;
                let sign = if (k + kp) % 2 == 0 { 1.0 } else { -1.0 };
                logs.push((sign, lt));
            }
        }
        let top = logs.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
        let (mut sum, mut abs_sum) = (0.0, 0.0);
        for &(s, lt) in &logs {
            let v = (lt - top).exp();
            sum += s * v;
            abs_sum += v;
        }
        let scale = top.exp();
        roundoff += 4.0 * f64::EPSILON * abs_sum * scale * logs.len() as f64;
        weights.push((sum * scale).max(0.0));
    }
    if roundoff > THERMAL_SUM_TOL {
        return Err(Error::OutOfRange(format!(
            "thermalized Fock sum for N = {n}, n_th = {n_th} loses precision (estimate {roundoff:.2e})"
        )));
    }
    Ok(weights)
}

/// Fock state with additive thermal noise.
pub fn make_thermalized_fock(n: usize, n_th: f64, cavity_dim: usize) -> Result<DensityMatrix> {
    Ok(CavityStateSpec::ThermalizedFock { n, n_th }
        .materialize(cavity_dim)?
        .rho)
}

/// Binomial weights of `|N⟩` sent through a beam splitter of transmission `p`.
pub fn attenuated_fock_weights(n: usize, p: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange(format!("p = {p} must lie in [0, 1]")));
    }
    let mut w = vec![0.0; n + 1];
    let mut c = 1.0;
    for (k, wk) in w.iter_mut().enumerate() {
        if k > 0 {
            c = c * (n + 1 - k) as f64 / k as f64;
        }
        *wk = c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
    }
    Ok(w)
}

pub fn make_attenuated_fock(n: usize, p: f64, cavity_dim: usize) -> Result<DensityMatrix> {
    let w = attenuated_fock_weights(n, p)?;
    if n >= cavity_dim {
        return Err(Error::Truncation {
            what: format!("attenuated Fock state with N = {n}"),
            required: n + 1,
            given: cavity_dim,
        });
    }
    let mut full = vec![0.0; cavity_dim];
    full[..=n].copy_from_slice(&w);
    DensityMatrix::from_diagonal(HilbertLayout::cavity(cavity_dim)?, &full)
}

/// Qubit prepared in `q|e⟩⟨e| + (1−q)|g⟩⟨g|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitStateSpec {
    pub q: f64,
}

impl QubitStateSpec {
    pub fn ground() -> Self {
        Self { q: 0.0 }
    }

    pub fn materialize(&self) -> Result<DensityMatrix> {
        make_qubit(self.q)
    }
}

pub fn make_qubit(q: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::OutOfRange(format!("q = {q} must lie in [0, 1]")));
    }
    DensityMatrix::from_diagonal(HilbertLayout::qubits(1)?, &[q, 1.0 - q])
}

/// Real `α̃ ≥ 0` giving mean photon number `mean` at squeezing `r`, or
/// `None` when `sinh² r` alone exceeds the budget.
pub fn alpha_tilde_for_mean(r: f64, mean: f64) -> Option<f64> {
    let coherent_part = mean - r.sinh().powi(2);
    if coherent_part < 0.0 {
        None
    } else {
        Some((coherent_part * (2.0 * r).exp()).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn mean(w: &[f64]) -> f64 {
        w.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    #[test]
    fn fock_projector() {
        let rho = make_fock(5, 16).unwrap();
        assert_eq!(rho.diagonal()[5], 1.0);
        assert_eq!(rho.mean_photons(), Some(5.0));
        assert!(make_fock(16, 16).is_err());
    }

    #[test]
    fn coherent_poisson_point() {
        let rho = make_coherent(re(5f64.sqrt()), 40).unwrap();
        let p5 = (-5f64).exp() * 5f64.powi(5) / 120.0;
        assert!((rho.diagonal()[5] - p5).abs() < 1e-12);
        assert!((rho.mean_photons().unwrap() - 5.0).abs() < 1e-8);
        let spec = CavityStateSpec::Coherent {
            alpha: re(5f64.sqrt()),
        };
        match spec.materialize(10) {
            Err(Error::Truncation { required, .. }) => assert!(required > 20),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn squeezed_reduces_to_coherent() {
        let a = C64::new(1.3, -0.4);
        let s = squeezed_amplitudes(re(0.0), a, 30).unwrap();
        let c = coherent_amplitudes(a, 30);
        for (x, y) in s.iter().zip(&c) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn squeezed_mean_matches_convention() {
        let spec = CavityStateSpec::SqueezedCoherent {
            zeta: re(0.6),
            alpha_tilde: re(3.905),
        };
        let d = spec.required_cavity_dim(1).unwrap();
        let rho = spec.materialize(d).unwrap().rho;
        assert!((rho.mean_photons().unwrap() - 5.0).abs() < 1e-2);
        for &(r, a) in &[(0.3, 1.7), (0.9, 2.2), (0.05, 0.5)] {
            let w = phase_randomized_weights(re(r), re(a), 200).unwrap();
            let expect = a * a * (-2.0 * r).exp() + r.sinh().powi(2);
            assert!((mean(&w) - expect).abs() < 1e-9, "r={r} a={a}");
        }
    }

    #[test]
    fn phase_randomized_equals_squared_amplitudes() {
        let p = squeezed_amplitudes(re(0.6), re(3.905), 64).unwrap();
        let w = phase_randomized_weights(re(0.6), re(3.905), 64).unwrap();
        for (a, b) in p.iter().zip(&w) {
            assert!((a.norm_sqr() - b).abs() < 1e-10);
        }
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        let vac = make_phase_randomized(re(0.0), re(0.0), 4).unwrap();
        assert_eq!(vac.diagonal()[0], 1.0);
    }

    #[test]
    fn thermal_reduction_at_zero_photons() {
        for &nth in &[0.02, 0.1, 0.2, 1.5] {
            let w = thermalized_fock_weights(0, nth, 30).unwrap();
            for (m, p) in w.iter().enumerate() {
                let expect = nth.powi(m as i32) / (1.0 + nth).powi(m as i32 + 1);
                assert!((p - expect).abs() < 1e-12, "m={m} nth={nth}");
            }
        }
    }

    #[test]
    fn thermal_normalisation_and_mean() {
        let w = thermalized_fock_weights(5, 0.2, 64).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        assert!((mean(&w) - 5.2).abs() < 1e-8);
        let z = thermalized_fock_weights(3, 0.0, 8).unwrap();
        assert_eq!(z[3], 1.0);
        assert!(thermalized_fock_weights(3, -0.1, 8).is_err());
    }

    #[test]
    fn attenuation() {
        let rho = make_attenuated_fock(5, 0.95, 9).unwrap();
        assert!((rho.mean_photons().unwrap() - 4.75).abs() < 1e-12);
        assert_eq!(make_attenuated_fock(5, 1.0, 9).unwrap().diagonal()[5], 1.0);
        assert_eq!(make_attenuated_fock(5, 0.0, 9).unwrap().diagonal()[0], 1.0);
        assert!(make_attenuated_fock(5, 1.2, 9).is_err());
    }

    #[test]
    fn qubit_mixtures() {
        assert_eq!(make_qubit(0.0).unwrap().diagonal(), vec![0.0, 1.0]);
        assert_eq!(make_qubit(0.5).unwrap().diagonal(), vec![0.5, 0.5]);
        assert_eq!(make_qubit(1.0).unwrap().diagonal(), vec![1.0, 0.0]);
        assert!(make_qubit(1.5).is_err());
    }

    #[test]
    fn truncation_rules() {
        assert_eq!(
            CavityStateSpec::Fock { n: 5 }
                .required_cavity_dim(5)
                .unwrap(),
            13
        );
        let d = CavityStateSpec::ThermalizedFock { n: 5, n_th: 0.02 }
            .required_cavity_dim(1)
            .unwrap();
        assert!(d >= 9);
        let alpha = alpha_tilde_for_mean(0.6, 5.0).unwrap();
        assert!((alpha - 3.905).abs() < 2e-3);
        assert!(alpha_tilde_for_mean(2.0, 1.0).is_none());
    }
}
