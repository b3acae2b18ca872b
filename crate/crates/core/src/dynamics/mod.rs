//! Hamiltonians and propagation of (tilted) density matrices.
//!
//! Time is physical time in units of `1/ω_qub`; callers convert from the
//! dimensionless `g·τ` used in reports with [`ModelParams::time_from_g_tau`].

mod analytic;
mod ode;
mod spectral;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{CMatrix, DensityMatrix, FockOperator, HilbertLayout};

pub use analytic::{jc_evolution, tc2_block_exp, tc2_evolution, BlockGrid};
pub use ode::{integrate_tilted, DrivenTilt, OdeOptions, OdeSamples};
pub use spectral::{MultiProbe, Probe, SpectralPropagator};

/// Shape of the coupling strength over one interaction window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CouplingProfile {
    Constant,
    /// Square pulse with logistic edges. Both parameters are dimensionless
    /// products with `g`: `g_delta = g·δ`, `g_t_tilde = g·t̃`.
    SmoothedSquare {
        g_delta: f64,
        g_t_tilde: f64,
    },
}

impl CouplingProfile {
    pub fn is_constant(&self) -> bool {
        matches!(self, CouplingProfile::Constant)
    }

    /// Pulse edges `(g·t₁, g·t₂)` with `t₁ = 20 gδ t̃` and `t₂ = 2t̃ − t₁`.
    pub fn edges(&self) -> Option<(f64, f64)> {
        match *self {
            CouplingProfile::Constant => None,
            CouplingProfile::SmoothedSquare { g_delta, g_t_tilde } => {
                let t1 = 20.0 * g_delta * g_t_tilde;
                Some((t1, 2.0 * g_t_tilde - t1))
            }
        }
    }

    /// `J / g` at dimensionless time `x = g·t`.
    pub fn shape(&self, x: f64) -> f64 {
        match *self {
            CouplingProfile::Constant => 1.0,
            CouplingProfile::SmoothedSquare { g_delta, .. } => {
                let (t1, t2) = self.edges().unwrap();
                if x < t1 + 10.0 * g_delta {
                    1.0 / (1.0 + (-(x - t1) / g_delta).exp())
                } else if x <= t2 - 10.0 * g_delta {
                    1.0
                } else {
                    1.0 / (1.0 + ((x - t2) / g_delta).exp())
                }
            }
        }
    }

    /// Dimensionless times where the piecewise definition switches branch.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            CouplingProfile::Constant => vec![],
            CouplingProfile::SmoothedSquare { g_delta, .. } => {
                let (t1, t2) = self.edges().unwrap();
                let mut b = vec![t1 + 10.0 * g_delta, t2 - 10.0 * g_delta];
                b.retain(|x| *x > 0.0);
                b.sort_by(f64::total_cmp);
                b
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let CouplingProfile::SmoothedSquare { g_delta, g_t_tilde } = *self {
            if !(g_delta > 0.0 && g_delta.is_finite())
                || !(g_t_tilde > 0.0 && g_t_tilde.is_finite())
            {
                return Err(Error::OutOfRange(format!(
                    "smoothed-square profile needs g_delta > 0 and g_t_tilde > 0, got {g_delta}, {g_t_tilde}"
                )));
            }
        }
        Ok(())
    }
}

/// Frequencies (units of `ω_qub`) and coupling of the qubit–cavity model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega_qub: f64,
    pub omega_cav: f64,
    pub g: f64,
    /// `true`: Jaynes/Tavis-Cummings. `false`: Rabi (counter-rotating terms kept).
    pub rwa: bool,
    pub coupling: CouplingProfile,
}

impl ModelParams {
    /// Resonant RWA model with constant coupling `g`.
    pub fn resonant(g: f64) -> Self {
        Self {
            omega_qub: 1.0,
            omega_cav: 1.0,
            g,
            rwa: true,
            coupling: CouplingProfile::Constant,
        }
    }

    /// Sets `ω_cav = ω_qub (1 − ratio)`, i.e. `Δω / ω_qub = ratio`.
    pub fn with_detuning_ratio(mut self, ratio: f64) -> Self {
        self.omega_cav = self.omega_qub * (1.0 - ratio);
        self
    }

    pub fn detuning(&self) -> f64 {
        self.omega_qub - self.omega_cav
    }

    pub fn is_resonant(&self) -> bool {
        self.detuning() == 0.0
    }

    pub fn time_from_g_tau(&self, g_tau: f64) -> f64 {
        g_tau / self.g
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x > 0.0 && x.is_finite();
        if !ok(self.g) || !ok(self.omega_qub) || !ok(self.omega_cav) {
            return Err(Error::OutOfRange(format!(
                "g, omega_qub and omega_cav must be positive (got {}, {}, {})",
                self.g, self.omega_qub, self.omega_cav
            )));
        }
        self.coupling.validate()
    }
}

/// Which qubits the counting field couples to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TiltGenerator {
    SingleQubit(usize),
    AllQubits,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TiltSpec {
    pub generator: TiltGenerator,
    pub chi: f64,
}

/// `ω_qub Σ σz/2 + ω_cav a†a`.
pub fn free_hamiltonian(params: &ModelParams, layout: &HilbertLayout) -> Result<FockOperator> {
    let d = layout
        .cavity_dim()
        .ok_or_else(|| Error::LayoutMismatch("Hamiltonian needs a cavity".into()))?;
    let mut diag = vec![0.0; layout.dim()];
    for (i, v) in diag.iter_mut().enumerate() {
        let exc = layout.excited_count(i) as f64;
        let m = layout.num_qubits() as f64;
        *v = params.omega_qub * (exc - m / 2.0) + params.omega_cav * (i % d) as f64;
    }
    FockOperator::new(*layout, diag_matrix(&diag), "H_free")
}

fn diag_matrix(v: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        v.len(),
        v.iter().map(|&x| C64::new(x, 0.0)),
    ))
}

/// Sum over qubits of single-excitation hops. `raise` picks `σ₊` acting
/// with the cavity step `dn` (−1 for `a`, +1 for `a†`); the Hermitian
/// partner is added alongside.
fn qubit_cavity_hops(layout: &HilbertLayout, dn: isize, label: &str) -> Result<FockOperator> {
    let d = layout
        .cavity_dim()
        .ok_or_else(|| Error::LayoutMismatch("interaction needs a cavity".into()))?;
    let m = layout.num_qubits();
    let dim = layout.dim();
    let mut h = CMatrix::zeros(dim, dim);
    for src in 0..dim {
        let (bits, n) = (src / d, src % d);
        let target_n = n as isize + dn;
        if target_n < 0 || target_n >= d as isize {
            continue;
        }
        let target_n = target_n as usize;
        let amp = (n.max(target_n) as f64).sqrt();
        for j in 1..=m {
            // σ₊ takes qubit j from |g⟩ to |e⟩
            if layout.qubit_excited(src, j) {
                continue;
            }
            let dst = (bits ^ (1 << (m - j))) * d + target_n;
            h[(dst, src)] += C64::new(amp, 0.0);
            h[(src, dst)] += C64::new(amp, 0.0);
        }
    }
    FockOperator::new(*layout, h, label)
}

/// `Σ_j (σ₊⁽ʲ⁾ a + σ₋⁽ʲ⁾ a†)` at unit coupling.
pub fn rwa_interaction(layout: &HilbertLayout) -> Result<FockOperator> {
    qubit_cavity_hops(layout, -1, "H_int")
}

/// `Σ_j (σ₊⁽ʲ⁾ a† + σ₋⁽ʲ⁾ a)` at unit coupling.
pub fn counter_rotating(layout: &HilbertLayout) -> Result<FockOperator> {
    qubit_cavity_hops(layout, 1, "H_crt")
}

/// Interaction at unit coupling for the chosen model (RWA or Rabi).
pub fn interaction(params: &ModelParams, layout: &HilbertLayout) -> Result<FockOperator> {
    if params.rwa {
        rwa_interaction(layout)
    } else {
        Ok(rwa_interaction(layout)?
            .add(&counter_rotating(layout)?)?
            .with_label("H_int+crt"))
    }
}

fn require_rwa(params: &ModelParams, want: bool, what: &str) -> Result<()> {
    if params.rwa != want {
        return Err(Error::UnsupportedRegime(format!(
            "{what} requires rwa = {want}"
        )));
    }
    Ok(())
}

pub fn jc_hamiltonian(params: &ModelParams, layout: &HilbertLayout) -> Result<FockOperator> {
    require_rwa(params, true, "jc_hamiltonian")?;
    if layout.num_qubits() != 1 {
        return Err(Error::LayoutMismatch(
            "jc_hamiltonian needs exactly one qubit".into(),
        ));
    }
    tc_hamiltonian(params, layout).map(|h| h.with_label("H_JC"))
}

pub fn tc_hamiltonian(params: &ModelParams, layout: &HilbertLayout) -> Result<FockOperator> {
    require_rwa(params, true, "tc_hamiltonian")?;
    let h = free_hamiltonian(params, layout)?
        .add(&rwa_interaction(layout)?.scale(C64::new(params.g, 0.0)))?;
    Ok(h.with_label("H_TC"))
}

pub fn rabi_hamiltonian(params: &ModelParams, layout: &HilbertLayout) -> Result<FockOperator> {
    require_rwa(params, false, "rabi_hamiltonian")?;
    if layout.num_qubits() != 1 {
        return Err(Error::LayoutMismatch(
            "rabi_hamiltonian needs exactly one qubit".into(),
        ));
    }
    let h = free_hamiltonian(params, layout)?
        .add(&interaction(params, layout)?.scale(C64::new(params.g, 0.0)))?;
    Ok(h.with_label("H_Rabi"))
}

/// Full Hamiltonian with constant coupling for the chosen model.
pub fn hamiltonian(params: &ModelParams, layout: &HilbertLayout) -> Result<FockOperator> {
    if params.rwa {
        tc_hamiltonian(params, layout)
    } else {
        rabi_hamiltonian(params, layout)
    }
}

/// `J(t)` in units of `ω_qub` at physical time `t`.
pub fn coupling_j(t: f64, params: &ModelParams) -> f64 {
    params.g * params.coupling.shape(params.g * t)
}

/// Diagonal of the qubit energy `ω_qub Σ_{j∈tilt} σz⁽ʲ⁾/2` whose increments
/// are counted.
pub fn counted_energy(
    layout: &HilbertLayout,
    generator: TiltGenerator,
    omega_qub: f64,
) -> Result<Vec<f64>> {
    let m = layout.num_qubits();
    if let TiltGenerator::SingleQubit(j) = generator {
        if j == 0 || j > m {
            return Err(Error::OutOfRange(format!("tilt qubit {j} outside 1..={m}")));
        }
    }
    Ok((0..layout.dim())
        .map(|i| match generator {
            TiltGenerator::SingleQubit(j) => {
                if layout.qubit_excited(i, j) {
                    omega_qub / 2.0
                } else {
                    -omega_qub / 2.0
                }
            }
            TiltGenerator::AllQubits => {
                omega_qub * (layout.excited_count(i) as f64 - m as f64 / 2.0)
            }
        })
        .collect())
}

/// `(e^{iχH_q/2} H e^{−iχH_q/2}, e^{−iχH_q/2} H e^{iχH_q/2})` for the
/// counted qubit energy `H_q`. `H_q` is diagonal, so the conjugation is an
/// exact elementwise phase; this handles RWA and Rabi interactions alike.
pub fn tilt_interaction(
    h_int: &FockOperator,
    layout: &HilbertLayout,
    tilt: TiltSpec,
    omega_qub: f64,
) -> Result<(FockOperator, FockOperator)> {
    if h_int.layout() != layout {
        return Err(Error::LayoutMismatch("tilted operator layout".into()));
    }
    let e = counted_energy(layout, tilt.generator, omega_qub)?;
    let n = layout.dim();
    let src = h_int.entries();
    let mut plus = src.clone();
    let mut minus = src.clone();
    for i in 0..n {
        for j in 0..n {
            let z = src[(i, j)];
            if z.re == 0.0 && z.im == 0.0 {
                continue;
            }
            let phase = C64::new(0.0, tilt.chi * (e[i] - e[j]) / 2.0).exp();
            plus[(i, j)] = z * phase;
            minus[(i, j)] = z * phase.conj();
        }
    }
    Ok((
        FockOperator::new(*layout, plus, format!("{}[+χ]", h_int.label()))?,
        FockOperator::new(*layout, minus, format!("{}[-χ]", h_int.label()))?,
    ))
}

/// Tilted full Hamiltonians `H_free + g·H_int,±χ` for a constant coupling.
pub fn tilted_hamiltonians(
    params: &ModelParams,
    layout: &HilbertLayout,
    tilt: TiltSpec,
) -> Result<(FockOperator, FockOperator)> {
    let h_free = free_hamiltonian(params, layout)?;
    let h_int = interaction(params, layout)?.scale(C64::new(params.g, 0.0));
    let (p, m) = tilt_interaction(&h_int, layout, tilt, params.omega_qub)?;
    Ok((h_free.add(&p)?, h_free.add(&m)?))
}

/// Diagonal generator `ω_cav (N + Σσz/2)` that commutes with every RWA
/// Hamiltonian; removing it makes the remaining dynamics slow.
pub fn excitation_frame(params: &ModelParams, layout: &HilbertLayout) -> Result<Vec<f64>> {
    let d = layout
        .cavity_dim()
        .ok_or_else(|| Error::LayoutMismatch("frame needs a cavity".into()))?;
    let m = layout.num_qubits() as f64;
    Ok((0..layout.dim())
        .map(|i| params.omega_cav * ((i % d) as f64 + layout.excited_count(i) as f64 - m / 2.0))
        .collect())
}

/// Result of propagating a tilted density matrix to a single time.
#[derive(Clone, Debug)]
pub struct TiltedState {
    pub layout: HilbertLayout,
    pub entries: CMatrix,
    pub time: f64,
}

impl TiltedState {
    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }
}

/// `ρ_χ(t) = U_{+χ} ρ₀ U_{−χ}†` for time-independent Hamiltonians.
///
/// The exponentials are taken block by block from Hermitian
/// eigendecompositions, which is exact for the real counting fields used
/// here; non-Hermitian blocks fall back to Padé exponentials.
pub fn propagate_tilted(
    rho0: &DensityMatrix,
    h_plus: &FockOperator,
    h_minus: &FockOperator,
    t: f64,
) -> Result<TiltedState> {
    if rho0.layout() != h_plus.layout() || rho0.layout() != h_minus.layout() {
        return Err(Error::LayoutMismatch("propagate_tilted operands".into()));
    }
    let prop = SpectralPropagator::new(h_plus, h_minus)?;
    Ok(TiltedState {
        layout: *rho0.layout(),
        entries: prop.evolve(rho0.entries(), t),
        time: t,
    })
}

/// Time-dependent counterpart of [`propagate_tilted`]: tilted Hamiltonians
/// with coupling `J(t)` integrated by an adaptive Dormand–Prince scheme.
pub fn propagate_tilted_driven(
    rho0: &DensityMatrix,
    params: &ModelParams,
    tilt: TiltSpec,
    t: f64,
    tol: f64,
) -> Result<TiltedState> {
    let layout = *rho0.layout();
    let drive = DrivenTilt::new(params, &layout, tilt)?;
    let opts = OdeOptions {
        rtol: tol,
        atol: tol,
        ..OdeOptions::default()
    };
    let out = integrate_tilted(&drive, rho0.entries(), &[t], &[], true, &opts)?;
    Ok(TiltedState {
        layout,
        entries: out.states.into_iter().next().flatten().unwrap(),
        time: t,
    })
}
