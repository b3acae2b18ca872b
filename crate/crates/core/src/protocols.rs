//! Sequential and parallel charging protocols.
//!
//! A window couples one or more fresh qubits to the current cavity state,
//! sweeps a grid of interaction times and records energy statistics and
//! fidelity at each of them. Sequential runs chain `M` single-qubit windows,
//! carrying the cavity state over; parallel runs use one `M`-qubit window.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    counted_energy, hamiltonian, integrate_tilted, tilted_hamiltonians, DrivenTilt, ModelParams,
    OdeOptions, SpectralPropagator, TiltGenerator, TiltSpec,
};
use crate::error::{Error, Result};
use crate::fcs::{moments_fd, moments_trace, tc2_weights, EnergyStats, Snr, FD_STEP};
use crate::fockspace::{partial_trace, CMatrix, DensityMatrix, HilbertLayout, Subsystem, Tensor};
use crate::par;
use crate::states::{CavityStateSpec, QubitStateSpec};

/// Largest number of qubits accepted by a parallel run.
pub const MAX_PARALLEL_QUBITS: usize = 6;
/// Largest joint dimension `2^M · cavity_dim`.
pub const MAX_DIM: usize = 4096;
/// Growth of the top cavity level population tolerated within one window.
pub const EDGE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    Sequential,
    Parallel,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowObjective {
    #[default]
    MaxSnr,
    MaxFidelity,
}

/// How the first two moments are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MomentMethod {
    /// Outcome probabilities of the two-point measurement, read off the
    /// untilted evolution of each initial energy branch.
    #[default]
    Trace,
    /// Finite differences of the tilted trace.
    FiniteDifference { h_chi: f64 },
}

impl MomentMethod {
    pub fn finite_difference() -> Self {
        MomentMethod::FiniteDifference { h_chi: FD_STEP }
    }
}

/// Uniform grid `g·τ ∈ [0, g_tau_max]` used in every window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauGrid {
    pub points: usize,
    /// `None`: `1.5π / √max(1, ⟨n⟩ − j + 1)` for window `j`.
    pub g_tau_max: Option<f64>,
}

impl Default for TauGrid {
    fn default() -> Self {
        Self {
            points: 2002,
            g_tau_max: None,
        }
    }
}

impl TauGrid {
    pub fn window_max(&self, mean_photons: f64, window: usize) -> f64 {
        self.g_tau_max
            .unwrap_or_else(|| 1.5 * PI / (mean_photons - window as f64 + 1.0).max(1.0).sqrt())
    }

    pub fn values(&self, g_tau_max: f64) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| g_tau_max * i as f64 / last)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.points < 100 {
            return Err(Error::OutOfRange(format!(
                "tau grid needs >= 100 points, got {}",
                self.points
            )));
        }
        if let Some(x) = self.g_tau_max {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::OutOfRange(format!(
                    "g_tau_max = {x} must be positive"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    pub num_qubits: usize,
    pub cavity: CavityStateSpec,
    pub qubit: QubitStateSpec,
    pub params: ModelParams,
    pub tau_grid: TauGrid,
    pub window_objective: WindowObjective,
    pub method: MomentMethod,
    /// Overrides the automatic truncation.
    pub cavity_dim: Option<usize>,
    /// Tolerance for time-dependent couplings.
    pub ode_tol: f64,
}

impl ProtocolSpec {
    pub fn new(
        kind: ProtocolKind,
        num_qubits: usize,
        cavity: CavityStateSpec,
        params: ModelParams,
    ) -> Self {
        Self {
            kind,
            num_qubits,
            cavity,
            qubit: QubitStateSpec::ground(),
            params,
            tau_grid: TauGrid::default(),
            window_objective: WindowObjective::default(),
            method: MomentMethod::default(),
            cavity_dim: None,
            ode_tol: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 {
            return Err(Error::OutOfRange("num_qubits must be >= 1".into()));
        }
        self.cavity.validate()?;
        self.qubit.materialize()?;
        self.params.validate()?;
        self.tau_grid.validate()?;
        if let MomentMethod::FiniteDifference { h_chi } = self.method {
            if !(h_chi > 0.0 && h_chi < 1.0) {
                return Err(Error::OutOfRange(format!(
                    "h_chi = {h_chi} must lie in (0, 1)"
                )));
            }
        }
        if !(self.ode_tol > 0.0 && self.ode_tol < 1e-3) {
            return Err(Error::OutOfRange(format!(
                "ode_tol = {} must lie in (0, 1e-3)",
                self.ode_tol
            )));
        }
        Ok(())
    }

    /// Cavity truncation: the override if any, else the state's requirement,
    /// padded by `M` levels for smooth states when qubits can emit and by 4
    /// more levels when counter-rotating terms climb the ladder.
    pub fn resolve_cavity_dim(&self) -> Result<usize> {
        if let Some(d) = self.cavity_dim {
            return Ok(d);
        }
        let mut d = self.cavity.required_cavity_dim(self.num_qubits)?;
        let emits = self.qubit.q > 0.0 || !self.params.rwa;
        if emits && !self.cavity.is_fock_class() {
            d += self.num_qubits;
        }
        if !self.params.rwa {
            d += 4;
        }
        Ok(d)
    }

    fn settings_key(&self) -> ProtocolSpec {
        let mut s = self.clone();
        s.cavity = CavityStateSpec::Fock { n: 0 };
        s.cavity_dim = None;
        s
    }
}

/// Which propagation route produced a window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Spectral,
    Analytic,
    Ode,
}

/// Everything recorded for one interaction window.
#[derive(Clone, Debug, Serialize)]
pub struct WindowReport {
    /// 1-based.
    pub index: usize,
    pub g_tau: Vec<f64>,
    /// Energy taken by the active qubit (qubit 1 in parallel runs).
    pub stats: Vec<EnergyStats>,
    /// Energy taken by all qubits together (parallel runs only).
    pub collective: Option<Vec<EnergyStats>>,
    pub fidelity: Vec<f64>,
    pub chosen: usize,
    pub chosen_g_tau: f64,
    pub max_snr: Snr,
    pub max_fidelity: f64,
    pub cavity_mean_after: f64,
    pub backend: Backend,
    #[serde(skip)]
    pub cavity_after: Option<DensityMatrix>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChargeReport {
    pub spec: ProtocolSpec,
    pub cavity_dim: usize,
    pub discarded_tail: f64,
    pub initial_mean_photons: f64,
    pub windows: Vec<WindowReport>,
    /// `g·τ_charge`: sum of chosen window lengths, or the chosen time of the
    /// single parallel window.
    pub g_tau_charge: f64,
    pub warnings: Vec<String>,
}

impl ChargeReport {
    pub fn tau_charge(&self) -> f64 {
        self.spec.params.time_from_g_tau(self.g_tau_charge)
    }
}

/// Time series of one window before a `τ*` is chosen.
#[derive(Clone, Debug)]
pub struct WindowSeries {
    pub g_tau: Vec<f64>,
    pub stats: Vec<EnergyStats>,
    pub collective: Option<Vec<EnergyStats>>,
    pub fidelity: Vec<f64>,
    pub backend: Backend,
}

enum Engine {
    Spectral(SpectralPropagator),
    Ode(Box<DrivenTilt>, OdeOptions),
}

impl Engine {
    fn new(params: &ModelParams, layout: &HilbertLayout, ode_tol: f64) -> Result<Self> {
        if params.coupling.is_constant() {
            Ok(Engine::Spectral(SpectralPropagator::untilted(
                &hamiltonian(params, layout)?,
            )?))
        } else {
            let tilt = TiltSpec {
                generator: TiltGenerator::SingleQubit(1),
                chi: 0.0,
            };
            Ok(Engine::Ode(
                Box::new(DrivenTilt::new(params, layout, tilt)?),
                ode_options(ode_tol),
            ))
        }
    }

    /// `Re Tr(O_k ρ(t))` for each observable, indexed `[k][t]`.
    fn series(&self, rho: &CMatrix, obs: &[CMatrix], times: &[f64]) -> Result<Vec<Vec<f64>>> {
        match self {
            Engine::Spectral(p) => {
                let probe = p.probe_many(rho, obs);
                let rows = par::map(times, |&t| {
                    probe.at(t).iter().map(|z| z.re).collect::<Vec<_>>()
                });
                Ok(transpose(rows, obs.len()))
            }
            Engine::Ode(drive, opts) => {
                let refs: Vec<&CMatrix> = obs.iter().collect();
                let out = integrate_tilted(drive, rho, times, &refs, false, opts)?;
                let rows = out
                    .values
                    .into_iter()
                    .map(|v| v.iter().map(|z| z.re).collect())
                    .collect();
                Ok(transpose(rows, obs.len()))
            }
        }
    }

    fn evolve(&self, rho: &CMatrix, t: f64) -> Result<CMatrix> {
        match self {
            Engine::Spectral(p) => Ok(p.evolve(rho, t)),
            Engine::Ode(drive, opts) => {
                let out = integrate_tilted(drive, rho, &[t], &[], true, opts)?;
                Ok(out.states.into_iter().next().flatten().unwrap())
            }
        }
    }

    fn backend(&self) -> Backend {
        match self {
            Engine::Spectral(_) => Backend::Spectral,
            Engine::Ode(..) => Backend::Ode,
        }
    }
}

fn ode_options(tol: f64) -> OdeOptions {
    OdeOptions {
        rtol: tol,
        atol: tol,
        ..OdeOptions::default()
    }
}

fn transpose(rows: Vec<Vec<f64>>, k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|i| rows.iter().map(|r| r[i]).collect())
        .collect()
}

fn diag_matrix(mask: impl Iterator<Item = bool>) -> CMatrix {
    let v: Vec<C64> = mask
        .map(|b| C64::new(if b { 1.0 } else { 0.0 }, 0.0))
        .collect();
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(v))
}

fn restrict_to(rho: &CMatrix, mask: &[bool]) -> CMatrix {
    let mut out = rho.clone();
    for i in 0..mask.len() {
        for j in 0..mask.len() {
            if !mask[i] || !mask[j] {
                out[(i, j)] = C64::new(0.0, 0.0);
            }
        }
    }
    out
}

/// Counted energy per basis index and its distinct values in ascending order.
fn counted_levels(
    layout: &HilbertLayout,
    generator: TiltGenerator,
    omega_qub: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let energy = counted_energy(layout, generator, omega_qub)?;
    let mut levels = energy.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    Ok((energy, levels))
}

/// Stats from the two-point measurement of the counted energy: each initial
/// energy branch is evolved and projected on every final energy.
fn trace_route(
    engine: &Engine,
    layout: &HilbertLayout,
    rho0: &CMatrix,
    generator: TiltGenerator,
    params: &ModelParams,
    times: &[f64],
) -> Result<Vec<EnergyStats>> {
    let (energy, levels) = counted_levels(layout, generator, params.omega_qub)?;
    let masks: Vec<Vec<bool>> = levels
        .iter()
        .map(|&l| energy.iter().map(|&e| e == l).collect())
        .collect();
    let projectors: Vec<CMatrix> = masks
        .iter()
        .map(|m| diag_matrix(m.iter().copied()))
        .collect();
    // components[t] = (weight, energy change)
    let mut components: Vec<Vec<(f64, f64)>> = vec![Vec::new(); times.len()];
    for (a, mask) in masks.iter().enumerate() {
        let branch = restrict_to(rho0, mask);
        if branch.trace().re.abs() == 0.0 && branch.iter().all(|z| z.norm() == 0.0) {
            continue;
        }
        let probs = engine.series(&branch, &projectors, times)?;
        for (b, series) in probs.iter().enumerate() {
            for (t, &w) in series.iter().enumerate() {
                components[t].push((w, levels[b] - levels[a]));
            }
        }
    }
    components.iter().map(|c| moments_trace(c)).collect()
}

/// Stats from finite differences of tilted traces.
fn fd_route(
    layout: &HilbertLayout,
    rho0: &CMatrix,
    generator: TiltGenerator,
    params: &ModelParams,
    times: &[f64],
    h: f64,
    ode_tol: f64,
) -> Result<Vec<EnergyStats>> {
    let hh = h / 2.0;
    let chis = [0.0, hh, -hh, h, -h, 2.0 * h, -2.0 * h];
    let mut traces: Vec<Vec<C64>> = Vec::with_capacity(chis.len());
    for &chi in &chis {
        let tilt = TiltSpec { generator, chi };
        if params.coupling.is_constant() {
            let (hp, hm) = tilted_hamiltonians(params, layout, tilt)?;
            let probe = SpectralPropagator::new(&hp, &hm)?.probe(rho0, None);
            traces.push(par::map(times, |&t| probe.at(t)));
        } else {
            let drive = DrivenTilt::new(params, layout, tilt)?;
            let out = integrate_tilted(&drive, rho0, times, &[], false, &ode_options(ode_tol))?;
            traces.push(out.traces);
        }
    }
    Ok((0..times.len())
        .map(|t| {
            moments_fd(
                |chi| {
                    let k = chis
                        .iter()
                        .enumerate()
                        .min_by(|x, y| (x.1 - chi).abs().total_cmp(&(y.1 - chi).abs()))
                        .unwrap()
                        .0;
                    traces[k][t]
                },
                h,
            )
        })
        .collect())
}

/// Computes the statistics of one window over `g_taus`. The counted energy
/// is that of qubit 1; `collective` adds the energy of all qubits.
pub fn window_series(
    params: &ModelParams,
    rho0: &DensityMatrix,
    g_taus: &[f64],
    method: MomentMethod,
    collective: bool,
    ode_tol: f64,
) -> Result<WindowSeries> {
    let layout = *rho0.layout();
    if !layout.has_cavity() {
        return Err(Error::LayoutMismatch("a window needs a cavity".into()));
    }
    let times: Vec<f64> = g_taus.iter().map(|&x| params.time_from_g_tau(x)).collect();
    let engine = Engine::new(params, &layout, ode_tol)?;
    let fid_obs = diag_matrix((0..layout.dim()).map(|i| layout.qubit_excited(i, 1)));
    let fidelity: Vec<f64> = engine.series(rho0.entries(), &[fid_obs], &times)?[0]
        .iter()
        .map(|f| f.clamp(0.0, 1.0))
        .collect();
    let stats_for = |generator| match method {
        MomentMethod::Trace => {
            trace_route(&engine, &layout, rho0.entries(), generator, params, &times)
        }
        MomentMethod::FiniteDifference { h_chi } => fd_route(
            &layout,
            rho0.entries(),
            generator,
            params,
            &times,
            h_chi,
            ode_tol,
        ),
    };
    let attach = |v: Vec<EnergyStats>| -> Vec<EnergyStats> {
        v.into_iter().zip(g_taus).map(|(s, &x)| s.at(x)).collect()
    };
    let stats = attach(stats_for(TiltGenerator::SingleQubit(1))?);
    let collective = if collective {
        Some(attach(stats_for(TiltGenerator::AllQubits)?))
    } else {
        None
    };
    Ok(WindowSeries {
        g_tau: g_taus.to_vec(),
        stats,
        collective,
        fidelity,
        backend: engine.backend(),
    })
}

/// Resonant two-qubit window from the analytic blocks; qubits must start in
/// `|gg⟩`.
fn analytic_pair_series(rho_cav: &DensityMatrix, g_taus: &[f64]) -> Result<WindowSeries> {
    let cav = rho_cav.entries();
    let weights: Vec<[f64; 4]> = par::map(g_taus, |&x| tc2_weights(cav, x))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut stats = Vec::with_capacity(g_taus.len());
    let mut collective = Vec::with_capacity(g_taus.len());
    let mut fidelity = Vec::with_capacity(g_taus.len());
    for (w, &x) in weights.iter().zip(g_taus) {
        stats.push(moments_trace(&[(w[0] + w[1], 1.0), (w[2] + w[3], 0.0)])?.at(x));
        collective.push(moments_trace(&[(w[0], 2.0), (w[1] + w[2], 1.0), (w[3], 0.0)])?.at(x));
        fidelity.push((w[0] + w[1]).clamp(0.0, 1.0));
    }
    Ok(WindowSeries {
        g_tau: g_taus.to_vec(),
        stats,
        collective: Some(collective),
        fidelity,
        backend: Backend::Analytic,
    })
}

/// Grid index selected by `objective`; ties go to the smallest `τ`.
pub fn choose_index(series: &WindowSeries, objective: WindowObjective) -> usize {
    let mut best = 0;
    for i in 1..series.g_tau.len() {
        let better = match objective {
            WindowObjective::MaxSnr => series.stats[i]
                .snr
                .total_cmp(&series.stats[best].snr)
                .is_gt(),
            WindowObjective::MaxFidelity => series.fidelity[i] > series.fidelity[best],
        };
        if better {
            best = i;
        }
    }
    best
}

fn max_snr(stats: &[EnergyStats]) -> Snr {
    stats
        .iter()
        .map(|s| s.snr)
        .max_by(|a, b| a.total_cmp(b))
        .unwrap_or(Snr::Finite(0.0))
}

fn reduced_cavity(joint: CMatrix, layout: HilbertLayout) -> Result<DensityMatrix> {
    let rho = DensityMatrix::from_unitary_image(layout, joint)?;
    partial_trace(&rho, &[Subsystem::Cavity])
}

fn check_edge(before: &DensityMatrix, after: &DensityMatrix, window: usize) -> Result<()> {
    let p = after.diagonal();
    let top = *p.last().unwrap();
    if top - before.diagonal().last().unwrap() > EDGE_TOL {
        return Err(Error::Window {
            window,
            source: Box::new(Error::Truncation {
                what: format!("cavity population {top:.3e} reached the top level"),
                required: p.len() + 1,
                given: p.len(),
            }),
        });
    }
    Ok(())
}

fn finish_window(
    index: usize,
    series: WindowSeries,
    objective: WindowObjective,
    cavity_after: DensityMatrix,
) -> WindowReport {
    let chosen = choose_index(&series, objective);
    let max_fidelity = series.fidelity.iter().copied().fold(0.0, f64::max);
    WindowReport {
        index,
        chosen,
        chosen_g_tau: series.g_tau[chosen],
        max_snr: max_snr(&series.stats),
        max_fidelity,
        cavity_mean_after: cavity_after.mean_photons().unwrap_or(0.0),
        backend: series.backend,
        cavity_after: Some(cavity_after),
        g_tau: series.g_tau,
        stats: series.stats,
        collective: series.collective,
        fidelity: series.fidelity,
    }
}

fn fold_warnings(windows: &[WindowReport]) -> Vec<String> {
    let mut warnings = Vec::new();
    for w in windows {
        let worst = w
            .stats
            .iter()
            .chain(w.collective.iter().flatten())
            .filter_map(|s| s.precision_warning)
            .fold(None, |acc: Option<f64>, e| {
                Some(acc.map_or(e, |a| a.max(e)))
            });
        if let Some(e) = worst {
            warnings.push(format!(
                "window {}: finite-difference error estimate up to {e:.3e}",
                w.index
            ));
        }
    }
    warnings
}

/// Couples `M` fresh qubits to the cavity one at a time. The cavity state is
/// never reset between windows.
pub fn run_sequential(spec: &ProtocolSpec) -> Result<ChargeReport> {
    if spec.kind != ProtocolKind::Sequential {
        return Err(Error::Mismatch(
            "run_sequential needs a sequential spec".into(),
        ));
    }
    spec.validate()?;
    let d = spec.resolve_cavity_dim()?;
    let state = spec.cavity.materialize(d)?;
    let qubit = spec.qubit.materialize()?;
    let layout = HilbertLayout::new(1, d)?;
    let nominal = spec.cavity.nominal_mean_photons();
    let initial_mean = state.rho.mean_photons().unwrap_or(0.0);
    let mut cavity = state.rho;
    let mut windows = Vec::with_capacity(spec.num_qubits);
    for j in 1..=spec.num_qubits {
        let wrap = |e: Error| Error::Window {
            window: j,
            source: Box::new(e),
        };
        let rho0 = qubit.tensor(&cavity).map_err(wrap)?;
        let grid = spec.tau_grid.values(spec.tau_grid.window_max(nominal, j));
        let series = window_series(&spec.params, &rho0, &grid, spec.method, false, spec.ode_tol)
            .map_err(wrap)?;
        let chosen = choose_index(&series, spec.window_objective);
        let engine = Engine::new(&spec.params, &layout, spec.ode_tol).map_err(wrap)?;
        let t = spec.params.time_from_g_tau(grid[chosen]);
        let joint = engine.evolve(rho0.entries(), t).map_err(wrap)?;
        let next = reduced_cavity(joint, layout).map_err(wrap)?;
        check_edge(&cavity, &next, j)?;
        windows.push(finish_window(
            j,
            series,
            spec.window_objective,
            next.clone(),
        ));
        cavity = next;
    }
    let g_tau_charge = windows.iter().map(|w| w.chosen_g_tau).sum();
    Ok(ChargeReport {
        spec: spec.clone(),
        cavity_dim: d,
        discarded_tail: state.discarded_tail,
        initial_mean_photons: initial_mean,
        warnings: fold_warnings(&windows),
        windows,
        g_tau_charge,
    })
}

/// Couples all `M` qubits at once. Single-qubit statistics are those of
/// qubit 1, which stands for any of them by permutation symmetry.
pub fn run_parallel(spec: &ProtocolSpec) -> Result<ChargeReport> {
    if spec.kind != ProtocolKind::Parallel {
        return Err(Error::Mismatch("run_parallel needs a parallel spec".into()));
    }
    spec.validate()?;
    let m = spec.num_qubits;
    if m > MAX_PARALLEL_QUBITS {
        return Err(Error::Resource(format!(
            "parallel runs support at most {MAX_PARALLEL_QUBITS} qubits, got {m}"
        )));
    }
    let d = spec.resolve_cavity_dim()?;
    if (1usize << m) * d > MAX_DIM {
        return Err(Error::Resource(format!(
            "joint dimension 2^{m} x {d} exceeds {MAX_DIM}"
        )));
    }
    let state = spec.cavity.materialize(d)?;
    let qubit = spec.qubit.materialize()?;
    let mut rho0 = qubit.clone();
    for _ in 1..m {
        rho0 = rho0.tensor(&qubit)?;
    }
    let rho0 = rho0.tensor(&state.rho)?;
    let layout = *rho0.layout();
    let nominal = spec.cavity.nominal_mean_photons();
    let grid = spec.tau_grid.values(spec.tau_grid.window_max(nominal, 1));
    let p = &spec.params;
    let analytic = m == 2
        && p.is_resonant()
        && p.rwa
        && p.coupling.is_constant()
        && spec.qubit.q == 0.0
        && spec.method == MomentMethod::Trace
        && d >= 3;
    let series = if analytic {
        analytic_pair_series(&state.rho, &grid)?
    } else {
        window_series(p, &rho0, &grid, spec.method, true, spec.ode_tol)?
    };
    let chosen = choose_index(&series, spec.window_objective);
    let engine = Engine::new(p, &layout, spec.ode_tol)?;
    let joint = engine.evolve(rho0.entries(), p.time_from_g_tau(grid[chosen]))?;
    let cavity = reduced_cavity(joint, layout)?;
    let window = finish_window(1, series, spec.window_objective, cavity);
    let windows = vec![window];
    Ok(ChargeReport {
        spec: spec.clone(),
        cavity_dim: d,
        discarded_tail: state.discarded_tail,
        initial_mean_photons: state.rho.mean_photons().unwrap_or(0.0),
        warnings: fold_warnings(&windows),
        g_tau_charge: windows[0].chosen_g_tau,
        windows,
    })
}

pub fn run(spec: &ProtocolSpec) -> Result<ChargeReport> {
    match spec.kind {
        ProtocolKind::Sequential => run_sequential(spec),
        ProtocolKind::Parallel => run_parallel(spec),
    }
}

/// `(1/⟨n⟩) Σ_j max_τ SNR_j`. Divergent windows need `cap`, which then
/// replaces them.
pub fn averaged_snr(report: &ChargeReport, mean_photons: f64, cap: Option<f64>) -> Result<f64> {
    if !(mean_photons > 0.0) {
        return Err(Error::OutOfRange(format!(
            "mean photon number {mean_photons} must be positive"
        )));
    }
    let mut total = 0.0;
    for w in &report.windows {
        total += match (w.max_snr, cap) {
            (Snr::Finite(x), _) => x,
            (Snr::Infinite, Some(c)) => c,
            (Snr::Infinite, None) => return Err(Error::DivergentSnr(w.index)),
        };
    }
    Ok(total / mean_photons)
}

/// Fock-minus-Gaussian difference of averaged SNRs. Both reports must come
/// from the same settings apart from the cavity state.
pub fn advantage_d(fock: &ChargeReport, gaussian: &ChargeReport, mean_photons: f64) -> Result<f64> {
    if fock.spec.settings_key() != gaussian.spec.settings_key() {
        return Err(Error::Mismatch(
            "reports differ in more than the cavity state".into(),
        ));
    }
    Ok(averaged_snr(fock, mean_photons, None)? - averaged_snr(gaussian, mean_photons, None)?)
}

/// Mean of the per-window maximum SNR divided by `g·τ_charge`; may be
/// infinite when a window diverges.
pub fn snr_per_time(report: &ChargeReport, g: f64) -> Result<f64> {
    let tau = report.tau_charge();
    if !(tau > 0.0) {
        return Err(Error::OutOfRange("tau_charge is zero".into()));
    }
    let mean = report
        .windows
        .iter()
        .map(|w| w.max_snr.value())
        .sum::<f64>()
        / report.windows.len() as f64;
    Ok(mean / (g * tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fock_spec(kind: ProtocolKind, m: usize, n: usize) -> ProtocolSpec {
        ProtocolSpec::new(
            kind,
            m,
            CavityStateSpec::Fock { n },
            ModelParams::resonant(0.01),
        )
    }

    #[test]
    fn default_grid_hits_the_peaks() {
        let g = TauGrid::default();
        for n in 1..=5 {
            let max = g.window_max(n as f64, 1);
            let x = g.values(max)[(g.points - 1) / 3];
            assert!((x - PI / (2.0 * (n as f64).sqrt())).abs() < 1e-14);
        }
    }

    #[test]
    fn ideal_sequential_charges_fully() {
        let r = run_sequential(&fock_spec(ProtocolKind::Sequential, 3, 3)).unwrap();
        for w in &r.windows {
            assert!(w.max_snr.is_infinite());
            assert!(w.fidelity[w.chosen] > 1.0 - 1e-12);
        }
        assert!(r.windows[2].cavity_mean_after < 1e-10);
    }

    #[test]
    fn pair_analytic_matches_numeric() {
        let mut spec = fock_spec(ProtocolKind::Parallel, 2, 2);
        spec.tau_grid.points = 200;
        let a = run_parallel(&spec).unwrap();
        assert_eq!(a.windows[0].backend, Backend::Analytic);
        spec.qubit.q = 1e-300;
        let b = run_parallel(&spec).unwrap();
        assert_eq!(b.windows[0].backend, Backend::Spectral);
        for (x, y) in a.windows[0].stats.iter().zip(&b.windows[0].stats) {
            assert!((x.mean - y.mean).abs() < 1e-10 && (x.variance - y.variance).abs() < 1e-10);
        }
    }

    #[test]
    fn averaging_and_errors() {
        let r = run_sequential(&fock_spec(ProtocolKind::Sequential, 1, 1)).unwrap();
        assert!(matches!(
            averaged_snr(&r, 1.0, None),
            Err(Error::DivergentSnr(1))
        ));
        assert_eq!(averaged_snr(&r, 1.0, Some(7.0)).unwrap(), 7.0);
        let mut spec = fock_spec(ProtocolKind::Parallel, 7, 7);
        spec.tau_grid.points = 100;
        assert!(matches!(run_parallel(&spec), Err(Error::Resource(_))));
    }
}
