//! Advantage surfaces and the Gaussian comparator search.

use serde::{Deserialize, Serialize};

use crate::dynamics::CouplingProfile;
use crate::error::{Error, Result};
use crate::fcs::{Extended, Snr};
use crate::par;
use crate::protocols::{averaged_snr, run, ChargeReport, ProtocolKind, ProtocolSpec};
use crate::states::{alpha_tilde_for_mean, CavityStateSpec};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    NTh,
    AttenuationP,
    DetuningRatio,
    QubitQ,
    MeanPhotons,
    CouplingDelta,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::NTh => "n_th",
            SweepParameter::AttenuationP => "attenuation_p",
            SweepParameter::DetuningRatio => "detuning_ratio",
            SweepParameter::QubitQ => "qubit_q",
            SweepParameter::MeanPhotons => "mean_photons",
            SweepParameter::CouplingDelta => "coupling_delta",
        }
    }

    /// Whether the Gaussian comparator is left noiseless on this axis.
    pub fn fock_only(&self) -> bool {
        matches!(self, SweepParameter::NTh | SweepParameter::AttenuationP)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::OutOfRange("sweep axis has no values".into()));
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::OutOfRange(
                "sweep axis values must be strictly increasing".into(),
            ));
        }
        let name = self.parameter.name();
        for &v in &self.values {
            let ok = v.is_finite()
                && match self.parameter {
                    SweepParameter::NTh => v >= 0.0,
                    SweepParameter::AttenuationP | SweepParameter::QubitQ => {
                        (0.0..=1.0).contains(&v)
                    }
                    SweepParameter::DetuningRatio => v < 1.0,
                    SweepParameter::MeanPhotons => v >= 1.0 && v.fract() == 0.0,
                    SweepParameter::CouplingDelta => v > 0.0,
                };
            if !ok {
                return Err(Error::OutOfRange(format!(
                    "{name} value {v} is outside its physical range"
                )));
            }
        }
        Ok(())
    }
}

/// Grid of squeezing magnitudes; `α̃` follows from the photon budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSearchSpace {
    pub r_grid: Vec<f64>,
}

impl Default for GaussianSearchSpace {
    fn default() -> Self {
        Self {
            r_grid: (0..=24).map(|i| i as f64 / 20.0).collect(),
        }
    }
}

impl GaussianSearchSpace {
    /// Feasible `(r, α̃)` pairs at mean photon number `mean`, and the `r`
    /// values dropped because `sinh² r > mean`.
    pub fn candidates(&self, mean: f64) -> (Vec<(f64, f64)>, Vec<f64>) {
        let mut ok = Vec::new();
        let mut skipped = Vec::new();
        for &r in &self.r_grid {
            match alpha_tilde_for_mean(r, mean) {
                Some(a) => ok.push((r, a)),
                None => skipped.push(r),
            }
        }
        (ok, skipped)
    }
}

/// Phase-randomized squeezed state with real parameters.
pub fn gaussian_state(r: f64, alpha_tilde: f64) -> CavityStateSpec {
    CavityStateSpec::PhaseRandomizedSqueezed {
        zeta: C64::new(r, 0.0),
        alpha_tilde: C64::new(alpha_tilde, 0.0),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianOptimum {
    pub r: f64,
    pub alpha_tilde: f64,
    pub averaged_snr: f64,
}

fn best_of(results: &[(f64, f64, f64)]) -> Option<GaussianOptimum> {
    let mut best: Option<GaussianOptimum> = None;
    for &(r, a, s) in results {
        if best.is_none_or(|b| s > b.averaged_snr) {
            best = Some(GaussianOptimum {
                r,
                alpha_tilde: a,
                averaged_snr: s,
            });
        }
    }
    best
}

/// Averaged SNR of one Gaussian candidate; `Ok(None)` when the state does
/// not fit the truncation cap.
fn gaussian_candidate(spec: &ProtocolSpec, r: f64, a: f64, mean: f64) -> Result<Option<f64>> {
    let mut s = spec.clone();
    s.cavity = gaussian_state(r, a);
    match run(&s) {
        Ok(rep) => Ok(Some(averaged_snr(&rep, mean, None)?)),
        Err(Error::Truncation { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Grid search of the averaged SNR over the squeezing grid at fixed photon
/// number; ties go to the smallest `r`. Returns the optimum and notes on
/// skipped grid points.
pub fn optimize_gaussian(
    search: &GaussianSearchSpace,
    spec: &ProtocolSpec,
    mean: f64,
) -> Result<(GaussianOptimum, Vec<String>)> {
    let (cands, skipped) = search.candidates(mean);
    let results = par::map(&cands, |&(r, a)| gaussian_candidate(spec, r, a, mean));
    let mut notes: Vec<String> = skipped
        .iter()
        .map(|r| format!("<n>={mean}: r={r} skipped, sinh^2 r exceeds the photon budget"))
        .collect();
    let mut kept = Vec::new();
    for (&(r, a), res) in cands.iter().zip(results) {
        match res? {
            Some(s) => kept.push((r, a, s)),
            None => notes.push(format!(
                "<n>={mean}: r={r} skipped, state exceeds the cavity cap"
            )),
        }
    }
    let best = best_of(&kept).ok_or_else(|| {
        Error::Infeasible(format!("no feasible Gaussian candidate at <n>={mean}"))
    })?;
    Ok((best, notes))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DRow {
    pub axis_value: f64,
    pub mean_photons: usize,
    pub fock_averaged_snr: Extended,
    pub gaussian_averaged_snr: f64,
    pub r_star: f64,
    pub alpha_tilde_star: f64,
    pub d: Extended,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SweepTable {
    pub parameter: Option<SweepParameter>,
    pub rows: Vec<DRow>,
    pub notes: Vec<String>,
    pub cavity_dims: Vec<usize>,
    pub max_discarded_tail: f64,
}

/// Applies one axis value to a spec, for the Fock branch (`fock = true`) or
/// the Gaussian one.
fn apply_axis(
    spec: &mut ProtocolSpec,
    parameter: SweepParameter,
    v: f64,
    n: usize,
    fock: bool,
) -> Result<()> {
    match parameter {
        SweepParameter::NTh if fock => {
            spec.cavity = CavityStateSpec::ThermalizedFock { n, n_th: v }
        }
        SweepParameter::AttenuationP if fock => {
            spec.cavity = CavityStateSpec::AttenuatedFock { n, p: v }
        }
        SweepParameter::NTh | SweepParameter::AttenuationP | SweepParameter::MeanPhotons => {}
        SweepParameter::DetuningRatio => spec.params = spec.params.with_detuning_ratio(v),
        SweepParameter::QubitQ => spec.qubit.q = v,
        SweepParameter::CouplingDelta => match spec.params.coupling {
            CouplingProfile::SmoothedSquare { g_t_tilde, .. } => {
                spec.params.coupling = CouplingProfile::SmoothedSquare {
                    g_delta: v,
                    g_t_tilde,
                }
            }
            CouplingProfile::Constant => {
                return Err(Error::OutOfRange(
                    "coupling_delta axis needs a smoothed-square base profile".into(),
                ))
            }
        },
    }
    Ok(())
}

fn fock_averaged(rep: &ChargeReport, n: usize) -> Result<Extended> {
    match averaged_snr(rep, n as f64, None) {
        Ok(x) => Ok(Extended::Finite(x)),
        Err(Error::DivergentSnr(_)) => Ok(Extended::Infinite),
        Err(e) => Err(e),
    }
}

/// Advantage `D` over an axis and a set of photon numbers. Fock branches use
/// `N = ⟨n⟩`. On the `n_th` and `p` axes only the Fock branch is noisy and
/// the Gaussian optimum is computed once per `⟨n⟩`. A divergent Fock branch
/// yields `D = +∞`, noted in the table.
pub fn sweep_d(
    axis: &SweepAxis,
    base: &ProtocolSpec,
    search: &GaussianSearchSpace,
    mean_photons: &[usize],
) -> Result<SweepTable> {
    axis.validate()?;
    if base.kind != ProtocolKind::Sequential {
        return Err(Error::Mismatch(
            "advantage sweeps use the sequential protocol".into(),
        ));
    }
    let pairs: Vec<(f64, usize)> = if axis.parameter == SweepParameter::MeanPhotons {
        axis.values.iter().map(|&v| (v, v as usize)).collect()
    } else {
        axis.values
            .iter()
            .flat_map(|&v| mean_photons.iter().map(move |&n| (v, n)))
            .collect()
    };
    if pairs.iter().any(|&(_, n)| n == 0) {
        return Err(Error::OutOfRange("mean photon numbers must be >= 1".into()));
    }
    // Gaussian branches keyed by (axis value or None, n).
    let mut gkeys: Vec<(Option<f64>, usize)> = Vec::new();
    for &(v, n) in &pairs {
        let key = (
            if axis.parameter.fock_only() {
                None
            } else {
                Some(v)
            },
            n,
        );
        if !gkeys.contains(&key) {
            gkeys.push(key);
        }
    }
    enum Task {
        Fock(f64, usize),
        Gauss(Option<f64>, usize, f64, f64),
    }
    let mut tasks: Vec<Task> = pairs.iter().map(|&(v, n)| Task::Fock(v, n)).collect();
    let mut notes = Vec::new();
    for &(v, n) in &gkeys {
        let (cands, skipped) = search.candidates(n as f64);
        notes.extend(
            skipped
                .iter()
                .map(|r| format!("<n>={n}: r={r} skipped, sinh^2 r exceeds the photon budget")),
        );
        tasks.extend(cands.into_iter().map(|(r, a)| Task::Gauss(v, n, r, a)));
    }
    enum Outcome {
        Fock(Extended, usize, f64),
        Gauss(Option<(f64, usize, f64)>),
    }
    let outcomes = par::map(&tasks, |task| -> Result<Outcome> {
        match *task {
            Task::Fock(v, n) => {
                let mut s = base.clone();
                s.cavity = CavityStateSpec::Fock { n };
                apply_axis(&mut s, axis.parameter, v, n, true)?;
                let rep = run(&s)?;
                Ok(Outcome::Fock(
                    fock_averaged(&rep, n)?,
                    rep.cavity_dim,
                    rep.discarded_tail,
                ))
            }
            Task::Gauss(v, n, r, a) => {
                let mut s = base.clone();
                if let Some(v) = v {
                    apply_axis(&mut s, axis.parameter, v, n, false)?;
                }
                s.cavity = gaussian_state(r, a);
                match run(&s) {
                    Ok(rep) => Ok(Outcome::Gauss(Some((
                        averaged_snr(&rep, n as f64, None)?,
                        rep.cavity_dim,
                        rep.discarded_tail,
                    )))),
                    Err(Error::Truncation { .. }) => Ok(Outcome::Gauss(None)),
                    Err(e) => Err(e),
                }
            }
        }
    });
    let mut table = SweepTable {
        parameter: Some(axis.parameter),
        ..SweepTable::default()
    };
    let mut fock = Vec::new();
    let mut gauss: Vec<((Option<f64>, usize), (f64, f64, f64))> = Vec::new();
    for (task, out) in tasks.iter().zip(outcomes) {
        match (task, out?) {
            (Task::Fock(..), Outcome::Fock(x, d, tail)) => {
                fock.push(x);
                table.cavity_dims.push(d);
                table.max_discarded_tail = table.max_discarded_tail.max(tail);
            }
            (&Task::Gauss(v, n, r, a), Outcome::Gauss(Some((s, d, tail)))) => {
                gauss.push(((v, n), (r, a, s)));
                table.cavity_dims.push(d);
                table.max_discarded_tail = table.max_discarded_tail.max(tail);
            }
            (&Task::Gauss(_, n, r, _), Outcome::Gauss(None)) => {
                notes.push(format!(
                    "<n>={n}: r={r} skipped, state exceeds the cavity cap"
                ));
            }
            _ => unreachable!(),
        }
    }
    table.cavity_dims.sort_unstable();
    table.cavity_dims.dedup();
    for (&(v, n), fock_avg) in pairs.iter().zip(fock) {
        let key = (
            if axis.parameter.fock_only() {
                None
            } else {
                Some(v)
            },
            n,
        );
        let cands: Vec<(f64, f64, f64)> =
            gauss.iter().filter(|g| g.0 == key).map(|g| g.1).collect();
        let best = best_of(&cands).ok_or_else(|| {
            Error::Infeasible(format!("no feasible Gaussian candidate at <n>={n}"))
        })?;
        let d = match fock_avg {
            Extended::Finite(f) => Extended::Finite(f - best.averaged_snr),
            Extended::Infinite => {
                notes.push(format!(
                    "{}={v}, <n>={n}: Fock branch charges deterministically, D is unbounded",
                    axis.parameter.name()
                ));
                Extended::Infinite
            }
        };
        table.rows.push(DRow {
            axis_value: v,
            mean_photons: n,
            fock_averaged_snr: fock_avg,
            gaussian_averaged_snr: best.averaged_snr,
            r_star: best.r,
            alpha_tilde_star: best.alpha_tilde,
            d,
        });
    }
    table.notes = notes;
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RwaRow {
    /// `g / ω_qub`.
    pub coupling: f64,
    pub fock_jc_max: Snr,
    pub fock_rabi_max: Snr,
    pub gaussian_jc_max: Snr,
    pub gaussian_rabi_max: Snr,
    /// Fock minus Gaussian maximum SNR with counter-rotating terms.
    pub rabi_gap: Extended,
    /// Largest `|SNR_Rabi − SNR_JC|` over the grid for the Gaussian state.
    pub snr_deviation: f64,
    /// Largest `|F_Rabi − F_JC|` over the grid for the Fock state.
    pub fidelity_deviation: f64,
}

fn single_window(spec: &ProtocolSpec) -> Result<crate::protocols::WindowReport> {
    if spec.num_qubits != 1 {
        return Err(Error::OutOfRange(
            "single-window comparisons need M = 1".into(),
        ));
    }
    Ok(run(spec)?.windows.remove(0))
}

fn gap(a: Snr, b: Snr) -> Extended {
    match (a, b) {
        (Snr::Finite(x), Snr::Finite(y)) => Extended::Finite(x - y),
        (Snr::Infinite, Snr::Finite(_)) => Extended::Infinite,
        // a Gaussian state never charges deterministically
        _ => Extended::Finite(f64::NAN),
    }
}

/// Rabi versus Jaynes–Cummings at each coupling, for a Fock and a Gaussian
/// cavity state (`spec.cavity` is the Fock one).
pub fn sweep_rwa_comparison(
    spec: &ProtocolSpec,
    gaussian: &CavityStateSpec,
    couplings: &[f64],
) -> Result<Vec<RwaRow>> {
    let jobs: Vec<(f64, bool, bool)> = couplings
        .iter()
        .flat_map(|&g| {
            [
                (g, true, true),
                (g, true, false),
                (g, false, true),
                (g, false, false),
            ]
        })
        .collect();
    let windows = par::map(&jobs, |&(g, fock, rwa)| {
        let mut s = spec.clone();
        s.params.g = g;
        s.params.rwa = rwa;
        if !fock {
            s.cavity = gaussian.clone();
        }
        single_window(&s)
    });
    let mut it = windows.into_iter();
    let mut rows = Vec::new();
    for &g in couplings {
        let fj = it.next().unwrap()?;
        let fr = it.next().unwrap()?;
        let gj = it.next().unwrap()?;
        let gr = it.next().unwrap()?;
        let snr_deviation = gj
            .stats
            .iter()
            .zip(&gr.stats)
            .map(|(a, b)| (a.snr.value() - b.snr.value()).abs())
            .fold(0.0, f64::max);
        let fidelity_deviation = fj
            .fidelity
            .iter()
            .zip(&fr.fidelity)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        rows.push(RwaRow {
            coupling: g,
            fock_jc_max: fj.max_snr,
            fock_rabi_max: fr.max_snr,
            gaussian_jc_max: gj.max_snr,
            gaussian_rabi_max: gr.max_snr,
            rabi_gap: gap(fr.max_snr, gr.max_snr),
            snr_deviation,
            fidelity_deviation,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileRow {
    pub g_delta: f64,
    pub fock_max: Snr,
    pub gaussian_max: Snr,
    pub gap: Extended,
}

/// Maximum-SNR gap between a Fock and a Gaussian cavity for each edge width
/// `g·δ` of a smoothed-square coupling with fixed `g·t̃`.
pub fn sweep_coupling_profile(
    spec: &ProtocolSpec,
    gaussian: &CavityStateSpec,
    g_t_tilde: f64,
    deltas: &[f64],
) -> Result<Vec<ProfileRow>> {
    let jobs: Vec<(f64, bool)> = deltas
        .iter()
        .flat_map(|&d| [(d, true), (d, false)])
        .collect();
    let windows = par::map(&jobs, |&(g_delta, fock)| {
        let mut s = spec.clone();
        s.params.coupling = CouplingProfile::SmoothedSquare { g_delta, g_t_tilde };
        if !fock {
            s.cavity = gaussian.clone();
        }
        single_window(&s)
    });
    let mut it = windows.into_iter();
    let mut rows = Vec::new();
    for &g_delta in deltas {
        let f = it.next().unwrap()?;
        let g = it.next().unwrap()?;
        rows.push(ProfileRow {
            g_delta,
            fock_max: f.max_snr,
            gaussian_max: g.max_snr,
            gap: gap(f.max_snr, g.max_snr),
        });
    }
    Ok(rows)
}
