//! Adaptive Dormand–Prince 5(4) integration of the tilted density matrix
//! `dρ/dt = −i (H_{+χ}(t) ρ − ρ H_{−χ}(t))` for a time-dependent coupling.
//!
//! Only the blocks of `ρ` that can influence the requested outputs are
//! integrated: the Hamiltonians never mix their invariant sectors, so each
//! sector pair `(A, B)` of `ρ` evolves on its own. For RWA models a diagonal
//! frame `ω_cav (N + Σσz/2)` is removed first, which leaves only the slow
//! coupling dynamics for the integrator to resolve.

use num_complex::Complex64 as C64;

use super::spectral::{invariant_blocks, is_nonzero, restrict};
use super::{excitation_frame, free_hamiltonian, interaction, tilt_interaction, CouplingProfile};
use super::{ModelParams, TiltSpec};
use crate::error::{Error, Result};
use crate::fockspace::{CMatrix, HilbertLayout};

/// Integrator tolerances and limits.
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Steps smaller than `min_step · max(1, t)` abort the integration.
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            min_step: 1e-13,
            max_steps: 5_000_000,
        }
    }
}

/// Tilted generator `H_{±χ}(t) = S_± + (J(t)/g) C_±`.
#[derive(Clone, Debug)]
pub struct DrivenTilt {
    pub layout: HilbertLayout,
    pub static_plus: CMatrix,
    pub static_minus: CMatrix,
    pub coupled_plus: CMatrix,
    pub coupled_minus: CMatrix,
    pub g: f64,
    pub profile: CouplingProfile,
    /// Diagonal generator commuting with every `H_{±χ}(t)`; removed before
    /// integrating and restored on output.
    pub frame: Option<Vec<f64>>,
}

impl DrivenTilt {
    pub fn new(params: &ModelParams, layout: &HilbertLayout, tilt: TiltSpec) -> Result<Self> {
        params.validate()?;
        let free = free_hamiltonian(params, layout)?;
        let h_int = interaction(params, layout)?.scale(C64::new(params.g, 0.0));
        let (p, m) = tilt_interaction(&h_int, layout, tilt, params.omega_qub)?;
        let frame = if params.rwa {
            Some(excitation_frame(params, layout)?)
        } else {
            None
        };
        Ok(Self {
            layout: *layout,
            static_plus: free.entries().clone(),
            static_minus: free.entries().clone(),
            coupled_plus: p.into_entries(),
            coupled_minus: m.into_entries(),
            g: params.g,
            profile: params.coupling,
            frame,
        })
    }

    fn shape(&self, t: f64) -> f64 {
        self.profile.shape(self.g * t)
    }
}

/// Outputs at each requested sample time.
#[derive(Clone, Debug, Default)]
pub struct OdeSamples {
    pub times: Vec<f64>,
    /// `Tr ρ_χ(t)`.
    pub traces: Vec<C64>,
    /// `Tr(O_k ρ_χ(t))`, indexed `[time][k]`.
    pub values: Vec<Vec<C64>>,
    pub states: Vec<Option<CMatrix>>,
}

struct Pair {
    a: usize,
    b: usize,
}

struct Blocks {
    idx: Vec<Vec<usize>>,
    sp: Vec<CMatrix>,
    cp: Vec<CMatrix>,
    sm: Vec<CMatrix>,
    cm: Vec<CMatrix>,
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

type State = Vec<CMatrix>;

fn rhs(drive: &DrivenTilt, blocks: &Blocks, pairs: &[Pair], t: f64, y: &State) -> State {
    let j = C64::new(drive.shape(t), 0.0);
    let mi = C64::new(0.0, -1.0);
    pairs
        .iter()
        .zip(y)
        .map(|(p, x)| {
            let hp = &blocks.sp[p.a] + &blocks.cp[p.a] * j;
            let hm = &blocks.sm[p.b] + &blocks.cm[p.b] * j;
            (hp * x - x * hm) * mi
        })
        .collect()
}

fn combine(y: &State, h: f64, ks: &[&State], coeffs: &[f64]) -> State {
    let mut out = y.clone();
    for (k, &c) in ks.iter().zip(coeffs) {
        if c == 0.0 {
            continue;
        }
        let s = C64::new(h * c, 0.0);
        for (o, kk) in out.iter_mut().zip(k.iter()) {
            *o += kk * s;
        }
    }
    out
}

/// Integrates from `t = 0` and reports at each time in `times` (ascending,
/// nonnegative). Off-sector blocks of `rho0` are only carried when
/// `keep_states` is set or an observable reads them.
pub fn integrate_tilted(
    drive: &DrivenTilt,
    rho0: &CMatrix,
    times: &[f64],
    observables: &[&CMatrix],
    keep_states: bool,
    opts: &OdeOptions,
) -> Result<OdeSamples> {
    let n = drive.layout.dim();
    if rho0.nrows() != n || observables.iter().any(|o| o.nrows() != n) {
        return Err(Error::LayoutMismatch("integrate_tilted operands".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::OutOfRange(
            "sample times must be ascending and >= 0".into(),
        ));
    }
    let idx = invariant_blocks(&[
        &drive.static_plus,
        &drive.static_minus,
        &drive.coupled_plus,
        &drive.coupled_minus,
    ]);
    let frame = drive.frame.clone().unwrap_or_else(|| vec![0.0; n]);
    check_frame(drive, &frame)?;
    let take = |m: &CMatrix, remove_frame: bool| -> Vec<CMatrix> {
        idx.iter()
            .map(|b| {
                let mut r = restrict(m, b, b);
                if remove_frame {
                    for (i, &gi) in b.iter().enumerate() {
                        r[(i, i)] -= C64::new(frame[gi], 0.0);
                    }
                }
                r
            })
            .collect()
    };
    let blocks = Blocks {
        sp: take(&drive.static_plus, true),
        sm: take(&drive.static_minus, true),
        cp: take(&drive.coupled_plus, false),
        cm: take(&drive.coupled_minus, false),
        idx,
    };
    let nb = blocks.idx.len();
    let mut pairs = Vec::new();
    for a in 0..nb {
        for b in 0..nb {
            let wanted = keep_states
                || a == b
                || observables
                    .iter()
                    .any(|o| is_nonzero(o, &blocks.idx[b], &blocks.idx[a]));
            if wanted && is_nonzero(rho0, &blocks.idx[a], &blocks.idx[b]) {
                pairs.push(Pair { a, b });
            }
        }
    }
    let mut y: State = pairs
        .iter()
        .map(|p| restrict(rho0, &blocks.idx[p.a], &blocks.idx[p.b]))
        .collect();

    // merge sample times with the profile's branch switches
    let mut stops: Vec<(f64, bool)> = times.iter().map(|&t| (t, true)).collect();
    let t_end = times.last().copied().unwrap_or(0.0);
    for x in drive.profile.breakpoints() {
        let t = x / drive.g;
        if t < t_end {
            stops.push((t, false));
        }
    }
    stops.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));

    let scale = blocks
        .sp
        .iter()
        .chain(&blocks.cp)
        .map(|m| m.iter().map(|z| z.norm()).sum::<f64>())
        .fold(1e-300, f64::max);
    let mut h = (0.05 / scale).min(t_end.max(1e-300));
    let mut t = 0.0;
    let mut out = OdeSamples::default();
    let mut k1 = rhs(drive, &blocks, &pairs, t, &y);
    let mut steps = 0usize;

    for &(target, record) in &stops {
        while t < target {
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Integration {
                    time: t,
                    reason: format!("exceeded {} steps", opts.max_steps),
                });
            }
            let last = h >= target - t;
            let step = if last { target - t } else { h };
            let mut ks: Vec<State> = vec![k1.clone()];
            for s in 1..7 {
                let coeffs = &A[s - 1][..s];
                let refs: Vec<&State> = ks.iter().collect();
                let ys = combine(&y, step, &refs, coeffs);
                ks.push(rhs(drive, &blocks, &pairs, t + C[s] * step, &ys));
            }
            // stage 7 was evaluated at the fifth-order solution
            let refs: Vec<&State> = ks.iter().take(6).collect();
            let y_new = combine(&y, step, &refs, &A[5]);
            let mut err: f64 = 0.0;
            for (p, blk) in y_new.iter().enumerate() {
                for i in 0..blk.len() {
                    let mut e = C64::new(0.0, 0.0);
                    for (s, k) in ks.iter().enumerate() {
                        if E[s] != 0.0 {
                            e += k[p][i] * E[s];
                        }
                    }
                    let sc = opts.atol + opts.rtol * blk[i].norm().max(y[p][i].norm());
                    err = err.max((e * step).norm() / sc);
                }
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                k1 = ks.pop().unwrap();
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !last {
                    h = step * grow;
                } else {
                    h = h.max(step * grow.min(1.0));
                }
            } else {
                if !err.is_finite() {
                    h = step * 0.1;
                } else {
                    h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                }
                if h < opts.min_step * t.abs().max(1.0) {
                    return Err(Error::Integration {
                        time: t,
                        reason: format!("step size underflow (h = {h:e})"),
                    });
                }
            }
        }
        if record {
            out.times.push(target);
            record_sample(
                &mut out,
                &blocks,
                &pairs,
                &y,
                &frame,
                target,
                observables,
                keep_states,
                n,
            );
        }
    }
    Ok(out)
}

fn check_frame(drive: &DrivenTilt, frame: &[f64]) -> Result<()> {
    let tol = 1e-12 * frame.iter().fold(1.0, |a: f64, b| a.max(b.abs()));
    for m in [
        &drive.static_plus,
        &drive.static_minus,
        &drive.coupled_plus,
        &drive.coupled_minus,
    ] {
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let z = m[(i, j)];
                if (z.re != 0.0 || z.im != 0.0) && (frame[i] - frame[j]).abs() > tol {
                    return Err(Error::UnsupportedRegime(
                        "rotating frame does not commute with the Hamiltonian".into(),
                    ));
                }
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn record_sample(
    out: &mut OdeSamples,
    blocks: &Blocks,
    pairs: &[Pair],
    y: &State,
    frame: &[f64],
    t: f64,
    observables: &[&CMatrix],
    keep_states: bool,
    n: usize,
) {
    let phase = |i: usize, j: usize| C64::new(0.0, -(frame[i] - frame[j]) * t).exp();
    let mut trace = C64::new(0.0, 0.0);
    let mut vals = vec![C64::new(0.0, 0.0); observables.len()];
    let mut full = keep_states.then(|| CMatrix::zeros(n, n));
    for (p, x) in pairs.iter().zip(y) {
        let (ia, ib) = (&blocks.idx[p.a], &blocks.idx[p.b]);
        if p.a == p.b {
            trace += x.trace();
        }
        for (r, &gi) in ia.iter().enumerate() {
            for (c, &gj) in ib.iter().enumerate() {
                let v = x[(r, c)] * phase(gi, gj);
                for (k, o) in observables.iter().enumerate() {
                    let w = o[(gj, gi)];
                    if w.re != 0.0 || w.im != 0.0 {
                        vals[k] += w * v;
                    }
                }
                if let Some(f) = full.as_mut() {
                    f[(gi, gj)] = v;
                }
            }
        }
    }
    out.traces.push(trace);
    out.values.push(vals);
    out.states.push(full);
}
