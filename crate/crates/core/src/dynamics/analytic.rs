//! Closed-form evolution operators: single-qubit JC and resonant two-qubit
//! Tavis-Cummings.

use num_complex::Complex64 as C64;

use super::ModelParams;
use crate::error::{Error, Result};
use crate::fockspace::{CMatrix, FockOperator, HilbertLayout};

/// Sixteen cavity blocks `a_ij` of the two-qubit interaction propagator, in
/// qubit order `{ee, eg, ge, gg}`.
pub type BlockGrid = [[FockOperator; 4]; 4];

/// `cos(x√s)`, continued to `cosh(x√−s)` for negative `s`.
fn cos_sqrt(x: f64, s: f64) -> f64 {
    if s >= 0.0 {
        (x * s.sqrt()).cos()
    } else {
        (x * (-s).sqrt()).cosh()
    }
}

/// `sin(x√s)/√s`, an entire function of `s` equal to `x` at `s = 0`.
fn sinc_sqrt(x: f64, s: f64) -> f64 {
    if s > 0.0 {
        let r = s.sqrt();
        (x * r).sin() / r
    } else if s < 0.0 {
        let r = (-s).sqrt();
        (x * r).sinh() / r
    } else {
        x
    }
}

/// `(−1 + cos(x√s))/(s/2)`, equal to `−x²` at `s = 0`.
fn versine_ratio(x: f64, s: f64) -> f64 {
    if s == 0.0 {
        -x * x
    } else {
        2.0 * (-1.0 + cos_sqrt(x, s)) / s
    }
}

/// Blocks of `exp(−i τ g Σ_j (σ₊⁽ʲ⁾a + σ₋⁽ʲ⁾a†))` for two qubits.
///
/// Operator functions of `N̂` sit to the left of the ladder factors and are
/// evaluated on the Fock level of the output row.
pub fn tc2_block_exp(g_tau: f64, cavity_dim: usize) -> Result<BlockGrid> {
    if cavity_dim < 3 {
        return Err(Error::InvalidLayout(format!(
            "two-qubit blocks need cavity_dim >= 3, got {cavity_dim}"
        )));
    }
    let d = cavity_dim;
    let x = g_tau;
    let zero = || CMatrix::zeros(d, d);
    let mut a: Vec<Vec<CMatrix>> = (0..4).map(|_| (0..4).map(|_| zero()).collect()).collect();
    let mi = C64::new(0.0, -1.0);
    let re = |v: f64| C64::new(v, 0.0);
    for m in 0..d {
        let mf = m as f64;
        let s3 = 2.0 * (2.0 * mf + 3.0);
        let s1 = 2.0 * (2.0 * mf + 1.0);
        let sm = 2.0 * (2.0 * mf - 1.0);
        // diagonal blocks
        a[0][0][(m, m)] = re((mf + 2.0 + (mf + 1.0) * cos_sqrt(x, s3)) / (2.0 * mf + 3.0));
        let c1 = cos_sqrt(x, s1);
        a[1][1][(m, m)] = re((1.0 + c1) / 2.0);
        a[2][2][(m, m)] = re((1.0 + c1) / 2.0);
        a[1][2][(m, m)] = re((-1.0 + c1) / 2.0);
        a[2][1][(m, m)] = re((-1.0 + c1) / 2.0);
        a[3][3][(m, m)] = re((mf - 1.0 + mf * cos_sqrt(x, sm)) / (2.0 * mf - 1.0));
        // one photon absorbed by the qubits (f(N) a)
        if m + 1 < d {
            let l = (mf + 1.0).sqrt();
            let v3 = mi * sinc_sqrt(x, s3) * l;
            a[0][1][(m, m + 1)] = v3;
            a[0][2][(m, m + 1)] = v3;
            let v1 = mi * sinc_sqrt(x, s1) * l;
            a[1][3][(m, m + 1)] = v1;
            a[2][3][(m, m + 1)] = v1;
        }
        if m + 2 < d {
            let l = ((mf + 1.0) * (mf + 2.0)).sqrt();
            a[0][3][(m, m + 2)] = re(versine_ratio(x, s3) * l);
        }
        // one photon emitted (f(N) a†)
        if m >= 1 {
            let l = mf.sqrt();
            let v1 = mi * sinc_sqrt(x, s1) * l;
            a[1][0][(m, m - 1)] = v1;
            a[2][0][(m, m - 1)] = v1;
            let vm = mi * sinc_sqrt(x, sm) * l;
            a[3][1][(m, m - 1)] = vm;
            a[3][2][(m, m - 1)] = vm;
        }
        if m >= 2 {
            let l = (mf * (mf - 1.0)).sqrt();
            a[3][0][(m, m - 2)] = re(versine_ratio(x, sm) * l);
        }
    }
    let layout = HilbertLayout::cavity(d)?;
    let mut it = a.into_iter().enumerate().map(|(i, row)| {
        let mut cols = row
            .into_iter()
            .enumerate()
            .map(|(j, m)| FockOperator::new(layout, m, format!("a{}{}", i + 1, j + 1)));
        let r: Result<[FockOperator; 4]> = (|| {
            Ok([
                cols.next().unwrap()?,
                cols.next().unwrap()?,
                cols.next().unwrap()?,
                cols.next().unwrap()?,
            ])
        })();
        r
    });
    Ok([
        it.next().unwrap()?,
        it.next().unwrap()?,
        it.next().unwrap()?,
        it.next().unwrap()?,
    ])
}

/// Assembles the blocks into a matrix on `HilbertLayout::new(2, d)`.
pub fn assemble_blocks(blocks: &BlockGrid) -> CMatrix {
    let d = blocks[0][0].entries().nrows();
    let mut u = CMatrix::zeros(4 * d, 4 * d);
    for (i, row) in blocks.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            u.view_mut((i * d, j * d), (d, d)).copy_from(b.entries());
        }
    }
    u
}

/// Full resonant two-qubit evolution operator for physical time `tau`.
pub fn tc2_evolution(tau: f64, params: &ModelParams, cavity_dim: usize) -> Result<FockOperator> {
    if !params.is_resonant() || !params.rwa || !params.coupling.is_constant() {
        return Err(Error::UnsupportedRegime(
            "closed-form two-qubit evolution needs resonance, RWA and constant coupling; \
             use propagate_tilted"
                .into(),
        ));
    }
    let w = params.omega_qub;
    let mut u = assemble_blocks(&tc2_block_exp(params.g * tau, cavity_dim)?);
    let d = cavity_dim;
    for row in 0..4 * d {
        let (bits, m) = (row / d, row % d);
        let excited = 2 - (bits as u32).count_ones() as i32;
        let phase = C64::new(0.0, -w * tau * ((excited - 1) as f64 + m as f64)).exp();
        for col in 0..4 * d {
            u[(row, col)] *= phase;
        }
    }
    FockOperator::new(HilbertLayout::new(2, d)?, u, "U_TC2")
}

/// Single-qubit JC evolution operator (any detuning) for physical time `tau`,
/// exact for the truncated Hamiltonian.
pub fn jc_evolution(tau: f64, params: &ModelParams, cavity_dim: usize) -> Result<FockOperator> {
    if !params.rwa || !params.coupling.is_constant() {
        return Err(Error::UnsupportedRegime(
            "closed-form JC evolution needs RWA and constant coupling".into(),
        ));
    }
    let d = cavity_dim;
    let layout = HilbertLayout::new(1, d)?;
    let (wq, wc, g) = (params.omega_qub, params.omega_cav, params.g);
    let delta = wq - wc;
    let mut u = CMatrix::zeros(2 * d, 2 * d);
    let ph = |e: f64| C64::new(0.0, -e * tau).exp();
    // |g,0⟩ and the unpaired top level |e,d−1⟩
    u[(d, d)] = ph(-wq / 2.0);
    u[(d - 1, d - 1)] = ph(wq / 2.0 + wc * (d - 1) as f64);
    for n in 0..d - 1 {
        let (e_ix, g_ix) = (n, d + n + 1);
        let mean = wc * (n as f64 + 0.5);
        let coupling = g * ((n + 1) as f64).sqrt();
        let half = (delta * delta / 4.0 + coupling * coupling).sqrt();
        let (c, s) = ((half * tau).cos(), sinc_sqrt(tau, half * half));
        let p = ph(mean);
        let mi = C64::new(0.0, -1.0);
        u[(e_ix, e_ix)] = p * (c + mi * s * (delta / 2.0));
        u[(g_ix, g_ix)] = p * (c - mi * s * (delta / 2.0));
        u[(e_ix, g_ix)] = p * mi * s * coupling;
        u[(g_ix, e_ix)] = p * mi * s * coupling;
    }
    FockOperator::new(layout, u, "U_JC")
}
