//! Exact propagation of time-independent tilted dynamics from per-block
//! Hermitian eigendecompositions.
//!
//! The Hamiltonians are split into the connected components of their
//! nonzero pattern (excitation-number sectors for RWA models, parity sectors
//! for the Rabi model). Each block is shifted by its mean diagonal before
//! diagonalisation, so near-degenerate sectors keep full relative accuracy
//! even when the bare frequencies are much larger than the coupling.

use nalgebra::SymmetricEigen;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fockspace::{hermiticity_error, hermitize, max_abs, CMatrix, FockOperator};

#[derive(Clone, Debug)]
struct BlockEig {
    shift: f64,
    values: Vec<f64>,
    vectors: CMatrix,
}

/// Block eigendecompositions of `H_{+χ}` and `H_{−χ}`.
#[derive(Clone, Debug)]
pub struct SpectralPropagator {
    dim: usize,
    blocks: Vec<Vec<usize>>,
    plus: Vec<BlockEig>,
    minus: Vec<BlockEig>,
}

/// Precomputed `t ↦ Tr(O ρ_χ(t))` as a sum of oscillating terms.
#[derive(Clone, Debug, Default)]
pub struct Probe {
    terms: Vec<(f64, C64)>,
}

impl Probe {
    pub fn at(&self, t: f64) -> C64 {
        self.terms
            .iter()
            .map(|&(f, w)| w * C64::new(0.0, -f * t).exp())
            .sum()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Several probes sharing the same oscillation frequencies, so each phase
/// is evaluated once per time.
#[derive(Clone, Debug, Default)]
pub struct MultiProbe {
    freqs: Vec<f64>,
    /// Row-major `[term][observable]`.
    weights: Vec<C64>,
    count: usize,
}

impl MultiProbe {
    /// `Tr(O_k ρ_χ(t))` for every observable.
    pub fn at(&self, t: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.count];
        for (i, &f) in self.freqs.iter().enumerate() {
            let ph = C64::new(0.0, -f * t).exp();
            let row = &self.weights[i * self.count..(i + 1) * self.count];
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * ph;
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Connected components of the union of the nonzero patterns.
pub(crate) fn invariant_blocks(mats: &[&CMatrix]) -> Vec<Vec<usize>> {
    let n = mats[0].nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    for m in mats {
        for j in 0..n {
            for i in 0..n {
                let z = m[(i, j)];
                if i != j && (z.re != 0.0 || z.im != 0.0) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

pub(crate) fn restrict(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

fn decompose(h: &CMatrix, idx: &[usize]) -> BlockEig {
    let mut b = restrict(h, idx, idx);
    let shift = (0..idx.len()).map(|i| b[(i, i)].re).sum::<f64>() / idx.len() as f64;
    for i in 0..idx.len() {
        b[(i, i)] -= C64::new(shift, 0.0);
    }
    if idx.len() == 1 {
        return BlockEig {
            shift,
            values: vec![b[(0, 0)].re],
            vectors: CMatrix::identity(1, 1),
        };
    }
    let eig = SymmetricEigen::new(hermitize(&b));
    BlockEig {
        shift,
        values: eig.eigenvalues.iter().cloned().collect(),
        vectors: eig.eigenvectors,
    }
}

pub(crate) fn is_nonzero(m: &CMatrix, rows: &[usize], cols: &[usize]) -> bool {
    rows.iter().any(|&i| {
        cols.iter()
            .any(|&j| m[(i, j)].re != 0.0 || m[(i, j)].im != 0.0)
    })
}

impl SpectralPropagator {
    /// Fails with [`Error::UnsupportedRegime`] when either Hamiltonian is not
    /// Hermitian (complex counting fields); use Padé exponentials then.
    pub fn new(h_plus: &FockOperator, h_minus: &FockOperator) -> Result<Self> {
        Self::from_matrices(h_plus.entries(), h_minus.entries())
    }

    pub fn untilted(h: &FockOperator) -> Result<Self> {
        Self::from_matrices(h.entries(), h.entries())
    }

    pub fn from_matrices(hp: &CMatrix, hm: &CMatrix) -> Result<Self> {
        if hp.shape() != hm.shape() || hp.nrows() != hp.ncols() {
            return Err(Error::LayoutMismatch(
                "tilted Hamiltonians differ in shape".into(),
            ));
        }
        let scale = max_abs(hp).max(max_abs(hm)).max(1.0);
        for h in [hp, hm] {
            if hermiticity_error(h) > 1e-12 * scale {
                return Err(Error::UnsupportedRegime(
                    "spectral propagation needs Hermitian generators".into(),
                ));
            }
        }
        let blocks = invariant_blocks(&[hp, hm]);
        let plus: Vec<BlockEig> = blocks.iter().map(|b| decompose(hp, b)).collect();
        let minus = if hp == hm {
            plus.clone()
        } else {
            blocks.iter().map(|b| decompose(hm, b)).collect()
        };
        Ok(Self {
            dim: hp.nrows(),
            blocks,
            plus,
            minus,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len()).collect()
    }

    /// Probe for `Tr(O ρ_χ(t))`; `obs = None` gives the generating function
    /// `Tr ρ_χ(t)`.
    pub fn probe(&self, rho0: &CMatrix, obs: Option<&CMatrix>) -> Probe {
        let mut terms = Vec::new();
        for (a, ba) in self.blocks.iter().enumerate() {
            for (b, bb) in self.blocks.iter().enumerate() {
                let observed = match obs {
                    None => a == b,
                    Some(o) => is_nonzero(o, bb, ba),
                };
                if !observed || !is_nonzero(rho0, ba, bb) {
                    continue;
                }
                let (pa, mb) = (&self.plus[a], &self.minus[b]);
                let r = pa.vectors.adjoint() * restrict(rho0, ba, bb) * &mb.vectors;
                let q = match obs {
                    None => mb.vectors.adjoint() * &pa.vectors,
                    Some(o) => mb.vectors.adjoint() * restrict(o, bb, ba) * &pa.vectors,
                };
                let base = pa.shift - mb.shift;
                for k in 0..ba.len() {
                    for l in 0..bb.len() {
                        let w = r[(k, l)] * q[(l, k)];
                        if w.re != 0.0 || w.im != 0.0 {
                            terms.push((base + (pa.values[k] - mb.values[l]), w));
                        }
                    }
                }
            }
        }
        Probe { terms }
    }

    /// Probes for several observables at once.
    pub fn probe_many(&self, rho0: &CMatrix, obs: &[CMatrix]) -> MultiProbe {
        let count = obs.len();
        let mut out = MultiProbe {
            count,
            ..MultiProbe::default()
        };
        for (a, ba) in self.blocks.iter().enumerate() {
            for (b, bb) in self.blocks.iter().enumerate() {
                let touched: Vec<bool> = obs.iter().map(|o| is_nonzero(o, bb, ba)).collect();
                if !touched.iter().any(|&x| x) || !is_nonzero(rho0, ba, bb) {
                    continue;
                }
                let (pa, mb) = (&self.plus[a], &self.minus[b]);
                let r = pa.vectors.adjoint() * restrict(rho0, ba, bb) * &mb.vectors;
                let qs: Vec<Option<CMatrix>> = obs
                    .iter()
                    .zip(&touched)
                    .map(|(o, &t)| {
                        t.then(|| mb.vectors.adjoint() * restrict(o, bb, ba) * &pa.vectors)
                    })
                    .collect();
                let base = pa.shift - mb.shift;
                let mut row = vec![C64::new(0.0, 0.0); count];
                for k in 0..ba.len() {
                    for l in 0..bb.len() {
                        let rkl = r[(k, l)];
                        if rkl.re == 0.0 && rkl.im == 0.0 {
                            continue;
                        }
                        let mut any = false;
                        for (w, q) in row.iter_mut().zip(&qs) {
                            *w = q.as_ref().map_or(C64::new(0.0, 0.0), |q| rkl * q[(l, k)]);
                            any |= w.re != 0.0 || w.im != 0.0;
                        }
                        if any {
                            out.freqs.push(base + (pa.values[k] - mb.values[l]));
                            out.weights.extend_from_slice(&row);
                        }
                    }
                }
            }
        }
        out
    }

    /// `U_{+χ}(t) ρ₀ U_{−χ}(t)†`.
    pub fn evolve(&self, rho0: &CMatrix, t: f64) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        let phases = |e: &BlockEig, sign: f64| -> Vec<C64> {
            e.values
                .iter()
                .map(|&v| C64::new(0.0, sign * (e.shift + v) * t).exp())
                .collect()
        };
        let pp: Vec<Vec<C64>> = self.plus.iter().map(|e| phases(e, -1.0)).collect();
        let mp: Vec<Vec<C64>> = self.minus.iter().map(|e| phases(e, 1.0)).collect();
        for (a, ba) in self.blocks.iter().enumerate() {
            for (b, bb) in self.blocks.iter().enumerate() {
                if !is_nonzero(rho0, ba, bb) {
                    continue;
                }
                let (pa, mb) = (&self.plus[a], &self.minus[b]);
                let mut r = pa.vectors.adjoint() * restrict(rho0, ba, bb) * &mb.vectors;
                for k in 0..ba.len() {
                    for l in 0..bb.len() {
                        r[(k, l)] *= pp[a][k] * mp[b][l];
                    }
                }
                let block = &pa.vectors * r * mb.vectors.adjoint();
                for (i, &gi) in ba.iter().enumerate() {
                    for (j, &gj) in bb.iter().enumerate() {
                        out[(gi, gj)] = block[(i, j)];
                    }
                }
            }
        }
        out
    }

    /// `U_{+χ}(t) = exp(−i H_{+χ} t)`.
    pub fn unitary(&self, t: f64) -> CMatrix {
        let mut u = CMatrix::zeros(self.dim, self.dim);
        for (a, ba) in self.blocks.iter().enumerate() {
            let e = &self.plus[a];
            let mut v = e.vectors.clone();
            for k in 0..ba.len() {
                let ph = C64::new(0.0, -(e.shift + e.values[k]) * t).exp();
                for i in 0..ba.len() {
                    v[(i, k)] *= ph;
                }
            }
            let block = v * e.vectors.adjoint();
            for (i, &gi) in ba.iter().enumerate() {
                for (j, &gj) in ba.iter().enumerate() {
                    u[(gi, gj)] = block[(i, j)];
                }
            }
        }
        u
    }
}
