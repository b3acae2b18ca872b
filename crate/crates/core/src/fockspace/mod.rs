//! Truncated Fock-space linear algebra on `qubit 1 ⊗ … ⊗ qubit M ⊗ cavity`.
//!
//! Qubit basis order is `{|e⟩, |g⟩}`, so `σz = diag(+1, −1)` on every slot.
//! Matrices are dense; the largest spaces used in practice have a few
//! hundred levels.

pub mod expm;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};

pub use expm::{expm, matrix_exp};

/// Dense complex matrix used for every operator and state.
pub type CMatrix = DMatrix<C64>;

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Shape of a composite space: `num_qubits` two-level systems followed by an
/// optional cavity with Fock levels `0..cavity_dim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct HilbertLayout {
    num_qubits: usize,
    cavity_dim: Option<usize>,
}

impl HilbertLayout {
    /// `M` qubits coupled to a cavity truncated at `cavity_dim` levels.
    pub fn new(num_qubits: usize, cavity_dim: usize) -> Result<Self> {
        if cavity_dim < 2 {
            return Err(Error::InvalidLayout(format!(
                "cavity_dim must be >= 2, got {cavity_dim}"
            )));
        }
        if num_qubits > 20 {
            return Err(Error::InvalidLayout(format!(
                "{num_qubits} qubits is too many"
            )));
        }
        Ok(Self {
            num_qubits,
            cavity_dim: Some(cavity_dim),
        })
    }

    pub fn cavity(cavity_dim: usize) -> Result<Self> {
        Self::new(0, cavity_dim)
    }

    /// Qubits without a cavity factor.
    pub fn qubits(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > 20 {
            return Err(Error::InvalidLayout(format!(
                "qubit-only layout needs 1..=20 qubits, got {num_qubits}"
            )));
        }
        Ok(Self {
            num_qubits,
            cavity_dim: None,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn cavity_dim(&self) -> Option<usize> {
        self.cavity_dim
    }

    pub fn has_cavity(&self) -> bool {
        self.cavity_dim.is_some()
    }

    pub fn qubit_dim(&self) -> usize {
        1 << self.num_qubits
    }

    /// Total dimension `2^M × cavity_dim`.
    pub fn dim(&self) -> usize {
        self.qubit_dim() * self.cavity_dim.unwrap_or(1)
    }

    /// Highest cavity level on which truncated ladder dynamics are exact.
    pub fn interior_max_level(&self) -> Option<usize> {
        self.cavity_dim
            .map(|d| (d - 1).saturating_sub(self.num_qubits))
    }

    /// Layout of `self ⊗ other`. The cavity, if any, must come last.
    pub fn compose(&self, other: &HilbertLayout) -> Result<HilbertLayout> {
        if self.cavity_dim.is_some() {
            return Err(Error::LayoutMismatch(
                "left tensor factor carries the cavity; the cavity slot must be last".into(),
            ));
        }
        let num_qubits = self.num_qubits + other.num_qubits;
        match other.cavity_dim {
            Some(d) => HilbertLayout::new(num_qubits, d),
            None => HilbertLayout::qubits(num_qubits),
        }
    }

    /// Dimensions of the subsystems in tensor order.
    pub fn factor_dims(&self) -> Vec<usize> {
        let mut dims = vec![2; self.num_qubits];
        if let Some(d) = self.cavity_dim {
            dims.push(d);
        }
        dims
    }

    /// Qubit/cavity decomposition of a basis index: qubit bits (qubit 1 is the
    /// most significant) and cavity level.
    pub fn split_index(&self, index: usize) -> (usize, usize) {
        let d = self.cavity_dim.unwrap_or(1);
        (index / d, index % d)
    }

    /// Whether qubit `j` (1-based) is excited in the basis state `index`.
    pub fn qubit_excited(&self, index: usize, j: usize) -> bool {
        let (bits, _) = self.split_index(index);
        (bits >> (self.num_qubits - j)) & 1 == 0
    }

    /// Number of excited qubits in basis state `index`.
    pub fn excited_count(&self, index: usize) -> usize {
        let (bits, _) = self.split_index(index);
        self.num_qubits - bits.count_ones() as usize
    }

    /// Interior projector: basis indices whose cavity level is at most
    /// [`interior_max_level`](Self::interior_max_level).
    pub fn interior_indices(&self) -> Vec<usize> {
        let top = self.interior_max_level();
        (0..self.dim())
            .filter(|&i| match top {
                Some(t) => self.split_index(i).1 <= t,
                None => true,
            })
            .collect()
    }

    fn check_qubit(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.num_qubits {
            return Err(Error::OutOfRange(format!(
                "qubit index {j} outside 1..={}",
                self.num_qubits
            )));
        }
        Ok(())
    }
}

/// A subsystem of a layout, used to select what a partial trace keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    /// 1-based qubit slot.
    Qubit(usize),
    Cavity,
}

fn check_finite(m: &CMatrix, what: &str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.to_string()))
    }
}

/// Largest elementwise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest elementwise deviation from Hermiticity.
pub fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            err = err.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    err
}

/// `(m + m†) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// A dense operator on a layout, with a free-form label describing where it
/// came from.
#[derive(Clone, Debug)]
pub struct FockOperator {
    layout: HilbertLayout,
    entries: CMatrix,
    label: String,
}

impl FockOperator {
    pub fn new(layout: HilbertLayout, entries: CMatrix, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let d = layout.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::LayoutMismatch(format!(
                "{label}: matrix is {}x{}, layout needs {d}x{d}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        check_finite(&entries, &label)?;
        Ok(Self {
            layout,
            entries,
            label,
        })
    }

    pub fn identity(layout: HilbertLayout) -> Self {
        let d = layout.dim();
        Self {
            layout,
            entries: CMatrix::identity(d, d),
            label: "I".into(),
        }
    }

    pub fn zeros(layout: HilbertLayout) -> Self {
        let d = layout.dim();
        Self {
            layout,
            entries: CMatrix::zeros(d, d),
            label: "0".into(),
        }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn adjoint(&self) -> Self {
        Self {
            layout: self.layout,
            entries: self.entries.adjoint(),
            label: format!("({})†", self.label),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        hermiticity_error(&self.entries) <= tol
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            layout: self.layout,
            entries: &self.entries * s,
            label: format!("{s}·{}", self.label),
        }
    }

    pub fn add(&self, other: &FockOperator) -> Result<Self> {
        same_layout(&self.layout, &other.layout)?;
        Ok(Self {
            layout: self.layout,
            entries: &self.entries + &other.entries,
            label: format!("{} + {}", self.label, other.label),
        })
    }

    pub fn sub(&self, other: &FockOperator) -> Result<Self> {
        same_layout(&self.layout, &other.layout)?;
        Ok(Self {
            layout: self.layout,
            entries: &self.entries - &other.entries,
            label: format!("{} - {}", self.label, other.label),
        })
    }

    pub fn mul(&self, other: &FockOperator) -> Result<Self> {
        same_layout(&self.layout, &other.layout)?;
        Ok(Self {
            layout: self.layout,
            entries: &self.entries * &other.entries,
            label: format!("{}·{}", self.label, other.label),
        })
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &FockOperator) -> Result<Self> {
        same_layout(&self.layout, &other.layout)?;
        Ok(Self {
            layout: self.layout,
            entries: &self.entries * &other.entries - &other.entries * &self.entries,
            label: format!("[{}, {}]", self.label, other.label),
        })
    }

    /// Restriction to the basis states listed in `indices`.
    pub fn restrict(&self, indices: &[usize]) -> CMatrix {
        CMatrix::from_fn(indices.len(), indices.len(), |i, j| {
            self.entries[(indices[i], indices[j])]
        })
    }
}

fn same_layout(a: &HilbertLayout, b: &HilbertLayout) -> Result<()> {
    if a != b {
        return Err(Error::LayoutMismatch(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

/// A physical state: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    layout: HilbertLayout,
    entries: CMatrix,
}

impl DensityMatrix {
    /// Validates all invariants, including positivity.
    pub fn new(layout: HilbertLayout, entries: CMatrix) -> Result<Self> {
        let d = layout.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::LayoutMismatch(format!(
                "density matrix is {}x{}, layout needs {d}x{d}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        check_finite(&entries, "density matrix")?;
        let herm = hermiticity_error(&entries);
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min_eig = min_eigenvalue(&entries);
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "smallest eigenvalue {min_eig:e} is negative"
            )));
        }
        Ok(Self { layout, entries })
    }

    /// Image of a valid state under a unitary map: shape, finiteness and
    /// trace are checked, positivity is inherited and not recomputed.
    pub fn from_unitary_image(layout: HilbertLayout, entries: CMatrix) -> Result<Self> {
        let d = layout.dim();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::LayoutMismatch(
                "evolved state has the wrong shape".into(),
            ));
        }
        check_finite(&entries, "evolved state")?;
        let entries = hermitize(&entries);
        let tr = entries.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "evolved trace is {tr}, expected 1"
            )));
        }
        Ok(Self { layout, entries })
    }

    /// Diagonal state from nonnegative weights summing to one.
    pub fn from_diagonal(layout: HilbertLayout, weights: &[f64]) -> Result<Self> {
        if weights.len() != layout.dim() {
            return Err(Error::LayoutMismatch(format!(
                "{} weights for dimension {}",
                weights.len(),
                layout.dim()
            )));
        }
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            weights.len(),
            weights.iter().map(|&w| C64::new(w, 0.0)),
        ));
        Self::new(layout, m)
    }

    /// Projector onto a normalised pure state.
    pub fn pure(layout: HilbertLayout, amplitudes: &[C64]) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::LayoutMismatch(format!(
                "{} amplitudes for dimension {}",
                amplitudes.len(),
                layout.dim()
            )));
        }
        let v = nalgebra::DVector::from_column_slice(amplitudes);
        let m = &v * v.adjoint();
        Self::new(layout, hermitize(&m))
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Real diagonal (populations).
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.entries.nrows())
            .map(|i| self.entries[(i, i)].re)
            .collect()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.entries.nrows();
        (0..n).all(|i| (0..n).all(|j| i == j || self.entries[(i, j)].norm() <= tol))
    }

    /// Mean photon number of the cavity factor.
    pub fn mean_photons(&self) -> Option<f64> {
        let d = self.layout.cavity_dim?;
        let mut acc = 0.0;
        for i in 0..self.layout.dim() {
            acc += (i % d) as f64 * self.entries[(i, i)].re;
        }
        Some(acc)
    }

    /// Cavity photon-number distribution.
    pub fn photon_distribution(&self) -> Option<Vec<f64>> {
        let d = self.layout.cavity_dim?;
        let mut p = vec![0.0; d];
        for i in 0..self.layout.dim() {
            p[i % d] += self.entries[(i, i)].re;
        }
        Some(p)
    }
}

/// Smallest eigenvalue of a Hermitian matrix (diagonal fast path).
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == C64::new(0.0, 0.0)));
    if diagonal {
        return (0..n).map(|i| m[(i, i)].re).fold(f64::INFINITY, f64::min);
    }
    let h = hermitize(m);
    nalgebra::SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Kronecker product of operators or states in subsystem order.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

impl Tensor for FockOperator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.compose(&other.layout)?;
        Ok(Self {
            layout,
            entries: kron(&self.entries, &other.entries),
            label: format!("{} ⊗ {}", self.label, other.label),
        })
    }
}

impl Tensor for DensityMatrix {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.compose(&other.layout)?;
        // A product of valid states is valid; only the trace can drift.
        Ok(Self {
            layout,
            entries: kron(&self.entries, &other.entries),
        })
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> Result<T> {
    a.tensor(b)
}

/// Ladder operator `a` on a bare cavity.
pub fn annihilation(cavity_dim: usize) -> Result<FockOperator> {
    let layout = HilbertLayout::cavity(cavity_dim)?;
    let mut m = CMatrix::zeros(cavity_dim, cavity_dim);
    for n in 1..cavity_dim {
        m[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    FockOperator::new(layout, m, "a")
}

/// `N = a†a` on a bare cavity, built directly on the diagonal.
pub fn number(cavity_dim: usize) -> Result<FockOperator> {
    let layout = HilbertLayout::cavity(cavity_dim)?;
    let m = CMatrix::from_fn(cavity_dim, cavity_dim, |i, j| {
        if i == j {
            C64::new(i as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    FockOperator::new(layout, m, "N")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaKind {
    Z,
    Plus,
    Minus,
}

fn sigma_2x2(kind: SigmaKind) -> CMatrix {
    let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
    match kind {
        SigmaKind::Z => CMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
        // |e⟩⟨g|: row e (0), column g (1)
        SigmaKind::Plus => CMatrix::from_row_slice(2, 2, &[z, o, z, z]),
        SigmaKind::Minus => CMatrix::from_row_slice(2, 2, &[z, z, o, z]),
    }
}

/// Single-qubit Pauli-type operator on slot `qubit_index` (1-based).
pub fn qubit_sigma(
    kind: SigmaKind,
    layout: &HilbertLayout,
    qubit_index: usize,
) -> Result<FockOperator> {
    layout.check_qubit(qubit_index)?;
    let left = 1usize << (qubit_index - 1);
    let right = layout.dim() / (2 * left);
    let m = kron(
        &kron(&CMatrix::identity(left, left), &sigma_2x2(kind)),
        &CMatrix::identity(right, right),
    );
    FockOperator::new(
        *layout,
        m,
        format!("σ{kind:?}({qubit_index})").to_lowercase(),
    )
}

/// Embeds a bare-cavity operator as `I_qubits ⊗ op`.
pub fn embed_cavity(op: &FockOperator, layout: &HilbertLayout) -> Result<FockOperator> {
    if op.layout.num_qubits() != 0 || op.layout.cavity_dim() != layout.cavity_dim() {
        return Err(Error::LayoutMismatch(format!(
            "cannot embed {:?} into {layout:?}",
            op.layout
        )));
    }
    let q = layout.qubit_dim();
    FockOperator::new(
        *layout,
        kron(&CMatrix::identity(q, q), &op.entries),
        op.label.clone(),
    )
}

/// Reduced state on the subsystems in `keep` (order of `keep` is ignored;
/// kept factors stay in layout order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[Subsystem]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::OutOfRange(
            "partial trace needs at least one kept subsystem".into(),
        ));
    }
    let layout = rho.layout;
    let dims = layout.factor_dims();
    let mut kept = vec![false; dims.len()];
    for s in keep {
        match *s {
            Subsystem::Qubit(j) => {
                layout.check_qubit(j)?;
                kept[j - 1] = true;
            }
            Subsystem::Cavity => {
                if !layout.has_cavity() {
                    return Err(Error::OutOfRange("layout has no cavity".into()));
                }
                kept[dims.len() - 1] = true;
            }
        }
    }
    let kept_qubits = kept[..layout.num_qubits()].iter().filter(|&&k| k).count();
    let keep_cavity = layout.has_cavity() && kept[dims.len() - 1];
    let out_layout = match (kept_qubits, keep_cavity) {
        (m, true) => HilbertLayout::new(m, layout.cavity_dim().unwrap())?,
        (m, false) => HilbertLayout::qubits(m)?,
    };

    // strides of each factor in the full index
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let kept_ix: Vec<usize> = (0..dims.len()).filter(|&k| kept[k]).collect();
    let traced_ix: Vec<usize> = (0..dims.len()).filter(|&k| !kept[k]).collect();
    let kept_dims: Vec<usize> = kept_ix.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced_ix.iter().map(|&k| dims[k]).collect();
    let out_dim: usize = kept_dims.iter().product();
    let env_dim: usize = traced_dims.iter().product();

    // offset of a sub-index (mixed radix over `ds`) inside the full index
    let offsets = |count: usize, ds: &[usize], which: &[usize]| -> Vec<usize> {
        (0..count)
            .map(|mut x| {
                let mut off = 0;
                for k in (0..ds.len()).rev() {
                    off += (x % ds[k]) * strides[which[k]];
                    x /= ds[k];
                }
                off
            })
            .collect()
    };
    let kept_off = offsets(out_dim, &kept_dims, &kept_ix);
    let env_off = offsets(env_dim, &traced_dims, &traced_ix);

    let mut out = CMatrix::zeros(out_dim, out_dim);
    for i in 0..out_dim {
        for j in 0..out_dim {
            let mut acc = C64::new(0.0, 0.0);
            for &e in &env_off {
                acc += rho.entries[(kept_off[i] + e, kept_off[j] + e)];
            }
            out[(i, j)] = acc;
        }
    }
    DensityMatrix::new(out_layout, hermitize(&out))
}

/// `Tr(ρ · obs)`.
pub fn expectation(rho: &DensityMatrix, obs: &FockOperator) -> Result<C64> {
    same_layout(&rho.layout, &obs.layout)?;
    Ok(trace_product(&rho.entries, &obs.entries))
}

/// `Tr(a · b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn ladder_entries() {
        let a = annihilation(4).unwrap();
        assert_eq!(a.entries()[(2, 3)], c(3f64.sqrt()));
        let n = a.adjoint().mul(&a).unwrap();
        for i in 0..4 {
            assert!((n.entries()[(i, i)] - c(i as f64)).norm() < 1e-14);
        }
        assert!(annihilation(1).is_err());
    }

    #[test]
    fn sigma_slots() {
        let l = HilbertLayout::new(2, 3).unwrap();
        let z1 = qubit_sigma(SigmaKind::Z, &l, 1).unwrap();
        let z2 = qubit_sigma(SigmaKind::Z, &l, 2).unwrap();
        assert!(max_abs(z1.commutator(&z2).unwrap().entries()) == 0.0);
        let p = qubit_sigma(SigmaKind::Plus, &l, 2).unwrap();
        let m = qubit_sigma(SigmaKind::Minus, &l, 2).unwrap();
        let s = p.mul(&m).unwrap().add(&m.mul(&p).unwrap()).unwrap();
        assert!(max_abs(&(s.entries() - CMatrix::identity(12, 12))) == 0.0);
        assert!(qubit_sigma(SigmaKind::Z, &l, 3).is_err());
        // σz(1) is +1 on basis states whose first qubit is excited
        for i in 0..l.dim() {
            let sign = if l.qubit_excited(i, 1) { 1.0 } else { -1.0 };
            assert_eq!(z1.entries()[(i, i)].re, sign);
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let cav = DensityMatrix::from_diagonal(HilbertLayout::cavity(3).unwrap(), &[0.2, 0.5, 0.3])
            .unwrap();
        let q =
            DensityMatrix::from_diagonal(HilbertLayout::qubits(1).unwrap(), &[0.0, 1.0]).unwrap();
        let joint = q.tensor(&cav).unwrap();
        let back = partial_trace(&joint, &[Subsystem::Cavity]).unwrap();
        assert!(max_abs(&(back.entries() - cav.entries())) < 1e-15);
        let qb = partial_trace(&joint, &[Subsystem::Qubit(1)]).unwrap();
        assert!(max_abs(&(qb.entries() - q.entries())) < 1e-15);
        assert!(partial_trace(&joint, &[]).is_err());
    }

    #[test]
    fn bell_reduction_is_mixed() {
        let l = HilbertLayout::qubits(2).unwrap();
        let s = 0.5f64.sqrt();
        let bell = DensityMatrix::pure(l, &[c(s), c(0.0), c(0.0), c(s)]).unwrap();
        let r = partial_trace(&bell, &[Subsystem::Qubit(2)]).unwrap();
        assert!(max_abs(&(r.entries() - CMatrix::identity(2, 2) * c(0.5))) < 1e-15);
    }

    #[test]
    fn rejects_bad_states() {
        let l = HilbertLayout::qubits(1).unwrap();
        assert!(DensityMatrix::from_diagonal(l, &[0.5, 0.4]).is_err());
        assert!(DensityMatrix::from_diagonal(l, &[1.5, -0.5]).is_err());
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5), C64::new(0.0, 0.1), c(0.0), c(0.5)]);
        assert!(DensityMatrix::new(l, m).is_err());
    }

    #[test]
    fn expectation_of_number() {
        let l = HilbertLayout::cavity(5).unwrap();
        let mut w = vec![0.0; 5];
        w[3] = 1.0;
        let rho = DensityMatrix::from_diagonal(l, &w).unwrap();
        assert_eq!(expectation(&rho, &number(5).unwrap()).unwrap(), c(3.0));
        assert_eq!(
            expectation(&rho, &FockOperator::identity(l)).unwrap(),
            c(1.0)
        );
    }

    #[test]
    fn layout_rules() {
        let q = HilbertLayout::qubits(2).unwrap();
        let cav = HilbertLayout::cavity(4).unwrap();
        assert_eq!(q.compose(&cav).unwrap().dim(), 16);
        assert!(cav.compose(&q).is_err());
        assert_eq!(
            HilbertLayout::new(2, 6).unwrap().interior_max_level(),
            Some(3)
        );
    }
}
