//! Dense complex linear algebra on small multi-qubit systems.
//!
//! Basis index `j` of an `m`-qubit system corresponds to the `m`-bit
//! big-endian expansion of `j`: qubit 1 is the most significant bit. This
//! matches [`crate::combinatorics::BitString::value`], so `|x>` for a bit
//! string `x` is basis vector `x.index()`.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

pub type C64 = Complex64;

/// Normalization tolerance for state vectors.
pub const NORM_TOL: f64 = 1e-12;
/// Entrywise Hermiticity and trace tolerance for density matrices.
pub const DENSITY_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted by [`DensityMatrix::validate_psd`].
pub const PSD_TOL: f64 = 1e-8;
/// Outcomes with probability at or below this are treated as impossible.
pub const PROB_THRESHOLD: f64 = 1e-12;
/// Tolerance on target orthonormality in [`complete_unitary`].
pub const ORTHO_TOL: f64 = 1e-10;
/// Gram-Schmidt candidates with a smaller residual norm are skipped.
pub const DEPENDENCE_TOL: f64 = 1e-8;
/// Tolerance on the sum of a probability distribution.
pub const DIST_TOL: f64 = 1e-10;

/// Largest qubit count we materialize densely.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("qubit count {0} out of supported range")]
    BadQubitCount(usize),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace is {0}, expected 1")]
    BadTrace(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("qubit position {pos} out of range for {qubits} qubits")]
    PositionOutOfRange { pos: usize, qubits: usize },
    #[error("cannot trace out a qubit of a {0}-qubit state")]
    TooFewQubits(usize),
    #[error("basis index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("projectors overlap at basis index {0}")]
    Overlap(usize),
    #[error("projectors do not cover basis index {0}")]
    Incomplete(usize),
    #[error("probability {0} is negative")]
    NegativeProbability(f64),
    #[error("probabilities sum to {0}, expected 1")]
    BadDistribution(f64),
    #[error("target vectors are not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("duplicate image index {0}")]
    DuplicateImage(usize),
    #[error("Gram-Schmidt completion ran out of candidates")]
    CompletionFailed,
}

fn qubits_for_dim(dim: usize) -> Result<usize, LinalgError> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(LinalgError::NotPowerOfTwo(dim));
    }
    let m = dim.trailing_zeros() as usize;
    if m > MAX_QUBITS {
        return Err(LinalgError::BadQubitCount(m));
    }
    Ok(m)
}

fn check_qubits(m: usize) -> Result<usize, LinalgError> {
    if m > MAX_QUBITS {
        Err(LinalgError::BadQubitCount(m))
    } else {
        Ok(1 << m)
    }
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            m[(j, j)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> C64>(dim: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Self { dim, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self, LinalgError> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(LinalgError::DimensionMismatch { expected: dim, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|j| self[(j, j)]).sum()
    }

    pub fn adjoint(&self) -> Matrix {
        Matrix::from_fn(self.dim, |r, c| self[(c, r)].conj())
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.dim != other.dim {
            return Err(LinalgError::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let d = self.dim;
        let mut out = Matrix::zeros(d);
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let brow = &other.data[k * d..(k + 1) * d];
                let orow = &mut out.data[r * d..(r + 1) * d];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>, LinalgError> {
        if v.len() != self.dim {
            return Err(LinalgError::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        Ok((0..self.dim).map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum()).collect())
    }

    pub fn kron(&self, other: &Matrix) -> Matrix {
        let d2 = other.dim;
        Matrix::from_fn(self.dim * d2, |r, c| self[(r / d2, c / d2)] * other[(r % d2, c % d2)])
    }

    pub fn scale(&self, s: C64) -> Matrix {
        Matrix { dim: self.dim, data: self.data.iter().map(|x| x * s).collect() }
    }

    /// Largest entrywise modulus of `self - other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for r in 0..self.dim {
            for c in r..self.dim {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Smallest eigenvalue of a Hermitian matrix.
    pub fn min_hermitian_eigenvalue(&self) -> f64 {
        let m = nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.data);
        let eig = nalgebra::SymmetricEigen::new(m);
        eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

fn fmt_complex(z: C64) -> String {
    let sign = if z.im < 0.0 { '-' } else { '+' };
    format!("{:.5e}{}{:.5e}i", z.re, sign, z.im.abs())
}

impl fmt::Debug for Matrix {
    /// Rows of `re+im i` pairs, 6 significant digits.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.dim {
            let row: Vec<String> = self.row(r).iter().map(|z| fmt_complex(*z)).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Pure state of `m` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amp: Vec<C64>,
}

impl StateVector {
    /// Any amplitude vector of power-of-two length; normalization is not enforced.
    pub fn new(amp: Vec<C64>) -> Result<Self, LinalgError> {
        let qubits = qubits_for_dim(amp.len())?;
        if amp.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        Ok(Self { qubits, amp })
    }

    /// Same as [`StateVector::new`] but requires `Σ|amp|² = 1` within [`NORM_TOL`].
    pub fn normalized(amp: Vec<C64>) -> Result<Self, LinalgError> {
        let v = Self::new(amp)?;
        v.check_normalized()?;
        Ok(v)
    }

    pub fn basis(qubits: usize, index: usize) -> Result<Self, LinalgError> {
        let dim = check_qubits(qubits)?;
        if index >= dim {
            return Err(LinalgError::IndexOutOfRange { index, dim });
        }
        let mut amp = vec![C64::new(0.0, 0.0); dim];
        amp[index] = C64::new(1.0, 0.0);
        Ok(Self { qubits, amp })
    }

    /// Equal-weight superposition of the given basis states.
    pub fn uniform_superposition(qubits: usize, indices: &[usize]) -> Result<Self, LinalgError> {
        let dim = check_qubits(qubits)?;
        let mut amp = vec![C64::new(0.0, 0.0); dim];
        let w = C64::new(1.0 / (indices.len() as f64).sqrt(), 0.0);
        for &j in indices {
            if j >= dim {
                return Err(LinalgError::IndexOutOfRange { index: j, dim });
            }
            amp[j] += w;
        }
        Self::normalized(amp)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn check_normalized(&self) -> Result<(), LinalgError> {
        let n2 = self.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            Err(LinalgError::NotNormalized(n2))
        } else {
            Ok(())
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64, LinalgError> {
        if self.dim() != other.dim() {
            return Err(LinalgError::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self.amp.iter().zip(&other.amp).map(|(a, b)| a.conj() * b).sum())
    }
}

/// Density matrix of `m` qubits: Hermitian with unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    qubits: usize,
    mat: Matrix,
}

impl DensityMatrix {
    /// Validates finiteness, Hermiticity and trace. Positivity is checked
    /// separately by [`DensityMatrix::validate_psd`].
    pub fn new(mat: Matrix) -> Result<Self, LinalgError> {
        let rho = Self::from_matrix_unchecked(mat)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps any square power-of-two matrix without checking density-matrix
    /// properties. Partial traces and measurements still work on the result.
    pub fn from_matrix_unchecked(mat: Matrix) -> Result<Self, LinalgError> {
        let qubits = qubits_for_dim(mat.dim())?;
        Ok(Self { qubits, mat })
    }

    pub fn validate(&self) -> Result<(), LinalgError> {
        if !self.mat.is_finite() {
            return Err(LinalgError::NonFinite);
        }
        let dev = self.mat.hermitian_deviation();
        if dev > DENSITY_TOL {
            return Err(LinalgError::NotHermitian(dev));
        }
        let tr = self.mat.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(LinalgError::BadTrace(tr.re));
        }
        Ok(())
    }

    /// Full validation including an eigenvalue check; O(d³).
    pub fn validate_psd(&self) -> Result<(), LinalgError> {
        self.validate()?;
        let min = self.mat.min_hermitian_eigenvalue();
        if min < -PSD_TOL {
            return Err(LinalgError::NotPsd(min));
        }
        Ok(())
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    /// `U ρ U†`, restricted to the rows of `ρ` that are not identically zero.
    pub fn conjugate_by(&self, u: &UnitaryMatrix) -> Result<DensityMatrix, LinalgError> {
        let d = self.dim();
        if u.mat.dim() != d {
            return Err(LinalgError::DimensionMismatch { expected: d, got: u.mat.dim() });
        }
        let zero = C64::new(0.0, 0.0);
        let support: Vec<usize> = (0..d).filter(|&j| self.mat.row(j).iter().any(|z| *z != zero)).collect();
        // t = U[:, S] ρ[S, S]
        let mut t = vec![zero; d * support.len()];
        for r in 0..d {
            for (kk, &k) in support.iter().enumerate() {
                t[r * support.len() + kk] = support.iter().map(|&j| u.mat[(r, j)] * self.mat[(j, k)]).sum();
            }
        }
        let out = Matrix::from_fn(d, |r, c| {
            support
                .iter()
                .enumerate()
                .map(|(kk, &k)| t[r * support.len() + kk] * u.mat[(c, k)].conj())
                .sum()
        });
        Ok(DensityMatrix { qubits: self.qubits, mat: out })
    }

    /// Diagonal entries as real probabilities of each basis outcome.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|j| self.mat[(j, j)].re).collect()
    }
}

/// Random mixed state `G G† / Tr(G G†)` with complex Gaussian `G`.
pub fn random_density<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> DensityMatrix {
    let dim = 1 << qubits;
    let g = Matrix::from_fn(dim, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let gg = g.mul(&g.adjoint()).expect("square");
    let tr = gg.trace().re;
    DensityMatrix { qubits, mat: gg.scale(C64::new(1.0 / tr, 0.0)) }
}

/// Random normalized state with complex Gaussian amplitudes.
pub fn random_state<R: Rng + ?Sized>(qubits: usize, rng: &mut R) -> StateVector {
    let dim = 1 << qubits;
    let mut amp: Vec<C64> =
        (0..dim).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    let norm = amp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut amp {
        *z /= norm;
    }
    StateVector { qubits, amp }
}

/// `|v><v|`.
pub fn pure_density(v: &StateVector) -> Result<DensityMatrix, LinalgError> {
    v.check_normalized()?;
    let a = &v.amp;
    Ok(DensityMatrix { qubits: v.qubits, mat: Matrix::from_fn(a.len(), |r, c| a[r] * a[c].conj()) })
}

/// Insert `bit` into `x` (an `m-1`-bit index) so that it becomes qubit
/// `pos` (1-based, most significant first) of an `m`-bit index.
fn insert_bit(x: usize, m: usize, pos: usize, bit: usize) -> usize {
    let low_bits = m - pos;
    let high = x >> low_bits;
    let low = x & ((1 << low_bits) - 1);
    (((high << 1) | bit) << low_bits) | low
}

/// Trace out qubit `pos` (1-based from the most significant bit).
pub fn partial_trace_qubit(rho: &DensityMatrix, pos: usize) -> Result<DensityMatrix, LinalgError> {
    let m = rho.qubits;
    if m < 2 {
        return Err(LinalgError::TooFewQubits(m));
    }
    if pos == 0 || pos > m {
        return Err(LinalgError::PositionOutOfRange { pos, qubits: m });
    }
    let dim_out = 1 << (m - 1);
    let out = Matrix::from_fn(dim_out, |r, c| {
        (0..2).map(|b| rho.mat[(insert_bit(r, m, pos, b), insert_bit(c, m, pos, b))]).sum()
    });
    Ok(DensityMatrix { qubits: m - 1, mat: out })
}

/// Projector onto a set of computational basis states.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisProjector {
    qubits: usize,
    indices: Vec<usize>,
}

impl BasisProjector {
    /// Indices are sorted and must be distinct and in range.
    pub fn new(qubits: usize, mut indices: Vec<usize>) -> Result<Self, LinalgError> {
        let dim = check_qubits(qubits)?;
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(LinalgError::Overlap(w[0]));
            }
        }
        if let Some(&last) = indices.last() {
            if last >= dim {
                return Err(LinalgError::IndexOutOfRange { index: last, dim });
            }
        }
        Ok(Self { qubits, indices })
    }

    pub fn full(qubits: usize) -> Result<Self, LinalgError> {
        let dim = check_qubits(qubits)?;
        Self::new(qubits, (0..dim).collect())
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn to_dense(&self) -> Matrix {
        let mut p = Matrix::zeros(self.dim());
        for &j in &self.indices {
            p[(j, j)] = C64::new(1.0, 0.0);
        }
        p
    }
}

/// Probability of a measurement outcome and the normalized post-measurement
/// state, absent when the outcome is impossible.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub prob: f64,
    pub post: Option<DensityMatrix>,
}

/// `Tr(Pρ)` and `PρP / Tr(Pρ)`.
pub fn apply_projector(p: &BasisProjector, rho: &DensityMatrix) -> Result<Outcome, LinalgError> {
    if p.dim() != rho.dim() {
        return Err(LinalgError::DimensionMismatch { expected: rho.dim(), got: p.dim() });
    }
    let raw: f64 = p.indices.iter().map(|&j| rho.mat[(j, j)].re).sum();
    let prob = raw.clamp(0.0, 1.0);
    if prob <= PROB_THRESHOLD {
        return Ok(Outcome { prob, post: None });
    }
    let mut post = Matrix::zeros(rho.dim());
    for &r in &p.indices {
        for &c in &p.indices {
            post[(r, c)] = rho.mat[(r, c)] / raw;
        }
    }
    Ok(Outcome { prob, post: Some(DensityMatrix { qubits: rho.qubits, mat: post }) })
}

/// Checks that the projectors (plus the optional residual) partition the
/// basis of their common dimension.
pub fn check_partition(projectors: &[BasisProjector], residual: Option<&BasisProjector>) -> Result<(), LinalgError> {
    let all: Vec<&BasisProjector> = projectors.iter().chain(residual).collect();
    let Some(first) = all.first() else {
        return Err(LinalgError::Incomplete(0));
    };
    let dim = first.dim();
    let mut seen = vec![false; dim];
    for p in &all {
        if p.dim() != dim {
            return Err(LinalgError::DimensionMismatch { expected: dim, got: p.dim() });
        }
        for &j in &p.indices {
            if std::mem::replace(&mut seen[j], true) {
                return Err(LinalgError::Overlap(j));
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(j) => Err(LinalgError::Incomplete(j)),
        None => Ok(()),
    }
}

/// Projective measurement; outcomes are listed in projector order, residual last.
pub fn measure(
    projectors: &[BasisProjector],
    residual: Option<&BasisProjector>,
    rho: &DensityMatrix,
) -> Result<Vec<Outcome>, LinalgError> {
    check_partition(projectors, residual)?;
    projectors.iter().chain(residual).map(|p| apply_projector(p, rho)).collect()
}

/// Deterministic generator used for every seeded draw in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Inverse-CDF draw over `probs` in listed order.
pub fn sample_outcome(probs: &[f64], seed: u64) -> Result<usize, LinalgError> {
    sample_with(probs, &mut seeded_rng(seed))
}

pub fn sample_with<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Result<usize, LinalgError> {
    if let Some(&p) = probs.iter().find(|&&p| p < -DIST_TOL || !p.is_finite()) {
        return Err(LinalgError::NegativeProbability(p));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > DIST_TOL {
        return Err(LinalgError::BadDistribution(total));
    }
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (k, &p) in probs.iter().enumerate() {
        cum += p.max(0.0);
        if u < cum {
            return Ok(k);
        }
    }
    // u landed in the rounding gap above the final cumulative sum
    Ok(probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1))
}

/// Unitary matrix `U` with `U†U = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    qubits: usize,
    mat: Matrix,
}

impl UnitaryMatrix {
    pub fn new(mat: Matrix) -> Result<Self, LinalgError> {
        let qubits = qubits_for_dim(mat.dim())?;
        let dev = unitarity_deviation(&mat);
        if dev > ORTHO_TOL {
            return Err(LinalgError::NotOrthonormal(dev));
        }
        Ok(Self { qubits, mat })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn apply(&self, v: &StateVector) -> Result<Vec<C64>, LinalgError> {
        self.mat.apply(&v.amp)
    }
}

/// `max |(U†U - I)_{rc}|`.
pub fn unitarity_deviation(u: &Matrix) -> f64 {
    let prod = u.adjoint().mul(u).expect("square");
    prod.max_abs_diff(&Matrix::identity(u.dim()))
}

fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Build a unitary sending each target vector to its image basis vector.
///
/// Row `image_t` of the result is `vector_t†`; the remaining rows come from
/// Gram-Schmidt over `e_0, e_1, ...` in ascending order, skipping candidates
/// whose residual norm falls below [`DEPENDENCE_TOL`]. Free rows are filled
/// in ascending index order.
pub fn complete_unitary(targets: &[(StateVector, usize)]) -> Result<UnitaryMatrix, LinalgError> {
    let Some((first, _)) = targets.first() else {
        return Err(LinalgError::CompletionFailed);
    };
    let dim = first.dim();
    let qubits = first.qubits;
    let mut rows: Vec<Option<Vec<C64>>> = vec![None; dim];
    for (s, (v, img)) in targets.iter().enumerate() {
        if v.dim() != dim {
            return Err(LinalgError::DimensionMismatch { expected: dim, got: v.dim() });
        }
        if *img >= dim {
            return Err(LinalgError::IndexOutOfRange { index: *img, dim });
        }
        for (t, (w, _)) in targets[..=s].iter().enumerate() {
            let ip = dot_conj(&w.amp, &v.amp);
            let expect = if t == s { 1.0 } else { 0.0 };
            let dev = (ip - C64::new(expect, 0.0)).norm();
            if dev > ORTHO_TOL {
                return Err(LinalgError::NotOrthonormal(dev));
            }
        }
        if rows[*img].is_some() {
            return Err(LinalgError::DuplicateImage(*img));
        }
        rows[*img] = Some(v.amp.clone());
    }

    // basis[k] holds the vectors w_k whose adjoints form the rows
    let mut basis: Vec<Vec<C64>> = rows.iter().flatten().cloned().collect();
    let mut free_rows = (0..dim).filter(|&r| rows[r].is_none()).collect::<Vec<_>>().into_iter();
    let mut candidate = 0;
    while basis.len() < dim {
        if candidate >= dim {
            return Err(LinalgError::CompletionFailed);
        }
        let mut w = vec![C64::new(0.0, 0.0); dim];
        w[candidate] = C64::new(1.0, 0.0);
        candidate += 1;
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for q in &basis {
                let c = dot_conj(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < DEPENDENCE_TOL {
            continue;
        }
        for z in &mut w {
            *z /= norm;
        }
        let r = free_rows.next().ok_or(LinalgError::CompletionFailed)?;
        rows[r] = Some(w.clone());
        basis.push(w);
    }

    let mut mat = Matrix::zeros(dim);
    for (r, w) in rows.into_iter().enumerate() {
        let w = w.ok_or(LinalgError::CompletionFailed)?;
        for (c, z) in w.into_iter().enumerate() {
            mat[(r, c)] = z.conj();
        }
    }
    let dev = unitarity_deviation(&mat);
    if dev > ORTHO_TOL {
        return Err(LinalgError::NotOrthonormal(dev));
    }
    Ok(UnitaryMatrix { qubits, mat })
}

/// `<ψ|σ|ψ>` for a single-qubit state, clamped to `[0, 1]`.
pub fn fidelity_pure(sigma: &DensityMatrix, psi: &StateVector) -> Result<f64, LinalgError> {
    if sigma.dim() != psi.dim() {
        return Err(LinalgError::DimensionMismatch { expected: sigma.dim(), got: psi.dim() });
    }
    psi.check_normalized()?;
    let sv = sigma.mat.apply(&psi.amp)?;
    Ok(dot_conj(&psi.amp, &sv).re.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn plus() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::normalized(vec![c(h), c(h)]).unwrap()
    }

    fn ghz4() -> StateVector {
        StateVector::uniform_superposition(4, &[0, 15]).unwrap()
    }

    #[test]
    fn pure_density_examples() {
        let z = pure_density(&StateVector::basis(1, 0).unwrap()).unwrap();
        assert_eq!(z.matrix(), &Matrix::from_rows(&[vec![c(1.0), c(0.0)], vec![c(0.0), c(0.0)]]).unwrap());
        let p = pure_density(&plus()).unwrap();
        assert!(p.matrix().as_slice().iter().all(|z| (z - c(0.5)).norm() < 1e-15));
        let g = pure_density(&ghz4()).unwrap();
        for r in 0..16 {
            for col in 0..16 {
                let expect = if [0, 15].contains(&r) && [0, 15].contains(&col) { 0.5 } else { 0.0 };
                assert!((g.matrix()[(r, col)] - c(expect)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn pure_density_rejects_unnormalized() {
        let v = StateVector::new(vec![c(1.0), c(1.0)]).unwrap();
        assert!(matches!(pure_density(&v), Err(LinalgError::NotNormalized(_))));
    }

    #[test]
    fn partial_trace_examples() {
        let r00 = pure_density(&StateVector::basis(2, 0).unwrap()).unwrap();
        let t = partial_trace_qubit(&r00, 1).unwrap();
        assert_eq!(t.matrix(), pure_density(&StateVector::basis(1, 0).unwrap()).unwrap().matrix());

        let bell = pure_density(&StateVector::uniform_superposition(2, &[0, 3]).unwrap()).unwrap();
        let t = partial_trace_qubit(&bell, 2).unwrap();
        let half = Matrix::identity(2).scale(c(0.5));
        assert!(t.matrix().max_abs_diff(&half) < 1e-15);

        let g = pure_density(&ghz4()).unwrap();
        let t = partial_trace_qubit(&g, 1).unwrap();
        let mut expect = Matrix::zeros(8);
        expect[(0, 0)] = c(0.5);
        expect[(7, 7)] = c(0.5);
        assert!(t.matrix().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let one = pure_density(&StateVector::basis(1, 0).unwrap()).unwrap();
        assert!(matches!(partial_trace_qubit(&one, 1), Err(LinalgError::TooFewQubits(1))));
        let two = pure_density(&StateVector::basis(2, 0).unwrap()).unwrap();
        assert!(matches!(partial_trace_qubit(&two, 3), Err(LinalgError::PositionOutOfRange { .. })));
        assert!(matches!(partial_trace_qubit(&two, 0), Err(LinalgError::PositionOutOfRange { .. })));
    }

    #[test]
    fn apply_projector_examples() {
        let p = pure_density(&plus()).unwrap();
        let full = apply_projector(&BasisProjector::full(1).unwrap(), &p).unwrap();
        assert!((full.prob - 1.0).abs() < 1e-15);
        assert!(full.post.unwrap().matrix().max_abs_diff(p.matrix()) < 1e-15);

        let zero = apply_projector(&BasisProjector::new(1, vec![0]).unwrap(), &p).unwrap();
        assert!((zero.prob - 0.5).abs() < 1e-15);
        let z = pure_density(&StateVector::basis(1, 0).unwrap()).unwrap();
        assert!(zero.post.unwrap().matrix().max_abs_diff(z.matrix()) < 1e-15);

        let reduced = partial_trace_qubit(&pure_density(&ghz4()).unwrap(), 1).unwrap();
        let even = BasisProjector::new(3, vec![0b000, 0b011, 0b101, 0b110]).unwrap();
        let out = apply_projector(&even, &reduced).unwrap();
        assert!((out.prob - 0.5).abs() < 1e-15);
        let z3 = pure_density(&StateVector::basis(3, 0).unwrap()).unwrap();
        assert!(out.post.unwrap().matrix().max_abs_diff(z3.matrix()) < 1e-15);
    }

    #[test]
    fn apply_projector_impossible_outcome() {
        let z = pure_density(&StateVector::basis(1, 0).unwrap()).unwrap();
        let out = apply_projector(&BasisProjector::new(1, vec![1]).unwrap(), &z).unwrap();
        assert_eq!(out.prob, 0.0);
        assert!(out.post.is_none());
        let two = pure_density(&StateVector::basis(2, 0).unwrap()).unwrap();
        assert!(apply_projector(&BasisProjector::new(1, vec![1]).unwrap(), &two).is_err());
    }

    #[test]
    fn measure_examples() {
        let p = pure_density(&plus()).unwrap();
        let single = measure(&[BasisProjector::full(1).unwrap()], None, &p).unwrap();
        assert_eq!(single.len(), 1);
        assert!((single[0].prob - 1.0).abs() < 1e-15);

        let projs = [BasisProjector::new(1, vec![0]).unwrap(), BasisProjector::new(1, vec![1]).unwrap()];
        let out = measure(&projs, None, &p).unwrap();
        assert!((out[0].prob - 0.5).abs() < 1e-15 && (out[1].prob - 0.5).abs() < 1e-15);
        let one = pure_density(&StateVector::basis(1, 1).unwrap()).unwrap();
        assert!(out[1].post.as_ref().unwrap().matrix().max_abs_diff(one.matrix()) < 1e-15);
    }

    #[test]
    fn measure_validates_partition() {
        let p = pure_density(&plus()).unwrap();
        let overlapping = [BasisProjector::new(1, vec![0]).unwrap(), BasisProjector::new(1, vec![0, 1]).unwrap()];
        assert!(matches!(measure(&overlapping, None, &p), Err(LinalgError::Overlap(0))));
        let partial = [BasisProjector::new(1, vec![0]).unwrap()];
        assert!(matches!(measure(&partial, None, &p), Err(LinalgError::Incomplete(1))));
        let residual = BasisProjector::new(1, vec![1]).unwrap();
        assert_eq!(measure(&partial, Some(&residual), &p).unwrap().len(), 2);
    }

    #[test]
    fn sample_outcome_examples() {
        for seed in 0..50 {
            assert_eq!(sample_outcome(&[1.0], seed).unwrap(), 0);
            assert_eq!(sample_outcome(&[0.0, 1.0], seed).unwrap(), 1);
        }
        let zeros = (0..10_000u64).filter(|&s| sample_outcome(&[0.5, 0.5], s).unwrap() == 0).count();
        let freq = zeros as f64 / 10_000.0;
        assert!((0.47..=0.53).contains(&freq), "frequency {freq}");
        assert_eq!(sample_outcome(&[0.3, 0.7], 42).unwrap(), sample_outcome(&[0.3, 0.7], 42).unwrap());
    }

    #[test]
    fn sample_outcome_errors() {
        assert!(matches!(sample_outcome(&[-0.5, 1.5], 0), Err(LinalgError::NegativeProbability(_))));
        assert!(matches!(sample_outcome(&[0.5, 0.4], 0), Err(LinalgError::BadDistribution(_))));
    }

    #[test]
    fn complete_unitary_identity() {
        let u = complete_unitary(&[
            (StateVector::basis(1, 0).unwrap(), 0),
            (StateVector::basis(1, 1).unwrap(), 1),
        ])
        .unwrap();
        assert!(u.matrix().max_abs_diff(&Matrix::identity(2)) < 1e-15);
    }

    #[test]
    fn complete_unitary_hadamard() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let minus = StateVector::normalized(vec![c(h), c(-h)]).unwrap();
        let u = complete_unitary(&[(plus(), 0), (minus, 1)]).unwrap();
        let expect = Matrix::from_rows(&[vec![c(h), c(h)], vec![c(h), c(-h)]]).unwrap();
        assert!(u.matrix().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn complete_unitary_superpositions() {
        let ghz = StateVector::uniform_superposition(3, &[0, 7]).unwrap();
        let w = StateVector::uniform_superposition(3, &[1, 2, 4]).unwrap();
        let u = complete_unitary(&[(ghz.clone(), 0), (w.clone(), 1)]).unwrap();
        assert!(unitarity_deviation(u.matrix()) < 1e-10);
        let img0 = u.apply(&ghz).unwrap();
        let img1 = u.apply(&w).unwrap();
        for j in 0..8 {
            assert!((img0[j] - c(if j == 0 { 1.0 } else { 0.0 })).norm() < 1e-10);
            assert!((img1[j] - c(if j == 1 { 1.0 } else { 0.0 })).norm() < 1e-10);
        }
    }

    #[test]
    fn complete_unitary_errors() {
        let a = StateVector::basis(1, 0).unwrap();
        assert!(matches!(
            complete_unitary(&[(a.clone(), 0), (plus(), 1)]),
            Err(LinalgError::NotOrthonormal(_))
        ));
        let b = StateVector::basis(1, 1).unwrap();
        assert!(matches!(complete_unitary(&[(a, 0), (b, 0)]), Err(LinalgError::DuplicateImage(0))));
    }

    #[test]
    fn fidelity_examples() {
        let z = pure_density(&StateVector::basis(1, 0).unwrap()).unwrap();
        assert_eq!(fidelity_pure(&z, &StateVector::basis(1, 0).unwrap()).unwrap(), 1.0);
        assert_eq!(fidelity_pure(&z, &StateVector::basis(1, 1).unwrap()).unwrap(), 0.0);
        let mixed = DensityMatrix::new(Matrix::identity(2).scale(c(0.5))).unwrap();
        assert!((fidelity_pure(&mixed, &plus()).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn density_validation() {
        let bad_trace = Matrix::identity(2);
        assert!(matches!(DensityMatrix::new(bad_trace), Err(LinalgError::BadTrace(_))));
        let mut non_herm = Matrix::identity(2).scale(c(0.5));
        non_herm[(0, 1)] = C64::new(0.0, 0.1);
        assert!(matches!(DensityMatrix::new(non_herm), Err(LinalgError::NotHermitian(_))));
        let mut neg = Matrix::zeros(2);
        neg[(0, 0)] = c(1.5);
        neg[(1, 1)] = c(-0.5);
        let rho = DensityMatrix::new(neg).unwrap();
        assert!(matches!(rho.validate_psd(), Err(LinalgError::NotPsd(_))));
        let mut rng = seeded_rng(3);
        random_density(3, &mut rng).validate_psd().unwrap();
    }

    #[test]
    fn debug_format_rows() {
        let s = format!("{:?}", Matrix::identity(2));
        assert_eq!(s.lines().count(), 2);
        assert!(s.starts_with("[1.00000e0+0.00000e0i, 0.00000e0+0.00000e0i]"));
    }
}
