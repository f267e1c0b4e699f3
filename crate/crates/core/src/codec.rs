//! Encoder, deletion channel, syndrome measurement and decoder for a code
//! pair `(A, B)`.
//!
//! A message `α|0> + β|1>` is encoded as
//! `α/√|A| Σ_{a∈A} |a> + β/√|B| Σ_{b∈B} |b>`. After one qubit is traced out
//! the decoder measures with a projector family built from the deletion
//! sets, rotates the surviving superposition onto `|0…0>α + |0…1>β` and
//! discards all but the last qubit.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{check_c1_capped, check_c2_capped, delta_table, BitString, CodeError, CodePair};
use crate::linalg::{
    self, complete_unitary, fidelity_pure, partial_trace_qubit, pure_density, BasisProjector, DensityMatrix,
    LinalgError, StateVector, UnitaryMatrix, C64,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("code pair does not satisfy the construction conditions (C1: {c1}, C2: {c2})")]
    ConditionsNotMet { c1: bool, c2: bool },
    #[error("measurement construction failed: {0}")]
    ConditionViolated(String),
    #[error("invalid received state: {0}")]
    InvalidState(String),
    #[error("message is not normalized (|α|²+|β|² = {0})")]
    NotNormalized(f64),
}

/// Whether constructors verify the distance and ratio conditions first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Checks {
    #[default]
    Enforce,
    /// For experimenting with pairs that violate the conditions. Decoding
    /// then carries no correctness guarantee.
    Skip,
}

fn require_conditions(pair: &CodePair, checks: Checks) -> Result<(), CodecError> {
    if checks == Checks::Skip {
        return Ok(());
    }
    let c1 = check_c1_capped(pair, 0).holds;
    let c2 = check_c2_capped(pair, 0).holds;
    if c1 && c2 {
        Ok(())
    } else {
        Err(CodecError::ConditionsNotMet { c1, c2 })
    }
}

/// Single-qubit message `α|0> + β|1>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitMessage {
    alpha: C64,
    beta: C64,
}

impl QubitMessage {
    pub fn new(alpha: C64, beta: C64) -> Result<Self, CodecError> {
        Self::with_tolerance(alpha, beta, linalg::NORM_TOL)
    }

    pub fn with_tolerance(alpha: C64, beta: C64, tol: f64) -> Result<Self, CodecError> {
        let n2 = alpha.norm_sqr() + beta.norm_sqr();
        if !n2.is_finite() || (n2 - 1.0).abs() > tol {
            return Err(CodecError::NotNormalized(n2));
        }
        Ok(Self { alpha, beta })
    }

    /// Rescales any nonzero pair to unit norm.
    pub fn normalize(alpha: C64, beta: C64) -> Result<Self, CodecError> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(CodecError::NotNormalized(norm * norm));
        }
        Self::new(alpha / norm, beta / norm)
    }

    pub fn zero() -> Self {
        Self { alpha: C64::new(1.0, 0.0), beta: C64::new(0.0, 0.0) }
    }

    pub fn one() -> Self {
        Self { alpha: C64::new(0.0, 0.0), beta: C64::new(1.0, 0.0) }
    }

    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self { alpha: C64::new(h, 0.0), beta: C64::new(h, 0.0) }
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn state(&self) -> StateVector {
        StateVector::new(vec![self.alpha, self.beta]).expect("two amplitudes")
    }
}

/// `(1,0)`, `(0,1)`, `(1,±1)/√2`, `(1,±i)/√2`, then `random` seeded Haar-ish
/// messages.
pub fn message_grid(random: usize, seed: u64) -> Vec<QubitMessage> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut grid = vec![
        QubitMessage::zero(),
        QubitMessage::one(),
        QubitMessage::plus(),
        QubitMessage { alpha: C64::new(h, 0.0), beta: C64::new(-h, 0.0) },
        QubitMessage { alpha: C64::new(h, 0.0), beta: C64::new(0.0, h) },
        QubitMessage { alpha: C64::new(h, 0.0), beta: C64::new(0.0, -h) },
    ];
    let mut rng = linalg::seeded_rng(seed);
    for _ in 0..random {
        let v = linalg::random_state(1, &mut rng);
        let a = v.amplitudes();
        grid.push(QubitMessage { alpha: a[0], beta: a[1] });
    }
    grid
}

/// `Enc_{A,B}` as a state vector on `n` qubits.
pub fn encode(pair: &CodePair, msg: &QubitMessage) -> Result<StateVector, CodecError> {
    encode_with(pair, msg, Checks::Enforce)
}

pub fn encode_with(pair: &CodePair, msg: &QubitMessage, checks: Checks) -> Result<StateVector, CodecError> {
    require_conditions(pair, checks)?;
    let dim = 1usize << pair.n();
    let mut amp = vec![C64::new(0.0, 0.0); dim];
    let wa = msg.alpha / (pair.a().len() as f64).sqrt();
    let wb = msg.beta / (pair.b().len() as f64).sqrt();
    for x in pair.a() {
        amp[x.index()] = wa;
    }
    for y in pair.b() {
        amp[y.index()] = wb;
    }
    Ok(StateVector::normalized(amp)?)
}

/// Encoded density matrix `|Ψ><Ψ|`.
pub fn encode_density(pair: &CodePair, msg: &QubitMessage) -> Result<DensityMatrix, CodecError> {
    Ok(pure_density(&encode(pair, msg)?)?)
}

/// Deletion error `D_i`: trace out qubit `i`.
pub fn delete(rho: &DensityMatrix, i: usize) -> Result<DensityMatrix, CodecError> {
    Ok(partial_trace_qubit(rho, i)?)
}

/// One projector `P_k = Σ|x_t><x_t| + Σ|y_s><y_s|` of the syndrome measurement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeasurementBlock {
    pub xs: Vec<BitString>,
    pub ys: Vec<BitString>,
}

impl MeasurementBlock {
    pub fn projector(&self) -> BasisProjector {
        let len = self.xs.first().or(self.ys.first()).map_or(1, BitString::len);
        let idx = self.xs.iter().chain(&self.ys).map(BitString::index).collect();
        BasisProjector::new(len, idx).expect("distinct block elements")
    }
}

/// Ordered projector family, plus the complement of their union.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeletionMeasurement {
    n: usize,
    blocks: Vec<MeasurementBlock>,
    #[serde(skip)]
    projectors: Vec<BasisProjector>,
    #[serde(serialize_with = "serialize_residual")]
    residual: BasisProjector,
}

fn serialize_residual<S: serde::Serializer>(p: &BasisProjector, s: S) -> Result<S::Ok, S::Error> {
    let strs: Vec<String> = p
        .indices()
        .iter()
        .map(|&j| BitString::new(p.qubits(), j as u64).expect("in range").to_string())
        .collect();
    strs.serialize(s)
}

impl DeletionMeasurement {
    /// Code length `n`; projectors act on `n - 1` qubits.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[MeasurementBlock] {
        &self.blocks
    }

    pub fn projectors(&self) -> &[BasisProjector] {
        &self.projectors
    }

    /// The residual projector, or `None` when the blocks already cover
    /// every basis state.
    pub fn residual(&self) -> Option<&BasisProjector> {
        (!self.residual.is_empty()).then_some(&self.residual)
    }

    /// Number of measurement outcomes including a nonempty residual.
    pub fn outcome_count(&self) -> usize {
        self.blocks.len() + usize::from(self.residual().is_some())
    }
}

fn take_smallest(set: &BTreeSet<BitString>, used: &HashSet<BitString>, count: usize) -> Vec<BitString> {
    set.iter().filter(|x| !used.contains(x)).take(count).copied().collect()
}

fn available(set: &BTreeSet<BitString>, used: &HashSet<BitString>) -> usize {
    set.iter().filter(|x| !used.contains(x)).count()
}

/// Builds the syndrome measurement with a fixed selection policy.
///
/// First pass: scan `(i1, i2, b)` with `i1 < i2` lexicographically for a
/// nonempty `Δ_{i1,b}(A) ∩ Δ_{i2,b}(A)`; take its `a0` smallest elements and
/// the `b0` smallest of the matching B intersection, remove them from every
/// `Δ_{i,b}` at that `b`, and restart the scan. Second pass: scan `(i, b)`
/// for a nonempty `Δ_{i,b}(A)` and take from `Δ_{i,b}(A)`, `Δ_{i,b}(B)`
/// likewise. Strings already placed in a block are never selected again.
pub fn build_measurement(pair: &CodePair) -> Result<DeletionMeasurement, CodecError> {
    build_measurement_with(pair, Checks::Enforce)
}

pub fn build_measurement_with(pair: &CodePair, checks: Checks) -> Result<DeletionMeasurement, CodecError> {
    require_conditions(pair, checks)?;
    let n = pair.n();
    let (a0, b0) = (pair.a0(), pair.b0());
    let table = delta_table(pair);
    // working copies indexed [i-1][b]
    let mut da: Vec<[BTreeSet<BitString>; 2]> = (1..=n)
        .map(|i| [0u8, 1].map(|b| table.a(i, b).iter().copied().collect()))
        .collect();
    let mut db: Vec<[BTreeSet<BitString>; 2]> = (1..=n)
        .map(|i| [0u8, 1].map(|b| table.b(i, b).iter().copied().collect()))
        .collect();
    let mut used: HashSet<BitString> = HashSet::new();
    let mut blocks = Vec::new();

    'pairs: loop {
        for i1 in 0..n {
            for i2 in i1 + 1..n {
                for b in 0..2 {
                    let ia: BTreeSet<BitString> = da[i1][b].intersection(&da[i2][b]).copied().collect();
                    let na = available(&ia, &used);
                    if na == 0 {
                        continue;
                    }
                    let ib: BTreeSet<BitString> = db[i1][b].intersection(&db[i2][b]).copied().collect();
                    let nb = available(&ib, &used);
                    let at = format!("(i1={}, i2={}, b={b})", i1 + 1, i2 + 1);
                    if !na.is_multiple_of(a0) || !nb.is_multiple_of(b0) || na / a0 != nb / b0 {
                        return Err(CodecError::ConditionViolated(format!(
                            "intersection sizes {na}:{nb} at {at} are not in ratio {a0}:{b0}"
                        )));
                    }
                    let xs = take_smallest(&ia, &used, a0);
                    let ys = take_smallest(&ib, &used, b0);
                    for i in 0..n {
                        for x in &xs {
                            da[i][b].remove(x);
                        }
                        for y in &ys {
                            db[i][b].remove(y);
                        }
                    }
                    used.extend(xs.iter().chain(&ys).copied());
                    blocks.push(MeasurementBlock { xs, ys });
                    continue 'pairs;
                }
            }
        }
        break;
    }

    'singles: loop {
        for i in 0..n {
            for b in 0..2 {
                if available(&da[i][b], &used) == 0 {
                    continue;
                }
                let xs = take_smallest(&da[i][b], &used, a0);
                let ys = take_smallest(&db[i][b], &used, b0);
                if xs.len() < a0 || ys.len() < b0 {
                    return Err(CodecError::ConditionViolated(format!(
                        "Δ_{{{},{b}}} offers {} A-side and {} B-side strings, need {a0} and {b0}",
                        i + 1,
                        xs.len(),
                        ys.len()
                    )));
                }
                for x in &xs {
                    da[i][b].remove(x);
                }
                for y in &ys {
                    db[i][b].remove(y);
                }
                used.extend(xs.iter().chain(&ys).copied());
                blocks.push(MeasurementBlock { xs, ys });
                continue 'singles;
            }
        }
        break;
    }

    let m = n - 1;
    let residual_idx: Vec<usize> = (0..1usize << m)
        .filter(|&j| !used.contains(&BitString::new(m, j as u64).expect("in range")))
        .collect();
    let residual = BasisProjector::new(m, residual_idx)?;
    let projectors: Vec<BasisProjector> = blocks.iter().map(MeasurementBlock::projector).collect();
    linalg::check_partition(&projectors, Some(&residual))?;
    Ok(DeletionMeasurement { n, blocks, projectors, residual })
}

/// One error-correcting unitary per measurement block.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionSet {
    ops: Vec<UnitaryMatrix>,
}

impl CorrectionSet {
    pub fn ops(&self) -> &[UnitaryMatrix] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Normalized `Σ_{x ∈ side} P_k |x>` for one block, where `side` is the
/// union of all original deletion sets of A (or B).
fn projected_side_sum(
    side: &BTreeSet<BitString>,
    proj: &BasisProjector,
    qubits: usize,
) -> Result<StateVector, CodecError> {
    let hits: Vec<usize> = proj
        .indices()
        .iter()
        .copied()
        .filter(|&j| side.contains(&BitString::new(qubits, j as u64).expect("in range")))
        .collect();
    if hits.is_empty() {
        return Err(CodecError::ConditionViolated("block has an empty projected superposition".into()));
    }
    Ok(StateVector::uniform_superposition(qubits, &hits)?)
}

/// Builds `U_k` mapping the block's A-superposition to `|0…00>` and its
/// B-superposition to `|0…01>`.
pub fn build_corrections(pair: &CodePair, meas: &DeletionMeasurement) -> Result<CorrectionSet, CodecError> {
    let n = pair.n();
    let table = delta_table(pair);
    let union = |a_side: bool| -> BTreeSet<BitString> {
        (1..=n)
            .flat_map(|i| [0u8, 1].map(|b| if a_side { table.a(i, b) } else { table.b(i, b) }))
            .flat_map(|s| s.iter().copied())
            .collect()
    };
    let (delta_a, delta_b) = (union(true), union(false));
    let ops = meas
        .projectors()
        .iter()
        .map(|p| {
            let va = projected_side_sum(&delta_a, p, n - 1)?;
            let vb = projected_side_sum(&delta_b, p, n - 1)?;
            Ok(complete_unitary(&[(va, 0), (vb, 1)])?)
        })
        .collect::<Result<Vec<_>, CodecError>>()?;
    Ok(CorrectionSet { ops })
}

/// A code pair together with its measurement and correction operators.
#[derive(Debug, Clone)]
pub struct CodecInstance {
    pair: CodePair,
    measurement: DeletionMeasurement,
    corrections: CorrectionSet,
}

/// Result of a decode: the recovered qubit and the realized outcome index.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub sigma: DensityMatrix,
    pub outcome: usize,
}

/// Probabilities `Tr(P_k ρ')` per block, and of the residual when it exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    pub blocks: Vec<f64>,
    pub residual: Option<f64>,
}

impl OutcomeDistribution {
    /// Blocks first, residual last.
    pub fn all(&self) -> Vec<f64> {
        self.blocks.iter().copied().chain(self.residual).collect()
    }

    pub fn nonzero_blocks(&self) -> usize {
        self.blocks.iter().filter(|&&p| p > linalg::PROB_THRESHOLD).count()
    }
}

impl CodecInstance {
    pub fn new(pair: CodePair) -> Result<Self, CodecError> {
        Self::with_checks(pair, Checks::Enforce)
    }

    pub fn with_checks(pair: CodePair, checks: Checks) -> Result<Self, CodecError> {
        let measurement = build_measurement_with(&pair, checks)?;
        let corrections = build_corrections(&pair, &measurement)?;
        Ok(Self { pair, measurement, corrections })
    }

    pub fn pair(&self) -> &CodePair {
        &self.pair
    }

    pub fn measurement(&self) -> &DeletionMeasurement {
        &self.measurement
    }

    pub fn corrections(&self) -> &CorrectionSet {
        &self.corrections
    }

    fn check_input(&self, rho: &DensityMatrix) -> Result<(), CodecError> {
        let m = self.pair.n() - 1;
        if rho.qubits() != m {
            return Err(LinalgError::DimensionMismatch { expected: 1 << m, got: rho.dim() }.into());
        }
        Ok(())
    }

    pub fn outcome_distribution(&self, rho: &DensityMatrix) -> Result<OutcomeDistribution, CodecError> {
        self.check_input(rho)?;
        let meas = &self.measurement;
        let outcomes = linalg::measure(meas.projectors(), meas.residual(), rho)?;
        let mut probs: Vec<f64> = outcomes.iter().map(|o| o.prob).collect();
        let residual = meas.residual().map(|_| probs.pop().expect("residual outcome"));
        Ok(OutcomeDistribution { blocks: probs, residual })
    }

    /// `Dec_{A,B}`: measure, sample an outcome with `seed`, correct, and trace
    /// out the first qubit `n - 2` times.
    pub fn decode(&self, rho: &DensityMatrix, seed: u64) -> Result<Decoded, CodecError> {
        self.decode_with(rho, &mut linalg::seeded_rng(seed))
    }

    pub fn decode_with<R: rand::Rng + ?Sized>(&self, rho: &DensityMatrix, rng: &mut R) -> Result<Decoded, CodecError> {
        self.check_input(rho)?;
        let meas = &self.measurement;
        let outcomes = linalg::measure(meas.projectors(), meas.residual(), rho)?;
        let probs: Vec<f64> = outcomes.iter().map(|o| o.prob).collect();
        let k = linalg::sample_with(&probs, rng)?;
        if k >= meas.blocks().len() {
            return Err(CodecError::InvalidState("measurement landed on the residual projector".into()));
        }
        let post = outcomes[k]
            .post
            .as_ref()
            .ok_or_else(|| CodecError::InvalidState(format!("outcome {k} has zero probability")))?;
        let mut state = post.conjugate_by(&self.corrections.ops[k])?;
        for _ in 0..self.pair.n() - 2 {
            state = partial_trace_qubit(&state, 1)?;
        }
        Ok(Decoded { sigma: state, outcome: k })
    }

    /// Fidelity of `Dec(D_i(Enc(msg)))` with the original message.
    pub fn roundtrip(&self, msg: &QubitMessage, i: usize, seed: u64) -> Result<f64, CodecError> {
        let rho = encode_density(&self.pair, msg)?;
        let received = delete(&rho, i)?;
        let decoded = self.decode(&received, seed)?;
        Ok(fidelity_pure(&decoded.sigma, &msg.state())?)
    }
}

/// Outcome probabilities for `rho_prime` under `instance`'s measurement.
pub fn outcome_distribution(instance: &CodecInstance, rho_prime: &DensityMatrix) -> Result<OutcomeDistribution, CodecError> {
    instance.outcome_distribution(rho_prime)
}

pub fn decode(instance: &CodecInstance, rho_prime: &DensityMatrix, seed: u64) -> Result<Decoded, CodecError> {
    instance.decode(rho_prime, seed)
}

/// Encode, delete qubit `i`, decode; returns the fidelity with `msg`.
pub fn roundtrip(pair: &CodePair, msg: &QubitMessage, i: usize, seed: u64) -> Result<f64, CodecError> {
    CodecInstance::new(pair.clone())?.roundtrip(msg, i, seed)
}
