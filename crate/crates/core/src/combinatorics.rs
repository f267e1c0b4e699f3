//! Bit strings, single-deletion sets and the two combinatorial conditions
//! that gate code construction.
//!
//! Positions are 1-based and count from the leftmost bit, so `x = x1 x2 ... xn`
//! and position 1 is the most significant bit of [`BitString::value`]. With
//! that convention lexicographic order on equal-length strings is plain
//! integer order, which is what [`BitStringSet`] iterates in.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Longest bit string representable by [`BitString`].
pub const MAX_LEN: usize = 63;

/// Default number of witnesses a [`Verdict`] keeps.
pub const DEFAULT_WITNESS_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("position {pos} out of range for length {len}")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("bit string length {0} not supported (must be 1..={MAX_LEN})")]
    BadLength(usize),
    #[error("cannot delete from a string of length {0}")]
    TooShort(usize),
    #[error("invalid bit string {0:?}: only '0' and '1' are allowed")]
    Parse(String),
    #[error("length mismatch: expected {expected}, got {got} for {string}")]
    LengthMismatch { expected: usize, got: usize, string: String },
    #[error("duplicate element {0} in set {1}")]
    Duplicate(String, &'static str),
    #[error("set {0} is empty")]
    EmptySet(&'static str),
    #[error("A and B share the element {0}")]
    NotDisjoint(String),
    #[error("code length must be at least 2, got {0}")]
    CodeTooShort(usize),
    #[error("bit must be 0 or 1, got {0}")]
    BadBit(u8),
}

/// A binary string of fixed length, stored most-significant-first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: u8,
    value: u64,
}

impl BitString {
    pub fn new(len: usize, value: u64) -> Result<Self, CodeError> {
        if len == 0 || len > MAX_LEN {
            return Err(CodeError::BadLength(len));
        }
        if value >> len != 0 {
            return Err(CodeError::Parse(format!("{value} does not fit in {len} bits")));
        }
        Ok(Self { len: len as u8, value })
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self, CodeError> {
        let mut value = 0u64;
        for &b in bits {
            if b > 1 {
                return Err(CodeError::BadBit(b));
            }
            value = (value << 1) | u64::from(b);
        }
        Self::new(bits.len(), value)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer value with position 1 as the most significant bit; also the
    /// computational-basis index of `|x>`.
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn index(&self) -> usize {
        self.value as usize
    }

    /// Bit at 1-based position `pos`.
    pub fn bit(&self, pos: usize) -> Result<u8, CodeError> {
        self.check_pos(pos)?;
        Ok(((self.value >> (self.len() - pos)) & 1) as u8)
    }

    pub fn bits(&self) -> Vec<u8> {
        (1..=self.len()).map(|p| ((self.value >> (self.len() - p)) & 1) as u8).collect()
    }

    fn check_pos(&self, pos: usize) -> Result<(), CodeError> {
        if pos == 0 || pos > self.len() {
            Err(CodeError::PositionOutOfRange { pos, len: self.len() })
        } else {
            Ok(())
        }
    }

    /// Remove the bit at 1-based position `pos`.
    pub fn delete_at(&self, pos: usize) -> Result<BitString, CodeError> {
        if self.len() < 2 {
            return Err(CodeError::TooShort(self.len()));
        }
        self.check_pos(pos)?;
        let low_bits = self.len() - pos;
        let high = self.value >> (low_bits + 1);
        let low = self.value & ((1u64 << low_bits) - 1);
        Ok(BitString { len: self.len - 1, value: (high << low_bits) | low })
    }

    /// Insert `bit` so that it lands at 1-based position `pos` of the result.
    pub fn insert_at(&self, pos: usize, bit: u8) -> Result<BitString, CodeError> {
        if bit > 1 {
            return Err(CodeError::BadBit(bit));
        }
        if pos == 0 || pos > self.len() + 1 {
            return Err(CodeError::PositionOutOfRange { pos, len: self.len() + 1 });
        }
        if self.len() + 1 > MAX_LEN {
            return Err(CodeError::BadLength(self.len() + 1));
        }
        let low_bits = self.len() + 1 - pos;
        let high = self.value >> low_bits;
        let low = self.value & ((1u64 << low_bits) - 1);
        let value = (((high << 1) | u64::from(bit)) << low_bits) | low;
        Ok(BitString { len: self.len + 1, value })
    }

    pub fn complement(&self) -> BitString {
        let mask = (1u64 << self.len()) - 1;
        BitString { len: self.len, value: !self.value & mask }
    }

    pub fn reversed(&self) -> BitString {
        let n = self.len();
        let value = self.value.reverse_bits() >> (64 - n);
        BitString { len: self.len, value }
    }

    /// Apply a coordinate permutation: bit `k` of the result (1-based) is bit
    /// `perm[k-1]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<BitString, CodeError> {
        if perm.len() != self.len() {
            return Err(CodeError::LengthMismatch {
                expected: self.len(),
                got: perm.len(),
                string: format!("{perm:?}"),
            });
        }
        let bits = perm.iter().map(|&p| self.bit(p)).collect::<Result<Vec<_>, _>>()?;
        BitString::from_bits(&bits)
    }

    pub fn weight(&self) -> u32 {
        self.value.count_ones()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in 1..=self.len() {
            let b = (self.value >> (self.len() - p)) & 1;
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() || s.len() > MAX_LEN {
            return Err(CodeError::BadLength(s.len()));
        }
        let mut value = 0u64;
        for c in s.chars() {
            let b = match c {
                '0' => 0,
                '1' => 1,
                _ => return Err(CodeError::Parse(s.to_string())),
            };
            value = (value << 1) | b;
        }
        Self::new(s.len(), value)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A set of equal-length bit strings, iterated lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitStringSet {
    n: usize,
    elems: BTreeSet<BitString>,
}

impl BitStringSet {
    pub fn empty(n: usize) -> Self {
        Self { n, elems: BTreeSet::new() }
    }

    /// Build a set, rejecting wrong lengths. Duplicates are merged.
    pub fn from_iter_checked<I>(n: usize, items: I) -> Result<Self, CodeError>
    where
        I: IntoIterator<Item = BitString>,
    {
        let mut set = Self::empty(n);
        for x in items {
            set.insert(x)?;
        }
        Ok(set)
    }

    /// Parse a list of `'0'/'1'` strings. Duplicates are an error here since
    /// they usually indicate a typo in a code file.
    pub fn parse_strs<S: AsRef<str>>(n: usize, items: &[S], name: &'static str) -> Result<Self, CodeError> {
        let mut set = Self::empty(n);
        for s in items {
            let x: BitString = s.as_ref().parse()?;
            if !set.insert(x)? {
                return Err(CodeError::Duplicate(x.to_string(), name));
            }
        }
        Ok(set)
    }

    /// Returns whether the element was newly inserted.
    pub fn insert(&mut self, x: BitString) -> Result<bool, CodeError> {
        if x.len() != self.n {
            return Err(CodeError::LengthMismatch { expected: self.n, got: x.len(), string: x.to_string() });
        }
        Ok(self.elems.insert(x))
    }

    pub fn remove(&mut self, x: &BitString) -> bool {
        self.elems.remove(x)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, x: &BitString) -> bool {
        self.elems.contains(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = &BitString> + '_ {
        self.elems.iter()
    }

    pub fn intersection(&self, other: &BitStringSet) -> BitStringSet {
        BitStringSet { n: self.n, elems: self.elems.intersection(&other.elems).copied().collect() }
    }

    pub fn is_disjoint(&self, other: &BitStringSet) -> bool {
        self.elems.is_disjoint(&other.elems)
    }

    pub fn map<F>(&self, f: F) -> BitStringSet
    where
        F: Fn(&BitString) -> BitString,
    {
        BitStringSet { n: self.n, elems: self.elems.iter().map(f).collect() }
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.elems.iter().map(ToString::to_string).collect()
    }
}

impl fmt::Display for BitStringSet {
    /// `{x,y,...}` in lexicographic order, `∅` when empty.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.elems.is_empty() {
            return f.write_str("∅");
        }
        f.write_str("{")?;
        for (k, x) in self.elems.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}

impl<'a> IntoIterator for &'a BitStringSet {
    type Item = &'a BitString;
    type IntoIter = std::collections::btree_set::Iter<'a, BitString>;

    fn into_iter(self) -> Self::IntoIter {
        self.elems.iter()
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Two disjoint nonempty sets of length-`n` strings, plus the derived block
/// sizes `a0 = |A|/λ`, `b0 = |B|/λ` with `λ = gcd(|A|, |B|)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CodePair {
    a: BitStringSet,
    b: BitStringSet,
}

impl CodePair {
    pub fn new(a: BitStringSet, b: BitStringSet) -> Result<Self, CodeError> {
        let n = a.n();
        if n < 2 {
            return Err(CodeError::CodeTooShort(n));
        }
        if b.n() != n {
            return Err(CodeError::LengthMismatch {
                expected: n,
                got: b.n(),
                string: "B".into(),
            });
        }
        if a.is_empty() {
            return Err(CodeError::EmptySet("A"));
        }
        if b.is_empty() {
            return Err(CodeError::EmptySet("B"));
        }
        if let Some(x) = a.intersection(&b).iter().next() {
            return Err(CodeError::NotDisjoint(x.to_string()));
        }
        Ok(Self { a, b })
    }

    /// Convenience constructor from string literals.
    pub fn from_strs<S: AsRef<str>>(n: usize, a: &[S], b: &[S]) -> Result<Self, CodeError> {
        Self::new(BitStringSet::parse_strs(n, a, "A")?, BitStringSet::parse_strs(n, b, "B")?)
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn a(&self) -> &BitStringSet {
        &self.a
    }

    pub fn b(&self) -> &BitStringSet {
        &self.b
    }

    pub fn lambda(&self) -> usize {
        gcd(self.a.len(), self.b.len())
    }

    pub fn a0(&self) -> usize {
        self.a.len() / self.lambda()
    }

    pub fn b0(&self) -> usize {
        self.b.len() / self.lambda()
    }

    pub fn swapped(&self) -> CodePair {
        CodePair { a: self.b.clone(), b: self.a.clone() }
    }

    pub fn complemented(&self) -> CodePair {
        CodePair { a: self.a.map(BitString::complement), b: self.b.map(BitString::complement) }
    }

    pub fn reversed(&self) -> CodePair {
        CodePair { a: self.a.map(BitString::reversed), b: self.b.map(BitString::reversed) }
    }

    /// `perm` is a permutation of `1..=n`; see [`BitString::permuted`].
    pub fn permuted(&self, perm: &[usize]) -> Result<CodePair, CodeError> {
        let map = |s: &BitStringSet| -> Result<BitStringSet, CodeError> {
            BitStringSet::from_iter_checked(s.n(), s.iter().map(|x| x.permuted(perm)).collect::<Result<Vec<_>, _>>()?)
        };
        CodePair::new(map(&self.a)?, map(&self.b)?)
    }

    /// The 4-qubit code with `|A| = 2`, `|B| = 6`.
    pub fn four_qubit_example() -> CodePair {
        CodePair::from_strs(4, &["0000", "1111"], &["0011", "0101", "1001", "0110", "1010", "1100"])
            .expect("valid literal")
    }

    /// The 8-qubit code with `|A| = |B| = 2`.
    pub fn eight_qubit_example() -> CodePair {
        CodePair::from_strs(8, &["00001001", "01101111"], &["00001111", "01101001"]).expect("valid literal")
    }
}

impl fmt::Display for CodePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} A={} B={}", self.n(), self.a, self.b)
    }
}

/// `x` with position `i` removed.
pub fn delete_at(x: &BitString, i: usize) -> Result<BitString, CodeError> {
    x.delete_at(i)
}

/// The `(i, b)` deletion set: `{ delete_at(x, i) : x in s, x_i = b }`.
pub fn delta_set(s: &BitStringSet, i: usize, b: u8) -> Result<BitStringSet, CodeError> {
    if b > 1 {
        return Err(CodeError::BadBit(b));
    }
    let n = s.n();
    if n < 2 {
        return Err(CodeError::TooShort(n));
    }
    if i == 0 || i > n {
        return Err(CodeError::PositionOutOfRange { pos: i, len: n });
    }
    let mut out = BitStringSet::empty(n - 1);
    for x in s {
        if x.bit(i)? == b {
            out.insert(x.delete_at(i)?)?;
        }
    }
    Ok(out)
}

/// All `Δ_{i,b}` sets of both sides of a pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaTable {
    n: usize,
    delta_a: Vec<[BitStringSet; 2]>,
    delta_b: Vec<[BitStringSet; 2]>,
}

impl DeltaTable {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `Δ_{i,b}(A)`, 1-based `i`. Panics on out-of-range arguments.
    pub fn a(&self, i: usize, b: u8) -> &BitStringSet {
        &self.delta_a[i - 1][b as usize]
    }

    pub fn b(&self, i: usize, b: u8) -> &BitStringSet {
        &self.delta_b[i - 1][b as usize]
    }

    pub fn side(&self, side: Side, i: usize, b: u8) -> &BitStringSet {
        match side {
            Side::A => self.a(i, b),
            Side::B => self.b(i, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

pub fn delta_table(pair: &CodePair) -> DeltaTable {
    let n = pair.n();
    let row = |s: &BitStringSet, i: usize| -> [BitStringSet; 2] {
        [
            delta_set(s, i, 0).expect("valid position"),
            delta_set(s, i, 1).expect("valid position"),
        ]
    };
    DeltaTable {
        n,
        delta_a: (1..=n).map(|i| row(pair.a(), i)).collect(),
        delta_b: (1..=n).map(|i| row(pair.b(), i)).collect(),
    }
}

/// One reason a condition fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "condition")]
pub enum Witness {
    /// `element ∈ Δ_{i1,b1}(A) ∩ Δ_{i2,b2}(B)`.
    C1 { i1: usize, b1: u8, i2: usize, b2: u8, element: BitString },
    /// `|A|·b_side != |B|·a_side` where `a_side = |Δ_{i1,b}(A) ∩ Δ_{i2,b}(A)|`
    /// and `b_side` likewise for B.
    C2 { i1: usize, i2: usize, b: u8, a_side: usize, b_side: usize, lhs: usize, rhs: usize },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::C1 { i1, b1, i2, b2, element } => write!(
                f,
                "C1: {element} in Δ_{{{i1},{b1}}}(A) ∩ Δ_{{{i2},{b2}}}(B)"
            ),
            Witness::C2 { i1, i2, b, a_side, b_side, lhs, rhs } => write!(
                f,
                "C2: (i1={i1}, i2={i2}, b={b}) |A|·{b_side} = {lhs} != |B|·{a_side} = {rhs}"
            ),
        }
    }
}

/// Outcome of a condition check. `holds` iff no witnesses were found;
/// `total_witnesses` counts past the storage cap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    pub witnesses: Vec<Witness>,
    pub total_witnesses: usize,
}

impl Verdict {
    fn collect(cap: usize) -> VerdictBuilder {
        VerdictBuilder { cap, witnesses: Vec::new(), total: 0 }
    }
}

struct VerdictBuilder {
    cap: usize,
    witnesses: Vec<Witness>,
    total: usize,
}

impl VerdictBuilder {
    fn push(&mut self, w: Witness) {
        self.total += 1;
        if self.witnesses.len() < self.cap {
            self.witnesses.push(w);
        }
    }

    fn finish(self) -> Verdict {
        Verdict { holds: self.total == 0, witnesses: self.witnesses, total_witnesses: self.total }
    }
}

/// Distance condition: every `Δ_{i1,b1}(A)` is disjoint from every `Δ_{i2,b2}(B)`.
pub fn check_c1(pair: &CodePair) -> Verdict {
    check_c1_capped(pair, DEFAULT_WITNESS_CAP)
}

pub fn check_c1_capped(pair: &CodePair, cap: usize) -> Verdict {
    let table = delta_table(pair);
    let n = pair.n();
    let mut v = Verdict::collect(cap);
    for i1 in 1..=n {
        for b1 in 0..2u8 {
            for i2 in 1..=n {
                for b2 in 0..2u8 {
                    for x in table.a(i1, b1).intersection(table.b(i2, b2)).iter() {
                        v.push(Witness::C1 { i1, b1, i2, b2, element: *x });
                    }
                }
            }
        }
    }
    v.finish()
}

/// Ratio condition: `|A|·|Δ_{i1,b}(B) ∩ Δ_{i2,b}(B)| = |B|·|Δ_{i1,b}(A) ∩ Δ_{i2,b}(A)|`
/// for all `i1, i2, b`, diagonal included.
pub fn check_c2(pair: &CodePair) -> Verdict {
    check_c2_capped(pair, DEFAULT_WITNESS_CAP)
}

pub fn check_c2_capped(pair: &CodePair, cap: usize) -> Verdict {
    let table = delta_table(pair);
    let n = pair.n();
    let (size_a, size_b) = (pair.a().len(), pair.b().len());
    let mut v = Verdict::collect(cap);
    for i1 in 1..=n {
        for i2 in 1..=n {
            for b in 0..2u8 {
                let a_side = table.a(i1, b).intersection(table.a(i2, b)).len();
                let b_side = table.b(i1, b).intersection(table.b(i2, b)).len();
                let (lhs, rhs) = (size_a * b_side, size_b * a_side);
                if lhs != rhs {
                    v.push(Witness::C2 { i1, i2, b, a_side, b_side, lhs, rhs });
                }
            }
        }
    }
    v.finish()
}

/// Both conditions at once, short-circuiting on the first failure.
pub fn satisfies_conditions(pair: &CodePair) -> bool {
    check_c1_capped(pair, 0).holds && check_c2_capped(pair, 0).holds
}
