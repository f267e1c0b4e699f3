//! Backtracking search for code pairs satisfying both construction
//! conditions.
//!
//! Every string of the universe is assigned to A, to B or to neither. The
//! distance condition only depends on the union of deletion results per
//! side and can only become false as elements are added, so it is checked
//! incrementally and prunes the tree. The ratio condition is not monotone
//! and is checked on complete assignments.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::codec::{message_grid, CodecError, CodecInstance};
use crate::combinatorics::{check_c1, check_c2, BitString, BitStringSet, CodeError, CodePair};

pub const MIN_N: usize = 2;
pub const MAX_N: usize = 10;
/// Searches estimated above this many candidate pairs need `force`.
pub const MAX_CANDIDATES: f64 = 1e9;
/// Tree depth at which work is split across threads.
pub const SPLIT_DEPTH: usize = 4;
/// Seed for the random part of the message grid in [`verify_found`].
pub const VERIFY_SEED: u64 = 0x5eed;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search spec: {0}")]
    BadSpec(String),
    #[error("search space too large: about {estimate:.3e} candidate pairs (limit {MAX_CANDIDATES:e}); pass force to run anyway")]
    TooLarge { estimate: f64 },
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Codec(#[from] CodecError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpec {
    pub n: usize,
    pub size_a: Option<usize>,
    pub size_b: Option<usize>,
    pub max_results: Option<usize>,
    pub symmetry_reduce: bool,
    /// Restrict candidates to these strings instead of all of `{0,1}^n`.
    pub universe: Option<Vec<BitString>>,
    pub force: bool,
}

impl SearchSpec {
    pub fn new(n: usize) -> Self {
        Self { n, size_a: None, size_b: None, max_results: None, symmetry_reduce: false, universe: None, force: false }
    }

    pub fn sizes(mut self, size_a: usize, size_b: usize) -> Self {
        self.size_a = Some(size_a);
        self.size_b = Some(size_b);
        self
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if !(MIN_N..=MAX_N).contains(&self.n) {
            return Err(SearchError::BadSpec(format!("n must be in {MIN_N}..={MAX_N}, got {}", self.n)));
        }
        if self.size_a == Some(0) || self.size_b == Some(0) {
            return Err(SearchError::BadSpec("set sizes must be at least 1".into()));
        }
        if let Some(u) = &self.universe {
            if let Some(x) = u.iter().find(|x| x.len() != self.n) {
                return Err(SearchError::BadSpec(format!("universe string {x} does not have length {}", self.n)));
            }
        }
        Ok(())
    }

    fn universe_strings(&self) -> Vec<BitString> {
        match &self.universe {
            Some(u) => u.iter().copied().collect::<BTreeSet<_>>().into_iter().collect(),
            None => (0..1u64 << self.n).map(|v| BitString::new(self.n, v).expect("fits")).collect(),
        }
    }

    /// Number of candidate `(A, B)` assignments before pruning.
    pub fn estimate_candidates(&self) -> f64 {
        let u = match &self.universe {
            Some(u) => u.iter().collect::<BTreeSet<_>>().len(),
            None => 1usize << self.n,
        } as f64;
        let choose = |n: f64, k: usize| -> f64 {
            let k = k as f64;
            if k > n {
                return 0.0;
            }
            (0..k as usize).fold(1.0, |acc, j| acc * (n - j as f64) / (j as f64 + 1.0))
        };
        match (self.size_a, self.size_b) {
            (Some(a), Some(b)) => choose(u, a) * choose(u - a as f64, b),
            (Some(k), None) | (None, Some(k)) => choose(u, k) * 2f64.powf(u - k as f64),
            (None, None) => 3f64.powf(u),
        }
    }
}

/// Strings within Hamming distance `radius` of any center.
pub fn hamming_ball(centers: &[BitString], radius: u32) -> Vec<BitString> {
    let mut out = BTreeSet::new();
    for c in centers {
        let n = c.len();
        for v in 0..1u64 << n {
            if (v ^ c.value()).count_ones() <= radius {
                out.insert(BitString::new(n, v).expect("fits"));
            }
        }
    }
    out.into_iter().collect()
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub spec: SearchSpec,
    pub found: Vec<CodePair>,
    pub states_examined: u64,
    pub elapsed: Duration,
    /// Pairs dropped by `max_results`.
    pub truncated: usize,
}

/// Fixed-width bit set over `(n-1)`-bit strings, `n <= 10`.
#[derive(Clone, Copy, Default, PartialEq, Eq)]
struct Mask([u64; 8]);

impl Mask {
    fn set(&mut self, j: usize) {
        self.0[j >> 6] |= 1 << (j & 63);
    }

    fn and_count(&self, other: &Mask) -> u32 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones()).sum()
    }
}

struct Problem {
    n: usize,
    universe: Vec<BitString>,
    /// Distinct single-deletion results of each universe string.
    dels: Vec<Vec<usize>>,
    size_a: Option<usize>,
    size_b: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Slot {
    A,
    B,
    Neither,
}

const BRANCH_ORDER: [Slot; 3] = [Slot::A, Slot::B, Slot::Neither];

/// Mutable DFS state; `ball_*[v]` counts strings on a side that reach `v`
/// by one deletion.
#[derive(Clone)]
struct State {
    ball_a: Vec<u16>,
    ball_b: Vec<u16>,
    a: Vec<usize>,
    b: Vec<usize>,
}

struct Outcome {
    found: Vec<CodePair>,
    states: u64,
}

impl Problem {
    fn new(spec: &SearchSpec) -> Self {
        let universe = spec.universe_strings();
        let dels = universe
            .iter()
            .map(|x| {
                (1..=x.len())
                    .map(|i| x.delete_at(i).expect("n >= 2").index())
                    .collect::<BTreeSet<_>>()
                    .into_iter()
                    .collect()
            })
            .collect();
        Self { n: spec.n, universe, dels, size_a: spec.size_a, size_b: spec.size_b }
    }

    fn empty_state(&self) -> State {
        let m = 1 << (self.n - 1);
        State { ball_a: vec![0; m], ball_b: vec![0; m], a: Vec::new(), b: Vec::new() }
    }

    /// Whether `slot` can be chosen for string `pos` without breaking the
    /// distance condition or the size constraints.
    fn allowed(&self, st: &State, pos: usize, slot: Slot) -> bool {
        let remaining = self.universe.len() - pos - 1;
        let (na, nb) = match slot {
            Slot::A => (st.a.len() + 1, st.b.len()),
            Slot::B => (st.a.len(), st.b.len() + 1),
            Slot::Neither => (st.a.len(), st.b.len()),
        };
        let need_a = self.size_a.map_or(usize::from(na == 0), |s| s.saturating_sub(na));
        let need_b = self.size_b.map_or(usize::from(nb == 0), |s| s.saturating_sub(nb));
        if self.size_a.is_some_and(|s| na > s) || self.size_b.is_some_and(|s| nb > s) {
            return false;
        }
        if need_a + need_b > remaining {
            return false;
        }
        match slot {
            Slot::A => self.dels[pos].iter().all(|&v| st.ball_b[v] == 0),
            Slot::B => self.dels[pos].iter().all(|&v| st.ball_a[v] == 0),
            Slot::Neither => true,
        }
    }

    fn place(&self, st: &mut State, pos: usize, slot: Slot) {
        match slot {
            Slot::A => {
                for &v in &self.dels[pos] {
                    st.ball_a[v] += 1;
                }
                st.a.push(pos);
            }
            Slot::B => {
                for &v in &self.dels[pos] {
                    st.ball_b[v] += 1;
                }
                st.b.push(pos);
            }
            Slot::Neither => {}
        }
    }

    fn unplace(&self, st: &mut State, pos: usize, slot: Slot) {
        match slot {
            Slot::A => {
                for &v in &self.dels[pos] {
                    st.ball_a[v] -= 1;
                }
                st.a.pop();
            }
            Slot::B => {
                for &v in &self.dels[pos] {
                    st.ball_b[v] -= 1;
                }
                st.b.pop();
            }
            Slot::Neither => {}
        }
    }

    /// `masks[i][b]` is `Δ_{i,b}` of the given side, `i` 0-based.
    fn delta_masks(&self, side: &[usize]) -> Vec<[Mask; 2]> {
        let mut masks = vec![[Mask::default(); 2]; self.n];
        for &pos in side {
            let x = self.universe[pos];
            for (i, row) in masks.iter_mut().enumerate() {
                let b = x.bit(i + 1).expect("in range") as usize;
                row[b].set(x.delete_at(i + 1).expect("n >= 2").index());
            }
        }
        masks
    }

    fn ratio_condition(&self, st: &State) -> bool {
        let (ma, mb) = (self.delta_masks(&st.a), self.delta_masks(&st.b));
        let (sa, sb) = (st.a.len() as u64, st.b.len() as u64);
        for i1 in 0..self.n {
            for i2 in i1..self.n {
                for b in 0..2 {
                    let ia = u64::from(ma[i1][b].and_count(&ma[i2][b]));
                    let ib = u64::from(mb[i1][b].and_count(&mb[i2][b]));
                    if sa * ib != sb * ia {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn leaf(&self, st: &State, out: &mut Outcome) {
        if st.a.is_empty() || st.b.is_empty() {
            return;
        }
        if self.size_a.is_some_and(|s| s != st.a.len()) || self.size_b.is_some_and(|s| s != st.b.len()) {
            return;
        }
        if !self.ratio_condition(st) {
            return;
        }
        let side = |idx: &[usize]| {
            BitStringSet::from_iter_checked(self.n, idx.iter().map(|&p| self.universe[p])).expect("same length")
        };
        out.found.push(CodePair::new(side(&st.a), side(&st.b)).expect("disjoint by construction"));
    }

    fn dfs(&self, st: &mut State, pos: usize, out: &mut Outcome) {
        out.states += 1;
        if pos == self.universe.len() {
            self.leaf(st, out);
            return;
        }
        for slot in BRANCH_ORDER {
            if self.allowed(st, pos, slot) {
                self.place(st, pos, slot);
                self.dfs(st, pos + 1, out);
                self.unplace(st, pos, slot);
            }
        }
    }

    /// Expand the first `depth` levels in branch order. Returns the frontier
    /// states and the number of interior nodes visited.
    fn frontier(&self, depth: usize) -> (Vec<State>, u64) {
        let mut level = vec![self.empty_state()];
        let mut visited = 0;
        for pos in 0..depth {
            let mut next = Vec::new();
            for st in level {
                visited += 1;
                for slot in BRANCH_ORDER {
                    if self.allowed(&st, pos, slot) {
                        let mut child = st.clone();
                        self.place(&mut child, pos, slot);
                        next.push(child);
                    }
                }
            }
            level = next;
        }
        (level, visited)
    }
}

/// Runs the search. The found list is sorted by `(A, B)` and is identical
/// for any thread count.
pub fn enumerate_codes(spec: &SearchSpec) -> Result<SearchReport, SearchError> {
    spec.validate()?;
    let estimate = spec.estimate_candidates();
    if estimate > MAX_CANDIDATES && !spec.force {
        return Err(SearchError::TooLarge { estimate });
    }
    let start = Instant::now();
    let problem = Problem::new(spec);
    let depth = SPLIT_DEPTH.min(problem.universe.len());
    let (frontier, interior) = problem.frontier(depth);
    let parts: Vec<Outcome> = frontier
        .into_par_iter()
        .map(|mut st| {
            let mut out = Outcome { found: Vec::new(), states: 0 };
            problem.dfs(&mut st, depth, &mut out);
            out
        })
        .collect();

    let mut states = interior;
    let mut found = Vec::new();
    for part in parts {
        states += part.states;
        found.extend(part.found);
    }
    found.sort_by(|p, q| (p.a(), p.b()).cmp(&(q.a(), q.b())));
    for pair in &found {
        // redundant with the incremental checks
        assert!(check_c1(pair).holds && check_c2(pair).holds, "search emitted {pair}");
    }
    if spec.symmetry_reduce {
        let mut seen = BTreeSet::new();
        found.retain(|p| {
            let c = canonical_form(p);
            seen.insert((c.a().clone(), c.b().clone()))
        });
    }
    let mut truncated = 0;
    if let Some(max) = spec.max_results {
        truncated = found.len().saturating_sub(max);
        found.truncate(max);
    }
    Ok(SearchReport { spec: spec.clone(), found, states_examined: states, elapsed: start.elapsed(), truncated })
}

/// All images of `pair` under reversal, global complement and `A <-> B`.
pub fn symmetry_orbit(pair: &CodePair) -> Vec<CodePair> {
    let mut out = Vec::with_capacity(8);
    for rev in [false, true] {
        let p = if rev { pair.reversed() } else { pair.clone() };
        for comp in [false, true] {
            let q = if comp { p.complemented() } else { p.clone() };
            out.push(q.swapped());
            out.push(q);
        }
    }
    out
}

/// Smallest member of the symmetry orbit, comparing `(A, B)` as sorted
/// string lists.
pub fn canonical_form(pair: &CodePair) -> CodePair {
    symmetry_orbit(pair)
        .into_iter()
        .min_by(|p, q| (p.a(), p.b()).cmp(&(q.a(), q.b())))
        .expect("orbit is nonempty")
}

/// Roundtrip fidelity is 1 within 1e-9 for every deletion position and a
/// message grid of the 6 fixed messages plus `grid_size` random ones.
pub fn verify_found(pair: &CodePair, grid_size: usize) -> Result<bool, SearchError> {
    let inst = CodecInstance::new(pair.clone())?;
    let grid = message_grid(grid_size, VERIFY_SEED);
    for i in 1..=pair.n() {
        for (k, msg) in grid.iter().enumerate() {
            let f = inst.roundtrip(msg, i, k as u64)?;
            if (f - 1.0).abs() > 1e-9 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
