//! Words `w ∈ ℤ^d`, their index intervals, variable partitions and the
//! correspondence between set-multilinear monomials and binary strings.
//!
//! Block `i` (1-based) of a word owns `2^|w_i|` variables. Positive blocks
//! (`w_i >= 0`) are indexed by strings on the interval `A^(i)`, negative
//! blocks by strings on `B^(i)`; the intervals of each sign are laid out
//! consecutively starting at position 1.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_integer::Roots;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::monomial::Monomial;
use crate::var::{Bits, VarId, MAX_BITS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("partition of {word} needs {needed} variables, cap is {cap}")]
    CapExceeded { word: Word, needed: u128, cap: usize },
    #[error("bit string domain does not match a union of {side} intervals of {word}")]
    DomainMismatch { word: Word, side: Side },
    #[error("monomial {0} is not set-multilinear on a one-signed subword")]
    NotSetMultilinear(Monomial),
    #[error("restriction domain is not a subset of the string's domain")]
    NotASubdomain,
    #[error("block {block} of {word} is wider than {MAX_BITS} bits")]
    BlockTooWide { word: Word, block: usize },
    #[error("no balanced word of length {d} over {{{pos}, -{k}}} found")]
    Infeasible { d: usize, k: u64, pos: u64 },
    #[error("invalid word: {0}")]
    Parse(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Positive,
    Negative,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Positive => Side::Negative,
            Side::Negative => Side::Positive,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Side::Positive
    }

    /// Whether `v` is a word variable of this side.
    pub fn owns(self, v: VarId) -> bool {
        matches!((self, v), (Side::Positive, VarId::Pos { .. }) | (Side::Negative, VarId::Neg { .. }))
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Positive => "positive",
            Side::Negative => "negative",
        })
    }
}

/// A sequence of integers; zero entries count as positive.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<i64>);

impl Word {
    pub fn new(entries: Vec<i64>) -> Self {
        Word(entries)
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entry `w_i` for 1-based `i`.
    pub fn get(&self, i: usize) -> i64 {
        self.0[i - 1]
    }

    pub fn side_of(&self, i: usize) -> Side {
        if self.get(i) >= 0 {
            Side::Positive
        } else {
            Side::Negative
        }
    }

    /// 1-based indices of the blocks on `side` (`P_w` or `N_w`).
    pub fn indices(&self, side: Side) -> Vec<usize> {
        (1..=self.len()).filter(|&i| self.side_of(i) == side).collect()
    }

    pub fn positive_indices(&self) -> Vec<usize> {
        self.indices(Side::Positive)
    }

    pub fn negative_indices(&self) -> Vec<usize> {
        self.indices(Side::Negative)
    }

    /// `w_S = Σ_{i∈S} w_i`.
    pub fn sum_over(&self, s: impl IntoIterator<Item = usize>) -> i64 {
        s.into_iter().map(|i| self.get(i)).sum()
    }

    /// `|w_{P_w}|` or `|w_{N_w}|`.
    pub fn side_weight(&self, side: Side) -> u64 {
        self.indices(side).iter().map(|&i| self.get(i).unsigned_abs()).sum()
    }

    /// `max_i |w_i|`, zero for the empty word.
    pub fn max_abs(&self) -> u64 {
        self.0.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0)
    }

    /// `Σ_i 2^|w_i|`, saturating.
    pub fn variable_count(&self) -> u128 {
        self.0
            .iter()
            .map(|x| 1u128.checked_shl(x.unsigned_abs().min(127) as u32).unwrap_or(u128::MAX))
            .fold(0u128, |a, b| a.saturating_add(b))
    }

    pub fn intervals(&self) -> IndexIntervals {
        index_intervals(self)
    }

    pub fn check_cap(&self, cap: usize) -> Result<(), WordError> {
        let needed = self.variable_count();
        if needed > cap as u128 {
            return Err(WordError::CapExceeded { word: self.clone(), needed, cap });
        }
        Ok(())
    }

    fn check_widths(&self) -> Result<(), WordError> {
        for i in 1..=self.len() {
            if self.get(i).unsigned_abs() as usize >= MAX_BITS {
                return Err(WordError::BlockTooWide { word: self.clone(), block: i });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for Word {
    type Err = WordError;

    /// Accepts `[7,-10]`, `(7,-10)` or `7,-10`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_start_matches(['[', '(']).trim_end_matches([']', ')']).trim();
        if t.is_empty() {
            return Ok(Word::default());
        }
        t.split(',')
            .map(|x| x.trim().parse::<i64>().map_err(|_| WordError::Parse(s.to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

/// A closed interval `[start, start + len - 1]` of string positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    pub start: u32,
    pub len: u32,
}

impl Interval {
    pub fn end(&self) -> u32 {
        self.start + self.len - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn positions(&self) -> impl Iterator<Item = u32> {
        self.start..self.start + self.len
    }

    pub fn meets(&self, other: &Interval) -> bool {
        !self.is_empty()
            && !other.is_empty()
            && self.start.max(other.start) < (self.start + self.len).min(other.start + other.len)
    }

    pub fn contains(&self, p: u32) -> bool {
        p >= self.start && p < self.start + self.len
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("{}")
        } else {
            write!(f, "[{},{}]", self.start, self.end())
        }
    }
}

/// `A_w^(i)` for positive and `B_w^(j)` for negative blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexIntervals {
    sides: Vec<Side>,
    intervals: Vec<Interval>,
}

impl IndexIntervals {
    /// Interval of 1-based block `i` (on whichever side it lives).
    pub fn of(&self, i: usize) -> Interval {
        self.intervals[i - 1]
    }

    pub fn side(&self, i: usize) -> Side {
        self.sides[i - 1]
    }

    pub fn blocks(&self, side: Side) -> impl Iterator<Item = usize> + '_ {
        (1..=self.sides.len()).filter(move |&i| self.sides[i - 1] == side)
    }

    /// Sorted positions of `A_w^S` (or `B_w^T`).
    pub fn union(&self, s: impl IntoIterator<Item = usize>) -> Vec<u32> {
        let mut out: Vec<u32> = s.into_iter().flat_map(|i| self.of(i).positions()).collect();
        out.sort_unstable();
        out
    }

    /// Blocks on the other side whose interval meets block `i`'s.
    pub fn overlapping(&self, i: usize) -> Vec<usize> {
        let a = self.of(i);
        self.blocks(self.side(i).flip()).filter(|&j| a.meets(&self.of(j))).collect()
    }

    /// Largest set of `side` blocks whose intervals lie inside the union of
    /// the intervals of `other_blocks`.
    pub fn covered_by(&self, side: Side, other_blocks: &BTreeSet<usize>) -> BTreeSet<usize> {
        let cover: Vec<Interval> = other_blocks.iter().map(|&j| self.of(j)).collect();
        self.blocks(side)
            .filter(|&i| self.of(i).positions().all(|p| cover.iter().any(|c| c.contains(p))))
            .collect()
    }
}

pub fn index_intervals(w: &Word) -> IndexIntervals {
    let mut next = [1u32, 1u32];
    let mut sides = Vec::with_capacity(w.len());
    let mut intervals = Vec::with_capacity(w.len());
    for &x in w.entries() {
        let side = if x >= 0 { Side::Positive } else { Side::Negative };
        let slot = &mut next[side as usize];
        let len = x.unsigned_abs() as u32;
        intervals.push(Interval { start: *slot, len });
        *slot += len;
        sides.push(side);
    }
    IndexIntervals { sides, intervals }
}

/// Outcome of [`is_balanced`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Balance {
    Balanced,
    /// The interval of `block` meets no interval of the other side.
    Unbalanced { side: Side, block: usize },
}

impl Balance {
    pub fn is_balanced(&self) -> bool {
        matches!(self, Balance::Balanced)
    }
}

/// Every positive interval meets some negative one and vice versa.
pub fn is_balanced(w: &Word) -> Balance {
    let iv = w.intervals();
    for side in [Side::Positive, Side::Negative] {
        for i in iv.blocks(side) {
            if iv.overlapping(i).is_empty() {
                return Balance::Unbalanced { side, block: i };
            }
        }
    }
    Balance::Balanced
}

/// One block of a partition `X̄(w)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub index: usize,
    pub side: Side,
    pub width: usize,
}

impl Block {
    pub fn var(&self, bits: Bits) -> VarId {
        debug_assert_eq!(bits.len(), self.width);
        VarId::signed(self.side.is_positive(), self.index, bits)
    }

    /// The `2^width` variables of the block, in increasing string order.
    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        Bits::all(self.width).map(move |b| self.var(b))
    }

    pub fn size(&self) -> usize {
        1 << self.width
    }
}

/// The variable partition `X̄(w) = ⟨X(w_1), …, X(w_d)⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    word: Word,
    blocks: Vec<Block>,
}

impl Partition {
    /// Structural view without a size check; variables are not materialised.
    pub fn of_word(w: &Word) -> Result<Self, WordError> {
        w.check_widths()?;
        let blocks = (1..=w.len())
            .map(|i| Block { index: i, side: w.side_of(i), width: w.get(i).unsigned_abs() as usize })
            .collect();
        Ok(Partition { word: w.clone(), blocks })
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &Block {
        &self.blocks[i - 1]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// 0-based position of the block owning `v`, if any.
    pub fn block_of(&self, v: VarId) -> Option<usize> {
        let (positive, i, bits) = v.block()?;
        let b = self.blocks.get(i.checked_sub(1)?)?;
        (b.side.is_positive() == positive && b.width == bits.len()).then_some(i - 1)
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.block_of(v).is_some()
    }

    pub fn variables(&self) -> Vec<VarId> {
        self.blocks.iter().flat_map(|b| b.vars().collect::<Vec<_>>()).collect()
    }

    pub fn side_variables(&self, side: Side) -> Vec<VarId> {
        self.blocks.iter().filter(|b| b.side == side).flat_map(|b| b.vars().collect::<Vec<_>>()).collect()
    }

    pub fn as_sets(&self) -> Vec<BTreeSet<VarId>> {
        self.blocks.iter().map(|b| b.vars().collect()).collect()
    }
}

/// `X̄(w)` with the variable cap enforced.
pub fn build_partition(w: &Word, cap: usize) -> Result<Partition, WordError> {
    w.check_cap(cap)?;
    Partition::of_word(w)
}

/// A binary string indexed by an explicit set of positions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    positions: Vec<u32>,
    bits: Vec<bool>,
}

impl BitString {
    /// `bits[k]` sits at `positions[k]`; positions must be strictly increasing.
    pub fn new(positions: Vec<u32>, bits: Vec<bool>) -> Self {
        assert_eq!(positions.len(), bits.len());
        assert!(positions.windows(2).all(|p| p[0] < p[1]), "positions must increase");
        BitString { positions, bits }
    }

    pub fn on_interval(iv: Interval, bits: Bits) -> Self {
        assert_eq!(iv.len as usize, bits.len());
        BitString { positions: iv.positions().collect(), bits: bits.iter().collect() }
    }

    pub fn domain(&self) -> &[u32] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, p: u32) -> Option<bool> {
        self.positions.binary_search(&p).ok().map(|k| self.bits[k])
    }

    /// `σ|_A`; `A` must be a subset of the domain.
    pub fn restrict(&self, domain: &[u32]) -> Result<BitString, WordError> {
        let mut positions = domain.to_vec();
        positions.sort_unstable();
        positions.dedup();
        let bits = positions
            .iter()
            .map(|&p| self.get(p).ok_or(WordError::NotASubdomain))
            .collect::<Result<_, _>>()?;
        Ok(BitString { positions, bits })
    }

    /// Bits on `iv`, which must be inside the domain.
    pub fn slice(&self, iv: Interval) -> Option<Bits> {
        let bits: Option<Vec<bool>> = iv.positions().map(|p| self.get(p)).collect();
        bits.map(|b| Bits::from_bools(&b))
    }

    /// Concatenates strings over disjoint domains.
    pub fn join(&self, other: &BitString) -> BitString {
        let mut pairs: Vec<(u32, bool)> =
            self.positions.iter().copied().zip(self.bits.iter().copied()).collect();
        pairs.extend(other.positions.iter().copied().zip(other.bits.iter().copied()));
        pairs.sort_unstable_by_key(|&(p, _)| p);
        let (positions, bits) = pairs.into_iter().unzip();
        BitString::new(positions, bits)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// The blocks `S` of `side` whose intervals tile `domain` exactly.
/// Zero-width blocks are never included.
fn blocks_tiling(w: &Word, side: Side, domain: &[u32]) -> Option<Vec<usize>> {
    let iv = w.intervals();
    let dom: BTreeSet<u32> = domain.iter().copied().collect();
    let mut covered = 0usize;
    let mut s = Vec::new();
    for i in iv.blocks(side) {
        let a = iv.of(i);
        if a.is_empty() {
            continue;
        }
        let inside = a.positions().filter(|p| dom.contains(p)).count();
        if inside == a.len as usize {
            s.push(i);
            covered += inside;
        } else if inside > 0 {
            return None;
        }
    }
    (covered == dom.len()).then_some(s)
}

/// `m(σ)` for the blocks `s` of `side`; `σ` must cover each block's interval.
pub fn monomial_of_string_over(
    sigma: &BitString,
    w: &Word,
    side: Side,
    s: impl IntoIterator<Item = usize>,
) -> Result<Monomial, WordError> {
    let iv = w.intervals();
    let mut vars = Vec::new();
    for i in s {
        if iv.side(i) != side {
            return Err(WordError::DomainMismatch { word: w.clone(), side });
        }
        let bits = sigma.slice(iv.of(i)).ok_or(WordError::DomainMismatch { word: w.clone(), side })?;
        vars.push(VarId::signed(side.is_positive(), i, bits));
    }
    Ok(Monomial::product(vars))
}

/// `m(σ)`, inferring `S` from the domain of `σ`, which must be exactly
/// `A_w^S` (or `B_w^T`).
pub fn monomial_of_string(sigma: &BitString, w: &Word, side: Side) -> Result<Monomial, WordError> {
    let s = blocks_tiling(w, side, sigma.domain())
        .ok_or_else(|| WordError::DomainMismatch { word: w.clone(), side })?;
    monomial_of_string_over(sigma, w, side, s)
}

/// A monomial that is set-multilinear on a one-signed subword, decoded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodedMonomial {
    pub side: Side,
    /// Blocks the monomial picks a variable from.
    pub blocks: BTreeSet<usize>,
    pub string: BitString,
}

/// `σ(m)`: the string over `A_w^S` (or `B_w^T`) a monomial encodes.
///
/// The empty monomial decodes as a negative-side monomial over `T = ∅`.
pub fn string_of_monomial(m: &Monomial, w: &Word) -> Result<DecodedMonomial, WordError> {
    let bad = || WordError::NotSetMultilinear(m.clone());
    let iv = w.intervals();
    let mut side = None;
    let mut blocks = BTreeSet::new();
    let mut string = BitString::default();
    for &(v, e) in m.factors() {
        let (positive, i, bits) = v.block().ok_or_else(bad)?;
        let s = if positive { Side::Positive } else { Side::Negative };
        if e != 1 || i == 0 || i > w.len() || iv.side(i) != s || iv.of(i).len as usize != bits.len() {
            return Err(bad());
        }
        if *side.get_or_insert(s) != s || !blocks.insert(i) {
            return Err(bad());
        }
        string = string.join(&BitString::on_interval(iv.of(i), bits));
    }
    Ok(DecodedMonomial { side: side.unwrap_or(Side::Negative), blocks, string })
}

/// All set-multilinear monomials on `w|_S` for blocks `s` (all on one side),
/// in increasing order of the encoded string.
pub fn set_multilinear_monomials(w: &Word, s: &[usize]) -> Vec<Monomial> {
    let iv = w.intervals();
    let mut out = vec![Vec::new()];
    for &i in s {
        let block = Block { index: i, side: iv.side(i), width: iv.of(i).len as usize };
        let mut next = Vec::with_capacity(out.len() * block.size());
        for prefix in &out {
            for v in block.vars() {
                let mut f: Vec<VarId> = prefix.clone();
                f.push(v);
                next.push(f);
            }
        }
        out = next;
    }
    out.into_iter().map(Monomial::product).collect()
}

/// `⌊k/√2⌋`, computed with integers only.
pub fn floor_k_over_sqrt2(k: u64) -> u64 {
    let k2 = (k as u128) * (k as u128);
    (k2 / 2).sqrt() as u64
}

/// A balanced word of length `d` over the alphabet `{⌊k/√2⌋, -k}`.
///
/// Entries are chosen greedily: a positive entry whenever the positive
/// side's total length does not exceed the negative side's, a negative one
/// otherwise. If the last entry opens a fresh stretch (the running totals
/// were equal) the word is not balanced; the mirrored greedy rule (negative
/// first) is tried next, and the final entry's sign is flipped as a last
/// resort. Every candidate is checked with [`is_balanced`].
pub fn gen_balanced_word(d: usize, k: u64) -> Result<Word, WordError> {
    let pos = floor_k_over_sqrt2(k);
    let infeasible = WordError::Infeasible { d, k, pos };
    if d < 2 || pos == 0 || k > i64::MAX as u64 {
        return Err(infeasible);
    }
    let (p, n) = (pos as i64, -(k as i64));
    let greedy = |prefer_positive: bool| {
        let (mut tp, mut tn) = (0u64, 0u64);
        let mut out = Vec::with_capacity(d);
        for _ in 0..d {
            let positive = if prefer_positive { tp <= tn } else { tp < tn };
            if positive {
                out.push(p);
                tp += pos;
            } else {
                out.push(n);
                tn += k;
            }
        }
        out
    };
    let mut candidates = vec![greedy(true), greedy(false)];
    for c in candidates.clone() {
        let mut flipped = c;
        let last = flipped.len() - 1;
        flipped[last] = if flipped[last] == p { n } else { p };
        candidates.push(flipped);
    }
    candidates
        .into_iter()
        .map(Word::new)
        .find(|w| is_balanced(w).is_balanced())
        .ok_or(infeasible)
}
