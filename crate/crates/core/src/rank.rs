//! Coefficient matrices, exact rank and relative rank, the set-multilinear
//! projection, and the leading-monomial checks behind the full-rank result.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::inverse::{boolean_inverse, InverseError};
use crate::knapsack::{build_ks, collapse_support, default_beta, KnapsackError, Orientation};
use crate::monomial::{Monomial, MonomialOrder};
use crate::poly::{monomial_is_set_multilinear, Polynomial};
use crate::scalar::Scalar;
use crate::var::VarId;
use crate::word::{set_multilinear_monomials, Partition, Side, Word, WordError};

/// Matrices with both dimensions at most this are stored densely.
pub const DENSE_LIMIT: usize = 1 << 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RankError {
    #[error("polynomial is not multilinear")]
    NotMultilinear,
    #[error("variable {0} is not a word variable")]
    ForeignVariable(VarId),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Knapsack(#[from] KnapsackError),
    #[error(transparent)]
    Inverse(#[from] InverseError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    /// `M(f)`: all multilinear monomials on each side.
    Full,
    /// `M_w(f)`: set-multilinear monomials over `w|_{P_w}` and `w|_{N_w}`.
    Submatrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Entries {
    Dense(Vec<Vec<Scalar>>),
    /// `(row, col, value)` with nonzero values only.
    Sparse(Vec<(usize, usize, Scalar)>),
}

/// Rows are indexed by positive monomials, columns by negative ones.
///
/// For [`MatrixKind::Full`] only rows and columns carrying a nonzero entry
/// are listed; [`CoefficientMatrix::dims`] reports the nominal size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientMatrix {
    pub kind: MatrixKind,
    pub rows: Vec<Monomial>,
    pub cols: Vec<Monomial>,
    nominal: (u128, u128),
    entries: Entries,
}

impl CoefficientMatrix {
    fn from_triplets(
        kind: MatrixKind,
        rows: Vec<Monomial>,
        cols: Vec<Monomial>,
        nominal: (u128, u128),
        triplets: Vec<(usize, usize, Scalar)>,
    ) -> Self {
        let entries = if rows.len() <= DENSE_LIMIT && cols.len() <= DENSE_LIMIT {
            let mut dense = vec![vec![Scalar::zero(); cols.len()]; rows.len()];
            for (r, c, v) in triplets {
                dense[r][c] = v;
            }
            Entries::Dense(dense)
        } else {
            Entries::Sparse(triplets)
        };
        CoefficientMatrix { kind, rows, cols, nominal, entries }
    }

    /// Builds a dense matrix directly; rows and columns are labelled `1`.
    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let width = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == width), "ragged matrix");
        let (r, c) = (rows.len(), width);
        CoefficientMatrix {
            kind: MatrixKind::Submatrix,
            rows: vec![Monomial::one(); r],
            cols: vec![Monomial::one(); c],
            nominal: (r as u128, c as u128),
            entries: Entries::Dense(rows),
        }
    }

    pub fn dims(&self) -> (u128, u128) {
        self.nominal
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.entries, Entries::Dense(_))
    }

    pub fn entry(&self, r: usize, c: usize) -> Scalar {
        match &self.entries {
            Entries::Dense(d) => d[r][c].clone(),
            Entries::Sparse(t) => {
                t.iter().find(|(i, j, _)| *i == r && *j == c).map(|(_, _, v)| v.clone()).unwrap_or_default()
            }
        }
    }

    /// Entry at `(m, m')`, zero when either label is absent.
    pub fn entry_at(&self, row: &Monomial, col: &Monomial) -> Scalar {
        match (self.rows.iter().position(|m| m == row), self.cols.iter().position(|m| m == col)) {
            (Some(r), Some(c)) => self.entry(r, c),
            _ => Scalar::zero(),
        }
    }

    /// Nonzero entries as `(row, col, value)`.
    pub fn nonzero(&self) -> Vec<(usize, usize, Scalar)> {
        match &self.entries {
            Entries::Dense(d) => d
                .iter()
                .enumerate()
                .flat_map(|(r, row)| {
                    row.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(move |(c, v)| (r, c, v.clone()))
                })
                .collect(),
            Entries::Sparse(t) => t.clone(),
        }
    }

    /// Dense rows, each scaled by the lcm of its denominators.
    pub fn integer_rows(&self) -> Vec<Vec<BigInt>> {
        let mut rows: Vec<Vec<Scalar>> = match &self.entries {
            Entries::Dense(d) => d.clone(),
            Entries::Sparse(t) => {
                let mut d = vec![vec![Scalar::zero(); self.cols.len()]; self.rows.len()];
                for (r, c, v) in t {
                    d[*r][*c] = v.clone();
                }
                d
            }
        };
        rows.iter_mut()
            .map(|row| {
                let den = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(&v.denom()));
                row.iter().map(|v| v.numer() * (&den / v.denom())).collect()
            })
            .collect()
    }
}

fn split_sides(m: &Monomial) -> Result<(Monomial, Monomial), RankError> {
    if let Some(v) = m.vars().find(|v| v.block().is_none()) {
        return Err(RankError::ForeignVariable(v));
    }
    Ok(m.split_by(|v| Side::Positive.owns(v)))
}

/// `M_w(f)` when `submatrix`, else `M(f)`.
pub fn coefficient_matrix(f: &Polynomial, w: &Word, submatrix: bool) -> Result<CoefficientMatrix, RankError> {
    if !f.is_multilinear() {
        return Err(RankError::NotMultilinear);
    }
    let part = Partition::of_word(w)?;
    if submatrix {
        let rows = set_multilinear_monomials(w, &w.positive_indices());
        let cols = set_multilinear_monomials(w, &w.negative_indices());
        let row_of: HashMap<&Monomial, usize> = rows.iter().enumerate().map(|(k, m)| (m, k)).collect();
        let col_of: HashMap<&Monomial, usize> = cols.iter().enumerate().map(|(k, m)| (m, k)).collect();
        let mut triplets = Vec::new();
        for (m, c) in f.terms() {
            let Ok((p, n)) = split_sides(m) else { continue };
            if let (Some(&r), Some(&k)) = (row_of.get(&p), col_of.get(&n)) {
                triplets.push((r, k, c.clone()));
            }
        }
        let nominal = (rows.len() as u128, cols.len() as u128);
        return Ok(CoefficientMatrix::from_triplets(MatrixKind::Submatrix, rows, cols, nominal, triplets));
    }
    let mut rows: BTreeMap<Monomial, usize> = BTreeMap::new();
    let mut cols: BTreeMap<Monomial, usize> = BTreeMap::new();
    let mut raw = Vec::with_capacity(f.len());
    for (m, c) in f.terms() {
        let (p, n) = split_sides(m)?;
        rows.insert(p.clone(), 0);
        cols.insert(n.clone(), 0);
        raw.push((p, n, c.clone()));
    }
    for (k, v) in rows.values_mut().enumerate() {
        *v = k;
    }
    for (k, v) in cols.values_mut().enumerate() {
        *v = k;
    }
    let triplets = raw.into_iter().map(|(p, n, c)| (rows[&p], cols[&n], c)).collect();
    let count = |side| 1u128.checked_shl(part.side_variables(side).len() as u32).unwrap_or(u128::MAX);
    let nominal = (count(Side::Positive), count(Side::Negative));
    Ok(CoefficientMatrix::from_triplets(
        MatrixKind::Full,
        rows.into_keys().collect(),
        cols.into_keys().collect(),
        nominal,
        triplets,
    ))
}

/// Rank of an integer matrix by fraction-free (Bareiss) elimination.
pub fn bareiss_rank(mut a: Vec<Vec<BigInt>>) -> usize {
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut rank = 0;
    for c in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(p) = (rank..nrows).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(rank, p);
        let (top, rest) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in rest.iter_mut() {
            let lead = std::mem::take(&mut row[c]);
            for k in c + 1..ncols {
                let v = &pivot_row[c] * &row[k] - &lead * &pivot_row[k];
                row[k] = v / &prev;
            }
        }
        prev = a[rank][c].clone();
        rank += 1;
    }
    rank
}

/// Exact rank over the rationals.
pub fn exact_rank(m: &CoefficientMatrix) -> usize {
    bareiss_rank(m.integer_rows())
}

/// `rank(M_w(f))` together with the dimensions; `relrk` stays implicit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RelRank {
    pub rank: u64,
    pub rows: u128,
    pub cols: u128,
}

impl RelRank {
    pub fn of(m: &CoefficientMatrix) -> Self {
        let (rows, cols) = m.dims();
        RelRank { rank: exact_rank(m) as u64, rows, cols }
    }

    /// `relrk^2 = rank^2 / (rows·cols)`.
    pub fn squared(&self) -> Scalar {
        let den = BigInt::from(self.rows) * BigInt::from(self.cols);
        if den.is_zero() {
            return Scalar::zero();
        }
        let num = BigInt::from(self.rank) * BigInt::from(self.rank);
        Scalar::from(num_rational::BigRational::new(num, den))
    }

    /// `relrk >= 2^{-b/2}`, i.e. `rank^2·2^b >= rows·cols`.
    pub fn at_least_two_pow_neg_half(&self, b: u32) -> bool {
        let lhs = (BigInt::from(self.rank) * BigInt::from(self.rank)) << b as usize;
        lhs >= BigInt::from(self.rows) * BigInt::from(self.cols)
    }

    pub fn is_full(&self) -> bool {
        self.rank as u128 == self.rows.min(self.cols)
    }
}

/// `Π_w`: keeps the monomials that are set-multilinear over all of `w`.
pub fn project_sml(f: &Polynomial, w: &Word) -> Polynomial {
    let Ok(part) = Partition::of_word(w) else { return Polynomial::zero() };
    let block_of = |v| part.block_of(v);
    f.filter_terms(|m| monomial_is_set_multilinear(m, part.len(), &block_of))
}

/// Coefficient of `m` in `f` viewed as a polynomial in the `side` word
/// variables with coefficients in everything else.
pub fn coefficient_of(f: &Polynomial, m: &Monomial, side: Side) -> Polynomial {
    let mut out = Polynomial::zero();
    for (t, c) in f.terms() {
        let (inner, rest) = t.split_by(|v| side.owns(v));
        if inner == *m {
            out.add_term(rest, c);
        }
    }
    out
}

/// `g_m` in `f = Σ_m g_m(x)·m` over negative monomials `m`.
pub fn extract_g_m(f: &Polynomial, m: &Monomial) -> Polynomial {
    coefficient_of(f, m, Side::Negative)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClaimViolation {
    pub m: String,
    pub leading: Option<String>,
    pub bound: String,
    /// `T` was the whole selector side, so equality was required.
    pub full: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClaimReport {
    pub word: Word,
    pub order: MonomialOrder,
    pub orientation: Orientation,
    /// Number of `(T, m)` pairs examined.
    pub checked: usize,
    pub violations: Vec<ClaimViolation>,
    /// `{LM(g_m) : m on the whole selector side}` is every set-multilinear
    /// monomial of the lift side.
    pub leading_monomials_cover: bool,
}

impl ClaimReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.leading_monomials_cover
    }
}

/// Checks `LM(g_m) <= m(σ(m)|_{A^S})` for every `T` and every
/// set-multilinear `m` on `w|_T`, with equality when `T` is everything.
///
/// `T` ranges over subsets of the selector side (negative unless the word
/// is flipped) and `g_m` is a polynomial in the lift-side variables.
pub fn verify_leading_claim(w: &Word, f: &Polynomial, ord: MonomialOrder) -> Result<ClaimReport, RankError> {
    let orientation = Orientation::of(w);
    let selector = orientation.selector_side();
    let lift_positive = orientation.lift_side().is_positive();

    // leading monomial of each g_m, by selector part
    let mut leading: HashMap<Monomial, Monomial> = HashMap::new();
    for (t, _) in f.terms() {
        let (sel, rest) = t.split_by(|v| selector.owns(v));
        match leading.get_mut(&sel) {
            Some(best) => {
                if ord.compare(&rest, best).is_gt() {
                    *best = rest;
                }
            }
            None => {
                leading.insert(sel, rest);
            }
        }
    }

    let blocks = w.indices(selector);
    let mut checked = 0;
    let mut violations = Vec::new();
    let mut full_leading = BTreeSet::new();
    for t in 0u64..(1u64 << blocks.len()) {
        let chosen: Vec<usize> = (0..blocks.len()).filter(|k| t >> k & 1 == 1).map(|k| blocks[k]).collect();
        let full = chosen.len() == blocks.len();
        for m in set_multilinear_monomials(w, &chosen) {
            checked += 1;
            let bound = Monomial::product(
                collapse_support(&m, w)?.into_iter().map(|(i, bits)| VarId::signed(lift_positive, i, bits)),
            );
            let lm = leading.get(&m);
            let ok = match lm {
                None => !full,
                Some(lm) if full => lm == &bound,
                Some(lm) => ord.compare(lm, &bound).is_le(),
            };
            if full {
                if let Some(lm) = lm {
                    full_leading.insert(lm.clone());
                }
            }
            if !ok {
                violations.push(ClaimViolation {
                    m: m.to_string(),
                    leading: lm.map(|x| x.to_string()),
                    bound: bound.to_string(),
                    full,
                });
            }
        }
    }
    let lift_rows: BTreeSet<Monomial> =
        set_multilinear_monomials(w, &w.indices(orientation.lift_side())).into_iter().collect();
    Ok(ClaimReport {
        word: w.clone(),
        order: ord,
        orientation,
        checked,
        violations,
        leading_monomials_cover: full_leading == lift_rows,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FullRankReport {
    pub word: Word,
    pub relrk: RelRank,
    /// `max_i |w_i|`.
    pub b: u32,
    pub full_rank: bool,
    /// `rank^2·2^b >= |M^P|·|M^N|`.
    pub certificate: bool,
}

impl FullRankReport {
    pub fn holds(&self) -> bool {
        self.full_rank && self.certificate
    }
}

/// Rank report for an already computed `f`.
pub fn full_rank_report(w: &Word, f: &Polynomial) -> Result<FullRankReport, RankError> {
    let m = coefficient_matrix(f, w, true)?;
    let relrk = RelRank::of(&m);
    let b = w.max_abs() as u32;
    Ok(FullRankReport {
        word: w.clone(),
        relrk,
        b,
        full_rank: relrk.is_full(),
        certificate: relrk.at_least_two_pow_neg_half(b),
    })
}

/// `f = boolean_inverse(ks_w)` with the default `β`, then its rank report.
pub fn verify_full_rank(w: &Word, cap: usize) -> Result<FullRankReport, RankError> {
    w.check_cap(cap)?;
    let ks = build_ks(w, &default_beta(w))?;
    let inv = boolean_inverse(&ks.poly, cap)?;
    full_rank_report(w, &inv.g)
}
