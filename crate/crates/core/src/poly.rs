//! Sparse multivariate polynomials over the rationals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rustc_hash::FxHashMap as HashMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::monomial::{Monomial, MonomialOrder};
use crate::packed::{self, Key, Packer};
use crate::scalar::Scalar;
use crate::var::VarId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("variable {0} has no assigned value")]
    MissingAssignment(VarId),
    #[error("the zero polynomial has no leading monomial")]
    ZeroPolynomial,
}

/// Partial or total assignment of variables to scalars.
pub type Assignment = BTreeMap<VarId, Scalar>;

/// A polynomial stored as a map from monomials to nonzero coefficients.
///
/// Terms are kept sorted by the graded lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Scalar>,
}

/// Degree of a polynomial, with `NegInfinity` for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Degree {
    NegInfinity,
    Finite(u32),
}

impl Degree {
    pub fn finite(&self) -> Option<u32> {
        match self {
            Degree::NegInfinity => None,
            Degree::Finite(d) => Some(*d),
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInfinity => f.write_str("-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeProfile {
    pub total: Degree,
    pub individual: Degree,
    /// Individual degree restricted to each requested variable set.
    pub per_set: Vec<Degree>,
}

/// Result of reducing modulo the Boolean axioms `x^2 - x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub remainder: Polynomial,
    /// Nonzero quotients only.
    pub quotients: BTreeMap<VarId, Polynomial>,
}

impl Reduction {
    pub fn quotient(&self, v: VarId) -> Polynomial {
        self.quotients.get(&v).cloned().unwrap_or_default()
    }

    /// `remainder + Σ q_v (v^2 - v)`.
    pub fn reconstruct(&self) -> Polynomial {
        let mut out = self.remainder.clone();
        for (v, q) in &self.quotients {
            out = &out + &(q * &Polynomial::boolean_axiom(*v));
        }
        out
    }
}

/// Work size above which the packed kernels are tried.
const PACK_THRESHOLD: usize = 256;

fn accumulate(map: &mut HashMap<Monomial, Scalar>, m: Monomial, c: Scalar) {
    use std::collections::hash_map::Entry;
    match map.entry(m) {
        Entry::Occupied(mut e) => {
            *e.get_mut() += &c;
        }
        Entry::Vacant(e) => {
            e.insert(c);
        }
    }
}

impl Polynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Scalar::one())
    }

    pub fn constant(c: Scalar) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn var(v: VarId) -> Self {
        Self::term(Monomial::var(v), Scalar::one())
    }

    pub fn term(m: Monomial, c: Scalar) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms }
    }

    /// `v^2 - v`.
    pub fn boolean_axiom(v: VarId) -> Self {
        Self::from_terms([(Monomial::pow(v, 2), Scalar::one()), (Monomial::var(v), -Scalar::one())])
    }

    /// Sums the given terms, merging duplicate monomials.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Scalar)>>(terms: I) -> Self {
        let mut map: HashMap<Monomial, Scalar> = HashMap::default();
        for (m, c) in terms {
            accumulate(&mut map, m, c);
        }
        Self::from_hash(map)
    }

    fn from_hash(map: HashMap<Monomial, Scalar>) -> Self {
        Polynomial { terms: map.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Scalar)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.terms.keys()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, Scalar)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff(&Monomial::one())
    }

    /// Adds `c * m` in place.
    pub fn add_term(&mut self, m: Monomial, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c.clone());
            }
        }
    }

    pub fn vars(&self) -> BTreeSet<VarId> {
        self.terms.keys().flat_map(|m| m.vars()).collect()
    }

    pub fn scale(&self, c: &Scalar) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial { terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect() }
    }

    /// Multiplies by the single term `c * m`.
    pub fn mul_term(&self, m: &Monomial, c: &Scalar) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial { terms: self.terms.iter().map(|(k, a)| (k.mul(m), a * c)).collect() }
    }

    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(Monomial::is_multilinear)
    }

    pub fn total_degree(&self) -> Degree {
        self.terms.keys().map(|m| Degree::Finite(m.degree())).max().unwrap_or(Degree::NegInfinity)
    }

    /// Total, individual, and per-set individual degree.
    pub fn degree_profile(&self, sets: &[BTreeSet<VarId>]) -> DegreeProfile {
        if self.is_zero() {
            return DegreeProfile {
                total: Degree::NegInfinity,
                individual: Degree::NegInfinity,
                per_set: vec![Degree::NegInfinity; sets.len()],
            };
        }
        let mut per_set = vec![0u32; sets.len()];
        let mut individual = 0;
        for m in self.terms.keys() {
            for &(v, e) in m.factors() {
                individual = individual.max(e);
                for (k, s) in sets.iter().enumerate() {
                    if s.contains(&v) {
                        per_set[k] = per_set[k].max(e);
                    }
                }
            }
        }
        DegreeProfile {
            total: self.total_degree(),
            individual: Degree::Finite(individual),
            per_set: per_set.into_iter().map(Degree::Finite).collect(),
        }
    }

    /// Largest exponent of `v` over all terms.
    pub fn degree_in(&self, v: VarId) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    /// The order-maximal monomial with nonzero coefficient.
    pub fn leading_monomial(&self, ord: MonomialOrder) -> Result<&Monomial, PolyError> {
        match ord {
            MonomialOrder::Grlex => self.terms.keys().next_back(),
            MonomialOrder::Lex => self.terms.keys().max_by(|a, b| ord.compare(a, b)),
        }
        .ok_or(PolyError::ZeroPolynomial)
    }

    pub fn evaluate(&self, a: &Assignment) -> Result<Scalar, PolyError> {
        self.evaluate_with(|v| a.get(&v).cloned())
    }

    /// Evaluates with a lookup function; `None` means unassigned.
    pub fn evaluate_with(&self, mut value: impl FnMut(VarId) -> Option<Scalar>) -> Result<Scalar, PolyError> {
        let mut cache: HashMap<VarId, Scalar> = HashMap::default();
        let mut total = Scalar::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in m.factors() {
                let x = match cache.get(&v) {
                    Some(x) => x.clone(),
                    None => {
                        let x = value(v).ok_or(PolyError::MissingAssignment(v))?;
                        cache.insert(v, x.clone());
                        x
                    }
                };
                for _ in 0..e {
                    t *= &x;
                }
            }
            total += &t;
        }
        Ok(total)
    }

    /// Replaces assigned variables by constants.
    pub fn substitute(&self, tau: &Assignment) -> Polynomial {
        if tau.is_empty() {
            return self.clone();
        }
        let mut out: HashMap<Monomial, Scalar> = HashMap::default();
        'terms: for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut kept = Vec::with_capacity(m.factors().len());
            for &(v, e) in m.factors() {
                match tau.get(&v) {
                    Some(x) => {
                        if x.is_zero() {
                            continue 'terms;
                        }
                        for _ in 0..e {
                            coeff *= x;
                        }
                    }
                    None => kept.push((v, e)),
                }
            }
            accumulate(&mut out, Monomial::from_sorted_unchecked(kept), coeff);
        }
        Self::from_hash(out)
    }

    fn packer(&self) -> Option<Packer> {
        Packer::new(self.vars())
    }

    fn max_exponent(&self) -> u32 {
        self.terms.keys().map(Monomial::individual_degree).max().unwrap_or(0)
    }

    fn mul_packed(&self, rhs: &Polynomial) -> Option<Polynomial> {
        if self.max_exponent() + rhs.max_exponent() > packed::MAX_EXP {
            return None;
        }
        let mut vars = self.vars();
        vars.extend(rhs.vars());
        let packer = Packer::new(vars)?;
        let a = packer.pack_terms(self.terms())?;
        let b = packer.pack_terms(rhs.terms())?;
        let mut out: HashMap<Key, Scalar> = HashMap::with_capacity_and_hasher(a.len().max(b.len()), Default::default());
        for (ka, x) in &a {
            for (kb, y) in &b {
                packed::accumulate(&mut out, ka + kb, x * y);
            }
        }
        Some(Polynomial { terms: packer.finish(out) })
    }

    /// Replaces each variable by a polynomial (variables without an image stay).
    pub fn compose(&self, image: &BTreeMap<VarId, Polynomial>) -> Polynomial {
        if self.len() >= PACK_THRESHOLD {
            if let Some(p) = self.compose_packed(image) {
                return p;
            }
        }
        let mut out: HashMap<Monomial, Scalar> = HashMap::default();
        let mut powers: HashMap<(VarId, u32), Polynomial> = HashMap::default();
        for (m, c) in &self.terms {
            let mut t = Polynomial::one();
            let mut kept = Vec::new();
            for &(v, e) in m.factors() {
                match image.get(&v) {
                    Some(p) => {
                        let pe = powers.entry((v, e)).or_insert_with(|| {
                            let mut acc = Polynomial::one();
                            for _ in 0..e {
                                acc = &acc * p;
                            }
                            acc
                        });
                        t = &t * pe;
                    }
                    None => kept.push((v, e)),
                }
            }
            let rest = Monomial::from_sorted_unchecked(kept);
            for (a, x) in t.terms {
                accumulate(&mut out, a.mul(&rest), &x * c);
            }
        }
        Self::from_hash(out)
    }

    fn compose_packed(&self, image: &BTreeMap<VarId, Polynomial>) -> Option<Polynomial> {
        let mut vars = BTreeSet::new();
        let mut max_exp: HashMap<VarId, u32> = HashMap::default();
        for m in self.terms.keys() {
            let mut bound = 0;
            for &(v, e) in m.factors() {
                match image.get(&v) {
                    Some(p) => {
                        let me = *max_exp.entry(v).or_insert_with(|| {
                            vars.extend(p.vars());
                            p.max_exponent()
                        });
                        bound += e * me;
                    }
                    None => {
                        vars.insert(v);
                        bound += e;
                    }
                }
            }
            if bound > packed::MAX_EXP {
                return None;
            }
        }
        let packer = Packer::new(vars)?;
        let mut powers: HashMap<(VarId, u32), Vec<(Key, Scalar)>> = HashMap::default();
        let mut out: HashMap<Key, Scalar> = HashMap::default();
        let mut t: Vec<(Key, Scalar)> = Vec::new();
        let mut next: Vec<(Key, Scalar)> = Vec::new();
        for (m, c) in &self.terms {
            t.clear();
            t.push((0, c.clone()));
            for &(v, e) in m.factors() {
                match image.get(&v) {
                    Some(p) => {
                        let pe = match powers.entry((v, e)) {
                            std::collections::hash_map::Entry::Occupied(o) => o.into_mut(),
                            std::collections::hash_map::Entry::Vacant(slot) => {
                                let mut acc = Polynomial::one();
                                for _ in 0..e {
                                    acc = &acc * p;
                                }
                                slot.insert(packer.pack_terms(acc.terms())?)
                            }
                        };
                        next.clear();
                        for (ka, x) in &t {
                            for (kb, y) in pe.iter() {
                                next.push((ka + kb, x * y));
                            }
                        }
                        std::mem::swap(&mut t, &mut next);
                    }
                    None => {
                        let sh = (e as Key) << packed::shift(packer.index(v)?);
                        for (k, _) in t.iter_mut() {
                            *k += sh;
                        }
                    }
                }
            }
            for (k, x) in t.drain(..) {
                packed::accumulate(&mut out, k, x);
            }
        }
        Some(Polynomial { terms: packer.finish(out) })
    }

    fn reduce_packed(&self, vars: &BTreeSet<VarId>) -> Option<Reduction> {
        if self.max_exponent() > packed::MAX_EXP {
            return None;
        }
        let packer = self.packer()?;
        let reducible: Vec<bool> = (0..packer.len()).map(|k| vars.contains(&packer.var(k))).collect();
        let mut rem: HashMap<Key, Scalar> = HashMap::default();
        let mut quot: Vec<HashMap<Key, Scalar>> = (0..packer.len()).map(|_| HashMap::default()).collect();
        for (m, c) in &self.terms {
            let mut cur = packer.pack(m)?;
            for &(v, e) in m.factors() {
                let k = packer.index(v)?;
                if e >= 2 && reducible[k] {
                    let sh = packed::shift(k);
                    let base = cur & !(0xF << sh);
                    for p in 0..=(e - 2) {
                        packed::accumulate(&mut quot[k], base | ((p as Key) << sh), c.clone());
                    }
                    cur = base | (1 << sh);
                }
            }
            packed::accumulate(&mut rem, cur, c.clone());
        }
        Some(Reduction {
            remainder: Polynomial { terms: packer.finish(rem) },
            quotients: quot
                .into_iter()
                .enumerate()
                .map(|(k, q)| (packer.var(k), Polynomial { terms: packer.finish(q) }))
                .filter(|(_, q)| !q.is_zero())
                .collect(),
        })
    }

    pub fn rename(&self, f: impl Fn(VarId) -> VarId) -> Polynomial {
        Self::from_terms(self.terms.iter().map(|(m, c)| (m.rename(&f), c.clone())))
    }

    /// Keeps the terms whose monomial satisfies `pred`.
    pub fn filter_terms(&self, mut pred: impl FnMut(&Monomial) -> bool) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().filter(|(m, _)| pred(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Whether every monomial picks exactly one variable from each block.
    ///
    /// `block_of` maps a variable to its block in `0..blocks`; variables
    /// outside the partition make the monomial non-set-multilinear.
    pub fn is_set_multilinear_by(&self, blocks: usize, block_of: impl Fn(VarId) -> Option<usize>) -> bool {
        self.terms.keys().all(|m| monomial_is_set_multilinear(m, blocks, &block_of))
    }

    pub fn is_set_multilinear(&self, partition: &[BTreeSet<VarId>]) -> bool {
        self.is_set_multilinear_by(partition.len(), |v| partition.iter().position(|s| s.contains(&v)))
    }

    /// Reduces modulo `v^2 - v` for every `v` in `vars`, tracking quotients.
    ///
    /// Variables are processed in ascending order inside each monomial.
    pub fn multilinear_reduce(&self, vars: &BTreeSet<VarId>) -> Reduction {
        if self.len() >= PACK_THRESHOLD {
            if let Some(r) = self.reduce_packed(vars) {
                return r;
            }
        }
        let mut rem: HashMap<Monomial, Scalar> = HashMap::default();
        let mut quot: BTreeMap<VarId, HashMap<Monomial, Scalar>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let f = m.factors();
            let mut prefix: Vec<(VarId, u32)> = Vec::with_capacity(f.len());
            for (k, &(v, e)) in f.iter().enumerate() {
                if e >= 2 && vars.contains(&v) {
                    // v^e = v + (v^2 - v)(1 + v + ... + v^(e-2))
                    let q = quot.entry(v).or_default();
                    for p in 0..=(e - 2) {
                        let mut factors = prefix.clone();
                        if p > 0 {
                            factors.push((v, p));
                        }
                        factors.extend_from_slice(&f[k + 1..]);
                        accumulate(q, Monomial::from_sorted_unchecked(factors), c.clone());
                    }
                    prefix.push((v, 1));
                } else {
                    prefix.push((v, e));
                }
            }
            accumulate(&mut rem, Monomial::from_sorted_unchecked(prefix), c.clone());
        }
        Reduction {
            remainder: Self::from_hash(rem),
            quotients: quot
                .into_iter()
                .map(|(v, q)| (v, Self::from_hash(q)))
                .filter(|(_, q)| !q.is_zero())
                .collect(),
        }
    }

    /// Multilinear reduction over all variables, remainder only.
    pub fn multilinearize(&self) -> Polynomial {
        if self.is_multilinear() {
            return self.clone();
        }
        let mut out: HashMap<Monomial, Scalar> = HashMap::default();
        for (m, c) in &self.terms {
            accumulate(&mut out, Monomial::product(m.vars()), c.clone());
        }
        Self::from_hash(out)
    }
}

pub(crate) fn monomial_is_set_multilinear(
    m: &Monomial,
    blocks: usize,
    block_of: &impl Fn(VarId) -> Option<usize>,
) -> bool {
    if m.factors().len() != blocks {
        return false;
    }
    let mut seen = vec![false; blocks];
    for &(v, e) in m.factors() {
        if e != 1 {
            return false;
        }
        match block_of(v) {
            Some(b) if b < blocks && !seen[b] => seen[b] = true,
            _ => return false,
        }
    }
    true
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let (big, small) = if self.len() >= rhs.len() { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c);
        }
        out
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), &-c);
        }
        out
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        if self.len() * rhs.len() >= PACK_THRESHOLD {
            if let Some(p) = self.mul_packed(rhs) {
                return p;
            }
        }
        let mut out: HashMap<Monomial, Scalar> = HashMap::with_capacity_and_hasher(self.len().max(rhs.len()), Default::default());
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                accumulate(&mut out, a.mul(b), x * y);
            }
        }
        Polynomial::from_hash(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial {
                (&self).$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl fmt::Display for Polynomial {
    /// Highest term first, e.g. `x.1^2 - 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let (neg, mag) = if c.is_negative() { (true, -c) } else { (false, c.clone()) };
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{mag}*{m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: String,
    monomial: Monomial,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    terms: Vec<TermJson>,
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyJson {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TermJson { coeff: c.to_fraction_string(), monomial: m.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = PolyJson::deserialize(d)?;
        let mut terms = Vec::with_capacity(raw.terms.len());
        for t in raw.terms {
            let c: Scalar = t.coeff.parse().map_err(serde::de::Error::custom)?;
            terms.push((t.monomial, c));
        }
        Ok(Polynomial::from_terms(terms))
    }
}
