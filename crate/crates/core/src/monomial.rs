//! Sparse monomials and monomial orders.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::var::VarId;

/// A product of variables with positive exponents, sorted by [`VarId`].
///
/// `Ord` is the graded lexicographic order.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    factors: Vec<(VarId, u32)>,
    degree: u32,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    fn wrap(factors: Vec<(VarId, u32)>) -> Self {
        let degree = factors.iter().map(|&(_, e)| e).sum();
        Monomial { factors, degree }
    }

    pub fn var(v: VarId) -> Self {
        Monomial { factors: vec![(v, 1)], degree: 1 }
    }

    pub fn pow(v: VarId, e: u32) -> Self {
        if e == 0 {
            Self::one()
        } else {
            Monomial { factors: vec![(v, e)], degree: e }
        }
    }

    /// Builds from arbitrary factors; repeated variables are merged.
    pub fn from_factors<I: IntoIterator<Item = (VarId, u32)>>(factors: I) -> Self {
        let mut map: BTreeMap<VarId, u32> = BTreeMap::new();
        for (v, e) in factors {
            *map.entry(v).or_default() += e;
        }
        Monomial::wrap(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    /// Product of distinct variables.
    pub fn product<I: IntoIterator<Item = VarId>>(vars: I) -> Self {
        Self::from_factors(vars.into_iter().map(|v| (v, 1)))
    }

    /// Caller guarantees sorted, distinct, nonzero exponents.
    pub(crate) fn from_sorted_unchecked(factors: Vec<(VarId, u32)>) -> Self {
        debug_assert!(factors.windows(2).all(|p| p[0].0 < p[1].0));
        debug_assert!(factors.iter().all(|&(_, e)| e > 0));
        Monomial::wrap(factors)
    }

    pub fn factors(&self) -> &[(VarId, u32)] {
        &self.factors
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.factors.iter().map(|&(v, _)| v)
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exponent(&self, v: VarId) -> u32 {
        self.factors
            .binary_search_by(|(u, _)| u.cmp(&v))
            .map(|k| self.factors[k].1)
            .unwrap_or(0)
    }

    pub fn individual_degree(&self) -> u32 {
        self.factors.iter().map(|&(_, e)| e).max().unwrap_or(0)
    }

    pub fn is_multilinear(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.factors, &other.factors);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial { factors: out, degree: self.degree + other.degree }
    }

    /// Whether `self` divides `other`.
    pub fn divides(&self, other: &Monomial) -> bool {
        self.factors.iter().all(|&(v, e)| other.exponent(v) >= e)
    }

    /// Splits into the factors satisfying `pred` and the rest.
    pub fn split_by(&self, mut pred: impl FnMut(VarId) -> bool) -> (Monomial, Monomial) {
        let (a, b): (Vec<_>, Vec<_>) = self.factors.iter().partition(|&&(v, _)| pred(v));
        (Monomial::wrap(a), Monomial::wrap(b))
    }

    /// Applies a variable renaming; the result is re-sorted.
    pub fn rename(&self, f: impl Fn(VarId) -> VarId) -> Monomial {
        Monomial::from_factors(self.factors.iter().map(|&(v, e)| (f(v), e)))
    }

    pub fn to_map(&self) -> BTreeMap<VarId, u32> {
        self.factors.iter().copied().collect()
    }
}

/// Lexicographic comparison with the smallest [`VarId`] most significant.
pub fn cmp_lex(a: &Monomial, b: &Monomial) -> Ordering {
    let (a, b) = (&a.factors, &b.factors);
    for (x, y) in a.iter().zip(b.iter()) {
        match x.0.cmp(&y.0) {
            // `a` has a more significant variable that `b` lacks
            Ordering::Less => return Ordering::Greater,
            Ordering::Greater => return Ordering::Less,
            Ordering::Equal => match x.1.cmp(&y.1) {
                Ordering::Equal => {}
                o => return o,
            },
        }
    }
    a.len().cmp(&b.len())
}

pub fn cmp_grlex(a: &Monomial, b: &Monomial) -> Ordering {
    a.degree().cmp(&b.degree()).then_with(|| cmp_lex(a, b))
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_grlex(self, other)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (k, (v, e)) in self.factors.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Monomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_map().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Monomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<VarId, u32>::deserialize(d)?;
        Ok(Monomial::from_factors(map))
    }
}

/// A monomial order over the fixed [`VarId`] order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MonomialOrder {
    /// Total degree first, ties broken lexicographically.
    #[default]
    Grlex,
    Lex,
}

impl MonomialOrder {
    pub const ALL: [MonomialOrder; 2] = [MonomialOrder::Grlex, MonomialOrder::Lex];

    pub fn compare(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self {
            MonomialOrder::Grlex => cmp_grlex(a, b),
            MonomialOrder::Lex => cmp_lex(a, b),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MonomialOrder::Grlex => "grlex",
            MonomialOrder::Lex => "lex",
        }
    }
}

impl fmt::Display for MonomialOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for MonomialOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "grlex" => Ok(MonomialOrder::Grlex),
            "lex" => Ok(MonomialOrder::Lex),
            _ => Err(format!("unknown monomial order {s:?} (expected grlex or lex)")),
        }
    }
}
