//! Dense exponent encoding for polynomials over at most 32 variables with
//! small exponents. Slot `k` holds the exponent of the `k`-th smallest
//! variable in 4 bits, most significant first, so numeric order on keys is
//! the lex order and `(degree, key)` is the graded-lex order.

use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::FxHashMap as HashMap;

use crate::monomial::Monomial;
use crate::scalar::Scalar;
use crate::var::VarId;

pub(crate) const SLOTS: usize = 32;
pub(crate) const MAX_EXP: u32 = 15;

pub(crate) type Key = u128;

pub(crate) struct Packer {
    vars: Vec<VarId>,
    index: HashMap<VarId, usize>,
}

#[inline]
pub(crate) fn shift(k: usize) -> u32 {
    4 * (SLOTS - 1 - k) as u32
}

#[inline]
pub(crate) fn slot(key: Key, k: usize) -> u32 {
    ((key >> shift(k)) & 0xF) as u32
}

#[inline]
pub(crate) fn degree(key: Key) -> u32 {
    const LOW: u128 = 0x0F0F_0F0F_0F0F_0F0F_0F0F_0F0F_0F0F_0F0F;
    let bytes = (key & LOW) + ((key >> 4) & LOW);
    bytes.to_le_bytes().iter().map(|&b| b as u32).sum()
}

impl Packer {
    pub(crate) fn new(vars: BTreeSet<VarId>) -> Option<Self> {
        if vars.len() > SLOTS {
            return None;
        }
        let vars: Vec<VarId> = vars.into_iter().collect();
        let index = vars.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        Some(Packer { vars, index })
    }

    pub(crate) fn index(&self, v: VarId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    pub(crate) fn var(&self, k: usize) -> VarId {
        self.vars[k]
    }

    pub(crate) fn len(&self) -> usize {
        self.vars.len()
    }

    /// `None` when a variable is unknown or an exponent does not fit.
    pub(crate) fn pack(&self, m: &Monomial) -> Option<Key> {
        let mut key = 0;
        for &(v, e) in m.factors() {
            if e > MAX_EXP {
                return None;
            }
            key |= (e as Key) << shift(self.index(v)?);
        }
        Some(key)
    }

    pub(crate) fn unpack(&self, key: Key) -> Monomial {
        let mut factors = Vec::new();
        let mut rest = key;
        while rest != 0 {
            let k = (rest.leading_zeros() / 4) as usize;
            let e = slot(key, k);
            factors.push((self.vars[k], e));
            rest &= !(0xF << shift(k));
        }
        Monomial::from_sorted_unchecked(factors)
    }

    /// Packs every term, or `None` if one does not fit.
    pub(crate) fn pack_terms<'a>(
        &self,
        terms: impl Iterator<Item = (&'a Monomial, &'a Scalar)>,
    ) -> Option<Vec<(Key, Scalar)>> {
        terms.map(|(m, c)| Some((self.pack(m)?, c.clone()))).collect()
    }

    /// Drops zeros and rebuilds the ordered term map.
    pub(crate) fn finish(&self, map: HashMap<Key, Scalar>) -> BTreeMap<Monomial, Scalar> {
        let mut keyed: Vec<(u32, Key, Scalar)> =
            map.into_iter().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (degree(k), k, c)).collect();
        keyed.sort_unstable_by_key(|t| (t.0, t.1));
        keyed.into_iter().map(|(_, k, c)| (self.unpack(k), c)).collect()
    }
}

#[inline]
pub(crate) fn accumulate(map: &mut HashMap<Key, Scalar>, k: Key, c: Scalar) {
    use std::collections::hash_map::Entry;
    match map.entry(k) {
        Entry::Occupied(mut e) => *e.get_mut() += &c,
        Entry::Vacant(e) => {
            e.insert(c);
        }
    }
}
