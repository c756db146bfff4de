//! The word-indexed knapsack polynomial `ks_w`, its collapse assignments
//! `τ_m`, and its embedding into the generic degree-4 subset-sum instance.
//!
//! `ks_w` multiplies every variable of the *lift side* by its lift, the
//! product over overlapping *selector-side* blocks of the sums of variables
//! whose strings agree on the overlap. The lift side is the positive one
//! when `|w_{N_w}| >= |w_{P_w}|` and the negative one otherwise.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::inverse::{find_boolean_root, InverseError};
use crate::monomial::Monomial;
use crate::poly::{Assignment, Polynomial};
use crate::scalar::Scalar;
use crate::var::{Bits, VarId};
use crate::word::{string_of_monomial, Interval, Partition, Side, Word, WordError};
use crate::DEFAULT_VAR_CAP;

/// Refuse to materialise `ks_w` beyond this many terms.
pub const MAX_KS_TERMS: u128 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KnapsackError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("beta = {beta} is inadmissible: ks_w has a Boolean root")]
    InadmissibleBeta { beta: Scalar, root: Option<Assignment> },
    #[error("cannot decide whether beta = {beta} is a Boolean value of ks_w: {reason}")]
    UndecidedBeta { beta: Scalar, reason: String },
    #[error("block {block} is not on the lift side of {word}")]
    NotLiftSide { word: Word, block: usize },
    #[error("ks_w would have {0} terms")]
    TooLarge(u128),
    #[error("monomial {0} is not set-multilinear on a selector-side subword")]
    NotSelectorMonomial(Monomial),
    #[error("beta = {0} lies in {{0, ..., n^4}}")]
    GenericBeta(Scalar),
    #[error("embedding infeasible: {0}")]
    Embedding(String),
}

/// Which side carries the lifted variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Positive variables are lifted by sums of negative ones.
    Standard,
    /// Roles exchanged because `|w_{N_w}| < |w_{P_w}|`.
    Flipped,
}

impl Orientation {
    pub fn of(w: &Word) -> Self {
        if w.side_weight(Side::Negative) >= w.side_weight(Side::Positive) {
            Orientation::Standard
        } else {
            Orientation::Flipped
        }
    }

    pub fn is_flipped(&self) -> bool {
        *self == Orientation::Flipped
    }

    /// Side whose variables appear once per term, multiplied by a lift.
    pub fn lift_side(&self) -> Side {
        match self {
            Orientation::Standard => Side::Positive,
            Orientation::Flipped => Side::Negative,
        }
    }

    /// Side whose sums form the lifts; `τ_m` assigns this side.
    pub fn selector_side(&self) -> Side {
        self.lift_side().flip()
    }
}

fn agrees(sigma: Bits, a: Interval, rho: Bits, b: Interval) -> bool {
    let lo = a.start.max(b.start);
    let hi = (a.start + a.len).min(b.start + b.len);
    (lo..hi).all(|p| sigma.get((p - a.start) as usize) == rho.get((p - b.start) as usize))
}

/// The lift `f^(i)_σ` of block `i`, which must be on the lift side.
pub fn lift(w: &Word, i: usize, sigma: Bits) -> Result<Polynomial, KnapsackError> {
    let part = Partition::of_word(w)?;
    let orient = Orientation::of(w);
    if i == 0 || i > w.len() || w.side_of(i) != orient.lift_side() {
        return Err(KnapsackError::NotLiftSide { word: w.clone(), block: i });
    }
    assert_eq!(sigma.len(), part.block(i).width, "string length must match the block width");
    let iv = w.intervals();
    let a = iv.of(i);
    let mut out = Polynomial::one();
    for j in iv.overlapping(i) {
        let b = iv.of(j);
        let block = part.block(j);
        let sum = Polynomial::from_terms(
            Bits::all(block.width)
                .filter(|&rho| agrees(sigma, a, rho, b))
                .map(|rho| (Monomial::var(block.var(rho)), Scalar::one())),
        );
        out = &out * &sum;
    }
    Ok(out)
}

/// `1 +` the largest number of selector blocks meeting one lift block
/// (zero when the lift side is empty), without building `ks_w`.
pub fn ks_degree(w: &Word) -> u32 {
    let iv = w.intervals();
    let side = Orientation::of(w).lift_side();
    iv.blocks(side).map(|i| 1 + iv.overlapping(i).len() as u32).max().unwrap_or(0)
}

/// Number of terms of `ks_w` excluding the constant.
pub fn ks_term_count(w: &Word) -> u128 {
    let iv = w.intervals();
    let side = Orientation::of(w).lift_side();
    iv.blocks(side)
        .map(|i| {
            let a = iv.of(i);
            let free: u32 = iv
                .overlapping(i)
                .into_iter()
                .map(|j| {
                    let b = iv.of(j);
                    let shared = (a.start + a.len).min(b.start + b.len) - a.start.max(b.start);
                    b.len - shared
                })
                .sum();
            1u128.checked_shl(a.len + free).unwrap_or(u128::MAX)
        })
        .fold(0u128, u128::saturating_add)
}

/// `β = -1`: every Boolean value of the variable part is a nonnegative
/// integer, so `ks_w >= 1` on the cube.
pub fn default_beta(_w: &Word) -> Scalar {
    Scalar::from_int(-1)
}

/// `ks_w` with its provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnapsackInstance {
    pub word: Word,
    pub beta: Scalar,
    pub poly: Polynomial,
    pub orientation: Orientation,
}

impl KnapsackInstance {
    pub fn variables(&self) -> BTreeSet<VarId> {
        self.poly.vars()
    }
}

/// `ks_w = Σ_i Σ_σ x^(i)_σ f^(i)_σ - β` (sides exchanged when flipped).
pub fn build_ks(w: &Word, beta: &Scalar) -> Result<KnapsackInstance, KnapsackError> {
    let part = Partition::of_word(w)?;
    let terms = ks_term_count(w);
    if terms > MAX_KS_TERMS {
        return Err(KnapsackError::TooLarge(terms));
    }
    let orientation = Orientation::of(w);
    let mut poly = Polynomial::constant(-beta);
    for i in w.indices(orientation.lift_side()) {
        let block = part.block(i);
        for sigma in Bits::all(block.width) {
            let lifted = lift(w, i, sigma)?.mul_term(&Monomial::var(block.var(sigma)), &Scalar::one());
            poly = &poly + &lifted;
        }
    }
    check_beta(&poly, beta, terms)?;
    Ok(KnapsackInstance { word: w.clone(), beta: beta.clone(), poly, orientation })
}

/// All non-constant coefficients of `ks_w` are 1, so its Boolean values are
/// `k - β` for integers `0 <= k <= terms`.
fn check_beta(poly: &Polynomial, beta: &Scalar, terms: u128) -> Result<(), KnapsackError> {
    if !beta.is_integer() || beta.is_negative() || *beta > Scalar::from_int(terms.min(i64::MAX as u128) as i64) {
        return Ok(());
    }
    let inadmissible = |root| KnapsackError::InadmissibleBeta { beta: beta.clone(), root };
    if beta.is_zero() {
        let zeros = poly.vars().into_iter().map(|v| (v, Scalar::zero())).collect();
        return Err(inadmissible(Some(zeros)));
    }
    match find_boolean_root(poly, DEFAULT_VAR_CAP) {
        Ok(None) => Ok(()),
        Ok(Some(root)) => Err(inadmissible(Some(root))),
        Err(InverseError::CapExceeded { vars, cap }) => Err(KnapsackError::UndecidedBeta {
            beta: beta.clone(),
            reason: format!("{vars} variables exceed the enumeration cap {cap}"),
        }),
        Err(e) => Err(KnapsackError::UndecidedBeta { beta: beta.clone(), reason: e.to_string() }),
    }
}

/// `τ_m`: selector-side variables of `m` to 1, all other selector-side
/// variables to 0.
pub fn tau_m(m: &Monomial, w: &Word) -> Result<Assignment, KnapsackError> {
    let selector = Orientation::of(w).selector_side();
    let dec = string_of_monomial(m, w).map_err(|_| KnapsackError::NotSelectorMonomial(m.clone()))?;
    if !m.is_one() && dec.side != selector {
        return Err(KnapsackError::NotSelectorMonomial(m.clone()));
    }
    let part = Partition::of_word(w)?;
    let on: BTreeSet<VarId> = m.vars().collect();
    Ok(part
        .side_variables(selector)
        .into_iter()
        .map(|v| (v, if on.contains(&v) { Scalar::one() } else { Scalar::zero() }))
        .collect())
}

/// The blocks `S` of the lift side maximal with their intervals inside those
/// of `T`, and the strings `σ_i = σ(m)|_{A^(i)}`.
pub fn collapse_support(m: &Monomial, w: &Word) -> Result<Vec<(usize, Bits)>, KnapsackError> {
    let orient = Orientation::of(w);
    let dec = string_of_monomial(m, w).map_err(|_| KnapsackError::NotSelectorMonomial(m.clone()))?;
    if !m.is_one() && dec.side != orient.selector_side() {
        return Err(KnapsackError::NotSelectorMonomial(m.clone()));
    }
    let iv = w.intervals();
    let s = iv.covered_by(orient.lift_side(), &dec.blocks);
    Ok(s.into_iter()
        .map(|i| (i, dec.string.slice(iv.of(i)).expect("covered interval lies in the string domain")))
        .collect())
}

/// `Σ_{i∈S} x^(i)_{σ_i} - β`, what `τ_m` collapses `ks_w` to.
pub fn collapsed_subset_sum(m: &Monomial, w: &Word, beta: &Scalar) -> Result<Polynomial, KnapsackError> {
    let lift_positive = Orientation::of(w).lift_side().is_positive();
    let mut p = Polynomial::constant(-beta);
    for (i, bits) in collapse_support(m, w)? {
        p.add_term(Monomial::var(VarId::signed(lift_positive, i, bits)), &Scalar::one());
    }
    Ok(p)
}

/// `Σ_{i,j,k,l∈[n]} z_{ijkl} x_i x_j x_k x_l - β`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericInstance {
    pub n: u32,
    pub beta: Scalar,
    pub poly: Polynomial,
}

impl GenericInstance {
    pub fn new(n: u32, beta: &Scalar) -> Result<Self, KnapsackError> {
        let n4 = (n as i64).pow(4);
        if beta.is_integer() && !beta.is_negative() && *beta <= Scalar::from_int(n4) {
            return Err(KnapsackError::GenericBeta(beta.clone()));
        }
        if n > u16::MAX as u32 {
            return Err(KnapsackError::Embedding(format!("n = {n} too large")));
        }
        let mut terms = Vec::with_capacity((n as usize).pow(4) + 1);
        terms.push((Monomial::one(), -beta));
        for i in 1..=n {
            for j in 1..=n {
                for k in 1..=n {
                    for l in 1..=n {
                        let z = VarId::Coef([i as u16, j as u16, k as u16, l as u16]);
                        let m = Monomial::from_factors(
                            [z, VarId::Generic(i), VarId::Generic(j), VarId::Generic(k), VarId::Generic(l)]
                                .map(|v| (v, 1)),
                        );
                        terms.push((m, Scalar::one()));
                    }
                }
            }
        }
        Ok(GenericInstance { n, beta: beta.clone(), poly: Polynomial::from_terms(terms) })
    }
}

/// A partial assignment `τ_w` with the renaming it is proved under.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub n: u32,
    /// Values for every `z_{ijkl}` and for the padding variable `x_n`.
    pub assignment: Assignment,
    /// ks variable ↦ index of the generic variable standing for it.
    pub renaming: BTreeMap<VarId, u32>,
    pub padding: u32,
}

impl Embedding {
    /// Generic-instance image after substitution, renamed back.
    pub fn image(&self, generic: &GenericInstance) -> Polynomial {
        let back: BTreeMap<u32, VarId> = self.renaming.iter().map(|(&v, &k)| (k, v)).collect();
        generic.poly.substitute(&self.assignment).rename(|v| match v {
            VarId::Generic(k) => back.get(&k).copied().unwrap_or(v),
            other => other,
        })
    }

    /// `substitute(generic, τ_w)` equals `target` under the renaming.
    pub fn verify(&self, generic: &GenericInstance, target: &Polynomial) -> bool {
        self.image(generic) == *target
    }
}

/// `τ_w` for an arbitrary polynomial of degree at most 4 whose variables
/// number fewer than `n`: variables become `x_1, x_2, …` in [`VarId`] order,
/// `x_n` is fixed to 1 and pads short terms, and for each term the sorted
/// index tuple carries its coefficient while all other `z` are 0.
pub fn embed(target: &Polynomial, beta: &Scalar, n: u32) -> Result<Embedding, KnapsackError> {
    let vars: Vec<VarId> = target.vars().into_iter().collect();
    if vars.len() as u64 >= n as u64 {
        return Err(KnapsackError::Embedding(format!("{} variables need n > {}, got n = {n}", vars.len(), vars.len())));
    }
    if let Some(d) = target.total_degree().finite() {
        if d > 4 {
            return Err(KnapsackError::Embedding(format!("degree {d} exceeds 4")));
        }
    }
    let renaming: BTreeMap<VarId, u32> = vars.iter().enumerate().map(|(k, &v)| (v, k as u32 + 1)).collect();
    let padding = n;
    let mut z: BTreeMap<[u16; 4], Scalar> = BTreeMap::new();
    for (m, c) in target.terms() {
        let mut tuple: Vec<u16> = Vec::with_capacity(4);
        for &(v, e) in m.factors() {
            for _ in 0..e {
                tuple.push(renaming[&v] as u16);
            }
        }
        tuple.resize(4, padding as u16);
        tuple.sort_unstable();
        let key = [tuple[0], tuple[1], tuple[2], tuple[3]];
        // the constant term rides on z_{nnnn} on top of -β
        let value = if m.is_one() { c + beta } else { c.clone() };
        z.insert(key, value);
    }
    let mut assignment = Assignment::new();
    assignment.insert(VarId::Generic(padding), Scalar::one());
    for i in 1..=n as u16 {
        for j in 1..=n as u16 {
            for k in 1..=n as u16 {
                for l in 1..=n as u16 {
                    let key = [i, j, k, l];
                    assignment.insert(VarId::Coef(key), z.get(&key).cloned().unwrap_or_default());
                }
            }
        }
    }
    Ok(Embedding { n, assignment, renaming, padding })
}

/// Builds `ks_w` and embeds it into the generic instance with `n` variables.
pub fn tau_w_embedding(w: &Word, n: u32, beta: &Scalar) -> Result<(KnapsackInstance, Embedding), KnapsackError> {
    let ks = build_ks(w, beta)?;
    let emb = embed(&ks.poly, beta, n)?;
    Ok((ks, emb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::set_multilinear_monomials;

    fn w(v: &[i64]) -> Word {
        Word::new(v.to_vec())
    }

    fn var(s: &str) -> VarId {
        s.parse().unwrap()
    }

    fn sample_word() -> Word {
        w(&[-3, 6, -2, -4, 2, 6, -4, -2])
    }

    fn sum_of(names: &[String]) -> Polynomial {
        Polynomial::from_terms(names.iter().map(|s| (Monomial::var(var(s)), Scalar::one())))
    }

    #[test]
    fn sample_lift() {
        let word = sample_word();
        assert_eq!(Orientation::of(&word), Orientation::Standard);
        let f = lift(&word, 2, "011001".parse().unwrap()).unwrap();
        let tail: Vec<String> = (0b1000..=0b1111).map(|v| format!("y.4.{v:04b}")).collect();
        let expected = &(&Polynomial::var(var("y.1.011")) * &Polynomial::var(var("y.3.00"))) * &sum_of(&tail);
        assert_eq!(f, expected);
    }

    #[test]
    fn small_lifts() {
        assert_eq!(lift(&w(&[1, -1]), 1, "0".parse().unwrap()).unwrap(), Polynomial::var(var("y.2.0")));
        let f = lift(&w(&[1, -2]), 1, "1".parse().unwrap()).unwrap();
        assert_eq!(f, sum_of(&["y.2.10".into(), "y.2.11".into()]));
        assert!(lift(&w(&[1, -2]), 2, "00".parse().unwrap()).is_err());
    }

    #[test]
    fn ks_of_smallest_word() {
        let ks = build_ks(&w(&[1, -1]), &Scalar::from_int(-1)).unwrap();
        let expected = Polynomial::from_terms([
            (Monomial::product([var("x.1.0"), var("y.2.0")]), Scalar::one()),
            (Monomial::product([var("x.1.1"), var("y.2.1")]), Scalar::one()),
            (Monomial::one(), Scalar::one()),
        ]);
        assert_eq!(ks.poly, expected);
        for mask in 0..16u32 {
            let vars: Vec<VarId> = ks.poly.vars().into_iter().collect();
            let a: Assignment =
                vars.iter().enumerate().map(|(k, &v)| (v, Scalar::from_int((mask >> k & 1) as i64))).collect();
            assert!(!ks.poly.evaluate(&a).unwrap().is_zero());
        }
    }

    #[test]
    fn ks_degenerate_and_flipped() {
        let ks = build_ks(&w(&[-2]), &Scalar::from_int(-1)).unwrap();
        assert_eq!(ks.poly, Polynomial::one());
        let ks = build_ks(&w(&[2, -1]), &Scalar::from_int(-1)).unwrap();
        assert_eq!(ks.orientation, Orientation::Flipped);
        // lifted negative variables: y_ρ (x_{ρ0} + x_{ρ1})
        let mut expected = Polynomial::one();
        for rho in ["0", "1"] {
            for t in ["0", "1"] {
                expected.add_term(
                    Monomial::product([var(&format!("y.2.{rho}")), var(&format!("x.1.{rho}{t}"))]),
                    &Scalar::one(),
                );
            }
        }
        assert_eq!(ks.poly, expected);
    }

    #[test]
    fn inadmissible_beta() {
        let word = w(&[1, -1]);
        assert!(matches!(build_ks(&word, &Scalar::from_int(1)), Err(KnapsackError::InadmissibleBeta { .. })));
        assert!(matches!(build_ks(&word, &Scalar::zero()), Err(KnapsackError::InadmissibleBeta { .. })));
        assert!(build_ks(&word, &Scalar::from_int(3)).is_ok());
        assert!(build_ks(&word, &Scalar::new(1, 2)).is_ok());
    }

    #[test]
    fn ks_linear_in_beta() {
        let word = w(&[2, -1, 1, -2]);
        let a = build_ks(&word, &Scalar::from_int(-1)).unwrap().poly;
        let b = build_ks(&word, &Scalar::new(7, 3)).unwrap().poly;
        assert_eq!(&a - &b, Polynomial::constant(Scalar::new(7, 3) - Scalar::from_int(-1)));
    }

    #[test]
    fn degree_formula_matches_poly() {
        for word in [w(&[1, -1]), w(&[3, -1, -1, -1]), w(&[2, -1, 1, -2]), sample_word(), w(&[2, -1])] {
            let ks = build_ks(&word, &Scalar::from_int(-1)).unwrap();
            assert_eq!(ks.poly.total_degree().finite().unwrap(), ks_degree(&word), "{word}");
            assert_eq!(ks.poly.len() as u128, ks_term_count(&word) + 1, "{word}");
        }
    }

    #[test]
    fn sample_collapse() {
        let word = sample_word();
        let beta = Scalar::from_int(-1);
        let ks = build_ks(&word, &beta).unwrap();
        let m = Monomial::product(["y.1.100", "y.4.1001", "y.7.0110", "y.8.11"].map(var));
        let collapsed = ks.poly.substitute(&tau_m(&m, &word).unwrap());
        let expected = &sum_of(&["x.5.00".into(), "x.6.101101".into()]) - &Polynomial::constant(beta.clone());
        assert_eq!(collapsed, expected);
        assert_eq!(collapsed_subset_sum(&m, &word, &beta).unwrap(), expected);
    }

    #[test]
    fn empty_monomial_collapses_to_constant() {
        let word = w(&[2, -1, 1, -2]);
        let beta = Scalar::from_int(-1);
        let ks = build_ks(&word, &beta).unwrap();
        let c = ks.poly.substitute(&tau_m(&Monomial::one(), &word).unwrap());
        assert_eq!(c, Polynomial::constant(-&beta));
    }

    #[test]
    fn small_collapse() {
        let word = w(&[1, -1]);
        let beta = Scalar::from_int(-1);
        let ks = build_ks(&word, &beta).unwrap();
        let m = Monomial::var(var("y.2.1"));
        let c = ks.poly.substitute(&tau_m(&m, &word).unwrap());
        assert_eq!(c, &Polynomial::var(var("x.1.1")) - &Polynomial::constant(beta));
        assert!(tau_m(&Monomial::var(var("x.1.1")), &word).is_err());
    }

    #[test]
    fn collapse_keeps_one_string_per_block() {
        let word = w(&[2, -3, 1, -1]);
        let beta = Scalar::from_int(-1);
        let ks = build_ks(&word, &beta).unwrap();
        let sel = word.negative_indices();
        for t in 0..(1 << sel.len()) {
            let blocks: Vec<usize> = (0..sel.len()).filter(|k| t >> k & 1 == 1).map(|k| sel[k]).collect();
            for m in set_multilinear_monomials(&word, &blocks) {
                let c = ks.poly.substitute(&tau_m(&m, &word).unwrap());
                for i in word.positive_indices() {
                    let hits = c.monomials().filter(|mono| mono.vars().any(|v| matches!(v.block(), Some((true, b, _)) if b == i))).count();
                    assert!(hits <= 1);
                }
                assert_eq!(c, collapsed_subset_sum(&m, &word, &beta).unwrap());
            }
        }
    }

    #[test]
    fn embedding_smallest_word() {
        let beta = Scalar::from_int(-1);
        let (ks, emb) = tau_w_embedding(&w(&[1, -1]), 5, &beta).unwrap();
        let generic = GenericInstance::new(5, &beta).unwrap();
        assert!(emb.verify(&generic, &ks.poly));
        assert_eq!(emb.assignment[&VarId::Generic(5)], Scalar::one());
        let ones = emb.assignment.iter().filter(|(v, x)| matches!(v, VarId::Coef(_)) && x.is_one()).count();
        assert_eq!(ones, 2);
        assert_eq!(emb.assignment[&VarId::Coef([1, 3, 5, 5])], Scalar::one());
    }

    #[test]
    fn embedding_of_empty_word() {
        let beta = Scalar::from_int(-1);
        let (ks, emb) = tau_w_embedding(&Word::default(), 2, &beta).unwrap();
        let generic = GenericInstance::new(2, &beta).unwrap();
        assert!(emb.assignment.iter().all(|(v, x)| !matches!(v, VarId::Coef(_)) || x.is_zero()));
        assert_eq!(emb.image(&generic), Polynomial::constant(-&beta));
        assert!(emb.verify(&generic, &ks.poly));
    }

    #[test]
    fn embedding_guards() {
        let beta = Scalar::from_int(-1);
        assert!(matches!(tau_w_embedding(&w(&[1, -1]), 4, &beta), Err(KnapsackError::Embedding(_))));
        assert!(GenericInstance::new(2, &Scalar::from_int(16)).is_err());
        assert!(GenericInstance::new(2, &Scalar::from_int(17)).is_ok());
        let quintic = Polynomial::from_terms([(Monomial::product((1..=5).map(VarId::Generic)), Scalar::one())]);
        assert!(embed(&quintic, &beta, 10).is_err());
    }
}
