//! Property checks shared by the property suite and the acceptance run.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};

use ipslab::rank::{bareiss_rank, exact_rank, project_sml, CoefficientMatrix};
use ipslab::word::{monomial_of_string, set_multilinear_monomials, string_of_monomial, BitString, Partition, Side};
use ipslab::{Assignment, Monomial, Polynomial, Scalar, VarId, Word};

pub const SEED: u64 = 0x5eed_1b5a;
pub const CASES: u32 = 1000;

pub type Check<T> = fn(T) -> Result<(), TestCaseError>;

pub fn config() -> Config {
    Config { cases: CASES, rng_seed: RngSeed::Fixed(SEED), failure_persistence: None, ..Config::default() }
}

/// Runs a check outside the `proptest!` macro; `Err` carries the failure.
pub fn run<S: Strategy>(strategy: S, check: Check<S::Value>) -> Result<(), String> {
    TestRunner::new(config()).run(&strategy, check).map_err(|e| e.to_string())
}

fn scalar() -> impl Strategy<Value = Scalar> {
    (-9i64..=9, 1i64..=4).prop_map(|(n, d)| Scalar::new(n, d))
}

/// Polynomials in `v.1..v.nvars` with individual degree at most `emax`.
fn poly(nvars: u32, emax: u32, max_terms: usize) -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((prop::collection::vec(0..=emax, nvars as usize), scalar()), 0..=max_terms).prop_map(
        move |terms| {
            Polynomial::from_terms(terms.into_iter().map(|(exps, c)| {
                let m = Monomial::from_factors(exps.into_iter().enumerate().map(|(k, e)| (VarId::Generic(k as u32 + 1), e)));
                (m, c)
            }))
        },
    )
}

fn point(nvars: u32) -> impl Strategy<Value = Assignment> {
    prop::collection::vec(scalar(), nvars as usize)
        .prop_map(|xs| xs.into_iter().enumerate().map(|(k, x)| (VarId::Generic(k as u32 + 1), x)).collect())
}

fn eval(p: &Polynomial, a: &Assignment) -> Scalar {
    p.evaluate(a).expect("total assignment")
}

pub type RingInput = (Polynomial, Polynomial, Polynomial, Assignment);

pub fn ring_input() -> impl Strategy<Value = RingInput> {
    (poly(4, 3, 24), poly(4, 3, 24), poly(4, 2, 6), point(4))
}

pub fn ring_laws((p, q, r, a): RingInput) -> Result<(), TestCaseError> {
    prop_assert_eq!(&p + &q, &q + &p);
    prop_assert_eq!(&p * &q, &q * &p);
    prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
    prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
    prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
    prop_assert!((&p - &p).is_zero());
    prop_assert_eq!(&p * &Polynomial::one(), p.clone());
    prop_assert!((&p * &Polynomial::zero()).is_zero());
    // evaluation is a ring homomorphism
    prop_assert_eq!(eval(&(&p * &q), &a), &eval(&p, &a) * &eval(&q, &a));
    prop_assert_eq!(eval(&(&p + &q), &a), &eval(&p, &a) + &eval(&q, &a));
    Ok(())
}

pub type ReductionInput = (Polynomial, u32, u32);

pub fn reduction_input() -> impl Strategy<Value = ReductionInput> {
    (poly(5, 4, 40), 0u32..32, 0u32..32)
}

pub fn reduction_reconstructs((p, mask, bits): ReductionInput) -> Result<(), TestCaseError> {
    let vars: BTreeSet<VarId> = (0..5).filter(|k| mask >> k & 1 == 1).map(|k| VarId::Generic(k + 1)).collect();
    let red = p.multilinear_reduce(&vars);
    prop_assert_eq!(red.reconstruct(), p.clone());
    for m in red.remainder.monomials() {
        for v in &vars {
            prop_assert!(m.exponent(*v) <= 1);
        }
    }
    // on a 0/1 point the axioms vanish, so p and its remainder agree
    let a: Assignment = (0..5).map(|k| (VarId::Generic(k + 1), Scalar::from_int((bits >> k & 1) as i64))).collect();
    prop_assert_eq!(eval(&red.remainder, &a), eval(&p, &a));
    Ok(())
}

/// Nonzero entries in `-2..=2`, length 1 to 3.
fn small_word() -> impl Strategy<Value = Word> {
    prop::collection::vec(prop_oneof![Just(-2i64), Just(-1), Just(1), Just(2)], 1..=3).prop_map(Word::new)
}

/// Random monomials over the word variables: some pick one variable per
/// block, others miss or repeat a block.
fn word_poly(w: &Word, picks: &[(Vec<u32>, i64)]) -> Polynomial {
    let part = Partition::of_word(w).unwrap();
    let blocks = part.blocks();
    Polynomial::from_terms(picks.iter().map(|(choice, c)| {
        let mut vars = BTreeSet::new();
        for (k, &x) in choice.iter().enumerate() {
            let b = &blocks[k % blocks.len()];
            let vs: Vec<VarId> = b.vars().collect();
            if x as usize % (vs.len() + 1) < vs.len() {
                vars.insert(vs[x as usize % (vs.len() + 1)]);
            }
        }
        (Monomial::product(vars), Scalar::from_int(*c))
    }))
}

fn is_sml_oracle(m: &Monomial, part: &Partition) -> bool {
    let mut hits = vec![0u32; part.len()];
    for &(v, e) in m.factors() {
        match part.block_of(v) {
            Some(b) if e == 1 => hits[b] += 1,
            _ => return false,
        }
    }
    hits.iter().all(|&h| h == 1)
}

pub type ProjectionInput = (Word, Polynomial, Polynomial, i64, i64);

pub fn projection_input() -> impl Strategy<Value = ProjectionInput> {
    small_word().prop_flat_map(|w| {
        let d = w.len();
        let picks = || prop::collection::vec((prop::collection::vec(0u32..16, d..=d + 1), -5i64..=5), 0..12);
        (Just(w), picks(), picks(), -3i64..=3, -3i64..=3)
            .prop_map(|(w, a, b, s, t)| (w.clone(), word_poly(&w, &a), word_poly(&w, &b), s, t))
    })
}

pub fn projection_idempotent_and_linear((w, f, g, s, t): ProjectionInput) -> Result<(), TestCaseError> {
    let part = Partition::of_word(&w).unwrap();
    let pf = project_sml(&f, &w);
    prop_assert_eq!(project_sml(&pf, &w), pf.clone());
    let (s, t) = (Polynomial::constant(Scalar::from_int(s)), Polynomial::constant(Scalar::from_int(t)));
    let combo = &(&s * &f) + &(&t * &g);
    prop_assert_eq!(project_sml(&combo, &w), &(&s * &pf) + &(&t * &project_sml(&g, &w)));
    for (m, c) in f.terms() {
        let expected = if is_sml_oracle(m, &part) { c.clone() } else { Scalar::zero() };
        prop_assert_eq!(pf.coeff(m), expected);
    }
    Ok(())
}

pub type BijectionInput = (Word, Side, Vec<usize>, u64);

pub fn bijection_input() -> impl Strategy<Value = BijectionInput> {
    small_word().prop_flat_map(|w| {
        let d = w.len();
        (Just(w), any::<bool>(), prop::collection::vec(any::<bool>(), d), any::<u64>()).prop_map(|(w, pos, pick, bits)| {
            let side = if pos { Side::Positive } else { Side::Negative };
            let iv = w.intervals();
            let s: Vec<usize> = (1..=w.len()).filter(|&i| iv.side(i) == side && pick[i - 1]).collect();
            (w, side, s, bits)
        })
    })
}

pub fn string_monomial_round_trip((w, side, s, bits): BijectionInput) -> Result<(), TestCaseError> {
    let iv = w.intervals();
    let domain = iv.union(s.iter().copied());
    let values: Vec<bool> = (0..domain.len()).map(|k| bits >> (k % 64) & 1 == 1).collect();
    let sigma = BitString::new(domain, values);
    let m = monomial_of_string(&sigma, &w, side).unwrap();
    prop_assert_eq!(m.degree() as usize, s.len());
    let back = string_of_monomial(&m, &w).unwrap();
    prop_assert_eq!(&back.string, &sigma);
    prop_assert_eq!(back.blocks, s.iter().copied().collect::<BTreeSet<_>>());
    if !s.is_empty() {
        prop_assert_eq!(back.side, side);
    }
    // and the other direction over every monomial of w|_S
    let all = set_multilinear_monomials(&w, &s);
    let pick = &all[(bits % all.len() as u64) as usize];
    let dec = string_of_monomial(pick, &w).unwrap();
    prop_assert_eq!(&monomial_of_string(&dec.string, &w, side).unwrap(), pick);
    let distinct: BTreeSet<&Monomial> = all.iter().collect();
    prop_assert_eq!(distinct.len(), all.len());
    Ok(())
}

const P: u128 = (1 << 61) - 1;

fn to_mod(x: i64) -> u128 {
    (x.rem_euclid(P as i64)) as u128
}

fn pow_mod(mut b: u128, mut e: u128) -> u128 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % P;
        }
        b = b * b % P;
        e >>= 1;
    }
    r
}

/// Gaussian elimination over `F_p`; with entries and size this small every
/// nonzero minor is below `p` in absolute value, so this equals the rank over Q.
pub fn rank_mod_p(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<u128>> = rows.iter().map(|r| r.iter().map(|&x| to_mod(x)).collect()).collect();
    let ncols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..a.len()).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, p);
        let inv = pow_mod(a[rank][c], P - 2);
        for r in 0..a.len() {
            if r != rank && a[r][c] != 0 {
                let f = a[r][c] * inv % P;
                for k in c..ncols {
                    let sub = f * a[rank][k] % P;
                    a[r][k] = (a[r][k] + P - sub) % P;
                }
            }
        }
        rank += 1;
    }
    rank
}

pub type RankInput = (Vec<Vec<i64>>, i64);

/// Products of two random factors, so low ranks show up often.
pub fn rank_input() -> impl Strategy<Value = RankInput> {
    let m = (1usize..=7, 1usize..=7, 1usize..=7).prop_flat_map(|(r, k, c)| {
        (prop::collection::vec(prop::collection::vec(-3i64..=3, k), r), prop::collection::vec(prop::collection::vec(-3i64..=3, c), k))
            .prop_map(move |(a, b)| {
                (0..r).map(|i| (0..c).map(|j| (0..k).map(|l| a[i][l] * b[l][j]).sum()).collect()).collect::<Vec<Vec<i64>>>()
            })
    });
    (m, 1i64..=6)
}

pub fn rank_matches_prime_oracle((m, den): RankInput) -> Result<(), TestCaseError> {
    let expected = rank_mod_p(&m);
    let ints: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    prop_assert_eq!(bareiss_rank(ints), expected);
    // scaling rows by rationals leaves the rank unchanged
    let rows: Vec<Vec<Scalar>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().map(|&x| Scalar::new(x, den + i as i64)).collect())
        .collect();
    prop_assert_eq!(exact_rank(&CoefficientMatrix::from_rows(rows)), expected);
    Ok(())
}
