//! One PASS/FAIL line per acceptance criterion, written straight to stdout
//! so it shows up without `--nocapture`.

mod common;

use std::io::Write as _;
use std::sync::OnceLock;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use ipslab::experiment::{degree_law, run_suite, Checks, ExperimentConfig, Report, Row, Status};
use ipslab::inverse::{boolean_inverse, subset_sum};
use ipslab::ips::{build_refutation, verify_ips_with, Method, Verdict, VerifyOptions};
use ipslab::knapsack::{build_ks, collapsed_subset_sum, default_beta, tau_m};
use ipslab::rank::coefficient_matrix;
use ipslab::word::Side;
use ipslab::{Monomial, MonomialOrder, Polynomial, Scalar, VarId, Word};

const SEED: u64 = 20240611;
const MUTATIONS: usize = 50;
const FAMILY_SIZE: usize = 239;

fn line(n: u32, name: &str, ok: bool, detail: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{} criterion {n} ({name}): {detail}", if ok { "PASS" } else { "FAIL" });
    let _ = out.flush();
}

/// The family run shared by criteria 1, 2, 4, 5, 6 and 7.
fn suite() -> &'static (Report, f64) {
    static SUITE: OnceLock<(Report, f64)> = OnceLock::new();
    SUITE.get_or_init(|| {
        let cfg = ExperimentConfig {
            dmax: 4,
            bmax: 3,
            var_budget: 18,
            orders: MonomialOrder::ALL.to_vec(),
            checks: Checks { refutation: true, mutations: MUTATIONS, ..Checks::default() },
            expansion_cap: u128::MAX,
            seed: SEED,
            jobs: std::thread::available_parallelism().map_or(1, |n| n.get()),
            ..ExperimentConfig::default()
        };
        let t = Instant::now();
        let report = run_suite(&cfg);
        (report, t.elapsed().as_secs_f64())
    })
}

fn rows() -> &'static [Row] {
    &suite().0.rows
}

fn stage(r: &Row, names: &[&str]) -> f64 {
    names.iter().filter_map(|n| r.timings.get(*n)).sum()
}

fn side_dim(w: &Word, side: Side) -> u128 {
    let bits: i64 = w.entries().iter().filter(|&&e| (e >= 0) == side.is_positive()).map(|e| e.abs()).sum();
    1u128 << bits
}

const P: u128 = (1 << 61) - 1;

fn mod_p(x: &BigInt) -> u128 {
    let p = BigInt::from(P);
    let r = ((x % &p) + &p) % &p;
    r.to_string().parse().unwrap()
}

fn inv_mod(a: u128) -> u128 {
    let (mut b, mut e, mut r) = (a, P - 2, 1u128);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % P;
        }
        b = b * b % P;
        e >>= 1;
    }
    r
}

/// Rank modulo a large prime; a lower bound for the rank over Q.
fn rank_mod_p(mut a: Vec<Vec<u128>>) -> usize {
    let ncols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..ncols {
        let Some(p) = (rank..a.len()).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, p);
        let inv = inv_mod(a[rank][c]);
        for r in rank + 1..a.len() {
            if a[r][c] != 0 {
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

/// Full rank of `M_w(1/ks_w)` witnessed independently: a full-rank residue
/// matrix forces full rank over Q.
fn full_rank_mod_p(w: &Word) -> bool {
    let ks = build_ks(w, &default_beta(w)).unwrap();
    let g = boolean_inverse(&ks.poly, 24).unwrap().g;
    let m = coefficient_matrix(&g, w, true).unwrap();
    let (rows, cols) = m.dims();
    let mut a = vec![vec![0u128; cols as usize]; rows as usize];
    for (r, c, x) in m.nonzero() {
        a[r][c] = mod_p(&x.numer()) * inv_mod(mod_p(&x.denom())) % P;
    }
    rank_mod_p(a) as u128 == rows.min(cols)
}

#[test]
fn criterion_1_full_rank() {
    let rows = rows();
    let balanced: Vec<&Row> = rows.iter().filter(|r| r.status != Status::Data).collect();
    let mut bad = Vec::new();
    for r in &balanced {
        let expected = side_dim(&r.word, Side::Positive).min(side_dim(&r.word, Side::Negative));
        let rank = r.relrk.map(|x| x.rank as u128);
        if rank != Some(expected) || r.full_rank != Some(true) {
            bad.push(r.word.to_string());
        }
    }
    // residue-rank witness on every word with a nontrivial matrix
    let t = Instant::now();
    let witnessed = balanced.iter().filter(|r| !r.word.is_empty()).filter(|r| full_rank_mod_p(&r.word)).count();
    let oracle_secs = t.elapsed().as_secs_f64();
    let secs: f64 = rows.iter().map(|r| stage(r, &["ks", "inverse", "rank"])).sum();
    let nontrivial = balanced.iter().filter(|r| !r.word.is_empty()).count();
    let ok = balanced.len() == FAMILY_SIZE && bad.is_empty() && witnessed == nontrivial && secs < 600.0;
    line(
        1,
        "full rank",
        ok,
        &format!(
            "{} balanced words, {} rank mismatches, {witnessed}/{nontrivial} confirmed mod p in {oracle_secs:.1}s, ks+inverse+rank {secs:.1}s {bad:?}",
            balanced.len(),
            bad.len()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_2_relative_rank() {
    let mut bad = Vec::new();
    let mut checked = 0;
    for r in rows().iter().filter(|r| r.status != Status::Data) {
        let b = r.word.entries().iter().map(|e| e.unsigned_abs()).max().unwrap_or(0) as u32;
        let Some(x) = r.relrk else {
            bad.push(r.word.to_string());
            continue;
        };
        let lhs = BigInt::from(x.rank) * BigInt::from(x.rank) * (BigInt::one() << b);
        let rhs = BigInt::from(side_dim(&r.word, Side::Positive)) * BigInt::from(side_dim(&r.word, Side::Negative));
        if lhs < rhs || r.relrk_cert != Some(true) {
            bad.push(r.word.to_string());
        }
        checked += 1;
    }
    let ok = checked == FAMILY_SIZE && bad.is_empty();
    line(2, "relative rank certificate", ok, &format!("{checked} certificates rank^2*2^b >= |M^P||M^N|, violations {bad:?}"));
    assert!(ok);
}

/// Coefficient of `x_1⋯x_n` in the multilinear inverse of `Σx_i − β`, as
/// the alternating sum `Σ_k (−1)^(n−k) C(n,k) / (k − β)`.
fn top_coefficient(n: u32, beta: i64) -> BigRational {
    let mut total = BigRational::zero();
    let mut binom = BigInt::one();
    for k in 0..=n {
        let term = BigRational::new(binom.clone(), BigInt::from(k as i64 - beta));
        if (n - k) % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
        binom = binom * BigInt::from(n - k) / BigInt::from(k + 1);
    }
    total
}

#[test]
fn criterion_3_degree_law() {
    let t = Instant::now();
    let rows = degree_law(14);
    let secs = t.elapsed().as_secs_f64();
    let mut bad: Vec<String> = rows.iter().filter(|r| !r.holds).map(|r| format!("n={} beta={}", r.n, r.beta)).collect();
    // independent top coefficient for the largest instances
    for beta in [-1i64, 15, 16] {
        let n = 14;
        let g = boolean_inverse(&subset_sum(n, &Scalar::from_int(beta)), 24).unwrap().g;
        let top = Monomial::product((1..=n).map(VarId::Generic));
        let expected = top_coefficient(n, beta);
        if g.coeff(&top).to_big() != expected || expected.is_zero() {
            bad.push(format!("top coefficient n={n} beta={beta}"));
        }
    }
    let ok = rows.len() == 45 && bad.is_empty() && secs < 60.0;
    line(3, "degree law", ok, &format!("{} instances n<=14, {secs:.1}s, failures {bad:?}", rows.len()));
    assert!(ok);
}

#[test]
fn criterion_4_leading_monomial_claim() {
    let mut bad = Vec::new();
    let mut checked = 0;
    for r in rows().iter().filter(|r| r.status != Status::Data) {
        for o in MonomialOrder::ALL {
            checked += 1;
            if r.lm_claim.get(o.name()) != Some(&true) {
                bad.push(format!("{} {}", r.word, o.name()));
            }
        }
    }
    let ok = checked == 2 * FAMILY_SIZE && bad.is_empty();
    line(4, "leading-monomial claim", ok, &format!("{checked} word/order pairs under grlex and lex, violations {bad:?}"));
    assert!(ok);
}

#[test]
fn criterion_5_collapse() {
    let mut bad: Vec<String> = rows()
        .iter()
        .filter(|r| r.status != Status::Data && r.collapse != Some(true))
        .map(|r| r.word.to_string())
        .collect();

    let w = Word::new(vec![-3, 6, -2, -4, 2, 6, -4, -2]);
    let m = Monomial::product(["y.1.100", "y.4.1001", "y.7.0110", "y.8.11"].map(|s| s.parse::<VarId>().unwrap()));
    let mut shown = String::new();
    for beta in [Scalar::from_int(-1), Scalar::new(7, 3)] {
        let ks = build_ks(&w, &beta).unwrap();
        let got = ks.poly.substitute(&tau_m(&m, &w).unwrap());
        let expected = Polynomial::from_terms([
            (Monomial::var("x.5.00".parse().unwrap()), Scalar::one()),
            (Monomial::var("x.6.101101".parse().unwrap()), Scalar::one()),
            (Monomial::one(), -&beta),
        ]);
        if got != expected || collapsed_subset_sum(&m, &w, &beta).unwrap() != expected {
            bad.push(format!("worked case beta={beta}"));
        }
        if shown.is_empty() {
            shown = got.to_string();
        }
    }
    let checked = rows().iter().filter(|r| r.collapse.is_some()).count();
    let ok = checked == FAMILY_SIZE && bad.is_empty();
    line(5, "tau_m collapse", ok, &format!("{checked} words, all selector monomials; worked case gives {shown}; failures {bad:?}"));
    assert!(ok);
}

#[test]
fn criterion_6_embedding() {
    let eligible: Vec<&Row> = rows().iter().filter(|r| r.status != Status::Data && r.ks_degree <= 4).collect();
    let bad: Vec<String> = eligible.iter().filter(|r| r.embedding != Some(true)).map(|r| r.word.to_string()).collect();
    let ok = !eligible.is_empty() && bad.is_empty();
    line(6, "tau_w embedding", ok, &format!("{} words with deg(ks_w) <= 4, failures {bad:?}", eligible.len()));
    assert!(ok);
}

#[test]
fn criterion_7_ips_round_trip() {
    let opts = VerifyOptions { expansion_cap: u128::MAX, seed: SEED, ..VerifyOptions::default() };
    let mut bad = Vec::new();
    let mut instances = 0;
    for n in 0..=10 {
        for beta in [-1i64, n as i64 + 1] {
            instances += 1;
            let f = subset_sum(n, &Scalar::from_int(beta));
            let proof = build_refutation(&f, 24).unwrap();
            let pass = matches!(verify_ips_with(&proof, &opts), Ok(Verdict::Pass { method: Method::Expansion }));
            let killed = ipslab::experiment::mutation_failures(&proof, MUTATIONS, &opts, SEED + n as u64);
            if !pass || killed != MUTATIONS {
                bad.push(format!("subset sum n={n} beta={beta}: pass={pass} killed={killed}"));
            }
        }
    }
    for r in rows().iter().filter(|r| r.status != Status::Data) {
        instances += 1;
        if r.refutation != Some(true) || r.mutations_failed != Some(MUTATIONS) {
            bad.push(format!("{}: refutation={:?} killed={:?}", r.word, r.refutation, r.mutations_failed));
        }
    }
    let secs: f64 = rows().iter().map(|r| stage(r, &["refutation", "verify", "mutations"])).sum();
    let ok = bad.is_empty();
    line(
        7,
        "IPS round trip",
        ok,
        &format!("{instances} instances verified by full expansion, {MUTATIONS} mutations each rejected, family share {secs:.1}s, failures {bad:?}"),
    );
    assert!(ok);
}

#[test]
fn criterion_8_properties() {
    let results = [
        ("ring laws", common::run(common::ring_input(), common::ring_laws)),
        ("reduction reconstruction", common::run(common::reduction_input(), common::reduction_reconstructs)),
        ("projection idempotence/linearity", common::run(common::projection_input(), common::projection_idempotent_and_linear)),
        ("string/monomial bijection", common::run(common::bijection_input(), common::string_monomial_round_trip)),
        ("rank vs prime oracle", common::run(common::rank_input(), common::rank_matches_prime_oracle)),
    ];
    let bad: Vec<String> = results.iter().filter_map(|(n, r)| r.as_ref().err().map(|e| format!("{n}: {e}"))).collect();
    let ok = bad.is_empty();
    line(
        8,
        "property suites",
        ok,
        &format!("{} suites x {} cases, seed {:#x}, failures {bad:?}", results.len(), common::CASES, common::SEED),
    );
    assert!(ok);
}

#[test]
fn top_coefficient_oracle_small() {
    // 1/(x + 1) on {0,1} is 1 - x/2
    assert_eq!(top_coefficient(1, -1), BigRational::new(BigInt::from(-1), BigInt::from(2)));
    let g = boolean_inverse(&subset_sum(3, &Scalar::from_int(5)), 24).unwrap().g;
    let top = Monomial::product((1..=3).map(VarId::Generic));
    assert_eq!(g.coeff(&top).to_big(), top_coefficient(3, 5));
}
