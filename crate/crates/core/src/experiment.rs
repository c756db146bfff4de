//! Batch runs over families of words, producing per-word report rows.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::inverse::{boolean_inverse, subset_sum};
use crate::ips::{build_refutation, coefficient_sites, verify_ips_with, Method, Verdict, VerifyOptions};
use crate::knapsack::{build_ks, collapsed_subset_sum, default_beta, ks_degree, tau_m, tau_w_embedding, GenericInstance};
use crate::monomial::MonomialOrder;
use crate::rank::{full_rank_report, verify_leading_claim, RelRank};
use crate::scalar::Scalar;
use crate::word::{is_balanced, set_multilinear_monomials, Word};
use crate::DEFAULT_VAR_CAP;

pub const SCHEMA_VERSION: u32 = 1;

/// Which checks to run per word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Checks {
    pub rank: bool,
    pub claim: bool,
    pub collapse: bool,
    pub embedding: bool,
    pub refutation: bool,
    /// Coefficient mutations of each refutation, all of which must fail.
    pub mutations: usize,
}

impl Default for Checks {
    fn default() -> Self {
        Checks { rank: true, claim: true, collapse: true, embedding: true, refutation: false, mutations: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    /// Words of length `0..=dmax`.
    pub dmax: usize,
    /// Entries with `1 <= |w_i| <= bmax`.
    pub bmax: u32,
    /// Keep words with at most this many variables `Σ 2^|w_i|`.
    pub var_budget: u128,
    /// Enumeration cap; larger words are reported as SKIPPED.
    pub cap: usize,
    pub beta: Option<Scalar>,
    pub orders: Vec<MonomialOrder>,
    /// Also report unbalanced grid words (as data).
    pub include_unbalanced: bool,
    /// Extra words appended to the grid.
    pub extra_words: Vec<Word>,
    /// Run the degree law for `n = 0..=degree_law_nmax`.
    pub degree_law_nmax: Option<u32>,
    pub checks: Checks,
    pub expansion_cap: u128,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dmax: 4,
            bmax: 3,
            var_budget: 18,
            cap: DEFAULT_VAR_CAP,
            beta: None,
            orders: MonomialOrder::ALL.to_vec(),
            include_unbalanced: false,
            extra_words: Vec::new(),
            degree_law_nmax: None,
            checks: Checks::default(),
            expansion_cap: crate::ips::DEFAULT_EXPANSION_CAP,
            seed: 0,
            jobs: 1,
        }
    }
}

/// All words of length at most `dmax` with nonzero entries of magnitude at
/// most `bmax` and at most `var_budget` variables, sorted.
pub fn word_grid(dmax: usize, bmax: u32, var_budget: u128) -> Vec<Word> {
    let alphabet: Vec<i64> = (1..=bmax as i64).flat_map(|b| [b, -b]).collect();
    let mut out = vec![Word::default()];
    let mut layer = vec![Vec::<i64>::new()];
    for _ in 0..dmax {
        let mut next = Vec::new();
        for prefix in &layer {
            for &a in &alphabet {
                let mut w = prefix.clone();
                w.push(a);
                if Word::new(w.clone()).variable_count() <= var_budget {
                    next.push(w);
                }
            }
        }
        out.extend(next.iter().cloned().map(Word::new));
        layer = next;
    }
    out.sort();
    out
}

/// Balanced words of [`word_grid`].
pub fn balanced_family(dmax: usize, bmax: u32, var_budget: u128) -> Vec<Word> {
    word_grid(dmax, bmax, var_budget).into_iter().filter(|w| is_balanced(w).is_balanced()).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    /// Unbalanced word: numbers are reported, nothing is asserted.
    Data,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
            Status::Data => "DATA",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub word: Word,
    pub status: Status,
    pub balanced: bool,
    pub variables: u128,
    pub ks_terms: Option<usize>,
    pub ks_degree: u32,
    pub relrk: Option<RelRank>,
    pub full_rank: Option<bool>,
    pub relrk_cert: Option<bool>,
    /// Per monomial order.
    pub lm_claim: BTreeMap<String, bool>,
    pub collapse: Option<bool>,
    /// `None` when `deg(ks_w) > 4` or the check is off.
    pub embedding: Option<bool>,
    pub refutation: Option<bool>,
    pub mutations_failed: Option<usize>,
    pub note: String,
    /// Seconds per stage.
    pub timings: BTreeMap<String, f64>,
    pub seconds: f64,
}

impl Row {
    fn new(w: &Word) -> Self {
        Row {
            word: w.clone(),
            status: Status::Pass,
            balanced: is_balanced(w).is_balanced(),
            variables: w.variable_count(),
            ks_terms: None,
            ks_degree: ks_degree(w),
            relrk: None,
            full_rank: None,
            relrk_cert: None,
            lm_claim: BTreeMap::new(),
            collapse: None,
            embedding: None,
            refutation: None,
            mutations_failed: None,
            note: String::new(),
            timings: BTreeMap::new(),
            seconds: 0.0,
        }
    }

    fn checks_hold(&self, mutations: usize) -> bool {
        self.full_rank != Some(false)
            && self.relrk_cert != Some(false)
            && self.lm_claim.values().all(|&b| b)
            && self.collapse != Some(false)
            && self.embedding != Some(false)
            && self.refutation != Some(false)
            && self.mutations_failed.is_none_or(|k| k == mutations)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeLawRow {
    pub n: u32,
    pub beta: Scalar,
    pub degree: Option<u32>,
    pub holds: bool,
}

/// `deg(boolean_inverse(Σ x_i - β)) = n` for `β ∈ {-1, n+1, n+2}`.
pub fn degree_law(nmax: u32) -> Vec<DegreeLawRow> {
    let mut out = Vec::new();
    for n in 0..=nmax {
        for beta in [-1, n as i64 + 1, n as i64 + 2] {
            let beta = Scalar::from_int(beta);
            let degree = boolean_inverse(&subset_sum(n, &beta), DEFAULT_VAR_CAP.max(n as usize))
                .ok()
                .and_then(|r| r.degree.finite());
            out.push(DegreeLawRow { n, beta, degree, holds: degree == Some(n) });
        }
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    pub data: usize,
    pub degree_law_failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub artifact_version: String,
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    pub degree_law: Vec<DegreeLawRow>,
    pub summary: Summary,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.summary.fail == 0 && self.summary.degree_law_failures == 0
    }
}

fn timed<T>(timings: &mut BTreeMap<String, f64>, name: &str, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    *timings.entry(name.to_string()).or_default() += t.elapsed().as_secs_f64();
    out
}

/// Every check for one word.
pub fn run_word(w: &Word, cfg: &ExperimentConfig, seed: u64) -> Row {
    let start = Instant::now();
    let mut row = Row::new(w);
    run_word_inner(w, cfg, seed, &mut row);
    if row.status == Status::Pass {
        if !row.balanced {
            row.status = Status::Data;
        } else if !row.checks_hold(cfg.checks.mutations) {
            row.status = Status::Fail;
        }
    }
    row.seconds = start.elapsed().as_secs_f64();
    row
}

fn run_word_inner(w: &Word, cfg: &ExperimentConfig, seed: u64, row: &mut Row) {
    if w.check_cap(cfg.cap).is_err() {
        row.status = Status::Skipped;
        row.note = format!("{} variables exceed cap {}", row.variables, cfg.cap);
        return;
    }
    let beta = cfg.beta.clone().unwrap_or_else(|| default_beta(w));
    let t = &mut row.timings;
    let ks = match timed(t, "ks", || build_ks(w, &beta)) {
        Ok(ks) => ks,
        Err(e) => {
            row.status = if row.balanced { Status::Fail } else { Status::Data };
            row.note = e.to_string();
            return;
        }
    };
    row.ks_terms = Some(ks.poly.len());

    if cfg.checks.collapse {
        let ok = timed(t, "collapse", || {
            let sel = w.indices(ks.orientation.selector_side());
            (0u64..1 << sel.len()).all(|mask| {
                let chosen: Vec<usize> = (0..sel.len()).filter(|k| mask >> k & 1 == 1).map(|k| sel[k]).collect();
                set_multilinear_monomials(w, &chosen).iter().all(|m| {
                    let (Ok(tau), Ok(expected)) = (tau_m(m, w), collapsed_subset_sum(m, w, &beta)) else { return false };
                    ks.poly.substitute(&tau) == expected
                })
            })
        });
        row.collapse = Some(ok);
    }

    if cfg.checks.embedding && row.ks_degree <= 4 {
        let n = ks.variables().len() as u32 + 1;
        let ok = timed(t, "embedding", || {
            let Ok(generic) = GenericInstance::new(n, &beta) else { return false };
            match tau_w_embedding(w, n, &beta) {
                Ok((ks, emb)) => emb.verify(&generic, &ks.poly),
                Err(_) => false,
            }
        });
        row.embedding = Some(ok);
    }

    if cfg.checks.rank || cfg.checks.claim {
        let inv = match timed(t, "inverse", || boolean_inverse(&ks.poly, cfg.cap)) {
            Ok(inv) => inv,
            Err(e) => {
                row.status = Status::Fail;
                row.note = e.to_string();
                return;
            }
        };
        if cfg.checks.rank {
            match timed(t, "rank", || full_rank_report(w, &inv.g)) {
                Ok(rep) => {
                    row.relrk = Some(rep.relrk);
                    row.full_rank = Some(rep.full_rank);
                    row.relrk_cert = Some(rep.certificate);
                }
                Err(e) => row.note = e.to_string(),
            }
        }
        if cfg.checks.claim && row.balanced {
            for &ord in &cfg.orders {
                let ok = timed(t, "claim", || verify_leading_claim(w, &inv.g, ord).map(|r| r.holds()).unwrap_or(false));
                row.lm_claim.insert(ord.name().to_string(), ok);
            }
        }
    }

    if cfg.checks.refutation {
        let opts = VerifyOptions { expansion_cap: cfg.expansion_cap, seed, ..Default::default() };
        let proof = match timed(t, "refutation", || build_refutation(&ks.poly, cfg.cap)) {
            Ok(p) => p,
            Err(e) => {
                row.refutation = Some(false);
                row.note = e.to_string();
                return;
            }
        };
        let verdict = timed(t, "verify", || verify_ips_with(&proof, &opts));
        row.refutation = Some(matches!(verdict, Ok(Verdict::Pass { method: Method::Expansion })));
        if cfg.checks.mutations > 0 {
            let failed = timed(t, "mutations", || mutation_failures(&proof, cfg.checks.mutations, &opts, seed));
            row.mutations_failed = Some(failed);
        }
    }
}

/// Applies `count` random single-coefficient mutations and counts how many
/// are rejected.
pub fn mutation_failures(proof: &crate::ips::IpsProof, count: usize, opts: &VerifyOptions, seed: u64) -> usize {
    let sites = coefficient_sites(&proof.circuit);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d75_7461);
    let mut failed = 0;
    let mut q = proof.clone();
    // one screen point already catches a shifted coefficient with high probability
    let opts = VerifyOptions { screen_points: 1, ..opts.clone() };
    for _ in 0..count {
        let site = sites[rng.random_range(0..sites.len())];
        let mut delta = 0i64;
        while delta == 0 {
            delta = rng.random_range(-5..=5);
        }
        let delta = Scalar::new(delta, rng.random_range(1..=4));
        q.circuit.shift_coefficient(site, &delta).expect("site from coefficient_sites");
        if matches!(verify_ips_with(&q, &opts), Ok(Verdict::Fail { .. })) {
            failed += 1;
        }
        q.circuit.shift_coefficient(site, &-&delta).expect("site from coefficient_sites");
    }
    failed
}

/// Runs the whole grid; rows come back sorted by word.
pub fn run_suite(cfg: &ExperimentConfig) -> Report {
    let mut words: Vec<Word> = if cfg.dmax == 0 && cfg.bmax == 0 {
        Vec::new()
    } else if cfg.include_unbalanced {
        word_grid(cfg.dmax, cfg.bmax, cfg.var_budget)
    } else {
        balanced_family(cfg.dmax, cfg.bmax, cfg.var_budget)
    };
    words.extend(cfg.extra_words.iter().cloned());
    words.sort();
    words.dedup();

    let rows = Mutex::new(Vec::with_capacity(words.len()));
    let next = AtomicUsize::new(0);
    let worker = || loop {
        let k = next.fetch_add(1, Ordering::Relaxed);
        let Some(w) = words.get(k) else { break };
        let row = run_word(w, cfg, cfg.seed.wrapping_add(k as u64));
        rows.lock().expect("no poisoned workers").push(row);
    };
    let jobs = cfg.jobs.max(1);
    if jobs == 1 {
        worker();
    } else {
        std::thread::scope(|s| {
            for _ in 0..jobs {
                s.spawn(worker);
            }
        });
    }
    let mut rows = rows.into_inner().expect("no poisoned workers");
    rows.sort_by(|a, b| a.word.cmp(&b.word));

    let degree_law = cfg.degree_law_nmax.map(degree_law).unwrap_or_default();
    let mut summary = Summary { degree_law_failures: degree_law.iter().filter(|r| !r.holds).count(), ..Default::default() };
    for r in &rows {
        match r.status {
            Status::Pass => summary.pass += 1,
            Status::Fail => summary.fail += 1,
            Status::Skipped => summary.skipped += 1,
            Status::Data => summary.data += 1,
        }
    }
    Report {
        schema_version: SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        rows,
        degree_law,
        summary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        let fam = balanced_family(4, 3, 18);
        assert_eq!(fam.len(), 239);
        assert!(fam.contains(&Word::default()));
        assert!(fam.iter().all(|w| w.variable_count() <= 18));
        assert_eq!(word_grid(1, 1, 100), vec![Word::default(), Word::new(vec![-1]), Word::new(vec![1])]);
    }

    #[test]
    fn small_suite() {
        let cfg = ExperimentConfig {
            dmax: 2,
            bmax: 2,
            var_budget: 8,
            checks: Checks { refutation: true, mutations: 3, ..Default::default() },
            degree_law_nmax: Some(4),
            ..Default::default()
        };
        let rep = run_suite(&cfg);
        assert!(rep.ok(), "{:?}", rep.summary);
        assert!(rep.rows.windows(2).all(|p| p[0].word < p[1].word));
        assert_eq!(rep.summary.pass, rep.rows.len());
        assert_eq!(rep.degree_law.len(), 15);
    }

    #[test]
    fn unbalanced_and_skipped_rows() {
        let cfg = ExperimentConfig {
            dmax: 0,
            bmax: 0,
            cap: 6,
            extra_words: vec![Word::new(vec![1, -1, 1]), Word::new(vec![2, -2])],
            ..Default::default()
        };
        let rep = run_suite(&cfg);
        let status: Vec<Status> = rep.rows.iter().map(|r| r.status).collect();
        assert_eq!(status, vec![Status::Data, Status::Skipped]);
        assert!(rep.ok());
        let empty = run_suite(&ExperimentConfig { dmax: 0, bmax: 0, ..Default::default() });
        assert!(empty.rows.is_empty() && empty.ok());
    }
}
