use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ipslab::circuit::Circuit;
use ipslab::experiment::{run_suite, ExperimentConfig, Report, Status};
use ipslab::inverse::boolean_inverse;
use ipslab::ips::{build_refutation, verify_ips_with, IpsProof, ProofClass, Verdict, VerifyOptions, DEFAULT_EXPANSION_CAP};
use ipslab::knapsack::{build_ks, collapsed_subset_sum, default_beta, tau_m, tau_w_embedding, GenericInstance};
use ipslab::rank::{coefficient_matrix, exact_rank, RelRank};
use ipslab::word::{gen_balanced_word, index_intervals, is_balanced, Side};
use ipslab::{Monomial, MonomialOrder, Polynomial, Scalar, Word, DEFAULT_VAR_CAP};

#[derive(Parser)]
#[command(name = "ipslab", version, about = "Knapsack polynomials, Boolean inverses, coefficient-matrix ranks and IPS checks")]
struct Cli {
    /// Maximum number of variables of any enumerated cube.
    #[arg(long, global = true, env = "IPSLAB_CAP", default_value_t = DEFAULT_VAR_CAP)]
    cap: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Monomial order used for leading-monomial checks; both when omitted.
    #[arg(long, global = true)]
    order: Option<MonomialOrder>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate or inspect words.
    #[command(subcommand)]
    Word(WordCmd),
    /// Knapsack polynomial construction and restrictions.
    #[command(subcommand)]
    Ks(KsCmd),
    /// Multilinear inverse of a polynomial over the Boolean cube.
    Inverse {
        #[arg(long)]
        poly: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Exact rank of the coefficient matrix of a polynomial.
    Rank {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        word: PathBuf,
        /// Use the full matrix instead of the set-multilinear submatrix.
        #[arg(long)]
        full: bool,
    },
    /// Relative rank and its integer certificate.
    Relrk {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        word: PathBuf,
    },
    /// Build a multilinear L-IPS refutation of `f = 0, x^2 = x`.
    Refute {
        #[arg(long)]
        poly: PathBuf,
        /// Output circuit.
        #[arg(long)]
        circuit: PathBuf,
        /// Output axiom list.
        #[arg(long)]
        axioms: PathBuf,
    },
    /// Check an IPS certificate. Exit 0 on PASS, 1 on FAIL, 2 on bad input.
    VerifyIps {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        axioms: PathBuf,
        #[arg(long, default_value = "general")]
        class: ProofClass,
        /// Random identity-test trials when expansion is too large.
        #[arg(long)]
        pit: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_EXPANSION_CAP)]
        expansion_cap: u128,
    },
    /// Batch experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Subcommand)]
enum WordCmd {
    /// Deterministic balanced word with `d` entries of magnitude about `k`.
    Gen {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        k: u64,
    },
    /// Balance, intervals and variable count of a word file.
    Check { file: PathBuf },
}

#[derive(Subcommand)]
enum KsCmd {
    Gen {
        #[arg(long)]
        word: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<Scalar>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Restrict ks_w by the assignment attached to a selector-side monomial.
    Collapse {
        #[arg(long)]
        word: PathBuf,
        #[arg(long)]
        monomial: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<Scalar>,
    },
    /// Embed ks_w into the generic degree-4 instance on `n` variables.
    Embed {
        #[arg(long)]
        word: PathBuf,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<Scalar>,
    },
}

#[derive(Subcommand)]
enum ExperimentCmd {
    FullRank(FullRankArgs),
}

#[derive(Args)]
struct FullRankArgs {
    #[arg(long, default_value_t = 4)]
    dmax: usize,
    #[arg(long, default_value_t = 3)]
    bmax: u32,
    #[arg(long, default_value_t = 18)]
    var_budget: u128,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<Scalar>,
    #[arg(long)]
    out: PathBuf,
    /// Nested JSON report; defaults to the CSV path with a `.json` extension.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    include_unbalanced: bool,
    /// Extra word files to append to the grid.
    #[arg(long = "word")]
    words: Vec<PathBuf>,
    /// Also run the degree law up to this `n`.
    #[arg(long)]
    degree_law: Option<u32>,
    /// Build and verify a refutation for each word.
    #[arg(long)]
    refutation: bool,
    #[arg(long, default_value_t = 0)]
    mutations: usize,
    #[arg(long, default_value_t = DEFAULT_EXPANSION_CAP)]
    expansion_cap: u128,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(value: &Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn orders(cli: &Cli) -> Vec<MonomialOrder> {
    cli.order.map_or_else(|| MonomialOrder::ALL.to_vec(), |o| vec![o])
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.cmd {
        Cmd::Word(WordCmd::Gen { d, k }) => {
            let w = gen_balanced_word(*d, *k)?;
            println!("{}", serde_json::to_string(&w)?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Word(WordCmd::Check { file }) => {
            let w: Word = read_json(file)?;
            let balanced = is_balanced(&w).is_balanced();
            let iv = index_intervals(&w);
            let intervals: Vec<Value> = (1..=w.len())
                .map(|i| {
                    let x = iv.of(i);
                    json!({ "index": i, "positions": x.positions().collect::<Vec<_>>() })
                })
                .collect();
            emit(
                &json!({
                    "word": w,
                    "balanced": balanced,
                    "variables": w.variable_count().to_string(),
                    "positive_weight": w.side_weight(Side::Positive),
                    "negative_weight": w.side_weight(Side::Negative),
                    "intervals": intervals,
                }),
                None,
            )?;
            Ok(if balanced { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Ks(KsCmd::Gen { word, beta, out }) => {
            let w: Word = read_json(word)?;
            w.check_cap(cli.cap)?;
            let beta = beta.clone().unwrap_or_else(|| default_beta(&w));
            let ks = build_ks(&w, &beta)?;
            emit(
                &json!({
                    "word": w,
                    "beta": beta,
                    "orientation": ks.orientation,
                    "degree": ks.poly.total_degree().finite(),
                    "terms": ks.poly.len(),
                    "poly": ks.poly,
                }),
                out.as_deref(),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Ks(KsCmd::Collapse { word, monomial, beta }) => {
            let w: Word = read_json(word)?;
            w.check_cap(cli.cap)?;
            let m: Monomial = read_json(monomial)?;
            let beta = beta.clone().unwrap_or_else(|| default_beta(&w));
            let ks = build_ks(&w, &beta)?;
            let tau = tau_m(&m, &w)?;
            let restricted = ks.poly.substitute(&tau);
            let expected = collapsed_subset_sum(&m, &w, &beta)?;
            let holds = restricted == expected;
            emit(
                &json!({
                    "monomial": m.to_string(),
                    "assignment": tau.iter().map(|(v, c)| (v.to_string(), json!(c.to_string()))).collect::<serde_json::Map<_, _>>(),
                    "restricted": restricted.to_string(),
                    "expected": expected.to_string(),
                    "holds": holds,
                }),
                None,
            )?;
            Ok(if holds { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Ks(KsCmd::Embed { word, n, beta }) => {
            let w: Word = read_json(word)?;
            w.check_cap(cli.cap)?;
            let beta = beta.clone().unwrap_or_else(|| default_beta(&w));
            let n = match n {
                Some(n) => *n,
                None => u32::try_from(w.variable_count()).context("word too large")? + 1,
            };
            let (ks, emb) = tau_w_embedding(&w, n, &beta)?;
            let generic = GenericInstance::new(n, &beta)?;
            let holds = emb.verify(&generic, &ks.poly);
            let nonzero: serde_json::Map<String, Value> = emb
                .assignment
                .iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(v, c)| (v.to_string(), json!(c.to_string())))
                .collect();
            emit(
                &json!({
                    "n": n,
                    "padding": emb.padding,
                    "renaming": emb.renaming.iter().map(|(v, k)| (v.to_string(), json!(k))).collect::<serde_json::Map<_, _>>(),
                    "nonzero_assignment": nonzero,
                    "assigned": emb.assignment.len(),
                    "holds": holds,
                }),
                None,
            )?;
            Ok(if holds { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Inverse { poly, out } => {
            let f: Polynomial = read_json(poly)?;
            let r = boolean_inverse(&f, cli.cap)?;
            emit(
                &json!({
                    "variables": r.variables,
                    "degree": r.degree.finite(),
                    "terms": r.g.len(),
                    "poly": r.g,
                }),
                out.as_deref(),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Rank { poly, word, full } => {
            let f: Polynomial = read_json(poly)?;
            let w: Word = read_json(word)?;
            let m = coefficient_matrix(&f, &w, !full)?;
            let rank = exact_rank(&m);
            let (rows, cols) = m.dims();
            emit(
                &json!({
                    "kind": m.kind,
                    "rows": rows.to_string(),
                    "cols": cols.to_string(),
                    "rank": rank,
                    "full_rank": rank as u128 == rows.min(cols),
                }),
                None,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Relrk { poly, word } => {
            let f: Polynomial = read_json(poly)?;
            let w: Word = read_json(word)?;
            let m = coefficient_matrix(&f, &w, true)?;
            let r = RelRank::of(&m);
            let b = w.max_abs() as u32;
            emit(
                &json!({
                    "rank": r.rank,
                    "rows": r.rows.to_string(),
                    "cols": r.cols.to_string(),
                    "relrk_squared": r.squared(),
                    "b": b,
                    "certificate": r.at_least_two_pow_neg_half(b),
                    "full_rank": r.is_full(),
                }),
                None,
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Refute { poly, circuit, axioms } => {
            let f: Polynomial = read_json(poly)?;
            let p = build_refutation(&f, cli.cap)?;
            emit(&serde_json::to_value(&p.circuit)?, Some(circuit))?;
            emit(&serde_json::to_value(&p.axioms)?, Some(axioms))?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::VerifyIps { circuit, axioms, class, pit, expansion_cap } => {
            let c: Circuit = read_json(circuit)?;
            let a: Vec<Polynomial> = read_json(axioms)?;
            let proof = IpsProof::new(c, a, *class);
            let mut opts = VerifyOptions { expansion_cap: *expansion_cap, seed: cli.seed, ..Default::default() };
            if let Some(t) = pit {
                opts.pit_trials = *t;
            }
            let verdict = verify_ips_with(&proof, &opts)?;
            emit(&serde_json::to_value(&verdict)?, None)?;
            Ok(match verdict {
                Verdict::Pass { .. } => ExitCode::SUCCESS,
                Verdict::Fail { .. } => ExitCode::from(1),
            })
        }
        Cmd::Experiment(ExperimentCmd::FullRank(args)) => experiment(cli, args),
    }
}

fn experiment(cli: &Cli, args: &FullRankArgs) -> Result<ExitCode> {
    if cli.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    let mut cfg = ExperimentConfig {
        dmax: args.dmax,
        bmax: args.bmax,
        var_budget: args.var_budget,
        cap: cli.cap,
        beta: args.beta.clone(),
        orders: orders(cli),
        include_unbalanced: args.include_unbalanced,
        degree_law_nmax: args.degree_law,
        expansion_cap: args.expansion_cap,
        seed: cli.seed,
        jobs: cli.jobs,
        ..Default::default()
    };
    for p in &args.words {
        cfg.extra_words.push(read_json(p)?);
    }
    cfg.checks.refutation = args.refutation;
    cfg.checks.mutations = args.mutations;
    let report = run_suite(&cfg);
    write_csv(&report, &args.out)?;
    let json_path = args.json.clone().unwrap_or_else(|| args.out.with_extension("json"));
    emit(&serde_json::to_value(&report)?, Some(&json_path))?;
    let s = &report.summary;
    let mut err = std::io::stderr();
    writeln!(err, "pass {} fail {} skipped {} data {} degree-law failures {}", s.pass, s.fail, s.skipped, s.data, s.degree_law_failures)?;
    Ok(if report.ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn write_csv(report: &Report, path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    let order_names: Vec<String> = report.config.orders.iter().map(|o| o.name().to_string()).collect();
    let mut header = vec!["word".to_string(), "dims".into(), "rank".into(), "full_rank?".into(), "relrk_cert?".into(), "lm_claim?".into()];
    header.push("seconds".into());
    header.extend(
        ["status", "balanced", "variables", "ks_terms", "ks_degree", "collapse?", "embedding?", "refutation?", "mutations_failed", "note"]
            .map(String::from),
    );
    out.write_record(&header)?;
    for r in &report.rows {
        let word = serde_json::to_string(&r.word)?;
        let dims = r.relrk.map(|x| format!("{}x{}", x.rows, x.cols)).unwrap_or_default();
        let rank = r.relrk.map(|x| x.rank.to_string()).unwrap_or_default();
        let lm = if r.lm_claim.is_empty() {
            String::new()
        } else {
            order_names
                .iter()
                .filter_map(|o| r.lm_claim.get(o).map(|b| format!("{o}:{b}")))
                .collect::<Vec<_>>()
                .join(";")
        };
        let status = match r.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
            Status::Data => "DATA",
        };
        out.write_record([
            word,
            dims,
            rank,
            opt(&r.full_rank),
            opt(&r.relrk_cert),
            lm,
            format!("{:.3}", r.seconds),
            status.to_string(),
            r.balanced.to_string(),
            r.variables.to_string(),
            opt(&r.ks_terms),
            r.ks_degree.to_string(),
            opt(&r.collapse),
            opt(&r.embedding),
            opt(&r.refutation),
            opt(&r.mutations_failed),
            r.note.clone(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
