//! Ideal Proof System refutations: checking, construction and extraction.
//!
//! A proof is a circuit `C(x, y, z)` over the proof variables `x_1..x_n`,
//! axiom placeholders `y_1..y_m` (`ya.j`) and Boolean placeholders
//! `z_1..z_n` (`za.i`, standing for `x_i^2 - x_i`). It refutes the axioms
//! when `C(x,0,0) = 0` and `C(x, f_1..f_m, x_1^2-x_1..x_n^2-x_n) = p` as
//! formal polynomials, with `p = 1` by default.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{polynomial_mod, Circuit, CircuitError};
use crate::inverse::{boolean_inverse, InverseError};
use crate::monomial::Monomial;
use crate::poly::{Assignment, Polynomial};
use crate::scalar::Scalar;
use crate::var::VarId;

/// `2^61 - 1`, used for the modular screen.
pub const SCREEN_PRIME: u64 = (1 << 61) - 1;
pub const DEFAULT_EXPANSION_CAP: u128 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IpsError {
    #[error("placeholder {0} has no matching axiom or variable")]
    Arity(VarId),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Inverse(#[from] InverseError),
    #[error("expected exactly one axiom, got {0}")]
    NotSingleAxiom(usize),
    #[error("C(x,y,0) is not of the form g(x)·y: offending monomial {0}")]
    NotLinearInY(Monomial),
    #[error("1 - g·f does not reduce to 0 modulo the Boolean axioms")]
    NonzeroRemainder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProofClass {
    #[default]
    General,
    /// Individual degree at most 1 in every `y_j` and `z_i`.
    Linear,
    /// Individual degree at most 1 in every `y_j`.
    Lips,
    /// L-IPS with `C(x,y,0)` multilinear in all `x` and `y`.
    Mlips,
}

impl fmt::Display for ProofClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProofClass::General => "general",
            ProofClass::Linear => "linear",
            ProofClass::Lips => "lips",
            ProofClass::Mlips => "mlips",
        })
    }
}

impl std::str::FromStr for ProofClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "general" => Ok(ProofClass::General),
            "linear" => Ok(ProofClass::Linear),
            "lips" | "l-ips" => Ok(ProofClass::Lips),
            "mlips" | "multilinear-l-ips" => Ok(ProofClass::Mlips),
            _ => Err(format!("unknown proof class {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IpsProof {
    pub circuit: Circuit,
    pub axioms: Vec<Polynomial>,
    /// `x_1..x_n` in order; `za.i` stands for the Boolean axiom of `x_i`.
    pub variables: Vec<VarId>,
    #[serde(default = "Polynomial::one")]
    pub target: Polynomial,
    #[serde(default)]
    pub class: ProofClass,
}

impl IpsProof {
    /// Proof variables default to every non-placeholder variable in sight.
    pub fn new(circuit: Circuit, axioms: Vec<Polynomial>, class: ProofClass) -> Self {
        let mut vars: BTreeSet<VarId> = circuit.variables().into_iter().filter(|v| !v.is_placeholder()).collect();
        for a in &axioms {
            vars.extend(a.vars());
        }
        IpsProof { circuit, axioms, variables: vars.into_iter().collect(), target: Polynomial::one(), class }
    }

    /// Image of each placeholder under the axioms.
    pub fn placeholder_images(&self) -> BTreeMap<VarId, Polynomial> {
        let mut out = BTreeMap::new();
        for (j, f) in self.axioms.iter().enumerate() {
            out.insert(VarId::AxiomPlaceholder(j as u32 + 1), f.clone());
        }
        for (i, &v) in self.variables.iter().enumerate() {
            out.insert(VarId::BooleanPlaceholder(i as u32 + 1), Polynomial::boolean_axiom(v));
        }
        out
    }

    fn check_arity(&self) -> Result<(), IpsError> {
        for v in self.circuit.variables() {
            let ok = match v {
                VarId::AxiomPlaceholder(j) => j >= 1 && j as usize <= self.axioms.len(),
                VarId::BooleanPlaceholder(i) => i >= 1 && i as usize <= self.variables.len(),
                _ => true,
            };
            if !ok {
                return Err(IpsError::Arity(v));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// `C(x,0,0) = 0`.
    ZeroAtOrigin,
    /// `C(x, f, x^2 - x) = p`.
    Refutes,
    /// The declared class fails on `C`.
    Class(ProofClass),
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::ZeroAtOrigin => f.write_str("C(x,0,0) = 0"),
            Condition::Refutes => f.write_str("C(x,f,x^2-x) = p"),
            Condition::Class(c) => write!(f, "class {c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// A monomial with a wrong coefficient (or a forbidden exponent).
    Monomial { monomial: String, coefficient: String },
    /// A point where the two sides differ.
    Point { point: BTreeMap<String, String> },
    /// A variable in which the individual degree exceeds 1.
    Variable { variable: String, point: BTreeMap<String, String> },
}

fn point_json(a: &Assignment) -> BTreeMap<String, String> {
    a.iter().map(|(v, x)| (v.to_string(), x.to_string())).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Expansion,
    /// Exact mismatch found at a point modulo a prime.
    ModularScreen,
    /// Randomized identity testing over the integers.
    Pit { trials: u32, per_trial_bound: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass { method: Method },
    Fail { condition: Condition, witness: Witness, method: Method },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Largest projected term count expanded exactly.
    pub expansion_cap: u128,
    /// Trials when falling back to randomized identity testing.
    pub pit_trials: u32,
    /// Points tried by the modular screen (0 disables it).
    pub screen_points: u32,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { expansion_cap: DEFAULT_EXPANSION_CAP, pit_trials: 20, screen_points: 2, seed: 0 }
    }
}

/// Checks a proof by exact expansion where the cap allows.
pub fn verify_ips(p: &IpsProof) -> Result<Verdict, IpsError> {
    verify_ips_with(p, &VerifyOptions::default())
}

fn is_axiom(v: VarId) -> bool {
    matches!(v, VarId::AxiomPlaceholder(_))
}

fn is_boolean(v: VarId) -> bool {
    matches!(v, VarId::BooleanPlaceholder(_))
}

/// First monomial of `c_hat` violating `class`, with the offending variable.
fn class_violation(c_hat: &Polynomial, class: ProofClass) -> Option<&Monomial> {
    c_hat.monomials().find(|m| {
        let bad = |pred: &dyn Fn(VarId) -> bool| m.factors().iter().any(|&(v, e)| e > 1 && pred(v));
        match class {
            ProofClass::General => false,
            ProofClass::Linear => bad(&|v| v.is_placeholder()),
            ProofClass::Lips => bad(&is_axiom),
            ProofClass::Mlips => {
                bad(&is_axiom) || (!m.vars().any(is_boolean) && !m.is_multilinear())
            }
        }
    })
}

fn diff_witness(d: &Polynomial) -> Witness {
    let (m, c) = d.terms().next_back().expect("nonzero difference");
    Witness::Monomial { monomial: m.to_string(), coefficient: c.to_string() }
}

pub fn verify_ips_with(p: &IpsProof, opts: &VerifyOptions) -> Result<Verdict, IpsError> {
    p.check_arity()?;
    p.circuit.measures()?;
    let images = p.placeholder_images();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    if let Some(v) = modular_screen(p, &images, opts.screen_points, &mut rng)? {
        return Ok(v);
    }

    let projected = p.circuit.projected_terms()?;
    if projected > opts.expansion_cap {
        return pit_verify(p, &images, opts);
    }
    let c_hat = p.circuit.expand(opts.expansion_cap)?;

    let at_origin = c_hat.filter_terms(|m| !m.vars().any(|v| v.is_placeholder()));
    if !at_origin.is_zero() {
        return Ok(Verdict::Fail {
            condition: Condition::ZeroAtOrigin,
            witness: diff_witness(&at_origin),
            method: Method::Expansion,
        });
    }
    if let Some(m) = class_violation(&c_hat, p.class) {
        return Ok(Verdict::Fail {
            condition: Condition::Class(p.class),
            witness: Witness::Monomial { monomial: m.to_string(), coefficient: c_hat.coeff(m).to_string() },
            method: Method::Expansion,
        });
    }

    let composed_terms = composition_terms(&c_hat, &images);
    if composed_terms > opts.expansion_cap {
        return pit_condition_two(p, &images, opts);
    }
    let lhs = c_hat.compose(&images);
    let d = &lhs - &p.target;
    if !d.is_zero() {
        return Ok(Verdict::Fail { condition: Condition::Refutes, witness: diff_witness(&d), method: Method::Expansion });
    }
    Ok(Verdict::Pass { method: Method::Expansion })
}

/// Term-count bound for substituting the placeholders into `c_hat`.
fn composition_terms(c_hat: &Polynomial, images: &BTreeMap<VarId, Polynomial>) -> u128 {
    c_hat
        .monomials()
        .map(|m| {
            m.factors().iter().fold(1u128, |acc, &(v, e)| match images.get(&v) {
                Some(f) => acc.saturating_mul((f.len() as u128).saturating_pow(e)),
                None => acc,
            })
        })
        .fold(0u128, u128::saturating_add)
}

fn proof_inputs(p: &IpsProof) -> Vec<VarId> {
    let mut vars: BTreeSet<VarId> = p.variables.iter().copied().collect();
    vars.extend(p.circuit.variables().into_iter().filter(|v| !v.is_placeholder()));
    for a in &p.axioms {
        vars.extend(a.vars());
    }
    vars.extend(p.target.vars());
    vars.into_iter().collect()
}

/// Evaluates both conditions at random points modulo [`SCREEN_PRIME`].
///
/// A nonzero residue proves the identity false over the rationals, so a
/// mismatch is an exact failure; agreement proves nothing.
fn modular_screen(
    p: &IpsProof,
    images: &BTreeMap<VarId, Polynomial>,
    points: u32,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Verdict>, IpsError> {
    let q = SCREEN_PRIME;
    let inputs = proof_inputs(p);
    for _ in 0..points {
        let pt: BTreeMap<VarId, u64> = inputs.iter().map(|&v| (v, rng.random_range(0..q))).collect();
        let x = |v: VarId| pt.get(&v).copied();
        let witness = || Witness::Point {
            point: pt.iter().map(|(v, k)| (v.to_string(), k.to_string())).collect(),
        };
        let Some(origin) = p.circuit.evaluate_mod(q, |v| if v.is_placeholder() { Some(0) } else { x(v) })? else {
            return Ok(None);
        };
        if origin != 0 {
            return Ok(Some(Verdict::Fail { condition: Condition::ZeroAtOrigin, witness: witness(), method: Method::ModularScreen }));
        }
        let mut ph = BTreeMap::new();
        for (v, f) in images {
            match polynomial_mod(f, q, x).map_err(CircuitError::from)? {
                Some(r) => ph.insert(*v, r),
                None => return Ok(None),
            };
        }
        let lhs = p.circuit.evaluate_mod(q, |v| ph.get(&v).copied().or_else(|| x(v)))?;
        let rhs = polynomial_mod(&p.target, q, x).map_err(CircuitError::from)?;
        match (lhs, rhs) {
            (Some(l), Some(r)) if l != r => {
                return Ok(Some(Verdict::Fail { condition: Condition::Refutes, witness: witness(), method: Method::ModularScreen }))
            }
            (Some(_), Some(_)) => {}
            _ => return Ok(None),
        }
    }
    Ok(None)
}

fn random_point(vars: &[VarId], rng: &mut ChaCha8Rng) -> Assignment {
    vars.iter().map(|&v| (v, Scalar::from(num_bigint::BigInt::from(rng.random::<u64>())))).collect()
}

fn trial_rng(seed: u64, trial: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64 + 1);
    rng
}

fn per_trial_bound(degree: u64) -> f64 {
    degree as f64 / 2f64.powi(64)
}

/// Condition 1, class and condition 2 by randomized identity testing.
fn pit_verify(p: &IpsProof, images: &BTreeMap<VarId, Polynomial>, opts: &VerifyOptions) -> Result<Verdict, IpsError> {
    let inputs = proof_inputs(p);
    let placeholders: Vec<VarId> = p.circuit.variables().into_iter().filter(|v| v.is_placeholder()).collect();
    let degree = p.circuit.formal_degree()?;
    let method = Method::Pit { trials: opts.pit_trials, per_trial_bound: per_trial_bound(degree) };
    for trial in 0..opts.pit_trials {
        let mut rng = trial_rng(opts.seed, trial);
        let mut pt = random_point(&inputs, &mut rng);
        for &v in &placeholders {
            pt.insert(v, Scalar::zero());
        }
        if !p.circuit.evaluate(&pt)?.is_zero() {
            return Ok(Verdict::Fail { condition: Condition::ZeroAtOrigin, witness: Witness::Point { point: point_json(&pt) }, method });
        }
    }
    if let Some(v) = pit_class(p, &inputs, &placeholders, opts, &method)? {
        return Ok(v);
    }
    pit_condition_two(p, images, opts)
}

/// Individual degree at most 1 in `v`: the second difference in `v` vanishes.
fn pit_class(
    p: &IpsProof,
    inputs: &[VarId],
    placeholders: &[VarId],
    opts: &VerifyOptions,
    method: &Method,
) -> Result<Option<Verdict>, IpsError> {
    let (checked, zero_booleans): (Vec<VarId>, bool) = match p.class {
        ProofClass::General => return Ok(None),
        ProofClass::Linear => (placeholders.to_vec(), false),
        ProofClass::Lips => (placeholders.iter().copied().filter(|&v| is_axiom(v)).collect(), false),
        ProofClass::Mlips => {
            let mut vs: Vec<VarId> = inputs.to_vec();
            vs.extend(placeholders.iter().copied().filter(|&v| is_axiom(v)));
            (vs, true)
        }
    };
    for (k, &v) in checked.iter().enumerate() {
        // L-IPS part of mlips keeps z free; the x/y multilinearity sets z to 0
        let zero_z = zero_booleans && !is_axiom(v);
        for trial in 0..opts.pit_trials {
            let mut rng = trial_rng(opts.seed ^ 0x5eed_c1a5, trial.wrapping_add(k as u32 * opts.pit_trials));
            let mut pt = random_point(inputs, &mut rng);
            for &u in placeholders {
                let val = if zero_z && is_boolean(u) { Scalar::zero() } else { Scalar::from(rng.random::<u64>() as i64 >> 1) };
                pt.insert(u, val);
            }
            let mut at = |t: i64| {
                pt.insert(v, Scalar::from_int(t));
                p.circuit.evaluate(&pt)
            };
            let (a, b, c) = (at(0)?, at(1)?, at(2)?);
            if !(&(&a - &(&b + &b)) + &c).is_zero() {
                pt.remove(&v);
                return Ok(Some(Verdict::Fail {
                    condition: Condition::Class(p.class),
                    witness: Witness::Variable { variable: v.to_string(), point: point_json(&pt) },
                    method: method.clone(),
                }));
            }
        }
    }
    Ok(None)
}

fn pit_condition_two(p: &IpsProof, images: &BTreeMap<VarId, Polynomial>, opts: &VerifyOptions) -> Result<Verdict, IpsError> {
    let inputs = proof_inputs(p);
    let img_deg = images.values().filter_map(|f| f.total_degree().finite()).max().unwrap_or(0).max(1) as u64;
    let degree = p.circuit.formal_degree()?.saturating_mul(img_deg).max(p.target.total_degree().finite().unwrap_or(0) as u64);
    let method = Method::Pit { trials: opts.pit_trials, per_trial_bound: per_trial_bound(degree) };
    for trial in 0..opts.pit_trials {
        let mut rng = trial_rng(opts.seed, trial);
        let pt = random_point(&inputs, &mut rng);
        let mut full = pt.clone();
        for (v, f) in images {
            full.insert(*v, f.evaluate(&pt).map_err(CircuitError::from)?);
        }
        let lhs = p.circuit.evaluate(&full)?;
        let rhs = p.target.evaluate(&pt).map_err(CircuitError::from)?;
        if lhs != rhs {
            return Ok(Verdict::Fail { condition: Condition::Refutes, witness: Witness::Point { point: point_json(&pt) }, method });
        }
    }
    Ok(Verdict::Pass { method })
}

/// Outcome of [`random_identity_test`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PitVerdict {
    pub equal: bool,
    pub trials: u32,
    pub degree: u64,
    /// `degree / 2^64`.
    pub per_trial_bound: f64,
    pub witness: Option<BTreeMap<String, String>>,
}

/// Either side of an identity test.
pub enum Side<'a> {
    Circuit(&'a Circuit),
    Polynomial(&'a Polynomial),
}

impl Side<'_> {
    fn vars(&self) -> BTreeSet<VarId> {
        match self {
            Side::Circuit(c) => c.variables(),
            Side::Polynomial(p) => p.vars(),
        }
    }

    fn degree(&self) -> Result<u64, CircuitError> {
        match self {
            Side::Circuit(c) => c.formal_degree(),
            Side::Polynomial(p) => Ok(p.total_degree().finite().unwrap_or(0) as u64),
        }
    }

    fn evaluate(&self, a: &Assignment) -> Result<Scalar, CircuitError> {
        match self {
            Side::Circuit(c) => c.evaluate(a),
            Side::Polynomial(p) => Ok(p.evaluate(a)?),
        }
    }
}

/// Compares `c` and `d` at `trials` points drawn from `{0..2^64-1}^n`.
///
/// A reported difference is always genuine; agreement may be wrong with
/// probability at most `(degree / 2^64)` per trial.
pub fn random_identity_test(c: &Circuit, d: Side<'_>, trials: u32, seed: u64) -> Result<PitVerdict, CircuitError> {
    let lhs = Side::Circuit(c);
    let vars: Vec<VarId> = lhs.vars().union(&d.vars()).copied().collect();
    let degree = lhs.degree()?.max(d.degree()?);
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        let pt = random_point(&vars, &mut rng);
        if lhs.evaluate(&pt)? != d.evaluate(&pt)? {
            return Ok(PitVerdict {
                equal: false,
                trials: trial + 1,
                degree,
                per_trial_bound: per_trial_bound(degree),
                witness: Some(point_json(&pt)),
            });
        }
    }
    Ok(PitVerdict { equal: true, trials, degree, per_trial_bound: per_trial_bound(degree), witness: None })
}

/// `g(x) = C(x,1,0)` for a single-axiom proof, after checking
/// `C(x,y,0) = g(x)·y`.
pub fn extract_g(p: &IpsProof, cap: u128) -> Result<Polynomial, IpsError> {
    if p.axioms.len() != 1 {
        return Err(IpsError::NotSingleAxiom(p.axioms.len()));
    }
    let y = VarId::AxiomPlaceholder(1);
    let c_hat = p.circuit.expand(cap)?;
    let mut g = Polynomial::zero();
    for (m, c) in c_hat.terms() {
        if m.vars().any(is_boolean) {
            continue;
        }
        if m.exponent(y) != 1 {
            return Err(IpsError::NotLinearInY(m.clone()));
        }
        g.add_term(m.split_by(|v| v != y).0, c);
    }
    Ok(g)
}

/// A multilinear L-IPS refutation `C = g·y + Σ h_i·z_i` of a polynomial
/// without Boolean roots, where `g` is its Boolean inverse and the `h_i`
/// are the quotients of `1 - g·f` by the Boolean axioms.
pub fn build_refutation(f: &Polynomial, cap: usize) -> Result<IpsProof, IpsError> {
    let inv = boolean_inverse(f, cap)?;
    let vars: BTreeSet<VarId> = inv.variables.iter().copied().collect();
    let r = &Polynomial::one() - &(&inv.g * f);
    let red = r.multilinear_reduce(&vars);
    if !red.remainder.is_zero() {
        return Err(IpsError::NonzeroRemainder);
    }
    let mut c = Circuit::new();
    let g = c.sigma_pi(&inv.g);
    let y = c.var(VarId::AxiomPlaceholder(1));
    let gy = c.prod(vec![g, y]);
    let mut out = vec![(gy, Scalar::one())];
    for (i, &v) in inv.variables.iter().enumerate() {
        let h = red.quotient(v);
        if h.is_zero() {
            continue;
        }
        let hk = c.sigma_pi(&h);
        let z = c.var(VarId::BooleanPlaceholder(i as u32 + 1));
        out.push((c.prod(vec![hk, z]), Scalar::one()));
    }
    c.sum(out);
    Ok(IpsProof {
        circuit: c,
        axioms: vec![f.clone()],
        variables: inv.variables,
        target: Polynomial::one(),
        class: ProofClass::Mlips,
    })
}

/// Positions of all sum-edge labels and constants, for mutation tests.
pub fn coefficient_sites(c: &Circuit) -> Vec<(usize, Option<usize>)> {
    use crate::circuit::Node;
    let mut out = Vec::new();
    for (k, n) in c.nodes().iter().enumerate() {
        match n {
            Node::Sum(a) => out.extend((0..a.len()).map(|e| (k, Some(e)))),
            Node::Const(_) => out.push((k, None)),
            _ => {}
        }
    }
    out
}

/// Copy of `c` with one coefficient shifted by `delta`.
pub fn mutate_coefficient(c: &Circuit, site: (usize, Option<usize>), delta: &Scalar) -> Circuit {
    let mut out = c.clone();
    out.shift_coefficient(site, delta).expect("not a coefficient site");
    out
}
