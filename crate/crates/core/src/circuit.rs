//! Algebraic circuits: DAGs of inputs, labelled sums and products.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::monomial::Monomial;
use crate::poly::{Assignment, PolyError, Polynomial};
use crate::scalar::Scalar;
use crate::var::VarId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CircuitError {
    #[error("circuit contains a cycle through node {0}")]
    Cycle(usize),
    #[error("node {node} refers to missing node {arg}")]
    DanglingArg { node: usize, arg: usize },
    #[error("output node {0} does not exist")]
    BadOutput(usize),
    #[error("duplicate node id {0}")]
    DuplicateId(u64),
    #[error("expansion would produce about {projected} terms (cap {cap})")]
    CapExceeded { projected: u128, cap: u128 },
    #[error(transparent)]
    Eval(#[from] PolyError),
    #[error("invalid circuit: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Var(VarId),
    Const(Scalar),
    /// `Σ label·arg`.
    Sum(Vec<(usize, Scalar)>),
    /// `Π arg`; repeated arguments give powers.
    Prod(Vec<usize>),
}

impl Node {
    pub fn args(&self) -> Vec<usize> {
        match self {
            Node::Var(_) | Node::Const(_) => Vec::new(),
            Node::Sum(a) => a.iter().map(|&(k, _)| k).collect(),
            Node::Prod(a) => a.clone(),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Node::Var(_) | Node::Const(_) => 0,
            Node::Sum(a) => a.len(),
            Node::Prod(a) => a.len(),
        }
    }

    /// The `k`-th argument.
    pub fn arg(&self, k: usize) -> usize {
        match self {
            Node::Var(_) | Node::Const(_) => panic!("input nodes have no arguments"),
            Node::Sum(a) => a[k].0,
            Node::Prod(a) => a[k],
        }
    }
}

/// Size, depth and product-depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Measures {
    pub size: usize,
    pub depth: usize,
    pub product_depth: usize,
}

/// A single-output circuit with unbounded fan-in.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Circuit {
    nodes: Vec<Node>,
    output: usize,
    var_nodes: HashMap<VarId, usize>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    /// Takes nodes as given; the output defaults to the last node.
    pub fn from_nodes(nodes: Vec<Node>, output: usize) -> Result<Self, CircuitError> {
        if output >= nodes.len() {
            return Err(CircuitError::BadOutput(output));
        }
        for (k, n) in nodes.iter().enumerate() {
            if let Some(&arg) = n.args().iter().find(|&&a| a >= nodes.len()) {
                return Err(CircuitError::DanglingArg { node: k, arg });
            }
        }
        let var_nodes = nodes
            .iter()
            .enumerate()
            .filter_map(|(k, n)| match n {
                Node::Var(v) => Some((*v, k)),
                _ => None,
            })
            .collect();
        Ok(Circuit { nodes, output, var_nodes })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn output(&self) -> usize {
        self.output
    }

    pub fn set_output(&mut self, k: usize) {
        assert!(k < self.nodes.len());
        self.output = k;
    }

    fn push(&mut self, n: Node) -> usize {
        self.nodes.push(n);
        self.output = self.nodes.len() - 1;
        self.output
    }

    /// Input node for `v`, shared between uses.
    pub fn var(&mut self, v: VarId) -> usize {
        if let Some(&k) = self.var_nodes.get(&v) {
            return k;
        }
        let k = self.push(Node::Var(v));
        self.var_nodes.insert(v, k);
        k
    }

    pub fn constant(&mut self, c: Scalar) -> usize {
        self.push(Node::Const(c))
    }

    pub fn sum(&mut self, args: Vec<(usize, Scalar)>) -> usize {
        self.push(Node::Sum(args))
    }

    pub fn prod(&mut self, args: Vec<usize>) -> usize {
        self.push(Node::Prod(args))
    }

    /// Depth-2 ΣΠ block computing `p`; returns its sum node.
    pub fn sigma_pi(&mut self, p: &Polynomial) -> usize {
        let mut one = None;
        let mut args = Vec::with_capacity(p.len());
        for (m, c) in p.terms() {
            let k = if m.is_one() {
                *one.get_or_insert_with(|| self.constant(Scalar::one()))
            } else {
                let factors: Vec<usize> = m
                    .factors()
                    .iter()
                    .flat_map(|&(v, e)| std::iter::repeat(v).take(e as usize))
                    .collect::<Vec<_>>()
                    .into_iter()
                    .map(|v| self.var(v))
                    .collect();
                self.prod(factors)
            };
            args.push((k, c.clone()));
        }
        self.sum(args)
    }

    /// A ΣΠ circuit for `p`.
    pub fn from_polynomial(p: &Polynomial) -> Self {
        let mut c = Circuit::new();
        c.sigma_pi(p);
        c
    }

    pub fn variables(&self) -> BTreeSet<VarId> {
        self.var_nodes.keys().copied().collect()
    }

    /// Nodes in an order where arguments come first, or the node on a cycle.
    pub fn topological_order(&self) -> Result<Vec<usize>, CircuitError> {
        // circuits built gate by gate are already in order
        if self.nodes.iter().enumerate().all(|(k, n)| (0..n.arity()).all(|j| n.arg(j) < k)) {
            return Ok((0..self.nodes.len()).collect());
        }
        // 0 = unseen, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.nodes.len()];
        let mut order = Vec::with_capacity(self.nodes.len());
        for root in 0..self.nodes.len() {
            if state[root] != 0 {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            state[root] = 1;
            while let Some(&mut (k, ref mut next)) = stack.last_mut() {
                let node = &self.nodes[k];
                if *next < node.arity() {
                    let a = node.arg(*next);
                    *next += 1;
                    match state[a] {
                        0 => {
                            state[a] = 1;
                            stack.push((a, 0));
                        }
                        1 => return Err(CircuitError::Cycle(a)),
                        _ => {}
                    }
                } else {
                    state[k] = 2;
                    order.push(k);
                    stack.pop();
                }
            }
        }
        Ok(order)
    }

    /// Nodes the output depends on, arguments first.
    fn reachable_order(&self) -> Result<Vec<usize>, CircuitError> {
        let order = self.topological_order()?;
        let mut live = vec![false; self.nodes.len()];
        live[self.output] = true;
        for &k in order.iter().rev() {
            if live[k] {
                let n = &self.nodes[k];
                for j in 0..n.arity() {
                    live[n.arg(j)] = true;
                }
            }
        }
        Ok(order.into_iter().filter(|&k| live[k]).collect())
    }

    /// Adds `delta` to a sum-edge label (`Some(edge)`) or a constant (`None`).
    pub fn shift_coefficient(&mut self, site: (usize, Option<usize>), delta: &Scalar) -> Result<(), CircuitError> {
        match (self.nodes.get_mut(site.0), site.1) {
            (Some(Node::Sum(a)), Some(e)) if e < a.len() => a[e].1 += delta,
            (Some(Node::Const(x)), None) => *x += delta,
            _ => return Err(CircuitError::Invalid(format!("no coefficient at {site:?}"))),
        }
        Ok(())
    }

    pub fn measures(&self) -> Result<Measures, CircuitError> {
        let order = self.topological_order()?;
        let mut depth = vec![0usize; self.nodes.len()];
        let mut pdepth = vec![0usize; self.nodes.len()];
        for &k in &order {
            let n = &self.nodes[k];
            if n.arity() > 0 {
                depth[k] = 1 + (0..n.arity()).map(|j| depth[n.arg(j)]).max().unwrap_or(0);
                pdepth[k] = (0..n.arity()).map(|j| pdepth[n.arg(j)]).max().unwrap_or(0) + matches!(n, Node::Prod(_)) as usize;
            }
        }
        Ok(Measures {
            size: self.nodes.len(),
            depth: depth.into_iter().max().unwrap_or(0),
            product_depth: pdepth.into_iter().max().unwrap_or(0),
        })
    }

    /// Upper bound on the degree of the output polynomial.
    pub fn formal_degree(&self) -> Result<u64, CircuitError> {
        let order = self.reachable_order()?;
        let mut deg = vec![0u64; self.nodes.len()];
        for k in order {
            deg[k] = match &self.nodes[k] {
                Node::Var(_) => 1,
                Node::Const(_) => 0,
                Node::Sum(a) => a.iter().map(|&(x, _)| deg[x]).max().unwrap_or(0),
                Node::Prod(a) => a.iter().map(|&x| deg[x]).fold(0u64, u64::saturating_add),
            };
        }
        Ok(deg[self.output])
    }

    /// Term-count bound for expansion: sums add, products multiply.
    pub fn projected_terms(&self) -> Result<u128, CircuitError> {
        let order = self.reachable_order()?;
        let mut t = vec![0u128; self.nodes.len()];
        for k in order {
            t[k] = match &self.nodes[k] {
                Node::Var(_) | Node::Const(_) => 1,
                Node::Sum(a) => a.iter().map(|&(x, _)| t[x]).fold(0u128, u128::saturating_add),
                Node::Prod(a) => a.iter().map(|&x| t[x]).fold(1u128, u128::saturating_mul),
            };
        }
        Ok(t[self.output])
    }

    /// The polynomial computed at the output.
    pub fn expand(&self, cap: u128) -> Result<Polynomial, CircuitError> {
        let projected = self.projected_terms()?;
        if projected > cap {
            return Err(CircuitError::CapExceeded { projected, cap });
        }
        let order = self.reachable_order()?;
        let mut uses = vec![0usize; self.nodes.len()];
        for &k in &order {
            for a in self.nodes[k].args() {
                uses[a] += 1;
            }
        }
        let mut val: Vec<Option<Polynomial>> = vec![None; self.nodes.len()];
        for k in order {
            let p = match &self.nodes[k] {
                Node::Var(v) => Polynomial::var(*v),
                Node::Const(c) => Polynomial::constant(c.clone()),
                Node::Sum(a) => {
                    let mut terms = Vec::new();
                    for (x, l) in a {
                        let px = val[*x].as_ref().expect("argument evaluated");
                        terms.extend(px.terms().map(|(m, c)| (m.clone(), c * l)));
                    }
                    Polynomial::from_terms(terms)
                }
                Node::Prod(a) => {
                    // single-term factors are folded in directly
                    let mut coeff = Scalar::one();
                    let mut mono = Monomial::one();
                    let mut acc: Option<Polynomial> = None;
                    for x in a {
                        let px = val[*x].as_ref().expect("argument evaluated");
                        if px.len() == 1 {
                            let (m, c) = px.terms().next().unwrap();
                            mono = mono.mul(m);
                            coeff *= c;
                        } else if px.is_zero() {
                            coeff = Scalar::zero();
                        } else {
                            acc = Some(match acc {
                                None => px.clone(),
                                Some(q) => &q * px,
                            });
                        }
                    }
                    acc.unwrap_or_else(Polynomial::one).mul_term(&mono, &coeff)
                }
            };
            for a in self.nodes[k].args() {
                uses[a] -= 1;
                if uses[a] == 0 && a != self.output {
                    val[a] = None;
                }
            }
            val[k] = Some(p);
        }
        Ok(val[self.output].take().expect("output evaluated"))
    }

    /// Exact value at a point assigning every input variable.
    pub fn evaluate(&self, a: &Assignment) -> Result<Scalar, CircuitError> {
        self.evaluate_with(|v| a.get(&v).cloned())
    }

    pub fn evaluate_with(&self, mut value: impl FnMut(VarId) -> Option<Scalar>) -> Result<Scalar, CircuitError> {
        let order = self.reachable_order()?;
        let mut val: Vec<Scalar> = vec![Scalar::zero(); self.nodes.len()];
        for k in order {
            val[k] = match &self.nodes[k] {
                Node::Var(v) => value(*v).ok_or(PolyError::MissingAssignment(*v))?,
                Node::Const(c) => c.clone(),
                Node::Sum(a) => {
                    let mut s = Scalar::zero();
                    for (x, l) in a {
                        s += &(&val[*x] * l);
                    }
                    s
                }
                Node::Prod(a) => {
                    let mut p = Scalar::one();
                    for x in a {
                        if p.is_zero() {
                            break;
                        }
                        p *= &val[*x];
                    }
                    p
                }
            };
        }
        Ok(val[self.output].clone())
    }

    /// Value modulo the prime `p`, or `None` when a label's denominator
    /// vanishes mod `p`.
    pub fn evaluate_mod(&self, p: u64, mut value: impl FnMut(VarId) -> Option<u64>) -> Result<Option<u64>, CircuitError> {
        let order = self.reachable_order()?;
        let mut val = vec![0u64; self.nodes.len()];
        let mut inverses = rustc_hash::FxHashMap::default();
        for k in order {
            val[k] = match &self.nodes[k] {
                Node::Var(v) => value(*v).ok_or(PolyError::MissingAssignment(*v))? % p,
                Node::Const(c) => match scalar_mod_cached(c, p, &mut inverses) {
                    Some(x) => x,
                    None => return Ok(None),
                },
                Node::Sum(a) => {
                    let mut s = 0u64;
                    for (x, l) in a {
                        let Some(l) = scalar_mod_cached(l, p, &mut inverses) else { return Ok(None) };
                        s = add_mod(s, mul_mod(val[*x], l, p), p);
                    }
                    s
                }
                Node::Prod(a) => a.iter().fold(1u64, |acc, x| mul_mod(acc, val[*x], p)),
            };
        }
        Ok(Some(val[self.output]))
    }
}

const MERSENNE_61: u64 = (1 << 61) - 1;

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    let x = a as u128 * b as u128;
    if p == MERSENNE_61 {
        // x = hi·2^61 + lo and 2^61 ≡ 1
        let m = MERSENNE_61 as u128;
        let r = (x & m) + (x >> 61);
        let r = ((r & m) + (r >> 61)) as u64;
        return if r >= MERSENNE_61 { r - MERSENNE_61 } else { r };
    }
    (x % p as u128) as u64
}

#[inline]
pub(crate) fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    let (a, b) = (a % p, b % p);
    let (s, carry) = a.overflowing_add(b);
    if carry || s >= p {
        s.wrapping_sub(p)
    } else {
        s
    }
}

pub(crate) fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

/// `c mod p` for prime `p`, `None` if the denominator is divisible by `p`.
pub fn scalar_mod(c: &Scalar, p: u64) -> Option<u64> {
    scalar_mod_cached(c, p, &mut rustc_hash::FxHashMap::default())
}

/// [`scalar_mod`] remembering the inverse of each small denominator.
fn scalar_mod_cached(c: &Scalar, p: u64, inverses: &mut rustc_hash::FxHashMap<u64, u64>) -> Option<u64> {
    if let Some((n, d)) = c.as_small() {
        let num = (n as i128).rem_euclid(p as i128) as u64;
        if d == 1 {
            return Some(num);
        }
        let dr = d % p;
        if dr == 0 {
            return None;
        }
        let inv = *inverses.entry(dr).or_insert_with(|| pow_mod(dr, p - 2, p));
        return Some(mul_mod(num, inv, p));
    }
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    let pb = BigInt::from(p);
    let reduce = |x: BigInt| {
        let r = x % &pb;
        let r = if r < BigInt::from(0) { r + &pb } else { r };
        r.to_u64().expect("residue fits")
    };
    let num = reduce(c.numer());
    let den = reduce(c.denom());
    if den == 0 {
        return None;
    }
    Some(mul_mod(num, pow_mod(den, p - 2, p), p))
}

/// Polynomial value modulo `p`, `None` on a vanishing denominator.
pub fn polynomial_mod(f: &Polynomial, p: u64, value: impl Fn(VarId) -> Option<u64>) -> Result<Option<u64>, PolyError> {
    let mut total = 0u64;
    for (m, c) in f.terms() {
        let Some(mut t) = scalar_mod(c, p) else { return Ok(None) };
        for &(v, e) in m.factors() {
            let x = value(v).ok_or(PolyError::MissingAssignment(v))?;
            t = mul_mod(t, pow_mod(x, e as u64, p), p);
        }
        total = add_mod(total, t, p);
    }
    Ok(Some(total))
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum NodeJson {
    Var { id: u64, name: VarId },
    Const { id: u64, value: String },
    Sum { id: u64, args: Vec<(u64, String)> },
    Prod { id: u64, args: Vec<u64> },
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    nodes: Vec<NodeJson>,
    output: u64,
}

impl Serialize for Circuit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(k, n)| {
                let id = k as u64;
                match n {
                    Node::Var(v) => NodeJson::Var { id, name: *v },
                    Node::Const(c) => NodeJson::Const { id, value: c.to_fraction_string() },
                    Node::Sum(a) => NodeJson::Sum {
                        id,
                        args: a.iter().map(|(x, l)| (*x as u64, l.to_fraction_string())).collect(),
                    },
                    Node::Prod(a) => NodeJson::Prod { id, args: a.iter().map(|&x| x as u64).collect() },
                }
            })
            .collect();
        CircuitJson { nodes, output: self.output as u64 }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = CircuitJson::deserialize(d)?;
        let mut index: BTreeMap<u64, usize> = BTreeMap::new();
        for (k, n) in raw.nodes.iter().enumerate() {
            let id = match n {
                NodeJson::Var { id, .. } | NodeJson::Const { id, .. } | NodeJson::Sum { id, .. } | NodeJson::Prod { id, .. } => *id,
            };
            if index.insert(id, k).is_some() {
                return Err(D::Error::custom(CircuitError::DuplicateId(id)));
            }
        }
        let look = |id: u64| index.get(&id).copied().ok_or_else(|| D::Error::custom(format!("unknown node id {id}")));
        let scalar = |s: &str| s.parse::<Scalar>().map_err(D::Error::custom);
        let mut nodes = Vec::with_capacity(raw.nodes.len());
        for n in &raw.nodes {
            nodes.push(match n {
                NodeJson::Var { name, .. } => Node::Var(*name),
                NodeJson::Const { value, .. } => Node::Const(scalar(value)?),
                NodeJson::Sum { args, .. } => {
                    Node::Sum(args.iter().map(|(x, l)| Ok((look(*x)?, scalar(l)?))).collect::<Result<_, D::Error>>()?)
                }
                NodeJson::Prod { args, .. } => Node::Prod(args.iter().map(|&x| look(x)).collect::<Result<_, _>>()?),
            });
        }
        Circuit::from_nodes(nodes, look(raw.output)?).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modular_helpers_match_u128() {
        let p = MERSENNE_61;
        for (a, b) in [(0, 0), (1, p - 1), (p - 1, p - 1), (u64::MAX, u64::MAX), (12345678901234567, 98765432109876543)] {
            let expected = ((a as u128 * b as u128) % p as u128) as u64;
            assert_eq!(mul_mod(a, b, p), expected);
            assert_eq!(add_mod(a, b, p), ((a as u128 + b as u128) % p as u128) as u64);
            assert_eq!(mul_mod(a, b, 1_000_000_007), ((a as u128 * b as u128) % 1_000_000_007) as u64);
        }
        assert_eq!(add_mod(u64::MAX - 1, u64::MAX - 1, u64::MAX), u64::MAX - 2);
    }

    fn x(k: u32) -> VarId {
        VarId::Generic(k)
    }

    #[test]
    fn measures_of_small_circuits() {
        let mut c = Circuit::new();
        c.var(x(1));
        assert_eq!(c.measures().unwrap(), Measures { size: 1, depth: 0, product_depth: 0 });
        let a = c.var(x(2));
        c.sum(vec![(0, Scalar::one()), (a, Scalar::one())]);
        assert_eq!(c.measures().unwrap(), Measures { size: 3, depth: 1, product_depth: 0 });

        let p = &(&Polynomial::var(x(1)) * &Polynomial::var(x(2))) + &(&Polynomial::var(x(3)) * &Polynomial::var(x(4)));
        let c = Circuit::from_polynomial(&p);
        assert_eq!(c.measures().unwrap().product_depth, 1);
        assert_eq!(c.expand(1000).unwrap(), p);
    }

    #[test]
    fn cycles_are_detected() {
        let c = Circuit::from_nodes(vec![Node::Var(x(1)), Node::Prod(vec![0, 2]), Node::Sum(vec![(1, Scalar::one())])], 2)
            .unwrap();
        assert!(matches!(c.measures(), Err(CircuitError::Cycle(_))));
        assert!(c.expand(100).is_err());
    }

    #[test]
    fn expansion() {
        let mut c = Circuit::new();
        let v = c.var(x(1));
        let one = c.constant(Scalar::one());
        let plus = c.sum(vec![(v, Scalar::one()), (one, Scalar::one())]);
        let minus = c.sum(vec![(v, Scalar::one()), (one, -Scalar::one())]);
        c.prod(vec![plus, minus]);
        let expected = &Polynomial::from_terms([(Monomial::pow(x(1), 2), Scalar::one())]) - &Polynomial::one();
        assert_eq!(c.expand(100).unwrap(), expected);
        assert_eq!(c.formal_degree().unwrap(), 2);
        assert!(matches!(c.expand(3), Err(CircuitError::CapExceeded { projected: 4, cap: 3 })));

        let mut c = Circuit::new();
        let v = c.var(x(1));
        c.sum(vec![(v, Scalar::one()), (v, -Scalar::one())]);
        assert!(c.expand(100).unwrap().is_zero());
    }

    #[test]
    fn evaluation_matches_expansion() {
        let p = Polynomial::from_terms([
            (Monomial::from_factors([(x(1), 2), (x(2), 1)]), Scalar::new(3, 2)),
            (Monomial::var(x(3)), Scalar::from_int(-4)),
            (Monomial::one(), Scalar::new(1, 7)),
        ]);
        let c = Circuit::from_polynomial(&p);
        let a: Assignment = [(x(1), 3), (x(2), -2), (x(3), 5)].into_iter().map(|(v, k)| (v, Scalar::from_int(k))).collect();
        assert_eq!(c.evaluate(&a).unwrap(), p.evaluate(&a).unwrap());
        let q = (1u64 << 61) - 1;
        let pt = |v: VarId| match v {
            VarId::Generic(k) => Some(k as u64 * 11),
            _ => None,
        };
        assert_eq!(c.evaluate_mod(q, pt).unwrap(), polynomial_mod(&p, q, pt).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"nodes":[{"id":0,"op":"var","name":"x.1"},{"id":3,"op":"const","value":"2/1"},
            {"id":7,"op":"sum","args":[[0,"1/1"],[3,"-2/1"]]},{"id":8,"op":"var","name":"y.2.0"},
            {"id":9,"op":"prod","args":[7,8]}],"output":9}"#;
        let c: Circuit = serde_json::from_str(text).unwrap();
        let p = c.expand(100).unwrap();
        assert_eq!(p.to_string(), "x.1*y.2.0 - 4*y.2.0");
        let back: Circuit = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back.expand(100).unwrap(), p);
        assert!(serde_json::from_str::<Circuit>(r#"{"nodes":[{"id":0,"op":"prod","args":[4]}],"output":0}"#).is_err());
    }

    #[test]
    fn modular_labels() {
        let q = 7;
        assert_eq!(scalar_mod(&Scalar::new(1, 2), q), Some(4));
        assert_eq!(scalar_mod(&Scalar::from_int(-1), q), Some(6));
        assert_eq!(scalar_mod(&Scalar::new(1, 14), q), None);
    }
}
