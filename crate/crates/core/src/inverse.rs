//! Multilinear inverses over the Boolean cube.
//!
//! For `f` without Boolean roots, `boolean_inverse` returns the unique
//! multilinear `g` with `g(a) = 1/f(a)` for every `a ∈ {0,1}^n`, i.e. the
//! indicator interpolation `Σ_a f(a)^{-1} Π_i (a_i x_i + (1-a_i)(1-x_i))`.
//! The sum is expanded with the subset Möbius transform
//! `c_S = Σ_{T⊆S} (-1)^{|S∖T|} g(1_T)`, and the cube is walked in Gray-code
//! order so each point costs one incremental update of `f`.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::monomial::Monomial;
use crate::poly::{Assignment, Degree, Polynomial};
use crate::scalar::Scalar;
use crate::var::VarId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InverseError {
    #[error("polynomial vanishes at the Boolean point {}", format_point(.0))]
    BooleanRoot(Assignment),
    #[error("{vars} variables exceed the cube cap of {cap}")]
    CapExceeded { vars: usize, cap: usize },
}

fn format_point(a: &Assignment) -> String {
    let parts: Vec<String> = a.iter().map(|(v, x)| format!("{v}={x}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Walks `{0,1}^n` in reflected Gray-code order, tracking `f` exactly.
struct CubeWalk {
    coeffs: Vec<Scalar>,
    /// Terms containing each variable.
    occurs: Vec<Vec<usize>>,
    zeros: Vec<u32>,
    value: Scalar,
    mask: u64,
}

impl CubeWalk {
    /// Starts at the all-zeros point.
    fn new(f: &Polynomial, vars: &[VarId]) -> Self {
        let index: BTreeMap<VarId, usize> = vars.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let mut coeffs = Vec::with_capacity(f.len());
        let mut occurs = vec![Vec::new(); vars.len()];
        let mut zeros = Vec::with_capacity(f.len());
        let mut value = Scalar::zero();
        for (t, (m, c)) in f.terms().enumerate() {
            coeffs.push(c.clone());
            for v in m.vars() {
                occurs[index[&v]].push(t);
            }
            let z = m.factors().len() as u32;
            if z == 0 {
                value += c;
            }
            zeros.push(z);
        }
        CubeWalk { coeffs, occurs, zeros, value, mask: 0 }
    }

    fn flip(&mut self, bit: usize) {
        self.mask ^= 1 << bit;
        let on = self.mask >> bit & 1 == 1;
        for &t in &self.occurs[bit] {
            if on {
                self.zeros[t] -= 1;
                if self.zeros[t] == 0 {
                    self.value += &self.coeffs[t];
                }
            } else {
                if self.zeros[t] == 0 {
                    self.value -= &self.coeffs[t];
                }
                self.zeros[t] += 1;
            }
        }
    }

    /// Visits every point once; `visit(mask, f(mask))`.
    fn run(mut self, n: usize, mut visit: impl FnMut(u64, &Scalar) -> bool) {
        if !visit(self.mask, &self.value) {
            return;
        }
        for step in 1u64..(1u64 << n) {
            self.flip(step.trailing_zeros() as usize);
            if !visit(self.mask, &self.value) {
                return;
            }
        }
    }
}

fn point(vars: &[VarId], mask: u64) -> Assignment {
    vars.iter().enumerate().map(|(k, &v)| (v, Scalar::from_int((mask >> k & 1) as i64))).collect()
}

/// A Boolean root of `f` over its own variables, if any.
pub fn find_boolean_root(f: &Polynomial, cap: usize) -> Result<Option<Assignment>, InverseError> {
    let vars: Vec<VarId> = f.vars().into_iter().collect();
    if vars.len() > cap {
        return Err(InverseError::CapExceeded { vars: vars.len(), cap });
    }
    let mut root = None;
    CubeWalk::new(f, &vars).run(vars.len(), |mask, val| {
        if val.is_zero() {
            root = Some(mask);
            false
        } else {
            true
        }
    });
    Ok(root.map(|m| point(&vars, m)))
}

/// The multilinear inverse together with its provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InverseResult {
    pub g: Polynomial,
    pub f: Polynomial,
    pub variables: Vec<VarId>,
    pub degree: Degree,
}

/// Unique multilinear `g` with `g·f ≡ 1` on `{0,1}^vars(f)`.
pub fn boolean_inverse(f: &Polynomial, cap: usize) -> Result<InverseResult, InverseError> {
    let vars: Vec<VarId> = f.vars().into_iter().collect();
    let n = vars.len();
    if n > cap || n >= 63 {
        return Err(InverseError::CapExceeded { vars: n, cap });
    }
    let mut values: Vec<Scalar> = vec![Scalar::zero(); 1 << n];
    let mut root = None;
    CubeWalk::new(f, &vars).run(n, |mask, val| match val.recip() {
        Some(r) => {
            values[mask as usize] = r;
            true
        }
        None => {
            root = Some(mask);
            false
        }
    });
    if let Some(mask) = root {
        return Err(InverseError::BooleanRoot(point(&vars, mask)));
    }
    let coeffs = mobius(values, n);
    let g = Polynomial::from_terms(coeffs.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(mask, c)| {
        let m = Monomial::from_sorted_unchecked(
            (0..n).filter(|k| mask >> k & 1 == 1).map(|k| (vars[k], 1)).collect(),
        );
        (m, c)
    }));
    let degree = g.total_degree();
    Ok(InverseResult { g, f: f.clone(), variables: vars, degree })
}

/// In-place subset Möbius transform over a common denominator.
fn mobius(values: Vec<Scalar>, n: usize) -> Vec<Scalar> {
    let mut den = BigInt::one();
    for v in &values {
        let d = v.denom();
        if !d.is_one() && !(&den % &d).is_zero() {
            den = den.lcm(&d);
        }
    }
    let scaled: Vec<BigInt> = values.iter().map(|v| v.numer() * (&den / v.denom())).collect();
    let max_abs = scaled.iter().map(|x| x.abs()).max().unwrap_or_default();
    // partial sums stay below 2^n * max_abs
    let fits_i128 = (max_abs << n).to_i128().is_some() && den.to_i128().is_some();
    if fits_i128 {
        let mut a: Vec<i128> = scaled.iter().map(|x| x.to_i128().unwrap()).collect();
        for bit in 0..n {
            let step = 1usize << bit;
            for block in a.chunks_mut(step << 1) {
                let (lo, hi) = block.split_at_mut(step);
                for (h, l) in hi.iter_mut().zip(lo.iter()) {
                    *h -= *l;
                }
            }
        }
        let den = den.to_i128().unwrap();
        a.into_iter().map(|x| Scalar::from(num_rational::BigRational::new(x.into(), den.into()))).collect()
    } else {
        let mut a = scaled;
        for bit in 0..n {
            let step = 1usize << bit;
            for block in a.chunks_mut(step << 1) {
                let (lo, hi) = block.split_at_mut(step);
                for (h, l) in hi.iter_mut().zip(lo.iter()) {
                    *h -= l;
                }
            }
        }
        a.into_iter().map(|x| Scalar::from(num_rational::BigRational::new(x, den.clone()))).collect()
    }
}

/// Whether `g` is multilinear and `g·f ≡ 1` modulo the Boolean axioms.
pub fn verify_inverse(g: &Polynomial, f: &Polynomial) -> bool {
    if !g.is_multilinear() {
        return false;
    }
    let vars: BTreeSet<VarId> = g.vars().union(&f.vars()).copied().collect();
    (g * f).multilinear_reduce(&vars).remainder == Polynomial::one()
}

/// `Σ_{i=1}^n x_i - β` over generic variables `v.1 … v.n`.
pub fn subset_sum(n: u32, beta: &Scalar) -> Polynomial {
    let mut p = Polynomial::constant(-beta);
    for i in 1..=n {
        p.add_term(Monomial::var(VarId::Generic(i)), &Scalar::one());
    }
    p
}
