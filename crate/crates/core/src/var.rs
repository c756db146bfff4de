//! Variable identifiers and their textual names.
//!
//! | variant | name |
//! |---|---|
//! | positive `x^(i)_σ` | `x.<i>.<bits>` |
//! | negative `y^(j)_σ` | `y.<j>.<bits>` |
//! | generic `x_k` | `v.<k>` |
//! | coefficient `z_{ijkl}` | `z.<i>.<j>.<k>.<l>` |
//! | axiom placeholder `y_j` | `ya.<j>` |
//! | Boolean-axiom placeholder `z_i` | `za.<i>` |
//!
//! An empty bit string is written without the trailing dot (`x.3`).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Longest binary string that can index a variable.
pub const MAX_BITS: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid variable name {0:?}")]
pub struct ParseVarError(pub String);

/// A short binary string stored most-significant-character first.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Bits {
    len: u8,
    value: u32,
}

impl Bits {
    pub const EMPTY: Bits = Bits { len: 0, value: 0 };

    /// `value`'s low `len` bits, first character = bit `len - 1`.
    pub fn new(len: usize, value: u32) -> Self {
        assert!(len <= MAX_BITS, "bit string too long: {len}");
        let mask = if len == 32 { u32::MAX } else { (1u32 << len) - 1 };
        Bits { len: len as u8, value: value & mask }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let value = bits.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
        Bits::new(bits.len(), value)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    /// Character at offset `k` (0-based from the left).
    pub fn get(&self, k: usize) -> bool {
        debug_assert!(k < self.len());
        (self.value >> (self.len() - 1 - k)) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |k| self.get(k))
    }

    /// All strings of length `len` in increasing numeric order.
    pub fn all(len: usize) -> impl Iterator<Item = Bits> {
        assert!(len < MAX_BITS, "bit string too long: {len}");
        (0..(1u32 << len)).map(move |v| Bits::new(len, v))
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for Bits {
    type Err = ParseVarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.len() > MAX_BITS {
            return Err(ParseVarError(s.to_string()));
        }
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(ParseVarError(s.to_string())),
            }
        }
        Ok(Bits::from_bools(&bits))
    }
}

/// Identifier of a polynomial variable.
///
/// The derived order (variant first, then fields) is the fixed variable order
/// every monomial order builds on.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarId {
    /// `x^(block)_bits`, a variable of a block with `w_block >= 0`.
    Pos { block: u16, bits: Bits },
    /// `y^(block)_bits`, a variable of a block with `w_block < 0`.
    Neg { block: u16, bits: Bits },
    /// Plain indexed variable `x_k` of the generic subset-sum instance.
    Generic(u32),
    /// Coefficient variable `z_{ijkl}` of the generic instance.
    Coef([u16; 4]),
    /// IPS placeholder for the `j`-th non-Boolean axiom.
    AxiomPlaceholder(u32),
    /// IPS placeholder for the Boolean axiom of the `i`-th proof variable.
    BooleanPlaceholder(u32),
}

impl VarId {
    pub fn pos(block: usize, bits: Bits) -> Self {
        VarId::Pos { block: block as u16, bits }
    }

    pub fn neg(block: usize, bits: Bits) -> Self {
        VarId::Neg { block: block as u16, bits }
    }

    /// `x^(block)` or `y^(block)` depending on `positive`.
    pub fn signed(positive: bool, block: usize, bits: Bits) -> Self {
        if positive {
            Self::pos(block, bits)
        } else {
            Self::neg(block, bits)
        }
    }

    pub fn is_placeholder(&self) -> bool {
        matches!(self, VarId::AxiomPlaceholder(_) | VarId::BooleanPlaceholder(_))
    }

    /// Block index and bit string of a word variable.
    pub fn block(&self) -> Option<(bool, usize, Bits)> {
        match *self {
            VarId::Pos { block, bits } => Some((true, block as usize, bits)),
            VarId::Neg { block, bits } => Some((false, block as usize, bits)),
            _ => None,
        }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word_var = |f: &mut fmt::Formatter<'_>, p: &str, block: u16, bits: &Bits| {
            if bits.is_empty() {
                write!(f, "{p}.{block}")
            } else {
                write!(f, "{p}.{block}.{bits}")
            }
        };
        match self {
            VarId::Pos { block, bits } => word_var(f, "x", *block, bits),
            VarId::Neg { block, bits } => word_var(f, "y", *block, bits),
            VarId::Generic(k) => write!(f, "v.{k}"),
            VarId::Coef([i, j, k, l]) => write!(f, "z.{i}.{j}.{k}.{l}"),
            VarId::AxiomPlaceholder(j) => write!(f, "ya.{j}"),
            VarId::BooleanPlaceholder(i) => write!(f, "za.{i}"),
        }
    }
}

impl fmt::Debug for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for VarId {
    type Err = ParseVarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseVarError(s.to_string());
        let parts: Vec<&str> = s.split('.').collect();
        let num = |t: &str| t.parse::<u32>().map_err(|_| err());
        let small = |t: &str| t.parse::<u16>().map_err(|_| err());
        match parts.as_slice() {
            ["x" | "y", block] | ["x" | "y", block, _] => {
                let bits = match parts.get(2) {
                    Some(b) => b.parse::<Bits>().map_err(|_| err())?,
                    None => Bits::EMPTY,
                };
                let block = small(block)?;
                Ok(if parts[0] == "x" {
                    VarId::Pos { block, bits }
                } else {
                    VarId::Neg { block, bits }
                })
            }
            ["v", k] => Ok(VarId::Generic(num(k)?)),
            ["z", i, j, k, l] => Ok(VarId::Coef([small(i)?, small(j)?, small(k)?, small(l)?])),
            ["ya", j] => Ok(VarId::AxiomPlaceholder(num(j)?)),
            ["za", i] => Ok(VarId::BooleanPlaceholder(num(i)?)),
            _ => Err(err()),
        }
    }
}

impl Serialize for VarId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VarId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
