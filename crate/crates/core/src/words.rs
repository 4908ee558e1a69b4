//! Free words over named generators and their evaluation on points.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geomaps::{MapError, MapExpr};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WordError {
    #[error("generator {0:?} is not bound in the assignment")]
    Unbound(String),
    #[error("letter exponent must be +1 or -1, got {0}")]
    BadExponent(i64),
    #[error("assignment mixes dimensions {0} and {1}")]
    MixedDimension(usize, usize),
    #[error("powers must be strictly increasing ({prev} then {next})")]
    NotIncreasing { prev: u64, next: u64 },
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawLetter", into = "RawLetter")]
pub struct Letter {
    gen: String,
    inverse: bool,
}

#[derive(Serialize, Deserialize)]
struct RawLetter {
    gen: String,
    exp: i64,
}

impl TryFrom<RawLetter> for Letter {
    type Error = WordError;
    fn try_from(r: RawLetter) -> Result<Self, WordError> {
        match r.exp {
            1 => Ok(Letter::new(r.gen)),
            -1 => Ok(Letter::new(r.gen).inv()),
            e => Err(WordError::BadExponent(e)),
        }
    }
}

impl From<Letter> for RawLetter {
    fn from(l: Letter) -> Self {
        RawLetter {
            exp: l.exp(),
            gen: l.gen,
        }
    }
}

impl Letter {
    pub fn new(gen: impl Into<String>) -> Self {
        Letter {
            gen: gen.into(),
            inverse: false,
        }
    }

    pub fn gen(&self) -> &str {
        &self.gen
    }

    pub fn exp(&self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn inv(mut self) -> Self {
        self.inverse = !self.inverse;
        self
    }

    fn cancels(&self, other: &Letter) -> bool {
        self.gen == other.gen && self.inverse != other.inverse
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "{}^-1", self.gen)
        } else {
            f.write_str(&self.gen)
        }
    }
}

/// A word `s_1^{e_1} ⋯ s_k^{e_k}`, acting right to left.
///
/// Words are not reduced automatically so the letter count of a spelled-out
/// identity can be audited; [`Word::reduce`] gives the freely reduced form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word { letters }
    }

    pub fn gen(name: impl Into<String>) -> Self {
        Word {
            letters: vec![Letter::new(name)],
        }
    }

    /// `name^k` spelled out letter by letter.
    pub fn gen_pow(name: &str, k: i64) -> Self {
        let l = if k < 0 {
            Letter::new(name).inv()
        } else {
            Letter::new(name)
        };
        Word {
            letters: vec![l; k.unsigned_abs() as usize],
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.clone().inv()).collect(),
        }
    }

    /// Concatenation `self · other` (other acts first).
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    pub fn product(words: &[&Word]) -> Word {
        Word {
            letters: words.iter().flat_map(|w| w.letters.iter().cloned()).collect(),
        }
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut letters = Vec::with_capacity(base.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            letters.extend_from_slice(&base.letters);
        }
        Word { letters }
    }

    /// Free reduction by a single stack pass.
    pub fn reduce(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for l in &self.letters {
            if out.last().is_some_and(|top| top.cancels(l)) {
                out.pop();
            } else {
                out.push(l.clone());
            }
        }
        Word { letters: out }
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|w| !w[0].cancels(&w[1]))
    }

    /// Prefixes every generator name with `ns.`.
    pub fn namespaced(&self, ns: &str) -> Word {
        Word {
            letters: self
                .letters
                .iter()
                .map(|l| Letter {
                    gen: format!("{ns}.{}", l.gen),
                    inverse: l.inverse,
                })
                .collect(),
        }
    }

    pub fn generators(&self) -> Vec<&str> {
        let mut g: Vec<&str> = self.letters.iter().map(|l| l.gen.as_str()).collect();
        g.sort_unstable();
        g.dedup();
        g
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// `reduce(u v u⁻¹ v⁻¹)`.
pub fn commutator(u: &Word, v: &Word) -> Word {
    commutator_unreduced(u, v).reduce()
}

pub fn commutator_unreduced(u: &Word, v: &Word) -> Word {
    Word::product(&[u, v, &u.inverse(), &v.inverse()])
}

/// Generator names bound to maps of a common dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    dim: usize,
    maps: BTreeMap<String, MapExpr>,
}

impl Assignment {
    pub fn new(dim: usize) -> Self {
        Assignment {
            dim,
            maps: BTreeMap::new(),
        }
    }

    pub fn bind(&mut self, name: impl Into<String>, m: MapExpr) -> Result<(), WordError> {
        if m.dim() != self.dim {
            return Err(WordError::MixedDimension(self.dim, m.dim()));
        }
        self.maps.insert(name.into(), m);
        Ok(())
    }

    pub fn with(mut self, name: impl Into<String>, m: MapExpr) -> Result<Self, WordError> {
        self.bind(name, m)?;
        Ok(self)
    }

    /// Adds all bindings of `other` under the prefix `ns.`.
    pub fn merge_namespaced(&mut self, ns: &str, other: &Assignment) -> Result<(), WordError> {
        for (k, m) in &other.maps {
            self.bind(format!("{ns}.{k}"), m.clone())?;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, name: &str) -> Result<&MapExpr, WordError> {
        self.maps.get(name).ok_or_else(|| WordError::Unbound(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.maps.keys().map(|s| s.as_str())
    }

    pub fn check_bound(&self, w: &Word) -> Result<(), WordError> {
        for g in w.generators() {
            self.get(g)?;
        }
        Ok(())
    }

    /// Evaluates `w` at `x`, rightmost letter first.
    pub fn evaluate<S: Scalar>(&self, w: &Word, x: &[S]) -> Result<Vec<S>, WordError> {
        let mut y = x.to_vec();
        for l in w.letters.iter().rev() {
            let m = self.get(&l.gen)?;
            y = if l.inverse { m.apply_inverse(&y)? } else { m.apply(&y)? };
        }
        Ok(y)
    }
}

pub fn evaluate_word<S: Scalar>(w: &Word, asg: &Assignment, x: &[S]) -> Result<Vec<S>, WordError> {
    asg.evaluate(w, x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub p: u64,
    pub len: usize,
    pub ratio: f64,
}

/// Rows `(p, |w|, |w|/p)`; each ratio bounds `l_S(g^p)/p` from above.
pub fn length_ratio_table(rows: &[(u64, Word)]) -> Result<Vec<RatioRow>, WordError> {
    for w in rows.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(WordError::NotIncreasing {
                prev: w[0].0,
                next: w[1].0,
            });
        }
    }
    Ok(rows
        .iter()
        .map(|(p, w)| {
            let len = w.reduce().len();
            RatioRow {
                p: *p,
                len,
                ratio: if *p == 0 { 0.0 } else { len as f64 / *p as f64 },
            }
        })
        .collect())
}
