use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

/// Sign of a split variable: `x₊` or `x₋`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

/// The positive (`x+`) or negative (`x-`) part of a source variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SplitVar {
    pub name: String,
    pub sign: Sign,
}

impl SplitVar {
    pub fn plus(name: impl Into<String>) -> Self {
        SplitVar {
            name: name.into(),
            sign: Sign::Plus,
        }
    }

    pub fn minus(name: impl Into<String>) -> Self {
        SplitVar {
            name: name.into(),
            sign: Sign::Minus,
        }
    }

    /// `max(value, 0)` for `x+`, `max(-value, 0)` for `x-`.
    pub fn split(&self, value: f64) -> f64 {
        match self.sign {
            Sign::Plus => value.max(0.0),
            Sign::Minus => (-value).max(0.0),
        }
    }
}

impl fmt::Display for SplitVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            Sign::Plus => '+',
            Sign::Minus => '-',
        };
        write!(f, "{}{}", self.name, s)
    }
}

impl std::str::FromStr for SplitVar {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, sign) = match s.as_bytes().last() {
            Some(b'+') => (&s[..s.len() - 1], Sign::Plus),
            Some(b'-') => (&s[..s.len() - 1], Sign::Minus),
            _ => return Err(format!("split variable `{s}` must end in `+` or `-`")),
        };
        if name.is_empty() {
            return Err(format!("split variable `{s}` has an empty name"));
        }
        Ok(SplitVar {
            name: name.to_string(),
            sign,
        })
    }
}

/// A non-constant monomial: variables with positive exponents, sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial<V> {
    factors: Vec<(V, u32)>,
}

impl<V: Ord + Clone> Monomial<V> {
    pub fn var(v: V) -> Self {
        Monomial {
            factors: vec![(v, 1)],
        }
    }

    /// Builds a monomial from a list of factors with repetition.
    ///
    /// Returns `None` for the empty list: constant monomials do not exist.
    pub fn from_factors(vars: impl IntoIterator<Item = V>) -> Option<Self> {
        let mut m: BTreeMap<V, u32> = BTreeMap::new();
        for v in vars {
            *m.entry(v).or_default() += 1;
        }
        if m.is_empty() {
            None
        } else {
            Some(Monomial {
                factors: m.into_iter().collect(),
            })
        }
    }

    pub fn factors(&self) -> &[(V, u32)] {
        &self.factors
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|(_, k)| k).sum()
    }

    /// Factors with repetition, in order.
    pub fn expanded(&self) -> Vec<V> {
        self.factors
            .iter()
            .flat_map(|(v, k)| std::iter::repeat(v.clone()).take(*k as usize))
            .collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut m: BTreeMap<V, u32> = self.factors.iter().cloned().collect();
        for (v, k) in &other.factors {
            *m.entry(v.clone()).or_default() += k;
        }
        Monomial {
            factors: m.into_iter().collect(),
        }
    }

    pub fn eval(&self, value: &impl Fn(&V) -> f64) -> f64 {
        self.factors
            .iter()
            .fold(1.0, |acc, (v, k)| acc * value(v).powi(*k as i32))
    }
}

/// Sparse real polynomial without constant term.
///
/// Zero coefficients are never stored, so the zero polynomial is the empty
/// map and structural equality is equality of coefficient maps.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<V: Ord> {
    terms: BTreeMap<Monomial<V>, f64>,
}

impl<V: Ord> Default for Polynomial<V> {
    fn default() -> Self {
        Polynomial {
            terms: BTreeMap::new(),
        }
    }
}

impl<V: Ord> Eq for Polynomial<V> {}

impl<V: Ord + Hash> Hash for Polynomial<V> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for (m, c) in &self.terms {
            m.hash(state);
            c.to_bits().hash(state);
        }
    }
}

impl<V: Ord + Clone> Polynomial<V> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn var(v: V) -> Self {
        Self::monomial(Monomial::var(v), 1.0)
    }

    pub fn monomial(m: Monomial<V>, c: f64) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial<V>, f64)> {
        self.terms.iter().map(|(m, c)| (m, *c))
    }

    pub fn coeff(&self, m: &Monomial<V>) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: Monomial<V>, c: f64) {
        if c == 0.0 {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                let sum = *slot.get() + c;
                if sum == 0.0 {
                    slot.remove();
                } else {
                    *slot.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self::zero();
        for (m, k) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    /// Splits by coefficient sign: `self = pos - neg` with both halves having
    /// nonnegative coefficients.
    pub fn split_signs(&self) -> (Self, Self) {
        let mut pos = Self::zero();
        let mut neg = Self::zero();
        for (m, c) in &self.terms {
            if *c > 0.0 {
                pos.add_term(m.clone(), *c);
            } else {
                neg.add_term(m.clone(), -c);
            }
        }
        (pos, neg)
    }

    pub fn has_nonnegative_coefficients(&self) -> bool {
        self.terms.values().all(|c| *c >= 0.0)
    }

    pub fn eval(&self, value: &impl Fn(&V) -> f64) -> f64 {
        self.terms
            .iter()
            .fold(0.0, |acc, (m, c)| acc + c * m.eval(value))
    }
}
