//! Normal forms `⋁ pᵢ − ⋁ qⱼ` with constant-free polynomials `pᵢ, qⱼ` in the
//! split variables `x+`, `x-`.
//!
//! The construction is the closure argument for `Lat(ℝ[s₊, s₋])` under
//! products in a d-algebra, run as an algorithm:
//!
//! * polynomial × normal form: split `p = p_p − p_n` by coefficient sign and
//!   distribute the nonnegative halves over the joins;
//! * single join × normal form: rewrite `⋁ wₖ = w − w₁ₙ` with
//!   `w = w₁ₚ ∨ ⋁ₖ₌₂ (wₖ + w₁ₙ) ≥ 0`, distribute `w`, subtract `w₁ₙ·y`;
//! * general product: `(⋁w − ⋁z)·y = (⋁w)·y − (⋁z)·y`.
//!
//! Join lists are deduplicated (first occurrence kept). Output size grows
//! exponentially with the number of nested products; a term budget aborts the
//! construction instead of truncating it.

use std::collections::HashSet;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::polynomial::{Monomial, Polynomial, SplitVar};
use crate::expr::{Assignment, EvalError, Expr};

/// Default cap on the total number of polynomial terms in a normal form.
pub const DEFAULT_TERM_BUDGET: usize = 1_000_000;

pub type SplitPolynomial = Polynomial<SplitVar>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewriteError {
    #[error("normal form exceeds the term budget ({needed} > {budget})")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("normal form has an empty join list")]
    EmptyJoin,
    #[error("malformed split variable: {0}")]
    BadSplitVar(String),
}

/// `(⋁ pos) − (⋁ neg)`; both lists are nonempty.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pos: Vec<SplitPolynomial>,
    neg: Vec<SplitPolynomial>,
}

impl NormalForm {
    pub fn new(pos: Vec<SplitPolynomial>, neg: Vec<SplitPolynomial>) -> Result<Self, RewriteError> {
        if pos.is_empty() || neg.is_empty() {
            return Err(RewriteError::EmptyJoin);
        }
        Ok(NormalForm {
            pos: dedup(pos),
            neg: dedup(neg),
        })
    }

    pub fn pos(&self) -> &[SplitPolynomial] {
        &self.pos
    }

    pub fn neg(&self) -> &[SplitPolynomial] {
        &self.neg
    }

    /// Total number of stored terms; a zero polynomial counts as one.
    pub fn size(&self) -> usize {
        self.pos
            .iter()
            .chain(&self.neg)
            .map(|p| p.term_count().max(1))
            .sum()
    }

    /// Evaluates with split variables read off a real assignment.
    pub fn eval_real(&self, a: &Assignment<f64>) -> Result<f64, EvalError> {
        for p in self.pos.iter().chain(&self.neg) {
            for (m, _) in p.terms() {
                for (v, _) in m.factors() {
                    if a.get(&v.name).is_none() {
                        return Err(EvalError::MissingVariable(v.name.clone()));
                    }
                }
            }
        }
        let value = |v: &SplitVar| v.split(*a.get(&v.name).expect("checked above"));
        Ok(self.eval_split(&value))
    }

    /// Evaluates with an explicit value for every split variable.
    pub fn eval_split(&self, value: &impl Fn(&SplitVar) -> f64) -> f64 {
        let top = |list: &[SplitPolynomial]| {
            list.iter()
                .map(|p| p.eval(value))
                .fold(f64::NEG_INFINITY, f64::max)
        };
        top(&self.pos) - top(&self.neg)
    }

    /// Source variables mentioned, sorted.
    pub fn variables(&self) -> Vec<String> {
        let mut names: Vec<String> = self
            .pos
            .iter()
            .chain(&self.neg)
            .flat_map(|p| {
                p.terms()
                    .flat_map(|(m, _)| m.factors().iter().map(|(v, _)| v.name.clone()))
            })
            .collect();
        names.sort();
        names.dedup();
        names
    }

    /// The expression `(p₁ ∨ … ∨ pₘ) + (-1)·(q₁ ∨ … ∨ qₖ)` with every split
    /// variable written as `x ∨ 0` or `(-x) ∨ 0`.
    pub fn to_expr(&self) -> Expr {
        let joined = |list: &[SplitPolynomial]| {
            let mut it = list.iter().map(polynomial_to_expr);
            let first = it.next().expect("join lists are nonempty");
            it.fold(first, Expr::join)
        };
        Expr::add(joined(&self.pos), Expr::scale(-1.0, joined(&self.neg)))
    }
}

fn split_var_expr(v: &SplitVar) -> Expr {
    let x = Expr::var(v.name.clone());
    match v.sign {
        super::polynomial::Sign::Plus => Expr::pos(x),
        super::polynomial::Sign::Minus => Expr::neg_part(x),
    }
    .desugar()
}

/// Sum of `c·m` terms in monomial order; the zero polynomial becomes `0`.
pub fn polynomial_to_expr(p: &SplitPolynomial) -> Expr {
    let term = |m: &Monomial<SplitVar>, c: f64| {
        let mut factors = m.expanded().into_iter().map(|v| split_var_expr(&v));
        let first = factors.next().expect("monomials are nonconstant");
        let prod = factors.fold(first, Expr::mul);
        if c == 1.0 {
            prod
        } else {
            Expr::scale(c, prod)
        }
    };
    let mut it = p.terms().map(|(m, c)| term(m, c));
    match it.next() {
        None => Expr::Zero,
        Some(first) => it.fold(first, Expr::add),
    }
}

fn dedup(list: Vec<SplitPolynomial>) -> Vec<SplitPolynomial> {
    let mut seen = HashSet::with_capacity(list.len());
    list.into_iter()
        .filter(|p| seen.insert(p.clone()))
        .collect()
}

/// Runs the normal-form construction under a term budget.
#[derive(Debug, Clone, Copy)]
pub struct NormalFormBuilder {
    budget: usize,
}

impl Default for NormalFormBuilder {
    fn default() -> Self {
        NormalFormBuilder {
            budget: DEFAULT_TERM_BUDGET,
        }
    }
}

impl NormalFormBuilder {
    pub fn with_budget(budget: usize) -> Self {
        NormalFormBuilder { budget }
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn build(&self, e: &Expr) -> Result<NormalForm, RewriteError> {
        let nf = match e {
            Expr::Zero => zero(),
            Expr::Var(v) => NormalForm {
                pos: vec![Polynomial::var(SplitVar::plus(v.clone()))],
                neg: vec![Polynomial::var(SplitVar::minus(v.clone()))],
            },
            Expr::Scale(c, a) => scale(&self.build(a)?, *c),
            Expr::Add(a, b) => self.add(&self.build(a)?, &self.build(b)?)?,
            Expr::Join(a, b) => self.join(&self.build(a)?, &self.build(b)?)?,
            Expr::Mul(a, b) => self.mul(&self.build(a)?, &self.build(b)?)?,
            sugar => return self.build(&sugar.desugar()),
        };
        self.check(nf)
    }

    /// Fails before building anything whose term count would exceed the budget.
    fn guard(&self, needed: usize) -> Result<(), RewriteError> {
        if needed > self.budget {
            Err(RewriteError::BudgetExceeded {
                needed,
                budget: self.budget,
            })
        } else {
            Ok(())
        }
    }

    fn check(&self, nf: NormalForm) -> Result<NormalForm, RewriteError> {
        let needed = nf.size();
        if needed > self.budget {
            Err(RewriteError::BudgetExceeded {
                needed,
                budget: self.budget,
            })
        } else {
            Ok(nf)
        }
    }

    /// `[aᵢ + bⱼ]` over index pairs in lexicographic order.
    fn pair_sums(
        &self,
        a: &[SplitPolynomial],
        b: &[SplitPolynomial],
    ) -> Result<Vec<SplitPolynomial>, RewriteError> {
        let terms = |l: &[SplitPolynomial]| l.iter().map(|p| p.term_count().max(1)).sum::<usize>();
        let needed = b
            .len()
            .saturating_mul(terms(a))
            .saturating_add(a.len().saturating_mul(terms(b)));
        self.guard(needed)?;
        let mut out = Vec::with_capacity(a.len() * b.len());
        let mut seen = HashSet::with_capacity(a.len() * b.len());
        for p in a {
            for q in b {
                let s = p.add(q);
                if seen.insert(s.clone()) {
                    out.push(s);
                }
            }
        }
        Ok(out)
    }

    fn add(&self, x: &NormalForm, y: &NormalForm) -> Result<NormalForm, RewriteError> {
        self.check(NormalForm {
            pos: self.pair_sums(&x.pos, &y.pos)?,
            neg: self.pair_sums(&x.neg, &y.neg)?,
        })
    }

    fn sub(&self, x: &NormalForm, y: &NormalForm) -> Result<NormalForm, RewriteError> {
        self.add(x, &scale(y, -1.0))
    }

    /// `(⋁a − ⋁b) ∨ (⋁c − ⋁d) = (⋁(a+d) ∨ ⋁(c+b)) − ⋁(b+d)`.
    fn join(&self, x: &NormalForm, y: &NormalForm) -> Result<NormalForm, RewriteError> {
        let mut pos = self.pair_sums(&x.pos, &y.neg)?;
        pos.extend(self.pair_sums(&y.pos, &x.neg)?);
        self.check(NormalForm {
            pos: dedup(pos),
            neg: self.pair_sums(&x.neg, &y.neg)?,
        })
    }

    fn join_all(&self, items: Vec<NormalForm>) -> Result<NormalForm, RewriteError> {
        let mut it = items.into_iter();
        let first = it.next().ok_or(RewriteError::EmptyJoin)?;
        it.try_fold(first, |acc, nf| self.join(&acc, &nf))
    }

    /// `p·(⋁u − ⋁v) = ⋁(p_p u) − ⋁(p_n u) − ⋁(p_p v) + ⋁(p_n v)`.
    fn poly_times(&self, p: &SplitPolynomial, y: &NormalForm) -> Result<NormalForm, RewriteError> {
        let (pp, pn) = p.split_signs();
        let product_terms: usize = y
            .pos
            .iter()
            .chain(&y.neg)
            .map(|u| u.term_count().saturating_mul(p.term_count()))
            .fold(0, usize::saturating_add);
        self.guard(product_terms)?;
        let times = |q: &SplitPolynomial, list: &[SplitPolynomial]| -> Vec<SplitPolynomial> {
            dedup(list.iter().map(|u| q.mul(u)).collect())
        };
        let pu = times(&pp, &y.pos);
        let nu = times(&pn, &y.pos);
        let pv = times(&pp, &y.neg);
        let nv = times(&pn, &y.neg);
        self.check(NormalForm {
            pos: self.pair_sums(&pu, &nv)?,
            neg: self.pair_sums(&nu, &pv)?,
        })
    }

    /// `(⋁ₖ wₖ)·y` via `⋁ₖ wₖ = w − w₁ₙ`, `w = w₁ₚ ∨ ⋁ₖ₌₂ (wₖ + w₁ₙ)`.
    fn join_times(
        &self,
        ws: &[SplitPolynomial],
        y: &NormalForm,
    ) -> Result<NormalForm, RewriteError> {
        let (w1p, w1n) = ws[0].split_signs();
        let mut w = vec![w1p];
        w.extend(ws[1..].iter().map(|wk| wk.add(&w1n)));
        let w = NormalForm {
            pos: dedup(w),
            neg: vec![Polynomial::zero()],
        };
        let over_pos = y
            .pos
            .iter()
            .map(|u| self.poly_times(u, &w))
            .collect::<Result<Vec<_>, _>>()?;
        let over_neg = y
            .neg
            .iter()
            .map(|v| self.poly_times(v, &w))
            .collect::<Result<Vec<_>, _>>()?;
        let wy = self.sub(&self.join_all(over_pos)?, &self.join_all(over_neg)?)?;
        self.sub(&wy, &self.poly_times(&w1n, y)?)
    }

    fn mul(&self, x: &NormalForm, y: &NormalForm) -> Result<NormalForm, RewriteError> {
        let (p, n) = product_list_lengths((x.pos.len(), x.neg.len()), (y.pos.len(), y.neg.len()));
        self.guard(p.saturating_add(n))?;
        self.sub(&self.join_times(&x.pos, y)?, &self.join_times(&x.neg, y)?)
    }
}

type Lengths = (usize, usize);

fn sub_lengths(a: Lengths, b: Lengths) -> Lengths {
    (a.0.saturating_mul(b.1), a.1.saturating_mul(b.0))
}

fn join_lengths(a: Lengths, b: Lengths) -> Lengths {
    (
        a.0.saturating_mul(b.1)
            .saturating_add(b.0.saturating_mul(a.1)),
        a.1.saturating_mul(b.1),
    )
}

/// Join-list lengths the product construction generates before
/// deduplication; an upper bound for the lengths it returns.
fn product_list_lengths(x: Lengths, y: Lengths) -> Lengths {
    let join_times = |k: usize| {
        let item = (k, k);
        let join_all = |m: usize| (1..m).fold(item, |acc, _| join_lengths(acc, item));
        let wy = sub_lengths(join_all(y.0), join_all(y.1));
        let uv = y.0.saturating_mul(y.1);
        sub_lengths(wy, (uv, uv))
    };
    sub_lengths(join_times(x.0), join_times(x.1))
}

fn zero() -> NormalForm {
    NormalForm {
        pos: vec![Polynomial::zero()],
        neg: vec![Polynomial::zero()],
    }
}

fn scale(x: &NormalForm, c: f64) -> NormalForm {
    let (pos, neg, k) = if c < 0.0 {
        (&x.neg, &x.pos, -c)
    } else {
        (&x.pos, &x.neg, c)
    };
    NormalForm {
        pos: dedup(pos.iter().map(|p| p.scale(k)).collect()),
        neg: dedup(neg.iter().map(|p| p.scale(k)).collect()),
    }
}

/// Normal form under the default term budget.
pub fn normal_form(e: &Expr) -> Result<NormalForm, RewriteError> {
    NormalFormBuilder::default().build(e)
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    monomial: Vec<String>,
    coeff: f64,
}

#[derive(Serialize, Deserialize)]
struct NormalFormRepr {
    pos: Vec<Vec<TermRepr>>,
    neg: Vec<Vec<TermRepr>>,
}

fn poly_repr(p: &SplitPolynomial) -> Vec<TermRepr> {
    p.terms()
        .map(|(m, c)| TermRepr {
            monomial: m.expanded().iter().map(SplitVar::to_string).collect(),
            coeff: c,
        })
        .collect()
}

fn poly_from_repr(terms: Vec<TermRepr>) -> Result<SplitPolynomial, RewriteError> {
    let mut p = Polynomial::zero();
    for t in terms {
        let vars = t
            .monomial
            .iter()
            .map(|s| s.parse::<SplitVar>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(RewriteError::BadSplitVar)?;
        let m = Monomial::from_factors(vars)
            .ok_or_else(|| RewriteError::BadSplitVar("empty monomial".into()))?;
        p.add_term(m, t.coeff);
    }
    Ok(p)
}

impl Serialize for NormalForm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        NormalFormRepr {
            pos: self.pos.iter().map(poly_repr).collect(),
            neg: self.neg.iter().map(poly_repr).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NormalForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = NormalFormRepr::deserialize(d)?;
        let convert = |list: Vec<Vec<TermRepr>>| {
            list.into_iter()
                .map(poly_from_repr)
                .collect::<Result<Vec<_>, _>>()
        };
        let pos = convert(repr.pos).map_err(serde::de::Error::custom)?;
        let neg = convert(repr.neg).map_err(serde::de::Error::custom)?;
        NormalForm::new(pos, neg).map_err(serde::de::Error::custom)
    }
}
