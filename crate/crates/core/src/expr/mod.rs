//! Lattice-linear-algebraic (LLA) expressions.
//!
//! An [`Expr`] is a formal term over named variables built from the zero
//! constant, real scaling, addition, join (`∨`) and a binary product. The
//! sugar kinds (`∧`, positive part, negative part, absolute value, negation)
//! are accepted on input and removed by [`Expr::desugar`].
//!
//! Evaluation is generic over a [`Semantics`]: the same recursion evaluates an
//! expression over the reals, inside a finite f-algebra model, or on a grid of
//! sample points.

mod eval;
mod parse;
mod print;
mod random;

use std::collections::BTreeSet;
use std::fmt;

pub use eval::{Assignment, CompiledExpr, EvalError, RealSemantics, Semantics};
pub use parse::{parse, parse_raw, ParseError};
pub use random::{ExprGenerator, KindWeights};

/// An LLA expression.
///
/// The first six variants are the core signature; the remaining five are
/// sugar and never appear in the output of [`Expr::desugar`] or [`parse`].
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Zero,
    Var(String),
    Scale(f64, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Join(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// `a ∧ b`, read as `-((-a) ∨ (-b))`.
    Meet(Box<Expr>, Box<Expr>),
    /// `a₊ = a ∨ 0`.
    Pos(Box<Expr>),
    /// `a₋ = (-a) ∨ 0`.
    NegPart(Box<Expr>),
    /// `|a| = a ∨ (-a)`.
    Abs(Box<Expr>),
    /// `-a = (-1)·a`.
    Neg(Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    /// Scales `e` by `c`.
    ///
    /// # Panics
    ///
    /// Panics if `c` is not finite; coefficients are always finite reals.
    pub fn scale(c: f64, e: Expr) -> Expr {
        assert!(
            c.is_finite(),
            "expression coefficients must be finite, got {c}"
        );
        Expr::Scale(c, Box::new(e))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn join(a: Expr, b: Expr) -> Expr {
        Expr::Join(Box::new(a), Box::new(b))
    }

    pub fn meet(a: Expr, b: Expr) -> Expr {
        Expr::Meet(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn pos(a: Expr) -> Expr {
        Expr::Pos(Box::new(a))
    }

    pub fn neg_part(a: Expr) -> Expr {
        Expr::NegPart(Box::new(a))
    }

    pub fn abs(a: Expr) -> Expr {
        Expr::Abs(Box::new(a))
    }

    pub fn neg(a: Expr) -> Expr {
        Expr::Neg(Box::new(a))
    }

    /// `a - b`, in the shape the parser produces for the same text.
    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::add(a, Expr::scale(-1.0, b))
    }

    /// `a·a·…·a` (`k` factors, left associated). `k` must be at least one.
    pub fn power(a: &Expr, k: u32) -> Expr {
        assert!(k >= 1, "power needs at least one factor");
        let mut acc = a.clone();
        for _ in 1..k {
            acc = Expr::mul(acc, a.clone());
        }
        acc
    }

    /// Immediate children, left to right.
    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Zero | Expr::Var(_) => vec![],
            Expr::Scale(_, a) | Expr::Pos(a) | Expr::NegPart(a) | Expr::Abs(a) | Expr::Neg(a) => {
                vec![a]
            }
            Expr::Add(a, b) | Expr::Join(a, b) | Expr::Mul(a, b) | Expr::Meet(a, b) => {
                vec![a, b]
            }
        }
    }

    /// Complexity in the inductive sense: 1 for `0` and variables, one more
    /// than the deepest child otherwise.
    pub fn complexity(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Expr::complexity)
            .max()
            .unwrap_or(0)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Expr::size).sum::<usize>()
    }

    /// Free variables in lexicographic order.
    pub fn variables(&self) -> Vec<String> {
        let mut set = BTreeSet::new();
        self.collect_vars(&mut set);
        set.into_iter().collect()
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        if let Expr::Var(v) = self {
            out.insert(v.clone());
        }
        for c in self.children() {
            c.collect_vars(out);
        }
    }

    pub fn contains_product(&self) -> bool {
        matches!(self, Expr::Mul(..)) || self.children().into_iter().any(Expr::contains_product)
    }

    /// True if only the six core kinds occur.
    pub fn is_core(&self) -> bool {
        match self {
            Expr::Meet(..) | Expr::Pos(_) | Expr::NegPart(_) | Expr::Abs(_) | Expr::Neg(_) => false,
            _ => self.children().into_iter().all(Expr::is_core),
        }
    }

    /// Rewrites every sugar node into the core signature:
    /// `a ∧ b = -((-a) ∨ (-b))`, `a₊ = a ∨ 0`, `a₋ = (-a) ∨ 0`,
    /// `|a| = a ∨ (-a)`, `-a = (-1)·a`.
    pub fn desugar(&self) -> Expr {
        match self {
            Expr::Zero => Expr::Zero,
            Expr::Var(v) => Expr::Var(v.clone()),
            Expr::Scale(c, a) => Expr::Scale(*c, Box::new(a.desugar())),
            Expr::Add(a, b) => Expr::add(a.desugar(), b.desugar()),
            Expr::Join(a, b) => Expr::join(a.desugar(), b.desugar()),
            Expr::Mul(a, b) => Expr::mul(a.desugar(), b.desugar()),
            Expr::Meet(a, b) => Expr::scale(
                -1.0,
                Expr::join(
                    Expr::scale(-1.0, a.desugar()),
                    Expr::scale(-1.0, b.desugar()),
                ),
            ),
            Expr::Pos(a) => Expr::join(a.desugar(), Expr::Zero),
            Expr::NegPart(a) => Expr::join(Expr::scale(-1.0, a.desugar()), Expr::Zero),
            Expr::Abs(a) => {
                let d = a.desugar();
                Expr::join(d.clone(), Expr::scale(-1.0, d))
            }
            Expr::Neg(a) => Expr::scale(-1.0, a.desugar()),
        }
    }

    /// Replaces every occurrence of variable `name` by `by`.
    pub fn substitute(&self, name: &str, by: &Expr) -> Expr {
        self.map_leaves(&|leaf| match leaf {
            Expr::Var(v) if v == name => by.clone(),
            other => other.clone(),
        })
    }

    /// Rebuilds the tree bottom-up, transforming only the leaves.
    fn map_leaves(&self, f: &dyn Fn(&Expr) -> Expr) -> Expr {
        let b = |e: &Expr| Box::new(e.map_leaves(f));
        match self {
            Expr::Zero | Expr::Var(_) => f(self),
            Expr::Scale(c, a) => Expr::Scale(*c, b(a)),
            Expr::Add(x, y) => Expr::Add(b(x), b(y)),
            Expr::Join(x, y) => Expr::Join(b(x), b(y)),
            Expr::Mul(x, y) => Expr::Mul(b(x), b(y)),
            Expr::Meet(x, y) => Expr::Meet(b(x), b(y)),
            Expr::Pos(a) => Expr::Pos(b(a)),
            Expr::NegPart(a) => Expr::NegPart(b(a)),
            Expr::Abs(a) => Expr::Abs(b(a)),
            Expr::Neg(a) => Expr::Neg(b(a)),
        }
    }

    /// Renders the expression in the concrete syntax accepted by [`parse`].
    pub fn to_text(&self) -> String {
        print::print(self)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print::print(self))
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::scale(-1.0, self)
    }
}
