//! Symbolic transforms of expressions: the product-kill `Φ ↦ Φ₀`, normal
//! forms over split variables, and the positive polynomial majorant.

mod normal_form;
mod polynomial;

pub use normal_form::{
    normal_form, polynomial_to_expr, NormalForm, NormalFormBuilder, RewriteError, SplitPolynomial,
    DEFAULT_TERM_BUDGET,
};
pub use polynomial::{Monomial, Polynomial, Sign, SplitVar};

use crate::expr::{Assignment, Expr};

/// Replaces every product node by `0`, leaving the rest of the tree as is.
///
/// Sugar nodes are desugared first, so the result is a core expression.
pub fn product_kill(e: &Expr) -> Expr {
    match e {
        Expr::Zero => Expr::Zero,
        Expr::Var(v) => Expr::Var(v.clone()),
        Expr::Scale(c, a) => Expr::Scale(*c, Box::new(product_kill(a))),
        Expr::Add(a, b) => Expr::add(product_kill(a), product_kill(b)),
        Expr::Join(a, b) => Expr::join(product_kill(a), product_kill(b)),
        Expr::Mul(..) => Expr::Zero,
        sugar => product_kill(&sugar.desugar()),
    }
}

/// Removes neutral elements bottom-up: `0 + e → e`, `e + 0 → e`, `1·e → e`,
/// `c·0 → 0`, `0 ∨ 0 → 0`, and `e·0`, `0·e → 0`.
///
/// Purely structural; no lattice identity beyond the neutral elements is used.
pub fn simplify_zeros(e: &Expr) -> Expr {
    match e {
        Expr::Zero | Expr::Var(_) => e.clone(),
        Expr::Scale(c, a) => match simplify_zeros(a) {
            Expr::Zero => Expr::Zero,
            s if *c == 1.0 => s,
            s => Expr::Scale(*c, Box::new(s)),
        },
        Expr::Add(a, b) => match (simplify_zeros(a), simplify_zeros(b)) {
            (Expr::Zero, s) | (s, Expr::Zero) => s,
            (x, y) => Expr::add(x, y),
        },
        Expr::Join(a, b) => match (simplify_zeros(a), simplify_zeros(b)) {
            (Expr::Zero, Expr::Zero) => Expr::Zero,
            (x, y) => Expr::join(x, y),
        },
        Expr::Mul(a, b) => match (simplify_zeros(a), simplify_zeros(b)) {
            (Expr::Zero, _) | (_, Expr::Zero) => Expr::Zero,
            (x, y) => Expr::mul(x, y),
        },
        sugar => simplify_zeros(&sugar.desugar()),
    }
}

/// Polynomial `p` in the variables `t_v = |v|` with `|e| ≤ p(|v₁|, …, |vₙ|)`
/// in every Archimedean f-algebra.
///
/// Rules: `v → t_v`, `λ·a → |λ|p`, `a + b → p + q`, `a·b → p·q`, and
/// `a ∨ b → p + q`, except that equal bounds on both sides give `p`
/// (`|a ∨ b| ≤ |a| ∨ |b|`), so `|v| = v ∨ (-v)` is bounded by `t_v`.
pub fn polynomial_majorant(e: &Expr) -> Polynomial<String> {
    match e {
        Expr::Zero => Polynomial::zero(),
        Expr::Var(v) => Polynomial::var(v.clone()),
        Expr::Scale(c, a) => polynomial_majorant(a).scale(c.abs()),
        Expr::Add(a, b) => polynomial_majorant(a).add(&polynomial_majorant(b)),
        Expr::Join(a, b) => {
            let (p, q) = (polynomial_majorant(a), polynomial_majorant(b));
            if p == q {
                p
            } else {
                p.add(&q)
            }
        }
        Expr::Mul(a, b) => polynomial_majorant(a).mul(&polynomial_majorant(b)),
        sugar => polynomial_majorant(&sugar.desugar()),
    }
}

/// Evaluates a majorant at `|a(v)|` for every variable; missing variables
/// count as 0.
pub fn eval_majorant(p: &Polynomial<String>, a: &Assignment<f64>) -> f64 {
    p.eval(&|v: &String| a.get(v).map_or(0.0, |x| x.abs()))
}
