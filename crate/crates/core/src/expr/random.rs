use rand::Rng;

use super::Expr;

/// Relative weights of node kinds drawn by [`ExprGenerator`].
///
/// Weights need not sum to one. When the complexity budget is exhausted
/// only leaves (`zero`, `var`) are drawn, in proportion to their weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KindWeights {
    pub zero: f64,
    pub var: f64,
    pub scale: f64,
    pub add: f64,
    pub join: f64,
    pub mul: f64,
    /// Shared weight for each of the five sugar kinds.
    pub sugar: f64,
}

impl Default for KindWeights {
    /// zero 0.05, var 0.20, scale 0.15, add 0.20, join 0.20, mul 0.20, no sugar.
    fn default() -> Self {
        KindWeights {
            zero: 0.05,
            var: 0.20,
            scale: 0.15,
            add: 0.20,
            join: 0.20,
            mul: 0.20,
            sugar: 0.0,
        }
    }
}

/// Seeded random expression source.
///
/// Coefficients of scaling nodes are uniform in `[-coeff_bound, coeff_bound]`.
#[derive(Debug, Clone)]
pub struct ExprGenerator {
    pub vars: Vec<String>,
    pub max_complexity: usize,
    pub weights: KindWeights,
    pub coeff_bound: f64,
}

impl ExprGenerator {
    pub fn new(vars: &[&str], max_complexity: usize) -> Self {
        assert!(!vars.is_empty(), "generator needs at least one variable");
        assert!(max_complexity >= 1);
        ExprGenerator {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            max_complexity,
            weights: KindWeights::default(),
            coeff_bound: 2.0,
        }
    }

    pub fn with_weights(mut self, weights: KindWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Expr {
        self.node(rng, self.max_complexity)
    }

    fn leaf<R: Rng + ?Sized>(&self, rng: &mut R) -> Expr {
        let w = &self.weights;
        if rng.gen::<f64>() * (w.zero + w.var) < w.zero {
            Expr::Zero
        } else {
            Expr::Var(self.vars[rng.gen_range(0..self.vars.len())].clone())
        }
    }

    fn node<R: Rng + ?Sized>(&self, rng: &mut R, budget: usize) -> Expr {
        if budget <= 1 {
            return self.leaf(rng);
        }
        let w = &self.weights;
        let table = [
            w.zero, w.var, w.scale, w.add, w.join, w.mul, w.sugar, w.sugar, w.sugar, w.sugar,
            w.sugar,
        ];
        let total: f64 = table.iter().sum();
        let mut pick = rng.gen::<f64>() * total;
        let mut kind = table.len() - 1;
        for (i, &t) in table.iter().enumerate() {
            if pick < t {
                kind = i;
                break;
            }
            pick -= t;
        }
        let sub = budget - 1;
        match kind {
            0 => Expr::Zero,
            1 => Expr::Var(self.vars[rng.gen_range(0..self.vars.len())].clone()),
            2 => {
                let c = rng.gen_range(-self.coeff_bound..=self.coeff_bound);
                Expr::scale(c, self.node(rng, sub))
            }
            3 => Expr::add(self.node(rng, sub), self.node(rng, sub)),
            4 => Expr::join(self.node(rng, sub), self.node(rng, sub)),
            5 => Expr::mul(self.node(rng, sub), self.node(rng, sub)),
            6 => Expr::meet(self.node(rng, sub), self.node(rng, sub)),
            7 => Expr::pos(self.node(rng, sub)),
            8 => Expr::neg_part(self.node(rng, sub)),
            9 => Expr::abs(self.node(rng, sub)),
            _ => Expr::neg(self.node(rng, sub)),
        }
    }
}
