use std::collections::BTreeMap;

use thiserror::Error;

use super::Expr;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("no value assigned to variable `{0}`")]
    MissingVariable(String),
    #[error("element belongs to model {found}, expected model {expected}")]
    ModelMismatch { expected: u64, found: u64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// The operations of a vector lattice algebra, used to interpret expressions.
///
/// Sugar kinds are evaluated through their desugared definitions so that
/// `e.eval(..)` and `e.desugar().eval(..)` agree bit for bit.
pub trait Semantics {
    type Value: Clone;

    fn zero(&self) -> Self::Value;
    fn scale(&self, c: f64, a: &Self::Value) -> Self::Value;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn join(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;

    fn meet(&self, a: &Self::Value, b: &Self::Value) -> Self::Value {
        let j = self.join(&self.scale(-1.0, a), &self.scale(-1.0, b));
        self.scale(-1.0, &j)
    }

    fn pos(&self, a: &Self::Value) -> Self::Value {
        self.join(a, &self.zero())
    }

    fn neg_part(&self, a: &Self::Value) -> Self::Value {
        self.join(&self.scale(-1.0, a), &self.zero())
    }

    fn abs(&self, a: &Self::Value) -> Self::Value {
        self.join(a, &self.scale(-1.0, a))
    }

    fn neg(&self, a: &Self::Value) -> Self::Value {
        self.scale(-1.0, a)
    }
}

/// The reals with their usual order and product.
#[derive(Debug, Clone, Copy, Default)]
pub struct RealSemantics;

impl Semantics for RealSemantics {
    type Value = f64;

    fn zero(&self) -> f64 {
        0.0
    }
    fn scale(&self, c: f64, a: &f64) -> f64 {
        c * a
    }
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn join(&self, a: &f64, b: &f64) -> f64 {
        a.max(*b)
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
}

/// Values for the free variables of an expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<V = f64> {
    values: BTreeMap<String, V>,
}

impl<V> Default for Assignment<V> {
    fn default() -> Self {
        Assignment {
            values: BTreeMap::new(),
        }
    }
}

impl<V> Assignment<V> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, value: V) -> Self {
        self.values.insert(name.into(), value);
        self
    }

    pub fn insert(&mut self, name: impl Into<String>, value: V) {
        self.values.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<&V> {
        self.values.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &V)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// True if every free variable of `e` has a value.
    pub fn covers(&self, e: &Expr) -> bool {
        e.variables().iter().all(|v| self.values.contains_key(v))
    }

    /// Applies `f` to every value.
    pub fn map<W>(&self, mut f: impl FnMut(&V) -> W) -> Assignment<W> {
        Assignment {
            values: self.values.iter().map(|(k, v)| (k.clone(), f(v))).collect(),
        }
    }
}

impl<V, K: Into<String>> FromIterator<(K, V)> for Assignment<V> {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Assignment {
            values: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

impl Expr {
    /// Evaluates the expression under `sem`.
    pub fn eval<S: Semantics>(
        &self,
        sem: &S,
        a: &Assignment<S::Value>,
    ) -> Result<S::Value, EvalError> {
        Ok(match self {
            Expr::Zero => sem.zero(),
            Expr::Var(v) => a
                .get(v)
                .cloned()
                .ok_or_else(|| EvalError::MissingVariable(v.clone()))?,
            Expr::Scale(c, x) => sem.scale(*c, &x.eval(sem, a)?),
            Expr::Add(x, y) => sem.add(&x.eval(sem, a)?, &y.eval(sem, a)?),
            Expr::Join(x, y) => sem.join(&x.eval(sem, a)?, &y.eval(sem, a)?),
            Expr::Mul(x, y) => sem.mul(&x.eval(sem, a)?, &y.eval(sem, a)?),
            Expr::Meet(x, y) => sem.meet(&x.eval(sem, a)?, &y.eval(sem, a)?),
            Expr::Pos(x) => sem.pos(&x.eval(sem, a)?),
            Expr::NegPart(x) => sem.neg_part(&x.eval(sem, a)?),
            Expr::Abs(x) => sem.abs(&x.eval(sem, a)?),
            Expr::Neg(x) => sem.neg(&x.eval(sem, a)?),
        })
    }

    /// Evaluates over the reals (join is `max`).
    pub fn eval_real(&self, a: &Assignment<f64>) -> Result<f64, EvalError> {
        self.eval(&RealSemantics, a)
    }

    /// Compiles the expression against a fixed variable order for repeated
    /// evaluation on many points.
    pub fn compile(&self, vars: &[String]) -> Result<CompiledExpr, EvalError> {
        let mut code = Vec::new();
        self.emit(vars, &mut code)?;
        Ok(CompiledExpr {
            code,
            arity: vars.len(),
        })
    }

    fn emit(&self, vars: &[String], code: &mut Vec<Op>) -> Result<(), EvalError> {
        for c in self.children() {
            c.emit(vars, code)?;
        }
        code.push(match self {
            Expr::Zero => Op::Zero,
            Expr::Var(v) => Op::Load(
                vars.iter()
                    .position(|w| w == v)
                    .ok_or_else(|| EvalError::MissingVariable(v.clone()))?,
            ),
            Expr::Scale(c, _) => Op::Scale(*c),
            Expr::Add(..) => Op::Add,
            Expr::Join(..) => Op::Join,
            Expr::Mul(..) => Op::Mul,
            Expr::Meet(..) => Op::Meet,
            Expr::Pos(_) => Op::Pos,
            Expr::NegPart(_) => Op::NegPart,
            Expr::Abs(_) => Op::Abs,
            Expr::Neg(_) => Op::Neg,
        });
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Zero,
    Load(usize),
    Scale(f64),
    Add,
    Join,
    Mul,
    Meet,
    Pos,
    NegPart,
    Abs,
    Neg,
}

/// Postfix form of an expression with variables resolved to slots.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledExpr {
    code: Vec<Op>,
    arity: usize,
}

impl CompiledExpr {
    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Evaluates with `inputs[i]` bound to the `i`-th compiled variable.
    pub fn eval<S: Semantics>(&self, sem: &S, inputs: &[S::Value]) -> S::Value {
        assert_eq!(
            inputs.len(),
            self.arity,
            "compiled expression arity mismatch"
        );
        let mut stack: Vec<S::Value> = Vec::with_capacity(8);
        for op in &self.code {
            let v = match *op {
                Op::Zero => sem.zero(),
                Op::Load(i) => inputs[i].clone(),
                Op::Scale(c) => {
                    let a = stack.pop().expect("stack underflow");
                    sem.scale(c, &a)
                }
                Op::Pos | Op::NegPart | Op::Abs | Op::Neg => {
                    let a = stack.pop().expect("stack underflow");
                    match *op {
                        Op::Pos => sem.pos(&a),
                        Op::NegPart => sem.neg_part(&a),
                        Op::Abs => sem.abs(&a),
                        _ => sem.neg(&a),
                    }
                }
                _ => {
                    let b = stack.pop().expect("stack underflow");
                    let a = stack.pop().expect("stack underflow");
                    match *op {
                        Op::Add => sem.add(&a, &b),
                        Op::Join => sem.join(&a, &b),
                        Op::Mul => sem.mul(&a, &b),
                        _ => sem.meet(&a, &b),
                    }
                }
            };
            stack.push(v);
        }
        stack.pop().expect("empty program")
    }

    pub fn eval_real(&self, inputs: &[f64]) -> f64 {
        self.eval(&RealSemantics, inputs)
    }
}
