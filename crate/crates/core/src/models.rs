//! Finite Archimedean f-algebra models: `ℝᵈ` with the coordinatewise order,
//! the sup norm and a pointwise weighted product.
//!
//! Three families are provided: weighted grids (`w ∈ [0,1]ᵈ`, possibly with
//! zero weights), diagonal algebras (`0 < c ≤ 1`, semiprime) and the
//! zero-product lattice `X₀`. The axiom checkers accept any
//! [`FAlgebraModel`], so tests can inject deliberately broken products.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Assignment, EvalError, Expr, Semantics};
use crate::rewrite::polynomial_majorant;

static NEXT_MODEL_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_MODEL_ID.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("weight {value} at index {index} is outside {range}")]
    BadWeight {
        index: usize,
        value: f64,
        range: &'static str,
    },
    #[error("model needs at least one point")]
    Empty,
}

/// A vector lattice `ℝᵈ` (coordinatewise order) with a bilinear product.
pub trait FAlgebraModel: Send + Sync {
    /// Identifier shared by every element created from this model.
    fn id(&self) -> u64;
    fn dim(&self) -> usize;
    fn product(&self, x: &[f64], y: &[f64]) -> Vec<f64>;
    fn name(&self) -> String;

    fn element(&self, coords: Vec<f64>) -> Result<ModelElement, EvalError> {
        if coords.len() != self.dim() {
            return Err(EvalError::DimensionMismatch {
                expected: self.dim(),
                found: coords.len(),
            });
        }
        Ok(ModelElement {
            model: self.id(),
            coords,
        })
    }

    fn zero_element(&self) -> ModelElement {
        ModelElement {
            model: self.id(),
            coords: vec![0.0; self.dim()],
        }
    }

    /// Coordinates i.i.d. uniform in `[-1, 1]`.
    fn random_element(&self, rng: &mut dyn rand::RngCore) -> ModelElement {
        let coords = (0..self.dim()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        ModelElement {
            model: self.id(),
            coords,
        }
    }
}

/// An element of a finite model; only combinable with elements of the same
/// model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelElement {
    model: u64,
    coords: Vec<f64>,
}

impl ModelElement {
    pub fn model_id(&self) -> u64 {
        self.model
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn sup_norm(&self) -> f64 {
        sup_norm(&self.coords)
    }
}

pub fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn check_weights(weights: &[f64], strict: bool) -> Result<(), ModelError> {
    if weights.is_empty() {
        return Err(ModelError::Empty);
    }
    for (index, &value) in weights.iter().enumerate() {
        let ok = if strict {
            value > 0.0 && value <= 1.0
        } else {
            (0.0..=1.0).contains(&value)
        };
        if !ok {
            let range = if strict { "(0, 1]" } else { "[0, 1]" };
            return Err(ModelError::BadWeight {
                index,
                value,
                range,
            });
        }
    }
    Ok(())
}

fn weighted_product(w: &[f64], x: &[f64], y: &[f64]) -> Vec<f64> {
    w.iter()
        .zip(x)
        .zip(y)
        .map(|((w, x), y)| w * x * y)
        .collect()
}

/// `(x·y)(t) = w(t)·x(t)·y(t)` with `0 ≤ w ≤ 1`.
#[derive(Debug, Clone)]
pub struct WeightedGridModel {
    id: u64,
    weights: Vec<f64>,
}

impl WeightedGridModel {
    pub fn new(weights: Vec<f64>) -> Result<Self, ModelError> {
        check_weights(&weights, false)?;
        Ok(Self::unchecked(weights))
    }

    /// Skips the weight range check (for negative-control fixtures).
    pub fn unchecked(weights: Vec<f64>) -> Self {
        WeightedGridModel {
            id: fresh_id(),
            weights,
        }
    }

    /// Weights i.i.d. uniform in `[0, 1]`.
    pub fn random<R: Rng + ?Sized>(points: usize, rng: &mut R) -> Self {
        Self::unchecked((0..points).map(|_| rng.gen_range(0.0..=1.0)).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl FAlgebraModel for WeightedGridModel {
    fn id(&self) -> u64 {
        self.id
    }
    fn dim(&self) -> usize {
        self.weights.len()
    }
    fn product(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        weighted_product(&self.weights, x, y)
    }
    fn name(&self) -> String {
        format!("weighted_grid({})", self.weights.len())
    }
}

/// `ℝˡ` with `aᵢ∘aⱼ = 0` for `i ≠ j` and `aⱼ∘aⱼ = cⱼaⱼ`, `0 < cⱼ ≤ 1`.
#[derive(Debug, Clone)]
pub struct DiagonalAlgebra {
    id: u64,
    weights: Vec<f64>,
}

impl DiagonalAlgebra {
    pub fn new(weights: Vec<f64>) -> Result<Self, ModelError> {
        check_weights(&weights, true)?;
        Ok(DiagonalAlgebra {
            id: fresh_id(),
            weights,
        })
    }

    /// Weights i.i.d. uniform in `(0, 1]`.
    pub fn random<R: Rng + ?Sized>(atoms: usize, rng: &mut R) -> Self {
        let weights = (0..atoms).map(|_| 1.0 - rng.gen::<f64>()).collect();
        DiagonalAlgebra {
            id: fresh_id(),
            weights,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> usize {
        self.weights.len()
    }
}

impl FAlgebraModel for DiagonalAlgebra {
    fn id(&self) -> u64 {
        self.id
    }
    fn dim(&self) -> usize {
        self.weights.len()
    }
    fn product(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        weighted_product(&self.weights, x, y)
    }
    fn name(&self) -> String {
        format!("diagonal({})", self.weights.len())
    }
}

/// The coordinate lattice with the identically zero product.
#[derive(Debug, Clone)]
pub struct ZeroProductModel {
    id: u64,
    points: usize,
}

impl ZeroProductModel {
    pub fn new(points: usize) -> Result<Self, ModelError> {
        if points == 0 {
            return Err(ModelError::Empty);
        }
        Ok(ZeroProductModel {
            id: fresh_id(),
            points,
        })
    }
}

impl FAlgebraModel for ZeroProductModel {
    fn id(&self) -> u64 {
        self.id
    }
    fn dim(&self) -> usize {
        self.points
    }
    fn product(&self, _: &[f64], _: &[f64]) -> Vec<f64> {
        vec![0.0; self.points]
    }
    fn name(&self) -> String {
        format!("zero_product({})", self.points)
    }
}

/// JSON description of a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Diagonal { weights: Vec<f64> },
    WeightedGrid { weights: Vec<f64> },
    ZeroProduct { points: usize },
}

impl ModelSpec {
    pub fn build(&self) -> Result<Box<dyn FAlgebraModel>, ModelError> {
        Ok(match self {
            ModelSpec::Diagonal { weights } => Box::new(DiagonalAlgebra::new(weights.clone())?),
            ModelSpec::WeightedGrid { weights } => {
                Box::new(WeightedGridModel::new(weights.clone())?)
            }
            ModelSpec::ZeroProduct { points } => Box::new(ZeroProductModel::new(*points)?),
        })
    }
}

impl From<&DiagonalAlgebra> for ModelSpec {
    fn from(m: &DiagonalAlgebra) -> Self {
        ModelSpec::Diagonal {
            weights: m.weights.clone(),
        }
    }
}

impl From<&WeightedGridModel> for ModelSpec {
    fn from(m: &WeightedGridModel) -> Self {
        ModelSpec::WeightedGrid {
            weights: m.weights.clone(),
        }
    }
}

impl From<&ZeroProductModel> for ModelSpec {
    fn from(m: &ZeroProductModel) -> Self {
        ModelSpec::ZeroProduct { points: m.points }
    }
}

/// Coordinatewise lattice operations plus the model's product.
pub struct ModelSemantics<'a, M: FAlgebraModel + ?Sized> {
    model: &'a M,
}

impl<'a, M: FAlgebraModel + ?Sized> ModelSemantics<'a, M> {
    pub fn new(model: &'a M) -> Self {
        ModelSemantics { model }
    }
}

impl<M: FAlgebraModel + ?Sized> Semantics for ModelSemantics<'_, M> {
    type Value = Vec<f64>;

    fn zero(&self) -> Vec<f64> {
        vec![0.0; self.model.dim()]
    }
    fn scale(&self, c: f64, a: &Vec<f64>) -> Vec<f64> {
        a.iter().map(|x| c * x).collect()
    }
    fn add(&self, a: &Vec<f64>, b: &Vec<f64>) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }
    fn join(&self, a: &Vec<f64>, b: &Vec<f64>) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x.max(*y)).collect()
    }
    fn mul(&self, a: &Vec<f64>, b: &Vec<f64>) -> Vec<f64> {
        self.model.product(a, b)
    }
}

/// Evaluates `e` in `m` with the model's operations.
pub fn eval_in_model<M: FAlgebraModel + ?Sized>(
    e: &Expr,
    m: &M,
    a: &Assignment<ModelElement>,
) -> Result<ModelElement, EvalError> {
    for (_, el) in a.iter() {
        if el.model != m.id() {
            return Err(EvalError::ModelMismatch {
                expected: m.id(),
                found: el.model,
            });
        }
        if el.coords.len() != m.dim() {
            return Err(EvalError::DimensionMismatch {
                expected: m.dim(),
                found: el.coords.len(),
            });
        }
    }
    let raw = a.map(|el| el.coords.clone());
    let coords = e.eval(&ModelSemantics::new(m), &raw)?;
    Ok(ModelElement {
        model: m.id(),
        coords,
    })
}

/// `count` random weighted-grid models, `count` random diagonal algebras
/// (each of dimension 1 to `max_dim`) and a zero-product model, as specs.
pub fn random_model_family(count: usize, max_dim: usize, seed: u64) -> Vec<ModelSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_dim = max_dim.max(1);
    let mut out = Vec::with_capacity(2 * count + 1);
    for _ in 0..count {
        let d = rng.gen_range(1..=max_dim);
        out.push((&WeightedGridModel::random(d, &mut rng)).into());
    }
    for _ in 0..count {
        let d = rng.gen_range(1..=max_dim);
        out.push((&DiagonalAlgebra::random(d, &mut rng)).into());
    }
    out.push(ModelSpec::ZeroProduct { points: max_dim });
    out
}

/// Result of [`vanishes_in_model`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ModelVanishing {
    pub model: String,
    pub vanishes: bool,
    /// Largest `‖e(a)‖∞ / (1 + p(‖a‖∞))` with `p` the polynomial majorant.
    pub max_residual: f64,
    /// Variable names and coordinates of the worst assignment.
    pub vars: Vec<String>,
    pub at: Vec<Vec<f64>>,
    pub trials: usize,
}

/// Evaluates `e` on `trials` random assignments in `m`.
pub fn vanishes_in_model<M: FAlgebraModel + ?Sized>(
    e: &Expr,
    m: &M,
    trials: usize,
    seed: u64,
    tol: f64,
) -> ModelVanishing {
    let vars = e.variables();
    let prog = e
        .compile(&vars)
        .expect("variables come from the expression");
    let majorant = polynomial_majorant(e);
    let sem = ModelSemantics::new(m);
    let (max_residual, at) = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, k as u64);
            let inputs: Vec<Vec<f64>> = vars
                .iter()
                .map(|_| m.random_element(&mut rng).into_coords())
                .collect();
            let bound = 1.0
                + majorant.eval(&|v: &String| {
                    sup_norm(&inputs[vars.binary_search(v).expect("majorant variable")])
                });
            (sup_norm(&prog.eval(&sem, &inputs)) / bound, inputs)
        })
        .reduce(|| (0.0, Vec::new()), |a, b| if b.0 > a.0 { b } else { a });
    ModelVanishing {
        model: m.name(),
        vanishes: max_residual <= tol,
        max_residual,
        vars,
        at,
        trials,
    }
}

/// Random generator for trial `k` of a check seeded with `seed`.
fn trial_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

fn meet(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x.min(*y)).collect()
}

fn abs(a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| x.abs()).collect()
}

fn basis(d: usize, j: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[j] = 1.0;
    v
}

/// Tolerance for "equals zero" in the axiom checks.
pub const CHECK_TOL: f64 = 1e-12;

/// Outcome of the f-algebra condition check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FAlgebraReport {
    pub trials: usize,
    pub violations: usize,
    /// `(x, y, z)` of the first violating trial.
    pub witness: Option<(Vec<f64>, Vec<f64>, Vec<f64>)>,
}

/// Checks `(zx)∧y = 0 = (xz)∧y` for random `z ≥ 0` and random positive `x, y`
/// with disjoint supports.
pub fn check_f_algebra_condition<M: FAlgebraModel + ?Sized>(
    m: &M,
    trials: usize,
    seed: u64,
) -> FAlgebraReport {
    let d = m.dim();
    let outcomes: Vec<Option<(Vec<f64>, Vec<f64>, Vec<f64>)>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(seed, k as u64);
            let mut x = vec![0.0; d];
            let mut y = vec![0.0; d];
            for j in 0..d {
                let v = rng.gen_range(0.0..=1.0);
                if rng.gen_bool(0.5) {
                    x[j] = v;
                } else {
                    y[j] = v;
                }
            }
            let z: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..=1.0)).collect();
            let bad = |p: Vec<f64>| meet(&p, &y).iter().any(|v| v.abs() > CHECK_TOL);
            if bad(m.product(&z, &x)) || bad(m.product(&x, &z)) {
                Some((x, y, z))
            } else {
                None
            }
        })
        .collect();
    FAlgebraReport {
        trials,
        violations: outcomes.iter().filter(|o| o.is_some()).count(),
        witness: outcomes.into_iter().flatten().next(),
    }
}

/// Outcome of a yes/no structural check with an optional witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict<W> {
    pub holds: bool,
    pub witness: Option<W>,
}

/// Searches for `x ≠ 0` with `x·x = 0`: every basis vector first (decisive
/// for pointwise-weighted products), then `trials` random elements.
pub fn check_semiprime<M: FAlgebraModel + ?Sized>(
    m: &M,
    trials: usize,
    seed: u64,
) -> Verdict<Vec<f64>> {
    let d = m.dim();
    let nilpotent = |x: &Vec<f64>| {
        sup_norm(x) > 0.0 && sup_norm(&m.product(x, x)) <= CHECK_TOL * sup_norm(x).powi(2)
    };
    let witness = (0..d)
        .map(|j| basis(d, j))
        .find(|x| nilpotent(x))
        .or_else(|| {
            (0..trials).into_par_iter().find_map_first(|k| {
                let mut rng = trial_rng(seed, k as u64);
                let x = m.random_element(&mut rng).into_coords();
                nilpotent(&x).then_some(x)
            })
        });
    Verdict {
        holds: witness.is_none(),
        witness,
    }
}

/// Tests `ab = 0 ⇔ |a| ∧ |b| = 0` on basis pairs and on random elements with
/// random supports.
pub fn check_fstar<M: FAlgebraModel + ?Sized>(
    m: &M,
    trials: usize,
    seed: u64,
) -> Verdict<(Vec<f64>, Vec<f64>)> {
    let d = m.dim();
    let fails = |a: &Vec<f64>, b: &Vec<f64>| {
        let scale = sup_norm(a) * sup_norm(b);
        let product_zero = sup_norm(&m.product(a, b)) <= CHECK_TOL * scale;
        let disjoint = sup_norm(&meet(&abs(a), &abs(b))) == 0.0;
        product_zero != disjoint
    };
    let pairs = (0..d).flat_map(|i| (i..d).map(move |j| (basis(d, i), basis(d, j))));
    let witness = pairs.into_iter().find(|(a, b)| fails(a, b)).or_else(|| {
        (0..trials).into_par_iter().find_map_first(|k| {
            let mut rng = trial_rng(seed, k as u64);
            let mut sparse = || -> Vec<f64> {
                (0..d)
                    .map(|_| {
                        if rng.gen_bool(0.5) {
                            rng.gen_range(-1.0..=1.0)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            };
            let (a, b) = (sparse(), sparse());
            fails(&a, &b).then_some((a, b))
        })
    });
    Verdict {
        holds: witness.is_none(),
        witness,
    }
}

/// Tests `‖xy‖∞ ≤ ‖x‖∞‖y‖∞` on basis pairs and random pairs.
pub fn check_submultiplicative<M: FAlgebraModel + ?Sized>(
    m: &M,
    trials: usize,
    seed: u64,
) -> Verdict<(Vec<f64>, Vec<f64>)> {
    let d = m.dim();
    let fails = |x: &Vec<f64>, y: &Vec<f64>| {
        sup_norm(&m.product(x, y)) > sup_norm(x) * sup_norm(y) * (1.0 + CHECK_TOL)
    };
    let pairs = (0..d).flat_map(|i| (0..d).map(move |j| (basis(d, i), basis(d, j))));
    let witness = pairs.into_iter().find(|(a, b)| fails(a, b)).or_else(|| {
        (0..trials).into_par_iter().find_map_first(|k| {
            let mut rng = trial_rng(seed, k as u64);
            let x = m.random_element(&mut rng).into_coords();
            let y = m.random_element(&mut rng).into_coords();
            fails(&x, &y).then_some((x, y))
        })
    });
    Verdict {
        holds: witness.is_none(),
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::rewrite::product_kill;

    /// `(x∘y)ⱼ = xⱼ₊₁yⱼ₊₁` cyclically: bilinear but not support preserving.
    struct ShiftedProduct {
        id: u64,
        d: usize,
    }

    impl FAlgebraModel for ShiftedProduct {
        fn id(&self) -> u64 {
            self.id
        }
        fn dim(&self) -> usize {
            self.d
        }
        fn product(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
            (0..self.d)
                .map(|j| x[(j + 1) % self.d] * y[(j + 1) % self.d])
                .collect()
        }
        fn name(&self) -> String {
            "shifted".into()
        }
    }

    #[test]
    fn model_family_transports_identities() {
        let family = random_model_family(5, 4, 3);
        assert_eq!(family.len(), 11);
        assert_eq!(family, random_model_family(5, 4, 3));
        let id = parse("pos(x)*neg(x)").unwrap();
        let non = parse("x \\/ 0").unwrap();
        for spec in &family {
            let m = spec.build().unwrap();
            assert!(vanishes_in_model(&id, m.as_ref(), 30, 0, 1e-12).vanishes);
        }
        let m = family[0].build().unwrap();
        let r = vanishes_in_model(&non, m.as_ref(), 30, 0, 1e-12);
        assert!(!r.vanishes && r.at.len() == 1);
    }

    #[test]
    fn weighted_product_example() {
        let m = WeightedGridModel::new(vec![0.5]).unwrap();
        let a = Assignment::new()
            .with("x", m.element(vec![2.0]).unwrap())
            .with("y", m.element(vec![3.0]).unwrap());
        let v = eval_in_model(&parse("x*y").unwrap(), &m, &a).unwrap();
        assert_eq!(v.coords(), &[3.0]);
    }

    #[test]
    fn zero_product_squares_vanish() {
        let m = ZeroProductModel::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = Assignment::new().with("x", m.random_element(&mut rng));
        let v = eval_in_model(&parse("x*x").unwrap(), &m, &a).unwrap();
        assert_eq!(v.coords(), &[0.0; 4]);
    }

    #[test]
    fn mixing_models_is_an_error() {
        let m1 = DiagonalAlgebra::new(vec![1.0]).unwrap();
        let m2 = DiagonalAlgebra::new(vec![1.0]).unwrap();
        let a = Assignment::new().with("x", m2.element(vec![1.0]).unwrap());
        assert!(matches!(
            eval_in_model(&Expr::var("x"), &m1, &a),
            Err(EvalError::ModelMismatch { .. })
        ));
        assert!(m1.element(vec![1.0, 2.0]).is_err());
        assert!(matches!(
            eval_in_model(&Expr::var("y"), &m1, &Assignment::new()),
            Err(EvalError::MissingVariable(_))
        ));
    }

    #[test]
    fn weight_ranges_are_enforced() {
        assert!(DiagonalAlgebra::new(vec![0.0, 1.0]).is_err());
        assert!(DiagonalAlgebra::new(vec![0.3, 1.0]).is_ok());
        assert!(WeightedGridModel::new(vec![0.0, 0.5]).is_ok());
        assert!(WeightedGridModel::new(vec![1.5]).is_err());
        assert!(ZeroProductModel::new(0).is_err());
    }

    #[test]
    fn f_algebra_condition_holds_and_detects_breakage() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in [
            Box::new(DiagonalAlgebra::random(6, &mut rng)) as Box<dyn FAlgebraModel>,
            Box::new(WeightedGridModel::random(6, &mut rng)),
            Box::new(ZeroProductModel::new(6).unwrap()),
        ] {
            let r = check_f_algebra_condition(m.as_ref(), 200, 3);
            assert_eq!(r.violations, 0, "{}", m.name());
        }
        let broken = ShiftedProduct {
            id: fresh_id(),
            d: 5,
        };
        let r = check_f_algebra_condition(&broken, 200, 3);
        assert!(r.violations > 0);
        assert!(r.witness.is_some());
    }

    #[test]
    fn semiprime_examples() {
        assert!(check_semiprime(&DiagonalAlgebra::new(vec![0.3, 1.0]).unwrap(), 50, 1).holds);
        let v = check_semiprime(&WeightedGridModel::new(vec![0.0, 0.5]).unwrap(), 50, 1);
        assert!(!v.holds);
        assert_eq!(v.witness, Some(vec![1.0, 0.0]));
        assert!(!check_semiprime(&ZeroProductModel::new(1).unwrap(), 50, 1).holds);
    }

    #[test]
    fn fstar_agrees_with_semiprime() {
        let m = WeightedGridModel::new(vec![0.4, 0.0, 1.0]).unwrap();
        let v = check_fstar(&m, 100, 4);
        assert!(!v.holds);
        let (a, b) = v.witness.unwrap();
        assert!(a[1] != 0.0 && b[1] != 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for k in 0..20 {
            let d = rng.gen_range(1..6);
            let mut w: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..=1.0)).collect();
            if k % 2 == 0 {
                w[rng.gen_range(0..d)] = 0.0;
            }
            let m = WeightedGridModel::new(w).unwrap();
            assert_eq!(
                check_fstar(&m, 100, k).holds,
                check_semiprime(&m, 100, k).holds
            );
        }
    }

    #[test]
    fn submultiplicativity() {
        assert!(
            check_submultiplicative(&DiagonalAlgebra::new(vec![1.0, 1.0]).unwrap(), 100, 1).holds
        );
        assert!(!check_submultiplicative(&WeightedGridModel::unchecked(vec![2.0]), 100, 1).holds);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..100 {
            let m = DiagonalAlgebra::random(rng.gen_range(1..8), &mut rng);
            assert!(check_submultiplicative(&m, 20, k).holds);
        }
    }

    #[test]
    fn zero_product_collapse_is_bit_exact() {
        let m = ZeroProductModel::new(3).unwrap();
        let g = crate::expr::ExprGenerator::new(&["x", "y"], 8);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let e = g.sample(&mut rng);
            let a = Assignment::new()
                .with("x", m.random_element(&mut rng))
                .with("y", m.random_element(&mut rng));
            let lhs = eval_in_model(&e, &m, &a).unwrap();
            let rhs = eval_in_model(&product_kill(&e), &m, &a).unwrap();
            let bits =
                |v: &ModelElement| v.coords().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            assert_eq!(bits(&lhs), bits(&rhs), "{e}");
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let s: ModelSpec =
            serde_json::from_str(r#"{"kind":"diagonal","weights":[0.5,1.0]}"#).unwrap();
        assert_eq!(
            s,
            ModelSpec::Diagonal {
                weights: vec![0.5, 1.0]
            }
        );
        assert_eq!(s.build().unwrap().dim(), 2);
        let z = serde_json::to_string(&ModelSpec::ZeroProduct { points: 3 }).unwrap();
        assert_eq!(z, r#"{"kind":"zero_product","points":3}"#);
        let bad: ModelSpec =
            serde_json::from_str(r#"{"kind":"weighted_grid","weights":[2.0]}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
