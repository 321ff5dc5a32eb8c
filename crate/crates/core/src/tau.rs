//! Two-sided estimates of the free norm of `Φ(η_{x_1}, …, η_{x_k})` in the
//! free Banach f-algebra over `ℓ₁ⁿ`.
//!
//! Lower bounds come from contractive operators `T: ℓ₁ⁿ → A` into diagonal
//! algebras with the sup norm: `‖T̂f‖∞ ≤ ‖f‖` for each of them. Candidates are
//! the level-set discretizations of the cylinder model and random diagonal
//! algebras improved by coordinate resampling. The upper bound is the
//! polynomial majorant at the generator norms.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discretizer::{discretize, DiscretizeError};
use crate::expr::{Assignment, CompiledExpr, EvalError, Expr};
use crate::free::Generators;
use crate::models::{sup_norm, DiagonalAlgebra, ModelSemantics};
use crate::rewrite::{polynomial_majorant, Polynomial};
use crate::star::{CylinderGrid, StarError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TauError {
    #[error("operator column {column} has sup norm {norm} > 1")]
    NotContractive { column: usize, norm: f64 },
    #[error("operator shape does not match: {0}")]
    Shape(String),
    #[error("lower bound {lower} exceeds upper bound {upper}")]
    Unsound { lower: f64, upper: f64 },
    #[error("expression contains a product")]
    HasProduct,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Star(#[from] StarError),
}

/// `T: ℓ₁ⁿ → (ℝˡ, ∘_c, ‖·‖∞)` given by the images of the basis vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorIntoAlgebra {
    /// Diagonal product weights `c_j ∈ (0, 1]`.
    pub weights: Vec<f64>,
    /// `columns[i] = T e_i`, each of length `l`.
    pub columns: Vec<Vec<f64>>,
    /// Where the operator came from.
    pub source: String,
}

impl OperatorIntoAlgebra {
    pub fn atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn domain_dim(&self) -> usize {
        self.columns.len()
    }

    /// `‖T‖ = maxᵢ ‖T eᵢ‖∞ ≤ 1`, with valid weights and matching shapes.
    pub fn certify(&self) -> Result<(), TauError> {
        DiagonalAlgebra::new(self.weights.clone()).map_err(|e| TauError::Shape(e.to_string()))?;
        for (column, c) in self.columns.iter().enumerate() {
            if c.len() != self.weights.len() {
                return Err(TauError::Shape(format!(
                    "column {column} has length {}",
                    c.len()
                )));
            }
            let norm = sup_norm(c);
            if !(norm <= 1.0) {
                return Err(TauError::NotContractive { column, norm });
            }
        }
        Ok(())
    }

    /// The same operator on `ℓ₁^m ⊇ ℓ₁ⁿ`, sending the new basis vectors to 0.
    pub fn pad(&self, m: usize) -> Self {
        let mut columns = self.columns.clone();
        columns.resize(m.max(columns.len()), vec![0.0; self.atoms()]);
        OperatorIntoAlgebra {
            weights: self.weights.clone(),
            columns,
            source: format!("{} (padded)", self.source),
        }
    }

    /// `T x = Σᵢ xᵢ T eᵢ`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.atoms()];
        for (xi, col) in x.iter().zip(&self.columns) {
            if *xi != 0.0 {
                for (o, c) in out.iter_mut().zip(col) {
                    *o += xi * c;
                }
            }
        }
        out
    }
}

/// `Φ` compiled against fixed generator images.
struct Target {
    prog: CompiledExpr,
    gens: Vec<Vec<f64>>,
}

impl Target {
    fn new(e: &Expr, gens: &Generators, n: usize) -> Result<Self, TauError> {
        let vars = e.variables();
        let mut cols = Vec::with_capacity(vars.len());
        for v in &vars {
            let x = gens
                .get(v)
                .ok_or_else(|| EvalError::MissingVariable(v.clone()))?;
            if x.len() != n {
                return Err(EvalError::DimensionMismatch {
                    expected: n,
                    found: x.len(),
                }
                .into());
            }
            cols.push(x.clone());
        }
        Ok(Target {
            prog: e.compile(&vars)?,
            gens: cols,
        })
    }

    /// `‖T̂Φ‖∞`; `T` must already be certified.
    fn value(&self, t: &OperatorIntoAlgebra, alg: &DiagonalAlgebra) -> f64 {
        let inputs: Vec<Vec<f64>> = self.gens.iter().map(|x| t.apply(x)).collect();
        sup_norm(&self.prog.eval(&ModelSemantics::new(alg), &inputs))
    }
}

fn domain_dim(gens: &Generators) -> Result<usize, TauError> {
    let mut dims = gens.iter().map(|(_, x)| x.len());
    let n = dims.next().unwrap_or(0);
    if dims.any(|d| d != n) {
        return Err(TauError::Shape(
            "generator images have different lengths".into(),
        ));
    }
    Ok(n)
}

/// `‖T̂Φ‖∞` for one certified operator.
pub fn evaluate_witness(
    e: &Expr,
    gens: &Generators,
    t: &OperatorIntoAlgebra,
) -> Result<f64, TauError> {
    t.certify()?;
    let n = t.domain_dim();
    if domain_dim(gens)? > n {
        return Err(TauError::Shape(format!("operator acts on l1^{n}")));
    }
    let padded: Generators = gens
        .iter()
        .map(|(k, x)| {
            let mut x = x.clone();
            x.resize(n, 0.0);
            (k.clone(), x)
        })
        .collect();
    let target = Target::new(e, &padded, n)?;
    let alg = DiagonalAlgebra::new(t.weights.clone()).expect("certified");
    Ok(target.value(t, &alg))
}

/// Search settings for [`tau_lower`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TauConfig {
    /// Total coordinate-resampling steps over all chains.
    pub search_iters: usize,
    /// Independent search chains; fixed so that more iterations only extend
    /// each chain.
    pub chains: usize,
    /// Upper bound on the dimension of random target algebras.
    pub max_atoms: usize,
    /// Meshes for the discretizer-built operators.
    pub deltas: Vec<f64>,
    /// Cylinder grid: number of `r` levels and values per free face axis.
    pub grid_r: usize,
    pub grid_sphere: usize,
    pub seed: u64,
    /// Operators evaluated in addition to the search.
    #[serde(skip)]
    pub replay: Vec<OperatorIntoAlgebra>,
}

impl Default for TauConfig {
    fn default() -> Self {
        TauConfig {
            search_iters: 10_000,
            chains: 8,
            max_atoms: 8,
            deltas: vec![2f64.powi(-5), 2f64.powi(-6), 2f64.powi(-7)],
            grid_r: 33,
            grid_sphere: 8,
            seed: 0,
            replay: Vec::new(),
        }
    }
}

/// Best lower bound found and its witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauEstimate {
    pub value: f64,
    pub witness: OperatorIntoAlgebra,
    pub candidates: usize,
}

/// The level-set operator `T eᵢ = (ηᵢ/(1+δ))_d` on the default cylinder grid.
pub fn discretizer_operator(
    n: usize,
    delta: f64,
    grid_r: usize,
    grid_sphere: usize,
) -> Result<OperatorIntoAlgebra, TauError> {
    let grid = Arc::new(CylinderGrid::uniform(n, grid_r, grid_sphere)?);
    let scale = 1.0 / (1.0 + delta);
    let functions: Vec<(String, Vec<f64>)> = (0..n)
        .map(|i| {
            (
                format!("e{}", i + 1),
                (0..grid.len()).map(|k| scale * grid.u(k)[i]).collect(),
            )
        })
        .collect();
    let weight: Vec<f64> = (0..grid.len()).map(|k| grid.r(k)).collect();
    let d = discretize(&functions, &weight, delta)?;
    Ok(OperatorIntoAlgebra {
        weights: d.weight_coeffs.clone(),
        columns: d.functions.iter().map(|f| f.coeffs()).collect(),
        source: format!("discretizer delta={delta} grid={grid_r}x{grid_sphere}"),
    })
}

/// Draws from `[lo, 1]`, hitting the endpoints with probability 0.1 each
/// side so that extreme operators are reachable.
fn draw<R: Rng>(rng: &mut R, lo: f64, open_low: bool) -> f64 {
    let p: f64 = rng.gen();
    if p < 0.1 {
        1.0
    } else if p < 0.2 && !open_low {
        lo
    } else if open_low {
        1.0 - rng.gen::<f64>() * (1.0 - lo)
    } else {
        rng.gen_range(lo..=1.0)
    }
}

fn search_chain(
    target: &Target,
    n: usize,
    cfg: &TauConfig,
    chain: usize,
    steps: usize,
) -> (f64, OperatorIntoAlgebra) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chain as u64);
    let l = rng.gen_range(1..=cfg.max_atoms.max(1));
    let mut t = OperatorIntoAlgebra {
        weights: (0..l).map(|_| draw(&mut rng, 0.0, true)).collect(),
        columns: (0..n)
            .map(|_| (0..l).map(|_| draw(&mut rng, -1.0, false)).collect())
            .collect(),
        source: format!("random search chain {chain}"),
    };
    let eval = |t: &OperatorIntoAlgebra| {
        let alg = DiagonalAlgebra::new(t.weights.clone()).expect("weights drawn in (0, 1]");
        target.value(t, &alg)
    };
    let mut best = eval(&t);
    for _ in 0..steps {
        let k = rng.gen_range(0..l * (n + 1));
        let mut cand = t.clone();
        if k < l {
            cand.weights[k] = draw(&mut rng, 0.0, true);
        } else {
            let (i, j) = ((k - l) / l, (k - l) % l);
            cand.columns[i][j] = draw(&mut rng, -1.0, false);
        }
        let v = eval(&cand);
        if v >= best {
            best = v;
            t = cand;
        }
    }
    (best, t)
}

/// Largest `‖T̂Φ‖∞` over discretizer operators, replayed operators and
/// random-search chains.
///
/// Ties keep the earliest candidate in that order, so the result does not
/// depend on the number of threads.
pub fn tau_lower(e: &Expr, gens: &Generators, cfg: &TauConfig) -> Result<TauEstimate, TauError> {
    let n = domain_dim(gens)?.max(1);
    let target = Target::new(e, gens, n)?;
    let mut pool: Vec<(f64, OperatorIntoAlgebra)> = Vec::new();
    for &delta in &cfg.deltas {
        let t = discretizer_operator(n, delta, cfg.grid_r, cfg.grid_sphere)?;
        t.certify()?;
        let alg = DiagonalAlgebra::new(t.weights.clone()).expect("certified");
        pool.push((target.value(&t, &alg), t));
    }
    for t in &cfg.replay {
        pool.push((evaluate_witness(e, gens, t)?, t.clone()));
    }
    if cfg.search_iters > 0 && cfg.chains > 0 {
        let steps = cfg.search_iters.div_ceil(cfg.chains);
        let found: Vec<(f64, OperatorIntoAlgebra)> = (0..cfg.chains)
            .into_par_iter()
            .map(|c| search_chain(&target, n, cfg, c, steps))
            .collect();
        for (v, t) in found {
            t.certify()?;
            pool.push((v, t));
        }
    }
    let candidates = pool.len();
    let (value, witness) = pool
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .unwrap_or_else(|| {
            let t = OperatorIntoAlgebra {
                weights: vec![1.0],
                columns: vec![vec![0.0]; n],
                source: "zero operator".into(),
            };
            (0.0, t)
        });
    Ok(TauEstimate {
        value,
        witness,
        candidates,
    })
}

/// The polynomial majorant of `Φ` at `‖x_v‖` for each variable.
pub fn rho_upper(e: &Expr, gen_norms: &Assignment<f64>) -> f64 {
    polynomial_majorant(e).eval(&|v: &String| gen_norms.get(v).copied().unwrap_or(0.0))
}

/// `ℓ₁` norms of the generator images.
pub fn generator_norms(gens: &Generators) -> Assignment<f64> {
    gens.map(|x| x.iter().map(|c| c.abs()).sum())
}

/// `lower ≤ ‖Φ‖ ≤ upper`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormSandwich {
    pub lower: f64,
    pub upper: f64,
    pub witness: OperatorIntoAlgebra,
    /// The majorant polynomial in `t_v = ‖x_v‖`.
    pub majorant: String,
    pub candidates: usize,
}

fn majorant_text(p: &Polynomial<String>) -> String {
    if p.is_zero() {
        return "0".into();
    }
    p.terms()
        .map(|(m, c)| {
            let vars: Vec<String> = m
                .factors()
                .iter()
                .map(|(v, k)| {
                    if *k == 1 {
                        format!("t_{v}")
                    } else {
                        format!("t_{v}^{k}")
                    }
                })
                .collect();
            if c == 1.0 {
                vars.join("*")
            } else {
                format!("{c}*{}", vars.join("*"))
            }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Combines [`tau_lower`] and [`rho_upper`]; fails if `lower > upper + 1e-12`.
pub fn norm_sandwich(
    e: &Expr,
    gens: &Generators,
    cfg: &TauConfig,
) -> Result<NormSandwich, TauError> {
    let est = tau_lower(e, gens, cfg)?;
    let upper = rho_upper(e, &generator_norms(gens));
    if est.value > upper + 1e-12 {
        return Err(TauError::Unsound {
            lower: est.value,
            upper,
        });
    }
    Ok(NormSandwich {
        lower: est.value,
        upper,
        witness: est.witness,
        majorant: majorant_text(&polynomial_majorant(e)),
        candidates: est.candidates,
    })
}

/// Search settings for [`fbl_norm_lower`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FblConfig {
    pub tuple_size: usize,
    pub iters: usize,
    pub seed: u64,
}

impl Default for FblConfig {
    fn default() -> Self {
        FblConfig {
            tuple_size: 4,
            iters: 5_000,
            seed: 0,
        }
    }
}

/// Best tuple of functionals found by [`fbl_norm_lower`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FblEstimate {
    pub value: f64,
    pub tuple: Vec<Vec<f64>>,
}

/// Rescales each column `j` so that `Σᵢ |x*ᵢ(e_j)| ≤ 1`.
fn project(tuple: &mut [Vec<f64>], n: usize) {
    for j in 0..n {
        let s: f64 = tuple.iter().map(|x| x[j].abs()).sum();
        if s > 1.0 {
            tuple.iter_mut().for_each(|x| x[j] /= s);
            while tuple.iter().map(|x| x[j].abs()).sum::<f64>() > 1.0 {
                tuple.iter_mut().for_each(|x| x[j] *= 1.0 - f64::EPSILON);
            }
        }
    }
}

/// `sup Σᵢ |f(x*ᵢ)|` over tuples with `max_j Σᵢ |x*ᵢ(e_j)| ≤ 1`, by
/// evaluating canonical tuples and projected random search.
pub fn fbl_norm_lower(
    e: &Expr,
    gens: &Generators,
    cfg: &FblConfig,
) -> Result<FblEstimate, TauError> {
    if e.contains_product() {
        return Err(TauError::HasProduct);
    }
    let n = domain_dim(gens)?.max(1);
    let target = Target::new(e, gens, n)?;
    let m = cfg.tuple_size.max(n).max(1);
    let value = |tuple: &[Vec<f64>]| -> f64 {
        tuple
            .iter()
            .map(|xs| {
                let inputs: Vec<f64> = target
                    .gens
                    .iter()
                    .map(|x| xs.iter().zip(x).map(|(a, b)| a * b).sum())
                    .collect();
                target.prog.eval_real(&inputs).abs()
            })
            .sum()
    };
    let mut canon: Vec<Vec<Vec<f64>>> = Vec::new();
    let unit = |i: usize, s: f64| {
        let mut v = vec![0.0; n];
        v[i] = s;
        v
    };
    let pad = |mut t: Vec<Vec<f64>>| {
        t.resize(m, vec![0.0; n]);
        t
    };
    canon.push(pad((0..n).map(|i| unit(i, 1.0)).collect()));
    canon.push(pad((0..n).map(|i| unit(i, -1.0)).collect()));
    for mask in 0..(1u32 << n.min(10)) {
        let signs: Vec<f64> = (0..n)
            .map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        canon.push(pad(vec![signs]));
    }
    let mut best = canon
        .into_iter()
        .map(|t| (value(&t), t))
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("canonical tuples exist");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cur = best.clone();
    for _ in 0..cfg.iters {
        let mut cand = cur.1.clone();
        let (i, j) = (rng.gen_range(0..m), rng.gen_range(0..n));
        cand[i][j] = rng.gen_range(-1.0..=1.0);
        project(&mut cand, n);
        let v = value(&cand);
        if v >= cur.0 {
            cur = (v, cand);
            if cur.0 > best.0 {
                best = cur.clone();
            }
        }
    }
    Ok(FblEstimate {
        value: best.0,
        tuple: best.1,
    })
}
