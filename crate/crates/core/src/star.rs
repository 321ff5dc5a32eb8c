//! The weighted model `C([0,1] × S∞ⁿ)` with `(f ⋆ g)(r,u) = r·f(r,u)·g(r,u)`,
//! sampled on a finite cylinder grid.
//!
//! Generators are `η_x(r,u) = u·x`; an expression `e` with generator images
//! is carried to `T̂e(r,u) = e(r·u·x)/r` for `r > 0` and to the product-killed
//! expression `e₀(u·x)` on the `r = 0` row.

use std::io::{self, Write};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Assignment, EvalError, Expr, Semantics};
use crate::free::Generators;
use crate::rewrite::product_kill;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StarError {
    #[error("r levels must lie in [0, 1], be strictly increasing and include 0 and 1")]
    BadLevels,
    #[error("sphere point {0} is not on the unit sphere of the sup norm")]
    OffSphere(usize),
    #[error("sphere point is zero")]
    ZeroPoint,
    #[error("sphere points must share one positive dimension")]
    BadDimension,
    #[error("functions live on different grids")]
    GridMismatch,
    #[error("unit candidate family is empty")]
    EmptyFamily,
    #[error("vector {0} does not have unit l1 norm")]
    NotUnitVector(usize),
    #[error("unit function is not strictly positive at point {0}")]
    NonPositiveUnit(usize),
    #[error("at least {0} points per axis are needed")]
    TooFewPoints(usize),
}

/// `{r levels} × {sphere points}`; point `k` is `(r[k / S], u[k % S])`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderGrid {
    r_levels: Vec<f64>,
    sphere: Vec<Vec<f64>>,
    on_cube: bool,
}

fn check_levels(r: &[f64]) -> Result<(), StarError> {
    let increasing = r.windows(2).all(|w| w[0] < w[1]);
    if r.first() != Some(&0.0) || r.last() != Some(&1.0) || !increasing {
        return Err(StarError::BadLevels);
    }
    Ok(())
}

fn check_dims(sphere: &[Vec<f64>]) -> Result<usize, StarError> {
    let n = sphere.first().map_or(0, Vec::len);
    if n == 0 || sphere.iter().any(|u| u.len() != n) {
        return Err(StarError::BadDimension);
    }
    Ok(n)
}

fn sup(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `per_axis` uniform values on `[-1, 1]`, endpoints included.
fn face_axis(per_axis: usize) -> Vec<f64> {
    if per_axis == 1 {
        return vec![0.0];
    }
    (0..per_axis)
        .map(|i| -1.0 + 2.0 * i as f64 / (per_axis - 1) as f64)
        .collect()
}

impl CylinderGrid {
    /// Grid on `[0,1] × S∞ⁿ`; every sphere point must have `‖u‖∞ = 1` exactly.
    pub fn new(r_levels: Vec<f64>, sphere: Vec<Vec<f64>>) -> Result<Self, StarError> {
        check_levels(&r_levels)?;
        check_dims(&sphere)?;
        if let Some(i) = sphere.iter().position(|u| sup(u) != 1.0) {
            return Err(StarError::OffSphere(i));
        }
        Ok(CylinderGrid {
            r_levels,
            sphere,
            on_cube: true,
        })
    }

    /// Grid on `[0,1] × S` for the unit sphere `S` of another dual norm.
    pub fn dual_sphere(r_levels: Vec<f64>, sphere: Vec<Vec<f64>>) -> Result<Self, StarError> {
        check_levels(&r_levels)?;
        check_dims(&sphere)?;
        if sphere.iter().any(|u| sup(u) == 0.0) {
            return Err(StarError::ZeroPoint);
        }
        Ok(CylinderGrid {
            r_levels,
            sphere,
            on_cube: false,
        })
    }

    /// `r_count` uniform levels and, on each of the `2n` faces of `[-1,1]ⁿ`, a
    /// uniform lattice with `per_axis` values on each free axis.
    ///
    /// A point lying on several faces is kept only on the first face `k` with
    /// `|u_k| = 1`.
    pub fn uniform(n: usize, r_count: usize, per_axis: usize) -> Result<Self, StarError> {
        if r_count < 2 {
            return Err(StarError::BadLevels);
        }
        if n > 1 && per_axis < 2 {
            return Err(StarError::TooFewPoints(2));
        }
        let r_levels = (0..r_count)
            .map(|i| i as f64 / (r_count - 1) as f64)
            .collect();
        let axis = face_axis(if n == 1 { 1 } else { per_axis });
        let mut sphere = Vec::new();
        for k in 0..n {
            for sign in [-1.0, 1.0] {
                let free = n - 1;
                let total = axis.len().pow(free as u32);
                for mut idx in 0..total {
                    let mut u = vec![0.0; n];
                    for j in (0..n).rev().filter(|&j| j != k) {
                        u[j] = axis[idx % axis.len()];
                        idx /= axis.len();
                    }
                    u[k] = sign;
                    if (0..k).any(|j| u[j].abs() == 1.0) {
                        continue;
                    }
                    sphere.push(u);
                }
            }
        }
        Self::new(r_levels, sphere)
    }

    /// 33 levels × 8 values per free axis.
    pub fn default_for(n: usize) -> Self {
        Self::uniform(n, 33, 8).expect("default parameters are valid")
    }

    pub fn dim(&self) -> usize {
        self.sphere[0].len()
    }

    pub fn r_levels(&self) -> &[f64] {
        &self.r_levels
    }

    pub fn sphere_points(&self) -> &[Vec<f64>] {
        &self.sphere
    }

    pub fn on_cube(&self) -> bool {
        self.on_cube
    }

    pub fn len(&self) -> usize {
        self.r_levels.len() * self.sphere.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn r(&self, k: usize) -> f64 {
        self.r_levels[k / self.sphere.len()]
    }

    pub fn u(&self, k: usize) -> &[f64] {
        &self.sphere[k % self.sphere.len()]
    }
}

/// Values over the points of a [`CylinderGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct StarFunction {
    grid: Arc<CylinderGrid>,
    values: Vec<f64>,
}

fn same_grid(a: &Arc<CylinderGrid>, b: &Arc<CylinderGrid>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl StarFunction {
    pub fn from_fn(grid: &Arc<CylinderGrid>, f: impl Fn(f64, &[f64]) -> f64 + Sync) -> Self {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|k| f(grid.r(k), grid.u(k)))
            .collect();
        StarFunction {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_values(grid: &Arc<CylinderGrid>, values: Vec<f64>) -> Result<Self, StarError> {
        if values.len() != grid.len() {
            return Err(StarError::GridMismatch);
        }
        Ok(StarFunction {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &Arc<CylinderGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        sup(&self.values)
    }

    fn zip(&self, other: &Self, f: impl Fn(f64, f64, f64) -> f64) -> Result<Self, StarError> {
        if !same_grid(&self.grid, &other.grid) {
            return Err(StarError::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(k, (a, b))| f(self.grid.r(k), *a, *b))
            .collect();
        Ok(StarFunction {
            grid: self.grid.clone(),
            values,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self, StarError> {
        self.zip(other, |_, a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, StarError> {
        self.zip(other, |_, a, b| a - b)
    }

    pub fn join(&self, other: &Self) -> Result<Self, StarError> {
        self.zip(other, |_, a, b| a.max(b))
    }

    pub fn meet(&self, other: &Self) -> Result<Self, StarError> {
        self.zip(other, |_, a, b| a.min(b))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        StarFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    /// One row per grid point: `r,u1,…,un,value` after a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.grid.dim();
        let header: Vec<String> = std::iter::once("r".to_string())
            .chain((1..=n).map(|k| format!("u{k}")))
            .chain(["value".into()])
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for (k, v) in self.values.iter().enumerate() {
            write!(out, "{}", self.grid.r(k))?;
            for c in self.grid.u(k) {
                write!(out, ",{c}")?;
            }
            writeln!(out, ",{v}")?;
        }
        Ok(())
    }
}

/// `(f ⋆ g)(r,u) = r·f(r,u)·g(r,u)`.
pub fn star_product(f: &StarFunction, g: &StarFunction) -> Result<StarFunction, StarError> {
    f.zip(g, |r, a, b| r * a * b)
}

/// `η_x(r,u) = u·x`.
pub fn eta(x: &[f64], grid: &Arc<CylinderGrid>) -> Result<StarFunction, StarError> {
    if x.len() != grid.dim() {
        return Err(StarError::BadDimension);
    }
    Ok(StarFunction::from_fn(grid, |_, u| dot(u, x)))
}

/// The constant function `𝟙`.
pub fn one(grid: &Arc<CylinderGrid>) -> StarFunction {
    StarFunction {
        grid: grid.clone(),
        values: vec![1.0; grid.len()],
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pointwise lattice operations and the product `⋆` on one grid.
pub struct StarSemantics {
    grid: Arc<CylinderGrid>,
}

impl StarSemantics {
    pub fn new(grid: &Arc<CylinderGrid>) -> Self {
        StarSemantics { grid: grid.clone() }
    }
}

impl Semantics for StarSemantics {
    type Value = Vec<f64>;

    fn zero(&self) -> Vec<f64> {
        vec![0.0; self.grid.len()]
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
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(k, (x, y))| self.grid.r(k) * x * y)
            .collect()
    }
}

/// Evaluates `e` inside the star algebra with the given function values.
pub fn eval_in_star(
    e: &Expr,
    grid: &Arc<CylinderGrid>,
    a: &Assignment<StarFunction>,
) -> Result<StarFunction, EvalError> {
    for (_, f) in a.iter() {
        if !same_grid(&f.grid, grid) {
            return Err(EvalError::DimensionMismatch {
                expected: grid.len(),
                found: f.values.len(),
            });
        }
    }
    let raw = a.map(|f| f.values.clone());
    let values = e.eval(&StarSemantics::new(grid), &raw)?;
    Ok(StarFunction {
        grid: grid.clone(),
        values,
    })
}

/// `T̂e` on the grid: `e(r·u·x_v)/r` for `r > 0`, `e₀(u·x_v)` at `r = 0`
/// with `e₀` the product-killed expression.
pub fn hat_t_eval(
    e: &Expr,
    gens: &Generators,
    grid: &Arc<CylinderGrid>,
) -> Result<StarFunction, EvalError> {
    let vars = e.variables();
    let n = grid.dim();
    let mut cols = Vec::with_capacity(vars.len());
    for v in &vars {
        let x = gens
            .get(v)
            .ok_or_else(|| EvalError::MissingVariable(v.clone()))?;
        if x.len() != n {
            return Err(EvalError::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
        cols.push(x.clone());
    }
    let full = e.compile(&vars)?;
    let killed = product_kill(e).compile(&vars)?;
    let values = (0..grid.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; cols.len()],
            |inputs, k| {
                let (r, u) = (grid.r(k), grid.u(k));
                if r == 0.0 {
                    for (slot, x) in inputs.iter_mut().zip(&cols) {
                        *slot = dot(u, x);
                    }
                    killed.eval_real(inputs)
                } else {
                    for (slot, x) in inputs.iter_mut().zip(&cols) {
                        *slot = r * dot(u, x);
                    }
                    full.eval_real(inputs) / r
                }
            },
        )
        .collect();
    Ok(StarFunction {
        grid: grid.clone(),
        values,
    })
}

/// `e' = sup_{x∈F} |η_x|` with its grid minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCandidate {
    pub function: StarFunction,
    pub min: f64,
    /// `min ≥ 1/2`.
    pub accepted: bool,
}

/// Builds `sup_{x∈F} |η_x|` for `ℓ₁`-unit vectors `x`.
pub fn strong_unit_candidate(
    family: &[Vec<f64>],
    grid: &Arc<CylinderGrid>,
) -> Result<UnitCandidate, StarError> {
    if family.is_empty() {
        return Err(StarError::EmptyFamily);
    }
    for (i, x) in family.iter().enumerate() {
        if x.len() != grid.dim() {
            return Err(StarError::BadDimension);
        }
        let l1: f64 = x.iter().map(|c| c.abs()).sum();
        if (l1 - 1.0).abs() > 1e-12 {
            return Err(StarError::NotUnitVector(i));
        }
    }
    let function = StarFunction::from_fn(grid, |_, u| {
        family.iter().fold(0.0, |m, x| m.max(dot(u, x).abs()))
    });
    let min = function
        .values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(UnitCandidate {
        function,
        min,
        accepted: min >= 0.5,
    })
}

/// `max |f| / e'` over the grid.
pub fn unit_norm(f: &StarFunction, unit: &StarFunction) -> Result<f64, StarError> {
    if !same_grid(&f.grid, &unit.grid) {
        return Err(StarError::GridMismatch);
    }
    if let Some(k) = unit.values.iter().position(|v| !(*v > 0.0)) {
        return Err(StarError::NonPositiveUnit(k));
    }
    Ok(f.values
        .iter()
        .zip(&unit.values)
        .fold(0.0, |m, (a, e)| m.max(a.abs() / e)))
}

/// A product on grid values, for checking alternatives to `⋆`.
pub type GridProduct = dyn Fn(&CylinderGrid, &[f64], &[f64]) -> Vec<f64> + Sync;

fn weighted(grid: &CylinderGrid, a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(k, (x, y))| grid.r(k) * x * y)
        .collect()
}

/// Violation counts of [`check_star_axioms`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarAxiomReport {
    pub trials: usize,
    pub tol: f64,
    pub associativity: usize,
    pub commutativity: usize,
    pub f_algebra: usize,
    pub semiprime: usize,
    /// `‖𝟙⋆𝟙⋆𝟙 − r²‖∞`.
    pub one_cubed_error: f64,
}

impl StarAxiomReport {
    pub fn passed(&self) -> bool {
        self.associativity + self.commutativity + self.f_algebra + self.semiprime == 0
            && self.one_cubed_error <= self.tol
    }
}

/// Checks the axioms of `⋆` on random functions with values in `[-1, 1]`.
pub fn check_star_axioms(grid: &CylinderGrid, trials: usize, seed: u64) -> StarAxiomReport {
    check_star_axioms_with(grid, trials, seed, &weighted)
}

/// [`check_star_axioms`] for an arbitrary product on the grid.
///
/// Per trial: associativity and commutativity on three random functions;
/// the f-algebra condition `(z⋆x)∧y = 0` for `z ≥ 0` and positive `x, y` with
/// disjoint random supports; semiprimeness at `r > 0`, i.e. `f⋆f = 0` forces
/// `f = 0`, pointwise on a function with random zeros. Tolerance 1e-12.
pub fn check_star_axioms_with(
    grid: &CylinderGrid,
    trials: usize,
    seed: u64,
    product: &GridProduct,
) -> StarAxiomReport {
    let tol = 1e-12;
    let len = grid.len();
    let counts: Vec<[usize; 4]> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let mut random = |lo: f64| {
                (0..len)
                    .map(|_| rng.gen_range(lo..=1.0))
                    .collect::<Vec<f64>>()
            };
            let (f, g, h) = (random(-1.0), random(-1.0), random(-1.0));
            let z = random(0.0);
            let differs = |a: &[f64], b: &[f64]| a.iter().zip(b).any(|(x, y)| (x - y).abs() > tol);
            let assoc = differs(
                &product(grid, &product(grid, &f, &g), &h),
                &product(grid, &f, &product(grid, &g, &h)),
            );
            let comm = differs(&product(grid, &f, &g), &product(grid, &g, &f));
            let mut x = vec![0.0; len];
            let mut y = vec![0.0; len];
            for k in 0..len {
                if rng.gen_bool(0.5) {
                    x[k] = f[k].abs();
                } else {
                    y[k] = g[k].abs();
                }
            }
            let disjoint_fails = |p: Vec<f64>| p.iter().zip(&y).any(|(a, b)| a.min(*b).abs() > tol);
            let falg =
                disjoint_fails(product(grid, &z, &x)) || disjoint_fails(product(grid, &x, &z));
            let sparse: Vec<f64> = h
                .iter()
                .map(|v| if rng.gen_bool(0.3) { 0.0 } else { *v })
                .collect();
            let sq = product(grid, &sparse, &sparse);
            let semi = (0..len).any(|k| grid.r(k) > 0.0 && sq[k] == 0.0 && sparse[k] != 0.0);
            [assoc as usize, comm as usize, falg as usize, semi as usize]
        })
        .collect();
    let total = |i: usize| counts.iter().map(|c| c[i]).sum();
    let ones = vec![1.0; len];
    let cubed = product(grid, &product(grid, &ones, &ones), &ones);
    let one_cubed_error =
        (0..len).fold(0.0, |m: f64, k| m.max((cubed[k] - grid.r(k).powi(2)).abs()));
    StarAxiomReport {
        trials,
        tol,
        associativity: total(0),
        commutativity: total(1),
        f_algebra: total(2),
        semiprime: total(3),
        one_cubed_error,
    }
}

/// The homeomorphism `(r, u) ↦ (r, u/‖u‖∞)` from `[0,1] × S` onto
/// `[0,1] × S∞ⁿ`, as a relabelling of grid points.
#[derive(Debug, Clone)]
pub struct CubeTransport {
    source: Arc<CylinderGrid>,
    cube: Arc<CylinderGrid>,
}

/// `u / ‖u‖∞`.
pub fn to_cube(u: &[f64]) -> Result<Vec<f64>, StarError> {
    let s = sup(u);
    if s == 0.0 {
        return Err(StarError::ZeroPoint);
    }
    Ok(u.iter()
        .map(|x| if x.abs() == s { x.signum() } else { x / s })
        .collect())
}

impl CubeTransport {
    pub fn new(source: &Arc<CylinderGrid>) -> Result<Self, StarError> {
        let sphere = source
            .sphere
            .iter()
            .map(|u| to_cube(u))
            .collect::<Result<Vec<_>, _>>()?;
        let cube = CylinderGrid::new(source.r_levels.clone(), sphere)?;
        Ok(CubeTransport {
            source: source.clone(),
            cube: Arc::new(cube),
        })
    }

    pub fn cube_grid(&self) -> &Arc<CylinderGrid> {
        &self.cube
    }

    /// `f ∘ φ⁻¹`: the function on the cube grid taking `f`'s values.
    pub fn push(&self, f: &StarFunction) -> Result<StarFunction, StarError> {
        if !same_grid(&f.grid, &self.source) {
            return Err(StarError::GridMismatch);
        }
        StarFunction::from_values(&self.cube, f.values.clone())
    }

    /// `g ∘ φ`: the function on the source grid taking `g`'s values.
    pub fn pull(&self, g: &StarFunction) -> Result<StarFunction, StarError> {
        if !same_grid(&g.grid, &self.cube) {
            return Err(StarError::GridMismatch);
        }
        StarFunction::from_values(&self.source, g.values.clone())
    }
}

/// `η_{e1}`, `η_{e2}` and `𝟙⋆𝟙` on an `n = 2` grid, with file stems.
pub fn figure_surfaces(
    grid: &Arc<CylinderGrid>,
) -> Result<Vec<(&'static str, StarFunction)>, StarError> {
    if grid.dim() != 2 {
        return Err(StarError::BadDimension);
    }
    let u = one(grid);
    Ok(vec![
        ("eta_e1", eta(&[1.0, 0.0], grid)?),
        ("eta_e2", eta(&[0.0, 1.0], grid)?),
        ("one_star_one", star_product(&u, &u)?),
    ])
}
