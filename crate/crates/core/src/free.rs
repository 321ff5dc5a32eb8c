//! Concrete views of the free Archimedean f-algebra over `ℓ₁ⁿ`: evaluation
//! on the dual ball `[-1, 1]ⁿ`, grid surrogates for vanishing, the lattice
//! projection `P` and the small-scale limit `Φ(ελ)/ε → Φ₀(λ)`.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{parse, Assignment, CompiledExpr, EvalError, Expr};
use crate::rewrite::{polynomial_majorant, product_kill, simplify_zeros};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("points per axis must be odd and at least 3, got {0}")]
    BadAxisCount(usize),
    #[error("grid dimension must be positive")]
    ZeroDimension,
}

/// Uniform product grid on `[-1, 1]ⁿ`, the dual ball of `ℓ₁ⁿ`.
///
/// The odd axis count puts `0` and `±1` on every axis. Points are ordered
/// lexicographically with the last coordinate varying fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BallGrid {
    n: usize,
    m: usize,
}

impl BallGrid {
    pub fn new(n: usize, points_per_axis: usize) -> Result<Self, GridError> {
        if n == 0 {
            return Err(GridError::ZeroDimension);
        }
        if points_per_axis < 3 || points_per_axis % 2 == 0 {
            return Err(GridError::BadAxisCount(points_per_axis));
        }
        Ok(BallGrid {
            n,
            m: points_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn points_per_axis(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The `i`-th axis value; exact at `-1`, `0`, `1`.
    pub fn axis_value(&self, i: usize) -> f64 {
        let half = (self.m - 1) / 2;
        (i as f64 - half as f64) / half as f64
    }

    pub fn point(&self, mut index: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.n];
        for k in (0..self.n).rev() {
            p[k] = self.axis_value(index % self.m);
            index /= self.m;
        }
        p
    }
}

/// Values of a function sampled on a [`BallGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: BallGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn grid(&self) -> &BallGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Index and value of the first point attaining `max |f|`.
    pub fn argmax_abs(&self) -> (usize, f64) {
        self.values
            .iter()
            .enumerate()
            .fold(
                (0, 0.0),
                |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) },
            )
    }

    /// One CSV row per grid point: `x1,…,xn,value` after a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let header: Vec<String> = (1..=self.grid.n)
            .map(|k| format!("x{k}"))
            .chain(["value".into()])
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for (i, v) in self.values.iter().enumerate() {
            for c in self.grid.point(i) {
                write!(out, "{c},")?;
            }
            writeln!(out, "{v}")?;
        }
        Ok(())
    }
}

/// Generator images: each variable is sent to a vector of `ℓ₁ⁿ`.
pub type Generators = Assignment<Vec<f64>>;

/// `vₖ ↦ eₖ` in `ℓ₁ⁿ` with `n` the number of names.
pub fn standard_generators(names: &[&str]) -> Generators {
    let n = names.len();
    names
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let mut x = vec![0.0; n];
            x[k] = 1.0;
            (v.to_string(), x)
        })
        .collect()
}

fn compile_with_gens(
    e: &Expr,
    gens: &Generators,
    n: usize,
) -> Result<(CompiledExpr, Vec<Vec<f64>>), EvalError> {
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
            });
        }
        cols.push(x.clone());
    }
    Ok((e.compile(&vars)?, cols))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `x* ↦ e(x*(x_v) for each v)` on every grid point.
pub fn iota_eval(e: &Expr, gens: &Generators, grid: &BallGrid) -> Result<GridFunction, EvalError> {
    let (prog, cols) = compile_with_gens(e, gens, grid.n)?;
    let values = (0..grid.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; cols.len()],
            |inputs, i| {
                let p = grid.point(i);
                for (slot, x) in inputs.iter_mut().zip(&cols) {
                    *slot = dot(&p, x);
                }
                prog.eval_real(inputs)
            },
        )
        .collect();
    Ok(GridFunction {
        grid: *grid,
        values,
    })
}

/// Result of [`vanishes_on_ball`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallVanishing {
    pub vanishes: bool,
    pub max_residual: f64,
    /// Grid point attaining the residual.
    pub at: Vec<f64>,
}

/// Grid surrogate for `f|_{B_{E*}} = 0`: true iff `max |ι f| ≤ tol`.
pub fn vanishes_on_ball(
    e: &Expr,
    gens: &Generators,
    grid: &BallGrid,
    tol: f64,
) -> Result<BallVanishing, EvalError> {
    let f = iota_eval(e, gens, grid)?;
    let (i, r) = f.argmax_abs();
    Ok(BallVanishing {
        vanishes: r <= tol,
        max_residual: r,
        at: grid.point(i),
    })
}

/// Sampling plan for [`vanishes_on_reals`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealSampling {
    /// Half-width `R` of the cube `[-R, R]ⁿ`.
    pub scale: f64,
    /// Axis points of the dense grid; lowered (kept odd) when the grid would
    /// exceed `max_grid_points`.
    pub points_per_axis: usize,
    pub max_grid_points: usize,
    /// Extra uniform random points in the cube.
    pub samples: usize,
    pub seed: u64,
    /// Bound on `|e(a)| / (1 + p(|a|))` with `p` the polynomial majorant.
    pub tol: f64,
}

impl Default for RealSampling {
    /// `[-3, 3]ⁿ`, 201 points per axis up to 201³ points, 10⁴ samples,
    /// seed 0, tolerance 1e-9.
    fn default() -> Self {
        RealSampling {
            scale: 3.0,
            points_per_axis: 201,
            max_grid_points: 201 * 201 * 201,
            samples: 10_000,
            seed: 0,
            tol: 1e-9,
        }
    }
}

impl RealSampling {
    fn axis_points(&self, n: usize) -> usize {
        let mut m = self.points_per_axis.max(3);
        while n > 0 && m > 3 && (m as f64).powi(n as i32) > self.max_grid_points as f64 {
            m -= 1;
        }
        if m % 2 == 0 {
            m - 1
        } else {
            m
        }
    }
}

/// Result of [`vanishes_on_reals`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealVanishing {
    pub vanishes: bool,
    /// Largest normalized residual `|e(a)| / (1 + p(|a|))`.
    pub max_residual: f64,
    /// Variable names, matching the coordinates of `at`.
    pub vars: Vec<String>,
    pub at: Vec<f64>,
    /// `e` at `at`.
    pub value: f64,
    pub points_checked: usize,
}

/// Dense-grid plus random-sample test that `e` vanishes on `ℝⁿ`.
pub fn vanishes_on_reals(e: &Expr, cfg: &RealSampling) -> RealVanishing {
    let vars = e.variables();
    let n = vars.len();
    let prog = e
        .compile(&vars)
        .expect("variables come from the expression");
    let majorant = polynomial_majorant(e);
    let names = vars.clone();
    let residual = |p: &[f64]| -> (f64, f64) {
        let v = prog.eval_real(p);
        let bound = 1.0
            + majorant
                .eval(&|v: &String| p[names.binary_search(v).expect("majorant variable")].abs());
        (v.abs() / bound, v)
    };
    let m = cfg.axis_points(n);
    let grid_len = if n == 0 { 1 } else { m.pow(n as u32) };
    let axis = |i: usize| cfg.scale * (2.0 * i as f64 / (m - 1) as f64 - 1.0);
    let grid_point = |mut index: usize| {
        let mut p = vec![0.0; n];
        for k in (0..n).rev() {
            p[k] = axis(index % m);
            index /= m;
        }
        p
    };
    let sample_point = |k: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(k as u64);
        (0..n)
            .map(|_| rng.gen_range(-cfg.scale..=cfg.scale))
            .collect::<Vec<_>>()
    };
    let total = grid_len + cfg.samples;
    let (r, v, idx) = (0..total)
        .into_par_iter()
        .map(|i| {
            let p = if i < grid_len {
                grid_point(i)
            } else {
                sample_point(i - grid_len)
            };
            let (r, v) = residual(&p);
            (r, v, i)
        })
        .reduce(
            || (0.0, 0.0, usize::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.2 < a.2) {
                    b
                } else {
                    a
                }
            },
        );
    let at = match idx {
        usize::MAX => vec![0.0; n],
        i if i < grid_len => grid_point(i),
        i => sample_point(i - grid_len),
    };
    RealVanishing {
        vanishes: r <= cfg.tol,
        max_residual: r,
        vars,
        at,
        value: v,
        points_checked: total,
    }
}

/// The lattice projection `P`: kill every product, then drop neutral zeros.
pub fn lattice_projection(e: &Expr) -> Expr {
    simplify_zeros(&product_kill(e))
}

/// `(ε, |Φ(ελ)/ε − Φ₀(λ)|)` for each `ε`.
pub fn numeric_limit_profile(
    e: &Expr,
    lambda: &Assignment<f64>,
    eps: &[f64],
) -> Result<Vec<(f64, f64)>, EvalError> {
    let killed = product_kill(e).eval_real(lambda)?;
    eps.iter()
        .map(|&t| {
            let scaled = lambda.map(|x| t * x);
            Ok((t, (e.eval_real(&scaled)? / t - killed).abs()))
        })
        .collect()
}

/// `((v₊)² − v₊)₊`: zero on `[-1, 1]`, nonzero beyond.
pub fn kernel_witness(v: &str) -> Expr {
    parse(&format!("pos(pos({v})*pos({v}) - pos({v}))")).expect("well-formed witness")
}

/// Truncated `x·cosh²x − x·sinh²x` with series up to index `k`:
/// `x·(C·C) − x·(S·S)`, `C = u + Σⱼ₌₁ᵏ x²ʲ/(2j)!`, `S = Σⱼ₌₀ᵏ x²ʲ⁺¹/(2j+1)!`.
///
/// LLA expressions have no constants, so the leading `1` of the cosine
/// series is the variable `unit`, to be assigned 1 over `ℝ`.
pub fn cosh_sinh_truncation(k: u32, x: &str, unit: &str) -> Expr {
    let xv = Expr::var(x);
    let mut fact = 1.0f64;
    let mut cosh = Expr::var(unit);
    let mut sinh: Option<Expr> = None;
    for d in 1..=(2 * k + 1) {
        fact *= d as f64;
        let term = Expr::scale(1.0 / fact, Expr::power(&xv, d));
        if d % 2 == 0 {
            cosh = Expr::add(cosh, term);
        } else {
            sinh = Some(match sinh {
                None => Expr::power(&xv, 1),
                Some(s) => Expr::add(s, term),
            });
        }
    }
    let sinh = sinh.expect("k ≥ 0 gives at least one sine term");
    Expr::sub(
        Expr::mul(xv.clone(), Expr::mul(cosh.clone(), cosh)),
        Expr::mul(xv, Expr::mul(sinh.clone(), sinh)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_var() -> Generators {
        standard_generators(&["v"])
    }

    #[test]
    fn grid_layout() {
        let g = BallGrid::new(2, 3).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.point(0), vec![-1.0, -1.0]);
        assert_eq!(g.point(1), vec![-1.0, 0.0]);
        assert_eq!(g.point(8), vec![1.0, 1.0]);
        assert!(BallGrid::new(1, 4).is_err());
        assert!(BallGrid::new(1, 1).is_err());
    }

    #[test]
    fn iota_of_a_generator_is_the_coordinate() {
        let g = BallGrid::new(1, 11).unwrap();
        let f = iota_eval(&Expr::var("v"), &one_var(), &g).unwrap();
        for (i, v) in f.values().iter().enumerate() {
            assert_eq!(*v, g.point(i)[0]);
        }
    }

    #[test]
    fn iota_of_a_product() {
        let gens = standard_generators(&["v", "w"]);
        let g = BallGrid::new(2, 5).unwrap();
        let f = iota_eval(&parse("v*w").unwrap(), &gens, &g).unwrap();
        let i = (0..g.len())
            .find(|&i| g.point(i) == vec![0.5, -1.0])
            .unwrap();
        assert_eq!(f.values()[i], -0.5);
        let bad: Generators = Assignment::new().with("v", vec![1.0]);
        assert!(matches!(
            iota_eval(&Expr::var("v"), &bad, &g),
            Err(EvalError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ball_vanishing_examples() {
        let g = BallGrid::new(1, 201).unwrap();
        let k = vanishes_on_ball(&kernel_witness("v"), &one_var(), &g, 1e-9).unwrap();
        assert!(k.vanishes);
        assert_eq!(k.max_residual, 0.0);
        let v = vanishes_on_ball(&Expr::var("v"), &one_var(), &g, 1e-9).unwrap();
        assert!(!v.vanishes);
        assert_eq!(v.max_residual, 1.0);
        let q = vanishes_on_ball(&parse("v*v - v").unwrap(), &one_var(), &g, 1e-9).unwrap();
        assert_eq!(
            (q.vanishes, q.max_residual, q.at.clone()),
            (false, 2.0, vec![-1.0])
        );
    }

    #[test]
    fn real_vanishing_examples() {
        let cfg = RealSampling {
            samples: 2000,
            ..RealSampling::default()
        };
        assert!(vanishes_on_reals(&parse("pos(x)*neg(x)").unwrap(), &cfg).vanishes);
        assert!(vanishes_on_reals(&parse("(x \\/ y) + (x /\\ y) - x - y").unwrap(), &cfg).vanishes);
        let r = vanishes_on_reals(&parse("x \\/ 0").unwrap(), &cfg);
        assert!(!r.vanishes && r.value > 0.0);
        let k = vanishes_on_reals(&kernel_witness("v"), &cfg);
        assert!(!k.vanishes);
    }

    #[test]
    fn projection_examples() {
        assert_eq!(
            lattice_projection(&parse("x*y + x \\/ y").unwrap()),
            parse("x \\/ y").unwrap()
        );
        let free = parse("2*x \\/ -1*y + x").unwrap();
        assert_eq!(lattice_projection(&free), free);
        assert_eq!(
            lattice_projection(&cosh_sinh_truncation(4, "x", "u")),
            Expr::Zero
        );
        let e = parse("x*y + pos(x - y*y) \\/ 0*x").unwrap();
        let p = lattice_projection(&e);
        assert_eq!(lattice_projection(&p), p);
    }

    #[test]
    fn limit_profile_closed_forms() {
        let e = parse("x*y + x \\/ y").unwrap();
        let lam = Assignment::new().with("x", 1.0).with("y", 1.0);
        let eps = 2f64.powi(-10);
        assert_eq!(
            numeric_limit_profile(&e, &lam, &[eps]).unwrap(),
            vec![(eps, eps)]
        );
        let cube = Expr::power(&Expr::var("x"), 3);
        let lam = Assignment::new().with("x", 1.0);
        for k in 1..10 {
            let t = 2f64.powi(-k);
            assert_eq!(
                numeric_limit_profile(&cube, &lam, &[t]).unwrap()[0].1,
                t * t
            );
        }
        let free = parse("2*x \\/ -1*x").unwrap();
        let lam = Assignment::new().with("x", 0.75);
        assert!(numeric_limit_profile(&free, &lam, &[0.5, 0.25, 1e-3])
            .unwrap()
            .iter()
            .all(|(_, r)| *r == 0.0));
    }

    #[test]
    fn cosh_sinh_truncation_converges_to_identity() {
        let e = cosh_sinh_truncation(10, "x", "u");
        for i in 0..=200 {
            let x = -1.0 + i as f64 / 100.0;
            let a = Assignment::new().with("x", x).with("u", 1.0);
            assert!((e.eval_real(&a).unwrap() - x).abs() <= 1e-12);
        }
    }

    #[test]
    fn csv_dump() {
        let g = BallGrid::new(1, 3).unwrap();
        let f = iota_eval(&Expr::var("v"), &one_var(), &g).unwrap();
        let mut out = Vec::new();
        f.write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "x1,value\n-1,-1\n0,0\n1,1\n"
        );
    }
}
