//! Level-set discretization of sampled functions into a finite semiprime
//! diagonal f-algebra.
//!
//! Given functions `f_s` with `‖f_s‖∞ ≤ 1` and a product weight `0 ≤ w ≤ 1`
//! sampled on a finite set `K`, every split part `(f_s)_±` and `w` is cut into
//! the cells `[c_i, c_{i+1})` of a partition of `[0, 1+δ]`. Points with the
//! same cell pattern form an atom; each function is replaced by the lower
//! cell endpoint on each atom, and `w` by the lower endpoint floored at `c₁`.
//! The atoms with `aⱼ∘aⱼ = c_{t(j)}aⱼ` form a [`DiagonalAlgebra`].

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::{Assignment, EvalError, Expr};
use crate::models::{eval_in_model, DiagonalAlgebra, FAlgebraModel, ModelError, WeightedGridModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscretizeError {
    #[error("mesh {0} is outside (0, 1)")]
    BadDelta(f64),
    #[error("value {value} at point {point} is outside {range}")]
    OutOfRange {
        point: usize,
        value: f64,
        range: String,
    },
    #[error("function has {found} samples, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("function is not constant-cell on atom {0}")]
    AtomMismatch(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Cuts `0 = c₀ < c₁ < … < c_N < c_{N+1} = 1 + δ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionSpec {
    cuts: Vec<f64>,
    delta: f64,
}

impl PartitionSpec {
    pub fn cuts(&self) -> &[f64] {
        &self.cuts
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Index `i` of the cell `[c_i, c_{i+1})` holding `v`, if any.
    pub fn cell(&self, v: f64) -> Option<usize> {
        let top = *self.cuts.last().expect("at least two cuts");
        if !(v >= 0.0 && v < top) {
            return None;
        }
        Some(self.cuts.partition_point(|c| *c <= v) - 1)
    }

    pub fn lower(&self, cell: usize) -> f64 {
        self.cuts[cell]
    }
}

/// Uniform partition of `[0, 1+δ]` into `⌈(1+δ)/δ⌉` equal cells.
pub fn build_partition(delta: f64) -> Result<PartitionSpec, DiscretizeError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(DiscretizeError::BadDelta(delta));
    }
    let top = 1.0 + delta;
    let cells = (top / delta - 1e-9).ceil() as usize;
    let h = top / cells as f64;
    let mut cuts: Vec<f64> = (0..cells).map(|k| k as f64 * h).collect();
    cuts.push(top);
    Ok(PartitionSpec { cuts, delta })
}

/// Atoms of the set algebra generated by the cells of several functions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomDecomposition {
    atom_of_point: Vec<usize>,
    /// Cell index of each input function on each atom, in input order.
    fingerprints: Vec<Vec<usize>>,
}

impl AtomDecomposition {
    pub fn atom_count(&self) -> usize {
        self.fingerprints.len()
    }

    pub fn atom_of_point(&self) -> &[usize] {
        &self.atom_of_point
    }

    pub fn fingerprints(&self) -> &[Vec<usize>] {
        &self.fingerprints
    }

    pub fn point_count(&self) -> usize {
        self.atom_of_point.len()
    }

    /// Extends coefficients over atoms to values over points.
    pub fn lift(&self, coeffs: &[f64]) -> Vec<f64> {
        self.atom_of_point.iter().map(|&j| coeffs[j]).collect()
    }
}

fn cells_of(values: &[f64], p: &PartitionSpec) -> Result<Vec<usize>, DiscretizeError> {
    values
        .iter()
        .enumerate()
        .map(|(point, &value)| {
            p.cell(value).ok_or_else(|| DiscretizeError::OutOfRange {
                point,
                value,
                range: format!("[0, {})", 1.0 + p.delta),
            })
        })
        .collect()
}

/// Fingerprints every point by the cells of `split_fns` and `w`; atoms are
/// the distinct fingerprints, numbered in sorted order.
pub fn atomize(
    split_fns: &[&[f64]],
    w: &[f64],
    p: &PartitionSpec,
) -> Result<AtomDecomposition, DiscretizeError> {
    let len = w.len();
    let mut columns = Vec::with_capacity(split_fns.len() + 1);
    for f in split_fns.iter().chain(std::iter::once(&w)) {
        if f.len() != len {
            return Err(DiscretizeError::LengthMismatch {
                expected: len,
                found: f.len(),
            });
        }
        columns.push(cells_of(f, p)?);
    }
    let prints: Vec<Vec<usize>> = (0..len)
        .into_par_iter()
        .map(|k| columns.iter().map(|c| c[k]).collect())
        .collect();
    let ids: BTreeMap<&Vec<usize>, usize> = prints
        .iter()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, f)| (f, i))
        .collect();
    let atom_of_point = prints.iter().map(|f| ids[f]).collect();
    let fingerprints = ids.keys().map(|f| (*f).clone()).collect();
    Ok(AtomDecomposition {
        atom_of_point,
        fingerprints,
    })
}

fn cell_per_atom(
    values: &[f64],
    atoms: &AtomDecomposition,
    p: &PartitionSpec,
) -> Result<Vec<usize>, DiscretizeError> {
    if values.len() != atoms.point_count() {
        return Err(DiscretizeError::LengthMismatch {
            expected: atoms.point_count(),
            found: values.len(),
        });
    }
    let cells = cells_of(values, p)?;
    let mut per_atom: Vec<Option<usize>> = vec![None; atoms.atom_count()];
    for (k, &j) in atoms.atom_of_point.iter().enumerate() {
        match per_atom[j] {
            None => per_atom[j] = Some(cells[k]),
            Some(c) if c != cells[k] => return Err(DiscretizeError::AtomMismatch(j)),
            _ => {}
        }
    }
    Ok(per_atom
        .into_iter()
        .map(|c| c.expect("atoms are nonempty"))
        .collect())
}

/// Lower cell endpoint of `f` on each atom, so `0 ≤ f_d ≤ f` and `f − f_d < δ`.
pub fn discretize_function(
    f: &[f64],
    atoms: &AtomDecomposition,
    p: &PartitionSpec,
) -> Result<Vec<f64>, DiscretizeError> {
    Ok(cell_per_atom(f, atoms, p)?
        .into_iter()
        .map(|c| p.lower(c))
        .collect())
}

/// Lower cell endpoint of `w` on each atom, raised to `c₁` on the first cell.
pub fn discrete_weight(
    w: &[f64],
    atoms: &AtomDecomposition,
    p: &PartitionSpec,
) -> Result<Vec<f64>, DiscretizeError> {
    Ok(cell_per_atom(w, atoms, p)?
        .into_iter()
        .map(|c| p.lower(c.max(1)))
        .collect())
}

/// `aᵢ∘aⱼ = 0` for `i ≠ j`, `aⱼ∘aⱼ = c_t(j)·aⱼ`.
pub fn build_diagonal_algebra(c_t: &[f64]) -> Result<DiagonalAlgebra, DiscretizeError> {
    Ok(DiagonalAlgebra::new(c_t.to_vec())?)
}

/// One named function `f` on the sample set with its discretized parts.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedFunction {
    pub name: String,
    pub values: Vec<f64>,
    /// `(f₊)_d` and `(f₋)_d` over atoms.
    pub pos: Vec<f64>,
    pub neg: Vec<f64>,
}

impl DiscretizedFunction {
    /// `f_d = (f₊)_d − (f₋)_d` over atoms.
    pub fn coeffs(&self) -> Vec<f64> {
        self.pos.iter().zip(&self.neg).map(|(p, n)| p - n).collect()
    }
}

/// Output of [`discretize`]: atoms, discretized functions and the algebra.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub partition: PartitionSpec,
    pub atoms: AtomDecomposition,
    pub functions: Vec<DiscretizedFunction>,
    pub weight: Vec<f64>,
    pub weight_coeffs: Vec<f64>,
    pub algebra: DiagonalAlgebra,
}

/// Runs the construction on named functions with values in `[-1, 1]` and a
/// weight with values in `[0, 1]`, all sampled on the same points.
pub fn discretize(
    functions: &[(String, Vec<f64>)],
    weight: &[f64],
    delta: f64,
) -> Result<Discretization, DiscretizeError> {
    let p = build_partition(delta)?;
    let len = weight.len();
    for (_, f) in functions {
        if f.len() != len {
            return Err(DiscretizeError::LengthMismatch {
                expected: len,
                found: f.len(),
            });
        }
        if let Some((point, &value)) = f.iter().enumerate().find(|(_, v)| !(v.abs() <= 1.0)) {
            return Err(DiscretizeError::OutOfRange {
                point,
                value,
                range: "[-1, 1]".into(),
            });
        }
    }
    if let Some((point, &value)) = weight
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(DiscretizeError::OutOfRange {
            point,
            value,
            range: "[0, 1]".into(),
        });
    }
    let splits: Vec<(Vec<f64>, Vec<f64>)> = functions
        .iter()
        .map(|(_, f)| {
            (
                f.iter().map(|v| v.max(0.0)).collect(),
                f.iter().map(|v| (-v).max(0.0)).collect(),
            )
        })
        .collect();
    let refs: Vec<&[f64]> = splits
        .iter()
        .flat_map(|(a, b)| [a.as_slice(), b.as_slice()])
        .collect();
    let atoms = atomize(&refs, weight, &p)?;
    let mut out = Vec::with_capacity(functions.len());
    for ((name, values), (plus, minus)) in functions.iter().zip(&splits) {
        out.push(DiscretizedFunction {
            name: name.clone(),
            values: values.clone(),
            pos: discretize_function(plus, &atoms, &p)?,
            neg: discretize_function(minus, &atoms, &p)?,
        });
    }
    let weight_coeffs = discrete_weight(weight, &atoms, &p)?;
    let algebra = build_diagonal_algebra(&weight_coeffs)?;
    Ok(Discretization {
        partition: p,
        atoms,
        functions: out,
        weight: weight.to_vec(),
        weight_coeffs,
        algebra,
    })
}

/// Sup-norm error bound for `‖Φ(f) − Φ(f_d)‖∞` when every input satisfies
/// `‖f‖∞ ≤ 1`, `‖f − f_d‖∞ < δ` and `|w − c_t| < δ`, `w ≤ 1`.
///
/// Computed bottom-up with `(error, size)` pairs: lattice operations are
/// 1-Lipschitz, sums add, scalings multiply by `|λ|`, and for products
/// `|w·a·b − c·a'·b'| ≤ δ|a'||b'| + |a − a'||b| + |a'||b − b'|`.
pub fn error_budget(e: &Expr, delta: f64) -> f64 {
    fn go(e: &Expr, d: f64) -> (f64, f64) {
        match e {
            Expr::Zero => (0.0, 0.0),
            Expr::Var(_) => (d, 1.0),
            Expr::Scale(c, a) => {
                let (err, m) = go(a, d);
                (c.abs() * err, c.abs() * m)
            }
            Expr::Add(a, b) => {
                let ((e1, m1), (e2, m2)) = (go(a, d), go(b, d));
                (e1 + e2, m1 + m2)
            }
            Expr::Join(a, b) => {
                let ((e1, m1), (e2, m2)) = (go(a, d), go(b, d));
                (e1.max(e2), m1.max(m2))
            }
            Expr::Mul(a, b) => {
                let ((e1, m1), (e2, m2)) = (go(a, d), go(b, d));
                (
                    d * (m1 + e1) * (m2 + e2) + e1 * m2 + (m1 + e1) * e2,
                    m1 * m2,
                )
            }
            sugar => go(&sugar.desugar(), d),
        }
    }
    go(e, delta).0
}

/// Options for [`verify_bounds`].
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub pair_trials: usize,
    pub seed: u64,
    /// Expression over the function names for the composite check.
    pub composite: Option<Expr>,
}

/// Result of [`verify_bounds`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BoundsReport {
    pub atoms: usize,
    pub grid_points: usize,
    pub delta: f64,
    /// `max_s,σ sup (f_s)_σ − (f_s)_σ,d`.
    pub sup_error: f64,
    /// Points where `0 ≤ f_d ≤ f` or `f − f_d < δ` fails.
    pub split_violations: usize,
    /// `max |c_t − w|` over points.
    pub weight_error: f64,
    pub product_pairs: usize,
    /// Points where `|x∘y| ≤ |x⋆y| + δ` fails.
    pub product_bound_violations: usize,
    /// `max (|x∘y| − |x⋆y|)` over points and pairs.
    pub product_max_excess: f64,
    pub composite: Option<String>,
    pub composite_error: Option<f64>,
    pub composite_budget: Option<f64>,
    pub passed: bool,
}

/// Checks (a) the split bounds, (b) the product bound on random unit-sup
/// pairs from the atom span, and (c) the composite error against
/// [`error_budget`].
pub fn verify_bounds(
    d: &Discretization,
    cfg: &VerifyConfig,
) -> Result<BoundsReport, DiscretizeError> {
    let delta = d.partition.delta();
    let atoms = &d.atoms;
    let mut sup_error: f64 = 0.0;
    let mut split_violations = 0;
    for f in &d.functions {
        for (coeffs, sign) in [(&f.pos, 1.0), (&f.neg, -1.0)] {
            let lifted = atoms.lift(coeffs);
            for (v, fd) in f.values.iter().zip(&lifted) {
                let part = (sign * v).max(0.0);
                let gap = part - fd;
                sup_error = sup_error.max(gap);
                if *fd < 0.0 || gap < 0.0 || gap >= delta {
                    split_violations += 1;
                }
            }
        }
    }
    let c_lift = atoms.lift(&d.weight_coeffs);
    let weight_error = c_lift
        .iter()
        .zip(&d.weight)
        .fold(0.0, |m: f64, (c, w)| m.max((c - w).abs()));

    let l = atoms.atom_count();
    let per_pair: Vec<(usize, f64)> = (0..cfg.pair_trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(t as u64);
            let mut unit = || {
                let mut v: Vec<f64> = (0..l).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let s = v.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
                if s > 0.0 {
                    v.iter_mut().for_each(|x| *x /= s);
                }
                v
            };
            let (x, y) = (unit(), unit());
            let mut bad = 0;
            let mut excess = f64::NEG_INFINITY;
            for (k, &j) in atoms.atom_of_point.iter().enumerate() {
                let discrete = (d.weight_coeffs[j] * x[j] * y[j]).abs();
                let star = (d.weight[k] * x[j] * y[j]).abs();
                excess = excess.max(discrete - star);
                if discrete > star + delta {
                    bad += 1;
                }
            }
            (bad, excess)
        })
        .collect();
    let product_bound_violations = per_pair.iter().map(|p| p.0).sum();
    let product_max_excess = per_pair
        .iter()
        .map(|p| p.1)
        .fold(f64::NEG_INFINITY, f64::max);

    let (composite_error, composite_budget) = match &cfg.composite {
        None => (None, None),
        Some(e) => {
            let err = composite_error(d, e)?;
            (Some(err), Some(error_budget(e, delta)))
        }
    };
    let composite_ok = match (composite_error, composite_budget) {
        (Some(e), Some(b)) => e <= b,
        _ => true,
    };
    Ok(BoundsReport {
        atoms: l,
        grid_points: atoms.point_count(),
        delta,
        sup_error,
        split_violations,
        weight_error,
        product_pairs: cfg.pair_trials,
        product_bound_violations,
        product_max_excess: if cfg.pair_trials == 0 {
            0.0
        } else {
            product_max_excess
        },
        composite: cfg.composite.as_ref().map(Expr::to_text),
        composite_error,
        composite_budget,
        passed: split_violations == 0 && product_bound_violations == 0 && composite_ok,
    })
}

/// `‖Φ(f)⋆ − lift(Φ(f_d)∘)‖∞`: `Φ` evaluated with the weighted product on the
/// sample points and with the diagonal product on the atoms.
pub fn composite_error(d: &Discretization, e: &Expr) -> Result<f64, DiscretizeError> {
    let fine = WeightedGridModel::new(d.weight.clone())?;
    let mut a_fine = Assignment::new();
    let mut a_coarse = Assignment::new();
    for f in &d.functions {
        a_fine.insert(f.name.clone(), fine.element(f.values.clone())?);
        a_coarse.insert(f.name.clone(), d.algebra.element(f.coeffs())?);
    }
    let exact = eval_in_model(e, &fine, &a_fine)?;
    let approx = eval_in_model(e, &d.algebra, &a_coarse)?;
    let lifted = d.atoms.lift(approx.coords());
    Ok(exact
        .coords()
        .iter()
        .zip(&lifted)
        .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::models::{check_f_algebra_condition, check_semiprime};

    fn named(name: &str, v: &[f64]) -> (String, Vec<f64>) {
        (name.to_string(), v.to_vec())
    }

    #[test]
    fn partition_examples() {
        assert_eq!(
            build_partition(0.25).unwrap().cuts(),
            &[0.0, 0.25, 0.5, 0.75, 1.0, 1.25]
        );
        assert_eq!(build_partition(0.5).unwrap().cuts(), &[0.0, 0.5, 1.0, 1.5]);
        assert!(build_partition(1.0).is_err());
        assert!(build_partition(0.0).is_err());
        let p = build_partition(0.3).unwrap();
        assert!(p.cuts().windows(2).all(|w| w[1] - w[0] <= 0.3 + 1e-15));
        assert_eq!(*p.cuts().last().unwrap(), 1.3);
        let n = p.cuts().len() - 2;
        assert!(p.cuts()[n] > 1.0);
        assert_eq!(p.cell(1.0), Some(n - 1));
        let q = build_partition(0.25).unwrap();
        assert_eq!(q.cell(1.0), Some(4));
        assert_eq!(p.cell(1.3), None);
        assert_eq!(p.cell(-0.0), Some(0));
    }

    #[test]
    fn three_point_trace() {
        let p = build_partition(0.25).unwrap();
        let f = [0.2, 0.5, 0.9];
        let w = [0.3, 0.3, 0.8];
        let atoms = atomize(&[&f], &w, &p).unwrap();
        assert_eq!(atoms.fingerprints(), &[vec![0, 1], vec![2, 1], vec![3, 3]]);
        assert_eq!(
            discretize_function(&f, &atoms, &p).unwrap(),
            vec![0.0, 0.5, 0.75]
        );
        assert_eq!(
            discrete_weight(&w, &atoms, &p).unwrap(),
            vec![0.25, 0.25, 0.75]
        );
        let alg = build_diagonal_algebra(&discrete_weight(&w, &atoms, &p).unwrap()).unwrap();
        assert!(check_semiprime(&alg, 10, 1).holds);
        assert_eq!(check_f_algebra_condition(&alg, 50, 1).violations, 0);
    }

    #[test]
    fn weight_floor_and_edge_values() {
        let p = build_partition(0.25).unwrap();
        let w = [0.1, 0.8];
        let atoms = atomize(&[], &w, &p).unwrap();
        assert_eq!(discrete_weight(&w, &atoms, &p).unwrap(), vec![0.25, 0.75]);
        let ones = [1.0, 1.0];
        let a1 = atomize(&[&ones], &ones, &p).unwrap();
        assert_eq!(a1.atom_count(), 1);
        assert_eq!(discretize_function(&ones, &a1, &p).unwrap(), vec![1.0]);
        assert_eq!(discrete_weight(&ones, &a1, &p).unwrap(), vec![1.0]);
        let zeros = [0.0, 0.0];
        assert_eq!(discretize_function(&zeros, &a1, &p).unwrap(), vec![0.0]);
        assert!(matches!(
            atomize(&[&[1.3, 0.0]], &zeros, &p),
            Err(DiscretizeError::OutOfRange { .. })
        ));
        let distinct = [0.0, 0.3];
        assert_eq!(atomize(&[&distinct], &zeros, &p).unwrap().atom_count(), 2);
        assert!(matches!(
            discretize_function(&[0.0, 0.3], &a1, &p),
            Err(DiscretizeError::AtomMismatch(0))
        ));
    }

    #[test]
    fn pipeline_on_three_points_passes() {
        let d = discretize(&[named("f", &[0.2, 0.5, 0.9])], &[0.3, 0.3, 0.8], 0.25).unwrap();
        let cfg = VerifyConfig {
            pair_trials: 50,
            seed: 1,
            composite: Some(parse("f*f \\/ f").unwrap()),
        };
        let r = verify_bounds(&d, &cfg).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.atoms, 3);
        assert!(r.sup_error < 0.25);
        assert!(r.composite_error.unwrap() <= r.composite_budget.unwrap());
    }

    #[test]
    fn indicator_pairs_are_tight_within_delta() {
        let d = discretize(&[named("f", &[0.2, 0.5, 0.9])], &[0.3, 0.3, 0.8], 0.25).unwrap();
        for j in 0..d.atoms.atom_count() {
            for (k, &a) in d.atoms.atom_of_point().iter().enumerate() {
                if a == j {
                    let gap = (d.weight_coeffs[j] - d.weight[k]).abs();
                    assert!(gap < 0.25);
                }
            }
        }
    }

    #[test]
    fn discrete_parts_are_dominated() {
        let vals: Vec<f64> = (0..41).map(|i| -1.0 + i as f64 / 20.0).collect();
        let w: Vec<f64> = (0..41).map(|i| i as f64 / 40.0).collect();
        let d = discretize(&[("f".into(), vals.clone())], &w, 0.1).unwrap();
        let f = &d.functions[0];
        let pos = d.atoms.lift(&f.pos);
        let neg = d.atoms.lift(&f.neg);
        let fd = d.atoms.lift(&f.coeffs());
        for k in 0..vals.len() {
            assert!(pos[k].min(neg[k]) == 0.0);
            assert_eq!(fd[k].abs(), pos[k] + neg[k]);
            assert!(fd[k].abs() <= vals[k].abs());
        }
    }

    #[test]
    fn refinement_never_merges_atoms() {
        let vals: Vec<f64> = (0..200)
            .map(|i| ((i * 37) % 200) as f64 / 100.0 - 1.0)
            .collect();
        let w: Vec<f64> = (0..200).map(|i| ((i * 11) % 200) as f64 / 199.0).collect();
        let coarse = discretize(&[("f".into(), vals.clone())], &w, 0.125).unwrap();
        let fine = discretize(&[("f".into(), vals)], &w, 0.0625).unwrap();
        let (a, b) = (coarse.atoms.atom_of_point(), fine.atoms.atom_of_point());
        for i in 0..a.len() {
            for j in 0..a.len() {
                if a[i] != a[j] {
                    assert_ne!(b[i], b[j]);
                }
            }
        }
        assert!(fine.atoms.atom_count() >= coarse.atoms.atom_count());
    }

    #[test]
    fn out_of_range_inputs_are_rejected() {
        assert!(discretize(&[named("f", &[1.5])], &[0.5], 0.25).is_err());
        assert!(discretize(&[named("f", &[0.5])], &[-0.1], 0.25).is_err());
        assert!(discretize(&[named("f", &[0.5])], &[0.5], 1.5).is_err());
    }

    #[test]
    fn budget_recursion() {
        assert_eq!(error_budget(&Expr::var("x"), 0.1), 0.1);
        assert_eq!(
            error_budget(&parse("2*x + y").unwrap(), 0.1),
            0.30000000000000004
        );
        let sq = error_budget(&parse("x*x").unwrap(), 0.1);
        assert!((sq - (0.1 * 1.1 * 1.1 + 0.1 + 1.1 * 0.1)).abs() < 1e-15);
        assert_eq!(error_budget(&Expr::Zero, 0.1), 0.0);
    }
}
