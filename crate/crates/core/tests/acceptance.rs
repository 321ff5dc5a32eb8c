//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use falg_core::discretizer::{discretize, verify_bounds, VerifyConfig};
use falg_core::expr::ExprGenerator;
use falg_core::free::{
    cosh_sinh_truncation, kernel_witness, numeric_limit_profile, standard_generators,
    vanishes_on_reals, RealSampling,
};
use falg_core::models::{
    eval_in_model, random_model_family, vanishes_in_model, FAlgebraModel, WeightedGridModel,
    ZeroProductModel,
};
use falg_core::rewrite::{product_kill, NormalFormBuilder, SplitVar};
use falg_core::star::{
    check_star_axioms, hat_t_eval, one, star_product, strong_unit_candidate, CylinderGrid,
};
use falg_core::tau::{
    evaluate_witness, fbl_norm_lower, generator_norms, norm_sandwich, rho_upper, tau_lower,
    TauConfig,
};
use falg_core::{parse, Assignment, Expr};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * 1f64.max(a.abs()).max(b.abs())
}

fn kernel_witness_values() -> Check {
    let w = kernel_witness("x");
    let mut nonzero = 0;
    for i in 0..=10_000 {
        let x = -1.0 + 2.0 * i as f64 / 10_000.0;
        let v = w
            .eval_real(&Assignment::new().with("x", x))
            .map_err(|e| e.to_string())?;
        if v != 0.0 {
            nonzero += 1;
        }
    }
    let at2 = w
        .eval_real(&Assignment::new().with("x", 2.0))
        .map_err(|e| e.to_string())?;
    ensure(
        nonzero == 0 && at2 == 2.0,
        format!("nonzero grid values {nonzero}/10001, value at 2 = {at2}"),
    )
}

fn identity_transport() -> Check {
    let identities = [
        "pos(x)*neg(x)",
        "(x \\/ y) + (x /\\ y) - x - y",
        "abs(x*y) - abs(x)*abs(y)",
        "(x \\/ y)*pos(z) - ((x*pos(z)) \\/ (y*pos(z)))",
    ];
    let family = random_model_family(20, 6, 2024);
    let mut worst_real: f64 = 0.0;
    let mut worst_model: f64 = 0.0;
    let mut failures = Vec::new();
    for text in identities {
        let e = parse(text).map_err(|e| e.to_string())?;
        let r = vanishes_on_reals(
            &e,
            &RealSampling {
                samples: 0,
                ..RealSampling::default()
            },
        );
        worst_real = worst_real.max(r.max_residual);
        if !r.vanishes || r.points_checked != 201usize.pow(e.variables().len() as u32) {
            failures.push(format!("{text} on reals ({} points)", r.points_checked));
        }
        for (k, spec) in family.iter().enumerate() {
            let m = spec.build().map_err(|e| e.to_string())?;
            let v = vanishes_in_model(&e, m.as_ref(), 200, k as u64, 1e-9);
            worst_model = worst_model.max(v.max_residual);
            if !v.vanishes {
                failures.push(format!("{text} in {}", v.model));
            }
        }
    }
    ensure(
        failures.is_empty(),
        format!(
            "4 identities, 201 points per variable on [-3,3] and {} models; max residual real {worst_real:.2e}, models {worst_model:.2e}; failures {failures:?}",
            family.len()
        ),
    )
}

fn limit_law() -> Check {
    let gen = ExprGenerator::new(&["x", "y", "z"], 10);
    let mut r = rng(11);
    let eps: Vec<f64> = (5..=20).map(|k| 2f64.powi(-k)).collect();
    let (mut final_bad, mut mono_bad, mut worst_ratio) = (0, 0, 0.0f64);
    let mut first_violation = None;
    for _ in 0..50 {
        let e = gen.sample(&mut r);
        for _ in 0..20 {
            let lambda: Assignment<f64> = ["x", "y", "z"]
                .iter()
                .map(|v| (v.to_string(), r.gen_range(-1.0..=1.0)))
                .collect();
            let phi0 = product_kill(&e)
                .eval_real(&lambda)
                .map_err(|e| e.to_string())?;
            let prof = numeric_limit_profile(&e, &lambda, &eps).map_err(|e| e.to_string())?;
            let last = prof.last().unwrap().1;
            worst_ratio = worst_ratio.max(last / (1.0 + phi0.abs()));
            if last > 1e-4 * (1.0 + phi0.abs()) {
                final_bad += 1;
            }
            if let Some(k) = prof.windows(2).position(|w| w[1].1 > 1.1 * w[0].1) {
                mono_bad += 1;
                first_violation.get_or_insert(format!(
                    "; first violation: residual {:.3e} at 2^-{} then {:.3e} at 2^-{}, {:.3e} at 2^-20",
                    prof[k].1,
                    k + 5,
                    prof[k + 1].1,
                    k + 6,
                    last
                ));
            }
        }
    }
    ensure(
        final_bad == 0 && mono_bad == 0,
        format!(
            "1000 (expr, point) pairs; residual(2^-20) violations {final_bad}, max ratio {worst_ratio:.2e}; monotonicity violations {mono_bad}{}",
            first_violation.unwrap_or_default()
        ),
    )
}

fn zero_product_collapse() -> Check {
    let gen = ExprGenerator::new(&["x", "y", "z"], 10);
    let mut r = rng(21);
    let m = ZeroProductModel::new(5).map_err(|e| e.to_string())?;
    let mut mismatches = 0;
    for _ in 0..200 {
        let e = gen.sample(&mut r);
        let a: Assignment<_> = ["x", "y", "z"]
            .iter()
            .map(|v| (v.to_string(), m.random_element(&mut r)))
            .collect();
        let full = eval_in_model(&e, &m, &a).map_err(|e| e.to_string())?;
        let killed = eval_in_model(&product_kill(&e), &m, &a).map_err(|e| e.to_string())?;
        let same = full
            .coords()
            .iter()
            .zip(killed.coords())
            .all(|(p, q)| p.to_bits() == q.to_bits());
        if !same {
            mismatches += 1;
        }
    }
    ensure(
        mismatches == 0,
        format!("200 pairs, bit-level mismatches {mismatches}"),
    )
}

fn normal_forms() -> Check {
    let builder = NormalFormBuilder::default();
    let gen = ExprGenerator::new(&["x", "y", "z"], 8);
    let mut r = rng(31);
    let (mut accepted, mut skipped, mut real_bad, mut model_bad) = (0, 0, 0, 0);
    while accepted < 50 {
        let e = gen.sample(&mut r);
        let Ok(nf) = builder.build(&e) else {
            skipped += 1;
            continue;
        };
        accepted += 1;
        for _ in 0..100 {
            let a: Assignment<f64> = ["x", "y", "z"]
                .iter()
                .map(|v| (v.to_string(), r.gen_range(-3.0..=3.0)))
                .collect();
            let (p, q) = (e.eval_real(&a).unwrap(), nf.eval_real(&a).unwrap());
            if !close(p, q, 1e-6) {
                real_bad += 1;
            }
        }
        let nf_expr = nf.to_expr();
        for _ in 0..5 {
            let m = WeightedGridModel::random(4, &mut r);
            let a: Assignment<_> = ["x", "y", "z"]
                .iter()
                .map(|v| (v.to_string(), m.random_element(&mut r)))
                .collect();
            let p = eval_in_model(&e, &m, &a).unwrap();
            let q = eval_in_model(&nf_expr, &m, &a).unwrap();
            if !p
                .coords()
                .iter()
                .zip(q.coords())
                .all(|(p, q)| close(*p, *q, 1e-6))
            {
                model_bad += 1;
            }
        }
    }
    let one_var = ExprGenerator::new(&["x"], 8);
    let (mut split_checked, mut split_bad) = (0, 0);
    while split_checked < 20 {
        let f = one_var.sample(&mut r);
        let Ok(nf) = builder.build(&f) else { continue };
        split_checked += 1;
        for _ in 0..10 {
            let lambda: f64 = r.gen_range(0.01..=3.0);
            for (value, plus, minus) in [(lambda, lambda, 0.0), (-lambda, 0.0, lambda)] {
                let split = nf.eval_split(&|s: &SplitVar| {
                    if *s == SplitVar::plus("x") {
                        plus
                    } else {
                        minus
                    }
                });
                let direct = f.eval_real(&Assignment::new().with("x", value)).unwrap();
                if !close(split, direct, 1e-6) {
                    split_bad += 1;
                }
            }
        }
    }
    ensure(
        real_bad == 0 && model_bad == 0 && split_bad == 0,
        format!(
            "50 expressions ({skipped} over budget skipped); real mismatches {real_bad}/5000, model mismatches {model_bad}/250, split mismatches {split_bad} over 20 expressions"
        ),
    )
}

fn star_model() -> Check {
    let grid = Arc::new(CylinderGrid::default_for(2));
    let u = one(&grid);
    let uu = star_product(&u, &u).map_err(|e| e.to_string())?;
    let exact = (0..grid.len()).all(|k| uu.values()[k] == grid.r(k));
    let axioms = check_star_axioms(&grid, 100, 41);
    let gens = standard_generators(&["x1", "x2"]);
    let gen = ExprGenerator::new(&["x1", "x2"], 6);
    let mut r = rng(42);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (f, g) = (gen.sample(&mut r), gen.sample(&mut r));
        let fg = hat_t_eval(&Expr::mul(f.clone(), g.clone()), &gens, &grid)
            .map_err(|e| e.to_string())?;
        let tf = hat_t_eval(&f, &gens, &grid).map_err(|e| e.to_string())?;
        let tg = hat_t_eval(&g, &gens, &grid).map_err(|e| e.to_string())?;
        let prod = star_product(&tf, &tg).map_err(|e| e.to_string())?;
        worst = worst.max(fg.sub(&prod).map_err(|e| e.to_string())?.sup_norm());
    }
    ensure(
        exact && axioms.passed() && worst <= 1e-9,
        format!(
            "{} points; one*one == r: {exact}; axioms over {} trials: assoc {} comm {} f-alg {} semiprime {} violations; hatT multiplicativity error {worst:.2e}",
            grid.len(),
            axioms.trials,
            axioms.associativity,
            axioms.commutativity,
            axioms.f_algebra,
            axioms.semiprime
        ),
    )
}

fn strong_unit() -> Check {
    let mut details = Vec::new();
    let mut ok = true;
    for n in 1..=3 {
        let grid = Arc::new(CylinderGrid::default_for(n));
        let basis: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let c = strong_unit_candidate(&basis, &grid).map_err(|e| e.to_string())?;
        let all_one = c.function.values().iter().all(|v| *v == 1.0);
        ok &= all_one && c.accepted;
        details.push(format!("n={n}: e'==1 {all_one}"));
    }
    let grid = Arc::new(CylinderGrid::default_for(2));
    let c = strong_unit_candidate(&[vec![1.0, 0.0]], &grid).map_err(|e| e.to_string())?;
    ok &= !c.accepted && c.min < 0.5;
    details.push(format!(
        "F={{e1}} in n=2: min {:.4}, accepted {}",
        c.min, c.accepted
    ));
    ensure(ok, details.join("; "))
}

fn discretizer_bounds() -> Check {
    let grid = Arc::new(CylinderGrid::uniform(2, 101, 26).map_err(|e| e.to_string())?);
    let gens = standard_generators(&["x1", "x2"]);
    let mut functions = Vec::new();
    for (k, text) in ["x1", "x2", "x1*x2", "pos(x1 - x2) \\/ x1*x1"]
        .iter()
        .enumerate()
    {
        let f = hat_t_eval(&parse(text).unwrap(), &gens, &grid).map_err(|e| e.to_string())?;
        let s = f.sup_norm().max(1.0);
        functions.push((
            format!("f{k}"),
            f.values().iter().map(|v| v / s).collect::<Vec<f64>>(),
        ));
    }
    let weight: Vec<f64> = (0..grid.len()).map(|k| grid.r(k)).collect();
    let mut ok = true;
    let mut errs = Vec::new();
    let mut details = Vec::new();
    for k in 5..=7 {
        let delta = 2f64.powi(-k);
        let d = discretize(&functions, &weight, delta).map_err(|e| e.to_string())?;
        let rep = verify_bounds(
            &d,
            &VerifyConfig {
                pair_trials: 200,
                seed: k as u64,
                composite: None,
            },
        )
        .map_err(|e| e.to_string())?;
        ok &=
            rep.sup_error < delta && rep.split_violations == 0 && rep.product_bound_violations == 0;
        errs.push(rep.sup_error);
        details.push(format!(
            "delta=2^-{k}: atoms {} supError {:.5} productViolations {}",
            rep.atoms, rep.sup_error, rep.product_bound_violations
        ));
    }
    let monotone = errs.windows(2).all(|w| w[1] <= w[0]);
    ensure(
        ok && monotone,
        format!(
            "{} points; {}; monotone {monotone}",
            grid.len(),
            details.join("; ")
        ),
    )
}

fn norm_sandwich_checks() -> Check {
    let cfg = TauConfig {
        seed: 51,
        ..TauConfig::default()
    };
    let one_gen = standard_generators(&["v"]);
    let s1 = norm_sandwich(&Expr::var("v"), &one_gen, &cfg).map_err(|e| e.to_string())?;
    let sq = norm_sandwich(&parse("v*v").unwrap(), &one_gen, &cfg).map_err(|e| e.to_string())?;
    let mut ok = (s1.lower - 1.0).abs() <= 0.02 && (s1.upper - 1.0).abs() <= 0.02;
    ok &= sq.upper == 1.0 && sq.lower >= 0.95;
    let gens = standard_generators(&["v", "w"]);
    let gen = ExprGenerator::new(&["v", "w"], 6);
    let mut r = rng(52);
    let quick = TauConfig {
        search_iters: 2_000,
        seed: 53,
        ..TauConfig::default()
    };
    let (mut unordered, mut gap): (usize, f64) = (0, f64::NEG_INFINITY);
    for _ in 0..20 {
        let e = gen.sample(&mut r);
        match norm_sandwich(&e, &gens, &quick) {
            Ok(s) if s.lower <= s.upper + 1e-12 => gap = gap.max(s.lower - s.upper),
            _ => unordered += 1,
        }
    }
    ok &= unordered == 0;
    let one_var = ExprGenerator::new(&["v"], 6);
    let padded: Assignment<Vec<f64>> = Assignment::new().with("v", vec![1.0, 0.0]);
    let mut lowered = 0;
    for _ in 0..5 {
        let e = one_var.sample(&mut r);
        let base = tau_lower(&e, &one_gen, &quick).map_err(|e| e.to_string())?;
        let replay = TauConfig {
            replay: vec![base.witness.pad(2)],
            ..quick.clone()
        };
        let lifted = tau_lower(&e, &padded, &replay).map_err(|e| e.to_string())?;
        let direct =
            evaluate_witness(&e, &padded, &base.witness.pad(2)).map_err(|e| e.to_string())?;
        if lifted.value < base.value || direct != base.value {
            lowered += 1;
        }
    }
    ok &= lowered == 0;
    ensure(
        ok,
        format!(
            "eta1 [{:.4}, {}]; eta1^2 [{:.4}, {}]; unordered sandwiches {unordered}/20 (max lower-upper {gap:.1e}); embedding decreases {lowered}/5",
            s1.lower, s1.upper, sq.lower, sq.upper
        ),
    )
}

fn fbl_anchor() -> Check {
    let e = parse("abs(v) \\/ abs(w)").unwrap();
    let gens = standard_generators(&["v", "w"]);
    let oracle: f64 = [[1.0, 0.0], [0.0, 1.0]]
        .iter()
        .map(|x: &[f64; 2]| x[0].abs().max(x[1].abs()))
        .sum();
    let est = fbl_norm_lower(&e, &gens, &Default::default()).map_err(|e| e.to_string())?;
    let upper = rho_upper(&e, &generator_norms(&gens));
    let value = if (upper - est.value).abs() <= 1e-9 {
        Some(upper)
    } else {
        None
    };
    ensure(
        oracle == 2.0 && est.value >= 2.0 - 1e-9 && upper == 2.0 && value == Some(2.0),
        format!(
            "explicit tuple value {oracle}; search lower {}; upper {upper}; value {value:?}",
            est.value
        ),
    )
}

fn cosh_sinh_counterexample() -> Check {
    let phi = cosh_sinh_truncation(10, "x", "u");
    let mut worst: f64 = 0.0;
    for i in 0..=10_000 {
        let x = -1.0 + 2.0 * i as f64 / 10_000.0;
        let v = phi
            .eval_real(&Assignment::new().with("x", x).with("u", 1.0))
            .map_err(|e| e.to_string())?;
        worst = worst.max((v - x).abs());
    }
    let m = ZeroProductModel::new(7).map_err(|e| e.to_string())?;
    let mut r = rng(61);
    let a = Assignment::new()
        .with("x", m.random_element(&mut r))
        .with("u", m.random_element(&mut r));
    let zp = eval_in_model(&phi, &m, &a).map_err(|e| e.to_string())?;
    let zp_zero = zp.coords().iter().all(|c| *c == 0.0);
    let x_at_1 = Expr::var("x")
        .eval_real(&Assignment::new().with("x", 1.0))
        .map_err(|e| e.to_string())?;
    ensure(
        worst <= 1e-6 && zp_zero && x_at_1 == 1.0,
        format!("sup |Phi_10 - x| = {worst:.2e}; zero-product value identically 0: {zp_zero}; x(1) = {x_at_1}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("1 kernel witness", kernel_witness_values),
        ("2 identity transport", identity_transport),
        ("3 limit law", limit_law),
        ("4 zero-product collapse", zero_product_collapse),
        ("5 normal form", normal_forms),
        ("6 star model", star_model),
        ("7 strong unit", strong_unit),
        ("8 discretizer", discretizer_bounds),
        ("9 norm sandwich", norm_sandwich_checks),
        ("10 free Banach lattice anchor", fbl_anchor),
        ("11 cosh/sinh counterexample", cosh_sinh_counterexample),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "{tag} criterion {name}: {detail} [{:.1}s]",
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
