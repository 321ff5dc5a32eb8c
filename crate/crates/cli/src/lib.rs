//! Batch commands behind the `falg` binary.
//!
//! Each command returns an [`Outcome`]: a JSON report for standard output,
//! a one-line summary for standard error and the process exit code.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use falg_core::discretizer::{discretize, verify_bounds, VerifyConfig};
use falg_core::free::{
    standard_generators, vanishes_on_ball, vanishes_on_reals, BallGrid, Generators, RealSampling,
};
use falg_core::models::{random_model_family, vanishes_in_model};
use falg_core::star::{figure_surfaces, hat_t_eval, CylinderGrid};
use falg_core::tau::{fbl_norm_lower, norm_sandwich, FblConfig, TauConfig, TauError};
use falg_core::{parse, Expr};
use serde::Deserialize;
use serde_json::{json, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit code for a property violation.
pub const EXIT_VIOLATION: i32 = 1;
/// Exit code for usage, parse and input errors.
pub const EXIT_USAGE: i32 = 2;

/// Parameters shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub exprs: Vec<String>,
    /// `"v=e1;w=e2"` or `"v=[0.5,-1]"` style generator images.
    pub gens: Option<String>,
    pub n: Option<usize>,
    pub grid_r: usize,
    pub grid_sphere: usize,
    pub deltas: Vec<f64>,
    pub seed: u64,
    pub tol: f64,
    pub iters: usize,
    pub out: Option<PathBuf>,
    pub input: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            exprs: Vec::new(),
            gens: None,
            n: None,
            grid_r: 33,
            grid_sphere: 8,
            deltas: Vec::new(),
            seed: 0,
            tol: 1e-9,
            iters: 10_000,
            out: None,
            input: None,
        }
    }
}

impl RunConfig {
    fn echo(&self) -> Value {
        json!({
            "version": VERSION,
            "seed": self.seed,
            "exprs": self.exprs,
            "gens": self.gens,
            "n": self.n,
            "gridR": self.grid_r,
            "gridSphere": self.grid_sphere,
            "deltas": self.deltas,
            "tol": self.tol,
            "iters": self.iters,
        })
    }
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
    pub summary: String,
}

fn single_expr(cfg: &RunConfig) -> Result<Expr> {
    match cfg.exprs.as_slice() {
        [text] => Ok(parse(text)?),
        [] => bail!("--expr is required"),
        _ => bail!("exactly one --expr is expected"),
    }
}

fn parse_vector(text: &str, n: Option<usize>) -> Result<Vec<f64>> {
    let t = text.trim();
    if let Some(k) = t.strip_prefix('e') {
        let k: usize = k
            .parse()
            .with_context(|| format!("bad basis vector `{t}`"))?;
        let n = n.with_context(|| format!("`{t}` needs --n"))?;
        if k == 0 || k > n {
            bail!("basis vector `{t}` is outside l1^{n}");
        }
        let mut x = vec![0.0; n];
        x[k - 1] = 1.0;
        return Ok(x);
    }
    let inner = t
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .with_context(|| format!("bad generator image `{t}`"))?;
    inner
        .split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .with_context(|| format!("bad coordinate in `{t}`"))
        })
        .collect()
}

/// Generator images for the variables of `exprs`: parsed from `--gens`, or
/// the `k`-th sorted variable mapped to `e_k`.
pub fn resolve_generators(cfg: &RunConfig, exprs: &[Expr]) -> Result<Generators> {
    let mut vars: Vec<String> = exprs.iter().flat_map(|e| e.variables()).collect();
    vars.sort();
    vars.dedup();
    let gens: Generators = match &cfg.gens {
        Some(spec) => {
            let items = spec.split(';').filter(|s| !s.trim().is_empty()).count();
            let n = cfg.n.or((!spec.contains('[')).then_some(items));
            let mut out = Generators::new();
            for item in spec.split(';').filter(|s| !s.trim().is_empty()) {
                let (name, image) = item
                    .split_once('=')
                    .with_context(|| format!("bad generator `{item}`"))?;
                out.insert(name.trim(), parse_vector(image, n)?);
            }
            out
        }
        None => {
            let n = cfg.n.unwrap_or(vars.len()).max(vars.len()).max(1);
            let names: Vec<&str> = vars.iter().map(String::as_str).collect();
            standard_generators(&names).map(|x| {
                let mut x = x.clone();
                x.resize(n, 0.0);
                x
            })
        }
    };
    let dims: Vec<usize> = gens.iter().map(|(_, x)| x.len()).collect();
    if dims.windows(2).any(|w| w[0] != w[1]) {
        bail!("generator images have different lengths");
    }
    if let Some(n) = cfg.n {
        if dims.first().is_some_and(|d| *d != n) {
            bail!("generator images do not lie in l1^{n}");
        }
    }
    for v in &vars {
        if gens.get(v).is_none() {
            bail!("no generator image for variable `{v}`");
        }
    }
    Ok(gens)
}

fn generator_dim(gens: &Generators, cfg: &RunConfig) -> usize {
    gens.iter()
        .next()
        .map(|(_, x)| x.len())
        .or(cfg.n)
        .unwrap_or(1)
        .max(1)
}

fn gens_json(gens: &Generators) -> Value {
    gens.iter()
        .map(|(k, x)| (k.clone(), json!(x)))
        .collect::<serde_json::Map<_, _>>()
        .into()
}

/// Samples `ℝⁿ` and, for identities, every model of a seeded random family.
///
/// Exit 0 when the verdicts agree (an identity everywhere, or a real
/// counterexample), exit 1 when a real identity fails in some model.
pub fn cmd_check_identity(cfg: &RunConfig) -> Result<Outcome> {
    let e = single_expr(cfg)?;
    let sampling = RealSampling {
        seed: cfg.seed,
        tol: cfg.tol,
        ..RealSampling::default()
    };
    let real = vanishes_on_reals(&e, &sampling);
    let mut models = Vec::new();
    let mut failures = 0;
    if real.vanishes {
        for (k, spec) in random_model_family(20, 6, cfg.seed).iter().enumerate() {
            let m = spec.build()?;
            let r = vanishes_in_model(&e, m.as_ref(), 50, cfg.seed.wrapping_add(k as u64), cfg.tol);
            if !r.vanishes {
                failures += 1;
            }
            models.push(json!({ "spec": spec, "result": r }));
        }
    }
    let (code, verdict) = match (real.vanishes, failures) {
        (true, 0) => (0, "identity"),
        (true, _) => (EXIT_VIOLATION, "transfer violation"),
        (false, _) => (0, "non-identity"),
    };
    let summary = if real.vanishes {
        format!(
            "{verdict}: {} real points, {} models, {failures} model failures",
            real.points_checked,
            models.len()
        )
    } else {
        let at: Vec<String> = real
            .vars
            .iter()
            .zip(&real.at)
            .map(|(v, a)| format!("{v}={a}"))
            .collect();
        format!("{verdict}: e({}) = {}", at.join(", "), real.value)
    };
    let report = json!({
        "command": "check-identity",
        "params": cfg.echo(),
        "expr": e.to_text(),
        "verdict": verdict,
        "real": real,
        "sampling": sampling,
        "models": models,
    });
    Ok(Outcome {
        code,
        report,
        summary,
    })
}

/// Points per axis of the dual-ball grid in dimension `n`.
pub fn ball_points_per_axis(n: usize) -> usize {
    match n {
        0 | 1 => 2001,
        2 => 201,
        3 => 41,
        4 => 15,
        _ => 5,
    }
}

/// Classifies `e` by where it vanishes: on the dual ball, on `ℝⁿ`, both or
/// neither.
pub fn cmd_kernel(cfg: &RunConfig) -> Result<Outcome> {
    let e = single_expr(cfg)?;
    let gens = resolve_generators(cfg, std::slice::from_ref(&e))?;
    let n = generator_dim(&gens, cfg);
    let grid = BallGrid::new(n, ball_points_per_axis(n))?;
    let ball = vanishes_on_ball(&e, &gens, &grid, cfg.tol)?;
    let sampling = RealSampling {
        seed: cfg.seed,
        tol: cfg.tol,
        ..RealSampling::default()
    };
    let real = vanishes_on_reals(&e, &sampling);
    let class = match (ball.vanishes, real.vanishes) {
        (false, _) => "nonzero on ball",
        (true, false) => "ball-kernel witness",
        (true, true) => "identity",
    };
    let report = json!({
        "command": "kernel",
        "params": cfg.echo(),
        "expr": e.to_text(),
        "generators": gens_json(&gens),
        "classification": class,
        "ballPointsPerAxis": grid.points_per_axis(),
        "ball": ball,
        "real": real,
    });
    let summary = format!(
        "{class}: ball residual {}, real residual {}",
        ball.max_residual, real.max_residual
    );
    Ok(Outcome {
        code: 0,
        report,
        summary,
    })
}

fn write_surface(dir: &Path, stem: &str, f: &falg_core::star::StarFunction) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.csv"));
    let file = File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
    f.write_csv(BufWriter::new(file))?;
    Ok(path)
}

/// Writes `η_{e1}`, `η_{e2}`, `𝟙⋆𝟙` and `T̂e` for each `--expr` as CSV files
/// into the `--out` directory.
pub fn cmd_surface(cfg: &RunConfig) -> Result<Outcome> {
    let exprs: Vec<Expr> = cfg
        .exprs
        .iter()
        .map(|t| parse(t))
        .collect::<Result<_, _>>()?;
    if cfg.n.is_some_and(|n| n != 2) {
        bail!("surface needs --n 2");
    }
    let cfg2 = RunConfig {
        n: Some(2),
        ..cfg.clone()
    };
    let gens = resolve_generators(&cfg2, &exprs)?;
    let grid = Arc::new(CylinderGrid::uniform(2, cfg.grid_r, cfg.grid_sphere)?);
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut files = Vec::new();
    let surfaces = figure_surfaces(&grid)?;
    let one_err = (0..grid.len())
        .map(|k| (surfaces[2].1.values()[k] - grid.r(k)).abs())
        .fold(0.0, f64::max);
    let eta_err = (0..grid.len())
        .map(|k| (surfaces[0].1.values()[k] - grid.u(k)[0]).abs())
        .fold(0.0, f64::max);
    for (stem, f) in &surfaces {
        files.push(write_surface(&dir, stem, f)?);
    }
    for (k, e) in exprs.iter().enumerate() {
        let f = hat_t_eval(e, &gens, &grid)?;
        files.push(write_surface(&dir, &format!("expr_{}", k + 1), &f)?);
    }
    let code = if one_err == 0.0 && eta_err == 0.0 {
        0
    } else {
        EXIT_VIOLATION
    };
    let report = json!({
        "command": "surface",
        "params": cfg.echo(),
        "gridPoints": grid.len(),
        "files": files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect::<Vec<_>>(),
        "oneStarOneMinusR": one_err,
        "etaE1MinusU1": eta_err,
    });
    Ok(Outcome {
        code,
        report,
        summary: format!("wrote {} CSV files to {}", files.len(), dir.display()),
    })
}

/// Lower and upper bounds on the free norm of `T̂e`.
pub fn cmd_norm(cfg: &RunConfig) -> Result<Outcome> {
    let e = single_expr(cfg)?;
    let gens = resolve_generators(cfg, std::slice::from_ref(&e))?;
    let mut tau = TauConfig {
        search_iters: cfg.iters,
        grid_r: cfg.grid_r,
        grid_sphere: cfg.grid_sphere,
        seed: cfg.seed,
        ..TauConfig::default()
    };
    if !cfg.deltas.is_empty() {
        tau.deltas = cfg.deltas.clone();
    }
    let s = match norm_sandwich(&e, &gens, &tau) {
        Ok(s) => s,
        Err(TauError::Unsound { lower, upper }) => {
            let report =
                json!({ "command": "norm", "params": cfg.echo(), "lower": lower, "upper": upper });
            return Ok(Outcome {
                code: EXIT_VIOLATION,
                report,
                summary: format!("unsound: {lower} > {upper}"),
            });
        }
        Err(err) => return Err(err.into()),
    };
    let fbl = if e.contains_product() {
        None
    } else {
        let c = FblConfig {
            iters: cfg.iters,
            seed: cfg.seed,
            ..FblConfig::default()
        };
        Some(fbl_norm_lower(&e, &gens, &c)?)
    };
    let report = json!({
        "command": "norm",
        "params": cfg.echo(),
        "expr": e.to_text(),
        "generators": gens_json(&gens),
        "lower": s.lower,
        "upper": s.upper,
        "majorant": s.majorant,
        "witness": s.witness,
        "iters": cfg.iters,
        "deltas": tau.deltas,
        "candidates": s.candidates,
        "fblLower": fbl,
    });
    Ok(Outcome {
        code: 0,
        report,
        summary: format!("{} <= norm <= {}", s.lower, s.upper),
    })
}

#[derive(Debug, Deserialize)]
struct DiscretizeInput {
    functions: Vec<(String, Vec<f64>)>,
    weight: Vec<f64>,
    composite: Option<String>,
}

/// Runs the level-set discretizer at each δ and checks its bounds.
///
/// Functions come from `--input` (JSON with `functions`, `weight` and an
/// optional `composite` expression) or are `T̂e / max(1, ‖T̂e‖∞)` on the
/// cylinder grid with weight `r`, one per `--expr` (default: the
/// generators).
pub fn cmd_discretize(cfg: &RunConfig) -> Result<Outcome> {
    let deltas = if cfg.deltas.is_empty() {
        vec![2f64.powi(-5), 2f64.powi(-6), 2f64.powi(-7)]
    } else {
        cfg.deltas.clone()
    };
    let (functions, weight, composite) = match &cfg.input {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let input: DiscretizeInput = serde_json::from_str(&text)?;
            let composite = input.composite.as_deref().map(parse).transpose()?;
            (input.functions, input.weight, composite)
        }
        None => {
            let exprs: Vec<Expr> = if cfg.exprs.is_empty() {
                let n = cfg.n.unwrap_or(2);
                (1..=n).map(|i| Expr::var(format!("x{i}"))).collect()
            } else {
                cfg.exprs
                    .iter()
                    .map(|t| parse(t))
                    .collect::<Result<_, _>>()?
            };
            let gens = resolve_generators(cfg, &exprs)?;
            let n = generator_dim(&gens, cfg);
            let grid = Arc::new(CylinderGrid::uniform(n, cfg.grid_r, cfg.grid_sphere)?);
            let mut fs = Vec::new();
            for (k, e) in exprs.iter().enumerate() {
                let f = hat_t_eval(e, &gens, &grid)?;
                let s = f.sup_norm().max(1.0);
                fs.push((
                    format!("f{}", k + 1),
                    f.values().iter().map(|v| v / s).collect(),
                ));
            }
            let weight = (0..grid.len()).map(|k| grid.r(k)).collect();
            (fs, weight, None)
        }
    };
    let mut reports = Vec::new();
    for &delta in &deltas {
        let d = discretize(&functions, &weight, delta)?;
        let v = VerifyConfig {
            pair_trials: 200,
            seed: cfg.seed,
            composite: composite.clone(),
        };
        reports.push(verify_bounds(&d, &v)?);
    }
    let mut order: Vec<usize> = (0..deltas.len()).collect();
    order.sort_by(|&a, &b| deltas[b].total_cmp(&deltas[a]));
    let monotone = order
        .windows(2)
        .all(|w| reports[w[1]].sup_error <= reports[w[0]].sup_error);
    let passed = monotone && reports.iter().all(|r| r.passed);
    let summary = reports
        .iter()
        .map(|r| {
            format!(
                "delta={} atoms={} supError={} passed={}",
                r.delta, r.atoms, r.sup_error, r.passed
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    let report = json!({
        "command": "discretize",
        "params": cfg.echo(),
        "functions": functions.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
        "gridPoints": weight.len(),
        "reports": reports,
        "supErrorMonotone": monotone,
        "passed": passed,
    });
    Ok(Outcome {
        code: if passed { 0 } else { EXIT_VIOLATION },
        report,
        summary,
    })
}

/// Pretty-printed report with a trailing newline.
pub fn render(report: &Value) -> String {
    serde_json::to_string_pretty(report).expect("reports are plain JSON") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(expr: &str) -> RunConfig {
        RunConfig {
            exprs: vec![expr.into()],
            ..RunConfig::default()
        }
    }

    #[test]
    fn generator_specs() {
        let c = RunConfig {
            gens: Some("v=e1;w=e2".into()),
            ..RunConfig::default()
        };
        let g = resolve_generators(&c, &[parse("v*w").unwrap()]).unwrap();
        assert_eq!(g.get("w").unwrap(), &vec![0.0, 1.0]);
        let c = RunConfig {
            gens: Some("v=[0.5,-1]".into()),
            ..RunConfig::default()
        };
        assert_eq!(
            resolve_generators(&c, &[parse("v").unwrap()])
                .unwrap()
                .get("v")
                .unwrap(),
            &vec![0.5, -1.0]
        );
        let c = RunConfig {
            gens: Some("v=e3".into()),
            n: Some(2),
            ..RunConfig::default()
        };
        assert!(resolve_generators(&c, &[parse("v").unwrap()]).is_err());
        let c = RunConfig {
            gens: Some("v=e1".into()),
            ..RunConfig::default()
        };
        assert!(resolve_generators(&c, &[parse("v*w").unwrap()]).is_err());
        let d = resolve_generators(
            &RunConfig {
                n: Some(3),
                ..RunConfig::default()
            },
            &[parse("b + a").unwrap()],
        )
        .unwrap();
        assert_eq!(d.get("a").unwrap(), &vec![1.0, 0.0, 0.0]);
        assert_eq!(d.get("b").unwrap(), &vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn kernel_classes() {
        let class = |e: &str| cmd_kernel(&cfg(e)).unwrap().report["classification"].clone();
        assert_eq!(class("pos(pos(x)*pos(x)-pos(x))"), "ball-kernel witness");
        assert_eq!(class("x"), "nonzero on ball");
        assert_eq!(class("pos(x)*neg(x)"), "identity");
    }

    #[test]
    fn check_identity_verdicts() {
        let o = cmd_check_identity(&cfg("pos(x)*neg(x)")).unwrap();
        assert_eq!(
            (o.code, o.report["verdict"].as_str()),
            (0, Some("identity"))
        );
        let o = cmd_check_identity(&cfg("x \\/ 0")).unwrap();
        assert_eq!(
            (o.code, o.report["verdict"].as_str()),
            (0, Some("non-identity"))
        );
        assert!(o.report["real"]["value"].as_f64().unwrap() > 0.0);
        assert!(cmd_check_identity(&cfg("x +")).is_err());
    }
}
