//! `anscombe` subcommands.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anscombe_core::normal_conjugate::{
    asymptotic_cq, classical_rule_compare, pvalue_approx, residual_c, s_of_r, solve_cq,
};
use anscombe_core::oracle::{
    extract_boundary, standard_normal_reward, standardized_reward, value_iteration, EstimatorKind, McConfig,
    RuleValue, StoppingRule, TreeConfig,
};
use anscombe_core::volterra::{residual_q, solve_asymmetric, solve_fixed_point};
use anscombe_core::{explicit, AsymmetricSpec, Boundary, GridShape, HorizonModel, LowerBoundary, Prior, SolverConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{AppError, AppResult};
use crate::io::{
    boundary_csv, read_boundary_csv, read_json, s_boundary_csv, sidecar_path, to_json_pretty, write_atomic,
    BoundaryFile, EstimateDto, HorizonDto, PriorDto, QDto, ThresholdDto, TimeAxis,
};
use crate::parallel::run_parallel;
use crate::plot::{render, Axes, Curve};

#[derive(Debug, Parser)]
#[command(name = "anscombe", version, about = "Optimal stopping boundaries for sequential two-treatment trials")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the boundary for a prior: `r` boundary for discrete priors, `c(s)` for normal ones.
    Boundary(BoundaryArgs),
    /// Map a solved `c(s)` to a particular normal prior.
    Transform(TransformArgs),
    /// Small-`r` asymptotic boundary or p-value approximation.
    Asymptotic(AsymptoticArgs),
    /// Closed-form random-horizon thresholds.
    Explicit(ExplicitArgs),
    /// Binomial-tree value iteration.
    Oracle(OracleArgs),
    /// Monte Carlo value of a stopping rule.
    Simulate(SimulateArgs),
    /// Compare a classical level-alpha rule with the optimal p-value boundary.
    CompareClassical(CompareArgs),
    /// Draw boundary CSV files as an SVG line plot.
    Plot(PlotArgs),
}

fn parse_q(s: &str) -> Result<AsymmetricSpec, String> {
    crate::io::parse_q(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Sqrt,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Trapezoid,
    FixedPoint,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Number of grid nodes.
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
    #[arg(long, value_enum, default_value_t = Shape::Sqrt)]
    pub grid_shape: Shape,
    /// Earliest `r` node.
    #[arg(long, default_value_t = 1e-4)]
    pub rmin: f64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        let grid_shape = match self.grid_shape {
            Shape::Sqrt => GridShape::SqrtClustered,
            Shape::Uniform => GridShape::Uniform,
        };
        SolverConfig { k: self.grid, grid_shape, r_min: self.rmin, ..SolverConfig::default() }
    }
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[arg(long)]
    pub prior: PathBuf,
    /// Outside patients per trial patient, or `inf`.
    #[arg(long, value_parser = parse_q, default_value = "0")]
    pub q: AsymmetricSpec,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Earliest `s` for normal priors.
    #[arg(long, default_value_t = -1e4, allow_hyphen_values = true)]
    pub smin: f64,
    #[arg(long, value_enum, default_value_t = Method::Trapezoid)]
    pub method: Method,
    /// CSV destination (stdout when absent); metadata goes to `<out>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    PosteriorMean,
    Sum,
    Pvalue,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// `s,c_upper,c_lower` file from `boundary`.
    #[arg(long)]
    pub c: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub m0: f64,
    #[arg(long)]
    pub r0: f64,
    /// Recorded in the metadata.
    #[arg(long, value_parser = parse_q, default_value = "0")]
    pub q: AsymmetricSpec,
    #[arg(long, value_enum, default_value_t = Target::Sum)]
    pub target: Target,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AsymptoticArgs {
    /// Standardized time for `c_q(s)`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "r")]
    pub s: Option<f64>,
    /// Trial fraction for the p-value approximation.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub r0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub m0: f64,
    #[arg(long, value_parser = parse_q, default_value = "0")]
    pub q: AsymmetricSpec,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExplicitKind {
    TwoSided,
    OneSided,
    Lomax,
}

#[derive(Debug, Args)]
pub struct ExplicitArgs {
    #[arg(long, value_enum)]
    pub kind: ExplicitKind,
    #[arg(long)]
    pub delta0: Option<f64>,
    #[arg(long)]
    pub r0: Option<f64>,
    /// Also report the Lomax boundary `ŵ √(−s)` at this `s`.
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub prior: PathBuf,
    #[arg(long, value_parser = parse_q, default_value = "0")]
    pub q: AsymmetricSpec,
    /// Time step of the tree.
    #[arg(long, default_value_t = 2.5e-5)]
    pub step: f64,
    /// Lattice half-height (default: six standard deviations plus a coarse boundary estimate).
    #[arg(long)]
    pub ymax: Option<f64>,
    /// Earliest `s` for normal priors.
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub smin: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorChoice {
    Policy,
    Transformed,
    Both,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub prior: PathBuf,
    /// Boundary CSV (`r` or `s` schema).
    #[arg(long, conflicts_with_all = ["threshold", "never"])]
    pub boundary: Option<PathBuf>,
    /// Stop when `|S| ≥ threshold`.
    #[arg(long, conflicts_with = "never")]
    pub threshold: Option<f64>,
    /// With `--threshold`, stop from above only.
    #[arg(long, requires = "threshold")]
    pub one_sided: bool,
    #[arg(long)]
    pub never: bool,
    /// Horizon JSON (default: fixed).
    #[arg(long)]
    pub horizon: Option<PathBuf>,
    #[arg(long, value_parser = parse_q, default_value = "0")]
    pub q: AsymmetricSpec,
    #[arg(long, default_value_t = 100_000)]
    pub paths: u64,
    #[arg(long, default_value_t = 1e-4)]
    pub step: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50.0)]
    pub max_time: f64,
    #[arg(long, value_enum, default_value_t = EstimatorChoice::Both)]
    pub estimator: EstimatorChoice,
    /// `r` grid used when an `s` boundary is mapped to the prior.
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub r: f64,
    #[arg(long, default_value_t = 0.0)]
    pub r0: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub m0: f64,
    #[arg(long, value_parser = parse_q, default_value = "0")]
    pub q: AsymmetricSpec,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Boundary CSV files.
    #[arg(required = true)]
    pub csv: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub xlog: bool,
    #[arg(long)]
    pub ylog: bool,
    #[arg(long)]
    pub title: Option<String>,
}

/// Parse `args` (including the program name), run, and return the exit code. Errors go
/// to stderr as one JSON object.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion | K::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return 0;
            }
            let err = AppError::validation(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return err.kind().exit_code();
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.kind().exit_code()
        }
    }
}

pub fn run(cmd: Command) -> AppResult<()> {
    match cmd {
        Command::Boundary(a) => boundary(a),
        Command::Transform(a) => transform(a),
        Command::Asymptotic(a) => asymptotic(a),
        Command::Explicit(a) => explicit_cmd(a),
        Command::Oracle(a) => oracle(a),
        Command::Simulate(a) => simulate(a),
        Command::CompareClassical(a) => compare(a),
        Command::Plot(a) => plot(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> AppResult<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| AppError::io("<stdout>", e))
        }
    }
}

fn emit_with_sidecar<M: Serialize>(out: Option<&Path>, csv: &str, meta: &M) -> AppResult<()> {
    emit(out, csv)?;
    if let Some(p) = out {
        write_atomic(&sidecar_path(p), to_json_pretty(meta).as_bytes())?;
    }
    Ok(())
}

fn load_prior(path: &Path) -> AppResult<Prior> {
    read_json::<PriorDto>(path)?.to_prior()
}

fn write_plot(path: &Path, file: &BoundaryFile, label: &str) -> AppResult<()> {
    let curves = boundary_curves(file, label);
    let (x_label, y_label) = match file.axis {
        TimeAxis::R => ("r", "boundary"),
        TimeAxis::S => ("s", "c(s)"),
    };
    let axes = Axes { x_label: x_label.into(), y_label: y_label.into(), ..Axes::default() };
    write_atomic(path, render(&curves, &axes)?.as_bytes())
}

fn boundary_curves(file: &BoundaryFile, label: &str) -> Vec<Curve> {
    let b = &file.boundary;
    let mut curves =
        vec![Curve { label: label.to_string(), points: b.grid.iter().copied().zip(b.upper.iter().copied()).collect() }];
    if let LowerBoundary::Curve(l) = &b.lower {
        curves.push(Curve { label: format!("{label} (lower)"), points: b.grid.iter().copied().zip(l.iter().copied()).collect() });
    }
    curves
}

fn boundary(a: BoundaryArgs) -> AppResult<()> {
    let prior = load_prior(&a.prior)?;
    let cfg = a.solver.config();
    let q = QDto::from(a.q);
    match prior {
        Prior::NormalConjugate { .. } => {
            if a.method == Method::FixedPoint {
                return Err(AppError::validation("the fixed-point method covers discrete priors only"));
            }
            let c = solve_cq(a.q, &cfg, a.smin)?;
            let res = residual_c(&c, a.q)?;
            let meta = json!({
                "command": "boundary", "prior": PriorDto::from(&prior), "q": q, "grid": cfg.k,
                "s_min": a.smin, "residual": res,
                "note": "c(s) does not depend on (m0, r0); use `transform` to map it",
            });
            emit_with_sidecar(a.out.as_deref(), &s_boundary_csv(&c), &meta)?;
            if let Some(p) = &a.plot {
                let file = BoundaryFile { axis: TimeAxis::S, boundary: Boundary::new(c.grid, c.upper, c.lower)? };
                write_plot(p, &file, "c(s)")?;
            }
        }
        _ => {
            let (b, iterations) = match a.method {
                Method::Trapezoid => (solve_asymmetric(&prior, a.q, &cfg)?, None),
                Method::FixedPoint => {
                    if !a.q.is_zero() {
                        return Err(AppError::validation("the fixed-point method covers q = 0 only"));
                    }
                    let r = solve_fixed_point(&prior, &cfg)?;
                    (r.boundary, Some(r.iterations))
                }
            };
            let b = if a.q.is_zero() { Boundary { lower: LowerBoundary::Mirror, ..b } } else { b };
            let res = residual_q(&prior, a.q, &b)?;
            let meta = json!({
                "command": "boundary", "prior": PriorDto::from(&prior), "q": q, "grid": cfg.k,
                "r_min": cfg.r_min, "residual": res, "fixed_point_iterations": iterations,
            });
            let csv = boundary_csv(TimeAxis::R, &b.grid, &b.upper, &b.lower);
            emit_with_sidecar(a.out.as_deref(), &csv, &meta)?;
            if let Some(p) = &a.plot {
                write_plot(p, &BoundaryFile { axis: TimeAxis::R, boundary: b }, "b(r)")?;
            }
        }
    }
    Ok(())
}

fn transform(a: TransformArgs) -> AppResult<()> {
    let c = read_boundary_csv(&a.c)?.into_standard()?;
    let view = c.for_prior(a.m0, a.r0)?;
    let cfg = a.solver.config();
    cfg.validate()?;
    let grid = cfg.r_grid();
    let b = match a.target {
        Target::Sum => view.sum_boundary(&grid)?,
        Target::PosteriorMean => {
            if a.r0 <= 0.0 {
                return Err(AppError::validation("the posterior-mean boundary needs r0 > 0"));
            }
            let scale = (a.r0 + 1.0).sqrt();
            let mut upper = Vec::with_capacity(grid.len());
            let mut lower = Vec::with_capacity(grid.len());
            for &r in &grid {
                let s = s_of_r(a.r0, r);
                upper.push(c.upper_at(s)? / scale);
                lower.push(c.lower_at(s)? / scale);
            }
            let lower = match c.lower {
                LowerBoundary::Curve(_) => LowerBoundary::Curve(lower),
                ref other => other.clone(),
            };
            Boundary::new(grid.clone(), upper, lower)?
        }
        Target::Pvalue => {
            // One threshold per time; the lower column stays empty.
            let upper = grid.iter().map(|&r| view.pvalue(r)).collect::<Result<Vec<_>, _>>()?;
            Boundary { grid: grid.clone(), upper, lower: LowerBoundary::Mirror }
        }
    };
    let target = match a.target {
        Target::Sum => "sum",
        Target::PosteriorMean => "posterior_mean",
        Target::Pvalue => "pvalue",
    };
    let meta = json!({
        "command": "transform", "m0": a.m0, "r0": a.r0, "q": QDto::from(a.q), "s_min": c.s_min(),
        "target": target, "grid": cfg.k, "r_min": cfg.r_min,
    });
    let csv = boundary_csv(TimeAxis::R, &b.grid, &b.upper, &b.lower);
    emit_with_sidecar(a.out.as_deref(), &csv, &meta)?;
    if let Some(p) = &a.plot {
        write_plot(p, &BoundaryFile { axis: TimeAxis::R, boundary: b }, target)?;
    }
    Ok(())
}

fn asymptotic(a: AsymptoticArgs) -> AppResult<()> {
    let v = match (a.s, a.r) {
        (Some(s), None) => json!({ "s": s, "q": QDto::from(a.q), "c_asymptotic": asymptotic_cq(s, a.q)? }),
        (None, Some(r)) => json!({
            "r": r, "r0": a.r0, "m0": a.m0, "q": QDto::from(a.q),
            "pvalue_approx": pvalue_approx(r, a.r0, a.m0, a.q)?,
        }),
        _ => return Err(AppError::validation("give exactly one of --s or --r")),
    };
    emit(a.out.as_deref(), &to_json_pretty(&v))
}

fn explicit_cmd(a: ExplicitArgs) -> AppResult<()> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| AppError::validation(format!("--{name} is required for this kind")));
    let v = match a.kind {
        ExplicitKind::TwoSided => {
            serde_json::to_value(ThresholdDto::from(explicit::maximin_exp_two_sided(need(a.delta0, "delta0")?)?))
        }
        ExplicitKind::OneSided => {
            serde_json::to_value(ThresholdDto::from(explicit::maximin_exp_one_sided(need(a.delta0, "delta0")?)?))
        }
        ExplicitKind::Lomax => {
            let r0 = need(a.r0, "r0")?;
            let t = ThresholdDto::from(explicit::lomax_threshold(r0)?);
            let mut v = serde_json::to_value(t).expect("record serializes");
            if let Some(s) = a.s {
                v["s"] = json!(s);
                v["boundary"] = json!(explicit::lomax_boundary(r0, s)?);
            }
            Ok(v)
        }
    }
    .expect("record serializes");
    emit(a.out.as_deref(), &to_json_pretty(&v))
}

fn oracle(a: OracleArgs) -> AppResult<()> {
    let prior = load_prior(&a.prior)?;
    let coarse = SolverConfig { k: 200, ..SolverConfig::default() };
    let peak = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (axis, grid) = match prior {
        Prior::NormalConjugate { .. } => {
            if !(a.smin < -1.0) {
                return Err(AppError::validation("--smin must be below -1"));
            }
            let est = solve_cq(a.q, &coarse, a.smin.min(-1.5))?;
            let lower_peak = match &est.lower {
                LowerBoundary::Curve(l) => peak(l),
                _ => 0.0,
            };
            let guess = peak(&est.upper).max(lower_peak);
            let y_max = a.ymax.unwrap_or(6.0 * (-1.0 - a.smin).sqrt() + guess);
            let cfg = TreeConfig::new(a.smin, -1.0, a.step, y_max);
            (TimeAxis::S, value_iteration(standard_normal_reward(a.q), &cfg)?)
        }
        _ => {
            let est = solve_asymmetric(&prior, a.q, &coarse)?;
            let guess = peak(&est.upper).max(est.lower_values().map_or(0.0, |l| peak(&l)));
            let y_max = a.ymax.unwrap_or(6.0 + guess);
            let cfg = TreeConfig::new(0.0, 1.0, a.step, y_max);
            (TimeAxis::R, value_iteration(standardized_reward(&prior, a.q), &cfg)?)
        }
    };
    let ex = extract_boundary(&grid)?;
    let near_top = grid.upper_index.iter().chain(&grid.lower_index).flatten().any(|&j| j + 2 > grid.j_max - 1);
    if near_top {
        return Err(AppError::validation("tree boundary within two cells of the lattice top; raise --ymax"));
    }
    let b = ex.boundary;
    let meta = json!({
        "command": "oracle", "prior": PriorDto::from(&prior), "q": QDto::from(a.q), "step": grid.times[0] - grid.times[1],
        "dy": grid.dy, "y_top": grid.j_max as f64 * grid.dy, "value_at_origin": grid.value_at_origin,
        "upper_flagged": ex.upper_flagged.iter().filter(|&&f| f).count(),
        "lower_flagged": ex.lower_flagged.iter().filter(|&&f| f).count(),
    });
    let csv = boundary_csv(axis, &b.grid, &b.upper, &b.lower);
    emit_with_sidecar(a.out.as_deref(), &csv, &meta)?;
    if let Some(p) = &a.plot {
        write_plot(p, &BoundaryFile { axis, boundary: b }, "tree")?;
    }
    Ok(())
}

fn simulate(a: SimulateArgs) -> AppResult<()> {
    let prior = load_prior(&a.prior)?;
    let horizon = match &a.horizon {
        Some(p) => read_json::<HorizonDto>(p)?.to_model()?,
        None => HorizonModel::Fixed { n: 1.0 },
    };
    let owned: Option<Boundary> = match &a.boundary {
        None => None,
        Some(p) => {
            let file = read_boundary_csv(p)?;
            Some(match (file.axis, &prior) {
                (TimeAxis::R, _) => file.boundary,
                (TimeAxis::S, Prior::NormalConjugate { m0, r0 }) => {
                    let c = file.into_standard()?;
                    let cfg = a.solver.config();
                    cfg.validate()?;
                    c.for_prior(*m0, *r0)?.sum_boundary(&cfg.r_grid())?
                }
                (TimeAxis::S, _) => return Err(AppError::validation("an s-schema boundary needs a normal prior")),
            })
        }
    };
    let rule = match (&owned, a.threshold, a.never) {
        (Some(b), _, _) => StoppingRule::Boundary(b),
        (None, Some(x), _) => {
            StoppingRule::Constant { upper: x, lower: if a.one_sided { f64::NEG_INFINITY } else { -x } }
        }
        (None, None, true) => StoppingRule::Never,
        (None, None, false) => return Err(AppError::validation("give --boundary, --threshold or --never")),
    };
    let cfg = McConfig { max_time: a.max_time, ..McConfig::new(a.paths, a.step, a.seed) };
    let run = |kind: EstimatorKind, seed: u64| -> AppResult<EstimateDto> {
        let est = RuleValue::new(kind, &prior, rule, a.q, &horizon, McConfig { seed, ..cfg })?;
        Ok(run_parallel(&est)?.into())
    };
    // Independent streams so the two estimates can be compared with their own errors.
    let policy = match a.estimator {
        EstimatorChoice::Transformed => None,
        _ => Some(run(EstimatorKind::Policy, a.seed)?),
    };
    let transformed = match a.estimator {
        EstimatorChoice::Policy => None,
        _ => Some(run(EstimatorKind::Transformed, a.seed.wrapping_add(1))?),
    };
    let z = match (&policy, &transformed) {
        (Some(p), Some(t)) => {
            Some((p.mean - t.mean).abs() / (p.std_error.powi(2) + t.std_error.powi(2)).sqrt())
        }
        _ => None,
    };
    let v = json!({
        "prior": PriorDto::from(&prior), "q": QDto::from(a.q), "policy": policy, "transformed": transformed,
        "z_score": z,
    });
    emit(a.out.as_deref(), &to_json_pretty(&v))
}

fn compare(a: CompareArgs) -> AppResult<()> {
    let rep = classical_rule_compare(a.alpha, a.r, a.q, a.r0, a.m0)?;
    let v = json!({
        "alpha": a.alpha, "r": a.r, "r0": a.r0, "m0": a.m0, "q": QDto::from(a.q),
        "ordering": rep.ordering.as_str(), "classical": rep.classical, "optimal": rep.optimal,
    });
    emit(a.out.as_deref(), &to_json_pretty(&v))
}

fn plot(a: PlotArgs) -> AppResult<()> {
    let mut curves = Vec::new();
    let mut axis = None;
    for p in &a.csv {
        let file = read_boundary_csv(p)?;
        if axis.is_some_and(|x| x != file.axis) {
            return Err(AppError::validation("cannot mix r and s boundary files in one plot"));
        }
        axis = Some(file.axis);
        let label = p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
        curves.extend(boundary_curves(&file, &label));
    }
    let x_label = match axis {
        Some(TimeAxis::S) => "s",
        _ => "r",
    };
    let axes = Axes { title: a.title, x_label: x_label.into(), y_label: "boundary".into(), x_log: a.xlog, y_log: a.ylog };
    write_atomic(&a.out, render(&curves, &axes)?.as_bytes())
}
