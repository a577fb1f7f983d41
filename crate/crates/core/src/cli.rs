//! Command-line front end.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use crate::error::{domain, Error, Result};
use crate::kapitsa::{evaluate, ConsistencyMode, JumpResult, PhysicalParams};
use crate::kernel::{idx, Kernel};
use crate::moments::{validate_gamma, MomentEngine, MomentIndex, QuadratureConfig};
use crate::oracle;
use crate::solver::Solver;
use crate::spectrum::{SpectrumMode, SpectrumParams};

pub const JOBS_ENV: &str = "KAPITSA_JOBS";

pub const CSV_HEADER: &str = "gamma,q,w0,spectrum_mode,order,consistency_mode,C_coeff,eps0,eps1,convergence_ratio,quad_err";
pub const FIGURE_HEADER: &str = "curve_label,x,C_coeff";

/// Exit codes.
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NUMERICS: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "kapitsa", version, about = "Temperature jump coefficient and Kapitsa resistance of a Bose gas at a wall")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One parameter point.
    Compute(CommonArgs),
    /// One parameter swept over a range or list, written as CSV.
    Sweep(SweepArgs),
    /// Data behind the four figure families, one CSV each.
    Figures(FigureArgs),
    /// Self-verification suite, one JSON line per check.
    Check(CheckArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Specular reflection fraction in [0, 1).
    #[arg(long)]
    pub q: Option<f64>,
    /// Dimensionless sound speed.
    #[arg(long)]
    pub w0: Option<f64>,
    /// bogoliubov | phonon | free
    #[arg(long)]
    pub spectrum: Option<SpectrumMode>,
    /// Series order, 0 or 1.
    #[arg(long)]
    pub order: Option<usize>,
    /// derived | paper
    #[arg(long)]
    pub consistency: Option<ConsistencyMode>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Output file (compute, sweep) or directory (figures).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to $KAPITSA_JOBS, then the core count.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// key=value file read before the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Particle spin; any of the physical flags enables R in the output.
    #[arg(long)]
    pub spin: Option<f64>,
    /// Surface temperature, K.
    #[arg(long = "t-s")]
    pub t_s: Option<f64>,
    /// Particle mass, kg.
    #[arg(long)]
    pub mass: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweptParam {
    Gamma,
    Q,
    W0,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub param: SweptParam,
    #[arg(long)]
    pub start: Option<f64>,
    #[arg(long)]
    pub stop: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Explicit comma-separated values instead of a range.
    #[arg(long, value_delimiter = ',')]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// 1, 2, 3, 4 or all.
    #[arg(long, default_value = "all")]
    pub figure: String,
    /// Points per curve.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckLevel {
    Quick,
    Full,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "quick")]
    pub level: CheckLevel,
}

/// Everything a run depends on, after defaults, config file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gamma: f64,
    pub q: f64,
    pub w0: f64,
    pub spectrum: SpectrumMode,
    pub order: usize,
    pub consistency: ConsistencyMode,
    pub rel_tol: f64,
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub phys: Option<PhysicalParams>,
}

impl RunConfig {
    fn defaults(order: usize) -> Self {
        let jobs = std::env::var(JOBS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|j| *j > 0)
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
        RunConfig {
            gamma: 1.0,
            q: 0.0,
            w0: 1.0,
            spectrum: SpectrumMode::Bogoliubov,
            order,
            consistency: ConsistencyMode::DerivedChain,
            rel_tol: QuadratureConfig::default().rel_tol,
            jobs,
            out: None,
            phys: None,
        }
    }

    /// Defaults, then the config file named in `args`, then the flags.
    pub fn resolve(args: &CommonArgs, default_order: usize) -> Result<Self> {
        let mut cfg = RunConfig::defaults(default_order);
        let mut phys_keys: BTreeMap<String, f64> = BTreeMap::new();
        if let Some(path) = &args.config {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
            for (n, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap().trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| domain(format!("config line {}: expected key=value", n + 1)))?;
                let (k, v) = (k.trim().replace('-', "_"), v.trim());
                let num = || v.parse::<f64>().map_err(|_| domain(format!("config key {k}: bad number '{v}'")));
                match k.as_str() {
                    "gamma" => cfg.gamma = num()?,
                    "q" => cfg.q = num()?,
                    "w0" => cfg.w0 = num()?,
                    "spectrum" => cfg.spectrum = v.parse()?,
                    "order" => cfg.order = v.parse().map_err(|_| domain(format!("config key order: bad value '{v}'")))?,
                    "consistency" => cfg.consistency = v.parse()?,
                    "rel_tol" => cfg.rel_tol = num()?,
                    "jobs" => cfg.jobs = v.parse().map_err(|_| domain(format!("config key jobs: bad value '{v}'")))?,
                    "out" => cfg.out = Some(PathBuf::from(v)),
                    "spin" | "t_s" | "mass" => {
                        phys_keys.insert(k.clone(), num()?);
                    }
                    other => return Err(domain(format!("config line {}: unknown key '{other}'", n + 1))),
                }
            }
        }
        if let Some(v) = args.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = args.q {
            cfg.q = v;
        }
        if let Some(v) = args.w0 {
            cfg.w0 = v;
        }
        if let Some(v) = args.spectrum {
            cfg.spectrum = v;
        }
        if let Some(v) = args.order {
            cfg.order = v;
        }
        if let Some(v) = args.consistency {
            cfg.consistency = v;
        }
        if let Some(v) = args.rel_tol {
            cfg.rel_tol = v;
        }
        if let Some(v) = args.jobs {
            cfg.jobs = v;
        }
        if let Some(v) = &args.out {
            cfg.out = Some(v.clone());
        }
        for (key, v) in [("spin", args.spin), ("t_s", args.t_s), ("mass", args.mass)] {
            if let Some(v) = v {
                phys_keys.insert(key.to_string(), v);
            }
        }
        if !phys_keys.is_empty() {
            let mut p = PhysicalParams::default();
            for (k, v) in &phys_keys {
                match k.as_str() {
                    "spin" => p.spin_s = *v,
                    "t_s" => p.t_s = *v,
                    _ => p.mass_m = *v,
                }
            }
            p.validate()?;
            cfg.phys = Some(p);
        }
        if cfg.order > 1 {
            return Err(domain(format!("order must be 0 or 1, got {}", cfg.order)));
        }
        if cfg.jobs == 0 {
            return Err(domain("jobs must be >= 1"));
        }
        self::quadrature(cfg.rel_tol)?;
        Ok(cfg)
    }

    pub fn spectrum_params(&self, w0: f64) -> Result<SpectrumParams> {
        SpectrumParams::new(self.spectrum, w0)
    }

    pub fn quadrature(&self) -> QuadratureConfig {
        QuadratureConfig::with_rel_tol(self.rel_tol)
    }

    /// `#`-prefixed line echoing the resolved configuration.
    pub fn header(&self, command: &str, extra: &[(&str, String)]) -> String {
        let mut s = format!(
            "# kapitsa {command} gamma={} q={} w0={} spectrum={} order={} consistency={} rel_tol={} jobs={}",
            self.gamma, self.q, self.w0, self.spectrum, self.order, self.consistency, self.rel_tol, self.jobs
        );
        if let Some(p) = &self.phys {
            let _ = write!(s, " spin={} t_s={} mass={} hbar={} k_b={}", p.spin_s, p.t_s, p.mass_m, p.hbar, p.k_b);
        }
        for (k, v) in extra {
            let _ = write!(s, " {k}={v}");
        }
        s
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| domain(format!("cannot start {} workers: {e}", self.jobs)))
    }
}

fn quadrature(rel_tol: f64) -> Result<QuadratureConfig> {
    let q = QuadratureConfig::with_rel_tol(rel_tol);
    q.validate()?;
    Ok(q)
}

/// Twelve significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn csv_row(r: &JumpResult) -> String {
    [
        fmt_num(r.gamma),
        fmt_num(r.q),
        fmt_num(r.w0),
        r.spectrum_mode.to_string(),
        r.order.to_string(),
        r.consistency_mode.to_string(),
        fmt_num(r.c_coeff),
        fmt_num(r.eps0),
        r.eps1.map(fmt_num).unwrap_or_default(),
        fmt_num(r.convergence_ratio),
        fmt_num(r.quad_err),
    ]
    .join(",")
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Domain(_) | Error::NonIntegrable { .. } => EXIT_INVALID,
        Error::Quadrature { .. }
        | Error::KQuadrature { .. }
        | Error::DispersionDegeneracy { .. }
        | Error::Oscillatory { .. } => EXIT_NUMERICS,
        Error::Io(_) => EXIT_IO,
    }
}

fn validate_point(gamma: f64, q: f64, w0: f64) -> Result<()> {
    validate_gamma(gamma)?;
    if !(0.0..1.0).contains(&q) {
        return Err(domain(format!("q = {q} outside [0, 1)")));
    }
    if !(w0 >= 0.0) || !w0.is_finite() {
        return Err(domain(format!("w0 = {w0} must be finite and >= 0")));
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Run a parsed command, writing human output to `stdout`; returns the exit code.
pub fn run(cli: Cli, stdout: &mut dyn std::io::Write) -> Result<i32> {
    match cli.command {
        Command::Compute(args) => cmd_compute(&RunConfig::resolve(&args, 1)?, stdout),
        Command::Sweep(args) => cmd_sweep(&args, stdout),
        Command::Figures(args) => cmd_figures(&args, stdout),
        Command::Check(args) => cmd_check(&RunConfig::resolve(&args.common, 1)?, args.level, stdout),
    }
}

pub fn compute_point(cfg: &RunConfig, gamma: f64, q: f64, w0: f64) -> Result<JumpResult> {
    validate_point(gamma, q, w0)?;
    let e = MomentEngine::new(gamma, cfg.spectrum_params(w0)?, cfg.quadrature())?;
    evaluate(&e, q, cfg.order, cfg.consistency, cfg.phys.as_ref())
}

pub fn cmd_compute(cfg: &RunConfig, out: &mut dyn std::io::Write) -> Result<i32> {
    let r = compute_point(cfg, cfg.gamma, cfg.q, cfg.w0)?;
    let mut text = String::new();
    let _ = writeln!(text, "gamma: {}", r.gamma);
    let _ = writeln!(text, "q: {}", r.q);
    let _ = writeln!(text, "w0: {}", r.w0);
    let _ = writeln!(text, "spectrum_mode: {}", r.spectrum_mode);
    let _ = writeln!(text, "order: {}", r.order);
    let _ = writeln!(text, "consistency_mode: {}", r.consistency_mode);
    let _ = writeln!(text, "C_coeff: {}", fmt_num(r.c_coeff));
    let _ = writeln!(text, "eps0: {}", fmt_num(r.eps0));
    if let Some(e1) = r.eps1 {
        let _ = writeln!(text, "eps1: {}", fmt_num(e1));
    }
    let _ = writeln!(text, "convergence_ratio: {}", fmt_num(r.convergence_ratio));
    let _ = writeln!(text, "quad_err: {}", fmt_num(r.quad_err));
    if let (Some(rr), Some(et)) = (r.r, r.eps_t_per_flux) {
        let _ = writeln!(text, "R: {}", fmt_num(rr));
        let _ = writeln!(text, "eps_T_per_flux: {}", fmt_num(et));
    }
    out.write_all(text.as_bytes())?;
    if let Some(path) = &cfg.out {
        let csv = format!("{}\n{CSV_HEADER}\n{}\n", cfg.header("compute", &[]), csv_row(&r));
        write_file(path, &csv)?;
    }
    Ok(0)
}

/// Points of a sweep, before validity filtering.
pub fn sweep_values(args: &SweepArgs) -> Result<Vec<f64>> {
    if !args.values.is_empty() {
        return Ok(args.values.clone());
    }
    let (start, stop, step) = match (args.start, args.stop, args.step) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(domain("give --values or all of --start, --stop, --step")),
    };
    if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
        return Err(domain("range needs step > 0 and stop >= start"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(domain("range has too many points"));
    }
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

pub fn cmd_sweep(args: &SweepArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let cfg = RunConfig::resolve(&args.common, 1)?;
    let raw = sweep_values(args)?;
    let point = |v: f64| match args.param {
        SweptParam::Gamma => (v, cfg.q, cfg.w0),
        SweptParam::Q => (cfg.gamma, v, cfg.w0),
        SweptParam::W0 => (cfg.gamma, cfg.q, v),
    };
    let mut points = Vec::new();
    for v in raw {
        let (g, q, w) = point(v);
        match validate_point(g, q, w).and_then(|_| cfg.spectrum_params(w).map(|_| ())) {
            Ok(()) => points.push((g, q, w)),
            Err(e) => eprintln!("skipping {v}: {e}"),
        }
    }
    if points.is_empty() {
        return Err(domain("no sweep point lies in the valid domain"));
    }
    let rows: Vec<JumpResult> = if args.param == SweptParam::Q {
        // q enters only through the prefactor; share one engine.
        let e = MomentEngine::new(cfg.gamma, cfg.spectrum_params(cfg.w0)?, cfg.quadrature())?;
        cfg.pool()?.install(|| {
            points.par_iter().map(|&(_, q, _)| evaluate(&e, q, cfg.order, cfg.consistency, cfg.phys.as_ref())).collect::<Result<Vec<_>>>()
        })?
    } else {
        cfg.pool()?.install(|| points.par_iter().map(|&(g, q, w)| compute_point(&cfg, g, q, w)).collect::<Result<Vec<_>>>())?
    };
    let name = match args.param {
        SweptParam::Gamma => "gamma",
        SweptParam::Q => "q",
        SweptParam::W0 => "w0",
    };
    let mut text = cfg.header("sweep", &[("param", name.to_string())]);
    text.push('\n');
    text.push_str(CSV_HEADER);
    text.push('\n');
    for r in &rows {
        text.push_str(&csv_row(r));
        text.push('\n');
    }
    match &cfg.out {
        Some(path) => write_file(path, &text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(0)
}

/// One family of curves.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureSpec {
    pub id: u8,
    /// Label and `(gamma, q, w0)` as a function of the swept `x`.
    pub curves: Vec<(String, f64)>,
    pub x: Vec<f64>,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

impl FigureSpec {
    pub fn new(id: u8, points: usize) -> Result<Self> {
        if points == 0 {
            return Err(domain("need at least one point per curve"));
        }
        let (curves, x) = match id {
            1 => (vec![1.0, 2.0, 3.0], linspace(1.0, 10.0, points)),
            2 => (vec![1.0, 3.0, 10.0], linspace(0.0, 0.95, points)),
            3 => (vec![5.0, 10.0, 20.0], linspace(0.0, 0.95, points)),
            4 => (vec![1.0, 5.0, 10.0], linspace(1.0, 20.0, points)),
            _ => return Err(domain(format!("unknown figure {id} (1-4)"))),
        };
        let name = match id {
            1 | 3 => "w0",
            _ => "gamma",
        };
        let curves = curves.into_iter().map(|c| (format!("{name}={c}"), c)).collect();
        Ok(FigureSpec { id, curves, x })
    }

    /// `(gamma, q, w0)` for curve parameter `c` at abscissa `x`.
    pub fn point(&self, c: f64, x: f64) -> (f64, f64, f64) {
        match self.id {
            1 => (x, 0.0, c),
            2 => (c, x, 10.0),
            3 => (1.0, x, c),
            _ => (c, 0.5, x),
        }
    }
}

/// `(label, x, C)` rows of one figure.
pub fn figure_rows(cfg: &RunConfig, spec: &FigureSpec) -> Result<Vec<(String, f64, f64)>> {
    let mut jobs = Vec::new();
    for (label, c) in &spec.curves {
        for &x in &spec.x {
            jobs.push((label.clone(), *c, x));
        }
    }
    let q_sweep = matches!(spec.id, 2 | 3);
    cfg.pool()?.install(|| {
        if q_sweep {
            // One engine per curve.
            let per_curve: Vec<Vec<(String, f64, f64)>> = spec
                .curves
                .par_iter()
                .map(|(label, c)| -> Result<Vec<(String, f64, f64)>> {
                    let (g, _, w0) = spec.point(*c, 0.0);
                    validate_point(g, 0.0, w0)?;
                    let e = MomentEngine::new(g, cfg.spectrum_params(w0)?, cfg.quadrature())?;
                    spec.x
                        .iter()
                        .map(|&x| {
                            let r = evaluate(&e, x, cfg.order, cfg.consistency, None)?;
                            Ok((label.clone(), x, r.c_coeff))
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            Ok(per_curve.into_iter().flatten().collect())
        } else {
            jobs.par_iter()
                .map(|(label, c, x)| {
                    let (g, q, w0) = spec.point(*c, *x);
                    let r = compute_point(&RunConfig { phys: None, ..cfg.clone() }, g, q, w0)?;
                    Ok((label.clone(), *x, r.c_coeff))
                })
                .collect()
        }
    })
}

pub fn cmd_figures(args: &FigureArgs, out: &mut dyn std::io::Write) -> Result<i32> {
    let cfg = RunConfig::resolve(&args.common, 0)?;
    let ids: Vec<u8> = match args.figure.trim() {
        "all" => vec![1, 2, 3, 4],
        s => vec![s.parse::<u8>().map_err(|_| domain(format!("unknown figure '{s}' (1-4 or all)")))?],
    };
    let specs = ids.iter().map(|&i| FigureSpec::new(i, args.points)).collect::<Result<Vec<_>>>()?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
    for spec in &specs {
        let rows = figure_rows(&cfg, spec)?;
        let mut text = cfg.header("figures", &[("figure", spec.id.to_string()), ("points", args.points.to_string())]);
        text.push('\n');
        text.push_str(FIGURE_HEADER);
        text.push('\n');
        for (label, x, c) in rows {
            let _ = writeln!(text, "{label},{},{}", fmt_num(x), fmt_num(c));
        }
        let path = dir.join(format!("fig{}.csv", spec.id));
        write_file(&path, &text)?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(0)
}

/// One line of the self-check report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub params: serde_json::Value,
    pub residual: f64,
    pub tol: f64,
}

impl CheckRecord {
    pub fn pass(&self) -> bool {
        self.residual <= self.tol
    }

    pub fn json(&self) -> String {
        json!({
            "check": self.name,
            "params": self.params,
            "residual": self.residual,
            "tol": self.tol,
            "pass": self.pass(),
        })
        .to_string()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(a.abs())
    }
}

/// The self-check suite.
pub fn run_checks(cfg: &RunConfig, level: CheckLevel) -> Result<Vec<CheckRecord>> {
    let qc = cfg.quadrature();
    let mut out = Vec::new();
    let bog = |w0: f64| SpectrumParams::bogoliubov(w0);
    for g in [1.0, 3.0, 10.0] {
        for w0 in [1.0, 5.0, 20.0] {
            let e = MomentEngine::new(g, bog(w0)?, qc)?;
            let kern = Kernel::new(&e);
            let (z1, z2) = kern.identity_residuals(0.0)?;
            out.push(CheckRecord {
                name: "identity_at_zero".into(),
                params: json!({"gamma": g, "w0": w0}),
                residual: z1.max(z2),
                tol: 0.0,
            });
            for k in [0.1, 1.0, 5.0] {
                let p = json!({"gamma": g, "w0": w0, "k": k});
                let (r1, r2) = kern.identity_residuals(k)?;
                out.push(CheckRecord { name: "identity_lambda11".into(), params: p.clone(), residual: r1, tol: 1e-8 });
                out.push(CheckRecord { name: "identity_lambda22".into(), params: p.clone(), residual: r2, tol: 1e-8 });
                let b = kern.bundle(k)?;
                out.push(CheckRecord {
                    name: "determinant".into(),
                    params: p.clone(),
                    residual: rel(b.det.re, b.lambda_from_omega()).max(b.det.im.abs() / b.det.norm()),
                    tol: 1e-9,
                });
                let prod = crate::kernel::mat_mul(&b.lambda_mat, &b.adjugate);
                let scale = b.det.norm();
                let adj = [(prod[0][0] - b.det).norm(), (prod[1][1] - b.det).norm(), prod[0][1].norm(), prod[1][0].norm()]
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v / scale));
                out.push(CheckRecord { name: "adjugate".into(), params: p.clone(), residual: adj, tol: 1e-12 });
                out.push(CheckRecord {
                    name: "omega_positive".into(),
                    params: p,
                    residual: if b.omega > 0.0 { 0.0 } else { 1.0 },
                    tol: 0.0,
                });
            }
        }
    }
    // J -> T reductions on both arguments.
    for (g, w0, k) in [(1.0, 1.0, 0.4), (3.0, 5.0, 1.7), (10.0, 20.0, 0.3)] {
        let e = MomentEngine::new(g, bog(w0)?, qc)?;
        for (name, i) in [("j11", idx::j11(g)), ("j12", idx::j12(g)), ("j21", idx::j21(g)), ("j22", idx::j22(g))] {
            let reduced = MomentIndex { m: i.m - 2.0 * g, ..i };
            let t = e.t(reduced, k)?.value;
            let worst = rel(e.j(i, k, 0.0)?.value, t).max(rel(e.j(i, 0.0, k)?.value, t));
            out.push(CheckRecord {
                name: format!("reduction_{name}"),
                params: json!({"gamma": g, "w0": w0, "k": k}),
                residual: worst,
                tol: 1e-9,
            });
        }
    }
    // Closed-form scalar moments.
    for g in [1.0, 3.0, 10.0] {
        for w0 in [1.0, 5.0, 20.0] {
            let sp = SpectrumParams::phonon(w0)?;
            let got = MomentEngine::new(g, sp, qc)?;
            let want = oracle::phonon_scalars(g, w0);
            let worst = oracle::scalar_pairs(got.scalars(), &want).iter().fold(0.0f64, |m, (a, b)| m.max(rel(*a, *b)));
            out.push(CheckRecord {
                name: "phonon_scalars".into(),
                params: json!({"gamma": g, "w0": w0}),
                residual: worst,
                tol: 1e-10,
            });
        }
        let got = MomentEngine::new(g, SpectrumParams::free(), qc)?;
        let want = oracle::free_scalars(g);
        let worst = oracle::scalar_pairs(got.scalars(), &want).iter().fold(0.0f64, |m, (a, b)| m.max(rel(*a, *b)));
        out.push(CheckRecord { name: "free_scalars".into(), params: json!({"gamma": g}), residual: worst, tol: 1e-10 });
    }
    // eps0 by both paths, and the zeroth-order pole probe.
    for (g, w0) in [(1.0, 1.0), (3.0, 10.0), (10.0, 20.0)] {
        let e = MomentEngine::new(g, bog(w0)?, qc)?;
        let p = Solver::new(&e).eps0_paths()?;
        out.push(CheckRecord {
            name: "eps0_paths".into(),
            params: json!({"gamma": g, "w0": w0}),
            residual: rel(p.t_path, p.g_path),
            tol: 1e-12,
        });
    }
    let e11 = MomentEngine::new(1.0, bog(1.0)?, qc)?;
    let s11 = Solver::new(&e11);
    let ratio0 = |eps: f64| -> Result<f64> { Ok((s11.zeroth_at(1e-4, eps)?.0 / s11.zeroth_at(1e-2, eps)?.0).abs()) };
    out.push(CheckRecord {
        name: "pole_order0_bounded".into(),
        params: json!({"gamma": 1.0, "w0": 1.0}),
        residual: ratio0(s11.eps0())?,
        tol: 10.0,
    });
    out.push(CheckRecord {
        name: "pole_order0_perturbed".into(),
        params: json!({"gamma": 1.0, "w0": 1.0}),
        residual: 50.0 / ratio0(1.01 * s11.eps0())?,
        tol: 1.0,
    });
    if level == CheckLevel::Full {
        let cases: [(MomentIndex, f64, f64, f64, Option<f64>); 5] = [
            (idx::lambda12(1.0), 1.0, 1.0, 0.3, None),
            (idx::a_hat(2.0), 2.0, 3.0, 1.2, None),
            (idx::t1_first(3.0), 3.0, 0.5, 4.0, None),
            (idx::j21(1.0), 1.0, 2.0, 0.6, Some(1.5)),
            (idx::j22(2.0), 2.0, 1.0, 0.2, Some(0.2)),
        ];
        for (i, g, w0, k, k1) in cases {
            let sp = bog(w0)?;
            let e = MomentEngine::new(g, sp, QuadratureConfig::with_rel_tol(1e-12))?;
            let (got, want) = match k1 {
                None => (e.t(i, k)?.value, oracle::nested_t(i, k, g, &sp)?),
                Some(k1) => (e.j(i, k, k1)?.value, oracle::nested_j(i, k, k1, g, &sp)?),
            };
            out.push(CheckRecord {
                name: "nested_quadrature".into(),
                params: json!({"index": i.to_string(), "gamma": g, "w0": w0, "k": k, "k1": k1}),
                residual: rel(got, want),
                tol: 1e-8,
            });
        }
        let e1 = s11.eps1()?;
        let ratio1 = |eps: f64| -> Result<f64> {
            Ok((s11.first_at(1e-4, eps, &e1.zeroth)?.0 / s11.first_at(1e-2, eps, &e1.zeroth)?.0).abs())
        };
        out.push(CheckRecord {
            name: "pole_order1_bounded".into(),
            params: json!({"gamma": 1.0, "w0": 1.0}),
            residual: ratio1(e1.eps1)?,
            tol: 10.0,
        });
        out.push(CheckRecord {
            name: "pole_order1_perturbed".into(),
            params: json!({"gamma": 1.0, "w0": 1.0}),
            residual: 50.0 / ratio1(1.01 * e1.eps1)?,
            tol: 1.0,
        });
        out.push(CheckRecord {
            name: "eps1_refinement".into(),
            params: json!({"gamma": 1.0, "w0": 1.0, "nodes": e1.nodes}),
            residual: e1.last_change,
            tol: 1e-4,
        });
    }
    Ok(out)
}

pub fn cmd_check(cfg: &RunConfig, level: CheckLevel, out: &mut dyn std::io::Write) -> Result<i32> {
    let records = cfg.pool()?.install(|| run_checks(cfg, level))?;
    let mut failed = 0;
    for r in &records {
        writeln!(out, "{}", r.json())?;
        if !r.pass() {
            failed += 1;
        }
    }
    writeln!(
        out,
        "{}",
        json!({"summary": true, "checks": records.len(), "failed": failed, "level": format!("{level:?}").to_lowercase()})
    )?;
    Ok(if failed == 0 { 0 } else { EXIT_CHECK_FAILED })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args() -> CommonArgs {
        CommonArgs::default()
    }

    #[test]
    fn precedence_defaults_file_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "# comment\ngamma = 3\nq=0.25\nspectrum=phonon\n").unwrap();
        let mut a = args();
        a.config = Some(path);
        a.q = Some(0.5);
        let c = RunConfig::resolve(&a, 1).unwrap();
        assert_eq!((c.gamma, c.q, c.w0, c.spectrum, c.order), (3.0, 0.5, 1.0, SpectrumMode::Phonon, 1));
        assert!(c.phys.is_none());
    }

    #[test]
    fn bad_config_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "colour=blue\n").unwrap();
        let mut a = args();
        a.config = Some(path);
        assert!(matches!(RunConfig::resolve(&a, 1), Err(Error::Domain(_))));
        let mut b = args();
        b.order = Some(2);
        assert!(RunConfig::resolve(&b, 1).is_err());
    }

    #[test]
    fn physical_flags_enable_resistance() {
        let mut a = args();
        a.t_s = Some(2.0);
        let c = RunConfig::resolve(&a, 0).unwrap();
        assert_eq!(c.phys.unwrap().t_s, 2.0);
        assert!(c.header("compute", &[]).contains("t_s=2"));
    }

    #[test]
    fn number_format_has_twelve_digits() {
        assert_eq!(fmt_num(1.0 / 3.0), "3.33333333333e-1");
        assert_eq!(fmt_num(-2.5e10), "-2.50000000000e10");
    }

    #[test]
    fn sweep_ranges() {
        let mut s = SweepArgs { common: args(), param: SweptParam::Q, start: Some(0.0), stop: Some(0.3), step: Some(0.1), values: vec![] };
        assert_eq!(sweep_values(&s).unwrap().len(), 4);
        s.step = Some(-1.0);
        assert!(sweep_values(&s).is_err());
        s.values = vec![0.0, 0.5];
        assert_eq!(sweep_values(&s).unwrap(), vec![0.0, 0.5]);
    }

    #[test]
    fn figure_specs() {
        let f = FigureSpec::new(2, 100).unwrap();
        assert_eq!(f.x.len(), 100);
        assert_eq!(*f.x.last().unwrap(), 0.95);
        assert_eq!(f.point(3.0, 0.5), (3.0, 0.5, 10.0));
        assert_eq!(FigureSpec::new(4, 5).unwrap().point(5.0, 7.0), (5.0, 0.5, 7.0));
        assert!(FigureSpec::new(5, 10).is_err());
    }
}
