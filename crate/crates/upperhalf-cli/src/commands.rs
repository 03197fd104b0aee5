//! Subcommand implementations. Each returns the process exit code: 0 for
//! success, 1 for a negative verdict, with configuration and domain errors
//! reported through `Err` and mapped to exit code 2 in `main`.

use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use rayon::prelude::*;

use upperhalf::error::Error;
use upperhalf::expr::parse;
use upperhalf::fields::{
    derived_conformal_factor, field_value_at, potential_value, PotentialParams, VectorFieldSpec,
};
use upperhalf::geodesic::{
    evaluate_along_geodesic, integrate_geodesic, GeodesicState, IntegrationStatus,
};
use upperhalf::geometry::{
    christoffels_at, metric_at, ricci_at, scalar_curvature,
};
use upperhalf::jet::fd_derivatives;
use upperhalf::soliton::{
    fold_report, lie_derivative_metric, residual_stats, GridSpec, ResidualReport,
    SolitonProblem, Verdict,
};
use upperhalf::{Point, SymTensor2};

use crate::config::{self, RawField};
use crate::report::{fmt_f64, render_report, ReportOptions};

/// Relative deviation threshold for the derivative audit.
const AUDIT_TOLERANCE: f64 = 1e-4;

fn parse_csv_f64(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("{what}: '{}' is not a number", part.trim()))
        })
        .collect()
}

fn coords_display(coords: &[f64]) -> String {
    let parts: Vec<String> = coords.iter().map(|c| format!("{c}")).collect();
    format!("({})", parts.join(", "))
}

// check ---------------------------------------------------------------

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Path to the JSON configuration
    #[arg(long)]
    pub config: PathBuf,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the configured tolerance
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    /// Override one grid axis, e.g. --grid x2=0.1:4:20
    #[arg(long, value_name = "AXIS=MIN:MAX:COUNT")]
    pub grid: Vec<String>,
    /// Omit the timestamp so reports are byte-reproducible
    #[arg(long)]
    pub no_timestamp: bool,
    /// Include per-node residual statistics in the report
    #[arg(long)]
    pub dump_points: bool,
    /// Print the canonical validated configuration and exit
    #[arg(long)]
    pub print_config: bool,
}

type NodeRow = (Vec<f64>, f64, f64);

/// Evaluates every grid node in parallel, then folds sequentially in node
/// index order so the aggregate is identical for any worker count.
fn run_sweep(
    prob: &SolitonProblem,
    grid: &GridSpec,
    tolerance: f64,
    keep_rows: bool,
) -> Result<(ResidualReport, Option<Vec<NodeRow>>)> {
    let total = grid.node_count();
    let rows: Vec<Result<NodeRow, Error>> = (0..total)
        .into_par_iter()
        .map(|idx| {
            let coords = grid.node_coords(idx);
            let wrap = |e: Error| Error::NodeEvaluation {
                coords: coords.clone(),
                source: Box::new(e),
            };
            let p = Point::new(coords.clone()).map_err(wrap)?;
            let (abs, fro) = residual_stats(prob, &p).map_err(wrap)?;
            Ok((coords, abs, fro))
        })
        .collect();
    let mut ok_rows = Vec::with_capacity(total);
    for row in rows {
        ok_rows.push(row?);
    }
    if keep_rows {
        let report = fold_report(
            ok_rows.iter().map(|(c, a, f)| (c.clone(), *a, *f)),
            tolerance,
        );
        Ok((report, Some(ok_rows)))
    } else {
        Ok((fold_report(ok_rows, tolerance), None))
    }
}

pub fn cmd_check(args: &CheckArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("cannot read {}", args.config.display()))?;
    let mut raw = config::parse_config(&text)?;
    config::apply_overrides(&mut raw, args.tol, &args.grid)?;
    let validated = config::validate(&raw)?;

    if args.print_config {
        println!("{}", serde_json::to_string_pretty(&validated.canonical)?);
        return Ok(0);
    }

    let (report, dump) = run_sweep(
        &validated.problem,
        &validated.grid,
        validated.tolerance,
        args.dump_points,
    )?;
    let timestamp = if args.no_timestamp {
        None
    } else {
        Some(chrono::Utc::now().to_rfc3339())
    };
    let rendered = render_report(
        &validated.canonical,
        &validated.grid,
        &report,
        &ReportOptions { timestamp, dump },
    );
    match &args.out {
        Some(path) => fs::write(path, &rendered)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{rendered}"),
    }
    Ok(match report.verdict {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
    })
}

// curvature -----------------------------------------------------------

#[derive(Args, Debug)]
pub struct CurvatureArgs {
    /// Point as comma-separated coordinates, e.g. --point 0,2
    #[arg(long, allow_negative_numbers = true)]
    pub point: String,
}

fn print_matrix(label: &str, m: &SymTensor2) {
    println!("{label}:");
    let n = m.n();
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| {
                let v = m.get(i, j);
                // Negative zero reads as noise in a matrix dump.
                format!("{}", if v == 0.0 { 0.0 } else { v })
            })
            .collect();
        println!("  [{}]", row.join(", "));
    }
}

pub fn cmd_curvature(args: &CurvatureArgs) -> Result<u8> {
    let coords = parse_csv_f64(&args.point, "--point")?;
    let p = Point::new(coords)?;
    let n = p.dim();

    println!("point: {}", coords_display(p.coords()));
    print_matrix("metric g_ij", &metric_at(&p));
    println!("nonzero Christoffel symbols (symmetric in the lower pair, i <= j):");
    for (k, i, j, v) in christoffels_at(&p).nonzero_entries() {
        println!("  Gamma^{}_{{{} {}}} = {}", k + 1, i + 1, j + 1, v);
    }
    print_matrix("Ricci tensor", &ricci_at(&p));
    let s = scalar_curvature(n)?;
    println!("scalar curvature: S = {}", s as i64);
    Ok(0)
}

// family --------------------------------------------------------------

#[derive(Args, Debug)]
pub struct FamilyArgs {
    /// Field family as JSON, e.g. '{"family":"killing2d","a":1,"b":2,"c":3}'
    #[arg(long)]
    pub spec: String,
    /// Sample point as comma-separated coordinates; repeatable
    #[arg(long = "point", allow_negative_numbers = true)]
    pub points: Vec<String>,
}

fn family_name(raw: &RawField) -> &'static str {
    match raw {
        RawField::Killing2d { .. } => "killing2d",
        RawField::Killingnd { .. } => "killingnd",
        RawField::Constant { .. } => "constant",
        RawField::Gradient { .. } => "gradient",
        RawField::Custom { .. } => "custom",
    }
}

pub fn cmd_family(args: &FamilyArgs) -> Result<u8> {
    if args.points.is_empty() {
        bail!("at least one --point is required");
    }
    let raw: RawField = serde_json::from_str(&args.spec)
        .context("--spec does not match any field family schema")?;
    let mut points = Vec::with_capacity(args.points.len());
    for text in &args.points {
        let coords = parse_csv_f64(text, "--point")?;
        points.push(Point::new(coords)?);
    }
    let n = points[0].dim();
    for p in &points {
        if p.dim() != n {
            bail!("all --point arguments must share one dimension");
        }
    }
    let field = config::build_field_spec(&raw, n)?;

    println!("family {}, dimension {}", family_name(&raw), n);
    for p in &points {
        let comps = field_value_at(&field, p)?;
        println!(
            "X{} = {}",
            coords_display(p.coords()),
            coords_display(&comps)
        );
        if let VectorFieldSpec::GradientOfPotential(params) = &field {
            println!("  F{} = {}", coords_display(p.coords()), potential_value(params, p)?);
        }
        let lie = lie_derivative_metric(&field, p)?;
        println!("  |L_X g|_max = {:.3e}", lie.max_abs());
    }
    Ok(0)
}

// derive-g ------------------------------------------------------------

#[derive(Args, Debug)]
pub struct DeriveGArgs {
    /// Ambient dimension n
    #[arg(long)]
    pub dim: usize,
    /// Quadratic coefficient of the potential
    #[arg(long, allow_negative_numbers = true)]
    pub a: f64,
    /// Linear coefficients, comma-separated, one per horizontal axis
    #[arg(long, allow_negative_numbers = true)]
    pub b: String,
    /// Constant term of the horizontal part
    #[arg(long, allow_negative_numbers = true)]
    pub c: f64,
    /// Additive constant of the potential
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub e: f64,
    /// Soliton constant
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Trace coupling
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub rho: f64,
}

fn variable_name(i: usize, n: usize) -> String {
    if n == 2 {
        if i == 0 { "x".into() } else { "y".into() }
    } else {
        format!("x{}", i + 1)
    }
}

fn variable_tuple(n: usize) -> String {
    let names: Vec<String> = (0..n).map(|i| variable_name(i, n)).collect();
    names.join(",")
}

/// Renders c0 + sum_i c_i * v_i as a human-readable polynomial, skipping
/// zero terms and joining with explicit signs.
fn render_poly(terms: &[(f64, String)]) -> String {
    let mut out = String::new();
    for (coef, var) in terms {
        if *coef == 0.0 {
            continue;
        }
        let mag = coef.abs();
        let body = if var.is_empty() {
            format!("{mag}")
        } else if mag == 1.0 {
            var.clone()
        } else {
            format!("{mag}*{var}")
        };
        if out.is_empty() {
            if *coef < 0.0 {
                out.push('-');
            }
            out.push_str(&body);
        } else {
            out.push_str(if *coef < 0.0 { " - " } else { " + " });
            out.push_str(&body);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn denominator_terms(params: &PotentialParams, n: usize) -> Vec<(f64, String)> {
    let mut terms = Vec::new();
    let half = params.a() / 2.0;
    for i in 0..n {
        terms.push((half, format!("{}^2", variable_name(i, n))));
    }
    for (i, bi) in params.b().iter().enumerate() {
        terms.push((*bi, variable_name(i, n)));
    }
    terms.push((params.c(), String::new()));
    terms
}

pub fn cmd_derive_g(args: &DeriveGArgs) -> Result<u8> {
    let n = args.dim;
    if n < 2 {
        bail!("dimension must be at least 2, got {n}");
    }
    let b = parse_csv_f64(&args.b, "--b")?;
    if b.len() != n - 1 {
        bail!("--b needs {} entries for dimension {n}, got {}", n - 1, b.len());
    }
    let params = PotentialParams::new(args.a, b, args.c, args.e)?;

    println!(
        "P({}) = {}",
        variable_tuple(n),
        render_poly(&denominator_terms(&params, n))
    );

    let spec = match derived_conformal_factor(params.clone(), args.lambda, args.rho) {
        Ok(spec) => spec,
        Err(Error::PotentialHasZero) => {
            println!("P has zeros in H^{n}");
            return Ok(1);
        }
        Err(Error::PotentialIdenticallyZero) => {
            println!("P is identically zero; no conformal factor can be derived");
            return Ok(1);
        }
        Err(Error::DegenerateLambda { lambda }) => {
            println!(
                "lambda = {lambda} is the degenerate value for dimension {n}, rho = {}; \
                 the factor equation is unconstrained",
                args.rho
            );
            return Ok(1);
        }
        Err(e) => return Err(e.into()),
    };

    println!("zero-free on H^{n}: yes");

    let coeff = args.lambda + ((n - 1) as f64) * (1.0 - n as f64 * args.rho);
    let xn_name = variable_name(n - 1, n);
    let constant_denominator = args.a == 0.0 && params.b().iter().all(|&bi| bi == 0.0);
    let formula = if constant_denominator {
        render_poly(&[(coeff / args.c, xn_name)])
    } else {
        format!(
            "{} / ({})",
            render_poly(&[(coeff, xn_name)]),
            render_poly(&denominator_terms(&params, n))
        )
    };
    println!("G({}) = {}", variable_tuple(n), formula);

    println!("samples:");
    for &xn in &[0.5f64, 1.0, 2.0] {
        let mut coords = vec![0.0; n];
        coords[n - 1] = xn;
        let p = Point::new(coords.clone())?;
        match spec.value_at(&p) {
            Ok(v) => println!("  G{} = {v}", coords_display(&coords)),
            Err(e) => println!("  G{}: {e}", coords_display(&coords)),
        }
    }
    Ok(0)
}

// geodesic ------------------------------------------------------------

#[derive(Args, Debug)]
pub struct GeodesicArgs {
    /// Start point, comma-separated
    #[arg(long, allow_negative_numbers = true)]
    pub start: String,
    /// Initial velocity, comma-separated
    #[arg(long, allow_negative_numbers = true)]
    pub velocity: String,
    /// Integration horizon
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: f64,
    /// Step size
    #[arg(long, allow_negative_numbers = true)]
    pub dt: f64,
    /// Write the trajectory CSV here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Check configuration to evaluate residuals along the trajectory
    #[arg(long)]
    pub eval_config: Option<PathBuf>,
    /// Write the evaluation CSV here instead of stdout
    #[arg(long)]
    pub eval_out: Option<PathBuf>,
}

fn trajectory_csv(traj: &upperhalf::geodesic::Trajectory) -> String {
    let n = traj.samples()[0].1.dim();
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|k| format!("x{k}")));
    header.extend((1..=n).map(|k| format!("v{k}")));
    let mut out = header.join(",");
    out.push('\n');
    for (t, state) in traj.samples() {
        let mut row = vec![fmt_f64(*t)];
        row.extend(state.point().coords().iter().map(|c| fmt_f64(*c)));
        row.extend(state.velocity().iter().map(|v| fmt_f64(*v)));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn cmd_geodesic(args: &GeodesicArgs) -> Result<u8> {
    let start_coords = parse_csv_f64(&args.start, "--start")?;
    let velocity = parse_csv_f64(&args.velocity, "--velocity")?;
    let state = GeodesicState::new(Point::new(start_coords)?, velocity)?;

    if args.eval_config.is_some() && args.out.is_none() && args.eval_out.is_none() {
        bail!(
            "with --eval-config, pass --out or --eval-out so the two CSV \
             streams do not interleave on stdout"
        );
    }

    let traj = integrate_geodesic(state, args.t_max, args.dt)?;
    if let IntegrationStatus::ExitedDomain { t_last } = traj.status() {
        eprintln!(
            "note: trajectory left the domain; last accepted sample at t = {t_last}"
        );
    }

    let csv = trajectory_csv(&traj);
    match &args.out {
        Some(path) => fs::write(path, &csv)
            .with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{csv}"),
    }

    if let Some(cfg_path) = &args.eval_config {
        let text = fs::read_to_string(cfg_path)
            .with_context(|| format!("cannot read {}", cfg_path.display()))?;
        let raw = config::parse_config(&text)?;
        let validated = config::validate(&raw)?;
        if validated.problem.dim() != traj.samples()[0].1.dim() {
            bail!(
                "evaluation config has dimension {}, trajectory has dimension {}",
                validated.problem.dim(),
                traj.samples()[0].1.dim()
            );
        }
        let rows = evaluate_along_geodesic(&validated.problem, &traj)?;
        let mut eval_csv = String::from("t,residual_max_abs,field_norm\n");
        for row in &rows {
            eval_csv.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(row.t),
                fmt_f64(row.residual_max_abs),
                fmt_f64(row.field_norm)
            ));
        }
        match &args.eval_out {
            Some(path) => fs::write(path, &eval_csv)
                .with_context(|| format!("cannot write {}", path.display()))?,
            None => print!("{eval_csv}"),
        }
    }
    Ok(0)
}

// audit-ad ------------------------------------------------------------

#[derive(Args, Debug)]
pub struct AuditAdArgs {
    /// Ambient dimension n
    #[arg(long)]
    pub dim: usize,
    /// Expression to audit; repeatable
    #[arg(long = "expr")]
    pub exprs: Vec<String>,
    /// Evaluation point, comma-separated; repeatable
    #[arg(long = "point", allow_negative_numbers = true)]
    pub points: Vec<String>,
    /// Finite-difference step. The default balances truncation against
    /// roundoff in the second differences.
    #[arg(long, default_value_t = 1e-4, allow_negative_numbers = true)]
    pub step: f64,
}

fn rel_dev(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1.0f64.max(a.abs()).max(b.abs())
}

pub fn cmd_audit_ad(args: &AuditAdArgs) -> Result<u8> {
    let n = args.dim;
    if args.exprs.is_empty() {
        bail!("at least one --expr is required");
    }
    if args.points.is_empty() {
        bail!("at least one --point is required");
    }
    let mut points = Vec::with_capacity(args.points.len());
    for text in &args.points {
        let coords = parse_csv_f64(text, "--point")?;
        if coords.len() != n {
            bail!(
                "--point {} has {} coordinates, expected {n}",
                coords_display(&coords),
                coords.len()
            );
        }
        points.push(Point::new(coords)?);
    }

    let mut worst = 0.0f64;
    for src in &args.exprs {
        let expr = parse(src, n).map_err(|e| anyhow!("--expr '{src}': {e}"))?;
        for p in &points {
            let jet = expr.eval_jet(p)?;
            let fd = fd_derivatives(|q| expr.eval_scalar(q), p, args.step)?;
            let mut grad_dev = 0.0f64;
            for i in 0..n {
                grad_dev = grad_dev.max(rel_dev(jet.grad()[i], fd.grad()[i]));
            }
            let mut hess_dev = 0.0f64;
            for i in 0..n {
                for j in i..n {
                    hess_dev = hess_dev.max(rel_dev(jet.hess().get(i, j), fd.hess().get(i, j)));
                }
            }
            println!(
                "{src}  at {}: grad {:.3e}, hess {:.3e}",
                coords_display(p.coords()),
                grad_dev,
                hess_dev
            );
            worst = worst.max(grad_dev).max(hess_dev);
        }
    }
    println!(
        "max relative deviation: {:.3e} (tolerance {AUDIT_TOLERANCE:e})",
        worst
    );
    let pass = worst < AUDIT_TOLERANCE;
    println!("verdict: {}", if pass { "pass" } else { "fail" });
    Ok(if pass { 0 } else { 1 })
}
