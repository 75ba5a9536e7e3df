//! Command-line entry point: identity suites, calibration, and
//! pointwise-residual scans, with machine-readable reports.

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ambient::{AmbientVector, Direction};
use crate::error::{Error, Result};
use crate::identities::{
    calibrate_gb_constants, check_bivens, check_closed_form, check_corollary2, check_frame_sum,
    check_gauss_bonnet, check_grotemeyer, check_moment_identity, check_recursion, check_theorem2,
    check_vector_identity, CheckConfig, IdentityReport,
};
use crate::quadrature::default_nodes;
use crate::report::{ConstantsFile, RunReport, ScanRunReport, TOOL_VERSION};
use crate::scan::scan_shape;
use crate::shapes::{catalog, default_catalog, make_shape, Shape, ShapeParams};

const EXIT_OK: i32 = 0;
const EXIT_NUMERICAL: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "spaceform",
    version,
    about = "Curvature integrals and identity verification for closed hypersurfaces in space forms"
)]
struct Cli {
    /// Worker thread count (overrides the SPACEFORM_THREADS environment
    /// variable; default: all cores). Reports are byte-identical across
    /// thread counts.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List available shapes and identities.
    List,
    /// Run identity checkers on a shape and write a JSON report.
    Verify(VerifyArgs),
    /// Calibrate the space-form Gauss-Bonnet constants from geodesic spheres.
    Calibrate(CalibrateArgs),
    /// Sample random points per shape and report max pointwise residuals.
    Scan(ScanArgs),
}

#[derive(Args)]
struct ShapeArgs {
    /// Catalog shape name (see `list`).
    #[arg(long)]
    shape: String,
    /// Hypersurface dimension, for shapes that take it.
    #[arg(long)]
    n: Option<usize>,
    /// Sectional curvature of the ambient space form.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<f64>,
    /// Radius (spheres, geodesic spheres).
    #[arg(long)]
    rho: Option<f64>,
    /// Ring radius of the torus of revolution.
    #[arg(long = "R")]
    big_r: Option<f64>,
    /// Tube radius (torus of revolution, tube_r5).
    #[arg(long)]
    r: Option<f64>,
    /// Angle parameter (Clifford torus, tube_s5).
    #[arg(long)]
    alpha: Option<f64>,
    /// Ellipsoid semi-axes, comma separated.
    #[arg(long, value_delimiter = ',')]
    semi_axes: Option<Vec<f64>>,
    /// Flip the catalog orientation of the shape.
    #[arg(long)]
    flip_orientation: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    shape: ShapeArgs,
    /// Identities to check (comma separated), or `all`.
    #[arg(long, value_delimiter = ',', required = true)]
    identity: Vec<String>,
    /// Direction vector: coordinates `x0,x1,...` or `random-seed:<int>`.
    #[arg(long, default_value = "random-seed:0", allow_hyphen_values = true)]
    a: String,
    /// Accept a timelike direction vector in the hyperbolic case.
    #[arg(long)]
    allow_timelike: bool,
    /// Moment orders for the moment/vector/recursion/closed-form families.
    #[arg(long, value_delimiter = ',')]
    m: Vec<u32>,
    /// Quadrature nodes per axis (one value broadcasts).
    #[arg(long, value_delimiter = ',')]
    nodes: Vec<usize>,
    /// Relative tolerance of the pass threshold.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Gauss-Bonnet constants file (required for k != 0 topological checks).
    #[arg(long)]
    constants: Option<PathBuf>,
    /// Report output path.
    #[arg(long, default_value = "spaceform_report.json")]
    out: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Even hypersurface dimension.
    #[arg(long)]
    n: usize,
    /// Nonzero sectional curvature.
    #[arg(long, allow_hyphen_values = true)]
    k: f64,
    /// Geodesic radii: the first n/2 fit the system, the rest are held out
    /// for validation.
    #[arg(long, value_delimiter = ',', required = true)]
    radii: Vec<f64>,
    /// Quadrature nodes per axis.
    #[arg(long, value_delimiter = ',')]
    nodes: Vec<usize>,
    /// Constants output path.
    #[arg(long, default_value = "spaceform_constants.json")]
    out: PathBuf,
    /// Optional path for the validation report file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    /// Shape to scan; omitted scans the whole default catalog.
    #[command(flatten)]
    shape: OptionalShapeArgs,
    /// Random interior points per chart.
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Random seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Residual tolerance (default 1e-8 for n = 2 shapes, 1e-6 otherwise).
    #[arg(long)]
    tol: Option<f64>,
    /// Report output path.
    #[arg(long, default_value = "spaceform_scan.json")]
    out: PathBuf,
}

#[derive(Args)]
struct OptionalShapeArgs {
    #[arg(long)]
    shape: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    k: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long = "R")]
    big_r: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    semi_axes: Option<Vec<f64>>,
    #[arg(long)]
    flip_orientation: bool,
}

const IDENTITY_IDS: &[(&str, &str)] = &[
    ("grotemeyer", "int (a.n)^2 G dv = (2 pi / 3) chi  [k = 0, n = 2]"),
    ("corollary2", "space-form surface identity  [n = 2, any k]"),
    ("moment", "moment-family identity, m >= 1  [any n]"),
    ("vector", "pre-contraction vector identity, m >= 0  [any n]"),
    ("bivens", "int (n q G - k p K_{n-1}) dv = 0  [any n]"),
    ("theorem2", "normal-moment theorem with Gauss-Bonnet bracket  [even n]"),
    ("gauss_bonnet", "int G dv = (vol S^n / 2) chi - sum c_i k^i int K_{n-2i}  [even n]"),
    ("frame_sum", "signature-weighted frame sum reproducing Gauss-Bonnet  [even n]"),
    ("recursion", "downward moment recursion, m >= 2  [any n]"),
    ("closed_form", "closed-form moment evaluation  [even n, m >= 1]"),
];

fn configure_threads(requested: Option<usize>) {
    let from_env = std::env::var("SPACEFORM_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok());
    if let Some(t) = requested.or(from_env) {
        // Ignore failure: the global pool can only be initialized once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build_global();
    }
}

fn shape_params(args: &ShapeArgs) -> ShapeParams {
    ShapeParams {
        n: args.n,
        k: args.k,
        rho: args.rho,
        big_r: args.big_r,
        r: args.r,
        alpha: args.alpha,
        semi_axes: args.semi_axes.clone(),
    }
}

fn build_shape(args: &ShapeArgs) -> Result<Shape> {
    let mut shape = make_shape(&args.shape, &shape_params(args))?;
    if let Some(k) = args.k {
        if shape.form.k != k {
            return Err(Error::Parameter(format!(
                "shape {} has k = {}, but --k {k} was requested",
                shape.descriptor, shape.form.k
            )));
        }
    }
    if args.flip_orientation {
        shape = shape.flipped();
    }
    Ok(shape)
}

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Resolves the `--a` argument: explicit coordinates or a seeded uniform
/// draw on the unit sphere (spacelike by default when k < 0).
fn resolve_direction(
    spec: &str,
    shape: &Shape,
    allow_timelike: bool,
) -> Result<(Direction, Option<u64>)> {
    let sig = &shape.form.signature;
    if let Some(seed_text) = spec.strip_prefix("random-seed:") {
        let seed: u64 = seed_text
            .parse()
            .map_err(|_| Error::Configuration(format!("invalid random seed: {seed_text}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let v = AmbientVector::new((0..sig.dim).map(|_| standard_normal(&mut rng)).collect());
            let signed = sig.inner_slices(&v.coords, &v.coords);
            let euclid: f64 = v.coords.iter().map(|c| c * c).sum();
            if euclid < 1e-12 || (shape.form.k < 0.0 && signed < 1e-3 * euclid) {
                continue; // default draws are spacelike
            }
            return Ok((Direction::normalize(&v, sig)?, Some(seed)));
        }
    }
    let coords: std::result::Result<Vec<f64>, _> =
        spec.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let coords =
        coords.map_err(|_| Error::Configuration(format!("cannot parse direction: {spec}")))?;
    let dir = Direction::normalize(&AmbientVector::new(coords), sig)?;
    if dir.inner < 0.0 && !allow_timelike {
        return Err(Error::Configuration(
            "direction is timelike; pass --allow-timelike to proceed".into(),
        ));
    }
    Ok((dir, None))
}

fn applicable_identities(shape: &Shape, has_constants: bool) -> Vec<&'static str> {
    let n = shape.n();
    let k = shape.form.k;
    let mut ids = Vec::new();
    if k == 0.0 && n == 2 {
        ids.push("grotemeyer");
    }
    if n == 2 {
        ids.push("corollary2");
    }
    ids.extend(["moment", "vector", "bivens", "recursion"]);
    if n % 2 == 0 && (k == 0.0 || has_constants) {
        ids.extend(["theorem2", "gauss_bonnet", "frame_sum", "closed_form"]);
    }
    ids
}

struct VerifyPlan<'a> {
    shape: Shape,
    identities: Vec<&'static str>,
    dir: Direction,
    seed: Option<u64>,
    m_values: Vec<u32>,
    cfg: CheckConfig,
    constants: Option<Vec<f64>>,
    a_echo: &'a str,
}

fn plan_verify(args: &VerifyArgs) -> Result<VerifyPlan<'_>> {
    let shape = build_shape(&args.shape)?;

    let constants = match &args.constants {
        Some(path) => {
            let file = ConstantsFile::load(path)?;
            if file.n != shape.n() {
                return Err(Error::Configuration(format!(
                    "constants file is for n = {}, shape has n = {}",
                    file.n,
                    shape.n()
                )));
            }
            Some(file.c)
        }
        None => None,
    };

    let known: Vec<&'static str> = IDENTITY_IDS.iter().map(|(id, _)| *id).collect();
    let mut identities: Vec<&'static str> = Vec::new();
    for requested in &args.identity {
        if requested == "all" {
            for id in applicable_identities(&shape, constants.is_some()) {
                if !identities.contains(&id) {
                    identities.push(id);
                }
            }
        } else {
            match known.iter().find(|id| **id == requested.as_str()) {
                Some(id) => {
                    if !identities.contains(id) {
                        identities.push(id);
                    }
                }
                None => {
                    return Err(Error::Configuration(format!(
                        "unknown identity: {requested} (see `spaceform list`)"
                    )))
                }
            }
        }
    }

    let (dir, seed) = resolve_direction(&args.a, &shape, args.allow_timelike)?;

    let mut cfg = CheckConfig::for_shape(&shape);
    if !args.nodes.is_empty() {
        cfg.nodes_per_axis = args.nodes.clone();
    }
    if let Some(tol) = args.rel_tol {
        cfg.rel_tol = tol;
    }

    Ok(VerifyPlan {
        shape,
        identities,
        dir,
        seed,
        m_values: args.m.clone(),
        cfg,
        constants,
        a_echo: &args.a,
    })
}

fn run_verify_plan(plan: &VerifyPlan) -> Result<Vec<IdentityReport>> {
    let mut reports = Vec::new();
    let shape = &plan.shape;
    let cfg = &plan.cfg;
    let dir = &plan.dir;
    let c = plan.constants.as_deref();
    let moment_ms = if plan.m_values.is_empty() {
        vec![1]
    } else {
        plan.m_values.clone()
    };
    let recursion_ms: Vec<u32> = if plan.m_values.is_empty() {
        vec![2]
    } else {
        plan.m_values.iter().copied().filter(|&m| m >= 2).collect()
    };
    for id in &plan.identities {
        match *id {
            "grotemeyer" => reports.push(check_grotemeyer(shape, dir, cfg)?),
            "corollary2" => reports.push(check_corollary2(shape, dir, cfg)?),
            "moment" => {
                for &m in &moment_ms {
                    reports.push(check_moment_identity(shape, dir, m.max(1), cfg)?);
                }
            }
            "vector" => {
                for &m in &moment_ms {
                    reports.push(check_vector_identity(shape, dir, m, cfg)?);
                }
            }
            "bivens" => reports.push(check_bivens(shape, dir, cfg)?),
            "theorem2" => reports.push(check_theorem2(shape, dir, cfg, c)?),
            "gauss_bonnet" => reports.push(check_gauss_bonnet(shape, cfg, c)?),
            "frame_sum" => reports.push(check_frame_sum(shape, cfg, c)?),
            "recursion" => {
                for &m in &recursion_ms {
                    reports.push(check_recursion(shape, dir, m, cfg)?);
                }
            }
            "closed_form" => {
                for &m in &moment_ms {
                    reports.push(check_closed_form(shape, dir, m.max(1), cfg, c)?);
                }
            }
            _ => unreachable!("identity list is pre-validated"),
        }
    }
    Ok(reports)
}

fn print_report_line(r: &IdentityReport) {
    let status = if r.pass { "PASS" } else { "FAIL" };
    let m = r.m.map(|m| format!(" m={m}")).unwrap_or_default();
    println!(
        "[{status}] {}{m} on {}: lhs={:.9e} rhs={:.9e} abs_err={:.3e} rel_err={:.3e}",
        r.identity, r.shape, r.lhs, r.rhs, r.abs_err, r.rel_err
    );
}

fn verify_config_echo(plan: &VerifyPlan) -> String {
    let nodes: Vec<String> = plan
        .cfg
        .nodes_per_axis
        .iter()
        .map(|n| n.to_string())
        .collect();
    let ms: Vec<String> = plan.m_values.iter().map(|m| m.to_string()).collect();
    format!(
        "verify --shape {} --identity {} --a {} --m [{}] --nodes [{}] --rel-tol {:e}",
        plan.shape.descriptor,
        plan.identities.join(","),
        plan.a_echo,
        ms.join(","),
        nodes.join(","),
        plan.cfg.rel_tol
    )
}

fn cmd_verify(args: &VerifyArgs) -> i32 {
    let plan = match plan_verify(args) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match run_verify_plan(&plan) {
        Ok(reports) => {
            for r in &reports {
                print_report_line(r);
            }
            let run = RunReport {
                config: verify_config_echo(&plan),
                seed: plan.seed,
                constants: plan.constants.clone(),
                reports,
            };
            if let Err(e) = run.write_to(&args.out) {
                eprintln!("error writing report: {e}");
                return EXIT_NUMERICAL;
            }
            println!("report written to {}", args.out.display());
            if run.all_pass() {
                EXIT_OK
            } else {
                EXIT_NUMERICAL
            }
        }
        Err(e @ (Error::ContractViolation(_) | Error::Configuration(_) | Error::Parameter(_))) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            // Numerical failure: still write a (empty-result) report shell.
            eprintln!("numerical failure: {e}");
            let run = RunReport {
                config: verify_config_echo(&plan),
                seed: plan.seed,
                constants: plan.constants.clone(),
                reports: Vec::new(),
            };
            let _ = run.write_to(&args.out);
            EXIT_NUMERICAL
        }
    }
}

fn cmd_calibrate(args: &CalibrateArgs) -> i32 {
    let mut cfg = CheckConfig {
        nodes_per_axis: vec![default_nodes(args.n)],
        rel_tol: if args.n <= 2 { 1e-6 } else { 1e-3 },
    };
    if !args.nodes.is_empty() {
        cfg.nodes_per_axis = args.nodes.clone();
    }
    let radii_echo: Vec<String> = args.radii.iter().map(|r| format!("{r}")).collect();
    match calibrate_gb_constants(args.n, args.k, &args.radii, &cfg) {
        Ok(cal) => {
            println!(
                "calibrated c = {:?} (condition {:.3e}, fit residual {:.3e})",
                cal.constants, cal.condition, cal.fit_residual
            );
            for r in &cal.validation {
                print_report_line(r);
            }
            let file = ConstantsFile::new(args.n, cal.constants.clone());
            if let Err(e) = file.write_to(&args.out) {
                eprintln!("error writing constants: {e}");
                return EXIT_NUMERICAL;
            }
            println!("constants written to {}", args.out.display());
            if let Some(path) = &args.report {
                let run = RunReport {
                    config: format!(
                        "calibrate --n {} --k {} --radii [{}]",
                        args.n,
                        args.k,
                        radii_echo.join(",")
                    ),
                    seed: None,
                    constants: Some(cal.constants.clone()),
                    reports: cal.validation.clone(),
                };
                if let Err(e) = run.write_to(path) {
                    eprintln!("error writing report: {e}");
                    return EXIT_NUMERICAL;
                }
            }
            if cal.validation.iter().all(|r| r.pass) {
                EXIT_OK
            } else {
                EXIT_NUMERICAL
            }
        }
        Err(e @ (Error::Calibration(_) | Error::ContractViolation(_) | Error::Parameter(_))) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            eprintln!("numerical failure: {e}");
            EXIT_NUMERICAL
        }
    }
}

fn cmd_scan(args: &ScanArgs) -> i32 {
    let shapes: Vec<Shape> = match &args.shape.shape {
        Some(name) => {
            let sargs = ShapeArgs {
                shape: name.clone(),
                n: args.shape.n,
                k: args.shape.k,
                rho: args.shape.rho,
                big_r: args.shape.big_r,
                r: args.shape.r,
                alpha: args.shape.alpha,
                semi_axes: args.shape.semi_axes.clone(),
                flip_orientation: args.shape.flip_orientation,
            };
            match build_shape(&sargs) {
                Ok(s) => vec![s],
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_USAGE;
                }
            }
        }
        None => default_catalog(),
    };
    let max_n = shapes.iter().map(|s| s.n()).max().unwrap_or(2);
    let tol = args.tol.unwrap_or(if max_n <= 2 { 1e-8 } else { 1e-6 });

    let mut results = Vec::new();
    for shape in &shapes {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        match scan_shape(shape, args.points, &mut rng) {
            Ok(r) => {
                let status = if r.worst_residual() <= tol { "PASS" } else { "FAIL" };
                println!(
                    "[{status}] scan {}: gauss={:.3e} weingarten={:.3e} reilly={:.3e} tn={:.3e} traces={:.3e}/{:.3e}",
                    r.shape,
                    r.max_gauss_formula,
                    r.max_weingarten,
                    r.max_reilly_position,
                    r.max_newton_tn,
                    r.max_trace_tr,
                    r.max_trace_btr
                );
                results.push(r);
            }
            Err(e) => {
                eprintln!("numerical failure on {}: {e}", shape.descriptor);
                return EXIT_NUMERICAL;
            }
        }
    }
    let shape_echo = args.shape.shape.as_deref().unwrap_or("catalog");
    let run = ScanRunReport {
        config: format!(
            "scan --shape {} --points {} --seed {}",
            shape_echo, args.points, args.seed
        ),
        seed: args.seed,
        tolerance: tol,
        shapes: results,
    };
    if let Err(e) = run.write_to(&args.out) {
        eprintln!("error writing report: {e}");
        return EXIT_NUMERICAL;
    }
    println!("report written to {}", args.out.display());
    if run.all_pass() {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    }
}

fn cmd_list() -> i32 {
    println!("spaceform {TOOL_VERSION}");
    println!("\nshapes:");
    for (name, desc) in catalog() {
        println!("  {name:<20} {desc}");
    }
    println!("\nidentities:");
    for (name, desc) in IDENTITY_IDS {
        println!("  {name:<20} {desc}");
    }
    EXIT_OK
}

/// Parses CLI arguments from the environment and runs the requested command,
/// returning the process exit code.
pub fn run_from_args() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    configure_threads(cli.threads);
    match &cli.command {
        Command::List => cmd_list(),
        Command::Verify(args) => cmd_verify(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Scan(args) => cmd_scan(args),
    }
}
