//! `satflux`: batch driver for the mass-coordinate solver.
//!
//! Subcommands: `simulate` runs a config file and writes a run directory,
//! `tw` constructs a traveling-wave profile, `check` re-validates a run
//! directory, `sweep` runs one simulation per parameter value. Exit codes:
//! 0 success, 1 a validation check failed, 2 malformed config or arguments.
//! Solver termination events (positivity loss, support collapse) are run
//! outcomes, not errors; they land in the metadata and exit 0.

mod config;
mod fail;
mod rundir;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use satflux_core::dual::ModelParams;
use satflux_core::flux::FluxModel;
use satflux_core::wave::{self, WaveProfile};

use fail::Failure;
use rundir::fmt17;
use svg::Series;

#[derive(Parser)]
#[command(name = "satflux", version, about = "Saturated-flux chemotaxis solver driver")]
struct Cli {
    /// Accepted and ignored; every run is deterministic.
    #[arg(long, global = true)]
    seedless: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a simulation described by a config file
    Simulate(SimulateArgs),
    /// Construct a traveling-wave profile
    Tw(TwArgs),
    /// Re-validate a recorded run directory
    Check(CheckArgs),
    /// Run one simulation per value of a config key
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML config, or a metadata.json from an earlier run
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: config `output.directory`, then
    /// $SATFLUX_OUT, then ./satflux-out)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override config `grid.N`
    #[arg(long = "N")]
    n: Option<usize>,
    /// Override config `grid.eps`
    #[arg(long)]
    eps: Option<f64>,
    /// Override config `grid.kappa_bc`
    #[arg(long)]
    kappa_bc: Option<f64>,
    /// Override config `grid.cfl`
    #[arg(long)]
    cfl: Option<f64>,
    /// Override config `time.t_end`
    #[arg(long)]
    t_end: Option<f64>,
    /// Override config `time.snapshot_dt`
    #[arg(long)]
    snapshot_dt: Option<f64>,
    /// Emit SVG plots regardless of config `output.emit_svg`
    #[arg(long)]
    emit_svg: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WaveKindArg {
    Continuous,
    Jump,
}

#[derive(Args)]
struct TwArgs {
    #[arg(long, value_enum)]
    kind: WaveKindArg,
    /// Sensitivity coefficient
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Porous-media exponent
    #[arg(long, default_value_t = 0.0)]
    m: f64,
    /// Flux slope at the origin
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    /// Saturation speed
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Total mass; required for continuous, defaults to 2c/a for jump
    #[arg(long = "M")]
    mass: Option<f64>,
    /// Reduced speed (continuous only); default -a*M/2, the zero-speed wave
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<f64>,
    /// Edge value (jump only)
    #[arg(long)]
    v_edge: Option<f64>,
    /// Profile nodes
    #[arg(long, default_value_t = 801)]
    nodes: usize,
    /// Left support edge position
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    xi_minus: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    emit_svg: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Run directory written by `simulate`
    #[arg(long)]
    run: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Config key to vary: a, m, M, nu, c, N, eps, kappa_bc, cfl, t_end,
    /// snapshot_dt
    #[arg(long)]
    param: String,
    /// Comma-separated values; one run per value in `<out>/<param>=<value>`
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    values: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Tw(args) => cmd_tw(args),
        Cmd::Check(args) => cmd_check(args),
        Cmd::Sweep(args) => cmd_sweep(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code())
        }
    }
}

/// --out flag, then the config's own directory, then $SATFLUX_OUT, then a
/// fixed default.
fn resolve_out(flag: Option<PathBuf>, from_config: Option<&str>) -> PathBuf {
    if let Some(p) = flag {
        return p;
    }
    if let Some(d) = from_config {
        return PathBuf::from(d);
    }
    match std::env::var("SATFLUX_OUT") {
        Ok(v) if !v.is_empty() => PathBuf::from(v),
        _ => PathBuf::from("satflux-out"),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Failure> {
    // overrides apply to the raw config so omitted grid knobs re-derive
    // their defaults from the overridden values
    let (mut cfg, dir) = config::load_raw(&args.config)?;
    if let Some(n) = args.n {
        cfg.grid.n = n;
    }
    if let Some(eps) = args.eps {
        cfg.grid.eps = Some(eps);
    }
    if let Some(k) = args.kappa_bc {
        cfg.grid.kappa_bc = Some(k);
    }
    if let Some(cfl) = args.cfl {
        cfg.grid.cfl = Some(cfl);
    }
    if let Some(t) = args.t_end {
        cfg.time.t_end = t;
    }
    if let Some(dt) = args.snapshot_dt {
        cfg.time.snapshot_dt = dt;
    }
    if args.emit_svg {
        cfg.output.emit_svg = true;
    }
    let cfg = cfg.resolved(&dir)?;

    let out = resolve_out(args.out, cfg.output.directory.as_deref());
    let s = rundir::simulate_into(&cfg, &out)?;
    print_summary(&s);
    Ok(())
}

fn print_summary(s: &rundir::RunSummary) {
    println!("{}: {} snapshots, {} steps", s.termination, s.snapshots, s.steps);
    println!("ell {:.6} -> {:.6}", s.ell_first, s.ell_last);
    println!("wrote {}", s.out.display());
}

#[derive(Serialize)]
struct FluxSidecar {
    family: &'static str,
    nu: f64,
    c: f64,
    alpha: f64,
    k_tail: f64,
}

#[derive(Serialize)]
struct TwResiduals {
    /// Max interval-averaged profile-ODE defect.
    ode_max: f64,
    /// Max deviation of the endpoint values from their prescribed ones
    /// (zero for continuous, v_edge for jump).
    edge_max: f64,
    k_const: f64,
}

#[derive(Serialize)]
struct TwSidecar {
    kind: &'static str,
    a: f64,
    m: f64,
    #[serde(rename = "M")]
    mass: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    v_edge: Option<f64>,
    sigma: f64,
    kappa_bar: f64,
    support_length: f64,
    nodes: usize,
    flux: FluxSidecar,
    residuals: TwResiduals,
}

fn cmd_tw(args: TwArgs) -> Result<(), Failure> {
    let flux = FluxModel::classical(args.nu, args.c)?;
    let (profile, kind_name) = match args.kind {
        WaveKindArg::Continuous => {
            if args.v_edge.is_some() {
                return Err(Failure::Config(
                    "continuous waves do not take --v-edge (their edges vanish)".into(),
                ));
            }
            let mass = args.mass.ok_or_else(|| {
                Failure::Config("continuous waves require --M (total mass)".into())
            })?;
            let tau = args.tau.unwrap_or(-0.5 * args.a * mass);
            let params = ModelParams::new(args.a, args.m, mass, flux)?;
            (wave::continuous_profile(&params, mass, tau, args.xi_minus, args.nodes)?, "continuous")
        }
        WaveKindArg::Jump => {
            if args.tau.is_some() {
                return Err(Failure::Config(
                    "jump waves do not take --tau (their speed is a*kappa_bar - c)".into(),
                ));
            }
            let v_edge = args.v_edge.ok_or_else(|| {
                Failure::Config("jump waves require --v-edge (edge value)".into())
            })?;
            let mass = args.mass.unwrap_or(2.0 * args.c / args.a);
            let params = ModelParams::new(args.a, args.m, mass, flux)?;
            (wave::jump_profile(&params, v_edge, args.xi_minus, args.nodes)?, "jump")
        }
    };

    let out = resolve_out(args.out, None);
    std::fs::create_dir_all(&out).map_err(|e| fail::io_fail("cannot create", &out, e))?;
    write_profile(&profile, kind_name, args.nodes, &out)?;
    if args.emit_svg {
        let points: Vec<(f64, f64)> =
            profile.xi.iter().copied().zip(profile.u.iter().copied()).collect();
        let plot = svg::line_plot(
            "traveling wave profile",
            "xi",
            "U",
            &[Series { label: "U(xi)".into(), points }],
        );
        rundir::write_atomic(&out.join("profile.svg"), &plot)?;
    }

    println!(
        "{kind_name} wave: sigma {:.3e}, kappa_bar {:.6}, support length {:.6}",
        profile.sigma, profile.kappa_bar,
        profile.support_length()
    );
    println!("ode residual max {:.3e}", profile.ode_residual_max);
    println!("wrote {}", out.display());
    Ok(())
}

fn write_profile(
    p: &WaveProfile,
    kind_name: &'static str,
    nodes: usize,
    out: &std::path::Path,
) -> Result<(), Failure> {
    let mut csv = String::with_capacity(60 * p.kappa.len() + 16);
    csv.push_str("kappa,U,xi\n");
    for j in 0..p.kappa.len() {
        csv.push_str(&fmt17(p.kappa[j]));
        csv.push(',');
        csv.push_str(&fmt17(p.u[j]));
        csv.push(',');
        csv.push_str(&fmt17(p.xi[j]));
        csv.push('\n');
    }
    rundir::write_atomic(&out.join("profile.csv"), &csv)?;

    let n = p.u.len();
    let edge_target = p.v_edge.unwrap_or(0.0);
    let edge_max = (p.u[0] - edge_target).abs().max((p.u[n - 1] - edge_target).abs());
    let sidecar = TwSidecar {
        kind: kind_name,
        a: p.params.a,
        m: p.params.m,
        mass: p.params.mass,
        tau: p.tau,
        v_edge: p.v_edge,
        sigma: p.sigma,
        kappa_bar: p.kappa_bar,
        support_length: p.support_length(),
        nodes,
        flux: FluxSidecar {
            family: "classical",
            nu: p.params.flux.nu,
            c: p.params.flux.c,
            alpha: p.params.flux.alpha,
            k_tail: p.params.flux.k_tail,
        },
        residuals: TwResiduals {
            ode_max: p.ode_residual_max,
            edge_max,
            k_const: p.k_const,
        },
    };
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Failure::Config(format!("cannot serialize profile sidecar: {e}")))?;
    rundir::write_atomic(&out.join("profile.json"), &(json + "\n"))
}

fn cmd_check(args: CheckArgs) -> Result<(), Failure> {
    let (entries, pass) = rundir::check_run(&args.run)?;
    let mut failed = 0usize;
    for e in &entries {
        let status = if e.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!e.pass);
        let tol = e.tolerance.map_or("-".to_string(), |t| format!("{t:.3e}"));
        println!("{status} {:<18} max {:.3e}  tol {tol}", e.name, e.max_residual);
    }
    println!("report {}", args.run.join("report.json").display());
    if pass {
        Ok(())
    } else {
        Err(Failure::Validation(format!("{failed} of {} checks failed", entries.len())))
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let (base, cfg_dir) = config::load_raw(&args.config)?;
    let root = resolve_out(args.out, base.output.directory.as_deref());

    // validate every member before running any
    let mut members = Vec::with_capacity(args.values.len());
    for token in &args.values {
        let mut cfg = base.clone();
        apply_param(&mut cfg, &args.param, token)?;
        let cfg = cfg.resolved(&cfg_dir)?;
        let dir = root.join(format!("{}={token}", args.param));
        members.push((token.clone(), cfg, dir));
    }

    // members share nothing; run them in parallel
    let mut results: Vec<Option<Result<rundir::RunSummary, Failure>>> =
        (0..members.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        for ((_, cfg, dir), slot) in members.iter().zip(results.iter_mut()) {
            scope.spawn(move || {
                *slot = Some(rundir::simulate_into(cfg, dir));
            });
        }
    });

    let mut first_err = None;
    for ((token, _, dir), result) in members.iter().zip(results.into_iter()) {
        match result.expect("sweep member thread completed") {
            Ok(s) => println!(
                "{}={token}: {}, {} snapshots, {} steps -> {}",
                args.param, s.termination, s.snapshots, s.steps,
                dir.display()
            ),
            Err(e) => {
                println!("{}={token}: error: {e}", args.param);
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        None => Ok(()),
        Some(e) => Err(e),
    }
}

fn apply_param(cfg: &mut config::RunConfig, key: &str, token: &str) -> Result<(), Failure> {
    let bad_num = |k: &str| Failure::Config(format!("sweep value for `{k}` is not a number: `{token}`"));
    let mut num = || token.parse::<f64>().map_err(|_| bad_num(key));
    match key {
        "a" => cfg.model.a = num()?,
        "m" => cfg.model.m = num()?,
        "M" => cfg.model.mass = num()?,
        "nu" => cfg.flux.nu = num()?,
        "c" => cfg.flux.c = num()?,
        "N" => cfg.grid.n = token.parse().map_err(|_| bad_num(key))?,
        "eps" => cfg.grid.eps = Some(num()?),
        "kappa_bc" => cfg.grid.kappa_bc = Some(num()?),
        "cfl" => cfg.grid.cfl = Some(num()?),
        "t_end" => cfg.time.t_end = num()?,
        "snapshot_dt" => cfg.time.snapshot_dt = num()?,
        other => {
            return Err(Failure::Config(format!(
                "unknown sweep key `{other}` (supported: a, m, M, nu, c, N, eps, kappa_bc, \
                 cfl, t_end, snapshot_dt)"
            )))
        }
    }
    Ok(())
}
