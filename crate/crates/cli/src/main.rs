//! Experiment runner: every subcommand resolves a key=value configuration,
//! runs inside a bounded worker pool, and writes one self-describing report
//! whose embedded config reproduces it byte for byte (timestamps aside).

mod cmd;
mod config;
mod error;
mod report;
mod sets;

use clap::{Args, Parser, Subcommand};
use config::{Config, KeySpec, OUTPUT_KEYS};
use error::CliError;
use report::{Outcome, Report, SCHEMA_VERSION};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "holdercover",
    version,
    about = "Covering-dimension experiments: box counting, projection covers, percolation, visibility, digit sets"
)]
struct Cli {
    /// Key=value config file; command-line flags override its entries.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads for parallel stages; 0 uses all cores. Reductions are
    /// order-independent, so this never changes results.
    #[arg(long, global = true, default_value_t = 0, value_name = "N")]
    jobs: usize,
    /// Report path, `-` for stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<String>,
    /// Report format: json or csv.
    #[arg(long, global = true, value_name = "FMT")]
    format: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Box-counting dimension of a standard set.
    Boxdim(BoxdimArgs),
    /// Projection-cover pipeline: pair families, exceptional directions, certificates.
    Cover(CoverArgs),
    /// Fractal percolation: direction slopes, spherical coverage, branching calibration.
    Percolate(PercolateArgs),
    /// Tube-exceptional viewpoints and polar graph covers.
    Visibility(VisibilityArgs),
    /// Digit-restricted sets: exact counts, measure bounds, doubling constants.
    Doubling(DoublingArgs),
    /// Build a direction net and report its coverage audit.
    Netaudit(NetauditArgs),
    /// Document the report schema, config keys, and CSV columns.
    Describe,
}

#[derive(Args)]
struct BoxdimArgs {
    /// Point set spec, e.g. cantor1d:1/3 or cornerdust:2:1/32.
    #[arg(long)]
    set: Option<String>,
    /// Construction depth of the set.
    #[arg(long)]
    depth: Option<String>,
    /// Lattice base for the covers.
    #[arg(long)]
    base: Option<String>,
    /// Inclusive fit window lo:hi.
    #[arg(long)]
    window: Option<String>,
}

#[derive(Args)]
struct CoverArgs {
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    /// Separation exponent t.
    #[arg(long)]
    t: Option<String>,
    /// Content exponent w.
    #[arg(long)]
    w: Option<String>,
    #[arg(long)]
    n0: Option<String>,
    #[arg(long)]
    nmax: Option<String>,
    /// Direction-net mesh.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Number of batch test angles.
    #[arg(long)]
    directions: Option<String>,
    /// One projection angle in radians to certify; failure exits 2.
    #[arg(long)]
    angle: Option<String>,
}

#[derive(Args)]
struct PercolateArgs {
    /// slope, coverage, or counts.
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    d: Option<String>,
    /// Target dimension; retention p = 2^(t-d). Exclusive with --p.
    #[arg(long)]
    t: Option<String>,
    /// Retention probability. Exclusive with --t.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    /// Number of consecutive seeds.
    #[arg(long)]
    seeds: Option<String>,
    /// First seed.
    #[arg(long)]
    seed: Option<String>,
    /// Resolution window lo:hi for slope runs.
    #[arg(long)]
    window: Option<String>,
    /// Angular resolution level for coverage runs.
    #[arg(long)]
    m: Option<String>,
    /// Coverage fraction counted as full.
    #[arg(long)]
    full: Option<String>,
}

#[derive(Args)]
struct VisibilityArgs {
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    depth: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    w: Option<String>,
    #[arg(long)]
    n0: Option<String>,
    #[arg(long)]
    nmax: Option<String>,
    /// Comma-separated clip radii to sweep.
    #[arg(long)]
    s: Option<String>,
    /// Viewpoint grid mesh.
    #[arg(long)]
    mesh: Option<String>,
    /// Viewpoint x,y for a polar cover; a blocked viewpoint exits 2.
    #[arg(long)]
    viewpoint: Option<String>,
    /// Collinearity tolerance for the polar cover.
    #[arg(long)]
    tol: Option<String>,
}

#[derive(Args)]
struct DoublingArgs {
    /// First block length.
    #[arg(long)]
    n1: Option<String>,
    /// Digit weight, rational like 1/100 or decimal like 0.01.
    #[arg(long)]
    delta: Option<String>,
    /// Deepest block level.
    #[arg(long = "L")]
    l: Option<String>,
    #[arg(long)]
    d: Option<String>,
    /// Triadic depth for the doubling-constant estimate; 0 skips it.
    #[arg(long)]
    depth: Option<String>,
    /// Monte Carlo member-fraction runs; 0 skips it.
    #[arg(long)]
    mc: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

#[derive(Args)]
struct NetauditArgs {
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    k: Option<String>,
    /// Net mesh in the principal-angle metric.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful exits; parse failures are usage
            // errors and must exit 1, never 2 (reserved for certificates).
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn opt(key: &'static str, value: &Option<String>) -> (&'static str, Option<String>) {
    (key, value.clone())
}

fn command_parts(command: &Command) -> (&'static str, Vec<KeySpec>, Vec<(&'static str, Option<String>)>) {
    match command {
        Command::Boxdim(a) => (
            "boxdim",
            cmd::boxdim::schema(),
            vec![
                opt("set", &a.set),
                opt("depth", &a.depth),
                opt("base", &a.base),
                opt("window", &a.window),
            ],
        ),
        Command::Cover(a) => (
            "cover",
            cmd::cover::schema(),
            vec![
                opt("set", &a.set),
                opt("depth", &a.depth),
                opt("t", &a.t),
                opt("w", &a.w),
                opt("n0", &a.n0),
                opt("nmax", &a.nmax),
                opt("eps", &a.eps),
                opt("seed", &a.seed),
                opt("directions", &a.directions),
                opt("angle", &a.angle),
            ],
        ),
        Command::Percolate(a) => (
            "percolate",
            cmd::percolate::schema(),
            vec![
                opt("experiment", &a.experiment),
                opt("d", &a.d),
                opt("t", &a.t),
                opt("p", &a.p),
                opt("depth", &a.depth),
                opt("seeds", &a.seeds),
                opt("seed", &a.seed),
                opt("window", &a.window),
                opt("m", &a.m),
                opt("full", &a.full),
            ],
        ),
        Command::Visibility(a) => (
            "visibility",
            cmd::visibility::schema(),
            vec![
                opt("set", &a.set),
                opt("depth", &a.depth),
                opt("t", &a.t),
                opt("w", &a.w),
                opt("n0", &a.n0),
                opt("nmax", &a.nmax),
                opt("s", &a.s),
                opt("mesh", &a.mesh),
                opt("viewpoint", &a.viewpoint),
                opt("tol", &a.tol),
            ],
        ),
        Command::Doubling(a) => (
            "doubling",
            cmd::doubling::schema(),
            vec![
                opt("n1", &a.n1),
                opt("delta", &a.delta),
                opt("L", &a.l),
                opt("d", &a.d),
                opt("depth", &a.depth),
                opt("mc", &a.mc),
                opt("seed", &a.seed),
            ],
        ),
        Command::Netaudit(a) => (
            "netaudit",
            cmd::netaudit::schema(),
            vec![
                opt("d", &a.d),
                opt("k", &a.k),
                opt("eps", &a.eps),
                opt("seed", &a.seed),
            ],
        ),
        Command::Describe => unreachable!("describe handled before config resolution"),
    }
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    if matches!(cli.command, Command::Describe) {
        cmd::describe::run();
        return Ok(ExitCode::SUCCESS);
    }
    let (name, mut schema, mut flags) = command_parts(&cli.command);
    schema.extend(OUTPUT_KEYS);
    flags.push(("out", cli.out.clone()));
    flags.push(("format", cli.format.clone()));
    let mut cfg = Config::resolve(schema, cli.config.as_deref(), flags)?;

    let outcome = in_pool(cli.jobs, || -> Result<Outcome, CliError> {
        match &cli.command {
            Command::Boxdim(_) => cmd::boxdim::run(&mut cfg),
            Command::Cover(_) => cmd::cover::run(&mut cfg),
            Command::Percolate(_) => cmd::percolate::run(&mut cfg),
            Command::Visibility(_) => cmd::visibility::run(&mut cfg),
            Command::Doubling(_) => cmd::doubling::run(&mut cfg),
            Command::Netaudit(_) => cmd::netaudit::run(&mut cfg),
            Command::Describe => unreachable!(),
        }
    })?;

    let out = cfg.get_str("out")?;
    let format = cfg.get_choice("format", &["json", "csv"])?;
    let report = Report {
        schema: SCHEMA_VERSION,
        command: name,
        timestamp: report::timestamp_now(),
        config: cfg.entries(),
        seeds: &outcome.seeds,
        results: &outcome.results,
    };
    let body = match format {
        "csv" => report::render_csv(&report, &outcome),
        _ => report::render_json(&report),
    };
    report::write_out(&out, &body)?;
    Ok(if outcome.certificate_failed {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn in_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    if jobs == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("worker pool")
        .install(f)
}
