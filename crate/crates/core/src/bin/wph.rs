use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use weighted_persistence::audit::{
    run_stability_audit, run_vr_audit, StabilityAuditConfig, VrAuditConfig,
};
use weighted_persistence::filtration::DEFAULT_SIMPLEX_CAP;
use weighted_persistence::io::{
    diagram_to_string, filtration_to_string, read_diagram, read_filtration, read_point_cloud,
    render_barcode_svg, SvgOptions,
};
use weighted_persistence::metrics::{bottleneck_distance, DEFAULT_REGION_GRID};
use weighted_persistence::mnist::{
    confusion_table, evaluate, evaluation_tsv, load_digits_csv, metrics_table, prediction_log,
    EvalConfig, Mode,
};
use weighted_persistence::{
    build_linear_rips, build_weighted_cech, compute_diagram, Error, Filtration, FiltrationParams,
    Flavor, Result,
};

/// Weighted persistent homology: filtrations, barcodes, bottleneck
/// distances, theorem audits and the MNIST eight detector.
#[derive(Parser, Debug)]
#[command(name = "wph", version)]
struct Cli {
    /// Worker threads (default: available parallelism). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weighted Vietoris-Rips filtration of a point cloud CSV.
    Rips(FiltrationArgs),
    /// Weighted Čech filtration of a point cloud CSV.
    Cech(FiltrationArgs),
    /// Persistence diagram of a filtration TSV or a point cloud CSV.
    Barcode(BarcodeArgs),
    /// Bottleneck distance between two diagram TSVs in one dimension.
    Bottleneck(BottleneckArgs),
    /// Random audit of VR(t'r) ⊆ Čech(tr) ⊆ VR(tr).
    VerifyVr(VerifyVrArgs),
    /// Random audit of the entry-function and diagram stability bounds.
    VerifyStability(VerifyStabilityArgs),
    /// Eight detection on a digits CSV (label followed by 784 pixels).
    Mnist(MnistArgs),
}

#[derive(Args, Debug)]
struct CloudArgs {
    /// Point cloud CSV: coordinates, then a positive weight as the last column.
    cloud: PathBuf,
    /// The first CSV row is a header.
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = 2)]
    max_dim: usize,
    /// Largest scale kept; `inf` keeps everything.
    #[arg(long, default_value_t = f64::INFINITY)]
    t_max: f64,
    /// Abort when the complex would exceed this many simplices.
    #[arg(long, default_value_t = DEFAULT_SIMPLEX_CAP)]
    simplex_cap: usize,
}

impl CloudArgs {
    fn params(&self) -> FiltrationParams {
        FiltrationParams {
            max_dim: self.max_dim,
            t_max: self.t_max,
            simplex_cap: self.simplex_cap,
        }
    }
}

#[derive(Args, Debug)]
struct FiltrationArgs {
    #[command(flatten)]
    cloud: CloudArgs,
    /// Also write the filtration TSV here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FlavorArg {
    Rips,
    Cech,
}

impl From<FlavorArg> for Flavor {
    fn from(f: FlavorArg) -> Self {
        match f {
            FlavorArg::Rips => Flavor::Rips,
            FlavorArg::Cech => Flavor::Cech,
        }
    }
}

#[derive(Args, Debug)]
struct BarcodeArgs {
    /// A `.csv` point cloud, or a filtration TSV as written by `rips`/`cech`.
    input: PathBuf,
    #[arg(long)]
    header: bool,
    /// Filtration built from a point cloud input.
    #[arg(long, value_enum, default_value_t = FlavorArg::Rips)]
    flavor: FlavorArg,
    #[arg(long, default_value_t = 2)]
    max_dim: usize,
    #[arg(long, default_value_t = f64::INFINITY)]
    t_max: f64,
    #[arg(long, default_value_t = DEFAULT_SIMPLEX_CAP)]
    simplex_cap: usize,
    /// Also write the diagram TSV here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write an SVG barcode here.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BottleneckArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, default_value_t = 0)]
    dim: usize,
}

#[derive(Args, Debug)]
struct VerifyVrArgs {
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Ambient dimension; drawn from {2, 3} per trial when omitted.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyStabilityArgs {
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Grid points per axis of the unit square.
    #[arg(long, default_value_t = DEFAULT_REGION_GRID)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Weighted,
    Unweighted,
    /// Run both and compare.
    Both,
}

#[derive(Args, Debug)]
struct MnistArgs {
    digits: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    mode: ModeArg,
    /// Use only the first N rows.
    #[arg(long)]
    limit: Option<usize>,
    /// Largest filtration scale searched for loop deaths.
    #[arg(long, default_value_t = 10.0)]
    t_max: f64,
    #[arg(long, default_value_t = DEFAULT_SIMPLEX_CAP)]
    simplex_cap: usize,
    /// Also write the report TSV here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-image bar lengths and predictions here.
    #[arg(long)]
    log: Option<PathBuf>,
}

enum Outcome {
    Ok,
    AuditFailed,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Prints `text` and copies it to `out` when given.
fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    print!("{text}");
    match out {
        Some(path) => write_file(path, text),
        None => Ok(()),
    }
}

fn build(flavor: Flavor, args: &CloudArgs) -> Result<Filtration> {
    let params = args.params();
    params.validate()?;
    let cloud = read_point_cloud(&args.cloud, args.header)?;
    match flavor {
        Flavor::Rips => build_linear_rips(&cloud, &params),
        Flavor::Cech => build_weighted_cech(&cloud, &params),
    }
}

fn cmd_filtration(flavor: Flavor, args: &FiltrationArgs) -> Result<Outcome> {
    let filt = build(flavor, &args.cloud)?;
    emit(&filtration_to_string(&filt), args.out.as_ref())?;
    Ok(Outcome::Ok)
}

fn cmd_barcode(args: &BarcodeArgs) -> Result<Outcome> {
    let is_cloud = args
        .input
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let filt = if is_cloud {
        let cloud = CloudArgs {
            cloud: args.input.clone(),
            header: args.header,
            max_dim: args.max_dim,
            t_max: args.t_max,
            simplex_cap: args.simplex_cap,
        };
        build(args.flavor.into(), &cloud)?
    } else {
        read_filtration(&args.input, args.flavor.into())?
    };
    let dgm = compute_diagram(&filt)?;
    emit(&diagram_to_string(&dgm), args.out.as_ref())?;
    if let Some(svg) = &args.svg {
        write_file(svg, &render_barcode_svg(&dgm, &SvgOptions::default()))?;
    }
    Ok(Outcome::Ok)
}

fn cmd_bottleneck(args: &BottleneckArgs) -> Result<Outcome> {
    let a = read_diagram(&args.a)?;
    let b = read_diagram(&args.b)?;
    println!(
        "{}",
        weighted_persistence::io::format_float(bottleneck_distance(&a, &b, args.dim))
    );
    Ok(Outcome::Ok)
}

fn cmd_verify_vr(args: &VerifyVrArgs) -> Result<Outcome> {
    let config = VrAuditConfig {
        trials: args.trials,
        seed: args.seed,
        dim: args.dim,
        ..Default::default()
    };
    let audit = run_vr_audit(&config)?;
    emit(&audit.report(), args.out.as_ref())?;
    Ok(if audit.holds() {
        Outcome::Ok
    } else {
        Outcome::AuditFailed
    })
}

fn cmd_verify_stability(args: &VerifyStabilityArgs) -> Result<Outcome> {
    let config = StabilityAuditConfig {
        trials: args.trials,
        seed: args.seed,
        grid: args.grid,
        ..Default::default()
    };
    let audit = run_stability_audit(&config)?;
    emit(&audit.report(), args.out.as_ref())?;
    Ok(if audit.holds() {
        Outcome::Ok
    } else {
        Outcome::AuditFailed
    })
}

fn cmd_mnist(args: &MnistArgs) -> Result<Outcome> {
    let config = EvalConfig {
        t_max: args.t_max,
        simplex_cap: args.simplex_cap,
        ..Default::default()
    };
    config.validate()?;
    if args.limit == Some(0) {
        return Err(Error::InvalidParameter("limit must be at least 1".into()));
    }
    let mut images = load_digits_csv(&args.digits)?;
    if let Some(limit) = args.limit {
        images.truncate(limit);
    }
    let modes: &[Mode] = match args.mode {
        ModeArg::Weighted => &[Mode::Weighted],
        ModeArg::Unweighted => &[Mode::Unweighted],
        ModeArg::Both => &[Mode::Weighted, Mode::Unweighted],
    };
    let mut tsv = String::new();
    let mut text = format!("images\t{}\n", images.len());
    let mut evals = Vec::new();
    let mut log = String::new();
    for &mode in modes {
        let eval = evaluate(&images, mode, &config)?;
        text.push_str(&format!("\n{}\n", mode.name()));
        text.push_str(&confusion_table(&eval.confusion));
        for (index, reason) in &eval.failures {
            text.push_str(&format!("failed image {index}: {reason}\n"));
        }
        tsv.push_str(&evaluation_tsv(&eval));
        log.push_str(&format!("# {}\n", mode.name()));
        log.push_str(&prediction_log(&eval));
        evals.push(eval);
    }
    let runs: Vec<(&str, _)> = evals
        .iter()
        .map(|e| (e.mode.name(), &e.confusion))
        .collect();
    text.push('\n');
    text.push_str(&metrics_table(&runs));
    print!("{text}");
    if let Some(out) = &args.out {
        write_file(out, &tsv)?;
    }
    if let Some(path) = &args.log {
        write_file(path, &log)?;
    }
    Ok(Outcome::Ok)
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Rips(a) => cmd_filtration(Flavor::Rips, a),
        Command::Cech(a) => cmd_filtration(Flavor::Cech, a),
        Command::Barcode(a) => cmd_barcode(a),
        Command::Bottleneck(a) => cmd_bottleneck(a),
        Command::VerifyVr(a) => cmd_verify_vr(a),
        Command::VerifyStability(a) => cmd_verify_stability(a),
        Command::Mnist(a) => cmd_mnist(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::AuditFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
