//! `fasat`: generate multiplier benchmarks, recover full adders, compare with
//! the cut-based detector and check equivalence.
//!
//! Exit codes: 0 success, 1 netlists differ (`verify`), 2 usage, I/O or
//! parse error, 3 internal invariant violation.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fasat_core::baseline::detect_fa_baseline;
use fasat_core::extract::ExtractError;
use fasat_core::netlist::{
    emit_aiger, equiv_check, gen_booth_multiplier, gen_csa_multiplier, parse_aiger, perturb, EquivMode,
    Netlist, Verdict,
};
use fasat_core::pipeline::{check_mode, run_pipeline, PipelineConfig, PipelineError};
use fasat_core::report::{BaselineSection, NetlistSummary, Report, RunSection};
use fasat_core::rules::Profile;
use fasat_core::saturate::SaturationLimits;

#[derive(Parser)]
#[command(name = "fasat", version, about = "Full-adder recovery by equality saturation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a multiplier as AIGER plus a `.meta.json` sidecar.
    Gen(GenArgs),
    /// Apply the structure-scrambling, function-preserving rewrite pass.
    Perturb(PerturbArgs),
    /// Saturate, extract and emit the netlist with recovered full adders.
    Run(RunArgs),
    /// Run only the cut-enumeration detector.
    Baseline(BaselineArgs),
    /// Check two netlists for equivalence.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Csa,
    Booth,
}

#[derive(Args)]
struct GenArgs {
    kind: Kind,
    #[arg(long)]
    bits: u32,
    /// Output path; the sidecar goes next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    passes: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Full,
    Lightweight,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    /// Rewritten netlist; a `.fa.json` cell annotation is written next to it.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Report path; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    r1_iters: usize,
    #[arg(long, default_value_t = 3)]
    r2_iters: usize,
    #[arg(long)]
    node_limit: Option<usize>,
    /// Seconds per saturation phase.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, value_enum, default_value = "full")]
    profile: ProfileArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the saturated e-graph as DOT.
    #[arg(long)]
    emit_dot: Option<PathBuf>,
    /// Also run the baseline detector and include it in the report.
    #[arg(long)]
    with_baseline: bool,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Exhaustive up to 16 inputs, random vectors beyond.
    Auto,
    Exhaustive,
    Random,
}

#[derive(Args)]
struct VerifyArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeArg,
    #[arg(long, default_value_t = 10_000)]
    vectors: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

type Outcome = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FASAT_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Perturb(a) => perturb_cmd(a),
        Command::Run(a) => run(a),
        Command::Baseline(a) => baseline(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Internal(m) => eprintln!("internal error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn read_netlist(path: &Path) -> Result<Netlist, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    parse_aiger(&bytes).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn gen(a: GenArgs) -> Outcome {
    let g = match a.kind {
        Kind::Csa => gen_csa_multiplier(a.bits),
        Kind::Booth => gen_booth_multiplier(a.bits),
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;
    write(&a.out, emit_aiger(&g.netlist))?;
    let meta = serde_json::to_string_pretty(&g.meta).expect("metadata serializes");
    write(&sibling(&a.out, ".meta.json"), meta + "\n")?;
    Ok(ExitCode::SUCCESS)
}

fn perturb_cmd(a: PerturbArgs) -> Outcome {
    let n = read_netlist(&a.input)?;
    write(&a.output, emit_aiger(&perturb(&n, a.seed, a.passes)))?;
    Ok(ExitCode::SUCCESS)
}

fn run(a: RunArgs) -> Outcome {
    let input = read_netlist(&a.input)?;
    let defaults = SaturationLimits::default();
    let config = PipelineConfig {
        limits: SaturationLimits {
            r1_iters: a.r1_iters,
            r2_iters: a.r2_iters,
            node_limit: a.node_limit.unwrap_or(defaults.node_limit),
            time_limit: a.time_limit.unwrap_or(defaults.time_limit),
            ..defaults
        },
        profile: match a.profile {
            ProfileArg::Full => Profile::Full,
            ProfileArg::Lightweight => Profile::Lightweight,
        },
        seed: a.seed,
        audit: true,
        emit_dot: a.emit_dot.is_some(),
    };
    let out = run_pipeline(&input, &config).map_err(|e| match e {
        PipelineError::Limits(_) => Failure::Usage(e.to_string()),
        PipelineError::Extract(ExtractError::UnmappedVar(_)) => Failure::Usage(e.to_string()),
        e => Failure::Internal(e.to_string()),
    })?;
    if let (Some(path), Some(dot)) = (&a.emit_dot, &out.dot) {
        write(path, dot)?;
    }
    if let Verdict::Counterexample { assignment, left, right } = &out.verdict {
        return Err(Failure::Internal(format!(
            "output differs from input on {} (input gives {}, output gives {})",
            bits(assignment),
            bits(left),
            bits(right)
        )));
    }
    let base = a.with_baseline.then(|| detect_fa_baseline(&input).to_report());
    let section = RunSection::new(&input, &config, &out, check_mode(&input, config.seed), base);
    let report = Report::new(section, Some(out.timings.clone()));
    if let Some(path) = &a.output {
        write(path, emit_aiger(&out.netlist))?;
        let ann = serde_json::to_string_pretty(&out.annotation).expect("annotation serializes");
        write(&sibling(path, ".fa.json"), ann + "\n")?;
    }
    emit_report(a.report.as_deref(), &report.to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn baseline(a: BaselineArgs) -> Outcome {
    let input = read_netlist(&a.input)?;
    let section = BaselineSection {
        input: NetlistSummary::of(&input),
        baseline: detect_fa_baseline(&input).to_report(),
    };
    emit_report(a.report.as_deref(), &Report::new(section, None).to_json())?;
    Ok(ExitCode::SUCCESS)
}

fn verify(a: VerifyArgs) -> Outcome {
    let x = read_netlist(&a.a)?;
    let y = read_netlist(&a.b)?;
    let mode = match a.mode {
        ModeArg::Auto => match check_mode(&x, a.seed) {
            EquivMode::Random { seed, .. } => EquivMode::Random {
                vectors: a.vectors,
                seed,
            },
            m => m,
        },
        ModeArg::Exhaustive => EquivMode::Exhaustive,
        ModeArg::Random => EquivMode::Random {
            vectors: a.vectors,
            seed: a.seed,
        },
    };
    let verdict = equiv_check(&x, &y, mode).map_err(|e| Failure::Usage(e.to_string()))?;
    match verdict {
        Verdict::Equal { vectors, proven } => {
            let how = if proven { "exhaustively" } else { "on random vectors" };
            println!("equivalent ({vectors} vectors, {how})");
            Ok(ExitCode::SUCCESS)
        }
        Verdict::Counterexample { assignment, left, right } => {
            println!("not equivalent");
            println!("inputs  {}", bits(&assignment));
            println!("left    {}", bits(&left));
            println!("right   {}", bits(&right));
            Ok(ExitCode::from(1))
        }
    }
}

fn bits(v: &[bool]) -> String {
    v.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn emit_report(path: Option<&Path>, json: &str) -> Result<(), Failure> {
    match path {
        Some(p) => write(p, format!("{json}\n")),
        None => {
            // A closed pipe (`| head`) is not worth a panic.
            let _ = writeln!(std::io::stdout(), "{json}");
            Ok(())
        }
    }
}
