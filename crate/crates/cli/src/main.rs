//! `robsched`: solve RCPSP/max instances for a robust makespan, evaluate the
//! resulting schedules by simulation, and run benchmark grids.
//!
//! Exit codes: 0 on success, 1 on bad input or arguments, 2 when `solve`
//! finds no feasible activity list.

mod input;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use robsched::io::{generate_jsp, write_jsp, write_native, write_progen_max};
use robsched::montecarlo::QUANTILE_LEVELS;
use robsched::rng::seeded;
use robsched::{
    evaluate_pos, generate_instance, pos_fitness, robust_local_search, run_grid, Chaining, EvaluationConfig,
    GenerationConfig, GeneratorConfig, GridSpec, Pos, Problem, RobustResult, Rule, SearchConfig, Variant,
};

use input::{read_instance, Format, SigmaMode};

#[derive(Debug, Parser)]
#[command(name = "robsched", version, about = "Robust partial order schedules for RCPSP/max")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search for a POS with the lowest robust makespan.
    Solve(SolveArgs),
    /// Simulate a POS and compare realized makespans with its bound.
    Evaluate(EvaluateArgs),
    /// Run every instance of a directory over a grid of variants, σ and ε.
    Bench(BenchArgs),
    /// Convert an instance to the native JSON format (or ProGen/max).
    Convert(ConvertArgs),
    /// Write a random job shop instance.
    GenJsp(GenJspArgs),
    /// Write a random RCPSP instance in native JSON.
    GenInstance(GenInstanceArgs),
}

#[derive(Debug, Args)]
struct SigmaArgs {
    /// Same σ for every real activity.
    #[arg(long)]
    sigma: Option<f64>,
    /// `constant:<v>` or `proportional:<f>` (σ = f × d0).
    #[arg(long)]
    sigma_mode: Option<String>,
}

impl SigmaArgs {
    fn mode(&self) -> Result<SigmaMode> {
        SigmaMode::from_flags(self.sigma, self.sigma_mode.as_deref())
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    sigma: SigmaArgs,
    #[arg(long, default_value = "gnla")]
    rule: Rule,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "flexible")]
    chaining: Chaining,
    /// Run ordering generation before the search.
    #[arg(long)]
    og: bool,
    #[arg(long, default_value_t = 100)]
    og_samples: usize,
    #[arg(long, default_value_t = 0.6)]
    index_parameter: f64,
    /// Add |selected pairs| × og-samples iterations.
    #[arg(long)]
    extra_iterations: bool,
    #[arg(long, default_value_t = 0.01)]
    escape: f64,
    /// Random start draws per activity.
    #[arg(long, default_value_t = 30)]
    retries: usize,
    /// No deterministic fallback in schedule generation.
    #[arg(long)]
    strict: bool,
    /// Planning horizon; defaults to the sum of durations and positive lags.
    #[arg(long)]
    horizon: Option<i64>,
    /// Record every search step in the result.
    #[arg(long)]
    trace: bool,
    /// Record wall time in the manifest (makes output differ between runs).
    #[arg(long)]
    timing: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write the best POS to this file.
    #[arg(long)]
    pos_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    instance: PathBuf,
    /// A POS document or the output of `solve`.
    pos: PathBuf,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    sigma: SigmaArgs,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Defaults to the epsilon of a `solve` document, else 0.1.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bound to test; computed from the POS with --rule when absent.
    #[arg(long)]
    bound: Option<f64>,
    /// Defaults to the rule of a `solve` document, else gnla.
    #[arg(long)]
    rule: Option<Rule>,
    #[arg(long)]
    lower_bound: Option<f64>,
    /// Write `sample,makespan` for every sample to this file.
    #[arg(long)]
    dump: Option<PathBuf>,
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Write the run manifest to this file.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    dir: PathBuf,
    /// Format of every file; by default only recognized extensions are read.
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_delimiter = ',', default_value = "sla,gnla")]
    variants: Vec<Variant>,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.5,1,2")]
    sigmas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.15,0.2")]
    epsilons: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    og_samples: usize,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long)]
    timing: bool,
    /// Per-run CSV.
    #[arg(long)]
    runs: Option<PathBuf>,
    /// Per-cell CSV; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Native,
    ProgenMax,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    input: PathBuf,
    #[arg(long, value_enum)]
    from: Format,
    #[arg(long, value_enum, default_value = "native")]
    to: OutputFormat,
    #[command(flatten)]
    sigma: SigmaArgs,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenJspArgs {
    #[arg(long)]
    jobs: usize,
    #[arg(long)]
    machines: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenInstanceArgs {
    #[arg(long, default_value_t = 10)]
    activities: usize,
    #[arg(long, default_value_t = 2)]
    resources: usize,
    #[arg(long, default_value_t = 3)]
    max_capacity: u32,
    #[arg(long, default_value_t = 10)]
    max_duration: u32,
    #[arg(long, default_value_t = 0.2)]
    precedence_density: f64,
    #[arg(long, default_value_t = 0.0)]
    max_lag_probability: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

/// Everything needed to reproduce an output with the same build.
#[derive(Debug, Serialize)]
struct RunManifest {
    command: &'static str,
    tool_version: &'static str,
    arguments: Vec<String>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    seed: u64,
    config: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_s: Option<f64>,
}

impl RunManifest {
    fn new(command: &'static str, seed: u64, config: serde_json::Value) -> Self {
        Self {
            command,
            tool_version: env!("CARGO_PKG_VERSION"),
            arguments: std::env::args().skip(1).collect(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed,
            config,
            wall_time_s: None,
        }
    }
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    manifest: RunManifest,
    result: &'a RobustResult,
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let sigma = args.sigma.mode()?;
    let mut instance = read_instance(&args.instance, args.format)?;
    sigma.apply(&mut instance);
    let config = SearchConfig {
        rule: args.rule,
        epsilon: args.epsilon,
        max_iterations: args.iterations,
        escape_probability: args.escape,
        generation: GenerationConfig { retries: args.retries, strict: args.strict },
        seed: args.seed,
        chaining: args.chaining,
        order_generation: args.og,
        og_samples: args.og_samples,
        og_index_parameter: args.index_parameter,
        extra_iterations_for_pairs: args.extra_iterations,
        record_trace: args.trace,
    };
    config.validate()?;
    let problem = Problem::with_horizon(instance, args.horizon)?;
    let result = robust_local_search(&problem, &config)?;

    let mut manifest = RunManifest::new(
        "solve",
        args.seed,
        serde_json::json!({ "search": config, "sigma": sigma.describe(), "horizon": problem.horizon() }),
    );
    manifest.inputs.push(display(&args.instance));
    manifest.outputs.extend(args.output.as_deref().map(display));
    manifest.outputs.extend(args.pos_output.as_deref().map(display));
    if args.timing {
        manifest.wall_time_s = Some(started.elapsed().as_secs_f64());
    }

    if let (Some(path), Some(pos)) = (&args.pos_output, &result.pos) {
        emit(Some(path), &to_json(pos)?)?;
    }
    emit(args.output.as_deref(), &to_json(&SolveOutput { manifest, result: &result })?)?;

    if result.found_feasible {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("no feasible activity list found in {} iterations", result.iterations_used);
        Ok(ExitCode::from(2))
    }
}

/// What an `evaluate` POS file may contain.
#[derive(Deserialize)]
#[serde(untagged)]
enum PosDocument {
    Solved { result: SolvedResult },
    Bare(Pos),
}

#[derive(Deserialize)]
struct SolvedResult {
    pos: Option<Pos>,
    epsilon: f64,
    rule: Rule,
}

#[derive(Serialize)]
struct EvaluationRow {
    instance: String,
    samples: usize,
    seed: u64,
    epsilon: f64,
    rule: String,
    robust_makespan: f64,
    mean: f64,
    variance: f64,
    quantile: f64,
    q50: f64,
    q80: f64,
    q90: f64,
    q95: f64,
    q99: f64,
    violation_rate: f64,
    violation_rate_feasible: Option<f64>,
    infeasibility_probability: f64,
    lower_bound: Option<f64>,
    mnpm: Option<f64>,
}

fn evaluate(args: EvaluateArgs) -> Result<ExitCode> {
    let sigma = args.sigma.mode()?;
    let mut instance = read_instance(&args.instance, args.format)?;
    sigma.apply(&mut instance);
    let text = std::fs::read_to_string(&args.pos).with_context(|| format!("reading {}", args.pos.display()))?;
    let doc: PosDocument = serde_json::from_str(&text).with_context(|| format!("parsing {}", args.pos.display()))?;
    let (pos, doc_epsilon, doc_rule) = match doc {
        PosDocument::Solved { result } => match result.pos {
            Some(pos) => (pos, Some(result.epsilon), Some(result.rule)),
            None => bail!("{} holds no POS (the search found no feasible list)", args.pos.display()),
        },
        PosDocument::Bare(pos) => (pos, None, None),
    };
    let epsilon = args.epsilon.or(doc_epsilon).unwrap_or(0.1);
    let rule = args.rule.or(doc_rule).unwrap_or(Rule::Gnla);
    if let Some(lb) = args.lower_bound {
        if !(lb > 0.0) {
            bail!("lower bound must be positive");
        }
    }
    if pos.activity_count != instance.len() {
        bail!(
            "POS covers {} activities but the instance has {}",
            pos.activity_count,
            instance.len()
        );
    }
    let bound = match args.bound {
        Some(b) => b,
        None => pos_fitness(rule, &pos.compile()?, &instance, epsilon)?,
    };
    let config = EvaluationConfig { samples: args.samples, epsilon, seed: args.seed, lower_bound: args.lower_bound };
    let (report, makespans) = evaluate_pos(&pos, &instance, bound, &config)?;

    let q = |level: f64| {
        report
            .quantiles
            .iter()
            .find(|(l, _)| *l == level)
            .map(|&(_, v)| v)
            .expect("reported level")
    };
    debug_assert_eq!(QUANTILE_LEVELS, [0.5, 0.8, 0.9, 0.95, 0.99]);
    let row = EvaluationRow {
        instance: display(&args.instance),
        samples: report.samples,
        seed: args.seed,
        epsilon,
        rule: if args.bound.is_some() { "given".into() } else { rule.to_string() },
        robust_makespan: report.robust_makespan,
        mean: report.mean,
        variance: report.variance,
        quantile: report.quantile,
        q50: q(0.5),
        q80: q(0.8),
        q90: q(0.9),
        q95: q(0.95),
        q99: q(0.99),
        violation_rate: report.violation_rate,
        violation_rate_feasible: report.violation_rate_feasible,
        infeasibility_probability: report.infeasibility_probability,
        lower_bound: report.lower_bound,
        mnpm: report.mnpm,
    };

    if let Some(path) = &args.dump {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["sample", "makespan"])?;
        for (i, m) in makespans.iter().enumerate() {
            w.write_record([i.to_string(), m.to_string()])?;
        }
        emit(Some(path), &String::from_utf8(w.into_inner()?)?)?;
    }
    if let Some(path) = &args.manifest {
        let mut manifest = RunManifest::new(
            "evaluate",
            args.seed,
            serde_json::json!({ "evaluation": config, "rule": rule, "bound": bound, "sigma": sigma.describe() }),
        );
        manifest.inputs = vec![display(&args.instance), display(&args.pos)];
        manifest.outputs.extend(args.output.as_deref().map(display));
        manifest.outputs.extend(args.dump.as_deref().map(display));
        emit(Some(path), &to_json(&manifest)?)?;
    }
    emit(args.output.as_deref(), &csv_string(&[row])?)?;
    Ok(ExitCode::SUCCESS)
}

fn instance_files(dir: &Path, format: Option<Format>) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && (format.is_some() || Format::from_extension(p).is_some()))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no instance files in {}", dir.display());
    }
    Ok(files)
}

fn bench(args: BenchArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let files = instance_files(&args.dir, args.format)?;
    let instances = files
        .iter()
        .map(|p| {
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            read_instance(p, args.format).map(|i| (name, i)).with_context(|| format!("loading {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = GridSpec {
        variants: args.variants.clone(),
        sigmas: args.sigmas.clone(),
        epsilons: args.epsilons.clone(),
        repeats: args.repeats,
        base: SearchConfig {
            max_iterations: args.iterations,
            seed: args.seed,
            og_samples: args.og_samples,
            ..SearchConfig::default()
        },
        timing: args.timing,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.threads).build()?;
    let (runs, aggregates) = pool.install(|| run_grid(&instances, &spec))?;

    if let Some(path) = &args.runs {
        emit(Some(path), &csv_string(&runs)?)?;
    }
    if let Some(path) = &args.manifest {
        let variants: Vec<String> = spec.variants.iter().map(Variant::to_string).collect();
        let mut manifest = RunManifest::new(
            "bench",
            args.seed,
            serde_json::json!({
                "variants": variants,
                "sigmas": spec.sigmas,
                "epsilons": spec.epsilons,
                "repeats": spec.repeats,
                "base": spec.base,
            }),
        );
        manifest.inputs = files.iter().map(|p| display(p)).collect();
        manifest.outputs.extend(args.runs.as_deref().map(display));
        manifest.outputs.extend(args.output.as_deref().map(display));
        if args.timing {
            manifest.wall_time_s = Some(started.elapsed().as_secs_f64());
        }
        emit(Some(path), &to_json(&manifest)?)?;
    }
    emit(args.output.as_deref(), &csv_string(&aggregates)?)?;
    Ok(ExitCode::SUCCESS)
}

fn convert(args: ConvertArgs) -> Result<ExitCode> {
    let sigma = args.sigma.mode()?;
    let mut instance = read_instance(&args.input, Some(args.from))?;
    sigma.apply(&mut instance);
    let text = match args.to {
        OutputFormat::Native => write_native(&instance),
        OutputFormat::ProgenMax => write_progen_max(&instance),
    };
    emit(args.output.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn gen_jsp(args: GenJspArgs) -> Result<ExitCode> {
    if args.jobs == 0 || args.machines == 0 {
        bail!("--jobs and --machines must be positive");
    }
    let jsp = generate_jsp(args.jobs, args.machines, &mut seeded(args.seed));
    emit(args.output.as_deref(), &write_jsp(&jsp))?;
    Ok(ExitCode::SUCCESS)
}

fn gen_instance(args: GenInstanceArgs) -> Result<ExitCode> {
    for (name, p) in [
        ("precedence-density", args.precedence_density),
        ("max-lag-probability", args.max_lag_probability),
    ] {
        if !(0.0..=1.0).contains(&p) {
            bail!("--{name} must lie in [0,1]");
        }
    }
    let config = GeneratorConfig {
        activities: args.activities,
        resources: args.resources,
        max_capacity: args.max_capacity,
        max_duration: args.max_duration,
        precedence_density: args.precedence_density,
        max_lag_probability: args.max_lag_probability,
        ..GeneratorConfig::default()
    };
    let instance = generate_instance(&config, &mut seeded(args.seed));
    emit(args.output.as_deref(), &write_native(&instance))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Bench(a) => bench(a),
        Command::Convert(a) => convert(a),
        Command::GenJsp(a) => gen_jsp(a),
        Command::GenInstance(a) => gen_instance(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
