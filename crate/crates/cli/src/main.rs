use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use repairbench_core::benchmark::{
    build_benchmark, load_base_dataset, write_benchmark, BuildOptions, Manifest, REFERENCE_COUNTS,
};
use repairbench_core::evaluation::{evaluate_benchmark, EvalSet, ResultsFile};
use repairbench_core::harness::{Harness, SourceFile, TestStatus, Toolchain};
use repairbench_core::naming::{BuiltinProvider, ExternalProvider, NameProvider};
use repairbench_core::report::{build_report, DEFAULT_K};
use repairbench_core::transforms::{TransformKind, DEFAULT_SEED};

const EXIT_FAILURES: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INFRA: u8 = 3;

#[derive(Parser)]
#[command(name = "repairbench", version, about = "Build and score robustness benchmarks for Java program repair")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every randomized choice.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Worker threads (default: number of CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// JDK installation; falls back to JDK_HOME, JAVA_HOME, then PATH.
    #[arg(long, global = true)]
    jdk_home: Option<PathBuf>,
    /// `builtin`, or `external:<shell command>` speaking the JSON-lines protocol.
    #[arg(long, global = true, default_value = "builtin")]
    naming_provider: String,
    /// Per-compilation and per-test-run limit in seconds.
    #[arg(long, global = true, default_value_t = 30)]
    timeout: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Transform a base dataset into a benchmark directory.
    Transform {
        /// JSON Lines manifest of base bug instances; paths are relative to it.
        #[arg(long)]
        input: PathBuf,
        /// `all` or a comma-separated list of kind names.
        #[arg(long, default_value = "all", value_parser = parse_kinds)]
        kinds: KindSet,
        #[arg(long)]
        out: PathBuf,
        /// Emit instances without running the tests on them.
        #[arg(long)]
        no_validate: bool,
    },
    /// Check file digests and rerun the tests of every instance's fixed program.
    Validate {
        #[arg(long)]
        benchmark: PathBuf,
    },
    /// Run externally generated patches and record per-bug results.
    Evaluate {
        #[arg(long)]
        benchmark: PathBuf,
        /// Root of `<instance_id>/NN.java` patch files.
        #[arg(long)]
        patches: PathBuf,
        #[arg(long)]
        model: String,
        #[arg(long, value_enum)]
        set: SetArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare original and transformed results.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        orig: Vec<PathBuf>,
        #[arg(long, num_args = 1.., required = true)]
        trans: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SetArg {
    Original,
    Transformed,
}

#[derive(Clone)]
struct KindSet(BTreeSet<TransformKind>);

fn parse_kinds(s: &str) -> Result<KindSet, String> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(KindSet(TransformKind::ALL.into_iter().collect()));
    }
    let kinds = s
        .split(',')
        .map(|k| k.trim().parse::<TransformKind>())
        .collect::<Result<BTreeSet<_>, _>>()?;
    if kinds.is_empty() {
        return Err("no kinds given".into());
    }
    Ok(KindSet(kinds))
}

/// Bad input that is the caller's fault rather than the environment's.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn provider(spec: &str, timeout: Duration) -> Result<Box<dyn NameProvider>> {
    match spec.split_once(':') {
        None if spec == "builtin" => Ok(Box::new(BuiltinProvider)),
        Some(("external", cmd)) if !cmd.trim().is_empty() => {
            Ok(Box::new(ExternalProvider::new(cmd).with_timeout(timeout)))
        }
        _ => Err(usage(format!(
            "--naming-provider must be `builtin` or `external:<command>`, got `{spec}`"
        ))),
    }
}

fn harness(g: &Global) -> Result<Harness> {
    let toolchain = Toolchain::discover(g.jdk_home.as_deref()).context("locating a Java toolchain")?;
    Ok(Harness::new(toolchain).with_timeout(Duration::from_secs(g.timeout)))
}

fn init_pool(jobs: Option<usize>) -> Result<()> {
    if let Some(n) = jobs {
        if n == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker pool")?;
    }
    Ok(())
}

fn print_counts(manifest: &Manifest, format: Format) {
    let reference = |k: TransformKind| REFERENCE_COUNTS.iter().find(|(r, _)| *r == k).map(|(_, c)| *c);
    match format {
        Format::Csv => {
            println!("kind,instances,reference");
            for (kind, n) in &manifest.counts.per_kind {
                println!("{kind},{n},{}", reference(*kind).map_or(String::new(), |c| c.to_string()));
            }
            println!("total,{},", manifest.counts.total);
        }
        Format::Table => {
            println!("{:<18} {:>9} {:>9}", "kind", "instances", "reference");
            for (kind, n) in &manifest.counts.per_kind {
                let r = reference(*kind).map_or("-".to_string(), |c| c.to_string());
                println!("{:<18} {n:>9} {r:>9}", kind.name());
            }
            let ref_total: usize = REFERENCE_COUNTS.iter().map(|(_, c)| c).sum();
            println!("{:<18} {:>9} {:>9}", "total", manifest.counts.total, ref_total);
        }
    }
    let mut by_reason = std::collections::BTreeMap::new();
    for e in &manifest.exclusions {
        *by_reason.entry(e.reason.as_str()).or_insert(0usize) += 1;
    }
    for (reason, n) in by_reason {
        eprintln!("excluded ({reason}): {n}");
    }
    if !manifest.rejected.is_empty() {
        eprintln!("rejected base entries: {}", manifest.rejected.len());
    }
}

fn transform(g: &Global, input: &Path, kinds: &KindSet, out: &Path, no_validate: bool) -> Result<u8> {
    let root = input.parent().unwrap_or(Path::new("."));
    let dataset = load_base_dataset(root, input).context("loading base dataset")?;
    let provider = provider(&g.naming_provider, Duration::from_secs(g.timeout))?;
    let harness = if no_validate { None } else { Some(harness(g)?) };
    let options = BuildOptions {
        kinds: kinds.0.clone(),
        seed: g.seed,
        jobs: g.jobs,
    };
    let mut build = build_benchmark(&dataset.instances, &options, provider.as_ref(), harness.as_ref())
        .context("building benchmark")?;
    let mut rejected = dataset.rejected.clone();
    rejected.append(&mut build.rejected);
    build.rejected = rejected;
    let kinds: Vec<TransformKind> = kinds.0.iter().copied().collect();
    let manifest = write_benchmark(out, &build, &dataset.digest(), g.seed, &kinds, provider.id())
        .with_context(|| format!("writing {}", out.display()))?;
    print_counts(&manifest, g.format);
    if !manifest.validated {
        eprintln!("note: instances were not validated against their tests");
    }
    Ok(0)
}

fn validate(g: &Global, bench: &Path) -> Result<u8> {
    let manifest = Manifest::load(bench).context("loading benchmark manifest")?;
    let harness = harness(g)?;
    let mut failures = 0usize;
    for (path, problem) in manifest.verify_files(bench) {
        println!("{path}: {problem}");
        failures += 1;
    }
    let runs: Vec<(String, TestStatus)> = manifest
        .instances
        .par_iter()
        .map(|inst| -> Result<(String, TestStatus)> {
            let read = |rel: &str| {
                std::fs::read_to_string(bench.join(rel)).with_context(|| format!("reading {rel}"))
            };
            let name = |rel: &str| rel.rsplit('/').next().unwrap_or(rel).to_string();
            let program = SourceFile::new(name(&inst.fixed.path), read(&inst.fixed.path)?);
            let tests = SourceFile::new(name(&inst.test.path), read(&inst.test.path)?);
            Ok((inst.id.clone(), harness.run_suite(&program, &tests)?.status))
        })
        .collect::<Result<_>>()?;
    for (id, status) in &runs {
        if *status != TestStatus::Pass {
            println!("{id}: {}", status.as_str());
            failures += 1;
        }
    }
    println!("{} instances checked, {failures} problem(s)", runs.len());
    Ok(if failures > 0 { EXIT_FAILURES } else { 0 })
}

fn evaluate(g: &Global, bench: &Path, patches: &Path, model: &str, set: SetArg, out: &Path) -> Result<u8> {
    let harness = harness(g)?;
    let set = match set {
        SetArg::Original => EvalSet::Original,
        SetArg::Transformed => EvalSet::Transformed,
    };
    let results = evaluate_benchmark(bench, set, patches, model, &harness).context("evaluating patches")?;
    results.save(out)?;
    let missing = results.missing().count();
    let fixed = results.bugs.iter().filter(|b| b.c > 0).count();
    println!("{} bugs evaluated, {fixed} with a passing patch, {missing} without patches", results.bugs.len());
    Ok(if missing > 0 { EXIT_FAILURES } else { 0 })
}

fn report(g: &Global, orig: &[PathBuf], trans: &[PathBuf], k: usize) -> Result<u8> {
    let load = |paths: &[PathBuf]| paths.iter().map(|p| ResultsFile::load(p)).collect::<Result<Vec<_>, _>>();
    let orig = load(orig)?;
    let trans = load(trans)?;
    let table = build_report(&orig, &trans, k).map_err(|e| usage(e.to_string()))?;
    match g.format {
        Format::Table => print!("{}", table.render_table()),
        Format::Csv => print!("{}", table.render_csv()),
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    init_pool(cli.global.jobs)?;
    let g = &cli.global;
    match &cli.command {
        Command::Transform {
            input,
            kinds,
            out,
            no_validate,
        } => transform(g, input, kinds, out, *no_validate),
        Command::Validate { benchmark } => validate(g, benchmark),
        Command::Evaluate {
            benchmark,
            patches,
            model,
            set,
            out,
        } => evaluate(g, benchmark, patches, model, *set, out),
        Command::Report { orig, trans, k } => report(g, orig, trans, *k),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_INFRA)
            }
        }
    }
}
