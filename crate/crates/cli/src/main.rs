//! `optaudit`: audit optimization cases, build injected benchmarks and score
//! prediction files.
//!
//! Exit codes: 0 success, 1 bad input or schema, 2 backend failure, 3 internal error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use optaudit_core::artifact::{parse_case, parse_case_set, validate};
use optaudit_core::config::Config;
use optaudit_core::contract::{check_tuple, CheckStatus};
use optaudit_core::evaluator::{parse_predictions, predictions_to_jsonl, score, BenchmarkKind, GoldSet};
use optaudit_core::gateway::BackendKind;
use optaudit_core::pipeline::{build_gateway, run_bench, BenchRun, DetectorKind};
use optaudit_core::prompts::PromptSet;
use optaudit_core::report::{render_markdown, request_analyst_notes};
use optaudit_core::{build_benchmark, AuditContext, AuditTuple, FamilyId, InjectionRecipe, TaxonomyRegistry};

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("backend: {0}")]
    Backend(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Backend(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(
    name = "optaudit",
    version,
    about = "Audit optimization models and their solver code against a fault taxonomy"
)]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides gateway.backend: heuristic, replay, remote or record.
    #[arg(long, global = true)]
    backend: Option<String>,
    /// Overrides gateway.fixture_dir for replay and record.
    #[arg(long, global = true)]
    fixture_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Audit cases and write predictions, markdown reports and a run manifest.
    Audit(RunArgs),
    /// Build an injected benchmark from clean seed cases.
    Inject(InjectArgs),
    /// Benchmark runs and scoring.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Parse and validate cases, then run the contract checks.
    Validate {
        /// Case file (.json or .jsonl) or a directory of .json cases.
        cases: PathBuf,
    },
    /// Inspect the bundled taxonomy.
    #[command(subcommand)]
    Taxonomy(TaxonomyCommand),
}

#[derive(Subcommand, Debug)]
enum BenchCommand {
    /// Audit a case set and write predictions plus a manifest (no reports).
    Run(RunArgs),
    /// Score a prediction file against a gold case file.
    Score(ScoreArgs),
}

#[derive(Subcommand, Debug)]
enum TaxonomyCommand {
    /// List every fault type.
    List {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Case file (.json or .jsonl) or a directory of .json cases.
    cases: PathBuf,
    #[arg(long, default_value = "multi_agent")]
    detector: String,
    /// Output directory.
    #[arg(long, default_value = "optaudit-out")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct InjectArgs {
    /// Seed cases: .json, .jsonl or a directory of .json files.
    seeds: PathBuf,
    /// Restrict to these recipe codes (repeatable).
    #[arg(long = "recipe")]
    recipes: Vec<String>,
    /// Restrict to recipes of these families (repeatable).
    #[arg(long = "family")]
    families: Vec<String>,
    #[arg(long, default_value_t = 30)]
    per_type: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSONL; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the per-label coverage table as JSON.
    #[arg(long)]
    coverage: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Clean,
    Injected,
    Natural,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    predictions: PathBuf,
    /// Gold cases (the benchmark JSONL) or natural gold records.
    gold: PathBuf,
    /// Fail unless the gold file is of this kind.
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Print JSON instead of a table.
    #[arg(long)]
    json: bool,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
fn emit(text: &str) {
    use std::io::Write as _;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

/// A directory of `.json` cases (sorted), a `.jsonl` set, or one `.json` case.
fn load_cases(path: &Path) -> Result<Vec<AuditTuple>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        return files
            .iter()
            .map(|f| parse_case(&read(f)?).map_err(|e| CliError::Input(format!("{}: {e}", f.display()))))
            .collect();
    }
    let text = read(path)?;
    let parsed = if path.extension().is_some_and(|x| x == "jsonl") {
        parse_case_set(&text)
    } else {
        parse_case(&text).map(|t| vec![t])
    };
    parsed.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_config(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(p) => Config::from_path(p).map_err(input)?,
        None => Config::default(),
    };
    if let Some(b) = &cli.backend {
        cfg.gateway.backend = b.clone();
    }
    if let Some(d) = &cli.fixture_dir {
        cfg.gateway.fixture_dir = Some(d.clone());
    }
    cfg.validate().map_err(input)?;
    Ok(cfg)
}

/// File-name-safe form of a case id.
fn file_stem(case_id: &str) -> String {
    case_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

fn run(cli: &Cli, args: &RunArgs, reports: bool) -> Result<()> {
    let cfg = load_config(cli)?;
    let detector = DetectorKind::parse(&args.detector)
        .ok_or_else(|| CliError::Input(format!("unknown detector {}", args.detector)))?;
    let cases = load_cases(&args.cases)?;
    let gateway = build_gateway(&cfg.gateway).map_err(|e| CliError::Backend(e.to_string()))?;
    if detector == DetectorKind::SingleAgent && gateway.kind() == BackendKind::HeuristicStub {
        return Err(CliError::Input("the single_agent detector needs a replay or remote backend".into()));
    }
    let prompts = PromptSet::load(cfg.detector.prompt_dir.as_deref()).map_err(input)?;
    let registry = TaxonomyRegistry::bundled();
    let ctx = AuditContext { gateway: &gateway, config: &cfg, prompts: &prompts, registry };
    let bench: BenchRun = run_bench(&cases, &ctx, detector);

    write(&args.out.join("predictions.jsonl"), &predictions_to_jsonl(&bench.predictions()))?;
    let manifest = serde_json::to_string_pretty(&bench.manifest).map_err(|e| CliError::Internal(e.to_string()))?;
    write(&args.out.join("manifest.json"), &manifest)?;
    if reports {
        for audit in &bench.audits {
            let notes = if cfg.report.analyst_notes {
                request_analyst_notes(audit, &gateway, &prompts, registry).0
            } else {
                None
            };
            let path = args.out.join("reports").join(format!("{}.md", file_stem(&audit.case_id)));
            write(&path, &render_markdown(audit, registry, notes.as_ref()))?;
        }
    }

    let failed: Vec<&str> = bench.manifest.cases.iter().filter(|c| c.failed).map(|c| c.case_id.as_str()).collect();
    let flagged = bench.audits.iter().filter(|a| !a.diagnosis.abstained).count();
    eprintln!(
        "audited {} case(s) with {}: {flagged} flagged, {} abstained, {} failed; output in {}",
        cases.len(),
        detector.as_str(),
        cases.len() - flagged,
        failed.len(),
        args.out.display()
    );
    for a in bench.audits.iter().filter(|a| a.outcome.is_none()) {
        for d in &a.diagnostics {
            eprintln!("  {}: {d}", a.case_id);
        }
    }
    if !cases.is_empty() && failed.len() == cases.len() {
        return Err(CliError::Backend("every audit failed".into()));
    }
    Ok(())
}

fn inject(args: &InjectArgs) -> Result<()> {
    let registry = TaxonomyRegistry::bundled();
    let families: Vec<FamilyId> = args
        .families
        .iter()
        .map(|f| FamilyId::parse(f).ok_or_else(|| CliError::Input(format!("unknown family {f}"))))
        .collect::<Result<_>>()?;
    let mut recipes = if args.recipes.is_empty() {
        InjectionRecipe::all(registry)
    } else {
        args.recipes.iter().map(|c| InjectionRecipe::new(c, registry).map_err(input)).collect::<Result<_>>()?
    };
    if !families.is_empty() {
        recipes.retain(|r| families.contains(&r.label.family));
    }
    if recipes.is_empty() {
        return Err(CliError::Input("no recipe matches the filters".into()));
    }
    let seeds = load_cases(&args.seeds)?;
    let bench = build_benchmark(&seeds, &recipes, args.per_type, args.seed, registry).map_err(input)?;
    match &args.out {
        Some(p) => write(p, &bench.to_jsonl())?,
        None => emit(&bench.to_jsonl()),
    }
    if let Some(p) = &args.coverage {
        let json = serde_json::to_string_pretty(&bench.coverage).map_err(|e| CliError::Internal(e.to_string()))?;
        write(p, &json)?;
    }
    let chosen: Vec<&str> = recipes.iter().map(|r| r.code()).collect();
    for row in bench.coverage.iter().filter(|r| chosen.contains(&r.label.numeric_code.as_str())) {
        eprintln!("{:<7} {:>4} case(s) {:?}", row.label.numeric_code, row.cases, row.status);
    }
    eprintln!("{} injected case(s) from {} seed(s)", bench.cases.len(), seeds.len());
    Ok(())
}

fn score_cmd(args: &ScoreArgs) -> Result<()> {
    let preds = parse_predictions(&read(&args.predictions)?).map_err(input)?;
    let golds = GoldSet::parse_jsonl(&read(&args.gold)?).map_err(input)?;
    let expected = args.kind.map(|k| match k {
        KindArg::Clean => BenchmarkKind::Clean,
        KindArg::Injected => BenchmarkKind::Injected,
        KindArg::Natural => BenchmarkKind::Natural,
    });
    let report = score(&preds, &golds, expected).map_err(input)?;
    let json = serde_json::to_string_pretty(&report.to_json()).map_err(|e| CliError::Internal(e.to_string()))?;
    if let Some(p) = &args.out {
        write(p, &json)?;
    }
    if args.json {
        emit(&format!("{json}\n"));
    } else {
        emit(&report.table());
    }
    Ok(())
}

fn validate_cmd(cli: &Cli, path: &Path) -> Result<()> {
    let cfg = load_config(cli)?;
    let cases = load_cases(path)?;
    let registry = TaxonomyRegistry::bundled();
    let mut failing = 0;
    for t in &cases {
        validate(t).map_err(|e| CliError::Input(format!("{}: {e}", t.case_id)))?;
        let report = check_tuple(t, &cfg.contract, registry);
        let fails: Vec<_> = report.checks.iter().filter(|c| c.status == CheckStatus::Fail).collect();
        if fails.is_empty() {
            emit(&format!("{}: ok\n", t.case_id));
        } else {
            failing += 1;
            for c in fails {
                emit(&format!("{}: FAIL {} {}\n", t.case_id, c.check_id, c.evidence.join("; ")));
            }
        }
    }
    eprintln!("{} case(s) parsed, {failing} with contract failures", cases.len());
    Ok(())
}

fn taxonomy_list(family: Option<&str>, json: bool) -> Result<()> {
    let registry = TaxonomyRegistry::bundled();
    let only =
        family.map(|f| FamilyId::parse(f).ok_or_else(|| CliError::Input(format!("unknown family {f}")))).transpose()?;
    let labels: Vec<_> = registry.labels().filter(|l| only.is_none_or(|f| l.family == f)).collect();
    if json {
        let rows: Vec<_> = labels
            .iter()
            .map(|l| {
                serde_json::json!({
                    "code": l.numeric_code,
                    "family": l.family,
                    "subcategory": registry.subcategory_name(l),
                    "type": registry.type_name(l),
                })
            })
            .collect();
        emit(&(serde_json::to_string_pretty(&rows).map_err(|e| CliError::Internal(e.to_string()))? + "\n"));
    } else {
        for l in labels {
            emit(&format!(
                "{:<7} {:<15} {} / {}\n",
                l.numeric_code,
                l.family,
                registry.subcategory_name(l),
                registry.type_name(l)
            ));
        }
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Audit(a) => run(cli, a, true),
        Command::Inject(a) => inject(a),
        Command::Bench(BenchCommand::Run(a)) => run(cli, a, false),
        Command::Bench(BenchCommand::Score(a)) => score_cmd(a),
        Command::Validate { cases } => validate_cmd(cli, cases),
        Command::Taxonomy(TaxonomyCommand::List { family, json }) => taxonomy_list(family.as_deref(), *json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
