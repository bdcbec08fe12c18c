use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;

use grrf_core::bound::{verify_bound, BoundRow};
use grrf_core::data::{generate_friedman, load_csv, LabelColumn};
use grrf_core::eval::{
    friedman_study, friedman_to_csv, reports_to_csv, run_protocol, sensitivity_sweep, EvalConfig,
    FriedmanReport, Method, RunReport, SelectorSpec, SweepFamily,
};
use grrf_core::forest::{self, ForestDocument, DEFAULT_SUBSAMPLE};
use grrf_core::{
    importance, train_rf, Dataset, Error, Execution, ForestConfig, ImportanceVector, SampleMode,
    SelectionResult, SCHEMA_VERSION,
};

/// Feature selection with regularized and guided regularized random forests.
///
/// Exit status: 0 on success, 1 when verify-bound finds a violation,
/// 2 on unreadable or malformed input, 3 on a parameter outside its valid range.
#[derive(Parser, Debug)]
#[command(name = "grrf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Select a feature subset with RRF or GRRF
    Select(SelectArgs),
    /// Impurity importance of an ordinary random forest
    Importance(ImportanceArgs),
    /// Replicated train/test evaluation of a selector
    Eval(EvalArgs),
    /// Write the simulated Friedman data set (15 features, 2 classes) as CSV
    Synth(SynthArgs),
    /// Check the bound on distinct Gini gain values per node size
    VerifyBound(VerifyBoundArgs),
    /// Evaluate a selector across a grid of penalty parameters
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Master random seed; every random draw derives from it
    #[arg(long, env = "GRRF_SEED", default_value_t = 42, hide_env_values = true)]
    seed: u64,
    /// Worker threads, at least 1 [default: all available cores]
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct Input {
    /// Input CSV file
    #[arg(long, value_name = "PATH")]
    data: Option<PathBuf>,
    /// Label column: a header name, a zero-based index, or `last`
    #[arg(long, default_value = "last")]
    label: String,
    /// The CSV has no header row; features are named X1..XP
    #[arg(long)]
    no_header: bool,
}

#[derive(Args, Debug)]
struct ForestArgs {
    /// Trees per forest, at least 1
    #[arg(long, default_value_t = 1000)]
    ntree: usize,
    /// Features examined per node, in 1..=P [default: ceil(sqrt(P))]
    #[arg(long)]
    mtry: Option<usize>,
    /// Fraction of rows drawn without replacement per RRF/GRRF tree, in (0, 1]
    #[arg(long, default_value_t = DEFAULT_SUBSAMPLE)]
    subsample: f64,
}

#[derive(Args, Debug)]
struct PenaltyFlags {
    /// Regularized random forest with a constant penalty (needs --lambda)
    #[arg(long, requires = "lambda")]
    rrf: bool,
    /// Guided regularized random forest (needs --gamma)
    #[arg(long, requires = "gamma")]
    grrf: bool,
    /// RRF penalty coefficient, in (0, 1]; 1 is the weakest penalty
    #[arg(long, requires = "rrf", allow_negative_numbers = true)]
    lambda: Option<f64>,
    /// GRRF importance coefficient, in [0, 1]; larger selects fewer features
    #[arg(long, requires = "grrf", allow_negative_numbers = true)]
    gamma: Option<f64>,
}

impl PenaltyFlags {
    fn method(&self) -> Method {
        match (self.lambda, self.gamma) {
            (Some(lambda), _) if self.rrf => Method::Rrf { lambda },
            (_, Some(gamma)) if self.grrf => Method::Grrf { gamma },
            _ => Method::All,
        }
    }
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("input").required(true).args(["data"])))]
#[command(group(ArgGroup::new("mode").required(true).args(["rrf", "grrf"])))]
struct SelectArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    mode: PenaltyFlags,
    #[command(flatten)]
    forest: ForestArgs,
    #[command(flatten)]
    common: Common,
    /// Write the selection JSON here instead of stdout; the feature list then goes to stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Also write the full selecting forest (trees, per-node gains) as JSON
    #[arg(long, value_name = "PATH")]
    forest_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["data", "forest"])))]
struct ImportanceArgs {
    #[command(flatten)]
    input: Input,
    /// Recompute importance from a saved forest JSON instead of training
    #[arg(long, value_name = "PATH")]
    forest: Option<PathBuf>,
    /// Trees in the random forest, at least 1
    #[arg(long, default_value_t = 1000)]
    ntree: usize,
    /// Features examined per node, in 1..=P [default: ceil(sqrt(P))]
    #[arg(long)]
    mtry: Option<usize>,
    #[command(flatten)]
    common: Common,
    /// Output CSV path [default: stdout]
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("source").required(true).args(["data", "friedman"])))]
#[command(group(ArgGroup::new("mode").required(true).args(["rf", "rrf", "grrf"])))]
struct EvalArgs {
    #[command(flatten)]
    input: Input,
    /// Instead of --data, score group recovery on this many simulated Friedman rows per replicate
    #[arg(long, value_name = "N")]
    friedman: Option<usize>,
    /// No selection: classify with every feature
    #[arg(long)]
    rf: bool,
    #[command(flatten)]
    mode: PenaltyFlags,
    #[command(flatten)]
    forest: ForestArgs,
    #[command(flatten)]
    protocol: Protocol,
    #[command(flatten)]
    common: Common,
    /// Report CSV path [default: stdout]
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Summary JSON path (means and standard errors)
    #[arg(long, value_name = "PATH")]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Protocol {
    /// Independent train/test replicates, at least 1
    #[arg(long, default_value_t = 20)]
    replicates: usize,
    /// Fraction of rows used for training, in (0, 1)
    #[arg(long, default_value_t = 2.0 / 3.0)]
    train_fraction: f64,
    /// Trees in the classifier trained on the selected features, at least 1
    #[arg(long, default_value_t = 1000)]
    classifier_ntree: usize,
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Number of rows, at least 2
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Random seed
    #[arg(long, env = "GRRF_SEED", default_value_t = 42, hide_env_values = true)]
    seed: u64,
    /// Output CSV path [default: stdout]
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("size").args(["n", "max_n"])))]
struct VerifyBoundArgs {
    /// Check a single node size, at least 2
    #[arg(long)]
    n: Option<usize>,
    /// Check every node size from 2 up to this value [default: 20]
    #[arg(long)]
    max_n: Option<usize>,
    /// Output CSV path [default: stdout]
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("input").required(true).args(["data"])))]
#[command(group(ArgGroup::new("family").required(true).args(["rrf", "grrf"])))]
struct SweepArgs {
    #[command(flatten)]
    input: Input,
    /// Sweep the RRF penalty coefficient lambda, each value in (0, 1]
    #[arg(long)]
    rrf: bool,
    /// Sweep the GRRF importance coefficient gamma, each value in [0, 1]
    #[arg(long)]
    grrf: bool,
    /// Comma-separated parameter values
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_negative_numbers = true
    )]
    grid: Vec<f64>,
    #[command(flatten)]
    forest: ForestArgs,
    #[command(flatten)]
    protocol: Protocol,
    #[command(flatten)]
    common: Common,
    /// Report CSV path [default: stdout]
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Summary JSON path (means and standard errors per grid value)
    #[arg(long, value_name = "PATH")]
    summary: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Output(PathBuf, io::Error),
    Usage(String),
    BoundViolated,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::BoundViolated => 1,
            CliError::Core(e) if e.is_input_error() => 2,
            CliError::Output(..) => 2,
            CliError::Core(_) | CliError::Usage(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Output(p, e) => write!(f, "cannot write {}: {e}", p.display()),
            CliError::Usage(m) => write!(f, "invalid parameter: {m}"),
            CliError::BoundViolated => write!(f, "bound violated for at least one node size"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Select(a) => cmd_select(a),
        Command::Importance(a) => cmd_importance(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(a) => cmd_synth(a),
        Command::VerifyBound(a) => cmd_verify_bound(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

fn configure_threads(common: &Common) -> CliResult<()> {
    let Some(threads) = common.threads else {
        return Ok(());
    };
    if threads == 0 {
        return Err(CliError::Usage("threads must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(())
}

fn load(input: &Input) -> CliResult<Dataset> {
    let path = input
        .data
        .as_ref()
        .ok_or_else(|| CliError::Usage("--data is required".into()))?;
    Ok(load_csv(
        path,
        &LabelColumn::parse(&input.label),
        !input.no_header,
    )?)
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Output(path.to_path_buf(), e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Output(PathBuf::from("<stdout>"), e)),
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(Error::from)?;
    s.push('\n');
    Ok(s)
}

fn selector(method: Method, forest: &ForestArgs) -> SelectorSpec {
    SelectorSpec {
        mtry: forest.mtry,
        subsample: forest.subsample,
        ..SelectorSpec::new(method).with_ntree(forest.ntree)
    }
}

fn check_selector(spec: &SelectorSpec, n_features: usize) -> CliResult<()> {
    // The configuration is rebuilt per replicate; its ranges do not depend on the seed.
    if let Some(cfg) = spec.forest_config(0) {
        cfg.validate(n_features)?;
    }
    Ok(())
}

fn check_protocol(p: &Protocol) -> CliResult<EvalConfig> {
    if p.replicates == 0 {
        return Err(CliError::Usage("replicates must be at least 1".into()));
    }
    if !(p.train_fraction > 0.0 && p.train_fraction < 1.0) {
        return Err(CliError::Usage(format!(
            "train fraction {} outside (0, 1)",
            p.train_fraction
        )));
    }
    if p.classifier_ntree == 0 {
        return Err(CliError::Usage(
            "classifier ntree must be at least 1".into(),
        ));
    }
    Ok(EvalConfig {
        train_fraction: p.train_fraction,
        classifier_ntree: p.classifier_ntree,
        execution: Execution::default(),
    })
}

#[derive(Serialize)]
struct SelectionOutput<'a> {
    schema_version: u32,
    selection: &'a SelectionResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    guide_importance: Option<&'a ImportanceVector>,
}

fn feature_list(sel: &SelectionResult, n_features: usize) -> String {
    let mut out = format!(
        "# selected {} of {} features\n",
        sel.subset_size, n_features
    );
    for (rank, (index, name)) in sel.selected.iter().zip(&sel.selected_names).enumerate() {
        out.push_str(&format!("{}\t{}\t{}\n", rank + 1, name, index));
    }
    out
}

fn cmd_select(a: SelectArgs) -> CliResult<()> {
    configure_threads(&a.common)?;
    let spec = selector(a.mode.method(), &a.forest);
    let config = spec
        .forest_config(a.common.seed)
        .expect("select always has a penalty mode");
    let d = load(&a.input)?;
    config.validate(d.n_features())?;
    let selection = forest::select(&d, &config)?;
    let doc = SelectionOutput {
        schema_version: SCHEMA_VERSION,
        selection: &selection.result,
        guide_importance: selection.guide.as_ref(),
    };
    let json = to_json(&doc)?;
    let list = feature_list(&selection.result, d.n_features());
    match &a.out {
        Some(path) => {
            emit(Some(path), &json)?;
            emit(None, &list)?;
        }
        None => {
            emit(None, &json)?;
            eprint!("{list}");
        }
    }
    if let Some(path) = &a.forest_out {
        let doc = ForestDocument {
            guide_importance: selection.guide.clone(),
            ..ForestDocument::new(selection.forest, Some(selection.result))
        };
        emit(Some(path), &doc.to_json()?)?;
    }
    Ok(())
}

fn importance_csv(names: &[String], imp: &ImportanceVector) -> String {
    let mut rank = vec![0usize; imp.len()];
    for (r, f) in imp.ranking().into_iter().enumerate() {
        rank[f] = r + 1;
    }
    let mut out = String::from("index,name,raw,normalized,rank\n");
    for (i, name) in names.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            i, name, imp.raw[i], imp.normalized[i], rank[i]
        ));
    }
    out
}

fn cmd_importance(a: ImportanceArgs) -> CliResult<()> {
    configure_threads(&a.common)?;
    let (names, imp) = match &a.forest {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            let doc = ForestDocument::from_json(&text)?;
            let imp = importance(&doc.forest);
            (doc.forest.feature_names, imp)
        }
        None => {
            let d = load(&a.input)?;
            let config = ForestConfig {
                ntree: a.ntree,
                mtry: a.mtry,
                ..ForestConfig::rf(a.common.seed)
            };
            config.validate(d.n_features())?;
            let rf = train_rf(&d, None, &config)?;
            (d.feature_names().to_vec(), importance(&rf))
        }
    };
    emit(a.out.as_deref(), &importance_csv(&names, &imp))
}

#[derive(Serialize)]
struct RunSummary<'a> {
    schema_version: u32,
    #[serde(flatten)]
    report: &'a RunReport,
}

#[derive(Serialize)]
struct FriedmanSummary<'a> {
    schema_version: u32,
    #[serde(flatten)]
    report: &'a FriedmanReport,
}

fn cmd_eval(a: EvalArgs) -> CliResult<()> {
    configure_threads(&a.common)?;
    let spec = selector(a.mode.method(), &a.forest);
    let config = check_protocol(&a.protocol)?;
    if let Some(n) = a.friedman {
        check_selector(&spec, grrf_core::data::FRIEDMAN_FEATURES)?;
        let report = friedman_study(
            &spec,
            n,
            a.protocol.replicates,
            a.common.seed,
            Execution::default(),
        )?;
        emit(a.out.as_deref(), &friedman_to_csv(&report))?;
        eprintln!(
            "groups identified {:.3} (se {:.3}), irrelevant or redundant {:.3} (se {:.3})",
            report.mean_groups,
            report.stderr_groups,
            report.mean_irrelevant_or_redundant,
            report.stderr_irrelevant_or_redundant
        );
        if let Some(path) = &a.summary {
            let doc = FriedmanSummary {
                schema_version: SCHEMA_VERSION,
                report: &report,
            };
            emit(Some(path), &to_json(&doc)?)?;
        }
        return Ok(());
    }
    let d = load(&a.input)?;
    check_selector(&spec, d.n_features())?;
    let report = run_protocol(&d, &spec, a.protocol.replicates, a.common.seed, &config)?;
    emit(
        a.out.as_deref(),
        &reports_to_csv(std::slice::from_ref(&report)),
    )?;
    eprintln!(
        "mean subset size {:.3} (se {:.3}), mean error {:.4} (se {:.4}), failed {}",
        report.mean_size, report.stderr_size, report.mean_error, report.stderr_error, report.failed
    );
    if let Some(path) = &a.summary {
        let doc = RunSummary {
            schema_version: SCHEMA_VERSION,
            report: &report,
        };
        emit(Some(path), &to_json(&doc)?)?;
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> CliResult<()> {
    let d = generate_friedman(a.n, a.seed)?;
    let mut buf = Vec::new();
    d.write_csv(&mut buf).expect("writing to memory");
    emit(
        a.out.as_deref(),
        &String::from_utf8(buf).expect("csv is utf-8"),
    )
}

fn cmd_verify_bound(a: VerifyBoundArgs) -> CliResult<()> {
    let sizes: Vec<usize> = match (a.n, a.max_n) {
        (Some(n), _) => vec![n],
        (None, max) => (2..=max.unwrap_or(20)).collect(),
    };
    if sizes.is_empty() || sizes[0] < 2 {
        return Err(CliError::Usage("node size must be at least 2".into()));
    }
    let rows = sizes
        .into_iter()
        .map(verify_bound)
        .collect::<grrf_core::Result<Vec<_>>>()?;
    let mut out = String::from(BoundRow::CSV_HEADER);
    out.push('\n');
    for row in &rows {
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    emit(a.out.as_deref(), &out)?;
    if rows.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(CliError::BoundViolated)
    }
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    schema_version: u32,
    family: &'static str,
    grid: &'a [f64],
    reports: &'a [RunReport],
}

fn cmd_sweep(a: SweepArgs) -> CliResult<()> {
    configure_threads(&a.common)?;
    let config = check_protocol(&a.protocol)?;
    let (family, name) = if a.rrf {
        (SweepFamily::Rrf, "rrf")
    } else {
        (SweepFamily::Grrf, "grrf")
    };
    let template = selector(Method::All, &a.forest);
    let d = load(&a.input)?;
    let probe = ForestConfig {
        sample_mode: SampleMode::WithoutReplacement {
            fraction: a.forest.subsample,
        },
        mtry: a.forest.mtry,
        ntree: a.forest.ntree,
        ..ForestConfig::rf(0)
    };
    probe.validate(d.n_features())?;
    let reports = sensitivity_sweep(
        &d,
        family,
        &a.grid,
        a.protocol.replicates,
        a.common.seed,
        &template,
        &config,
    )?;
    emit(a.out.as_deref(), &reports_to_csv(&reports))?;
    for r in &reports {
        eprintln!(
            "{} {}: mean subset size {:.3}, mean error {:.4}",
            name,
            r.parameter.unwrap_or(f64::NAN),
            r.mean_size,
            r.mean_error
        );
    }
    if let Some(path) = &a.summary {
        let doc = SweepSummary {
            schema_version: SCHEMA_VERSION,
            family: name,
            grid: &a.grid,
            reports: &reports,
        };
        emit(Some(path), &to_json(&doc)?)?;
    }
    Ok(())
}
