//! Command-line pipeline: `synth`, `forecast`, `featurize`, `train`,
//! `search`, `evaluate` and `report`.
//!
//! Settings come from, in increasing priority: built-in defaults, the file
//! given by `--config`, and command-line flags. The seed can also be set
//! through the `QRMCAST_SEED` environment variable, which sits between the
//! config file and `--seed`. Exit codes: 0 success, 1 data error, 2 usage
//! error.

mod config;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

pub use config::Config;

use crate::error::Error;
use crate::evaluation::{
    evaluate_model, grid_search, majority_baseline, metrics, random_search, report_row,
    ConfusionMatrix, SearchSpace, REPORT_HEADER,
};
use crate::features::featurize;
use crate::forest::{feature_importance, ForestModel};
use crate::market_data::{
    build_windows, read_quotes, read_quotes_skipping, split_dataset, split_dataset_ordered,
    synthesize_quotes, write_quotes, LabeledDataset, OptionQuote, SplitFractions, Splits,
};
use crate::model::{train_model, ModelFamily, ModelParams, TrainedModel};
use crate::qrm::{read_forecasts, solve_windows, write_forecasts, ForecastRecord, QrmConfig};

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "QRMCAST_SEED";
pub const DEFAULT_SEED: u64 = 42;
/// Signal strength used by `synth` when none is given.
pub const DEFAULT_SIGNAL: f64 = 0.1;

#[derive(Debug, Parser)]
#[command(
    name = "qrm-forecast",
    version,
    about = "QRM option forecasts and tree classifiers for next-day direction"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate synthetic option quotes with a planted signal.
    Synth(SynthArgs),
    /// Solve the QRM problem for every three-day window.
    Forecast(ForecastArgs),
    /// Join quotes and forecasts into a labeled feature table.
    Featurize(FeaturizeArgs),
    /// Train one model family and score it on the validation split.
    Train(TrainArgs),
    /// Grid or random hyperparameter search on the validation split.
    Search(SearchArgs),
    /// Score a saved model on one split.
    Evaluate(EvaluateArgs),
    /// Score several saved models side by side.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Config file with `[section]` headers and `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    options: Option<usize>,
    #[arg(long)]
    days: Option<usize>,
    #[arg(long)]
    signal: Option<f64>,
    /// Output quote CSV.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ForecastArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    quotes: Option<PathBuf>,
    /// Output forecast CSV.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Worker threads; output does not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Drop invalid rows and unsolvable windows instead of failing.
    #[arg(long)]
    skip_bad: bool,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    cg_tol: Option<f64>,
    #[arg(long)]
    cg_max_iter: Option<usize>,
    /// auto, direct or cg.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Debug, Args)]
struct FeaturizeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    quotes: Option<PathBuf>,
    #[arg(long)]
    forecasts: Option<PathBuf>,
    /// Output feature CSV.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Drop invalid quote rows instead of failing.
    #[arg(long)]
    skip_bad: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Tree,
    Gbm,
    Forest,
}

impl From<FamilyArg> for ModelFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Tree => ModelFamily::Tree,
            FamilyArg::Gbm => ModelFamily::Gbm,
            FamilyArg::Forest => ModelFamily::Forest,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Part {
    Train,
    Val,
    Test,
    All,
}

#[derive(Debug, Args)]
struct SplitArgs {
    /// Train, validation and test fractions, e.g. `0.7,0.15,0.15`.
    #[arg(long)]
    split: Option<String>,
    /// Split rows in file order instead of shuffling.
    #[arg(long)]
    temporal: bool,
}

#[derive(Debug, Args)]
struct HyperArgs {
    #[arg(long)]
    criterion: Option<String>,
    /// A positive integer, or `none` for unlimited tree depth.
    #[arg(long)]
    max_depth: Option<String>,
    #[arg(long)]
    min_samples_split: Option<String>,
    #[arg(long)]
    feature_fraction: Option<String>,
    #[arg(long)]
    trees: Option<String>,
    #[arg(long)]
    no_bootstrap: bool,
    #[arg(long)]
    stages: Option<String>,
    #[arg(long)]
    learning_rate: Option<String>,
    /// newton or line_search.
    #[arg(long)]
    leaf_step: Option<String>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: FamilyArg,
    /// Output model file.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Validation report CSV.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: FamilyArg,
    /// `name=spec;...` with specs `v1,v2`, `int:lo:hi` or `log:lo:hi`.
    #[arg(long)]
    space: Option<String>,
    /// Number of random draws; grid search when absent.
    #[arg(long)]
    random: Option<usize>,
    /// Trace CSV with one row per candidate.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Best model, retrained on the training split.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    split: SplitArgs,
    #[command(flatten)]
    hyper: HyperArgs,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    model_file: Option<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "test")]
    part: Part,
    /// Model name in the report; defaults to the family.
    #[arg(long)]
    name: Option<String>,
    /// Report CSV; printed to stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    split: SplitArgs,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long = "model-file", required = true, num_args = 1..)]
    model_files: Vec<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "test")]
    part: Part,
    /// Report CSV; printed to stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Feature-importance CSV for tree and forest models.
    #[arg(long)]
    importance: Option<PathBuf>,
    #[command(flatten)]
    split: SplitArgs,
}

/// A failed command with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl fmt::Display) -> CliError {
    CliError {
        code: 2,
        message: message.to_string(),
    }
}

fn missing(sub: &str, flag: &str, key: Option<(&str, &str)>) -> CliError {
    let mut cmd = Cli::command();
    let rendered = cmd
        .find_subcommand_mut(sub)
        .map(|c| c.render_usage().to_string())
        .unwrap_or_default();
    let hint = key.map_or(String::new(), |(s, k)| {
        format!(" (or `{k}` under [{s}] in the config)")
    });
    usage(format!("missing required `{flag}`{hint}\n\n{rendered}"))
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

struct Ctx {
    config: Config,
    seed: u64,
}

/// Seed precedence: flag, then environment, then config, then default.
pub fn resolve_seed(
    flag: Option<u64>,
    env: Option<&str>,
    config: &Config,
) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(raw) = env {
        return raw
            .trim()
            .parse()
            .map_err(|_| usage(format!("{SEED_ENV}=`{raw}` is not an unsigned integer")));
    }
    Ok(config
        .value("run", "seed")
        .map_err(usage)?
        .unwrap_or(DEFAULT_SEED))
}

impl Ctx {
    fn new(common: &Common) -> Result<Self, CliError> {
        let config = match &common.config {
            Some(path) => {
                Config::load(path).map_err(|e| usage(format!("config {}: {e}", path.display())))?
            }
            None => Config::default(),
        };
        let env = std::env::var(SEED_ENV).ok();
        let seed = resolve_seed(common.seed, env.as_deref(), &config)?;
        Ok(Ctx { config, seed })
    }

    fn value<T: FromStr>(
        &self,
        flag: Option<T>,
        section: &str,
        key: &str,
    ) -> Result<Option<T>, CliError> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.config.value(section, key).map_err(usage),
        }
    }

    fn path(
        &self,
        flag: Option<PathBuf>,
        sub: &str,
        flag_name: &str,
        key: &str,
    ) -> Result<PathBuf, CliError> {
        self.optional_path(flag, key)
            .ok_or_else(|| missing(sub, flag_name, Some(("paths", key))))
    }

    fn optional_path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.config.get("paths", key).map(PathBuf::from))
    }

    fn splits(&self, args: &SplitArgs, data: &LabeledDataset) -> Result<Splits, CliError> {
        let fractions = match &args.split {
            Some(text) => {
                let parts: Vec<f64> = text
                    .split(',')
                    .map(|p| p.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| usage(format!("--split `{text}` is not three numbers")))?;
                let [train, val, test] = parts[..] else {
                    return Err(usage(format!(
                        "--split `{text}` needs exactly three fractions"
                    )));
                };
                SplitFractions::new(train, val, test).map_err(usage)?
            }
            None => {
                let d = SplitFractions::default();
                let f = |k: &str, dflt: f64| -> Result<f64, CliError> {
                    Ok(self
                        .config
                        .value("split", k)
                        .map_err(usage)?
                        .unwrap_or(dflt))
                };
                SplitFractions::new(f("train", d.train)?, f("val", d.val)?, f("test", d.test)?)
                    .map_err(usage)?
            }
        };
        let temporal = args.temporal || self.value(None, "split", "temporal")?.unwrap_or(false);
        let splits = if temporal {
            split_dataset_ordered(data, fractions)?
        } else {
            split_dataset(data, fractions, self.seed)?
        };
        Ok(splits)
    }

    fn model_params(
        &self,
        family: ModelFamily,
        hyper: &HyperArgs,
        n_features: usize,
    ) -> Result<ModelParams, CliError> {
        let mut params = ModelParams::defaults(family, n_features);
        for (key, value) in self.config.section(family.name()) {
            params.set(key, value).map_err(usage)?;
        }
        let flags = [
            ("criterion", &hyper.criterion),
            ("max_depth", &hyper.max_depth),
            ("min_samples_split", &hyper.min_samples_split),
            ("feature_fraction", &hyper.feature_fraction),
            ("trees", &hyper.trees),
            ("stages", &hyper.stages),
            ("learning_rate", &hyper.learning_rate),
            ("leaf_step", &hyper.leaf_step),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                params.set(key, v).map_err(usage)?;
            }
        }
        if hyper.no_bootstrap {
            params.set("bootstrap", "false").map_err(usage)?;
        }
        params.validate().map_err(usage)?;
        Ok(params)
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })
}

fn open(path: &Path) -> Result<std::fs::File, CliError> {
    std::fs::File::open(path).map_err(|e| CliError {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })
}

fn in_file<T>(path: &Path, r: crate::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError {
        code: 1,
        message: format!("{}: {e}", path.display()),
    })
}

fn load_quotes(path: &Path, skip_bad: bool) -> Result<Vec<OptionQuote>, CliError> {
    let file = std::io::BufReader::new(open(path)?);
    if skip_bad {
        let (quotes, skipped) = in_file(path, read_quotes_skipping(file))?;
        for e in &skipped {
            eprintln!("skipped {}: {e}", path.display());
        }
        Ok(quotes)
    } else {
        in_file(path, read_quotes(file))
    }
}

fn load_features(path: &Path) -> Result<LabeledDataset, CliError> {
    in_file(
        path,
        LabeledDataset::read_csv(std::io::BufReader::new(open(path)?)),
    )
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Forecast(a) => cmd_forecast(a),
        Command::Featurize(a) => cmd_featurize(a),
        Command::Train(a) => cmd_train(a),
        Command::Search(a) => cmd_search(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn cmd_synth(a: SynthArgs) -> Result<(), CliError> {
    let ctx = Ctx::new(&a.common)?;
    let out = ctx.path(a.out, "synth", "--out", "quotes")?;
    let options = ctx.value(a.options, "synth", "options")?.unwrap_or(100);
    let days = ctx.value(a.days, "synth", "days")?.unwrap_or(30);
    let signal = ctx
        .value(a.signal, "synth", "signal")?
        .unwrap_or(DEFAULT_SIGNAL);
    if options == 0 || days == 0 {
        return Err(usage("--options and --days must be at least 1"));
    }
    if !(signal >= 0.0 && signal.is_finite()) {
        return Err(usage("--signal must be a nonnegative number"));
    }
    let quotes = synthesize_quotes(options, days, signal, ctx.seed);
    let mut buf = Vec::new();
    write_quotes(&mut buf, &quotes)?;
    write_file(&out, &buf)?;
    println!("wrote {} quotes to {}", quotes.len(), out.display());
    Ok(())
}

fn qrm_config(ctx: &Ctx, a: &ForecastArgs) -> Result<QrmConfig, CliError> {
    let d = QrmConfig::default();
    let method = match ctx.value(a.method.clone(), "qrm", "method")? {
        Some(m) => m.parse().map_err(usage)?,
        None => d.method,
    };
    let config = QrmConfig {
        beta: ctx.value(a.beta, "qrm", "beta")?.unwrap_or(d.beta),
        nx: ctx.value(a.nx, "qrm", "nx")?.unwrap_or(d.nx),
        nt: ctx.value(a.nt, "qrm", "nt")?.unwrap_or(d.nt),
        cg_tol: ctx.value(a.cg_tol, "qrm", "cg_tol")?.unwrap_or(d.cg_tol),
        cg_max_iter: ctx
            .value(a.cg_max_iter, "qrm", "cg_max_iter")?
            .unwrap_or(d.cg_max_iter),
        method,
    };
    if config.nx < 3 || config.nt < 3 || !(config.beta > 0.0) || !(config.cg_tol > 0.0) {
        return Err(usage(
            "qrm settings need nx ≥ 3, nt ≥ 3, beta > 0 and cg_tol > 0",
        ));
    }
    Ok(config)
}

fn cmd_forecast(a: ForecastArgs) -> Result<(), CliError> {
    let ctx = Ctx::new(&a.common)?;
    let quotes_path = ctx.path(a.quotes.clone(), "forecast", "--quotes", "quotes")?;
    let out = ctx.path(a.out.clone(), "forecast", "--out", "forecasts")?;
    let config = qrm_config(&ctx, &a)?;
    let default_jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let jobs = ctx.value(a.jobs, "run", "jobs")?.unwrap_or(default_jobs);
    if jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }

    let quotes = load_quotes(&quotes_path, a.skip_bad)?;
    let windows = build_windows(&quotes);
    let solutions = solve_windows(&windows, &config, jobs)?;
    let mut records = Vec::with_capacity(windows.len());
    for (w, solution) in windows.iter().zip(solutions) {
        match solution {
            Ok(s) => records.push(ForecastRecord::new(w, &s)),
            Err(e) => {
                let msg = format!("window {} ending {}: {e}", w.option_id, w.today().date);
                if a.skip_bad {
                    eprintln!("skipped {msg}");
                } else {
                    return Err(CliError {
                        code: 1,
                        message: msg,
                    });
                }
            }
        }
    }
    let mut buf = Vec::new();
    write_forecasts(&mut buf, &records)?;
    write_file(&out, &buf)?;
    println!("wrote {} forecasts to {}", records.len(), out.display());
    Ok(())
}

fn cmd_featurize(a: FeaturizeArgs) -> Result<(), CliError> {
    let ctx = Ctx::new(&a.common)?;
    let quotes_path = ctx.path(a.quotes, "featurize", "--quotes", "quotes")?;
    let forecasts_path = ctx.path(a.forecasts, "featurize", "--forecasts", "forecasts")?;
    let out = ctx.path(a.out, "featurize", "--out", "features")?;
    let quotes = load_quotes(&quotes_path, a.skip_bad)?;
    let forecasts = in_file(
        &forecasts_path,
        read_forecasts(std::io::BufReader::new(open(&forecasts_path)?)),
    )?;
    let f = featurize(&quotes, &forecasts)?;
    if f.missing_forecasts > 0 {
        eprintln!(
            "{} labeled windows had no forecast and were left out",
            f.missing_forecasts
        );
    }
    let mut buf = Vec::new();
    f.dataset.write_csv(&mut buf)?;
    write_file(&out, &buf)?;
    println!("wrote {} rows to {}", f.dataset.len(), out.display());
    Ok(())
}

fn describe(name: &str, part: &str, cm: &ConfusionMatrix, baseline: Option<f64>) -> String {
    let m = metrics(cm);
    let pct = |v: Option<f64>| v.map_or("NA".to_string(), |x| format!("{:.2}%", 100.0 * x));
    format!(
        "{name}: {part} accuracy {} precision {} recall {} (majority baseline {}, n = {})",
        pct(m.accuracy),
        pct(m.precision),
        pct(m.recall),
        pct(baseline),
        cm.total()
    )
}

fn single_report(name: &str, cm: &ConfusionMatrix) -> Vec<u8> {
    format!("{REPORT_HEADER}\n{}\n", report_row(name, cm)).into_bytes()
}

fn cmd_train(a: TrainArgs) -> Result<(), CliError> {
    let ctx = Ctx::new(&a.common)?;
    let features_path = ctx.path(a.features, "train", "--features", "features")?;
    let out = ctx.path(a.out, "train", "--out", "model")?;
    let report = ctx.optional_path(a.report, "report");
    let family = ModelFamily::from(a.model);
    let data = load_features(&features_path)?;
    let params = ctx.model_params(family, &a.hyper, data.n_features())?;
    let splits = ctx.splits(&a.split, &data)?;
    let model = train_model(&params, &splits.train, ctx.seed)?;
    let cm = evaluate_model(&model, &splits.val)?;
    write_file(&out, model.to_text().as_bytes())?;
    if let Some(path) = report {
        write_file(&path, &single_report(family.name(), &cm))?;
    }
    println!(
        "{}",
        describe(
            family.name(),
            "validation",
            &cm,
            majority_baseline(&splits.val)
        )
    );
    Ok(())
}

fn cmd_search(a: SearchArgs) -> Result<(), CliError> {
    let ctx = Ctx::new(&a.common)?;
    let features_path = ctx.path(a.features, "search", "--features", "features")?;
    let family = ModelFamily::from(a.model);
    let space_text = ctx
        .value(a.space, "search", "space")?
        .ok_or_else(|| missing("search", "--space", Some(("search", "space"))))?;
    let space = SearchSpace::parse(&space_text).map_err(usage)?;
    let random: Option<usize> = ctx.value(a.random, "search", "random")?;
    let data = load_features(&features_path)?;
    let base = ctx.model_params(family, &a.hyper, data.n_features())?;
    let splits = ctx.splits(&a.split, &data)?;
    // hyperparameter names the space cannot apply are usage errors
    if let Some(first) = space.grid().ok().and_then(|g| g.into_iter().next()) {
        first.apply(&base).map_err(usage)?;
    }
    let outcome = match random {
        Some(n) => random_search(&space, n, &splits.train, &splits.val, &base, ctx.seed)?,
        None => grid_search(&space, &splits.train, &splits.val, &base, ctx.seed)?,
    };
    if let Some(path) = ctx.optional_path(a.trace, "trace") {
        let mut buf = Vec::new();
        outcome.write_trace(&mut buf)?;
        write_file(&path, &buf)?;
    }
    let best = outcome.best();
    if let Some(path) = ctx.optional_path(a.out, "model") {
        let model = train_model(&outcome.best_params, &splits.train, ctx.seed)?;
        write_file(&path, model.to_text().as_bytes())?;
    }
    if let Some(path) = ctx.optional_path(a.report, "report") {
        write_file(&path, &single_report(family.name(), &best.confusion))?;
    }
    println!(
        "evaluated {} candidates; best: {}",
        outcome.trials.len(),
        best.params
    );
    println!(
        "{}",
        describe(
            family.name(),
            "validation",
            &best.confusion,
            majority_baseline(&splits.val)
        )
    );
    Ok(())
}

fn pick(splits: Splits, data: LabeledDataset, part: Part) -> LabeledDataset {
    match part {
        Part::Train => splits.train,
        Part::Val => splits.val,
        Part::Test => splits.test,
        Part::All => data,
    }
}

fn part_name(part: Part) -> &'static str {
    match part {
        Part::Train => "train",
        Part::Val => "validation",
        Part::Test => "test",
        Part::All => "full-set",
    }
}

fn load_model(path: &Path) -> Result<TrainedModel, CliError> {
    in_file(path, TrainedModel::load(path))
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let ctx = Ctx::new(&a.common)?;
    let model_path = ctx.path(a.model_file, "evaluate", "--model-file", "model")?;
    let features_path = ctx.path(a.features, "evaluate", "--features", "features")?;
    let model = load_model(&model_path)?;
    let data = load_features(&features_path)?;
    let splits = ctx.splits(&a.split, &data)?;
    let part = pick(splits, data, a.part);
    let cm = evaluate_model(&model, &part)?;
    let name = a.name.unwrap_or_else(|| model.family().to_string());
    let report = single_report(&name, &cm);
    match ctx.optional_path(a.out, "report") {
        Some(path) => {
            write_file(&path, &report)?;
            println!(
                "{}",
                describe(&name, part_name(a.part), &cm, majority_baseline(&part))
            );
        }
        None => print!("{}", String::from_utf8_lossy(&report)),
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<(), CliError> {
    let ctx = Ctx::new(&a.common)?;
    let features_path = ctx.path(a.features, "report", "--features", "features")?;
    let data = load_features(&features_path)?;
    let splits = ctx.splits(&a.split, &data)?;
    let train = splits.train.clone();
    let part = pick(splits, data, a.part);

    let mut table = format!("{REPORT_HEADER}\n");
    let mut importance = String::from("model,feature,score\n");
    for path in &a.model_files {
        let model = load_model(path)?;
        let name = model.family().to_string();
        let cm = evaluate_model(&model, &part)?;
        table.push_str(&report_row(&name, &cm));
        table.push('\n');
        eprintln!(
            "{}",
            describe(&name, part_name(a.part), &cm, majority_baseline(&part))
        );
        let forest = match model {
            TrainedModel::Forest(f) => Some(f),
            TrainedModel::Tree(t) => Some(ForestModel::from_trees(vec![t], false, 1.0)?),
            TrainedModel::Gbm(_) => None,
        };
        if let Some(f) = forest {
            let scores = feature_importance(&f, &train)?;
            for (feature, s) in train.feature_names().iter().zip(&scores.scores) {
                importance.push_str(&format!("{name},{feature},{s:?}\n"));
            }
        }
    }
    match ctx.optional_path(a.out, "report") {
        Some(path) => write_file(&path, table.as_bytes())?,
        None => print!("{table}"),
    }
    if let Some(path) = ctx.optional_path(a.importance, "importance") {
        write_file(&path, importance.as_bytes())?;
    }
    Ok(())
}
