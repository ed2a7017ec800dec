//! Command-line surface. Exit codes: 0 success, 1 diagnostics under
//! `--strict` or a runtime failure, 2 usage errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::color::{ColorConfig, HueBounds, HueThresholds};
use crate::cooccur::{apriori, top_itemsets, FrequentItemset, Transaction};
use crate::error::{PipelineError, StatsError};
use crate::layout::{BalanceWeight, LayoutConfig, SightLines};
use crate::pipeline::{
    aggregate, analyze_corpus, attach_article_counts, cross_group_compare, indicator_values, load_manifest, yearly_trend,
    AnalysisConfig, ArticleCounts, Diagnostic, GroupBy, Indicator, Language, Manifest, ManifestOptions, MapMetrics,
    Severity, TrendUnit,
};
use crate::report::{self, CompareOutcome, ItemsetGroup, SummaryFormat};
use crate::stats::StatsConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mapdesign", version, about = "Color, layout and element analytics for thematic-map corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a manifest and report per-line diagnostics.
    Validate(CommonArgs),
    /// Compute per-map color and layout metrics.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
    },
    /// Group metrics by language, year and/or journal.
    Aggregate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        /// Comma-separated subset of language,year,journal.
        #[arg(long, default_value = "")]
        group_by: String,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        /// CSV of journal,year,articles for map-to-article ratios.
        #[arg(long)]
        articles: Option<PathBuf>,
    },
    /// Mann-Whitney U tests between Chinese and English maps.
    Compare {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[command(flatten)]
        stats: StatsArgs,
        /// Indicator to test; repeat for several. Defaults to all.
        #[arg(long = "indicator")]
        indicators: Vec<String>,
    },
    /// Spearman trend tests of indicators against publication year.
    Trend {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        analysis: AnalysisArgs,
        #[command(flatten)]
        stats: StatsArgs,
        #[arg(long = "indicator")]
        indicators: Vec<String>,
        /// Restrict to one language; by default each language is tested.
        #[arg(long)]
        language: Option<String>,
        /// Correlate per-map values instead of annual means.
        #[arg(long)]
        per_map: bool,
    },
    /// Frequent element combinations (Apriori).
    Cooccur {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 0.05)]
        min_support: f64,
        /// Keep only the N most supported itemsets of each size.
        #[arg(long)]
        top: Option<usize>,
    },
    /// Print the tool version.
    Version,
}

#[derive(Debug, Args, Serialize)]
struct CommonArgs {
    /// JSON-Lines manifest.
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, env = "MAPDESIGN_OUT", default_value = "mapdesign-out")]
    out: PathBuf,
    /// Treat any manifest diagnostic as fatal (exit 1).
    #[arg(long)]
    strict: bool,
    #[arg(long, env = "MAPDESIGN_WORKERS", default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 1990)]
    year_min: i32,
    #[arg(long, default_value_t = 2020)]
    year_max: i32,
}

#[derive(Debug, Args, Serialize)]
struct InputArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Use a metrics.jsonl from a previous `analyze` instead of recomputing.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct AnalysisArgs {
    #[arg(long, default_value_t = 0.15)]
    black_value: f64,
    #[arg(long, default_value_t = 0.10)]
    neutral_saturation: f64,
    #[arg(long, default_value_t = 0.85)]
    white_value: f64,
    /// Seven ascending hue boundaries in degrees: red|orange|yellow|green|cyan|blue|purple ends.
    #[arg(long, value_delimiter = ',', num_args = 7, default_values_t = [15.0, 45.0, 70.0, 165.0, 200.0, 255.0, 345.0])]
    hue_bounds: Vec<f64>,
    #[arg(long, default_value_t = 0.05)]
    presence_threshold: f64,
    #[arg(long, default_value_t = 0)]
    erosion_radius: u32,
    /// Alignment tolerance in normalized page units.
    #[arg(long, default_value_t = 0.01)]
    tolerance: f64,
    #[arg(long, value_enum, default_value_t = SightLinesArg::EdgesAndCenter)]
    sight_lines: SightLinesArg,
    #[arg(long, value_enum, default_value_t = WeightArg::Moment)]
    balance_weight: WeightArg,
}

#[derive(Debug, Args, Serialize)]
struct StatsArgs {
    #[arg(long, default_value_t = 10_000)]
    mwu_exact_max_product: usize,
    #[arg(long, default_value_t = 8)]
    spearman_exact_max_n: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FormatArg {
    Csv,
    Long,
    Jsonl,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SightLinesArg {
    EdgesAndCenter,
    EdgesOnly,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum WeightArg {
    Moment,
    Area,
}

/// Fully resolved and range-checked settings of one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub out_dir: PathBuf,
    pub strict: bool,
    pub workers: usize,
    pub manifest_options: ManifestOptions,
    pub analysis: AnalysisConfig,
    pub stats: StatsConfig,
    pub min_support: f64,
}

impl RunConfig {
    fn new(common: &CommonArgs) -> Self {
        Self {
            manifest: common.manifest.clone(),
            out_dir: common.out.clone(),
            strict: common.strict,
            workers: common.workers,
            manifest_options: ManifestOptions { year_min: common.year_min, year_max: common.year_max },
            analysis: AnalysisConfig::default(),
            stats: StatsConfig::default(),
            min_support: 0.05,
        }
    }

    fn with_analysis(mut self, a: &AnalysisArgs) -> Self {
        let b = &a.hue_bounds;
        self.analysis = AnalysisConfig {
            color: ColorConfig {
                thresholds: HueThresholds {
                    black_value: a.black_value,
                    neutral_saturation: a.neutral_saturation,
                    white_value: a.white_value,
                    bounds: HueBounds {
                        red_end: b[0],
                        orange_end: b[1],
                        yellow_end: b[2],
                        green_end: b[3],
                        cyan_end: b[4],
                        blue_end: b[5],
                        purple_end: b[6],
                    },
                },
                presence_threshold: a.presence_threshold,
                erosion_radius: a.erosion_radius,
            },
            layout: LayoutConfig {
                tolerance: a.tolerance,
                sight_lines: match a.sight_lines {
                    SightLinesArg::EdgesAndCenter => SightLines::EdgesAndCenter,
                    SightLinesArg::EdgesOnly => SightLines::EdgesOnly,
                },
                balance_weight: match a.balance_weight {
                    WeightArg::Moment => BalanceWeight::Moment,
                    WeightArg::Area => BalanceWeight::Area,
                },
            },
        };
        self
    }

    fn with_stats(mut self, s: &StatsArgs) -> Self {
        self.stats = StatsConfig {
            mwu_exact_max_product: s.mwu_exact_max_product,
            spearman_exact_max_n: s.spearman_exact_max_n,
        };
        self
    }

    /// Range checks on every knob.
    pub fn validate(&self) -> Result<(), String> {
        let color = &self.analysis.color;
        if !color.thresholds.is_valid() {
            return Err("hue thresholds must lie in [0, 1] with black <= white, and hue bounds must ascend within [0, 360]".into());
        }
        if !(color.presence_threshold > 0.0 && color.presence_threshold <= 1.0) {
            return Err(format!("--presence-threshold {} outside (0, 1]", color.presence_threshold));
        }
        let tol = self.analysis.layout.tolerance;
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(format!("--tolerance {tol} must be positive"));
        }
        if self.workers == 0 || self.workers > 1024 {
            return Err(format!("--workers {} outside 1..=1024", self.workers));
        }
        if self.manifest_options.year_min > self.manifest_options.year_max {
            return Err("--year-min exceeds --year-max".into());
        }
        if !(self.min_support > 0.0 && self.min_support <= 1.0) {
            return Err(format!("--min-support {} outside (0, 1]", self.min_support));
        }
        if self.stats.spearman_exact_max_n > 10 {
            return Err("--spearman-exact-max-n above 10 is impractical".into());
        }
        Ok(())
    }
}

#[derive(Debug, Default, Serialize)]
struct RunCounts {
    records: usize,
    diagnostics: usize,
    errors: usize,
    warnings: usize,
    analyzed: usize,
    failures: usize,
}

#[derive(Debug, Serialize)]
struct FailureRow<'a> {
    map_id: &'a str,
    message: &'a str,
}

#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    command: &'a str,
    version: &'a str,
    status: &'a str,
    config: &'a RunConfig,
    /// Command-specific options such as grouping or the trend unit.
    options: &'a serde_json::Value,
    counts: RunCounts,
    failures: Vec<FailureRow<'a>>,
    outputs: Vec<String>,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::FileNotFound(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

/// Parse `argv` (including the program name) and run the command.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("usage: mapdesign <validate|analyze|aggregate|compare|trend|cooccur|version> --manifest <FILE> [--out <DIR>] [options]");
            EXIT_USAGE
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_DIAGNOSTICS
        }
    }
}

struct Session {
    command: &'static str,
    config: RunConfig,
    manifest: Manifest,
    options: serde_json::Value,
    outputs: Vec<String>,
}

impl Session {
    fn open(command: &'static str, config: RunConfig) -> Result<Self, Failure> {
        config.validate().map_err(Failure::Usage)?;
        let manifest = load_manifest(&config.manifest, &config.manifest_options)?;
        Ok(Self { command, config, manifest, options: serde_json::json!({}), outputs: Vec::new() })
    }

    fn blocked_by_strict(&self) -> bool {
        self.config.strict && !self.manifest.diagnostics.is_empty()
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), Failure> {
        report::write_atomic(&self.config.out_dir.join(name), bytes)?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn write_diagnostics(&mut self) -> Result<(), Failure> {
        let text = report::to_jsonl::<Diagnostic>(&self.manifest.diagnostics);
        self.write("diagnostics.jsonl", text.as_bytes())
    }

    /// Write `<command>_summary.json` and pick the exit code.
    fn finish(mut self, metrics: Option<&[MapMetrics]>) -> Result<i32, Failure> {
        let blocked = self.blocked_by_strict();
        let diags = &self.manifest.diagnostics;
        let counts = RunCounts {
            records: self.manifest.records.len(),
            diagnostics: diags.len(),
            errors: diags.iter().filter(|d| d.severity == Severity::Error).count(),
            warnings: diags.iter().filter(|d| d.severity == Severity::Warning).count(),
            analyzed: metrics.map_or(0, <[MapMetrics]>::len),
            failures: metrics.map_or(0, |ms| ms.iter().filter(|m| m.is_failed()).count()),
        };
        let failures = metrics
            .unwrap_or_default()
            .iter()
            .filter_map(|m| m.failure.as_deref().map(|msg| FailureRow { map_id: &m.map_id, message: msg }))
            .collect();
        let name = format!("{}_summary.json", self.command);
        let mut outputs = self.outputs.clone();
        outputs.push(name.clone());
        let summary = RunSummary {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            status: if blocked { "blocked-by-strict" } else { "ok" },
            config: &self.config,
            options: &self.options,
            counts,
            failures,
            outputs,
        };
        let text = report::to_pretty_json(&summary);
        self.write(&name, text.as_bytes())?;
        if blocked {
            eprintln!(
                "{} manifest diagnostic(s) under --strict; see {}",
                self.manifest.diagnostics.len(),
                self.config.out_dir.join("diagnostics.jsonl").display()
            );
            Ok(EXIT_DIAGNOSTICS)
        } else {
            Ok(EXIT_OK)
        }
    }

    fn metrics(&self, from_file: Option<&Path>) -> Result<Vec<MapMetrics>, Failure> {
        match from_file {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|_| Failure::Usage(format!("cannot read metrics file {}", path.display())))?;
                Ok(report::parse_metrics_jsonl(&text)?)
            }
            None => Ok(analyze_corpus(&self.manifest.records, &self.config.analysis, self.config.workers)),
        }
    }
}

fn parse_indicators(names: &[String], default: &[Indicator]) -> Result<Vec<Indicator>, Failure> {
    if names.is_empty() {
        return Ok(default.to_vec());
    }
    names.iter().map(|n| n.parse().map_err(Failure::Usage)).collect()
}

fn dispatch(command: Command) -> Result<i32, Failure> {
    match command {
        Command::Version => {
            println!("mapdesign {}", env!("CARGO_PKG_VERSION"));
            Ok(EXIT_OK)
        }
        Command::Validate(common) => {
            let mut s = Session::open("validate", RunConfig::new(&common))?;
            s.write_diagnostics()?;
            for d in &s.manifest.diagnostics {
                eprintln!("line {}: {:?}: {}", d.line, d.severity, d.message);
            }
            println!("{} valid record(s), {} diagnostic(s)", s.manifest.records.len(), s.manifest.diagnostics.len());
            s.finish(None)
        }
        Command::Analyze { common, analysis } => {
            let mut s = Session::open("analyze", RunConfig::new(&common).with_analysis(&analysis))?;
            s.write_diagnostics()?;
            if s.blocked_by_strict() {
                return s.finish(None);
            }
            let metrics = s.metrics(None)?;
            s.write("metrics.jsonl", report::metrics_jsonl(&metrics).as_bytes())?;
            let failures: Vec<FailureRow> = metrics
                .iter()
                .filter_map(|m| m.failure.as_deref().map(|msg| FailureRow { map_id: &m.map_id, message: msg }))
                .collect();
            s.write("failures.jsonl", report::to_jsonl(&failures).as_bytes())?;
            println!("analyzed {} map(s), {} failure(s)", metrics.len(), failures.len());
            s.finish(Some(&metrics))
        }
        Command::Aggregate { input, analysis, group_by, format, articles } => {
            let group_by: GroupBy = group_by.parse().map_err(Failure::Usage)?;
            let mut s = Session::open("aggregate", RunConfig::new(&input.common).with_analysis(&analysis))?;
            s.options = serde_json::json!({
                "group_by": group_by.to_string(),
                "format": format,
                "articles": articles,
                "metrics": input.metrics,
            });
            if s.blocked_by_strict() {
                s.write_diagnostics()?;
                return s.finish(None);
            }
            let metrics = s.metrics(input.metrics.as_deref())?;
            let mut summaries = aggregate(&metrics, group_by)?;
            if let Some(path) = &articles {
                attach_article_counts(&mut summaries, &ArticleCounts::load(path)?);
            }
            let (name, fmt) = match format {
                FormatArg::Csv => ("aggregate.csv", SummaryFormat::Wide),
                FormatArg::Long => ("aggregate_long.csv", SummaryFormat::Long),
                FormatArg::Jsonl => ("aggregate.jsonl", SummaryFormat::Jsonl),
            };
            s.write(name, &report::emit_summaries(&summaries, fmt))?;
            s.finish(Some(&metrics))
        }
        Command::Compare { input, analysis, stats, indicators } => {
            let indicators = parse_indicators(&indicators, &Indicator::COMPARED)?;
            let mut s = Session::open("compare", RunConfig::new(&input.common).with_analysis(&analysis).with_stats(&stats))?;
            s.options = serde_json::json!({
                "indicators": indicators.iter().map(|i| i.name()).collect::<Vec<_>>(),
                "metrics": input.metrics,
            });
            if s.blocked_by_strict() {
                s.write_diagnostics()?;
                return s.finish(None);
            }
            let metrics = s.metrics(input.metrics.as_deref())?;
            let rows: Vec<(String, CompareOutcome)> = indicators
                .iter()
                .map(|&ind| {
                    let n1 = indicator_values(metrics.iter().filter(|m| m.language == Language::Zh), ind).len();
                    let n2 = indicator_values(metrics.iter().filter(|m| m.language == Language::En), ind).len();
                    let outcome = match cross_group_compare(&metrics, ind, &s.config.stats) {
                        Ok(t) => CompareOutcome::Tested(t),
                        Err(PipelineError::Stats(e @ StatsError::DegenerateSample { .. })) => {
                            CompareOutcome::Skipped { n1, n2, p_value: Some(1.0), reason: e.to_string() }
                        }
                        Err(e) => CompareOutcome::Skipped { n1, n2, p_value: None, reason: e.to_string() },
                    };
                    (ind.name(), outcome)
                })
                .collect();
            s.write("compare.csv", &report::compare_csv(&rows))?;
            s.finish(Some(&metrics))
        }
        Command::Trend { input, analysis, stats, indicators, language, per_map } => {
            let indicators = parse_indicators(&indicators, &Indicator::COMPARED)?;
            let languages: Vec<Language> = match language.as_deref() {
                Some(l) => vec![l.parse().map_err(Failure::Usage)?],
                None => vec![Language::Zh, Language::En],
            };
            let unit = if per_map { TrendUnit::PerMap } else { TrendUnit::AnnualMeans };
            let mut s = Session::open("trend", RunConfig::new(&input.common).with_analysis(&analysis).with_stats(&stats))?;
            s.options = serde_json::json!({
                "indicators": indicators.iter().map(|i| i.name()).collect::<Vec<_>>(),
                "languages": languages.iter().map(|l| l.as_str()).collect::<Vec<_>>(),
                "unit": if per_map { "per-map" } else { "annual-means" },
                "metrics": input.metrics,
            });
            if s.blocked_by_strict() {
                s.write_diagnostics()?;
                return s.finish(None);
            }
            let metrics = s.metrics(input.metrics.as_deref())?;
            let mut rows = Vec::new();
            for &lang in &languages {
                for &ind in &indicators {
                    let outcome = yearly_trend(&metrics, ind, Some(lang), unit, &s.config.stats).map_err(|e| e.to_string());
                    rows.push((lang.to_string(), ind.name(), outcome));
                }
            }
            s.write("trend.csv", &report::trend_csv(&rows))?;
            s.finish(Some(&metrics))
        }
        Command::Cooccur { common, min_support, top } => {
            let mut config = RunConfig::new(&common);
            config.min_support = min_support;
            let mut s = Session::open("cooccur", config)?;
            s.options = serde_json::json!({ "top": top });
            if s.blocked_by_strict() {
                s.write_diagnostics()?;
                return s.finish(None);
            }
            let records = &s.manifest.records;
            let mut groups: Vec<(&str, Vec<Transaction>)> = vec![("all", records.iter().map(to_transaction).collect())];
            for lang in [Language::Zh, Language::En] {
                let ts: Vec<Transaction> = records.iter().filter(|r| r.language == lang).map(to_transaction).collect();
                if !ts.is_empty() {
                    groups.push((lang.as_str(), ts));
                }
            }
            let mut mined: Vec<(&str, &[Transaction], Vec<FrequentItemset>)> = Vec::new();
            for (label, ts) in &groups {
                if ts.is_empty() {
                    continue;
                }
                let mut sets = apriori(ts, min_support).map_err(|e| Failure::Runtime(e.to_string()))?;
                if let Some(limit) = top {
                    let max_size = sets.iter().map(|x| x.items.len()).max().unwrap_or(0);
                    sets = (1..=max_size).flat_map(|k| top_itemsets(&sets, k, limit)).collect();
                }
                mined.push((label, ts, sets));
            }
            let view: Vec<ItemsetGroup> = mined
                .iter()
                .map(|(label, ts, sets)| ItemsetGroup { label, transactions: ts, itemsets: sets })
                .collect();
            let bytes = report::itemsets_csv(&view);
            s.write("cooccur.csv", &bytes)?;
            s.finish(None)
        }
    }
}

fn to_transaction(record: &crate::pipeline::MapRecord) -> Transaction {
    Transaction::new(record.elements.iter().map(|e| e.kind))
}
