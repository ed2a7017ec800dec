//! Corpus ingestion, per-map metrics and corpus-level aggregation.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::color::{color_profile, ColorConfig, ColorProfile};
use crate::error::{AnalysisError, PipelineError};
use crate::layout::{layout_profile, LayoutConfig, LayoutProfile};
use crate::mask::refine_main_mask;
use crate::model::{BinaryMask, ElementKind, MapElement, PageGeometry, PAGE_SLACK};
use crate::raster::{load_mask, probe_page, RgbRaster};
use crate::stats::{mann_whitney_u, spearman, CorrelationResult, StatsConfig, TestResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Zh,
    En,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::Zh => "zh",
            Language::En => "en",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zh" => Ok(Language::Zh),
            "en" => Ok(Language::En),
            other => Err(format!("unknown language {other:?} (expected zh or en)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapRecord {
    pub map_id: String,
    pub image_path: PathBuf,
    pub mask_path: Option<PathBuf>,
    pub language: Language,
    pub journal: String,
    pub year: i32,
    pub elements: Vec<MapElement>,
    /// Explicit page size from the manifest, else the image header when it
    /// could be read at load time.
    pub page: Option<PageGeometry>,
}

impl MapRecord {
    pub fn main_map(&self) -> &MapElement {
        self.elements
            .iter()
            .find(|e| e.kind == ElementKind::MainMap)
            .expect("records are validated to hold one main map")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: usize,
    pub map_id: Option<String>,
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub records: Vec<MapRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestOptions {
    pub year_min: i32,
    pub year_max: i32,
}

impl Default for ManifestOptions {
    fn default() -> Self {
        Self { year_min: 1990, year_max: 2020 }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPage {
    width_px: u32,
    height_px: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    map_id: String,
    image_path: String,
    #[serde(default)]
    mask_path: Option<String>,
    language: Language,
    journal: String,
    year: i32,
    elements: Vec<MapElement>,
    #[serde(default)]
    page: Option<RawPage>,
}

/// Parse a JSON-Lines manifest. Relative paths resolve against the
/// manifest's directory. Bad lines become diagnostics; they never abort the
/// load.
pub fn load_manifest(path: &Path, options: &ManifestOptions) -> Result<Manifest, PipelineError> {
    if !path.is_file() {
        return Err(PipelineError::FileNotFound(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })?;
    let base = path.parent().unwrap_or(Path::new("."));
    Ok(parse_manifest(&text, base, options))
}

pub fn parse_manifest(text: &str, base: &Path, options: &ManifestOptions) -> Manifest {
    let mut manifest = Manifest::default();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut diag = |map_id: Option<&str>, severity, message: String| {
            manifest.diagnostics.push(Diagnostic {
                line: line_no,
                map_id: map_id.map(str::to_string),
                severity,
                message,
            })
        };
        let raw: RawRecord = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => {
                diag(None, Severity::Error, format!("schema violation: {e}"));
                continue;
            }
        };
        let id = raw.map_id.as_str();
        if id.is_empty() {
            diag(None, Severity::Error, "empty map_id".into());
            continue;
        }
        let mains = raw.elements.iter().filter(|e| e.kind == ElementKind::MainMap).count();
        if mains != 1 {
            let msg = if mains == 0 { "no main map".to_string() } else { format!("multiple main maps ({mains})") };
            diag(Some(id), Severity::Error, msg);
            continue;
        }
        if !(options.year_min..=options.year_max).contains(&raw.year) {
            diag(
                Some(id),
                Severity::Error,
                format!("year {} outside {}..={}", raw.year, options.year_min, options.year_max),
            );
            continue;
        }
        if !seen.insert(raw.map_id.clone()) {
            diag(Some(id), Severity::Error, "duplicate map_id".into());
            continue;
        }
        let image_path = base.join(&raw.image_path);
        let page = match raw.page {
            Some(p) => match PageGeometry::new(p.width_px, p.height_px) {
                Ok(page) => Some(page),
                Err(e) => {
                    diag(Some(id), Severity::Error, e.to_string());
                    continue;
                }
            },
            None => probe_page(&image_path).ok(),
        };
        let check_page = page.unwrap_or_else(PageGeometry::unit);
        let mut rejected = false;
        for (k, element) in raw.elements.iter().enumerate() {
            let overshoot = element.bbox.page_overshoot(check_page);
            if overshoot > PAGE_SLACK + 1e-12 {
                diag(
                    Some(id),
                    Severity::Error,
                    format!("element {k} ({}) extends {overshoot:.4} beyond the page", element.kind),
                );
                rejected = true;
            } else if overshoot > 0.0 {
                diag(
                    Some(id),
                    Severity::Warning,
                    format!("element {k} ({}) overshoots the page by {overshoot:.4}", element.kind),
                );
            }
        }
        if rejected {
            continue;
        }
        manifest.records.push(MapRecord {
            map_id: raw.map_id,
            image_path,
            mask_path: raw.mask_path.map(|p| base.join(p)),
            language: raw.language,
            journal: raw.journal,
            year: raw.year,
            elements: raw.elements,
            page,
        });
    }
    manifest
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub color: ColorConfig,
    pub layout: LayoutConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MaskSource {
    Mask,
    /// The main map's oriented box stood in for a missing or unusable mask.
    ObbFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ElementPresence(pub [bool; 10]);

impl ElementPresence {
    pub fn from_elements(elements: &[MapElement]) -> Self {
        let mut present = [false; 10];
        for e in elements {
            present[e.kind.index()] = true;
        }
        Self(present)
    }

    pub fn contains(&self, kind: ElementKind) -> bool {
        self.0[kind.index()]
    }

    pub fn kinds(&self) -> impl Iterator<Item = ElementKind> + '_ {
        ElementKind::ALL.into_iter().filter(|&k| self.contains(k))
    }
}

impl Serialize for ElementPresence {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(10))?;
        for kind in ElementKind::ALL {
            map.serialize_entry(kind.as_str(), &self.contains(kind))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for ElementPresence {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw: BTreeMap<ElementKind, bool> = BTreeMap::deserialize(deserializer)?;
        let mut present = [false; 10];
        for (kind, value) in raw {
            present[kind.index()] = value;
        }
        Ok(Self(present))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapMetrics {
    pub map_id: String,
    pub language: Language,
    pub journal: String,
    pub year: i32,
    pub page: PageGeometry,
    pub element_count: usize,
    pub element_presence: ElementPresence,
    pub mask_source: MaskSource,
    pub color: Option<ColorProfile>,
    pub layout: LayoutProfile,
    /// Set when any stage failed; such rows are excluded from indicator
    /// statistics.
    pub failure: Option<String>,
}

impl MapMetrics {
    pub fn is_failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Error text with paths cut to their file name, so failure entries do not
/// depend on where the corpus lives.
fn portable_message(e: &PipelineError) -> String {
    let name = |p: &Path| p.file_name().map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned());
    match e {
        PipelineError::FileNotFound(p) => format!("file not found: {}", name(p)),
        PipelineError::ImageDecode { path, message } => format!("cannot decode {}: {message}", name(path)),
        PipelineError::Io { path, source } => format!("i/o error on {}: {source}", name(path)),
        other => other.to_string(),
    }
}

/// Color and layout for one record. Unreadable pixels never block the
/// layout indicators; they only leave `color` empty and set `failure`.
pub fn analyze_map(record: &MapRecord, config: &AnalysisConfig) -> MapMetrics {
    let mut failures: Vec<String> = Vec::new();
    let image = RgbRaster::load(&record.image_path)
        .map_err(|e| failures.push(format!("image: {}", portable_message(&e))))
        .ok();
    let page = record
        .page
        .or_else(|| image.as_ref().map(RgbRaster::page))
        .unwrap_or_else(PageGeometry::unit);

    let refined: Option<BinaryMask> = record.mask_path.as_ref().and_then(|path| {
        let result = load_mask(path).and_then(|mask| {
            let expected = image.as_ref().map_or(page, RgbRaster::page);
            if (mask.width(), mask.height()) != (expected.width_px(), expected.height_px()) {
                return Err(AnalysisError::DimensionMismatch {
                    image: (expected.width_px(), expected.height_px()),
                    mask: (mask.width(), mask.height()),
                }
                .into());
            }
            Ok(refine_main_mask(&mask)?)
        });
        result.map_err(|e| failures.push(format!("mask: {}", portable_message(&e)))).ok()
    });
    let mask_source = if refined.is_some() { MaskSource::Mask } else { MaskSource::ObbFallback };

    let color = image.as_ref().and_then(|img| {
        let region = refined.clone().unwrap_or_else(|| BinaryMask::from_box(&record.main_map().bbox, img.page()));
        color_profile(img, &region, &config.color)
            .map_err(|e| failures.push(format!("color: {e}")))
            .ok()
    });

    let layout = layout_profile(&record.elements, page, refined.as_ref(), &config.layout)
        .or_else(|e| {
            failures.push(format!("layout: {e}"));
            layout_profile(&record.elements, page, None, &config.layout)
        })
        .expect("validated records always have one main map");

    MapMetrics {
        map_id: record.map_id.clone(),
        language: record.language,
        journal: record.journal.clone(),
        year: record.year,
        page,
        element_count: record.elements.len(),
        element_presence: ElementPresence::from_elements(&record.elements),
        mask_source,
        color,
        layout,
        failure: (!failures.is_empty()).then(|| failures.join("; ")),
    }
}

/// Analyze every record on a pool of `workers` threads. The output is sorted
/// by `map_id` whatever the scheduling.
pub fn analyze_corpus(records: &[MapRecord], config: &AnalysisConfig, workers: usize) -> Vec<MapMetrics> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    let mut metrics: Vec<MapMetrics> = pool.install(|| records.par_iter().map(|r| analyze_map(r, config)).collect());
    metrics.sort_by(|a, b| a.map_id.cmp(&b.map_id));
    metrics
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Indicator {
    ElementCount,
    SAve,
    BAve,
    BCon,
    NHue,
    EHue,
    /// 1 when the dominant hue is chromatic, else 0.
    ChromaticDominant,
    DHier,
    RMap,
    RHorizontal,
    RVertical,
    BHorizontal,
    BVertical,
    Presence(ElementKind),
}

impl Indicator {
    /// Indicators summarized per group (presence has its own columns).
    pub const SUMMARY: [Indicator; 13] = [
        Indicator::ElementCount,
        Indicator::SAve,
        Indicator::BAve,
        Indicator::BCon,
        Indicator::NHue,
        Indicator::EHue,
        Indicator::ChromaticDominant,
        Indicator::DHier,
        Indicator::RMap,
        Indicator::RHorizontal,
        Indicator::RVertical,
        Indicator::BHorizontal,
        Indicator::BVertical,
    ];

    /// Indicators compared across languages by default.
    pub const COMPARED: [Indicator; 12] = [
        Indicator::ElementCount,
        Indicator::SAve,
        Indicator::BAve,
        Indicator::BCon,
        Indicator::NHue,
        Indicator::EHue,
        Indicator::DHier,
        Indicator::RMap,
        Indicator::RHorizontal,
        Indicator::RVertical,
        Indicator::BHorizontal,
        Indicator::BVertical,
    ];

    pub fn name(self) -> String {
        match self {
            Indicator::ElementCount => "element_count".into(),
            Indicator::SAve => "s_ave".into(),
            Indicator::BAve => "b_ave".into(),
            Indicator::BCon => "b_con".into(),
            Indicator::NHue => "n_hue".into(),
            Indicator::EHue => "e_hue".into(),
            Indicator::ChromaticDominant => "chromatic_dominant".into(),
            Indicator::DHier => "d_hier".into(),
            Indicator::RMap => "r_map".into(),
            Indicator::RHorizontal => "r_horizontal".into(),
            Indicator::RVertical => "r_vertical".into(),
            Indicator::BHorizontal => "b_horizontal".into(),
            Indicator::BVertical => "b_vertical".into(),
            Indicator::Presence(kind) => format!("presence_{kind}"),
        }
    }

    pub fn value(self, m: &MapMetrics) -> Option<f64> {
        let color = m.color.as_ref();
        let layout = &m.layout;
        match self {
            Indicator::ElementCount => Some(m.element_count as f64),
            Indicator::SAve => color.map(|c| c.s_ave),
            Indicator::BAve => color.map(|c| c.b_ave),
            Indicator::BCon => color.map(|c| c.b_con),
            Indicator::NHue => color.map(|c| c.n_hue as f64),
            Indicator::EHue => color.map(|c| c.e_hue),
            Indicator::ChromaticDominant => color.map(|c| if c.h_main.is_chromatic() { 1.0 } else { 0.0 }),
            Indicator::DHier => Some(layout.d_hier),
            Indicator::RMap => Some(layout.r_map),
            Indicator::RHorizontal => Some(layout.alignment.r_horizontal),
            Indicator::RVertical => Some(layout.alignment.r_vertical),
            Indicator::BHorizontal => Some(layout.balance.b_horizontal),
            Indicator::BVertical => Some(layout.balance.b_vertical),
            Indicator::Presence(kind) => Some(if m.element_presence.contains(kind) { 1.0 } else { 0.0 }),
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Indicator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(kind) = s.strip_prefix("presence_") {
            return kind.parse().map(Indicator::Presence).map_err(|e| e.to_string());
        }
        Indicator::SUMMARY
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| format!("unknown indicator {s:?}"))
    }
}

/// Values of non-failed rows that define the indicator.
pub fn indicator_values<'a>(metrics: impl IntoIterator<Item = &'a MapMetrics>, indicator: Indicator) -> Vec<f64> {
    metrics
        .into_iter()
        .filter(|m| !m.is_failed())
        .filter_map(|m| indicator.value(m))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroupBy {
    pub language: bool,
    pub year: bool,
    pub journal: bool,
}

impl fmt::Display for GroupBy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = [(self.language, "language"), (self.year, "year"), (self.journal, "journal")]
            .into_iter()
            .filter_map(|(on, name)| on.then_some(name))
            .collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for GroupBy {
    type Err = String;

    /// Comma-separated subset of `language,year,journal`; empty for none.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut g = GroupBy::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "language" => g.language = true,
                "year" => g.year = true,
                "journal" => g.journal = true,
                other => return Err(format!("unknown grouping field {other:?}")),
            }
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupKey {
    pub language: Option<Language>,
    pub year: Option<i32>,
    pub journal: Option<String>,
}

impl GroupKey {
    fn of(m: &MapMetrics, by: GroupBy) -> Self {
        Self {
            language: by.language.then_some(m.language),
            year: by.year.then_some(m.year),
            journal: by.journal.then(|| m.journal.clone()),
        }
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lang = self.language.map_or("*".to_string(), |l| l.to_string());
        let year = self.year.map_or("*".to_string(), |y| y.to_string());
        let journal = self.journal.as_deref().unwrap_or("*");
        write!(f, "{lang}/{year}/{journal}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorSummary {
    pub indicator: String,
    pub n: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub q1: Option<f64>,
    pub q3: Option<f64>,
}

impl IndicatorSummary {
    pub fn from_values(indicator: Indicator, mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        let n = values.len();
        let mean = (n > 0).then(|| values.iter().sum::<f64>() / n as f64);
        Self {
            indicator: indicator.name(),
            n,
            mean,
            median: quantile(&values, 0.5),
            q1: quantile(&values, 0.25),
            q3: quantile(&values, 0.75),
        }
    }
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> Option<f64> {
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    Some(sorted[lo] + (sorted[hi] - sorted[lo]) * frac)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub key: GroupKey,
    /// All rows in the group, failed ones included.
    pub count: usize,
    pub failed: usize,
    pub indicators: Vec<IndicatorSummary>,
    /// Share of rows holding each element kind, in `ElementKind::ALL` order.
    pub presence: [f64; 10],
    /// Maps per article, when article counts were supplied.
    pub map_to_article_ratio: Option<f64>,
}

pub fn aggregate(metrics: &[MapMetrics], group_by: GroupBy) -> Result<Vec<GroupSummary>, PipelineError> {
    if metrics.is_empty() {
        return Err(PipelineError::NoMetrics);
    }
    let mut groups: BTreeMap<GroupKey, Vec<&MapMetrics>> = BTreeMap::new();
    for m in metrics {
        groups.entry(GroupKey::of(m, group_by)).or_default().push(m);
    }
    Ok(groups
        .into_iter()
        .map(|(key, rows)| {
            let count = rows.len();
            let indicators = Indicator::SUMMARY
                .iter()
                .map(|&ind| IndicatorSummary::from_values(ind, indicator_values(rows.iter().copied(), ind)))
                .collect();
            let presence = ElementKind::ALL.map(|k| {
                rows.iter().filter(|m| m.element_presence.contains(k)).count() as f64 / count as f64
            });
            GroupSummary {
                key,
                count,
                failed: rows.iter().filter(|m| m.is_failed()).count(),
                indicators,
                presence,
                map_to_article_ratio: None,
            }
        })
        .collect())
}

/// Article counts per journal and year, for map-to-article ratios.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArticleCounts {
    rows: Vec<(String, i32, u64)>,
}

impl ArticleCounts {
    pub fn new(rows: Vec<(String, i32, u64)>) -> Self {
        Self { rows }
    }

    /// Read a `journal,year,articles` CSV with a header row.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        if !path.is_file() {
            return Err(PipelineError::FileNotFound(path.to_path_buf()));
        }
        let mut reader = csv::Reader::from_path(path).map_err(|e| PipelineError::SchemaViolation {
            line: 0,
            message: e.to_string(),
        })?;
        let mut rows = Vec::new();
        for (i, record) in reader.deserialize::<(String, i32, u64)>().enumerate() {
            let row = record.map_err(|e| PipelineError::SchemaViolation { line: i + 2, message: e.to_string() })?;
            rows.push(row);
        }
        Ok(Self { rows })
    }

    /// Articles matching a group key; unset key fields match everything.
    pub fn total_for(&self, key: &GroupKey) -> u64 {
        self.rows
            .iter()
            .filter(|(j, y, _)| key.journal.as_ref().is_none_or(|kj| kj == j) && key.year.is_none_or(|ky| ky == *y))
            .map(|(_, _, n)| n)
            .sum()
    }
}

/// Fill `map_to_article_ratio` on every summary that matches some articles.
/// Language is not a dimension of the article table, so language-split
/// groups see the article totals of the whole journal-year.
pub fn attach_article_counts(summaries: &mut [GroupSummary], counts: &ArticleCounts) {
    for s in summaries {
        let articles = counts.total_for(&s.key);
        s.map_to_article_ratio = (articles > 0).then(|| s.count as f64 / articles as f64);
    }
}

/// Mann-Whitney U between Chinese (`x`) and English (`y`) maps.
pub fn cross_group_compare(metrics: &[MapMetrics], indicator: Indicator, config: &StatsConfig) -> Result<TestResult, PipelineError> {
    let zh = indicator_values(metrics.iter().filter(|m| m.language == Language::Zh), indicator);
    let en = indicator_values(metrics.iter().filter(|m| m.language == Language::En), indicator);
    if zh.is_empty() {
        return Err(PipelineError::EmptyGroup("zh".into()));
    }
    if en.is_empty() {
        return Err(PipelineError::EmptyGroup("en".into()));
    }
    Ok(mann_whitney_u(&zh, &en, config)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendUnit {
    /// Correlate year with the annual mean of the indicator.
    #[default]
    AnnualMeans,
    /// Correlate year with every map's value.
    PerMap,
}

/// `(year, value)` pairs entering the trend test, in year order.
pub fn trend_points(metrics: &[MapMetrics], indicator: Indicator, language: Option<Language>, unit: TrendUnit) -> Vec<(f64, f64)> {
    let rows = metrics
        .iter()
        .filter(|m| language.is_none_or(|l| m.language == l) && !m.is_failed());
    let mut by_year: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for m in rows {
        if let Some(v) = indicator.value(m) {
            by_year.entry(m.year).or_default().push(v);
        }
    }
    match unit {
        TrendUnit::AnnualMeans => by_year
            .into_iter()
            .map(|(y, vs)| (y as f64, vs.iter().sum::<f64>() / vs.len() as f64))
            .collect(),
        TrendUnit::PerMap => by_year
            .into_iter()
            .flat_map(|(y, vs)| vs.into_iter().map(move |v| (y as f64, v)))
            .collect(),
    }
}

pub fn yearly_trend(
    metrics: &[MapMetrics],
    indicator: Indicator,
    language: Option<Language>,
    unit: TrendUnit,
    config: &StatsConfig,
) -> Result<CorrelationResult, PipelineError> {
    let points = trend_points(metrics, indicator, language, unit);
    let years: BTreeSet<i64> = points.iter().map(|p| p.0 as i64).collect();
    if years.len() < 3 {
        return Err(PipelineError::InsufficientYears(years.len()));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = points.into_iter().unzip();
    Ok(spearman(&x, &y, config)?)
}
