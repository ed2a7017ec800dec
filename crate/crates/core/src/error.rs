use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("degenerate page geometry {width_px}x{height_px}")]
    DegeneratePage { width_px: u32, height_px: u32 },
    #[error("unknown element kind {0:?}")]
    UnknownElementKind(String),
    #[error("invalid oriented box: {0}")]
    InvalidBox(String),
    #[error("mask has {actual} cells, expected {expected}")]
    MaskLength { expected: usize, actual: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("mask has no foreground pixel")]
    EmptyMask,
    #[error("dimension mismatch: image {image:?}, mask {mask:?}")]
    DimensionMismatch { image: (u32, u32), mask: (u32, u32) },
    #[error("page area is zero")]
    DegeneratePage,
    #[error("invalid area: map {a_map} on page {a_page}")]
    InvalidArea { a_map: f64, a_page: f64 },
    #[error("record has {0} main map elements, expected exactly one")]
    MainMapCount(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("samples have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("all pooled values are identical (n1={n1}, n2={n2}); p = 1 by convention")]
    DegenerateSample { n1: usize, n2: usize },
    #[error("input has zero rank variance; correlation undefined")]
    ConstantInput,
    #[error("non-finite value in sample")]
    NonFinite,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MiningError {
    #[error("min_support {0} outside (0, 1]")]
    InvalidThreshold(f64),
    #[error("no transactions")]
    NoTransactions,
    #[error("denominator itemset has zero support")]
    ZeroDenominator,
    #[error("denominator is not a subset of the numerator")]
    NotSubset,
    #[error("itemset {0} is not among the frequent itemsets")]
    NotFrequent(String),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot decode image {path}: {message}")]
    ImageDecode { path: PathBuf, message: String },
    #[error("line {line}: {message}")]
    SchemaViolation { line: usize, message: String },
    #[error("no metrics to aggregate")]
    NoMetrics,
    #[error("group {0} has no values for this indicator")]
    EmptyGroup(String),
    #[error("need at least 3 distinct years, found {0}")]
    InsufficientYears(usize),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Mining(#[from] MiningError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
