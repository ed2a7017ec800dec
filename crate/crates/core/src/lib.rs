//! Quantitative design analytics for annotated thematic-map corpora.
//!
//! The library turns a manifest of map images, main-map masks and element
//! boxes into per-map color and layout metrics, then aggregates them, tests
//! cross-language differences and yearly trends, and mines frequent element
//! combinations.

pub mod cli;
pub mod color;
pub mod cooccur;
pub mod error;
pub mod layout;
pub mod mask;
pub mod model;
pub mod pipeline;
pub mod raster;
pub mod report;
pub mod stats;

pub use color::{color_profile, ColorConfig, ColorProfile, HueCategory, HueHistogram, HueThresholds};
pub use cooccur::{apriori, conditional_rate, top_itemsets, FrequentItemset, ItemSet, Transaction};
pub use error::{AnalysisError, MiningError, ModelError, PipelineError, StatsError};
pub use layout::{layout_profile, LayoutConfig, LayoutProfile};
pub use mask::{label_components, refine_main_mask, Connectivity};
pub use model::{BinaryMask, ElementKind, MapElement, OrientedBox, PageGeometry};
pub use pipeline::{analyze_corpus, analyze_map, load_manifest, AnalysisConfig, Indicator, MapMetrics, MapRecord};
pub use raster::RgbRaster;
pub use stats::{mann_whitney_u, spearman, CorrelationResult, StatsConfig, TestResult};
