//! C ABI over the `mapdesign` core.
//!
//! Every function returns an [`MdStatus`]. On failure a human-readable
//! message is available from [`md_last_error_message`] on the same thread.
//! Handles are opaque and must be released with their `_free` function.
//! Buffers passed in are borrowed for the duration of the call only.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use mapdesign::color::{color_profile, ColorConfig};
use mapdesign::cooccur::{apriori, ItemSet, Transaction};
use mapdesign::mask::refine_main_mask;
use mapdesign::model::BinaryMask;
use mapdesign::pipeline::{analyze_corpus, load_manifest, AnalysisConfig, Language, Manifest, ManifestOptions, MapMetrics};
use mapdesign::raster::RgbRaster;
use mapdesign::stats::{mann_whitney_u, spearman, CorrelationMethod, StatsConfig, TestMethod};
use mapdesign::{AnalysisError, MiningError, PipelineError, StatsError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    FileNotFound = 3,
    Io = 4,
    ImageDecode = 5,
    Schema = 6,
    Analysis = 7,
    Stats = 8,
    Mining = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn fail(status: MdStatus, message: impl Into<String>) -> MdStatus {
    set_error(message);
    status
}

/// Message for the last failing call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn md_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn md_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

fn guarded(body: impl FnOnce() -> Result<(), (MdStatus, String)>) -> MdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            MdStatus::Ok
        }
        Ok(Err((status, message))) => fail(status, message),
        Err(_) => fail(MdStatus::Panic, "internal panic"),
    }
}

type Outcome = Result<(), (MdStatus, String)>;

fn null(what: &str) -> (MdStatus, String) {
    (MdStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: impl Into<String>) -> (MdStatus, String) {
    (MdStatus::InvalidArgument, message.into())
}

fn from_pipeline(e: PipelineError) -> (MdStatus, String) {
    let status = match &e {
        PipelineError::FileNotFound(_) => MdStatus::FileNotFound,
        PipelineError::Io { .. } => MdStatus::Io,
        PipelineError::ImageDecode { .. } => MdStatus::ImageDecode,
        PipelineError::SchemaViolation { .. } => MdStatus::Schema,
        PipelineError::Stats(_) => MdStatus::Stats,
        PipelineError::Mining(_) => MdStatus::Mining,
        _ => MdStatus::Analysis,
    };
    (status, e.to_string())
}

fn from_analysis(e: AnalysisError) -> (MdStatus, String) {
    (MdStatus::Analysis, e.to_string())
}

fn from_stats(e: StatsError) -> (MdStatus, String) {
    (MdStatus::Stats, e.to_string())
}

fn from_mining(e: MiningError) -> (MdStatus, String) {
    (MdStatus::Mining, e.to_string())
}

unsafe fn path_arg<'a>(p: *const c_char, what: &str) -> Result<&'a Path, (MdStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))?;
    Ok(Path::new(s))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (MdStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Outcome {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn pixel_count(width: u32, height: u32) -> Result<usize, (MdStatus, String)> {
    if width == 0 || height == 0 {
        return Err(invalid("width and height must be positive"));
    }
    Ok(width as usize * height as usize)
}

unsafe fn mask_arg(mask: *const u8, width: u32, height: u32) -> Result<BinaryMask, (MdStatus, String)> {
    let bits = slice_arg(mask, pixel_count(width, height)?, "mask")?;
    Ok(BinaryMask::from_bits(width, height, bits.iter().map(|&b| b != 0).collect()).expect("sized above"))
}

// ------------------------------------------------------------------ corpus

/// A loaded manifest: valid records plus per-line diagnostics.
pub struct MdCorpus {
    manifest: Manifest,
}

/// Per-map metrics from [`md_corpus_analyze`], sorted by map id.
pub struct MdMetrics {
    metrics: Vec<MapMetrics>,
}

/// Load a JSON-Lines manifest. Bad lines become diagnostics, not errors.
///
/// # Safety
/// `manifest_path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn md_corpus_load(
    manifest_path: *const c_char,
    year_min: i32,
    year_max: i32,
    out: *mut *mut MdCorpus,
) -> MdStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        if year_min > year_max {
            return Err(invalid("year_min exceeds year_max"));
        }
        let path = path_arg(manifest_path, "manifest_path")?;
        let manifest = load_manifest(path, &ManifestOptions { year_min, year_max }).map_err(from_pipeline)?;
        out.write(Box::into_raw(Box::new(MdCorpus { manifest })));
        Ok(())
    })
}

/// # Safety
/// `corpus` must come from [`md_corpus_load`] or be null.
#[no_mangle]
pub unsafe extern "C" fn md_corpus_record_count(corpus: *const MdCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.manifest.records.len())
}

/// # Safety
/// `corpus` must come from [`md_corpus_load`] or be null.
#[no_mangle]
pub unsafe extern "C" fn md_corpus_diagnostic_count(corpus: *const MdCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.manifest.diagnostics.len())
}

/// Analyze every record with default thresholds on `workers` threads.
///
/// # Safety
/// `corpus` must come from [`md_corpus_load`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn md_corpus_analyze(corpus: *const MdCorpus, workers: usize, out: *mut *mut MdMetrics) -> MdStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        out.write(ptr::null_mut());
        let corpus = corpus.as_ref().ok_or_else(|| null("corpus"))?;
        if workers == 0 {
            return Err(invalid("workers must be at least 1"));
        }
        let metrics = analyze_corpus(&corpus.manifest.records, &AnalysisConfig::default(), workers);
        out.write(Box::into_raw(Box::new(MdMetrics { metrics })));
        Ok(())
    })
}

/// # Safety
/// `corpus` must come from [`md_corpus_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn md_corpus_free(corpus: *mut MdCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Flat numeric view of one map's metrics. Color fields are zero when
/// `has_color` is 0.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MdMapSummary {
    pub year: i32,
    /// 0 = Chinese, 1 = English.
    pub language: u32,
    pub element_count: u32,
    /// Bit `i` set when element kind `i` is present, in taxonomy order.
    pub element_bits: u16,
    pub failed: u8,
    pub has_color: u8,
    /// Dominant hue category index (black, gray, white, red, ...).
    pub h_main: u32,
    pub s_ave: f64,
    pub b_ave: f64,
    pub b_con: f64,
    pub n_hue: u32,
    pub e_hue: f64,
    pub d_hier: f64,
    pub r_map: f64,
    pub r_horizontal: f64,
    pub r_vertical: f64,
    pub b_horizontal: f64,
    pub b_vertical: f64,
}

/// # Safety
/// `metrics` must come from [`md_corpus_analyze`] or be null.
#[no_mangle]
pub unsafe extern "C" fn md_metrics_count(metrics: *const MdMetrics) -> usize {
    metrics.as_ref().map_or(0, |m| m.metrics.len())
}

/// # Safety
/// `metrics` must come from [`md_corpus_analyze`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn md_metrics_get(metrics: *const MdMetrics, index: usize, out: *mut MdMapSummary) -> MdStatus {
    guarded(|| {
        let metrics = metrics.as_ref().ok_or_else(|| null("metrics"))?;
        let m = metrics
            .metrics
            .get(index)
            .ok_or_else(|| invalid(format!("index {index} out of range ({})", metrics.metrics.len())))?;
        let mut s = MdMapSummary {
            year: m.year,
            language: match m.language {
                Language::Zh => 0,
                Language::En => 1,
            },
            element_count: m.element_count as u32,
            element_bits: m.element_presence.kinds().collect::<ItemSet>().bits(),
            failed: u8::from(m.is_failed()),
            d_hier: m.layout.d_hier,
            r_map: m.layout.r_map,
            r_horizontal: m.layout.alignment.r_horizontal,
            r_vertical: m.layout.alignment.r_vertical,
            b_horizontal: m.layout.balance.b_horizontal,
            b_vertical: m.layout.balance.b_vertical,
            ..MdMapSummary::default()
        };
        if let Some(c) = &m.color {
            s.has_color = 1;
            s.h_main = c.h_main.index() as u32;
            s.s_ave = c.s_ave;
            s.b_ave = c.b_ave;
            s.b_con = c.b_con;
            s.n_hue = c.n_hue;
            s.e_hue = c.e_hue;
        }
        write_out(out, s, "out")
    })
}

/// Copy the map id at `index` into `buf` (NUL-terminated). `required`
/// receives the needed size including the terminator; a short buffer yields
/// `BufferTooSmall`.
///
/// # Safety
/// `buf` must hold `capacity` bytes (or be null with capacity 0); `required`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn md_metrics_map_id(
    metrics: *const MdMetrics,
    index: usize,
    buf: *mut c_char,
    capacity: usize,
    required: *mut usize,
) -> MdStatus {
    guarded(|| {
        let metrics = metrics.as_ref().ok_or_else(|| null("metrics"))?;
        let m = metrics.metrics.get(index).ok_or_else(|| invalid(format!("index {index} out of range")))?;
        let bytes = m.map_id.as_bytes();
        if !required.is_null() {
            required.write(bytes.len() + 1);
        }
        if capacity < bytes.len() + 1 {
            return Err((MdStatus::BufferTooSmall, format!("need {} bytes", bytes.len() + 1)));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, bytes.len());
        buf.add(bytes.len()).write(0);
        Ok(())
    })
}

/// Write the metrics as JSON Lines, same format as the command-line tool.
///
/// # Safety
/// `metrics` must come from [`md_corpus_analyze`]; `path` must be a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn md_metrics_write_jsonl(metrics: *const MdMetrics, path: *const c_char) -> MdStatus {
    guarded(|| {
        let metrics = metrics.as_ref().ok_or_else(|| null("metrics"))?;
        let path = path_arg(path, "path")?;
        let text = mapdesign::report::metrics_jsonl(&metrics.metrics);
        mapdesign::report::write_atomic(path, text.as_bytes()).map_err(from_pipeline)
    })
}

/// # Safety
/// `metrics` must come from [`md_corpus_analyze`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn md_metrics_free(metrics: *mut MdMetrics) {
    if !metrics.is_null() {
        drop(Box::from_raw(metrics));
    }
}

// ------------------------------------------------------------------ direct

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MdColorProfile {
    pub h_main: u32,
    pub s_ave: f64,
    pub b_ave: f64,
    pub b_con: f64,
    pub n_hue: u32,
    pub e_hue: f64,
    /// Pixel counts per hue category, in category order.
    pub counts: [u64; 10],
    pub pixel_count: u64,
}

/// Color profile of an interleaved RGB raster under a mask with default
/// thresholds. `alpha` may be null; a zero alpha drops the pixel.
///
/// # Safety
/// `rgb` must hold `3 * width * height` bytes; `mask` and non-null `alpha`
/// must hold `width * height` bytes.
#[no_mangle]
pub unsafe extern "C" fn md_color_profile(
    rgb: *const u8,
    alpha: *const u8,
    mask: *const u8,
    width: u32,
    height: u32,
    out: *mut MdColorProfile,
) -> MdStatus {
    guarded(|| {
        let n = pixel_count(width, height)?;
        let bytes = slice_arg(rgb, 3 * n, "rgb")?;
        let pixels = bytes.chunks_exact(3).map(|p| [p[0], p[1], p[2]]).collect();
        let mut image = RgbRaster::new(width, height, pixels).expect("sized above");
        if !alpha.is_null() {
            image = image.with_alpha(slice::from_raw_parts(alpha, n).to_vec()).expect("sized above");
        }
        let region = mask_arg(mask, width, height)?;
        let p = color_profile(&image, &region, &ColorConfig::default()).map_err(from_analysis)?;
        let profile = MdColorProfile {
            h_main: p.h_main.index() as u32,
            s_ave: p.s_ave,
            b_ave: p.b_ave,
            b_con: p.b_con,
            n_hue: p.n_hue,
            e_hue: p.e_hue,
            counts: p.histogram.counts,
            pixel_count: p.histogram.pixel_count,
        };
        write_out(out, profile, "out")
    })
}

/// Keep only the largest 8-connected component of `mask` (nonzero bytes are
/// foreground), writing 0/1 bytes to `out_mask`.
///
/// # Safety
/// `mask` and `out_mask` must each hold `width * height` bytes.
#[no_mangle]
pub unsafe extern "C" fn md_refine_mask(mask: *const u8, width: u32, height: u32, out_mask: *mut u8) -> MdStatus {
    guarded(|| {
        let m = mask_arg(mask, width, height)?;
        if out_mask.is_null() {
            return Err(null("out_mask"));
        }
        let refined = refine_main_mask(&m).map_err(from_analysis)?;
        let out = slice::from_raw_parts_mut(out_mask, refined.bits().len());
        for (o, &b) in out.iter_mut().zip(refined.bits()) {
            *o = u8::from(b);
        }
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MdTestResult {
    pub u_statistic: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
    /// 1 when the exact null distribution was used.
    pub exact: u8,
}

/// Two-sided Mann-Whitney U test with default settings.
///
/// # Safety
/// `x` and `y` must hold `nx` and `ny` doubles.
#[no_mangle]
pub unsafe extern "C" fn md_mann_whitney_u(
    x: *const f64,
    nx: usize,
    y: *const f64,
    ny: usize,
    out: *mut MdTestResult,
) -> MdStatus {
    guarded(|| {
        let (x, y) = (slice_arg(x, nx, "x")?, slice_arg(y, ny, "y")?);
        let r = mann_whitney_u(x, y, &StatsConfig::default()).map_err(from_stats)?;
        let result = MdTestResult {
            u_statistic: r.u_statistic,
            p_value: r.p_value,
            n1: r.n1,
            n2: r.n2,
            exact: u8::from(r.method == TestMethod::Exact),
        };
        write_out(out, result, "out")
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MdCorrelation {
    pub rho: f64,
    pub p_value: f64,
    pub n: usize,
    /// 1 when the p-value comes from full permutation enumeration.
    pub exact: u8,
}

/// Spearman rank correlation with a two-sided p-value.
///
/// # Safety
/// `x` and `y` must each hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn md_spearman(x: *const f64, y: *const f64, n: usize, out: *mut MdCorrelation) -> MdStatus {
    guarded(|| {
        let (x, y) = (slice_arg(x, n, "x")?, slice_arg(y, n, "y")?);
        let r = spearman(x, y, &StatsConfig::default()).map_err(from_stats)?;
        let result = MdCorrelation {
            rho: r.rho,
            p_value: r.p_value,
            n: r.n,
            exact: u8::from(r.method == CorrelationMethod::ExactPermutation),
        };
        write_out(out, result, "out")
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MdItemset {
    /// Bit `i` is element kind `i` in taxonomy order.
    pub items: u16,
    pub support_count: u64,
    pub support: f64,
}

/// Frequent itemsets over per-map element bitmasks. `out_len` receives the
/// number of itemsets; when it exceeds `capacity` nothing is written and
/// `BufferTooSmall` is returned.
///
/// # Safety
/// `transactions` must hold `n` values; `out` must hold `capacity` items
/// (or be null with capacity 0); `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn md_apriori(
    transactions: *const u16,
    n: usize,
    min_support: f64,
    out: *mut MdItemset,
    capacity: usize,
    out_len: *mut usize,
) -> MdStatus {
    guarded(|| {
        if out_len.is_null() {
            return Err(null("out_len"));
        }
        let ts: Vec<Transaction> = slice_arg(transactions, n, "transactions")?
            .iter()
            .map(|&bits| Transaction { items: ItemSet::from_bits(bits) })
            .collect();
        let sets = apriori(&ts, min_support).map_err(from_mining)?;
        out_len.write(sets.len());
        if sets.len() > capacity {
            return Err((MdStatus::BufferTooSmall, format!("need room for {} itemsets", sets.len())));
        }
        if sets.is_empty() {
            return Ok(());
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let dst = slice::from_raw_parts_mut(out, sets.len());
        for (d, s) in dst.iter_mut().zip(&sets) {
            *d = MdItemset { items: s.items.bits(), support_count: s.support_count, support: s.support };
        }
        Ok(())
    })
}
