#ifndef MAPDESIGN_H
#define MAPDESIGN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  MD_STATUS_OK = 0,
  MD_STATUS_NULL_POINTER = 1,
  MD_STATUS_INVALID_ARGUMENT = 2,
  MD_STATUS_FILE_NOT_FOUND = 3,
  MD_STATUS_IO = 4,
  MD_STATUS_IMAGE_DECODE = 5,
  MD_STATUS_SCHEMA = 6,
  MD_STATUS_ANALYSIS = 7,
  MD_STATUS_STATS = 8,
  MD_STATUS_MINING = 9,
  MD_STATUS_BUFFER_TOO_SMALL = 10,
  MD_STATUS_PANIC = 11,
} MdStatus;

/**
 * A loaded manifest: valid records plus per-line diagnostics.
 */
typedef struct MdCorpus MdCorpus;

/**
 * Per-map metrics from [`md_corpus_analyze`], sorted by map id.
 */
typedef struct MdMetrics MdMetrics;

/**
 * Flat numeric view of one map's metrics. Color fields are zero when
 * `has_color` is 0.
 */
typedef struct {
  int32_t year;
  /**
   * 0 = Chinese, 1 = English.
   */
  uint32_t language;
  uint32_t element_count;
  /**
   * Bit `i` set when element kind `i` is present, in taxonomy order.
   */
  uint16_t element_bits;
  uint8_t failed;
  uint8_t has_color;
  /**
   * Dominant hue category index (black, gray, white, red, ...).
   */
  uint32_t h_main;
  double s_ave;
  double b_ave;
  double b_con;
  uint32_t n_hue;
  double e_hue;
  double d_hier;
  double r_map;
  double r_horizontal;
  double r_vertical;
  double b_horizontal;
  double b_vertical;
} MdMapSummary;

typedef struct {
  uint32_t h_main;
  double s_ave;
  double b_ave;
  double b_con;
  uint32_t n_hue;
  double e_hue;
  /**
   * Pixel counts per hue category, in category order.
   */
  uint64_t counts[10];
  uint64_t pixel_count;
} MdColorProfile;

typedef struct {
  double u_statistic;
  double p_value;
  size_t n1;
  size_t n2;
  /**
   * 1 when the exact null distribution was used.
   */
  uint8_t exact;
} MdTestResult;

typedef struct {
  double rho;
  double p_value;
  size_t n;
  /**
   * 1 when the p-value comes from full permutation enumeration.
   */
  uint8_t exact;
} MdCorrelation;

typedef struct {
  /**
   * Bit `i` is element kind `i` in taxonomy order.
   */
  uint16_t items;
  uint64_t support_count;
  double support;
} MdItemset;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread; empty after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *md_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *md_version(void);

/**
 * Load a JSON-Lines manifest. Bad lines become diagnostics, not errors.
 *
 * # Safety
 * `manifest_path` must be a NUL-terminated string; `out` must be writable.
 */
MdStatus md_corpus_load(const char *manifest_path,
                        int32_t year_min,
                        int32_t year_max,
                        MdCorpus **out);

/**
 * # Safety
 * `corpus` must come from [`md_corpus_load`] or be null.
 */
size_t md_corpus_record_count(const MdCorpus *corpus);

/**
 * # Safety
 * `corpus` must come from [`md_corpus_load`] or be null.
 */
size_t md_corpus_diagnostic_count(const MdCorpus *corpus);

/**
 * Analyze every record with default thresholds on `workers` threads.
 *
 * # Safety
 * `corpus` must come from [`md_corpus_load`]; `out` must be writable.
 */
MdStatus md_corpus_analyze(const MdCorpus *corpus, size_t workers, MdMetrics **out);

/**
 * # Safety
 * `corpus` must come from [`md_corpus_load`] and not be used afterwards.
 */
void md_corpus_free(MdCorpus *corpus);

/**
 * # Safety
 * `metrics` must come from [`md_corpus_analyze`] or be null.
 */
size_t md_metrics_count(const MdMetrics *metrics);

/**
 * # Safety
 * `metrics` must come from [`md_corpus_analyze`]; `out` must be writable.
 */
MdStatus md_metrics_get(const MdMetrics *metrics, size_t index, MdMapSummary *out);

/**
 * Copy the map id at `index` into `buf` (NUL-terminated). `required`
 * receives the needed size including the terminator; a short buffer yields
 * `BufferTooSmall`.
 *
 * # Safety
 * `buf` must hold `capacity` bytes (or be null with capacity 0); `required`
 * may be null.
 */
MdStatus md_metrics_map_id(const MdMetrics *metrics,
                           size_t index,
                           char *buf,
                           size_t capacity,
                           size_t *required);

/**
 * Write the metrics as JSON Lines, same format as the command-line tool.
 *
 * # Safety
 * `metrics` must come from [`md_corpus_analyze`]; `path` must be a
 * NUL-terminated string.
 */
MdStatus md_metrics_write_jsonl(const MdMetrics *metrics, const char *path);

/**
 * # Safety
 * `metrics` must come from [`md_corpus_analyze`] and not be used afterwards.
 */
void md_metrics_free(MdMetrics *metrics);

/**
 * Color profile of an interleaved RGB raster under a mask with default
 * thresholds. `alpha` may be null; a zero alpha drops the pixel.
 *
 * # Safety
 * `rgb` must hold `3 * width * height` bytes; `mask` and non-null `alpha`
 * must hold `width * height` bytes.
 */
MdStatus md_color_profile(const uint8_t *rgb,
                          const uint8_t *alpha,
                          const uint8_t *mask,
                          uint32_t width,
                          uint32_t height,
                          MdColorProfile *out);

/**
 * Keep only the largest 8-connected component of `mask` (nonzero bytes are
 * foreground), writing 0/1 bytes to `out_mask`.
 *
 * # Safety
 * `mask` and `out_mask` must each hold `width * height` bytes.
 */
MdStatus md_refine_mask(const uint8_t *mask, uint32_t width, uint32_t height, uint8_t *out_mask);

/**
 * Two-sided Mann-Whitney U test with default settings.
 *
 * # Safety
 * `x` and `y` must hold `nx` and `ny` doubles.
 */
MdStatus md_mann_whitney_u(const double *x,
                           size_t nx,
                           const double *y,
                           size_t ny,
                           MdTestResult *out);

/**
 * Spearman rank correlation with a two-sided p-value.
 *
 * # Safety
 * `x` and `y` must each hold `n` doubles.
 */
MdStatus md_spearman(const double *x, const double *y, size_t n, MdCorrelation *out);

/**
 * Frequent itemsets over per-map element bitmasks. `out_len` receives the
 * number of itemsets; when it exceeds `capacity` nothing is written and
 * `BufferTooSmall` is returned.
 *
 * # Safety
 * `transactions` must hold `n` values; `out` must hold `capacity` items
 * (or be null with capacity 0); `out_len` must be writable.
 */
MdStatus md_apriori(const uint16_t *transactions,
                    size_t n,
                    double min_support,
                    MdItemset *out,
                    size_t capacity,
                    size_t *out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAPDESIGN_H */
