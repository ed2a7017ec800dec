//! Color tone and color complexity of the main map: dominant hue, mean
//! saturation and brightness, brightness contrast, hue count and hue entropy.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::mask;
use crate::model::BinaryMask;
use crate::raster::RgbRaster;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HueCategory {
    Black,
    Gray,
    White,
    Red,
    Orange,
    Yellow,
    Green,
    Cyan,
    Blue,
    Purple,
}

impl HueCategory {
    pub const ALL: [HueCategory; 10] = [
        HueCategory::Black,
        HueCategory::Gray,
        HueCategory::White,
        HueCategory::Red,
        HueCategory::Orange,
        HueCategory::Yellow,
        HueCategory::Green,
        HueCategory::Cyan,
        HueCategory::Blue,
        HueCategory::Purple,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_chromatic(self) -> bool {
        !matches!(self, HueCategory::Black | HueCategory::Gray | HueCategory::White)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HueCategory::Black => "black",
            HueCategory::Gray => "gray",
            HueCategory::White => "white",
            HueCategory::Red => "red",
            HueCategory::Orange => "orange",
            HueCategory::Yellow => "yellow",
            HueCategory::Green => "green",
            HueCategory::Cyan => "cyan",
            HueCategory::Blue => "blue",
            HueCategory::Purple => "purple",
        }
    }
}

impl fmt::Display for HueCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Upper (exclusive) hue boundaries in degrees. Red wraps around 0°:
/// `[purple_end, 360) ∪ [0, red_end)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HueBounds {
    pub red_end: f64,
    pub orange_end: f64,
    pub yellow_end: f64,
    pub green_end: f64,
    pub cyan_end: f64,
    pub blue_end: f64,
    pub purple_end: f64,
}

impl Default for HueBounds {
    fn default() -> Self {
        Self {
            red_end: 15.0,
            orange_end: 45.0,
            yellow_end: 70.0,
            green_end: 165.0,
            cyan_end: 200.0,
            blue_end: 255.0,
            purple_end: 345.0,
        }
    }
}

impl HueBounds {
    fn as_array(&self) -> [f64; 7] {
        [
            self.red_end,
            self.orange_end,
            self.yellow_end,
            self.green_end,
            self.cyan_end,
            self.blue_end,
            self.purple_end,
        ]
    }

    pub fn is_valid(&self) -> bool {
        let b = self.as_array();
        b[0] >= 0.0 && b[6] <= 360.0 && b.windows(2).all(|w| w[0] < w[1])
    }
}

/// Achromatic cut-offs and hue bins used by [`classify_hue`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HueThresholds {
    /// Below this value a pixel is black.
    pub black_value: f64,
    /// Below this saturation a pixel is neutral (gray or white).
    pub neutral_saturation: f64,
    /// Neutral pixels at or above this value are white.
    pub white_value: f64,
    pub bounds: HueBounds,
}

impl Default for HueThresholds {
    fn default() -> Self {
        Self {
            black_value: 0.15,
            neutral_saturation: 0.10,
            white_value: 0.85,
            bounds: HueBounds::default(),
        }
    }
}

impl HueThresholds {
    pub fn is_valid(&self) -> bool {
        let unit = 0.0..=1.0;
        unit.contains(&self.black_value)
            && unit.contains(&self.neutral_saturation)
            && unit.contains(&self.white_value)
            && self.black_value <= self.white_value
            && self.bounds.is_valid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColorConfig {
    pub thresholds: HueThresholds,
    /// Minimum pixel share for a category to count as a used hue.
    pub presence_threshold: f64,
    /// Mask erosion applied before sampling, in pixels.
    pub erosion_radius: u32,
}

impl Default for ColorConfig {
    fn default() -> Self {
        Self {
            thresholds: HueThresholds::default(),
            presence_threshold: 0.05,
            erosion_radius: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    /// Degrees in `[0, 360)`; 0 when the color has no saturation.
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

/// Hexcone RGB to HSV.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> Hsv {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let v = max as f64 / 255.0;
    if max == min {
        return Hsv { h: 0.0, s: 0.0, v };
    }
    let delta = i32::from(max - min);
    let s = delta as f64 / max as f64;
    let (r, g, b) = (i32::from(r), i32::from(g), i32::from(b));
    // One rounding from an integer numerator: exact whenever the true hue is
    // representable, so bin boundaries classify correctly.
    let numerator = if max as i32 == r {
        60 * (g - b) + if g < b { 360 * delta } else { 0 }
    } else if max as i32 == g {
        60 * (b - r) + 120 * delta
    } else {
        60 * (r - g) + 240 * delta
    };
    Hsv { h: numerator as f64 / delta as f64, s, v }
}

pub fn classify_hue(h: f64, s: f64, v: f64, t: &HueThresholds) -> HueCategory {
    if v < t.black_value {
        return HueCategory::Black;
    }
    if s < t.neutral_saturation {
        return if v >= t.white_value { HueCategory::White } else { HueCategory::Gray };
    }
    let b = &t.bounds;
    if h < b.red_end || h >= b.purple_end {
        HueCategory::Red
    } else if h < b.orange_end {
        HueCategory::Orange
    } else if h < b.yellow_end {
        HueCategory::Yellow
    } else if h < b.green_end {
        HueCategory::Green
    } else if h < b.cyan_end {
        HueCategory::Cyan
    } else if h < b.blue_end {
        HueCategory::Blue
    } else {
        HueCategory::Purple
    }
}

/// Per-category pixel counts over the sampled region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HueHistogram {
    pub counts: [u64; 10],
    pub pixel_count: u64,
}

impl HueHistogram {
    pub fn from_counts(counts: [u64; 10]) -> Self {
        Self { counts, pixel_count: counts.iter().sum() }
    }

    pub fn add(&mut self, category: HueCategory) {
        self.counts[category.index()] += 1;
        self.pixel_count += 1;
    }

    /// Exact merge of two partial histograms.
    pub fn merge(&self, other: &HueHistogram) -> HueHistogram {
        let mut counts = self.counts;
        for (c, o) in counts.iter_mut().zip(other.counts) {
            *c += o;
        }
        HueHistogram { counts, pixel_count: self.pixel_count + other.pixel_count }
    }

    pub fn proportion(&self, category: HueCategory) -> f64 {
        if self.pixel_count == 0 {
            return 0.0;
        }
        self.counts[category.index()] as f64 / self.pixel_count as f64
    }

    pub fn proportions(&self) -> [f64; 10] {
        HueCategory::ALL.map(|c| self.proportion(c))
    }

    /// Largest category; ties go to the earlier category.
    pub fn dominant(&self) -> HueCategory {
        let mut best = HueCategory::Black;
        for c in HueCategory::ALL {
            if self.counts[c.index()] > self.counts[best.index()] {
                best = c;
            }
        }
        best
    }
}

/// `(n_hue, e_hue)`: the number of categories whose share reaches
/// `presence_threshold`, and the base-2 entropy of those categories after
/// renormalizing their shares to sum to one.
pub fn hue_complexity(hist: &HueHistogram, presence_threshold: f64) -> (u32, f64) {
    if hist.pixel_count == 0 {
        return (0, 0.0);
    }
    let kept: Vec<u64> = hist
        .counts
        .iter()
        .copied()
        .filter(|&c| c > 0 && c as f64 / hist.pixel_count as f64 >= presence_threshold)
        .collect();
    let n = kept.len() as u32;
    if n <= 1 {
        return (n, 0.0);
    }
    let max_entropy = (n as f64).log2();
    if kept.iter().all(|&c| c == kept[0]) {
        return (n, max_entropy);
    }
    let total: u64 = kept.iter().sum();
    let entropy: f64 = kept
        .iter()
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum();
    (n, entropy.clamp(0.0, max_entropy))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColorProfile {
    pub h_main: HueCategory,
    pub s_ave: f64,
    pub b_ave: f64,
    pub b_con: f64,
    pub n_hue: u32,
    pub e_hue: f64,
    pub histogram: HueHistogram,
}

/// The pixels actually sampled: the mask, eroded if configured, with fully
/// transparent pixels removed.
pub fn sampling_mask(image: &RgbRaster, region: &BinaryMask, config: &ColorConfig) -> Result<BinaryMask, AnalysisError> {
    if image.width() != region.width() || image.height() != region.height() {
        return Err(AnalysisError::DimensionMismatch {
            image: (image.width(), image.height()),
            mask: (region.width(), region.height()),
        });
    }
    let mut sampled = mask::erode(region, config.erosion_radius);
    if let Some(alpha) = image.alpha() {
        let opaque = BinaryMask::from_bits(image.width(), image.height(), alpha.iter().map(|&a| a > 0).collect())
            .expect("alpha matches raster");
        sampled = mask::intersect(&sampled, &opaque)?;
    }
    if sampled.is_empty() {
        return Err(AnalysisError::EmptyMask);
    }
    Ok(sampled)
}

pub fn hue_histogram(image: &RgbRaster, region: &BinaryMask, config: &ColorConfig) -> Result<HueHistogram, AnalysisError> {
    let sampled = sampling_mask(image, region, config)?;
    let mut hist = HueHistogram::default();
    for (px, _) in image.pixels().iter().zip(sampled.bits()).filter(|(_, &m)| m) {
        let hsv = rgb_to_hsv(px[0], px[1], px[2]);
        hist.add(classify_hue(hsv.h, hsv.s, hsv.v, &config.thresholds));
    }
    Ok(hist)
}

pub fn color_profile(image: &RgbRaster, region: &BinaryMask, config: &ColorConfig) -> Result<ColorProfile, AnalysisError> {
    let sampled = sampling_mask(image, region, config)?;
    let mut hist = HueHistogram::default();
    let mut sum_s = 0.0;
    // Brightness is max(r, g, b) / 255, so its moments are exact in integers.
    let (mut n, mut sum_m, mut sum_m2) = (0u64, 0u64, 0u128);
    for (px, _) in image.pixels().iter().zip(sampled.bits()).filter(|(_, &m)| m) {
        let hsv = rgb_to_hsv(px[0], px[1], px[2]);
        hist.add(classify_hue(hsv.h, hsv.s, hsv.v, &config.thresholds));
        sum_s += hsv.s;
        let m = u64::from(px[0].max(px[1]).max(px[2]));
        n += 1;
        sum_m += m;
        sum_m2 += u128::from(m * m);
    }
    let s_ave = sum_s / n as f64;
    let b_ave = sum_m as f64 / (255.0 * n as f64);
    let spread = u128::from(n) * sum_m2 - u128::from(sum_m) * u128::from(sum_m);
    let variance = spread as f64 / ((n as f64) * (n as f64) * 255.0 * 255.0);
    let (n_hue, e_hue) = hue_complexity(&hist, config.presence_threshold);
    Ok(ColorProfile {
        h_main: hist.dominant(),
        s_ave,
        b_ave,
        b_con: variance.sqrt(),
        n_hue,
        e_hue,
        histogram: hist,
    })
}
