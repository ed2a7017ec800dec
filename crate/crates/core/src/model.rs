//! Domain types shared by every analysis: page geometry, the element
//! taxonomy, oriented element boxes and binary masks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Tolerated out-of-page overshoot of detector boxes, in normalized units.
pub const PAGE_SLACK: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PageGeometry {
    width_px: u32,
    height_px: u32,
}

impl PageGeometry {
    pub fn new(width_px: u32, height_px: u32) -> Result<Self, ModelError> {
        if width_px == 0 || height_px == 0 {
            return Err(ModelError::DegeneratePage { width_px, height_px });
        }
        Ok(Self { width_px, height_px })
    }

    /// A square page; used when no pixel dimensions are known.
    pub fn unit() -> Self {
        Self { width_px: 1, height_px: 1 }
    }

    pub fn width_px(&self) -> u32 {
        self.width_px
    }

    pub fn height_px(&self) -> u32 {
        self.height_px
    }

    pub fn area_px(&self) -> u64 {
        self.width_px as u64 * self.height_px as u64
    }
}

/// The ten cartographic element types. Declaration order is the canonical
/// item order used for sorting and bit positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "&'static str", try_from = "String")]
pub enum ElementKind {
    MainMap,
    Title,
    Legend,
    ScaleBar,
    InsetMap,
    Chart,
    DescriptiveText,
    NorthArrow,
    Picture,
    Table,
}

impl ElementKind {
    pub const ALL: [ElementKind; 10] = [
        ElementKind::MainMap,
        ElementKind::Title,
        ElementKind::Legend,
        ElementKind::ScaleBar,
        ElementKind::InsetMap,
        ElementKind::Chart,
        ElementKind::DescriptiveText,
        ElementKind::NorthArrow,
        ElementKind::Picture,
        ElementKind::Table,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::MainMap => "main_map",
            ElementKind::Title => "title",
            ElementKind::Legend => "legend",
            ElementKind::ScaleBar => "scale_bar",
            ElementKind::InsetMap => "inset_map",
            ElementKind::Chart => "chart",
            ElementKind::DescriptiveText => "descriptive_text",
            ElementKind::NorthArrow => "north_arrow",
            ElementKind::Picture => "picture",
            ElementKind::Table => "table",
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElementKind {
    type Err = ModelError;

    /// Accepts snake_case, CamelCase and spaced spellings ("Scale bar").
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .chars()
            .filter(|c| !matches!(c, '_' | ' ' | '-'))
            .flat_map(char::to_lowercase)
            .collect();
        let kind = match key.as_str() {
            "mainmap" => ElementKind::MainMap,
            "title" | "maptitle" => ElementKind::Title,
            "legend" => ElementKind::Legend,
            "scalebar" | "scale" => ElementKind::ScaleBar,
            "insetmap" | "inset" => ElementKind::InsetMap,
            "chart" => ElementKind::Chart,
            "descriptivetext" | "text" => ElementKind::DescriptiveText,
            "northarrow" => ElementKind::NorthArrow,
            "picture" => ElementKind::Picture,
            "table" => ElementKind::Table,
            _ => return Err(ModelError::UnknownElementKind(s.to_string())),
        };
        Ok(kind)
    }
}

impl From<ElementKind> for &'static str {
    fn from(kind: ElementKind) -> Self {
        kind.as_str()
    }
}

impl TryFrom<String> for ElementKind {
    type Error = ModelError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

/// Rotated rectangle in normalized page coordinates. The rotation acts in
/// pixel space (so a 45° square stays a square on a non-square page);
/// `theta` is stored in `[-90, 90)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrientedBox {
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    theta: f64,
}

/// Canonical angle in `[-90, 90)` degrees.
pub fn normalize_theta(theta: f64) -> f64 {
    let t = (theta + 90.0).rem_euclid(180.0) - 90.0;
    // rem_euclid can round up to exactly 180 for tiny negative inputs
    if t >= 90.0 {
        t - 180.0
    } else {
        t
    }
}

impl OrientedBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64, theta: f64) -> Result<Self, ModelError> {
        let finite = [cx, cy, w, h, theta].iter().all(|v| v.is_finite());
        if !finite {
            return Err(ModelError::InvalidBox("non-finite coordinate".into()));
        }
        if !(0.0..=1.0).contains(&cx) || !(0.0..=1.0).contains(&cy) {
            return Err(ModelError::InvalidBox(format!(
                "center ({cx}, {cy}) outside the unit page"
            )));
        }
        if !(w > 0.0 && w <= 1.0 && h > 0.0 && h <= 1.0) {
            return Err(ModelError::InvalidBox(format!(
                "extent ({w}, {h}) outside (0, 1]"
            )));
        }
        Ok(Self { cx, cy, w, h, theta: normalize_theta(theta) })
    }

    /// Axis-aligned box with its top-left corner at `(x, y)`.
    pub fn axis_aligned(x: f64, y: f64, w: f64, h: f64) -> Result<Self, ModelError> {
        Self::new(x + w / 2.0, y + h / 2.0, w, h, 0.0)
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }
    pub fn cy(&self) -> f64 {
        self.cy
    }
    pub fn w(&self) -> f64 {
        self.w
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Mirror about the vertical page axis `x = 0.5`.
    pub fn mirrored_x(&self) -> Self {
        Self { cx: 1.0 - self.cx, theta: normalize_theta(-self.theta), ..*self }
    }

    /// Mirror about the horizontal page axis `y = 0.5`.
    pub fn mirrored_y(&self) -> Self {
        Self { cy: 1.0 - self.cy, theta: normalize_theta(-self.theta), ..*self }
    }

    /// The four rotated corners in normalized coordinates (unclamped).
    pub fn corners(&self, page: PageGeometry) -> [(f64, f64); 4] {
        let pw = page.width_px() as f64;
        let ph = page.height_px() as f64;
        let (sin, cos) = self.theta.to_radians().sin_cos();
        let hw = self.w * pw / 2.0;
        let hh = self.h * ph / 2.0;
        let mut out = [(0.0, 0.0); 4];
        for (slot, (sx, sy)) in out.iter_mut().zip([(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)]) {
            let dx = sx * hw;
            let dy = sy * hh;
            let rx = dx * cos - dy * sin;
            let ry = dx * sin + dy * cos;
            *slot = (self.cx + rx / pw, self.cy + ry / ph);
        }
        out
    }

    /// Whether the point (normalized coordinates) lies inside the rotated
    /// rectangle, boundary included.
    pub fn contains(&self, page: PageGeometry, x: f64, y: f64) -> bool {
        let pw = page.width_px() as f64;
        let ph = page.height_px() as f64;
        let (sin, cos) = self.theta.to_radians().sin_cos();
        let dx = (x - self.cx) * pw;
        let dy = (y - self.cy) * ph;
        let u = dx * cos + dy * sin;
        let v = -dx * sin + dy * cos;
        u.abs() <= self.w * pw / 2.0 && v.abs() <= self.h * ph / 2.0
    }

    /// How far the rotated corners overshoot the unit page; 0 when inside.
    pub fn page_overshoot(&self, page: PageGeometry) -> f64 {
        self.corners(page)
            .iter()
            .flat_map(|&(x, y)| [-x, x - 1.0, -y, y - 1.0])
            .fold(0.0, f64::max)
    }
}

impl<'de> Deserialize<'de> for OrientedBox {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            cx: f64,
            cy: f64,
            w: f64,
            h: f64,
            #[serde(default)]
            theta: f64,
        }
        let raw = Raw::deserialize(deserializer)?;
        OrientedBox::new(raw.cx, raw.cy, raw.w, raw.h, raw.theta).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisAlignedBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl AxisAlignedBox {
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapElement {
    pub kind: ElementKind,
    #[serde(rename = "box")]
    pub bbox: OrientedBox,
}

impl MapElement {
    pub fn new(kind: ElementKind, bbox: OrientedBox) -> Self {
        Self { kind, bbox }
    }
}

/// Tightest axis-aligned box around the rotated corners, clamped to the page.
pub fn envelope(bbox: &OrientedBox, page: PageGeometry) -> AxisAlignedBox {
    let corners = bbox.corners(page);
    let mut env = AxisAlignedBox {
        x_min: f64::INFINITY,
        y_min: f64::INFINITY,
        x_max: f64::NEG_INFINITY,
        y_max: f64::NEG_INFINITY,
    };
    for (x, y) in corners {
        env.x_min = env.x_min.min(x);
        env.y_min = env.y_min.min(y);
        env.x_max = env.x_max.max(x);
        env.y_max = env.y_max.max(y);
    }
    AxisAlignedBox {
        x_min: env.x_min.clamp(0.0, 1.0),
        y_min: env.y_min.clamp(0.0, 1.0),
        x_max: env.x_max.clamp(0.0, 1.0),
        y_max: env.y_max.clamp(0.0, 1.0),
    }
}

pub fn obb_centroid(bbox: &OrientedBox) -> (f64, f64) {
    (bbox.cx, bbox.cy)
}

/// Area in normalized page units (`w * h`), independent of rotation.
pub fn obb_area(bbox: &OrientedBox) -> f64 {
    bbox.w * bbox.h
}

/// Row-major boolean raster.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMask {}x{}", self.width, self.height)?;
        for row in self.bits.chunks(self.width as usize) {
            let line: String = row.iter().map(|&b| if b { '#' } else { '.' }).collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

impl BinaryMask {
    pub fn new(width: u32, height: u32) -> Result<Self, ModelError> {
        Self::from_bits(width, height, vec![false; width as usize * height as usize])
    }

    pub fn filled(width: u32, height: u32) -> Result<Self, ModelError> {
        Self::from_bits(width, height, vec![true; width as usize * height as usize])
    }

    pub fn from_bits(width: u32, height: u32, bits: Vec<bool>) -> Result<Self, ModelError> {
        if width == 0 || height == 0 {
            return Err(ModelError::DegeneratePage { width_px: width, height_px: height });
        }
        let expected = width as usize * height as usize;
        if bits.len() != expected {
            return Err(ModelError::MaskLength { expected, actual: bits.len() });
        }
        Ok(Self { width, height, bits })
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> bool) -> Result<Self, ModelError> {
        let bits = (0..height)
            .flat_map(|row| (0..width).map(move |col| (row, col)))
            .map(|(row, col)| f(row, col))
            .collect();
        Self::from_bits(width, height, bits)
    }

    /// Rasterize an oriented box: a pixel is set when its center lies inside.
    pub fn from_box(bbox: &OrientedBox, page: PageGeometry) -> Self {
        let (w, h) = (page.width_px(), page.height_px());
        Self::from_fn(w, h, |row, col| {
            let x = (col as f64 + 0.5) / w as f64;
            let y = (row as f64 + 0.5) / h as f64;
            bbox.contains(page, x, y)
        })
        .expect("page dimensions are positive")
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: u32, col: u32) -> bool {
        self.bits[row as usize * self.width as usize + col as usize]
    }

    pub fn set(&mut self, row: u32, col: u32, value: bool) {
        let idx = row as usize * self.width as usize + col as usize;
        self.bits[idx] = value;
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn page(&self) -> PageGeometry {
        PageGeometry { width_px: self.width, height_px: self.height }
    }
}
