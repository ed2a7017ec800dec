//! 8-bit RGB(A) rasters and mask files.

use std::path::Path;

use crate::error::PipelineError;
use crate::model::{BinaryMask, PageGeometry};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbRaster {
    width: u32,
    height: u32,
    pixels: Vec<[u8; 3]>,
    alpha: Option<Vec<u8>>,
}

impl RgbRaster {
    pub fn new(width: u32, height: u32, pixels: Vec<[u8; 3]>) -> Option<Self> {
        (width > 0 && height > 0 && pixels.len() == width as usize * height as usize)
            .then_some(Self { width, height, pixels, alpha: None })
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> [u8; 3]) -> Option<Self> {
        let pixels = (0..height)
            .flat_map(|row| (0..width).map(move |col| (row, col)))
            .map(|(row, col)| f(row, col))
            .collect();
        Self::new(width, height, pixels)
    }

    pub fn with_alpha(mut self, alpha: Vec<u8>) -> Option<Self> {
        if alpha.len() != self.pixels.len() {
            return None;
        }
        self.alpha = Some(alpha);
        Some(self)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn alpha(&self) -> Option<&[u8]> {
        self.alpha.as_deref()
    }

    pub fn page(&self) -> PageGeometry {
        PageGeometry::new(self.width, self.height).expect("raster dimensions are positive")
    }

    /// Decode a PNG or JPEG file. An alpha channel is kept only when present
    /// in the source.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        if !path.exists() {
            return Err(PipelineError::FileNotFound(path.to_path_buf()));
        }
        let decoded = image::open(path).map_err(|e| PipelineError::ImageDecode {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let has_alpha = decoded.color().has_alpha();
        let rgba = decoded.into_rgba8();
        let (width, height) = rgba.dimensions();
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        let mut alpha = Vec::with_capacity(if has_alpha { pixels.capacity() } else { 0 });
        for p in rgba.pixels() {
            pixels.push([p[0], p[1], p[2]]);
            if has_alpha {
                alpha.push(p[3]);
            }
        }
        let raster = Self::new(width, height, pixels).ok_or_else(|| PipelineError::ImageDecode {
            path: path.to_path_buf(),
            message: "empty image".into(),
        })?;
        Ok(if has_alpha { raster.with_alpha(alpha).expect("same length") } else { raster })
    }
}

/// Read only the image header for its dimensions.
pub fn probe_page(path: &Path) -> Result<PageGeometry, PipelineError> {
    let (w, h) = image::image_dimensions(path).map_err(|e| PipelineError::ImageDecode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(PageGeometry::new(w, h)?)
}

/// Load a single-channel mask image; any nonzero sample is foreground.
pub fn load_mask(path: &Path) -> Result<BinaryMask, PipelineError> {
    if !path.exists() {
        return Err(PipelineError::FileNotFound(path.to_path_buf()));
    }
    let decoded = image::open(path).map_err(|e| PipelineError::ImageDecode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let luma = decoded.into_luma8();
    let (w, h) = luma.dimensions();
    let bits = luma.as_raw().iter().map(|&v| v != 0).collect();
    Ok(BinaryMask::from_bits(w, h, bits)?)
}

pub fn save_png(raster: &RgbRaster, path: &Path) -> Result<(), PipelineError> {
    let flat: Vec<u8> = raster.pixels.iter().flatten().copied().collect();
    image::save_buffer(path, &flat, raster.width, raster.height, image::ExtendedColorType::Rgb8)
        .map_err(|e| PipelineError::ImageDecode { path: path.to_path_buf(), message: e.to_string() })
}

pub fn save_mask_png(mask: &BinaryMask, path: &Path) -> Result<(), PipelineError> {
    let flat: Vec<u8> = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    image::save_buffer(path, &flat, mask.width(), mask.height(), image::ExtendedColorType::L8)
        .map_err(|e| PipelineError::ImageDecode { path: path.to_path_buf(), message: e.to_string() })
}
