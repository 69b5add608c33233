//! Minimal owned RGB raster plus the rectangle type used for element bounds.

use std::path::Path;

use image::{imageops, imageops::FilterType, RgbImage};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Integer rectangle in screenshot pixel coordinates, right/bottom exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bounds {
    pub left: i64,
    pub top: i64,
    pub right: i64,
    pub bottom: i64,
}

impl Bounds {
    pub fn new(left: i64, top: i64, right: i64, bottom: i64) -> Self {
        Self {
            left,
            top,
            right,
            bottom,
        }
    }

    pub fn width(&self) -> i64 {
        self.right - self.left
    }

    pub fn height(&self) -> i64 {
        self.bottom - self.top
    }

    pub fn is_empty(&self) -> bool {
        self.width() <= 0 || self.height() <= 0
    }

    /// Intersection with `[0, width) x [0, height)`.
    pub fn clamp_to(&self, width: u32, height: u32) -> Bounds {
        Bounds {
            left: self.left.clamp(0, width as i64),
            top: self.top.clamp(0, height as i64),
            right: self.right.clamp(0, width as i64),
            bottom: self.bottom.clamp(0, height as i64),
        }
    }
}

impl std::fmt::Display for Bounds {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{},{}][{},{}]",
            self.left, self.top, self.right, self.bottom
        )
    }
}

/// Row-major interleaved 8-bit raster (`height x width x channels`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    width: u32,
    height: u32,
    channels: u8,
    data: Vec<u8>,
}

impl Raster {
    pub fn new(width: u32, height: u32, channels: u8, data: Vec<u8>) -> Result<Self> {
        let expected = width as usize * height as usize * channels as usize;
        if data.len() != expected {
            return Err(Error::shape(
                "raster",
                format!("{width}x{height}x{channels} needs {expected} bytes, got {}", data.len()),
            ));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: u32, height: u32, rgb: [u8; 3]) -> Self {
        let data = rgb
            .iter()
            .copied()
            .cycle()
            .take(width as usize * height as usize * 3)
            .collect();
        Self {
            width,
            height,
            channels: 3,
            data,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn pixel(&self, x: u32, y: u32) -> &[u8] {
        let c = self.channels as usize;
        let at = (y as usize * self.width as usize + x as usize) * c;
        &self.data[at..at + c]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, value: &[u8]) {
        let c = self.channels as usize;
        let at = (y as usize * self.width as usize + x as usize) * c;
        self.data[at..at + c].copy_from_slice(&value[..c]);
    }

    /// Copy of the sub-rectangle at `bounds`, which must lie inside the raster.
    pub fn crop(&self, bounds: &Bounds) -> Result<Raster> {
        if bounds.is_empty()
            || bounds.left < 0
            || bounds.top < 0
            || bounds.right > self.width as i64
            || bounds.bottom > self.height as i64
        {
            return Err(Error::shape(
                "crop",
                format!("{bounds} outside {}x{} raster", self.width, self.height),
            ));
        }
        let c = self.channels as usize;
        let (w, h) = (bounds.width() as usize, bounds.height() as usize);
        let mut data = Vec::with_capacity(w * h * c);
        for y in bounds.top as usize..bounds.bottom as usize {
            let row = (y * self.width as usize + bounds.left as usize) * c;
            data.extend_from_slice(&self.data[row..row + w * c]);
        }
        Raster::new(w as u32, h as u32, self.channels, data)
    }

    /// Hex SHA-256 over the dimensions and raw pixel bytes.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.width.to_le_bytes());
        hasher.update(self.height.to_le_bytes());
        hasher.update([self.channels]);
        hasher.update(&self.data);
        hex::encode(hasher.finalize())
    }

    pub fn load_png(path: &Path) -> Result<Raster> {
        let img = image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Raster::from_rgb(img.to_rgb8()))
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        self.to_rgb()
            .save(path)
            .map_err(|source| Error::Image {
                path: path.to_path_buf(),
                source,
            })
    }

    pub fn from_rgb(img: RgbImage) -> Raster {
        let (width, height) = img.dimensions();
        Raster {
            width,
            height,
            channels: 3,
            data: img.into_raw(),
        }
    }

    fn to_rgb(&self) -> RgbImage {
        let rgb = match self.channels {
            3 => self.data.clone(),
            1 => self.data.iter().flat_map(|&v| [v, v, v]).collect(),
            c => self
                .data
                .chunks(c as usize)
                .flat_map(|p| [p[0], p[1], p[2]])
                .collect(),
        };
        RgbImage::from_raw(self.width, self.height, rgb).expect("buffer sized by construction")
    }

    /// Pads to a square by edge replication, then resizes to `resolution`.
    pub fn to_square(&self, resolution: u32) -> Raster {
        let img = self.to_rgb();
        let side = self.width.max(self.height);
        let off_x = (side - self.width) / 2;
        let off_y = (side - self.height) / 2;
        let square = RgbImage::from_fn(side, side, |x, y| {
            let sx = x.saturating_sub(off_x).min(self.width - 1);
            let sy = y.saturating_sub(off_y).min(self.height - 1);
            *img.get_pixel(sx, sy)
        });
        let out = if side == resolution {
            square
        } else {
            imageops::resize(&square, resolution, resolution, FilterType::Triangle)
        };
        Raster::from_rgb(out)
    }

    /// `(height*width) x channels` matrix in raster order, values scaled to `[0, 1]`.
    pub fn to_unit_matrix(&self) -> Array2<f64> {
        let c = self.channels as usize;
        let n = self.width as usize * self.height as usize;
        Array2::from_shape_fn((n, c), |(p, ch)| self.data[p * c + ch] as f64 / 255.0)
    }

    /// Model input: square, resized and normalized.
    pub fn model_input(&self, resolution: u32) -> Array2<f64> {
        if self.width == resolution && self.height == resolution && self.channels == 3 {
            self.to_unit_matrix()
        } else {
            self.to_square(resolution).to_unit_matrix()
        }
    }
}
