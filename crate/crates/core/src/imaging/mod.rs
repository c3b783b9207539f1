//! Raster primitives: grayscale/RGB images, smoothing, pyramid scaling,
//! histogram equalization, Canny edges and binary dilation.
//!
//! Pixel `(x, y)` is column `x`, row `y`, stored row-major. Continuous pixel
//! coordinates place the center of pixel `(x, y)` at `(x as f64, y as f64)`.

mod canny;
mod filters;
mod morph;
pub mod pnm;

pub use canny::{canny, sobel};
pub use filters::{equalize_histogram, equalize_histogram_clipped, gaussian_blur, gaussian_kernel, pyr_down, pyr_up};
pub use morph::dilate;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ImagingError {
    #[error("image dimensions must be at least 1x1, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },
    #[error("buffer length {actual} does not match {width}x{height}x{channels}")]
    BufferSize {
        width: usize,
        height: usize,
        channels: usize,
        actual: usize,
    },
    #[error("gaussian kernel size must be odd and >= 3, got {0}")]
    KernelSize(usize),
    #[error("gaussian sigma must be positive, got {0}")]
    Sigma(f64),
    #[error("cannot downscale a {width}x{height} image")]
    TooSmall { width: usize, height: usize },
    #[error("canny thresholds must satisfy 0 <= low < high, got low={low} high={high}")]
    Thresholds { low: f64, high: f64 },
    #[error("dilation radius must be >= 1")]
    Radius,
    #[error("equalization clip limit must be >= 1, got {0}")]
    ClipLimit(f64),
}

fn check_dims(width: usize, height: usize, channels: usize, len: usize) -> Result<(), ImagingError> {
    if width == 0 || height == 0 {
        return Err(ImagingError::EmptyImage { width, height });
    }
    if len != width * height * channels {
        return Err(ImagingError::BufferSize {
            width,
            height,
            channels,
            actual: len,
        });
    }
    Ok(())
}

/// 8-bit single channel raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImagingError> {
        check_dims(width, height, 1, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self, ImagingError> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self, ImagingError> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    /// Value at `(x, y)` with coordinates clamped into the image (edge replication).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let xc = x.clamp(0, self.width as isize - 1) as usize;
        let yc = y.clamp(0, self.height as isize - 1) as usize;
        self.get(xc, yc)
    }

    /// Bilinear sample at continuous pixel coordinates, edge-replicated.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (xi, yi) = (x0 as isize, y0 as isize);
        let p00 = self.get_clamped(xi, yi) as f64;
        let p10 = self.get_clamped(xi + 1, yi) as f64;
        let p01 = self.get_clamped(xi, yi + 1) as f64;
        let p11 = self.get_clamped(xi + 1, yi + 1) as f64;
        let top = p00 + (p10 - p00) * fx;
        let bottom = p01 + (p11 - p01) * fx;
        top + (bottom - top) * fy
    }
}

/// 8-bit interleaved RGB raster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, ImagingError> {
        check_dims(width, height, 3, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self, ImagingError> {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&rgb);
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = 3 * (y * self.width + x);
        self.data[i..i + 3].copy_from_slice(&rgb);
    }

    /// Sets the pixel if `(x, y)` falls inside the image; silently ignores
    /// out-of-range coordinates.
    pub fn put(&mut self, x: isize, y: isize, rgb: [u8; 3]) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.set(x as usize, y as usize, rgb);
        }
    }
}

/// Binary edge mask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMap {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl EdgeMap {
    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut map = Self::empty(width, height);
        for y in 0..height {
            for x in 0..width {
                map.data[y * width + x] = f(x, y);
            }
        }
        map
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    /// Out-of-range coordinates read as unset.
    #[inline]
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.get(x as usize, y as usize)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&v| v)
    }

    /// Iterates the coordinates of set pixels in raster order.
    pub fn iter_set(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &v)| v)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Renders set pixels as 255 on 0.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| if v { 255 } else { 0 }).collect(),
        }
    }
}

/// Luma conversion with the BT.601 weights.
pub fn rgb_to_gray(img: &RgbImage) -> GrayImage {
    let data = img
        .data
        .chunks_exact(3)
        .map(|p| {
            let y = 0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64;
            quantize(y)
        })
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        data,
    }
}

#[inline]
pub(crate) fn quantize(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_extremes_and_red() {
        let white = RgbImage::filled(4, 3, [255, 255, 255]).unwrap();
        assert!(rgb_to_gray(&white).data().iter().all(|&v| v == 255));
        let black = RgbImage::filled(4, 3, [0, 0, 0]).unwrap();
        assert!(rgb_to_gray(&black).data().iter().all(|&v| v == 0));
        let red = RgbImage::filled(4, 3, [255, 0, 0]).unwrap();
        assert!(rgb_to_gray(&red).data().iter().all(|&v| v == 76));
    }

    #[test]
    fn rejects_bad_buffers() {
        assert!(GrayImage::new(0, 3, vec![]).is_err());
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
        assert!(RgbImage::new(2, 2, vec![0; 4]).is_err());
    }

    #[test]
    fn bilinear_interpolates_between_centers() {
        let img = GrayImage::new(2, 1, vec![0, 100]).unwrap();
        assert!((img.sample_bilinear(0.25, 0.0) - 25.0).abs() < 1e-12);
        assert!((img.sample_bilinear(-3.0, 0.0) - 0.0).abs() < 1e-12);
    }
}
