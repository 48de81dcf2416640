//! In-memory image representation and per-image normalization.

use std::path::Path;

use crate::error::{Error, Result};

/// A raster of `height * width * channels` values in row-major
/// (row, column, channel) order. Decoded pixels live in `[0, 1]`;
/// normalized or resampled images may hold any finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidArgument(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != height * width * channels {
            return Err(Error::DimensionMismatch(format!(
                "image data length {} does not equal {height}x{width}x{channels}",
                data.len()
            )));
        }
        Ok(Image {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize, channels: usize) -> Result<Self> {
        Image::new(height, width, channels, vec![0.0; height * width * channels])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize, ch: usize) -> usize {
        (row * self.width + col) * self.channels + ch
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, ch: usize) -> f64 {
        self.data[self.index(row, col, ch)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, ch: usize, value: f64) {
        let i = self.index(row, col, ch);
        self.data[i] = value;
    }

    /// Mean and population standard deviation over all values.
    pub fn statistics(&self) -> (f64, f64) {
        let n = self.data.len() as f64;
        let mean = self.data.iter().sum::<f64>() / n;
        let var = self.data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        (mean, var.sqrt())
    }
}

/// Threshold below which an image counts as constant and division is skipped.
pub const STD_EPSILON: f64 = 1e-8;

/// Shifts to zero mean and scales to unit standard deviation, both computed
/// jointly over every pixel and channel of this image. Near-constant images
/// (std below [`STD_EPSILON`]) are only mean-shifted, which maps an exactly
/// constant image to all zeros.
pub fn normalize(image: &Image) -> Image {
    let (mean, std) = image.statistics();
    let data = if std < STD_EPSILON {
        image.data.iter().map(|v| v - mean).collect()
    } else {
        image.data.iter().map(|v| (v - mean) / std).collect()
    };
    Image {
        height: image.height,
        width: image.width,
        channels: image.channels,
        data,
    }
}

/// Decodes a PNG into `[0, 1]` floats, RGB channel order.
pub fn load_png(path: &Path) -> Result<Image> {
    let decoded = image::open(path).map_err(|e| Error::ImageDecode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let data = rgb.as_raw().iter().map(|&v| v as f64 / 255.0).collect();
    Image::new(h, w, 3, data)
}

/// Writes 8-bit PNG; values are clamped to `[0, 1]` and quantized to 255 levels.
pub fn save_png(image: &Image, path: &Path) -> Result<()> {
    let quantize = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    let (bytes, color) = match image.channels {
        1 => (
            image.data.iter().map(|&v| quantize(v)).collect::<Vec<u8>>(),
            image::ColorType::L8,
        ),
        3 => (
            image.data.iter().map(|&v| quantize(v)).collect::<Vec<u8>>(),
            image::ColorType::Rgb8,
        ),
        _ => unreachable!("validated at construction"),
    };
    image::save_buffer(
        path,
        &bytes,
        image.width as u32,
        image.height as u32,
        color,
    )
    .map_err(|e| Error::ImageEncode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn rejects_bad_construction() {
        assert!(Image::new(0, 4, 3, vec![]).is_err());
        assert!(Image::new(2, 2, 2, vec![0.0; 8]).is_err());
        assert!(Image::new(2, 2, 3, vec![0.0; 11]).is_err());
    }

    #[test]
    fn normalize_two_point_case() {
        let img = Image::new(1, 2, 1, vec![0.0, 1.0]).unwrap();
        let out = normalize(&img);
        assert_eq!(out.data(), &[-1.0, 1.0]);
    }

    #[test]
    fn normalize_constant_image_is_all_zeros() {
        let img = Image::new(3, 3, 1, vec![0.7; 9]).unwrap();
        let out = normalize(&img);
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalize_random_image_statistics() {
        let mut rng = crate::rng::stream_rng(11, crate::rng::StreamDomain::Scene, 0);
        let data: Vec<f64> = (0..8 * 8 * 3).map(|_| rng.random::<f64>()).collect();
        let img = Image::new(8, 8, 3, data).unwrap();
        let out = normalize(&img);
        // Oracle: recompute the statistics of the output directly.
        let n = out.data().len() as f64;
        let mean = out.data().iter().sum::<f64>() / n;
        let var = out.data().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-6, "mean {mean}");
        assert!((var.sqrt() - 1.0).abs() < 1e-6, "std {}", var.sqrt());
    }

    #[test]
    fn normalize_is_idempotent() {
        let mut rng = crate::rng::stream_rng(13, crate::rng::StreamDomain::Scene, 1);
        let data: Vec<f64> = (0..6 * 5 * 3).map(|_| rng.random::<f64>()).collect();
        let img = Image::new(6, 5, 3, data).unwrap();
        let once = normalize(&img);
        let twice = normalize(&once);
        for (a, b) in once.data().iter().zip(twice.data()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn png_round_trip_is_lossless_for_quantized_data() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("img.png");
        let mut rng = crate::rng::stream_rng(5, crate::rng::StreamDomain::Scene, 2);
        let data: Vec<f64> = (0..4 * 4 * 3)
            .map(|_| rng.random_range(0u32..=255) as f64 / 255.0)
            .collect();
        let img = Image::new(4, 4, 3, data).unwrap();
        save_png(&img, &path).unwrap();
        let back = load_png(&path).unwrap();
        assert_eq!(img.data(), back.data());
    }
}
