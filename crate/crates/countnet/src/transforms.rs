//! The image transformation family: multi-kernel resampling, 2x2 tiling,
//! grayscale mixing, random cropping, and training-bundle assembly.
//!
//! Kernel definitions:
//! - `Linear`: tent kernel of width 1, source mapping `s = (d + 0.5) * scale - 0.5`,
//!   edges handled by clamping the sample index.
//! - `Cubic`: Keys kernel with a = -0.75, same mapping and clamping.
//! - `Area`: exact block mean at integer factors, pixel-area-weighted average
//!   otherwise.
//! - `Lanczos`: windowed sinc with a = 3, weights renormalized to sum 1 after
//!   clamping.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::Image;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterpKernel {
    Linear,
    Cubic,
    Area,
    Lanczos,
}

impl InterpKernel {
    pub const ALL: [InterpKernel; 4] = [
        InterpKernel::Linear,
        InterpKernel::Cubic,
        InterpKernel::Area,
        InterpKernel::Lanczos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InterpKernel::Linear => "linear",
            InterpKernel::Cubic => "cubic",
            InterpKernel::Area => "area",
            InterpKernel::Lanczos => "lanczos",
        }
    }
}

impl std::str::FromStr for InterpKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(InterpKernel::Linear),
            "cubic" => Ok(InterpKernel::Cubic),
            "area" => Ok(InterpKernel::Area),
            "lanczos" => Ok(InterpKernel::Lanczos),
            other => Err(Error::InvalidArgument(format!(
                "unknown kernel `{other}` (expected linear|cubic|area|lanczos)"
            ))),
        }
    }
}

/// The set of kernels a pipeline may draw from. `mixed` enables all four.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelPolicy {
    enabled: Vec<InterpKernel>,
}

impl KernelPolicy {
    pub fn single(kernel: InterpKernel) -> Self {
        KernelPolicy {
            enabled: vec![kernel],
        }
    }

    pub fn mixed() -> Self {
        KernelPolicy {
            enabled: InterpKernel::ALL.to_vec(),
        }
    }

    pub fn subset(kernels: &[InterpKernel]) -> Result<Self> {
        let mut enabled = Vec::new();
        for &k in kernels {
            if !enabled.contains(&k) {
                enabled.push(k);
            }
        }
        if enabled.is_empty() {
            return Err(Error::InvalidArgument(
                "kernel policy must enable at least one kernel".into(),
            ));
        }
        Ok(KernelPolicy { enabled })
    }

    pub fn enabled(&self) -> &[InterpKernel] {
        &self.enabled
    }

    pub fn is_mixed(&self) -> bool {
        self.enabled.len() == InterpKernel::ALL.len()
    }

    pub fn name(&self) -> String {
        if self.is_mixed() {
            "mixed".into()
        } else {
            self.enabled
                .iter()
                .map(|k| k.name())
                .collect::<Vec<_>>()
                .join("+")
        }
    }

    /// Draws a kernel; single-kernel policies consume no randomness.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> InterpKernel {
        if self.enabled.len() == 1 {
            self.enabled[0]
        } else {
            self.enabled[rng.random_range(0..self.enabled.len())]
        }
    }
}

impl std::str::FromStr for KernelPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "mixed" {
            return Ok(KernelPolicy::mixed());
        }
        let kernels = s
            .split('+')
            .map(|part| part.parse::<InterpKernel>())
            .collect::<Result<Vec<_>>>()?;
        KernelPolicy::subset(&kernels)
    }
}

/// Source / crop geometry. Tiles and downsampled images are `crop / 2`
/// square, which is also the network input size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeometrySpec {
    pub source_size: usize,
    pub crop_size: usize,
}

impl GeometrySpec {
    pub fn new(source_size: usize, crop_size: usize) -> Result<Self> {
        let g = GeometrySpec {
            source_size,
            crop_size,
        };
        g.validate()?;
        Ok(g)
    }

    /// Desk-scale default: 128px sources, 112px crops, 56px tiles.
    pub fn desk() -> Self {
        GeometrySpec {
            source_size: 128,
            crop_size: 112,
        }
    }

    /// The geometry used at full scale: 256px sources, 224px crops.
    pub fn paper() -> Self {
        GeometrySpec {
            source_size: 256,
            crop_size: 224,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.crop_size < 2 || self.crop_size % 2 != 0 {
            return Err(Error::Geometry(format!(
                "crop size {} must be even and >= 2",
                self.crop_size
            )));
        }
        if self.crop_size > self.source_size {
            return Err(Error::Geometry(format!(
                "crop size {} exceeds source size {}",
                self.crop_size, self.source_size
            )));
        }
        Ok(())
    }

    pub fn tile_size(&self) -> usize {
        self.crop_size / 2
    }
}

/// The six network inputs of one training pair.
#[derive(Debug, Clone)]
pub struct SampleBundle {
    pub down_x: Image,
    pub tiles_x: [Image; 4],
    pub down_y: Image,
    pub kernel: InterpKernel,
    pub grayscale: bool,
}

impl SampleBundle {
    pub fn inputs(&self) -> [&Image; 6] {
        [
            &self.down_x,
            &self.tiles_x[0],
            &self.tiles_x[1],
            &self.tiles_x[2],
            &self.tiles_x[3],
            &self.down_y,
        ]
    }
}

/// Randomization knobs for bundle assembly.
#[derive(Debug, Clone)]
pub struct BundlePolicy {
    pub kernels: KernelPolicy,
    /// Probability of keeping color; otherwise all six images go grayscale.
    pub color_prob: f64,
}

impl Default for BundlePolicy {
    fn default() -> Self {
        BundlePolicy {
            kernels: KernelPolicy::mixed(),
            color_prob: 1.0 / 3.0,
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

fn lanczos3(x: f64) -> f64 {
    if x.abs() < 3.0 {
        sinc(x) * sinc(x / 3.0)
    } else {
        0.0
    }
}

fn tent(x: f64) -> f64 {
    (1.0 - x.abs()).max(0.0)
}

fn keys_cubic(x: f64) -> f64 {
    const A: f64 = -0.75;
    let x = x.abs();
    if x <= 1.0 {
        (A + 2.0) * x * x * x - (A + 3.0) * x * x + 1.0
    } else if x < 2.0 {
        A * (x * x * x - 5.0 * x * x + 8.0 * x - 4.0)
    } else {
        0.0
    }
}

/// Per-output-coordinate taps: start index plus weights over a contiguous
/// clamped source range.
struct Taps {
    start: usize,
    weights: Vec<f64>,
}

fn interp_taps(in_len: usize, out_len: usize, kernel: InterpKernel) -> Vec<Taps> {
    let (kern, support): (fn(f64) -> f64, f64) = match kernel {
        InterpKernel::Linear => (tent, 1.0),
        InterpKernel::Cubic => (keys_cubic, 2.0),
        InterpKernel::Lanczos => (lanczos3, 3.0),
        InterpKernel::Area => unreachable!("area uses coverage taps"),
    };
    let scale = in_len as f64 / out_len as f64;
    (0..out_len)
        .map(|d| {
            let s = (d as f64 + 0.5) * scale - 0.5;
            let lo = (s - support).ceil() as isize;
            let hi = (s + support).floor() as isize;
            let clamp = |i: isize| i.clamp(0, in_len as isize - 1) as usize;
            let start = clamp(lo);
            let end = clamp(hi);
            let mut weights = vec![0.0; end - start + 1];
            for i in lo..=hi {
                weights[clamp(i) - start] += kern(i as f64 - s);
            }
            if kernel == InterpKernel::Lanczos {
                let total: f64 = weights.iter().sum();
                for w in weights.iter_mut() {
                    *w /= total;
                }
            }
            Taps { start, weights }
        })
        .collect()
}

fn area_taps(in_len: usize, out_len: usize) -> Vec<Taps> {
    let scale = in_len as f64 / out_len as f64;
    (0..out_len)
        .map(|d| {
            let lo = d as f64 * scale;
            let hi = (d as f64 + 1.0) * scale;
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(in_len).saturating_sub(1);
            let mut weights = Vec::with_capacity(last - first + 1);
            for i in first..=last {
                let cover = (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0);
                weights.push(cover / scale);
            }
            Taps {
                start: first,
                weights,
            }
        })
        .collect()
}

fn apply_separable(image: &Image, out_h: usize, out_w: usize, col_taps: &[Taps], row_taps: &[Taps]) -> Image {
    let (in_h, in_w, ch) = (image.height(), image.width(), image.channels());
    // Horizontal pass.
    let mut tmp = vec![0.0f64; in_h * out_w * ch];
    let src = image.data();
    for r in 0..in_h {
        for (d, taps) in col_taps.iter().enumerate() {
            for c in 0..ch {
                let mut acc = 0.0;
                for (k, &w) in taps.weights.iter().enumerate() {
                    acc += w * src[(r * in_w + taps.start + k) * ch + c];
                }
                tmp[(r * out_w + d) * ch + c] = acc;
            }
        }
    }
    // Vertical pass.
    let mut out = vec![0.0f64; out_h * out_w * ch];
    for (d, taps) in row_taps.iter().enumerate() {
        for x in 0..out_w {
            for c in 0..ch {
                let mut acc = 0.0;
                for (k, &w) in taps.weights.iter().enumerate() {
                    acc += w * tmp[((taps.start + k) * out_w + x) * ch + c];
                }
                out[(d * out_w + x) * ch + c] = acc;
            }
        }
    }
    Image::new(out_h, out_w, ch, out).expect("validated dimensions")
}

/// Exact block mean for integer downsampling factors. Rows are summed
/// left-to-right, then rows top-to-bottom, then scaled once.
fn area_block_mean(image: &Image, out_h: usize, out_w: usize) -> Image {
    let (in_w, ch) = (image.width(), image.channels());
    let my = image.height() / out_h;
    let mx = in_w / out_w;
    let inv = 1.0 / (my * mx) as f64;
    let src = image.data();
    let mut out = vec![0.0f64; out_h * out_w * ch];
    for r in 0..out_h {
        for c in 0..out_w {
            for chan in 0..ch {
                let mut block = 0.0;
                for dr in 0..my {
                    let mut row = 0.0;
                    for dc in 0..mx {
                        row += src[((r * my + dr) * in_w + c * mx + dc) * ch + chan];
                    }
                    block += row;
                }
                out[(r * out_w + c) * ch + chan] = block * inv;
            }
        }
    }
    Image::new(out_h, out_w, ch, out).expect("validated dimensions")
}

/// Resamples to `out_h x out_w` with the given kernel. Deterministic;
/// channels are processed independently and values pass through unclamped.
pub fn resample(image: &Image, out_h: usize, out_w: usize, kernel: InterpKernel) -> Result<Image> {
    if out_h == 0 || out_w == 0 {
        return Err(Error::InvalidArgument(
            "resample output size must be positive".into(),
        ));
    }
    if image.height() == 0 || image.width() == 0 {
        return Err(Error::InvalidArgument("resample input is zero-sized".into()));
    }
    match kernel {
        InterpKernel::Area => {
            if image.height() % out_h == 0 && image.width() % out_w == 0 {
                Ok(area_block_mean(image, out_h, out_w))
            } else {
                let col = area_taps(image.width(), out_w);
                let row = area_taps(image.height(), out_h);
                Ok(apply_separable(image, out_h, out_w, &col, &row))
            }
        }
        k => {
            let col = interp_taps(image.width(), out_w, k);
            let row = interp_taps(image.height(), out_h, k);
            Ok(apply_separable(image, out_h, out_w, &col, &row))
        }
    }
}

/// Splits an even-sized image into its 2x2 grid of tiles, row-major:
/// top-left, top-right, bottom-left, bottom-right.
pub fn tile(image: &Image) -> Result<[Image; 4]> {
    let (h, w, ch) = (image.height(), image.width(), image.channels());
    if h % 2 != 0 || w % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "tiling requires even dimensions, got {h}x{w}"
        )));
    }
    let (th, tw) = (h / 2, w / 2);
    let mut tiles = Vec::with_capacity(4);
    for tr in 0..2 {
        for tc in 0..2 {
            let mut data = Vec::with_capacity(th * tw * ch);
            for r in 0..th {
                let src_r = tr * th + r;
                let start = (src_r * w + tc * tw) * ch;
                data.extend_from_slice(&image.data()[start..start + tw * ch]);
            }
            tiles.push(Image::new(th, tw, ch, data)?);
        }
    }
    Ok([
        tiles.remove(0),
        tiles.remove(0),
        tiles.remove(0),
        tiles.remove(0),
    ])
}

/// Inverse of [`tile`]; used by tests and reconstruction checks.
pub fn reassemble(tiles: &[Image; 4]) -> Result<Image> {
    let (th, tw, ch) = (tiles[0].height(), tiles[0].width(), tiles[0].channels());
    for t in tiles.iter() {
        if t.height() != th || t.width() != tw || t.channels() != ch {
            return Err(Error::DimensionMismatch("tiles differ in size".into()));
        }
    }
    let mut out = Image::zeros(th * 2, tw * 2, ch)?;
    for (idx, t) in tiles.iter().enumerate() {
        let (tr, tc) = (idx / 2, idx % 2);
        for r in 0..th {
            for c in 0..tw {
                for chan in 0..ch {
                    out.set(tr * th + r, tc * tw + c, chan, t.get(r, c, chan));
                }
            }
        }
    }
    Ok(out)
}

/// Replicates the per-pixel channel mean across all three channels.
pub fn to_grayscale(image: &Image) -> Result<Image> {
    if image.channels() != 3 {
        return Err(Error::InvalidArgument(format!(
            "grayscale conversion requires 3 channels, got {}",
            image.channels()
        )));
    }
    let mut data = Vec::with_capacity(image.data().len());
    for px in image.data().chunks_exact(3) {
        let mean = (px[0] + px[1] + px[2]) / 3.0;
        data.extend_from_slice(&[mean, mean, mean]);
    }
    Image::new(image.height(), image.width(), 3, data)
}

/// Axis-aligned random crop with offsets uniform over all valid positions.
pub fn random_crop(image: &Image, crop: usize, rng: &mut ChaCha8Rng) -> Result<Image> {
    let (h, w, ch) = (image.height(), image.width(), image.channels());
    if crop == 0 || crop > h.min(w) {
        return Err(Error::InvalidArgument(format!(
            "crop size {crop} does not fit a {h}x{w} image"
        )));
    }
    let off_r = if h > crop { rng.random_range(0..=h - crop) } else { 0 };
    let off_c = if w > crop { rng.random_range(0..=w - crop) } else { 0 };
    let mut data = Vec::with_capacity(crop * crop * ch);
    for r in 0..crop {
        let start = ((off_r + r) * w + off_c) * ch;
        data.extend_from_slice(&image.data()[start..start + crop * ch]);
    }
    Image::new(crop, crop, ch, data)
}

/// Center crop; the deterministic counterpart used by evaluation paths.
pub fn center_crop(image: &Image, crop: usize) -> Result<Image> {
    let (h, w, ch) = (image.height(), image.width(), image.channels());
    if crop == 0 || crop > h.min(w) {
        return Err(Error::InvalidArgument(format!(
            "crop size {crop} does not fit a {h}x{w} image"
        )));
    }
    let off_r = (h - crop) / 2;
    let off_c = (w - crop) / 2;
    let mut data = Vec::with_capacity(crop * crop * ch);
    for r in 0..crop {
        let start = ((off_r + r) * w + off_c) * ch;
        data.extend_from_slice(&image.data()[start..start + crop * ch]);
    }
    Image::new(crop, crop, ch, data)
}

/// Assembles the six inputs for one training pair: independent crops of
/// `x` and `y`, one shared kernel draw, one shared color-vs-grayscale draw.
///
/// The caller guarantees `x` and `y` come from different dataset indices.
/// Draw order: crop_x (row, col), crop_y (row, col), kernel, color.
pub fn make_bundle(
    x: &Image,
    y: &Image,
    geometry: &GeometrySpec,
    policy: &BundlePolicy,
    rng: &mut ChaCha8Rng,
) -> Result<SampleBundle> {
    geometry.validate()?;
    for (name, img) in [("x", x), ("y", y)] {
        if img.height() != geometry.source_size || img.width() != geometry.source_size {
            return Err(Error::Geometry(format!(
                "bundle input {name} is {}x{}, expected source size {}",
                img.height(),
                img.width(),
                geometry.source_size
            )));
        }
        if img.channels() != 3 {
            return Err(Error::Geometry(format!(
                "bundle input {name} must have 3 channels"
            )));
        }
    }
    let half = geometry.tile_size();
    let crop_x = random_crop(x, geometry.crop_size, rng)?;
    let crop_y = random_crop(y, geometry.crop_size, rng)?;
    let kernel = policy.kernels.draw(rng);
    let down_x = resample(&crop_x, half, half, kernel)?;
    let tiles_x = tile(&crop_x)?;
    let down_y = resample(&crop_y, half, half, kernel)?;
    let keep_color = rng.random::<f64>() < policy.color_prob;
    let bundle = if keep_color {
        SampleBundle {
            down_x,
            tiles_x,
            down_y,
            kernel,
            grayscale: false,
        }
    } else {
        SampleBundle {
            down_x: to_grayscale(&down_x)?,
            tiles_x: [
                to_grayscale(&tiles_x[0])?,
                to_grayscale(&tiles_x[1])?,
                to_grayscale(&tiles_x[2])?,
                to_grayscale(&tiles_x[3])?,
            ],
            down_y: to_grayscale(&down_y)?,
            kernel,
            grayscale: true,
        }
    };
    Ok(bundle)
}
