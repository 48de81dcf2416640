//! Synthetic scene generator: colored primitives on flat or textured
//! backgrounds, with exact ground-truth counts.
//!
//! Shapes are placed by rejection sampling with a one-pixel separation
//! guarantee, so the count always equals the number of connected
//! components in the rendered occupancy mask.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{LabeledDataset, Split};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::rng::{stream_rng, StreamDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Disk,
    Square,
    Triangle,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 3] = [ShapeKind::Disk, ShapeKind::Square, ShapeKind::Triangle];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Disk => "disk",
            ShapeKind::Square => "square",
            ShapeKind::Triangle => "triangle",
        }
    }

    /// Stable class index used as the label in single-kind datasets.
    pub fn class_index(self) -> i64 {
        match self {
            ShapeKind::Disk => 0,
            ShapeKind::Square => 1,
            ShapeKind::Triangle => 2,
        }
    }
}

impl std::str::FromStr for ShapeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disk" => Ok(ShapeKind::Disk),
            "square" => Ok(ShapeKind::Square),
            "triangle" => Ok(ShapeKind::Triangle),
            other => Err(Error::SceneConfig(format!("unknown shape kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ColorPolicy {
    /// Each shape gets an independent random RGB color.
    Random,
    Fixed([f64; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BackgroundPolicy {
    Flat([f64; 3]),
    /// Low-frequency value noise plus fine per-pixel jitter.
    NoiseTexture,
}

#[derive(Debug, Clone)]
pub struct ShapeSceneConfig {
    pub canvas: usize,
    pub kinds: Vec<ShapeKind>,
    pub count_range: (u32, u32),
    pub size_range: (usize, usize),
    pub color: ColorPolicy,
    pub background: BackgroundPolicy,
    pub seed: u64,
}

impl ShapeSceneConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.count_range;
        if lo < 1 || lo > hi {
            return Err(Error::SceneConfig(format!(
                "count range [{lo}, {hi}] must satisfy 1 <= min <= max"
            )));
        }
        if self.kinds.is_empty() {
            return Err(Error::SceneConfig("at least one shape kind".into()));
        }
        let (smin, smax) = self.size_range;
        if smin < 3 || smin > smax {
            return Err(Error::SceneConfig(format!(
                "size range [{smin}, {smax}] must satisfy 3 <= min <= max"
            )));
        }
        if smax + 2 > self.canvas {
            return Err(Error::SceneConfig(format!(
                "max shape size {smax} does not fit a {}px canvas with a border margin",
                self.canvas
            )));
        }
        Ok(())
    }
}

const PLACEMENT_ATTEMPTS: usize = 1000;

/// Pixels of a shape relative to the top-left of its size x size bounding
/// box. Pixel centers are tested against the analytic shape.
fn raster_shape(kind: ShapeKind, size: usize) -> Vec<(usize, usize)> {
    let s = size as f64;
    let mut px = Vec::new();
    match kind {
        ShapeKind::Square => {
            for r in 0..size {
                for c in 0..size {
                    px.push((r, c));
                }
            }
        }
        ShapeKind::Disk => {
            let radius = s / 2.0;
            for r in 0..size {
                for c in 0..size {
                    let dy = r as f64 + 0.5 - radius;
                    let dx = c as f64 + 0.5 - radius;
                    if dy * dy + dx * dx <= radius * radius {
                        px.push((r, c));
                    }
                }
            }
        }
        ShapeKind::Triangle => {
            // Isoceles, apex up, inscribed in the bounding box.
            let cx = s / 2.0;
            for r in 0..size {
                let t = (r as f64 + 0.5) / s;
                let half_width = t * s / 2.0;
                for c in 0..size {
                    if (c as f64 + 0.5 - cx).abs() <= half_width {
                        px.push((r, c));
                    }
                }
            }
        }
    }
    px
}

fn render_background(cfg: &ShapeSceneConfig, rng: &mut ChaCha8Rng) -> Image {
    let n = cfg.canvas;
    match cfg.background {
        BackgroundPolicy::Flat(rgb) => {
            let mut data = Vec::with_capacity(n * n * 3);
            for _ in 0..n * n {
                data.extend_from_slice(&rgb);
            }
            Image::new(n, n, 3, data).expect("valid canvas")
        }
        BackgroundPolicy::NoiseTexture => {
            // Value noise: random grid nodes, bilinear in between, plus jitter.
            let cell = 8usize;
            let nodes = n / cell + 2;
            let mut grid = vec![[0.0f64; 3]; nodes * nodes];
            for node in grid.iter_mut() {
                for ch in node.iter_mut() {
                    *ch = rng.random_range(0.15..0.85);
                }
            }
            let mut data = vec![0.0f64; n * n * 3];
            for r in 0..n {
                for c in 0..n {
                    let gy = r as f64 / cell as f64;
                    let gx = c as f64 / cell as f64;
                    let (y0, x0) = (gy as usize, gx as usize);
                    let (fy, fx) = (gy - y0 as f64, gx - x0 as f64);
                    for ch in 0..3 {
                        let v00 = grid[y0 * nodes + x0][ch];
                        let v01 = grid[y0 * nodes + x0 + 1][ch];
                        let v10 = grid[(y0 + 1) * nodes + x0][ch];
                        let v11 = grid[(y0 + 1) * nodes + x0 + 1][ch];
                        let top = v00 * (1.0 - fx) + v01 * fx;
                        let bot = v10 * (1.0 - fx) + v11 * fx;
                        data[(r * n + c) * 3 + ch] = top * (1.0 - fy) + bot * fy;
                    }
                }
            }
            for v in data.iter_mut() {
                *v = (*v + rng.random_range(-0.04..0.04)).clamp(0.0, 1.0);
            }
            Image::new(n, n, 3, data).expect("valid canvas")
        }
    }
}

fn shape_color(cfg: &ShapeSceneConfig, rng: &mut ChaCha8Rng) -> [f64; 3] {
    match cfg.color {
        ColorPolicy::Fixed(rgb) => rgb,
        ColorPolicy::Random => {
            let mut rgb = [0.0; 3];
            for ch in rgb.iter_mut() {
                *ch = rng.random::<f64>();
            }
            // Keep shapes distinguishable from a flat background.
            if let BackgroundPolicy::Flat(bg) = cfg.background {
                let contrast = rgb
                    .iter()
                    .zip(&bg)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                if contrast < 0.15 {
                    for (ch, b) in rgb.iter_mut().zip(&bg) {
                        *ch = if *b < 0.5 { b + 0.4 } else { b - 0.4 };
                    }
                }
            }
            rgb
        }
    }
}

/// True if the candidate pixels (shifted by the offset) keep a one-pixel
/// gap to everything already placed.
fn placement_is_free(
    occupancy: &[bool],
    canvas: usize,
    pixels: &[(usize, usize)],
    off_r: usize,
    off_c: usize,
) -> bool {
    for &(dr, dc) in pixels {
        let r = off_r + dr;
        let c = off_c + dc;
        for nr in r.saturating_sub(1)..=(r + 1).min(canvas - 1) {
            for nc in c.saturating_sub(1)..=(c + 1).min(canvas - 1) {
                if occupancy[nr * canvas + nc] {
                    return false;
                }
            }
        }
    }
    true
}

fn render_scene(cfg: &ShapeSceneConfig, index: u64) -> (Image, u32) {
    let mut rng = stream_rng(cfg.seed, StreamDomain::Scene, index);
    let mut img = render_background(cfg, &mut rng);
    let canvas = cfg.canvas;
    let mut occupancy = vec![false; canvas * canvas];
    let target = rng.random_range(cfg.count_range.0..=cfg.count_range.1);
    let mut placed = 0u32;
    'shapes: for _ in 0..target {
        for _attempt in 0..PLACEMENT_ATTEMPTS {
            let kind = cfg.kinds[rng.random_range(0..cfg.kinds.len())];
            let size = rng.random_range(cfg.size_range.0..=cfg.size_range.1);
            let max_off = canvas - size - 1;
            let off_r = rng.random_range(1..=max_off);
            let off_c = rng.random_range(1..=max_off);
            let pixels = raster_shape(kind, size);
            if placement_is_free(&occupancy, canvas, &pixels, off_r, off_c) {
                let color = shape_color(cfg, &mut rng);
                for &(dr, dc) in &pixels {
                    let (r, c) = (off_r + dr, off_c + dc);
                    occupancy[r * canvas + c] = true;
                    for ch in 0..3 {
                        img.set(r, c, ch, color[ch]);
                    }
                }
                placed += 1;
                continue 'shapes;
            }
        }
        // Scene is full; stop early and keep the count truthful.
        break;
    }
    // Quantize to the 8-bit grid so PNG round trips are lossless.
    for v in img.data_mut() {
        *v = (v.clamp(0.0, 1.0) * 255.0).round() / 255.0;
    }
    (img, placed)
}

/// Renders `n` scenes. Counts hold the number of shapes actually placed;
/// labels carry the shape-kind class when the config uses a single kind.
pub fn generate_shapes(cfg: &ShapeSceneConfig, n: usize) -> Result<LabeledDataset> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("scene count must be >= 1".into()));
    }
    let scenes: Vec<(Image, u32)> = (0..n as u64)
        .into_par_iter()
        .map(|i| render_scene(cfg, i))
        .collect();
    let counts: Vec<u32> = scenes.iter().map(|(_, c)| *c).collect();
    let images: Vec<Image> = scenes.into_iter().map(|(img, _)| img).collect();
    let labels = if cfg.kinds.len() == 1 {
        Some(vec![cfg.kinds[0].class_index(); n])
    } else {
        None
    };
    LabeledDataset::new(images, labels, Some(counts), Split::Train)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_cfg(seed: u64) -> ShapeSceneConfig {
        ShapeSceneConfig {
            canvas: 64,
            kinds: ShapeKind::ALL.to_vec(),
            count_range: (1, 8),
            size_range: (6, 12),
            color: ColorPolicy::Random,
            background: BackgroundPolicy::Flat([0.5, 0.5, 0.5]),
            seed,
        }
    }

    /// Oracle: 8-connected component count of non-background pixels.
    fn component_count(img: &Image, bg: [f64; 3]) -> u32 {
        let (h, w) = (img.height(), img.width());
        let bgq: Vec<f64> = bg
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() / 255.0)
            .collect();
        let is_fg = |r: usize, c: usize| -> bool {
            (0..3).any(|ch| (img.get(r, c, ch) - bgq[ch]).abs() > 1e-9)
        };
        let mut seen = vec![false; h * w];
        let mut components = 0;
        for r in 0..h {
            for c in 0..w {
                if !is_fg(r, c) || seen[r * w + c] {
                    continue;
                }
                components += 1;
                let mut stack = vec![(r, c)];
                seen[r * w + c] = true;
                while let Some((cr, cc)) = stack.pop() {
                    for nr in cr.saturating_sub(1)..=(cr + 1).min(h - 1) {
                        for nc in cc.saturating_sub(1)..=(cc + 1).min(w - 1) {
                            if !seen[nr * w + nc] && is_fg(nr, nc) {
                                seen[nr * w + nc] = true;
                                stack.push((nr, nc));
                            }
                        }
                    }
                }
            }
        }
        components
    }

    #[test]
    fn counts_match_component_oracle() {
        let cfg = base_cfg(123);
        let ds = generate_shapes(&cfg, 30).unwrap();
        let counts = ds.counts.as_ref().unwrap();
        for (img, &count) in ds.images.iter().zip(counts) {
            assert_eq!(component_count(img, [0.5, 0.5, 0.5]), count);
        }
    }

    #[test]
    fn forced_count_range() {
        let mut cfg = base_cfg(7);
        cfg.count_range = (3, 3);
        let ds = generate_shapes(&cfg, 5).unwrap();
        for &c in ds.counts.as_ref().unwrap() {
            assert!(c <= 3);
            // Placement at this density never falls back.
            assert_eq!(c, 3);
        }
    }

    #[test]
    fn same_seed_is_byte_identical() {
        let cfg = base_cfg(99);
        let a = generate_shapes(&cfg, 4).unwrap();
        let b = generate_shapes(&cfg, 4).unwrap();
        for (x, y) in a.images.iter().zip(&b.images) {
            assert_eq!(x.data(), y.data());
        }
        assert_eq!(a.counts, b.counts);
    }

    #[test]
    fn count_histogram_is_uniform() {
        let mut cfg = base_cfg(2024);
        cfg.canvas = 96;
        let n = 200;
        let ds = generate_shapes(&cfg, n).unwrap();
        let mut hist = [0usize; 8];
        for &c in ds.counts.as_ref().unwrap() {
            hist[(c - 1) as usize] += 1;
        }
        let expected = n as f64 / 8.0;
        let chi2: f64 = hist
            .iter()
            .map(|&o| {
                let d = o as f64 - expected;
                d * d / expected
            })
            .sum();
        // Oracle: chi-square critical value at p = 0.01, df = 7.
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let critical = ChiSquared::new(7.0).unwrap().inverse_cdf(0.99);
        assert!(
            chi2 < critical,
            "chi2 {chi2} exceeds critical {critical}: {hist:?}"
        );
    }

    #[test]
    fn single_kind_config_sets_labels() {
        let mut cfg = base_cfg(5);
        cfg.kinds = vec![ShapeKind::Triangle];
        let ds = generate_shapes(&cfg, 3).unwrap();
        assert_eq!(ds.labels, Some(vec![2, 2, 2]));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = base_cfg(1);
        cfg.count_range = (0, 3);
        assert!(cfg.validate().is_err());
        let mut cfg = base_cfg(1);
        cfg.size_range = (10, 70);
        assert!(cfg.validate().is_err());
    }
}
