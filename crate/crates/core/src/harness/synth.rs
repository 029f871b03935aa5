//! Synthetic handwriting-like samples from per-class glyph templates.
//!
//! Every sample is its class template rotated about the centroid, sheared
//! horizontally, hit by independent pixel flips, thickened or thinned, and
//! finally normalized to the target size.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::image::{normalize, BinaryImage};
use crate::pbm::{load_pbm, parse_pbm};

const MAX_ATTEMPTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub per_class: usize,
    /// Rotation angle is drawn uniformly from `[-max_rotation_deg, max_rotation_deg]`.
    pub max_rotation_deg: f64,
    /// Horizontal shear factor is drawn uniformly from `[-max_shear, max_shear]`.
    pub max_shear: f64,
    /// Independent per-pixel flip probability.
    pub noise: f64,
    /// Morphology steps drawn uniformly from `-morph_steps..=morph_steps`;
    /// negative steps erode, positive steps dilate.
    pub morph_steps: u32,
    /// Output side length.
    pub size: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            per_class: 300,
            max_rotation_deg: 15.0,
            max_shear: 0.2,
            noise: 0.03,
            morph_steps: 1,
            size: 16,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.2).contains(&self.noise) {
            return Err(Error::BadConfig(format!("noise {} outside [0, 0.2]", self.noise)));
        }
        if !(0.0..=30.0).contains(&self.max_rotation_deg) {
            return Err(Error::BadConfig(format!(
                "rotation range ±{} exceeds ±30 degrees",
                self.max_rotation_deg
            )));
        }
        if !(self.max_shear >= 0.0 && self.max_shear.is_finite()) {
            return Err(Error::BadConfig(format!("bad shear range {}", self.max_shear)));
        }
        if self.size == 0 {
            return Err(Error::BadConfig("output size must be positive".into()));
        }
        Ok(())
    }
}

const BUILTIN: [&str; 10] = [
    include_str!("../../templates/digit0.pbm"),
    include_str!("../../templates/digit1.pbm"),
    include_str!("../../templates/digit2.pbm"),
    include_str!("../../templates/digit3.pbm"),
    include_str!("../../templates/digit4.pbm"),
    include_str!("../../templates/digit5.pbm"),
    include_str!("../../templates/digit6.pbm"),
    include_str!("../../templates/digit7.pbm"),
    include_str!("../../templates/digit8.pbm"),
    include_str!("../../templates/digit9.pbm"),
];

/// The ten 16x16 digit glyphs shipped with the crate.
pub fn builtin_templates() -> Vec<BinaryImage> {
    BUILTIN
        .iter()
        .map(|t| parse_pbm(t).expect("bundled template parses"))
        .collect()
}

/// Loads every `.pbm` in `dir`, sorted by file name; the i-th file is
/// the template of class i.
pub fn load_templates(dir: impl AsRef<Path>) -> Result<Vec<BinaryImage>> {
    let dir = dir.as_ref();
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pbm"))
        .collect();
    paths.sort();
    paths.iter().map(load_pbm).collect()
}

/// Generates `per_class` samples for each template, class by class.
pub fn synth_generate(templates: &[BinaryImage], cfg: &SynthConfig) -> Result<LabeledDataset> {
    cfg.validate()?;
    if templates.is_empty() {
        return Err(Error::BadConfig("no templates".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = LabeledDataset::new("synthetic", templates.len());
    for (class, template) in templates.iter().enumerate() {
        let base = normalize(template, cfg.size, cfg.size)?;
        for _ in 0..cfg.per_class {
            let mut sample = None;
            for _ in 0..MAX_ATTEMPTS {
                let distorted = distort(&base, cfg, &mut rng);
                if let Ok(img) = normalize(&distorted, cfg.size, cfg.size) {
                    sample = Some(img);
                    break;
                }
            }
            out.push(sample.ok_or(Error::EmptyImage)?, class)?;
        }
    }
    Ok(out)
}

/// One random distortion of `img`, before normalization.
pub fn distort(img: &BinaryImage, cfg: &SynthConfig, rng: &mut impl Rng) -> BinaryImage {
    let angle = symmetric(rng, cfg.max_rotation_deg).to_radians();
    let shear = symmetric(rng, cfg.max_shear);
    let mut out = affine(img, angle, shear);
    if cfg.noise > 0.0 {
        for r in 0..out.rows() {
            for c in 0..out.cols() {
                if rng.gen_bool(cfg.noise) {
                    let flipped = out.get(r, c) == 0;
                    out.set(r, c, flipped);
                }
            }
        }
    }
    if cfg.morph_steps > 0 {
        let steps = rng.gen_range(-(cfg.morph_steps as i64)..=cfg.morph_steps as i64);
        for _ in 0..steps.unsigned_abs() {
            out = if steps > 0 { dilate(&out) } else { erode(&out) };
        }
    }
    out
}

fn symmetric(rng: &mut impl Rng, max: f64) -> f64 {
    if max > 0.0 {
        rng.gen_range(-max..=max)
    } else {
        0.0
    }
}

/// Rotation about the foreground centroid followed by horizontal shear,
/// resampled by nearest neighbour onto a canvas padded just enough to hold
/// the moved frame. The identity transform returns the input unchanged.
fn affine(img: &BinaryImage, angle: f64, shear: f64) -> BinaryImage {
    if angle == 0.0 && shear == 0.0 {
        return img.clone();
    }
    let (h, w) = (img.rows() as f64, img.cols() as f64);
    let count = img.foreground_count().max(1) as f64;
    let (mut cx, mut cy) = (0.0, 0.0);
    for r in 0..img.rows() {
        for c in 0..img.cols() {
            if img.get(r, c) == 1 {
                cx += c as f64 + 0.5;
                cy += r as f64 + 0.5;
            }
        }
    }
    if img.foreground_count() == 0 {
        cx = w / 2.0;
        cy = h / 2.0;
    } else {
        cx /= count;
        cy /= count;
    }

    let (sin, cos) = angle.sin_cos();
    // forward map on offsets from the centroid: shear after rotation
    let forward = |dx: f64, dy: f64| {
        let rx = cos * dx - sin * dy;
        let ry = sin * dx + cos * dy;
        (rx + shear * ry, ry)
    };
    let inverse = |qx: f64, qy: f64| {
        let rx = qx - shear * qy;
        let ry = qy;
        (cos * rx + sin * ry, -sin * rx + cos * ry)
    };

    let mut margin: f64 = 0.0;
    for (x, y) in [(0.0, 0.0), (w, 0.0), (0.0, h), (w, h)] {
        let (dx, dy) = (x - cx, y - cy);
        let (fx, fy) = forward(dx, dy);
        margin = margin.max((fx - dx).abs()).max((fy - dy).abs());
    }
    let m = margin.ceil() as usize;
    let mut out = BinaryImage::zeros(img.rows() + 2 * m, img.cols() + 2 * m);
    for r in 0..out.rows() {
        for c in 0..out.cols() {
            let qx = c as f64 + 0.5 - m as f64 - cx;
            let qy = r as f64 + 0.5 - m as f64 - cy;
            let (dx, dy) = inverse(qx, qy);
            let (sx, sy) = ((dx + cx).floor(), (dy + cy).floor());
            if sx >= 0.0 && sy >= 0.0 && sx < w && sy < h && img.get(sy as usize, sx as usize) == 1 {
                out.set(r, c, true);
            }
        }
    }
    out
}

/// Dilation by a 2x2 square anchored at the bottom-right pixel.
fn dilate(img: &BinaryImage) -> BinaryImage {
    let mut out = BinaryImage::zeros(img.rows(), img.cols());
    for r in 0..img.rows() {
        for c in 0..img.cols() {
            let hit = img.get(r, c) == 1
                || (r > 0 && img.get(r - 1, c) == 1)
                || (c > 0 && img.get(r, c - 1) == 1)
                || (r > 0 && c > 0 && img.get(r - 1, c - 1) == 1);
            out.set(r, c, hit);
        }
    }
    out
}

/// Erosion by a 2x2 square anchored at the top-left pixel.
fn erode(img: &BinaryImage) -> BinaryImage {
    let mut out = BinaryImage::zeros(img.rows(), img.cols());
    for r in 0..img.rows() {
        for c in 0..img.cols() {
            let keep = img.get(r, c) == 1
                && r + 1 < img.rows()
                && c + 1 < img.cols()
                && img.get(r + 1, c) == 1
                && img.get(r, c + 1) == 1
                && img.get(r + 1, c + 1) == 1;
            out.set(r, c, keep);
        }
    }
    out
}
