//! Gray and binary raster images, thresholding and bounding-rectangle
//! normalization.

use crate::error::{Error, Result};

/// 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    rows: usize,
    cols: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(rows: usize, cols: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: pixels.len(),
            });
        }
        Ok(Self { rows, cols, pixels })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }
}

/// Which side of the threshold counts as ink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Polarity {
    /// Foreground is `intensity < threshold` (dark ink on a light background).
    #[default]
    DarkForeground,
    /// Foreground is `intensity >= threshold` (light ink on dark background).
    LightForeground,
}

/// Binary image: 1 is foreground, 0 is background. Row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    rows: usize,
    cols: usize,
    pixels: Vec<u8>,
}

/// Inclusive, 0-based rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub top: usize,
    pub left: usize,
    pub bottom: usize,
    pub right: usize,
}

impl Rect {
    pub fn height(&self) -> usize {
        self.bottom - self.top + 1
    }

    pub fn width(&self) -> usize {
        self.right - self.left + 1
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        (self.top..=self.bottom).contains(&row) && (self.left..=self.right).contains(&col)
    }
}

impl BinaryImage {
    /// Builds an image from row-major pixels; every value must be 0 or 1.
    pub fn new(rows: usize, cols: usize, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: pixels.len(),
            });
        }
        if let Some(pos) = pixels.iter().position(|&p| p > 1) {
            return Err(Error::Parse {
                offset: pos,
                message: format!("pixel value {} is not 0 or 1", pixels[pos]),
            });
        }
        Ok(Self { rows, cols, pixels })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            pixels: vec![0; rows * cols],
        }
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            pixels: vec![1; rows * cols],
        }
    }

    /// Builds an image from rows of nonzero/zero values.
    ///
    /// Panics if the rows are ragged.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut pixels = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            pixels.extend(r.iter().map(|&p| u8::from(p != 0)));
        }
        Self {
            rows: rows.len(),
            cols,
            pixels,
        }
    }

    /// Parses an ASCII picture where `#`, `X`, `1` or `*` mark foreground.
    pub fn from_ascii(art: &str) -> Self {
        let lines: Vec<Vec<u8>> = art
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.bytes()
                    .map(|b| u8::from(matches!(b, b'#' | b'X' | b'1' | b'*')))
                    .collect()
            })
            .collect();
        Self::from_rows(&lines)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.pixels[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.pixels[row * self.cols + col] = u8::from(value);
    }

    pub fn row(&self, row: usize) -> &[u8] {
        &self.pixels[row * self.cols..(row + 1) * self.cols]
    }

    pub fn foreground_count(&self) -> usize {
        self.pixels.iter().map(|&p| p as usize).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.pixels[c * self.rows + r] = self.get(r, c);
            }
        }
        out
    }

    /// Rotates a quarter turn counter-clockwise.
    pub fn rotate90(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.pixels[(self.cols - 1 - c) * self.rows + r] = self.get(r, c);
            }
        }
        out
    }

    /// Surrounds the image with background margins.
    pub fn pad(&self, top: usize, left: usize, bottom: usize, right: usize) -> Self {
        let mut out = Self::zeros(self.rows + top + bottom, self.cols + left + right);
        for r in 0..self.rows {
            let dst = (r + top) * out.cols + left;
            out.pixels[dst..dst + self.cols].copy_from_slice(self.row(r));
        }
        out
    }

    /// Cyclic translation by `(dr, dc)`.
    pub fn cyclic_shift(&self, dr: usize, dc: usize) -> Self {
        let mut out = Self::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.pixels[((r + dr) % self.rows) * self.cols + (c + dc) % self.cols] =
                    self.get(r, c);
            }
        }
        out
    }

    pub fn crop(&self, rect: Rect) -> Self {
        let mut out = Self::zeros(rect.height(), rect.width());
        for r in 0..rect.height() {
            let src = (rect.top + r) * self.cols + rect.left;
            out.pixels[r * out.cols..(r + 1) * out.cols]
                .copy_from_slice(&self.pixels[src..src + rect.width()]);
        }
        out
    }
}

/// Thresholds a gray image.
pub fn binarize(img: &GrayImage, threshold: u8, polarity: Polarity) -> BinaryImage {
    let pixels = img
        .pixels
        .iter()
        .map(|&v| match polarity {
            Polarity::DarkForeground => u8::from(v < threshold),
            Polarity::LightForeground => u8::from(v >= threshold),
        })
        .collect();
    BinaryImage {
        rows: img.rows,
        cols: img.cols,
        pixels,
    }
}

/// Minimal rectangle holding every foreground pixel.
pub fn bounding_rect(img: &BinaryImage) -> Result<Rect> {
    let mut rect: Option<Rect> = None;
    for r in 0..img.rows {
        for (c, &p) in img.row(r).iter().enumerate() {
            if p == 0 {
                continue;
            }
            rect = Some(match rect {
                None => Rect {
                    top: r,
                    left: c,
                    bottom: r,
                    right: c,
                },
                Some(b) => Rect {
                    top: b.top,
                    left: b.left.min(c),
                    bottom: r,
                    right: b.right.max(c),
                },
            });
        }
    }
    rect.ok_or(Error::EmptyImage)
}

/// Crops to the bounding rectangle and resamples to the target size with
/// nearest-neighbor mapping: output `(i, j)` reads cropped pixel
/// `(i*h/target_rows, j*w/target_cols)`.
pub fn normalize(img: &BinaryImage, target_rows: usize, target_cols: usize) -> Result<BinaryImage> {
    if target_rows == 0 || target_cols == 0 {
        return Err(Error::BadConfig(format!(
            "normalization target {target_rows}x{target_cols} must be positive"
        )));
    }
    let rect = bounding_rect(img)?;
    let (h, w) = (rect.height(), rect.width());
    let mut out = BinaryImage::zeros(target_rows, target_cols);
    for i in 0..target_rows {
        let sr = rect.top + i * h / target_rows;
        for j in 0..target_cols {
            let sc = rect.left + j * w / target_cols;
            out.pixels[i * target_cols + j] = img.get(sr, sc);
        }
    }
    Ok(out)
}
