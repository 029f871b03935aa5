//! Celled projection.
//!
//! The image is cut into `k` equal strips across the scan direction. For a
//! horizontal projection each row gets one bit per strip, set when the row
//! holds at least one foreground pixel inside that strip. Bit
//! `cell * rows + row` of the output corresponds to `(row, cell)`, so the
//! vector is the concatenation of the per-cell row projections.

use super::bits::BitFeatureVector;
use crate::error::{Error, Result};
use crate::image::BinaryImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Rows are projected; cells split the columns.
    Horizontal,
    /// Columns are projected; cells split the rows.
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CelledProjectionConfig {
    pub k_horizontal: usize,
    pub k_vertical: usize,
}

impl CelledProjectionConfig {
    pub fn new(k_horizontal: usize, k_vertical: usize) -> Self {
        Self {
            k_horizontal,
            k_vertical,
        }
    }

    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if self.k_horizontal + self.k_vertical == 0 {
            return Err(Error::BadConfig(
                "celled projection needs at least one horizontal or vertical cell".into(),
            ));
        }
        if self.k_horizontal > 0 {
            check_cells(self.k_horizontal, cols)?;
        }
        if self.k_vertical > 0 {
            check_cells(self.k_vertical, rows)?;
        }
        Ok(())
    }

    pub fn output_len(&self, rows: usize, cols: usize) -> usize {
        rows * self.k_horizontal + cols * self.k_vertical
    }
}

fn check_cells(k: usize, dim: usize) -> Result<()> {
    if k == 0 || !dim.is_multiple_of(k) {
        return Err(Error::BadCellCount { k, dim });
    }
    Ok(())
}

/// Horizontal celled projection in a single pass: once a row hits
/// foreground inside a cell, the scan jumps to the start of the next cell.
pub fn celled_projection_h(img: &BinaryImage, k: usize) -> Result<BitFeatureVector> {
    let (m, n) = (img.rows(), img.cols());
    check_cells(k, n)?;
    let q = n / k;
    let mut out = BitFeatureVector::zeros(m * k);
    for i in 0..m {
        let row = img.row(i);
        let mut j = 0;
        while j < n {
            if row[j] == 1 {
                let cell = j / q;
                out.set(i + m * cell);
                j = (cell + 1) * q;
            } else {
                j += 1;
            }
        }
    }
    Ok(out)
}

/// Vertical celled projection; equal to the horizontal projection of the
/// transposed image, computed without materializing the transpose.
pub fn celled_projection_v(img: &BinaryImage, k: usize) -> Result<BitFeatureVector> {
    let (m, n) = (img.rows(), img.cols());
    check_cells(k, m)?;
    let q = m / k;
    let px = img.pixels();
    let mut out = BitFeatureVector::zeros(n * k);
    for c in 0..n {
        let mut i = 0;
        while i < m {
            if px[i * n + c] == 1 {
                let cell = i / q;
                out.set(c + n * cell);
                i = (cell + 1) * q;
            } else {
                i += 1;
            }
        }
    }
    Ok(out)
}

/// Direct evaluation of the defining OR over every pixel of every cell.
pub fn celled_projection_naive(
    img: &BinaryImage,
    k: usize,
    orientation: Orientation,
) -> Result<BitFeatureVector> {
    let (lines, span) = match orientation {
        Orientation::Horizontal => (img.rows(), img.cols()),
        Orientation::Vertical => (img.cols(), img.rows()),
    };
    check_cells(k, span)?;
    let q = span / k;
    let pixel = |line: usize, pos: usize| match orientation {
        Orientation::Horizontal => img.get(line, pos),
        Orientation::Vertical => img.get(pos, line),
    };
    let mut bits = Vec::with_capacity(lines * k);
    for cell in 0..k {
        for line in 0..lines {
            let mut any = 0;
            for j in 0..q {
                any |= pixel(line, cell * q + j);
            }
            bits.push(any == 1);
        }
    }
    Ok(BitFeatureVector::from_bits(bits))
}

/// Horizontal bits followed by vertical bits.
pub fn celled_projection(img: &BinaryImage, cfg: CelledProjectionConfig) -> Result<BitFeatureVector> {
    cfg.validate(img.rows(), img.cols())?;
    let mut out = if cfg.k_horizontal > 0 {
        celled_projection_h(img, cfg.k_horizontal)?
    } else {
        BitFeatureVector::zeros(0)
    };
    if cfg.k_vertical > 0 {
        out.extend(&celled_projection_v(img, cfg.k_vertical)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(v: &[u8]) -> BitFeatureVector {
        BitFeatureVector::from_bits(v.iter().map(|&b| b == 1))
    }

    fn identity4() -> BinaryImage {
        BinaryImage::from_ascii(
            "#...
             .#..
             ..#.
             ...#",
        )
    }

    #[test]
    fn horizontal_examples() {
        for f in [
            |i: &BinaryImage| celled_projection_h(i, 2).unwrap(),
            |i: &BinaryImage| celled_projection_naive(i, 2, Orientation::Horizontal).unwrap(),
        ] {
            assert_eq!(f(&BinaryImage::zeros(4, 4)), BitFeatureVector::zeros(8));
            assert_eq!(f(&BinaryImage::ones(4, 4)).count_ones(), 8);
            assert_eq!(f(&identity4()), bits(&[1, 1, 0, 0, 0, 0, 1, 1]));
        }
    }

    #[test]
    fn vertical_examples() {
        assert_eq!(
            celled_projection_v(&identity4(), 2).unwrap(),
            bits(&[1, 1, 0, 0, 0, 0, 1, 1])
        );
        assert_eq!(
            celled_projection_v(&BinaryImage::zeros(4, 4), 2).unwrap(),
            BitFeatureVector::zeros(8)
        );
        let mut dot = BinaryImage::zeros(4, 4);
        dot.set(0, 0, true);
        let v = celled_projection_v(&dot, 4).unwrap();
        assert_eq!(v.len(), 16);
        assert_eq!(v.count_ones(), 1);
        assert!(v.get(0));
    }

    #[test]
    fn combined_lengths() {
        let img = BinaryImage::ones(16, 16);
        assert_eq!(celled_projection(&img, CelledProjectionConfig::new(4, 4)).unwrap().len(), 128);
        assert_eq!(celled_projection(&img, CelledProjectionConfig::new(8, 0)).unwrap().len(), 128);
        let zero = celled_projection(&BinaryImage::zeros(16, 16), CelledProjectionConfig::new(4, 4)).unwrap();
        assert_eq!(zero.count_ones(), 0);
        assert_eq!(zero.len(), 128);
    }

    #[test]
    fn combined_puts_horizontal_first() {
        let mut img = BinaryImage::zeros(4, 8);
        img.set(1, 7, true);
        let v = celled_projection(&img, CelledProjectionConfig::new(2, 2)).unwrap();
        assert_eq!(v.len(), 4 * 2 + 8 * 2);
        let set: Vec<usize> = (0..v.len()).filter(|&b| v.get(b)).collect();
        // horizontal: row 1, cell 1 -> 1 + 4; vertical: column 7, cell 0 -> 8 + 7
        assert_eq!(set, vec![5, 15]);
    }

    #[test]
    fn bad_cell_counts() {
        let img = BinaryImage::zeros(4, 6);
        assert!(matches!(celled_projection_h(&img, 4), Err(Error::BadCellCount { k: 4, dim: 6 })));
        assert!(matches!(celled_projection_h(&img, 0), Err(Error::BadCellCount { .. })));
        assert!(matches!(celled_projection_v(&img, 3), Err(Error::BadCellCount { k: 3, dim: 4 })));
        assert!(matches!(
            celled_projection(&img, CelledProjectionConfig::new(0, 0)),
            Err(Error::BadConfig(_))
        ));
    }

    fn arb_image() -> impl Strategy<Value = BinaryImage> {
        (1usize..=4, 1usize..=4, 0.0f64..1.0, any::<u64>()).prop_map(|(a, b, density, seed)| {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (rows, cols) = (a * 8, b * 8);
            let px = (0..rows * cols).map(|_| u8::from(rng.gen_bool(density))).collect();
            BinaryImage::new(rows, cols, px).unwrap()
        })
    }

    proptest! {
        #[test]
        fn fast_matches_naive(img in arb_image(), k in prop::sample::select(vec![1usize, 2, 4, 8])) {
            prop_assert_eq!(
                celled_projection_h(&img, k).unwrap(),
                celled_projection_naive(&img, k, Orientation::Horizontal).unwrap()
            );
            prop_assert_eq!(
                celled_projection_v(&img, k).unwrap(),
                celled_projection_naive(&img, k, Orientation::Vertical).unwrap()
            );
            prop_assert_eq!(
                celled_projection_v(&img, k).unwrap(),
                celled_projection_h(&img.transpose(), k).unwrap()
            );
        }

        #[test]
        fn adding_ink_never_clears_bits(img in arb_image(), r in 0usize..8, c in 0usize..8) {
            let before = celled_projection(&img, CelledProjectionConfig::new(4, 4)).unwrap();
            let mut more = img.clone();
            more.set(r, c, true);
            let after = celled_projection(&more, CelledProjectionConfig::new(4, 4)).unwrap();
            for b in 0..before.len() {
                prop_assert!(!before.get(b) || after.get(b));
            }
        }
    }
}
