//! Pixel-count features: projection histograms and zone densities.

use crate::error::{Error, Result};
use crate::image::BinaryImage;

/// Row sums followed by column sums.
pub fn projection_histograms(img: &BinaryImage) -> Vec<f64> {
    let (m, n) = (img.rows(), img.cols());
    let mut out = vec![0.0; m + n];
    for r in 0..m {
        for (c, &p) in img.row(r).iter().enumerate() {
            if p == 1 {
                out[r] += 1.0;
                out[m + c] += 1.0;
            }
        }
    }
    out
}

/// Foreground density of each zone of a regular `grid_rows x grid_cols`
/// grid, row-major.
pub fn zoning(img: &BinaryImage, grid_rows: usize, grid_cols: usize) -> Result<Vec<f64>> {
    let (m, n) = (img.rows(), img.cols());
    if grid_rows == 0 || grid_cols == 0 || m % grid_rows != 0 || n % grid_cols != 0 {
        return Err(Error::BadGrid {
            grid_rows,
            grid_cols,
            rows: m,
            cols: n,
        });
    }
    let (zh, zw) = (m / grid_rows, n / grid_cols);
    let mut counts = vec![0usize; grid_rows * grid_cols];
    for r in 0..m {
        for (c, &p) in img.row(r).iter().enumerate() {
            counts[(r / zh) * grid_cols + c / zw] += p as usize;
        }
    }
    let area = (zh * zw) as f64;
    Ok(counts.into_iter().map(|c| c as f64 / area).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity4() -> BinaryImage {
        BinaryImage::from_ascii(
            "#...
             .#..
             ..#.
             ...#",
        )
    }

    #[test]
    fn histogram_examples() {
        assert_eq!(projection_histograms(&identity4()), vec![1.0; 8]);
        let ones = projection_histograms(&BinaryImage::ones(3, 5));
        assert_eq!(ones, [vec![5.0; 3], vec![3.0; 5]].concat());
        assert_eq!(projection_histograms(&BinaryImage::zeros(2, 2)), vec![0.0; 4]);
    }

    #[test]
    fn zoning_examples() {
        assert_eq!(zoning(&identity4(), 2, 2).unwrap(), vec![0.5, 0.0, 0.0, 0.5]);
        assert_eq!(zoning(&BinaryImage::ones(6, 9), 3, 3).unwrap(), vec![1.0; 9]);
        let mut img = BinaryImage::zeros(16, 16);
        img.set(0, 0, true);
        img.set(15, 15, true);
        img.set(14, 15, true);
        let z = zoning(&img, 4, 4).unwrap();
        assert_eq!(z.len(), 16);
        assert_eq!(z[0], 1.0 / 16.0);
        assert_eq!(z[15], 2.0 / 16.0);
        assert!(matches!(zoning(&img, 3, 3), Err(Error::BadGrid { .. })));
    }
}
