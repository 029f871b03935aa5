//! Central moments and Hu's rotation invariants.
//!
//! Coordinates: `x` is the 0-based column, `y` the 0-based row.

use crate::error::{Error, Result};
use crate::image::BinaryImage;

/// `(p, q)` orders of the fifteen central moments, in output order.
pub const CENTRAL_ORDERS: [(u32, u32); 15] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (1, 1),
    (2, 0),
    (0, 2),
    (2, 2),
    (3, 0),
    (0, 3),
    (2, 1),
    (1, 2),
    (3, 1),
    (1, 3),
    (4, 0),
    (0, 4),
];

struct Centered {
    /// Foreground pixel offsets from the centroid.
    points: Vec<(f64, f64)>,
}

impl Centered {
    fn new(img: &BinaryImage) -> Result<Self> {
        let mut raw = Vec::new();
        for y in 0..img.rows() {
            for (x, &p) in img.row(y).iter().enumerate() {
                if p == 1 {
                    raw.push((x as f64, y as f64));
                }
            }
        }
        if raw.is_empty() {
            return Err(Error::EmptyImage);
        }
        let m00 = raw.len() as f64;
        let xbar = raw.iter().map(|p| p.0).sum::<f64>() / m00;
        let ybar = raw.iter().map(|p| p.1).sum::<f64>() / m00;
        Ok(Self {
            points: raw.into_iter().map(|(x, y)| (x - xbar, y - ybar)).collect(),
        })
    }

    fn mu(&self, p: u32, q: u32) -> f64 {
        self.points
            .iter()
            .map(|&(dx, dy)| dx.powi(p as i32) * dy.powi(q as i32))
            .sum()
    }

    fn eta(&self, p: u32, q: u32) -> f64 {
        let m00 = self.points.len() as f64;
        self.mu(p, q) / m00.powf(1.0 + (p + q) as f64 / 2.0)
    }
}

/// The fifteen central moments in [`CENTRAL_ORDERS`] order.
pub fn central_moments(img: &BinaryImage) -> Result<Vec<f64>> {
    let c = Centered::new(img)?;
    Ok(CENTRAL_ORDERS.iter().map(|&(p, q)| c.mu(p, q)).collect())
}

/// Hu's seven invariants of the scale-normalized central moments.
pub fn hu_moments(img: &BinaryImage) -> Result<Vec<f64>> {
    let c = Centered::new(img)?;
    let (n20, n02, n11) = (c.eta(2, 0), c.eta(0, 2), c.eta(1, 1));
    let (n30, n03, n21, n12) = (c.eta(3, 0), c.eta(0, 3), c.eta(2, 1), c.eta(1, 2));

    let a = n30 + n12;
    let b = n21 + n03;
    let d = n30 - 3.0 * n12;
    let e = 3.0 * n21 - n03;

    Ok(vec![
        n20 + n02,
        (n20 - n02).powi(2) + 4.0 * n11 * n11,
        d * d + e * e,
        a * a + b * b,
        d * a * (a * a - 3.0 * b * b) + e * b * (3.0 * a * a - b * b),
        (n20 - n02) * (a * a - b * b) + 4.0 * n11 * a * b,
        e * a * (a * a - 3.0 * b * b) - d * b * (3.0 * a * a - b * b),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn glyph() -> BinaryImage {
        BinaryImage::from_ascii(
            ".###....
             #...#...
             ....#...
             ...#....
             ..#.....
             .#......
             #####...",
        )
    }

    #[test]
    fn first_order_moments_vanish() {
        let m = central_moments(&glyph()).unwrap();
        assert!(m[1].abs() < 1e-9 && m[2].abs() < 1e-9);
    }

    #[test]
    fn single_pixel() {
        let mut img = BinaryImage::zeros(5, 5);
        img.set(3, 1, true);
        let m = central_moments(&img).unwrap();
        assert_eq!(m[0], 1.0);
        assert!(m[1..].iter().all(|&v| v == 0.0));
        assert!(hu_moments(&img).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_pixels() {
        let img = BinaryImage::from_ascii("#.#");
        let m = central_moments(&img).unwrap();
        assert_eq!(m[0], 2.0);
        assert_eq!(m[4], 2.0); // mu20
        assert_eq!(m[5], 0.0); // mu02
        assert_eq!(m[3], 0.0); // mu11
    }

    #[test]
    fn translation_invariance() {
        let a = central_moments(&glyph()).unwrap();
        let b = central_moments(&glyph().pad(5, 3, 1, 9)).unwrap();
        assert!(close(&a, &b, 1e-9));
        let a = hu_moments(&glyph()).unwrap();
        let b = hu_moments(&glyph().pad(2, 7, 0, 0)).unwrap();
        assert!(close(&a, &b, 1e-9));
    }

    #[test]
    fn hu_rotation_invariance() {
        let img = glyph();
        let base = hu_moments(&img).unwrap();
        let mut rotated = img.clone();
        for _ in 0..3 {
            rotated = rotated.rotate90();
            assert!(close(&base, &hu_moments(&rotated).unwrap(), 1e-9));
        }
    }

    #[test]
    fn empty_image() {
        assert!(matches!(central_moments(&BinaryImage::zeros(4, 4)), Err(Error::EmptyImage)));
        assert!(matches!(hu_moments(&BinaryImage::zeros(4, 4)), Err(Error::EmptyImage)));
    }
}
