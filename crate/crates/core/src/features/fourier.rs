//! Low-frequency magnitudes of the 2-D discrete Fourier transform.
//!
//! Only the 8x8 window of frequencies around DC is evaluated, directly from
//! the DFT sum with precomputed twiddle tables. Magnitudes make the result
//! invariant to cyclic translation of the image.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::image::BinaryImage;

/// Side of the centered frequency window.
pub const WINDOW: usize = 8;

/// Output length.
pub const FOURIER_LEN: usize = WINDOW * WINDOW;

const HALF: isize = (WINDOW / 2) as isize;

/// `|F(u, v)|` for `u, v` in `-4..=3` (taken modulo the image size),
/// row-major with `(-4, -4)` first; DC sits at index 36. `u` is the row
/// frequency and `v` the column frequency.
pub fn fourier_low(img: &BinaryImage) -> Result<Vec<f64>> {
    let (m, n) = (img.rows(), img.cols());
    if m < WINDOW || n < WINDOW {
        return Err(Error::ImageTooSmall {
            rows: m,
            cols: n,
            min: WINDOW,
        });
    }

    // Row-direction transform first: G(x, v) = sum_y f(x, y) e^{-2 pi i v y / n}
    let col_twiddle = twiddles(n);
    let mut partial = vec![(0.0, 0.0); m * WINDOW];
    for x in 0..m {
        let row = img.row(x);
        for (wv, v) in (-HALF..HALF).enumerate() {
            let v = v.rem_euclid(n as isize) as usize;
            let (mut re, mut im) = (0.0, 0.0);
            for (y, &p) in row.iter().enumerate() {
                if p == 1 {
                    let (c, s) = col_twiddle[(v * y) % n];
                    re += c;
                    im += s;
                }
            }
            partial[x * WINDOW + wv] = (re, im);
        }
    }

    let row_twiddle = twiddles(m);
    let mut out = Vec::with_capacity(FOURIER_LEN);
    for u in -HALF..HALF {
        let u = u.rem_euclid(m as isize) as usize;
        for wv in 0..WINDOW {
            let (mut re, mut im) = (0.0, 0.0);
            for x in 0..m {
                let (a, b) = partial[x * WINDOW + wv];
                let (c, s) = row_twiddle[(u * x) % m];
                re += a * c - b * s;
                im += a * s + b * c;
            }
            out.push(re.hypot(im));
        }
    }
    Ok(out)
}

/// `e^{-2 pi i t / len}` for `t` in `0..len`, as `(cos, sin)` pairs.
fn twiddles(len: usize) -> Vec<(f64, f64)> {
    (0..len)
        .map(|t| {
            let angle = -2.0 * PI * t as f64 / len as f64;
            (angle.cos(), angle.sin())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Full DFT straight from the definition, one coefficient at a time.
    fn dft_coefficient(img: &BinaryImage, u: usize, v: usize) -> f64 {
        let (m, n) = (img.rows(), img.cols());
        let (mut re, mut im) = (0.0, 0.0);
        for x in 0..m {
            for y in 0..n {
                if img.get(x, y) == 1 {
                    let a = -2.0 * PI * (u as f64 * x as f64 / m as f64 + v as f64 * y as f64 / n as f64);
                    re += a.cos();
                    im += a.sin();
                }
            }
        }
        re.hypot(im)
    }

    #[test]
    fn matches_definition() {
        let img = BinaryImage::from_ascii(
            "..........
             ..####....
             .#....#...
             .#....#...
             ..####....
             ......#...
             ......#...
             ..###.....
             ..........",
        );
        let got = fourier_low(&img).unwrap();
        for (i, u) in (-4isize..4).enumerate() {
            for (j, v) in (-4isize..4).enumerate() {
                let want = dft_coefficient(
                    &img,
                    u.rem_euclid(img.rows() as isize) as usize,
                    v.rem_euclid(img.cols() as isize) as usize,
                );
                assert!((got[i * 8 + j] - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn constant_images() {
        assert_eq!(fourier_low(&BinaryImage::zeros(16, 16)).unwrap(), vec![0.0; 64]);
        let ones = fourier_low(&BinaryImage::ones(16, 16)).unwrap();
        for (i, &v) in ones.iter().enumerate() {
            if i == 36 {
                assert!((v - 256.0).abs() < 1e-9);
            } else {
                assert!(v.abs() < 1e-9, "index {i} = {v}");
            }
        }
    }

    #[test]
    fn cyclic_shift_invariance() {
        let img = BinaryImage::from_ascii(
            "#.......#...
             .##.....#...
             ...#...##...
             ....####....
             ............
             ..#.........
             ..#....#....
             ..######....",
        );
        let a = fourier_low(&img).unwrap();
        let b = fourier_low(&img.cyclic_shift(2, 3)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn too_small() {
        assert!(matches!(
            fourier_low(&BinaryImage::ones(7, 16)),
            Err(Error::ImageTooSmall { rows: 7, cols: 16, min: 8 })
        ));
    }
}
