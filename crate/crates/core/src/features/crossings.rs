use crate::image::BinaryImage;

/// Background-to-foreground transitions per row (left to right), then per
/// column (top to bottom). The image is treated as surrounded by
/// background, so each entry is the number of strokes the scan line crosses.
pub fn crossings(img: &BinaryImage) -> Vec<f64> {
    let (m, n) = (img.rows(), img.cols());
    let mut out = Vec::with_capacity(m + n);
    for r in 0..m {
        out.push(count_rises(img.row(r).iter().copied()) as f64);
    }
    for c in 0..n {
        out.push(count_rises((0..m).map(|r| img.get(r, c))) as f64);
    }
    out
}

fn count_rises(line: impl Iterator<Item = u8>) -> usize {
    let mut prev = 0;
    let mut rises = 0;
    for p in line {
        if prev == 0 && p == 1 {
            rises += 1;
        }
        prev = p;
    }
    rises
}
