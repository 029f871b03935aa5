//! Plain (ASCII, `P1`) portable bitmap reader and writer.
//!
//! PBM stores width before height and uses 1 for black, which matches the
//! foreground convention of [`BinaryImage`].

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::BinaryImage;

pub fn parse_pbm(text: &str) -> Result<BinaryImage> {
    let bytes = text.as_bytes();
    let mut pos = 0;

    if !text.starts_with("P1") {
        return Err(Error::Parse {
            offset: 0,
            message: "expected magic `P1`".into(),
        });
    }
    pos += 2;

    let cols = read_header_int(bytes, &mut pos)?;
    let rows = read_header_int(bytes, &mut pos)?;

    let mut pixels = Vec::with_capacity(rows * cols);
    loop {
        skip_space_and_comments(bytes, &mut pos);
        match bytes.get(pos) {
            None => break,
            Some(b'0') => pixels.push(0),
            Some(b'1') => pixels.push(1),
            Some(&b) => {
                return Err(Error::Parse {
                    offset: pos,
                    message: format!("unexpected byte {:?} in raster", b as char),
                })
            }
        }
        pos += 1;
    }
    if pixels.len() != rows * cols {
        return Err(Error::DimensionMismatch {
            expected: rows * cols,
            found: pixels.len(),
        });
    }
    BinaryImage::new(rows, cols, pixels)
}

fn skip_space_and_comments(bytes: &[u8], pos: &mut usize) {
    while let Some(&b) = bytes.get(*pos) {
        if b == b'#' {
            while let Some(&c) = bytes.get(*pos) {
                if c == b'\n' || c == b'\r' {
                    break;
                }
                *pos += 1;
            }
        } else if b.is_ascii_whitespace() {
            *pos += 1;
        } else {
            break;
        }
    }
}

fn read_header_int(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    let before = *pos;
    skip_space_and_comments(bytes, pos);
    if *pos == before && *pos < bytes.len() {
        return Err(Error::Parse {
            offset: *pos,
            message: "expected whitespace".into(),
        });
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(u8::is_ascii_digit) {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Parse {
            offset: start,
            message: "expected a decimal dimension".into(),
        });
    }
    let value: usize = std::str::from_utf8(&bytes[start..*pos])
        .expect("ascii digits")
        .parse()
        .map_err(|_| Error::Parse {
            offset: start,
            message: "dimension out of range".into(),
        })?;
    if value == 0 {
        return Err(Error::Parse {
            offset: start,
            message: "dimension must be positive".into(),
        });
    }
    Ok(value)
}

pub fn format_pbm(img: &BinaryImage) -> String {
    let mut out = format!("P1\n{} {}\n", img.cols(), img.rows());
    for r in 0..img.rows() {
        let line: Vec<&str> = img
            .row(r)
            .iter()
            .map(|&p| if p == 1 { "1" } else { "0" })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn load_pbm(path: impl AsRef<Path>) -> Result<BinaryImage> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pbm(&text)
}

pub fn save_pbm(img: &BinaryImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_pbm(img)).map_err(|e| Error::io(path, e))
}
