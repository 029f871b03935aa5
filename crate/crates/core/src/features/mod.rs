//! Feature extractors for binary character images.
//!
//! Every extractor is a pure function of the image. Celled projection
//! produces a packed [`BitFeatureVector`]; the others produce real vectors.

mod bits;
mod celled;
mod crossings;
mod density;
mod fourier;
mod moments;

use std::fmt;
use std::str::FromStr;

pub use bits::{hamming_distance, BitFeatureVector};
pub(crate) use bits::hamming_words;
pub use celled::{
    celled_projection, celled_projection_h, celled_projection_naive, celled_projection_v,
    CelledProjectionConfig, Orientation,
};
pub use crossings::crossings;
pub use density::{projection_histograms, zoning};
pub use fourier::{fourier_low, FOURIER_LEN};
pub use moments::{central_moments, hu_moments, CENTRAL_ORDERS};

use crate::error::{Error, Result};
use crate::image::BinaryImage;

/// A feature extractor together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    CelledProjection(CelledProjectionConfig),
    Crossings,
    Fourier,
    Moments,
    Hu,
    Histograms,
    Zoning { rows: usize, cols: usize },
}

impl FeatureKind {
    pub const NAMES: [&'static str; 7] = ["cp", "crossings", "fourier", "moments", "hu", "hist", "zoning"];

    /// Parses a feature name and a `key=value,...` parameter string. An
    /// empty string or `-` selects the defaults (`kh=4,kv=4` for `cp`,
    /// `rows=4,cols=4` for `zoning`).
    pub fn parse(name: &str, params: &str) -> Result<Self> {
        let bad = || Error::BadParams {
            feature: name.to_string(),
            params: params.to_string(),
        };
        let mut pairs = Vec::new();
        let trimmed = params.trim();
        if !trimmed.is_empty() && trimmed != "-" {
            for item in trimmed.split(',') {
                let (k, v) = item.split_once('=').ok_or_else(bad)?;
                let v: usize = v.trim().parse().map_err(|_| bad())?;
                pairs.push((k.trim().to_string(), v));
            }
        }
        let take = |pairs: &[(String, usize)], allowed: &[&str]| -> Result<Vec<Option<usize>>> {
            if pairs.iter().any(|(k, _)| !allowed.contains(&k.as_str())) {
                return Err(bad());
            }
            Ok(allowed
                .iter()
                .map(|a| pairs.iter().rev().find(|(k, _)| k == a).map(|p| p.1))
                .collect())
        };
        let kind = match name {
            "cp" => {
                let v = take(&pairs, &["kh", "kv"])?;
                let cfg = match (v[0], v[1]) {
                    (None, None) => CelledProjectionConfig::new(4, 4),
                    (h, v) => CelledProjectionConfig::new(h.unwrap_or(0), v.unwrap_or(0)),
                };
                if cfg.k_horizontal + cfg.k_vertical == 0 {
                    return Err(bad());
                }
                FeatureKind::CelledProjection(cfg)
            }
            "zoning" => {
                let v = take(&pairs, &["rows", "cols"])?;
                let rows = v[0].unwrap_or(4);
                let cols = v[1].unwrap_or(rows);
                if rows == 0 || cols == 0 {
                    return Err(bad());
                }
                FeatureKind::Zoning { rows, cols }
            }
            "crossings" | "fourier" | "moments" | "hu" | "hist" => {
                take(&pairs, &[])?;
                match name {
                    "crossings" => FeatureKind::Crossings,
                    "fourier" => FeatureKind::Fourier,
                    "moments" => FeatureKind::Moments,
                    "hu" => FeatureKind::Hu,
                    _ => FeatureKind::Histograms,
                }
            }
            other => return Err(Error::UnknownFeature(other.to_string())),
        };
        Ok(kind)
    }

    pub fn name(&self) -> &'static str {
        match self {
            FeatureKind::CelledProjection(_) => "cp",
            FeatureKind::Crossings => "crossings",
            FeatureKind::Fourier => "fourier",
            FeatureKind::Moments => "moments",
            FeatureKind::Hu => "hu",
            FeatureKind::Histograms => "hist",
            FeatureKind::Zoning { .. } => "zoning",
        }
    }

    /// Canonical parameter string; `-` when the feature has none.
    pub fn params(&self) -> String {
        match self {
            FeatureKind::CelledProjection(c) => format!("kh={},kv={}", c.k_horizontal, c.k_vertical),
            FeatureKind::Zoning { rows, cols } => format!("rows={rows},cols={cols}"),
            _ => "-".to_string(),
        }
    }

    /// Filesystem-safe identifier.
    pub fn slug(&self) -> String {
        match self {
            FeatureKind::CelledProjection(c) => format!("cp-h{}v{}", c.k_horizontal, c.k_vertical),
            FeatureKind::Zoning { rows, cols } => format!("zoning-{rows}x{cols}"),
            other => other.name().to_string(),
        }
    }

    /// Human-readable feature family and parameter labels.
    pub fn display(&self) -> (&'static str, String) {
        match self {
            FeatureKind::CelledProjection(c) => {
                let label = match (c.k_horizontal, c.k_vertical) {
                    (h, 0) => format!("{h} Horizontal"),
                    (0, v) => format!("{v} Vertical"),
                    (h, v) => format!("{h} Horizontal & {v} Vertical"),
                };
                ("Celled Projections", label)
            }
            FeatureKind::Crossings => ("Crossings", "Horizontal & Vertical".into()),
            FeatureKind::Fourier => ("Fourier Transforms", format!("{FOURIER_LEN} Low Frequency")),
            FeatureKind::Moments => ("Moments", "15 Central Moments".into()),
            FeatureKind::Hu => ("Moments", "7 Hu Moments".into()),
            FeatureKind::Histograms => ("Projection Histograms", "Horizontal & Vertical".into()),
            FeatureKind::Zoning { rows, cols } => ("Zoning", format!("{rows} × {cols}")),
        }
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, FeatureKind::CelledProjection(_))
    }

    /// Output length for an image of the given size, after validating the
    /// parameters against it.
    pub fn output_len(&self, rows: usize, cols: usize) -> Result<usize> {
        Ok(match self {
            FeatureKind::CelledProjection(c) => {
                c.validate(rows, cols)?;
                c.output_len(rows, cols)
            }
            FeatureKind::Crossings | FeatureKind::Histograms => rows + cols,
            FeatureKind::Fourier => {
                if rows < 8 || cols < 8 {
                    return Err(Error::ImageTooSmall { rows, cols, min: 8 });
                }
                FOURIER_LEN
            }
            FeatureKind::Moments => CENTRAL_ORDERS.len(),
            FeatureKind::Hu => 7,
            FeatureKind::Zoning { rows: gr, cols: gc } => {
                if *gr == 0 || *gc == 0 || !rows.is_multiple_of(*gr) || !cols.is_multiple_of(*gc) {
                    return Err(Error::BadGrid {
                        grid_rows: *gr,
                        grid_cols: *gc,
                        rows,
                        cols,
                    });
                }
                gr * gc
            }
        })
    }

    pub fn extract(&self, img: &BinaryImage) -> Result<FeatureVector> {
        Ok(match self {
            FeatureKind::CelledProjection(c) => FeatureVector::Bits(celled_projection(img, *c)?),
            FeatureKind::Crossings => FeatureVector::Real(crossings(img)),
            FeatureKind::Fourier => FeatureVector::Real(fourier_low(img)?),
            FeatureKind::Moments => FeatureVector::Real(central_moments(img)?),
            FeatureKind::Hu => FeatureVector::Real(hu_moments(img)?),
            FeatureKind::Histograms => FeatureVector::Real(projection_histograms(img)),
            FeatureKind::Zoning { rows, cols } => FeatureVector::Real(zoning(img, *rows, *cols)?),
        })
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.name(), self.params())
    }
}

/// Output of an extractor.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureVector {
    Real(Vec<f64>),
    Bits(BitFeatureVector),
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        match self {
            FeatureVector::Real(v) => v.len(),
            FeatureVector::Bits(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Real view; bits expand to 0/1.
    pub fn to_real(&self) -> Vec<f64> {
        match self {
            FeatureVector::Real(v) => v.clone(),
            FeatureVector::Bits(b) => b.to_f64(),
        }
    }
}

/// A feature vector tagged with the extractor that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub kind: FeatureKind,
    pub vector: FeatureVector,
}

impl FeatureRecord {
    /// Header line `<name> <params> <length>` followed by one line of
    /// space-separated values. Reals use the shortest decimal form that
    /// parses back to the same `f64`.
    pub fn to_text(&self) -> String {
        let values: Vec<String> = match &self.vector {
            FeatureVector::Real(v) => v.iter().map(|x| format!("{x:?}")).collect(),
            FeatureVector::Bits(b) => b.iter().map(|x| if x { "1" } else { "0" }.to_string()).collect(),
        };
        format!(
            "{} {} {}\n{}\n",
            self.kind.name(),
            self.kind.params(),
            self.vector.len(),
            values.join(" ")
        )
    }
}

/// Writes records back to back.
pub fn format_records(records: &[FeatureRecord]) -> String {
    records.iter().map(FeatureRecord::to_text).collect()
}

/// Parses any number of concatenated records.
pub fn parse_records(text: &str) -> Result<Vec<FeatureRecord>> {
    let mut tokens = Tokens::new(text);
    let mut out = Vec::new();
    while let Some((offset, name)) = tokens.next() {
        let (_, params) = tokens.expect("parameter string", offset)?;
        let (len_at, len) = tokens.expect("length", offset)?;
        let len: usize = len.parse().map_err(|_| Error::Parse {
            offset: len_at,
            message: format!("bad length `{len}`"),
        })?;
        let kind = FeatureKind::parse(name, params).map_err(|e| Error::Parse {
            offset,
            message: e.to_string(),
        })?;
        let vector = if kind.is_binary() {
            let mut bits = BitFeatureVector::zeros(len);
            for b in 0..len {
                match tokens.expect("bit", offset)? {
                    (_, "0") => {}
                    (_, "1") => bits.set(b),
                    (at, other) => {
                        return Err(Error::Parse {
                            offset: at,
                            message: format!("expected 0 or 1, found `{other}`"),
                        })
                    }
                }
            }
            FeatureVector::Bits(bits)
        } else {
            let mut values = Vec::with_capacity(len);
            for _ in 0..len {
                let (at, tok) = tokens.expect("value", offset)?;
                values.push(f64::from_str(tok).map_err(|_| Error::Parse {
                    offset: at,
                    message: format!("bad number `{tok}`"),
                })?);
            }
            FeatureVector::Real(values)
        };
        out.push(FeatureRecord { kind, vector });
    }
    Ok(out)
}

struct Tokens<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, pos: 0 }
    }

    fn next(&mut self) -> Option<(usize, &'a str)> {
        let rest = &self.text[self.pos..];
        let start = self.pos + (rest.len() - rest.trim_start().len());
        let rest = &self.text[start..];
        if rest.is_empty() {
            self.pos = start;
            return None;
        }
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        self.pos = start + end;
        Some((start, &rest[..end]))
    }

    fn expect(&mut self, what: &str, record_at: usize) -> Result<(usize, &'a str)> {
        self.next().ok_or_else(|| Error::Parse {
            offset: self.text.len(),
            message: format!("record at byte {record_at}: missing {what}"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_names_and_params() {
        assert_eq!(
            FeatureKind::parse("cp", "kh=4,kv=4").unwrap(),
            FeatureKind::CelledProjection(CelledProjectionConfig::new(4, 4))
        );
        assert_eq!(
            FeatureKind::parse("cp", "kh=8").unwrap(),
            FeatureKind::CelledProjection(CelledProjectionConfig::new(8, 0))
        );
        assert_eq!(FeatureKind::parse("zoning", "").unwrap(), FeatureKind::Zoning { rows: 4, cols: 4 });
        assert_eq!(FeatureKind::parse("hist", "-").unwrap(), FeatureKind::Histograms);
        assert!(matches!(FeatureKind::parse("sift", ""), Err(Error::UnknownFeature(_))));
        assert!(matches!(FeatureKind::parse("cp", "k=3"), Err(Error::BadParams { .. })));
        assert!(matches!(FeatureKind::parse("moments", "x=1"), Err(Error::BadParams { .. })));
        assert!(matches!(FeatureKind::parse("cp", "kh=0,kv=0"), Err(Error::BadParams { .. })));
        for name in FeatureKind::NAMES {
            let kind = FeatureKind::parse(name, "").unwrap();
            assert_eq!(FeatureKind::parse(kind.name(), &kind.params()).unwrap(), kind);
        }
    }

    #[test]
    fn output_len_matches_extraction() {
        let img = BinaryImage::from_ascii(&"#.##..#.#..###.#\n".repeat(16));
        for name in FeatureKind::NAMES {
            let kind = FeatureKind::parse(name, "").unwrap();
            assert_eq!(kind.output_len(16, 16).unwrap(), kind.extract(&img).unwrap().len(), "{name}");
        }
    }

    #[test]
    fn record_text_layout() {
        let rec = FeatureRecord {
            kind: FeatureKind::parse("cp", "kh=1").unwrap(),
            vector: FeatureVector::Bits(BitFeatureVector::from_bits([true, false, true])),
        };
        assert_eq!(rec.to_text(), "cp kh=1,kv=0 3\n1 0 1\n");
        let rec = FeatureRecord {
            kind: FeatureKind::Zoning { rows: 1, cols: 2 },
            vector: FeatureVector::Real(vec![0.0625, 1.0]),
        };
        assert_eq!(rec.to_text(), "zoning rows=1,cols=2 2\n0.0625 1.0\n");
    }

    #[test]
    fn truncated_record() {
        assert!(matches!(parse_records("hist - 3\n1 2"), Err(Error::Parse { .. })));
        assert!(matches!(parse_records("cp kh=1,kv=0 2\n1 2"), Err(Error::Parse { offset: 17, .. })));
        assert!(parse_records("  \n").unwrap().is_empty());
    }

    proptest! {
        #[test]
        fn records_round_trip_bit_exact(
            reals in proptest::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..40),
            bits in proptest::collection::vec(any::<bool>(), 0..200),
        ) {
            let recs = vec![
                FeatureRecord { kind: FeatureKind::Moments, vector: FeatureVector::Real(reals) },
                FeatureRecord {
                    kind: FeatureKind::parse("cp", "kh=4,kv=4").unwrap(),
                    vector: FeatureVector::Bits(BitFeatureVector::from_bits(bits)),
                },
            ];
            let back = parse_records(&format_records(&recs)).unwrap();
            prop_assert_eq!(back.len(), 2);
            match (&back[0].vector, &recs[0].vector) {
                (FeatureVector::Real(a), FeatureVector::Real(b)) => {
                    prop_assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
                }
                _ => prop_assert!(false),
            }
            prop_assert_eq!(&back[1], &recs[1]);
        }
    }
}
