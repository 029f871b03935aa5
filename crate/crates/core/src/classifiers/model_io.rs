//! Line-oriented text serialization of trained models.
//!
//! ```text
//! knn <euclidean|hamming> k=<k> classes=<C> dim=<D> samples=<N> storage=<real|bits>
//! <label> <v1> ... <vD>          (N lines)
//!
//! pnn spread=<s> classes=<C> dim=<D> samples=<N>
//! <label> <v1> ... <vD>          (N lines)
//!
//! fbpn input=<D> hidden=<H> outputs=<C>
//! center <D values>
//! factor <D values>
//! w1 <H*D values>
//! b1 <H values>
//! w2 <C*H values>
//! b2 <C values>
//! ```
//!
//! Reals are written in shortest round-trip form, so a loaded model
//! predicts exactly like the saved one.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::{
    Classifier, FbpnModel, FeatureMatrix, InputScaling, KnnModel, Metric, PnnModel, Vectors,
};
use crate::error::{Error, Result};
use crate::features::{BitFeatureVector, FeatureVector};

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Knn(KnnModel),
    Pnn(PnnModel),
    Fbpn(FbpnModel),
}

impl Classifier for Model {
    fn class_count(&self) -> usize {
        match self {
            Model::Knn(m) => m.class_count(),
            Model::Pnn(m) => m.class_count(),
            Model::Fbpn(m) => m.class_count(),
        }
    }

    fn classify(&self, query: &FeatureVector) -> Result<usize> {
        match self {
            Model::Knn(m) => m.classify(query),
            Model::Pnn(m) => m.classify(query),
            Model::Fbpn(m) => m.classify(query),
        }
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
}

fn write_rows(out: &mut String, data: &FeatureMatrix) {
    for i in 0..data.len() {
        out.push_str(&data.labels()[i].to_string());
        match data.vectors() {
            Vectors::Real { dim, values } => {
                for v in &values[i * dim..(i + 1) * dim] {
                    out.push_str(&format!(" {v:?}"));
                }
            }
            Vectors::Bits { vectors, .. } => {
                for b in vectors[i].iter() {
                    out.push_str(if b { " 1" } else { " 0" });
                }
            }
        }
        out.push('\n');
    }
}

impl Model {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            Model::Knn(m) => {
                let t = m.training();
                out.push_str(&format!(
                    "knn {} k={} classes={} dim={} samples={} storage={}\n",
                    m.metric().name(),
                    m.k(),
                    t.class_count(),
                    t.dim(),
                    t.len(),
                    if t.is_binary() { "bits" } else { "real" }
                ));
                write_rows(&mut out, t);
            }
            Model::Pnn(m) => {
                let t = m.training();
                out.push_str(&format!(
                    "pnn spread={:?} classes={} dim={} samples={}\n",
                    m.spread(),
                    t.class_count(),
                    t.dim(),
                    t.len()
                ));
                write_rows(&mut out, t);
            }
            Model::Fbpn(m) => {
                out.push_str(&format!(
                    "fbpn input={} hidden={} outputs={}\n",
                    m.input_dim, m.hidden, m.outputs
                ));
                for (name, values) in [
                    ("center", &m.scaling.center),
                    ("factor", &m.scaling.factor),
                    ("w1", &m.w1),
                    ("b1", &m.b1),
                    ("w2", &m.w2),
                    ("b2", &m.b2),
                ] {
                    out.push_str(&format!("{name} {}\n", join(values)));
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| fmt_err("empty model file"))?;
        let mut words = header.split_whitespace();
        let kind = words.next().unwrap_or_default();
        match kind {
            "knn" => {
                let metric = match words.next() {
                    Some("euclidean") => Metric::Euclidean,
                    Some("hamming") => Metric::Hamming,
                    other => return Err(fmt_err(&format!("unknown metric {other:?}"))),
                };
                let kv = key_values(words)?;
                let binary = match kv.get("storage").map(String::as_str) {
                    Some("bits") => true,
                    Some("real") => false,
                    other => return Err(fmt_err(&format!("unknown storage {other:?}"))),
                };
                let data = read_rows(&mut lines, &kv, binary)?;
                Ok(Model::Knn(KnnModel::new(data, usize_of(&kv, "k")?, metric)?))
            }
            "pnn" => {
                let kv = key_values(words)?;
                let spread: f64 = parse(kv.get("spread").ok_or_else(|| fmt_err("missing spread"))?)?;
                let data = read_rows(&mut lines, &kv, false)?;
                Ok(Model::Pnn(super::pnn_train(data, spread)?))
            }
            "fbpn" => {
                let kv = key_values(words)?;
                let (d, h, c) = (usize_of(&kv, "input")?, usize_of(&kv, "hidden")?, usize_of(&kv, "outputs")?);
                let mut section = |name: &str| -> Result<Vec<f64>> {
                    let line = lines.next().ok_or_else(|| fmt_err(&format!("missing `{name}` line")))?;
                    let mut it = line.split_whitespace();
                    if it.next() != Some(name) {
                        return Err(fmt_err(&format!("expected `{name}` line")));
                    }
                    it.map(parse).collect()
                };
                let center = section("center")?;
                let factor = section("factor")?;
                let w1 = section("w1")?;
                let b1 = section("b1")?;
                let w2 = section("w2")?;
                let b2 = section("b2")?;
                let model = FbpnModel::from_parameters(d, h, c, w1, b1, w2, b2, InputScaling { center, factor })?;
                Ok(Model::Fbpn(model))
            }
            other => Err(fmt_err(&format!("unknown model kind `{other}`"))),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_text(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

fn fmt_err(msg: &str) -> Error {
    Error::ModelFormat(msg.to_string())
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| fmt_err(&format!("bad number `{s}`")))
}

fn key_values<'a>(words: impl Iterator<Item = &'a str>) -> Result<HashMap<String, String>> {
    words
        .map(|w| {
            w.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| fmt_err(&format!("expected key=value, found `{w}`")))
        })
        .collect()
}

fn usize_of(kv: &HashMap<String, String>, key: &str) -> Result<usize> {
    parse(kv.get(key).ok_or_else(|| fmt_err(&format!("missing {key}")))?)
}

fn read_rows<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
    kv: &HashMap<String, String>,
    binary: bool,
) -> Result<FeatureMatrix> {
    let (classes, dim, samples) = (usize_of(kv, "classes")?, usize_of(kv, "dim")?, usize_of(kv, "samples")?);
    let mut labels = Vec::with_capacity(samples);
    let mut real = Vec::new();
    let mut bits = Vec::new();
    for i in 0..samples {
        let line = lines.next().ok_or_else(|| fmt_err(&format!("missing sample row {i}")))?;
        let mut it = line.split_whitespace();
        labels.push(parse(it.next().unwrap_or_default())?);
        let values: Vec<f64> = it.map(parse).collect::<Result<_>>()?;
        if values.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: values.len(),
            });
        }
        if binary {
            bits.push(BitFeatureVector::from_bits(values.iter().map(|&v| v == 1.0)));
        } else {
            real.extend(values);
        }
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::BadLabel {
            label,
            class_count: classes,
        });
    }
    let vectors = if binary {
        Vectors::Bits { dim, vectors: bits }
    } else {
        Vectors::Real { dim, values: real }
    };
    Ok(FeatureMatrix::from_parts(vectors, labels, classes))
}
