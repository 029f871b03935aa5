//! Labeled image collections and their on-disk containers: IDX ubyte
//! pairs for bulk data and a `filename,label` manifest of PBM files.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::image::{binarize, normalize, BinaryImage, GrayImage, Polarity};
use crate::pbm::{load_pbm, save_pbm};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// Manifest file name used when a dataset is addressed by directory.
pub const MANIFEST_NAME: &str = "manifest.csv";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub image: BinaryImage,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledDataset {
    pub name: String,
    pub class_count: usize,
    pub samples: Vec<Sample>,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, class_count: usize) -> Self {
        Self {
            name: name.into(),
            class_count,
            samples: Vec::new(),
        }
    }

    pub fn push(&mut self, image: BinaryImage, label: usize) -> Result<()> {
        if label >= self.class_count {
            return Err(Error::BadLabel {
                label,
                class_count: self.class_count,
            });
        }
        self.samples.push(Sample { image, label });
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    /// Normalizes every image to `rows x cols`.
    pub fn normalized(&self, rows: usize, cols: usize) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|s| {
                Ok(Sample {
                    image: normalize(&s.image, rows, cols)?,
                    label: s.label,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            name: self.name.clone(),
            class_count: self.class_count,
            samples,
        })
    }

    /// Common image dimensions, or `None` for an empty or ragged set.
    pub fn dims(&self) -> Option<(usize, usize)> {
        let first = self.samples.first()?;
        let dims = (first.image.rows(), first.image.cols());
        self.samples
            .iter()
            .all(|s| (s.image.rows(), s.image.cols()) == dims)
            .then_some(dims)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    what: &'a str,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::TruncatedFile(format!(
                "{}: needed {} bytes at offset {}, {} available",
                self.what,
                n,
                self.pos,
                self.bytes.len() - self.pos
            )));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }
}

/// Decodes an IDX pair held in memory.
pub fn parse_idx_pair(
    images: &[u8],
    labels: &[u8],
    threshold: u8,
    polarity: Polarity,
) -> Result<LabeledDataset> {
    let mut img = Reader {
        bytes: images,
        pos: 0,
        what: "images",
    };
    let magic = img.u32()?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::BadMagic {
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    let count = img.u32()? as usize;
    let rows = img.u32()? as usize;
    let cols = img.u32()? as usize;

    let mut lab = Reader {
        bytes: labels,
        pos: 0,
        what: "labels",
    };
    let magic = lab.u32()?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::BadMagic {
            expected: IDX_LABELS_MAGIC,
            found: magic,
        });
    }
    let label_count = lab.u32()? as usize;
    if label_count != count {
        return Err(Error::CountMismatch {
            images: count,
            labels: label_count,
        });
    }

    let raw_labels = lab.take(count)?.to_vec();
    let class_count = raw_labels.iter().copied().max().map_or(10, |m| (m as usize + 1).max(10));
    let mut dataset = LabeledDataset::new("idx", class_count);
    for &label in &raw_labels {
        let gray = GrayImage::new(rows, cols, img.take(rows * cols)?.to_vec())?;
        dataset.push(binarize(&gray, threshold, polarity), label as usize)?;
    }
    Ok(dataset)
}

pub fn load_idx_pair(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    threshold: u8,
    polarity: Polarity,
) -> Result<LabeledDataset> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let images = fs::read(ip).map_err(|e| Error::io(ip, e))?;
    let labels = fs::read(lp).map_err(|e| Error::io(lp, e))?;
    let mut ds = parse_idx_pair(&images, &labels, threshold, polarity)?;
    ds.name = ip.display().to_string();
    Ok(ds)
}

/// Encodes a dataset as an IDX pair. Foreground is written as 0 and
/// background as 255, so the default dark-foreground binarization at any
/// threshold in `1..=255` reads it back unchanged.
pub fn encode_idx_pair(data: &LabeledDataset) -> Result<(Vec<u8>, Vec<u8>)> {
    let (rows, cols) = match data.dims() {
        Some(d) => d,
        None if data.is_empty() => (0, 0),
        None => return Err(Error::BadConfig("IDX needs images of equal size".into())),
    };
    let mut images = Vec::with_capacity(16 + data.len() * rows * cols);
    images.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    images.extend_from_slice(&(data.len() as u32).to_be_bytes());
    images.extend_from_slice(&(rows as u32).to_be_bytes());
    images.extend_from_slice(&(cols as u32).to_be_bytes());
    let mut labels = Vec::with_capacity(8 + data.len());
    labels.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    labels.extend_from_slice(&(data.len() as u32).to_be_bytes());
    for s in &data.samples {
        images.extend(s.image.pixels().iter().map(|&p| if p == 1 { 0 } else { 255 }));
        let label = u8::try_from(s.label)
            .map_err(|_| Error::BadConfig(format!("label {} does not fit a byte", s.label)))?;
        labels.push(label);
    }
    Ok((images, labels))
}

pub fn save_idx_pair(
    data: &LabeledDataset,
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<()> {
    let (images, labels) = encode_idx_pair(data)?;
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    fs::write(ip, images).map_err(|e| Error::io(ip, e))?;
    fs::write(lp, labels).map_err(|e| Error::io(lp, e))
}

/// Loads the PBM files listed in a `filename,label` manifest. Relative
/// file names resolve against `dir`. Images are not normalized.
pub fn load_manifest(dir: impl AsRef<Path>, manifest_path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let dir = dir.as_ref();
    let mp = manifest_path.as_ref();
    let text = fs::read_to_string(mp).map_err(|e| Error::io(mp, e))?;

    let mut entries = Vec::new();
    let mut offset = 0;
    for (row, line) in text.lines().enumerate() {
        let line_start = offset;
        offset += line.len() + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (file, label) = trimmed.rsplit_once(',').ok_or_else(|| Error::Parse {
            offset: line_start,
            message: format!("manifest row {}: expected `filename,label`", row + 1),
        })?;
        let label: usize = label.trim().parse().map_err(|_| Error::Parse {
            offset: line_start,
            message: format!("manifest row {}: bad label `{}`", row + 1, label.trim()),
        })?;
        entries.push((row + 1, dir.join(file.trim()), label));
    }

    let class_count = entries.iter().map(|e| e.2 + 1).max().unwrap_or(0).max(10);
    let mut dataset = LabeledDataset::new(mp.display().to_string(), class_count);
    for (row, path, label) in entries {
        if !path.is_file() {
            return Err(Error::MissingFile { row, path });
        }
        dataset.push(load_pbm(&path)?, label)?;
    }
    Ok(dataset)
}

/// Writes each image as `NNNNN.pbm` plus a manifest into `dir`.
pub fn save_manifest_dir(data: &LabeledDataset, dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut manifest = String::new();
    for (i, s) in data.samples.iter().enumerate() {
        let name = format!("{i:05}.pbm");
        save_pbm(&s.image, dir.join(&name))?;
        manifest.push_str(&format!("{name},{}\n", s.label));
    }
    let mp = dir.join(MANIFEST_NAME);
    fs::write(&mp, manifest).map_err(|e| Error::io(&mp, e))?;
    Ok(mp)
}

/// Sibling label file for an IDX images path: `foo.idx` -> `foo.labels.idx`.
pub fn idx_labels_path(images_path: &Path) -> PathBuf {
    let stem = images_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    images_path.with_file_name(format!("{stem}.labels.idx"))
}

/// Loads a dataset from a path, choosing the container by shape:
/// a directory (holding `manifest.csv`), a `.csv` manifest, or a `.idx`
/// images file with its labels at [`idx_labels_path`].
pub fn load_dataset(path: impl AsRef<Path>, threshold: u8, polarity: Polarity) -> Result<LabeledDataset> {
    let path = path.as_ref();
    if path.is_dir() {
        return load_manifest(path, path.join(MANIFEST_NAME));
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("idx") => load_idx_pair(path, idx_labels_path(path), threshold, polarity),
        Some("csv") => {
            let dir = path.parent().unwrap_or(Path::new("."));
            load_manifest(dir, path)
        }
        _ => Err(Error::io(
            path,
            std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                "expected a dataset directory, a .csv manifest or a .idx file",
            ),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(magic: u32, dims: &[u32]) -> Vec<u8> {
        let mut v = magic.to_be_bytes().to_vec();
        for d in dims {
            v.extend_from_slice(&d.to_be_bytes());
        }
        v
    }

    #[test]
    fn empty_idx_pair() {
        let ds = parse_idx_pair(
            &header(IDX_IMAGES_MAGIC, &[0, 28, 28]),
            &header(IDX_LABELS_MAGIC, &[0]),
            128,
            Polarity::DarkForeground,
        )
        .unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn zero_bytes_are_ink() {
        let mut images = header(IDX_IMAGES_MAGIC, &[1, 2, 3]);
        images.extend_from_slice(&[0; 6]);
        let mut labels = header(IDX_LABELS_MAGIC, &[1]);
        labels.push(9);
        let ds = parse_idx_pair(&images, &labels, 128, Polarity::DarkForeground).unwrap();
        assert_eq!(ds.samples[0].image, BinaryImage::ones(2, 3));
        assert_eq!(ds.samples[0].label, 9);
    }

    #[test]
    fn idx_errors() {
        let labels = header(IDX_LABELS_MAGIC, &[1, 0]);
        assert!(matches!(
            parse_idx_pair(&header(0x0803_0000, &[1, 1, 1]), &labels, 128, Polarity::default()),
            Err(Error::BadMagic { .. })
        ));
        assert!(matches!(
            parse_idx_pair(&header(IDX_IMAGES_MAGIC, &[2, 1, 1]), &labels, 128, Polarity::default()),
            Err(Error::CountMismatch { images: 2, labels: 1 })
        ));
        let mut images = header(IDX_IMAGES_MAGIC, &[1, 2, 2]);
        images.push(0);
        let mut labels = header(IDX_LABELS_MAGIC, &[1]);
        labels.push(3);
        assert!(matches!(
            parse_idx_pair(&images, &labels, 128, Polarity::default()),
            Err(Error::TruncatedFile(_))
        ));
        assert!(matches!(
            parse_idx_pair(&images[..6], &labels, 128, Polarity::default()),
            Err(Error::TruncatedFile(_))
        ));
    }

    #[test]
    fn idx_round_trip() {
        let mut ds = LabeledDataset::new("t", 10);
        ds.push(BinaryImage::from_ascii("#.\n.#"), 4).unwrap();
        ds.push(BinaryImage::from_ascii("##\n.."), 7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let ip = dir.path().join("d.idx");
        save_idx_pair(&ds, &ip, idx_labels_path(&ip)).unwrap();
        let back = load_dataset(&ip, 128, Polarity::DarkForeground).unwrap();
        assert_eq!(back.samples, ds.samples);
    }

    #[test]
    fn manifest_loading() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.csv");
        fs::write(&empty, "").unwrap();
        assert!(load_manifest(dir.path(), &empty).unwrap().is_empty());

        save_pbm(&BinaryImage::from_ascii("#."), dir.path().join("a.pbm")).unwrap();
        save_pbm(&BinaryImage::from_ascii(".#"), dir.path().join("b.pbm")).unwrap();
        let two = dir.path().join("two.csv");
        fs::write(&two, "b.pbm,1\na.pbm,0\n").unwrap();
        let ds = load_manifest(dir.path(), &two).unwrap();
        assert_eq!(ds.labels(), vec![1, 0]);
        assert_eq!(ds.samples[0].image, BinaryImage::from_ascii(".#"));

        let bad = dir.path().join("bad.csv");
        fs::write(&bad, "a.pbm,0\nnope.pbm,3\n").unwrap();
        match load_manifest(dir.path(), &bad) {
            Err(Error::MissingFile { row, path }) => {
                assert_eq!(row, 2);
                assert!(path.ends_with("nope.pbm"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn manifest_dir_round_trip() {
        let mut ds = LabeledDataset::new("t", 10);
        ds.push(BinaryImage::from_ascii("#.\n.#"), 2).unwrap();
        ds.push(BinaryImage::from_ascii("##\n#."), 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        save_manifest_dir(&ds, dir.path()).unwrap();
        let back = load_dataset(dir.path(), 128, Polarity::default()).unwrap();
        assert_eq!(back.samples, ds.samples);
    }
}
