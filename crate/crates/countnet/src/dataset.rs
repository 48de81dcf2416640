//! Dataset container, directory loading, and the manifest CSV format.
//!
//! Manifest format: header `filename,label,count`, UTF-8, LF line endings.
//! The label and count columns may be empty; when any row carries a value,
//! every row must.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::image::{load_png, save_png, Image};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Split::Train => write!(f, "train"),
            Split::Val => write!(f, "val"),
            Split::Test => write!(f, "test"),
        }
    }
}

/// An ordered image collection with optional class labels and optional
/// ground-truth primitive counts.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub images: Vec<Image>,
    pub labels: Option<Vec<i64>>,
    pub counts: Option<Vec<u32>>,
    pub split: Split,
}

impl LabeledDataset {
    pub fn new(
        images: Vec<Image>,
        labels: Option<Vec<i64>>,
        counts: Option<Vec<u32>>,
        split: Split,
    ) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != images.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} labels for {} images",
                    l.len(),
                    images.len()
                )));
            }
        }
        if let Some(c) = &counts {
            if c.len() != images.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} counts for {} images",
                    c.len(),
                    images.len()
                )));
            }
        }
        Ok(LabeledDataset {
            images,
            labels,
            counts,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// New dataset holding the given indices, in the given order.
    pub fn subset(&self, indices: &[usize], split: Split) -> LabeledDataset {
        LabeledDataset {
            images: indices.iter().map(|&i| self.images[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            counts: self
                .counts
                .as_ref()
                .map(|c| indices.iter().map(|&i| c[i]).collect()),
            split,
        }
    }

    /// Concatenates two datasets. Labels/counts survive only when present on
    /// both sides.
    pub fn concat(a: &LabeledDataset, b: &LabeledDataset) -> LabeledDataset {
        let mut images = a.images.clone();
        images.extend(b.images.iter().cloned());
        let labels = match (&a.labels, &b.labels) {
            (Some(x), Some(y)) => {
                let mut l = x.clone();
                l.extend(y.iter().copied());
                Some(l)
            }
            _ => None,
        };
        let counts = match (&a.counts, &b.counts) {
            (Some(x), Some(y)) => {
                let mut c = x.clone();
                c.extend(y.iter().copied());
                Some(c)
            }
            _ => None,
        };
        LabeledDataset {
            images,
            labels,
            counts,
            split: a.split,
        }
    }
}

struct ManifestRow {
    filename: String,
    label: Option<i64>,
    count: Option<u32>,
}

fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Manifest {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Manifest {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?
        .clone();
    let expected = ["filename", "label", "count"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::Manifest {
            path: path.to_path_buf(),
            reason: format!("header must be `filename,label,count`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Manifest {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let parse_field = |idx: usize, what: &str| -> Result<Option<i64>> {
            let raw = record.get(idx).unwrap_or("").trim();
            if raw.is_empty() {
                return Ok(None);
            }
            raw.parse::<i64>().map(Some).map_err(|_| Error::Manifest {
                path: path.to_path_buf(),
                reason: format!("row {}: invalid {what} `{raw}`", line + 2),
            })
        };
        let filename = record.get(0).unwrap_or("").trim().to_string();
        if filename.is_empty() {
            return Err(Error::Manifest {
                path: path.to_path_buf(),
                reason: format!("row {}: empty filename", line + 2),
            });
        }
        let label = parse_field(1, "label")?;
        let count = parse_field(2, "count")?;
        rows.push(ManifestRow {
            filename,
            label,
            count: count.map(|c| c as u32),
        });
    }
    Ok(rows)
}

fn collect_column<T: Copy>(
    path: &Path,
    what: &str,
    values: Vec<Option<T>>,
) -> Result<Option<Vec<T>>> {
    let present = values.iter().filter(|v| v.is_some()).count();
    if present == 0 {
        Ok(None)
    } else if present == values.len() {
        Ok(Some(values.into_iter().map(|v| v.unwrap()).collect()))
    } else {
        Err(Error::Manifest {
            path: path.to_path_buf(),
            reason: format!("{what} column is only partially filled"),
        })
    }
}

/// Scans `root` (and a conventional `root/images/` subdirectory) for PNG
/// files, lexicographically ordered by relative path.
fn scan_pngs(root: &Path) -> Result<Vec<PathBuf>> {
    let mut rel_paths: Vec<PathBuf> = Vec::new();
    let mut scan_dir = |dir: &Path, prefix: Option<&str>| -> Result<()> {
        if !dir.is_dir() {
            return Ok(());
        }
        for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            let entry = entry.map_err(|e| Error::io(dir, e))?;
            let p = entry.path();
            if p.extension().map(|e| e == "png").unwrap_or(false) {
                let name = p.file_name().unwrap().to_string_lossy().into_owned();
                rel_paths.push(match prefix {
                    Some(pre) => PathBuf::from(pre).join(name),
                    None => PathBuf::from(name),
                });
            }
        }
        Ok(())
    };
    scan_dir(root, None)?;
    scan_dir(&root.join("images"), Some("images"))?;
    rel_paths.sort();
    Ok(rel_paths)
}

/// Loads a dataset from a directory of PNGs. With a manifest the listed
/// files are loaded in manifest order and label/count columns are attached;
/// without one, every PNG under `root` is loaded in lexicographic order.
pub fn load_dataset(root: &Path, manifest: Option<&Path>) -> Result<LabeledDataset> {
    let (rel_paths, labels, counts) = match manifest {
        Some(mpath) => {
            let rows = read_manifest(mpath)?;
            if rows.is_empty() {
                return Err(Error::Manifest {
                    path: mpath.to_path_buf(),
                    reason: "manifest lists no files".into(),
                });
            }
            let labels = collect_column(mpath, "label", rows.iter().map(|r| r.label).collect())?;
            let counts = collect_column(mpath, "count", rows.iter().map(|r| r.count).collect())?;
            let rel: Vec<PathBuf> = rows.iter().map(|r| PathBuf::from(&r.filename)).collect();
            (rel, labels, counts)
        }
        None => (scan_pngs(root)?, None, None),
    };
    if rel_paths.is_empty() {
        return Err(Error::EmptyDataset(root.to_path_buf()));
    }
    for rel in &rel_paths {
        let full = root.join(rel);
        if !full.is_file() {
            return Err(Error::MissingFile(full));
        }
    }
    // Decoding is read-only per file and safe to fan out.
    let images: Vec<Image> = rel_paths
        .par_iter()
        .map(|rel| load_png(&root.join(rel)))
        .collect::<Result<Vec<_>>>()?;
    LabeledDataset::new(images, labels, counts, Split::Train)
}

/// Writes `images/NNNNNN.png` files plus a `manifest.csv` under `root`.
pub fn save_dataset(dataset: &LabeledDataset, root: &Path) -> Result<()> {
    let img_dir = root.join("images");
    fs::create_dir_all(&img_dir).map_err(|e| Error::io(&img_dir, e))?;
    for (i, img) in dataset.images.iter().enumerate() {
        save_png(img, &img_dir.join(format!("{i:06}.png")))?;
    }
    let manifest_path = root.join("manifest.csv");
    let mut out = String::from("filename,label,count\n");
    for i in 0..dataset.len() {
        let label = dataset
            .labels
            .as_ref()
            .map(|l| l[i].to_string())
            .unwrap_or_default();
        let count = dataset
            .counts
            .as_ref()
            .map(|c| c[i].to_string())
            .unwrap_or_default();
        out.push_str(&format!("images/{i:06}.png,{label},{count}\n"));
    }
    let mut f = fs::File::create(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    f.write_all(out.as_bytes())
        .map_err(|e| Error::io(&manifest_path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_png(dir: &Path, name: &str, value: f64) {
        let img = Image::new(2, 2, 3, vec![value; 12]).unwrap();
        save_png(&img, &dir.join(name)).unwrap();
    }

    #[test]
    fn loads_directory_without_manifest() {
        let dir = tempfile::tempdir().unwrap();
        write_png(dir.path(), "b.png", 0.2);
        write_png(dir.path(), "a.png", 0.4);
        write_png(dir.path(), "c.png", 0.6);
        let ds = load_dataset(dir.path(), None).unwrap();
        assert_eq!(ds.len(), 3);
        assert!(ds.labels.is_none());
        // Lexicographic order: a, b, c.
        assert!((ds.images[0].get(0, 0, 0) - 0.4).abs() < 1e-2);
        assert!((ds.images[1].get(0, 0, 0) - 0.2).abs() < 1e-2);
    }

    #[test]
    fn manifest_selects_and_orders() {
        let dir = tempfile::tempdir().unwrap();
        write_png(dir.path(), "a.png", 0.1);
        write_png(dir.path(), "b.png", 0.5);
        write_png(dir.path(), "c.png", 0.9);
        let manifest = dir.path().join("m.csv");
        fs::write(&manifest, "filename,label,count\nc.png,1,\na.png,0,\n").unwrap();
        let ds = load_dataset(dir.path(), Some(&manifest)).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.labels, Some(vec![1, 0]));
        assert!(ds.counts.is_none());
        assert!((ds.images[0].get(0, 0, 0) - 0.9).abs() < 1e-2);
    }

    #[test]
    fn manifest_missing_file_is_named() {
        let dir = tempfile::tempdir().unwrap();
        write_png(dir.path(), "a.png", 0.1);
        let manifest = dir.path().join("m.csv");
        fs::write(&manifest, "filename,label,count\nghost.png,,\n").unwrap();
        let err = load_dataset(dir.path(), Some(&manifest)).unwrap_err();
        match err {
            Error::MissingFile(p) => assert!(p.to_string_lossy().contains("ghost.png")),
            other => panic!("expected MissingFile, got {other}"),
        }
    }

    #[test]
    fn empty_directory_is_fatal() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_dataset(dir.path(), None),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let images = vec![
            Image::new(2, 2, 3, (0..12).map(|i| i as f64 / 255.0).collect()).unwrap(),
            Image::new(2, 2, 3, (12..24).map(|i| i as f64 / 255.0).collect()).unwrap(),
        ];
        let ds = LabeledDataset::new(images, None, Some(vec![3, 5]), Split::Train).unwrap();
        save_dataset(&ds, dir.path()).unwrap();
        let back = load_dataset(dir.path(), Some(&dir.path().join("manifest.csv"))).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.counts, Some(vec![3, 5]));
        for (a, b) in ds.images.iter().zip(&back.images) {
            assert_eq!(a.data(), b.data());
        }
    }
}
