//! Weight archives: a directory with `manifest.json` and one raw payload per
//! layer.
//!
//! ```json
//! { "layers": [ { "name": "dense_0", "kind": "Dense", "shape": [784, 100], "data_file": "dense_0.f32" } ] }
//! ```
//!
//! Payloads are little-endian `f32`, row-major, no header. Dense layers are
//! `[fan_in, fan_out]`; convolution layers `[out, in, k, k]`.

use std::collections::HashSet;
use std::fs;
use std::path::{Component, Path};

use serde::{Deserialize, Serialize};

use super::unroll::unroll_conv;
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::similarity::FeatureMatrix;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerKind {
    Dense,
    Conv,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub kind: LayerKind,
    pub shape: Vec<usize>,
    pub data_file: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub layers: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawTensor {
    pub kind: LayerKind,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedTensor {
    pub name: String,
    pub tensor: RawTensor,
}

impl RawTensor {
    pub fn dense(weights: &Matrix) -> Self {
        RawTensor {
            kind: LayerKind::Dense,
            shape: vec![weights.rows(), weights.cols()],
            data: weights.as_slice().to_vec(),
        }
    }

    fn check(&self) -> Result<()> {
        let rank_ok = match self.kind {
            LayerKind::Dense => self.shape.len() == 2,
            LayerKind::Conv => self.shape.len() == 4,
        };
        if !rank_ok {
            return Err(Error::Archive(format!(
                "{:?} layer cannot have shape {:?}",
                self.kind, self.shape
            )));
        }
        if self.shape.iter().product::<usize>() != self.data.len() {
            return Err(Error::Archive(format!(
                "shape {:?} does not match {} values",
                self.shape,
                self.data.len()
            )));
        }
        Ok(())
    }

    /// Kernel matrix with one feature per column.
    pub fn to_feature_matrix(&self, name: &str) -> Result<FeatureMatrix> {
        self.check()?;
        match self.kind {
            LayerKind::Dense => {
                let m = Matrix::from_vec(self.shape[0], self.shape[1], self.data.clone())?;
                FeatureMatrix::new(name, m)
            }
            LayerKind::Conv => {
                if let Some(i) = self.data.iter().position(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(i));
                }
                unroll_conv(name, &self.shape, &self.data)
            }
        }
    }
}

fn check_relative(file: &str) -> Result<()> {
    let p = Path::new(file);
    let ok = !file.is_empty() && p.components().all(|c| matches!(c, Component::Normal(_)));
    if !ok {
        return Err(Error::Archive(format!(
            "data_file {file:?} must be a relative path inside the archive"
        )));
    }
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::Archive(format!("{}: {e}", path.display())))?;
    let mut seen = HashSet::new();
    for entry in &manifest.layers {
        if !seen.insert(entry.name.as_str()) {
            return Err(Error::Archive(format!(
                "duplicate layer name {:?}",
                entry.name
            )));
        }
        check_relative(&entry.data_file)?;
    }
    Ok(manifest)
}

/// Reads every layer, widening the stored `f32` values to `f64`.
pub fn read_weight_archive(dir: impl AsRef<Path>) -> Result<Vec<NamedTensor>> {
    let dir = dir.as_ref();
    let manifest = read_manifest(dir)?;
    let mut out = Vec::with_capacity(manifest.layers.len());
    for entry in manifest.layers {
        let path = dir.join(&entry.data_file);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let count: usize = entry.shape.iter().product();
        if bytes.len() != 4 * count {
            return Err(Error::Archive(format!(
                "layer {:?}: shape {:?} needs {} bytes, {} has {}",
                entry.name,
                entry.shape,
                4 * count,
                entry.data_file,
                bytes.len()
            )));
        }
        let data = bytes
            .chunks_exact(4)
            .map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])))
            .collect();
        let tensor = RawTensor {
            kind: entry.kind,
            shape: entry.shape,
            data,
        };
        tensor
            .check()
            .map_err(|e| Error::Archive(format!("layer {:?}: {e}", entry.name)))?;
        out.push(NamedTensor {
            name: entry.name,
            tensor,
        });
    }
    Ok(out)
}

fn payload_name(index: usize, name: &str) -> String {
    let clean: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{index:03}_{clean}.f32")
}

/// Writes `layers` into `dir` (created if missing). Values are narrowed to
/// `f32`.
pub fn write_weight_archive(dir: impl AsRef<Path>, layers: &[NamedTensor]) -> Result<()> {
    let dir = dir.as_ref();
    let mut seen = HashSet::new();
    for l in layers {
        if !seen.insert(l.name.as_str()) {
            return Err(Error::Archive(format!("duplicate layer name {:?}", l.name)));
        }
        l.tensor.check()?;
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut entries = Vec::with_capacity(layers.len());
    for (i, l) in layers.iter().enumerate() {
        let file = payload_name(i, &l.name);
        let mut bytes = Vec::with_capacity(4 * l.tensor.data.len());
        for &v in &l.tensor.data {
            bytes.extend_from_slice(&(v as f32).to_le_bytes());
        }
        let path = dir.join(&file);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        entries.push(ManifestEntry {
            name: l.name.clone(),
            kind: l.tensor.kind,
            shape: l.tensor.shape.clone(),
            data_file: file,
        });
    }
    let mut json = serde_json::to_string_pretty(&Manifest { layers: entries })
        .map_err(|e| Error::Archive(e.to_string()))?;
    json.push('\n');
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, json).map_err(|e| Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_fixture(rows: usize, cols: usize) -> NamedTensor {
        let data = (0..rows * cols)
            .map(|i| ((i as f32) * 0.013).sin() as f64)
            .collect();
        NamedTensor {
            name: "fc1".into(),
            tensor: RawTensor {
                kind: LayerKind::Dense,
                shape: vec![rows, cols],
                data,
            },
        }
    }

    #[test]
    fn dense_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let layer = dense_fixture(784, 100);
        write_weight_archive(dir.path(), std::slice::from_ref(&layer)).unwrap();
        let back = read_weight_archive(dir.path()).unwrap();
        assert_eq!(back, vec![layer]);
        let fm = back[0].tensor.to_feature_matrix("fc1").unwrap();
        assert_eq!((fm.dim(), fm.n_features()), (784, 100));
    }

    #[test]
    fn rewrite_is_payload_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let conv = NamedTensor {
            name: "conv/1".into(),
            tensor: RawTensor {
                kind: LayerKind::Conv,
                shape: vec![2, 3, 3, 3],
                data: (0..54).map(|i| f64::from(i as f32 * 0.25 - 3.0)).collect(),
            },
        };
        write_weight_archive(a.path(), &[dense_fixture(5, 4), conv]).unwrap();
        write_weight_archive(b.path(), &read_weight_archive(a.path()).unwrap()).unwrap();
        for f in ["manifest.json", "000_fc1.f32", "001_conv_1.f32"] {
            assert_eq!(
                fs::read(a.path().join(f)).unwrap(),
                fs::read(b.path().join(f)).unwrap(),
                "{f}"
            );
        }
    }

    #[test]
    fn payload_length_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join(MANIFEST_FILE),
            r#"{"layers":[{"name":"a","kind":"Dense","shape":[10,10],"data_file":"a.f32"}]}"#,
        )
        .unwrap();
        fs::write(dir.path().join("a.f32"), vec![0u8; 396]).unwrap();
        let err = read_weight_archive(dir.path()).unwrap_err();
        assert!(
            matches!(err, Error::Archive(ref m) if m.contains("400")),
            "{err}"
        );
    }

    #[test]
    fn unknown_kind_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.f32"), vec![0u8; 16]).unwrap();
        fs::write(
            dir.path().join(MANIFEST_FILE),
            r#"{"layers":[{"name":"a","kind":"Recurrent","shape":[2,2],"data_file":"a.f32"}]}"#,
        )
        .unwrap();
        assert!(matches!(
            read_weight_archive(dir.path()),
            Err(Error::Archive(_))
        ));

        fs::write(
            dir.path().join(MANIFEST_FILE),
            r#"{"layers":[{"name":"a","kind":"Dense","shape":[2,2],"data_file":"a.f32"},
                          {"name":"a","kind":"Dense","shape":[2,2],"data_file":"a.f32"}]}"#,
        )
        .unwrap();
        let err = read_weight_archive(dir.path()).unwrap_err();
        assert!(matches!(err, Error::Archive(ref m) if m.contains("duplicate")));

        let dup = dense_fixture(2, 2);
        assert!(write_weight_archive(dir.path(), &[dup.clone(), dup]).is_err());
    }

    #[test]
    fn rank_and_path_checks() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.f32"), vec![0u8; 16]).unwrap();
        fs::write(
            dir.path().join(MANIFEST_FILE),
            r#"{"layers":[{"name":"a","kind":"Conv","shape":[2,2],"data_file":"a.f32"}]}"#,
        )
        .unwrap();
        assert!(matches!(
            read_weight_archive(dir.path()),
            Err(Error::Archive(_))
        ));
        fs::write(
            dir.path().join(MANIFEST_FILE),
            r#"{"layers":[{"name":"a","kind":"Dense","shape":[2,2],"data_file":"../a.f32"}]}"#,
        )
        .unwrap();
        assert!(matches!(
            read_weight_archive(dir.path()),
            Err(Error::Archive(_))
        ));
    }

    #[test]
    fn missing_manifest_is_io() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            read_weight_archive(dir.path().join("absent")),
            Err(Error::Io { .. })
        ));
    }
}
