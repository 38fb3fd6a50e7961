//! MNIST IDX files: a big-endian `u32` magic, big-endian `u32` dimension
//! sizes, then raw unsigned bytes.

use std::fs;
use std::path::{Path, PathBuf};

use super::Dataset;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;
pub const DATA_DIR_ENV: &str = "REDLENS_DATA_DIR";

const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    match bytes.get(offset..offset + 4) {
        Some(b) => Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]])),
        None => Err(Error::IdxTruncated {
            path: path.to_path_buf(),
            needed: offset + 4,
            available: bytes.len(),
        }),
    }
}

/// Parses the header and returns `(dims, payload)`.
fn parse<'a>(
    bytes: &'a [u8],
    path: &Path,
    magic: u32,
    ndim: usize,
) -> Result<(Vec<usize>, &'a [u8])> {
    let found = be_u32(bytes, 0, path)?;
    if found != magic {
        return Err(Error::IdxMagic {
            path: path.to_path_buf(),
            found,
            expected: magic,
        });
    }
    let dims = (0..ndim)
        .map(|i| be_u32(bytes, 4 + 4 * i, path).map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    let header = 4 + 4 * ndim;
    let needed = header + dims.iter().product::<usize>();
    if bytes.len() < needed {
        return Err(Error::IdxTruncated {
            path: path.to_path_buf(),
            needed,
            available: bytes.len(),
        });
    }
    Ok((dims, &bytes[header..needed]))
}

/// Loads an image file and its label file. Pixels are scaled to [0, 1].
pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let image_bytes = read_file(ip)?;
    let label_bytes = read_file(lp)?;
    let (dims, pixels) = parse(&image_bytes, ip, IMAGES_MAGIC, 3)?;
    let (ldims, raw_labels) = parse(&label_bytes, lp, LABELS_MAGIC, 1)?;
    if dims[0] != ldims[0] {
        return Err(Error::IdxCountMismatch {
            images: dims[0],
            labels: ldims[0],
        });
    }
    let data = pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    let images = Matrix::from_raw(dims[0], dims[1] * dims[2], data);
    let labels = raw_labels.iter().map(|&l| usize::from(l)).collect();
    Dataset::new(images, labels, 10)
}

/// `(train, test)` from a directory holding the four standard MNIST files.
pub fn load_mnist_dir(dir: impl AsRef<Path>) -> Result<(Dataset, Dataset)> {
    let dir = dir.as_ref();
    let train = load_idx(dir.join(TRAIN_IMAGES), dir.join(TRAIN_LABELS))?;
    let test = load_idx(dir.join(TEST_IMAGES), dir.join(TEST_LABELS))?;
    Ok((train, test))
}

/// MNIST location from `REDLENS_DATA_DIR`, if set.
pub fn mnist_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_DIR_ENV).map(PathBuf::from)
}

pub fn write_idx_images(
    path: impl AsRef<Path>,
    rows: usize,
    cols: usize,
    pixels: &[u8],
) -> Result<()> {
    let path = path.as_ref();
    if rows * cols == 0 || !pixels.len().is_multiple_of(rows * cols) {
        return Err(Error::Shape(format!(
            "{} pixels do not form {rows}x{cols} images",
            pixels.len()
        )));
    }
    let mut out = Vec::with_capacity(16 + pixels.len());
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    for d in [pixels.len() / (rows * cols), rows, cols] {
        out.extend_from_slice(&(d as u32).to_be_bytes());
    }
    out.extend_from_slice(pixels);
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_idx_labels(path: impl AsRef<Path>, labels: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two 2x3 images and their labels, assembled byte by byte.
    fn fixture(dir: &Path) -> (PathBuf, PathBuf) {
        let images: Vec<u8> = vec![
            0x00, 0x00, 0x08, 0x03, // magic
            0x00, 0x00, 0x00, 0x02, // count
            0x00, 0x00, 0x00, 0x02, // rows
            0x00, 0x00, 0x00, 0x03, // cols
            0, 51, 102, 153, 204, 255, //
            255, 0, 1, 2, 3, 128,
        ];
        let labels: Vec<u8> = vec![0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x02, 7, 3];
        let (ip, lp) = (dir.join("img"), dir.join("lbl"));
        fs::write(&ip, images).unwrap();
        fs::write(&lp, labels).unwrap();
        (ip, lp)
    }

    #[test]
    fn hand_built_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = fixture(dir.path());
        let ds = load_idx(&ip, &lp).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 6);
        assert_eq!(ds.labels(), &[7, 3]);
        assert_eq!(ds.images().row(0), &[0.0, 0.2, 0.4, 0.6, 0.8, 1.0]);
        assert_eq!(ds.images().get(1, 5), 128.0 / 255.0);
    }

    #[test]
    fn writer_reproduces_fixture_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = fixture(dir.path());
        let pixels = [0, 51, 102, 153, 204, 255, 255, 0, 1, 2, 3, 128];
        write_idx_images(dir.path().join("img2"), 2, 3, &pixels).unwrap();
        write_idx_labels(dir.path().join("lbl2"), &[7, 3]).unwrap();
        assert_eq!(
            fs::read(ip).unwrap(),
            fs::read(dir.path().join("img2")).unwrap()
        );
        assert_eq!(
            fs::read(lp).unwrap(),
            fs::read(dir.path().join("lbl2")).unwrap()
        );
    }

    #[test]
    fn bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = fixture(dir.path());
        let mut bytes = fs::read(&ip).unwrap();
        bytes[..4].copy_from_slice(&[0, 0, 0, 0]);
        fs::write(&ip, bytes).unwrap();
        assert!(matches!(
            load_idx(&ip, &lp),
            Err(Error::IdxMagic {
                found: 0,
                expected: IMAGES_MAGIC,
                ..
            })
        ));
        // Swapped files: the label file is not an image file.
        assert!(matches!(load_idx(&lp, &lp), Err(Error::IdxMagic { .. })));
    }

    #[test]
    fn truncated_payload() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = fixture(dir.path());
        let bytes = fs::read(&ip).unwrap();
        fs::write(&ip, &bytes[..bytes.len() - 1]).unwrap();
        assert!(matches!(
            load_idx(&ip, &lp),
            Err(Error::IdxTruncated {
                needed: 28,
                available: 27,
                ..
            })
        ));
        fs::write(&ip, &bytes[..6]).unwrap();
        assert!(matches!(
            load_idx(&ip, &lp),
            Err(Error::IdxTruncated { .. })
        ));
    }

    #[test]
    fn count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let (ip, lp) = fixture(dir.path());
        write_idx_labels(&lp, &[1, 2, 3]).unwrap();
        assert!(matches!(
            load_idx(&ip, &lp),
            Err(Error::IdxCountMismatch {
                images: 2,
                labels: 3
            })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_idx(dir.path().join("nope"), dir.path().join("nope2")),
            Err(Error::Io { .. })
        ));
    }
}
