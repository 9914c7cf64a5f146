//! IDX file parsing (the MNIST distribution format), with transparent gzip.
//!
//! Image files carry magic 0x00000803 and three big-endian dimensions
//! (count, rows, cols); label files carry 0x00000801 and one dimension.

use std::io::Read;
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;

use crate::error::{Error, Result};

use super::dataset::{to_dataset, Dataset};

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

/// Reads a file, gunzipping if it starts with the gzip magic bytes 1f 8b.
fn read_maybe_gzip(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path)?;
    if raw.len() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn read_u32_be(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or(Error::Truncated {
            needed: offset + 4,
            got: bytes.len(),
        })
}

/// Parses an IDX image file into per-image pixel rows.
pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<Vec<u8>>> {
    let magic = read_u32_be(bytes, 0)?;
    if magic != IMAGE_MAGIC {
        return Err(Error::BadMagic {
            expected: IMAGE_MAGIC,
            found: magic,
        });
    }
    let count = read_u32_be(bytes, 4)? as usize;
    let rows = read_u32_be(bytes, 8)? as usize;
    let cols = read_u32_be(bytes, 12)? as usize;
    let pixel_count = rows * cols;
    let needed = 16 + count * pixel_count;
    if bytes.len() < needed {
        return Err(Error::Truncated {
            needed,
            got: bytes.len(),
        });
    }
    Ok((0..count)
        .map(|i| bytes[16 + i * pixel_count..16 + (i + 1) * pixel_count].to_vec())
        .collect())
}

/// Parses an IDX label file.
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = read_u32_be(bytes, 0)?;
    if magic != LABEL_MAGIC {
        return Err(Error::BadMagic {
            expected: LABEL_MAGIC,
            found: magic,
        });
    }
    let count = read_u32_be(bytes, 4)? as usize;
    let needed = 8 + count;
    if bytes.len() < needed {
        return Err(Error::Truncated {
            needed,
            got: bytes.len(),
        });
    }
    Ok(bytes[8..needed].to_vec())
}

pub fn load_idx_images(path: &Path) -> Result<Vec<Vec<u8>>> {
    parse_idx_images(&read_maybe_gzip(path)?)
}

pub fn load_idx_labels(path: &Path) -> Result<Vec<u8>> {
    parse_idx_labels(&read_maybe_gzip(path)?)
}

/// Serializes images back to the IDX layout (all images `rows x cols`).
pub fn write_idx_images(images: &[Vec<u8>], rows: usize, cols: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.len() * rows * cols);
    out.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.len() as u32).to_be_bytes());
    out.extend_from_slice(&(rows as u32).to_be_bytes());
    out.extend_from_slice(&(cols as u32).to_be_bytes());
    for img in images {
        assert_eq!(img.len(), rows * cols);
        out.extend_from_slice(img);
    }
    out
}

pub fn write_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Finds `<stem>` or `<stem>.gz` under `dir`.
fn find_idx_file(dir: &Path, stem: &str) -> Result<PathBuf> {
    let plain = dir.join(stem);
    if plain.exists() {
        return Ok(plain);
    }
    let gz = dir.join(format!("{stem}.gz"));
    if gz.exists() {
        return Ok(gz);
    }
    Err(Error::Io(std::io::Error::new(
        std::io::ErrorKind::NotFound,
        format!("missing {stem}[.gz] under {}", dir.display()),
    )))
}

/// Loads one images+labels pair and checks the counts agree.
pub fn load_idx_pair(dir: &Path, image_stem: &str, label_stem: &str) -> Result<Dataset> {
    let images = load_idx_images(&find_idx_file(dir, image_stem)?)?;
    let labels = load_idx_labels(&find_idx_file(dir, label_stem)?)?;
    if images.len() != labels.len() {
        return Err(Error::CountMismatch {
            images: images.len(),
            labels: labels.len(),
        });
    }
    to_dataset(&images, &labels, 10)
}

/// Loads the MNIST train and test sets from a directory holding the four
/// standard files (optionally gzipped).
pub fn load_mnist(dir: &Path) -> Result<(Dataset, Dataset)> {
    let train = load_idx_pair(dir, "train-images-idx3-ubyte", "train-labels-idx1-ubyte")?;
    let test = load_idx_pair(dir, "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")?;
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use flate2::write::GzEncoder;
    use flate2::Compression;
    use proptest::prelude::*;
    use std::io::Write;

    #[test]
    fn wrong_magic_reported() {
        let mut bytes = write_idx_images(&[vec![0; 4]], 2, 2);
        bytes[3] = 0x01; // label magic in an image file
        assert!(matches!(
            parse_idx_images(&bytes),
            Err(Error::BadMagic {
                expected: IMAGE_MAGIC,
                found: LABEL_MAGIC
            })
        ));
    }

    #[test]
    fn truncated_payload_reported() {
        let mut bytes = write_idx_images(&[vec![7; 4]], 2, 2);
        bytes.truncate(18);
        assert!(matches!(
            parse_idx_images(&bytes),
            Err(Error::Truncated { needed: 20, got: 18 })
        ));
    }

    #[test]
    fn truncated_header_reported() {
        assert!(matches!(
            parse_idx_labels(&[0, 0]),
            Err(Error::Truncated { .. })
        ));
    }

    #[test]
    fn gzip_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.gz");
        let bytes = write_idx_labels(&[3, 1, 4]);
        let mut enc = GzEncoder::new(Vec::new(), Compression::default());
        enc.write_all(&bytes).unwrap();
        std::fs::write(&path, enc.finish().unwrap()).unwrap();
        assert_eq!(load_idx_labels(&path).unwrap(), vec![3, 1, 4]);
    }

    #[test]
    fn pair_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("train-images-idx3-ubyte"),
            write_idx_images(&[vec![0; 4], vec![1; 4]], 2, 2),
        )
        .unwrap();
        std::fs::write(
            dir.path().join("train-labels-idx1-ubyte"),
            write_idx_labels(&[5]),
        )
        .unwrap();
        assert!(matches!(
            load_idx_pair(dir.path(), "train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
            Err(Error::CountMismatch { images: 2, labels: 1 })
        ));
    }

    proptest! {
        #[test]
        fn image_round_trip(imgs in prop::collection::vec(prop::collection::vec(any::<u8>(), 6), 0..8)) {
            let bytes = write_idx_images(&imgs, 2, 3);
            prop_assert_eq!(parse_idx_images(&bytes).unwrap(), imgs);
        }

        #[test]
        fn label_round_trip(labels in prop::collection::vec(any::<u8>(), 0..64)) {
            let bytes = write_idx_labels(&labels);
            prop_assert_eq!(parse_idx_labels(&bytes).unwrap(), labels);
        }
    }
}
