//! IDX image/label files (the MNIST container format).
//!
//! Big-endian: a 4-byte magic (`0x00000803` for u8 images with three
//! dimensions, `0x00000801` for u8 labels), one u32 per dimension, then the
//! raw bytes. Gzip-compressed files are detected and inflated transparently.

use super::{DataError, Dataset, Targets};
use crate::dense::Matrix;
use flate2::read::GzDecoder;
use std::io::Read;
use std::path::Path;

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub count: usize,
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

fn read_file(path: &Path) -> Result<Vec<u8>, DataError> {
    if !path.exists() {
        return Err(DataError::MissingFile(path.to_path_buf()));
    }
    let io = |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    };
    let raw = std::fs::read(path).map_err(io)?;
    if raw.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..]).read_to_end(&mut out).map_err(io)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], at: usize) -> Result<u32, DataError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(DataError::Truncated {
            needed: at + 4,
            have: bytes.len(),
        })
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<(), DataError> {
    let found = be_u32(bytes, 0)?;
    if found != expected {
        return Err(DataError::BadMagic { expected, found });
    }
    Ok(())
}

fn body(bytes: &[u8], header: usize, len: usize) -> Result<&[u8], DataError> {
    let needed = header + len;
    if bytes.len() < needed {
        return Err(DataError::Truncated {
            needed,
            have: bytes.len(),
        });
    }
    if bytes.len() > needed {
        return Err(DataError::Invalid(format!(
            "IDX file has {} trailing bytes",
            bytes.len() - needed
        )));
    }
    Ok(&bytes[header..])
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages, DataError> {
    check_magic(bytes, IDX_IMAGES_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    let rows = be_u32(bytes, 8)? as usize;
    let cols = be_u32(bytes, 12)? as usize;
    let pixels = body(bytes, 16, count * rows * cols)?.to_vec();
    Ok(IdxImages {
        count,
        rows,
        cols,
        pixels,
    })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, DataError> {
    check_magic(bytes, IDX_LABELS_MAGIC)?;
    let count = be_u32(bytes, 4)? as usize;
    Ok(body(bytes, 8, count)?.to_vec())
}

/// Loads an image/label pair. Pixels are scaled by 1/255 and each image is
/// flattened row-major into `rows * cols` features.
pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<Dataset, DataError> {
    let images = parse_idx_images(&read_file(images_path.as_ref())?)?;
    let labels = parse_idx_labels(&read_file(labels_path.as_ref())?)?;
    if images.count != labels.len() {
        return Err(DataError::CountMismatch {
            images: images.count,
            labels: labels.len(),
        });
    }
    if images.count == 0 || images.rows * images.cols == 0 {
        return Err(DataError::Empty);
    }
    if let Some(&bad) = labels.iter().find(|l| **l > 9) {
        return Err(DataError::InvalidLabel(bad));
    }
    let d = images.rows * images.cols;
    let features = Matrix::new(
        images.count,
        d,
        images.pixels.iter().map(|&p| f64::from(p) / 255.0).collect(),
    )?;
    let names = (0..d)
        .map(|k| format!("px{}_{}", k / images.cols, k % images.cols))
        .collect();
    let mut ds = Dataset::new(
        features,
        Targets::Classes {
            labels: labels.iter().map(|&l| usize::from(l)).collect(),
            num_classes: 10,
            names: (0..10).map(|c| c.to_string()).collect(),
        },
        names,
    )?;
    ds.normalization = Some(vec![super::ColumnRange { min: 0.0, max: 255.0 }; d]);
    Ok(ds)
}

/// Inverse of the 1/255 scaling, as an IDX image file.
pub fn encode_idx_images(ds: &Dataset, rows: usize, cols: usize) -> Result<Vec<u8>, DataError> {
    if ds.input_dim() != rows * cols {
        return Err(DataError::Invalid(format!(
            "{} features cannot form {rows}x{cols} images",
            ds.input_dim()
        )));
    }
    let mut out = Vec::with_capacity(16 + ds.features.data().len());
    out.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    for dim in [ds.len(), rows, cols] {
        out.extend_from_slice(&(dim as u32).to_be_bytes());
    }
    out.extend(
        ds.features
            .data()
            .iter()
            .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8),
    );
    Ok(out)
}

pub fn encode_idx_labels(ds: &Dataset) -> Result<Vec<u8>, DataError> {
    let Targets::Classes { labels, .. } = &ds.targets else {
        return Err(DataError::Invalid("IDX labels need class targets".into()));
    };
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    for &l in labels {
        out.push(u8::try_from(l).map_err(|_| DataError::Invalid(format!("label {l}")))?);
    }
    Ok(out)
}

/// Writes uncompressed IDX image and label files.
pub fn write_idx(
    ds: &Dataset,
    rows: usize,
    cols: usize,
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<(), DataError> {
    let write = |p: &Path, bytes: Vec<u8>| {
        std::fs::write(p, bytes).map_err(|source| DataError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    write(images_path.as_ref(), encode_idx_images(ds, rows, cols)?)?;
    write(labels_path.as_ref(), encode_idx_labels(ds)?)
}
