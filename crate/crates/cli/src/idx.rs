//! IDX container parsing (the MNIST distribution format).

use effdim::data::{LabeledDataset, Split};
use thiserror::Error;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IdxError {
    #[error("file is shorter than its {0}-byte header")]
    ShortHeader(usize),
    #[error("magic number 0x{found:08x} does not match expected 0x{expected:08x}")]
    BadMagic { expected: u32, found: u32 },
    #[error("payload has {got} bytes but the dimensions require {expected}")]
    PayloadLength { expected: usize, got: usize },
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("label {label} at index {index} is out of range for {classes} classes")]
    LabelOutOfRange { index: usize, label: u8, classes: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxFile {
    pub magic: u32,
    pub dims: Vec<usize>,
    pub payload: Vec<u8>,
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes([bytes[at], bytes[at + 1], bytes[at + 2], bytes[at + 3]])
}

/// The low byte of the magic is the number of dimensions.
pub fn parse_idx(bytes: &[u8], expected_magic: u32) -> Result<IdxFile, IdxError> {
    if bytes.len() < 4 {
        return Err(IdxError::ShortHeader(4));
    }
    let magic = be_u32(bytes, 0);
    if magic != expected_magic {
        return Err(IdxError::BadMagic { expected: expected_magic, found: magic });
    }
    let rank = (magic & 0xff) as usize;
    let header = 4 + 4 * rank;
    if bytes.len() < header {
        return Err(IdxError::ShortHeader(header));
    }
    let dims: Vec<usize> = (0..rank).map(|k| be_u32(bytes, 4 + 4 * k) as usize).collect();
    let expected = dims.iter().product::<usize>();
    let got = bytes.len() - header;
    if got != expected {
        return Err(IdxError::PayloadLength { expected, got });
    }
    Ok(IdxFile { magic, dims, payload: bytes[header..].to_vec() })
}

/// Pixels are scaled to [0, 1] by /255; every image is flattened.
pub fn load_idx(
    image_bytes: &[u8],
    label_bytes: &[u8],
    classes: usize,
    split: Split,
    provenance: &str,
) -> Result<LabeledDataset, IdxError> {
    let images = parse_idx(image_bytes, IMAGE_MAGIC)?;
    let labels = parse_idx(label_bytes, LABEL_MAGIC)?;
    let count = images.dims[0];
    if labels.dims[0] != count {
        return Err(IdxError::CountMismatch { images: count, labels: labels.dims[0] });
    }
    if let Some((index, &label)) = labels.payload.iter().enumerate().find(|(_, &l)| l as usize >= classes) {
        return Err(IdxError::LabelOutOfRange { index, label, classes });
    }
    let width = images.dims[1..].iter().product::<usize>();
    let inputs = if width == 0 {
        vec![Vec::new(); count]
    } else {
        images.payload.chunks_exact(width).map(|px| px.iter().map(|&p| f64::from(p) / 255.0).collect()).collect()
    };
    let labels = labels.payload.iter().map(|&l| l as usize).collect();
    Ok(LabeledDataset::new(inputs, labels, classes, split, provenance).expect("validated above"))
}

#[cfg(test)]
pub(crate) fn encode(magic: u32, dims: &[u32], payload: &[u8]) -> Vec<u8> {
    let mut out = magic.to_be_bytes().to_vec();
    for d in dims {
        out.extend_from_slice(&d.to_be_bytes());
    }
    out.extend_from_slice(payload);
    out
}
