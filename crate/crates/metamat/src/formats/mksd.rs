//! `MKSD` cell datasets: magic, u16 version, u32 count, u16 height,
//! u16 width, then one 0/1 byte per pixel, little-endian.

use std::path::Path;

use metamat_core::geometry::{BinaryGrid, UnitCell};

use super::{read_artifact, write_atomic};
use crate::error::{PipelineError, Result};

pub const MAGIC: &[u8; 4] = b"MKSD";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 14;

pub fn encode(cells: &[UnitCell]) -> Result<Vec<u8>> {
    let (width, height) = match cells.first() {
        Some(c) => (c.width(), c.height()),
        None => (0, 0),
    };
    if width > u16::MAX as usize || height > u16::MAX as usize || cells.len() > u32::MAX as usize {
        return Err(PipelineError::Argument(format!("{} cells of {width}x{height} exceed MKSD limits", cells.len())));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + cells.len() * width * height);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(cells.len() as u32).to_le_bytes());
    out.extend_from_slice(&(height as u16).to_le_bytes());
    out.extend_from_slice(&(width as u16).to_le_bytes());
    for (i, cell) in cells.iter().enumerate() {
        if (cell.width(), cell.height()) != (width, height) {
            return Err(PipelineError::Argument(format!("cell {i} is {}x{}, expected {width}x{height}", cell.width(), cell.height())));
        }
        out.extend_from_slice(cell.cells());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<Vec<UnitCell>> {
    if bytes.len() < HEADER_LEN {
        return Err(PipelineError::at_offset(path, bytes.len() as u64, "truncated MKSD header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(PipelineError::at_offset(path, 0, "bad magic, expected \"MKSD\""));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(PipelineError::at_offset(path, 4, format!("unsupported MKSD version {version}")));
    }
    let count = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let height = u16::from_le_bytes([bytes[10], bytes[11]]) as usize;
    let width = u16::from_le_bytes([bytes[12], bytes[13]]) as usize;
    let pixels = width * height;
    let expected = HEADER_LEN + count * pixels;
    if bytes.len() != expected {
        return Err(PipelineError::at_offset(
            path,
            bytes.len().min(expected) as u64,
            format!("payload length mismatch: header implies {expected} bytes, file has {}", bytes.len()),
        ));
    }
    if count > 0 && pixels == 0 {
        return Err(PipelineError::at_offset(path, 10, "zero-sized cells"));
    }
    let mut cells = Vec::with_capacity(count);
    for i in 0..count {
        let start = HEADER_LEN + i * pixels;
        let data = &bytes[start..start + pixels];
        if let Some(k) = data.iter().position(|&v| v > 1) {
            return Err(PipelineError::at_offset(
                path,
                (start + k) as u64,
                format!("non-binary pixel value {} in cell {i}", data[k]),
            ));
        }
        cells.push(UnitCell::new(width, height, data.to_vec())?);
    }
    Ok(cells)
}

pub fn write(path: &Path, cells: &[UnitCell]) -> Result<()> {
    write_atomic(path, &encode(cells)?)
}

/// Reads a dataset produced by `gen` or `import`.
pub fn read(path: &Path) -> Result<Vec<UnitCell>> {
    decode(&read_artifact(path, "gen")?, path)
}
