//! NPY cell arrays of unsigned 8-bit values, shape (N, H, W).

use std::io::Cursor;
use std::path::Path;

use metamat_core::geometry::{BinaryGrid, UnitCell};
use npyz::{DType, NpyFile, Order, TypeChar, WriterBuilder};

use super::{read_artifact, write_atomic};
use crate::error::{PipelineError, Result};

/// Maximum number of offending records quoted in an import error.
pub const MAX_LISTED: usize = 10;

/// Builds a format error listing at most [`MAX_LISTED`] problems.
pub fn listing_error(path: &Path, what: &str, problems: &[String]) -> PipelineError {
    let shown = problems.iter().take(MAX_LISTED).cloned().collect::<Vec<_>>().join("; ");
    let more = problems.len().saturating_sub(MAX_LISTED);
    let tail = if more > 0 { format!(" (and {more} more)") } else { String::new() };
    PipelineError::format(path, format!("{} {what}: {shown}{tail}", problems.len()))
}

pub fn encode(cells: &[UnitCell]) -> Result<Vec<u8>> {
    let (w, h) = cells.first().map_or((0, 0), |c| (c.width(), c.height()));
    let data: Vec<u8> = cells.iter().flat_map(|c| c.cells().iter().copied()).collect();
    encode_raw(&[cells.len() as u64, h as u64, w as u64], &data)
}

/// Unchecked u8 array of the given C-order shape.
pub fn encode_raw(shape: &[u64], data: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut writer = npyz::WriteOptions::<u8>::new()
        .default_dtype()
        .shape(shape)
        .writer(&mut out)
        .begin_nd()
        .map_err(|e| PipelineError::Argument(e.to_string()))?;
    writer.extend(data.iter().copied()).map_err(|e| PipelineError::Argument(e.to_string()))?;
    writer.finish().map_err(|e| PipelineError::Argument(e.to_string()))?;
    Ok(out)
}

pub fn write(path: &Path, cells: &[UnitCell]) -> Result<()> {
    write_atomic(path, &encode(cells)?)
}

/// Decodes an (N, size, size) u8 array, validating shape and binarity.
pub fn decode(bytes: &[u8], path: &Path, size: usize) -> Result<Vec<UnitCell>> {
    let npy = NpyFile::new(Cursor::new(bytes)).map_err(|e| PipelineError::format(path, format!("invalid NPY header: {e}")))?;
    let unsigned_byte = matches!(npy.dtype(), DType::Plain(t) if t.size_field() == 1 && t.type_char() == TypeChar::Uint);
    if !unsigned_byte {
        return Err(PipelineError::format(path, format!("dtype {} is not unsigned 8-bit", npy.dtype().descr())));
    }
    let shape = npy.shape().to_vec();
    if shape.len() != 3 || shape[1] as usize != size || shape[2] as usize != size {
        return Err(PipelineError::format(path, format!("shape {shape:?} is not (N, {size}, {size})")));
    }
    if npy.order() != Order::C && shape[1] > 1 {
        return Err(PipelineError::format(path, "Fortran-ordered arrays are not supported"));
    }
    let n = shape[0] as usize;
    let pixels = size * size;
    let data: Vec<u8> = npy.into_vec().map_err(|e| PipelineError::format(path, format!("invalid NPY payload: {e}")))?;
    if data.len() != n * pixels {
        return Err(PipelineError::format(path, format!("payload holds {} values, shape needs {}", data.len(), n * pixels)));
    }
    let problems: Vec<String> = data
        .chunks_exact(pixels)
        .enumerate()
        .filter_map(|(i, c)| {
            c.iter().position(|&v| v > 1).map(|k| format!("record {i} has value {} at ({}, {})", c[k], k / size, k % size))
        })
        .collect();
    if !problems.is_empty() {
        return Err(listing_error(path, "non-binary records", &problems));
    }
    data.chunks_exact(pixels).map(|c| Ok(UnitCell::new(size, size, c.to_vec())?)).collect()
}

pub fn read(path: &Path, size: usize) -> Result<Vec<UnitCell>> {
    decode(&read_artifact(path, "import")?, path, size)
}
