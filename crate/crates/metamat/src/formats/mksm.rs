//! `MKSM` model containers: u32 header length, a JSON header naming f64
//! arrays by shape and byte offset, then the concatenated little-endian
//! payload.

use std::collections::BTreeMap;
use std::path::Path;

use metamat_core::linalg::Matrix;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{read_artifact, write_atomic};
use crate::error::{PipelineError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ArrayEntry {
    name: String,
    shape: Vec<usize>,
    offset: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    kind: String,
    attrs: BTreeMap<String, Value>,
    arrays: Vec<ArrayEntry>,
}

/// In-memory container.
#[derive(Clone, Debug, PartialEq)]
pub struct Mksm {
    pub kind: String,
    pub attrs: BTreeMap<String, Value>,
    arrays: Vec<(String, Vec<usize>, Vec<f64>)>,
}

impl Mksm {
    pub fn new(kind: &str) -> Self {
        Self { kind: kind.to_string(), attrs: BTreeMap::new(), arrays: Vec::new() }
    }

    pub fn set_attr(&mut self, key: &str, value: impl Into<Value>) {
        self.attrs.insert(key.to_string(), value.into());
    }

    pub fn push_array(&mut self, name: &str, shape: &[usize], data: Vec<f64>) {
        debug_assert_eq!(shape.iter().product::<usize>(), data.len());
        self.arrays.push((name.to_string(), shape.to_vec(), data));
    }

    pub fn push_matrix(&mut self, name: &str, m: &Matrix) {
        self.push_array(name, &[m.rows(), m.cols()], m.as_slice().to_vec());
    }

    pub fn push_vector(&mut self, name: &str, v: &[f64]) {
        self.push_array(name, &[v.len()], v.to_vec());
    }

    pub fn array_names(&self) -> impl Iterator<Item = &str> {
        self.arrays.iter().map(|a| a.0.as_str())
    }

    pub fn array(&self, name: &str) -> Result<(&[usize], &[f64])> {
        self.arrays
            .iter()
            .find(|a| a.0 == name)
            .map(|a| (a.1.as_slice(), a.2.as_slice()))
            .ok_or_else(|| PipelineError::Argument(format!("{} container has no array '{name}'", self.kind)))
    }

    pub fn vector(&self, name: &str) -> Result<Vec<f64>> {
        Ok(self.array(name)?.1.to_vec())
    }

    pub fn matrix(&self, name: &str) -> Result<Matrix> {
        let (shape, data) = self.array(name)?;
        match shape {
            [r, c] => Ok(Matrix::from_vec(*r, *c, data.to_vec())?),
            _ => Err(PipelineError::Argument(format!("array '{name}' is not two-dimensional"))),
        }
    }

    pub fn attr(&self, key: &str) -> Result<&Value> {
        self.attrs
            .get(key)
            .ok_or_else(|| PipelineError::Argument(format!("{} container has no attribute '{key}'", self.kind)))
    }

    pub fn attr_str(&self, key: &str) -> Result<&str> {
        self.attr(key)?
            .as_str()
            .ok_or_else(|| PipelineError::Argument(format!("attribute '{key}' is not a string")))
    }

    pub fn attr_u64(&self, key: &str) -> Result<u64> {
        self.attr(key)?
            .as_u64()
            .ok_or_else(|| PipelineError::Argument(format!("attribute '{key}' is not an unsigned integer")))
    }

    pub fn attr_f64(&self, key: &str) -> Result<f64> {
        self.attr(key)?
            .as_f64()
            .ok_or_else(|| PipelineError::Argument(format!("attribute '{key}' is not a number")))
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut offset = 0;
        let arrays = self
            .arrays
            .iter()
            .map(|(name, shape, data)| {
                let entry = ArrayEntry { name: name.clone(), shape: shape.clone(), offset };
                offset += data.len() * 8;
                entry
            })
            .collect();
        let header = Header {
            format: "MKSM".into(),
            version: 1,
            kind: self.kind.clone(),
            attrs: self.attrs.clone(),
            arrays,
        };
        let json = serde_json::to_vec(&header).expect("header serializes");
        let mut out = Vec::with_capacity(4 + json.len() + offset);
        out.extend_from_slice(&(json.len() as u32).to_le_bytes());
        out.extend_from_slice(&json);
        for (_, _, data) in &self.arrays {
            for v in data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8], path: &Path) -> Result<Self> {
        if bytes.len() < 4 {
            return Err(PipelineError::at_offset(path, 0, "truncated MKSM header length"));
        }
        let header_len = u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize;
        let payload_start = 4 + header_len;
        if bytes.len() < payload_start {
            return Err(PipelineError::at_offset(path, bytes.len() as u64, "truncated MKSM header"));
        }
        let header: Header = serde_json::from_slice(&bytes[4..payload_start]).map_err(|e| {
            PipelineError::at_offset(path, 4 + e.column() as u64, format!("invalid MKSM header: {e}"))
        })?;
        if header.format != "MKSM" || header.version != 1 {
            return Err(PipelineError::at_offset(path, 4, "not an MKSM version 1 header"));
        }
        let payload = &bytes[payload_start..];
        let mut arrays = Vec::with_capacity(header.arrays.len());
        for entry in header.arrays {
            let len: usize = entry.shape.iter().product();
            let end = entry.offset + len * 8;
            if end > payload.len() {
                return Err(PipelineError::at_offset(
                    path,
                    (payload_start + payload.len()) as u64,
                    format!("array '{}' extends past the end of the payload", entry.name),
                ));
            }
            let data = payload[entry.offset..end]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            arrays.push((entry.name, entry.shape, data));
        }
        Ok(Self { kind: header.kind, attrs: header.attrs, arrays })
    }

    /// Checks the container kind after decoding.
    pub fn expect_kind(self, kind: &str, path: &Path) -> Result<Self> {
        if self.kind != kind {
            return Err(PipelineError::format(path, format!("expected a '{kind}' container, found '{}'", self.kind)));
        }
        Ok(self)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.encode())
    }

    /// Reads a container of the given kind, produced by `producer`.
    pub fn read(path: &Path, kind: &str, producer: &str) -> Result<Self> {
        Self::decode(&read_artifact(path, producer)?, path)?.expect_kind(kind, path)
    }
}
