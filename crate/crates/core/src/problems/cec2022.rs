//! Shift/rotation data for the CEC2022 functions.
//!
//! File format: whitespace-separated floats, the first `D` are the shift
//! vector, the next `D×D` the rotation matrix in row-major order.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Cec2022Transform {
    shift: Vec<f64>,
    rotation: Vec<f64>,
    hash: String,
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Cec2022Transform {
    /// Zero shift and identity rotation.
    pub fn identity(dim: usize) -> Self {
        let mut rotation = vec![0.0; dim * dim];
        for i in 0..dim {
            rotation[i * dim + i] = 1.0;
        }
        Self {
            shift: vec![0.0; dim],
            rotation,
            hash: "identity".to_string(),
        }
    }

    pub fn new(shift: Vec<f64>, rotation: Vec<f64>) -> Result<Self> {
        let dim = shift.len();
        if rotation.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                context: "cec2022 rotation",
                expected: dim * dim,
                found: rotation.len(),
            });
        }
        let mut bytes = Vec::with_capacity(8 * (dim + dim * dim));
        for v in shift.iter().chain(&rotation) {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let hash = sha256_hex(&bytes);
        Ok(Self {
            shift,
            rotation,
            hash,
        })
    }

    pub fn parse(text: &str, dim: usize) -> std::result::Result<Self, String> {
        let values: Vec<f64> = text
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| format!("bad number `{t}`: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        let need = dim + dim * dim;
        if values.len() < need {
            return Err(format!("expected {need} values for D={dim}, found {}", values.len()));
        }
        Self::new(values[..dim].to_vec(), values[dim..need].to_vec()).map_err(|e| e.to_string())
    }

    pub fn from_file(path: impl AsRef<Path>, dim: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Transform {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::parse(&text, dim).map_err(|message| Error::Transform {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    /// Content hash recorded in run metadata.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    /// `out = R · (rate · (x − shift))`.
    pub fn apply(&self, x: &[f64], rate: f64, out: &mut [f64]) {
        let d = self.dim();
        let y: Vec<f64> = x.iter().zip(&self.shift).map(|(a, o)| (a - o) * rate).collect();
        for (i, o) in out.iter_mut().enumerate().take(d) {
            let row = &self.rotation[i * d..(i + 1) * d];
            *o = row.iter().zip(&y).map(|(r, v)| r * v).sum();
        }
    }
}
