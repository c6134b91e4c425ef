use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"EMB1";

/// Dense row-major `n x d` matrix of finite `f32` values.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    n: usize,
    d: usize,
    data: Vec<f32>,
}

impl EmbeddingMatrix {
    pub fn new(n: usize, d: usize, data: Vec<f32>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::Embedding(format!("empty shape {n}x{d}")));
        }
        if data.len() != n * d {
            return Err(Error::Embedding(format!(
                "expected {} values for {n}x{d}, got {}",
                n * d,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / d,
                col: pos % d,
            });
        }
        Ok(EmbeddingMatrix { n, d, data })
    }

    pub fn from_rows(rows: &[Vec<f32>]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Embedding("ragged rows".into()));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 4 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        out.extend_from_slice(&(self.d as u32).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 12 {
            return Err(Error::Embedding(format!(
                "truncated header: {} bytes",
                bytes.len()
            )));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Embedding(format!("bad magic {:?}", &bytes[..4])));
        }
        let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let d = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let expected = n
            .checked_mul(d)
            .and_then(|c| c.checked_mul(4))
            .ok_or_else(|| Error::Embedding(format!("shape {n}x{d} overflows")))?;
        let payload = &bytes[12..];
        if payload.len() < expected {
            return Err(Error::Embedding(format!(
                "truncated payload: expected {} floats for {n}x{d}, found {}",
                n * d,
                payload.len() / 4
            )));
        }
        if payload.len() > expected {
            return Err(Error::Embedding(format!(
                "{} trailing bytes after payload",
                payload.len() - expected
            )));
        }
        let data = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(n, d, data)
    }
}

/// Reads an `EMB1` file: magic, `u32` LE rows, `u32` LE columns, then
/// row-major `f32` LE values.
pub fn read_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    EmbeddingMatrix::from_bytes(&bytes)
}

pub fn write_embeddings(m: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&m.to_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}
