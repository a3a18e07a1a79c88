//! Flat binary storage for kernel parameter sets.
//!
//! Layout (all integers `u32` little-endian, all floats `f64` little-endian):
//!
//! ```text
//! magic   4 bytes  "UIKP"
//! version 1 byte   1
//! kind    1 byte   1 = adapter, 2 = moe
//! payload          see below
//! ```
//!
//! Matrix := `rows: u32`, `cols: u32`, `rows*cols` floats (row-major).
//! Dense  := Matrix (weight), then `cols` floats (bias).
//! Mlp    := Dense (hidden), Dense (output).
//!
//! Adapter payload := Matrix (queries), Dense (fusion).
//! MoE payload     := `top_k: u32`, `num_experts: u32`, Dense (router),
//!                    then `num_experts` Mlps.
//!
//! Values are stored as `f64` regardless of the in-memory scalar; `f32`
//! parameter sets round-trip exactly.

use std::io::{self, Read, Write};

use thiserror::Error;

use super::layers::{Dense, Mlp};
use super::matrix::Matrix;
use super::moe::MoeLayer;
use super::{AdapterConfig, KernelError};
use crate::scalar::Scalar;

const MAGIC: [u8; 4] = *b"UIKP";
const VERSION: u8 = 1;
const KIND_ADAPTER: u8 = 1;
const KIND_MOE: u8 = 2;

#[derive(Debug, Error)]
pub enum ParamsIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad parameter file: {0}")]
    Format(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

fn write_u32<W: Write>(w: &mut W, v: u32) -> io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, ParamsIoError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn write_floats<S: Scalar, W: Write>(w: &mut W, values: &[S]) -> io::Result<()> {
    for v in values {
        w.write_all(&v.to_f64().unwrap_or(f64::NAN).to_le_bytes())?;
    }
    Ok(())
}

fn read_floats<S: Scalar, R: Read>(r: &mut R, n: usize) -> Result<Vec<S>, ParamsIoError> {
    let mut out = Vec::with_capacity(n);
    let mut buf = [0u8; 8];
    for _ in 0..n {
        r.read_exact(&mut buf)?;
        let v = f64::from_le_bytes(buf);
        out.push(S::from_f64(v).ok_or_else(|| {
            ParamsIoError::Format(format!("value {v} does not fit the scalar type"))
        })?);
    }
    Ok(out)
}

fn write_matrix<S: Scalar, W: Write>(w: &mut W, m: &Matrix<S>) -> io::Result<()> {
    write_u32(w, m.rows() as u32)?;
    write_u32(w, m.cols() as u32)?;
    write_floats(w, m.data())
}

fn read_matrix<S: Scalar, R: Read>(r: &mut R) -> Result<Matrix<S>, ParamsIoError> {
    let rows = read_u32(r)? as usize;
    let cols = read_u32(r)? as usize;
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| ParamsIoError::Format("matrix shape overflows".to_string()))?;
    let data = read_floats(r, count)?;
    Ok(Matrix::new(rows, cols, data)?)
}

fn write_dense<S: Scalar, W: Write>(w: &mut W, d: &Dense<S>) -> io::Result<()> {
    write_matrix(w, &d.weight)?;
    write_floats(w, &d.bias)
}

fn read_dense<S: Scalar, R: Read>(r: &mut R) -> Result<Dense<S>, ParamsIoError> {
    let weight = read_matrix(r)?;
    let bias = read_floats(r, weight.cols())?;
    Ok(Dense::new(weight, bias)?)
}

fn write_header<W: Write>(w: &mut W, kind: u8) -> io::Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&[VERSION, kind])
}

fn read_header<R: Read>(r: &mut R, want_kind: u8) -> Result<(), ParamsIoError> {
    let mut buf = [0u8; 6];
    r.read_exact(&mut buf)?;
    if buf[..4] != MAGIC {
        return Err(ParamsIoError::Format("wrong magic bytes".to_string()));
    }
    if buf[4] != VERSION {
        return Err(ParamsIoError::Format(format!(
            "unsupported version {}",
            buf[4]
        )));
    }
    if buf[5] != want_kind {
        return Err(ParamsIoError::Format(format!(
            "expected kind {want_kind}, found {}",
            buf[5]
        )));
    }
    Ok(())
}

pub fn save_adapter<S: Scalar, W: Write>(
    cfg: &AdapterConfig<S>,
    w: &mut W,
) -> Result<(), ParamsIoError> {
    write_header(w, KIND_ADAPTER)?;
    write_matrix(w, &cfg.queries)?;
    write_dense(w, &cfg.fusion)?;
    Ok(())
}

pub fn load_adapter<S: Scalar, R: Read>(r: &mut R) -> Result<AdapterConfig<S>, ParamsIoError> {
    read_header(r, KIND_ADAPTER)?;
    let queries = read_matrix(r)?;
    let fusion = read_dense(r)?;
    Ok(AdapterConfig::new(queries, fusion)?)
}

pub fn save_moe<S: Scalar, W: Write>(layer: &MoeLayer<S>, w: &mut W) -> Result<(), ParamsIoError> {
    write_header(w, KIND_MOE)?;
    write_u32(w, layer.top_k as u32)?;
    write_u32(w, layer.experts.len() as u32)?;
    write_dense(w, &layer.router)?;
    for expert in &layer.experts {
        write_dense(w, &expert.hidden)?;
        write_dense(w, &expert.output)?;
    }
    Ok(())
}

pub fn load_moe<S: Scalar, R: Read>(r: &mut R) -> Result<MoeLayer<S>, ParamsIoError> {
    read_header(r, KIND_MOE)?;
    let top_k = read_u32(r)? as usize;
    let num_experts = read_u32(r)? as usize;
    let router = read_dense(r)?;
    let mut experts = Vec::with_capacity(num_experts);
    for _ in 0..num_experts {
        let hidden = read_dense(r)?;
        let output = read_dense(r)?;
        experts.push(Mlp::new(hidden, output)?);
    }
    if experts.is_empty() {
        return Err(ParamsIoError::Format("no experts".to_string()));
    }
    if top_k < 1 || top_k > experts.len() {
        return Err(ParamsIoError::Format(format!(
            "top_k {top_k} out of range for {} experts",
            experts.len()
        )));
    }
    if experts
        .iter()
        .any(|e| e.in_dim() != experts[0].in_dim() || e.out_dim() != experts[0].out_dim())
    {
        return Err(ParamsIoError::Format(
            "expert shapes are not identical".to_string(),
        ));
    }
    Ok(MoeLayer {
        router,
        experts,
        top_k,
    })
}
