//! Binary checkpoint format.
//!
//! Little-endian throughout:
//!
//! ```text
//! magic      8 bytes  "LCNCKPT\0"
//! version    u32      1
//! input_dim  u64
//! output_dim u64
//! n_hidden   u64
//! layers     n_hidden records, each starting with a u8 tag
//!   1 LCN : width u64, policy u8, knots, W, b, coeffs
//!   2 MLP : width u64, activation u8, W, b
//!   3 KAN : width u64, policy u8, knots, coeffs, base
//! output     W, b
//!
//! knots  = degree u64, array
//! array  = len u64, len x f64 bits
//! ```
//!
//! Values are stored as raw IEEE-754 bits, so `load(save(net)) == net`
//! bit for bit.

use super::{
    Activation, DomainPolicy, KanEdgeLayer, Layer, LcnLayer, MlpLayer, Network, OutputLayer,
};
use crate::dense::{Matrix, ShapeError};
use crate::spline::{KnotVector, SplineError};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

const MAGIC: &[u8; 8] = b"LCNCKPT\0";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Spline(#[from] SplineError),
}

fn corrupt(msg: impl Into<String>) -> CheckpointError {
    CheckpointError::Corrupt(msg.into())
}

struct Encoder<W: Write>(W);

impl<W: Write> Encoder<W> {
    fn u8(&mut self, v: u8) -> std::io::Result<()> {
        self.0.write_all(&[v])
    }

    fn u64(&mut self, v: usize) -> std::io::Result<()> {
        self.0.write_all(&(v as u64).to_le_bytes())
    }

    fn array(&mut self, values: &[f64]) -> std::io::Result<()> {
        self.u64(values.len())?;
        for v in values {
            self.0.write_all(&v.to_bits().to_le_bytes())?;
        }
        Ok(())
    }

    fn knots(&mut self, kv: &KnotVector) -> std::io::Result<()> {
        self.u64(kv.degree())?;
        self.array(kv.knots())
    }

    fn policy(&mut self, p: DomainPolicy) -> std::io::Result<()> {
        self.u8(match p {
            DomainPolicy::Clamp => 0,
            DomainPolicy::Reject => 1,
        })
    }
}

struct Decoder<R: Read>(R);

impl<R: Read> Decoder<R> {
    fn exact<const N: usize>(&mut self) -> Result<[u8; N], CheckpointError> {
        let mut buf = [0u8; N];
        self.0.read_exact(&mut buf).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => corrupt("truncated"),
            _ => e.into(),
        })?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8, CheckpointError> {
        Ok(self.exact::<1>()?[0])
    }

    fn u64(&mut self) -> Result<usize, CheckpointError> {
        let v = u64::from_le_bytes(self.exact()?);
        usize::try_from(v).map_err(|_| corrupt("length does not fit in memory"))
    }

    fn array(&mut self, expected: usize) -> Result<Vec<f64>, CheckpointError> {
        let len = self.u64()?;
        if len != expected {
            return Err(corrupt(format!("array of {len} values, expected {expected}")));
        }
        (0..len)
            .map(|_| Ok(f64::from_bits(u64::from_le_bytes(self.exact()?))))
            .collect()
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Matrix, CheckpointError> {
        Ok(Matrix::new(rows, cols, self.array(rows * cols)?)?)
    }

    fn knots(&mut self) -> Result<KnotVector, CheckpointError> {
        let degree = self.u64()?;
        let len = self.u64()?;
        if len > 1 << 24 {
            return Err(corrupt("implausible knot count"));
        }
        let knots = (0..len)
            .map(|_| Ok(f64::from_bits(u64::from_le_bytes(self.exact()?))))
            .collect::<Result<Vec<_>, CheckpointError>>()?;
        Ok(KnotVector::from_knots(knots, degree)?)
    }

    fn policy(&mut self) -> Result<DomainPolicy, CheckpointError> {
        match self.u8()? {
            0 => Ok(DomainPolicy::Clamp),
            1 => Ok(DomainPolicy::Reject),
            t => Err(corrupt(format!("unknown domain policy {t}"))),
        }
    }
}

pub fn write_network<W: Write>(writer: W, net: &Network) -> Result<(), CheckpointError> {
    let mut enc = Encoder(writer);
    enc.0.write_all(MAGIC)?;
    enc.0.write_all(&VERSION.to_le_bytes())?;
    enc.u64(net.input_dim())?;
    enc.u64(net.output_dim())?;
    enc.u64(net.hidden.len())?;
    for layer in &net.hidden {
        match layer {
            Layer::Lcn(l) => {
                enc.u8(1)?;
                enc.u64(l.weights.rows())?;
                enc.policy(l.policy)?;
                enc.knots(&l.knots)?;
                enc.array(l.weights.data())?;
                enc.array(&l.bias)?;
                enc.array(l.coeffs.data())?;
            }
            Layer::Mlp(l) => {
                enc.u8(2)?;
                enc.u64(l.weights.rows())?;
                enc.u8(match l.activation {
                    Activation::Relu => 0,
                    Activation::Sigmoid => 1,
                    Activation::Tanh => 2,
                })?;
                enc.array(l.weights.data())?;
                enc.array(&l.bias)?;
            }
            Layer::KanEdge(l) => {
                enc.u8(3)?;
                enc.u64(l.base.rows())?;
                enc.policy(l.policy)?;
                enc.knots(&l.knots)?;
                enc.array(&l.coeffs)?;
                enc.array(l.base.data())?;
            }
        }
    }
    enc.array(net.output.weights.data())?;
    enc.array(&net.output.bias)?;
    enc.0.flush()?;
    Ok(())
}

pub fn read_network<R: Read>(reader: R) -> Result<Network, CheckpointError> {
    let mut dec = Decoder(reader);
    if &dec.exact::<8>()? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = u32::from_le_bytes(dec.exact()?);
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let input_dim = dec.u64()?;
    let output_dim = dec.u64()?;
    let n_hidden = dec.u64()?;
    let mut width = input_dim;
    let mut hidden = Vec::with_capacity(n_hidden.min(1024));
    for _ in 0..n_hidden {
        let tag = dec.u8()?;
        let out = dec.u64()?;
        let layer = match tag {
            1 => {
                let policy = dec.policy()?;
                let knots = dec.knots()?;
                Layer::Lcn(LcnLayer {
                    weights: dec.matrix(out, width)?,
                    bias: dec.array(out)?,
                    coeffs: dec.matrix(out, knots.num_basis())?,
                    knots,
                    policy,
                })
            }
            2 => {
                let activation = match dec.u8()? {
                    0 => Activation::Relu,
                    1 => Activation::Sigmoid,
                    2 => Activation::Tanh,
                    a => return Err(corrupt(format!("unknown activation {a}"))),
                };
                Layer::Mlp(MlpLayer {
                    weights: dec.matrix(out, width)?,
                    bias: dec.array(out)?,
                    activation,
                })
            }
            3 => {
                let policy = dec.policy()?;
                let knots = dec.knots()?;
                Layer::KanEdge(KanEdgeLayer {
                    coeffs: dec.array(out * width * knots.num_basis())?,
                    base: dec.matrix(out, width)?,
                    knots,
                    policy,
                })
            }
            t => return Err(corrupt(format!("unknown layer tag {t}"))),
        };
        hidden.push(layer);
        width = out;
    }
    let output = OutputLayer {
        weights: dec.matrix(output_dim, width)?,
        bias: dec.array(output_dim)?,
    };
    let mut trailing = [0u8; 1];
    if dec.0.read(&mut trailing)? != 0 {
        return Err(corrupt("trailing bytes"));
    }
    let net = Network { hidden, output };
    net.validate().map_err(|e| corrupt(e.to_string()))?;
    Ok(net)
}

pub fn save_network(path: impl AsRef<Path>, net: &Network) -> Result<(), CheckpointError> {
    write_network(BufWriter::new(File::create(path)?), net)
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network, CheckpointError> {
    read_network(BufReader::new(File::open(path)?))
}
