//! Versioned binary model files.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic      6 bytes  "EHRNET"
//! version    u8       currently 1
//! kind       u8       0 autoencoder, 1 generator, 2 discriminator, 3 mlp
//! noise_dim  u32      generator noise width, 0 otherwise
//! best_epoch u32      autoencoder best epoch, u32::MAX otherwise
//! layers     u32      then per layer:
//!   fan_in u32, fan_out u32, activation u8,
//!   fan_out * fan_in f64 weights (row-major), fan_out f64 bias
//! log_cols   u32
//! log_rows   u32      then log_rows * log_cols f64, row-major
//! ```

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::net::{Activation, Dense, NetParams};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 6] = b"EHRNET";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Autoencoder,
    Generator,
    Discriminator,
    Mlp,
}

impl ModelKind {
    fn tag(self) -> u8 {
        match self {
            ModelKind::Autoencoder => 0,
            ModelKind::Generator => 1,
            ModelKind::Discriminator => 2,
            ModelKind::Mlp => 3,
        }
    }

    fn from_tag(t: u8) -> Option<Self> {
        Some(match t {
            0 => ModelKind::Autoencoder,
            1 => ModelKind::Generator,
            2 => ModelKind::Discriminator,
            3 => ModelKind::Mlp,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub kind: ModelKind,
    pub net: NetParams,
    pub noise_dim: u32,
    pub best_epoch: Option<u32>,
    /// Per-epoch training log; every row has the same width.
    pub log: Vec<Vec<f64>>,
}

impl ModelFile {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&[VERSION, self.kind.tag()])?;
        w.write_all(&self.noise_dim.to_le_bytes())?;
        w.write_all(&self.best_epoch.unwrap_or(u32::MAX).to_le_bytes())?;
        w.write_all(&(self.net.layers().len() as u32).to_le_bytes())?;
        for l in self.net.layers() {
            w.write_all(&(l.fan_in() as u32).to_le_bytes())?;
            w.write_all(&(l.fan_out() as u32).to_le_bytes())?;
            w.write_all(&[l.activation.tag()])?;
            for v in l.weights.iter().chain(l.bias.iter()) {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        let cols = self.log.first().map_or(0, Vec::len);
        if self.log.iter().any(|r| r.len() != cols) {
            return Err(Error::Format("ragged training log".into()));
        }
        w.write_all(&(cols as u32).to_le_bytes())?;
        w.write_all(&(self.log.len() as u32).to_le_bytes())?;
        for v in self.log.iter().flatten() {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 6];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let mut head = [0u8; 2];
        read_exact(&mut r, &mut head)?;
        if head[0] != VERSION {
            return Err(Error::Format(format!("unsupported version {}", head[0])));
        }
        let kind = ModelKind::from_tag(head[1])
            .ok_or_else(|| Error::Format(format!("unknown model kind {}", head[1])))?;
        let noise_dim = read_u32(&mut r)?;
        let best_epoch = match read_u32(&mut r)? {
            u32::MAX => None,
            e => Some(e),
        };
        let n_layers = read_u32(&mut r)? as usize;
        let mut layers = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            let fan_in = read_u32(&mut r)? as usize;
            let fan_out = read_u32(&mut r)? as usize;
            let mut act = [0u8; 1];
            read_exact(&mut r, &mut act)?;
            let activation = Activation::from_tag(act[0])
                .ok_or_else(|| Error::Format(format!("unknown activation {}", act[0])))?;
            let weights = read_f64s(&mut r, fan_in * fan_out)?;
            let bias = read_f64s(&mut r, fan_out)?;
            layers.push(Dense {
                weights: Array2::from_shape_vec((fan_out, fan_in), weights)
                    .map_err(|e| Error::Format(e.to_string()))?,
                bias: Array1::from(bias),
                activation,
            });
        }
        let net = NetParams::new(layers)?;
        let cols = read_u32(&mut r)? as usize;
        let rows = read_u32(&mut r)? as usize;
        let mut log = Vec::with_capacity(rows);
        for _ in 0..rows {
            log.push(read_f64s(&mut r, cols)?);
        }
        Ok(ModelFile {
            kind,
            net,
            noise_dim,
            best_epoch,
            log,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf).map_err(|e| Error::file(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::file(path, e))?;
        Self::read_from(bytes.as_slice())
    }

    pub fn expect_kind(self, kind: ModelKind) -> Result<Self> {
        if self.kind != kind {
            return Err(Error::Format(format!(
                "expected {kind:?} model, found {:?}",
                self.kind
            )));
        }
        Ok(self)
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Format("truncated model file".into()),
        _ => Error::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    let mut b = [0u8; 8];
    for _ in 0..n {
        read_exact(r, &mut b)?;
        out.push(f64::from_le_bytes(b));
    }
    Ok(out)
}
