//! Policy checkpoint: magic, version, layer shapes, action group sizes,
//! feature statistics, then all weights as little-endian f32, row-major per
//! layer with the bias after each weight matrix.

use super::net::{NetShape, PolicyNet, RunningNorm};
use crate::dataio::write_atomic;
use crate::error::{Error, Result};
use std::path::Path;

const MAGIC: &[u8; 8] = b"DRCSPOL\0";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn save_policy(net: &PolicyNet) -> Vec<u8> {
    let mut out = Vec::with_capacity(64 + 4 * net.params.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    let layers = net.shape.layers();
    out.extend_from_slice(&(layers.len() as u32).to_le_bytes());
    for (i, o) in layers {
        out.extend_from_slice(&(i as u32).to_le_bytes());
        out.extend_from_slice(&(o as u32).to_le_bytes());
    }
    out.extend_from_slice(&(net.shape.rules as u32).to_le_bytes());
    out.extend_from_slice(&(net.shape.flips as u32).to_le_bytes());
    out.extend_from_slice(&net.norm.count.to_le_bytes());
    for v in net.norm.mean.iter().chain(&net.norm.m2) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for &p in &net.params {
        out.extend_from_slice(&(p as f32).to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let s = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(s.try_into().expect("slice of length N"))
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take()?) as usize)
    }
}

pub fn load_policy(bytes: &[u8]) -> Result<PolicyNet> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.take::<8>()? != MAGIC {
        return Err(Error::Checkpoint("not a policy checkpoint".into()));
    }
    let version = u32::from_le_bytes(r.take()?);
    if version != CHECKPOINT_VERSION {
        return Err(Error::CheckpointVersion {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let n_layers = r.u32()?;
    if n_layers != 6 {
        return Err(Error::Checkpoint(format!("expected 6 layers, found {n_layers}")));
    }
    let mut layers = [(0, 0); 6];
    for l in &mut layers {
        *l = (r.u32()?, r.u32()?);
    }
    let rules = r.u32()?;
    let flips = r.u32()?;
    let shape = NetShape {
        features: layers[0].0,
        trunk: layers[0].1,
        policy_hidden: layers[1].1,
        value_hidden: [layers[3].1, layers[4].1],
        rules,
        flips,
    };
    if shape.layers() != layers {
        return Err(Error::Checkpoint(format!("inconsistent layer shapes {layers:?}")));
    }
    shape.validate().map_err(|e| Error::Checkpoint(e.to_string()))?;
    let count = u64::from_le_bytes(r.take()?);
    let f = shape.features;
    let mut stats = Vec::with_capacity(2 * f);
    for _ in 0..2 * f {
        stats.push(f64::from_le_bytes(r.take()?));
    }
    let n = shape.parameter_count();
    let expected = r.pos + 4 * n;
    if bytes.len() != expected {
        return Err(Error::Checkpoint(format!(
            "weight blob has {} bytes, expected {}",
            bytes.len().saturating_sub(r.pos),
            4 * n
        )));
    }
    let mut params = Vec::with_capacity(n);
    for _ in 0..n {
        params.push(f32::from_le_bytes(r.take()?) as f64);
    }
    Ok(PolicyNet {
        shape,
        params,
        norm: RunningNorm {
            count,
            mean: stats[..f].to_vec(),
            m2: stats[f..].to_vec(),
        },
    })
}

pub fn write_policy(net: &PolicyNet, path: &Path) -> Result<()> {
    write_atomic(path, &save_policy(net))
}

pub fn read_policy(path: &Path) -> Result<PolicyNet> {
    load_policy(&std::fs::read(path)?)
}
