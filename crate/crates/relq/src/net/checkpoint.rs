//! Checkpoint encoding: a trained network together with the layout that
//! describes its input, so a saved policy is self-contained.
//!
//! Binary format, little-endian throughout:
//!
//! ```text
//! magic    8  b"RELQCKPT"
//! version  4  u32, currently 1
//! layout   4  u32 byte length, then that many bytes of layout text
//! scaler   1  u8 flag, then u32 count + count f64 running maxima
//! dims     4  u32 count, then count u32 layer widths
//! params   8  u64 count, then count f64 parameters
//! digest  32  SHA-256 of everything above
//! ```
//!
//! Optimizer moments are not stored; a loaded network predicts bit-for-bit
//! identically but resumes training with fresh Adam state.

use sha2::{Digest, Sha256};

use super::{NetConfig, QNet};
use crate::encode::{EncodingLayout, InputScaler};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"RELQCKPT";
const VERSION: u32 = 1;

/// Serializes `(net, layout, scaler)` to checkpoint bytes.
pub fn save_checkpoint(net: &QNet, layout: &EncodingLayout, scaler: &InputScaler) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    let layout_text = layout.to_text();
    out.extend_from_slice(&(layout_text.len() as u32).to_le_bytes());
    out.extend_from_slice(layout_text.as_bytes());
    out.push(scaler.enabled() as u8);
    out.extend_from_slice(&(scaler.maxes().len() as u32).to_le_bytes());
    for m in scaler.maxes() {
        out.extend_from_slice(&m.to_le_bytes());
    }
    out.extend_from_slice(&(net.dims().len() as u32).to_le_bytes());
    for &d in net.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    let params = net.params();
    out.extend_from_slice(&(params.len() as u64).to_le_bytes());
    for p in &params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.data.len())
            .ok_or_else(|| Error::Checkpoint("truncated".into()))?;
        let slice = &self.data[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Decodes a checkpoint, verifying the digest and that the stored network
/// dimensions agree with the stored layout.
pub fn load_checkpoint(bytes: &[u8]) -> Result<(QNet, EncodingLayout, InputScaler)> {
    load_with_config(bytes, NetConfig::default())
}

/// As [`load_checkpoint`] but with explicit optimizer constants for resumed
/// training.
pub fn load_with_config(
    bytes: &[u8],
    config: NetConfig,
) -> Result<(QNet, EncodingLayout, InputScaler)> {
    if bytes.len() < MAGIC.len() + 4 + 32 {
        return Err(Error::Checkpoint("truncated".into()));
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    let computed = Sha256::digest(body);
    if digest != computed.as_slice() {
        return Err(Error::Checkpoint("checksum mismatch".into()));
    }

    let mut cursor = Cursor { data: body, pos: 0 };
    if cursor.take(8)? != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = cursor.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }

    let layout_len = cursor.u32()? as usize;
    let layout_text = std::str::from_utf8(cursor.take(layout_len)?)
        .map_err(|_| Error::Checkpoint("layout text is not UTF-8".into()))?;
    let layout = EncodingLayout::from_text(layout_text)
        .map_err(|e| Error::Checkpoint(format!("invalid layout: {e}")))?;

    let scaler_enabled = cursor.take(1)?[0] != 0;
    let max_count = cursor.u32()? as usize;
    if max_count != layout.num_features() {
        return Err(Error::Checkpoint(format!(
            "scaler tracks {max_count} features, layout has {}",
            layout.num_features()
        )));
    }
    let mut maxes = Vec::with_capacity(max_count.min(1 << 20));
    for _ in 0..max_count {
        maxes.push(cursor.f64()?);
    }
    let scaler = InputScaler::from_parts(scaler_enabled, maxes);

    let dim_count = cursor.u32()? as usize;
    let mut dims = Vec::with_capacity(dim_count.min(1 << 16));
    for _ in 0..dim_count {
        dims.push(cursor.u32()? as usize);
    }
    if dims.first() != Some(&layout.input_len()) {
        return Err(Error::Checkpoint(format!(
            "network input width {:?} does not match layout input length {}",
            dims.first(),
            layout.input_len()
        )));
    }

    let param_count = cursor.u64()? as usize;
    let mut params = Vec::with_capacity(param_count.min(1 << 24));
    for _ in 0..param_count {
        params.push(cursor.f64()?);
    }
    if cursor.pos != body.len() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }

    let net = QNet::from_parts(dims, params, config)
        .map_err(|e| Error::Checkpoint(format!("invalid network: {e}")))?;
    Ok((net, layout, scaler))
}
