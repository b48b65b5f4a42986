//! Binary measurement file, little-endian:
//!
//! | bytes | field                         |
//! |-------|-------------------------------|
//! | 4     | magic `LSCS`                  |
//! | 2     | format version `u16` = 1      |
//! | 2     | reserved `u16` = 0            |
//! | 8     | master seed `u64`             |
//! | 4     | `N_ROW` `u32`                 |
//! | 4     | `N_COL` `u32`                 |
//! | 4     | `M` `u32`                     |
//! | 8·N_ROW·M | `Y` as `f64`, row-major   |
//!
//! Trailing bytes are rejected.

use std::fs;
use std::path::Path;

use super::MeasurementSet;
use crate::error::{Error, Result};
use crate::tensor::SensingEnsemble;

pub const MAGIC: &[u8; 4] = b"LSCS";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 28;

pub fn encode_measurements(ms: &MeasurementSet) -> Vec<u8> {
    let ens = ms.ensemble();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * ms.values().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&ens.master_seed().to_le_bytes());
    for dim in [ens.n_row(), ens.n_col(), ens.m()] {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for v in ms.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn u16_at(data: &[u8], at: usize) -> u16 {
    u16::from_le_bytes(data[at..at + 2].try_into().unwrap())
}

fn u32_at(data: &[u8], at: usize) -> usize {
    u32::from_le_bytes(data[at..at + 4].try_into().unwrap()) as usize
}

pub fn decode_measurements(data: &[u8]) -> Result<MeasurementSet> {
    if data.len() < 4 || &data[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    if data.len() < HEADER_LEN {
        return Err(Error::MeasurementFormat(format!(
            "truncated header ({} of {HEADER_LEN} bytes)",
            data.len()
        )));
    }
    let version = u16_at(data, 4);
    if version != VERSION {
        return Err(Error::VersionMismatch(version));
    }
    if u16_at(data, 6) != 0 {
        return Err(Error::MeasurementFormat("reserved field is not zero".into()));
    }
    let seed = u64::from_le_bytes(data[8..16].try_into().unwrap());
    let (n_row, n_col, m) = (u32_at(data, 16), u32_at(data, 20), u32_at(data, 24));
    let ensemble = SensingEnsemble::new(seed, m, n_col, n_row)
        .map_err(|e| Error::MeasurementFormat(format!("invalid dimensions: {e}")))?;

    let payload = &data[HEADER_LEN..];
    let expected = n_row
        .checked_mul(m)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| Error::MeasurementFormat("dimensions overflow".into()))?;
    if payload.len() != expected {
        return Err(Error::PayloadLength {
            expected,
            actual: payload.len(),
        });
    }
    let mut y = Vec::with_capacity(n_row * m);
    for chunk in payload.chunks_exact(8) {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if v.is_nan() {
            return Err(Error::MeasurementFormat("NaN in payload".into()));
        }
        y.push(v);
    }
    MeasurementSet::new(ensemble, y)
}

pub fn write_measurements(ms: &MeasurementSet, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_measurements(ms)).map_err(|e| Error::file(path, e))
}

pub fn read_measurements(path: impl AsRef<Path>) -> Result<MeasurementSet> {
    let path = path.as_ref();
    let data = fs::read(path).map_err(|e| Error::file(path, e))?;
    decode_measurements(&data)
}
