//! Binary frame files.
//!
//! Layout: the line `NERF-FRAME`, one line of JSON header, the line `DATA`,
//! then `M * N` entries in row-major order, each a little-endian `f64` pair
//! `(re, im)`. Loading a saved frame reproduces every bit.

use std::fs;
use std::io::{BufRead, Read};
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use nalgebra::DMatrix;
use nerf_core::spectral::Provenance;
use nerf_core::{Complex64, Frame, ScalarField};
use serde::{Deserialize, Serialize};

pub const MAGIC: &str = "NERF-FRAME";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameHeader {
    pub version: u32,
    pub m: usize,
    pub n: usize,
    pub scalar_field: ScalarField,
    pub provenance: Provenance,
}

pub fn to_bytes(frame: &Frame) -> Result<Vec<u8>> {
    let header = FrameHeader {
        version: FORMAT_VERSION,
        m: frame.dim(),
        n: frame.len(),
        scalar_field: frame.scalar_field(),
        provenance: frame.provenance().clone(),
    };
    let mut out = Vec::with_capacity(64 + 16 * frame.dim() * frame.len());
    out.extend_from_slice(MAGIC.as_bytes());
    out.push(b'\n');
    serde_json::to_writer(&mut out, &header)?;
    out.extend_from_slice(b"\nDATA\n");
    let a = frame.matrix();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out.extend_from_slice(&a[(i, j)].re.to_le_bytes());
            out.extend_from_slice(&a[(i, j)].im.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn from_bytes(bytes: &[u8]) -> Result<Frame> {
    let mut reader = bytes;
    let mut line = String::new();
    reader.read_line(&mut line)?;
    ensure!(line.trim_end() == MAGIC, "not a frame file (missing {MAGIC} line)");
    line.clear();
    reader.read_line(&mut line)?;
    let header: FrameHeader = serde_json::from_str(line.trim_end()).context("bad frame header")?;
    if header.version != FORMAT_VERSION {
        bail!("unsupported frame file version {}", header.version);
    }
    line.clear();
    reader.read_line(&mut line)?;
    ensure!(line.trim_end() == "DATA", "frame file is missing the DATA line");
    let count = header
        .m
        .checked_mul(header.n)
        .and_then(|c| c.checked_mul(16))
        .context("frame dimensions overflow")?;
    let mut payload = Vec::with_capacity(count);
    reader.read_to_end(&mut payload)?;
    ensure!(
        payload.len() == count,
        "frame payload has {} bytes, header implies {count}",
        payload.len()
    );
    let word = |k: usize| f64::from_le_bytes(payload[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    let n = header.n;
    let matrix = DMatrix::from_fn(header.m, n, |i, j| {
        let k = 2 * (i * n + j);
        Complex64::new(word(k), word(k + 1))
    });
    Ok(Frame::new(matrix, header.scalar_field, header.provenance)?)
}

pub fn save(frame: &Frame, path: &Path) -> Result<()> {
    fs::write(path, to_bytes(frame)?).with_context(|| format!("cannot write {}", path.display()))
}

pub fn load(path: &Path) -> Result<Frame> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    from_bytes(&bytes).with_context(|| format!("cannot load {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nerf_core::constructions::{gaussian_frame, singer_etf};

    #[test]
    fn round_trip_is_bit_exact() {
        for frame in [
            singer_etf(3).unwrap(),
            gaussian_frame(5, 9, 1, ScalarField::Complex).unwrap(),
            gaussian_frame(2, 3, 2, ScalarField::Real).unwrap(),
        ] {
            let bytes = to_bytes(&frame).unwrap();
            let back = from_bytes(&bytes).unwrap();
            assert_eq!(back.provenance(), frame.provenance());
            assert_eq!(back.scalar_field(), frame.scalar_field());
            for (a, b) in frame.matrix().iter().zip(back.matrix().iter()) {
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
            assert_eq!(to_bytes(&back).unwrap(), bytes);
        }
    }

    #[test]
    fn header_regenerates_construction() {
        let frame = gaussian_frame(3, 7, 11, ScalarField::Real).unwrap();
        let back = from_bytes(&to_bytes(&frame).unwrap()).unwrap();
        assert_eq!(back.provenance().construction.build().unwrap(), frame);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let mut bytes = to_bytes(&singer_etf(2).unwrap()).unwrap();
        bytes.pop();
        assert!(from_bytes(&bytes).is_err());
        assert!(from_bytes(b"garbage\n").is_err());
    }
}
