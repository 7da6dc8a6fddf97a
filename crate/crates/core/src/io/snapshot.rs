//! Snapshot files: a `key = value` metadata sidecar (`.meta`) next to a raw
//! little-endian `f64` payload (`.bin`), nodes in x-fastest order with the
//! three components of each node interleaved.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::types::{TensorGrid, VectorField};

const FORMAT: &str = "llgsp-snapshot";
const LAYOUT: &str = "x-fastest, components interleaved";

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: VectorField,
    pub role: String,
    pub time: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Meta {
    format: String,
    version: u32,
    role: String,
    time: f64,
    dim: usize,
    lengths: Vec<f64>,
    points: Vec<usize>,
    dtype: String,
    endianness: String,
    layout: String,
    payload: String,
    payload_bytes: usize,
}

fn snap_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Snapshot {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Writes `<base>.meta` and `<base>.bin`; returns the metadata path.
pub fn write_snapshot(base: &Path, field: &VectorField, role: &str, time: f64) -> Result<PathBuf> {
    let meta_path = base.with_extension("meta");
    let bin_path = base.with_extension("bin");
    let grid = field.grid();
    let mut payload = Vec::with_capacity(field.values().len() * 24);
    for v in field.values() {
        for c in v {
            payload.extend_from_slice(&c.to_le_bytes());
        }
    }
    let list = |xs: Vec<String>| format!("[{}]", xs.join(", "));
    // `{:?}` prints the shortest decimal that parses back to the same f64.
    let meta = format!(
        "format = \"{FORMAT}\"\nversion = 1\nrole = \"{role}\"\ntime = {:?}\ndim = {}\nlengths = {}\npoints = {}\ndtype = \"f64\"\nendianness = \"little\"\nlayout = \"{LAYOUT}\"\npayload = \"{}\"\npayload_bytes = {}\n",
        time,
        grid.dim(),
        list(grid.lengths().iter().map(|l| format!("{l:?}")).collect()),
        list(grid.points().iter().map(|p| p.to_string()).collect()),
        bin_path.file_name().and_then(|n| n.to_str()).unwrap_or_default(),
        payload.len(),
    );
    std::fs::write(&bin_path, &payload).map_err(|e| Error::io(&bin_path, e))?;
    std::fs::write(&meta_path, meta).map_err(|e| Error::io(&meta_path, e))?;
    Ok(meta_path)
}

/// Reads a snapshot from its `.meta` path (or the common base path).
pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let meta_path = path.with_extension("meta");
    let text = std::fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: Meta =
        toml::from_str(&text).map_err(|e| snap_err(&meta_path, e.message().to_string()))?;
    if meta.format != FORMAT || meta.version != 1 {
        return Err(snap_err(
            &meta_path,
            format!("unsupported format {} v{}", meta.format, meta.version),
        ));
    }
    if meta.dtype != "f64" || meta.endianness != "little" || meta.layout != LAYOUT {
        return Err(snap_err(
            &meta_path,
            "unsupported dtype, endianness or layout",
        ));
    }
    if meta.lengths.len() != meta.dim || meta.points.len() != meta.dim {
        return Err(snap_err(&meta_path, "dim does not match lengths/points"));
    }
    let grid = TensorGrid::new(&meta.lengths, &meta.points)?;
    let expected = grid.len() * 3 * 8;
    let bin_path = meta_path.with_file_name(&meta.payload);
    let bytes = std::fs::read(&bin_path).map_err(|e| Error::io(&bin_path, e))?;
    if bytes.len() != expected || meta.payload_bytes != expected {
        return Err(snap_err(
            &bin_path,
            format!("payload has {} bytes, expected {expected}", bytes.len()),
        ));
    }
    let values = bytes
        .chunks_exact(24)
        .map(|node| {
            let c =
                |i: usize| f64::from_le_bytes(node[8 * i..8 * i + 8].try_into().expect("8 bytes"));
            [c(0), c(1), c(2)]
        })
        .collect();
    Ok(Snapshot {
        field: VectorField::new(grid, values)?,
        role: meta.role,
        time: meta.time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let grid = TensorGrid::new(&[1.0, 0.1 + 0.2, 1e-7], &[5, 4, 6]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let values = (0..grid.len())
            .map(|_| {
                [
                    rng.gen::<f64>() * 1e300,
                    -rng.gen::<f64>() * 1e-300,
                    rng.gen_range(-1.0..1.0),
                ]
            })
            .collect();
        let field = VectorField::new(grid, values).unwrap();
        let t = 0.1 + 0.2;
        let meta = write_snapshot(&dir.path().join("u_0001"), &field, "u", t).unwrap();
        let back = read_snapshot(&meta).unwrap();
        assert_eq!(back.role, "u");
        assert_eq!(back.time.to_bits(), t.to_bits());
        assert_eq!(back.field.grid(), field.grid());
        for (a, b) in back.field.values().iter().zip(field.values()) {
            for c in 0..3 {
                assert_eq!(a[c].to_bits(), b[c].to_bits());
            }
        }
        let bytes = std::fs::read(dir.path().join("u_0001.bin")).unwrap();
        assert_eq!(bytes.len(), 3 * 120 * 8);
        assert_eq!(&bytes[..8], &field.values()[0][0].to_le_bytes());
        assert_eq!(&bytes[8..16], &field.values()[0][1].to_le_bytes());
        assert_eq!(&bytes[24..32], &field.values()[1][0].to_le_bytes());
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let grid = TensorGrid::new(&[1.0], &[8]).unwrap();
        let meta =
            write_snapshot(&dir.path().join("s"), &VectorField::zeros(&grid), "s", 0.0).unwrap();
        std::fs::write(dir.path().join("s.bin"), [0u8; 10]).unwrap();
        assert!(matches!(
            read_snapshot(&meta).unwrap_err(),
            Error::Snapshot { .. }
        ));
    }
}
