//! Binary snapshot format for field states.
//!
//! Layout, all little-endian:
//!   magic "SPNF", version u32, dim u32, then per axis N_j u32, then per
//!   axis L_j f64, then time f64 and component count u32, followed by
//!   the payload: one row-major f64 block per component.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::grid::{Grid, Vec3Field};
use crate::geometry::Vec3;

pub const MAGIC: [u8; 4] = *b"SPNF";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a snapshot file (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    BadVersion(u32),
    #[error("malformed snapshot: {0}")]
    Malformed(String),
    #[error(transparent)]
    Grid(#[from] crate::grid::GridError),
}

/// A field state together with its grid and simulation time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: Grid,
    pub time: f64,
    pub field: Vec3Field,
}

pub fn write_snapshot(path: &Path, snap: &Snapshot) -> Result<(), SnapshotError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    let grid = &snap.grid;
    w.write_all(&(grid.dim() as u32).to_le_bytes())?;
    for &n in grid.counts() {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    for &l in grid.extents() {
        w.write_all(&l.to_le_bytes())?;
    }
    w.write_all(&snap.time.to_le_bytes())?;
    w.write_all(&3u32.to_le_bytes())?;
    for c in 0..3 {
        for v in snap.field.values() {
            let x = match c {
                0 => v.x,
                1 => v.y,
                _ => v.z,
            };
            w.write_all(&x.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32, SnapshotError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read) -> Result<f64, SnapshotError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, SnapshotError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(SnapshotError::BadVersion(version));
    }
    let dim = read_u32(&mut r)? as usize;
    if !(1..=3).contains(&dim) {
        return Err(SnapshotError::Malformed(format!("dimension {dim}")));
    }
    let mut counts = Vec::with_capacity(dim);
    for _ in 0..dim {
        counts.push(read_u32(&mut r)? as usize);
    }
    let mut extents = Vec::with_capacity(dim);
    for _ in 0..dim {
        extents.push(read_f64(&mut r)?);
    }
    let time = read_f64(&mut r)?;
    let components = read_u32(&mut r)? as usize;
    if components != 3 {
        return Err(SnapshotError::Malformed(format!("{components} components, expected 3")));
    }
    let grid = Grid::new(&counts, &extents)?;
    let n = grid.num_nodes();
    let mut comps = vec![vec![0.0f64; n]; 3];
    for comp in comps.iter_mut() {
        for x in comp.iter_mut() {
            *x = read_f64(&mut r)?;
        }
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(SnapshotError::Malformed("trailing bytes".into()));
    }
    let data: Vec<Vec3> =
        (0..n).map(|i| Vec3::new(comps[0][i], comps[1][i], comps[2][i])).collect();
    let field = Vec3Field::from_values(&grid, data)?;
    Ok(Snapshot { grid, time, field })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bit_exact() {
        let grid = Grid::new(&[5, 7], &[1.0, 2.0]).unwrap();
        let field = Vec3Field::from_fn(&grid, |x| {
            Vec3::new(x[0] * 1.7 - 0.3, (x[1] * 3.1).sin(), x[0] * x[1])
        });
        let snap = Snapshot { grid, time: 0.123456789, field };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.spnf");
        write_snapshot(&path, &snap).unwrap();
        let back = read_snapshot(&path).unwrap();
        assert_eq!(back, snap);
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.spnf");
        std::fs::File::create(&path).unwrap().write_all(b"NOPE1234").unwrap();
        assert!(matches!(read_snapshot(&path), Err(SnapshotError::BadMagic)));

        let path2 = dir.path().join("ver.spnf");
        let mut f = std::fs::File::create(&path2).unwrap();
        f.write_all(&MAGIC).unwrap();
        f.write_all(&99u32.to_le_bytes()).unwrap();
        drop(f);
        assert!(matches!(read_snapshot(&path2), Err(SnapshotError::BadVersion(99))));
    }

    #[test]
    fn rejects_truncated_payload() {
        let grid = Grid::new(&[4, 4], &[1.0, 1.0]).unwrap();
        let field = Vec3Field::constant(&grid, Vec3::new(0.0, 0.0, 1.0));
        let snap = Snapshot { grid, time: 0.0, field };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.spnf");
        write_snapshot(&path, &snap).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        assert!(matches!(read_snapshot(&path), Err(SnapshotError::Io(_))));
    }
}
