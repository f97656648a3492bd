//! CSV tables and the binary field raster.
//!
//! Raster layout (little endian): a 64-byte header
//!
//! | offset | type     | content                          |
//! |--------|----------|----------------------------------|
//! | 0      | [u8; 8]  | magic `HPSGRID1`                 |
//! | 8      | u32      | format version (1)               |
//! | 12     | u32      | dtype code, 1 = f64              |
//! | 16     | u32      | nx                               |
//! | 20     | u32      | ny                               |
//! | 24     | u32      | channels per point (4)           |
//! | 28     | u32      | reserved, zero                   |
//! | 32     | [f64; 4] | xmin, xmax, ymin, ymax           |
//!
//! followed by `nx * ny` points, x fastest, each `Re u, Im u, Re u^s, Im u^s`,
//! then `nx * ny` region bytes (0 inside, 1 near the boundary, 2 outside).

use crate::CliError;
use hpscatter::fields::FieldGrid;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub const GRID_MAGIC: &[u8; 8] = b"HPSGRID1";
pub const GRID_HEADER_LEN: usize = 64;

/// Full-precision float: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    writer: csv::Writer<File>,
}

impl Table {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self, CliError> {
        let mut writer = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        writer.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(Table { writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.writer.flush().map_err(|e| CliError::Io(e.to_string()))
    }
}

pub fn write_grid_csv(path: &Path, grid: &FieldGrid) -> Result<(), CliError> {
    let mut t = Table::create(path, &["x", "y", "re_u", "im_u", "re_us", "im_us", "region"])?;
    for k in 0..grid.points.len() {
        let (p, u, s) = (grid.points[k], grid.total[k], grid.scattered[k]);
        t.row([num(p[0]), num(p[1]), num(u.re), num(u.im), num(s.re), num(s.im), (grid.region[k] as u8).to_string()])?;
    }
    t.finish()
}

pub fn grid_bytes(grid: &FieldGrid) -> Vec<u8> {
    let n = grid.points.len();
    let mut out = Vec::with_capacity(GRID_HEADER_LEN + n * 33);
    out.extend_from_slice(GRID_MAGIC);
    for v in [1u32, 1, grid.spec.nx as u32, grid.spec.ny as u32, 4, 0] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for b in grid.spec.bounds {
        out.extend_from_slice(&b.to_le_bytes());
    }
    debug_assert_eq!(out.len(), GRID_HEADER_LEN);
    for k in 0..n {
        for v in [grid.total[k].re, grid.total[k].im, grid.scattered[k].re, grid.scattered[k].im] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out.extend(grid.region.iter().map(|&r| r as u8));
    out
}

pub fn write_grid_binary(path: &Path, grid: &FieldGrid) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(f);
    w.write_all(&grid_bytes(grid)).and_then(|_| w.flush()).map_err(|e| CliError::Io(e.to_string()))
}

/// Parsed raster header.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridHeader {
    pub nx: usize,
    pub ny: usize,
    pub channels: usize,
    pub bounds: [f64; 4],
}

pub fn read_grid_header(bytes: &[u8]) -> Option<GridHeader> {
    if bytes.len() < GRID_HEADER_LEN || &bytes[..8] != GRID_MAGIC {
        return None;
    }
    let u = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    if u(8) != 1 || u(12) != 1 {
        return None;
    }
    Some(GridHeader { nx: u(16), ny: u(20), channels: u(24), bounds: [f(32), f(40), f(48), f(56)] })
}
