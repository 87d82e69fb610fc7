//! Grid serialization.
//!
//! Binary layout: ASCII magic `PHZ1`, height and width as little-endian
//! `u32`, then `height * width` little-endian `f64` values in row-major
//! order. CSV uses `,` separators, `\n` line ends and no header; values are
//! written in shortest round-trip form.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::grid::Grid2D;

pub const GRID_MAGIC: &[u8; 4] = b"PHZ1";

#[derive(Debug, Error)]
pub enum GridFileError {
    #[error("bad magic {0:?}, expected PHZ1")]
    BadMagic([u8; 4]),
    #[error("truncated grid file: expected {expected} payload bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("grid dimensions must be positive, got {height}x{width}")]
    ZeroDims { height: u32, width: u32 },
    #[error("grid contains non-finite value {0}")]
    NonFinite(f64),
    #[error("grid too large to serialize: {0}x{1}")]
    TooLarge(usize, usize),
    #[error("csv line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GridFileError>;

pub fn encode_grid(grid: &Grid2D, mut out: impl Write) -> Result<()> {
    if let Some(&v) = grid.data().iter().find(|v| !v.is_finite()) {
        return Err(GridFileError::NonFinite(v));
    }
    let (h, w) = grid.shape();
    let (h32, w32) = match (u32::try_from(h), u32::try_from(w)) {
        (Ok(h), Ok(w)) => (h, w),
        _ => return Err(GridFileError::TooLarge(h, w)),
    };
    out.write_all(GRID_MAGIC)?;
    out.write_all(&h32.to_le_bytes())?;
    out.write_all(&w32.to_le_bytes())?;
    for v in grid.data() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn decode_grid(mut input: impl Read) -> Result<Grid2D> {
    let mut header = [0u8; 12];
    let mut got = 0;
    while got < header.len() {
        match input.read(&mut header[got..])? {
            0 => break,
            n => got += n,
        }
    }
    if got < 4 || &header[..4] != GRID_MAGIC {
        let mut magic = [0u8; 4];
        magic[..got.min(4)].copy_from_slice(&header[..got.min(4)]);
        return Err(GridFileError::BadMagic(magic));
    }
    if got < 12 {
        return Err(GridFileError::Truncated {
            expected: 8,
            found: got - 4,
        });
    }
    let height = u32::from_le_bytes(header[4..8].try_into().expect("4 bytes"));
    let width = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes"));
    if height == 0 || width == 0 {
        return Err(GridFileError::ZeroDims { height, width });
    }
    let expected = height as usize * width as usize * 8;
    let mut payload = Vec::with_capacity(expected);
    input.take(expected as u64).read_to_end(&mut payload)?;
    if payload.len() < expected {
        return Err(GridFileError::Truncated {
            expected,
            found: payload.len(),
        });
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(Grid2D::new(height as usize, width as usize, data).expect("dimensions checked"))
}

pub fn write_grid(path: impl AsRef<Path>, grid: &Grid2D) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    encode_grid(grid, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<Grid2D> {
    decode_grid(BufReader::new(File::open(path)?))
}

/// One line per grid row.
pub fn export_csv(grid: &Grid2D) -> String {
    let mut out = String::with_capacity(grid.len() * 20);
    for i in 0..grid.height() {
        for (j, v) in grid.row(i).iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{v:?}"));
        }
        out.push('\n');
    }
    out
}

pub fn import_csv(text: &str) -> Result<Grid2D> {
    let mut width = None;
    let mut data = Vec::new();
    let mut height = 0;
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|e| GridFileError::Csv {
                    line: n + 1,
                    reason: format!("{s:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(GridFileError::Csv {
                    line: n + 1,
                    reason: format!("expected {w} values, found {}", row.len()),
                })
            }
            _ => {}
        }
        data.extend(row);
        height += 1;
    }
    let width = width.unwrap_or(0);
    Grid2D::new(height, width, data).map_err(|_| GridFileError::ZeroDims {
        height: height as u32,
        width: width as u32,
    })
}
