//! Binary field snapshots: a five-line text header (`nx`, `ny`, `lx`, `ly`,
//! `t`), a blank line, then `nx·ny` little-endian `f64` values with `x`
//! varying fastest.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, RealField};

pub fn write_snapshot_to(phi: &RealField, t: f64, mut out: impl Write) -> Result<()> {
    let g = phi.grid();
    // `Display` for f64 prints the shortest string that parses back exactly.
    write!(out, "nx {}\nny {}\nlx {}\nly {}\nt {}\n\n", g.nx, g.ny, g.lx, g.ly, t)?;
    for v in phi.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_snapshot(phi: &RealField, t: f64, path: impl AsRef<Path>) -> Result<()> {
    write_snapshot_to(phi, t, BufWriter::new(File::create(path)?))
}

pub fn read_snapshot_from(input: impl Read) -> Result<(RealField, f64)> {
    let mut reader = BufReader::new(input);
    let mut field = |key: &str| -> Result<String> {
        let mut line = String::new();
        reader.read_line(&mut line)?;
        let line = line.trim_end_matches('\n');
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.to_string()),
            _ => Err(Error::Parse(format!("expected `{key} <value>`, got {line:?}"))),
        }
    };
    let parse_err = |what: &str| Error::Parse(format!("bad {what} in snapshot header"));
    let nx: usize = field("nx")?.parse().map_err(|_| parse_err("nx"))?;
    let ny: usize = field("ny")?.parse().map_err(|_| parse_err("ny"))?;
    let lx: f64 = field("lx")?.parse().map_err(|_| parse_err("lx"))?;
    let ly: f64 = field("ly")?.parse().map_err(|_| parse_err("ly"))?;
    let t: f64 = field("t")?.parse().map_err(|_| parse_err("t"))?;
    let mut blank = String::new();
    reader.read_line(&mut blank)?;
    if blank != "\n" {
        return Err(Error::Parse("missing blank line after snapshot header".into()));
    }
    let grid = GridSpec::new(nx, ny, lx, ly)?;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != grid.len() * 8 {
        return Err(Error::Parse(format!(
            "expected {} payload bytes, found {}",
            grid.len() * 8,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((RealField::from_values(grid, values)?, t))
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<(RealField, f64)> {
    read_snapshot_from(File::open(path)?)
}
