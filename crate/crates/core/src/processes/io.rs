//! Path files.
//!
//! CSV: header `t,value`, one row per grid point, floats in shortest
//! round-trip form so a read reproduces every bit.
//!
//! Binary (little endian): magic `FDVPATH1`, `u64` cell count, `f64`
//! horizon, `u8` params flag, then if set `u8` kind, `f64` α, `f64` H,
//! `u8` normalize flag; finally `cells + 1` `f64` values.

use std::io::{BufRead, BufReader, Read, Write};

use super::{Grid, Path, ProcessKind, ProcessParams};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"FDVPATH1";

pub fn write_path_csv<W: Write>(path: &Path, mut out: W) -> Result<()> {
    writeln!(out, "t,value")?;
    for (t, v) in path.times().zip(&path.values) {
        writeln!(out, "{t},{v}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_path_csv<R: Read>(input: R) -> Result<Path> {
    let mut lines = BufReader::new(input).lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "t,value" => {}
        _ => return Err(Error::Format("missing header 't,value'".into())),
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (t, v) = line
            .split_once(',')
            .ok_or_else(|| Error::Format(format!("line {}: expected 't,value'", i + 2)))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Format(format!("line {}: {e}", i + 2)))
        };
        times.push(parse(t)?);
        values.push(parse(v)?);
    }
    if times.len() < 2 {
        return Err(Error::Format("a path needs at least two points".into()));
    }
    let grid = Grid::uniform(times.len() - 1, *times.last().unwrap())?;
    for (k, &t) in times.iter().enumerate() {
        if (t - grid.time(k)).abs() > 1e-9 * grid.horizon {
            return Err(Error::Format(format!("time {t} breaks the uniform grid")));
        }
    }
    Path::new(grid, values)
}

fn kind_code(kind: ProcessKind) -> u8 {
    match kind {
        ProcessKind::Rlp => 0,
        ProcessKind::Lmp => 1,
        ProcessKind::Lfsm => 2,
        ProcessKind::Balanced => 3,
    }
}

pub fn write_path<W: Write>(path: &Path, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(path.grid.cells as u64).to_le_bytes())?;
    out.write_all(&path.grid.horizon.to_le_bytes())?;
    match &path.params {
        None => out.write_all(&[0])?,
        Some(p) => {
            out.write_all(&[1, kind_code(p.kind())])?;
            out.write_all(&p.alpha().get().to_le_bytes())?;
            out.write_all(&p.hurst().to_le_bytes())?;
            out.write_all(&[u8::from(p.normalize_gaussian())])?;
        }
    }
    for v in &path.values {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

fn read_u8<R: Read>(r: &mut R) -> Result<u8> {
    let mut b = [0u8; 1];
    r.read_exact(&mut b)?;
    Ok(b[0])
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    read_u64(r).map(f64::from_bits)
}

pub fn read_path<R: Read>(mut input: R) -> Result<Path> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a binary path file".into()));
    }
    let cells = usize::try_from(read_u64(&mut input)?)
        .map_err(|_| Error::Format("cell count overflows".into()))?;
    if cells > 1 << 28 {
        return Err(Error::Format(format!("implausible cell count {cells}")));
    }
    let horizon = read_f64(&mut input)?;
    let grid = Grid::uniform(cells, horizon)?;
    let params = match read_u8(&mut input)? {
        0 => None,
        1 => {
            let kind = match read_u8(&mut input)? {
                0 => ProcessKind::Rlp,
                1 => ProcessKind::Lmp,
                2 => ProcessKind::Lfsm,
                3 => ProcessKind::Balanced,
                k => return Err(Error::Format(format!("unknown process code {k}"))),
            };
            let alpha = read_f64(&mut input)?;
            let hurst = read_f64(&mut input)?;
            let normalize = read_u8(&mut input)? != 0;
            Some(ProcessParams::new(kind, alpha, hurst, normalize)?)
        }
        f => return Err(Error::Format(format!("bad params flag {f}"))),
    };
    let values = (0..grid.points())
        .map(|_| read_f64(&mut input))
        .collect::<Result<Vec<_>>>()?;
    let path = Path::new(grid, values)?;
    Ok(match params {
        Some(p) => path.with_params(p),
        None => path,
    })
}
