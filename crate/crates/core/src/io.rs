//! NPY v1.0, PGM (P5) and CSV helpers.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Grid;

const MAGIC: &[u8; 6] = b"\x93NUMPY";
const ALIGN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dtype {
    F8,
    U1,
    B1,
}

/// Serializes `grid` as a C-order `<f8` NPY v1.0 file.
pub fn write_npy<W: Write>(mut w: W, grid: &Grid) -> Result<()> {
    let shape = match grid.shape() {
        [n] => format!("({n},)"),
        dims => format!(
            "({})",
            dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(", ")
        ),
    };
    let mut header = format!("{{'descr': '<f8', 'fortran_order': False, 'shape': {shape}, }}");
    // magic(6) + version(2) + len(2) + header + '\n' must be a multiple of ALIGN
    let unpadded = MAGIC.len() + 4 + header.len() + 1;
    let pad = (ALIGN - unpadded % ALIGN) % ALIGN;
    header.extend(std::iter::repeat_n(' ', pad));
    header.push('\n');
    let header_len = u16::try_from(header.len())
        .map_err(|_| Error::Npy(format!("header too long: {} bytes", header.len())))?;

    w.write_all(MAGIC)?;
    w.write_all(&[1, 0])?;
    w.write_all(&header_len.to_le_bytes())?;
    w.write_all(header.as_bytes())?;
    for v in grid.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_npy(path: impl AsRef<Path>, grid: &Grid) -> Result<()> {
    write_npy(BufWriter::new(File::create(path)?), grid)
}

/// Reads a C-order NPY v1.0 file with dtype `<f8`, `|u1` or `|b1`.
pub fn read_npy<R: Read>(mut r: R) -> Result<Grid> {
    let mut preamble = [0u8; 10];
    r.read_exact(&mut preamble)?;
    if &preamble[..6] != MAGIC {
        return Err(Error::Npy("bad magic string".into()));
    }
    if preamble[6..8] != [1, 0] {
        return Err(Error::Npy(format!(
            "unsupported format version {}.{}",
            preamble[6], preamble[7]
        )));
    }
    let header_len = u16::from_le_bytes([preamble[8], preamble[9]]) as usize;
    let mut header = vec![0u8; header_len];
    r.read_exact(&mut header)?;
    let header = std::str::from_utf8(&header).map_err(|_| Error::Npy("header is not ASCII".into()))?;
    let (dtype, shape) = parse_header(header)?;

    let count: usize = shape.iter().product();
    let width = match dtype {
        Dtype::F8 => 8,
        Dtype::U1 | Dtype::B1 => 1,
    };
    let mut raw = vec![0u8; count * width];
    r.read_exact(&mut raw)?;
    let data = match dtype {
        Dtype::F8 => raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect(),
        Dtype::U1 | Dtype::B1 => raw.iter().map(|&b| f64::from(b)).collect(),
    };
    Grid::new(shape, data)
}

pub fn load_npy(path: impl AsRef<Path>) -> Result<Grid> {
    read_npy(BufReader::new(File::open(path)?))
}

fn parse_header(header: &str) -> Result<(Dtype, Vec<usize>)> {
    let body = header
        .trim_end()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| Error::Npy(format!("header is not a dict: {header:?}")))?;

    let descr = dict_value(body, "descr")?;
    let dtype = match descr.trim().trim_matches(|c| c == '\'' || c == '"') {
        "<f8" => Dtype::F8,
        "|u1" => Dtype::U1,
        "|b1" => Dtype::B1,
        other => return Err(Error::Npy(format!("unsupported dtype {other}"))),
    };
    match dict_value(body, "fortran_order")?.trim() {
        "False" => {}
        "True" => return Err(Error::Npy("Fortran-order arrays are not supported".into())),
        other => return Err(Error::Npy(format!("bad fortran_order {other}"))),
    }
    let shape_str = dict_value(body, "shape")?;
    let inner = shape_str
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| Error::Npy(format!("bad shape {shape_str}")))?;
    let shape = inner
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<usize>().map_err(|_| Error::Npy(format!("bad shape entry {s}"))))
        .collect::<Result<Vec<_>>>()?;
    Ok((dtype, shape))
}

/// Raw text of the value stored under `key` in a python dict literal body.
fn dict_value<'a>(body: &'a str, key: &str) -> Result<&'a str> {
    let missing = || Error::Npy(format!("header missing key {key}"));
    let start = ["'", "\""]
        .iter()
        .find_map(|q| body.find(&format!("{q}{key}{q}")).map(|p| p + key.len() + 2))
        .ok_or_else(missing)?;
    let rest = body[start..].trim_start().strip_prefix(':').ok_or_else(missing)?;
    // a value ends at the first comma outside parentheses
    let mut depth = 0i32;
    for (i, ch) in rest.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Ok(&rest[..i]),
            _ => {}
        }
    }
    Ok(rest)
}

/// Writes a 2D grid as binary PGM with min mapped to 0 and max to 255.
/// Constant grids map to 0.
pub fn write_pgm<W: Write>(mut w: W, grid: &Grid) -> Result<()> {
    let [rows, cols] = grid.shape() else {
        return Err(Error::InvalidArgument(format!(
            "PGM export needs a 2D grid, got shape {:?}",
            grid.shape()
        )));
    };
    let (lo, hi) = grid
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    write!(w, "P5\n{cols} {rows}\n255\n")?;
    let pixels: Vec<u8> = grid
        .data()
        .iter()
        .map(|&v| if range > 0.0 { ((v - lo) / range * 255.0).round() as u8 } else { 0 })
        .collect();
    w.write_all(&pixels)?;
    w.flush()?;
    Ok(())
}

pub fn save_pgm(path: impl AsRef<Path>, grid: &Grid) -> Result<()> {
    write_pgm(BufWriter::new(File::create(path)?), grid)
}

/// Formats a float with 12 significant digits, `%.12g` style.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let mantissa = if mantissa.contains('.') {
            mantissa.trim_end_matches('0').trim_end_matches('.')
        } else {
            mantissa
        };
        format!("{mantissa}e{exp}")
    }
}

/// Writes a header row followed by rows of fields.
pub fn write_csv<W: Write>(w: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    for row in rows {
        out.write_record(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_csv(path: impl AsRef<Path>, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_csv(File::create(path)?, header, rows)
}
