//! Netpbm images: PBM (P1 plain, P4 raw) for excursion masks and 16-bit
//! PGM (P5) for quantized fields.
//!
//! Files store the top row first while lattice row 0 is the bottom row, so
//! rows are reversed on both read and write. A set bit is written as `1`
//! (black).

use exctop_core::{BinaryImage, BoundaryMode, CovarianceModel, FieldSample};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed netpbm data at byte offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        offset,
        message: message.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PbmFormat {
    /// `P1`, ASCII digits.
    Plain,
    /// `P4`, packed bits.
    #[default]
    Raw,
}

const PLAIN_LINE: usize = 70;

pub fn write_pbm(img: &BinaryImage, format: PbmFormat) -> Vec<u8> {
    let (rows, cols) = (img.rows(), img.cols());
    let bits = img.bits();
    match format {
        PbmFormat::Plain => {
            let mut out = format!("P1\n{cols} {rows}\n");
            for r in (0..rows).rev() {
                let line = &bits[r * cols..(r + 1) * cols];
                for chunk in line.chunks(PLAIN_LINE) {
                    out.extend(chunk.iter().map(|&b| if b { '1' } else { '0' }));
                    out.push('\n');
                }
            }
            out.into_bytes()
        }
        PbmFormat::Raw => {
            let mut out = format!("P4\n{cols} {rows}\n").into_bytes();
            let stride = cols.div_ceil(8);
            for r in (0..rows).rev() {
                let mut packed = vec![0u8; stride];
                for (c, &b) in bits[r * cols..(r + 1) * cols].iter().enumerate() {
                    if b {
                        packed[c / 8] |= 0x80 >> (c % 8);
                    }
                }
                out.extend_from_slice(&packed);
            }
            out
        }
    }
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while self
                    .data
                    .get(self.pos)
                    .is_some_and(|&c| c != b'\n' && c != b'\r')
                {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn magic(&mut self) -> Result<[u8; 2], ParseError> {
        match self.data.get(..2) {
            Some(&[b'P', d]) => {
                self.pos = 2;
                Ok([b'P', d])
            }
            _ => err(0, "missing netpbm magic number"),
        }
    }

    fn header_uint(&mut self, what: &str) -> Result<usize, ParseError> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.data.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return match self.data.get(self.pos) {
                None => err(start, format!("unexpected end of file, expected {what}")),
                Some(_) => err(start, format!("expected {what}")),
            };
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .expect("ascii digits")
            .parse()
            .or_else(|_| err(start, format!("{what} out of range")))
    }

    /// The single whitespace byte separating a raw header from its payload.
    fn raster_separator(&mut self) -> Result<(), ParseError> {
        match self.data.get(self.pos) {
            Some(b) if b.is_ascii_whitespace() => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => err(self.pos, "expected whitespace after header"),
            None => err(self.pos, "unexpected end of file, expected raster data"),
        }
    }
}

fn check_dims(cols: usize, rows: usize, offset: usize) -> Result<(), ParseError> {
    if cols == 0 || rows == 0 {
        return err(offset, format!("zero image dimension {cols}x{rows}"));
    }
    if cols.checked_mul(rows).is_none_or(|n| n > 1 << 32) {
        return err(offset, format!("image dimension {cols}x{rows} too large"));
    }
    Ok(())
}

/// Parses a P1 or P4 file. Spacing and boundary mode are not stored in the
/// format and are supplied by the caller.
pub fn read_pbm(data: &[u8], spacing: f64, mode: BoundaryMode) -> Result<BinaryImage, ParseError> {
    let mut cur = Cursor { data, pos: 0 };
    let magic = cur.magic()?;
    let plain = match magic[1] {
        b'1' => true,
        b'4' => false,
        _ => return err(0, "not a PBM file (expected P1 or P4)"),
    };
    let dims_at = cur.pos;
    let cols = cur.header_uint("width")?;
    let rows = cur.header_uint("height")?;
    check_dims(cols, rows, dims_at)?;
    let mut file_rows = vec![false; rows * cols];
    if plain {
        for bit in file_rows.iter_mut() {
            cur.skip_space_and_comments();
            *bit = match data.get(cur.pos) {
                Some(b'0') => false,
                Some(b'1') => true,
                Some(_) => return err(cur.pos, "expected pixel digit 0 or 1"),
                None => return err(cur.pos, "unexpected end of file in raster"),
            };
            cur.pos += 1;
        }
        cur.skip_space_and_comments();
        if cur.pos < data.len() {
            return err(cur.pos, "trailing data after raster");
        }
    } else {
        cur.raster_separator()?;
        let stride = cols.div_ceil(8);
        let need = stride * rows;
        let raster = &data[cur.pos..];
        if raster.len() < need {
            return err(
                data.len(),
                format!(
                    "truncated raster: expected {need} bytes, found {}",
                    raster.len()
                ),
            );
        }
        if raster.len() > need {
            return err(cur.pos + need, "trailing data after raster");
        }
        for r in 0..rows {
            for c in 0..cols {
                file_rows[r * cols + c] = raster[r * stride + c / 8] & (0x80 >> (c % 8)) != 0;
            }
        }
    }
    let mut bits = Vec::with_capacity(rows * cols);
    for r in (0..rows).rev() {
        bits.extend_from_slice(&file_rows[r * cols..(r + 1) * cols]);
    }
    Ok(
        BinaryImage::from_bits(rows, cols, spacing, bits, mode, (0.0, 0.0))
            .expect("dimensions checked"),
    )
}

/// Affine quantization metadata stored next to a PGM field:
/// `value = offset + scale * sample`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgmSidecar {
    pub scale: f64,
    pub offset: f64,
    pub eps: f64,
    pub seed: u64,
    pub rows: usize,
    pub cols: usize,
    pub model: Option<CovarianceModel>,
    pub mode: BoundaryMode,
    /// World coordinates of lattice point `(0, 0)`.
    pub origin: (f64, f64),
}

const PGM_MAX: u16 = u16::MAX;

/// Quantizes a field to a 16-bit P5 image spanning `[min, max]`.
pub fn write_pgm(field: &FieldSample) -> (Vec<u8>, PgmSidecar) {
    let (lo, hi) = (field.min(), field.max());
    let scale = if hi > lo {
        (hi - lo) / PGM_MAX as f64
    } else {
        1.0
    };
    let mut out = format!("P5\n{} {}\n{}\n", field.cols, field.rows, PGM_MAX).into_bytes();
    out.reserve(2 * field.values.len());
    for r in (0..field.rows).rev() {
        for c in 0..field.cols {
            let q = ((field.get(r, c) - lo) / scale)
                .round()
                .clamp(0.0, PGM_MAX as f64) as u16;
            out.extend_from_slice(&q.to_be_bytes());
        }
    }
    let sidecar = PgmSidecar {
        scale,
        offset: lo,
        eps: field.spacing,
        seed: field.seed,
        rows: field.rows,
        cols: field.cols,
        model: field.model,
        mode: field.boundary_mode,
        origin: field.origin,
    };
    (out, sidecar)
}

/// Reads a 16-bit P5 file back into a field using its sidecar.
pub fn read_pgm(data: &[u8], sidecar: &PgmSidecar) -> Result<FieldSample, ParseError> {
    let mut cur = Cursor { data, pos: 0 };
    if cur.magic()?[1] != b'5' {
        return err(0, "not a binary PGM file (expected P5)");
    }
    let dims_at = cur.pos;
    let cols = cur.header_uint("width")?;
    let rows = cur.header_uint("height")?;
    check_dims(cols, rows, dims_at)?;
    let max_at = cur.pos;
    let maxval = cur.header_uint("maxval")?;
    if maxval != PGM_MAX as usize {
        return err(max_at, format!("expected maxval {PGM_MAX}, found {maxval}"));
    }
    if (rows, cols) != (sidecar.rows, sidecar.cols) {
        return err(
            dims_at,
            format!(
                "dimensions {cols}x{rows} disagree with sidecar {}x{}",
                sidecar.cols, sidecar.rows
            ),
        );
    }
    cur.raster_separator()?;
    let raster = &data[cur.pos..];
    if raster.len() != 2 * rows * cols {
        return err(
            data.len().min(cur.pos + 2 * rows * cols),
            format!(
                "raster holds {} bytes, expected {}",
                raster.len(),
                2 * rows * cols
            ),
        );
    }
    let mut values = vec![0.0; rows * cols];
    for (i, px) in raster.chunks_exact(2).enumerate() {
        let (fr, c) = (i / cols, i % cols);
        let q = u16::from_be_bytes([px[0], px[1]]) as f64;
        values[(rows - 1 - fr) * cols + c] = sidecar.offset + sidecar.scale * q;
    }
    Ok(FieldSample {
        rows,
        cols,
        spacing: sidecar.eps,
        values,
        boundary_mode: sidecar.mode,
        origin: sidecar.origin,
        seed: sidecar.seed,
        model: sidecar.model,
    })
}

/// Field values as a CSV matrix, top row first, full precision.
pub fn field_csv(field: &FieldSample) -> String {
    let mut out = String::with_capacity(field.values.len() * 22);
    for r in (0..field.rows).rev() {
        for c in 0..field.cols {
            if c > 0 {
                out.push(',');
            }
            write!(out, "{}", field.get(r, c)).expect("string write");
        }
        out.push('\n');
    }
    out
}
