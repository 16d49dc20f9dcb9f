//! Retained spectral coefficients and their FMG1 on-disk encoding.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! "FMG1" | rows u32 | cols u32 | total_units u32 | count u32
//! count × ( u u32 | v u32 | re f64 | im f64 )    ascending by (u, v)
//! ```

use crate::error::{Error, Result};
use crate::spectral::{ComplexSpectrum, ComplexValue};

pub const MAGIC: &[u8; 4] = b"FMG1";
pub const HEADER_LEN: usize = 20;
pub const ENTRY_LEN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseEntry {
    pub u: usize,
    pub v: usize,
    pub re: f64,
    pub im: f64,
}

/// Coefficients kept after thresholding. Entries are unique, in range and
/// sorted by `(u, v)`; `total_units == rows·cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpectrum {
    rows: usize,
    cols: usize,
    entries: Vec<SparseEntry>,
}

impl SparseSpectrum {
    pub fn new(rows: usize, cols: usize, entries: Vec<SparseEntry>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "dimensions must be positive, got {rows}x{cols}"
            )));
        }
        let fits = |n: usize| u32::try_from(n).is_ok();
        if !rows.checked_mul(cols).is_some_and(fits) {
            return Err(Error::invalid(format!(
                "{rows}x{cols} exceeds the 32-bit unit count"
            )));
        }
        validate_entries(rows, cols, &entries).map_err(Error::InvalidArgument)?;
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn total_units(&self) -> usize {
        self.rows * self.cols
    }

    pub fn entries(&self) -> &[SparseEntry] {
        &self.entries
    }

    pub fn reduction_ratio(&self) -> f64 {
        self.total_units() as f64 / self.entries.len() as f64
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + ENTRY_LEN * self.entries.len()
    }
}

fn validate_entries(
    rows: usize,
    cols: usize,
    entries: &[SparseEntry],
) -> std::result::Result<(), String> {
    for (i, e) in entries.iter().enumerate() {
        if e.u >= rows || e.v >= cols {
            return Err(format!(
                "entry {i} at ({}, {}) outside {rows}x{cols}",
                e.u, e.v
            ));
        }
        if !e.re.is_finite() || !e.im.is_finite() {
            return Err(format!("entry {i} is not finite"));
        }
        if i > 0 {
            let prev = &entries[i - 1];
            if (prev.u, prev.v) >= (e.u, e.v) {
                return Err(format!(
                    "entry {i} at ({}, {}) is duplicate or out of order",
                    e.u, e.v
                ));
            }
        }
    }
    Ok(())
}

pub fn encode_fmg(sparse: &SparseSpectrum) -> Vec<u8> {
    let mut out = Vec::with_capacity(sparse.encoded_len());
    out.extend_from_slice(MAGIC);
    for n in [
        sparse.rows,
        sparse.cols,
        sparse.total_units(),
        sparse.entries.len(),
    ] {
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for e in &sparse.entries {
        out.extend_from_slice(&(e.u as u32).to_le_bytes());
        out.extend_from_slice(&(e.v as u32).to_le_bytes());
        out.extend_from_slice(&e.re.to_le_bytes());
        out.extend_from_slice(&e.im.to_le_bytes());
    }
    out
}

fn u32_at(bytes: &[u8], at: usize) -> usize {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap())
}

pub fn decode_fmg(bytes: &[u8]) -> Result<SparseSpectrum> {
    if bytes.len() >= 4 && &bytes[..4] != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected \"FMG1\"",
            String::from_utf8_lossy(&bytes[..4])
        )));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            expected: HEADER_LEN,
            actual: bytes.len(),
            unit: "bytes",
        });
    }
    let rows = u32_at(bytes, 4);
    let cols = u32_at(bytes, 8);
    let total = u32_at(bytes, 12);
    let count = u32_at(bytes, 16);
    if rows == 0 || cols == 0 {
        return Err(Error::Corrupt(format!(
            "dimensions {rows}x{cols} must be positive"
        )));
    }
    if rows.checked_mul(cols) != Some(total) {
        return Err(Error::Corrupt(format!(
            "total_units {total} does not match {rows}x{cols}"
        )));
    }
    if count > total {
        return Err(Error::Corrupt(format!(
            "{count} entries exceed {total} units"
        )));
    }
    let expected = HEADER_LEN + ENTRY_LEN * count;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            actual: bytes.len(),
            unit: "bytes",
        });
    }
    if bytes.len() > expected {
        return Err(Error::Corrupt(format!(
            "{} trailing bytes after {count} entries",
            bytes.len() - expected
        )));
    }

    let entries: Vec<SparseEntry> = bytes[HEADER_LEN..]
        .chunks_exact(ENTRY_LEN)
        .map(|rec| SparseEntry {
            u: u32_at(rec, 0),
            v: u32_at(rec, 4),
            re: f64_at(rec, 8),
            im: f64_at(rec, 16),
        })
        .collect();
    validate_entries(rows, cols, &entries).map_err(Error::Corrupt)?;
    Ok(SparseSpectrum {
        rows,
        cols,
        entries,
    })
}

/// Dense unshifted spectrum with zeros wherever no entry is listed.
pub fn densify(sparse: &SparseSpectrum) -> ComplexSpectrum {
    let mut coefs = vec![ComplexValue::new(0.0, 0.0); sparse.total_units()];
    for e in &sparse.entries {
        coefs[e.u * sparse.cols + e.v] = ComplexValue::new(e.re, e.im);
    }
    ComplexSpectrum::new(sparse.rows, sparse.cols, coefs).expect("entries are finite")
}
