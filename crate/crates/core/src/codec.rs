//! PGM input/output, size alignment and spectrum rendering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{shift_center, ComplexSpectrum, ImagePlane};

/// Reads a binary (P5) or ASCII (P2) PGM, normalizing samples to `[0, 1]`.
pub fn read_pgm(bytes: &[u8]) -> Result<ImagePlane> {
    let mut header = Header { bytes, pos: 0 };
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => {
            return Err(Error::Parse {
                offset: 0,
                message: "expected magic number P5 or P2".into(),
            })
        }
    };
    header.pos = 2;
    let cols = header.number("width")?;
    let rows = header.number("height")?;
    let maxval = header.number("maxval")?;
    if cols == 0 || rows == 0 {
        return Err(Error::Parse {
            offset: header.pos,
            message: format!("image dimensions must be positive, got {cols}x{rows}"),
        });
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parse {
            offset: header.pos,
            message: format!("maxval must be in 1..=65535, got {maxval}"),
        });
    }
    let count = rows.checked_mul(cols).ok_or_else(|| Error::Parse {
        offset: header.pos,
        message: "image dimensions overflow".into(),
    })?;
    let scale = 1.0 / maxval as f64;

    let raw = if binary {
        // Exactly one whitespace byte separates maxval from the raster.
        match bytes.get(header.pos) {
            Some(b) if b.is_ascii_whitespace() => header.pos += 1,
            _ => {
                return Err(Error::Parse {
                    offset: header.pos,
                    message: "expected whitespace after maxval".into(),
                })
            }
        }
        let width = if maxval < 256 { 1 } else { 2 };
        let expected = header.pos + count * width;
        if bytes.len() < expected {
            return Err(Error::Truncated {
                expected,
                actual: bytes.len(),
                unit: "bytes",
            });
        }
        let raster = &bytes[header.pos..expected];
        if width == 1 {
            raster.iter().map(|&b| b as usize).collect::<Vec<_>>()
        } else {
            raster
                .chunks_exact(2)
                .map(|p| u16::from_be_bytes([p[0], p[1]]) as usize)
                .collect()
        }
    } else {
        let mut raw = Vec::with_capacity(count);
        for i in 0..count {
            if header.at_end() {
                return Err(Error::Truncated {
                    expected: count,
                    actual: i,
                    unit: "samples",
                });
            }
            raw.push(header.number("sample")?);
        }
        raw
    };

    if let Some(i) = raw.iter().position(|&r| r > maxval) {
        return Err(Error::Parse {
            offset: header.pos,
            message: format!("sample {i} exceeds maxval {maxval}"),
        });
    }
    ImagePlane::new(
        rows,
        cols,
        raw.into_iter().map(|r| r as f64 * scale).collect(),
    )
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_blank(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn at_end(&self) -> bool {
        let mut ahead = Header {
            bytes: self.bytes,
            pos: self.pos,
        };
        ahead.skip_blank();
        ahead.pos >= self.bytes.len()
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        if self
            .bytes
            .get(self.pos)
            .is_some_and(|&b| !b.is_ascii_whitespace() && b != b'#')
        {
            return Err(Error::Parse {
                offset: self.pos,
                message: format!("expected whitespace before {what}"),
            });
        }
        self.skip_blank();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Parse {
                offset: start,
                message: format!("expected {what}"),
            });
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse {
                offset: start,
                message: format!("{what} out of range"),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmDepth {
    Eight,
    Sixteen,
}

impl PgmDepth {
    pub fn maxval(self) -> u32 {
        match self {
            PgmDepth::Eight => 255,
            PgmDepth::Sixteen => 65535,
        }
    }
}

/// Clamps to `[0, 1]`, quantizes with round-half-up and emits a P5 file with
/// header `P5\n<cols> <rows>\n<maxval>\n`.
pub fn write_pgm(plane: &ImagePlane, depth: PgmDepth) -> Vec<u8> {
    let maxval = depth.maxval();
    let mut out = format!("P5\n{} {}\n{}\n", plane.cols(), plane.rows(), maxval).into_bytes();
    out.reserve(plane.len() * if maxval > 255 { 2 } else { 1 });
    for &s in plane.samples() {
        let q = quantize(s, maxval);
        if maxval > 255 {
            out.extend_from_slice(&(q as u16).to_be_bytes());
        } else {
            out.push(q as u8);
        }
    }
    out
}

/// Round-half-up of `sample·maxval`. Products within 1e-7 of a half step
/// count as exact halves, so results computed along different floating-point
/// paths quantize identically.
pub(crate) fn quantize(sample: f64, maxval: u32) -> u32 {
    let shifted = sample.clamp(0.0, 1.0) * maxval as f64 + 0.5;
    let nearest = shifted.round();
    let q = if (shifted - nearest).abs() < 1e-7 {
        nearest
    } else {
        shifted.floor()
    };
    q.clamp(0.0, maxval as f64) as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignMode {
    #[default]
    CenterPad,
    TopleftPad,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentPolicy {
    mode: AlignMode,
    pad_value: f64,
}

impl AlignmentPolicy {
    pub fn new(mode: AlignMode, pad_value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&pad_value) {
            return Err(Error::invalid(format!(
                "pad value {pad_value} outside [0, 1]"
            )));
        }
        Ok(Self { mode, pad_value })
    }

    pub fn mode(&self) -> AlignMode {
        self.mode
    }

    pub fn pad_value(&self) -> f64 {
        self.pad_value
    }
}

impl Default for AlignmentPolicy {
    fn default() -> Self {
        Self {
            mode: AlignMode::CenterPad,
            pad_value: 0.0,
        }
    }
}

impl From<AlignMode> for AlignmentPolicy {
    fn from(mode: AlignMode) -> Self {
        Self {
            mode,
            pad_value: 0.0,
        }
    }
}

/// Embeds every plane in a common (max rows) × (max cols) canvas.
pub fn align(planes: &[ImagePlane], policy: AlignmentPolicy) -> Result<Vec<ImagePlane>> {
    if planes.is_empty() {
        return Err(Error::invalid("no images to align"));
    }
    let rows = planes.iter().map(ImagePlane::rows).max().unwrap_or(0);
    let cols = planes.iter().map(ImagePlane::cols).max().unwrap_or(0);

    planes
        .iter()
        .map(|p| {
            if p.dims() == (rows, cols) {
                return Ok(p.clone());
            }
            let (top, left) = match policy.mode {
                AlignMode::CenterPad => ((rows - p.rows()) / 2, (cols - p.cols()) / 2),
                AlignMode::TopleftPad => (0, 0),
            };
            let mut samples = vec![policy.pad_value; rows * cols];
            for x in 0..p.rows() {
                let dst = (x + top) * cols + left;
                samples[dst..dst + p.cols()]
                    .copy_from_slice(&p.samples()[x * p.cols()..(x + 1) * p.cols()]);
            }
            ImagePlane::new(rows, cols, samples)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeatmapOptions {
    /// Center DC before rendering.
    pub shift: bool,
    /// Render `log(1 + |I|)` instead of `|I|`.
    pub log: bool,
}

/// Log-magnitude heatmap of the centered spectrum, rescaled to `[0, 1]`.
pub fn spectrum_heatmap(spec: &ComplexSpectrum) -> ImagePlane {
    render_spectrum(
        spec,
        HeatmapOptions {
            shift: true,
            log: true,
        },
    )
}

pub fn render_spectrum(spec: &ComplexSpectrum, opts: HeatmapOptions) -> ImagePlane {
    let centered;
    let spec = if opts.shift && !spec.is_shifted() {
        centered = shift_center(spec);
        &centered
    } else {
        spec
    };
    let values: Vec<f64> = spec
        .coefficients()
        .iter()
        .map(|c| if opts.log { c.norm().ln_1p() } else { c.norm() })
        .collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(0.0, f64::max);
    let samples = if hi == 0.0 {
        vec![0.0; values.len()]
    } else if hi == lo {
        vec![1.0; values.len()]
    } else {
        values.iter().map(|v| (v - lo) / (hi - lo)).collect()
    };
    ImagePlane::new(spec.rows(), spec.cols(), samples).expect("heatmap samples are finite")
}
