//! 2D discrete Fourier transforms over real image planes.
//!
//! Convention: `I(u,v) = Σx Σy i(x,y)·exp(−j2π(ux/R + vy/C))` where `x`, `u`
//! index rows (R of them) and `y`, `v` index columns (C of them). The forward
//! transform is unscaled; the inverse carries the `1/(R·C)` factor.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type ComplexValue = Complex64;

/// Real-valued R×C grid of intensities, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane {
    rows: usize,
    cols: usize,
    samples: Vec<f64>,
}

impl ImagePlane {
    pub fn new(rows: usize, cols: usize, samples: Vec<f64>) -> Result<Self> {
        check_dims(rows, cols, samples.len())?;
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid(format!("sample {i} is not finite")));
        }
        Ok(Self {
            rows,
            cols,
            samples,
        })
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows.saturating_mul(cols)])
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::filled(rows, cols, 0.0)
    }

    /// Builds a plane by evaluating `f(x, y)` at every row `x` and column `y`.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut samples = Vec::with_capacity(rows.saturating_mul(cols));
        for x in 0..rows {
            for y in 0..cols {
                samples.push(f(x, y));
            }
        }
        Self::new(rows, cols, samples)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.samples[x * self.cols + y]
    }

    pub fn max(&self) -> f64 {
        self.samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Applies `f` to every sample. Fails if `f` produces a non-finite value.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.rows,
            self.cols,
            self.samples.iter().map(|&s| f(s)).collect(),
        )
    }
}

/// Dense R×C grid of complex DFT coefficients, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    rows: usize,
    cols: usize,
    coefficients: Vec<ComplexValue>,
    shifted: bool,
}

impl ComplexSpectrum {
    /// Unshifted spectrum (DC at index `(0, 0)`).
    pub fn new(rows: usize, cols: usize, coefficients: Vec<ComplexValue>) -> Result<Self> {
        Self::with_layout(rows, cols, coefficients, false)
    }

    pub fn with_layout(
        rows: usize,
        cols: usize,
        coefficients: Vec<ComplexValue>,
        shifted: bool,
    ) -> Result<Self> {
        check_dims(rows, cols, coefficients.len())?;
        if let Some(i) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("coefficient {i} is not finite")));
        }
        Ok(Self {
            rows,
            cols,
            coefficients,
            shifted,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(
            rows,
            cols,
            vec![ComplexValue::new(0.0, 0.0); rows.saturating_mul(cols)],
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn is_shifted(&self) -> bool {
        self.shifted
    }

    pub fn coefficients(&self) -> &[ComplexValue] {
        &self.coefficients
    }

    pub fn get(&self, u: usize, v: usize) -> ComplexValue {
        self.coefficients[u * self.cols + v]
    }

    /// Index of the Hermitian partner of `(u, v)`.
    pub fn partner(&self, u: usize, v: usize) -> (usize, usize) {
        ((self.rows - u) % self.rows, (self.cols - v) % self.cols)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// `self += scale · other`, coefficientwise.
    pub fn accumulate(&mut self, scale: f64, other: &ComplexSpectrum) -> Result<()> {
        if self.dims() != other.dims() || self.shifted != other.shifted {
            return Err(Error::invalid(format!(
                "cannot accumulate {}x{} spectrum into {}x{}",
                other.rows, other.cols, self.rows, self.cols
            )));
        }
        for (acc, c) in self.coefficients.iter_mut().zip(&other.coefficients) {
            *acc += c * scale;
        }
        Ok(())
    }
}

fn check_dims(rows: usize, cols: usize, len: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::invalid(format!(
            "dimensions must be positive, got {rows}x{cols}"
        )));
    }
    match rows.checked_mul(cols) {
        Some(n) if n == len => Ok(()),
        _ => Err(Error::invalid(format!(
            "{rows}x{cols} grid needs {} values, got {len}",
            rows * cols
        ))),
    }
}

/// O(n²) DFT evaluated straight from the defining sum.
///
/// Forward: `X[k] = Σm x[m]·exp(−j2πkm/n)`. Inverse: `x[m] = (1/n)·Σk X[k]·exp(+j2πkm/n)`.
pub fn dft1d_direct(signal: &[ComplexValue], inverse: bool) -> Result<Vec<ComplexValue>> {
    if signal.is_empty() {
        return Err(Error::invalid("cannot transform an empty signal"));
    }
    Ok(direct(signal, inverse))
}

fn direct(signal: &[ComplexValue], inverse: bool) -> Vec<ComplexValue> {
    let n = signal.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    // k·m is reduced mod n so the angle stays in [0, 2π).
    let table: Vec<ComplexValue> = (0..n)
        .map(|j| ComplexValue::from_polar(1.0, sign * 2.0 * PI * j as f64 / n as f64))
        .collect();
    let scale = if inverse { 1.0 / n as f64 } else { 1.0 };
    (0..n)
        .map(|k| {
            let sum = signal
                .iter()
                .enumerate()
                .fold(ComplexValue::new(0.0, 0.0), |acc, (m, &x)| {
                    acc + x * table[(k * m) % n]
                });
            sum * scale
        })
        .collect()
}

/// Same contract as [`dft1d_direct`]; radix-2 decimation for power-of-two
/// lengths, the direct sum otherwise.
pub fn fft1d(signal: &[ComplexValue], inverse: bool) -> Result<Vec<ComplexValue>> {
    if signal.is_empty() {
        return Err(Error::invalid("cannot transform an empty signal"));
    }
    Ok(transform(signal, inverse))
}

fn transform(signal: &[ComplexValue], inverse: bool) -> Vec<ComplexValue> {
    let n = signal.len();
    if n < 2 || !n.is_power_of_two() {
        return direct(signal, inverse);
    }

    let bits = n.trailing_zeros();
    let mut buf: Vec<ComplexValue> = (0..n)
        .map(|i| signal[i.reverse_bits() >> (usize::BITS - bits)])
        .collect();

    let sign = if inverse { 1.0 } else { -1.0 };
    let twiddles: Vec<ComplexValue> = (0..n / 2)
        .map(|j| ComplexValue::from_polar(1.0, sign * 2.0 * PI * j as f64 / n as f64))
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for block in buf.chunks_exact_mut(len) {
            let (lo, hi) = block.split_at_mut(half);
            for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let t = *b * twiddles[j * stride];
                *b = *a - t;
                *a += t;
            }
        }
        len <<= 1;
    }

    if inverse {
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
    }
    buf
}

/// Transforms every row and then every column of a row-major grid in place.
fn transform_grid(buf: &mut [ComplexValue], rows: usize, cols: usize, inverse: bool) {
    buf.par_chunks_mut(cols).for_each(|row| {
        let out = transform(row, inverse);
        row.copy_from_slice(&out);
    });

    let mut transposed = vec![ComplexValue::new(0.0, 0.0); buf.len()];
    for x in 0..rows {
        for y in 0..cols {
            transposed[y * rows + x] = buf[x * cols + y];
        }
    }
    transposed.par_chunks_mut(rows).for_each(|col| {
        let out = transform(col, inverse);
        col.copy_from_slice(&out);
    });
    for y in 0..cols {
        for x in 0..rows {
            buf[x * cols + y] = transposed[y * rows + x];
        }
    }
}

/// Forward 2D DFT of a real plane.
///
/// The output is made exactly Hermitian: each conjugate pair is replaced by
/// the average of the two computed values, and self-paired coefficients
/// have their imaginary part zeroed. Magnitudes of partners are then
/// bitwise equal, so magnitude thresholding keeps or drops whole pairs.
pub fn forward2d(plane: &ImagePlane) -> ComplexSpectrum {
    let (rows, cols) = plane.dims();
    let mut buf: Vec<ComplexValue> = plane
        .samples()
        .iter()
        .map(|&s| ComplexValue::new(s, 0.0))
        .collect();
    transform_grid(&mut buf, rows, cols, false);

    for u in 0..rows {
        for v in 0..cols {
            let i = u * cols + v;
            let j = ((rows - u) % rows) * cols + (cols - v) % cols;
            if i == j {
                buf[i].im = 0.0;
            } else if i < j {
                let avg = (buf[i] + buf[j].conj()) * 0.5;
                buf[i] = avg;
                buf[j] = avg.conj();
            }
        }
    }

    ComplexSpectrum {
        rows,
        cols,
        coefficients: buf,
        shifted: false,
    }
}

/// Inverse 2D DFT; returns the real part and the largest discarded imaginary
/// magnitude.
pub fn inverse2d_with_residue(spec: &ComplexSpectrum) -> Result<(ImagePlane, f64)> {
    if spec.shifted {
        return Err(Error::invalid(
            "spectrum is center-shifted; unshift it before inverting",
        ));
    }
    let (rows, cols) = spec.dims();
    let mut buf = spec.coefficients.clone();
    transform_grid(&mut buf, rows, cols, true);
    let residue = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
    let plane = ImagePlane::new(rows, cols, buf.into_iter().map(|c| c.re).collect())?;
    Ok((plane, residue))
}

/// Inverse 2D DFT, real part only. Samples are not clamped.
pub fn inverse2d(spec: &ComplexSpectrum) -> Result<ImagePlane> {
    inverse2d_with_residue(spec).map(|(plane, _)| plane)
}

/// Swaps quadrants so DC moves to `(R/2, C/2)`, or back again when the
/// spectrum is already shifted. Toggles the shifted flag.
pub fn shift_center(spec: &ComplexSpectrum) -> ComplexSpectrum {
    let (rows, cols) = spec.dims();
    let (dr, dc) = if spec.shifted {
        (rows - rows / 2, cols - cols / 2)
    } else {
        (rows / 2, cols / 2)
    };
    let mut out = vec![ComplexValue::new(0.0, 0.0); spec.len()];
    for u in 0..rows {
        for v in 0..cols {
            out[((u + dr) % rows) * cols + (v + dc) % cols] = spec.coefficients[u * cols + v];
        }
    }
    ComplexSpectrum {
        rows,
        cols,
        coefficients: out,
        shifted: !spec.shifted,
    }
}

/// Signal energy, normalized so a plane and its spectrum agree (Parseval).
pub trait Energy {
    fn energy(&self) -> f64;
}

impl Energy for ImagePlane {
    fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s * s).sum()
    }
}

impl Energy for ComplexSpectrum {
    fn energy(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.len() as f64
    }
}
