//! Spatial and spectral merging, magnitude thresholding and reduction
//! accounting.
//!
//! The spectral merge integrates `P(u,v) = Σk a_k·I_k(u,v)` over the aligned
//! inputs, removes every coefficient with `|P(u,v)| < T` where
//! `T = x·max|P|`, and inverts what remains. With unit coefficients and
//! `x = 0` it reproduces the spatial merge up to rounding, because the DFT is
//! linear.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{align, AlignmentPolicy};
use crate::error::{Error, Result};
use crate::json::{self, Value};
use crate::sparse::{densify, SparseEntry, SparseSpectrum};
use crate::spectral::{forward2d, inverse2d_with_residue, ComplexSpectrum, ImagePlane};

/// Largest imaginary residue tolerated when inverting a thresholded spectrum.
pub const MAX_IMAGINARY_RESIDUE: f64 = 1e-6;

/// How a merged plane is brought back into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Renorm {
    /// Divide every sample by the maximum when the maximum exceeds 1.
    #[default]
    DivideByMax,
    /// Clip every sample to `[0, 1]`.
    Clamp,
}

impl Renorm {
    pub fn apply(self, plane: &ImagePlane) -> ImagePlane {
        let out = match self {
            Renorm::DivideByMax => {
                let max = plane.max();
                if max > 1.0 {
                    plane.map(|s| s / max)
                } else {
                    return plane.clone();
                }
            }
            Renorm::Clamp => plane.map(|s| s.clamp(0.0, 1.0)),
        };
        out.expect("renormalized samples stay finite")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeConfig {
    /// Prominence coefficients, one per image. `None` means all 1.0.
    pub coefficients: Option<Vec<f64>>,
    /// Fraction `x` of the peak magnitude below which coefficients are
    /// removed. Must satisfy `0 <= x < 1`; 0 keeps everything.
    pub threshold_fraction: f64,
    pub renorm: Renorm,
    pub alignment: AlignmentPolicy,
}

impl Default for MergeConfig {
    fn default() -> Self {
        Self {
            coefficients: None,
            threshold_fraction: 0.0,
            renorm: Renorm::default(),
            alignment: AlignmentPolicy::default(),
        }
    }
}

impl MergeConfig {
    pub fn with_coefficients(mut self, coefficients: Vec<f64>) -> Self {
        self.coefficients = Some(coefficients);
        self
    }

    pub fn with_threshold_fraction(mut self, x: f64) -> Self {
        self.threshold_fraction = x;
        self
    }

    pub fn with_renorm(mut self, renorm: Renorm) -> Self {
        self.renorm = renorm;
        self
    }

    pub fn with_alignment(mut self, alignment: AlignmentPolicy) -> Self {
        self.alignment = alignment;
        self
    }

    /// Checks the config against `images` inputs and returns the resolved
    /// coefficient list.
    pub fn validate(&self, images: usize) -> Result<Vec<f64>> {
        if !(0.0..1.0).contains(&self.threshold_fraction) {
            return Err(Error::invalid(format!(
                "threshold fraction must satisfy 0 <= x < 1, got {}",
                self.threshold_fraction
            )));
        }
        match &self.coefficients {
            None => Ok(vec![1.0; images]),
            Some(coeffs) if coeffs.len() != images => Err(Error::invalid(format!(
                "{} prominence coefficients given for {images} images",
                coeffs.len()
            ))),
            Some(coeffs) => match coeffs.iter().position(|a| !a.is_finite()) {
                Some(i) => Err(Error::invalid(format!(
                    "coefficient {} is not finite",
                    i + 1
                ))),
                None => Ok(coeffs.clone()),
            },
        }
    }
}

/// Adds the aligned intensities of all planes and renormalizes the sum.
pub fn merge_spatial(planes: &[ImagePlane], config: &MergeConfig) -> Result<ImagePlane> {
    let aligned = align(planes, config.alignment)?;
    let (rows, cols) = aligned[0].dims();
    let mut sum = vec![0.0; rows * cols];
    for plane in &aligned {
        for (acc, s) in sum.iter_mut().zip(plane.samples()) {
            *acc += s;
        }
    }
    Ok(config.renorm.apply(&ImagePlane::new(rows, cols, sum)?))
}

/// Totals for one thresholding pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOutcome {
    pub total_units: usize,
    pub retained_units: usize,
    pub threshold_value: f64,
    /// `Σ |removed coef|² / (R·C)`, i.e. the spatial energy of the error.
    pub removed_energy: f64,
}

impl ThresholdOutcome {
    /// `total / retained`; infinite when nothing survives.
    pub fn reduction_ratio(&self) -> f64 {
        self.total_units as f64 / self.retained_units as f64
    }
}

/// Keeps exactly the coefficients with `|coef| >= threshold`.
pub fn apply_threshold(
    spec: &ComplexSpectrum,
    threshold: f64,
) -> Result<(SparseSpectrum, ThresholdOutcome)> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::invalid(format!(
            "threshold must be non-negative, got {threshold}"
        )));
    }
    if spec.is_shifted() {
        return Err(Error::invalid("cannot threshold a center-shifted spectrum"));
    }
    let (rows, cols) = spec.dims();
    let mut entries = Vec::new();
    let mut removed = 0.0;
    for (i, c) in spec.coefficients().iter().enumerate() {
        if c.norm() >= threshold {
            entries.push(SparseEntry {
                u: i / cols,
                v: i % cols,
                re: c.re,
                im: c.im,
            });
        } else {
            removed += c.norm_sqr();
        }
    }
    let total_units = spec.len();
    let outcome = ThresholdOutcome {
        total_units,
        retained_units: entries.len(),
        threshold_value: threshold,
        removed_energy: removed / total_units as f64,
    };
    Ok((SparseSpectrum::new(rows, cols, entries)?, outcome))
}

/// Threshold picked from the magnitude ladder for a target reduction ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioThreshold {
    pub threshold: f64,
    pub retained_units: usize,
    pub achieved_ratio: f64,
}

/// Smallest threshold on the sorted magnitude ladder whose reduction ratio
/// reaches `target_ratio`.
///
/// Coefficients of equal magnitude are kept or removed together. When even
/// the peak group alone falls short of the target, only that group is kept.
/// A threshold that keeps everything is reported as 0.
pub fn threshold_for_ratio(spec: &ComplexSpectrum, target_ratio: f64) -> Result<RatioThreshold> {
    if target_ratio.is_nan() || target_ratio < 1.0 {
        return Err(Error::invalid(format!(
            "target ratio must be at least 1, got {target_ratio}"
        )));
    }
    let total = spec.len();
    let mut mags: Vec<f64> = spec.coefficients().iter().map(|c| c.norm()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));

    let mut chosen: Option<(f64, usize)> = None;
    let mut i = 0;
    while i < total {
        let mag = mags[i];
        while i < total && mags[i].total_cmp(&mag) == Ordering::Equal {
            i += 1;
        }
        let ratio = total as f64 / i as f64;
        if ratio >= target_ratio || chosen.is_none() {
            chosen = Some((mag, i));
        }
        if ratio < target_ratio {
            break;
        }
    }
    let (mut threshold, retained) = chosen.expect("spectrum is non-empty");
    if retained == total {
        threshold = 0.0;
    }
    Ok(RatioThreshold {
        threshold,
        retained_units: retained,
        achieved_ratio: total as f64 / retained as f64,
    })
}

/// Peak signal-to-noise ratio for unit-range planes, in decibels. Identical
/// planes give `f64::INFINITY`.
pub fn psnr(reference: &ImagePlane, candidate: &ImagePlane) -> Result<f64> {
    if reference.dims() != candidate.dims() {
        return Err(Error::invalid(format!(
            "psnr needs matching dimensions, got {:?} and {:?}",
            reference.dims(),
            candidate.dims()
        )));
    }
    let mse = mean_squared_error(reference, candidate);
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    })
}

pub(crate) fn mean_squared_error(a: &ImagePlane, b: &ImagePlane) -> f64 {
    let sum: f64 = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    sum / a.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct ReductionReport {
    pub total_units: usize,
    pub retained_units: usize,
    pub reduction_ratio: f64,
    pub threshold_value: f64,
    pub threshold_fraction: f64,
    pub removed_energy: f64,
    /// PSNR of the thresholded merge against the unthresholded one, both
    /// before renormalization. `+inf` (JSON `null`) when nothing was removed.
    #[serde(deserialize_with = "json::float_or_infinity")]
    pub psnr_vs_full_db: f64,
}

impl ReductionReport {
    pub fn to_json(&self) -> String {
        json::render_object([
            ("total_units", Value::Int(self.total_units as u64)),
            ("retained_units", Value::Int(self.retained_units as u64)),
            ("reduction_ratio", Value::Float(self.reduction_ratio)),
            ("threshold_value", Value::Float(self.threshold_value)),
            ("threshold_fraction", Value::Float(self.threshold_fraction)),
            ("removed_energy", Value::Float(self.removed_energy)),
            ("psnr_vs_full_db", Value::Float(self.psnr_vs_full_db)),
        ])
    }
}

/// Everything produced by one spectral merge.
#[derive(Debug, Clone)]
pub struct SpectralMerge {
    /// Thresholded, inverted and renormalized result.
    pub merged: ImagePlane,
    pub sparse: SparseSpectrum,
    pub report: ReductionReport,
    /// Integrated spectrum before thresholding.
    pub spectrum: ComplexSpectrum,
    /// Inverse of the full spectrum, before renormalization.
    pub full_raw: ImagePlane,
    /// Inverse of the retained coefficients, before renormalization.
    pub reduced_raw: ImagePlane,
}

/// Aligns the planes and sums their prominence-weighted spectra.
pub fn integrate_spectra(planes: &[ImagePlane], config: &MergeConfig) -> Result<ComplexSpectrum> {
    let coefficients = config.validate(planes.len())?;
    let aligned = align(planes, config.alignment)?;
    let spectra: Vec<ComplexSpectrum> = aligned.par_iter().map(forward2d).collect();
    let (rows, cols) = aligned[0].dims();
    let mut total = ComplexSpectrum::zeros(rows, cols)?;
    for (a, spectrum) in coefficients.iter().zip(&spectra) {
        total.accumulate(*a, spectrum)?;
    }
    Ok(total)
}

/// Frequency-domain merge with threshold `T = x·max|P|`.
pub fn merge_spectral(planes: &[ImagePlane], config: &MergeConfig) -> Result<SpectralMerge> {
    let spectrum = integrate_spectra(planes, config)?;
    let threshold = config.threshold_fraction * spectrum.max_magnitude();
    finish(
        spectrum,
        threshold,
        config.threshold_fraction,
        config.renorm,
    )
}

/// Frequency-domain merge whose threshold is chosen to reach `target_ratio`.
pub fn reduce_to_ratio(
    planes: &[ImagePlane],
    config: &MergeConfig,
    target_ratio: f64,
) -> Result<SpectralMerge> {
    let spectrum = integrate_spectra(planes, config)?;
    let step = threshold_for_ratio(&spectrum, target_ratio)?;
    let peak = spectrum.max_magnitude();
    let fraction = if peak > 0.0 {
        step.threshold / peak
    } else {
        0.0
    };
    finish(spectrum, step.threshold, fraction, config.renorm)
}

fn finish(
    spectrum: ComplexSpectrum,
    threshold: f64,
    fraction: f64,
    renorm: Renorm,
) -> Result<SpectralMerge> {
    let (sparse, outcome) = apply_threshold(&spectrum, threshold)?;
    let (full_raw, full_residue) = inverse2d_with_residue(&spectrum)?;
    let (reduced_raw, residue) = inverse2d_with_residue(&densify(&sparse))?;
    let worst = full_residue.max(residue);
    if worst > MAX_IMAGINARY_RESIDUE {
        return Err(Error::Numerical(format!(
            "inverse transform left an imaginary residue of {worst:e}"
        )));
    }
    let report = ReductionReport {
        total_units: outcome.total_units,
        retained_units: outcome.retained_units,
        reduction_ratio: outcome.reduction_ratio(),
        threshold_value: outcome.threshold_value,
        threshold_fraction: fraction,
        removed_energy: outcome.removed_energy,
        psnr_vs_full_db: psnr(&full_raw, &reduced_raw)?,
    };
    Ok(SpectralMerge {
        merged: renorm.apply(&reduced_raw),
        sparse,
        report,
        spectrum,
        full_raw,
        reduced_raw,
    })
}
