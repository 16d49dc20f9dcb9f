//! Merging of grayscale images in the spatial and frequency domains.
//!
//! The spatial merge adds normalized intensities pixel by pixel. The spectral
//! merge scales each image's 2D DFT by a prominence coefficient, sums the
//! spectra, drops every coefficient whose magnitude falls below a fraction of
//! the peak magnitude, and transforms back. The retained coefficients form a
//! [`SparseSpectrum`] which can be persisted with the FMG1 codec.

pub mod codec;
pub mod error;
pub mod geometry;
pub mod json;
pub mod merge;
pub mod sparse;
pub mod spectral;

pub use codec::{
    align, read_pgm, render_spectrum, spectrum_heatmap, write_pgm, AlignMode, AlignmentPolicy,
    HeatmapOptions, PgmDepth,
};
pub use error::{Error, Result};
pub use geometry::{wave_geometry, SpectralIndex, WaveGeometry};
pub use merge::{
    apply_threshold, integrate_spectra, merge_spatial, merge_spectral, psnr, reduce_to_ratio,
    threshold_for_ratio, MergeConfig, RatioThreshold, ReductionReport, Renorm, SpectralMerge,
    ThresholdOutcome,
};
pub use sparse::{decode_fmg, densify, encode_fmg, SparseEntry, SparseSpectrum};
pub use spectral::{
    dft1d_direct, fft1d, forward2d, inverse2d, shift_center, ComplexSpectrum, ComplexValue, Energy,
    ImagePlane,
};
