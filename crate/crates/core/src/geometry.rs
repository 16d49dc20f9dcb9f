//! Wavelength, frequency and wavefront direction for a spectral index.
//!
//! These formulas pair `u` with the column count C and `v` with the row
//! count R, the reverse of the transform's index pairing. They describe the
//! spectrum and are not used on the transform path.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectralIndex {
    u: usize,
    v: usize,
    rows: usize,
    cols: usize,
}

impl SpectralIndex {
    pub fn new(u: usize, v: usize, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if u >= rows || v >= cols {
            return Err(Error::invalid(format!(
                "index ({u}, {v}) outside {rows}x{cols} spectrum"
            )));
        }
        Ok(Self { u, v, rows, cols })
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

/// Wavelengths are in pixels and may be `+inf`; frequencies in cycles per
/// pixel. `theta_wf` is `None` when `u == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveGeometry {
    pub lambda_u: f64,
    pub lambda_v: f64,
    pub lambda_wf: f64,
    pub omega_u: f64,
    pub omega_v: f64,
    pub omega_wf: f64,
    pub theta_wf: Option<f64>,
}

impl WaveGeometry {
    /// True when neither index is zero, so every field is finite.
    pub fn is_regular(&self) -> bool {
        self.lambda_u.is_finite() && self.lambda_v.is_finite() && self.theta_wf.is_some()
    }
}

pub fn wave_geometry(idx: SpectralIndex) -> WaveGeometry {
    let u = idx.u as f64;
    let v = idx.v as f64;
    let r = idx.rows as f64;
    let c = idx.cols as f64;

    let lambda_u = if idx.u == 0 { f64::INFINITY } else { c / u };
    let lambda_v = if idx.v == 0 { f64::INFINITY } else { r / v };
    let lambda_wf = (lambda_u * lambda_u + lambda_v * lambda_v).sqrt();
    let omega_wf = if lambda_wf.is_infinite() {
        0.0
    } else {
        1.0 / lambda_wf
    };
    let theta_wf = (idx.u != 0).then(|| (v * c / (u * r)).atan());

    WaveGeometry {
        lambda_u,
        lambda_v,
        lambda_wf,
        omega_u: u / c,
        omega_v: v / r,
        omega_wf,
        theta_wf,
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_4;

    use super::*;

    fn geom(u: usize, v: usize, rows: usize, cols: usize) -> WaveGeometry {
        wave_geometry(SpectralIndex::new(u, v, rows, cols).unwrap())
    }

    #[test]
    fn unit_index_on_square_grid() {
        let g = geom(1, 1, 4, 4);
        assert_eq!(g.lambda_u, 4.0);
        assert_eq!(g.lambda_v, 4.0);
        assert!((g.lambda_wf - 32f64.sqrt()).abs() < 1e-12);
        assert!((g.lambda_wf - 5.6569).abs() < 1e-4);
        assert_eq!(g.omega_u, 0.25);
        assert_eq!(g.omega_v, 0.25);
        assert!((g.theta_wf.unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!(g.is_regular());
    }

    #[test]
    fn zero_u_is_flagged() {
        let g = geom(0, 1, 4, 4);
        assert_eq!(g.lambda_u, f64::INFINITY);
        assert_eq!(g.lambda_v, 4.0);
        assert_eq!(g.lambda_wf, f64::INFINITY);
        assert_eq!(g.omega_wf, 0.0);
        assert_eq!(g.theta_wf, None);
        assert!(!g.is_regular());
    }

    #[test]
    fn zero_v_has_zero_direction() {
        let g = geom(2, 0, 4, 4);
        assert_eq!(g.lambda_v, f64::INFINITY);
        assert_eq!(g.theta_wf, Some(0.0));
        assert_eq!(g.omega_v, 0.0);
    }

    #[test]
    fn dc_index() {
        let g = geom(0, 0, 3, 3);
        assert_eq!(g.omega_wf, 0.0);
        assert_eq!(g.omega_u, 0.0);
        assert_eq!(g.omega_v, 0.0);
    }

    #[test]
    fn rectangular_direction() {
        let g = geom(2, 1, 8, 4);
        assert_eq!(g.theta_wf.unwrap(), (1.0f64 * 4.0 / (2.0 * 8.0)).atan());
        assert_eq!(g.theta_wf.unwrap(), 0.25f64.atan());
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        assert!(SpectralIndex::new(4, 0, 4, 4).is_err());
        assert!(SpectralIndex::new(0, 4, 4, 4).is_err());
        assert!(SpectralIndex::new(0, 0, 0, 4).is_err());
    }

    #[test]
    fn wavefront_relations_hold() {
        for rows in 1..9 {
            for cols in 1..9 {
                for u in 1..rows {
                    for v in 1..cols {
                        let g = geom(u, v, rows, cols);
                        assert!((g.omega_wf * g.lambda_wf - 1.0).abs() < 1e-12);
                        let lhs = g.lambda_wf * g.lambda_wf;
                        let rhs = g.lambda_u * g.lambda_u + g.lambda_v * g.lambda_v;
                        assert!(((lhs - rhs) / rhs).abs() < 1e-9);
                    }
                }
            }
        }
        for n in 2..20 {
            for u in 1..n {
                assert!((geom(u, u, n, n).theta_wf.unwrap() - FRAC_PI_4).abs() < 1e-15);
            }
        }
    }
}
