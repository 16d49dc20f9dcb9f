//! Test images and helpers for driving the `specmerge` binary.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_specmerge"))
}

/// Runs the binary with `args`; panics with stderr on a nonzero exit.
pub fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn specmerge");
    assert!(
        out.status.success(),
        "specmerge {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

pub fn encode_p5(rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    assert_eq!(pixels.len(), rows * cols);
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    out
}

pub fn write_p5(dir: &Path, name: &str, rows: usize, cols: usize, pixels: &[u8]) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, encode_p5(rows, cols, pixels)).unwrap();
    path
}

pub fn random_pixels(seed: u64, len: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen()).collect()
}

/// Bright disc in the upper left, black elsewhere.
pub fn disc_object(rows: usize, cols: usize) -> Vec<u8> {
    let (cx, cy, r) = (
        rows as f64 * 0.3,
        cols as f64 * 0.3,
        rows.min(cols) as f64 * 0.2,
    );
    let mut px = Vec::with_capacity(rows * cols);
    for x in 0..rows {
        for y in 0..cols {
            let d = ((x as f64 - cx).powi(2) + (y as f64 - cy).powi(2)).sqrt();
            px.push(if d <= r { 230 } else { 0 });
        }
    }
    px
}

/// Gray square in the lower right, black elsewhere; disjoint from the disc.
pub fn square_object(rows: usize, cols: usize) -> Vec<u8> {
    let mut px = Vec::with_capacity(rows * cols);
    for x in 0..rows {
        for y in 0..cols {
            let inside =
                x >= rows * 6 / 10 && x < rows * 9 / 10 && y >= cols * 6 / 10 && y < cols * 9 / 10;
            px.push(if inside { 160 } else { 0 });
        }
    }
    px
}

/// Natural-looking texture: a sum of random sinusoids with roughly 1/f
/// amplitude falloff plus a few soft-edged blobs, rescaled to 8 bits.
pub fn natural_texture(seed: u64, rows: usize, cols: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<(f64, f64, f64, f64)> = (0..160)
        .map(|_| {
            let f = rng.gen_range(1.0f64..48.0);
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            (
                f * angle.cos() / rows as f64,
                f * angle.sin() / cols as f64,
                phase,
                1.0 / f,
            )
        })
        .collect();
    let blobs: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.gen_range(0.0..rows as f64),
                rng.gen_range(0.0..cols as f64),
                rng.gen_range(8.0..40.0),
                rng.gen_range(-1.5..1.5),
            )
        })
        .collect();

    let mut field = Vec::with_capacity(rows * cols);
    for x in 0..rows {
        for y in 0..cols {
            let (xf, yf) = (x as f64, y as f64);
            let mut v: f64 = waves
                .iter()
                .map(|&(fx, fy, ph, a)| {
                    a * (std::f64::consts::TAU * (fx * xf + fy * yf) + ph).sin()
                })
                .sum();
            for &(bx, by, r, a) in &blobs {
                let d2 = (xf - bx).powi(2) + (yf - by).powi(2);
                v += a * (-d2 / (2.0 * r * r)).exp();
            }
            field.push(v);
        }
    }
    let lo = field.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    field
        .iter()
        .map(|v| ((v - lo) / (hi - lo) * 255.0).round() as u8)
        .collect()
}
