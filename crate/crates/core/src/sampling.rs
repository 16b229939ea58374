//! Seeded generators for curves and configurations used by trials,
//! verification suites and tests.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use crate::config::{make_pinwheel, PointConfig};
use crate::curves::JordanCurve;
use crate::error::{Error, Result};

/// Highest perturbing frequency of a random curve.
pub const RANDOM_CURVE_MAX_FREQ: i64 = 6;
/// `|c_k| <= RANDOM_CURVE_AMPLITUDE / k^2` for `2 <= |k| <= 6`.
pub const RANDOM_CURVE_AMPLITUDE: f64 = 0.3;
const CURVE_ATTEMPTS: usize = 1000;

/// `c_1 = 1` plus random `c_k`, `2 <= |k| <= 6`, with `|c_k| <= 0.3 / k^2`,
/// rejection-sampled through validation.
pub fn random_curve<R: Rng>(rng: &mut R) -> Result<JordanCurve> {
    for _ in 0..CURVE_ATTEMPTS {
        let mut pairs = vec![(1, Complex64::new(1.0, 0.0))];
        for k in 2..=RANDOM_CURVE_MAX_FREQ {
            for signed in [k, -k] {
                let bound = RANDOM_CURVE_AMPLITUDE / (k * k) as f64;
                let r = bound * rng.random::<f64>();
                pairs.push((signed, Complex64::from_polar(r, rng.random::<f64>() * TAU)));
            }
        }
        let curve = JordanCurve::from_coeffs(pairs);
        if curve.validate().is_valid() {
            return Ok(curve);
        }
    }
    Err(Error::CurveGenerationFailed {
        attempts: CURVE_ATTEMPTS,
    })
}

/// `count` sorted angles whose cyclic gaps are jittered equal spacing: each
/// point is displaced by at most `jitter` of a slot from its slot center.
pub fn jittered_angles<R: Rng>(rng: &mut R, count: usize, jitter: f64) -> Vec<f64> {
    let slot = TAU / count as f64;
    let offset = rng.random::<f64>() * TAU;
    (0..count)
        .map(|k| offset + slot * (k as f64 + jitter * (2.0 * rng.random::<f64>() - 1.0)))
        .collect()
}

/// Interleaved configuration on the unit circle with jittered spacing
/// (each point stays within 35% of a slot from its slot center, so no two
/// points come closer than 30% of a slot).
pub fn random_interleaved_config<R: Rng>(rng: &mut R, n: usize) -> Result<PointConfig> {
    let angles = jittered_angles(rng, 2 * n, 0.35);
    let alpha = angles.iter().step_by(2).map(|t| Complex64::from_polar(1.0, *t)).collect();
    let beta = angles.iter().skip(1).step_by(2).map(|t| Complex64::from_polar(1.0, *t)).collect();
    PointConfig::new(alpha, beta)
}

/// `count` points on a random circle (center in `[-1, 1]^2`, radius in
/// `[0.5, 2]`) with angles drawn uniformly but at least `min_gap` radians
/// apart.
pub fn random_concyclic_points<R: Rng>(rng: &mut R, count: usize, min_gap: f64) -> Vec<Complex64> {
    let center = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let radius = rng.random_range(0.5..2.0);
    loop {
        let mut angles: Vec<f64> = (0..count).map(|_| rng.random::<f64>() * TAU).collect();
        angles.sort_by(f64::total_cmp);
        let gap = angles
            .windows(2)
            .map(|w| w[1] - w[0])
            .chain([angles[0] + TAU - angles[count - 1]])
            .fold(f64::INFINITY, f64::min);
        if gap >= min_gap {
            return angles
                .iter()
                .map(|t| center + Complex64::from_polar(radius, *t))
                .collect();
        }
    }
}

/// Six (or `2n`) concyclic points split alternately around the circle.
pub fn random_concyclic_config<R: Rng>(rng: &mut R, n: usize) -> Result<PointConfig> {
    let points = random_concyclic_points(rng, 2 * n, 0.15);
    PointConfig::from_circle_points(&points)
}

/// Pinwheel with `theta` uniform in the middle 90% of `(0, 2 pi / n)`.
pub fn random_pinwheel<R: Rng>(rng: &mut R, n: usize) -> Result<PointConfig> {
    let width = TAU / n as f64;
    let theta = width * rng.random_range(0.05..0.95);
    make_pinwheel(n, theta)
}

/// Generic distinct points in the unit square, pairwise at least 0.05 apart.
pub fn random_config<R: Rng>(rng: &mut R, n: usize) -> Result<PointConfig> {
    loop {
        let pts: Vec<Complex64> = (0..2 * n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let ok = (0..pts.len()).all(|i| (i + 1..pts.len()).all(|j| (pts[i] - pts[j]).norm() > 0.05));
        if ok {
            return PointConfig::new(pts[..n].to_vec(), pts[n..].to_vec());
        }
    }
}

/// Random unit-circle configuration with a random alpha/beta labeling, so
/// usually not interleaved.
pub fn scrambled_circle_config<R: Rng>(rng: &mut R, n: usize) -> Result<PointConfig> {
    let angles = jittered_angles(rng, 2 * n, 0.35);
    let points: Vec<Complex64> = angles.iter().map(|t| Complex64::from_polar(1.0, *t)).collect();
    let mut order: Vec<usize> = (0..2 * n).collect();
    for i in (1..order.len()).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let alpha = order[..n].iter().map(|i| points[*i]).collect();
    let beta = order[n..].iter().map(|i| points[*i]).collect();
    PointConfig::new(alpha, beta)
}

/// `{-2.5, -1.5, ..., 2.5}` for `n = 3`; generally `2n` unit-spaced real
/// points centered at 0, split alternately.
pub fn colinear_config(n: usize) -> Result<PointConfig> {
    let pts: Vec<Complex64> = (0..2 * n)
        .map(|k| Complex64::new(k as f64 - (2 * n - 1) as f64 / 2.0, 0.0))
        .collect();
    PointConfig::new(
        pts.iter().step_by(2).copied().collect(),
        pts.iter().skip(1).step_by(2).copied().collect(),
    )
}
