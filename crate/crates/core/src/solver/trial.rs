use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{find_inscriptions, SolveOptions, SolveReport};
use crate::config::PointConfig;
use crate::curves::JordanCurve;
use crate::error::{Error, Result};
use crate::interp::{ev, Polynomial};
use crate::sampling::{colinear_config, random_concyclic_config, random_config, random_curve, random_pinwheel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialKind {
    /// Random valid curve, random concyclic points.
    Concyclic,
    /// Random valid curve, random-angle pinwheel.
    Pinwheel,
    /// Unit circle, unit-spaced colinear points.
    Colinear,
}

/// Everything needed to reproduce one seeded trial.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialRecord {
    pub kind: TrialKind,
    pub degree: usize,
    pub curve_seed: u64,
    pub config_seed: u64,
    pub solve_seed: u64,
    pub curve: JordanCurve,
    pub config: PointConfig,
    pub found: bool,
    pub best_residual: Option<f64>,
    pub report: SolveReport,
}

/// Generates the seeded instance for `kind` at degree `d` (so `n = d + 1`)
/// and records whether the solver finds a nonconstant inscription.
pub fn theorem_trial(
    curve_seed: u64,
    config_seed: u64,
    kind: TrialKind,
    degree: usize,
    opts: &SolveOptions,
) -> Result<TrialRecord> {
    let n = degree + 1;
    if degree == 0 {
        return Err(Error::InvalidOption("degree must be at least 1".into()));
    }
    if kind == TrialKind::Concyclic && degree > 2 {
        return Err(Error::InvalidOption(
            "concyclic trials are defined for degree 1 or 2".into(),
        ));
    }
    let mut curve_rng = ChaCha8Rng::seed_from_u64(curve_seed);
    let mut config_rng = ChaCha8Rng::seed_from_u64(config_seed);
    let (curve, config) = match kind {
        TrialKind::Concyclic => (random_curve(&mut curve_rng)?, random_concyclic_config(&mut config_rng, n)?),
        TrialKind::Pinwheel => (random_curve(&mut curve_rng)?, random_pinwheel(&mut config_rng, n)?),
        TrialKind::Colinear => (JordanCurve::unit_circle(), colinear_config(n)?),
    };
    let report = find_inscriptions(&curve, &config, opts)?;
    Ok(TrialRecord {
        kind,
        degree,
        curve_seed,
        config_seed,
        solve_seed: opts.seed,
        curve,
        config,
        found: !report.inscriptions.is_empty(),
        best_residual: report.best_residual(),
        report,
    })
}

/// A curve built to pass through `p(Q)`, so `p` is a known inscription.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlantedInstance {
    pub curve: JordanCurve,
    pub config: PointConfig,
    pub poly: Polynomial,
}

const PLANT_ATTEMPTS: usize = 1000;
const MIN_ANGLE_GAP: f64 = 0.15;

/// Random generic `Q`, random `p` of degree `n - 1`, and the star-shaped
/// curve `c + r(t) e^{it}` with `r` the smoothest (Sobolev-weighted
/// minimum-norm) trigonometric interpolant of degree `n` through the
/// images around their centroid.
pub fn planted_instance<R: Rng>(rng: &mut R, n: usize) -> Result<PlantedInstance> {
    for _ in 0..PLANT_ATTEMPTS {
        let config = random_config(rng, n)?;
        let mut coeffs: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if coeffs[1..].iter().all(|a| a.norm() < 0.3) {
            coeffs[1] = Complex64::from_polar(1.0, rng.random::<f64>() * TAU);
        }
        let poly = Polynomial::new(coeffs);
        if let Some(curve) = star_curve_through(&ev(&poly, &config.points()), n) {
            return Ok(PlantedInstance { curve, config, poly });
        }
    }
    Err(Error::CurveGenerationFailed {
        attempts: PLANT_ATTEMPTS,
    })
}

fn star_curve_through(images: &[Complex64], degree: usize) -> Option<JordanCurve> {
    let center = images.iter().sum::<Complex64>() / images.len() as f64;
    let polar: Vec<(f64, f64)> = images.iter().map(|w| ((w - center).arg(), (w - center).norm())).collect();
    let mut angles: Vec<f64> = polar.iter().map(|p| p.0).collect();
    angles.sort_by(f64::total_cmp);
    let gap = angles
        .windows(2)
        .map(|w| w[1] - w[0])
        .chain([angles[0] + TAU - angles[angles.len() - 1]])
        .fold(f64::INFINITY, f64::min);
    let r_min = polar.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let r_max = polar.iter().map(|p| p.1).fold(0.0, f64::max);
    if gap < MIN_ANGLE_GAP || r_min < 0.1 * r_max {
        return None;
    }
    let cols = 2 * degree + 1;
    let a = DMatrix::from_fn(polar.len(), cols, |i, j| {
        let phi = polar[i].0;
        match j {
            0 => 1.0,
            _ if j % 2 == 1 => (j.div_ceil(2) as f64 * phi).cos(),
            _ => ((j / 2) as f64 * phi).sin(),
        }
    });
    // minimum Sobolev-weighted norm: scale column m by 1 / (1 + m^2)
    let weight = |j: usize| 1.0 + (j.div_ceil(2) as f64).powi(2);
    let scaled = DMatrix::from_fn(polar.len(), cols, |i, j| a[(i, j)] / weight(j));
    let b = DVector::from_iterator(polar.len(), polar.iter().map(|p| p.1));
    let y = scaled.svd(true, true).solve(&b, 1e-12).ok()?;
    let x = DVector::from_fn(cols, |j, _| y[j] / weight(j));
    let radius = |t: f64| {
        x[0] + (1..=degree)
            .map(|m| x[2 * m - 1] * (m as f64 * t).cos() + x[2 * m] * (m as f64 * t).sin())
            .sum::<f64>()
    };
    let (lo, hi) = (0..1024)
        .map(|k| radius(TAU * k as f64 / 1024.0))
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), r| (lo.min(r), hi.max(r)));
    if lo < 0.2 * r_min || hi > 3.0 * r_max {
        return None;
    }
    // r(t) e^{it} with r = sum rho_m e^{imt}
    let mut pairs = vec![(0, center), (1, Complex64::new(x[0], 0.0))];
    for m in 1..=degree {
        let (cm, sm) = (x[2 * m - 1], x[2 * m]);
        pairs.push((m as i64 + 1, Complex64::new(cm, -sm) / 2.0));
        pairs.push((1 - m as i64, Complex64::new(cm, sm) / 2.0));
    }
    let curve = JordanCurve::from_coeffs(pairs);
    curve.validate().is_valid().then_some(curve)
}
