//! Point configurations `Q = {alpha_1..alpha_n, beta_1..beta_n}`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum pairwise distance between configuration points.
pub const DISTINCT_EPS: f64 = 1e-10;
/// Relative (to diameter) deviation accepted by [`is_concyclic`].
pub const CIRCLE_TOL: f64 = 1e-8;
/// Absolute midpoint tolerance used by the reducibility search.
pub const MIDPOINT_TOL: f64 = 1e-8;
/// Tolerance on `| |z| - 1 |` for unit-circle operations.
pub const UNIT_CIRCLE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointConfig {
    alpha: Vec<Complex64>,
    beta: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleFit {
    pub center: Complex64,
    pub radius: f64,
    pub max_deviation: f64,
}

impl PointConfig {
    pub fn new(alpha: Vec<Complex64>, beta: Vec<Complex64>) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::DimensionMismatch(format!(
                "alpha has {} points, beta has {}",
                alpha.len(),
                beta.len()
            )));
        }
        if alpha.len() < 2 {
            return Err(Error::TooFewPoints {
                got: 2 * alpha.len(),
                need: 4,
            });
        }
        if let Some(z) = alpha.iter().chain(&beta).find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::DegenerateInput(format!("non-finite point {z}")));
        }
        let config = PointConfig { alpha, beta };
        ensure_distinct(&config.points())?;
        Ok(config)
    }

    /// Splits points lying on a common circle into alternating alpha/beta
    /// after sorting them counterclockwise about the fitted center.
    pub fn from_circle_points(points: &[Complex64]) -> Result<Self> {
        if points.len() < 4 || !points.len().is_multiple_of(2) {
            return Err(Error::DegenerateInput(format!(
                "need an even number (>= 4) of points, got {}",
                points.len()
            )));
        }
        let fit = is_concyclic(points)?.ok_or(Error::NotConcyclic)?;
        let mut sorted: Vec<_> = points.to_vec();
        let angle = |z: &Complex64| (z - fit.center).arg().rem_euclid(TAU);
        sorted.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
        let alpha = sorted.iter().step_by(2).copied().collect();
        let beta = sorted.iter().skip(1).step_by(2).copied().collect();
        PointConfig::new(alpha, beta)
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Complex64] {
        &self.beta
    }

    /// `(alpha_1, beta_1, ..., alpha_n, beta_n)`.
    pub fn points(&self) -> Vec<Complex64> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .flat_map(|(a, b)| [*a, *b])
            .collect()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Result<PointConfig> {
        PointConfig::new(
            self.alpha.iter().map(|z| f(*z)).collect(),
            self.beta.iter().map(|z| f(*z)).collect(),
        )
    }

    pub fn diameter(&self) -> f64 {
        diameter(&self.points())
    }
}

fn ensure_distinct(points: &[Complex64]) -> Result<()> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let distance = (points[i] - points[j]).norm();
            if distance <= DISTINCT_EPS {
                return Err(Error::RepeatedPoints { i, j, distance });
            }
        }
    }
    Ok(())
}

pub(crate) fn diameter(points: &[Complex64]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d = d.max((points[i] - points[j]).norm());
        }
    }
    d
}

/// Least-squares circle through `points`, or `None` when the points are
/// colinear or deviate from the best circle by more than
/// `CIRCLE_TOL * diameter`. Lines are not circles here.
pub fn is_concyclic(points: &[Complex64]) -> Result<Option<CircleFit>> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "concyclicity needs at least 3 points, got {}",
            points.len()
        )));
    }
    ensure_distinct(points).map_err(|e| Error::DegenerateInput(e.to_string()))?;

    // Normalize so the fit is similarity invariant.
    let centroid = points.iter().sum::<Complex64>() / points.len() as f64;
    let scale = diameter(points);
    let local: Vec<Complex64> = points.iter().map(|z| (z - centroid) / scale).collect();

    // Algebraic fit a|z|^2 + b x + c y + d = 0 via the smallest right
    // singular vector of the design matrix (padded to square).
    let rows = local.len().max(4);
    let design = DMatrix::from_fn(rows, 4, |i, j| {
        if i >= local.len() {
            return 0.0;
        }
        let z = local[i];
        match j {
            0 => z.norm_sqr(),
            1 => z.re,
            2 => z.im,
            _ => 1.0,
        }
    });
    let svd = design.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (min_idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("four singular values");
    let coef = v_t.row(min_idx);
    let (a, b, c, d) = (coef[0], coef[1], coef[2], coef[3]);
    let norm = (a * a + b * b + c * c + d * d).sqrt();
    if a.abs() <= 1e-10 * norm {
        return Ok(None);
    }
    let center = Complex64::new(-b / (2.0 * a), -c / (2.0 * a));
    let r2 = center.norm_sqr() - d / a;
    if r2 <= 0.0 {
        return Ok(None);
    }
    let radius = r2.sqrt();
    if radius > 1e8 {
        return Ok(None);
    }
    let max_deviation = local
        .iter()
        .map(|z| ((z - center).norm() - radius).abs())
        .fold(0.0, f64::max);
    if max_deviation >= CIRCLE_TOL {
        return Ok(None);
    }
    Ok(Some(CircleFit {
        center: centroid + center * scale,
        radius: radius * scale,
        max_deviation: max_deviation * scale,
    }))
}

/// Whether the 2n points, read around the unit circle starting at
/// `alpha_1`, appear as `alpha_1, beta_1, ..., alpha_n, beta_n`. Either
/// orientation of traversal is accepted.
pub fn check_interleaved_on_circle(config: &PointConfig) -> Result<bool> {
    let points = config.points();
    if let Some((index, z)) = points
        .iter()
        .enumerate()
        .find(|(_, z)| (z.norm() - 1.0).abs() >= UNIT_CIRCLE_TOL)
    {
        return Err(Error::NotOnUnitCircle {
            index,
            modulus: z.norm(),
        });
    }
    let start = points[0];
    let offsets: Vec<f64> = points
        .iter()
        .map(|z| (z / start).arg().rem_euclid(TAU))
        .collect();
    let increasing = offsets.windows(2).all(|w| w[0] < w[1]);
    // clockwise reading: offsets after the first strictly decrease
    let decreasing = offsets[1..].windows(2).all(|w| w[0] > w[1]) && offsets[1] > 0.0;
    Ok(increasing || decreasing)
}

/// Vertices of the theta-pinwheel: `alpha_j = w^j`, `beta_j = e^{i theta} w^j`
/// with `w = e^{2 pi i / n}`, `j = 1..n`.
pub fn make_pinwheel(n: usize, theta: f64) -> Result<PointConfig> {
    if n < 2 {
        return Err(Error::TooFewPoints { got: 2 * n, need: 4 });
    }
    if !(theta > 0.0 && theta < TAU / n as f64) {
        return Err(Error::ThetaOutOfRange { n, theta });
    }
    let (alpha, beta) = pinwheel_nodes(n, theta);
    PointConfig::new(alpha, beta)
}

/// Pinwheel node lists for any real `theta`; nodes may coincide.
pub(crate) fn pinwheel_nodes(n: usize, theta: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let alpha: Vec<Complex64> = (1..=n)
        .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / n as f64))
        .collect();
    let rot = Complex64::from_polar(1.0, theta);
    let beta = alpha.iter().map(|a| rot * a).collect();
    (alpha, beta)
}

/// A six-point set collapsed by `z -> (z - c)^2` onto at most four
/// concyclic values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducibleQuadratic {
    pub center: Complex64,
    pub images: Vec<Complex64>,
    pub circle: CircleFit,
}

/// Detects six-point sets of the form `c + sqrt(P)` with `P` concyclic.
///
/// Candidate centers `c` are common midpoints of at least two disjoint
/// pairs. The tolerance is absolute; normalize `Q` to unit diameter first.
pub fn detect_cyclically_reducible_quadratic(q: &[Complex64]) -> Result<Option<ReducibleQuadratic>> {
    if q.len() != 6 {
        return Err(Error::DegenerateInput(format!(
            "reducibility detection needs exactly 6 points, got {}",
            q.len()
        )));
    }
    ensure_distinct(q).map_err(|e| Error::DegenerateInput(e.to_string()))?;

    let mut pairs = Vec::with_capacity(15);
    for i in 0..6 {
        for j in i + 1..6 {
            pairs.push((i, j, (q[i] + q[j]) / 2.0));
        }
    }
    let mut tried: Vec<Complex64> = Vec::new();
    for (x, &(_, _, mid)) in pairs.iter().enumerate() {
        if tried.iter().any(|c| (c - mid).norm() < MIDPOINT_TOL) {
            continue;
        }
        let sharing: Vec<_> = pairs[x..]
            .iter()
            .filter(|p| (p.2 - mid).norm() < MIDPOINT_TOL)
            .collect();
        // the disjointness is automatic: two pairs with one common point
        // and a common midpoint would repeat the other point
        if sharing.len() < 2 {
            continue;
        }
        tried.push(mid);
        let center = mid;
        let mut images: Vec<Complex64> = Vec::new();
        for z in q {
            let w = (z - center) * (z - center);
            let scale = w.norm().max(1.0);
            if !images.iter().any(|v| (v - w).norm() < MIDPOINT_TOL * scale) {
                images.push(w);
            }
        }
        if images.len() > 4 {
            continue;
        }
        if let Some(circle) = is_concyclic(&images)? {
            return Ok(Some(ReducibleQuadratic {
                center,
                images,
                circle,
            }));
        }
    }
    Ok(None)
}

/// A config as written in JSON, before validation: either an explicit
/// alpha/beta split or `points` in circular order.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ConfigDocument {
    Split {
        alpha: Vec<[f64; 2]>,
        beta: Vec<[f64; 2]>,
    },
    Points {
        points: Vec<[f64; 2]>,
    },
}

fn to_complex(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

impl ConfigDocument {
    pub fn into_config(self) -> Result<PointConfig> {
        match self {
            ConfigDocument::Split { alpha, beta } => PointConfig::new(to_complex(&alpha), to_complex(&beta)),
            ConfigDocument::Points { points } => PointConfig::from_circle_points(&to_complex(&points)),
        }
    }

    /// All points, alpha before beta, with no validity requirement.
    pub fn raw_points(&self) -> Vec<Complex64> {
        match self {
            ConfigDocument::Split { alpha, beta } => {
                let mut v = to_complex(alpha);
                v.extend(to_complex(beta));
                v
            }
            ConfigDocument::Points { points } => to_complex(points),
        }
    }
}

impl<'de> Deserialize<'de> for PointConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = ConfigDocument::deserialize(d).map_err(|_| {
            D::Error::custom("config needs either \"alpha\" and \"beta\" arrays or a \"points\" array of [re, im] pairs")
        })?;
        doc.into_config().map_err(D::Error::custom)
    }
}

/// Reads the raw point list of a config document without requiring a valid
/// alpha/beta split (used by the six-point analyses).
pub fn raw_points_from_json(text: &str) -> Result<Vec<Complex64>> {
    let doc: ConfigDocument = serde_json::from_str(text)?;
    Ok(doc.raw_points())
}
