//! Smooth Jordan curves stored as truncated Fourier series
//! `gamma(t) = sum_{|k| <= K} c_k e^{ikt}`, `t in [0, 2pi)`.

use std::collections::HashMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default Fourier bandwidth for fitted curves.
pub const DEFAULT_BANDWIDTH: usize = 32;
/// Grid resolution for validation, projection and fitting.
pub const DEFAULT_SAMPLES: usize = 2048;
/// Minimum speed below which a curve counts as not immersed.
pub const IMMERSION_EPS: f64 = 1e-6;

const MIN_POLYLINE_POINTS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveFile", into = "CurveFile")]
pub struct JordanCurve {
    bandwidth: usize,
    /// `coeffs[k + bandwidth]` holds `c_k`.
    coeffs: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveValidationReport {
    pub immersed: bool,
    pub min_speed: f64,
    pub simple: bool,
    pub first_self_intersection: Option<(f64, f64)>,
    pub turning_number: i64,
}

impl CurveValidationReport {
    pub fn is_valid(&self) -> bool {
        self.immersed && self.simple && self.turning_number.abs() == 1
    }
}

impl JordanCurve {
    /// The zero series with the given bandwidth (not itself a valid curve).
    pub fn zero(bandwidth: usize) -> Self {
        let bandwidth = bandwidth.max(1);
        JordanCurve {
            bandwidth,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * bandwidth + 1],
        }
    }

    /// Builds a curve from `(k, c_k)` pairs. The bandwidth is the largest
    /// `|k|` present, and at least 1. Repeated frequencies are summed.
    pub fn from_coeffs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let pairs: Vec<_> = pairs.into_iter().collect();
        let bandwidth = pairs
            .iter()
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(1)
            .max(1);
        let mut curve = Self::zero(bandwidth);
        for (k, c) in pairs {
            curve.coeffs[(k + bandwidth as i64) as usize] += c;
        }
        curve
    }

    pub fn with_bandwidth<I>(bandwidth: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        if bandwidth == 0 {
            return Err(Error::MalformedCurve("bandwidth K must be at least 1".into()));
        }
        let mut curve = Self::zero(bandwidth);
        for (k, c) in pairs {
            if k.unsigned_abs() as usize > bandwidth {
                return Err(Error::MalformedCurve(format!(
                    "frequency {k} exceeds bandwidth {bandwidth}"
                )));
            }
            curve.coeffs[(k + bandwidth as i64) as usize] += c;
        }
        Ok(curve)
    }

    pub fn circle(center: Complex64, radius: f64) -> Self {
        Self::from_coeffs([(0, center), (1, Complex64::new(radius, 0.0))])
    }

    pub fn unit_circle() -> Self {
        Self::circle(Complex64::new(0.0, 0.0), 1.0)
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.bandwidth {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.bandwidth as i64) as usize]
        }
    }

    /// Nonzero coefficients as `(k, c_k)`, in increasing `k`.
    pub fn nonzero_coeffs(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let kk = self.bandwidth as i64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(move |(i, c)| (i as i64 - kk, *c))
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.jet(t).0
    }

    pub fn derivative(&self, t: f64) -> Complex64 {
        self.jet(t).1
    }

    pub fn second_derivative(&self, t: f64) -> Complex64 {
        self.jet(t).2
    }

    /// Value, first and second derivative at `t` in one pass.
    pub fn jet(&self, t: f64) -> (Complex64, Complex64, Complex64) {
        let kk = self.bandwidth as i64;
        let step = Complex64::from_polar(1.0, t);
        let mut w = Complex64::from_polar(1.0, -(kk as f64) * t);
        let mut value = Complex64::new(0.0, 0.0);
        let mut d1 = Complex64::new(0.0, 0.0);
        let mut d2 = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = (i as i64 - kk) as f64;
            let term = c * w;
            value += term;
            d1 += term * Complex64::new(0.0, k);
            d2 -= term * (k * k);
            w *= step;
        }
        (value, d1, d2)
    }

    /// Value and first derivative; the solver's inner loop.
    #[inline]
    pub fn eval_with_derivative(&self, t: f64) -> (Complex64, Complex64) {
        let kk = self.bandwidth as i64;
        let step = Complex64::from_polar(1.0, t);
        let mut w = Complex64::from_polar(1.0, -(kk as f64) * t);
        let mut value = Complex64::new(0.0, 0.0);
        let mut d1 = Complex64::new(0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            let term = c * w;
            value += term;
            d1 += term * Complex64::new(0.0, (i as i64 - kk) as f64);
            w *= step;
        }
        (value, d1)
    }

    /// `a * self + b * other`, coefficientwise.
    pub fn combine(&self, a: Complex64, other: &JordanCurve, b: Complex64) -> JordanCurve {
        let bandwidth = self.bandwidth.max(other.bandwidth);
        let kk = bandwidth as i64;
        JordanCurve::with_bandwidth(
            bandwidth,
            (-kk..=kk).map(|k| (k, a * self.coeff(k) + b * other.coeff(k))),
        )
        .expect("bandwidth covers both inputs")
    }

    /// Same trace traversed backwards: `t -> -t`, i.e. `c_k -> c_{-k}`.
    pub fn reversed(&self) -> JordanCurve {
        let mut coeffs = self.coeffs.clone();
        coeffs.reverse();
        JordanCurve {
            bandwidth: self.bandwidth,
            coeffs,
        }
    }

    /// Mirror image in the real axis: `c_k -> conj(c_{-k})`.
    pub fn reflected(&self) -> JordanCurve {
        let mut curve = self.reversed();
        for c in &mut curve.coeffs {
            *c = c.conj();
        }
        curve
    }

    /// `n` points at parameters `2 pi j / n`.
    pub fn sample(&self, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| self.eval(TAU * j as f64 / n as f64))
            .collect()
    }

    pub fn validate(&self) -> CurveValidationReport {
        self.validate_with(DEFAULT_SAMPLES)
    }

    /// Immersion, simplicity and turning number on an `n_samples` grid.
    ///
    /// Simplicity is resolution-limited: crossings finer than the grid
    /// spacing can be missed.
    pub fn validate_with(&self, n_samples: usize) -> CurveValidationReport {
        let n_samples = n_samples.max(8);
        let mut points = Vec::with_capacity(n_samples);
        let mut tangents = Vec::with_capacity(n_samples);
        for j in 0..n_samples {
            let (p, d) = self.eval_with_derivative(TAU * j as f64 / n_samples as f64);
            points.push(p);
            tangents.push(d);
        }
        let min_speed = tangents.iter().map(|d| d.norm()).fold(f64::INFINITY, f64::min);
        let immersed = min_speed > IMMERSION_EPS;
        let turning_number = (unwrapped_phase_total(&tangents) / TAU).round() as i64;
        let first_self_intersection =
            first_crossing(&points).map(|(i, fi, j, fj)| {
                let h = TAU / n_samples as f64;
                ((i as f64 + fi) * h, (j as f64 + fj) * h)
            });
        CurveValidationReport {
            immersed,
            min_speed,
            simple: first_self_intersection.is_none(),
            first_self_intersection,
            turning_number,
        }
    }

    pub fn ensure_valid(&self) -> Result<CurveValidationReport> {
        let report = self.validate();
        if report.is_valid() {
            Ok(report)
        } else {
            Err(Error::InvalidCurve(Box::new(report)))
        }
    }
}

/// Total phase swept by a closed loop of nonzero complex numbers, summing
/// the principal-branch increments (including the closing one).
pub(crate) fn unwrapped_phase_total(values: &[Complex64]) -> f64 {
    let n = values.len();
    (0..n)
        .map(|j| (values[(j + 1) % n] / values[j]).arg())
        .sum()
}

/// Fits a curve of bandwidth `bandwidth` to a closed polyline: resample by
/// arc length to [`DEFAULT_SAMPLES`] points, then discrete Fourier analysis.
pub fn fit_from_polyline(points: &[Complex64], bandwidth: usize) -> Result<JordanCurve> {
    if points.len() < MIN_POLYLINE_POINTS {
        return Err(Error::TooFewPoints {
            got: points.len(),
            need: MIN_POLYLINE_POINTS,
        });
    }
    let resampled = resample_by_arc_length(points, DEFAULT_SAMPLES);
    let curve = fourier_analysis(&resampled, bandwidth)?;
    check_fit(curve)
}

/// Fits samples already taken at uniform parameters `2 pi j / N`; no
/// arc-length resampling, so a curve of bandwidth `< N / 2` is recovered
/// exactly.
pub fn fit_from_uniform_samples(samples: &[Complex64], bandwidth: usize) -> Result<JordanCurve> {
    if samples.len() < MIN_POLYLINE_POINTS {
        return Err(Error::TooFewPoints {
            got: samples.len(),
            need: MIN_POLYLINE_POINTS,
        });
    }
    check_fit(fourier_analysis(samples, bandwidth)?)
}

fn check_fit(curve: JordanCurve) -> Result<JordanCurve> {
    let report = curve.validate();
    if report.is_valid() {
        Ok(curve)
    } else {
        Err(Error::FitProducesInvalidCurve(Box::new(report)))
    }
}

fn fourier_analysis(samples: &[Complex64], bandwidth: usize) -> Result<JordanCurve> {
    if bandwidth == 0 {
        return Err(Error::MalformedCurve("bandwidth K must be at least 1".into()));
    }
    let n = samples.len();
    let kk = bandwidth as i64;
    let pairs = (-kk..=kk).map(|k| {
        let step = Complex64::from_polar(1.0, -TAU * k as f64 / n as f64);
        let mut w = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, z) in samples.iter().enumerate() {
            // re-anchor periodically so the running product does not drift
            if j % 64 == 0 {
                w = Complex64::from_polar(1.0, -TAU * (k * j as i64) as f64 / n as f64);
            }
            acc += z * w;
            w *= step;
        }
        (k, acc / n as f64)
    });
    JordanCurve::with_bandwidth(bandwidth, pairs)
}

fn resample_by_arc_length(points: &[Complex64], count: usize) -> Vec<Complex64> {
    let n = points.len();
    let mut cumulative = Vec::with_capacity(n + 1);
    cumulative.push(0.0);
    for j in 0..n {
        let len = (points[(j + 1) % n] - points[j]).norm();
        cumulative.push(cumulative[j] + len);
    }
    let total = cumulative[n];
    if total <= 0.0 {
        return vec![points[0]; count];
    }
    let mut out = Vec::with_capacity(count);
    let mut edge = 0;
    for i in 0..count {
        let target = total * i as f64 / count as f64;
        while edge + 1 < n && cumulative[edge + 1] <= target {
            edge += 1;
        }
        let len = cumulative[edge + 1] - cumulative[edge];
        let frac = if len > 0.0 {
            (target - cumulative[edge]) / len
        } else {
            0.0
        };
        let a = points[edge];
        let b = points[(edge + 1) % n];
        out.push(a + (b - a) * frac);
    }
    out
}

fn orient(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    ((b - a).conj() * (c - a)).im
}

/// Whether closed segments `[a, b]` and `[c, d]` share a point. Returns the
/// fractional positions along each segment of one common point.
fn segments_intersect(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Option<(f64, f64)> {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    let scale = ((b - a).norm() * (d - c).norm()).max(f64::MIN_POSITIVE);
    let eps = 1e-14 * scale;
    let side = |x: f64| if x > eps { 1 } else if x < -eps { -1 } else { 0 };
    let (s1, s2, s3, s4) = (side(d1), side(d2), side(d3), side(d4));
    if s1 * s2 < 0 && s3 * s4 < 0 {
        let fa = d1 / (d1 - d2);
        let fc = d3 / (d3 - d4);
        return Some((fa, fc));
    }
    if s1 != 0 && s1 == s2 || s3 != 0 && s3 == s4 {
        return None;
    }
    // touching or colinear: project onto the longer direction
    let dir = if (b - a).norm() >= (d - c).norm() { b - a } else { d - c };
    let len2 = dir.norm_sqr();
    if len2 == 0.0 {
        return ((a - c).norm() == 0.0).then_some((0.0, 0.0));
    }
    let proj = |z: Complex64| ((z - a).conj() * dir).re / len2;
    let pts_on = |p: Complex64, s: Complex64, e: Complex64| {
        orient(s, e, p).abs() <= eps && {
            let lo = s.re.min(e.re) - 1e-15;
            let hi = s.re.max(e.re) + 1e-15;
            let lo_i = s.im.min(e.im) - 1e-15;
            let hi_i = s.im.max(e.im) + 1e-15;
            p.re >= lo && p.re <= hi && p.im >= lo_i && p.im <= hi_i
        }
    };
    for (p, on_ab) in [(c, true), (d, true), (a, false), (b, false)] {
        let hit = if on_ab { pts_on(p, a, b) } else { pts_on(p, c, d) };
        if hit {
            let fa = proj(p).clamp(0.0, 1.0);
            let cd = d - c;
            let fc = if cd.norm_sqr() > 0.0 {
                (((p - c).conj() * cd).re / cd.norm_sqr()).clamp(0.0, 1.0)
            } else {
                0.0
            };
            return Some((fa, fc));
        }
    }
    None
}

/// Lexicographically first pair of non-adjacent crossing segments of the
/// closed polygon, found through a uniform spatial hash.
fn first_crossing(points: &[Complex64]) -> Option<(usize, f64, usize, f64)> {
    let n = points.len();
    let seg = |i: usize| (points[i], points[(i + 1) % n]);
    let (mut lo_x, mut lo_y) = (f64::INFINITY, f64::INFINITY);
    let mut total = 0.0;
    for i in 0..n {
        lo_x = lo_x.min(points[i].re);
        lo_y = lo_y.min(points[i].im);
        total += (seg(i).1 - seg(i).0).norm();
    }
    let cell = (2.0 * total / n as f64).max(1e-12);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..n {
        let (a, b) = seg(i);
        let x0 = ((a.re.min(b.re) - lo_x) / cell).floor() as i64;
        let x1 = ((a.re.max(b.re) - lo_x) / cell).floor() as i64;
        let y0 = ((a.im.min(b.im) - lo_y) / cell).floor() as i64;
        let y1 = ((a.im.max(b.im) - lo_y) / cell).floor() as i64;
        for x in x0..=x1 {
            for y in y0..=y1 {
                grid.entry((x, y)).or_default().push(i);
            }
        }
    }
    let adjacent = |i: usize, j: usize| {
        let d = i.abs_diff(j);
        d <= 1 || d == n - 1
    };
    let mut best: Option<(usize, f64, usize, f64)> = None;
    for bucket in grid.values() {
        for (x, &i) in bucket.iter().enumerate() {
            for &j in &bucket[x + 1..] {
                let (i, j) = if i < j { (i, j) } else { (j, i) };
                if adjacent(i, j) {
                    continue;
                }
                if let Some(b) = best {
                    if (i, j) >= (b.0, b.2) {
                        continue;
                    }
                }
                let (a, b) = seg(i);
                let (c, d) = seg(j);
                if let Some((fi, fj)) = segments_intersect(a, b, c, d) {
                    best = Some((i, fi, j, fj));
                }
            }
        }
    }
    best
}

#[derive(Serialize, Deserialize)]
struct CoeffEntry {
    k: i64,
    re: f64,
    im: f64,
}

/// On-disk form: `{"K": int, "coeffs": [{"k": int, "re": float, "im": float}, ...]}`.
#[derive(Serialize, Deserialize)]
struct CurveFile {
    #[serde(rename = "K")]
    bandwidth: usize,
    coeffs: Vec<CoeffEntry>,
}

impl TryFrom<CurveFile> for JordanCurve {
    type Error = Error;

    fn try_from(file: CurveFile) -> Result<Self> {
        for e in &file.coeffs {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(Error::MalformedCurve(format!("coefficient k={} is not finite", e.k)));
            }
        }
        JordanCurve::with_bandwidth(
            file.bandwidth,
            file.coeffs
                .into_iter()
                .map(|e| (e.k, Complex64::new(e.re, e.im))),
        )
    }
}

impl From<JordanCurve> for CurveFile {
    fn from(curve: JordanCurve) -> Self {
        CurveFile {
            bandwidth: curve.bandwidth,
            coeffs: curve
                .nonzero_coeffs()
                .map(|(k, c)| CoeffEntry { k, re: c.re, im: c.im })
                .collect(),
        }
    }
}

/// `{"points": [[x, y], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<[f64; 2]>,
}

impl Polyline {
    pub fn to_complex(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| Complex64::new(p[0], p[1])).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn ellipse() -> JordanCurve {
        JordanCurve::from_coeffs([(1, c(1.0, 0.0)), (-1, c(0.25, 0.0))])
    }

    fn deltoid() -> JordanCurve {
        JordanCurve::from_coeffs([(1, c(2.0, 0.0)), (-2, c(1.0, 0.0))])
    }

    #[test]
    fn eval_examples() {
        let circle = JordanCurve::unit_circle();
        assert_abs_diff_eq!(circle.eval(0.0).re, 1.0);
        assert_abs_diff_eq!(circle.eval(0.0).im, 0.0);
        let z = circle.eval(PI / 2.0);
        assert_abs_diff_eq!(z.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(z.im, 1.0, epsilon = 1e-15);
        let e = ellipse().eval(0.0);
        assert_abs_diff_eq!(e.re, 1.25, epsilon = 1e-15);
        assert_abs_diff_eq!(e.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let circle = JordanCurve::unit_circle();
        let d0 = circle.derivative(0.0);
        assert_abs_diff_eq!(d0.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d0.im, 1.0, epsilon = 1e-15);
        let dpi = circle.derivative(PI);
        assert_abs_diff_eq!(dpi.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dpi.im, -1.0, epsilon = 1e-15);
        // 2i - 2i
        assert!(deltoid().derivative(0.0).norm() < 1e-14);
    }

    #[test]
    fn validate_examples() {
        let r = JordanCurve::unit_circle().validate();
        assert!(r.immersed && r.simple);
        assert_eq!(r.turning_number, 1);
        assert!(r.is_valid());

        let r = deltoid().validate();
        assert!(!r.immersed);
        assert!(r.min_speed < 1e-12);

        let r = JordanCurve::from_coeffs([(1, c(1.0, 0.0)), (2, c(0.8, 0.0))]).validate();
        assert!(!r.simple);
        assert!(r.first_self_intersection.is_some());
    }

    #[test]
    fn orientation_reversal_flips_turning_number() {
        let circle = JordanCurve::unit_circle();
        assert_eq!(circle.reversed().validate().turning_number, -1);
        assert_eq!(circle.reflected().validate().turning_number, -1);
        assert_eq!(ellipse().reflected().validate().turning_number, -1);
    }

    #[test]
    fn fit_unit_circle_polyline() {
        let pts: Vec<_> = (0..64)
            .map(|j| Complex64::from_polar(1.0, TAU * j as f64 / 64.0))
            .collect();
        let fit = fit_from_polyline(&pts, 4).unwrap();
        // linear interpolation of a 64-gon has c_{1+64m} = sinc^2(pi (1+64m)/64);
        // 2048 samples alias k = 1 + 2048m onto k = 1
        let expected: f64 = (-2000..=2000)
            .map(|m| {
                let x = PI * (1.0 + 2048.0 * m as f64) / 64.0;
                (x.sin() / x).powi(2)
            })
            .sum();
        assert_abs_diff_eq!(fit.coeff(1).re, expected, epsilon = 1e-9);
        assert!((fit.coeff(1) - 1.0).norm() < 1e-3);
        for k in -4..=4 {
            if k != 1 {
                assert!(fit.coeff(k).norm() < 1e-9, "k={k}: {}", fit.coeff(k));
            }
        }
    }

    #[test]
    fn fit_offset_circle_polyline() {
        let center = c(1.0, 1.0);
        let pts: Vec<_> = (0..64)
            .map(|j| center + Complex64::from_polar(2.0, TAU * j as f64 / 64.0))
            .collect();
        let fit = fit_from_polyline(&pts, 4).unwrap();
        assert!((fit.coeff(0) - center).norm() < 1e-9);
        assert!((fit.coeff(1) - 2.0).norm() < 2e-3);
    }

    #[test]
    fn colinear_polyline_is_rejected() {
        let pts: Vec<_> = (0..8).map(|j| c(j as f64, 0.0)).collect();
        match fit_from_polyline(&pts, 4) {
            Err(Error::FitProducesInvalidCurve(_)) => {}
            other => panic!("expected FitProducesInvalidCurve, got {other:?}"),
        }
    }

    #[test]
    fn too_few_points() {
        let pts = vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)];
        assert!(matches!(
            fit_from_polyline(&pts, 4),
            Err(Error::TooFewPoints { got: 3, .. })
        ));
    }

    #[test]
    fn json_round_trip_and_format() {
        let curve = ellipse();
        let text = serde_json::to_string(&curve).unwrap();
        assert!(text.contains("\"K\":1"));
        let back: JordanCurve = serde_json::from_str(&text).unwrap();
        assert_eq!(back, curve);
        let bad = r#"{"K": 1, "coeffs": [{"k": 3, "re": 1.0, "im": 0.0}]}"#;
        assert!(serde_json::from_str::<JordanCurve>(bad).is_err());
    }

    #[test]
    fn segment_overlap_counts_as_crossing() {
        assert!(segments_intersect(c(0.0, 0.0), c(2.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)).is_some());
        assert!(segments_intersect(c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)).is_none());
        assert!(segments_intersect(c(0.0, -1.0), c(0.0, 1.0), c(-1.0, 0.0), c(1.0, 0.0)).is_some());
    }
}
