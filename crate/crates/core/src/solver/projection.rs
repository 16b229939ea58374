use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::curves::{JordanCurve, DEFAULT_SAMPLES};

const NEWTON_STEPS: usize = 8;

/// Nearest-point queries against a curve: dense sampling followed by
/// Newton iterations on `Re(conj(gamma - z) gamma')`.
#[derive(Clone, Debug)]
pub struct CurveProjector<'a> {
    curve: &'a JordanCurve,
    samples: Vec<Complex64>,
}

impl<'a> CurveProjector<'a> {
    pub fn new(curve: &'a JordanCurve) -> Self {
        Self::with_samples(curve, DEFAULT_SAMPLES)
    }

    pub fn with_samples(curve: &'a JordanCurve, n: usize) -> Self {
        CurveProjector {
            curve,
            samples: curve.sample(n),
        }
    }

    /// Parameter of the nearest sample, without refinement.
    pub fn nearest_sample(&self, z: Complex64) -> f64 {
        let (best_i, _) = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (p - z).norm_sqr()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        TAU * best_i as f64 / self.samples.len() as f64
    }

    /// `(distance, parameter)` of the nearest curve point found.
    pub fn project(&self, z: Complex64) -> (f64, f64) {
        let n = self.samples.len();
        let (best_i, best_d) = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, p)| (i, (p - z).norm()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let mut best = (best_d, TAU * best_i as f64 / n as f64);
        let mut t = best.1;
        for _ in 0..NEWTON_STEPS {
            let (g, d1, d2) = self.curve.jet(t);
            let diff = g - z;
            let f = (diff.conj() * d1).re;
            let fp = d1.norm_sqr() + (diff.conj() * d2).re;
            if fp <= 0.0 {
                break;
            }
            let dt = f / fp;
            t -= dt;
            let d = (self.curve.eval(t) - z).norm();
            if d < best.0 {
                best = (d, t.rem_euclid(TAU));
            }
            if dt.abs() < 1e-15 {
                break;
            }
        }
        best
    }

    /// Diagonal of the bounding box of the samples.
    pub fn extent(&self) -> f64 {
        let (mut lo, mut hi) = (self.samples[0], self.samples[0]);
        for p in &self.samples {
            lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        (hi - lo).norm()
    }

    pub fn distance(&self, z: Complex64) -> f64 {
        self.project(z).0
    }
}

pub fn distance_to_curve(curve: &JordanCurve, z: Complex64) -> f64 {
    CurveProjector::new(curve).distance(z)
}
