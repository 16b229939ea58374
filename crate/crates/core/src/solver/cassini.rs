use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::diameter;
use crate::error::{Error, Result};
use crate::interp::Polynomial;
use crate::numerics::levenberg_marquardt;

/// Relative bound on `max_j | |q_j - r1| |q_j - r2| - c |`, measured after
/// scaling the points to unit diameter.
pub const CASSINI_TOL: f64 = 1e-6;
const STARTS: usize = 64;
const LM_ITERS: usize = 200;

/// `|z - r1| |z - r2| = level` through the fitted points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CassiniFit {
    pub foci: (Complex64, Complex64),
    pub level: f64,
    /// Largest deviation of `|q - r1| |q - r2|` from `level`.
    pub max_deviation: f64,
    /// `(z - r1)(z - r2) / level`, a quadratic sending the points into the
    /// unit circle.
    pub inscription: Polynomial,
    /// `max_j | |p(q_j)| - 1 |` for that quadratic.
    pub circle_defect: f64,
}

/// Residuals `|w^2 - s w + p| - c` in the unknowns `(s, p, c)`, with the
/// foci the roots of `z^2 - s z + p`.
fn residuals(w: &[Complex64], x: &[f64], r: &mut [f64], jac: &mut [f64]) {
    let s = Complex64::new(x[0], x[1]);
    let p = Complex64::new(x[2], x[3]);
    for (j, wj) in w.iter().enumerate() {
        let u = wj * wj - s * wj + p;
        let norm = u.norm();
        r[j] = norm - x[4];
        let row = &mut jac[5 * j..5 * j + 5];
        if norm > 0.0 {
            // d|u| = Re(conj(u) du) / |u|
            let unit = u.conj() / norm;
            let ds = -(unit * wj);
            row[0] = ds.re;
            row[1] = -ds.im;
            row[2] = unit.re;
            row[3] = -unit.im;
        } else {
            row[..4].iter_mut().for_each(|v| *v = 0.0);
        }
        row[4] = -1.0;
    }
}

fn max_deviation(w: &[Complex64], s: Complex64, p: Complex64, c: f64) -> f64 {
    w.iter()
        .map(|z| ((z * z - s * z + p).norm() - c).abs())
        .fold(0.0, f64::max)
}

/// Least-squares Cassini oval through six points by seeded
/// Levenberg-Marquardt multistart. `None` when no oval passes within the
/// tolerance.
pub fn fit_cassini(points: &[Complex64]) -> Result<Option<CassiniFit>> {
    if points.len() != 6 {
        return Err(Error::DimensionMismatch(format!("need 6 points, got {}", points.len())));
    }
    if points.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::DegenerateInput("non-finite point".into()));
    }
    for i in 0..6 {
        for j in i + 1..6 {
            let distance = (points[i] - points[j]).norm();
            if distance < 1e-10 {
                return Err(Error::DegenerateInput(format!("points {i} and {j} coincide")));
            }
        }
    }
    let center = points.iter().sum::<Complex64>() / 6.0;
    let scale = diameter(points);
    let w: Vec<Complex64> = points.iter().map(|q| (q - center) / scale).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(0x0ca5_5141);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for start in 0..STARTS {
        let (s, p) = if start == 0 {
            (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            let r1 = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let r2 = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            (r1 + r2, r1 * r2)
        };
        let c0 = w.iter().map(|z| (z * z - s * z + p).norm()).sum::<f64>() / 6.0;
        let x0 = [s.re, s.im, p.re, p.im, c0];
        let out = levenberg_marquardt(&x0, 6, |x, r, j| residuals(&w, x, r, j), LM_ITERS);
        if out.x[4] <= 0.0 || !out.max_residual.is_finite() {
            continue;
        }
        if best.as_ref().is_none_or(|(dev, _)| out.max_residual < *dev) {
            best = Some((out.max_residual, out.x));
        }
        if best.as_ref().is_some_and(|(dev, _)| *dev < 1e-13) {
            break;
        }
    }
    let Some((_, x)) = best else {
        return Ok(None);
    };
    let (s, p, c) = (Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]), x[4]);
    if max_deviation(&w, s, p, c) >= CASSINI_TOL {
        return Ok(None);
    }
    let root = (s * s - 4.0 * p).sqrt();
    let foci = (center + scale * (s + root) / 2.0, center + scale * (s - root) / 2.0);
    let level = c * scale * scale;
    let max_deviation = points
        .iter()
        .map(|q| ((q - foci.0).norm() * (q - foci.1).norm() - level).abs())
        .fold(0.0, f64::max);
    let inscription = Polynomial::new(vec![
        foci.0 * foci.1 / level,
        -(foci.0 + foci.1) / level,
        Complex64::new(1.0 / level, 0.0),
    ]);
    let circle_defect = points
        .iter()
        .map(|q| (inscription.eval(*q).norm() - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(Some(CassiniFit {
        foci,
        level,
        max_deviation,
        inscription,
        circle_defect,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn sixth_roots_fit_a_circle() {
        let q: Vec<Complex64> = (0..6).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / 6.0)).collect();
        let fit = fit_cassini(&q).unwrap().unwrap();
        assert!(fit.foci.0.norm() < 1e-6 && fit.foci.1.norm() < 1e-6, "{fit:?}");
        assert!((fit.level - 1.0).abs() < 1e-6);
        assert!(fit.circle_defect < 1e-6);
    }

    #[test]
    fn colinear_points_have_no_oval() {
        let q: Vec<Complex64> = (0..6).map(|k| Complex64::new(k as f64 - 2.5, 0.0)).collect();
        assert!(fit_cassini(&q).unwrap().is_none());
    }

    #[test]
    fn input_errors() {
        let q = vec![Complex64::new(0.0, 0.0); 6];
        assert!(matches!(fit_cassini(&q), Err(Error::DegenerateInput(_))));
        assert!(matches!(fit_cassini(&q[..5]), Err(Error::DimensionMismatch(_))));
    }
}
