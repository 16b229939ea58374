//! Simultaneous diagonal symplectic forms for interleaved unit-circle
//! configurations, their closed-form cross-ratio description, Lagrangian
//! checks for the two tori, and the Maslov index of the diagonal loop.
//!
//! A diagonal complexified form `sum lambda_k dz_k ^ dzbar_k` with
//! `lambda_k = i s_k` equals `sum 2 s_k dx_k ^ dy_k`; the `*_pos` fields
//! hold these real `dx ^ dy` coefficients.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{check_interleaved_on_circle, PointConfig};
use crate::curves::{unwrapped_phase_total, JordanCurve, DEFAULT_SAMPLES};
use crate::error::{Error, Result};
use crate::interp::{build_transfer, CMatrix, TransferMap};

/// `sigma_{2n-1} / sigma_1` must exceed this for a one-dimensional nullspace.
pub const NULLSPACE_GAP: f64 = 1e-6;
/// Tolerance on the imaginary part of normalized coefficients.
pub const POSITIVE_IMAG_TOL: f64 = 1e-9;
/// Tolerance of the pullback identity, relative to `|u| |v|`.
pub const PULLBACK_TOL: f64 = 1e-8;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// The `2n x (2n-1)` matrix of powers `z^{1-n}, ..., z^{n-1}`, alpha rows
/// first.
pub fn power_matrix(config: &PointConfig) -> Result<CMatrix> {
    let points: Vec<Complex64> = config.alpha().iter().chain(config.beta()).copied().collect();
    if let Some(index) = points.iter().position(|z| *z == zero()) {
        return Err(Error::ZeroPoint { index });
    }
    let n = config.n() as i32;
    Ok(CMatrix::from_fn(2 * config.n(), 2 * config.n() - 1, |row, col| {
        points[row].powi(col as i32 + 1 - n)
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalFormPair {
    /// `dz ^ dzbar` coefficients of the alpha-side form, scaled so that
    /// `mu_raw[n-1] = i`.
    pub lambda_raw: Vec<Complex64>,
    pub mu_raw: Vec<Complex64>,
    /// Positive `dx ^ dy` coefficients; `mu_pos[n-1] = 2`.
    pub lambda_pos: Vec<f64>,
    pub mu_pos: Vec<f64>,
    /// Singular values of the square-padded power matrix, descending.
    pub singular_values: Vec<f64>,
    /// `max |(lambda, -mu) V|` relative to `|V|`.
    pub nullspace_residual: f64,
    /// `max |Psi_mu(Fu, Fv) - Psi_lambda(u, v)|` over a full real frame.
    pub pullback_defect: f64,
}

/// Normalized complex ratios `lambda_j / mu_n`, `mu_j / mu_n` with the
/// singular values they came from, for any configuration with a
/// one-dimensional left nullspace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormRatios {
    pub lambda: Vec<Complex64>,
    pub mu: Vec<Complex64>,
    pub singular_values: Vec<f64>,
    pub nullspace_residual: f64,
}

impl FormRatios {
    /// Index of the first coefficient that is not positive real.
    pub fn first_non_positive(&self) -> Option<(usize, Complex64)> {
        let scale = self
            .lambda
            .iter()
            .chain(&self.mu)
            .map(|z| z.norm())
            .fold(1.0, f64::max);
        self.lambda
            .iter()
            .chain(&self.mu)
            .copied()
            .enumerate()
            .find(|(_, z)| !(z.re > 0.0 && z.im.abs() < POSITIVE_IMAG_TOL * scale))
    }
}

/// Left null vector of the power matrix without checking interleaving.
pub fn form_ratios(config: &PointConfig) -> Result<FormRatios> {
    let v = power_matrix(config)?;
    let m = v.nrows();
    let n = config.n();
    let mut padded = CMatrix::zeros(m, m);
    padded.view_mut((0, 0), (m, m - 1)).copy_from(&v);
    let svd = padded.svd(true, false);
    let u = svd.u.expect("requested U");
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|a, b| svd.singular_values[*b].total_cmp(&svd.singular_values[*a]));
    let singular_values: Vec<f64> = order.iter().map(|i| svd.singular_values[*i]).collect();
    if !(singular_values[m - 2] > NULLSPACE_GAP * singular_values[0]) {
        return Err(Error::NullspaceNotOneDimensional { singular_values });
    }
    // u^* V = 0, so the row vector x = conj(u) satisfies x V = 0.
    let null = u.column(order[m - 1]).map(|z| z.conj());
    let x: Vec<Complex64> = null.iter().copied().collect();
    let mu_n = -x[2 * n - 1];
    if mu_n.norm() < 1e-300 {
        return Err(Error::NullspaceNotOneDimensional { singular_values });
    }
    let lambda: Vec<Complex64> = x[..n].iter().map(|z| z / mu_n).collect();
    let mu: Vec<Complex64> = x[n..].iter().map(|z| -z / mu_n).collect();

    let row: Vec<Complex64> = lambda.iter().copied().chain(mu.iter().map(|z| -z)).collect();
    let vnorm = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let xnorm = row.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let nullspace_residual = (0..v.ncols())
        .map(|c| (0..m).map(|r| row[r] * v[(r, c)]).sum::<Complex64>().norm())
        .fold(0.0, f64::max)
        / (vnorm * xnorm);
    Ok(FormRatios {
        lambda,
        mu,
        singular_values,
        nullspace_residual,
    })
}

/// The pair of positive real diagonal forms with `F^* psi_mu = psi_lambda`.
pub fn diagonal_forms(config: &PointConfig) -> Result<DiagonalFormPair> {
    if !check_interleaved_on_circle(config)? {
        return Err(Error::NotInterleaved);
    }
    let ratios = form_ratios(config)?;
    if let Some((index, value)) = ratios.first_non_positive() {
        return Err(Error::NotPositive {
            index,
            value: value.to_string(),
        });
    }
    let i = Complex64::new(0.0, 1.0);
    let lambda_pos: Vec<f64> = ratios.lambda.iter().map(|z| 2.0 * z.re).collect();
    let mu_pos: Vec<f64> = ratios.mu.iter().map(|z| 2.0 * z.re).collect();
    let transfer = build_transfer(config)?;
    let pullback_defect = pullback_defect(&lambda_pos, &mu_pos, &transfer);
    if !(pullback_defect < PULLBACK_TOL) {
        return Err(Error::PullbackMismatch {
            defect: pullback_defect,
        });
    }
    Ok(DiagonalFormPair {
        lambda_raw: ratios.lambda.iter().map(|z| z * i).collect(),
        mu_raw: ratios.mu.iter().map(|z| z * i).collect(),
        lambda_pos,
        mu_pos,
        singular_values: ratios.singular_values,
        nullspace_residual: ratios.nullspace_residual,
        pullback_defect,
    })
}

/// `Psi(u, v) = sum c_k Im(conj(u_k) v_k)`, the real bilinear form of
/// `sum c_k dx_k ^ dy_k`.
pub fn real_form(coeffs: &[f64], u: &[Complex64], v: &[Complex64]) -> f64 {
    coeffs
        .iter()
        .zip(u.iter().zip(v))
        .map(|(c, (a, b))| c * (a.conj() * b).im)
        .sum()
}

/// Max of `|Psi_mu(Fu, Fv) - Psi_lambda(u, v)| / (|u| |v|)` over all pairs of
/// the real frame `e_1, i e_1, ..., e_n, i e_n`.
pub fn pullback_defect(lambda_pos: &[f64], mu_pos: &[f64], transfer: &TransferMap) -> f64 {
    let n = transfer.n();
    let frame: Vec<Vec<Complex64>> = (0..2 * n)
        .map(|idx| {
            let mut e = vec![zero(); n];
            e[idx / 2] = if idx % 2 == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 1.0)
            };
            e
        })
        .collect();
    let images: Vec<Vec<Complex64>> = frame.iter().map(|e| transfer.apply(e)).collect();
    let mut worst: f64 = 0.0;
    for a in 0..frame.len() {
        for b in a + 1..frame.len() {
            let lhs = real_form(mu_pos, &images[a], &images[b]);
            let rhs = real_form(lambda_pos, &frame[a], &frame[b]);
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

/// `[a, b; c, d] = ((a - c)(b - d)) / ((a - d)(b - c))`, defined for four
/// distinct points.
pub fn cross_ratio(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Complex64> {
    let pts = [a, b, c, d];
    if (0..4).any(|i| (i + 1..4).any(|j| pts[i] == pts[j])) {
        return Err(Error::DegenerateCrossRatio);
    }
    Ok((a - c) * (b - d) / ((a - d) * (b - c)))
}

/// Closed-form products for `lambda_j / mu_n` (`j = 1..n`) and
/// `mu_j / mu_n` (`j = 1..n`, last entry 1), evaluated independently of the
/// nullspace computation.
pub fn cross_ratio_oracle(config: &PointConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    if !check_interleaved_on_circle(config)? {
        return Err(Error::NotInterleaved);
    }
    let (alpha, beta) = (config.alpha(), config.beta());
    let n = config.n();
    let last = n - 1;
    let (a_n, b_n) = (alpha[last], beta[last]);
    let sq = |z: Complex64| z.norm_sqr();

    let mut lambda = Vec::with_capacity(n);
    for j in 0..last {
        let a_j = alpha[j];
        let mut acc = Complex64::new(sq((b_n - a_n) / (a_j - a_n)), 0.0)
            * cross_ratio(a_j, b_n, a_n, beta[j])?;
        for k in (0..n).filter(|k| *k != j && *k != last) {
            acc *= sq((b_n - alpha[k]) / (a_j - alpha[k])) * cross_ratio(a_j, b_n, alpha[k], beta[k])?;
        }
        lambda.push(acc);
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for k in 0..last {
        acc *= sq((b_n - alpha[k]) / (a_n - alpha[k])) * cross_ratio(a_n, b_n, alpha[k], beta[k])?;
    }
    lambda.push(acc);

    let mut mu = Vec::with_capacity(n);
    for j in 0..last {
        let b_j = beta[j];
        let mut acc = -sq((b_n - alpha[j]) / (b_j - alpha[j])) * cross_ratio(b_n, b_j, a_n, alpha[j])?;
        for k in (0..n).filter(|k| *k != j && *k != last) {
            acc *= sq((b_n - alpha[k]) / (b_j - alpha[k])) * cross_ratio(b_j, b_n, alpha[k], beta[k])?;
        }
        mu.push(acc);
    }
    mu.push(Complex64::new(1.0, 0.0));

    let to_real = |v: Vec<Complex64>| -> Result<Vec<f64>> {
        v.into_iter()
            .enumerate()
            .map(|(index, z)| {
                if z.re > 0.0 && z.im.abs() <= 1e-9 * z.norm().max(1.0) {
                    Ok(z.re)
                } else {
                    Err(Error::NotPositive {
                        index,
                        value: z.to_string(),
                    })
                }
            })
            .collect()
    };
    Ok((to_real(lambda)?, to_real(mu)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TorusSide {
    /// The product torus `gamma^n`.
    AlphaSide,
    /// Its image `F(gamma^n)`.
    BetaSide,
}

/// Largest normalized value of the form `coeffs` on pairs of tangent
/// vectors to the chosen torus, over `n_samples` random torus points.
pub fn lagrangian_defect(
    coeffs: &[f64],
    side: TorusSide,
    curve: &JordanCurve,
    transfer: &TransferMap,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    let n = transfer.n();
    if coeffs.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "form has {} coefficients, transfer map acts on C^{n}",
            coeffs.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut worst: f64 = 0.0;
    for _ in 0..n_samples {
        let frame: Vec<Vec<Complex64>> = (0..n)
            .map(|j| {
                let t = rng.random::<f64>() * TAU;
                let mut e = vec![zero(); n];
                e[j] = curve.derivative(t);
                match side {
                    TorusSide::AlphaSide => e,
                    TorusSide::BetaSide => transfer.apply(&e),
                }
            })
            .collect();
        for a in 0..n {
            for b in a + 1..n {
                let scale = norm(&frame[a]) * norm(&frame[b]);
                if scale > 0.0 {
                    worst = worst.max(real_form(coeffs, &frame[a], &frame[b]).abs() / scale);
                }
            }
        }
    }
    Ok(worst)
}

/// Both tori are checked against the `mu` form, the one for which the pair
/// is simultaneously Lagrangian.
pub fn verify_lagrangian(
    forms: &DiagonalFormPair,
    side: TorusSide,
    curve: &JordanCurve,
    transfer: &TransferMap,
    n_samples: usize,
    seed: u64,
) -> Result<f64> {
    lagrangian_defect(&forms.mu_pos, side, curve, transfer, n_samples, seed)
}

/// Winding number of `t -> (gamma'(t) / |gamma'(t)|)^{2n}` over one period.
/// The grid is refined until every phase increment is below `pi / 2`.
pub fn maslov_index_diagonal(curve: &JordanCurve, n: usize) -> Result<i64> {
    let report = curve.validate();
    if !report.is_valid() {
        return Err(Error::InvalidCurve(Box::new(report)));
    }
    let power = 2 * n as i32;
    let mut samples = DEFAULT_SAMPLES;
    loop {
        let values: Vec<Complex64> = (0..samples)
            .map(|j| {
                let d = curve.derivative(TAU * j as f64 / samples as f64);
                (d / d.norm()).powi(power)
            })
            .collect();
        let fine = (0..samples).all(|j| (values[(j + 1) % samples] / values[j]).arg().abs() < TAU / 4.0);
        if fine || samples >= 1 << 22 {
            return Ok((unwrapped_phase_total(&values) / TAU).round() as i64);
        }
        samples *= 2;
    }
}
