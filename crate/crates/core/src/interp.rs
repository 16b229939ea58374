//! Vandermonde evaluation maps, interpolation, and the transfer map
//! `F = ev_beta . ev_alpha^{-1}` between value vectors at two node sets.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{pinwheel_nodes, PointConfig};
use crate::error::{Error, Result};

/// Largest supported node count for interpolation.
pub const MAX_NODES: usize = 12;
/// Node count above which Vandermonde conditioning is worth a warning.
pub const WARN_NODES: usize = 8;
/// Interpolation is refused above this condition estimate.
pub const MAX_CONDITION: f64 = 1e12;
/// Relative tail size below which a polynomial counts as constant.
pub const CONSTANT_TOL: f64 = 1e-7;
/// Relative singular-value threshold for rank decisions.
pub const RANK_TOL: f64 = 1e-8;

pub type CMatrix = DMatrix<Complex64>;

/// `a_0 + a_1 z + ... + a_{n-1} z^{n-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a polynomial needs at least one coefficient");
        Polynomial { coeffs }
    }

    pub fn constant(value: Complex64, len: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); len.max(1)];
        coeffs[0] = value;
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
    }

    /// Constant when every non-constant coefficient is below
    /// `tol * max |a_k|`; an exactly zero tail is always constant.
    pub fn is_constant_with(&self, tol: f64) -> bool {
        let tail_max = self.coeffs[1..].iter().map(|a| a.norm()).fold(0.0, f64::max);
        if tail_max == 0.0 {
            return true;
        }
        let scale = self.coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max);
        tail_max < tol * scale
    }

    pub fn is_constant(&self) -> bool {
        self.is_constant_with(CONSTANT_TOL)
    }

    /// Max coefficient distance, padding the shorter with zeros.
    pub fn distance(&self, other: &Polynomial) -> f64 {
        let len = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        (0..len)
            .map(|k| {
                let a = self.coeffs.get(k).unwrap_or(&zero);
                let b = other.coeffs.get(k).unwrap_or(&zero);
                (a - b).norm()
            })
            .fold(0.0, f64::max)
    }
}

fn ensure_distinct_nodes(nodes: &[Complex64]) -> Result<()> {
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if nodes[i] == nodes[j] {
                return Err(Error::RepeatedNodes { i, j });
            }
        }
    }
    Ok(())
}

/// Rows indexed by node, columns by power `0..n-1`.
pub fn vandermonde(nodes: &[Complex64]) -> Result<CMatrix> {
    ensure_distinct_nodes(nodes)?;
    Ok(vandermonde_unchecked(nodes))
}

pub(crate) fn vandermonde_unchecked(nodes: &[Complex64]) -> CMatrix {
    let n = nodes.len();
    CMatrix::from_fn(n, n, |k, j| nodes[k].powu(j as u32))
}

pub fn ev(poly: &Polynomial, nodes: &[Complex64]) -> Vec<Complex64> {
    nodes.iter().map(|z| poly.eval(*z)).collect()
}

/// Ratio of extreme singular values.
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Solves `a x = b` (columns of `b`) by partially pivoted LU with one step
/// of iterative refinement.
fn refined_solve(a: &CMatrix, b: &CMatrix) -> Option<CMatrix> {
    let lu = a.clone().lu();
    let mut x = lu.solve(b)?;
    let residual = b - a * &x;
    if let Some(dx) = lu.solve(&residual) {
        x += dx;
    }
    Some(x)
}

fn check_node_count(count: usize) -> Result<()> {
    if count > MAX_NODES {
        return Err(Error::TooManyNodes {
            count,
            max: MAX_NODES,
        });
    }
    if count > WARN_NODES {
        log::warn!("interpolating on {count} nodes; Vandermonde conditioning degrades quickly above {WARN_NODES}");
    }
    Ok(())
}

/// The unique polynomial of degree `< n` taking `values` at `nodes`.
pub fn interpolate(nodes: &[Complex64], values: &[Complex64]) -> Result<Polynomial> {
    if nodes.len() != values.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} nodes but {} values",
            nodes.len(),
            values.len()
        )));
    }
    if nodes.is_empty() {
        return Err(Error::TooFewPoints { got: 0, need: 1 });
    }
    check_node_count(nodes.len())?;
    let v = vandermonde(nodes)?;
    let condition = condition_number(&v);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let rhs = CMatrix::from_column_slice(values.len(), 1, values);
    let x = refined_solve(&v, &rhs).ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
    })?;
    Ok(Polynomial::new(x.column(0).iter().copied().collect()))
}

/// `F_alpha^beta` with the node lists it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMap {
    pub matrix: CMatrix,
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
    /// Condition number of `V^alpha`.
    pub condition_estimate: f64,
}

impl TransferMap {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.matrix[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Row-major `[[re, im], ...]` rows.
    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        matrix_rows(&self.matrix)
    }
}

pub fn matrix_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// `ev_to . ev_from^{-1}` for arbitrary node lists of equal length.
pub fn transfer_between(from: &[Complex64], to: &[Complex64]) -> Result<TransferMap> {
    if from.len() != to.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} source nodes, {} target nodes",
            from.len(),
            to.len()
        )));
    }
    check_node_count(from.len())?;
    let v_from = vandermonde(from)?;
    let v_to = vandermonde_unchecked(to);
    let condition = condition_number(&v_from);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    // F V_from = V_to, solved row by row so that F 1 = 1 holds to the
    // residual of the solve
    let transposed = refined_solve(&v_from.transpose(), &v_to.transpose()).ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
    })?;
    Ok(TransferMap {
        matrix: transposed.transpose(),
        alpha: from.to_vec(),
        beta: to.to_vec(),
        condition_estimate: condition,
    })
}

/// `(V^nodes)^{-1}`, refused above the conditioning limit.
pub fn vandermonde_inverse(nodes: &[Complex64]) -> Result<CMatrix> {
    check_node_count(nodes.len())?;
    let v = vandermonde(nodes)?;
    let condition = condition_number(&v);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let n = nodes.len();
    refined_solve(&v, &CMatrix::identity(n, n)).ok_or(Error::IllConditioned {
        condition: f64::INFINITY,
    })
}

pub fn build_transfer(config: &PointConfig) -> Result<TransferMap> {
    transfer_between(config.alpha(), config.beta())
}

/// `V^alpha D_theta (V^alpha)^{-1}` for the theta-pinwheel, using
/// `(V^alpha)^{-1} = V^alpha* / n` at the n-th roots of unity. Defined for
/// every real `theta`; `theta -> F_theta` is a one-parameter group.
pub fn build_transfer_pinwheel(n: usize, theta: f64) -> TransferMap {
    let (alpha, beta) = pinwheel_nodes(n, theta);
    let v = vandermonde_unchecked(&alpha);
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |k, _| {
        Complex64::from_polar(1.0, k as f64 * theta)
    }));
    let matrix = &v * d * v.adjoint() / Complex64::new(n as f64, 0.0);
    TransferMap {
        matrix,
        alpha,
        beta,
        condition_estimate: 1.0,
    }
}

/// Dimension of `F(R^n) ∩ R^n` with the singular values it was read from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealIntersection {
    pub dim: usize,
    /// Singular values of `v -> Im(F v)`, descending.
    pub singular_values: Vec<f64>,
    /// Smallest rejected over largest accepted singular value, when both
    /// exist.
    pub gap: Option<f64>,
}

/// Real `v` with `F v` real form the kernel of `Im F`; `F` is invertible, so
/// that kernel has the dimension of `F(R^n) ∩ R^n`. Thresholds are
/// relative to the spectral norm of `F`.
pub fn real_intersection_dim(transfer: &TransferMap) -> RealIntersection {
    let f = &transfer.matrix;
    let n = f.nrows();
    let imag = DMatrix::from_fn(n, n, |i, j| f[(i, j)].im);
    let mut sv: Vec<f64> = imag.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let scale = f.singular_values().max();
    let threshold = RANK_TOL * scale;
    let dim = sv.iter().filter(|s| **s <= threshold).count();
    let gap = if dim > 0 && dim < n {
        let smallest_kept = sv[n - dim - 1];
        let largest_null = sv[n - dim];
        Some(if largest_null == 0.0 {
            f64::INFINITY
        } else {
            smallest_kept / largest_null
        })
    } else {
        None
    };
    RealIntersection {
        dim,
        singular_values: sv,
        gap,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::make_pinwheel;
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_entry(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn vandermonde_examples() {
        let v = vandermonde(&[c(-1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(v, CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]));
        let v = vandermonde(&[c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]).unwrap();
        assert!((v[(1, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((v[(1, 1)] - c(0.0, 1.0)).norm() < 1e-15);
        assert!((v[(1, 2)] - c(-1.0, 0.0)).norm() < 1e-15);
        assert!(matches!(vandermonde(&[c(1.0, 0.0), c(1.0, 0.0)]), Err(Error::RepeatedNodes { i: 0, j: 1 })));
    }

    #[test]
    fn roots_of_unity_vandermonde_is_scaled_unitary() {
        for n in 2..=8 {
            let nodes: Vec<_> = (0..n).map(|j| Complex64::from_polar(1.0, TAU * j as f64 / n as f64)).collect();
            let v = vandermonde(&nodes).unwrap();
            let gram = &v * v.adjoint();
            let target = CMatrix::identity(n, n) * c(n as f64, 0.0);
            assert!(max_entry(&(gram - target)) < 1e-12);
        }
    }

    #[test]
    fn ev_examples() {
        let z = Polynomial::new(vec![c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(ev(&z, &[c(-1.0, 0.0), c(1.0, 0.0)]), vec![c(-1.0, 0.0), c(1.0, 0.0)]);
        let k = Polynomial::constant(c(2.0, -1.0), 3);
        assert!(ev(&k, &[c(0.3, 0.1), c(-4.0, 2.0)]).iter().all(|v| *v == c(2.0, -1.0)));
        let sq = Polynomial::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let roots6: Vec<_> = (0..6).map(|j| Complex64::from_polar(1.0, TAU * j as f64 / 6.0)).collect();
        let vals = ev(&sq, &roots6);
        for j in 0..3 {
            let cube = Complex64::from_polar(1.0, TAU * j as f64 / 3.0);
            assert!((vals[j] - cube).norm() < 1e-14);
            assert!((vals[j + 3] - cube).norm() < 1e-14);
        }
    }

    #[test]
    fn linear_interpolation_example() {
        let (v1, v2) = (c(0.3, -2.0), c(1.5, 0.7));
        let p = interpolate(&[c(-1.0, 0.0), c(1.0, 0.0)], &[v1, v2]).unwrap();
        assert!((p.coeffs()[0] - (v1 + v2) / 2.0).norm() < 1e-15);
        assert!((p.coeffs()[1] - (v2 - v1) / 2.0).norm() < 1e-15);
        let nodes = [c(0.1, 0.2), c(-1.0, 0.5), c(2.0, 0.0), c(0.0, -1.0)];
        let p = interpolate(&nodes, &[c(4.0, 1.0); 4]).unwrap();
        assert!(p.is_constant());
        assert!((p.coeffs()[0] - c(4.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn interpolation_errors() {
        let nodes: Vec<_> = (0..13).map(|j| c(j as f64, 0.0)).collect();
        assert!(matches!(interpolate(&nodes, &nodes), Err(Error::TooManyNodes { .. })));
        // 12 equispaced real nodes on [0, 11] are hopelessly conditioned
        let nodes: Vec<_> = (0..12).map(|j| c(j as f64, 0.0)).collect();
        assert!(matches!(interpolate(&nodes, &nodes), Err(Error::IllConditioned { .. })));
        assert!(matches!(interpolate(&[c(1.0, 0.0), c(1.0, 0.0)], &[c(0.0, 0.0); 2]), Err(Error::RepeatedNodes { .. })));
    }

    #[test]
    fn square_pinwheel_transfer() {
        let f = build_transfer(&make_pinwheel(2, PI / 2.0).unwrap()).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5)]);
        assert!(max_entry(&(&f.matrix - &expected)) < 1e-14);
        let g = build_transfer_pinwheel(2, PI / 2.0);
        assert!(max_entry(&(&g.matrix - &expected)) < 1e-14);
    }

    #[test]
    fn pinwheel_half_turn_and_identity() {
        let f = build_transfer_pinwheel(2, PI);
        let swap = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!(max_entry(&(&f.matrix - swap)) < 1e-15);
        for n in 2..=6 {
            let f = build_transfer_pinwheel(n, 0.0);
            assert!(max_entry(&(&f.matrix - CMatrix::identity(n, n))) < 1e-14);
        }
    }

    #[test]
    fn full_turn_is_cyclic_shift() {
        for n in 2..=7 {
            let f = build_transfer_pinwheel(n, TAU / n as f64);
            let z: Vec<_> = (0..n).map(|j| c(j as f64 + 1.0, -(j as f64))).collect();
            let shifted = f.apply(&z);
            for j in 0..n {
                assert!((shifted[j] - z[(j + 1) % n]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn pinwheel_group_law() {
        for n in 2..=6 {
            let (a, b) = (0.37, 1.91);
            let prod = build_transfer_pinwheel(n, a).matrix * build_transfer_pinwheel(n, b).matrix;
            let sum = build_transfer_pinwheel(n, a + b).matrix;
            assert!(max_entry(&(prod - sum)) < 1e-10);
        }
    }

    #[test]
    fn real_intersection_examples() {
        let f = build_transfer(&make_pinwheel(3, PI / 3.0).unwrap()).unwrap();
        let r = real_intersection_dim(&f);
        assert_eq!(r.dim, 1);
        assert!(r.gap.unwrap() >= 1e4);
        let real = PointConfig::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert_eq!(real_intersection_dim(&build_transfer(&real).unwrap()).dim, 2);
    }

    #[test]
    fn constant_classification() {
        assert!(Polynomial::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).is_constant());
        assert!(Polynomial::new(vec![c(1.0, 0.0), c(1e-9, 0.0)]).is_constant());
        assert!(!Polynomial::new(vec![c(1.0, 0.0), c(1e-5, 0.0)]).is_constant());
        assert!(Polynomial::new(vec![c(0.0, 0.0), c(0.0, 0.0)]).is_constant());
    }
}
