//! Small dense real linear algebra and a Levenberg-Marquardt driver for the
//! few-unknown systems that appear in the solver and the Cassini fit.

/// Solves `a x = b` in place by LU with partial pivoting. `a` is row-major
/// `n x n` and is overwritten; `b` receives the solution. Returns `false`
/// on an exactly singular pivot.
pub fn solve_in_place(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 || !best.is_finite() {
            return false;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / diag;
            if factor != 0.0 {
                for k in col..n {
                    a[row * n + k] -= factor * a[col * n + k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row * n + k] * b[k];
        }
        b[row] = acc / a[row * n + row];
    }
    true
}

/// Forms `J^T J + damping * I` and `-J^T r` for a row-major `m x p` Jacobian.
pub fn normal_equations(jac: &[f64], residual: &[f64], m: usize, p: usize, damping: f64, lhs: &mut [f64], rhs: &mut [f64]) {
    lhs.iter_mut().for_each(|v| *v = 0.0);
    rhs.iter_mut().for_each(|v| *v = 0.0);
    for row in 0..m {
        let jr = &jac[row * p..(row + 1) * p];
        let r = residual[row];
        for i in 0..p {
            rhs[i] -= jr[i] * r;
            for j in i..p {
                lhs[i * p + j] += jr[i] * jr[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            lhs[i * p + j] = lhs[j * p + i];
        }
        lhs[i * p + i] += damping;
    }
}

#[derive(Clone, Debug)]
pub struct LmOutcome {
    pub x: Vec<f64>,
    /// `max_i |r_i|` at `x`.
    pub max_residual: f64,
    pub iterations: usize,
}

/// Levenberg-Marquardt with Nielsen's damping update. `eval` fills the
/// residual (`m`) and the row-major Jacobian (`m x p`) at a point.
pub fn levenberg_marquardt<F>(x0: &[f64], m: usize, mut eval: F, max_iters: usize) -> LmOutcome
where
    F: FnMut(&[f64], &mut [f64], &mut [f64]),
{
    let p = x0.len();
    let mut x = x0.to_vec();
    let mut r = vec![0.0; m];
    let mut jac = vec![0.0; m * p];
    let mut r_new = vec![0.0; m];
    let mut jac_new = vec![0.0; m * p];
    let mut lhs = vec![0.0; p * p];
    let mut step = vec![0.0; p];
    let mut trial = vec![0.0; p];
    eval(&x, &mut r, &mut jac);
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let max_diag = (0..p)
        .map(|i| (0..m).map(|row| jac[row * p + i].powi(2)).sum::<f64>())
        .fold(0.0, f64::max);
    let mut mu = 1e-3 * max_diag.max(1e-12);
    let mut nu = 2.0;
    let mut iterations = 0;
    while iterations < max_iters {
        iterations += 1;
        normal_equations(&jac, &r, m, p, mu, &mut lhs, &mut step);
        let gradient_inf = step.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if gradient_inf < 1e-18 || cost < 1e-32 {
            break;
        }
        let rhs = step.clone();
        if !solve_in_place(&mut lhs, &mut step, p) {
            mu *= nu;
            nu *= 2.0;
            continue;
        }
        for i in 0..p {
            trial[i] = x[i] + step[i];
        }
        eval(&trial, &mut r_new, &mut jac_new);
        let new_cost: f64 = r_new.iter().map(|v| v * v).sum();
        // predicted reduction of |r|^2 for the damped model
        let predicted: f64 = (0..p).map(|i| step[i] * (mu * step[i] + rhs[i])).sum();
        let rho = (cost - new_cost) / predicted.max(f64::MIN_POSITIVE);
        if new_cost.is_finite() && rho > 0.0 {
            std::mem::swap(&mut x, &mut trial);
            std::mem::swap(&mut r, &mut r_new);
            std::mem::swap(&mut jac, &mut jac_new);
            let step_inf = step.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            cost = new_cost;
            mu *= (1.0_f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
            nu = 2.0;
            let x_inf = x.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
            if step_inf < 1e-15 * x_inf {
                break;
            }
        } else {
            mu *= nu;
            nu *= 2.0;
            if !mu.is_finite() || mu > 1e300 {
                break;
            }
        }
    }
    LmOutcome {
        max_residual: r.iter().fold(0.0, |a, v| a.max(v.abs())),
        x,
        iterations,
    }
}
