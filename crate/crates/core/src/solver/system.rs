use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::PointConfig;
use crate::curves::JordanCurve;
use crate::error::{Error, Result};
use crate::interp::{build_transfer, TransferMap};
use crate::numerics::{normal_equations, solve_in_place};

/// `G(t, s) = F gamma(t) - gamma(s)` in real coordinates. Unknowns are
/// ordered `t_1..t_n, s_1..s_n`; residual rows are `Re G_j, Im G_j`
/// interleaved.
#[derive(Clone, Debug)]
pub struct ResidualSystem<'a> {
    curve: &'a JordanCurve,
    n: usize,
    /// Row-major copy of `F`.
    f: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub converged: bool,
    /// `max_j |G_j|` at `x`.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonSettings {
    pub max_iters: usize,
    pub step_tol: f64,
}

struct Workspace {
    g: Vec<f64>,
    jac: Vec<f64>,
    g_trial: Vec<f64>,
    lhs: Vec<f64>,
    step: Vec<f64>,
    trial: Vec<f64>,
    values: Vec<Complex64>,
    tangents: Vec<Complex64>,
}

const STAGNATION_RESIDUAL: f64 = 1e-9;
const ROUNDING_RESIDUAL: f64 = 1e-13;
const MAX_STEP: f64 = 1.0;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 30;

impl<'a> ResidualSystem<'a> {
    pub fn new(curve: &'a JordanCurve, transfer: &TransferMap) -> Self {
        let n = transfer.n();
        let f = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| transfer.matrix[(i, j)])
            .collect();
        ResidualSystem { curve, n, f }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Fills `g` (length `2n`) and, if given, the row-major `2n x 2n`
    /// Jacobian.
    pub fn evaluate(&self, x: &[f64], g: &mut [f64], jac: Option<&mut [f64]>) {
        let mut values = vec![Complex64::new(0.0, 0.0); self.n];
        let mut tangents = vec![Complex64::new(0.0, 0.0); self.n];
        self.evaluate_with(x, g, jac, &mut values, &mut tangents);
    }

    fn evaluate_with(
        &self,
        x: &[f64],
        g: &mut [f64],
        jac: Option<&mut [f64]>,
        values: &mut [Complex64],
        tangents: &mut [Complex64],
    ) {
        let n = self.n;
        for k in 0..n {
            let (v, d) = self.curve.eval_with_derivative(x[k]);
            values[k] = v;
            tangents[k] = d;
        }
        let mut jac = jac;
        for j in 0..n {
            let (target, target_d) = self.curve.eval_with_derivative(x[n + j]);
            let row = &self.f[j * n..(j + 1) * n];
            let mut acc = -target;
            for k in 0..n {
                acc += row[k] * values[k];
            }
            g[2 * j] = acc.re;
            g[2 * j + 1] = acc.im;
            if let Some(jac) = jac.as_deref_mut() {
                let m = 2 * n;
                let (re_row, im_row) = jac[2 * j * m..(2 * j + 2) * m].split_at_mut(m);
                for k in 0..n {
                    let d = row[k] * tangents[k];
                    re_row[k] = d.re;
                    im_row[k] = d.im;
                }
                for k in 0..n {
                    re_row[n + k] = 0.0;
                    im_row[n + k] = 0.0;
                }
                re_row[n + j] = -target_d.re;
                im_row[n + j] = -target_d.im;
            }
        }
    }

    fn workspace(&self) -> Workspace {
        let m = 2 * self.n;
        Workspace {
            g: vec![0.0; m],
            jac: vec![0.0; m * m],
            g_trial: vec![0.0; m],
            lhs: vec![0.0; m * m],
            step: vec![0.0; m],
            trial: vec![0.0; m],
            values: vec![Complex64::new(0.0, 0.0); self.n],
            tangents: vec![Complex64::new(0.0, 0.0); self.n],
        }
    }

    /// Levenberg-Marquardt steps with damping `min(|G|^2, 1)` globalized by
    /// an Armijo backtracking search on `|G|^2`. Converged once the full
    /// undamped-length step drops below `step_tol` at a small residual.
    pub fn newton(&self, x0: &[f64], settings: &NewtonSettings) -> NewtonOutcome {
        let m = 2 * self.n;
        let mut ws = self.workspace();
        let mut x = x0.to_vec();
        self.evaluate_with(&x, &mut ws.g, Some(&mut ws.jac), &mut ws.values, &mut ws.tangents);
        let mut phi: f64 = ws.g.iter().map(|v| v * v).sum();
        let mut converged = false;
        let mut iterations = 0;
        while iterations < settings.max_iters {
            let g_inf = inf_norm(&ws.g);
            iterations += 1;
            let damping = phi.min(1.0);
            normal_equations(&ws.jac, &ws.g, m, m, damping, &mut ws.lhs, &mut ws.step);
            let rhs = ws.step.clone();
            if !solve_in_place(&mut ws.lhs, &mut ws.step, m) {
                // only an exactly zero residual and Jacobian get here
                converged = g_inf == 0.0;
                break;
            }
            let step_inf = inf_norm(&ws.step);
            if step_inf < settings.step_tol {
                for i in 0..m {
                    x[i] += ws.step[i];
                }
                self.evaluate_with(&x, &mut ws.g, None, &mut ws.values, &mut ws.tangents);
                converged = g_inf < STAGNATION_RESIDUAL;
                break;
            }
            if step_inf > MAX_STEP {
                let scale = MAX_STEP / step_inf;
                ws.step.iter_mut().for_each(|v| *v *= scale);
            }
            let slope: f64 = rhs.iter().zip(&ws.step).map(|(a, b)| a * b).sum();
            let mut alpha = 1.0;
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                for i in 0..m {
                    ws.trial[i] = x[i] + alpha * ws.step[i];
                }
                self.evaluate_with(&ws.trial, &mut ws.g_trial, None, &mut ws.values, &mut ws.tangents);
                let phi_trial: f64 = ws.g_trial.iter().map(|v| v * v).sum();
                if phi_trial <= phi - 2.0 * ARMIJO * alpha * slope {
                    accepted = Some(phi_trial);
                    break;
                }
                alpha *= 0.5;
            }
            let Some(phi_new) = accepted else {
                // no descent left: accept only if the residual is pure rounding
                converged = g_inf < ROUNDING_RESIDUAL;
                break;
            };
            std::mem::swap(&mut x, &mut ws.trial);
            self.evaluate_with(&x, &mut ws.g, Some(&mut ws.jac), &mut ws.values, &mut ws.tangents);
            phi = phi_new;
        }
        NewtonOutcome {
            residual: inf_norm(&ws.g),
            x,
            converged,
            iterations,
        }
    }

    /// Ratio of extreme singular values of the Jacobian at `x`.
    pub(crate) fn jacobian_conditioning(&self, x: &[f64]) -> f64 {
        let m = 2 * self.n;
        let mut g = vec![0.0; m];
        let mut jac = vec![0.0; m * m];
        self.evaluate(x, &mut g, Some(&mut jac));
        let sv = DMatrix::from_row_slice(m, m, &jac).singular_values();
        let max = sv.max();
        if max == 0.0 {
            0.0
        } else {
            sv.min() / max
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// `G(t, s)` and its analytic `2n x 2n` real Jacobian.
pub fn residual_system(
    curve: &JordanCurve,
    config: &PointConfig,
    t: &[f64],
    s: &[f64],
) -> Result<(Vec<Complex64>, DMatrix<f64>)> {
    let n = config.n();
    if t.len() != n || s.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "need {n} t and {n} s parameters, got {} and {}",
            t.len(),
            s.len()
        )));
    }
    let transfer = build_transfer(config)?;
    let system = ResidualSystem::new(curve, &transfer);
    let x: Vec<f64> = t.iter().chain(s).copied().collect();
    let mut g = vec![0.0; 2 * n];
    let mut jac = vec![0.0; 4 * n * n];
    system.evaluate(&x, &mut g, Some(&mut jac));
    let value = g.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
    Ok((value, DMatrix::from_row_slice(2 * n, 2 * n, &jac)))
}
