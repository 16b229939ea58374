//! Polynomial inscriptions by Newton multistart on
//! `F_alpha^beta gamma(t) = gamma(s)` over the 2n-torus.

mod cassini;
mod projection;
mod starts;
mod system;
mod trial;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PointConfig;
use crate::curves::JordanCurve;
use crate::error::{Error, Result};
use crate::interp::{build_transfer, vandermonde_inverse, Polynomial, CONSTANT_TOL};

pub use cassini::{fit_cassini, CassiniFit};
pub use projection::{distance_to_curve, CurveProjector};
pub use starts::TorusStarts;
pub use system::{residual_system, NewtonOutcome, NewtonSettings, ResidualSystem};
pub use trial::{planted_instance, theorem_trial, PlantedInstance, TrialKind, TrialRecord};

/// Largest configuration half-size the solver accepts.
pub const MAX_SOLVER_N: usize = 8;
/// Re-verification bound on `max_j dist(p(q_j), curve)`.
pub const ACCEPT_TOL: f64 = 1e-8;
/// Coefficient distance under which two solutions are merged.
pub const DEDUP_TOL: f64 = 1e-6;
pub const STEP_TOL: f64 = 1e-12;
pub const MAX_ITERS: usize = 50;
/// Solutions whose Jacobian has `sigma_min / sigma_max` below this are
/// flagged degenerate.
pub const DEGENERATE_RATIO: f64 = 1e-8;
pub const STARTS_PER_POINT: usize = 2000;
const START_SAMPLES: usize = 512;
/// Degenerate solutions whose image points span less than this fraction
/// of the curve extent are numerically constant: off a non-clean diagonal
/// the residual decays like the fourth power of the spread and reaches
/// rounding level long before the coefficients look constant.
pub const NEAR_CONSTANT_SPREAD: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedDimension {
    pub dim: i64,
    /// Fewer points than coefficients: every choice of `t` is realized and
    /// the moduli space is a full `(d+1)`-torus.
    pub full_torus: bool,
}

/// `2(d+1) - k` for `k >= d+1` points, else `d+1` flagged as a full torus.
pub fn expected_dimension(d: usize, k: usize) -> ExpectedDimension {
    if k < d + 1 {
        ExpectedDimension {
            dim: d as i64 + 1,
            full_torus: true,
        }
    } else {
        ExpectedDimension {
            dim: 2 * (d as i64 + 1) - k as i64,
            full_torus: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Defaults to `2000 n`.
    pub n_starts: Option<usize>,
    pub seed: u64,
    pub max_iters: usize,
    pub step_tol: f64,
    pub accept_tol: f64,
    pub dedup_tol: f64,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub threads: Option<usize>,
    /// Wall-clock budget; unfinished starts are skipped and the report is
    /// marked truncated.
    #[serde(skip)]
    pub time_limit: Option<Duration>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            n_starts: None,
            seed: 0,
            max_iters: MAX_ITERS,
            step_tol: STEP_TOL,
            accept_tol: ACCEPT_TOL,
            dedup_tol: DEDUP_TOL,
            threads: None,
            time_limit: None,
        }
    }
}

impl SolveOptions {
    pub fn with_starts(n_starts: usize, seed: u64) -> Self {
        SolveOptions {
            n_starts: Some(n_starts),
            seed,
            ..Default::default()
        }
    }

    pub fn starts_for(&self, n: usize) -> usize {
        self.n_starts.unwrap_or(STARTS_PER_POINT * n)
    }

    fn check(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.step_tol) || !positive(self.accept_tol) || !positive(self.dedup_tol) {
            return Err(Error::InvalidOption("tolerances must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidOption("max_iters must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidOption("threads must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Inscription {
    pub poly: Polynomial,
    pub t_params: Vec<f64>,
    pub s_params: Vec<f64>,
    /// `max` over the 2n points of the distance from `p(q)` to the curve.
    pub residual: f64,
    pub constant: bool,
    /// Near-singular Jacobian at the solution: a tangency or a
    /// non-isolated solution.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub inscriptions: Vec<Inscription>,
    pub n_starts: usize,
    pub n_converged: usize,
    pub n_constant_discarded: usize,
    /// Distinct nonconstant candidates that failed re-verification.
    pub n_rejected: usize,
    pub truncated: bool,
    #[serde(with = "duration_secs")]
    pub wall_time: Duration,
}

impl SolveReport {
    /// Equality ignoring `wall_time`.
    pub fn same_result(&self, other: &SolveReport) -> bool {
        SolveReport {
            wall_time: Duration::ZERO,
            ..self.clone()
        } == SolveReport {
            wall_time: Duration::ZERO,
            ..other.clone()
        }
    }

    pub fn best_residual(&self) -> Option<f64> {
        self.inscriptions.iter().map(|i| i.residual).reduce(f64::min)
    }
}

mod duration_secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let secs = f64::deserialize(d)?;
        Duration::try_from_secs_f64(secs).map_err(serde::de::Error::custom)
    }
}

struct Candidate {
    poly: Polynomial,
    x: Vec<f64>,
    newton_residual: f64,
}

enum StartResult {
    Skipped,
    Failed,
    Constant,
    Found(Candidate),
}

fn lexicographic(a: &Polynomial, b: &Polynomial) -> Ordering {
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(x, y)| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// All degree `< n` polynomials `p` with `p(alpha_j), p(beta_j)` on the
/// curve that Newton multistart reaches, constants excluded.
pub fn find_inscriptions(curve: &JordanCurve, config: &PointConfig, opts: &SolveOptions) -> Result<SolveReport> {
    opts.check()?;
    let n = config.n();
    if n > MAX_SOLVER_N {
        return Err(Error::TooManyNodes {
            count: n,
            max: MAX_SOLVER_N,
        });
    }
    curve.ensure_valid()?;
    let started = Instant::now();
    let deadline = opts.time_limit.map(|d| started + d);
    let transfer = build_transfer(config)?;
    let vinv = vandermonde_inverse(config.alpha())?;
    let system = ResidualSystem::new(curve, &transfer);
    let starts = TorusStarts::new(n, opts.seed);
    let coarse = CurveProjector::with_samples(curve, START_SAMPLES);
    let settings = NewtonSettings {
        max_iters: opts.max_iters,
        step_tol: opts.step_tol,
    };
    let n_starts = opts.starts_for(n);

    let run = |i: usize| -> StartResult {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return StartResult::Skipped;
        }
        // t from the sequence, s from the nearest points to F gamma(t)
        let mut x = starts.point(i);
        let values: Vec<Complex64> = x.iter().map(|t| curve.eval(*t)).collect();
        let images = transfer.apply(&values);
        x.extend(images.iter().map(|z| coarse.nearest_sample(*z)));
        let out = system.newton(&x, &settings);
        if !out.converged {
            return StartResult::Failed;
        }
        let x: Vec<f64> = out.x.iter().map(|v| v.rem_euclid(TAU)).collect();
        let values: Vec<Complex64> = x[..n].iter().map(|t| curve.eval(*t)).collect();
        let coeffs = (0..n)
            .map(|i| (0..n).map(|j| vinv[(i, j)] * values[j]).sum())
            .collect();
        let poly = Polynomial::new(coeffs);
        if poly.is_constant_with(CONSTANT_TOL) {
            StartResult::Constant
        } else {
            StartResult::Found(Candidate {
                poly,
                x,
                newton_residual: out.residual,
            })
        }
    };
    let results: Vec<StartResult> = match opts.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidOption(format!("thread pool: {e}")))?
            .install(|| (0..n_starts).into_par_iter().map(run).collect()),
        None => (0..n_starts).into_par_iter().map(run).collect(),
    };

    let mut truncated = false;
    let mut n_converged = 0;
    let mut n_constant_discarded = 0;
    let mut unique: Vec<Candidate> = Vec::new();
    // constant coefficients bucketed at dedup_tol; a match lies in a neighbouring cell
    let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let cell = |p: &Polynomial| {
        let c0 = p.coeffs()[0];
        ((c0.re / opts.dedup_tol).floor() as i64, (c0.im / opts.dedup_tol).floor() as i64)
    };
    for result in results {
        match result {
            StartResult::Skipped => truncated = true,
            StartResult::Failed => {}
            StartResult::Constant => {
                n_converged += 1;
                n_constant_discarded += 1;
            }
            StartResult::Found(c) => {
                n_converged += 1;
                let (cx, cy) = cell(&c.poly);
                let first = (cx - 1..=cx + 1)
                    .flat_map(|x| (cy - 1..=cy + 1).map(move |y| (x, y)))
                    .filter_map(|key| cells.get(&key))
                    .flatten()
                    .copied()
                    .filter(|&k| unique[k].poly.distance(&c.poly) < opts.dedup_tol)
                    .min();
                match first {
                    Some(k) if c.newton_residual < unique[k].newton_residual => {
                        let old = cell(&unique[k].poly);
                        if old != (cx, cy) {
                            if let Some(bucket) = cells.get_mut(&old) {
                                bucket.retain(|&j| j != k);
                            }
                            cells.entry((cx, cy)).or_default().push(k);
                        }
                        unique[k] = c;
                    }
                    Some(_) => {}
                    None => {
                        cells.entry((cx, cy)).or_default().push(unique.len());
                        unique.push(c);
                    }
                }
            }
        }
    }

    let projector = CurveProjector::new(curve);
    let extent = projector.extent();
    let points = config.points();
    let mut n_rejected = 0;
    let mut inscriptions = Vec::new();
    for c in unique {
        let residual = points
            .iter()
            .map(|q| projector.distance(c.poly.eval(*q)))
            .fold(0.0, f64::max);
        if !(residual < opts.accept_tol) {
            n_rejected += 1;
            continue;
        }
        let degenerate = system.jacobian_conditioning(&c.x) < DEGENERATE_RATIO;
        let first = c.poly.eval(points[0]);
        let spread = points
            .iter()
            .map(|q| (c.poly.eval(*q) - first).norm())
            .fold(0.0, f64::max);
        if degenerate && spread < NEAR_CONSTANT_SPREAD * extent {
            n_constant_discarded += 1;
            continue;
        }
        inscriptions.push(Inscription {
            constant: false,
            t_params: c.x[..n].to_vec(),
            s_params: c.x[n..].to_vec(),
            poly: c.poly,
            residual,
            degenerate,
        });
    }
    inscriptions.sort_by(|a, b| lexicographic(&a.poly, &b.poly));
    if truncated {
        log::warn!("solve hit its time limit; report is truncated");
    }
    Ok(SolveReport {
        inscriptions,
        n_starts,
        n_converged,
        n_constant_discarded,
        n_rejected,
        truncated,
        wall_time: started.elapsed(),
    })
}
