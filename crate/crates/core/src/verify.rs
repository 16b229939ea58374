//! Seeded invariant suites behind `inscribe verify` and `/api/verify`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{check_interleaved_on_circle, make_pinwheel, PointConfig};
use crate::curves::JordanCurve;
use crate::error::Error;
use crate::interp::{build_transfer, build_transfer_pinwheel, real_intersection_dim, CMatrix};
use crate::sampling::{random_config, random_curve, random_interleaved_config, scrambled_circle_config};
use crate::symplectic::{cross_ratio_oracle, diagonal_forms, form_ratios, maslov_index_diagonal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Forms,
    Clean,
    Maslov,
    Pinwheel,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "forms" => Ok(Suite::Forms),
            "clean" => Ok(Suite::Clean),
            "maslov" => Ok(Suite::Maslov),
            "pinwheel" => Ok(Suite::Pinwheel),
            "all" => Ok(Suite::All),
            other => Err(Error::InvalidOption(format!(
                "unknown suite {other:?} (expected forms, clean, maslov, pinwheel or all)"
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Forms => "forms",
            Suite::Clean => "clean",
            Suite::Maslov => "maslov",
            Suite::Pinwheel => "pinwheel",
            Suite::All => "all",
        };
        f.write_str(name)
    }
}

/// One line of the pass/fail table. `worst` is the extreme observed value
/// of the checked quantity and `bound` the limit it is held to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub suite: Suite,
    pub check: String,
    pub trials: usize,
    pub passed: usize,
    pub worst: f64,
    pub bound: f64,
    pub pass: bool,
}

/// A unit-circle configuration violating interleaving whose normalized
/// form has a non-positive coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub config: PointConfig,
    pub index: usize,
    pub value: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub n_trials: usize,
    pub rows: Vec<CheckRow>,
    pub counterexamples: Vec<Counterexample>,
    pub pass: bool,
}

struct Tally {
    suite: Suite,
    check: &'static str,
    trials: usize,
    passed: usize,
    worst: f64,
    bound: f64,
    below: bool,
}

impl Tally {
    /// Rows whose values must stay below `bound`.
    fn below(suite: Suite, check: &'static str, bound: f64) -> Self {
        Tally {
            suite,
            check,
            trials: 0,
            passed: 0,
            worst: 0.0,
            bound,
            below: true,
        }
    }

    /// Rows whose values must stay above `bound`.
    fn above(suite: Suite, check: &'static str, bound: f64) -> Self {
        Tally {
            worst: f64::INFINITY,
            below: false,
            ..Tally::below(suite, check, bound)
        }
    }

    fn record(&mut self, value: f64) {
        self.trials += 1;
        let ok = if self.below { value < self.bound } else { value > self.bound };
        if ok {
            self.passed += 1;
        }
        self.worst = if value.is_nan() {
            f64::NAN
        } else if self.below {
            self.worst.max(value)
        } else {
            self.worst.min(value)
        };
    }

    fn fail(&mut self) {
        self.record(f64::NAN);
    }

    fn row(self) -> CheckRow {
        CheckRow {
            suite: self.suite,
            check: self.check.to_string(),
            trials: self.trials,
            passed: self.passed,
            worst: self.worst,
            bound: self.bound,
            pass: self.trials > 0 && self.passed == self.trials,
        }
    }
}

fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn forms_suite(rng: &mut ChaCha8Rng, n_trials: usize, out: &mut VerifyReport) {
    let s = Suite::Forms;
    let mut nullspace = Tally::below(s, "nullspace residual", 1e-10);
    let mut positive = Tally::below(s, "positivity (max |imag| of normalized coefficients)", 1e-9);
    let mut oracle = Tally::below(s, "cross-ratio oracle agreement (relative)", 1e-8);
    let mut pullback = Tally::below(s, "pullback identity defect", 1e-8);
    for trial in 0..n_trials {
        let n = 2 + trial % 5;
        let Ok(config) = random_interleaved_config(rng, n) else {
            nullspace.fail();
            continue;
        };
        match diagonal_forms(&config) {
            Ok(forms) => {
                nullspace.record(forms.nullspace_residual);
                let imag = forms
                    .lambda_raw
                    .iter()
                    .chain(&forms.mu_raw)
                    .map(|z| (z / Complex64::new(0.0, 1.0)).im.abs())
                    .fold(0.0, f64::max);
                positive.record(imag);
                pullback.record(forms.pullback_defect);
                match cross_ratio_oracle(&config) {
                    Ok((lam, mu)) => {
                        let worst = lam
                            .iter()
                            .zip(&forms.lambda_pos)
                            .chain(mu.iter().zip(&forms.mu_pos))
                            .map(|(o, p)| rel_diff(p / 2.0, *o))
                            .fold(0.0, f64::max);
                        oracle.record(worst);
                    }
                    Err(_) => oracle.fail(),
                }
            }
            Err(e) => {
                log::warn!("forms failed on interleaved config: {e}");
                nullspace.fail();
                positive.fail();
            }
        }
    }
    // the interleaving hypothesis is necessary: collect sign flips off it
    for _ in 0..n_trials {
        let n = 2 + rng.random_range(0..4);
        let Ok(config) = scrambled_circle_config(rng, n) else { continue };
        if check_interleaved_on_circle(&config).unwrap_or(true) {
            continue;
        }
        if let Ok(ratios) = form_ratios(&config) {
            if let Some((index, value)) = ratios.first_non_positive() {
                out.counterexamples.push(Counterexample { config, index, value });
            }
        }
    }
    out.rows.extend([nullspace.row(), positive.row(), oracle.row(), pullback.row()]);
}

fn clean_suite(rng: &mut ChaCha8Rng, n_trials: usize, out: &mut VerifyReport) {
    let s = Suite::Clean;
    let mut ones = Tally::below(s, "F 1 = 1", 1e-9);
    let mut dim = Tally::below(s, "real intersection dimension - 1", 0.5);
    let mut gap = Tally::above(s, "real intersection singular-value gap", 1e4);
    for trial in 0..n_trials {
        let n = 2 + trial % 5;
        match random_config(rng, n).and_then(|c| build_transfer(&c)) {
            Ok(f) => {
                let image = f.apply(&vec![Complex64::new(1.0, 0.0); n]);
                ones.record(image.iter().map(|z| (z - 1.0).norm()).fold(0.0, f64::max));
            }
            Err(_) => ones.fail(),
        }
        match random_interleaved_config(rng, n).and_then(|c| build_transfer(&c)) {
            Ok(f) => {
                let ri = real_intersection_dim(&f);
                dim.record((ri.dim as f64 - 1.0).abs());
                gap.record(ri.gap.unwrap_or(0.0));
            }
            Err(_) => {
                dim.fail();
                gap.fail();
            }
        }
    }
    out.rows.extend([ones.row(), dim.row(), gap.row()]);
}

fn maslov_suite(rng: &mut ChaCha8Rng, n_trials: usize, out: &mut VerifyReport) {
    let s = Suite::Maslov;
    let named = [
        ("maslov index - 2n (circle)", JordanCurve::unit_circle()),
        (
            "maslov index - 2n (ellipse)",
            JordanCurve::from_coeffs([(1, Complex64::new(1.0, 0.0)), (-1, Complex64::new(0.25, 0.0))]),
        ),
    ];
    for (check, curve) in named {
        let mut t = Tally::below(s, check, 0.5);
        for n in 1..=5 {
            match maslov_index_diagonal(&curve, n) {
                Ok(m) => t.record((m - 2 * n as i64).abs() as f64),
                Err(_) => t.fail(),
            }
        }
        out.rows.push(t.row());
    }
    let mut t = Tally::below(s, "maslov index - 2n (random curves)", 0.5);
    for trial in 0..n_trials {
        let n = 1 + trial % 5;
        match random_curve(rng).and_then(|c| maslov_index_diagonal(&c, n)) {
            Ok(m) => t.record((m - 2 * n as i64).abs() as f64),
            Err(_) => t.fail(),
        }
    }
    out.rows.push(t.row());
}

fn pinwheel_suite(rng: &mut ChaCha8Rng, n_trials: usize, out: &mut VerifyReport) {
    let s = Suite::Pinwheel;
    let mut shift = Tally::below(s, "F_{2pi/n} is the cyclic shift", 1e-10);
    for n in 2..=7 {
        let f = build_transfer_pinwheel(n, TAU / n as f64).matrix;
        let p = CMatrix::from_fn(n, n, |i, j| {
            Complex64::new(if j == (i + 1) % n { 1.0 } else { 0.0 }, 0.0)
        });
        shift.record(max_abs_diff(&f, &p));
    }
    let mut dft = Tally::below(s, "DFT conjugation matches interpolation", 1e-9);
    let mut group = Tally::below(s, "F_a F_b = F_{a+b}", 1e-10);
    for trial in 0..n_trials {
        let n = 2 + trial % 7;
        let width = TAU / n as f64;
        let theta = width * rng.random_range(0.01..0.99);
        match make_pinwheel(n, theta).and_then(|c| build_transfer(&c)) {
            Ok(f) => dft.record(max_abs_diff(&f.matrix, &build_transfer_pinwheel(n, theta).matrix)),
            Err(_) => dft.fail(),
        }
        let (a, b) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        let lhs = build_transfer_pinwheel(n, a).matrix * build_transfer_pinwheel(n, b).matrix;
        group.record(max_abs_diff(&lhs, &build_transfer_pinwheel(n, a + b).matrix));
    }
    out.rows.extend([shift.row(), dft.row(), group.row()]);
}

/// Runs `suite` with `n_trials` random instances per check from `seed`.
pub fn run_suite(suite: Suite, n_trials: usize, seed: u64) -> VerifyReport {
    let mut out = VerifyReport {
        seed,
        n_trials,
        rows: Vec::new(),
        counterexamples: Vec::new(),
        pass: false,
    };
    let suites: &[Suite] = match suite {
        Suite::All => &[Suite::Forms, Suite::Clean, Suite::Maslov, Suite::Pinwheel],
        _ => std::slice::from_ref(&suite),
    };
    for s in suites {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match s {
            Suite::Forms => forms_suite(&mut rng, n_trials, &mut out),
            Suite::Clean => clean_suite(&mut rng, n_trials, &mut out),
            Suite::Maslov => maslov_suite(&mut rng, n_trials, &mut out),
            Suite::Pinwheel => pinwheel_suite(&mut rng, n_trials, &mut out),
            Suite::All => unreachable!(),
        }
    }
    out.pass = out.rows.iter().all(|r| r.pass);
    out
}
