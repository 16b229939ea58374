//! Polynomial inscriptions of point configurations into smooth Jordan
//! curves.
//!
//! A polynomial `p` of degree `< n` inscribes a configuration
//! `Q = {alpha_1..alpha_n, beta_1..beta_n}` into a curve `gamma` when every
//! `p(q)` lies on `gamma`. Writing `p(alpha_j) = gamma(t_j)` and
//! `p(beta_j) = gamma(s_j)` turns this into the square real system
//! `F gamma(t) = gamma(s)` on the 2n-torus, where `F` is the Vandermonde
//! transfer map from the alpha nodes to the beta nodes.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod curves;
pub mod error;
pub mod interp;
pub mod io;
pub mod numerics;
pub mod sampling;
pub mod solver;
pub mod symplectic;
pub mod verify;

pub use config::PointConfig;
pub use curves::{CurveValidationReport, JordanCurve};
pub use error::{Error, Result};
pub use interp::{Polynomial, TransferMap};
pub use solver::{find_inscriptions, Inscription, SolveOptions, SolveReport};
