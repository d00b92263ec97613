//! A fixed-point laboratory.
//!
//! Two halves share one set of types:
//!
//! * [`solver`] runs Picard iteration `x_{n+1} = T x_n` on any
//!   [`MetricSpace`] and reports the orbit's tail diameters, residual,
//!   boundedness and the shifted contraction inequality
//!   `b_{n+m} <= g(b_n) + eps`.
//! * [`contraction`] and [`gate`] sample-check whether a map is an
//!   asymptotic pointwise contraction: a family `phi_n` dominating
//!   `d(T^n x, T^n y)`, converging uniformly on bounded sets to `phi`, with
//!   `phi(x, y) <= psi(M(x, y))` for a Boyd-Wong gate `psi`.
//!
//! Checks return [`Certificate`]s. Sampled checks can refute a property but
//! never prove it; a pass means no violation was found at the stated
//! resolution.
//!
//! ```
//! use fixpoint_lab::{solver, zoo, RealLine};
//!
//! let entry = zoo::example1();
//! let (report, trace) =
//!     solver::iterate_to_fixed_point(&RealLine, &entry.self_map, &1.0, &Default::default())?;
//! assert!(report.converged());
//! assert!(report.limit.unwrap().abs() < 1e-9);
//! assert_eq!(trace.points[2], 1.0 / 9.0);
//! # Ok::<(), fixpoint_lab::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod cli;
pub mod contraction;
pub mod error;
pub mod expr;
pub mod gate;
pub mod metric;
pub mod report;
pub mod solver;
pub mod zoo;

pub use certificate::{Certificate, Verdict, Witness};
pub use contraction::{max_term, MaxTermValue, PairSample, PhiFamily, SelfMap};
pub use error::{Error, Result};
pub use gate::{Envelope, GateFunction};
pub use metric::{Discrete, Euclidean, FnMetric, Interval, MetricSpace, Point, RealLine, Region};
pub use solver::{ConvergenceReport, OrbitTrace, SolveOptions, SolveVerdict};
pub use zoo::{ClassTag, ZooEntry};

/// Seed used by every sampler unless overridden.
pub const DEFAULT_SEED: u64 = 0x5eed_f1c5;
