//! Input characteristics of one-ports built from identical monotone
//! quasi-polynomial conductors `i = Σ D_p v^{α_p}`.
//!
//! The crate solves such circuits exactly (damped Newton on the nodal or mesh
//! equations), runs the single power-law "α-test" that yields the voltage
//! division ratios `d_k(α)` and the port coefficient `φ(α)`, and compares the
//! exact input current `F(v_in)` with the superposition surrogate
//! `G(v_in) = Σ_p D_p φ(α_p) v_in^{α_p}`.
//!
//! ```
//! use alphaport::{circuit, nodal, superposition, Characteristic};
//!
//! let c = circuit::fig_a1();
//! let f: Characteristic = "1:1,1:3".parse().unwrap();
//! let exact = nodal::solve_dc(&c, &f, 1.0).unwrap();
//! assert!((exact.input_current - 2.7452378).abs() < 1e-6);
//!
//! let report = superposition::report(&c, &f, 1.0).unwrap();
//! assert!(report.eta < 0.005);
//! ```

pub mod alpha;
pub mod characteristic;
pub mod circuit;
pub mod error;
pub mod ladder;
pub mod mesh;
mod newton;
pub mod nodal;
pub mod superposition;

pub use characteristic::{Characteristic, Term};
pub use circuit::{Canonical, Circuit, NodeId};
pub use error::{Error, Result};
pub use newton::{SolverOptions, DEFAULT_MAX_ITERATIONS, MAX_ITERS_ENV};
