//! Certify, falsify, and exploit monotonicity of input/output ODE systems
//! over orthant orders.
//!
//! A system `dx/dt = f(x, u)`, `y = h(x)` is *monotone* when ordered initial
//! states driven by ordered inputs produce ordered trajectories. This crate
//! works with the orders induced by orthant cones (componentwise comparison
//! after per-coordinate sign flips) and provides sampling certificates for:
//!
//! - the Jacobian sign-pattern and Kamke boundary conditions ([`certify`]),
//! - competitive (backward-time monotone) dynamics and incremental
//!   positivity of linearizations ([`certify`]),
//! - static input/state and input/output characteristics with evidence of
//!   global asymptotic stability, asymptotic sandwich bounds, and monotone
//!   reachability envelopes ([`characteristic`]),
//! - series (cascade) composition and small-gain certification of SISO
//!   negative feedback loops ([`interconnect`]),
//! - forward invariance of polytopes via Bouligand tangent cones
//!   ([`invariance`]).
//!
//! Certificates are *sampled* instantiations of universally quantified
//! conditions; falsifications are genuine counterexamples that re-verify.
//!
//! # Examples
//!
//! One runnable example per capability:
//!
//! ```bash
//! cargo run --release --example orthant_orders             # orders and tangent cones
//! cargo run --release --example parse_model_file           # model format and expressions
//! cargo run --release --example simulate_trajectories      # integration and CSV output
//! cargo run --release --example certify_monotonicity       # three certification routes
//! cargo run --release --example competitive_and_conjugation
//! cargo run --release --example characteristic_sweep       # equilibria, GAS, sandwich
//! cargo run --release --example cascade_composition        # series interconnection
//! cargo run --release --example small_gain_loop            # feedback + gain iteration
//! cargo run --release --example invariance_triangle        # polytope invariance
//! ```
//!
//! The `monocert` binary exposes the same operations as subcommands
//! (`certify`, `simulate`, `characteristic`, `cascade`, `smallgain`,
//! `invariance`, `demo`); see the README for the file formats.

pub mod builtins;
pub mod certify;
pub mod characteristic;
pub mod cli;
pub mod error;
pub mod expr;
pub mod integrate;
pub mod interconnect;
pub mod invariance;
mod linalg;
pub mod model;
pub mod order;
pub mod polytope;
pub mod signal;

pub use error::{Error, Result};
pub use integrate::IntegrateOpts;
pub use model::{SystemModel, Trajectory};
pub use order::{ConeTangent, OrderInterval, OrthantOrder};
pub use polytope::Polytope;
pub use signal::InputSignal;
