//! Discrete optimal transport for Lorentzian costs.
//!
//! The cost between two events is the negative time separation when the
//! second event lies in the causal future of the first, and `+∞` otherwise.
//! Everything here works on finite atomic measures over two flat model
//! spacetimes: Minkowski space of any spatial dimension and the
//! `1+1`-dimensional cylinder `ℝ/Cℤ × ℝ`.
//!
//! The crate is organized bottom-up:
//!
//! * [`spacetime`]: cost, causal classification, time function, geodesics.
//! * [`measures`]: atomic probability measures, grids, pushforwards.
//! * [`solver`]: exact min-cost-flow Kantorovich solver plus a brute-force oracle.
//! * [`dual`]: c-transforms, chain potentials, dual verification.
//! * [`diagnostics`]: lightlike mass, cone margins, duality and monotonicity audits.
//! * [`transport`]: displacement interpolation, restriction, contraction, rays, Monge maps.
//! * [`experiments`]: the line counterexample and the cylinder example.

pub mod config;
pub mod diagnostics;
pub mod dual;
pub mod error;
pub mod experiments;
pub mod measures;
pub mod solver;
pub mod spacetime;
pub mod transport;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use measures::{Atom, DiscreteMeasure};
pub use solver::{Coupling, CouplingEntry, LpDuals, Solution, SolveOptions, TransportProblem};
pub use spacetime::{CausalClass, ExtendedCost, Point, SpacetimeModel};
