//! Numerical tolerances shared across the crate.
//!
//! The defaults below are the values every public operation uses unless a
//! caller passes an override through [`Tolerances`].

use serde::{Deserialize, Serialize};

/// Band around the light cone inside which a pair is classified as null.
///
/// Applied to `Δτ - |Δθ|`, scaled by `max(1, |Δτ|, |Δθ|)`. Grid data built
/// from binary64 fractions does not always reproduce `Δτ = |Δθ|` bit-exactly
/// after a shift, so an exact comparison would misclassify null pairs as
/// spacelike.
pub const NULL_CLASSIFICATION: f64 = 1e-12;

/// Tolerance on total mass and on coupling marginals.
pub const MASS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Margin below which transported mass counts as lightlike.
    pub lightlike: f64,
    /// Positive-cycle threshold for chain potentials.
    pub cycle: f64,
    /// Relative strong-duality gap.
    pub duality: f64,
    /// Two-cycle monotonicity slack.
    pub monotonicity: f64,
    /// Dual feasibility / tightness slack used by DKP verification.
    pub dkp: f64,
    /// Relative collinearity threshold when grouping segments into rays.
    pub collinearity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            lightlike: 1e-9,
            cycle: 1e-10,
            duality: 1e-8,
            monotonicity: 1e-9,
            dkp: 1e-8,
            collinearity: 1e-10,
        }
    }
}
