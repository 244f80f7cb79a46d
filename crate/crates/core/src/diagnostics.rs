//! Probes of how an optimal coupling sits relative to the light cone, plus
//! duality-gap and two-cycle monotonicity audits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::solver::{Coupling, Solution, TransportProblem};
use crate::spacetime::SpacetimeModel;

pub const DEFAULT_CYCLE_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub lightlike_fraction: f64,
    pub chronological_fraction: f64,
    pub identical_fraction: f64,
    /// `+∞` (JSON `null`) when every entry is a stay-in-place pair.
    pub min_margin: f64,
    pub dual_gap: f64,
    pub monotonicity_violations: usize,
    pub monotonicity_checked: usize,
}

/// Mass fractions `(lightlike, chronological, identical)`.
pub fn class_fractions(model: &SpacetimeModel, coupling: &Coupling, tol: f64) -> (f64, f64, f64) {
    let mut null = 0.0;
    let mut chrono = 0.0;
    let mut same = 0.0;
    for e in coupling.entries() {
        let (x, y) = (coupling.source(e), coupling.target(e));
        if x == y {
            same += e.mass;
        } else if model.cone_margin(x, y) <= tol {
            null += e.mass;
        } else {
            chrono += e.mass;
        }
    }
    let total = null + chrono + same;
    (null / total, chrono / total, same / total)
}

/// Share of mass moved along null segments (`margin <= tol`, `x != y`).
pub fn lightlike_fraction(model: &SpacetimeModel, coupling: &Coupling, tol: f64) -> f64 {
    class_fractions(model, coupling, tol).0
}

/// Smallest cone margin over support entries that actually move.
pub fn strict_margin(model: &SpacetimeModel, coupling: &Coupling) -> f64 {
    coupling
        .entries()
        .iter()
        .filter(|e| coupling.source(e) != coupling.target(e))
        .map(|e| model.cone_margin(coupling.source(e), coupling.target(e)))
        .fold(f64::INFINITY, f64::min)
}

/// Counts support pairs `(x1, y1), (x2, y2)` with
/// `c(x1, y1) + c(x2, y2) > c(x1, y2) + c(x2, y1) + tol`; an infinite
/// right-hand side never counts. All pairs are checked when there are at
/// most `samples` of them, otherwise `samples` random pairs drawn from
/// `seed`. Returns `(violations, checked)`.
pub fn two_cycle_violations(
    model: &SpacetimeModel,
    coupling: &Coupling,
    samples: usize,
    tol: f64,
    seed: u64,
) -> (usize, usize) {
    let entries = coupling.entries();
    let costs = coupling.entry_costs();
    let k = entries.len();
    let violates = |a: usize, b: usize| {
        let (e1, e2) = (&entries[a], &entries[b]);
        let swapped = model.cost(coupling.source(e1), coupling.target(e2)).finite().and_then(|c12| {
            model.cost(coupling.source(e2), coupling.target(e1)).finite().map(|c21| c12 + c21)
        });
        swapped.is_some_and(|s| costs[a] + costs[b] > s + tol)
    };
    let pairs = k * k.saturating_sub(1) / 2;
    if pairs <= samples {
        let mut bad = 0;
        for a in 0..k {
            for b in a + 1..k {
                bad += usize::from(violates(a, b));
            }
        }
        return (bad, pairs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..samples {
        let a = rng.gen_range(0..k);
        let mut b = rng.gen_range(0..k - 1);
        if b >= a {
            b += 1;
        }
        bad += usize::from(violates(a, b));
    }
    (bad, samples)
}

pub fn audit(problem: &TransportProblem, solution: &Solution, tolerances: &Tolerances, seed: u64) -> DiagnosticsReport {
    let model = &problem.model;
    let coupling = &solution.coupling;
    let (lightlike, chrono, same) = class_fractions(model, coupling, tolerances.lightlike);
    let (violations, checked) =
        two_cycle_violations(model, coupling, DEFAULT_CYCLE_SAMPLES, tolerances.monotonicity, seed);
    DiagnosticsReport {
        lightlike_fraction: lightlike,
        chronological_fraction: chrono,
        identical_fraction: same,
        min_margin: strict_margin(model, coupling),
        dual_gap: solution.dual_gap(),
        monotonicity_violations: violations,
        monotonicity_checked: checked,
    }
}
