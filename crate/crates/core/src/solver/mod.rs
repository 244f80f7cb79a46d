//! Exact Kantorovich solver for atomic marginals under the Lorentzian cost.
//!
//! Pairs that are not causally related carry cost `+∞` and are simply left
//! out of the network, so a feasible coupling is automatically causal.

mod flow;
mod oracle;
pub(crate) mod units;

use serde::{Deserialize, Serialize};

use crate::config;
use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::spacetime::{Point, SpacetimeModel};

pub use oracle::{brute_force_oracle, ORACLE_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    #[default]
    Lexicographic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    pub tolerance: f64,
    pub tie_break: TieBreak,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tolerance: 1e-9, tie_break: TieBreak::Lexicographic }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportProblem {
    pub model: SpacetimeModel,
    pub mu: DiscreteMeasure,
    pub nu: DiscreteMeasure,
    #[serde(default)]
    pub options: SolveOptions,
}

impl TransportProblem {
    pub fn new(model: SpacetimeModel, mu: DiscreteMeasure, nu: DiscreteMeasure) -> Result<Self> {
        let p = Self { model, mu, nu, options: SolveOptions::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.mu.check_model(&self.model)?;
        self.nu.check_model(&self.model)
    }

    /// Dense cost matrix, `None` for non-causal pairs.
    pub fn cost_matrix(&self) -> Vec<Vec<Option<f64>>> {
        cost_matrix(&self.model, &self.mu, &self.nu)
    }
}

pub(crate) fn cost_matrix(model: &SpacetimeModel, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Vec<Vec<Option<f64>>> {
    mu.atoms()
        .iter()
        .map(|a| nu.atoms().iter().map(|b| model.cost(&a.point, &b.point).finite()).collect())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingEntry {
    pub i: usize,
    pub j: usize,
    pub mass: f64,
}

/// A transport plan between two atomic measures.
///
/// Entries are sorted by `(i, j)`, carry positive mass and finite cost, and
/// their row and column sums match the marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    entries: Vec<CouplingEntry>,
    costs: Vec<f64>,
    total_cost: f64,
}

impl Coupling {
    pub fn new(
        model: &SpacetimeModel,
        mu: DiscreteMeasure,
        nu: DiscreteMeasure,
        mut entries: Vec<CouplingEntry>,
    ) -> Result<Self> {
        entries.sort_by(|a, b| (a.i, a.j).cmp(&(b.i, b.j)));
        let mut merged: Vec<CouplingEntry> = Vec::with_capacity(entries.len());
        for e in entries {
            if e.i >= mu.len() || e.j >= nu.len() {
                return Err(Error::InvalidCoupling(format!("entry ({}, {}) out of range", e.i, e.j)));
            }
            if !(e.mass > 0.0 && e.mass.is_finite()) {
                return Err(Error::InvalidCoupling(format!("entry ({}, {}) has mass {}", e.i, e.j, e.mass)));
            }
            match merged.last_mut() {
                Some(last) if (last.i, last.j) == (e.i, e.j) => last.mass += e.mass,
                _ => merged.push(e),
            }
        }
        let mut rows = vec![0.0; mu.len()];
        let mut cols = vec![0.0; nu.len()];
        let mut costs = Vec::with_capacity(merged.len());
        for e in &merged {
            let c = model
                .cost(mu.point(e.i), nu.point(e.j))
                .finite()
                .ok_or_else(|| Error::InvalidCoupling(format!("entry ({}, {}) is not causal", e.i, e.j)))?;
            costs.push(c);
            rows[e.i] += e.mass;
            cols[e.j] += e.mass;
        }
        for (i, r) in rows.iter().enumerate() {
            if (r - mu.weight(i)).abs() > config::MASS {
                return Err(Error::InvalidCoupling(format!("row {i} sums to {r}, expected {}", mu.weight(i))));
            }
        }
        for (j, c) in cols.iter().enumerate() {
            if (c - nu.weight(j)).abs() > config::MASS {
                return Err(Error::InvalidCoupling(format!("column {j} sums to {c}, expected {}", nu.weight(j))));
            }
        }
        let total_cost = merged.iter().zip(&costs).map(|(e, c)| e.mass * c).sum();
        Ok(Self { mu, nu, entries: merged, costs, total_cost })
    }

    pub fn mu(&self) -> &DiscreteMeasure {
        &self.mu
    }

    pub fn nu(&self) -> &DiscreteMeasure {
        &self.nu
    }

    pub fn entries(&self) -> &[CouplingEntry] {
        &self.entries
    }

    /// Cost of each entry, aligned with [`Coupling::entries`].
    pub fn entry_costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn total_cost(&self) -> f64 {
        self.total_cost
    }

    pub fn source(&self, e: &CouplingEntry) -> &Point {
        self.mu.point(e.i)
    }

    pub fn target(&self, e: &CouplingEntry) -> &Point {
        self.nu.point(e.j)
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.entries.binary_search_by(|e| (e.i, e.j).cmp(&(i, j))).is_ok()
    }

    /// CSV rows `i,j,mass,cost` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,mass,cost\n");
        for (e, c) in self.entries.iter().zip(&self.costs) {
            out.push_str(&format!("{},{},{},{}\n", e.i, e.j, csv_float(e.mass), csv_float(*c)));
        }
        out
    }
}

/// Decimal with 17 significant digits, enough to round-trip binary64.
pub fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// LP duals: `u` on μ-atoms, `v` on ν-atoms, with `v[j] - u[i] <= c(i, j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpDuals {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub coupling: Coupling,
    pub duals: LpDuals,
}

impl Solution {
    pub fn primal(&self) -> f64 {
        self.coupling.total_cost()
    }

    /// `Σ ν_j v_j - Σ μ_i u_i`.
    pub fn dual_objective(&self) -> f64 {
        let nu: f64 = self.coupling.nu().weights().iter().zip(&self.duals.v).map(|(w, v)| w * v).sum();
        let mu: f64 = self.coupling.mu().weights().iter().zip(&self.duals.u).map(|(w, u)| w * u).sum();
        nu - mu
    }

    pub fn dual_gap(&self) -> f64 {
        (self.primal() - self.dual_objective()).abs()
    }

    pub fn n_arcs(&self) -> usize {
        self.coupling.entries().len()
    }
}

/// Minimizes `Σ mass · cost` over couplings supported on causal pairs.
///
/// Weights are rescaled to integers with a common denominator so that the
/// marginals are met exactly; among equal-cost augmenting paths the search
/// prefers lower `(i, j)` indices, which makes the output deterministic.
pub fn solve(p: &TransportProblem) -> Result<Solution> {
    p.validate()?;
    let cost = p.cost_matrix();
    // Cheap feasibility screen before the flow: every atom needs a partner.
    let n = p.mu.len();
    let m = p.nu.len();
    if (0..n).any(|i| cost[i].iter().all(Option::is_none)) || (0..m).any(|j| (0..n).all(|i| cost[i][j].is_none())) {
        return Err(Error::Infeasible);
    }
    let units = units::integer_units(&p.mu.weights(), &p.nu.weights());
    let result = flow::min_cost_flow(&cost, &units.supply, &units.demand)?;
    let entries = result
        .flow
        .iter()
        .map(|&(i, j, f)| CouplingEntry { i, j, mass: units.mass(f) })
        .collect();
    let coupling = Coupling::new(&p.model, p.mu.clone(), p.nu.clone(), entries)?;
    Ok(Solution { coupling, duals: LpDuals { u: result.u, v: result.v } })
}
