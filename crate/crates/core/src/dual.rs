//! Dual potentials: c-transforms, the chain construction of a c-convex
//! potential from an optimal coupling, and verification of the dual
//! Kantorovich problem on the discrete supports.
//!
//! Sign conventions: `ψ` lives on μ-atoms, `φ = ψ^c` on ν-atoms, with
//! `φ(y) = inf_x ψ(x) + c(x, y)`. A pair `(ψ, φ)` solves the dual problem
//! when `φ(y) - ψ(x) <= c(x, y)` everywhere with equality on the support.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;
use crate::solver::{csv_float, Coupling, LpDuals};
use crate::spacetime::SpacetimeModel;

/// Relaxations smaller than this are ignored, so zero-weight cycles that
/// round to a hair above zero cannot keep the longest-path loop alive.
const RELAX_SLACK: f64 = 1e-13;

/// A transform value; `NegInfinity` marks an atom with no causal partner.
/// Kept out of float arithmetic on purpose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialValue {
    Finite(f64),
    NegInfinity,
}

impl PotentialValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            PotentialValue::Finite(v) => Some(v),
            PotentialValue::NegInfinity => None,
        }
    }
}

/// `φ(y) = min_x ψ(x) + c(x, y)` over μ-atoms causally preceding `y`.
pub fn c_transform(
    model: &SpacetimeModel,
    psi: &[f64],
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Vec<PotentialValue> {
    nu.atoms()
        .iter()
        .map(|b| {
            mu.atoms()
                .iter()
                .zip(psi)
                .filter_map(|(a, p)| model.cost(&a.point, &b.point).finite().map(|c| p + c))
                .min_by(f64::total_cmp)
                .map_or(PotentialValue::NegInfinity, PotentialValue::Finite)
        })
        .collect()
}

/// `ψ(x) = max_y φ(y) - c(x, y)` over ν-atoms in the causal future of `x`.
pub fn reverse_transform(
    model: &SpacetimeModel,
    phi: &[f64],
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Vec<PotentialValue> {
    mu.atoms()
        .iter()
        .map(|a| {
            nu.atoms()
                .iter()
                .zip(phi)
                .filter_map(|(b, f)| model.cost(&a.point, &b.point).finite().map(|c| f - c))
                .max_by(f64::total_cmp)
                .map_or(PotentialValue::NegInfinity, PotentialValue::Finite)
        })
        .collect()
}

/// Chain graph on μ-atoms. Walking from support pair `(x, y)` to a μ-atom
/// `x''` with `c(x'', y) < ∞` gains `c(x, y) - c(x'', y)`; parallel arcs
/// through different partners of `x` collapse to the best one.
#[derive(Debug, Clone)]
pub struct ChainGraph {
    root: (usize, usize),
    arcs: Vec<Vec<(usize, f64)>>,
}

impl ChainGraph {
    pub fn build(model: &SpacetimeModel, coupling: &Coupling, root: (usize, usize)) -> Result<Self> {
        if !coupling.contains(root.0, root.1) {
            return Err(Error::RootNotInSupport(root.0, root.1));
        }
        let mu = coupling.mu();
        let n = mu.len();
        let mut best: Vec<Vec<Option<f64>>> = vec![vec![None; n]; n];
        for (e, &c_xy) in coupling.entries().iter().zip(coupling.entry_costs()) {
            let y = coupling.target(e);
            for (b, atom) in mu.atoms().iter().enumerate() {
                if let Some(c_by) = model.cost(&atom.point, y).finite() {
                    let w = c_xy - c_by;
                    let slot = &mut best[e.i][b];
                    if slot.map_or(true, |old| w > old) {
                        *slot = Some(w);
                    }
                }
            }
        }
        let arcs = best
            .into_iter()
            .map(|row| row.into_iter().enumerate().filter_map(|(b, w)| w.map(|w| (b, w))).collect())
            .collect();
        Ok(Self { root, arcs })
    }

    pub fn root(&self) -> (usize, usize) {
        self.root
    }

    pub fn arcs_from(&self, a: usize) -> &[(usize, f64)] {
        &self.arcs[a]
    }

    /// Longest-path values from the root's μ-atom by Bellman relaxation.
    pub fn longest_paths(&self, cycle_tol: f64) -> Result<Vec<f64>> {
        let n = self.arcs.len();
        let mut dist: Vec<Option<f64>> = vec![None; n];
        dist[self.root.0] = Some(0.0);
        let mut changed = true;
        let mut rounds = 0;
        while changed && rounds < n {
            changed = false;
            rounds += 1;
            for a in 0..n {
                let Some(da) = dist[a] else { continue };
                for &(b, w) in &self.arcs[a] {
                    let cand = da + w;
                    if dist[b].map_or(true, |db| cand > db + RELAX_SLACK) {
                        dist[b] = Some(cand);
                        changed = true;
                    }
                }
            }
        }
        if changed {
            for a in 0..n {
                let Some(da) = dist[a] else { continue };
                for &(b, w) in &self.arcs[a] {
                    let excess = da + w - dist[b].expect("reached atoms stay reached");
                    if excess > cycle_tol {
                        return Err(Error::PositiveCycle { atom: b, excess });
                    }
                }
            }
        }
        let offset = dist[self.root.0].expect("root is reached");
        dist.into_iter()
            .enumerate()
            .map(|(i, d)| d.map(|d| d - offset).ok_or(Error::UnreachableAtom(i)))
            .collect()
    }
}

/// Support pair with the lexicographically smallest `(x, y)`.
pub fn default_root(coupling: &Coupling) -> (usize, usize) {
    // Atoms are stored in lexicographic order and entries sorted by (i, j).
    let e = coupling.entries()[0];
    (e.i, e.j)
}

/// The chain potential `ψ(x) = sup Σ [c(x'_k, y'_k) - c(x'_{k+1}, y'_k)]`
/// over chains of support pairs starting at `root` and ending at `x`.
///
/// Fails with [`Error::PositiveCycle`] when the support is not cyclically
/// monotone and with [`Error::UnreachableAtom`] when some atom cannot be
/// reached from the root.
pub fn chain_potential(
    model: &SpacetimeModel,
    coupling: &Coupling,
    root: (usize, usize),
    cycle_tol: f64,
) -> Result<Vec<f64>> {
    ChainGraph::build(model, coupling, root)?.longest_paths(cycle_tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualPotential {
    pub psi: Vec<f64>,
    pub phi: Vec<f64>,
}

impl DualPotential {
    /// Chain potential on μ paired with its c-transform on ν.
    pub fn from_chain(model: &SpacetimeModel, coupling: &Coupling, root: (usize, usize), cycle_tol: f64) -> Result<Self> {
        let psi = chain_potential(model, coupling, root, cycle_tol)?;
        let phi = c_transform(model, &psi, coupling.mu(), coupling.nu())
            .into_iter()
            .map(|v| v.finite().ok_or(Error::Infeasible))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { psi, phi })
    }

    pub fn from_lp(duals: &LpDuals) -> Self {
        Self { psi: duals.u.clone(), phi: duals.v.clone() }
    }

    pub fn spread(&self) -> f64 {
        spread(&self.psi)
    }
}

pub fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DkpReport {
    pub feasible: bool,
    pub support_tight: bool,
    pub max_violation: f64,
}

impl DkpReport {
    pub fn passed(&self) -> bool {
        self.feasible && self.support_tight
    }
}

/// Checks `φ(j) - ψ(i) <= c(i, j) + tol` on every causal pair and equality
/// within `tol` on the support of `coupling`.
pub fn dkp_verify(model: &SpacetimeModel, coupling: &Coupling, potential: &DualPotential, tol: f64) -> DkpReport {
    let mu = coupling.mu();
    let nu = coupling.nu();
    let mut excess: f64 = 0.0;
    for (i, a) in mu.atoms().iter().enumerate() {
        for (j, b) in nu.atoms().iter().enumerate() {
            if let Some(c) = model.cost(&a.point, &b.point).finite() {
                excess = excess.max(potential.phi[j] - potential.psi[i] - c);
            }
        }
    }
    let gap = coupling
        .entries()
        .iter()
        .zip(coupling.entry_costs())
        .map(|(e, c)| (potential.phi[e.j] - potential.psi[e.i] - c).abs())
        .fold(0.0, f64::max);
    DkpReport { feasible: excess <= tol, support_tight: gap <= tol, max_violation: excess.max(gap) }
}

/// CSV rows `index,<coordinates>,value` with 17 significant digits.
pub fn potentials_csv(measure: &DiscreteMeasure, values: &[f64]) -> String {
    let dim = measure.point(0).dim();
    let mut out = String::from("index");
    for k in 0..dim {
        out.push_str(&format!(",x{k}"));
    }
    out.push_str(",t,value\n");
    for (i, (a, v)) in measure.atoms().iter().zip(values).enumerate() {
        out.push_str(&i.to_string());
        for x in &a.point.spatial {
            out.push(',');
            out.push_str(&csv_float(*x));
        }
        out.push_str(&format!(",{},{}\n", csv_float(a.point.time), csv_float(*v)));
    }
    out
}
