use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rays::{ray_decomposition, TransportRay};
use crate::config::{Tolerances, MASS};
use crate::error::{Error, Result};
use crate::solver::{solve, Coupling, TransportProblem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MongeMap {
    /// `targets[i]` is the ν-atom receiving all of μ-atom `i`.
    pub targets: Vec<usize>,
    pub cost: f64,
    pub optimum: f64,
    pub rays: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MongeOutcome {
    Map(MongeMap),
    /// The μ-atom cannot be sent to a single ν-atom: either its quantile
    /// interval straddles two ν-atoms on a ray or its mass sits on several
    /// rays.
    AtomSplit { mu_atom: usize },
}

/// Monotone rearrangement on one ray: μ-atom `k` goes to the first ν-atom
/// whose cumulative mass reaches `m(a_k)`, provided the whole quantile
/// interval of atom `k` fits inside that ν-atom.
fn rearrange(ray: &TransportRay) -> std::result::Result<Vec<(usize, usize)>, usize> {
    let mut out = Vec::with_capacity(ray.mu_atoms.len());
    let mut m = 0.0f64;
    let mut l = 0;
    let mut n_prev = 0.0;
    let mut n = ray.nu_atoms[0].1;
    for &(i, w) in &ray.mu_atoms {
        let m_prev = m;
        m += w;
        while n < m - MASS && l + 1 < ray.nu_atoms.len() {
            l += 1;
            n_prev = n;
            n += ray.nu_atoms[l].1;
        }
        if m_prev < n_prev - MASS {
            return Err(i);
        }
        out.push((i, ray.nu_atoms[l].0));
    }
    Ok(out)
}

/// Solves `problem`, decomposes the optimal support into rays and rearranges
/// monotonically in time along each. Checks that the resulting map costs the
/// same as the optimum.
pub fn monge_map(problem: &TransportProblem, tol: &Tolerances) -> Result<MongeOutcome> {
    let solution = solve(problem)?;
    monge_from_coupling(problem, &solution.coupling, tol)
}

pub(crate) fn monge_from_coupling(problem: &TransportProblem, coupling: &Coupling, tol: &Tolerances) -> Result<MongeOutcome> {
    let model = &problem.model;
    let decomposition = ray_decomposition(model, coupling, tol.collinearity, tol.monotonicity)?;
    if let Some(&i) = decomposition.branch_atoms.first() {
        return Ok(MongeOutcome::AtomSplit { mu_atom: i });
    }
    let per_ray: Vec<_> = decomposition.rays.par_iter().map(rearrange).collect();
    let mut targets = vec![usize::MAX; coupling.mu().len()];
    for r in per_ray {
        match r {
            Ok(pairs) => {
                for (i, j) in pairs {
                    targets[i] = j;
                }
            }
            Err(i) => return Ok(MongeOutcome::AtomSplit { mu_atom: i }),
        }
    }
    let mut cost = 0.0;
    for (i, &j) in targets.iter().enumerate() {
        let c = model.cost(coupling.mu().point(i), coupling.nu().point(j)).finite().unwrap_or(f64::INFINITY);
        cost += coupling.mu().weight(i) * c;
    }
    let optimum = coupling.total_cost();
    if !((cost - optimum).abs() <= 1e-9) {
        return Err(Error::CostMismatch { map: cost, optimum });
    }
    Ok(MongeOutcome::Map(MongeMap { targets, cost, optimum, rays: decomposition.rays.len() }))
}

/// CSV rows `mu_index,nu_index`.
pub fn monge_csv(map: &MongeMap) -> String {
    let mut out = String::from("mu_index,nu_index\n");
    for (i, j) in map.targets.iter().enumerate() {
        out.push_str(&format!("{i},{j}\n"));
    }
    out
}
