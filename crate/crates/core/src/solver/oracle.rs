//! Brute-force optimum over the vertices of the transportation polytope.
//!
//! Independent of the flow solver: it never looks at shortest paths or
//! potentials, only at enumerated candidate plans.

use std::collections::HashMap;

use super::units::{integer_units, Units};
use super::{Coupling, CouplingEntry, TransportProblem};
use crate::error::{Error, Result};

pub const ORACLE_CAP: usize = 6;

pub fn brute_force_oracle(p: &TransportProblem) -> Result<Coupling> {
    p.validate()?;
    let n = p.mu.len();
    let m = p.nu.len();
    if n.max(m) > ORACLE_CAP {
        return Err(Error::TooLarge { cap: ORACLE_CAP, got: n.max(m) });
    }
    let cost = p.cost_matrix();
    let uniform = n == m
        && p.mu.atoms().iter().chain(p.nu.atoms()).all(|a| a.weight == p.mu.weight(0));
    let entries = if uniform {
        best_permutation(&cost).map(|perm| {
            perm.into_iter()
                .enumerate()
                .map(|(i, j)| CouplingEntry { i, j, mass: p.mu.weight(i) })
                .collect::<Vec<_>>()
        })
    } else {
        best_vertex(&cost, &integer_units(&p.mu.weights(), &p.nu.weights()))
    }
    .ok_or(Error::Infeasible)?;
    Coupling::new(&p.model, p.mu.clone(), p.nu.clone(), entries)
}

/// For equal uniform weights the vertices are the permutation matrices.
fn best_permutation(cost: &[Vec<Option<f64>>]) -> Option<Vec<usize>> {
    fn recurse(
        cost: &[Vec<Option<f64>>],
        row: usize,
        used: &mut [bool],
        current: &mut Vec<usize>,
        acc: f64,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        if row == cost.len() {
            if best.as_ref().map_or(true, |(b, _)| acc < *b) {
                *best = Some((acc, current.clone()));
            }
            return;
        }
        for j in 0..used.len() {
            if let (false, Some(c)) = (used[j], cost[row][j]) {
                used[j] = true;
                current.push(j);
                recurse(cost, row + 1, used, current, acc + c, best);
                current.pop();
                used[j] = false;
            }
        }
    }
    let mut best = None;
    let mut used = vec![false; cost.first().map_or(0, Vec::len)];
    recurse(cost, 0, &mut used, &mut Vec::new(), 0.0, &mut best);
    best.map(|(_, perm)| perm)
}

/// General weights: every vertex arises from greedily saturating arcs in
/// some order (peel leaves off its spanning-forest support), so a memoized
/// search over saturation orders visits all vertices.
fn best_vertex(cost: &[Vec<Option<f64>>], units: &Units) -> Option<Vec<CouplingEntry>> {
    let n = units.supply.len();
    let arcs: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| (0..units.demand.len()).filter_map(move |j| cost[i][j].map(|c| (i, j, c))))
        .collect();

    type Memo = HashMap<Vec<u64>, Option<(f64, usize)>>;
    fn search(state: &mut Vec<u64>, n: usize, arcs: &[(usize, usize, f64)], memo: &mut Memo) -> Option<f64> {
        if state.iter().all(|&r| r == 0) {
            return Some(0.0);
        }
        if let Some(hit) = memo.get(state) {
            return hit.map(|(v, _)| v);
        }
        let mut best: Option<(f64, usize)> = None;
        for (k, &(i, j, c)) in arcs.iter().enumerate() {
            let amount = state[i].min(state[n + j]);
            if amount == 0 {
                continue;
            }
            state[i] -= amount;
            state[n + j] -= amount;
            if let Some(rest) = search(state, n, arcs, memo) {
                let v = c * amount as f64 + rest;
                if best.map_or(true, |(b, _)| v < b) {
                    best = Some((v, k));
                }
            }
            state[i] += amount;
            state[n + j] += amount;
        }
        memo.insert(state.clone(), best);
        best.map(|(v, _)| v)
    }

    let mut state: Vec<u64> = units.supply.iter().chain(&units.demand).copied().collect();
    let mut memo = Memo::new();
    search(&mut state, n, &arcs, &mut memo)?;

    let mut entries = Vec::new();
    while let Some(Some((_, k))) = memo.get(&state).copied() {
        let (i, j, _) = arcs[k];
        let amount = state[i].min(state[n + j]);
        entries.push(CouplingEntry { i, j, mass: units.mass(amount) });
        state[i] -= amount;
        state[n + j] -= amount;
    }
    Some(entries)
}
