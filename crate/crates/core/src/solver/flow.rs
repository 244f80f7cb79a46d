//! Successive shortest paths on the bipartite network
//! `source → μ-atoms → ν-atoms → sink`, with Dijkstra on reduced costs.
//!
//! Only arcs with finite Lorentzian cost exist. At termination the node
//! potentials are the LP duals: `v[j] - u[i] <= c[i][j]` on every arc and
//! equality wherever flow is positive.

use crate::error::{Error, Result};

pub(crate) struct FlowResult {
    /// `(i, j, units)` with `units > 0`, sorted by `(i, j)`.
    pub flow: Vec<(usize, usize, u64)>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Clone, Copy)]
enum Pred {
    None,
    Source,
    Nu(usize),
    Mu(usize),
}

pub(crate) fn min_cost_flow(cost: &[Vec<Option<f64>>], supply: &[u64], demand: &[u64]) -> Result<FlowResult> {
    let n = supply.len();
    let m = demand.len();
    let total: u64 = supply.iter().sum();
    debug_assert_eq!(total, demand.iter().sum::<u64>());

    let mut supply_left = supply.to_vec();
    let mut demand_left = demand.to_vec();
    let mut flow = vec![vec![0u64; m]; n];

    // Initial potentials make every reduced cost nonnegative.
    let mut hu = vec![0.0f64; n];
    let mut hv = vec![0.0f64; m];
    for (j, h) in hv.iter_mut().enumerate() {
        *h = (0..n)
            .filter_map(|i| cost[i][j])
            .min_by(f64::total_cmp)
            .ok_or(Error::Infeasible)?;
    }
    let mut ht = hv.iter().copied().min_by(f64::total_cmp).unwrap_or(0.0);

    let mut dist = vec![f64::INFINITY; n + m];
    let mut done = vec![false; n + m];
    let mut pred = vec![Pred::None; n + m];
    let mut shipped = 0u64;

    while shipped < total {
        dist.fill(f64::INFINITY);
        done.fill(false);
        pred.fill(Pred::None);
        let mut dist_t = f64::INFINITY;
        let mut pred_t = usize::MAX;

        for i in 0..n {
            if supply_left[i] > 0 {
                dist[i] = (-hu[i]).max(0.0);
                pred[i] = Pred::Source;
            }
        }

        loop {
            // Lowest distance first; ties go to the lowest node index, μ before ν.
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            for k in 0..n + m {
                if !done[k] && dist[k] < best_d {
                    best_d = dist[k];
                    best = k;
                }
            }
            if best == usize::MAX || best_d >= dist_t {
                break;
            }
            done[best] = true;
            if best < n {
                let i = best;
                for j in 0..m {
                    if let Some(c) = cost[i][j] {
                        let nd = best_d + (c + hu[i] - hv[j]).max(0.0);
                        if nd < dist[n + j] {
                            dist[n + j] = nd;
                            pred[n + j] = Pred::Mu(i);
                        }
                    }
                }
            } else {
                let j = best - n;
                if demand_left[j] > 0 {
                    let nd = best_d + (hv[j] - ht).max(0.0);
                    if nd < dist_t {
                        dist_t = nd;
                        pred_t = j;
                    }
                }
                for i in 0..n {
                    if flow[i][j] > 0 {
                        let c = cost[i][j].expect("flow only on finite arcs");
                        let nd = best_d + (hv[j] - hu[i] - c).max(0.0);
                        if nd < dist[i] {
                            dist[i] = nd;
                            pred[i] = Pred::Nu(j);
                        }
                    }
                }
            }
        }

        if !dist_t.is_finite() {
            return Err(Error::Infeasible);
        }

        for i in 0..n {
            hu[i] += dist[i].min(dist_t);
        }
        for j in 0..m {
            hv[j] += dist[n + j].min(dist_t);
        }
        ht += dist_t;

        // Walk back from the sink to find the bottleneck, then augment.
        let mut amount = demand_left[pred_t];
        let mut j = pred_t;
        loop {
            let i = match pred[n + j] {
                Pred::Mu(i) => i,
                _ => unreachable!("ν-node on a path is always entered from a μ-node"),
            };
            match pred[i] {
                Pred::Source => {
                    amount = amount.min(supply_left[i]);
                    break;
                }
                Pred::Nu(prev) => {
                    amount = amount.min(flow[i][prev]);
                    j = prev;
                }
                _ => unreachable!("μ-node on a path has a predecessor"),
            }
        }
        demand_left[pred_t] -= amount;
        let mut j = pred_t;
        loop {
            let i = match pred[n + j] {
                Pred::Mu(i) => i,
                _ => unreachable!(),
            };
            flow[i][j] += amount;
            match pred[i] {
                Pred::Source => {
                    supply_left[i] -= amount;
                    break;
                }
                Pred::Nu(prev) => {
                    flow[i][prev] -= amount;
                    j = prev;
                }
                _ => unreachable!(),
            }
        }
        shipped += amount;
    }

    let flow = flow
        .iter()
        .enumerate()
        .flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, &f)| f > 0)
                .map(move |(j, &f)| (i, j, f))
        })
        .collect();
    Ok(FlowResult { flow, u: hu, v: hv })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignment_with_forbidden_arcs() {
        // Only the anti-diagonal plus (0, 0) is allowed.
        let cost = vec![vec![Some(-1.0), Some(-3.0)], vec![Some(-5.0), None]];
        let r = min_cost_flow(&cost, &[1, 1], &[1, 1]).unwrap();
        assert_eq!(r.flow, vec![(0, 1, 1), (1, 0, 1)]);
        for (i, row) in cost.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if let Some(c) = c {
                    assert!(r.v[j] - r.u[i] <= c + 1e-12);
                }
            }
        }
    }

    #[test]
    fn detects_infeasibility() {
        let cost = vec![vec![Some(0.0), None], vec![Some(0.0), None]];
        assert!(matches!(min_cost_flow(&cost, &[1, 1], &[1, 1]), Err(Error::Infeasible)));
        let cost = vec![vec![Some(0.0), Some(0.0)], vec![None, None]];
        assert!(matches!(min_cost_flow(&cost, &[1, 1], &[1, 1]), Err(Error::Infeasible)));
    }
}
