use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::Coupling;
use crate::spacetime::{Point, SpacetimeModel};

/// A maximal geodesic carrying part of a coupling. `entries` index into
/// `coupling.entries()`; atoms are listed in increasing time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportRay {
    pub entries: Vec<usize>,
    /// `(μ-atom, mass carried on this ray)`.
    pub mu_atoms: Vec<(usize, f64)>,
    /// `(ν-atom, mass carried on this ray)`.
    pub nu_atoms: Vec<(usize, f64)>,
    /// Distinct time values of all atoms on the ray, increasing.
    pub params: Vec<f64>,
}

/// Cumulative distribution functions of the two marginals along one ray.
#[derive(Debug, Clone, PartialEq)]
pub struct RayCdf {
    /// `(τ, m(τ))` at each μ-atom, increasing.
    pub m: Vec<(f64, f64)>,
    /// `(τ, n(τ))` at each ν-atom, increasing.
    pub n: Vec<(f64, f64)>,
}

fn step(cdf: &[(f64, f64)], a: f64) -> f64 {
    cdf.iter().take_while(|(tau, _)| *tau <= a).last().map_or(0.0, |p| p.1)
}

impl RayCdf {
    pub fn m(&self, a: f64) -> f64 {
        step(&self.m, a)
    }

    pub fn n(&self, b: f64) -> f64 {
        step(&self.n, b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayDecomposition {
    pub rays: Vec<TransportRay>,
    /// μ-atoms whose mass is spread over more than one ray.
    pub branch_atoms: Vec<usize>,
}

impl TransportRay {
    pub fn cdf(&self, coupling: &Coupling) -> RayCdf {
        let accumulate = |atoms: &[(usize, f64)], time: &dyn Fn(usize) -> f64| {
            let mut acc = 0.0;
            atoms
                .iter()
                .map(|&(a, w)| {
                    acc += w;
                    (time(a), acc)
                })
                .collect()
        };
        RayCdf {
            m: accumulate(&self.mu_atoms, &|i| coupling.mu().point(i).time),
            n: accumulate(&self.nu_atoms, &|j| coupling.nu().point(j).time),
        }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, a: usize) -> usize {
        let mut r = a;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut a = a;
        while self.0[a] != r {
            let next = self.0[a];
            self.0[a] = r;
            a = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// A segment in spacetime coordinates, anchored at its source; on the
/// cylinder the direction is the winding-minimal one.
struct Segment {
    dir: Vec<f64>,
    len: f64,
}

fn spacetime_vec(model: &SpacetimeModel, from: &Point, to: &Point) -> Vec<f64> {
    let d = model.displacement(from, to);
    let mut v = d.spatial;
    v.push(d.dt);
    v
}

fn wedge_norm(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let w = a[i] * b[j] - a[j] * b[i];
            s += w * w;
        }
    }
    s.sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Groups the support into rays: connected components of entries whose
/// segments lie on one line and overlap. Identical entries are singleton
/// rays. Before grouping, every pair of support entries is audited for
/// two-cycle monotonicity at `monotonicity_tol`.
pub fn ray_decomposition(
    model: &SpacetimeModel,
    coupling: &Coupling,
    collinearity_tol: f64,
    monotonicity_tol: f64,
) -> Result<RayDecomposition> {
    let entries = coupling.entries();
    let costs = coupling.entry_costs();
    let k = entries.len();
    for a in 0..k {
        for b in a + 1..k {
            let (ea, eb) = (&entries[a], &entries[b]);
            let swapped = model.cost(coupling.source(ea), coupling.target(eb)).finite().and_then(|c1| {
                model.cost(coupling.source(eb), coupling.target(ea)).finite().map(|c2| c1 + c2)
            });
            if swapped.is_some_and(|s| costs[a] + costs[b] > s + monotonicity_tol) {
                return Err(Error::MonotonicityViolation(a, b));
            }
        }
    }

    let segs: Vec<Segment> = entries
        .iter()
        .map(|e| {
            let dir = spacetime_vec(model, coupling.source(e), coupling.target(e));
            let len = dot(&dir, &dir).sqrt();
            Segment { dir, len }
        })
        .collect();
    let mut uf = UnionFind((0..k).collect());
    for a in 0..k {
        if segs[a].len == 0.0 {
            continue;
        }
        for b in a + 1..k {
            if segs[b].len == 0.0 {
                continue;
            }
            let scale = collinearity_tol * segs[a].len.max(segs[b].len);
            let off = spacetime_vec(model, coupling.source(&entries[a]), coupling.source(&entries[b]));
            let mut end = off.clone();
            for (v, d) in end.iter_mut().zip(&segs[b].dir) {
                *v += d;
            }
            let da = &segs[a].dir;
            let la = segs[a].len;
            if wedge_norm(da, &off) / la > scale || wedge_norm(da, &end) / la > scale {
                continue;
            }
            // Parameters of b's endpoints along a, where a spans [0, 1].
            let s0 = dot(da, &off) / (la * la);
            let s1 = dot(da, &end) / (la * la);
            let slack = scale / la;
            if s0.min(s1) <= 1.0 + slack && s0.max(s1) >= -slack {
                uf.union(a, b);
            }
        }
    }

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; k];
    for e in 0..k {
        let r = uf.find(e);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(e);
    }

    let mut rays_of_mu = vec![0usize; coupling.mu().len()];
    let rays = groups
        .into_iter()
        .map(|members| {
            let mut mu: Vec<(usize, f64)> = Vec::new();
            let mut nu: Vec<(usize, f64)> = Vec::new();
            for &e in &members {
                let en = &entries[e];
                add_mass(&mut mu, en.i, en.mass);
                add_mass(&mut nu, en.j, en.mass);
            }
            let tau_mu = |i: usize| coupling.mu().point(i).time;
            let tau_nu = |j: usize| coupling.nu().point(j).time;
            mu.sort_by(|a, b| tau_mu(a.0).total_cmp(&tau_mu(b.0)).then(a.0.cmp(&b.0)));
            nu.sort_by(|a, b| tau_nu(a.0).total_cmp(&tau_nu(b.0)).then(a.0.cmp(&b.0)));
            for &(i, _) in &mu {
                rays_of_mu[i] += 1;
            }
            let mut params: Vec<f64> = mu.iter().map(|a| tau_mu(a.0)).chain(nu.iter().map(|b| tau_nu(b.0))).collect();
            params.sort_by(f64::total_cmp);
            params.dedup();
            TransportRay { entries: members, mu_atoms: mu, nu_atoms: nu, params }
        })
        .collect();
    let branch_atoms = (0..rays_of_mu.len()).filter(|&i| rays_of_mu[i] > 1).collect();
    Ok(RayDecomposition { rays, branch_atoms })
}

fn add_mass(list: &mut Vec<(usize, f64)>, atom: usize, mass: f64) {
    match list.iter_mut().find(|p| p.0 == atom) {
        Some(p) => p.1 += mass,
        None => list.push((atom, mass)),
    }
}
