use serde::{Deserialize, Serialize};

use super::{ExperimentReport, Table};
use crate::config::Tolerances;
use crate::diagnostics::{lightlike_fraction, two_cycle_violations, DEFAULT_CYCLE_SAMPLES};
use crate::dual::{chain_potential, default_root, potentials_csv, spread};
use crate::error::{Error, Result};
use crate::measures::grid_segment;
use crate::solver::{solve, Coupling, TransportProblem};
use crate::spacetime::{Point, SpacetimeModel};

const SPREAD_TOL: f64 = 1e-6;
const COST_TOL: f64 = 1e-12;
const RATIO_RANGE: (f64, f64) = (1.30, 1.48);
const RATIO_MIN_N: usize = 25;

/// Endpoint grids of `n` atoms: `μ` on `[0,1]×{0}`, `ν` on `[1,2]×{1}`.
/// Every `μ`-atom reaches only the `ν`-atoms at or left of its shift, and
/// the shift itself is null.
pub fn line_problem(n: usize) -> Result<TransportProblem> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("line grid needs n >= 3 (got {n})")));
    }
    let model = SpacetimeModel::minkowski(1);
    let mu = grid_segment(&model, &Point::xt(0.0, 0.0), &Point::xt(1.0, 0.0), n)?;
    let nu = grid_segment(&model, &Point::xt(1.0, 1.0), &Point::xt(2.0, 1.0), n)?;
    TransportProblem::new(model, mu, nu)
}

/// True iff the support is exactly `{(i, i)}` with the full `μ`-weight on
/// each entry.
pub fn shift_pattern_exact(coupling: &Coupling) -> bool {
    let n = coupling.mu().len();
    coupling.entries().len() == n
        && coupling
            .entries()
            .iter()
            .enumerate()
            .all(|(k, e)| e.i == k && e.j == k && e.mass == coupling.mu().weight(k))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineLevel {
    pub n: usize,
    pub shift_exact: bool,
    pub total_cost: f64,
    pub spread: f64,
    pub expected_spread: f64,
    pub lightlike_fraction: f64,
    pub dual_gap: f64,
    pub monotonicity_violations: usize,
    #[serde(skip)]
    pub psi: Vec<f64>,
    #[serde(skip)]
    pub coupling: Option<Coupling>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineExperiment {
    pub levels: Vec<LineLevel>,
    /// `spread(2n) / spread(n)` for consecutive levels.
    pub ratios: Vec<f64>,
    /// Least-squares slope of `log spread` against `log n`.
    pub slope: Option<f64>,
}

fn run_level(n: usize, tol: &Tolerances) -> Result<LineLevel> {
    let problem = line_problem(n)?;
    let solution = solve(&problem)?;
    let coupling = solution.coupling.clone();
    let psi = chain_potential(&problem.model, &coupling, default_root(&coupling), tol.cycle)?;
    let (violations, _) = two_cycle_violations(&problem.model, &coupling, DEFAULT_CYCLE_SAMPLES, tol.monotonicity, 0);
    Ok(LineLevel {
        n,
        shift_exact: shift_pattern_exact(&coupling),
        total_cost: coupling.total_cost(),
        spread: spread(&psi),
        expected_spread: ((2 * n - 3) as f64).sqrt(),
        lightlike_fraction: lightlike_fraction(&problem.model, &coupling, tol.lightlike),
        dual_gap: solution.dual_gap(),
        monotonicity_violations: violations,
        psi,
        coupling: Some(coupling),
    })
}

fn loglog_slope(levels: &[LineLevel]) -> Option<f64> {
    if levels.len() < 2 {
        return None;
    }
    let pts: Vec<(f64, f64)> = levels.iter().map(|l| ((l.n as f64).ln(), l.spread.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Solves the line pair at `n, 2n, ..., 2^refinements n` atoms and measures
/// how the chain-potential spread grows.
pub fn run_line_counterexample(n: usize, refinements: usize) -> Result<LineExperiment> {
    let tol = Tolerances::default();
    let levels = (0..=refinements)
        .map(|k| run_level(n << k, &tol))
        .collect::<Result<Vec<_>>>()?;
    let ratios = levels.windows(2).map(|w| w[1].spread / w[0].spread).collect();
    let slope = loglog_slope(&levels);
    Ok(LineExperiment { levels, ratios, slope })
}

impl LineExperiment {
    pub fn report(&self) -> ExperimentReport {
        let tol = Tolerances::default();
        let mut r = ExperimentReport::new("counterexample-line");
        for l in &self.levels {
            let n = l.n;
            r.check(format!("n{n}.shift_pattern_exact"), f64::from(u8::from(l.shift_exact)), 0.0, l.shift_exact);
            r.check(format!("n{n}.total_cost"), l.total_cost, COST_TOL, l.total_cost.abs() <= COST_TOL);
            r.check(
                format!("n{n}.spread"),
                l.spread,
                SPREAD_TOL,
                (l.spread - l.expected_spread).abs() <= SPREAD_TOL,
            );
            r.report(format!("n{n}.expected_spread"), l.expected_spread, 0.0);
            r.report(format!("n{n}.lightlike_fraction"), l.lightlike_fraction, tol.lightlike);
            r.check(
                format!("n{n}.dual_gap"),
                l.dual_gap,
                tol.duality,
                l.dual_gap <= tol.duality * (1.0 + l.total_cost.abs()),
            );
            r.check(
                format!("n{n}.monotonicity_violations"),
                l.monotonicity_violations as f64,
                tol.monotonicity,
                l.monotonicity_violations == 0,
            );
        }
        for (w, ratio) in self.levels.windows(2).zip(&self.ratios) {
            let name = format!("ratio_n{}_n{}", w[1].n, w[0].n);
            if w[0].n >= RATIO_MIN_N {
                let ok = (RATIO_RANGE.0..=RATIO_RANGE.1).contains(ratio);
                r.check(name, *ratio, RATIO_RANGE.1 - RATIO_RANGE.0, ok);
            } else {
                r.report(name, *ratio, 0.0);
            }
        }
        if let Some(s) = self.slope {
            r.report("loglog_slope", s, 0.0);
        }
        if let Some(first) = self.levels.first() {
            if let Some(c) = &first.coupling {
                r.tables.push(Table { name: "coupling".into(), csv: c.to_csv() });
                r.tables.push(Table { name: "potential".into(), csv: potentials_csv(c.mu(), &first.psi) });
            }
        }
        r
    }
}
