use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentReport, Table};
use crate::error::{Error, Result};
use crate::solver::csv_float;
use crate::spacetime::{wrap, Point, SpacetimeModel};

pub const CIRCUMFERENCE: f64 = 5.0;
pub const DEFAULT_ETAS: [f64; 3] = [0.1, 0.05, 0.01];

const VALIDATION_GRID: usize = 10_000;
const FLAT_DERIVATIVE_WINDOW: f64 = 0.1;
const ROOT_TOL: f64 = 1e-10;
const HOLDER_LEVELS: i32 = 40;
const HOLDER_BOUND: f64 = 10.0;
const MODULUS_SAMPLES: usize = 500;
const SUBDIFFERENTIAL_GRID: usize = 2000;
const SUBDIFFERENTIAL_TOL: f64 = 1e-8;

/// Periodic initial profile on `ℝ/5ℤ`:
///
/// | piece     | value                          |
/// |-----------|--------------------------------|
/// | `[0, 1]`  | `1 + ε`                        |
/// | `(1, 2]`  | `(1 + ε) √(x (2 - x))`         |
/// | `(2, 3]`  | `-(1 - ε) √((x - 2)(4 - x))`   |
/// | `(3, 4]`  | `ε - 1`                        |
/// | `(4, 5)`  | `ε - cos(π (x - 4))`           |
///
/// Continuously differentiable away from `2`, where it has a square-root
/// cusp and vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileFunction {
    eps: f64,
}

impl ProfileFunction {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn value(&self, x: f64) -> f64 {
        let e = self.eps;
        let x = wrap(x, CIRCUMFERENCE);
        if x <= 1.0 {
            1.0 + e
        } else if x <= 2.0 {
            (1.0 + e) * (x * (2.0 - x)).sqrt()
        } else if x <= 3.0 {
            -(1.0 - e) * ((x - 2.0) * (4.0 - x)).sqrt()
        } else if x <= 4.0 {
            e - 1.0
        } else {
            e - (PI * (x - 4.0)).cos()
        }
    }

    /// `f'(x)`; `-∞` at the cusp.
    pub fn derivative(&self, x: f64) -> f64 {
        let e = self.eps;
        let x = wrap(x, CIRCUMFERENCE);
        if x <= 1.0 {
            0.0
        } else if x <= 2.0 {
            (1.0 + e) * (1.0 - x) / (x * (2.0 - x)).sqrt()
        } else if x <= 3.0 {
            -(1.0 - e) * (3.0 - x) / ((x - 2.0) * (4.0 - x)).sqrt()
        } else if x <= 4.0 {
            0.0
        } else {
            PI * (PI * (x - 4.0)).sin()
        }
    }

    /// `max |f(2 ± 2^-k) - f(2)| / 2^{-k/2}` over `k = 1..=40`.
    pub fn holder_constant(&self) -> f64 {
        let f2 = self.value(2.0);
        (1..=HOLDER_LEVELS)
            .flat_map(|k| {
                let h = 2f64.powi(-k);
                [2.0 - h, 2.0 + h].map(|x| (self.value(x) - f2).abs() / h.sqrt())
            })
            .fold(0.0, f64::max)
    }
}

fn fail(condition: u8, detail: String) -> Error {
    Error::ValidationFailed { condition, detail }
}

/// Builds the profile and checks, on an equispaced grid of `10⁴` cells:
///
/// 1. `f ≡ 1 + ε` on `[0, 1]`;
/// 2. `f(x) > √(x(2-x))` on `[1, 2)`;
/// 3. `f(2) = 0`;
/// 4. `f(x) > -√((x-2)(4-x))` on `(2, 3]`;
/// 5. `f' < 0` on `(1.9, 2) ∪ (2, 2.1)`;
/// 6. `f ≡ ε - 1` on `[3, 4]`.
///
/// Condition `0` is regularity: periodic continuity at `0 ≡ 5` and a finite
/// Hölder-½ constant at `2` on dyadic points.
pub fn build_profile(eps: f64) -> Result<ProfileFunction> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!("profile needs 0 < eps < 1/2 (got {eps})")));
    }
    let f = ProfileFunction { eps };
    let grid = (0..=VALIDATION_GRID).map(|k| CIRCUMFERENCE * k as f64 / VALIDATION_GRID as f64);
    for x in grid {
        let v = f.value(x);
        if x <= 1.0 && v != 1.0 + eps {
            return Err(fail(1, format!("f({x}) = {v}")));
        }
        if (1.0..2.0).contains(&x) && v <= (x * (2.0 - x)).sqrt() {
            return Err(fail(2, format!("f({x}) = {v}")));
        }
        if x > 2.0 && x <= 3.0 && v <= -((x - 2.0) * (4.0 - x)).sqrt() {
            return Err(fail(4, format!("f({x}) = {v}")));
        }
        if x != 2.0 && (x - 2.0).abs() < FLAT_DERIVATIVE_WINDOW && f.derivative(x) >= 0.0 {
            return Err(fail(5, format!("f'({x}) = {}", f.derivative(x))));
        }
        if (3.0..=4.0).contains(&x) && v != eps - 1.0 {
            return Err(fail(6, format!("f({x}) = {v}")));
        }
    }
    if f.value(2.0) != 0.0 {
        return Err(fail(3, format!("f(2) = {}", f.value(2.0))));
    }
    let seam = (f.value(CIRCUMFERENCE - 1e-9) - f.value(0.0)).abs();
    if seam > 1e-6 {
        return Err(fail(0, format!("jump {seam} at 0 = 5")));
    }
    let c = f.holder_constant();
    if !(c.is_finite() && c <= HOLDER_BOUND) {
        return Err(fail(0, format!("Hölder-1/2 constant {c} at 2")));
    }
    Ok(f)
}

fn model() -> SpacetimeModel {
    SpacetimeModel::cylinder(CIRCUMFERENCE)
}

/// `φ(y) = inf_θ f(θ) + c((θ, 0), y)`: minimum over `theta_grid`
/// equispaced points of the causal window of `y`, refined by ternary search
/// around the grid argmin down to `1e-10`.
pub fn cylinder_potential(profile: &ProfileFunction, y: &Point, theta_grid: usize) -> f64 {
    let t = y.time;
    if t < 0.0 {
        return f64::INFINITY;
    }
    let centre = y.spatial[0];
    let half = t.min(0.5 * CIRCUMFERENCE);
    if half == 0.0 {
        return profile.value(centre);
    }
    let m = model();
    let g = |theta: f64| match m.cost(&Point::xt(wrap(theta, CIRCUMFERENCE), 0.0), y).finite() {
        Some(c) => profile.value(theta) + c,
        None => f64::INFINITY,
    };
    let n = theta_grid.max(3);
    let step = 2.0 * half / (n - 1) as f64;
    let (k, best) = (0..n)
        .map(|k| (k, g(centre - half + step * k as f64)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("grid is nonempty");
    let mut lo = centre - half + step * k.saturating_sub(1) as f64;
    let mut hi = centre - half + step * (k + 1).min(n - 1) as f64;
    while hi - lo > ROOT_TOL {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if g(a) <= g(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    best.min(g(0.5 * (lo + hi)))
}

/// Displacement `Δ ∈ (-t, t)` solving `f'(θ) + ∂_θ c((θ,0), (θ+Δ, t)) = 0`,
/// i.e. `Δ / √(t² - Δ²) = f'(θ)`, by bisection to `1e-10`.
pub fn critical_displacement(profile: &ProfileFunction, theta: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameter(format!("slice time must lie in (0, 1] (got {t})")));
    }
    let slope = profile.derivative(theta);
    if !slope.is_finite() {
        return Err(Error::RootNotBracketed(theta));
    }
    // Decreasing in Δ, from +∞ at -t to -∞ at t.
    let residual = |d: f64| slope - d / ((t - d) * (t + d)).sqrt();
    let (mut lo, mut hi) = (-t, t);
    while hi - lo > ROOT_TOL {
        let mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r == 0.0 {
            return Ok(mid);
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let d = 0.5 * (lo + hi);
    if d.abs() >= t {
        return Err(Error::RootNotBracketed(theta));
    }
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderSample {
    pub theta: f64,
    pub y: Point,
    pub margin: f64,
    /// Slice distance from `(θ + t, t)` to `y`.
    pub dist_plus: f64,
    /// Slice distance from `(θ - t, t)` to `y`.
    pub dist_minus: f64,
    /// Whether `θ` attains the infimum defining `φ(y)`, i.e. the critical
    /// point is a global minimizer and `((θ,0), y) ∈ ∂_c φ`.
    pub attains_potential: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderExperiment {
    pub eps: f64,
    pub t: f64,
    pub theta_grid: usize,
    pub holder_constant: f64,
    pub samples: Vec<CylinderSample>,
    pub excluded: usize,
    pub root_failures: usize,
    /// `(η, |{θ : margin < η}|)`.
    pub near_null: Vec<(f64, f64)>,
    /// As `near_null`, restricted to samples that attain the potential.
    pub near_null_attained: Vec<(f64, f64)>,
    /// Share of samples whose critical point attains the potential.
    pub attained_fraction: f64,
    /// `min_θ dist((θ + t, t), y_θ)`.
    pub delta: f64,
    /// `min_θ dist((θ - t, t), y_θ)`.
    pub delta_minus: f64,
    /// `max |φ(a) - φ(b)| / |a - b|` over neighbouring slice samples.
    pub phi_lipschitz_estimate: f64,
    /// Same with `|a - b|^{1/2}` in the denominator.
    pub phi_holder_estimate: f64,
}

fn slice_distance(m: &SpacetimeModel, a: &Point, b: &Point) -> f64 {
    m.displacement(a, b).spatial_norm()
}

/// Runs the cylinder example on the grid `θ_k = (k + ½) · 5 / theta_grid`,
/// skipping the cusp at `2`.
pub fn run_cylinder_example(eps: f64, theta_grid: usize, t: f64, etas: &[f64]) -> Result<CylinderExperiment> {
    let profile = build_profile(eps)?;
    if theta_grid == 0 {
        return Err(Error::BadGrid(theta_grid));
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameter(format!("slice time must lie in (0, 1] (got {t})")));
    }
    let m = model();
    let h = CIRCUMFERENCE / theta_grid as f64;
    let thetas: Vec<f64> = (0..theta_grid)
        .map(|k| (k as f64 + 0.5) * h)
        .filter(|th| (th - 2.0).abs() > 1e-12)
        .collect();
    let excluded = theta_grid - thetas.len();

    let solved: Vec<Result<CylinderSample>> = thetas
        .par_iter()
        .map(|&theta| {
            let d = critical_displacement(&profile, theta, t)?;
            let x = Point::xt(theta, 0.0);
            let y = Point::xt(wrap(theta + d, CIRCUMFERENCE), t);
            let plus = Point::xt(wrap(theta + t, CIRCUMFERENCE), t);
            let minus = Point::xt(wrap(theta - t, CIRCUMFERENCE), t);
            let value = profile.value(theta) - ((t - d) * (t + d)).sqrt();
            let phi = cylinder_potential(&profile, &y, SUBDIFFERENTIAL_GRID);
            Ok(CylinderSample {
                attains_potential: value <= phi + SUBDIFFERENTIAL_TOL,
                theta,
                margin: m.cone_margin(&x, &y),
                dist_plus: slice_distance(&m, &plus, &y),
                dist_minus: slice_distance(&m, &minus, &y),
                y,
            })
        })
        .collect();
    let mut samples = Vec::with_capacity(solved.len());
    let mut root_failures = 0;
    for s in solved {
        match s {
            Ok(s) => samples.push(s),
            Err(Error::RootNotBracketed(_)) => root_failures += 1,
            Err(e) => return Err(e),
        }
    }

    let near_null = etas
        .iter()
        .map(|&eta| (eta, samples.iter().filter(|s| s.margin < eta).count() as f64 * h))
        .collect();
    let near_null_attained = etas
        .iter()
        .map(|&eta| (eta, samples.iter().filter(|s| s.attains_potential && s.margin < eta).count() as f64 * h))
        .collect();
    let attained_fraction = samples.iter().filter(|s| s.attains_potential).count() as f64 / samples.len() as f64;
    let delta = samples.iter().map(|s| s.dist_plus).fold(f64::INFINITY, f64::min);
    let delta_minus = samples.iter().map(|s| s.dist_minus).fold(f64::INFINITY, f64::min);

    let ms = MODULUS_SAMPLES;
    let phis: Vec<f64> = (0..ms)
        .into_par_iter()
        .map(|k| cylinder_potential(&profile, &Point::xt(CIRCUMFERENCE * k as f64 / ms as f64, t), theta_grid))
        .collect();
    let step = CIRCUMFERENCE / ms as f64;
    let jump = (0..ms).map(|k| (phis[(k + 1) % ms] - phis[k]).abs()).fold(0.0, f64::max);

    Ok(CylinderExperiment {
        eps,
        t,
        theta_grid,
        holder_constant: profile.holder_constant(),
        samples,
        excluded,
        root_failures,
        near_null,
        near_null_attained,
        attained_fraction,
        delta,
        delta_minus,
        phi_lipschitz_estimate: jump / step,
        phi_holder_estimate: jump / step.sqrt(),
    })
}

impl CylinderExperiment {
    pub fn table_csv(&self) -> String {
        let mut out = String::from("theta,y_theta,margin\n");
        for s in &self.samples {
            out.push_str(&format!("{},{},{}\n", csv_float(s.theta), csv_float(s.y.spatial[0]), csv_float(s.margin)));
        }
        out
    }

    pub fn report(&self) -> ExperimentReport {
        let h = CIRCUMFERENCE / self.theta_grid as f64;
        let mut r = ExperimentReport::new("counterexample-cylinder");
        r.check("profile_holder_constant", self.holder_constant, HOLDER_BOUND, self.holder_constant <= HOLDER_BOUND);
        for &(eta, measure) in &self.near_null {
            r.check(format!("near_null_measure_eta_{eta}"), measure, h, measure > 0.0);
        }
        for &(eta, measure) in &self.near_null_attained {
            r.check(format!("near_null_attained_measure_eta_{eta}"), measure, h, measure > 0.0);
        }
        r.report("attained_fraction", self.attained_fraction, SUBDIFFERENTIAL_TOL);
        r.check("delta", self.delta, ROOT_TOL, self.delta > ROOT_TOL);
        r.report("delta_minus", self.delta_minus, ROOT_TOL);
        r.report("root_failures", self.root_failures as f64, ROOT_TOL);
        r.report("excluded_cusp_points", self.excluded as f64, 0.0);
        r.report("phi_lipschitz_estimate", self.phi_lipschitz_estimate, ROOT_TOL);
        r.report("phi_holder_estimate", self.phi_holder_estimate, ROOT_TOL);
        r.tables.push(Table { name: "cylinder".into(), csv: self.table_csv() });
        r
    }
}
