//! Flat model spacetimes: Lorentzian cost, causal classification, time
//! function and time-affine geodesics.
//!
//! Both models use the coordinate time `t` as time function. Spatial
//! displacements are measured with the Euclidean norm; on the cylinder the
//! displacement is the winding-minimal representative.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config;
use crate::error::{Error, Result};

/// An event: spatial coordinates plus the time coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    #[serde(rename = "x")]
    pub spatial: Vec<f64>,
    #[serde(rename = "t")]
    pub time: f64,
}

impl Point {
    pub fn new(spatial: Vec<f64>, time: f64) -> Self {
        Self { spatial, time }
    }

    /// Point of a `1+1`-dimensional model.
    pub fn xt(x: f64, t: f64) -> Self {
        Self { spatial: vec![x], time: t }
    }

    pub fn dim(&self) -> usize {
        self.spatial.len()
    }

    pub fn is_finite(&self) -> bool {
        self.time.is_finite() && self.spatial.iter().all(|v| v.is_finite())
    }

    /// Lexicographic order over `(spatial..., time)` using IEEE total order.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.spatial.iter().zip(&other.spatial) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.spatial
            .len()
            .cmp(&other.spatial.len())
            .then(self.time.total_cmp(&other.time))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.spatial.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ";{})", self.time)
    }
}

/// Lorentzian cost: `Finite(v)` with `v <= 0` on the causal future,
/// `Infinite` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedCost {
    Finite(f64),
    Infinite,
}

impl ExtendedCost {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedCost::Finite(v) => Some(v),
            ExtendedCost::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedCost::Finite(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalClass {
    Chronological,
    Null,
    NotCausal,
    Identical,
}

fn default_circumference() -> f64 {
    5.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpacetimeModel {
    /// `ℝ^d × ℝ` with metric `|dx|² - dt²`.
    Minkowski { d: usize },
    /// `ℝ/Cℤ × ℝ` with metric `dθ² - dt²`.
    Cylinder {
        #[serde(default = "default_circumference")]
        circumference: f64,
    },
}

/// Winding-minimal spatial displacement and time displacement between two
/// events.
#[derive(Debug, Clone, PartialEq)]
pub struct Displacement {
    pub spatial: Vec<f64>,
    pub dt: f64,
}

impl Displacement {
    pub fn spatial_norm(&self) -> f64 {
        match self.spatial.as_slice() {
            [v] => v.abs(),
            s => s.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }
}

impl SpacetimeModel {
    pub fn minkowski(d: usize) -> Self {
        SpacetimeModel::Minkowski { d }
    }

    pub fn cylinder(circumference: f64) -> Self {
        SpacetimeModel::Cylinder { circumference }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SpacetimeModel::Minkowski { d } if d == 0 => Err(Error::InvalidParameter(
                "Minkowski spatial dimension must be >= 1".into(),
            )),
            SpacetimeModel::Cylinder { circumference } if !(circumference > 0.0 && circumference.is_finite()) => {
                Err(Error::InvalidParameter("cylinder circumference must be > 0".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn spatial_dim(&self) -> usize {
        match *self {
            SpacetimeModel::Minkowski { d } => d,
            SpacetimeModel::Cylinder { .. } => 1,
        }
    }

    /// The time function `τ`.
    pub fn time(&self, p: &Point) -> f64 {
        p.time
    }

    /// Builds a point, wrapping the cylinder coordinate into `[0, C)`.
    pub fn point(&self, spatial: Vec<f64>, time: f64) -> Result<Point> {
        let p = Point::new(spatial, time);
        self.check(&p)?;
        Ok(self.normalize(p))
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if p.dim() != self.spatial_dim() {
            return Err(Error::DimensionMismatch { expected: self.spatial_dim(), got: p.dim() });
        }
        if !p.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite coordinate in {p}")));
        }
        Ok(())
    }

    pub fn normalize(&self, mut p: Point) -> Point {
        if let SpacetimeModel::Cylinder { circumference } = *self {
            for v in &mut p.spatial {
                *v = wrap(*v, circumference);
            }
        }
        p
    }

    /// Spatial displacement from `x` to `y`; on the cylinder the
    /// representative of minimal length among the windings
    /// `k ∈ [-K, K]`, `K = ⌈|Δτ|/C⌉ + 1`.
    pub fn displacement(&self, x: &Point, y: &Point) -> Displacement {
        let dt = y.time - x.time;
        let spatial = match *self {
            SpacetimeModel::Minkowski { .. } => {
                x.spatial.iter().zip(&y.spatial).map(|(a, b)| b - a).collect()
            }
            SpacetimeModel::Cylinder { circumference } => {
                // reduce first so unnormalized inputs stay within the winding window
                let raw = (y.spatial[0] - x.spatial[0] + 0.5 * circumference).rem_euclid(circumference)
                    - 0.5 * circumference;
                let windings = (dt.abs() / circumference).ceil() as i64 + 1;
                let mut best = raw;
                for k in -windings..=windings {
                    let cand = raw + k as f64 * circumference;
                    if cand.abs() < best.abs() {
                        best = cand;
                    }
                }
                vec![best]
            }
        };
        Displacement { spatial, dt }
    }

    /// `Δτ - |Δθ|`: positive inside the cone, zero on it, negative outside.
    pub fn cone_margin(&self, x: &Point, y: &Point) -> f64 {
        let d = self.displacement(x, y);
        d.dt - d.spatial_norm()
    }

    pub fn causal_class(&self, x: &Point, y: &Point) -> CausalClass {
        if x == y {
            return CausalClass::Identical;
        }
        let d = self.displacement(x, y);
        classify(d.dt, d.spatial_norm())
    }

    pub fn cost(&self, x: &Point, y: &Point) -> ExtendedCost {
        if x == y {
            return ExtendedCost::Finite(0.0);
        }
        let d = self.displacement(x, y);
        let r = d.spatial_norm();
        match classify(d.dt, r) {
            CausalClass::Chronological => ExtendedCost::Finite(-((d.dt - r) * (d.dt + r)).sqrt()),
            CausalClass::Null | CausalClass::Identical => ExtendedCost::Finite(0.0),
            CausalClass::NotCausal => ExtendedCost::Infinite,
        }
    }

    pub fn is_causal(&self, x: &Point, y: &Point) -> bool {
        self.causal_class(x, y) != CausalClass::NotCausal
    }

    /// Point at parameter `t` on the time-affinely parametrized segment
    /// from `x` to `y`. Returns `x` and `y` bit-exactly at the endpoints.
    pub fn geodesic_point(&self, x: &Point, y: &Point, t: f64) -> Result<Point> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("geodesic parameter {t} outside [0, 1]")));
        }
        if !self.is_causal(x, y) {
            return Err(Error::NotCausalPair);
        }
        Ok(self.lerp(x, y, t))
    }

    /// Interpolation along the winding-minimal chord without the causality
    /// check.
    pub(crate) fn lerp(&self, x: &Point, y: &Point, t: f64) -> Point {
        if t == 0.0 {
            return x.clone();
        }
        if t == 1.0 {
            return y.clone();
        }
        let time = (1.0 - t) * x.time + t * y.time;
        match *self {
            SpacetimeModel::Minkowski { .. } => Point::new(
                x.spatial.iter().zip(&y.spatial).map(|(a, b)| (1.0 - t) * a + t * b).collect(),
                time,
            ),
            SpacetimeModel::Cylinder { circumference } => {
                let d = self.displacement(x, y);
                Point::new(vec![wrap(x.spatial[0] + t * d.spatial[0], circumference)], time)
            }
        }
    }
}

fn classify(dt: f64, r: f64) -> CausalClass {
    let margin = dt - r;
    let band = config::NULL_CLASSIFICATION * 1f64.max(dt.abs()).max(r);
    if margin > band {
        CausalClass::Chronological
    } else if margin >= -band {
        CausalClass::Null
    } else {
        CausalClass::NotCausal
    }
}

pub(crate) fn wrap(v: f64, circumference: f64) -> f64 {
    let w = v.rem_euclid(circumference);
    if w >= circumference {
        0.0
    } else {
        w
    }
}
