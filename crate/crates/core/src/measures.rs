//! Finite atomic probability measures.

use serde::{Deserialize, Serialize};

use crate::config;
use crate::error::{Error, Result};
use crate::spacetime::{Point, SpacetimeModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(flatten)]
    pub point: Point,
    #[serde(rename = "w")]
    pub weight: f64,
}

impl Atom {
    pub fn new(point: Point, weight: f64) -> Self {
        Self { point, weight }
    }
}

/// A probability measure with finitely many atoms.
///
/// Atoms are kept in lexicographic coordinate order with exact duplicates
/// merged, so two measures with the same atoms compare equal regardless of
/// how they were assembled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    atoms: Vec<Atom>,
}

impl TryFrom<RawMeasure> for DiscreteMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        DiscreteMeasure::new(raw.atoms)
    }
}

impl From<DiscreteMeasure> for RawMeasure {
    fn from(m: DiscreteMeasure) -> Self {
        RawMeasure { atoms: m.atoms }
    }
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let atoms = canonicalize(atoms)?;
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if (total - 1.0).abs() > config::MASS {
            return Err(Error::InvalidMeasure(format!("mass: weights sum to {total}, expected 1")));
        }
        Ok(Self { atoms })
    }

    pub fn dirac(point: Point) -> Self {
        Self { atoms: vec![Atom::new(point, 1.0)] }
    }

    /// Equal weights on the given points (duplicates merged).
    pub fn uniform(points: Vec<Point>) -> Result<Self> {
        let w = 1.0 / points.len() as f64;
        Self::new(points.into_iter().map(|p| Atom::new(p, w)).collect())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.atoms[i].point
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.atoms[i].weight
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.weight).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.atoms.binary_search_by(|a| a.point.lex_cmp(p)).ok()
    }

    /// Checks that every atom is a valid point of `model`.
    pub fn check_model(&self, model: &SpacetimeModel) -> Result<()> {
        self.atoms.iter().try_for_each(|a| model.check(&a.point))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("measure serialization is infallible")
    }
}

fn canonicalize(mut atoms: Vec<Atom>) -> Result<Vec<Atom>> {
    if atoms.is_empty() {
        return Err(Error::InvalidMeasure("empty measure".into()));
    }
    let dim = atoms[0].point.dim();
    for a in &atoms {
        if a.point.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: a.point.dim() });
        }
        if !a.point.is_finite() {
            return Err(Error::InvalidMeasure(format!("non-finite coordinate at {}", a.point)));
        }
        if !(a.weight > 0.0 && a.weight.is_finite()) {
            return Err(Error::InvalidMeasure(format!("weight {} at {} is not positive", a.weight, a.point)));
        }
    }
    atoms.sort_by(|a, b| a.point.lex_cmp(&b.point));
    let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match merged.last_mut() {
            Some(last) if last.point == a.point => last.weight += a.weight,
            _ => merged.push(a),
        }
    }
    Ok(merged)
}

/// `n` equally weighted atoms at `start + k/(n-1) (end - start)`,
/// `k = 0, ..., n-1`.
pub fn grid_segment(model: &SpacetimeModel, start: &Point, end: &Point, n: usize) -> Result<DiscreteMeasure> {
    if n < 2 || start == end {
        return Err(Error::BadGrid(n));
    }
    model.check(start)?;
    model.check(end)?;
    let w = 1.0 / n as f64;
    let denom = (n - 1) as f64;
    let atoms = (0..n)
        .map(|k| {
            let s = k as f64 / denom;
            let spatial = start
                .spatial
                .iter()
                .zip(&end.spatial)
                .map(|(a, b)| a + s * (b - a))
                .collect();
            let time = start.time + s * (end.time - start.time);
            Atom::new(model.normalize(Point::new(spatial, time)), w)
        })
        .collect();
    DiscreteMeasure::new(atoms)
}

/// Image measure under `map`; atoms landing on the same point merge.
pub fn pushforward<F>(m: &DiscreteMeasure, map: F) -> DiscreteMeasure
where
    F: Fn(&Point) -> Point,
{
    let atoms = m.atoms.iter().map(|a| Atom::new(map(&a.point), a.weight)).collect();
    DiscreteMeasure {
        atoms: canonicalize(atoms).expect("pushforward of a valid measure is valid"),
    }
}

/// Flows every atom backwards in time by `eps` along `∂_t`.
pub fn strictify(m: &DiscreteMeasure, eps: f64) -> Result<DiscreteMeasure> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("strictify needs eps > 0 (got {eps})")));
    }
    Ok(pushforward(m, |p| Point::new(p.spatial.clone(), p.time - eps)))
}
