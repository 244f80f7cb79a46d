//! Displacement interpolation, restriction to intermediate times, exact
//! contraction of slice polytopes in flat models, and the ray-wise Monge map.

mod hull;
mod monge;
mod rays;

pub use monge::{monge_csv, monge_map, MongeMap, MongeOutcome};
pub use rays::{ray_decomposition, RayCdf, RayDecomposition, TransportRay};

use crate::error::{Error, Result};
use crate::measures::{Atom, DiscreteMeasure};
use crate::solver::{Coupling, CouplingEntry, TransportProblem};
use crate::spacetime::{Point, SpacetimeModel};

fn check_parameter(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("interpolation parameter {t} outside [0, 1]")))
    }
}

/// `(ev_t)_♯ π`: each entry's mass placed at the point a fraction `t` along
/// its segment. `t = 0` and `t = 1` return the marginals unchanged.
pub fn interpolate(model: &SpacetimeModel, coupling: &Coupling, t: f64) -> Result<DiscreteMeasure> {
    check_parameter(t)?;
    if t == 0.0 {
        return Ok(coupling.mu().clone());
    }
    if t == 1.0 {
        return Ok(coupling.nu().clone());
    }
    let atoms = coupling
        .entries()
        .iter()
        .map(|e| Atom::new(model.lerp(coupling.source(e), coupling.target(e), t), e.mass))
        .collect();
    DiscreteMeasure::new(atoms)
}

/// The transport between times `s1 <= s2` of the same dynamical coupling.
/// Each entry moves its mass from its `s1` point to its `s2` point.
pub fn restrict(model: &SpacetimeModel, coupling: &Coupling, s1: f64, s2: f64) -> Result<(TransportProblem, Coupling)> {
    check_parameter(s1)?;
    check_parameter(s2)?;
    if s1 > s2 {
        return Err(Error::InvalidParameter(format!("restriction needs s1 <= s2 (got {s1} > {s2})")));
    }
    let mu = interpolate(model, coupling, s1)?;
    let nu = interpolate(model, coupling, s2)?;
    let locate = |m: &DiscreteMeasure, p: &Point| {
        m.index_of(p).ok_or_else(|| Error::InvalidCoupling(format!("interpolated point {p} missing from marginal")))
    };
    let entries = coupling
        .entries()
        .iter()
        .map(|e| {
            let (x, y) = (coupling.source(e), coupling.target(e));
            Ok(CouplingEntry {
                i: locate(&mu, &model.lerp(x, y, s1))?,
                j: locate(&nu, &model.lerp(x, y, s2))?,
                mass: e.mass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let restricted = Coupling::new(model, mu.clone(), nu.clone(), entries)?;
    Ok((TransportProblem::new(*model, mu, nu)?, restricted))
}

/// Image of the slice polytope `A = conv(vertices)` under
/// `x ↦ geodesic_point(x, y, t)`. In a flat model this map is affine on the
/// slice with Jacobian `(1-t)^d`, so `measured` and `predicted =
/// (1-t)^d vol(A)` agree up to rounding.
pub fn contraction_check(model: &SpacetimeModel, vertices: &[Point], y: &Point, t: f64) -> Result<(f64, f64)> {
    check_parameter(t)?;
    let first = vertices.first().ok_or_else(|| Error::InvalidParameter("polytope has no vertices".into()))?;
    for v in vertices {
        model.check(v)?;
        if v.time != first.time {
            return Err(Error::InvalidParameter("polytope vertices must share one time slice".into()));
        }
        if !model.is_causal(v, y) {
            return Err(Error::NotCausalPair);
        }
    }
    // Coordinates relative to the first vertex so the cylinder seam is harmless.
    let chart = |p: &Point| model.displacement(first, p).spatial;
    let base: Vec<Vec<f64>> = vertices.iter().map(chart).collect();
    let image: Vec<Vec<f64>> = vertices.iter().map(|v| chart(&model.lerp(v, y, t))).collect();
    let volume = hull::hull_volume(&base)?;
    let measured = hull::hull_volume(&image)?;
    let predicted = (1.0 - t).powi(model.spatial_dim() as i32) * volume;
    Ok((measured, predicted))
}
