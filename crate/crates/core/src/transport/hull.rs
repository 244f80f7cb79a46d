//! Volumes of convex hulls of small point sets in dimensions 1 to 3.

use crate::error::{Error, Result};

const PLANE_TOL: f64 = 1e-12;

pub(crate) fn hull_volume(points: &[Vec<f64>]) -> Result<f64> {
    let dim = points.first().map_or(0, Vec::len);
    match dim {
        1 => Ok(length(points)),
        2 => Ok(area(&points.iter().map(|p| [p[0], p[1]]).collect::<Vec<_>>())),
        3 => Ok(volume3(&points.iter().map(|p| [p[0], p[1], p[2]]).collect::<Vec<_>>())),
        d => Err(Error::InvalidParameter(format!("hull volume supports slice dimension 1..=3 (got {d})"))),
    }
}

fn length(points: &[Vec<f64>]) -> f64 {
    let lo = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain; returns the hull counter-clockwise.
pub(crate) fn hull2(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross2(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn area(points: &[[f64; 2]]) -> f64 {
    let h = hull2(points);
    if h.len() < 3 {
        return 0.0;
    }
    let twice: f64 = (0..h.len())
        .map(|k| {
            let (a, b) = (h[k], h[(k + 1) % h.len()]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    0.5 * twice.abs()
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Facets found by testing every point triple as a supporting plane; each
/// facet is the 2D hull of the points on it, coned to the centroid.
/// Cubic in the point count, meant for polytopes with a few dozen vertices.
fn volume3(points: &[[f64; 3]]) -> f64 {
    let n = points.len();
    if n < 4 {
        return 0.0;
    }
    let scale = points.iter().map(|p| norm(*p)).fold(1.0, f64::max);
    let centroid = points.iter().fold([0.0; 3], |acc, p| [acc[0] + p[0], acc[1] + p[1], acc[2] + p[2]]);
    let centroid = centroid.map(|v| v / n as f64);
    let mut planes: Vec<([f64; 3], f64)> = Vec::new();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let nrm = cross(sub(points[j], points[i]), sub(points[k], points[i]));
                let len = norm(nrm);
                if len <= PLANE_TOL * scale * scale {
                    continue;
                }
                let u = nrm.map(|v| v / len);
                let off = dot(u, points[i]);
                let tol = PLANE_TOL * scale;
                let (mut above, mut below) = (false, false);
                for p in points {
                    let s = dot(u, *p) - off;
                    above |= s > tol;
                    below |= s < -tol;
                }
                if above && below {
                    continue;
                }
                // orient outward so duplicates compare equal
                let (u, off) = if above { (u.map(|v| -v), -off) } else { (u, off) };
                if planes.iter().any(|(q, o)| norm(sub(*q, u)) <= 1e-9 && (o - off).abs() <= 1e-9 * scale) {
                    continue;
                }
                planes.push((u, off));
                let on: Vec<[f64; 3]> =
                    points.iter().copied().filter(|p| (dot(u, *p) - off).abs() <= tol).collect();
                // orthonormal frame in the facet plane
                let e1 = {
                    let a = sub(on[1], on[0]);
                    let a = sub(a, u.map(|v| v * dot(a, u)));
                    a.map(|v| v / norm(a))
                };
                let e2 = cross(u, e1);
                let flat: Vec<[f64; 2]> = on.iter().map(|p| [dot(*p, e1), dot(*p, e2)]).collect();
                let height = off - dot(u, centroid);
                total += area(&flat) * height / 3.0;
            }
        }
    }
    total
}
