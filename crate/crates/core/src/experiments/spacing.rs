use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};

/// Picks `n` points of `B = ∪ [l_k, r_k] ⊆ [a, b]` with consecutive gaps of
/// at least `β = eps (b - a) / (2n)`.
///
/// With `prev = a`, each point is the first `t ∈ B` such that
/// `|B ∩ [prev, t]| = β/2`; the next search starts at `t + β`. Every step
/// consumes at most `3β/2` of `B`, so `|B| ≥ eps (b - a)` is enough.
/// All arithmetic is exact.
pub fn select_spaced_points_exact(
    intervals: &[(BigRational, BigRational)],
    a: &BigRational,
    b: &BigRational,
    eps: &BigRational,
    n: usize,
) -> Result<Vec<BigRational>> {
    if n == 0 {
        return Err(Error::InvalidParameter("need n >= 1".into()));
    }
    if !eps.is_positive() || a >= b {
        return Err(Error::InvalidParameter("need eps > 0 and a < b".into()));
    }
    let mut sorted: Vec<_> = intervals.to_vec();
    sorted.sort();
    for (l, r) in &sorted {
        if l > r || l < a || r > b {
            return Err(Error::BadIntervals(format!("[{l}, {r}] is not a subinterval of [{a}, {b}]")));
        }
    }
    for w in sorted.windows(2) {
        if w[1].0 <= w[0].1 {
            return Err(Error::BadIntervals("intervals overlap or touch".into()));
        }
    }
    let length: BigRational = sorted.iter().map(|(l, r)| r - l).sum();
    let required = eps * (b - a);
    if length < required {
        return Err(Error::InsufficientMeasure {
            available: length.to_f64().unwrap_or(f64::NAN),
            required: required.to_f64().unwrap_or(f64::NAN),
        });
    }

    let beta = &required / BigRational::from_integer(BigInt::from(2 * n));
    let half = &beta / BigRational::from_integer(BigInt::from(2));
    let mut prev = a.clone();
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let mut need = half.clone();
        let mut found = None;
        for (l, r) in &sorted {
            if *r < prev {
                continue;
            }
            let start = if *l > prev { l.clone() } else { prev.clone() };
            let avail = r - &start;
            if avail >= need {
                found = Some(start + need);
                break;
            }
            need -= avail;
        }
        // unreachable given the measure check above
        let t = found.ok_or(Error::InsufficientMeasure {
            available: length.to_f64().unwrap_or(f64::NAN),
            required: required.to_f64().unwrap_or(f64::NAN),
        })?;
        prev = &t + &beta;
        points.push(t);
    }
    Ok(points)
}

/// Binary64 front end of [`select_spaced_points_exact`]. Inputs convert to
/// rationals exactly; outputs are rounded once at the end.
pub fn select_spaced_points(intervals: &[(f64, f64)], a: f64, b: f64, eps: f64, n: usize) -> Result<Vec<f64>> {
    let q = |v: f64| {
        BigRational::from_float(v).ok_or_else(|| Error::InvalidParameter(format!("non-finite value {v}")))
    };
    let iv = intervals
        .iter()
        .map(|&(l, r)| Ok((q(l)?, q(r)?)))
        .collect::<Result<Vec<_>>>()?;
    let pts = select_spaced_points_exact(&iv, &q(a)?, &q(b)?, &q(eps)?, n)?;
    Ok(pts.iter().map(|p| p.to_f64().unwrap_or(f64::NAN)).collect())
}
