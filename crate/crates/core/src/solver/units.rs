//! Rescaling of binary64 weights to integer supplies with a common
//! denominator.

use num_integer::Integer;

/// Largest denominator accepted when recovering a rational weight.
const MAX_DENOMINATOR: u64 = 1_000_000;
/// Largest common denominator before falling back to fixed-point rounding.
const MAX_COMMON: u64 = 1 << 40;
const RATIONAL_SLACK: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Units {
    pub supply: Vec<u64>,
    pub demand: Vec<u64>,
    pub denom: u64,
}

impl Units {
    pub fn mass(&self, units: u64) -> f64 {
        units as f64 / self.denom as f64
    }
}

/// Best rational approximation `p/q` of `w` with `q <= MAX_DENOMINATOR`,
/// if it matches `w` to within `RATIONAL_SLACK`.
fn as_rational(w: f64) -> Option<(u64, u64)> {
    // continued-fraction convergents
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut x = w;
    for _ in 0..64 {
        let a = x.floor();
        if a > MAX_DENOMINATOR as f64 {
            break;
        }
        let a = a as u64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > MAX_DENOMINATOR {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (w - h1 as f64 / k1 as f64).abs() <= RATIONAL_SLACK {
            return Some((h1, k1));
        }
        let frac = x - a as f64;
        if frac <= 0.0 {
            break;
        }
        x = 1.0 / frac;
    }
    None
}

fn exact(weights: &[f64], denom: u64) -> Option<Vec<u64>> {
    let units: Vec<u64> = weights
        .iter()
        .map(|&w| as_rational(w).map(|(p, q)| p * (denom / q)))
        .collect::<Option<_>>()?;
    (units.iter().sum::<u64>() == denom && units.iter().all(|&u| u > 0)).then_some(units)
}

fn rounded(weights: &[f64], denom: u64) -> Vec<u64> {
    let total: f64 = weights.iter().sum();
    let scaled: Vec<f64> = weights.iter().map(|w| w / total * denom as f64).collect();
    let mut units: Vec<u64> = scaled.iter().map(|s| (s.floor() as u64).max(1)).collect();
    let assigned: u64 = units.iter().sum();
    if assigned < denom {
        let mut order: Vec<usize> = (0..weights.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = scaled[a] - scaled[a].floor();
            let fb = scaled[b] - scaled[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        let mut left = denom - assigned;
        for &k in order.iter().cycle() {
            if left == 0 {
                break;
            }
            units[k] += 1;
            left -= 1;
        }
    } else {
        let mut excess = assigned - denom;
        while excess > 0 {
            let k = (0..units.len()).max_by_key(|&k| (units[k], std::cmp::Reverse(k))).unwrap();
            let take = excess.min(units[k] - 1);
            units[k] -= take;
            excess -= take;
        }
    }
    units
}

pub(crate) fn integer_units(a: &[f64], b: &[f64]) -> Units {
    let denom = a
        .iter()
        .chain(b)
        .try_fold(1u64, |acc, &w| {
            let (_, q) = as_rational(w)?;
            let l = acc.lcm(&q);
            (l <= MAX_COMMON).then_some(l)
        });
    if let Some(denom) = denom {
        if let (Some(supply), Some(demand)) = (exact(a, denom), exact(b, denom)) {
            return Units { supply, demand, denom };
        }
    }
    Units { supply: rounded(a, MAX_COMMON), demand: rounded(b, MAX_COMMON), denom: MAX_COMMON }
}
