//! Hilbert function of the quotient by `E`, its running sum, and the
//! growth-rate bounds checked against it.

use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::quotient::{dyadic, QuotientTable};
use crate::report::CheckRecord;

/// `dim_quotient[n-1] = dim H(n)/E(n)` and `cumulative[n-1]` its running sum,
/// for `n = 1..=nmax`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HilbertProfile {
    pub dim_quotient: Vec<u64>,
    pub cumulative: Vec<u64>,
}

impl HilbertProfile {
    pub fn from_dims(dims: Vec<u64>) -> Self {
        let cumulative = dims
            .iter()
            .scan(0u64, |acc, &d| {
                *acc += d;
                Some(*acc)
            })
            .collect();
        HilbertProfile { dim_quotient: dims, cumulative }
    }

    pub fn nmax(&self) -> usize {
        self.dim_quotient.len()
    }

    /// Lines `n,dim_quotient,cumulative` under a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,dim_quotient,cumulative\n");
        for (i, (d, c)) in self.dim_quotient.iter().zip(&self.cumulative).enumerate() {
            out.push_str(&format!("{},{d},{c}\n", i + 1));
        }
        out
    }
}

pub fn hilbert(table: &mut QuotientTable, nmax: usize) -> Result<HilbertProfile> {
    let dims = (1..=nmax).map(|n| table.e_codim(n)).collect::<Result<Vec<_>>>()?;
    Ok(HilbertProfile::from_dims(dims))
}

/// `d < 64 n² (log n)^6` and `cumulative ≤ 64 n³ (log n)^6` for `n ≥ 2`;
/// one record per bound, naming the first offending `n`.
pub fn check_growth_bound(profile: &HilbertProfile) -> Vec<CheckRecord> {
    let mut first_d = None;
    let mut first_c = None;
    for n in 2..=profile.nmax() {
        let (d, c) = (profile.dim_quotient[n - 1], profile.cumulative[n - 1]);
        if first_d.is_none() && !below_bound(d, n, 2, true) {
            first_d = Some(format!("n = {n}: dim H(n)/E(n) = {d}"));
        }
        if first_c.is_none() && !below_bound(c, n, 3, false) {
            first_c = Some(format!("n = {n}: cumulative = {c}"));
        }
    }
    let nmax = profile.nmax();
    vec![
        CheckRecord::new("growth", json!({ "bound": "dim < 64 n^2 (log n)^6", "nmax": nmax }), first_d),
        CheckRecord::new("growth", json!({ "bound": "cumulative <= 64 n^3 (log n)^6", "nmax": nmax }), first_c),
    ]
}

/// Compares `value` with `64 n^power (log2 n)^6`, exactly where `⌊log2 n⌋`
/// decides it.
fn below_bound(value: u64, n: usize, power: u32, strict: bool) -> bool {
    let v = value as u128;
    let np = (n as u128).pow(power);
    let lg = dyadic(n) as u128;
    let ok = |b: u128| if strict { v < b } else { v <= b };
    if ok(64 * np * lg.pow(6)) {
        return true;
    }
    if !ok(64 * np * (lg + 1).pow(6)) {
        return false;
    }
    let b = 64.0 * (np as f64) * (n as f64).log2().powi(6);
    if strict {
        (value as f64) < b
    } else {
        (value as f64) <= b
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeEstimate {
    pub slope: f64,
    /// `(n, cumulative(n))` for every point used.
    pub points: Vec<(u64, u64)>,
    pub power_of_two_only: bool,
}

/// Least-squares slope of `log2 cumulative(n)` against `log2 n` over
/// `n1 ≤ n ≤ n2`. Only powers of two are sampled when the window holds at
/// least two; otherwise every point is used.
pub fn gk_slope(profile: &HilbertProfile, window: (usize, usize)) -> Result<SlopeEstimate> {
    let (n1, n2) = window;
    if n1 < 2 || n2 <= n1 || n2 > profile.nmax() {
        return Err(Error::Precondition(format!("window [{n1}, {n2}] must satisfy 2 ≤ n1 < n2 ≤ {}", profile.nmax())));
    }
    let pow2: Vec<usize> = (n1..=n2).filter(|n| n.is_power_of_two()).collect();
    let power_of_two_only = pow2.len() >= 2;
    let ns: Vec<usize> = if power_of_two_only { pow2 } else { (n1..=n2).collect() };
    let points: Vec<(u64, u64)> = ns.iter().map(|&n| (n as u64, profile.cumulative[n - 1])).collect();
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).log2()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, c)| (c as f64).log2()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(SlopeEstimate { slope: sxy / sxx, points, power_of_two_only })
}
