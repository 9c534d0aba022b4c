//! Distribution comparison: total variation over a countable support and the
//! Kolmogorov–Smirnov statistic against a piecewise-linear reference cdf.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-9;

fn check_normalized<K>(p: &BTreeMap<K, f64>) -> Result<()> {
    let total: f64 = p.values().sum();
    if p.values().any(|&x| x < 0.0 || !x.is_finite()) || (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::UnnormalizedInput(total));
    }
    Ok(())
}

/// `(1/2) Σ |p(x) − q(x)|` over the union of both supports.
pub fn tv_distance<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> Result<f64> {
    check_normalized(p)?;
    check_normalized(q)?;
    let mut sum = 0.0;
    for (k, &pk) in p {
        sum += (pk - q.get(k).copied().unwrap_or(0.0)).abs();
    }
    for (k, &qk) in q {
        if !p.contains_key(k) {
            sum += qk;
        }
    }
    Ok(0.5 * sum)
}

/// A continuous cdf given by linear interpolation between knots; `0` left of
/// the first knot and `1` right of the last.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinearCdf {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinearCdf {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("cdf knots: {msg}")));
        if knots.len() < 2 {
            return bad("need at least two knots");
        }
        if knots
            .iter()
            .any(|&(x, f)| !x.is_finite() || !(0.0..=1.0).contains(&f))
        {
            return bad("values must be finite with cdf in [0,1]");
        }
        if knots
            .windows(2)
            .any(|w| w[1].0 <= w[0].0 || w[1].1 < w[0].1)
        {
            return bad("must be strictly increasing in x and monotone in cdf");
        }
        if knots[0].1 != 0.0 || knots[knots.len() - 1].1 != 1.0 {
            return bad("must start at 0 and end at 1");
        }
        Ok(Self { knots })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![(lo, 0.0), (hi, 1.0)])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if x <= first.0 {
            return 0.0;
        }
        if x >= last.0 {
            return 1.0;
        }
        let i = self.knots.partition_point(|&(kx, _)| kx <= x);
        let (x0, f0) = self.knots[i - 1];
        let (x1, f1) = self.knots[i];
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }
}

/// `sup_x |F_n(x) − F(x)|` for the empirical cdf `F_n` of `samples`.
pub fn ks_statistic(samples: &[f64], cdf: &PiecewiseLinearCdf) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("ks statistic needs samples".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidParameter("NaN sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf.eval(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Standard deviation of an empirical frequency with success probability `p`.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Normalizes counts into frequencies.
pub fn frequencies<K: Ord + Clone>(counts: &BTreeMap<K, u64>) -> BTreeMap<K, f64> {
    let total: u64 = counts.values().sum();
    counts
        .iter()
        .map(|(k, &c)| (k.clone(), c as f64 / total as f64))
        .collect()
}

/// Median of `values`; `NaN` for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(entries: &[(i32, f64)]) -> BTreeMap<i32, f64> {
        entries.iter().copied().collect()
    }

    #[test]
    fn tv_examples() {
        let a = dist(&[(0, 0.5), (1, 0.5)]);
        assert_eq!(tv_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(
            tv_distance(&dist(&[(1, 1.0)]), &dist(&[(-1, 1.0)])).unwrap(),
            1.0
        );
        let b = dist(&[(0, 0.25), (1, 0.75)]);
        assert_eq!(tv_distance(&a, &b).unwrap(), 0.25);
    }

    #[test]
    fn tv_rejects_unnormalized() {
        let a = dist(&[(0, 0.5)]);
        assert!(matches!(
            tv_distance(&a, &a),
            Err(Error::UnnormalizedInput(_))
        ));
        let neg = dist(&[(0, 1.5), (1, -0.5)]);
        assert!(tv_distance(&neg, &dist(&[(0, 1.0)])).is_err());
    }

    #[test]
    fn cdf_eval_and_validation() {
        let u = PiecewiseLinearCdf::uniform(-1.0, 1.0).unwrap();
        assert_eq!(u.eval(-2.0), 0.0);
        assert_eq!(u.eval(0.0), 0.5);
        assert_eq!(u.eval(3.0), 1.0);
        let p = PiecewiseLinearCdf::new(vec![(0.0, 0.0), (1.0, 0.2), (2.0, 1.0)]).unwrap();
        assert!((p.eval(1.5) - 0.6).abs() < 1e-15);
        assert!(PiecewiseLinearCdf::new(vec![(0.0, 0.0), (1.0, 0.5)]).is_err());
        assert!(PiecewiseLinearCdf::new(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(
            PiecewiseLinearCdf::new(vec![(0.0, 0.0), (1.0, 0.7), (2.0, 0.5), (3.0, 1.0)]).is_err()
        );
    }

    #[test]
    fn ks_at_quantiles_is_small() {
        let u = PiecewiseLinearCdf::uniform(0.0, 1.0).unwrap();
        let n = 1000;
        let samples: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!(ks_statistic(&samples, &u).unwrap() <= 1.0 / n as f64);
    }

    #[test]
    fn ks_point_mass_is_large() {
        let u = PiecewiseLinearCdf::uniform(0.0, 1.0).unwrap();
        for x in [0.0, 0.3, 0.5, 0.9] {
            assert!(ks_statistic(&[x; 50], &u).unwrap() >= 0.5);
        }
        assert!(ks_statistic(&[], &u).is_err());
    }

    #[test]
    fn median_and_frequencies() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let f = frequencies(&[(1, 1u64), (2, 3)].into_iter().collect());
        assert_eq!(f[&2], 0.75);
        assert!((binomial_sigma(0.5, 100) - 0.05).abs() < 1e-15);
    }
}
