//! Randomized property suites over paperfolding choice sequences.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::overlap::{
    flip, hamming_from_overlap, overlap_exact, tree_distance, window_overlap, OverlapResult,
};
use crate::sample::chunk_rng;
use crate::seq::{paperfold_window, ChoiceSequence, MAX_DEPTH};

fn check_depth(depth: usize) -> Result<()> {
    if (1..=MAX_DEPTH).contains(&depth) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "depth must lie in 1..={MAX_DEPTH}"
        )))
    }
}

/// `base` with levels after a uniformly random branching level redrawn, so
/// triples share prefixes of varying length.
fn branch<R: Rng>(rng: &mut R, base: &ChoiceSequence) -> ChoiceSequence {
    let keep = rng.gen_range(0..=base.depth());
    let fresh = ChoiceSequence::random(rng, base.depth());
    let choices = base.choices()[..keep]
        .iter()
        .chain(&fresh.choices()[keep..])
        .map(|&k| i64::from(k))
        .collect();
    ChoiceSequence::new(choices).expect("valid by construction")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UltrametricReport {
    pub triples: u64,
    pub depth: usize,
    pub seed: u64,
    pub violations: u64,
}

/// Counts triples violating `d(x,z) <= max(d(x,y), d(y,z))` for the tree
/// distance.
pub fn check_ultrametric(triples: u64, depth: usize, seed: u64) -> Result<UltrametricReport> {
    check_depth(depth)?;
    let mut rng = chunk_rng(seed, 0);
    let mut violations = 0;
    for _ in 0..triples {
        let x = ChoiceSequence::random(&mut rng, depth);
        let y = branch(&mut rng, &x);
        let z = branch(&mut rng, &x);
        let (x, y, z) = match rng.gen_range(0..3) {
            0 => (x, y, z),
            1 => (y, z, x),
            _ => (z, x, y),
        };
        let xz = tree_distance(&x, &z)?;
        let bound = tree_distance(&x, &y)?.max(tree_distance(&y, &z)?);
        if xz > bound {
            violations += 1;
        }
    }
    Ok(UltrametricReport {
        triples,
        depth,
        seed,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlipReport {
    pub cases: u64,
    pub depth: usize,
    pub window: usize,
    pub seed: u64,
    /// Cases where `overlap(k, flip(k))` is not exactly `-(1 - 2^-depth)`.
    pub overlap_violations: u64,
    /// Cases where the window of `flip(k)` on `[1, window]` is not the
    /// negation of the window of `k`.
    pub window_violations: u64,
}

impl FlipReport {
    pub fn violations(&self) -> u64 {
        self.overlap_violations + self.window_violations
    }
}

pub fn check_flip(cases: u64, depth: usize, window: usize, seed: u64) -> Result<FlipReport> {
    check_depth(depth)?;
    let expected = -(DyadicRational::ONE - DyadicRational::pow2_neg(depth as u32));
    let mut rng = chunk_rng(seed, 0);
    let ks: Vec<_> = (0..cases)
        .map(|_| ChoiceSequence::random(&mut rng, depth))
        .collect();
    let outcomes = ks
        .par_iter()
        .map(|k| {
            let f = flip(k);
            let overlap_ok = overlap_exact(k, &f, 0).partial_sum() == expected;
            let w = paperfold_window(k, 1, window)?;
            let wf = paperfold_window(&f, 1, window)?;
            Ok((overlap_ok, wf.values() == w.negated().values()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FlipReport {
        cases,
        depth,
        window,
        seed,
        overlap_violations: outcomes.iter().filter(|o| !o.0).count() as u64,
        window_violations: outcomes.iter().filter(|o| !o.1).count() as u64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyCase {
    pub a: ChoiceSequence,
    pub b: ChoiceSequence,
    pub exact: OverlapResult,
    /// `None` when the window hit a site unresolved at the generated depth.
    pub q_window: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub window: usize,
    pub depth: usize,
    pub resolve_by: u32,
    pub tol: f64,
    pub seed: u64,
    pub cases: Vec<ConsistencyCase>,
}

impl ConsistencyReport {
    pub fn violations(&self) -> u64 {
        self.cases
            .iter()
            .filter(|c| c.residual.is_none_or(|r| r > self.tol))
            .count() as u64
    }

    pub fn max_residual(&self) -> f64 {
        self.cases
            .iter()
            .filter_map(|c| c.residual)
            .fold(0.0, f64::max)
    }
}

/// Compares the exact overlap of random pairs resolved by level `resolve_by`
/// with the finite-window overlap on `[1, window]`.
pub fn check_consistency(
    pairs: u64,
    window: usize,
    tol: f64,
    depth: usize,
    resolve_by: u32,
    seed: u64,
) -> Result<ConsistencyReport> {
    check_depth(depth)?;
    if resolve_by == 0 || resolve_by as usize > depth {
        return Err(Error::InvalidParameter(
            "resolve-by must lie in 1..=depth".into(),
        ));
    }
    let mut rng = chunk_rng(seed, 0);
    let mut drawn = Vec::with_capacity(pairs as usize);
    while (drawn.len() as u64) < pairs {
        let a = ChoiceSequence::random(&mut rng, depth);
        let b = ChoiceSequence::random(&mut rng, depth);
        let exact = overlap_exact(&a, &b, 0);
        if exact.resolution_level().is_some_and(|l| l <= resolve_by) {
            drawn.push((a, b, exact));
        }
    }
    let cases = drawn
        .into_par_iter()
        .map(|(a, b, exact)| {
            let w = paperfold_window(&a, 1, window)?;
            let w2 = paperfold_window(&b, 1, window)?;
            let q_window = match window_overlap(&w, &w2) {
                Ok(q) => Some(*q.numer() as f64 / *q.denom() as f64),
                Err(Error::UnresolvedSite(_)) => None,
                Err(e) => return Err(e),
            };
            let residual = q_window.map(|q| exact.residual(q));
            Ok(ConsistencyCase {
                a,
                b,
                exact,
                q_window,
                residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConsistencyReport {
        window,
        depth,
        resolve_by,
        tol,
        seed,
        cases,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HammingTriplesReport {
    pub triples: u64,
    pub depth: usize,
    pub seed: u64,
    /// Triples with all three overlaps resolved.
    pub evaluated: u64,
    pub skipped: u64,
    pub violations: u64,
    /// Largest `d(x,z) - max(d(x,y), d(y,z))` seen, as an exact value.
    pub max_excess: DyadicRational,
}

/// Exploratory: how often the Hamming density `(1 - q)/2` breaks the
/// ultrametric inequality. Not a pass/fail property.
pub fn check_hamming_triples(
    triples: u64,
    depth: usize,
    seed: u64,
) -> Result<HammingTriplesReport> {
    check_depth(depth)?;
    let mut rng = chunk_rng(seed, 0);
    let mut report = HammingTriplesReport {
        triples,
        depth,
        seed,
        evaluated: 0,
        skipped: 0,
        violations: 0,
        max_excess: DyadicRational::ZERO,
    };
    for _ in 0..triples {
        let x = ChoiceSequence::random(&mut rng, depth);
        let y = branch(&mut rng, &x);
        let z = branch(&mut rng, &x);
        let d = |a: &ChoiceSequence, b: &ChoiceSequence| {
            overlap_exact(a, b, 0)
                .value()
                .map(|q| hamming_from_overlap(q).expect("|q| <= 1"))
        };
        match (d(&x, &y), d(&y, &z), d(&x, &z)) {
            (Some(xy), Some(yz), Some(xz)) => {
                report.evaluated += 1;
                let excess = xz - xy.max(yz);
                if excess > DyadicRational::ZERO {
                    report.violations += 1;
                    report.max_excess = report.max_excess.max(excess);
                }
            }
            _ => report.skipped += 1,
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs() {
        assert_eq!(check_ultrametric(2_000, 12, 1).unwrap().violations, 0);
        assert_eq!(check_flip(50, 12, 512, 1).unwrap().violations(), 0);
        let c = check_consistency(5, 1 << 14, 0.02, 30, 4, 1).unwrap();
        assert_eq!(c.cases.len(), 5);
        assert_eq!(c.violations(), 0);
        let h = check_hamming_triples(500, 12, 1).unwrap();
        assert_eq!(h.evaluated + h.skipped, 500);
    }

    #[test]
    fn rejects_bad_depths() {
        assert!(check_ultrametric(1, 0, 1).is_err());
        assert!(check_consistency(1, 16, 0.1, 10, 11, 1).is_err());
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            check_hamming_triples(300, 10, 4).unwrap(),
            check_hamming_triples(300, 10, 4).unwrap()
        );
    }
}
