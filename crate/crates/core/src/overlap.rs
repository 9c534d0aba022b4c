//! Exact overlaps between paperfolding sequences.
//!
//! Two sequences with choices `k` and `k'` are compared level by level. At
//! level `m` both residual lattices have spacing `2^(m-1)`; `delta_m` is the
//! offset between their indexings (in lattice units). If the two choices
//! select opposite parity classes the sequences decorrelate completely on
//! every site that is still open, so the overlap is final. Otherwise the
//! level contributes `±2^(-m)` and the next offset is
//! `delta_{m+1} = (delta_m + k_m - k'_m) / 2`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::seq::{ChoiceSequence, SpinWindow};

/// Outcome of comparing one level of two choice sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelRelation {
    /// Different parity classes; the overlap is resolved.
    Mismatch,
    /// Same quarter: the level contributes `+2^(-m)`.
    Same,
    /// Opposite quarter: the level contributes `-2^(-m)`.
    Opposite,
}

/// Relative indexing of the two residual lattices at `level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShiftState {
    pub delta: i128,
    pub level: u32,
}

impl ShiftState {
    pub fn new(initial_shift: i64) -> Self {
        Self {
            delta: i128::from(initial_shift),
            level: 1,
        }
    }

    pub fn relation(&self, k: u8, k2: u8) -> LevelRelation {
        let kappa = i128::from(k).rem_euclid(4);
        let kappa2 = (i128::from(k2) - self.delta).rem_euclid(4);
        match (kappa - kappa2).rem_euclid(4) {
            0 => LevelRelation::Same,
            2 => LevelRelation::Opposite,
            _ => LevelRelation::Mismatch,
        }
    }

    /// Next state; only meaningful when the relation at this level is not a
    /// mismatch, which is exactly when the division is exact.
    pub fn advance(self, k: u8, k2: u8) -> Self {
        let num = self.delta + i128::from(k) - i128::from(k2);
        debug_assert_eq!(num.rem_euclid(2), 0);
        Self {
            delta: num.div_euclid(2),
            level: self.level + 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OverlapResult {
    /// Parity mismatch at `resolution_level`; the overlap is exactly `value`.
    Resolved {
        value: DyadicRational,
        resolution_level: u32,
    },
    /// No mismatch within `depth`; the overlap lies within
    /// `partial_sum ± remainder_bound`.
    Undetermined {
        partial_sum: DyadicRational,
        remainder_bound: DyadicRational,
        depth: u32,
    },
}

impl OverlapResult {
    pub fn is_resolved(&self) -> bool {
        matches!(self, OverlapResult::Resolved { .. })
    }

    pub fn value(&self) -> Option<DyadicRational> {
        match *self {
            OverlapResult::Resolved { value, .. } => Some(value),
            OverlapResult::Undetermined { .. } => None,
        }
    }

    pub fn resolution_level(&self) -> Option<u32> {
        match *self {
            OverlapResult::Resolved {
                resolution_level, ..
            } => Some(resolution_level),
            OverlapResult::Undetermined { .. } => None,
        }
    }

    /// Resolved value, or the partial sum of an undetermined result.
    pub fn partial_sum(&self) -> DyadicRational {
        match *self {
            OverlapResult::Resolved { value, .. } => value,
            OverlapResult::Undetermined { partial_sum, .. } => partial_sum,
        }
    }

    /// Closed interval known to contain the true overlap.
    pub fn interval(&self) -> (DyadicRational, DyadicRational) {
        match *self {
            OverlapResult::Resolved { value, .. } => (value, value),
            OverlapResult::Undetermined {
                partial_sum,
                remainder_bound,
                ..
            } => (partial_sum - remainder_bound, partial_sum + remainder_bound),
        }
    }

    /// Distance from `q` to the interval of possible overlaps.
    pub fn residual(&self, q: f64) -> f64 {
        let (lo, hi) = self.interval();
        let (lo, hi) = (lo.to_f64(), hi.to_f64());
        if q < lo {
            lo - q
        } else if q > hi {
            q - hi
        } else {
            0.0
        }
    }
}

/// Level relations of `k` against `k2` until the first mismatch (inclusive)
/// or the common depth.
pub fn level_relations(
    k: &ChoiceSequence,
    k2: &ChoiceSequence,
    initial_shift: i64,
) -> Vec<LevelRelation> {
    let mut state = ShiftState::new(initial_shift);
    let mut out = Vec::new();
    for (&a, &b) in k.choices().iter().zip(k2.choices()) {
        let rel = state.relation(a, b);
        out.push(rel);
        if rel == LevelRelation::Mismatch {
            break;
        }
        state = state.advance(a, b);
    }
    out
}

/// Overlap `lim (1/N) Σ σ_s σ'_{s + initial_shift}` of the sequences generated
/// by `k` and `k2`, compared to the smaller of the two depths.
pub fn overlap_exact(k: &ChoiceSequence, k2: &ChoiceSequence, initial_shift: i64) -> OverlapResult {
    overlap_from_relations(
        level_relations(k, k2, initial_shift),
        k.depth().min(k2.depth()) as u32,
    )
}

/// Folds level relations into an overlap; `depth` is the number of levels
/// that were available.
pub fn overlap_from_relations<I>(relations: I, depth: u32) -> OverlapResult
where
    I: IntoIterator<Item = LevelRelation>,
{
    // Partial sum numerator over 2^level.
    let mut num: i128 = 0;
    let mut level = 0u32;
    for rel in relations {
        level += 1;
        match rel {
            LevelRelation::Mismatch => {
                return OverlapResult::Resolved {
                    value: DyadicRational::new(num, level - 1),
                    resolution_level: level,
                };
            }
            LevelRelation::Same => num = 2 * num + 1,
            LevelRelation::Opposite => num = 2 * num - 1,
        }
    }
    debug_assert_eq!(level, depth);
    OverlapResult::Undetermined {
        partial_sum: DyadicRational::new(num, depth),
        remainder_bound: DyadicRational::pow2_neg(depth),
        depth,
    }
}

/// Choices of the pointwise negation of the sequence generated by `k`.
pub fn flip(k: &ChoiceSequence) -> ChoiceSequence {
    let mut state = ShiftState::new(0);
    let mut out = Vec::with_capacity(k.depth());
    for &a in k.choices() {
        // Opposite quarter relative to the current lattice alignment.
        let target = (i128::from(a) + state.delta + 2 - 1).rem_euclid(4) + 1;
        let b = target as u8;
        debug_assert_eq!(state.relation(a, b), LevelRelation::Opposite);
        out.push(i64::from(b));
        state = state.advance(a, b);
    }
    ChoiceSequence::new(out).expect("flip preserves validity")
}

/// Tree (ultrametric) distance `2^(-m)` where `m` is the first level at which
/// the choices differ; zero if they agree throughout.
pub fn tree_distance(k: &ChoiceSequence, k2: &ChoiceSequence) -> Result<DyadicRational> {
    if k.depth() != k2.depth() {
        return Err(Error::InvalidParameter(format!(
            "tree distance needs equal depths, got {} and {}",
            k.depth(),
            k2.depth()
        )));
    }
    Ok(k.choices()
        .iter()
        .zip(k2.choices())
        .position(|(a, b)| a % 4 != b % 4)
        .map_or(DyadicRational::ZERO, |i| {
            DyadicRational::pow2_neg(i as u32 + 1)
        }))
}

/// Finite-window overlap `(1/N) Σ σ_i σ'_i`.
pub fn window_overlap(w: &SpinWindow, w2: &SpinWindow) -> Result<Ratio<i64>> {
    if w.start() != w2.start() || w.len() != w2.len() {
        return Err(Error::WindowMismatch);
    }
    if w.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let mut sum: i64 = 0;
    for (i, (&a, &b)) in w.values().iter().zip(w2.values()).enumerate() {
        if a == 0 || b == 0 {
            return Err(Error::UnresolvedSite(w.start() + i as i64));
        }
        sum += i64::from(a * b);
    }
    Ok(Ratio::new(sum, w.len() as i64))
}

/// Hamming density `(1 - q) / 2` of disagreeing sites.
pub fn hamming_from_overlap(q: DyadicRational) -> Result<DyadicRational> {
    if q.abs() > DyadicRational::ONE {
        return Err(Error::InvalidParameter(format!(
            "overlap {q} outside [-1, 1]"
        )));
    }
    Ok((DyadicRational::ONE - q).halve_n(1))
}
