//! Reference overlap distributions.
//!
//! Paperfolding and alternating laws are exact (dyadic atoms and masses);
//! Sturmian laws are real-valued with one atom and a flat continuous part.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};

/// `γ = 2 / (1 + √5) = (√5 − 1) / 2`.
pub const GOLDEN_GAMMA: f64 = 0.618_033_988_749_894_9;

/// Largest truncation depth accepted by [`paperfolding_atoms`]
/// (the atom count doubles with each level).
pub const MAX_EXACT_DEPTH: u32 = 24;

/// Histogram / distribution key for paperfolding overlaps: either an exact
/// value or the reserved bucket for pairs not resolved within the depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapKey {
    Value(DyadicRational),
    Unresolved,
}

/// Pure point law with exact dyadic atoms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactDistribution {
    pub atoms: BTreeMap<DyadicRational, DyadicRational>,
    pub unresolved_mass: DyadicRational,
}

impl ExactDistribution {
    pub fn total_mass(&self) -> DyadicRational {
        self.atoms.values().copied().sum::<DyadicRational>() + self.unresolved_mass
    }

    pub fn atom_mass(&self) -> DyadicRational {
        self.atoms.values().copied().sum()
    }

    pub fn probability(&self, q: DyadicRational) -> DyadicRational {
        self.atoms.get(&q).copied().unwrap_or(DyadicRational::ZERO)
    }

    /// Probabilities keyed for comparison with sampled histograms.
    pub fn to_probabilities(&self) -> BTreeMap<OverlapKey, f64> {
        let mut out: BTreeMap<_, _> = self
            .atoms
            .iter()
            .map(|(v, p)| (OverlapKey::Value(*v), p.to_f64()))
            .collect();
        if !self.unresolved_mass.is_zero() {
            out.insert(OverlapKey::Unresolved, self.unresolved_mass.to_f64());
        }
        out
    }

    /// Whether every atom satisfies the support condition `m / 2^n` with
    /// `n = 0, m = 0` or `n > 0`, `m` odd, `|m| < 2^n`.
    pub fn satisfies_dyadic_support(&self) -> bool {
        self.atoms.keys().all(|q| is_paperfolding_atom(*q))
    }
}

pub fn is_paperfolding_atom(q: DyadicRational) -> bool {
    let n = q.log2_denominator();
    let m = q.numerator();
    if n == 0 {
        m == 0
    } else {
        m % 2 != 0 && m.unsigned_abs() < 1u128 << n
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealAtom {
    pub value: f64,
    pub probability: f64,
}

/// Uniform density on `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuousPart {
    pub density: f64,
    pub lo: f64,
    pub hi: f64,
}

impl ContinuousPart {
    pub fn mass(&self) -> f64 {
        self.density * (self.hi - self.lo)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealDistribution {
    pub atoms: Vec<RealAtom>,
    pub continuous: Option<ContinuousPart>,
    pub unresolved_mass: f64,
}

impl RealDistribution {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.probability).sum::<f64>()
            + self.continuous.map_or(0.0, |c| c.mass())
            + self.unresolved_mass
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OverlapDistribution {
    Exact(ExactDistribution),
    Real(RealDistribution),
}

/// Paperfolding overlap law truncated after `n_max` levels: the atom `0` with
/// mass 1/2 and, for each `1 <= n <= n_max`, the `2^n` atoms `m / 2^n` (odd
/// `m`, `|m| < 2^n`) with mass `2^(-(2n+1))` each. The remaining
/// `2^(-(n_max+1))` is left as unresolved mass.
pub fn paperfolding_atoms(n_max: u32) -> Result<ExactDistribution> {
    if n_max > MAX_EXACT_DEPTH {
        return Err(Error::InvalidParameter(format!(
            "truncation depth {n_max} exceeds {MAX_EXACT_DEPTH}"
        )));
    }
    let mut atoms = BTreeMap::new();
    atoms.insert(DyadicRational::ZERO, DyadicRational::HALF);
    for n in 1..=n_max {
        let p = DyadicRational::pow2_neg(2 * n + 1);
        let bound = 1i128 << n;
        for m in (-bound + 1..bound).step_by(2) {
            atoms.insert(DyadicRational::new(m, n), p);
        }
    }
    Ok(ExactDistribution {
        atoms,
        unresolved_mass: DyadicRational::pow2_neg(n_max + 1),
    })
}

/// Overlap law of the two alternating sequences under equal weights.
pub fn alternating_dist() -> ExactDistribution {
    let atoms = [
        (DyadicRational::ONE, DyadicRational::HALF),
        (DyadicRational::MINUS_ONE, DyadicRational::HALF),
    ]
    .into_iter()
    .collect();
    ExactDistribution {
        atoms,
        unresolved_mass: DyadicRational::ZERO,
    }
}

/// Rotation number and coding-interval length of a Sturmian family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SturmianParams {
    pub alpha: f64,
    pub c: f64,
}

impl SturmianParams {
    pub fn new(alpha: f64, c: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0,1), got {alpha}"
            )));
        }
        if !(c > 0.0 && c < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "c must lie in (0,1), got {c}"
            )));
        }
        Ok(Self { alpha, c })
    }

    /// The Fibonacci case `alpha = c = γ`.
    pub fn fibonacci() -> Self {
        Self {
            alpha: GOLDEN_GAMMA,
            c: GOLDEN_GAMMA,
        }
    }

    /// Overlap value of the atom, `1 − 4 min(c, 1 − c)`.
    pub fn atom_value(&self) -> f64 {
        1.0 - 4.0 * self.c.min(1.0 - self.c)
    }

    /// Atom weight `|2c − 1|`.
    pub fn atom_weight(&self) -> f64 {
        (2.0 * self.c - 1.0).abs()
    }

    /// Phase differences `t` landing on the atom form the open interval
    /// between `c` and `1 − c`.
    pub fn atom_phase_interval(&self) -> (f64, f64) {
        (self.c.min(1.0 - self.c), self.c.max(1.0 - self.c))
    }

    pub fn phase_on_atom(&self, t: f64) -> bool {
        let (lo, hi) = self.atom_phase_interval();
        t > lo && t < hi
    }
}

/// Overlap of two codings of the same rotation whose phases differ by `t`:
/// `1 − 4c + 4 |A ∩ (A + t)|` with `A = [0, c)` on the circle.
pub fn sturmian_q_of_phase(params: &SturmianParams, t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "phase difference must lie in [0,1), got {t}"
        )));
    }
    let c = params.c;
    let intersection = (c - t).max(0.0) + (t - (1.0 - c)).max(0.0);
    Ok(1.0 - 4.0 * c + 4.0 * intersection)
}

/// One atom at `q* = 1 − 4 min(c, 1 − c)` of weight `|2c − 1|` plus density
/// 1/2 on `[q*, 1]`.
pub fn sturmian_dist(params: &SturmianParams) -> RealDistribution {
    let q_star = params.atom_value();
    let weight = params.atom_weight();
    let atoms = if weight > 0.0 {
        vec![RealAtom {
            value: q_star,
            probability: weight,
        }]
    } else {
        Vec::new()
    };
    RealDistribution {
        atoms,
        continuous: Some(ContinuousPart {
            density: 0.5,
            lo: q_star,
            hi: 1.0,
        }),
        unresolved_mass: 0.0,
    }
}
