//! Reproducible Monte Carlo samplers.
//!
//! Work is cut into fixed-size chunks; chunk `i` draws from ChaCha8 seeded
//! with the run seed on stream `i`. Chunk results are merged in chunk order,
//! so output depends only on the seed and never on the thread schedule.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{OverlapKey, SturmianParams};
use crate::error::{Error, Result};
use crate::overlap::{
    overlap_exact, overlap_from_relations, window_overlap, LevelRelation, OverlapResult,
};
use crate::seq::{
    alternating_window, period_doubling_window_at, sturmian_window, thue_morse_window,
    ChoiceSequence, SpinWindow, MAX_DEPTH,
};
use crate::stats::{frequencies, ks_statistic, median, PiecewiseLinearCdf};

/// Samples per chunk.
pub const CHUNK_SIZE: u64 = 1 << 14;

/// Generator for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Runs `work(rng, count)` on each chunk of `total` samples and returns the
/// per-chunk results in chunk order.
fn chunked<T, F>(total: u64, seed: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    let chunks = total.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK_SIZE.min(total - c * CHUNK_SIZE);
            work(&mut chunk_rng(seed, c), count)
        })
        .collect()
}

/// Exact-value counts with the parameters that produced them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Histogram<K: Ord> {
    pub counts: BTreeMap<K, u64>,
    pub sample_count: u64,
    pub seed: u64,
    pub sampler: String,
    pub params: BTreeMap<String, String>,
}

impl<K: Ord + Clone> Histogram<K> {
    pub fn new(sampler: &str, seed: u64, params: BTreeMap<String, String>) -> Self {
        Self {
            counts: BTreeMap::new(),
            sample_count: 0,
            seed,
            sampler: sampler.into(),
            params,
        }
    }

    pub fn record(&mut self, key: K) {
        *self.counts.entry(key).or_insert(0) += 1;
        self.sample_count += 1;
    }

    fn absorb(&mut self, counts: BTreeMap<K, u64>) {
        for (k, c) in counts {
            *self.counts.entry(k).or_insert(0) += c;
            self.sample_count += c;
        }
    }

    pub fn count(&self, key: &K) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn frequency(&self, key: &K) -> f64 {
        self.count(key) as f64 / self.sample_count as f64
    }

    pub fn frequencies(&self) -> BTreeMap<K, f64> {
        frequencies(&self.counts)
    }
}

impl Histogram<OverlapKey> {
    /// Moves every value deeper than `n_max` (denominator exponent above
    /// `n_max`) into the unresolved bucket.
    pub fn truncated(&self, n_max: u32) -> Self {
        let mut out = Self::new(&self.sampler, self.seed, self.params.clone());
        out.params.insert("truncation".into(), n_max.to_string());
        let mut counts = BTreeMap::new();
        for (k, &c) in &self.counts {
            let key = match k {
                OverlapKey::Value(q) if q.log2_denominator() <= n_max => *k,
                _ => OverlapKey::Unresolved,
            };
            *counts.entry(key).or_insert(0) += c;
        }
        out.absorb(counts);
        out
    }
}

/// Equal-width bins over `[lo, hi]`; the last bin is closed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinnedHistogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub sample_count: u64,
}

impl BinnedHistogram {
    pub fn from_values(
        values: impl IntoIterator<Item = f64>,
        lo: f64,
        hi: f64,
        bins: usize,
    ) -> Self {
        assert!(bins > 0 && hi > lo);
        let mut counts = vec![0u64; bins];
        let mut n = 0;
        for v in values {
            let x = ((v - lo) / (hi - lo) * bins as f64).floor();
            let idx = (x.max(0.0) as usize).min(bins - 1);
            counts[idx] += 1;
            n += 1;
        }
        Self {
            lo,
            hi,
            counts,
            sample_count: n,
        }
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        self.lo + w * (i as f64 + 0.5)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMode {
    /// Draw two full choice sequences and run the exact recursion.
    Choices,
    /// Draw the level relation directly: mismatch 1/2, same 1/4, opposite 1/4.
    Relation,
}

impl FromStr for SamplerMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "choices" => Ok(SamplerMode::Choices),
            "relation" => Ok(SamplerMode::Relation),
            _ => Err(Error::Parse(format!("unknown sampler mode {s:?}"))),
        }
    }
}

impl fmt::Display for SamplerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerMode::Choices => "choices",
            SamplerMode::Relation => "relation",
        })
    }
}

fn overlap_key(r: OverlapResult) -> OverlapKey {
    r.value().map_or(OverlapKey::Unresolved, OverlapKey::Value)
}

fn relation_pair<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> OverlapResult {
    let mut bits: u64 = 0;
    let mut left = 0;
    let relations = std::iter::from_fn(|| {
        if left == 0 {
            bits = rng.gen();
            left = 32;
        }
        let r = match bits & 3 {
            0 | 1 => LevelRelation::Mismatch,
            2 => LevelRelation::Same,
            _ => LevelRelation::Opposite,
        };
        bits >>= 2;
        left -= 1;
        Some(r)
    });
    // Lazy: the fold stops pulling at the first mismatch.
    overlap_from_relations(relations.take(depth), depth as u32)
}

/// Histogram of exact overlaps between `pairs` independent pairs of
/// paperfolding sequences with i.i.d. uniform choices.
pub fn sample_paperfolding(
    pairs: u64,
    seed: u64,
    depth: usize,
    mode: SamplerMode,
) -> Result<Histogram<OverlapKey>> {
    if pairs == 0 {
        return Err(Error::InvalidParameter("pairs must be positive".into()));
    }
    if !(1..=MAX_DEPTH).contains(&depth) {
        return Err(Error::InvalidParameter(format!(
            "depth must lie in 1..={MAX_DEPTH}"
        )));
    }
    let parts = chunked(pairs, seed, |rng, count| {
        let mut counts = BTreeMap::new();
        for _ in 0..count {
            let r = match mode {
                SamplerMode::Choices => {
                    let a = ChoiceSequence::random(rng, depth);
                    let b = ChoiceSequence::random(rng, depth);
                    overlap_exact(&a, &b, 0)
                }
                SamplerMode::Relation => relation_pair(rng, depth),
            };
            *counts.entry(overlap_key(r)).or_insert(0u64) += 1;
        }
        counts
    });
    let params = [
        ("pairs".to_string(), pairs.to_string()),
        ("depth".to_string(), depth.to_string()),
        ("mode".to_string(), mode.to_string()),
    ]
    .into_iter()
    .collect();
    let mut h = Histogram::new("paperfolding", seed, params);
    for p in parts {
        h.absorb(p);
    }
    Ok(h)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlternatingSample {
    pub histogram: Histogram<Ratio<i64>>,
    /// Pairs whose window overlap differs from the exact value (`+1` for
    /// equal phases, `-1` otherwise).
    pub disagreements: u64,
}

/// Random phase pairs of the alternating system on windows of length `window`
/// with random starts.
pub fn sample_alternating(pairs: u64, window: usize, seed: u64) -> Result<AlternatingSample> {
    if pairs == 0 || window == 0 {
        return Err(Error::InvalidParameter(
            "pairs and window must be positive".into(),
        ));
    }
    let parts = chunked(pairs, seed, |rng, count| {
        let mut counts = BTreeMap::new();
        let mut bad = 0u64;
        for _ in 0..count {
            let (p, p2): (u8, u8) = (rng.gen_range(0..2), rng.gen_range(0..2));
            let start = rng.gen_range(-1_000_000i64..1_000_000);
            let w = alternating_window(p, start, window)?;
            let w2 = alternating_window(p2, start, window)?;
            let q = window_overlap(&w, &w2)?;
            let expected = if p == p2 { 1 } else { -1 };
            if q != Ratio::from_integer(expected) {
                bad += 1;
            }
            *counts.entry(q).or_insert(0u64) += 1;
        }
        Ok((counts, bad))
    });
    let params = [
        ("pairs".to_string(), pairs.to_string()),
        ("window".to_string(), window.to_string()),
    ]
    .into_iter()
    .collect();
    let mut histogram = Histogram::new("alternating", seed, params);
    let mut disagreements = 0;
    for part in parts {
        let (counts, bad) = part?;
        histogram.absorb(counts);
        disagreements += bad;
    }
    Ok(AlternatingSample {
        histogram,
        disagreements,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LagFamily {
    ThueMorse,
    PeriodDoubling,
}

impl LagFamily {
    fn window(self, offset: u64, length: usize) -> Result<SpinWindow> {
        match self {
            LagFamily::ThueMorse => thue_morse_window(offset, length),
            LagFamily::PeriodDoubling => period_doubling_window_at(offset, length),
        }
    }
}

/// Overlap of a family's window `[0, N)` with its translate by `lag`.
pub fn lag_overlap(family: LagFamily, lag: u64, window: usize) -> Result<Ratio<i64>> {
    let base = family.window(0, window)?;
    let shifted = family.window(lag, window)?.relabelled(0);
    window_overlap(&base, &shifted)
}

/// Lag-translate overlaps of a single sequence with itself.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LagSample {
    pub family: LagFamily,
    pub window: usize,
    pub max_lag: u64,
    pub seed: u64,
    pub lags: Vec<u64>,
    pub overlaps: Vec<Ratio<i64>>,
    /// Set for families without a reference law.
    pub exploratory: bool,
}

impl LagSample {
    pub fn values(&self) -> Vec<f64> {
        self.overlaps
            .iter()
            .map(|q| *q.numer() as f64 / *q.denom() as f64)
            .collect()
    }

    pub fn mean_q2(&self) -> f64 {
        let v = self.values();
        v.iter().map(|q| q * q).sum::<f64>() / v.len() as f64
    }

    pub fn median_abs_q(&self) -> f64 {
        median(&self.values().iter().map(|q| q.abs()).collect::<Vec<_>>())
    }

    pub fn histogram(&self) -> Histogram<Ratio<i64>> {
        let params = [
            ("lags".to_string(), self.lags.len().to_string()),
            ("window".to_string(), self.window.to_string()),
            ("max_lag".to_string(), self.max_lag.to_string()),
        ]
        .into_iter()
        .collect();
        let name = match self.family {
            LagFamily::ThueMorse => "thue-morse",
            LagFamily::PeriodDoubling => "period-doubling",
        };
        let mut h = Histogram::new(name, self.seed, params);
        for q in &self.overlaps {
            h.record(*q);
        }
        h
    }
}

fn sample_lags(
    family: LagFamily,
    lags: u64,
    window: usize,
    max_lag: u64,
    seed: u64,
) -> Result<LagSample> {
    if lags == 0 || window == 0 {
        return Err(Error::InvalidParameter(
            "lags and window must be positive".into(),
        ));
    }
    if max_lag < window as u64 {
        return Err(Error::InvalidParameter(format!(
            "max lag {max_lag} must be much larger than the window {window}"
        )));
    }
    let base = family.window(0, window)?;
    let parts = chunked(lags, seed, |rng, count| {
        (0..count)
            .map(|_| {
                let lag = rng.gen_range(1..=max_lag);
                let shifted = family.window(lag, window)?.relabelled(0);
                Ok((lag, window_overlap(&base, &shifted)?))
            })
            .collect::<Result<Vec<_>>>()
    });
    let mut all = Vec::with_capacity(lags as usize);
    for p in parts {
        all.extend(p?);
    }
    let (lags, overlaps) = all.into_iter().unzip();
    Ok(LagSample {
        family,
        window,
        max_lag,
        seed,
        lags,
        overlaps,
        exploratory: family == LagFamily::PeriodDoubling,
    })
}

/// Thue–Morse overlaps against uniformly random translates in `[1, max_lag]`.
pub fn sample_thue_morse(lags: u64, window: usize, max_lag: u64, seed: u64) -> Result<LagSample> {
    sample_lags(LagFamily::ThueMorse, lags, window, max_lag, seed)
}

/// Period-doubling counterpart of [`sample_thue_morse`]; no reference law.
pub fn sample_period_doubling(
    lags: u64,
    window: usize,
    max_lag: u64,
    seed: u64,
) -> Result<LagSample> {
    sample_lags(LagFamily::PeriodDoubling, lags, window, max_lag, seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SturmianPair {
    pub beta: f64,
    pub beta2: f64,
    /// Phase difference `(beta − beta2) mod 1`.
    pub t: f64,
    pub q_closed: f64,
    /// Finite-window overlap, present for audited pairs.
    pub q_window: Option<f64>,
}

impl SturmianPair {
    pub fn residual(&self) -> Option<f64> {
        self.q_window.map(|q| (q - self.q_closed).abs())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SturmianSample {
    pub params: SturmianParams,
    pub window: usize,
    pub seed: u64,
    pub pairs: Vec<SturmianPair>,
}

impl SturmianSample {
    /// Fraction of pairs whose phase difference lands on the atom.
    pub fn atom_mass(&self) -> f64 {
        let hits = self
            .pairs
            .iter()
            .filter(|p| self.params.phase_on_atom(p.t))
            .count();
        hits as f64 / self.pairs.len() as f64
    }

    /// Closed-form overlaps of the pairs off the atom.
    pub fn continuous_values(&self) -> Vec<f64> {
        self.pairs
            .iter()
            .filter(|p| !self.params.phase_on_atom(p.t))
            .map(|p| p.q_closed)
            .collect()
    }

    /// KS distance of the continuous values to `Uniform[q*, 1]`.
    pub fn ks_continuous(&self) -> Result<f64> {
        let cdf = PiecewiseLinearCdf::uniform(self.params.atom_value(), 1.0)?;
        ks_statistic(&self.continuous_values(), &cdf)
    }

    pub fn max_residual(&self) -> Option<f64> {
        self.pairs
            .iter()
            .filter_map(|p| p.residual())
            .reduce(f64::max)
    }

    pub fn audited(&self) -> usize {
        self.pairs.iter().filter(|p| p.q_window.is_some()).count()
    }

    pub fn histogram(&self, bins: usize) -> BinnedHistogram {
        BinnedHistogram::from_values(self.pairs.iter().map(|p| p.q_closed), -1.0, 1.0, bins)
    }
}

/// Finite-window overlap of two codings of the same rotation over `[0, N)`.
pub fn sturmian_window_overlap(
    params: &SturmianParams,
    beta: f64,
    beta2: f64,
    window: usize,
) -> Result<f64> {
    let w = sturmian_window(params.alpha, params.c, beta, 0, window)?;
    let w2 = sturmian_window(params.alpha, params.c, beta2, 0, window)?;
    let q = window_overlap(&w, &w2)?;
    Ok(*q.numer() as f64 / *q.denom() as f64)
}

/// Uniform phase pairs with their closed-form overlaps; the first `audit`
/// pairs are also measured on a window of length `window`.
pub fn sample_sturmian(
    params: SturmianParams,
    pairs: u64,
    window: usize,
    audit: u64,
    seed: u64,
) -> Result<SturmianSample> {
    if pairs == 0 || window == 0 {
        return Err(Error::InvalidParameter(
            "pairs and window must be positive".into(),
        ));
    }
    let parts = chunked(pairs, seed, |rng, count| {
        (0..count)
            .map(|_| {
                let beta: f64 = rng.gen();
                let beta2: f64 = rng.gen();
                let t = (beta - beta2).rem_euclid(1.0);
                // rem_euclid can round up to exactly 1.0 for tiny negatives.
                let t = if t >= 1.0 { 0.0 } else { t };
                let q_closed = crate::dist::sturmian_q_of_phase(&params, t)?;
                Ok(SturmianPair {
                    beta,
                    beta2,
                    t,
                    q_closed,
                    q_window: None,
                })
            })
            .collect::<Result<Vec<_>>>()
    });
    let mut all = Vec::with_capacity(pairs as usize);
    for p in parts {
        all.extend(p?);
    }
    let n_audit = audit.min(pairs) as usize;
    let audited = all[..n_audit]
        .par_iter()
        .map(|p| sturmian_window_overlap(&params, p.beta, p.beta2, window))
        .collect::<Result<Vec<_>>>()?;
    for (p, q) in all.iter_mut().zip(audited) {
        p.q_window = Some(q);
    }
    Ok(SturmianSample {
        params,
        window,
        seed,
        pairs: all,
    })
}
