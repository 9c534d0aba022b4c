//! Finite windows of the sequence families: paperfolding, alternating,
//! Thue–Morse, period-doubling and Sturmian rotation codings.
//!
//! A paperfolding sequence is built level by level. Level `m` sees the
//! residual lattice `a_m + 2^(m-1) Z` of still-empty sites; writing a site as
//! `a_m + 2^(m-1) j`, the choice `k_m` fills every site with `j ≡ k_m (mod 2)`,
//! with `+1` when `j ≡ k_m (mod 4)` and `-1` when `j ≡ k_m + 2 (mod 4)`. The
//! other half becomes the next residual lattice, so
//! `a_{m+1} = a_m + 2^(m-1) (k_m + 1)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deepest supported choice prefix. Offsets `a_m` and overlap partial sums
/// must fit in `i128`.
pub const MAX_DEPTH: usize = 120;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Plus,
    Minus,
}

impl Spin {
    pub fn value(self) -> i8 {
        match self {
            Spin::Plus => 1,
            Spin::Minus => -1,
        }
    }

    pub fn from_sign(plus: bool) -> Self {
        if plus {
            Spin::Plus
        } else {
            Spin::Minus
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Spin::Plus => Spin::Minus,
            Spin::Minus => Spin::Plus,
        }
    }
}

/// The hierarchical parameters `k_1, k_2, ...` of a paperfolding sequence.
///
/// Entries are stored as given, in `1..=4`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct ChoiceSequence {
    choices: Vec<u8>,
}

impl ChoiceSequence {
    pub fn new(choices: Vec<i64>) -> Result<Self> {
        if choices.is_empty() {
            return Err(Error::EmptyChoices);
        }
        if choices.len() > MAX_DEPTH {
            return Err(Error::DepthTooLarge(choices.len()));
        }
        let choices = choices
            .into_iter()
            .enumerate()
            .map(|(i, k)| {
                if (1..=4).contains(&k) {
                    Ok(k as u8)
                } else {
                    Err(Error::InvalidChoice {
                        level: i + 1,
                        value: k,
                    })
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { choices })
    }

    /// Maps arbitrary integers to their representatives in `1..=4`.
    pub fn from_residues<I: IntoIterator<Item = i64>>(residues: I) -> Result<Self> {
        Self::new(
            residues
                .into_iter()
                .map(|k| (k - 1).rem_euclid(4) + 1)
                .collect(),
        )
    }

    /// `depth` i.i.d. uniform choices.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, depth: usize) -> Self {
        assert!(
            (1..=MAX_DEPTH).contains(&depth),
            "depth {depth} out of range"
        );
        let mut choices = Vec::with_capacity(depth);
        while choices.len() < depth {
            let mut bits: u64 = rng.gen();
            for _ in 0..32.min(depth - choices.len()) {
                choices.push((bits & 3) as u8 + 1);
                bits >>= 2;
            }
        }
        Self { choices }
    }

    pub fn depth(&self) -> usize {
        self.choices.len()
    }

    pub fn choices(&self) -> &[u8] {
        &self.choices
    }

    /// Choice at level `m` (1-based).
    pub fn level(&self, m: usize) -> u8 {
        self.choices[m - 1]
    }

    pub fn truncated(&self, depth: usize) -> Self {
        assert!(depth >= 1);
        Self {
            choices: self.choices[..depth.min(self.depth())].to_vec(),
        }
    }

    /// Residual-lattice states for levels `1..=depth`.
    pub fn fill_states(&self) -> Vec<FillState> {
        let mut out = Vec::with_capacity(self.depth());
        let mut state = FillState::initial();
        for &k in &self.choices {
            out.push(state);
            state = state.advance(k);
        }
        out
    }
}

impl fmt::Debug for ChoiceSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChoiceSequence({self})")
    }
}

impl fmt::Display for ChoiceSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.choices.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl FromStr for ChoiceSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parsed = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::Parse(format!("bad choice {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parsed)
    }
}

impl TryFrom<Vec<i64>> for ChoiceSequence {
    type Error = Error;
    fn try_from(v: Vec<i64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ChoiceSequence> for Vec<i64> {
    fn from(c: ChoiceSequence) -> Self {
        c.choices.into_iter().map(i64::from).collect()
    }
}

/// Residual lattice `offset + 2^(level-1) Z` seen at a given level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FillState {
    pub offset: i128,
    pub level: u32,
}

impl FillState {
    pub fn initial() -> Self {
        Self {
            offset: 0,
            level: 1,
        }
    }

    pub fn spacing(&self) -> i128 {
        1i128 << (self.level - 1)
    }

    /// State after level `self.level` was filled with choice `k`.
    pub fn advance(self, k: u8) -> Self {
        Self {
            offset: self.offset + self.spacing() * (i128::from(k) + 1),
            level: self.level + 1,
        }
    }

    /// Sign placed at `site` by choice `k` at this level, if the site is filled
    /// here. The site must lie on this level's residual lattice.
    fn place(&self, site: i128, k: u8) -> Option<Spin> {
        let diff = site - self.offset;
        debug_assert_eq!(diff.rem_euclid(self.spacing()), 0);
        let j = diff >> (self.level - 1);
        match (j - i128::from(k)).rem_euclid(4) {
            0 => Some(Spin::Plus),
            2 => Some(Spin::Minus),
            _ => None,
        }
    }
}

/// A filled site: the level that filled it and the sign placed there.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fill {
    pub level: u32,
    pub spin: Spin,
}

fn probe(states: &[FillState], choices: &[u8], site: i64) -> Option<Fill> {
    let site = i128::from(site);
    for (state, &k) in states.iter().zip(choices) {
        if let Some(spin) = state.place(site, k) {
            return Some(Fill {
                level: state.level,
                spin,
            });
        }
    }
    None
}

/// Level and sign of a single paperfolding site; `None` when the site is not
/// filled within the available depth.
pub fn fill_level(choices: &ChoiceSequence, site: i64) -> Option<Fill> {
    probe(&choices.fill_states(), choices.choices(), site)
}

/// A finite window of `±1` values over consecutive integer sites.
///
/// Unresolved sites are stored as `0`. Fill levels are recorded only for
/// hierarchically built families (paperfolding); level `0` marks an absent
/// level.
#[derive(Clone, PartialEq, Eq)]
pub struct SpinWindow {
    start: i64,
    values: Vec<i8>,
    fill_levels: Option<Vec<u8>>,
}

impl SpinWindow {
    fn plain(start: i64, values: Vec<i8>) -> Self {
        Self {
            start,
            values,
            fill_levels: None,
        }
    }

    /// Parses a `+`/`-`/`?` string.
    pub fn from_sign_string(start: i64, s: &str) -> Result<Self> {
        let values = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                '?' => Ok(0),
                _ => Err(Error::Parse(format!("bad sign character {c:?}"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        if values.is_empty() {
            return Err(Error::EmptyWindow);
        }
        Ok(Self::plain(start, values))
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Raw values: `1`, `-1`, or `0` for unresolved.
    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn get(&self, index: usize) -> Option<Spin> {
        match self.values[index] {
            1 => Some(Spin::Plus),
            -1 => Some(Spin::Minus),
            _ => None,
        }
    }

    pub fn at_site(&self, site: i64) -> Option<Spin> {
        let idx = usize::try_from(site - self.start).ok()?;
        if idx < self.len() {
            self.get(idx)
        } else {
            None
        }
    }

    /// Fill level of the site at `index`; `None` if unresolved or the family
    /// has no levels.
    pub fn fill_level(&self, index: usize) -> Option<u32> {
        self.fill_levels
            .as_ref()
            .and_then(|l| (l[index] != 0).then_some(u32::from(l[index])))
    }

    pub fn has_fill_levels(&self) -> bool {
        self.fill_levels.is_some()
    }

    pub fn unresolved_count(&self) -> usize {
        self.values.iter().filter(|&&v| v == 0).count()
    }

    pub fn negated(&self) -> Self {
        Self {
            start: self.start,
            values: self.values.iter().map(|v| -v).collect(),
            fill_levels: self.fill_levels.clone(),
        }
    }

    /// The same values relabelled to begin at `start`.
    pub fn relabelled(mut self, start: i64) -> Self {
        self.start = start;
        self
    }

    pub fn to_sign_string(&self) -> String {
        self.values
            .iter()
            .map(|v| match v {
                1 => '+',
                -1 => '-',
                _ => '?',
            })
            .collect()
    }
}

impl fmt::Debug for SpinWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SpinWindow(start={}, {})",
            self.start,
            self.to_sign_string()
        )
    }
}

fn check_length(length: usize) -> Result<()> {
    if length == 0 {
        Err(Error::EmptyWindow)
    } else {
        Ok(())
    }
}

fn checked_end(start: i64, length: usize) -> Result<()> {
    i64::try_from(length)
        .ok()
        .and_then(|l| start.checked_add(l))
        .map(|_| ())
        .ok_or(Error::IndexOverflow {
            offset: start as u64,
            length: length as u64,
        })
}

/// Paperfolding window over `[start, start + length)`.
pub fn paperfold_window(choices: &ChoiceSequence, start: i64, length: usize) -> Result<SpinWindow> {
    check_length(length)?;
    checked_end(start, length)?;
    let states = choices.fill_states();
    let mut values = Vec::with_capacity(length);
    let mut levels = Vec::with_capacity(length);
    for site in start..start + length as i64 {
        match probe(&states, choices.choices(), site) {
            Some(fill) => {
                values.push(fill.spin.value());
                levels.push(fill.level as u8);
            }
            None => {
                values.push(0);
                levels.push(0);
            }
        }
    }
    Ok(SpinWindow {
        start,
        values,
        fill_levels: Some(levels),
    })
}

/// One of the two alternating sequences: `+1` at `s` iff `s ≡ phase (mod 2)`.
pub fn alternating_window(phase: u8, start: i64, length: usize) -> Result<SpinWindow> {
    if phase > 1 {
        return Err(Error::InvalidParameter(format!(
            "phase must be 0 or 1, got {phase}"
        )));
    }
    check_length(length)?;
    checked_end(start, length)?;
    let values = (start..start + length as i64)
        .map(|s| {
            if s.rem_euclid(2) == i64::from(phase) {
                1
            } else {
                -1
            }
        })
        .collect();
    Ok(SpinWindow::plain(start, values))
}

/// Thue–Morse sign at index `n`: `+1` iff the binary digit sum is even.
#[inline]
pub fn thue_morse_sign(n: u64) -> i8 {
    1 - 2 * (n.count_ones() & 1) as i8
}

pub fn thue_morse_window(offset: u64, length: usize) -> Result<SpinWindow> {
    check_length(length)?;
    let overflow = Error::IndexOverflow {
        offset,
        length: length as u64,
    };
    let end = offset.checked_add(length as u64).ok_or(overflow.clone())?;
    let start = i64::try_from(offset).map_err(|_| overflow.clone())?;
    i64::try_from(end).map_err(|_| overflow)?;
    let values = (offset..end).map(thue_morse_sign).collect();
    Ok(SpinWindow::plain(start, values))
}

/// Period-doubling sign at index `n` of the fixed point of `a -> ab, b -> aa`
/// with `a = +1`: the letter is `b` exactly when the 2-adic valuation of
/// `n + 1` is odd.
#[inline]
pub fn period_doubling_sign(n: u64) -> i8 {
    if (n + 1).trailing_zeros() % 2 == 1 {
        -1
    } else {
        1
    }
}

/// Prefix of the period-doubling fixed point starting at index 0.
pub fn period_doubling_window(length: usize) -> Result<SpinWindow> {
    period_doubling_window_at(0, length)
}

/// Period-doubling window over `[offset, offset + length)`.
pub fn period_doubling_window_at(offset: u64, length: usize) -> Result<SpinWindow> {
    check_length(length)?;
    let overflow = Error::IndexOverflow {
        offset,
        length: length as u64,
    };
    let end = offset
        .checked_add(length as u64)
        .filter(|&e| e < i64::MAX as u64)
        .ok_or(overflow)?;
    Ok(SpinWindow::plain(
        offset as i64,
        (offset..end).map(period_doubling_sign).collect(),
    ))
}

/// Sign of a rotation coding: `+1` iff `frac(i·alpha + beta) ∈ [0, c)`.
#[inline]
pub fn rotation_sign(alpha: f64, c: f64, beta: f64, i: i64) -> i8 {
    let x = (i as f64 * alpha + beta).rem_euclid(1.0);
    if x < c {
        1
    } else {
        -1
    }
}

pub fn sturmian_window(
    alpha: f64,
    c: f64,
    beta: f64,
    start: i64,
    length: usize,
) -> Result<SpinWindow> {
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
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!(
            "beta must lie in [0,1), got {beta}"
        )));
    }
    check_length(length)?;
    checked_end(start, length)?;
    let values = (start..start + length as i64)
        .map(|i| rotation_sign(alpha, c, beta, i))
        .collect();
    Ok(SpinWindow::plain(start, values))
}

/// Whether `alpha` is (numerically) a rational with denominator at most
/// `max_den`, in which case its rotation coding is periodic.
pub fn looks_rational(alpha: f64, max_den: u64) -> bool {
    (1..=max_den).any(|q| {
        let x = alpha * q as f64;
        (x - x.round()).abs() < 1e-12 * q as f64
    })
}
