//! δ-separated sets on the dyadic grid: covering numbers, ball counts,
//! Frostman (non-concentration) profiling, and multiscale doubling tables.
//!
//! A [`DiscretizedSet`] stores strictly increasing grid indices. Primary sets
//! live in [0,1] (indices 0..=2^m); derived sets (differences, shifted sets)
//! are stored with an explicit integer offset so the in-memory index list is
//! always non-negative — one representation for every set kind.

use crate::error::{Error, Result};
use crate::scale::{div_floor, rat, rat_pow2, rat_to_f64, Rat, Scale};

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// DiscretizedSet
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

/// A finite set of grid points x = i·δ, held as sorted distinct indices.
///
/// `index(k) = offset + rel[k]`; the offset is 0 for sets contained in
/// [0, +∞) and the (negative) minimum index otherwise. Equality compares
/// scale and absolute indices, which the normalization makes canonical.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DiscretizedSet {
    scale: Scale,
    offset: i64,
    rel: Vec<u64>,
}

/// Guard against index magnitudes that could overflow downstream arithmetic.
/// Far looser than anything reachable from unit-range sets (|i| ≤ 2^25 after
/// one difference), but it keeps hand-constructed inputs honest.
const MAX_ABS_INDEX: i64 = 1 << 40;

impl DiscretizedSet {
    /// Build from arbitrary absolute indices: sorts, deduplicates, and
    /// normalizes the offset. Accepts any values with |i| ≤ 2^40.
    pub fn from_indices<I>(scale: Scale, indices: I) -> Result<Self>
    where
        I: IntoIterator<Item = i64>,
    {
        let mut idx: Vec<i64> = indices.into_iter().collect();
        for &i in &idx {
            if i.abs() > MAX_ABS_INDEX {
                return Err(Error::IndexRange {
                    index: i,
                    m: scale.m(),
                    lo: -MAX_ABS_INDEX,
                    hi: MAX_ABS_INDEX,
                });
            }
        }
        idx.sort_unstable();
        idx.dedup();
        let offset = idx.first().map_or(0, |&first| first.min(0));
        let rel = idx.into_iter().map(|i| (i - offset) as u64).collect();
        Ok(DiscretizedSet { scale, offset, rel })
    }

    /// Build a primary set: every index must satisfy 0 ≤ i ≤ 2^m.
    pub fn from_unit_indices<I>(scale: Scale, indices: I) -> Result<Self>
    where
        I: IntoIterator<Item = i64>,
    {
        let set = Self::from_indices(scale, indices)?;
        set.require_unit_range()?;
        Ok(set)
    }

    pub fn empty(scale: Scale) -> Self {
        DiscretizedSet { scale, offset: 0, rel: Vec::new() }
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    /// The recorded representation offset (0 unless the set has negative indices).
    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.rel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rel.is_empty()
    }

    /// Absolute grid index of the k-th element (ascending order).
    pub fn index(&self, k: usize) -> i64 {
        self.offset + self.rel[k] as i64
    }

    pub fn indices(&self) -> impl ExactSizeIterator<Item = i64> + '_ {
        self.rel.iter().map(move |&r| self.offset + r as i64)
    }

    pub fn to_index_vec(&self) -> Vec<i64> {
        self.indices().collect()
    }

    pub fn min_index(&self) -> Option<i64> {
        self.rel.first().map(|&r| self.offset + r as i64)
    }

    pub fn max_index(&self) -> Option<i64> {
        self.rel.last().map(|&r| self.offset + r as i64)
    }

    /// Element value x_k = index(k)·δ as an exact rational.
    pub fn value(&self, k: usize) -> Rat {
        rat(i128::from(self.index(k)), 1) * self.scale.delta()
    }

    pub fn contains_index(&self, index: i64) -> bool {
        index
            .checked_sub(self.offset)
            .and_then(|d| u64::try_from(d).ok())
            .is_some_and(|r| self.rel.binary_search(&r).is_ok())
    }

    /// True iff all values lie in [0,1] (indices 0..=2^m).
    pub fn is_unit_range(&self) -> bool {
        match (self.min_index(), self.max_index()) {
            (Some(lo), Some(hi)) => lo >= 0 && hi <= self.scale.cells(),
            _ => true,
        }
    }

    pub fn require_unit_range(&self) -> Result<()> {
        if self.is_unit_range() {
            return Ok(());
        }
        let bad = self
            .indices()
            .find(|&i| i < 0 || i > self.scale.cells())
            .expect("non-unit set has an offending index");
        Err(Error::IndexRange { index: bad, m: self.scale.m(), lo: 0, hi: self.scale.cells() })
    }

    /// Translate by an integer number of grid steps.
    pub fn translate(&self, shift: i64) -> Result<Self> {
        Self::from_indices(self.scale, self.indices().map(|i| i + shift))
    }

    /// Keep only elements with value in [lo, hi] (inclusive, exact).
    pub fn restrict(&self, lo: Rat, hi: Rat) -> Result<Self> {
        let delta = self.scale.delta();
        Self::from_indices(
            self.scale,
            self.indices().filter(|&i| {
                let v = Rat::from_integer(i128::from(i)) * delta;
                v >= lo && v <= hi
            }),
        )
    }

    /// Union of two sets on the same scale.
    pub fn union(&self, other: &DiscretizedSet) -> Result<Self> {
        self.scale.same_as(other.scale)?;
        Self::from_indices(self.scale, self.indices().chain(other.indices()))
    }

    /// True iff every element of `self` is an element of `other`.
    pub fn is_subset_of(&self, other: &DiscretizedSet) -> bool {
        self.scale == other.scale && self.indices().all(|i| other.contains_index(i))
    }

    // ── covering numbers ────────────────────────────────────────────────

    /// Covering number at scale t: the number of distinct dyadic-style cells
    /// [j·t, (j+1)·t) hit by the set. This cell count is the working
    /// definition of |X|_t everywhere in the crate; it is within a factor 2
    /// of the minimal interval cover and is exactly what makes the
    /// energy/covering Cauchy–Schwarz inequality hold with constant 1.
    pub fn covering_number(&self, t: Rat) -> u64 {
        covering_count(self.indices().map(i128::from), i128::from(self.scale.cells()), t)
    }

    /// Exact count of elements with |x − center| ≤ radius (closed ball).
    pub fn ball_count(&self, center: Rat, radius: Rat) -> u64 {
        if self.is_empty() || radius < Rat::from_integer(0) {
            return 0;
        }
        // Index bounds: ceil((c−r)·2^m) ≤ i ≤ floor((c+r)·2^m).
        let cells = Rat::from_integer(i128::from(self.scale.cells()));
        let lo = crate::scale::rat_ceil((center - radius) * cells);
        let hi = crate::scale::rat_floor((center + radius) * cells);
        if lo > hi {
            return 0;
        }
        let lo = lo.clamp(i128::from(i64::MIN), i128::from(i64::MAX)) as i64;
        let hi = hi.clamp(i128::from(i64::MIN), i128::from(i64::MAX)) as i64;
        let a = self.partition_below(lo);
        let b = self.partition_below(hi + 1);
        (b - a) as u64
    }

    /// Number of elements with index < bound.
    fn partition_below(&self, bound: i64) -> usize {
        self.rel
            .partition_point(|&r| (self.offset + r as i64) < bound)
    }

    /// Exact maximum of |X ∩ B(x, radius)| over all centers x ∈ ℝ, with a
    /// witness center. Computed by sliding a window over the sorted
    /// elements: the best closed ball captures a maximal run x_i..x_j with
    /// x_j − x_i ≤ 2·radius, and the midpoint of that run's endpoints is a
    /// maximizing center. (Scanning only elements and consecutive midpoints
    /// misses runs whose endpoints are not adjacent, so we do it exactly.)
    pub fn max_ball_count(&self, radius: Rat) -> Option<(u64, Rat)> {
        if self.is_empty() {
            return None;
        }
        // Window in index units: x_j − x_i ≤ 2r ⟺ idx_j − idx_i ≤ 2r·2^m.
        let w = crate::scale::rat_floor(
            radius * Rat::from_integer(2) * Rat::from_integer(i128::from(self.scale.cells())),
        );
        let idx = self.to_index_vec();
        let mut best = (0u64, 0usize, 0usize);
        let mut lo = 0usize;
        for j in 0..idx.len() {
            while i128::from(idx[j]) - i128::from(idx[lo]) > w {
                lo += 1;
            }
            let count = (j - lo + 1) as u64;
            if count > best.0 {
                best = (count, lo, j);
            }
        }
        let center = (Rat::from_integer(i128::from(idx[best.1]))
            + Rat::from_integer(i128::from(idx[best.2])))
            / Rat::from_integer(2)
            * self.scale.delta();
        Some((best.0, center))
    }
}

/// Shared covering kernel: values v/den (den > 0), indices ascending.
/// Counts distinct floor((v/den)/t) cells; works for negative values too.
pub(crate) fn covering_count<I>(values: I, den: i128, t: Rat) -> u64
where
    I: IntoIterator<Item = i128>,
{
    assert!(t > Rat::from_integer(0), "covering scale must be positive");
    // floor((v/den)/(tn/td)) = floor(v·td / (den·tn)).
    let q = den * t.numer();
    let mut count = 0u64;
    let mut last: Option<i128> = None;
    for v in values {
        let cell = div_floor(v * t.denom(), q);
        if last != Some(cell) {
            count += 1;
            last = Some(cell);
        }
    }
    count
}

/// Covering number of an ascending list of exact rationals at scale t.
pub fn covering_number_rationals(values: &[Rat], t: Rat) -> u64 {
    assert!(t > Rat::from_integer(0), "covering scale must be positive");
    let mut count = 0u64;
    let mut last: Option<i128> = None;
    for &v in values {
        // floor(v/t) with v = p/q: floor(p·td / (q·tn)).
        let cell = div_floor(v.numer() * t.denom(), v.denom() * t.numer());
        if last != Some(cell) {
            count += 1;
            last = Some(cell);
        }
    }
    count
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Frostman profile
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

/// One row of a [`FrostmanProfile`]: worst-case ball statistics at radius
/// r = 2^(−log_radius).
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct FrostmanRow {
    pub log_radius: u32,
    pub worst_count: u64,
    pub worst_center: f64,
    /// worst_count / (r^σ · |X|) at the profile's nominal σ.
    pub ratio: f64,
}

/// Non-concentration profile of a set: for each dyadic radius in range, the
/// exact worst-case ball count, the ratio against r^σ|X| at the nominal σ,
/// and the best exponent the set certifies under a supplied ratio cap.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct FrostmanProfile {
    pub sigma: f64,
    pub set_len: u64,
    pub rows: Vec<FrostmanRow>,
    /// sup over rows of worst_count / (r^σ |X|); this is the constant "M"
    /// multiplying r^σ|X| in the non-concentration condition.
    pub max_ratio: f64,
    /// Largest σ′ with worst_count ≤ cap · r^σ′ · |X| across all rows with
    /// r < 1 (the r = 1 row never constrains once cap ≥ 1).
    pub best_exponent: f64,
    pub cap: f64,
}

/// Default certification cap for [`frostman_profile`]; generated families
/// are designed to pass their nominal exponent within this constant.
pub const DEFAULT_FROSTMAN_CAP: f64 = 8.0;

/// Profile `x` over all dyadic radii r = 2^(−l) with r_min ≤ r ≤ r_max.
/// Both bounds must be exact powers of two in [δ, 1].
pub fn frostman_profile(
    x: &DiscretizedSet,
    sigma: f64,
    r_min: Rat,
    r_max: Rat,
    cap: f64,
) -> Result<FrostmanProfile> {
    if x.is_empty() {
        return Err(Error::EmptySet("frostman_profile"));
    }
    if !(cap >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "cap",
            reason: format!("must be ≥ 1, got {cap}"),
        });
    }
    let l_hi = dyadic_log_or_err(r_min, "r_min")?;
    let l_lo = dyadic_log_or_err(r_max, "r_max")?;
    if l_lo > l_hi || l_hi > x.scale().m() {
        return Err(Error::InvalidParameter {
            name: "r_min/r_max",
            reason: format!(
                "need δ ≤ r_min ≤ r_max ≤ 1 (got 2^-{l_hi} .. 2^-{l_lo} at m={})",
                x.scale().m()
            ),
        });
    }
    let n = x.len() as f64;
    let mut rows = Vec::with_capacity((l_hi - l_lo + 1) as usize);
    let mut max_ratio = 0.0f64;
    let mut best_exponent = f64::INFINITY;
    for l in l_lo..=l_hi {
        let r = rat_pow2(-(l as i32));
        let (worst_count, center) = x
            .max_ball_count(r)
            .expect("nonempty set has a worst ball");
        let ratio = worst_count as f64 / ((-(l as f64) * sigma).exp2() * n);
        max_ratio = max_ratio.max(ratio);
        if l >= 1 {
            // worst_count ≤ cap·2^(−lσ′)·n ⟺ σ′ ≤ log2(cap·n/worst_count)/l.
            let bound = (cap * n / worst_count as f64).log2() / l as f64;
            best_exponent = best_exponent.min(bound);
        }
        rows.push(FrostmanRow {
            log_radius: l,
            worst_count,
            worst_center: rat_to_f64(center),
            ratio,
        });
    }
    if !best_exponent.is_finite() {
        // Range was the single row r = 1; nothing constrains the exponent.
        best_exponent = 0.0;
    }
    Ok(FrostmanProfile {
        sigma,
        set_len: x.len() as u64,
        rows,
        max_ratio,
        best_exponent,
        cap,
    })
}

/// Convenience: profile over the full dyadic range [δ, 1].
pub fn frostman_profile_full(x: &DiscretizedSet, sigma: f64) -> Result<FrostmanProfile> {
    frostman_profile(x, sigma, x.scale().delta(), Rat::from_integer(1), DEFAULT_FROSTMAN_CAP)
}

/// Max over rows of worst_count/(r^σ|X|) for an arbitrary exponent σ,
/// recomputed from the stored counts (used to re-certify profiles).
pub fn profile_max_ratio(profile: &FrostmanProfile, sigma: f64) -> f64 {
    profile
        .rows
        .iter()
        .map(|row| row.worst_count as f64 / ((-(row.log_radius as f64) * sigma).exp2() * profile.set_len as f64))
        .fold(0.0, f64::max)
}

fn dyadic_log_or_err(r: Rat, name: &'static str) -> Result<u32> {
    crate::scale::dyadic_neg_log2(r).ok_or_else(|| Error::InvalidParameter {
        name,
        reason: format!("{} is not of the form 2^-l", crate::scale::rat_to_string(r)),
    })
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Multiscale doubling profile
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

/// One scale of the doubling table: covering numbers of X and X+X at t.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DoublingRow {
    pub log_t: u32,
    pub sumset_covering: u64,
    pub set_covering: u64,
    pub ratio: f64,
}

/// Covering numbers of X and X+X at every dyadic t from δ up to 1.
/// Measurement only; no structured-subset search happens here.
pub fn multiscale_doubling_profile(x: &DiscretizedSet) -> Result<Vec<DoublingRow>> {
    if x.is_empty() {
        return Err(Error::EmptySet("multiscale_doubling_profile"));
    }
    let xx = crate::arith::sumset(x, x, crate::arith::Sign::Plus)?;
    let m = x.scale().m();
    let mut rows = Vec::with_capacity(m as usize + 1);
    for l in 0..=m {
        let t = rat_pow2(-(l as i32));
        let sumset_covering = xx.covering_number(t);
        let set_covering = x.covering_number(t);
        rows.push(DoublingRow {
            log_t: l,
            sumset_covering,
            set_covering,
            ratio: sumset_covering as f64 / set_covering as f64,
        });
    }
    Ok(rows)
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Tests
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
