//! Exact set arithmetic: sumsets and difference sets, dilations c·B,
//! the mixed values {a + c·b}, affine combinations Σ dᵢ·Xᵢ, and the
//! ratio set R = {(d₁−d₂)/(d₃−d₄)} with its admissibility floor.
//!
//! Everything is integer/rational arithmetic on grid indices; floats appear
//! only in admissibility thresholds of the form 2^(m(1−κ)), which are
//! computed once and then used as exact integer floors.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::gridset::DiscretizedSet;
use crate::multiset::ValueMultiset;
use crate::scale::{rat, Rat};

/// Cap on exhaustive quadruple/triple scans (ratio sets, triple searches).
pub const DEFAULT_ENUM_CAP: u64 = 1 << 26;

/// Cap on Cartesian-product sizes in affine combinations.
pub const DEFAULT_TUPLE_CAP: u64 = 100_000_000;

/// Hard guard on pairwise enumerations (|X|·|Y| values materialized).
const PAIR_GUARD: u64 = 1 << 28;

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Sumsets
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Sign {
    Plus,
    Minus,
}

/// Exact X ± Y on the shared grid. Sums of grid points stay on the grid, so
/// the result is an ordinary index set; difference sets come back with a
/// negative part absorbed into the representation offset.
pub fn sumset(x: &DiscretizedSet, y: &DiscretizedSet, sign: Sign) -> Result<DiscretizedSet> {
    x.scale().same_as(y.scale())?;
    let needed = x.len() as u128 * y.len() as u128;
    if needed > u128::from(PAIR_GUARD) {
        return Err(Error::CapExceeded { context: "sumset enumeration", needed, cap: PAIR_GUARD });
    }
    let mut out = Vec::with_capacity(x.len() * y.len());
    for i in x.indices() {
        for j in y.indices() {
            out.push(match sign {
                Sign::Plus => i + j,
                Sign::Minus => i - j,
            });
        }
    }
    DiscretizedSet::from_indices(x.scale(), out)
}

/// |X ± Y| as a set. For grid sets this equals the δ-covering number of the
/// sumset, since distinct grid points occupy distinct δ-cells.
pub fn sumset_len(x: &DiscretizedSet, y: &DiscretizedSet, sign: Sign) -> Result<u64> {
    Ok(sumset(x, y, sign)?.len() as u64)
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Dilations and mixed sums
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

fn check_dilation_index(scale: crate::scale::Scale, k: i64, name: &'static str) -> Result<()> {
    if k < 0 || k > scale.cells() {
        return Err(Error::InvalidParameter {
            name,
            reason: format!("dilation index {k} outside 0..={} (value must lie in [0,1])", scale.cells()),
        });
    }
    Ok(())
}

/// The dilation c·X with c = k·δ, as exact values on denominator 2^(2m).
pub fn dilate(x: &DiscretizedSet, k: i64) -> Result<ValueMultiset> {
    check_dilation_index(x.scale(), k, "k")?;
    let values = x.indices().map(|i| i128::from(k) * i128::from(i)).collect();
    Ok(ValueMultiset::from_numerators(2 * x.scale().m(), values))
}

/// The multiset {k_a·a + k_b·b : a ∈ A, b ∈ B} on denominator 2^(2m),
/// with multiplicities equal to the number of generating pairs.
pub fn pair_dilate_sum(
    a: &DiscretizedSet,
    ka: i64,
    b: &DiscretizedSet,
    kb: i64,
) -> Result<ValueMultiset> {
    a.scale().same_as(b.scale())?;
    check_dilation_index(a.scale(), ka, "ka")?;
    check_dilation_index(a.scale(), kb, "kb")?;
    let needed = a.len() as u128 * b.len() as u128;
    if needed > u128::from(PAIR_GUARD) {
        return Err(Error::CapExceeded { context: "pair enumeration", needed, cap: PAIR_GUARD });
    }
    let (ka, kb) = (i128::from(ka), i128::from(kb));
    let mut values = Vec::with_capacity(a.len() * b.len());
    for i in a.indices() {
        let ai = ka * i128::from(i);
        for j in b.indices() {
            values.push(ai + kb * i128::from(j));
        }
    }
    Ok(ValueMultiset::from_numerators(2 * a.scale().m(), values))
}

/// The multiset {a + c·b} for c = k·δ — the value collection whose δ-window
/// collisions define the additive energy.
pub fn dilate_sum(a: &DiscretizedSet, k: i64, b: &DiscretizedSet) -> Result<ValueMultiset> {
    pair_dilate_sum(a, a.scale().cells(), b, k)
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Affine combinations
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

/// Exact multiset of Σ coeffs[t]·x_t over the Cartesian product of the sets.
/// Coefficients must be dyadic rationals (the combinations we form always
/// use grid values or their differences as coefficients); the result lands
/// on the common denominator 2^(m + max coefficient log-denominator).
pub fn linear_combination(
    coeffs: &[Rat],
    sets: &[&DiscretizedSet],
    cap: u64,
) -> Result<ValueMultiset> {
    if coeffs.is_empty() || coeffs.len() != sets.len() {
        return Err(Error::InvalidParameter {
            name: "coeffs",
            reason: format!("need equal nonempty lengths, got {} vs {}", coeffs.len(), sets.len()),
        });
    }
    let scale = sets[0].scale();
    let mut q_max = 0u32;
    for (t, &c) in coeffs.iter().enumerate() {
        sets[t].scale().same_as(scale)?;
        if c.denom().count_ones() != 1 {
            return Err(Error::InvalidParameter {
                name: "coeffs",
                reason: format!("coefficient {} is not dyadic", crate::scale::rat_to_string(c)),
            });
        }
        if c.numer().unsigned_abs() > 1 << 40 || c.denom().trailing_zeros() > 48 {
            return Err(Error::Overflow("linear_combination coefficient"));
        }
        q_max = q_max.max(c.denom().trailing_zeros());
    }
    let needed: u128 = sets.iter().map(|s| s.len() as u128).product();
    if needed == 0 {
        return Err(Error::EmptySet("linear_combination"));
    }
    if needed > u128::from(cap) {
        return Err(Error::CapExceeded { context: "combination too large", needed, cap });
    }

    // Per-set contribution tables on the common denominator 2^(m + q_max).
    let tables: Vec<Vec<i128>> = coeffs
        .iter()
        .zip(sets)
        .map(|(&c, s)| {
            let shift = q_max - c.denom().trailing_zeros();
            s.indices()
                .map(|i| c.numer() * i128::from(i) << shift)
                .collect()
        })
        .collect();

    // Odometer over the product; last coordinate innermost.
    let mut values = Vec::with_capacity(needed as usize);
    let mut counters = vec![0usize; sets.len()];
    let mut partial: Vec<i128> = Vec::with_capacity(sets.len());
    // partial[t] = sum of contributions of coordinates 0..=t
    let mut acc = 0i128;
    for (t, table) in tables.iter().enumerate() {
        acc += table[0];
        partial.push(acc);
        let _ = t;
    }
    loop {
        values.push(*partial.last().unwrap());
        // Advance the odometer.
        let mut t = sets.len();
        loop {
            if t == 0 {
                // Done: emit the collected multiset.
                return Ok(ValueMultiset::from_numerators(scale.m() + q_max, values));
            }
            t -= 1;
            counters[t] += 1;
            if counters[t] < tables[t].len() {
                break;
            }
            counters[t] = 0;
        }
        // Recompute partial sums from the changed coordinate onward.
        let mut acc = if t == 0 { 0 } else { partial[t - 1] };
        for u in t..sets.len() {
            acc += tables[u][counters[u]];
            partial[u] = acc;
        }
    }
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Ratio set
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

/// One stored ratio with a witness quadruple (value indices d₁,d₂,d₃,d₄ in
/// the source set) that generates it: value = (d₁−d₂)/(d₃−d₄).
#[derive(Clone, Debug, PartialEq)]
pub struct RatioEntry {
    pub value: Rat,
    pub rep: [i64; 4],
}

/// The ratio set R = {(d₁−d₂)/(d₃−d₄) : dᵢ ∈ D, |d₃−d₄| > δ^κ}, stored as
/// exact reduced rationals with one deterministic witness quadruple each.
#[derive(Clone, Debug)]
pub struct RatioSet {
    /// Identifier of the generating set (scale and cardinality).
    pub source_id: String,
    pub kappa: f64,
    /// Admissibility floor in index units: (d₃−d₄) admissible ⟺
    /// |i₃−i₄| ≥ q_min, where q_min = ⌊2^(m(1−κ))⌋ + 1.
    pub q_min: i64,
    /// Separation floor δ^κ (reporting only; decisions use q_min).
    pub threshold: f64,
    /// Ascending by value.
    pub ratios: Vec<RatioEntry>,
    pub truncated: bool,
    pub quadruples_examined: u64,
    /// Set when no admissible denominator pair exists; the ratio set is then
    /// empty and callers fall back to the small-denominator bound (4.3).
    pub diagnostic: Option<String>,
}

impl RatioSet {
    pub fn is_empty(&self) -> bool {
        self.ratios.is_empty()
    }

    pub fn len(&self) -> usize {
        self.ratios.len()
    }

    pub fn contains(&self, value: Rat) -> bool {
        self.ratios.binary_search_by(|e| e.value.cmp(&value)).is_ok()
    }

    /// The slice of entries with value in [0,1].
    pub fn unit_entries(&self) -> &[RatioEntry] {
        let lo = self.ratios.partition_point(|e| e.value < Rat::from_integer(0));
        let hi = self.ratios.partition_point(|e| e.value <= Rat::from_integer(1));
        &self.ratios[lo..hi]
    }

    /// Exact distance from `x` to the nearest stored ratio (None if empty).
    pub fn min_distance(&self, x: Rat) -> Option<Rat> {
        if self.ratios.is_empty() {
            return None;
        }
        let k = self.ratios.partition_point(|e| e.value < x);
        let mut best: Option<Rat> = None;
        if k < self.ratios.len() {
            best = Some(self.ratios[k].value - x);
        }
        if k > 0 {
            let d = x - self.ratios[k - 1].value;
            best = Some(match best {
                Some(b) if b <= d => b,
                _ => d,
            });
        }
        best
    }
}

/// Compute the ratio set of `d` with exponent `kappa` ∈ (0, 1/2).
///
/// Exhaustive when |D|⁴ ≤ cap; otherwise a seeded uniform sample of `cap`
/// quadruples (xoshiro256++ stream, 64-bit seed) with the truncated flag
/// set. In both modes 0 and 1 are inserted first with a canonical witness
/// (the maximal-separation denominator pair), and sampling inserts −r
/// alongside every r so negation symmetry survives truncation.
pub fn ratio_set(d: &DiscretizedSet, kappa: f64, cap: u64, seed: u64) -> Result<RatioSet> {
    if !(0.0 < kappa && kappa < 0.5) {
        return Err(Error::InvalidParameter {
            name: "kappa",
            reason: format!("need 0 < kappa < 1/2, got {kappa}"),
        });
    }
    let m = d.scale().m();
    let idx = d.to_index_vec();
    let n = idx.len();
    // |i₃−i₄|·δ > δ^κ ⟺ |i₃−i₄| > 2^(m(1−κ)). The right side is computed
    // once in floating point; for m ≤ 24 it is far below 2^53, so the floor
    // is exact except when 2^(m(1−κ)) is astronomically close to an integer.
    let q_min = ((m as f64) * (1.0 - kappa)).exp2().floor() as i64 + 1;
    let threshold = (-(m as f64) * kappa).exp2();
    let source_id = format!("m={m},n={n}");

    let max_sep = match (idx.first(), idx.last()) {
        (Some(&lo), Some(&hi)) => hi - lo,
        _ => 0,
    };
    if n < 2 || max_sep < q_min {
        return Ok(RatioSet {
            source_id,
            kappa,
            q_min,
            threshold,
            ratios: Vec::new(),
            truncated: false,
            quadruples_examined: 0,
            diagnostic: Some(format!(
                "no denominator pair satisfies |d3 - d4| > delta^kappa (index floor {q_min}); \
                 the small-denominator regime (4.3) applies"
            )),
        });
    }

    let mut map: BTreeMap<Rat, [i64; 4]> = BTreeMap::new();
    let lo = idx[0];
    let hi = idx[n - 1];
    // Canonical members 0 and 1, witnessed by the widest denominator pair.
    map.insert(Rat::from_integer(0), [lo, lo, hi, lo]);
    map.insert(Rat::from_integer(1), [hi, lo, hi, lo]);

    let total = (n as u128).pow(4);
    let mut examined: u64 = 0;
    let truncated = total > u128::from(cap);
    if !truncated {
        // Scan order: (d3, d4) outer, (d1, d2) inner, each by element order;
        // the first quadruple producing a value becomes its witness.
        for &i3 in &idx {
            for &i4 in &idx {
                if (i3 - i4).abs() < q_min {
                    continue;
                }
                let den = i128::from(i3) - i128::from(i4);
                for &i1 in &idx {
                    for &i2 in &idx {
                        examined += 1;
                        let r = rat(i128::from(i1) - i128::from(i2), den);
                        map.entry(r).or_insert([i1, i2, i3, i4]);
                    }
                }
            }
        }
    } else {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        for _ in 0..cap {
            examined += 1;
            let i1 = idx[rng.gen_range(0..n)];
            let i2 = idx[rng.gen_range(0..n)];
            let i3 = idx[rng.gen_range(0..n)];
            let i4 = idx[rng.gen_range(0..n)];
            if (i3 - i4).abs() < q_min {
                continue;
            }
            let den = i128::from(i3) - i128::from(i4);
            let r = rat(i128::from(i1) - i128::from(i2), den);
            map.entry(r).or_insert([i1, i2, i3, i4]);
            map.entry(-r).or_insert([i2, i1, i3, i4]);
        }
    }

    let ratios = map
        .into_iter()
        .map(|(value, rep)| RatioEntry { value, rep })
        .collect();
    Ok(RatioSet {
        source_id,
        kappa,
        q_min,
        threshold,
        ratios,
        truncated,
        quadruples_examined: examined,
        diagnostic: None,
    })
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Tests
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::Scale;

    fn set(m: u32, idx: &[i64]) -> DiscretizedSet {
        DiscretizedSet::from_indices(Scale::new(m).unwrap(), idx.iter().copied()).unwrap()
    }

    #[test]
    fn sumset_basics() {
        let x = set(4, &[0, 1]);
        let y = set(4, &[0, 2]);
        assert_eq!(sumset(&x, &y, Sign::Plus).unwrap().to_index_vec(), vec![0, 1, 2, 3]);

        // AP(8) + AP(8) = AP(15).
        let ap8 = set(6, &(0..8).collect::<Vec<_>>());
        let s = sumset(&ap8, &ap8, Sign::Plus).unwrap();
        assert_eq!(s.to_index_vec(), (0..15).collect::<Vec<_>>());

        // Cantor {0,3,12,15}: 9 distinct sums.
        let c = set(4, &[0, 3, 12, 15]);
        assert_eq!(sumset(&c, &c, Sign::Plus).unwrap().len(), 9);

        // Difference set carries its offset.
        let d = sumset(&x, &y, Sign::Minus).unwrap();
        assert_eq!(d.to_index_vec(), vec![-2, -1, 0, 1]);
        assert_eq!(d.offset(), -2);

        // Scale mismatch is rejected.
        let z = set(5, &[0]);
        assert!(sumset(&x, &z, Sign::Plus).is_err());
    }

    #[test]
    fn dilate_sum_examples() {
        let m = Scale::new(3).unwrap();
        // A = B = {0, δ}, c = 1: values {0, δ, δ, 2δ}.
        let a = DiscretizedSet::from_indices(m, [0, 1]).unwrap();
        let ds = dilate_sum(&a, m.cells(), &a).unwrap();
        assert_eq!(ds.total_mass(), 4);
        assert_eq!(ds.support_len(), 3);
        assert_eq!(ds.multiplicity_of(8), 2); // δ on denominator 2^6 has numerator 8

        // A = {0}: values are c·B with multiplicity 1.
        let origin = DiscretizedSet::from_indices(m, [0]).unwrap();
        let b = DiscretizedSet::from_indices(m, [1, 3, 5]).unwrap();
        let cb = dilate_sum(&origin, 4, &b).unwrap();
        let direct = dilate(&b, 4).unwrap();
        assert_eq!(cb, direct);
        assert!(cb.entries().iter().all(|&(_, mult)| mult == 1));

        // A = B = AP(4) step δ, c = 1: multiplicity of s·δ is 4 − |3−s|.
        let ap4 = DiscretizedSet::from_indices(m, 0..4).unwrap();
        let conv = dilate_sum(&ap4, m.cells(), &ap4).unwrap();
        assert_eq!(conv.total_mass(), 16);
        for s in 0..=6i128 {
            let expected = 4 - (3 - s).abs() as u64;
            assert_eq!(conv.multiplicity_of(s * 8), expected, "s = {s}");
        }
    }

    #[test]
    fn linear_combination_examples() {
        let m = Scale::new(4).unwrap();
        let x = DiscretizedSet::from_indices(m, [0, 5, 9]).unwrap();
        // Identity: coeffs (1) reproduce the set as a multiset.
        let id = linear_combination(&[Rat::from_integer(1)], &[&x], DEFAULT_TUPLE_CAP).unwrap();
        assert_eq!(id.total_mass(), 3);
        assert_eq!(id.support_len(), 3);
        assert_eq!(id.value(1), rat(5, 16));

        // (1,1) on {0, δ}² → {0, δ, δ, 2δ}.
        let p = DiscretizedSet::from_indices(m, [0, 1]).unwrap();
        let s = linear_combination(
            &[Rat::from_integer(1), Rat::from_integer(1)],
            &[&p, &p],
            DEFAULT_TUPLE_CAP,
        )
        .unwrap();
        assert_eq!((s.total_mass(), s.support_len()), (4, 3));
        assert_eq!(s.multiplicity_of(1), 2);

        // (1/2, 1/2) on {0, 2δ}² → {0, δ, δ, 2δ}.
        let q = DiscretizedSet::from_indices(m, [0, 2]).unwrap();
        let h = linear_combination(&[rat(1, 2), rat(1, 2)], &[&q, &q], DEFAULT_TUPLE_CAP).unwrap();
        assert_eq!(h.log_den(), 5);
        assert_eq!((h.total_mass(), h.support_len()), (4, 3));
        assert_eq!(h.multiplicity_of(1 << 1), 2); // δ = 2/2^5

        // Cap enforcement.
        let err = linear_combination(&[Rat::from_integer(1); 2], &[&x, &x], 8);
        assert!(matches!(err, Err(Error::CapExceeded { .. })));

        // Non-dyadic coefficients are rejected.
        assert!(linear_combination(&[rat(1, 3)], &[&x], DEFAULT_TUPLE_CAP).is_err());
    }

    #[test]
    fn ratio_set_two_points() {
        // D = {0, 1/2} at m=4, κ=0.25: admissible pairs exist (separation 8 >
        // 2^3 = 8? the floor is ⌊2^(4·0.75)⌋+1 = 9 > 8 — so pick m large
        // enough that the example's admissibility holds: at m=2, floor is
        // ⌊2^1.5⌋+1 = 3 and separation 2 < 3. The worked example uses m ≥ 2
        // with D = {0, 1/2}; separation in index units is 2^(m−1), and
        // 2^(m−1) ≥ ⌊2^(3m/4)⌋+1 holds from m = 4 on... verify at m = 8.
        let m = Scale::new(8).unwrap();
        let d = DiscretizedSet::from_indices(m, [0, 128]).unwrap();
        let r = ratio_set(&d, 0.25, DEFAULT_ENUM_CAP, 1).unwrap();
        assert!(r.diagnostic.is_none());
        assert!(!r.truncated);
        let unit: Vec<Rat> = r.unit_entries().iter().map(|e| e.value).collect();
        assert_eq!(unit, vec![Rat::from_integer(0), Rat::from_integer(1)]);
        // Negation symmetry in exact mode.
        assert!(r.contains(Rat::from_integer(-1)));
        assert_eq!(r.len(), 3);

        // Witnesses regenerate their values.
        for e in &r.ratios {
            let [i1, i2, i3, i4] = e.rep;
            let back = rat(i128::from(i1) - i128::from(i2), i128::from(i3) - i128::from(i4));
            assert_eq!(back, e.value);
        }
    }

    #[test]
    fn ratio_set_three_points_contains_half() {
        let m = Scale::new(8).unwrap();
        let d = DiscretizedSet::from_indices(m, [0, 64, 128]).unwrap();
        let r = ratio_set(&d, 0.25, DEFAULT_ENUM_CAP, 1).unwrap();
        assert!(r.contains(rat(1, 2)), "1/2 = (1/4 - 0)/(1/2 - 0)");
        assert!(r.contains(rat(-1, 2)));
    }

    #[test]
    fn ratio_set_empty_cases() {
        let m = Scale::new(8).unwrap();
        // Singleton: no pairs at all.
        let single = DiscretizedSet::from_indices(m, [3]).unwrap();
        let r = ratio_set(&single, 0.25, DEFAULT_ENUM_CAP, 1).unwrap();
        assert!(r.is_empty());
        assert!(r.diagnostic.as_deref().unwrap().contains("(4.3)"));

        // Two points too close for the admissibility floor.
        let narrow = DiscretizedSet::from_indices(m, [0, 4]).unwrap();
        let r = ratio_set(&narrow, 0.25, DEFAULT_ENUM_CAP, 1).unwrap();
        assert!(r.is_empty() && r.diagnostic.is_some());

        // Bad kappa.
        assert!(ratio_set(&narrow, 0.5, DEFAULT_ENUM_CAP, 1).is_err());
    }

    #[test]
    fn ratio_set_sampling_is_seeded_and_symmetric() {
        let m = Scale::new(8).unwrap();
        let d = DiscretizedSet::from_indices(m, (0..24).map(|i| i * 11).collect::<Vec<_>>())
            .unwrap();
        // 24^4 = 331776 quadruples; cap below that forces sampling.
        let r1 = ratio_set(&d, 0.1, 50_000, 42).unwrap();
        let r2 = ratio_set(&d, 0.1, 50_000, 42).unwrap();
        assert!(r1.truncated);
        assert_eq!(r1.ratios, r2.ratios);
        assert!(r1.contains(Rat::from_integer(0)) && r1.contains(Rat::from_integer(1)));
        for e in &r1.ratios {
            assert!(r1.contains(-e.value), "missing negation of {:?}", e.value);
        }
        // Different seed may give a different (still valid) sample.
        let r3 = ratio_set(&d, 0.1, 50_000, 43).unwrap();
        for e in &r3.ratios {
            let [i1, i2, i3, i4] = e.rep;
            assert!((i3 - i4).abs() >= r3.q_min);
            assert_eq!(rat(i128::from(i1 - i2), i128::from(i3 - i4)), e.value);
        }
    }

    #[test]
    fn ratio_set_min_distance() {
        let m = Scale::new(8).unwrap();
        let d = DiscretizedSet::from_indices(m, [0, 128]).unwrap();
        let r = ratio_set(&d, 0.25, DEFAULT_ENUM_CAP, 1).unwrap();
        // R = {-1, 0, 1}: distance from 1/2 is 1/2; from 3/4 is 1/4.
        assert_eq!(r.min_distance(rat(1, 2)), Some(rat(1, 2)));
        assert_eq!(r.min_distance(rat(3, 4)), Some(rat(1, 4)));
        assert_eq!(r.min_distance(Rat::from_integer(-2)), Some(Rat::from_integer(1)));
    }
}
