//! Additive energy on the grid: E_c(A,B) counts ordered tuples
//! (a₁,b₁,a₂,b₂) with |(a₁ + c·b₁) − (a₂ + c·b₂)| ≤ δ, computed exactly by
//! a two-pointer sweep over the sorted values a + c·b. The spectrum routine
//! evaluates E_c across a whole set C, forms the collision statistic
//! K = |A|^(3/2)|B|^(3/2)|C| / Σ_c E_c, and splits C into dyadic level sets
//! around the mean energy.

use num::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gridset::DiscretizedSet;
use crate::multiset::ValueMultiset;

/// Guard on |A|·|B| for a single energy evaluation (values materialized).
const ENERGY_GUARD: u64 = 1 << 28;

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Pair-counting kernels
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

/// Ordered pairs (s,t) with |v_s − v_t| ≤ window over a SORTED slice,
/// diagonal included. Two pointers; exact.
pub fn window_pair_count(sorted: &[i128], window: i128) -> u128 {
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
    debug_assert!(window >= 0);
    let mut count: u128 = 0;
    let mut lo = 0usize;
    for (j, &v) in sorted.iter().enumerate() {
        while v - sorted[lo] > window {
            lo += 1;
        }
        count += 2 * (j - lo) as u128 + 1;
    }
    count
}

/// Same count over an aggregated multiset: Σ_s mult(s)·mass(|v − v_s| ≤ w).
pub fn multiset_window_pairs(vm: &ValueMultiset, window: i128) -> u128 {
    let entries = vm.entries();
    let mut count: u128 = 0;
    let mut lo = 0usize;
    let mut hi = 0usize;
    let mut mass_lo: u128 = 0; // total mass strictly below entries[lo]
    let mut mass_hi: u128 = 0; // total mass up to and including entries[hi-1]
    for &(v, mult) in entries {
        while entries[lo].0 < v - window {
            mass_lo += u128::from(entries[lo].1);
            lo += 1;
        }
        while hi < entries.len() && entries[hi].0 <= v + window {
            mass_hi += u128::from(entries[hi].1);
            hi += 1;
        }
        count += u128::from(mult) * (mass_hi - mass_lo);
    }
    count
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Single-c energy
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

/// E_c(A,B) for c = k·δ, exactly. Values a + c·b live on denominator
/// 2^(2m); the δ-window there has integer width 2^m (closed on both sides).
pub fn energy(a: &DiscretizedSet, b: &DiscretizedSet, k: i64) -> Result<u128> {
    a.scale().same_as(b.scale())?;
    if k < 0 || k > a.scale().cells() {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: format!("dilation index {k} outside 0..={}", a.scale().cells()),
        });
    }
    let needed = a.len() as u128 * b.len() as u128;
    if needed == 0 {
        return Err(Error::EmptySet("energy"));
    }
    if needed > u128::from(ENERGY_GUARD) {
        return Err(Error::CapExceeded { context: "energy enumeration", needed, cap: ENERGY_GUARD });
    }
    // Fast path: indices are unit-range after translation in all production
    // uses, but offsets may be negative in general, so shift to u64 space.
    let m = a.scale().m();
    let base = i128::from(a.min_index().unwrap_or(0)) * i128::from(a.scale().cells());
    let mut v: Vec<u64> = Vec::with_capacity(needed as usize);
    for i in a.indices() {
        let ai = i128::from(i) * i128::from(a.scale().cells()) - base;
        for j in b.indices() {
            let val = ai + i128::from(k) * i128::from(j);
            debug_assert!((0..i128::from(u64::MAX)).contains(&val));
            v.push(val as u64);
        }
    }
    v.sort_unstable();
    let window = 1u64 << m;
    let mut count: u128 = 0;
    let mut lo = 0usize;
    for (j, &x) in v.iter().enumerate() {
        while x - v[lo] > window {
            lo += 1;
        }
        count += 2 * (j - lo) as u128 + 1;
    }
    Ok(count)
}

/// Quadruple-loop reference implementation (for cross-checking the sweep).
pub fn energy_brute(a: &DiscretizedSet, b: &DiscretizedSet, k: i64) -> Result<u128> {
    a.scale().same_as(b.scale())?;
    let pairs = a.len() as u128 * b.len() as u128;
    if pairs == 0 {
        return Err(Error::EmptySet("energy"));
    }
    if pairs * pairs > 1 << 44 {
        return Err(Error::CapExceeded {
            context: "brute-force energy",
            needed: pairs * pairs,
            cap: 1 << 44,
        });
    }
    let cells = i128::from(a.scale().cells());
    let window = cells;
    let mut count: u128 = 0;
    for i1 in a.indices() {
        for j1 in b.indices() {
            let v1 = i128::from(i1) * cells + i128::from(k) * i128::from(j1);
            for i2 in a.indices() {
                for j2 in b.indices() {
                    let v2 = i128::from(i2) * cells + i128::from(k) * i128::from(j2);
                    if (v1 - v2).abs() <= window {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

/// The Cauchy–Schwarz link between energy and covering: with covering
/// numbers counted as dyadic cells, E_c·|A + cB|_δ ≥ (|A||B|)² holds with
/// constant exactly 1 (cell-mates differ by less than δ).
#[derive(Clone, Debug, Serialize)]
pub struct CsCheck {
    pub energy: u128,
    pub covering: u64,
    /// E_c · |A+cB|_δ
    pub product: u128,
    /// (|A||B|)²
    pub square: u128,
    pub ok: bool,
}

pub fn cs_lower_bound_check(a: &DiscretizedSet, b: &DiscretizedSet, k: i64) -> Result<CsCheck> {
    let e = energy(a, b, k)?;
    let sum = crate::arith::dilate_sum(a, k, b)?;
    let covering = sum.covering_number(a.scale().delta());
    let product = e.checked_mul(u128::from(covering)).ok_or(Error::Overflow("cs product"))?;
    let ab = a.len() as u128 * b.len() as u128;
    let square = ab * ab;
    Ok(CsCheck { energy: e, covering, product, square, ok: product >= square })
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Spectrum across C
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

#[derive(Clone, Debug, Serialize)]
pub struct CEnergy {
    pub c_index: i64,
    pub energy: u128,
}

/// One dyadic level set: c belongs to band N when
/// total·2^N ≤ E_c·|C| < total·2^(N+1), i.e. E_c ∈ [mean·2^N, mean·2^(N+1)).
#[derive(Clone, Debug, Serialize)]
pub struct LevelBand {
    pub n: i32,
    /// ρ = 2^(−N); the band's members satisfy E_c ≥ (|A||B|)^(3/2)/(ρK).
    pub rho: f64,
    pub c_indices: Vec<i64>,
    pub energy_sum: u128,
    pub is_largest: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct EnergyOptions {
    /// Drop c with below-mean energy before banding (they cannot lie in a
    /// band with N ≥ 0). Off by default: small bands are still reported.
    pub prefilter_low_energy: bool,
    pub parallel: bool,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        EnergyOptions { prefilter_low_energy: false, parallel: false }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnergyReport {
    pub m: u32,
    pub a_len: u64,
    pub b_len: u64,
    pub c_len: u64,
    pub per_c: Vec<CEnergy>,
    pub total: u128,
    /// K = |A|^(3/2)|B|^(3/2)|C| / total (floating-point report; the
    /// envelope booleans below are decided in exact integer arithmetic).
    #[serde(rename = "K")]
    pub k_statistic: f64,
    /// K ≥ 1/3 ⟺ 9|A|³|B|³|C|² ≥ total².
    pub k_lower_ok: bool,
    /// K ≤ √(|A||B|) ⟺ total ≥ |A||B||C|.
    pub k_upper_ok: bool,
    /// Mean energy total/|C| as an exact fraction.
    pub mean_num: u128,
    pub mean_den: u64,
    /// c indices removed by the low-energy prefilter (empty when off).
    pub prefiltered: Vec<i64>,
    /// Informational: c where E_c exceeds 3·min(|A|²|B|, |A||B|²). The
    /// provable ceiling is 3|A||B|² together with (⌊2^(m+1)/k⌋+1)|A|²|B|;
    /// the min-form is folklore and genuinely fails on degenerate sets.
    pub min_form_exceeded: Vec<i64>,
    pub levels: Vec<LevelBand>,
    /// Index into `levels` of the largest band (ties broken toward larger N).
    pub largest_band: usize,
}

impl EnergyReport {
    /// Members of the largest level set as a set, with its ρ.
    pub fn largest_level_set(&self, scale: crate::scale::Scale) -> Result<(DiscretizedSet, f64)> {
        let band = &self.levels[self.largest_band];
        let set = DiscretizedSet::from_indices(scale, band.c_indices.iter().copied())?;
        Ok((set, band.rho))
    }
}

/// N with total·2^N ≤ x < total·2^(N+1), for x ≥ 1, total ≥ 1. Integer
/// shifts only; magnitudes here stay far below 2^64 so u128 shifts are safe.
fn band_exponent(x: u128, total: u128) -> i32 {
    debug_assert!(x >= 1 && total >= 1);
    if x >= total {
        let mut n = 0i32;
        while n < 120 && (total << (n + 1)) <= x {
            n += 1;
        }
        n
    } else {
        let mut s = 1i32;
        while s < 120 && (x << s) < total {
            s += 1;
        }
        -s
    }
}

/// Evaluate E_c over all c ∈ C and report the spectrum. C must avoid 0
/// (indices ≥ 1); production inputs live in [1/2, 1].
pub fn energy_spectrum(
    a: &DiscretizedSet,
    b: &DiscretizedSet,
    c: &DiscretizedSet,
    opts: &EnergyOptions,
) -> Result<EnergyReport> {
    a.scale().same_as(b.scale())?;
    a.scale().same_as(c.scale())?;
    if a.is_empty() || b.is_empty() || c.is_empty() {
        return Err(Error::EmptySet("energy_spectrum"));
    }
    if c.min_index().unwrap_or(0) < 1 {
        return Err(Error::InvalidParameter {
            name: "c",
            reason: "dilation set must not contain 0".into(),
        });
    }
    let ks: Vec<i64> = c.to_index_vec();
    let per_c: Vec<CEnergy> = if opts.parallel {
        ks.par_iter()
            .map(|&k| Ok(CEnergy { c_index: k, energy: energy(a, b, k)? }))
            .collect::<Result<_>>()?
    } else {
        ks.iter()
            .map(|&k| Ok(CEnergy { c_index: k, energy: energy(a, b, k)? }))
            .collect::<Result<_>>()?
    };

    let total: u128 = per_c.iter().map(|e| e.energy).sum();
    let (na, nb, nc) = (a.len() as u128, b.len() as u128, c.len() as u128);
    let k_statistic = (na as f64).powf(1.5) * (nb as f64).powf(1.5) * nc as f64 / total as f64;

    // Envelope, exactly: K ≥ 1/3 ⟺ 9·|A|³|B|³|C|² ≥ total², and
    // K ≤ √(|A||B|) ⟺ total ≥ |A||B||C|. The left side of the first test
    // can exceed u128, so it runs in big integers.
    let k_lower_ok = {
        let lhs = BigUint::from(9u32) * BigUint::from(na).pow(3) * BigUint::from(nb).pow(3)
            * BigUint::from(nc).pow(2);
        lhs >= BigUint::from(total) * BigUint::from(total)
    };
    let k_upper_ok = total >= na * nb * nc;

    // Informational min-form check.
    let min_form_cap = 3 * na * nb * na.min(nb);
    let min_form_exceeded: Vec<i64> = per_c
        .iter()
        .filter(|e| e.energy > min_form_cap)
        .map(|e| e.c_index)
        .collect();

    // Banding around the mean total/|C|: c lands in band N exactly when
    // total·2^N ≤ E_c·|C| < total·2^(N+1).
    let mut prefiltered = Vec::new();
    let mut bands: std::collections::BTreeMap<i32, (Vec<i64>, u128)> =
        std::collections::BTreeMap::new();
    for e in &per_c {
        let x = e.energy * nc;
        if opts.prefilter_low_energy && x < total {
            prefiltered.push(e.c_index);
            continue;
        }
        let n = band_exponent(x, total);
        let slot = bands.entry(n).or_default();
        slot.0.push(e.c_index);
        slot.1 += e.energy;
    }
    let mut levels: Vec<LevelBand> = bands
        .into_iter()
        .map(|(n, (c_indices, energy_sum))| LevelBand {
            n,
            rho: (-n as f64).exp2(),
            c_indices,
            energy_sum,
            is_largest: false,
        })
        .collect();
    // Largest band; ties toward larger N. `levels` is ascending in n, so a
    // ≥ comparison walking upward leaves the last maximum flagged.
    let mut largest_band = 0usize;
    for (i, band) in levels.iter().enumerate() {
        if band.c_indices.len() >= levels[largest_band].c_indices.len() {
            largest_band = i;
        }
    }
    levels[largest_band].is_largest = true;

    Ok(EnergyReport {
        m: a.scale().m(),
        a_len: na as u64,
        b_len: nb as u64,
        c_len: nc as u64,
        per_c,
        total,
        k_statistic,
        k_lower_ok,
        k_upper_ok,
        mean_num: total,
        mean_den: nc as u64,
        prefiltered,
        min_form_exceeded,
        levels,
        largest_band,
    })
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Tests
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scale::Scale;

    fn set(m: u32, idx: impl IntoIterator<Item = i64>) -> DiscretizedSet {
        DiscretizedSet::from_indices(Scale::new(m).unwrap(), idx).unwrap()
    }

    #[test]
    fn kernel_two_point_example() {
        // A = B = {0, δ}, c = 1: values {0, δ, δ, 2δ} give exactly 14 tuples.
        let a = set(3, [0, 1]);
        assert_eq!(energy(&a, &a, 8).unwrap(), 14);
        assert_eq!(energy_brute(&a, &a, 8).unwrap(), 14);
    }

    #[test]
    fn window_kernels_agree() {
        let values: Vec<i128> = vec![0, 8, 8, 16];
        assert_eq!(window_pair_count(&values, 8), 14);
        let vm = ValueMultiset::from_numerators(6, values);
        assert_eq!(multiset_window_pairs(&vm, 8), 14);
    }

    #[test]
    fn ap4_frozen_energies() {
        let m = Scale::new(3).unwrap();
        let ap4 = DiscretizedSet::from_indices(m, 0..4).unwrap();
        // c = 1: convolution profile 1,2,3,4,3,2,1 on step δ → 124 tuples.
        assert_eq!(energy(&ap4, &ap4, 8).unwrap(), 124);
        // c = 1/2: profile 1,1,2,2,2,2,2,2,1,1 on step δ/2 → 128 tuples.
        assert_eq!(energy(&ap4, &ap4, 4).unwrap(), 128);
        assert_eq!(energy_brute(&ap4, &ap4, 8).unwrap(), 124);
        assert_eq!(energy_brute(&ap4, &ap4, 4).unwrap(), 128);
    }

    #[test]
    fn min_form_counterexample() {
        // A = {0}, B = AP(4), c = 1/2: E = 14 > 3·min(|A|²|B|, |A||B|²) = 12,
        // while the provable ceilings hold.
        let a = set(3, [0]);
        let b = set(3, 0..4);
        let e = energy(&a, &b, 4).unwrap();
        assert_eq!(e, 14);
        assert!(e > 12);
        let (na, nb) = (1u128, 4u128);
        assert!(e <= 3 * na * nb * nb);
        let k = 4u128;
        assert!(e <= ((1 << 4) / k + 1) * na * na * nb); // (⌊2^(m+1)/k⌋+1)|A|²|B|
    }

    #[test]
    fn energy_bounds_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_xoshiro::Xoshiro256PlusPlus::seed_from_u64(7);
        let m = Scale::new(6).unwrap();
        for trial in 0..30 {
            let na = rng.gen_range(1..=12);
            let nb = rng.gen_range(1..=12);
            let mut ai: Vec<i64> = (0..na).map(|_| rng.gen_range(0..=64)).collect();
            let mut bi: Vec<i64> = (0..nb).map(|_| rng.gen_range(0..=64)).collect();
            ai.sort_unstable();
            ai.dedup();
            bi.sort_unstable();
            bi.dedup();
            let a = DiscretizedSet::from_indices(m, ai.clone()).unwrap();
            let b = DiscretizedSet::from_indices(m, bi.clone()).unwrap();
            let k = rng.gen_range(1..=64);
            let fast = energy(&a, &b, k).unwrap();
            let brute = energy_brute(&a, &b, k).unwrap();
            assert_eq!(fast, brute, "trial {trial} k={k} A={ai:?} B={bi:?}");
            let (na, nb) = (a.len() as u128, b.len() as u128);
            assert!(fast >= na * nb, "diagonal undercount");
            assert!(fast <= 3 * na * nb * nb, "provable ceiling violated");
        }
    }

    #[test]
    fn cs_constant_is_one() {
        let m = Scale::new(3).unwrap();
        let ap4 = DiscretizedSet::from_indices(m, 0..4).unwrap();
        let chk = cs_lower_bound_check(&ap4, &ap4, 8).unwrap();
        assert!(chk.ok, "E·cov = {} < {}", chk.product, chk.square);
        // E = 124, |A+B|_δ = covering of {0..6δ} at δ = 7 cells... the
        // values sit on denominator 2^6 with spacing 8; exact count below.
        assert_eq!(chk.energy, 124);
        assert_eq!(chk.product >= chk.square, chk.ok);
    }

    #[test]
    fn spectrum_two_band_example() {
        // A = B = AP(4) at m=3, C = {1/2, 1}: E_{1/2} = 128, E_1 = 124,
        // mean 126 → bands N=0 (c=1/2) and N=−1 (c=1); tie for largest is
        // broken toward larger N, so the N=0 band is flagged.
        let m = Scale::new(3).unwrap();
        let ap4 = DiscretizedSet::from_indices(m, 0..4).unwrap();
        let c = DiscretizedSet::from_indices(m, [4, 8]).unwrap();
        let rep = energy_spectrum(&ap4, &ap4, &c, &EnergyOptions::default()).unwrap();
        assert_eq!(rep.total, 252);
        assert_eq!(rep.per_c.len(), 2);
        assert_eq!(rep.per_c[0].energy, 128);
        assert_eq!(rep.per_c[1].energy, 124);
        assert_eq!(rep.levels.len(), 2);
        let flagged = &rep.levels[rep.largest_band];
        assert_eq!(flagged.n, 0);
        assert_eq!(flagged.rho, 1.0);
        assert_eq!(flagged.c_indices, vec![4]);
        assert!(flagged.is_largest);
        let low = rep.levels.iter().find(|b| b.n == -1).unwrap();
        assert_eq!(low.c_indices, vec![8]);
        // K = 8·8·2/252 and the exact envelope.
        assert!((rep.k_statistic - 128.0 / 252.0).abs() < 1e-15);
        assert!(rep.k_lower_ok && rep.k_upper_ok);
    }

    #[test]
    fn spectrum_prefilter_and_parallel() {
        let m = Scale::new(3).unwrap();
        let ap4 = DiscretizedSet::from_indices(m, 0..4).unwrap();
        let c = DiscretizedSet::from_indices(m, [4, 8]).unwrap();
        let opts = EnergyOptions { prefilter_low_energy: true, parallel: false };
        let rep = energy_spectrum(&ap4, &ap4, &c, &opts).unwrap();
        assert_eq!(rep.prefiltered, vec![8]); // E_1·2 = 248 < 252
        assert_eq!(rep.levels.len(), 1);
        let par = energy_spectrum(
            &ap4,
            &ap4,
            &c,
            &EnergyOptions { prefilter_low_energy: false, parallel: true },
        )
        .unwrap();
        assert_eq!(par.total, 252);
        assert_eq!(par.per_c[0].c_index, 4);
    }

    #[test]
    fn band_exponent_edges() {
        // x = total exactly → band 0; x = 2·total → band 1 (lower edge
        // inclusive); x just below total → band −1.
        assert_eq!(band_exponent(100, 100), 0);
        assert_eq!(band_exponent(200, 100), 1);
        assert_eq!(band_exponent(199, 100), 0);
        assert_eq!(band_exponent(99, 100), -1);
        assert_eq!(band_exponent(50, 100), -1);
        assert_eq!(band_exponent(49, 100), -2);
        assert_eq!(band_exponent(1, 1 << 40), -40);
    }

    #[test]
    fn spectrum_rejects_zero_dilation() {
        let m = Scale::new(3).unwrap();
        let ap4 = DiscretizedSet::from_indices(m, 0..4).unwrap();
        let c = DiscretizedSet::from_indices(m, [0, 8]).unwrap();
        assert!(energy_spectrum(&ap4, &ap4, &c, &EnergyOptions::default()).is_err());
    }
}
