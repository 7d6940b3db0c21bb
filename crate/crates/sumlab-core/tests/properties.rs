//! Randomized invariant checks. Every property here is a theorem about the
//! exact-arithmetic kernels, so a single counterexample is a bug: there are
//! no tolerance knobs in this file.

use std::collections::BTreeSet;

use num::BigUint;
use proptest::collection::btree_set;
use proptest::prelude::*;

use sumlab_core::arith::{dilate, dilate_sum, ratio_set, sumset, sumset_len, Sign};
use sumlab_core::bounds::ruzsa_check;
use sumlab_core::energy::{
    cs_lower_bound_check, energy, energy_brute, energy_spectrum, multiset_window_pairs,
    window_pair_count, EnergyOptions,
};
use sumlab_core::incidence::energy_via_incidence;
use sumlab_core::io::{format_multiset, format_set, parse_multiset, parse_set};
use sumlab_core::report::canonical_json_of;
use sumlab_core::scale::rat_pow2;
use sumlab_core::{DiscretizedSet, Rat, Scale, ValueMultiset};

const EXHAUSTIVE_CAP: u64 = 1 << 20;

/// A set of ≤ `max_len` grid points inside the unit interval at scale m.
fn unit_set(m: u32, max_len: usize) -> impl Strategy<Value = DiscretizedSet> {
    btree_set(0i64..=(1i64 << m), 1..=max_len).prop_map(move |idx| {
        DiscretizedSet::from_unit_indices(Scale::new(m).unwrap(), idx).unwrap()
    })
}

/// Two unit-interval sets on a shared scale plus a dilation index in
/// [2^(m−1), 2^m] (i.e. c ∈ [1/2, 1]).
fn pair_with_dilation() -> impl Strategy<Value = (DiscretizedSet, DiscretizedSet, i64)> {
    (3u32..=6).prop_flat_map(|m| {
        let n = 1i64 << m;
        (unit_set(m, 10), unit_set(m, 10), (n / 2)..=n)
    })
}

/// Three sets on a shared scale (for triangle-type inequalities).
fn triple_same_scale() -> impl Strategy<Value = (DiscretizedSet, DiscretizedSet, DiscretizedSet)> {
    (3u32..=6).prop_flat_map(|m| (unit_set(m, 10), unit_set(m, 10), unit_set(m, 10)))
}

/// (A, B, C) with C ⊂ [1/2, 1], ready for a spectrum run.
fn spectrum_input() -> impl Strategy<Value = (DiscretizedSet, DiscretizedSet, DiscretizedSet)> {
    (3u32..=6).prop_flat_map(|m| {
        let n = 1i64 << m;
        (
            unit_set(m, 8),
            unit_set(m, 8),
            btree_set(n / 2..=n, 1..=6).prop_map(move |idx| {
                DiscretizedSet::from_unit_indices(Scale::new(m).unwrap(), idx).unwrap()
            }),
        )
    })
}

/// Exact check that total·2^N ≤ e_c·|C| < total·2^(N+1), shifts applied on
/// whichever side keeps every quantity a nonnegative integer.
fn band_window_ok(total: u128, e_c: u128, c_len: u64, n: i32) -> bool {
    let total = BigUint::from(total);
    let mass = BigUint::from(e_c) * BigUint::from(c_len);
    let lower_ok = if n >= 0 {
        (&total << n as usize) <= mass
    } else {
        total <= (&mass << (-n) as usize)
    };
    let upper = n + 1;
    let upper_ok = if upper >= 0 {
        mass < (&total << upper as usize)
    } else {
        (&mass << (-upper) as usize) < total
    };
    lower_ok && upper_ok
}

proptest! {
    // ── pair-counting kernels ────────────────────────────────────────────

    #[test]
    fn window_count_matches_quadratic(
        mut values in proptest::collection::vec(-1000i128..=1000, 1..=40),
        window in 0i128..=2000,
    ) {
        values.sort_unstable();
        let brute = values
            .iter()
            .flat_map(|&x| values.iter().map(move |&y| (x, y)))
            .filter(|&(x, y)| (x - y).abs() <= window)
            .count() as u128;
        prop_assert_eq!(window_pair_count(&values, window), brute);
    }

    #[test]
    fn multiset_window_matches_expansion(
        pairs in proptest::collection::btree_map(-500i128..=500, 1u64..=4, 1..=20),
        window in 0i128..=1200,
    ) {
        let vm = ValueMultiset::from_pairs(4, pairs.clone().into_iter().collect()).unwrap();
        let mut expanded: Vec<i128> = Vec::new();
        for (&v, &mult) in &pairs {
            expanded.extend(std::iter::repeat(v).take(mult as usize));
        }
        prop_assert_eq!(
            multiset_window_pairs(&vm, window),
            window_pair_count(&expanded, window)
        );
    }

    // ── additive energy ──────────────────────────────────────────────────

    #[test]
    fn fast_energy_matches_brute((a, b, k) in pair_with_dilation()) {
        let fast = energy(&a, &b, k).unwrap();
        let brute = energy_brute(&a, &b, k).unwrap();
        prop_assert_eq!(fast, brute);

        // Diagonal tuples alone give |A||B|; the trivial ceiling is |A|²|B|².
        let ab = a.len() as u128 * b.len() as u128;
        prop_assert!(fast >= ab);
        prop_assert!(fast <= ab * ab);
    }

    #[test]
    fn cauchy_schwarz_lower_bound_holds((a, b, k) in pair_with_dilation()) {
        prop_assert!(cs_lower_bound_check(&a, &b, k).unwrap().ok);
    }

    #[test]
    fn energy_identity_via_pencils((a, b, k) in pair_with_dilation()) {
        let id = energy_via_incidence(&a, &b, k).unwrap();
        prop_assert_eq!(id.direct, id.via_lines);
        prop_assert_eq!(id.direct, energy(&a, &b, k).unwrap());
    }

    #[test]
    fn spectrum_accounting((a, b, c) in spectrum_input()) {
        let report = energy_spectrum(&a, &b, &c, &EnergyOptions::default()).unwrap();

        // Per-c rows sum to the total, one row per c, in c order.
        let sum: u128 = report.per_c.iter().map(|e| e.energy).sum();
        prop_assert_eq!(sum, report.total);
        let row_indices: Vec<i64> = report.per_c.iter().map(|e| e.c_index).collect();
        prop_assert_eq!(row_indices, c.to_index_vec());

        // The K envelope is a theorem, so both exact flags must be set.
        prop_assert!(report.k_lower_ok);
        prop_assert!(report.k_upper_ok);

        // Bands partition C and each member sits inside its dyadic window.
        let mut seen: BTreeSet<i64> = BTreeSet::new();
        for band in &report.levels {
            let mut band_sum: u128 = 0;
            for &ci in &band.c_indices {
                prop_assert!(seen.insert(ci), "c index {} in two bands", ci);
                let e_c = report
                    .per_c
                    .iter()
                    .find(|e| e.c_index == ci)
                    .expect("band member missing from per-c table")
                    .energy;
                band_sum += e_c;
                prop_assert!(band_window_ok(report.total, e_c, report.c_len, band.n));
            }
            prop_assert_eq!(band_sum, band.energy_sum);
        }
        prop_assert_eq!(seen.len() as u64, report.c_len);

        // Exactly one band is flagged largest: maximal MEMBER COUNT (the
        // pigeonhole that feeds the extraction is over c's, not energy
        // mass), ties broken toward larger N.
        let largest = &report.levels[report.largest_band];
        prop_assert!(largest.is_largest);
        prop_assert_eq!(report.levels.iter().filter(|b| b.is_largest).count(), 1);
        for band in &report.levels {
            prop_assert!(band.c_indices.len() <= largest.c_indices.len());
            if band.c_indices.len() == largest.c_indices.len() {
                prop_assert!(band.n <= largest.n);
            }
        }
    }

    // ── sumsets and dilations ────────────────────────────────────────────

    #[test]
    fn sumset_size_envelope((a, b, _) in pair_with_dilation(), plus in any::<bool>()) {
        let sign = if plus { Sign::Plus } else { Sign::Minus };
        let s = sumset(&a, &b, sign).unwrap();
        prop_assert_eq!(s.len() as u64, sumset_len(&a, &b, sign).unwrap());
        prop_assert!(s.len() >= a.len().max(b.len()));
        prop_assert!(s.len() <= a.len() * b.len());
    }

    #[test]
    fn dilation_preserves_counting((a, b, k) in pair_with_dilation()) {
        let d = dilate(&a, k).unwrap();
        prop_assert_eq!(d.support_len(), a.len());
        prop_assert_eq!(d.total_mass(), a.len() as u64);

        let ds = dilate_sum(&a, k, &b).unwrap();
        prop_assert_eq!(ds.total_mass(), (a.len() * b.len()) as u64);
        prop_assert!(ds.support_len() <= a.len() * b.len());
    }

    #[test]
    fn ruzsa_triangle_exact((x, y, z) in triple_same_scale(), plus in any::<bool>()) {
        let sign = if plus { Sign::Plus } else { Sign::Minus };
        let c = ruzsa_check(&x, &y, &z, sign).unwrap();
        // |X∘Z|·|Y| ≤ |X∘Y|·|Y∘Z| in exact integers.
        prop_assert!(u128::from(c.xz) * u128::from(c.y) <= u128::from(c.xy) * u128::from(c.yz));
    }

    // ── covering numbers ─────────────────────────────────────────────────

    #[test]
    fn covering_is_monotone_and_exact_at_delta(a in (3u32..=6).prop_flat_map(|m| unit_set(m, 12))) {
        let m = a.scale().m();
        let mut prev = 0u64;
        for j in 0..=m {
            let cover = a.covering_number(rat_pow2(-(j as i32)));
            prop_assert!(cover >= prev, "covering shrank as cells shrank");
            prop_assert!(cover >= 1);
            prop_assert!(cover <= a.len() as u64);
            prev = cover;
        }
        // At the grid scale every point occupies its own cell.
        prop_assert_eq!(a.covering_number(rat_pow2(-(m as i32))), a.len() as u64);
    }

    #[test]
    fn translation_invariants(
        a in (3u32..=6).prop_flat_map(|m| unit_set(m, 12)),
        shift in 0i64..=64,
    ) {
        let t = a.translate(shift).unwrap();
        prop_assert_eq!(t.len(), a.len());
        let m = a.scale().m() as i32;
        prop_assert_eq!(t.covering_number(rat_pow2(-m)), a.covering_number(rat_pow2(-m)));
        for (orig, moved) in a.indices().zip(t.indices()) {
            prop_assert_eq!(moved, orig + shift);
        }
    }

    // ── ratio sets ───────────────────────────────────────────────────────

    #[test]
    fn ratio_set_anchors_and_negation(
        d in (4u32..=6).prop_flat_map(|m| unit_set(m, 8)),
        seed in 0u64..=8,
    ) {
        let rs = ratio_set(&d, 0.25, EXHAUSTIVE_CAP, seed).unwrap();
        prop_assert!(!rs.truncated, "cap chosen large enough for exhaustive mode");
        if !rs.is_empty() {
            // Canonical anchors come first; the set is closed under negation.
            prop_assert!(rs.contains(Rat::from_integer(0)));
            prop_assert!(rs.contains(Rat::from_integer(1)));
            prop_assert!(rs.contains(Rat::from_integer(-1)));
            for entry in &rs.ratios {
                prop_assert!(rs.contains(-entry.value));
            }
        }
    }

    // ── text formats and canonical reports ───────────────────────────────

    #[test]
    fn set_file_round_trip(a in (3u32..=6).prop_flat_map(|m| unit_set(m, 12))) {
        let parsed = parse_set(&format_set(&a)).unwrap();
        prop_assert!(parsed.scale().same_as(a.scale()).is_ok());
        prop_assert_eq!(parsed.to_index_vec(), a.to_index_vec());
    }

    #[test]
    fn multiset_file_round_trip(
        pairs in proptest::collection::btree_map(-500i128..=500, 1u64..=9, 1..=16),
        log_den in 0u32..=8,
    ) {
        let vm = ValueMultiset::from_pairs(log_den, pairs.into_iter().collect()).unwrap();
        let parsed = parse_multiset(&format_multiset(&vm)).unwrap();
        prop_assert_eq!(parsed.log_den(), vm.log_den());
        prop_assert_eq!(parsed.entries(), vm.entries());
    }

    #[test]
    fn canonical_reports_are_deterministic((a, b, c) in spectrum_input()) {
        let report = energy_spectrum(&a, &b, &c, &EnergyOptions::default()).unwrap();
        let first = canonical_json_of(&report).unwrap();
        let second = canonical_json_of(&report).unwrap();
        prop_assert_eq!(&first, &second);
        // The output must itself be valid JSON.
        prop_assert!(serde_json::from_str::<serde_json::Value>(&first).is_ok());
    }
}
