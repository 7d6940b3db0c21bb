//! Structure extraction. Five cooperating pieces:
//!
//! 1. `cs_pigeonhole` — the Cauchy–Schwarz pigeonhole: from a family of
//!    dense subsets it certifies many pairwise-intersecting ordered pairs.
//! 2. `bsg_extract` — Balog–Szemerédi–Gowers-style refinement: from a pair
//!    (A, B) with large E_c it extracts A′ ⊆ A, B′ ⊆ B supported on many
//!    length-3 paths of the popular-cell graph, so |A′ + cB′|_δ is small.
//! 3. `structural_extract` — the full decomposition: energy spectrum →
//!    largest level set → per-c refinement → pigeonhole over the product
//!    pieces → a distinguished c* with its partner set C′ and pair (A′, B′).
//! 4. `bourgain_triple_search` / `build_d` — searches for a difference
//!    triple whose dilates land back near X − x₁, building the set D whose
//!    ratio set drives the final dichotomy.
//! 5. `dense_gap_analyze` — decides whether the ratio set of D is dense at
//!    scale s or has a certified gap around a half-ratio, and extracts the
//!    gap witnesses (e₁, e₂).
//!
//! All decisions are made in integer or rational arithmetic; the only f64
//! values are reported ratios and the energy precondition (which is given a
//! 1e−9 relative slack because level-set edges meet it with equality).

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::arith::{pair_dilate_sum, ratio_set, sumset_len, Sign, DEFAULT_ENUM_CAP};
use crate::energy::{energy, energy_spectrum, EnergyOptions, EnergyReport};
use crate::error::{Error, Result};
use crate::gridset::{multiscale_doubling_profile, DiscretizedSet, DoublingRow};
use crate::scale::{rat, rat_pow2, rat_to_f64, rat_to_string, Rat};

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Cauchy–Schwarz pigeonhole
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

#[derive(Clone, Debug)]
pub struct PigeonholeCertificate {
    /// Density parameter δ (exact).
    pub delta: Rat,
    /// Pair admission threshold δ²|T|/2.
    pub pair_threshold: Rat,
    /// Ordered pairs (s, s′), diagonal included, with
    /// |T_s ∩ T_s′| ≥ δ²|T|/2. Lexicographic order.
    pub pairs: Vec<(usize, usize)>,
    /// Certified floor δ²|S|²/2 ≤ |pairs|.
    pub pair_floor: Rat,
    /// partner_counts[s] = #{s′ : (s, s′) admitted}.
    pub partner_counts: Vec<u64>,
}

/// Pigeonhole over a family T_s ⊆ T (s ∈ S): assuming the density
/// hypothesis Σ_s |T_s| ≥ δ|S||T|, at least δ²|S|²/2 ordered pairs satisfy
/// |T_s ∩ T_s′| ≥ δ²|T|/2. Intersection sizes come from the callback; all
/// comparisons are exact. A violated floor is a bug, not a data property,
/// and is returned as an error.
pub fn cs_pigeonhole(
    universe_size: u64,
    set_sizes: &[u64],
    intersect: &dyn Fn(usize, usize) -> u64,
    delta: Rat,
) -> Result<PigeonholeCertificate> {
    if set_sizes.is_empty() {
        return Err(Error::EmptySet("cs_pigeonhole family"));
    }
    if universe_size == 0 {
        return Err(Error::EmptySet("cs_pigeonhole universe"));
    }
    if delta <= Rat::from_integer(0) || delta > Rat::from_integer(1) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("need 0 < delta ≤ 1, got {}", rat_to_string(delta)),
        });
    }
    let s_count = set_sizes.len() as u128;
    let total: u128 = set_sizes.iter().map(|&x| u128::from(x)).sum();
    // Σ|T_s| ≥ δ|S||T|, exactly.
    let need = delta * rat(s_count as i128 * i128::from(universe_size), 1);
    if rat(total as i128, 1) < need {
        return Err(Error::DensityHypothesis {
            sum: total,
            required: rat_to_string(need),
        });
    }
    let pair_threshold = delta * delta * rat(i128::from(universe_size), 2);
    let pair_floor = delta * delta * rat((s_count * s_count) as i128, 2);

    let mut pairs = Vec::new();
    let mut partner_counts = vec![0u64; set_sizes.len()];
    for s in 0..set_sizes.len() {
        for t in 0..set_sizes.len() {
            let inter = if s == t { set_sizes[s] } else { intersect(s, t) };
            if rat(i128::from(inter), 1) >= pair_threshold {
                pairs.push((s, t));
                partner_counts[s] += 1;
            }
        }
    }
    if rat(pairs.len() as i128, 1) < pair_floor {
        return Err(Error::CertificateViolated {
            pairs: pairs.len() as u64,
            floor: rat_to_string(pair_floor),
        });
    }
    Ok(PigeonholeCertificate { delta, pair_threshold, pairs, pair_floor, partner_counts })
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Pair refinement (popular-cell path graph)
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

#[derive(Clone, Debug)]
pub struct BsgExtraction {
    pub a_prime: DiscretizedSet,
    pub b_prime: DiscretizedSet,
    pub energy: u128,
    pub k_hint: f64,
    /// Edges of the popular-cell graph; 2·g_size ≥ |A||B| by construction.
    pub g_size: u64,
    pub a_ratio: f64,
    pub b_ratio: f64,
    /// |A′ + cB′|_δ
    pub sum_covering: u64,
    /// |A′ + cB′|_δ / √(|A||B|)
    pub sum_ratio: f64,
    /// Fitted exponents x with measured = K_hint^x (absent when K_hint = 1
    /// or the measurement is degenerate).
    pub fitted: BTreeMap<&'static str, f64>,
}

/// Refine (A, B) under E_c(A,B) ≥ (|A||B|)^(3/2)/K_hint.
///
/// The graph G keeps the pairs (a, b) whose value a + c·b lands in a
/// popular δ-cell (mass·2·#occupied ≥ |A||B|), which preserves at least
/// half of all pairs. A′ collects the a supported by at least half the
/// average number of length-3 walks; B′ the b with at least half the
/// average degree into A′. Both are provably nonempty. All walk counts are
/// exact integers.
pub fn bsg_extract(
    a: &DiscretizedSet,
    b: &DiscretizedSet,
    k: i64,
    k_hint: f64,
) -> Result<BsgExtraction> {
    a.scale().same_as(b.scale())?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet("bsg_extract"));
    }
    if !(k_hint.is_finite() && k_hint > 0.0) {
        return Err(Error::InvalidParameter {
            name: "k_hint",
            reason: format!("need a positive finite hint, got {k_hint}"),
        });
    }
    let (na, nb) = (a.len() as u64, b.len() as u64);
    let e = energy(a, b, k)?;
    // Level-set members meet the precondition with equality, so allow a
    // hair of floating-point slack before rejecting.
    let required = (na as f64 * nb as f64).powf(1.5) / k_hint;
    if (e as f64) < required * (1.0 - 1e-9) {
        return Err(Error::EnergyPrecondition { energy: e, required });
    }

    // Popular δ-cells of the value multiset. On denominator 2^(2m) the
    // δ-cell of a value is its numerator shifted down by m bits.
    let m = a.scale().m();
    let ds = crate::arith::dilate_sum(a, k, b)?;
    let cells = ds.cell_masses(a.scale().delta());
    let occupied = cells.len() as u128;
    let popular: HashSet<i128> = cells
        .iter()
        .filter(|&&(_, mass)| u128::from(mass) * 2 * occupied >= u128::from(na) * u128::from(nb))
        .map(|&(cell, _)| cell)
        .collect();

    // Adjacency bitmap rows over B.
    let a_idx = a.to_index_vec();
    let b_idx = b.to_index_vec();
    let words = b_idx.len().div_ceil(64);
    let mut rows: Vec<u64> = vec![0; a_idx.len() * words];
    let mut g_size: u64 = 0;
    for (ia, &i) in a_idx.iter().enumerate() {
        let base = i128::from(i) << m;
        let row = &mut rows[ia * words..(ia + 1) * words];
        for (jb, &j) in b_idx.iter().enumerate() {
            let cell = (base + i128::from(k) * i128::from(j)) >> m;
            if popular.contains(&cell) {
                row[jb / 64] |= 1u64 << (jb % 64);
                g_size += 1;
            }
        }
    }
    debug_assert!(2 * g_size >= na * nb, "popular cells lost more than half the pairs");

    // deg(a), w(b) = Σ_{a′∼b} deg(a′), Path3(a) = Σ_{b∼a} w(b).
    let deg_a: Vec<u64> = (0..a_idx.len())
        .map(|ia| rows[ia * words..(ia + 1) * words].iter().map(|w| w.count_ones() as u64).sum())
        .collect();
    let mut w_b: Vec<u128> = vec![0; b_idx.len()];
    for ia in 0..a_idx.len() {
        let row = &rows[ia * words..(ia + 1) * words];
        for (jb, wb) in w_b.iter_mut().enumerate() {
            if row[jb / 64] >> (jb % 64) & 1 == 1 {
                *wb += u128::from(deg_a[ia]);
            }
        }
    }
    let path3: Vec<u128> = (0..a_idx.len())
        .map(|ia| {
            let row = &rows[ia * words..(ia + 1) * words];
            w_b.iter()
                .enumerate()
                .filter(|(jb, _)| row[jb / 64] >> (jb % 64) & 1 == 1)
                .map(|(_, &w)| w)
                .sum()
        })
        .collect();
    let path3_total: u128 = path3.iter().sum();
    if path3_total == 0 {
        // Cannot happen: every pair lies on a walk a→b→a→b once G has an
        // edge, and G keeps at least half of a nonempty pair set.
        return Err(Error::EmptyStage("path graph"));
    }

    // A′: Path3(a) at least half the average over all of A.
    let keep_a: Vec<usize> = (0..a_idx.len())
        .filter(|&ia| 2 * u128::from(na) * path3[ia] >= path3_total)
        .collect();
    if keep_a.is_empty() {
        return Err(Error::EmptyStage("path-popular rows"));
    }
    // B′: degree into A′ at least half the average over all of B.
    let mut deg_into: Vec<u64> = vec![0; b_idx.len()];
    for &ia in &keep_a {
        let row = &rows[ia * words..(ia + 1) * words];
        for (jb, d) in deg_into.iter_mut().enumerate() {
            if row[jb / 64] >> (jb % 64) & 1 == 1 {
                *d += 1;
            }
        }
    }
    let deg_total: u128 = deg_into.iter().map(|&d| u128::from(d)).sum();
    if deg_total == 0 {
        return Err(Error::EmptyStage("degrees into refined rows"));
    }
    let keep_b: Vec<usize> = (0..b_idx.len())
        .filter(|&jb| 2 * u128::from(nb) * u128::from(deg_into[jb]) >= deg_total)
        .collect();
    if keep_b.is_empty() {
        return Err(Error::EmptyStage("refined columns"));
    }

    let a_prime =
        DiscretizedSet::from_indices(a.scale(), keep_a.iter().map(|&ia| a_idx[ia]))?;
    let b_prime =
        DiscretizedSet::from_indices(b.scale(), keep_b.iter().map(|&jb| b_idx[jb]))?;
    let sum_covering = crate::arith::dilate_sum(&a_prime, k, &b_prime)?
        .covering_number(a.scale().delta());

    let a_ratio = a_prime.len() as f64 / na as f64;
    let b_ratio = b_prime.len() as f64 / nb as f64;
    let sum_ratio = sum_covering as f64 / (na as f64 * nb as f64).sqrt();
    let mut fitted = BTreeMap::new();
    let logk = k_hint.ln();
    if logk.abs() > 1e-12 {
        for (name, v) in
            [("a_fraction", a_ratio), ("b_fraction", b_ratio), ("sum_ratio", sum_ratio)]
        {
            if v > 0.0 {
                fitted.insert(name, v.ln() / logk);
            }
        }
    }
    Ok(BsgExtraction {
        a_prime,
        b_prime,
        energy: e,
        k_hint,
        g_size,
        a_ratio,
        b_ratio,
        sum_covering,
        sum_ratio,
        fitted,
    })
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Structural decomposition
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

#[derive(Clone, Copy, Debug)]
pub struct ExtractOptions {
    pub m1: f64,
    pub m2: f64,
    pub energy: EnergyOptions,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { m1: 1.0, m2: 7.0, energy: EnergyOptions::default() }
    }
}

#[derive(Clone, Debug)]
pub struct VerificationRatios {
    pub sum_doubling: f64,
    pub diff_doubling: f64,
    /// (ρK)^(2m₂+2m₁)
    pub doubling_target: f64,
    /// max_{c ∈ C′} |c*B′ + cB′|_δ / |B′|
    pub dilate_max: f64,
    /// (ρK)^(4m₂+6m₁) — the stated form.
    pub dilate_target_statement: f64,
    /// (ρK)^(4m₂+5m₁) — the form the argument actually yields.
    pub dilate_target_proof: f64,
    pub b_fraction: f64,
    /// (ρK)^(−m₁)
    pub b_fraction_target: f64,
    pub c_fraction: f64,
    /// ρ(ρK)^(−4m₁)/|ln δ|
    pub c_fraction_target: f64,
    /// Fitted exponents x with measured = (ρK)^x.
    pub fitted: BTreeMap<&'static str, f64>,
}

#[derive(Clone, Debug)]
pub struct StructuralExtraction {
    pub spectrum: EnergyReport,
    /// ρ of the largest level set and the spectrum statistic K.
    pub rho: f64,
    pub k_statistic: f64,
    pub rho_k: f64,
    pub c1_indices: Vec<i64>,
    /// Refined pieces per c ∈ C₁: (c index, |A_c|, |B_c|).
    pub per_c_sizes: Vec<(i64, u64, u64)>,
    pub certificate: PigeonholeCertificate,
    pub c_star: i64,
    pub c_prime_indices: Vec<i64>,
    pub a_prime: DiscretizedSet,
    pub b_prime: DiscretizedSet,
    pub ratios: VerificationRatios,
}

pub fn structural_extract(
    a: &DiscretizedSet,
    b: &DiscretizedSet,
    c: &DiscretizedSet,
) -> Result<StructuralExtraction> {
    structural_extract_opts(a, b, c, &ExtractOptions::default())
}

/// The decomposition pipeline stage. Stages and their tie rules:
/// largest level set (ties toward larger N, inherited from the spectrum),
/// per-c refinement with K_hint = ρK, pigeonhole over the product pieces
/// A_c × B_c inside A × B with the exact family density as δ, then c* =
/// the member with the most admitted partners (ties toward the smallest
/// c index). Every emptiness on the way out names its stage.
pub fn structural_extract_opts(
    a: &DiscretizedSet,
    b: &DiscretizedSet,
    c: &DiscretizedSet,
    opts: &ExtractOptions,
) -> Result<StructuralExtraction> {
    let spectrum = energy_spectrum(a, b, c, &opts.energy)?;
    let band = &spectrum.levels[spectrum.largest_band];
    let c1_indices = band.c_indices.clone();
    if c1_indices.is_empty() {
        return Err(Error::EmptyStage("largest level set"));
    }
    let rho = band.rho;
    let k_statistic = spectrum.k_statistic;
    let rho_k = rho * k_statistic;

    // Per-c refinement. Band membership guarantees the precondition at
    // K_hint = ρK (band floor = mean·2^N ⟺ energy ≥ (|A||B|)^(3/2)/(ρK)).
    let mut per_c = Vec::with_capacity(c1_indices.len());
    for &k in &c1_indices {
        per_c.push((k, bsg_extract(a, b, k, rho_k)?));
    }
    let per_c_sizes: Vec<(i64, u64, u64)> = per_c
        .iter()
        .map(|(k, e)| (*k, e.a_prime.len() as u64, e.b_prime.len() as u64))
        .collect();

    // Pigeonhole over T_c = A_c × B_c inside T = A × B, with the family's
    // exact density as δ.
    let universe = a.len() as u64 * b.len() as u64;
    let sizes: Vec<u64> =
        per_c.iter().map(|(_, e)| e.a_prime.len() as u64 * e.b_prime.len() as u64).collect();
    let total: u128 = sizes.iter().map(|&s| u128::from(s)).sum();
    let delta_param = rat(total as i128, c1_indices.len() as i128 * i128::from(universe));
    let a_pieces: Vec<Vec<i64>> = per_c.iter().map(|(_, e)| e.a_prime.to_index_vec()).collect();
    let b_pieces: Vec<Vec<i64>> = per_c.iter().map(|(_, e)| e.b_prime.to_index_vec()).collect();
    let intersect = |s: usize, t: usize| -> u64 {
        sorted_intersection(&a_pieces[s], &a_pieces[t]) * sorted_intersection(&b_pieces[s], &b_pieces[t])
    };
    let certificate = cs_pigeonhole(universe, &sizes, &intersect, delta_param)?;

    // c*: most partners, ties toward the smallest c index (scan order).
    let mut star_pos = 0usize;
    for (pos, &count) in certificate.partner_counts.iter().enumerate() {
        if count > certificate.partner_counts[star_pos] {
            star_pos = pos;
        }
    }
    let c_star = c1_indices[star_pos];
    let c_prime_indices: Vec<i64> = certificate
        .pairs
        .iter()
        .filter(|&&(s, _)| s == star_pos)
        .map(|&(_, t)| c1_indices[t])
        .collect();
    if c_prime_indices.is_empty() {
        return Err(Error::EmptyStage("partner set"));
    }
    let a_prime = per_c[star_pos].1.a_prime.clone();
    let b_prime = per_c[star_pos].1.b_prime.clone();

    // Verification ratios against their (ρK)-power targets.
    let nb_prime = b_prime.len() as f64;
    let sum_doubling = sumset_len(&b_prime, &b_prime, Sign::Plus)? as f64 / nb_prime;
    let diff_doubling = sumset_len(&b_prime, &b_prime, Sign::Minus)? as f64 / nb_prime;
    let delta = a.scale().delta();
    let mut dilate_max = 0.0f64;
    for &kc in &c_prime_indices {
        let cov = pair_dilate_sum(&b_prime, c_star, &b_prime, kc)?.covering_number(delta);
        dilate_max = dilate_max.max(cov as f64 / nb_prime);
    }
    let (m1, m2) = (opts.m1, opts.m2);
    let b_fraction = nb_prime / b.len() as f64;
    let c_fraction = c_prime_indices.len() as f64 / c.len() as f64;
    let abs_log_delta = f64::from(a.scale().m()) * std::f64::consts::LN_2;
    let ratios = {
        let doubling_target = rho_k.powf(2.0 * m2 + 2.0 * m1);
        let dilate_target_statement = rho_k.powf(4.0 * m2 + 6.0 * m1);
        let dilate_target_proof = rho_k.powf(4.0 * m2 + 5.0 * m1);
        let b_fraction_target = rho_k.powf(-m1);
        let c_fraction_target = rho * rho_k.powf(-4.0 * m1) / abs_log_delta;
        let mut fitted = BTreeMap::new();
        let logk = rho_k.ln();
        if logk.abs() > 1e-12 {
            for (name, v) in [
                ("sum_doubling", sum_doubling),
                ("diff_doubling", diff_doubling),
                ("dilate_max", dilate_max),
                ("b_fraction", b_fraction),
                ("c_fraction", c_fraction),
            ] {
                if v > 0.0 {
                    fitted.insert(name, v.ln() / logk);
                }
            }
        }
        VerificationRatios {
            sum_doubling,
            diff_doubling,
            doubling_target,
            dilate_max,
            dilate_target_statement,
            dilate_target_proof,
            b_fraction,
            b_fraction_target,
            c_fraction,
            c_fraction_target,
            fitted,
        }
    };

    Ok(StructuralExtraction {
        spectrum,
        rho,
        k_statistic,
        rho_k,
        c1_indices,
        per_c_sizes,
        certificate,
        c_star,
        c_prime_indices,
        a_prime,
        b_prime,
        ratios,
    })
}

fn sorted_intersection(x: &[i64], y: &[i64]) -> u64 {
    let mut count = 0u64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Triple search
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

#[derive(Clone, Debug)]
pub struct BourgainSearch {
    /// M = max_{y ∈ Y} (number of distinct values of X + yX).
    pub m_statistic: u64,
    /// Value indices (i₁, i₂, i₃) of the winning triple, if any triple
    /// produced a nonempty D.
    pub triple: Option<[i64; 3]>,
    /// D ⊆ X − x₁: for each c′ ∈ Y the nearest element of X − x₁ to
    /// (x₂ − x₃)c′ that lands within δ/2.
    pub d: DiscretizedSet,
    /// |D|·M / (|X||Y|)
    pub ratio: f64,
    pub truncated: bool,
    pub triples_examined: u64,
    /// Set when every triple produced an empty D — the low-energy regime
    /// (m0) where no dilate of a difference returns near the set.
    pub diagnostic: Option<String>,
}

/// Scan triples (x₁, x₂, x₃) ∈ X³ with x₂ ≠ x₃, building for each the set
/// D of near-returns: for c′ ∈ Y, the element of X − x₁ nearest to
/// (x₂−x₃)·c′ is kept when it lies within δ/2 (ties at exactly δ/2 resolve
/// to the lower element; the membership test is the exact integer
/// comparison |q·2^m − Δ·k′| ≤ 2^(m−1)). The lexicographically first triple
/// of maximal |D| wins. Exhaustive when |X|³|Y| ≤ cap, otherwise a seeded
/// sample of cap triples with the truncated flag set.
pub fn bourgain_triple_search(
    x: &DiscretizedSet,
    y: &DiscretizedSet,
    cap: u64,
    seed: u64,
) -> Result<BourgainSearch> {
    x.scale().same_as(y.scale())?;
    if x.is_empty() {
        return Err(Error::EmptySet("triple search base set"));
    }
    if y.is_empty() {
        return Err(Error::EmptySet("triple search dilation set"));
    }
    let m = x.scale().m();
    let xi = x.to_index_vec();
    let yi = y.to_index_vec();

    // M = max over y of the exact number of distinct values of X + yX.
    let mut m_statistic = 0u64;
    for &k in &yi {
        let support = pair_dilate_sum(x, x.scale().cells(), x, k)?.support_len() as u64;
        m_statistic = m_statistic.max(support);
    }

    let half = 1i128 << (m - 1);
    let n = xi.len();
    // The candidate array X − x₁ (scaled by 2^m) depends only on p1;
    // precompute all n of them once.
    let shifted_all: Vec<Vec<i128>> = (0..n)
        .map(|p1| xi.iter().map(|&q| i128::from(q - xi[p1]) << m).collect())
        .collect();
    // Evaluate one triple by positions (p1, p2, p3), p2 ≠ p3.
    let eval = |p1: usize, p2: usize, p3: usize| -> BTreeSet<i64> {
        let shifted = &shifted_all[p1];
        let diff = i128::from(xi[p2]) - i128::from(xi[p3]);
        let mut d = BTreeSet::new();
        for &k in &yi {
            let target = diff * i128::from(k);
            // Nearest shifted value; ties toward the lower element.
            let pos = shifted.partition_point(|&v| v < target);
            let mut best: Option<(i128, usize)> = None;
            if pos > 0 {
                best = Some(((target - shifted[pos - 1]).abs(), pos - 1));
            }
            if pos < shifted.len() {
                let cand = ((shifted[pos] - target).abs(), pos);
                best = Some(match best {
                    Some(b) if b.0 <= cand.0 => b,
                    _ => cand,
                });
            }
            if let Some((dist, p)) = best {
                if dist <= half {
                    d.insert(xi[p] - xi[p1]);
                }
            }
        }
        d
    };

    let total = (n as u128).pow(3) * yi.len() as u128;
    let truncated = total > u128::from(cap);
    let mut best: Option<([i64; 3], BTreeSet<i64>)> = None;
    let mut examined = 0u64;
    if !truncated {
        for p1 in 0..n {
            for p2 in 0..n {
                for p3 in 0..n {
                    if p2 == p3 {
                        continue;
                    }
                    examined += 1;
                    let d = eval(p1, p2, p3);
                    let better = match &best {
                        None => !d.is_empty(),
                        Some((_, cur)) => d.len() > cur.len(),
                    };
                    if better {
                        best = Some(([xi[p1], xi[p2], xi[p3]], d));
                    }
                }
            }
        }
    } else {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
        let budget = cap / yi.len().max(1) as u64;
        for _ in 0..budget.max(1) {
            let p1 = rng.gen_range(0..n);
            let p2 = rng.gen_range(0..n);
            let p3 = rng.gen_range(0..n);
            if p2 == p3 {
                continue;
            }
            examined += 1;
            let d = eval(p1, p2, p3);
            let better = match &best {
                None => !d.is_empty(),
                Some((_, cur)) => d.len() > cur.len(),
            };
            if better {
                best = Some(([xi[p1], xi[p2], xi[p3]], d));
            }
        }
    }

    let (triple, d_set, diagnostic) = match best {
        Some((t, d)) => (Some(t), DiscretizedSet::from_indices(x.scale(), d)?, None),
        None => (
            None,
            DiscretizedSet::empty(x.scale()),
            Some(
                "every dilated difference missed X − x₁ by more than δ/2; \
                 consistent with the low-growth regime (m0)"
                    .to_string(),
            ),
        ),
    };
    let ratio = d_set.len() as f64 * m_statistic as f64 / (n as f64 * yi.len() as f64);
    Ok(BourgainSearch {
        m_statistic,
        triple,
        d: d_set,
        ratio,
        truncated,
        triples_examined: examined,
        diagnostic,
    })
}

/// Pipeline wrapper: D from the refined pair (B′, C′). Requires |B′| ≥ 2
/// (a difference triple needs two distinct elements) and C′ nonempty.
pub fn build_d(
    b_prime: &DiscretizedSet,
    c_prime: &DiscretizedSet,
    cap: u64,
    seed: u64,
) -> Result<BourgainSearch> {
    if b_prime.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "b_prime",
            reason: format!("need at least 2 elements for a difference triple, got {}", b_prime.len()),
        });
    }
    if c_prime.is_empty() {
        return Err(Error::EmptySet("build_d dilation set"));
    }
    bourgain_triple_search(b_prime, c_prime, cap, seed)
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Dense / gap dichotomy
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DenseGapVerdict {
    Dense,
    Gap,
    /// Neither branch fired — a legal outcome, reported as a finding.
    Neither,
}

#[derive(Clone, Debug)]
pub struct GapWitness {
    /// The ratio r ∈ R ∩ [0,1] at which the gap was found.
    pub r: Rat,
    /// r/2 or (r+1)/2, whichever is s-far from R (ties toward r/2).
    pub location: Rat,
    /// Exact distance from `location` to R.
    pub distance: Rat,
    /// Witness quadruple of r in the source set (value indices).
    pub rep: [i64; 4],
    /// x₁ = d₁ − d₂ and x₂ = d₃ − d₄ as values.
    pub x1: Rat,
    pub x2: Rat,
    /// Gap generators: location r/2 gives (e₁, e₂) = (x₁, 2x₂);
    /// location (r+1)/2 gives (x₁ + x₂, 2x₂).
    pub e1: Rat,
    pub e2: Rat,
}

#[derive(Clone, Debug)]
pub struct DenseGapReport {
    pub verdict: DenseGapVerdict,
    pub kappa: f64,
    /// Gap/covering scale s = 2^l, the largest power of two not exceeding
    /// δ^(1−2κ)·|b₂ − b₃|.
    pub s: Rat,
    pub l: i32,
    pub threshold: Rat,
    pub unit_ratio_count: u64,
    /// Covering number of R ∩ [0,1] at width s (computed when no gap).
    pub covering: Option<u64>,
    /// Density floor threshold·2^(−l).
    pub covering_floor: Rat,
    pub gap: Option<GapWitness>,
    pub truncated: bool,
    pub quadruples_examined: u64,
    /// Multiscale doubling profile of the analyzed set.
    pub doubling: Vec<DoublingRow>,
    pub note: Option<String>,
}

/// Default density threshold for the DENSE branch.
pub fn default_gap_threshold() -> Rat {
    rat(1, 8)
}

/// Decide the dense/gap dichotomy for the ratio set of `d_tilde`.
///
/// R = ratio set at exponent κ; s = largest power of two with
/// s ≤ δ^(1−2κ)|b₂−b₃|. Scanning r ∈ R ∩ [0,1] in ascending order, the
/// first r with max(dist(r/2, R), dist((r+1)/2, R)) ≥ s yields GAP with an
/// exact witness. Otherwise DENSE requires the s-covering of R ∩ [0,1] to
/// reach threshold·2^(−l); failing both is NEITHER (legal, noted). An
/// empty ratio set is an error naming the small-denominator regime.
pub fn dense_gap_analyze(
    d_tilde: &DiscretizedSet,
    kappa: f64,
    b2_minus_b3: Rat,
    threshold: Rat,
    cap: u64,
    seed: u64,
) -> Result<DenseGapReport> {
    if d_tilde.is_empty() {
        return Err(Error::EmptySet("dense_gap_analyze"));
    }
    if b2_minus_b3 == Rat::from_integer(0) {
        return Err(Error::InvalidParameter {
            name: "b2_minus_b3",
            reason: "gap scale needs a nonzero difference".into(),
        });
    }
    if threshold <= Rat::from_integer(0) {
        return Err(Error::InvalidParameter {
            name: "threshold",
            reason: "density threshold must be positive".into(),
        });
    }
    let rs = ratio_set(d_tilde, kappa, cap, seed)?;
    if rs.is_empty() {
        return Err(Error::EmptyRatioSet(rs.diagnostic.unwrap_or_else(|| {
            "no admissible denominator pair; the small-denominator regime (4.3) applies".into()
        })));
    }

    // s = 2^l ≤ δ^(1−2κ)|Δ| < 2^(l+1). The logarithm is evaluated in f64;
    // for the dyadic data in play it is exact to well below the floor's
    // granularity.
    let m = f64::from(d_tilde.scale().m());
    let abs_delta = if b2_minus_b3 < Rat::from_integer(0) { -b2_minus_b3 } else { b2_minus_b3 };
    let lf = rat_to_f64(abs_delta).log2() + m * (2.0 * kappa - 1.0);
    let l = lf.floor() as i32;
    if l.abs() > 96 {
        return Err(Error::Overflow("gap scale exponent"));
    }
    let s = rat_pow2(l);
    let covering_floor = threshold * rat_pow2(-l);

    let doubling = multiscale_doubling_profile(d_tilde)?;
    let two = Rat::from_integer(2);

    // GAP scan, ascending over R ∩ [0,1].
    for e in rs.unit_entries() {
        let r = e.value;
        let d1 = rs.min_distance(r / two).expect("nonempty ratio set");
        let d2 = rs.min_distance((r + Rat::from_integer(1)) / two).expect("nonempty ratio set");
        if d1.max(d2) >= s {
            let [i1, i2, i3, i4] = e.rep;
            let delta = d_tilde.scale().delta();
            let x1 = rat(i128::from(i1) - i128::from(i2), 1) * delta;
            let x2 = rat(i128::from(i3) - i128::from(i4), 1) * delta;
            // Ties toward r/2.
            let (location, distance, e1) = if d1 >= d2 {
                (r / two, d1, x1)
            } else {
                ((r + Rat::from_integer(1)) / two, d2, x1 + x2)
            };
            let e2 = two * x2;
            return Ok(DenseGapReport {
                verdict: DenseGapVerdict::Gap,
                kappa,
                s,
                l,
                threshold,
                unit_ratio_count: rs.unit_entries().len() as u64,
                covering: None,
                covering_floor,
                gap: Some(GapWitness { r, location, distance, rep: e.rep, x1, x2, e1, e2 }),
                truncated: rs.truncated,
                quadruples_examined: rs.quadruples_examined,
                doubling,
                note: None,
            });
        }
    }

    // DENSE check at scale s.
    let unit_values: Vec<Rat> = rs.unit_entries().iter().map(|e| e.value).collect();
    let covering = crate::gridset::covering_number_rationals(&unit_values, s);
    let dense = rat(i128::from(covering), 1) >= covering_floor;
    Ok(DenseGapReport {
        verdict: if dense { DenseGapVerdict::Dense } else { DenseGapVerdict::Neither },
        kappa,
        s,
        l,
        threshold,
        unit_ratio_count: unit_values.len() as u64,
        covering: Some(covering),
        covering_floor,
        gap: None,
        truncated: rs.truncated,
        quadruples_examined: rs.quadruples_examined,
        doubling,
        note: if dense {
            None
        } else {
            Some(format!(
                "no s-gap around any half-ratio and covering {} below floor {}; \
                 neither branch fires at kappa = {kappa}",
                covering,
                rat_to_string(covering_floor)
            ))
        },
    })
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Full pipeline
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub extract: ExtractOptions,
    pub kappa: f64,
    pub threshold: Rat,
    pub cap: u64,
    pub seed: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            extract: ExtractOptions::default(),
            kappa: 0.25,
            threshold: default_gap_threshold(),
            cap: DEFAULT_ENUM_CAP,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineReport {
    pub extraction: StructuralExtraction,
    pub search: Option<BourgainSearch>,
    pub dichotomy: Option<DenseGapReport>,
    /// Stage notes: legal early exits and regime fallbacks.
    pub notes: Vec<String>,
}

/// Decomposition → triple search → dichotomy, recording legal early exits
/// (too-small B′, empty D, empty ratio set) as notes instead of errors.
pub fn run_pipeline(
    a: &DiscretizedSet,
    b: &DiscretizedSet,
    c: &DiscretizedSet,
    opts: &PipelineOptions,
) -> Result<PipelineReport> {
    let extraction = structural_extract_opts(a, b, c, &opts.extract)?;
    let mut notes = Vec::new();

    let c_prime =
        DiscretizedSet::from_indices(c.scale(), extraction.c_prime_indices.iter().copied())?;
    let search = if extraction.b_prime.len() < 2 {
        notes.push("refined pair too small for a difference triple (|B'| < 2)".to_string());
        None
    } else {
        Some(build_d(&extraction.b_prime, &c_prime, opts.cap, opts.seed)?)
    };

    let dichotomy = match &search {
        Some(s) if s.triple.is_some() && !s.d.is_empty() => {
            let [_, x2, x3] = s.triple.expect("checked");
            let delta_val =
                rat(i128::from(x2) - i128::from(x3), 1) * extraction.b_prime.scale().delta();
            match dense_gap_analyze(&s.d, opts.kappa, delta_val, opts.threshold, opts.cap, opts.seed)
            {
                Ok(rep) => Some(rep),
                Err(Error::EmptyRatioSet(msg)) => {
                    notes.push(format!("ratio set empty: {msg}"));
                    None
                }
                Err(e) => return Err(e),
            }
        }
        Some(s) => {
            if let Some(msg) = &s.diagnostic {
                notes.push(msg.clone());
            }
            None
        }
        None => None,
    };

    Ok(PipelineReport { extraction, search, dichotomy, notes })
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

    // ── pigeonhole ───────────────────────────────────────────────────────

    #[test]
    fn pigeonhole_full_density() {
        // T₁ = T₂ = T, |T| = 10, δ = 1: all four ordered pairs admitted.
        let cert = cs_pigeonhole(10, &[10, 10], &|_, _| 10, Rat::from_integer(1)).unwrap();
        assert_eq!(cert.pairs, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert_eq!(cert.partner_counts, vec![2, 2]);
        assert_eq!(cert.pair_threshold, rat(5, 1));
        assert_eq!(cert.pair_floor, rat(2, 1));
    }

    #[test]
    fn pigeonhole_disjoint_halves() {
        // T₁ = {1..5}, T₂ = {6..10}, δ = 1/2: only the diagonal survives.
        let cert = cs_pigeonhole(10, &[5, 5], &|_, _| 0, rat(1, 2)).unwrap();
        assert_eq!(cert.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(cert.pair_threshold, rat(5, 4));
        assert_eq!(cert.pair_floor, rat(1, 2));
    }

    #[test]
    fn pigeonhole_density_hypothesis() {
        let err = cs_pigeonhole(10, &[1, 1], &|_, _| 0, rat(1, 2));
        assert!(matches!(err, Err(Error::DensityHypothesis { sum: 2, .. })));
    }

    // ── pair refinement ──────────────────────────────────────────────────

    #[test]
    fn bsg_singletons_pass_through() {
        let a = set(4, [3]);
        let b = set(4, [9]);
        let out = bsg_extract(&a, &b, 16, 1.0).unwrap();
        assert_eq!(out.a_prime.to_index_vec(), vec![3]);
        assert_eq!(out.b_prime.to_index_vec(), vec![9]);
        assert_eq!(out.g_size, 1);
    }

    #[test]
    fn bsg_long_progression() {
        // A = B = AP(64) step δ, c = 1, with the exact K as hint: the
        // refinement keeps a large middle block and the sum stays short.
        let m = Scale::new(6).unwrap();
        let ap = DiscretizedSet::from_indices(m, 0..64).unwrap();
        let e = energy(&ap, &ap, 64).unwrap();
        let k_true = (64.0f64 * 64.0).powf(1.5) / e as f64;
        let out = bsg_extract(&ap, &ap, 64, k_true).unwrap();
        assert_eq!(out.energy, 524224);
        assert!(2 * out.g_size >= 64 * 64);
        assert!(out.a_prime.len() >= 16, "|A'| = {}", out.a_prime.len());
        assert!(!out.b_prime.is_empty());
        assert!(out.sum_covering <= 512, "covering = {}", out.sum_covering);
    }

    #[test]
    fn bsg_union_of_blocks() {
        // Two separated blocks of 32: the graph still leaves a quarter-size
        // refined row set.
        let m = Scale::new(7).unwrap();
        let idx: Vec<i64> = (0..32).chain(64..96).collect();
        let x = DiscretizedSet::from_indices(m, idx).unwrap();
        let e = energy(&x, &x, 128).unwrap();
        let k_true = (64.0f64 * 64.0).powf(1.5) / e as f64;
        let out = bsg_extract(&x, &x, 128, k_true).unwrap();
        assert!(out.a_prime.len() >= 8, "|A'| = {}", out.a_prime.len());
        assert!(2 * out.g_size >= 64 * 64);
    }

    #[test]
    fn bsg_rejects_bad_hint() {
        let a = set(4, 0..4);
        // K_hint far below the truth makes the precondition unsatisfiable.
        let err = bsg_extract(&a, &a, 16, 0.01);
        assert!(matches!(err, Err(Error::EnergyPrecondition { .. })));
    }

    // ── structural decomposition ─────────────────────────────────────────

    #[test]
    fn structural_small_triple() {
        let m = Scale::new(6).unwrap();
        let a = DiscretizedSet::from_indices(m, (0..16).map(|i| 2 * i)).unwrap();
        let b = DiscretizedSet::from_indices(m, 0..16).unwrap();
        let c = DiscretizedSet::from_indices(m, [32, 40, 48, 56, 64]).unwrap();
        let out = structural_extract(&a, &b, &c).unwrap();

        // c* belongs to the largest band, C′ contains it, and the refined
        // pair matches the per-c piece for c*.
        assert!(out.c1_indices.contains(&out.c_star));
        assert!(out.c_prime_indices.contains(&out.c_star));
        assert!(!out.a_prime.is_empty() && !out.b_prime.is_empty());
        let star_pos = out.c1_indices.iter().position(|&k| k == out.c_star).unwrap();
        assert_eq!(out.per_c_sizes[star_pos].1, out.a_prime.len() as u64);
        assert_eq!(out.per_c_sizes[star_pos].2, out.b_prime.len() as u64);

        // Reported ratios recompute from the returned sets.
        let nb = out.b_prime.len() as f64;
        let plus = sumset_len(&out.b_prime, &out.b_prime, Sign::Plus).unwrap() as f64 / nb;
        assert_eq!(plus, out.ratios.sum_doubling);
        let minus = sumset_len(&out.b_prime, &out.b_prime, Sign::Minus).unwrap() as f64 / nb;
        assert_eq!(minus, out.ratios.diff_doubling);
        let mut dmax = 0.0f64;
        for &kc in &out.c_prime_indices {
            let cov = pair_dilate_sum(&out.b_prime, out.c_star, &out.b_prime, kc)
                .unwrap()
                .covering_number(m.delta());
            dmax = dmax.max(cov as f64 / nb);
        }
        assert_eq!(dmax, out.ratios.dilate_max);
        assert_eq!(out.ratios.b_fraction, nb / 16.0);
        assert_eq!(out.ratios.c_fraction, out.c_prime_indices.len() as f64 / 5.0);

        // The certificate floor held (it must, or the call errors).
        assert!(out.certificate.pairs.len() as f64 > 0.0);
    }

    #[test]
    fn structural_ties_resolve_to_smallest_c() {
        // A symmetric triple where all c behave identically: every c ends
        // in one band, partner counts tie, and c* is the smallest index.
        let m = Scale::new(5).unwrap();
        let a = DiscretizedSet::from_indices(m, 0..8).unwrap();
        let c = DiscretizedSet::from_indices(m, [16, 32]).unwrap();
        let out = structural_extract(&a, &a, &c).unwrap();
        if out.c1_indices.len() == 2
            && out.certificate.partner_counts[0] == out.certificate.partner_counts[1]
        {
            assert_eq!(out.c_star, out.c1_indices[0]);
        }
    }

    // ── triple search ────────────────────────────────────────────────────

    #[test]
    fn triple_search_worked_example() {
        // X = {0, δ, 2δ}, Y = {1/2} at m = 4: M = 7 and the first triple
        // (0, 0, δ) already achieves the maximum |D| = 1 with D = {0}.
        let x = set(4, [0, 1, 2]);
        let y = set(4, [8]);
        let out = bourgain_triple_search(&x, &y, DEFAULT_ENUM_CAP, 1).unwrap();
        assert_eq!(out.m_statistic, 7);
        assert_eq!(out.triple, Some([0, 0, 1]));
        assert_eq!(out.d.to_index_vec(), vec![0]);
        assert!((out.ratio - 7.0 / 3.0).abs() < 1e-15);
        assert!(!out.truncated);
        assert!(out.diagnostic.is_none());
    }

    #[test]
    fn triple_search_progression_ratio() {
        // X = AP(16), Y = AP(4) ⊂ [1/2, 1]: near-returns are plentiful.
        let m = Scale::new(6).unwrap();
        let x = DiscretizedSet::from_indices(m, 0..16).unwrap();
        let y = DiscretizedSet::from_indices(m, [32, 40, 48, 56]).unwrap();
        let out = bourgain_triple_search(&x, &y, DEFAULT_ENUM_CAP, 1).unwrap();
        assert!(out.ratio >= 1.0, "ratio = {}", out.ratio);
        assert!(out.triple.is_some());
    }

    #[test]
    fn triple_search_all_empty_is_diagnostic() {
        // X = {0, 3δ}, Y = {3/4} at m = 6: targets ±144 (in 2^-12 units)
        // miss every shifted element by more than 2^5.
        let x = set(6, [0, 3]);
        let y = set(6, [48]);
        let out = bourgain_triple_search(&x, &y, DEFAULT_ENUM_CAP, 1).unwrap();
        assert!(out.d.is_empty());
        assert_eq!(out.triple, None);
        assert_eq!(out.ratio, 0.0);
        assert!(out.diagnostic.as_deref().unwrap().contains("(m0)"));
    }

    #[test]
    fn build_d_preconditions() {
        let x = set(6, [0]);
        let y = set(6, [32]);
        assert!(build_d(&x, &y, DEFAULT_ENUM_CAP, 1).is_err());
        let x2 = set(6, [0, 1]);
        let empty = DiscretizedSet::empty(Scale::new(6).unwrap());
        assert!(build_d(&x2, &empty, DEFAULT_ENUM_CAP, 1).is_err());
        assert!(build_d(&x2, &y, DEFAULT_ENUM_CAP, 1).is_ok());
    }

    // ── dichotomy ────────────────────────────────────────────────────────

    #[test]
    fn dichotomy_dense_designed() {
        // D̃ = AP(0, 8δ, 33) at m = 8, κ = 1/4: admissible denominators
        // include 16·8δ, so R ⊇ (1/16)ℤ. With |Δ| = 1, s = 2^(−4) and the
        // half-ratio scan never finds a 1/16-gap; covering 17 ≥ 2.
        let d = set(8, (0..33).map(|i| 8 * i));
        let rep = dense_gap_analyze(
            &d,
            0.25,
            Rat::from_integer(1),
            default_gap_threshold(),
            DEFAULT_ENUM_CAP,
            1,
        )
        .unwrap();
        assert_eq!(rep.verdict, DenseGapVerdict::Dense);
        assert_eq!(rep.l, -4);
        assert_eq!(rep.s, rat(1, 16));
        assert_eq!(rep.covering, Some(17));
        assert!(rep.gap.is_none());
        assert!(!rep.truncated);
    }

    #[test]
    fn dichotomy_gap_frozen() {
        // D̃ = {0, 1/2} at m = 8, κ = 1/4, Δ = 1/2: R = {−1, 0, 1},
        // s = 2^(−5). At r = 0 the point 1/2 is 1/2-far from R: GAP with
        // location 1/2, witnesses e₁ = 1/2, e₂ = 1.
        let d = set(8, [0, 128]);
        let rep = dense_gap_analyze(
            &d,
            0.25,
            rat(1, 2),
            default_gap_threshold(),
            DEFAULT_ENUM_CAP,
            1,
        )
        .unwrap();
        assert_eq!(rep.verdict, DenseGapVerdict::Gap);
        assert_eq!(rep.l, -5);
        let g = rep.gap.unwrap();
        assert_eq!(g.r, Rat::from_integer(0));
        assert_eq!(g.location, rat(1, 2));
        assert_eq!(g.distance, rat(1, 2));
        assert_eq!(g.rep, [0, 0, 128, 0]);
        assert_eq!(g.x1, Rat::from_integer(0));
        assert_eq!(g.x2, rat(1, 2));
        assert_eq!(g.e1, rat(1, 2));
        assert_eq!(g.e2, Rat::from_integer(1));
    }

    #[test]
    fn dichotomy_neither_with_high_threshold() {
        // Same dense design, but a threshold of 2 demands covering ≥ 32
        // while only ≈17 cells are hit: no gap, not dense → NEITHER.
        let d = set(8, (0..33).map(|i| 8 * i));
        let rep = dense_gap_analyze(
            &d,
            0.25,
            Rat::from_integer(1),
            Rat::from_integer(2),
            DEFAULT_ENUM_CAP,
            1,
        )
        .unwrap();
        assert_eq!(rep.verdict, DenseGapVerdict::Neither);
        assert!(rep.note.as_deref().unwrap().contains("neither"));
    }

    #[test]
    fn dichotomy_empty_ratio_set_is_error() {
        let d = set(8, [0, 1]);
        let err = dense_gap_analyze(
            &d,
            0.25,
            rat(1, 2),
            default_gap_threshold(),
            DEFAULT_ENUM_CAP,
            1,
        );
        match err {
            Err(Error::EmptyRatioSet(msg)) => assert!(msg.contains("(4.3)")),
            other => panic!("expected EmptyRatioSet, got {other:?}"),
        }
    }

    // ── pipeline ─────────────────────────────────────────────────────────

    #[test]
    fn pipeline_end_to_end() {
        let m = Scale::new(6).unwrap();
        let a = DiscretizedSet::from_indices(m, 0..16).unwrap();
        let b = DiscretizedSet::from_indices(m, 0..16).unwrap();
        let c = DiscretizedSet::from_indices(m, [32, 40, 48, 56]).unwrap();
        let rep = run_pipeline(&a, &b, &c, &PipelineOptions::default()).unwrap();
        assert!(!rep.extraction.b_prime.is_empty());
        let s = rep.search.as_ref().expect("search ran");
        assert!(s.triple.is_some());
        // The dichotomy either ran or left a regime note.
        assert!(rep.dichotomy.is_some() || !rep.notes.is_empty());
    }
}
