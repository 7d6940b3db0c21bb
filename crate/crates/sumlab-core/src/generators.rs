//! Set families for experiments: arithmetic progressions, Cantor-type
//! digit sets, seeded random Frostman sets, the extremal grid/progression
//! pair, unions, and translates — all described by a serializable
//! `FamilySpec` so a run can be reproduced from its JSON. `corpus` builds
//! the standard 20-triple battery used by the verification suite.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridset::{frostman_profile_full, DiscretizedSet, FrostmanProfile};
use crate::scale::Scale;

/// Cap on generated family sizes.
const FAMILY_CAP: u64 = 1 << 26;

/// Bounded retries when a random family misses its Frostman certificate.
const FROSTMAN_RETRIES: u64 = 16;

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Family specifications
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

/// Which member of a triple (A, B, C) an extremal spec generates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TripleRole {
    A,
    B,
    C,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    /// start + i·step for i < len, in grid indices.
    Ap { m: u32, start: i64, step: i64, len: u64 },
    /// Digit set at each of `depth` levels of width `base_bits`:
    /// indices Σ_j d_j·2^(m − j·base_bits − shift). `shift` scales the
    /// whole construction down by 2^(−shift) (default 0).
    Cantor {
        m: u32,
        base_bits: u32,
        digits: Vec<u32>,
        depth: u32,
        #[serde(default)]
        shift: u32,
    },
    /// Seeded branching set with ⌊σm⌋ doubling levels spread evenly
    /// (Bresenham schedule), giving |X| = 2^⌊σm⌋ and a σ-Frostman ball
    /// condition. `max_bits` caps the doubling levels.
    RandomFrostman {
        m: u32,
        sigma: f64,
        seed: u64,
        #[serde(default)]
        max_bits: Option<u32>,
    },
    /// The tight pair at m = 2k: A is the full step-δ grid on [0,1) and
    /// B = C is the step-2^(−k) progression; every c ∈ C gives
    /// |A + cB|_δ ≤ 2|A|.
    Extremal { k: u32, role: TripleRole },
    /// All indices 0..=2^m.
    FullGrid { m: u32 },
    Union { parts: Vec<FamilySpec> },
    Translate {
        part: Box<FamilySpec>,
        /// Shift in grid indices.
        shift: i64,
    },
}

impl FamilySpec {
    /// The grid scale this spec generates at.
    pub fn scale(&self) -> Result<Scale> {
        match self {
            FamilySpec::Ap { m, .. }
            | FamilySpec::Cantor { m, .. }
            | FamilySpec::RandomFrostman { m, .. }
            | FamilySpec::FullGrid { m } => Scale::new(*m),
            FamilySpec::Extremal { k, .. } => Scale::new(2 * k),
            FamilySpec::Union { parts } => {
                let first = parts
                    .first()
                    .ok_or(Error::EmptySet("union spec"))?
                    .scale()?;
                for p in &parts[1..] {
                    p.scale()?.same_as(first)?;
                }
                Ok(first)
            }
            FamilySpec::Translate { part, .. } => part.scale(),
        }
    }
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Generation
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

pub fn generate(spec: &FamilySpec) -> Result<DiscretizedSet> {
    match spec {
        FamilySpec::Ap { m, start, step, len } => {
            let scale = Scale::new(*m)?;
            if *step < 1 || *len < 1 {
                return Err(Error::InvalidParameter {
                    name: "ap",
                    reason: format!("need step ≥ 1 and len ≥ 1, got step={step} len={len}"),
                });
            }
            if *len > FAMILY_CAP {
                return Err(Error::CapExceeded {
                    context: "ap length",
                    needed: u128::from(*len),
                    cap: FAMILY_CAP,
                });
            }
            let idx = (0..*len as i64).map(|i| start + i * step);
            DiscretizedSet::from_unit_indices(scale, idx)
        }
        FamilySpec::Cantor { m, base_bits, digits, depth, shift } => {
            let scale = Scale::new(*m)?;
            if *base_bits < 1 || digits.is_empty() || *depth < 1 {
                return Err(Error::InvalidParameter {
                    name: "cantor",
                    reason: "need base_bits ≥ 1, nonempty digits, depth ≥ 1".into(),
                });
            }
            let base = 1u32 << base_bits;
            let mut ds: Vec<u32> = digits.clone();
            ds.sort_unstable();
            ds.dedup();
            if ds.iter().any(|&d| d >= base) {
                return Err(Error::InvalidParameter {
                    name: "cantor",
                    reason: format!("digit outside 0..{base}"),
                });
            }
            // The construction cannot recurse below the grid.
            let depth_eff = (*depth).min((m - shift.min(m)) / base_bits).max(1);
            if (m.saturating_sub(*shift)) < depth_eff * base_bits {
                return Err(Error::InvalidParameter {
                    name: "cantor",
                    reason: format!("m − shift = {} too small for depth {depth_eff} at {base_bits} bits", m - shift),
                });
            }
            let count = (ds.len() as u128).pow(depth_eff);
            if count > u128::from(FAMILY_CAP) {
                return Err(Error::CapExceeded { context: "cantor size", needed: count, cap: FAMILY_CAP });
            }
            let mut idx: Vec<i64> = vec![0];
            for j in 1..=depth_eff {
                let place = 1i64 << (m - j * base_bits - shift);
                let mut next = Vec::with_capacity(idx.len() * ds.len());
                for &prefix in &idx {
                    for &d in &ds {
                        next.push(prefix + i64::from(d) * place);
                    }
                }
                idx = next;
            }
            DiscretizedSet::from_unit_indices(scale, idx)
        }
        FamilySpec::RandomFrostman { m, sigma, seed, max_bits } => {
            Ok(random_frostman(*m, *sigma, *seed, *max_bits)?.0)
        }
        FamilySpec::Extremal { k, role } => {
            if *k < 1 || 2 * k > crate::scale::MAX_LOG_SCALE {
                return Err(Error::InvalidParameter {
                    name: "k",
                    reason: format!("need 1 ≤ k ≤ {}", crate::scale::MAX_LOG_SCALE / 2),
                });
            }
            let scale = Scale::new(2 * k)?;
            match role {
                TripleRole::A => DiscretizedSet::from_unit_indices(scale, 0..scale.cells()),
                TripleRole::B | TripleRole::C => {
                    let step = 1i64 << k;
                    DiscretizedSet::from_unit_indices(scale, (0..step).map(|j| j * step))
                }
            }
        }
        FamilySpec::FullGrid { m } => {
            let scale = Scale::new(*m)?;
            DiscretizedSet::from_unit_indices(scale, 0..=scale.cells())
        }
        FamilySpec::Union { parts } => {
            let mut acc: Option<DiscretizedSet> = None;
            for p in parts {
                let s = generate(p)?;
                acc = Some(match acc {
                    None => s,
                    Some(a) => a.union(&s)?,
                });
            }
            acc.ok_or(Error::EmptySet("union spec"))
        }
        FamilySpec::Translate { part, shift } => generate(part)?.translate(*shift),
    }
}

/// Generate a random σ-Frostman set with its measured certificate.
///
/// The branching schedule doubles at level ℓ exactly when ⌊σ′ℓ⌋ > ⌊σ′(ℓ−1)⌋
/// with σ′ = target_bits/m, so doubling levels are spread evenly and the
/// final size is exactly 2^target_bits. If the measured profile misses the
/// ball-condition cap the set is regenerated from the next sub-seed
/// (bounded); the returned attempt count records this.
pub fn random_frostman(
    m: u32,
    sigma: f64,
    seed: u64,
    max_bits: Option<u32>,
) -> Result<(DiscretizedSet, FrostmanProfile, u64)> {
    let scale = Scale::new(m)?;
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("need 0 < sigma ≤ 1, got {sigma}"),
        });
    }
    let mut target_bits = (sigma * f64::from(m)).floor() as u32;
    if let Some(cap) = max_bits {
        target_bits = target_bits.min(cap);
    }
    target_bits = target_bits.min(m);
    // The certificate is issued against the exponent actually achieved.
    let sigma_eff = f64::from(target_bits) / f64::from(m);

    for attempt in 0..FROSTMAN_RETRIES {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed.wrapping_add(attempt));
        let schedule_bits = |l: u32| -> u32 {
            ((sigma_eff * f64::from(l)).floor() as u32).min(target_bits)
        };
        let mut prefixes: Vec<i64> = vec![0];
        for l in 1..=m {
            let double = schedule_bits(l) > schedule_bits(l - 1);
            if double {
                let mut next = Vec::with_capacity(prefixes.len() * 2);
                for &p in &prefixes {
                    next.push(p << 1);
                    next.push((p << 1) | 1);
                }
                prefixes = next;
            } else {
                for p in prefixes.iter_mut() {
                    *p = (*p << 1) | i64::from(rng.gen_bool(0.5));
                }
            }
        }
        let set = DiscretizedSet::from_unit_indices(scale, prefixes)?;
        debug_assert_eq!(set.len() as u64, 1u64 << target_bits);
        let profile = frostman_profile_full(&set, sigma_eff)?;
        if profile.max_ratio <= profile.cap {
            return Ok((set, profile, attempt + 1));
        }
    }
    Err(Error::InvalidParameter {
        name: "seed",
        reason: format!(
            "no σ = {sigma_eff} Frostman set within {FROSTMAN_RETRIES} regenerations from seed {seed}"
        ),
    })
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Corpus
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

#[derive(Clone, Debug)]
pub struct NamedTriple {
    pub name: String,
    pub a: DiscretizedSet,
    pub b: DiscretizedSet,
    pub c: DiscretizedSet,
    /// Frostman certificates for randomly generated members, keyed by role.
    pub certificates: Vec<(String, FrostmanProfile)>,
}

fn mix_seed(seed: u64, t: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(t)
}

fn ap(m: u32, start: i64, step: i64, len: u64) -> FamilySpec {
    FamilySpec::Ap { m, start, step, len }
}

fn cantor(m: u32, base_bits: u32, digits: &[u32], depth: u32, shift: u32) -> FamilySpec {
    FamilySpec::Cantor { m, base_bits, digits: digits.to_vec(), depth, shift }
}

/// The standard 20-triple battery. Deterministic in `seed`; names are
/// stable identifiers used in reports. Conventions: |A|, |B| ≤ 128,
/// |C| ≤ 16, every C inside [1/2, 1], and at least five triples with
/// |A|·|B| ≤ 1024 so quadratic reference algorithms stay cheap.
pub fn corpus(seed: u64) -> Result<Vec<NamedTriple>> {
    let mut out = Vec::with_capacity(20);
    let push = |name: &str,
                    a: FamilySpec,
                    b: FamilySpec,
                    c: FamilySpec,
                    out: &mut Vec<NamedTriple>|
     -> Result<()> {
        let mut certificates = Vec::new();
        let mut build = |role: &str, spec: &FamilySpec| -> Result<DiscretizedSet> {
            if let FamilySpec::RandomFrostman { m, sigma, seed, max_bits } = spec {
                let (set, profile, _) = random_frostman(*m, *sigma, *seed, *max_bits)?;
                certificates.push((role.to_string(), profile));
                Ok(set)
            } else {
                generate(spec)
            }
        };
        let a = build("A", &a)?;
        let b = build("B", &b)?;
        let c = build("C", &c)?;
        out.push(NamedTriple { name: name.to_string(), a, b, c, certificates });
        Ok(())
    };

    let rf = |m: u32, sigma: f64, t: u64, lane: u64, max_bits: Option<u32>| FamilySpec::RandomFrostman {
        m,
        sigma,
        seed: mix_seed(seed, t).wrapping_add(lane),
        max_bits,
    };

    // ── m = 8 ────────────────────────────────────────────────────────────
    push("ap_ap_full_m8", ap(8, 0, 1, 32), ap(8, 0, 1, 32), ap(8, 128, 16, 8), &mut out)?;
    push("ap_sparse_ap_m8", ap(8, 0, 8, 32), ap(8, 0, 4, 32), ap(8, 128, 8, 16), &mut out)?;
    push(
        "ap_vs_cantor_m8",
        ap(8, 0, 2, 64),
        cantor(8, 2, &[0, 3], 4, 0),
        ap(8, 192, 4, 8),
        &mut out,
    )?;
    push(
        "cantor_half_pair_m8",
        cantor(8, 2, &[0, 3], 4, 0),
        cantor(8, 2, &[0, 3], 4, 0),
        ap(8, 128, 16, 8),
        &mut out,
    )?;
    push(
        "random_frostman_04_m8",
        rf(8, 0.4, 5, 0, None),
        rf(8, 0.4, 5, 1, None),
        ap(8, 160, 8, 8),
        &mut out,
    )?;
    push(
        "random_frostman_06_m8",
        rf(8, 0.6, 6, 0, None),
        rf(8, 0.6, 6, 1, None),
        ap(8, 128, 8, 12),
        &mut out,
    )?;
    push(
        "extremal_k2",
        FamilySpec::Extremal { k: 2, role: TripleRole::A },
        FamilySpec::Extremal { k: 2, role: TripleRole::B },
        // C = B ∩ [1/2, 1]: indices {8, 12} at m = 4.
        FamilySpec::Ap { m: 4, start: 8, step: 4, len: 2 },
        &mut out,
    )?;

    // ── m = 10 ───────────────────────────────────────────────────────────
    push("ap_ap_full_m10", ap(10, 0, 1, 64), ap(10, 0, 1, 64), ap(10, 512, 64, 8), &mut out)?;
    push(
        "ap_vs_union_m10",
        ap(10, 0, 16, 64),
        FamilySpec::Union {
            parts: vec![ap(10, 0, 32, 32), ap(10, 1, 32, 32)],
        },
        ap(10, 512, 32, 16),
        &mut out,
    )?;
    push(
        "cantor_05_pair_m10",
        cantor(10, 2, &[0, 3], 5, 0),
        cantor(10, 2, &[0, 3], 5, 0),
        ap(10, 512, 64, 8),
        &mut out,
    )?;
    push(
        "cantor_063_pair_m10",
        cantor(10, 5, &[0, 4, 7, 12, 16, 20, 25, 28, 31], 2, 0),
        cantor(10, 5, &[0, 4, 7, 12, 16, 20, 25, 28, 31], 2, 0),
        ap(10, 512, 32, 8),
        &mut out,
    )?;
    push(
        "cantor_079_pair_m10",
        cantor(10, 2, &[0, 1, 3], 4, 0),
        cantor(10, 2, &[0, 1, 3], 4, 0),
        ap(10, 640, 32, 8),
        &mut out,
    )?;
    push(
        "random_frostman_08_m10",
        rf(10, 0.8, 13, 0, Some(7)),
        rf(10, 0.8, 13, 1, Some(7)),
        ap(10, 512, 16, 16),
        &mut out,
    )?;
    push(
        "mixed_ap_cantor_m10",
        ap(10, 0, 8, 128),
        cantor(10, 2, &[0, 3], 5, 0),
        FamilySpec::Translate {
            part: Box::new(cantor(10, 2, &[0, 3], 2, 2)),
            shift: 512,
        },
        &mut out,
    )?;
    push(
        "union_blocks_m10",
        FamilySpec::Union {
            parts: vec![ap(10, 0, 1, 32), ap(10, 512, 1, 32)],
        },
        ap(10, 0, 16, 64),
        ap(10, 768, 16, 16),
        &mut out,
    )?;

    // ── m = 12 ───────────────────────────────────────────────────────────
    push("ap_ap_full_m12", ap(12, 0, 32, 128), ap(12, 0, 32, 128), ap(12, 2048, 256, 8), &mut out)?;
    push(
        "cantor_05_pair_m12",
        cantor(12, 2, &[0, 3], 6, 0),
        cantor(12, 2, &[0, 3], 6, 0),
        ap(12, 2048, 128, 16),
        &mut out,
    )?;
    push(
        "cantor_079_pair_m12",
        cantor(12, 2, &[0, 1, 3], 4, 0),
        cantor(12, 2, &[0, 1, 3], 4, 0),
        ap(12, 3072, 128, 8),
        &mut out,
    )?;
    push(
        "random_frostman_06_m12",
        rf(12, 0.6, 19, 0, None),
        rf(12, 0.6, 19, 1, None),
        ap(12, 2048, 64, 16),
        &mut out,
    )?;
    push(
        "mixed_frostman_cantor_m12",
        rf(12, 0.5, 20, 0, None),
        cantor(12, 4, &[0, 3, 5, 6, 9, 10, 12, 15], 2, 0),
        FamilySpec::Translate {
            part: Box::new(cantor(12, 2, &[0, 3], 2, 2)),
            shift: 2048,
        },
        &mut out,
    )?;

    Ok(out)
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Tests
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
