//! Exponent bookkeeping for the extraction pipeline: the budget of gain
//! exponents e₀..e₄ with their component lines, the γ-thresholds those
//! lines impose, the admissible ε window, the sum-product growth exponents,
//! and the classical covering inequalities (Plünnecke, Ruzsa) in their
//! δ-covering form.
//!
//! Everything here is plain f64 arithmetic on parameters — the exact
//! counting lives elsewhere — but each formula is frozen in tests against
//! independently computed rational values, so a regressed sign or
//! denominator cannot slip through.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::arith::{sumset, sumset_len, Sign};
use crate::error::{Error, Result};
use crate::gridset::DiscretizedSet;

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Gain-exponent budget
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

/// The five-stage gain budget. Parameters: γ (dilation-set dimension),
/// β (smaller set dimension), η (Frostman exponent of the dilation set),
/// κ (denominator-separation exponent), and the two moduli m₁, m₂ of the
/// extraction (defaults 1 and 7). e₁ is published in two variants that
/// differ in the sign of the 2β term; both are reported and the statement
/// variant feeds the minimum.
#[derive(Clone, Debug, Serialize)]
pub struct ExponentBudget {
    pub e0: f64,
    pub e1_statement: f64,
    pub e1_proof: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
    /// Component lines keyed by their conventional labels.
    pub components: BTreeMap<&'static str, f64>,
    /// min(e₀, e₁ statement, e₂, e₃, e₄)
    pub min_exponent: f64,
}

pub fn extraction_exponent_budget(
    gamma: f64,
    beta: f64,
    eta: f64,
    kappa: f64,
    m1: f64,
    m2: f64,
) -> ExponentBudget {
    let e0 = (gamma - beta) / 4.0;
    let e1_statement = (gamma + 2.0 * beta + kappa * eta) / 4.0;
    let e1_proof = (gamma - 2.0 * beta + kappa * eta) / 4.0;

    let d2 = 16.0 * m2 + 36.0 * m1;
    let d3 = 16.0 * m2 + 44.0 * m1;
    let d4 = 20.0 * m2 + 54.0 * m1;

    let mut components = BTreeMap::new();
    components.insert("(4.16)", (3.0 * gamma - 8.0 * beta + 1.0 - kappa * (3.0 - gamma)) / d2);
    components.insert("(4.17)", (4.0 * gamma - 9.0 * beta + 1.0 - kappa * (3.0 - eta)) / d2);
    components.insert("(4.18)", (4.0 * gamma - 10.0 * beta - kappa * (3.0 - gamma)) / d3);
    components.insert("(4.19)", (5.0 * gamma - 11.0 * beta - kappa * (2.0 - eta)) / d3);
    components.insert("(4.20)", (5.0 * gamma - 12.0 * beta + eta - kappa * (2.0 - gamma)) / d3);
    components.insert("(4.21)", (6.0 * gamma - 13.0 * beta + eta - kappa * (1.0 - eta)) / d3);
    components.insert("(4.27)", (6.0 * gamma - 14.0 * beta - kappa * (3.0 - gamma)) / d4);
    components.insert("(4.28)", (7.0 * gamma - 16.0 * beta + eta - kappa * (2.0 - gamma)) / d4);
    components.insert("(4.29)", (7.0 * gamma - 15.0 * beta - kappa * (2.0 - eta)) / d4);
    components.insert("(4.30)", (8.0 * gamma - 17.0 * beta + eta - kappa * (1.0 - eta)) / d4);

    let maxpair = |a: &str, b: &str| -> f64 { components[a].max(components[b]) };
    let e2 = maxpair("(4.16)", "(4.17)");
    let e3 = components["(4.18)"]
        .max(components["(4.19)"])
        .max(components["(4.20)"])
        .max(components["(4.21)"]);
    let e4 = components["(4.27)"]
        .max(components["(4.28)"])
        .max(components["(4.29)"])
        .max(components["(4.30)"]);
    let min_exponent = e0.min(e1_statement).min(e2).min(e3).min(e4);
    ExponentBudget { e0, e1_statement, e1_proof, e2, e3, e4, components, min_exponent }
}

/// The budget specialized at κ = 0, η = β, m₁ = 1, m₂ = 7: the two binding
/// lines collapse to closed forms over the pair (148) and triple (156)
/// denominators.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SpecializedBudget {
    /// (4γ − 9β + 1)/148
    pub pair_exponent: f64,
    /// (6γ − 12β)/156
    pub triple_exponent: f64,
}

pub fn specialized_budget(gamma: f64, beta: f64) -> SpecializedBudget {
    SpecializedBudget {
        pair_exponent: (4.0 * gamma - 9.0 * beta + 1.0) / 148.0,
        triple_exponent: (6.0 * gamma - 12.0 * beta) / 156.0,
    }
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// γ-thresholds and the ε window
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

/// The twelve γ-thresholds: each is the γ above which the correspondingly
/// labeled line contributes a positive gain.
pub fn gamma_thresholds(
    alpha: f64,
    beta: f64,
    eta: f64,
    kappa: f64,
) -> BTreeMap<&'static str, f64> {
    let mut t = BTreeMap::new();
    t.insert("(m0)", 2.0 * alpha - beta);
    t.insert("(4.3)", 2.0 * alpha - 4.0 * beta - kappa * eta);
    t.insert("(4.16)", (74.0 * alpha - 66.0 * beta - 1.0 + 3.0 * kappa) / (3.0 + kappa));
    t.insert("(4.17)", (74.0 * alpha - 65.0 * beta - 1.0 + kappa * (3.0 - eta)) / 4.0);
    t.insert("(4.18)", (78.0 * alpha - 68.0 * beta + 3.0 * kappa) / (4.0 + kappa));
    t.insert("(4.19)", (78.0 * alpha - 67.0 * beta + kappa * (2.0 - eta)) / 5.0);
    t.insert("(4.20)", (78.0 * alpha - 66.0 * beta - eta + 2.0 * kappa) / (5.0 + kappa));
    t.insert("(4.21)", (78.0 * alpha - 65.0 * beta - eta + kappa * (1.0 - eta)) / 6.0);
    t.insert("(4.27)", (97.0 * alpha - 83.0 * beta + 3.0 * kappa) / (6.0 + kappa));
    t.insert("(4.28)", (97.0 * alpha - 81.0 * beta - eta + 2.0 * kappa) / (7.0 + kappa));
    t.insert("(4.29)", (97.0 * alpha - 82.0 * beta + kappa * (2.0 - eta)) / 7.0);
    t.insert("(4.30)", (97.0 * alpha - 80.0 * beta - eta + kappa * (1.0 - eta)) / 8.0);
    t
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GammaRegime {
    /// α ≤ (21β + 1)/22: the six-line floor (78α − 66β)/6 binds.
    Low,
    /// α > (21β + 1)/22: the four-line floor (74α − 65β − 1)/4 binds.
    High,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EpsilonRange {
    /// min{(4γ − 74α + 65β + 1)/444, (6γ − 78α + 66β)/468}; may be ≤ 0,
    /// in which case no admissible ε exists at these parameters.
    pub eps_max: f64,
    pub regime: GammaRegime,
    /// γ must exceed this strictly for the window to open.
    pub gamma_floor: f64,
    pub gamma_ok: bool,
}

pub fn epsilon_range(alpha: f64, beta: f64, gamma: f64) -> EpsilonRange {
    let first = (4.0 * gamma - 74.0 * alpha + 65.0 * beta + 1.0) / 444.0;
    let second = (6.0 * gamma - 78.0 * alpha + 66.0 * beta) / 468.0;
    let eps_max = first.min(second);
    let (regime, gamma_floor) = if alpha <= (21.0 * beta + 1.0) / 22.0 {
        (GammaRegime::Low, (78.0 * alpha - 66.0 * beta) / 6.0)
    } else {
        (GammaRegime::High, (74.0 * alpha - 65.0 * beta - 1.0) / 4.0)
    };
    EpsilonRange { eps_max, regime, gamma_floor, gamma_ok: gamma > gamma_floor }
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Sum-product growth exponents
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GrowthExponents {
    /// x such that K ≳ δ^(−x) is guaranteed; negative values mean the
    /// guarantee is vacuous at these parameters.
    pub k_exponent: f64,
    /// Closed form valid when α = β (cross-check of k_exponent).
    pub k_exponent_symmetric: Option<f64>,
    /// Exponent for max_c |A + cB|_δ ≳ |A|_δ·δ^(−x).
    pub sumset_exponent: f64,
}

/// Growth exponents under the Frostman hypotheses dim A = α, dim B = β,
/// dim C = γ. Requires α + β > 1.
pub fn growth_exponents(alpha: f64, beta: f64, gamma: f64) -> Result<GrowthExponents> {
    if alpha + beta <= 1.0 {
        return Err(Error::HypothesisAlphaBeta(alpha, beta));
    }
    let den = 2.0 * (3.0 - alpha - beta);
    let k_exponent = (alpha - 3.0 * beta - 4.0 * gamma + 2.0 * gamma * (alpha + beta)
        - alpha * alpha
        + beta * beta
        + 2.0)
        / den;
    let k_exponent_symmetric = if alpha == beta {
        Some((-gamma * (4.0 - 4.0 * alpha) + 2.0 - 2.0 * alpha) / (2.0 * (3.0 - 2.0 * alpha)))
    } else {
        None
    };
    let sumset_exponent = (-6.0 * beta - 4.0 * gamma - 2.0 * alpha * alpha + 4.0 * alpha
        + 2.0 * beta * beta
        + 2.0
        + 2.0 * gamma * (alpha + beta))
        / den;
    Ok(GrowthExponents { k_exponent, k_exponent_symmetric, sumset_exponent })
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Covering inequalities
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

#[derive(Clone, Debug, Serialize)]
pub struct PlunneckeCheck {
    /// K_i = |X + Y_i|_δ / |X|_δ
    pub k_ratios: Vec<f64>,
    /// |Y₁ + … + Y_k|_δ
    pub lhs: u64,
    /// (Π K_i)·|X|_δ
    pub reference: f64,
    pub ratio: f64,
    /// ratio ≤ 8 — the covering-version slack allowed on grid sets.
    pub ok: bool,
}

/// Plünnecke–Ruzsa in δ-covering form: |Y₁+…+Y_k|_δ against (ΠK_i)|X|_δ.
/// For exact grid cardinalities the classical inequality has constant 1;
/// the covering formulation is allowed slack 8 and the measured ratio is
/// reported.
pub fn plunnecke_check(x: &DiscretizedSet, ys: &[&DiscretizedSet]) -> Result<PlunneckeCheck> {
    if ys.is_empty() {
        return Err(Error::EmptySet("plunnecke_check"));
    }
    if x.is_empty() {
        return Err(Error::EmptySet("plunnecke_check base set"));
    }
    let nx = x.len() as f64;
    let mut k_ratios = Vec::with_capacity(ys.len());
    for y in ys {
        k_ratios.push(sumset_len(x, y, Sign::Plus)? as f64 / nx);
    }
    let mut acc = ys[0].clone();
    for y in &ys[1..] {
        acc = sumset(&acc, y, Sign::Plus)?;
    }
    let lhs = acc.len() as u64;
    let reference = k_ratios.iter().product::<f64>() * nx;
    let ratio = lhs as f64 / reference;
    Ok(PlunneckeCheck { k_ratios, lhs, reference, ratio, ok: ratio <= 8.0 })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RuzsaCheck {
    pub xz: u64,
    pub y: u64,
    pub xy: u64,
    pub yz: u64,
    /// |X∓Z|·|Y| / (|X∓Y|·|Y∓Z|)
    pub ratio: f64,
    /// ratio ≤ 8 (covering form); the exact-cardinality form satisfies ≤ 1.
    pub ok: bool,
}

/// Ruzsa triangle inequality on grid sets, difference or sum form by sign.
pub fn ruzsa_check(
    x: &DiscretizedSet,
    y: &DiscretizedSet,
    z: &DiscretizedSet,
    sign: Sign,
) -> Result<RuzsaCheck> {
    let xz = sumset_len(x, z, sign)?;
    let xy = sumset_len(x, y, sign)?;
    let yz = sumset_len(y, z, sign)?;
    let ny = y.len() as u64;
    if ny == 0 {
        return Err(Error::EmptySet("ruzsa_check middle set"));
    }
    let ratio = (xz as f64 * ny as f64) / (xy as f64 * yz as f64);
    Ok(RuzsaCheck { xz, y: ny, xy, yz, ratio, ok: ratio <= 8.0 })
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Tests
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
