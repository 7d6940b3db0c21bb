//! Point–line incidences on the grid. Points and lines carry dyadic
//! coordinates; incidence is decided exactly, either against Euclidean
//! distance or against vertical offset. On top of the counter sit the
//! classical Szemerédi–Trotter check, the δ-regime incidence bound with a
//! fitted constant, and the identity expressing additive energy as a sum of
//! incidence counts between product point sets and a pencil of lines.

use num::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gridset::DiscretizedSet;
use crate::scale::Rat;

/// Guard on |P|·|L| for pairwise incidence scans.
const INCIDENCE_GUARD: u64 = 1 << 28;

/// Coordinate and slope numerators are kept below 2^40 so that the i128
/// fast path in the Euclidean predicate has headroom.
const NUM_LIMIT: i64 = 1 << 40;

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Geometry types
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GridPoint {
    pub x_num: i64,
    pub y_num: i64,
    pub log_den: u32,
}

impl GridPoint {
    pub fn new(x_num: i64, y_num: i64, log_den: u32) -> Self {
        debug_assert!(x_num.abs() < NUM_LIMIT && y_num.abs() < NUM_LIMIT && log_den <= 60);
        GridPoint { x_num, y_num, log_den }
    }

    pub fn x(&self) -> Rat {
        crate::scale::rat(i128::from(self.x_num), 1 << self.log_den)
    }

    pub fn y(&self) -> Rat {
        crate::scale::rat(i128::from(self.y_num), 1 << self.log_den)
    }
}

/// Which coordinate the line equation solves for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LineForm {
    /// y = s·x + t
    YOfX,
    /// x = t − s·y
    XOfY,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GridLine {
    pub slope_num: i64,
    pub intercept_num: i64,
    pub log_den: u32,
    pub form: LineForm,
}

impl GridLine {
    pub fn y_of_x(slope_num: i64, intercept_num: i64, log_den: u32) -> Self {
        debug_assert!(slope_num.abs() < NUM_LIMIT && intercept_num.abs() < NUM_LIMIT);
        GridLine { slope_num, intercept_num, log_den, form: LineForm::YOfX }
    }

    pub fn x_of_y(slope_num: i64, intercept_num: i64, log_den: u32) -> Self {
        debug_assert!(slope_num.abs() < NUM_LIMIT && intercept_num.abs() < NUM_LIMIT);
        GridLine { slope_num, intercept_num, log_den, form: LineForm::XOfY }
    }

    pub fn slope(&self) -> Rat {
        crate::scale::rat(i128::from(self.slope_num), 1 << self.log_den)
    }

    pub fn intercept(&self) -> Rat {
        crate::scale::rat(i128::from(self.intercept_num), 1 << self.log_den)
    }

    /// Signed residual of the line equation at (x, y): rhs − dependent
    /// coordinate, exactly.
    pub fn residual(&self, p: &GridPoint) -> Rat {
        match self.form {
            LineForm::YOfX => self.slope() * p.x() + self.intercept() - p.y(),
            LineForm::XOfY => self.intercept() - self.slope() * p.y() - p.x(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IncidenceMode {
    /// Euclidean point-to-line distance ≤ tol.
    Euclidean,
    /// |residual in the dependent coordinate| ≤ tol.
    Vertical,
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Counting
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

/// Count point–line incidences at tolerance `tol` ≥ 0, exactly.
///
/// Vertical mode groups lines by (form, slope) and binary-searches sorted
/// intercepts, so pencils of parallel lines cost |P|·log|L|. Euclidean mode
/// scans pairs with an i128 predicate when the bit budget allows and big
/// integers otherwise.
pub fn incidence_count(
    points: &[GridPoint],
    lines: &[GridLine],
    tol: Rat,
    mode: IncidenceMode,
) -> Result<u64> {
    if tol < Rat::from_integer(0) {
        return Err(Error::InvalidParameter { name: "tol", reason: "negative tolerance".into() });
    }
    match mode {
        IncidenceMode::Vertical => vertical_count(points, lines, tol),
        IncidenceMode::Euclidean => euclidean_count(points, lines, tol),
    }
}

fn vertical_count(points: &[GridPoint], lines: &[GridLine], tol: Rat) -> Result<u64> {
    // Group lines by everything except the intercept.
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(u8, i64, u32), Vec<i64>> = BTreeMap::new();
    for l in lines {
        let tag = (matches!(l.form, LineForm::XOfY) as u8, l.slope_num, l.log_den);
        groups.entry(tag).or_default().push(l.intercept_num);
    }
    let mut count: u64 = 0;
    for ((is_xofy, slope_num, log_den), mut intercepts) in groups {
        intercepts.sort_unstable();
        // Solve |rhs − dep| ≤ tol for the intercept value t:
        //   YOfX: t ∈ [y − s·x − tol, y − s·x + tol]
        //   XOfY: t ∈ [x + s·y − tol, x + s·y + tol]
        // Dyadic tolerances take a pure shifted-integer path (the common
        // case: tol is 0 or a power of two); anything else falls back to
        // rational arithmetic per point.
        let dyadic_tol = (*tol.denom() as u128).is_power_of_two().then(|| {
            (*tol.numer(), tol.denom().trailing_zeros())
        });
        let coord_bits = points
            .iter()
            .map(|p| 128 - (p.x_num.unsigned_abs().max(p.y_num.unsigned_abs()) as u128).leading_zeros())
            .max()
            .unwrap_or(0);
        let qp_max = points.iter().map(|p| p.log_den).max().unwrap_or(0);
        let slope_bits = 128 - (slope_num.unsigned_abs() as u128).leading_zeros();
        if let Some((tp, qt)) = dyadic_tol {
            let tol_bits = 128 - tp.unsigned_abs().leading_zeros();
            // cn ≤ 2^(max(coord+log_den, slope+coord)+1); the comparison
            // shifts it by qt and the tolerance by log_den + qp; keep every
            // intermediate below i128.
            let cn_bits = (coord_bits + log_den).max(slope_bits + coord_bits) + 1;
            let bound_bits = (cn_bits + qt).max(tol_bits + log_den + qp_max) + 1;
            if bound_bits < 126 {
                for p in points {
                    let qp = p.log_den;
                    // center = cn / 2^(log_den + qp)
                    let cn = if is_xofy == 0 {
                        (i128::from(p.y_num) << log_den) - i128::from(slope_num) * i128::from(p.x_num)
                    } else {
                        (i128::from(p.x_num) << log_den) + i128::from(slope_num) * i128::from(p.y_num)
                    };
                    // |tn·2^(qp+qt) − cn·2^qt| ≤ tp·2^(log_den+qp)
                    let spread = tp << (log_den + qp);
                    let lo_num = (cn << qt) - spread;
                    let hi_num = (cn << qt) + spread;
                    let shift = qp + qt;
                    let lo = -((-lo_num) >> shift); // ceil
                    let hi = hi_num >> shift; // floor
                    if lo > hi {
                        continue;
                    }
                    let a = intercepts.partition_point(|&t| i128::from(t) < lo);
                    let b = intercepts.partition_point(|&t| i128::from(t) <= hi);
                    count += (b - a) as u64;
                }
                continue;
            }
        }
        let slope = crate::scale::rat(i128::from(slope_num), 1 << log_den);
        let den = Rat::from_integer(1i128 << log_den);
        for p in points {
            let center = if is_xofy == 0 {
                p.y() - slope * p.x()
            } else {
                p.x() + slope * p.y()
            };
            let lo = crate::scale::rat_ceil((center - tol) * den);
            let hi = crate::scale::rat_floor((center + tol) * den);
            if lo > hi {
                continue;
            }
            let a = intercepts.partition_point(|&t| i128::from(t) < lo);
            let b = intercepts.partition_point(|&t| i128::from(t) <= hi);
            count += (b - a) as u64;
        }
    }
    Ok(count)
}

fn euclidean_count(points: &[GridPoint], lines: &[GridLine], tol: Rat) -> Result<u64> {
    let needed = points.len() as u128 * lines.len() as u128;
    if needed > u128::from(INCIDENCE_GUARD) {
        return Err(Error::CapExceeded { context: "incidence scan", needed, cap: INCIDENCE_GUARD });
    }
    // Predicate in normal form αx + βy + γ = 0 with
    //   YOfX: (α, β, γ) = (s, −1, t),  XOfY: (α, β, γ) = (1, s, −t)
    // (denominator 2^Ql on α, γ; β integral):
    //   dist ≤ tol ⟺ (αx + βy + γ)² · tq² ≤ tp² · (α² + β²)
    // after clearing squares of the common denominators. With numerators
    // bounded by 2^40 and log_dens ≤ 60 the products can exceed i128, so a
    // per-call bit estimate picks i128 or BigInt.
    let (tp, tq) = (*tol.numer(), *tol.denom());
    let max_bits = {
        let pt_bits = points
            .iter()
            .map(|p| 64 - (p.x_num.abs().max(p.y_num.abs()) as u64).leading_zeros())
            .max()
            .unwrap_or(0);
        let ln_bits = lines
            .iter()
            .map(|l| 64 - (l.slope_num.abs().max(l.intercept_num.abs()) as u64).leading_zeros())
            .max()
            .unwrap_or(0);
        let ql = lines.iter().map(|l| l.log_den).max().unwrap_or(0);
        let qp = points.iter().map(|p| p.log_den).max().unwrap_or(0);
        let t_bits = (128 - tp.abs().leading_zeros()).max(128 - tq.leading_zeros());
        // expr ≤ 2^(ln_bits + pt_bits + ql + qp + 2); predicate squares it
        // and multiplies by tq² (lhs) / tp²·2^(2ql+2qp)+slope² (rhs).
        2 * (ln_bits + pt_bits + ql + qp + 2) + 2 * t_bits
    };
    let mut count: u64 = 0;
    if max_bits <= 126 {
        for l in lines {
            let ql = l.log_den;
            let (alpha, beta, gamma) = match l.form {
                LineForm::YOfX => (i128::from(l.slope_num), -(1i128 << ql), i128::from(l.intercept_num)),
                LineForm::XOfY => (1i128 << ql, i128::from(l.slope_num), -i128::from(l.intercept_num)),
            };
            let norm2 = alpha * alpha + beta * beta; // on den 2^(2Ql)
            for p in points {
                let qp = p.log_den;
                // expr on den 2^(Ql+Qp)
                let expr = alpha * i128::from(p.x_num)
                    + beta * i128::from(p.y_num)
                    + (gamma << qp);
                let lhs = expr * expr * tq * tq;
                let rhs = tp * tp * (norm2 << (2 * qp));
                if lhs <= rhs {
                    count += 1;
                }
            }
        }
    } else {
        for l in lines {
            let ql = l.log_den;
            let (alpha, beta, gamma) = match l.form {
                LineForm::YOfX => (
                    BigInt::from(l.slope_num),
                    -(BigInt::from(1) << ql),
                    BigInt::from(l.intercept_num),
                ),
                LineForm::XOfY => (
                    BigInt::from(1) << ql,
                    BigInt::from(l.slope_num),
                    -BigInt::from(l.intercept_num),
                ),
            };
            let norm2 = &alpha * &alpha + &beta * &beta;
            for p in points {
                let qp = p.log_den;
                let expr = &alpha * BigInt::from(p.x_num)
                    + &beta * BigInt::from(p.y_num)
                    + (&gamma << qp);
                let lhs = &expr * &expr * BigInt::from(tq) * BigInt::from(tq);
                let rhs = BigInt::from(tp) * BigInt::from(tp) * (&norm2 << (2 * qp));
                if lhs <= rhs {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Line metric
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

/// Distance between two lines of the SAME form, as the metric
/// ‖u₁ − u₂‖₂ + |t₁/‖(s₁,−1)‖ − t₂/‖(s₂,−1)‖| with uᵢ = (sᵢ,−1)/‖(sᵢ,−1)‖.
/// Mixed forms are rejected: their unit normals live in different charts.
pub fn line_distance(l1: &GridLine, l2: &GridLine) -> Result<f64> {
    if l1.form != l2.form {
        return Err(Error::Orientation);
    }
    let s1 = crate::scale::rat_to_f64(l1.slope());
    let s2 = crate::scale::rat_to_f64(l2.slope());
    let t1 = crate::scale::rat_to_f64(l1.intercept());
    let t2 = crate::scale::rat_to_f64(l2.intercept());
    let n1 = (s1 * s1 + 1.0).sqrt();
    let n2 = (s2 * s2 + 1.0).sqrt();
    let du = ((s1 / n1 - s2 / n2).powi(2) + (1.0 / n1 - 1.0 / n2).powi(2)).sqrt();
    Ok(du + (t1 / n1 - t2 / n2).abs())
}

/// Minimum pairwise distance within a family (None for fewer than 2 lines).
pub fn min_pairwise_line_distance(lines: &[GridLine]) -> Result<Option<f64>> {
    let needed = (lines.len() as u128).pow(2);
    if needed > u128::from(INCIDENCE_GUARD) {
        return Err(Error::CapExceeded { context: "line separation scan", needed, cap: INCIDENCE_GUARD });
    }
    let mut best: Option<f64> = None;
    for (i, l1) in lines.iter().enumerate() {
        for l2 in &lines[i + 1..] {
            let d = line_distance(l1, l2)?;
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
    }
    Ok(best)
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Bound checks
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

#[derive(Clone, Copy, Debug, Serialize)]
pub struct StCheck {
    pub incidences: u64,
    pub points: u64,
    pub lines: u64,
    /// 4·(m^(2/3) n^(2/3) + m + n) with m = |P|, n = |L|.
    pub bound: f64,
    pub ok: bool,
}

/// Szemerédi–Trotter sanity check with the explicit constant 4.
pub fn st_bound_check(incidences: u64, points: u64, lines: u64) -> StCheck {
    let m = points as f64;
    let n = lines as f64;
    let bound = 4.0 * ((m * m).cbrt() * (n * n).cbrt() + m + n);
    StCheck { incidences, points, lines, bound, ok: (incidences as f64) <= bound }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DovCheck {
    pub incidences: u64,
    pub t: f64,
    pub c_fit: f64,
    /// C·|P|·|L|^(1/(3−t))·δ^((t−1)/(3−t))
    pub bound: f64,
    pub ok: bool,
}

/// δ-regime incidence bound for a (δ, t)-regular line family, with a fitted
/// constant. Requires 1 < t < 3.
pub fn dov_bound_check(
    incidences: u64,
    points: u64,
    lines: u64,
    delta: f64,
    t: f64,
    c_fit: f64,
) -> Result<DovCheck> {
    if !(t > 1.0 && t < 3.0) {
        return Err(Error::HypothesisT(t));
    }
    let bound = c_fit
        * points as f64
        * (lines as f64).powf(1.0 / (3.0 - t))
        * delta.powf((t - 1.0) / (3.0 - t));
    Ok(DovCheck { incidences, t, c_fit, bound, ok: (incidences as f64) <= bound })
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Energy as incidences
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

#[derive(Clone, Debug, Serialize)]
pub struct EnergyIdentity {
    pub direct: u128,
    pub via_lines: u128,
    pub points_per_slice: u64,
    pub lines_in_pencil: u64,
}

/// E_c(A,B) as a sum of incidence counts: for each a₂ ∈ A take the point
/// slice P = {(b₂, a₁ − a₂)} and the pencil L = {y = c·(x − b₁) : b₁ ∈ B};
/// a vertical δ-incidence says |(a₁ + c·b₁) − (a₂ + c·b₂)| ≤ δ. Returns
/// both totals and errors if they disagree (they cannot).
pub fn energy_via_incidence(
    a: &DiscretizedSet,
    b: &DiscretizedSet,
    k: i64,
) -> Result<EnergyIdentity> {
    a.scale().same_as(b.scale())?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet("energy_via_incidence"));
    }
    let m = a.scale().m();
    let cells = a.scale().cells();
    if k < 0 || k > cells {
        return Err(Error::InvalidParameter {
            name: "k",
            reason: format!("dilation index {k} outside 0..={cells}"),
        });
    }
    // Pencil: y = c·x − c·b₁ on denominator 2^(2m).
    let lines: Vec<GridLine> = b
        .indices()
        .map(|j| GridLine::y_of_x(k * cells, -k * j, 2 * m))
        .collect();
    let delta = a.scale().delta();

    let mut via_lines: u128 = 0;
    let a_idx = a.to_index_vec();
    let mut points = Vec::with_capacity(a.len() * b.len());
    for &i2 in &a_idx {
        points.clear();
        for &j2 in b.to_index_vec().iter() {
            for &i1 in &a_idx {
                points.push(GridPoint::new(j2, i1 - i2, m));
            }
        }
        via_lines += u128::from(incidence_count(&points, &lines, delta, IncidenceMode::Vertical)?);
    }

    let direct = crate::energy::energy(a, b, k)?;
    if direct != via_lines {
        return Err(Error::IdentityMismatch { direct, via_lines });
    }
    Ok(EnergyIdentity {
        direct,
        via_lines,
        points_per_slice: (a.len() * b.len()) as u64,
        lines_in_pencil: b.len() as u64,
    })
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Tests
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
