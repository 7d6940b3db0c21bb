//! Canonical report serialization.
//!
//! Every JSON document the tools emit goes through [`canonical_json`]:
//! object keys in byte order, floats rendered with the fixed `{:.11e}`
//! token, no insignificant whitespace. Two runs that compute the same
//! report therefore produce byte-identical files, which is what the
//! reproducibility check diffs.
//!
//! Conventions for values without a native JSON form: exact rationals are
//! strings `"p/q"` (`"p"` when q = 1), counts that exceed u64 become
//! decimal strings, grid sets become `{"m": …, "indices": […]}`.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::energy::EnergyReport;
use crate::error::Result;
use crate::extract::{
    BourgainSearch, BsgExtraction, DenseGapReport, DenseGapVerdict, GapWitness,
    PigeonholeCertificate, PipelineReport, StructuralExtraction, VerificationRatios,
};
use crate::gridset::DiscretizedSet;
use crate::scale::{rat_to_string, Rat};

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Canonical writer
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

/// The one float token used in all canonical output.
pub fn float_token(f: f64) -> String {
    format!("{f:.11e}")
}

/// Render a JSON value canonically: sorted keys, `{:.11e}` floats, compact
/// separators. Non-finite floats cannot occur in well-formed reports; they
/// are rendered as quoted strings so the output stays parseable.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v);
    out
}

/// Serialize any `Serialize` type and render it canonically.
pub fn canonical_json_of<T: Serialize>(t: &T) -> Result<String> {
    Ok(canonical_json(&serde_json::to_value(t)?))
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                if f.is_finite() {
                    out.push_str(&float_token(f));
                } else {
                    out.push_str(&format!("\"{f}\""));
                }
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string serialization is total"));
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("string serialization is total"));
                out.push(':');
                write_value(out, &map[key.as_str()]);
            }
            out.push('}');
        }
    }
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Value builders
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

/// Exact rationals render as `"p/q"` strings.
pub fn rat_value(r: Rat) -> Value {
    Value::String(rat_to_string(r))
}

/// Counts stay numeric while they fit in u64, then fall back to strings.
pub fn count_value(x: u128) -> Value {
    match u64::try_from(x) {
        Ok(v) => json!(v),
        Err(_) => Value::String(x.to_string()),
    }
}

/// Grid sets as `{"m": …, "indices": […]}` (indices ascending).
pub fn set_value(x: &DiscretizedSet) -> Value {
    json!({ "m": x.scale().m(), "indices": x.to_index_vec() })
}

/// A bound table keyed by its equation labels.
pub fn bound_set(entries: impl IntoIterator<Item = (String, f64)>) -> Value {
    let mut map = Map::new();
    for (label, v) in entries {
        map.insert(label, json!(v));
    }
    Value::Object(map)
}

pub fn pigeonhole_value(c: &PigeonholeCertificate) -> Value {
    json!({
        "delta": rat_value(c.delta),
        "pair_threshold": rat_value(c.pair_threshold),
        "pairs": c.pairs.iter().map(|&(s, t)| json!([s, t])).collect::<Vec<_>>(),
        "pair_floor": rat_value(c.pair_floor),
        "partner_counts": c.partner_counts,
    })
}

pub fn bsg_value(b: &BsgExtraction) -> Value {
    json!({
        "a_prime": set_value(&b.a_prime),
        "b_prime": set_value(&b.b_prime),
        "energy": count_value(b.energy),
        "k_hint": b.k_hint,
        "g_size": b.g_size,
        "a_ratio": b.a_ratio,
        "b_ratio": b.b_ratio,
        "sum_covering": b.sum_covering,
        "sum_ratio": b.sum_ratio,
        "fitted": b.fitted,
    })
}

fn ratios_value(r: &VerificationRatios) -> Value {
    json!({
        "sum_doubling": r.sum_doubling,
        "diff_doubling": r.diff_doubling,
        "doubling_target": r.doubling_target,
        "dilate_max": r.dilate_max,
        "dilate_target_statement": r.dilate_target_statement,
        "dilate_target_proof": r.dilate_target_proof,
        "b_fraction": r.b_fraction,
        "b_fraction_target": r.b_fraction_target,
        "c_fraction": r.c_fraction,
        "c_fraction_target": r.c_fraction_target,
        "fitted": r.fitted,
    })
}

pub fn structural_value(s: &StructuralExtraction) -> Value {
    json!({
        "spectrum": serde_json::to_value(&s.spectrum).expect("spectrum serializes"),
        "rho": s.rho,
        "K": s.k_statistic,
        "rho_K": s.rho_k,
        "c1_indices": s.c1_indices,
        "per_c_sizes": s
            .per_c_sizes
            .iter()
            .map(|&(c, a, b)| json!({ "c_index": c, "a_len": a, "b_len": b }))
            .collect::<Vec<_>>(),
        "certificate": pigeonhole_value(&s.certificate),
        "c_star": s.c_star,
        "c_prime_indices": s.c_prime_indices,
        "a_prime": set_value(&s.a_prime),
        "b_prime": set_value(&s.b_prime),
        "ratios": ratios_value(&s.ratios),
    })
}

pub fn search_value(s: &BourgainSearch) -> Value {
    json!({
        "M": s.m_statistic,
        "triple": s.triple,
        "D": set_value(&s.d),
        "ratio": s.ratio,
        "truncated": s.truncated,
        "triples_examined": s.triples_examined,
        "diagnostic": s.diagnostic,
    })
}

fn gap_value(g: &GapWitness) -> Value {
    json!({
        "r": rat_value(g.r),
        "location": rat_value(g.location),
        "distance": rat_value(g.distance),
        "rep": g.rep,
        "x1": rat_value(g.x1),
        "x2": rat_value(g.x2),
        "e1": rat_value(g.e1),
        "e2": rat_value(g.e2),
    })
}

pub fn verdict_str(v: DenseGapVerdict) -> &'static str {
    match v {
        DenseGapVerdict::Dense => "dense",
        DenseGapVerdict::Gap => "gap",
        DenseGapVerdict::Neither => "neither",
    }
}

pub fn dichotomy_value(d: &DenseGapReport) -> Value {
    json!({
        "verdict": verdict_str(d.verdict),
        "kappa": d.kappa,
        "s": rat_value(d.s),
        "l": d.l,
        "threshold": rat_value(d.threshold),
        "unit_ratio_count": d.unit_ratio_count,
        "covering": d.covering,
        "covering_floor": rat_value(d.covering_floor),
        "gap": d.gap.as_ref().map(gap_value),
        "truncated": d.truncated,
        "quadruples_examined": d.quadruples_examined,
        "doubling": serde_json::to_value(&d.doubling).expect("doubling rows serialize"),
        "note": d.note,
    })
}

pub fn pipeline_value(p: &PipelineReport) -> Value {
    json!({
        "extraction": structural_value(&p.extraction),
        "search": p.search.as_ref().map(search_value),
        "dichotomy": p.dichotomy.as_ref().map(dichotomy_value),
        "notes": p.notes,
    })
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// CSV
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

/// Per-dilation energies as a two-column CSV with the fixed header.
pub fn energy_csv(rep: &EnergyReport) -> String {
    let mut out = String::from("c_index,energy\n");
    for row in &rep.per_c {
        out.push_str(&format!("{},{}\n", row.c_index, row.energy));
    }
    out
}
