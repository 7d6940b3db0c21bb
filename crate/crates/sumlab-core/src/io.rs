//! Plain-text exchange formats.
//!
//! Grid sets:
//! ```text
//! # optional comments
//! scale m=8
//! 0
//! 3
//! 17
//! ```
//! One decimal index per line after the `scale m=<int>` header. Blank
//! lines and lines starting with `#` are ignored everywhere. Parse errors
//! carry 1-based line numbers.
//!
//! Value multisets:
//! ```text
//! denominator=65536
//! -12,3
//! 0,1
//! ```
//! A `denominator=<int>` header (a positive power of two) followed by
//! `value,multiplicity` rows; duplicate values merge by summing.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::gridset::DiscretizedSet;
use crate::multiset::ValueMultiset;
use crate::scale::Scale;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Significant lines of a document: trimmed, with blanks and `#` comments
/// removed, paired with their original 1-based line numbers.
fn significant_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, raw)| (i + 1, raw.trim()))
        .filter(|(_, s)| !s.is_empty() && !s.starts_with('#'))
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Grid sets
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

pub fn parse_set(text: &str) -> Result<DiscretizedSet> {
    let mut lines = significant_lines(text);
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing `scale m=<int>` header"))?;
    let m_text = header
        .strip_prefix("scale m=")
        .ok_or_else(|| parse_err(header_line, format!("expected `scale m=<int>`, got `{header}`")))?;
    let m: u32 = m_text
        .trim()
        .parse()
        .map_err(|_| parse_err(header_line, format!("bad scale exponent `{m_text}`")))?;
    let scale = Scale::new(m)
        .map_err(|e| parse_err(header_line, e.to_string()))?;

    let mut indices = Vec::new();
    for (line, s) in lines {
        let index: i64 = s
            .parse()
            .map_err(|_| parse_err(line, format!("bad index `{s}` (need a decimal integer)")))?;
        indices.push((line, index));
    }
    DiscretizedSet::from_indices(scale, indices.iter().map(|&(_, i)| i)).map_err(|e| {
        // Re-attach the offending line for range errors.
        if let Error::IndexRange { index, .. } = e {
            let line = indices
                .iter()
                .find(|&&(_, i)| i == index)
                .map_or(header_line, |&(l, _)| l);
            parse_err(line, format!("index {index} out of range at scale m={m}"))
        } else {
            e
        }
    })
}

pub fn format_set(x: &DiscretizedSet) -> String {
    let mut out = format!("scale m={}\n", x.scale().m());
    for i in x.indices() {
        out.push_str(&format!("{i}\n"));
    }
    out
}

pub fn read_set(path: &Path) -> Result<DiscretizedSet> {
    parse_set(&fs::read_to_string(path)?)
}

pub fn write_set(path: &Path, x: &DiscretizedSet) -> Result<()> {
    Ok(fs::write(path, format_set(x))?)
}

// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
// Value multisets
// ━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━

pub fn parse_multiset(text: &str) -> Result<ValueMultiset> {
    let mut lines = significant_lines(text);
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing `denominator=<int>` header"))?;
    let den_text = header.strip_prefix("denominator=").ok_or_else(|| {
        parse_err(header_line, format!("expected `denominator=<int>`, got `{header}`"))
    })?;
    let den: u128 = den_text
        .trim()
        .parse()
        .map_err(|_| parse_err(header_line, format!("bad denominator `{den_text}`")))?;
    if den == 0 || !den.is_power_of_two() {
        return Err(parse_err(header_line, format!("denominator {den} is not a power of two")));
    }
    let log_den = den.trailing_zeros();
    if log_den > 96 {
        return Err(parse_err(header_line, format!("denominator 2^{log_den} exceeds 2^96")));
    }

    let mut merged: BTreeMap<i128, u64> = BTreeMap::new();
    for (line, s) in lines {
        let (v_text, m_text) = s
            .split_once(',')
            .ok_or_else(|| parse_err(line, format!("expected `value,multiplicity`, got `{s}`")))?;
        let value: i128 = v_text
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad value `{}`", v_text.trim())))?;
        let mult: u64 = m_text
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad multiplicity `{}`", m_text.trim())))?;
        if mult == 0 {
            return Err(parse_err(line, "multiplicity must be ≥ 1"));
        }
        let slot = merged.entry(value).or_insert(0);
        *slot = slot
            .checked_add(mult)
            .ok_or_else(|| parse_err(line, "multiplicity total overflows u64"))?;
    }
    ValueMultiset::from_pairs(log_den, merged.into_iter().collect())
}

pub fn format_multiset(vm: &ValueMultiset) -> String {
    let mut out = format!("denominator={}\n", vm.denominator());
    for &(value, mult) in vm.entries() {
        out.push_str(&format!("{value},{mult}\n"));
    }
    out
}

pub fn read_multiset(path: &Path) -> Result<ValueMultiset> {
    parse_multiset(&fs::read_to_string(path)?)
}

pub fn write_multiset(path: &Path, vm: &ValueMultiset) -> Result<()> {
    Ok(fs::write(path, format_multiset(vm))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_round_trip() {
        let x = DiscretizedSet::from_indices(Scale::new(8).unwrap(), [17, 0, 3, -5]).unwrap();
        let text = format_set(&x);
        assert!(text.starts_with("scale m=8\n"));
        let back = parse_set(&text).unwrap();
        assert_eq!(back.to_index_vec(), vec![-5, 0, 3, 17]);
        assert_eq!(back.scale().m(), 8);
    }

    #[test]
    fn set_parser_skips_comments_and_blanks() {
        let text = "# corpus slice\n\nscale m=4\n # another note\n0\n\n7\n";
        let x = parse_set(text).unwrap();
        assert_eq!(x.to_index_vec(), vec![0, 7]);
    }

    #[test]
    fn set_parser_reports_line_numbers() {
        match parse_set("scale m=4\n0\nbanana\n") {
            Err(Error::Parse { line: 3, message }) => assert!(message.contains("banana")),
            other => panic!("expected a line-3 parse error, got {other:?}"),
        }
        match parse_set("scale m=99\n") {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("expected a header error, got {other:?}"),
        }
        match parse_set("0\n1\n") {
            Err(Error::Parse { line: 1, message }) => assert!(message.contains("scale m=")),
            other => panic!("expected a header error, got {other:?}"),
        }
        // Out-of-range index names the offending line.
        match parse_set("scale m=4\n0\n9999999999999\n") {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("expected a line-3 range error, got {other:?}"),
        }
    }

    #[test]
    fn multiset_round_trip_and_merge() {
        let text = "denominator=256\n-12,3\n0,1\n-12,2\n";
        let vm = parse_multiset(text).unwrap();
        assert_eq!(vm.log_den(), 8);
        assert_eq!(vm.entries(), &[(-12, 5), (0, 1)]);
        let again = parse_multiset(&format_multiset(&vm)).unwrap();
        assert_eq!(again.entries(), vm.entries());
    }

    #[test]
    fn multiset_parser_validates() {
        assert!(matches!(
            parse_multiset("denominator=3\n1,1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_multiset("denominator=8\n1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_multiset("denominator=8\n1,0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
