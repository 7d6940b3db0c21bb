//! Exact multisets of rational values on a common power-of-two denominator.
//!
//! These hold the derived value collections {a + c·b}, {Σ dᵢ·xᵢ}, … that do
//! not live on the native δ-grid (a product like c·b has denominator 2^(2m)).
//! Entries are (numerator, multiplicity) pairs with numerators strictly
//! increasing; total multiplicity always equals the number of generating
//! tuples, so nothing is lost to deduplication.

use crate::error::{Error, Result};
use crate::scale::{rat, Rat};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ValueMultiset {
    /// Values are numerator / 2^log_den.
    log_den: u32,
    /// Strictly increasing numerators with their multiplicities (all ≥ 1).
    entries: Vec<(i128, u64)>,
    total: u64,
}

impl ValueMultiset {
    /// Build from an unsorted list of raw numerators (one per generating
    /// tuple); duplicates become multiplicities.
    pub fn from_numerators(log_den: u32, mut values: Vec<i128>) -> Self {
        values.sort_unstable();
        let total = values.len() as u64;
        let mut entries: Vec<(i128, u64)> = Vec::new();
        for v in values {
            match entries.last_mut() {
                Some((last, mult)) if *last == v => *mult += 1,
                _ => entries.push((v, 1)),
            }
        }
        ValueMultiset { log_den, entries, total }
    }

    /// Build from explicit (numerator, multiplicity) pairs.
    pub fn from_pairs(log_den: u32, pairs: Vec<(i128, u64)>) -> Result<Self> {
        let mut total: u64 = 0;
        for w in pairs.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(Error::InvalidParameter {
                    name: "pairs",
                    reason: "numerators must be strictly increasing".into(),
                });
            }
        }
        for &(_, mult) in &pairs {
            if mult == 0 {
                return Err(Error::InvalidParameter {
                    name: "pairs",
                    reason: "multiplicities must be ≥ 1".into(),
                });
            }
            total = total.checked_add(mult).ok_or(Error::Overflow("multiset total"))?;
        }
        Ok(ValueMultiset { log_den, entries: pairs, total })
    }

    pub fn log_den(&self) -> u32 {
        self.log_den
    }

    /// Denominator 2^log_den.
    pub fn denominator(&self) -> i128 {
        1i128 << self.log_den
    }

    /// Number of distinct values.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Total multiplicity (number of generating tuples).
    pub fn total_mass(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(i128, u64)] {
        &self.entries
    }

    pub fn value(&self, k: usize) -> Rat {
        rat(self.entries[k].0, self.denominator())
    }

    pub fn multiplicity_of(&self, numerator: i128) -> u64 {
        self.entries
            .binary_search_by_key(&numerator, |&(v, _)| v)
            .map(|k| self.entries[k].1)
            .unwrap_or(0)
    }

    /// Covering number at scale t (distinct cells hit by the support).
    pub fn covering_number(&self, t: Rat) -> u64 {
        crate::gridset::covering_count(
            self.entries.iter().map(|&(v, _)| v),
            self.denominator(),
            t,
        )
    }

    /// Largest multiplicity among values falling in the dyadic cell
    /// [j·t, (j+1)·t) — the cell masses used by popularity arguments.
    /// Returns (cell index, mass) pairs in ascending cell order.
    pub fn cell_masses(&self, t: Rat) -> Vec<(i128, u64)> {
        assert!(t > Rat::from_integer(0));
        let q = self.denominator() * t.numer();
        let mut out: Vec<(i128, u64)> = Vec::new();
        for &(v, mult) in &self.entries {
            let cell = crate::scale::div_floor(v * t.denom(), q);
            match out.last_mut() {
                Some((c, mass)) if *c == cell => *mass += mult,
                _ => out.push((cell, mult)),
            }
        }
        out
    }
}
