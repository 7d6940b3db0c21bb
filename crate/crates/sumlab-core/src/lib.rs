//! sumlab-core: exact-arithmetic toolkit for additive energy, sum-product
//! structure extraction, and incidence counting on dyadic grids.
//!
//! Sets live on the grid δ·ℤ ∩ [0,1] with δ = 2^(−m); every counting
//! quantity (sumset sizes, covering numbers, additive energies, incidence
//! counts, pigeonhole certificates) is computed in integer or rational
//! arithmetic, so equalities in tests are exact. Floating point appears
//! only where the quantities themselves are real-valued (exponent budgets,
//! fitted constants, reported ratios) and every such value is reproducible
//! from the exact counts.

pub mod arith;
pub mod bounds;
pub mod energy;
pub mod error;
pub mod extract;
pub mod generators;
pub mod gridset;
pub mod incidence;
pub mod io;
pub mod multiset;
pub mod report;
pub mod scale;
pub mod verify;

pub use error::{Error, Result};
pub use gridset::DiscretizedSet;
pub use multiset::ValueMultiset;
pub use scale::{Rat, Scale};
