use std::sync::Arc;

use super::{build_index_table, gcd, IndexTable};
use crate::error::{Error, Result};

/// Multiplicative character of exact order `d` modulo `p`.
///
/// Values are kept as exact angle numerators: `χ(n) = e^{2πi·k(n)/d}` with
/// `k(n) = j·ind(n) mod d`, where `j` is the character index (coprime to `d`)
/// and `ind` is taken to the smallest primitive root.
#[derive(Debug, Clone)]
pub struct MultCharacter {
    table: Arc<IndexTable>,
    order: u64,
    index: u64,
}

impl MultCharacter {
    pub fn new(p: u64, order: u64) -> Result<Self> {
        Self::with_index(Arc::new(build_index_table(p)?), order, 1)
    }

    pub fn with_index(table: Arc<IndexTable>, order: u64, index: u64) -> Result<Self> {
        let p = table.p();
        if order < 2 || !(p - 1).is_multiple_of(order) {
            return Err(Error::BadCharacter { order, p });
        }
        if gcd(index % order, order) != 1 {
            return Err(Error::BadCharacter { order, p });
        }
        Ok(MultCharacter {
            table,
            order,
            index: index % order,
        })
    }

    /// The Legendre symbol as a character of order 2.
    pub fn legendre(p: u64) -> Result<Self> {
        Self::new(p, 2)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn p(&self) -> u64 {
        self.table.p()
    }

    /// `k(n)` in `0..d`, or `None` when `p | n` (where `χ(n) = 0`).
    pub fn angle_numerator(&self, n: u64) -> Option<u64> {
        self.table
            .index(n)
            .map(|ind| (ind % self.order) * self.index % self.order)
    }
}
