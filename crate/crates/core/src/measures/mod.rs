//! Exact empirical statistics over sets and derived sequences.
//!
//! Counting statistics (symbol counts, sliding-window pattern counts and the
//! `Γ` window statistic) live here; the correlation measure `C_k` is in
//! [`correlation`].

pub mod correlation;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::sequences::DerivedSequence;
use crate::subsets::ResidueSet;

pub use correlation::{
    correlation_exact, correlation_exact_with, correlation_oracle, correlation_sampled,
    correlation_sampled_with, correlation_up_to, correlation_up_to_with, CorrelationMode,
    CorrelationOptions, CorrelationResult, LagTuple, DEFAULT_WORK_BUDGET,
};

/// `c(i) = +1` if `i ∈ R`, `−1` otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector {
    values: Vec<i8>,
}

impl SignVector {
    pub fn new(set: &ResidueSet) -> Self {
        SignVector {
            values: set
                .membership()
                .into_iter()
                .map(|m| if m { 1 } else { -1 })
                .collect(),
        }
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn modulus(&self) -> usize {
        self.values.len()
    }

    /// Number of `+1` entries, i.e. `T`.
    pub fn positives(&self) -> usize {
        self.values.iter().filter(|&&c| c == 1).count()
    }
}

/// `Γ(ε) = |{0 ≤ n ≤ q − s : c(n + i) = ε_i for all i}|`.
pub fn gamma_count(sign: &SignVector, pattern: &[i8]) -> Result<usize> {
    let q = sign.modulus();
    if pattern.is_empty() || pattern.len() > q {
        return Err(Error::PatternTooLong {
            len: pattern.len(),
            max: q,
        });
    }
    Ok(sign
        .values
        .windows(pattern.len())
        .filter(|w| *w == pattern)
        .count())
}

/// All `2^s` values of `Γ`, indexed by the pattern read as bits
/// (`bit i` set ⇔ `ε_i = +1`).
pub fn gamma_table(sign: &SignVector, s: usize) -> Result<Vec<usize>> {
    let q = sign.modulus();
    if s == 0 || s > q || s >= usize::BITS as usize {
        return Err(Error::PatternTooLong { len: s, max: q });
    }
    let mut counts = vec![0usize; 1 << s];
    for w in sign.values.windows(s) {
        let code = w
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &c)| acc | (usize::from(c == 1) << i));
        counts[code] += 1;
    }
    Ok(counts)
}

/// Decodes a [`gamma_table`] index into its `±1` pattern.
pub fn gamma_pattern(code: usize, s: usize) -> Vec<i8> {
    (0..s)
        .map(|i| if code >> i & 1 == 1 { 1 } else { -1 })
        .collect()
}

/// `N^{(u)}` for every symbol of the sequence's alphabet (zero counts included).
pub fn symbol_counts(seq: &DerivedSequence) -> BTreeMap<u64, usize> {
    let mut counts: BTreeMap<u64, usize> =
        seq.kind().alphabet().into_iter().map(|a| (a, 0)).collect();
    for &s in seq.symbols() {
        *counts.entry(s).or_default() += 1;
    }
    counts
}

/// Sliding-window counts of every length-`ℓ` pattern that occurs.
pub fn pattern_counts(seq: &DerivedSequence, len: usize) -> Result<BTreeMap<Vec<u64>, usize>> {
    if len == 0 || len > seq.len() {
        return Err(Error::PatternTooLong {
            len,
            max: seq.len(),
        });
    }
    let mut counts = BTreeMap::new();
    for w in seq.symbols().windows(len) {
        *counts.entry(w.to_vec()).or_default() += 1;
    }
    Ok(counts)
}

/// Every pattern over `alphabet` of length `len`, in lexicographic order.
pub fn all_patterns(alphabet: &[u64], len: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                alphabet.iter().map(move |&a| {
                    let mut next = p.clone();
                    next.push(a);
                    next
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{derive_characteristic, derive_gap_mod, derive_gap_threshold};
    use crate::subsets::quadratic_residue_set;
    use proptest::prelude::*;

    fn qr11() -> ResidueSet {
        quadratic_residue_set(11).unwrap()
    }

    #[test]
    fn gamma_examples() {
        let c = SignVector::new(&qr11());
        assert_eq!(c.positives(), 5);
        assert_eq!(gamma_count(&c, &[1]).unwrap(), 5);
        assert_eq!(gamma_count(&c, &[1, 1]).unwrap(), 2);
        let whole = c.values().to_vec();
        assert_eq!(gamma_count(&c, &whole).unwrap(), 1);
        assert!(matches!(
            gamma_count(&c, &[1; 12]),
            Err(Error::PatternTooLong { len: 12, max: 11 })
        ));
        assert!(gamma_count(&c, &[]).is_err());
    }

    #[test]
    fn gamma_table_matches_single_counts() {
        let c = SignVector::new(&qr11());
        for s in 1..=4 {
            let table = gamma_table(&c, s).unwrap();
            for (code, &n) in table.iter().enumerate() {
                assert_eq!(gamma_count(&c, &gamma_pattern(code, s)).unwrap(), n);
            }
        }
    }

    #[test]
    fn symbol_count_examples() {
        let s = derive_gap_mod(&qr11(), 2).unwrap();
        assert_eq!(symbol_counts(&s), BTreeMap::from([(1, 2), (2, 2)]));
        let ones = derive_gap_threshold(&ResidueSet::full(7).unwrap(), 2).unwrap();
        assert_eq!(symbol_counts(&ones), BTreeMap::from([(0, 0), (1, 6)]));
        let t = derive_gap_threshold(&qr11(), 2).unwrap();
        assert_eq!(symbol_counts(&t), BTreeMap::from([(0, 2), (1, 2)]));
    }

    #[test]
    fn pattern_count_examples() {
        let u = derive_characteristic(&qr11());
        let c = pattern_counts(&u, 2).unwrap();
        assert_eq!(c[&vec![1, 1]], 2);
        let single = pattern_counts(&u, 1).unwrap();
        for (sym, n) in symbol_counts(&u) {
            assert_eq!(single.get(&vec![sym]).copied().unwrap_or(0), n);
        }
        let zeros = derive_characteristic(&ResidueSet::empty(9).unwrap());
        assert_eq!(
            pattern_counts(&zeros, 3).unwrap(),
            BTreeMap::from([(vec![0, 0, 0], 7)])
        );
        assert!(pattern_counts(&zeros, 10).is_err());
    }

    #[test]
    fn all_patterns_enumeration() {
        let p = all_patterns(&[1, 2, 3], 2);
        assert_eq!(p.len(), 9);
        assert_eq!(p[0], vec![1, 1]);
        assert_eq!(p[8], vec![3, 3]);
    }

    fn arb_set() -> impl Strategy<Value = ResidueSet> {
        (1u64..70).prop_flat_map(|q| {
            proptest::collection::vec(any::<bool>(), q as usize).prop_map(move |bits| {
                let e = bits
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(i, _)| i as u64)
                    .collect();
                ResidueSet::from_sorted(q, e).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn gamma_conservation(set in arb_set(), s in 1usize..=12) {
            let q = set.modulus() as usize;
            prop_assume!(s <= q);
            let table = gamma_table(&SignVector::new(&set), s).unwrap();
            prop_assert_eq!(table.iter().sum::<usize>(), q - s + 1);
        }

        #[test]
        fn pattern_conservation_and_marginals(set in arb_set(), len in 2usize..5) {
            let u = derive_characteristic(&set);
            prop_assume!(len <= u.len());
            let long = pattern_counts(&u, len).unwrap();
            prop_assert_eq!(long.values().sum::<usize>(), u.len() - len + 1);
            // dropping the last symbol gives the (ℓ−1)-counts over windows n ≤ L − ℓ
            let mut marginal: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
            for (p, n) in &long {
                *marginal.entry(p[..len - 1].to_vec()).or_default() += n;
            }
            let mut direct: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
            for w in u.symbols()[..u.len() - 1].windows(len - 1) {
                *direct.entry(w.to_vec()).or_default() += 1;
            }
            prop_assert_eq!(marginal, direct);
        }
    }
}
