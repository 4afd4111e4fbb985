//! Sequences derived from a residue set: the gap residues `(s_n)`, the
//! short-gap indicator `(t_n)` and the characteristic sequence `(u_n)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subsets::ResidueSet;

/// Which derivation produced a sequence, with its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum SequenceKind {
    /// `s_n ≡ x_{n+1} − x_n (mod M)`, stored with representatives `1..=M`.
    GapMod {
        #[serde(rename = "M")]
        modulus: u64,
    },
    /// `t_n = 1` iff `1 ≤ x_{n+1} − x_n ≤ m − 1`.
    GapThreshold { m: u64 },
    /// `u_n = 1` iff `n ∈ S`.
    Characteristic,
}

impl SequenceKind {
    /// The symbols that can occur, in increasing order.
    pub fn alphabet(&self) -> Vec<u64> {
        match *self {
            SequenceKind::GapMod { modulus } => (1..=modulus).collect(),
            SequenceKind::GapThreshold { .. } | SequenceKind::Characteristic => vec![0, 1],
        }
    }

    pub fn label(&self) -> String {
        match *self {
            SequenceKind::GapMod { modulus } => format!("gap_mod(M={modulus})"),
            SequenceKind::GapThreshold { m } => format!("gap_threshold(m={m})"),
            SequenceKind::Characteristic => "characteristic".into(),
        }
    }
}

/// A finite symbol sequence together with the derivation that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedSequence {
    #[serde(flatten)]
    kind: SequenceKind,
    symbols: Vec<u64>,
}

impl DerivedSequence {
    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn symbols(&self) -> &[u64] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Space-separated symbols on a single line.
    pub fn to_text_line(&self) -> String {
        let parts: Vec<String> = self.symbols.iter().map(u64::to_string).collect();
        parts.join(" ")
    }
}

fn raw_gaps(set: &ResidueSet) -> Result<impl Iterator<Item = u64> + '_> {
    if set.len() < 2 {
        return Err(Error::TooFewElements(set.len()));
    }
    Ok(set.elements().windows(2).map(|w| w[1] - w[0]))
}

pub fn derive_gap_mod(set: &ResidueSet, modulus: u64) -> Result<DerivedSequence> {
    if modulus < 2 {
        return Err(Error::ParameterTooSmall {
            name: "M",
            value: modulus,
            min: 2,
        });
    }
    let symbols = raw_gaps(set)?.map(|g| (g - 1) % modulus + 1).collect();
    Ok(DerivedSequence {
        kind: SequenceKind::GapMod { modulus },
        symbols,
    })
}

pub fn derive_gap_threshold(set: &ResidueSet, m: u64) -> Result<DerivedSequence> {
    if m < 2 {
        return Err(Error::ParameterTooSmall {
            name: "m",
            value: m,
            min: 2,
        });
    }
    let symbols = raw_gaps(set)?.map(|g| u64::from(g < m)).collect();
    Ok(DerivedSequence {
        kind: SequenceKind::GapThreshold { m },
        symbols,
    })
}

pub fn derive_characteristic(set: &ResidueSet) -> DerivedSequence {
    DerivedSequence {
        kind: SequenceKind::Characteristic,
        symbols: set.membership().into_iter().map(u64::from).collect(),
    }
}

/// Dispatches on `kind`.
pub fn derive(set: &ResidueSet, kind: SequenceKind) -> Result<DerivedSequence> {
    match kind {
        SequenceKind::GapMod { modulus } => derive_gap_mod(set, modulus),
        SequenceKind::GapThreshold { m } => derive_gap_threshold(set, m),
        SequenceKind::Characteristic => Ok(derive_characteristic(set)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subsets::quadratic_residue_set;
    use proptest::prelude::*;

    fn qr11() -> ResidueSet {
        quadratic_residue_set(11).unwrap()
    }

    #[test]
    fn gap_mod_examples() {
        assert_eq!(derive_gap_mod(&qr11(), 2).unwrap().symbols(), &[2, 1, 1, 2]);
        let full = ResidueSet::full(9).unwrap();
        assert!(derive_gap_mod(&full, 4)
            .unwrap()
            .symbols()
            .iter()
            .all(|&s| s == 1));
        let pair = ResidueSet::from_sorted(10, vec![0, 5]).unwrap();
        assert_eq!(derive_gap_mod(&pair, 3).unwrap().symbols(), &[2]);
        let pair = ResidueSet::from_sorted(10, vec![1, 7]).unwrap();
        assert_eq!(derive_gap_mod(&pair, 3).unwrap().symbols(), &[3]);
    }

    #[test]
    fn gap_threshold_examples() {
        assert_eq!(
            derive_gap_threshold(&qr11(), 2).unwrap().symbols(),
            &[0, 1, 1, 0]
        );
        let full = ResidueSet::full(6).unwrap();
        assert_eq!(derive_gap_threshold(&full, 2).unwrap().symbols(), &[1; 5]);
        assert_eq!(
            derive_gap_threshold(&qr11(), 5).unwrap().symbols(),
            &[1, 1, 1, 1]
        );
    }

    #[test]
    fn characteristic_examples() {
        assert_eq!(
            derive_characteristic(&qr11()).symbols(),
            &[0, 1, 0, 1, 1, 1, 0, 0, 0, 1, 0]
        );
        assert_eq!(
            derive_characteristic(&ResidueSet::empty(5).unwrap()).symbols(),
            &[0; 5]
        );
        assert_eq!(
            derive_characteristic(&ResidueSet::full(4).unwrap()).symbols(),
            &[1; 4]
        );
    }

    #[test]
    fn derivation_errors() {
        let single = ResidueSet::from_sorted(5, vec![2]).unwrap();
        assert_eq!(derive_gap_mod(&single, 2), Err(Error::TooFewElements(1)));
        assert_eq!(
            derive_gap_threshold(&single, 2),
            Err(Error::TooFewElements(1))
        );
        assert!(matches!(
            derive_gap_mod(&qr11(), 1),
            Err(Error::ParameterTooSmall { .. })
        ));
    }

    #[test]
    fn json_and_text() {
        let seq = derive_gap_mod(&qr11(), 2).unwrap();
        let json = serde_json::to_string(&seq).unwrap();
        assert_eq!(
            json,
            r#"{"kind":"gap_mod","params":{"M":2},"symbols":[2,1,1,2]}"#
        );
        assert_eq!(serde_json::from_str::<DerivedSequence>(&json).unwrap(), seq);
        assert_eq!(seq.to_text_line(), "2 1 1 2");
        let u = derive_characteristic(&ResidueSet::empty(2).unwrap());
        assert_eq!(
            serde_json::to_string(&u).unwrap(),
            r#"{"kind":"characteristic","symbols":[0,0]}"#
        );
    }

    fn arb_set() -> impl Strategy<Value = ResidueSet> {
        (2u64..80).prop_flat_map(|q| {
            proptest::collection::btree_set(0..q, 2..=q as usize)
                .prop_map(move |s| ResidueSet::from_sorted(q, s.into_iter().collect()).unwrap())
        })
    }

    proptest! {
        #[test]
        fn gap_sequences_are_consistent(set in arb_set(), modulus in 2u64..9) {
            let x = set.elements();
            let raw: Vec<u64> = x.windows(2).map(|w| w[1] - w[0]).collect();
            prop_assert_eq!(raw.iter().sum::<u64>(), x[x.len() - 1] - x[0]);

            let s = derive_gap_mod(&set, modulus).unwrap();
            prop_assert_eq!(s.len(), set.len() - 1);
            for (&sym, &g) in s.symbols().iter().zip(&raw) {
                prop_assert!((1..=modulus).contains(&sym));
                prop_assert_eq!(sym % modulus, g % modulus);
            }

            let t = derive_gap_threshold(&set, 2).unwrap();
            let ones: Vec<u64> = raw.iter().map(|&g| u64::from(g == 1)).collect();
            prop_assert_eq!(t.symbols(), ones.as_slice());
        }

        #[test]
        fn characteristic_round_trips(set in arb_set()) {
            let u = derive_characteristic(&set);
            prop_assert_eq!(u.len() as u64, set.modulus());
            let back: Vec<u64> = u.symbols().iter().enumerate()
                .filter(|(_, &b)| b == 1).map(|(i, _)| i as u64).collect();
            prop_assert_eq!(back.as_slice(), set.elements());
        }
    }
}
