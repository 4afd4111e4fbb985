//! Subset families of `Z_q` and the balanced indicator `f_R`.
//!
//! Every construction returns a [`ResidueSet`]: a modulus together with a
//! strictly increasing list of residues. Windows `{r, …, r+s−1}` are read
//! cyclically (mod `p` for value windows, mod `p − 1` for index windows), and
//! an `n` with `p | f(n)` never belongs to a set whose definition asks for a
//! unit value.

use std::sync::Arc;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraction::Fraction;
use crate::numtheory::{
    build_index_table, fermat_quotient, inv_mod_prime, pow_mod, primitive_root_set, reduce,
    require_divisor, require_odd_prime, IndexTable, MultCharacter, Poly,
};

/// A subset of `Z_q` stored as `0 ≤ x_0 < x_1 < … < x_{T−1} ≤ q − 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSet", into = "RawSet")]
pub struct ResidueSet {
    modulus: u64,
    elements: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct RawSet {
    q: u64,
    elements: Vec<u64>,
}

impl TryFrom<RawSet> for ResidueSet {
    type Error = Error;
    fn try_from(raw: RawSet) -> Result<Self> {
        ResidueSet::from_sorted(raw.q, raw.elements)
    }
}

impl From<ResidueSet> for RawSet {
    fn from(set: ResidueSet) -> Self {
        RawSet {
            q: set.modulus,
            elements: set.elements,
        }
    }
}

impl ResidueSet {
    /// Validates strict increase and range; the elements are kept verbatim.
    pub fn from_sorted(modulus: u64, elements: Vec<u64>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::ZeroModulus);
        }
        if let Some(&bad) = elements.iter().find(|&&x| x >= modulus) {
            return Err(Error::ResidueOutOfRange {
                value: bad,
                modulus,
            });
        }
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config {
                path: "elements".into(),
                message: "elements must be strictly increasing".into(),
            });
        }
        Ok(ResidueSet { modulus, elements })
    }

    /// Reduces, sorts and deduplicates arbitrary integers into a set.
    pub fn from_residues(modulus: u64, values: impl IntoIterator<Item = i64>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::ZeroModulus);
        }
        let mut elements: Vec<u64> = values.into_iter().map(|v| reduce(v, modulus)).collect();
        elements.sort_unstable();
        elements.dedup();
        Ok(ResidueSet { modulus, elements })
    }

    fn from_membership(modulus: u64, member: impl Fn(u64) -> bool) -> Self {
        ResidueSet {
            modulus,
            elements: (0..modulus).filter(|&n| member(n)).collect(),
        }
    }

    pub fn empty(modulus: u64) -> Result<Self> {
        Self::from_sorted(modulus, Vec::new())
    }

    pub fn full(modulus: u64) -> Result<Self> {
        Self::from_sorted(modulus, (0..modulus).collect())
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    /// `T = |S|`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.elements.binary_search(&n).is_ok()
    }

    /// Dense membership vector of length `q`.
    pub fn membership(&self) -> Vec<bool> {
        let mut m = vec![false; self.modulus as usize];
        for &x in &self.elements {
            m[x as usize] = true;
        }
        m
    }

    /// `S + shift` with every element reduced mod `q`.
    pub fn shifted(&self, shift: u64) -> Self {
        let q = self.modulus;
        let mut elements: Vec<u64> = self.elements.iter().map(|&x| (x + shift % q) % q).collect();
        elements.sort_unstable();
        ResidueSet {
            modulus: q,
            elements,
        }
    }
}

/// Multiplicative character parameters: order and index (coprime to order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharacterSpec {
    pub order: u64,
    #[serde(default = "one")]
    pub index: u64,
}

fn one() -> u64 {
    1
}

fn trivial_poly() -> Poly {
    Poly::new(vec![0]).expect("nonempty")
}

/// Tagged description of a construction; serialized as
/// `{"kind": "...", "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ConstructionSpec {
    Explicit {
        q: u64,
        elements: Vec<u64>,
    },
    QuadraticResidues {
        p: u64,
    },
    PowerResidues {
        p: u64,
        d: u64,
        #[serde(default = "Poly::x")]
        f: Poly,
    },
    PrimitiveRoots {
        p: u64,
    },
    PrimitiveRootPowers {
        p: u64,
        s: u64,
        r: u64,
        #[serde(default = "Poly::x")]
        f: Poly,
    },
    IndexRange {
        p: u64,
        #[serde(default = "Poly::x")]
        f: Poly,
        r: i64,
        s: u64,
    },
    PolyValueRange {
        p: u64,
        f: Poly,
        r: i64,
        s: u64,
    },
    InverseRange {
        p: u64,
        #[serde(default = "Poly::x")]
        f: Poly,
        r: i64,
        s: u64,
    },
    CharacterArgument {
        p: u64,
        #[serde(default)]
        chi: Option<CharacterSpec>,
        /// Additive character `ψ(x) = e^{2πi·a·x/p}`; `0` is trivial.
        #[serde(default)]
        psi: u64,
        #[serde(default = "Poly::x")]
        f: Poly,
        #[serde(default = "trivial_poly")]
        g: Poly,
        alpha: Fraction,
        beta: Fraction,
    },
    FermatQuotientPowerResidues {
        p: u64,
        d: u64,
    },
    FermatQuotientPrimitiveRoots {
        p: u64,
    },
}

impl ConstructionSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ConstructionSpec::Explicit { .. } => "explicit",
            ConstructionSpec::QuadraticResidues { .. } => "quadratic_residues",
            ConstructionSpec::PowerResidues { .. } => "power_residues",
            ConstructionSpec::PrimitiveRoots { .. } => "primitive_roots",
            ConstructionSpec::PrimitiveRootPowers { .. } => "primitive_root_powers",
            ConstructionSpec::IndexRange { .. } => "index_range",
            ConstructionSpec::PolyValueRange { .. } => "poly_value_range",
            ConstructionSpec::InverseRange { .. } => "inverse_range",
            ConstructionSpec::CharacterArgument { .. } => "character_argument",
            ConstructionSpec::FermatQuotientPowerResidues { .. } => {
                "fermat_quotient_power_residues"
            }
            ConstructionSpec::FermatQuotientPrimitiveRoots { .. } => {
                "fermat_quotient_primitive_roots"
            }
        }
    }
}

/// Builds the set described by `spec`.
pub fn construct(spec: &ConstructionSpec) -> Result<ResidueSet> {
    use ConstructionSpec::*;
    match spec {
        Explicit { q, elements } => ResidueSet::from_sorted(*q, elements.clone()),
        QuadraticResidues { p } => quadratic_residue_set(*p),
        PowerResidues { p, d, f } => power_residue_set(*p, *d, f),
        PrimitiveRoots { p } => primitive_root_set(*p),
        PrimitiveRootPowers { p, s, r, f } => primitive_root_power_set(*p, *s, *r, f),
        IndexRange { p, f, r, s } => index_range_set(*p, f, *r, *s),
        PolyValueRange { p, f, r, s } => poly_value_range_set(*p, f, *r, *s),
        InverseRange { p, f, r, s } => inverse_range_set(*p, f, *r, *s),
        CharacterArgument {
            p,
            chi,
            psi,
            f,
            g,
            alpha,
            beta,
        } => {
            require_odd_prime(*p)?;
            let chi = chi
                .map(|c| {
                    MultCharacter::with_index(Arc::new(build_index_table(*p)?), c.order, c.index)
                })
                .transpose()?;
            character_argument_set(
                *p,
                chi.as_ref(),
                *psi,
                f,
                g,
                alpha.to_ratio()?,
                beta.to_ratio()?,
            )
        }
        FermatQuotientPowerResidues { p, d } => fermat_quotient_power_residue_set(*p, *d),
        FermatQuotientPrimitiveRoots { p } => fermat_quotient_primitive_root_set(*p),
    }
}

/// Nonzero squares modulo `p`; `(p − 1)/2` elements.
pub fn quadratic_residue_set(p: u64) -> Result<ResidueSet> {
    require_odd_prime(p)?;
    let mut square = vec![false; p as usize];
    for y in 1..=(p - 1) / 2 {
        square[(y * y % p) as usize] = true;
    }
    Ok(ResidueSet::from_membership(p, |n| square[n as usize]))
}

fn require_degree(f: &Poly, p: u64, min: usize) -> Result<usize> {
    match f.degree_mod(p) {
        None | Some(0) if min >= 1 => Err(Error::ConstantPolynomial(p)),
        Some(deg) if deg >= min => Ok(deg),
        deg => Err(Error::DegreeTooSmall {
            degree: deg.unwrap_or(0),
            min,
        }),
    }
}

fn require_window(s: u64, p: u64) -> Result<()> {
    if s == 0 || s >= p {
        Err(Error::RangeTooLong { s, p })
    } else {
        Ok(())
    }
}

/// `{n : f(n) is a nonzero d-th power mod p}`, decided by Euler's criterion.
pub fn power_residue_set(p: u64, d: u64, f: &Poly) -> Result<ResidueSet> {
    require_odd_prime(p)?;
    require_divisor(d, p - 1)?;
    require_degree(f, p, 1)?;
    if !f.is_squarefree_mod(p) {
        return Err(Error::NotSquarefree(p));
    }
    let e = (p - 1) / d;
    Ok(ResidueSet::from_membership(p, |n| {
        let v = f.eval(n, p);
        v != 0 && pow_mod(v, e, p) == 1
    }))
}

/// `{g^s : g primitive root, f(g^s) a nonzero r-th power}`.
pub fn primitive_root_power_set(p: u64, s: u64, r: u64, f: &Poly) -> Result<ResidueSet> {
    require_odd_prime(p)?;
    require_divisor(s, p - 1)?;
    require_divisor(r, p - 1)?;
    let e = (p - 1) / r;
    let table = build_index_table(p)?;
    let mut hit = vec![false; p as usize];
    for k in 1..p - 1 {
        if crate::numtheory::gcd(k, p - 1) != 1 {
            continue;
        }
        let x = table.power(k * s % (p - 1));
        let v = f.eval(x, p);
        if v != 0 && pow_mod(v, e, p) == 1 {
            hit[x as usize] = true;
        }
    }
    Ok(ResidueSet::from_membership(p, |n| hit[n as usize]))
}

/// `{n : ind f(n) mod (p−1) lies in the cyclic window [r, r+s−1]}`.
///
/// Indices are discrete logarithms to the smallest primitive root.
pub fn index_range_set(p: u64, f: &Poly, r: i64, s: u64) -> Result<ResidueSet> {
    require_odd_prime(p)?;
    require_window(s, p)?;
    require_degree(f, p, 1)?;
    let table = build_index_table(p)?;
    Ok(index_range_with_table(&table, f, r, s))
}

pub(crate) fn index_range_with_table(table: &IndexTable, f: &Poly, r: i64, s: u64) -> ResidueSet {
    let p = table.p();
    let start = reduce(r, p - 1);
    ResidueSet::from_membership(p, |n| {
        table
            .index(f.eval(n, p))
            .is_some_and(|ind| (ind + (p - 1) - start) % (p - 1) < s)
    })
}

/// `{n : f(n) mod p lies in the cyclic window [r, r+s−1]}`, `deg f ≥ 2`.
pub fn poly_value_range_set(p: u64, f: &Poly, r: i64, s: u64) -> Result<ResidueSet> {
    require_odd_prime(p)?;
    require_window(s, p)?;
    require_degree(f, p, 2)?;
    let start = reduce(r, p);
    Ok(ResidueSet::from_membership(p, |n| {
        (f.eval(n, p) + p - start) % p < s
    }))
}

/// `{n : p ∤ f(n), f(n)^{−1} mod p lies in the cyclic window [r, r+s−1]}`.
pub fn inverse_range_set(p: u64, f: &Poly, r: i64, s: u64) -> Result<ResidueSet> {
    require_odd_prime(p)?;
    require_window(s, p)?;
    let deg = require_degree(f, p, 1)?;
    if deg as u64 >= p {
        return Err(Error::OutOfRange(format!(
            "degree {deg} must be below p = {p}"
        )));
    }
    if !f.is_squarefree_mod(p) {
        return Err(Error::NotSquarefree(p));
    }
    let start = reduce(r, p);
    Ok(ResidueSet::from_membership(p, |n| {
        inv_mod_prime(f.eval(n, p), p).is_some_and(|inv| (inv + p - start) % p < s)
    }))
}

/// `{n : p ∤ f(n), arg(χ(f(n))·ψ(g(n))) ∈ [2πα, 2πβ)}` with the argument read
/// modulo `2π`.
///
/// The total angle `k(f(n))/d + a·g(n)/p` is an exact rational, so boundary
/// points are decided without rounding. `chi = None` is the trivial
/// character and `psi = 0` the trivial additive character.
pub fn character_argument_set(
    p: u64,
    chi: Option<&MultCharacter>,
    psi: u64,
    f: &Poly,
    g: &Poly,
    alpha: Ratio<i128>,
    beta: Ratio<i128>,
) -> Result<ResidueSet> {
    require_odd_prime(p)?;
    let width = beta - alpha;
    if width <= Ratio::zero() || width > Ratio::from_integer(1) {
        return Err(Error::BadWindow {
            alpha: alpha.to_string(),
            beta: beta.to_string(),
        });
    }
    if let Some(c) = chi {
        if c.p() != p {
            return Err(Error::BadCharacter {
                order: c.order(),
                p,
            });
        }
    }
    let a = psi % p;
    if chi.is_none() && a == 0 {
        return Err(Error::TrivialCharacters);
    }
    if a != 0 {
        let deg = g.degree_mod(p).unwrap_or(0);
        if deg < 2 {
            return Err(Error::DegreeTooSmall {
                degree: deg,
                min: 2,
            });
        }
    }
    let d = chi.map_or(1, |c| c.order());
    let denom = (d * p) as i128;
    let full = width == Ratio::from_integer(1);
    Ok(ResidueSet::from_membership(p, |n| {
        let fv = f.eval(n, p);
        if fv == 0 {
            return false;
        }
        let k = match chi {
            Some(c) => c.angle_numerator(fv).expect("unit value"),
            None => 0,
        };
        if full {
            return true;
        }
        let additive = a * g.eval(n, p) % p;
        let theta = Ratio::new(((k * p + additive * d) % (d * p)) as i128, denom);
        let offset = theta - alpha;
        let offset = offset - offset.floor();
        offset < width
    }))
}

/// Subset of `Z_{p²}`: `{n : q_p(n) ≡ y^d mod p for some 1 ≤ y ≤ p−1}`.
pub fn fermat_quotient_power_residue_set(p: u64, d: u64) -> Result<ResidueSet> {
    require_odd_prime(p)?;
    require_divisor(d, p - 1)?;
    let p2 = checked_square(p)?;
    let e = (p - 1) / d;
    let residue: Vec<bool> = (0..p).map(|v| v != 0 && pow_mod(v, e, p) == 1).collect();
    Ok(ResidueSet::from_membership(p2, |n| {
        residue[fermat_quotient(n as i64, p) as usize]
    }))
}

/// Subset of `Z_{p²}`: `{n : q_p(n) is a primitive root mod p}`.
pub fn fermat_quotient_primitive_root_set(p: u64) -> Result<ResidueSet> {
    require_odd_prime(p)?;
    let p2 = checked_square(p)?;
    let roots = primitive_root_set(p)?.membership();
    Ok(ResidueSet::from_membership(p2, |n| {
        roots[fermat_quotient(n as i64, p) as usize]
    }))
}

fn checked_square(p: u64) -> Result<u64> {
    p.checked_mul(p)
        .filter(|&p2| p2 < 1 << 40)
        .ok_or_else(|| Error::TooLarge(format!("p^2 for p = {p}")))
}

/// The balanced indicator `f_R(n) = [n ∈ R] − |R|/q`.
#[derive(Debug, Clone)]
pub struct BalancedIndicator {
    members: Vec<bool>,
    size: u64,
}

impl BalancedIndicator {
    pub fn new(set: &ResidueSet) -> Self {
        BalancedIndicator {
            members: set.membership(),
            size: set.len() as u64,
        }
    }

    pub fn modulus(&self) -> u64 {
        self.members.len() as u64
    }

    /// `ρ = T/q`.
    pub fn density(&self) -> Ratio<i64> {
        Ratio::new(self.size as i64, self.modulus() as i64)
    }

    /// `q·f_R(n)`, an integer in `{q − T, −T}`; `n` is reduced mod `q`.
    pub fn scaled(&self, n: u64) -> i64 {
        let q = self.modulus();
        let base = -(self.size as i64);
        if self.members[(n % q) as usize] {
            base + q as i64
        } else {
            base
        }
    }

    pub fn value(&self, n: u64) -> Ratio<i64> {
        Ratio::new(self.scaled(n), self.modulus() as i64)
    }
}

pub fn balanced_indicator(set: &ResidueSet) -> BalancedIndicator {
    BalancedIndicator::new(set)
}
