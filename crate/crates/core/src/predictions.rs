//! Closed-form main terms for gap, pattern and window statistics, the balance
//! threshold for `(t_n)`, and cardinality predictions for the construction
//! catalog. Every main term is an exact rational in the density `ρ = T/q`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fraction::{big, big_ratio, ceil_from_f64, decimal_string, exact_string, pow};
use crate::numtheory::{factorize, phi, require_divisor, require_odd_prime, Poly};
use crate::subsets::ConstructionSpec;

fn density(t: u64, q: u64) -> Result<BigRational> {
    if q == 0 {
        return Err(Error::ZeroModulus);
    }
    if t > q {
        return Err(Error::OutOfRange(format!("T = {t} exceeds q = {q}")));
    }
    Ok(big_ratio(t, q))
}

fn in_range(name: &str, value: u64, lo: u64, hi: u64) -> Result<()> {
    if (lo..=hi).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!(
            "{name} = {value} is not in {lo}..={hi}"
        )))
    }
}

fn binary_weight(pattern: &[u8]) -> Result<u64> {
    if pattern.is_empty() {
        return Err(Error::PatternTooLong {
            len: 0,
            max: usize::MAX,
        });
    }
    if let Some(&b) = pattern.iter().find(|&&b| b > 1) {
        return Err(Error::OutOfRange(format!(
            "pattern symbol {b} is not 0 or 1"
        )));
    }
    Ok(pattern.iter().map(|&b| u64::from(b)).sum())
}

/// `1 − (1 − ρ)^M`, the normaliser shared by the `(s_n)` main terms.
fn gap_normaliser(rho: &BigRational, modulus: u64) -> Result<BigRational> {
    if rho.is_zero() {
        return Err(Error::DegenerateDensity);
    }
    Ok(big(1) - pow(&(big(1) - rho), modulus))
}

/// `ρ(1−ρ)^{u−1} / (1 − (1−ρ)^M) · T`: expected number of gaps `≡ u (mod M)`.
pub fn main_term_balance_s(u: u64, t: u64, q: u64, modulus: u64) -> Result<BigRational> {
    let rho = density(t, q)?;
    if modulus < 1 {
        return Err(Error::ParameterTooSmall {
            name: "M",
            value: modulus,
            min: 1,
        });
    }
    in_range("u", u, 1, modulus)?;
    let norm = gap_normaliser(&rho, modulus)?;
    Ok(&rho * pow(&(big(1) - &rho), u - 1) / norm * big(t))
}

/// `(1−ρ)^{(m−1)(1−v)} (1 − (1−ρ)^{m−1})^v · T`: expected count of `t_n = v`.
pub fn main_term_balance_t(v: u8, t: u64, q: u64, m: u64) -> Result<BigRational> {
    main_term_pattern_t(&[v], t, q, m)
}

/// `ρ^ℓ (1−ρ)^{Σa_i − ℓ} / (1 − (1−ρ)^M)^ℓ · T` for the gap pattern `a`.
pub fn main_term_pattern_s(pattern: &[u64], t: u64, q: u64, modulus: u64) -> Result<BigRational> {
    let rho = density(t, q)?;
    if pattern.is_empty() {
        return Err(Error::PatternTooLong {
            len: 0,
            max: usize::MAX,
        });
    }
    for &a in pattern {
        in_range("a_i", a, 1, modulus)?;
    }
    let norm = gap_normaliser(&rho, modulus)?;
    let len = pattern.len() as u64;
    let total: u64 = pattern.iter().sum();
    Ok(pow(&rho, len) * pow(&(big(1) - &rho), total - len) / pow(&norm, len) * big(t))
}

/// `(1−ρ)^{(m−1)(ℓ−Z)} (1 − (1−ρ)^{m−1})^Z · T`, `Z` the weight of `b`.
pub fn main_term_pattern_t(pattern: &[u8], t: u64, q: u64, m: u64) -> Result<BigRational> {
    let rho = density(t, q)?;
    if m < 2 {
        return Err(Error::ParameterTooSmall {
            name: "m",
            value: m,
            min: 2,
        });
    }
    let z = binary_weight(pattern)?;
    let len = pattern.len() as u64;
    let miss = pow(&(big(1) - &rho), m - 1);
    let hit = big(1) - &miss;
    Ok(pow(&miss, len - z) * pow(&hit, z) * big(t))
}

/// `ρ^w (1−ρ)^{ℓ−w} · q`, `w` the weight of `b`.
pub fn main_term_pattern_u(pattern: &[u8], t: u64, q: u64) -> Result<BigRational> {
    let rho = density(t, q)?;
    let w = binary_weight(pattern)?;
    let len = pattern.len() as u64;
    Ok(pow(&rho, w) * pow(&(big(1) - &rho), len - w) * big(q))
}

/// `ρ^z (1−ρ)^{s−z} · q` for a `±1` pattern with `z` entries equal to `+1`.
pub fn main_term_gamma(pattern: &[i8], t: u64, q: u64) -> Result<BigRational> {
    let rho = density(t, q)?;
    let s = pattern.len() as u64;
    if s == 0 || s > q {
        return Err(Error::PatternTooLong {
            len: pattern.len(),
            max: q as usize,
        });
    }
    if pattern.iter().any(|&e| e != 1 && e != -1) {
        return Err(Error::OutOfRange(
            "gamma pattern entries must be +1 or -1".into(),
        ));
    }
    let z = pattern.iter().filter(|&&e| e == 1).count() as u64;
    Ok(pow(&rho, z) * pow(&(big(1) - &rho), s - z) * big(q))
}

/// A main term request, tagged by the statistic it predicts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "term", rename_all = "snake_case")]
pub enum MainTermSpec {
    BalanceS {
        u: u64,
        t: u64,
        q: u64,
        #[serde(rename = "M")]
        modulus: u64,
    },
    BalanceT {
        v: u8,
        t: u64,
        q: u64,
        m: u64,
    },
    PatternS {
        pattern: Vec<u64>,
        t: u64,
        q: u64,
        #[serde(rename = "M")]
        modulus: u64,
    },
    PatternT {
        pattern: Vec<u8>,
        t: u64,
        q: u64,
        m: u64,
    },
    PatternU {
        pattern: Vec<u8>,
        t: u64,
        q: u64,
    },
    Gamma {
        pattern: Vec<i8>,
        t: u64,
        q: u64,
    },
}

impl MainTermSpec {
    pub fn evaluate(&self) -> Result<BigRational> {
        match self {
            MainTermSpec::BalanceS { u, t, q, modulus } => {
                main_term_balance_s(*u, *t, *q, *modulus)
            }
            MainTermSpec::BalanceT { v, t, q, m } => main_term_balance_t(*v, *t, *q, *m),
            MainTermSpec::PatternS {
                pattern,
                t,
                q,
                modulus,
            } => main_term_pattern_s(pattern, *t, *q, *modulus),
            MainTermSpec::PatternT { pattern, t, q, m } => main_term_pattern_t(pattern, *t, *q, *m),
            MainTermSpec::PatternU { pattern, t, q } => main_term_pattern_u(pattern, *t, *q),
            MainTermSpec::Gamma { pattern, t, q } => main_term_gamma(pattern, *t, *q),
        }
    }
}

const THRESHOLD_SCALE_DIGITS: u32 = 60;
const THRESHOLD_DIGITS: usize = 50;

/// The density `1 − 2^{−1/(m−1)}` at which `(t_n)` is balanced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceThreshold {
    m: u64,
    exact: Option<BigRational>,
    /// Within `10^{−60}` of the true value, from above.
    approx: BigRational,
}

impl BalanceThreshold {
    pub fn m(&self) -> u64 {
        self.m
    }

    /// The exact value when rational (only `m = 2`).
    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    /// 50 significant digits, rounded half-even.
    pub fn decimal(&self) -> String {
        decimal_string(&self.approx, THRESHOLD_DIGITS)
    }

    /// `round(threshold · q)` with ties to even.
    pub fn nearest_size(&self, q: u64) -> u64 {
        let x = self.exact.as_ref().unwrap_or(&self.approx) * big(q);
        round_half_even(&x)
    }

    /// `ln 2 / (m − 1)`, the large-`m` approximation. Diagnostic only.
    pub fn asymptotic(&self) -> f64 {
        std::f64::consts::LN_2 / (self.m - 1) as f64
    }
}

fn round_half_even(x: &BigRational) -> u64 {
    let floor = x.floor();
    let frac = x - &floor;
    let half = big_ratio(1, 2);
    let base = floor.to_integer();
    let up = match frac.cmp(&half) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => (&base % BigInt::from(2)) == BigInt::from(1),
    };
    let n = if up { base + 1 } else { base };
    n.to_u64().expect("nonnegative and below q")
}

pub fn balance_threshold_t(m: u64) -> Result<BalanceThreshold> {
    if m < 2 {
        return Err(Error::ParameterTooSmall {
            name: "m",
            value: m,
            min: 2,
        });
    }
    if m == 2 {
        let half = big_ratio(1, 2);
        return Ok(BalanceThreshold {
            m,
            exact: Some(half.clone()),
            approx: half,
        });
    }
    // floor(10^60 · 2^{−1/k}) is the integer k-th root of floor(10^{60k} / 2)
    let k = u32::try_from(m - 1).map_err(|_| Error::TooLarge(format!("m = {m}")))?;
    if k > 10_000 {
        return Err(Error::TooLarge(format!("m = {m}")));
    }
    let scale = BigInt::from(10).pow(THRESHOLD_SCALE_DIGITS);
    let radicand: BigInt = BigInt::from(10).pow(THRESHOLD_SCALE_DIGITS * k) / 2;
    let root = radicand.nth_root(k);
    let approx = big(1) - BigRational::new(root, scale);
    Ok(BalanceThreshold {
        m,
        exact: None,
        approx,
    })
}

/// How far an empirical value may sit from its main term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BudgetBound {
    Zero,
    /// `coefficient · √radicand`, compared exactly by squaring.
    ScaledSqrt {
        coefficient: BigRational,
        radicand: u64,
    },
    /// A rational upper bound (irrational shapes are rounded up to `10^{−9}`).
    Rational(BigRational),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationBudget {
    pub bound: BudgetBound,
    pub formula: String,
    /// Whether exceeding the bound counts as a failure.
    pub asserted: bool,
}

impl DeviationBudget {
    pub fn exact() -> Self {
        DeviationBudget {
            bound: BudgetBound::Zero,
            formula: "exact".into(),
            asserted: true,
        }
    }

    pub fn scaled_sqrt(
        coefficient: BigRational,
        radicand: u64,
        formula: impl Into<String>,
    ) -> Self {
        DeviationBudget {
            bound: BudgetBound::ScaledSqrt {
                coefficient,
                radicand,
            },
            formula: formula.into(),
            asserted: true,
        }
    }

    pub fn rational(value: BigRational, formula: impl Into<String>, asserted: bool) -> Self {
        DeviationBudget {
            bound: BudgetBound::Rational(value),
            formula: formula.into(),
            asserted,
        }
    }

    /// Rounds a nonnegative float up to the next multiple of `10^{−9}`.
    pub fn from_f64(value: f64, formula: impl Into<String>, asserted: bool) -> Self {
        Self::rational(ceil_from_f64(value.max(0.0)), formula, asserted)
    }

    /// An upper bound on the budget as a rational.
    pub fn value(&self) -> BigRational {
        match &self.bound {
            BudgetBound::Zero => BigRational::zero(),
            BudgetBound::Rational(v) => v.clone(),
            BudgetBound::ScaledSqrt {
                coefficient,
                radicand,
            } => {
                let r = (*radicand as f64).sqrt();
                let c = coefficient.to_f64().unwrap_or(f64::INFINITY);
                ceil_from_f64(c * r)
            }
        }
    }

    pub fn decimal(&self) -> String {
        decimal_string(&self.value(), 15)
    }

    /// Whether `|deviation|` lies within the bound.
    pub fn admits(&self, deviation: &BigRational) -> bool {
        let dev = deviation.abs();
        match &self.bound {
            BudgetBound::Zero => dev.is_zero(),
            BudgetBound::Rational(v) => &dev <= v,
            BudgetBound::ScaledSqrt {
                coefficient,
                radicand,
            } => &dev * &dev <= coefficient * coefficient * big(*radicand),
        }
    }
}

/// Main term and budget for the size of a constructed set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardinalityPrediction {
    pub main: BigRational,
    pub budget: DeviationBudget,
}

impl CardinalityPrediction {
    pub fn main_string(&self) -> String {
        exact_string(&self.main)
    }
}

fn sqrt_log(p: u64) -> f64 {
    let p = p as f64;
    p.sqrt() * p.ln()
}

fn degree(f: &Poly, p: u64) -> Result<u64> {
    f.degree_mod(p)
        .map(|d| d as u64)
        .ok_or(Error::ConstantPolynomial(p))
}

/// Predicted `|R|` for a catalog construction.
///
/// Exact for quadratic residues, primitive roots, the Fermat-quotient
/// families and linear power residues; the Weil bound for other power
/// residues is asserted. The remaining families carry report-only budgets
/// with constant 1.
pub fn predicted_cardinality(spec: &ConstructionSpec) -> Result<CardinalityPrediction> {
    use ConstructionSpec::*;
    let exact = |main: BigRational| {
        Ok(CardinalityPrediction {
            main,
            budget: DeviationBudget::exact(),
        })
    };
    match spec {
        Explicit { .. } => Err(Error::UnknownKind(spec.kind().into())),
        QuadraticResidues { p } => {
            require_odd_prime(*p)?;
            exact(big_ratio(p - 1, 2))
        }
        PrimitiveRoots { p } => {
            require_odd_prime(*p)?;
            exact(big(phi(p - 1)?))
        }
        FermatQuotientPowerResidues { p, d } => {
            require_odd_prime(*p)?;
            require_divisor(*d, p - 1)?;
            exact(big_ratio((p - 1) * (p - 1), *d))
        }
        FermatQuotientPrimitiveRoots { p } => {
            require_odd_prime(*p)?;
            exact(big((p - 1) * phi(p - 1)?))
        }
        PowerResidues { p, d, f } => {
            require_odd_prime(*p)?;
            require_divisor(*d, p - 1)?;
            let deg = degree(f, *p)?;
            let m = f.count_roots(*p);
            let main = big_ratio(p - m, *d);
            if deg == 1 {
                return exact(main);
            }
            let coefficient = big_ratio((d - 1) * (deg - 1), *d);
            Ok(CardinalityPrediction {
                main,
                budget: DeviationBudget::scaled_sqrt(
                    coefficient,
                    *p,
                    "((d-1)/d)(deg f - 1) sqrt(p)",
                ),
            })
        }
        PrimitiveRootPowers { p, s, r, f } => {
            require_odd_prime(*p)?;
            require_divisor(*s, p - 1)?;
            require_divisor(*r, p - 1)?;
            let n = (p - 1) / s;
            let omega = factorize(n)?.omega() as i32;
            let deg = f.degree_mod(*p).unwrap_or(0) as f64;
            Ok(CardinalityPrediction {
                main: big_ratio(phi(n)?, *r),
                budget: DeviationBudget::from_f64(
                    deg * 2f64.powi(omega) * sqrt_log(*p),
                    "deg f 2^omega((p-1)/s) sqrt(p) log p",
                    false,
                ),
            })
        }
        IndexRange { p, f, s, .. }
        | PolyValueRange { p, f, s, .. }
        | InverseRange { p, f, s, .. } => {
            require_odd_prime(*p)?;
            let deg = degree(f, *p)? as f64;
            Ok(CardinalityPrediction {
                main: big(*s),
                budget: DeviationBudget::from_f64(deg * sqrt_log(*p), "deg f sqrt(p) log p", false),
            })
        }
        CharacterArgument {
            p,
            f,
            g,
            alpha,
            beta,
            ..
        } => {
            require_odd_prime(*p)?;
            let width = beta.to_big()? - alpha.to_big()?;
            let degs = f.degree_mod(*p).unwrap_or(0) + g.degree_mod(*p).unwrap_or(0);
            Ok(CardinalityPrediction {
                main: width * big(*p),
                budget: DeviationBudget::from_f64(
                    degs as f64 * sqrt_log(*p),
                    "(deg f + deg g) sqrt(p) log p",
                    false,
                ),
            })
        }
    }
}

/// Convenience for tests and reports: `x` as a 15-digit decimal.
pub fn decimal15(x: &BigRational) -> String {
    decimal_string(x, 15)
}
