//! Word-sized modular arithmetic: primality, factorization, primitive roots,
//! index tables, Legendre symbols and Fermat quotients.
//!
//! Everything here works on `u64` with `u128` intermediates, so moduli up to
//! `2^63` are safe for multiplication. Tables (index tables, primitive root
//! sets) are dense and cost `Θ(p)` memory.

mod character;
mod poly;

pub use character::MultCharacter;
pub use poly::{poly_eval_mod, Poly};

use crate::error::{Error, Result};
use crate::subsets::ResidueSet;

/// Upper bound for trial division in [`factorize`].
const TRIAL_LIMIT: u64 = 1_000_000;

/// Largest modulus accepted by [`build_index_table`].
pub const INDEX_TABLE_LIMIT: u64 = 1 << 26;

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Reduces a signed integer into `0..m`.
#[inline]
pub fn reduce(n: i64, m: u64) -> u64 {
    (n as i128).rem_euclid(m as i128) as u64
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `a` modulo the prime `p`, or `None` when `p | a`.
pub fn inv_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    (a != 0).then(|| pow_mod(a, p - 2, p))
}

/// Deterministic Miller-Rabin; the witness set is exact for all `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub(crate) fn require_odd_prime(p: u64) -> Result<()> {
    if p % 2 == 1 && is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

pub(crate) fn require_divisor(d: u64, n: u64) -> Result<()> {
    if d != 0 && n.is_multiple_of(d) {
        Ok(())
    } else {
        Err(Error::NotDivisor { d, n })
    }
}

/// Prime factorization `n = ∏ pᵢ^eᵢ` with primes in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Number of distinct prime factors, ω(n).
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// All positive divisors in increasing order.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

/// Trial division up to `10^6`, then the remaining cofactor must be prime.
///
/// Cofactors that are composite with every prime factor above `10^6` are
/// rejected with [`Error::TooLarge`] instead of being returned mis-factored.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 {
        return Err(Error::OutOfRange("cannot factor 0".into()));
    }
    let mut factors = Vec::new();
    let mut rest = n;
    let mut d = 2u64;
    while d <= TRIAL_LIMIT && d * d <= rest {
        if rest.is_multiple_of(d) {
            let mut e = 0;
            while rest.is_multiple_of(d) {
                rest /= d;
                e += 1;
            }
            factors.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        if !is_prime(rest) {
            return Err(Error::TooLarge(format!(
                "{n} has a composite cofactor {rest} beyond trial division"
            )));
        }
        factors.push((rest, 1));
    }
    Ok(Factorization { n, factors })
}

/// Euler's totient from a factorization.
pub fn euler_phi(f: &Factorization) -> u64 {
    f.factors
        .iter()
        .map(|&(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

/// Convenience wrapper: φ(n) for `n ≥ 1`.
pub fn phi(n: u64) -> Result<u64> {
    factorize(n).map(|f| euler_phi(&f))
}

fn has_full_order(g: u64, p: u64, order_primes: &[u64]) -> bool {
    !g.is_multiple_of(p)
        && order_primes
            .iter()
            .all(|&l| pow_mod(g, (p - 1) / l, p) != 1)
}

/// Smallest primitive root modulo the odd prime `p`.
pub fn find_primitive_root(p: u64) -> Result<u64> {
    require_odd_prime(p)?;
    if p >= 1 << 32 {
        return Err(Error::TooLarge(format!(
            "primitive root search for p = {p}"
        )));
    }
    let primes: Vec<u64> = factorize(p - 1)?.primes().collect();
    (2..p)
        .find(|&g| has_full_order(g, p, &primes))
        .ok_or(Error::NotPrime(p))
}

/// Multiplicative order of `a` modulo the prime `p`.
pub fn multiplicative_order(a: u64, p: u64) -> Result<u64> {
    require_odd_prime(p)?;
    let a = a % p;
    if a == 0 {
        return Err(Error::OutOfRange(format!("0 has no order modulo {p}")));
    }
    let f = factorize(p - 1)?;
    let mut order = p - 1;
    for &(l, e) in f.factors() {
        for _ in 0..e {
            if pow_mod(a, order / l, p) == 1 {
                order /= l;
            } else {
                break;
            }
        }
    }
    Ok(order)
}

/// The set of all primitive roots modulo `p`; it has φ(p−1) elements.
pub fn primitive_root_set(p: u64) -> Result<ResidueSet> {
    require_odd_prime(p)?;
    let g = find_primitive_root(p)?;
    let mut elements = Vec::new();
    let mut x = 1u64;
    for k in 0..p - 1 {
        if gcd(k, p - 1) == 1 {
            elements.push(x);
        }
        x = mul_mod(x, g, p);
    }
    elements.sort_unstable();
    ResidueSet::from_sorted(p, elements)
}

/// Dense discrete-logarithm table to the smallest primitive root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexTable {
    p: u64,
    g: u64,
    // index_of[n] for n in 1..p; slot 0 is unused
    index_of: Vec<u32>,
    // power[k] = g^k for k in 0..p-1
    power: Vec<u32>,
}

impl IndexTable {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn generator(&self) -> u64 {
        self.g
    }

    /// `ind n`, or `None` when `p | n`.
    #[inline]
    pub fn index(&self, n: u64) -> Option<u64> {
        let r = n % self.p;
        (r != 0).then(|| self.index_of[r as usize] as u64)
    }

    /// `g^k mod p` for any `k`.
    #[inline]
    pub fn power(&self, k: u64) -> u64 {
        self.power[(k % (self.p - 1)) as usize] as u64
    }
}

pub fn build_index_table(p: u64) -> Result<IndexTable> {
    require_odd_prime(p)?;
    if p >= INDEX_TABLE_LIMIT {
        return Err(Error::TooLarge(format!(
            "index table for p = {p} (limit {INDEX_TABLE_LIMIT})"
        )));
    }
    let g = find_primitive_root(p)?;
    let mut index_of = vec![0u32; p as usize];
    let mut power = Vec::with_capacity((p - 1) as usize);
    let mut x = 1u64;
    for k in 0..p - 1 {
        index_of[x as usize] = k as u32;
        power.push(x as u32);
        x = mul_mod(x, g, p);
    }
    Ok(IndexTable {
        p,
        g,
        index_of,
        power,
    })
}

/// Legendre symbol `(n/p)` by Euler's criterion.
pub fn legendre_symbol(n: i64, p: u64) -> i8 {
    let r = reduce(n, p);
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Fermat quotient `q_p(n) ≡ (n^{p−1} − 1)/p (mod p)`, and `0` when `p | n`.
pub fn fermat_quotient(n: i64, p: u64) -> u64 {
    let p2 = p * p;
    let r = reduce(n, p2);
    if r.is_multiple_of(p) {
        return 0;
    }
    (pow_mod(r, p - 1, p2) + p2 - 1) % p2 / p
}

/// Odd primes in `lo..=hi`.
pub fn odd_primes_between(lo: u64, hi: u64) -> Vec<u64> {
    (lo.max(3)..=hi)
        .filter(|&n| n % 2 == 1 && is_prime(n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_is_prime(n: u64) -> bool {
        n >= 2
            && (2..)
                .take_while(|d| d * d <= n)
                .all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn primality_small_cases() {
        assert!(is_prime(2));
        assert!(!is_prime(1));
        assert!(!is_prime(0));
        assert!(is_prime(10007));
        for n in 0..20_000 {
            assert_eq!(is_prime(n), trial_is_prime(n), "n = {n}");
        }
        // strong pseudoprime to bases 2..=37 is above 2^64; check a few known composites
        assert!(!is_prime(3_215_031_751));
        assert!(!is_prime(341_550_071_728_321));
        assert!(is_prime((1 << 61) - 1));
    }

    #[test]
    fn factorization_examples() {
        assert_eq!(factorize(12).unwrap().factors(), &[(2, 2), (3, 1)]);
        assert_eq!(factorize(10006).unwrap().factors(), &[(2, 1), (5003, 1)]);
        assert!(factorize(1).unwrap().factors().is_empty());
        assert!(matches!(factorize(0), Err(Error::OutOfRange(_))));
        // two primes above 10^6 multiply to an unfactorable cofactor
        let big = 1_000_003u64 * 1_000_033;
        assert!(matches!(factorize(big), Err(Error::TooLarge(_))));
        // but a prime cofactor above the trial bound is fine
        let f = factorize(2 * 1_000_000_007).unwrap();
        assert_eq!(f.factors(), &[(2, 1), (1_000_000_007, 1)]);
    }

    #[test]
    fn totient_examples() {
        assert_eq!(phi(10).unwrap(), 4);
        assert_eq!(phi(1).unwrap(), 1);
        assert_eq!(phi(10006).unwrap(), 5002);
        for n in 1..300u64 {
            let brute = (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64;
            assert_eq!(phi(n).unwrap(), brute);
        }
    }

    #[test]
    fn divisors_and_omega() {
        let f = factorize(360).unwrap();
        assert_eq!(f.omega(), 3);
        let brute: Vec<u64> = (1..=360).filter(|d| 360 % d == 0).collect();
        assert_eq!(f.divisors(), brute);
    }

    #[test]
    fn primitive_root_examples() {
        assert_eq!(find_primitive_root(11).unwrap(), 2);
        assert_eq!(find_primitive_root(7).unwrap(), 3);
        assert_eq!(find_primitive_root(3).unwrap(), 2);
        assert_eq!(find_primitive_root(9), Err(Error::NotPrime(9)));
        assert_eq!(find_primitive_root(2), Err(Error::NotPrime(2)));
    }

    #[test]
    fn primitive_roots_have_full_order() {
        for p in odd_primes_between(3, 2000) {
            let g = find_primitive_root(p).unwrap();
            assert_eq!(multiplicative_order(g, p).unwrap(), p - 1);
            let brute = (1..p).find(|&h| multiplicative_order(h, p).unwrap() == p - 1);
            assert_eq!(Some(g), brute);
        }
    }

    #[test]
    fn primitive_root_set_examples() {
        assert_eq!(primitive_root_set(7).unwrap().elements(), &[3, 5]);
        assert_eq!(primitive_root_set(5).unwrap().elements(), &[2, 3]);
        assert_eq!(primitive_root_set(3).unwrap().elements(), &[2]);
        for p in odd_primes_between(3, 600) {
            let set = primitive_root_set(p).unwrap();
            assert_eq!(set.len() as u64, phi(p - 1).unwrap());
            let brute: Vec<u64> = (1..p)
                .filter(|&a| multiplicative_order(a, p).unwrap() == p - 1)
                .collect();
            assert_eq!(set.elements(), brute.as_slice());
        }
    }

    #[test]
    fn index_table_examples() {
        let t = build_index_table(5).unwrap();
        assert_eq!(t.generator(), 2);
        let idx: Vec<_> = [1, 2, 4, 3].iter().map(|&n| t.index(n).unwrap()).collect();
        assert_eq!(idx, vec![0, 1, 2, 3]);
        let t = build_index_table(3).unwrap();
        assert_eq!((t.index(1), t.index(2)), (Some(0), Some(1)));
        let t = build_index_table(7).unwrap();
        assert_eq!(t.generator(), 3);
        assert_eq!(t.index(6), Some(3));
        assert_eq!(t.index(14), None);
        assert!(build_index_table(INDEX_TABLE_LIMIT + 15).is_err());
    }

    #[test]
    fn index_table_round_trip() {
        for p in odd_primes_between(3, 1500) {
            let t = build_index_table(p).unwrap();
            let mut seen = vec![false; (p - 1) as usize];
            for n in 1..p {
                let k = t.index(n).unwrap();
                assert_eq!(pow_mod(t.generator(), k, p), n);
                assert_eq!(t.power(k), n);
                assert!(!seen[k as usize]);
                seen[k as usize] = true;
            }
            assert_eq!(t.index(1), Some(0));
            assert_eq!(t.index(t.generator()), Some(1));
        }
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_symbol(3, 11), 1);
        assert_eq!(legendre_symbol(2, 11), -1);
        assert_eq!(legendre_symbol(22, 11), 0);
        assert_eq!(legendre_symbol(-1, 11), -1);
        assert_eq!(legendre_symbol(-1, 13), 1);
    }

    #[test]
    fn legendre_matches_square_enumeration() {
        for p in odd_primes_between(3, 500) {
            let mut square = vec![false; p as usize];
            for y in 1..p {
                square[(y * y % p) as usize] = true;
            }
            for n in 0..2 * p as i64 {
                let expected = match (n as u64 % p, square[(n as u64 % p) as usize]) {
                    (0, _) => 0,
                    (_, true) => 1,
                    (_, false) => -1,
                };
                assert_eq!(legendre_symbol(n, p), expected, "n = {n}, p = {p}");
            }
        }
    }

    #[test]
    fn fermat_quotient_examples() {
        assert_eq!(fermat_quotient(2, 3), 1);
        for p in odd_primes_between(3, 200) {
            assert_eq!(fermat_quotient(1, p), 0);
        }
        assert_eq!(fermat_quotient(10, 5), 0);
        // 2^6 = 64, (64 - 1)/7 = 9 ≡ 2 mod 7
        assert_eq!(fermat_quotient(2, 7), 2);
    }

    #[test]
    fn fermat_quotient_direct_arithmetic() {
        // exact (n^{p-1} - 1)/p in u128 for small p
        for p in [3u64, 5, 7, 11, 13] {
            for n in 1..(p * p) as i64 {
                if (n as u64).is_multiple_of(p) {
                    continue;
                }
                let big = (n as u128).pow((p - 1) as u32) - 1;
                assert_eq!(big % p as u128, 0);
                let expected = ((big / p as u128) % p as u128) as u64;
                assert_eq!(fermat_quotient(n, p), expected);
            }
        }
    }

    #[test]
    fn fermat_quotient_has_period_p_squared() {
        for p in odd_primes_between(3, 60) {
            let p2 = (p * p) as i64;
            for n in -p2..2 * p2 {
                assert_eq!(fermat_quotient(n + p2, p), fermat_quotient(n, p));
            }
        }
    }
}
