use serde::{Deserialize, Serialize};

use super::{inv_mod_prime, mul_mod, reduce};
use crate::error::{Error, Result};

/// Integer polynomial, coefficients lowest degree first.
///
/// Serializes as a bare coefficient array, e.g. `[1, 0, 1]` for `x² + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly(Vec<i64>);

impl Poly {
    pub fn new(coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyPolynomial);
        }
        Ok(Poly(coeffs))
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Poly(vec![0, 1])
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    /// Coefficients reduced into `0..m` with trailing zeros stripped.
    pub fn reduced(&self, m: u64) -> Vec<u64> {
        let mut c: Vec<u64> = self.0.iter().map(|&a| reduce(a, m)).collect();
        while c.last() == Some(&0) {
            c.pop();
        }
        c
    }

    /// Degree over `Z_m`; `None` for the zero polynomial.
    pub fn degree_mod(&self, m: u64) -> Option<usize> {
        self.reduced(m).len().checked_sub(1)
    }

    /// Horner evaluation of `f(x) mod m`.
    pub fn eval(&self, x: u64, m: u64) -> u64 {
        let x = x % m;
        self.0
            .iter()
            .rev()
            .fold(0, |acc, &c| (mul_mod(acc, x, m) + reduce(c, m)) % m)
    }

    /// Number of `n ∈ Z_p` with `f(n) ≡ 0`, by exhaustive evaluation.
    pub fn count_roots(&self, p: u64) -> u64 {
        (0..p).filter(|&n| self.eval(n, p) == 0).count() as u64
    }

    /// True when `gcd(f, f′)` is a nonzero constant over `Z_p`.
    ///
    /// Over a prime field this is exactly "no repeated root in the algebraic
    /// closure"; when `f′ = 0` the polynomial is a `p`-th power.
    pub fn is_squarefree_mod(&self, p: u64) -> bool {
        let f = self.reduced(p);
        if f.is_empty() {
            return false;
        }
        let df: Vec<u64> = f
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| mul_mod(c, i as u64 % p, p))
            .collect();
        let g = poly_gcd(f, trim(df), p);
        g.len() == 1
    }
}

fn trim(mut c: Vec<u64>) -> Vec<u64> {
    while c.last() == Some(&0) {
        c.pop();
    }
    c
}

fn poly_rem(mut a: Vec<u64>, b: &[u64], p: u64) -> Vec<u64> {
    let lead_inv = inv_mod_prime(*b.last().expect("nonzero divisor"), p).expect("unit lead");
    while a.len() >= b.len() {
        let shift = a.len() - b.len();
        let factor = mul_mod(*a.last().unwrap(), lead_inv, p);
        for (i, &c) in b.iter().enumerate() {
            let sub = mul_mod(factor, c, p);
            a[shift + i] = (a[shift + i] + p - sub) % p;
        }
        a = trim(a);
    }
    a
}

fn poly_gcd(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
    while !b.is_empty() {
        let r = poly_rem(a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Horner evaluation of the coefficient list (lowest degree first) at `x`.
pub fn poly_eval_mod(coeffs: &[i64], x: u64, modulus: u64) -> Result<u64> {
    if coeffs.is_empty() {
        return Err(Error::EmptyPolynomial);
    }
    if modulus == 0 {
        return Err(Error::ZeroModulus);
    }
    Ok(Poly(coeffs.to_vec()).eval(x, modulus))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(poly_eval_mod(&[0, 1], 9, 11).unwrap(), 9);
        assert_eq!(poly_eval_mod(&[1, 0, 1], 3, 7).unwrap(), 3);
        assert_eq!(poly_eval_mod(&[5, 2], 0, 13).unwrap(), 5);
        assert_eq!(poly_eval_mod(&[-3, 1], 1, 7).unwrap(), 5);
        assert_eq!(poly_eval_mod(&[], 1, 7), Err(Error::EmptyPolynomial));
    }

    #[test]
    fn degree_ignores_vanishing_leading_terms() {
        let f = Poly::new(vec![1, 2, 7]).unwrap();
        assert_eq!(f.degree_mod(7), Some(1));
        assert_eq!(f.degree_mod(11), Some(2));
        assert_eq!(Poly::new(vec![7, 14]).unwrap().degree_mod(7), None);
    }

    #[test]
    fn squarefree_detection() {
        let p = 13;
        assert!(Poly::x().is_squarefree_mod(p));
        assert!(Poly::new(vec![1, 0, 1]).unwrap().is_squarefree_mod(p));
        // (x - 1)^2 = x^2 - 2x + 1
        assert!(!Poly::new(vec![1, -2, 1]).unwrap().is_squarefree_mod(p));
        // x^3 (x + 2)
        assert!(!Poly::new(vec![0, 0, 0, 2, 1]).unwrap().is_squarefree_mod(p));
        // x^p is a p-th power: derivative vanishes
        let mut c = vec![0i64; 6];
        c[5] = 1;
        assert!(!Poly::new(c).unwrap().is_squarefree_mod(5));
        // x^p - x has distinct roots
        assert!(Poly::new(vec![0, -1, 0, 0, 0, 1])
            .unwrap()
            .is_squarefree_mod(5));
    }

    #[test]
    fn squarefree_agrees_with_root_multiplicity_for_split_polynomials() {
        // product of linear factors (x - a_i); squarefree iff the a_i are distinct
        let p = 11u64;
        for roots in [[1i64, 2, 3], [1, 1, 4], [0, 5, 5], [2, 7, 9]] {
            let mut c = vec![1i64];
            for &a in &roots {
                let mut next = vec![0i64; c.len() + 1];
                for (i, &ci) in c.iter().enumerate() {
                    next[i + 1] += ci;
                    next[i] -= a * ci;
                }
                c = next;
            }
            let distinct = roots[0] != roots[1] && roots[1] != roots[2] && roots[0] != roots[2];
            assert_eq!(Poly::new(c).unwrap().is_squarefree_mod(p), distinct);
        }
    }

    #[test]
    fn root_count() {
        assert_eq!(Poly::new(vec![-1, 0, 1]).unwrap().count_roots(7), 2);
        assert_eq!(Poly::new(vec![1, 0, 1]).unwrap().count_roots(7), 0);
        assert_eq!(Poly::new(vec![1, 0, 1]).unwrap().count_roots(13), 2);
    }
}
