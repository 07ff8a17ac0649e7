//! Definite quaternion algebras `(a, b | Q)` and exact rational arithmetic in them.

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, legendre, prime_factors, Rational};
use crate::error::{Error, Result};

/// The algebra with basis `1, i, j, k`, `i^2 = a`, `j^2 = b`, `k = ij = -ji`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuaternionAlgebra {
    pub p: i64,
    pub a: i64,
    pub b: i64,
}

/// A place of Q: a finite prime or the real place.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Place {
    Finite(i64),
    Infinite,
}

/// Element `c[0] + c[1] i + c[2] j + c[3] k` with rational coefficients.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Quaternion {
    pub c: [Rational; 4],
}

impl fmt::Debug for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i + {}j + {}k)", self.c[0], self.c[1], self.c[2], self.c[3])
    }
}

impl Quaternion {
    pub fn new(c: [Rational; 4]) -> Self {
        Quaternion { c }
    }

    pub fn from_ints(c: [i128; 4]) -> Self {
        Quaternion { c: c.map(Rational::from_integer) }
    }

    /// `num / den` with integer numerators.
    pub fn from_scaled(num: [i64; 4], den: i64) -> Self {
        Quaternion { c: num.map(|x| Rational::new(x as i128, den as i128)) }
    }

    pub fn scalar(x: Rational) -> Self {
        let mut c = [Rational::zero(); 4];
        c[0] = x;
        Quaternion { c }
    }

    pub fn zero() -> Self {
        Quaternion::default()
    }

    pub fn one() -> Self {
        Quaternion::scalar(Rational::from_integer(1))
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn conj(&self) -> Self {
        Quaternion { c: [self.c[0], -self.c[1], -self.c[2], -self.c[3]] }
    }

    pub fn add(&self, o: &Self) -> Self {
        Quaternion { c: std::array::from_fn(|t| self.c[t] + o.c[t]) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Quaternion { c: std::array::from_fn(|t| self.c[t] - o.c[t]) }
    }

    pub fn neg(&self) -> Self {
        Quaternion { c: self.c.map(|x| -x) }
    }

    pub fn scale(&self, s: Rational) -> Self {
        Quaternion { c: self.c.map(|x| x * s) }
    }

    pub fn trd(&self) -> Rational {
        self.c[0] * 2
    }

    /// Least common denominator of the coefficients.
    pub fn denominator(&self) -> i128 {
        self.c.iter().fold(1i128, |acc, x| num_integer::lcm(acc, *x.denom()))
    }
}

impl QuaternionAlgebra {
    pub fn new(p: i64, a: i64, b: i64) -> Self {
        QuaternionAlgebra { p, a, b }
    }

    pub fn mul(&self, x: &Quaternion, y: &Quaternion) -> Quaternion {
        let (a, b) = (Rational::from_integer(self.a as i128), Rational::from_integer(self.b as i128));
        let [x0, x1, x2, x3] = x.c;
        let [y0, y1, y2, y3] = y.c;
        Quaternion {
            c: [
                x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
                x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
                x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
                x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
            ],
        }
    }

    pub fn nrd(&self, x: &Quaternion) -> Rational {
        let (a, b) = (Rational::from_integer(self.a as i128), Rational::from_integer(self.b as i128));
        let [x0, x1, x2, x3] = x.c;
        x0 * x0 - a * x1 * x1 - b * x2 * x2 + a * b * x3 * x3
    }

    pub fn inverse(&self, x: &Quaternion) -> Option<Quaternion> {
        let n = self.nrd(x);
        if n.is_zero() {
            return None;
        }
        Some(x.conj().scale(n.recip()))
    }

    /// `trd(x * conj(y))`, the bilinear form attached to twice the reduced norm.
    pub fn trace_pairing(&self, x: &Quaternion, y: &Quaternion) -> Rational {
        self.mul(x, &y.conj()).trd()
    }

    /// Is the algebra ramified at `place`?
    pub fn is_ramified_at(&self, place: Place) -> bool {
        hilbert_symbol(self.a as i128, self.b as i128, place) == -1
    }

    /// The finite ramified primes, found by testing every prime dividing `2ab`.
    pub fn ramified_primes(&self) -> Vec<i64> {
        let mut cands = prime_factors(2 * self.a as i128 * self.b as i128);
        cands.sort();
        cands.into_iter().map(|q| q as i64).filter(|&q| self.is_ramified_at(Place::Finite(q))).collect()
    }
}

/// The local Hilbert symbol `(a, b)_v` for nonzero integers `a`, `b`.
pub fn hilbert_symbol(a: i128, b: i128, place: Place) -> i32 {
    assert!(a != 0 && b != 0, "hilbert symbol of zero");
    let q = match place {
        Place::Infinite => return if a < 0 && b < 0 { -1 } else { 1 },
        Place::Finite(q) => q as i128,
    };
    let split = |mut x: i128| {
        let mut e = 0;
        while x % q == 0 {
            x /= q;
            e += 1;
        }
        (e, x)
    };
    let (alpha, u) = split(a);
    let (beta, v) = split(b);
    if q == 2 {
        let eps = |x: i128| ((x.rem_euclid(8) - 1) / 2) & 1;
        let omega = |x: i128| {
            let r = x.rem_euclid(8);
            ((r * r - 1) / 8) & 1
        };
        let e = eps(u) * eps(v) + alpha as i128 * omega(v) + beta as i128 * omega(u);
        if e % 2 == 0 {
            1
        } else {
            -1
        }
    } else {
        let mut s = if (alpha * beta) % 2 == 1 && (q - 1) / 2 % 2 == 1 { -1 } else { 1 };
        if beta % 2 == 1 {
            s *= legendre(u, q);
        }
        if alpha % 2 == 1 {
            s *= legendre(v, q);
        }
        s
    }
}

/// The definite algebra ramified exactly at `{p, infinity}`, with structure
/// constants from a fixed case table:
/// `p = 2: (-1,-1)`; `p = 3 mod 4: (-1,-p)`; `p = 5 mod 8: (-2,-p)`;
/// `p = 1 mod 8: (-q,-p)` for the least prime `q = 3 mod 4` that is a
/// non-residue mod `p`.
pub fn algebra_for_prime(p: i64) -> Result<QuaternionAlgebra> {
    if p < 2 || !is_prime(p as u64) {
        return Err(Error::NotPrime(p));
    }
    let (a, b) = if p == 2 {
        (-1, -1)
    } else if p % 4 == 3 {
        (-1, -p)
    } else if p % 8 == 5 {
        (-2, -p)
    } else {
        let q = auxiliary_prime(p);
        (-q, -p)
    };
    Ok(QuaternionAlgebra { p, a, b })
}

/// Least prime `q = 3 mod 4` with `(q/p) = -1`; used for `p = 1 mod 8`.
pub(crate) fn auxiliary_prime(p: i64) -> i64 {
    (3..)
        .step_by(4)
        .find(|&q| is_prime(q as u64) && legendre(q as i128, p as i128) == -1)
        .expect("a non-residue prime exists")
}

impl fmt::Display for QuaternionAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H_{} = ({}, {} | Q)", self.p, self.a, self.b)
    }
}

pub(crate) fn rational_to_int(x: Rational) -> Option<i128> {
    if x.is_integer() {
        Some(*x.numer())
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_up_to;

    fn q(c: [i128; 4]) -> Quaternion {
        Quaternion::from_ints(c)
    }

    #[test]
    fn defining_relations() {
        let h = algebra_for_prime(7).unwrap();
        let (i, j, k) = (q([0, 1, 0, 0]), q([0, 0, 1, 0]), q([0, 0, 0, 1]));
        assert_eq!(h.mul(&i, &j), k);
        assert_eq!(h.mul(&j, &i), k.neg());
        assert_eq!(h.mul(&i, &i), q([h.a as i128, 0, 0, 0]));
        assert_eq!(h.mul(&j, &j), q([h.b as i128, 0, 0, 0]));
        assert_eq!(h.mul(&k, &k), q([-(h.a as i128) * h.b as i128, 0, 0, 0]));
    }

    #[test]
    fn hamilton_norm_of_one_plus_ijk() {
        let h = algebra_for_prime(2).unwrap();
        assert_eq!((h.a, h.b), (-1, -1));
        let x = q([1, 1, 1, 1]);
        assert_eq!(h.mul(&x, &x.conj()), q([4, 0, 0, 0]));
        assert_eq!(h.nrd(&x), Rational::from_integer(4));
    }

    #[test]
    fn hilbert_symbols_of_hamilton() {
        assert_eq!(hilbert_symbol(-1, -1, Place::Finite(2)), -1);
        assert_eq!(hilbert_symbol(-1, -1, Place::Finite(5)), 1);
        assert_eq!(hilbert_symbol(-1, -1, Place::Infinite), -1);
    }

    #[test]
    fn rejects_composite() {
        assert!(matches!(algebra_for_prime(4), Err(Error::NotPrime(4))));
        assert!(algebra_for_prime(1).is_err());
    }

    #[test]
    fn ramification_is_exactly_p_and_infinity() {
        for p in primes_up_to(400) {
            let h = algebra_for_prime(p as i64).unwrap();
            assert!(h.a < 0 && h.b < 0);
            assert!(h.is_ramified_at(Place::Infinite));
            assert_eq!(h.ramified_primes(), vec![p as i64], "p = {p}");
            assert!(h.is_ramified_at(Place::Finite(p as i64)));
        }
    }

    #[test]
    fn p7_hilbert_symbols_at_all_relevant_primes() {
        let h = algebra_for_prime(7).unwrap();
        for q in [2, 3, 5, 7, 11, 13] {
            let expect = if q == 7 { -1 } else { 1 };
            assert_eq!(hilbert_symbol(h.a as i128, h.b as i128, Place::Finite(q)), expect, "q = {q}");
        }
    }

    #[test]
    fn product_formula_holds() {
        // Hilbert reciprocity: the number of ramified places is even.
        for (a, b) in [(-1, -3), (-2, -5), (3, -7), (-6, 10), (5, 7)] {
            let h = QuaternionAlgebra::new(0, a, b);
            let mut count = h.ramified_primes().len();
            if h.is_ramified_at(Place::Infinite) {
                count += 1;
            }
            assert_eq!(count % 2, 0, "({a},{b})");
        }
    }
}
