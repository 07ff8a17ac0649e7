//! Maximal orders of `H_p`, represented by an integral basis.
//!
//! Elements of the order are carried as integer coordinate vectors in the
//! order basis (`OrdElt`). For fast products we also keep every basis element
//! as an integer numerator over a common denominator `D` in the standard
//! basis `1, i, j, k`.

use num_traits::Zero;

use crate::arith::{det_bareiss, Rational};
use crate::error::{Error, Result};
use crate::quaternion::{algebra_for_prime, auxiliary_prime, rational_to_int, Quaternion, QuaternionAlgebra};

/// Coordinates of an order element in the order basis.
pub type OrdElt = [i64; 4];

/// Numerators in the standard basis, over the order's common denominator.
pub type Num = [i64; 4];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaximalOrder {
    algebra: QuaternionAlgebra,
    basis: [Quaternion; 4],
    den: i64,
    num: [Num; 4],
    /// rows of the inverse of `num`, scaled by `inv_den`
    inv: [[i128; 4]; 4],
    inv_den: i128,
    /// `mult[r][s]` = order coordinates of `basis[r] * basis[s]`
    mult: [[OrdElt; 4]; 4],
    /// `trd(basis[r] * conj(basis[s]))`
    trace_gram: [[i64; 4]; 4],
}

/// Integer quaternion product on numerator vectors (no rescaling).
#[inline]
pub fn num_mul(a: i64, b: i64, x: &Num, y: &Num) -> Num {
    let [x0, x1, x2, x3] = *x;
    let [y0, y1, y2, y3] = *y;
    [
        x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
        x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
        x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
        x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
    ]
}

#[inline]
pub fn num_conj(x: &Num) -> Num {
    [x[0], -x[1], -x[2], -x[3]]
}

impl MaximalOrder {
    /// Builds the order spanned by `basis`, checking that it is a ring
    /// containing 1 with reduced discriminant `p`.
    pub fn from_basis(algebra: QuaternionAlgebra, basis: [Quaternion; 4]) -> Result<Self> {
        let den = basis.iter().fold(1i128, |acc, b| num_integer::lcm(acc, b.denominator()));
        let num: [Num; 4] =
            std::array::from_fn(|r| std::array::from_fn(|t| rational_to_int(basis[r].c[t] * den).unwrap() as i64));
        let mat: Vec<Vec<i128>> = num.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let det = det_bareiss(&mat);
        if det == 0 {
            return Err(Error::InvalidArgument("order basis is degenerate".into()));
        }
        // adjugate-based inverse: inv = adj(num) / det
        let mut inv = [[0i128; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                let minor: Vec<Vec<i128>> = (0..4)
                    .filter(|&i| i != c)
                    .map(|i| (0..4).filter(|&j| j != r).map(|j| mat[i][j]).collect())
                    .collect();
                let sign = if (r + c) % 2 == 0 { 1 } else { -1 };
                inv[r][c] = sign * det_bareiss(&minor);
            }
        }
        let mut order = MaximalOrder {
            algebra,
            basis,
            den: den as i64,
            num,
            inv,
            inv_den: det,
            mult: [[[0; 4]; 4]; 4],
            trace_gram: [[0; 4]; 4],
        };
        if order.coords(&Quaternion::one()).is_none() {
            return Err(Error::InvalidArgument("order does not contain 1".into()));
        }
        for r in 0..4 {
            for s in 0..4 {
                let prod = algebra.mul(&basis[r], &basis[s]);
                order.mult[r][s] = order
                    .coords(&prod)
                    .ok_or_else(|| Error::InvalidArgument("basis is not closed under multiplication".into()))?;
                let t = algebra.trace_pairing(&basis[r], &basis[s]);
                order.trace_gram[r][s] = rational_to_int(t)
                    .ok_or_else(|| Error::InvalidArgument("non-integral reduced trace".into()))?
                    as i64;
            }
        }
        let disc = order.discriminant_abs();
        if disc != (algebra.p as i128) * (algebra.p as i128) {
            return Err(Error::InvalidArgument(format!(
                "trace-form determinant {disc} differs from p^2 = {}",
                algebra.p * algebra.p
            )));
        }
        Ok(order)
    }

    pub fn algebra(&self) -> &QuaternionAlgebra {
        &self.algebra
    }

    pub fn p(&self) -> i64 {
        self.algebra.p
    }

    pub fn basis(&self) -> &[Quaternion; 4] {
        &self.basis
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn basis_num(&self) -> &[Num; 4] {
        &self.num
    }

    /// `|det(trd(b_r conj(b_s)))|`; equals `p^2` for a maximal order of `H_p`.
    pub fn discriminant_abs(&self) -> i128 {
        let m: Vec<Vec<i128>> = self.trace_gram.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        det_bareiss(&m).abs()
    }

    pub fn trace_gram(&self) -> &[[i64; 4]; 4] {
        &self.trace_gram
    }

    pub fn element(&self, x: &OrdElt) -> Quaternion {
        Quaternion::from_scaled(self.to_num(x), self.den)
    }

    /// Order coordinates of `x`, or `None` if `x` is not in the order.
    pub fn coords(&self, x: &Quaternion) -> Option<OrdElt> {
        let r = self.rational_coords(x);
        let mut out = [0i64; 4];
        for c in 0..4 {
            out[c] = rational_to_int(r[c])? as i64;
        }
        Some(out)
    }

    #[inline]
    pub fn to_num(&self, x: &OrdElt) -> Num {
        let mut out = [0i64; 4];
        for r in 0..4 {
            if x[r] != 0 {
                for t in 0..4 {
                    out[t] += x[r] * self.num[r][t];
                }
            }
        }
        out
    }

    /// Order coordinates from numerators over `den`; `None` if non-integral.
    pub fn from_num(&self, n: &Num) -> Option<OrdElt> {
        let mut out = [0i64; 4];
        for c in 0..4 {
            let mut acc = 0i128;
            for t in 0..4 {
                acc += n[t] as i128 * self.inv[t][c];
            }
            if acc % self.inv_den != 0 {
                return None;
            }
            out[c] = (acc / self.inv_den) as i64;
        }
        Some(out)
    }

    pub fn mul(&self, x: &OrdElt, y: &OrdElt) -> OrdElt {
        let mut out = [0i64; 4];
        for r in 0..4 {
            if x[r] == 0 {
                continue;
            }
            for s in 0..4 {
                if y[s] == 0 {
                    continue;
                }
                let c = x[r] * y[s];
                for t in 0..4 {
                    out[t] += c * self.mult[r][s][t];
                }
            }
        }
        out
    }

    /// Matrix of `y -> x y` on order coordinates: `L[t][s]` is coordinate `t`
    /// of `x * basis[s]`.
    pub fn left_mul_matrix(&self, x: &OrdElt) -> [[i64; 4]; 4] {
        let mut out = [[0i64; 4]; 4];
        for r in 0..4 {
            if x[r] == 0 {
                continue;
            }
            for s in 0..4 {
                for t in 0..4 {
                    out[t][s] += x[r] * self.mult[r][s][t];
                }
            }
        }
        out
    }

    /// Rational coordinates in the order basis of an arbitrary element.
    pub fn rational_coords(&self, x: &Quaternion) -> [Rational; 4] {
        let d = Rational::from_integer(self.den as i128);
        let n: [Rational; 4] = std::array::from_fn(|t| x.c[t] * d);
        std::array::from_fn(|c| {
            let mut acc = Rational::zero();
            for t in 0..4 {
                acc += n[t] * Rational::from_integer(self.inv[t][c]);
            }
            acc / Rational::from_integer(self.inv_den)
        })
    }

    pub fn conj(&self, x: &OrdElt) -> OrdElt {
        self.from_num(&num_conj(&self.to_num(x))).expect("orders are closed under conjugation")
    }

    pub fn nrd(&self, x: &OrdElt) -> i64 {
        let mut acc = 0;
        for r in 0..4 {
            for s in 0..4 {
                acc += x[r] * x[s] * self.trace_gram[r][s];
            }
        }
        acc / 2
    }

    pub fn trd(&self, x: &OrdElt) -> i64 {
        2 * self.to_num(x)[0] / self.den
    }

    pub fn one(&self) -> OrdElt {
        self.coords(&Quaternion::one()).unwrap()
    }

    /// The units of the order (elements of reduced norm 1).
    pub fn units(&self) -> Vec<OrdElt> {
        let lat = crate::lattice::QuadraticLattice::from_gram_i64(self.trace_gram.iter().map(|r| r.to_vec()).collect());
        lat.vectors_of_norm(1).into_iter().map(|v| [v[0], v[1], v[2], v[3]]).collect()
    }
}

/// An explicit maximal order of the algebra produced by [`algebra_for_prime`].
pub fn maximal_order(algebra: &QuaternionAlgebra) -> Result<MaximalOrder> {
    let p = algebra.p;
    let half = |n: [i128; 4], d: i128| Quaternion::new(n.map(|x| Rational::new(x, d)));
    let basis = if p == 2 {
        [half([1, 0, 0, 0], 1), half([0, 1, 0, 0], 1), half([0, 0, 1, 0], 1), half([1, 1, 1, 1], 2)]
    } else if p % 4 == 3 {
        [half([1, 0, 0, 0], 1), half([0, 1, 0, 0], 1), half([1, 0, 1, 0], 2), half([0, 1, 0, 1], 2)]
    } else if p % 8 == 5 {
        [half([1, 0, 1, 1], 2), half([0, 1, 2, 1], 4), half([0, 0, 1, 0], 1), half([0, 0, 0, 1], 1)]
    } else {
        // i^2 = -q, j^2 = -p; c with q | p c^2 + 1
        let q = auxiliary_prime(p) as i128;
        let c = (0..q).find(|&c| (p as i128 * c * c + 1) % q == 0).expect("c exists");
        [half([1, 1, 0, 0], 2), half([0, 0, 1, -1], 2), half([0, 1, 0, -c], q), half([0, 0, 0, 1], 1)]
    };
    if *algebra != algebra_for_prime(p)? {
        return Err(Error::InvalidArgument("algebra was not produced by algebra_for_prime".into()));
    }
    MaximalOrder::from_basis(*algebra, basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_up_to;

    #[test]
    fn hurwitz_order() {
        let h = algebra_for_prime(2).unwrap();
        let o = maximal_order(&h).unwrap();
        assert!(o.coords(&Quaternion::new([Rational::new(1, 2); 4])).is_some());
        assert_eq!(o.discriminant_abs(), 4);
        assert_eq!(o.units().len(), 24);
    }

    #[test]
    fn maximal_orders_for_many_primes() {
        for p in primes_up_to(300) {
            let h = algebra_for_prime(p as i64).unwrap();
            let o = maximal_order(&h).unwrap_or_else(|e| panic!("p = {p}: {e}"));
            assert_eq!(o.discriminant_abs(), (p * p) as i128);
            // closure: products of basis elements have integral coordinates
            for r in 0..4 {
                for s in 0..4 {
                    let prod = h.mul(&o.basis()[r], &o.basis()[s]);
                    assert!(o.coords(&prod).is_some());
                }
            }
        }
    }

    #[test]
    fn p7_discriminant() {
        let h = algebra_for_prime(7).unwrap();
        let o = maximal_order(&h).unwrap();
        assert_eq!(o.discriminant_abs(), 49);
        assert_eq!(o.units().len(), 4);
    }

    #[test]
    fn coordinate_arithmetic_agrees_with_rationals() {
        let h = algebra_for_prime(11).unwrap();
        let o = maximal_order(&h).unwrap();
        let x = [1, -2, 3, 1];
        let y = [0, 1, -1, 2];
        let prod = o.mul(&x, &y);
        assert_eq!(o.element(&prod), h.mul(&o.element(&x), &o.element(&y)));
        assert_eq!(Rational::from_integer(o.nrd(&x) as i128), h.nrd(&o.element(&x)));
        assert_eq!(o.element(&o.conj(&x)), o.element(&x).conj());
    }
}
