//! Square matrices over a maximal order (integer coordinates) and over the
//! rational quaternion algebra.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{det_bareiss, exact_root, Rational};
use crate::order::{MaximalOrder, OrdElt};
use crate::quaternion::{Quaternion, QuaternionAlgebra};

/// A `g x g` matrix with entries in the order, row-major, order coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OMatrix {
    pub g: usize,
    pub entries: Vec<OrdElt>,
}

impl OMatrix {
    pub fn zero(g: usize) -> Self {
        OMatrix { g, entries: vec![[0; 4]; g * g] }
    }

    pub fn identity(g: usize, order: &MaximalOrder) -> Self {
        let mut m = OMatrix::zero(g);
        for a in 0..g {
            m.entries[a * g + a] = order.one();
        }
        m
    }

    /// Matrix whose columns are the given vectors of `O^g` (each `4g` coords).
    pub fn from_columns(g: usize, cols: &[&[i64]]) -> Self {
        let mut m = OMatrix::zero(g);
        for (b, col) in cols.iter().enumerate() {
            for a in 0..g {
                m.entries[a * g + b] = [col[4 * a], col[4 * a + 1], col[4 * a + 2], col[4 * a + 3]];
            }
        }
        m
    }

    pub fn get(&self, a: usize, b: usize) -> &OrdElt {
        &self.entries[a * self.g + b]
    }

    pub fn column(&self, b: usize) -> Vec<i64> {
        (0..self.g).flat_map(|a| self.get(a, b).to_vec()).collect()
    }

    pub fn mul(&self, other: &OMatrix, order: &MaximalOrder) -> OMatrix {
        let g = self.g;
        let mut out = OMatrix::zero(g);
        for a in 0..g {
            for b in 0..g {
                let mut acc = [0i64; 4];
                for c in 0..g {
                    let t = order.mul(self.get(a, c), other.get(c, b));
                    for s in 0..4 {
                        acc[s] += t[s];
                    }
                }
                out.entries[a * g + b] = acc;
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self, order: &MaximalOrder) -> OMatrix {
        let g = self.g;
        let mut out = OMatrix::zero(g);
        for a in 0..g {
            for b in 0..g {
                out.entries[b * g + a] = order.conj(self.get(a, b));
            }
        }
        out
    }

    pub fn to_qmatrix(&self, order: &MaximalOrder) -> QMatrix {
        QMatrix { g: self.g, entries: self.entries.iter().map(|x| order.element(x)).collect() }
    }

    /// Reduced norm `Nrd(M)`, the square root of the determinant of the
    /// rational regular representation.
    pub fn reduced_norm(&self, order: &MaximalOrder) -> Rational {
        self.to_qmatrix(order).reduced_norm(order.algebra())
    }

    /// The `4g x 4g` integer matrix of `v -> M v` on order coordinates of
    /// `O^g` (acting on column vectors).
    pub fn coordinate_action(&self, order: &MaximalOrder) -> Vec<Vec<i64>> {
        let g = self.g;
        let n = 4 * g;
        let mut out = vec![vec![0i64; n]; n];
        for b in 0..g {
            for s in 0..4 {
                // image of basis vector (b, s)
                let mut e = [0i64; 4];
                e[s] = 1;
                for a in 0..g {
                    let y = order.mul(self.get(a, b), &e);
                    for t in 0..4 {
                        out[4 * a + t][4 * b + s] = y[t];
                    }
                }
            }
        }
        out
    }
}

/// A `g x g` matrix over the rational quaternion algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QMatrix {
    pub g: usize,
    pub entries: Vec<Quaternion>,
}

impl QMatrix {
    pub fn zero(g: usize) -> Self {
        QMatrix { g, entries: vec![Quaternion::zero(); g * g] }
    }

    pub fn identity(g: usize) -> Self {
        let mut m = QMatrix::zero(g);
        for a in 0..g {
            m.entries[a * g + a] = Quaternion::one();
        }
        m
    }

    pub fn get(&self, a: usize, b: usize) -> &Quaternion {
        &self.entries[a * self.g + b]
    }

    pub fn set(&mut self, a: usize, b: usize, x: Quaternion) {
        self.entries[a * self.g + b] = x;
    }

    pub fn mul(&self, other: &QMatrix, h: &QuaternionAlgebra) -> QMatrix {
        let g = self.g;
        let mut out = QMatrix::zero(g);
        for a in 0..g {
            for b in 0..g {
                let mut acc = Quaternion::zero();
                for c in 0..g {
                    acc = acc.add(&h.mul(self.get(a, c), other.get(c, b)));
                }
                out.set(a, b, acc);
            }
        }
        out
    }

    pub fn dagger(&self) -> QMatrix {
        let g = self.g;
        let mut out = QMatrix::zero(g);
        for a in 0..g {
            for b in 0..g {
                out.set(b, a, self.get(a, b).conj());
            }
        }
        out
    }

    pub fn scale(&self, s: Rational) -> QMatrix {
        QMatrix { g: self.g, entries: self.entries.iter().map(|x| x.scale(s)).collect() }
    }

    /// The `4g x 4g` rational matrix of left multiplication `v -> M v` on
    /// `H^g`, standard basis.
    pub fn regular_representation(&self, h: &QuaternionAlgebra) -> Vec<Vec<Rational>> {
        let g = self.g;
        let n = 4 * g;
        let mut out = vec![vec![Rational::zero(); n]; n];
        for b in 0..g {
            for s in 0..4 {
                let mut e = [Rational::zero(); 4];
                e[s] = Rational::from_integer(1);
                let e = Quaternion::new(e);
                for a in 0..g {
                    let y = h.mul(self.get(a, b), &e);
                    for t in 0..4 {
                        out[4 * a + t][4 * b + s] = y.c[t];
                    }
                }
            }
        }
        out
    }

    /// Determinant of the regular representation (`= Nrd(M)^2`).
    pub fn regular_determinant(&self, h: &QuaternionAlgebra) -> Rational {
        let rep = self.regular_representation(h);
        let den = rep.iter().flatten().fold(1i128, |acc, x| num_integer::lcm(acc, *x.denom()));
        let ints: Vec<Vec<i128>> =
            rep.iter().map(|r| r.iter().map(|x| *(x * Rational::from_integer(den)).numer()).collect()).collect();
        let n = ints.len() as u32;
        Rational::new(det_bareiss(&ints), den.pow(n))
    }

    pub fn reduced_norm(&self, h: &QuaternionAlgebra) -> Rational {
        let d = self.regular_determinant(h);
        let (n, den) = (*d.numer(), *d.denom());
        let rn = exact_root(n, 2).expect("regular determinant is a square");
        let rd = exact_root(den, 2).expect("regular determinant is a square");
        Rational::new(rn, rd)
    }

    /// Two-sided inverse by Gauss-Jordan over the skew field.
    pub fn inverse(&self, h: &QuaternionAlgebra) -> Option<QMatrix> {
        let g = self.g;
        let mut a = self.clone();
        let mut inv = QMatrix::identity(g);
        for col in 0..g {
            let piv = (col..g).find(|&r| !a.get(r, col).is_zero())?;
            if piv != col {
                for c in 0..g {
                    a.entries.swap(piv * g + c, col * g + c);
                    inv.entries.swap(piv * g + c, col * g + c);
                }
            }
            let pinv = h.inverse(a.get(col, col))?;
            // left-multiply the pivot row by pinv
            for c in 0..g {
                let x = h.mul(&pinv, a.get(col, c));
                a.set(col, c, x);
                let y = h.mul(&pinv, inv.get(col, c));
                inv.set(col, c, y);
            }
            for r in 0..g {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let f = *a.get(r, col);
                for c in 0..g {
                    let x = a.get(r, c).sub(&h.mul(&f, a.get(col, c)));
                    a.set(r, c, x);
                    let y = inv.get(r, c).sub(&h.mul(&f, inv.get(col, c)));
                    inv.set(r, c, y);
                }
            }
        }
        Some(inv)
    }

    pub fn to_omatrix(&self, order: &MaximalOrder) -> Option<OMatrix> {
        let entries = self.entries.iter().map(|x| order.coords(x)).collect::<Option<Vec<_>>>()?;
        Some(OMatrix { g: self.g, entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::maximal_order;
    use crate::quaternion::algebra_for_prime;

    #[test]
    fn reduced_norm_of_scalar_quaternion() {
        let h = algebra_for_prime(7).unwrap();
        let o = maximal_order(&h).unwrap();
        let m = OMatrix { g: 1, entries: vec![[1, 1, 1, 0]] };
        let x = o.element(&m.entries[0]);
        assert_eq!(m.reduced_norm(&o), h.nrd(&x));
    }

    #[test]
    fn inverse_roundtrip() {
        let h = algebra_for_prime(11).unwrap();
        let o = maximal_order(&h).unwrap();
        let m = OMatrix { g: 2, entries: vec![[1, 1, 0, 0], [0, 1, 1, 0], [2, 0, 0, 1], [1, 0, 0, 0]] };
        let q = m.to_qmatrix(&o);
        let inv = q.inverse(&h).unwrap();
        assert_eq!(q.mul(&inv, &h), QMatrix::identity(2));
        assert_eq!(inv.mul(&q, &h), QMatrix::identity(2));
    }

    #[test]
    fn coordinate_action_matches_matrix_product() {
        let h = algebra_for_prime(5).unwrap();
        let o = maximal_order(&h).unwrap();
        let m = OMatrix { g: 2, entries: vec![[1, 2, 0, 0], [0, 1, -1, 0], [0, 0, 0, 1], [3, 0, 1, 0]] };
        let v = OMatrix::from_columns(2, &[&[1, 0, 2, -1, 0, 1, 1, 0], &[0; 8]]);
        let direct = m.mul(&v, &o).column(0);
        let act = m.coordinate_action(&o);
        let col = v.column(0);
        let via: Vec<i64> = act.iter().map(|r| r.iter().zip(&col).map(|(a, b)| a * b).sum()).collect();
        assert_eq!(direct, via);
    }
}
