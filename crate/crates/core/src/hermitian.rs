//! Positive-definite hermitian matrices over a maximal order.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{exact_root, Rational};
use crate::error::{Error, Result};
use crate::lattice::QuadraticLattice;
use crate::matrix::{OMatrix, QMatrix};
use crate::order::{num_conj, num_mul, MaximalOrder, OrdElt};
use crate::quaternion::{rational_to_int, Quaternion};

/// A hermitian `g x g` matrix `H = H^dagger` with entries in the order, stored
/// row-major in order coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HermitianForm {
    pub g: usize,
    pub entries: Vec<OrdElt>,
}

impl HermitianForm {
    /// Validates the hermitian symmetry and integral diagonal.
    pub fn new(g: usize, entries: Vec<OrdElt>, order: &MaximalOrder) -> Result<Self> {
        if g == 0 || entries.len() != g * g {
            return Err(Error::InvalidArgument(format!("expected {} entries", g * g)));
        }
        let h = HermitianForm { g, entries };
        for a in 0..g {
            for b in 0..g {
                if order.conj(h.get(a, b)) != *h.get(b, a) {
                    return Err(Error::InvalidArgument(format!("entry ({b},{a}) is not conj of ({a},{b})")));
                }
            }
            let x = order.element(h.get(a, a));
            if x.c[1..].iter().any(|c| !c.is_zero()) || !x.c[0].is_integer() {
                return Err(Error::InvalidArgument(format!("diagonal entry {a} is not a rational integer")));
            }
        }
        Ok(h)
    }

    pub fn identity(g: usize, order: &MaximalOrder) -> Self {
        HermitianForm { g, entries: OMatrix::identity(g, order).entries }
    }

    pub fn scalar(d: i64, order: &MaximalOrder) -> Self {
        let one = order.one();
        HermitianForm { g: 1, entries: vec![one.map(|x| x * d)] }
    }

    pub fn get(&self, a: usize, b: usize) -> &OrdElt {
        &self.entries[a * self.g + b]
    }

    /// Integer value of diagonal entry `a`.
    pub fn diag(&self, a: usize, order: &MaximalOrder) -> i64 {
        let n = order.to_num(self.get(a, a));
        n[0] / order.den()
    }

    pub fn as_omatrix(&self) -> OMatrix {
        OMatrix { g: self.g, entries: self.entries.clone() }
    }

    pub fn to_qmatrix(&self, order: &MaximalOrder) -> QMatrix {
        self.as_omatrix().to_qmatrix(order)
    }

    /// The rank-`4g` lattice `O^g` with bilinear form `B(u, v) = trd(u^dagger H v)`
    /// in the order basis; its quadratic form is `Q(v) = v^dagger H v`.
    pub fn trace_gram(&self, order: &MaximalOrder) -> QuadraticLattice {
        let g = self.g;
        let (a, b, d) = (order.algebra().a, order.algebra().b, order.den());
        let basis = order.basis_num();
        let n = 4 * g;
        let mut gram = vec![vec![0i64; n]; n];
        for ra in 0..g {
            for cb in 0..g {
                let hn = order.to_num(self.get(ra, cb));
                for r in 0..4 {
                    let left = num_mul(a, b, &num_conj(&basis[r]), &hn);
                    for s in 0..4 {
                        let prod = num_mul(a, b, &left, &basis[s]);
                        // trd = 2 * prod[0] / d^3
                        let t = 2 * prod[0];
                        debug_assert_eq!(t % (d * d * d), 0);
                        gram[4 * ra + r][4 * cb + s] = t / (d * d * d);
                    }
                }
            }
        }
        QuadraticLattice::from_gram_i64(gram)
    }

    /// `v^dagger H v` for `v` in `O^g` given by `4g` order coordinates.
    pub fn evaluate(&self, v: &[i64], order: &MaximalOrder) -> i128 {
        self.trace_gram(order).raw_norm(v)
    }

    /// Determinant of the regular representation, `HNm(H)^4`.
    pub fn regular_determinant(&self, order: &MaximalOrder) -> Rational {
        self.to_qmatrix(order).regular_determinant(order.algebra())
    }

    /// The Moore determinant, by pivoting on the (1,1) entry and recursing on
    /// the Schur complement (rows and columns are permuted to find a nonzero
    /// diagonal pivot when needed).
    pub fn moore_determinant(&self, order: &MaximalOrder) -> Rational {
        moore(&self.to_qmatrix(order), order)
    }

    /// The Haupt norm: the nonnegative integer fourth root of the regular
    /// representation determinant, cross-checked against the Moore expansion.
    pub fn haupt_norm(&self, order: &MaximalOrder) -> Result<i128> {
        let det = self.regular_determinant(order);
        let root = rational_to_int(det)
            .and_then(|d| exact_root(d, 4))
            .ok_or_else(|| Error::HauptNorm(format!("regular determinant {det} is not a fourth power")))?;
        let moore = self.moore_determinant(order);
        if moore.abs() != Rational::from_integer(root) {
            return Err(Error::HauptNorm(format!("Moore determinant {moore} disagrees with |HNm| = {root}")));
        }
        Ok(root)
    }

    pub fn is_positive_definite(&self, order: &MaximalOrder) -> bool {
        self.trace_gram(order).is_positive_definite()
    }

    /// `U^dagger H U`.
    pub fn transform(&self, u: &OMatrix, order: &MaximalOrder) -> HermitianForm {
        let prod = u.dagger(order).mul(&self.as_omatrix(), order).mul(u, order);
        HermitianForm { g: self.g, entries: prod.entries }
    }

    /// The inverse matrix, if it has entries in the order.
    pub fn integral_inverse(&self, order: &MaximalOrder) -> Option<OMatrix> {
        self.to_qmatrix(order).inverse(order.algebra())?.to_omatrix(order)
    }
}

fn moore(m: &QMatrix, order: &MaximalOrder) -> Rational {
    let h = order.algebra();
    let g = m.g;
    if g == 0 {
        return Rational::from_integer(1);
    }
    if g == 1 {
        return m.get(0, 0).c[0];
    }
    let piv = match (0..g).find(|&i| !m.get(i, i).is_zero()) {
        Some(i) => i,
        None => {
            // all diagonal entries vanish: use a 2x2 block on an off-diagonal pair
            // [[0, b], [b*, 0]] has Moore determinant -nrd(b)
            if g == 2 {
                return -h.nrd(m.get(0, 1));
            }
            // shear row/col 0 by row/col j to create a nonzero diagonal
            let j = (1..g).find(|&j| !m.get(0, j).is_zero()).unwrap_or(1);
            let mut s = QMatrix::identity(g);
            s.set(j, 0, Quaternion::one());
            let sheared = s.dagger().mul(m, h).mul(&s, h);
            if sheared.get(0, 0).is_zero() {
                return Rational::zero();
            }
            return moore(&sheared, order);
        }
    };
    // move the pivot to position 0
    let perm: Vec<usize> = std::iter::once(piv).chain((0..g).filter(|&i| i != piv)).collect();
    let mut p = QMatrix::zero(g);
    for a in 0..g {
        for b in 0..g {
            p.set(a, b, *m.get(perm[a], perm[b]));
        }
    }
    let pivot = p.get(0, 0).c[0];
    let pinv = pivot.recip();
    let mut schur = QMatrix::zero(g - 1);
    for a in 1..g {
        for b in 1..g {
            // S = K - r^dagger a^{-1} r, with r the first row
            let corr = h.mul(p.get(a, 0), p.get(0, b)).scale(pinv);
            schur.set(a - 1, b - 1, p.get(a, b).sub(&corr));
        }
    }
    pivot * moore(&schur, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::maximal_order;
    use crate::quaternion::algebra_for_prime;

    fn setup(p: i64) -> MaximalOrder {
        maximal_order(&algebra_for_prime(p).unwrap()).unwrap()
    }

    fn form2(o: &MaximalOrder, a: i64, b: OrdElt, c: i64) -> HermitianForm {
        let one = o.one();
        HermitianForm::new(2, vec![one.map(|x| x * a), b, o.conj(&b), one.map(|x| x * c)], o).unwrap()
    }

    #[test]
    fn identity_and_scalar_norms() {
        let o = setup(7);
        for g in 1..=3 {
            assert_eq!(HermitianForm::identity(g, &o).haupt_norm(&o).unwrap(), 1);
        }
        assert_eq!(HermitianForm::scalar(5, &o).haupt_norm(&o).unwrap(), 5);
    }

    #[test]
    fn hurwitz_trace_gram_is_twice_norm_gram() {
        let o = setup(2);
        let lat = HermitianForm::identity(1, &o).trace_gram(&o);
        let expect: Vec<Vec<i64>> = o.trace_gram().iter().map(|r| r.to_vec()).collect();
        assert_eq!(lat.gram, expect);
        let lat3 = HermitianForm::scalar(3, &o).trace_gram(&o);
        for r in 0..4 {
            for s in 0..4 {
                assert_eq!(lat3.gram[r][s], 3 * expect[r][s]);
            }
        }
    }

    #[test]
    fn identity_gram_is_block_diagonal() {
        let o = setup(11);
        let one = HermitianForm::identity(1, &o).trace_gram(&o).gram;
        let two = HermitianForm::identity(2, &o).trace_gram(&o).gram;
        for r in 0..8 {
            for s in 0..8 {
                let expect = if r / 4 == s / 4 { one[r % 4][s % 4] } else { 0 };
                assert_eq!(two[r][s], expect);
            }
        }
    }

    #[test]
    fn moore_agrees_with_regular_representation_norm_5() {
        let o = setup(7);
        let lat = HermitianForm::identity(1, &o).trace_gram(&o);
        let bs = lat.vectors_of_norm(5);
        assert!(!bs.is_empty());
        for b in bs.iter().step_by(3) {
            let h = form2(&o, 2, [b[0], b[1], b[2], b[3]], 3);
            assert_eq!(h.moore_determinant(&o), Rational::from_integer(1));
            assert_eq!(h.haupt_norm(&o).unwrap(), 1);
            assert!(h.is_positive_definite(&o));
        }
    }

    #[test]
    fn indefinite_form_with_norm_7_offdiagonal() {
        let o = setup(7);
        let lat = HermitianForm::identity(1, &o).trace_gram(&o);
        let b = &lat.vectors_of_norm(7)[0];
        let h = form2(&o, 2, [b[0], b[1], b[2], b[3]], 3);
        assert_eq!(h.moore_determinant(&o), Rational::from_integer(-1));
        assert!(!h.is_positive_definite(&o));
        assert_eq!(h.haupt_norm(&o).unwrap(), 1);
    }

    #[test]
    fn negative_diagonal_is_not_positive_definite() {
        let o = setup(7);
        let one = o.one();
        let h = HermitianForm::new(2, vec![one, [0; 4], [0; 4], one.map(|x| -x)], &o).unwrap();
        assert!(!h.is_positive_definite(&o));
    }

    #[test]
    fn rejects_non_hermitian() {
        let o = setup(7);
        let one = o.one();
        assert!(HermitianForm::new(2, vec![one, [0, 1, 0, 0], [0, 1, 0, 0], one], &o).is_err());
    }

    #[test]
    fn unit_transform_preserves_norm() {
        let o = setup(11);
        let units = o.units();
        let h = HermitianForm::identity(2, &o);
        for u in &units {
            let m = OMatrix { g: 2, entries: vec![*u, [0; 4], [0; 4], o.one()] };
            let t = h.transform(&m, &o);
            assert_eq!(t.haupt_norm(&o).unwrap(), 1);
            assert!(t.is_positive_definite(&o));
        }
    }
}
