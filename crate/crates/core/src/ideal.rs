//! Integral right ideals of a maximal order.

use serde::{Deserialize, Serialize};

use crate::arith::{exact_root, hnf};
use crate::error::{Error, Result};
use crate::lattice::{Enumerator, QuadraticLattice};
use crate::order::{MaximalOrder, OrdElt};
use crate::quaternion::Quaternion;

/// A full-rank sublattice of the order, stored as a row-style HNF basis in
/// order coordinates, with its reduced norm `N(I) = sqrt([O : I])`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IdealLattice {
    pub basis: [OrdElt; 4],
    pub norm: i64,
}

impl IdealLattice {
    pub fn unit() -> Self {
        IdealLattice { basis: [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], norm: 1 }
    }

    /// The Z-span of `gens`; fails unless it has full rank and square index.
    pub fn from_generators(gens: &[OrdElt]) -> Result<Self> {
        let rows: Vec<Vec<i128>> = gens.iter().map(|g| g.iter().map(|&x| x as i128).collect()).collect();
        let h = hnf(&rows, 4);
        if h.len() != 4 {
            return Err(Error::InvalidArgument("generators do not span a full lattice".into()));
        }
        let index: i128 = (0..4).map(|i| h[i][i]).product();
        let norm =
            exact_root(index, 2).ok_or_else(|| Error::InvalidArgument(format!("index {index} is not a square")))?;
        let basis = std::array::from_fn(|r| std::array::from_fn(|c| h[r][c] as i64));
        Ok(IdealLattice { basis, norm: norm as i64 })
    }

    /// The principal right ideal `x O`.
    pub fn principal(order: &MaximalOrder, x: &OrdElt) -> Result<Self> {
        let gens: Vec<OrdElt> = (0..4).map(|s| order.mul(x, &unit_vec(s))).collect();
        Self::from_generators(&gens)
    }

    pub fn zbasis(&self, order: &MaximalOrder) -> [Quaternion; 4] {
        std::array::from_fn(|r| order.element(&self.basis[r]))
    }

    /// Coordinates of `y` in this basis, if `y` lies in the lattice.
    pub fn coords_of(&self, y: &OrdElt) -> Option<[i64; 4]> {
        let mut rest = *y;
        let mut out = [0i64; 4];
        for c in 0..4 {
            let piv = self.basis[c][c];
            if rest[c] % piv != 0 {
                return None;
            }
            let q = rest[c] / piv;
            out[c] = q;
            for t in c..4 {
                rest[t] -= q * self.basis[c][t];
            }
        }
        Some(out)
    }

    pub fn contains(&self, y: &OrdElt) -> bool {
        self.coords_of(y).is_some()
    }

    pub fn is_right_ideal(&self, order: &MaximalOrder) -> bool {
        self.basis.iter().all(|b| (0..4).all(|s| self.contains(&order.mul(b, &unit_vec(s)))))
    }

    /// The reduced-norm form on this basis: raw norm of `c` is `nrd(sum c_r b_r)`.
    pub fn norm_form(&self, order: &MaximalOrder) -> QuadraticLattice {
        let tg = order.trace_gram();
        let gram = (0..4)
            .map(|r| {
                (0..4)
                    .map(|s| {
                        let mut acc = 0i64;
                        for a in 0..4 {
                            for b in 0..4 {
                                acc += self.basis[r][a] * tg[a][b] * self.basis[s][b];
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        QuadraticLattice::from_gram_i64(gram)
    }

    /// Elements of norm exactly `t`, in order coordinates, sorted.
    pub fn elements_of_norm(&self, order: &MaximalOrder, t: i64) -> Vec<OrdElt> {
        let mut out: Vec<OrdElt> = self.norm_form(order).vectors_of_norm(t).iter().map(|c| self.combine(c)).collect();
        out.sort();
        out
    }

    fn combine(&self, c: &[i64]) -> OrdElt {
        let mut x = [0i64; 4];
        for r in 0..4 {
            for t in 0..4 {
                x[t] += c[r] * self.basis[r][t];
            }
        }
        x
    }

    /// `I conj(J)` as a lattice in the order (integral since both are).
    pub fn times_conj(&self, other: &IdealLattice, order: &MaximalOrder) -> IdealLattice {
        let mut gens = Vec::with_capacity(16);
        for x in &self.basis {
            for y in &other.basis {
                gens.push(order.mul(x, &order.conj(y)));
            }
        }
        let rows: Vec<Vec<i128>> = gens.iter().map(|g| g.iter().map(|&x| x as i128).collect()).collect();
        let h = hnf(&rows, 4);
        let basis = std::array::from_fn(|r| std::array::from_fn(|c| h[r][c] as i64));
        IdealLattice { basis, norm: self.norm * other.norm }
    }

    /// The left order `I conj(I) / N(I)`.
    pub fn left_order(&self, order: &MaximalOrder) -> Result<MaximalOrder> {
        let prod = self.times_conj(self, order);
        let scale = crate::arith::Rational::new(1, self.norm as i128);
        let basis = std::array::from_fn(|r| order.element(&prod.basis[r]).scale(scale));
        MaximalOrder::from_basis(*order.algebra(), basis)
    }

    /// Units of the left order, as elements `x` of `I conj(I)` with
    /// `nrd(x) = N(I)^2` (the unit is `x / N(I)`).
    pub fn left_unit_numerators(&self, order: &MaximalOrder) -> Vec<OrdElt> {
        self.times_conj(self, order).elements_of_norm(order, self.norm * self.norm)
    }

    pub fn unit_count(&self, order: &MaximalOrder) -> u64 {
        self.left_unit_numerators(order).len() as u64
    }

    /// `I = alpha J` for some alpha: `I conj(J)` has an element of norm `N(I) N(J)`.
    pub fn is_equivalent(&self, other: &IdealLattice, order: &MaximalOrder) -> bool {
        let prod = self.times_conj(other, order);
        let target = self.norm * other.norm;
        let mut found = false;
        Enumerator::new(&prod.norm_form(order).gram).for_each_upto(target, |_, n| found |= n == target);
        found
    }

    /// `#{x in I : nrd(x) = m N(I)}` for `m = 1..=terms`.
    pub fn theta_prefix(&self, order: &MaximalOrder, terms: usize) -> Vec<u64> {
        let mut counts = vec![0u64; terms];
        let n = self.norm;
        Enumerator::new(&self.norm_form(order).gram).for_each_upto(terms as i64 * n, |_, v| {
            if v % n == 0 {
                counts[(v / n) as usize - 1] += 1;
            }
        });
        counts
    }

    /// All right ideals `J` with `q I < J < I` and `[I : J] = q^2`.
    pub fn neighbors(&self, order: &MaximalOrder, q: i64) -> Result<Vec<IdealLattice>> {
        // right multiplication by basis element s, in coordinates of this basis, mod q
        let mut act = [[[0i64; 4]; 4]; 4];
        for s in 0..4 {
            for r in 0..4 {
                let y = order.mul(&self.basis[r], &unit_vec(s));
                let c = self.coords_of(&y).ok_or_else(|| Error::Internal("lattice is not a right ideal".into()))?;
                act[s][r] = c.map(|x| x.rem_euclid(q));
            }
        }
        let mut out = Vec::new();
        for w in planes(q) {
            let stable = (0..4).all(|s| {
                w.iter().all(|row| {
                    let mut img = [0i64; 4];
                    for r in 0..4 {
                        for t in 0..4 {
                            img[t] = (img[t] + row[r] * act[s][r][t]) % q;
                        }
                    }
                    in_plane(&w, &img, q)
                })
            });
            if !stable {
                continue;
            }
            let mut gens: Vec<OrdElt> = self.basis.iter().map(|b| b.map(|x| x * q)).collect();
            for row in &w {
                gens.push(self.combine(row));
            }
            let j = Self::from_generators(&gens)?;
            if j.norm != self.norm * q {
                return Err(Error::Internal("neighbor has the wrong norm".into()));
            }
            out.push(j);
        }
        out.sort();
        Ok(out)
    }

    /// An equivalent ideal `conj(x) I / N(I)` with `x` a shortest element.
    pub fn reduce(&self, order: &MaximalOrder) -> Result<IdealLattice> {
        let form = self.norm_form(order);
        let mut best: Option<(i64, Vec<i64>)> = None;
        let mut bound = self.norm;
        while best.is_none() {
            Enumerator::new(&form.gram).for_each_upto(bound, |c, n| {
                if best.as_ref().is_none_or(|(m, v)| (n, c) < (*m, v.as_slice())) {
                    best = Some((n, c.to_vec()));
                }
            });
            bound *= 2;
        }
        let (_, c) = best.unwrap();
        let xc = order.conj(&self.combine(&c));
        let gens = self
            .basis
            .iter()
            .map(|b| {
                let y = order.mul(&xc, b);
                if y.iter().any(|v| v % self.norm != 0) {
                    return Err(Error::Internal("conj(x) I is not divisible by N(I)".into()));
                }
                Ok(y.map(|v| v / self.norm))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_generators(&gens)
    }
}

fn unit_vec(s: usize) -> OrdElt {
    let mut e = [0; 4];
    e[s] = 1;
    e
}

/// All 2-dimensional subspaces of `F_q^4`, as reduced row echelon bases.
fn planes(q: i64) -> Vec<[[i64; 4]; 2]> {
    let mut out = Vec::new();
    for p0 in 0..4 {
        for p1 in p0 + 1..4 {
            // free positions: row 0 after p0 except p1; row 1 after p1
            let free0: Vec<usize> = (p0 + 1..4).filter(|&c| c != p1).collect();
            let free1: Vec<usize> = (p1 + 1..4).collect();
            let nfree = free0.len() + free1.len();
            let total = q.pow(nfree as u32);
            for mut code in 0..total {
                let mut w = [[0i64; 4]; 2];
                w[0][p0] = 1;
                w[1][p1] = 1;
                for &c in &free0 {
                    w[0][c] = code % q;
                    code /= q;
                }
                for &c in &free1 {
                    w[1][c] = code % q;
                    code /= q;
                }
                out.push(w);
            }
        }
    }
    out
}

/// Whether `v` lies in the span of an echelon basis `w` over `F_q`.
fn in_plane(w: &[[i64; 4]; 2], v: &[i64; 4], q: i64) -> bool {
    let p0 = w[0].iter().position(|&x| x != 0).unwrap();
    let p1 = w[1].iter().position(|&x| x != 0).unwrap();
    let a = v[p0];
    let b = v[p1];
    (0..4).all(|t| (a * w[0][t] + b * w[1][t] - v[t]).rem_euclid(q) == 0)
}
