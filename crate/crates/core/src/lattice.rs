//! Positive-definite integral lattices and exact short-vector enumeration.
//!
//! Enumeration is Fincke-Pohst over the fraction-free LDL data of the Gram
//! matrix: every bound is an integer comparison, so no vector is ever lost to
//! rounding. The basis is LLL-reduced (exactly) first to keep the search tree
//! small.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{div_ceil, div_floor, div_round, isqrt, Rational};

/// A lattice `Z^n` with bilinear form `gram` and quadratic form
/// `Q(v) = scale * v^T gram v / 2`. All norms and targets are in `Q` units.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticLattice {
    pub gram: Vec<Vec<i64>>,
    #[serde(with = "crate::serial::rational")]
    pub scale: Rational,
}

impl QuadraticLattice {
    pub fn from_gram_i64(gram: Vec<Vec<i64>>) -> Self {
        QuadraticLattice { gram, scale: Rational::from_integer(1) }
    }

    pub fn with_scale(gram: Vec<Vec<i64>>, scale: Rational) -> Self {
        QuadraticLattice { gram, scale }
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    /// `v^T gram v / 2`, i.e. the norm before applying `scale`.
    pub fn raw_norm(&self, v: &[i64]) -> i128 {
        let mut acc = 0i128;
        for (r, row) in self.gram.iter().enumerate() {
            if v[r] == 0 {
                continue;
            }
            let mut s = 0i128;
            for (c, &g) in row.iter().enumerate() {
                s += g as i128 * v[c] as i128;
            }
            acc += v[r] as i128 * s;
        }
        acc / 2
    }

    pub fn norm(&self, v: &[i64]) -> Rational {
        self.scale * Rational::from_integer(self.raw_norm(v))
    }

    pub fn is_positive_definite(&self) -> bool {
        let g: Vec<Vec<i128>> = self.gram.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let n = g.len();
        (1..=n).all(|k| {
            let minor: Vec<Vec<i128>> = g[..k].iter().map(|r| r[..k].to_vec()).collect();
            crate::arith::det_bareiss(&minor) > 0
        })
    }

    /// All nonzero `v` with `Q(v) = target`, in lexicographic order. Closed
    /// under negation.
    pub fn short_vectors(&self, target: Rational) -> Vec<Vec<i64>> {
        let raw = target / self.scale;
        if !raw.is_integer() || raw <= Rational::zero() {
            return Vec::new();
        }
        self.vectors_of_norm(*raw.numer() as i64)
    }

    /// All nonzero `v` with raw norm exactly `t`, lexicographically sorted.
    pub fn vectors_of_norm(&self, t: i64) -> Vec<Vec<i64>> {
        if t <= 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        Enumerator::new(&self.gram).for_each_upto(t, |v, n| {
            if n == t {
                out.push(v.to_vec());
            }
        });
        out.sort();
        out
    }

    /// All nonzero `v` with raw norm `<= t`, paired with their norm,
    /// sorted by (norm, coordinates).
    pub fn vectors_upto(&self, t: i64) -> Vec<(i64, Vec<i64>)> {
        let mut out = Vec::new();
        Enumerator::new(&self.gram).for_each_upto(t, |v, n| out.push((n, v.to_vec())));
        out.sort();
        out
    }

    /// Representation counts `#{v : Q_raw(v) = m}` for `m = 1..=terms`.
    pub fn theta_prefix(&self, terms: usize) -> Vec<u64> {
        let mut counts = vec![0u64; terms];
        Enumerator::new(&self.gram).for_each_upto(terms as i64, |_, n| counts[n as usize - 1] += 1);
        counts
    }
}

/// Precomputed reduction and fraction-free decomposition of a Gram matrix,
/// optionally for a coset `offset + span(kernel)` of a sublattice.
pub struct Enumerator {
    n: usize,
    ambient: usize,
    /// rows: reduced basis in ambient coordinates (last row is the offset in
    /// affine mode)
    basis: Vec<Vec<i64>>,
    /// `stage[i][j]`: Bareiss entry `A^(i)_{ij}` for `j >= i`
    stage: Vec<Vec<i128>>,
    /// leading principal minors of the reduced Gram matrix
    minors: Vec<i128>,
    affine: bool,
}

impl Enumerator {
    pub fn new(gram: &[Vec<i64>]) -> Self {
        let n = gram.len();
        let g: Vec<Vec<i128>> = gram.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let (basis, reduced) = lll_gram(&g);
        let (stage, minors) = bareiss_rows(&reduced);
        assert!(minors.iter().all(|&d| d > 0), "gram matrix is not positive definite");
        Enumerator { n, ambient: n, basis, stage, minors, affine: false }
    }

    /// Enumerates the coset `offset + span_Z(kernel)` inside the lattice with
    /// ambient Gram `gram`. `kernel` rows must be linearly independent.
    pub fn affine(gram: &[Vec<i64>], kernel: &[Vec<i128>], offset: &[i128]) -> Self {
        let ambient = gram.len();
        let m = kernel.len();
        let kg = pullback(gram, kernel);
        let (t, _) = lll_gram(&kg);
        let mut basis: Vec<Vec<i128>> = t
            .iter()
            .map(|row| (0..ambient).map(|c| row.iter().zip(kernel).map(|(&a, k)| a as i128 * k[c]).sum()).collect())
            .collect();
        let mut off = offset.to_vec();
        babai_reduce(gram, &basis, &mut off);
        basis.push(off.clone());
        // exact size reduction of the offset against the reduced kernel basis
        let (mut stage, minors) = bareiss_rows(&pullback(gram, &basis));
        for l in (0..m).rev() {
            let q = div_round(stage[l][m], minors[l]);
            if q != 0 {
                for c in 0..ambient {
                    off[c] -= q * basis[l][c];
                }
                for i in 0..=l {
                    stage[i][m] -= q * stage[i][l];
                }
            }
        }
        basis[m] = off;
        let aug = pullback(gram, &basis);
        let (stage, minors) = bareiss_rows(&aug);
        let degenerate = minors[m] == 0;
        if degenerate {
            basis.pop();
        }
        let basis = basis.into_iter().map(|r| r.into_iter().map(|x| x as i64).collect()).collect();
        let n = if degenerate { m } else { m + 1 };
        Enumerator { n, ambient, basis, stage, minors, affine: !degenerate }
    }

    /// Calls `f(v, Q_raw(v))` for every `v` with `Q_raw(v) <= bound`: every
    /// nonzero lattice vector, or every coset vector in affine mode.
    pub fn for_each_upto<F: FnMut(&[i64], i64)>(&self, bound: i64, mut f: F) {
        if bound < 0 || (!self.affine && bound == 0) {
            return;
        }
        if self.n == 0 {
            return;
        }
        let mut y = vec![0i128; self.n];
        let mut v = vec![0i64; self.ambient];
        let t = 2 * bound as i128;
        self.descend(self.n - 1, &mut y, 0, t, &mut v, &mut f);
    }

    fn descend<F: FnMut(&[i64], i64)>(
        &self,
        i: usize,
        y: &mut [i128],
        f_next: i128,
        t: i128,
        v: &mut [i64],
        f: &mut F,
    ) {
        let di = self.minors[i];
        let dprev = if i == 0 { 1 } else { self.minors[i - 1] };
        let row = &self.stage[i];
        let mut b = 0i128;
        for j in i + 1..self.n {
            b += row[j] * y[j];
        }
        let disc = dprev * (di * t - f_next);
        if disc < 0 {
            return;
        }
        let s = isqrt(disc);
        let mut lo = div_ceil(-s - b, di);
        let mut hi = div_floor(s - b, di);
        if self.affine && i == self.n - 1 {
            if lo > 1 || hi < 1 {
                return;
            }
            lo = 1;
            hi = 1;
        }
        for yi in lo..=hi {
            y[i] = yi;
            let w = di * yi + b;
            let fi = (w * w + dprev * f_next) / di;
            if i == 0 {
                if fi <= t && (self.affine || y.iter().any(|&c| c != 0)) {
                    for (c, out) in v.iter_mut().enumerate() {
                        let mut acc = 0i64;
                        for (r, &yr) in y.iter().enumerate() {
                            acc += yr as i64 * self.basis[r][c];
                        }
                        *out = acc;
                    }
                    f(v, (fi / 2) as i64);
                }
            } else {
                self.descend(i - 1, y, fi, t, v, f);
            }
        }
        y[i] = 0;
    }
}

/// Approximate nearest-plane reduction of `off` against `rows`, in floating
/// point. Only shifts `off` by lattice vectors, so exactness is not needed.
fn babai_reduce(gram: &[Vec<i64>], rows: &[Vec<i128>], off: &mut [i128]) {
    let m = rows.len();
    if m == 0 {
        return;
    }
    let g = pullback(gram, rows);
    let gf: Vec<Vec<f64>> = g.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    // Gram-Schmidt: mu[i][j] and squared norms
    let mut mu = vec![vec![0f64; m]; m];
    let mut bn = vec![0f64; m];
    for i in 0..m {
        for j in 0..i {
            let mut s = gf[i][j];
            for k in 0..j {
                s -= mu[i][k] * mu[j][k] * bn[k];
            }
            mu[i][j] = s / bn[j];
        }
        let mut s = gf[i][i];
        for k in 0..i {
            s -= mu[i][k] * mu[i][k] * bn[k];
        }
        bn[i] = s;
    }
    for _ in 0..4 {
        let dots: Vec<f64> = rows
            .iter()
            .map(|r| {
                let mut acc = 0f64;
                for (a, grow) in gram.iter().enumerate() {
                    let ga: i128 = grow.iter().zip(r).map(|(&x, &y)| x as i128 * y).sum();
                    acc += off[a] as f64 * ga as f64;
                }
                acc
            })
            .collect();
        // coefficients of off against the Gram-Schmidt vectors
        let mut c = vec![0f64; m];
        for i in 0..m {
            let mut s = dots[i];
            for k in 0..i {
                s -= mu[i][k] * c[k] * bn[k];
            }
            c[i] = s / bn[i];
        }
        let mut changed = false;
        for l in (0..m).rev() {
            let q = c[l].round();
            if q != 0.0 && q.is_finite() {
                changed = true;
                let qi = q as i128;
                for (o, b) in off.iter_mut().zip(&rows[l]) {
                    *o -= qi * b;
                }
                for k in 0..l {
                    c[k] -= q * mu[l][k];
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// `B G B^T` for basis rows `B`.
fn pullback(gram: &[Vec<i64>], rows: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let gb: Vec<Vec<i128>> = rows
        .iter()
        .map(|r| (0..gram.len()).map(|c| r.iter().zip(gram).map(|(&x, g)| x * g[c] as i128).sum()).collect())
        .collect();
    rows.iter().map(|a| gb.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum()).collect()).collect()
}

/// All `v` in `offset + span_Z(kernel)` with `Q_raw(v) = target`, sorted.
pub fn coset_vectors_of_norm(gram: &[Vec<i64>], kernel: &[Vec<i128>], offset: &[i128], target: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    Enumerator::affine(gram, kernel, offset).for_each_upto(target, |v, n| {
        if n == target {
            out.push(v.to_vec());
        }
    });
    out.sort();
    out
}

/// Fraction-free elimination: returns, for each `i`, row `i` of the `i`-th
/// Bareiss stage, and the leading principal minors.
fn bareiss_rows(g: &[Vec<i128>]) -> (Vec<Vec<i128>>, Vec<i128>) {
    let n = g.len();
    let mut a = g.to_vec();
    let mut stage = Vec::with_capacity(n);
    let mut minors = Vec::with_capacity(n);
    let mut prev = 1i128;
    for k in 0..n {
        stage.push(a[k].clone());
        minors.push(a[k][k]);
        if a[k][k] == 0 {
            // degenerate; remaining minors are meaningless
            for r in k + 1..n {
                stage.push(a[r].clone());
                minors.push(0);
            }
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[k][k] * a[i][j] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    (stage, minors)
}

/// Integral LLL (delta = 3/4) on a positive-definite Gram matrix, with
/// incremental fraction-free Gram-Schmidt data. Returns the unimodular
/// transform (rows = new basis in old coordinates) and the new Gram.
///
/// The Gram-Schmidt determinants can outgrow `i128` in dimension 12 even
/// when input and output are small, so that case reruns in `BigInt`.
pub fn lll_gram(g: &[Vec<i128>]) -> (Vec<Vec<i64>>, Vec<Vec<i128>>) {
    let narrow = |h: Vec<Vec<i128>>, b| (h.into_iter().map(|r| r.into_iter().map(|x| x as i64).collect()).collect(), b);
    if let Some((h, b)) = lll_checked(g.to_vec()) {
        return narrow(h, b);
    }
    let big: Vec<Vec<BigInt>> = g.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let (h, b) = lll_checked(big).expect("BigInt arithmetic does not overflow");
    let back = |m: Vec<Vec<BigInt>>| -> Vec<Vec<i128>> {
        m.into_iter().map(|r| r.into_iter().map(|x| x.to_i128().expect("reduced data fits i128")).collect()).collect()
    };
    narrow(back(h), back(b))
}

trait LllInt: Clone + Ord + Integer + Signed + CheckedAdd + CheckedSub + CheckedMul + CheckedDiv + From<i32> {}

impl<T> LllInt for T where
    T: Clone + Ord + Integer + Signed + CheckedAdd + CheckedSub + CheckedMul + CheckedDiv + From<i32>
{
}

/// `None` on overflow.
#[allow(clippy::type_complexity)]
fn lll_checked<T: LllInt>(g: Vec<Vec<T>>) -> Option<(Vec<Vec<T>>, Vec<Vec<T>>)> {
    let n = g.len();
    let mut h: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| T::from((i == j) as i32)).collect()).collect();
    let mut b = g;
    if n < 2 {
        return Some((h, b));
    }
    let mul = |x: &T, y: &T| x.checked_mul(y);
    let sub = |x: &T, y: &T| x.checked_sub(y);
    let add = |x: &T, y: &T| x.checked_add(y);
    let two = T::from(2);
    let three = T::from(3);
    let four = T::from(4);
    // d[i + 1] = d_i in 1-indexed notation; d[0] = 1
    let mut d = vec![T::zero(); n + 1];
    let mut lam = vec![vec![T::zero(); n]; n];
    d[0] = T::one();
    d[1] = b[0][0].clone();
    assert!(d[1] > T::zero(), "gram matrix is not positive definite");
    let mut k = 1usize;
    let mut kmax = 0usize;

    let red = |k: usize, l: usize, b: &mut [Vec<T>], h: &mut [Vec<T>], lam: &mut [Vec<T>], d: &[T]| -> Option<()> {
        if mul(&two, &lam[k][l].abs())? <= d[l + 1] {
            return Some(());
        }
        // round(lam / d) for d > 0
        let q = add(&mul(&two, &lam[k][l])?, &d[l + 1])?.div_floor(&mul(&two, &d[l + 1])?);
        for c in 0..n {
            h[k][c] = sub(&h[k][c], &mul(&q, &h[l][c])?)?;
        }
        let bkk = add(&sub(&b[k][k], &mul(&mul(&two, &q)?, &b[k][l])?)?, &mul(&mul(&q, &q)?, &b[l][l])?)?;
        for c in 0..n {
            if c != k {
                b[k][c] = sub(&b[k][c], &mul(&q, &b[l][c])?)?;
                b[c][k] = b[k][c].clone();
            }
        }
        b[k][k] = bkk;
        lam[k][l] = sub(&lam[k][l], &mul(&q, &d[l + 1])?)?;
        for i in 0..l {
            lam[k][i] = sub(&lam[k][i], &mul(&q, &lam[l][i])?)?;
        }
        Some(())
    };

    while k < n {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut u = b[k][j].clone();
                for i in 0..j {
                    u = sub(&mul(&d[i + 1], &u)?, &mul(&lam[k][i], &lam[j][i])?)? / d[i].clone();
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    assert!(u > T::zero(), "gram matrix is not positive definite");
                    d[k + 1] = u;
                }
            }
        }
        red(k, k - 1, &mut b, &mut h, &mut lam, &d)?;
        let l = lam[k][k - 1].clone();
        let lhs = mul(&mul(&four, &d[k + 1])?, &d[k - 1])?;
        let rhs = sub(&mul(&mul(&three, &d[k])?, &d[k])?, &mul(&mul(&four, &l)?, &l)?)?;
        if lhs < rhs {
            // swap b_k and b_{k-1}
            h.swap(k, k - 1);
            b.swap(k, k - 1);
            for row in b.iter_mut() {
                row.swap(k, k - 1);
            }
            for j in 0..k - 1 {
                let tmp = lam[k][j].clone();
                lam[k][j] = lam[k - 1][j].clone();
                lam[k - 1][j] = tmp;
            }
            let bb = add(&mul(&d[k - 1], &d[k + 1])?, &mul(&l, &l)?)? / d[k].clone();
            for i in k + 1..=kmax {
                let t = lam[i][k].clone();
                lam[i][k] = sub(&mul(&d[k + 1], &lam[i][k - 1])?, &mul(&l, &t)?)? / d[k].clone();
                lam[i][k - 1] = add(&mul(&bb, &t)?, &mul(&l, &lam[i][k])?)? / d[k + 1].clone();
            }
            d[k] = bb;
            if k > 1 {
                k -= 1;
            }
        } else {
            for l in (0..k - 1).rev() {
                red(k, l, &mut b, &mut h, &mut lam, &d)?;
            }
            k += 1;
        }
    }
    Some((h, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force oracle over a box, independent of the enumerator.
    fn brute(gram: &[Vec<i64>], t: i64, radius: i64) -> Vec<Vec<i64>> {
        let n = gram.len();
        let lat = QuadraticLattice::from_gram_i64(gram.to_vec());
        let mut out = Vec::new();
        let mut v = vec![-radius; n];
        loop {
            if v.iter().any(|&x| x != 0) && lat.raw_norm(&v) == t as i128 {
                out.push(v.clone());
            }
            let mut i = 0;
            loop {
                if i == n {
                    out.sort();
                    return out;
                }
                v[i] += 1;
                if v[i] > radius {
                    v[i] = -radius;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }

    #[test]
    fn d4_has_24_minimal_vectors() {
        // D4 root lattice with roots of norm 1 in Q units (gram = 2 * Q-bilinear)
        let gram = vec![vec![2, -1, 0, 0], vec![-1, 2, -1, -1], vec![0, -1, 2, 0], vec![0, -1, 0, 2]];
        let lat = QuadraticLattice::from_gram_i64(gram.clone());
        assert_eq!(lat.vectors_of_norm(1).len(), 24);
        assert_eq!(lat.vectors_of_norm(1), brute(&gram, 1, 3));
        assert_eq!(lat.vectors_of_norm(2), brute(&gram, 2, 3));
    }

    #[test]
    fn skewed_gram_matches_brute_force() {
        let gram = vec![vec![2, 7, 1], vec![7, 26, 3], vec![1, 3, 4]];
        let lat = QuadraticLattice::from_gram_i64(gram.clone());
        assert!(lat.is_positive_definite());
        for t in 1..6 {
            assert_eq!(lat.vectors_of_norm(t), brute(&gram, t, 12), "t = {t}");
        }
    }

    #[test]
    fn unrepresented_target_is_empty() {
        let lat = QuadraticLattice::from_gram_i64(vec![vec![4, 0], vec![0, 4]]);
        assert!(lat.vectors_of_norm(1).is_empty());
        assert!(lat.short_vectors(Rational::new(3, 2)).is_empty());
        assert_eq!(lat.vectors_of_norm(2).len(), 4);
    }

    #[test]
    fn lll_preserves_determinant() {
        let g = vec![vec![10i128, 7, 3], vec![7, 6, 2], vec![3, 2, 5]];
        let (t, r) = lll_gram(&g);
        let d0 = crate::arith::det_bareiss(&g);
        let d1 = crate::arith::det_bareiss(&r);
        assert_eq!(d0, d1);
        let tt: Vec<Vec<i128>> = t.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        assert_eq!(crate::arith::det_bareiss(&tt).abs(), 1);
    }

    #[test]
    fn coset_enumeration_matches_brute_force() {
        let gram = vec![vec![4, 1, 0, 1], vec![1, 6, 2, 0], vec![0, 2, 4, 1], vec![1, 0, 1, 8]];
        // solutions of x0 + 2 x1 - x3 = 3
        let (off, ker) = crate::arith::solve_integral(&[vec![1, 2, 0, -1]], &[3], 4).unwrap();
        for t in 0..25 {
            let got = coset_vectors_of_norm(&gram, &ker, &off, t);
            let want: Vec<Vec<i64>> = brute(&gram, t, 6).into_iter().filter(|v| v[0] + 2 * v[1] - v[3] == 3).collect();
            assert_eq!(got, want, "t = {t}");
        }
    }

    #[test]
    fn lll_reduces_a_skewed_basis() {
        let g = vec![vec![1i128, 100, 0], vec![100, 10020, 7], vec![0, 7, 3]];
        let (t, r) = lll_gram(&g);
        assert!(r.iter().enumerate().all(|(i, row)| row[i] <= 10));
        // r = T g T^T
        for a in 0..3 {
            for b in 0..3 {
                let mut acc = 0i128;
                for x in 0..3 {
                    for y in 0..3 {
                        acc += t[a][x] as i128 * g[x][y] * t[b][y] as i128;
                    }
                }
                assert_eq!(acc, r[a][b]);
            }
        }
    }

    #[test]
    fn theta_prefix_of_z2() {
        let lat = QuadraticLattice::from_gram_i64(vec![vec![2, 0], vec![0, 2]]);
        assert_eq!(lat.theta_prefix(5), vec![4, 4, 0, 4, 8]);
    }
}
