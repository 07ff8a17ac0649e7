//! Small exact-integer helpers shared by the rest of the crate.

use num_integer::Integer;
use num_rational::Ratio;

/// Exact rational with 128-bit numerator and denominator. Overflow panics
/// (overflow checks are enabled in every profile of this workspace).
pub type Rational = Ratio<i128>;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&q| is_prime(q)).collect()
}

/// Distinct prime divisors of |n|, ascending.
pub fn prime_factors(n: i128) -> Vec<u64> {
    let mut n = n.unsigned_abs();
    let mut out = Vec::new();
    let mut d: u128 = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d as u64);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n as u64);
    }
    out
}

/// floor(sqrt(n)) for n >= 0.
pub fn isqrt(n: i128) -> i128 {
    assert!(n >= 0, "isqrt of negative number");
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Exact integer k-th root, if `n` is a perfect k-th power of a nonnegative integer.
pub fn exact_root(n: i128, k: u32) -> Option<i128> {
    if n < 0 {
        return None;
    }
    if n < 2 {
        return Some(n);
    }
    let mut x = (n as f64).powf(1.0 / k as f64).round() as i128;
    if x < 0 {
        x = 0;
    }
    ((x - 2).max(0)..=x + 2).find(|c| c.checked_pow(k) == Some(n))
}

pub fn div_floor(a: i128, b: i128) -> i128 {
    Integer::div_floor(&a, &b)
}

pub fn div_ceil(a: i128, b: i128) -> i128 {
    -Integer::div_floor(&-a, &b)
}

/// Nearest integer to a/b (b > 0), ties rounded toward +infinity.
pub fn div_round(a: i128, b: i128) -> i128 {
    div_floor(2 * a + b, 2 * b)
}

/// Legendre symbol (a/q) for an odd prime q.
pub fn legendre(a: i128, q: i128) -> i32 {
    let a = a.rem_euclid(q);
    if a == 0 {
        return 0;
    }
    let e = (q - 1) / 2;
    let r = pow_mod(a, e, q);
    if r == 1 {
        1
    } else {
        -1
    }
}

pub fn pow_mod(mut base: i128, mut exp: i128, m: i128) -> i128 {
    let mut acc = 1i128.rem_euclid(m);
    base = base.rem_euclid(m);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

pub fn inv_mod(a: i128, m: i128) -> Option<i128> {
    let g = a.rem_euclid(m).extended_gcd(&m);
    if g.gcd != 1 {
        return None;
    }
    Some(g.x.rem_euclid(m))
}

/// Determinant of a square integer matrix by fraction-free (Bareiss) elimination.
///
/// Intermediate minors can outgrow i128 even when the determinant is small, so
/// an overflow reruns the elimination over big integers.
pub fn det_bareiss(m: &[Vec<i128>]) -> i128 {
    if let Some(d) = bareiss(m.to_vec()) {
        return d;
    }
    let big = m.iter().map(|r| r.iter().map(|&x| num_bigint::BigInt::from(x)).collect()).collect();
    let d = bareiss(big).expect("big integers do not overflow");
    i128::try_from(d).expect("determinant exceeds i128")
}

fn bareiss<T>(mut a: Vec<Vec<T>>) -> Option<T>
where
    T: Clone
        + num_traits::Zero
        + num_traits::One
        + num_traits::CheckedMul
        + num_traits::CheckedSub
        + num_traits::CheckedDiv
        + std::ops::Neg<Output = T>,
{
    let n = a.len();
    if n == 0 {
        return Some(T::one());
    }
    let mut negate = false;
    let mut prev = T::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    negate = !negate;
                }
                None => return Some(T::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let x = a[k][k].checked_mul(&a[i][j])?.checked_sub(&a[i][k].checked_mul(&a[k][j])?)?;
                a[i][j] = x.checked_div(&prev)?;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Some(if negate { -d } else { d })
}

/// Hermite normal form of the Z-span of `rows` (each of length `n`).
///
/// Returns the nonzero rows of the row-style HNF: upper triangular, positive
/// pivots, entries above each pivot reduced into `[0, pivot)`. Two generating
/// sets span the same lattice iff their HNFs are equal.
pub fn hnf(rows: &[Vec<i128>], n: usize) -> Vec<Vec<i128>> {
    let mut a: Vec<Vec<i128>> = rows.iter().filter(|r| r.iter().any(|&x| x != 0)).cloned().collect();
    let mut out: Vec<Vec<i128>> = Vec::new();
    for col in 0..n {
        // gcd-combine all remaining rows on this column into a single pivot row
        loop {
            let mut nz: Vec<usize> = (0..a.len()).filter(|&r| a[r][col] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            nz.sort_by_key(|&r| a[r][col].abs());
            let piv = nz[0];
            for &r in &nz[1..] {
                let q = a[r][col].div_euclid(a[piv][col]);
                if q != 0 {
                    let (pr, rr) = if piv < r {
                        let (lo, hi) = a.split_at_mut(r);
                        (&lo[piv], &mut hi[0])
                    } else {
                        let (lo, hi) = a.split_at_mut(piv);
                        (&hi[0], &mut lo[r])
                    };
                    for c in col..n {
                        rr[c] -= q * pr[c];
                    }
                }
            }
        }
        if let Some(r) = (0..a.len()).find(|&r| a[r][col] != 0) {
            let mut row = a.swap_remove(r);
            if row[col] < 0 {
                row.iter_mut().for_each(|x| *x = -*x);
            }
            out.push(row);
        }
        a.retain(|r| r.iter().any(|&x| x != 0));
    }
    // reduce entries above pivots
    for i in 0..out.len() {
        let pc = out[i].iter().position(|&x| x != 0).unwrap();
        let pv = out[i][pc];
        for k in 0..i {
            let q = out[k][pc].div_euclid(pv);
            if q != 0 {
                let (lo, hi) = out.split_at_mut(i);
                for c in pc..n {
                    lo[k][c] -= q * hi[0][c];
                }
            }
        }
    }
    out
}

/// Solves `a x = r` over the integers, for `a` with `n` columns. Returns a
/// particular solution and a basis of the integral kernel (as rows), or `None`
/// if no integral solution exists.
pub fn solve_integral(a: &[Vec<i128>], r: &[i128], n: usize) -> Option<(Vec<i128>, Vec<Vec<i128>>)> {
    let rows = a.len();
    let mut m: Vec<Vec<i128>> = a.to_vec();
    // columns of u, stored as rows for cheap column operations
    let mut u: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect();
    let col_sub = |m: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, dst: usize, src: usize, q: i128| {
        for row in m.iter_mut() {
            row[dst] -= q * row[src];
        }
        let (s, d) = if src < dst {
            let (lo, hi) = u.split_at_mut(dst);
            (&lo[src], &mut hi[0])
        } else {
            let (lo, hi) = u.split_at_mut(src);
            (&hi[0], &mut lo[dst])
        };
        for (x, y) in d.iter_mut().zip(s.iter()) {
            *x -= q * y;
        }
    };
    let col_swap = |m: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, x: usize, y: usize| {
        for row in m.iter_mut() {
            row.swap(x, y);
        }
        u.swap(x, y);
    };
    let mut pivot_col: Vec<Option<usize>> = vec![None; rows];
    let mut k = 0;
    for i in 0..rows {
        if k == n {
            break;
        }
        loop {
            let best = (k..n).filter(|&j| m[i][j] != 0).min_by_key(|&j| m[i][j].abs());
            let Some(best) = best else { break };
            col_swap(&mut m, &mut u, k, best);
            let mut done = true;
            for j in k + 1..n {
                if m[i][j] != 0 {
                    let q = m[i][j].div_euclid(m[i][k]);
                    col_sub(&mut m, &mut u, j, k, q);
                    if m[i][j] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[i][k] != 0 {
            pivot_col[i] = Some(k);
            k += 1;
        }
    }
    let mut y = vec![0i128; n];
    for i in 0..rows {
        let mut s = r[i];
        let lim = pivot_col[i].unwrap_or(k);
        for j in 0..lim {
            s -= m[i][j] * y[j];
        }
        match pivot_col[i] {
            Some(c) => {
                if s % m[i][c] != 0 {
                    return None;
                }
                y[c] = s / m[i][c];
            }
            None => {
                if s != 0 {
                    return None;
                }
            }
        }
    }
    let mut x = vec![0i128; n];
    for (c, &yc) in y.iter().enumerate().take(k) {
        if yc != 0 {
            for t in 0..n {
                x[t] += yc * u[c][t];
            }
        }
    }
    Some((x, u[k..].to_vec()))
}

/// Exact Bernoulli numbers B_0..=B_n (with B_1 = -1/2).
pub fn bernoulli(n: usize) -> Vec<Ratio<num_bigint::BigInt>> {
    use num_bigint::BigInt;
    use num_traits::{One, Zero};
    let mut b: Vec<Ratio<BigInt>> = vec![Ratio::zero(); n + 1];
    b[0] = Ratio::one();
    for m in 1..=n {
        // sum_{k=0}^{m} C(m+1, k) B_k = 0
        let mut acc = Ratio::<BigInt>::zero();
        let mut binom = BigInt::one();
        for (k, bk) in b.iter().enumerate().take(m) {
            acc += Ratio::from_integer(binom.clone()) * bk;
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        b[m] = -acc / Ratio::from_integer(BigInt::from(m + 1));
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integral_solver_finds_all_solutions() {
        let a = vec![vec![2i128, 4, 6], vec![1, 0, 3]];
        let (x, ker) = solve_integral(&a, &[10, 5], 3).unwrap();
        let apply =
            |v: &[i128]| -> Vec<i128> { a.iter().map(|row| row.iter().zip(v).map(|(p, q)| p * q).sum()).collect() };
        assert_eq!(apply(&x), vec![10, 5]);
        assert!(solve_integral(&a, &[8, 5], 3).is_none());
        assert_eq!(ker.len(), 1);
        assert_eq!(apply(&ker[0]), vec![0, 0]);
        assert!(solve_integral(&a, &[1, 0], 3).is_none());
        assert!(solve_integral(&[vec![2i128, 4]], &[3], 2).is_none());
        // dependent rows must be consistent
        let b = vec![vec![1i128, 1], vec![2, 2]];
        assert!(solve_integral(&b, &[1, 3], 2).is_none());
        assert!(solve_integral(&b, &[1, 2], 2).is_some());
    }

    #[test]
    fn primes_and_roots() {
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(isqrt(99), 9);
        assert_eq!(isqrt(100), 10);
        assert_eq!(exact_root(81, 4), Some(3));
        assert_eq!(exact_root(80, 4), None);
        assert_eq!(prime_factors(-84), vec![2, 3, 7]);
    }

    #[test]
    fn rounding_division() {
        assert_eq!(div_floor(-7, 2), -4);
        assert_eq!(div_ceil(-7, 2), -3);
        assert_eq!(div_ceil(7, 2), 4);
        assert_eq!(div_round(7, 2), 4);
        assert_eq!(div_round(-7, 2), -3);
        assert_eq!(div_round(5, 3), 2);
    }

    #[test]
    fn bareiss_matches_cofactor() {
        let m = vec![vec![2, -1, 0], vec![-1, 2, -1], vec![0, -1, 2]];
        assert_eq!(det_bareiss(&m), 4);
        let m = vec![vec![0, 1], vec![1, 0]];
        assert_eq!(det_bareiss(&m), -1);
    }

    #[test]
    fn hnf_is_canonical() {
        let a = hnf(&[vec![2, 0], vec![0, 2], vec![1, 1]], 2);
        let b = hnf(&[vec![1, 1], vec![1, -1]], 2);
        assert_eq!(a, b);
        assert_eq!(a, vec![vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn bernoulli_small() {
        use num_bigint::BigInt;
        let b = bernoulli(6);
        let r = |n: i64, d: i64| Ratio::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(b[2], r(1, 6));
        assert_eq!(b[4], r(-1, 30));
        assert_eq!(b[6], r(1, 42));
    }

    #[test]
    fn legendre_symbol() {
        assert_eq!(legendre(2, 7), 1);
        assert_eq!(legendre(3, 7), -1);
        assert_eq!(legendre(14, 7), 0);
    }
}
