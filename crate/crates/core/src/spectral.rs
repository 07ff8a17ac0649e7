//! Exact characteristic polynomials and the Ramanujan test.
//!
//! The verdict never touches floating point: with `k` the degree, a
//! nontrivial eigenvalue `t` satisfies `|t| <= 2 sqrt(k - 1)` iff
//! `t^2 <= 4 (k - 1)`, and the squares of the eigenvalues are the roots of a
//! rational polynomial, so Sturm counting decides the question.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::is_prime;
use crate::brandt::{neighbor_count, BrandtContext, BrandtMatrix};
use crate::classes::{class_set, ClassOptions};
use crate::error::{Error, Result};

/// Characteristic polynomial `det(x I - A)` by Berkowitz's division-free
/// recursion. Coefficients are listed from the leading one down.
pub fn char_poly(a: &[Vec<i64>]) -> Vec<BigInt> {
    let n = a.len();
    let big = |x: i64| BigInt::from(x);
    let mut q: Vec<BigInt> = vec![BigInt::one()];
    for r in 0..n {
        // M_{r+1} = [[A, C], [R, a_rr]]; t = (1, -a_rr, -R C, -R A C, ...)
        let mut t: Vec<BigInt> = vec![BigInt::one(), -big(a[r][r])];
        let mut w: Vec<BigInt> = (0..r).map(|i| big(a[i][r])).collect();
        for _ in 0..r {
            let rc: BigInt = (0..r).map(|j| big(a[r][j]) * &w[j]).sum();
            t.push(-rc);
            w = (0..r).map(|i| (0..r).map(|j| big(a[i][j]) * &w[j]).sum()).collect();
        }
        q = (0..r + 2).map(|i| (0..=i.min(r)).filter(|&j| i - j < t.len()).map(|j| &t[i - j] * &q[j]).sum()).collect();
    }
    q
}

/// Dense univariate polynomial over the rationals, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Poly(Vec<BigRational>);

impl Poly {
    fn from_desc(c: &[BigInt]) -> Self {
        Poly(c.iter().rev().map(|x| BigRational::from_integer(x.clone())).collect()).trim()
    }

    fn trim(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn lead(&self) -> &BigRational {
        self.0.last().expect("nonzero polynomial")
    }

    fn eval(&self, x: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(i, c)| c * BigRational::from_integer(BigInt::from(i))).collect())
            .trim()
    }

    fn sub(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let z = BigRational::zero();
        Poly((0..n).map(|i| self.0.get(i).unwrap_or(&z) - other.0.get(i).unwrap_or(&z)).collect()).trim()
    }

    fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly(Vec::new());
        }
        let mut out = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out).trim()
    }

    fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        let mut r = self.0.clone();
        let dd = d.degree();
        if self.0.len() < d.0.len() {
            return (Poly(Vec::new()), self.clone());
        }
        let mut q = vec![BigRational::zero(); self.0.len() - d.0.len() + 1];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] / d.lead();
            for (j, dc) in d.0.iter().enumerate() {
                r[k + j] -= &c * dc;
            }
            q[k] = c;
        }
        (Poly(q).trim(), Poly(r).trim())
    }

    fn monic(&self) -> Poly {
        let l = self.lead().clone();
        Poly(self.0.iter().map(|c| c / &l).collect())
    }

    fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// Yun's algorithm: `f = c prod_m f_m^m` with each `f_m` square-free and
    /// coprime to the others. Returns `(m, f_m)` for non-constant `f_m`.
    fn square_free_decomposition(&self) -> Vec<(usize, Poly)> {
        let mut out = Vec::new();
        if self.degree() == 0 {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let a = f.gcd(&df);
        let mut b = f.divrem(&a).0;
        let mut c = df.divrem(&a).0;
        let mut d = c.sub(&b.derivative());
        let mut m = 1;
        loop {
            let fm = b.gcd(&d);
            b = b.divrem(&fm).0;
            c = d.divrem(&fm).0;
            if fm.degree() > 0 {
                out.push((m, fm));
            }
            if b.degree() == 0 {
                break;
            }
            d = c.sub(&b.derivative());
            m += 1;
        }
        out
    }

    fn sturm_sequence(&self) -> Vec<Poly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let (_, r) = seq[n - 2].divrem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(Poly(r.0.iter().map(|c| -c).collect()));
        }
        seq
    }
}

fn sign_changes(values: impl Iterator<Item = i32>) -> usize {
    let mut last = 0;
    let mut n = 0;
    for s in values.filter(|&s| s != 0) {
        if last != 0 && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

fn sign(x: &BigRational) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Distinct real roots of a square-free polynomial in `(lo, hi]`.
fn count_roots(seq: &[Poly], lo: &BigRational, hi: &BigRational) -> usize {
    let at = |x: &BigRational| sign_changes(seq.iter().map(|p| sign(&p.eval(x))));
    at(lo) - at(hi)
}

/// Distinct real roots of a square-free polynomial.
fn count_real_roots(seq: &[Poly]) -> usize {
    let at_neg = sign_changes(seq.iter().map(|p| {
        let s = sign(p.lead());
        if p.degree() % 2 == 1 {
            -s
        } else {
            s
        }
    }));
    let at_pos = sign_changes(seq.iter().map(|p| sign(p.lead())));
    at_neg - at_pos
}

/// Roots with multiplicity in `(lo, hi]`.
fn count_with_multiplicity(parts: &[(usize, Poly, Vec<Poly>)], lo: &BigRational, hi: &BigRational) -> usize {
    parts.iter().map(|(m, _, seq)| m * count_roots(seq, lo, hi)).sum()
}

fn cauchy_bound(p: &Poly) -> BigRational {
    let l = p.lead().abs();
    BigRational::one() + p.0.iter().map(|c| c.abs() / &l).fold(BigRational::zero(), |a, b| if b > a { b } else { a })
}

fn rat(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Certified spectral data for a regular Brandt matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpectralReport {
    pub h: usize,
    /// common row sum
    pub k: i64,
    /// coefficients of `det(x I - B)`, leading first
    #[serde(serialize_with = "ser_integers")]
    pub charpoly: Vec<BigInt>,
    pub trivial_multiplicity: usize,
    /// number of real roots counted with multiplicity (equals `h`)
    pub real_roots: usize,
    pub ramanujan: bool,
    /// enclosure `[lo, hi]` of the largest nontrivial `|t|`, if any
    #[serde(serialize_with = "ser_interval")]
    pub second_largest_abs: Option<(BigRational, BigRational)>,
}

/// Decimal strings, so arbitrarily large coefficients survive JSON readers.
fn ser_integers<S: serde::Serializer>(x: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(x.iter().map(|c| c.to_string()))
}

fn ser_interval<S: serde::Serializer>(
    x: &Option<(BigRational, BigRational)>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match x {
        None => s.serialize_none(),
        Some((lo, hi)) => s.serialize_some(&(decimal(lo, false), decimal(hi, true))),
    }
}

/// Decimal with 12 digits, rounded down (or up).
pub fn decimal(x: &BigRational, up: bool) -> String {
    let scale = BigInt::from(10).pow(12);
    let scaled = x * BigRational::from_integer(scale.clone());
    let n = if up { scaled.ceil() } else { scaled.floor() }.to_integer();
    let neg = n.is_negative();
    let a = n.abs();
    let (ip, fp) = (&a / &scale, &a % &scale);
    format!("{}{}.{:012}", if neg { "-" } else { "" }, ip, fp.to_u64().expect("fraction fits"))
}

/// Human-readable polynomial, e.g. `x^2 - 20x + 75`.
pub fn format_poly(c: &[BigInt]) -> String {
    let d = c.len() - 1;
    let mut out = String::new();
    for (i, a) in c.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        let e = d - i;
        let neg = a.is_negative();
        let abs = a.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let coef = if abs.is_one() && e > 0 { String::new() } else { abs.to_string() };
        out.push_str(&coef);
        match e {
            0 => {}
            1 => out.push('x'),
            _ => out.push_str(&format!("x^{e}")),
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

/// Whether the support of `b` is strongly connected.
pub fn is_irreducible(b: &[Vec<i64>]) -> bool {
    let n = b.len();
    let reach = |fwd: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in 0..n {
                let e = if fwd { b[v][w] } else { b[w][v] };
                if e != 0 && !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    n == 0 || (reach(true) && reach(false))
}

/// Exact Ramanujan verdict for a weighted-symmetric matrix with constant row
/// sums: every eigenvalue `t` of `charpoly / (x - k)` has `t^2 <= 4 (k - 1)`.
pub fn ramanujan_verdict(b: &BrandtMatrix) -> Result<SpectralReport> {
    if let Some((i, j)) = b.weighted_symmetry_violation() {
        return Err(Error::NotSelfAdjoint(format!("e_j B_ij != e_i B_ji at ({i}, {j})")));
    }
    let k = b
        .constant_row_sum()
        .ok_or_else(|| Error::InvalidArgument(format!("row sums are not constant: {:?}", b.row_sums())))?;
    let cp = char_poly(&b.entries);
    let f = Poly::from_desc(&cp);
    let parts_f: Vec<(usize, Poly, Vec<Poly>)> = f
        .square_free_decomposition()
        .into_iter()
        .map(|(m, p)| {
            let s = p.sturm_sequence();
            (m, p, s)
        })
        .collect();
    let real_roots: usize = parts_f.iter().map(|(m, _, s)| m * count_real_roots(s)).sum();
    // strip one factor x - k
    let (q, r) = f.divrem(&Poly(vec![-rat(k), BigRational::one()]));
    if !r.is_zero() {
        return Err(Error::Internal("row sum is not an eigenvalue".into()));
    }
    let mut trivial_multiplicity = 1;
    let mut rest = q.clone();
    loop {
        let (qq, rr) = rest.divrem(&Poly(vec![-rat(k), BigRational::one()]));
        if !rr.is_zero() || rest.degree() == 0 {
            break;
        }
        trivial_multiplicity += 1;
        rest = qq;
    }
    if trivial_multiplicity > 1 && is_irreducible(&b.entries) {
        return Err(Error::Internal(format!(
            "eigenvalue {k} has multiplicity {trivial_multiplicity} on a connected graph"
        )));
    }
    let d = q.degree();
    if d == 0 {
        return Ok(SpectralReport {
            h: b.h,
            k,
            charpoly: cp,
            trivial_multiplicity,
            real_roots,
            ramanujan: true,
            second_largest_abs: None,
        });
    }
    // s(y) with s(x^2) = q(x) q(-x)
    let qneg = Poly(q.0.iter().enumerate().map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() }).collect());
    let even = q.mul(&qneg);
    let s = Poly(even.0.iter().step_by(2).cloned().collect()).trim();
    let parts_s: Vec<(usize, Poly, Vec<Poly>)> = s
        .square_free_decomposition()
        .into_iter()
        .map(|(m, p)| {
            let st = p.sturm_sequence();
            (m, p, st)
        })
        .collect();
    let bound = rat(4 * (k - 1));
    let inside = count_with_multiplicity(&parts_s, &rat(-1), &bound);
    let ramanujan = inside == d;
    let second_largest_abs = Some(largest_root_enclosure(&parts_s, &s));
    Ok(SpectralReport { h: b.h, k, charpoly: cp, trivial_multiplicity, real_roots, ramanujan, second_largest_abs })
}

/// Enclosure of `sqrt(y*)` for the largest root `y*` of `s`, by bisection on
/// Sturm counts to width below `2^-48`.
fn largest_root_enclosure(parts: &[(usize, Poly, Vec<Poly>)], s: &Poly) -> (BigRational, BigRational) {
    let (mut lo, mut hi) = (rat(-1), cauchy_bound(s));
    let eps = BigRational::new(BigInt::one(), BigInt::from(2).pow(48));
    // invariant: some root in (lo, hi], none above hi
    while &hi - &lo > eps {
        let mid = (&lo + &hi) / rat(2);
        let above = parts.iter().map(|(_, _, seq)| count_roots(seq, &mid, &hi)).sum::<usize>();
        if above > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lo = if lo.is_negative() { BigRational::zero() } else { lo };
    (sqrt_bound(&lo, false), sqrt_bound(&hi, true))
}

/// Rational lower (or upper) bound for `sqrt(x)`, accurate to about `2^-40`.
fn sqrt_bound(x: &BigRational, up: bool) -> BigRational {
    let scale = BigInt::from(2).pow(40);
    // floor(sqrt(x * 4^40)) / 2^40
    let scaled = x * BigRational::from_integer(&scale * &scale);
    let n = if up { scaled.ceil() } else { scaled.floor() }.to_integer();
    let mut r = n.sqrt();
    if up && &r * &r < n {
        r += 1;
    }
    BigRational::new(r, scale)
}

/// One survey cell. Serializes as `{g, l, p, report, error}` with exactly
/// one of `report` and `error` non-null.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurveyRow {
    pub g: usize,
    pub l: i64,
    pub p: i64,
    pub result: std::result::Result<SpectralReport, String>,
}

impl Serialize for SurveyRow {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("SurveyRow", 5)?;
        st.serialize_field("g", &self.g)?;
        st.serialize_field("l", &self.l)?;
        st.serialize_field("p", &self.p)?;
        st.serialize_field("report", &self.result.as_ref().ok())?;
        st.serialize_field("error", &self.result.as_ref().err())?;
        st.end()
    }
}

pub const SURVEY_HEADER: &str = "g,l,p,h,k,ramanujan,second_largest_abs_lo,second_largest_abs_hi,charpoly";

impl SurveyRow {
    pub fn to_csv(&self) -> String {
        match &self.result {
            Ok(r) => {
                let (lo, hi) = match &r.second_largest_abs {
                    Some((lo, hi)) => (decimal(lo, false), decimal(hi, true)),
                    None => (String::new(), String::new()),
                };
                let poly: Vec<String> = r.charpoly.iter().map(|c| c.to_string()).collect();
                format!(
                    "{},{},{},{},{},{},{},{},{}",
                    self.g,
                    self.l,
                    self.p,
                    r.h,
                    r.k,
                    r.ramanujan,
                    lo,
                    hi,
                    poly.join(" ")
                )
            }
            Err(e) => format!("{},{},{},,,error,,,\"{}\"", self.g, self.l, self.p, e.replace('"', "'")),
        }
    }
}

/// Verdict for `B_g(l)` of one class set.
pub fn ramanujan_for(ctx: &BrandtContext, l: i64) -> Result<SpectralReport> {
    let p = ctx.class_set().p;
    if l == p || !is_prime(l.max(0) as u64) {
        return Err(Error::InvalidArgument(format!("l = {l} must be a prime different from p = {p}")));
    }
    let b = ctx.brandt(l)?;
    let r = ramanujan_verdict(&b)?;
    if r.k as i128 != neighbor_count(ctx.class_set().g, l) {
        return Err(Error::Internal(format!("degree {} differs from N_g(l)", r.k)));
    }
    Ok(r)
}

/// Verdicts for every prime `p <= pmax`, `p != l`. Failures are recorded
/// per row.
pub fn ramanujan_survey(g: usize, l: i64, pmax: i64, opts: &ClassOptions) -> Vec<SurveyRow> {
    let primes: Vec<i64> = (2..=pmax).filter(|&p| p != l && is_prime(p as u64)).collect();
    primes
        .par_iter()
        .map(|&p| {
            let result = class_set(g, p, opts)
                .and_then(BrandtContext::new)
                .and_then(|c| ramanujan_for(&c, l))
                .map_err(|e| e.to_string());
            SurveyRow { g, l, p, result }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn matrix(entries: Vec<Vec<i64>>, weights: Vec<u64>) -> BrandtMatrix {
        BrandtMatrix { g: 2, p: 0, n: 2, h: entries.len(), entries, weights }
    }

    #[test]
    fn charpoly_small() {
        assert_eq!(char_poly(&[vec![11, 4], vec![6, 9]]), big(&[1, -20, 75]));
        assert_eq!(char_poly(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]), big(&[1, -3, 3, -1]));
        assert_eq!(char_poly(&[]), big(&[1]));
        assert_eq!(char_poly(&[vec![2, 1, 0], vec![1, 2, 1], vec![0, 1, 2]]), big(&[1, -6, 10, -4]));
    }

    #[test]
    fn square_free_parts() {
        // (x - 1)^2 (x + 2)
        let p = Poly::from_desc(&big(&[1, 0, -3, 2]));
        let parts = p.square_free_decomposition();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].0, 1);
        assert_eq!(parts[0].1, Poly::from_desc(&big(&[1, 2])));
        assert_eq!(parts[1].0, 2);
        assert_eq!(parts[1].1, Poly::from_desc(&big(&[1, -1])));
    }

    #[test]
    fn two_vertex_verdict() {
        let r = ramanujan_verdict(&matrix(vec![vec![11, 4], vec![6, 9]], vec![32, 48])).unwrap();
        assert!(r.ramanujan);
        assert_eq!(r.k, 15);
        assert_eq!(r.real_roots, 2);
        let (lo, hi) = r.second_largest_abs.unwrap();
        assert!(lo <= rat(5) && rat(5) <= hi);
    }

    #[test]
    fn boundary_counts_as_ramanujan() {
        // k = 10, second eigenvalue 6 = 2 sqrt(9)
        let r = ramanujan_verdict(&matrix(vec![vec![8, 2], vec![2, 8]], vec![1, 1])).unwrap();
        assert!(r.ramanujan);
        // k = 5, eigenvalue -5 lies outside 2 sqrt(4)
        let r = ramanujan_verdict(&matrix(vec![vec![0, 5], vec![5, 0]], vec![1, 1])).unwrap();
        assert!(!r.ramanujan);
        let r = ramanujan_verdict(&matrix(vec![vec![1, 4], vec![4, 1]], vec![1, 1])).unwrap();
        // eigenvalues 5 and -3; 9 <= 16
        assert!(r.ramanujan);
        let r = ramanujan_verdict(&matrix(vec![vec![1, 2], vec![2, 1]], vec![1, 1])).unwrap();
        // k = 3, eigenvalue -1: 1 <= 8
        assert!(r.ramanujan);
    }

    #[test]
    fn rejects_asymmetric_and_irregular() {
        assert!(matches!(
            ramanujan_verdict(&matrix(vec![vec![1, 2], vec![3, 0]], vec![1, 1])),
            Err(Error::NotSelfAdjoint(_))
        ));
        assert!(matches!(
            ramanujan_verdict(&matrix(vec![vec![1, 2], vec![2, 0]], vec![1, 1])),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn single_vertex_is_trivially_ramanujan() {
        let r = ramanujan_verdict(&matrix(vec![vec![15]], vec![1])).unwrap();
        assert!(r.ramanujan && r.second_largest_abs.is_none());
    }

    #[test]
    fn formatting() {
        assert_eq!(format_poly(&big(&[1, -20, 75])), "x^2 - 20x + 75");
        assert_eq!(format_poly(&big(&[1, 0, -1])), "x^2 - 1");
        assert_eq!(decimal(&BigRational::new(BigInt::from(-1), BigInt::from(3)), false), "-0.333333333334");
        assert_eq!(decimal(&BigRational::new(BigInt::from(1), BigInt::from(3)), true), "0.333333333334");
    }
}
