//! Brandt matrices `B_g(n)` and the identities they satisfy.

use std::collections::BTreeMap;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, Rational};
use crate::classes::{ClassReps, ClassSet, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::isometry::{automorphism_group, isometry_count};
use crate::matrix::OMatrix;

/// `N_g(l) = prod_{k=1..g} (l^k + 1)`, the number of `l`-neighbors.
pub fn neighbor_count(g: usize, l: i64) -> i128 {
    (1..=g as u32).map(|k| (l as i128).pow(k) + 1).product()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrandtMatrix {
    pub g: usize,
    pub p: i64,
    pub n: i64,
    pub h: usize,
    pub entries: Vec<Vec<i64>>,
    pub weights: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct BrandtRecord {
    format_version: u32,
    #[serde(flatten)]
    matrix: BrandtMatrix,
}

impl BrandtMatrix {
    pub fn row_sums(&self) -> Vec<i64> {
        self.entries.iter().map(|r| r.iter().sum()).collect()
    }

    /// The common row sum, if all rows agree.
    pub fn constant_row_sum(&self) -> Option<i64> {
        let s = self.row_sums();
        s.windows(2).all(|w| w[0] == w[1]).then(|| s.first().copied()).flatten()
    }

    /// `e_j B_ij = e_i B_ji` for all `i, j`; returns the first violation.
    pub fn weighted_symmetry_violation(&self) -> Option<(usize, usize)> {
        for i in 0..self.h {
            for j in 0..self.h {
                let l = self.weights[j] as i128 * self.entries[i][j] as i128;
                let r = self.weights[i] as i128 * self.entries[j][i] as i128;
                if l != r {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn to_json(&self) -> String {
        let rec = BrandtRecord { format_version: FORMAT_VERSION, matrix: self.clone() };
        serde_json::to_string_pretty(&rec).expect("matrices serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: BrandtRecord = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        if rec.format_version != FORMAT_VERSION {
            return Err(Error::Schema(format!("unsupported format version {}", rec.format_version)));
        }
        let m = rec.matrix;
        if m.entries.len() != m.h || m.weights.len() != m.h || m.entries.iter().any(|r| r.len() != m.h) {
            return Err(Error::Schema("matrix shape does not match h".into()));
        }
        if m.entries.iter().flatten().any(|&x| x < 0) || m.weights.contains(&0) {
            return Err(Error::Schema("entries must be nonnegative and weights positive".into()));
        }
        Ok(m)
    }

    /// Matrix body as CSV, one row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn with_entries(&self, n: i64, entries: Vec<Vec<i64>>) -> BrandtMatrix {
        BrandtMatrix { n, entries, ..self.clone() }
    }
}

/// Integer matrix product.
pub fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

/// A permutation `s` with `a[s i][s j] = b[i][j]`, if one exists.
pub fn permutation_equivalent(a: &[Vec<i64>], b: &[Vec<i64>]) -> Option<Vec<usize>> {
    let n = a.len();
    if b.len() != n {
        return None;
    }
    fn extend(a: &[Vec<i64>], b: &[Vec<i64>], s: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let k = s.len();
        if k == a.len() {
            return true;
        }
        for c in 0..a.len() {
            if used[c] {
                continue;
            }
            let ok = a[c][c] == b[k][k] && (0..k).all(|i| a[s[i]][c] == b[i][k] && a[c][s[i]] == b[k][i]);
            if ok {
                s.push(c);
                used[c] = true;
                if extend(a, b, s, used) {
                    return true;
                }
                s.pop();
                used[c] = false;
            }
        }
        false
    }
    let mut s = Vec::new();
    extend(a, b, &mut s, &mut vec![false; n]).then_some(s)
}

/// Computes and memoizes Brandt matrices for one class set.
pub struct BrandtContext {
    set: ClassSet,
    auts: OnceLock<Vec<Vec<OMatrix>>>,
    cache: Mutex<BTreeMap<i64, BrandtMatrix>>,
}

impl BrandtContext {
    /// Fails unless the class set is certified complete by its mass.
    pub fn new(set: ClassSet) -> Result<Self> {
        if !set.mass_certified() {
            return Err(Error::Internal("class set is incomplete: weights do not sum to the mass".into()));
        }
        Ok(BrandtContext { set, auts: OnceLock::new(), cache: Mutex::new(BTreeMap::new()) })
    }

    pub fn class_set(&self) -> &ClassSet {
        &self.set
    }

    /// Automorphism groups of the representative forms (rank >= 2).
    pub fn automorphisms(&self) -> Result<&[Vec<OMatrix>]> {
        if let Some(a) = self.auts.get() {
            return Ok(a);
        }
        let forms = self.set.forms().ok_or_else(|| Error::InvalidArgument("rank-one sets have no forms".into()))?;
        let auts = forms.par_iter().map(|f| automorphism_group(&self.set.order, f)).collect::<Result<Vec<_>>>()?;
        for (a, &e) in auts.iter().zip(&self.set.aut_counts) {
            if a.len() as u64 != e {
                return Err(Error::Internal("automorphism count disagrees with the class set".into()));
            }
        }
        Ok(self.auts.get_or_init(|| auts))
    }

    /// `B_g(n)`.
    pub fn brandt(&self, n: i64) -> Result<BrandtMatrix> {
        if n < 1 {
            return Err(Error::InvalidArgument(format!("n must be positive, got {n}")));
        }
        if let Some(m) = self.cache.lock().expect("cache lock").get(&n) {
            return Ok(m.clone());
        }
        let m = self.compute(n)?;
        self.cache.lock().expect("cache lock").insert(n, m.clone());
        Ok(m)
    }

    /// Seeds the memo table, e.g. from a disk cache.
    pub fn insert(&self, m: BrandtMatrix) -> Result<()> {
        let s = &self.set;
        if m.g != s.g || m.p != s.p || m.h != s.h() || m.weights != s.aut_counts {
            return Err(Error::Schema("matrix does not belong to this class set".into()));
        }
        self.cache.lock().expect("cache lock").insert(m.n, m);
        Ok(())
    }

    fn compute(&self, n: i64) -> Result<BrandtMatrix> {
        let s = &self.set;
        let h = s.h();
        let o = &s.order;
        let pairs: Vec<(usize, usize)> = (0..h).flat_map(|i| (0..h).map(move |j| (i, j))).collect();
        let counts: Vec<u64> = match &s.reps {
            ClassReps::Ideals(ideals) => pairs
                .par_iter()
                .map(|&(i, j)| {
                    let lat = ideals[i].times_conj(&ideals[j], o);
                    lat.elements_of_norm(o, n * lat.norm).len() as u64
                })
                .collect(),
            ClassReps::Forms(forms) => {
                let auts = self.automorphisms()?;
                pairs.par_iter().map(|&(i, j)| isometry_count(o, &forms[i], &forms[j], n, &auts[i])).collect()
            }
        };
        let mut entries = vec![vec![0i64; h]; h];
        for (&(i, j), &c) in pairs.iter().zip(&counts) {
            let e = s.aut_counts[j];
            if c % e != 0 {
                return Err(Error::Internal(format!("count {c} for ({i}, {j}) is not divisible by e_j = {e}")));
            }
            entries[i][j] = (c / e) as i64;
        }
        Ok(BrandtMatrix { g: s.g, p: s.p, n, h, entries, weights: s.aut_counts.clone() })
    }

    /// `B_g(0)_ij = 1 / e_j`.
    pub fn brandt_zero(&self) -> Vec<Vec<Rational>> {
        brandt_zero(&self.set)
    }

    /// Checks the Hecke identities on all `n <= upto` coprime to `p`.
    pub fn verify_identities(&self, upto: i64) -> Result<IdentityReport> {
        let p = self.set.p;
        let ns: Vec<i64> = (1..=upto).filter(|&n| num_integer::gcd(n, p) == 1).collect();
        let mats: BTreeMap<i64, BrandtMatrix> =
            ns.iter().map(|&n| self.brandt(n).map(|m| (n, m))).collect::<Result<_>>()?;
        let mut report = IdentityReport::default();
        let h = self.set.h();
        let id: Vec<Vec<i64>> = (0..h).map(|i| (0..h).map(|j| (i == j) as i64).collect()).collect();
        report.push("B(1) = identity", mats[&1].entries == id, None);
        for (&n, m) in &mats {
            let sums = m.row_sums();
            let constant = m.constant_row_sum();
            report.push(&format!("B({n}) has constant row sums"), constant.is_some(), Some(format!("{sums:?}")));
            if n > 1 && is_prime(n as u64) {
                let want = neighbor_count(self.set.g, n) as i64;
                report.push(
                    &format!("B({n}) row sum equals N_g({n}) = {want}"),
                    constant == Some(want),
                    Some(format!("{sums:?}")),
                );
            }
            let v = m.weighted_symmetry_violation();
            report.push(&format!("B({n}) is weighted symmetric"), v.is_none(), v.map(|(i, j)| format!("({i}, {j})")));
        }
        for (&a, ma) in &mats {
            for (&b, mb) in &mats {
                if a < b && a > 1 && num_integer::gcd(a, b) == 1 && a * b <= upto {
                    let ok = mat_mul(&ma.entries, &mb.entries) == mats[&(a * b)].entries;
                    report.push(&format!("B({a}) B({b}) = B({})", a * b), ok, None);
                }
                if a < b {
                    let ok = mat_mul(&ma.entries, &mb.entries) == mat_mul(&mb.entries, &ma.entries);
                    report.push(&format!("B({a}) B({b}) = B({b}) B({a})"), ok, None);
                }
            }
        }
        Ok(report)
    }

    /// Rank-one Hecke recursion `B(l^k) = B(l^{k-1}) B(l) - l B(l^{k-2})`
    /// for `k = 2..=kmax`.
    pub fn hecke_recursion(&self, l: i64, kmax: u32) -> Result<IdentityReport> {
        if self.set.g != 1 {
            return Err(Error::InvalidArgument("the Hecke recursion is only established for g = 1".into()));
        }
        if l == self.set.p || !is_prime(l as u64) {
            return Err(Error::InvalidArgument(format!("l = {l} must be a prime different from p")));
        }
        let mut report = IdentityReport::default();
        let bl = self.brandt(l)?;
        for k in 2..=kmax {
            let lhs = self.brandt(l.pow(k))?;
            let prev = self.brandt(l.pow(k - 1))?;
            let prev2 = self.brandt(l.pow(k - 2))?;
            let prod = mat_mul(&prev.entries, &bl.entries);
            let rhs: Vec<Vec<i64>> = prod
                .iter()
                .zip(&prev2.entries)
                .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - l * y).collect())
                .collect();
            let m = bl.with_entries(l.pow(k), rhs);
            report.push(
                &format!("B({l}^{k}) = B({l}^{}) B({l}) - {l} B({l}^{})", k - 1, k - 2),
                lhs.entries == m.entries,
                None,
            );
        }
        Ok(report)
    }
}

/// `B_g(0)_ij = 1 / e_j`; every row sums to the mass.
pub fn brandt_zero(set: &ClassSet) -> Vec<Vec<Rational>> {
    let row: Vec<Rational> = set.aut_counts.iter().map(|&e| Rational::new(1, e as i128)).collect();
    vec![row; set.h()]
}

/// Convenience wrapper: `B_g(n)` for a complete class set.
pub fn brandt(set: &ClassSet, n: i64) -> Result<BrandtMatrix> {
    BrandtContext::new(set.clone())?.brandt(n)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    fn push(&mut self, name: &str, passed: bool, witness: Option<String>) {
        self.checks.push(IdentityCheck { name: name.to_string(), passed, witness });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl std::fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            write!(f, "{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name)?;
            if let (false, Some(w)) = (c.passed, &c.witness) {
                write!(f, " [{w}]")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{class_set, ClassOptions};

    fn ctx(g: usize, p: i64) -> BrandtContext {
        BrandtContext::new(class_set(g, p, &ClassOptions::default()).unwrap()).unwrap()
    }

    #[test]
    fn neighbor_counts() {
        assert_eq!(neighbor_count(1, 2), 3);
        assert_eq!(neighbor_count(2, 2), 15);
        assert_eq!(neighbor_count(3, 2), 135);
        assert_eq!(neighbor_count(2, 3), 40);
    }

    #[test]
    fn rank_one_small_primes() {
        let c = ctx(1, 7);
        assert_eq!(c.brandt(2).unwrap().entries, vec![vec![3]]);
        let c = ctx(1, 11);
        let b7 = c.brandt(7).unwrap();
        assert!(permutation_equivalent(&b7.entries, &[vec![4, 4], vec![6, 2]]).is_some());
        assert!(c.verify_identities(10).unwrap().all_passed());
    }

    #[test]
    fn rank_two_p7() {
        let c = ctx(2, 7);
        let b2 = c.brandt(2).unwrap();
        assert!(permutation_equivalent(&b2.entries, &[vec![11, 4], vec![6, 9]]).is_some());
        assert_eq!(c.brandt(1).unwrap().entries, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn json_and_csv() {
        let c = ctx(1, 11);
        let b = c.brandt(3).unwrap();
        assert_eq!(BrandtMatrix::from_json(&b.to_json()).unwrap(), b);
        assert_eq!(b.to_csv().lines().count(), 2);
        assert!(BrandtMatrix::from_json("{\"format_version\": 1}").is_err());
    }

    #[test]
    fn zero_matrix_rows_sum_to_mass() {
        let s = class_set(2, 7, &ClassOptions::default()).unwrap();
        for row in brandt_zero(&s) {
            assert_eq!(row.iter().sum::<Rational>(), Rational::new(5, 96));
        }
    }

    #[test]
    fn permutation_search() {
        let a = vec![vec![1, 2, 0], vec![3, 4, 5], vec![0, 6, 7]];
        let b = vec![vec![7, 0, 6], vec![0, 1, 2], vec![5, 3, 4]];
        let s = permutation_equivalent(&a, &b).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a[s[i]][s[j]], b[i][j]);
            }
        }
        assert!(permutation_equivalent(&a, &[vec![1, 2, 0], vec![3, 4, 5], vec![0, 6, 8]]).is_none());
    }
}
