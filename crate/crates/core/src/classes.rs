//! Class sets: right-ideal classes (rank one) and classes of hermitian forms
//! of Haupt norm 1 (rank at least two), each certified complete by the mass.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{bernoulli, hnf, is_prime, Rational};
use crate::error::{Error, Result};
use crate::hermitian::HermitianForm;
use crate::ideal::IdealLattice;
use crate::isometry::{automorphism_group, is_isometric};
use crate::lattice::QuadraticLattice;
use crate::matrix::OMatrix;
use crate::order::{maximal_order, MaximalOrder, OrdElt};
use crate::quaternion::algebra_for_prime;

/// Version tag written into every serialized class set.
pub const FORMAT_VERSION: u32 = 1;

/// `sum 1/e_j` over all classes of rank `g` for `H_p`.
pub fn mass(g: usize, p: i64) -> Rational {
    let b = bernoulli(2 * g);
    let mut acc: Ratio<BigInt> = Ratio::one();
    for k in 1..=g {
        // zeta(1 - 2k) = -B_2k / 2k
        acc *= -b[2 * k].clone() / Ratio::from_integer(BigInt::from(2 * k));
        let pk = BigInt::from(p).pow(k as u32);
        let sign = if k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        acc *= Ratio::from_integer(pk + sign);
    }
    acc /= Ratio::from_integer(BigInt::from(2).pow(g as u32));
    if (g * (g + 1) / 2) % 2 == 1 {
        acc = -acc;
    }
    Rational::new(acc.numer().to_i128().expect("mass fits"), acc.denom().to_i128().expect("mass fits"))
}

/// Tuning for class enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassOptions {
    /// length of the theta-series prefix used as an invariant
    pub theta_terms: usize,
    /// largest diagonal bound tried before giving up (rank >= 2)
    pub max_bound: i64,
}

impl Default for ClassOptions {
    fn default() -> Self {
        ClassOptions { theta_terms: 8, max_bound: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassReps {
    Ideals(Vec<IdealLattice>),
    Forms(Vec<HermitianForm>),
}

impl ClassReps {
    pub fn len(&self) -> usize {
        match self {
            ClassReps::Ideals(v) => v.len(),
            ClassReps::Forms(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A complete, ordered set of class representatives with automorphism counts.
#[derive(Clone, Debug)]
pub struct ClassSet {
    pub g: usize,
    pub p: i64,
    pub order: MaximalOrder,
    pub reps: ClassReps,
    /// `e_j`: full automorphism (unit) group orders, including `-1`
    pub aut_counts: Vec<u64>,
    pub mass: Rational,
}

impl PartialEq for ClassSet {
    fn eq(&self, other: &Self) -> bool {
        self.g == other.g
            && self.p == other.p
            && self.reps == other.reps
            && self.aut_counts == other.aut_counts
            && self.mass == other.mass
    }
}

impl ClassSet {
    pub fn h(&self) -> usize {
        self.reps.len()
    }

    pub fn forms(&self) -> Option<&[HermitianForm]> {
        match &self.reps {
            ClassReps::Forms(v) => Some(v),
            ClassReps::Ideals(_) => None,
        }
    }

    pub fn ideals(&self) -> Option<&[IdealLattice]> {
        match &self.reps {
            ClassReps::Ideals(v) => Some(v),
            ClassReps::Forms(_) => None,
        }
    }

    /// `sum 1/e_j`.
    pub fn weight_sum(&self) -> Rational {
        self.aut_counts.iter().map(|&e| Rational::new(1, e as i128)).sum()
    }

    /// Whether the weight sum equals the mass exactly.
    pub fn mass_certified(&self) -> bool {
        self.weight_sum() == self.mass
    }

    pub fn to_json(&self) -> String {
        let reps = match &self.reps {
            ClassReps::Ideals(v) => v.iter().map(|i| vec![i.basis.to_vec()]).collect(),
            ClassReps::Forms(v) => {
                v.iter().map(|f| (0..f.g).map(|a| (0..f.g).map(|b| *f.get(a, b)).collect()).collect()).collect()
            }
        };
        let rec = ClassSetRecord {
            format_version: FORMAT_VERSION,
            g: self.g,
            p: self.p,
            h: self.h(),
            mass: crate::serial::rational::format(&self.mass),
            reps,
            aut_counts: self.aut_counts.clone(),
        };
        serde_json::to_string_pretty(&rec).expect("class sets serialize")
    }

    /// Parses and validates a serialized class set.
    pub fn from_json(s: &str) -> Result<Self> {
        let rec: ClassSetRecord = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        if rec.format_version != FORMAT_VERSION {
            return Err(Error::Schema(format!("unsupported format version {}", rec.format_version)));
        }
        if rec.reps.len() != rec.h || rec.aut_counts.len() != rec.h || rec.g == 0 {
            return Err(Error::Schema("inconsistent class count".into()));
        }
        let order = maximal_order(&algebra_for_prime(rec.p)?)?;
        let reps = if rec.g == 1 {
            let mut out = Vec::new();
            for r in &rec.reps {
                if r.len() != 1 || r[0].len() != 4 {
                    return Err(Error::Schema("ideal basis must have four elements".into()));
                }
                let i = IdealLattice::from_generators(&r[0]).map_err(|e| Error::Schema(e.to_string()))?;
                if i.basis.to_vec() != r[0] || !i.is_right_ideal(&order) {
                    return Err(Error::Schema("ideal basis is not a reduced right ideal basis".into()));
                }
                out.push(i);
            }
            ClassReps::Ideals(out)
        } else {
            let mut out = Vec::new();
            for r in &rec.reps {
                if r.len() != rec.g || r.iter().any(|row| row.len() != rec.g) {
                    return Err(Error::Schema("form has the wrong shape".into()));
                }
                let f = HermitianForm::new(rec.g, r.concat(), &order).map_err(|e| Error::Schema(e.to_string()))?;
                out.push(f);
            }
            ClassReps::Forms(out)
        };
        let mass_value = crate::serial::rational::parse(&rec.mass).map_err(Error::Schema)?;
        let set = ClassSet { g: rec.g, p: rec.p, order, reps, aut_counts: rec.aut_counts, mass: mass_value };
        if set.mass != mass(set.g, set.p) || !set.mass_certified() {
            return Err(Error::Schema("mass certificate does not hold".into()));
        }
        Ok(set)
    }
}

#[derive(Serialize, Deserialize)]
struct ClassSetRecord {
    format_version: u32,
    g: usize,
    p: i64,
    h: usize,
    mass: String,
    reps: Vec<Vec<Vec<OrdElt>>>,
    aut_counts: Vec<u64>,
}

/// Class set of rank `g` for the maximal order of `H_p`.
pub fn class_set(g: usize, p: i64, opts: &ClassOptions) -> Result<ClassSet> {
    if !is_prime(p.max(0) as u64) {
        return Err(Error::NotPrime(p));
    }
    if g == 0 {
        return Err(Error::InvalidArgument("g must be positive".into()));
    }
    let order = maximal_order(&algebra_for_prime(p)?)?;
    if g == 1 {
        right_ideal_classes(&order, opts)
    } else {
        hermitian_class_reps(g, &order, opts)
    }
}

/// Right-ideal classes by breadth-first neighbor search at the least prime
/// `q != p`, stopping once the unit weights reach the mass.
pub fn right_ideal_classes(order: &MaximalOrder, opts: &ClassOptions) -> Result<ClassSet> {
    let p = order.p();
    let q = if p == 2 { 3 } else { 2 };
    let target = mass(1, p);
    let start = IdealLattice::unit();
    let mut reps = vec![start.clone()];
    let mut keys = vec![start.theta_prefix(order, opts.theta_terms)];
    let mut units = vec![start.unit_count(order)];
    let mut sum = Rational::new(1, units[0] as i128);
    let mut queue = std::collections::VecDeque::from([start]);
    'outer: while sum < target {
        let Some(i) = queue.pop_front() else { break };
        for j in i.neighbors(order, q)? {
            let j = j.reduce(order)?;
            let key = j.theta_prefix(order, opts.theta_terms);
            let known = reps.iter().zip(&keys).any(|(r, k)| *k == key && r.is_equivalent(&j, order));
            if known {
                continue;
            }
            let e = j.unit_count(order);
            sum += Rational::new(1, e as i128);
            reps.push(j.clone());
            keys.push(key);
            units.push(e);
            queue.push_back(j);
            if sum >= target {
                break 'outer;
            }
        }
    }
    if sum != target {
        return Err(Error::Internal(format!("ideal classes have weight {sum}, expected mass {target}")));
    }
    let mut idx: Vec<usize> = (0..reps.len()).collect();
    idx.sort_by(|&a, &b| keys[b].cmp(&keys[a]).then_with(|| reps[a].cmp(&reps[b])));
    Ok(ClassSet {
        g: 1,
        p,
        order: order.clone(),
        reps: ClassReps::Ideals(idx.iter().map(|&i| reps[i].clone()).collect()),
        aut_counts: idx.iter().map(|&i| units[i]).collect(),
        mass: target,
    })
}

/// A class of rank `g - 1` forms used as the upper-left block of candidates.
struct Block {
    form: HermitianForm,
    hnm: i64,
    /// lattice of `adj(A) = HNm(A) A^{-1}`
    adj: QuadraticLattice,
    /// actions `x -> U^dagger x` for `U` in `Aut(A)`
    aut_dagger: Vec<Vec<Vec<i64>>>,
    /// HNF basis of `A O^r`, upper triangular
    image: Vec<Vec<i128>>,
}

impl Block {
    fn new(form: HermitianForm, order: &MaximalOrder) -> Result<Self> {
        let hnm = form.haupt_norm(order)? as i64;
        let inv =
            form.to_qmatrix(order).inverse(order.algebra()).ok_or_else(|| Error::Internal("singular block".into()))?;
        let adj = inv
            .scale(Rational::from_integer(hnm as i128))
            .to_omatrix(order)
            .ok_or_else(|| Error::Internal("adjugate is not integral".into()))?;
        let adj = HermitianForm { g: form.g, entries: adj.entries }.trace_gram(order);
        let aut_dagger =
            automorphism_group(order, &form)?.iter().map(|u| u.dagger(order).coordinate_action(order)).collect();
        let act = form.as_omatrix().coordinate_action(order);
        let n = act.len();
        let cols: Vec<Vec<i128>> = (0..n).map(|c| (0..n).map(|r| act[r][c] as i128).collect()).collect();
        let image = hnf(&cols, n);
        if image.len() != n {
            return Err(Error::Internal("block is singular".into()));
        }
        Ok(Block { form, hnm, adj, aut_dagger, image })
    }

    /// Least nonnegative representative of `x + A O^r`.
    fn reduce(&self, x: &mut [i64]) {
        for (i, row) in self.image.iter().enumerate() {
            let q = (x[i] as i128).div_euclid(row[i]);
            if q != 0 {
                for (c, v) in row.iter().enumerate().skip(i) {
                    x[c] -= (q * v) as i64;
                }
            }
        }
    }

    /// Forms `[[A, x], [x^dagger, c]]` of Haupt norm `target`, one for each
    /// orbit of `x` in `O^r / A O^r` under `x -> U^dagger x u` (`U` in
    /// `Aut(A)`, `u` a unit). Shifting `x` by `A y` is a change of basis, and
    /// `c = (target + x^dagger adj(A) x) / HNm(A)` must be integral.
    fn glue(&self, target: i64, order: &MaximalOrder, right_units: &[[[i64; 4]; 4]]) -> Vec<HermitianForm> {
        let r = self.form.g;
        let n = 4 * r;
        let radix: Vec<i64> = (0..n).map(|i| self.image[i][i] as i64).collect();
        let total: i64 = radix.iter().product();
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        let mut out = Vec::new();
        for code in 0..total {
            let mut x = vec![0i64; n];
            let mut rest = code;
            for i in 0..n {
                x[i] = rest % radix[i];
                rest /= radix[i];
            }
            if seen.contains(&x) {
                continue;
            }
            for act in &self.aut_dagger {
                let y: Vec<i64> = act.iter().map(|row| row.iter().zip(&x).map(|(a, b)| a * b).sum()).collect();
                for ru in right_units {
                    let mut z = vec![0i64; n];
                    for blk in 0..r {
                        for t in 0..4 {
                            z[4 * blk + t] = (0..4).map(|s| ru[t][s] * y[4 * blk + s]).sum();
                        }
                    }
                    self.reduce(&mut z);
                    seen.insert(z);
                }
            }
            let num = target as i128 + self.adj.raw_norm(&x);
            if num % self.hnm as i128 != 0 {
                continue;
            }
            let c = (num / self.hnm as i128) as i64;
            let g = r + 1;
            let mut entries = vec![[0i64; 4]; g * g];
            for a in 0..r {
                for b in 0..r {
                    entries[a * g + b] = *self.form.get(a, b);
                }
                let xa = [x[4 * a], x[4 * a + 1], x[4 * a + 2], x[4 * a + 3]];
                entries[a * g + r] = xa;
                entries[r * g + a] = order.conj(&xa);
            }
            entries[r * g + r] = order.one().map(|v| v * c);
            out.push(HermitianForm { g, entries });
        }
        out
    }
}

/// Classes of positive-definite hermitian `g x g` forms of Haupt norm 1.
///
/// In a basis whose last dual vector has norm `m`, a form splits as
/// `[[A, x], [x^dagger, c]]` with `HNm(A) = m`, and the Haupt norm condition
/// `m c - x^dagger adj(A) x = 1` fixes `c` once `x` is known modulo `A O^{g-1}`.
/// Blocks of rank one are `[m]`; blocks of rank two are glued the same way
/// from `[a]` with Haupt norm `m`. Level `L` adds every block with
/// `max(a, m) = L`, and levels grow until the weights reach the mass.
pub fn hermitian_class_reps(g: usize, order: &MaximalOrder, opts: &ClassOptions) -> Result<ClassSet> {
    if !(2..=3).contains(&g) {
        return Err(Error::InvalidArgument("hermitian class sets are built for g = 2 or 3".into()));
    }
    let p = order.p();
    let target = mass(g, p);
    let key_terms = if g >= 3 { opts.theta_terms.min(3) } else { opts.theta_terms };
    let right_units: Vec<[[i64; 4]; 4]> = order.units().iter().map(|u| right_mul_matrix(order, u)).collect();
    let mut scalars: Vec<Block> = Vec::new();
    let mut blocks: Vec<HermitianForm> = Vec::new();
    let mut block_index: HashMap<(i64, Vec<u64>), Vec<usize>> = HashMap::new();
    let mut found: Vec<(HermitianForm, u64)> = Vec::new();
    let mut index: HashMap<Vec<u64>, Vec<usize>> = HashMap::new();
    let mut sum = Rational::zero();
    for level in 1..=opts.max_bound {
        scalars.push(Block::new(HermitianForm::scalar(level, order), order)?);
        let fresh: Vec<HermitianForm> = if g == 2 {
            vec![HermitianForm::scalar(level, order)]
        } else {
            // rank-two blocks with max(a, m) = level
            let mut cands = Vec::new();
            for (ai, s) in scalars.iter().enumerate() {
                let a = ai as i64 + 1;
                let ms: Vec<i64> = if a == level { (1..=level).collect() } else { vec![level] };
                for m in ms {
                    cands.extend(s.glue(m, order, &right_units).into_iter().map(|f| reduce_form(&f, order)));
                }
            }
            let mut fresh = Vec::new();
            for f in cands {
                let m = f.haupt_norm(order)? as i64;
                let key = (m, f.trace_gram(order).theta_prefix(key_terms));
                let bucket = block_index.entry(key).or_default();
                if bucket.iter().any(|&i| is_isometric(order, &blocks[i], &f)) {
                    continue;
                }
                bucket.push(blocks.len());
                blocks.push(f.clone());
                fresh.push(f);
            }
            fresh
        };
        for a in fresh {
            let block = Block::new(a, order)?;
            let cands: Vec<(Vec<u64>, HermitianForm)> = block
                .glue(1, order, &right_units)
                .into_par_iter()
                .map(|h| {
                    let h = reduce_form(&h, order);
                    (h.trace_gram(order).theta_prefix(key_terms), h)
                })
                .collect();
            for (key, h) in cands {
                let bucket = index.entry(key).or_default();
                if bucket.iter().any(|&i| is_isometric(order, &found[i].0, &h)) {
                    continue;
                }
                let e = automorphism_group(order, &h)?.len() as u64;
                bucket.push(found.len());
                found.push((h, e));
                sum += Rational::new(1, e as i128);
            }
            if sum >= target {
                break;
            }
        }
        if sum >= target {
            break;
        }
    }
    if sum < target {
        return Err(Error::EnumerationCeiling(format!(
            "level {} reached with weight {sum} of mass {target}",
            opts.max_bound
        )));
    }
    if sum != target {
        return Err(Error::Internal(format!("class weights {sum} exceed the mass {target}")));
    }
    let mut keyed: Vec<(Vec<u64>, HermitianForm, u64)> =
        found.into_iter().map(|(h, e)| (h.trace_gram(order).theta_prefix(opts.theta_terms), h, e)).collect();
    keyed.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    Ok(ClassSet {
        g,
        p,
        order: order.clone(),
        aut_counts: keyed.iter().map(|k| k.2).collect(),
        reps: ClassReps::Forms(keyed.into_iter().map(|k| k.1).collect()),
        mass: target,
    })
}

/// An equivalent form with small diagonal: columns are sorted by norm and
/// each column is reduced against every other by the nearest element of the
/// order, until no step lowers a diagonal entry.
pub fn reduce_form(h: &HermitianForm, order: &MaximalOrder) -> HermitianForm {
    let g = h.g;
    let mut cur = h.clone();
    let alg = order.algebra();
    loop {
        let mut perm: Vec<usize> = (0..g).collect();
        perm.sort_by_key(|&k| (cur.diag(k, order), k));
        if perm.iter().enumerate().any(|(i, &k)| i != k) {
            let mut u = OMatrix::zero(g);
            for (i, &k) in perm.iter().enumerate() {
                u.entries[k * g + i] = order.one();
            }
            cur = cur.transform(&u, order);
        }
        let mut improved = false;
        for b in 0..g {
            for a in 0..g {
                if a == b {
                    continue;
                }
                let haa = cur.diag(a, order);
                // minimize H_bb - trd(H_ba q) + H_aa nrd(q) over q in O
                let t = order.rational_coords(&order.element(cur.get(a, b)).scale(Rational::new(1, haa as i128)));
                let base: [i64; 4] = t.map(|c| crate::arith::div_round(*c.numer(), *c.denom()) as i64);
                let hba = order.element(cur.get(b, a));
                let value = |q: &OrdElt| -> Rational {
                    let qq = order.element(q);
                    Rational::from_integer(haa as i128) * alg.nrd(&qq) - alg.mul(&hba, &qq).trd()
                };
                let mut best: Option<(Rational, OrdElt)> = None;
                for code in 0..81 {
                    let mut q = base;
                    let mut c = code;
                    for s in q.iter_mut() {
                        *s += c % 3 - 1;
                        c /= 3;
                    }
                    let v = value(&q);
                    if v < Rational::zero() && best.as_ref().is_none_or(|(bv, bq)| (v, q) < (*bv, *bq)) {
                        best = Some((v, q));
                    }
                }
                if let Some((_, q)) = best {
                    let mut u = OMatrix::identity(g, order);
                    u.entries[a * g + b] = q.map(|x| -x);
                    cur = cur.transform(&u, order);
                    improved = true;
                }
            }
        }
        if !improved {
            return cur;
        }
    }
}

/// Matrix of `y -> y u` on order coordinates.
fn right_mul_matrix(order: &MaximalOrder, u: &OrdElt) -> [[i64; 4]; 4] {
    let mut out = [[0i64; 4]; 4];
    for s in 0..4 {
        let mut e = [0i64; 4];
        e[s] = 1;
        let y = order.mul(&e, u);
        for t in 0..4 {
            out[t][s] = y[t];
        }
    }
    out
}

/// Whether every pair of representatives is inequivalent.
pub fn pairwise_inequivalent(set: &ClassSet) -> bool {
    let o = &set.order;
    match &set.reps {
        ClassReps::Ideals(v) => (0..v.len()).all(|i| (i + 1..v.len()).all(|j| !v[i].is_equivalent(&v[j], o))),
        ClassReps::Forms(v) => (0..v.len()).all(|i| (i + 1..v.len()).all(|j| !is_isometric(o, &v[i], &v[j]))),
    }
}

/// Index of the identity form (or the order itself for rank one).
pub fn identity_index(set: &ClassSet) -> Option<usize> {
    match &set.reps {
        ClassReps::Ideals(v) => v.iter().position(|i| *i == IdealLattice::unit()),
        ClassReps::Forms(v) => v.iter().position(|f| *f == HermitianForm::identity(set.g, &set.order)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_values() {
        assert_eq!(mass(1, 7), Rational::new(1, 4));
        assert_eq!(mass(2, 7), Rational::new(5, 96));
        assert_eq!(mass(2, 11), Rational::new(61, 288));
        for p in [2i64, 3, 5, 7, 11, 13, 101] {
            let p128 = p as i128;
            assert_eq!(mass(1, p), Rational::new(p128 - 1, 24));
            assert_eq!(mass(2, p), Rational::new((p128 - 1) * (p128 * p128 + 1), 5760));
            assert_eq!(mass(3, p), Rational::new((p128 - 1) * (p128 * p128 + 1) * (p128.pow(3) - 1), 2903040));
        }
    }

    #[test]
    fn small_ideal_class_sets() {
        let opts = ClassOptions::default();
        for (p, h) in [(2, 1), (3, 1), (5, 1), (7, 1), (11, 2), (13, 1), (23, 3), (37, 3)] {
            let s = class_set(1, p, &opts).unwrap();
            assert_eq!(s.h(), h, "p = {p}");
            assert!(s.mass_certified());
            assert!(pairwise_inequivalent(&s));
        }
        assert_eq!(class_set(1, 2, &opts).unwrap().aut_counts, vec![24]);
    }

    #[test]
    fn rank_two_class_sets() {
        let opts = ClassOptions::default();
        let s = class_set(2, 7, &opts).unwrap();
        assert_eq!(s.h(), 2);
        assert!(s.mass_certified());
        assert_eq!(identity_index(&s), Some(0));
        let s = class_set(2, 11, &opts).unwrap();
        assert_eq!(s.h(), 5);
        assert!(pairwise_inequivalent(&s));
    }

    #[test]
    fn json_round_trip() {
        let opts = ClassOptions::default();
        for (g, p) in [(1, 11), (2, 7)] {
            let s = class_set(g, p, &opts).unwrap();
            let back = ClassSet::from_json(&s.to_json()).unwrap();
            assert_eq!(back, s);
        }
        assert!(ClassSet::from_json("{}").is_err());
        let s = class_set(1, 11, &opts).unwrap();
        let tampered = s.to_json().replace("\"aut_counts\": [\n    4", "\"aut_counts\": [\n    5");
        assert!(ClassSet::from_json(&tampered).is_err());
    }

    #[test]
    fn composite_rejected() {
        assert!(matches!(class_set(2, 4, &ClassOptions::default()), Err(Error::NotPrime(4))));
    }
}
