//! Isometries between hermitian forms: solutions of `M^dagger H_src M = n H_dst`.
//!
//! Columns of `M` are chosen one at a time. Column `k` must have norm
//! `n (H_dst)_kk` and satisfy the quaternion-valued constraints
//! `v_a^dagger H_src v_k = n (H_dst)_ak` against every earlier column. Those
//! constraints are Z-linear in `v_k`, so the candidates for column `k` form the
//! vectors of fixed norm in a coset of a rank `4(g - k)` sublattice, which is
//! enumerated directly instead of filtering a global candidate list.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::arith::{solve_integral, Rational};
use crate::error::{Error, Result};
use crate::hermitian::HermitianForm;
use crate::lattice::{coset_vectors_of_norm, QuadraticLattice};
use crate::matrix::{OMatrix, QMatrix};
use crate::order::{MaximalOrder, OrdElt};

/// One search problem `M^dagger H_src M = n H_dst`.
pub struct IsometrySearch<'a> {
    order: &'a MaximalOrder,
    g: usize,
    src: &'a HermitianForm,
    gram: Vec<Vec<i64>>,
    /// `targets[k][l] = n (H_dst)_{perm k, perm l}`
    targets: Vec<Vec<OrdElt>>,
    /// search position `k` fills column `perm[k]` of `M`
    perm: Vec<usize>,
    /// `n (H_dst)_{perm k, perm k}` as integers
    norms: Vec<i64>,
}

impl<'a> IsometrySearch<'a> {
    pub fn new(order: &'a MaximalOrder, src: &'a HermitianForm, dst: &HermitianForm, n: i64) -> Self {
        assert_eq!(src.g, dst.g, "forms of different rank");
        let g = src.g;
        let mut perm: Vec<usize> = (0..g).collect();
        perm.sort_by_key(|&k| (dst.diag(k, order), k));
        let targets = perm.iter().map(|&a| perm.iter().map(|&b| dst.get(a, b).map(|x| x * n)).collect()).collect();
        let norms = perm.iter().map(|&k| n * dst.diag(k, order)).collect();
        let gram = src.trace_gram(order).gram;
        IsometrySearch { order, g, src, gram, targets, perm, norms }
    }

    /// Candidates for the first column.
    pub fn first_column(&self) -> Vec<Vec<i64>> {
        QuadraticLattice::from_gram_i64(self.gram.clone()).vectors_of_norm(self.norms[0])
    }

    /// Candidates for search position `cols.len()` given the earlier columns.
    pub fn next_column(&self, cols: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let k = cols.len();
        if k == 0 {
            return self.first_column();
        }
        let g = self.g;
        let o = self.order;
        let mut rows: Vec<Vec<i128>> = Vec::with_capacity(4 * k);
        let mut rhs: Vec<i128> = Vec::with_capacity(4 * k);
        for (a, va) in cols.iter().enumerate() {
            // z = H_src v_a; constraint sum_c conj(z_c) w_c = target
            let blocks: Vec<[[i64; 4]; 4]> = (0..g)
                .map(|c| {
                    let mut z = [0i64; 4];
                    for d in 0..g {
                        let y = o.mul(self.src.get(c, d), &[va[4 * d], va[4 * d + 1], va[4 * d + 2], va[4 * d + 3]]);
                        for t in 0..4 {
                            z[t] += y[t];
                        }
                    }
                    o.left_mul_matrix(&o.conj(&z))
                })
                .collect();
            for t in 0..4 {
                rows.push((0..4 * g).map(|col| blocks[col / 4][t][col % 4] as i128).collect());
                rhs.push(self.targets[a][k][t] as i128);
            }
        }
        match solve_integral(&rows, &rhs, 4 * g) {
            Some((offset, kernel)) => coset_vectors_of_norm(&self.gram, &kernel, &offset, self.norms[k]),
            None => Vec::new(),
        }
    }

    fn assemble(&self, cols: &[Vec<i64>]) -> OMatrix {
        let mut ordered: Vec<&[i64]> = vec![&[]; self.g];
        for (k, c) in cols.iter().enumerate() {
            ordered[self.perm[k]] = c;
        }
        OMatrix::from_columns(self.g, &ordered)
    }

    /// Every solution, sorted.
    pub fn solutions(&self) -> Vec<OMatrix> {
        let first = self.first_column();
        let mut out: Vec<OMatrix> = first
            .par_iter()
            .flat_map_iter(|v| {
                let mut acc = Vec::new();
                self.extend(&mut vec![v.clone()], &mut acc, usize::MAX);
                acc
            })
            .collect();
        out.sort();
        out
    }

    /// Some solution, if one exists.
    pub fn find_one(&self) -> Option<OMatrix> {
        let mut acc = Vec::new();
        for v in self.first_column() {
            self.extend(&mut vec![v], &mut acc, 1);
            if !acc.is_empty() {
                return acc.pop();
            }
        }
        None
    }

    fn extend(&self, cols: &mut Vec<Vec<i64>>, out: &mut Vec<OMatrix>, limit: usize) {
        if cols.len() == self.g {
            out.push(self.assemble(cols));
            return;
        }
        for c in self.next_column(cols) {
            cols.push(c);
            self.extend(cols, out, limit);
            cols.pop();
            if out.len() >= limit {
                return;
            }
        }
    }

    /// Number of solutions, using orbits of `group` (acting on columns by
    /// `v -> U v`; it must stabilize the source form) to skip equivalent
    /// branches.
    pub fn count(&self, group: &[Vec<Vec<i64>>]) -> u64 {
        let idx: Vec<usize> = (0..group.len()).collect();
        self.count_from(&[], group, &idx)
    }

    fn count_from(&self, cols: &[Vec<i64>], group: &[Vec<Vec<i64>>], stab: &[usize]) -> u64 {
        let cands = self.next_column(cols);
        if cols.len() + 1 == self.g {
            return cands.len() as u64;
        }
        if stab.len() <= 1 {
            let run = |c: &Vec<i64>| {
                let mut cols = cols.to_vec();
                cols.push(c.clone());
                self.count_from(&cols, group, stab)
            };
            return if cols.is_empty() { cands.par_iter().map(run).sum() } else { cands.iter().map(run).sum() };
        }
        let set: HashSet<&[i64]> = cands.iter().map(|c| c.as_slice()).collect();
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        let mut reps: Vec<(Vec<i64>, u64, Vec<usize>)> = Vec::new();
        for c in &cands {
            if seen.contains(c) {
                continue;
            }
            let mut orbit: HashSet<Vec<i64>> = HashSet::new();
            let mut sub = Vec::new();
            for &u in stab {
                let img = apply(&group[u], c);
                debug_assert!(set.contains(img.as_slice()), "group does not preserve the candidates");
                if img == *c {
                    sub.push(u);
                }
                orbit.insert(img);
            }
            let size = orbit.len() as u64;
            seen.extend(orbit);
            reps.push((c.clone(), size, sub));
        }
        let run = |(c, size, sub): &(Vec<i64>, u64, Vec<usize>)| {
            let mut cols = cols.to_vec();
            cols.push(c.clone());
            size * self.count_from(&cols, group, sub)
        };
        if cols.is_empty() {
            reps.par_iter().map(run).sum()
        } else {
            reps.iter().map(run).sum()
        }
    }
}

fn apply(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

/// All `M` with `M^dagger H_src M = n H_dst`, each verified exactly.
pub fn isometry_solutions(
    order: &MaximalOrder,
    src: &HermitianForm,
    dst: &HermitianForm,
    n: i64,
) -> Result<Vec<OMatrix>> {
    let sols = IsometrySearch::new(order, src, dst, n).solutions();
    let want: Vec<OrdElt> = dst.entries.iter().map(|x| x.map(|c| c * n)).collect();
    for m in &sols {
        if src.transform(m, order).entries != want {
            return Err(Error::Internal("isometry search produced a non-solution".into()));
        }
    }
    Ok(sols)
}

/// `#{M : M^dagger H_src M = n H_dst}` without materializing the solutions.
pub fn isometry_count(
    order: &MaximalOrder,
    src: &HermitianForm,
    dst: &HermitianForm,
    n: i64,
    src_aut: &[OMatrix],
) -> u64 {
    let group: Vec<Vec<Vec<i64>>> = src_aut.iter().map(|u| u.coordinate_action(order)).collect();
    IsometrySearch::new(order, src, dst, n).count(&group)
}

/// Whether the two forms are isometric over the order.
pub fn is_isometric(order: &MaximalOrder, a: &HermitianForm, b: &HermitianForm) -> bool {
    IsometrySearch::new(order, a, b, 1).find_one().is_some()
}

/// The automorphism group `{U : U^dagger H U = H}`, sorted.
pub fn automorphism_group(order: &MaximalOrder, h: &HermitianForm) -> Result<Vec<OMatrix>> {
    isometry_solutions(order, h, h, 1)
}

/// A Z-linear map `x -> mat x / den` on flattened coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearMap {
    pub mat: Vec<Vec<i64>>,
    pub den: i64,
}

impl LinearMap {
    pub fn apply(&self, x: &[i64]) -> Option<Vec<i64>> {
        let mut out = Vec::with_capacity(self.mat.len());
        for row in &self.mat {
            let mut acc = 0i64;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            if acc % self.den != 0 {
                return None;
            }
            out.push(acc / self.den);
        }
        Some(out)
    }

    /// `M -> U M` on the flattened order coordinates of `g x g` matrices.
    pub fn left(order: &MaximalOrder, u: &QMatrix) -> Self {
        Self::build(order, u.g, |e| u.mul(e, order.algebra()))
    }

    /// `M -> M V` on the flattened order coordinates of `g x g` matrices.
    pub fn right(order: &MaximalOrder, v: &QMatrix) -> Self {
        Self::build(order, v.g, |e| e.mul(v, order.algebra()))
    }

    fn build(order: &MaximalOrder, g: usize, f: impl Fn(&QMatrix) -> QMatrix) -> Self {
        let dim = 4 * g * g;
        let mut cols: Vec<Vec<Rational>> = Vec::with_capacity(dim);
        for idx in 0..dim {
            let mut e = OMatrix::zero(g);
            e.entries[idx / 4][idx % 4] = 1;
            let img = f(&e.to_qmatrix(order));
            cols.push(img.entries.iter().flat_map(|x| order.rational_coords(x)).collect());
        }
        let den = cols.iter().flatten().fold(1i128, |acc, x| num_integer::lcm(acc, *x.denom()));
        let mat = (0..dim)
            .map(|r| (0..dim).map(|c| *(cols[c][r] * Rational::from_integer(den)).numer() as i64).collect())
            .collect();
        LinearMap { mat, den: den as i64 }
    }
}

/// Two-sided orbit data for a set of solutions under `(U, V): M -> U M V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    /// index of the least member in the solution list
    pub representative: usize,
    pub size: usize,
    /// `|left| |right| / size`
    pub stabilizer: usize,
    /// number of right orbits (big edges) inside this orbit
    pub right_orbits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitDecomposition {
    pub orbits: Vec<Orbit>,
    /// two-sided orbit of each solution
    pub orbit_of: Vec<usize>,
    /// right orbit of each solution
    pub right_orbit_of: Vec<usize>,
    pub right_orbit_count: usize,
}

/// Orbits of `solutions` (flattened coordinates) under the right action of
/// `right` and the two-sided action of `left x right`.
pub fn orbit_decomposition(
    solutions: &[Vec<i64>],
    left: &[LinearMap],
    right: &[LinearMap],
) -> Result<OrbitDecomposition> {
    let index: HashMap<&[i64], usize> = solutions.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    if index.len() != solutions.len() {
        return Err(Error::Internal("solution list has duplicates".into()));
    }
    let lookup = |x: Option<Vec<i64>>| -> Result<usize> {
        x.and_then(|v| index.get(v.as_slice()).copied())
            .ok_or_else(|| Error::Internal("group action does not stabilize the solution set".into()))
    };
    let unassigned = usize::MAX;
    let mut right_orbit_of = vec![unassigned; solutions.len()];
    let mut right_reps = Vec::new();
    for i in 0..solutions.len() {
        if right_orbit_of[i] != unassigned {
            continue;
        }
        let id = right_reps.len();
        right_reps.push(i);
        right_orbit_of[i] = id;
        for v in right {
            let j = lookup(v.apply(&solutions[i]))?;
            if right_orbit_of[j] != unassigned && right_orbit_of[j] != id {
                return Err(Error::Internal("right orbits overlap".into()));
            }
            right_orbit_of[j] = id;
        }
    }
    // left action permutes right orbits
    let mut two_sided_of_right = vec![unassigned; right_reps.len()];
    let mut orbits = Vec::new();
    for r in 0..right_reps.len() {
        if two_sided_of_right[r] != unassigned {
            continue;
        }
        let id = orbits.len();
        let mut members = HashSet::new();
        members.insert(r);
        for u in left {
            let j = lookup(u.apply(&solutions[right_reps[r]]))?;
            members.insert(right_orbit_of[j]);
        }
        for &m in &members {
            two_sided_of_right[m] = id;
        }
        orbits.push(members.len());
    }
    let orbit_of: Vec<usize> = right_orbit_of.iter().map(|&r| two_sided_of_right[r]).collect();
    let mut sizes = vec![0usize; orbits.len()];
    let mut reps = vec![usize::MAX; orbits.len()];
    for (i, &o) in orbit_of.iter().enumerate() {
        sizes[o] += 1;
        reps[o] = reps[o].min(i);
    }
    let order = left.len().max(1) * right.len().max(1);
    let orbits = orbits
        .into_iter()
        .enumerate()
        .map(|(o, right_orbits)| {
            if !order.is_multiple_of(sizes[o]) {
                return Err(Error::Internal("orbit size does not divide the group order".into()));
            }
            Ok(Orbit { representative: reps[o], size: sizes[o], stabilizer: order / sizes[o], right_orbits })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrbitDecomposition { orbits, orbit_of, right_orbit_of, right_orbit_count: right_reps.len() })
}

/// Flattened order coordinates of a matrix (row-major entries).
pub fn flatten(m: &OMatrix) -> Vec<i64> {
    m.entries.iter().flat_map(|x| x.iter().copied()).collect()
}
