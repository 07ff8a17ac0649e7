//! Big, little and enhanced isogeny graphs, built from the solution sets
//! `{M : M^dagger H_i M = l H_j}` and their orbits under automorphisms.

use std::collections::{HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{is_prime, Rational};
use crate::brandt::BrandtContext;
use crate::classes::ClassReps;
use crate::error::{Error, Result};
use crate::isometry::{flatten, isometry_solutions, orbit_decomposition, LinearMap, OrbitDecomposition};
use crate::matrix::QMatrix;
use crate::order::OrdElt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Big,
    Little,
    Enhanced,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    pub weight: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: u64,
    pub opposite: Option<usize>,
    pub half: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedGraph {
    pub kind: GraphKind,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

impl WeightedGraph {
    /// Number of edges `i -> j`.
    pub fn adjacency(&self) -> Vec<Vec<i64>> {
        let n = self.vertices.len();
        let mut a = vec![vec![0i64; n]; n];
        for e in &self.edges {
            a[e.from][e.to] += 1;
        }
        a
    }

    /// `sum w(v_i) / w(e)` over edges `e: i -> j`.
    pub fn weighted_adjacency(&self) -> Vec<Vec<Rational>> {
        let n = self.vertices.len();
        let mut a = vec![vec![Rational::from_integer(0); n]; n];
        for e in &self.edges {
            a[e.from][e.to] += Rational::new(self.vertices[e.from].weight as i128, e.weight as i128);
        }
        a
    }

    /// Every vertex reaches every other along directed edges.
    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 {
            return true;
        }
        let mut fwd = vec![Vec::new(); n];
        let mut bwd = vec![Vec::new(); n];
        for e in &self.edges {
            fwd[e.from].push(e.to);
            bwd[e.to].push(e.from);
        }
        let reach = |adj: &Vec<Vec<usize>>| {
            let mut seen = vec![false; n];
            let mut queue = VecDeque::from([0usize]);
            seen[0] = true;
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(&fwd) && reach(&bwd)
    }

    /// Two-colorable as an undirected graph; a loop rules it out.
    pub fn is_bipartite(&self) -> bool {
        let n = self.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            adj[e.from].push(e.to);
            adj[e.to].push(e.from);
        }
        let mut color = vec![u8::MAX; n];
        for s in 0..n {
            if color[s] != u8::MAX {
                continue;
            }
            color[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if color[w] == u8::MAX {
                        color[w] = 1 - color[v];
                        queue.push_back(w);
                    } else if color[w] == color[v] {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Opposites form a weight-preserving involution with `half` exactly on
    /// fixed points, reversing endpoints. Vacuous when no edge has an opposite.
    pub fn opposites_consistent(&self) -> bool {
        self.edges.iter().enumerate().all(|(k, e)| match e.opposite {
            None => !e.half,
            Some(o) => {
                let f = &self.edges[o];
                f.opposite == Some(k) && f.weight == e.weight && f.from == e.to && f.to == e.from && e.half == (o == k)
            }
        })
    }

    /// Every edge weight divides the weight of its origin.
    pub fn weights_divide(&self) -> bool {
        self.edges.iter().all(|e| self.vertices[e.from].weight.is_multiple_of(e.weight))
    }

    pub fn half_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.half).count()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            vertices: &'a [Vertex],
            edges: &'a [Edge],
        }
        serde_json::to_string_pretty(&Record { vertices: &self.vertices, edges: &self.edges })
            .expect("graphs serialize")
    }

    pub fn from_json(kind: GraphKind, s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Record {
            vertices: Vec<Vertex>,
            edges: Vec<Edge>,
        }
        let r: Record = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        let n = r.vertices.len();
        let ok = r.vertices.iter().enumerate().all(|(i, v)| v.id == i && v.weight > 0)
            && r.edges
                .iter()
                .all(|e| e.from < n && e.to < n && e.weight > 0 && e.opposite.is_none_or(|o| o < r.edges.len()));
        if !ok {
            return Err(Error::Schema("graph references are out of range".into()));
        }
        Ok(WeightedGraph { kind, vertices: r.vertices, edges: r.edges })
    }

    /// Plain directed DOT with weight attributes; half-edges are marked.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph G {\n");
        for v in &self.vertices {
            out.push_str(&format!("  v{} [label=\"{} (w={})\", weight={}];\n", v.id, v.id, v.weight, v.weight));
        }
        for (k, e) in self.edges.iter().enumerate() {
            let mut attrs = format!("id={k}, weight={}, label=\"{}\"", e.weight, e.weight);
            if let Some(o) = e.opposite {
                attrs.push_str(&format!(", opposite={o}"));
            }
            if e.half {
                attrs.push_str(", half=true, style=dashed");
            }
            out.push_str(&format!("  v{} -> v{} [{attrs}];\n", e.from, e.to));
        }
        out.push_str("}\n");
        out
    }
}

/// Solutions and orbit data for one ordered pair of classes.
struct PairData {
    index: HashMap<Vec<i64>, usize>,
    dec: OrbitDecomposition,
    sols: Vec<Vec<i64>>,
}

struct EdgeSets {
    h: usize,
    weights: Vec<u64>,
    /// `pairs[i][j]` for edges `i -> j`
    pairs: Vec<Vec<PairData>>,
    /// dual of a flattened solution for `i -> j`, living in `j -> i`
    dual: DualMap,
}

type DualMap = Box<dyn Fn(usize, usize, &[i64]) -> Vec<i64> + Sync>;

/// flattened solutions for one ordered pair of classes
type Solutions = Vec<Vec<i64>>;

fn check_degree(ctx: &BrandtContext, l: i64) -> Result<()> {
    let p = ctx.class_set().p;
    if l == p || l < 2 || !is_prime(l as u64) {
        return Err(Error::InvalidArgument(format!("l = {l} must be a prime different from p = {p}")));
    }
    Ok(())
}

fn edge_sets(ctx: &BrandtContext, l: i64) -> Result<EdgeSets> {
    check_degree(ctx, l)?;
    let set = ctx.class_set();
    let order = set.order.clone();
    let h = set.h();
    let (left, sols, dual): (Vec<Vec<LinearMap>>, Vec<Solutions>, DualMap) = match &set.reps {
        ClassReps::Ideals(ideals) => {
            let left = ideals
                .iter()
                .map(|i| {
                    let s = Rational::new(1, i.norm as i128);
                    i.left_unit_numerators(&order)
                        .iter()
                        .map(|x| {
                            let u = QMatrix { g: 1, entries: vec![order.element(x).scale(s)] };
                            LinearMap::left(&order, &u)
                        })
                        .collect()
                })
                .collect();
            let sols = (0..h * h)
                .into_par_iter()
                .map(|k| {
                    let (i, j) = (k / h, k % h);
                    let lat = ideals[i].times_conj(&ideals[j], &order);
                    lat.elements_of_norm(&order, l * lat.norm).iter().map(|x| x.to_vec()).collect()
                })
                .collect();
            let o = order.clone();
            let dual = Box::new(move |_: usize, _: usize, m: &[i64]| {
                let x: OrdElt = [m[0], m[1], m[2], m[3]];
                o.conj(&x).to_vec()
            });
            (left, sols, dual)
        }
        ClassReps::Forms(forms) => {
            let auts = ctx.automorphisms()?;
            let left = auts
                .iter()
                .map(|a| a.iter().map(|u| LinearMap::left(&order, &u.to_qmatrix(&order))).collect())
                .collect();
            let sols = (0..h * h)
                .into_par_iter()
                .map(|k| {
                    let (i, j) = (k / h, k % h);
                    isometry_solutions(&order, &forms[i], &forms[j], l)
                        .map(|v| v.iter().map(flatten).collect::<Vec<_>>())
                })
                .collect::<Result<Vec<_>>>()?;
            let inverses = forms
                .iter()
                .map(|f| {
                    f.integral_inverse(&order).ok_or_else(|| Error::Internal("form inverse is not integral".into()))
                })
                .collect::<Result<Vec<_>>>()?;
            let mats: Vec<_> = forms.iter().map(|f| f.as_omatrix()).collect();
            let o = order.clone();
            let g = set.g;
            let dual = Box::new(move |i: usize, j: usize, m: &[i64]| {
                let cols: Vec<Vec<i64>> = (0..g)
                    .map(|b| (0..g).flat_map(|a| m[4 * (a * g + b)..4 * (a * g + b) + 4].to_vec()).collect())
                    .collect();
                let refs: Vec<&[i64]> = cols.iter().map(|c| c.as_slice()).collect();
                let mm = crate::matrix::OMatrix::from_columns(g, &refs);
                flatten(&inverses[j].mul(&mm.dagger(&o), &o).mul(&mats[i], &o))
            });
            (left, sols, dual)
        }
    };
    let right: Vec<Vec<LinearMap>> = match &set.reps {
        ClassReps::Ideals(ideals) => ideals
            .iter()
            .map(|i| {
                let s = Rational::new(1, i.norm as i128);
                i.left_unit_numerators(&order)
                    .iter()
                    .map(|x| LinearMap::right(&order, &QMatrix { g: 1, entries: vec![order.element(x).scale(s)] }))
                    .collect()
            })
            .collect(),
        ClassReps::Forms(_) => ctx
            .automorphisms()?
            .iter()
            .map(|a| a.iter().map(|u| LinearMap::right(&order, &u.to_qmatrix(&order))).collect())
            .collect(),
    };
    let mut pairs: Vec<Vec<PairData>> = Vec::with_capacity(h);
    let mut flat = sols.into_iter();
    for i in 0..h {
        let mut row = Vec::with_capacity(h);
        for j in 0..h {
            let s = flat.next().expect("one solution list per pair");
            let dec = orbit_decomposition(&s, &left[i], &right[j])?;
            let index = s.iter().enumerate().map(|(k, v)| (v.clone(), k)).collect();
            row.push(PairData { index, dec, sols: s });
        }
        pairs.push(row);
    }
    Ok(EdgeSets { h, weights: set.aut_counts.clone(), pairs, dual })
}

/// The big graph: one edge per right orbit, i.e. `B_g(l)_ij` edges `i -> j`.
pub fn big_graph(ctx: &BrandtContext, l: i64) -> Result<WeightedGraph> {
    check_degree(ctx, l)?;
    let b = ctx.brandt(l)?;
    let vertices = (0..b.h).map(|id| Vertex { id, weight: 1 }).collect();
    let mut edges = Vec::new();
    for i in 0..b.h {
        for j in 0..b.h {
            for _ in 0..b.entries[i][j] {
                edges.push(Edge { from: i, to: j, weight: 1, opposite: None, half: false });
            }
        }
    }
    Ok(WeightedGraph { kind: GraphKind::Big, vertices, edges })
}

/// The little graph: one edge per two-sided orbit, weighted by its stabilizer,
/// with opposites given by the dual isogeny.
pub fn little_graph(ctx: &BrandtContext, l: i64) -> Result<WeightedGraph> {
    let es = edge_sets(ctx, l)?;
    let h = es.h;
    // edge id of (i, j, orbit)
    let mut ids: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); h]; h];
    let mut edges = Vec::new();
    for i in 0..h {
        for j in 0..h {
            for orbit in &es.pairs[i][j].dec.orbits {
                ids[i][j].push(edges.len());
                edges.push(Edge { from: i, to: j, weight: orbit.stabilizer as u64, opposite: None, half: false });
            }
        }
    }
    for i in 0..h {
        for j in 0..h {
            let pd = &es.pairs[i][j];
            for (o, orbit) in pd.dec.orbits.iter().enumerate() {
                let d = (es.dual)(i, j, &pd.sols[orbit.representative]);
                let back = &es.pairs[j][i];
                let k =
                    back.index.get(&d).ok_or_else(|| Error::Internal("dual of a solution is not a solution".into()))?;
                let opp = ids[j][i][back.dec.orbit_of[*k]];
                let me = ids[i][j][o];
                edges[me].opposite = Some(opp);
                edges[me].half = opp == me;
            }
        }
    }
    let vertices = es.weights.iter().enumerate().map(|(id, &weight)| Vertex { id, weight }).collect();
    let g = WeightedGraph { kind: GraphKind::Little, vertices, edges };
    if !g.opposites_consistent() {
        return Err(Error::Internal("dual map is not a weight-preserving involution on edges".into()));
    }
    Ok(g)
}

/// The bipartite double cover of the little graph: `i -> j` becomes
/// `i -> h + j` and `h + i -> j`.
pub fn enhanced_graph(ctx: &BrandtContext, l: i64) -> Result<WeightedGraph> {
    Ok(double_cover(&little_graph(ctx, l)?))
}

/// Bipartite double cover of a graph with opposites.
pub fn double_cover(little: &WeightedGraph) -> WeightedGraph {
    let h = little.vertices.len();
    let vertices = (0..2 * h).map(|id| Vertex { id, weight: little.vertices[id % h].weight }).collect();
    let mut edges = Vec::with_capacity(2 * little.edges.len());
    for e in &little.edges {
        let opp = e.opposite;
        edges.push(Edge {
            from: e.from,
            to: h + e.to,
            weight: e.weight,
            opposite: opp.map(|o| 2 * o + 1),
            half: false,
        });
        edges.push(Edge { from: h + e.from, to: e.to, weight: e.weight, opposite: opp.map(|o| 2 * o), half: false });
    }
    WeightedGraph { kind: GraphKind::Enhanced, vertices, edges }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{class_set, ClassOptions};

    fn ctx(g: usize, p: i64) -> BrandtContext {
        BrandtContext::new(class_set(g, p, &ClassOptions::default()).unwrap()).unwrap()
    }

    fn rational(m: &[Vec<i64>]) -> Vec<Vec<Rational>> {
        m.iter().map(|r| r.iter().map(|&x| Rational::from_integer(x as i128)).collect()).collect()
    }

    #[test]
    fn single_vertex_loops() {
        let c = ctx(1, 7);
        let big = big_graph(&c, 2).unwrap();
        assert_eq!(big.adjacency(), vec![vec![3]]);
        assert!(big.is_connected() && !big.is_bipartite());
        let little = little_graph(&c, 2).unwrap();
        assert_eq!(little.weighted_adjacency(), rational(&[vec![3]]));
        let enhanced = enhanced_graph(&c, 2).unwrap();
        assert_eq!(enhanced.vertices.len(), 2);
        assert!(enhanced.is_connected() && enhanced.is_bipartite());
        assert_eq!(enhanced.half_edge_count(), 0);
        assert!(enhanced.opposites_consistent());
    }

    #[test]
    fn little_graph_weighted_adjacency_is_brandt() {
        for (g, p, l) in [(1, 11, 2), (1, 11, 3), (2, 7, 2), (2, 11, 2)] {
            let c = ctx(g, p);
            let b = c.brandt(l).unwrap();
            let little = little_graph(&c, l).unwrap();
            assert_eq!(little.weighted_adjacency(), rational(&b.entries), "{g} {p} {l}");
            assert!(little.weights_divide());
            assert!(little.opposites_consistent());
            assert!(little.is_connected() && !little.is_bipartite());
        }
    }

    #[test]
    fn rejects_l_equal_p() {
        let c = ctx(1, 7);
        assert!(matches!(big_graph(&c, 7), Err(Error::InvalidArgument(_))));
        assert!(matches!(little_graph(&c, 4), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn json_round_trip() {
        let c = ctx(1, 11);
        let g = little_graph(&c, 2).unwrap();
        assert_eq!(WeightedGraph::from_json(GraphKind::Little, &g.to_json()).unwrap(), g);
        assert!(g.to_dot().starts_with("digraph"));
    }
}
