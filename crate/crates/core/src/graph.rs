//! Undirected multigraphs, cuts, induced subgraphs and the subdivision graph.
//!
//! A self-loop adds 1 to the degree of its endpoint, so replacing a cut edge
//! by a loop keeps degrees intact and `vol(V) = 2m - loops`.

use crate::error::{input, Result};
use num_rational::Ratio;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    // (neighbor, edge id); a loop appears once
    adj: Vec<Vec<(usize, usize)>>,
}

impl MultiGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for (e, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return input(format!("edge {e} = ({u},{v}) out of range for n={n}"));
            }
            adj[u].push((v, e));
            if u != v {
                adj[v].push((u, e));
            }
        }
        Ok(MultiGraph { n, edges, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn loop_count(&self) -> usize {
        self.edges.iter().filter(|(u, v)| u == v).count()
    }

    pub fn total_volume(&self) -> u64 {
        (2 * self.m() - self.loop_count()) as u64
    }

    /// Volume of a list of vertices; ids are validated, duplicates count once.
    pub fn volume(&self, s: &[usize]) -> Result<u64> {
        let mask = self.mask_of(s)?;
        Ok(self.volume_mask(&mask))
    }

    pub fn volume_mask(&self, mask: &[bool]) -> u64 {
        (0..self.n).filter(|&v| mask[v]).map(|v| self.degree(v) as u64).sum()
    }

    /// Number of edges with exactly one endpoint in the mask.
    pub fn crossing_mask(&self, mask: &[bool]) -> u64 {
        self.edges.iter().filter(|&&(u, v)| mask[u] != mask[v]).count() as u64
    }

    pub fn mask_of(&self, s: &[usize]) -> Result<Vec<bool>> {
        let mut mask = vec![false; self.n];
        for &v in s {
            if v >= self.n {
                return input(format!("vertex {v} out of range for n={}", self.n));
            }
            mask[v] = true;
        }
        Ok(mask)
    }

    /// Connected components, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &(w, _) in &self.adj[u] {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.components().len() == 1
    }

    /// `G{A}`: edges inside `A`, plus a loop at `u` for every edge leaving `A`
    /// from `u`. Returns the graph and the local-to-global vertex map
    /// (sorted `A`).
    pub fn induced_with_loops(&self, a: &[usize]) -> Result<(MultiGraph, Vec<usize>)> {
        let mask = self.mask_of(a)?;
        let (local, map) = self.local_index(&mask);
        let mut edges = Vec::new();
        for &(u, v) in &self.edges {
            match (mask[u], mask[v]) {
                (true, true) => edges.push((local[u], local[v])),
                (true, false) => edges.push((local[u], local[u])),
                (false, true) => edges.push((local[v], local[v])),
                (false, false) => {}
            }
        }
        Ok((MultiGraph::new(map.len(), edges)?, map))
    }

    /// `G[A]` without loops for removed edges. Returns the graph, the
    /// local-to-global vertex map and the local-to-global edge map.
    pub fn induced(&self, mask: &[bool]) -> (MultiGraph, Vec<usize>, Vec<usize>) {
        let (local, map) = self.local_index(mask);
        let mut edges = Vec::new();
        let mut emap = Vec::new();
        for (e, &(u, v)) in self.edges.iter().enumerate() {
            if mask[u] && mask[v] {
                edges.push((local[u], local[v]));
                emap.push(e);
            }
        }
        let g = MultiGraph::new(map.len(), edges).expect("local ids are in range");
        (g, map, emap)
    }

    fn local_index(&self, mask: &[bool]) -> (Vec<usize>, Vec<usize>) {
        let mut local = vec![usize::MAX; self.n];
        let mut map = Vec::new();
        for v in 0..self.n {
            if mask[v] {
                local[v] = map.len();
                map.push(v);
            }
        }
        (local, map)
    }
}

/// A vertex subset `S`; the complement is implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    mask: Vec<bool>,
    size: usize,
}

impl Cut {
    pub fn new(n: usize, members: &[usize]) -> Result<Self> {
        let mut mask = vec![false; n];
        for &v in members {
            if v >= n {
                return input(format!("vertex {v} out of range for n={n}"));
            }
            mask[v] = true;
        }
        Ok(Cut::from_mask(mask))
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        let size = mask.iter().filter(|&&b| b).count();
        Cut { mask, size }
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&v| self.mask[v]).collect()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.mask[v]
    }
}

/// Crossing edges and the volumes/sizes of both sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CutStats {
    pub crossing: u64,
    pub vol_s: u64,
    pub vol_rest: u64,
    pub size_s: u64,
    pub size_rest: u64,
}

pub fn cut_stats(g: &MultiGraph, cut: &Cut) -> Result<CutStats> {
    if cut.mask.len() != g.n() {
        return input(format!("cut over {} vertices, graph has {}", cut.mask.len(), g.n()));
    }
    if cut.is_empty() || cut.len() == g.n() {
        return input("cut must be a nonempty proper subset");
    }
    let vol_s = g.volume_mask(&cut.mask);
    Ok(CutStats {
        crossing: g.crossing_mask(&cut.mask),
        vol_s,
        vol_rest: g.total_volume() - vol_s,
        size_s: cut.len() as u64,
        size_rest: (g.n() - cut.len()) as u64,
    })
}

pub fn conductance_exact(g: &MultiGraph, cut: &Cut) -> Result<Ratio<u64>> {
    let s = cut_stats(g, cut)?;
    let den = s.vol_s.min(s.vol_rest);
    if den == 0 {
        return input("zero-volume side in conductance");
    }
    Ok(Ratio::new(s.crossing, den))
}

pub fn conductance(g: &MultiGraph, cut: &Cut) -> Result<f64> {
    let r = conductance_exact(g, cut)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

pub fn edge_expansion_exact(g: &MultiGraph, cut: &Cut) -> Result<Ratio<u64>> {
    let s = cut_stats(g, cut)?;
    Ok(Ratio::new(s.crossing, s.size_s.min(s.size_rest)))
}

pub fn edge_expansion(g: &MultiGraph, cut: &Cut) -> Result<f64> {
    let r = edge_expansion_exact(g, cut)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

/// The subdivision graph `G_E`. Regular nodes keep ids `0..n`, the split
/// node of edge `e` is `n + e`, and base edge `e = {u,v}` becomes the `G_E`
/// edges `2e = {u, x_e}` and `2e+1 = {v, x_e}`.
#[derive(Clone, Debug)]
pub struct Subdivision {
    base: MultiGraph,
    ge: MultiGraph,
}

impl Subdivision {
    pub fn new(base: &MultiGraph) -> Self {
        let n = base.n();
        let mut edges = Vec::with_capacity(2 * base.m());
        for (e, &(u, v)) in base.edges().iter().enumerate() {
            edges.push((u, n + e));
            edges.push((v, n + e));
        }
        let ge = MultiGraph::new(n + base.m(), edges).expect("split ids are in range");
        Subdivision { base: base.clone(), ge }
    }

    pub fn base(&self) -> &MultiGraph {
        &self.base
    }

    pub fn graph(&self) -> &MultiGraph {
        &self.ge
    }

    pub fn is_split(&self, v: usize) -> bool {
        v >= self.base.n()
    }

    pub fn edge_of(&self, x: usize) -> Option<usize> {
        self.is_split(x).then(|| x - self.base.n())
    }

    pub fn split_of(&self, e: usize) -> usize {
        self.base.n() + e
    }

    /// Base edge owning a `G_E` edge.
    pub fn base_edge_of(&self, ge_edge: usize) -> usize {
        ge_edge / 2
    }

    /// Every split node whose two regular neighbours share a side is on
    /// that side too.
    pub fn respects(&self, mask: &[bool]) -> bool {
        self.base.edges().iter().enumerate().all(|(e, &(u, v))| {
            let x = mask[self.split_of(e)];
            !(mask[u] && mask[v]) || x
        }) && self.base.edges().iter().enumerate().all(|(e, &(u, v))| {
            let x = mask[self.split_of(e)];
            mask[u] || mask[v] || !x
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k(n: usize) -> MultiGraph {
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v));
            }
        }
        MultiGraph::new(n, e).unwrap()
    }

    fn path(n: usize) -> MultiGraph {
        MultiGraph::new(n, (1..n).map(|v| (v - 1, v)).collect()).unwrap()
    }

    #[test]
    fn volumes() {
        let g = k(3);
        assert_eq!(g.volume(&[0]).unwrap(), 2);
        assert_eq!(g.volume(&[0, 1, 2]).unwrap(), 6);
        let l = MultiGraph::new(1, vec![(0, 0)]).unwrap();
        assert_eq!(l.volume(&[0]).unwrap(), 1);
        assert_eq!(l.total_volume(), 1);
        assert!(g.volume(&[3]).is_err());
    }

    #[test]
    fn conductance_and_expansion() {
        let p4 = path(4);
        let s = Cut::new(4, &[0, 1]).unwrap();
        assert_eq!(conductance_exact(&p4, &s).unwrap(), Ratio::new(1, 3));
        assert_eq!(edge_expansion_exact(&p4, &s).unwrap(), Ratio::new(1, 2));
        let k3 = k(3);
        assert_eq!(conductance_exact(&k3, &Cut::new(3, &[0]).unwrap()).unwrap(), Ratio::from(1));
        let k4 = k(4);
        assert_eq!(edge_expansion_exact(&k4, &Cut::new(4, &[0]).unwrap()).unwrap(), Ratio::from(3));
        assert!(conductance(&k3, &Cut::new(3, &[]).unwrap()).is_err());
        assert!(conductance(&k3, &Cut::new(3, &[0, 1, 2]).unwrap()).is_err());
    }

    #[test]
    fn loops_never_cross() {
        let g = MultiGraph::new(2, vec![(0, 0), (0, 1), (1, 1)]).unwrap();
        let s = Cut::new(2, &[0]).unwrap();
        assert_eq!(cut_stats(&g, &s).unwrap().crossing, 1);
        assert_eq!(conductance_exact(&g, &s).unwrap(), Ratio::new(1, 2));
    }

    #[test]
    fn induced_examples() {
        let k3 = k(3);
        let (h, map) = k3.induced_with_loops(&[0, 1, 2]).unwrap();
        assert_eq!(h, k3);
        assert_eq!(map, vec![0, 1, 2]);
        let (p, _) = path(3).induced_with_loops(&[0, 1]).unwrap();
        assert_eq!(p.edges(), &[(0, 1), (1, 1)]);
        assert_eq!((p.degree(0), p.degree(1)), (1, 2));
    }

    #[test]
    fn subdivision_shape() {
        let sd = Subdivision::new(&k(3));
        assert_eq!(sd.graph().n(), 6);
        assert_eq!(sd.graph().m(), 6);
        let l = Subdivision::new(&MultiGraph::new(1, vec![(0, 0)]).unwrap());
        assert_eq!(l.graph().edges(), &[(0, 1), (0, 1)]);
        assert_eq!(l.graph().degree(1), 2);
        assert_eq!(l.edge_of(1), Some(0));
        assert_eq!(l.edge_of(0), None);
    }

    #[test]
    fn respects_examples() {
        let sd = Subdivision::new(&MultiGraph::new(2, vec![(0, 1)]).unwrap());
        assert!(sd.respects(&[true, true, true]));
        assert!(!sd.respects(&[true, true, false]));
        assert!(!sd.respects(&[false, false, true]));
        assert!(sd.respects(&[true, false, true]));
        assert!(sd.respects(&[true, false, false]));
    }

    fn arb_graph(max_n: usize, max_m: usize) -> impl Strategy<Value = MultiGraph> {
        (1..=max_n).prop_flat_map(move |n| {
            prop::collection::vec((0..n, 0..n), 0..=max_m)
                .prop_map(move |e| MultiGraph::new(n, e).unwrap())
        })
    }

    proptest! {
        #[test]
        fn induced_preserves_degrees(g in arb_graph(10, 25), bits in prop::collection::vec(any::<bool>(), 10)) {
            let a: Vec<usize> = (0..g.n()).filter(|&v| bits[v]).collect();
            let (h, map) = g.induced_with_loops(&a).unwrap();
            for (l, &v) in map.iter().enumerate() {
                prop_assert_eq!(h.degree(l), g.degree(v));
            }
            prop_assert_eq!(h.total_volume(), g.volume(&a).unwrap());
        }

        #[test]
        fn cut_measures_match_edge_scan(g in arb_graph(10, 25), bits in prop::collection::vec(any::<bool>(), 10)) {
            let s: Vec<usize> = (0..g.n()).filter(|&v| bits[v]).collect();
            prop_assume!(!s.is_empty() && s.len() < g.n());
            let cut = Cut::new(g.n(), &s).unwrap();
            let mut cross = 0u64;
            let mut vol_s = 0u64;
            let mut vol_r = 0u64;
            for &(u, v) in g.edges() {
                let (a, b) = (bits[u], bits[v]);
                if u == v {
                    if a { vol_s += 1 } else { vol_r += 1 }
                    continue;
                }
                if a != b { cross += 1; }
                if a { vol_s += 1 } else { vol_r += 1 }
                if b { vol_s += 1 } else { vol_r += 1 }
            }
            let size = s.len() as u64;
            let exp = edge_expansion_exact(&g, &cut).unwrap();
            prop_assert_eq!(exp, Ratio::new(cross, size.min(g.n() as u64 - size)));
            let den = vol_s.min(vol_r);
            match conductance_exact(&g, &cut) {
                Ok(c) => prop_assert_eq!(c, Ratio::new(cross, den)),
                Err(_) => prop_assert_eq!(den, 0),
            }
        }

        #[test]
        fn split_nodes_have_degree_two(g in arb_graph(8, 20)) {
            let sd = Subdivision::new(&g);
            prop_assert_eq!(sd.graph().n(), g.n() + g.m());
            prop_assert_eq!(sd.graph().m(), 2 * g.m());
            for e in 0..g.m() {
                prop_assert_eq!(sd.graph().degree(sd.split_of(e)), 2);
            }
        }

        #[test]
        fn respects_matches_double_loop(g in arb_graph(6, 8), bits in prop::collection::vec(any::<bool>(), 14)) {
            let sd = Subdivision::new(&g);
            let mask: Vec<bool> = bits[..sd.graph().n()].to_vec();
            let mut ok = true;
            for x in g.n()..sd.graph().n() {
                let nb: Vec<usize> = sd.graph().neighbors(x).iter().map(|&(w, _)| w).collect();
                if nb.iter().all(|&w| mask[w]) && !mask[x] { ok = false; }
                if nb.iter().all(|&w| !mask[w]) && mask[x] { ok = false; }
            }
            prop_assert_eq!(sd.respects(&mask), ok);
        }
    }
}
