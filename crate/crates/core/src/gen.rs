//! Benchmark graph generators. All are deterministic per seed.

use crate::error::{input, Result};
use crate::graph::MultiGraph;
use crate::rng::rng_from;
use rand::seq::SliceRandom;
use rand::Rng as _;

/// Configuration model: `d` stubs per vertex, shuffled and paired. Loops and
/// parallel edges are kept unless `simple`, in which case the pairing is
/// redrawn until there are none.
pub fn random_regular(n: usize, d: usize, seed: u64, simple: bool) -> Result<MultiGraph> {
    if n == 0 || (n * d) % 2 != 0 {
        return input(format!("n*d must be even and n positive (n={n}, d={d})"));
    }
    if simple && d >= n {
        return input(format!("no simple {d}-regular graph on {n} vertices"));
    }
    let mut rng = rng_from(seed);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    for _ in 0..10_000 {
        stubs.shuffle(&mut rng);
        let edges: Vec<(usize, usize)> = stubs.chunks(2).map(|p| (p[0].min(p[1]), p[0].max(p[1]))).collect();
        if simple {
            let mut sorted = edges.clone();
            sorted.sort_unstable();
            if sorted.iter().any(|&(u, v)| u == v) || sorted.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
        }
        return MultiGraph::new(n, edges);
    }
    input("could not draw a simple pairing")
}

pub fn complete(n: usize) -> MultiGraph {
    let mut e = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            e.push((u, v));
        }
    }
    MultiGraph::new(n, e).expect("ids in range")
}

/// Two copies of `K_n` joined by the edge `(0, n)`.
pub fn dumbbell(n: usize) -> MultiGraph {
    planted(2, n, Part::Complete, 1, 0).expect("valid dumbbell")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Complete,
    /// Simple random `d`-regular.
    Regular(usize),
}

/// `k` parts of `n` vertices each (part `i` owns `i n .. (i+1) n`) plus `b`
/// bridges; bridge `j` joins part `j mod k` to part `(j+1) mod k`. With
/// complete parts and one bridge per pair the bridge is `(i n, (i+1) n)`.
pub fn planted(k: usize, n: usize, part: Part, b: usize, seed: u64) -> Result<MultiGraph> {
    if k == 0 || n == 0 {
        return input("need at least one part with at least one vertex");
    }
    let mut edges = Vec::new();
    for i in 0..k {
        let g = match part {
            Part::Complete => complete(n),
            Part::Regular(d) => random_regular(n, d, crate::rng::child_seed(seed, i as u64), true)?,
        };
        edges.extend(g.edges().iter().map(|&(u, v)| (i * n + u, i * n + v)));
    }
    if k > 1 {
        let mut rng = rng_from(crate::rng::child_seed(seed, u64::MAX));
        for j in 0..b {
            let (p, q) = (j % k, (j + 1) % k);
            let (u, v) = match part {
                Part::Complete if b <= k => (p * n, q * n),
                _ => (p * n + rng.random_range(0..n), q * n + rng.random_range(0..n)),
            };
            edges.push((u, v));
        }
    }
    MultiGraph::new(k * n, edges)
}

/// Part index of every vertex of a [`planted`] graph.
pub fn planted_labels(k: usize, n: usize) -> Vec<usize> {
    (0..k * n).map(|v| v / n).collect()
}
