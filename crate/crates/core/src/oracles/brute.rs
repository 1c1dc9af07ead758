//! Exhaustive cut enumeration for small graphs.

use crate::error::{Error, Result};
use crate::graph::{MultiGraph, Subdivision};
use nalgebra::DMatrix;
use num_rational::Ratio;

pub const BRUTE_CAP: usize = 20;
pub const ESTIMATE_CAP: usize = 14;

fn cap_check(size: usize, cap: usize) -> Result<()> {
    if size > cap {
        return Err(Error::OverCap { size, cap });
    }
    Ok(())
}

/// Incremental cut statistics under single-vertex flips.
struct Walker<'a> {
    g: &'a MultiGraph,
    in_s: Vec<bool>,
    crossing: i64,
    vol: i64,
    size: i64,
    split_from: usize,
    // edges from a split node in S to a vertex outside S
    split_out: i64,
}

impl<'a> Walker<'a> {
    fn new(g: &'a MultiGraph, split_from: usize) -> Self {
        Walker { g, in_s: vec![false; g.n()], crossing: 0, vol: 0, size: 0, split_from, split_out: 0 }
    }

    fn flip(&mut self, v: usize) {
        let adding = !self.in_s[v];
        let sign = if adding { 1 } else { -1 };
        for &(w, _) in self.g.neighbors(v) {
            if w == v {
                continue;
            }
            self.crossing += if self.in_s[w] == self.in_s[v] { 1 } else { -1 };
            if w >= self.split_from && self.in_s[w] {
                self.split_out -= sign;
            }
            if v >= self.split_from && !self.in_s[w] {
                self.split_out += sign;
            }
        }
        self.vol += sign * self.g.degree(v) as i64;
        self.size += sign;
        self.in_s[v] = adding;
    }
}

/// Calls `f` once for every nonempty subset of `items` (Gray-code order).
fn for_each_subset(g: &MultiGraph, items: &[usize], split_from: usize, mut f: impl FnMut(&Walker)) {
    let mut w = Walker::new(g, split_from);
    let k = items.len();
    for i in 1u64..(1u64 << k) {
        w.flip(items[i.trailing_zeros() as usize]);
        f(&w);
    }
}

fn members(in_s: &[bool]) -> Vec<usize> {
    (0..in_s.len()).filter(|&v| in_s[v]).collect()
}

/// Minimum conductance over all cuts with both volumes positive; `None` if
/// there is no such cut (every cut is vacuous).
pub fn brute_force_min_conductance(g: &MultiGraph) -> Result<Option<(Ratio<u64>, Vec<usize>)>> {
    cap_check(g.n(), BRUTE_CAP)?;
    if g.n() < 2 {
        return Ok(None);
    }
    let total = g.total_volume() as i64;
    let items: Vec<usize> = (0..g.n() - 1).collect();
    let mut best: Option<(Ratio<u64>, Vec<usize>)> = None;
    for_each_subset(g, &items, usize::MAX, |w| {
        let den = w.vol.min(total - w.vol);
        if den == 0 {
            return;
        }
        let r = Ratio::new(w.crossing as u64, den as u64);
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, members(&w.in_s)));
        }
    });
    Ok(best)
}

/// `min E(S, V∖S)/vol(S)` over nonempty `S ⊆ A` with `vol(S) ≤ vol(A)/2`.
pub fn near_expansion_min(g: &MultiGraph, a: &[usize]) -> Result<Option<Ratio<u64>>> {
    cap_check(a.len(), BRUTE_CAP)?;
    let vol_a = g.volume(a)? as i64;
    let mut best: Option<Ratio<u64>> = None;
    for_each_subset(g, a, usize::MAX, |w| {
        if w.vol == 0 || 2 * w.vol > vol_a {
            return;
        }
        let r = Ratio::new(w.crossing as u64, w.vol as u64);
        if best.is_none_or(|b| r < b) {
            best = Some(r);
        }
    });
    Ok(best)
}

pub fn check_near_expander(g: &MultiGraph, a: &[usize], phi: f64) -> Result<bool> {
    Ok(near_expansion_min(g, a)?.is_none_or(|r| *r.numer() as f64 >= phi * *r.denom() as f64))
}

/// `min E(S, V∖S)/|S|` over nonempty `S ⊆ A` with `|S| ≤ θ|A|`,
/// `θ = num/den`.
pub fn strong_near_edge_expansion_min(g: &MultiGraph, a: &[usize], num: u64, den: u64) -> Result<Option<Ratio<u64>>> {
    cap_check(a.len(), BRUTE_CAP)?;
    let k = a.len() as u64;
    let mut best: Option<Ratio<u64>> = None;
    for_each_subset(g, a, usize::MAX, |w| {
        if (w.size as u64) * den > num * k {
            return;
        }
        let r = Ratio::new(w.crossing as u64, w.size as u64);
        if best.is_none_or(|b| r < b) {
            best = Some(r);
        }
    });
    Ok(best)
}

/// Weak near edge-expansion in `G_E`: cuts `S ⊆ A` with `|S| ≤ |A|/2`
/// whose split nodes have no edge leaving `S`; crossing edges are counted
/// against all of `V'`.
pub fn weak_near_edge_expansion_min(sd: &Subdivision, a: &[usize]) -> Result<Option<Ratio<u64>>> {
    cap_check(a.len(), BRUTE_CAP)?;
    let g = sd.graph();
    let k = a.len() as i64;
    let mut best: Option<Ratio<u64>> = None;
    for_each_subset(g, a, sd.base().n(), |w| {
        if 2 * w.size > k || w.split_out != 0 {
            return;
        }
        let r = Ratio::new(w.crossing as u64, w.size as u64);
        if best.is_none_or(|b| r < b) {
            best = Some(r);
        }
    });
    Ok(best)
}

/// Weighted variant over a dense symmetric matrix.
pub fn strong_near_edge_expansion_min_weighted(w: &DMatrix<f64>, a: &[usize], num: u64, den: u64) -> Result<Option<f64>> {
    cap_check(a.len(), BRUTE_CAP)?;
    let n = w.nrows();
    let k = a.len() as u64;
    let mut best: Option<f64> = None;
    let mut in_s = vec![false; n];
    for bits in 1u64..(1u64 << a.len()) {
        let size = bits.count_ones() as u64;
        if size * den > num * k {
            continue;
        }
        for (i, &v) in a.iter().enumerate() {
            in_s[v] = bits >> i & 1 == 1;
        }
        let mut out = 0.0;
        for (i, &u) in a.iter().enumerate() {
            if bits >> i & 1 == 0 {
                continue;
            }
            for v in 0..n {
                if !in_s[v] {
                    out += w[(u, v)];
                }
            }
        }
        let r = out / size as f64;
        if best.is_none_or(|b| r < b) {
            best = Some(r);
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq)]
pub enum EstimateVerdict {
    /// `λ̄ > 1/100`: the hypothesis fails, nothing to check.
    Vacuous,
    Holds,
    Fails(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionEstimate {
    pub lambda_bar: f64,
    pub verdict: EstimateVerdict,
}

/// If the top singular value of `Δ F Δ` is at most 1/100, every
/// `S ⊆ active` with `|S| ≤ 6/7 |active|` must have weighted expansion at
/// least 1/100 in `F`.
pub fn check_expansion_estimate(f: &DMatrix<f64>, active: &[usize]) -> Result<ExpansionEstimate> {
    cap_check(active.len(), ESTIMATE_CAP)?;
    let lambda_bar = super::dense::top_singular_value(f, active);
    if lambda_bar > 0.01 {
        return Ok(ExpansionEstimate { lambda_bar, verdict: EstimateVerdict::Vacuous });
    }
    let n = f.nrows();
    let k = active.len() as u64;
    let mut in_s = vec![false; n];
    for bits in 1u64..(1u64 << active.len()) {
        let size = bits.count_ones() as u64;
        if 7 * size > 6 * k {
            continue;
        }
        for (i, &v) in active.iter().enumerate() {
            in_s[v] = bits >> i & 1 == 1;
        }
        let mut out = 0.0;
        for &u in active.iter().filter(|&&u| in_s[u]) {
            out += (0..n).filter(|&v| !in_s[v]).map(|v| f[(u, v)]).sum::<f64>();
        }
        if out < size as f64 / 100.0 {
            let s = active.iter().copied().filter(|&v| in_s[v]).collect();
            return Ok(ExpansionEstimate { lambda_bar, verdict: EstimateVerdict::Fails(s) });
        }
    }
    Ok(ExpansionEstimate { lambda_bar, verdict: EstimateVerdict::Holds })
}

/// All vertex masks of `G_E` that respect the subdivision.
pub fn respecting_cuts(sd: &Subdivision) -> Result<Vec<Vec<bool>>> {
    let n = sd.base().n();
    let m = sd.base().m();
    cap_check(n + m, BRUTE_CAP)?;
    let mut out = Vec::new();
    for regs in 0u64..(1u64 << n) {
        let free: Vec<usize> = (0..m)
            .filter(|&e| {
                let (u, v) = sd.base().edge(e);
                (regs >> u & 1) != (regs >> v & 1)
            })
            .collect();
        for choice in 0u64..(1u64 << free.len()) {
            let mut mask = vec![false; n + m];
            for (v, slot) in mask.iter_mut().enumerate().take(n) {
                *slot = regs >> v & 1 == 1;
            }
            for e in 0..m {
                let (u, _) = sd.base().edge(e);
                mask[n + e] = mask[u];
            }
            for (i, &e) in free.iter().enumerate() {
                mask[n + e] = choice >> i & 1 == 1;
            }
            out.push(mask);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(n: usize) -> MultiGraph {
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v));
            }
        }
        MultiGraph::new(n, e).unwrap()
    }

    #[test]
    fn k4_and_paths() {
        let (r, _) = brute_force_min_conductance(&k(4)).unwrap().unwrap();
        // singletons give 3/3; pairs give 4/6
        assert_eq!(r, Ratio::new(2, 3));
        let p3 = MultiGraph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let (r, _) = brute_force_min_conductance(&p3).unwrap().unwrap();
        assert_eq!(r, Ratio::from(1));
        let two = MultiGraph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let (r, w) = brute_force_min_conductance(&two).unwrap().unwrap();
        assert_eq!(r, Ratio::from(0));
        assert!(w == vec![0, 1] || w == vec![2]);
        assert_eq!(brute_force_min_conductance(&MultiGraph::new(1, vec![]).unwrap()).unwrap(), None);
        assert!(brute_force_min_conductance(&MultiGraph::new(21, vec![]).unwrap()).is_err());
    }

    #[test]
    fn near_expander_reduces_to_expander() {
        let g = k(5);
        let all: Vec<usize> = (0..5).collect();
        let a = near_expansion_min(&g, &all).unwrap().unwrap();
        let b = brute_force_min_conductance(&g).unwrap().unwrap().0;
        assert_eq!(a, b);
        // best cut is two vertices: 6 / 8
        assert!(check_near_expander(&g, &all, 0.75).unwrap());
        assert!(!check_near_expander(&g, &all, 0.76).unwrap());
    }

    #[test]
    fn strong_half_matches_plain_near_edge_expansion() {
        let g = MultiGraph::new(6, vec![(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]).unwrap();
        let a: Vec<usize> = (0..6).collect();
        let strong = strong_near_edge_expansion_min(&g, &a, 1, 2).unwrap().unwrap();
        let mut plain: Option<Ratio<u64>> = None;
        for bits in 1u32..64 {
            let s: Vec<usize> = (0..6).filter(|&v| bits >> v & 1 == 1).collect();
            if 2 * s.len() > 6 {
                continue;
            }
            let mask = g.mask_of(&s).unwrap();
            let r = Ratio::new(g.crossing_mask(&mask), s.len() as u64);
            plain = Some(plain.map_or(r, |p| p.min(r)));
        }
        assert_eq!(Some(strong), plain);
        assert_eq!(strong, Ratio::new(1, 3));
        assert_eq!(strong_near_edge_expansion_min(&g, &[], 1, 2).unwrap(), None);
    }

    #[test]
    fn uniform_matrix_estimate() {
        let k = 7;
        let f = DMatrix::<f64>::from_element(k, k, 1.0 / k as f64);
        let active: Vec<usize> = (0..k).collect();
        let e = check_expansion_estimate(&f, &active).unwrap();
        assert!(e.lambda_bar < 1e-12);
        assert_eq!(e.verdict, EstimateVerdict::Holds);
        let e = check_expansion_estimate(&DMatrix::identity(k, k), &active).unwrap();
        assert_eq!(e.verdict, EstimateVerdict::Vacuous);
    }

    #[test]
    fn respecting_cut_count() {
        let sd = Subdivision::new(&MultiGraph::new(2, vec![(0, 1)]).unwrap());
        let cuts = respecting_cuts(&sd).unwrap();
        assert_eq!(cuts.len(), 6);
        assert!(cuts.iter().all(|c| sd.respects(c)));
    }
}
