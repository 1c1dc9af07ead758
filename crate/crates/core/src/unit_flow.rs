//! Bounded-height push-relabel ("Unit-Flow"), level cuts, the multi-round
//! Route-Flow driver and path peeling into a matching.
//!
//! Flows are integers. `flow[e]` is the flow along edge `e` in the
//! orientation of `edges[e]`; loops carry nothing. Vertices outside `alive`
//! and their edges are ignored, which is how `G - S` is represented.

use crate::error::{input, internal, Result};
use crate::graph::MultiGraph;
use crate::params::Mode;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub delta: Vec<i64>,
    pub flow: Vec<i64>,
    pub labels: Vec<u32>,
    pub sinks: Vec<i64>,
    pub cap: i64,
    pub alive: Vec<bool>,
    mass: Vec<i64>,
}

impl FlowState {
    pub fn new(g: &MultiGraph, delta: Vec<i64>, sinks: Vec<i64>, cap: i64) -> Result<Self> {
        Self::with_alive(g, delta, sinks, cap, vec![true; g.n()])
    }

    pub fn with_alive(g: &MultiGraph, delta: Vec<i64>, sinks: Vec<i64>, cap: i64, alive: Vec<bool>) -> Result<Self> {
        let n = g.n();
        if delta.len() != n || sinks.len() != n || alive.len() != n {
            return input("flow state vectors must have one entry per vertex");
        }
        if delta.iter().chain(&sinks).any(|&x| x < 0) {
            return input("source mass and sink capacity must be nonnegative");
        }
        if cap < 1 {
            return input("edge capacity must be positive");
        }
        let mass = delta.clone();
        Ok(FlowState { delta, flow: vec![0; g.m()], labels: vec![0; n], sinks, cap, alive, mass })
    }

    /// `f(v) = Δ(v) + inflow(v)`.
    pub fn mass(&self, v: usize) -> i64 {
        self.mass[v]
    }

    pub fn excess(&self, v: usize) -> i64 {
        (self.mass[v] - self.sinks[v]).max(0)
    }

    /// Flow from `u` to the other endpoint along edge `e`.
    pub fn flow_from(&self, g: &MultiGraph, e: usize, u: usize) -> i64 {
        let (a, b) = g.edge(e);
        if a == b {
            0
        } else if a == u {
            self.flow[e]
        } else {
            -self.flow[e]
        }
    }

    fn push(&mut self, g: &MultiGraph, e: usize, from: usize, to: usize) {
        if g.edge(e).0 == from {
            self.flow[e] += 1;
        } else {
            self.flow[e] -= 1;
        }
        self.mass[from] -= 1;
        self.mass[to] += 1;
    }

    pub fn edge_alive(&self, g: &MultiGraph, e: usize) -> bool {
        let (a, b) = g.edge(e);
        self.alive[a] && self.alive[b] && a != b
    }

    /// Recomputes masses from `delta` and `flow`.
    pub fn recompute_mass(&mut self, g: &MultiGraph) {
        self.mass = self.delta.clone();
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            if a != b && self.alive[a] && self.alive[b] {
                self.mass[a] -= self.flow[e];
                self.mass[b] += self.flow[e];
            }
        }
    }

    pub fn total_excess(&self) -> i64 {
        (0..self.delta.len()).filter(|&v| self.alive[v]).map(|v| self.excess(v)).sum()
    }
}

/// Capacity, nonnegative mass and the two labelling clauses.
pub fn check_valid_state(g: &MultiGraph, s: &FlowState) -> Result<()> {
    let mut mass = s.delta.clone();
    for (e, &(a, b)) in g.edges().iter().enumerate() {
        if !s.edge_alive(g, e) {
            continue;
        }
        let f = s.flow[e];
        if f.abs() > s.cap {
            return input(format!("edge {e} carries {f} > capacity {}", s.cap));
        }
        mass[a] -= f;
        mass[b] += f;
        let (la, lb) = (s.labels[a] as i64, s.labels[b] as i64);
        if (la > lb + 1 && f != s.cap) || (lb > la + 1 && f != -s.cap) {
            return input(format!("edge {e} spans labels {la},{lb} without saturation"));
        }
    }
    for v in 0..g.n() {
        if !s.alive[v] {
            continue;
        }
        if mass[v] < 0 {
            return input(format!("vertex {v} has negative mass {}", mass[v]));
        }
        if s.labels[v] >= 1 && mass[v] < s.sinks[v] {
            return input(format!("vertex {v} is labelled but its sink is not full"));
        }
    }
    Ok(())
}

/// The valid-state clauses plus `l(v) < h ⇒ f(v) ≤ T(v)`.
pub fn check_valid_solution(g: &MultiGraph, s: &FlowState, h: u32) -> Result<()> {
    check_valid_state(g, s)?;
    for v in 0..g.n() {
        if s.alive[v] && s.labels[v] < h && s.mass[v] > s.sinks[v] {
            return input(format!("vertex {v} below height {h} still has excess"));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelCut {
    pub level: u32,
    pub z1: u64,
    pub level_volume: u64,
    /// `5 log2(2m) / h` for the graph the cut was taken in.
    pub factor: f64,
    pub members: Vec<usize>,
}

fn alive_degree(g: &MultiGraph, s: &FlowState, v: usize) -> u64 {
    g.neighbors(v).iter().filter(|&&(w, _)| s.alive[w]).count() as u64
}

fn alive_edge_count(g: &MultiGraph, alive: &[bool]) -> usize {
    g.edges().iter().filter(|&&(a, b)| alive[a] && alive[b]).count()
}

pub fn level_factor(m: usize, h: u32) -> f64 {
    5.0 * ((2 * m.max(1)) as f64).log2() / h as f64
}

/// Runs push-relabel until no vertex below height `h` has excess. Returns
/// `None` when all mass is absorbed, otherwise a level cut containing every
/// vertex stuck at height `h`.
pub fn unit_flow(g: &MultiGraph, h: u32, s: &mut FlowState) -> Result<Option<LevelCut>> {
    if h < 1 {
        return input("height must be at least 1");
    }
    if s.flow.len() != g.m() || s.labels.len() != g.n() {
        return input("flow state does not match the graph");
    }
    check_valid_state(g, s)?;
    let n = g.n();
    let active = |s: &FlowState, v: usize| s.alive[v] && s.labels[v] < h && s.mass[v] > s.sinks[v];
    // buckets grow with the largest label in use, which can be far below h
    let mut buckets: Vec<Vec<usize>> = Vec::new();
    let mut queued = vec![false; n];
    let mut lo = usize::MAX;
    let enqueue = |buckets: &mut Vec<Vec<usize>>, queued: &mut [bool], lo: &mut usize, v: usize, l: usize| {
        if buckets.len() <= l {
            buckets.resize_with(l + 1, Vec::new);
        }
        buckets[l].push(v);
        queued[v] = true;
        *lo = (*lo).min(l);
    };
    for v in 0..n {
        if active(s, v) {
            enqueue(&mut buckets, &mut queued, &mut lo, v, s.labels[v] as usize);
        }
    }
    let mut cur = vec![0usize; n];
    while lo < buckets.len() {
        let Some(v) = buckets[lo].pop() else {
            lo += 1;
            continue;
        };
        queued[v] = false;
        if !active(s, v) {
            continue;
        }
        let lv = s.labels[v];
        let adj = g.neighbors(v);
        let mut pushed_to = None;
        while cur[v] < adj.len() {
            let (w, e) = adj[cur[v]];
            if w != v && s.alive[w] && s.labels[w] + 1 == lv && s.flow_from(g, e, v) < s.cap {
                debug_assert!(s.excess(w) == 0, "push into a vertex with excess");
                s.push(g, e, v, w);
                pushed_to = Some(w);
                break;
            }
            cur[v] += 1;
        }
        match pushed_to {
            Some(w) => {
                if active(s, w) && !queued[w] {
                    enqueue(&mut buckets, &mut queued, &mut lo, w, s.labels[w] as usize);
                }
            }
            None => {
                s.labels[v] += 1;
                cur[v] = 0;
            }
        }
        if active(s, v) && !queued[v] {
            enqueue(&mut buckets, &mut queued, &mut lo, v, s.labels[v] as usize);
        }
    }
    if !(0..n).any(|v| s.alive[v] && s.labels[v] == h) {
        return Ok(None);
    }
    let m = alive_edge_count(g, &s.alive);
    level_cut(g, s, h, m).map(Some)
}

/// Sweeps `S_i = {l ≥ i}` from `i = h-1` down and stops at the first level
/// whose type-1 boundary (`l(u) = i`, `l(v) = i-1`) is at most
/// `5 log2(2m)/h · vol(S_i)`. Vertices with `Δ ≤ 1` and no neighbour inside
/// are then dropped.
pub fn level_cut(g: &MultiGraph, s: &FlowState, h: u32, m: usize) -> Result<LevelCut> {
    // only labels in use are stored; an empty level has z1 = 0 and qualifies
    let mut per_level: HashMap<u32, (u64, u64)> = HashMap::new();
    let mut labelled = Vec::new();
    for v in 0..g.n() {
        if !s.alive[v] || s.labels[v] == 0 {
            continue;
        }
        let l = s.labels[v];
        labelled.push(v);
        let slot = per_level.entry(l).or_default();
        slot.0 += alive_degree(g, s, v);
        for &(w, _) in g.neighbors(v) {
            if w != v && s.alive[w] && s.labels[w] + 1 == l {
                slot.1 += 1;
            }
        }
    }
    if !labelled.iter().any(|&v| s.labels[v] == h) {
        return internal("level cut requested with no vertex at height h");
    }
    let factor = level_factor(m, h);
    let mut vol: u64 = labelled.iter().filter(|&&v| s.labels[v] >= h).map(|&v| alive_degree(g, s, v)).sum();
    let mut level = None;
    let mut z1 = 0;
    for i in (1..h).rev() {
        let (vi, zi) = per_level.get(&i).copied().unwrap_or((0, 0));
        vol += vi;
        if (zi as f64) <= factor * vol as f64 {
            level = Some(i);
            z1 = zi;
            break;
        }
    }
    let Some(i) = level else {
        return internal(format!("no level in [1, {}] meets the boundary bound", h.saturating_sub(1)));
    };
    let inside = |v: usize| s.alive[v] && s.labels[v] >= i;
    let members: Vec<usize> = labelled
        .iter()
        .copied()
        .filter(|&v| s.labels[v] >= i)
        .filter(|&v| {
            let mut nbrs = g.neighbors(v).iter().map(|&(w, _)| w).filter(|&w| w != v && s.alive[w]).peekable();
            let isolated = nbrs.peek().is_none();
            let lonely = !isolated && nbrs.all(|w| !inside(w));
            !(lonely && s.delta[v] <= 1)
        })
        .collect();
    Ok(LevelCut { level: i, z1, level_volume: vol, factor, members })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RouteConfig {
    pub c: u64,
    pub h: u64,
    pub mode: Mode,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RouteRound {
    pub round: usize,
    pub cut_size: usize,
    pub cut_volume: u64,
    pub f_total: i64,
    pub excess_remaining: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum RouteFlowOutcome {
    Feasible(FlowState),
    CutFound { cut: Vec<usize>, flow: FlowState },
}

#[derive(Clone, Debug)]
pub struct RouteFlowResult {
    pub outcome: RouteFlowOutcome,
    pub trace: Vec<RouteRound>,
    pub level_cuts: Vec<LevelCut>,
    /// Source mass: initial sources plus all mass added by removals.
    pub f_total: i64,
    /// Edge count of the graph the problem was posed on.
    pub m: usize,
}

/// Routes one unit from every vertex of `a_left` to distinct unit sinks in
/// `a_right`, restricted to `alive` (all vertices if `None`). Each level cut
/// is removed; flow it had pushed into the rest becomes source mass there.
pub fn route_flow(
    g: &MultiGraph,
    alive: Option<&[bool]>,
    a_left: &[usize],
    a_right: &[usize],
    cfg: RouteConfig,
) -> Result<RouteFlowResult> {
    let n = g.n();
    let alive: Vec<bool> = alive.map_or_else(|| vec![true; n], |a| a.to_vec());
    if alive.len() != n {
        return input("alive mask length differs from vertex count");
    }
    let mut delta = vec![0i64; n];
    let mut sinks = vec![0i64; n];
    for &v in a_left {
        if v >= n || !alive[v] || delta[v] != 0 {
            return input(format!("bad source {v}"));
        }
        delta[v] = 1;
    }
    for &v in a_right {
        if v >= n || !alive[v] || sinks[v] != 0 {
            return input(format!("bad sink {v}"));
        }
        if delta[v] != 0 {
            return input(format!("vertex {v} is both source and sink"));
        }
        sinks[v] = 1;
    }
    if cfg.c < 2 {
        return input("capacity must be at least 2");
    }
    let h: u32 = cfg.h.try_into().map_err(|_| crate::Error::Input("height too large".into()))?;
    let m = alive_edge_count(g, &alive);
    if cfg.mode == Mode::Paper {
        if cfg.c <= 1000 {
            return input("paper mode needs c > 1000");
        }
        if 24 * a_right.len() < 5 * m || 8 * a_left.len() > m {
            return input("paper mode needs |A^r| >= 5m/24 and |A^l| <= m/8");
        }
    }
    let mut s = FlowState::with_alive(g, delta, sinks, cfg.c as i64, alive.clone())?;
    let mut f_total = a_left.len() as i64;
    let mut trace = Vec::new();
    let mut level_cuts = Vec::new();
    let mut removed = vec![false; n];
    let mut any_cut = false;
    let cap_rounds = n + 1;
    for round in 1..=cap_rounds + 1 {
        if round > cap_rounds {
            return internal(format!("route_flow exceeded {cap_rounds} rounds"));
        }
        let lc = unit_flow(g, h, &mut s)?;
        let Some(lc) = lc else {
            trace.push(RouteRound { round, cut_size: 0, cut_volume: 0, f_total, excess_remaining: 0 });
            break;
        };
        any_cut = true;
        let cut_volume: u64 = lc.members.iter().map(|&v| alive_degree(g, &s, v)).sum();
        for &v in &lc.members {
            removed[v] = true;
        }
        // flow into survivors from the cut becomes their source mass;
        // flow they pushed into the cut returns to them
        let mut from_cut: Vec<(usize, i64)> = Vec::new();
        for &v in &lc.members {
            for &(w, e) in g.neighbors(v) {
                if w != v && s.alive[w] && !removed[w] {
                    from_cut.push((w, s.flow_from(g, e, v)));
                    s.flow[e] = 0;
                }
            }
        }
        from_cut.sort_unstable();
        let mut added = 0i64;
        let mut i = 0;
        while i < from_cut.len() {
            let w = from_cut[i].0;
            let mut x = 0;
            while i < from_cut.len() && from_cut[i].0 == w {
                x += from_cut[i].1;
                i += 1;
            }
            s.delta[w] += x.max(0);
            added += x.max(0);
        }
        for &v in &lc.members {
            s.alive[v] = false;
        }
        s.recompute_mass(g);
        f_total += added;
        if cfg.mode == Mode::Paper && 1000 * added > 6 * cut_volume as i64 {
            log::warn!("added source mass {added} exceeds 6/1000 of the removed volume {cut_volume}");
        }
        trace.push(RouteRound { round, cut_size: lc.members.len(), cut_volume, f_total, excess_remaining: s.total_excess() });
        level_cuts.push(lc);
    }
    if !any_cut {
        return Ok(RouteFlowResult { outcome: RouteFlowOutcome::Feasible(s), trace, level_cuts, f_total, m });
    }
    // close under "all neighbours already cut"
    let mut cut_mask = removed.clone();
    for v in 0..n {
        if !s.alive[v] {
            continue;
        }
        let nbrs: Vec<usize> = g.neighbors(v).iter().map(|&(w, _)| w).filter(|&w| w != v && alive[w]).collect();
        if !nbrs.is_empty() && nbrs.iter().all(|&w| removed[w]) {
            cut_mask[v] = true;
        }
    }
    for v in 0..n {
        if cut_mask[v] && s.alive[v] {
            s.alive[v] = false;
        }
    }
    s.recompute_mass(g);
    let cut: Vec<usize> = (0..n).filter(|&v| cut_mask[v]).collect();
    Ok(RouteFlowResult { outcome: RouteFlowOutcome::CutFound { cut, flow: s }, trace, level_cuts, f_total, m })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PathMatching {
    pub pairs: Vec<(usize, usize)>,
    /// Edge ids of the unit path for each pair.
    pub routes: Vec<Vec<usize>>,
}

/// Peels one unit path from every alive source to the sink that absorbs it,
/// cancelling flow cycles met on the way.
pub fn flow_to_matching(g: &MultiGraph, s: &FlowState, sources: &[usize], sinks: &[usize]) -> Result<PathMatching> {
    let n = g.n();
    let mut is_sink = vec![false; n];
    for &t in sinks {
        if t >= n {
            return input(format!("sink {t} out of range"));
        }
        is_sink[t] = true;
    }
    let mut rem: Vec<i64> = (0..g.m()).map(|e| if s.edge_alive(g, e) { s.flow[e] } else { 0 }).collect();
    let mut absorb: Vec<i64> = (0..n).map(|v| if s.alive[v] && is_sink[v] { s.mass(v).min(s.sinks[v]) } else { 0 }).collect();
    let mut ptr = vec![0usize; n];
    let mut pos = vec![usize::MAX; n];
    let mut out = PathMatching::default();
    for &src in sources {
        if src >= n {
            return input(format!("source {src} out of range"));
        }
        if !s.alive[src] {
            continue;
        }
        if s.mass(src) > s.sinks[src] {
            return input(format!("source {src} still holds excess; flow is not feasible"));
        }
        let mut path: Vec<(usize, usize)> = vec![(src, usize::MAX)];
        pos[src] = 0;
        let mut cur = src;
        loop {
            if cur != src && absorb[cur] > 0 {
                absorb[cur] -= 1;
                break;
            }
            let adj = g.neighbors(cur);
            let mut next = None;
            while ptr[cur] < adj.len() {
                let (w, e) = adj[ptr[cur]];
                let (a, _) = g.edge(e);
                let along = if a == cur { rem[e] } else { -rem[e] };
                if w != cur && along > 0 {
                    rem[e] += if a == cur { -1 } else { 1 };
                    next = Some((w, e));
                    break;
                }
                ptr[cur] += 1;
            }
            let Some((w, e)) = next else {
                for &(v, _) in &path {
                    pos[v] = usize::MAX;
                }
                return internal(format!("path from {src} stalls at {cur}"));
            };
            if pos[w] != usize::MAX {
                while path.len() > pos[w] + 1 {
                    let (v, _) = path.pop().unwrap();
                    pos[v] = usize::MAX;
                }
            } else {
                pos[w] = path.len();
                path.push((w, e));
            }
            cur = w;
        }
        for &(v, _) in &path {
            pos[v] = usize::MAX;
        }
        out.pairs.push((src, cur));
        out.routes.push(path.iter().skip(1).map(|&(_, e)| e).collect());
    }
    Ok(out)
}

/// Post-conditions of a cut outcome: sparse cut, heavy remainder and
/// closure in both directions. Returns the violated clauses.
pub fn check_cut_outcome(g: &MultiGraph, alive: &[bool], cut: &[usize], c: u64, m: usize) -> Vec<String> {
    let mut bad = Vec::new();
    let mut in_cut = vec![false; g.n()];
    for &v in cut {
        in_cut[v] = true;
    }
    let mut crossing = 0u64;
    let mut vol_s = 0u64;
    let mut vol_rest = 0u64;
    for &(a, b) in g.edges() {
        if !(alive[a] && alive[b]) {
            continue;
        }
        let ends: &[usize] = if a == b { &[a] } else { &[a, b] };
        for &v in ends {
            if in_cut[v] {
                vol_s += 1;
            } else {
                vol_rest += 1;
            }
        }
        if in_cut[a] != in_cut[b] {
            crossing += 1;
        }
    }
    let den = vol_s.min(vol_rest);
    if den == 0 || (crossing as f64) * (c as f64) > 50.0 * den as f64 {
        bad.push(format!("conductance {crossing}/{den} above 50/c"));
    }
    if 26 * vol_rest < m as u64 {
        bad.push(format!("remaining volume {vol_rest} below m/26 = {}", m as f64 / 26.0));
    }
    for v in 0..g.n() {
        if !alive[v] {
            continue;
        }
        let nbrs: Vec<usize> = g.neighbors(v).iter().map(|&(w, _)| w).filter(|&w| w != v && alive[w]).collect();
        if nbrs.is_empty() {
            continue;
        }
        if nbrs.iter().all(|&w| in_cut[w]) && !in_cut[v] {
            bad.push(format!("vertex {v} has all neighbours in the cut but is outside"));
        }
        if nbrs.iter().all(|&w| !in_cut[w]) && in_cut[v] {
            bad.push(format!("vertex {v} has no neighbour in the cut but is inside"));
        }
    }
    bad
}
