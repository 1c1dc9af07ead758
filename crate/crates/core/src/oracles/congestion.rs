//! Congestion accounting for the matchings routed in `G_E`, and the explicit
//! embedding of `F_t` into the union of matchings.

use super::dense::dense_flow_matrix;
use crate::error::{Error, Result};
use crate::spectral::MatchingRound;
use nalgebra::DMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct CongestionReport {
    pub ok: bool,
    pub rounds: usize,
    pub max_cumulative: u64,
    pub mean_utilization: f64,
    /// First round (1-based) where a bound failed.
    pub first_violation: Option<usize>,
}

/// Replays the per-pair routes round by round: each round's load on every
/// `G_E` edge is at most `c`, and the cumulative load after `t` rounds is
/// at most `c·t`.
pub fn congestion_audit(matchings: &[MatchingRound], ge_edges: usize, c: u64) -> CongestionReport {
    let mut total = vec![0u64; ge_edges];
    let mut round_load = vec![0u64; ge_edges];
    let mut first_violation = None;
    for (t, mr) in matchings.iter().enumerate() {
        round_load.iter_mut().for_each(|x| *x = 0);
        for route in &mr.routes {
            for &e in route {
                round_load[e] += 1;
            }
        }
        for e in 0..ge_edges {
            total[e] += round_load[e];
            if first_violation.is_none() && (round_load[e] > c || total[e] > c * (t as u64 + 1)) {
                first_violation = Some(t + 1);
            }
        }
    }
    let t = matchings.len() as u64;
    let max_cumulative = total.iter().copied().max().unwrap_or(0);
    let mean_utilization = if t == 0 || ge_edges == 0 {
        0.0
    } else {
        total.iter().sum::<u64>() as f64 / (ge_edges as f64 * (c * t) as f64)
    };
    CongestionReport { ok: first_violation.is_none(), rounds: matchings.len(), max_cumulative, mean_utilization, first_violation }
}

/// A multi-commodity routing of a flow matrix over the matching edges.
/// Each round contributes two parallel copies of its matching: one for the
/// column averaging `F N` and one for the row averaging `N (F N)`.
#[derive(Clone, Debug)]
pub struct MatchingEmbedding {
    pub m: usize,
    /// (a, b) endpoints of each embedding edge.
    pub edges: Vec<(usize, usize)>,
    /// Round index (1-based) each edge belongs to.
    pub round_of: Vec<usize>,
    /// `fwd[e][x]`: commodity `x` flowing a→b on edge `e`; `bwd` for b→a.
    pub fwd: Vec<Vec<f64>>,
    pub bwd: Vec<Vec<f64>>,
}

impl MatchingEmbedding {
    /// Load of an edge: all commodities, both directions.
    pub fn load(&self, e: usize) -> f64 {
        self.fwd[e].iter().sum::<f64>() + self.bwd[e].iter().sum::<f64>()
    }

    /// Largest deviation of the net delivery from `F - I`.
    pub fn conservation_error(&self, f: &DMatrix<f64>) -> f64 {
        let m = self.m;
        let mut net = DMatrix::<f64>::zeros(m, m);
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            for x in 0..m {
                let flow = self.fwd[e][x] - self.bwd[e][x];
                net[(x, b)] += flow;
                net[(x, a)] -= flow;
            }
        }
        let target = f - DMatrix::<f64>::identity(m, m);
        (net - target).iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

pub const EMBED_CAP_M: usize = 16;
pub const EMBED_CAP_T: usize = 3;

/// Builds the routing of `F_t` by applying, per round, column averaging
/// (each matched node forwards `1/d` of what it received) and then row
/// averaging (each matched commodity sends `1/d` of itself to its partner,
/// which then follows the partner's routing).
pub fn embed_flow_matrix(matchings: &[MatchingRound], m: usize, d: u64) -> Result<MatchingEmbedding> {
    if m > EMBED_CAP_M {
        return Err(Error::OverCap { size: m, cap: EMBED_CAP_M });
    }
    if matchings.len() > EMBED_CAP_T {
        return Err(Error::OverCap { size: matchings.len(), cap: EMBED_CAP_T });
    }
    let df = d as f64;
    let mut emb = MatchingEmbedding { m, edges: vec![], round_of: vec![], fwd: vec![], bwd: vec![] };
    for (t, mr) in matchings.iter().enumerate() {
        let f = dense_flow_matrix(&matchings[..t], m, d, m)?.f;
        // column averaging: F N
        for &(a, b) in &mr.pairs {
            emb.edges.push((a, b));
            emb.round_of.push(t + 1);
            emb.fwd.push((0..m).map(|x| f[(x, a)] / df).collect());
            emb.bwd.push((0..m).map(|x| f[(x, b)] / df).collect());
        }
        // row averaging: N (F N)
        let mut partner: Vec<Option<usize>> = vec![None; m];
        for &(a, b) in &mr.pairs {
            partner[a] = Some(b);
            partner[b] = Some(a);
        }
        for e in 0..emb.edges.len() {
            let (fw, bw) = (emb.fwd[e].clone(), emb.bwd[e].clone());
            for x in 0..m {
                if let Some(p) = partner[x] {
                    emb.fwd[e][x] = (df - 1.0) / df * fw[x] + fw[p] / df;
                    emb.bwd[e][x] = (df - 1.0) / df * bw[x] + bw[p] / df;
                }
            }
        }
        for &(a, b) in &mr.pairs {
            emb.edges.push((a, b));
            emb.round_of.push(t + 1);
            let mut fw = vec![0.0; m];
            let mut bw = vec![0.0; m];
            fw[a] = 1.0 / df;
            bw[b] = 1.0 / df;
            emb.fwd.push(fw);
            emb.bwd.push(bw);
        }
    }
    Ok(emb)
}

/// Load on every `G_E` edge when each embedding edge of round `i` is sent
/// along the `G_E` route of its matching pair.
pub fn composite_ge_load(emb: &MatchingEmbedding, matchings: &[MatchingRound], ge_edges: usize) -> Vec<f64> {
    let mut load = vec![0.0; ge_edges];
    for (e, &(a, b)) in emb.edges.iter().enumerate() {
        let mr = &matchings[emb.round_of[e] - 1];
        let idx = mr.pairs.iter().position(|&p| p == (a, b)).expect("pair of its round");
        if let Some(route) = mr.routes.get(idx) {
            for &g in route {
                load[g] += emb.load(e);
            }
        }
    }
    load
}
