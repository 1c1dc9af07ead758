//! Trimming and the recursive decomposition driver.

use crate::cut_matching::{cut_matching, CaseKind, GameOptions};
use crate::error::{input, internal, Result};
use crate::graph::MultiGraph;
use crate::oracles::{brute_force_min_conductance, congestion_audit};
use crate::params::{ParamSpec, Params};
use crate::rng::child_seed;
use crate::unit_flow::{unit_flow, FlowState};
use nalgebra::DMatrix;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertMethod {
    Brute,
    Eigenvalue,
    GameCertified,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterCert {
    pub size: usize,
    pub vol: u64,
    pub cert_method: CertMethod,
    /// Exact minimum conductance, a spectral lower bound, or φ when only
    /// the game vouches for the cluster.
    pub cert_value: f64,
}

/// Summary of one cut-matching game played during the recursion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameSummary {
    pub depth: usize,
    pub n: usize,
    pub m: usize,
    pub case: CaseKind,
    pub rounds: usize,
    pub c: u64,
    pub cut_conductance: Option<f64>,
    pub max_load: u64,
    pub congestion_ok: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Partition {
    pub clusters: Vec<Vec<usize>>,
    pub inter_cluster_edges: u64,
    pub per_cluster: Vec<ClusterCert>,
    pub rounds_total: usize,
    pub seed: u64,
    pub params: ParamSpec,
    /// `φ m log2² m`, the shape of the edge bound with constant 1.
    pub bound: f64,
    #[serde(skip)]
    pub games: Vec<GameSummary>,
}

impl Partition {
    /// Edges whose endpoints lie in different clusters, counted directly.
    pub fn recount(&self, g: &MultiGraph) -> Result<u64> {
        let mut owner = vec![usize::MAX; g.n()];
        for (i, c) in self.clusters.iter().enumerate() {
            for &v in c {
                if v >= g.n() || owner[v] != usize::MAX {
                    return input(format!("vertex {v} is out of range or in two clusters"));
                }
                owner[v] = i;
            }
        }
        if owner.contains(&usize::MAX) {
            return input("clusters do not cover the vertex set");
        }
        Ok(g.edges().iter().filter(|&&(u, v)| owner[u] != owner[v]).count() as u64)
    }

    pub fn labels(&self, n: usize) -> Vec<usize> {
        let mut l = vec![0; n];
        for (i, c) in self.clusters.iter().enumerate() {
            for &v in c {
                l[v] = i;
            }
        }
        l
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DecompOptions {
    pub game: GameOptions,
    /// Clusters up to this many vertices are certified exhaustively.
    pub brute_cap: usize,
    /// Clusters up to this many vertices get the spectral bound.
    pub eigen_cap: usize,
    /// Replay every game's matching routes through the congestion audit.
    pub audit_congestion: bool,
}

impl Default for DecompOptions {
    fn default() -> Self {
        DecompOptions { game: GameOptions::default(), brute_cap: 16, eigen_cap: 400, audit_congestion: false }
    }
}

/// Half the second-smallest eigenvalue of the normalized Laplacian of `g`,
/// loops weighted 1 on the diagonal. A lower bound on its conductance.
pub fn cheeger_lower_bound(g: &MultiGraph) -> Option<f64> {
    let n = g.n();
    if n < 2 || (0..n).any(|v| g.degree(v) == 0) {
        return None;
    }
    let mut a = DMatrix::<f64>::zeros(n, n);
    for &(u, v) in g.edges() {
        if u == v {
            a[(u, u)] += 1.0;
        } else {
            a[(u, v)] += 1.0;
            a[(v, u)] += 1.0;
        }
    }
    let inv: Vec<f64> = (0..n).map(|v| 1.0 / (g.degree(v) as f64).sqrt()).collect();
    let mut l = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] -= a[(i, j)] * inv[i] * inv[j];
        }
    }
    let mut ev: Vec<f64> = l.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Some((ev[1] / 2.0).max(0.0))
}

fn certify(g: &MultiGraph, cluster: &[usize], phi: f64, opts: &DecompOptions) -> Result<ClusterCert> {
    let (h, _) = g.induced_with_loops(cluster)?;
    let vol = h.total_volume();
    let size = cluster.len();
    if size <= opts.brute_cap.min(crate::oracles::BRUTE_CAP) {
        let value = match brute_force_min_conductance(&h)? {
            Some((r, _)) => *r.numer() as f64 / *r.denom() as f64,
            None => 1.0,
        };
        return Ok(ClusterCert { size, vol, cert_method: CertMethod::Brute, cert_value: value });
    }
    if size <= opts.eigen_cap {
        if let Some(v) = cheeger_lower_bound(&h) {
            return Ok(ClusterCert { size, vol, cert_method: CertMethod::Eigenvalue, cert_value: v });
        }
    }
    Ok(ClusterCert { size, vol, cert_method: CertMethod::GameCertified, cert_value: phi })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrimReport {
    pub kept: Vec<usize>,
    pub boundary_before: u64,
    pub boundary_after: u64,
    pub vol_before: u64,
    pub vol_after: u64,
    /// Violated volume/boundary clauses.
    pub violations: Vec<String>,
}

fn boundary(g: &MultiGraph, mask: &[bool]) -> u64 {
    g.edges().iter().filter(|&&(u, v)| mask[u] != mask[v]).count() as u64
}

/// Shrinks `a` until the flow that pushes `⌈2/φ⌉` units into `A` per
/// boundary edge can be absorbed with sink capacity `deg(v)` and edge
/// capacity `⌈2/φ⌉`. Every vertex shaved off turns its edges into new
/// boundary edges, which inject more mass.
pub fn trim(g: &MultiGraph, a: &[usize], phi: f64) -> Result<Vec<usize>> {
    Ok(trim_report(g, a, phi)?.kept)
}

pub fn trim_report(g: &MultiGraph, a: &[usize], phi: f64) -> Result<TrimReport> {
    if !(phi > 0.0 && phi < 1.0) {
        return input("phi must lie in (0,1)");
    }
    let mask = g.mask_of(a)?;
    let b0 = boundary(g, &mask);
    let vol_a = g.volume_mask(&mask);
    if 10.0 * b0 as f64 > phi * vol_a as f64 {
        return input(format!("boundary {b0} exceeds phi vol(A)/10 = {}", phi * vol_a as f64 / 10.0));
    }
    let unit = (2.0 / phi).ceil() as i64;
    let n = g.n();
    let mut delta = vec![0i64; n];
    for &(u, v) in g.edges() {
        if mask[u] && !mask[v] {
            delta[u] += unit;
        } else if mask[v] && !mask[u] {
            delta[v] += unit;
        }
    }
    let sinks: Vec<i64> = (0..n).map(|v| if mask[v] { g.degree(v) as i64 } else { 0 }).collect();
    let mut s = FlowState::with_alive(g, delta, sinks, unit, mask.clone())?;
    let h = (40.0 * ((2 * g.m().max(1)) as f64).log2() / phi).ceil() as u32;
    for _ in 0..=n {
        let Some(lc) = unit_flow(g, h, &mut s)? else {
            let kept: Vec<usize> = (0..n).filter(|&v| s.alive[v]).collect();
            let b1 = boundary(g, &s.alive);
            let vol1 = g.volume_mask(&s.alive);
            let mut violations = Vec::new();
            if (vol1 as f64) < vol_a as f64 - 4.0 / phi * b0 as f64 {
                violations.push(format!("kept volume {vol1} below vol(A) - 4|E(A,Ā)|/φ"));
            }
            if b1 > 2 * b0 {
                violations.push(format!("boundary grew from {b0} to {b1}"));
            }
            return Ok(TrimReport {
                kept,
                boundary_before: b0,
                boundary_after: b1,
                vol_before: vol_a,
                vol_after: vol1,
                violations,
            });
        };
        for &v in &lc.members {
            s.alive[v] = false;
        }
        for &v in &lc.members {
            for &(w, e) in g.neighbors(v) {
                if w != v && s.alive[w] {
                    s.delta[w] += unit;
                    s.flow[e] = 0;
                }
            }
        }
        s.recompute_mass(g);
    }
    internal("trimming did not converge")
}

struct Item {
    vertices: Vec<usize>,
    seed: u64,
    depth: usize,
}

pub fn decomp(g: &MultiGraph, spec: &ParamSpec) -> Result<Partition> {
    decomp_with(g, spec, &DecompOptions::default())
}

pub fn decomp_with(g: &MultiGraph, spec: &ParamSpec, opts: &DecompOptions) -> Result<Partition> {
    if g.n() == 0 {
        return input("empty graph");
    }
    spec.resolve(g.m().max(1))?;
    let lg = (g.m() as f64 + 1.0).log2().ceil() as usize;
    let max_depth = 8 * lg * lg + 16;
    let mut work = vec![Item { vertices: (0..g.n()).collect(), seed: spec.seed, depth: 0 }];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut games = Vec::new();
    let mut rounds_total = 0;

    while let Some(item) = work.pop() {
        if item.depth > max_depth {
            return internal(format!("recursion depth exceeded {max_depth} on {} vertices", item.vertices.len()));
        }
        let (h, map) = g.induced_with_loops(&item.vertices)?;
        let comps = h.components();
        if comps.len() > 1 {
            for (i, comp) in comps.into_iter().enumerate() {
                let vs: Vec<usize> = comp.iter().map(|&v| map[v]).collect();
                work.push(Item { vertices: vs, seed: child_seed(item.seed, i as u64), depth: item.depth + 1 });
            }
            continue;
        }
        if item.vertices.len() == 1 || h.m() == h.loop_count() {
            clusters.push(item.vertices);
            continue;
        }
        let params: Params = spec.resolve_seeded(h.m(), item.seed)?;
        let out = cut_matching(&h, &params, opts.game)?;
        rounds_total += out.rounds;
        let congestion_ok = opts.audit_congestion.then(|| congestion_audit(&out.matchings, 2 * h.m(), params.c).ok);
        games.push(GameSummary {
            depth: item.depth,
            n: h.n(),
            m: h.m(),
            case: out.case,
            rounds: out.rounds,
            c: params.c,
            cut_conductance: out.cut_conductance(&h),
            max_load: out.max_cumulative_load(),
            congestion_ok,
        });
        let to_global = |vs: &[usize]| -> Vec<usize> { vs.iter().map(|&v| map[v]).collect() };
        let push_both = |work: &mut Vec<Item>, a: Vec<usize>, r: Vec<usize>| {
            work.push(Item { vertices: a, seed: child_seed(item.seed, 0), depth: item.depth + 1 });
            work.push(Item { vertices: r, seed: child_seed(item.seed, 1), depth: item.depth + 1 });
        };
        match out.case {
            CaseKind::Certified => clusters.push(item.vertices),
            CaseKind::TooSmall => match brute_force_min_conductance(&h) {
                Ok(Some((val, witness))) if (*val.numer() as f64) < spec.phi * *val.denom() as f64 => {
                    let mut in_w = vec![false; h.n()];
                    for &v in &witness {
                        in_w[v] = true;
                    }
                    let rest: Vec<usize> = (0..h.n()).filter(|&v| !in_w[v]).collect();
                    push_both(&mut work, to_global(&witness), to_global(&rest));
                }
                _ => clusters.push(item.vertices),
            },
            CaseKind::BalancedCut | CaseKind::UnbalancedNearExpander if out.a.is_empty() || out.r.is_empty() => {
                log::warn!("game returned a one-sided cut; keeping {} vertices together", h.n());
                clusters.push(item.vertices)
            }
            CaseKind::BalancedCut => push_both(&mut work, to_global(&out.a), to_global(&out.r)),
            CaseKind::UnbalancedNearExpander => match trim_report(&h, &out.a, spec.phi) {
                Ok(rep) if rep.violations.is_empty() && !rep.kept.is_empty() => {
                    let mut kept = vec![false; h.n()];
                    for &v in &rep.kept {
                        kept[v] = true;
                    }
                    let rest: Vec<usize> = (0..h.n()).filter(|&v| !kept[v]).collect();
                    let (hk, kmap) = h.induced_with_loops(&rep.kept)?;
                    for comp in hk.components() {
                        clusters.push(comp.iter().map(|&v| map[kmap[v]]).collect());
                    }
                    if !rest.is_empty() {
                        work.push(Item { vertices: to_global(&rest), seed: child_seed(item.seed, 1), depth: item.depth + 1 });
                    }
                }
                Ok(rep) => {
                    log::info!("trim contract not met ({:?}); splitting at the game cut", rep.violations);
                    push_both(&mut work, to_global(&out.a), to_global(&out.r));
                }
                Err(e) => {
                    log::info!("trim refused ({e}); splitting at the game cut");
                    push_both(&mut work, to_global(&out.a), to_global(&out.r));
                }
            },
        }
    }

    for c in clusters.iter_mut() {
        c.sort_unstable();
    }
    clusters.sort_unstable_by_key(|c| c[0]);
    let per_cluster = clusters.iter().map(|c| certify(g, c, spec.phi, opts)).collect::<Result<Vec<_>>>()?;
    let mut p = Partition {
        clusters,
        inter_cluster_edges: 0,
        per_cluster,
        rounds_total,
        seed: spec.seed,
        params: spec.clone(),
        bound: {
            let lg = crate::params::log2m(g.m());
            spec.phi * g.m() as f64 * lg * lg
        },
        games,
    };
    p.inter_cluster_edges = p.recount(g)?;
    Ok(p)
}
