//! Seeded property suites over generated instances. Instance `i` of a run
//! with seed `s` uses seed `s + i`, so a failure is reproduced by
//! `verify --suite <name> --seed <s + i> --instances 1`.

use expander_core::cut_matching::{GameState, StepResult};
use expander_core::graph::{MultiGraph, Subdivision};
use expander_core::io::write_edge_list;
use expander_core::oracles::{
    check_expansion_estimate, check_rst_conditions, dense_flow_matrix, dense_w_and_potential, respecting_cuts,
    EstimateVerdict, BRUTE_CAP, DENSE_CAP, ESTIMATE_CAP,
};
use expander_core::rng::{rng_from, Rng};
use expander_core::spectral::{find_source_target_sets, project_power, sample_unit_vector};
use expander_core::unit_flow::{check_cut_outcome, check_valid_solution, route_flow, RouteConfig, RouteFlowOutcome};
use expander_core::{GameOptions, Mode, ParamSpec, Result};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    All,
    Matrix,
    Rst,
    Flow,
    Subdivision,
    Estimate,
}

impl Suite {
    pub const EACH: [Suite; 5] = [Suite::Matrix, Suite::Rst, Suite::Flow, Suite::Subdivision, Suite::Estimate];

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Matrix => "matrix",
            Suite::Rst => "rst",
            Suite::Flow => "flow",
            Suite::Subdivision => "subdivision",
            Suite::Estimate => "estimate",
        }
    }

    /// Default and largest instance size: edges for `matrix`, entries for
    /// `rst`, vertices for `flow`, `n + m` for `subdivision`, active
    /// entries for `estimate`.
    pub fn size_limits(self) -> (usize, usize) {
        match self {
            Suite::All => (0, usize::MAX),
            Suite::Matrix => (40, DENSE_CAP),
            Suite::Rst => (128, 1 << 16),
            Suite::Flow => (60, 2000),
            Suite::Subdivision => (16, BRUTE_CAP),
            Suite::Estimate => (12, ESTIMATE_CAP),
        }
    }
}

pub struct Failure {
    pub suite: Suite,
    pub seed: u64,
    pub message: String,
    /// Edge list of the failing graph, when there is one.
    pub instance: Option<String>,
}

pub struct SuiteReport {
    pub checked: usize,
    pub failures: Vec<Failure>,
}

pub struct VerifyConfig {
    pub seed: u64,
    pub instances: usize,
    pub size: Option<usize>,
    pub inject_fault: bool,
}

fn random_connected(rng: &mut Rng, n: usize, extra: usize, loops: bool) -> MultiGraph {
    let mut e = Vec::new();
    for v in 1..n {
        e.push((rng.random_range(0..v), v));
    }
    while e.len() < n - 1 + extra {
        let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
        if u != v || loops {
            e.push((u, v));
        }
    }
    MultiGraph::new(n, e).expect("valid endpoints")
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let size = cfg.size.unwrap_or(suite.size_limits().0);
    let mut report = SuiteReport { checked: 0, failures: Vec::new() };
    for i in 0..cfg.instances {
        let seed = cfg.seed.wrapping_add(i as u64);
        let mut rng = rng_from(seed);
        let outcome = match suite {
            Suite::Matrix => matrix_instance(&mut rng, seed, size, cfg.inject_fault)?,
            Suite::Rst => rst_instance(&mut rng, size)?,
            Suite::Flow => flow_instance(&mut rng, size)?,
            Suite::Subdivision => subdivision_instance(&mut rng, size)?,
            Suite::Estimate => estimate_instance(&mut rng, size)?,
            Suite::All => unreachable!("expanded by the caller"),
        };
        report.checked += 1;
        if let Err((message, instance)) = outcome {
            report.failures.push(Failure { suite, seed, message, instance });
        }
    }
    Ok(report)
}

type Check = std::result::Result<(), (String, Option<String>)>;

/// `project_power` against the dense `(Δ F Δ)^d r` after a few game rounds.
fn matrix_instance(rng: &mut Rng, seed: u64, max_m: usize, fault: bool) -> Result<Check> {
    let max_m = max_m.max(16);
    let n = rng.random_range(6..=(max_m / 2).max(6));
    let m = rng.random_range(16.max(n)..=max_m);
    let g = random_connected(rng, n, m - (n - 1), true);
    let p = ParamSpec::desk(0.05, seed).resolve(g.m())?;
    let mut st = GameState::new(&g, &p, GameOptions::default())?;
    for _ in 0..rng.random_range(0..=4) {
        if st.step()? == StepResult::TooSmall {
            break;
        }
    }
    let active = st.active_splits();
    if active.is_empty() {
        return Ok(Ok(()));
    }
    let r = sample_unit_vector(g.m(), rng)?;
    let mut u = project_power(&st.matchings, &active, &r, p.d)?.u;
    if fault {
        u[active[0]] += 1e-3;
    }
    let f = dense_flow_matrix(&st.matchings, g.m(), p.d, DENSE_CAP)?;
    let (w, _) = dense_w_and_potential(&f, &active, p.d, DENSE_CAP)?;
    let mut worst = 0.0f64;
    for (i, ui) in u.iter().enumerate() {
        let want: f64 = (0..g.m()).map(|j| w[(i, j)] * r[j]).sum();
        worst = worst.max((ui - want).abs());
    }
    if worst > 1e-8 {
        return Ok(Err((format!("projection differs from dense W r by {worst:.3e}"), Some(write_edge_list(&g)))));
    }
    Ok(Ok(()))
}

fn rst_instance(rng: &mut Rng, max_k: usize) -> Result<Check> {
    let k = rng.random_range(16..=max_k.max(16));
    let mut u: Vec<f64> = match rng.random_range(0..3) {
        0 => (0..k).map(|_| rng.random_range(-1.0..1.0)).collect(),
        1 => (0..k).map(|_| rng.random_range(-3i32..=3) as f64).collect(),
        _ => (0..k).map(|_| rng.random_range(0.0f64..1.0).powi(8) * if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect(),
    };
    let mean = u.iter().sum::<f64>() / k as f64;
    u.iter_mut().for_each(|x| *x -= mean);
    let ids: Vec<usize> = (0..k).collect();
    let sets = find_source_target_sets(&ids, &u, 16)?;
    if !check_rst_conditions(&ids, &u, &sets) {
        return Ok(Err((format!("source/target conditions fail for k={k}, eta={}", sets.eta), None)));
    }
    Ok(Ok(()))
}

fn flow_instance(rng: &mut Rng, max_n: usize) -> Result<Check> {
    let n = rng.random_range(8..=max_n.max(8));
    let extra = rng.random_range(0..=2 * n);
    let loops = rng.random_bool(0.5);
    let g = random_connected(rng, n, extra, loops);
    let m = g.m();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let nl = rng.random_range(1..=(m / 8).max(1)).min(n / 3).max(1);
    let nr = (n - nl).min((5 * m).div_ceil(24).max(1));
    let (left, right) = (order[..nl].to_vec(), order[nl..nl + nr].to_vec());
    let c = rng.random_range(2..=6u64);
    let h = (10.0 * c as f64 * (m.max(2) as f64).log2()).ceil() as u64;
    let res = route_flow(&g, None, &left, &right, RouteConfig { c, h, mode: Mode::Desk })?;
    let bad = match &res.outcome {
        RouteFlowOutcome::Feasible(f) => check_valid_solution(&g, f, h as u32).err().map(|e| e.to_string()),
        RouteFlowOutcome::CutFound { cut, flow } => {
            let all = vec![true; n];
            let mut v = check_cut_outcome(&g, &all, cut, c, m);
            if let Err(e) = check_valid_solution(&g, flow, h as u32) {
                v.push(e.to_string());
            }
            (!v.is_empty()).then(|| v.join("; "))
        }
    };
    Ok(match bad {
        Some(msg) => Err((format!("route outcome (c={c}, h={h}): {msg}"), Some(write_edge_list(&g)))),
        None => Ok(()),
    })
}

fn degrees(g: &MultiGraph, mask: &[bool]) -> u64 {
    (0..g.n()).filter(|&v| mask[v]).map(|v| g.degree(v) as u64).sum()
}

fn crossing(g: &MultiGraph, mask: &[bool]) -> u64 {
    g.edges().iter().filter(|&&(u, v)| mask[u] != mask[v]).count() as u64
}

/// Volumes and conductances carried between `G` and `G_E` across every
/// cut that respects the subdivision.
fn subdivision_instance(rng: &mut Rng, max_total: usize) -> Result<Check> {
    let max_total = max_total.max(5);
    let n = rng.random_range(3..=(max_total / 2).clamp(3, 7));
    let m = rng.random_range(n - 1..=(max_total - n).max(n - 1));
    let g = random_connected(rng, n, m - (n - 1), false);
    let sd = Subdivision::new(&g);
    let ge = sd.graph();
    for mk in respecting_cuts(&sd)? {
        let sv = &mk[..n];
        let k = sv.iter().filter(|&&b| b).count();
        if k == 0 || k == n {
            continue;
        }
        let (vg, ve) = (degrees(&g, sv), degrees(ge, &mk));
        if !(vg <= ve && ve <= 3 * vg) {
            return Ok(Err((format!("volume {vg} in G vs {ve} in G_E"), Some(write_edge_list(&g)))));
        }
        let rest_g: Vec<bool> = sv.iter().map(|b| !b).collect();
        let rest_e: Vec<bool> = mk.iter().map(|b| !b).collect();
        let (cg, dg) = (crossing(&g, sv), vg.min(degrees(&g, &rest_g)));
        let (ce, de) = (crossing(ge, &mk), ve.min(degrees(ge, &rest_e)));
        if dg > 0 && de > 0 && cg * de > 3 * ce * dg {
            return Ok(Err((format!("conductance {cg}/{dg} in G above 3 x {ce}/{de}"), Some(write_edge_list(&g)))));
        }
    }
    Ok(Ok(()))
}

/// Near-uniform synthetic flow matrices: small `λ̄` must force expansion.
fn estimate_instance(rng: &mut Rng, max_k: usize) -> Result<Check> {
    let k = rng.random_range(2..=max_k.max(2));
    let m = k + rng.random_range(0..=4);
    let mut active: Vec<usize> = (0..m).collect();
    active.shuffle(rng);
    active.truncate(k);
    active.sort_unstable();
    let eps = rng.random_range(0.0..0.01);
    let mut f = DMatrix::<f64>::identity(m, m);
    for &i in &active {
        for &j in &active {
            f[(i, j)] = (1.0 - eps) / k as f64;
        }
    }
    let mut perm = active.clone();
    perm.shuffle(rng);
    for (a, &i) in active.iter().enumerate() {
        f[(i, perm[a])] += eps / 2.0;
        f[(perm[a], i)] += eps / 2.0;
    }
    let est = check_expansion_estimate(&f, &active)?;
    Ok(match est.verdict {
        EstimateVerdict::Fails(s) => Err((format!("λ̄ = {:.4} but set {s:?} expands too little", est.lambda_bar), None)),
        _ => Ok(()),
    })
}
