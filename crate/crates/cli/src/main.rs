//! `xdecomp`: expander decomposition, single games, oracle suites and
//! graph generators. Exit codes: 0 success, 1 property failure, 2 input
//! error, 3 internal invariant violation.

mod verify;

use clap::{Args, Parser, Subcommand};
use expander_core::cut_matching::{GameState, StepResult};
use expander_core::gen::{dumbbell, planted, random_regular, Part};
use expander_core::io::{parse_edge_list, write_edge_list};
use expander_core::oracles::{dense_flow_matrix, dense_w_and_potential, DENSE_CAP};
use expander_core::params::Overrides;
use expander_core::spectral::{project_power, sample_unit_vector};
use expander_core::{cut_matching, decomp, CaseKind, Error, GameOptions, Mode, MultiGraph, ParamSpec};
use serde::Serialize;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use verify::{run_suite, Suite, VerifyConfig};

#[derive(Parser)]
#[command(name = "xdecomp", version, about = "Expander decomposition of undirected multigraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition a graph into near-expanders.
    Decompose(RunArgs),
    /// Play one cut-matching game and report which outcome occurred.
    Cutmatch {
        #[command(flatten)]
        run: RunArgs,
        /// Track the potential with the dense oracle (small graphs only).
        #[arg(long)]
        oracle: bool,
    },
    /// Run the oracle and property suites on seeded instances.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        instances: usize,
        /// Instance size; the meaning depends on the suite.
        #[arg(long)]
        size: Option<usize>,
        /// Perturb the projection so the matrix suite must fail.
        #[arg(long)]
        inject_fault: bool,
    },
    /// Replay a game on a small graph, checking the implicit projection
    /// against the dense flow matrix after every round.
    OracleCompare(RunArgs),
    /// Write a benchmark graph as an edge list.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        #[arg(long, default_value_t = 0, global = true)]
        seed: u64,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Configuration-model d-regular graph; loops and parallel edges kept
    /// unless `--simple`.
    Regular {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        simple: bool,
    },
    /// Two cliques on `n` vertices joined by one edge.
    Dumbbell {
        #[arg(long)]
        n: usize,
    },
    /// `k` parts of `n` vertices in a ring of `b` bridges. Parts are
    /// cliques, or random `degree`-regular graphs when given.
    Planted {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        b: usize,
        #[arg(long)]
        degree: Option<usize>,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Edge-list file: header `n m`, then one `u v` per line.
    input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    phi: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "desk")]
    mode: Mode,
    #[arg(long = "T")]
    rounds: Option<usize>,
    #[arg(long = "Z")]
    z: Option<f64>,
    #[arg(long)]
    c: Option<u64>,
    #[arg(long)]
    d: Option<u64>,
    #[arg(long)]
    h: Option<u64>,
    /// JSON-lines trace file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Result JSON file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Resolved settings for one graph command.
struct RunConfig {
    graph: MultiGraph,
    spec: ParamSpec,
    out: Option<PathBuf>,
    trace: Option<PathBuf>,
}

impl RunArgs {
    /// Reads the graph and checks the parameters before any work is done.
    fn load(&self) -> Result<RunConfig, Failure> {
        let text = std::fs::read_to_string(&self.input)
            .map_err(|e| Failure::input(format!("{}: {e}", self.input.display())))?;
        let graph = parse_edge_list(&text).map_err(|e| Failure::core(e, Some(&self.input)))?;
        let overrides = Overrides { rounds: self.rounds, z: self.z, c: self.c, d: self.d, h: self.h };
        let spec = ParamSpec { phi: self.phi, mode: self.mode, seed: self.seed, overrides };
        spec.resolve(graph.m().max(1)).map_err(|e| Failure::core(e, None))?;
        Ok(RunConfig { graph, spec, out: self.out.clone(), trace: self.trace.clone() })
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: String) -> Self {
        Failure { code: 2, message }
    }

    fn core(e: Error, file: Option<&Path>) -> Self {
        let message = match file {
            Some(f) => format!("{}: {e}", f.display()),
            None => e.to_string(),
        };
        Failure { code: e.exit_code() as u8, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::core(e, None)
    }
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|e| Failure::input(e.to_string()))
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn json_lines<T: Serialize>(records: &[T]) -> String {
    records.iter().map(|r| serde_json::to_string(r).expect("serializable") + "\n").collect()
}

fn cmd_decompose(args: &RunArgs) -> Result<u8, Failure> {
    let cfg = args.load()?;
    let p = decomp(&cfg.graph, &cfg.spec)?;
    let recount = p.recount(&cfg.graph)?;
    if recount != p.inter_cluster_edges {
        return Err(Failure::core(
            Error::Internal(format!("reported {} inter-cluster edges, recount {recount}", p.inter_cluster_edges)),
            None,
        ));
    }
    write_text(cfg.out.as_deref(), &json(&p))?;
    if let Some(t) = &cfg.trace {
        write_text(Some(t), &json_lines(&p.games))?;
    }
    let summary = format!("clusters={} inter_edges={} bound={:.3}", p.clusters.len(), p.inter_cluster_edges, p.bound);
    if cfg.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(0)
}

fn cmd_cutmatch(args: &RunArgs, oracle: bool) -> Result<u8, Failure> {
    let cfg = args.load()?;
    let params = cfg.spec.resolve(cfg.graph.m())?;
    let opts = GameOptions { track_potential: oracle, ..GameOptions::default() };
    let out = cut_matching(&cfg.graph, &params, opts)?;
    write_text(cfg.out.as_deref(), &json(&out))?;
    if let Some(t) = &cfg.trace {
        write_text(Some(t), &json_lines(&out.trace))?;
    }
    let case = serde_json::to_value(out.case).expect("serializable");
    let mut line = format!(
        "case={} rounds={} vol_r={} guard={:.3} max_load={} c={}",
        case.as_str().unwrap_or("?"),
        out.rounds,
        out.vol_r,
        out.guard,
        out.max_cumulative_load(),
        params.c
    );
    let mut code = 0;
    if matches!(out.case, CaseKind::BalancedCut | CaseKind::UnbalancedNearExpander) {
        let limit = 150.0 / params.c as f64;
        match out.cut_conductance(&cfg.graph) {
            Some(phi) => {
                line += &format!(" cut_conductance={phi:.4} limit={limit:.4}");
                if phi > limit {
                    code = 1;
                }
            }
            None => line += " cut_conductance=none",
        }
    }
    if let Some(psi) = out.trace.last().and_then(|r| r.psi) {
        line += &format!(" psi={psi:.3e}");
    }
    let target: &mut dyn std::io::Write = if cfg.out.is_some() { &mut std::io::stdout() } else { &mut std::io::stderr() };
    let _ = writeln!(target, "{line}");
    Ok(code)
}

#[derive(Serialize)]
struct CompareRecord {
    t: usize,
    active: usize,
    max_abs_diff: f64,
    psi: f64,
}

fn cmd_oracle_compare(args: &RunArgs) -> Result<u8, Failure> {
    let cfg = args.load()?;
    let g = &cfg.graph;
    if g.m() > DENSE_CAP {
        return Err(Error::OverCap { size: g.m(), cap: DENSE_CAP }.into());
    }
    let params = cfg.spec.resolve(g.m())?;
    let mut st = GameState::new(g, &params, GameOptions::default())?;
    let mut rng = expander_core::rng::rng_from(params.seed);
    let mut records = Vec::new();
    loop {
        let active = st.active_splits();
        if active.is_empty() {
            break;
        }
        let r = sample_unit_vector(g.m(), &mut rng)?;
        let u = project_power(&st.matchings, &active, &r, params.d)?.u;
        let f = dense_flow_matrix(&st.matchings, g.m(), params.d, DENSE_CAP)?;
        let (w, psi) = dense_w_and_potential(&f, &active, params.d, DENSE_CAP)?;
        let mut worst = 0.0f64;
        for (i, ui) in u.iter().enumerate() {
            let want: f64 = (0..g.m()).map(|j| w[(i, j)] * r[j]).sum();
            worst = worst.max((ui - want).abs());
        }
        records.push(CompareRecord { t: st.t, active: active.len(), max_abs_diff: worst, psi });
        if st.t >= params.rounds || st.balanced() || st.step()? == StepResult::TooSmall {
            break;
        }
    }
    let worst = records.iter().fold(0.0f64, |a, r| a.max(r.max_abs_diff));
    write_text(cfg.out.as_deref(), &json_lines(&records))?;
    if let Some(t) = &cfg.trace {
        write_text(Some(t), &json_lines(&st.trace))?;
    }
    eprintln!("rounds={} max_abs_diff={worst:.3e}", records.len().saturating_sub(1));
    Ok(if worst <= 1e-8 { 0 } else { 1 })
}

fn cmd_verify(suite: Suite, cfg: VerifyConfig) -> Result<u8, Failure> {
    let suites: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
    if let Some(size) = cfg.size {
        for s in &suites {
            let cap = s.size_limits().1;
            if size > cap {
                return Err(Failure::input(format!("refusing suite {}: size {size} exceeds the oracle cap {cap}", s.name())));
            }
        }
    }
    let mut failed = false;
    for s in suites {
        let report = run_suite(s, &cfg)?;
        let tag = if report.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("{tag} {} ({} instances, {} failures)", s.name(), report.checked, report.failures.len());
        if let Some(f) = report.failures.first() {
            failed = true;
            println!("  {}: {}", f.suite.name(), f.message);
            println!("  reproduce: xdecomp verify --suite {} --seed {} --instances 1", f.suite.name(), f.seed);
            if let Some(inst) = &f.instance {
                print!("{}", inst.lines().map(|l| format!("  | {l}\n")).collect::<String>());
            }
        }
    }
    Ok(u8::from(failed))
}

fn cmd_gen(kind: &GenKind, seed: u64, out: Option<&Path>) -> Result<u8, Failure> {
    let g = match *kind {
        GenKind::Regular { n, d, simple } => random_regular(n, d, seed, simple)?,
        GenKind::Dumbbell { n } => dumbbell(n),
        GenKind::Planted { k, n, b, degree } => {
            let part = degree.map_or(Part::Complete, Part::Regular);
            planted(k, n, part, b, seed)?
        }
    };
    write_text(out, &write_edge_list(&g))?;
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Decompose(a) => cmd_decompose(a),
        Command::Cutmatch { run, oracle } => cmd_cutmatch(run, *oracle),
        Command::OracleCompare(a) => cmd_oracle_compare(a),
        Command::Verify { suite, seed, instances, size, inject_fault } => cmd_verify(
            *suite,
            VerifyConfig { seed: *seed, instances: *instances, size: *size, inject_fault: *inject_fault },
        ),
        Command::Gen { kind, seed, out } => cmd_gen(kind, *seed, out.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
