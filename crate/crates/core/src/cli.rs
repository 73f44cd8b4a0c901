//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure,
//! 3 guard or geometry violation. Every file written through `--out` gets a
//! sidecar `<out>.manifest.json` with the parsed parameters and a SHA-256
//! digest of the output.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::clusters::{build_pair, components, crossing_event, one_arm_event, two_largest};
use crate::error::{Error, Result};
use crate::hypercube::{
    default_atom_threshold, domination_margin_check, hypercube_trials, single_vertex_inequality, trials_to_csv,
};
use crate::interlace::container::{dump_json, read_container, write_container, StoredSample};
use crate::interlace::{sample_interlacement, vacuum_probability_test, ForwardPolicy, SampleOptions, WindowKernel};
use crate::lattice::{Adjacency, BoxIndexer, LatticeBox, Point};
use crate::phase::{cells_to_csv, BisectOptions, PhaseEngine, PhaseGridSpec, Selector};
use crate::potential::{capacity_auto, escape_probability_hypercube, green, GreenTable, DEFAULT_TOL};
use crate::renorm::{path_implies_hierarchical, trigger_certificate, trigger_from_counts, RenormScheme};
use crate::report::{fmt_f64, to_json, write_atomic, CsvTable};
use crate::rng::{derive_seed, try_par_trials};
use crate::walk::{annulus_intersection_estimate, cut_time_density, disc_green_table, green_weighted_functional};

const GLOBAL_KEYS: [&str; 5] = ["dim", "seed", "trials", "out", "threads"];

#[derive(Debug, Parser, Serialize)]
#[command(name = "rilab", version, about = "Random interlacements laboratory", args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct GlobalArgs {
    /// Lattice dimension.
    #[arg(long, global = true, default_value_t = 3)]
    pub dim: usize,
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo trials (each subcommand has its own default).
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; never changes results.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// TOML file whose keys mirror the flags; flags win.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<Point> {
    Point::parse(s)
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Green function G(0,x).
    Green {
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: Point,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Capacity and equilibrium measure of a set or box.
    Cap {
        /// Points separated by ';', e.g. "0,0,0;1,0,0".
        #[arg(long, allow_hyphen_values = true, conflicts_with = "box")]
        set: Option<String>,
        /// Radius of a centered box.
        #[arg(long = "box")]
        r#box: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Hypercube escape probability.
    Escape {
        /// Dimensions (defaults to --dim).
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// One interlacement sample written as a binary container.
    Sample {
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long)]
        u: f64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
    },
    /// Vacuum probability of a set against e^{-u cap(A)}.
    Vacuum {
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long)]
        u: f64,
        #[arg(long, allow_hyphen_values = true, conflicts_with = "box")]
        set: Option<String>,
        #[arg(long = "box")]
        r#box: Option<u32>,
    },
    /// Per-sample statistics of K and V.
    Intersect {
        #[command(flatten)]
        window: WindowArgs,
        #[arg(long)]
        u1: f64,
        #[arg(long)]
        u2: f64,
        /// Crossing scale (default N/2).
        #[arg(long = "L")]
        l: Option<u32>,
    },
    /// Crossing probability of one (u1, u2) cell.
    Crossing {
        #[command(flatten)]
        cell: CellArgs,
        #[arg(long)]
        u1: f64,
        #[arg(long)]
        u2: f64,
    },
    /// Crossing-probability grid.
    Scan {
        #[command(flatten)]
        cell: CellArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        u1: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        u2: Vec<f64>,
    },
    /// Bracket for the empirical finite-size curve u2*(u1).
    Curve {
        #[command(flatten)]
        cell: CellArgs,
        #[arg(long)]
        u1: f64,
        #[arg(long = "p-star", default_value_t = 0.5)]
        p_star: f64,
        /// Bracket width in u2.
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
        #[arg(long = "max-doublings", default_value_t = 5)]
        max_doublings: u32,
    },
    /// Cut-time density of d-dimensional walks.
    CutDensity {
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
        #[arg(long, default_value_t = 1_000)]
        guard: usize,
    },
    /// Two-walk intersection on the inner boundary of B(0,M).
    Annulus {
        #[arg(long = "M", value_delimiter = ',', required = true)]
        m: Vec<u32>,
        #[arg(long = "kill-radius")]
        kill_radius: Option<u32>,
    },
    /// P[D_M >= eps log M] for the Green-weighted quarter-disc functional.
    DiscFunctional {
        #[arg(long = "M", value_delimiter = ',', required = true)]
        m: Vec<u32>,
        #[arg(long)]
        epsilon: f64,
        #[arg(long = "kill-radius")]
        kill_radius: Option<u32>,
    },
    /// Bernoulli hypercube trials or the domination check.
    Hypercube {
        #[arg(long)]
        p: Option<f64>,
        /// Atom threshold (default d²).
        #[arg(long = "atom-threshold")]
        atom_threshold: Option<usize>,
        /// Vertex set S for the domination check, as vertex indices.
        #[arg(long, value_delimiter = ',', conflicts_with = "p")]
        domination: Option<Vec<u32>>,
    },
    /// Trigger certificate (2l0+1)^{2d}(p+eps1+eps2) < 1/2.
    Trigger {
        #[arg(long = "p-upper", conflicts_with = "successes")]
        p_upper: Option<f64>,
        /// Seed-event successes; with --of, p_upper is the Wilson upper limit.
        #[arg(long, requires = "of")]
        successes: Option<u64>,
        #[arg(long)]
        of: Option<u64>,
        #[arg(long)]
        l0: u32,
        #[arg(long)]
        eps1: f64,
        #[arg(long)]
        eps2: f64,
        #[arg(long, default_value_t = 10)]
        levels: u32,
    },
    /// Path-implies-hierarchical check on sampled configurations.
    RenormCheck {
        #[arg(long = "L0")]
        base: u32,
        #[arg(long)]
        l0: u32,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long)]
        u1: f64,
        #[arg(long)]
        u2: f64,
        #[arg(long, default_value = "V")]
        selector: Selector,
    },
    /// Plain JSON rendering of a sample container.
    Dump {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct WindowArgs {
    /// Window radius.
    #[arg(long = "N")]
    pub n: u32,
    /// Kill forward walks outside B(0,R) instead of exact re-entry.
    #[arg(long = "kill-radius")]
    pub kill_radius: Option<u32>,
}

#[derive(Debug, Args, Serialize)]
pub struct CellArgs {
    #[arg(long, default_value = "V")]
    pub selector: Selector,
    #[arg(long = "L")]
    pub l: u32,
}

fn policy(kill: Option<u32>) -> ForwardPolicy {
    kill.map_or(ForwardPolicy::Exact, ForwardPolicy::KillRadius)
}

fn kernel(dim: usize, w: &WindowArgs) -> Result<WindowKernel> {
    WindowKernel::new(dim, w.n, policy(w.kill_radius), DEFAULT_TOL)
}

fn parse_set(s: &str, dim: usize) -> Result<Vec<Point>> {
    let pts: Vec<Point> = s.split(';').filter(|t| !t.trim().is_empty()).map(Point::parse).collect::<Result<_>>()?;
    if pts.is_empty() {
        return Err(Error::InvalidArgument("empty set".into()));
    }
    if let Some(p) = pts.iter().find(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
    }
    Ok(pts)
}

fn set_or_box(set: &Option<String>, bx: Option<u32>, dim: usize) -> Result<Vec<Point>> {
    match (set, bx) {
        (Some(s), _) => parse_set(s, dim),
        (None, Some(r)) => Ok(LatticeBox::centered(dim, r).points()),
        (None, None) => Ok(vec![Point::origin(dim)]),
    }
}

/// What a subcommand produced.
enum Output {
    Text(String),
    Binary(Vec<u8>),
}

#[derive(Serialize)]
struct OutputDigest {
    path: String,
    sha256: String,
    bytes: usize,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    /// Arguments that reproduce the run, config keys already spliced in.
    argv: &'a [String],
    parameters: serde_json::Value,
    seed: u64,
    started_unix_s: f64,
    finished_unix_s: f64,
    outputs: Vec<OutputDigest>,
}

fn now_s() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn subcommand_name(c: &Command) -> &'static str {
    match c {
        Command::Green { .. } => "green",
        Command::Cap { .. } => "cap",
        Command::Escape { .. } => "escape",
        Command::Sample { .. } => "sample",
        Command::Vacuum { .. } => "vacuum",
        Command::Intersect { .. } => "intersect",
        Command::Crossing { .. } => "crossing",
        Command::Scan { .. } => "scan",
        Command::Curve { .. } => "curve",
        Command::CutDensity { .. } => "cut-density",
        Command::Annulus { .. } => "annulus",
        Command::DiscFunctional { .. } => "disc-functional",
        Command::Hypercube { .. } => "hypercube",
        Command::Trigger { .. } => "trigger",
        Command::RenormCheck { .. } => "renorm-check",
        Command::Dump { .. } => "dump",
    }
}

const SUBCOMMANDS: [&str; 16] = [
    "green",
    "cap",
    "escape",
    "sample",
    "vacuum",
    "intersect",
    "crossing",
    "scan",
    "curve",
    "cut-density",
    "annulus",
    "disc-functional",
    "hypercube",
    "trigger",
    "renorm-check",
    "dump",
];

fn toml_value_arg(v: &toml::Value) -> Result<Option<String>> {
    Ok(Some(match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => format!("{f:?}"),
        toml::Value::Boolean(true) => return Ok(None),
        toml::Value::Array(a) => a
            .iter()
            .map(|x| match toml_value_arg(x)? {
                Some(s) => Ok(s),
                None => Err(Error::InvalidArgument("nested flags in config arrays".into())),
            })
            .collect::<Result<Vec<_>>>()?
            .join(","),
        other => return Err(Error::InvalidArgument(format!("unsupported config value {other}"))),
    }))
}

/// Splices `--config` file keys into `argv` ahead of the user's own flags,
/// so flags on the command line win.
pub fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path: Option<String> = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let text = std::fs::read_to_string(&path)?;
    let table: toml::Table =
        toml::from_str(&text).map_err(|e| Error::InvalidArgument(format!("config {path}: {e}")))?;
    let mut global = Vec::new();
    let mut local = Vec::new();
    for (k, v) in &table {
        if k == "config" {
            return Err(Error::InvalidArgument("config files cannot nest".into()));
        }
        let target = if GLOBAL_KEYS.contains(&k.as_str()) { &mut global } else { &mut local };
        if matches!(v, toml::Value::Boolean(false)) {
            continue;
        }
        target.push(OsString::from(format!("--{k}")));
        if let Some(val) = toml_value_arg(v)? {
            target.push(OsString::from(val));
        }
    }
    let sub = strs.iter().skip(1).position(|a| SUBCOMMANDS.contains(&a.as_str())).map(|i| i + 1);
    let mut out: Vec<OsString> = Vec::with_capacity(argv.len() + global.len() + local.len());
    out.push(argv[0].clone());
    out.extend(global);
    match sub {
        Some(si) => {
            out.extend(argv[1..=si].iter().cloned());
            out.extend(local);
            out.extend(argv[si + 1..].iter().cloned());
        }
        None => out.extend(argv[1..].iter().cloned()),
    }
    Ok(out)
}

fn execute(cli: &Cli) -> Result<Output> {
    let g = &cli.global;
    let d = g.dim;
    let trials = |default: usize| g.trials.unwrap_or(default);
    match &cli.command {
        Command::Green { point, tol } => {
            if point.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: point.dim() });
            }
            let v = green(point, d, *tol)?;
            Ok(Output::Text(format!("{}\n", fmt_f64(v))))
        }
        Command::Cap { set, r#box, tol } => {
            let k = set_or_box(set, *r#box, d)?;
            let mut t = GreenTable::new(d, *tol)?;
            Ok(Output::Text(to_json(&capacity_auto(&k, &mut t)?)?))
        }
        Command::Escape { dims, tol } => {
            let dims = if dims.is_empty() { vec![d] } else { dims.clone() };
            let rows = dims.iter().map(|&k| escape_probability_hypercube(k, *tol)).collect::<Result<Vec<_>>>()?;
            Ok(Output::Text(to_json(&rows)?))
        }
        Command::Sample { window, u, stream } => {
            if g.out.is_none() {
                return Err(Error::InvalidArgument("sample requires --out".into()));
            }
            let k = kernel(d, window)?;
            let s =
                sample_interlacement(&k, *u, &mut crate::rng::stream_rng(g.seed, *stream), SampleOptions::default())?;
            let mut buf = Vec::new();
            write_container(&mut buf, &StoredSample::from_sample(&s, g.seed, *stream))?;
            Ok(Output::Binary(buf))
        }
        Command::Vacuum { window, u, set, r#box } => {
            let a = set_or_box(set, *r#box, d)?;
            let k = kernel(d, window)?;
            let mut t = GreenTable::new(d, DEFAULT_TOL)?;
            let cap_a = capacity_auto(&a, &mut t)?;
            let r = vacuum_probability_test(&k, *u, &a, trials(20_000), g.seed, &cap_a)?;
            #[derive(Serialize)]
            struct V<'a> {
                capacity: f64,
                report: &'a crate::interlace::VacuumReport,
                consistent: bool,
                seed: u64,
            }
            Ok(Output::Text(to_json(&V {
                capacity: cap_a.capacity,
                report: &r,
                consistent: r.consistent(),
                seed: g.seed,
            })?))
        }
        Command::Intersect { window, u1, u2, l } => {
            let k = kernel(d, window)?;
            let l = l.unwrap_or(window.n / 2).max(1);
            let ix = BoxIndexer::new(d, window.n);
            let rows = try_par_trials(g.seed, trials(1), |_, rng| {
                let s1 = sample_interlacement(&k, *u1, rng, SampleOptions::default())?;
                let s2 = sample_interlacement(&k, *u2, rng, SampleOptions::default())?;
                let p = build_pair(&s1, &s2)?;
                let (k1, k2) = two_largest(&components(&p.occupancy_k, &ix, Adjacency::Nearest)?);
                let (v1, v2) = two_largest(&components(&p.occupancy_v, &ix, Adjacency::Nearest)?);
                Ok::<_, Error>([
                    u8::from(crossing_event(&p.occupancy_k, &ix, l)?) as usize,
                    u8::from(crossing_event(&p.occupancy_v, &ix, l)?) as usize,
                    u8::from(one_arm_event(&p.occupancy_k, &ix, l)?) as usize,
                    u8::from(one_arm_event(&p.occupancy_v, &ix, l)?) as usize,
                    k1,
                    k2,
                    v1,
                    v2,
                ])
            })?;
            let mut t = CsvTable::new(&[
                "sample",
                "seed",
                "u1",
                "u2",
                "L",
                "k_crossing",
                "v_crossing",
                "k_one_arm",
                "v_one_arm",
                "k_size1",
                "k_size2",
                "v_size1",
                "v_size2",
            ]);
            for (i, r) in rows.iter().enumerate() {
                let mut row = vec![i.to_string(), g.seed.to_string(), fmt_f64(*u1), fmt_f64(*u2), l.to_string()];
                row.extend(r.iter().map(|v| v.to_string()));
                t.push(row);
            }
            Ok(Output::Text(t.render()))
        }
        Command::Crossing { cell, u1, u2 } => {
            let e = PhaseEngine::new(d, cell.l, DEFAULT_TOL)?;
            let spec = PhaseGridSpec { u1: vec![*u1], u2: vec![*u2], trials: trials(400), seed: g.seed };
            Ok(Output::Text(cells_to_csv(&e.scan_grid(&spec, cell.selector)?).render()))
        }
        Command::Scan { cell, u1, u2 } => {
            let e = PhaseEngine::new(d, cell.l, DEFAULT_TOL)?;
            let spec = PhaseGridSpec { u1: u1.clone(), u2: u2.clone(), trials: trials(400), seed: g.seed };
            Ok(Output::Text(cells_to_csv(&e.scan_grid(&spec, cell.selector)?).render()))
        }
        Command::Curve { cell, u1, p_star, tol, max_doublings } => {
            let e = PhaseEngine::new(d, cell.l, DEFAULT_TOL)?;
            let opts = BisectOptions {
                p_star: *p_star,
                tolerance: *tol,
                trials: trials(400),
                seed: g.seed,
                start: 1.0,
                max_doublings: *max_doublings,
            };
            Ok(Output::Text(to_json(&e.curve_bisect(*u1, cell.selector, &opts)?)?))
        }
        Command::CutDensity { horizon, guard } => {
            let e = cut_time_density(d, *horizon, *guard, trials(1_000), g.seed)?;
            let mut t =
                CsvTable::new(&["d", "horizon", "guard", "trials", "estimate", "ci_low", "ci_high", "bias", "seed"]);
            t.push(vec![
                d.to_string(),
                horizon.to_string(),
                guard.to_string(),
                e.trials.to_string(),
                fmt_f64(e.estimate),
                fmt_f64(e.ci_low),
                fmt_f64(e.ci_high),
                fmt_f64(e.bias),
                g.seed.to_string(),
            ]);
            Ok(Output::Text(t.render()))
        }
        Command::Annulus { m, kill_radius } => {
            require_dim3(d)?;
            let mut t = CsvTable::new(&[
                "M",
                "kill_radius",
                "trials",
                "estimate",
                "ci_low",
                "ci_high",
                "bias",
                "r_m_mean",
                "seed",
            ]);
            for &mm in m {
                let seed = derive_seed(g.seed, &[mm as u64]);
                let r = annulus_intersection_estimate(mm, *kill_radius, trials(20_000), seed)?;
                t.push(vec![
                    mm.to_string(),
                    r.kill_radius.to_string(),
                    r.estimate.trials.to_string(),
                    fmt_f64(r.estimate.estimate),
                    fmt_f64(r.estimate.ci_low),
                    fmt_f64(r.estimate.ci_high),
                    fmt_f64(r.estimate.bias),
                    fmt_f64(r.r_m_mean),
                    seed.to_string(),
                ]);
            }
            Ok(Output::Text(t.render()))
        }
        Command::DiscFunctional { m, epsilon, kill_radius } => {
            require_dim3(d)?;
            let mut t = CsvTable::new(&[
                "M",
                "epsilon",
                "kill_radius",
                "trials",
                "estimate",
                "ci_low",
                "ci_high",
                "bias",
                "mean",
                "mean_se",
                "seed",
            ]);
            for &mm in m {
                let seed = derive_seed(g.seed, &[mm as u64]);
                let greens = disc_green_table(mm, DEFAULT_TOL)?.to_dense(mm);
                let r = green_weighted_functional(mm, *epsilon, *kill_radius, trials(10_000), seed, &greens)?;
                t.push(vec![
                    mm.to_string(),
                    fmt_f64(*epsilon),
                    r.kill_radius.to_string(),
                    r.estimate.trials.to_string(),
                    fmt_f64(r.estimate.estimate),
                    fmt_f64(r.estimate.ci_low),
                    fmt_f64(r.estimate.ci_high),
                    fmt_f64(r.bias_bound),
                    fmt_f64(r.mean.estimate),
                    fmt_f64(r.mean.std_err),
                    seed.to_string(),
                ]);
            }
            Ok(Output::Text(t.render()))
        }
        Command::Hypercube { p, atom_threshold, domination } => {
            if let Some(s) = domination {
                #[derive(Serialize)]
                struct D {
                    check: crate::hypercube::DominationReport,
                    single_vertex: crate::hypercube::SingleVertexInequality,
                }
                let check = domination_margin_check(d, s, trials(10_000), g.seed)?;
                let single_vertex = single_vertex_inequality(d)?;
                return Ok(Output::Text(to_json(&D { check, single_vertex })?));
            }
            let p = p.ok_or_else(|| Error::InvalidArgument("hypercube needs --p or --domination".into()))?;
            let t = atom_threshold.unwrap_or_else(|| default_atom_threshold(d));
            let rows = hypercube_trials(d, p, t, trials(100), g.seed)?;
            Ok(Output::Text(trials_to_csv(d, p, t, g.seed, &rows).render()))
        }
        Command::Trigger { p_upper, successes, of, l0, eps1, eps2, levels } => {
            let r = match (p_upper, successes, of) {
                (Some(p), _, _) => trigger_certificate(*p, *l0, *eps1, *eps2, d, *levels)?,
                (None, Some(s), Some(n)) => trigger_from_counts(*s, *n, *l0, *eps1, *eps2, d, *levels)?,
                _ => return Err(Error::InvalidArgument("trigger needs --p-upper or --successes with --of".into())),
            };
            Ok(Output::Text(to_json(&r)?))
        }
        Command::RenormCheck { base, l0, n, u1, u2, selector } => {
            let scheme = RenormScheme::new(*base, *l0)?;
            let radius =
                u32::try_from(2 * scheme.scale(*n)?).map_err(|_| Error::Guard("window radius overflows".into()))?;
            let k = WindowKernel::new(d, radius, ForwardPolicy::Exact, DEFAULT_TOL)?;
            let ix = k.indexer();
            let checks = try_par_trials(g.seed, trials(500), |_, rng| {
                let s1 = sample_interlacement(&k, *u1, rng, SampleOptions::default())?;
                let s2 = sample_interlacement(&k, *u2, rng, SampleOptions::default())?;
                let p = build_pair(&s1, &s2)?;
                let occ = if *selector == Selector::V { &p.occupancy_v } else { &p.occupancy_k };
                path_implies_hierarchical(occ, ix, *n, scheme)
            })?;
            #[derive(Serialize)]
            struct R<'a> {
                scheme: RenormScheme,
                n: u32,
                u1: f64,
                u2: f64,
                selector: Selector,
                configs: usize,
                connected: usize,
                hierarchical: usize,
                violations: usize,
                first_witness: Option<&'a Vec<Point>>,
                seed: u64,
            }
            Ok(Output::Text(to_json(&R {
                scheme,
                n: *n,
                u1: *u1,
                u2: *u2,
                selector: *selector,
                configs: checks.len(),
                connected: checks.iter().filter(|c| c.connected).count(),
                hierarchical: checks.iter().filter(|c| c.hierarchical).count(),
                violations: checks.iter().filter(|c| !c.holds).count(),
                first_witness: checks.iter().find_map(|c| c.witness.as_ref()),
                seed: g.seed,
            })?))
        }
        Command::Dump { input } => {
            let mut f = std::io::BufReader::new(std::fs::File::open(input)?);
            let mut s = dump_json(&read_container(&mut f)?)?;
            s.push('\n');
            Ok(Output::Text(s))
        }
    }
}

fn require_dim3(d: usize) -> Result<()> {
    if d != 3 {
        return Err(Error::InvalidArgument(format!("this experiment is defined for d = 3, got {d}")));
    }
    Ok(())
}

/// `argv` without the program name and any `--config` option.
fn replay_args(argv: &[OsString]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in argv.iter().skip(1) {
        let a = a.to_string_lossy();
        if skip {
            skip = false;
        } else if a == "--config" {
            skip = true;
        } else if !a.starts_with("--config=") {
            out.push(a.into_owned());
        }
    }
    out
}

fn emit(cli: &Cli, argv: &[String], output: Output, started: f64, stdout: &mut dyn Write) -> Result<()> {
    let bytes = match output {
        Output::Text(s) => s.into_bytes(),
        Output::Binary(b) => b,
    };
    let Some(out) = &cli.global.out else {
        stdout.write_all(&bytes)?;
        return Ok(());
    };
    write_atomic(out, &bytes)?;
    if let Command::Green { .. } = cli.command {
        stdout.write_all(&bytes)?;
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        subcommand: subcommand_name(&cli.command),
        argv,
        parameters: serde_json::to_value(cli)?,
        seed: cli.global.seed,
        started_unix_s: started,
        finished_unix_s: now_s(),
        outputs: vec![OutputDigest {
            path: out.to_string_lossy().into_owned(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len(),
        }],
    };
    write_atomic(&manifest_path(out), to_json(&manifest)?.as_bytes())?;
    Ok(())
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the exit code.
pub fn run(argv: Vec<OsString>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    let replay = replay_args(&argv);
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    return 0;
                }
                _ => 1,
            };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    let started = now_s();
    let result = match cli.global.threads {
        Some(0) => Err(Error::InvalidArgument("--threads must be positive".into())),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| execute(&cli)),
            Err(e) => Err(Error::InvalidArgument(format!("thread pool: {e}"))),
        },
        None => execute(&cli),
    };
    match result.and_then(|o| emit(&cli, &replay, o, started, stdout)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<OsString> {
        std::iter::once("rilab").chain(s.split_whitespace()).map(OsString::from).collect()
    }

    fn run_str(s: &str) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(args(s), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn green_prints_value() {
        let (code, out, _) = run_str("green --dim 3 --point 0,0,0");
        assert_eq!(code, 0);
        let v: f64 = out.trim().parse().unwrap();
        assert!((v - 1.516386059151978).abs() < 1e-10);
    }

    #[test]
    fn usage_errors() {
        let (code, _, err) = run_str("frobnicate");
        assert_eq!(code, 1);
        assert!(err.contains("Usage"));
        assert_eq!(run_str("--help").0, 0);
        assert_eq!(run_str("green --point 0,0").0, 3);
        assert_eq!(run_str("sample --N 2 --u 1").0, 1);
    }

    #[test]
    fn guard_and_numerical_codes() {
        assert_eq!(run_str("vacuum --N 2 --u 1 --box 1 --trials 5").0, 3);
        assert_eq!(run_str("hypercube --dim 25 --p 0.5 --trials 1").0, 3);
    }

    #[test]
    fn config_merging() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        std::fs::write(&cfg, "seed = 5\np-upper = 0.5\nl0 = 4\neps1 = 0.0\neps2 = 0.0\n").unwrap();
        let a = expand_config(args(&format!("trigger --config {} --seed 9", cfg.display()))).unwrap();
        let cli = Cli::try_parse_from(a).unwrap();
        assert_eq!(cli.global.seed, 9);
        match cli.command {
            Command::Trigger { p_upper, l0, .. } => {
                assert_eq!(p_upper, Some(0.5));
                assert_eq!(l0, 4);
            }
            _ => panic!(),
        }
        let a = expand_config(args(&format!("--seed 11 trigger --config {}", cfg.display()))).unwrap();
        assert_eq!(Cli::try_parse_from(a).unwrap().global.seed, 11);
    }

    #[test]
    fn manifest_written() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("t.json");
        let (code, _, err) =
            run_str(&format!("trigger --p-upper 0 --l0 4 --eps1 1e-8 --eps2 1e-8 --out {}", out.display()));
        assert_eq!(code, 0, "{err}");
        let bytes = std::fs::read(&out).unwrap();
        let m: serde_json::Value = serde_json::from_slice(&std::fs::read(manifest_path(&out)).unwrap()).unwrap();
        assert_eq!(m["outputs"][0]["sha256"], sha256_hex(&bytes));
        assert_eq!(m["subcommand"], "trigger");
        assert_eq!(m["argv"][0], "trigger");
        let r: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(r["verdict"], "PASS");
    }
}
