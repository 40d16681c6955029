//! `cimwalk` command line: simulate, discover, score, analyze-polytope, compare.
//!
//! Every command writes its outputs plus a `<out>.manifest.json` next to the
//! main output. Exit codes: 0 success, 2 validation error, 1 runtime error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::algorithms::{discover, Algorithm, SearchConfig, SearchTrace, Strategy};
use crate::ci_tests::DEFAULT_ALPHA;
use crate::error::{Error, Result};
use crate::graph::{essential_graph, mec_of, parse_graph_text, shd, EssentialGraph, Mec, VStructure};
use crate::polytope::{census, enumerate_mecs, enumerate_mecs_with_skeleton};
use crate::scoring::{score_dag_uncached, score_mec, LocalScoreCache, SufficientStats};
use crate::simulation::{assign_weights, random_dag, sample, seeded_rng, write_csv, SemModel, Truth};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;

pub const SHD_CONVENTION: &str =
    "one unit per unordered node pair whose essential-graph status (absent, undirected, i->j, j->i) differs";

#[derive(Parser, Debug)]
#[command(name = "cimwalk", version, about = "Greedy edge-walks over the characteristic imset polytope")]
pub struct Cli {
    /// Worker threads (falls back to CIMWALK_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Command {
    /// Sample a random linear Gaussian SEM.
    Simulate {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "data.csv")]
        out: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Learn a MEC from data.
    Discover {
        #[arg(long, value_enum, default_value_t = AlgoArg::GreedyCim)]
        algo: AlgoArg,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ALPHA, value_parser = parse_alpha)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = StrategyArg::FirstImprovement)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        subset_cap: Option<usize>,
        #[arg(long)]
        tree_moves: bool,
        #[arg(long, default_value = "result.json")]
        out: PathBuf,
    },
    /// BIC of a DAG given in the text graph format.
    Score {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vertex and edge census of CIM_p or of the face for one skeleton.
    AnalyzePolytope {
        #[arg(long, conflicts_with = "skeleton", required_unless_present = "skeleton")]
        p: Option<usize>,
        #[arg(long)]
        skeleton: Option<PathBuf>,
        #[arg(long, default_value = "census.json")]
        out: PathBuf,
    },
    /// SHD and MEC equality between a discovery result and a ground truth.
    Compare {
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
pub enum AlgoArg {
    GreedyCim,
    SkeletalGreedyCim,
    RecurrentCim,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::GreedyCim => Algorithm::GreedyCim,
            AlgoArg::SkeletalGreedyCim => Algorithm::SkeletalGreedyCim,
            AlgoArg::RecurrentCim => Algorithm::RecurrentCim,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum, Serialize)]
pub enum StrategyArg {
    FirstImprovement,
    BestImprovement,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::FirstImprovement => Strategy::FirstImprovement,
            StrategyArg::BestImprovement => Strategy::BestImprovement,
        }
    }
}

fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let a: f64 = s.parse().map_err(|_| format!("alpha: {s:?} is not a number"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err(format!("alpha: {a} must lie strictly between 0 and 1"))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub versions: Value,
    pub inputs: Vec<InputHash>,
    pub wall_clock_seconds: f64,
}

/// Discovery output.
#[derive(Clone, Debug, Serialize)]
pub struct DiscoverResult {
    pub p: usize,
    pub algorithm: Algorithm,
    pub essential_graph: EssentialGraph,
    pub vstructures: Vec<VStructure>,
    pub score: f64,
    pub trace: SearchTrace,
    pub shd_convention: &'static str,
}

#[derive(Deserialize)]
struct StoredResult {
    essential_graph: EssentialGraph,
}

/// Failures sorted into exit codes.
#[derive(Debug)]
enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Lp(_) | Error::SingularCovariance { .. } | Error::InconsistentImset(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

fn hash_file(path: &Path) -> Result<InputHash> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(InputHash {
        path: path.display().to_string(),
        sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
    })
}

/// Output failures are runtime errors; unreadable inputs are validation errors.
fn write_json<T: Serialize>(path: &Path, v: &T) -> std::result::Result<(), Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Runtime(e.to_string()))?;
    s.push('\n');
    std::fs::write(path, s).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Simulate { .. } => "simulate",
        Command::Discover { .. } => "discover",
        Command::Score { .. } => "score",
        Command::AnalyzePolytope { .. } => "analyze-polytope",
        Command::Compare { .. } => "compare",
    }
}

/// Turns a stored essential graph back into its MEC.
pub fn mec_from_essential(e: &EssentialGraph) -> Result<Mec> {
    let mut edges: Vec<(usize, usize)> = e.undirected.iter().copied().collect();
    edges.extend(e.arcs.iter().copied());
    let skel = crate::graph::UndirectedGraph::from_edges(e.p, &edges)?;
    let mut vs = std::collections::BTreeSet::new();
    for &(a, c) in &e.arcs {
        for &(b, c2) in &e.arcs {
            if c == c2 && a < b && !skel.has_edge(a, b) {
                vs.insert(VStructure::new(a, c, b));
            }
        }
    }
    let m = Mec::new(skel, vs)?;
    if &essential_graph(&m)? != e {
        return Err(Error::InvalidGraph("essential_graph is not a completed pattern".into()));
    }
    Ok(m)
}

fn run(cmd: &Command) -> std::result::Result<(PathBuf, Option<u64>, Vec<InputHash>), Failure> {
    match cmd {
        Command::Simulate { p, d, n, seed, out, truth } => {
            if *n == 0 {
                return Err(Failure::Validation("n: must be at least 1".into()));
            }
            let mut rng = seeded_rng(*seed);
            let dag = random_dag(*p, *d, &mut rng)?;
            let model = assign_weights(&dag, &mut rng);
            let (data, _) = sample(&model, *n, &mut rng)?;
            let file = std::fs::File::create(out).map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
            write_csv(&data, file).map_err(|e| Failure::Runtime(e.to_string()))?;
            if let Some(t) = truth {
                write_json(t, &model.truth())?;
            }
            Ok((out.clone(), Some(*seed), Vec::new()))
        }
        Command::Discover {
            algo,
            data,
            alpha,
            strategy,
            seed,
            subset_cap,
            tree_moves,
            out,
        } => {
            let stats = SufficientStats::from_csv(data)?;
            let config = SearchConfig {
                strategy: (*strategy).into(),
                subset_cap: *subset_cap,
                tree_moves_enabled: *tree_moves,
                alpha: *alpha,
                seed: *seed,
                ..Default::default()
            };
            let (mec, trace) = discover((*algo).into(), &stats, &config)?;
            let result = DiscoverResult {
                p: mec.p(),
                algorithm: (*algo).into(),
                essential_graph: essential_graph(&mec)?,
                vstructures: mec.vstructs().iter().copied().collect(),
                score: score_mec(&mec, &stats, &LocalScoreCache::new())?,
                trace,
                shd_convention: SHD_CONVENTION,
            };
            write_json(out, &result)?;
            Ok((out.clone(), Some(*seed), vec![hash_file(data)?]))
        }
        Command::Score { data, graph, out } => {
            let stats = SufficientStats::from_csv(data)?;
            let text = std::fs::read_to_string(graph).map_err(Error::from)?;
            let dag = parse_graph_text(&text)?.into_dag()?;
            let score = score_dag_uncached(&dag, &stats)?;
            let v = json!({ "score": score, "p": dag.p(), "n": stats.n() });
            let inputs = vec![hash_file(data)?, hash_file(graph)?];
            match out {
                Some(o) => {
                    write_json(o, &v)?;
                    Ok((o.clone(), None, inputs))
                }
                None => {
                    println!("{}", serde_json::to_string(&v).map_err(Error::from)?);
                    Ok((PathBuf::new(), None, inputs))
                }
            }
        }
        Command::AnalyzePolytope { p, skeleton, out } => {
            let (vs, inputs) = match (p, skeleton) {
                (Some(p), _) => {
                    if *p > 4 {
                        return Err(Failure::Validation(format!(
                            "p: full-polytope census supports p <= 4, got {p}; use --skeleton for faces"
                        )));
                    }
                    (enumerate_mecs(*p)?, Vec::new())
                }
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(path).map_err(Error::from)?;
                    let g = parse_graph_text(&text)?.into_undirected()?;
                    (enumerate_mecs_with_skeleton(&g)?, vec![hash_file(path)?])
                }
                (None, None) => return Err(Failure::Validation("p: either --p or --skeleton is required".into())),
            };
            let (c, _) = census(&vs)?;
            write_json(out, &c)?;
            Ok((out.clone(), None, inputs))
        }
        Command::Compare { result, truth, out } => {
            let r: StoredResult = serde_json::from_str(&std::fs::read_to_string(result).map_err(Error::from)?)
                .map_err(|e| Failure::Validation(format!("result: {e}")))?;
            let t: Truth = serde_json::from_str(&std::fs::read_to_string(truth).map_err(Error::from)?)
                .map_err(|e| Failure::Validation(format!("truth: {e}")))?;
            let learned = mec_from_essential(&r.essential_graph)?;
            let true_mec = mec_of(&SemModel::from_truth(&t)?.dag);
            let v = json!({
                "shd": shd(&learned, &true_mec)?,
                "recovered": learned == true_mec,
                "shd_convention": SHD_CONVENTION,
            });
            let inputs = vec![hash_file(result)?, hash_file(truth)?];
            match out {
                Some(o) => {
                    write_json(o, &v)?;
                    Ok((o.clone(), None, inputs))
                }
                None => {
                    println!("{}", serde_json::to_string(&v).map_err(Error::from)?);
                    Ok((PathBuf::new(), None, inputs))
                }
            }
        }
    }
}

fn thread_count(flag: Option<usize>) -> std::result::Result<Option<usize>, Failure> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("CIMWALK_THREADS") {
        Ok(v) => v
            .parse()
            .map(Some)
            .map_err(|_| Failure::Validation(format!("CIMWALK_THREADS: {v:?} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            EXIT_VALIDATION
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            EXIT_RUNTIME
        }
    }
}

fn execute(cli: &Cli) -> std::result::Result<(), Failure> {
    let threads = thread_count(cli.threads)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(Failure::Validation("threads: must be at least 1".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| Failure::Runtime(e.to_string()))?;
    let start = Instant::now();
    let (out, seed, inputs) = pool.install(|| run(&cli.command))?;
    if out.as_os_str().is_empty() {
        return Ok(());
    }
    let manifest = RunManifest {
        command: name(&cli.command).into(),
        config: json!({ "args": &cli.command, "threads": threads }),
        seed,
        versions: json!({
            "cimwalk": env!("CARGO_PKG_VERSION"),
            "rng": "ChaCha8Rng (rand_chacha 0.9) seeded with seed_from_u64",
        }),
        inputs,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    write_json(&manifest_path(&out), &manifest)?;
    Ok(())
}
