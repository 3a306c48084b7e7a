//! `abcut`: sparsest cuts and spectral checks for Abelian Cayley graphs.
//!
//! Exit codes: 0 success, 2 invalid input, 3 a verification failed, 4 a size
//! guard or dimension cap was hit, 1 anything else (solver failures, I/O).

mod algo;
mod experiment;
mod family;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abcut::corpus::{self, NamedGraph};
use abcut::group::{AbelianGroup, GeneratorMultiset, GroupElement};
use abcut::pipeline::cut_dimension;
use abcut::special::{code_spectrum_check, min_weight_census, zpn_approx, MAX_SPECTRUM_DIMENSION};
use abcut::spectral::{dense_spectrum, spectrum_of, threshold_rank};
use abcut::verify::{verify, Status, Suite, VerifyOptions};
use abcut::walks::{cp_ratio_bound_check, multiplicity_certificate};
use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use crate::algo::{Algo, CutOptions};
use crate::experiment::ExperimentSpec;

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "ABCUT_THREADS";

#[derive(Parser)]
#[command(
    name = "abcut",
    version,
    about = "Sparsest cuts on Abelian Cayley graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a graph as JSON, e.g. `cycle:8`, `torus:4x4`, `random:24:4`.
    Gen {
        family: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Normalized Laplacian spectrum (characters for Cayley graphs).
    Spectrum {
        graph: PathBuf,
        /// Use the dense eigensolver even for Cayley graphs.
        #[arg(long)]
        dense: bool,
        /// Also report the threshold rank at this value.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Lazy-walk collision probabilities, the doubling ratio bound and the
    /// multiplicity certificate.
    Collision {
        graph: PathBuf,
        #[arg(long, default_value_t = 64)]
        t_max: u32,
        /// Thresholds for the multiplicity certificate.
        #[arg(long, value_delimiter = ',')]
        tau: Vec<f64>,
    },
    /// Find a sparse cut.
    Cut {
        graph: PathBuf,
        #[arg(long, value_enum)]
        algo: Algo,
        /// Advice accuracy for `advice` and `enum`.
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        /// Containment accuracy that sets the eigenspace threshold of `enum`.
        #[arg(long, default_value_t = 0.5)]
        containment_eps: f64,
        #[arg(long, default_value_t = 64)]
        kmax: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Net size cap for `enum`.
        #[arg(long, default_value_t = 2048)]
        budget: usize,
        /// Threshold cuts handed to the SDP by `enum`; 0 means all.
        #[arg(long, default_value_t = 16)]
        advice_limit: usize,
        /// Larger graphs skip the advice stage of `enum`.
        #[arg(long, default_value_t = 20)]
        advice_max_vertices: usize,
        /// Advice vertices for `advice` (default: the Fiedler cut).
        #[arg(long, value_delimiter = ',')]
        advice: Option<Vec<usize>>,
        /// Append the metrics row to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Smallest eigenvector prefix that nearly contains a near-optimal cut.
    Cutdim {
        graph: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// `Z_p^n` approximation through the scaled generator set.
    Zpn {
        #[arg(long)]
        p: Option<usize>,
        #[arg(long)]
        dim: Option<usize>,
        /// Generators as `a,b;c,d`; each is added with its inverse.
        #[arg(long)]
        gens: Option<String>,
        /// Read the group and generators from a Cayley graph file instead.
        #[arg(long, conflicts_with_all = ["p", "dim", "gens"])]
        graph: Option<PathBuf>,
    },
    /// Minimum-weight census and spectrum check of a binary linear code.
    Codes {
        /// Generator matrix file, one row of 0/1 per line.
        #[arg(long, conflicts_with = "builtin")]
        generator_matrix: Option<PathBuf>,
        /// `hamming`, `identity:k`, `repetition:n`, `parity:k`, `random:k:n`.
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run invariant suites; exits 3 if any check fails.
    Verify {
        /// Suites to run (default: all).
        #[arg(value_parser = parse_suite)]
        suites: Vec<Suite>,
        /// Graph JSON files or directories (default: the built-in corpus).
        #[arg(long, num_args = 1..)]
        graphs: Vec<PathBuf>,
        #[arg(long, default_value_t = 64)]
        t_max: u32,
        #[arg(long, default_value_t = 1000)]
        random_cuts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the JSON report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sweep families x algorithms into a CSV table (resumable).
    Experiment {
        /// JSON experiment spec; the flags below build one otherwise.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, value_delimiter = ';')]
        families: Vec<String>,
        #[arg(long, value_enum, value_delimiter = ',')]
        algos: Vec<Algo>,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 0.5)]
        containment_eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    Suite::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("unknown suite `{s}`; expected one of {}", names.join(", "))
    })
}

/// Signals a failed verification (exit code 3).
#[derive(Debug)]
struct VerificationFailed(String);

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "verification failed: {}", self.0)
    }
}

impl std::error::Error for VerificationFailed {}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<VerificationFailed>().is_some() {
        return 3;
    }
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<abcut::Error>() {
            return match err {
                abcut::Error::SizeGuard { .. } | abcut::Error::DimensionCap { .. } => 4,
                abcut::Error::Solver(_) => 1,
                _ => 2,
            };
        }
        if cause.downcast_ref::<serde_json::Error>().is_some()
            || cause.downcast_ref::<std::num::ParseIntError>().is_some()
        {
            return 2;
        }
        if let Some(io) = cause.downcast_ref::<std::io::Error>() {
            return if io.kind() == std::io::ErrorKind::NotFound {
                2
            } else {
                1
            };
        }
    }
    2
}

fn emit(value: &serde_json::Value, output: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn gen(family: &str, output: Option<&Path>, seed: u64) -> Result<()> {
    let members = family::expand(family, seed)?;
    let [m] = &members[..] else {
        bail!(
            "`{family}` describes {} graphs; gen writes one",
            members.len()
        );
    };
    emit(&serde_json::to_value(m.graph.to_spec())?, output)
}

fn spectrum(path: &Path, dense: bool, tau: Option<f64>) -> Result<()> {
    let g = family::load_graph(path)?;
    let (s, method) = if dense || g.provenance().is_none() {
        (dense_spectrum(&g)?, "dense")
    } else {
        (spectrum_of(&g)?, "characters")
    };
    let mut out = json!({
        "graph": family::graph_name(path),
        "n": g.n(),
        "method": method,
        "lambda2": s.lambda2(),
        "eigenvalues": s.eigenvalues(),
    });
    if let Some(t) = tau {
        out["tau"] = json!(t);
        out["threshold_rank"] = json!(threshold_rank(&s, t));
    }
    emit(&out, None)
}

fn collision(path: &Path, t_max: u32, taus: &[f64]) -> Result<()> {
    let g = family::load_graph(path)?;
    let report = cp_ratio_bound_check(&g, t_max)?;
    let certs = taus
        .iter()
        .map(|&t| multiplicity_certificate(&g, t))
        .collect::<abcut::Result<Vec<_>>>()?;
    let ok = report.holds() && certs.iter().all(|c| c.holds());
    emit(
        &json!({ "graph": family::graph_name(path), "ratio": report, "certificates": certs, "holds": ok }),
        None,
    )?;
    if !ok {
        return Err(VerificationFailed("collision bounds".into()).into());
    }
    Ok(())
}

fn cut(
    path: &Path,
    algo: Algo,
    opts: &CutOptions,
    csv_path: Option<&Path>,
    output: Option<&Path>,
) -> Result<()> {
    let g = family::load_graph(path)?;
    let name = family::graph_name(path);
    let run = algo::run(&name, &g, algo, opts);
    if let Some(e) = run.error {
        return Err(e);
    }
    if let Some(p) = csv_path {
        append_row(p, &run.row, run.wall_ms)?;
    }
    let out = json!({
        "graph": name,
        "algo": algo.name(),
        "vertices": run.cut.as_ref().map(|c| c.vertices()),
        "row": run.row,
        "details": run.details,
    });
    emit(&out, output)
}

fn append_row(path: &Path, row: &algo::Row, wall_ms: u128) -> Result<()> {
    let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
    let f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(f);
    if fresh {
        w.write_record([
            "graph", "n", "d", "algo", "phi", "psi", "phi_opt", "ratio", "wall_ms", "seed",
        ])?;
    }
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    w.write_record([
        row.graph.clone(),
        row.n.to_string(),
        row.d.map(|d| d.to_string()).unwrap_or_default(),
        row.algo.clone(),
        opt(row.phi),
        opt(row.psi),
        opt(row.phi_opt),
        opt(row.ratio),
        wall_ms.to_string(),
        row.seed.to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

fn cutdim(path: &Path, eps: f64, c: f64) -> Result<()> {
    let g = family::load_graph(path)?;
    let s = spectrum_of(&g)?;
    let d = cut_dimension(&g, &s, eps, c)?;
    emit(
        &json!({ "graph": family::graph_name(path), "eps": eps, "c": c, "result": d }),
        None,
    )
}

fn parse_gens(text: &str, group: &AbelianGroup) -> Result<GeneratorMultiset> {
    let mut elems = Vec::new();
    for part in text.split(';').filter(|p| !p.trim().is_empty()) {
        let coords: Vec<i64> = part
            .split(',')
            .map(|x| x.trim().parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("generator `{part}`"))?;
        elems.push(group.reduce(&coords)?);
    }
    if elems.is_empty() {
        bail!("no generators given");
    }
    Ok(GeneratorMultiset::plus_minus(group, &elems))
}

fn zpn(
    p: Option<usize>,
    dim: Option<usize>,
    gens: Option<&str>,
    graph: Option<&Path>,
) -> Result<()> {
    let (p, dim, s) = match graph {
        Some(path) => {
            let g = family::load_graph(path)?;
            let prov = g.provenance().ok_or(abcut::Error::NotCayley)?;
            let m = prov.group.moduli();
            (m[0], m.len(), prov.generators.clone())
        }
        None => {
            let p = p.ok_or_else(|| anyhow!("--p is required"))?;
            let dim = dim.unwrap_or(1);
            let group = AbelianGroup::new(vec![p; dim])?;
            let s = match gens {
                Some(t) => parse_gens(t, &group)?,
                None => {
                    let units: Vec<GroupElement> = (0..dim)
                        .map(|j| GroupElement((0..dim).map(|i| (i == j) as usize).collect()))
                        .collect();
                    GeneratorMultiset::plus_minus(&group, &units)
                }
            };
            (p, dim, s)
        }
    };
    let r = zpn_approx(p, dim, &s)?;
    let ok = r.holds();
    emit(&json!({ "report": r, "holds": ok }), None)?;
    if !ok {
        return Err(VerificationFailed("Z_p^n sandwich".into()).into());
    }
    Ok(())
}

fn codes(matrix: Option<&Path>, builtin: Option<&str>, seed: u64) -> Result<()> {
    let code = match (matrix, builtin) {
        (Some(p), _) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            abcut::special::BinaryLinearCode::from_text(&text)?
        }
        (None, Some(b)) => family::code(b, seed)?,
        (None, None) => bail!("give --generator-matrix or --builtin"),
    };
    let (distance, count) = min_weight_census(&code)?;
    let check = if code.dimension() <= MAX_SPECTRUM_DIMENSION {
        Some(code_spectrum_check(&code)?)
    } else {
        None
    };
    let ok = check.as_ref().is_none_or(|c| c.holds());
    emit(
        &json!({
            "dimension": code.dimension(),
            "block_length": code.block_length(),
            "distance": distance,
            "min_weight_count": count,
            "spectrum": check,
            "holds": ok,
        }),
        None,
    )?;
    if !ok {
        return Err(VerificationFailed("code spectrum".into()).into());
    }
    Ok(())
}

fn collect_graphs(paths: &[PathBuf]) -> Result<Vec<NamedGraph>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(p.clone());
        }
    }
    files
        .iter()
        .map(|f| {
            // keep faulty graphs so the structure audit can report them
            let graph = family::load_spec(f)?.build_unchecked()?;
            Ok(NamedGraph {
                name: family::graph_name(f),
                graph,
            })
        })
        .collect()
}

fn run_verify(
    suites: &[Suite],
    graphs: &[PathBuf],
    opts: &VerifyOptions,
    output: Option<&Path>,
) -> Result<()> {
    let suites: Vec<Suite> = if suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        suites.to_vec()
    };
    let corpus = if graphs.is_empty() {
        corpus::default_corpus()?
    } else {
        collect_graphs(graphs)?
    };
    let report = verify(&corpus, &suites, opts);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for c in &report.checks {
        let tag = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        eprintln!("{tag} {:<12} {:<24} {}", c.suite.name(), c.target, c.detail);
    }
    eprintln!("{} checks, {} failed", report.checks.len(), report.failures);
    emit(&serde_json::to_value(&report)?, output)?;
    if !report.passed {
        return Err(VerificationFailed(format!("{} check(s)", report.failures)).into());
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_experiment(
    spec: Option<&Path>,
    families: Vec<String>,
    algos: Vec<Algo>,
    eps: f64,
    containment_eps: f64,
    seed: u64,
    output: Option<PathBuf>,
) -> Result<()> {
    let spec = match spec {
        Some(p) => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<ExperimentSpec>(&text).context("parsing experiment spec")?
        }
        None => ExperimentSpec {
            families,
            algorithms: algos,
            eps,
            containment_eps,
            seed,
            output: output.ok_or_else(|| anyhow!("--output is required without --spec"))?,
        },
    };
    let s = experiment::run(&spec)?;
    eprintln!(
        "{} rows ({} computed, {} reused, {} failed) -> {}",
        s.rows,
        s.computed,
        s.reused,
        s.failed,
        spec.output.display()
    );
    Ok(())
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_VAR) {
        let n: usize = v
            .parse()
            .map_err(|_| anyhow!("{THREADS_VAR} = `{v}` is not a thread count"))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Gen {
            family,
            output,
            seed,
        } => gen(&family, output.as_deref(), seed),
        Command::Spectrum { graph, dense, tau } => spectrum(&graph, dense, tau),
        Command::Collision { graph, t_max, tau } => collision(&graph, t_max, &tau),
        Command::Cut {
            graph,
            algo,
            eps,
            containment_eps,
            kmax,
            seed,
            budget,
            advice_limit,
            advice_max_vertices,
            advice,
            csv,
            output,
        } => {
            let opts = CutOptions {
                eps,
                containment_eps,
                k_max: kmax,
                seed,
                budget,
                advice_limit: (advice_limit > 0).then_some(advice_limit),
                advice_max_vertices,
                advice,
            };
            cut(&graph, algo, &opts, csv.as_deref(), output.as_deref())
        }
        Command::Cutdim { graph, eps, c } => cutdim(&graph, eps, c),
        Command::Zpn {
            p,
            dim,
            gens,
            graph,
        } => zpn(p, dim, gens.as_deref(), graph.as_deref()),
        Command::Codes {
            generator_matrix,
            builtin,
            seed,
        } => codes(generator_matrix.as_deref(), builtin.as_deref(), seed),
        Command::Verify {
            suites,
            graphs,
            t_max,
            random_cuts,
            seed,
            output,
        } => {
            let opts = VerifyOptions {
                t_max,
                random_cuts,
                seed,
                ..VerifyOptions::default()
            };
            run_verify(&suites, &graphs, &opts, output.as_deref())
        }
        Command::Experiment {
            spec,
            families,
            algos,
            eps,
            containment_eps,
            seed,
            output,
        } => run_experiment(
            spec.as_deref(),
            families,
            algos,
            eps,
            containment_eps,
            seed,
            output,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
