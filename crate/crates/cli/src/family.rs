//! Graph family descriptors such as `cycle:8..64:8`, `torus:4x4`,
//! `random:24:4` or `file:graph.json`.

use std::path::Path;

use abcut::corpus;
use abcut::group::{CayleyGraph, GraphSpec};
use abcut::special::{code_to_cayley, BinaryLinearCode};
use anyhow::{anyhow, bail, Context, Result};

pub struct Member {
    pub name: String,
    pub graph: CayleyGraph,
}

fn num(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .with_context(|| format!("`{s}` is not a nonnegative integer"))
}

/// `A`, `A..B` or `A..B:step` (inclusive).
fn range(s: &str, step: Option<&str>) -> Result<Vec<usize>> {
    match s.split_once("..") {
        None => Ok(vec![num(s)?]),
        Some((a, b)) => {
            let (a, b) = (num(a)?, num(b)?);
            let step = step.map(num).transpose()?.unwrap_or(1);
            if step == 0 || a > b {
                bail!("empty range `{s}`");
            }
            Ok((a..=b).step_by(step).collect())
        }
    }
}

fn dims(s: &str) -> Result<Vec<usize>> {
    s.split('x').map(num).collect()
}

pub fn load_graph(path: &Path) -> Result<CayleyGraph> {
    let spec = load_spec(path)?;
    Ok(spec.build()?)
}

pub fn load_spec(path: &Path) -> Result<GraphSpec> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing graph JSON {}", path.display()))
}

pub fn graph_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Code descriptors: `hamming`, `identity:k`, `repetition:n`, `parity:k`,
/// `random:k:n` or a path to a generator matrix file.
pub fn code(desc: &str, seed: u64) -> Result<BinaryLinearCode> {
    let parts: Vec<&str> = desc.split(':').collect();
    let c = match parts.as_slice() {
        ["hamming"] => BinaryLinearCode::hamming_7_4(),
        ["identity", k] => BinaryLinearCode::identity(num(k)?)?,
        ["repetition", n] => BinaryLinearCode::repetition(num(n)?)?,
        ["parity", k] => BinaryLinearCode::parity(num(k)?)?,
        ["random", k, n] => BinaryLinearCode::random(num(k)?, num(n)?, seed)?,
        _ => {
            let text = std::fs::read_to_string(desc)
                .with_context(|| format!("`{desc}` is neither a code name nor a readable file"))?;
            BinaryLinearCode::from_text(&text)?
        }
    };
    Ok(c)
}

/// Expands one descriptor into named graphs.
pub fn expand(desc: &str, seed: u64) -> Result<Vec<Member>> {
    let (kind, rest) = desc.split_once(':').unwrap_or((desc, ""));
    let fields: Vec<&str> = rest.split(':').collect();
    let one = |name: String, g: abcut::Result<CayleyGraph>| -> Result<Vec<Member>> {
        Ok(vec![Member { name, graph: g? }])
    };
    match kind {
        "cycle" | "hypercube" | "complete" => {
            let ns = range(fields[0], fields.get(1).copied())?;
            ns.into_iter()
                .map(|n| {
                    let (name, g) = match kind {
                        "cycle" => (format!("C_{n}"), corpus::cycle(n)),
                        "hypercube" => (format!("Q_{n}"), corpus::hypercube(n)),
                        _ => (format!("K_{n}"), corpus::complete(n)),
                    };
                    Ok(Member { name, graph: g? })
                })
                .collect()
        }
        "torus" => one(format!("T_{}", fields[0]), corpus::torus(&dims(fields[0])?)),
        "circulant" => {
            let [n, steps] = fields[..] else {
                bail!("expected circulant:N:s1,s2,...");
            };
            let steps: Vec<usize> = steps.split(',').map(num).collect::<Result<_>>()?;
            one(format!("Circ_{n}_{}", steps.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("_")), corpus::circulant(num(n)?, &steps))
        }
        "random" => {
            let (moduli, degree, s) = match fields[..] {
                [m, d] => (dims(m)?, num(d)?, seed),
                [m, d, s] => (dims(m)?, num(d)?, num(s)? as u64),
                _ => bail!("expected random:M1xM2:degree[:seed]"),
            };
            let name = format!("R_{}_d{degree}_s{s}", fields[0]);
            one(name, corpus::random_cayley(&moduli, degree, s))
        }
        "code" => {
            let c = code(rest, seed)?;
            one(format!("code_{}", rest.replace(['/', '.'], "_")), code_to_cayley(&c))
        }
        "file" => {
            let p = Path::new(rest);
            Ok(vec![Member {
                name: graph_name(p),
                graph: load_graph(p)?,
            }])
        }
        _ => Err(anyhow!(
            "unknown family `{kind}` (cycle, hypercube, complete, torus, circulant, random, code, file)"
        )),
    }
}
