//! Sweeps of families x algorithms into a resumable CSV table.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algo::{self, Algo, CutOptions, Row};
use crate::family;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub families: Vec<String>,
    pub algorithms: Vec<Algo>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_containment_eps")]
    pub containment_eps: f64,
    #[serde(default)]
    pub seed: u64,
    pub output: PathBuf,
}

fn default_eps() -> f64 {
    0.05
}

fn default_containment_eps() -> f64 {
    0.5
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() || self.algorithms.is_empty() {
            bail!("experiment needs at least one family and one algorithm");
        }
        if !(self.eps > 0.0 && self.eps < 1.0) || !(self.containment_eps > 0.0) {
            bail!("eps must lie in (0, 1) and containment eps must be positive");
        }
        for f in &self.families {
            if let Some(path) = f.strip_prefix("file:") {
                if !Path::new(path).exists() {
                    bail!("graph file {path} does not exist");
                }
            }
        }
        Ok(())
    }
}

type Key = (String, String, u64);

fn key(r: &Row) -> Key {
    (r.graph.clone(), r.algo.clone(), r.seed)
}

fn read_existing(path: &Path) -> Result<HashMap<Key, Row>> {
    if !path.exists() {
        return Ok(HashMap::new());
    }
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut out = HashMap::new();
    for rec in rdr.deserialize::<Row>() {
        // a truncated or foreign line is recomputed rather than trusted
        if let Ok(r) = rec {
            if r.status == "ok" {
                out.insert(key(&r), r);
            }
        }
    }
    Ok(out)
}

pub struct Summary {
    pub rows: usize,
    pub computed: usize,
    pub reused: usize,
    pub failed: usize,
}

/// Runs every missing `(graph, algo, seed)` row and rewrites the table
/// atomically; completed rows already present in the output are reused.
pub fn run(spec: &ExperimentSpec) -> Result<Summary> {
    spec.validate()?;
    let mut members = Vec::new();
    for f in &spec.families {
        members.extend(family::expand(f, spec.seed)?);
    }
    let existing = read_existing(&spec.output)?;
    let opts = CutOptions {
        eps: spec.eps,
        containment_eps: spec.containment_eps,
        seed: spec.seed,
        ..CutOptions::default()
    };
    let jobs: Vec<(usize, Algo)> = (0..members.len())
        .flat_map(|i| spec.algorithms.iter().map(move |&a| (i, a)))
        .collect();
    let rows: Vec<(Row, bool)> = jobs
        .par_iter()
        .map(|&(i, a)| {
            let m = &members[i];
            let k = (m.name.clone(), a.name().to_string(), spec.seed);
            match existing.get(&k) {
                Some(r) => (r.clone(), false),
                None => (algo::run(&m.name, &m.graph, a, &opts).row, true),
            }
        })
        .collect();
    write_atomic(&spec.output, rows.iter().map(|(r, _)| r))?;
    Ok(Summary {
        rows: rows.len(),
        computed: rows.iter().filter(|(_, c)| *c).count(),
        reused: rows.iter().filter(|(_, c)| !*c).count(),
        failed: rows.iter().filter(|(r, _)| r.status != "ok").count(),
    })
}

fn write_atomic<'a>(path: &Path, rows: impl Iterator<Item = &'a Row>) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let file_name = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_else(|| "experiment.csv".into());
    let tmp = dir.join(format!(".{file_name}.tmp"));
    {
        let mut f =
            std::fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        let ts = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        writeln!(f, "# generated unix={ts}")?;
        let mut w = csv::Writer::from_writer(&mut f);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        drop(w);
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).with_context(|| format!("replacing {}", path.display()))?;
    Ok(())
}
