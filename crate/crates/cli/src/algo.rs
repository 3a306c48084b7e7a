//! Cut algorithms behind `cut` and `experiment`.

use std::time::Instant;

use abcut::cuts::{
    balanced_conductance, brute_force_sparsest, fiedler_cut, sparsity, Cut, Objective,
};
use abcut::group::CayleyGraph;
use abcut::pipeline::{abelian_sparsest_cut, PipelineConfig};
use abcut::sdp::{advice_cut, SolverConfig};
use abcut::special::{is_prime, zpn_approx};
use abcut::spectral::spectrum_of;
use anyhow::{anyhow, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// Largest graph whose optimum is computed for the `phi_opt` column.
pub const ORACLE_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Fiedler,
    Brute,
    Advice,
    Enum,
    Zpn,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Fiedler => "fiedler",
            Algo::Brute => "brute",
            Algo::Advice => "advice",
            Algo::Enum => "enum",
            Algo::Zpn => "zpn",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CutOptions {
    /// Advice accuracy.
    pub eps: f64,
    /// Containment accuracy for `enum`.
    pub containment_eps: f64,
    pub k_max: usize,
    pub seed: u64,
    pub budget: usize,
    pub advice_limit: Option<usize>,
    pub advice_max_vertices: usize,
    pub advice: Option<Vec<usize>>,
}

impl Default for CutOptions {
    fn default() -> Self {
        Self {
            eps: 0.05,
            containment_eps: 0.5,
            k_max: 64,
            seed: 0,
            budget: 2048,
            advice_limit: Some(16),
            advice_max_vertices: 20,
            advice: None,
        }
    }
}

/// One line of the metrics table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub graph: String,
    pub n: usize,
    pub d: Option<u64>,
    pub algo: String,
    pub phi: Option<f64>,
    pub psi: Option<f64>,
    pub phi_opt: Option<f64>,
    pub ratio: Option<f64>,
    pub seed: u64,
    pub status: String,
}

pub struct CutRun {
    pub cut: Option<Cut>,
    pub error: Option<anyhow::Error>,
    pub row: Row,
    pub wall_ms: u128,
    pub details: Value,
}

fn zpn_params(graph: &CayleyGraph) -> Result<(usize, usize)> {
    let p = graph.provenance().ok_or(abcut::Error::NotCayley)?;
    let moduli = p.group.moduli();
    let q = moduli[0];
    if moduli.iter().any(|&m| m != q) || !is_prime(q) || q == 2 {
        return Err(abcut::Error::Validation(format!(
            "zpn needs a group Z_p^n with p an odd prime, got moduli {moduli:?}"
        ))
        .into());
    }
    Ok((q, moduli.len()))
}

fn solve(graph: &CayleyGraph, algo: Algo, opts: &CutOptions) -> Result<(Cut, Value)> {
    let solver = SolverConfig {
        seed: opts.seed,
        ..SolverConfig::default()
    };
    match algo {
        Algo::Fiedler => {
            let s = spectrum_of(graph)?;
            let c = fiedler_cut(graph, &s)?;
            Ok((c.cut, json!({ "lambda2": s.lambda2() })))
        }
        Algo::Brute => {
            let c = brute_force_sparsest(graph, Objective::Conductance)?;
            Ok((c.cut, Value::Null))
        }
        Algo::Advice => {
            let advice = match &opts.advice {
                Some(v) => Cut::from_vertices(graph.n(), v)?,
                None => fiedler_cut(graph, &spectrum_of(graph)?)?.cut,
            };
            let o = advice_cut(graph, &advice, opts.eps, &solver)?;
            let details = json!({
                "advice": advice.vertices(),
                "sdp_objective": o.sdp_objective,
                "pseudo_spreading": o.pseudo_spreading,
                "lower_bound": o.lower_bound(),
                "diagnostics": o.diagnostics,
            });
            Ok((o.cut.cut, details))
        }
        Algo::Enum => {
            let cfg = PipelineConfig {
                advice_eps: opts.eps,
                net_budget: opts.budget,
                seed: opts.seed,
                advice_limit: opts.advice_limit,
                advice_max_vertices: opts.advice_max_vertices,
                solver,
            };
            let r = abelian_sparsest_cut(graph, opts.containment_eps, opts.k_max, &cfg)?;
            Ok((r.cut.cut, serde_json::to_value(&r.diagnostics)?))
        }
        Algo::Zpn => {
            let (p, n_dim) = zpn_params(graph)?;
            let prov = graph.provenance().expect("checked");
            let r = zpn_approx(p, n_dim, &prov.generators)?;
            Ok((r.witness_cut()?, serde_json::to_value(&r)?))
        }
    }
}

fn status_of(e: &anyhow::Error) -> String {
    format!("error: {e}").replace(['\n', ','], " ")
}

/// Runs `algo`; failures are folded into the row so a sweep keeps going.
pub fn run(name: &str, graph: &CayleyGraph, algo: Algo, opts: &CutOptions) -> CutRun {
    let started = Instant::now();
    let outcome = solve(graph, algo, opts);
    let wall_ms = started.elapsed().as_millis();
    let mut row = Row {
        graph: name.to_string(),
        n: graph.n(),
        d: graph.regular_degree(),
        algo: algo.name().to_string(),
        phi: None,
        psi: None,
        phi_opt: None,
        ratio: None,
        seed: opts.seed,
        status: "ok".to_string(),
    };
    let (cut, details, error) = match outcome {
        Ok((cut, details)) => (Some(cut), details, None),
        Err(e) => {
            row.status = status_of(&e);
            (None, json!({ "error": e.to_string() }), Some(e))
        }
    };
    if let Some(c) = &cut {
        let scored = balanced_conductance(graph, c).and_then(|phi| Ok((phi, sparsity(graph, c)?)));
        match scored {
            Ok((phi, psi)) => {
                row.phi = Some(phi);
                row.psi = Some(psi);
                if graph.n() <= ORACLE_LIMIT {
                    if let Ok(opt) = brute_force_sparsest(graph, Objective::Conductance) {
                        row.phi_opt = Some(opt.value);
                        row.ratio = Some(phi / opt.value);
                    }
                } else if let Ok(s) = spectrum_of(graph) {
                    // no oracle: compare against the lower bound lambda_2 / 2
                    row.ratio = Some(phi / (s.lambda2() / 2.0));
                }
            }
            Err(e) => row.status = status_of(&anyhow!(e)),
        }
    }
    CutRun {
        cut,
        error,
        row,
        wall_ms,
        details,
    }
}
