//! End-to-end sparsest cut: net over the low eigenspace, threshold cuts of each
//! net vector, and advice rounding of the most promising thresholds.

use std::collections::BTreeSet;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::cuts::{
    balanced_conductance, brute_force_sparsest, fiedler_cut, sparsity_ratio, Cut, CutScanner,
    Objective, Ratio, ScoredCut,
};
use crate::error::{guard, Error, Result};
use crate::group::CayleyGraph;
use crate::sdp::{advice_cut, SolverConfig};
use crate::spectral::{low_eigenspace, real_eigenbasis, threshold_rank, Spectrum, Subspace};

/// Largest vertex count for [`cut_dimension`] and [`containment_check`].
pub const MAX_ENUMERATION_VERTICES: usize = 20;

/// Finite set of unit vectors of a subspace, stored as basis coordinates.
#[derive(Clone, Debug, Serialize)]
pub struct NetSpec {
    pub dim: usize,
    pub eps: f64,
    pub seed: u64,
    pub budget: usize,
    /// `min(budget, ceil((4/sqrt(eps))^dim))`.
    pub target: usize,
    #[serde(skip)]
    pub coords: Vec<DVector<f64>>,
    /// Largest distance from a sampled unit vector to the net.
    pub covering_radius_estimate: f64,
    /// Fraction of sampled unit vectors within `sqrt(eps)` of the net.
    pub covered_fraction: f64,
}

impl NetSpec {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn vectors(&self, subspace: &Subspace) -> Vec<DVector<f64>> {
        self.coords.iter().map(|c| subspace.combine(c)).collect()
    }
}

const AUDIT_SAMPLES: usize = 256;

fn random_unit(rng: &mut ChaCha8Rng, k: usize, active: usize) -> DVector<f64> {
    loop {
        let mut v = DVector::<f64>::zeros(k);
        for i in 0..active {
            v[i] = StandardNormal.sample(rng);
        }
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Net of the unit sphere of `subspace` with target size
/// `min(budget, (4/sqrt(eps))^k)`.
///
/// Built in nested levels: the signed basis vectors first, then random unit
/// vectors of `span(b_1..b_j)` for `j = 2..k`, splitting what is left of the
/// target evenly across the remaining levels. For `k = 1` the net is `{v, -v}`.
pub fn eps_net(subspace: &Subspace, eps: f64, seed: u64, budget: usize) -> Result<NetSpec> {
    let k = subspace.dim();
    if k == 0 {
        return Err(Error::invalid("subspace is zero-dimensional"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps = {eps} must lie in (0, 1)")));
    }
    if budget < 2 {
        return Err(Error::invalid(
            "net budget exhausted: at least 2 vectors are needed",
        ));
    }
    let base = 4.0 / eps.sqrt();
    let target_f = base.powi(k as i32).ceil();
    let target = if target_f >= budget as f64 {
        budget
    } else {
        target_f as usize
    };
    let mut coords: Vec<DVector<f64>> = Vec::with_capacity(target);
    'signed: for j in 0..k {
        for sign in [1.0, -1.0] {
            if coords.len() >= target {
                break 'signed;
            }
            let mut v = DVector::<f64>::zeros(k);
            v[j] = sign;
            coords.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for level in 2..=k {
        let remaining = target - coords.len();
        let levels_left = k - level + 1;
        let want = base.powi(level as i32).ceil();
        let quota = ((remaining / levels_left) as f64).min(want) as usize;
        let quota = if level == k { remaining } else { quota };
        for _ in 0..quota {
            coords.push(random_unit(&mut rng, k, level));
        }
    }
    let mut audit_rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let radius = eps.sqrt();
    let mut worst = 0.0f64;
    let mut covered = 0;
    for _ in 0..AUDIT_SAMPLES {
        let u = random_unit(&mut audit_rng, k, k);
        let best = coords
            .iter()
            .map(|c| (c - &u).norm())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
        if best <= radius {
            covered += 1;
        }
    }
    Ok(NetSpec {
        dim: k,
        eps,
        seed,
        budget,
        target,
        coords,
        covering_radius_estimate: worst,
        covered_fraction: covered as f64 / AUDIT_SAMPLES as f64,
    })
}

/// `{i : v_i >= tau}`.
pub fn threshold_cut(v: &DVector<f64>, tau: f64) -> Cut {
    Cut::from_members(v.iter().map(|&x| x >= tau).collect())
}

/// Distinct proper cuts `{i : v_i >= t}` over all thresholds `t`, from the
/// highest threshold down.
pub fn threshold_cuts(v: &DVector<f64>) -> Vec<Cut> {
    let mut values: Vec<f64> = v.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values.dedup();
    values
        .iter()
        .take(values.len().saturating_sub(1))
        .map(|&t| threshold_cut(v, t))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineConfig {
    /// Advice accuracy and net resolution; the rounding guarantee needs
    /// `advice_eps <= 1/20`.
    pub advice_eps: f64,
    pub net_budget: usize,
    pub seed: u64,
    /// Number of threshold cuts (best raw sparsity first) handed to the advice
    /// solver; `None` solves for every distinct threshold cut.
    pub advice_limit: Option<usize>,
    /// Graphs with more vertices skip the advice stage and return the best
    /// threshold cut.
    pub advice_max_vertices: usize,
    pub solver: SolverConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            advice_eps: 0.05,
            net_budget: 2048,
            seed: 0,
            advice_limit: Some(16),
            advice_max_vertices: 20,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PipelineDiagnostics {
    pub subspace_dim: usize,
    pub tau: Option<f64>,
    pub net_size: usize,
    pub covering_radius_estimate: f64,
    pub threshold_cuts: usize,
    pub advice_skipped: bool,
    pub sdp_calls: usize,
    pub sdp_failures: usize,
    pub best_threshold_sparsity: f64,
    pub best_advice_sparsity: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PipelineResult {
    #[serde(skip)]
    pub cut: ScoredCut,
    pub vertices: Vec<usize>,
    pub sparsity: f64,
    /// Conductance of the smaller-volume side.
    pub conductance: f64,
    pub diagnostics: PipelineDiagnostics,
}

fn keep_min(a: Option<(Ratio, Cut)>, b: Option<(Ratio, Cut)>) -> Option<(Ratio, Cut)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(if (&y.0, &y.1) < (&x.0, &x.1) { y } else { x }),
    }
}

/// Best cut among the threshold cuts of a net of `subspace` and their advice
/// roundings.
pub fn sparsest_cut_near_subspace(
    graph: &CayleyGraph,
    subspace: &Subspace,
    cfg: &PipelineConfig,
) -> Result<PipelineResult> {
    let n = graph.n();
    if subspace.ambient_dim() != n {
        return Err(Error::invalid("subspace does not match the graph"));
    }
    let net = eps_net(subspace, cfg.advice_eps, cfg.seed, cfg.net_budget)?;
    let mut cuts: BTreeSet<Cut> = BTreeSet::new();
    for v in net.vectors(subspace) {
        for c in threshold_cuts(&v) {
            cuts.insert(c.smaller_side());
        }
    }
    if cuts.is_empty() {
        return Err(Error::invalid(
            "no net vector yields a proper threshold cut",
        ));
    }
    let mut scored: Vec<(Ratio, Cut)> = cuts
        .into_iter()
        .map(|c| Ok((sparsity_ratio(graph, &c)?, c)))
        .collect::<Result<_>>()?;
    scored.sort();
    let n_cuts = scored.len();
    let best_raw = scored[0].clone();
    let skipped = n > cfg.advice_max_vertices;
    let take = if skipped {
        0
    } else {
        cfg.advice_limit.unwrap_or(n_cuts).min(n_cuts)
    };
    let advised: Vec<Option<(Ratio, Cut)>> = scored[..take]
        .par_iter()
        .map(|(_, advice)| {
            advice_cut(graph, advice, cfg.advice_eps, &cfg.solver)
                .ok()
                .map(|o| (o.cut.ratio, o.cut.cut))
        })
        .collect();
    let failures = advised.iter().filter(|a| a.is_none()).count();
    let best_advice = advised.into_iter().fold(None, keep_min);
    let (ratio, cut) = keep_min(Some(best_raw.clone()), best_advice.clone()).expect("nonempty");
    let conductance = balanced_conductance(graph, &cut)?;
    Ok(PipelineResult {
        vertices: cut.vertices(),
        sparsity: ratio.value(),
        conductance,
        cut: ScoredCut {
            value: ratio.value(),
            cut,
            ratio,
        },
        diagnostics: PipelineDiagnostics {
            subspace_dim: subspace.dim(),
            tau: None,
            net_size: net.len(),
            covering_radius_estimate: net.covering_radius_estimate,
            threshold_cuts: n_cuts,
            advice_skipped: skipped,
            sdp_calls: take,
            sdp_failures: failures,
            best_threshold_sparsity: best_raw.0.value(),
            best_advice_sparsity: best_advice.map(|(r, _)| r.value()),
        },
    })
}

/// `tau = 100 d phi_up^2 / eps^2` with `phi_up = min(phi_fiedler, sqrt(2 lambda_2))`.
pub fn containment_tau(graph: &CayleyGraph, spectrum: &Spectrum, eps: f64) -> Result<f64> {
    let d = graph
        .regular_degree()
        .ok_or_else(|| Error::invalid("graph is not regular"))? as f64;
    let fiedler = fiedler_cut(graph, spectrum)?;
    let up = fiedler.value.min((2.0 * spectrum.lambda2()).sqrt());
    Ok(100.0 * d * up * up / (eps * eps))
}

/// Sparsest cut on a connected Abelian Cayley graph by searching the
/// `tau`-low eigenspace, `tau` from [`containment_tau`] with `containment_eps`.
pub fn abelian_sparsest_cut(
    graph: &CayleyGraph,
    containment_eps: f64,
    k_max: usize,
    cfg: &PipelineConfig,
) -> Result<PipelineResult> {
    let p = graph.provenance().ok_or(Error::NotCayley)?;
    graph.require_connected()?;
    if !(containment_eps > 0.0) {
        return Err(Error::invalid("eps must be positive"));
    }
    let spectrum = real_eigenbasis(&p.group, &p.generators)?;
    let tau = containment_tau(graph, &spectrum, containment_eps)?;
    let k = threshold_rank(&spectrum, tau.min(2.0));
    if k > k_max {
        return Err(Error::DimensionCap { required: k, k_max });
    }
    let sub = low_eigenspace(&spectrum, tau);
    let mut res = sparsest_cut_near_subspace(graph, &sub, cfg)?;
    res.diagnostics.tau = Some(tau);
    Ok(res)
}

/// Smallest `k` such that some cut with `psi <= c psi(G)` keeps at least
/// `1 - eps` of its centered mass in the span of the first `k` eigenvectors.
#[derive(Clone, Debug, Serialize)]
pub struct CutDimension {
    pub k: usize,
    pub witness: Vec<usize>,
    pub psi_opt: f64,
    pub qualifying_cuts: usize,
}

fn qualifying_masks(
    graph: &CayleyGraph,
    keep: impl Fn(u64, u64, u32, u64) -> bool + Sync,
) -> Vec<u64> {
    let n = graph.n();
    let full = (1u64 << n) - 1;
    let scanner = CutScanner::new(graph);
    let mut out = scanner.par_fold(
        Vec::new,
        |acc: &mut Vec<u64>, s| {
            if s.mask != full && keep(s.mask, s.boundary, s.size, s.volume) {
                acc.push(s.mask);
            }
        },
        |mut a, b| {
            a.extend(b);
            a
        },
    );
    out.sort_unstable();
    out
}

/// Cumulative projection masses of a cut onto the eigenvector prefixes.
fn prefix_masses(spectrum: &Spectrum, cut: &Cut) -> Vec<f64> {
    let v = cut.centered_indicator();
    let total = v.norm_squared();
    let coords = spectrum.eigenvectors().tr_mul(&v);
    let mut acc = 0.0;
    coords
        .iter()
        .map(|c| {
            acc += c * c;
            acc / total
        })
        .collect()
}

pub fn cut_dimension(
    graph: &CayleyGraph,
    spectrum: &Spectrum,
    eps: f64,
    c: f64,
) -> Result<CutDimension> {
    let n = graph.n();
    guard("vertex count", n, MAX_ENUMERATION_VERTICES)?;
    if !(0.0..=1.0).contains(&eps) || !(c >= 1.0) {
        return Err(Error::invalid("need 0 <= eps <= 1 and c >= 1"));
    }
    let opt = brute_force_sparsest(graph, Objective::Sparsity)?;
    let (on, od) = (opt.ratio.num as f64, opt.ratio.den as f64);
    let slack = 1.0 + 1e-12;
    let top = 1u64 << (n - 1);
    let masks = qualifying_masks(graph, |mask, b, size, _| {
        let s = size as f64;
        mask & top == 0 && b as f64 * od <= c * on * s * (n as f64 - s) * slack
    });
    let mut best: Option<(usize, u64)> = None;
    for &mask in &masks {
        let cut = Cut::from_mask(n, mask);
        let masses = prefix_masses(spectrum, &cut);
        let k = masses
            .iter()
            .position(|&m| m >= 1.0 - eps - 1e-12)
            .map_or(n, |p| p + 1);
        if best.is_none_or(|b| (k, mask) < b) {
            best = Some((k, mask));
        }
    }
    let (k, mask) = best.expect("the optimum qualifies");
    Ok(CutDimension {
        k,
        witness: Cut::from_mask(n, mask).vertices(),
        psi_opt: opt.value,
        qualifying_cuts: masks.len(),
    })
}

/// Checks that every cut with `|Q| <= n/2` and `phi(Q) <= 2 phi(G)` keeps at
/// least `1 - eps` of its centered mass in the `tau`-low eigenspace, `tau =
/// 100 d phi(G)^2 / eps^2`.
#[derive(Clone, Debug, Serialize)]
pub struct ContainmentReport {
    pub phi_opt: f64,
    pub tau: f64,
    pub dim_low: usize,
    /// `tau >= 2`: the low space is everything and the check is trivial.
    pub vacuous: bool,
    pub cuts_checked: usize,
    /// Smallest `mass - (1 - eps)` over the checked cuts.
    pub worst_margin: f64,
    pub worst_cut: Vec<usize>,
    /// Smallest threshold that would have sufficed for every checked cut.
    pub required_tau: f64,
    /// `required_tau eps^2 / (d phi^2)`, the constant that would replace 100.
    pub required_constant: f64,
}

impl ContainmentReport {
    pub fn holds(&self) -> bool {
        self.worst_margin >= -1e-9
    }
}

pub fn containment_check(
    graph: &CayleyGraph,
    spectrum: &Spectrum,
    eps: f64,
) -> Result<ContainmentReport> {
    let n = graph.n();
    guard("vertex count", n, MAX_ENUMERATION_VERTICES)?;
    let d = graph
        .regular_degree()
        .ok_or_else(|| Error::invalid("graph is not regular"))? as f64;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid("eps must lie in (0, 1]"));
    }
    let opt = brute_force_sparsest(graph, Objective::Conductance)?;
    let phi = opt.value;
    let tau = 100.0 * d * phi * phi / (eps * eps);
    let dim_low = threshold_rank(spectrum, tau.min(2.0));
    let (on, od) = (opt.ratio.num as u128, opt.ratio.den as u128);
    let masks = qualifying_masks(graph, |_, b, size, vol| {
        2 * size as usize <= n && (b as u128) * od <= 2 * on * vol as u128
    });
    let eigs = spectrum.eigenvalues();
    let mut worst = (f64::INFINITY, 0u64);
    let mut required = 0.0f64;
    for &mask in &masks {
        let cut = Cut::from_mask(n, mask);
        let masses = prefix_masses(spectrum, &cut);
        let margin = if dim_low == 0 {
            -(1.0 - eps)
        } else {
            masses[dim_low - 1] - (1.0 - eps)
        };
        if margin < worst.0 {
            worst = (margin, mask);
        }
        let p = masses
            .iter()
            .position(|&m| m >= 1.0 - eps - 1e-12)
            .unwrap_or(n - 1);
        required = required.max(eigs[p]);
    }
    Ok(ContainmentReport {
        phi_opt: phi,
        tau,
        dim_low,
        vacuous: tau >= 2.0,
        cuts_checked: masks.len(),
        worst_margin: worst.0,
        worst_cut: Cut::from_mask(n, worst.1).vertices(),
        required_tau: required,
        required_constant: required * eps * eps / (d * phi * phi),
    })
}
