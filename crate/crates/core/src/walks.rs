//! Lazy random walks: collision probabilities, their ratio bound, the
//! multiplicity certificate and the power-graph conductance check.

use std::f64::consts::E;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cuts::{conductance, Cut};
use crate::error::{guard, Error, Result};
use crate::group::CayleyGraph;
use crate::spectral::{character_values, threshold_rank, Spectrum};

fn cayley_eigenvalues(graph: &CayleyGraph) -> Result<Vec<f64>> {
    let p = graph.provenance().ok_or(Error::NotCayley)?;
    character_values(&p.group, &p.generators)
}

fn regular_degree(graph: &CayleyGraph) -> Result<u64> {
    graph
        .regular_degree()
        .ok_or_else(|| Error::invalid("graph is not regular"))
}

/// `(1/n) sum_i (1 - lambda_i/2)^{2t}`.
pub fn collision_from_eigenvalues(eigenvalues: &[f64], t: u32) -> f64 {
    let n = eigenvalues.len() as f64;
    eigenvalues
        .iter()
        .map(|&l| (1.0 - l / 2.0).powi(2 * t as i32))
        .sum::<f64>()
        / n
}

/// Collision probability of the `t`-step lazy walk, from the character spectrum.
pub fn collision_spectral(graph: &CayleyGraph, t: u32) -> Result<f64> {
    Ok(collision_from_eigenvalues(&cayley_eigenvalues(graph)?, t))
}

/// `||p_t||^2` for `p_t` the distribution of the lazy walk `(I + W)/2`, `W =
/// D^{-1} A`, started at vertex 0, for every `t` in `0..=t_max`.
pub fn collision_direct_profile(graph: &CayleyGraph, t_max: u32) -> Result<Vec<f64>> {
    graph.require_positive_degrees()?;
    let n = graph.n();
    let mut p = vec![0.0; n];
    p[0] = 1.0;
    let mut out = Vec::with_capacity(t_max as usize + 1);
    out.push(1.0);
    let mut next = vec![0.0; n];
    for _ in 0..t_max {
        for (u, x) in next.iter_mut().enumerate() {
            *x = 0.5 * p[u];
        }
        for (u, &pu) in p.iter().enumerate() {
            if pu == 0.0 {
                continue;
            }
            let w = 0.5 * pu / graph.degree(u) as f64;
            for &(v, m) in graph.neighbors(u) {
                next[v] += w * m as f64;
            }
        }
        std::mem::swap(&mut p, &mut next);
        out.push(p.iter().map(|x| x * x).sum());
    }
    Ok(out)
}

pub fn collision_direct(graph: &CayleyGraph, t: u32) -> Result<f64> {
    Ok(*collision_direct_profile(graph, t)?.last().unwrap())
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioRow {
    pub t: u32,
    pub cp_spectral: f64,
    pub cp_direct: f64,
    /// `CP_t / CP_{2t}`.
    pub ratio: f64,
    /// `(2e)^{4d}`.
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioReport {
    pub degree: u64,
    pub rows: Vec<RatioRow>,
    /// Largest `ln(CP_t / CP_{2t}) - 4 d ln(2e)`; nonpositive when the bound holds.
    pub worst_log_excess: f64,
    pub max_spectral_direct_gap: f64,
}

impl RatioReport {
    pub fn holds(&self) -> bool {
        self.worst_log_excess <= 1e-12
    }
}

/// Checks `CP_t / CP_{2t} <= (2e)^{4d}` for `t` in `0..=t_max`, in log space.
pub fn cp_ratio_bound_check(graph: &CayleyGraph, t_max: u32) -> Result<RatioReport> {
    let d = regular_degree(graph)?;
    let eig = cayley_eigenvalues(graph)?;
    let direct = collision_direct_profile(graph, t_max)?;
    let log_bound = 4.0 * d as f64 * (2.0 * E).ln();
    let mut rows = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    let mut gap = 0.0f64;
    for t in 0..=t_max {
        let a = collision_from_eigenvalues(&eig, t);
        let b = collision_from_eigenvalues(&eig, 2 * t);
        worst = worst.max(a.ln() - b.ln() - log_bound);
        gap = gap.max((a - direct[t as usize]).abs());
        rows.push(RatioRow {
            t,
            cp_spectral: a,
            cp_direct: direct[t as usize],
            ratio: a / b,
            bound: log_bound.exp(),
        });
    }
    Ok(RatioReport {
        degree: d,
        rows,
        worst_log_excess: worst,
        max_spectral_direct_gap: gap,
    })
}

/// Quantities of the collision-ratio certificate for `dim V_tau`.
#[derive(Clone, Debug, Serialize)]
pub struct MultiplicityCertificate {
    pub tau: f64,
    pub lambda2: f64,
    pub degree: u64,
    /// `ceil(tau / lambda_2)`.
    pub kappa: u64,
    /// Number of eigenvalues at most `tau`.
    pub dim: usize,
    /// `floor(ln(dim) / (4 tau))`.
    pub t: u32,
    /// `CP_t / CP_{t (kappa+1)}`.
    pub ratio: f64,
    /// `sqrt(dim) / (2 e^3)`.
    pub lower_bound: f64,
    pub lower_holds: bool,
    /// `ln` of `(2e)^{4 d ceil(log2(kappa+1))}`.
    pub log_upper_bound: f64,
    pub upper_holds: bool,
    /// `20 d log2(3 tau / lambda_2) + 11`.
    pub log2_dim_bound: f64,
    pub dim_bound_holds: bool,
}

impl MultiplicityCertificate {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds && self.dim_bound_holds
    }
}

/// Tolerance below `lambda_2` accepted for `tau`.
const TAU_SLACK: f64 = 1e-9;

/// Lower-bounds the collision ratio through the multiplicity of eigenvalues up
/// to `tau`, upper-bounds it by iterating the doubling bound, and checks the
/// resulting dimension bound. Requires `lambda_2 <= tau <= 3/2`.
///
/// `tau` is clamped up to `lambda_2` so that `kappa >= 1`.
pub fn multiplicity_certificate(graph: &CayleyGraph, tau: f64) -> Result<MultiplicityCertificate> {
    let d = regular_degree(graph)?;
    graph.require_connected()?;
    let mut eig = cayley_eigenvalues(graph)?;
    eig.sort_by(f64::total_cmp);
    let lambda2 = eig[1];
    if !(tau >= lambda2 - TAU_SLACK && tau <= 1.5) {
        return Err(Error::invalid(format!(
            "tau = {tau} must lie in [lambda_2, 3/2] = [{lambda2}, 1.5]"
        )));
    }
    let tau = tau.max(lambda2);
    let kappa = (tau / lambda2 - 1e-9).ceil().max(1.0) as u64;
    let spectrum_dim = threshold_rank_of(&eig, tau);
    let t = ((spectrum_dim as f64).ln() / (4.0 * tau)).floor() as u32;
    let a = collision_from_eigenvalues(&eig, t);
    let b = collision_from_eigenvalues(&eig, t * (kappa as u32 + 1));
    let ratio = a / b;
    let lower_bound = (spectrum_dim as f64).sqrt() / (2.0 * E.powi(3));
    let doublings = ((kappa + 1) as f64).log2().ceil();
    let log_upper_bound = 4.0 * d as f64 * doublings * (2.0 * E).ln();
    let log2_dim_bound = 20.0 * d as f64 * (3.0 * tau / lambda2).log2() + 11.0;
    Ok(MultiplicityCertificate {
        tau,
        lambda2,
        degree: d,
        kappa,
        dim: spectrum_dim,
        t,
        ratio,
        lower_bound,
        lower_holds: ratio >= lower_bound * (1.0 - 1e-12),
        log_upper_bound,
        upper_holds: ratio.ln() <= log_upper_bound + 1e-12,
        log2_dim_bound,
        dim_bound_holds: (spectrum_dim as f64).log2() <= log2_dim_bound,
    })
}

fn threshold_rank_of(sorted: &[f64], tau: f64) -> usize {
    sorted
        .iter()
        .filter(|&&l| l <= tau + crate::spectral::EQ_TOLERANCE)
        .count()
}

/// Power-graph conductance `phi_{G^{2t}}(Q)` against `2 sqrt(t d) phi_G(Q)`.
#[derive(Clone, Debug, Serialize)]
pub struct BuserReport {
    pub t: u32,
    /// `(1/|Q|) sum_i <1_Q, v_i>^2 (1 - (1 - lambda_i)^{2t})`.
    pub lhs: f64,
    pub rhs: f64,
}

impl BuserReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

pub fn buser_check(
    graph: &CayleyGraph,
    spectrum: &Spectrum,
    cut: &Cut,
    t: u32,
) -> Result<BuserReport> {
    let d = regular_degree(graph)?;
    if t == 0 {
        return Err(Error::invalid("t must be at least 1"));
    }
    let phi = conductance(graph, cut)?;
    let coords = spectrum.eigenvectors().tr_mul(&cut.indicator());
    let lhs = coords
        .iter()
        .zip(spectrum.eigenvalues())
        .map(|(q, &l)| q * q * (1.0 - (1.0 - l).powi(2 * t as i32)))
        .sum::<f64>()
        / cut.size() as f64;
    Ok(BuserReport {
        t,
        lhs,
        rhs: 2.0 * ((t as u64 * d) as f64).sqrt() * phi,
    })
}

/// Largest vertex count for [`power_conductance_materialized`].
pub const MAX_MATERIALIZED_VERTICES: usize = 256;

/// `phi_{G^{2t}}(Q)` from an explicit `W^{2t}`: `sum_{i in Q, j notin Q}
/// (W^{2t})_{ij} / |Q|`.
pub fn power_conductance_materialized(graph: &CayleyGraph, cut: &Cut, t: u32) -> Result<f64> {
    let n = graph.n();
    guard("vertex count", n, MAX_MATERIALIZED_VERTICES)?;
    graph.require_positive_degrees()?;
    if cut.n() != n || !cut.is_proper() {
        return Err(Error::invalid("cut must be proper and match the graph"));
    }
    let w = DMatrix::from_fn(n, n, |u, v| {
        graph.adjacency(u, v) as f64 / graph.degree(u) as f64
    });
    let mut p = DMatrix::identity(n, n);
    for _ in 0..2 * t {
        p = &p * &w;
    }
    let mut s = 0.0;
    for i in cut.vertices() {
        for j in 0..n {
            if !cut.contains(j) {
                s += p[(i, j)];
            }
        }
    }
    Ok(s / cut.size() as f64)
}

/// `dim V_tau` through [`threshold_rank`], exposed for reports.
pub fn low_dimension(spectrum: &Spectrum, tau: f64) -> usize {
    threshold_rank(spectrum, tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::spectral::spectrum_of;

    #[test]
    fn k2_collision_closed_form() {
        let g = corpus::hypercube(1).unwrap();
        assert_eq!(collision_spectral(&g, 0).unwrap(), 1.0);
        assert_eq!(collision_spectral(&g, 1).unwrap(), 0.5);
        assert_eq!(collision_direct(&g, 3).unwrap(), 0.5);
    }

    #[test]
    fn explicit_graph_has_no_character_route() {
        let g = CayleyGraph::from_edges(3, &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]).unwrap();
        assert!(matches!(collision_spectral(&g, 1), Err(Error::NotCayley)));
        assert!(collision_direct(&g, 4).is_ok());
    }

    #[test]
    fn ratio_bound_on_cycle() {
        let r = cp_ratio_bound_check(&corpus::cycle(12).unwrap(), 16).unwrap();
        assert!(r.holds());
        assert!(r.max_spectral_direct_gap < 1e-12);
    }

    #[test]
    fn certificate_rejects_out_of_range_tau() {
        let g = corpus::cycle(10).unwrap();
        assert!(multiplicity_certificate(&g, 1.6).is_err());
        assert!(multiplicity_certificate(&g, 0.01).is_err());
        let c = multiplicity_certificate(&g, 1.0).unwrap();
        assert!(c.holds(), "{c:?}");
    }

    #[test]
    fn buser_spectral_equals_materialized() {
        let g = corpus::torus(&[3, 4]).unwrap();
        let s = spectrum_of(&g).unwrap();
        let q = Cut::from_vertices(12, &[0, 1, 2, 5]).unwrap();
        for t in [1, 3] {
            let b = buser_check(&g, &s, &q, t).unwrap();
            let m = power_conductance_materialized(&g, &q, t).unwrap();
            assert!((b.lhs - m).abs() < 1e-12);
            assert!(b.holds(1e-12));
        }
    }
}
