//! `Z_p^n`: the eigenvalue `lambda_2(G')` of the graph generated by
//! `S' = S u 2S u ... u ((p-1)/2) S` approximates `phi(G)` within `O(p)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::cuts::{brute_force_sparsest, Cut, Objective};
use crate::error::{guard, Error, Result};
use crate::group::{
    build_cayley, require_symmetric, AbelianGroup, GeneratorMultiset, GroupElement,
    MAX_DENSE_VERTICES,
};
use crate::spectral::{character_values, Pairing, MAX_CHARACTER_ORDER};

/// Largest order for which `phi(G)` and `phi(G')` come from exhaustive search.
pub const MAX_ORACLE_ORDER: usize = 25;

// Arc cuts `{x : <g, x> in [0, j)}` for every `j` are scanned while
// `order * p` stays below this; beyond it only hyperplanes (`j = 1`).
const MAX_ARC_WORK: usize = 1 << 24;

pub fn is_prime(p: usize) -> bool {
    if p < 2 {
        return false;
    }
    let mut q = 2;
    while q * q <= p {
        if p.is_multiple_of(q) {
            return false;
        }
        q += 1;
    }
    true
}

/// `S'`: every generator scaled by `1, ..., (p-1)/2`, multiplicities kept.
pub fn scaled_generators(
    group: &AbelianGroup,
    p: usize,
    gens: &GeneratorMultiset,
) -> GeneratorMultiset {
    let mut out = GeneratorMultiset::new();
    for k in 1..=(p - 1) / 2 {
        for (s, m) in gens.iter() {
            out.insert(group.scale(k, s), m);
        }
    }
    out
}

/// Exhaustive comparison `phi(G) <= phi(G') <= c phi(G)` for both constants in
/// play, `(p+1)/4` and `(p+1)/2`.
#[derive(Clone, Debug, Serialize)]
pub struct ScaledBound {
    pub phi_prime: f64,
    pub lower_holds: bool,
    pub quarter_holds: bool,
    pub half_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZpnReport {
    pub p: usize,
    pub n_dim: usize,
    pub order: usize,
    pub degree: usize,
    pub degree_prime: usize,
    pub lambda2: f64,
    pub lambda2_prime: f64,
    /// Character attaining `lambda_2(G')`.
    pub witness: GroupElement,
    /// `|{x : <witness, x> = 0}| = p^(n-1)`.
    pub witness_size: usize,
    pub witness_conductance: f64,
    /// Exhaustive `phi(G)` when the order is at most [`MAX_ORACLE_ORDER`].
    pub phi_exact: Option<f64>,
    /// Smallest conductance over the arc cuts `{x : <g, x> in [0, j)}`.
    pub phi_coset: f64,
    pub arcs_scanned: bool,
    /// `phi(G)` if known, otherwise `phi_coset`.
    pub phi_reference: f64,
    /// `phi_reference <= lambda_2(G')`.
    pub lower_holds: bool,
    /// `lambda_2(G') <= (p+1)/2 phi_reference`.
    pub upper_holds: bool,
    /// `phi_G(witness cut) <= lambda_2(G')`.
    pub witness_holds: bool,
    pub scaled_bound: Option<ScaledBound>,
}

impl ZpnReport {
    pub fn holds(&self) -> bool {
        self.lower_holds && self.upper_holds && self.witness_holds
    }

    /// `{x : <witness, x> = 0}` as a cut of `Z_p^n`.
    pub fn witness_cut(&self) -> Result<Cut> {
        let group = AbelianGroup::new(vec![self.p; self.n_dim])?;
        guard("group order", group.order(), MAX_DENSE_VERTICES)?;
        let pairing = Pairing::new(&group);
        Ok(Cut::from_members(
            group
                .elements()
                .map(|x| pairing.num(&self.witness.0, &x.0) == 0)
                .collect(),
        ))
    }

    /// The ratio `lambda_2(G') / phi_reference`, compared against `(p+1)/2`.
    pub fn approximation_ratio(&self) -> f64 {
        self.lambda2_prime / self.phi_reference
    }
}

fn min_nonzero(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .enumerate()
        .skip(1)
        .fold((0, f64::INFINITY), |best, (i, &v)| {
            if v < best.1 - 1e-12 {
                (i, v)
            } else {
                best
            }
        })
}

/// Cheapest arc cut for the character `g`: returns `(boundary per coset, j)`
/// minimizing `boundary / (j d)`.
fn best_arc(p: usize, values: &[(usize, u64)], arcs: bool) -> (u64, usize) {
    let out_of = |v: usize, j: usize| -> u64 {
        values
            .iter()
            .filter(|(a, _)| (v + a) % p >= j)
            .map(|(_, m)| m)
            .sum()
    };
    let into = |v: usize, j: usize| -> u64 {
        values
            .iter()
            .filter(|(a, _)| (v + p - a) % p < j)
            .map(|(_, m)| m)
            .sum()
    };
    let mut b = out_of(0, 1);
    let mut best = (b, 1usize);
    if arcs {
        for j in 1..(p - 1) / 2 {
            b = b - into(j, j) + out_of(j, j + 1);
            if (b as u128) * (best.1 as u128) < (best.0 as u128) * ((j + 1) as u128) {
                best = (b, j + 1);
            }
        }
    }
    best
}

/// Builds `G' = Cay(Z_p^n, S')`, reads off `lambda_2(G')` and its witness
/// hyperplane, and checks `phi(G) <= lambda_2(G') <= ((p+1)/2) phi(G)`.
pub fn zpn_approx(p: usize, n_dim: usize, gens: &GeneratorMultiset) -> Result<ZpnReport> {
    if p == 2 {
        return Err(Error::invalid("p = 2 gives an empty scaled generator set"));
    }
    if !is_prime(p) {
        return Err(Error::invalid(format!("p = {p} is not an odd prime")));
    }
    if n_dim == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    let order = u32::try_from(n_dim)
        .ok()
        .and_then(|e| p.checked_pow(e))
        .unwrap_or(usize::MAX);
    guard("group order", order, MAX_CHARACTER_ORDER)?;
    let group = AbelianGroup::new(vec![p; n_dim])?;
    require_symmetric(&group, gens)?;
    if gens.is_empty() {
        return Err(Error::invalid("generator multiset is empty"));
    }
    let scaled = scaled_generators(&group, p, gens);
    let d = gens.degree();
    let base = character_values(&group, gens)?;
    let prime = character_values(&group, &scaled)?;
    let (_, lambda2) = min_nonzero(&base);
    let (wi, lambda2_prime) = min_nonzero(&prime);
    if !lambda2.is_finite() {
        return Err(Error::invalid("trivial group has no cut"));
    }
    if lambda2 <= 1e-9 {
        // the multiplicity of eigenvalue 0 counts components
        let components = base.iter().filter(|&&l| l <= 1e-9).count();
        return Err(Error::Disconnected { components });
    }
    let pairing = Pairing::new(&group);
    let gens_v: Vec<(Vec<usize>, u64)> =
        gens.iter().map(|(s, m)| (s.0.clone(), m as u64)).collect();
    let values_for = |g: &[usize]| -> Vec<(usize, u64)> {
        gens_v
            .iter()
            .map(|(s, m)| (pairing.num(g, s) as usize, *m))
            .collect()
    };
    let witness = group.unindex_unchecked(wi);
    let cut_edges: u64 = values_for(&witness)
        .iter()
        .filter(|(a, _)| *a != 0)
        .map(|(_, m)| m)
        .sum();
    let witness_conductance = cut_edges as f64 / d as f64;

    let arcs = order.saturating_mul(p) <= MAX_ARC_WORK;
    let (cb, cj) = (1..order)
        .into_par_iter()
        .map(|i| best_arc(p, &values_for(&group.unindex_unchecked(i)), arcs))
        .reduce(
            || (u64::MAX, 1),
            |a, b| {
                if (b.0 as u128) * (a.1 as u128) < (a.0 as u128) * (b.1 as u128) {
                    b
                } else {
                    a
                }
            },
        );
    let phi_coset = cb as f64 / (cj as f64 * d as f64);

    let mut phi_exact = None;
    let mut scaled_bound = None;
    if order <= MAX_ORACLE_ORDER {
        let g = build_cayley(&group, gens)?;
        let phi = brute_force_sparsest(&g, Objective::Conductance)?.value;
        let gp = build_cayley(&group, &scaled)?;
        let phi_prime = brute_force_sparsest(&gp, Objective::Conductance)?.value;
        let pf = (p + 1) as f64;
        scaled_bound = Some(ScaledBound {
            phi_prime,
            lower_holds: phi <= phi_prime + 1e-12,
            quarter_holds: phi_prime <= pf / 4.0 * phi + 1e-12,
            half_holds: phi_prime <= pf / 2.0 * phi + 1e-12,
        });
        phi_exact = Some(phi);
    }
    let phi_reference = phi_exact.unwrap_or(phi_coset);
    let tol = 1e-9;
    Ok(ZpnReport {
        p,
        n_dim,
        order,
        degree: d,
        degree_prime: scaled.degree(),
        lambda2,
        lambda2_prime,
        witness: GroupElement(witness),
        witness_size: order / p,
        witness_conductance,
        phi_exact,
        phi_coset,
        arcs_scanned: arcs,
        phi_reference,
        lower_holds: phi_reference <= lambda2_prime + tol,
        upper_holds: lambda2_prime <= (p + 1) as f64 / 2.0 * phi_reference + tol,
        witness_holds: witness_conductance <= lambda2_prime + tol,
        scaled_bound,
    })
}
