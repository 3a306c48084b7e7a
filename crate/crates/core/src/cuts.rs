//! Cut functionals, exhaustive and spectral sparsest-cut search, and the
//! brute-force expander decomposition.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{guard, Error, Result};
use crate::group::CayleyGraph;
use crate::spectral::Spectrum;

/// Largest vertex count accepted by exhaustive searches.
pub const MAX_BRUTE_FORCE_VERTICES: usize = 26;
/// Largest vertex count accepted by [`expander_decomposition`].
pub const MAX_DECOMPOSITION_VERTICES: usize = 20;

/// Vertex subset. Ordered as a binary number with vertex `n-1` most significant,
/// so the smallest cut is the one with the smallest bitmask.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cut {
    members: Vec<bool>,
    size: usize,
}

impl Cut {
    pub fn from_members(members: Vec<bool>) -> Self {
        let size = members.iter().filter(|&&b| b).count();
        Self { members, size }
    }

    pub fn from_vertices(n: usize, vertices: &[usize]) -> Result<Self> {
        let mut members = vec![false; n];
        for &v in vertices {
            if v >= n {
                return Err(Error::invalid(format!(
                    "vertex {v} out of range for n = {n}"
                )));
            }
            members[v] = true;
        }
        Ok(Self::from_members(members))
    }

    /// Bit `i` of `mask` is vertex `i`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Self::from_members((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn n(&self) -> usize {
        self.members.len()
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members[v]
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn vertices(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.members[v]).collect()
    }

    pub fn mask(&self) -> Option<u64> {
        (self.n() <= 64).then(|| {
            self.members
                .iter()
                .enumerate()
                .fold(0u64, |m, (i, &b)| m | (u64::from(b) << i))
        })
    }

    pub fn complement(&self) -> Self {
        Self {
            members: self.members.iter().map(|b| !b).collect(),
            size: self.n() - self.size,
        }
    }

    /// Nonempty and not the whole vertex set.
    pub fn is_proper(&self) -> bool {
        self.size > 0 && self.size < self.n()
    }

    /// The side with at most `n/2` vertices; on a tie, the smaller of the two.
    pub fn smaller_side(&self) -> Self {
        let c = self.complement();
        match (2 * self.size).cmp(&self.n()) {
            Ordering::Less => self.clone(),
            Ordering::Greater => c,
            Ordering::Equal => std::cmp::min(self.clone(), c),
        }
    }

    pub fn symmetric_difference(&self, other: &Cut) -> usize {
        self.members
            .iter()
            .zip(&other.members)
            .filter(|(a, b)| a != b)
            .count()
    }

    pub fn indicator(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.n(),
            self.members.iter().map(|&b| f64::from(u8::from(b))),
        )
    }

    /// `1_Q - (|Q|/n) 1`.
    pub fn centered_indicator(&self) -> DVector<f64> {
        let mean = self.size as f64 / self.n() as f64;
        DVector::from_iterator(
            self.n(),
            self.members.iter().map(|&b| f64::from(u8::from(b)) - mean),
        )
    }
}

impl Ord for Cut {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n().cmp(&other.n()).then_with(|| {
            for i in (0..self.n()).rev() {
                match self.members[i].cmp(&other.members[i]) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Cut {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Nonnegative rational `num / den`, compared exactly.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Self {
        debug_assert!(den > 0);
        Self { num, den }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialEq for Ratio {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Ratio {}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Objective {
    Conductance,
    Sparsity,
}

/// A cut together with its objective value.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoredCut {
    pub cut: Cut,
    pub ratio: Ratio,
    pub value: f64,
}

impl ScoredCut {
    fn new(cut: Cut, ratio: Ratio) -> Self {
        Self {
            value: ratio.value(),
            cut,
            ratio,
        }
    }
}

fn check_cut(graph: &CayleyGraph, cut: &Cut) -> Result<()> {
    if cut.n() != graph.n() {
        return Err(Error::invalid(format!(
            "cut has {} vertices, graph has {}",
            cut.n(),
            graph.n()
        )));
    }
    if !cut.is_proper() {
        return Err(Error::invalid("cut must be nonempty and proper"));
    }
    Ok(())
}

/// Total multiplicity of edges leaving `cut`.
pub fn boundary(graph: &CayleyGraph, cut: &Cut) -> u64 {
    let mut b = 0;
    for u in cut.vertices() {
        for &(v, m) in graph.neighbors(u) {
            if !cut.contains(v) {
                b += m as u64;
            }
        }
    }
    b
}

pub fn volume(graph: &CayleyGraph, cut: &Cut) -> u64 {
    cut.vertices().iter().map(|&v| graph.degree(v)).sum()
}

/// `|dQ| / vol(Q)`.
pub fn conductance(graph: &CayleyGraph, cut: &Cut) -> Result<f64> {
    check_cut(graph, cut)?;
    let vol = volume(graph, cut);
    if vol == 0 {
        return Err(Error::invalid("cut has zero volume"));
    }
    Ok(boundary(graph, cut) as f64 / vol as f64)
}

/// `|dQ| / (|Q| (n - |Q|))`.
pub fn sparsity(graph: &CayleyGraph, cut: &Cut) -> Result<f64> {
    Ok(sparsity_ratio(graph, cut)?.value())
}

pub fn sparsity_ratio(graph: &CayleyGraph, cut: &Cut) -> Result<Ratio> {
    check_cut(graph, cut)?;
    let s = cut.size() as u64;
    Ok(Ratio::new(boundary(graph, cut), s * (graph.n() as u64 - s)))
}

/// Conductance of whichever side has the smaller volume.
pub fn balanced_conductance(graph: &CayleyGraph, cut: &Cut) -> Result<f64> {
    check_cut(graph, cut)?;
    let vol = volume(graph, cut);
    let small = vol.min(graph.total_volume() - vol);
    if small == 0 {
        return Err(Error::invalid("cut has zero volume"));
    }
    Ok(boundary(graph, cut) as f64 / small as f64)
}

/// Cut functionals next to their normalized-Laplacian Rayleigh forms.
#[derive(Clone, Debug, Serialize)]
pub struct RayleighReport {
    pub conductance: f64,
    pub conductance_rayleigh: f64,
    pub n_sparsity: f64,
    pub n_sparsity_rayleigh: f64,
}

impl RayleighReport {
    pub fn max_deviation(&self) -> f64 {
        (self.conductance - self.conductance_rayleigh)
            .abs()
            .max((self.n_sparsity - self.n_sparsity_rayleigh).abs())
    }
}

/// Evaluates `phi` and `n psi` both combinatorially and as quadratic forms of
/// the normalized Laplacian `laplacian`.
///
/// With `y = D^{1/2} 1_Q` and `z = D^{1/2} 1bar_Q`, `phi = y^T L y / vol(Q)` and
/// `n psi = z^T L z / |1bar_Q|^2`; for a `d`-regular graph these reduce to
/// `1_Q^T L 1_Q / |Q|` and `d 1bar^T L 1bar / 1bar^T 1bar`.
pub fn rayleigh_consistency(
    graph: &CayleyGraph,
    laplacian: &DMatrix<f64>,
    cut: &Cut,
) -> Result<RayleighReport> {
    check_cut(graph, cut)?;
    let sq: DVector<f64> = DVector::from_iterator(
        graph.n(),
        graph.degrees().iter().map(|&d| (d as f64).sqrt()),
    );
    let y = cut.indicator().component_mul(&sq);
    let c = cut.centered_indicator();
    let z = c.component_mul(&sq);
    let quad = |x: &DVector<f64>| x.dot(&(laplacian * x));
    let n = graph.n() as f64;
    Ok(RayleighReport {
        conductance: conductance(graph, cut)?,
        conductance_rayleigh: quad(&y) / volume(graph, cut) as f64,
        n_sparsity: n * sparsity(graph, cut)?,
        n_sparsity_rayleigh: quad(&z) / c.norm_squared(),
    })
}

/// Static tables for incremental boundary updates.
pub(crate) struct CutScanner {
    n: usize,
    loopless: Vec<Vec<(usize, u64)>>,
    loopless_degree: Vec<u64>,
    degree: Vec<u64>,
}

/// Running statistics of the cut visited by a [`CutScanner`].
#[derive(Clone, Copy, Debug)]
pub(crate) struct CutStats {
    pub mask: u64,
    pub boundary: u64,
    pub size: u32,
    pub volume: u64,
}

impl CutScanner {
    pub(crate) fn new(graph: &CayleyGraph) -> Self {
        let n = graph.n();
        let mut loopless = vec![Vec::new(); n];
        let mut loopless_degree = vec![0; n];
        for (u, (nb, ld)) in loopless
            .iter_mut()
            .zip(loopless_degree.iter_mut())
            .enumerate()
        {
            for &(v, m) in graph.neighbors(u) {
                if v != u {
                    nb.push((v, m as u64));
                    *ld += m as u64;
                }
            }
        }
        Self {
            n,
            loopless,
            loopless_degree,
            degree: graph.degrees().to_vec(),
        }
    }

    fn inside_weight(&self, v: usize, mask: u64) -> u64 {
        self.loopless[v]
            .iter()
            .filter(|(u, _)| mask >> u & 1 == 1)
            .map(|(_, w)| w)
            .sum()
    }

    fn stats_of(&self, mask: u64) -> CutStats {
        let mut s = CutStats {
            mask: 0,
            boundary: 0,
            size: 0,
            volume: 0,
        };
        for v in 0..self.n {
            if mask >> v & 1 == 1 {
                self.toggle(&mut s, v);
            }
        }
        s
    }

    fn toggle(&self, s: &mut CutStats, v: usize) {
        let bit = 1u64 << v;
        let rest = s.mask & !bit;
        let delta = self.loopless_degree[v] as i64 - 2 * self.inside_weight(v, rest) as i64;
        if s.mask & bit == 0 {
            s.boundary = (s.boundary as i64 + delta) as u64;
            s.size += 1;
            s.volume += self.degree[v];
        } else {
            s.boundary = (s.boundary as i64 - delta) as u64;
            s.size -= 1;
            s.volume -= self.degree[v];
        }
        s.mask ^= bit;
    }

    /// Visits the Gray-code masks `g(i)` for `i` in `lo..hi`.
    pub(crate) fn scan(&self, lo: u64, hi: u64, mut f: impl FnMut(&CutStats)) {
        if lo >= hi {
            return;
        }
        let mut s = self.stats_of(lo ^ (lo >> 1));
        f(&s);
        for i in lo + 1..hi {
            self.toggle(&mut s, i.trailing_zeros() as usize);
            f(&s);
        }
    }

    /// Parallel scan over every mask in `1..2^n`, reducing each chunk with
    /// `fold` and then combining the chunk results with `merge`.
    pub(crate) fn par_fold<T: Send>(
        &self,
        init: impl Fn() -> T + Sync,
        fold: impl Fn(&mut T, &CutStats) + Sync,
        merge: impl Fn(T, T) -> T + Sync + Send,
    ) -> T {
        let total = 1u64 << self.n;
        let chunk = 1u64 << 14;
        let chunks = total.div_ceil(chunk);
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let lo = (c * chunk).max(1);
                let hi = ((c + 1) * chunk).min(total);
                let mut acc = init();
                self.scan(lo, hi, |s| fold(&mut acc, s));
                acc
            })
            .reduce(&init, &merge)
    }
}

fn better(a: Option<(Ratio, u64)>, b: Option<(Ratio, u64)>) -> Option<(Ratio, u64)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(if (y.0, y.1) < (x.0, x.1) { y } else { x }),
    }
}

/// Exact optimum over all proper cuts; conductance only considers cuts with
/// `vol(Q) <= vol(V)/2`. Ties go to the lexicographically smallest bitset.
pub fn brute_force_sparsest(graph: &CayleyGraph, objective: Objective) -> Result<ScoredCut> {
    let n = graph.n();
    guard("vertex count", n, MAX_BRUTE_FORCE_VERTICES)?;
    if n < 2 {
        return Err(Error::invalid(
            "graph needs at least two vertices to have a cut",
        ));
    }
    graph.require_positive_degrees()?;
    let total_vol = graph.total_volume();
    let full = (1u64 << n) - 1;
    let scanner = CutScanner::new(graph);
    let best = scanner.par_fold(
        || None,
        |acc: &mut Option<(Ratio, u64)>, s| {
            if s.mask == full {
                return;
            }
            let r = match objective {
                Objective::Conductance => {
                    if 2 * s.volume > total_vol {
                        return;
                    }
                    Ratio::new(s.boundary, s.volume)
                }
                Objective::Sparsity => {
                    let k = s.size as u64;
                    Ratio::new(s.boundary, k * (n as u64 - k))
                }
            };
            *acc = better(*acc, Some((r, s.mask)));
        },
        better,
    );
    let (ratio, mask) = best.expect("a graph with two vertices has a proper cut");
    Ok(ScoredCut::new(Cut::from_mask(n, mask), ratio))
}

/// Best prefix cut of the vertex ordering by `vector` (descending, ties by
/// index), scored by the conductance of the smaller-volume side.
pub fn sweep_cut(graph: &CayleyGraph, vector: &DVector<f64>) -> Result<ScoredCut> {
    let n = graph.n();
    if vector.len() != n || n < 2 {
        return Err(Error::invalid(
            "sweep vector must have one entry per vertex, n >= 2",
        ));
    }
    graph.require_positive_degrees()?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vector[b].total_cmp(&vector[a]).then(a.cmp(&b)));
    let total = graph.total_volume();
    let mut inside = vec![false; n];
    let (mut bnd, mut vol) = (0i64, 0u64);
    let mut best: Option<(Ratio, Cut)> = None;
    for &v in &order[..n - 1] {
        let mut w_in = 0i64;
        let mut w_loopless = 0i64;
        for &(u, m) in graph.neighbors(v) {
            if u != v {
                w_loopless += m as i64;
                if inside[u] {
                    w_in += m as i64;
                }
            }
        }
        bnd += w_loopless - 2 * w_in;
        vol += graph.degree(v);
        inside[v] = true;
        let r = Ratio::new(bnd as u64, vol.min(total - vol));
        let side = Cut::from_members(inside.clone());
        let side = match (2 * vol).cmp(&total) {
            Ordering::Less => side,
            Ordering::Greater => side.complement(),
            Ordering::Equal => std::cmp::min(side.complement(), side),
        };
        let replace = match &best {
            None => true,
            Some((br, bc)) => (r, &side) < (*br, bc),
        };
        if replace {
            best = Some((r, side));
        }
    }
    let (r, c) = best.expect("n >= 2");
    Ok(ScoredCut::new(c, r))
}

/// Sweep over the second eigenvector (rescaled by `D^{-1/2}` on irregular
/// graphs). Satisfies `phi <= sqrt(2 lambda_2)`.
pub fn fiedler_cut(graph: &CayleyGraph, spectrum: &Spectrum) -> Result<ScoredCut> {
    graph.require_connected()?;
    if spectrum.n() != graph.n() || graph.n() < 2 {
        return Err(Error::invalid("spectrum does not match graph"));
    }
    let mut v = spectrum.eigenvector(1);
    if graph.regular_degree().is_none() {
        for (x, &d) in v.iter_mut().zip(graph.degrees()) {
            *x /= (d as f64).sqrt();
        }
    }
    sweep_cut(graph, &v)
}

/// `phi(Q) <= (n/d) psi(Q) <= 2 phi(Q)` for `|Q| <= n/2` in a `d`-regular
/// graph; returns the three quantities in that order.
pub fn conductance_sparsity_sandwich(graph: &CayleyGraph, cut: &Cut) -> Result<(f64, f64, f64)> {
    let d = graph
        .regular_degree()
        .ok_or_else(|| Error::invalid("graph is not regular"))? as f64;
    if 2 * cut.size() > cut.n() {
        return Err(Error::invalid("cut must have at most n/2 vertices"));
    }
    let phi = conductance(graph, cut)?;
    let mid = graph.n() as f64 / d * sparsity(graph, cut)?;
    Ok((phi, mid, 2.0 * phi))
}

/// One piece of an expander decomposition.
#[derive(Clone, Debug, Serialize)]
pub struct Piece {
    pub vertices: Vec<usize>,
    /// Conductance measured in the whole graph.
    pub conductance: f64,
    /// True when the piece was split off for having conductance at most `tau`;
    /// false for the final remainder.
    pub sparse: bool,
}

/// Repeatedly removes the smallest (then lexicographically first) subset `H` of
/// the remaining vertices with `phi_G(H) <= tau`; whatever is left when no such
/// subset exists becomes the last piece.
pub fn expander_decomposition(graph: &CayleyGraph, tau: f64) -> Result<Vec<Piece>> {
    let n = graph.n();
    guard("vertex count", n, MAX_DECOMPOSITION_VERTICES)?;
    graph.require_positive_degrees()?;
    if !(tau >= 0.0) {
        return Err(Error::invalid("tau must be nonnegative"));
    }
    let size = 1usize << n;
    let mut bnd = vec![0u32; size];
    let mut vol = vec![0u32; size];
    let scanner = CutScanner::new(graph);
    scanner.scan(0, size as u64, |s| {
        bnd[s.mask as usize] = s.boundary as u32;
        vol[s.mask as usize] = s.volume as u32;
    });
    let slack = 1e-12;
    let mut remaining = (size - 1) as u64;
    let mut pieces = Vec::new();
    while remaining != 0 {
        let mut best: Option<(u32, u64)> = None;
        let mut sub = remaining;
        while sub != 0 {
            let key = (sub.count_ones(), sub);
            if best.is_none_or(|b| key < b)
                && bnd[sub as usize] as f64 <= tau * vol[sub as usize] as f64 + slack
            {
                best = Some(key);
            }
            sub = (sub - 1) & remaining;
        }
        let (mask, sparse) = match best {
            Some((_, m)) => (m, true),
            None => (remaining, false),
        };
        let cut = Cut::from_mask(n, mask);
        pieces.push(Piece {
            vertices: cut.vertices(),
            conductance: bnd[mask as usize] as f64 / vol[mask as usize] as f64,
            sparse,
        });
        remaining &= !mask;
        if !sparse {
            break;
        }
    }
    Ok(pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::spectral::{normalized_laplacian, spectrum_of};

    #[test]
    fn cut_order_is_bitmask_order() {
        let a = Cut::from_mask(4, 0b0011);
        let b = Cut::from_mask(4, 0b0100);
        assert!(a < b);
        assert_eq!(a.mask(), Some(3));
        assert_eq!(
            Cut::from_mask(4, 0b1100).smaller_side(),
            Cut::from_mask(4, 0b0011)
        );
    }

    #[test]
    fn cycle_arc_values() {
        let g = corpus::cycle(8).unwrap();
        let q = Cut::from_vertices(8, &[0, 1, 2, 3]).unwrap();
        assert_eq!(boundary(&g, &q), 2);
        assert_eq!(conductance(&g, &q).unwrap(), 0.25);
        assert_eq!(sparsity(&g, &q).unwrap(), 2.0 / 16.0);
    }

    #[test]
    fn rayleigh_forms_match_on_irregular_graph() {
        let g = CayleyGraph::from_edges(
            5,
            &[
                (0, 1, 2),
                (1, 2, 1),
                (2, 3, 1),
                (3, 4, 3),
                (4, 0, 1),
                (2, 2, 1),
            ],
        )
        .unwrap();
        let l = normalized_laplacian(&g).unwrap();
        for mask in 1..31u64 {
            let r = rayleigh_consistency(&g, &l, &Cut::from_mask(5, mask)).unwrap();
            assert!(r.max_deviation() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn brute_force_on_cycle() {
        let g = corpus::cycle(8).unwrap();
        let best = brute_force_sparsest(&g, Objective::Conductance).unwrap();
        assert_eq!(best.value, 0.25);
        assert_eq!(best.cut.vertices(), vec![0, 1, 2, 3]);
        let s = brute_force_sparsest(&g, Objective::Sparsity).unwrap();
        assert_eq!(s.ratio, Ratio::new(2, 16));
        assert_eq!(s.cut.vertices(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn scanner_matches_direct_boundary() {
        let g = corpus::torus(&[3, 3]).unwrap();
        let sc = CutScanner::new(&g);
        sc.scan(1, 1 << 9, |s| {
            let c = Cut::from_mask(9, s.mask);
            assert_eq!(s.boundary, boundary(&g, &c));
            assert_eq!(s.volume, volume(&g, &c));
            assert_eq!(s.size as usize, c.size());
        });
    }

    #[test]
    fn fiedler_finds_the_arc_on_tied_cycle() {
        let g = corpus::cycle(8).unwrap();
        let s = spectrum_of(&g).unwrap();
        let f = fiedler_cut(&g, &s).unwrap();
        assert_eq!(f.value, 0.25);
        assert!(f.value <= (2.0 * s.lambda2()).sqrt());
    }

    #[test]
    fn fiedler_rejects_disconnected() {
        let g = CayleyGraph::from_edges(4, &[(0, 1, 1), (2, 3, 1)]).unwrap();
        let s = crate::spectral::dense_spectrum(&g).unwrap();
        assert!(matches!(
            fiedler_cut(&g, &s),
            Err(Error::Disconnected { components: 2 })
        ));
    }

    #[test]
    fn decomposition_of_two_triangles() {
        let g = CayleyGraph::from_edges(
            6,
            &[
                (0, 1, 1),
                (1, 2, 1),
                (2, 0, 1),
                (3, 4, 1),
                (4, 5, 1),
                (5, 3, 1),
                (2, 3, 1),
            ],
        )
        .unwrap();
        let pieces = expander_decomposition(&g, 0.2).unwrap();
        assert_eq!(pieces[0].vertices, vec![0, 1, 2]);
        assert!(pieces[0].sparse);
        assert!(pieces.iter().map(|p| p.vertices.len()).sum::<usize>() == 6);
    }
}
