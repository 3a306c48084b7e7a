//! Normalized Laplacian spectra: closed-form character eigenvalues for Cayley
//! graphs, dense eigensolves for arbitrary graphs, and low eigenspaces.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::cuts::Cut;
use crate::error::{guard, Error, Result};
use crate::group::{
    require_symmetric, AbelianGroup, CayleyGraph, GeneratorMultiset, GroupElement,
    MAX_DENSE_VERTICES,
};

/// Eigenvalues closer than this are treated as equal.
pub const EQ_TOLERANCE: f64 = 1e-8;

/// Largest group order accepted by [`character_eigenvalues`].
pub const MAX_CHARACTER_ORDER: usize = 1 << 20;

/// `cos(2 pi num / den)`, exact at multiples of a quarter turn.
pub(crate) fn cos_2pi(num: u64, den: u64) -> f64 {
    let r = num % den;
    if (4 * r).is_multiple_of(den) {
        return [1.0, 0.0, -1.0, 0.0][(4 * r / den) as usize];
    }
    (std::f64::consts::TAU * signed_frac(r, den)).cos()
}

/// `sin(2 pi num / den)`, exact at multiples of a quarter turn.
pub(crate) fn sin_2pi(num: u64, den: u64) -> f64 {
    let r = num % den;
    if (4 * r).is_multiple_of(den) {
        return [0.0, 1.0, 0.0, -1.0][(4 * r / den) as usize];
    }
    (std::f64::consts::TAU * signed_frac(r, den)).sin()
}

// r/den folded into (-1/2, 1/2] so that x and -x reduce symmetrically.
fn signed_frac(r: u64, den: u64) -> f64 {
    if 2 * r > den {
        -((den - r) as f64) / den as f64
    } else {
        r as f64 / den as f64
    }
}

/// Pairing `<g, x>` expressed as a numerator over the group exponent.
pub(crate) struct Pairing {
    weights: Vec<u64>,
    moduli: Vec<u64>,
    pub(crate) den: u64,
}

impl Pairing {
    pub(crate) fn new(group: &AbelianGroup) -> Self {
        let den = group.exponent() as u64;
        let moduli: Vec<u64> = group.moduli().iter().map(|&m| m as u64).collect();
        Self {
            weights: moduli.iter().map(|m| den / m).collect(),
            moduli,
            den,
        }
    }

    pub(crate) fn num(&self, g: &[usize], x: &[usize]) -> u64 {
        let mut acc = 0u64;
        for j in 0..self.moduli.len() {
            acc += ((g[j] as u64 * x[j] as u64) % self.moduli[j]) * self.weights[j];
        }
        acc % self.den
    }
}

/// Eigenvalue of the normalized Laplacian for each character, in index order.
pub(crate) fn character_values(group: &AbelianGroup, gens: &GeneratorMultiset) -> Result<Vec<f64>> {
    require_symmetric(group, gens)?;
    guard("group order", group.order(), MAX_CHARACTER_ORDER)?;
    let pairing = Pairing::new(group);
    let d = gens.degree() as f64;
    let gens: Vec<(Vec<usize>, f64)> = gens.iter().map(|(s, m)| (s.0.clone(), m as f64)).collect();
    let out: Vec<(f64, f64)> = (0..group.order())
        .into_par_iter()
        .map(|i| {
            let g = group.unindex_unchecked(i);
            let (mut re, mut im) = (0.0, 0.0);
            for (s, m) in &gens {
                let k = pairing.num(&g, s);
                re += m * cos_2pi(k, pairing.den);
                im += m * sin_2pi(k, pairing.den);
            }
            (1.0 - re / d, im)
        })
        .collect();
    if let Some((i, (_, im))) = out.iter().enumerate().find(|(_, (_, im))| im.abs() >= 1e-9) {
        return Err(Error::invalid(format!(
            "character {i} has imaginary part {im:e}; generators are not symmetric"
        )));
    }
    Ok(out.into_iter().map(|(l, _)| l).collect())
}

/// `lambda_g = 1 - (1/d) sum_s mult(s) cos(2 pi <g, s>)` for every character `g`.
pub fn character_eigenvalues(
    group: &AbelianGroup,
    gens: &GeneratorMultiset,
) -> Result<Vec<(GroupElement, f64)>> {
    let values = character_values(group, gens)?;
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(i, l)| (GroupElement(group.unindex_unchecked(i)), l))
        .collect())
}

/// Eigenvalues in ascending order with matching orthonormal eigenvectors
/// (column `i` belongs to `eigenvalues[i]`).
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    eq_tolerance: f64,
}

impl Spectrum {
    /// Sorts the pairs by eigenvalue (stable).
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: DMatrix<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        if eigenvectors.nrows() != n || eigenvectors.ncols() != n {
            return Err(Error::invalid(
                "eigenvector matrix does not match eigenvalue count",
            ));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        let vals = order.iter().map(|&i| eigenvalues[i]).collect();
        let vecs = DMatrix::from_fn(n, n, |r, c| eigenvectors[(r, order[c])]);
        Ok(Self {
            eigenvalues: vals,
            eigenvectors: vecs,
            eq_tolerance: EQ_TOLERANCE,
        })
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, i: usize) -> DVector<f64> {
        self.eigenvectors.column(i).into_owned()
    }

    pub fn eq_tolerance(&self) -> f64 {
        self.eq_tolerance
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.eq_tolerance = tol;
        self
    }

    /// Second smallest eigenvalue (0 for a single vertex).
    pub fn lambda2(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(0.0)
    }

    /// `max ||L v_i - lambda_i v_i||` and `max |V^T V - I|`.
    pub fn residuals(&self, laplacian: &DMatrix<f64>) -> (f64, f64) {
        let lv = laplacian * &self.eigenvectors;
        let mut eig = 0.0f64;
        for c in 0..self.n() {
            let r = (lv.column(c) - self.eigenvectors.column(c) * self.eigenvalues[c]).amax();
            eig = eig.max(r);
        }
        let gram = self.eigenvectors.transpose() * &self.eigenvectors;
        let orth = (gram - DMatrix::identity(self.n(), self.n())).amax();
        (eig, orth)
    }
}

/// Real orthonormal eigenbasis of `Cay(G, S)` built from characters.
///
/// A self-conjugate character gives one `+-1/sqrt(n)` vector; a conjugate pair
/// `{g, -g}` gives the cosine and sine vectors scaled by `sqrt(2/n)`.
pub fn real_eigenbasis(group: &AbelianGroup, gens: &GeneratorMultiset) -> Result<Spectrum> {
    let n = group.order();
    guard("vertex count", n, MAX_DENSE_VERTICES)?;
    let values = character_values(group, gens)?;
    let pairing = Pairing::new(group);
    let elems: Vec<Vec<usize>> = (0..n).map(|i| group.unindex_unchecked(i)).collect();
    let mut vecs = DMatrix::<f64>::zeros(n, n);
    let mut lams = Vec::with_capacity(n);
    let unit = 1.0 / (n as f64).sqrt();
    let pair = (2.0 / n as f64).sqrt();
    let mut col = 0;
    for i in 0..n {
        let j = group.index_unchecked(&group.negate(&GroupElement(elems[i].clone())).0);
        if j < i {
            continue;
        }
        let nums: Vec<u64> = elems.iter().map(|x| pairing.num(&elems[i], x)).collect();
        if j == i {
            for (x, &k) in nums.iter().enumerate() {
                vecs[(x, col)] = unit * cos_2pi(k, pairing.den);
            }
            lams.push(values[i]);
            col += 1;
        } else {
            for (x, &k) in nums.iter().enumerate() {
                vecs[(x, col)] = pair * cos_2pi(k, pairing.den);
                vecs[(x, col + 1)] = pair * sin_2pi(k, pairing.den);
            }
            lams.push(values[i]);
            lams.push(values[i]);
            col += 2;
        }
    }
    debug_assert_eq!(col, n);
    Spectrum::new(lams, vecs)
}

/// `L = I - D^{-1/2} A D^{-1/2}`.
pub fn normalized_laplacian(graph: &CayleyGraph) -> Result<DMatrix<f64>> {
    graph.require_positive_degrees()?;
    let n = graph.n();
    let inv: Vec<f64> = graph
        .degrees()
        .iter()
        .map(|&d| 1.0 / (d as f64).sqrt())
        .collect();
    Ok(DMatrix::from_fn(n, n, |u, v| {
        let a = graph.adjacency(u, v) as f64 * inv[u] * inv[v];
        if u == v {
            1.0 - a
        } else {
            -a
        }
    }))
}

/// `(D^{-1/2} A D^{-1/2})^t`; for a `d`-regular graph this is the random-walk
/// matrix of the `t`-step power graph.
pub fn normalized_adjacency_power(graph: &CayleyGraph, t: u32) -> Result<DMatrix<f64>> {
    let l = normalized_laplacian(graph)?;
    let n = graph.n();
    let a = DMatrix::identity(n, n) - l;
    let mut out = DMatrix::identity(n, n);
    for _ in 0..t {
        out = &out * &a;
    }
    Ok(out)
}

/// Dense symmetric eigensolve of the normalized Laplacian.
pub fn dense_spectrum(graph: &CayleyGraph) -> Result<Spectrum> {
    let l = normalized_laplacian(graph)?;
    let eig = SymmetricEigen::new(l);
    Spectrum::new(eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Eigenvalues and eigenvectors, preferring the character basis when the graph
/// carries its group.
pub fn spectrum_of(graph: &CayleyGraph) -> Result<Spectrum> {
    match graph.provenance() {
        Some(p) => real_eigenbasis(&p.group, &p.generators),
        None => dense_spectrum(graph),
    }
}

/// Number of eigenvalues at most `tau` (up to the spectrum's tolerance).
pub fn threshold_rank(spectrum: &Spectrum, tau: f64) -> usize {
    spectrum
        .eigenvalues
        .iter()
        .filter(|&&l| l <= tau + spectrum.eq_tolerance)
        .count()
}

/// Largest sorted-order deviation between two multisets of reals; infinite if
/// their sizes differ.
pub fn multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Subspace of `R^n` with an orthonormal basis stored column-wise.
#[derive(Clone, Debug)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Wraps a basis that is already orthonormal.
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Self {
        Self { basis }
    }

    /// Orthonormalizes `vectors` (twice-iterated Gram-Schmidt), dropping any
    /// that are numerically dependent on earlier ones.
    pub fn span(n: usize, vectors: &[DVector<f64>]) -> Result<Self> {
        let mut cols: Vec<DVector<f64>> = Vec::new();
        for v in vectors {
            if v.len() != n {
                return Err(Error::invalid(
                    "vector length does not match ambient dimension",
                ));
            }
            let scale = v.norm();
            if scale == 0.0 {
                continue;
            }
            let mut w = v.clone();
            for _ in 0..2 {
                for c in &cols {
                    let p = c.dot(&w);
                    w -= c * p;
                }
            }
            let norm = w.norm();
            if norm > 1e-10 * scale {
                cols.push(w / norm);
            }
        }
        let basis = if cols.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&cols)
        };
        Ok(Self { basis })
    }

    /// Span of the first `k` eigenvectors.
    pub fn prefix(spectrum: &Spectrum, k: usize) -> Self {
        let k = k.min(spectrum.n());
        Self {
            basis: spectrum.eigenvectors.columns(0, k).into_owned(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_vector(&self, i: usize) -> DVector<f64> {
        self.basis.column(i).into_owned()
    }

    /// Coordinates of the orthogonal projection of `v`.
    pub fn coordinates(&self, v: &DVector<f64>) -> DVector<f64> {
        self.basis.tr_mul(v)
    }

    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.basis * self.coordinates(v)
    }

    /// Vector with the given coordinates in this basis.
    pub fn combine(&self, coords: &DVector<f64>) -> DVector<f64> {
        &self.basis * coords
    }
}

/// `tau`-low eigenspace: span of eigenvectors with eigenvalue at most `tau`.
pub fn low_eigenspace(spectrum: &Spectrum, tau: f64) -> Subspace {
    Subspace::prefix(spectrum, threshold_rank(spectrum, tau))
}

/// `||P_U 1bar_Q||^2 / ||1bar_Q||^2` with `1bar_Q` the centered indicator.
pub fn projection_mass(subspace: &Subspace, cut: &Cut) -> Result<f64> {
    if cut.n() != subspace.ambient_dim() {
        return Err(Error::invalid(
            "cut and subspace live in different dimensions",
        ));
    }
    if !cut.is_proper() {
        return Err(Error::invalid(
            "projection mass needs a proper nonempty cut",
        ));
    }
    let v = cut.centered_indicator();
    let c = subspace.coordinates(&v);
    Ok(c.norm_squared() / v.norm_squared())
}

/// Rows are vertices, columns the first `k` eigenvectors.
pub fn spectral_embedding(spectrum: &Spectrum, k: usize) -> Result<DMatrix<f64>> {
    if k == 0 || k > spectrum.n() {
        return Err(Error::invalid(format!(
            "embedding dimension {k} must be in 1..={}",
            spectrum.n()
        )));
    }
    Ok(spectrum.eigenvectors.columns(0, k).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(cos_2pi(1, 4), 0.0);
        assert_eq!(cos_2pi(2, 4), -1.0);
        assert_eq!(sin_2pi(3, 4), -1.0);
        assert_eq!(cos_2pi(5, 20), 0.0);
        assert_eq!(sin_2pi(1, 8), -sin_2pi(7, 8));
    }

    #[test]
    fn cycle_eigenvalues_closed_form() {
        let g = corpus::cycle(8).unwrap();
        let p = g.provenance().unwrap();
        let vals = character_eigenvalues(&p.group, &p.generators).unwrap();
        for (x, l) in vals {
            let k = x.0[0] as f64;
            let want = 1.0 - (std::f64::consts::TAU * k / 8.0).cos();
            assert!((l - want).abs() < 1e-14);
        }
    }

    #[test]
    fn hypercube_eigenvalues_are_weights() {
        let g = corpus::hypercube(4).unwrap();
        let p = g.provenance().unwrap();
        for (x, l) in character_eigenvalues(&p.group, &p.generators).unwrap() {
            let w = x.0.iter().sum::<usize>() as f64;
            assert_eq!(l, 2.0 * w / 4.0);
        }
    }

    #[test]
    fn character_basis_diagonalizes_laplacian() {
        for g in [
            corpus::cycle(9).unwrap(),
            corpus::torus(&[3, 4]).unwrap(),
            corpus::hypercube(3).unwrap(),
        ] {
            let s = spectrum_of(&g).unwrap();
            let (eig, orth) = s.residuals(&normalized_laplacian(&g).unwrap());
            assert!(eig < 1e-12 && orth < 1e-12, "{eig} {orth}");
            let dense = dense_spectrum(&g).unwrap();
            assert!(multiset_distance(s.eigenvalues(), dense.eigenvalues()) < 1e-10);
        }
    }

    #[test]
    fn zero_degree_is_rejected() {
        let g = CayleyGraph::from_edges(3, &[(0, 1, 1)]).unwrap();
        assert!(dense_spectrum(&g).is_err());
    }

    #[test]
    fn threshold_rank_counts_ties() {
        let g = corpus::cycle(8).unwrap();
        let s = spectrum_of(&g).unwrap();
        assert_eq!(threshold_rank(&s, 0.0), 1);
        assert_eq!(threshold_rank(&s, s.lambda2()), 3);
        assert_eq!(threshold_rank(&s, 2.0), 8);
    }

    #[test]
    fn projection_mass_rejects_trivial_cuts() {
        let g = corpus::cycle(6).unwrap();
        let s = spectrum_of(&g).unwrap();
        let u = low_eigenspace(&s, 0.5);
        assert!(projection_mass(&u, &Cut::from_vertices(6, &[]).unwrap()).is_err());
        assert!(projection_mass(&u, &Cut::from_vertices(6, &[0, 1, 2, 3, 4, 5]).unwrap()).is_err());
    }

    #[test]
    fn span_drops_dependent_vectors() {
        let a = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let b = DVector::from_vec(vec![1.0, 1.0, 0.0]);
        let s = Subspace::span(3, &[a.clone(), b.clone(), &a + &b]).unwrap();
        assert_eq!(s.dim(), 2);
    }
}
