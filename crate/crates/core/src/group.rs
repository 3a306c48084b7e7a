//! Finite Abelian groups `Z_{m_1} x ... x Z_{m_r}`, generator multisets and the
//! Cayley graphs they define.
//!
//! Elements are indexed in mixed radix with the last coordinate varying fastest.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{guard, Error, Result};

/// Largest vertex count for which a dense adjacency matrix is materialized.
pub const MAX_DENSE_VERTICES: usize = 4096;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct AbelianGroup {
    moduli: Vec<usize>,
    #[serde(skip)]
    strides: Vec<usize>,
    #[serde(skip)]
    order: usize,
}

/// Residue vector of a group element, one coordinate per cyclic factor.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupElement(pub Vec<usize>);

impl GroupElement {
    pub fn residues(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, r) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

impl AbelianGroup {
    /// Builds `Z_{m_1} x ... x Z_{m_r}`. Every modulus must be at least 2 and the
    /// order must fit in `u32` indices.
    pub fn new(moduli: Vec<usize>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::invalid("group needs at least one cyclic factor"));
        }
        if let Some(m) = moduli.iter().find(|&&m| m < 2) {
            return Err(Error::invalid(format!("modulus {m} is below 2")));
        }
        let mut order: usize = 1;
        for &m in &moduli {
            order = order
                .checked_mul(m)
                .filter(|&o| o <= u32::MAX as usize)
                .ok_or_else(|| Error::invalid("group order overflows"))?;
        }
        let mut strides = vec![1; moduli.len()];
        for j in (0..moduli.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * moduli[j + 1];
        }
        Ok(Self {
            moduli,
            strides,
            order,
        })
    }

    pub fn cyclic(m: usize) -> Result<Self> {
        Self::new(vec![m])
    }

    /// `Z_2^k`.
    pub fn boolean_cube(k: usize) -> Result<Self> {
        Self::new(vec![2; k])
    }

    pub fn moduli(&self) -> &[usize] {
        &self.moduli
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    /// Least common multiple of the moduli (the exponent of the group).
    pub fn exponent(&self) -> usize {
        self.moduli.iter().fold(1, |acc, &m| lcm(acc, m))
    }

    /// Checks that `residues` is a valid element.
    pub fn element(&self, residues: &[usize]) -> Result<GroupElement> {
        self.check(residues)?;
        Ok(GroupElement(residues.to_vec()))
    }

    /// Reduces arbitrary integers coordinatewise.
    pub fn reduce(&self, residues: &[i64]) -> Result<GroupElement> {
        if residues.len() != self.rank() {
            return Err(Error::invalid(format!(
                "element has {} coordinates, group has rank {}",
                residues.len(),
                self.rank()
            )));
        }
        Ok(GroupElement(
            residues
                .iter()
                .zip(&self.moduli)
                .map(|(&r, &m)| r.rem_euclid(m as i64) as usize)
                .collect(),
        ))
    }

    fn check(&self, residues: &[usize]) -> Result<()> {
        if residues.len() != self.rank() {
            return Err(Error::invalid(format!(
                "element has {} coordinates, group has rank {}",
                residues.len(),
                self.rank()
            )));
        }
        for (j, (&r, &m)) in residues.iter().zip(&self.moduli).enumerate() {
            if r >= m {
                return Err(Error::invalid(format!(
                    "coordinate {j} = {r} is out of range for Z_{m}"
                )));
            }
        }
        Ok(())
    }

    pub fn index(&self, x: &GroupElement) -> Result<usize> {
        self.check(&x.0)?;
        Ok(self.index_unchecked(&x.0))
    }

    pub(crate) fn index_unchecked(&self, residues: &[usize]) -> usize {
        residues.iter().zip(&self.strides).map(|(r, s)| r * s).sum()
    }

    pub fn unindex(&self, i: usize) -> Result<GroupElement> {
        if i >= self.order {
            return Err(Error::invalid(format!(
                "index {i} out of range for a group of order {}",
                self.order
            )));
        }
        Ok(GroupElement(self.unindex_unchecked(i)))
    }

    pub(crate) fn unindex_unchecked(&self, mut i: usize) -> Vec<usize> {
        let mut out = vec![0; self.rank()];
        for j in (0..self.rank()).rev() {
            out[j] = i % self.moduli[j];
            i /= self.moduli[j];
        }
        out
    }

    pub fn negate(&self, x: &GroupElement) -> GroupElement {
        GroupElement(
            x.0.iter()
                .zip(&self.moduli)
                .map(|(&r, &m)| (m - r % m) % m)
                .collect(),
        )
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        GroupElement(
            x.0.iter()
                .zip(&y.0)
                .zip(&self.moduli)
                .map(|((&a, &b), &m)| (a + b) % m)
                .collect(),
        )
    }

    pub fn scale(&self, k: usize, x: &GroupElement) -> GroupElement {
        GroupElement(
            x.0.iter()
                .zip(&self.moduli)
                .map(|(&r, &m)| ((k % m) * r) % m)
                .collect(),
        )
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order).map(|i| GroupElement(self.unindex_unchecked(i)))
    }

    /// Index of `x_index + s` given the residues of `s`.
    pub(crate) fn shift_index(&self, x_index: usize, s: &[usize]) -> usize {
        let mut out = 0;
        let mut rest = x_index;
        for j in (0..self.rank()).rev() {
            let m = self.moduli[j];
            let r = rest % m;
            rest /= m;
            out += ((r + s[j]) % m) * self.strides[j];
        }
        out
    }
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// A multiset of group elements, stored as element -> multiplicity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GeneratorMultiset {
    entries: BTreeMap<GroupElement, usize>,
}

impl GeneratorMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    /// Merges repeated elements; zero multiplicities are dropped.
    pub fn from_entries(entries: impl IntoIterator<Item = (GroupElement, usize)>) -> Self {
        let mut out = Self::new();
        for (x, m) in entries {
            out.insert(x, m);
        }
        out
    }

    /// `{+x, -x}` for every listed `x`, with multiplicity one each; a self-inverse
    /// element is added once.
    pub fn plus_minus(group: &AbelianGroup, elements: &[GroupElement]) -> Self {
        let mut out = Self::new();
        for x in elements {
            let neg = group.negate(x);
            out.insert(x.clone(), 1);
            if neg != *x {
                out.insert(neg, 1);
            }
        }
        out
    }

    pub fn insert(&mut self, x: GroupElement, mult: usize) {
        if mult > 0 {
            *self.entries.entry(x).or_insert(0) += mult;
        }
    }

    pub fn multiplicity(&self, x: &GroupElement) -> usize {
        self.entries.get(x).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupElement, usize)> {
        self.entries.iter().map(|(x, &m)| (x, m))
    }

    /// Number of distinct elements.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Total multiplicity, which is the degree of the Cayley graph.
    pub fn degree(&self) -> usize {
        self.entries.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AsymmetricEntry {
    pub element: GroupElement,
    pub multiplicity: usize,
    pub inverse_multiplicity: usize,
}

/// Outcome of [`validate_generators`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SymmetryReport {
    pub empty: bool,
    pub malformed: Vec<GroupElement>,
    pub asymmetric: Vec<AsymmetricEntry>,
}

impl SymmetryReport {
    pub fn is_ok(&self) -> bool {
        !self.empty && self.malformed.is_empty() && self.asymmetric.is_empty()
    }
}

impl fmt::Display for SymmetryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.empty {
            return write!(f, "generator multiset is empty");
        }
        let mut parts = Vec::new();
        for x in &self.malformed {
            parts.push(format!("{x} is not a group element"));
        }
        for a in &self.asymmetric {
            parts.push(format!(
                "{} has multiplicity {} but its inverse has {}",
                a.element, a.multiplicity, a.inverse_multiplicity
            ));
        }
        write!(f, "{}", parts.join("; "))
    }
}

/// Reports every element whose inverse has a different multiplicity.
pub fn validate_generators(group: &AbelianGroup, gens: &GeneratorMultiset) -> SymmetryReport {
    let mut report = SymmetryReport {
        empty: gens.is_empty(),
        ..Default::default()
    };
    for (x, m) in gens.iter() {
        if group.check(&x.0).is_err() {
            report.malformed.push(x.clone());
            continue;
        }
        let inv = gens.multiplicity(&group.negate(x));
        if inv != m {
            report.asymmetric.push(AsymmetricEntry {
                element: x.clone(),
                multiplicity: m,
                inverse_multiplicity: inv,
            });
        }
    }
    report
}

pub(crate) fn require_symmetric(group: &AbelianGroup, gens: &GeneratorMultiset) -> Result<()> {
    let report = validate_generators(group, gens);
    if report.is_ok() {
        Ok(())
    } else if report.empty || !report.malformed.is_empty() {
        Err(Error::Validation(report.to_string()))
    } else {
        Err(Error::Asymmetric(report.to_string()))
    }
}

/// Group and generators a graph was built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub group: AbelianGroup,
    pub generators: GeneratorMultiset,
}

/// Undirected multigraph with a dense adjacency matrix.
///
/// A self-loop of multiplicity `m` contributes `m` to the diagonal and `m` to the
/// degree, matching the Cayley convention for identity generators.
#[derive(Clone, Debug)]
pub struct CayleyGraph {
    n: usize,
    adjacency: Vec<u32>,
    degrees: Vec<u64>,
    neighbors: Vec<Vec<(usize, u32)>>,
    provenance: Option<Provenance>,
}

/// Adjacency-level defects found by [`CayleyGraph::structure_issues`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum StructureIssue {
    Asymmetric {
        u: usize,
        v: usize,
        uv: u32,
        vu: u32,
    },
    ZeroDegree {
        v: usize,
    },
    Irregular {
        v: usize,
        degree: u64,
        expected: u64,
    },
}

impl CayleyGraph {
    fn from_adjacency_vec(n: usize, adjacency: Vec<u32>, provenance: Option<Provenance>) -> Self {
        let mut degrees = vec![0u64; n];
        let mut neighbors = vec![Vec::new(); n];
        for u in 0..n {
            for v in 0..n {
                let a = adjacency[u * n + v];
                if a > 0 {
                    degrees[u] += a as u64;
                    neighbors[u].push((v, a));
                }
            }
        }
        Self {
            n,
            adjacency,
            degrees,
            neighbors,
            provenance,
        }
    }

    /// Graph from `(u, v, mult)` triples; `u == v` is a self-loop.
    pub fn from_edges(n: usize, edges: &[(usize, usize, u32)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("graph needs at least one vertex"));
        }
        guard("vertex count", n, MAX_DENSE_VERTICES)?;
        let mut adj = vec![0u32; n * n];
        for &(u, v, m) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u},{v}) out of range for n = {n}"
                )));
            }
            adj[u * n + v] += m;
            if u != v {
                adj[v * n + u] += m;
            }
        }
        Ok(Self::from_adjacency_vec(n, adj, None))
    }

    /// Loads a square adjacency matrix as given. Symmetry is not enforced; use
    /// [`CayleyGraph::structure_issues`] to audit it.
    pub fn from_adjacency_unchecked(rows: &[Vec<u32>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("graph needs at least one vertex"));
        }
        guard("vertex count", n, MAX_DENSE_VERTICES)?;
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("adjacency matrix is not square"));
        }
        Ok(Self::from_adjacency_vec(n, rows.concat(), None))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn adjacency(&self, u: usize, v: usize) -> u32 {
        self.adjacency[u * self.n + v]
    }

    pub fn degree(&self, v: usize) -> u64 {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degrees
    }

    /// Common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<u64> {
        let d = self.degrees[0];
        self.degrees.iter().all(|&x| x == d).then_some(d)
    }

    /// `(neighbor, multiplicity)` pairs, self-loops included.
    pub fn neighbors(&self, u: usize) -> &[(usize, u32)] {
        &self.neighbors[u]
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn total_volume(&self) -> u64 {
        self.degrees.iter().sum()
    }

    /// Undirected edges `(u, v, mult)` with `u <= v`.
    pub fn edges(&self) -> Vec<(usize, usize, u32)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for &(v, m) in &self.neighbors[u] {
                if u <= v {
                    out.push((u, v, m));
                }
            }
        }
        out
    }

    pub fn structure_issues(&self) -> Vec<StructureIssue> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                let (a, b) = (self.adjacency(u, v), self.adjacency(v, u));
                if a != b {
                    out.push(StructureIssue::Asymmetric { u, v, uv: a, vu: b });
                }
            }
            if self.degrees[u] == 0 {
                out.push(StructureIssue::ZeroDegree { v: u });
            }
        }
        if let Some(p) = &self.provenance {
            let d = p.generators.degree() as u64;
            for (v, &deg) in self.degrees.iter().enumerate() {
                if deg != d {
                    out.push(StructureIssue::Irregular {
                        v,
                        degree: deg,
                        expected: d,
                    });
                }
            }
        }
        out
    }

    /// Number of connected components.
    pub fn connectivity(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut components = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &(v, _) in &self.neighbors[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.connectivity() == 1
    }

    pub(crate) fn require_connected(&self) -> Result<()> {
        match self.connectivity() {
            1 => Ok(()),
            components => Err(Error::Disconnected { components }),
        }
    }

    pub(crate) fn require_positive_degrees(&self) -> Result<()> {
        match self.degrees.iter().position(|&d| d == 0) {
            Some(v) => Err(Error::invalid(format!("vertex {v} has degree 0"))),
            None => Ok(()),
        }
    }

    /// Serializable description; Cayley graphs keep their generators.
    pub fn to_spec(&self) -> GraphSpec {
        match &self.provenance {
            Some(p) => GraphSpec::Cayley {
                group: GroupSpec {
                    moduli: p.group.moduli().to_vec(),
                },
                generators: p
                    .generators
                    .iter()
                    .map(|(x, mult)| GeneratorSpec {
                        element: x.0.clone(),
                        mult,
                    })
                    .collect(),
            },
            None => GraphSpec::Explicit {
                n: self.n,
                edges: self.edges(),
            },
        }
    }
}

/// `Cay(G, S)`: vertex `x` is joined to `x + s` with the multiplicity of `s`.
pub fn build_cayley(group: &AbelianGroup, gens: &GeneratorMultiset) -> Result<CayleyGraph> {
    require_symmetric(group, gens)?;
    let n = group.order();
    guard("vertex count", n, MAX_DENSE_VERTICES)?;
    let mut adj = vec![0u32; n * n];
    let gens_vec: Vec<(Vec<usize>, u32)> =
        gens.iter().map(|(x, m)| (x.0.clone(), m as u32)).collect();
    for u in 0..n {
        for (s, m) in &gens_vec {
            let v = group.shift_index(u, s);
            adj[u * n + v] += m;
        }
    }
    Ok(CayleyGraph::from_adjacency_vec(
        n,
        adj,
        Some(Provenance {
            group: group.clone(),
            generators: gens.clone(),
        }),
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub moduli: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub element: Vec<usize>,
    #[serde(default = "one")]
    pub mult: usize,
}

fn one() -> usize {
    1
}

/// On-disk graph description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSpec {
    Cayley {
        group: GroupSpec,
        generators: Vec<GeneratorSpec>,
    },
    Explicit {
        n: usize,
        edges: Vec<(usize, usize, u32)>,
    },
    Matrix {
        adjacency: Vec<Vec<u32>>,
    },
}

impl GraphSpec {
    /// Builds the graph, rejecting asymmetric generators or adjacency.
    pub fn build(&self) -> Result<CayleyGraph> {
        let g = self.build_unchecked()?;
        if let Some(issue) = g
            .structure_issues()
            .into_iter()
            .find(|i| matches!(i, StructureIssue::Asymmetric { .. }))
        {
            return Err(Error::invalid(format!(
                "adjacency is not symmetric: {issue:?}"
            )));
        }
        Ok(g)
    }

    /// Like [`GraphSpec::build`] but keeps a non-symmetric adjacency matrix so
    /// it can be audited.
    pub fn build_unchecked(&self) -> Result<CayleyGraph> {
        match self {
            GraphSpec::Cayley { group, generators } => {
                let g = AbelianGroup::new(group.moduli.clone())?;
                let mut s = GeneratorMultiset::new();
                for gen in generators {
                    s.insert(GroupElement(gen.element.clone()), gen.mult);
                }
                build_cayley(&g, &s)
            }
            GraphSpec::Explicit { n, edges } => CayleyGraph::from_edges(*n, edges),
            GraphSpec::Matrix { adjacency } => CayleyGraph::from_adjacency_unchecked(adjacency),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(v: &[usize]) -> GroupElement {
        GroupElement(v.to_vec())
    }

    #[test]
    fn mixed_radix_last_coordinate_fastest() {
        let g = AbelianGroup::new(vec![4, 2]).unwrap();
        assert_eq!(g.index(&el(&[0, 1])).unwrap(), 1);
        assert_eq!(g.index(&el(&[1, 0])).unwrap(), 2);
        assert_eq!(g.index(&el(&[3, 1])).unwrap(), 7);
        for i in 0..g.order() {
            assert_eq!(g.index(&g.unindex(i).unwrap()).unwrap(), i);
        }
        assert!(g.unindex(8).is_err());
        assert!(g.index(&el(&[4, 0])).is_err());
    }

    #[test]
    fn negation_in_z8() {
        let g = AbelianGroup::cyclic(8).unwrap();
        assert_eq!(g.negate(&el(&[3])), el(&[5]));
        assert_eq!(g.negate(&el(&[0])), el(&[0]));
    }

    #[test]
    fn shift_index_matches_addition() {
        let g = AbelianGroup::new(vec![3, 4, 2]).unwrap();
        for i in 0..g.order() {
            for j in 0..g.order() {
                let x = g.unindex(i).unwrap();
                let s = g.unindex(j).unwrap();
                assert_eq!(g.shift_index(i, &s.0), g.index(&g.add(&x, &s)).unwrap());
            }
        }
    }

    #[test]
    fn asymmetric_generators_are_reported() {
        let g = AbelianGroup::cyclic(5).unwrap();
        let s = GeneratorMultiset::from_entries([(el(&[1]), 1), (el(&[4]), 2)]);
        let r = validate_generators(&g, &s);
        assert_eq!(r.asymmetric.len(), 2);
        assert!(matches!(build_cayley(&g, &s), Err(Error::Asymmetric(_))));
        let empty = validate_generators(&g, &GeneratorMultiset::new());
        assert!(empty.empty && !empty.is_ok());
    }

    #[test]
    fn identity_generator_adds_a_loop() {
        let g = AbelianGroup::cyclic(5).unwrap();
        let s = GeneratorMultiset::from_entries([(el(&[1]), 1), (el(&[4]), 1), (el(&[0]), 1)]);
        let c = build_cayley(&g, &s).unwrap();
        assert_eq!(c.degree(0), 3);
        assert_eq!(c.adjacency(2, 2), 1);
        assert!(c.structure_issues().is_empty());
    }

    #[test]
    fn components_of_even_steps() {
        let g = AbelianGroup::cyclic(4).unwrap();
        let s = GeneratorMultiset::plus_minus(&g, &[el(&[2])]);
        assert_eq!(s.degree(), 1);
        let c = build_cayley(&g, &s).unwrap();
        assert_eq!(c.connectivity(), 2);

        let cyc = build_cayley(&g, &GeneratorMultiset::plus_minus(&g, &[el(&[1])])).unwrap();
        assert_eq!(cyc.connectivity(), 1);
        assert_eq!(cyc.regular_degree(), Some(2));
    }

    #[test]
    fn corrupted_matrix_is_flagged() {
        let rows = vec![vec![0, 1, 1], vec![1, 0, 1], vec![0, 1, 0]];
        let g = CayleyGraph::from_adjacency_unchecked(&rows).unwrap();
        assert!(g
            .structure_issues()
            .iter()
            .any(|i| matches!(i, StructureIssue::Asymmetric { u: 0, v: 2, .. })));
        assert!(GraphSpec::Matrix { adjacency: rows }.build().is_err());
    }
}
