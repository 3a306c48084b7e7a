//! Standard Cayley graph families.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{build_cayley, AbelianGroup, CayleyGraph, GeneratorMultiset, GroupElement};

/// A graph with a display name.
#[derive(Clone, Debug)]
pub struct NamedGraph {
    pub name: String,
    pub graph: CayleyGraph,
}

fn unit(rank: usize, j: usize) -> GroupElement {
    let mut v = vec![0; rank];
    v[j] = 1;
    GroupElement(v)
}

/// `C_n = Cay(Z_n, {+-1})`.
pub fn cycle(n: usize) -> Result<CayleyGraph> {
    if n < 3 {
        return Err(Error::invalid("cycle needs n >= 3"));
    }
    circulant(n, &[1])
}

/// `Cay(Z_n, {+-s : s in steps})`.
pub fn circulant(n: usize, steps: &[usize]) -> Result<CayleyGraph> {
    let g = AbelianGroup::cyclic(n)?;
    let gens: Vec<GroupElement> = steps.iter().map(|&s| GroupElement(vec![s % n])).collect();
    build_cayley(&g, &GeneratorMultiset::plus_minus(&g, &gens))
}

/// `Q_k = Cay(Z_2^k, {e_1, ..., e_k})`.
pub fn hypercube(k: usize) -> Result<CayleyGraph> {
    torus(&vec![2; k])
}

/// `Cay(Z_{m_1} x ... x Z_{m_r}, {+-e_j})`.
pub fn torus(dims: &[usize]) -> Result<CayleyGraph> {
    let g = AbelianGroup::new(dims.to_vec())?;
    let gens: Vec<GroupElement> = (0..g.rank()).map(|j| unit(g.rank(), j)).collect();
    build_cayley(&g, &GeneratorMultiset::plus_minus(&g, &gens))
}

/// `K_n = Cay(Z_n, Z_n \ {0})`.
pub fn complete(n: usize) -> Result<CayleyGraph> {
    let steps: Vec<usize> = (1..=n / 2).collect();
    circulant(n, &steps)
}

/// Random symmetric generator multiset of total degree `degree`, drawn from the
/// non-identity elements. Odd degree needs a self-inverse element.
pub fn random_generators(
    group: &AbelianGroup,
    degree: usize,
    seed: u64,
) -> Result<GeneratorMultiset> {
    let n = group.order();
    if n < 2 || degree == 0 {
        return Err(Error::invalid(
            "need a nontrivial group and positive degree",
        ));
    }
    let elems: Vec<GroupElement> = group.elements().skip(1).collect();
    let involutions: Vec<&GroupElement> = elems.iter().filter(|x| group.negate(x) == **x).collect();
    if degree % 2 == 1 && involutions.is_empty() {
        return Err(Error::invalid(format!(
            "odd degree {degree} needs an element of order 2"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GeneratorMultiset::new();
    let mut d = 0;
    // an involution contributes one edge, any other element two (x and -x)
    while d < degree {
        let x = if degree - d == 1 {
            *involutions.choose(&mut rng).unwrap()
        } else {
            elems.choose(&mut rng).unwrap()
        };
        let neg = group.negate(x);
        if neg == *x {
            out.insert(x.clone(), 1);
            d += 1;
        } else {
            out.insert(x.clone(), 1);
            out.insert(neg, 1);
            d += 2;
        }
    }
    Ok(out)
}

pub fn random_cayley(moduli: &[usize], degree: usize, seed: u64) -> Result<CayleyGraph> {
    let g = AbelianGroup::new(moduli.to_vec())?;
    let s = random_generators(&g, degree, seed)?;
    build_cayley(&g, &s)
}

/// First seed from `seed` on (at most 256 tries) whose random generators
/// give a connected graph; returns the graph and the seed used.
pub fn random_connected_cayley(
    moduli: &[usize],
    degree: usize,
    seed: u64,
) -> Result<(CayleyGraph, u64)> {
    for s in seed..seed + 256 {
        let g = random_cayley(moduli, degree, s)?;
        if g.is_connected() {
            return Ok((g, s));
        }
    }
    Err(Error::invalid(format!(
        "no connected degree-{degree} graph over {moduli:?} in 256 seeds from {seed}"
    )))
}

fn named(name: impl Into<String>, graph: Result<CayleyGraph>) -> Result<NamedGraph> {
    Ok(NamedGraph {
        name: name.into(),
        graph: graph?,
    })
}

/// Cayley graphs on at most 512 vertices over cyclic, Boolean and mixed groups.
pub fn default_corpus() -> Result<Vec<NamedGraph>> {
    let mut out = Vec::new();
    for n in [5, 8, 12, 16, 31, 64, 100, 256, 512] {
        out.push(named(format!("C_{n}"), cycle(n))?);
    }
    for (n, steps) in [
        (13, vec![1, 5]),
        (20, vec![1, 4, 10]),
        (60, vec![1, 7]),
        (128, vec![3, 11, 40]),
    ] {
        let name = format!(
            "Circ_{n}_{}",
            steps
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join("_")
        );
        out.push(named(name, circulant(n, &steps))?);
    }
    for k in 1..=9 {
        out.push(named(format!("Q_{k}"), hypercube(k))?);
    }
    for dims in [
        vec![4, 4],
        vec![3, 5],
        vec![8, 8],
        vec![4, 2, 6],
        vec![16, 32],
        vec![3, 3, 3],
    ] {
        let name = format!(
            "T_{}",
            dims.iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("x")
        );
        out.push(named(name, torus(&dims))?);
    }
    for (moduli, d, seed) in [
        (vec![24], 5, 1u64),
        (vec![2, 2, 2, 2, 2, 2], 7, 2),
        (vec![6, 10], 6, 3),
        (vec![3, 4, 5], 4, 4),
        (vec![2, 4, 8], 6, 5),
        (vec![7, 7], 8, 6),
        (vec![2, 256], 5, 7),
    ] {
        let (g, seed) = random_connected_cayley(&moduli, d, seed)?;
        let name = format!(
            "R_{}_d{d}_s{seed}",
            moduli
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("x")
        );
        out.push(named(name, Ok(g))?);
    }
    out.push(named("K_7", complete(7))?);
    Ok(out)
}

/// Connected Cayley graphs on at most 16 vertices.
pub fn small_corpus() -> Result<Vec<NamedGraph>> {
    let mut out = Vec::new();
    for n in [4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16] {
        out.push(named(format!("C_{n}"), cycle(n))?);
    }
    for k in 2..=4 {
        out.push(named(format!("Q_{k}"), hypercube(k))?);
    }
    for dims in [
        vec![3, 3],
        vec![4, 4],
        vec![2, 6],
        vec![3, 4],
        vec![2, 2, 4],
    ] {
        let name = format!(
            "T_{}",
            dims.iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("x")
        );
        out.push(named(name, torus(&dims))?);
    }
    for (n, steps) in [
        (10, vec![1, 3]),
        (12, vec![1, 5]),
        (16, vec![1, 4]),
        (13, vec![1, 5]),
    ] {
        out.push(named(
            format!("Circ_{n}_{}_{}", steps[0], steps[1]),
            circulant(n, &steps),
        )?);
    }
    for (moduli, d, seed) in [
        (vec![12], 3, 11u64),
        (vec![2, 2, 2, 2], 5, 12),
        (vec![4, 4], 4, 13),
        (vec![2, 6], 4, 14),
    ] {
        let g = random_cayley(&moduli, d, seed)?;
        if g.is_connected() {
            let name = format!(
                "R_{}_d{d}_s{seed}",
                moduli
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join("x")
            );
            out.push(NamedGraph { name, graph: g });
        }
    }
    out.push(named("K_6", complete(6))?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_have_expected_degrees() {
        assert_eq!(cycle(8).unwrap().regular_degree(), Some(2));
        assert_eq!(hypercube(3).unwrap().regular_degree(), Some(3));
        assert_eq!(torus(&[4, 4]).unwrap().regular_degree(), Some(4));
        assert_eq!(complete(6).unwrap().regular_degree(), Some(5));
        assert_eq!(complete(7).unwrap().regular_degree(), Some(6));
    }

    #[test]
    fn random_generators_hit_the_degree() {
        let g = AbelianGroup::new(vec![24]).unwrap();
        for seed in 0..20 {
            let s = random_generators(&g, 5, seed).unwrap();
            assert_eq!(s.degree(), 5);
            assert!(crate::group::validate_generators(&g, &s).is_ok());
        }
        let odd = AbelianGroup::cyclic(9).unwrap();
        assert!(random_generators(&odd, 3, 0).is_err());
    }

    #[test]
    fn default_corpus_is_large_enough() {
        let c = default_corpus().unwrap();
        assert!(c.len() >= 30);
        assert!(c.iter().all(|g| g.graph.n() <= 512));
    }
}
