//! Binary linear codes and the Cayley graphs of their generator columns.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{guard, Error, Result};
use crate::group::{build_cayley, AbelianGroup, CayleyGraph, GeneratorMultiset, GroupElement};
use crate::spectral::{character_values, EQ_TOLERANCE};

/// Largest dimension for [`code_to_cayley`] (the graph is stored densely).
pub const MAX_CODE_GRAPH_DIMENSION: usize = 12;
/// Largest dimension for [`min_weight_census`].
pub const MAX_CENSUS_DIMENSION: usize = 20;
/// Largest dimension for [`code_spectrum_check`].
pub const MAX_SPECTRUM_DIMENSION: usize = 16;

const MAX_BLOCK_LENGTH: usize = 128;

/// Full-rank `k x n` generator matrix over GF(2). Row `i` is a bitmask with
/// column `j` at bit `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BinaryLinearCode {
    rows: Vec<u128>,
    block_length: usize,
}

fn gf2_rank(rows: &[u128]) -> usize {
    let mut basis: Vec<u128> = Vec::new();
    for &r in rows {
        let mut x = r;
        for &b in &basis {
            x = x.min(x ^ b);
        }
        if x != 0 {
            basis.push(x);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

impl BinaryLinearCode {
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 {
            return Err(Error::invalid("generator matrix has no rows"));
        }
        let n = rows[0].len();
        if n == 0 || n > MAX_BLOCK_LENGTH {
            return Err(Error::invalid(format!(
                "block length {n} must lie in 1..={MAX_BLOCK_LENGTH}"
            )));
        }
        let mut masks = Vec::with_capacity(k);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            let mut m = 0u128;
            for (j, &b) in row.iter().enumerate() {
                match b {
                    0 => {}
                    1 => m |= 1 << j,
                    _ => {
                        return Err(Error::invalid(format!(
                            "entry ({i}, {j}) = {b} is not a bit"
                        )))
                    }
                }
            }
            masks.push(m);
        }
        let rank = gf2_rank(&masks);
        if rank < k {
            return Err(Error::invalid(format!(
                "generator matrix has rank {rank} < {k}; the code graph would be disconnected"
            )));
        }
        Ok(Self {
            rows: masks,
            block_length: n,
        })
    }

    /// One row per nonblank line; `#` starts a comment, and anything other
    /// than `0`/`1` is ignored, so `1 0 1` and `101` both work.
    pub fn from_text(text: &str) -> Result<Self> {
        let rows: Vec<Vec<u8>> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .map(|l| {
                l.chars()
                    .filter_map(|c| match c {
                        '0' => Some(0),
                        '1' => Some(1),
                        _ => None,
                    })
                    .collect::<Vec<u8>>()
            })
            .filter(|r| !r.is_empty())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(k: usize) -> Result<Self> {
        let rows: Vec<Vec<u8>> = (0..k)
            .map(|i| (0..k).map(|j| (i == j) as u8).collect())
            .collect();
        Self::from_rows(&rows)
    }

    /// `[n, 1]` repetition code.
    pub fn repetition(n: usize) -> Result<Self> {
        Self::from_rows(&[vec![1; n]])
    }

    /// `[k + 1, k]` even-weight code: `I_k` plus an all-ones column.
    pub fn parity(k: usize) -> Result<Self> {
        let rows: Vec<Vec<u8>> = (0..k)
            .map(|i| {
                let mut r: Vec<u8> = (0..k).map(|j| (i == j) as u8).collect();
                r.push(1);
                r
            })
            .collect();
        Self::from_rows(&rows)
    }

    /// Systematic `[7, 4]` Hamming code.
    pub fn hamming_7_4() -> Self {
        Self::from_text("1000110\n0100101\n0010011\n0001111").expect("full rank")
    }

    /// Uniform full-rank `k x n` matrix (rejection sampled).
    pub fn random(k: usize, n: usize, seed: u64) -> Result<Self> {
        if k == 0 || n < k || n > MAX_BLOCK_LENGTH {
            return Err(Error::invalid(format!(
                "need 1 <= k <= n <= {MAX_BLOCK_LENGTH}, got k = {k}, n = {n}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let rows: Vec<Vec<u8>> = (0..k)
                .map(|_| (0..n).map(|_| rng.random_range(0..2u8)).collect())
                .collect();
            if let Ok(c) = Self::from_rows(&rows) {
                return Ok(c);
            }
        }
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|&r| {
                (0..self.block_length)
                    .map(|j| ((r >> j) & 1) as u8)
                    .collect()
            })
            .collect()
    }

    /// Column `j` as an element of `Z_2^k`.
    pub fn column(&self, j: usize) -> GroupElement {
        GroupElement(self.rows.iter().map(|&r| ((r >> j) & 1) as usize).collect())
    }

    /// Codeword `x G` for the message with bit `i` of `message` on row `i`.
    pub fn codeword(&self, message: u64) -> u128 {
        let mut c = 0;
        for (i, &r) in self.rows.iter().enumerate() {
            if (message >> i) & 1 == 1 {
                c ^= r;
            }
        }
        c
    }

    /// Generator columns as a multiset of `Z_2^k`.
    pub fn generators(&self) -> GeneratorMultiset {
        let mut s = GeneratorMultiset::new();
        for j in 0..self.block_length {
            s.insert(self.column(j), 1);
        }
        s
    }

    pub fn group(&self) -> AbelianGroup {
        AbelianGroup::boolean_cube(self.dimension()).expect("k >= 1")
    }
}

/// `Cay(Z_2^k, columns of G)`: `2^k` vertices, degree = block length.
pub fn code_to_cayley(code: &BinaryLinearCode) -> Result<CayleyGraph> {
    guard("code dimension", code.dimension(), MAX_CODE_GRAPH_DIMENSION)?;
    build_cayley(&code.group(), &code.generators())
}

/// Minimum nonzero codeword weight and the number of codewords attaining it.
pub fn min_weight_census(code: &BinaryLinearCode) -> Result<(usize, u64)> {
    let k = code.dimension();
    guard("code dimension", k, MAX_CENSUS_DIMENSION)?;
    let mut word = 0u128;
    let mut best = (usize::MAX, 0u64);
    // Gray code: step i flips the lowest set bit of i.
    for i in 1u64..(1 << k) {
        word ^= code.rows[i.trailing_zeros() as usize];
        let w = word.count_ones() as usize;
        if w < best.0 {
            best = (w, 1);
        } else if w == best.0 {
            best.1 += 1;
        }
    }
    Ok(best)
}

/// Exact comparison of `lambda_2 / 2` with the relative distance and of the
/// multiplicity of `lambda_2` with the minimum-weight census.
#[derive(Clone, Debug, Serialize)]
pub struct CodeSpectrumReport {
    pub dimension: usize,
    pub block_length: usize,
    pub distance: usize,
    pub census_count: u64,
    /// `lambda_2 = lambda2_num / block_length`, from integer character sums.
    pub lambda2_num: u64,
    pub lambda2: f64,
    pub multiplicity: u64,
    /// Multiplicity of the smallest nonzero eigenvalue of the float spectrum.
    pub float_multiplicity: u64,
    /// Largest gap between the integer and the floating-point eigenvalues.
    pub float_max_deviation: f64,
    pub distance_matches: bool,
    pub multiplicity_matches: bool,
}

impl CodeSpectrumReport {
    pub fn holds(&self) -> bool {
        self.distance_matches
            && self.multiplicity_matches
            && self.float_multiplicity == self.multiplicity
            && self.float_max_deviation <= 1e-9
    }
}

pub fn code_spectrum_check(code: &BinaryLinearCode) -> Result<CodeSpectrumReport> {
    let k = code.dimension();
    guard("code dimension", k, MAX_SPECTRUM_DIMENSION)?;
    let n = code.block_length;
    let (distance, census_count) = min_weight_census(code)?;
    let group = code.group();
    let columns: Vec<Vec<usize>> = (0..n).map(|j| code.column(j).0).collect();
    let floats = character_values(&group, &code.generators())?;
    // lambda_g = (n - sum_j (-1)^{<g, s_j>}) / n, kept as the integer numerator.
    let mut nums = Vec::with_capacity(floats.len());
    let mut deviation = 0.0f64;
    for (i, &f) in floats.iter().enumerate() {
        let g = group.unindex_unchecked(i);
        let odd = columns
            .iter()
            .filter(|s| g.iter().zip(s.iter()).map(|(a, b)| a * b).sum::<usize>() % 2 == 1)
            .count() as i64;
        let sum = n as i64 - 2 * odd;
        let num = (n as i64 - sum) as u64;
        deviation = deviation.max((f - num as f64 / n as f64).abs());
        nums.push(num);
    }
    let lambda2_num = nums[1..].iter().copied().min().expect("k >= 1");
    let multiplicity = nums[1..].iter().filter(|&&x| x == lambda2_num).count() as u64;
    let mut sorted = floats[1..].to_vec();
    sorted.sort_by(f64::total_cmp);
    let float_multiplicity = sorted
        .iter()
        .filter(|&&x| x - sorted[0] <= EQ_TOLERANCE)
        .count() as u64;
    Ok(CodeSpectrumReport {
        dimension: k,
        block_length: n,
        distance,
        census_count,
        lambda2_num,
        lambda2: lambda2_num as f64 / n as f64,
        multiplicity,
        float_multiplicity,
        float_max_deviation: deviation,
        // lambda_2 / 2 = distance / n  <=>  lambda2_num = 2 distance
        distance_matches: lambda2_num == 2 * distance as u64,
        multiplicity_matches: multiplicity == census_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn identity_code_graph_is_the_hypercube() {
        let g = code_to_cayley(&BinaryLinearCode::identity(3).unwrap()).unwrap();
        let q = corpus::hypercube(3).unwrap();
        for u in 0..8 {
            for v in 0..8 {
                assert_eq!(g.adjacency(u, v), q.adjacency(u, v));
            }
        }
        let c4 = code_to_cayley(&BinaryLinearCode::identity(2).unwrap()).unwrap();
        assert_eq!(c4.regular_degree(), Some(2));
        assert!(c4.is_connected());
    }

    #[test]
    fn hamming_graph_shape() {
        let g = code_to_cayley(&BinaryLinearCode::hamming_7_4()).unwrap();
        assert_eq!(g.n(), 16);
        assert_eq!(g.regular_degree(), Some(7));
    }

    #[test]
    fn censuses() {
        assert_eq!(
            min_weight_census(&BinaryLinearCode::identity(5).unwrap()).unwrap(),
            (1, 5)
        );
        assert_eq!(
            min_weight_census(&BinaryLinearCode::hamming_7_4()).unwrap(),
            (3, 7)
        );
        assert_eq!(
            min_weight_census(&BinaryLinearCode::repetition(6).unwrap()).unwrap(),
            (6, 1)
        );
        assert_eq!(
            min_weight_census(&BinaryLinearCode::parity(4).unwrap()).unwrap(),
            (2, 10)
        );
    }

    #[test]
    fn spectrum_matches_code() {
        let r = code_spectrum_check(&BinaryLinearCode::identity(3).unwrap()).unwrap();
        assert_eq!((r.lambda2_num, r.block_length, r.multiplicity), (2, 3, 3));
        assert!(r.holds());
        let h = code_spectrum_check(&BinaryLinearCode::hamming_7_4()).unwrap();
        assert_eq!((h.lambda2_num, h.multiplicity), (6, 7));
        assert!(h.holds());
        let rep = code_spectrum_check(&BinaryLinearCode::repetition(3).unwrap()).unwrap();
        assert_eq!(rep.lambda2, 2.0);
        assert!(rep.holds());
    }

    #[test]
    fn rank_deficiency_is_rejected() {
        assert!(BinaryLinearCode::from_text("110\n110").is_err());
        assert!(BinaryLinearCode::from_rows(&[vec![1, 0], vec![1]]).is_err());
        let c = BinaryLinearCode::random(6, 10, 3).unwrap();
        assert_eq!(c.dimension(), 6);
        assert_eq!(BinaryLinearCode::from_rows(&c.rows()).unwrap(), c);
    }
}
