//! Fourier coefficients of a vertex set of the cycle `C_n` against the
//! characters `x -> e^{2 pi i a x / n}`.

use serde::Serialize;

use crate::error::{guard, Error, Result};
use crate::spectral::{cos_2pi, sin_2pi, EQ_TOLERANCE, MAX_CHARACTER_ORDER};

/// Nontrivial mass carried by frequencies `min(a, n - a) > cutoff`.
#[derive(Clone, Debug, Serialize)]
pub struct TailMass {
    pub eps: f64,
    /// `ceil(1/eps)`.
    pub cutoff: usize,
    /// Fraction of the nontrivial mass beyond `cutoff`.
    pub mass: f64,
    /// `eps/20 <= mass <= 20 eps`.
    pub in_range: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FourierProfile {
    pub n: usize,
    pub size: usize,
    /// `|q_a|^2` for `a = 0..n`, `q_a = (1/n) sum_{x in Q} e^{2 pi i a x / n}`.
    pub coefficients: Vec<f64>,
    pub is_arc: bool,
    /// An arc with `|Q| = n/2` and `4 | n`.
    pub is_bisection: bool,
    /// Largest `|q_a|^2` over even `a != 0` (bisections only).
    pub even_max: Option<f64>,
    /// Range of `a'^2 |q_a|^2 / |q_1|^2` over odd `a`, `a' = min(a, n - a)`.
    pub odd_window: Option<(f64, f64)>,
    pub tails: Vec<TailMass>,
    /// `phi(C_n) = 1 / floor(n/2)`.
    pub phi: f64,
    /// Number of Laplacian eigenvalues of `C_n` at most `phi`.
    pub mul_phi: usize,
    pub sqrt_n: f64,
}

impl FourierProfile {
    pub fn even_ok(&self) -> Option<bool> {
        self.even_max.map(|m| m < 1e-12)
    }

    pub fn odd_ok(&self) -> Option<bool> {
        self.odd_window.map(|(lo, hi)| lo >= 0.25 && hi <= 4.0)
    }

    pub fn tails_ok(&self) -> Option<bool> {
        self.is_bisection
            .then(|| self.tails.iter().all(|t| t.in_range))
    }

    /// `mul_phi` within a factor 4 of `sqrt(n)`.
    pub fn mul_ok(&self) -> bool {
        let m = self.mul_phi as f64;
        m <= 4.0 * self.sqrt_n && self.sqrt_n <= 4.0 * m
    }
}

fn is_arc(members: &[bool]) -> bool {
    let n = members.len();
    let size = members.iter().filter(|&&b| b).count();
    if size == 0 || size == n {
        return false;
    }
    // exactly one place where membership switches on going around the cycle
    (0..n)
        .filter(|&x| members[x] && !members[(x + n - 1) % n])
        .count()
        == 1
}

/// Profile of `Q` (residues taken mod `n`) with tail masses for each `eps`.
/// The bisection checks are only filled in when `Q` is an arc.
pub fn cycle_fourier_profile(n: usize, q: &[i64], eps: &[f64]) -> Result<FourierProfile> {
    if n < 3 {
        return Err(Error::invalid("cycle needs n >= 3"));
    }
    guard("cycle length", n, MAX_CHARACTER_ORDER)?;
    if eps.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::invalid("tail eps must lie in (0, 1]"));
    }
    let mut members = vec![false; n];
    for &x in q {
        members[x.rem_euclid(n as i64) as usize] = true;
    }
    let xs: Vec<u64> = (0..n).filter(|&x| members[x]).map(|x| x as u64).collect();
    let nn = n as u64;
    let coefficients: Vec<f64> = (0..nn)
        .map(|a| {
            let (mut re, mut im) = (0.0, 0.0);
            for &x in &xs {
                let k = (a * x) % nn;
                re += cos_2pi(k, nn);
                im += sin_2pi(k, nn);
            }
            (re * re + im * im) / (nn * nn) as f64
        })
        .collect();
    let arc = is_arc(&members);
    let bisection = arc && n.is_multiple_of(4) && 2 * xs.len() == n;
    let fold = |a: usize| a.min(n - a);
    let nontrivial: f64 = coefficients[1..].iter().sum();
    let (even_max, odd_window) = if bisection {
        let even = (2..n)
            .step_by(2)
            .map(|a| coefficients[a])
            .fold(0.0, f64::max);
        let q1 = coefficients[1];
        let (lo, hi) = (1..n)
            .step_by(2)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), a| {
                let r = (fold(a) * fold(a)) as f64 * coefficients[a] / q1;
                (lo.min(r), hi.max(r))
            });
        (Some(even), Some((lo, hi)))
    } else {
        (None, None)
    };
    let tails = eps
        .iter()
        .map(|&e| {
            let cutoff = (1.0 / e).ceil() as usize;
            let beyond: f64 = (1..n)
                .filter(|&a| fold(a) > cutoff)
                .fold(0.0, |s, a| s + coefficients[a]);
            let mass = if nontrivial > 0.0 {
                beyond / nontrivial
            } else {
                0.0
            };
            TailMass {
                eps: e,
                cutoff,
                mass,
                in_range: mass >= e / 20.0 && mass <= 20.0 * e,
            }
        })
        .collect();
    let phi = 1.0 / (n / 2) as f64;
    let mul_phi = (0..nn)
        .filter(|&a| 1.0 - cos_2pi(a, nn) <= phi + EQ_TOLERANCE)
        .count();
    Ok(FourierProfile {
        n,
        size: xs.len(),
        coefficients,
        is_arc: arc,
        is_bisection: bisection,
        even_max,
        odd_window,
        tails,
        phi,
        mul_phi,
        sqrt_n: (n as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c8_bisection() {
        let p = cycle_fourier_profile(8, &[-2, -1, 0, 1], &[0.2]).unwrap();
        assert!(p.is_bisection);
        assert!(p.coefficients[2] < 1e-30);
        assert_eq!(p.even_ok(), Some(true));
        assert_eq!(p.odd_ok(), Some(true));
        let cot2 = (1.0 / (std::f64::consts::PI / 8.0).tan()).powi(2);
        assert!((p.coefficients[1] / p.coefficients[3] - cot2).abs() < 1e-9);
        // nontrivial mass of a half set is 1/2 - 1/4
        assert!((p.coefficients[1..].iter().sum::<f64>() - 0.25).abs() < 1e-12);
        assert_eq!(p.mul_phi, 1);
    }

    #[test]
    fn whole_cycle_has_no_nontrivial_mass() {
        let all: Vec<i64> = (0..10).collect();
        let p = cycle_fourier_profile(10, &all, &[0.1]).unwrap();
        assert!(!p.is_arc);
        assert!(p.coefficients[1..].iter().all(|&c| c < 1e-30));
        assert!(p.odd_window.is_none());
    }

    #[test]
    fn arcs_are_detected() {
        let p = cycle_fourier_profile(12, &[10, 11, 0, 1], &[]).unwrap();
        assert!(p.is_arc && !p.is_bisection);
        let p = cycle_fourier_profile(12, &[0, 2], &[]).unwrap();
        assert!(!p.is_arc);
    }

    #[test]
    fn tail_mass_on_a_long_cycle() {
        let q: Vec<i64> = (0..64).collect();
        let p = cycle_fourier_profile(128, &q, &[0.1]).unwrap();
        let t = &p.tails[0];
        assert_eq!(t.cutoff, 10);
        assert!(t.in_range, "tail mass {}", t.mass);
        assert!(p.mul_ok());
    }
}
