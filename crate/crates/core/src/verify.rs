//! Invariant suites over a graph corpus, collected into one report.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::NamedGraph;
use crate::cuts::{
    brute_force_sparsest, conductance, conductance_sparsity_sandwich, fiedler_cut,
    rayleigh_consistency, Cut, Objective,
};
use crate::group::{build_cayley, AbelianGroup, CayleyGraph, GeneratorMultiset, GroupElement};
use crate::pipeline::{containment_check, MAX_ENUMERATION_VERTICES};
use crate::special::{code_spectrum_check, cycle_fourier_profile, zpn_approx, BinaryLinearCode};
use crate::spectral::{
    dense_spectrum, multiset_distance, normalized_laplacian, spectrum_of, Spectrum,
};
use crate::walks::{
    buser_check, cp_ratio_bound_check, multiplicity_certificate, power_conductance_materialized,
};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Structure,
    Spectral,
    Collision,
    CpRatio,
    Multiplicity,
    Cheeger,
    Buser,
    Containment,
    Zpn,
    Codes,
    Cycle,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Structure,
        Suite::Spectral,
        Suite::Collision,
        Suite::CpRatio,
        Suite::Multiplicity,
        Suite::Cheeger,
        Suite::Buser,
        Suite::Containment,
        Suite::Zpn,
        Suite::Codes,
        Suite::Cycle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Structure => "structure",
            Suite::Spectral => "spectral",
            Suite::Collision => "collision",
            Suite::CpRatio => "cp-ratio",
            Suite::Multiplicity => "multiplicity",
            Suite::Cheeger => "cheeger",
            Suite::Buser => "buser",
            Suite::Containment => "containment",
            Suite::Zpn => "zpn",
            Suite::Codes => "codes",
            Suite::Cycle => "cycle",
        }
    }

    pub fn parse(s: &str) -> Option<Suite> {
        Suite::ALL.into_iter().find(|x| x.name() == s)
    }

    /// Suites that run on built-in instances rather than the corpus.
    pub fn is_standalone(self) -> bool {
        matches!(self, Suite::Zpn | Suite::Codes | Suite::Cycle)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub target: String,
    pub status: Status,
    pub detail: String,
}

impl Check {
    fn new(suite: Suite, target: &str, ok: bool, detail: impl Into<String>) -> Self {
        Self {
            suite,
            target: target.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        }
    }

    fn skip(suite: Suite, target: &str, detail: impl Into<String>) -> Self {
        Self {
            suite,
            target: target.to_string(),
            status: Status::Skip,
            detail: detail.into(),
        }
    }

    fn error(suite: Suite, target: &str, e: crate::Error) -> Self {
        Self::new(suite, target, false, format!("error: {e}"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub failures: usize,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyOptions {
    pub t_max: u32,
    /// Every cut is checked up to this many vertices.
    pub exhaustive_limit: usize,
    /// Random cuts per graph above the exhaustive limit.
    pub random_cuts: usize,
    pub buser_steps: Vec<u32>,
    /// Sampled cuts per graph for the materialized power-graph comparison.
    pub materialized_cuts: usize,
    pub materialized_limit: usize,
    pub containment_eps: Vec<f64>,
    pub containment_limit: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            t_max: 64,
            exhaustive_limit: 14,
            random_cuts: 1000,
            buser_steps: vec![1, 2, 4, 8],
            materialized_cuts: 8,
            materialized_limit: 64,
            containment_eps: vec![0.25, 0.5],
            containment_limit: 16,
            tolerance: 1e-9,
            seed: 0,
        }
    }
}

fn random_cut(rng: &mut ChaCha8Rng, n: usize) -> Cut {
    loop {
        let p: f64 = rng.random_range(0.05..0.95);
        let c = Cut::from_members((0..n).map(|_| rng.random_bool(p)).collect());
        if c.is_proper() {
            return c;
        }
    }
}

/// All proper cuts when `n <= limit`, otherwise `count` random ones.
fn cut_family(n: usize, limit: usize, count: usize, seed: u64) -> Vec<Cut> {
    if n <= limit {
        (1..(1u64 << n) - 1).map(|m| Cut::from_mask(n, m)).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| random_cut(&mut rng, n)).collect()
    }
}

fn name_seed(seed: u64, name: &str) -> u64 {
    name.bytes().fold(seed ^ 0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    })
}

fn structure(name: &str, g: &CayleyGraph) -> Check {
    let issues = g.structure_issues();
    let comps = g.connectivity();
    let ok = issues.is_empty();
    let detail = if ok {
        format!("symmetric, {comps} component(s)")
    } else {
        format!(
            "{} issue(s), first {:?}",
            issues.len(),
            issues.iter().take(3).collect::<Vec<_>>()
        )
    };
    Check::new(Suite::Structure, name, ok, detail)
}

fn spectral(name: &str, g: &CayleyGraph) -> Check {
    let run = || -> Result<Check> {
        let dense = dense_spectrum(g)?;
        if g.provenance().is_some() {
            let chars = spectrum_of(g)?;
            let dist = multiset_distance(chars.eigenvalues(), dense.eigenvalues());
            Ok(Check::new(
                Suite::Spectral,
                name,
                dist <= 1e-8,
                format!("character vs dense eigenvalues: max gap {dist:.2e}"),
            ))
        } else {
            let (res, orth) = dense.residuals(&normalized_laplacian(g)?);
            Ok(Check::new(
                Suite::Spectral,
                name,
                res <= 1e-8 && orth <= 1e-8,
                format!("dense eigenpairs: residual {res:.2e}, orthogonality {orth:.2e}"),
            ))
        }
    };
    run().unwrap_or_else(|e| Check::error(Suite::Spectral, name, e))
}

fn walks(name: &str, g: &CayleyGraph, opts: &VerifyOptions, suites: &[Suite]) -> Vec<Check> {
    let mut out = Vec::new();
    let want_c = suites.contains(&Suite::Collision);
    let want_r = suites.contains(&Suite::CpRatio);
    if !want_c && !want_r {
        return out;
    }
    if g.provenance().is_none() || g.regular_degree().is_none() {
        for s in [Suite::Collision, Suite::CpRatio] {
            if suites.contains(&s) {
                out.push(Check::skip(s, name, "needs a regular Cayley graph"));
            }
        }
        return out;
    }
    match cp_ratio_bound_check(g, opts.t_max) {
        Ok(r) => {
            if want_c {
                out.push(Check::new(
                    Suite::Collision,
                    name,
                    r.max_spectral_direct_gap <= 1e-10,
                    format!(
                        "t <= {}: max |spectral - direct| = {:.2e}",
                        opts.t_max, r.max_spectral_direct_gap
                    ),
                ));
            }
            if want_r {
                out.push(Check::new(
                    Suite::CpRatio,
                    name,
                    r.holds(),
                    format!(
                        "worst ln(CP_t/CP_2t) - 4d ln(2e) = {:.3}",
                        r.worst_log_excess
                    ),
                ));
            }
        }
        Err(e) => {
            for s in [Suite::Collision, Suite::CpRatio] {
                if suites.contains(&s) {
                    out.push(Check::new(s, name, false, format!("error: {e}")));
                }
            }
        }
    }
    out
}

fn multiplicity(name: &str, g: &CayleyGraph, spectrum: &Spectrum) -> Check {
    if g.provenance().is_none() || g.regular_degree().is_none() {
        return Check::skip(Suite::Multiplicity, name, "needs a regular Cayley graph");
    }
    let l2 = spectrum.lambda2();
    let mut taus = vec![l2, 2.0 * l2, (4.0 * l2).min(1.5)];
    taus.retain(|&t| t >= l2 && t <= 1.5);
    taus.dedup();
    if taus.is_empty() {
        return Check::skip(
            Suite::Multiplicity,
            name,
            format!("lambda_2 = {l2:.3} > 3/2"),
        );
    }
    let mut bad = Vec::new();
    let mut details = Vec::new();
    for &tau in &taus {
        match multiplicity_certificate(g, tau) {
            Ok(c) => {
                details.push(format!(
                    "tau {:.3}: dim {} ratio {:.3e}",
                    c.tau, c.dim, c.ratio
                ));
                if !c.holds() {
                    bad.push(format!("tau {:.3}", c.tau));
                }
            }
            Err(e) => bad.push(format!("tau {tau:.3}: {e}")),
        }
    }
    let ok = bad.is_empty();
    Check::new(
        Suite::Multiplicity,
        name,
        ok,
        if ok {
            details.join("; ")
        } else {
            format!("violations: {}", bad.join(", "))
        },
    )
}

fn cheeger(name: &str, g: &CayleyGraph, spectrum: &Spectrum, opts: &VerifyOptions) -> Check {
    let run = || -> Result<Check> {
        let n = g.n();
        let tol = opts.tolerance;
        let lap: DMatrix<f64> = normalized_laplacian(g)?;
        let l2 = spectrum.lambda2();
        let regular = g.regular_degree().is_some();
        let total = g.total_volume();
        let cuts = cut_family(
            n,
            opts.exhaustive_limit,
            opts.random_cuts,
            name_seed(opts.seed, name),
        );
        let (mut rayleigh, mut sandwich, mut lower) = (0.0f64, 0usize, 0usize);
        for c in &cuts {
            rayleigh = rayleigh.max(rayleigh_consistency(g, &lap, c)?.max_deviation());
            if regular && 2 * c.size() <= n {
                let (a, b, cc) = conductance_sparsity_sandwich(g, c)?;
                if a > b + tol || b > cc + tol {
                    sandwich += 1;
                }
            }
            let vol: u64 = c.vertices().iter().map(|&v| g.degree(v)).sum();
            if 2 * vol <= total && conductance(g, c)? < l2 / 2.0 - tol {
                lower += 1;
            }
        }
        let (phi, how) = if n <= opts.exhaustive_limit {
            (
                brute_force_sparsest(g, Objective::Conductance)?.value,
                "exhaustive",
            )
        } else {
            (fiedler_cut(g, spectrum)?.value, "fiedler")
        };
        let upper_ok = phi <= (2.0 * l2).sqrt() + tol;
        let lower_ok = how == "fiedler" || phi >= l2 / 2.0 - tol;
        let ok = rayleigh <= tol && sandwich == 0 && lower == 0 && upper_ok && lower_ok;
        Ok(Check::new(
            Suite::Cheeger,
            name,
            ok,
            format!(
                "{} cuts: rayleigh gap {rayleigh:.2e}, sandwich violations {sandwich}, cuts below lambda_2/2 {lower}; {how} phi {phi:.4} in [{:.4}, {:.4}]",
                cuts.len(),
                l2 / 2.0,
                (2.0 * l2).sqrt()
            ),
        ))
    };
    run().unwrap_or_else(|e| Check::error(Suite::Cheeger, name, e))
}

fn buser(name: &str, g: &CayleyGraph, spectrum: &Spectrum, opts: &VerifyOptions) -> Check {
    if g.regular_degree().is_none() {
        return Check::skip(Suite::Buser, name, "needs a regular graph");
    }
    let run = || -> Result<Check> {
        let n = g.n();
        let tol = opts.tolerance;
        let seed = name_seed(opts.seed, name);
        let cuts = cut_family(n, opts.exhaustive_limit, opts.random_cuts.min(100), seed);
        let mut violations = 0;
        let mut worst = f64::NEG_INFINITY;
        for c in &cuts {
            for &t in &opts.buser_steps {
                let r = buser_check(g, spectrum, c, t)?;
                worst = worst.max(r.lhs - r.rhs);
                if !r.holds(tol) {
                    violations += 1;
                }
            }
        }
        let mut gap = 0.0f64;
        let mut compared = 0;
        if n <= opts.materialized_limit {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
            for _ in 0..opts.materialized_cuts {
                let c = random_cut(&mut rng, n);
                for &t in &opts.buser_steps {
                    let spec = buser_check(g, spectrum, &c, t)?.lhs;
                    let mat = power_conductance_materialized(g, &c, t)?;
                    gap = gap.max((spec - mat).abs());
                    compared += 1;
                }
            }
        }
        Ok(Check::new(
            Suite::Buser,
            name,
            violations == 0 && gap <= tol,
            format!(
                "{} cuts x {:?}: violations {violations}, worst lhs - rhs {worst:.3e}; materialized gap {gap:.2e} over {compared}",
                cuts.len(),
                opts.buser_steps
            ),
        ))
    };
    run().unwrap_or_else(|e| Check::error(Suite::Buser, name, e))
}

fn containment(name: &str, g: &CayleyGraph, spectrum: &Spectrum, opts: &VerifyOptions) -> Check {
    if g.n() > opts.containment_limit.min(MAX_ENUMERATION_VERTICES) {
        return Check::skip(
            Suite::Containment,
            name,
            format!("n = {} above the enumeration limit", g.n()),
        );
    }
    if g.regular_degree().is_none() {
        return Check::skip(Suite::Containment, name, "needs a regular graph");
    }
    let mut ok = true;
    let mut details = Vec::new();
    for &eps in &opts.containment_eps {
        match containment_check(g, spectrum, eps) {
            Ok(r) => {
                ok &= r.holds();
                details.push(format!(
                    "eps {eps}: tau {:.2}{} margin {:.3} over {} cuts, needed constant {:.3}",
                    r.tau,
                    if r.vacuous { " (vacuous)" } else { "" },
                    r.worst_margin,
                    r.cuts_checked,
                    r.required_constant
                ));
            }
            Err(e) => {
                ok = false;
                details.push(format!("eps {eps}: {e}"));
            }
        }
    }
    Check::new(Suite::Containment, name, ok, details.join("; "))
}

/// Runs the per-graph suites in `suites` on one graph.
pub fn verify_graph(
    name: &str,
    g: &CayleyGraph,
    suites: &[Suite],
    opts: &VerifyOptions,
) -> Vec<Check> {
    let mut out = Vec::new();
    let s = structure(name, g);
    let sound = s.status == Status::Pass;
    if suites.contains(&Suite::Structure) || !sound {
        out.push(s);
    }
    let rest: Vec<Suite> = suites
        .iter()
        .copied()
        .filter(|s| !s.is_standalone() && *s != Suite::Structure)
        .collect();
    if !sound {
        for s in rest {
            out.push(Check::skip(s, name, "graph failed the structure audit"));
        }
        return out;
    }
    if rest.contains(&Suite::Spectral) {
        out.push(spectral(name, g));
    }
    out.extend(walks(name, g, opts, &rest));
    let needs_spectrum = rest.iter().any(|s| {
        matches!(
            s,
            Suite::Multiplicity | Suite::Cheeger | Suite::Buser | Suite::Containment
        )
    });
    if !needs_spectrum {
        return out;
    }
    let spectrum = match spectrum_of(g) {
        Ok(s) => s,
        Err(e) => {
            out.push(Check::new(
                Suite::Spectral,
                name,
                false,
                format!("no spectrum: {e}"),
            ));
            return out;
        }
    };
    let connected = g.is_connected();
    for s in rest {
        if !connected && matches!(s, Suite::Multiplicity | Suite::Cheeger | Suite::Containment) {
            out.push(Check::skip(s, name, "graph is disconnected"));
            continue;
        }
        match s {
            Suite::Multiplicity => out.push(multiplicity(name, g, &spectrum)),
            Suite::Cheeger => out.push(cheeger(name, g, &spectrum, opts)),
            Suite::Buser => out.push(buser(name, g, &spectrum, opts)),
            Suite::Containment => out.push(containment(name, g, &spectrum, opts)),
            _ => {}
        }
    }
    out
}

fn pm_units(p: usize, n: usize) -> GeneratorMultiset {
    let g = AbelianGroup::new(vec![p; n]).expect("valid moduli");
    let units: Vec<GroupElement> = (0..n)
        .map(|j| GroupElement((0..n).map(|i| (i == j) as usize).collect()))
        .collect();
    GeneratorMultiset::plus_minus(&g, &units)
}

/// `(p, n, S)` instances with `p in {3, 5, 7}` and `p^n <= 2401`: the unit
/// vectors, the unit vectors plus the all-ones vector, and a random set.
pub fn zpn_instances(seed: u64) -> Vec<(String, usize, usize, GeneratorMultiset)> {
    let mut out = Vec::new();
    for p in [3usize, 5, 7] {
        let mut n = 1;
        while p.pow(n as u32) <= 2401 {
            let g = AbelianGroup::new(vec![p; n]).expect("valid moduli");
            out.push((format!("Z_{p}^{n} units"), p, n, pm_units(p, n)));
            if n > 1 {
                let mut s = pm_units(p, n);
                let ones = GroupElement(vec![1; n]);
                s.insert(g.negate(&ones), 1);
                s.insert(ones, 1);
                out.push((format!("Z_{p}^{n} units+ones"), p, n, s));
            }
            let d = 2 * (n + 1);
            let base = seed ^ (p * 100 + n) as u64;
            let connected = (base..base + 256).find_map(|s| {
                let gens = crate::corpus::random_generators(&g, d, s).ok()?;
                build_cayley(&g, &gens)
                    .ok()?
                    .is_connected()
                    .then_some((s, gens))
            });
            if let Some((s, gens)) = connected {
                out.push((format!("Z_{p}^{n} random d{d} s{s}"), p, n, gens));
            }
            n += 1;
        }
    }
    out
}

/// Identity, repetition, parity, Hamming and `count` random full-rank codes
/// with `k <= 10`.
pub fn code_instances(count: usize, seed: u64) -> Vec<(String, BinaryLinearCode)> {
    let mut out = Vec::new();
    for k in [1usize, 3, 6] {
        out.push((
            format!("I_{k}"),
            BinaryLinearCode::identity(k).expect("k >= 1"),
        ));
    }
    for n in [2usize, 3, 7] {
        out.push((
            format!("rep_{n}"),
            BinaryLinearCode::repetition(n).expect("n >= 1"),
        ));
    }
    for k in [2usize, 5] {
        out.push((
            format!("parity_{k}"),
            BinaryLinearCode::parity(k).expect("k >= 1"),
        ));
    }
    out.push(("hamming_7_4".to_string(), BinaryLinearCode::hamming_7_4()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..count {
        let k = rng.random_range(1..=10usize);
        let n = rng.random_range(k..=k + 12);
        let s = rng.random::<u64>();
        out.push((
            format!("random_{i}_k{k}_n{n}"),
            BinaryLinearCode::random(k, n, s).expect("valid shape"),
        ));
    }
    out
}

fn standalone(suite: Suite, opts: &VerifyOptions) -> Vec<Check> {
    match suite {
        Suite::Zpn => zpn_instances(opts.seed)
            .into_par_iter()
            .map(|(name, p, n, s)| match zpn_approx(p, n, &s) {
                Ok(r) => Check::new(
                    Suite::Zpn,
                    &name,
                    r.holds(),
                    format!(
                        "phi {:.4} ({}) <= lambda_2(G') {:.4} <= {:.4}",
                        r.phi_reference,
                        if r.phi_exact.is_some() { "exact" } else { "coset cuts" },
                        r.lambda2_prime,
                        (p + 1) as f64 / 2.0 * r.phi_reference
                    ),
                ),
                Err(e) => Check::error(Suite::Zpn, &name, e),
            })
            .collect(),
        Suite::Codes => code_instances(20, opts.seed)
            .into_par_iter()
            .map(|(name, c)| match code_spectrum_check(&c) {
                Ok(r) => Check::new(
                    Suite::Codes,
                    &name,
                    r.holds(),
                    format!(
                        "lambda_2 = {}/{}, distance {}, multiplicity {} vs census {}",
                        r.lambda2_num, r.block_length, r.distance, r.multiplicity, r.census_count
                    ),
                ),
                Err(e) => Check::error(Suite::Codes, &name, e),
            })
            .collect(),
        Suite::Cycle => [8usize, 16, 32, 64]
            .into_iter()
            .map(|n| {
                let name = format!("C_{n} bisection");
                let q: Vec<i64> = (0..n as i64 / 2).collect();
                match cycle_fourier_profile(n, &q, &[0.05, 0.1, 0.2]) {
                    Ok(p) => {
                        // a tail past n/2 is empty and carries no information
                        let tails: Vec<String> = p
                            .tails
                            .iter()
                            .map(|t| {
                                if 2 * t.cutoff >= n {
                                    format!("eps {}: n/a", t.eps)
                                } else {
                                    format!("eps {}: {:.4}", t.eps, t.mass)
                                }
                            })
                            .collect();
                        let tails_ok = p.tails.iter().all(|t| 2 * t.cutoff >= n || t.in_range);
                        let ok = p.even_ok() == Some(true) && p.odd_ok() == Some(true) && tails_ok && p.mul_ok();
                        Check::new(
                            Suite::Cycle,
                            &name,
                            ok,
                            format!(
                                "even max {:.1e}, odd window {:?}, tails [{}], mul_phi {} vs sqrt n {:.2}",
                                p.even_max.unwrap_or(f64::NAN),
                                p.odd_window.unwrap_or((f64::NAN, f64::NAN)),
                                tails.join(", "),
                                p.mul_phi,
                                p.sqrt_n
                            ),
                        )
                    }
                    Err(e) => Check::error(Suite::Cycle, &name, e),
                }
            })
            .collect(),
        _ => Vec::new(),
    }
}

/// Runs `suites` over `corpus` (in parallel across graphs) and the standalone
/// suites once.
pub fn verify(corpus: &[NamedGraph], suites: &[Suite], opts: &VerifyOptions) -> VerifyReport {
    let mut warnings = Vec::new();
    let per_graph = suites.iter().any(|s| !s.is_standalone());
    if per_graph && corpus.is_empty() {
        warnings.push("corpus is empty; graph suites pass vacuously".to_string());
    }
    let mut checks: Vec<Check> = corpus
        .par_iter()
        .map(|ng| verify_graph(&ng.name, &ng.graph, suites, opts))
        .flatten()
        .collect();
    for &s in suites.iter().filter(|s| s.is_standalone()) {
        checks.extend(standalone(s, opts));
    }
    let failures = checks.iter().filter(|c| c.status == Status::Fail).count();
    VerifyReport {
        passed: failures == 0,
        failures,
        checks,
        warnings,
    }
}
