//! Sparsest cut with advice: a degree-2 moment relaxation with Boolean
//! diagonal, l2^2 triangle inequalities and an advice-correlation constraint,
//! rounded by exhaustive ball cuts.

mod admm;

use std::collections::BTreeSet;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::cuts::{sparsity_ratio, Cut, Ratio, ScoredCut};
use crate::error::{guard, Error, Result};
use crate::group::CayleyGraph;
use admm::{Admm, LinearForm};

/// Largest vertex count accepted by [`solve_advice_sdp`].
pub const MAX_SDP_VERTICES: usize = 64;

/// Point of the metric: the constants 0 and 1, or a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Point {
    Zero,
    One,
    Vertex(usize),
}

impl Point {
    // matrix index; None for the origin
    fn index(self) -> Option<usize> {
        match self {
            Point::Zero => None,
            Point::One => Some(0),
            Point::Vertex(i) => Some(i + 1),
        }
    }
}

/// Matrix of pseudo-moments indexed by `{0} u [n]`: entry `(0, 0)` is 1, `(0, i)`
/// is `E x_i`, `(i, j)` is `E x_i x_j` (vertex `i` sits at index `i + 1`).
#[derive(Clone, Debug)]
pub struct PseudomomentMatrix {
    m: DMatrix<f64>,
}

impl PseudomomentMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() < 2 {
            return Err(Error::invalid(
                "pseudo-moment matrix must be square with n >= 1",
            ));
        }
        Ok(Self { m })
    }

    /// Rank-one moments of the point mass on `1_Q`.
    pub fn from_cut(cut: &Cut) -> Self {
        let n = cut.n();
        let v: Vec<f64> = std::iter::once(1.0)
            .chain(cut.members().iter().map(|&b| f64::from(u8::from(b))))
            .collect();
        Self {
            m: DMatrix::from_fn(n + 1, n + 1, |i, j| v[i] * v[j]),
        }
    }

    pub fn n(&self) -> usize {
        self.m.nrows() - 1
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// `E x_i^2`.
    pub fn moment(&self, i: usize) -> f64 {
        self.m[(i + 1, i + 1)]
    }

    /// `E (p - q)^2`.
    pub fn dist(&self, p: Point, q: Point) -> f64 {
        match (p.index(), q.index()) {
            (None, None) => 0.0,
            (None, Some(a)) | (Some(a), None) => self.m[(a, a)],
            (Some(a), Some(b)) => self.m[(a, a)] + self.m[(b, b)] - 2.0 * self.m[(a, b)],
        }
    }

    pub fn vertex_dist(&self, i: usize, j: usize) -> f64 {
        self.dist(Point::Vertex(i), Point::Vertex(j))
    }

    /// `sum_{uv in E} mult(uv) d(u, v)`, each undirected edge once.
    pub fn edge_objective(&self, graph: &CayleyGraph) -> f64 {
        graph
            .edges()
            .iter()
            .filter(|(u, v, _)| u != v)
            .map(|&(u, v, m)| m as f64 * self.vertex_dist(u, v))
            .sum()
    }

    /// `sum_{i<j} d(i, j)`, which equals `E (sum x)(n - sum x)` under the
    /// Boolean constraint.
    pub fn pseudo_spreading(&self) -> f64 {
        let n = self.n();
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += self.vertex_dist(i, j);
            }
        }
        s
    }

    /// `sum_{i in Q} (1 - E x_i) + sum_{i notin Q} E x_i`.
    pub fn correlation(&self, advice: &Cut) -> f64 {
        (0..self.n())
            .map(|i| {
                let x = self.m[(0, i + 1)];
                if advice.contains(i) {
                    1.0 - x
                } else {
                    x
                }
            })
            .sum()
    }

    pub fn audit(&self, advice: &Cut, eps: f64) -> Audit {
        let n = self.n();
        let mut boolean = (self.m[(0, 0)] - 1.0).abs();
        let mut symmetry = 0.0f64;
        for i in 0..=n {
            boolean = boolean.max((self.m[(0, i)] - self.m[(i, i)]).abs());
            for j in 0..=n {
                symmetry = symmetry.max((self.m[(i, j)] - self.m[(j, i)]).abs());
            }
        }
        let min_eigenvalue = SymmetricEigen::new(self.m.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let worst = triangle_violations(self, 1, f64::NEG_INFINITY);
        Audit {
            min_eigenvalue,
            boolean_residual: boolean.max(symmetry),
            correlation_excess: self.correlation(advice) - eps * advice.size() as f64,
            max_triangle_violation: worst.first().map_or(0.0, |t| t.violation.max(0.0)),
        }
    }
}

/// Constraint residuals of a solver output.
#[derive(Clone, Debug, Serialize)]
pub struct Audit {
    pub min_eigenvalue: f64,
    /// `max(|M_00 - 1|, max_i |M_0i - M_ii|)` and symmetry defects.
    pub boolean_residual: f64,
    /// Correlation sum minus `eps |Q|`; nonpositive when satisfied.
    pub correlation_excess: f64,
    pub max_triangle_violation: f64,
}

impl Audit {
    pub fn passes(&self, tol: f64) -> bool {
        self.min_eigenvalue >= -10.0 * tol
            && self.boolean_residual <= tol
            && self.correlation_excess <= tol
            && self.max_triangle_violation <= tol
    }
}

/// `d(a, b) - d(a, mid) - d(mid, b) > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TriangleViolation {
    pub a: Point,
    pub b: Point,
    pub mid: Point,
    pub violation: f64,
}

fn points(n: usize) -> Vec<Point> {
    [Point::Zero, Point::One]
        .into_iter()
        .chain((0..n).map(Point::Vertex))
        .collect()
}

/// The `top_k` largest triangle violations above `tol` over `{0, 1} u [n]`,
/// largest first (ties by point order).
pub fn triangle_violations(
    m: &PseudomomentMatrix,
    top_k: usize,
    tol: f64,
) -> Vec<TriangleViolation> {
    let pts = points(m.n());
    let k = pts.len();
    let mut d = vec![0.0; k * k];
    for (i, &p) in pts.iter().enumerate() {
        for (j, &q) in pts.iter().enumerate() {
            d[i * k + j] = m.dist(p, q);
        }
    }
    let mut out = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            for c in 0..k {
                if c == a || c == b {
                    continue;
                }
                let v = d[a * k + b] - d[a * k + c] - d[c * k + b];
                if v > tol {
                    out.push(TriangleViolation {
                        a: pts[a],
                        b: pts[b],
                        mid: pts[c],
                        violation: v,
                    });
                }
            }
        }
    }
    out.sort_by(|x, y| {
        y.violation
            .total_cmp(&x.violation)
            .then((x.a, x.b, x.mid).cmp(&(y.a, y.b, y.mid)))
    });
    out.truncate(top_k);
    out
}

/// Solver settings.
#[derive(Clone, Debug, Serialize)]
pub struct SolverConfig {
    /// Relative primal/dual residual target, also the threshold for adding
    /// triangle cuts (scaled by 10).
    pub tolerance: f64,
    /// Iteration cap per cutting-plane round.
    pub max_iterations: usize,
    pub max_rounds: usize,
    /// Triangle constraints added per round; 0 picks `4 (n + 2)`.
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 50_000,
            max_rounds: 60,
            batch_size: 0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    pub triangle_rounds: usize,
    pub triangle_constraints: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub objective: f64,
}

/// Terms of `d(p, q)` as matrix entries.
fn dist_form(form: &mut LinearForm, p: Point, q: Point, sign: f64) {
    match (p.index(), q.index()) {
        (None, None) => {}
        (None, Some(a)) | (Some(a), None) => form.add(a, a, sign),
        (Some(a), Some(b)) => {
            form.add(a, a, sign);
            form.add(b, b, sign);
            form.add(a, b, -2.0 * sign);
        }
    }
}

fn triangle_form(t: &TriangleViolation) -> LinearForm {
    let mut f = LinearForm::default();
    dist_form(&mut f, t.a, t.b, 1.0);
    dist_form(&mut f, t.a, t.mid, -1.0);
    dist_form(&mut f, t.mid, t.b, -1.0);
    f
}

/// Minimizes `sum_{uv in E} d(u, v)` over PSD pseudo-moment matrices with
/// Boolean diagonal, the triangle inequalities, and `sum_{i in Q} (1 - M_ii) +
/// sum_{i notin Q} M_ii <= eps |Q|`.
///
/// Triangle inequalities are generated lazily. `eps` may be anywhere in
/// `[0, 1]`; the rounding guarantee needs `eps <= 1/20`.
pub fn solve_advice_sdp(
    graph: &CayleyGraph,
    advice: &Cut,
    eps: f64,
    cfg: &SolverConfig,
) -> Result<(PseudomomentMatrix, SolverDiagnostics)> {
    let n = graph.n();
    guard("vertex count", n, MAX_SDP_VERTICES)?;
    if advice.n() != n || !advice.is_proper() {
        return Err(Error::invalid("advice must be a proper cut of the graph"));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::invalid(format!("eps = {eps} must lie in [0, 1]")));
    }
    if !(cfg.tolerance > 0.0) {
        return Err(Error::invalid("solver tolerance must be positive"));
    }
    let dim = n + 1;
    let mut objective = LinearForm::default();
    for (u, v, m) in graph.edges() {
        if u != v {
            dist_form(&mut objective, Point::Vertex(u), Point::Vertex(v), m as f64);
        }
    }
    let mut admm = Admm::new(dim, &objective, cfg.seed);
    let mut top = LinearForm::default();
    top.add(0, 0, 1.0);
    admm.add_equality(&top, 1.0);
    for i in 1..dim {
        let mut f = LinearForm::default();
        f.add(0, i, 1.0);
        f.add(i, i, -1.0);
        admm.add_equality(&f, 0.0);
    }
    // correlation: sum_{Q} (1 - M_ii) + sum_{not Q} M_ii <= eps |Q|
    let mut corr = LinearForm::default();
    for i in 0..n {
        corr.add(i + 1, i + 1, if advice.contains(i) { -1.0 } else { 1.0 });
    }
    let q = advice.size() as f64;
    admm.add_inequality(&corr, eps * q - q);

    let batch = if cfg.batch_size == 0 {
        4 * (n + 2)
    } else {
        cfg.batch_size
    };
    let mut active: BTreeSet<(Point, Point, Point)> = BTreeSet::new();
    let mut diag = SolverDiagnostics::default();
    loop {
        let out = admm.solve(cfg.tolerance, cfg.max_iterations)?;
        diag.iterations += out.iterations;
        diag.primal_residual = out.primal_residual;
        diag.dual_residual = out.dual_residual;
        diag.gap = out.gap;
        if !out.converged {
            return Err(Error::Solver(format!(
                "no convergence after {} iterations (primal {:.2e}, dual {:.2e}, gap {:.2e})",
                out.iterations, out.primal_residual, out.dual_residual, out.gap
            )));
        }
        let m = PseudomomentMatrix::new(out.matrix)?;
        let fresh: Vec<TriangleViolation> =
            triangle_violations(&m, usize::MAX, 10.0 * cfg.tolerance)
                .into_iter()
                .filter(|t| !active.contains(&(t.a, t.b, t.mid)))
                .take(batch)
                .collect();
        if fresh.is_empty() {
            diag.objective = admm.objective();
            diag.triangle_constraints = active.len();
            return Ok((m, diag));
        }
        if diag.triangle_rounds >= cfg.max_rounds {
            return Err(Error::Solver(format!(
                "triangle constraints still violated after {} rounds",
                cfg.max_rounds
            )));
        }
        diag.triangle_rounds += 1;
        for t in fresh {
            active.insert((t.a, t.b, t.mid));
            admm.add_inequality(&triangle_form(&t), 0.0);
        }
    }
}

/// Derandomized ball rounding: every center `u` and every radius `d(u, i)`;
/// returns the proper ball of least sparsity (ties to the smaller bitset),
/// scored directly on the graph.
pub fn ball_rounding(m: &PseudomomentMatrix, graph: &CayleyGraph) -> Result<ScoredCut> {
    let n = graph.n();
    if m.n() != n {
        return Err(Error::invalid("moment matrix does not match the graph"));
    }
    let mut best: Option<(Ratio, Cut)> = None;
    for u in 0..n {
        let dist: Vec<f64> = (0..n).map(|i| m.vertex_dist(u, i)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
        let mut inside = vec![false; n];
        let mut bnd: i64 = 0;
        for k in 0..n - 1 {
            let v = order[k];
            for &(w, mult) in graph.neighbors(v) {
                if w != v {
                    bnd += if inside[w] {
                        -(mult as i64)
                    } else {
                        mult as i64
                    };
                }
            }
            inside[v] = true;
            if dist[order[k + 1]] == dist[v] {
                continue;
            }
            let size = (k + 1) as u64;
            let r = Ratio::new(bnd as u64, size * (n as u64 - size));
            let better = match &best {
                None => true,
                Some((br, bc)) => r < *br || (r == *br && Cut::from_members(inside.clone()) < *bc),
            };
            if better {
                best = Some((r, Cut::from_members(inside.clone())));
            }
        }
    }
    let (_, cut) = best.ok_or_else(|| {
        Error::invalid("every ball is empty or the whole vertex set; moment matrix is degenerate")
    })?;
    let ratio = sparsity_ratio(graph, &cut)?;
    Ok(ScoredCut {
        value: ratio.value(),
        cut,
        ratio,
    })
}

/// Result of [`advice_cut`].
#[derive(Clone, Debug)]
pub struct AdviceOutcome {
    pub cut: ScoredCut,
    pub moments: PseudomomentMatrix,
    pub sdp_objective: f64,
    pub pseudo_spreading: f64,
    pub diagnostics: SolverDiagnostics,
}

impl AdviceOutcome {
    /// `objective / pseudo-spreading`, at most the sparsity of any cut close
    /// enough to the advice to be feasible.
    pub fn lower_bound(&self) -> f64 {
        self.sdp_objective / self.pseudo_spreading
    }
}

/// Solves the advice relaxation and rounds it.
pub fn advice_cut(
    graph: &CayleyGraph,
    advice: &Cut,
    eps: f64,
    cfg: &SolverConfig,
) -> Result<AdviceOutcome> {
    let (moments, diagnostics) = solve_advice_sdp(graph, advice, eps, cfg)?;
    let cut = ball_rounding(&moments, graph)?;
    Ok(AdviceOutcome {
        cut,
        sdp_objective: moments.edge_objective(graph),
        pseudo_spreading: moments.pseudo_spreading(),
        moments,
        diagnostics,
    })
}
