//! Dual ADMM for `min <C, X>` over `X >= 0` (PSD) subject to sparse linear
//! equalities and inequalities.
//!
//! Inequalities `g(X) <= h` get a nonnegative slack, so the variable is
//! `W = (svec X, s)` in the cone `S_+ x R_+^p` and every constraint is an
//! equality `A W = b`. One iteration:
//!
//! ```text
//! y = (A A^T)^{-1} (mu (b - A W) + A (C - Z))
//! V = C - A^T y - mu W
//! Z = proj_K(V),  W = (Z - V) / mu
//! ```
//!
//! `A A^T` is factored once per constraint set.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Linear functional `sum c * X_ij` over upper-triangular entries `i <= j`.
#[derive(Clone, Debug, Default)]
pub(crate) struct LinearForm {
    pub entries: Vec<(usize, usize, f64)>,
}

impl LinearForm {
    pub fn add(&mut self, i: usize, j: usize, c: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.entries.push((i, j, c));
    }
}

#[derive(Clone, Debug)]
struct Row {
    idx: Vec<usize>,
    val: Vec<f64>,
    slack: Option<usize>,
}

#[derive(Clone, Debug)]
pub(crate) struct Outcome {
    pub matrix: DMatrix<f64>,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub gap: f64,
    pub converged: bool,
}

pub(crate) struct Admm {
    dim: usize,
    nvec: usize,
    svec_index: Vec<usize>,
    c: Vec<f64>,
    c_scale: f64,
    rows: Vec<Row>,
    b: Vec<f64>,
    n_slack: usize,
    chol: Option<Cholesky<f64, Dyn>>,
    x: Vec<f64>,
    s: Vec<f64>,
    zx: Vec<f64>,
    zs: Vec<f64>,
    y: Vec<f64>,
    mu: f64,
}

const SQRT2: f64 = std::f64::consts::SQRT_2;

impl Admm {
    pub fn new(dim: usize, objective: &LinearForm, seed: u64) -> Self {
        let nvec = dim * (dim + 1) / 2;
        let mut svec_index = vec![0; dim * dim];
        let mut k = 0;
        for i in 0..dim {
            for j in i..dim {
                svec_index[i * dim + j] = k;
                svec_index[j * dim + i] = k;
                k += 1;
            }
        }
        let mut out = Self {
            dim,
            nvec,
            svec_index,
            c: vec![0.0; nvec],
            c_scale: 1.0,
            rows: Vec::new(),
            b: Vec::new(),
            n_slack: 0,
            chol: None,
            x: vec![0.0; nvec],
            s: Vec::new(),
            zx: vec![0.0; nvec],
            zs: Vec::new(),
            y: Vec::new(),
            mu: 1.0,
        };
        let (idx, val) = out.sparse(objective);
        for (k, v) in idx.into_iter().zip(val) {
            out.c[k] += v;
        }
        let norm = out.c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            out.c_scale = norm;
            out.c.iter_mut().for_each(|v| *v /= norm);
        }
        // Start from a slightly perturbed multiple of the identity.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..dim {
            for j in i..dim {
                let k = out.svec_index[i * dim + j];
                out.x[k] = if i == j { 0.5 } else { 0.0 } + 1e-3 * (rng.random::<f64>() - 0.5);
            }
        }
        out
    }

    fn sparse(&self, form: &LinearForm) -> (Vec<usize>, Vec<f64>) {
        let mut acc: std::collections::BTreeMap<usize, f64> = Default::default();
        for &(i, j, c) in &form.entries {
            let k = self.svec_index[i * self.dim + j];
            *acc.entry(k).or_insert(0.0) += if i == j { c } else { c / SQRT2 };
        }
        acc.into_iter().filter(|(_, v)| *v != 0.0).unzip()
    }

    fn push_row(&mut self, form: &LinearForm, rhs: f64, inequality: bool) {
        let (idx, mut val) = self.sparse(form);
        let norm = val.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        val.iter_mut().for_each(|v| *v /= norm);
        let slack = inequality.then(|| {
            self.n_slack += 1;
            self.n_slack - 1
        });
        let row = Row { idx, val, slack };
        if let Some(si) = slack {
            // warm-start the slack at the current residual
            let gx: f64 = row
                .idx
                .iter()
                .zip(&row.val)
                .map(|(&k, v)| v * self.x[k])
                .sum();
            self.s.push((rhs / norm - gx).max(0.0));
            self.zs.push(0.0);
            debug_assert_eq!(si + 1, self.s.len());
        }
        self.rows.push(row);
        self.b.push(rhs / norm);
        self.y.push(0.0);
        self.chol = None;
    }

    pub fn add_equality(&mut self, form: &LinearForm, rhs: f64) {
        self.push_row(form, rhs, false);
    }

    pub fn add_inequality(&mut self, form: &LinearForm, rhs: f64) {
        self.push_row(form, rhs, true);
    }

    fn factor(&mut self) -> Result<()> {
        let m = self.rows.len();
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.nvec];
        for (r, row) in self.rows.iter().enumerate() {
            for (&k, &v) in row.idx.iter().zip(&row.val) {
                cols[k].push((r, v));
            }
        }
        let mut k = DMatrix::<f64>::zeros(m, m);
        for col in &cols {
            for &(a, va) in col {
                for &(b, vb) in col {
                    k[(a, b)] += va * vb;
                }
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            if row.slack.is_some() {
                k[(r, r)] += 1.0;
            }
            k[(r, r)] += 1e-12;
        }
        self.chol = Some(
            Cholesky::new(k)
                .ok_or_else(|| Error::Solver("constraint Gram matrix is singular".into()))?,
        );
        Ok(())
    }

    fn apply_a(&self, x: &[f64], s: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| {
                let mut v: f64 = row.idx.iter().zip(&row.val).map(|(&k, c)| c * x[k]).sum();
                if let Some(si) = row.slack {
                    v += s[si];
                }
                v
            })
            .collect()
    }

    fn apply_at(&self, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut x = vec![0.0; self.nvec];
        let mut s = vec![0.0; self.n_slack];
        for (row, &yr) in self.rows.iter().zip(y) {
            for (&k, c) in row.idx.iter().zip(&row.val) {
                x[k] += c * yr;
            }
            if let Some(si) = row.slack {
                s[si] += yr;
            }
        }
        (x, s)
    }

    fn smat(&self, v: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_fn(d, d, |i, j| {
            let x = v[self.svec_index[i * d + j]];
            if i == j {
                x
            } else {
                x / SQRT2
            }
        })
    }

    fn svec_into(&self, m: &DMatrix<f64>, out: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            for j in i..d {
                let k = self.svec_index[i * d + j];
                out[k] = if i == j {
                    m[(i, i)]
                } else {
                    (m[(i, j)] + m[(j, i)]) / SQRT2
                };
            }
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        self.smat(&self.x)
    }

    /// Runs until primal, dual and gap measures fall below `tol` or the
    /// iteration budget is spent.
    pub fn solve(&mut self, tol: f64, max_iterations: usize) -> Result<Outcome> {
        if self.chol.is_none() {
            self.factor()?;
        }
        let chol = self.chol.clone().expect("factored above");
        let bnorm = 1.0 + self.b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let cnorm = 1.0 + self.c.iter().map(|v| v * v).sum::<f64>().sqrt();
        let (mut pinf, mut dinf, mut gap) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let (mut p_acc, mut d_acc) = (0.0, 0.0);
        let mut it = 0;
        let mut converged = false;
        while it < max_iterations {
            it += 1;
            let aw = self.apply_a(&self.x, &self.s);
            let cz: Vec<f64> = self.c.iter().zip(&self.zx).map(|(c, z)| c - z).collect();
            let negzs: Vec<f64> = self.zs.iter().map(|z| -z).collect();
            let acz = self.apply_a(&cz, &negzs);
            let rhs = DVector::from_iterator(
                self.rows.len(),
                (0..self.rows.len()).map(|r| self.mu * (self.b[r] - aw[r]) + acz[r]),
            );
            let y = chol.solve(&rhs);
            self.y.copy_from_slice(y.as_slice());
            let (aty_x, aty_s) = self.apply_at(&self.y);

            let vx: Vec<f64> = (0..self.nvec)
                .map(|k| self.c[k] - aty_x[k] - self.mu * self.x[k])
                .collect();
            let vs: Vec<f64> = (0..self.n_slack)
                .map(|k| -aty_s[k] - self.mu * self.s[k])
                .collect();

            let eig = SymmetricEigen::new(self.smat(&vx));
            let mut pos = DMatrix::<f64>::zeros(self.dim, self.dim);
            for (c, &l) in eig.eigenvalues.iter().enumerate() {
                if l > 0.0 {
                    let v = eig.eigenvectors.column(c);
                    pos += l * v * v.transpose();
                }
            }
            let mut zx = vec![0.0; self.nvec];
            self.svec_into(&pos, &mut zx);
            let zs: Vec<f64> = vs.iter().map(|v| v.max(0.0)).collect();

            let mut dres = 0.0;
            for k in 0..self.nvec {
                let xn = (zx[k] - vx[k]) / self.mu;
                dres += (self.mu * (xn - self.x[k])).powi(2);
                self.x[k] = xn;
            }
            for k in 0..self.n_slack {
                let sn = (zs[k] - vs[k]) / self.mu;
                dres += (self.mu * (sn - self.s[k])).powi(2);
                self.s[k] = sn;
            }
            self.zx = zx;
            self.zs = zs;

            if it % 10 == 0 || it == max_iterations {
                let aw = self.apply_a(&self.x, &self.s);
                let pres: f64 = aw
                    .iter()
                    .zip(&self.b)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                pinf = pres / bnorm;
                dinf = dres.sqrt() / cnorm;
                let pobj: f64 = self.c.iter().zip(&self.x).map(|(c, x)| c * x).sum();
                let dobj: f64 = self.b.iter().zip(&self.y).map(|(b, y)| b * y).sum();
                gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
                if pinf <= tol && dinf <= tol && gap <= tol {
                    converged = true;
                    break;
                }
                p_acc += pinf.max(1e-300).ln();
                d_acc += dinf.max(1e-300).ln();
                if it % 50 == 0 {
                    // balance the residuals: a larger mu shrinks primal
                    // infeasibility at the expense of dual infeasibility
                    let r = (p_acc - d_acc) / 5.0;
                    if r > 1.2 {
                        self.mu = (self.mu * 1.6).min(1e6);
                    } else if r < -1.2 {
                        self.mu = (self.mu / 1.6).max(1e-6);
                    }
                    p_acc = 0.0;
                    d_acc = 0.0;
                }
            }
        }
        Ok(Outcome {
            matrix: self.matrix(),
            iterations: it,
            primal_residual: pinf,
            dual_residual: dinf,
            gap,
            converged,
        })
    }

    /// Objective value `<C, X>` in the caller's units.
    pub fn objective(&self) -> f64 {
        self.c_scale * self.c.iter().zip(&self.x).map(|(c, x)| c * x).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // min <C, X> with diag(X) = 1, X PSD; C = [[0, 1], [1, 0]] -> X_01 = -1.
    #[test]
    fn two_by_two_maxcut() {
        let mut obj = LinearForm::default();
        obj.add(0, 1, 2.0);
        let mut admm = Admm::new(2, &obj, 0);
        for i in 0..2 {
            let mut f = LinearForm::default();
            f.add(i, i, 1.0);
            admm.add_equality(&f, 1.0);
        }
        let out = admm.solve(1e-8, 20_000).unwrap();
        assert!(out.converged);
        assert!((out.matrix[(0, 1)] + 1.0).abs() < 1e-6, "{}", out.matrix);
        assert!((admm.objective() + 2.0).abs() < 1e-6);
    }

    // inequality: X_01 >= 0.25 written as -X_01 <= -0.25
    #[test]
    fn inequality_is_respected() {
        let mut obj = LinearForm::default();
        obj.add(0, 1, 2.0);
        let mut admm = Admm::new(2, &obj, 1);
        for i in 0..2 {
            let mut f = LinearForm::default();
            f.add(i, i, 1.0);
            admm.add_equality(&f, 1.0);
        }
        let mut g = LinearForm::default();
        g.add(0, 1, -1.0);
        admm.add_inequality(&g, -0.25);
        let out = admm.solve(1e-8, 20_000).unwrap();
        assert!(out.converged);
        assert!((out.matrix[(0, 1)] - 0.25).abs() < 1e-6, "{}", out.matrix);
    }
}
