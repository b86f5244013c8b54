//! Log-det barrier method.
//!
//! Equalities are eliminated first (`y = y0 + N z`). Every semidefinite
//! constraint is normalised by its coefficient scale; strict ones are shifted
//! by `strict_rel * I`. A box `|y_i| <= bound` keeps all phases bounded.
//!
//! Phase 1 minimises `s` subject to `F_k(z) + s I > 0`. On the central path
//! `s* >= s(t) - m/t` (m = total barrier degree), which gives an
//! infeasibility certificate once `s(t) - m/t > 0`. Phase 2 follows the
//! central path of the objective from the phase-1 point until `m/t` falls
//! below the tolerance.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use super::LmiProblem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Duality-gap tolerance relative to `max(1, |objective|)`.
    pub tolerance: f64,
    /// Cap on the total number of Newton steps.
    pub max_iters: usize,
    /// Margin for strict constraints, relative to each constraint's scale.
    pub strict_rel: f64,
    /// Box bound on every scalar variable.
    pub bound: f64,
    /// Barrier parameter growth factor.
    pub mu: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: 1e-7, max_iters: 2000, strict_rel: 1e-7, bound: 1e4, mu: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Feasible,
    Infeasible,
    /// Iteration cap reached, or the problem sits on the feasibility boundary.
    MaxIter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    /// Objective at `values` (0 for pure feasibility problems).
    pub objective: f64,
    pub values: Vec<f64>,
    /// Feasible: smallest eigenvalue of the normalised, shifted constraints.
    /// Infeasible: the certified lower bound `-(s - m/t)`, negative.
    pub margin: f64,
    /// Barrier duality measure `m/t` at exit.
    pub gap: f64,
    pub iterations: usize,
}

/// Constraint `c0 + sum_j x_j G_j > 0` in reduced coordinates.
#[derive(Debug, Clone)]
struct RCon {
    c0: DMatrix<f64>,
    coefs: Vec<(usize, DMatrix<f64>)>,
}

impl RCon {
    fn dim(&self) -> usize {
        self.c0.nrows()
    }

    fn eval(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let mut s = self.c0.clone();
        for (j, g) in &self.coefs {
            s += g * x[*j];
        }
        s
    }
}

struct Barrier {
    cons: Vec<RCon>,
    c: DVector<f64>,
    degree: f64,
}

enum Step {
    Centered,
    /// The merit no longer decreases in floating point.
    Precision,
    Budget,
    Failed,
}

impl Barrier {
    fn new(cons: Vec<RCon>, c: DVector<f64>) -> Self {
        let degree = cons.iter().map(|k| k.dim() as f64).sum();
        Self { cons, c, degree }
    }

    fn n(&self) -> usize {
        self.c.len()
    }

    /// `-sum log det`, or `None` outside the domain.
    fn log_barrier(&self, x: &DVector<f64>) -> Option<f64> {
        let mut total = 0.0;
        for k in &self.cons {
            let chol = Cholesky::new(k.eval(x))?;
            total -= 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        }
        total.is_finite().then_some(total)
    }

    fn merit(&self, x: &DVector<f64>, t: f64) -> Option<f64> {
        Some(t * self.c.dot(x) + self.log_barrier(x)?)
    }

    fn grad_hess(&self, x: &DVector<f64>, t: f64) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let n = self.n();
        let mut g = &self.c * t;
        let mut h = DMatrix::zeros(n, n);
        for k in &self.cons {
            let chol = Cholesky::new(k.eval(x))?;
            let l = chol.l();
            let ws: Vec<(usize, DMatrix<f64>)> = k
                .coefs
                .iter()
                .map(|(j, gm)| {
                    let a = l.solve_lower_triangular(gm).expect("nonsingular factor");
                    let w = l.solve_lower_triangular(&a.transpose()).expect("nonsingular factor");
                    (*j, w)
                })
                .collect();
            for (a, (ja, wa)) in ws.iter().enumerate() {
                g[*ja] -= wa.trace();
                for (jb, wb) in &ws[a..] {
                    let v = wa.dot(wb);
                    h[(*ja, *jb)] += v;
                    if ja != jb {
                        h[(*jb, *ja)] += v;
                    }
                }
            }
        }
        Some((g, h))
    }

    /// Damped Newton centering at barrier weight `t`.
    fn center(&self, x: &mut DVector<f64>, t: f64, iters: &mut usize, cap: usize) -> Step {
        let mut flat = 0;
        loop {
            if *iters >= cap {
                return Step::Budget;
            }
            let Some((g, h)) = self.grad_hess(x, t) else {
                return Step::Failed;
            };
            let Some(dx) = newton_direction(&h, &g) else {
                return Step::Failed;
            };
            let dec2 = -g.dot(&dx);
            *iters += 1;
            if !dec2.is_finite() {
                return Step::Failed;
            }
            if dec2 / 2.0 < 1e-10 {
                return Step::Centered;
            }
            let Some(f0) = self.merit(x, t) else {
                return Step::Failed;
            };
            let mut alpha = 1.0;
            let f1 = loop {
                let trial = &*x + &dx * alpha;
                if let Some(f1) = self.merit(&trial, t) {
                    if f1 <= f0 - 0.25 * alpha * dec2 {
                        *x = trial;
                        break f1;
                    }
                }
                alpha *= 0.5;
                if alpha < 1e-14 {
                    return Step::Precision;
                }
            };
            // Merit changes at rounding level mean further steps are noise.
            if f0 - f1 <= 1e-13 * f0.abs().max(1.0) {
                flat += 1;
                if flat >= 3 {
                    return Step::Precision;
                }
            } else {
                flat = 0;
            }
        }
    }
}

fn newton_direction(h: &DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = Cholesky::new(h.clone()) {
        let d = ch.solve(&(-g));
        if d.iter().all(|v| v.is_finite()) {
            return Some(d);
        }
    }
    let reg = 1e-12 * h.diagonal().amax().max(1.0);
    let mut hr = h.clone();
    for i in 0..hr.nrows() {
        hr[(i, i)] += reg;
    }
    Cholesky::new(hr).map(|ch| ch.solve(&(-g)))
}

/// Particular solution and null-space basis for the equality constraints.
fn eliminate(problem: &LmiProblem) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = problem.n_vars();
    let eqs = problem.equalities();
    if eqs.is_empty() {
        return Ok((DVector::zeros(n), DMatrix::identity(n, n)));
    }
    let mut a = DMatrix::zeros(eqs.len(), n);
    let mut b = DVector::zeros(eqs.len());
    for (r, e) in eqs.iter().enumerate() {
        for &(k, v) in &e.terms {
            a[(r, k)] += v;
        }
        b[r] = e.rhs;
    }
    let y0 = crate::linalg::min_norm_solve(&a, &b);
    let resid = (&a * &y0 - &b).amax();
    if resid > 1e-9 * (1.0 + b.amax()) {
        return Err(Error::Infeasible(format!("linear equalities are inconsistent (residual {resid:.3e})")));
    }
    let eig = SymmetricEigen::new(a.transpose() * &a);
    let top = eig.eigenvalues.amax().max(1e-300);
    let cols: Vec<DVector<f64>> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l <= 1e-10 * top)
        .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
        .collect();
    let null = if cols.is_empty() { DMatrix::zeros(n, 0) } else { DMatrix::from_columns(&cols) };
    Ok((y0, null))
}

fn reduce(problem: &LmiProblem, opts: &SolverOptions, y0: &DVector<f64>, null: &DMatrix<f64>) -> Vec<RCon> {
    let nz = null.ncols();
    let mut out = Vec::new();
    for c in problem.constraints() {
        let scale = c.expr.scale_estimate();
        let inv = if scale > 0.0 { 1.0 / scale } else { 1.0 };
        let d = c.expr.nrows();
        let mut c0 = c.expr.evaluate(y0.as_slice()) * inv;
        if c.strict {
            for i in 0..d {
                c0[(i, i)] -= opts.strict_rel;
            }
        }
        let mut coefs = Vec::new();
        for j in 0..nz {
            let mut gj = DMatrix::zeros(d, d);
            let mut any = false;
            for (k, fk) in c.expr.terms() {
                let w = null[(k, j)];
                if w != 0.0 {
                    gj += fk * (w * inv);
                    any = true;
                }
            }
            if any && gj.amax() > 0.0 {
                coefs.push((j, gj));
            }
        }
        out.push(RCon { c0, coefs });
    }
    // Box rows, scaled by 1/bound.
    for i in 0..problem.n_vars() {
        let row: Vec<(usize, f64)> = (0..nz).filter(|&j| null[(i, j)] != 0.0).map(|j| (j, null[(i, j)])).collect();
        for sign in [1.0, -1.0] {
            let c0 = DMatrix::from_element(1, 1, 1.0 - sign * y0[i] / opts.bound);
            let coefs = row
                .iter()
                .map(|&(j, w)| (j, DMatrix::from_element(1, 1, -sign * w / opts.bound)))
                .collect();
            out.push(RCon { c0, coefs });
        }
    }
    out
}

fn min_eig_all(cons: &[RCon], x: &DVector<f64>) -> f64 {
    cons.iter()
        .map(|k| crate::linalg::min_sym_eigenvalue(&k.eval(x)))
        .fold(f64::INFINITY, f64::min)
}

/// Solves `problem`: phase 1 for strict feasibility, then phase 2 for the objective.
pub fn solve(problem: &LmiProblem, opts: &SolverOptions) -> Result<Solution> {
    if !(opts.tolerance > 0.0 && opts.bound > 0.0 && opts.mu > 1.0 && opts.strict_rel >= 0.0) {
        return Err(Error::Input(format!("invalid solver options {opts:?}")));
    }
    let (y0, null) = match eliminate(problem) {
        Ok(v) => v,
        Err(Error::Infeasible(_)) => {
            return Ok(Solution {
                status: SolveStatus::Infeasible,
                objective: 0.0,
                values: vec![0.0; problem.n_vars()],
                margin: f64::NEG_INFINITY,
                gap: 0.0,
                iterations: 0,
            })
        }
        Err(e) => return Err(e),
    };
    if y0.amax() >= opts.bound {
        return Err(Error::Input("equality solution lies outside the variable box".into()));
    }
    let nz = null.ncols();
    let cons = reduce(problem, opts, &y0, &null);
    let lift = |z: &DVector<f64>| -> Vec<f64> { (&y0 + &null * z).iter().copied().collect() };
    let n_box = 2 * problem.n_vars();
    let n_lmi = cons.len() - n_box;

    // Phase 1 over (z, s).
    let z0 = DVector::zeros(nz);
    let worst0 = min_eig_all(&cons[..n_lmi], &z0);
    let mut iterations = 0;
    let mut z = z0;
    if worst0 <= 0.0 {
        let s_idx = nz;
        let s_floor = 1.0;
        let mut p1: Vec<RCon> = cons
            .iter()
            .enumerate()
            .map(|(k, rc)| {
                let mut rc = rc.clone();
                if k < n_lmi {
                    rc.coefs.push((s_idx, DMatrix::identity(rc.dim(), rc.dim())));
                }
                rc
            })
            .collect();
        p1.push(RCon {
            c0: DMatrix::from_element(1, 1, s_floor),
            coefs: vec![(s_idx, DMatrix::from_element(1, 1, 1.0))],
        });
        let mut c = DVector::zeros(nz + 1);
        c[s_idx] = 1.0;
        let bar = Barrier::new(p1, c);
        let mut x = DVector::zeros(nz + 1);
        x[s_idx] = 1.0 - worst0;
        let mut t = 1.0;
        loop {
            let step = bar.center(&mut x, t, &mut iterations, opts.max_iters);
            let s = x[s_idx];
            if s < 0.0 {
                break;
            }
            let gap = bar.degree / t;
            let fail = |status, margin| Solution {
                status,
                objective: problem.objective_value(&lift(&x.rows(0, nz).into_owned())),
                values: lift(&x.rows(0, nz).into_owned()),
                margin,
                gap,
                iterations,
            };
            match step {
                Step::Centered | Step::Precision if s - gap > 0.0 => {
                    return Ok(fail(SolveStatus::Infeasible, -(s - gap)))
                }
                Step::Centered if gap >= 1e-13 => {}
                _ => return Ok(fail(SolveStatus::MaxIter, -s)),
            }
            t *= opts.mu;
        }
        z = x.rows(0, nz).into_owned();
    }

    let c_red = null.transpose() * problem.objective_vector();
    if c_red.amax() == 0.0 {
        let values = lift(&z);
        return Ok(Solution {
            status: SolveStatus::Feasible,
            objective: problem.objective_value(&values),
            margin: min_eig_all(&cons[..n_lmi], &z),
            values,
            gap: 0.0,
            iterations,
        });
    }

    // Phase 2.
    let bar = Barrier::new(cons, c_red);
    let mut t = 1.0;
    let (status, gap) = loop {
        let step = bar.center(&mut z, t, &mut iterations, opts.max_iters);
        let obj = problem.objective_value(&lift(&z));
        let gap = bar.degree / t;
        match step {
            Step::Centered if gap <= opts.tolerance * obj.abs().max(1.0) => break (SolveStatus::Feasible, gap),
            Step::Centered => {}
            // Strictly feasible, and no further progress is representable.
            Step::Precision => break (SolveStatus::Feasible, gap),
            Step::Budget | Step::Failed => break (SolveStatus::MaxIter, gap),
        }
        t *= opts.mu;
    };
    let values = lift(&z);
    let margin = min_eig_all(&bar.cons[..n_lmi], &z);
    let box_ok = bar.cons[n_lmi..].iter().all(|k| k.eval(&z)[(0, 0)] > 0.0);
    let status = if status == SolveStatus::Feasible && !(margin > 0.0 && box_ok) { SolveStatus::MaxIter } else { status };
    Ok(Solution { status, objective: problem.objective_value(&values), values, margin, gap, iterations })
}
