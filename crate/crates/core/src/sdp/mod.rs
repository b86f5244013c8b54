//! Small dense LMI solver.
//!
//! Problems are stated over scalar, symmetric-matrix and full-matrix decision
//! variables. Each constraint is an affine symmetric matrix expression
//! required to be positive (semi)definite. Strict constraints are enforced
//! with a margin `strict_rel * scale(expr)`. Solving runs a phase-1 margin
//! maximisation followed by a log-det barrier path on the objective; see
//! [`solver`].
//!
//! [`verify`] re-checks an assignment with symmetric eigenvalue
//! decompositions of the evaluated constraints and shares no code with the
//! barrier iterations.

mod expr;
pub mod solver;

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

pub use expr::{AffineExpr, VarId};
pub use solver::{solve, SolveStatus, Solution, SolverOptions};

use crate::error::{input_err, Result};
use crate::linalg;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarKind {
    Scalar,
    Symmetric(usize),
    Full(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
struct VarBlock {
    name: String,
    kind: VarKind,
    offset: usize,
}

/// Handle to a declared scalar variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalarVar(pub VarId);

impl ScalarVar {
    /// 1x1 expression of the variable.
    pub fn expr(&self) -> AffineExpr {
        AffineExpr::term(self.0, DMatrix::from_element(1, 1, 1.0))
    }
}

/// Handle to a declared matrix variable (symmetric ones are parameterised
/// by their upper triangle).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatVar {
    offset: usize,
    rows: usize,
    cols: usize,
    symmetric: bool,
}

impl MatVar {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn n_scalars(&self) -> usize {
        if self.symmetric {
            self.rows * (self.rows + 1) / 2
        } else {
            self.rows * self.cols
        }
    }

    fn entry_terms(&self) -> Vec<(VarId, DMatrix<f64>)> {
        let mut out = Vec::with_capacity(self.n_scalars());
        let mut id = self.offset;
        if self.symmetric {
            for i in 0..self.rows {
                for j in i..self.rows {
                    let mut e = DMatrix::zeros(self.rows, self.rows);
                    e[(i, j)] = 1.0;
                    e[(j, i)] = 1.0;
                    out.push((id, e));
                    id += 1;
                }
            }
        } else {
            for i in 0..self.rows {
                for j in 0..self.cols {
                    let mut e = DMatrix::zeros(self.rows, self.cols);
                    e[(i, j)] = 1.0;
                    out.push((id, e));
                    id += 1;
                }
            }
        }
        out
    }

    /// The variable as an affine expression.
    pub fn expr(&self) -> AffineExpr {
        let mut e = AffineExpr::zeros(self.rows, self.cols);
        for (id, coef) in self.entry_terms() {
            e = e.add(&AffineExpr::term(id, coef)).expect("same shape");
        }
        e
    }

    /// Numeric value under a variable vector.
    pub fn value(&self, values: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for (id, coef) in self.entry_terms() {
            m += coef * values[id];
        }
        m
    }

    /// Writes `m` into the variable vector (upper triangle for symmetric variables).
    pub fn assign(&self, values: &mut [f64], m: &DMatrix<f64>) {
        let mut id = self.offset;
        if self.symmetric {
            for i in 0..self.rows {
                for j in i..self.rows {
                    values[id] = m[(i, j)];
                    id += 1;
                }
            }
        } else {
            for i in 0..self.rows {
                for j in 0..self.cols {
                    values[id] = m[(i, j)];
                    id += 1;
                }
            }
        }
    }
}

/// One semidefinite constraint `expr >= 0` (or `> 0` when strict).
#[derive(Debug, Clone, PartialEq)]
pub struct LmiConstraint {
    pub name: String,
    pub expr: AffineExpr,
    pub strict: bool,
}

/// Linear equality `sum coef_k y_k = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearEquality {
    pub terms: Vec<(VarId, f64)>,
    pub rhs: f64,
}

/// A linear objective over semidefinite and linear equality constraints.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LmiProblem {
    n_vars: usize,
    blocks: Vec<VarBlock>,
    constraints: Vec<LmiConstraint>,
    equalities: Vec<LinearEquality>,
    objective: Vec<(VarId, f64)>,
}

impl LmiProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }
    pub fn constraints(&self) -> &[LmiConstraint] {
        &self.constraints
    }
    pub fn equalities(&self) -> &[LinearEquality] {
        &self.equalities
    }

    fn declare(&mut self, name: &str, kind: VarKind, count: usize) -> usize {
        let offset = self.n_vars;
        self.blocks.push(VarBlock { name: name.to_string(), kind, offset });
        self.n_vars += count;
        offset
    }

    pub fn scalar(&mut self, name: &str) -> ScalarVar {
        ScalarVar(self.declare(name, VarKind::Scalar, 1))
    }

    pub fn symmetric(&mut self, name: &str, n: usize) -> MatVar {
        let offset = self.declare(name, VarKind::Symmetric(n), n * (n + 1) / 2);
        MatVar { offset, rows: n, cols: n, symmetric: true }
    }

    pub fn matrix(&mut self, name: &str, rows: usize, cols: usize) -> MatVar {
        let offset = self.declare(name, VarKind::Full(rows, cols), rows * cols);
        MatVar { offset, rows, cols, symmetric: false }
    }

    fn push_constraint(&mut self, name: &str, expr: AffineExpr, strict: bool) -> Result<usize> {
        if expr.nrows() != expr.ncols() || expr.nrows() == 0 {
            return input_err(format!("constraint '{name}' is not square: {:?}", expr.shape()));
        }
        if !expr.is_symmetric(1e-12) {
            return input_err(format!("constraint '{name}' is not symmetric"));
        }
        if expr.max_var().is_some_and(|v| v >= self.n_vars) {
            return input_err(format!("constraint '{name}' references an undeclared variable"));
        }
        self.constraints.push(LmiConstraint { name: name.to_string(), expr, strict });
        Ok(self.constraints.len() - 1)
    }

    /// `expr > 0`; returns the constraint index.
    pub fn require_pd(&mut self, name: &str, expr: AffineExpr) -> Result<usize> {
        self.push_constraint(name, expr, true)
    }

    /// `expr >= 0`
    pub fn require_psd(&mut self, name: &str, expr: AffineExpr) -> Result<usize> {
        self.push_constraint(name, expr, false)
    }

    /// `expr < 0`, stored as `-expr > 0`.
    pub fn require_nd(&mut self, name: &str, expr: AffineExpr) -> Result<usize> {
        self.push_constraint(name, expr.scale(-1.0), true)
    }

    pub fn add_equality(&mut self, terms: Vec<(VarId, f64)>, rhs: f64) -> Result<()> {
        if terms.iter().any(|(v, _)| *v >= self.n_vars) {
            return input_err("equality references an undeclared variable");
        }
        self.equalities.push(LinearEquality { terms, rhs });
        Ok(())
    }

    /// Sets the objective to the 1x1 affine expression `obj` (constant dropped).
    pub fn minimize(&mut self, obj: &AffineExpr) -> Result<()> {
        if obj.shape() != (1, 1) {
            return input_err("objective must be scalar");
        }
        self.objective = obj.terms().map(|(k, v)| (k, v[(0, 0)])).collect();
        Ok(())
    }

    pub fn objective_vector(&self) -> DVector<f64> {
        let mut c = DVector::zeros(self.n_vars);
        for &(k, v) in &self.objective {
            c[k] += v;
        }
        c
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(k, v)| v * values[k]).sum()
    }

    /// Text dump: variables, objective, and per-constraint structure.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "variables {}", self.n_vars);
        for b in &self.blocks {
            let kind = match b.kind {
                VarKind::Scalar => "scalar".to_string(),
                VarKind::Symmetric(n) => format!("sym {n}x{n}"),
                VarKind::Full(r, c) => format!("full {r}x{c}"),
            };
            let _ = writeln!(s, "  {} {} @{}", b.name, kind, b.offset);
        }
        let _ = write!(s, "objective");
        for (k, v) in &self.objective {
            let _ = write!(s, " {v:+}*{}", self.var_label(*k));
        }
        s.push('\n');
        for (i, c) in self.constraints.iter().enumerate() {
            let rel = if c.strict { ">" } else { ">=" };
            let _ = writeln!(
                s,
                "constraint {i} '{}' dim {} {rel} 0 const_norm {:.6e}",
                c.name,
                c.expr.nrows(),
                c.expr.constant_part().norm()
            );
            for (k, coef) in c.expr.terms() {
                let _ = writeln!(s, "  {} coef_norm {:.6e}", self.var_label(k), coef.norm());
            }
        }
        for e in &self.equalities {
            let lhs: Vec<String> = e.terms.iter().map(|(k, v)| format!("{v:+}*{}", self.var_label(*k))).collect();
            let _ = writeln!(s, "equality {} = {}", lhs.join(" "), e.rhs);
        }
        s
    }

    fn var_label(&self, id: VarId) -> String {
        let b = self
            .blocks
            .iter()
            .rev()
            .find(|b| b.offset <= id)
            .expect("ids start at zero");
        match b.kind {
            VarKind::Scalar => b.name.clone(),
            _ => format!("{}[{}]", b.name, id - b.offset),
        }
    }
}

/// Eigenvalue audit of an assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// Smallest eigenvalue of every constraint expression.
    pub min_eigenvalues: Vec<f64>,
    /// Indices of constraints whose smallest eigenvalue is below `-margin`.
    pub violated: Vec<usize>,
    pub max_equality_residual: f64,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.violated.is_empty()
    }
    pub fn worst(&self) -> f64 {
        self.min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Evaluates every constraint at `values` and checks its spectrum.
pub fn verify(values: &[f64], problem: &LmiProblem, margin: f64) -> Result<VerifyReport> {
    if values.len() != problem.n_vars {
        return input_err(format!("assignment has {} values, problem has {}", values.len(), problem.n_vars));
    }
    let min_eigenvalues: Vec<f64> = problem
        .constraints
        .iter()
        .map(|c| linalg::min_sym_eigenvalue(&c.expr.evaluate(values)))
        .collect();
    let violated = min_eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &e)| e < -margin)
        .map(|(i, _)| i)
        .collect();
    let max_equality_residual = problem
        .equalities
        .iter()
        .map(|e| (e.terms.iter().map(|&(k, v)| v * values[k]).sum::<f64>() - e.rhs).abs())
        .fold(0.0, f64::max);
    Ok(VerifyReport { min_eigenvalues, violated, max_equality_residual })
}
