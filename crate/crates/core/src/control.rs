//! Static output-feedback synthesis over polytopic transition ambiguity.
//!
//! The output-feedback LMIs are posed per mode `i` and per vertex `q` of the
//! ambiguity set of row `i`. Since the design matrix is affine in `q`, meeting
//! them at the vertices covers the whole polytope. A stabilising state
//! feedback `M` enters the design matrix as data and is computed separately.
//!
//! Mean-square checks use the mode-indexed Lyapunov condition
//! `sum_j P_ij Acl_j' V_j Acl_j - V_i < 0`, solved as a margin-maximising SDP.

use nalgebra::{DMatrix, DVector};
use serde_json::json;

use crate::error::{input_err, Error, Result};
use crate::linalg;
use crate::model::{matrix_to_rows, MjlsModel};
use crate::sdp::{self, AffineExpr, LmiProblem, MatVar, ScalarVar, SolveStatus, SolverOptions};

/// Candidate values of the design-matrix weight, tried in order.
pub const ALPHA_GRID: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];
/// Lower bound magnitude for the synthesis objective.
pub const DEFAULT_C: f64 = 1e3;
/// Simplex membership tolerance for vertices.
pub const VERTEX_TOL: f64 = 1e-9;
/// Mean-square margin above which a closed loop counts as stable.
pub const MS_STABLE_MARGIN: f64 = 1e-10;

/// Decision variables of the output-feedback LMIs.
#[derive(Debug, Clone)]
pub struct DesignVars {
    pub v1: Vec<MatVar>,
    pub v2: Vec<MatVar>,
    pub v4: Vec<MatVar>,
    pub h1: Vec<MatVar>,
    pub h2: Vec<MatVar>,
    pub g1: Vec<MatVar>,
    pub g2: Vec<MatVar>,
    pub q4: MatVar,
    pub l: MatVar,
    pub gamma: ScalarVar,
}

impl DesignVars {
    pub fn declare(problem: &mut LmiProblem, model: &MjlsModel) -> Self {
        let (ns, na, ny) = (model.ns(), model.na(), model.ny());
        let gamma = problem.scalar("gamma");
        let q4 = problem.symmetric("Q4", na);
        let l = problem.matrix("L", na, ny);
        let mut v = Self { v1: vec![], v2: vec![], v4: vec![], h1: vec![], h2: vec![], g1: vec![], g2: vec![], q4, l, gamma };
        for i in 0..model.n_modes() {
            v.v1.push(problem.symmetric(&format!("V1_{i}"), ns));
            v.v2.push(problem.matrix(&format!("V2_{i}"), na, ns));
            v.v4.push(problem.symmetric(&format!("V4_{i}"), na));
            v.h1.push(problem.matrix(&format!("H1_{i}"), ns, ns));
            v.h2.push(problem.matrix(&format!("H2_{i}"), na, ns));
            v.g1.push(problem.matrix(&format!("G1_{i}"), ns, ns));
            v.g2.push(problem.matrix(&format!("G2_{i}"), na, ns));
        }
        v
    }
}

/// Everything needed to assemble `O_i(q)`.
#[derive(Debug, Clone, Copy)]
pub struct DesignMatrixInputs<'a> {
    pub model: &'a MjlsModel,
    pub mode: usize,
    pub q: &'a DVector<f64>,
    pub m: &'a [DMatrix<f64>],
    pub alpha: f64,
    pub vars: &'a DesignVars,
}

fn check_simplex(q: &DVector<f64>, n: usize) -> Result<()> {
    if q.len() != n {
        return input_err(format!("vertex has {} entries, expected {n}", q.len()));
    }
    if q.iter().any(|&v| v < -VERTEX_TOL || !v.is_finite()) || (q.sum() - 1.0).abs() > VERTEX_TOL {
        return input_err(format!("vertex {:?} is not on the simplex", q.as_slice()));
    }
    Ok(())
}

fn check_gains(model: &MjlsModel, m: &[DMatrix<f64>]) -> Result<()> {
    if m.len() != model.n_modes() {
        return input_err(format!("{} state-feedback gains for {} modes", m.len(), model.n_modes()));
    }
    if let Some(bad) = m.iter().find(|g| g.shape() != (model.na(), model.ns())) {
        return input_err(format!("state-feedback gain has shape {:?}, expected {:?}", bad.shape(), (model.na(), model.ns())));
    }
    Ok(())
}

fn weighted(vars: &[MatVar], q: &DVector<f64>) -> AffineExpr {
    let (r, c) = vars[0].shape();
    vars.iter()
        .zip(q.iter())
        .filter(|(_, &w)| w != 0.0)
        .fold(AffineExpr::zeros(r, c), |acc, (v, &w)| acc.add(&v.expr().scale(w)).expect("same shape"))
}

/// Assembles the symmetric `2(ns+na)` design matrix `O_i(q)`.
///
/// Block rows act on `(x, u, x+, w)`. The `(3,1)` block is `G1 A - H1'`,
/// which makes the `H`/`G` terms a multiplier of `A x + B u - x+`.
pub fn build_design_matrix(inp: DesignMatrixInputs<'_>) -> Result<AffineExpr> {
    let DesignMatrixInputs { model, mode: i, q, m, alpha, vars } = inp;
    if i >= model.n_modes() {
        return input_err(format!("mode {i} out of range"));
    }
    check_simplex(q, model.n_modes())?;
    check_gains(model, m)?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return input_err(format!("alpha must be nonnegative, got {alpha}"));
    }
    if vars.v1.len() != model.n_modes() || vars.q4.shape() != (model.na(), model.na()) || vars.l.shape() != (model.na(), model.ny()) {
        return input_err("design variables do not match the model");
    }
    let (a, b, c) = (model.a(i), model.b(i), model.c(i));
    let mi = &m[i];
    let mt = mi.transpose();
    let (h1, h2, g1, g2) = (vars.h1[i].expr(), vars.h2[i].expr(), vars.g1[i].expr(), vars.g2[i].expr());
    let q4 = vars.q4.expr();
    let lc = vars.l.expr().right_mul(c)?;
    let two_a = 2.0 * alpha;

    let h1a = h1.right_mul(a)?;
    let mlc = lc.left_mul(&mt)?;
    let o11 = h1a
        .sym()?
        .sub(&vars.v1[i].expr())?
        .add(&q4.left_mul(&mt)?.right_mul(mi)?.scale(two_a))?
        .sub(&mlc.sym()?.scale(two_a))?;
    let o21 = h2.right_mul(a)?.add(&h1.right_mul(b)?.transpose())?.add(&lc.scale(two_a))?;
    let o22 = h2.right_mul(b)?.sym()?.sub(&q4.scale(two_a))?;
    let o31 = g1.right_mul(a)?.sub(&h1.transpose())?;
    let o32 = g1.right_mul(b)?.sub(&h2.transpose())?;
    let o33 = weighted(&vars.v1, q).sub(&g1.sym()?)?;
    let o41 = g2.right_mul(a)?.add(&lc)?;
    let o42 = g2.right_mul(b)?.add(&q4)?;
    let o43 = weighted(&vars.v2, q).sub(&g2)?;
    let o44 = weighted(&vars.v4, q).sub(&q4.scale(2.0))?;
    AffineExpr::symmetric_blocks(&[vec![o11], vec![o21, o22], vec![o31, o32, o33], vec![o41, o42, o43, o44]])
}

/// Where a gain came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Robust,
    Stochastic,
    /// Data-driven synthesis at step `t`.
    Dr(usize),
    /// Placeholder gain used before any synthesis succeeded.
    Fallback,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Robust => write!(f, "robust"),
            Provenance::Stochastic => write!(f, "stochastic"),
            Provenance::Dr(t) => write!(f, "dr({t})"),
            Provenance::Fallback => write!(f, "fallback"),
        }
    }
}

/// Lyapunov data backing a synthesized gain.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub gamma: f64,
    pub alpha: f64,
    /// `V_{1,i}` per mode.
    pub v: Vec<DMatrix<f64>>,
    pub vertex_sets: Vec<Vec<DVector<f64>>>,
    /// `-lambda_max(O_i(q))` per (mode, vertex index).
    pub margins: Vec<(usize, usize, f64)>,
    /// Smallest eigenvalue of `V_i - Acl_i' (sum_j q_j V_j) Acl_i` over all (mode, vertex).
    pub lyapunov_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerGain {
    pub k: DMatrix<f64>,
    pub provenance: Provenance,
    pub certificate: Option<Certificate>,
}

impl ControllerGain {
    pub fn zero(model: &MjlsModel) -> Self {
        Self { k: DMatrix::zeros(model.na(), model.ny()), provenance: Provenance::Fallback, certificate: None }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let cert = self.certificate.as_ref().map(|c| {
            json!({
                "gamma": c.gamma,
                "alpha": c.alpha,
                "lyapunov_margin": c.lyapunov_margin,
                "V": c.v.iter().map(matrix_to_rows).collect::<Vec<_>>(),
                "vertices": c.vertex_sets.iter()
                    .map(|vs| vs.iter().map(|q| q.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
                "margins": c.margins.iter()
                    .map(|&(i, l, m)| json!({"mode": i, "vertex": l, "margin": m}))
                    .collect::<Vec<_>>(),
            })
        });
        json!({
            "K": matrix_to_rows(&self.k),
            "provenance": self.provenance.to_string(),
            "certificate": cert,
        })
    }
}

/// Result of one output-feedback solve.
#[derive(Debug, Clone, PartialEq)]
pub enum SynthesisOutcome {
    Feasible { gamma: f64, gain: ControllerGain },
    /// No certified gain; `gamma` is the best objective when the solver produced one.
    Infeasible { gamma: Option<f64>, status: SolveStatus, reason: String },
}

impl SynthesisOutcome {
    pub fn gain(&self) -> Option<&ControllerGain> {
        match self {
            SynthesisOutcome::Feasible { gain, .. } => Some(gain),
            SynthesisOutcome::Infeasible { .. } => None,
        }
    }
}

fn check_vertex_sets(model: &MjlsModel, sets: &[Vec<DVector<f64>>]) -> Result<()> {
    if sets.len() != model.n_modes() {
        return input_err(format!("{} vertex sets for {} modes", sets.len(), model.n_modes()));
    }
    for s in sets {
        if s.is_empty() {
            return input_err("empty vertex set");
        }
        for q in s {
            check_simplex(q, model.n_modes())?;
        }
    }
    Ok(())
}

/// Unit vectors: vertices of the whole simplex for every row.
pub fn simplex_vertex_sets(n_modes: usize) -> Vec<Vec<DVector<f64>>> {
    let units: Vec<DVector<f64>> = (0..n_modes)
        .map(|j| {
            let mut e = DVector::zeros(n_modes);
            e[j] = 1.0;
            e
        })
        .collect();
    vec![units; n_modes]
}

/// Singleton vertex sets from known transition rows.
pub fn singleton_vertex_sets(p: &DMatrix<f64>) -> Vec<Vec<DVector<f64>>> {
    (0..p.nrows()).map(|i| vec![p.row(i).transpose()]).collect()
}

/// Mode-dependent state feedback `M_i` such that
/// `(A_i + B_i M_i)' (sum_j q_j V_j) (A_i + B_i M_i) < V_i` for every vertex
/// `q` of row `i`, via `W_i = V_i^{-1}`, `Y_i = M_i W_i`.
pub fn synthesize_state_feedback(model: &MjlsModel, vertex_sets: &[Vec<DVector<f64>>]) -> Result<Vec<DMatrix<f64>>> {
    check_vertex_sets(model, vertex_sets)?;
    let (nm, ns, na) = (model.n_modes(), model.ns(), model.na());
    let mut p = LmiProblem::new();
    let w: Vec<MatVar> = (0..nm).map(|i| p.symmetric(&format!("W_{i}"), ns)).collect();
    let y: Vec<MatVar> = (0..nm).map(|i| p.matrix(&format!("Y_{i}"), na, ns)).collect();
    for i in 0..nm {
        p.require_pd(&format!("W_{i}"), w[i].expr())?;
        let acl = w[i].expr().left_mul(model.a(i))?.add(&y[i].expr().left_mul(model.b(i))?)?;
        for (l, q) in vertex_sets[i].iter().enumerate() {
            // Schur complement of sum_j q_j Acl W_i' W_j^{-1} ... laid out as one block column.
            let mut lower: Vec<Vec<AffineExpr>> = vec![vec![w[i].expr()]];
            for j in 0..nm {
                let mut row = vec![acl.scale(q[j].max(0.0).sqrt())];
                for k in 0..nm {
                    if k < j {
                        row.push(AffineExpr::zeros(ns, ns));
                    }
                }
                row.push(w[j].expr());
                lower.push(row);
            }
            p.require_pd(&format!("sf_{i}_{l}"), AffineExpr::symmetric_blocks(&lower)?)?;
        }
    }
    let sol = sdp::solve(&p, &SolverOptions::default())?;
    if sol.status != SolveStatus::Feasible {
        return Err(Error::Infeasible(format!("no robust state feedback (solver status {:?})", sol.status)));
    }
    let mut gains = Vec::with_capacity(nm);
    for i in 0..nm {
        let wi = w[i].value(&sol.values);
        let inv = wi
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Infeasible("no robust state feedback (singular W)".into()))?
            .inverse();
        gains.push(y[i].value(&sol.values) * inv);
    }
    Ok(gains)
}

fn closed_loop(model: &MjlsModel, k: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    (0..model.n_modes()).map(|j| model.a(j) + model.b(j) * k * model.c(j)).collect()
}

/// `min eig (V_i - Acl_i' (sum_j q_j V_j) Acl_i)` over modes and vertices.
pub fn certificate_margin(acl: &[DMatrix<f64>], v: &[DMatrix<f64>], vertex_sets: &[Vec<DVector<f64>>]) -> f64 {
    let mut worst = f64::INFINITY;
    for (i, set) in vertex_sets.iter().enumerate() {
        for q in set {
            let mut ev = DMatrix::zeros(v[i].nrows(), v[i].ncols());
            for (j, vj) in v.iter().enumerate() {
                ev += vj * q[j];
            }
            let lhs = &v[i] - acl[i].transpose() * ev * &acl[i];
            worst = worst.min(linalg::min_sym_eigenvalue(&lhs));
        }
    }
    worst
}

/// Solves the output-feedback LMIs at a fixed `alpha`.
pub fn synthesize_output_feedback(
    model: &MjlsModel,
    vertex_sets: &[Vec<DVector<f64>>],
    m: &[DMatrix<f64>],
    alpha: f64,
    c: f64,
    provenance: Provenance,
    opts: &SolverOptions,
) -> Result<SynthesisOutcome> {
    check_vertex_sets(model, vertex_sets)?;
    check_gains(model, m)?;
    if !(alpha > 0.0) || !(c > 0.0) {
        return input_err(format!("alpha and c must be positive (alpha = {alpha}, c = {c})"));
    }
    let nm = model.n_modes();
    let mut p = LmiProblem::new();
    let vars = DesignVars::declare(&mut p, model);
    let dim = 2 * (model.ns() + model.na());
    for i in 0..nm {
        let coupling = AffineExpr::symmetric_blocks(&[vec![vars.v1[i].expr()], vec![vars.v2[i].expr(), vars.v4[i].expr()]])?;
        p.require_pd(&format!("coupling_{i}"), coupling)?;
    }
    let mut labels = Vec::new();
    for i in 0..nm {
        for (l, q) in vertex_sets[i].iter().enumerate() {
            let o = build_design_matrix(DesignMatrixInputs { model, mode: i, q, m, alpha, vars: &vars })?;
            let g = AffineExpr::term(vars.gamma.0, DMatrix::identity(dim, dim));
            let idx = p.require_pd(&format!("O_{i}_{l}"), g.sub(&o)?)?;
            labels.push((i, l, idx, o));
        }
    }
    p.require_psd("gamma >= -c", vars.gamma.expr().add(&AffineExpr::constant(DMatrix::from_element(1, 1, c)))?)?;
    p.require_pd("Q4", vars.q4.expr())?;
    p.minimize(&vars.gamma.expr())?;

    let sol = sdp::solve(&p, opts)?;
    let gamma = sol.values[vars.gamma.0];
    if sol.status != SolveStatus::Feasible {
        return Ok(SynthesisOutcome::Infeasible { gamma: None, status: sol.status, reason: format!("solver status {:?}", sol.status) });
    }
    if gamma >= 0.0 {
        return Ok(SynthesisOutcome::Infeasible { gamma: Some(gamma), status: sol.status, reason: "optimal gamma is not negative".into() });
    }
    let q4 = vars.q4.value(&sol.values);
    let q4_inv = q4
        .cholesky()
        .ok_or_else(|| Error::Precondition("Q4 is not positive definite at a negative optimum".into()))?
        .inverse();
    let k = q4_inv * vars.l.value(&sol.values);
    if k.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("non-finite gain".into()));
    }
    let margins = labels
        .iter()
        .map(|(i, l, _, o)| {
            let ov = o.evaluate(&sol.values);
            (*i, *l, linalg::min_sym_eigenvalue(&(-ov)))
        })
        .collect();
    let v: Vec<DMatrix<f64>> = vars.v1.iter().map(|x| x.value(&sol.values)).collect();
    let lyapunov_margin = certificate_margin(&closed_loop(model, &k), &v, vertex_sets);
    if !(lyapunov_margin > 0.0) || v.iter().any(|vi| linalg::min_sym_eigenvalue(vi) <= 0.0) {
        return Ok(SynthesisOutcome::Infeasible {
            gamma: Some(gamma),
            status: sol.status,
            reason: format!("certificate check failed (margin {lyapunov_margin:.3e})"),
        });
    }
    let certificate = Certificate { gamma, alpha, v, vertex_sets: vertex_sets.to_vec(), margins, lyapunov_margin };
    Ok(SynthesisOutcome::Feasible { gamma, gain: ControllerGain { k, provenance, certificate: Some(certificate) } })
}

/// Tries every alpha in [`ALPHA_GRID`] and returns the first certified gain.
pub fn synthesize_with_alpha_grid(
    model: &MjlsModel,
    vertex_sets: &[Vec<DVector<f64>>],
    m: &[DMatrix<f64>],
    c: f64,
    provenance: Provenance,
    opts: &SolverOptions,
) -> Result<SynthesisOutcome> {
    let mut last = None;
    for alpha in ALPHA_GRID {
        let out = synthesize_output_feedback(model, vertex_sets, m, alpha, c, provenance, opts)?;
        if matches!(out, SynthesisOutcome::Feasible { .. }) {
            return Ok(out);
        }
        last = Some(out);
    }
    Ok(last.expect("grid is nonempty"))
}

/// Full pipeline: reuse `held_m` when given and recompute it only if that fails.
/// Returns the outcome together with the state-feedback gains used.
pub fn design_controller(
    model: &MjlsModel,
    vertex_sets: &[Vec<DVector<f64>>],
    held_m: Option<&[DMatrix<f64>]>,
    provenance: Provenance,
    opts: &SolverOptions,
) -> Result<(SynthesisOutcome, Option<Vec<DMatrix<f64>>>)> {
    if let Some(m) = held_m {
        let out = synthesize_with_alpha_grid(model, vertex_sets, m, DEFAULT_C, provenance, opts)?;
        if matches!(out, SynthesisOutcome::Feasible { .. }) {
            return Ok((out, Some(m.to_vec())));
        }
    }
    let m = match synthesize_state_feedback(model, vertex_sets) {
        Ok(m) => m,
        Err(Error::Infeasible(reason)) => {
            return Ok((SynthesisOutcome::Infeasible { gamma: None, status: SolveStatus::Infeasible, reason }, None))
        }
        Err(e) => return Err(e),
    };
    let out = synthesize_with_alpha_grid(model, vertex_sets, &m, DEFAULT_C, provenance, opts)?;
    Ok((out, Some(m)))
}

/// Outcome of a mean-square stability check for one transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MsReport {
    pub stable: bool,
    /// Certificate matrices, normalised to unit total trace.
    pub v: Vec<DMatrix<f64>>,
    /// `min eig(V_i - sum_j P_ij Acl_j' V_j Acl_j)` per mode.
    pub margins: Vec<f64>,
}

/// Mean-square stability of `x+ = Acl_mode x` under transition matrix `p`,
/// given the closed-loop matrices directly.
pub fn verify_ms_closed_loop(acl: &[DMatrix<f64>], p: &DMatrix<f64>) -> Result<MsReport> {
    let nm = acl.len();
    if nm == 0 || p.shape() != (nm, nm) {
        return input_err(format!("transition matrix {:?} for {nm} modes", p.shape()));
    }
    if p.iter().any(|&v| v < -VERTEX_TOL) || (0..nm).any(|i| (p.row(i).sum() - 1.0).abs() > VERTEX_TOL) {
        return input_err("transition matrix is not stochastic");
    }
    let ns = acl[0].nrows();
    let mut prob = LmiProblem::new();
    let s = prob.scalar("s");
    let v: Vec<MatVar> = (0..nm).map(|i| prob.symmetric(&format!("V_{i}"), ns)).collect();
    let s_eye = AffineExpr::term(s.0, DMatrix::identity(ns, ns));
    for i in 0..nm {
        prob.require_psd(&format!("V_{i}"), v[i].expr().sub(&s_eye)?)?;
        let mut lhs = v[i].expr().sub(&s_eye)?;
        for j in 0..nm {
            if p[(i, j)] != 0.0 {
                let t = v[j].expr().left_mul(&acl[j].transpose())?.right_mul(&acl[j])?.scale(p[(i, j)]);
                lhs = lhs.sub(&t)?;
            }
        }
        prob.require_psd(&format!("decrease_{i}"), lhs)?;
    }
    let mut trace_terms = Vec::new();
    for vi in &v {
        let e = vi.expr();
        for (id, coef) in e.terms() {
            let tr = coef.trace();
            if tr != 0.0 {
                trace_terms.push((id, tr));
            }
        }
    }
    prob.add_equality(trace_terms, 1.0)?;
    prob.minimize(&s.expr().scale(-1.0))?;
    let sol = sdp::solve(&prob, &SolverOptions::default())?;
    let vals: Vec<DMatrix<f64>> = v.iter().map(|x| x.value(&sol.values)).collect();
    let margins: Vec<f64> = (0..nm)
        .map(|i| {
            let mut lhs = vals[i].clone();
            for j in 0..nm {
                lhs -= acl[j].transpose() * &vals[j] * &acl[j] * p[(i, j)];
            }
            linalg::min_sym_eigenvalue(&lhs)
        })
        .collect();
    let stable = sol.status != SolveStatus::Infeasible
        && margins.iter().all(|&m| m > MS_STABLE_MARGIN)
        && vals.iter().all(|vi| linalg::min_sym_eigenvalue(vi) > MS_STABLE_MARGIN);
    Ok(MsReport { stable, v: vals, margins })
}

/// Mean-square stability of `u = K y` on `model` under transition matrix `p`.
pub fn verify_ms_stability(model: &MjlsModel, k: &DMatrix<f64>, p: &DMatrix<f64>) -> Result<MsReport> {
    if k.shape() != (model.na(), model.ny()) {
        return input_err(format!("gain has shape {:?}, expected {:?}", k.shape(), (model.na(), model.ny())));
    }
    verify_ms_closed_loop(&closed_loop(model, k), p)
}

/// Every transition matrix whose row `i` is a vertex of `vertex_sets[i]`.
pub fn vertex_combinations(vertex_sets: &[Vec<DVector<f64>>]) -> Vec<DMatrix<f64>> {
    let nm = vertex_sets.len();
    let mut out = Vec::new();
    let mut idx = vec![0usize; nm];
    if vertex_sets.iter().any(|s| s.is_empty()) {
        return out;
    }
    loop {
        let mut p = DMatrix::zeros(nm, vertex_sets[0][0].len());
        for i in 0..nm {
            p.set_row(i, &vertex_sets[i][idx[i]].transpose());
        }
        out.push(p);
        let mut r = nm;
        loop {
            if r == 0 {
                return out;
            }
            r -= 1;
            idx[r] += 1;
            if idx[r] < vertex_sets[r].len() {
                break;
            }
            idx[r] = 0;
        }
    }
}

/// Runs [`verify_ms_stability`] at every vertex combination.
pub fn verify_at_vertices(model: &MjlsModel, k: &DMatrix<f64>, vertex_sets: &[Vec<DVector<f64>>]) -> Result<Vec<MsReport>> {
    check_vertex_sets(model, vertex_sets)?;
    vertex_combinations(vertex_sets).iter().map(|p| verify_ms_stability(model, k, p)).collect()
}
