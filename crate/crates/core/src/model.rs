//! System representation for Markov jump linear systems
//!
//! ```text
//! x[t+1] = A[m(t)] x[t] + B[m(t)] u[t]
//! y[t]   = C[m(t)] x[t]
//! ```
//!
//! together with the stacked measurement algebra over a mode path
//! `y = O(path) x0 + G(path) u`, a Markov-chain sampler and the JSON model
//! format.
//!
//! Mode labels are 1-based at every external boundary (JSON, CSV, CLI,
//! `Display`) and 0-based inside the library. [`Path::from_labels`] and
//! [`Path::labels`] are the only conversion points.

use std::fmt;
use std::path::Path as FsPath;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};

/// Row sums of a stochastic matrix must be within this distance of one.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Per-mode system matrices of a Markov jump linear system.
#[derive(Debug, Clone, PartialEq)]
pub struct MjlsModel {
    ns: usize,
    na: usize,
    ny: usize,
    a: Vec<DMatrix<f64>>,
    b: Vec<DMatrix<f64>>,
    c: Vec<DMatrix<f64>>,
}

impl MjlsModel {
    pub fn new(a: Vec<DMatrix<f64>>, b: Vec<DMatrix<f64>>, c: Vec<DMatrix<f64>>) -> Result<Self> {
        if a.is_empty() {
            return input_err("model needs at least one mode");
        }
        if a.len() != b.len() || a.len() != c.len() {
            return input_err(format!(
                "mode count mismatch: {} A, {} B, {} C matrices",
                a.len(),
                b.len(),
                c.len()
            ));
        }
        let ns = a[0].nrows();
        let na = b[0].ncols();
        let ny = c[0].nrows();
        if ns == 0 {
            return input_err("state dimension must be positive");
        }
        for (i, ((ai, bi), ci)) in a.iter().zip(&b).zip(&c).enumerate() {
            let label = i + 1;
            if ai.shape() != (ns, ns) {
                return input_err(format!("A_{label} is {:?}, expected ({ns}, {ns})", ai.shape()));
            }
            if bi.shape() != (ns, na) {
                return input_err(format!("B_{label} is {:?}, expected ({ns}, {na})", bi.shape()));
            }
            if ci.shape() != (ny, ns) {
                return input_err(format!("C_{label} is {:?}, expected ({ny}, {ns})", ci.shape()));
            }
        }
        Ok(Self { ns, na, ny, a, b, c })
    }

    pub fn n_modes(&self) -> usize {
        self.a.len()
    }
    pub fn ns(&self) -> usize {
        self.ns
    }
    pub fn na(&self) -> usize {
        self.na
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn a(&self, mode: usize) -> &DMatrix<f64> {
        &self.a[mode]
    }
    pub fn b(&self, mode: usize) -> &DMatrix<f64> {
        &self.b[mode]
    }
    pub fn c(&self, mode: usize) -> &DMatrix<f64> {
        &self.c[mode]
    }

    pub fn check_path(&self, path: &Path) -> Result<()> {
        match path.modes().iter().find(|&&m| m >= self.n_modes()) {
            Some(&bad) => input_err(format!(
                "mode label {} outside 1..={}",
                bad + 1,
                self.n_modes()
            )),
            None => Ok(()),
        }
    }

    /// One step of the state recursion.
    pub fn next_state(&self, mode: usize, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.a[mode] * x + &self.b[mode] * u
    }

    pub fn output(&self, mode: usize, x: &DVector<f64>) -> DVector<f64> {
        &self.c[mode] * x
    }
}

/// Row-stochastic transition matrix of the mode chain, `P[i][j] = Pr(j | i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix(DMatrix<f64>);

impl TransitionMatrix {
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        if p.nrows() == 0 || !p.is_square() {
            return input_err(format!("transition matrix must be square, got {:?}", p.shape()));
        }
        for (i, row) in p.row_iter().enumerate() {
            if row.iter().any(|&v| !v.is_finite() || v < 0.0) {
                return input_err(format!("row {} has a negative or non-finite entry", i + 1));
            }
            let s: f64 = row.sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return input_err(format!("row {} sums to {s}, not 1", i + 1));
            }
        }
        Ok(Self(p))
    }

    pub fn uniform(n_modes: usize) -> Self {
        Self(DMatrix::from_element(n_modes, n_modes, 1.0 / n_modes as f64))
    }

    pub fn from_rows(rows: &[DVector<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut p = DMatrix::zeros(n, n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return input_err("row length does not match row count");
            }
            p.set_row(i, &r.transpose());
        }
        Self::new(p)
    }

    pub fn n_modes(&self) -> usize {
        self.0.nrows()
    }
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
    pub fn row(&self, i: usize) -> DVector<f64> {
        self.0.row(i).transpose()
    }

    /// Some power of the matrix is entrywise positive. Powers up to the
    /// Wielandt bound `(n-1)^2 + 1` suffice for primitive matrices.
    pub fn is_ergodic(&self) -> bool {
        let n = self.n_modes();
        let pattern = self.0.map(|v| if v > 0.0 { 1.0 } else { 0.0 });
        let mut power = pattern.clone();
        for _ in 0..(n - 1) * (n - 1) + 1 {
            if power.iter().all(|&v| v > 0.0) {
                return true;
            }
            power = (&power * &pattern).map(|v| if v > 0.0 { 1.0 } else { 0.0 });
        }
        false
    }

    /// Draws the successor of `mode` by inverse-CDF sampling of its row.
    pub fn sample_next<R: Rng + ?Sized>(&self, mode: usize, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let n = self.n_modes();
        for j in 0..n {
            acc += self.0[(mode, j)];
            if u < acc {
                return j;
            }
        }
        // rounding left u above the accumulated mass: take the last positive entry
        (0..n).rev().find(|&j| self.0[(mode, j)] > 0.0).unwrap_or(mode)
    }
}

/// Samples `steps` transitions of the chain from `start` (0-based), returning
/// `steps + 1` modes. Reproducible for a fixed seed.
pub fn sample_chain(p: &TransitionMatrix, start: usize, steps: usize, seed: u64) -> Result<Vec<usize>> {
    if start >= p.n_modes() {
        return input_err(format!("initial mode {} outside 1..={}", start + 1, p.n_modes()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = Vec::with_capacity(steps + 1);
    modes.push(start);
    for _ in 0..steps {
        let next = p.sample_next(*modes.last().unwrap(), &mut rng);
        modes.push(next);
    }
    Ok(modes)
}

/// A finite mode sequence over an observation window, indexed from the
/// start of the window. Stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path(Vec<usize>);

impl Path {
    /// Builds a path from 0-based mode indices.
    pub fn new(modes: Vec<usize>) -> Result<Self> {
        if modes.is_empty() {
            return input_err("path must contain at least one mode");
        }
        Ok(Self(modes))
    }

    /// Builds a path from 1-based mode labels.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        if labels.contains(&0) {
            return input_err("mode labels are 1-based");
        }
        Self::new(labels.iter().map(|l| l - 1).collect())
    }

    pub fn constant(mode: usize, len: usize) -> Self {
        Self(vec![mode; len.max(1)])
    }

    pub fn modes(&self) -> &[usize] {
        &self.0
    }
    pub fn labels(&self) -> Vec<usize> {
        self.0.iter().map(|m| m + 1).collect()
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    /// Window length `N`, i.e. the number of transitions in the path.
    pub fn horizon(&self) -> usize {
        self.0.len() - 1
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn extended(&self, mode: usize) -> Self {
        let mut v = self.0.clone();
        v.push(mode);
        Self(v)
    }

    /// Drops the first `k` modes; `None` when that would empty the path.
    pub fn dropped_front(&self, k: usize) -> Option<Self> {
        (k < self.0.len()).then(|| Self(self.0[k..].to_vec()))
    }

    pub fn truncated(&self, len: usize) -> Option<Self> {
        (len >= 1 && len <= self.0.len()).then(|| Self(self.0[..len].to_vec()))
    }

    /// All paths of `len` modes over `n_modes` modes in lexicographic order.
    pub fn enumerate(n_modes: usize, len: usize) -> Vec<Path> {
        let total = n_modes.pow(len as u32);
        (0..total)
            .map(|mut code| {
                let mut v = vec![0; len];
                for slot in v.iter_mut().rev() {
                    *slot = code % n_modes;
                    code /= n_modes;
                }
                Path(v)
            })
            .collect()
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, m) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", m + 1)?;
        }
        write!(f, ")")
    }
}

/// Running products along a path. Each [`push`](PathPropagator::push)
/// appends one block row to `O` and `G` at cost `O(N ns^2 na)`.
#[derive(Debug, Clone)]
pub struct PathPropagator<'a> {
    model: &'a MjlsModel,
    // A[m(k-1)] ... A[m(0)]
    phi: DMatrix<f64>,
    // reach[j] = A[m(k-1)] ... A[m(j+1)] B[m(j)] for j < k
    reach: Vec<DMatrix<f64>>,
    obs_rows: Vec<DMatrix<f64>>,
    input_rows: Vec<Vec<DMatrix<f64>>>,
}

impl<'a> PathPropagator<'a> {
    pub fn new(model: &'a MjlsModel) -> Self {
        Self {
            model,
            phi: DMatrix::identity(model.ns, model.ns),
            reach: Vec::new(),
            obs_rows: Vec::new(),
            input_rows: Vec::new(),
        }
    }

    pub fn push(&mut self, mode: usize) {
        let c = &self.model.c[mode];
        self.obs_rows.push(c * &self.phi);
        self.input_rows.push(self.reach.iter().map(|r| c * r).collect());
        let a = &self.model.a[mode];
        for r in self.reach.iter_mut() {
            *r = a * &*r;
        }
        self.reach.push(self.model.b[mode].clone());
        self.phi = a * &self.phi;
    }

    pub fn len(&self) -> usize {
        self.obs_rows.len()
    }
    pub fn is_empty(&self) -> bool {
        self.obs_rows.is_empty()
    }

    pub fn observability(&self) -> DMatrix<f64> {
        let (ny, ns) = (self.model.ny, self.model.ns);
        let mut o = DMatrix::zeros(self.len() * ny, ns);
        for (k, row) in self.obs_rows.iter().enumerate() {
            o.view_mut((k * ny, 0), (ny, ns)).copy_from(row);
        }
        o
    }

    pub fn input_effect(&self) -> DMatrix<f64> {
        let (ny, na) = (self.model.ny, self.model.na);
        let n = self.len().saturating_sub(1);
        let mut g = DMatrix::zeros(self.len() * ny, n * na);
        for (k, blocks) in self.input_rows.iter().enumerate() {
            for (j, blk) in blocks.iter().enumerate() {
                g.view_mut((k * ny, j * na), (ny, na)).copy_from(blk);
            }
        }
        g
    }
}

/// `O(path)` and `G(path)` built in one pass.
pub fn measurement_matrices(model: &MjlsModel, path: &Path) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    model.check_path(path)?;
    let mut prop = PathPropagator::new(model);
    for &m in path.modes() {
        prop.push(m);
    }
    Ok((prop.observability(), prop.input_effect()))
}

/// Stacked observability matrix; block row `k` is `C[m(k)] A[m(k-1)] ... A[m(0)]`.
pub fn observability_matrix(model: &MjlsModel, path: &Path) -> Result<DMatrix<f64>> {
    measurement_matrices(model, path).map(|(o, _)| o)
}

/// Input-effect matrix `G(path) = H(path) blkdiag(B[m(0)], ..., B[m(N-1)])`.
/// For a single-mode path this is an `ny x 0` matrix.
pub fn input_effect_matrix(model: &MjlsModel, path: &Path) -> Result<DMatrix<f64>> {
    measurement_matrices(model, path).map(|(_, g)| g)
}

/// Stacked outputs `O(path) x0 + G(path) u` over the window.
pub fn predict_outputs(
    model: &MjlsModel,
    path: &Path,
    x0: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<DVector<f64>> {
    if x0.len() != model.ns {
        return input_err(format!("x0 has length {}, expected {}", x0.len(), model.ns));
    }
    let expect_u = path.horizon() * model.na;
    if u.len() != expect_u {
        return input_err(format!("u has length {}, expected {expect_u}", u.len()));
    }
    let (o, g) = measurement_matrices(model, path)?;
    Ok(o * x0 + g * u)
}

/// On-disk JSON model. Matrices are arrays of row arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub n_modes: usize,
    pub ns: usize,
    pub na: usize,
    pub ny: usize,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "P", default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<Vec<f64>>>,
}

fn rows_to_matrix(rows: &[Vec<f64>], nrows: usize, ncols: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return input_err(format!("{what} must be {nrows}x{ncols}"));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl ModelFile {
    pub fn load(path: impl AsRef<FsPath>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<FsPath>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn from_model(model: &MjlsModel, p: Option<&TransitionMatrix>) -> Self {
        Self {
            n_modes: model.n_modes(),
            ns: model.ns,
            na: model.na,
            ny: model.ny,
            a: model.a.iter().map(matrix_to_rows).collect(),
            b: model.b.iter().map(matrix_to_rows).collect(),
            c: model.c.iter().map(matrix_to_rows).collect(),
            p: p.map(|p| matrix_to_rows(p.matrix())),
        }
    }

    pub fn model(&self) -> Result<MjlsModel> {
        let n = self.n_modes;
        if self.a.len() != n || self.b.len() != n || self.c.len() != n {
            return input_err(format!("expected {n} matrices each for A, B and C"));
        }
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            a.push(rows_to_matrix(&self.a[i], self.ns, self.ns, &format!("A_{}", i + 1))?);
            b.push(rows_to_matrix(&self.b[i], self.ns, self.na, &format!("B_{}", i + 1))?);
            c.push(rows_to_matrix(&self.c[i], self.ny, self.ns, &format!("C_{}", i + 1))?);
        }
        MjlsModel::new(a, b, c)
    }

    pub fn transition(&self) -> Result<Option<TransitionMatrix>> {
        self.p
            .as_ref()
            .map(|rows| rows_to_matrix(rows, self.n_modes, self.n_modes, "P").and_then(TransitionMatrix::new))
            .transpose()
    }
}

impl std::str::FromStr for Path {
    type Err = Error;

    /// Parses comma-separated 1-based labels, with or without parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let labels = body
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Input(format!("bad path '{s}': {e}")))?;
        Self::from_labels(&labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn single_mode_path_gives_c() {
        let m = presets::estimation_example();
        let o = observability_matrix(&m, &Path::from_labels(&[1]).unwrap()).unwrap();
        assert_eq!(o, DMatrix::from_row_slice(1, 2, &[2.0, 1.0]));
    }

    #[test]
    fn two_step_observability_block() {
        let m = presets::estimation_example();
        let o = observability_matrix(&m, &Path::from_labels(&[1, 2]).unwrap()).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.9, 0.4]);
        assert!((o - expect).norm() < 1e-14);
    }

    #[test]
    fn identity_dynamics_repeat_output_map() {
        let c1 = DMatrix::from_row_slice(1, 2, &[1.0, 3.0]);
        let c2 = DMatrix::from_row_slice(1, 2, &[-2.0, 0.5]);
        let m = MjlsModel::new(
            vec![DMatrix::identity(2, 2); 2],
            vec![DMatrix::zeros(2, 1); 2],
            vec![c1.clone(), c2.clone()],
        )
        .unwrap();
        let o = observability_matrix(&m, &Path::from_labels(&[2, 1, 2]).unwrap()).unwrap();
        assert_eq!(o.row(0), c2.row(0));
        assert_eq!(o.row(1), c1.row(0));
        assert_eq!(o.row(2), c2.row(0));
    }

    #[test]
    fn input_effect_of_constant_path() {
        let m = presets::estimation_example();
        let g = input_effect_matrix(&m, &Path::from_labels(&[1, 1]).unwrap()).unwrap();
        assert_eq!(g.shape(), (2, 1));
        assert_eq!(g[(0, 0)], 0.0);
        assert!((g[(1, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn input_effect_without_controls_is_empty() {
        let m = presets::estimation_example();
        let g = input_effect_matrix(&m, &Path::from_labels(&[2]).unwrap()).unwrap();
        assert_eq!(g.shape(), (1, 0));
    }

    #[test]
    fn input_effect_zero_for_autonomous_model() {
        let m = MjlsModel::new(
            vec![DMatrix::from_element(2, 2, 0.3); 2],
            vec![DMatrix::zeros(2, 1); 2],
            vec![DMatrix::from_element(1, 2, 1.0); 2],
        )
        .unwrap();
        let g = input_effect_matrix(&m, &Path::from_labels(&[1, 2, 1]).unwrap()).unwrap();
        assert_eq!(g, DMatrix::zeros(3, 2));
    }

    #[test]
    fn hankel_pattern_block_two_zero() {
        // with B = I the (2,0) block of G is exactly C[m2] A[m1]
        let a1 = DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.3, 0.4]);
        let a2 = DMatrix::from_row_slice(2, 2, &[-0.5, 0.0, 0.7, 0.2]);
        let c1 = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let c2 = DMatrix::from_row_slice(1, 2, &[0.5, 2.0]);
        let m = MjlsModel::new(
            vec![a1.clone(), a2.clone()],
            vec![DMatrix::identity(2, 2); 2],
            vec![c1, c2.clone()],
        )
        .unwrap();
        let path = Path::from_labels(&[1, 2, 2]).unwrap();
        let g = input_effect_matrix(&m, &path).unwrap();
        let block = g.view((2, 0), (1, 2)).into_owned();
        assert!((block - &c2 * &a2).norm() < 1e-14);
        let diag = g.view((2, 2), (1, 2)).into_owned();
        assert!((diag - c2).norm() < 1e-14);
    }

    #[test]
    fn predict_from_zero_is_zero() {
        let m = presets::control_example();
        let path = Path::from_labels(&[1, 2, 1]).unwrap();
        let y = predict_outputs(&m, &path, &DVector::zeros(2), &DVector::zeros(4)).unwrap();
        assert_eq!(y, DVector::zeros(6));
    }

    #[test]
    fn predict_single_measurement() {
        let m = presets::estimation_example();
        let y = predict_outputs(
            &m,
            &Path::from_labels(&[1]).unwrap(),
            &DVector::from_vec(vec![1.0, 1.0]),
            &DVector::zeros(0),
        )
        .unwrap();
        assert_eq!(y.as_slice(), &[3.0]);
    }

    #[test]
    fn predict_rejects_shape_mismatch() {
        let m = presets::estimation_example();
        let path = Path::from_labels(&[1, 2]).unwrap();
        assert!(predict_outputs(&m, &path, &DVector::zeros(3), &DVector::zeros(1)).is_err());
        assert!(predict_outputs(&m, &path, &DVector::zeros(2), &DVector::zeros(2)).is_err());
    }

    #[test]
    fn invalid_label_rejected() {
        let m = presets::estimation_example();
        assert!(matches!(
            observability_matrix(&m, &Path::from_labels(&[1, 3]).unwrap()),
            Err(Error::Input(_))
        ));
        assert!(Path::from_labels(&[0, 1]).is_err());
    }

    #[test]
    fn identity_chain_is_absorbing() {
        let p = TransitionMatrix::new(DMatrix::identity(3, 3)).unwrap();
        let seq = sample_chain(&p, 1, 500, 7).unwrap();
        assert!(seq.iter().all(|&m| m == 1));
    }

    #[test]
    fn absorbing_row_never_leaves() {
        let p = TransitionMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.3, 0.7])).unwrap();
        let seq = sample_chain(&p, 0, 1000, 3).unwrap();
        assert!(seq.iter().all(|&m| m == 0));
    }

    #[test]
    fn uniform_chain_frequency() {
        let seq = sample_chain(&TransitionMatrix::uniform(2), 0, 10_000, 11).unwrap();
        let freq = seq.iter().filter(|&&m| m == 0).count() as f64 / seq.len() as f64;
        assert!((0.47..=0.53).contains(&freq), "frequency {freq}");
    }

    #[test]
    fn chain_is_reproducible() {
        let p = TransitionMatrix::uniform(3);
        assert_eq!(sample_chain(&p, 2, 300, 99).unwrap(), sample_chain(&p, 2, 300, 99).unwrap());
    }

    #[test]
    fn non_stochastic_rejected() {
        assert!(TransitionMatrix::new(DMatrix::from_row_slice(2, 2, &[0.5, 0.4, 0.5, 0.5])).is_err());
        assert!(TransitionMatrix::new(DMatrix::from_row_slice(2, 2, &[1.5, -0.5, 0.5, 0.5])).is_err());
    }

    #[test]
    fn ergodicity_predicate() {
        assert!(TransitionMatrix::uniform(3).is_ergodic());
        assert!(!TransitionMatrix::new(DMatrix::identity(2, 2)).unwrap().is_ergodic());
        // periodic swap is irreducible but not primitive
        let swap = TransitionMatrix::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        assert!(!swap.is_ergodic());
        let lazy = TransitionMatrix::new(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.5, 0.5])).unwrap();
        assert!(lazy.is_ergodic());
    }

    #[test]
    fn model_file_round_trip() {
        let m = presets::control_example();
        let p = TransitionMatrix::uniform(2);
        let file = ModelFile::from_model(&m, Some(&p));
        let text = serde_json::to_string(&file).unwrap();
        let back: ModelFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.model().unwrap(), m);
        assert_eq!(back.transition().unwrap().unwrap(), p);
    }

    #[test]
    fn model_file_rejects_bad_shapes() {
        let mut file = ModelFile::from_model(&presets::estimation_example(), None);
        file.c[1] = vec![vec![1.0, 2.0, 3.0]];
        assert!(file.model().is_err());
    }

    #[test]
    fn path_parse_and_display() {
        let p: Path = "(1,2,1)".parse().unwrap();
        assert_eq!(p.modes(), &[0, 1, 0]);
        assert_eq!(p.to_string(), "(1,2,1)");
        assert_eq!(Path::enumerate(2, 2).len(), 4);
        assert_eq!(Path::enumerate(2, 2)[1].labels(), vec![1, 2]);
    }
}
