//! Data-driven l1 ambiguity sets over the rows of the unknown transition matrix.
//!
//! For each mode `i` the observed successors give an empirical row `p_hat`
//! and the concentration radius
//!
//! ```text
//! r = sqrt(2 (M ln 2 - ln beta) / n_i)
//! ```
//!
//! so that the true row lies in `{p in simplex : ||p - p_hat||_1 <= r}` with
//! probability at least `1 - beta`. The set is a polytope; its vertices feed
//! the robust synthesis, which only needs to be enforced at the vertices.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{input_err, Result};
use crate::estimator::Transition;

/// Two vertices closer than this (max-norm) are the same vertex.
pub const VERTEX_DEDUP_TOL: f64 = 1e-9;

/// `sum_t 0.5 (t+1)^-2 = 0.5 * pi^2 / 6`.
pub const BETA_SCHEDULE_SUM: f64 = 0.5 * PI * PI / 6.0;

/// Observed switch counts, `counts[(i, j)]` = number of `i -> j` transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionDataset {
    counts: DMatrix<u64>,
}

impl TransitionDataset {
    pub fn new(n_modes: usize) -> Self {
        Self { counts: DMatrix::zeros(n_modes, n_modes) }
    }

    pub fn from_counts(counts: DMatrix<u64>) -> Result<Self> {
        if !counts.is_square() || counts.nrows() == 0 {
            return input_err("count matrix must be square and nonempty");
        }
        Ok(Self { counts })
    }

    pub fn n_modes(&self) -> usize {
        self.counts.nrows()
    }
    pub fn counts(&self) -> &DMatrix<u64> {
        &self.counts
    }
    pub fn row_total(&self, i: usize) -> u64 {
        self.counts.row(i).iter().sum()
    }
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Adds observed switches given as 0-based `(from, to)` pairs.
    pub fn update_counts(&mut self, pairs: &[(usize, usize)]) -> Result<()> {
        let n = self.n_modes();
        if let Some(&(i, j)) = pairs.iter().find(|(i, j)| *i >= n || *j >= n) {
            return input_err(format!("transition ({}, {}) outside 1..={n}", i + 1, j + 1));
        }
        for &(i, j) in pairs {
            self.counts[(i, j)] += 1;
        }
        Ok(())
    }

    pub fn record(&mut self, transitions: &[Transition]) -> Result<()> {
        let pairs: Vec<_> = transitions.iter().map(|t| (t.from, t.to)).collect();
        self.update_counts(&pairs)
    }

    /// Empirical row distribution; `None` when mode `i` has no recorded successor.
    pub fn empirical_row(&self, i: usize) -> Option<DVector<f64>> {
        let total = self.row_total(i);
        (total > 0).then(|| DVector::from_iterator(self.n_modes(), self.counts.row(i).iter().map(|&c| c as f64 / total as f64)))
    }

    /// Counts CSV: one line per source mode, `mode,count_1,...,count_M` with 1-based modes.
    pub fn to_csv(&self) -> String {
        let n = self.n_modes();
        let mut s = String::from("mode");
        for j in 1..=n {
            let _ = write!(s, ",to_{j}");
        }
        s.push('\n');
        for i in 0..n {
            let _ = write!(s, "{}", i + 1);
            for j in 0..n {
                let _ = write!(s, ",{}", self.counts[(i, j)]);
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("mode")) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let vals = fields[1..]
                .iter()
                .map(|f| f.parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>();
            match vals {
                Ok(v) => rows.push(v),
                Err(e) => return input_err(format!("counts line {}: {e}", lineno + 1)),
            }
        }
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return input_err("counts CSV must describe a square matrix");
        }
        Self::from_counts(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }
}

/// Concentration radius for `n_samples` draws of an `n_modes`-point
/// distribution at confidence `1 - beta`. Infinite (whole simplex) without data.
pub fn radius(n_samples: u64, n_modes: usize, beta: f64) -> f64 {
    if n_samples == 0 {
        return f64::INFINITY;
    }
    let m = n_modes as f64;
    (2.0 * (m * 2f64.ln() - beta.ln()) / n_samples as f64).sqrt()
}

/// Confidence schedule `0.5 (t+1)^-2`; summable with sum [`BETA_SCHEDULE_SUM`].
pub fn beta_schedule(t: usize) -> f64 {
    0.5 / ((t as f64 + 1.0).powi(2))
}

/// `{p in simplex : ||p - p_hat||_1 <= radius}` with its vertex list.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguitySet {
    pub p_hat: DVector<f64>,
    pub radius: f64,
    pub vertices: Vec<DVector<f64>>,
}

impl AmbiguitySet {
    /// Builds the set and enumerates its vertices.
    pub fn new(p_hat: DVector<f64>, radius: f64) -> Result<Self> {
        if p_hat.is_empty() || p_hat.iter().any(|&v| v < -1e-12 || !v.is_finite()) || (p_hat.sum() - 1.0).abs() > 1e-12 {
            return input_err("p_hat must be a probability vector");
        }
        if radius.is_nan() || radius < 0.0 {
            return input_err("radius must be nonnegative");
        }
        let vertices = enumerate_vertices(&p_hat, radius);
        Ok(Self { p_hat, radius, vertices })
    }

    /// The whole simplex: barycentre with infinite radius.
    pub fn full_simplex(n_modes: usize) -> Self {
        Self::new(DVector::from_element(n_modes, 1.0 / n_modes as f64), f64::INFINITY).expect("barycentre")
    }

    /// A single known distribution.
    pub fn singleton(p: DVector<f64>) -> Result<Self> {
        Self::new(p, 0.0)
    }

    pub fn is_full_simplex(&self) -> bool {
        full_simplex_shortcut(&self.p_hat, self.radius)
    }

    pub fn contains(&self, p: &DVector<f64>) -> bool {
        coverage_check(p, self)
    }
}

fn full_simplex_shortcut(p_hat: &DVector<f64>, radius: f64) -> bool {
    radius >= 2.0 * (1.0 - p_hat.min())
}

/// Ambiguity set for row `i` of the dataset at confidence `1 - beta`.
pub fn build_ambiguity(ds: &TransitionDataset, i: usize, beta: f64) -> Result<AmbiguitySet> {
    if i >= ds.n_modes() {
        return input_err(format!("mode {} outside 1..={}", i + 1, ds.n_modes()));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return input_err(format!("beta must lie in (0, 1), got {beta}"));
    }
    match ds.empirical_row(i) {
        None => Ok(AmbiguitySet::full_simplex(ds.n_modes())),
        Some(p_hat) => AmbiguitySet::new(p_hat, radius(ds.row_total(i), ds.n_modes(), beta)),
    }
}

/// Ambiguity sets for every row.
pub fn build_all(ds: &TransitionDataset, beta: f64) -> Result<Vec<AmbiguitySet>> {
    (0..ds.n_modes()).map(|i| build_ambiguity(ds, i, beta)).collect()
}

/// `||row - p_hat||_1 <= radius`.
pub fn coverage_check(row: &DVector<f64>, amb: &AmbiguitySet) -> bool {
    if amb.radius.is_infinite() {
        return true;
    }
    (row - &amb.p_hat).lp_norm(1) <= amb.radius
}

/// Vertices of `{p in simplex : ||p - p_hat||_1 <= radius}`.
///
/// On the simplex `||p - p_hat||_1 = 2 sum_j (p_j - p_hat_j)^+`, so the set
/// is every redistribution of at most `radius / 2` probability mass. A
/// generic linear objective is maximised by pouring that budget into its best
/// coordinate, draining the remaining coordinates from the worst upward.
/// Enumerating the receiving coordinate and every drain order therefore
/// visits every vertex (`M!` greedy fills).
pub fn enumerate_vertices(p_hat: &DVector<f64>, radius: f64) -> Vec<DVector<f64>> {
    let m = p_hat.len();
    if full_simplex_shortcut(p_hat, radius) {
        return (0..m).map(|j| unit(m, j)).collect();
    }
    let budget = radius / 2.0;
    let mut vertices: Vec<DVector<f64>> = Vec::new();
    let mut order: Vec<usize> = Vec::with_capacity(m);
    for target in 0..m {
        order.clear();
        order.extend((0..m).filter(|&j| j != target));
        for_each_permutation(&mut order, &mut |drain| {
            let v = greedy_fill(p_hat, target, drain, budget);
            if !vertices.iter().any(|w| (w - &v).amax() <= VERTEX_DEDUP_TOL) {
                vertices.push(v);
            }
        });
    }
    vertices
}

fn unit(m: usize, j: usize) -> DVector<f64> {
    let mut v = DVector::zeros(m);
    v[j] = 1.0;
    v
}

fn greedy_fill(p_hat: &DVector<f64>, target: usize, drain: &[usize], budget: f64) -> DVector<f64> {
    let mut p = p_hat.clone();
    let mut left = budget.min(1.0 - p_hat[target]);
    let mut moved = 0.0;
    for &j in drain {
        if left <= 0.0 {
            break;
        }
        let take = p[j].min(left);
        p[j] -= take;
        left -= take;
        moved += take;
    }
    p[target] += moved;
    p
}

/// Heap's algorithm; calls `f` once per permutation of `items`.
fn for_each_permutation(items: &mut [usize], f: &mut impl FnMut(&[usize])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    f(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            f(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Ambiguity snapshot CSV: `mode,p_hat_1..p_hat_M,radius,n_vertices`.
pub fn snapshot_csv(sets: &[AmbiguitySet]) -> String {
    let m = sets.first().map_or(0, |s| s.p_hat.len());
    let mut s = String::from("mode");
    for j in 1..=m {
        let _ = write!(s, ",p_hat_{j}");
    }
    s.push_str(",radius,n_vertices\n");
    for (i, a) in sets.iter().enumerate() {
        let _ = write!(s, "{}", i + 1);
        for v in a.p_hat.iter() {
            let _ = write!(s, ",{v}");
        }
        let _ = writeln!(s, ",{},{}", a.radius, a.vertices.len());
    }
    s
}
