//! Offline discernibility and mode-observability analysis.
//!
//! Two equal-length paths are discernible for almost every control sequence
//! when the difference of their input-effect matrices leaves the joint column
//! space of their observability matrices:
//!
//! ```text
//! (I - Pr) (G(a) - G(b)) != 0,   Pr = projector onto col [O(a) O(b)]
//! ```
//!
//! This is a sufficient test only, so a failing pair means "not certified",
//! not "indiscernible". The zero test is relative: the residual must exceed
//! [`DISCERN_RTOL`] times `||G(a) - G(b)||_F`.

use nalgebra::DMatrix;

use crate::error::{input_err, Error, Result};
use crate::linalg;
use crate::model::{measurement_matrices, observability_matrix, MjlsModel, Path};

/// Relative threshold on the projection residual.
pub const DISCERN_RTOL: f64 = 1e-8;

/// Default cap on the number of pair tests in one certificate search.
pub const DEFAULT_PAIR_BUDGET: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscernibilityReport {
    pub pair: (Path, Path),
    pub discernible: bool,
    /// `||(I - Pr)(G(a) - G(b))||_F`
    pub residual_norm: f64,
    /// Residual level above which the pair counts as discernible.
    pub threshold: f64,
}

/// Outcome of an `(N, alpha, omega)` mode-observability search.
#[derive(Debug, Clone, PartialEq)]
pub struct MoCertificate {
    pub n: usize,
    pub alpha: usize,
    pub omega: usize,
    pub holds: bool,
    /// First (lexicographic) pair that failed the test, when `holds` is false.
    pub witness_pair: Option<(Path, Path)>,
    pub pairs_tested: u64,
}

fn residual(o_a: &DMatrix<f64>, g_a: &DMatrix<f64>, o_b: &DMatrix<f64>, g_b: &DMatrix<f64>) -> (f64, f64) {
    let diff = g_a - g_b;
    let diff_norm = diff.norm();
    if diff.ncols() == 0 || diff_norm == 0.0 {
        return (0.0, 0.0);
    }
    let basis = linalg::column_basis(&linalg::hstack(o_a, o_b));
    let projected = &basis * (basis.transpose() * &diff);
    ((diff - projected).norm(), DISCERN_RTOL * diff_norm)
}

/// Almost-everywhere discernibility test for two paths of equal length `N + 1`, `N >= 1`.
pub fn is_discernible_ae(model: &MjlsModel, a: &Path, b: &Path) -> Result<DiscernibilityReport> {
    if a.len() != b.len() {
        return input_err(format!("paths have lengths {} and {}", a.len(), b.len()));
    }
    if a.len() < 2 {
        return input_err("discernibility needs at least one control step (N >= 1)");
    }
    let (o_a, g_a) = measurement_matrices(model, a)?;
    let (o_b, g_b) = measurement_matrices(model, b)?;
    let (res, thr) = residual(&o_a, &g_a, &o_b, &g_b);
    Ok(DiscernibilityReport {
        pair: (a.clone(), b.clone()),
        discernible: res > thr,
        residual_norm: res,
        threshold: thr,
    })
}

/// Precomputed `O` and `G` for every path of a given length.
struct PathTable {
    paths: Vec<Path>,
    mats: Vec<(DMatrix<f64>, DMatrix<f64>)>,
}

impl PathTable {
    fn build(model: &MjlsModel, len: usize) -> Result<Self> {
        let paths = Path::enumerate(model.n_modes(), len);
        let mats = paths
            .iter()
            .map(|p| measurement_matrices(model, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { paths, mats })
    }
}

fn count_pair_tests(n_modes: usize, len: usize, core_len: usize) -> u128 {
    let m = n_modes as u128;
    let total = m.pow(len as u32);
    let all_pairs = total * total.saturating_sub(1) / 2;
    let outer = m.pow((len - core_len) as u32);
    let same_core = m.pow(core_len as u32) * (outer * outer.saturating_sub(1) / 2);
    all_pairs - same_core
}

fn check_params(n: usize, alpha: usize, omega: usize) -> Result<()> {
    if n == 0 {
        return input_err("N must be at least 1");
    }
    if alpha + omega >= n {
        return input_err(format!("need alpha + omega < N, got {alpha} + {omega} >= {n}"));
    }
    Ok(())
}

fn check_mo_with(table: &PathTable, n: usize, alpha: usize, omega: usize) -> MoCertificate {
    let core = alpha..=(n - omega);
    let mut tested = 0u64;
    for (ia, pa) in table.paths.iter().enumerate() {
        for ib in (ia + 1)..table.paths.len() {
            let pb = &table.paths[ib];
            if pa.modes()[core.clone()] == pb.modes()[core.clone()] {
                continue;
            }
            tested += 1;
            let (o_a, g_a) = &table.mats[ia];
            let (o_b, g_b) = &table.mats[ib];
            let (res, thr) = residual(o_a, g_a, o_b, g_b);
            if res <= thr {
                return MoCertificate {
                    n,
                    alpha,
                    omega,
                    holds: false,
                    witness_pair: Some((pa.clone(), pb.clone())),
                    pairs_tested: tested,
                };
            }
        }
    }
    MoCertificate { n, alpha, omega, holds: true, witness_pair: None, pairs_tested: tested }
}

fn ensure_budget(model: &MjlsModel, n: usize, alpha: usize, omega: usize, budget: u128) -> Result<()> {
    let needed = count_pair_tests(model.n_modes(), n + 1, n + 1 - alpha - omega);
    if needed > budget {
        return Err(Error::Resource { needed, cap: budget });
    }
    Ok(())
}

/// Exhaustive `(N, alpha, omega)` certificate: every pair of paths in
/// `W^(N+1)` that differs on positions `alpha..=N-omega` must pass
/// [`is_discernible_ae`].
pub fn check_mo(model: &MjlsModel, n: usize, alpha: usize, omega: usize, budget: u128) -> Result<MoCertificate> {
    check_params(n, alpha, omega)?;
    ensure_budget(model, n, alpha, omega, budget)?;
    let table = PathTable::build(model, n + 1)?;
    Ok(check_mo_with(&table, n, alpha, omega))
}

/// Certificates for every admissible `(alpha, omega)` at each `N` in `1..=n_max`.
pub fn mo_table(model: &MjlsModel, n_max: usize, budget: u128) -> Result<Vec<MoCertificate>> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        // the widest core (alpha = omega = 0) needs the most tests
        ensure_budget(model, n, 0, 0, budget)?;
        let table = PathTable::build(model, n + 1)?;
        for alpha in 0..n {
            for omega in 0..(n - alpha) {
                out.push(check_mo_with(&table, n, alpha, omega));
            }
        }
    }
    Ok(out)
}

/// Smallest `N <= n_max` at which some `(alpha, omega)` certificate holds.
pub fn find_weak_mo_index(model: &MjlsModel, n_max: usize, budget: u128) -> Result<Option<(usize, usize, usize)>> {
    if n_max == 0 {
        return input_err("N_max must be at least 1");
    }
    for n in 1..=n_max {
        ensure_budget(model, n, 0, 0, budget)?;
        let table = PathTable::build(model, n + 1)?;
        for alpha in 0..n {
            for omega in 0..(n - alpha) {
                if check_mo_with(&table, n, alpha, omega).holds {
                    return Ok(Some((n, alpha, omega)));
                }
            }
        }
    }
    Ok(None)
}

/// `rank O(path) == ns`, so the initial state of the window is unique.
pub fn is_pathwise_observable(model: &MjlsModel, path: &Path) -> Result<bool> {
    let o = observability_matrix(model, path)?;
    Ok(linalg::rank(&o) == model.ns())
}
