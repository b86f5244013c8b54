//! Independent reference computations shared by the integration tests. None
//! of these call into the library's numerical routines.
#![allow(dead_code)]

use mjls::ambiguity::{self, TransitionDataset};
use mjls::estimator::{ObserverConfig, ObserverState};
use mjls::observability::{self, DEFAULT_PAIR_BUDGET};
use mjls::{MjlsModel, Path, TransitionMatrix};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<R: Rng>(r: usize, c: usize, scale: f64, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vector<R: Rng>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Random model with entries of `A` scaled so trajectories stay moderate.
pub fn random_model<R: Rng>(n_modes: usize, ns: usize, na: usize, ny: usize, rng: &mut R) -> MjlsModel {
    let a = (0..n_modes).map(|_| gaussian_matrix(ns, ns, 0.5, rng)).collect();
    let b = (0..n_modes).map(|_| gaussian_matrix(ns, na, 1.0, rng)).collect();
    let c = (0..n_modes).map(|_| gaussian_matrix(ny, ns, 1.0, rng)).collect();
    MjlsModel::new(a, b, c).unwrap()
}

/// Stacked outputs by direct forward simulation.
pub fn simulate_outputs(model: &MjlsModel, modes: &[usize], x0: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
    let (ny, na) = (model.ny(), model.na());
    let mut out = DVector::zeros(modes.len() * ny);
    let mut x = x0.clone();
    for (k, &m) in modes.iter().enumerate() {
        out.rows_mut(k * ny, ny).copy_from(&(model.c(m) * &x));
        if k + 1 < modes.len() {
            let uk = u.rows(k * na, na).into_owned();
            x = model.a(m) * &x + model.b(m) * uk;
        }
    }
    out
}

/// `(O, G)` assembled column by column from unit-impulse simulations.
pub fn impulse_matrices(model: &MjlsModel, modes: &[usize]) -> (DMatrix<f64>, DMatrix<f64>) {
    let (ns, na, ny) = (model.ns(), model.na(), model.ny());
    let len = modes.len();
    let nu = (len - 1) * na;
    let zero_u = DVector::zeros(nu);
    let mut o = DMatrix::zeros(len * ny, ns);
    for j in 0..ns {
        let mut e = DVector::zeros(ns);
        e[j] = 1.0;
        o.set_column(j, &simulate_outputs(model, modes, &e, &zero_u));
    }
    let mut g = DMatrix::zeros(len * ny, nu);
    let zero_x = DVector::zeros(ns);
    for j in 0..nu {
        let mut e = DVector::zeros(nu);
        e[j] = 1.0;
        g.set_column(j, &simulate_outputs(model, modes, &zero_x, &e));
    }
    (o, g)
}

/// Consistency through the SVD pseudo-inverse.
pub fn oracle_consistent(model: &MjlsModel, modes: &[usize], y: &DVector<f64>, u: &DVector<f64>) -> bool {
    let (o, g) = impulse_matrices(model, modes);
    let yt = y - g * u;
    let svd = o.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let pinv = svd.pseudo_inverse(1e-10 * smax.max(1e-300)).unwrap();
    let resid = (&yt - &o * (pinv * &yt)).norm();
    resid <= 1e-8 * (1.0 + yt.norm())
}

/// All mode sequences of the given length, lexicographic.
pub fn all_paths(n_modes: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..n_modes).map(move |m| {
                    let mut q = p.clone();
                    q.push(m);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn path(modes: &[usize]) -> Path {
    Path::new(modes.to_vec()).unwrap()
}

/// Spectral radius of the second-moment operator `X_j -> sum_i P_ij A_i X_i A_i'`,
/// assembled on vectorised blocks.
pub fn second_moment_radius(acl: &[DMatrix<f64>], p: &DMatrix<f64>) -> f64 {
    let nm = acl.len();
    let n2 = acl[0].nrows().pow(2);
    let mut big = DMatrix::zeros(nm * n2, nm * n2);
    for i in 0..nm {
        let kron = acl[i].kronecker(&acl[i]);
        for j in 0..nm {
            let mut blk = big.view_mut((j * n2, i * n2), (n2, n2));
            blk += &kron * p[(i, j)];
        }
    }
    big.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn closed_loop(model: &MjlsModel, k: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
    (0..model.n_modes()).map(|i| model.a(i) + model.b(i) * k * model.c(i)).collect()
}

/// Vertices of `{p in simplex : ||p - c||_1 <= r}` by brute force: every
/// choice of `M - 1` linearly independent active facets, solved and filtered.
/// The facets are `p_j >= 0` and the `2^M` sign patterns `s'(p - c) <= r`.
pub fn facet_vertices(c: &DVector<f64>, r: f64) -> Vec<DVector<f64>> {
    let m = c.len();
    let mut rows: Vec<(DVector<f64>, f64)> = Vec::new();
    for j in 0..m {
        let mut a = DVector::zeros(m);
        a[j] = -1.0;
        rows.push((a, 0.0));
    }
    for mask in 0..(1u32 << m) {
        let s = DVector::from_fn(m, |j, _| if mask & (1 << j) != 0 { 1.0 } else { -1.0 });
        let rhs = r + s.dot(c);
        rows.push((s, rhs));
    }
    let feasible = |p: &DVector<f64>| {
        (p.sum() - 1.0).abs() < 1e-9 && p.iter().all(|&v| v >= -1e-9) && (p - c).lp_norm(1) <= r + 1e-9
    };
    let mut out: Vec<DVector<f64>> = Vec::new();
    let n = rows.len();
    let mut pick = Vec::new();
    fn rec(
        start: usize,
        need: usize,
        n: usize,
        pick: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]),
    ) {
        if need == 0 {
            f(pick);
            return;
        }
        for i in start..n {
            pick.push(i);
            rec(i + 1, need - 1, n, pick, f);
            pick.pop();
        }
    }
    rec(0, m - 1, n, &mut pick, &mut |sel: &[usize]| {
        let mut a = DMatrix::zeros(m, m);
        let mut b = DVector::zeros(m);
        for j in 0..m {
            a[(0, j)] = 1.0;
        }
        b[0] = 1.0;
        for (k, &i) in sel.iter().enumerate() {
            a.set_row(k + 1, &rows[i].0.transpose());
            b[k + 1] = rows[i].1;
        }
        if a.determinant().abs() < 1e-10 {
            return;
        }
        if let Some(p) = a.lu().solve(&b) {
            if feasible(&p) && !out.iter().any(|q| (q - &p).amax() < 1e-7) {
                out.push(p);
            }
        }
    });
    out
}

pub fn same_point_sets(a: &[DVector<f64>], b: &[DVector<f64>], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|p| b.iter().any(|q| (p - q).amax() < tol))
        && b.iter().all(|p| a.iter().any(|q| (p - q).amax() < tol))
}

/// Runs the estimator on a random trajectory and compares `Theta` with the
/// brute-force consistent set while the window is at most `n_max`.
/// Returns (comparisons, mismatches).
pub fn exactness_run(model: &MjlsModel, seed: u64, steps: usize, n_max: usize) -> (usize, usize) {
    let mut r = rng(seed);
    let nm = model.n_modes();
    let mut mode = r.random_range(0..nm);
    let mut x = gaussian_vector(model.ns(), &mut r);
    let mut obs = ObserverState::init(model, &(model.c(mode) * &x), ObserverConfig::default()).unwrap();
    let (mut compared, mut bad) = (0, 0);
    for _ in 0..steps {
        let u = gaussian_vector(model.na(), &mut r);
        x = model.a(mode) * &x + model.b(mode) * &u;
        mode = r.random_range(0..nm);
        obs = obs.step(model, &(model.c(mode) * &x), &u).unwrap().state;
        if obs.window() > n_max {
            break;
        }
        let (y, uw) = (obs.stacked_outputs(), obs.stacked_inputs());
        let brute: Vec<Vec<usize>> = all_paths(nm, obs.window() + 1)
            .into_iter()
            .filter(|p| oracle_consistent(model, p, &y, &uw))
            .collect();
        let got: Vec<Vec<usize>> = obs.theta().iter().map(|p| p.modes().to_vec()).collect();
        compared += 1;
        if got != brute {
            bad += 1;
        }
    }
    (compared, bad)
}

/// Exhaustive check that every certificate at `N <= 3` persists at `N + 1`.
/// Returns the number of certificates that existed.
pub fn certificates_persist(seed: u64) -> Result<usize, String> {
    let mut r = rng(seed);
    let ny = 1 + (seed as usize % 2);
    let model = random_model(2, 2, 1, ny, &mut r);
    let mut found = 0;
    for n in 1..=3 {
        for alpha in 0..n {
            for omega in 0..(n - alpha) {
                let c = observability::check_mo(&model, n, alpha, omega, DEFAULT_PAIR_BUDGET).unwrap();
                if c.holds {
                    found += 1;
                    let next = observability::check_mo(&model, n + 1, alpha, omega, DEFAULT_PAIR_BUDGET).unwrap();
                    if !next.holds {
                        return Err(format!("seed {seed}: ({n},{alpha},{omega}) holds but ({},{alpha},{omega}) fails", n + 1));
                    }
                }
            }
        }
    }
    Ok(found)
}

pub fn random_simplex_point<R: Rng>(m: usize, rng: &mut R) -> DVector<f64> {
    let v = DVector::from_fn(m, |_, _| -rng.random_range(1e-9f64..1.0).ln());
    let s = v.sum();
    v / s
}

/// Fraction of trials in which the set built from `n` draws of `row` covers it.
pub fn coverage_rate(row: &DVector<f64>, n: usize, beta: f64, trials: usize, seed: u64) -> f64 {
    let m = row.len();
    let p = TransitionMatrix::from_rows(&vec![row.clone(); m]).unwrap();
    let mut r = rng(seed);
    let mut hit = 0;
    for _ in 0..trials {
        let mut ds = TransitionDataset::new(m);
        let pairs: Vec<(usize, usize)> = (0..n).map(|_| (0, p.sample_next(0, &mut r))).collect();
        ds.update_counts(&pairs).unwrap();
        if ambiguity::build_ambiguity(&ds, 0, beta).unwrap().contains(row) {
            hit += 1;
        }
    }
    hit as f64 / trials as f64
}

