//! Receding-horizon mode estimator with an adaptively chosen window.
//!
//! At every step the estimator keeps the set `Theta` of all mode paths over
//! the current window that explain the buffered outputs for *some* initial
//! state. New candidates are only generated as one-mode extensions of the
//! previous set, which is exact on noiseless data. The window grows by one
//! whenever no `n_c` consecutive window positions are agreed upon by every
//! consistent path, and an empty `Theta` (data no path can explain, e.g. an
//! unmodelled state jump) discards the window and restarts from the latest
//! output.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::error::{input_err, Error, Result};
use crate::linalg;
use crate::model::{measurement_matrices, MjlsModel, Path};

/// Consistency test tolerance: residual `<= CONSISTENCY_TOL * (1 + ||y_tilde||)`.
pub const CONSISTENCY_TOL: f64 = 1e-8;

/// Result of the least-squares consistency test of one path.
#[derive(Debug, Clone, PartialEq)]
pub struct Consistency {
    pub consistent: bool,
    pub residual: f64,
    /// Minimum-norm least-squares initial state of the window.
    pub x_ls: DVector<f64>,
    pub rank: usize,
}

fn window_len(model: &MjlsModel, y: &DVector<f64>) -> Result<usize> {
    if y.is_empty() || y.len() % model.ny() != 0 {
        return input_err(format!("output window length {} is not a multiple of ny = {}", y.len(), model.ny()));
    }
    Ok(y.len() / model.ny())
}

/// Tests whether `path` can produce the stacked outputs `y` under the stacked
/// inputs `u` from some initial state.
pub fn is_consistent(model: &MjlsModel, path: &Path, y: &DVector<f64>, u: &DVector<f64>) -> Result<Consistency> {
    let len = window_len(model, y)?;
    if len != path.len() {
        return input_err(format!("path has {} modes, output window has {len}", path.len()));
    }
    if u.len() != path.horizon() * model.na() {
        return input_err(format!(
            "input window has length {}, expected {}",
            u.len(),
            path.horizon() * model.na()
        ));
    }
    let (o, g) = measurement_matrices(model, path)?;
    Ok(consistency_from(&o, &g, y, u))
}

fn consistency_from(o: &DMatrix<f64>, g: &DMatrix<f64>, y: &DVector<f64>, u: &DVector<f64>) -> Consistency {
    let y_tilde = if g.ncols() == 0 { y.clone() } else { y - g * u };
    let x_ls = linalg::min_norm_solve(o, &y_tilde);
    let residual = (&y_tilde - o * &x_ls).norm();
    Consistency {
        consistent: residual <= CONSISTENCY_TOL * (1.0 + y_tilde.norm()),
        residual,
        x_ls,
        rank: linalg::rank(o),
    }
}

/// One-mode extensions of `prev` that are consistent with the window `(y, u)`.
///
/// The window length is read off `y`. If it equals the length of the previous
/// paths the window slid, so the oldest mode of each previous path is dropped
/// before extending; if it is one longer the window grew and nothing is
/// dropped. Duplicate candidates are merged and the result is sorted.
pub fn update_theta(model: &MjlsModel, prev: &[Path], y: &DVector<f64>, u: &DVector<f64>) -> Result<Vec<Path>> {
    let len = window_len(model, y)?;
    let mut candidates = BTreeSet::new();
    for p in prev {
        let base = if p.len() + 1 == len {
            Some(p.clone())
        } else if p.len() == len {
            p.dropped_front(1)
        } else {
            return input_err(format!(
                "previous path of length {} cannot be extended to a window of {len}",
                p.len()
            ));
        };
        for m in 0..model.n_modes() {
            candidates.insert(match &base {
                Some(b) => b.extended(m),
                None => Path::constant(m, 1),
            });
        }
    }
    let mut out = Vec::new();
    for cand in candidates {
        if is_consistent(model, &cand, y, u)?.consistent {
            out.push(cand);
        }
    }
    Ok(out)
}

/// Single-mode paths whose output map can reproduce `y0`.
pub fn initial_theta(model: &MjlsModel, y0: &DVector<f64>) -> Result<Vec<Path>> {
    let empty = DVector::zeros(0);
    let mut out = Vec::new();
    for m in 0..model.n_modes() {
        let p = Path::constant(m, 1);
        if is_consistent(model, &p, y0, &empty)?.consistent {
            out.push(p);
        }
    }
    Ok(out)
}

/// Window positions on which all consistent paths coincide for `n_c`
/// consecutive steps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AgreementResult {
    pub indices: Vec<usize>,
    /// `(start index, modes on start..start+n_c)` for every agreed index.
    pub agreed_runs: Vec<(usize, Vec<usize>)>,
}

impl AgreementResult {
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Window positions covered by at least one agreed run.
    pub fn agreed_positions(&self) -> BTreeSet<usize> {
        self.agreed_runs
            .iter()
            .flat_map(|(k, modes)| *k..*k + modes.len())
            .collect()
    }
}

/// Which run starts `k` are examined, with `N_bar = max(N - n_c, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexRange {
    /// `0 <= k < N_bar`: runs end at least two positions before the newest
    /// mode. Reproduces the window sizes reported for the estimation benchmark.
    #[default]
    HalfOpen,
    /// `0 <= k <= N_bar`; runs reaching past the window never count.
    Closed,
}

/// Agreement index set under the default [`IndexRange`].
pub fn agreement_indices(theta: &[Path], window: usize, n_c: usize) -> Result<AgreementResult> {
    agreement_indices_in(theta, window, n_c, IndexRange::default())
}

/// Start positions `k` at which every consistent path shows the same modes
/// on `k..k + n_c`.
pub fn agreement_indices_in(theta: &[Path], window: usize, n_c: usize, range: IndexRange) -> Result<AgreementResult> {
    if theta.is_empty() {
        return Err(Error::Precondition("agreement on an empty consistent set".into()));
    }
    if n_c == 0 {
        return input_err("n_c must be positive");
    }
    let len = window + 1;
    if theta.iter().any(|p| p.len() != len) {
        return input_err(format!("consistent paths must all have {len} modes"));
    }
    let first = theta[0].modes();
    let agrees_at = |pos: usize| theta.iter().all(|p| p.modes()[pos] == first[pos]);
    let n_bar = window.saturating_sub(n_c);
    let starts = match range {
        IndexRange::HalfOpen => 0..n_bar,
        IndexRange::Closed => 0..n_bar + 1,
    };
    let mut res = AgreementResult::default();
    for k in starts {
        if k + n_c > len {
            break;
        }
        if (k..k + n_c).all(agrees_at) {
            res.indices.push(k);
            res.agreed_runs.push((k, first[k..k + n_c].to_vec()));
        }
    }
    Ok(res)
}

/// Estimator parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObserverConfig {
    /// Required run length of agreed modes; 2 lets transitions be harvested.
    pub n_c: usize,
    /// Also require every consistent path to be pathwise observable before
    /// the window may stop growing.
    pub pathwise_rank_required: bool,
    pub index_range: IndexRange,
}

impl Default for ObserverConfig {
    fn default() -> Self {
        Self { n_c: 2, pathwise_rank_required: false, index_range: IndexRange::HalfOpen }
    }
}

/// Events reported by one estimator step.
#[derive(Debug, Clone, PartialEq)]
pub enum ObserverEvent {
    /// The window grew to `window` at absolute time `t`.
    WindowGrown { t: usize, window: usize },
    /// All consistent paths agree on `modes` starting at absolute time `start`.
    ModesResolved { start: usize, modes: Vec<usize> },
    /// No path was consistent at time `t`; the window was discarded.
    Reset { t: usize },
}

/// Estimator state. A plain value: [`ObserverState::step`] returns a new state.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState {
    t: usize,
    window: usize,
    y_window: VecDeque<DVector<f64>>,
    u_window: VecDeque<DVector<f64>>,
    theta: Vec<Path>,
    agreement: AgreementResult,
    config: ObserverConfig,
    resets: usize,
}

/// New state plus what happened during the step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: ObserverState,
    pub events: Vec<ObserverEvent>,
}

impl ObserverState {
    /// Initial state from the first output `y0` at time 0.
    pub fn init(model: &MjlsModel, y0: &DVector<f64>, config: ObserverConfig) -> Result<Self> {
        Self::start_at(model, y0, config, 0, 0)
    }

    fn start_at(model: &MjlsModel, y0: &DVector<f64>, config: ObserverConfig, t: usize, resets: usize) -> Result<Self> {
        if config.n_c == 0 {
            return input_err("n_c must be positive");
        }
        if y0.len() != model.ny() {
            return input_err(format!("output has length {}, expected {}", y0.len(), model.ny()));
        }
        let theta = initial_theta(model, y0)?;
        let agreement = if theta.is_empty() {
            AgreementResult::default()
        } else {
            agreement_indices_in(&theta, 0, config.n_c, config.index_range)?
        };
        Ok(Self {
            t,
            window: 0,
            y_window: VecDeque::from([y0.clone()]),
            u_window: VecDeque::new(),
            theta,
            agreement,
            config,
            resets,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }
    /// Current window size `N_t`.
    pub fn window(&self) -> usize {
        self.window
    }
    pub fn theta(&self) -> &[Path] {
        &self.theta
    }
    pub fn agreement(&self) -> &AgreementResult {
        &self.agreement
    }
    pub fn config(&self) -> ObserverConfig {
        self.config
    }
    /// Absolute time of window position 0.
    pub fn window_start(&self) -> usize {
        self.t - self.window
    }
    pub fn resets(&self) -> usize {
        self.resets
    }

    pub fn stacked_outputs(&self) -> DVector<f64> {
        stack(&self.y_window)
    }
    pub fn stacked_inputs(&self) -> DVector<f64> {
        stack(&self.u_window)
    }

    fn window_must_grow(&self, model: &MjlsModel) -> bool {
        if self.agreement.is_empty() {
            return true;
        }
        if self.config.pathwise_rank_required {
            return !self.theta.iter().all(|p| {
                measurement_matrices(model, p)
                    .map(|(o, _)| linalg::rank(&o) == model.ns())
                    .unwrap_or(false)
            });
        }
        false
    }

    /// One estimator iteration: decide window growth from the current
    /// agreement set, append the new output `y_new` and the input `u_prev`
    /// applied at the previous time, and update the consistent set.
    pub fn step(&self, model: &MjlsModel, y_new: &DVector<f64>, u_prev: &DVector<f64>) -> Result<StepOutcome> {
        if y_new.len() != model.ny() || u_prev.len() != model.na() {
            return input_err("output or input has the wrong dimension");
        }
        let t = self.t + 1;
        let mut events = Vec::new();

        if self.theta.is_empty() {
            let state = Self::start_at(model, y_new, self.config, t, self.resets + 1)?;
            events.push(ObserverEvent::Reset { t });
            return Ok(StepOutcome { state, events });
        }

        let grow = self.window_must_grow(model);
        let mut next = self.clone();
        next.t = t;
        next.y_window.push_back(y_new.clone());
        next.u_window.push_back(u_prev.clone());
        if grow {
            next.window += 1;
            events.push(ObserverEvent::WindowGrown { t, window: next.window });
        } else {
            next.y_window.pop_front();
            next.u_window.pop_front();
        }

        let theta = update_theta(model, &self.theta, &next.stacked_outputs(), &next.stacked_inputs())?;
        if theta.is_empty() {
            let state = Self::start_at(model, y_new, self.config, t, self.resets + 1)?;
            events.push(ObserverEvent::Reset { t });
            return Ok(StepOutcome { state, events });
        }
        next.agreement = agreement_indices_in(&theta, next.window, self.config.n_c, self.config.index_range)?;
        next.theta = theta;
        let start = next.window_start();
        for (k, modes) in &next.agreement.agreed_runs {
            events.push(ObserverEvent::ModesResolved { start: start + k, modes: modes.clone() });
        }
        Ok(StepOutcome { state: next, events })
    }
}

fn stack(parts: &VecDeque<DVector<f64>>) -> DVector<f64> {
    let total: usize = parts.iter().map(|v| v.len()).sum();
    let mut out = DVector::zeros(total);
    let mut at = 0;
    for v in parts {
        out.rows_mut(at, v.len()).copy_from(v);
        at += v.len();
    }
    out
}

/// Minimum-norm initial state of the window for a consistent path, and
/// whether it is unique (`rank O(path) == ns`).
pub fn recover_state(model: &MjlsModel, path: &Path, y: &DVector<f64>, u: &DVector<f64>) -> Result<(DVector<f64>, bool)> {
    let c = is_consistent(model, path, y, u)?;
    if !c.consistent {
        return Err(Error::Precondition(format!(
            "path {path} is inconsistent with the data (residual {:.3e})",
            c.residual
        )));
    }
    Ok((c.x_ls, c.rank == model.ns()))
}

/// An observed mode switch `from -> to` between absolute times `time` and `time + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub time: usize,
    pub from: usize,
    pub to: usize,
}

/// Absolute times whose transition has already been emitted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HarvestCursor {
    emitted: BTreeSet<usize>,
}

impl HarvestCursor {
    pub fn len(&self) -> usize {
        self.emitted.len()
    }
    pub fn is_empty(&self) -> bool {
        self.emitted.is_empty()
    }
}

/// Emits every not-yet-reported switch whose two endpoints are both agreed
/// positions of the current window. Since the window never spans a reset, no
/// emitted pair does either.
pub fn harvest_transitions(state: &ObserverState, agreement: &AgreementResult, cursor: &mut HarvestCursor) -> Vec<Transition> {
    let start = state.window_start();
    // earlier entries can never be emitted again
    cursor.emitted = cursor.emitted.split_off(&start);
    let positions = agreement.agreed_positions();
    let Some(reference) = state.theta.first() else {
        return Vec::new();
    };
    let modes = reference.modes();
    let mut out = Vec::new();
    for &k in &positions {
        if positions.contains(&(k + 1)) && k + 1 < modes.len() {
            let time = start + k;
            if cursor.emitted.insert(time) {
                out.push(Transition { time, from: modes[k], to: modes[k + 1] });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::predict_outputs;
    use crate::presets;

    fn path(labels: &[usize]) -> Path {
        Path::from_labels(labels).unwrap()
    }

    #[test]
    fn exact_data_is_consistent() {
        let m = presets::control_example();
        let p = path(&[1, 2, 2, 1]);
        let x0 = DVector::from_vec(vec![0.3, -1.2]);
        let u = DVector::from_vec(vec![0.5, -0.1, 0.2, 0.9, -0.4, 0.0]);
        let y = predict_outputs(&m, &p, &x0, &u).unwrap();
        let c = is_consistent(&m, &p, &y, &u).unwrap();
        assert!(c.consistent);
        assert!(c.residual <= 1e-9);
        let (o, g) = measurement_matrices(&m, &p).unwrap();
        assert!((&o * &c.x_ls - (&y - &g * &u)).norm() < 1e-9);
    }

    #[test]
    fn single_output_always_consistent_for_rank_one_map() {
        let m = presets::estimation_example();
        let y0 = DVector::from_vec(vec![-4.2]);
        let th = initial_theta(&m, &y0).unwrap();
        assert_eq!(th, vec![path(&[1]), path(&[2])]);
    }

    #[test]
    fn perturbed_output_is_inconsistent() {
        let m = presets::control_example();
        let p = path(&[2, 2]);
        let x0 = DVector::from_vec(vec![1.0, 2.0]);
        let u = DVector::from_vec(vec![0.1, 0.2]);
        let mut y = predict_outputs(&m, &p, &x0, &u).unwrap();
        y[3] += 1.0;
        let c = is_consistent(&m, &p, &y, &u).unwrap();
        assert!(!c.consistent);
        // explicit projector oracle for the residual
        let (o, g) = measurement_matrices(&m, &p).unwrap();
        let yt = &y - &g * &u;
        let proj = &o * (o.transpose() * &o).try_inverse().unwrap() * o.transpose();
        let expect = (&yt - proj * &yt).norm();
        assert!((c.residual - expect).abs() < 1e-10);
    }

    #[test]
    fn consistency_rejects_bad_shapes() {
        let m = presets::estimation_example();
        let p = path(&[1, 2]);
        assert!(is_consistent(&m, &p, &DVector::zeros(3), &DVector::zeros(2)).is_err());
        assert!(is_consistent(&m, &p, &DVector::zeros(2), &DVector::zeros(2)).is_err());
    }

    #[test]
    fn agreement_examples_closed() {
        let closed = |t: &[Path], n, c| agreement_indices_in(t, n, c, IndexRange::Closed).unwrap();
        let r = closed(&[path(&[1, 2, 1]), path(&[2, 2, 1])], 2, 2);
        assert_eq!(r.indices, Vec::<usize>::new());
        let r = closed(&[path(&[1, 2, 1, 2]), path(&[2, 2, 1, 2])], 3, 2);
        assert_eq!(r.indices, vec![1]);
        assert_eq!(r.agreed_runs, vec![(1, vec![1, 0])]);
        let r = closed(&[path(&[1, 2]), path(&[2, 1])], 1, 1);
        assert!(r.indices.is_empty());
        let r = closed(&[path(&[1, 2, 2, 1, 1])], 4, 2);
        assert_eq!(r.indices, vec![0, 1, 2]);
        assert!(agreement_indices(&[], 0, 2).is_err());
    }

    #[test]
    fn agreement_examples_half_open() {
        let r = agreement_indices(&[path(&[1, 2, 1, 2]), path(&[2, 2, 1, 2])], 3, 2).unwrap();
        assert!(r.is_empty());
        let r = agreement_indices(&[path(&[1, 1, 2, 1, 2]), path(&[2, 1, 2, 1, 2])], 4, 2).unwrap();
        assert_eq!(r.indices, vec![1]);
        let r = agreement_indices(&[path(&[1, 2, 2, 1, 1])], 4, 2).unwrap();
        assert_eq!(r.indices, vec![0, 1]);
        let r = agreement_indices(&[path(&[1, 2]), path(&[2, 1])], 1, 1).unwrap();
        assert!(r.is_empty());
    }

    #[test]
    fn agreement_needs_a_full_run() {
        // one mode cannot satisfy a run of two
        let r = agreement_indices_in(&[path(&[1])], 0, 2, IndexRange::Closed).unwrap();
        assert!(r.is_empty());
        let r = agreement_indices_in(&[path(&[1])], 0, 1, IndexRange::Closed).unwrap();
        assert_eq!(r.indices, vec![0]);
        assert!(agreement_indices(&[path(&[1])], 0, 1).unwrap().is_empty());
    }

    #[test]
    fn single_mode_window_stays_small() {
        let m = MjlsModel::new(
            vec![DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.0, 0.5])],
            vec![DMatrix::from_row_slice(2, 1, &[0.0, 1.0])],
            vec![DMatrix::from_row_slice(1, 2, &[1.0, 0.0])],
        )
        .unwrap();
        let cfg = ObserverConfig { n_c: 1, index_range: IndexRange::Closed, ..Default::default() };
        let mut x = DVector::from_vec(vec![1.0, -1.0]);
        let mut s = ObserverState::init(&m, &m.output(0, &x), cfg).unwrap();
        for k in 0..30 {
            let u = DVector::from_element(1, (k as f64).sin());
            x = m.next_state(0, &x, &u);
            s = s.step(&m, &m.output(0, &x), &u).unwrap().state;
            assert_eq!(s.window(), 0);
            assert_eq!(s.theta(), &[Path::constant(0, 1)]);
        }
    }

    #[test]
    fn single_mode_half_open_window_settles() {
        let m = MjlsModel::new(
            vec![DMatrix::from_row_slice(1, 1, &[0.8])],
            vec![DMatrix::from_row_slice(1, 1, &[1.0])],
            vec![DMatrix::from_row_slice(1, 1, &[1.0])],
        )
        .unwrap();
        let mut x = DVector::from_element(1, 1.0);
        let mut s = ObserverState::init(&m, &m.output(0, &x), ObserverConfig::default()).unwrap();
        for _ in 0..10 {
            let u = DVector::from_element(1, 0.3);
            x = m.next_state(0, &x, &u);
            s = s.step(&m, &m.output(0, &x), &u).unwrap().state;
        }
        assert_eq!(s.window(), 3);
    }

    #[test]
    fn recover_unique_full_state() {
        let m = presets::control_example();
        let y = DVector::from_vec(vec![0.7, -2.0]);
        let (x, unique) = recover_state(&m, &path(&[2]), &y, &DVector::zeros(0)).unwrap();
        assert!(unique);
        assert!((x - y).norm() < 1e-12);
    }

    #[test]
    fn recover_min_norm_non_unique() {
        let m = presets::estimation_example();
        let (x, unique) = recover_state(&m, &path(&[1]), &DVector::from_element(1, 3.0), &DVector::zeros(0)).unwrap();
        assert!(!unique);
        assert!((x - DVector::from_vec(vec![1.2, 0.6])).norm() < 1e-12);
    }

    #[test]
    fn recover_rejects_inconsistent_path() {
        let m = presets::control_example();
        // mode 1 has a zero second output row
        let y = DVector::from_vec(vec![1.0, 1.0]);
        assert!(matches!(
            recover_state(&m, &path(&[1]), &y, &DVector::zeros(0)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn harvest_dedups_across_steps() {
        let m = presets::estimation_example();
        // a state whose window starts at absolute time 5 with theta = {(1,2,1)}
        let mut s = ObserverState::init(&m, &DVector::from_element(1, 1.0), ObserverConfig::default()).unwrap();
        s.t = 7;
        s.window = 2;
        s.theta = vec![path(&[1, 2, 1])];
        let agreement = AgreementResult { indices: vec![0], agreed_runs: vec![(1, vec![1, 0])] };
        let mut cursor = HarvestCursor::default();
        let got = harvest_transitions(&s, &agreement, &mut cursor);
        assert_eq!(got, vec![Transition { time: 6, from: 1, to: 0 }]);
        assert!(harvest_transitions(&s, &agreement, &mut cursor).is_empty());
        assert_eq!(cursor.len(), 1);
    }
}
