//! Closed-loop experiments: plant and Markov chain simulation, the mode
//! estimator, transition harvesting, ambiguity sets and gain scheduling.
//!
//! Randomness is split into independent ChaCha streams (chain, input noise,
//! initial conditions) derived from one seed, so two runs that differ only in
//! the controller see the same mode sequence and the same dithering.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ambiguity::{self, AmbiguitySet, TransitionDataset};
use crate::control::{self, ControllerGain, Provenance, SynthesisOutcome};
use crate::error::{input_err, Error, Result};
use crate::estimator::{harvest_transitions, HarvestCursor, IndexRange, ObserverConfig, ObserverEvent, ObserverState, Transition};
use crate::model::{MjlsModel, TransitionMatrix};
use crate::presets;
use crate::sdp::SolverOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ControllerKind {
    Robust,
    Stochastic,
    Dr,
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControllerKind::Robust => "robust",
            ControllerKind::Stochastic => "stochastic",
            ControllerKind::Dr => "dr",
        })
    }
}

impl FromStr for ControllerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "robust" => Ok(Self::Robust),
            "stochastic" => Ok(Self::Stochastic),
            "dr" => Ok(Self::Dr),
            _ => input_err(format!("unknown controller kind '{s}' (robust, stochastic, dr)")),
        }
    }
}

/// How inputs are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputPolicy {
    /// Open loop, `u_t ~ N(0, I)`.
    Gaussian,
    /// `u_t = K_t y_t + e_t` with dithering `e_t ~ N(0, epsilon I)`.
    Feedback(ControllerKind),
}

/// Additive jump `x_time += delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Disturbance {
    pub time: usize,
    pub delta: DVector<f64>,
}

impl FromStr for Disturbance {
    type Err = Error;
    /// `"t:v1,v2,..."`
    fn from_str(s: &str) -> Result<Self> {
        let Some((t, v)) = s.split_once(':') else {
            return input_err(format!("disturbance '{s}' must look like t:v1,v2"));
        };
        let time = t.trim().parse().map_err(|_| Error::Input(format!("bad disturbance time '{t}'")))?;
        let vals: std::result::Result<Vec<f64>, _> = v.split(',').map(|x| x.trim().parse::<f64>()).collect();
        let vals = vals.map_err(|_| Error::Input(format!("bad disturbance vector '{v}'")))?;
        Ok(Self { time, delta: DVector::from_vec(vals) })
    }
}

/// `beta_t = scale * (t + 1)^-power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSchedule {
    pub scale: f64,
    pub power: f64,
}

impl Default for BetaSchedule {
    fn default() -> Self {
        Self { scale: 0.5, power: 2.0 }
    }
}

impl BetaSchedule {
    pub fn at(&self, t: usize) -> f64 {
        self.scale * (t as f64 + 1.0).powf(-self.power)
    }
}

/// When the data-driven controller is re-synthesized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cadence {
    pub period: usize,
    /// Relative change of any radius that forces an early attempt.
    pub radius_change: f64,
}

impl Default for Cadence {
    fn default() -> Self {
        Self { period: 10, radius_change: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: MjlsModel,
    /// True chain used by the simulator.
    pub transitions: TransitionMatrix,
    pub policy: InputPolicy,
    pub horizon: usize,
    pub seed: u64,
    pub n_c: usize,
    /// Variance of the dithering noise.
    pub epsilon: f64,
    /// Initial state; drawn from `N(0, I)` when absent.
    pub x0: Option<DVector<f64>>,
    /// Initial mode (0-based); drawn uniformly when absent.
    pub initial_mode: Option<usize>,
    pub disturbance: Option<Disturbance>,
    pub beta: BetaSchedule,
    pub cadence: Cadence,
    pub pathwise_rank_required: bool,
    pub index_range: IndexRange,
    pub solver: SolverOptions,
}

/// Default dithering variance.
pub const DEFAULT_EPSILON: f64 = 1e-6;

impl ExperimentConfig {
    pub fn new(model: MjlsModel, transitions: TransitionMatrix, policy: InputPolicy, horizon: usize, seed: u64) -> Self {
        Self {
            model,
            transitions,
            policy,
            horizon,
            seed,
            n_c: 2,
            epsilon: DEFAULT_EPSILON,
            x0: None,
            initial_mode: None,
            disturbance: None,
            beta: BetaSchedule::default(),
            cadence: Cadence::default(),
            pathwise_rank_required: false,
            index_range: IndexRange::default(),
            solver: SolverOptions::default(),
        }
    }

    /// Random-input estimation run on the first shipped example.
    pub fn estimation_benchmark(seed: u64) -> Self {
        Self::new(presets::estimation_example(), presets::uniform_transitions(), InputPolicy::Gaussian, 200, seed)
    }

    /// Closed-loop run on the second shipped example: `x0 = (1, 1)`, jump
    /// `(5, 5)` at `t = 50`, 200 steps.
    pub fn control_benchmark(kind: ControllerKind, seed: u64) -> Self {
        let mut cfg = Self::new(presets::control_example(), presets::uniform_transitions(), InputPolicy::Feedback(kind), 200, seed);
        cfg.x0 = Some(DVector::from_element(2, 1.0));
        cfg.disturbance = Some(Disturbance { time: 50, delta: DVector::from_element(2, 5.0) });
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if self.horizon == 0 {
            return input_err("horizon must be at least 1");
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return input_err(format!("epsilon must be nonnegative, got {}", self.epsilon));
        }
        if self.n_c == 0 {
            return input_err("n_c must be positive");
        }
        if self.transitions.n_modes() != m.n_modes() {
            return input_err("transition matrix size differs from the number of modes");
        }
        if self.x0.as_ref().is_some_and(|x| x.len() != m.ns()) {
            return input_err("initial state has the wrong dimension");
        }
        if self.initial_mode.is_some_and(|i| i >= m.n_modes()) {
            return input_err("initial mode out of range");
        }
        if let Some(d) = &self.disturbance {
            if d.delta.len() != m.ns() || d.time == 0 {
                return input_err("disturbance needs a positive time and an ns-vector");
            }
        }
        if !(self.beta.scale > 0.0 && self.beta.scale < 1.0 && self.beta.power > 0.0) {
            return input_err("beta schedule needs scale in (0, 1) and a positive power");
        }
        if self.cadence.period == 0 {
            return input_err("synthesis period must be positive");
        }
        Ok(())
    }
}

/// One row of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    /// Ground-truth mode (0-based).
    pub mode: usize,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub u: DVector<f64>,
    pub x_norm: f64,
    pub window: usize,
    pub theta_size: usize,
    pub radii: Vec<f64>,
    /// Index into [`TrajectoryRecord::gains`]; `None` in open loop.
    pub gain_id: Option<usize>,
    pub reset: bool,
    /// Absolute start times of agreed runs.
    pub resolved: Vec<usize>,
    pub harvested: Vec<Transition>,
    pub synthesis_attempted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub steps: Vec<StepRecord>,
    pub gains: Vec<ControllerGain>,
    pub dataset: TransitionDataset,
    pub harvest_errors: usize,
    /// First step at which a data-driven gain replaced the initial one.
    pub first_update: Option<usize>,
    pub synthesis_attempts: usize,
}

/// Per-run statistics, computable from the trajectory CSV alone.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub terminal_window: usize,
    pub max_window: usize,
    pub max_theta: usize,
    pub resets: usize,
    pub harvested: usize,
    pub harvest_errors: usize,
    pub final_x_norm: f64,
}

fn gaussian<R: Rng>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(id);
    r
}

struct Scheduler {
    kind: Option<ControllerKind>,
    gains: Vec<ControllerGain>,
    active: usize,
    held_m: Option<Vec<DMatrix<f64>>>,
    last: Option<(usize, Vec<f64>)>,
    attempts: usize,
    first_update: Option<usize>,
}

fn radius_moved(old: &[f64], new: &[f64], rel: f64) -> bool {
    old.iter().zip(new).any(|(&a, &b)| match (a.is_finite(), b.is_finite()) {
        (true, true) => (a - b).abs() > rel * a,
        (false, false) => false,
        _ => true,
    })
}

impl Scheduler {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let model = &cfg.model;
        let mut s = Self { kind: None, gains: vec![], active: 0, held_m: None, last: None, attempts: 0, first_update: None };
        let InputPolicy::Feedback(kind) = cfg.policy else {
            return Ok(s);
        };
        s.kind = Some(kind);
        let (sets, prov) = match kind {
            ControllerKind::Robust => (control::simplex_vertex_sets(model.n_modes()), Provenance::Robust),
            ControllerKind::Stochastic => (control::singleton_vertex_sets(cfg.transitions.matrix()), Provenance::Stochastic),
            ControllerKind::Dr => (control::simplex_vertex_sets(model.n_modes()), Provenance::Dr(0)),
        };
        let (out, m) = control::design_controller(model, &sets, None, prov, &cfg.solver)?;
        s.attempts = 1;
        s.last = Some((0, vec![f64::INFINITY; model.n_modes()]));
        match out {
            SynthesisOutcome::Feasible { gain, .. } => {
                s.gains.push(gain);
                s.held_m = m;
            }
            SynthesisOutcome::Infeasible { reason, .. } if kind != ControllerKind::Dr => {
                return Err(Error::Infeasible(format!("{kind} synthesis failed at t = 0: {reason}")));
            }
            SynthesisOutcome::Infeasible { .. } => {
                s.gains.push(ControllerGain::zero(model));
                s.held_m = m;
            }
        }
        Ok(s)
    }

    fn gain(&self) -> Option<&ControllerGain> {
        self.gains.get(self.active)
    }

    /// Re-synthesizes the data-driven gain when due. Returns whether an attempt ran.
    fn update(&mut self, cfg: &ExperimentConfig, t: usize, sets: &[AmbiguitySet]) -> Result<bool> {
        if self.kind != Some(ControllerKind::Dr) {
            return Ok(false);
        }
        let model = &cfg.model;
        let vertex_sets: Vec<Vec<DVector<f64>>> = sets.iter().map(|s| s.vertices.clone()).collect();
        let radii: Vec<f64> = sets.iter().map(|s| s.radius).collect();
        let held = &self.gains[self.active];
        // A certified gain whose certificate no longer covers the current sets is stale.
        let stale = held.certificate.as_ref().is_some_and(|c| {
            let acl: Vec<DMatrix<f64>> = (0..model.n_modes()).map(|j| model.a(j) + model.b(j) * &held.k * model.c(j)).collect();
            !(control::certificate_margin(&acl, &c.v, &vertex_sets) > 0.0)
        });
        let due = match &self.last {
            None => true,
            Some((ta, r)) => t >= ta + cfg.cadence.period || radius_moved(r, &radii, cfg.cadence.radius_change),
        };
        if !(due || stale) {
            return Ok(false);
        }
        self.attempts += 1;
        self.last = Some((t, radii));
        let (out, m) = control::design_controller(model, &vertex_sets, self.held_m.as_deref(), Provenance::Dr(t), &cfg.solver)?;
        if let SynthesisOutcome::Feasible { gain, .. } = out {
            self.gains.push(gain);
            self.active = self.gains.len() - 1;
            self.held_m = m;
            self.first_update.get_or_insert(t);
        }
        Ok(true)
    }
}

/// Runs one closed-loop (or open-loop) experiment over `0..=horizon`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    let model = &cfg.model;
    let (nm, ns, na) = (model.n_modes(), model.ns(), model.na());
    let mut chain_rng = stream(cfg.seed, 0);
    let mut noise_rng = stream(cfg.seed, 1);
    let mut init_rng = stream(cfg.seed, 2);
    let mut x = cfg.x0.clone().unwrap_or_else(|| gaussian(ns, &mut init_rng));
    let mut mode = cfg.initial_mode.unwrap_or_else(|| init_rng.random_range(0..nm));
    let mut sched = Scheduler::new(cfg)?;

    let obs_cfg = ObserverConfig { n_c: cfg.n_c, pathwise_rank_required: cfg.pathwise_rank_required, index_range: cfg.index_range };
    let mut obs = ObserverState::init(model, &model.output(mode, &x), obs_cfg)?;
    let mut events: Vec<ObserverEvent> = Vec::new();
    let mut cursor = HarvestCursor::default();
    let mut dataset = TransitionDataset::new(nm);
    let mut truth = vec![mode];
    let mut steps = Vec::with_capacity(cfg.horizon + 1);
    let mut harvest_errors = 0;
    let dither = cfg.epsilon.sqrt();

    for t in 0..=cfg.horizon {
        let y = model.output(mode, &x);
        let harvested = harvest_transitions(&obs, obs.agreement(), &mut cursor);
        harvest_errors += harvested
            .iter()
            .filter(|h| truth.get(h.time) != Some(&h.from) || truth.get(h.time + 1) != Some(&h.to))
            .count();
        dataset.record(&harvested)?;
        let sets = ambiguity::build_all(&dataset, cfg.beta.at(t))?;
        let attempted = sched.update(cfg, t, &sets)?;

        let noise = gaussian(na, &mut noise_rng);
        let u = match sched.gain() {
            None => noise,
            Some(g) => &g.k * &y + noise * dither,
        };
        steps.push(StepRecord {
            t,
            mode,
            x_norm: x.norm(),
            x: x.clone(),
            y: y.clone(),
            u: u.clone(),
            window: obs.window(),
            theta_size: obs.theta().len(),
            radii: sets.iter().map(|s| s.radius).collect(),
            gain_id: sched.kind.map(|_| sched.active),
            reset: events.iter().any(|e| matches!(e, ObserverEvent::Reset { .. })),
            resolved: events
                .iter()
                .filter_map(|e| match e {
                    ObserverEvent::ModesResolved { start, .. } => Some(*start),
                    _ => None,
                })
                .collect(),
            harvested,
            synthesis_attempted: attempted,
        });
        if t == cfg.horizon {
            break;
        }

        let mut next = model.next_state(mode, &x, &u);
        if let Some(d) = cfg.disturbance.as_ref().filter(|d| d.time == t + 1) {
            next += &d.delta;
        }
        mode = cfg.transitions.sample_next(mode, &mut chain_rng);
        x = next;
        truth.push(mode);
        let out = obs.step(model, &model.output(mode, &x), &u)?;
        obs = out.state;
        events = out.events;
    }

    Ok(TrajectoryRecord {
        steps,
        gains: sched.gains,
        dataset,
        harvest_errors,
        first_update: sched.first_update,
        synthesis_attempts: sched.attempts,
    })
}

fn fmt_vec(v: &DVector<f64>, out: &mut String) {
    for x in v.iter() {
        let _ = write!(out, ",{x}");
    }
}

fn fmt_transitions(ts: &[Transition]) -> String {
    ts.iter()
        .map(|h| format!("{}:{}>{}", h.time, h.from + 1, h.to + 1))
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_transitions(s: &str) -> Result<Vec<Transition>> {
    if s.is_empty() {
        return Ok(vec![]);
    }
    s.split(';')
        .map(|item| {
            let bad = || Error::Input(format!("bad transition '{item}'"));
            let (time, pair) = item.split_once(':').ok_or_else(bad)?;
            let (from, to) = pair.split_once('>').ok_or_else(bad)?;
            let p = |v: &str| v.parse::<usize>().map_err(|_| bad());
            let (from, to) = (p(from)?, p(to)?);
            if from == 0 || to == 0 {
                return Err(bad());
            }
            Ok(Transition { time: p(time)?, from: from - 1, to: to - 1 })
        })
        .collect()
}

impl TrajectoryRecord {
    pub fn header(ns: usize, ny: usize, na: usize, nm: usize) -> String {
        let mut h = String::from("t,mode");
        for (p, n) in [("x", ns), ("y", ny), ("u", na)] {
            for k in 1..=n {
                let _ = write!(h, ",{p}{k}");
            }
        }
        h.push_str(",x_norm,N,theta_size");
        for k in 1..=nm {
            let _ = write!(h, ",radius{k}");
        }
        h.push_str(",gain_id,reset,harvested");
        h
    }

    /// Trajectory CSV: one row per step; modes are 1-based, radii may be `inf`,
    /// `gain_id` is empty in open loop and `harvested` lists `time:from>to` items.
    pub fn to_csv(&self) -> String {
        let Some(first) = self.steps.first() else {
            return String::new();
        };
        let mut out = Self::header(first.x.len(), first.y.len(), first.u.len(), first.radii.len());
        out.push('\n');
        for s in &self.steps {
            let _ = write!(out, "{},{}", s.t, s.mode + 1);
            fmt_vec(&s.x, &mut out);
            fmt_vec(&s.y, &mut out);
            fmt_vec(&s.u, &mut out);
            let _ = write!(out, ",{},{},{}", s.x_norm, s.window, s.theta_size);
            for r in &s.radii {
                let _ = write!(out, ",{r}");
            }
            let gid = s.gain_id.map(|g| g.to_string()).unwrap_or_default();
            let _ = writeln!(out, ",{gid},{},{}", u8::from(s.reset), fmt_transitions(&s.harvested));
        }
        out
    }

    /// Event log: `t,N,theta_size,resolved,harvested,reset`.
    pub fn events_csv(&self) -> String {
        let mut out = String::from("t,N,theta_size,resolved,harvested,reset\n");
        for s in &self.steps {
            let resolved: Vec<String> = s.resolved.iter().map(|k| k.to_string()).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.t,
                s.window,
                s.theta_size,
                resolved.join(";"),
                fmt_transitions(&s.harvested),
                u8::from(s.reset)
            );
        }
        out
    }

    pub fn summary(&self) -> RunSummary {
        summarize(
            self.steps.iter().map(|s| StepView {
                mode: s.mode,
                window: s.window,
                theta_size: s.theta_size,
                reset: s.reset,
                x_norm: s.x_norm,
                harvested: s.harvested.clone(),
            }),
        )
    }

    /// Gains as a JSON array.
    pub fn gains_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.gains.iter().map(ControllerGain::to_json).collect())
    }

    /// The `x_norm` column.
    pub fn norms(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.x_norm).collect()
    }
}

struct StepView {
    mode: usize,
    window: usize,
    theta_size: usize,
    reset: bool,
    x_norm: f64,
    harvested: Vec<Transition>,
}

fn summarize(rows: impl Iterator<Item = StepView>) -> RunSummary {
    let rows: Vec<StepView> = rows.collect();
    let truth: Vec<usize> = rows.iter().map(|r| r.mode).collect();
    let harvested: Vec<&Transition> = rows.iter().flat_map(|r| r.harvested.iter()).collect();
    RunSummary {
        steps: rows.len(),
        terminal_window: rows.last().map_or(0, |r| r.window),
        max_window: rows.iter().map(|r| r.window).max().unwrap_or(0),
        max_theta: rows.iter().map(|r| r.theta_size).max().unwrap_or(0),
        resets: rows.iter().filter(|r| r.reset).count(),
        harvest_errors: harvested
            .iter()
            .filter(|h| truth.get(h.time) != Some(&h.from) || truth.get(h.time + 1) != Some(&h.to))
            .count(),
        harvested: harvested.len(),
        final_x_norm: rows.last().map_or(0.0, |r| r.x_norm),
    }
}

impl RunSummary {
    /// Recomputes the summary from a trajectory CSV produced by [`TrajectoryRecord::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines.next().ok_or_else(|| Error::Input("empty CSV".into()))?.split(',').collect();
        let col = |name: &str| {
            header
                .iter()
                .position(|h| *h == name)
                .ok_or_else(|| Error::Input(format!("CSV lacks column '{name}'")))
        };
        let (c_mode, c_norm, c_n, c_theta, c_reset, c_harv) =
            (col("mode")?, col("x_norm")?, col("N")?, col("theta_size")?, col("reset")?, col("harvested")?);
        let mut rows = Vec::new();
        for (ln, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != header.len() {
                return input_err(format!("CSV row {} has {} fields, expected {}", ln + 2, f.len(), header.len()));
            }
            let bad = |c: usize| Error::Input(format!("CSV row {}: bad value '{}'", ln + 2, f[c]));
            let mode: usize = f[c_mode].parse().map_err(|_| bad(c_mode))?;
            if mode == 0 {
                return Err(bad(c_mode));
            }
            rows.push(StepView {
                mode: mode - 1,
                x_norm: f[c_norm].parse().map_err(|_| bad(c_norm))?,
                window: f[c_n].parse().map_err(|_| bad(c_n))?,
                theta_size: f[c_theta].parse().map_err(|_| bad(c_theta))?,
                reset: f[c_reset] == "1",
                harvested: parse_transitions(f[c_harv])?,
            });
        }
        Ok(summarize(rows.into_iter()))
    }
}

/// Aggregate over independent trials with seeds `seed, seed + 1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSummary {
    pub trials: usize,
    pub runs: Vec<RunSummary>,
    /// Trials whose terminal window equals the most common terminal window.
    pub modal_terminal_window: usize,
    pub modal_count: usize,
    pub max_theta: usize,
    pub harvested: usize,
    pub harvest_errors: usize,
    /// Fraction of trials whose final ambiguity sets contain every true row.
    pub coverage_rate: f64,
}

pub fn batch_trials(cfg: &ExperimentConfig, n_trials: usize) -> Result<BatchSummary> {
    if n_trials == 0 {
        return input_err("n_trials must be at least 1");
    }
    let mut runs = Vec::with_capacity(n_trials);
    let mut covered = 0;
    for k in 0..n_trials {
        let mut c = cfg.clone();
        c.seed = cfg.seed.wrapping_add(k as u64);
        let rec = run_experiment(&c)?;
        let sets = ambiguity::build_all(&rec.dataset, c.beta.at(c.horizon))?;
        if (0..cfg.model.n_modes()).all(|i| sets[i].contains(&cfg.transitions.row(i))) {
            covered += 1;
        }
        runs.push(rec.summary());
    }
    let mut counts = std::collections::BTreeMap::new();
    for r in &runs {
        *counts.entry(r.terminal_window).or_insert(0usize) += 1;
    }
    let (&modal_terminal_window, &modal_count) = counts.iter().max_by_key(|(w, c)| (**c, std::cmp::Reverse(**w))).expect("nonempty");
    Ok(BatchSummary {
        trials: n_trials,
        modal_terminal_window,
        modal_count,
        max_theta: runs.iter().map(|r| r.max_theta).max().unwrap_or(0),
        harvested: runs.iter().map(|r| r.harvested).sum(),
        harvest_errors: runs.iter().map(|r| r.harvest_errors).sum(),
        coverage_rate: covered as f64 / n_trials as f64,
        runs,
    })
}

/// First `t > after` with `||x_t|| <= fraction * ||x_after||`.
pub fn recovery_time(norms: &[f64], after: usize, fraction: f64) -> Option<usize> {
    let base = *norms.get(after)?;
    norms.iter().enumerate().skip(after + 1).find(|(_, &n)| n <= fraction * base).map(|(t, _)| t)
}
