use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;

use mjls::ambiguity::{self, TransitionDataset};
use mjls::control::{self, Provenance, SynthesisOutcome};
use mjls::harness::{self, ControllerKind, Disturbance, ExperimentConfig, InputPolicy};
use mjls::model::ModelFile;
use mjls::observability::{self, DEFAULT_PAIR_BUDGET};
use mjls::sdp::SolverOptions;
use mjls::{presets, Error, MjlsModel, TransitionMatrix};

#[derive(Parser)]
#[command(name = "mjls", version, about = "Mode estimation and data-driven control for Markov jump linear systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Model JSON; defaults to the shipped example for the subcommand.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Horizon.
    #[arg(long = "T", default_value_t = 200)]
    horizon: usize,
    /// Agreement length needed before the window grows.
    #[arg(long, default_value_t = 2)]
    nc: usize,
    /// Dithering variance.
    #[arg(long, default_value_t = harness::DEFAULT_EPSILON)]
    epsilon: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Run the estimator on an open-loop system driven by Gaussian inputs.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Trajectory CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate mode-observability certificates up to a window length.
    Observability {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        nmax: usize,
        #[arg(long, default_value_t = DEFAULT_PAIR_BUDGET)]
        budget: u128,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Synthesize an output-feedback gain.
    Synthesize {
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        controller: ControllerKind,
        /// Transition counts CSV (required for dr; used as the nominal chain
        /// for stochastic when the model has no P).
        #[arg(long)]
        counts: Option<PathBuf>,
        /// Confidence parameter of the ambiguity sets.
        #[arg(long, default_value_t = 0.05)]
        beta: f64,
        /// Gain JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-loop simulation.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        controller: ControllerKind,
        /// Additive state jump, `t:v1,v2,...`.
        #[arg(long)]
        disturb: Option<Disturbance>,
        /// Skip the default disturbance.
        #[arg(long, conflicts_with = "disturb")]
        no_disturb: bool,
        /// Trajectory CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Gains JSON.
        #[arg(long)]
        gains_out: Option<PathBuf>,
    },
    /// Independent trials with seeds `seed, seed + 1, ...`.
    Batch {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Closed-loop controller; open loop with Gaussian inputs when absent.
        #[arg(long)]
        controller: Option<ControllerKind>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Infeasible(_) => 3,
        Error::Resource { .. } => 4,
        _ => 2,
    }
}

fn load_model(path: Option<&PathBuf>, fallback: fn() -> MjlsModel) -> mjls::Result<(MjlsModel, TransitionMatrix)> {
    match path {
        Some(p) => {
            let file = ModelFile::load(p)?;
            let model = file.model()?;
            let p = file.transition()?.unwrap_or_else(|| TransitionMatrix::uniform(model.n_modes()));
            Ok((model, p))
        }
        None => {
            let model = fallback();
            let p = TransitionMatrix::uniform(model.n_modes());
            Ok((model, p))
        }
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> mjls::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn configure(common: &Common, policy: InputPolicy, fallback: fn() -> MjlsModel) -> mjls::Result<ExperimentConfig> {
    let (model, p) = load_model(common.model.as_ref(), fallback)?;
    let mut cfg = ExperimentConfig::new(model, p, policy, common.horizon, common.seed);
    cfg.n_c = common.nc;
    cfg.epsilon = common.epsilon;
    Ok(cfg)
}

fn run(cli: Cli) -> mjls::Result<()> {
    match cli.command {
        Command::Estimate { common, out } => {
            let cfg = configure(&common, InputPolicy::Gaussian, presets::estimation_example)?;
            let rec = harness::run_experiment(&cfg)?;
            let s = rec.summary();
            eprintln!(
                "terminal N = {}, max N = {}, max |Theta| = {}, resets = {}, harvested = {} ({} wrong)",
                s.terminal_window, s.max_window, s.max_theta, s.resets, s.harvested, s.harvest_errors
            );
            emit(out.as_ref(), &rec.to_csv())
        }
        Command::Observability { model, nmax, budget, out } => {
            let (model, _) = load_model(model.as_ref(), presets::estimation_example)?;
            let table = observability::mo_table(&model, nmax, budget)?;
            let mut text = String::from("N,alpha,omega,holds,witness\n");
            for c in &table {
                let witness = c.witness_pair.as_ref().map(|(a, b)| format!("{a} vs {b}")).unwrap_or_default();
                text.push_str(&format!("{},{},{},{},{witness}\n", c.n, c.alpha, c.omega, c.holds));
            }
            emit(out.as_ref(), &text)
        }
        Command::Synthesize { model, controller, counts, beta, out } => {
            let (model, p) = load_model(model.as_ref(), presets::control_example)?;
            let counts = counts.map(|c| std::fs::read_to_string(c).map_err(Error::from).and_then(|t| TransitionDataset::from_csv(&t))).transpose()?;
            if counts.as_ref().is_some_and(|c| c.n_modes() != model.n_modes()) {
                return Err(Error::Input("counts file size differs from the number of modes".into()));
            }
            let (sets, prov) = match controller {
                ControllerKind::Robust => (control::simplex_vertex_sets(model.n_modes()), Provenance::Robust),
                ControllerKind::Stochastic => (control::singleton_vertex_sets(p.matrix()), Provenance::Stochastic),
                ControllerKind::Dr => {
                    let ds = counts.ok_or_else(|| Error::Input("--counts is required for dr".into()))?;
                    let amb = ambiguity::build_all(&ds, beta)?;
                    for (i, a) in amb.iter().enumerate() {
                        eprintln!("row {}: p_hat = {:?}, radius = {:.5}", i + 1, a.p_hat.as_slice(), a.radius);
                    }
                    (amb.into_iter().map(|a| a.vertices).collect(), Provenance::Dr(0))
                }
            };
            let (outcome, _) = control::design_controller(&model, &sets, None, prov, &SolverOptions::default())?;
            match outcome {
                SynthesisOutcome::Feasible { gamma, gain } => {
                    eprintln!("gamma = {gamma:.6e}");
                    emit(out.as_ref(), &format!("{}\n", serde_json::to_string_pretty(&gain.to_json())?))
                }
                SynthesisOutcome::Infeasible { reason, .. } => Err(Error::Infeasible(format!("{controller}: {reason}"))),
            }
        }
        Command::Simulate { common, controller, disturb, no_disturb, out, gains_out } => {
            let mut cfg = configure(&common, InputPolicy::Feedback(controller), presets::control_example)?;
            let ns = cfg.model.ns();
            cfg.x0 = Some(DVector::from_element(ns, 1.0));
            cfg.disturbance = match (disturb, no_disturb) {
                (Some(d), _) => Some(d),
                (None, true) => None,
                (None, false) => Some(Disturbance { time: 50, delta: DVector::from_element(ns, 5.0) }),
            };
            let rec = harness::run_experiment(&cfg)?;
            let s = rec.summary();
            eprintln!(
                "final |x| = {:.4e}, resets = {}, harvested = {}, gains = {}, first update = {:?}",
                s.final_x_norm,
                s.resets,
                s.harvested,
                rec.gains.len(),
                rec.first_update
            );
            if let Some(p) = gains_out {
                std::fs::write(p, serde_json::to_string_pretty(&rec.gains_json())?)?;
            }
            emit(out.as_ref(), &rec.to_csv())
        }
        Command::Batch { common, trials, controller } => {
            let policy = controller.map_or(InputPolicy::Gaussian, InputPolicy::Feedback);
            let fallback = if controller.is_some() { presets::control_example } else { presets::estimation_example };
            let mut cfg = configure(&common, policy, fallback)?;
            if controller.is_some() {
                cfg.x0 = Some(DVector::from_element(cfg.model.ns(), 1.0));
            }
            let b = harness::batch_trials(&cfg, trials)?;
            println!("trials,{}", b.trials);
            println!("modal_terminal_N,{}", b.modal_terminal_window);
            println!("modal_count,{}", b.modal_count);
            println!("max_theta,{}", b.max_theta);
            println!("harvested,{}", b.harvested);
            println!("harvest_errors,{}", b.harvest_errors);
            println!("coverage_rate,{}", b.coverage_rate);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
