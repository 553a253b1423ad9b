use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lti_sysid::bounds::{check_proposition, corollary2_bound, theorem1_bound, PropId};
use lti_sysid::estimators::{
    assemble_data_matrices, ols_final_sample, ols_full, ols_unequal_length, read_estimate,
    write_estimate, Method,
};
use lti_sysid::experiments::{builtin_system, random_system, run_sweep, write_sweep_outputs, ScenarioConfig};
use lti_sysid::lti::{load_dataset, save_dataset, simulate_dataset, true_markov, MarkovMatrix, NoiseConfig, SystemModel};
use lti_sysid::realization::{fir_hinf_report, ho_kalman, GRID_FACTOR};
use lti_sysid::{Result, SysIdError};

#[derive(Parser)]
#[command(name = "lti-sysid", version, about = "Multi-rollout identification of partially observed LTI systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct NoiseArgs {
    #[arg(long, default_value_t = 1.0)]
    sigma_u: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma_w: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma_v: f64,
    #[arg(long, default_value_t = 0.0)]
    sigma_0: f64,
}

impl NoiseArgs {
    fn config(self) -> Result<NoiseConfig> {
        NoiseConfig::new(self.sigma_u, self.sigma_w, self.sigma_v, self.sigma_0)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Full,
    Final,
    Unequal,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Full => Method::Full,
            MethodArg::Final => Method::FinalSample,
            MethodArg::Unequal => Method::UnequalLength,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoremArg {
    #[value(name = "1")]
    One,
    #[value(name = "cor2")]
    Cor2,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate rollouts and write a dataset directory.
    Simulate {
        /// Builtin name (newton, newton_delta(D), unstable_3x3), random:SEED, or a JSON file.
        #[arg(long)]
        system: String,
        #[arg(long = "rollouts", short = 'n')]
        n_rollouts: usize,
        #[arg(long = "length", short = 't')]
        length: usize,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate Markov parameters from a dataset directory.
    Estimate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        method: MethodArg,
        /// Markov length; defaults to the rollout length.
        #[arg(long)]
        t1: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover a state-space realization with Ho-Kalman.
    Hokalman {
        /// Estimate CSV with its JSON sidecar.
        #[arg(long, conflicts_with = "system")]
        estimate: Option<PathBuf>,
        /// Use the exact Markov parameters of this system instead.
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        t1: usize,
        #[arg(long)]
        t2: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a closed-form error bound.
    Bound {
        #[arg(long)]
        system: String,
        #[arg(long, value_enum, default_value = "1")]
        theorem: TheoremArg,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long = "horizon", short = 't')]
        t: usize,
        #[arg(long = "rollouts", short = 'n')]
        n_rollouts: usize,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long)]
        json: bool,
    },
    /// Monte Carlo check of a concentration inequality.
    Check {
        #[arg(long)]
        system: String,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        prop: u8,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long = "horizon", short = 't')]
        t: usize,
        /// Defaults to the proposition's threshold, rounded up.
        #[arg(long = "rollouts", short = 'n')]
        n_rollouts: Option<usize>,
        #[command(flatten)]
        noise: NoiseArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Run a Monte Carlo sweep described by a JSON scenario file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// H-infinity split between estimation error and FIR truncation.
    FirReport {
        #[arg(long)]
        system: String,
        #[arg(long)]
        estimate: PathBuf,
        /// Defaults to 8 points per Markov block.
        #[arg(long)]
        grid: Option<usize>,
    },
}

fn load_system(spec: &str) -> Result<SystemModel> {
    let path = Path::new(spec);
    if path.is_file() {
        return Ok(serde_json::from_str(&fs::read_to_string(path)?)?);
    }
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed = seed
            .parse()
            .map_err(|_| SysIdError::InvalidInput(format!("bad random seed {seed:?}")))?;
        return random_system(seed, 3, 2, 2);
    }
    builtin_system(spec)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            system,
            n_rollouts,
            length,
            noise,
            seed,
            out,
        } => {
            let sys = load_system(&system)?;
            let ds = simulate_dataset(&sys, &noise.config()?, n_rollouts, length, seed, &system)?;
            save_dataset(&ds, &out)?;
            println!("wrote {n_rollouts} rollouts of length {length} to {}", out.display());
        }
        Command::Estimate { data, method, t1, out } => {
            let ds = load_dataset(&data)?;
            let t2 = ds.rollout_length();
            let t1 = t1.unwrap_or(t2);
            let est = match Method::from(method) {
                Method::Full => ols_full(&assemble_data_matrices(&ds, t1)?)?,
                Method::UnequalLength => ols_unequal_length(&assemble_data_matrices(&ds, t1)?)?,
                Method::FinalSample => {
                    if t1 != t2 {
                        return Err(SysIdError::InvalidInput(
                            "the final-sample method estimates all T2 blocks; omit --t1".into(),
                        ));
                    }
                    ols_final_sample(&ds)?
                }
            };
            let est = match &ds.system {
                Some(sys) => est.with_truth(&true_markov(sys, t1)?)?,
                None => est,
            };
            write_estimate(&est, &out)?;
            println!("method            {}", est.method);
            println!("N                 {}", est.n_rollouts);
            println!("T1                {}", est.t1);
            println!("T2                {}", est.t2);
            println!("min_eig_UUT       {:.6e}", est.min_eig_uut);
            if let (Some(e), Some(ne)) = (est.spectral_error, est.normalized_error) {
                println!("spectral_error    {e:.6e}");
                println!("normalized_error  {ne:.6e}");
            }
        }
        Command::Hokalman {
            estimate,
            system,
            order,
            t1,
            t2,
            out,
        } => {
            let g: MarkovMatrix = match (estimate, system) {
                (Some(path), None) => read_estimate(&path)?.0,
                (None, Some(name)) => true_markov(&load_system(&name)?, t1 + t2 + 1)?,
                _ => {
                    return Err(SysIdError::InvalidInput(
                        "give exactly one of --estimate or --system".into(),
                    ))
                }
            };
            let r = ho_kalman(&g, order, t1, t2)?;
            if let Some(w) = &r.warning {
                eprintln!("warning: {w}");
            }
            let text = serde_json::to_string_pretty(&r)?;
            match out {
                Some(path) => fs::write(path, text)?,
                None => println!("{text}"),
            }
        }
        Command::Bound {
            system,
            theorem,
            delta,
            t,
            n_rollouts,
            noise,
            json,
        } => {
            let sys = load_system(&system)?;
            let noise = noise.config()?;
            let report = match theorem {
                TheoremArg::One => theorem1_bound(&sys, &noise, t, n_rollouts, delta)?,
                TheoremArg::Cor2 => corollary2_bound(&sys, &noise, t, n_rollouts, delta)?,
            };
            if json {
                print_json(&report)?;
            } else {
                print!("{report}");
            }
        }
        Command::Check {
            system,
            prop,
            trials,
            delta,
            t,
            n_rollouts,
            noise,
            seed,
            json,
        } => {
            let sys = load_system(&system)?;
            let prop: PropId = prop.to_string().parse()?;
            if !(delta > 0.0 && delta < 1.0) {
                return Err(SysIdError::InvalidInput(format!("delta must lie in (0, 1), got {delta}")));
            }
            let n = n_rollouts.unwrap_or_else(|| prop.threshold(&sys, t, delta).ceil().max(1.0) as usize);
            let report = check_proposition(prop, &sys, &noise.config()?, t, n, delta, trials, seed)?;
            if json {
                print_json(&report)?;
            } else {
                print!("{report}");
            }
        }
        Command::Sweep { config, out } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(dir) = out {
                cfg.output_dir = dir;
            }
            let res = run_sweep(&cfg)?;
            write_sweep_outputs(&res, &cfg.output_dir)?;
            println!(
                "{} cells, {} missing; outputs in {}",
                res.records.len(),
                res.missing.len(),
                cfg.output_dir.display()
            );
        }
        Command::FirReport { system, estimate, grid } => {
            let sys = load_system(&system)?;
            let (g_hat, _) = read_estimate(&estimate)?;
            let grid = grid.unwrap_or(GRID_FACTOR * g_hat.horizon());
            let rep = fir_hinf_report(&sys, &g_hat, grid)?;
            println!("ols_error_hinf  {:.6e}", rep.ols_error_hinf);
            println!("tail_bound      {:.6e}", rep.tail_bound);
            println!("total_bound     {:.6e}", rep.total_bound);
            println!("grid_points     {}", rep.grid_points);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}
