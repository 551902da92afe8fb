//! Command-line interface.
//!
//! One binary, grouped subcommands:
//!
//! - `verifier serve|enroll`: run the verification service / manage its
//!   registry offline.
//! - `agent bootstrap|enroll|authenticate`: act as a device with a
//!   simulated sensor.
//! - `sweep`, `p-sweep`, `theta-sweep`, `confusion`: the evaluation
//!   experiments; data lands as CSV plus a gnuplot script.
//! - `ingest`: assemble a fingerprint from recorded waveform captures.
//! - `models`: list the builtin sensor models.
//!
//! All failures exit nonzero after a single machine-parsable line
//! `error: <message>` on stderr.

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use sensorprint::agent::{SimulatedAgent, WireClient};
use sensorprint::eval::{
    confusion_table, ingest_captures, run_confusion, run_p_sweep, run_sweep, run_theta_sweep,
    ExperimentConfig,
};
use sensorprint::registry::{
    AuthStatus, Registry, DEFAULT_FRESHNESS_WINDOW_S, DEFAULT_MAX_RETRIES, DEFAULT_P,
    DEFAULT_THETA,
};
use sensorprint::server::{system_now, VerifierServer};
use sensorprint::session::run_auth_session;
use sensorprint::wire::EnrollStatus;
use sensorprint::{fpfile, modelfile};
use sensorprint_core::fingerprint::FrequencyGrid;
use sensorprint_core::sensor::{builtin_presets, instantiate, Environment, Quirk, SensorModel};

#[derive(Parser)]
#[command(
    name = "sensorprint",
    version,
    about = "Challenge-response fingerprinting of analog sensors"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verifier-side service and registry management
    Verifier {
        #[command(subcommand)]
        command: VerifierCommand,
    },
    /// Device-side agent over a simulated sensor
    Agent {
        #[command(subcommand)]
        command: AgentCommand,
    },
    /// Record full-fingerprint sweeps for every configured device
    Sweep(EvalArgs),
    /// RMSE against own and sibling fingerprints per partial size
    #[command(name = "p-sweep")]
    PSweep(EvalArgs),
    /// Precision, recall, and F1 across acceptance thresholds
    #[command(name = "theta-sweep")]
    ThetaSweep {
        #[command(flatten)]
        eval: EvalArgs,
        /// Points per partial fingerprint
        #[arg(long, default_value_t = DEFAULT_P)]
        points: usize,
    },
    /// FN / FP(inter) / FP(intra) rates per model at one operating point
    Confusion {
        #[command(flatten)]
        eval: EvalArgs,
        /// Points per partial fingerprint
        #[arg(long, default_value_t = DEFAULT_P)]
        points: usize,
        /// Acceptance threshold in volts
        #[arg(long, default_value_t = DEFAULT_THETA)]
        theta: f64,
    },
    /// Assemble a fingerprint from a directory of `<hz>.csv` captures
    Ingest {
        /// Directory holding one capture file per grid frequency
        #[arg(long)]
        dir: PathBuf,
        /// Device id recorded in the fingerprint
        #[arg(long)]
        device: String,
        /// Output fingerprint file
        #[arg(long)]
        output: PathBuf,
        /// Frequency grid as <f_min>:<f_max>:<step>
        #[arg(long, default_value = "1000:1000000:1000")]
        grid: String,
        /// Ambient temperature during the captures
        #[arg(long, default_value_t = 25.0)]
        temperature: f64,
    },
    /// List the builtin sensor models
    Models,
}

#[derive(Subcommand)]
enum VerifierCommand {
    /// Serve the wire protocol over TCP
    Serve {
        /// Registry directory (created if missing)
        #[arg(long)]
        registry: PathBuf,
        /// Listen address, e.g. 127.0.0.1:7770
        #[arg(long)]
        listen: String,
        /// Attempt freshness window in seconds
        #[arg(long, default_value_t = DEFAULT_FRESHNESS_WINDOW_S)]
        freshness_window: u64,
    },
    /// Enroll a fingerprint file directly into a registry
    Enroll {
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        device: String,
        /// Fingerprint file recorded at bootstrap
        #[arg(long)]
        fingerprint: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THETA)]
        theta: f64,
        /// Points per partial fingerprint
        #[arg(long, default_value_t = DEFAULT_P)]
        points: usize,
        /// Total attempts allowed per session
        #[arg(long, default_value_t = DEFAULT_MAX_RETRIES)]
        max_retries: u32,
    },
}

#[derive(Args)]
struct SensorArgs {
    /// Builtin model preset name
    #[arg(long, conflicts_with = "model_file")]
    model: Option<String>,
    /// Custom model file
    #[arg(long)]
    model_file: Option<PathBuf>,
    /// Instance seed: fixes the process variation of the simulated part
    #[arg(long)]
    seed: u64,
    /// Ambient temperature in degrees C
    #[arg(long, default_value_t = 25.0)]
    temperature: f64,
    /// Per-measurement temperature jitter (std dev, degrees C)
    #[arg(long, default_value_t = 0.25)]
    temp_jitter: f64,
    /// Frequency grid as <f_min>:<f_max>:<step>
    #[arg(long, default_value = "1000:1000000:1000")]
    grid: String,
}

impl SensorArgs {
    fn model(&self) -> anyhow::Result<SensorModel> {
        match (&self.model, &self.model_file) {
            (Some(name), None) => SensorModel::preset(name)
                .ok_or_else(|| anyhow!("unknown model preset '{name}'")),
            (None, Some(path)) => Ok(modelfile::read_model(path)?),
            (None, None) => bail!("one of --model or --model-file is required"),
            (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
        }
    }

    fn grid(&self) -> anyhow::Result<FrequencyGrid> {
        fpfile::parse_grid(&self.grid)
            .ok_or_else(|| anyhow!("bad grid '{}', expected <f_min>:<f_max>:<step>", self.grid))
    }

    fn agent(&self, device_id: &str, points: usize) -> anyhow::Result<SimulatedAgent> {
        let model = self.model()?;
        let instance = instantiate(&model, self.seed)?;
        let mut agent =
            SimulatedAgent::new(device_id, instance, self.grid()?, points, self.seed);
        agent.env = Environment::new(self.temperature, self.temp_jitter);
        Ok(agent)
    }
}

#[derive(Subcommand)]
enum AgentCommand {
    /// Sweep the simulated sensor and write its full fingerprint
    Bootstrap {
        #[arg(long)]
        device: String,
        #[command(flatten)]
        sensor: SensorArgs,
        /// Output fingerprint file
        #[arg(long)]
        output: PathBuf,
        /// Measurements averaged per frequency
        #[arg(long, default_value_t = 3)]
        repeats: u32,
    },
    /// Enroll a fingerprint file with a remote verifier
    Enroll {
        /// Verifier address, e.g. 127.0.0.1:7770
        #[arg(long)]
        verifier: String,
        #[arg(long)]
        fingerprint: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THETA)]
        theta: f64,
        #[arg(long, default_value_t = DEFAULT_P)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_MAX_RETRIES)]
        max_retries: u32,
    },
    /// Run an authentication session against a remote verifier
    Authenticate {
        #[arg(long)]
        device: String,
        /// Verifier address, e.g. 127.0.0.1:7770
        #[arg(long)]
        verifier: String,
        #[command(flatten)]
        sensor: SensorArgs,
        /// Points per partial fingerprint (must match enrollment)
        #[arg(long, default_value_t = DEFAULT_P)]
        points: usize,
        /// Session start timestamp; defaults to the system clock
        #[arg(long)]
        timestamp: Option<u64>,
    },
}

#[derive(Args)]
struct EvalArgs {
    /// Experiment config file (key=value lines)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Where CSV and gnuplot files land
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Builtin presets to evaluate, comma separated
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Additional custom model files (repeatable)
    #[arg(long = "model-file")]
    model_files: Vec<PathBuf>,
    /// Instances drawn per model
    #[arg(long)]
    instances: Option<u32>,
    /// Base seed for all experiment randomness
    #[arg(long)]
    seed: Option<u64>,
    /// Matchings per experiment cell
    #[arg(long)]
    matchings: Option<u32>,
    /// Frequency grid as <f_min>:<f_max>:<step>
    #[arg(long)]
    grid: Option<String>,
}

impl EvalArgs {
    fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(dir) = &self.output_dir {
            config.output_dir = dir.clone();
        }
        if let Some(models) = &self.models {
            config.models = models.clone();
        }
        if !self.model_files.is_empty() {
            config.model_files = self.model_files.clone();
        }
        if let Some(instances) = self.instances {
            config.instances_per_model = instances;
        }
        if let Some(seed) = self.seed {
            config.base_seed = seed;
        }
        if let Some(matchings) = self.matchings {
            config.n_matchings = matchings;
        }
        if let Some(grid) = &self.grid {
            config.grid = fpfile::parse_grid(grid)
                .ok_or_else(|| anyhow!("bad grid '{grid}', expected <f_min>:<f_max>:<step>"))?;
        }
        config.validate()?;
        Ok(config)
    }
}

pub fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Verifier { command } => verifier_command(command),
        Command::Agent { command } => agent_command(command),
        Command::Sweep(eval) => {
            let config = eval.resolve()?;
            let paths = run_sweep(&config)?;
            for p in &paths {
                println!("wrote {}", p.display());
            }
            println!("wrote {}", config.output_dir.join("sweep.gp").display());
            Ok(0)
        }
        Command::PSweep(eval) => {
            let config = eval.resolve()?;
            let path = run_p_sweep(&config)?;
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::ThetaSweep { eval, points } => {
            let config = eval.resolve()?;
            let path = run_theta_sweep(&config, points)?;
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::Confusion {
            eval,
            points,
            theta,
        } => {
            let config = eval.resolve()?;
            let (rows, path) = run_confusion(&config, points, theta)?;
            print!("{}", confusion_table(&rows));
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::Ingest {
            dir,
            device,
            output,
            grid,
            temperature,
        } => {
            let grid = fpfile::parse_grid(&grid)
                .ok_or_else(|| anyhow!("bad grid '{grid}', expected <f_min>:<f_max>:<step>"))?;
            let fingerprint = ingest_captures(&dir, &grid, &device, temperature)?;
            fpfile::write_fingerprint(&output, &fingerprint)?;
            println!("wrote {}", output.display());
            Ok(0)
        }
        Command::Models => {
            println!(
                "{:<10} {:>11} {:>13} {:>8} {:>11}  quirk",
                "name", "supply [V]", "temp [degC]", "dc [V]", "slope [V/C]"
            );
            for m in builtin_presets() {
                let quirk = match m.quirk {
                    Quirk::None => "none".to_string(),
                    Quirk::ShutdownBand { f_lo_hz, f_hi_hz } => {
                        format!("shutdown {f_lo_hz}-{f_hi_hz} Hz")
                    }
                    Quirk::FlatHighBand { f_knee_hz } => format!("flat above {f_knee_hz} Hz"),
                    Quirk::SaturatingVariance { cap_v2 } => {
                        format!("variance capped at {cap_v2} V^2")
                    }
                };
                println!(
                    "{:<10} {:>4}..{:<5} {:>6}..{:<5} {:>8} {:>11}  {}",
                    m.name,
                    m.supply_min_v,
                    m.supply_max_v,
                    m.temp_min_c,
                    m.temp_max_c,
                    m.dc_output_at_25c_v,
                    m.temp_slope_v_per_c,
                    quirk
                );
            }
            Ok(0)
        }
    }
}

fn verifier_command(command: VerifierCommand) -> anyhow::Result<i32> {
    match command {
        VerifierCommand::Serve {
            registry,
            listen,
            freshness_window,
        } => {
            let registry = Registry::open(&registry)?.with_freshness_window(freshness_window);
            println!(
                "serving registry {} on {listen} ({} devices)",
                registry.dir().display(),
                registry.device_ids().len()
            );
            VerifierServer::new(Arc::new(registry)).serve(listen.as_str())?;
            Ok(0)
        }
        VerifierCommand::Enroll {
            registry,
            device,
            fingerprint,
            theta,
            points,
            max_retries,
        } => {
            let registry = Registry::open(&registry)?;
            let record = registry.enroll_file(
                &device,
                &fingerprint,
                theta,
                points,
                max_retries,
                system_now(),
            )?;
            println!(
                "enrolled {} (theta={}, P={}, max_retries={})",
                record.device_id, record.theta, record.p, record.max_retries
            );
            Ok(0)
        }
    }
}

fn agent_command(command: AgentCommand) -> anyhow::Result<i32> {
    match command {
        AgentCommand::Bootstrap {
            device,
            sensor,
            output,
            repeats,
        } => {
            let agent = sensor.agent(&device, DEFAULT_P)?;
            let fingerprint = agent.bootstrap_fingerprint(repeats)?;
            fpfile::write_fingerprint(&output, &fingerprint)?;
            println!(
                "wrote {} ({} frequencies, {} repeats)",
                output.display(),
                fingerprint.entries.len(),
                repeats
            );
            Ok(0)
        }
        AgentCommand::Enroll {
            verifier,
            fingerprint,
            theta,
            points,
            max_retries,
        } => {
            let fp = fpfile::read_fingerprint(&fingerprint)?;
            let client = WireClient::connect(verifier.as_str())
                .with_context(|| format!("connecting to {verifier}"))?;
            let resp = client.enroll(&fp, theta, points as u32, max_retries)?;
            match resp.status {
                EnrollStatus::Ok => {
                    println!("enrolled {}", fp.device_id);
                    Ok(0)
                }
                status => {
                    eprintln!("error: enrollment failed: {status:?} {}", resp.detail);
                    Ok(1)
                }
            }
        }
        AgentCommand::Authenticate {
            device,
            verifier,
            sensor,
            points,
            timestamp,
        } => {
            let mut agent = sensor.agent(&device, points)?;
            let client = WireClient::connect(verifier.as_str())
                .with_context(|| format!("connecting to {verifier}"))?;
            let now = timestamp.unwrap_or_else(system_now);
            let outcome = run_auth_session(&mut agent, &client, now)?;
            let epsilon = outcome
                .epsilon
                .map(|e| e.to_string())
                .unwrap_or_else(|| "-".into());
            println!(
                "status={} epsilon={} attempts_used={}",
                outcome.status.as_str(),
                epsilon,
                outcome.attempts_used
            );
            Ok(if outcome.status == AuthStatus::Accepted {
                0
            } else {
                1
            })
        }
    }
}
