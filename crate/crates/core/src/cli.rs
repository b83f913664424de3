//! Command-line front end: configuration loading, flag overrides, run
//! manifests and subcommand dispatch.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiment::table1::{run_replicates, run_table};
use crate::experiment::{self, kick_ratio, Efficiency, ExperimentConfig, Normalization};
use crate::hooke::{simulate_spring, HookeParams, SpringMode};
use crate::infomodel::InformationMode;
use crate::output::{self, ReportJson};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_OTHER: i32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Local,
    Nonlocal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EfficiencyArg {
    Efficient,
    Inefficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizationArg {
    Singles,
    Coincidences,
}

/// Flags that override configuration-file values.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Master seed (falls back to BOHM_EPR_SEED, then the config file).
    #[arg(long, global = true, env = "BOHM_EPR_SEED")]
    pub seed: Option<u64>,
    /// Number of pairs per run.
    #[arg(long, global = true)]
    pub pairs: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, global = true, value_enum)]
    pub efficiency: Option<EfficiencyArg>,
    #[arg(long, global = true, value_enum)]
    pub normalization: Option<NormalizationArg>,
}

#[derive(Debug, Parser)]
#[command(name = "bohm-epr", version, about = "Bohmian trajectories for Stern-Gerlach EPR pairs")]
pub struct Cli {
    /// TOML configuration with [physics], [integration] and [experiment] sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Worker threads for pair-level parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one EPR experiment and write report.json and events.csv.
    RunEpr,
    /// Run the four locality / efficiency configurations.
    Table1 {
        /// Repeat with seeds seed, seed+1, ... and report per-row mean and std.
        #[arg(long, default_value_t = 1)]
        replicates: usize,
    },
    /// Time inside a switching transient relative to time inside the magnet.
    KickRatio {
        /// Beam speed in cm/s; defaults to the configured beam speed.
        #[arg(long)]
        beam_speed: Option<f64>,
    },
    /// Two-mass spring with instantaneous, retarded and expanded coupling.
    HookeDemo(HookeArgs),
    /// Write full trajectories of the first few pairs.
    DumpTrajectories {
        /// How many pairs to trace.
        #[arg(long, default_value_t = 4)]
        trace_pairs: u64,
        /// Keep every n-th step (0 uses the config value, or 10 if that is 0).
        #[arg(long, default_value_t = 0)]
        record_every: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct HookeArgs {
    #[arg(long, default_value_t = 1.0)]
    pub m1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub m2: f64,
    #[arg(long, default_value_t = 1.0)]
    pub k_spring: f64,
    #[arg(long, default_value_t = -1.1)]
    pub x1: f64,
    #[arg(long, default_value_t = 1.1)]
    pub x2: f64,
    #[arg(long, default_value_t = 0.0)]
    pub v1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub v2: f64,
    /// Retardation delay in s.
    #[arg(long, conflicts_with = "sound_speed")]
    pub tau: Option<f64>,
    /// Derive the delay as initial separation / sound speed.
    #[arg(long)]
    pub sound_speed: Option<f64>,
    /// Simulated time in oscillation periods.
    #[arg(long, default_value_t = 10.0)]
    pub periods: f64,
    /// Step in s; defaults to min(period / 2000, tau / 8).
    #[arg(long)]
    pub dt: Option<f64>,
}

/// Provenance of one CLI invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub version: String,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    /// Config keys set by flags rather than the file.
    pub overrides: Vec<String>,
    pub outputs: Vec<PathBuf>,
}

fn config_error(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

/// Parses TOML text into a resolved config; missing keys take defaults,
/// unknown keys are rejected.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(config_error)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Reads the config file (or defaults), applies flag overrides and
/// validates. Returns the config and the overridden keys.
pub fn parse_config(path: Option<&Path>, overrides: &Overrides) -> Result<(ExperimentConfig, Vec<String>)> {
    let mut cfg = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            toml::from_str(&text).map_err(config_error)?
        }
        None => ExperimentConfig::default(),
    };
    let applied = apply_overrides(&mut cfg, overrides);
    cfg.validate()?;
    Ok((cfg, applied))
}

pub fn apply_overrides(cfg: &mut ExperimentConfig, o: &Overrides) -> Vec<String> {
    let mut applied = Vec::new();
    let e = &mut cfg.experiment;
    if let Some(seed) = o.seed {
        e.master_seed = seed;
        applied.push("experiment.master_seed".to_string());
    }
    if let Some(n) = o.pairs {
        e.n_pairs = n;
        applied.push("experiment.n_pairs".to_string());
    }
    if let Some(m) = o.mode {
        e.mode = match m {
            ModeArg::Local => InformationMode::Local,
            ModeArg::Nonlocal => InformationMode::Nonlocal,
        };
        applied.push("experiment.mode".to_string());
    }
    if let Some(x) = o.efficiency {
        e.efficiency = match x {
            EfficiencyArg::Efficient => Efficiency::Efficient,
            EfficiencyArg::Inefficient => Efficiency::Inefficient,
        };
        applied.push("experiment.efficiency".to_string());
    }
    if let Some(n) = o.normalization {
        e.normalization = match n {
            NormalizationArg::Singles => Normalization::Singles,
            NormalizationArg::Coincidences => Normalization::Coincidences,
        };
        applied.push("experiment.normalization".to_string());
    }
    applied
}

/// Config as TOML text that `parse_config_str` reads back unchanged.
pub fn emit_config(cfg: &ExperimentConfig) -> Result<String> {
    toml::to_string(cfg).map_err(config_error)
}

/// SHA-256 of the canonical JSON form (sorted keys) of the resolved config.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let canonical = serde_json::to_value(cfg).expect("config serializes");
    let bytes = serde_json::to_vec(&canonical).expect("json value serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let n = workers.unwrap_or_else(default_workers).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?;
    pool.install(f)
}

struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn file(&mut self, name: &str) -> Result<fs::File> {
        let path = self.dir.join(name);
        let f = fs::File::create(&path)?;
        self.written.push(path);
        Ok(f)
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let f = self.file(name)?;
        serde_json::to_writer_pretty(f, value)?;
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, text)?;
        self.written.push(path);
        Ok(())
    }

    fn finish(mut self, mut manifest: RunManifest) -> Result<RunManifest> {
        let path = self.dir.join("manifest.json");
        self.written.push(path.clone());
        manifest.outputs = self.written;
        manifest.finished_unix_s = unix_now();
        fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(manifest)
    }
}

/// Executes a parsed command line. Messages go to stdout.
pub fn execute(cli: &Cli) -> Result<()> {
    let started = unix_now();
    let (cfg, applied) = parse_config(cli.config.as_deref(), &cli.overrides)?;
    let manifest = |command: &str| RunManifest {
        command: command.to_string(),
        config_hash: config_hash(&cfg),
        master_seed: cfg.experiment.master_seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix_s: started,
        finished_unix_s: started,
        overrides: applied.clone(),
        outputs: Vec::new(),
    };

    match &cli.command {
        Command::RunEpr => {
            let report = in_pool(cli.workers, || experiment::run_epr(&cfg))?;
            let json = ReportJson::from_report(&report);
            let mut out = Outputs::new(&cli.out)?;
            out.json("report.json", &json)?;
            output::write_event_log(&report, out.file("events.csv")?)?;
            out.finish(manifest("run-epr"))?;
            match &report.bell {
                Ok(b) => println!(
                    "S = {:.5} +/- {:.5}   |S| form = {:.5}   ({} pairs)",
                    b.s_signed,
                    b.sigma_s,
                    b.s_abs,
                    report.records.len()
                ),
                Err(e) => println!("no Bell estimate: {e}"),
            }
            if let Ok(rates) = experiment::count_rates(&report) {
                println!(
                    "Q1'/Q1 = ({:.4}, {:.4})   C2'/C2 = {:.4}",
                    rates.singles_ratio.alice, rates.singles_ratio.bob, rates.coincidence_ratio
                );
            }
        }
        Command::Table1 { replicates } => {
            let mut out = Outputs::new(&cli.out)?;
            let (table, _) = in_pool(cli.workers, || run_table(&cfg))?;
            print!("{}", table.render());
            out.json("table1.json", &table)?;
            out.text("table1.txt", &table.render())?;
            if *replicates > 1 {
                let summary = in_pool(cli.workers, || run_replicates(&cfg, *replicates))?;
                print!("{}", summary.render());
                out.json("table1_replicates.json", &summary)?;
            }
            out.finish(manifest("table1"))?;
        }
        Command::KickRatio { beam_speed } => {
            let v = beam_speed.unwrap_or(cfg.physics.beam_speed);
            if !(v.is_finite() && v > 0.0 && v <= cfg.physics.light_speed) {
                return Err(Error::Config(format!(
                    "--beam-speed must be in (0, {}] cm/s, got {v}",
                    cfg.physics.light_speed
                )));
            }
            let ratio = kick_ratio(v, cfg.physics.light_speed);
            println!(
                "{}",
                serde_json::json!({
                    "beam_speed": v,
                    "light_speed": cfg.physics.light_speed,
                    "kick_ratio": ratio,
                    "kick_threshold": cfg.experiment.kick_threshold,
                    "ejected_when_switched": ratio >= cfg.experiment.kick_threshold,
                })
            );
        }
        Command::HookeDemo(args) => {
            let mut params = HookeParams {
                m1: args.m1,
                m2: args.m2,
                k_spring: args.k_spring,
                tau: args.tau.unwrap_or(0.0),
                x1_0: args.x1,
                x2_0: args.x2,
                v1_0: args.v1,
                v2_0: args.v2,
            };
            if let Some(cs) = args.sound_speed {
                if !(cs.is_finite() && cs > 0.0) {
                    return Err(Error::Config(format!("--sound-speed must be positive, got {cs}")));
                }
                params = params.with_sound_speed(cs);
            }
            params.validate()?;
            let period = params.period();
            let dt = args.dt.unwrap_or_else(|| {
                let base = period / 2000.0;
                if params.tau > 0.0 {
                    base.min(params.tau / 8.0)
                } else {
                    base
                }
            });
            let t_end = args.periods * period;
            let mut out = Outputs::new(&cli.out)?;
            for mode in SpringMode::ALL {
                let states = simulate_spring(&params, mode, t_end, dt)?;
                output::write_spring(&states, out.file(&output::spring_file_name(mode))?)?;
            }
            out.json(
                "hooke_meta.json",
                &serde_json::json!({
                    "params": params,
                    "dt": dt,
                    "t_end": t_end,
                    "period": period,
                    "delta_x": (params.x2_0 - params.x1_0).abs(),
                    "delta_x_definition": "initial separation |x2(0) - x1(0)|",
                    "sound_speed": args.sound_speed,
                }),
            )?;
            out.finish(manifest("hooke-demo"))?;
            println!("tau = {} s, dt = {dt} s, {} periods", params.tau, args.periods);
        }
        Command::DumpTrajectories {
            trace_pairs,
            record_every,
        } => {
            let mut cfg = cfg.clone();
            cfg.integration.record_every = match (*record_every, cfg.integration.record_every) {
                (0, 0) => 10,
                (0, r) => r,
                (r, _) => r,
            };
            let pairs = experiment::trace_pairs(&cfg, *trace_pairs)?;
            let mut out = Outputs::new(&cli.out)?;
            output::write_trajectories(&pairs, out.file("trajectories.csv")?)?;
            out.finish(manifest("dump-trajectories"))?;
            println!("traced {} pairs", pairs.len());
        }
    }
    Ok(())
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        return EXIT_NUMERICAL;
    }
    match err {
        Error::Config(_) | Error::Physics(_) | Error::Timeline(_) | Error::Hooke(_) => EXIT_CONFIG,
        _ => EXIT_OTHER,
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_silver_defaults() {
        let cfg = parse_config_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.experiment.n_pairs, 4000);
        assert_eq!(cfg.experiment.mode, InformationMode::Nonlocal);
        assert_eq!(cfg.experiment.efficiency, Efficiency::Efficient);
        assert_eq!(cfg.experiment.normalization, Normalization::Singles);
        assert_eq!(cfg.physics.field_gradient, 1e4);
    }

    #[test]
    fn zero_pairs_rejected() {
        let err = parse_config_str("[experiment]\nn_pairs = 0\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.to_string().contains("n_pairs"), "{err}");
    }

    #[test]
    fn unknown_key_and_type_mismatch_named() {
        let err = parse_config_str("[experiment]\nn_pair = 10\n").unwrap_err();
        assert!(err.to_string().contains("n_pair"), "{err}");
        let err = parse_config_str("[physics]\nmass = \"heavy\"\n").unwrap_err();
        assert!(err.to_string().contains("mass"), "{err}");
        let err = parse_config_str("[experiment]\nmode = \"sideways\"\n").unwrap_err();
        assert!(err.to_string().contains("mode") || err.to_string().contains("sideways"), "{err}");
    }

    #[test]
    fn config_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.experiment.mode = InformationMode::Local;
        cfg.experiment.master_seed = 12345;
        cfg.experiment.switches_a = vec![[-1.0, 0.25]];
        cfg.physics.packet_width = 1.234_567_890_123e-3;
        let text = emit_config(&cfg).unwrap();
        assert_eq!(parse_config_str(&text).unwrap(), cfg);
    }

    #[test]
    fn hash_ignores_key_order() {
        let a = parse_config_str("[experiment]\nn_pairs = 10\nmaster_seed = 3\n").unwrap();
        let b = parse_config_str("[experiment]\nmaster_seed = 3\nn_pairs = 10\n").unwrap();
        assert_eq!(config_hash(&a), config_hash(&b));
        let c = parse_config_str("[experiment]\nmaster_seed = 4\nn_pairs = 10\n").unwrap();
        assert_ne!(config_hash(&a), config_hash(&c));
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.toml");
        fs::write(&path, "[experiment]\nn_pairs = 100\nmode = \"nonlocal\"\n").unwrap();
        let overrides = Overrides {
            pairs: Some(12),
            mode: Some(ModeArg::Local),
            ..Default::default()
        };
        let (cfg, applied) = parse_config(Some(&path), &overrides).unwrap();
        assert_eq!(cfg.experiment.n_pairs, 12);
        assert_eq!(cfg.experiment.mode, InformationMode::Local);
        assert_eq!(applied, vec!["experiment.n_pairs", "experiment.mode"]);
    }
}
