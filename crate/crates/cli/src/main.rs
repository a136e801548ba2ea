mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_grids, parse_list, parse_pair, RunConfig};

/// Viewport-aware adaptive tiling for 360-degree video.
#[derive(Debug, Parser)]
#[command(name = "adaptile", version)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Flags that override the config file. Every flag also has a config key of
/// the same name with `-` replaced by `_`.
#[derive(Debug, Args, Default)]
struct Overrides {
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    trace_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Internal raster, e.g. 960x480.
    #[arg(long, global = true, value_name = "WxH")]
    frame_size: Option<String>,
    /// Basic-tile grid, e.g. 10x20.
    #[arg(long, global = true, value_name = "RxC")]
    grid: Option<String>,
    /// Field of view in degrees, e.g. 100x100.
    #[arg(long, global = true, value_name = "HxV")]
    fov: Option<String>,
    /// Comma-separated split factors, e.g. 1,0.5,0.25.
    #[arg(long, global = true)]
    gammas: Option<String>,
    #[arg(long, global = true)]
    th_candidates: Option<String>,
    #[arg(long, global = true)]
    th_buf_candidates: Option<String>,
    #[arg(long, global = true)]
    th_finer: Option<f64>,
    /// Percent.
    #[arg(long, global = true)]
    coverage_target: Option<f64>,
    /// Percent.
    #[arg(long, global = true)]
    blob_keep: Option<f64>,
    /// Seconds between keyframes.
    #[arg(long, global = true)]
    keyframe_gap: Option<f64>,
    #[arg(long, global = true)]
    build_users: Option<usize>,
    /// Comma-separated baseline grids, e.g. 4x6,6x6,10x20.
    #[arg(long, global = true)]
    fixed_grids: Option<String>,
    /// Worker threads (0 = one per core, 1 = sequential).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write seeded synthetic traces, one CSV per scenario.
    Synth {
        /// static, slow-pan, two-cluster or random-walk; repeatable. Default: all.
        #[arg(long = "scenario")]
        scenarios: Vec<String>,
        #[arg(long, default_value_t = 30)]
        users: u32,
        /// Seconds.
        #[arg(long, default_value_t = 10.0)]
        duration: f64,
        #[arg(long, default_value_t = 30.0)]
        rate_hz: f64,
    },
    /// Build one scheme file per video and gamma from the traces.
    Tile,
    /// Score the schemes on holdout users against fixed grids.
    Eval {
        /// Explicit holdout user ids; default is the seeded split used by `tile`.
        #[arg(long)]
        holdout: Option<String>,
        /// Also write a CSV report next to the JSON one.
        #[arg(long)]
        report_csv: bool,
    },
    /// Render one keyframe of a scheme as PGM, or PPM with a viewport outline.
    Render {
        #[arg(long)]
        scheme: PathBuf,
        /// Keyframe time in seconds.
        #[arg(long)]
        keyframe: f64,
        /// Outline this user's viewport (read from the trace directory).
        #[arg(long)]
        user: Option<u32>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Time every pipeline stage per keyframe and write a dissection report.
    Bench {
        /// Use the worker pool instead of a single core.
        #[arg(long)]
        parallel: bool,
    },
    /// Print the effective configuration in config-file form.
    Config,
}

/// Input the user has to fix; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn effective_config(o: &Overrides) -> anyhow::Result<RunConfig> {
    let mut cfg = match &o.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            RunConfig::from_kv(&text).map_err(|e| usage(format!("{}: {e:#}", path.display())))?
        }
        None => RunConfig::default(),
    };
    let bad = |e: anyhow::Error| usage(format!("{e:#}"));
    if let Some(v) = &o.trace_dir {
        cfg.trace_dir = v.clone();
    }
    if let Some(v) = &o.out_dir {
        cfg.out_dir = v.clone();
    }
    if let Some(v) = &o.frame_size {
        cfg.frame_size = parse_pair(v).map_err(bad)?;
    }
    if let Some(v) = &o.grid {
        cfg.grid = parse_pair(v).map_err(bad)?;
    }
    if let Some(v) = &o.fov {
        cfg.fov = parse_pair(v).map_err(bad)?;
    }
    if let Some(v) = &o.gammas {
        cfg.gammas = parse_list(v).map_err(bad)?;
    }
    if let Some(v) = &o.th_candidates {
        cfg.th_candidates = parse_list(v).map_err(bad)?;
    }
    if let Some(v) = &o.th_buf_candidates {
        cfg.th_buf_candidates = parse_list(v).map_err(bad)?;
    }
    if let Some(v) = &o.fixed_grids {
        cfg.fixed_grids = parse_grids(v).map_err(bad)?;
    }
    cfg.th_finer = o.th_finer.unwrap_or(cfg.th_finer);
    cfg.coverage_target = o.coverage_target.unwrap_or(cfg.coverage_target);
    cfg.blob_keep = o.blob_keep.unwrap_or(cfg.blob_keep);
    cfg.keyframe_gap = o.keyframe_gap.unwrap_or(cfg.keyframe_gap);
    cfg.build_users = o.build_users.unwrap_or(cfg.build_users);
    cfg.jobs = o.jobs.unwrap_or(cfg.jobs);
    cfg.seed = o.seed.unwrap_or(cfg.seed);
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = effective_config(&cli.overrides)?;
    if cfg.jobs > 0 {
        // ignore the error if a pool already exists (only in tests)
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build_global();
    }
    match cli.command {
        Command::Synth {
            scenarios,
            users,
            duration,
            rate_hz,
        } => commands::synth(&cfg, &scenarios, users, duration, rate_hz),
        Command::Tile => commands::tile(&cfg),
        Command::Eval { holdout, report_csv } => commands::eval(&cfg, holdout.as_deref(), report_csv),
        Command::Render {
            scheme,
            keyframe,
            user,
            output,
        } => commands::render(&cfg, &scheme, keyframe, user, output),
        Command::Bench { parallel } => commands::bench(&cfg, parallel),
        Command::Config => {
            print!("{}", cfg.to_kv());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
