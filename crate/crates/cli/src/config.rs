//! Run configuration: a flat `key = value` file with flag overrides.

use std::fmt::Write as _;
use std::path::PathBuf;

use adaptile::geometry::FrameGeometry;
use adaptile::projection::FovSize;
use adaptile::regions::{
    DEFAULT_BLOB_KEEP, DEFAULT_COVERAGE_TARGET, DEFAULT_TH_BUF_CANDIDATES, DEFAULT_TH_CANDIDATES, DEFAULT_TH_FINER,
};
use adaptile::scheme::TilingParams;
use adaptile::trace::DEFAULT_KEYFRAME_GAP;
use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Width x height of the internal ERP raster.
    pub frame_size: (usize, usize),
    /// Rows x columns of basic tiles.
    pub grid: (usize, usize),
    /// Horizontal x vertical field of view, degrees.
    pub fov: (f64, f64),
    pub gammas: Vec<f64>,
    pub th_candidates: Vec<f64>,
    pub th_buf_candidates: Vec<f64>,
    pub th_finer: f64,
    pub coverage_target: f64,
    pub blob_keep: f64,
    pub keyframe_gap: f64,
    /// Users per video that build the scheme; the rest are holdout.
    pub build_users: usize,
    pub fixed_grids: Vec<(usize, usize)>,
    pub trace_dir: PathBuf,
    pub out_dir: PathBuf,
    /// Worker threads; 0 means one per core.
    pub jobs: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            frame_size: (960, 480),
            grid: (10, 20),
            fov: (100.0, 100.0),
            gammas: vec![1.0, 0.5, 0.25],
            th_candidates: DEFAULT_TH_CANDIDATES.to_vec(),
            th_buf_candidates: DEFAULT_TH_BUF_CANDIDATES.to_vec(),
            th_finer: DEFAULT_TH_FINER,
            coverage_target: DEFAULT_COVERAGE_TARGET,
            blob_keep: DEFAULT_BLOB_KEEP,
            keyframe_gap: DEFAULT_KEYFRAME_GAP,
            build_users: 20,
            fixed_grids: vec![(4, 6), (6, 6), (10, 20)],
            trace_dir: PathBuf::from("traces"),
            out_dir: PathBuf::from("out"),
            jobs: 0,
            seed: 1,
        }
    }
}

pub fn parse_pair<T: std::str::FromStr>(s: &str) -> Result<(T, T)> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .with_context(|| format!("expected AxB, got `{s}`"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<T>()
            .ok()
            .with_context(|| format!("bad number `{v}` in `{s}`"))
    };
    Ok((parse(a)?, parse(b)?))
}

pub fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<T>()
                .ok()
                .with_context(|| format!("bad list item `{v}` in `{s}`"))
        })
        .collect()
}

pub fn parse_grids(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(parse_pair)
        .collect()
}

fn join<T: std::fmt::Display>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Parses the on-disk form, starting from the defaults. `#` starts a comment.
    pub fn from_kv(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("config line {}: expected key = value", i + 1))?;
            cfg.set(key.trim(), value.trim())
                .with_context(|| format!("config line {}", i + 1))?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let num = |v: &str| {
            v.parse::<f64>()
                .with_context(|| format!("`{key}` expects a number, got `{v}`"))
        };
        let int = |v: &str| {
            v.parse::<usize>()
                .with_context(|| format!("`{key}` expects an integer, got `{v}`"))
        };
        match key {
            "frame_size" => self.frame_size = parse_pair(value)?,
            "grid" => self.grid = parse_pair(value)?,
            "fov" => self.fov = parse_pair(value)?,
            "gammas" => self.gammas = parse_list(value)?,
            "th_candidates" => self.th_candidates = parse_list(value)?,
            "th_buf_candidates" => self.th_buf_candidates = parse_list(value)?,
            "th_finer" => self.th_finer = num(value)?,
            "coverage_target" => self.coverage_target = num(value)?,
            "blob_keep" => self.blob_keep = num(value)?,
            "keyframe_gap" => self.keyframe_gap = num(value)?,
            "build_users" => self.build_users = int(value)?,
            "fixed_grids" => self.fixed_grids = parse_grids(value)?,
            "trace_dir" => self.trace_dir = PathBuf::from(value),
            "out_dir" => self.out_dir = PathBuf::from(value),
            "jobs" => self.jobs = int(value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .with_context(|| format!("`seed` expects an integer, got `{value}`"))?
            }
            _ => bail!("unknown config key `{key}`"),
        }
        Ok(())
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::from("# adaptile run configuration\n");
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("frame_size", format!("{}x{}", self.frame_size.0, self.frame_size.1));
        put("grid", format!("{}x{}", self.grid.0, self.grid.1));
        put("fov", format!("{}x{}", self.fov.0, self.fov.1));
        put("gammas", join(&self.gammas));
        put("th_candidates", join(&self.th_candidates));
        put("th_buf_candidates", join(&self.th_buf_candidates));
        put("th_finer", self.th_finer.to_string());
        put("coverage_target", self.coverage_target.to_string());
        put("blob_keep", self.blob_keep.to_string());
        put("keyframe_gap", self.keyframe_gap.to_string());
        put("build_users", self.build_users.to_string());
        put(
            "fixed_grids",
            self.fixed_grids
                .iter()
                .map(|(r, c)| format!("{r}x{c}"))
                .collect::<Vec<_>>()
                .join(","),
        );
        put("trace_dir", self.trace_dir.display().to_string());
        put("out_dir", self.out_dir.display().to_string());
        put("jobs", self.jobs.to_string());
        put("seed", self.seed.to_string());
        s
    }

    pub fn geometry(&self) -> Result<FrameGeometry> {
        Ok(FrameGeometry::new(
            self.frame_size.0,
            self.frame_size.1,
            self.grid.0,
            self.grid.1,
        )?)
    }

    pub fn fov_size(&self) -> Result<FovSize> {
        Ok(FovSize::new(self.fov.0, self.fov.1)?)
    }

    pub fn tiling_params(&self) -> Result<TilingParams> {
        if self.gammas.is_empty() || self.gammas.iter().any(|g| !(*g > 0.0 && *g <= 1.0)) {
            bail!("gammas must be non-empty and lie in (0, 1]: {:?}", self.gammas);
        }
        Ok(TilingParams {
            fov: self.fov_size()?,
            th_candidates: self.th_candidates.clone(),
            th_buf_candidates: self.th_buf_candidates.clone(),
            th_finer: self.th_finer,
            coverage_target: self.coverage_target,
            blob_keep: self.blob_keep,
            keyframe_gap: self.keyframe_gap,
        })
    }
}
