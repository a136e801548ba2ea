use std::fs;
use std::path::{Path, PathBuf};

use adaptile::io::{load_scheme, render as render_image, save_scheme, write_atomic, FORMAT_VERSION};
use adaptile::metrics::time_pipeline;
use adaptile::par::{self, Execution};
use adaptile::projection::{fov_mask, split_limits, Orientation};
use adaptile::report::{split_users, EvalReport};
use adaptile::scheme::{build_video, VideoScheme};
use adaptile::synth::{generate, Scenario, SynthConfig};
use adaptile::trace::{parse_traces, write_traces, TraceSet};
use anyhow::{anyhow, bail, Context, Result};
use log::info;

use crate::config::{parse_list, RunConfig};
use crate::usage;

fn execution(cfg: &RunConfig) -> Execution {
    if cfg.jobs == 1 {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

/// Trace CSVs of the trace directory, sorted by name.
fn trace_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = match fs::read_dir(dir) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"))
            .collect(),
        Err(_) => Vec::new(),
    };
    if files.is_empty() {
        return Err(usage(format!("no trace files (*.csv) found in {}", dir.display())));
    }
    files.sort();
    Ok(files)
}

pub fn scheme_path(out_dir: &Path, video_id: &str, gamma: f64) -> PathBuf {
    out_dir.join(format!("{video_id}.g{gamma}.json"))
}

fn load_traces(path: &Path) -> Result<TraceSet> {
    parse_traces(path).with_context(|| format!("reading {}", path.display()))
}

fn build_split(cfg: &RunConfig, traces: &TraceSet) -> (Vec<u32>, Vec<u32>) {
    split_users(&traces.user_ids(), cfg.build_users, cfg.seed)
}

pub fn synth(cfg: &RunConfig, names: &[String], users: u32, duration: f64, rate_hz: f64) -> Result<()> {
    let scenarios: Vec<Scenario> = if names.is_empty() {
        Scenario::ALL.to_vec()
    } else {
        names
            .iter()
            .map(|n| n.parse::<Scenario>().map_err(|e| usage(e.to_string())))
            .collect::<Result<_>>()?
    };
    fs::create_dir_all(&cfg.trace_dir).with_context(|| format!("creating {}", cfg.trace_dir.display()))?;
    for scenario in scenarios {
        let mut sc = SynthConfig::new(scenario, users, duration, cfg.seed);
        sc.rate_hz = rate_hz;
        let set = generate(&sc, scenario.as_str()).map_err(|e| usage(e.to_string()))?;
        let mut bytes = Vec::new();
        write_traces(&set, &mut bytes)?;
        let path = cfg.trace_dir.join(format!("{scenario}.csv"));
        write_atomic(&path, &bytes)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn tile_video(cfg: &RunConfig, path: &Path) -> Result<Vec<PathBuf>> {
    let geom = cfg.geometry()?;
    let params = cfg.tiling_params()?;
    let limits = split_limits(&geom, params.fov);
    let traces = load_traces(path)?;
    let (build, _) = build_split(cfg, &traces);
    let tiling = build_video(&traces.subset(&build), &geom, &params, execution(cfg))?;
    let schemes = cfg
        .gammas
        .iter()
        .map(|&g| tiling.scheme(g))
        .collect::<adaptile::Result<Vec<VideoScheme>>>()?;
    // nothing is written unless every scheme of the video is valid
    for s in &schemes {
        for kf in &s.keyframes {
            kf.validate(&geom, Some(&limits))
                .with_context(|| format!("scheme for gamma {} failed validation", s.gamma))?;
        }
    }
    fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let mut written = Vec::new();
    for s in &schemes {
        let out = scheme_path(&cfg.out_dir, &traces.video_id, s.gamma);
        save_scheme(&out, s)?;
        written.push(out);
    }
    info!(
        "{}: {} keyframes from {} build users",
        traces.video_id,
        tiling.keyframes.len(),
        build.len()
    );
    Ok(written)
}

pub fn tile(cfg: &RunConfig) -> Result<()> {
    let files = trace_files(&cfg.trace_dir)?;
    cfg.geometry().map_err(|e| usage(format!("{e:#}")))?;
    cfg.tiling_params().map_err(|e| usage(format!("{e:#}")))?;
    let results = par::map(execution(cfg), &files, |p| tile_video(cfg, p));
    let mut failed = 0;
    for (path, res) in files.iter().zip(results) {
        match res {
            Ok(written) => {
                for w in written {
                    println!("{}", w.display());
                }
            }
            Err(e) => {
                failed += 1;
                eprintln!("{}: {e:#}", path.display());
            }
        }
    }
    if failed > 0 {
        bail!("{failed} of {} videos failed", files.len());
    }
    Ok(())
}

pub fn eval(cfg: &RunConfig, holdout: Option<&str>, csv: bool) -> Result<()> {
    let files = trace_files(&cfg.trace_dir)?;
    let geom = cfg.geometry().map_err(|e| usage(format!("{e:#}")))?;
    let fov = cfg.fov_size().map_err(|e| usage(format!("{e:#}")))?;
    let explicit: Option<Vec<u32>> = holdout
        .map(|h| parse_list(h).map_err(|e| usage(format!("--holdout: {e:#}"))))
        .transpose()?;
    for path in &files {
        let traces = load_traces(path)?;
        let video = traces.video_id.clone();
        let ids = match &explicit {
            Some(ids) => {
                if let Some(missing) = ids.iter().find(|id| traces.user(**id).is_none()) {
                    return Err(usage(format!(
                        "video {video}: holdout user {missing} is not in the traces"
                    )));
                }
                ids.clone()
            }
            None => build_split(cfg, &traces).1,
        };
        if ids.is_empty() {
            return Err(usage(format!(
                "video {video}: no holdout users ({} users, build_users = {})",
                traces.users.len(),
                cfg.build_users
            )));
        }
        let mut schemes = Vec::new();
        for &g in &cfg.gammas {
            let p = scheme_path(&cfg.out_dir, &video, g);
            if !p.exists() {
                bail!("missing scheme {}; run `adaptile tile` first", p.display());
            }
            let s = load_scheme(&p).with_context(|| format!("loading {}", p.display()))?;
            if s.geometry != geom {
                bail!(
                    "scheme {} uses {} but the configuration uses {}",
                    p.display(),
                    s.geometry,
                    geom
                );
            }
            schemes.push(s);
        }
        let report = EvalReport::build(&schemes, &traces.subset(&ids), &cfg.fixed_grids, fov, execution(cfg))?;
        let json_path = cfg.out_dir.join(format!("{video}.report.json"));
        write_atomic(&json_path, report.to_json()?.as_bytes())?;
        println!("{}", json_path.display());
        if csv {
            let csv_path = cfg.out_dir.join(format!("{video}.report.csv"));
            write_atomic(&csv_path, report.to_csv()?.as_bytes())?;
            println!("{}", csv_path.display());
        }
        for s in &report.schemes {
            let saving: Vec<String> = s
                .relative_pixel_saving_pct
                .iter()
                .map(|(k, v)| format!("vs {k} {v:+.1}%"))
                .collect();
            println!(
                "  {video} {:<16} redundancy {:>7.2}%  mean px {:>9.0}  {}",
                s.label,
                s.mean_redundancy_pct,
                s.volume.mean_px,
                saving.join("  ")
            );
        }
    }
    Ok(())
}

pub fn render(cfg: &RunConfig, scheme_file: &Path, t: f64, user: Option<u32>, output: Option<PathBuf>) -> Result<()> {
    let scheme = load_scheme(scheme_file).with_context(|| format!("loading {}", scheme_file.display()))?;
    let Some(kf) = scheme.keyframe_at(t) else {
        let times: Vec<String> = scheme.keyframes.iter().map(|k| k.keyframe_time.to_string()).collect();
        return Err(usage(format!(
            "no keyframe at t={t} in {}; available: {}",
            scheme_file.display(),
            times.join(", ")
        )));
    };
    let overlay = match user {
        None => None,
        Some(id) => {
            let trace_path = cfg.trace_dir.join(format!("{}.csv", scheme.video_id));
            let traces = load_traces(&trace_path)?;
            let sample = traces
                .user(id)
                .and_then(|u| u.sample_at(t))
                .ok_or_else(|| usage(format!("user {id} has no samples in {}", trace_path.display())))?;
            let fov = cfg.fov_size().map_err(|e| usage(format!("{e:#}")))?;
            Some(fov_mask(
                Orientation::new(sample.yaw, sample.pitch),
                fov,
                &scheme.geometry,
            ))
        }
    };
    let image = render_image(kf, &scheme.geometry, overlay.as_ref())?;
    let out = output.unwrap_or_else(|| {
        let user_part = user.map(|u| format!(".u{u}")).unwrap_or_default();
        cfg.out_dir.join(format!(
            "{}.g{}.t{t}{user_part}.{}",
            scheme.video_id,
            scheme.gamma,
            image.extension()
        ))
    });
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    write_atomic(&out, &image.to_netpbm())?;
    println!("{}", out.display());
    Ok(())
}

pub fn bench(cfg: &RunConfig, parallel: bool) -> Result<()> {
    let files = trace_files(&cfg.trace_dir)?;
    let geom = cfg.geometry().map_err(|e| usage(format!("{e:#}")))?;
    let params = cfg.tiling_params().map_err(|e| usage(format!("{e:#}")))?;
    let exec = if parallel {
        Execution::Parallel
    } else {
        Execution::Sequential
    };
    let mut videos = Vec::new();
    for path in &files {
        let traces = load_traces(path)?;
        let (build, _) = build_split(cfg, &traces);
        let (_, _, report) = time_pipeline(&traces.subset(&build), &geom, &params, &cfg.gammas, exec)?;
        println!("{} ({} keyframes)", traces.video_id, report.keyframes);
        for s in report.stages.iter().chain([&report.end_to_end]) {
            println!(
                "  {:<24} {:>9.2} ms  (std {:.2})",
                s.stage,
                1e3 * s.mean_s,
                1e3 * s.std_s
            );
        }
        videos.push(serde_json::json!({ "video_id": traces.video_id, "timing": report }));
    }
    let doc = serde_json::json!({
        "format_version": FORMAT_VERSION,
        "execution": if parallel { "parallel" } else { "sequential" },
        "videos": videos,
    });
    fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let out = cfg.out_dir.join("bench.json");
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| anyhow!(e))?;
    text.push('\n');
    write_atomic(&out, text.as_bytes())?;
    println!("{}", out.display());
    Ok(())
}
