//! Head-orientation traces and keyframe sampling.
//!
//! Traces are a minimal CSV with the header `user_id,t,yaw,pitch`; one file
//! per video named `<video_id>.csv`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::normalize_yaw;

/// Refresh interval between keyframes, in seconds.
pub const DEFAULT_KEYFRAME_GAP: f64 = 0.5;

pub const TRACE_HEADER: [&str; 4] = ["user_id", "t", "yaw", "pitch"];

/// One head-orientation sample. Yaw is kept in `[-180, 180)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewportSample {
    pub user_id: u32,
    pub t: f64,
    pub yaw: f64,
    pub pitch: f64,
}

impl ViewportSample {
    /// Normalizes yaw and rejects out-of-range pitch or negative time.
    pub fn new(user_id: u32, t: f64, yaw: f64, pitch: f64) -> Result<Self> {
        if !(t.is_finite() && yaw.is_finite() && pitch.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample for user {user_id}")));
        }
        if t < 0.0 {
            return Err(Error::Domain(format!("negative time {t} for user {user_id}")));
        }
        if !(-90.0..=90.0).contains(&pitch) {
            return Err(Error::Domain(format!(
                "pitch {pitch} outside [-90, 90] for user {user_id}"
            )));
        }
        Ok(ViewportSample {
            user_id,
            // collapse -0.0 so ordering by bit pattern works
            t: t + 0.0,
            yaw: normalize_yaw(yaw),
            pitch,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserTrace {
    pub user_id: u32,
    /// Strictly increasing in `t`.
    pub samples: Vec<ViewportSample>,
}

impl UserTrace {
    /// The sample nearest to `t` (ties go to the earlier one).
    pub fn sample_at(&self, t: f64) -> Option<ViewportSample> {
        (!self.samples.is_empty()).then(|| nearest(&self.samples, t))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSet {
    pub video_id: String,
    /// Latest sample time over all users.
    pub duration: f64,
    /// Sorted by user id.
    pub users: Vec<UserTrace>,
}

impl TraceSet {
    /// Groups samples by user, sorts by time, and keeps the last occurrence
    /// of a duplicated `(user, t)` pair.
    pub fn from_samples(video_id: impl Into<String>, samples: impl IntoIterator<Item = ViewportSample>) -> Self {
        let mut by_user: BTreeMap<u32, BTreeMap<u64, ViewportSample>> = BTreeMap::new();
        for s in samples {
            // non-negative finite floats order like their bit patterns
            by_user.entry(s.user_id).or_default().insert(s.t.to_bits(), s);
        }
        let users: Vec<UserTrace> = by_user
            .into_iter()
            .map(|(user_id, samples)| UserTrace {
                user_id,
                samples: samples.into_values().collect(),
            })
            .collect();
        let duration = users
            .iter()
            .filter_map(|u| u.samples.last())
            .map(|s| s.t)
            .fold(0.0, f64::max);
        TraceSet {
            video_id: video_id.into(),
            duration,
            users,
        }
    }

    pub fn user_ids(&self) -> Vec<u32> {
        self.users.iter().map(|u| u.user_id).collect()
    }

    pub fn user(&self, id: u32) -> Option<&UserTrace> {
        self.users.iter().find(|u| u.user_id == id)
    }

    /// Copy restricted to the given users (unknown ids are ignored).
    pub fn subset(&self, ids: &[u32]) -> TraceSet {
        TraceSet {
            video_id: self.video_id.clone(),
            duration: self.duration,
            users: self
                .users
                .iter()
                .filter(|u| ids.contains(&u.user_id))
                .cloned()
                .collect(),
        }
    }

    /// Every user must have a sample within `max_gap` of both `0` and the
    /// duration.
    pub fn check_coverage(&self, max_gap: f64) -> Result<()> {
        for u in &self.users {
            let (first, last) = match (u.samples.first(), u.samples.last()) {
                (Some(f), Some(l)) => (f.t, l.t),
                _ => return Err(Error::MissingUser(u.user_id)),
            };
            if first > max_gap || self.duration - last > max_gap {
                return Err(Error::Domain(format!(
                    "user {} covers [{first}, {last}] of [0, {}]",
                    u.user_id, self.duration
                )));
            }
        }
        Ok(())
    }
}

/// Reads `<video_id>.csv`; the video id is the file stem.
pub fn parse_traces(path: &Path) -> Result<TraceSet> {
    let video_id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or_default()
        .to_string();
    let file = std::fs::File::open(path)?;
    parse_traces_from(file, video_id)
}

pub fn parse_traces_from(reader: impl Read, video_id: impl Into<String>) -> Result<TraceSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header = rdr.headers().map_err(|e| csv_error(e, 1))?.clone();
    if header.is_empty() {
        return Err(Error::EmptyInput("trace file"));
    }
    if header.iter().ne(TRACE_HEADER) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{}`", TRACE_HEADER.join(",")),
        });
    }

    let mut samples = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| csv_error(e, 0))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let user_id: u32 = field(0).parse().map_err(|_| Error::Parse {
            line,
            msg: format!("bad user id `{}`", field(0)),
        })?;
        let num = |i: usize, name: &str| -> Result<f64> {
            field(i).parse::<f64>().map_err(|_| Error::Parse {
                line,
                msg: format!("bad {name} `{}`", field(i)),
            })
        };
        let t = num(1, "t")?;
        let yaw = num(2, "yaw")?;
        let pitch = num(3, "pitch")?;
        let sample = ViewportSample::new(user_id, t, yaw, pitch).map_err(|e| match e {
            Error::Domain(msg) => Error::Domain(format!("line {line}: {msg}")),
            other => other,
        })?;
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(Error::EmptyInput("trace file has no samples"));
    }
    Ok(TraceSet::from_samples(video_id, samples))
}

fn csv_error(e: csv::Error, fallback_line: u64) -> Error {
    let line = e.position().map_or(fallback_line, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            msg: format!("{kind:?}"),
        },
    }
}

/// Serializes in the same CSV format `parse_traces` reads.
pub fn write_traces(set: &TraceSet, writer: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Io(std::io::Error::other(format!("{kind:?}"))),
    };
    wtr.write_record(TRACE_HEADER).map_err(io)?;
    for user in &set.users {
        for s in &user.samples {
            wtr.write_record([
                s.user_id.to_string(),
                s.t.to_string(),
                s.yaw.to_string(),
                s.pitch.to_string(),
            ])
            .map_err(io)?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Per-user orientation at one keyframe time.
#[derive(Debug, Clone, PartialEq)]
pub struct Keyframe {
    pub t: f64,
    /// One sample per user, in the trace set's user order.
    pub samples: Vec<ViewportSample>,
}

/// Number of keyframes at times `0, gap, 2*gap, ... <= duration`.
pub fn keyframe_count(duration: f64, gap: f64) -> usize {
    (duration / gap + 1e-9).floor() as usize + 1
}

/// Picks, for every keyframe time, each user's sample nearest in time (ties
/// go to the earlier sample).
pub fn sample_keyframes(traces: &TraceSet, gap: f64) -> Result<Vec<Keyframe>> {
    if !(gap > 0.0 && gap.is_finite()) {
        return Err(Error::Domain(format!("keyframe gap must be positive, got {gap}")));
    }
    if traces.users.is_empty() {
        return Err(Error::EmptyInput("trace set has no users"));
    }
    if let Some(u) = traces.users.iter().find(|u| u.samples.is_empty()) {
        return Err(Error::MissingUser(u.user_id));
    }
    let count = keyframe_count(traces.duration, gap);
    Ok((0..count)
        .map(|k| {
            let t = k as f64 * gap;
            Keyframe {
                t,
                samples: traces.users.iter().map(|u| nearest(&u.samples, t)).collect(),
            }
        })
        .collect())
}

fn nearest(samples: &[ViewportSample], t: f64) -> ViewportSample {
    let i = samples.partition_point(|s| s.t < t);
    if i == 0 {
        return samples[0];
    }
    if i == samples.len() {
        return samples[i - 1];
    }
    let (before, after) = (samples[i - 1], samples[i]);
    if t - before.t <= after.t - t {
        before
    } else {
        after
    }
}
