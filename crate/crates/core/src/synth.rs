//! Seeded synthetic head-orientation traces.
//!
//! Stand-ins for recorded datasets: a handful of scripted gaze behaviours,
//! each reproducible from a seed.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::Orientation;
use crate::trace::{TraceSet, ViewportSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Everyone looks at the center.
    Static,
    /// Everyone follows the center as it pans east.
    SlowPan,
    /// Half the users look 70° left of the center, half 70° right.
    TwoCluster,
    /// Independent random walks starting at the center.
    RandomWalk,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Static,
        Scenario::SlowPan,
        Scenario::TwoCluster,
        Scenario::RandomWalk,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Static => "static",
            Scenario::SlowPan => "slow-pan",
            Scenario::TwoCluster => "two-cluster",
            Scenario::RandomWalk => "random-walk",
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| Error::Domain(format!("unknown scenario `{s}`")))
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-user constant offset bound, degrees.
pub const USER_OFFSET: f64 = 3.0;
/// Per-sample noise bound, degrees. With the user offset the total jitter
/// per axis stays within 5°.
pub const SAMPLE_NOISE: f64 = 2.0;
pub const PAN_SPEED_DEG_PER_S: f64 = 10.0;
pub const CLUSTER_YAW: f64 = 70.0;
const WALK_STEP: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub scenario: Scenario,
    pub users: u32,
    /// Seconds.
    pub duration: f64,
    pub rate_hz: f64,
    pub seed: u64,
    pub center: Orientation,
}

impl SynthConfig {
    pub fn new(scenario: Scenario, users: u32, duration: f64, seed: u64) -> Self {
        SynthConfig {
            scenario,
            users,
            duration,
            rate_hz: 30.0,
            seed,
            center: Orientation::new(0.0, 0.0),
        }
    }
}

/// Generates one trace set; user ids are `0..users`.
pub fn generate(cfg: &SynthConfig, video_id: impl Into<String>) -> Result<TraceSet> {
    if cfg.users == 0 {
        return Err(Error::Domain("synthetic trace needs at least one user".into()));
    }
    if !(cfg.duration >= 0.0 && cfg.duration.is_finite() && cfg.rate_hz > 0.0) {
        return Err(Error::Domain(format!(
            "bad duration {} or rate {}",
            cfg.duration, cfg.rate_hz
        )));
    }
    let steps = (cfg.duration * cfg.rate_hz + 1e-9).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut samples = Vec::with_capacity(cfg.users as usize * (steps + 1));
    for user in 0..cfg.users {
        let offset = (
            rng.gen_range(-USER_OFFSET..=USER_OFFSET),
            rng.gen_range(-USER_OFFSET..=USER_OFFSET),
        );
        let mut walk = (cfg.center.yaw + offset.0, cfg.center.pitch + offset.1);
        for k in 0..=steps {
            let t = k as f64 / cfg.rate_hz;
            let noise = (
                rng.gen_range(-SAMPLE_NOISE..=SAMPLE_NOISE),
                rng.gen_range(-SAMPLE_NOISE..=SAMPLE_NOISE),
            );
            let (yaw, pitch) = match cfg.scenario {
                Scenario::Static => (
                    cfg.center.yaw + offset.0 + noise.0,
                    cfg.center.pitch + offset.1 + noise.1,
                ),
                Scenario::SlowPan => (
                    cfg.center.yaw + PAN_SPEED_DEG_PER_S * t + offset.0 + noise.0,
                    cfg.center.pitch + offset.1 + noise.1,
                ),
                Scenario::TwoCluster => {
                    let side = if user % 2 == 0 { -CLUSTER_YAW } else { CLUSTER_YAW };
                    (
                        cfg.center.yaw + side + offset.0 + noise.0,
                        cfg.center.pitch + offset.1 + noise.1,
                    )
                }
                Scenario::RandomWalk => {
                    if k > 0 {
                        walk.0 += rng.gen_range(-WALK_STEP..=WALK_STEP);
                        walk.1 = (walk.1 + rng.gen_range(-WALK_STEP..=WALK_STEP)).clamp(-80.0, 80.0);
                    }
                    walk
                }
            };
            samples.push(ViewportSample::new(user, t, yaw, pitch.clamp(-90.0, 90.0))?);
        }
    }
    Ok(TraceSet::from_samples(video_id, samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_jitter_is_bounded() {
        let set = generate(&SynthConfig::new(Scenario::Static, 20, 2.0, 7), "s").unwrap();
        assert_eq!(set.users.len(), 20);
        for u in &set.users {
            assert_eq!(u.samples.len(), 61);
            for s in &u.samples {
                assert!(s.yaw.abs() <= 5.0 && s.pitch.abs() <= 5.0);
            }
        }
        assert!((set.duration - 2.0).abs() < 1e-12);
    }

    #[test]
    fn same_seed_same_trace() {
        for sc in Scenario::ALL {
            let cfg = SynthConfig::new(sc, 5, 1.0, 42);
            assert_eq!(generate(&cfg, "v").unwrap(), generate(&cfg, "v").unwrap());
        }
        let a = generate(&SynthConfig::new(Scenario::Static, 5, 1.0, 1), "v").unwrap();
        let b = generate(&SynthConfig::new(Scenario::Static, 5, 1.0, 2), "v").unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn clusters_are_split_by_parity() {
        let set = generate(&SynthConfig::new(Scenario::TwoCluster, 4, 0.5, 3), "v").unwrap();
        for u in &set.users {
            let expected = if u.user_id % 2 == 0 { -CLUSTER_YAW } else { CLUSTER_YAW };
            assert!(u.samples.iter().all(|s| (s.yaw - expected).abs() <= 5.0));
        }
    }

    #[test]
    fn pan_moves_east() {
        let set = generate(&SynthConfig::new(Scenario::SlowPan, 1, 4.0, 3), "v").unwrap();
        let s = &set.users[0].samples;
        assert!(s.last().unwrap().yaw - s[0].yaw > 30.0);
    }

    #[test]
    fn scenario_names_round_trip() {
        for sc in Scenario::ALL {
            assert_eq!(sc.as_str().parse::<Scenario>().unwrap(), sc);
        }
        assert!("nope".parse::<Scenario>().is_err());
    }
}
