use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::attack::AttackSpec;
use crate::stream::Time;

/// Scenario file contents. Every field has a TOML key; missing keys take the
/// pedestrian-crossing defaults and unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub sim: SimSection,
    pub ego: EgoSection,
    pub mio: MioSection,
    pub controller: ControllerConfig,
    pub attack: AttackSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub dt: Time,
    pub duration: Time,
    pub seed: u64,
    /// Standard deviation of additive sensor noise (0 disables).
    pub rel_dist_noise: f64,
    pub rel_vel_noise: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            dt: Time::from_millis(100),
            duration: Time::from_millis(8000),
            seed: 0,
            rel_dist_noise: 0.0,
            rel_vel_noise: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EgoSection {
    pub v0: f64,
}

impl Default for EgoSection {
    fn default() -> Self {
        EgoSection { v0: 14.0 }
    }
}

/// Objects ahead of the ego car, positions measured from the ego start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MioSection {
    pub lead_enabled: bool,
    pub lead_gap: f64,
    pub lead_speed: f64,
    pub pedestrian_enabled: bool,
    pub pedestrian_position: f64,
    /// Time the pedestrian starts crossing, hidden behind the side lane.
    pub cross_start: f64,
    /// Lateral distance walked before entering the ego lane.
    pub lateral_offset: f64,
    pub walk_speed: f64,
}

impl Default for MioSection {
    fn default() -> Self {
        MioSection {
            lead_enabled: true,
            lead_gap: 80.0,
            lead_speed: 0.0,
            pedestrian_enabled: true,
            pedestrian_position: 52.0,
            cross_start: 1.2,
            lateral_offset: 2.1,
            walk_speed: 1.4,
        }
    }
}

impl MioSection {
    /// Time the pedestrian enters the lane, on the millisecond grid.
    pub fn reveal_time(&self) -> Time {
        Time::round_secs(self.cross_start + self.lateral_offset / self.walk_speed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub a_driver: f64,
    pub a_pb1: f64,
    pub a_pb2: f64,
    pub a_fb: f64,
    pub t_react: f64,
    /// Distance kept in reserve when computing time to collision.
    pub headway_stop: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        ControllerConfig {
            a_driver: 4.0,
            a_pb1: 3.8,
            a_pb2: 5.3,
            a_fb: 9.8,
            t_react: 1.2,
            headway_stop: 1.0,
        }
    }
}

impl ControllerConfig {
    pub fn deceleration(&self, stage: u8) -> f64 {
        match stage {
            0 => 0.0,
            1 => self.a_pb1,
            2 => self.a_pb2,
            _ => self.a_fb,
        }
    }
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Io(format!("{}: {e}", path.display())))?;
        SimConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn with_attack(mut self, attack: AttackSpec) -> Self {
        self.attack = attack;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: &str| Err(SimError::Config(msg.to_string()));
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        let positive = |v: f64| v.is_finite() && v > 0.0;
        let s = &self.sim;
        if s.dt == Time::ZERO {
            return bad("sim.dt must be positive");
        }
        if !finite_nonneg(s.rel_dist_noise) || !finite_nonneg(s.rel_vel_noise) {
            return bad("noise deviations must be finite and non-negative");
        }
        if !finite_nonneg(self.ego.v0) {
            return bad("ego.v0 must be finite and non-negative");
        }
        let m = &self.mio;
        if !finite_nonneg(m.lead_gap) || !finite_nonneg(m.lead_speed) {
            return bad("mio.lead_gap and mio.lead_speed must be finite and non-negative");
        }
        if !finite_nonneg(m.pedestrian_position) || !finite_nonneg(m.cross_start) || !finite_nonneg(m.lateral_offset) {
            return bad("pedestrian geometry must be finite and non-negative");
        }
        if !positive(m.walk_speed) {
            return bad("mio.walk_speed must be positive");
        }
        let c = &self.controller;
        if ![c.a_driver, c.a_pb1, c.a_pb2, c.a_fb].into_iter().all(positive) {
            return bad("all decelerations must be positive");
        }
        if !(c.a_pb1 < c.a_pb2 && c.a_pb2 < c.a_fb) {
            return bad("decelerations must satisfy a_pb1 < a_pb2 < a_fb");
        }
        if !finite_nonneg(c.t_react) || !finite_nonneg(c.headway_stop) {
            return bad("controller.t_react and controller.headway_stop must be finite and non-negative");
        }
        if let AttackSpec::DataSpoof { target, .. } = &self.attack {
            if !super::LIVE_TARGETS.contains(&target.as_str()) {
                return Err(SimError::Attack(crate::attack::AttackError::UnknownChannel(
                    target.clone(),
                )));
            }
        }
        self.attack.validate(s.duration, s.dt)?;
        Ok(())
    }
}
