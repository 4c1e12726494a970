use serde::{Deserialize, Serialize};

use super::ControllerConfig;

/// Time to collision; negative while closing, undefined without relative
/// motion.
pub fn ttc(rel_dist: f64, rel_vel: f64) -> Option<f64> {
    (rel_vel != 0.0).then(|| rel_dist / rel_vel)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopTimes {
    pub fcw: f64,
    pub pb1: f64,
    pub pb2: f64,
    pub fb: f64,
}

pub fn stopping_times(ego_v: f64, cfg: &ControllerConfig) -> StopTimes {
    StopTimes {
        fcw: cfg.t_react + ego_v / cfg.a_driver,
        pb1: ego_v / cfg.a_pb1,
        pb2: ego_v / cfg.a_pb2,
        fb: ego_v / cfg.a_fb,
    }
}

/// Memoryless staging: `(aeb_status, fcw_active)`.
pub fn decide_stage(ttc: Option<f64>, stop: &StopTimes) -> (u8, bool) {
    let Some(ttc) = ttc.filter(|t| *t < 0.0) else {
        return (0, false);
    };
    let left = ttc.abs();
    let status = if left < stop.fb {
        3
    } else if left < stop.pb2 {
        2
    } else if left < stop.pb1 {
        1
    } else {
        0
    };
    (status, status >= 1 || left < stop.fcw)
}

/// One controller decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub ttc: Option<f64>,
    pub stop: StopTimes,
    pub aeb_status: u8,
    pub fcw_active: bool,
}

/// Staged braking controller. Once a stage engages it is held until the ego
/// car stands still, so braking never relaxes while closing on the MIO.
#[derive(Debug, Clone, Default)]
pub struct Controller {
    latched: u8,
}

impl Controller {
    pub fn new() -> Self {
        Controller::default()
    }

    pub fn latched(&self) -> u8 {
        self.latched
    }

    /// `gap` and `rel_vel` are the sensed MIO quantities (absent without a
    /// MIO). `clamp` limits the commanded stage but not the warning.
    pub fn decide(
        &mut self,
        gap: Option<f64>,
        rel_vel: Option<f64>,
        ego_v: f64,
        cfg: &ControllerConfig,
        clamp: impl FnOnce(u8) -> u8,
    ) -> Decision {
        let ego_v = ego_v.max(0.0);
        let stop = stopping_times(ego_v, cfg);
        let ttc = match (gap, rel_vel) {
            (Some(d), Some(v)) => ttc((d - cfg.headway_stop).max(0.0), v),
            _ => None,
        };
        let (stage, warn) = decide_stage(ttc, &stop);
        if ego_v == 0.0 {
            self.latched = 0;
        }
        self.latched = self.latched.max(stage);
        Decision {
            ttc,
            stop,
            aeb_status: clamp(self.latched),
            fcw_active: self.latched >= 1 || warn,
        }
    }
}
