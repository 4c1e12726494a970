//! Fixed-step simulation of a staged emergency braking controller closing on
//! a stopped lead car while a hidden pedestrian steps into the lane.
//!
//! Each tick the controller reads the sensed relative distance, relative
//! velocity and ego speed, then the plant applies the commanded deceleration
//! over the following step. Kinematics are integrated exactly for the
//! piecewise-constant deceleration.

mod config;
mod controller;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{ControllerConfig, EgoSection, MioSection, SimConfig, SimSection};
pub use controller::{decide_stage, stopping_times, ttc, Controller, Decision, StopTimes};

use crate::attack::{spoof_offset, AttackError, AttackSpec, SpoofWindow, StageClamp};
use crate::stream::{Event, EventStream, Kind, Time, Trace, Value};

/// Sensed channels a live data spoof may target.
pub const LIVE_TARGETS: [&str; 3] = ["rel_dist", "rel_vel", "ego_v"];

/// Channels written by [`emit_trace`].
pub const CHANNELS: [&str; 8] = [
    "rel_dist",
    "rel_vel",
    "ego_v",
    "ttc",
    "pb2_stop_time",
    "aeb_status",
    "fcw_active",
    "headway",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Attack(#[from] AttackError),
}

/// Position and speed after braking at `decel` for `dt` seconds. Speed stops
/// at zero.
pub fn advance(x: f64, v: f64, decel: f64, dt: f64) -> (f64, f64) {
    if decel > 0.0 && v <= decel * dt {
        (x + v * v / (2.0 * decel), 0.0)
    } else {
        (x + v * dt - 0.5 * decel * dt * dt, v - decel * dt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MioKind {
    Lead,
    Pedestrian,
    None,
}

/// Snapshot at one tick, including the controller decision made there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: Time,
    pub ego_x: f64,
    pub ego_v: f64,
    pub mio: MioKind,
    pub mio_x: Option<f64>,
    pub mio_v: Option<f64>,
    /// True gap to the MIO, zero once collided.
    pub headway: Option<f64>,
    /// Sensed values as seen by the controller.
    pub rel_dist: Option<f64>,
    pub rel_vel: Option<f64>,
    pub sensed_ego_v: f64,
    pub ttc: Option<f64>,
    pub stop_times: StopTimes,
    pub aeb_status: u8,
    pub fcw_active: bool,
    pub collided: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub ticks: usize,
    pub collided: bool,
    pub collision_time: Option<Time>,
    pub min_headway: Option<f64>,
    /// First tick with the ego car at rest.
    pub stop_time: Option<Time>,
    pub headway_at_stop: Option<f64>,
    pub max_aeb_status: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    pub config: SimConfig,
    pub states: Vec<SimState>,
}

impl SimRun {
    pub fn summary(&self) -> SimSummary {
        let collision = self.states.iter().find(|s| s.collided);
        let stop = self.states.iter().find(|s| s.ego_v == 0.0);
        SimSummary {
            ticks: self.states.len(),
            collided: collision.is_some(),
            collision_time: collision.map(|s| s.t),
            min_headway: self.min_headway(),
            stop_time: stop.map(|s| s.t),
            headway_at_stop: stop.and_then(|s| s.headway),
            max_aeb_status: self.states.iter().map(|s| s.aeb_status).max().unwrap_or(0),
        }
    }

    pub fn min_headway(&self) -> Option<f64> {
        self.states.iter().filter_map(|s| s.headway).reduce(f64::min)
    }

    pub fn collided(&self) -> bool {
        self.states.last().is_some_and(|s| s.collided)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Obstacle {
    kind: MioKind,
    x: f64,
    v: f64,
}

/// Stepwise simulator. [`Simulator::step`] records the state at the current
/// tick and advances the plant by one `dt`.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimConfig,
    tick: u64,
    ego_x: f64,
    ego_v: f64,
    lead_x: f64,
    pedestrian: Option<bool>,
    collided_with: Option<MioKind>,
    controller: Controller,
    clamp: Option<StageClamp>,
    spoof: Option<(String, Vec<SpoofWindow>)>,
    rng: ChaCha8Rng,
    dist_noise: Option<Normal<f64>>,
    vel_noise: Option<Normal<f64>>,
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let clamp = match cfg.attack {
            AttackSpec::FunctionalFault { t_start, clamp } => Some(StageClamp::new(t_start, clamp)?),
            _ => None,
        };
        let spoof = match &cfg.attack {
            AttackSpec::DataSpoof { target, schedule } => Some((target.clone(), schedule.clone())),
            _ => None,
        };
        let noise = |std: f64| (std > 0.0).then(|| Normal::new(0.0, std).expect("finite deviation"));
        Ok(Simulator {
            tick: 0,
            ego_x: 0.0,
            ego_v: cfg.ego.v0,
            lead_x: cfg.mio.lead_gap,
            pedestrian: None,
            collided_with: None,
            controller: Controller::new(),
            clamp,
            spoof,
            rng: ChaCha8Rng::seed_from_u64(cfg.sim.seed),
            dist_noise: noise(cfg.sim.rel_dist_noise),
            vel_noise: noise(cfg.sim.rel_vel_noise),
            cfg,
        })
    }

    pub fn time(&self) -> Time {
        Time::from_millis(self.tick * self.cfg.sim.dt.as_millis())
    }

    pub fn finished(&self) -> bool {
        self.time() > self.cfg.sim.duration
    }

    fn obstacles(&self) -> impl Iterator<Item = Obstacle> + '_ {
        let lead = self.cfg.mio.lead_enabled.then_some(Obstacle {
            kind: MioKind::Lead,
            x: self.lead_x,
            v: self.cfg.mio.lead_speed,
        });
        let ped = (self.pedestrian == Some(true)).then_some(Obstacle {
            kind: MioKind::Pedestrian,
            x: self.cfg.mio.pedestrian_position,
            v: 0.0,
        });
        lead.into_iter().chain(ped)
    }

    fn mio(&self) -> Option<Obstacle> {
        if let Some(kind) = self.collided_with {
            return self.obstacles().find(|o| o.kind == kind);
        }
        self.obstacles()
            .filter(|o| o.x >= self.ego_x)
            .min_by(|a, b| a.x.total_cmp(&b.x))
    }

    fn spoof(&self, channel: &str, t: Time) -> f64 {
        match &self.spoof {
            Some((target, schedule)) if target == channel => spoof_offset(schedule, t, self.cfg.sim.dt),
            _ => 0.0,
        }
    }

    /// Records the current tick and advances one step.
    pub fn step(&mut self) -> SimState {
        let t = self.time();
        if self.pedestrian.is_none() && self.cfg.mio.pedestrian_enabled && t >= self.cfg.mio.reveal_time() {
            self.pedestrian = Some(self.cfg.mio.pedestrian_position >= self.ego_x);
        }
        let mio = self.mio();
        let headway = match self.collided_with {
            Some(_) => Some(0.0),
            None => mio.map(|o| (o.x - self.ego_x).max(0.0)),
        };
        let sense = |noise: Option<Normal<f64>>, rng: &mut ChaCha8Rng| noise.map_or(0.0, |n| n.sample(rng));
        let rel_dist = match mio {
            Some(_) => {
                let n = sense(self.dist_noise, &mut self.rng);
                headway.map(|h| h + n + self.spoof("rel_dist", t))
            }
            None => None,
        };
        let rel_vel = match mio {
            Some(o) => {
                let n = sense(self.vel_noise, &mut self.rng);
                Some(o.v - self.ego_v + n + self.spoof("rel_vel", t))
            }
            None => None,
        };
        let sensed_ego_v = self.ego_v + self.spoof("ego_v", t);
        let clamp = self.clamp;
        let decision = self
            .controller
            .decide(rel_dist, rel_vel, sensed_ego_v, &self.cfg.controller, |s| {
                clamp.map_or(s, |c| c.apply(t, s))
            });
        let state = SimState {
            t,
            ego_x: self.ego_x,
            ego_v: self.ego_v,
            mio: mio.map_or(MioKind::None, |o| o.kind),
            mio_x: mio.map(|o| o.x),
            mio_v: mio.map(|o| o.v),
            headway,
            rel_dist,
            rel_vel,
            sensed_ego_v,
            ttc: decision.ttc,
            stop_times: decision.stop,
            aeb_status: decision.aeb_status,
            fcw_active: decision.fcw_active,
            collided: self.collided_with.is_some(),
        };
        self.advance(self.cfg.controller.deceleration(decision.aeb_status));
        state
    }

    fn advance(&mut self, decel: f64) {
        let dt = self.cfg.sim.dt.as_secs_f64();
        let (x, v) = advance(self.ego_x, self.ego_v, decel, dt);
        self.ego_x = x;
        self.ego_v = v;
        self.lead_x += self.cfg.mio.lead_speed * dt;
        if self.collided_with.is_none() {
            let hit = self
                .obstacles()
                .filter(|o| o.x <= self.ego_x)
                .min_by(|a, b| a.x.total_cmp(&b.x));
            self.collided_with = hit.map(|o| o.kind);
        }
        self.tick += 1;
    }

    pub fn run(mut self) -> SimRun {
        let mut states = Vec::new();
        while !self.finished() {
            states.push(self.step());
        }
        SimRun {
            config: self.cfg,
            states,
        }
    }
}

pub fn simulate(cfg: &SimConfig) -> Result<SimRun, SimError> {
    Ok(Simulator::new(cfg.clone())?.run())
}

/// Kind of each channel in [`CHANNELS`].
pub fn channel_kind(channel: &str) -> Option<Kind> {
    match channel {
        "aeb_status" | "fcw_active" => Some(Kind::Int),
        c if CHANNELS.contains(&c) => Some(Kind::Float),
        _ => None,
    }
}

/// Events recorded at one tick, in [`CHANNELS`] order. Channels without a
/// defined value (no MIO, no relative motion) are skipped.
pub fn state_events(s: &SimState) -> Vec<(&'static str, Event)> {
    let values = [
        s.rel_dist.map(Value::Real),
        s.rel_vel.map(Value::Real),
        Some(Value::Real(s.sensed_ego_v)),
        s.ttc.map(Value::Real),
        Some(Value::Real(s.stop_times.pb2)),
        Some(Value::Int(s.aeb_status as i64)),
        Some(Value::Int(s.fcw_active as i64)),
        s.headway.map(Value::Real),
    ];
    CHANNELS
        .into_iter()
        .zip(values)
        .filter_map(|(c, v)| v.map(|v| (c, Event::new(s.t, v))))
        .collect()
}

/// Monitored channels of a run, all on the simulation grid.
pub fn emit_trace(run: &SimRun) -> Trace {
    let mut trace = Trace::from_streams(
        CHANNELS
            .iter()
            .map(|c| EventStream::with_kind(*c, channel_kind(c).expect("known channel"))),
    );
    for s in &run.states {
        for (c, e) in state_events(s) {
            trace.push(c, e).expect("grid is increasing");
        }
    }
    trace
}
