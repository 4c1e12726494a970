//! The shipped monitor specifications.

use crate::engine::{Level, MonitorInstance};
use crate::lang::CompiledSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Builtin {
    pub name: &'static str,
    pub file: &'static str,
    pub level: Level,
    pub source: &'static str,
}

pub const P1: Builtin = Builtin {
    name: "p1",
    file: "p1_position_rate.tsl",
    level: Level::Data,
    source: include_str!("../specs/p1_position_rate.tsl"),
};

pub const P2: Builtin = Builtin {
    name: "p2",
    file: "p2_velocity_rate.tsl",
    level: Level::Data,
    source: include_str!("../specs/p2_velocity_rate.tsl"),
};

pub const P3: Builtin = Builtin {
    name: "p3",
    file: "p3_ttc_pb2.tsl",
    level: Level::Functional,
    source: include_str!("../specs/p3_ttc_pb2.tsl"),
};

pub const P4: Builtin = Builtin {
    name: "p4",
    file: "p4_fcw_consistency.tsl",
    level: Level::Functional,
    source: include_str!("../specs/p4_fcw_consistency.tsl"),
};

pub const BUILTINS: [Builtin; 4] = [P1, P2, P3, P4];

/// Looks up by short name (`p2`), file stem or file name.
pub fn builtin(name: &str) -> Option<Builtin> {
    BUILTINS
        .into_iter()
        .find(|b| b.name == name || b.file == name || b.file.strip_suffix(".tsl") == Some(name))
}

impl Builtin {
    pub fn compile(&self) -> CompiledSpec {
        CompiledSpec::from_source(self.source).expect("built-in specs are well-typed")
    }

    /// Monitor with identity binding, its default level and id.
    pub fn monitor(&self) -> MonitorInstance {
        MonitorInstance::with_defaults(self.name, self.level, self.compile())
            .expect("built-in specs declare an attack output")
    }
}
