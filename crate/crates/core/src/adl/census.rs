use std::fmt;

use serde::Serialize;

use super::compile::{AtlasProgram, Complexity, REFERENCE_CHANNEL};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClassCounts {
    pub direct: usize,
    pub one_time: usize,
    pub multi_time: usize,
}

impl ClassCounts {
    pub fn total(&self) -> usize {
        self.direct + self.one_time + self.multi_time
    }

    fn bump(&mut self, class: Complexity, by: usize) {
        match class {
            Complexity::Direct => self.direct += by,
            Complexity::OneTimeProportional => self.one_time += by,
            Complexity::MultiTimeProportional => self.multi_time += by,
        }
    }
}

/// Point counts split by reference channel vs acupoints and by complexity.
/// Symmetric rows count as two points, one per side.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Census {
    pub reference: ClassCounts,
    pub acupoint: ClassCounts,
    pub definitions: usize,
}

impl Census {
    pub fn total_points(&self) -> usize {
        self.reference.total() + self.acupoint.total()
    }
}

pub fn census(program: &AtlasProgram) -> Census {
    let mut out = Census {
        definitions: program.len(),
        ..Census::default()
    };
    for (i, def) in program.definitions().iter().enumerate() {
        let by = if def.is_symmetric { 2 } else { 1 };
        let row = if def.id.channel() == REFERENCE_CHANNEL {
            &mut out.reference
        } else {
            &mut out.acupoint
        };
        row.bump(program.complexity_at(i), by);
    }
    out
}

impl fmt::Display for Census {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<18}{:>8}{:>11}{:>13}{:>8}",
            "Quantity", "Direct", "One-time", "Multi-time", "Total"
        )?;
        for (label, c) in [
            ("Reference points", self.reference),
            ("Acupoints", self.acupoint),
        ] {
            writeln!(
                f,
                "{:<18}{:>8}{:>11}{:>13}{:>8}",
                label,
                c.direct,
                c.one_time,
                c.multi_time,
                c.total()
            )?;
        }
        write!(
            f,
            "{} definitions, {} points",
            self.definitions,
            self.total_points()
        )
    }
}
