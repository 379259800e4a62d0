//! Outcome table of the measurement cascade.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Result};
use crate::state::{InternalLabel, Sign};

use super::measurement::PathLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    SuccessDirect,
    SuccessAfterRotation,
    Failure,
}

impl Status {
    pub fn is_success(self) -> bool {
        !matches!(self, Status::Failure)
    }
}

/// Rows numbered 1..=11 in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TableRow(u8);

impl TableRow {
    pub const COUNT: usize = 11;

    pub fn new(id: u8) -> Result<Self> {
        if (1..=11).contains(&id) {
            Ok(Self(id))
        } else {
            Err(domain(format!("table row {id} out of range 1..=11")))
        }
    }

    pub fn all() -> impl Iterator<Item = TableRow> {
        (1..=11).map(TableRow)
    }

    pub fn id(self) -> u8 {
        self.0
    }

    /// (photons, atom-2 label, path 1, path 2) of the row.
    pub fn outcome(self) -> (u8, Option<InternalLabel>, Option<PathLabel>, Option<PathLabel>) {
        use InternalLabel::{Excited as E, Ground as G};
        use Sign::{Minus as M, Plus as P};
        match self.0 {
            1 => (2, None, None, None),
            2 => (1, Some(E), None, None),
            3 => (1, Some(G), Some(M), Some(M)),
            4 => (1, Some(G), Some(M), Some(P)),
            5 => (1, Some(G), Some(P), Some(P)),
            6 => (1, Some(G), Some(P), Some(M)),
            7 => (0, Some(G), None, None),
            8 => (0, Some(E), Some(M), Some(M)),
            9 => (0, Some(E), Some(M), Some(P)),
            10 => (0, Some(E), Some(P), Some(P)),
            _ => (0, Some(E), Some(P), Some(M)),
        }
    }

    pub fn status(self) -> Status {
        match self.outcome() {
            (_, _, None, _) => Status::Failure,
            (_, _, Some(a), Some(b)) if a == b => Status::SuccessDirect,
            _ => Status::SuccessAfterRotation,
        }
    }

    /// Unconditional probability in the orthogonal-branch limit.
    pub fn analytic_probability(self, theta: f64) -> f64 {
        let c = theta.cos();
        match self.0 {
            1 | 2 => (1.0 + c) / 8.0,
            7 => (1.0 - c) / 4.0,
            _ => 1.0 / 16.0,
        }
    }
}

impl fmt::Display for TableRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, a2, p1, p2) = self.outcome();
        write!(f, "n={n}")?;
        if let Some(a) = a2 {
            write!(f, " {a}2")?;
        }
        if let (Some(a), Some(b)) = (p1, p2) {
            write!(f, " l1{a} l2{b}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TeleportResult {
    pub status: Status,
    pub row: TableRow,
}

/// Whether the cascade needs the atomic paths after (n, atom-2 outcome).
pub fn needs_paths(n: u8, atom2: InternalLabel) -> bool {
    matches!((n, atom2), (1, InternalLabel::Ground) | (0, InternalLabel::Excited))
}

/// Maps a measurement record onto its table row.
pub fn classify(
    n: u8,
    atom2: InternalLabel,
    path1: Option<PathLabel>,
    path2: Option<PathLabel>,
) -> Result<TeleportResult> {
    let row = match (n, atom2) {
        (2, _) => 1,
        (1, InternalLabel::Excited) => 2,
        (0, InternalLabel::Ground) => 7,
        (1, InternalLabel::Ground) | (0, InternalLabel::Excited) => {
            let (Some(a), Some(b)) = (path1, path2) else {
                return Err(contract(format!("row n={n}, {atom2}2 needs both paths")));
            };
            let base = if n == 1 { 3 } else { 8 };
            base + match (a, b) {
                (Sign::Minus, Sign::Minus) => 0,
                (Sign::Minus, Sign::Plus) => 1,
                (Sign::Plus, Sign::Plus) => 2,
                (Sign::Plus, Sign::Minus) => 3,
            }
        }
        _ => return Err(domain(format!("photon number {n} is not a protocol outcome"))),
    };
    let row = TableRow(row);
    Ok(TeleportResult {
        status: row.status(),
        row,
    })
}
