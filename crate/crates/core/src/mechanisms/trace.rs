use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::equilibrium::{Actor, Matching};
use crate::error::Error;

/// Market mechanism selectable at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MechanismKind {
    #[serde(rename = "g_dac", alias = "g-dac")]
    GDac,
    #[serde(rename = "g_rdac", alias = "g-rdac")]
    GRdac,
    #[serde(rename = "gsg_rdac", alias = "gsg-rdac")]
    GsgRdac,
    #[serde(rename = "brute_force", alias = "brute-force")]
    BruteForce,
}

impl MechanismKind {
    pub fn name(self) -> &'static str {
        match self {
            MechanismKind::GDac => "g_dac",
            MechanismKind::GRdac => "g_rdac",
            MechanismKind::GsgRdac => "gsg_rdac",
            MechanismKind::BruteForce => "brute_force",
        }
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.replace('-', "_").as_str() {
            "g_dac" => Ok(MechanismKind::GDac),
            "g_rdac" => Ok(MechanismKind::GRdac),
            "gsg_rdac" => Ok(MechanismKind::GsgRdac),
            "brute_force" => Ok(MechanismKind::BruteForce),
            _ => Err(Error::InvalidConfig(format!("unknown mechanism `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Propose,
    Abstain,
    Accept,
    Reject,
    /// Offer raised by ε after a rejection; value is the new offer.
    Raise,
}

impl Action {
    pub fn name(self) -> &'static str {
        match self {
            Action::Propose => "propose",
            Action::Abstain => "abstain",
            Action::Accept => "accept",
            Action::Reject => "reject",
            Action::Raise => "raise",
        }
    }
}

/// One line of the auction log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEvent {
    pub round: usize,
    pub actor: Actor,
    pub action: Action,
    pub target: Option<Actor>,
    /// Offer level involved: SU utility in G-DAC, PU utility in the reversed
    /// auctions.
    pub value: f64,
}

fn actor_token(a: Actor) -> String {
    match a {
        Actor::Pu(m) => format!("pu{m}"),
        Actor::Su(n) => format!("su{n}"),
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}, {}, {}, {}, {:.10}",
            self.round,
            actor_token(self.actor),
            self.action.name(),
            self.target.map(actor_token).unwrap_or_else(|| "-".into()),
            self.value
        )
    }
}

/// Outcome of one mechanism run.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismTrace {
    pub mechanism: MechanismKind,
    /// Step size of the auction that produced the final assignment.
    pub epsilon: f64,
    /// Rounds of that auction, including the final quiet round.
    pub rounds: usize,
    /// Rounds over every auction run, refinements included.
    pub total_rounds: usize,
    /// Number of times ε was refined before settling.
    pub refinements: usize,
    /// The auction stopped before its round cap.
    pub converged: bool,
    /// The final matching passed the equilibrium certificate.
    pub settled: bool,
    /// Matching read directly off the last auction's standing offers.
    pub raw: Matching,
    pub matching: Matching,
    /// Utility of each PU under `matching`, on the transfer functions the
    /// mechanism ran on.
    pub pu_utilities: Vec<f64>,
    pub events: Vec<TraceEvent>,
}

impl MechanismTrace {
    pub fn total_pu_utility(&self) -> f64 {
        self.pu_utilities.iter().sum()
    }

    /// Log lines with a header, one event per line.
    pub fn log_lines(&self) -> impl Iterator<Item = String> + '_ {
        std::iter::once("round, actor, action, target, value".to_string())
            .chain(self.events.iter().map(|e| e.to_string()))
    }
}
