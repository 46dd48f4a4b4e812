//! Ascending ε-auction shared by the PU-proposing and SU-proposing mechanisms.
//!
//! Proposers hold an offer level per receiver, starting at zero. Each round
//! every proposer bids where its own value of the current offer is highest
//! (abstaining if that is negative), every receiver keeps the best bid and
//! rejects the rest, and every rejected offer is raised by ε. The auction ends
//! after the first round without rejections.

use crate::equilibrium::Actor;
use crate::error::{Error, Result};

use super::trace::{Action, TraceEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    /// PUs propose, SUs receive.
    Pu,
    /// SUs propose, PUs receive.
    Su,
}

impl Side {
    fn proposer(self, i: usize) -> Actor {
        match self {
            Side::Pu => Actor::Pu(i),
            Side::Su => Actor::Su(i),
        }
    }

    fn receiver(self, j: usize) -> Actor {
        match self {
            Side::Pu => Actor::Su(j),
            Side::Su => Actor::Pu(j),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct AuctionOutcome {
    /// Proposer held by each receiver.
    pub holder: Vec<Option<usize>>,
    /// Offer of proposer `i` to receiver `j`, as a multiple of ε.
    pub steps: Vec<Vec<u64>>,
    pub rounds: usize,
    pub events: Vec<TraceEvent>,
}

impl AuctionOutcome {
    pub fn offer(&self, i: usize, j: usize, eps: f64) -> f64 {
        self.steps[i][j] as f64 * eps
    }
}

pub(crate) struct Auction<F> {
    pub side: Side,
    pub proposers: usize,
    pub receivers: usize,
    /// Proposer `i`'s own utility when its offer to `j` is `x`; −∞ if the
    /// offer cannot be honored.
    pub value: F,
    pub eps: f64,
    pub tol: f64,
    pub cap: usize,
    pub record: bool,
}

impl<F: Fn(usize, usize, f64) -> f64> Auction<F> {
    pub fn run(&self) -> Result<AuctionOutcome> {
        let (np, nr, eps, tol) = (self.proposers, self.receivers, self.eps, self.tol);
        let mut steps = vec![vec![0u64; nr]; np];
        let mut vals: Vec<Vec<f64>> = (0..np)
            .map(|i| (0..nr).map(|j| (self.value)(i, j, 0.0)).collect())
            .collect();
        let mut holder: Vec<Option<usize>> = vec![None; nr];
        let mut bids: Vec<Vec<usize>> = vec![Vec::new(); nr];
        let mut events = Vec::new();
        let mut log = |round, actor, action, target, value| {
            if self.record {
                events.push(TraceEvent {
                    round,
                    actor,
                    action,
                    target,
                    value,
                });
            }
        };

        for round in 1..=self.cap {
            for b in bids.iter_mut() {
                b.clear();
            }
            for i in 0..np {
                let mut best: Option<(usize, f64)> = None;
                for (j, &v) in vals[i].iter().enumerate() {
                    if best.is_none_or(|(_, bv)| v > bv + tol) {
                        best = Some((j, v));
                    }
                }
                match best {
                    Some((j, v)) if v >= 0.0 => {
                        bids[j].push(i);
                        let x = steps[i][j] as f64 * eps;
                        log(
                            round,
                            self.side.proposer(i),
                            Action::Propose,
                            Some(self.side.receiver(j)),
                            x,
                        );
                    }
                    _ => log(round, self.side.proposer(i), Action::Abstain, None, 0.0),
                }
            }

            let mut rejected = false;
            for j in 0..nr {
                if bids[j].is_empty() {
                    holder[j] = None;
                    continue;
                }
                let offer = |i: usize| steps[i][j] as f64 * eps;
                let top = bids[j]
                    .iter()
                    .map(|&i| offer(i))
                    .fold(f64::NEG_INFINITY, f64::max);
                let tied = |i: usize| offer(i) >= top - tol;
                let keep = match holder[j] {
                    Some(h) if bids[j].contains(&h) && tied(h) => h,
                    _ => *bids[j].iter().filter(|&&i| tied(i)).min().unwrap(),
                };
                holder[j] = Some(keep);
                log(
                    round,
                    self.side.receiver(j),
                    Action::Accept,
                    Some(self.side.proposer(keep)),
                    offer(keep),
                );
                for &i in bids[j].iter().filter(|&&i| i != keep) {
                    log(
                        round,
                        self.side.receiver(j),
                        Action::Reject,
                        Some(self.side.proposer(i)),
                        offer(i),
                    );
                }
                for &i in bids[j].iter().filter(|&&i| i != keep) {
                    rejected = true;
                    steps[i][j] += 1;
                    let x = steps[i][j] as f64 * eps;
                    vals[i][j] = (self.value)(i, j, x);
                    log(
                        round,
                        self.side.proposer(i),
                        Action::Raise,
                        Some(self.side.receiver(j)),
                        x,
                    );
                }
            }

            if !rejected {
                return Ok(AuctionOutcome {
                    holder,
                    steps,
                    rounds: round,
                    events,
                });
            }
        }
        Err(Error::IterationCapExceeded { cap: self.cap })
    }
}
