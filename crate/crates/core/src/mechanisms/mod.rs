//! Market mechanisms.
//!
//! * [`g_dac`]: PUs raise the SU utility they offer until no SU turns them
//!   down, approaching the PU-optimal equilibrium.
//! * [`g_rdac`]: the reversed auction, SUs raise the PU utility they offer,
//!   approaching the SU-optimal (PU-robust) equilibrium.
//! * [`gsg_rdac`]: the reversed auction over guess-based transfer curves.
//! * [`dac_fixed`] / [`rdac_fixed`]: deferred acceptance on fixed lists.
//!
//! An ε-auction stops at an ε-equilibrium: a losing bidder may sit up to ε
//! away from the winning offer. With `settle` enabled the auction's assignment
//! is then priced exactly by the function-set solver (least fixed point for
//! G-DAC, greatest for the reversed auctions). If that assignment admits no
//! exact equilibrium, the auction is rerun with ε/4, up to `refinements` times (default 8).

mod auction;
pub mod fixed;
pub mod trace;

use serde::{Deserialize, Serialize};

use crate::channel::NetworkInstance;
use crate::equilibrium::{
    brute_force_equilibria, solve_function_set, solve_upper_function_set, Assignment,
    EquilibriumConfig, Matching,
};
use crate::error::{Error, Result};
use crate::utf::{ExactUtf, GuessUtf, SolverConfig, UtilityTransfer};

use auction::{Auction, AuctionOutcome, Side};

pub use fixed::{
    blocking_pairs, dac_fixed, dac_with_reports, is_stable, rdac_fixed, PreferenceLists,
    SuReportStrategy,
};
pub use trace::{Action, MechanismKind, MechanismTrace, TraceEvent};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MechanismConfig {
    pub solver: SolverConfig,
    pub equilibrium: EquilibriumConfig,
    /// Overrides the computed round cap.
    pub max_rounds: Option<usize>,
    pub record_events: bool,
    /// Price the final assignment exactly (see module docs).
    pub settle: bool,
    /// ε refinements allowed when settling fails.
    pub refinements: usize,
}

impl Default for MechanismConfig {
    fn default() -> Self {
        MechanismConfig {
            solver: SolverConfig::default(),
            equilibrium: EquilibriumConfig::default(),
            max_rounds: None,
            record_events: false,
            settle: true,
            refinements: 8,
        }
    }
}

fn check_epsilon(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "epsilon must be positive, got {eps}"
        )))
    }
}

/// Round cap from the ceilings of all offers: every round but the last raises
/// some offer by ε, and an offer never passes its ceiling by more than ε.
fn round_cap(ceilings: impl Iterator<Item = f64>, eps: f64) -> usize {
    let total: f64 = ceilings.map(|c| (c / eps).ceil() + 2.0).sum();
    (total.min(1e15) as usize).saturating_add(1)
}

type Settler<U> = fn(&U, &Assignment, &EquilibriumConfig) -> Result<Matching>;

struct Run<'a, U: ?Sized> {
    utf: &'a U,
    side: Side,
    kind: MechanismKind,
    settler: Settler<U>,
}

impl<U: UtilityTransfer + ?Sized> Run<'_, U> {
    fn auction(&self, eps: f64, cfg: &MechanismConfig) -> Result<AuctionOutcome> {
        let (pus, sus) = (self.utf.num_pus(), self.utf.num_sus());
        let utf = self.utf;
        let pairs = (0..pus).flat_map(|m| (0..sus).map(move |n| (m, n)));
        match self.side {
            Side::Pu => Auction {
                side: Side::Pu,
                proposers: pus,
                receivers: sus,
                value: |m, n, d| utf.forward(m, n, d),
                eps,
                tol: cfg.equilibrium.tol * 1e-3,
                cap: cfg
                    .max_rounds
                    .unwrap_or_else(|| round_cap(pairs.map(|(m, n)| utf.su_ceiling(m, n)), eps)),
                record: cfg.record_events,
            }
            .run(),
            Side::Su => Auction {
                side: Side::Su,
                proposers: sus,
                receivers: pus,
                value: |n, m, pi| utf.inverse(m, n, pi).unwrap_or(f64::NEG_INFINITY),
                eps,
                tol: cfg.equilibrium.tol * 1e-3,
                cap: cfg
                    .max_rounds
                    .unwrap_or_else(|| round_cap(pairs.map(|(m, n)| utf.pu_ceiling(m, n)), eps)),
                record: cfg.record_events,
            }
            .run(),
        }
    }

    fn raw_matching(&self, out: &AuctionOutcome, eps: f64) -> Matching {
        let (pus, sus) = (self.utf.num_pus(), self.utf.num_sus());
        let mut pairs = Vec::new();
        let mut deltas = vec![0.0; sus];
        match self.side {
            Side::Pu => {
                for (n, h) in out.holder.iter().enumerate() {
                    if let Some(m) = *h {
                        pairs.push((m, n));
                        deltas[n] = out.offer(m, n, eps);
                    }
                }
            }
            Side::Su => {
                for (m, h) in out.holder.iter().enumerate() {
                    if let Some(n) = *h {
                        pairs.push((m, n));
                        deltas[n] = self.utf.inverse(m, n, out.offer(n, m, eps)).unwrap_or(0.0);
                    }
                }
            }
        }
        let assignment =
            Assignment::from_pairs(pus, sus, &pairs).expect("auction holds one bid per receiver");
        Matching::from_utilities(self.utf, assignment, deltas)
    }

    fn execute(&self, epsilon: f64, cfg: &MechanismConfig) -> Result<MechanismTrace> {
        check_epsilon(epsilon)?;
        cfg.equilibrium.validate()?;
        let mut eps = epsilon;
        let mut total_rounds = 0;
        let mut refinements = 0;
        loop {
            let out = self.auction(eps, cfg)?;
            total_rounds += out.rounds;
            let raw = self.raw_matching(&out, eps);
            let settled = if cfg.settle {
                (self.settler)(self.utf, &raw.assignment, &cfg.equilibrium).ok()
            } else {
                None
            };
            let done = settled.is_some() || !cfg.settle || refinements >= cfg.refinements;
            if done {
                let is_settled = settled.is_some();
                let matching = settled.unwrap_or_else(|| raw.clone());
                return Ok(MechanismTrace {
                    mechanism: self.kind,
                    epsilon: eps,
                    rounds: out.rounds,
                    total_rounds,
                    refinements,
                    converged: true,
                    settled: is_settled,
                    pu_utilities: matching.pu_utilities(self.utf),
                    matching,
                    raw,
                    events: out.events,
                });
            }
            eps /= 4.0;
            refinements += 1;
        }
    }
}

/// PU-proposing ε-auction on an arbitrary transfer-function family.
pub fn g_dac_with<U: UtilityTransfer + ?Sized>(
    utf: &U,
    epsilon: f64,
    cfg: &MechanismConfig,
) -> Result<MechanismTrace> {
    Run {
        utf,
        side: Side::Pu,
        kind: MechanismKind::GDac,
        settler: solve_function_set::<U>,
    }
    .execute(epsilon, cfg)
}

/// SU-proposing ε-auction on an arbitrary transfer-function family.
pub fn g_rdac_with<U: UtilityTransfer + ?Sized>(
    utf: &U,
    epsilon: f64,
    cfg: &MechanismConfig,
) -> Result<MechanismTrace> {
    Run {
        utf,
        side: Side::Su,
        kind: MechanismKind::GRdac,
        settler: solve_upper_function_set::<U>,
    }
    .execute(epsilon, cfg)
}

/// G-DAC: approaches the PU-optimal equilibrium.
pub fn g_dac(
    instance: &NetworkInstance,
    epsilon: f64,
    cfg: &MechanismConfig,
) -> Result<MechanismTrace> {
    g_dac_with(&ExactUtf::new(instance, &cfg.solver)?, epsilon, cfg)
}

/// G-RDAC: approaches the SU-optimal, PU-robust equilibrium.
pub fn g_rdac(
    instance: &NetworkInstance,
    epsilon: f64,
    cfg: &MechanismConfig,
) -> Result<MechanismTrace> {
    g_rdac_with(&ExactUtf::new(instance, &cfg.solver)?, epsilon, cfg)
}

/// GSG-RDAC: the reversed auction over guess-based curves.
pub fn gsg_rdac(
    instance: &NetworkInstance,
    epsilon: f64,
    cfg: &MechanismConfig,
) -> Result<MechanismTrace> {
    let utf = GuessUtf::new(instance, &cfg.solver)?;
    let mut trace = g_rdac_with(&utf, epsilon, cfg)?;
    trace.mechanism = MechanismKind::GsgRdac;
    Ok(trace)
}

/// The PU-optimal member of the exhaustive oracle: the enumerated
/// equilibrium with the largest total PU utility.
pub fn brute_force_optimum(
    instance: &NetworkInstance,
    cfg: &MechanismConfig,
) -> Result<MechanismTrace> {
    let utf = ExactUtf::new(instance, &cfg.solver)?;
    let all = brute_force_equilibria(&utf, &cfg.equilibrium)?;
    let total = |m: &Matching| m.pu_utilities(&utf).iter().sum::<f64>();
    let best = all
        .into_iter()
        .fold(None::<Matching>, |best, m| match best {
            Some(b) if total(&b) >= total(&m) => Some(b),
            _ => Some(m),
        })
        .ok_or(Error::NoSolution)?;
    Ok(MechanismTrace {
        mechanism: MechanismKind::BruteForce,
        epsilon: 0.0,
        rounds: 0,
        total_rounds: 0,
        refinements: 0,
        converged: true,
        settled: true,
        pu_utilities: best.pu_utilities(&utf),
        raw: best.clone(),
        matching: best,
        events: Vec::new(),
    })
}

/// Dispatches on `kind`; `epsilon` is ignored by the exhaustive oracle.
pub fn run_mechanism(
    instance: &NetworkInstance,
    kind: MechanismKind,
    epsilon: f64,
    cfg: &MechanismConfig,
) -> Result<MechanismTrace> {
    match kind {
        MechanismKind::GDac => g_dac(instance, epsilon, cfg),
        MechanismKind::GRdac => g_rdac(instance, epsilon, cfg),
        MechanismKind::GsgRdac => gsg_rdac(instance, epsilon, cfg),
        MechanismKind::BruteForce => brute_force_optimum(instance, cfg),
    }
}
