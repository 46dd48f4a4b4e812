//! Cooperative relay spectrum sharing as a two-sided matching market with
//! transferable utility.
//!
//! PUs (licensed owners) lease spectrum access time to SUs in exchange for
//! amplify-and-forward relaying. The crate computes utility transfer
//! functions for every PU/SU pair, checks and enumerates market equilibria,
//! runs deferred-acceptance style auctions that reach them, and generates
//! random topologies for experiment sweeps.

pub mod channel;
pub mod equilibrium;
pub mod error;
pub mod format;
pub mod mechanisms;
pub mod simulation;
pub mod utf;

pub use channel::{
    direct_snr, relay_snr, DerivedRates, Gain, LinkGains, LogBase, NetworkInstance, PairModel,
    Point, PuParams, ResourceExchange, SuParams,
};
pub use equilibrium::{
    brute_force_equilibria, greatest_fixed_point, lattice_merge, least_fixed_point, lower_bound,
    pu_utility_of, solve_function_set, solve_upper_function_set, upper_bound, verify_equilibrium,
    Actor, Assignment, Condition, EquilibriumCertificate, EquilibriumConfig, Matching, SuBounds,
    Violation,
};
pub use error::{Error, Result};
pub use mechanisms::{
    brute_force_optimum, dac_fixed, dac_with_reports, g_dac, g_dac_with, g_rdac, g_rdac_with,
    gsg_rdac, rdac_fixed, run_mechanism, MechanismConfig, MechanismKind, MechanismTrace,
    PreferenceLists, SuReportStrategy,
};
pub use simulation::{
    generate_topology, run_sweep, summarize, ExperimentConfig, ExperimentRow, SummaryRow,
    TopologyConfig,
};
pub use utf::{
    gs_utf, gs_utf_curve, inverse_utf, solve_utf, ExactUtf, GsCurve, GsPoint, GsSolution, GuessUtf,
    PairSolver, SolverConfig, UtfSolution, UtilityTransfer,
};
