//! Matchings, equilibrium certificates and equilibrium solvers.
//!
//! A matching pairs PUs with SUs one-to-one and fixes every matched SU's
//! utility δ_n; the matched PU then receives f_n^{μ_n}(δ_n). A matching is an
//! equilibrium iff every matched SU sits between
//!
//! * the lowest acceptable utility δ̲_n = max(0, max_{m≠μ_n} g_n^m(u_m)),
//!   what any rival PU could still pay without losing, and
//! * the highest achievable utility δ̄_n = min(g_n^{μ_n}(0),
//!   min_{k≠n} g_n^{μ_n}(f_k^{μ_n}(δ_k))), beyond which its PU would rather
//!   serve someone else,
//!
//! and no unmatched SU can strike a mutually profitable deal with any PU.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::ResourceExchange;
use crate::error::{Error, Result};
use crate::utf::UtilityTransfer;

/// Tolerances and caps for certificates and fixed-point solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquilibriumConfig {
    /// Slack allowed in every bound comparison.
    pub tol: f64,
    /// Iteration cap of the fixed-point solvers.
    pub max_iters: usize,
    /// Samples per SU interval in the exhaustive oracle.
    pub oracle_grid: usize,
    /// Upper bound on sampled utility vectors per assignment in the oracle.
    pub oracle_budget: usize,
}

impl Default for EquilibriumConfig {
    fn default() -> Self {
        EquilibriumConfig {
            tol: 1e-6,
            max_iters: 10_000,
            oracle_grid: 21,
            oracle_budget: 200,
        }
    }
}

impl EquilibriumConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidConfig(
                "equilibrium tol must be positive".into(),
            ));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be positive".into()));
        }
        Ok(())
    }
}

/// Partial one-to-one assignment between PUs and SUs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment {
    su_of_pu: Vec<Option<usize>>,
    pu_of_su: Vec<Option<usize>>,
}

impl Assignment {
    pub fn empty(pus: usize, sus: usize) -> Self {
        Assignment {
            su_of_pu: vec![None; pus],
            pu_of_su: vec![None; sus],
        }
    }

    /// Builds an assignment from `(pu, su)` pairs, rejecting repeats.
    pub fn from_pairs(pus: usize, sus: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut a = Assignment::empty(pus, sus);
        for &(m, n) in pairs {
            if m >= pus || n >= sus {
                return Err(Error::InvalidMatching(format!(
                    "pair ({m}, {n}) outside a {pus} x {sus} market"
                )));
            }
            if a.su_of_pu[m].is_some() || a.pu_of_su[n].is_some() {
                return Err(Error::InvalidMatching(format!(
                    "PU {m} or SU {n} appears in more than one pair"
                )));
            }
            a.su_of_pu[m] = Some(n);
            a.pu_of_su[n] = Some(m);
        }
        Ok(a)
    }

    pub fn num_pus(&self) -> usize {
        self.su_of_pu.len()
    }

    pub fn num_sus(&self) -> usize {
        self.pu_of_su.len()
    }

    pub fn su_of(&self, m: usize) -> Option<usize> {
        self.su_of_pu[m]
    }

    pub fn pu_of(&self, n: usize) -> Option<usize> {
        self.pu_of_su[n]
    }

    /// Matched pairs in PU order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.su_of_pu
            .iter()
            .enumerate()
            .filter_map(|(m, n)| n.map(|n| (m, n)))
    }

    pub fn len(&self) -> usize {
        self.su_of_pu.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every partial injective assignment of a `pus` x `sus` market.
    pub fn enumerate(pus: usize, sus: usize) -> Vec<Assignment> {
        fn rec(m: usize, cur: &mut Assignment, out: &mut Vec<Assignment>) {
            if m == cur.num_pus() {
                out.push(cur.clone());
                return;
            }
            rec(m + 1, cur, out);
            for n in 0..cur.num_sus() {
                if cur.pu_of_su[n].is_none() {
                    cur.su_of_pu[m] = Some(n);
                    cur.pu_of_su[n] = Some(m);
                    rec(m + 1, cur, out);
                    cur.su_of_pu[m] = None;
                    cur.pu_of_su[n] = None;
                }
            }
        }
        let mut out = Vec::new();
        rec(0, &mut Assignment::empty(pus, sus), &mut out);
        out
    }
}

/// An assignment plus the utility division: δ_n per SU and the contract
/// realizing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    pub assignment: Assignment,
    /// δ_n; zero for unmatched SUs.
    pub su_utilities: Vec<f64>,
    /// Contract of each matched SU.
    pub exchanges: Vec<Option<ResourceExchange>>,
}

impl Matching {
    pub fn new(
        assignment: Assignment,
        su_utilities: Vec<f64>,
        exchanges: Vec<Option<ResourceExchange>>,
    ) -> Result<Self> {
        let n = assignment.num_sus();
        if su_utilities.len() != n || exchanges.len() != n {
            return Err(Error::InvalidMatching(format!(
                "expected {n} SU utilities and exchanges"
            )));
        }
        for k in 0..n {
            if assignment.pu_of(k).is_none() && (su_utilities[k] != 0.0 || exchanges[k].is_some()) {
                return Err(Error::InvalidMatching(format!(
                    "unmatched SU {k} carries a utility or contract"
                )));
            }
        }
        Ok(Matching {
            assignment,
            su_utilities,
            exchanges,
        })
    }

    /// Matching with contracts re-solved from the transfer functions.
    pub fn from_utilities<U: UtilityTransfer + ?Sized>(
        utf: &U,
        assignment: Assignment,
        su_utilities: Vec<f64>,
    ) -> Self {
        let exchanges = (0..assignment.num_sus())
            .map(|n| {
                assignment
                    .pu_of(n)
                    .and_then(|m| utf.exchange(m, n, su_utilities[n]))
            })
            .collect();
        Matching {
            assignment,
            su_utilities,
            exchanges,
        }
    }

    pub fn unmatched(pus: usize, sus: usize) -> Self {
        Matching {
            assignment: Assignment::empty(pus, sus),
            su_utilities: vec![0.0; sus],
            exchanges: vec![None; sus],
        }
    }

    pub fn num_pus(&self) -> usize {
        self.assignment.num_pus()
    }

    pub fn num_sus(&self) -> usize {
        self.assignment.num_sus()
    }

    pub fn pu_utilities<U: UtilityTransfer + ?Sized>(&self, utf: &U) -> Vec<f64> {
        pu_utilities(utf, &self.assignment, &self.su_utilities)
    }

    pub fn total_su_utility(&self) -> f64 {
        self.su_utilities.iter().sum()
    }
}

fn pu_utilities<U: UtilityTransfer + ?Sized>(utf: &U, a: &Assignment, deltas: &[f64]) -> Vec<f64> {
    (0..a.num_pus())
        .map(|m| match a.su_of(m) {
            Some(n) => utf.forward(m, n, deltas[n]),
            None => 0.0,
        })
        .collect()
}

/// Utility of PU `m`: f_{μ_m}^m(δ_{μ_m}) if matched, zero otherwise.
pub fn pu_utility_of<U: UtilityTransfer + ?Sized>(utf: &U, matching: &Matching, m: usize) -> f64 {
    match matching.assignment.su_of(m) {
        Some(n) => utf.forward(m, n, matching.su_utilities[n]),
        None => 0.0,
    }
}

/// δ̲_n with the binding rival PU (`None` when the zero floor binds).
fn lower_detail<U: UtilityTransfer + ?Sized>(
    utf: &U,
    a: &Assignment,
    pu_util: &[f64],
    n: usize,
) -> (f64, Option<usize>) {
    let own = a.pu_of(n);
    let mut best = (0.0, None);
    for m in (0..a.num_pus()).filter(|&m| Some(m) != own) {
        if let Some(d) = utf.inverse(m, n, pu_util[m]) {
            if d > best.0 {
                best = (d, Some(m));
            }
        }
    }
    best
}

/// δ̄_n with the binding rival SU (`None` when the cap g_n^{μ_n}(0) binds).
/// −∞ when some rival already gives the PU more than SU n ever could.
fn upper_detail<U: UtilityTransfer + ?Sized>(
    utf: &U,
    a: &Assignment,
    deltas: &[f64],
    n: usize,
) -> (f64, Option<usize>) {
    let Some(m) = a.pu_of(n) else {
        return (f64::INFINITY, None);
    };
    let mut best = (utf.inverse(m, n, 0.0).unwrap_or(f64::NEG_INFINITY), None);
    for k in (0..a.num_sus()).filter(|&k| k != n) {
        let rival = utf.forward(m, k, deltas[k]);
        let d = if rival == f64::NEG_INFINITY {
            continue;
        } else {
            utf.inverse(m, n, rival).unwrap_or(f64::NEG_INFINITY)
        };
        if d < best.0 {
            best = (d, Some(k));
        }
    }
    best
}

/// Lowest acceptable utility δ̲_n.
pub fn lower_bound<U: UtilityTransfer + ?Sized>(utf: &U, matching: &Matching, n: usize) -> f64 {
    let u = matching.pu_utilities(utf);
    lower_detail(utf, &matching.assignment, &u, n).0
}

/// Highest achievable utility δ̄_n; +∞ for an unmatched SU.
pub fn upper_bound<U: UtilityTransfer + ?Sized>(utf: &U, matching: &Matching, n: usize) -> f64 {
    upper_detail(utf, &matching.assignment, &matching.su_utilities, n).0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    IndividualRationality,
    IncentiveCompatibility,
    CompetitiveCompatibility,
    BlockingPair,
}

impl Condition {
    pub fn code(self) -> &'static str {
        match self {
            Condition::IndividualRationality => "IR",
            Condition::IncentiveCompatibility => "IC",
            Condition::CompetitiveCompatibility => "CC",
            Condition::BlockingPair => "BlockingPair",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Actor {
    Pu(usize),
    Su(usize),
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Actor::Pu(m) => write!(f, "PU {m}"),
            Actor::Su(n) => write!(f, "SU {n}"),
        }
    }
}

/// One failed condition. `slack` is by how much it fails.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub condition: Condition,
    pub actors: Vec<Actor>,
    pub slack: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.condition.code())?;
        for a in &self.actors {
            write!(f, " {a}")?;
        }
        write!(f, " (by {:.3e})", self.slack)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuBounds {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumCertificate {
    /// [δ̲_n, δ̄_n] for matched SUs.
    pub bounds: Vec<Option<SuBounds>>,
    pub verdict: bool,
    pub violations: Vec<Violation>,
}

fn certify<U: UtilityTransfer + ?Sized>(
    utf: &U,
    a: &Assignment,
    deltas: &[f64],
    tol: f64,
) -> EquilibriumCertificate {
    let u = pu_utilities(utf, a, deltas);
    let mut bounds = vec![None; a.num_sus()];
    let mut violations = Vec::new();

    for (m, n) in a.pairs() {
        let d = deltas[n];
        let mut pu_ir = false;
        if d < -tol {
            violations.push(Violation {
                condition: Condition::IndividualRationality,
                actors: vec![Actor::Su(n)],
                slack: -d,
            });
        }
        if u[m] < -tol {
            pu_ir = true;
            violations.push(Violation {
                condition: Condition::IndividualRationality,
                actors: vec![Actor::Pu(m)],
                slack: -u[m],
            });
        }
        let (upper, rival_su) = upper_detail(utf, a, deltas, n);
        let (lower, rival_pu) = lower_detail(utf, a, &u, n);
        if d > upper + tol {
            match rival_su {
                Some(k) => violations.push(Violation {
                    condition: Condition::IncentiveCompatibility,
                    actors: vec![Actor::Su(n), Actor::Pu(m), Actor::Su(k)],
                    slack: d - upper,
                }),
                None if !pu_ir => violations.push(Violation {
                    condition: Condition::IndividualRationality,
                    actors: vec![Actor::Pu(m)],
                    slack: d - upper,
                }),
                None => {}
            }
        }
        if d < lower - tol {
            let mut actors = vec![Actor::Su(n)];
            actors.extend(rival_pu.map(Actor::Pu));
            violations.push(Violation {
                condition: Condition::CompetitiveCompatibility,
                actors,
                slack: lower - d,
            });
        }
        bounds[n] = Some(SuBounds { lower, upper });
    }

    for n in (0..a.num_sus()).filter(|&n| a.pu_of(n).is_none()) {
        for (m, um) in u.iter().enumerate() {
            let gain = utf.forward(m, n, tol) - um;
            if gain > tol {
                violations.push(Violation {
                    condition: Condition::BlockingPair,
                    actors: vec![Actor::Pu(m), Actor::Su(n)],
                    slack: gain,
                });
            }
        }
    }

    EquilibriumCertificate {
        bounds,
        verdict: violations.is_empty(),
        violations,
    }
}

/// Checks the equilibrium conditions of a matching.
pub fn verify_equilibrium<U: UtilityTransfer + ?Sized>(
    utf: &U,
    matching: &Matching,
    cfg: &EquilibriumConfig,
) -> EquilibriumCertificate {
    certify(utf, &matching.assignment, &matching.su_utilities, cfg.tol)
}

/// Componentwise minimum of two equilibria on the same assignment.
pub fn lattice_merge<U: UtilityTransfer + ?Sized>(
    utf: &U,
    a: &Matching,
    b: &Matching,
) -> Result<Matching> {
    if a.assignment != b.assignment {
        return Err(Error::AssignmentMismatch);
    }
    let deltas = a
        .su_utilities
        .iter()
        .zip(&b.su_utilities)
        .map(|(x, y)| x.min(*y))
        .collect();
    Ok(Matching::from_utilities(utf, a.assignment.clone(), deltas))
}

fn check_assignment<U: UtilityTransfer + ?Sized>(utf: &U, a: &Assignment) -> Result<()> {
    if a.num_pus() != utf.num_pus() || a.num_sus() != utf.num_sus() {
        return Err(Error::InvalidMatching(format!(
            "assignment is {} x {}, market is {} x {}",
            a.num_pus(),
            a.num_sus(),
            utf.num_pus(),
            utf.num_sus()
        )));
    }
    Ok(())
}

/// Iterates δ ← F(δ) with F_n = δ̲_n from zero. F is monotone, so the
/// iterates climb to the least fixed point.
pub fn least_fixed_point<U: UtilityTransfer + ?Sized>(
    utf: &U,
    a: &Assignment,
    cfg: &EquilibriumConfig,
) -> Option<Vec<f64>> {
    let mut deltas = vec![0.0; a.num_sus()];
    let stop = cfg.tol * 1e-2;
    for _ in 0..cfg.max_iters {
        let u = pu_utilities(utf, a, &deltas);
        let next: Vec<f64> = (0..a.num_sus())
            .map(|n| match a.pu_of(n) {
                Some(_) => lower_detail(utf, a, &u, n).0,
                None => 0.0,
            })
            .collect();
        let change = max_change(&deltas, &next);
        deltas = next;
        if change < stop {
            return Some(deltas);
        }
    }
    None
}

/// Iterates δ ← G(δ) with G_n = δ̄_n from the caps g_n^{μ_n}(0) downwards,
/// reaching the greatest fixed point.
pub fn greatest_fixed_point<U: UtilityTransfer + ?Sized>(
    utf: &U,
    a: &Assignment,
    cfg: &EquilibriumConfig,
) -> Option<Vec<f64>> {
    let mut deltas = vec![0.0; a.num_sus()];
    for (m, n) in a.pairs() {
        deltas[n] = utf.inverse(m, n, 0.0)?;
    }
    let stop = cfg.tol * 1e-2;
    for _ in 0..cfg.max_iters {
        let next: Vec<f64> = (0..a.num_sus())
            .map(|n| match a.pu_of(n) {
                Some(_) => upper_detail(utf, a, &deltas, n).0,
                None => 0.0,
            })
            .collect();
        if next.iter().any(|d| !d.is_finite()) {
            return None;
        }
        let change = max_change(&deltas, &next);
        deltas = next;
        if change < stop {
            return Some(deltas);
        }
    }
    None
}

fn max_change(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// PU-optimal division on a fixed assignment: every matched SU at δ̲_n.
pub fn solve_function_set<U: UtilityTransfer + ?Sized>(
    utf: &U,
    assignment: &Assignment,
    cfg: &EquilibriumConfig,
) -> Result<Matching> {
    check_assignment(utf, assignment)?;
    let deltas = least_fixed_point(utf, assignment, cfg).ok_or(Error::NoSolution)?;
    settle(utf, assignment, deltas, cfg)
}

/// SU-optimal division on a fixed assignment: every matched SU at δ̄_n.
pub fn solve_upper_function_set<U: UtilityTransfer + ?Sized>(
    utf: &U,
    assignment: &Assignment,
    cfg: &EquilibriumConfig,
) -> Result<Matching> {
    check_assignment(utf, assignment)?;
    let deltas = greatest_fixed_point(utf, assignment, cfg).ok_or(Error::NoSolution)?;
    settle(utf, assignment, deltas, cfg)
}

fn settle<U: UtilityTransfer + ?Sized>(
    utf: &U,
    assignment: &Assignment,
    deltas: Vec<f64>,
    cfg: &EquilibriumConfig,
) -> Result<Matching> {
    if !certify(utf, assignment, &deltas, cfg.tol).verdict {
        return Err(Error::NoSolution);
    }
    Ok(Matching::from_utilities(utf, assignment.clone(), deltas))
}

/// Largest market the exhaustive oracle accepts on either side.
pub const BRUTE_FORCE_LIMIT: usize = 4;

/// Exhaustive equilibrium oracle for markets with at most four users per side.
///
/// Every partial assignment is tried. Equilibria on a fixed assignment lie in
/// the box spanned by the least and greatest fixed points, so each box is
/// sampled on a grid and every verified sample is kept. Results are sorted by
/// assignment, then by utility vector.
pub fn brute_force_equilibria<U: UtilityTransfer + ?Sized>(
    utf: &U,
    cfg: &EquilibriumConfig,
) -> Result<Vec<Matching>> {
    let (pus, sus) = (utf.num_pus(), utf.num_sus());
    if pus > BRUTE_FORCE_LIMIT || sus > BRUTE_FORCE_LIMIT {
        return Err(Error::InstanceTooLarge { pus, sus });
    }
    let per_assignment: Vec<Vec<Vec<f64>>> = Assignment::enumerate(pus, sus)
        .par_iter()
        .map(|a| equilibria_on(utf, a, cfg))
        .collect();
    let mut out: Vec<Matching> = Assignment::enumerate(pus, sus)
        .into_iter()
        .zip(per_assignment)
        .flat_map(|(a, found)| {
            found
                .into_iter()
                .map(move |d| (a.clone(), d))
                .collect::<Vec<_>>()
        })
        .map(|(a, d)| Matching::from_utilities(utf, a, d))
        .collect();
    out.sort_by(|x, y| {
        x.assignment.cmp(&y.assignment).then_with(|| {
            x.su_utilities
                .iter()
                .zip(&y.su_utilities)
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    Ok(out)
}

fn equilibria_on<U: UtilityTransfer + ?Sized>(
    utf: &U,
    a: &Assignment,
    cfg: &EquilibriumConfig,
) -> Vec<Vec<f64>> {
    let tol = cfg.tol;
    let ok = |d: &[f64]| certify(utf, a, d, tol).verdict;
    let lo = least_fixed_point(utf, a, cfg);
    let hi = greatest_fixed_point(utf, a, cfg);
    let mut found: Vec<Vec<f64>> = Vec::new();
    for d in [&lo, &hi].into_iter().flatten() {
        if ok(d) {
            found.push(d.clone());
        }
    }
    let (Some(lo), Some(hi)) = (lo, hi) else {
        return dedupe(found);
    };
    let matched: Vec<usize> = (0..a.num_sus()).filter(|&n| a.pu_of(n).is_some()).collect();
    if matched.is_empty() || matched.iter().any(|&n| hi[n] < lo[n] - tol) {
        return dedupe(found);
    }
    let k = matched.len() as u32;
    let per_dim = ((cfg.oracle_budget as f64).powf(1.0 / k as f64).floor() as usize)
        .clamp(2, cfg.oracle_grid.max(2));
    let axes: Vec<Vec<f64>> = matched
        .iter()
        .map(|&n| {
            let (l, h) = (lo[n], hi[n].max(lo[n]));
            if h - l <= tol {
                vec![l]
            } else {
                (0..per_dim)
                    .map(|i| l + (h - l) * i as f64 / (per_dim - 1) as f64)
                    .collect()
            }
        })
        .collect();
    let mut idx = vec![0usize; axes.len()];
    'grid: loop {
        let mut d = vec![0.0; a.num_sus()];
        for (j, &n) in matched.iter().enumerate() {
            d[n] = axes[j][idx[j]];
        }
        if ok(&d) {
            found.push(d);
        }
        for j in 0..idx.len() {
            idx[j] += 1;
            if idx[j] < axes[j].len() {
                continue 'grid;
            }
            idx[j] = 0;
        }
        break;
    }
    dedupe(found)
}

fn dedupe(mut found: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    found.sort_by(|x, y| {
        x.iter()
            .zip(y)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    found.dedup_by(|x, y| max_change(x, y) < 1e-12);
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hand-built transfer functions: f(δ) = a − b·δ on δ ∈ [0, cap].
    struct Linear {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        cap: f64,
    }

    impl UtilityTransfer for Linear {
        fn num_pus(&self) -> usize {
            self.a.len()
        }
        fn num_sus(&self) -> usize {
            self.a[0].len()
        }
        fn forward(&self, m: usize, n: usize, d: f64) -> f64 {
            if d > self.cap {
                f64::NEG_INFINITY
            } else {
                self.a[m][n] - self.b[m][n] * d
            }
        }
        fn inverse(&self, m: usize, n: usize, pi: f64) -> Option<f64> {
            if pi > self.a[m][n] {
                return None;
            }
            Some(((self.a[m][n] - pi) / self.b[m][n]).min(self.cap))
        }
        fn exchange(&self, _: usize, _: usize, d: f64) -> Option<ResourceExchange> {
            Some(ResourceExchange::new(0.0, d))
        }
        fn su_ceiling(&self, _: usize, _: usize) -> f64 {
            self.cap
        }
        fn pu_ceiling(&self, m: usize, n: usize) -> f64 {
            self.a[m][n].max(0.0)
        }
    }

    fn linear(a: Vec<Vec<f64>>) -> Linear {
        let b = a.iter().map(|r| vec![1.0; r.len()]).collect();
        Linear { a, b, cap: 100.0 }
    }

    fn cfg() -> EquilibriumConfig {
        EquilibriumConfig::default()
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(Assignment::enumerate(1, 1).len(), 2);
        assert_eq!(Assignment::enumerate(2, 2).len(), 7);
        assert_eq!(Assignment::enumerate(3, 3).len(), 34);
        assert_eq!(Assignment::enumerate(4, 4).len(), 209);
        assert_eq!(Assignment::enumerate(2, 0).len(), 1);
    }

    #[test]
    fn from_pairs_rejects_conflicts() {
        assert!(Assignment::from_pairs(2, 2, &[(0, 0), (1, 0)]).is_err());
        assert!(Assignment::from_pairs(2, 2, &[(0, 2)]).is_err());
        let a = Assignment::from_pairs(2, 2, &[(1, 0)]).unwrap();
        assert_eq!(a.pu_of(0), Some(1));
        assert_eq!(a.su_of(0), None);
    }

    #[test]
    fn single_pair_bounds_collapse() {
        let u = linear(vec![vec![1.0]]);
        let a = Assignment::from_pairs(1, 1, &[(0, 0)]).unwrap();
        for d in [0.0, 0.5, 1.0] {
            let mt = Matching::from_utilities(&u, a.clone(), vec![d]);
            let cert = verify_equilibrium(&u, &mt, &cfg());
            assert!(cert.verdict, "{d}: {:?}", cert.violations);
            assert_eq!(
                cert.bounds[0],
                Some(SuBounds {
                    lower: 0.0,
                    upper: 1.0
                })
            );
        }
        let mt = Matching::from_utilities(&u, a, vec![1.1]);
        let cert = verify_equilibrium(&u, &mt, &cfg());
        assert_eq!(cert.violations.len(), 1);
        assert_eq!(
            cert.violations[0].condition,
            Condition::IndividualRationality
        );
        assert_eq!(cert.violations[0].actors, vec![Actor::Pu(0)]);
    }

    #[test]
    fn competing_pus_push_lower_bound_up() {
        let u = linear(vec![vec![1.0], vec![1.0]]);
        let mt = solve_function_set(
            &u,
            &Assignment::from_pairs(2, 1, &[(0, 0)]).unwrap(),
            &cfg(),
        )
        .unwrap();
        assert!((mt.su_utilities[0] - 1.0).abs() < 1e-6);
        assert!((lower_bound(&u, &mt, 0) - 1.0).abs() < 1e-6);
        let cheap = Matching::from_utilities(&u, mt.assignment.clone(), vec![0.5]);
        let cert = verify_equilibrium(&u, &cheap, &cfg());
        assert_eq!(
            cert.violations[0].condition,
            Condition::CompetitiveCompatibility
        );
        assert_eq!(cert.violations[0].actors, vec![Actor::Su(0), Actor::Pu(1)]);
    }

    #[test]
    fn competing_sus_push_upper_bound_down() {
        let u = linear(vec![vec![1.0, 1.0]]);
        let a = Assignment::from_pairs(1, 2, &[(0, 0)]).unwrap();
        let mt = Matching::from_utilities(&u, a.clone(), vec![0.0, 0.0]);
        assert!(upper_bound(&u, &mt, 0).abs() < 1e-12);
        let greedy = Matching::from_utilities(&u, a, vec![0.3, 0.0]);
        let cert = verify_equilibrium(&u, &greedy, &cfg());
        assert!(cert
            .violations
            .iter()
            .any(|v| v.condition == Condition::IncentiveCompatibility
                && v.actors == vec![Actor::Su(0), Actor::Pu(0), Actor::Su(1)]));
    }

    #[test]
    fn empty_matching_blocked_by_profitable_pair() {
        let u = linear(vec![vec![0.5]]);
        let cert = verify_equilibrium(&u, &Matching::unmatched(1, 1), &cfg());
        assert_eq!(cert.violations[0].condition, Condition::BlockingPair);
        let loss = linear(vec![vec![-0.5]]);
        assert!(verify_equilibrium(&loss, &Matching::unmatched(1, 1), &cfg()).verdict);
        let eq = brute_force_equilibria(&loss, &cfg()).unwrap();
        assert_eq!(eq.len(), 1);
        assert!(eq[0].assignment.is_empty());
    }

    #[test]
    fn two_by_two_extremes() {
        // PU 0 values SU 0 most, PU 1 is indifferent.
        let u = linear(vec![vec![3.0, 1.0], vec![2.0, 2.0]]);
        let a = Assignment::from_pairs(2, 2, &[(0, 0), (1, 1)]).unwrap();
        let low = solve_function_set(&u, &a, &cfg()).unwrap();
        let high = solve_upper_function_set(&u, &a, &cfg()).unwrap();
        // PU 1 gets 2 from SU 1 at δ_1 = 0, so it cannot outbid for SU 0: δ̲_0 = 0.
        assert!(low.su_utilities.iter().all(|d| d.abs() < 1e-6));
        // SU-optimal end: both PUs are left with nothing.
        assert!((high.su_utilities[1] - 2.0).abs() < 1e-6);
        assert!((high.su_utilities[0] - 3.0).abs() < 1e-6);
        let all = brute_force_equilibria(&u, &cfg()).unwrap();
        assert!(all.iter().all(|m| m.assignment == a));
        let merged = lattice_merge(&u, &all[0], all.last().unwrap()).unwrap();
        assert!(verify_equilibrium(&u, &merged, &cfg()).verdict);
        for eq in &all {
            for (x, y) in low.pu_utilities(&u).iter().zip(eq.pu_utilities(&u)) {
                assert!(*x >= y - 1e-6);
            }
        }
    }

    #[test]
    fn merge_rejects_different_assignments() {
        let u = linear(vec![vec![1.0, 1.0]]);
        let x = Matching::from_utilities(
            &u,
            Assignment::from_pairs(1, 2, &[(0, 0)]).unwrap(),
            vec![0.0, 0.0],
        );
        let y = Matching::from_utilities(
            &u,
            Assignment::from_pairs(1, 2, &[(0, 1)]).unwrap(),
            vec![0.0, 0.0],
        );
        assert_eq!(lattice_merge(&u, &x, &y), Err(Error::AssignmentMismatch));
        assert_eq!(lattice_merge(&u, &x, &x).unwrap(), x);
    }

    #[test]
    fn oracle_size_guard() {
        let u = linear(vec![vec![1.0; 5]]);
        assert_eq!(
            brute_force_equilibria(&u, &cfg()).unwrap_err(),
            Error::InstanceTooLarge { pus: 1, sus: 5 }
        );
    }
}
