//! Utility transfer functions.
//!
//! For a PU `m` and SU `n`, the UTF `f(δ)` is the best PU utility achievable
//! while leaving the SU at least utility `δ`. The SU constraint binds at the
//! optimum, so for each access time `t` the relay power is pinned to
//!
//! ```text
//! p(t) = t·H − 2δ(T + t) / (C·T)
//! ```
//!
//! and the problem becomes a one-dimensional search over `t`. The inverse
//! `g(π)` is recovered by a bracketing root search on the decreasing map
//! `δ ↦ f(δ)`.
//!
//! The guess-based variant replaces the binding SU constraint by `p = t·H̃`
//! for a guessed type `H̃`; sweeping `H̃` traces a second decreasing curve
//! ([`GsCurve`]) that plays the role of `f` when PUs do not know SU types.

use serde::{Deserialize, Serialize};

use crate::channel::{NetworkInstance, PairModel, ResourceExchange};
use crate::error::{Error, Result};

/// Numerical settings of the one-dimensional UTF search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Dense grid size over the feasible access-time interval.
    pub grid_points: usize,
    /// Golden-section steps around the best grid cell.
    pub refine_iters: usize,
    /// Absolute utility tolerance.
    pub tol: f64,
    /// Relay power cap, in units of the PU transmit power.
    pub p_max: f64,
    /// Access time cap as a multiple of the PU's cooperation time.
    pub t_max_factor: f64,
    /// Number of guessed types sampled per guess-based curve.
    pub gs_samples: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid_points: 512,
            refine_iters: 60,
            tol: 1e-9,
            p_max: 100.0,
            t_max_factor: 10.0,
            gs_samples: 256,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.grid_points < 8 {
            return bad("grid_points must be at least 8");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("tol must be positive");
        }
        if !(self.p_max > 0.0 && self.p_max.is_finite()) {
            return bad("p_max must be positive");
        }
        if !(self.t_max_factor > 0.0 && self.t_max_factor.is_finite()) {
            return bad("t_max_factor must be positive");
        }
        if self.gs_samples < 2 {
            return bad("gs_samples must be at least 2");
        }
        Ok(())
    }
}

/// Result of one UTF solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtfSolution {
    pub pu_utility: f64,
    pub exchange: Option<ResourceExchange>,
    pub feasible: bool,
}

impl UtfSolution {
    /// Sentinel for a pair that cannot cooperate at the requested utility.
    pub fn infeasible() -> Self {
        UtfSolution {
            pu_utility: f64::NEG_INFINITY,
            exchange: None,
            feasible: false,
        }
    }
}

/// Maximizes `obj` on `[lo, hi]` by a dense grid followed by golden-section
/// refinement around the best grid cell.
fn grid_golden_max(
    obj: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    grid_points: usize,
    refine_iters: usize,
    xtol: f64,
) -> (f64, f64) {
    if hi - lo <= f64::EPSILON * (1.0 + hi.abs()) {
        return (lo, obj(lo));
    }
    let step = (hi - lo) / (grid_points - 1) as f64;
    let mut best = (lo, obj(lo));
    let mut best_i = 0;
    for i in 1..grid_points {
        let t = if i == grid_points - 1 {
            hi
        } else {
            lo + step * i as f64
        };
        let v = obj(t);
        if v > best.1 {
            best = (t, v);
            best_i = i;
        }
    }

    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (obj(c), obj(d));
    for _ in 0..refine_iters {
        if b - a <= xtol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = obj(d);
        }
    }
    for (t, v) in [(c, fc), (d, fd)] {
        if v > best.1 {
            best = (t, v);
        }
    }
    best
}

/// Guess-based contract: the PU's best offer under `p = t·H̃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsSolution {
    pub guess: f64,
    pub pu_utility: f64,
    pub exchange: ResourceExchange,
}

/// UTF machinery for one PU/SU pair.
#[derive(Debug, Clone, Copy)]
pub struct PairSolver {
    pub pair: PairModel,
    pub pu: usize,
    pub su: usize,
    cfg: SolverConfig,
}

impl PairSolver {
    pub fn new(instance: &NetworkInstance, m: usize, n: usize, cfg: SolverConfig) -> Self {
        PairSolver {
            pair: instance.pair(m, n),
            pu: m,
            su: n,
            cfg,
        }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn t_max(&self) -> f64 {
        self.cfg.t_max_factor * self.pair.coop_time
    }

    /// Largest SU utility inside the caps: no relaying, maximal access time.
    pub fn su_ceiling(&self) -> f64 {
        let t = self.t_max();
        let v = t * (self.pair.su_rate - self.pair.sensitivity) / (self.pair.coop_time + t);
        v.max(0.0)
    }

    /// Largest PU utility inside the caps: full relay power, no access time.
    pub fn pu_ceiling(&self) -> f64 {
        self.pair
            .pu_utility(ResourceExchange::new(self.cfg.p_max, 0.0))
            .max(0.0)
    }

    fn pu_utility_along(&self, p: f64, t: f64) -> f64 {
        self.pair.pu_utility(ResourceExchange::new(p, t))
    }

    /// f(δ): maximize Π subject to Δ ≥ δ inside the caps.
    pub fn solve(&self, delta: f64) -> Result<UtfSolution> {
        if !delta.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "reservation utility must be finite, got {delta}"
            )));
        }
        let pair = &self.pair;
        let (c, t_coop) = (pair.sensitivity, pair.coop_time);
        let t_max = self.t_max();
        let p_max = self.cfg.p_max;
        let slope = pair.su_type() - 2.0 * delta / (c * t_coop);
        let offset = 2.0 * delta / c;
        let infeasible = || Error::InfeasibleReservation {
            pu: self.pu,
            su: self.su,
            delta,
        };

        let (t_lo, t_hi) = if slope > 0.0 {
            let mut t_lo = (offset / slope).max(0.0);
            if t_lo > t_max {
                if t_lo - t_max > 1e-12 * (1.0 + t_max) {
                    return Err(infeasible());
                }
                t_lo = t_max;
            }
            let t_hi = ((p_max + offset) / slope).min(t_max).max(t_lo);
            (t_lo, t_hi)
        } else if offset <= 0.0 {
            // p(t) ≤ 0 everywhere, only the no-relay point t = 0 satisfies p ≥ 0.
            (0.0, 0.0)
        } else {
            return Err(infeasible());
        };

        let power = |t: f64| (slope * t - offset).clamp(0.0, p_max);
        let (t_best, value) = grid_golden_max(
            |t| self.pu_utility_along(power(t), t),
            t_lo,
            t_hi,
            self.cfg.grid_points,
            self.cfg.refine_iters,
            self.cfg.tol * 1e-3,
        );
        Ok(UtfSolution {
            pu_utility: value,
            exchange: Some(ResourceExchange::new(power(t_best), t_best)),
            feasible: true,
        })
    }

    /// f(δ) with the infeasible sentinel folded to −∞.
    pub fn forward(&self, delta: f64) -> f64 {
        self.solve(delta)
            .map(|s| s.pu_utility)
            .unwrap_or(f64::NEG_INFINITY)
    }

    /// g(π): the SU utility δ with f(δ) = π.
    ///
    /// Targets below the PU utility reachable at the SU ceiling clamp to the
    /// ceiling; targets above f(0) are unreachable.
    pub fn inverse(&self, pi: f64) -> Result<f64> {
        let f0 = self.forward(0.0);
        let tol = self.cfg.tol;
        if pi > f0 + tol || pi.is_nan() {
            return Err(Error::TargetUnreachable {
                pu: self.pu,
                su: self.su,
                target: pi,
                ceiling: f0,
            });
        }
        if pi >= f0 {
            return Ok(0.0);
        }
        let d_sup = self.su_ceiling();
        if d_sup <= 0.0 {
            return Ok(0.0);
        }
        let f_sup = self.pu_utility_along(0.0, self.t_max());
        if pi <= f_sup {
            return Ok(d_sup);
        }

        // Bracketing false position (Illinois) on h(δ) = f(δ) − π, which is
        // decreasing: h(lo) ≥ 0 > h(hi) holds throughout.
        let h = |d: f64| self.forward(d) - pi;
        let (mut lo, mut h_lo) = (0.0, f0 - pi);
        let (mut hi, mut h_hi) = (d_sup, f_sup - pi);
        let ftol = tol * 1e-2;
        let xtol = 1e-14 * (1.0 + d_sup);
        let mut side = 0i8;
        for _ in 0..200 {
            if hi - lo <= xtol {
                break;
            }
            let mut x = (lo * h_hi - hi * h_lo) / (h_hi - h_lo);
            if !(x > lo && x < hi) {
                x = 0.5 * (lo + hi);
            }
            let hx = h(x);
            if hx.abs() <= ftol {
                return Ok(x);
            }
            if hx > 0.0 {
                lo = x;
                h_lo = hx;
                if side == 1 {
                    h_hi *= 0.5;
                }
                side = 1;
            } else {
                hi = x;
                h_hi = hx;
                if side == -1 {
                    h_lo *= 0.5;
                }
                side = -1;
            }
        }
        Ok(if h_lo.abs() <= h_hi.abs() { lo } else { hi })
    }

    /// Guess-based offer: maximize Π with `p = t·H̃`.
    pub fn guess_offer(&self, guess: f64) -> GsSolution {
        let p_max = self.cfg.p_max;
        let t_hi = if guess > 0.0 {
            self.t_max().min(p_max / guess)
        } else {
            0.0
        };
        let power = |t: f64| (t * guess).clamp(0.0, p_max);
        let (t, value) = grid_golden_max(
            |t| self.pu_utility_along(power(t), t),
            0.0,
            t_hi,
            self.cfg.grid_points,
            self.cfg.refine_iters,
            self.cfg.tol * 1e-3,
        );
        GsSolution {
            guess,
            pu_utility: value,
            exchange: ResourceExchange::new(power(t), t),
        }
    }

    /// SU utility of a guess-based contract written through the type gap:
    /// (C·T/2) · t/(T + t) · (H − H̃).
    pub fn guess_su_utility(&self, offer: &GsSolution) -> f64 {
        let t = offer.exchange.access_time;
        let pair = &self.pair;
        pair.sensitivity * pair.coop_time / 2.0 * t / (pair.coop_time + t)
            * (pair.su_type() - offer.guess)
    }

    /// Samples the guess-based curve between the true type and zero.
    pub fn guess_curve(&self) -> Result<GsCurve> {
        let h = self.pair.su_type();
        let degenerate = Error::DegenerateCurve {
            pu: self.pu,
            su: self.su,
        };
        if h <= 0.0 {
            return Err(degenerate);
        }
        let samples = self.cfg.gs_samples;
        let mut raw = Vec::with_capacity(samples);
        for i in 0..samples {
            let guess = h * (1.0 - i as f64 / (samples - 1) as f64);
            let offer = self.guess_offer(guess);
            raw.push(GsPoint {
                guess,
                su_utility: self.guess_su_utility(&offer).max(0.0),
                pu_utility: offer.pu_utility,
            });
        }
        // Keep the strictly decreasing frontier, walking from H̃ = H downwards.
        let mut points: Vec<GsPoint> = Vec::with_capacity(samples);
        for pt in &raw {
            match points.last() {
                None => points.push(*pt),
                Some(last)
                    if pt.su_utility > last.su_utility && pt.pu_utility < last.pu_utility =>
                {
                    points.push(*pt)
                }
                _ => {}
            }
        }
        if points.len() < 2 {
            return Err(degenerate);
        }
        Ok(GsCurve { points, raw })
    }
}

/// f(δ) for PU `m` and SU `n`.
pub fn solve_utf(
    instance: &NetworkInstance,
    m: usize,
    n: usize,
    delta: f64,
    cfg: &SolverConfig,
) -> Result<UtfSolution> {
    if delta < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "reservation utility must be nonnegative, got {delta}"
        )));
    }
    PairSolver::new(instance, m, n, *cfg).solve(delta)
}

/// g(π) for PU `m` and SU `n`.
pub fn inverse_utf(
    instance: &NetworkInstance,
    m: usize,
    n: usize,
    pi: f64,
    cfg: &SolverConfig,
) -> Result<f64> {
    PairSolver::new(instance, m, n, *cfg).inverse(pi)
}

/// Guess-based contract for a guessed type.
pub fn gs_utf(
    instance: &NetworkInstance,
    m: usize,
    n: usize,
    guess: f64,
    cfg: &SolverConfig,
) -> GsSolution {
    PairSolver::new(instance, m, n, *cfg).guess_offer(guess)
}

/// Sampled guess-based transfer curve f̃ with its inverse g̃.
pub fn gs_utf_curve(
    instance: &NetworkInstance,
    m: usize,
    n: usize,
    cfg: &SolverConfig,
) -> Result<GsCurve> {
    PairSolver::new(instance, m, n, *cfg).guess_curve()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsPoint {
    pub guess: f64,
    pub su_utility: f64,
    pub pu_utility: f64,
}

/// Piecewise-linear guess-based transfer curve, strictly decreasing.
///
/// Points are ordered by SU utility ascending; the first point is the
/// contract for the true type (SU utility zero).
#[derive(Debug, Clone, PartialEq)]
pub struct GsCurve {
    points: Vec<GsPoint>,
    raw: Vec<GsPoint>,
}

impl GsCurve {
    /// A pair that can only sit at a single contract.
    fn single(point: GsPoint) -> Self {
        GsCurve {
            points: vec![point],
            raw: vec![point],
        }
    }

    pub fn points(&self) -> &[GsPoint] {
        &self.points
    }

    /// All sampled contracts, including those dropped from the frontier.
    pub fn raw_samples(&self) -> &[GsPoint] {
        &self.raw
    }

    fn segment(&self, x: f64, key: impl Fn(&GsPoint) -> f64) -> usize {
        // index i such that key(points[i]) <= x <= key(points[i + 1]) for
        // ascending keys; callers guarantee x is inside the range.
        let idx = self.points.partition_point(|p| key(p) <= x);
        idx.clamp(1, self.points.len() - 1) - 1
    }

    /// f̃(δ); −∞ outside the sampled range.
    pub fn forward(&self, delta: f64) -> f64 {
        let first = self.points[0];
        let last = *self.points.last().unwrap();
        if delta < first.su_utility - 1e-12 || delta > last.su_utility + 1e-12 {
            return f64::NEG_INFINITY;
        }
        if self.points.len() == 1 {
            return first.pu_utility;
        }
        let delta = delta.clamp(first.su_utility, last.su_utility);
        let i = self.segment(delta, |p| p.su_utility);
        let (a, b) = (self.points[i], self.points[i + 1]);
        let w = (delta - a.su_utility) / (b.su_utility - a.su_utility);
        a.pu_utility + w * (b.pu_utility - a.pu_utility)
    }

    /// g̃(π); `None` above f̃(0), clamped to the last sample below the range.
    pub fn inverse(&self, pi: f64) -> Option<f64> {
        let first = self.points[0];
        let last = *self.points.last().unwrap();
        if pi.is_nan() || pi > first.pu_utility + 1e-12 {
            return None;
        }
        if pi >= first.pu_utility {
            return Some(first.su_utility);
        }
        if pi <= last.pu_utility {
            return Some(last.su_utility);
        }
        // pu_utility is descending; search on its negation.
        let i = self.segment(-pi, |p| -p.pu_utility);
        let (a, b) = (self.points[i], self.points[i + 1]);
        let w = (pi - a.pu_utility) / (b.pu_utility - a.pu_utility);
        Some(a.su_utility + w * (b.su_utility - a.su_utility))
    }

    /// Guessed type whose contract delivers SU utility `delta` on the curve.
    pub fn guess_at(&self, delta: f64) -> Option<f64> {
        let first = self.points[0];
        let last = *self.points.last().unwrap();
        if delta < first.su_utility - 1e-12 || delta > last.su_utility + 1e-12 {
            return None;
        }
        if self.points.len() == 1 {
            return Some(first.guess);
        }
        let delta = delta.clamp(first.su_utility, last.su_utility);
        let i = self.segment(delta, |p| p.su_utility);
        let (a, b) = (self.points[i], self.points[i + 1]);
        let w = (delta - a.su_utility) / (b.su_utility - a.su_utility);
        Some(a.guess + w * (b.guess - a.guess))
    }
}

/// A family of transfer functions f_n^m / g_n^m over a whole market.
///
/// Equilibrium checks and auction mechanisms are written against this trait
/// so they run unchanged on exact UTFs and on guess-based curves.
pub trait UtilityTransfer: Sync {
    fn num_pus(&self) -> usize;
    fn num_sus(&self) -> usize;
    /// f_n^m(δ); −∞ when the pair cannot deliver `delta`.
    fn forward(&self, m: usize, n: usize, delta: f64) -> f64;
    /// g_n^m(π); `None` when `pi` is above f_n^m(0).
    fn inverse(&self, m: usize, n: usize, pi: f64) -> Option<f64>;
    /// Contract realizing SU utility `delta`.
    fn exchange(&self, m: usize, n: usize, delta: f64) -> Option<ResourceExchange>;
    /// Upper bound on any SU utility the pair can deliver.
    fn su_ceiling(&self, m: usize, n: usize) -> f64;
    /// Upper bound on f_n^m(0).
    fn pu_ceiling(&self, m: usize, n: usize) -> f64;
}

/// Exact UTFs of a network instance.
#[derive(Debug, Clone)]
pub struct ExactUtf {
    solvers: Vec<PairSolver>,
    pus: usize,
    sus: usize,
}

impl ExactUtf {
    pub fn new(instance: &NetworkInstance, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let (pus, sus) = (instance.num_pus(), instance.num_sus());
        let solvers = (0..pus)
            .flat_map(|m| (0..sus).map(move |n| PairSolver::new(instance, m, n, *cfg)))
            .collect();
        Ok(ExactUtf { solvers, pus, sus })
    }

    pub fn pair(&self, m: usize, n: usize) -> &PairSolver {
        &self.solvers[m * self.sus + n]
    }
}

impl UtilityTransfer for ExactUtf {
    fn num_pus(&self) -> usize {
        self.pus
    }

    fn num_sus(&self) -> usize {
        self.sus
    }

    fn forward(&self, m: usize, n: usize, delta: f64) -> f64 {
        self.pair(m, n).forward(delta)
    }

    fn inverse(&self, m: usize, n: usize, pi: f64) -> Option<f64> {
        self.pair(m, n).inverse(pi).ok()
    }

    fn exchange(&self, m: usize, n: usize, delta: f64) -> Option<ResourceExchange> {
        self.pair(m, n).solve(delta).ok().and_then(|s| s.exchange)
    }

    fn su_ceiling(&self, m: usize, n: usize) -> f64 {
        self.pair(m, n).su_ceiling()
    }

    fn pu_ceiling(&self, m: usize, n: usize) -> f64 {
        self.pair(m, n).pu_ceiling()
    }
}

/// Guess-based transfer curves of a network instance.
///
/// Pairs whose SU type is nonpositive (or whose curve degenerates) collapse to
/// the single no-relay contract, which never gives the PU a positive utility.
#[derive(Debug, Clone)]
pub struct GuessUtf {
    curves: Vec<GsCurve>,
    solvers: Vec<PairSolver>,
    pus: usize,
    sus: usize,
}

impl GuessUtf {
    pub fn new(instance: &NetworkInstance, cfg: &SolverConfig) -> Result<Self> {
        let exact = ExactUtf::new(instance, cfg)?;
        let curves = exact
            .solvers
            .iter()
            .map(|s| {
                s.guess_curve().unwrap_or_else(|_| {
                    let offer = s.guess_offer(0.0);
                    GsCurve::single(GsPoint {
                        guess: 0.0,
                        su_utility: 0.0,
                        pu_utility: offer.pu_utility,
                    })
                })
            })
            .collect();
        Ok(GuessUtf {
            curves,
            solvers: exact.solvers,
            pus: exact.pus,
            sus: exact.sus,
        })
    }

    pub fn curve(&self, m: usize, n: usize) -> &GsCurve {
        &self.curves[m * self.sus + n]
    }

    pub fn pair(&self, m: usize, n: usize) -> &PairSolver {
        &self.solvers[m * self.sus + n]
    }

    /// Guess-based contract on the curve at SU utility `delta`.
    pub fn offer(&self, m: usize, n: usize, delta: f64) -> Option<GsSolution> {
        let guess = self.curve(m, n).guess_at(delta)?;
        Some(self.pair(m, n).guess_offer(guess))
    }
}

impl UtilityTransfer for GuessUtf {
    fn num_pus(&self) -> usize {
        self.pus
    }

    fn num_sus(&self) -> usize {
        self.sus
    }

    fn forward(&self, m: usize, n: usize, delta: f64) -> f64 {
        self.curve(m, n).forward(delta)
    }

    fn inverse(&self, m: usize, n: usize, pi: f64) -> Option<f64> {
        self.curve(m, n).inverse(pi)
    }

    fn exchange(&self, m: usize, n: usize, delta: f64) -> Option<ResourceExchange> {
        self.offer(m, n, delta).map(|o| o.exchange)
    }

    fn su_ceiling(&self, m: usize, n: usize) -> f64 {
        self.curve(m, n).points().last().unwrap().su_utility
    }

    fn pu_ceiling(&self, m: usize, n: usize) -> f64 {
        self.curve(m, n).points()[0].pu_utility.max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{Gain, LinkGains, LogBase, PuParams, SuParams};
    use proptest::prelude::*;

    fn instance(kd: f64, g1: f64, g2: f64, band: f64, c: f64, t_coop: f64) -> NetworkInstance {
        NetworkInstance::new(
            vec![PuParams {
                id: 0,
                direct_gain: Gain::from_linear(kd),
                coop_time: t_coop,
                tx: None,
                rx: None,
            }],
            vec![SuParams {
                id: 0,
                power_sensitivity: c,
                band_gains: vec![Gain::from_linear(band)],
                tx: None,
                rx: None,
            }],
            vec![LinkGains {
                to_relay: Gain::from_linear(g1),
                to_receiver: Gain::from_linear(g2),
            }],
            Gain::from_linear(1.0),
            LogBase::Natural,
        )
        .unwrap()
    }

    fn fixture() -> PairSolver {
        PairSolver::new(
            &instance(0.5, 8.0, 6.0, 6.0, 1.0, 1.0),
            0,
            0,
            SolverConfig::default(),
        )
    }

    /// Independent transcription of the PU utility for the grid oracle.
    fn oracle_pi(inst: &NetworkInstance, p: f64, t: f64) -> f64 {
        let s2 = inst.noise().linear();
        let kd = inst.pu(0).direct_gain.linear() / s2;
        let (g1, g2) = (
            inst.link(0, 0).to_relay.linear(),
            inst.link(0, 0).to_receiver.linear(),
        );
        let kn = p * g1 * g2 / ((p * g2 + g1 + s2) * s2);
        let tm = inst.pu(0).coop_time;
        tm / (tm + t) * 0.5 * (1.0 + kd + kn).ln() - (1.0 + kd).ln()
    }

    fn oracle_delta(inst: &NetworkInstance, p: f64, t: f64) -> f64 {
        let su = inst.su(0);
        let r = (1.0 + su.band_gains[0].linear() / inst.noise().linear()).ln();
        let tm = inst.pu(0).coop_time;
        let c = su.power_sensitivity;
        (t * r - c * (tm / 2.0 * p + t)) / (tm + t)
    }

    #[test]
    fn zero_reservation_matches_grid_oracle() {
        let inst = instance(0.5, 8.0, 6.0, 6.0, 1.0, 1.0);
        let cfg = SolverConfig::default();
        let t_max = cfg.t_max_factor * inst.pu(0).coop_time;
        let got = solve_utf(&inst, 0, 0, 0.0, &cfg).unwrap().pu_utility;
        let k = 2000;
        let mut best = f64::NEG_INFINITY;
        for i in 0..k {
            let p = cfg.p_max * i as f64 / (k - 1) as f64;
            for j in 0..k {
                let t = t_max * j as f64 / (k - 1) as f64;
                if oracle_delta(&inst, p, t) >= 0.0 {
                    best = best.max(oracle_pi(&inst, p, t));
                }
            }
        }
        assert!(got >= best - 1e-9, "solver {got} below grid {best}");
        assert!((got - best).abs() < 1e-3, "solver {got} vs grid {best}");
    }

    #[test]
    fn inverse_at_zero_matches_grid_oracle() {
        let inst = instance(0.5, 8.0, 6.0, 6.0, 1.0, 1.0);
        let cfg = SolverConfig::default();
        let t_max = cfg.t_max_factor * inst.pu(0).coop_time;
        let got = inverse_utf(&inst, 0, 0, 0.0, &cfg).unwrap();
        let k = 2000;
        let mut best = f64::NEG_INFINITY;
        for i in 0..k {
            let p = cfg.p_max * i as f64 / (k - 1) as f64;
            for j in 0..k {
                let t = t_max * j as f64 / (k - 1) as f64;
                if oracle_pi(&inst, p, t) >= 0.0 {
                    best = best.max(oracle_delta(&inst, p, t));
                }
            }
        }
        assert!((got - best).abs() < 1e-3, "inverse {got} vs grid {best}");
    }

    #[test]
    fn boundary_values() {
        let s = fixture();
        let g0 = s.inverse(0.0).unwrap();
        assert!(g0 > 0.0);
        assert!(s.forward(g0).abs() < 1e-9);
        let f0 = s.forward(0.0);
        assert!(s.inverse(f0).unwrap().abs() < 1e-9);
        assert!(matches!(
            s.inverse(f0 + 1e-3),
            Err(Error::TargetUnreachable { .. })
        ));
        assert!(s.forward(0.0) > s.forward(0.1));
    }

    #[test]
    fn infeasible_above_ceiling() {
        let s = fixture();
        let sup = s.su_ceiling();
        assert!(s.solve(sup).is_ok());
        assert!(matches!(
            s.solve(sup * 1.01),
            Err(Error::InfeasibleReservation { .. })
        ));
        assert!(solve_utf(
            &instance(0.5, 8.0, 6.0, 6.0, 1.0, 1.0),
            0,
            0,
            -1.0,
            s.config()
        )
        .is_err());
    }

    #[test]
    fn negative_type_only_admits_zero() {
        // R = ln 1.5 < C = 1.
        let s = PairSolver::new(
            &instance(0.5, 8.0, 6.0, 0.5, 1.0, 1.0),
            0,
            0,
            SolverConfig::default(),
        );
        assert!(s.pair.su_type() < 0.0);
        let sol = s.solve(0.0).unwrap();
        assert_eq!(sol.exchange, Some(ResourceExchange::new(0.0, 0.0)));
        assert_eq!(sol.pu_utility, 0.5 * 1.5f64.ln() - 1.5f64.ln());
        assert!(s.solve(1e-9).is_err());
        assert_eq!(s.su_ceiling(), 0.0);
        assert_eq!(s.inverse(-1.0).unwrap(), 0.0);
    }

    #[test]
    fn guess_signs() {
        let s = fixture();
        let h = s.pair.su_type();
        let exact = s.guess_offer(h);
        assert!(s.pair.su_utility(exact.exchange).abs() < 1e-8);
        let low = s.guess_offer(0.5 * h);
        assert!(s.pair.su_utility(low.exchange) > 0.0);
        let high = s.guess_offer(1.5 * h);
        assert!(s.pair.su_utility(high.exchange) < 0.0);
        let zero = s.guess_offer(-1.0);
        assert_eq!(zero.exchange, ResourceExchange::new(0.0, 0.0));
    }

    #[test]
    fn guess_utility_nondecreasing_in_guess() {
        let s = fixture();
        let h = s.pair.su_type();
        let vals: Vec<f64> = (0..100)
            .map(|i| s.guess_offer(h * i as f64 / 99.0).pu_utility)
            .collect();
        for w in vals.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn guess_curve_shape() {
        let s = fixture();
        let curve = s.guess_curve().unwrap();
        let pts = curve.points();
        assert!(pts.len() >= 2);
        assert_eq!(pts[0].guess, s.pair.su_type());
        assert!(pts[0].su_utility.abs() < 1e-8);
        assert!((pts[0].pu_utility - s.forward(0.0)).abs() < 1e-8);
        for w in pts.windows(2) {
            assert!(w[1].su_utility > w[0].su_utility);
            assert!(w[1].pu_utility < w[0].pu_utility);
        }
        for p in pts {
            let back = curve.inverse(curve.forward(p.su_utility)).unwrap();
            assert!((back - p.su_utility).abs() < 1e-9);
        }
        // A guess-based contract never beats the exact transfer function.
        for p in pts {
            assert!(p.pu_utility <= s.forward(p.su_utility) + 1e-7);
        }
    }

    #[test]
    fn degenerate_curve_for_negative_type() {
        let inst = instance(0.5, 8.0, 6.0, 0.5, 1.0, 1.0);
        let cfg = SolverConfig::default();
        assert!(matches!(
            gs_utf_curve(&inst, 0, 0, &cfg),
            Err(Error::DegenerateCurve { .. })
        ));
        let guess = GuessUtf::new(&inst, &cfg).unwrap();
        assert_eq!(guess.curve(0, 0).points().len(), 1);
        assert_eq!(guess.inverse(0, 0, -10.0), Some(0.0));
        assert_eq!(guess.forward(0, 0, 0.1), f64::NEG_INFINITY);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.grid_points = 4;
        assert!(cfg.validate().is_err());
        cfg = SolverConfig {
            tol: 0.0,
            ..SolverConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    fn arb_pair() -> impl Strategy<Value = PairSolver> {
        (
            -25.0f64..5.0,
            -5.0f64..15.0,
            -5.0f64..15.0,
            -3.0f64..15.0,
            0.3f64..2.0,
            0.5f64..2.0,
        )
            .prop_map(|(kd, g1, g2, band, c, t)| {
                let lin = |db: f64| 10f64.powf(db / 10.0);
                PairSolver::new(
                    &instance(lin(kd), lin(g1), lin(g2), lin(band), c, t),
                    0,
                    0,
                    SolverConfig::default(),
                )
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn tight_and_monotone(s in arb_pair(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let sup = s.su_ceiling();
            let (lo, hi) = (a.min(b) * sup, a.max(b) * sup);
            for d in [lo, hi] {
                let sol = s.solve(d).unwrap();
                let exch = sol.exchange.unwrap();
                prop_assert!((s.pair.su_utility(exch) - d).abs() <= 1e-8);
                prop_assert!((s.pair.pu_utility(exch) - sol.pu_utility).abs() <= 1e-12);
            }
            if hi - lo >= 1e-5 {
                prop_assert!(s.forward(lo) > s.forward(hi));
            }
        }

        #[test]
        fn inverse_roundtrip(s in arb_pair(), a in 0.0f64..1.0) {
            let d = a * s.su_ceiling();
            let back = s.inverse(s.forward(d)).unwrap();
            prop_assert!((back - d).abs() <= 1e-6, "δ {} back {}", d, back);
        }
    }
}
