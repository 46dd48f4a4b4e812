//! Physical-layer model of a PU/SU cooperation pair.
//!
//! A PU transmits with unit power in phase I, the SU amplifies and forwards
//! the received signal with relay power `p` in phase II, and in phase III the
//! SU transmits its own traffic for an access time `t` on the PU's band. All
//! gains and the noise power are stored as linear power ratios; [`Gain`] keeps
//! the decibel value alongside so instance files round-trip exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Logarithm used for every rate. Switching base rescales all utilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Natural,
    Base2,
}

impl LogBase {
    #[inline]
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Base2 => x.log2(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogBase::Natural => "natural",
            LogBase::Base2 => "base2",
        }
    }
}

impl std::str::FromStr for LogBase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" | "e" | "ln" => Ok(LogBase::Natural),
            "base2" | "2" | "log2" => Ok(LogBase::Base2),
            other => Err(Error::InvalidConfig(format!("unknown log base `{other}`"))),
        }
    }
}

/// A power ratio (or absolute power, for noise) in both linear and dB form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gain {
    linear: f64,
    db: f64,
}

impl Gain {
    pub fn from_db(db: f64) -> Self {
        Gain {
            linear: 10f64.powf(db / 10.0),
            db,
        }
    }

    pub fn from_linear(linear: f64) -> Self {
        Gain {
            linear,
            db: 10.0 * linear.log10(),
        }
    }

    #[inline]
    pub fn linear(&self) -> f64 {
        self.linear
    }

    #[inline]
    pub fn db(&self) -> f64 {
        self.db
    }

    fn is_valid(&self) -> bool {
        self.linear.is_finite() && self.linear > 0.0 && self.db.is_finite()
    }
}

/// A point in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PuParams {
    pub id: usize,
    /// G_m², direct PT→PR gain.
    pub direct_gain: Gain,
    /// T_m, length of the two cooperative phases together.
    pub coop_time: f64,
    pub tx: Option<Point>,
    pub rx: Option<Point>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuParams {
    pub id: usize,
    /// C_n, utility cost per unit of average transmit power.
    pub power_sensitivity: f64,
    /// G_{n(m)}², the SU's own ST→SR gain on each PU band.
    pub band_gains: Vec<Gain>,
    pub tx: Option<Point>,
    pub rx: Option<Point>,
}

/// Relay channel gains between one PU and one SU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    /// PT_m → ST_n.
    pub to_relay: Gain,
    /// ST_n → PR_m.
    pub to_receiver: Gain,
}

/// Relay power `p` contributed by the SU and access time `t` granted by the PU.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ResourceExchange {
    pub relay_power: f64,
    pub access_time: f64,
}

impl ResourceExchange {
    pub fn new(relay_power: f64, access_time: f64) -> Self {
        ResourceExchange {
            relay_power,
            access_time,
        }
    }
}

/// The market: PUs, SUs, the M×N relay link matrix and the noise power.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkInstance {
    pus: Vec<PuParams>,
    sus: Vec<SuParams>,
    /// Row-major, `links[m * N + n]`.
    links: Vec<LinkGains>,
    noise: Gain,
    log_base: LogBase,
}

impl NetworkInstance {
    pub fn new(
        pus: Vec<PuParams>,
        sus: Vec<SuParams>,
        links: Vec<LinkGains>,
        noise: Gain,
        log_base: LogBase,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidInstance(msg));
        let (m_count, n_count) = (pus.len(), sus.len());
        if links.len() != m_count * n_count {
            return invalid(format!(
                "link matrix has {} entries, expected {m_count} x {n_count}",
                links.len()
            ));
        }
        if !noise.is_valid() {
            return invalid("noise power must be positive and finite".into());
        }
        for (m, pu) in pus.iter().enumerate() {
            if !pu.direct_gain.is_valid() {
                return invalid(format!("PU {m}: direct gain must be positive"));
            }
            if !(pu.coop_time.is_finite() && pu.coop_time > 0.0) {
                return invalid(format!("PU {m}: cooperation time must be positive"));
            }
        }
        for (n, su) in sus.iter().enumerate() {
            if !(su.power_sensitivity.is_finite() && su.power_sensitivity > 0.0) {
                return invalid(format!("SU {n}: power sensitivity must be positive"));
            }
            if su.band_gains.len() != m_count {
                return invalid(format!(
                    "SU {n}: {} band gains for {m_count} PUs",
                    su.band_gains.len()
                ));
            }
            if su.band_gains.iter().any(|g| !g.is_valid()) {
                return invalid(format!("SU {n}: band gains must be positive"));
            }
        }
        for (i, link) in links.iter().enumerate() {
            if !link.to_relay.is_valid() || !link.to_receiver.is_valid() {
                return invalid(format!(
                    "link PU {} / SU {}: gains must be positive",
                    i / n_count.max(1),
                    i % n_count.max(1)
                ));
            }
        }
        Ok(NetworkInstance {
            pus,
            sus,
            links,
            noise,
            log_base,
        })
    }

    pub fn num_pus(&self) -> usize {
        self.pus.len()
    }

    pub fn num_sus(&self) -> usize {
        self.sus.len()
    }

    pub fn pus(&self) -> &[PuParams] {
        &self.pus
    }

    pub fn sus(&self) -> &[SuParams] {
        &self.sus
    }

    pub fn pu(&self, m: usize) -> &PuParams {
        &self.pus[m]
    }

    pub fn su(&self, n: usize) -> &SuParams {
        &self.sus[n]
    }

    pub fn link(&self, m: usize, n: usize) -> &LinkGains {
        &self.links[m * self.sus.len() + n]
    }

    pub fn noise(&self) -> Gain {
        self.noise
    }

    pub fn log_base(&self) -> LogBase {
        self.log_base
    }

    /// Precomputed closed-form model of the pair (PU `m`, SU `n`).
    pub fn pair(&self, m: usize, n: usize) -> PairModel {
        PairModel::new(
            self.pu(m),
            self.su(n),
            m,
            self.link(m, n),
            self.noise.linear(),
            self.log_base,
        )
    }
}

/// κ_d = G_m² / σ².
pub fn direct_snr(pu: &PuParams, noise_power: f64) -> f64 {
    pu.direct_gain.linear() / noise_power
}

/// κ_n for amplify-and-forward relaying with power `p`.
#[inline]
pub fn relay_snr(p: f64, link: &LinkGains, noise_power: f64) -> f64 {
    relay_snr_raw(
        p,
        link.to_relay.linear(),
        link.to_receiver.linear(),
        noise_power,
    )
}

#[inline]
fn relay_snr_raw(p: f64, g1: f64, g2: f64, noise_power: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    p * g1 * g2 / ((p * g2 + g1 + noise_power) * noise_power)
}

/// All rate and energy quantities of one exchange.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    pub snr_direct: f64,
    pub snr_relay: f64,
    /// Rate over the two cooperative phases.
    pub rate_coop: f64,
    /// `rate_coop` diluted over the whole frame `T + t`.
    pub rate_effective: f64,
    pub rate_direct: f64,
    /// SU rate on the PU's band during its access time.
    pub su_rate: f64,
    pub su_energy: f64,
    /// A = C·T / (2(T + t)).
    pub gs_constant: f64,
}

/// Everything needed to evaluate utilities of one PU/SU pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairModel {
    pub coop_time: f64,
    pub sensitivity: f64,
    pub snr_direct: f64,
    pub g_relay: f64,
    pub g_receiver: f64,
    pub noise_power: f64,
    /// R_{n(m)}.
    pub su_rate: f64,
    /// R_d^m.
    pub direct_rate: f64,
    pub log_base: LogBase,
}

impl PairModel {
    pub fn new(
        pu: &PuParams,
        su: &SuParams,
        band: usize,
        link: &LinkGains,
        noise_power: f64,
        log_base: LogBase,
    ) -> Self {
        let snr_direct = direct_snr(pu, noise_power);
        PairModel {
            coop_time: pu.coop_time,
            sensitivity: su.power_sensitivity,
            snr_direct,
            g_relay: link.to_relay.linear(),
            g_receiver: link.to_receiver.linear(),
            noise_power,
            su_rate: log_base.log(1.0 + su.band_gains[band].linear() / noise_power),
            direct_rate: log_base.log(1.0 + snr_direct),
            log_base,
        }
    }

    #[inline]
    pub fn relay_snr(&self, p: f64) -> f64 {
        relay_snr_raw(p, self.g_relay, self.g_receiver, self.noise_power)
    }

    /// Supremum of κ_n as p → ∞.
    pub fn relay_snr_limit(&self) -> f64 {
        self.g_relay / self.noise_power
    }

    /// Π: gain of the PU's effective rate over its direct rate. May be negative.
    #[inline]
    pub fn pu_utility(&self, exch: ResourceExchange) -> f64 {
        let t_coop = self.coop_time;
        let kappa_n = self.relay_snr(exch.relay_power);
        t_coop * self.log_base.log(1.0 + self.snr_direct + kappa_n)
            / (2.0 * (t_coop + exch.access_time))
            - self.direct_rate
    }

    /// Δ: SU rate share minus its power cost.
    #[inline]
    pub fn su_utility(&self, exch: ResourceExchange) -> f64 {
        let (p, t) = (exch.relay_power, exch.access_time);
        let c = self.sensitivity;
        let t_coop = self.coop_time;
        (t * (self.su_rate - c) - p * c * t_coop / 2.0) / (t_coop + t)
    }

    /// H = 2(R_{n(m)} − C_n) / (C_n T_m).
    pub fn su_type(&self) -> f64 {
        2.0 * (self.su_rate - self.sensitivity) / (self.sensitivity * self.coop_time)
    }

    /// A = C_n T_m / (2(T_m + t)).
    pub fn gs_constant(&self, access_time: f64) -> f64 {
        self.sensitivity * self.coop_time / (2.0 * (self.coop_time + access_time))
    }

    /// Δ written through the SU type: (t·H − p)·A.
    pub fn su_utility_by_type(&self, exch: ResourceExchange) -> f64 {
        (exch.access_time * self.su_type() - exch.relay_power) * self.gs_constant(exch.access_time)
    }

    pub fn derived_rates(&self, exch: ResourceExchange) -> DerivedRates {
        let t_coop = self.coop_time;
        let snr_relay = self.relay_snr(exch.relay_power);
        let rate_coop = 0.5 * self.log_base.log(1.0 + self.snr_direct + snr_relay);
        DerivedRates {
            snr_direct: self.snr_direct,
            snr_relay,
            rate_coop,
            rate_effective: t_coop / (t_coop + exch.access_time) * rate_coop,
            rate_direct: self.direct_rate,
            su_rate: self.su_rate,
            su_energy: t_coop / 2.0 * exch.relay_power + exch.access_time,
            gs_constant: self.gs_constant(exch.access_time),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pu(gain: f64, t: f64) -> PuParams {
        PuParams {
            id: 0,
            direct_gain: Gain::from_linear(gain),
            coop_time: t,
            tx: None,
            rx: None,
        }
    }

    fn su(c: f64, gains: &[f64]) -> SuParams {
        SuParams {
            id: 0,
            power_sensitivity: c,
            band_gains: gains.iter().map(|&g| Gain::from_linear(g)).collect(),
            tx: None,
            rx: None,
        }
    }

    fn link(g1: f64, g2: f64) -> LinkGains {
        LinkGains {
            to_relay: Gain::from_linear(g1),
            to_receiver: Gain::from_linear(g2),
        }
    }

    #[test]
    fn direct_snr_identity_and_dbm() {
        assert_eq!(direct_snr(&pu(0.25, 1.0), 0.25), 1.0);
        let p = PuParams {
            direct_gain: Gain::from_db(-110.0),
            ..pu(1.0, 1.0)
        };
        let kd = direct_snr(&p, Gain::from_db(-105.0).linear());
        assert!((kd - 10f64.powf(-0.5)).abs() < 1e-12);
        assert!((kd - 0.3162).abs() < 1e-4);
    }

    #[test]
    fn zero_gain_is_rejected() {
        let bad = NetworkInstance::new(
            vec![pu(0.0, 1.0)],
            vec![su(1.0, &[1.0])],
            vec![link(1.0, 1.0)],
            Gain::from_linear(1.0),
            LogBase::Natural,
        );
        assert!(matches!(bad, Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn relay_snr_examples() {
        assert_eq!(relay_snr(0.0, &link(4.0, 2.0), 1.0), 0.0);
        let s = 0.7;
        assert!((relay_snr(1.0, &link(s, s), s) - 1.0 / 3.0).abs() < 1e-12);
        assert!((relay_snr(3.0, &link(4.0, 2.0), 1.0) - 24.0 / 11.0).abs() < 1e-12);
    }

    fn pair_with_snrs(kd: f64, t_coop: f64, su_rate_nats: f64, c: f64) -> PairModel {
        PairModel {
            coop_time: t_coop,
            sensitivity: c,
            snr_direct: kd,
            g_relay: 4.0,
            g_receiver: 2.0,
            noise_power: 1.0,
            su_rate: su_rate_nats,
            direct_rate: (1.0 + kd).ln(),
            log_base: LogBase::Natural,
        }
    }

    #[test]
    fn pu_utility_break_even_and_value() {
        // κ_n = κ_d² + κ_d at t = 0 exactly offsets the half-rate penalty.
        // With g1 = 4, g2 = 2, σ² = 1: κ_n(p) = 8p / (2p + 5); κ_n = 2 at p = 5/2.
        let pair = pair_with_snrs(1.0, 1.0, 2.0, 1.0);
        let p = 2.5;
        assert!((pair.relay_snr(p) - 2.0).abs() < 1e-12);
        assert!(pair.pu_utility(ResourceExchange::new(p, 0.0)).abs() < 1e-12);
        // κ_n = 3 at p = 15/2.
        let p3 = 7.5;
        assert!((pair.relay_snr(p3) - 3.0).abs() < 1e-12);
        let expected = 0.5 * 5f64.ln() - 2f64.ln();
        assert!((pair.pu_utility(ResourceExchange::new(p3, 0.0)) - expected).abs() < 1e-12);
        assert!((expected - 0.1116).abs() < 1e-4);
    }

    #[test]
    fn su_utility_examples() {
        let pair = pair_with_snrs(1.0, 1.0, 2.0, 1.0);
        assert_eq!(pair.su_utility(ResourceExchange::new(0.0, 0.0)), 0.0);
        assert!((pair.su_utility(ResourceExchange::new(1.0, 1.0)) - 0.25).abs() < 1e-15);
        assert!((pair.su_type() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn su_type_zero_and_negative() {
        let pair = pair_with_snrs(1.0, 1.0, 1.0, 1.0);
        assert_eq!(pair.su_type(), 0.0);
        let loser = pair_with_snrs(1.0, 2.0, 0.5, 1.0);
        assert!(loser.su_type() < 0.0);
        for &(p, t) in &[(0.0, 0.0), (0.0, 3.0), (2.0, 0.5), (10.0, 10.0)] {
            assert!(loser.su_utility(ResourceExchange::new(p, t)) <= 0.0);
        }
    }

    #[test]
    fn base2_rescales_uniformly() {
        let mut pair = pair_with_snrs(1.0, 1.0, 2.0, 1.0);
        let exch = ResourceExchange::new(7.5, 0.0);
        let nats = pair.pu_utility(exch);
        pair.log_base = LogBase::Base2;
        pair.direct_rate = 2f64.log2();
        assert!((pair.pu_utility(exch) - nats / std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn derived_rates_are_consistent() {
        let pair = pair_with_snrs(0.5, 1.5, 1.7, 0.8);
        let exch = ResourceExchange::new(0.0, 2.0);
        let d = pair.derived_rates(exch);
        assert_eq!(d.snr_relay, 0.0);
        assert!((d.gs_constant - 0.8 * 1.5 / (2.0 * 3.5)).abs() < 1e-15);
        assert!((d.rate_effective - d.rate_direct - pair.pu_utility(exch)).abs() < 1e-12);
        assert!((d.su_energy - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gain_db_roundtrip() {
        let g = Gain::from_db(-102.5);
        assert_eq!(g.db(), -102.5);
        assert!((g.linear() - 10f64.powf(-10.25)).abs() < 1e-25);
    }
}
