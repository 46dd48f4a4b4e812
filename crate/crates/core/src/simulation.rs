//! Random topologies and experiment sweeps.
//!
//! Transceiver pairs are dropped uniformly in a square; every gain follows
//! the log-distance law `K − 10·α·log10(d)` (dB, d in meters, clamped at 1 m)
//! and PU direct links take an extra shadowing loss. PUs and SUs are drawn
//! from two independent streams of the same seed, so for a fixed seed the PU
//! layout does not depend on the number of SUs and vice versa.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{Gain, LinkGains, LogBase, NetworkInstance, Point, PuParams, SuParams};
use crate::error::{Error, Result};
use crate::mechanisms::{run_mechanism, MechanismConfig, MechanismKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyConfig {
    /// Side of the square deployment area, meters.
    pub area_side: f64,
    /// Nominal PT→PR distance, meters.
    pub pu_pair_distance: f64,
    /// Nominal ST→SR distance, meters.
    pub su_pair_distance: f64,
    /// Pair distances are scaled by a uniform factor in [1 − jitter, 1 + jitter].
    pub distance_jitter: f64,
    /// K: gain at the 1 m reference, dB.
    pub pathloss_constant_db: f64,
    /// α.
    pub pathloss_exponent: f64,
    pub pu_direct_extra_attenuation_db: f64,
    pub noise_dbm: f64,
    /// C_n for every SU.
    pub su_power_sensitivity: f64,
    /// T_m for every PU.
    pub pu_coop_time: f64,
    pub log_base: LogBase,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig {
            area_side: 1500.0,
            pu_pair_distance: 1000.0,
            su_pair_distance: 400.0,
            distance_jitter: 0.1,
            pathloss_constant_db: -50.0,
            pathloss_exponent: 2.0,
            pu_direct_extra_attenuation_db: -20.0,
            noise_dbm: -105.0,
            su_power_sensitivity: 1.0,
            pu_coop_time: 1.0,
            log_base: LogBase::Natural,
        }
    }
}

impl TopologyConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.area_side > 0.0 && self.area_side.is_finite()) {
            return bad("area_side must be positive");
        }
        if !(0.0..1.0).contains(&self.distance_jitter) {
            return bad("distance_jitter must lie in [0, 1)");
        }
        let reach = 1.0 + self.distance_jitter;
        for d in [self.pu_pair_distance, self.su_pair_distance] {
            if !(d > 0.0 && d * reach < self.area_side) {
                return bad("pair distances (with jitter) must be positive and below area_side");
            }
        }
        if !(self.pathloss_exponent >= 1.0 && self.pathloss_exponent.is_finite()) {
            return bad("pathloss_exponent must be at least 1");
        }
        if ![
            self.pathloss_constant_db,
            self.pu_direct_extra_attenuation_db,
            self.noise_dbm,
        ]
        .iter()
        .all(|x| x.is_finite())
        {
            return bad("dB parameters must be finite");
        }
        if !(self.su_power_sensitivity > 0.0 && self.pu_coop_time > 0.0) {
            return bad("su_power_sensitivity and pu_coop_time must be positive");
        }
        Ok(())
    }

    /// Gain in dB over distance `d` meters.
    pub fn gain_db(&self, d: f64) -> f64 {
        self.pathloss_constant_db - 10.0 * self.pathloss_exponent * d.max(1.0).log10()
    }
}

fn place_pair(rng: &mut ChaCha8Rng, cfg: &TopologyConfig, nominal: f64) -> (Point, Point) {
    let side = cfg.area_side;
    let inside = |p: &Point| (0.0..=side).contains(&p.x) && (0.0..=side).contains(&p.y);
    let tx = Point::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side));
    loop {
        let d = nominal * rng.gen_range(1.0 - cfg.distance_jitter..=1.0 + cfg.distance_jitter);
        let theta = rng.gen_range(0.0..std::f64::consts::TAU);
        let rx = Point::new(tx.x + d * theta.cos(), tx.y + d * theta.sin());
        if inside(&rx) {
            return (tx, rx);
        }
    }
}

/// Random market with `pus` PUs and `sus` SUs; deterministic in `seed`.
pub fn generate_topology(
    cfg: &TopologyConfig,
    pus: usize,
    sus: usize,
    seed: u64,
) -> Result<NetworkInstance> {
    cfg.validate()?;
    let mut pu_rng = ChaCha8Rng::seed_from_u64(seed);
    pu_rng.set_stream(0);
    let mut su_rng = ChaCha8Rng::seed_from_u64(seed);
    su_rng.set_stream(1);

    let pu_pos: Vec<(Point, Point)> = (0..pus)
        .map(|_| place_pair(&mut pu_rng, cfg, cfg.pu_pair_distance))
        .collect();
    let su_pos: Vec<(Point, Point)> = (0..sus)
        .map(|_| place_pair(&mut su_rng, cfg, cfg.su_pair_distance))
        .collect();

    let pu_params = pu_pos
        .iter()
        .enumerate()
        .map(|(m, (tx, rx))| PuParams {
            id: m,
            direct_gain: Gain::from_db(
                cfg.gain_db(tx.distance(rx)) + cfg.pu_direct_extra_attenuation_db,
            ),
            coop_time: cfg.pu_coop_time,
            tx: Some(*tx),
            rx: Some(*rx),
        })
        .collect();
    let su_params = su_pos
        .iter()
        .enumerate()
        .map(|(n, (tx, rx))| SuParams {
            id: n,
            power_sensitivity: cfg.su_power_sensitivity,
            band_gains: vec![Gain::from_db(cfg.gain_db(tx.distance(rx))); pus],
            tx: Some(*tx),
            rx: Some(*rx),
        })
        .collect();
    let links = pu_pos
        .iter()
        .flat_map(|(pt, pr)| {
            su_pos.iter().map(move |(st, _)| LinkGains {
                to_relay: Gain::from_db(cfg.gain_db(pt.distance(st))),
                to_receiver: Gain::from_db(cfg.gain_db(st.distance(pr))),
            })
        })
        .collect();
    NetworkInstance::new(
        pu_params,
        su_params,
        links,
        Gain::from_db(cfg.noise_dbm),
        cfg.log_base,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pus: Vec<usize>,
    pub sus: Vec<usize>,
    /// Number of seeds per cell.
    pub seeds: usize,
    /// Seeds run from `first_seed` to `first_seed + seeds − 1`.
    pub first_seed: u64,
    pub mechanisms: Vec<MechanismKind>,
    pub epsilon: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            pus: vec![2, 4],
            sus: (1..=8).collect(),
            seeds: 1000,
            first_seed: 1,
            mechanisms: vec![MechanismKind::GDac, MechanismKind::GRdac],
            epsilon: 0.01,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pus.is_empty() || self.sus.is_empty() || self.mechanisms.is_empty() {
            return Err(Error::InvalidConfig(
                "pus, sus and mechanisms must be nonempty".into(),
            ));
        }
        if self.seeds == 0 {
            return Err(Error::InvalidConfig("seeds must be at least 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig("epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// One mechanism run in a sweep. A failed run has NaN utilities and carries
/// the error text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub seed: u64,
    #[serde(rename = "M")]
    pub pus: usize,
    #[serde(rename = "N")]
    pub sus: usize,
    pub mechanism: MechanismKind,
    pub total_pu_utility: f64,
    pub total_su_utility: f64,
    pub matched_pairs: usize,
    pub rounds: usize,
    pub runtime_ms: f64,
    #[serde(skip)]
    pub error: Option<String>,
}

impl ExperimentRow {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

fn run_cell(
    topo: &TopologyConfig,
    mcfg: &MechanismConfig,
    exp: &ExperimentConfig,
    pus: usize,
    sus: usize,
    seed: u64,
) -> Vec<ExperimentRow> {
    let instance = generate_topology(topo, pus, sus, seed);
    exp.mechanisms
        .iter()
        .map(|&kind| {
            let start = Instant::now();
            let result = instance
                .as_ref()
                .map_err(Clone::clone)
                .and_then(|inst| run_mechanism(inst, kind, exp.epsilon, mcfg));
            let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            match result {
                Ok(trace) => ExperimentRow {
                    seed,
                    pus,
                    sus,
                    mechanism: kind,
                    total_pu_utility: trace.total_pu_utility(),
                    total_su_utility: trace.matching.total_su_utility(),
                    matched_pairs: trace.matching.assignment.len(),
                    rounds: trace.rounds,
                    runtime_ms,
                    error: None,
                },
                Err(e) => ExperimentRow {
                    seed,
                    pus,
                    sus,
                    mechanism: kind,
                    total_pu_utility: f64::NAN,
                    total_su_utility: f64::NAN,
                    matched_pairs: 0,
                    rounds: 0,
                    runtime_ms,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Runs every (M, N, seed, mechanism) combination. Rows are sorted by
/// (M, N, seed, mechanism) regardless of scheduling.
pub fn run_sweep(
    exp: &ExperimentConfig,
    topo: &TopologyConfig,
    mcfg: &MechanismConfig,
) -> Result<Vec<ExperimentRow>> {
    exp.validate()?;
    topo.validate()?;
    mcfg.solver.validate()?;
    mcfg.equilibrium.validate()?;
    let cells: Vec<(usize, usize, u64)> = exp
        .pus
        .iter()
        .flat_map(|&m| {
            exp.sus
                .iter()
                .flat_map(move |&n| (0..exp.seeds as u64).map(move |s| (m, n, exp.first_seed + s)))
        })
        .collect();
    let mut rows: Vec<ExperimentRow> = cells
        .par_iter()
        .flat_map_iter(|&(m, n, seed)| run_cell(topo, mcfg, exp, m, n, seed))
        .collect();
    rows.sort_by(|a, b| {
        (a.pus, a.sus, a.seed, a.mechanism).cmp(&(b.pus, b.sus, b.seed, b.mechanism))
    });
    Ok(rows)
}

/// Per-cell aggregate. `gap` is the relative shortfall of G-RDAC's mean total
/// PU utility against G-DAC's in the same cell (NaN if either is missing or
/// G-DAC's mean is not positive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    #[serde(rename = "M")]
    pub pus: usize,
    #[serde(rename = "N")]
    pub sus: usize,
    pub mechanism: MechanismKind,
    pub mean_pu: f64,
    pub stderr_pu: f64,
    pub mean_su: f64,
    pub stderr_su: f64,
    pub gap: f64,
}

fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Means and standard errors per (M, N, mechanism); failed rows are skipped.
pub fn summarize(rows: &[ExperimentRow]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    // (M, N, mechanism) -> (PU totals, SU totals)
    type Cells = BTreeMap<(usize, usize, MechanismKind), (Vec<f64>, Vec<f64>)>;
    let mut cells = Cells::new();
    for r in rows {
        let e = cells.entry((r.pus, r.sus, r.mechanism)).or_default();
        if !r.failed() {
            e.0.push(r.total_pu_utility);
            e.1.push(r.total_su_utility);
        }
    }
    let mut out: Vec<SummaryRow> = cells
        .iter()
        .map(|(&(m, n, kind), (pu, su))| {
            let (mean_pu, stderr_pu) = mean_stderr(pu);
            let (mean_su, stderr_su) = mean_stderr(su);
            SummaryRow {
                pus: m,
                sus: n,
                mechanism: kind,
                mean_pu,
                stderr_pu,
                mean_su,
                stderr_su,
                gap: f64::NAN,
            }
        })
        .collect();
    let mean_of = |m: usize, n: usize, kind: MechanismKind| {
        out.iter()
            .find(|r| r.pus == m && r.sus == n && r.mechanism == kind)
            .map(|r| r.mean_pu)
    };
    let gaps: Vec<f64> = out
        .iter()
        .map(|r| {
            match (
                mean_of(r.pus, r.sus, MechanismKind::GDac),
                mean_of(r.pus, r.sus, MechanismKind::GRdac),
            ) {
                (Some(opt), Some(robust)) if opt > 0.0 => (opt - robust) / opt,
                _ => f64::NAN,
            }
        })
        .collect();
    for (r, g) in out.iter_mut().zip(gaps) {
        r.gap = g;
    }
    Ok(out)
}
