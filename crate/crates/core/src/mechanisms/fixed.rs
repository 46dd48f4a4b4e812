//! Deferred acceptance on fixed preference lists.
//!
//! When every PU posts a fixed access time and every SU a fixed relay power,
//! utilities no longer depend on bargaining and the market reduces to
//! classical stable marriage with strict ordered lists.

use crate::channel::{NetworkInstance, ResourceExchange};
use crate::equilibrium::Assignment;
use crate::error::{Error, Result};

/// Strict preference lists, most preferred first. A partner missing from a
/// list is unacceptable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceLists {
    pu_prefs: Vec<Vec<usize>>,
    su_prefs: Vec<Vec<usize>>,
}

fn check_list(list: &[usize], bound: usize, owner: &str) -> Result<()> {
    let mut seen = vec![false; bound];
    for &x in list {
        if x >= bound || seen[x] {
            return Err(Error::InvalidConfig(format!(
                "{owner}: entry {x} out of range or repeated"
            )));
        }
        seen[x] = true;
    }
    Ok(())
}

impl PreferenceLists {
    pub fn new(pu_prefs: Vec<Vec<usize>>, su_prefs: Vec<Vec<usize>>) -> Result<Self> {
        let (pus, sus) = (pu_prefs.len(), su_prefs.len());
        for (m, l) in pu_prefs.iter().enumerate() {
            check_list(l, sus, &format!("P({m})"))?;
        }
        for (n, l) in su_prefs.iter().enumerate() {
            check_list(l, pus, &format!("Q({n})"))?;
        }
        Ok(PreferenceLists { pu_prefs, su_prefs })
    }

    /// Lists induced by fixed offers: PU `m` grants access time
    /// `access_times[m]` to whoever it serves and SU `n` relays with
    /// `relay_powers[n]`. Only partners with nonnegative utility are listed,
    /// best first; equal utilities keep index order.
    pub fn from_fixed_exchanges(
        instance: &NetworkInstance,
        access_times: &[f64],
        relay_powers: &[f64],
    ) -> Result<Self> {
        let (pus, sus) = (instance.num_pus(), instance.num_sus());
        if access_times.len() != pus || relay_powers.len() != sus {
            return Err(Error::InvalidConfig(
                "one access time per PU and one relay power per SU required".into(),
            ));
        }
        let exch = |m: usize, n: usize| ResourceExchange::new(relay_powers[n], access_times[m]);
        let ranked = |mut scored: Vec<(usize, f64)>| {
            scored.retain(|&(_, v)| v >= 0.0);
            scored.sort_by(|a, b| b.1.total_cmp(&a.1));
            scored.into_iter().map(|(i, _)| i).collect::<Vec<_>>()
        };
        let pu_prefs = (0..pus)
            .map(|m| {
                ranked(
                    (0..sus)
                        .map(|n| (n, instance.pair(m, n).pu_utility(exch(m, n))))
                        .collect(),
                )
            })
            .collect();
        let su_prefs = (0..sus)
            .map(|n| {
                ranked(
                    (0..pus)
                        .map(|m| (m, instance.pair(m, n).su_utility(exch(m, n))))
                        .collect(),
                )
            })
            .collect();
        Ok(PreferenceLists { pu_prefs, su_prefs })
    }

    pub fn num_pus(&self) -> usize {
        self.pu_prefs.len()
    }

    pub fn num_sus(&self) -> usize {
        self.su_prefs.len()
    }

    pub fn pu_list(&self, m: usize) -> &[usize] {
        &self.pu_prefs[m]
    }

    pub fn su_list(&self, n: usize) -> &[usize] {
        &self.su_prefs[n]
    }

    /// Position of `n` in P(m); `None` if unacceptable.
    pub fn pu_rank(&self, m: usize, n: usize) -> Option<usize> {
        self.pu_prefs[m].iter().position(|&x| x == n)
    }

    /// Position of `m` in Q(n); `None` if unacceptable.
    pub fn su_rank(&self, n: usize, m: usize) -> Option<usize> {
        self.su_prefs[n].iter().position(|&x| x == m)
    }

    fn swapped(&self) -> PreferenceLists {
        PreferenceLists {
            pu_prefs: self.su_prefs.clone(),
            su_prefs: self.pu_prefs.clone(),
        }
    }
}

/// How an SU reports its list Q(n).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SuReportStrategy {
    Truthful,
    /// Keep only these PUs, in true order.
    Truncate(Vec<usize>),
    /// Report exactly this order; it must list acceptable PUs only.
    Permute(Vec<usize>),
}

impl SuReportStrategy {
    pub fn apply(&self, truth: &[usize]) -> Result<Vec<usize>> {
        match self {
            SuReportStrategy::Truthful => Ok(truth.to_vec()),
            SuReportStrategy::Truncate(keep) => {
                Ok(truth.iter().copied().filter(|m| keep.contains(m)).collect())
            }
            SuReportStrategy::Permute(order) => {
                let mut seen = Vec::new();
                for m in order {
                    if !truth.contains(m) || seen.contains(m) {
                        return Err(Error::InvalidConfig(format!(
                            "reported PU {m} is not a distinct acceptable partner"
                        )));
                    }
                    seen.push(*m);
                }
                Ok(order.clone())
            }
        }
    }
}

/// Proposer-optimal deferred acceptance; returns the receiver held per
/// proposer index.
fn deferred_acceptance(prefs: &PreferenceLists) -> Vec<Option<usize>> {
    let (np, nr) = (prefs.num_pus(), prefs.num_sus());
    let mut next = vec![0usize; np];
    let mut held_by: Vec<Option<usize>> = vec![None; nr];
    let mut free: Vec<usize> = (0..np).rev().collect();
    while let Some(i) = free.pop() {
        let Some(&j) = prefs.pu_list(i).get(next[i]) else {
            continue;
        };
        next[i] += 1;
        let Some(rank) = prefs.su_rank(j, i) else {
            free.push(i);
            continue;
        };
        match held_by[j] {
            None => held_by[j] = Some(i),
            Some(h) if rank < prefs.su_rank(j, h).unwrap() => {
                held_by[j] = Some(i);
                free.push(h);
            }
            Some(_) => free.push(i),
        }
    }
    let mut partner = vec![None; np];
    for (j, h) in held_by.iter().enumerate() {
        if let Some(i) = h {
            partner[*i] = Some(j);
        }
    }
    partner
}

/// PU-proposing deferred acceptance: the PU-optimal stable assignment.
pub fn dac_fixed(prefs: &PreferenceLists) -> Assignment {
    let partner = deferred_acceptance(prefs);
    let pairs: Vec<(usize, usize)> = partner
        .iter()
        .enumerate()
        .filter_map(|(m, n)| n.map(|n| (m, n)))
        .collect();
    Assignment::from_pairs(prefs.num_pus(), prefs.num_sus(), &pairs)
        .expect("deferred acceptance yields a one-to-one assignment")
}

/// SU-proposing deferred acceptance: the SU-optimal stable assignment.
pub fn rdac_fixed(prefs: &PreferenceLists) -> Assignment {
    let partner = deferred_acceptance(&prefs.swapped());
    let pairs: Vec<(usize, usize)> = partner
        .iter()
        .enumerate()
        .filter_map(|(n, m)| m.map(|m| (m, n)))
        .collect();
    Assignment::from_pairs(prefs.num_pus(), prefs.num_sus(), &pairs)
        .expect("deferred acceptance yields a one-to-one assignment")
}

/// PU-proposing deferred acceptance where SUs submit reported lists.
pub fn dac_with_reports(
    prefs: &PreferenceLists,
    strategies: &[SuReportStrategy],
) -> Result<Assignment> {
    if strategies.len() != prefs.num_sus() {
        return Err(Error::InvalidConfig(format!(
            "{} strategies for {} SUs",
            strategies.len(),
            prefs.num_sus()
        )));
    }
    let reported = strategies
        .iter()
        .enumerate()
        .map(|(n, s)| s.apply(prefs.su_list(n)))
        .collect::<Result<Vec<_>>>()?;
    let lists = PreferenceLists::new(prefs.pu_prefs.clone(), reported)?;
    Ok(dac_fixed(&lists))
}

/// Pairs that block `assignment` under `prefs`: mutually acceptable and each
/// strictly prefers the other to its current partner.
pub fn blocking_pairs(prefs: &PreferenceLists, assignment: &Assignment) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for m in 0..prefs.num_pus() {
        for n in 0..prefs.num_sus() {
            if assignment.su_of(m) == Some(n) {
                continue;
            }
            let (Some(rm), Some(rn)) = (prefs.pu_rank(m, n), prefs.su_rank(n, m)) else {
                continue;
            };
            let pu_wants = assignment
                .su_of(m)
                .is_none_or(|cur| prefs.pu_rank(m, cur).is_none_or(|r| rm < r));
            let su_wants = assignment
                .pu_of(n)
                .is_none_or(|cur| prefs.su_rank(n, cur).is_none_or(|r| rn < r));
            if pu_wants && su_wants {
                out.push((m, n));
            }
        }
    }
    out
}

/// True if every matched pair is mutually acceptable and nothing blocks.
pub fn is_stable(prefs: &PreferenceLists, assignment: &Assignment) -> bool {
    assignment
        .pairs()
        .all(|(m, n)| prefs.pu_rank(m, n).is_some() && prefs.su_rank(n, m).is_some())
        && blocking_pairs(prefs, assignment).is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example() -> PreferenceLists {
        PreferenceLists::new(
            vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]],
            vec![vec![1, 2, 0], vec![2, 0, 1], vec![0, 1, 2]],
        )
        .unwrap()
    }

    fn pairs(a: &Assignment) -> Vec<(usize, usize)> {
        a.pairs().collect()
    }

    #[test]
    fn cyclic_lists_have_three_stable_assignments() {
        let p = example();
        assert_eq!(pairs(&dac_fixed(&p)), vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(pairs(&rdac_fixed(&p)), vec![(0, 2), (1, 0), (2, 1)]);
        let stable: Vec<_> = Assignment::enumerate(3, 3)
            .into_iter()
            .filter(|a| is_stable(&p, a))
            .collect();
        assert_eq!(stable.len(), 3);
    }

    #[test]
    fn truncation_and_permutation() {
        let truth = vec![1, 2, 0];
        assert_eq!(
            SuReportStrategy::Truncate(vec![0, 1])
                .apply(&truth)
                .unwrap(),
            vec![1, 0]
        );
        assert_eq!(
            SuReportStrategy::Permute(vec![0, 2]).apply(&truth).unwrap(),
            vec![0, 2]
        );
        assert!(SuReportStrategy::Permute(vec![0, 0]).apply(&truth).is_err());
        assert!(SuReportStrategy::Permute(vec![0]).apply(&[1]).is_err());
    }

    #[test]
    fn single_acceptable_su_goes_to_its_favorite() {
        let p = PreferenceLists::new(vec![vec![0], vec![0], vec![0]], vec![vec![2, 0, 1]]).unwrap();
        assert_eq!(pairs(&dac_fixed(&p)), vec![(2, 0)]);
        assert_eq!(pairs(&rdac_fixed(&p)), vec![(2, 0)]);
    }

    #[test]
    fn invalid_lists_rejected() {
        assert!(PreferenceLists::new(vec![vec![0, 0]], vec![vec![0]]).is_err());
        assert!(PreferenceLists::new(vec![vec![1]], vec![vec![0]]).is_err());
    }

    fn arb_prefs(max: usize) -> impl Strategy<Value = PreferenceLists> {
        (1..=max, 1..=max).prop_flat_map(|(pus, sus)| {
            let list = |len: usize| {
                Just((0..len).collect::<Vec<_>>())
                    .prop_shuffle()
                    .prop_flat_map(move |v| (Just(v), 0..=len))
                    .prop_map(|(v, k)| v[..k].to_vec())
            };
            (
                proptest::collection::vec(list(sus), pus),
                proptest::collection::vec(list(pus), sus),
            )
                .prop_map(|(p, q)| PreferenceLists::new(p, q).unwrap())
        })
    }

    proptest! {
        #[test]
        fn outputs_are_stable_and_extremal(p in arb_prefs(4)) {
            let dac = dac_fixed(&p);
            let rdac = rdac_fixed(&p);
            prop_assert!(is_stable(&p, &dac));
            prop_assert!(is_stable(&p, &rdac));
            let rank_pu = |a: &Assignment, m: usize| a.su_of(m).map_or(usize::MAX, |n| p.pu_rank(m, n).unwrap());
            let rank_su = |a: &Assignment, n: usize| a.pu_of(n).map_or(usize::MAX, |m| p.su_rank(n, m).unwrap());
            for s in Assignment::enumerate(p.num_pus(), p.num_sus()).iter().filter(|a| is_stable(&p, a)) {
                for m in 0..p.num_pus() {
                    prop_assert!(rank_pu(&dac, m) <= rank_pu(s, m));
                    prop_assert!(rank_pu(&rdac, m) >= rank_pu(s, m));
                }
                for n in 0..p.num_sus() {
                    prop_assert!(rank_su(&rdac, n) <= rank_su(s, n));
                }
            }
        }

        #[test]
        fn truthful_reports_change_nothing(p in arb_prefs(5)) {
            let truthful = vec![SuReportStrategy::Truthful; p.num_sus()];
            prop_assert_eq!(dac_with_reports(&p, &truthful).unwrap(), dac_fixed(&p));
        }
    }
}
