//! User pairing for the multi-group scenario.
//!
//! `3K` users (K CoMP, K near users per station) are split into K groups
//! served in separate time slots, each group limited to `p_max / K` per
//! station.  [`qdup`] greedily pairs every CoMP user with the first unpaired
//! near-user pair whose triple is quasi-degraded and solvable within budget
//! (flagging the group for CoMP-NOMA), else with an almost-orthogonal pair
//! (flagging zero-forcing), else with the least-correlated leftovers.

use crate::cvec::{self, Cx};
use crate::dpc::{self, DpcError};
use crate::rate::{GroupChannels, SinrTargets};
use crate::schemes::{self, Scheme, SchemeDecision};
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;

/// Channel vectors of the `3K` unpaired users.
#[derive(Clone, Debug)]
pub struct UserPopulation {
    /// CoMP users' links to station 1 and station 2, index k.
    pub h10: Vec<Vec<Cx>>,
    pub h20: Vec<Vec<Cx>>,
    /// Station 1's near users, index i.
    pub h11: Vec<Vec<Cx>>,
    /// Station 2's near users, index j.
    pub h22: Vec<Vec<Cx>>,
}

impl UserPopulation {
    pub fn len(&self) -> usize {
        self.h10.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h10.is_empty()
    }

    /// Channels of the group formed by CoMP user `k` and near users `(i, j)`.
    pub fn group(&self, k: usize, i: usize, j: usize) -> GroupChannels<'_> {
        GroupChannels {
            h10: &self.h10[k],
            h20: &self.h20[k],
            h11: &self.h11[i],
            h22: &self.h22[j],
        }
    }
}

/// Pairing maps and per-group scheme flags.  `pi1[k]`/`pi2[k]` are the near
/// users of stations 1/2 assigned to CoMP user `k` (0-based); `s[k]` is true
/// when the group is flagged for CoMP-NOMA.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupAssignment {
    pub pi1: Vec<usize>,
    pub pi2: Vec<usize>,
    pub s: Vec<bool>,
}

/// Normalized correlation `|aᴴb|² / (‖a‖²‖b‖²)` between two channels.
fn norm_corr(a: &[Cx], b: &[Cx]) -> f64 {
    cvec::gain(a, b) / (cvec::norm_sqr(a) * cvec::norm_sqr(b))
}

/// Greedy quasi-degradation-based pairing under per-group budget `p_max/K`.
///
/// Scan order over candidate pairs is lexicographic; the first match wins.
pub fn qdup(
    pop: &UserPopulation,
    targets: &SinrTargets,
    sigma2: f64,
    p_max: f64,
    orth_threshold: f64,
) -> Result<GroupAssignment, DpcError> {
    let k_count = pop.len();
    let budget = p_max / k_count as f64;
    let mut used1 = vec![false; k_count];
    let mut used2 = vec![false; k_count];
    let mut pi1 = vec![0usize; k_count];
    let mut pi2 = vec![0usize; k_count];
    let mut s = vec![false; k_count];

    for k in 0..k_count {
        let mut chosen: Option<(usize, usize, bool)> = None;
        'scan: for i in 0..k_count {
            if used1[i] {
                continue;
            }
            for j in 0..k_count {
                if used2[j] {
                    continue;
                }
                let ch = pop.group(k, i, j);
                if let Some(sol) = dpc::solve_dpc(ch, targets, sigma2, budget)? {
                    if schemes::qd_check(&sol, ch, targets, sigma2) {
                        chosen = Some((i, j, true));
                        break 'scan;
                    }
                }
                if norm_corr(&pop.h11[i], &pop.h10[k]) <= orth_threshold
                    && norm_corr(&pop.h22[j], &pop.h20[k]) <= orth_threshold
                {
                    chosen = Some((i, j, false));
                    break 'scan;
                }
            }
        }
        let (i, j, flag) = chosen.unwrap_or_else(|| {
            // No quasi-degraded or orthogonal pair left: take the least
            // correlated remaining near user on each side.
            let argmin = |used: &[bool], corr: &dyn Fn(usize) -> f64| {
                (0..k_count)
                    .filter(|&i| !used[i])
                    .min_by(|&a, &b| corr(a).partial_cmp(&corr(b)).unwrap())
                    .expect("an unpaired user always remains")
            };
            let i = argmin(&used1, &|i| norm_corr(&pop.h11[i], &pop.h10[k]));
            let j = argmin(&used2, &|j| norm_corr(&pop.h22[j], &pop.h20[k]));
            (i, j, false)
        });
        used1[i] = true;
        used2[j] = true;
        pi1[k] = i;
        pi2[k] = j;
        s[k] = flag;
    }
    Ok(GroupAssignment { pi1, pi2, s })
}

/// Uniformly random pairing; scheme flags are left unset (all false).
pub fn random_pairing<R: Rng + ?Sized>(k_count: usize, rng: &mut R) -> GroupAssignment {
    let mut pi1: Vec<usize> = (0..k_count).collect();
    let mut pi2: Vec<usize> = (0..k_count).collect();
    pi1.shuffle(rng);
    pi2.shuffle(rng);
    GroupAssignment {
        pi1,
        pi2,
        s: vec![false; k_count],
    }
}

/// Pair each CoMP user in turn with the most aligned (largest normalized
/// correlation, i.e. smallest angle) unpaired near user on each side.
pub fn corr_pairing(pop: &UserPopulation) -> GroupAssignment {
    let k_count = pop.len();
    let mut used1 = vec![false; k_count];
    let mut used2 = vec![false; k_count];
    let mut pi1 = vec![0usize; k_count];
    let mut pi2 = vec![0usize; k_count];
    for k in 0..k_count {
        let argmax = |used: &[bool], corr: &dyn Fn(usize) -> f64| {
            (0..k_count)
                .filter(|&i| !used[i])
                .max_by(|&a, &b| corr(a).partial_cmp(&corr(b)).unwrap())
                .expect("an unpaired user always remains")
        };
        let i = argmax(&used1, &|i| norm_corr(&pop.h11[i], &pop.h10[k]));
        let j = argmax(&used2, &|j| norm_corr(&pop.h22[j], &pop.h20[k]));
        used1[i] = true;
        used2[j] = true;
        pi1[k] = i;
        pi2[k] = j;
    }
    GroupAssignment {
        pi1,
        pi2,
        s: vec![false; k_count],
    }
}

/// How groups pick their transmission scheme during evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemePolicy {
    /// Zero-forcing everywhere.
    ZfbfOnly,
    /// Hybrid selection per group.
    HCompNoma,
    /// Honor the assignment's `s` flags: CoMP-NOMA where flagged, else
    /// zero-forcing.
    AsFlagged,
}

/// Per-group evaluation outcome; `feasible == false` is a group outage.
#[derive(Clone, Debug)]
pub struct GroupResult {
    pub feasible: bool,
    pub total_power: Option<f64>,
    pub scheme: Option<Scheme>,
}

impl From<SchemeDecision> for GroupResult {
    fn from(d: SchemeDecision) -> Self {
        GroupResult {
            feasible: d.feasible,
            total_power: d.total_power,
            scheme: d.feasible.then_some(d.scheme),
        }
    }
}

/// Evaluate every group of an assignment independently under per-group
/// budget `p_max / K`.
pub fn evaluate_assignment(
    pop: &UserPopulation,
    assignment: &GroupAssignment,
    targets: &SinrTargets,
    sigma2: f64,
    p_max: f64,
    policy: SchemePolicy,
) -> Result<Vec<GroupResult>, DpcError> {
    let k_count = pop.len();
    let budget = p_max / k_count as f64;
    let mut out = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let ch = pop.group(k, assignment.pi1[k], assignment.pi2[k]);
        let result = match policy {
            SchemePolicy::ZfbfOnly => schemes::zfbf_solve(ch, targets, sigma2, budget).into(),
            SchemePolicy::HCompNoma => schemes::h_comp_noma(ch, targets, sigma2, budget)?.into(),
            SchemePolicy::AsFlagged => {
                if assignment.s[k] {
                    match dpc::solve_dpc(ch, targets, sigma2, budget)? {
                        Some(sol) => GroupResult {
                            feasible: true,
                            total_power: Some(sol.total_power),
                            scheme: Some(Scheme::CompNoma),
                        },
                        None => GroupResult {
                            feasible: false,
                            total_power: None,
                            scheme: None,
                        },
                    }
                } else {
                    schemes::zfbf_solve(ch, targets, sigma2, budget).into()
                }
            }
        };
        out.push(result);
    }
    Ok(out)
}
