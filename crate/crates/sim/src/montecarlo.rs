//! Monte Carlo outage experiment over the multi-group scenario.
//!
//! Every trial samples a fresh `3K`-user population, runs each requested
//! pipeline (pairing strategy + scheme policy) under the per-group budget
//! `p_max / K`, and counts group outages.  Randomness is drawn from
//! per-(trial, purpose) substreams, so results are bit-identical for any
//! worker count and any subset of requested schemes.

use crate::formats::OutageRecord;
use anyhow::{anyhow, Result};
use comp_noma::channel::{self, ScenarioConfig};
use comp_noma::pairing::{self, GroupAssignment, SchemePolicy, UserPopulation};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Pipelines compared by the experiment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeId {
    /// Quasi-degradation-based greedy pairing, groups served as flagged.
    Qdup,
    /// Random pairing, hybrid scheme per group.
    HcnRan,
    /// Smallest-angle pairing, hybrid scheme per group.
    HcnCorr,
    /// Random pairing, zero-forcing everywhere.
    ZfbfRan,
}

pub const ALL_SCHEMES: [SchemeId; 4] = [
    SchemeId::Qdup,
    SchemeId::HcnRan,
    SchemeId::HcnCorr,
    SchemeId::ZfbfRan,
];

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeId::Qdup => "QDUP",
            SchemeId::HcnRan => "HCN-Ran",
            SchemeId::HcnCorr => "HCN-Corr",
            SchemeId::ZfbfRan => "ZFBF-Ran",
        })
    }
}

impl FromStr for SchemeId {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qdup" => Ok(SchemeId::Qdup),
            "hcn-ran" => Ok(SchemeId::HcnRan),
            "hcn-corr" => Ok(SchemeId::HcnCorr),
            "zfbf-ran" => Ok(SchemeId::ZfbfRan),
            other => Err(anyhow!(
                "unknown scheme {other:?} (expected qdup, hcn-ran, hcn-corr, or zfbf-ran)"
            )),
        }
    }
}

/// Experiment knobs beyond the scenario config.
#[derive(Clone, Debug)]
pub struct McOptions {
    pub trials: u64,
    pub schemes: Vec<SchemeId>,
    /// Normalized-correlation threshold below which a pair counts as
    /// orthogonal in the greedy pairing.
    pub orth_threshold: f64,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            trials: 1000,
            schemes: ALL_SCHEMES.to_vec(),
            orth_threshold: 0.01,
        }
    }
}

/// Aggregated outage statistics for one scheme.
#[derive(Clone, Debug, Serialize)]
pub struct OutageStats {
    pub scheme: SchemeId,
    pub trials: u64,
    pub k: usize,
    pub p_max: f64,
    pub seed: u64,
    /// Fraction of groups in outage across all trials.
    pub group_outage_prob: f64,
    /// Mean per-trial transmit power summed over served groups (W).
    pub mean_total_power: f64,
    /// 95% normal-approximation halfwidth of the outage probability.
    pub confidence_halfwidth_95: f64,
}

impl OutageStats {
    pub fn to_record(&self) -> OutageRecord {
        OutageRecord {
            scheme: self.scheme.to_string(),
            k: self.k,
            p_max: self.p_max,
            trials: self.trials,
            outage_prob: self.group_outage_prob,
            ci95: self.confidence_halfwidth_95,
            mean_power_w: self.mean_total_power,
            seed: self.seed,
        }
    }
}

// Substream purposes within one trial.
const STREAMS_PER_TRIAL: u64 = 8;
const STREAM_POPULATION: u64 = 0;
const STREAM_PAIR_HCN: u64 = 1;
const STREAM_PAIR_ZFBF: u64 = 2;

struct TrialTally {
    outages: Vec<u64>,
    power: Vec<f64>,
}

fn run_trial(
    cfg: &ScenarioConfig,
    opts: &McOptions,
    trial: u64,
) -> Result<TrialTally> {
    let k = cfg.group_count;
    let targets = cfg.targets();
    let base = trial * STREAMS_PER_TRIAL;
    let mut rng = channel::trial_rng(cfg.seed, base + STREAM_POPULATION);
    let pop: UserPopulation =
        channel::sample_population(cfg, k, &mut rng).map_err(|e| anyhow!("{e}"))?;

    let mut outages = Vec::with_capacity(opts.schemes.len());
    let mut power = Vec::with_capacity(opts.schemes.len());
    for &scheme in &opts.schemes {
        let (assignment, policy): (GroupAssignment, SchemePolicy) = match scheme {
            SchemeId::Qdup => (
                pairing::qdup(&pop, &targets, cfg.noise_power, cfg.p_max, opts.orth_threshold)
                    .map_err(|e| anyhow!("{e}"))?,
                SchemePolicy::AsFlagged,
            ),
            SchemeId::HcnRan => {
                let mut rng = channel::trial_rng(cfg.seed, base + STREAM_PAIR_HCN);
                (pairing::random_pairing(k, &mut rng), SchemePolicy::HCompNoma)
            }
            SchemeId::HcnCorr => (pairing::corr_pairing(&pop), SchemePolicy::HCompNoma),
            SchemeId::ZfbfRan => {
                let mut rng = channel::trial_rng(cfg.seed, base + STREAM_PAIR_ZFBF);
                (pairing::random_pairing(k, &mut rng), SchemePolicy::ZfbfOnly)
            }
        };
        let results = pairing::evaluate_assignment(
            &pop,
            &assignment,
            &targets,
            cfg.noise_power,
            cfg.p_max,
            policy,
        )
        .map_err(|e| anyhow!("{e}"))?;
        outages.push(results.iter().filter(|r| !r.feasible).count() as u64);
        power.push(results.iter().filter_map(|r| r.total_power).sum());
    }
    Ok(TrialTally { outages, power })
}

/// Run the experiment.  Trials execute on the rayon pool; the reduction
/// runs in trial order, so output is independent of worker count.
pub fn run_montecarlo(cfg: &ScenarioConfig, opts: &McOptions) -> Result<Vec<OutageStats>> {
    anyhow::ensure!(opts.trials >= 1, "at least one trial required");
    anyhow::ensure!(!opts.schemes.is_empty(), "no schemes requested");
    cfg.validate().map_err(|e| anyhow!("{e}"))?;

    let tallies: Vec<Result<TrialTally>> = (0..opts.trials)
        .into_par_iter()
        .map(|trial| run_trial(cfg, opts, trial))
        .collect();

    let k = cfg.group_count;
    let mut outages = vec![0u64; opts.schemes.len()];
    let mut power = vec![0.0f64; opts.schemes.len()];
    for tally in tallies {
        let tally = tally?;
        for (s, (&o, &p)) in tally.outages.iter().zip(&tally.power).enumerate() {
            outages[s] += o;
            power[s] += p;
        }
    }

    let group_count = (opts.trials * k as u64) as f64;
    Ok(opts
        .schemes
        .iter()
        .zip(outages)
        .zip(power)
        .map(|((&scheme, outage), power_sum)| {
            let p = outage as f64 / group_count;
            OutageStats {
                scheme,
                trials: opts.trials,
                k,
                p_max: cfg.p_max,
                seed: cfg.seed,
                group_outage_prob: p,
                mean_total_power: power_sum / opts.trials as f64,
                confidence_halfwidth_95: 1.96 * (p * (1.0 - p) / group_count).sqrt(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_cfg() -> ScenarioConfig {
        ScenarioConfig {
            group_count: 2,
            ..ScenarioConfig::default()
        }
    }

    fn quick_opts(trials: u64) -> McOptions {
        McOptions {
            trials,
            ..McOptions::default()
        }
    }

    #[test]
    fn huge_budget_means_no_outage() {
        let cfg = ScenarioConfig {
            p_max: 1e6,
            ..quick_cfg()
        };
        for stats in run_montecarlo(&cfg, &quick_opts(40)).unwrap() {
            assert_eq!(
                stats.group_outage_prob, 0.0,
                "{}: outage under a huge budget",
                stats.scheme
            );
            assert!(stats.mean_total_power > 0.0);
        }
    }

    #[test]
    fn zero_targets_mean_no_outage_and_no_power() {
        let cfg = ScenarioConfig {
            target_rates: [0.0; 3],
            p_max: 0.0,
            ..quick_cfg()
        };
        for stats in run_montecarlo(&cfg, &quick_opts(20)).unwrap() {
            assert_eq!(stats.group_outage_prob, 0.0);
            assert_eq!(stats.mean_total_power, 0.0);
        }
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let cfg = quick_cfg();
        let opts = quick_opts(30);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_montecarlo(&cfg, &opts))
            .unwrap();
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(|| run_montecarlo(&cfg, &opts))
            .unwrap();
        for (a, b) in single.iter().zip(&many) {
            assert_eq!(a.group_outage_prob.to_bits(), b.group_outage_prob.to_bits());
            assert_eq!(a.mean_total_power.to_bits(), b.mean_total_power.to_bits());
        }
    }

    #[test]
    fn scheme_subsets_reproduce_full_run_values() {
        let cfg = quick_cfg();
        let full = run_montecarlo(&cfg, &quick_opts(25)).unwrap();
        let only_zfbf = run_montecarlo(
            &cfg,
            &McOptions {
                trials: 25,
                schemes: vec![SchemeId::ZfbfRan],
                orth_threshold: 0.01,
            },
        )
        .unwrap();
        let full_zfbf = full.iter().find(|s| s.scheme == SchemeId::ZfbfRan).unwrap();
        assert_eq!(
            full_zfbf.group_outage_prob.to_bits(),
            only_zfbf[0].group_outage_prob.to_bits()
        );
        assert_eq!(
            full_zfbf.mean_total_power.to_bits(),
            only_zfbf[0].mean_total_power.to_bits()
        );
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in ALL_SCHEMES {
            assert_eq!(s.to_string().parse::<SchemeId>().unwrap(), s);
        }
        assert!("mystery".parse::<SchemeId>().is_err());
    }
}
