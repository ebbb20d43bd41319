//! Monte-Carlo simulation of two-node entanglement capture with coincidence
//! heralding.
//!
//! Each trial sends one photon pair. Arrival is independent per arm with the
//! fiber survival probability. If both photons arrive, loading is a single
//! joint Bernoulli draw with `eta_joint`; a lone photon loads with
//! `eta_single`. A node heralds when it absorbed, or when it did not but the
//! detector missed every fluorescence cycle (probability ε).

use rand::Rng;
use rayon::prelude::*;

use crate::csvfmt;
use crate::error::{Error, Result};
use crate::linkmath::LinkBudget;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub arrived: [bool; 2],
    pub absorbed: [bool; 2],
    pub heralded: [bool; 2],
    pub coincidence: bool,
    pub true_pair: bool,
}

pub const TRIALS_CSV_HEADER: &str =
    "trial_index,arrived_1,arrived_2,absorbed_1,absorbed_2,heralded_1,heralded_2,coincidence,true_pair";

impl TrialRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.trial_index,
            self.arrived[0],
            self.arrived[1],
            self.absorbed[0],
            self.absorbed[1],
            self.heralded[0],
            self.heralded[1],
            self.coincidence,
            self.true_pair
        )
    }
}

fn bernoulli<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    rng.random::<f64>() < p
}

/// One capture attempt on both nodes.
pub fn run_trial<R: Rng + ?Sized>(
    budget: &LinkBudget,
    rng: &mut R,
    trial_index: u64,
) -> TrialRecord {
    let s = budget.survival();
    let eps = budget.epsilon();
    let arrived = [bernoulli(rng, s), bernoulli(rng, s)];
    let absorbed = match arrived {
        [true, true] => {
            let loaded = bernoulli(rng, budget.eta_joint);
            [loaded, loaded]
        }
        [true, false] => [bernoulli(rng, budget.eta_single), false],
        [false, true] => [false, bernoulli(rng, budget.eta_single)],
        [false, false] => [false, false],
    };
    let heralded = absorbed.map(|a| a || bernoulli(rng, eps));
    TrialRecord {
        trial_index,
        arrived,
        absorbed,
        heralded,
        coincidence: heralded[0] && heralded[1],
        true_pair: absorbed[0] && absorbed[1],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSearch {
    Found {
        trials_used: u64,
        record: TrialRecord,
    },
    Exhausted {
        trials_used: u64,
    },
}

fn search<R: Rng + ?Sized>(
    budget: &LinkBudget,
    rng: &mut R,
    max_trials: u64,
    mut sink: Option<&mut Vec<TrialRecord>>,
) -> PairSearch {
    for i in 0..max_trials {
        let record = run_trial(budget, rng, i);
        if let Some(sink) = sink.as_deref_mut() {
            sink.push(record);
        }
        if record.coincidence {
            return PairSearch::Found {
                trials_used: i + 1,
                record,
            };
        }
    }
    PairSearch::Exhausted {
        trials_used: max_trials,
    }
}

/// Repeats trials until both nodes herald, giving up after `max_trials`.
pub fn run_until_pair<R: Rng + ?Sized>(
    budget: &LinkBudget,
    rng: &mut R,
    max_trials: u64,
) -> PairSearch {
    search(budget, rng, max_trials, None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub target_pairs: u64,
    pub master_seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub workers: usize,
    pub max_trials_per_pair: u64,
    /// Keep every trial record (memory grows with the total trial count).
    pub record_trials: bool,
}

impl CampaignConfig {
    pub fn new(target_pairs: u64, master_seed: u64) -> Self {
        Self {
            target_pairs,
            master_seed,
            workers: 0,
            max_trials_per_pair: u64::MAX,
            record_trials: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignStats {
    pub trials_total: u64,
    pub pairs_declared: u64,
    pub pairs_true: u64,
    pub empirical_fidelity: f64,
    pub mean_trials_per_pair: f64,
    /// Seconds of simulated protocol time.
    pub elapsed_sim_time: f64,
    /// 95% normal-approximation half-width of `empirical_fidelity`.
    pub confidence_halfwidth: f64,
}

impl CampaignStats {
    pub fn mean_time_per_pair(&self) -> f64 {
        self.elapsed_sim_time / self.pairs_declared as f64
    }

    pub fn summary_lines(&self) -> Vec<(&'static str, String)> {
        vec![
            ("trials_total", self.trials_total.to_string()),
            ("pairs_declared", self.pairs_declared.to_string()),
            ("pairs_true", self.pairs_true.to_string()),
            ("empirical_fidelity", csvfmt::float(self.empirical_fidelity)),
            (
                "confidence_halfwidth",
                csvfmt::float(self.confidence_halfwidth),
            ),
            (
                "mean_trials_per_pair",
                csvfmt::float(self.mean_trials_per_pair),
            ),
            ("elapsed_sim_time", csvfmt::float(self.elapsed_sim_time)),
            (
                "mean_time_per_pair",
                csvfmt::float(self.mean_time_per_pair()),
            ),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairResult {
    pub pair_index: u64,
    pub seed: u64,
    pub trials_used: u64,
    pub true_pair: bool,
}

pub const PAIRS_CSV_HEADER: &str = "pair_index,seed,trials_used,true_pair";

impl PairResult {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.pair_index, self.seed, self.trials_used, self.true_pair
        )
    }
}

#[derive(Debug, Clone)]
pub struct CampaignOutput {
    pub stats: CampaignStats,
    pub pairs: Vec<PairResult>,
    /// Every trial in pair order, re-indexed across the campaign. Empty
    /// unless requested.
    pub trials: Vec<TrialRecord>,
}

fn aggregate(budget: &LinkBudget, pairs: &[PairResult]) -> CampaignStats {
    let trials_total: u64 = pairs.iter().map(|p| p.trials_used).sum();
    let pairs_declared = pairs.len() as u64;
    let pairs_true = pairs.iter().filter(|p| p.true_pair).count() as u64;
    let n = pairs_declared as f64;
    let fidelity = if pairs_declared > 0 {
        pairs_true as f64 / n
    } else {
        0.0
    };
    CampaignStats {
        trials_total,
        pairs_declared,
        pairs_true,
        empirical_fidelity: fidelity,
        mean_trials_per_pair: trials_total as f64 / n,
        elapsed_sim_time: trials_total as f64 * budget.trial_duration(),
        confidence_halfwidth: 1.96 * (fidelity * (1.0 - fidelity) / n).sqrt(),
    }
}

/// Collects `target_pairs` coincidences. Pair `i` draws from its own stream
/// derived from `(master_seed, i)`, so the output does not depend on the
/// number of workers.
pub fn run_campaign_with(budget: &LinkBudget, config: &CampaignConfig) -> Result<CampaignOutput> {
    budget.validate()?;
    if config.target_pairs == 0 {
        return Err(Error::InvalidParameter(
            "target_pairs must be at least 1".into(),
        ));
    }
    if config.max_trials_per_pair == 0 {
        return Err(Error::InvalidParameter(
            "max_trials_per_pair must be at least 1".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;

    let searches: Vec<(PairSearch, u64, Vec<TrialRecord>)> = pool.install(|| {
        (0..config.target_pairs)
            .into_par_iter()
            .map(|i| {
                let seed = rng::derive_seed(config.master_seed, i);
                let mut stream = rng::stream(seed);
                let mut trials = Vec::new();
                let sink = config.record_trials.then_some(&mut trials);
                let outcome = search(budget, &mut stream, config.max_trials_per_pair, sink);
                (outcome, seed, trials)
            })
            .collect()
    });

    let mut pairs = Vec::with_capacity(searches.len());
    let mut trials = Vec::new();
    for (pair_index, (outcome, seed, records)) in (0u64..).zip(searches) {
        match outcome {
            PairSearch::Found {
                trials_used,
                record,
            } => pairs.push(PairResult {
                pair_index,
                seed,
                trials_used,
                true_pair: record.true_pair,
            }),
            PairSearch::Exhausted { .. } => {
                return Err(Error::Exhausted {
                    pair_index,
                    max_trials: config.max_trials_per_pair,
                })
            }
        }
        let offset = trials.len() as u64;
        trials.extend(records.into_iter().map(|r| TrialRecord {
            trial_index: offset + r.trial_index,
            ..r
        }));
    }
    Ok(CampaignOutput {
        stats: aggregate(budget, &pairs),
        pairs,
        trials,
    })
}

pub fn run_campaign(
    budget: &LinkBudget,
    target_pairs: u64,
    master_seed: u64,
    workers: usize,
) -> Result<CampaignStats> {
    let config = CampaignConfig {
        workers,
        ..CampaignConfig::new(target_pairs, master_seed)
    };
    Ok(run_campaign_with(budget, &config)?.stats)
}
