//! Independent trials, aggregated into a consensus-probability estimate with
//! a Wilson interval and compared against the theoretical lower bound.

use rayon::prelude::*;

use crate::analysis::{theoretical_bound, BoundInputs};
use crate::dynamics::{run_trial, ModelParams, StoppingSpec, TrialOptions, TrialOutcome};
use crate::error::{Error, Result};
use crate::graph::SocialGraph;
use crate::rng::RandomStream;
use crate::scalar::Scalar;
use crate::space::{expected_center_distance, InitialDistribution, OpinionSpace};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Share of cap-hit trials above which a report carries a warning.
pub const UNDETERMINED_WARNING_SHARE: f64 = 0.05;

/// Samples used when `E‖X − ĉ‖` has no closed form.
pub const DEFAULT_EXPECTATION_SAMPLES: usize = 1_000_000;

/// Stream index reserved for the expectation estimate, disjoint from trials.
const EXPECTATION_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone)]
pub struct ExperimentSpec<T> {
    pub graph: SocialGraph,
    pub space: OpinionSpace<T>,
    pub init: InitialDistribution<T>,
    pub params: ModelParams<T>,
    pub stopping: StoppingSpec<T>,
    pub trials: u64,
    pub master_seed: u64,
    pub expectation_samples: usize,
}

impl<T: Scalar> ExperimentSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::validation("trials must be at least 1"));
        }
        if self.expectation_samples == 0 {
            return Err(Error::validation("expectation_samples must be at least 1"));
        }
        self.init.validate(&self.space)
    }

    /// `E‖X − ĉ‖`, exact where a closed form exists.
    pub fn expected_center_distance(&self) -> Result<T> {
        let mut rng = RandomStream::new(self.master_seed, EXPECTATION_STREAM);
        expected_center_distance(&self.init, &self.space, self.expectation_samples, &mut rng)
    }

    /// The lower bound on `P(consensus)`, or `None` when `τ ≤ ρ̂`.
    pub fn bound(&self) -> Result<Option<T>> {
        if !(self.params.tau() > self.space.radius()) {
            return Ok(None);
        }
        let expected_dist = self.expected_center_distance()?;
        theoretical_bound(&BoundInputs { expected_dist, tau: self.params.tau(), rho: self.space.radius() }).map(Some)
    }
}

/// Wilson score interval for `successes` out of `n`; `None` when `n = 0`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> Option<(f64, f64)> {
    if n == 0 {
        return None;
    }
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    Some(((center - half).max(0.0).min(p), (center + half).min(1.0).max(p)))
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport<T> {
    pub trials: u64,
    pub consensus_count: u64,
    /// Trials that hit the event cap before `T_ε`.
    pub undetermined_count: u64,
    pub absorbed_count: u64,
    /// `consensus_count / (trials − undetermined_count)`.
    pub p_hat: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub expected_center_distance: T,
    pub rho: T,
    pub tau: T,
    pub alpha: T,
    pub eps_prime: T,
    pub eps: T,
    pub max_events: u64,
    pub bound: Option<T>,
    pub event_a_count: u64,
    pub event_a_and_consensus_count: u64,
    pub mean_stop_time: Option<f64>,
    pub mean_events: f64,
    pub master_seed: u64,
    /// Undetermined share above [`UNDETERMINED_WARNING_SHARE`].
    pub undetermined_warning: bool,
}

impl<T: Scalar> MonteCarloReport<T> {
    pub fn bound_applicable(&self) -> bool {
        self.bound.is_some()
    }

    pub fn determined(&self) -> u64 {
        self.trials - self.undetermined_count
    }
}

/// Runs every trial of `spec` on `parallelism` worker threads. Trial `i`
/// uses stream `(master_seed, i)`; results come back in index order.
pub fn run_trials<T: Scalar>(spec: &ExperimentSpec<T>, parallelism: usize) -> Result<Vec<TrialOutcome<T>>> {
    spec.validate()?;
    if parallelism == 0 {
        return Err(Error::usage("parallelism must be at least 1"));
    }
    let options = TrialOptions { record_samples: false };
    let run = |i: u64| {
        run_trial(
            &spec.graph,
            &spec.space,
            &spec.init,
            spec.params,
            spec.stopping,
            RandomStream::new(spec.master_seed, i),
            options,
        )
    };
    if parallelism == 1 {
        return (0..spec.trials).map(run).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    pool.install(|| (0..spec.trials).into_par_iter().map(run).collect())
}

/// Aggregates outcomes (in trial-index order) into a report.
pub fn summarize<T: Scalar>(spec: &ExperimentSpec<T>, outcomes: &[TrialOutcome<T>]) -> Result<MonteCarloReport<T>> {
    let trials = outcomes.len() as u64;
    let mut consensus_count = 0;
    let mut undetermined_count = 0;
    let mut absorbed_count = 0;
    let mut event_a_count = 0;
    let mut event_a_and_consensus_count = 0;
    let mut stop_time = CompensatedSum::default();
    let mut events_total: u128 = 0;
    for o in outcomes {
        events_total += u128::from(o.events);
        if !o.stopped {
            undetermined_count += 1;
            continue;
        }
        stop_time.add(o.stop_time);
        absorbed_count += u64::from(o.absorbed);
        let consensus = o.consensus == Some(true);
        consensus_count += u64::from(consensus);
        if o.event_a == Some(true) {
            event_a_count += 1;
            event_a_and_consensus_count += u64::from(consensus);
        }
    }
    let determined = trials - undetermined_count;
    let p_hat = (determined > 0).then(|| consensus_count as f64 / determined as f64);
    let ci = wilson_interval(consensus_count, determined, Z_95);
    let expected = spec.expected_center_distance()?;
    Ok(MonteCarloReport {
        trials,
        consensus_count,
        undetermined_count,
        absorbed_count,
        p_hat,
        ci_low: ci.map(|c| c.0),
        ci_high: ci.map(|c| c.1),
        expected_center_distance: expected,
        rho: spec.space.radius(),
        tau: spec.params.tau(),
        alpha: spec.params.alpha(),
        eps_prime: spec.stopping.eps_prime(),
        eps: spec.stopping.eps(),
        max_events: spec.stopping.max_events(),
        bound: spec.bound()?,
        event_a_count,
        event_a_and_consensus_count,
        mean_stop_time: (determined > 0).then(|| stop_time.value() / determined as f64),
        mean_events: if trials > 0 { events_total as f64 / trials as f64 } else { 0.0 },
        master_seed: spec.master_seed,
        undetermined_warning: undetermined_count as f64 > UNDETERMINED_WARNING_SHARE * trials as f64,
    })
}

/// Runs the experiment and aggregates it. The report depends only on `spec`.
pub fn run_estimate<T: Scalar>(spec: &ExperimentSpec<T>, parallelism: usize) -> Result<MonteCarloReport<T>> {
    let outcomes = run_trials(spec, parallelism)?;
    summarize(spec, &outcomes)
}
