//! The continuous-time Hegselmann-Krause process.
//!
//! Vertex `x` fires at rate `|N(x)|`, the number of graph neighbors whose
//! opinion lies within `τ` of its own, and moves to
//! `α·ξ(x) + (1 − α)·mean{ξ(y) : y ∈ N(x)}`. A run stops at the first time
//! every edge's opinion distance lies outside `[ε, τ]`.

use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::analysis;
use crate::error::{Error, Result};
use crate::graph::SocialGraph;
use crate::rng::RandomStream;
use crate::scalar::Scalar;
use crate::space::{sample_initial, InitialDistribution, NormSpec, OpinionSpace, OpinionVector};

pub const DEFAULT_MAX_EVENTS: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    tau: T,
    alpha: T,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(tau: T, alpha: T) -> Result<Self> {
        if !(tau > T::zero()) || !tau.is_finite() {
            return Err(Error::validation(format!("tau must be positive, got {tau}")));
        }
        if !(alpha >= T::zero() && alpha <= T::one()) {
            return Err(Error::validation(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        Ok(ModelParams { tau, alpha })
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }
}

/// Tolerances of the stopping time `T_ε`, with `ε = ε′ / |V|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingSpec<T> {
    eps_prime: T,
    eps: T,
    max_events: u64,
}

impl<T: Scalar> StoppingSpec<T> {
    pub fn new(eps_prime: T, tau: T, vertex_count: usize, max_events: u64) -> Result<Self> {
        if !(eps_prime > T::zero()) {
            return Err(Error::validation(format!("eps_prime must be positive, got {eps_prime}")));
        }
        if !(eps_prime < tau / T::lit(2.0)) {
            return Err(Error::validation(format!(
                "eps_prime must be below tau/2 = {}, got {eps_prime}",
                tau / T::lit(2.0)
            )));
        }
        if vertex_count == 0 {
            return Err(Error::validation("vertex count must be positive"));
        }
        if max_events == 0 {
            return Err(Error::validation("max_events must be positive"));
        }
        let eps = eps_prime / T::from_usize(vertex_count).expect("vertex count fits the scalar");
        Ok(StoppingSpec { eps_prime, eps, max_events })
    }

    /// `min(0.01·(τ − ρ̂), τ/4)` when `τ > ρ̂`, else `τ/4`.
    pub fn default_eps_prime(tau: T, rho: T) -> T {
        let quarter = tau / T::lit(4.0);
        if tau > rho {
            (T::lit(0.01) * (tau - rho)).min(quarter)
        } else {
            quarter
        }
    }

    pub fn with_defaults(tau: T, rho: T, vertex_count: usize) -> Result<Self> {
        Self::new(Self::default_eps_prime(tau, rho), tau, vertex_count, DEFAULT_MAX_EVENTS)
    }

    pub fn with_max_events(mut self, max_events: u64) -> Result<Self> {
        if max_events == 0 {
            return Err(Error::validation("max_events must be positive"));
        }
        self.max_events = max_events;
        Ok(self)
    }

    pub fn eps_prime(&self) -> T {
        self.eps_prime
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn max_events(&self) -> u64 {
        self.max_events
    }
}

/// Opinions of every vertex, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration<T> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> Configuration<T> {
    pub fn new(opinions: Vec<OpinionVector<T>>) -> Result<Self> {
        let dim = opinions.first().map(|o| o.dim()).ok_or_else(|| Error::validation("empty configuration"))?;
        if let Some(x) = opinions.iter().position(|o| o.dim() != dim) {
            return Err(Error::validation(format!("opinion of vertex {x} has the wrong dimension")));
        }
        let coords = opinions.into_iter().flat_map(OpinionVector::into_inner).collect();
        Ok(Configuration { dim, coords })
    }

    /// One-dimensional configuration from plain values.
    pub fn scalar(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| OpinionVector::from_f64(&[v])).collect::<Result<_>>()?)
    }

    pub fn vertex_count(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn opinion(&self, x: usize) -> &[T] {
        &self.coords[x * self.dim..(x + 1) * self.dim]
    }

    pub fn opinions(&self) -> impl Iterator<Item = &[T]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_vectors(&self) -> Vec<OpinionVector<T>> {
        self.opinions().map(|o| OpinionVector::from_vec_unchecked(o.to_vec())).collect()
    }

    fn set(&mut self, x: usize, value: &[T]) {
        self.coords[x * self.dim..(x + 1) * self.dim].copy_from_slice(value);
    }

    /// Checks the configuration fits `g` and every opinion lies in `space`.
    pub fn validate_on(&self, g: &SocialGraph, space: &OpinionSpace<T>) -> Result<()> {
        if self.vertex_count() != g.vertex_count() {
            return Err(Error::validation(format!(
                "configuration has {} opinions for {} vertices",
                self.vertex_count(),
                g.vertex_count()
            )));
        }
        if self.dim != space.dim() {
            return Err(Error::validation(format!(
                "opinion dimension {} differs from space dimension {}",
                self.dim,
                space.dim()
            )));
        }
        if let Some(x) = (0..self.vertex_count()).find(|&x| !space.contains(self.opinion(x))) {
            return Err(Error::validation(format!("opinion of vertex {x} lies outside the opinion space")));
        }
        Ok(())
    }

    /// Largest distance between any two opinions (not only neighbors).
    pub fn max_pair_distance(&self, norm: NormSpec) -> T {
        let n = self.vertex_count();
        let mut best = T::zero();
        for x in 0..n {
            for y in x + 1..n {
                best = best.max(norm.dist(self.opinion(x), self.opinion(y)));
            }
        }
        best
    }
}

/// Compatible-neighbor sets `N(x)` and the induced firing rates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibilityView {
    neighbors: Vec<Vec<usize>>,
    rates: Vec<usize>,
    total_rate: usize,
}

impl CompatibilityView {
    pub fn neighbors(&self, x: usize) -> &[usize] {
        &self.neighbors[x]
    }

    pub fn rate(&self, x: usize) -> usize {
        self.rates[x]
    }

    pub fn rates(&self) -> &[usize] {
        &self.rates
    }

    pub fn total_rate(&self) -> usize {
        self.total_rate
    }

    /// Records whether edge `{x, y}` is compatible, keeping both sorted lists
    /// and the rate totals in sync.
    fn set_edge(&mut self, x: usize, y: usize, compatible: bool) {
        for (a, b) in [(x, y), (y, x)] {
            let list = &mut self.neighbors[a];
            match (list.binary_search(&b), compatible) {
                (Err(pos), true) => {
                    list.insert(pos, b);
                    self.rates[a] += 1;
                    self.total_rate += 1;
                }
                (Ok(pos), false) => {
                    list.remove(pos);
                    self.rates[a] -= 1;
                    self.total_rate -= 1;
                }
                _ => {}
            }
        }
    }

    /// Recomputes the edges incident to `x` after its opinion changed.
    pub fn refresh_vertex<T: Scalar>(
        &mut self,
        config: &Configuration<T>,
        g: &SocialGraph,
        tau: T,
        norm: NormSpec,
        x: usize,
    ) {
        for &y in g.neighbors(x) {
            let compatible = norm.dist(config.opinion(x), config.opinion(y)) <= tau;
            self.set_edge(x, y, compatible);
        }
    }
}

/// Builds `N(x)` for every vertex: graph neighbors at distance `≤ τ`.
pub fn compatibility<T: Scalar>(
    config: &Configuration<T>,
    g: &SocialGraph,
    tau: T,
    norm: NormSpec,
) -> CompatibilityView {
    let neighbors: Vec<Vec<usize>> = (0..g.vertex_count())
        .map(|x| {
            g.neighbors(x).iter().copied().filter(|&y| norm.dist(config.opinion(x), config.opinion(y)) <= tau).collect()
        })
        .collect();
    let rates: Vec<usize> = neighbors.iter().map(Vec::len).collect();
    let total_rate = rates.iter().sum();
    CompatibilityView { neighbors, rates, total_rate }
}

fn mean_of_neighbors<T: Scalar>(config: &Configuration<T>, view: &CompatibilityView, x: usize) -> Result<Vec<T>> {
    let nbrs = view.neighbors(x);
    if nbrs.is_empty() {
        return Err(Error::usage(format!("vertex {x} has no compatible neighbors")));
    }
    let mut acc = vec![T::zero(); config.dim()];
    for &y in nbrs {
        for (a, &c) in acc.iter_mut().zip(config.opinion(y)) {
            *a += c;
        }
    }
    let k = T::from_usize(nbrs.len()).expect("degree fits the scalar");
    acc.iter_mut().for_each(|a| *a /= k);
    Ok(acc)
}

/// Mean opinion of the compatible neighbors of `x`.
pub fn local_average<T: Scalar>(
    config: &Configuration<T>,
    view: &CompatibilityView,
    x: usize,
) -> Result<OpinionVector<T>> {
    mean_of_neighbors(config, view, x).map(OpinionVector::from_vec_unchecked)
}

pub(crate) fn updated_opinion<T: Scalar>(
    config: &Configuration<T>,
    view: &CompatibilityView,
    x: usize,
    alpha: T,
) -> Result<Vec<T>> {
    let mean = mean_of_neighbors(config, view, x)?;
    if alpha == T::zero() {
        return Ok(mean);
    }
    let keep = T::one() - alpha;
    Ok(config.opinion(x).iter().zip(mean).map(|(&own, m)| alpha * own + keep * m).collect())
}

/// Replaces `ξ(x)` by `α·ξ(x) + (1 − α)·ξ̄(x)`. The view is left stale; the
/// caller refreshes it.
pub fn apply_update<T: Scalar>(
    config: &mut Configuration<T>,
    view: &CompatibilityView,
    x: usize,
    alpha: T,
) -> Result<()> {
    let new = updated_opinion(config, view, x, alpha)?;
    if alpha < T::one() {
        config.set(x, &new);
    }
    Ok(())
}

/// Outcome of one draw of the Gillespie direct method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// Total rate is zero; the configuration never changes again.
    Absorbed,
    Fire {
        dt: f64,
        vertex: usize,
    },
}

/// Samples the holding time `dt ~ Exp(R)` and the firing vertex with
/// probability `rate(x)/R`.
pub fn gillespie_step<R: Rng + ?Sized>(view: &CompatibilityView, rng: &mut R) -> Step {
    let total = view.total_rate();
    if total == 0 {
        return Step::Absorbed;
    }
    let e: f64 = Exp1.sample(rng);
    let dt = e / total as f64;
    let mut ticket = rng.random_range(0..total);
    for (vertex, &rate) in view.rates().iter().enumerate() {
        if ticket < rate {
            return Step::Fire { dt, vertex };
        }
        ticket -= rate;
    }
    unreachable!("ticket below total rate")
}

fn blocks_stop<T: Scalar>(d: T, eps: T, tau: T) -> bool {
    d >= eps && d <= tau
}

/// True iff every edge distance is `< ε` or `> τ`.
pub fn stop_reached<T: Scalar>(
    config: &Configuration<T>,
    g: &SocialGraph,
    spec: &StoppingSpec<T>,
    tau: T,
    norm: NormSpec,
) -> bool {
    g.edges().iter().all(|&(x, y)| !blocks_stop(norm.dist(config.opinion(x), config.opinion(y)), spec.eps(), tau))
}

/// A single trajectory as a resumable state machine.
///
/// Compatibility and the count of edges with distance in `[ε, τ]` are kept
/// up to date incrementally: an event only touches edges incident to the
/// vertex that fired.
#[derive(Debug, Clone)]
pub struct Trial<'a, T> {
    graph: &'a SocialGraph,
    space: &'a OpinionSpace<T>,
    params: ModelParams<T>,
    stopping: StoppingSpec<T>,
    config: Configuration<T>,
    view: CompatibilityView,
    blocking: Vec<bool>,
    blocking_count: usize,
    time: f64,
    events: u64,
    rng: RandomStream,
}

impl<'a, T: Scalar> Trial<'a, T> {
    pub fn new(
        graph: &'a SocialGraph,
        space: &'a OpinionSpace<T>,
        params: ModelParams<T>,
        stopping: StoppingSpec<T>,
        config: Configuration<T>,
        rng: RandomStream,
    ) -> Result<Self> {
        config.validate_on(graph, space)?;
        let norm = space.norm();
        let view = compatibility(&config, graph, params.tau(), norm);
        let blocking: Vec<bool> = graph
            .edges()
            .iter()
            .map(|&(x, y)| blocks_stop(norm.dist(config.opinion(x), config.opinion(y)), stopping.eps(), params.tau()))
            .collect();
        let blocking_count = blocking.iter().filter(|&&b| b).count();
        Ok(Trial { graph, space, params, stopping, config, view, blocking, blocking_count, time: 0.0, events: 0, rng })
    }

    pub fn config(&self) -> &Configuration<T> {
        &self.config
    }

    pub fn view(&self) -> &CompatibilityView {
        &self.view
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn stopping(&self) -> &StoppingSpec<T> {
        &self.stopping
    }

    /// Whether the current configuration satisfies the `T_ε` condition.
    pub fn is_stopped(&self) -> bool {
        self.blocking_count == 0
    }

    /// Runs one event. Returns `Absorbed` without touching the state when
    /// the total rate is zero.
    pub fn step(&mut self) -> Step {
        let step = gillespie_step(&self.view, &mut self.rng);
        if let Step::Fire { dt, vertex } = step {
            let new = updated_opinion(&self.config, &self.view, vertex, self.params.alpha())
                .expect("firing vertex has a positive rate");
            self.config.set(vertex, &new);
            self.refresh(vertex);
            self.time += dt;
            self.events += 1;
        }
        step
    }

    fn refresh(&mut self, x: usize) {
        let norm = self.space.norm();
        let tau = self.params.tau();
        for &(y, edge) in self.graph.incident(x) {
            let d = norm.dist(self.config.opinion(x), self.config.opinion(y));
            self.view.set_edge(x, y, d <= tau);
            let blocks = blocks_stop(d, self.stopping.eps(), tau);
            if blocks != self.blocking[edge] {
                self.blocking[edge] = blocks;
                if blocks {
                    self.blocking_count += 1;
                } else {
                    self.blocking_count -= 1;
                }
            }
        }
    }

    /// Steps until the stop condition holds, the chain is absorbed, or
    /// `budget` further events have run. Returns whether it stopped.
    pub fn run_until_stopped(&mut self, budget: u64) -> bool {
        let limit = self.events.saturating_add(budget);
        while !self.is_stopped() {
            if self.events >= limit {
                return false;
            }
            if self.step() == Step::Absorbed {
                break;
            }
        }
        true
    }

    /// Consensus proxy at the current configuration; `None` unless stopped.
    pub fn classify(&self) -> Option<bool> {
        self.is_stopped().then(|| {
            analysis::classify_consensus(&self.config, self.graph, &self.stopping, self.params.tau(), self.space.norm())
                .expect("stopped configuration")
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOptions {
    /// Keep the `(time, X_t(ĉ))` series. Off for bulk Monte Carlo runs.
    pub record_samples: bool,
}

impl Default for TrialOptions {
    fn default() -> Self {
        TrialOptions { record_samples: true }
    }
}

/// What an event observer sees after each update.
#[derive(Debug)]
pub struct EventRecord<'r, T> {
    pub event: u64,
    pub time: f64,
    pub vertex: usize,
    pub config: &'r Configuration<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome<T> {
    /// `T_ε` reached (or the chain absorbed) before the event cap.
    pub stopped: bool,
    pub absorbed: bool,
    pub stop_time: f64,
    pub events: u64,
    /// `None` when the run hit the event cap.
    pub consensus: Option<bool>,
    /// `None` when undetermined, or when `τ ≤ ρ̂ + ε′` leaves the event undefined.
    pub event_a: Option<bool>,
    pub final_config: Configuration<T>,
    /// `(time, X_t(ĉ))` at time zero and after every event.
    pub x_samples: Vec<(f64, T)>,
    pub master_seed: u64,
    pub trial_index: u64,
}

/// Samples i.i.d. initial opinions for every vertex.
pub fn sample_configuration<T: Scalar, R: Rng + ?Sized>(
    g: &SocialGraph,
    space: &OpinionSpace<T>,
    dist: &InitialDistribution<T>,
    rng: &mut R,
) -> Result<Configuration<T>> {
    dist.validate(space)?;
    let opinions = (0..g.vertex_count()).map(|_| sample_initial(dist, space, rng)).collect::<Result<Vec<_>>>()?;
    Configuration::new(opinions)
}

/// Runs one trial from an i.i.d. initial configuration.
pub fn run_trial<T: Scalar>(
    g: &SocialGraph,
    space: &OpinionSpace<T>,
    dist: &InitialDistribution<T>,
    params: ModelParams<T>,
    stopping: StoppingSpec<T>,
    rng: RandomStream,
    options: TrialOptions,
) -> Result<TrialOutcome<T>> {
    run_trial_observed(g, space, dist, params, stopping, rng, options, |_| {})
}

/// [`run_trial`] with a callback invoked after every event.
#[allow(clippy::too_many_arguments)]
pub fn run_trial_observed<T: Scalar, F>(
    g: &SocialGraph,
    space: &OpinionSpace<T>,
    dist: &InitialDistribution<T>,
    params: ModelParams<T>,
    stopping: StoppingSpec<T>,
    mut rng: RandomStream,
    options: TrialOptions,
    mut observer: F,
) -> Result<TrialOutcome<T>>
where
    F: FnMut(&EventRecord<'_, T>),
{
    let (master_seed, trial_index) = (rng.master_seed(), rng.index());
    let initial = sample_configuration(g, space, dist, &mut rng)?;
    let mut trial = Trial::new(g, space, params, stopping, initial, rng)?;
    let center = space.center().coords();
    let norm = space.norm();
    let mut x_samples = Vec::new();
    let record = |trial: &Trial<'_, T>, samples: &mut Vec<(f64, T)>| {
        if options.record_samples {
            samples.push((trial.time(), analysis::total_disagreement_slice(trial.config(), center, norm)));
        }
    };
    record(&trial, &mut x_samples);

    let mut absorbed = false;
    while !trial.is_stopped() && trial.events() < stopping.max_events() {
        match trial.step() {
            Step::Absorbed => {
                absorbed = true;
                break;
            }
            Step::Fire { vertex, .. } => {
                record(&trial, &mut x_samples);
                observer(&EventRecord { event: trial.events(), time: trial.time(), vertex, config: trial.config() });
            }
        }
    }
    let stopped = trial.is_stopped();
    if stopped && trial.view().total_rate() == 0 {
        absorbed = true;
    }
    let consensus = trial.classify();
    let event_a = if stopped {
        analysis::check_event_a(trial.config(), space, params.tau(), stopping.eps_prime()).ok()
    } else {
        None
    };
    Ok(TrialOutcome {
        stopped,
        absorbed,
        stop_time: trial.time(),
        events: trial.events(),
        consensus,
        event_a,
        final_config: trial.config,
        x_samples,
        master_seed,
        trial_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind;
    use crate::space::ConvexShape;

    fn path(n: usize) -> SocialGraph {
        GraphKind::Path(n).generate(&mut RandomStream::from_seed(0)).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 0.0).is_err());
        assert!(ModelParams::new(0.5, 1.5).is_err());
        assert!(ModelParams::new(0.5, -0.1).is_err());
        assert!(ModelParams::new(0.5, 1.0).is_ok());
    }

    #[test]
    fn stopping_spec_ties_eps_to_vertex_count() {
        let s = StoppingSpec::new(0.08, 1.0, 4, 10).unwrap();
        assert_eq!(s.eps(), 0.02);
        assert!(StoppingSpec::new(0.5, 1.0, 4, 10).is_err());
        assert!(StoppingSpec::new(0.0, 1.0, 4, 10).is_err());
        assert!(StoppingSpec::new(0.1, 1.0, 4, 0).is_err());
    }

    #[test]
    fn default_eps_prime_rule() {
        assert!((StoppingSpec::default_eps_prime(0.8f64, 0.5) - 0.003).abs() < 1e-15);
        assert_eq!(StoppingSpec::default_eps_prime(0.4, 0.5), 0.1);
        assert!((StoppingSpec::default_eps_prime(0.6f64, 0.5) - 0.001).abs() < 1e-15);
        assert_eq!(StoppingSpec::default_eps_prime(40.0, 0.0), 0.4);
    }

    #[test]
    fn compatibility_examples() {
        let g = path(3);
        let cfg = Configuration::scalar(&[0.0, 0.4, 1.0]).unwrap();
        let view = compatibility(&cfg, &g, 0.5, NormSpec::L1);
        assert_eq!(view.neighbors(0), &[1]);
        assert_eq!(view.neighbors(1), &[0]);
        assert!(view.neighbors(2).is_empty());
        assert_eq!(view.rates(), &[1, 1, 0]);
        assert_eq!(view.total_rate(), 2);

        let k5 = GraphKind::Complete(5).generate(&mut RandomStream::from_seed(0)).unwrap();
        let same = Configuration::scalar(&[0.3; 5]).unwrap();
        let view = compatibility(&same, &k5, 0.01, NormSpec::L2);
        assert_eq!(view.total_rate(), 2 * k5.edge_count());
        for x in 0..5 {
            assert_eq!(view.neighbors(x), k5.neighbors(x));
        }
    }

    #[test]
    fn compatibility_boundary_is_closed() {
        let g = path(2);
        let cfg = Configuration::scalar(&[0.25, 0.75]).unwrap();
        let view = compatibility(&cfg, &g, 0.5, NormSpec::L1);
        assert_eq!(view.total_rate(), 2);
    }

    #[test]
    fn local_average_examples() {
        let star = SocialGraph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let cfg = Configuration::new(
            [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]
                .iter()
                .map(|c| OpinionVector::from_f64(c).unwrap())
                .collect(),
        )
        .unwrap();
        let view = compatibility(&cfg, &star, 2.0, NormSpec::L2);
        let avg: OpinionVector<f64> = local_average(&cfg, &view, 0).unwrap();
        assert!((avg.coords()[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!((avg.coords()[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(local_average(&cfg, &view, 2).unwrap().coords(), &[0.0, 0.0]);

        let g = path(3);
        let cfg = Configuration::scalar(&[0.0, 0.7, 1.0]).unwrap();
        let view = compatibility(&cfg, &g, 1.0, NormSpec::L1);
        assert_eq!(local_average(&cfg, &view, 1).unwrap().coords(), &[0.5]);
    }

    #[test]
    fn local_average_needs_a_compatible_neighbor() {
        let g = path(2);
        let cfg = Configuration::scalar(&[0.0, 1.0]).unwrap();
        let view = compatibility(&cfg, &g, 0.5, NormSpec::L1);
        assert!(matches!(local_average(&cfg, &view, 0), Err(Error::Usage(_))));
        let mut copy = cfg.clone();
        assert!(apply_update(&mut copy, &view, 0, 0.0).is_err());
    }

    #[test]
    fn apply_update_examples() {
        let g = path(2);
        let cfg = Configuration::scalar(&[0.0, 0.5]).unwrap();
        let view = compatibility(&cfg, &g, 0.5, NormSpec::L1);

        let mut stubborn = cfg.clone();
        apply_update(&mut stubborn, &view, 0, 1.0).unwrap();
        assert_eq!(stubborn, cfg);

        let mut open = cfg.clone();
        apply_update(&mut open, &view, 0, 0.0).unwrap();
        assert_eq!(open.opinion(0), &[0.5]);
        assert_eq!(open.opinion(1), &[0.5]);

        let mut half = cfg.clone();
        apply_update(&mut half, &view, 0, 0.5).unwrap();
        assert_eq!(half.opinion(0), &[0.25]);
    }

    #[test]
    fn gillespie_absorbs_at_zero_rate() {
        let g = path(3);
        let cfg = Configuration::scalar(&[0.0, 0.5, 1.0]).unwrap();
        let view = compatibility(&cfg, &g, 0.1, NormSpec::L1);
        assert_eq!(gillespie_step(&view, &mut RandomStream::from_seed(1)), Step::Absorbed);
    }

    #[test]
    fn gillespie_selection_frequencies_and_holding_times() {
        let g = path(3);
        let cfg = Configuration::scalar(&[0.0, 0.4, 1.0]).unwrap();
        let view = compatibility(&cfg, &g, 0.5, NormSpec::L1);
        let mut rng = RandomStream::from_seed(11);
        let n = 100_000;
        let mut counts = [0usize; 3];
        let mut dt_sum = 0.0;
        for _ in 0..n {
            match gillespie_step(&view, &mut rng) {
                Step::Fire { dt, vertex } => {
                    counts[vertex] += 1;
                    dt_sum += dt;
                }
                Step::Absorbed => panic!("positive total rate"),
            }
        }
        let freq: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        assert!((freq[0] - 0.5).abs() < 0.01 && (freq[1] - 0.5).abs() < 0.01);
        assert_eq!(counts[2], 0);
        let mean_dt = dt_sum / n as f64;
        assert!((mean_dt - 0.5).abs() < 0.02 * 0.5, "mean dt {mean_dt}");
    }

    #[test]
    fn stop_reached_examples() {
        let g = path(3);
        let spec = StoppingSpec::new(0.03, 0.5, 3, 100).unwrap();
        let eps = spec.eps();
        let equal = Configuration::scalar(&[0.2, 0.2, 0.2]).unwrap();
        assert!(stop_reached(&equal, &g, &spec, 0.5, NormSpec::L1));
        let at_eps = Configuration::scalar(&[0.0, eps, eps]).unwrap();
        assert!(!stop_reached(&at_eps, &g, &spec, 0.5, NormSpec::L1));
        let outside = Configuration::scalar(&[0.0, eps / 2.0, eps / 2.0 + 0.51]).unwrap();
        assert!(stop_reached(&outside, &g, &spec, 0.5, NormSpec::L1));
        let at_tau = Configuration::scalar(&[0.0, 0.0, 0.5]).unwrap();
        assert!(!stop_reached(&at_tau, &g, &spec, 0.5, NormSpec::L1));
    }

    fn unit_trial_parts() -> (OpinionSpace<f64>, InitialDistribution<f64>) {
        (OpinionSpace::unit_interval(), InitialDistribution::UniformShape)
    }

    #[test]
    fn two_vertices_within_tau_agree_after_one_event() {
        let g = path(2);
        let space = OpinionSpace::unit_interval();
        let dist = InitialDistribution::PointMasses(vec![
            (OpinionVector::from_f64(&[0.2]).unwrap(), 0.5),
            (OpinionVector::from_f64(&[0.6]).unwrap(), 0.5),
        ]);
        let params = ModelParams::new(0.5, 0.0).unwrap();
        let stopping = StoppingSpec::with_defaults(0.5, space.radius(), 2).unwrap();
        // Find a seed that draws two distinct atoms.
        let out = (0..64)
            .map(|s| {
                run_trial(&g, &space, &dist, params, stopping, RandomStream::new(s, 0), TrialOptions::default())
                    .unwrap()
            })
            .find(|o| o.events > 0)
            .expect("some seed draws distinct atoms");
        assert!(out.stopped);
        assert_eq!(out.events, 1);
        assert_eq!(out.consensus, Some(true));
        assert_eq!(out.final_config.opinion(0), out.final_config.opinion(1));
    }

    #[test]
    fn two_vertices_beyond_tau_freeze() {
        let g = path(2);
        let space = OpinionSpace::unit_interval();
        let dist = InitialDistribution::PointMasses(vec![
            (OpinionVector::from_f64(&[0.0]).unwrap(), 0.5),
            (OpinionVector::from_f64(&[1.0]).unwrap(), 0.5),
        ]);
        let params = ModelParams::new(0.5, 0.0).unwrap();
        let stopping = StoppingSpec::with_defaults(0.5, space.radius(), 2).unwrap();
        let out = (0..64)
            .map(|s| {
                run_trial(&g, &space, &dist, params, stopping, RandomStream::new(s, 0), TrialOptions::default())
                    .unwrap()
            })
            .find(|o| o.final_config.opinion(0) != o.final_config.opinion(1))
            .expect("some seed draws distinct atoms");
        assert!(out.stopped && out.absorbed);
        assert_eq!(out.events, 0);
        assert_eq!(out.consensus, Some(false));
    }

    #[test]
    fn run_trial_is_deterministic() {
        let g = GraphKind::Cycle(6).generate(&mut RandomStream::from_seed(0)).unwrap();
        let (space, dist) = unit_trial_parts();
        let params = ModelParams::new(0.8, 0.2).unwrap();
        let stopping = StoppingSpec::with_defaults(0.8, space.radius(), 6).unwrap();
        let run = || {
            run_trial(&g, &space, &dist, params, stopping, RandomStream::new(99, 5), TrialOptions::default()).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        assert_eq!(a.x_samples.len() as u64, a.events + 1);
        assert_eq!((a.master_seed, a.trial_index), (99, 5));
    }

    #[test]
    fn event_cap_leaves_outcome_undetermined() {
        let g = GraphKind::Path(10).generate(&mut RandomStream::from_seed(0)).unwrap();
        let (space, dist) = unit_trial_parts();
        let params = ModelParams::new(2.0, 0.0).unwrap();
        let stopping = StoppingSpec::with_defaults(2.0, space.radius(), 10).unwrap().with_max_events(3).unwrap();
        let out =
            run_trial(&g, &space, &dist, params, stopping, RandomStream::new(1, 0), TrialOptions::default()).unwrap();
        assert!(!out.stopped);
        assert_eq!(out.events, 3);
        assert_eq!(out.consensus, None);
        assert_eq!(out.event_a, None);
    }

    #[test]
    fn frozen_state_never_changes() {
        let g = path(3);
        let space = OpinionSpace::unit_interval();
        let cfg = Configuration::scalar(&[0.0, 0.5, 1.0]).unwrap();
        let params = ModelParams::new(0.3, 0.0).unwrap();
        let stopping = StoppingSpec::new(0.01, 0.3, 3, 100).unwrap();
        let mut trial = Trial::new(&g, &space, params, stopping, cfg.clone(), RandomStream::from_seed(0)).unwrap();
        assert_eq!(trial.view().total_rate(), 0);
        for _ in 0..10 {
            assert_eq!(trial.step(), Step::Absorbed);
        }
        assert_eq!(trial.config(), &cfg);
        assert_eq!(trial.events(), 0);
    }

    #[test]
    fn trial_rejects_inconsistent_configuration() {
        let g = path(3);
        let space = OpinionSpace::unit_interval();
        let params = ModelParams::new(0.3, 0.0).unwrap();
        let stopping = StoppingSpec::new(0.01, 0.3, 3, 100).unwrap();
        let short = Configuration::scalar(&[0.0, 0.5]).unwrap();
        assert!(Trial::new(&g, &space, params, stopping, short, RandomStream::from_seed(0)).is_err());
        let outside = Configuration::scalar(&[0.0, 0.5, 1.5]).unwrap();
        assert!(Trial::new(&g, &space, params, stopping, outside, RandomStream::from_seed(0)).is_err());
    }

    #[test]
    fn ball_space_trial_runs() {
        let g = GraphKind::Grid { width: 3, height: 3 }.generate(&mut RandomStream::from_seed(0)).unwrap();
        let shape = ConvexShape::ball(OpinionVector::from_f64(&[0.0, 0.0]).unwrap(), 1.0).unwrap();
        let space = OpinionSpace::new(shape, NormSpec::L2).unwrap();
        let params = ModelParams::new(1.5, 0.0).unwrap();
        let stopping = StoppingSpec::with_defaults(1.5, space.radius(), 9).unwrap();
        let out = run_trial(
            &g,
            &space,
            &InitialDistribution::UniformShape,
            params,
            stopping,
            RandomStream::new(3, 1),
            TrialOptions::default(),
        )
        .unwrap();
        assert!(out.stopped);
        for o in out.final_config.opinions() {
            assert!(space.contains_within(o, 1e-12));
        }
    }
}
