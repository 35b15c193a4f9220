//! Observables of the process: the total disagreement `X_t(c)` and its
//! generator drift, the limit graph, the consensus proxy at `T_ε`, the event
//! `A`, and the lower bound on the consensus probability.

use crate::dynamics::{compatibility, updated_opinion, Configuration, StoppingSpec};
use crate::error::{Error, Result};
use crate::graph::{components, SocialGraph};
use crate::scalar::Scalar;
use crate::space::{NormSpec, OpinionSpace, OpinionVector};

fn check_dim<T: Scalar>(config: &Configuration<T>, c: &OpinionVector<T>) -> Result<()> {
    if c.dim() != config.dim() {
        return Err(Error::usage(format!("reference point has dimension {}, opinions have {}", c.dim(), config.dim())));
    }
    Ok(())
}

/// `X(c) = Σₓ ‖ξ(x) − c‖`.
pub fn total_disagreement<T: Scalar>(config: &Configuration<T>, c: &OpinionVector<T>, norm: NormSpec) -> Result<T> {
    check_dim(config, c)?;
    Ok(total_disagreement_slice(config, c.coords(), norm))
}

pub(crate) fn total_disagreement_slice<T: Scalar>(config: &Configuration<T>, c: &[T], norm: NormSpec) -> T {
    config.opinions().map(|o| norm.dist(o, c)).sum()
}

/// Instantaneous expected rate of change of `X(c)` for the open-minded
/// model (`α = 0`):
///
/// `Σₓ |N(x)| · (‖ξ̄(x) − c‖ − ‖ξ(x) − c‖)`.
///
/// Nonpositive for every configuration and every `c`, up to rounding.
pub fn generator_drift<T: Scalar>(
    config: &Configuration<T>,
    g: &SocialGraph,
    tau: T,
    norm: NormSpec,
    c: &OpinionVector<T>,
) -> Result<T> {
    generator_drift_with_stubbornness(config, g, tau, T::zero(), norm, c)
}

/// Drift of `X(c)` when the updated opinion is `α·ξ(x) + (1 − α)·ξ̄(x)`.
pub fn generator_drift_with_stubbornness<T: Scalar>(
    config: &Configuration<T>,
    g: &SocialGraph,
    tau: T,
    alpha: T,
    norm: NormSpec,
    c: &OpinionVector<T>,
) -> Result<T> {
    check_dim(config, c)?;
    let view = compatibility(config, g, tau, norm);
    let mut drift = T::zero();
    for x in 0..g.vertex_count() {
        let rate = view.rate(x);
        if rate == 0 {
            continue;
        }
        let new = updated_opinion(config, &view, x, alpha)?;
        let change = norm.dist(&new, c.coords()) - norm.dist(config.opinion(x), c.coords());
        drift += T::from_usize(rate).expect("rate fits the scalar") * change;
    }
    Ok(drift)
}

/// Edges whose endpoints are within `τ`, and the components they span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitGraph {
    pub edges: Vec<(usize, usize)>,
    pub components: Vec<Vec<usize>>,
}

pub fn limit_graph<T: Scalar>(config: &Configuration<T>, g: &SocialGraph, tau: T, norm: NormSpec) -> LimitGraph {
    let edges: Vec<(usize, usize)> =
        g.edges().iter().copied().filter(|&(x, y)| norm.dist(config.opinion(x), config.opinion(y)) <= tau).collect();
    let components = components(g.vertex_count(), edges.iter().copied());
    LimitGraph { edges, components }
}

/// Components of the graph restricted to edges with distance strictly below `eps`.
pub fn agreement_components<T: Scalar>(
    config: &Configuration<T>,
    g: &SocialGraph,
    eps: T,
    norm: NormSpec,
) -> Vec<Vec<usize>> {
    components(
        g.vertex_count(),
        g.edges().iter().copied().filter(|&(x, y)| norm.dist(config.opinion(x), config.opinion(y)) < eps),
    )
}

/// Consensus proxy at a stopping configuration: every edge is either an
/// agreement edge (`< ε`) or frozen (`> τ`), so consensus holds iff the
/// agreement edges span one component.
pub fn classify_consensus<T: Scalar>(
    config: &Configuration<T>,
    g: &SocialGraph,
    spec: &StoppingSpec<T>,
    tau: T,
    norm: NormSpec,
) -> Result<bool> {
    if !crate::dynamics::stop_reached(config, g, spec, tau, norm) {
        return Err(Error::usage("consensus is only classified at a stopping configuration"));
    }
    Ok(agreement_components(config, g, spec.eps(), norm).len() == 1)
}

/// Whether some opinion lies strictly within `τ − ρ̂ − ε′` of the center.
pub fn check_event_a<T: Scalar>(
    config: &Configuration<T>,
    space: &OpinionSpace<T>,
    tau: T,
    eps_prime: T,
) -> Result<bool> {
    let threshold = tau - space.radius() - eps_prime;
    if !(threshold > T::zero()) {
        return Err(Error::usage(format!(
            "event A needs tau > rho + eps_prime ({tau} <= {} + {eps_prime})",
            space.radius()
        )));
    }
    if config.dim() != space.dim() {
        return Err(Error::usage("configuration and space dimensions differ"));
    }
    let c = space.center().coords();
    Ok(config.opinions().any(|o| space.norm().dist(o, c) < threshold))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs<T> {
    /// `E‖X − ĉ‖`.
    pub expected_dist: T,
    pub tau: T,
    /// `ρ̂`.
    pub rho: T,
}

/// `max(0, 1 − E‖X − ĉ‖ / (τ − ρ̂))`; defined for `τ > ρ̂` only.
pub fn theoretical_bound<T: Scalar>(inputs: &BoundInputs<T>) -> Result<T> {
    if !(inputs.tau > inputs.rho) {
        return Err(Error::usage(format!(
            "the bound requires tau > rho, got tau = {} and rho = {}",
            inputs.tau, inputs.rho
        )));
    }
    if !(inputs.expected_dist >= T::zero()) {
        return Err(Error::usage("expected distance must be nonnegative"));
    }
    let b = T::one() - inputs.expected_dist / (inputs.tau - inputs.rho);
    Ok(b.max(T::zero()).min(T::one()))
}

/// A breach of the edge structure every stopping configuration must have.
#[derive(Debug, Clone, PartialEq)]
pub enum StructureViolation {
    /// An edge with distance inside `[ε, τ]`.
    EdgeInBand { edge: (usize, usize), distance: f64 },
    /// An agreement component whose spread reaches `ε·(|V| − 1)`.
    ComponentSpread { members: Vec<usize>, spread: f64, limit: f64 },
}

/// Checks a stopping configuration: no edge distance in `[ε, τ]`, and within
/// each `ε`-agreement component every pairwise distance below `ε·(|V| − 1)`.
pub fn stopping_structure<T: Scalar>(
    config: &Configuration<T>,
    g: &SocialGraph,
    spec: &StoppingSpec<T>,
    tau: T,
    norm: NormSpec,
) -> Vec<StructureViolation> {
    let mut out = Vec::new();
    for &(x, y) in g.edges() {
        let d = norm.dist(config.opinion(x), config.opinion(y));
        if d >= spec.eps() && d <= tau {
            out.push(StructureViolation::EdgeInBand { edge: (x, y), distance: d.to_f64_lossy() });
        }
    }
    let n = g.vertex_count();
    if n < 2 {
        return out;
    }
    let limit = spec.eps() * T::from_usize(n - 1).expect("vertex count fits the scalar");
    for members in agreement_components(config, g, spec.eps(), norm) {
        let mut spread = T::zero();
        for (i, &x) in members.iter().enumerate() {
            for &y in &members[i + 1..] {
                spread = spread.max(norm.dist(config.opinion(x), config.opinion(y)));
            }
        }
        if members.len() > 1 && !(spread < limit) {
            out.push(StructureViolation::ComponentSpread {
                members,
                spread: spread.to_f64_lossy(),
                limit: limit.to_f64_lossy(),
            });
        }
    }
    out
}
