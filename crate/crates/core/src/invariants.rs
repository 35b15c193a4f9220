//! Randomized check that the generator drift of `X(c)` is never positive.
//!
//! Each case draws a connected graph with at most 20 vertices, an opinion
//! dimension in `1..=3`, a norm, a threshold `τ` and a configuration, then
//! evaluates the drift at every corner of the bounding box of the opinion
//! set and at ten random points around it.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::analysis::generator_drift;
use crate::dynamics::Configuration;
use crate::error::{Error, Result};
use crate::graph::{GraphKind, SocialGraph};
use crate::rng::RandomStream;
use crate::scalar::Scalar;
use crate::space::{sample_initial, ConvexShape, InitialDistribution, NormSpec, OpinionSpace, OpinionVector};

/// Largest drift accepted as rounding noise.
pub const DRIFT_TOLERANCE: f64 = 1e-9;

pub const MAX_CASE_VERTICES: usize = 20;

const RANDOM_POINTS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct DriftCase<T> {
    pub index: u64,
    pub graph: SocialGraph,
    pub norm: NormSpec,
    pub tau: T,
    pub config: Configuration<T>,
    pub points: Vec<OpinionVector<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftSummary {
    pub cases: u64,
    pub evaluations: u64,
    pub max_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftViolation<T> {
    /// The failing case after shrinking.
    pub case: DriftCase<T>,
    pub point: OpinionVector<T>,
    pub drift: f64,
}

/// Corners of the axis-aligned box `[lo, hi]`.
pub fn box_corners<T: Scalar>(lo: &[T], hi: &[T]) -> Vec<OpinionVector<T>> {
    let n = lo.len();
    (0..1usize << n)
        .map(|mask| {
            OpinionVector::from_vec_unchecked((0..n).map(|i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }).collect())
        })
        .collect()
}

fn random_graph<R: Rng + ?Sized>(rng: &mut R) -> Result<SocialGraph> {
    let n = rng.random_range(1..=MAX_CASE_VERTICES);
    let kind = match rng.random_range(0..5) {
        0 => GraphKind::Path(n),
        1 if n >= 3 => GraphKind::Cycle(n),
        2 => GraphKind::Complete(n.min(12)),
        3 => {
            let width = rng.random_range(1..=5);
            GraphKind::Grid { width, height: rng.random_range(1..=4) }
        }
        _ => GraphKind::ErdosRenyi { n, p: rng.random_range(0.25..0.9) },
    };
    kind.generate(rng)
}

/// Draws case number `index` of the stream seeded by `seed`. Case 0 always
/// has all opinions equal.
pub fn generate_case<T: Scalar>(seed: u64, index: u64) -> Result<DriftCase<T>> {
    let mut rng = RandomStream::new(seed, index);
    let graph = random_graph(&mut rng)?;
    let dim = rng.random_range(1..=3);
    let norm = *NormSpec::ALL.choose(&mut rng).expect("nonempty");
    let lo = OpinionVector::new(vec![T::zero(); dim])?;
    let hi = OpinionVector::new(vec![T::one(); dim])?;
    let shape = if rng.random_bool(0.5) {
        ConvexShape::cube(lo, hi)?
    } else {
        ConvexShape::ball(OpinionVector::new(vec![T::lit(0.5); dim])?, T::lit(0.5))?
    };
    let space = OpinionSpace::new(shape, norm)?;
    let n = graph.vertex_count();
    let uniform = InitialDistribution::UniformShape;

    let mode = if index == 0 { 0 } else { rng.random_range(0..10) };
    let opinions: Vec<OpinionVector<T>> = match mode {
        0 => {
            let x = sample_initial(&uniform, &space, &mut rng)?;
            vec![x; n]
        }
        1..=3 => {
            // A few clusters with tight jitter, so many edges sit near τ or 0.
            let k = rng.random_range(1..=3);
            let centers = (0..k).map(|_| sample_initial(&uniform, &space, &mut rng)).collect::<Result<Vec<_>>>()?;
            (0..n)
                .map(|_| {
                    let c = centers.choose(&mut rng).expect("nonempty");
                    let jitter = T::lit(rng.random_range(0.0..0.02));
                    let p: Vec<T> =
                        c.coords().iter().map(|&v| v + jitter * T::lit(rng.random_range(-1.0..1.0))).collect();
                    if space.contains(&p) {
                        OpinionVector::new(p)
                    } else {
                        Ok(c.clone())
                    }
                })
                .collect::<Result<_>>()?
        }
        _ => (0..n).map(|_| sample_initial(&uniform, &space, &mut rng)).collect::<Result<_>>()?,
    };
    let config = Configuration::new(opinions)?;

    let diameter = T::lit(2.0) * space.radius();
    let tau = diameter * T::lit(rng.random_range(0.02..1.2));

    let (blo, bhi) = space.shape().bounding_box();
    let mut points = box_corners(&blo, &bhi);
    for _ in 0..RANDOM_POINTS {
        points.push(OpinionVector::new((0..dim).map(|_| T::lit(rng.random_range(-1.0..2.0))).collect())?);
    }
    Ok(DriftCase { index, graph, norm, tau, config, points })
}

/// Largest drift over the case's points, with the point that attains it.
pub fn worst_point<T: Scalar>(case: &DriftCase<T>) -> Result<(usize, f64)> {
    let mut worst = (0, f64::NEG_INFINITY);
    for (i, c) in case.points.iter().enumerate() {
        let d = generator_drift(&case.config, &case.graph, case.tau, case.norm, c)?.to_f64_lossy();
        if d > worst.1 {
            worst = (i, d);
        }
    }
    Ok(worst)
}

fn without_vertex<T: Scalar>(case: &DriftCase<T>, v: usize) -> Option<DriftCase<T>> {
    let n = case.graph.vertex_count();
    if n <= 1 {
        return None;
    }
    let relabel = |x: usize| if x > v { x - 1 } else { x };
    let edges = case.graph.edges().iter().filter(|&&(a, b)| a != v && b != v).map(|&(a, b)| (relabel(a), relabel(b)));
    let graph = SocialGraph::from_edges(n - 1, edges).ok()?;
    let opinions = case.config.to_vectors().into_iter().enumerate().filter(|&(x, _)| x != v).map(|(_, o)| o).collect();
    Some(DriftCase { graph, config: Configuration::new(opinions).ok()?, ..case.clone() })
}

/// Greedily deletes vertices and points while `fails` keeps holding.
pub fn shrink<T, F>(mut case: DriftCase<T>, mut fails: F) -> DriftCase<T>
where
    T: Scalar,
    F: FnMut(&DriftCase<T>) -> bool,
{
    loop {
        let mut progressed = false;
        let mut v = 0;
        while v < case.graph.vertex_count() {
            match without_vertex(&case, v) {
                Some(smaller) if fails(&smaller) => {
                    case = smaller;
                    progressed = true;
                }
                _ => v += 1,
            }
        }
        let mut i = 0;
        while case.points.len() > 1 && i < case.points.len() {
            let mut smaller = case.clone();
            smaller.points.remove(i);
            if fails(&smaller) {
                case = smaller;
                progressed = true;
            } else {
                i += 1;
            }
        }
        if !progressed {
            return case;
        }
    }
}

/// Runs `cases` random drift checks. Returns the first violation, shrunk.
pub fn check_drift<T: Scalar>(cases: u64, seed: u64) -> Result<std::result::Result<DriftSummary, DriftViolation<T>>> {
    if cases == 0 {
        return Err(Error::usage("--cases must be at least 1"));
    }
    let mut summary = DriftSummary { cases, evaluations: 0, max_drift: f64::NEG_INFINITY };
    for index in 0..cases {
        let case = generate_case::<T>(seed, index)?;
        summary.evaluations += case.points.len() as u64;
        let (_, drift) = worst_point(&case)?;
        summary.max_drift = summary.max_drift.max(drift);
        if drift > DRIFT_TOLERANCE {
            let shrunk = shrink(case, |c| worst_point(c).map(|(_, d)| d > DRIFT_TOLERANCE).unwrap_or(false));
            let (i, drift) = worst_point(&shrunk)?;
            let point = shrunk.points[i].clone();
            return Ok(Err(DriftViolation { case: shrunk, point, drift }));
        }
    }
    Ok(Ok(summary))
}
