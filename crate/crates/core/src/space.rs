//! Geometry of the opinion set: norms, the Chebyshev center and radius of the
//! supported shapes, and sampling of initial opinions.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Rejection sampling gives up after this many proposals.
pub const MAX_REJECTIONS: usize = 1_000_000;

/// Largest dimension the rejection sampler is sized for.
pub const MAX_DIM: usize = 8;

const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// A point of the opinion space. Coordinates are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionVector<T>(Vec<T>);

impl<T: Scalar> OpinionVector<T> {
    pub fn new(coords: Vec<T>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::validation("opinion vector must have at least one coordinate"));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::validation(format!("coordinate {i} is not finite")));
        }
        Ok(OpinionVector(coords))
    }

    pub fn from_f64(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&c| T::lit(c)).collect())
    }

    pub(crate) fn from_vec_unchecked(coords: Vec<T>) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        OpinionVector(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }
}

impl<T> AsRef<[T]> for OpinionVector<T> {
    fn as_ref(&self) -> &[T] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormSpec {
    L1,
    L2,
    Linf,
}

impl NormSpec {
    pub const ALL: [NormSpec; 3] = [NormSpec::L1, NormSpec::L2, NormSpec::Linf];

    pub fn name(self) -> &'static str {
        match self {
            NormSpec::L1 => "l1",
            NormSpec::L2 => "l2",
            NormSpec::Linf => "linf",
        }
    }

    pub fn norm<T: Scalar>(self, v: &[T]) -> T {
        if v.len() == 1 {
            return v[0].abs();
        }
        match self {
            NormSpec::L1 => v.iter().map(|c| c.abs()).sum(),
            NormSpec::L2 => v.iter().map(|&c| c * c).sum::<T>().sqrt(),
            NormSpec::Linf => v.iter().fold(T::zero(), |m, c| m.max(c.abs())),
        }
    }

    /// `‖u − v‖` without a length check; callers guarantee equal dimensions.
    pub fn dist<T: Scalar>(self, u: &[T], v: &[T]) -> T {
        debug_assert_eq!(u.len(), v.len());
        if u.len() == 1 {
            return (u[0] - v[0]).abs();
        }
        let diffs = u.iter().zip(v).map(|(&a, &b)| a - b);
        match self {
            NormSpec::L1 => diffs.map(|d| d.abs()).sum(),
            NormSpec::L2 => diffs.map(|d| d * d).sum::<T>().sqrt(),
            NormSpec::Linf => diffs.fold(T::zero(), |m, d| m.max(d.abs())),
        }
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NormSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(NormSpec::L1),
            "l2" => Ok(NormSpec::L2),
            "linf" => Ok(NormSpec::Linf),
            other => Err(Error::usage(format!("unknown norm {other:?}; expected l1, l2 or linf"))),
        }
    }
}

/// Distance between two opinions under `norm`.
pub fn distance<T: Scalar>(u: &OpinionVector<T>, v: &OpinionVector<T>, norm: NormSpec) -> Result<T> {
    if u.dim() != v.dim() {
        return Err(Error::usage(format!("dimension mismatch: {} vs {}", u.dim(), v.dim())));
    }
    Ok(norm.dist(u.coords(), v.coords()))
}

/// The convex opinion set. A `Ball` is the ball of the space's own norm.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexShape<T> {
    Ball { center: OpinionVector<T>, radius: T },
    Box { lo: OpinionVector<T>, hi: OpinionVector<T> },
}

impl<T: Scalar> ConvexShape<T> {
    pub fn ball(center: OpinionVector<T>, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(Error::validation(format!("ball radius must be positive, got {radius}")));
        }
        Ok(ConvexShape::Ball { center, radius })
    }

    pub fn cube(lo: OpinionVector<T>, hi: OpinionVector<T>) -> Result<Self> {
        if lo.dim() != hi.dim() {
            return Err(Error::validation(format!("box corners differ in dimension: {} vs {}", lo.dim(), hi.dim())));
        }
        if let Some(i) = (0..lo.dim()).find(|&i| !(lo.0[i] < hi.0[i])) {
            return Err(Error::validation(format!("box requires lo < hi in coordinate {i}")));
        }
        Ok(ConvexShape::Box { lo, hi })
    }

    /// The unit interval `[0, 1]` as a one-dimensional box.
    pub fn unit_interval() -> Self {
        ConvexShape::Box { lo: OpinionVector(vec![T::zero()]), hi: OpinionVector(vec![T::one()]) }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexShape::Ball { center, .. } => center.dim(),
            ConvexShape::Box { lo, .. } => lo.dim(),
        }
    }

    /// Smallest axis-aligned box containing the shape (for any supported norm).
    pub fn bounding_box(&self) -> (Vec<T>, Vec<T>) {
        match self {
            ConvexShape::Ball { center, radius } => {
                (center.0.iter().map(|&c| c - *radius).collect(), center.0.iter().map(|&c| c + *radius).collect())
            }
            ConvexShape::Box { lo, hi } => (lo.0.clone(), hi.0.clone()),
        }
    }
}

/// Chebyshev center and radius of `shape` under `norm`.
///
/// For a ball this is its own center and radius. For a box the midpoint is
/// optimal for every supported norm, and the farthest point is a corner, so
/// the radius is the norm of the half-width vector.
pub fn center_and_radius<T: Scalar>(shape: &ConvexShape<T>, norm: NormSpec) -> (OpinionVector<T>, T) {
    match shape {
        ConvexShape::Ball { center, radius } => (center.clone(), *radius),
        ConvexShape::Box { lo, hi } => {
            let two = T::lit(2.0);
            let mid = lo.0.iter().zip(&hi.0).map(|(&l, &h)| l + (h - l) / two).collect();
            let half: Vec<T> = lo.0.iter().zip(&hi.0).map(|(&l, &h)| (h - l) / two).collect();
            (OpinionVector(mid), norm.norm(&half))
        }
    }
}

/// The opinion set together with its norm and its center `ĉ` / radius `ρ̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionSpace<T> {
    norm: NormSpec,
    shape: ConvexShape<T>,
    center: OpinionVector<T>,
    radius: T,
}

impl<T: Scalar> OpinionSpace<T> {
    pub fn new(shape: ConvexShape<T>, norm: NormSpec) -> Result<Self> {
        if shape.dim() > MAX_DIM {
            return Err(Error::validation(format!(
                "dimension {} exceeds the supported maximum {MAX_DIM}",
                shape.dim()
            )));
        }
        let (center, radius) = center_and_radius(&shape, norm);
        Ok(OpinionSpace { norm, shape, center, radius })
    }

    /// `[0, 1]` with the absolute-value distance.
    pub fn unit_interval() -> Self {
        Self::new(ConvexShape::unit_interval(), NormSpec::L1).expect("valid unit interval")
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn norm(&self) -> NormSpec {
        self.norm
    }

    pub fn shape(&self) -> &ConvexShape<T> {
        &self.shape
    }

    pub fn center(&self) -> &OpinionVector<T> {
        &self.center
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn contains(&self, p: &[T]) -> bool {
        self.contains_within(p, T::zero())
    }

    /// Membership with an absolute slack `tol`, for points produced by
    /// floating-point convex combinations.
    pub fn contains_within(&self, p: &[T], tol: T) -> bool {
        if p.len() != self.dim() {
            return false;
        }
        match &self.shape {
            ConvexShape::Ball { center, radius } => self.norm.dist(p, center.coords()) <= *radius + tol,
            ConvexShape::Box { lo, hi } => {
                p.iter().zip(lo.coords().iter().zip(hi.coords())).all(|(&x, (&l, &h))| x >= l - tol && x <= h + tol)
            }
        }
    }
}

/// Law of the i.i.d. initial opinions.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDistribution<T> {
    /// Uniform (Lebesgue) law on the space's shape.
    UniformShape,
    /// Finitely many atoms with positive probabilities summing to one.
    PointMasses(Vec<(OpinionVector<T>, T)>),
}

impl<T: Scalar> InitialDistribution<T> {
    pub fn validate(&self, space: &OpinionSpace<T>) -> Result<()> {
        let InitialDistribution::PointMasses(atoms) = self else {
            return Ok(());
        };
        if atoms.is_empty() {
            return Err(Error::validation("point_masses needs at least one atom"));
        }
        let mut total = 0.0;
        for (i, (at, p)) in atoms.iter().enumerate() {
            if !(*p > T::zero()) {
                return Err(Error::validation(format!("atom {i} has nonpositive probability {p}")));
            }
            if at.dim() != space.dim() {
                return Err(Error::validation(format!(
                    "atom {i} has dimension {}, space has {}",
                    at.dim(),
                    space.dim()
                )));
            }
            if !space.contains(at.coords()) {
                return Err(Error::validation(format!("atom {i} lies outside the opinion space")));
            }
            total += p.to_f64_lossy();
        }
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::validation(format!("point mass probabilities sum to {total}, not 1")));
        }
        Ok(())
    }
}

fn uniform_in<T: Scalar, R: Rng + ?Sized>(lo: T, hi: T, rng: &mut R) -> T {
    let (l, h) = (lo.to_f64_lossy(), hi.to_f64_lossy());
    let u: f64 = rng.random();
    T::lit(l + (h - l) * u).max(lo).min(hi)
}

/// Draws one initial opinion from `dist`.
pub fn sample_initial<T: Scalar, R: Rng + ?Sized>(
    dist: &InitialDistribution<T>,
    space: &OpinionSpace<T>,
    rng: &mut R,
) -> Result<OpinionVector<T>> {
    match dist {
        InitialDistribution::PointMasses(atoms) => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (at, p) in atoms {
                acc += p.to_f64_lossy();
                if u < acc {
                    return Ok(at.clone());
                }
            }
            // u landed in the rounding gap just below 1.
            Ok(atoms.last().map(|(at, _)| at.clone()).expect("validated nonempty"))
        }
        InitialDistribution::UniformShape => match space.shape() {
            ConvexShape::Box { lo, hi } => {
                Ok(OpinionVector(lo.coords().iter().zip(hi.coords()).map(|(&l, &h)| uniform_in(l, h, rng)).collect()))
            }
            ConvexShape::Ball { center, radius } => {
                let (lo, hi) = space.shape().bounding_box();
                for _ in 0..MAX_REJECTIONS {
                    let p: Vec<T> = lo.iter().zip(&hi).map(|(&l, &h)| uniform_in(l, h, rng)).collect();
                    if space.norm().dist(&p, center.coords()) <= *radius {
                        return Ok(OpinionVector(p));
                    }
                }
                Err(Error::Internal(format!("ball rejection sampler exceeded {MAX_REJECTIONS} proposals")))
            }
        },
    }
}

/// Monte Carlo average of `‖X − ĉ‖` over `samples` draws from `dist`.
pub fn monte_carlo_center_distance<T: Scalar, R: Rng + ?Sized>(
    dist: &InitialDistribution<T>,
    space: &OpinionSpace<T>,
    samples: usize,
    rng: &mut R,
) -> Result<T> {
    if samples == 0 {
        return Err(Error::usage("monte carlo estimate needs at least one sample"));
    }
    let mut sum = 0.0f64;
    for _ in 0..samples {
        let x = sample_initial(dist, space, rng)?;
        sum += space.norm().dist(x.coords(), space.center().coords()).to_f64_lossy();
    }
    Ok(T::lit(sum / samples as f64))
}

/// `E‖X − ĉ‖` for the initial law.
///
/// Exact for a uniform ball (`n·r/(n+1)`), for point masses, and for a uniform
/// box under L1 (`Σ wᵢ/4`, coordinates being independent). Uniform boxes under
/// L2 or L∞ fall back to a Monte Carlo average over `samples` draws.
pub fn expected_center_distance<T: Scalar, R: Rng + ?Sized>(
    dist: &InitialDistribution<T>,
    space: &OpinionSpace<T>,
    samples: usize,
    rng: &mut R,
) -> Result<T> {
    dist.validate(space)?;
    let c = space.center().coords();
    match (dist, space.shape()) {
        (InitialDistribution::PointMasses(atoms), _) => {
            Ok(atoms.iter().map(|(a, p)| *p * space.norm().dist(a.coords(), c)).sum())
        }
        (InitialDistribution::UniformShape, ConvexShape::Ball { radius, .. }) => {
            let n = T::from_usize(space.dim()).expect("small dimension");
            Ok(n * *radius / (n + T::one()))
        }
        (InitialDistribution::UniformShape, ConvexShape::Box { lo, hi })
            if space.dim() == 1 || space.norm() == NormSpec::L1 =>
        {
            let four = T::lit(4.0);
            Ok(lo.coords().iter().zip(hi.coords()).map(|(&l, &h)| (h - l) / four).sum())
        }
        (InitialDistribution::UniformShape, ConvexShape::Box { .. }) => {
            monte_carlo_center_distance(dist, space, samples, rng)
        }
    }
}
