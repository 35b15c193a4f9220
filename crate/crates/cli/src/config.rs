//! The JSON experiment config and its resolution into core types.

use std::path::{Path, PathBuf};

use hkc_core::dynamics::{ModelParams, StoppingSpec, DEFAULT_MAX_EVENTS};
use hkc_core::graph::{parse_edge_list, GraphKind, SocialGraph};
use hkc_core::montecarlo::{ExperimentSpec, DEFAULT_EXPECTATION_SAMPLES};
use hkc_core::space::{ConvexShape, InitialDistribution, NormSpec, OpinionSpace, OpinionVector};
use hkc_core::RandomStream;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Stream reserved for drawing a random network, disjoint from trial streams.
const GRAPH_STREAM: u64 = u64::MAX - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKindName {
    Path,
    Cycle,
    Complete,
    Grid,
    ErdosRenyi,
    File,
}

/// `{kind, n | w,h | n,p | file}`. Kept flat rather than an internally
/// tagged enum so numbers are not buffered through serde's content type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub kind: GraphKindName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl GraphConfig {
    fn check_keys(&self, required: &[&str]) -> Result<(), CliError> {
        let present = [
            ("n", self.n.is_some()),
            ("w", self.w.is_some()),
            ("h", self.h.is_some()),
            ("p", self.p.is_some()),
            ("file", self.file.is_some()),
        ];
        for (key, is_set) in present {
            match (required.contains(&key), is_set) {
                (true, false) => return Err(CliError::config(format!("graph.{key}"), "missing")),
                (false, true) => {
                    return Err(CliError::config(format!("graph.{key}"), format!("not used by kind {:?}", self.kind)))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormConfig {
    L1,
    L2,
    Linf,
}

impl From<NormConfig> for NormSpec {
    fn from(n: NormConfig) -> Self {
        match n {
            NormConfig::L1 => NormSpec::L1,
            NormConfig::L2 => NormSpec::L2,
            NormConfig::Linf => NormSpec::Linf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeConfig {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub dim: usize,
    pub norm: NormConfig,
    pub shape: ShapeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub at: Vec<f64>,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitConfig {
    Uniform,
    PointMasses(Vec<Atom>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    pub graph: GraphConfig,
    pub space: SpaceConfig,
    pub init: InitConfig,
    pub tau: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default)]
    pub eps_prime: Option<f64>,
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_events")]
    pub max_events: u64,
}

fn default_max_events() -> u64 {
    DEFAULT_MAX_EVENTS
}

impl CliConfig {
    /// Parses config text; errors name the JSON path of the offending key.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let key = if e.inner().is_syntax() || e.inner().is_eof() {
                "<json>".to_string()
            } else {
                match e.path().to_string().as_str() {
                    "." | "?" => "<root>".to_string(),
                    path => path.to_string(),
                }
            };
            CliError::config(key, e.into_inner())
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

fn opinion(coords: &[f64], key: &str, dim: usize) -> Result<OpinionVector<f64>, CliError> {
    if coords.len() != dim {
        return Err(CliError::config(key, format!("expected {dim} coordinates, got {}", coords.len())));
    }
    OpinionVector::from_f64(coords).map_err(|e| CliError::config(key, e))
}

/// A config resolved into validated core objects.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: CliConfig,
    pub spec: ExperimentSpec<f64>,
}

impl Resolved {
    /// `base_dir` anchors relative edge-list paths.
    pub fn new(config: CliConfig, base_dir: &Path) -> Result<Self, CliError> {
        let space = resolve_space(&config.space)?;
        let init = resolve_init(&config.init, &space)?;
        let graph = resolve_graph(&config.graph, config.seed, base_dir)?;
        let params = ModelParams::new(config.tau, config.alpha).map_err(|e| {
            let key = if config.tau > 0.0 && config.tau.is_finite() { "alpha" } else { "tau" };
            CliError::config(key, e)
        })?;
        let eps_prime = config.eps_prime.unwrap_or_else(|| StoppingSpec::default_eps_prime(config.tau, space.radius()));
        if config.max_events == 0 {
            return Err(CliError::config("max_events", "must be positive"));
        }
        let stopping = StoppingSpec::new(eps_prime, config.tau, graph.vertex_count(), config.max_events)
            .map_err(|e| CliError::config("eps_prime", e))?;
        if config.trials == Some(0) {
            return Err(CliError::config("trials", "must be at least 1"));
        }
        let spec = ExperimentSpec {
            graph,
            space,
            init,
            params,
            stopping,
            trials: config.trials.unwrap_or(1),
            master_seed: config.seed,
            expectation_samples: DEFAULT_EXPECTATION_SAMPLES,
        };
        Ok(Resolved { config, spec })
    }
}

fn resolve_space(cfg: &SpaceConfig) -> Result<OpinionSpace<f64>, CliError> {
    if cfg.dim == 0 {
        return Err(CliError::config("space.dim", "must be positive"));
    }
    let shape = match &cfg.shape {
        ShapeConfig::Ball { center, radius } => {
            let center = opinion(center, "space.shape.ball.center", cfg.dim)?;
            ConvexShape::ball(center, *radius).map_err(|e| CliError::config("space.shape.ball.radius", e))?
        }
        ShapeConfig::Box { lo, hi } => {
            let lo = opinion(lo, "space.shape.box.lo", cfg.dim)?;
            let hi = opinion(hi, "space.shape.box.hi", cfg.dim)?;
            ConvexShape::cube(lo, hi).map_err(|e| CliError::config("space.shape.box", e))?
        }
    };
    OpinionSpace::new(shape, cfg.norm.into()).map_err(|e| CliError::config("space.dim", e))
}

fn resolve_init(cfg: &InitConfig, space: &OpinionSpace<f64>) -> Result<InitialDistribution<f64>, CliError> {
    let init = match cfg {
        InitConfig::Uniform => InitialDistribution::UniformShape,
        InitConfig::PointMasses(atoms) => InitialDistribution::PointMasses(
            atoms
                .iter()
                .enumerate()
                .map(|(i, a)| Ok((opinion(&a.at, &format!("init.point_masses[{i}].at"), space.dim())?, a.p)))
                .collect::<Result<_, CliError>>()?,
        ),
    };
    init.validate(space).map_err(|e| CliError::config("init.point_masses", e))?;
    Ok(init)
}

fn resolve_graph(cfg: &GraphConfig, seed: u64, base_dir: &Path) -> Result<SocialGraph, CliError> {
    let kind = match cfg.kind {
        GraphKindName::Path | GraphKindName::Cycle | GraphKindName::Complete => {
            cfg.check_keys(&["n"])?;
            let n = cfg.n.expect("checked");
            match cfg.kind {
                GraphKindName::Path => GraphKind::Path(n),
                GraphKindName::Cycle => GraphKind::Cycle(n),
                _ => GraphKind::Complete(n),
            }
        }
        GraphKindName::Grid => {
            cfg.check_keys(&["w", "h"])?;
            GraphKind::Grid { width: cfg.w.expect("checked"), height: cfg.h.expect("checked") }
        }
        GraphKindName::ErdosRenyi => {
            cfg.check_keys(&["n", "p"])?;
            GraphKind::ErdosRenyi { n: cfg.n.expect("checked"), p: cfg.p.expect("checked") }
        }
        GraphKindName::File => {
            cfg.check_keys(&["file"])?;
            let file = cfg.file.as_ref().expect("checked");
            let path = if file.is_absolute() { file.clone() } else { base_dir.join(file) };
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::config("graph.file", format!("cannot read {}: {e}", path.display())))?;
            return parse_edge_list(&text).map_err(|e| CliError::config("graph.file", e));
        }
    };
    kind.generate(&mut RandomStream::new(seed, GRAPH_STREAM)).map_err(|e| CliError::config("graph", e))
}
