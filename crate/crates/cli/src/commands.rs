//! Subcommand implementations. Each returns the text for standard output
//! and an exit code; nothing is printed until the command has finished.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use hkc_core::analysis::{self, agreement_components};
use hkc_core::dynamics::{run_trial_observed, TrialOptions};
use hkc_core::invariants::{check_drift, DRIFT_TOLERANCE};
use hkc_core::montecarlo::{run_estimate, MonteCarloReport};
use hkc_core::trace::TraceWriter;
use hkc_core::RandomStream;
use serde_json::{json, Value};

use crate::config::{CliConfig, Resolved};
use crate::error::{CliError, EXIT_OK, EXIT_VIOLATION};
use crate::json::{num, opt_num, render, vector};

pub const CLASSIFICATION: &str = "T_eps_proxy";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub exit_code: i32,
}

/// Loads a config file, applying a seed override when given.
pub fn load(path: &Path, seed_override: Option<u64>) -> Result<Resolved, CliError> {
    let mut config = CliConfig::from_file(path)?;
    if let Some(seed) = seed_override {
        config.seed = seed;
    }
    let base = path.parent().unwrap_or(Path::new("."));
    Resolved::new(config, base)
}

fn echo(r: &Resolved) -> Value {
    let spec = &r.spec;
    json!({
        "graph": serde_json::to_value(&r.config.graph).expect("graph config serializes"),
        "vertex_count": spec.graph.vertex_count(),
        "edge_count": spec.graph.edge_count(),
        "space": {
            "dim": spec.space.dim(),
            "norm": spec.space.norm().name(),
            "shape": shape_echo(&r.config.space.shape),
            "center": vector(spec.space.center().coords()),
            "radius": num(spec.space.radius()),
        },
        "init": init_echo(&r.config),
        "tau": num(spec.params.tau()),
        "alpha": num(spec.params.alpha()),
        "eps_prime": num(spec.stopping.eps_prime()),
        "eps": num(spec.stopping.eps()),
        "max_events": spec.stopping.max_events(),
    })
}

fn shape_echo(shape: &crate::config::ShapeConfig) -> Value {
    match shape {
        crate::config::ShapeConfig::Ball { center, radius } => {
            json!({"ball": {"center": vector(center), "radius": num(*radius)}})
        }
        crate::config::ShapeConfig::Box { lo, hi } => json!({"box": {"lo": vector(lo), "hi": vector(hi)}}),
    }
}

fn init_echo(cfg: &CliConfig) -> Value {
    match &cfg.init {
        crate::config::InitConfig::Uniform => json!("uniform"),
        crate::config::InitConfig::PointMasses(atoms) => json!({
            "point_masses": atoms.iter().map(|a| json!({"at": vector(&a.at), "p": num(a.p)})).collect::<Vec<_>>()
        }),
    }
}

/// Runs trial 0 of the configured experiment.
pub fn simulate(resolved: &Resolved, trace: Option<&Path>) -> Result<Output, CliError> {
    let spec = &resolved.spec;
    let rng = RandomStream::new(spec.master_seed, 0);
    let options = TrialOptions { record_samples: true };
    let outcome = match trace {
        Some(path) => {
            let file = BufWriter::new(File::create(path)?);
            let mut writer = TraceWriter::new(file, spec.space.center().coords(), spec.space.norm())?;
            let outcome = run_trial_observed(
                &spec.graph,
                &spec.space,
                &spec.init,
                spec.params,
                spec.stopping,
                rng,
                options,
                |ev| writer.record(ev),
            )?;
            writer.finish()?;
            outcome
        }
        None => {
            run_trial_observed(&spec.graph, &spec.space, &spec.init, spec.params, spec.stopping, rng, options, |_| {})?
        }
    };

    let norm = spec.space.norm();
    let fin = &outcome.final_config;
    let event_a_applicable = spec.params.tau() - spec.space.radius() - spec.stopping.eps_prime() > 0.0;
    let limit = analysis::limit_graph(fin, &spec.graph, spec.params.tau(), norm);
    let doc = json!({
        "classification": CLASSIFICATION,
        "seed": spec.master_seed,
        "trial_index": outcome.trial_index,
        "stopped": outcome.stopped,
        "absorbed": outcome.absorbed,
        "stop_time": num(outcome.stop_time),
        "events": outcome.events,
        "consensus": outcome.consensus,
        "event_A": outcome.event_a,
        "event_A_applicable": event_a_applicable,
        "x_center_initial": opt_num(outcome.x_samples.first().map(|s| s.1)),
        "x_center_final": opt_num(outcome.x_samples.last().map(|s| s.1)),
        "x_samples": outcome.x_samples.len(),
        "max_pair_dist_final": num(fin.max_pair_distance(norm)),
        "agreement_components": agreement_components(fin, &spec.graph, spec.stopping.eps(), norm).len(),
        "limit_graph_components": limit.components.len(),
        "final_opinions": fin.opinions().map(vector).collect::<Vec<_>>(),
        "params": echo(resolved),
    });
    Ok(Output { stdout: render(&doc), exit_code: EXIT_OK })
}

pub fn report_json(resolved: &Resolved, report: &MonteCarloReport<f64>) -> Value {
    json!({
        "classification": CLASSIFICATION,
        "trials": report.trials,
        "consensus_count": report.consensus_count,
        "undetermined_count": report.undetermined_count,
        "absorbed_count": report.absorbed_count,
        "p_hat": opt_num(report.p_hat),
        "ci_low": opt_num(report.ci_low),
        "ci_high": opt_num(report.ci_high),
        "confidence": num(0.95),
        "bound": opt_num(report.bound),
        "bound_applicable": report.bound_applicable(),
        "bound_respected": report.bound.zip(report.ci_high).map(|(b, hi)| hi >= b),
        "expected_center_distance": num(report.expected_center_distance),
        "rho": num(report.rho),
        "event_A_count": report.event_a_count,
        "event_A_and_consensus_count": report.event_a_and_consensus_count,
        "mean_stop_time": opt_num(report.mean_stop_time),
        "mean_events": num(report.mean_events),
        "undetermined_warning": report.undetermined_warning,
        "seed": report.master_seed,
        "params": echo(resolved),
    })
}

pub fn estimate(resolved: &Resolved, parallel: usize) -> Result<Output, CliError> {
    if resolved.config.trials.is_none() {
        return Err(CliError::config("trials", "required by estimate"));
    }
    if parallel == 0 {
        return Err(CliError::Usage("--parallel must be at least 1".into()));
    }
    let report = run_estimate(&resolved.spec, parallel)?;
    Ok(Output { stdout: render(&report_json(resolved, &report)), exit_code: EXIT_OK })
}

pub fn bound(resolved: &Resolved) -> Result<Output, CliError> {
    let spec = &resolved.spec;
    let b = spec.bound()?;
    let doc = json!({
        "bound": opt_num(b),
        "bound_applicable": b.is_some(),
        "expected_center_distance": num(spec.expected_center_distance()?),
        "rho": num(spec.space.radius()),
        "tau": num(spec.params.tau()),
        "center": vector(spec.space.center().coords()),
    });
    Ok(Output { stdout: render(&doc), exit_code: EXIT_OK })
}

pub fn check_invariants(cases: u64, seed: u64) -> Result<Output, CliError> {
    if cases == 0 {
        return Err(CliError::Usage("--cases must be at least 1".into()));
    }
    match check_drift::<f64>(cases, seed)? {
        Ok(summary) => {
            let doc = json!({
                "status": "ok",
                "cases": summary.cases,
                "evaluations": summary.evaluations,
                "max_drift": num(summary.max_drift),
                "tolerance": num(DRIFT_TOLERANCE),
                "seed": seed,
            });
            Ok(Output { stdout: render(&doc), exit_code: EXIT_OK })
        }
        Err(v) => {
            let case = &v.case;
            let doc = json!({
                "status": "violation",
                "drift": num(v.drift),
                "tolerance": num(DRIFT_TOLERANCE),
                "seed": seed,
                "case_index": case.index,
                "point": vector(v.point.coords()),
                "case": {
                    "vertex_count": case.graph.vertex_count(),
                    "edges": case.graph.edges(),
                    "norm": case.norm.name(),
                    "tau": num(case.tau),
                    "opinions": case.config.opinions().map(vector).collect::<Vec<_>>(),
                },
            });
            Ok(Output { stdout: render(&doc), exit_code: EXIT_VIOLATION })
        }
    }
}
