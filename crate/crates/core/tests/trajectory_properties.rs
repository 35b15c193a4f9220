use hkc_core::dynamics::{compatibility, Configuration, ModelParams, Step, StoppingSpec, Trial};
use hkc_core::graph::{GraphKind, SocialGraph};
use hkc_core::space::{ConvexShape, InitialDistribution, NormSpec, OpinionSpace, OpinionVector};
use hkc_core::{dynamics, RandomStream};
use rand::Rng;

fn random_setup(seed: u64) -> (SocialGraph, OpinionSpace<f64>, ModelParams<f64>, f64) {
    let mut rng = RandomStream::new(seed, 1_000);
    let n = rng.random_range(2..=15);
    let graph = match rng.random_range(0..4) {
        0 => GraphKind::Path(n),
        1 => GraphKind::Complete(n.min(10)),
        2 => GraphKind::Grid { width: 3, height: n.div_ceil(3) },
        _ => GraphKind::ErdosRenyi { n, p: 0.4 },
    }
    .generate(&mut rng)
    .unwrap();
    let dim = rng.random_range(1..=3);
    let norm = NormSpec::ALL[rng.random_range(0..3)];
    let shape =
        ConvexShape::cube(OpinionVector::new(vec![0.0; dim]).unwrap(), OpinionVector::new(vec![1.0; dim]).unwrap())
            .unwrap();
    let space = OpinionSpace::new(shape, norm).unwrap();
    let tau = rng.random_range(0.1..1.5) * space.radius() * 2.0;
    let alpha = if rng.random_bool(0.5) { 0.0 } else { rng.random_range(0.0..0.9) };
    (graph, space, ModelParams::new(tau, alpha).unwrap(), tau)
}

fn support(points: &[&[f64]], dir: &[f64]) -> f64 {
    points.iter().map(|p| p.iter().zip(dir).map(|(a, b)| a * b).sum::<f64>()).fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn updates_stay_in_the_local_hull_and_the_global_hull_never_grows() {
    let mut dir_rng = RandomStream::from_seed(424242);
    for seed in 0..40 {
        let (graph, space, params, tau) = random_setup(seed);
        let mut rng = RandomStream::new(seed, 0);
        let config =
            dynamics::sample_configuration(&graph, &space, &InitialDistribution::UniformShape, &mut rng).unwrap();
        let stopping = StoppingSpec::with_defaults(tau, space.radius(), graph.vertex_count()).unwrap();
        let mut trial = Trial::new(&graph, &space, params, stopping, config, rng).unwrap();
        let dim = space.dim();
        let dirs: Vec<Vec<f64>> =
            (0..32).map(|_| (0..dim).map(|_| dir_rng.random_range(-1.0..1.0)).collect()).collect();
        for _ in 0..200 {
            let before = trial.config().clone();
            let view = trial.view().clone();
            let Step::Fire { vertex, .. } = trial.step() else { break };
            let after = trial.config();
            let local: Vec<&[f64]> = view
                .neighbors(vertex)
                .iter()
                .map(|&y| before.opinion(y))
                .chain(std::iter::once(before.opinion(vertex)))
                .collect();
            let global: Vec<&[f64]> = before.opinions().collect();
            for dir in &dirs {
                let moved = after.opinion(vertex).iter().zip(dir).map(|(a, b)| a * b).sum::<f64>();
                assert!(moved <= support(&local, dir) + 1e-12, "seed {seed}: left the local hull");
                let post: Vec<&[f64]> = after.opinions().collect();
                assert!(support(&post, dir) <= support(&global, dir) + 1e-12, "seed {seed}: hull grew");
            }
            for x in 0..graph.vertex_count() {
                if x != vertex {
                    assert_eq!(after.opinion(x), before.opinion(x));
                }
            }
            assert!(space.contains_within(after.opinion(vertex), 1e-12));
        }
    }
}

#[test]
fn incremental_compatibility_matches_full_recompute() {
    let mut checked = 0;
    for seed in 0..30 {
        let (graph, space, params, tau) = random_setup(seed);
        let mut rng = RandomStream::new(seed, 0);
        let config =
            dynamics::sample_configuration(&graph, &space, &InitialDistribution::UniformShape, &mut rng).unwrap();
        let stopping = StoppingSpec::with_defaults(tau, space.radius(), graph.vertex_count()).unwrap();
        let mut trial = Trial::new(&graph, &space, params, stopping, config, rng).unwrap();
        for _ in 0..100 {
            if trial.step() == Step::Absorbed {
                break;
            }
            let full = compatibility(trial.config(), &graph, tau, space.norm());
            assert_eq!(trial.view(), &full, "seed {seed} after {} events", trial.events());
            let view = trial.view();
            for x in 0..graph.vertex_count() {
                assert_eq!(view.rate(x), view.neighbors(x).len());
                for &y in view.neighbors(x) {
                    assert!(view.neighbors(y).contains(&x));
                }
            }
            assert_eq!(view.total_rate(), view.rates().iter().sum::<usize>());
            assert_eq!(
                trial.is_stopped(),
                dynamics::stop_reached(trial.config(), &graph, trial.stopping(), tau, space.norm())
            );
            checked += 1;
        }
    }
    assert!(checked >= 1_000, "only {checked} events checked");
}

#[test]
fn refresh_vertex_matches_full_recompute() {
    let graph = GraphKind::Cycle(5).generate(&mut RandomStream::from_seed(0)).unwrap();
    let mut config = Configuration::scalar(&[0.0, 0.2, 0.4, 0.6, 0.8]).unwrap();
    let mut view = compatibility(&config, &graph, 0.25, NormSpec::L1);
    dynamics::apply_update(&mut config, &view, 2, 0.0).unwrap();
    view.refresh_vertex(&config, &graph, 0.25, NormSpec::L1, 2);
    assert_eq!(view, compatibility(&config, &graph, 0.25, NormSpec::L1));
}

#[test]
fn continuing_a_consensus_run_keeps_consensus() {
    let graph = GraphKind::Cycle(8).generate(&mut RandomStream::from_seed(0)).unwrap();
    let space = OpinionSpace::<f64>::unit_interval();
    let params = ModelParams::new(1.2, 0.0).unwrap();
    let stopping = StoppingSpec::with_defaults(1.2, 0.5, 8).unwrap();
    let mut rng = RandomStream::new(1, 2);
    let config = dynamics::sample_configuration(&graph, &space, &InitialDistribution::UniformShape, &mut rng).unwrap();
    let mut trial = Trial::new(&graph, &space, params, stopping, config, rng).unwrap();
    assert!(trial.run_until_stopped(1_000_000));
    assert_eq!(trial.classify(), Some(true));
    let budget = 10 * trial.events().max(1);
    for _ in 0..budget {
        trial.step();
    }
    assert!(trial.run_until_stopped(1_000_000));
    assert_eq!(trial.classify(), Some(true));
}
