use mmwc_core::graph::{enumerate_simple_cycles, Arc, Orientation};
use mmwc_core::mean_field::exp_stream;
use mmwc_core::{generate, howard_mmc, karp_mmc, solve_mean_field, InstanceSpec, Solver, SolverError, WeightedDigraph};
use proptest::prelude::*;

fn brute_force_mean(g: &WeightedDigraph) -> f64 {
    enumerate_simple_cycles(g, 9).unwrap().iter().map(|c| c.mean()).fold(f64::INFINITY, f64::min)
}

fn random_digraph(n: usize, density: f64, seed: u64) -> WeightedDigraph {
    let draws = exp_stream(seed, 2 * n * n);
    let mut arcs = Vec::new();
    for t in 0..n {
        for h in 0..n {
            let i = t * n + h;
            if t != h && draws[i] < -(1.0 - density).ln() {
                arcs.push(Arc::new(t as u32, h as u32, draws[n * n + i]));
            }
        }
    }
    WeightedDigraph::from_arcs(n, arcs).unwrap()
}

#[test]
fn two_cycle_example() {
    let g = WeightedDigraph::from_arcs(2, [Arc::new(0, 1, 1.0), Arc::new(1, 0, 3.0)]).unwrap();
    for solver in [Solver::Karp, Solver::Howard] {
        let r = solver.solve(&g).unwrap();
        assert_eq!(r.mu_star, 2.0);
        assert_eq!(r.length, 2);
        assert_eq!(r.cycle.total_weight, 4.0);
        assert_eq!(r.cycle.cbar, 4.0);
    }
}

#[test]
fn disjoint_cycles_pick_the_lighter() {
    let arcs = [Arc::new(0, 1, 2.0), Arc::new(1, 0, 2.0), Arc::new(2, 3, 1.0), Arc::new(3, 2, 1.0)];
    let g = WeightedDigraph::from_arcs(4, arcs).unwrap();
    for solver in [Solver::Karp, Solver::Howard] {
        let r = solver.solve(&g).unwrap();
        assert_eq!(r.mu_star, 1.0);
        assert_eq!(r.cycle.vertices, [2, 3]);
    }
}

#[test]
fn acyclic_graph_has_no_cycle() {
    let g = WeightedDigraph::from_arcs(3, [Arc::new(0, 1, 1.0), Arc::new(1, 2, 1.0)]).unwrap();
    assert_eq!(karp_mmc(&g), Err(SolverError::NoCycle));
    assert_eq!(howard_mmc(&g), Err(SolverError::NoCycle));
}

#[test]
fn complete_digraph_on_three_vertices_has_five_cycles() {
    let g = generate(&InstanceSpec { n: 3, directed: true, seed: 4 }).unwrap();
    let cycles = enumerate_simple_cycles(&g, 9).unwrap();
    assert_eq!(cycles.iter().filter(|c| c.len() == 2).count(), 3);
    assert_eq!(cycles.iter().filter(|c| c.len() == 3).count(), 2);
}

#[test]
fn undirected_instance_is_symmetric() {
    let g = generate(&InstanceSpec { n: 6, directed: false, seed: 9 }).unwrap();
    assert_eq!(g.orientation(), Orientation::Undirected);
    for a in g.arcs() {
        assert_eq!(g.weight(a.head as usize, a.tail as usize), Some(a.weight));
    }
    let r = howard_mmc(&g).unwrap();
    let lightest = g.arcs().map(|a| a.weight).fold(f64::INFINITY, f64::min);
    assert_eq!(r.mu_star, lightest);
}

#[test]
fn two_vertex_mean_field_scaled_mean() {
    let g = generate(&InstanceSpec { n: 2, directed: true, seed: 1 }).unwrap();
    let r = solve_mean_field(2, 1, Solver::Howard).unwrap();
    let sum = g.weight(0, 1).unwrap() + g.weight(1, 0).unwrap();
    assert!((r.scaled_mean - sum).abs() < 1e-15);
}

#[test]
fn generation_is_deterministic_in_the_seed() {
    let a = generate(&InstanceSpec { n: 20, directed: true, seed: 77 }).unwrap();
    let b = generate(&InstanceSpec { n: 20, directed: true, seed: 77 }).unwrap();
    let c = generate(&InstanceSpec { n: 20, directed: true, seed: 78 }).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn solvers_agree_on_larger_instances() {
    for seed in 0..5 {
        let g = generate(&InstanceSpec { n: 120, directed: true, seed }).unwrap();
        let (k, h) = (karp_mmc(&g).unwrap(), howard_mmc(&g).unwrap());
        assert!((k.mu_star - h.mu_star).abs() <= 1e-12, "seed {seed}: {} vs {}", k.mu_star, h.mu_star);
    }
}

#[test]
fn optimum_is_invariant_under_scaling() {
    let g = generate(&InstanceSpec { n: 30, directed: true, seed: 5 }).unwrap();
    let base = howard_mmc(&g).unwrap();
    let scaled = howard_mmc(&g.map_weights(|w| 3.0 * w + 2.0)).unwrap();
    assert!((scaled.mu_star - (3.0 * base.mu_star + 2.0)).abs() < 1e-12);
    assert_eq!(scaled.cycle.vertices, base.cycle.vertices);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solvers_match_enumeration(n in 2usize..=7, density in 0.2f64..1.0, seed in any::<u64>()) {
        let g = random_digraph(n, density, seed);
        let brute = brute_force_mean(&g);
        for solver in [Solver::Karp, Solver::Howard] {
            match solver.solve(&g) {
                Ok(r) => {
                    prop_assert!((r.mu_star - brute).abs() <= 1e-12);
                    // The reported cycle is a genuine simple cycle of the graph.
                    let mut vs = r.cycle.vertices.clone();
                    vs.sort_unstable();
                    vs.dedup();
                    prop_assert_eq!(vs.len(), r.length);
                    prop_assert!(r.length >= 2);
                }
                Err(SolverError::NoCycle) => prop_assert!(brute.is_infinite()),
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }

    #[test]
    fn optimum_bounds_every_cycle_mean(seed in any::<u64>()) {
        let g = generate(&InstanceSpec { n: 6, directed: true, seed }).unwrap();
        let r = howard_mmc(&g).unwrap();
        for c in enumerate_simple_cycles(&g, 9).unwrap() {
            prop_assert!(r.mu_star <= c.mean() + 1e-12);
        }
    }
}
