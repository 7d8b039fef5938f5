mod common;

use cdsbench::index::Facet;
use cdsbench::optimizer::{grid_search, hill_climb, WeightGrid};
use cdsbench::ranking::FacetWeights;

fn grid() -> WeightGrid {
    WeightGrid::new(vec![Facet::Title, Facet::Abstract, Facet::Body, Facet::All], 0.1).unwrap()
}

#[test]
fn concave_objective_reaches_grid_optimum() {
    let g = grid();
    let (point, best) = grid_search(common::concave_objective, &g);
    assert_eq!(point, [13, 4, 20, 0]);
    for seed in 0..5 {
        let run = hill_climb(common::concave_objective, &g, seed, 5);
        assert_eq!(run.best_point, point);
        assert!((run.best_score - best).abs() < 1e-12);
        assert!(common::trace_is_monotone(&run));
    }
}

#[test]
fn traces_are_reproducible() {
    let bumpy = |w: &FacetWeights| {
        let x = w.get(Facet::Title) * 3.0 + w.get(Facet::Body) * 1.7;
        (x * 2.1).sin() + (w.get(Facet::Abstract) * 4.3).cos() - 0.1 * w.get(Facet::All)
    };
    let g = grid();
    let a = hill_climb(bumpy, &g, 42, 30);
    let b = hill_climb(bumpy, &g, 42, 30);
    assert_eq!(a, b);
    assert_eq!(a.trace_csv(), b.trace_csv());
    assert!(common::trace_is_monotone(&a));
    let c = hill_climb(bumpy, &g, 43, 30);
    assert_ne!(a.trace, c.trace);
    let max_seen = a.trace.iter().map(|e| e.objective).fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(a.best_score, max_seen);
    assert_eq!(a.trace.iter().filter(|e| e.restart).count(), 29);
}

#[test]
fn climb_starts_from_maximum_weights() {
    let run = hill_climb(common::concave_objective, &grid(), 1, 1);
    let first = &run.trace[0];
    assert_eq!(first.weights, [2.0; 4]);
    assert!(first.accepted && !first.restart);
}

#[test]
fn accepted_moves_change_one_facet_by_one_step() {
    let run = hill_climb(common::concave_objective, &grid(), 9, 3);
    let mut prev: Option<&Vec<u32>> = None;
    for e in run.trace.iter().filter(|e| e.accepted) {
        if let (Some(p), false) = (prev, e.restart) {
            let moved: u32 = p.iter().zip(&e.point).map(|(a, b)| a.abs_diff(*b)).sum();
            assert_eq!(moved, 1);
        }
        prev = Some(&e.point);
    }
}
