//! The same code paths instantiated at `f32`.

use lasso_paths::graph::IndicatorVector;
use lasso_paths::{admm_lasso, lars_path, nicholson_graph, shortest_path, AdmmConfig, Graph32, IncidenceMatrix};

#[test]
fn nicholson_in_single_precision() {
    let g: Graph32 = nicholson_graph();
    let sp = shortest_path(&g, 0, 8).unwrap();
    assert_eq!(sp.length, 8.0f32);
    assert_eq!(sp.vertices(&g), vec![0, 1, 2, 5, 8]);

    let trace = lars_path(&g, 0, 8).unwrap();
    let expected = [0.5f32, 1.0 / 3.0, 0.2, 7.0 / 47.0, 0.0];
    assert_eq!(trace.lambdas().len(), expected.len());
    for (l, e) in trace.lambdas().iter().zip(expected) {
        assert!((l - e).abs() < 1e-5, "{l} vs {e}");
    }
    assert_eq!(trace.path.vertices(&g), sp.vertices(&g));
}

#[test]
fn cast_preserves_the_exact_incidence() {
    let g64 = nicholson_graph::<f64>();
    let g32 = g64.cast::<f32>();
    let (a, b): (IncidenceMatrix, IncidenceMatrix) = (g64.incidence_matrix(), g32.incidence_matrix());
    assert_eq!(a.triplets().collect::<Vec<_>>(), b.triplets().collect::<Vec<_>>());
}

#[test]
fn admm_runs_in_single_precision() {
    let g: Graph32 = nicholson_graph();
    let y = IndicatorVector::new(g.n(), 0, 8).unwrap().to_dense::<f32>();
    let cfg = AdmmConfig { rho: 1e-3, lambda_rel: 1e-4, ..Default::default() };
    let (state, _) = admm_lasso(&g.weighted_incidence(), &y, &cfg).unwrap();
    let l1: f32 = state.beta.iter().map(|b| b.abs()).sum();
    assert!((l1 - 8.0).abs() < 0.05, "{l1}");
}
