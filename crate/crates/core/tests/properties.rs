use lasso_paths::admm::{extract_path, soft_threshold, AdmmConfig};
use lasso_paths::experiments::{gen_random_graph, scissors_edge_count, scissors_graph, GrayImage};
use lasso_paths::graph::{parse_json, parse_text, write_json, write_text, IndicatorVector};
use lasso_paths::lars::breakpoint_l1;
use lasso_paths::linalg::{conjugate_gradient, DenseMatrix, GramOperator, LinearOperator};
use lasso_paths::{dijkstra, lars_path, Graph, IncidenceMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph_params() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..50, 0usize..100, any::<u64>()).prop_map(|(n, extra, seed)| (n, (n - 1 + extra).min(n * (n - 1) / 2), seed))
}

fn jittered(n: usize, m: usize, seed: u64) -> Graph<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let g: Graph<f64> = gen_random_graph(n, m, 10.0, 20.0, seed).unwrap();
    let jitter: Vec<f64> = (0..m).map(|_| rng.gen_range(-1e-3..1e-3)).collect();
    g.map_weights(|j, w| w + jitter[j]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_graphs_are_connected_simple_and_seeded((n, m, seed) in graph_params()) {
        let g: Graph<f64> = gen_random_graph(n, m, 10.0, 20.0, seed).unwrap();
        prop_assert_eq!((g.n(), g.m()), (n, m));
        let dm = dijkstra(&g, 0, None).unwrap();
        prop_assert!((0..n).all(|v| dm.dist(v).is_finite()));
        prop_assert!(g.edges().iter().all(|e| e.tail < e.head && (10.0..=20.0).contains(&e.weight)));
        let again: Graph<f64> = gen_random_graph(n, m, 10.0, 20.0, seed).unwrap();
        prop_assert_eq!(g, again);
    }

    #[test]
    fn exact_incidence_columns_and_laplacian((n, m, seed) in graph_params()) {
        let g: Graph<f64> = gen_random_graph(n, m, 1.0, 5.0, seed).unwrap();
        let d: IncidenceMatrix = g.incidence_matrix();
        for j in 0..m {
            let col: Vec<i64> = d.column(j).map(|(_, v)| v).collect();
            prop_assert_eq!(col.iter().sum::<i64>(), 0);
            prop_assert_eq!(col.iter().map(|v| v.abs()).sum::<i64>(), 2);
        }
        // D W D^T from the exact incidence, and Q Q^T = D W^-2 D^T
        let dd = DenseMatrix::from_fn(n, m, |i, j| d.get(i, j) as f64);
        let scaled = |p: i32| DenseMatrix::from_fn(n, m, |i, j| dd[(i, j)] * g.edge(j).weight.powi(p));
        let lap = DenseMatrix::from_sparse(&g.laplacian());
        prop_assert!(scaled(1).matmul(&dd.transpose()).max_abs_diff(&lap) <= 1e-12);
        let q = DenseMatrix::from_sparse(&g.weighted_incidence());
        prop_assert!(q.matmul(&q.transpose()).max_abs_diff(&scaled(-2).matmul(&dd.transpose())) <= 1e-12);
    }

    #[test]
    fn text_and_json_round_trip((n, m, seed) in graph_params()) {
        let g: Graph<f64> = gen_random_graph(n, m, 1.0, 5.0, seed).unwrap();
        prop_assert_eq!(&parse_text::<f64>(&write_text(&g)).unwrap(), &g);
        prop_assert_eq!(&parse_json::<f64>(&write_json(&g)).unwrap(), &g);
    }

    #[test]
    fn soft_threshold_shrinks(x in prop::collection::vec(-10.0f64..10.0, 0..20), kappa in 0.0f64..5.0) {
        let y = soft_threshold(&x, kappa);
        for (&xi, &yi) in x.iter().zip(&y) {
            prop_assert!(yi.abs() <= xi.abs());
            prop_assert!(yi == 0.0 || yi.signum() == xi.signum());
            prop_assert!((xi - yi).abs() <= kappa + 1e-15);
            prop_assert_eq!(yi == 0.0, xi.abs() <= kappa);
        }
    }

    #[test]
    fn cg_meets_its_tolerance((n, m, seed) in graph_params(), rho in prop::sample::select(vec![1e-7, 1e-2, 1.0, 10.0]), tol_exp in 4i32..11) {
        let g: Graph<f64> = gen_random_graph(n, m, 1.0, 5.0, seed).unwrap();
        let q = g.weighted_incidence();
        let op = GramOperator::new(&q, rho);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = raw.iter().sum::<f64>() / n as f64;
        // right-hand sides inside ADMM are orthogonal to the constant vector
        let centered: Vec<f64> = raw.iter().map(|v| v - mean).collect();
        let tol = 10f64.powi(-tol_exp);
        for (b, must_converge) in [(&raw, false), (&centered, true)] {
            let bn: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            match conjugate_gradient(&op, b, &vec![0.0; n], tol, 100 * n) {
                Ok(sol) => {
                    let mut ax = vec![0.0; n];
                    op.apply(&sol.x, &mut ax);
                    let r: f64 = ax.iter().zip(b.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    prop_assert!(r <= tol * bn * (1.0 + 1e-9), "{} > {}", r / bn, tol);
                    prop_assert!((sol.residual - r / bn).abs() <= 1e-12);
                }
                Err(e) => prop_assert!(!must_converge, "centered rhs failed: {}", e),
            }
        }
    }

    #[test]
    fn lars_path_is_monotone_and_extractable((n, m, seed) in graph_params().prop_filter("need 3 vertices", |p| p.0 >= 3)) {
        let g = jittered(n, m, seed);
        let trace = lars_path(&g, 0, n - 1).unwrap();
        let lambdas = trace.lambdas();
        prop_assert!(lambdas.windows(2).all(|w| w[0] > w[1]));
        prop_assert_eq!(*lambdas.last().unwrap(), 0.0);
        // |beta|_1 grows as lambda falls
        let l1 = breakpoint_l1(&trace, g.m());
        prop_assert!(l1.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        let read = extract_path(&trace.beta, &g, 0, n - 1, 0.5).unwrap();
        prop_assert_eq!(read.path, trace.path.path.clone());
    }

    #[test]
    fn scissors_grid_shape(w in 2usize..14, h in 2usize..14, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pixels: Vec<u8> = (0..w * h).map(|_| rng.gen()).collect();
        let img = GrayImage::new(w, h, pixels).unwrap();
        let (g, map) = scissors_graph::<f64>(&img).unwrap();
        prop_assert_eq!((g.n(), g.m()), (w * h, scissors_edge_count(w, h)));
        prop_assert!(g.edges().iter().all(|e| e.weight > 0.0 && e.weight <= 1.01 * std::f64::consts::SQRT_2 + 1e-12));
        for r in 1..h - 1 {
            for c in 1..w - 1 {
                prop_assert_eq!(g.degree(map.vertex((r, c)).unwrap()), 8);
            }
        }
        for v in 0..g.n() {
            prop_assert_eq!(map.vertex(map.pixel(v)).unwrap(), v);
        }
    }

    #[test]
    fn pgm_round_trip_and_overlay(w in 1usize..20, h in 1usize..20, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let img = GrayImage::new(w, h, (0..w * h).map(|_| rng.gen_range(1..=255u8)).collect()).unwrap();
        prop_assert_eq!(&GrayImage::from_pgm(&img.to_pgm()).unwrap(), &img);
        let marked: Vec<(usize, usize)> = (0..w.min(h)).map(|i| (i, i)).collect();
        let over = img.overlay(&marked);
        for r in 0..h {
            for c in 0..w {
                let on = marked.contains(&(r, c));
                prop_assert_eq!(over.get(r, c) != img.get(r, c), on);
            }
        }
    }
}

#[test]
fn config_json_defaults_and_rejections() {
    let cfg = AdmmConfig::from_json("{}").unwrap();
    assert_eq!(cfg, AdmmConfig::default());
    assert_eq!((cfg.rho, cfg.relax, cfg.lambda_rel, cfg.tol_primal, cfg.tol_dual), (1e-7, 1.0, 1e-8, 1e-5, 1e-4));
    assert_eq!(cfg.cg_tol, 1e-4);
    assert!(AdmmConfig::from_json(r#"{"relax": 0.5}"#).is_err());
    assert!(AdmmConfig::from_json(r#"{"cg_tol": -1}"#).is_err());
}

#[test]
fn indicator_vector_is_signed_pair() {
    let y = IndicatorVector::new(5, 1, 3).unwrap().to_dense::<i64>();
    assert_eq!(y.iter().sum::<i64>(), 0);
    assert_eq!(y.iter().filter(|&&v| v != 0).count(), 2);
    assert!(IndicatorVector::new(5, 1, 5).is_err());
}
