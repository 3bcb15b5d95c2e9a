//! Random-graph and image experiments, plus the artifact writer behind the
//! command-line tool.

mod image;
mod random;
mod run;
mod scissors;

pub use image::GrayImage;
pub use random::gen_random_graph;
pub use run::{
    bench_iteration_cost, run_experiment, BenchRow, Endpoints, ExperimentOutcome, ExperimentSpec, GraphSource,
    SolverChoice, Summary,
};
pub use scissors::{
    edge_weight_from_gradient, scissors_edge_count, scissors_graph, synthetic_disk, GradientField, Pixel, PixelMap,
    EPSILON,
};
