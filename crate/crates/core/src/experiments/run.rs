use std::path::{Path as FsPath, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::admm::{admm_lasso, extract_path, inadmm_lasso, AdmmConfig, AdmmTrace};
use crate::dijkstra::{dijkstra, shortest_path};
use crate::error::{Error, Result};
use crate::experiments::{gen_random_graph, scissors_graph, GrayImage, PixelMap};
use crate::graph::{load_graph, Graph, IndicatorVector, PathResult};
use crate::lars::{lars_path, write_trace_csv, LarsTrace};
use crate::scalar::norm1;

#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Random {
        n: usize,
        m: usize,
        w_min: f64,
        w_max: f64,
    },
    ImageFile(PathBuf),
    Image(GrayImage),
    File(PathBuf),
    /// Already built, e.g. after the caller validated it.
    Graph(Graph<f64>),
}

/// Query endpoints, one-based as written by users.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoints {
    Vertices(usize, usize),
    /// `(row, col)` pairs; image sources only.
    Pixels((usize, usize), (usize, usize)),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Dijkstra,
    Lars,
    Admm,
    InAdmm,
}

impl SolverChoice {
    pub fn name(self) -> &'static str {
        match self {
            SolverChoice::Dijkstra => "dijkstra",
            SolverChoice::Lars => "lars",
            SolverChoice::Admm => "admm",
            SolverChoice::InAdmm => "inadmm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub source: GraphSource,
    pub endpoints: Endpoints,
    pub solver: SolverChoice,
    pub config: AdmmConfig,
    /// `|beta_j| / w_j` cut used to read a path off an ADMM solution.
    pub threshold: f64,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    /// When false, every timing field is written as 0 so repeated runs
    /// produce identical files.
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn new(source: GraphSource, endpoints: Endpoints, solver: SolverChoice) -> Self {
        Self {
            source,
            endpoints,
            solver,
            config: AdmmConfig::default(),
            threshold: 0.5,
            out_dir: None,
            seed: None,
            timing: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidConfig(format!("threshold must lie in (0, 1), got {}", self.threshold)));
        }
        if matches!(self.source, GraphSource::Random { .. }) && self.seed.is_none() {
            return Err(Error::InvalidConfig("random graphs need a seed".into()));
        }
        if matches!(self.endpoints, Endpoints::Pixels(..))
            && !matches!(self.source, GraphSource::Image(_) | GraphSource::ImageFile(_))
        {
            return Err(Error::InvalidConfig("pixel endpoints need an image source".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub solver: String,
    /// `|beta|_1` for the lasso solvers, the path length for Dijkstra.
    pub length: f64,
    pub oracle_length: f64,
    pub rel_gap: f64,
    pub iterations: usize,
    pub wall_ms: f64,
    pub seed: Option<u64>,
    /// Length of the path read off the solution.
    pub path_length: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub summary: Summary,
    pub graph: Graph<f64>,
    pub source: usize,
    pub target: usize,
    pub path: PathResult<f64>,
    pub admm: Option<AdmmTrace>,
    pub lars: Option<LarsTrace<f64>>,
    pub image: Option<(GrayImage, PixelMap)>,
}

impl ExperimentOutcome {
    /// Input image with the path pixels set to 0.
    pub fn overlay(&self) -> Option<GrayImage> {
        let (img, map) = self.image.as_ref()?;
        let pixels: Vec<(usize, usize)> = self.path.vertices(&self.graph).iter().map(|&v| map.pixel(v)).collect();
        Some(img.overlay(&pixels))
    }

    /// Write `summary.json`, `path.txt`, `trace.csv` (solver permitting) and
    /// `overlay.pgm` (image sources) into `dir`.
    pub fn write_artifacts(&self, dir: &FsPath) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        let io = |p: &FsPath, e: std::io::Error| Error::Io(format!("{}: {e}", p.display()));
        let file = |name: &str| -> Result<(PathBuf, std::fs::File)> {
            let p = dir.join(name);
            let f = std::fs::File::create(&p).map_err(|e| io(&p, e))?;
            Ok((p, f))
        };
        if let Some(trace) = &self.admm {
            trace.write_csv(file("trace.csv")?.1)?;
        }
        if let Some(trace) = &self.lars {
            write_trace_csv(trace, &self.graph, file("trace.csv")?.1)?;
        }
        let verts: Vec<String> = self.path.vertices(&self.graph).iter().map(|v| (v + 1).to_string()).collect();
        let p = dir.join("path.txt");
        std::fs::write(&p, format!("{}\n", verts.join(" "))).map_err(|e| io(&p, e))?;
        if let Some(img) = self.overlay() {
            img.save(dir.join("overlay.pgm"))?;
        }
        let p = dir.join("summary.json");
        let json = serde_json::to_string_pretty(&self.summary)?;
        std::fs::write(&p, json + "\n").map_err(|e| io(&p, e))?;
        Ok(())
    }
}

type Resolved = (Graph<f64>, Option<(GrayImage, PixelMap)>);

fn resolve(spec: &ExperimentSpec) -> Result<Resolved> {
    Ok(match &spec.source {
        GraphSource::Random { n, m, w_min, w_max } => {
            let seed = spec.seed.ok_or_else(|| Error::InvalidConfig("random graphs need a seed".into()))?;
            (gen_random_graph(*n, *m, *w_min, *w_max, seed)?, None)
        }
        GraphSource::File(path) => (load_graph(path)?, None),
        GraphSource::Graph(g) => (g.clone(), None),
        GraphSource::ImageFile(path) => {
            let img = GrayImage::load(path)?;
            let (g, map) = scissors_graph(&img)?;
            (g, Some((img, map)))
        }
        GraphSource::Image(img) => {
            let (g, map) = scissors_graph(img)?;
            (g, Some((img.clone(), map)))
        }
    })
}

fn endpoints(spec: &ExperimentSpec, g: &Graph<f64>, map: Option<&PixelMap>) -> Result<(usize, usize)> {
    let (s, t) = match (spec.endpoints, map) {
        (Endpoints::Vertices(s, t), _) => {
            if s == 0 || t == 0 {
                return Err(Error::VertexOutOfRange(0, g.n()));
            }
            (s - 1, t - 1)
        }
        (Endpoints::Pixels(p, q), Some(map)) => {
            let zero = |(r, c): (usize, usize)| -> Result<(usize, usize)> {
                if r == 0 || c == 0 {
                    return Err(Error::InvalidConfig(format!("pixel ({r}, {c}) is not one-based")));
                }
                Ok((r - 1, c - 1))
            };
            (map.vertex(zero(p)?)?, map.vertex(zero(q)?)?)
        }
        (Endpoints::Pixels(..), None) => {
            return Err(Error::InvalidConfig("pixel endpoints need an image source".into()))
        }
    };
    g.check_vertex(s)?;
    g.check_vertex(t)?;
    Ok((s, t))
}

/// Build the graph, run the chosen solver and the Dijkstra oracle, and
/// write artifacts when `spec.out_dir` is set.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let (g, image) = resolve(spec)?;
    let (s, t) = endpoints(spec, &g, image.as_ref().map(|(_, m)| m))?;
    let oracle = shortest_path(&g, s, t)?;

    let start = Instant::now();
    let (length, iterations, path, admm, lars, converged) = match spec.solver {
        SolverChoice::Dijkstra => {
            let settled = dijkstra(&g, s, Some(t))?.settle_order().len();
            (oracle.length, settled, oracle.clone(), None, None, true)
        }
        SolverChoice::Lars => {
            let trace = lars_path(&g, s, t)?;
            let len = norm1(&trace.beta);
            (len, trace.breakpoints.len(), trace.path.clone(), None, Some(trace), true)
        }
        SolverChoice::Admm | SolverChoice::InAdmm => {
            let q = g.weighted_incidence();
            let y = IndicatorVector::new(g.n(), s, t)?.to_dense::<f64>();
            let (state, mut trace) = if spec.solver == SolverChoice::Admm {
                admm_lasso(&q, &y, &spec.config)?
            } else {
                inadmm_lasso(&q, &y, &spec.config)?
            };
            if !spec.timing {
                trace.records.iter_mut().for_each(|r| r.elapsed_ms = 0.0);
            }
            let path = extract_path(&state.beta, &g, s, t, spec.threshold)?;
            let converged = trace.converged();
            (norm1(&state.beta), trace.iterations(), path, Some(trace), None, converged)
        }
    };
    let wall_ms = if spec.timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    let rel_gap = if oracle.length > 0.0 { (length - oracle.length).abs() / oracle.length } else { length.abs() };
    let summary = Summary {
        solver: spec.solver.name().to_string(),
        length,
        oracle_length: oracle.length,
        rel_gap,
        iterations,
        wall_ms,
        seed: spec.seed,
        path_length: path.length,
        converged,
    };
    let outcome = ExperimentOutcome { summary, graph: g, source: s, target: t, path, admm, lars, image };
    if let Some(dir) = &spec.out_dir {
        outcome.write_artifacts(dir)?;
    }
    Ok(outcome)
}

/// Per-iteration cost of the inexact solver on one random graph size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    pub iterations: usize,
    pub ms_per_iter: f64,
    pub cg_iters_per_iter: f64,
    /// Time per outer iteration divided by `(1 + cg iterations)`: the part
    /// that should grow linearly in `m`.
    pub ms_per_matvec: f64,
}

/// Time `iterations` InADMM steps on random graphs with the given edge
/// counts (vertex count `m / 2.688`, the density of the 1000-vertex study).
pub fn bench_iteration_cost(edge_counts: &[usize], iterations: usize, seed: u64) -> Result<Vec<BenchRow>> {
    let cfg = AdmmConfig {
        max_iter: iterations,
        tol_primal: f64::MIN_POSITIVE,
        tol_dual: f64::MIN_POSITIVE,
        ..Default::default()
    };
    edge_counts
        .iter()
        .map(|&m| {
            let n = ((m as f64 / 2.688).round() as usize).max(2);
            let g: Graph<f64> = gen_random_graph(n, m.max(n - 1), 10.0, 20.0, seed)?;
            let q = g.weighted_incidence();
            let y = IndicatorVector::new(g.n(), 0, g.n() - 1)?.to_dense::<f64>();
            let start = Instant::now();
            let (_, trace) = inadmm_lasso(&q, &y, &cfg)?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            let done = trace.records.len().max(1) as f64;
            let cg: usize = trace.records.iter().map(|r| r.cg_iters).sum();
            Ok(BenchRow {
                n: g.n(),
                m: g.m(),
                iterations: trace.records.len(),
                ms_per_iter: ms / done,
                cg_iters_per_iter: cg as f64 / done,
                ms_per_matvec: ms / (done + cg as f64),
            })
        })
        .collect()
}
