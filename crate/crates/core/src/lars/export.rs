use std::io::Write;

use crate::error::Result;
use crate::graph::Graph;
use crate::lars::{beta_at, Event, LarsTrace};
use crate::scalar::{norm1, Scalar};

/// One row per event: `step,lambda,event,edge_u,edge_v,sign,beta_l1`.
/// Vertex ids are one-based; `beta_l1` is taken at the breakpoint.
pub fn write_trace_csv<T: Scalar, W: Write>(trace: &LarsTrace<T>, g: &Graph<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "lambda", "event", "edge_u", "edge_v", "sign", "beta_l1"])?;
    for (k, bp) in trace.breakpoints.iter().enumerate() {
        let l1 = norm1(&bp.beta(g.m(), bp.lambda)).as_f64().to_string();
        let lambda = bp.lambda.as_f64().to_string();
        let step = (k + 1).to_string();
        for ev in &bp.events {
            let (kind, edge, sign) = match *ev {
                Event::Join { edge, sign } => ("join", Some(edge), sign.to_string()),
                Event::Cross { edge } => ("cross", Some(edge), String::new()),
                Event::Terminate => ("terminate", None, String::new()),
            };
            let (u, v) = match edge {
                Some(j) => ((g.edge(j).tail + 1).to_string(), (g.edge(j).head + 1).to_string()),
                None => (String::new(), String::new()),
            };
            w.write_record([step.as_str(), &lambda, kind, &u, &v, &sign, &l1])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Wide table of `beta(lambda)`: a `lambda` column, then one column per edge
/// named `u-v`.
pub fn write_beta_samples_csv<T: Scalar, W: Write>(
    trace: &LarsTrace<T>,
    g: &Graph<T>,
    lambdas: &[T],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["lambda".to_string()];
    header.extend(g.edges().iter().map(|e| format!("{}-{}", e.tail + 1, e.head + 1)));
    w.write_record(&header)?;
    for &lambda in lambdas {
        let beta = beta_at(trace, g.m(), lambda);
        let row = std::iter::once(lambda.as_f64().to_string()).chain(beta.iter().map(|b| b.as_f64().to_string()));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
