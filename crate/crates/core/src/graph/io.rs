//! Edge-list text (`u v w` per line, `#` comments) and JSON
//! (`{"n": .., "edges": [[u, v, w], ..]}`) graph formats. Vertex ids are
//! one-based in both.

use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, Graph};
use crate::scalar::Scalar;

#[derive(Serialize, Deserialize)]
struct GraphRecord {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

pub fn parse_text<T: Scalar>(text: &str) -> Result<Graph<T>> {
    let mut list = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("line {}: expected `u v w`, got {:?}", lineno + 1, raw)));
        }
        let bad = |what: &str| Error::Parse(format!("line {}: invalid {what} in {:?}", lineno + 1, raw));
        let u: usize = fields[0].parse().map_err(|_| bad("vertex"))?;
        let v: usize = fields[1].parse().map_err(|_| bad("vertex"))?;
        let w: f64 = fields[2].parse().map_err(|_| bad("weight"))?;
        list.push((u, v, T::lit(w)));
    }
    build_graph(&list)
}

pub fn parse_json<T: Scalar>(text: &str) -> Result<Graph<T>> {
    let rec: GraphRecord = serde_json::from_str(text)?;
    let mut list = Vec::with_capacity(rec.edges.len());
    for (u, v, w) in rec.edges {
        if u == 0 || v == 0 || u > rec.n || v > rec.n {
            return Err(Error::VertexOutOfRange(if u == 0 || u > rec.n { u } else { v }, rec.n));
        }
        list.push((u - 1, v - 1, T::lit(w)));
    }
    Graph::from_edges(rec.n, &list)
}

/// Read a graph file; JSON when the content starts with `{`, text otherwise.
pub fn load_graph<T: Scalar>(path: impl AsRef<FsPath>) -> Result<Graph<T>> {
    let text =
        std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    if text.trim_start().starts_with('{') {
        parse_json(&text)
    } else {
        parse_text(&text)
    }
}

pub fn write_text<T: Scalar>(g: &Graph<T>) -> String {
    let mut out = format!("# n={} m={}\n", g.n(), g.m());
    for e in g.edges() {
        out.push_str(&format!("{} {} {}\n", e.tail + 1, e.head + 1, e.weight));
    }
    out
}

pub fn write_json<T: Scalar>(g: &Graph<T>) -> String {
    let rec = GraphRecord {
        n: g.n(),
        edges: g.edges().iter().map(|e| (e.tail + 1, e.head + 1, e.weight.as_f64())).collect(),
    };
    serde_json::to_string(&rec).expect("graph record serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::nicholson_graph;

    #[test]
    fn text_with_comments() {
        let g: Graph<f64> = parse_text("# triangle\n1 2 1.5\n2 3 2 # inline\n\n1 3 4\n").unwrap();
        assert_eq!((g.n(), g.m()), (3, 3));
        assert_eq!(g.edge(1).weight, 2.0);
    }

    #[test]
    fn text_errors_name_the_line() {
        let err = parse_text::<f64>("1 2 1\n2 x 1\n").unwrap_err();
        assert!(matches!(&err, Error::Parse(msg) if msg.starts_with("line 2")), "{err}");
        assert!(parse_text::<f64>("1 2\n").is_err());
        assert_eq!(parse_text::<f64>("1 1 2\n").unwrap_err(), Error::SelfLoop(1));
    }

    #[test]
    fn json_round_trip() {
        let g: Graph<f64> = nicholson_graph();
        let back: Graph<f64> = parse_json(&write_json(&g)).unwrap();
        assert_eq!(back.edges(), g.edges());
        let back: Graph<f64> = parse_text(&write_text(&g)).unwrap();
        assert_eq!(back.edges(), g.edges());
    }

    #[test]
    fn json_with_isolated_vertex_is_disconnected() {
        let err = parse_json::<f64>(r#"{"n": 3, "edges": [[1, 2, 1.0]]}"#).unwrap_err();
        assert_eq!(err, Error::Disconnected);
        assert!(parse_json::<f64>(r#"{"n": 2, "edges": [[1, 3, 1.0]]}"#).is_err());
    }
}
