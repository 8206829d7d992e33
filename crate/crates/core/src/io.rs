//! File formats.
//!
//! Metric: CSV whose first record is `n`, followed by `n` rows of `n` values.
//! Graph: text whose first line is `n m`, followed by `m` lines `u v [w]`
//! (0-based, `w` defaults to 1). A regular graph writes a one-port self-loop
//! as one `v v` line and a two-port self-loop as two.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graphs::RegularGraph;
use crate::metric::{FiniteMetric, WeightedGraph};
use crate::transforms::MetricTransform;

fn parse_err(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn read_metric_csv(reader: impl Read) -> Result<FiniteMetric> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let first = records
        .next()
        .ok_or_else(|| parse_err("empty metric file"))?
        .map_err(|e| parse_err(e.to_string()))?;
    let n: usize = first
        .get(0)
        .and_then(|s| s.parse().ok())
        .filter(|_| first.len() == 1)
        .ok_or_else(|| parse_err("first line must be the point count"))?;
    let mut rows = Vec::with_capacity(n);
    for (i, rec) in records.enumerate() {
        let rec = rec.map_err(|e| parse_err(e.to_string()))?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        let row: Vec<f64> = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| parse_err(format!("row {i}: bad number {s:?}"))))
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.len() != n {
        return Err(parse_err(format!("expected {n} rows, found {}", rows.len())));
    }
    FiniteMetric::from_rows(&rows)
}

pub fn write_metric_csv(writer: impl Write, m: &FiniteMetric) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e.to_string()));
    w.write_record([m.len().to_string()]).map_err(io)?;
    for i in 0..m.len() {
        w.write_record(m.row(i).iter().map(|v| v.to_string())).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

fn content_lines(reader: impl Read) -> impl Iterator<Item = std::io::Result<String>> {
    BufReader::new(reader).lines().filter(|l| match l {
        Ok(s) => !s.trim().is_empty() && !s.trim_start().starts_with('#'),
        Err(_) => true,
    })
}

pub fn read_graph(reader: impl Read) -> Result<WeightedGraph> {
    let mut lines = content_lines(reader);
    let header = lines.next().ok_or_else(|| parse_err("empty graph file"))??;
    let head: Vec<usize> = header
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| parse_err(format!("bad header {header:?}"))))
        .collect::<Result<_>>()?;
    let [n, m] = head[..] else {
        return Err(parse_err("header must be \"n m\""));
    };
    let mut edges = Vec::with_capacity(m);
    for line in lines {
        let line = line?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 2 && parts.len() != 3 {
            return Err(parse_err(format!("bad edge line {line:?}")));
        }
        let u: usize = parts[0].parse().map_err(|_| parse_err(format!("bad vertex in {line:?}")))?;
        let v: usize = parts[1].parse().map_err(|_| parse_err(format!("bad vertex in {line:?}")))?;
        let w: f64 = match parts.get(2) {
            Some(s) => s.parse().map_err(|_| parse_err(format!("bad weight in {line:?}")))?,
            None => 1.0,
        };
        edges.push((u, v, w));
    }
    if edges.len() != m {
        return Err(parse_err(format!("header promises {m} edges, found {}", edges.len())));
    }
    WeightedGraph::new(n, edges)
}

pub fn write_graph(writer: impl Write, g: &WeightedGraph) -> Result<()> {
    let mut w = BufWriter::new(writer);
    writeln!(w, "{} {}", g.n, g.edges.len())?;
    for &(u, v, wt) in &g.edges {
        if wt == 1.0 {
            writeln!(w, "{u} {v}")?;
        } else {
            writeln!(w, "{u} {v} {wt}")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Edge list of a regular graph in which every port appears exactly once.
pub fn port_edges(g: &RegularGraph) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(g.n() * g.degree() / 2);
    for v in 0..g.n() {
        for i in 0..g.degree() {
            let (w, j) = g.rot(v, i);
            if (v, i) < (w, j) || (v, i) == (w, j) {
                out.push((v, w));
                if v == w && i != j {
                    out.push((v, v));
                }
            }
        }
    }
    out
}

pub fn write_regular_graph(writer: impl Write, g: &RegularGraph) -> Result<()> {
    let edges = port_edges(g);
    let mut w = BufWriter::new(writer);
    writeln!(w, "{} {}", g.n(), edges.len())?;
    for (u, v) in edges {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an unweighted graph file as a regular graph; the degree is inferred
/// and must be the same at every vertex.
pub fn read_regular_graph(reader: impl Read) -> Result<RegularGraph> {
    let g = read_graph(reader)?;
    if g.edges.iter().any(|&(_, _, w)| w != 1.0) {
        return Err(parse_err("regular graph files must be unweighted"));
    }
    let mut deg = vec![0usize; g.n];
    for &(u, v, _) in &g.edges {
        deg[u] += 1;
        if u != v {
            deg[v] += 1;
        }
    }
    let d = deg.first().copied().unwrap_or(0);
    if deg.iter().any(|&x| x != d) {
        return Err(parse_err("graph is not regular"));
    }
    let edges: Vec<(usize, usize)> = g.edges.iter().map(|&(u, v, _)| (u, v)).collect();
    RegularGraph::from_edges(g.n, d, &edges)
}

pub fn parse_transform(json: &str) -> Result<MetricTransform> {
    serde_json::from_str(json).map_err(|e| parse_err(format!("transform: {e}")))
}

pub fn load_metric(path: impl AsRef<Path>) -> Result<FiniteMetric> {
    read_metric_csv(File::open(path)?)
}

pub fn save_metric(path: impl AsRef<Path>, m: &FiniteMetric) -> Result<()> {
    write_metric_csv(File::create(path)?, m)
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    read_graph(File::open(path)?)
}

pub fn load_regular_graph(path: impl AsRef<Path>) -> Result<RegularGraph> {
    read_regular_graph(File::open(path)?)
}

pub fn save_regular_graph(path: impl AsRef<Path>, g: &RegularGraph) -> Result<()> {
    write_regular_graph(File::create(path)?, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_round_trip() {
        let m = FiniteMetric::line(&[0.0, 1.5, 4.0]);
        let mut buf = Vec::new();
        write_metric_csv(&mut buf, &m).unwrap();
        assert_eq!(read_metric_csv(buf.as_slice()).unwrap(), m);
        assert!(read_metric_csv("2\n0,1\n".as_bytes()).is_err());
    }

    #[test]
    fn graph_round_trip_with_loops() {
        let g = RegularGraph::complete_with_loops(3).unwrap();
        let mut buf = Vec::new();
        write_regular_graph(&mut buf, &g).unwrap();
        let back = read_regular_graph(buf.as_slice()).unwrap();
        assert_eq!(back.adjacency_counts(), g.adjacency_counts());
        let w = read_graph("3 2\n0 1\n1 2 2.5\n".as_bytes()).unwrap();
        assert_eq!(w.edges[1], (1, 2, 2.5));
    }
}
