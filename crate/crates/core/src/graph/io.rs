//! Text export of a [`DataGraph`]:
//!
//! ```text
//! # umapmix-graph n=50 k=5 metric=euclidean
//! # scale 0 0.41 0.23
//! ...
//! 0 3 1
//! 0 7 0.5123
//! ```
//!
//! Floats use the shortest representation that parses back to the same value.

use std::fmt::Write as _;
use std::path::Path;

use super::fuzzy::{DataGraph, Edge};
use super::scale::LocalScale;
use crate::error::{Error, Result};

pub fn to_text(g: &DataGraph) -> String {
    let mut s = String::new();
    writeln!(s, "# umapmix-graph n={} k={} metric={}", g.n(), g.k(), g.metric()).unwrap();
    for (i, sc) in g.scales().iter().enumerate() {
        writeln!(s, "# scale {i} {} {}", sc.rho, sc.sigma).unwrap();
    }
    for e in g.edges() {
        writeln!(s, "{} {} {}", e.i, e.j, e.p).unwrap();
    }
    s
}

pub fn from_text(text: &str, path: &Path) -> Result<DataGraph> {
    let bad = |line: usize, msg: String| Error::Parse { path: path.to_path_buf(), row: line, msg };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty graph file".into()))?;
    let fields = header
        .strip_prefix("# umapmix-graph ")
        .ok_or_else(|| bad(1, format!("bad header `{header}`")))?;
    let (mut n, mut k, mut metric) = (None, None, None);
    for kv in fields.split_whitespace() {
        match kv.split_once('=') {
            Some(("n", v)) => n = v.parse::<usize>().ok(),
            Some(("k", v)) => k = v.parse::<usize>().ok(),
            Some(("metric", v)) => metric = Some(v.parse()?),
            _ => return Err(bad(1, format!("unknown header field `{kv}`"))),
        }
    }
    let (n, k, metric) = match (n, k, metric) {
        (Some(n), Some(k), Some(m)) => (n, k, m),
        _ => return Err(bad(1, "header needs n=, k= and metric=".into())),
    };
    let num = |line: usize, s: Option<&str>| -> Result<f64> {
        s.and_then(|v| v.parse().ok()).ok_or_else(|| bad(line, "expected a number".into()))
    };
    let idx = |line: usize, s: Option<&str>| -> Result<usize> {
        s.and_then(|v| v.parse().ok()).ok_or_else(|| bad(line, "expected an index".into()))
    };
    let mut scales = vec![None; n];
    let mut edges = Vec::new();
    for (no, line) in lines {
        if let Some(rest) = line.strip_prefix("# scale ") {
            let mut it = rest.split_whitespace();
            let i = idx(no, it.next())?;
            let sc = LocalScale { rho: num(no, it.next())?, sigma: num(no, it.next())? };
            *scales.get_mut(i).ok_or_else(|| bad(no, format!("scale index {i} >= n")))? = Some(sc);
        } else if line.starts_with('#') || line.trim().is_empty() {
            continue;
        } else {
            let mut it = line.split_whitespace();
            edges.push(Edge { i: idx(no, it.next())?, j: idx(no, it.next())?, p: num(no, it.next())? });
        }
    }
    let scales = scales
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| bad(0, format!("missing scale for point {i}"))))
        .collect::<Result<Vec<_>>>()?;
    DataGraph::from_edges(n, k, metric, edges, scales)
}

impl DataGraph {
    pub fn export(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, to_text(self)).map_err(|e| Error::io(path, e))
    }

    pub fn import(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        from_text(&text, path)
    }
}
