//! Proxy topologies and the full-mesh RTT matrix derived from them.
//!
//! A raw topology is a weighted undirected graph: nodes are candidate proxy
//! locations, links carry round-trip times in milliseconds. The overlay
//! operates on the *full mesh* closure of that graph: for every node pair the
//! mesh entry is the RTT of the shortest raw route between them, so the mesh
//! always satisfies the triangle inequality by construction.
//!
//! Text format, one directive per line (`#` starts a comment):
//!
//! ```text
//! node 0 fra
//! node 1 ams
//! node 2
//! link 0 1 12.5
//! link 1 2 7.25
//! ```
//!
//! Node indices must be dense (`0..n-1`); links are undirected, positive and
//! unique; the graph must be connected.

use std::fmt::Write as _;

use thiserror::Error;

/// Errors produced while parsing or validating a topology description.
#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("line {line}: expected `node <index> [name]` or `link <u> <v> <rtt_ms>`, got {got:?}")]
    Malformed { line: usize, got: String },
    #[error("line {line}: cannot parse {field} from {got:?}")]
    BadNumber {
        line: usize,
        field: &'static str,
        got: String,
    },
    #[error("line {line}: duplicate node index {index}")]
    DuplicateNode { line: usize, index: usize },
    #[error("line {line}: self-loop on node {index}")]
    SelfLoop { line: usize, index: usize },
    #[error("line {line}: duplicate link between {u} and {v}")]
    DuplicateLink { line: usize, u: usize, v: usize },
    #[error("line {line}: link references unknown node {index}")]
    UnknownNode { line: usize, index: usize },
    #[error("line {line}: link RTT must be positive and finite, got {got}")]
    BadRtt { line: usize, got: f64 },
    #[error("node indices are not dense: expected 0..{expected}, missing {missing}")]
    SparseIndices { expected: usize, missing: usize },
    #[error("topology has no nodes")]
    Empty,
    #[error("graph is disconnected: node {unreached} is not reachable from node 0")]
    Disconnected { unreached: usize },
}

/// A validated raw proxy graph.
#[derive(Debug, Clone)]
pub struct ProxyGraph {
    names: Vec<Option<String>>,
    edges: Vec<(usize, usize, f64)>,
}

impl ProxyGraph {
    /// Builds a graph from explicit parts, running the same validation as the
    /// text parser (line numbers in errors refer to edge positions).
    pub fn new(
        node_count: usize,
        names: Vec<Option<String>>,
        edges: Vec<(usize, usize, f64)>,
    ) -> Result<Self, TopologyError> {
        if node_count == 0 {
            return Err(TopologyError::Empty);
        }
        let mut names = names;
        names.resize(node_count, None);
        let mut seen = std::collections::HashSet::new();
        for (pos, &(u, v, rtt)) in edges.iter().enumerate() {
            let line = pos + 1;
            if u == v {
                return Err(TopologyError::SelfLoop { line, index: u });
            }
            for idx in [u, v] {
                if idx >= node_count {
                    return Err(TopologyError::UnknownNode { line, index: idx });
                }
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(TopologyError::DuplicateLink {
                    line,
                    u: u.min(v),
                    v: u.max(v),
                });
            }
            if !(rtt.is_finite() && rtt > 0.0) {
                return Err(TopologyError::BadRtt { line, got: rtt });
            }
        }
        let g = ProxyGraph { names, edges };
        g.check_connected()?;
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    /// Optional human-readable name of a node.
    pub fn name(&self, index: usize) -> Option<&str> {
        self.names.get(index).and_then(|n| n.as_deref())
    }

    fn check_connected(&self) -> Result<(), TopologyError> {
        let n = self.node_count();
        let mut adj = vec![Vec::new(); n];
        for &(u, v, _) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            None => Ok(()),
            Some(unreached) => Err(TopologyError::Disconnected { unreached }),
        }
    }

    /// Serializes back to the text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, name) in self.names.iter().enumerate() {
            match name {
                Some(name) => writeln!(out, "node {i} {name}").unwrap(),
                None => writeln!(out, "node {i}").unwrap(),
            }
        }
        for &(u, v, rtt) in &self.edges {
            writeln!(out, "link {u} {v} {rtt}").unwrap();
        }
        out
    }
}

/// Parses the line-oriented topology format.
pub fn parse_topology(text: &str) -> Result<ProxyGraph, TopologyError> {
    let mut nodes: Vec<(usize, Option<String>, usize)> = Vec::new(); // (index, name, line)
    let mut edges: Vec<(usize, usize, f64, usize)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let mut fields = content.split_whitespace();
        let Some(kind) = fields.next() else { continue };
        match kind {
            "node" => {
                let idx_str = fields.next().ok_or_else(|| TopologyError::Malformed {
                    line,
                    got: content.trim().to_string(),
                })?;
                let index: usize = idx_str.parse().map_err(|_| TopologyError::BadNumber {
                    line,
                    field: "node index",
                    got: idx_str.to_string(),
                })?;
                let name = fields.next().map(|s| s.to_string());
                if fields.next().is_some() {
                    return Err(TopologyError::Malformed {
                        line,
                        got: content.trim().to_string(),
                    });
                }
                if nodes.iter().any(|&(i, _, _)| i == index) {
                    return Err(TopologyError::DuplicateNode { line, index });
                }
                nodes.push((index, name, line));
            }
            "link" => {
                let rest: Vec<&str> = fields.collect();
                if rest.len() != 3 {
                    return Err(TopologyError::Malformed {
                        line,
                        got: content.trim().to_string(),
                    });
                }
                let u: usize = rest[0].parse().map_err(|_| TopologyError::BadNumber {
                    line,
                    field: "link endpoint",
                    got: rest[0].to_string(),
                })?;
                let v: usize = rest[1].parse().map_err(|_| TopologyError::BadNumber {
                    line,
                    field: "link endpoint",
                    got: rest[1].to_string(),
                })?;
                let rtt: f64 = rest[2].parse().map_err(|_| TopologyError::BadNumber {
                    line,
                    field: "link rtt",
                    got: rest[2].to_string(),
                })?;
                edges.push((u, v, rtt, line));
            }
            _ => {
                return Err(TopologyError::Malformed {
                    line,
                    got: content.trim().to_string(),
                })
            }
        }
    }

    if nodes.is_empty() {
        return Err(TopologyError::Empty);
    }
    let n = nodes.len();
    let mut names: Vec<Option<Option<String>>> = vec![None; n];
    for (index, name, _line) in nodes {
        if index >= n {
            // Some index in 0..n must then be missing.
            let missing = (0..n)
                .find(|i| names[*i].is_none())
                .expect("an out-of-range index implies a gap below n");
            return Err(TopologyError::SparseIndices {
                expected: n,
                missing,
            });
        }
        names[index] = Some(name);
    }
    let names: Vec<Option<String>> = names
        .into_iter()
        .map(|slot| slot.expect("dense after the check above"))
        .collect();

    let mut seen = std::collections::HashSet::new();
    let mut clean_edges = Vec::with_capacity(edges.len());
    for (u, v, rtt, line) in edges {
        if u == v {
            return Err(TopologyError::SelfLoop { line, index: u });
        }
        for idx in [u, v] {
            if idx >= n {
                return Err(TopologyError::UnknownNode { line, index: idx });
            }
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(TopologyError::DuplicateLink {
                line,
                u: u.min(v),
                v: u.max(v),
            });
        }
        if !(rtt.is_finite() && rtt > 0.0) {
            return Err(TopologyError::BadRtt { line, got: rtt });
        }
        clean_edges.push((u, v, rtt));
    }

    let graph = ProxyGraph {
        names,
        edges: clean_edges,
    };
    graph.check_connected()?;
    Ok(graph)
}

/// Builds the full-mesh RTT matrix from a raw graph: every pair's entry is the
/// RTT of the shortest raw route between the two nodes.
pub fn build_full_mesh(graph: &ProxyGraph) -> DistanceMatrix {
    let n = graph.node_count();
    let mut cells = vec![f64::INFINITY; n * n];
    for i in 0..n {
        cells[i * n + i] = 0.0;
    }
    for &(u, v, rtt) in graph.edges() {
        let cur = cells[u * n + v];
        if rtt < cur {
            cells[u * n + v] = rtt;
            cells[v * n + u] = rtt;
        }
    }
    // Floyd-Warshall; updates are applied symmetrically so the result is
    // bitwise symmetric even for float weights.
    for k in 0..n {
        for i in 0..n {
            let dik = cells[i * n + k];
            if !dik.is_finite() {
                continue;
            }
            for j in (i + 1)..n {
                let alt = dik + cells[k * n + j];
                if alt < cells[i * n + j] {
                    cells[i * n + j] = alt;
                    cells[j * n + i] = alt;
                }
            }
        }
    }
    DistanceMatrix { n, cells }
}

/// Symmetric all-pairs RTT matrix (milliseconds). Off-diagonal entries are
/// positive; the diagonal is zero. Matrices built by [`build_full_mesh`]
/// additionally satisfy the triangle inequality; measurement updates applied
/// later may perturb that property, which the path computation tolerates.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    cells: Vec<f64>,
}

/// Errors from constructing or importing a [`DistanceMatrix`].
#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("matrix must have at least one node")]
    Empty,
    #[error("row {row} has {got} entries, expected {expected}")]
    RowLength {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("missing or malformed `n=<count>` header, got {got:?}")]
    BadHeader { got: String },
    #[error("expected {expected} rows, got {got}")]
    RowCount { expected: usize, got: usize },
    #[error("cannot parse {got:?} as a number (row {row}, column {col})")]
    BadCell { row: usize, col: usize, got: String },
    #[error("diagonal entry ({i},{i}) must be zero, got {got}")]
    NonZeroDiagonal { i: usize, got: f64 },
    #[error("entry ({i},{j}) must be positive and finite, got {got}")]
    BadEntry { i: usize, j: usize, got: f64 },
    #[error("matrix is not symmetric at ({i},{j}): {a} vs {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("index {index} out of range for {n} nodes")]
    OutOfRange { index: usize, n: usize },
}

impl DistanceMatrix {
    /// Validates and wraps a dense row-major matrix.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut cells = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MatrixError::RowLength {
                    row: i,
                    got: row.len(),
                    expected: n,
                });
            }
            cells.extend_from_slice(row);
        }
        let m = DistanceMatrix { n, cells };
        m.validate()?;
        Ok(m)
    }

    fn validate(&self) -> Result<(), MatrixError> {
        let n = self.n;
        for i in 0..n {
            let d = self.cells[i * n + i];
            if d != 0.0 {
                return Err(MatrixError::NonZeroDiagonal { i, got: d });
            }
            for j in (i + 1)..n {
                let a = self.cells[i * n + j];
                let b = self.cells[j * n + i];
                if !(a.is_finite() && a > 0.0) {
                    return Err(MatrixError::BadEntry { i, j, got: a });
                }
                if a != b {
                    return Err(MatrixError::Asymmetric { i, j, a, b });
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// RTT between `i` and `j` in milliseconds.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.n + j]
    }

    /// Overwrites one pair symmetrically. Rejects diagonal writes and
    /// non-positive values; used by the controller when measurements arrive.
    pub fn set_pair(&mut self, i: usize, j: usize, rtt_ms: f64) -> Result<(), MatrixError> {
        let n = self.n;
        for idx in [i, j] {
            if idx >= n {
                return Err(MatrixError::OutOfRange { index: idx, n });
            }
        }
        if i == j {
            return Err(MatrixError::NonZeroDiagonal { i, got: rtt_ms });
        }
        if !(rtt_ms.is_finite() && rtt_ms > 0.0) {
            return Err(MatrixError::BadEntry { i, j, got: rtt_ms });
        }
        self.cells[i * n + j] = rtt_ms;
        self.cells[j * n + i] = rtt_ms;
        Ok(())
    }

    /// CSV export: a `n=<count>` header line, then `n` comma-separated rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        writeln!(out, "n={}", self.n).unwrap();
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            writeln!(out, "{}", row.join(",")).unwrap();
        }
        out
    }

    /// Parses the CSV format produced by [`DistanceMatrix::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self, MatrixError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().unwrap_or("");
        let n: usize = header
            .trim()
            .strip_prefix("n=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| MatrixError::BadHeader {
                got: header.to_string(),
            })?;
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut rows = Vec::with_capacity(n);
        for (row_idx, line) in lines.enumerate() {
            let cells: Result<Vec<f64>, MatrixError> = line
                .split(',')
                .enumerate()
                .map(|(col, cell)| {
                    cell.trim().parse().map_err(|_| MatrixError::BadCell {
                        row: row_idx,
                        col,
                        got: cell.trim().to_string(),
                    })
                })
                .collect();
            rows.push(cells?);
        }
        if rows.len() != n {
            return Err(MatrixError::RowCount {
                expected: n,
                got: rows.len(),
            });
        }
        Self::from_rows(rows)
    }
}
