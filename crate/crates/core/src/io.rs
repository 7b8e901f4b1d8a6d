// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! JSON graph and warp files.
//!
//! A graph file is
//!
//! ```json
//! {
//!   "vertices": [{"id": "x", "measure": 1.0}, {"id": "y", "measure": 1.0}],
//!   "edges": [{"from": "x", "to": "y", "weight": 1.0}],
//!   "symmetric": true
//! }
//! ```
//!
//! With `symmetric` each edge is listed once and mirrored. A warp file names
//! its two factors, either by a path relative to the warp file or inline,
//! and gives `alpha` on the second factor and `beta` on the first:
//!
//! ```json
//! {"g1": "k2.json", "g2": {...}, "alpha": {"p": 1.0, "q": 2.0}, "beta": {"x": 1.0, "y": 1.0}}
//! ```
//!
//! Saving is canonical: fixed key order, vertices in index order, edges in
//! index order and shortest round-trip float formatting, so
//! `save ∘ load ∘ save` is byte-stable.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use thiserror::Error;

use crate::graph::{Dim, GraphError, VertexFunction, WeightedGraph};
use crate::warped::WarpedProductSpec;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}, column {column}: malformed document: {message}")]
    Malformed { line: usize, column: usize, message: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: GraphError },
    #[error("warp table `{table}`: {message}")]
    WarpTable { table: &'static str, message: String },
    #[error("invalid dimension list `{0}`: expected `N1,N2`")]
    Dims(String),
    #[error("invalid pair list: {0}")]
    Pairs(String),
}

pub type Result<T, E = IoError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: String,
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub from: String,
    pub to: String,
    pub weight: f64,
}

/// The serialized form of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    pub symmetric: bool,
}

impl GraphFile {
    /// Canonical document for `g`; symmetric graphs list each edge once.
    pub fn from_graph(g: &WeightedGraph) -> Self {
        let symmetric = g.is_symmetric();
        let vertices = (0..g.len())
            .map(|i| VertexRecord { id: g.id(i).to_string(), measure: g.measure(i) })
            .collect();
        let edges = g
            .edges()
            .filter(|&(i, j, _)| !symmetric || i < j)
            .map(|(i, j, w)| EdgeRecord { from: g.id(i).to_string(), to: g.id(j).to_string(), weight: w })
            .collect();
        GraphFile { vertices, edges, symmetric }
    }

    pub fn to_graph(&self) -> Result<WeightedGraph, GraphError> {
        let v: Vec<(&str, f64)> = self.vertices.iter().map(|r| (r.id.as_str(), r.measure)).collect();
        let e: Vec<(&str, &str, f64)> =
            self.edges.iter().map(|r| (r.from.as_str(), r.to.as_str(), r.weight)).collect();
        WeightedGraph::build(&v, &e, self.symmetric)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraphFile<'a> {
    #[serde(borrow)]
    vertices: Vec<&'a RawValue>,
    #[serde(borrow)]
    edges: Vec<&'a RawValue>,
    symmetric: bool,
}

fn malformed(e: serde_json::Error) -> IoError {
    IoError::Malformed { line: e.line(), column: e.column(), message: e.to_string() }
}

/// 1-based line of `part` inside `src`; `part` must borrow from `src`.
fn line_of(src: &str, part: &str) -> usize {
    let offset = (part.as_ptr() as usize).saturating_sub(src.as_ptr() as usize).min(src.len());
    src[..offset].bytes().filter(|&b| b == b'\n').count() + 1
}

/// Parse and validate a graph document, reporting the line of the first
/// offending vertex or edge.
pub fn parse_graph(src: &str) -> Result<WeightedGraph> {
    let raw: RawGraphFile = serde_json::from_str(src).map_err(malformed)?;
    let at = |part: &RawValue, e: serde_json::Error| {
        let line = line_of(src, part.get());
        IoError::Malformed { line: line + e.line() - 1, column: e.column(), message: e.to_string() }
    };
    let vertices = raw
        .vertices
        .iter()
        .map(|r| serde_json::from_str::<VertexRecord>(r.get()).map_err(|e| at(r, e)))
        .collect::<Result<Vec<_>>>()?;
    let edges = raw
        .edges
        .iter()
        .map(|r| serde_json::from_str::<EdgeRecord>(r.get()).map_err(|e| at(r, e)))
        .collect::<Result<Vec<_>>>()?;
    let file = GraphFile { vertices, edges, symmetric: raw.symmetric };
    file.to_graph().map_err(|source| {
        let element = locate(&file, &source).map(|k| match k {
            Element::Vertex(i) => raw.vertices[i].get(),
            Element::Edge(i) => raw.edges[i].get(),
        });
        IoError::Invalid { line: element.map_or(1, |p| line_of(src, p)), source }
    })
}

enum Element {
    Vertex(usize),
    Edge(usize),
}

/// The element at which `build` stops with `err`.
fn locate(file: &GraphFile, err: &GraphError) -> Option<Element> {
    let vs = &file.vertices;
    let es = &file.edges;
    let same = |e: &EdgeRecord, from: &str, to: &str| {
        (e.from == from && e.to == to) || (file.symmetric && e.from == to && e.to == from)
    };
    match err {
        GraphError::NonPositiveMeasure { id, .. } => vs.iter().position(|v| &v.id == id).map(Element::Vertex),
        GraphError::DuplicateVertex(id) => {
            vs.iter().enumerate().filter(|(_, v)| &v.id == id).nth(1).map(|(i, _)| Element::Vertex(i))
        }
        GraphError::UnknownVertex(id) => {
            es.iter().position(|e| &e.from == id || &e.to == id).map(Element::Edge)
        }
        GraphError::SelfLoop(id) => es.iter().position(|e| &e.from == id && &e.to == id).map(Element::Edge),
        GraphError::InvalidWeight { from, to, .. } | GraphError::MissingReverse { from, to } => {
            es.iter().position(|e| same(e, from, to)).map(Element::Edge)
        }
        GraphError::DuplicateEdge { from, to } => {
            es.iter().enumerate().filter(|(_, e)| same(e, from, to)).nth(1).map(|(i, _)| Element::Edge(i))
        }
        _ => None,
    }
}

/// Canonical pretty-printed document for `g`, with a trailing newline.
pub fn graph_to_string(g: &WeightedGraph) -> String {
    let mut s = serde_json::to_string_pretty(&GraphFile::from_graph(g)).expect("graph files always serialize");
    s.push('\n');
    s
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| IoError::Io { path: path.to_path_buf(), source })
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    parse_graph(&read(path.as_ref())?)
}

pub fn save_graph(g: &WeightedGraph, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &graph_to_string(g))
}

/// A factor reference inside a warp file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphRef {
    Path(PathBuf),
    Inline(GraphFile),
}

/// The serialized form of a warped product specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WarpFile {
    pub g1: GraphRef,
    pub g2: GraphRef,
    pub alpha: BTreeMap<String, f64>,
    pub beta: BTreeMap<String, f64>,
}

impl WarpFile {
    /// Self-contained document for `spec` with both factors inline.
    pub fn from_spec(spec: &WarpedProductSpec) -> Self {
        let table = |g: &WeightedGraph, f: &VertexFunction| {
            (0..g.len()).map(|i| (g.id(i).to_string(), f[i])).collect()
        };
        WarpFile {
            g1: GraphRef::Inline(GraphFile::from_graph(&spec.g1)),
            g2: GraphRef::Inline(GraphFile::from_graph(&spec.g2)),
            alpha: table(&spec.g2, &spec.alpha),
            beta: table(&spec.g1, &spec.beta),
        }
    }

    /// Resolve factor paths against `base` and validate both tables.
    pub fn to_spec(&self, base: Option<&Path>) -> Result<WarpedProductSpec> {
        let resolve = |r: &GraphRef| -> Result<WeightedGraph> {
            match r {
                GraphRef::Inline(f) => f.to_graph().map_err(|source| IoError::Invalid { line: 1, source }),
                GraphRef::Path(p) => load_graph(base.map_or_else(|| p.clone(), |b| b.join(p))),
            }
        };
        let g1 = resolve(&self.g1)?;
        let g2 = resolve(&self.g2)?;
        let alpha = table_function("alpha", &self.alpha, &g2)?;
        let beta = table_function("beta", &self.beta, &g1)?;
        Ok(WarpedProductSpec { g1, g2, alpha, beta })
    }
}

fn table_function(
    table: &'static str,
    values: &BTreeMap<String, f64>,
    g: &WeightedGraph,
) -> Result<VertexFunction> {
    let err = |message: String| IoError::WarpTable { table, message };
    if let Some(extra) = values.keys().find(|k| g.index_of(k).is_err()) {
        return Err(err(format!("unknown vertex `{extra}`")));
    }
    let mut out = Vec::with_capacity(g.len());
    for id in g.ids() {
        let v = *values.get(id).ok_or_else(|| err(format!("missing vertex `{id}`")))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(err(format!("value {v} at `{id}` is not positive")));
        }
        out.push(v);
    }
    Ok(VertexFunction::new(out))
}

/// Parse a warp document; relative factor paths resolve against `base`.
pub fn parse_warp(src: &str, base: Option<&Path>) -> Result<WarpedProductSpec> {
    let file: WarpFile = serde_json::from_str(src).map_err(malformed)?;
    file.to_spec(base)
}

pub fn load_warp(path: impl AsRef<Path>) -> Result<WarpedProductSpec> {
    let path = path.as_ref();
    parse_warp(&read(path)?, path.parent())
}

pub fn warp_to_string(spec: &WarpedProductSpec) -> String {
    let mut s = serde_json::to_string_pretty(&WarpFile::from_spec(spec)).expect("warp files always serialize");
    s.push('\n');
    s
}

pub fn save_warp(spec: &WarpedProductSpec, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &warp_to_string(spec))
}

/// Parse `N1,N2`, each a positive number or `inf`.
pub fn parse_dims(s: &str) -> Result<(Dim, Dim)> {
    let (a, b) = s.split_once(',').ok_or_else(|| IoError::Dims(s.to_string()))?;
    let d = |t: &str| t.trim().parse::<Dim>().map_err(|_| IoError::Dims(s.to_string()));
    Ok((d(a)?, d(b)?))
}

/// Vertex pairs selected on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PairSelection {
    All,
    List(Vec<(usize, usize)>),
}

impl PairSelection {
    /// Ordered pairs `x < y` for `All`, the given list otherwise.
    pub fn pairs(&self, n: usize) -> Vec<(usize, usize)> {
        match self {
            PairSelection::All => (0..n).flat_map(|x| (x + 1..n).map(move |y| (x, y))).collect(),
            PairSelection::List(v) => v.clone(),
        }
    }
}

/// Parse `all` or `;`-separated `x,y` pairs of vertex ids of `g`.
///
/// Ids may themselves contain commas; a pair is accepted when exactly one
/// comma splits it into two known ids.
pub fn parse_pairs(s: &str, g: &WeightedGraph) -> Result<PairSelection> {
    if s.trim() == "all" {
        return Ok(PairSelection::All);
    }
    let mut out = Vec::new();
    for item in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
        let splits: Vec<(usize, usize)> = item
            .match_indices(',')
            .filter_map(|(k, _)| {
                let (a, b) = (item[..k].trim(), item[k + 1..].trim());
                Some((g.index_of(a).ok()?, g.index_of(b).ok()?))
            })
            .collect();
        match splits.as_slice() {
            [one] => out.push(*one),
            [] => return Err(IoError::Pairs(format!("`{item}` is not a pair of known vertex ids"))),
            _ => return Err(IoError::Pairs(format!("`{item}` splits into vertex ids in several ways"))),
        }
    }
    if out.is_empty() {
        return Err(IoError::Pairs("no pairs given".to_string()));
    }
    Ok(PairSelection::List(out))
}
