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

//! Weighted graph model and the three local operators every curvature
//! computation is assembled from: the Laplacian `Δ`, the square field
//! operator `Γ` and the iterated form `Γ₂`.
//!
//! A graph carries a strictly positive vertex measure `m` and directed,
//! non-negative edge weights `ω`. Weights may be asymmetric, but the
//! support is symmetric: `ω(x, y) > 0` exactly when `ω(y, x) > 0`.
//!
//! ```text
//! Δf(x)      = 1/m(x) Σ_y (f(y) - f(x)) ω(x, y)
//! Γ(f, g)(x) = 1/(2 m(x)) Σ_y (f(y) - f(x)) (g(y) - g(x)) ω(x, y)
//! Γ₂(f, g)   = ½ (ΔΓ(f, g) - Γ(Δf, g) - Γ(f, Δg))
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::{Add, Index, IndexMut};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Errors raised while building graphs or evaluating operators on them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("vertex index {index} out of range for a graph with {len} vertices")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("self-loop at vertex `{0}`")]
    SelfLoop(String),
    #[error("non-positive measure {measure} at vertex `{id}`")]
    NonPositiveMeasure { id: String, measure: f64 },
    #[error("invalid weight {weight} on edge `{from}` -> `{to}`")]
    InvalidWeight { from: String, to: String, weight: f64 },
    #[error("duplicate edge `{from}` -> `{to}`")]
    DuplicateEdge { from: String, to: String },
    #[error("edge `{from}` -> `{to}` has positive weight but `{to}` -> `{from}` does not")]
    MissingReverse { from: String, to: String },
    #[error("function has {got} values but the graph has {expected} vertices")]
    FunctionLength { expected: usize, got: usize },
    #[error("scale factor must be positive and finite, got {0}")]
    NonPositiveScale(f64),
    #[error("invalid dimension parameter `{0}`: expected a positive number or `inf`")]
    InvalidDimension(String),
    #[error("ball radius must be 1 or 2, got {0}")]
    InvalidRadius(usize),
}

pub type Result<T, E = GraphError> = std::result::Result<T, E>;

/// The dimension parameter `N ∈ (0, ∞]` of a curvature-dimension inequality.
///
/// `N = ∞` is a value in its own right, with `1/N = 0` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dim {
    Finite(f64),
    Infinite,
}

impl Dim {
    pub fn new(n: f64) -> Result<Self> {
        if n == f64::INFINITY {
            Ok(Dim::Infinite)
        } else if n.is_finite() && n > 0.0 {
            Ok(Dim::Finite(n))
        } else {
            Err(GraphError::InvalidDimension(n.to_string()))
        }
    }

    /// `1/N`, which is exactly zero for `N = ∞`.
    pub fn inv(self) -> f64 {
        match self {
            Dim::Finite(n) => 1.0 / n,
            Dim::Infinite => 0.0,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Dim::Finite(n) => n,
            Dim::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Dim::Infinite)
    }
}

impl Add for Dim {
    type Output = Dim;

    fn add(self, rhs: Dim) -> Dim {
        match (self, rhs) {
            (Dim::Finite(a), Dim::Finite(b)) => Dim::Finite(a + b),
            _ => Dim::Infinite,
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Finite(n) => write!(f, "{n}"),
            Dim::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Dim {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" | "∞" => Ok(Dim::Infinite),
            _ => {
                let n: f64 = t
                    .parse()
                    .map_err(|_| GraphError::InvalidDimension(s.to_string()))?;
                if n.is_nan() {
                    return Err(GraphError::InvalidDimension(s.to_string()));
                }
                Dim::new(n).map_err(|_| GraphError::InvalidDimension(s.to_string()))
            }
        }
    }
}

impl Serialize for Dim {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dim::Finite(n) => serializer.serialize_f64(*n),
            Dim::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Dim {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(n) => Dim::new(n).map_err(serde::de::Error::custom),
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A real-valued function on the vertices of a graph, stored by dense index.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexFunction(Vec<f64>);

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Self {
        VertexFunction(values)
    }

    pub fn constant(len: usize, c: f64) -> Self {
        VertexFunction(vec![c; len])
    }

    pub fn zeros(len: usize) -> Self {
        Self::constant(len, 0.0)
    }

    /// The indicator `δ_i`.
    pub fn indicator(len: usize, i: usize) -> Self {
        let mut v = vec![0.0; len];
        v[i] = 1.0;
        VertexFunction(v)
    }

    pub fn from_fn(len: usize, f: impl FnMut(usize) -> f64) -> Self {
        VertexFunction((0..len).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        VertexFunction(self.0.iter().map(|&v| f(v)).collect())
    }

    /// `a·self + b·other`, pointwise.
    pub fn combine(&self, a: f64, other: &VertexFunction, b: f64) -> Self {
        assert_eq!(self.len(), other.len(), "vertex functions of different length");
        VertexFunction(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&u, &v)| a * u + b * v)
                .collect(),
        )
    }

    pub fn shifted(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    pub fn pointwise_mul(&self, other: &VertexFunction) -> Self {
        assert_eq!(self.len(), other.len(), "vertex functions of different length");
        VertexFunction(self.0.iter().zip(&other.0).map(|(&u, &v)| u * v).collect())
    }
}

impl Index<usize> for VertexFunction {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for VertexFunction {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl From<Vec<f64>> for VertexFunction {
    fn from(v: Vec<f64>) -> Self {
        VertexFunction(v)
    }
}

/// A finite weighted graph `(V, ω, m)`.
///
/// Vertex ids are opaque strings; every numeric routine works on the dense
/// index assigned at construction time (the order in which vertices were
/// listed). Out-neighbour lists are sorted by target index.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    measure: Vec<f64>,
    out: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    /// Validate and build a graph from vertex and edge lists.
    ///
    /// With `symmetric` set every listed edge is mirrored with the same
    /// weight. Zero-weight entries are dropped, since absent means zero.
    pub fn build<S: AsRef<str>>(
        vertices: &[(S, f64)],
        edges: &[(S, S, f64)],
        symmetric: bool,
    ) -> Result<Self> {
        let mut ids = Vec::with_capacity(vertices.len());
        let mut index = HashMap::with_capacity(vertices.len());
        let mut measure = Vec::with_capacity(vertices.len());
        for (id, m) in vertices {
            let id = id.as_ref().to_string();
            if !(m.is_finite() && *m > 0.0) {
                return Err(GraphError::NonPositiveMeasure { id, measure: *m });
            }
            if index.insert(id.clone(), ids.len()).is_some() {
                return Err(GraphError::DuplicateVertex(id));
            }
            ids.push(id);
            measure.push(*m);
        }

        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| GraphError::UnknownVertex(id.to_string()))
        };
        let mut directed: Vec<(usize, usize, f64)> = Vec::with_capacity(edges.len() * 2);
        for (from, to, w) in edges {
            let (from, to) = (from.as_ref(), to.as_ref());
            let i = lookup(from)?;
            let j = lookup(to)?;
            if i == j {
                return Err(GraphError::SelfLoop(from.to_string()));
            }
            if !(w.is_finite() && *w >= 0.0) {
                return Err(GraphError::InvalidWeight {
                    from: from.to_string(),
                    to: to.to_string(),
                    weight: *w,
                });
            }
            directed.push((i, j, *w));
            if symmetric {
                directed.push((j, i, *w));
            }
        }
        Self::from_directed(ids, index, measure, directed)
    }

    /// Build from dense data: `weights[i][j] = ω(i, j)`.
    pub fn from_dense(ids: Vec<String>, measure: Vec<f64>, weights: &[Vec<f64>]) -> Result<Self> {
        let n = ids.len();
        let mut index = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if index.insert(id.clone(), i).is_some() {
                return Err(GraphError::DuplicateVertex(id.clone()));
            }
        }
        if measure.len() != n || weights.len() != n {
            return Err(GraphError::FunctionLength {
                expected: n,
                got: measure.len().min(weights.len()),
            });
        }
        for (i, m) in measure.iter().enumerate() {
            if !(m.is_finite() && *m > 0.0) {
                return Err(GraphError::NonPositiveMeasure {
                    id: ids[i].clone(),
                    measure: *m,
                });
            }
        }
        let mut directed = Vec::new();
        for (i, row) in weights.iter().enumerate() {
            if row.len() != n {
                return Err(GraphError::FunctionLength { expected: n, got: row.len() });
            }
            for (j, &w) in row.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                if i == j {
                    return Err(GraphError::SelfLoop(ids[i].clone()));
                }
                directed.push((i, j, w));
            }
        }
        let mut g = Self::from_directed(ids, index, measure, directed)?;
        g.index.shrink_to_fit();
        Ok(g)
    }

    fn from_directed(
        ids: Vec<String>,
        index: HashMap<String, usize>,
        measure: Vec<f64>,
        directed: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        let n = ids.len();
        let mut out: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(directed.len());
        for (i, j, w) in directed {
            if !(w.is_finite() && w >= 0.0) {
                return Err(GraphError::InvalidWeight {
                    from: ids[i].clone(),
                    to: ids[j].clone(),
                    weight: w,
                });
            }
            if !seen.insert((i, j)) {
                return Err(GraphError::DuplicateEdge {
                    from: ids[i].clone(),
                    to: ids[j].clone(),
                });
            }
            if w > 0.0 {
                out[i].push((j, w));
            }
        }
        for row in &mut out {
            row.sort_by_key(|&(j, _)| j);
        }
        let g = WeightedGraph { ids, index, measure, out };
        for i in 0..n {
            for &(j, _) in &g.out[i] {
                if g.weight(j, i) <= 0.0 {
                    return Err(GraphError::MissingReverse {
                        from: g.ids[i].clone(),
                        to: g.ids[j].clone(),
                    });
                }
            }
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(id.to_string()))
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(GraphError::IndexOutOfRange { index: i, len: self.len() })
        }
    }

    pub fn check_function(&self, f: &VertexFunction) -> Result<()> {
        if f.len() == self.len() {
            Ok(())
        } else {
            Err(GraphError::FunctionLength { expected: self.len(), got: f.len() })
        }
    }

    pub fn measure(&self, i: usize) -> f64 {
        self.measure[i]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    /// Out-neighbours of `i` with their weights `ω(i, ·) > 0`, sorted by index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.out[i]
    }

    /// `ω(i, j)`, zero when there is no edge.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let row = &self.out[i];
        row.binary_search_by_key(&j, |&(k, _)| k)
            .map(|pos| row[pos].1)
            .unwrap_or(0.0)
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.weight(i, j) > 0.0
    }

    /// Number of directed edges with positive weight.
    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// All directed edges `(from, to, ω)` in index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, w)| (i, j, w)))
    }

    /// True when `ω(x, y) = ω(y, x)` for every pair.
    pub fn is_symmetric(&self) -> bool {
        self.edges().all(|(i, j, w)| self.weight(j, i) == w)
    }

    pub fn has_unit_measure(&self) -> bool {
        self.measure.iter().all(|&m| m == 1.0)
    }

    pub fn is_isolated(&self, i: usize) -> bool {
        self.out[i].is_empty()
    }

    /// `D_x = 1/m(x) Σ_y ω(x, y)`.
    pub fn degree(&self, x: usize) -> Result<f64> {
        self.check_index(x)?;
        Ok(self.deg(x))
    }

    pub(crate) fn deg(&self, x: usize) -> f64 {
        self.out[x].iter().map(|&(_, w)| w).sum::<f64>() / self.measure[x]
    }

    pub fn degrees(&self) -> VertexFunction {
        VertexFunction::from_fn(self.len(), |x| self.deg(x))
    }

    pub fn laplacian(&self, f: &VertexFunction, x: usize) -> Result<f64> {
        self.check_index(x)?;
        self.check_function(f)?;
        Ok(self.lap_with(x, &|i| f[i]))
    }

    pub fn gamma(&self, f: &VertexFunction, g: &VertexFunction, x: usize) -> Result<f64> {
        self.check_index(x)?;
        self.check_function(f)?;
        self.check_function(g)?;
        Ok(self.gamma_with(x, &|i| f[i], &|i| g[i]))
    }

    /// `Γ₂(f, g)(x)`, evaluated by composing `Δ` and `Γ`.
    pub fn gamma2(&self, f: &VertexFunction, g: &VertexFunction, x: usize) -> Result<f64> {
        self.check_index(x)?;
        self.check_function(f)?;
        self.check_function(g)?;
        Ok(self.gamma2_with(x, &|i| f[i], &|i| g[i]))
    }

    /// `Δf` at every vertex.
    pub fn laplacian_fn(&self, f: &VertexFunction) -> Result<VertexFunction> {
        self.check_function(f)?;
        Ok(VertexFunction::from_fn(self.len(), |x| self.lap_with(x, &|i| f[i])))
    }

    /// `Γ(f, g)` at every vertex.
    pub fn gamma_fn(&self, f: &VertexFunction, g: &VertexFunction) -> Result<VertexFunction> {
        self.check_function(f)?;
        self.check_function(g)?;
        Ok(VertexFunction::from_fn(self.len(), |x| {
            self.gamma_with(x, &|i| f[i], &|i| g[i])
        }))
    }

    pub(crate) fn lap_with(&self, x: usize, f: &dyn Fn(usize) -> f64) -> f64 {
        let fx = f(x);
        self.out[x]
            .iter()
            .map(|&(y, w)| (f(y) - fx) * w)
            .sum::<f64>()
            / self.measure[x]
    }

    pub(crate) fn gamma_with(
        &self,
        x: usize,
        f: &dyn Fn(usize) -> f64,
        g: &dyn Fn(usize) -> f64,
    ) -> f64 {
        let (fx, gx) = (f(x), g(x));
        self.out[x]
            .iter()
            .map(|&(y, w)| (f(y) - fx) * (g(y) - gx) * w)
            .sum::<f64>()
            / (2.0 * self.measure[x])
    }

    pub(crate) fn gamma2_with(
        &self,
        x: usize,
        f: &dyn Fn(usize) -> f64,
        g: &dyn Fn(usize) -> f64,
    ) -> f64 {
        let gamma_fg = |z: usize| self.gamma_with(z, f, g);
        let lap_f = |z: usize| self.lap_with(z, f);
        let lap_g = |z: usize| self.lap_with(z, g);
        let lap_gamma = self.lap_with(x, &gamma_fg);
        let gamma_lap_f = self.gamma_with(x, &lap_f, g);
        let gamma_lap_g = self.gamma_with(x, f, &lap_g);
        0.5 * (lap_gamma - gamma_lap_f - gamma_lap_g)
    }

    /// `G_λ = (G, λω, m)`.
    pub fn scale_weights(&self, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(GraphError::NonPositiveScale(lambda));
        }
        let mut g = self.clone();
        for row in &mut g.out {
            for (_, w) in row.iter_mut() {
                *w *= lambda;
            }
        }
        Ok(g)
    }

    /// Vertices reachable from `x` along at most `r ∈ {1, 2}` out-edges,
    /// `x` first, then the 1-sphere, then the 2-sphere (each in index order).
    pub fn ball(&self, x: usize, r: usize) -> Result<Vec<usize>> {
        self.check_index(x)?;
        if !(r == 1 || r == 2) {
            return Err(GraphError::InvalidRadius(r));
        }
        let (s1, s2) = self.spheres(x);
        let mut out = vec![x];
        out.extend(s1);
        if r == 2 {
            out.extend(s2);
        }
        Ok(out)
    }

    /// The 1-sphere and 2-sphere around `x`.
    pub(crate) fn spheres(&self, x: usize) -> (Vec<usize>, Vec<usize>) {
        let s1: Vec<usize> = self.out[x].iter().map(|&(y, _)| y).collect();
        let mut s2: Vec<usize> = s1
            .iter()
            .flat_map(|&y| self.out[y].iter().map(|&(z, _)| z))
            .filter(|&z| z != x && self.weight(x, z) == 0.0)
            .collect();
        s2.sort_unstable();
        s2.dedup();
        (s1, s2)
    }

    /// Whether every vertex can reach every other one.
    pub fn is_connected(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        self.component_of(0).len() == self.len()
    }

    pub(crate) fn component_of(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![start];
        seen[start] = true;
        let mut comp = Vec::new();
        while let Some(u) = stack.pop() {
            comp.push(u);
            for &(v, _) in &self.out[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        comp.sort_unstable();
        comp
    }
}
