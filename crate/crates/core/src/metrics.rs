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

//! Distances on weighted graphs: weighted path distance, degree path
//! metric and resistance metric, plus the product-metric experiments.
//!
//! The resistance metric needs symmetric weights and `m ≡ 1`. It is
//! `r(x, y) = E(f)^{-1/2}` where `f` is the Dirichlet potential with
//! `f(x) = 0`, `f(y) = 1`, harmonic elsewhere, and
//! `E(f) = ½ Σ_{u,v} (f(v) - f(u))² ω(u, v)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use petgraph::algo::astar;
use petgraph::graph::{DiGraph, NodeIndex};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{GraphError, VertexFunction, WeightedGraph};
use crate::warped::{Product, ProductVertex, WarpedError};

/// Slack for the triangle inequality and the intrinsic bound.
pub const INTRINSIC_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("vertex `{to}` is unreachable from `{from}`")]
    Unreachable { from: String, to: String },
    #[error("resistance metric undefined: weights must be symmetric and every measure 1")]
    ResistanceUndefined,
    #[error("operation needs symmetric edge weights")]
    Asymmetric,
    #[error("`{0}` is not a maximum of alpha on the chosen subgraph")]
    NotMaximal(String),
    #[error("singular Dirichlet system")]
    Singular,
    #[error("unknown metric kind `{0}`")]
    UnknownKind(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Warped(#[from] WarpedError),
}

pub type Result<T, E = MetricError> = std::result::Result<T, E>;

/// Per-edge length used by the weighted path distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthMode {
    /// Length `ω(u, v)`.
    #[default]
    Weight,
    /// Length `ω(u, v)^{-1/2}`.
    InverseSqrtWeight,
}

impl LengthMode {
    pub const ALL: [LengthMode; 2] = [LengthMode::Weight, LengthMode::InverseSqrtWeight];

    fn length(self, w: f64) -> f64 {
        match self {
            LengthMode::Weight => w,
            LengthMode::InverseSqrtWeight => w.powf(-0.5),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Path(LengthMode),
    DegreePath,
    Resistance,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Path(LengthMode::Weight) => "path",
            MetricKind::Path(LengthMode::InverseSqrtWeight) => "path-inverse-sqrt",
            MetricKind::DegreePath => "degree-path",
            MetricKind::Resistance => "resistance",
        })
    }
}

impl FromStr for MetricKind {
    type Err = MetricError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "path" => Ok(MetricKind::Path(LengthMode::Weight)),
            "path-inverse-sqrt" => Ok(MetricKind::Path(LengthMode::InverseSqrtWeight)),
            "degree-path" => Ok(MetricKind::DegreePath),
            "resistance" => Ok(MetricKind::Resistance),
            other => Err(MetricError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricResult {
    pub kind: MetricKind,
    pub from: String,
    pub to: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirichletSolution {
    pub source: usize,
    pub sink: usize,
    /// Zero off the component containing `source` and `sink`.
    pub potential: VertexFunction,
    pub energy: f64,
    /// Largest `|Δf|` over interior vertices of the component.
    pub residual: f64,
}

fn shortest_path(
    g: &WeightedGraph,
    x: usize,
    y: usize,
    length: impl Fn(usize, usize, f64) -> f64,
) -> Result<(f64, Vec<usize>)> {
    g.check_index(x)?;
    g.check_index(y)?;
    let mut pg = DiGraph::<(), f64>::with_capacity(g.len(), g.edge_count());
    for _ in 0..g.len() {
        pg.add_node(());
    }
    for (i, j, w) in g.edges() {
        pg.add_edge(NodeIndex::new(i), NodeIndex::new(j), length(i, j, w));
    }
    let found = astar(
        &pg,
        NodeIndex::new(x),
        |n| n.index() == y,
        |e| *e.weight(),
        |_| 0.0,
    );
    match found {
        Some((d, nodes)) => Ok((d, nodes.into_iter().map(|n| n.index()).collect())),
        None => Err(MetricError::Unreachable {
            from: g.id(x).to_string(),
            to: g.id(y).to_string(),
        }),
    }
}

fn path_result(g: &WeightedGraph, kind: MetricKind, x: usize, y: usize, d: f64, p: Vec<usize>) -> MetricResult {
    MetricResult {
        kind,
        from: g.id(x).to_string(),
        to: g.id(y).to_string(),
        value: d,
        path: Some(p.into_iter().map(|i| g.id(i).to_string()).collect()),
        potential: None,
    }
}

/// Shortest-path distance with per-edge length given by `mode`.
pub fn weighted_path_distance(
    g: &WeightedGraph,
    x: usize,
    y: usize,
    mode: LengthMode,
) -> Result<MetricResult> {
    if !g.is_symmetric() {
        return Err(MetricError::Asymmetric);
    }
    let (d, p) = shortest_path(g, x, y, |_, _, w| mode.length(w))?;
    Ok(path_result(g, MetricKind::Path(mode), x, y, d, p))
}

/// Shortest path with per-edge length `(D_u ∨ D_v)^{-1/2}`.
pub fn degree_path_metric(g: &WeightedGraph, x: usize, y: usize) -> Result<MetricResult> {
    let deg = g.degrees();
    let (d, p) = shortest_path(g, x, y, |i, j, _| deg[i].max(deg[j]).powf(-0.5))?;
    Ok(path_result(g, MetricKind::DegreePath, x, y, d, p))
}

/// Solve the Dirichlet problem `f(x) = 0`, `f(y) = 1`, `Δf = 0` elsewhere
/// on the component of `x`.
pub fn dirichlet_solution(g: &WeightedGraph, x: usize, y: usize) -> Result<DirichletSolution> {
    g.check_index(x)?;
    g.check_index(y)?;
    if !g.is_symmetric() || !g.has_unit_measure() {
        return Err(MetricError::ResistanceUndefined);
    }
    let comp = g.component_of(x);
    if x == y || !comp.contains(&y) {
        return Err(MetricError::Unreachable { from: g.id(x).to_string(), to: g.id(y).to_string() });
    }
    let interior: Vec<usize> = comp.iter().copied().filter(|&z| z != x && z != y).collect();
    let mut pos = vec![usize::MAX; g.len()];
    for (k, &z) in interior.iter().enumerate() {
        pos[z] = k;
    }
    // Rows: Σ_w ω(z,w) f(w) - D_z f(z) = 0, with f(y) = 1 moved to the right.
    let k = interior.len();
    let mut a = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DVector::<f64>::zeros(k);
    for (r, &z) in interior.iter().enumerate() {
        for &(w, om) in g.neighbors(z) {
            a[(r, r)] -= om;
            if w == y {
                rhs[r] -= om;
            } else if w != x {
                a[(r, pos[w])] += om;
            }
        }
    }
    let sol = if k == 0 { DVector::zeros(0) } else { a.lu().solve(&rhs).ok_or(MetricError::Singular)? };
    let mut f = VertexFunction::zeros(g.len());
    f[y] = 1.0;
    for (r, &z) in interior.iter().enumerate() {
        f[z] = sol[r];
    }
    let energy = 0.5
        * g.edges().map(|(u, v, w)| (f[v] - f[u]).powi(2) * w).sum::<f64>();
    let residual = interior
        .iter()
        .map(|&z| g.lap_with(z, &|i| f[i]).abs())
        .fold(0.0, f64::max);
    Ok(DirichletSolution { source: x, sink: y, potential: f, energy, residual })
}

/// `r(x, y) = E(f_xy)^{-1/2}`, with `r(x, x) = 0`.
pub fn resistance_metric(g: &WeightedGraph, x: usize, y: usize) -> Result<MetricResult> {
    g.check_index(x)?;
    g.check_index(y)?;
    if !g.is_symmetric() || !g.has_unit_measure() {
        return Err(MetricError::ResistanceUndefined);
    }
    let base = MetricResult {
        kind: MetricKind::Resistance,
        from: g.id(x).to_string(),
        to: g.id(y).to_string(),
        value: 0.0,
        path: None,
        potential: None,
    };
    if x == y {
        return Ok(base);
    }
    let sol = dirichlet_solution(g, x, y)?;
    Ok(MetricResult {
        value: sol.energy.powf(-0.5),
        potential: Some(sol.potential.into_values()),
        ..base
    })
}

/// One distance of the given kind.
pub fn distance(g: &WeightedGraph, kind: MetricKind, x: usize, y: usize) -> Result<MetricResult> {
    match kind {
        MetricKind::Path(mode) => weighted_path_distance(g, x, y, mode),
        MetricKind::DegreePath => degree_path_metric(g, x, y),
        MetricKind::Resistance => resistance_metric(g, x, y),
    }
}

/// The full pairwise table of one metric; rows computed in parallel.
pub fn distance_table(g: &WeightedGraph, kind: MetricKind) -> Result<Vec<Vec<f64>>> {
    (0..g.len())
        .into_par_iter()
        .map(|x| (0..g.len()).map(|y| distance(g, kind, x, y).map(|r| r.value)).collect())
        .collect()
}

/// Triangle inequality plus `Σ_{y∼x} ρ²(x, y) ω(x, y) ≤ 1` at every vertex.
pub fn intrinsic_metric_check(g: &WeightedGraph, rho: &[Vec<f64>]) -> bool {
    let n = g.len();
    if rho.len() != n || rho.iter().any(|row| row.len() != n) {
        return false;
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let rhs = rho[x][y] + rho[y][z];
                if rho[x][z] > rhs + INTRINSIC_TOL * rhs.max(1.0) {
                    return false;
                }
            }
        }
        let s: f64 = g.neighbors(x).iter().map(|&(y, w)| rho[x][y].powi(2) * w).sum();
        if s > 1.0 + INTRINSIC_TOL {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeAgreement {
    pub mode: LengthMode,
    /// Largest `|d_product - α(p*)^{-1} d_{G₁}|` over pairs in `K`.
    pub max_deviation: f64,
    pub agrees: bool,
    /// Per-unit length of a `G₁` edge in the fibre over `p*` relative to
    /// `G₁`: `m₂α⁻²` for `Weight`, `(m₂α⁻²)^{-1/2}` for `InverseSqrtWeight`.
    pub fibre_scale: f64,
    /// Largest `|d_product - fibre_scale · d_{G₁}|` over pairs in `K`.
    pub fibre_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TotallyGeodesicReport {
    pub hypothesis_lhs: f64,
    pub hypothesis_rhs: f64,
    pub hypothesis_holds: bool,
    pub modes: Vec<ModeAgreement>,
}

/// Hypothesis and conclusion of the totally-geodesic fibre statement.
///
/// `k` and `h` are vertex subsets of `G₁` and `G₂`; `∂H` is the set of
/// vertices outside `h` adjacent to it, and `d(p*, ∂H)` counts hops
/// (infinite when `∂H` is empty). An empty infimum is `+∞`.
pub fn totally_geodesic_check(
    product: &Product,
    k: &[usize],
    h: &[usize],
    p_star: usize,
    tol: f64,
) -> Result<TotallyGeodesicReport> {
    let (g1, g2) = (&product.g1, &product.g2);
    if !g1.is_symmetric() || !g2.is_symmetric() {
        return Err(MetricError::Asymmetric);
    }
    for &x in k {
        g1.check_index(x)?;
    }
    for &p in h {
        g2.check_index(p)?;
    }
    g2.check_index(p_star)?;
    let alpha = product.alpha_factor()?;
    let beta = product.beta_factor()?;
    let a_star = alpha[p_star];
    if !h.contains(&p_star) || h.iter().any(|&p| alpha[p] > a_star) {
        return Err(MetricError::NotMaximal(g2.id(p_star).to_string()));
    }
    let in_k = |x: usize| k.contains(&x);
    let in_h = |p: usize| h.contains(&p);
    let edge_sum: f64 = g1.edges().filter(|&(x, y, _)| x < y && in_k(x) && in_k(y)).map(|e| e.2).sum();
    let lhs = edge_sum / a_star;

    let boundary: Vec<usize> = (0..g2.len())
        .filter(|&q| !in_h(q) && h.iter().any(|&p| g2.is_adjacent(p, q)))
        .collect();
    let hops = hop_distance(g2, p_star, &boundary);
    let inf_beta_inv = beta.values().iter().map(|b| 1.0 / b).fold(f64::INFINITY, f64::min);
    let inf_w2 = g2
        .edges()
        .filter(|&(p, q, _)| in_h(p) && in_h(q))
        .map(|e| e.2)
        .fold(f64::INFINITY, f64::min);
    let rhs = 2.0 * hops * inf_beta_inv * inf_w2;

    let edge_factor = g2.measure(p_star) / (a_star * a_star);
    let mut modes = Vec::new();
    for mode in LengthMode::ALL {
        let fibre_scale = match mode {
            LengthMode::Weight => edge_factor,
            LengthMode::InverseSqrtWeight => edge_factor.powf(-0.5),
        };
        let mut dev = 0.0f64;
        let mut fibre_dev = 0.0f64;
        for &x in k {
            for &y in k {
                if x >= y {
                    continue;
                }
                let d1 = weighted_path_distance(g1, x, y, mode)?.value;
                let a = product.index(ProductVertex::new(x, p_star));
                let b = product.index(ProductVertex::new(y, p_star));
                let dp = weighted_path_distance(&product.graph, a, b, mode)?.value;
                dev = dev.max((dp - d1 / a_star).abs());
                fibre_dev = fibre_dev.max((dp - fibre_scale * d1).abs());
            }
        }
        modes.push(ModeAgreement {
            mode,
            max_deviation: dev,
            agrees: dev <= tol,
            fibre_scale,
            fibre_deviation: fibre_dev,
        });
    }
    Ok(TotallyGeodesicReport { hypothesis_lhs: lhs, hypothesis_rhs: rhs, hypothesis_holds: lhs < rhs, modes })
}

fn hop_distance(g: &WeightedGraph, start: usize, targets: &[usize]) -> f64 {
    if targets.is_empty() {
        return f64::INFINITY;
    }
    let mut dist = vec![usize::MAX; g.len()];
    let mut queue = std::collections::VecDeque::from([start]);
    dist[start] = 0;
    while let Some(u) = queue.pop_front() {
        if targets.contains(&u) {
            return dist[u] as f64;
        }
        for &(v, _) in g.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    f64::INFINITY
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductResistanceReport {
    pub measured: f64,
    pub claimed: f64,
    pub factor: f64,
    pub alpha_inv_l2: f64,
    pub relative_deviation: f64,
}

/// Compare `r((x,p),(y,p))` with `r_{G₁}(x, y) / ‖α⁻¹‖_{L²}`.
pub fn product_resistance_experiment(
    product: &Product,
    x: usize,
    y: usize,
    p: usize,
) -> Result<ProductResistanceReport> {
    let alpha = product.alpha_factor()?;
    product.g2.check_index(p)?;
    let factor = resistance_metric(&product.g1, x, y)?.value;
    let norm = alpha.values().iter().map(|a| a.powi(-2)).sum::<f64>().sqrt();
    let a = product.index(ProductVertex::new(x, p));
    let b = product.index(ProductVertex::new(y, p));
    let measured = resistance_metric(&product.graph, a, b)?.value;
    let claimed = factor / norm;
    Ok(ProductResistanceReport {
        measured,
        claimed,
        factor,
        alpha_inv_l2: norm,
        relative_deviation: (measured - claimed).abs() / measured.abs().max(f64::MIN_POSITIVE),
    })
}
