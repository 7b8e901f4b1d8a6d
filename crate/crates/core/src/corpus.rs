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

//! Seeded random graphs, trees and warped products for property sweeps.
//!
//! Every generator draws from a `ChaCha8Rng` seeded with the given seed, so
//! output depends only on the parameters and the seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Dim, GraphError, VertexFunction, WeightedGraph};
use crate::warped::WarpedProductSpec;

/// Attempts before [`random_graph`] gives up on connectivity.
pub const CONNECT_ATTEMPTS: usize = 1000;

/// The dimension grid used by the corpus sweeps.
pub const CORPUS_DIMS: [Dim; 4] = [Dim::Finite(1.0), Dim::Finite(2.0), Dim::Finite(5.0), Dim::Infinite];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorpusError {
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("no connected graph after {0} attempts")]
    CannotConnect(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub struct RandomGraphParams {
    pub n: usize,
    pub edge_prob: f64,
    pub weight_range: (f64, f64),
    pub measure_range: (f64, f64),
    /// Draw `ω(x, y)` and `ω(y, x)` independently on a symmetric support.
    pub asymmetric: bool,
}

impl RandomGraphParams {
    pub fn new(n: usize, edge_prob: f64) -> Self {
        RandomGraphParams {
            n,
            edge_prob,
            weight_range: (0.5, 2.0),
            measure_range: (0.5, 2.0),
            asymmetric: false,
        }
    }

    pub fn weights(mut self, lo: f64, hi: f64) -> Self {
        self.weight_range = (lo, hi);
        self
    }

    pub fn measures(mut self, lo: f64, hi: f64) -> Self {
        self.measure_range = (lo, hi);
        self
    }

    pub fn asymmetric(mut self, asymmetric: bool) -> Self {
        self.asymmetric = asymmetric;
        self
    }

    fn validate(&self) -> Result<()> {
        let range_ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && 0.0 < lo && lo <= hi;
        if self.n == 0 {
            return Err(CorpusError::InvalidParams("n must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.edge_prob) {
            return Err(CorpusError::InvalidParams(format!("edge probability {} outside [0, 1]", self.edge_prob)));
        }
        if !range_ok(self.weight_range) || !range_ok(self.measure_range) {
            return Err(CorpusError::InvalidParams("ranges must satisfy 0 < lo <= hi < inf".into()));
        }
        Ok(())
    }
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

/// A connected Erdős–Rényi style graph, retrying until connected.
pub fn random_graph(params: &RandomGraphParams, seed: u64) -> Result<WeightedGraph> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.n;
    for _ in 0..CONNECT_ATTEMPTS {
        let measure: Vec<f64> = (0..n).map(|_| draw(&mut rng, params.measure_range)).collect();
        let mut w = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(params.edge_prob) {
                    w[i][j] = draw(&mut rng, params.weight_range);
                    w[j][i] = if params.asymmetric { draw(&mut rng, params.weight_range) } else { w[i][j] };
                }
            }
        }
        let g = WeightedGraph::from_dense(ids(n), measure, &w)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(CorpusError::CannotConnect(CONNECT_ATTEMPTS))
}

/// A uniformly attached random tree with unit measure and symmetric weights.
pub fn random_tree(n: usize, weight_range: (f64, f64), seed: u64) -> Result<WeightedGraph> {
    RandomGraphParams::new(n.max(1), 0.0).weights(weight_range.0, weight_range.1).validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut w = vec![vec![0.0; n]; n];
    for k in 1..n {
        let (child, parent) = (order[k], order[rng.gen_range(0..k)]);
        let x = draw(&mut rng, weight_range);
        w[child][parent] = x;
        w[parent][child] = x;
    }
    Ok(WeightedGraph::from_dense(ids(n), vec![1.0; n], &w)?)
}

/// Parameters for [`random_warped_spec`].
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedCorpusParams {
    pub max_factor: usize,
    pub edge_prob: f64,
    pub warp_range: (f64, f64),
    pub unit_measure: bool,
}

impl Default for WarpedCorpusParams {
    fn default() -> Self {
        WarpedCorpusParams { max_factor: 6, edge_prob: 0.5, warp_range: (0.5, 2.0), unit_measure: false }
    }
}

/// Two connected factors with 2..=`max_factor` vertices and warps drawn
/// uniformly from `warp_range`.
pub fn random_warped_spec(params: &WarpedCorpusParams, seed: u64) -> Result<WarpedProductSpec> {
    if params.max_factor < 2 {
        return Err(CorpusError::InvalidParams("factors need at least 2 vertices".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factor = |rng: &mut ChaCha8Rng| {
        let n = rng.gen_range(2..=params.max_factor);
        let mut p = RandomGraphParams::new(n, params.edge_prob);
        if params.unit_measure {
            p = p.measures(1.0, 1.0);
        }
        random_graph(&p, rng.gen())
    };
    let g1 = factor(&mut rng)?;
    let g2 = factor(&mut rng)?;
    let alpha = VertexFunction::from_fn(g2.len(), |_| draw(&mut rng, params.warp_range));
    let beta = VertexFunction::from_fn(g1.len(), |_| draw(&mut rng, params.warp_range));
    Ok(WarpedProductSpec { g1, g2, alpha, beta })
}

/// A random function with entries uniform in `[-1, 1]`.
pub fn random_function(len: usize, rng: &mut impl Rng) -> VertexFunction {
    VertexFunction::from_fn(len, |_| rng.gen_range(-1.0..=1.0))
}

/// A seeded RNG for derived streams, such as per-trial test functions.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
