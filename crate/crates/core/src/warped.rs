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

//! Doubly warped and doubly twisted products of weighted graphs.
//!
//! For factors `G₁`, `G₂` and warping functions `α` on `G₂`, `β` on `G₁`
//! the product lives on the Cartesian product vertex set with
//!
//! ```text
//! ω((x,p),(y,p)) = m₂(p) α⁻²(p) ω₁(x,y)
//! ω((x,p),(x,q)) = m₁(x) β⁻²(x) ω₂(p,q)
//! m((x,p))       = m₁(x) m₂(p)
//! ```
//!
//! In the twisted variant `α` and `β` are arbitrary positive functions on
//! the product. Product vertex `(x, p)` has dense index `x·|G₂| + p` and id
//! `"(x,p)"` built from the factor ids.
//!
//! Everything past construction and the `Δ`/`Γ` splitting is specific to
//! warped products and returns [`WarpedError::NotWarped`] otherwise.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::curvature::{self, CurvatureError, EinsteinReport, Saturation};
use crate::graph::{Dim, GraphError, VertexFunction, WeightedGraph};

/// Tolerance used when comparing a bound with the exact curvature.
pub const BOUND_TOL: f64 = 1e-8;
/// Warping values within this distance of the extremum count as extremal.
pub const EXTREMA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WarpedError {
    #[error("warping function `{name}` has {got} values, expected {expected}")]
    WarpLength { name: &'static str, expected: usize, got: usize },
    #[error("warping function `{name}` is not positive and finite at index {index}: {value}")]
    NonPositiveWarp { name: &'static str, index: usize, value: f64 },
    #[error("operation needs a doubly warped product but the twisting functions vary along both factors")]
    NotWarped,
    #[error("curvature constants must be non-negative, got K1 = {0}, K2 = {1}")]
    NegativeConstant(f64, f64),
    #[error("product vertex ({x}, {p}) out of range for factors of size {n1} x {n2}")]
    VertexOutOfRange { x: usize, p: usize, n1: usize, n2: usize },
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T, E = WarpedError> = std::result::Result<T, E>;

/// Inputs of a doubly warped product: `α` on `G₂`, `β` on `G₁`.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedProductSpec {
    pub g1: WeightedGraph,
    pub g2: WeightedGraph,
    pub alpha: VertexFunction,
    pub beta: VertexFunction,
}

/// Inputs of a doubly twisted product: `α` and `β` on the product, indexed
/// `x·|G₂| + p`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistedProductSpec {
    pub g1: WeightedGraph,
    pub g2: WeightedGraph,
    pub alpha: VertexFunction,
    pub beta: VertexFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ProductVertex {
    pub x: usize,
    pub p: usize,
}

impl ProductVertex {
    pub fn new(x: usize, p: usize) -> Self {
        ProductVertex { x, p }
    }
}

fn check_warp(name: &'static str, f: &VertexFunction, expected: usize) -> Result<()> {
    if f.len() != expected {
        return Err(WarpedError::WarpLength { name, expected, got: f.len() });
    }
    for (index, &value) in f.values().iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(WarpedError::NonPositiveWarp { name, index, value });
        }
    }
    Ok(())
}

/// Build the doubly warped product graph.
pub fn doubly_warped_product(spec: &WarpedProductSpec) -> Result<WeightedGraph> {
    Ok(Product::warped(spec)?.graph)
}

/// Build the doubly twisted product graph.
pub fn doubly_twisted_product(spec: &TwistedProductSpec) -> Result<WeightedGraph> {
    Ok(Product::twisted(spec)?.graph)
}

/// `true` iff `Δf ≥ -1e-12` at every vertex.
pub fn subharmonic_check(g: &WeightedGraph, f: &VertexFunction) -> Result<bool, GraphError> {
    let lap = g.laplacian_fn(f)?;
    Ok(lap.values().iter().all(|&v| v >= -1e-12))
}

/// Residuals of the fibrewise splitting of `Δ` and `Γ` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplittingResidual {
    pub laplacian: f64,
    pub gamma: f64,
}

/// A decomposition of `Γ₂` on the product compared with direct evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gamma2Decomposition {
    /// The `G₁` term, already multiplied by its warping weight.
    pub first_factor: f64,
    /// The `G₂` term, already multiplied by its warping weight.
    pub second_factor: f64,
    /// `I`, without its `½α⁻²` prefactor.
    pub mixed_first: f64,
    /// `II`, without its `½β⁻²` prefactor.
    pub mixed_second: f64,
    pub decomposed: f64,
    pub direct: f64,
    pub residual: f64,
}

impl Gamma2Decomposition {
    fn new(first: f64, second: f64, i: f64, ii: f64, a2: f64, b2: f64, direct: f64) -> Self {
        let decomposed = first + second + 0.5 * a2 * i + 0.5 * b2 * ii;
        Gamma2Decomposition {
            first_factor: first,
            second_factor: second,
            mixed_first: i,
            mixed_second: ii,
            decomposed,
            direct,
            residual: (decomposed - direct).abs(),
        }
    }
}

/// Which of `Δ^{G₁}f₁(x)` and `Δ^{G₂}f₂(p)` are non-zero; selects the piece
/// of the piecewise forms `Q₁`, `Q₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LaplacianFlags {
    pub first_nonzero: bool,
    pub second_nonzero: bool,
}

impl LaplacianFlags {
    pub const BOTH: LaplacianFlags = LaplacianFlags { first_nonzero: true, second_nonzero: true };
    pub const NEITHER: LaplacianFlags =
        LaplacianFlags { first_nonzero: false, second_nonzero: false };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sandwich {
    pub lo: f64,
    pub hi: f64,
    pub first: f64,
    pub second: f64,
}

/// One case of the saturation-dependent upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SaturationCase {
    BothWeakly,
    FirstWeaklySecondUnsaturated,
    FirstUnsaturatedSecondWeakly,
    NeitherStrongly,
    /// Both weakly but not strongly saturated; minimum of the two mixed cases.
    MinRefinement,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationBound {
    pub first_saturation: Saturation,
    pub second_saturation: Saturation,
    pub cases: Vec<(SaturationCase, f64)>,
    /// Smallest bound among the applicable cases; `None` if no case applies.
    pub best: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SameDimension {
    pub upper: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvexityCheck {
    pub first_lhs: f64,
    pub first_rhs: f64,
    pub second_lhs: f64,
    pub second_rhs: f64,
    pub first_holds: bool,
    pub second_holds: bool,
    /// The convexity bound, present only when both predicates hold.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntersectionInequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DilationNumbers {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_beta: f64,
    pub beta_alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodPairWitness {
    pub x_min: String,
    pub p_min: String,
    pub first_lhs: f64,
    pub first_rhs: f64,
    pub second_lhs: f64,
    pub second_rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodPairReport {
    pub good: bool,
    pub witnesses: Vec<GoodPairWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityVerdict {
    pub dim: Dim,
    pub good_pair: bool,
    pub extrema_alpha: Vec<String>,
    pub extrema_beta: Vec<String>,
    pub equality_holds: bool,
    /// Largest `|K_(x,p) - min(α⁻²K₁, β⁻²K₂)|` over the extrema grid.
    pub equality_gap: f64,
    pub alpha_constant: bool,
    pub beta_constant: bool,
    pub einstein_first: EinsteinReport,
    pub einstein_second: EinsteinReport,
    /// `K_{G₁} - (α²/β²) K_{G₂}` on the common values; `None` unless both
    /// factors are Einstein and both warps constant.
    pub ratio_defect: Option<f64>,
    pub ratio_matches: bool,
    /// Good pair and equality observed, yet the predicted conclusion fails.
    pub contradiction: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundEntry {
    pub name: &'static str,
    pub side: Side,
    pub dim: Dim,
    pub value: f64,
    pub exact: f64,
    pub holds: bool,
}

impl BoundEntry {
    fn new(name: &'static str, side: Side, dim: Dim, value: f64, exact: f64) -> Self {
        let holds = match side {
            Side::Lower => value <= exact + BOUND_TOL,
            Side::Upper => exact <= value + BOUND_TOL,
        };
        BoundEntry { name, side, dim, value, exact, holds }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub vertex: String,
    pub n1: Dim,
    pub n2: Dim,
    pub exact: f64,
    pub entries: Vec<BoundEntry>,
    pub saturation: Option<SaturationBound>,
    /// Why the saturation cases were skipped, if they were.
    pub saturation_note: Option<String>,
    pub convexity_max: ConvexityCheck,
    pub convexity_min: ConvexityCheck,
    pub intersection: IntersectionInequality,
}

/// A constructed product together with its factors and warping data.
#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    pub g1: WeightedGraph,
    pub g2: WeightedGraph,
    /// `α` on the product, indexed like the product graph.
    alpha: Vec<f64>,
    /// `β` on the product, indexed like the product graph.
    beta: Vec<f64>,
    warped: bool,
    pub graph: WeightedGraph,
}

impl Product {
    pub fn warped(spec: &WarpedProductSpec) -> Result<Self> {
        let (n1, n2) = (spec.g1.len(), spec.g2.len());
        check_warp("alpha", &spec.alpha, n2)?;
        check_warp("beta", &spec.beta, n1)?;
        let alpha = (0..n1 * n2).map(|i| spec.alpha[i % n2]).collect();
        let beta = (0..n1 * n2).map(|i| spec.beta[i / n2]).collect();
        Self::assemble(spec.g1.clone(), spec.g2.clone(), alpha, beta, true)
    }

    pub fn twisted(spec: &TwistedProductSpec) -> Result<Self> {
        let (n1, n2) = (spec.g1.len(), spec.g2.len());
        check_warp("alpha", &spec.alpha, n1 * n2)?;
        check_warp("beta", &spec.beta, n1 * n2)?;
        let alpha = spec.alpha.values().to_vec();
        let beta = spec.beta.values().to_vec();
        let warped = (0..n1 * n2).all(|i| {
            let (x, p) = (i / n2, i % n2);
            alpha[i] == alpha[p] && beta[i] == beta[x * n2]
        });
        Self::assemble(spec.g1.clone(), spec.g2.clone(), alpha, beta, warped)
    }

    fn assemble(
        g1: WeightedGraph,
        g2: WeightedGraph,
        alpha: Vec<f64>,
        beta: Vec<f64>,
        warped: bool,
    ) -> Result<Self> {
        let (n1, n2) = (g1.len(), g2.len());
        let ids: Vec<String> = (0..n1 * n2)
            .map(|i| format!("({},{})", g1.id(i / n2), g2.id(i % n2)))
            .collect();
        let measure: Vec<f64> =
            (0..n1 * n2).map(|i| g1.measure(i / n2) * g2.measure(i % n2)).collect();
        let mut weights = vec![vec![0.0; n1 * n2]; n1 * n2];
        for x in 0..n1 {
            for p in 0..n2 {
                let i = x * n2 + p;
                for &(y, w) in g1.neighbors(x) {
                    weights[i][y * n2 + p] = g2.measure(p) * w / (alpha[i] * alpha[i]);
                }
                for &(q, w) in g2.neighbors(p) {
                    weights[i][x * n2 + q] = g1.measure(x) * w / (beta[i] * beta[i]);
                }
            }
        }
        let graph = WeightedGraph::from_dense(ids, measure, &weights)?;
        Ok(Product { g1, g2, alpha, beta, warped, graph })
    }

    pub fn is_warped(&self) -> bool {
        self.warped
    }

    pub fn n1(&self) -> usize {
        self.g1.len()
    }

    pub fn n2(&self) -> usize {
        self.g2.len()
    }

    pub fn index(&self, pt: ProductVertex) -> usize {
        pt.x * self.n2() + pt.p
    }

    pub fn point(&self, index: usize) -> ProductVertex {
        ProductVertex::new(index / self.n2(), index % self.n2())
    }

    pub fn points(&self) -> impl Iterator<Item = ProductVertex> + '_ {
        (0..self.graph.len()).map(|i| self.point(i))
    }

    pub fn check_point(&self, pt: ProductVertex) -> Result<()> {
        if pt.x < self.n1() && pt.p < self.n2() {
            Ok(())
        } else {
            Err(WarpedError::VertexOutOfRange { x: pt.x, p: pt.p, n1: self.n1(), n2: self.n2() })
        }
    }

    pub fn alpha_at(&self, pt: ProductVertex) -> f64 {
        self.alpha[self.index(pt)]
    }

    pub fn beta_at(&self, pt: ProductVertex) -> f64 {
        self.beta[self.index(pt)]
    }

    fn require_warped(&self) -> Result<()> {
        if self.warped {
            Ok(())
        } else {
            Err(WarpedError::NotWarped)
        }
    }

    /// `α` as a function on `G₂` (warped products only).
    pub fn alpha_factor(&self) -> Result<VertexFunction> {
        self.require_warped()?;
        Ok(VertexFunction::from_fn(self.n2(), |p| self.alpha[p]))
    }

    /// `β` as a function on `G₁` (warped products only).
    pub fn beta_factor(&self) -> Result<VertexFunction> {
        self.require_warped()?;
        Ok(VertexFunction::from_fn(self.n1(), |x| self.beta[x * self.n2()]))
    }

    fn a(&self, p: usize) -> f64 {
        self.alpha[p]
    }

    fn b(&self, x: usize) -> f64 {
        self.beta[x * self.n2()]
    }

    fn a_m2(&self, p: usize) -> f64 {
        self.a(p).powi(-2)
    }

    fn b_m2(&self, x: usize) -> f64 {
        self.b(x).powi(-2)
    }

    /// `u₁ ⊕ u₂ : (x, p) ↦ u₁(x) + u₂(p)`.
    pub fn lift_sum(&self, u1: &VertexFunction, u2: &VertexFunction) -> VertexFunction {
        let n2 = self.n2();
        VertexFunction::from_fn(self.graph.len(), |i| u1[i / n2] + u2[i % n2])
    }

    /// `u₁ ⊗ u₂ : (x, p) ↦ u₁(x) u₂(p)`.
    pub fn lift_tensor(&self, u1: &VertexFunction, u2: &VertexFunction) -> VertexFunction {
        let n2 = self.n2();
        VertexFunction::from_fn(self.graph.len(), |i| u1[i / n2] * u2[i % n2])
    }

    fn check_product_fn(&self, u: &VertexFunction) -> Result<()> {
        Ok(self.graph.check_function(u)?)
    }

    /// Compare `Δu` and `Γ(u, v)` with their fibrewise decompositions.
    pub fn operator_splitting(
        &self,
        u: &VertexFunction,
        v: &VertexFunction,
        pt: ProductVertex,
    ) -> Result<SplittingResidual> {
        self.check_point(pt)?;
        self.check_product_fn(u)?;
        self.check_product_fn(v)?;
        let n2 = self.n2();
        let (x, p) = (pt.x, pt.p);
        let i = self.index(pt);
        let a2 = self.alpha[i].powi(-2);
        let b2 = self.beta[i].powi(-2);
        let up = |y: usize| u[y * n2 + p];
        let vp = |y: usize| v[y * n2 + p];
        let ux = |q: usize| u[x * n2 + q];
        let vx = |q: usize| v[x * n2 + q];
        let lap = self.graph.lap_with(i, &|k| u[k]);
        let lap_split = a2 * self.g1.lap_with(x, &up) + b2 * self.g2.lap_with(p, &ux);
        let gam = self.graph.gamma_with(i, &|k| u[k], &|k| v[k]);
        let gam_split =
            a2 * self.g1.gamma_with(x, &up, &vp) + b2 * self.g2.gamma_with(p, &ux, &vx);
        Ok(SplittingResidual {
            laplacian: (lap - lap_split).abs(),
            gamma: (gam - gam_split).abs(),
        })
    }

    /// `Γ₂(u, v)` split into factor terms and the two mixed terms `I`, `II`.
    pub fn gamma2_first_formulation(
        &self,
        u: &VertexFunction,
        v: &VertexFunction,
        pt: ProductVertex,
    ) -> Result<Gamma2Decomposition> {
        self.require_warped()?;
        self.check_point(pt)?;
        self.check_product_fn(u)?;
        self.check_product_fn(v)?;
        let (g1, g2, n2) = (&self.g1, &self.g2, self.n2());
        let (x, p) = (pt.x, pt.p);
        let (a2, b2) = (self.a_m2(p), self.b_m2(x));
        let uf = |y: usize, q: usize| u[y * n2 + q];
        let vf = |y: usize, q: usize| v[y * n2 + q];

        let first = a2 * a2 * g1.gamma2_with(x, &|y| uf(y, p), &|y| vf(y, p));
        let second = b2 * b2 * g2.gamma2_with(p, &|q| uf(x, q), &|q| vf(x, q));

        let gam2_on_fibre =
            |y: usize| self.b_m2(y) * g2.gamma_with(p, &|q| uf(y, q), &|q| vf(y, q));
        let lap2_v = |y: usize| self.b_m2(y) * g2.lap_with(p, &|q| vf(y, q));
        let lap2_u = |y: usize| self.b_m2(y) * g2.lap_with(p, &|q| uf(y, q));
        let i = g1.lap_with(x, &gam2_on_fibre)
            - g1.gamma_with(x, &lap2_v, &|y| uf(y, p))
            - g1.gamma_with(x, &lap2_u, &|y| vf(y, p));

        let gam1_on_fibre =
            |q: usize| self.a_m2(q) * g1.gamma_with(x, &|y| uf(y, q), &|y| vf(y, q));
        let lap1_v = |q: usize| self.a_m2(q) * g1.lap_with(x, &|y| vf(y, q));
        let lap1_u = |q: usize| self.a_m2(q) * g1.lap_with(x, &|y| uf(y, q));
        let ii = g2.lap_with(p, &gam1_on_fibre)
            - g2.gamma_with(p, &lap1_v, &|q| uf(x, q))
            - g2.gamma_with(p, &lap1_u, &|q| vf(x, q));

        let direct = self.graph.gamma2_with(self.index(pt), &|k| u[k], &|k| v[k]);
        Ok(Gamma2Decomposition::new(first, second, i, ii, a2, b2, direct))
    }

    /// `Γ₂(u₁⊗u₂, v₁⊗v₂)` in terms of factor operators only.
    pub fn gamma2_tensor_formulation(
        &self,
        u1: &VertexFunction,
        u2: &VertexFunction,
        v1: &VertexFunction,
        v2: &VertexFunction,
        pt: ProductVertex,
    ) -> Result<Gamma2Decomposition> {
        self.require_warped()?;
        self.check_point(pt)?;
        for f in [u1, v1] {
            self.g1.check_function(f)?;
        }
        for f in [u2, v2] {
            self.g2.check_function(f)?;
        }
        let (g1, g2) = (&self.g1, &self.g2);
        let (x, p) = (pt.x, pt.p);
        let (a2, b2) = (self.a_m2(p), self.b_m2(x));
        let (u1f, v1f, u2f, v2f) = (|y: usize| u1[y], |y: usize| v1[y], |q: usize| u2[q], |q: usize| v2[q]);

        let first = u2[p] * v2[p] * a2 * a2 * g1.gamma2_with(x, &u1f, &v1f);
        let second = u1[x] * v1[x] * b2 * b2 * g2.gamma2_with(p, &u2f, &v2f);

        let i = g2.gamma_with(p, &u2f, &v2f) * g1.lap_with(x, &|y| u1[y] * v1[y] * self.b_m2(y))
            - v2[p] * g2.lap_with(p, &u2f) * g1.gamma_with(x, &|y| u1[y] * self.b_m2(y), &v1f)
            - u2[p] * g2.lap_with(p, &v2f) * g1.gamma_with(x, &|y| v1[y] * self.b_m2(y), &u1f);
        let ii = g1.gamma_with(x, &u1f, &v1f) * g2.lap_with(p, &|q| u2[q] * v2[q] * self.a_m2(q))
            - v1[x] * g1.lap_with(x, &u1f) * g2.gamma_with(p, &|q| u2[q] * self.a_m2(q), &v2f)
            - u1[x] * g1.lap_with(x, &v1f) * g2.gamma_with(p, &|q| v2[q] * self.a_m2(q), &u2f);

        let u = self.lift_tensor(u1, u2);
        let v = self.lift_tensor(v1, v2);
        let direct = self.graph.gamma2_with(self.index(pt), &|k| u[k], &|k| v[k]);
        Ok(Gamma2Decomposition::new(first, second, i, ii, a2, b2, direct))
    }

    /// Factor-side derivatives of the warping functions at `(x, p)`:
    /// `(Δ₂α⁻²(p), Δ₁β⁻²(x), Γ₂(α⁻²)(p), Γ₁(β⁻²)(x))`.
    fn warp_derivatives(&self, pt: ProductVertex) -> (f64, f64, f64, f64) {
        let am2 = |q: usize| self.a_m2(q);
        let bm2 = |y: usize| self.b_m2(y);
        (
            self.g2.lap_with(pt.p, &am2),
            self.g1.lap_with(pt.x, &bm2),
            self.g2.gamma_with(pt.p, &am2, &am2),
            self.g1.gamma_with(pt.x, &bm2, &bm2),
        )
    }

    /// The mixed part `Q(c₁, c₂)` of `Γ₂(c₁f₁ ⊕ c₂f₂)(x, p)`.
    pub fn q_form(
        &self,
        c1: f64,
        c2: f64,
        f1: &VertexFunction,
        f2: &VertexFunction,
        pt: ProductVertex,
    ) -> Result<f64> {
        self.require_warped()?;
        self.check_point(pt)?;
        self.g1.check_function(f1)?;
        self.g2.check_function(f2)?;
        let (x, p) = (pt.x, pt.p);
        let (a2, b2) = (self.a_m2(p), self.b_m2(x));
        let (lap_a, lap_b, _, _) = self.warp_derivatives(pt);
        let f1c = |y: usize| f1[y];
        let f2c = |q: usize| f2[q];
        let gam1 = self.g1.gamma_with(x, &f1c, &f1c);
        let gam2 = self.g2.gamma_with(p, &f2c, &f2c);
        let lap1 = self.g1.lap_with(x, &f1c);
        let lap2 = self.g2.lap_with(p, &f2c);
        let gam_b_f1 = self.g1.gamma_with(x, &|y| self.b_m2(y), &f1c);
        let gam_a_f2 = self.g2.gamma_with(p, &|q| self.a_m2(q), &f2c);
        Ok(0.5 * c2 * c2 * a2 * gam2 * lap_b - c1 * c2 * a2 * lap2 * gam_b_f1
            + 0.5 * c1 * c1 * b2 * gam1 * lap_a
            - c1 * c2 * b2 * lap1 * gam_a_f2)
    }

    /// `|Γ₂(c₁f₁ ⊕ c₂f₂) - (c₁²α⁻⁴Γ₂^{G₁}(f₁) + c₂²β⁻⁴Γ₂^{G₂}(f₂) + Q)|`.
    pub fn q_identity_residual(
        &self,
        c1: f64,
        c2: f64,
        f1: &VertexFunction,
        f2: &VertexFunction,
        pt: ProductVertex,
    ) -> Result<f64> {
        let q = self.q_form(c1, c2, f1, f2, pt)?;
        let (x, p) = (pt.x, pt.p);
        let (a2, b2) = (self.a_m2(p), self.b_m2(x));
        let f1c = |y: usize| f1[y];
        let f2c = |q: usize| f2[q];
        let expect = c1 * c1 * a2 * a2 * self.g1.gamma2_with(x, &f1c, &f1c)
            + c2 * c2 * b2 * b2 * self.g2.gamma2_with(p, &f2c, &f2c)
            + q;
        let u = self.lift_sum(&f1.map(|v| c1 * v), &f2.map(|v| c2 * v));
        let direct = self.graph.gamma2_with(self.index(pt), &|k| u[k], &|k| u[k]);
        Ok((direct - expect).abs())
    }

    /// The piecewise forms `(Q₁(c₁, c₂), Q₂(c₁, c₂))` for the given flags.
    pub fn q1_q2_bounds(
        &self,
        pt: ProductVertex,
        c1: f64,
        c2: f64,
        flags: LaplacianFlags,
    ) -> Result<(f64, f64)> {
        self.require_warped()?;
        self.check_point(pt)?;
        let (x, p) = (pt.x, pt.p);
        let (a2, b2) = (self.a_m2(p), self.b_m2(x));
        let (lap_a, lap_b, gam_a, gam_b) = self.warp_derivatives(pt);
        let cc = (c1 * c2).abs();
        let (dx, dp) = (self.g1.deg(x), self.g2.deg(p));
        let mut q1 = 0.5 * c1 * c1 * b2 * lap_a;
        let mut q2 = 0.5 * c2 * c2 * a2 * lap_b;
        // The cross term carrying Δ₁f₁ exists only when it is non-zero, and
        // splits into a degree part for Q₁ and a Γ₂(α⁻²) part for Q₂.
        if flags.first_nonzero {
            q1 += cc * b2 * dx;
            q2 += 0.5 * cc * b2 * gam_a;
        }
        if flags.second_nonzero {
            q2 += cc * a2 * dp;
            q1 += 0.5 * cc * a2 * gam_b;
        }
        Ok((q1, q2))
    }

    fn factor_curvatures(&self, pt: ProductVertex, n1: Dim, n2: Dim) -> Result<(f64, f64)> {
        Ok((
            curvature::curvature(&self.g1, pt.x, n1)?,
            curvature::curvature(&self.g2, pt.p, n2)?,
        ))
    }

    /// `min` and `max` of `α⁻²K_{G₁,x}(N₁)` and `β⁻²K_{G₂,p}(N₂)`.
    pub fn sandwich_bounds(&self, pt: ProductVertex, n1: Dim, n2: Dim) -> Result<Sandwich> {
        self.require_warped()?;
        self.check_point(pt)?;
        let (k1, k2) = self.factor_curvatures(pt, n1, n2)?;
        let first = self.a_m2(pt.p) * k1;
        let second = self.b_m2(pt.x) * k2;
        Ok(Sandwich { lo: first.min(second), hi: first.max(second), first, second })
    }

    /// Saturation-dependent upper bounds on `K_(x,p)(N₁ + N₂)`.
    pub fn saturation_upper_bound(
        &self,
        pt: ProductVertex,
        n1: Dim,
        n2: Dim,
    ) -> Result<SaturationBound> {
        self.require_warped()?;
        self.check_point(pt)?;
        let (x, p) = (pt.x, pt.p);
        let sx = curvature::classify_saturation(&self.g1, x, n1)?;
        let sp = curvature::classify_saturation(&self.g2, p, n2)?;
        let (k1, k2) = self.factor_curvatures(pt, n1, n2)?;
        let (a, b) = (self.a(p), self.b(x));
        let (a2, b2) = (self.a_m2(p), self.b_m2(x));
        let n = n1 + n2;
        let deg_x = 2.0 * (n1.inv() - n.inv()) * a2 * self.g1.deg(x);
        let deg_p = 2.0 * (n2.inv() - n.inv()) * b2 * self.g2.deg(p);

        let (q1_10, _) = self.q1_q2_bounds(pt, 1.0, 0.0, LaplacianFlags::NEITHER)?;
        let (_, q2_01) = self.q1_q2_bounds(pt, 0.0, 1.0, LaplacianFlags::NEITHER)?;
        let (q1_11, q2_11) = self.q1_q2_bounds(pt, 1.0, 1.0, LaplacianFlags::BOTH)?;
        let base1 = a2 * k1 + a * a * q1_10;
        let base2 = b2 * k2 + b * b * q2_01;

        let mut cases = Vec::new();
        if sx.is_weakly() && sp.is_weakly() {
            cases.push((SaturationCase::BothWeakly, base1.max(base2)));
        }
        if sx.is_weakly() && sp == Saturation::Unsaturated {
            cases.push((SaturationCase::FirstWeaklySecondUnsaturated, base1 + deg_x));
        }
        if sx == Saturation::Unsaturated && sp.is_weakly() {
            cases.push((SaturationCase::FirstUnsaturatedSecondWeakly, base2 + deg_p));
        }
        if !sx.is_strongly() && !sp.is_strongly() {
            let v = (a2 * k1 + a * a * q1_11).max(b2 * k2 + b * b * q2_11);
            cases.push((SaturationCase::NeitherStrongly, v));
        }
        if sx == Saturation::WeaklySaturated && sp == Saturation::WeaklySaturated {
            cases.push((SaturationCase::MinRefinement, (base1 + deg_x).min(base2 + deg_p)));
        }
        let best = cases.iter().map(|&(_, v)| v).reduce(f64::min);
        Ok(SaturationBound { first_saturation: sx, second_saturation: sp, cases, best })
    }

    /// Upper and lower bounds on `K_(x,p)(N)` from factor curvatures at the same `N`.
    pub fn same_dimension_bounds(&self, pt: ProductVertex, n: Dim) -> Result<SameDimension> {
        self.require_warped()?;
        self.check_point(pt)?;
        let (x, p) = (pt.x, pt.p);
        let (k1, k2) = self.factor_curvatures(pt, n, n)?;
        let (a, b) = (self.a(p), self.b(x));
        let (a2, b2) = (self.a_m2(p), self.b_m2(x));
        let (lap_a, lap_b, _, _) = self.warp_derivatives(pt);
        let upper = (a2 * k1 + 0.5 * a * a * b2 * lap_a).min(b2 * k2 + 0.5 * b * b * a2 * lap_b);
        let lower = (a2 * k1).min(b2 * k2)
            - n.inv() * (a2 * self.g1.deg(x) + b2 * self.g2.deg(p));
        Ok(SameDimension { upper, lower })
    }

    /// The two discrete convexity bounds.
    ///
    /// The `max` form bounds `K_(x,p)(N₁ + N₂)` by the larger of
    /// `(K_{G₁}(N₁) - K₁)/α²` and `(K_{G₂}(N₂) - K₂)/β²`; the `min` form
    /// bounds `K_(x,p)(N)` by the smaller one at `N₁ = N₂ = N`.
    pub fn convexity_bounds(
        &self,
        pt: ProductVertex,
        n1: Dim,
        n2: Dim,
        k1c: f64,
        k2c: f64,
    ) -> Result<(ConvexityCheck, ConvexityCheck)> {
        self.require_warped()?;
        self.check_point(pt)?;
        if !(k1c >= 0.0 && k2c >= 0.0) {
            return Err(WarpedError::NegativeConstant(k1c, k2c));
        }
        let (x, p) = (pt.x, pt.p);
        let (a, b) = (self.a(p), self.b(x));
        let (aa, bb) = (a * a, b * b);
        let (lap_a, lap_b, gam_a, gam_b) = self.warp_derivatives(pt);
        let (dx, dp) = (self.g1.deg(x), self.g2.deg(p));

        let max_form = {
            let (k1, k2) = self.factor_curvatures(pt, n1, n2)?;
            let first_lhs = aa * lap_a;
            let first_rhs = -2.0 * bb * k1c - 2.0 * aa * dx - bb * gam_b;
            let second_lhs = bb * lap_b;
            let second_rhs = -2.0 * aa * k2c - 2.0 * bb * dp - aa * gam_a;
            let (h1, h2) = (first_lhs <= first_rhs, second_lhs <= second_rhs);
            ConvexityCheck {
                first_lhs,
                first_rhs,
                second_lhs,
                second_rhs,
                first_holds: h1,
                second_holds: h2,
                bound: (h1 && h2).then(|| ((k1 - k1c) / aa).max((k2 - k2c) / bb)),
            }
        };
        let min_form = {
            let n = n1 + n2;
            let (k1, k2) = self.factor_curvatures(pt, n, n)?;
            let first_lhs = aa * lap_a;
            let first_rhs = -bb * k1c / aa;
            let second_lhs = bb * lap_b;
            let second_rhs = -aa * k2c / bb;
            let (h1, h2) = (first_lhs <= first_rhs, second_lhs <= second_rhs);
            ConvexityCheck {
                first_lhs,
                first_rhs,
                second_lhs,
                second_rhs,
                first_holds: h1,
                second_holds: h2,
                bound: (h1 && h2).then(|| ((k1 - k1c) / aa).min((k2 - k2c) / bb)),
            }
        };
        Ok((max_form, min_form))
    }

    /// The strict differential inequality on the warping functions under
    /// which the two quadric surfaces of the sandwich argument intersect.
    /// Diagnostic only.
    pub fn intersection_inequality(&self, pt: ProductVertex) -> Result<IntersectionInequality> {
        self.require_warped()?;
        self.check_point(pt)?;
        let (x, p) = (pt.x, pt.p);
        let (dx, dp) = (self.g1.deg(x), self.g2.deg(p));
        if dx <= 0.0 {
            return Err(CurvatureError::IsolatedVertex(self.g1.id(x).to_string()).into());
        }
        if dp <= 0.0 {
            return Err(CurvatureError::IsolatedVertex(self.g2.id(p).to_string()).into());
        }
        let (a, b) = (self.a(p), self.b(x));
        let (lap_a, lap_b, gam_a, gam_b) = self.warp_derivatives(pt);
        let lhs = lap_a * lap_b;
        let rhs = b * b / (a * a) * gam_b / dx + a * a / (b * b) * gam_a / dp - 1.0;
        Ok(IntersectionInequality { lhs, rhs, holds: lhs > rhs })
    }

    pub fn dilation_numbers(&self) -> Result<DilationNumbers> {
        self.require_warped()?;
        let sq = |v: &[f64]| {
            let lo = v.iter().map(|a| a * a).fold(f64::INFINITY, f64::min);
            let hi = v.iter().map(|a| a * a).fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        };
        let (a_lo, a_hi) = sq(self.alpha_factor()?.values());
        let (b_lo, b_hi) = sq(self.beta_factor()?.values());
        Ok(DilationNumbers {
            alpha: a_hi / a_lo,
            beta: b_hi / b_lo,
            alpha_beta: a_hi / b_lo,
            beta_alpha: b_hi / a_lo,
        })
    }

    /// Check the two convexity relations at every pair of absolute minima
    /// (`x_min` of `β`, `p_min` of `α`), accepting a slack of `tol`.
    pub fn good_warping_pair_check(&self, n: Dim, tol: f64) -> Result<GoodPairReport> {
        let dil = self.dilation_numbers()?;
        let alpha = self.alpha_factor()?;
        let beta = self.beta_factor()?;
        let x_mins = extrema(beta.values(), false);
        let p_mins = extrema(alpha.values(), false);
        let mut witnesses = Vec::new();
        for &x in &x_mins {
            let k1 = curvature::curvature(&self.g1, x, n)?;
            let lap_b = self.g1.lap_with(x, &|y| self.b_m2(y));
            for &p in &p_mins {
                let k2 = curvature::curvature(&self.g2, p, n)?;
                let lap_a = self.g2.lap_with(p, &|q| self.a_m2(q));
                let first_lhs = beta[x] * beta[x] * lap_b;
                let first_rhs = dil.alpha * k1 - dil.alpha_beta * k2;
                let second_lhs = alpha[p] * alpha[p] * lap_a;
                let second_rhs = dil.beta * k2 - dil.beta_alpha * k1;
                let scale = 1.0f64.max(first_rhs.abs()).max(second_rhs.abs());
                let holds =
                    first_lhs <= first_rhs + tol * scale && second_lhs <= second_rhs + tol * scale;
                witnesses.push(GoodPairWitness {
                    x_min: self.g1.id(x).to_string(),
                    p_min: self.g2.id(p).to_string(),
                    first_lhs,
                    first_rhs,
                    second_lhs,
                    second_rhs,
                    holds,
                });
            }
        }
        Ok(GoodPairReport { good: witnesses.iter().any(|w| w.holds), witnesses })
    }

    /// Equality test on the extrema grid and the consistency of its
    /// predicted consequences.
    pub fn rigidity_check(&self, n: Dim, tol: f64) -> Result<RigidityVerdict> {
        let good = self.good_warping_pair_check(n, tol)?;
        let alpha = self.alpha_factor()?;
        let beta = self.beta_factor()?;
        let mut e_alpha = extrema(alpha.values(), false);
        e_alpha.extend(extrema(alpha.values(), true));
        e_alpha.sort_unstable();
        e_alpha.dedup();
        let mut e_beta = extrema(beta.values(), false);
        e_beta.extend(extrema(beta.values(), true));
        e_beta.sort_unstable();
        e_beta.dedup();

        let mut gap = 0.0f64;
        for &x in &e_beta {
            for &p in &e_alpha {
                let pt = ProductVertex::new(x, p);
                let s = self.sandwich_bounds(pt, n, n)?;
                let k = curvature::curvature(&self.graph, self.index(pt), n)?;
                gap = gap.max((k - s.lo).abs());
            }
        }
        let equality_holds = gap <= tol;
        let is_const = |v: &[f64]| v.iter().all(|&a| (a - v[0]).abs() <= EXTREMA_TOL);
        let alpha_constant = is_const(alpha.values());
        let beta_constant = is_const(beta.values());
        let einstein_first = curvature::einstein_check(&self.g1, n, tol)?;
        let einstein_second = curvature::einstein_check(&self.g2, n, tol)?;
        let ratio_defect = (alpha_constant
            && beta_constant
            && einstein_first.einstein
            && einstein_second.einstein)
            .then(|| {
                let r = alpha[0] * alpha[0] / (beta[0] * beta[0]);
                einstein_first.min - r * einstein_second.min
            });
        let ratio_matches = ratio_defect.is_some_and(|d| d.abs() <= tol.max(1e-9));
        let contradiction = good.good
            && equality_holds
            && !(alpha_constant
                && beta_constant
                && einstein_first.einstein
                && einstein_second.einstein
                && ratio_matches);
        Ok(RigidityVerdict {
            dim: n,
            good_pair: good.good,
            extrema_alpha: e_alpha.iter().map(|&p| self.g2.id(p).to_string()).collect(),
            extrema_beta: e_beta.iter().map(|&x| self.g1.id(x).to_string()).collect(),
            equality_holds,
            equality_gap: gap,
            alpha_constant,
            beta_constant,
            einstein_first,
            einstein_second,
            ratio_defect,
            ratio_matches,
            contradiction,
        })
    }

    /// Every applicable bound at `(x, p)` against the exact product curvature.
    pub fn bound_report(&self, pt: ProductVertex, n1: Dim, n2: Dim) -> Result<BoundReport> {
        self.require_warped()?;
        self.check_point(pt)?;
        let n = n1 + n2;
        let idx = self.index(pt);
        let exact = curvature::curvature(&self.graph, idx, n)?;
        let mut entries = Vec::new();

        let s = self.sandwich_bounds(pt, n1, n2)?;
        entries.push(BoundEntry::new("sandwich_lower", Side::Lower, n, s.lo, exact));
        entries.push(BoundEntry::new("sandwich_upper", Side::Upper, n, s.hi, exact));

        let same = self.sandwich_bounds(pt, n, n)?;
        entries.push(BoundEntry::new("sandwich_upper_same_dim", Side::Upper, n, same.hi, exact));

        let sd = self.same_dimension_bounds(pt, n)?;
        entries.push(BoundEntry::new("same_dim_lower", Side::Lower, n, sd.lower, exact));
        entries.push(BoundEntry::new("same_dim_upper", Side::Upper, n, sd.upper, exact));

        let (saturation, saturation_note) = match self.saturation_upper_bound(pt, n1, n2) {
            Ok(sb) => {
                for &(case, v) in &sb.cases {
                    entries.push(BoundEntry::new(case_name(case), Side::Upper, n, v, exact));
                }
                (Some(sb), None)
            }
            Err(WarpedError::Curvature(e @ CurvatureError::SaturationUndecidable { .. })) => {
                (None, Some(e.to_string()))
            }
            Err(e) => return Err(e),
        };

        let (cmax, cmin) = self.convexity_bounds(pt, n1, n2, 0.0, 0.0)?;
        if let Some(v) = cmax.bound {
            entries.push(BoundEntry::new("convexity_max", Side::Upper, n, v, exact));
        }
        if let Some(v) = cmin.bound {
            entries.push(BoundEntry::new("convexity_min", Side::Upper, n, v, exact));
        }
        let intersection = self.intersection_inequality(pt)?;
        Ok(BoundReport {
            vertex: self.graph.id(idx).to_string(),
            n1,
            n2,
            exact,
            entries,
            saturation,
            saturation_note,
            convexity_max: cmax,
            convexity_min: cmin,
            intersection,
        })
    }

    /// [`Product::bound_report`] at every product vertex, in index order.
    pub fn bound_reports(&self, n1: Dim, n2: Dim) -> Result<Vec<BoundReport>> {
        let pts: Vec<ProductVertex> = self.points().collect();
        pts.par_iter().map(|&pt| self.bound_report(pt, n1, n2)).collect()
    }
}

pub fn case_name(case: SaturationCase) -> &'static str {
    match case {
        SaturationCase::BothWeakly => "saturation_both_weakly",
        SaturationCase::FirstWeaklySecondUnsaturated => "saturation_first_weakly",
        SaturationCase::FirstUnsaturatedSecondWeakly => "saturation_second_weakly",
        SaturationCase::NeitherStrongly => "saturation_neither_strongly",
        SaturationCase::MinRefinement => "saturation_min_refinement",
    }
}

/// Indices within [`EXTREMA_TOL`] of the minimum (or maximum).
pub fn extrema(values: &[f64], maximum: bool) -> Vec<usize> {
    if values.is_empty() {
        return Vec::new();
    }
    let target = if maximum {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        values.iter().copied().fold(f64::INFINITY, f64::min)
    };
    (0..values.len()).filter(|&i| (values[i] - target).abs() <= EXTREMA_TOL).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn k2(a: &str, b: &str) -> WeightedGraph {
        WeightedGraph::build(&[(a, 1.0), (b, 1.0)], &[(a, b, 1.0)], true).unwrap()
    }

    fn spec(alpha: [f64; 2], beta: [f64; 2]) -> WarpedProductSpec {
        WarpedProductSpec {
            g1: k2("x", "y"),
            g2: k2("p", "q"),
            alpha: VertexFunction::new(alpha.to_vec()),
            beta: VertexFunction::new(beta.to_vec()),
        }
    }

    fn warped_c4() -> Product {
        Product::warped(&spec([1.0, 2.0], [1.0, 1.0])).unwrap()
    }

    const XP: ProductVertex = ProductVertex { x: 0, p: 0 };
    const XQ: ProductVertex = ProductVertex { x: 0, p: 1 };

    #[test]
    fn cartesian_square_is_c4() {
        let g = doubly_warped_product(&spec([1.0, 1.0], [1.0, 1.0])).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.edge_count(), 8);
        assert!(g.edges().all(|(_, _, w)| w == 1.0));
        assert!(g.measures().iter().all(|&m| m == 1.0));
        assert_eq!(g.ids(), &["(x,p)", "(x,q)", "(y,p)", "(y,q)"]);
    }

    #[test]
    fn warped_c4_weights_and_degree() {
        let g = warped_c4().graph;
        let id = |s: &str| g.index_of(s).unwrap();
        assert_eq!(g.weight(id("(x,p)"), id("(y,p)")), 1.0);
        assert_eq!(g.weight(id("(x,q)"), id("(y,q)")), 0.25);
        assert_eq!(g.weight(id("(x,p)"), id("(x,q)")), 1.0);
        assert_eq!(g.degree(id("(x,q)")).unwrap(), 1.25);
    }

    #[test]
    fn rejects_bad_warps() {
        let err = Product::warped(&spec([1.0, 0.0], [1.0, 1.0])).unwrap_err();
        assert!(matches!(err, WarpedError::NonPositiveWarp { name: "alpha", .. }));
        let mut s = spec([1.0, 1.0], [1.0, 1.0]);
        s.beta = VertexFunction::new(vec![1.0]);
        assert!(matches!(Product::warped(&s), Err(WarpedError::WarpLength { .. })));
    }

    #[test]
    fn twisted_matches_warped_when_separable() {
        let s = spec([1.0, 2.0], [0.5, 3.0]);
        let w = Product::warped(&s).unwrap();
        let t = TwistedProductSpec {
            g1: s.g1.clone(),
            g2: s.g2.clone(),
            alpha: VertexFunction::from_fn(4, |i| s.alpha[i % 2]),
            beta: VertexFunction::from_fn(4, |i| s.beta[i / 2]),
        };
        let tp = Product::twisted(&t).unwrap();
        assert!(tp.is_warped());
        assert_eq!(tp.graph, w.graph);
    }

    #[test]
    fn twisted_rejects_warped_only_operations() {
        let s = spec([1.0, 1.0], [1.0, 1.0]);
        let t = TwistedProductSpec {
            g1: s.g1,
            g2: s.g2,
            alpha: VertexFunction::new(vec![1.0, 2.0, 3.0, 4.0]),
            beta: VertexFunction::constant(4, 1.0),
        };
        let tp = Product::twisted(&t).unwrap();
        assert!(!tp.is_warped());
        let u = VertexFunction::new(vec![0.1, 0.7, -0.4, 2.0]);
        let r = tp.operator_splitting(&u, &u, XQ).unwrap();
        assert!(r.laplacian <= 1e-12 && r.gamma <= 1e-12);
        assert_eq!(tp.gamma2_first_formulation(&u, &u, XQ), Err(WarpedError::NotWarped));
    }

    #[test]
    fn splitting_examples() {
        let pr = warped_c4();
        let u1 = VertexFunction::new(vec![0.3, -1.1]);
        let u2 = VertexFunction::new(vec![2.0, 0.5]);
        for pt in pr.points().collect::<Vec<_>>() {
            let s = pr.lift_sum(&u1, &u2);
            let t = pr.lift_tensor(&u1, &u2);
            let r = pr.operator_splitting(&s, &t, pt).unwrap();
            assert!(r.laplacian <= 1e-12 && r.gamma <= 1e-12);
        }
    }

    #[test]
    fn first_formulation_indicator() {
        let pr = warped_c4();
        let u = VertexFunction::indicator(4, 0);
        for pt in pr.points().collect::<Vec<_>>() {
            let d = pr.gamma2_first_formulation(&u, &u, pt).unwrap();
            assert!(d.residual <= 1e-10, "{d:?}");
        }
    }

    #[test]
    fn tensor_formulation_indicator() {
        let pr = warped_c4();
        let u1 = VertexFunction::indicator(2, 0);
        let u2 = VertexFunction::indicator(2, 0);
        for pt in pr.points().collect::<Vec<_>>() {
            let d = pr.gamma2_tensor_formulation(&u1, &u2, &u1, &u2, pt).unwrap();
            assert!(d.residual <= 1e-10, "{d:?}");
        }
    }

    #[test]
    fn tensor_with_constant_second_factor() {
        let pr = warped_c4();
        let u1 = VertexFunction::new(vec![1.5, -0.5]);
        let one = VertexFunction::constant(2, 1.0);
        for pt in pr.points().collect::<Vec<_>>() {
            let d = pr.gamma2_tensor_formulation(&u1, &one, &u1, &one, pt).unwrap();
            let a2 = pr.alpha_at(pt).powi(-2);
            let b2 = pr.beta_at(pt).powi(-2);
            let lap_a = pr.g2.lap_with(pt.p, &|q| pr.a_m2(q));
            let expect = a2 * a2 * pr.g1.gamma2(&u1, &u1, pt.x).unwrap()
                + 0.5 * b2 * pr.g1.gamma(&u1, &u1, pt.x).unwrap() * lap_a;
            assert_abs_diff_eq!(d.direct, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn q_form_examples() {
        let pr = warped_c4();
        let d = VertexFunction::indicator(2, 0);
        assert_eq!(pr.q_form(0.0, 0.0, &d, &d, XP).unwrap(), 0.0);
        assert_abs_diff_eq!(pr.q_form(1.0, 0.0, &d, &d, XP).unwrap(), -3.0 / 16.0, epsilon = 1e-15);
        let flat = Product::warped(&spec([1.0, 1.0], [1.0, 1.0])).unwrap();
        assert_eq!(flat.q_form(0.7, -2.0, &d, &d, XQ).unwrap(), 0.0);
        for (c1, c2) in [(1.0, 0.0), (0.3, 2.0), (-1.0, 1.0)] {
            let r = pr.q_identity_residual(c1, c2, &d, &VertexFunction::new(vec![0.2, 1.0]), XQ);
            assert!(r.unwrap() <= 1e-10);
        }
    }

    #[test]
    fn q1_q2_examples() {
        let pr = warped_c4();
        let (q1, _) = pr.q1_q2_bounds(XP, 1.0, 1.0, LaplacianFlags::BOTH).unwrap();
        assert_abs_diff_eq!(q1, 5.0 / 8.0, epsilon = 1e-15);
        let (q1, q2) = pr.q1_q2_bounds(XP, 1.0, 0.0, LaplacianFlags::BOTH).unwrap();
        assert_abs_diff_eq!(q1, -3.0 / 8.0, epsilon = 1e-15);
        assert_eq!(q2, 0.0);
        let flat = Product::warped(&spec([1.0, 1.0], [1.0, 1.0])).unwrap();
        let (q1, q2) = flat.q1_q2_bounds(XP, 2.0, 3.0, LaplacianFlags::NEITHER).unwrap();
        assert_eq!((q1, q2), (0.0, 0.0));
    }

    #[test]
    fn sandwich_examples() {
        let flat = Product::warped(&spec([1.0, 1.0], [1.0, 1.0])).unwrap();
        let s = flat.sandwich_bounds(XP, Dim::Finite(2.0), Dim::Finite(2.0)).unwrap();
        assert_abs_diff_eq!(s.lo, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.hi, 1.0, epsilon = 1e-9);
        let s = flat.sandwich_bounds(XP, Dim::Infinite, Dim::Infinite).unwrap();
        assert_abs_diff_eq!(s.lo, 2.0, epsilon = 1e-9);
        let pr = warped_c4();
        let s = pr.sandwich_bounds(XQ, Dim::Finite(2.0), Dim::Finite(2.0)).unwrap();
        assert_abs_diff_eq!(s.lo, 0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(s.hi, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn warped_c4_exact_values() {
        let pr = warped_c4();
        let k = |pt: ProductVertex, n: Dim| curvature::curvature(&pr.graph, pr.index(pt), n).unwrap();
        assert_abs_diff_eq!(k(XP, Dim::Finite(4.0)), 0.875, epsilon = 1e-9);
        assert_abs_diff_eq!(k(XP, Dim::Infinite), 0.95889, epsilon = 1e-5);
        assert_abs_diff_eq!(k(XQ, Dim::Finite(4.0)), 0.55491, epsilon = 1e-5);
        assert_abs_diff_eq!(k(XQ, Dim::Infinite), 0.98594, epsilon = 1e-5);
    }

    #[test]
    fn saturation_case_four_constant_warps() {
        let flat = Product::warped(&spec([1.0, 1.0], [1.0, 1.0])).unwrap();
        let sb = flat.saturation_upper_bound(XP, Dim::Finite(2.0), Dim::Finite(2.0)).unwrap();
        assert_eq!(sb.first_saturation, Saturation::Unsaturated);
        assert_eq!(sb.cases.len(), 1);
        assert_eq!(sb.cases[0].0, SaturationCase::NeitherStrongly);
        assert_abs_diff_eq!(sb.cases[0].1, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn same_dimension_examples() {
        let flat = Product::warped(&spec([1.0, 1.0], [1.0, 1.0])).unwrap();
        let sd = flat.same_dimension_bounds(XP, Dim::Finite(2.0)).unwrap();
        assert_abs_diff_eq!(sd.upper, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sd.lower, 0.0, epsilon = 1e-9);
        let sd = flat.same_dimension_bounds(XP, Dim::Infinite).unwrap();
        assert_abs_diff_eq!(sd.upper, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sd.lower, 2.0, epsilon = 1e-9);
        let sd = warped_c4().same_dimension_bounds(XP, Dim::Finite(2.0)).unwrap();
        assert_abs_diff_eq!(sd.upper, 5.0 / 8.0, epsilon = 1e-9);
    }

    #[test]
    fn convexity_examples() {
        let flat = Product::warped(&spec([1.0, 1.0], [1.0, 1.0])).unwrap();
        let two = Dim::Finite(2.0);
        let (_, cmin) = flat.convexity_bounds(XP, two, two, 0.0, 0.0).unwrap();
        assert!(cmin.first_holds && cmin.second_holds);
        let k4 = curvature::curvature(&flat.g1, 0, Dim::Finite(4.0)).unwrap();
        assert_abs_diff_eq!(cmin.bound.unwrap(), k4, epsilon = 1e-12);
        let (_, cmin) = flat.convexity_bounds(XP, two, two, 1.0, 0.0).unwrap();
        assert!(!cmin.first_holds);
        assert!(cmin.bound.is_none());
        let (cmax, _) = warped_c4().convexity_bounds(XP, two, two, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(cmax.first_lhs, -0.75);
        assert_abs_diff_eq!(cmax.first_rhs, -2.0);
        assert!(!cmax.first_holds);
        assert!(flat.convexity_bounds(XP, two, two, -1.0, 0.0).is_err());
    }

    #[test]
    fn intersection_examples() {
        let flat = Product::warped(&spec([1.0, 1.0], [1.0, 1.0])).unwrap();
        let r = flat.intersection_inequality(XP).unwrap();
        assert_eq!((r.lhs, r.rhs, r.holds), (0.0, -1.0, true));
        let r = warped_c4().intersection_inequality(XP).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.0);
        assert_abs_diff_eq!(r.rhs, 9.0 / 32.0 - 1.0, epsilon = 1e-15);
        assert!(r.holds);
        for lambda in [10.0, 100.0] {
            let big = Product::warped(&spec([lambda, 2.0 * lambda], [lambda, lambda])).unwrap();
            assert!(big.intersection_inequality(XP).unwrap().holds);
        }
    }

    #[test]
    fn dilation_examples() {
        let d = Product::warped(&spec([1.0, 1.0], [1.0, 1.0])).unwrap().dilation_numbers().unwrap();
        assert_eq!((d.alpha, d.beta, d.alpha_beta, d.beta_alpha), (1.0, 1.0, 1.0, 1.0));
        let d = Product::warped(&spec([1.0, 2.0], [3.0, 3.0])).unwrap().dilation_numbers().unwrap();
        assert_eq!(d.alpha, 4.0);
        assert_abs_diff_eq!(d.alpha_beta, 4.0 / 9.0);
    }

    #[test]
    fn good_pair_constant_warps() {
        let inf = Dim::Infinite;
        let flat = Product::warped(&spec([1.0, 1.0], [1.0, 1.0])).unwrap();
        assert!(flat.good_warping_pair_check(inf, 1e-9).unwrap().good);
        let off = Product::warped(&spec([2.0, 2.0], [1.0, 1.0])).unwrap();
        assert!(!off.good_warping_pair_check(inf, 1e-9).unwrap().good);
    }

    #[test]
    fn warped_c4_good_pair_value() {
        // x_min ∈ {x, y} (β constant), p_min = p. At N = ∞:
        // rel 1: 0 <= 4·2 - 4·2 = 0 holds; rel 2: 1·(-3/4) <= 1·2 - 1·2 = 0 holds.
        let r = warped_c4().good_warping_pair_check(Dim::Infinite, 1e-9).unwrap();
        assert_eq!(r.witnesses.len(), 2);
        let w = &r.witnesses[0];
        assert_abs_diff_eq!(w.first_rhs, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(w.second_lhs, -0.75, epsilon = 1e-12);
        assert!(r.good);
    }

    #[test]
    fn rigidity_examples() {
        let flat = Product::warped(&spec([1.0, 1.0], [1.0, 1.0])).unwrap();
        let v = flat.rigidity_check(Dim::Infinite, 1e-8).unwrap();
        assert!(v.good_pair && v.equality_holds && v.ratio_matches && !v.contradiction);
        let off = Product::warped(&spec([2.0, 2.0], [1.0, 1.0])).unwrap();
        let v = off.rigidity_check(Dim::Infinite, 1e-8).unwrap();
        assert!(!v.ratio_matches);
        assert!(!v.good_pair);
        assert!(!v.contradiction);
        let v = warped_c4().rigidity_check(Dim::Infinite, 1e-8).unwrap();
        assert!(!v.alpha_constant);
        assert!(!v.equality_holds);
        assert!(!v.contradiction);
    }

    #[test]
    fn subharmonic_examples() {
        let g = k2("a", "b");
        assert!(subharmonic_check(&g, &VertexFunction::constant(2, 3.0)).unwrap());
        assert!(!subharmonic_check(&g, &VertexFunction::new(vec![1.0, 4.0])).unwrap());
    }

    #[test]
    fn extrema_ties() {
        assert_eq!(extrema(&[1.0, 2.0, 1.0], false), vec![0, 2]);
        assert_eq!(extrema(&[1.0, 2.0, 1.0], true), vec![1]);
    }
}
