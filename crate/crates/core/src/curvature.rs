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

//! Exact per-vertex curvature functions `K_{G,x}(N)`.
//!
//! In the gauge `f(x) = 0` both sides of the CD inequality at `x` are
//! quadratic forms in the values of `f` on the 2-ball. `A` is the form
//! `Γ₂(f)(x) - (Δf(x))²/N` and `B` the form `Γ(f)(x)`, which only sees the
//! 1-sphere. The 2-sphere values are minimized out by a Schur complement,
//! leaving a generalized eigenproblem on the 1-sphere whose smallest
//! eigenvalue is `K`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Dim, GraphError, VertexFunction, WeightedGraph};

/// Eigenvalues of the 2-sphere block at or below this (relative) level are
/// treated as zero by the pseudo-inverse.
pub const PINV_THRESHOLD: f64 = 1e-12;
/// A Γ-normalized maximizer with `|Δf(x)|` at most this is harmonic at `x`.
pub const HARMONIC_TOL: f64 = 1e-9;
/// A Γ-normalized maximizer with `|Δf(x)|` above this is clearly not harmonic.
pub const NON_HARMONIC_TOL: f64 = 1e-6;
/// Relative gap below which two eigenvalues are one eigenspace.
pub const EIGEN_CLUSTER_TOL: f64 = 1e-9;
/// Relative gap above which two eigenvalues are clearly distinct.
pub const EIGEN_SEPARATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurvatureError {
    #[error("vertex `{0}` is isolated (D_x = 0); curvature is undefined there")]
    IsolatedVertex(String),
    #[error("degenerate test function: Γ(f)(x) = {0}")]
    DegenerateTestFunction(f64),
    #[error("saturation at `{vertex}` is undecidable within tolerance: {reason}")]
    SaturationUndecidable { vertex: String, reason: String },
    #[error("eigen-solver produced a non-finite value at `{0}`")]
    NonFinite(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub type Result<T, E = CurvatureError> = std::result::Result<T, E>;

/// Saturation class of a vertex with respect to its curvature maximizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Saturation {
    /// Every maximizer is harmonic at `x` (this implies weak saturation).
    StronglySaturated,
    /// Some but not every maximizer is harmonic at `x`.
    WeaklySaturated,
    /// No maximizer is harmonic at `x`.
    Unsaturated,
}

impl Saturation {
    pub fn is_weakly(self) -> bool {
        !matches!(self, Saturation::Unsaturated)
    }

    pub fn is_strongly(self) -> bool {
        matches!(self, Saturation::StronglySaturated)
    }

    pub fn label(self) -> &'static str {
        match self {
            Saturation::StronglySaturated => "strongly_saturated",
            Saturation::WeaklySaturated => "weakly_saturated",
            Saturation::Unsaturated => "unsaturated",
        }
    }
}

/// The gauged quadratic forms at one vertex.
///
/// `ball` is `[x, 1-sphere.., 2-sphere..]`; `a` and `b` are indexed by
/// `ball[1..]`, so row `i` of either matrix belongs to `ball[i + 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalForms {
    pub ball: Vec<usize>,
    pub sphere1: Vec<usize>,
    pub sphere2: Vec<usize>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl LocalForms {
    pub fn n1(&self) -> usize {
        self.sphere1.len()
    }

    pub fn n2(&self) -> usize {
        self.sphere2.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureResult {
    pub vertex: String,
    #[serde(skip)]
    pub index: usize,
    pub dim: Dim,
    pub value: f64,
    /// Γ-orthonormal basis of the maximizer space, gauged to `f(x) = 0` and
    /// supported on the 2-ball.
    #[serde(skip)]
    pub maximizers: Vec<VertexFunction>,
    pub maximizer_dim: usize,
    /// `None` when the classification is undecidable within tolerance.
    pub saturation: Option<Saturation>,
}

/// Raw spectral data behind a curvature value.
#[derive(Debug, Clone)]
struct Spectrum {
    /// Sorted ascending eigenvalues of `B₁^{-1/2} Ã B₁^{-1/2}`.
    eigenvalues: Vec<f64>,
    /// Maximizers lifted to the full ball, one per clustered eigenvalue.
    maximizers: Vec<VertexFunction>,
    /// Whether the next eigenvalue sits in the ambiguous band.
    gap_ambiguous: bool,
}

fn require_nonisolated(g: &WeightedGraph, x: usize) -> Result<()> {
    g.check_index(x)?;
    if g.deg(x) <= 0.0 {
        return Err(CurvatureError::IsolatedVertex(g.id(x).to_string()));
    }
    Ok(())
}

/// Build `A` and `B` at `x`.
///
/// With `L` the Laplacian matrix and `C_z` the matrix of `Γ(·,·)(z)`, the
/// form of `Γ₂(·,·)(x)` on the 2-ball is
/// `M = ½ (Σ_z L[x,z] C_z - Lᵀ C_x - C_x L)`, with `z` ranging over the 1-ball.
/// `A` is `M - N⁻¹ L[x,·]ᵀ L[x,·]` with the row and column of `x` dropped.
pub fn assemble_local_forms(g: &WeightedGraph, x: usize, n: Dim) -> Result<LocalForms> {
    require_nonisolated(g, x)?;
    let (sphere1, sphere2) = g.spheres(x);
    let mut ball = Vec::with_capacity(1 + sphere1.len() + sphere2.len());
    ball.push(x);
    ball.extend(&sphere1);
    ball.extend(&sphere2);
    let nb = ball.len();
    let n1 = sphere1.len() + 1;
    let mut pos = vec![usize::MAX; g.len()];
    for (k, &v) in ball.iter().enumerate() {
        pos[v] = k;
    }

    // Laplacian rows of the 1-ball, columns over the 2-ball.
    let mut lap = DMatrix::<f64>::zeros(n1, nb);
    for (r, &z) in ball[..n1].iter().enumerate() {
        let mz = g.measure(z);
        for &(w, om) in g.neighbors(z) {
            lap[(r, pos[w])] += om / mz;
            lap[(r, r)] -= om / mz;
        }
    }
    let gamma_at = |r: usize| {
        let z = ball[r];
        let mut c = DMatrix::<f64>::zeros(nb, nb);
        let mz = g.measure(z);
        for &(w, om) in g.neighbors(z) {
            let (i, j, v) = (r, pos[w], om / (2.0 * mz));
            c[(i, i)] += v;
            c[(j, j)] += v;
            c[(i, j)] -= v;
            c[(j, i)] -= v;
        }
        c
    };

    let mut m = DMatrix::<f64>::zeros(nb, nb);
    for r in 0..n1 {
        let coef = lap[(0, r)];
        if coef != 0.0 {
            m += gamma_at(r) * coef;
        }
    }
    let cx = gamma_at(0).view((0, 0), (n1, n1)).into_owned();
    let t = lap.transpose() * cx;
    let mut cross = DMatrix::<f64>::zeros(nb, nb);
    cross.view_mut((0, 0), (nb, n1)).copy_from(&t);
    m -= &cross + cross.transpose();
    m *= 0.5;

    let inv_n = n.inv();
    let l = lap.row(0).columns(1, nb - 1).transpose();
    let a = m.view((1, 1), (nb - 1, nb - 1)).into_owned() - &l * l.transpose() * inv_n;
    // Symmetrize so rounding never leaks into the eigen-solver.
    let a = (&a + a.transpose()) * 0.5;

    let mut b = DMatrix::zeros(nb - 1, nb - 1);
    for (i, &y) in sphere1.iter().enumerate() {
        b[(i, i)] = g.weight(x, y) / (2.0 * g.measure(x));
    }
    Ok(LocalForms { ball, sphere1, sphere2, a, b })
}

/// Moore-Penrose pseudo-inverse of a symmetric PSD matrix.
fn pinv_symmetric(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || m[(i, j)] == 0.0));
    if diagonal {
        let scale = m.diagonal().iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        return DMatrix::from_fn(n, n, |i, j| {
            let d = m[(i, i)];
            if i == j && d.abs() > PINV_THRESHOLD * scale {
                d.recip()
            } else {
                0.0
            }
        });
    }
    let eig = SymmetricEigen::new(m.clone());
    let scale = eig.eigenvalues.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let mut out = DMatrix::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam.abs() > PINV_THRESHOLD * scale {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / lam;
        }
    }
    out
}

fn spectrum(g: &WeightedGraph, x: usize, n: Dim) -> Result<Spectrum> {
    let forms = assemble_local_forms(g, x, n)?;
    let (n1, n2) = (forms.n1(), forms.n2());
    let a11 = forms.a.view((0, 0), (n1, n1)).into_owned();
    let a12 = forms.a.view((0, n1), (n1, n2)).into_owned();
    let a22 = forms.a.view((n1, n1), (n2, n2)).into_owned();
    let a22_pinv = pinv_symmetric(&a22);
    let reduced = &a11 - &a12 * &a22_pinv * a12.transpose();

    let inv_sqrt_b: Vec<f64> = (0..n1).map(|i| forms.b[(i, i)].sqrt().recip()).collect();
    let mut m = reduced;
    for i in 0..n1 {
        for j in 0..n1 {
            m[(i, j)] *= inv_sqrt_b[i] * inv_sqrt_b[j];
        }
    }
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(m);

    let mut order: Vec<usize> = (0..n1).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(CurvatureError::NonFinite(g.id(x).to_string()));
    }
    let lam0 = eigenvalues[0];
    let scale = lam0.abs().max(1.0);
    let cluster: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| eig.eigenvalues[i] - lam0 <= EIGEN_CLUSTER_TOL * scale)
        .collect();
    let gap_ambiguous = eigenvalues.iter().any(|&v| {
        let gap = v - lam0;
        gap > EIGEN_CLUSTER_TOL * scale && gap <= EIGEN_SEPARATION_TOL * scale
    });

    let a21 = a12.transpose();
    let maximizers = cluster
        .iter()
        .map(|&c| {
            let v = eig.eigenvectors.column(c);
            let g1 = DVector::from_iterator(n1, (0..n1).map(|i| v[i] * inv_sqrt_b[i]));
            let g2 = -(&a22_pinv * &a21 * &g1);
            let mut f = VertexFunction::zeros(g.len());
            for (i, &y) in forms.sphere1.iter().enumerate() {
                f[y] = g1[i];
            }
            for (i, &z) in forms.sphere2.iter().enumerate() {
                f[z] = g2[i];
            }
            f
        })
        .collect();

    Ok(Spectrum { eigenvalues, maximizers, gap_ambiguous })
}

/// `|Δf(x)|` over a Γ-orthonormal maximizer basis, as a vector norm.
fn harmonic_defect(g: &WeightedGraph, x: usize, maximizers: &[VertexFunction]) -> f64 {
    maximizers
        .iter()
        .map(|f| g.lap_with(x, &|i| f[i]).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn saturation_of(g: &WeightedGraph, x: usize, sp: &Spectrum) -> Result<Saturation> {
    let undecidable = |reason: String| CurvatureError::SaturationUndecidable {
        vertex: g.id(x).to_string(),
        reason,
    };
    if sp.gap_ambiguous {
        return Err(undecidable(format!(
            "eigenvalue gap near the minimum is below {EIGEN_SEPARATION_TOL:e} (spectrum {:?})",
            sp.eigenvalues
        )));
    }
    let s = harmonic_defect(g, x, &sp.maximizers);
    if s <= HARMONIC_TOL {
        Ok(Saturation::StronglySaturated)
    } else if sp.maximizers.len() >= 2 {
        // A single linear functional always has a kernel on a space of
        // dimension two or more.
        Ok(Saturation::WeaklySaturated)
    } else if s > NON_HARMONIC_TOL {
        Ok(Saturation::Unsaturated)
    } else {
        Err(undecidable(format!("|Δf(x)| = {s:e} on the normalized maximizer")))
    }
}

/// `K_{G,x}(N)` with its maximizer basis and saturation class.
pub fn curvature_function(g: &WeightedGraph, x: usize, n: Dim) -> Result<CurvatureResult> {
    let sp = spectrum(g, x, n)?;
    let saturation = saturation_of(g, x, &sp).ok();
    Ok(CurvatureResult {
        vertex: g.id(x).to_string(),
        index: x,
        dim: n,
        value: sp.eigenvalues[0],
        maximizer_dim: sp.maximizers.len(),
        maximizers: sp.maximizers,
        saturation,
    })
}

/// Just the value `K_{G,x}(N)`.
pub fn curvature(g: &WeightedGraph, x: usize, n: Dim) -> Result<f64> {
    Ok(spectrum(g, x, n)?.eigenvalues[0])
}

/// Curvature at every vertex, in index order, evaluated in parallel.
pub fn curvature_sweep(g: &WeightedGraph, n: Dim) -> Result<Vec<CurvatureResult>> {
    (0..g.len())
        .into_par_iter()
        .map(|x| curvature_function(g, x, n))
        .collect()
}

/// Whether `CD(K, N)` holds at `x`, decided on the full gauged 2-ball form.
pub fn cd_check(g: &WeightedGraph, x: usize, k: f64, n: Dim) -> Result<bool> {
    let forms = assemble_local_forms(g, x, n)?;
    let m = &forms.a - &forms.b * k;
    let scale = m.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let min = SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(min >= -1e-12 * scale)
}

pub fn classify_saturation(g: &WeightedGraph, x: usize, n: Dim) -> Result<Saturation> {
    let sp = spectrum(g, x, n)?;
    saturation_of(g, x, &sp)
}

/// Smallest `|Δf(x)|` over Γ-normalized maximizers. Zero whenever the
/// maximizer space has dimension two or more.
pub fn min_harmonic_defect(g: &WeightedGraph, x: usize, n: Dim) -> Result<f64> {
    let sp = spectrum(g, x, n)?;
    if sp.maximizers.len() >= 2 {
        Ok(0.0)
    } else {
        Ok(harmonic_defect(g, x, &sp.maximizers))
    }
}

/// Lower curvature bounds built from degrees and measures on the 1-ball.
///
/// `degree_form` applies for `N ≥ 2` and `anchored`, which shifts
/// `K(2)` by `((2 - N)/N) D_x`, for `N ≤ 2`; both apply at `N = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StructuralLowerBound {
    pub degree_form: Option<f64>,
    pub anchored: Option<f64>,
}

impl StructuralLowerBound {
    /// The larger of the applicable bounds.
    pub fn best(&self) -> f64 {
        match (self.degree_form, self.anchored) {
            (Some(a), Some(b)) => a.max(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => f64::NEG_INFINITY,
        }
    }
}

pub fn structural_lower_bound(g: &WeightedGraph, x: usize, n: Dim) -> Result<StructuralLowerBound> {
    require_nonisolated(g, x)?;
    let two = 2.0;
    let at_most_two = matches!(n, Dim::Finite(v) if v <= two);
    let at_least_two = !matches!(n, Dim::Finite(v) if v < two);
    let anchored = if at_most_two {
        let nv = n.value();
        Some(curvature(g, x, Dim::Finite(two))? - (two - nv) / nv * g.deg(x))
    } else {
        None
    };
    let degree_form = at_least_two.then(|| {
        let a = (g.deg(x) / g.measure(x)).sqrt();
        g.neighbors(x)
            .iter()
            .map(|&(y, _)| {
                let dy = g.deg(y);
                -dy * dy / 4.0 + dy.powf(1.5) / 2.0 + (a - 0.25) * dy - a * dy.sqrt() - a / g.measure(y)
            })
            .fold(f64::INFINITY, f64::min)
    });
    Ok(StructuralLowerBound { degree_form, anchored })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperBoundVariant {
    /// The closed-form expression in its original normalization.
    AsStated,
    /// Twice that expression, which is what the indicator test
    /// function actually yields since `Γ(δ_x)(x) = D_x / 2`.
    Corrected,
}

/// The upper bound on `K_{G,x}(∞)` from the indicator test function.
pub fn structural_upper_bound(
    g: &WeightedGraph,
    x: usize,
    variant: UpperBoundVariant,
) -> Result<f64> {
    require_nonisolated(g, x)?;
    let (mx, dx) = (g.measure(x), g.deg(x));
    let a = (dx / mx).sqrt();
    let nb = g.neighbors(x);
    let max_of = |f: &dyn Fn(usize) -> f64| {
        nb.iter().map(|&(y, _)| f(y)).fold(f64::NEG_INFINITY, f64::max)
    };
    let max_m = max_of(&|y| g.measure(y));
    let max_m_sqrt_d = max_of(&|y| g.measure(y) * g.deg(y).sqrt());
    let max_m_d = max_of(&|y| g.measure(y) * g.deg(y));
    let stated = 0.25 * dx * max_m / mx + 0.5 * (a - 1.0) * max_m_sqrt_d + 0.75 * max_m_d;
    Ok(match variant {
        UpperBoundVariant::AsStated => stated,
        UpperBoundVariant::Corrected => 2.0 * stated,
    })
}

/// The Rayleigh quotient `(Γ₂(f)(x) - (Δf(x))²/N) / Γ(f)(x)`, an upper bound on `K`.
pub fn test_function_bound(
    g: &WeightedGraph,
    x: usize,
    n: Dim,
    f: &VertexFunction,
) -> Result<f64> {
    let gam = g.gamma(f, f, x)?;
    if gam <= 0.0 {
        return Err(CurvatureError::DegenerateTestFunction(gam));
    }
    let lap = g.laplacian(f, x)?;
    let g2 = g.gamma2(f, f, x)?;
    Ok((g2 - n.inv() * lap * lap) / gam)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EinsteinReport {
    pub einstein: bool,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    pub values: Vec<f64>,
}

/// Whether the curvature function is constant across vertices within `tol`.
pub fn einstein_check(g: &WeightedGraph, n: Dim, tol: f64) -> Result<EinsteinReport> {
    let values: Vec<f64> = (0..g.len())
        .into_par_iter()
        .map(|x| curvature(g, x, n))
        .collect::<Result<_>>()?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = if values.is_empty() { 0.0 } else { max - min };
    Ok(EinsteinReport { einstein: spread <= tol, min, max, spread, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const DIMS: [Dim; 5] = [
        Dim::Finite(1.0),
        Dim::Finite(2.0),
        Dim::Finite(4.0),
        Dim::Finite(10.0),
        Dim::Infinite,
    ];

    fn path(n: usize) -> WeightedGraph {
        let vs: Vec<(String, f64)> = (0..n).map(|i| (format!("v{i}"), 1.0)).collect();
        let es: Vec<(String, String, f64)> = (1..n)
            .map(|i| (format!("v{}", i - 1), format!("v{i}"), 1.0))
            .collect();
        WeightedGraph::build(&vs, &es, true).unwrap()
    }

    fn cycle(n: usize) -> WeightedGraph {
        let vs: Vec<(String, f64)> = (0..n).map(|i| (format!("v{i}"), 1.0)).collect();
        let es: Vec<(String, String, f64)> = (0..n)
            .map(|i| (format!("v{i}"), format!("v{}", (i + 1) % n), 1.0))
            .collect();
        WeightedGraph::build(&vs, &es, true).unwrap()
    }

    /// Entry-by-entry evaluation of `Γ₂` on indicators.
    fn forms_by_indicators(g: &WeightedGraph, x: usize, n: Dim) -> DMatrix<f64> {
        let f = assemble_local_forms(g, x, n).unwrap();
        let ind = |v: usize| VertexFunction::indicator(g.len(), v);
        let k = f.ball.len() - 1;
        DMatrix::from_fn(k, k, |i, j| {
            let (fi, fj) = (ind(f.ball[i + 1]), ind(f.ball[j + 1]));
            g.gamma2(&fi, &fj, x).unwrap()
                - n.inv() * g.laplacian(&fi, x).unwrap() * g.laplacian(&fj, x).unwrap()
        })
    }

    #[test]
    fn local_forms_match_indicator_evaluation() {
        use crate::corpus::{random_graph, RandomGraphParams};
        for seed in 0..20 {
            let p = RandomGraphParams::new(7, 0.5).asymmetric(seed % 2 == 0);
            let g = random_graph(&p, seed).unwrap();
            for x in 0..g.len() {
                let n = Dim::Finite(3.0);
                let a = assemble_local_forms(&g, x, n).unwrap().a;
                let oracle = forms_by_indicators(&g, x, n);
                assert!((a - oracle).amax() <= 1e-12);
            }
        }
    }

    #[test]
    fn local_forms_k2() {
        let f = assemble_local_forms(&path(2), 0, Dim::Infinite).unwrap();
        assert_eq!(f.ball, vec![0, 1]);
        assert_abs_diff_eq!(f.a[(0, 0)], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f.b[(0, 0)], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn local_forms_c4() {
        let f = assemble_local_forms(&cycle(4), 0, Dim::Infinite).unwrap();
        assert_eq!(f.sphere1, vec![1, 3]);
        assert_eq!(f.sphere2, vec![2]);
        // Γ₂ = ½f_z² - f_z(f_a + f_b) + 3/2(f_a² + f_b²) + f_a f_b
        let expect = [[1.5, 0.5, -0.5], [0.5, 1.5, -0.5], [-0.5, -0.5, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert_abs_diff_eq!(f.a[(i, j)], expect[i][j], epsilon = 1e-14);
            }
        }
        assert_eq!(f.b[(2, 2)], 0.0);
        assert_eq!(f.b[(0, 0)], 0.5);
    }

    #[test]
    fn local_forms_large_n_continuity() {
        let g = cycle(5);
        let a = assemble_local_forms(&g, 0, Dim::Infinite).unwrap().a;
        let b = assemble_local_forms(&g, 0, Dim::Finite(1e9)).unwrap().a;
        let diff = (a - b).amax();
        assert!(diff <= 1e-9 + 1e-14, "{diff:e}");
    }

    #[test]
    fn isolated_vertex_rejected() {
        let g = WeightedGraph::build(&[("a", 1.0)], &[] as &[(&str, &str, f64)], true).unwrap();
        assert!(matches!(
            curvature_function(&g, 0, Dim::Infinite),
            Err(CurvatureError::IsolatedVertex(_))
        ));
    }

    #[test]
    fn k2_values() {
        let g = path(2);
        for n in DIMS {
            for x in 0..2 {
                let r = curvature_function(&g, x, n).unwrap();
                assert_abs_diff_eq!(r.value, 2.0 - 2.0 * n.inv(), epsilon = 1e-9);
                assert_eq!(r.saturation, Some(Saturation::Unsaturated));
            }
        }
    }

    #[test]
    fn p3_values() {
        let g = path(3);
        for n in DIMS {
            let leaf = curvature(&g, 0, n).unwrap();
            let center = curvature(&g, 1, n).unwrap();
            assert_abs_diff_eq!(leaf, 1.5 - 2.0 * n.inv(), epsilon = 1e-9);
            assert_abs_diff_eq!(center, (2.5 - 4.0 * n.inv()).min(0.5), epsilon = 1e-9);
        }
        assert_eq!(
            classify_saturation(&g, 1, Dim::Infinite).unwrap(),
            Saturation::StronglySaturated
        );
    }

    #[test]
    fn c4_values() {
        let g = cycle(4);
        for n in DIMS {
            assert_abs_diff_eq!(curvature(&g, 2, n).unwrap(), 2.0 - 4.0 * n.inv(), epsilon = 1e-9);
        }
        assert_eq!(
            classify_saturation(&g, 0, Dim::Infinite).unwrap(),
            Saturation::WeaklySaturated
        );
    }

    #[test]
    fn scaled_k2() {
        let g = path(2).scale_weights(3.0).unwrap();
        assert_abs_diff_eq!(curvature(&g, 0, Dim::Infinite).unwrap(), 6.0, epsilon = 1e-9);
    }

    #[test]
    fn cd_check_examples() {
        let g = path(2);
        assert!(cd_check(&g, 0, 1.0, Dim::Finite(2.0)).unwrap());
        assert!(!cd_check(&g, 0, 1.001, Dim::Finite(2.0)).unwrap());
        assert!(cd_check(&g, 0, -1e6, Dim::Finite(2.0)).unwrap());
    }

    #[test]
    fn maximizers_attain_value() {
        let g = cycle(5);
        for n in DIMS {
            let r = curvature_function(&g, 0, n).unwrap();
            for f in &r.maximizers {
                assert_eq!(f[0], 0.0);
                assert_abs_diff_eq!(g.gamma(f, f, 0).unwrap(), 1.0, epsilon = 1e-9);
                let q = test_function_bound(&g, 0, n, f).unwrap();
                assert_abs_diff_eq!(q, r.value, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn degree_form_exceeds_curvature_on_star_leaf() {
        let v: Vec<(String, f64)> = (0..5).map(|i| (format!("v{i}"), 1.0)).collect();
        let e: Vec<(String, String, f64)> =
            (1..5).map(|i| ("v0".to_string(), format!("v{i}"), 1.0)).collect();
        let g = WeightedGraph::build(&v, &e, true).unwrap();
        let two = Dim::Finite(2.0);
        assert_abs_diff_eq!(curvature(&g, 1, two).unwrap(), -0.5, epsilon = 1e-12);
        let lb = structural_lower_bound(&g, 1, two).unwrap();
        assert_abs_diff_eq!(lb.degree_form.unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lb.anchored.unwrap(), -0.5, epsilon = 1e-12);
    }

    #[test]
    fn structural_bounds_k2() {
        let g = path(2);
        let at2 = structural_lower_bound(&g, 0, Dim::Finite(2.0)).unwrap();
        assert_abs_diff_eq!(at2.degree_form.unwrap(), -1.0);
        assert_abs_diff_eq!(at2.anchored.unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(at2.best(), 1.0, epsilon = 1e-12);
        let inf = structural_lower_bound(&g, 0, Dim::Infinite).unwrap();
        assert_eq!((inf.degree_form, inf.anchored), (Some(-1.0), None));
        let one = structural_lower_bound(&g, 0, Dim::Finite(1.0)).unwrap();
        assert!(one.degree_form.is_none());
        assert_abs_diff_eq!(one.anchored.unwrap(), 0.0, epsilon = 1e-12);
        let stated = structural_upper_bound(&g, 0, UpperBoundVariant::AsStated).unwrap();
        let corrected = structural_upper_bound(&g, 0, UpperBoundVariant::Corrected).unwrap();
        assert_abs_diff_eq!(stated, 1.0);
        assert_abs_diff_eq!(corrected, 2.0);
    }

    #[test]
    fn structural_upper_regular() {
        // m ≡ 1 and D ≡ d everywhere: d/4 + (√d - 1)√d/2 + 3d/4.
        let g = cycle(6);
        let d: f64 = 2.0;
        let expect = d / 4.0 + (d.sqrt() - 1.0) * d.sqrt() / 2.0 + 0.75 * d;
        let got = structural_upper_bound(&g, 0, UpperBoundVariant::AsStated).unwrap();
        assert_abs_diff_eq!(got, expect, epsilon = 1e-12);
    }

    #[test]
    fn test_function_examples() {
        let g = path(2);
        let dx = VertexFunction::indicator(2, 0);
        assert_abs_diff_eq!(
            test_function_bound(&g, 0, Dim::Infinite, &dx).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        let c = VertexFunction::constant(2, 1.0);
        assert!(matches!(
            test_function_bound(&g, 0, Dim::Infinite, &c),
            Err(CurvatureError::DegenerateTestFunction(_))
        ));
    }

    #[test]
    fn einstein_examples() {
        let k2 = einstein_check(&path(2), Dim::Finite(4.0), 1e-9).unwrap();
        assert!(k2.einstein);
        assert_abs_diff_eq!(k2.min, 1.5, epsilon = 1e-9);
        let c4 = einstein_check(&cycle(4), Dim::Finite(4.0), 1e-9).unwrap();
        assert!(c4.einstein);
        assert_abs_diff_eq!(c4.max, 1.0, epsilon = 1e-9);
        let p3 = einstein_check(&path(3), Dim::Infinite, 1e-9).unwrap();
        assert!(!p3.einstein);
        assert_abs_diff_eq!(p3.spread, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn sweep_is_ordered() {
        let res = curvature_sweep(&path(4), Dim::Infinite).unwrap();
        let idx: Vec<usize> = res.iter().map(|r| r.index).collect();
        assert_eq!(idx, vec![0, 1, 2, 3]);
    }
}
