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

//! Independent dense oracles shared by the integration tests.
//!
//! Nothing here calls the library's operators or curvature solver; every
//! quantity is rebuilt from the definitions on dense matrices.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use curvegraph::graph::{Dim, WeightedGraph};

/// Dense copy of a graph: `w[x][y] = ω(x, y)`, `m[x] = m(x)`.
pub struct Dense {
    pub n: usize,
    pub w: DMatrix<f64>,
    pub m: DVector<f64>,
}

impl Dense {
    pub fn new(g: &WeightedGraph) -> Self {
        let n = g.len();
        Dense {
            n,
            w: DMatrix::from_fn(n, n, |i, j| g.weight(i, j)),
            m: DVector::from_fn(n, |i, _| g.measure(i)),
        }
    }

    /// Laplacian matrix: `(Lf)(x) = Σ_y ω(x,y)(f(y) - f(x)) / m(x)`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.n, self.n);
        for x in 0..self.n {
            let mut row = 0.0;
            for y in 0..self.n {
                if y != x {
                    l[(x, y)] = self.w[(x, y)] / self.m[x];
                    row += self.w[(x, y)];
                }
            }
            l[(x, x)] = -row / self.m[x];
        }
        l
    }

    pub fn degree(&self, x: usize) -> f64 {
        self.w.row(x).sum() / self.m[x]
    }

    /// `Γ(f, g) = ½(L(fg) - f Lg - g Lf)` as a vector over vertices.
    pub fn gamma(&self, f: &DVector<f64>, g: &DVector<f64>) -> DVector<f64> {
        let l = self.laplacian();
        let fg = f.component_mul(g);
        0.5 * (&l * fg - f.component_mul(&(&l * g)) - g.component_mul(&(&l * f)))
    }

    /// `Γ₂(f, g) = ½(LΓ(f,g) - Γ(Lf, g) - Γ(f, Lg))`.
    pub fn gamma2(&self, f: &DVector<f64>, g: &DVector<f64>) -> DVector<f64> {
        let l = self.laplacian();
        0.5 * (&l * self.gamma(f, g) - self.gamma(&(&l * f), g) - self.gamma(f, &(&l * g)))
    }

    /// Matrices of the quadratic forms `Γ(·)(x)` and `Γ₂(·)(x) - (Δ·)(x)²/N`
    /// on all of `R^n`, by polarization on the standard basis.
    pub fn forms(&self, x: usize, n: Dim) -> (DMatrix<f64>, DMatrix<f64>) {
        let e = |i: usize| DVector::from_fn(self.n, |k, _| if k == i { 1.0 } else { 0.0 });
        let l = self.laplacian();
        let mut g = DMatrix::zeros(self.n, self.n);
        let mut a = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                g[(i, j)] = self.gamma(&e(i), &e(j))[x];
                a[(i, j)] = self.gamma2(&e(i), &e(j))[x] - n.inv() * l[(x, i)] * l[(x, j)];
            }
        }
        (sym(&g), sym(&a))
    }
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (m + m.transpose())
}

/// `K_{G,x}(N)` as the largest `K` with `A - K Γ ⪰ 0`, found by bisection.
///
/// The forms are restricted to functions on the 2-ball vanishing at `x`, where
/// `A - KΓ` is positive definite for every `K` below the curvature.
pub fn curvature_by_bisection(g: &WeightedGraph, x: usize, n: Dim) -> f64 {
    let d = Dense::new(g);
    let (gm, am) = d.forms(x, n);
    let ball: Vec<usize> = ball2(&d, x).into_iter().filter(|&v| v != x).collect();
    let k = ball.len();
    let gs = DMatrix::from_fn(k, k, |i, j| gm[(ball[i], ball[j])]);
    let as_ = DMatrix::from_fn(k, k, |i, j| am[(ball[i], ball[j])]);
    let scale = as_.norm().max(gs.norm()).max(1.0);
    let ok = |kk: f64| {
        let m = &as_ - kk * &gs;
        SymmetricEigen::new(m).eigenvalues.min() >= -1e-13 * scale
    };
    let (mut lo, mut hi) = (-scale * 1e3, scale * 1e3);
    assert!(ok(lo) && !ok(hi), "bisection bracket");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 * scale {
            break;
        }
    }
    lo
}

/// Vertices within two hops of `x`.
pub fn ball2(d: &Dense, x: usize) -> Vec<usize> {
    let adj = |a: usize, b: usize| d.w[(a, b)] > 0.0 || d.w[(b, a)] > 0.0;
    (0..d.n)
        .filter(|&v| v == x || adj(x, v) || (0..d.n).any(|y| adj(x, y) && adj(y, v)))
        .collect()
}

/// All-pairs shortest paths by Floyd-Warshall with per-edge `length(ω)`.
pub fn floyd_warshall(g: &WeightedGraph, length: impl Fn(f64) -> f64) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (x, y, w) in g.edges() {
        d[x][y] = d[x][y].min(length(w));
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// `sqrt` of the effective resistance between `x` and `y`, from the
/// pseudo-inverse of the combinatorial Laplacian.
pub fn resistance_by_pinv(g: &WeightedGraph, x: usize, y: usize) -> f64 {
    let d = Dense::new(g);
    let lap = -d.laplacian();
    let pinv = lap.pseudo_inverse(1e-12).expect("pseudo-inverse");
    let r = pinv[(x, x)] + pinv[(y, y)] - pinv[(x, y)] - pinv[(y, x)];
    r.sqrt()
}

/// Unit-measure graph on `v0..v{n-1}` with symmetric edges.
pub fn unit_graph(n: usize, edges: &[(usize, usize, f64)]) -> WeightedGraph {
    let v: Vec<(String, f64)> = (0..n).map(|i| (format!("v{i}"), 1.0)).collect();
    let e: Vec<(String, String, f64)> =
        edges.iter().map(|&(a, b, w)| (format!("v{a}"), format!("v{b}"), w)).collect();
    WeightedGraph::build(&v, &e, true).unwrap()
}

pub fn k2() -> WeightedGraph {
    unit_graph(2, &[(0, 1, 1.0)])
}

pub fn p3() -> WeightedGraph {
    unit_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)])
}

pub fn c4() -> WeightedGraph {
    unit_graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)])
}

pub fn star(leaves: usize) -> WeightedGraph {
    let e: Vec<(usize, usize, f64)> = (1..=leaves).map(|i| (0, i, 1.0)).collect();
    unit_graph(leaves + 1, &e)
}
