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

//! The invariant suite behind `curvegraph verify`.
//!
//! Every check runs over a seeded corpus and tallies trials, failures and
//! the worst violation. Checks come in three classes:
//!
//! * `hard`: identities and inequalities that are proved or exact; any
//!   failure fails the run.
//! * `experiment`: claimed bounds measured against exact values; failures
//!   are findings and never fail the run.
//! * `discrepancy`: a stated form compared with its corrected form.
//!
//! Reports are deterministic in `(seed, trials)` regardless of thread count.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{self, RandomGraphParams, WarpedCorpusParams, CORPUS_DIMS};
use crate::curvature::{self, UpperBoundVariant};
use crate::graph::{Dim, VertexFunction, WeightedGraph};
use crate::metrics::{self, LengthMode, MetricKind};
use crate::warped::{self, LaplacianFlags, Product, ProductVertex, Side, TwistedProductSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckClass {
    Hard,
    Experiment,
    Discrepancy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub class: CheckClass,
    pub trials: usize,
    pub failures: usize,
    /// Trials that raised an error, such as an undecidable saturation class.
    pub errors: usize,
    /// Largest amount by which a failing trial missed.
    pub worst: f64,
    /// The first failing or erroring trial in corpus order.
    pub example: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.errors == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn hard_failures(&self) -> usize {
        self.checks.iter().filter(|c| c.class == CheckClass::Hard).map(|c| c.failures).sum()
    }

    pub fn hard_errors(&self) -> usize {
        self.checks.iter().filter(|c| c.class == CheckClass::Hard).map(|c| c.errors).sum()
    }

    pub fn hard_ok(&self) -> bool {
        self.hard_failures() == 0 && self.hard_errors() == 0
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Per-item accumulator; `merge` keeps the example with the smallest key so
/// the result does not depend on how rayon splits the work.
#[derive(Debug, Clone)]
pub struct Tally {
    trials: usize,
    failures: usize,
    errors: usize,
    worst: f64,
    example: Option<(usize, String)>,
    item: usize,
}

impl Tally {
    fn new(item: usize) -> Self {
        Tally { trials: 0, failures: 0, errors: 0, worst: 0.0, example: None, item }
    }

    fn note(&mut self, text: impl FnOnce() -> String) {
        if self.example.as_ref().is_none_or(|(k, _)| self.item < *k) {
            self.example = Some((self.item, text()));
        }
    }

    /// Record one trial; `violation > 0` means failure.
    pub fn record(&mut self, violation: f64, context: impl FnOnce() -> String) {
        self.trials += 1;
        if violation > 0.0 || violation.is_nan() {
            self.failures += 1;
            self.worst = self.worst.max(if violation.is_nan() { f64::INFINITY } else { violation });
            self.note(context);
        }
    }

    pub fn error(&mut self, context: impl FnOnce() -> String) {
        self.trials += 1;
        self.errors += 1;
        self.note(context);
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.trials += other.trials;
        self.failures += other.failures;
        self.errors += other.errors;
        self.worst = self.worst.max(other.worst);
        self.example = match (self.example, other.example) {
            (Some(a), Some(b)) => Some(if b.0 < a.0 { b } else { a }),
            (a, b) => a.or(b),
        };
        self
    }
}

fn sweep<T: Sync>(
    name: &'static str,
    class: CheckClass,
    items: &[T],
    check: impl Fn(&T, &mut Tally) + Sync,
) -> CheckOutcome {
    let t = items
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            let mut t = Tally::new(i);
            check(item, &mut t);
            t
        })
        .reduce(|| Tally::new(usize::MAX), Tally::merge);
    CheckOutcome {
        name,
        class,
        trials: t.trials,
        failures: t.failures,
        errors: t.errors,
        worst: t.worst,
        example: t.example.map(|e| e.1),
    }
}

/// Excess of `a` over `b` beyond a mixed tolerance; positive means `a > b`.
fn excess(a: f64, b: f64, tol: f64) -> f64 {
    a - b - tol * b.abs().max(1.0)
}

/// The seeded material every check draws from.
pub struct Corpus {
    pub seed: u64,
    pub graphs: Vec<WeightedGraph>,
    pub unit_graphs: Vec<WeightedGraph>,
    pub trees: Vec<WeightedGraph>,
    pub products: Vec<Product>,
    pub unit_products: Vec<Product>,
}

fn sub_seed(seed: u64, stream: u64, i: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (stream << 48) ^ i as u64
}

impl Corpus {
    pub fn new(seed: u64, trials: usize) -> Result<Self, corpus::CorpusError> {
        let graphs = (0..trials)
            .map(|i| {
                let p = RandomGraphParams::new(2 + i % 7, 0.5).asymmetric(i % 2 == 1);
                corpus::random_graph(&p, sub_seed(seed, 1, i))
            })
            .collect::<Result<_, _>>()?;
        let unit_graphs = (0..trials)
            .map(|i| {
                let p = RandomGraphParams::new(2 + i % 11, 0.4).measures(1.0, 1.0);
                corpus::random_graph(&p, sub_seed(seed, 2, i))
            })
            .collect::<Result<_, _>>()?;
        let trees = (0..trials)
            .map(|i| corpus::random_tree(3 + i % 8, (0.5, 2.0), sub_seed(seed, 3, i)))
            .collect::<Result<_, _>>()?;
        let product = |stream: u64, unit: bool| {
            (0..trials)
                .map(|i| {
                    let p = WarpedCorpusParams { unit_measure: unit, ..Default::default() };
                    let spec = corpus::random_warped_spec(&p, sub_seed(seed, stream, i))?;
                    Ok(Product::warped(&spec).expect("corpus warps are positive"))
                })
                .collect::<Result<Vec<_>, corpus::CorpusError>>()
        };
        Ok(Corpus {
            seed,
            graphs,
            unit_graphs,
            trees,
            products: product(4, false)?,
            unit_products: product(5, true)?,
        })
    }

    fn rng(&self, stream: u64, i: usize) -> rand_chacha::ChaCha8Rng {
        corpus::rng(sub_seed(self.seed, stream, i))
    }

    /// `(N₁, N₂)` for product `i`, cycling through the corpus grid.
    pub fn dims(i: usize) -> (Dim, Dim) {
        (CORPUS_DIMS[i % 4], CORPUS_DIMS[(i / 4) % 4])
    }
}

/// A function with `Δf(x) = 0`: random values, then `f(x)` reset to the
/// weighted neighbour mean.
fn harmonic_at(g: &WeightedGraph, x: usize, rng: &mut impl Rng) -> VertexFunction {
    let mut f = corpus::random_function(g.len(), rng);
    let total: f64 = g.neighbors(x).iter().map(|&(_, w)| w).sum();
    if total > 0.0 {
        f[x] = g.neighbors(x).iter().map(|&(y, w)| w * f[y]).sum::<f64>() / total;
    }
    f
}

fn indexed<T>(v: &[T]) -> Vec<(usize, &T)> {
    v.iter().enumerate().collect()
}

/// Run the whole suite.
pub fn run(seed: u64, trials: usize) -> Result<VerifyReport, corpus::CorpusError> {
    let c = Corpus::new(seed, trials)?;
    let mut checks = Vec::new();
    checks.extend(curvature_checks(&c));
    checks.extend(product_identity_checks(&c));
    checks.extend(product_bound_checks(&c));
    checks.extend(metric_checks(&c));
    Ok(VerifyReport { seed, trials, checks })
}

pub fn curvature_checks(c: &Corpus) -> Vec<CheckOutcome> {
    use CheckClass::*;
    let gs = indexed(&c.graphs);
    let mut out = Vec::new();

    out.push(sweep("maximizer_attains_curvature", Hard, &gs, |&(_, g), t| {
        for x in 0..g.len() {
            for n in CORPUS_DIMS {
                match curvature::curvature_function(g, x, n) {
                    Ok(r) => {
                        for f in &r.maximizers {
                            match curvature::test_function_bound(g, x, n, f) {
                                Ok(q) => t.record((q - r.value).abs() - 1e-8 * r.value.abs().max(1.0), || {
                                    format!("{} N={n}: quotient {q} vs K {}", g.id(x), r.value)
                                }),
                                Err(e) => t.error(|| e.to_string()),
                            }
                        }
                    }
                    Err(e) => t.error(|| e.to_string()),
                }
            }
        }
    }));

    out.push(sweep("random_test_functions_above_curvature", Hard, &gs, |&(i, g), t| {
        let mut rng = c.rng(10, i);
        for x in 0..g.len() {
            for n in CORPUS_DIMS {
                let Ok(k) = curvature::curvature(g, x, n) else { continue };
                for _ in 0..50 {
                    let f = corpus::random_function(g.len(), &mut rng);
                    if let Ok(q) = curvature::test_function_bound(g, x, n, &f) {
                        t.record(excess(k, q, 1e-6), || format!("{} N={n}: quotient {q} < K {k}", g.id(x)));
                    }
                }
            }
        }
    }));

    out.push(sweep("curvature_scaling", Hard, &gs, |&(_, g), t| {
        for lambda in [0.5, 3.0] {
            let h = g.scale_weights(lambda).expect("positive scale");
            for x in 0..g.len() {
                for n in CORPUS_DIMS {
                    match (curvature::curvature(g, x, n), curvature::curvature(&h, x, n)) {
                        (Ok(k), Ok(kl)) => t.record((kl - lambda * k).abs() - 1e-9 * k.abs().max(1.0), || {
                            format!("{} λ={lambda} N={n}: {kl} vs {}", g.id(x), lambda * k)
                        }),
                        _ => t.error(|| format!("{}: curvature failed", g.id(x))),
                    }
                }
            }
        }
    }));

    out.push(sweep("curvature_monotone_in_dim", Hard, &gs, |&(_, g), t| {
        let dims = [0.5, 1.0, 2.0, 3.0, 5.0, 10.0].map(Dim::Finite);
        for x in 0..g.len() {
            let mut ks: Vec<f64> = dims.iter().filter_map(|&n| curvature::curvature(g, x, n).ok()).collect();
            ks.extend(curvature::curvature(g, x, Dim::Infinite).ok());
            for w in ks.windows(2) {
                t.record(excess(w[0], w[1], 1e-10), || format!("{}: {} > {}", g.id(x), w[0], w[1]));
            }
        }
    }));

    out.push(sweep("translation_invariance", Hard, &gs, |&(_, g), t| {
        for x in 0..g.len() {
            let Ok(r) = curvature::curvature_function(g, x, Dim::Finite(2.0)) else { continue };
            for f in &r.maximizers {
                let q0 = curvature::test_function_bound(g, x, r.dim, f);
                let q1 = curvature::test_function_bound(g, x, r.dim, &f.shifted(3.7));
                if let (Ok(a), Ok(b)) = (q0, q1) {
                    t.record((a - b).abs() - 1e-9 * a.abs().max(1.0), || format!("{}: {a} vs {b}", g.id(x)));
                }
            }
        }
    }));

    out.push(sweep("cd_check_bracketing", Hard, &gs, |&(_, g), t| {
        for x in 0..g.len() {
            for n in CORPUS_DIMS {
                let Ok(k) = curvature::curvature(g, x, n) else { continue };
                let eps = 1e-6 * k.abs().max(1.0);
                let below = curvature::cd_check(g, x, k - eps, n).unwrap_or(false);
                let above = curvature::cd_check(g, x, k + eps, n).unwrap_or(true);
                t.record(if below && !above { 0.0 } else { 1.0 }, || {
                    format!("{} N={n}: K={k}, CD(K-ε)={below}, CD(K+ε)={above}", g.id(x))
                });
            }
        }
    }));

    out.push(sweep("anchored_lower_bound", Hard, &gs, |&(_, g), t| {
        for x in 0..g.len() {
            for nv in [0.25, 0.5, 1.0, 1.5, 2.0] {
                let n = Dim::Finite(nv);
                if let (Ok(k), Ok(lb)) = (curvature::curvature(g, x, n), curvature::structural_lower_bound(g, x, n)) {
                    let lo = lb.anchored.expect("N <= 2");
                    t.record(excess(lo, k, 1e-9), || format!("{} N={nv}: bound {lo} > K {k}", g.id(x)));
                }
            }
        }
    }));

    out.push(sweep("degree_form_lower_bound", Experiment, &gs, |&(_, g), t| {
        for x in 0..g.len() {
            for n in [Dim::Finite(2.0), Dim::Finite(5.0), Dim::Infinite] {
                if let (Ok(k), Ok(lb)) = (curvature::curvature(g, x, n), curvature::structural_lower_bound(g, x, n)) {
                    let lo = lb.degree_form.expect("N >= 2");
                    t.record(excess(lo, k, 1e-9), || format!("{} N={n}: bound {lo} > K {k}", g.id(x)));
                }
            }
        }
    }));

    for (name, class, variant) in [
        ("corrected_upper_bound", Experiment, UpperBoundVariant::Corrected),
        ("as_stated_upper_bound", Discrepancy, UpperBoundVariant::AsStated),
    ] {
        out.push(sweep(name, class, &gs, |&(_, g), t| {
            for x in 0..g.len() {
                if let (Ok(k), Ok(up)) = (
                    curvature::curvature(g, x, Dim::Infinite),
                    curvature::structural_upper_bound(g, x, variant),
                ) {
                    t.record(excess(k, up, 1e-9), || format!("{}: K(∞) {k} > bound {up}", g.id(x)));
                }
            }
        }));
    }

    out.push(sweep("estimate_laplacian_square", Hard, &gs, |&(i, g), t| {
        let mut rng = c.rng(11, i);
        for x in 0..g.len() {
            for _ in 0..5 {
                let f = corpus::random_function(g.len(), &mut rng);
                let lap = g.laplacian(&f, x).unwrap();
                let rhs = 2.0 * g.degree(x).unwrap() * g.gamma(&f, &f, x).unwrap();
                t.record(excess(lap * lap, rhs, 1e-12), || format!("{}: {} > {rhs}", g.id(x), lap * lap));
            }
        }
    }));

    out.push(sweep("estimate_gamma_cauchy_schwarz", Hard, &gs, |&(i, g), t| {
        let mut rng = c.rng(12, i);
        for x in 0..g.len() {
            for _ in 0..5 {
                let f = corpus::random_function(g.len(), &mut rng);
                let h = corpus::random_function(g.len(), &mut rng);
                let lhs = g.gamma(&f, &h, x).unwrap().powi(2);
                let rhs = g.gamma(&f, &f, x).unwrap() * g.gamma(&h, &h, x).unwrap();
                t.record(excess(lhs, rhs, 1e-12), || format!("{}: {lhs} > {rhs}", g.id(x)));
            }
        }
    }));

    for (name, class, factor) in [
        ("estimate_mixed_proof_constant", Hard, 1.0),
        ("estimate_mixed_stated_constant", Discrepancy, 0.5),
    ] {
        out.push(sweep(name, class, &gs, |&(i, g1), t| {
            let g2 = &c.graphs[(i + 1) % c.graphs.len()];
            let mut rng = c.rng(13, i);
            for x in 0..g1.len() {
                let p = x % g2.len();
                for _ in 0..5 {
                    let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
                    let f = corpus::random_function(g1.len(), &mut rng).map(|v| v * scale);
                    let gg = corpus::random_function(g2.len(), &mut rng);
                    let hh = corpus::random_function(g2.len(), &mut rng);
                    let lhs = (g1.laplacian(&f, x).unwrap() * g2.gamma(&gg, &hh, p).unwrap()).abs();
                    let rhs = factor * g1.degree(x).unwrap() * g1.gamma(&f, &f, x).unwrap()
                        + 0.5 * g2.gamma(&gg, &gg, p).unwrap() * g2.gamma(&hh, &hh, p).unwrap();
                    t.record(excess(lhs, rhs, 1e-12), || format!("{} / {}: {lhs} > {rhs}", g1.id(x), g2.id(p)));
                }
            }
        }));
    }
    out
}

fn points(pr: &Product) -> Vec<ProductVertex> {
    pr.points().collect()
}

pub fn product_identity_checks(c: &Corpus) -> Vec<CheckOutcome> {
    use CheckClass::*;
    let ps = indexed(&c.products);
    let mut out = Vec::new();

    out.push(sweep("product_measure_degree", Hard, &ps, |&(_, pr), t| {
        for pt in points(pr) {
            let i = pr.index(pt);
            let m = pr.g1.measure(pt.x) * pr.g2.measure(pt.p);
            let d = pr.alpha_at(pt).powi(-2) * pr.g1.degree(pt.x).unwrap()
                + pr.beta_at(pt).powi(-2) * pr.g2.degree(pt.p).unwrap();
            let got = pr.graph.degree(i).unwrap();
            let v: f64 = if pr.graph.measure(i) == m { 0.0 } else { 1.0 };
            t.record(v.max((got - d).abs() - 1e-12 * d.abs()), || format!("{}: D {got} vs {d}", pr.graph.id(i)));
        }
    }));

    out.push(sweep("twisted_matches_warped", Hard, &ps, |&(_, pr), t| {
        let n2 = pr.n2();
        let alpha = pr.alpha_factor().unwrap();
        let beta = pr.beta_factor().unwrap();
        let tw = TwistedProductSpec {
            g1: pr.g1.clone(),
            g2: pr.g2.clone(),
            alpha: VertexFunction::from_fn(pr.graph.len(), |i| alpha[i % n2]),
            beta: VertexFunction::from_fn(pr.graph.len(), |i| beta[i / n2]),
        };
        let same = warped::doubly_twisted_product(&tw).map(|g| g == pr.graph).unwrap_or(false);
        t.record(if same { 0.0 } else { 1.0 }, || "twisted product differs".into());
    }));

    out.push(sweep("operator_splitting", Hard, &ps, |&(i, pr), t| {
        let mut rng = c.rng(20, i);
        for pt in points(pr).into_iter().take(5) {
            let u = corpus::random_function(pr.graph.len(), &mut rng);
            let v = corpus::random_function(pr.graph.len(), &mut rng);
            let r = pr.operator_splitting(&u, &v, pt).unwrap();
            t.record(r.laplacian.max(r.gamma) - 1e-12, || format!("{pt:?}: {r:?}"));
        }
    }));

    out.push(sweep("gamma2_fibre_decomposition", Hard, &ps, |&(i, pr), t| {
        let mut rng = c.rng(21, i);
        for pt in points(pr).into_iter().take(5) {
            let u = corpus::random_function(pr.graph.len(), &mut rng);
            let v = corpus::random_function(pr.graph.len(), &mut rng);
            let d = pr.gamma2_first_formulation(&u, &v, pt).unwrap();
            t.record(d.residual - 1e-10, || format!("{pt:?}: residual {}", d.residual));
        }
    }));

    out.push(sweep("gamma2_tensor_decomposition", Hard, &ps, |&(i, pr), t| {
        let mut rng = c.rng(22, i);
        for pt in points(pr).into_iter().take(5) {
            let f = |n: usize, rng: &mut rand_chacha::ChaCha8Rng| corpus::random_function(n, rng);
            let (u1, u2) = (f(pr.n1(), &mut rng), f(pr.n2(), &mut rng));
            let (v1, v2) = (f(pr.n1(), &mut rng), f(pr.n2(), &mut rng));
            let d = pr.gamma2_tensor_formulation(&u1, &u2, &v1, &v2, pt).unwrap();
            t.record(d.residual - 1e-10, || format!("{pt:?}: residual {}", d.residual));
        }
    }));

    out.push(sweep("q_form_identity", Hard, &ps, |&(i, pr), t| {
        let mut rng = c.rng(23, i);
        for pt in points(pr).into_iter().take(5) {
            let f1 = corpus::random_function(pr.n1(), &mut rng);
            let f2 = corpus::random_function(pr.n2(), &mut rng);
            let (c1, c2) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let r = pr.q_identity_residual(c1, c2, &f1, &f2, pt).unwrap();
            t.record(r - 1e-10, || format!("{pt:?}: residual {r}"));
        }
    }));

    out.push(sweep("q_form_piecewise_bound", Hard, &ps, |&(i, pr), t| {
        let mut rng = c.rng(24, i);
        for (k, pt) in points(pr).into_iter().enumerate().take(10) {
            let flags = LaplacianFlags { first_nonzero: k % 2 == 0, second_nonzero: k % 4 < 2 };
            let f1 = if flags.first_nonzero {
                corpus::random_function(pr.n1(), &mut rng)
            } else {
                harmonic_at(&pr.g1, pt.x, &mut rng)
            };
            let f2 = if flags.second_nonzero {
                corpus::random_function(pr.n2(), &mut rng)
            } else {
                harmonic_at(&pr.g2, pt.p, &mut rng)
            };
            let (c1, c2) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let q = pr.q_form(c1, c2, &f1, &f2, pt).unwrap();
            let (q1, q2) = pr.q1_q2_bounds(pt, c1, c2, flags).unwrap();
            let rhs = q1 * pr.g1.gamma(&f1, &f1, pt.x).unwrap() + q2 * pr.g2.gamma(&f2, &f2, pt.p).unwrap();
            t.record(excess(q, rhs, 1e-10), || format!("{pt:?} {flags:?}: Q {q} > {rhs}"));
        }
    }));
    out
}

/// Entry names of a bound report grouped into checks.
const BOUND_CHECKS: [(&str, CheckClass, &[&str]); 6] = [
    ("warped_sandwich_lower", CheckClass::Experiment, &["sandwich_lower"]),
    ("warped_sandwich_upper", CheckClass::Experiment, &["sandwich_upper", "sandwich_upper_same_dim"]),
    ("same_dim_upper", CheckClass::Hard, &["same_dim_upper"]),
    ("same_dim_lower", CheckClass::Experiment, &["same_dim_lower"]),
    (
        "saturation_case_bounds",
        CheckClass::Hard,
        &[
            "saturation_both_weakly",
            "saturation_first_weakly",
            "saturation_second_weakly",
            "saturation_neither_strongly",
            "saturation_min_refinement",
        ],
    ),
    ("convexity_bounds", CheckClass::Experiment, &["convexity_max", "convexity_min"]),
];

pub fn product_bound_checks(c: &Corpus) -> Vec<CheckOutcome> {
    use CheckClass::*;
    let ps = indexed(&c.products);
    let reports: Vec<Vec<warped::BoundReport>> = ps
        .par_iter()
        .map(|&(i, pr)| {
            let (n1, n2) = Corpus::dims(i);
            pr.bound_reports(n1, n2).unwrap_or_default()
        })
        .collect();
    let indexed_reports = indexed(&reports);
    let mut out = Vec::new();
    for (name, class, entries) in BOUND_CHECKS {
        out.push(sweep(name, class, &indexed_reports, |&(_, rs), t| {
            for r in rs {
                for e in r.entries.iter().filter(|e| entries.contains(&e.name)) {
                    let miss = match e.side {
                        Side::Lower => e.value - e.exact,
                        Side::Upper => e.exact - e.value,
                    };
                    t.record(if e.holds { 0.0 } else { miss }, || {
                        format!("{} N1={} N2={}: {} {} vs exact {}", r.vertex, r.n1, r.n2, e.name, e.value, e.exact)
                    });
                }
            }
        }));
    }
    out.push(sweep("saturation_case_ambiguous", Experiment, &indexed_reports, |&(_, rs), t| {
        for r in rs {
            t.record(if r.saturation_note.is_some() { 1.0 } else { 0.0 }, || {
                format!("{}: {}", r.vertex, r.saturation_note.clone().unwrap_or_default())
            });
        }
    }));
    out.push(sweep("intersection_inequality", Experiment, &indexed_reports, |&(_, rs), t| {
        for r in rs {
            let i = r.intersection;
            t.record(if i.holds { 0.0 } else { i.rhs - i.lhs }, || format!("{}: {} <= {}", r.vertex, i.lhs, i.rhs));
        }
    }));

    out.push(sweep("cartesian_sandwich", Hard, &ps, |&(i, pr), t| {
        let spec = warped::WarpedProductSpec {
            g1: pr.g1.clone(),
            g2: pr.g2.clone(),
            alpha: VertexFunction::constant(pr.n2(), 1.0),
            beta: VertexFunction::constant(pr.n1(), 1.0),
        };
        let flat = Product::warped(&spec).unwrap();
        let (n1, n2) = Corpus::dims(i);
        for pt in points(&flat) {
            let s = flat.sandwich_bounds(pt, n1, n2).unwrap();
            let k = curvature::curvature(&flat.graph, flat.index(pt), n1 + n2).unwrap();
            let id = flat.graph.id(flat.index(pt));
            t.record(excess(s.lo, k, 1e-8), || format!("{id}: lower {} > K {k}", s.lo));
            t.record(excess(k, s.hi, 1e-8), || format!("{id}: K {k} > upper {}", s.hi));
        }
    }));

    out.push(sweep("rigidity_consistency", Hard, &ps, |&(_, pr), t| {
        for n in [Dim::Infinite, Dim::Finite(2.0)] {
            match pr.rigidity_check(n, 1e-8) {
                Ok(v) => t.record(if v.contradiction { 1.0 } else { 0.0 }, || format!("N={n}: {v:?}")),
                Err(e) => t.error(|| e.to_string()),
            }
        }
    }));
    out
}

pub fn metric_checks(c: &Corpus) -> Vec<CheckOutcome> {
    use CheckClass::*;
    let gs = indexed(&c.unit_graphs);
    let mut out = Vec::new();
    let kinds = [
        MetricKind::Path(LengthMode::Weight),
        MetricKind::Path(LengthMode::InverseSqrtWeight),
        MetricKind::DegreePath,
        MetricKind::Resistance,
    ];
    out.push(sweep("metric_axioms", Hard, &gs, |&(_, g), t| {
        for kind in kinds {
            let d = match metrics::distance_table(g, kind) {
                Ok(d) => d,
                Err(e) => return t.error(|| format!("{kind}: {e}")),
            };
            let n = g.len();
            for x in 0..n {
                for y in 0..n {
                    let sym = (d[x][y] - d[y][x]).abs() - 1e-9 * d[x][y].max(1.0);
                    let ident = if (x == y) == (d[x][y] == 0.0) && d[x][y] >= 0.0 { 0.0 } else { 1.0 };
                    let tri = (0..n).map(|z| excess(d[x][z], d[x][y] + d[y][z], 1e-12)).fold(f64::MIN, f64::max);
                    t.record(sym.max(ident).max(tri), || format!("{kind} at ({}, {})", g.id(x), g.id(y)));
                }
            }
        }
    }));
    out.push(sweep("dirichlet_residual", Hard, &gs, |&(_, g), t| {
        for y in 1..g.len() {
            match metrics::dirichlet_solution(g, 0, y) {
                Ok(s) => t.record(s.residual - 1e-10, || format!("{} -> {}: residual {}", g.id(0), g.id(y), s.residual)),
                Err(e) => t.error(|| e.to_string()),
            }
        }
    }));
    out.push(sweep("degree_path_intrinsic", Hard, &gs, |&(_, g), t| {
        let ok = metrics::distance_table(g, MetricKind::DegreePath)
            .map(|d| metrics::intrinsic_metric_check(g, &d))
            .unwrap_or(false);
        t.record(if ok { 0.0 } else { 1.0 }, || "degree path metric not intrinsic".into());
    }));
    let ts = indexed(&c.trees);
    out.push(sweep("resistance_series_law", Hard, &ts, |&(_, g), t| {
        let n = g.len();
        for x in 0..n {
            for z in x + 1..n {
                let path = metrics::weighted_path_distance(g, x, z, LengthMode::Weight).unwrap().path.unwrap();
                let r = |a: usize, b: usize| metrics::resistance_metric(g, a, b).unwrap().value;
                let rxz = r(x, z).powi(2);
                for id in &path[1..path.len() - 1] {
                    let y = g.index_of(id).unwrap();
                    let sum = r(x, y).powi(2) + r(y, z).powi(2);
                    t.record((rxz - sum).abs() - 1e-9 * rxz, || format!("{} {} {}: {rxz} vs {sum}", g.id(x), id, g.id(z)));
                }
            }
        }
    }));

    let us = indexed(&c.unit_products);
    out.push(sweep("weight_fibre_geodesic", Hard, &us, |&(_, pr), t| {
        let alpha = pr.alpha_factor().unwrap();
        let p_star = warped::extrema(alpha.values(), true)[0];
        let k: Vec<usize> = (0..pr.n1()).collect();
        let h: Vec<usize> = (0..pr.n2()).collect();
        match metrics::totally_geodesic_check(pr, &k, &h, p_star, 1e-9) {
            Ok(r) => {
                let m = r.modes.iter().find(|m| m.mode == LengthMode::Weight).unwrap();
                t.record(m.fibre_deviation - 1e-9 * m.fibre_scale.max(1.0), || format!("{r:?}"));
            }
            Err(e) => t.error(|| e.to_string()),
        }
    }));
    out.push(sweep("product_resistance_claim", Experiment, &us, |&(_, pr), t| {
        for p in 0..pr.n2() {
            match metrics::product_resistance_experiment(pr, 0, 1, p) {
                Ok(r) => t.record(r.relative_deviation - 1e-9, || format!("p={}: {r:?}", pr.g2.id(p))),
                Err(e) => t.error(|| e.to_string()),
            }
        }
    }));
    for (name, mode) in [
        ("totally_geodesic_weight_mode", LengthMode::Weight),
        ("totally_geodesic_inverse_sqrt_mode", LengthMode::InverseSqrtWeight),
    ] {
        out.push(sweep(name, Experiment, &us, |&(_, pr), t| {
            let alpha = pr.alpha_factor().unwrap();
            let p_star = warped::extrema(alpha.values(), true)[0];
            let k: Vec<usize> = (0..pr.n1()).collect();
            let h: Vec<usize> = (0..pr.n2()).collect();
            match metrics::totally_geodesic_check(pr, &k, &h, p_star, 1e-9) {
                Ok(r) if r.hypothesis_holds => {
                    let m = r.modes.iter().find(|m| m.mode == mode).unwrap();
                    t.record(m.max_deviation - 1e-9, || format!("{r:?}"));
                }
                Ok(_) => {}
                Err(e) => t.error(|| e.to_string()),
            }
        }));
    }
    out
}
