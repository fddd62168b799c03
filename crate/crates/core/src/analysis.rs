//! Distances and diagnostics: ℓ∞ comparisons, cut norm and cut distance,
//! stationary distributions, coordinate-difference statistics and the
//! closed-form error lower bounds.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphon::StepGraphon;
use crate::rng::{self, purpose};
use crate::sampling::SampleGraph;

/// Largest `n` accepted by [`cut_norm_exact`].
pub const CUT_NORM_EXACT_LIMIT: usize = 14;
/// Largest `n` accepted by exact-mode cut distance (`n!` relabelings).
pub const CUT_DISTANCE_EXACT_LIMIT: usize = 8;

pub fn linf_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    Ok(u.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// `|∑_{i∈S, j∈T} M_ij| / n²` and the witness `(S, T)` that attains it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutNormResult {
    pub value: f64,
    pub witness: (Vec<usize>, Vec<usize>),
    /// Set only by exhaustive search.
    pub exact: bool,
}

/// `∑_{i∈S, j∈T} M_ij`.
pub fn cut_sum(m: ArrayView2<'_, f64>, s: &[usize], t: &[usize]) -> f64 {
    s.iter().map(|&i| t.iter().map(|&j| m[[i, j]]).sum::<f64>()).sum()
}

fn square_dim(m: ArrayView2<'_, f64>) -> Result<usize> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::DimensionMismatch(format!(
            "cut norm needs a square matrix, got {r}x{c}"
        )));
    }
    Ok(r)
}

fn finish(m: ArrayView2<'_, f64>, s: Vec<usize>, t: Vec<usize>, exact: bool) -> CutNormResult {
    let n = m.nrows().max(1) as f64;
    let value = cut_sum(m, &s, &t).abs() / (n * n);
    CutNormResult {
        value,
        witness: (s, t),
        exact,
    }
}

fn members(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Exhaustive maximum over all `4ⁿ` pairs `(S, T)`.
///
/// For a fixed row set `S` the best column set is either the columns with
/// positive sum or those with negative sum, so only the `2ⁿ` row sets are
/// enumerated explicitly.
pub fn cut_norm_exact(m: ArrayView2<'_, f64>) -> Result<CutNormResult> {
    let n = square_dim(m)?;
    if n > CUT_NORM_EXACT_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: CUT_NORM_EXACT_LIMIT,
        });
    }
    let mut best = (0.0, 0u64, 0u64);
    let mut col = vec![0.0; n];
    for s_mask in 0u64..(1 << n) {
        col.iter_mut().for_each(|c| *c = 0.0);
        for i in (0..n).filter(|&i| s_mask >> i & 1 == 1) {
            for (c, v) in col.iter_mut().zip(m.row(i)) {
                *c += v;
            }
        }
        let (mut pos, mut neg) = (0.0, 0.0);
        let (mut pos_mask, mut neg_mask) = (0u64, 0u64);
        for (j, &c) in col.iter().enumerate() {
            if c > 0.0 {
                pos += c;
                pos_mask |= 1 << j;
            } else if c < 0.0 {
                neg -= c;
                neg_mask |= 1 << j;
            }
        }
        if pos > best.0 {
            best = (pos, s_mask, pos_mask);
        }
        if neg > best.0 {
            best = (neg, s_mask, neg_mask);
        }
    }
    Ok(finish(m, members(best.1, n), members(best.2, n), true))
}

/// Alternating local search: with the row set fixed the optimal column set
/// is read off the column sums, and vice versa. Each restart starts from a
/// random row set and climbs for both signs of the cut sum.
///
/// The returned value is re-evaluated on the witness, so it is always a lower
/// bound on the cut norm.
pub fn cut_norm_heuristic(m: ArrayView2<'_, f64>, restarts: usize, seed: u64) -> Result<CutNormResult> {
    let n = square_dim(m)?;
    let mut best: Option<(f64, Vec<bool>, Vec<bool>)> = None;
    for restart in 0..restarts.max(1) {
        let mut rng = rng::derived_rng(seed, &[purpose::RESTART, restart as u64]);
        let start: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        for sign in [1.0, -1.0] {
            let (value, s, t) = climb(m, start.clone(), sign);
            if best.as_ref().is_none_or(|b| value > b.0) {
                best = Some((value, s, t));
            }
        }
    }
    let (_, s, t) = best.expect("at least one restart");
    let pick = |mask: &[bool]| mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
    Ok(finish(m, pick(&s), pick(&t), false))
}

fn climb(m: ArrayView2<'_, f64>, mut s: Vec<bool>, sign: f64) -> (f64, Vec<bool>, Vec<bool>) {
    let n = m.nrows();
    let mut value = f64::NEG_INFINITY;
    let mut t = vec![false; n];
    // Each half-step cannot decrease sign * cut_sum, so this terminates; the
    // cap only guards against floating-point cycling.
    for _ in 0..4 * n + 8 {
        let col: Vec<f64> = (0..n)
            .map(|j| (0..n).filter(|&i| s[i]).map(|i| m[[i, j]]).sum::<f64>() * sign)
            .collect();
        t = col.iter().map(|&c| c > 0.0).collect();
        let row: Vec<f64> = (0..n)
            .map(|i| (0..n).filter(|&j| t[j]).map(|j| m[[i, j]]).sum::<f64>() * sign)
            .collect();
        s = row.iter().map(|&r| r > 0.0).collect();
        let next: f64 = row.iter().filter(|&&r| r > 0.0).sum();
        if next <= value {
            break;
        }
        value = next;
    }
    (value.max(0.0), s, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutMode {
    Exact,
    Heuristic,
}

impl FromStr for CutMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(CutMode::Exact),
            "heuristic" => Ok(CutMode::Heuristic),
            other => Err(Error::Parse(format!(
                "unknown mode {other:?} (expected exact|heuristic)"
            ))),
        }
    }
}

impl fmt::Display for CutMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CutMode::Exact => "exact",
            CutMode::Heuristic => "heuristic",
        })
    }
}

/// Cut distance between two labeled matrices, minimized over relabelings of
/// the second. `permutation[i]` is the vertex of `b` aligned with vertex `i`
/// of `a`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutDistance {
    pub value: f64,
    pub permutation: Vec<usize>,
    pub exact: bool,
}

const HEURISTIC_RESTARTS: usize = 8;
const SWAP_EVALUATION_BUDGET: usize = 20_000;

fn permuted_difference(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, perm: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn(a.dim(), |(i, j)| a[[i, j]] - b[[perm[i], perm[j]]])
}

fn cut_cost(d: ArrayView2<'_, f64>, seed: u64) -> f64 {
    if d.nrows() <= CUT_NORM_EXACT_LIMIT {
        cut_norm_exact(d).expect("size checked").value
    } else {
        cut_norm_heuristic(d, HEURISTIC_RESTARTS, seed).expect("square").value
    }
}

/// Exact mode enumerates all `n!` relabelings (`n ≤ 8`). Heuristic mode
/// aligns both matrices by sorted row sums and then applies improving
/// pairwise swaps until none helps or the evaluation budget runs out; its
/// value is the cut norm under a feasible relabeling, hence an upper bound
/// on the exact distance whenever the inner cut norm is exact (`n ≤ 14`).
pub fn cut_distance_matrices(
    a: ArrayView2<'_, f64>,
    b: ArrayView2<'_, f64>,
    mode: CutMode,
    seed: u64,
) -> Result<CutDistance> {
    let n = square_dim(a)?;
    if b.dim() != a.dim() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", a.dim(), b.dim())));
    }
    match mode {
        CutMode::Exact => {
            if n > CUT_DISTANCE_EXACT_LIMIT {
                return Err(Error::TooLarge {
                    n,
                    limit: CUT_DISTANCE_EXACT_LIMIT,
                });
            }
            let mut perm: Vec<usize> = (0..n).collect();
            let mut best = (f64::INFINITY, perm.clone());
            for_each_permutation(&mut perm, &mut |p| {
                let value = cut_norm_exact(permuted_difference(a, b, p).view())
                    .expect("n <= 8")
                    .value;
                if value < best.0 {
                    best = (value, p.to_vec());
                }
            });
            Ok(CutDistance {
                value: best.0,
                permutation: best.1,
                exact: true,
            })
        }
        CutMode::Heuristic => {
            let order = |m: ArrayView2<'_, f64>| {
                let sums: Vec<f64> = m.rows().into_iter().map(|r| r.sum()).collect();
                let mut idx: Vec<usize> = (0..n).collect();
                idx.sort_by(|&x, &y| sums[x].total_cmp(&sums[y]).then(x.cmp(&y)));
                idx
            };
            let (oa, ob) = (order(a), order(b));
            let mut perm = vec![0; n];
            for (x, y) in oa.into_iter().zip(ob) {
                perm[x] = y;
            }
            let mut current = cut_cost(permuted_difference(a, b, &perm).view(), seed);
            let mut evaluations = 0;
            'outer: loop {
                let mut improved = false;
                for i in 0..n {
                    for j in (i + 1)..n {
                        if evaluations >= SWAP_EVALUATION_BUDGET {
                            break 'outer;
                        }
                        evaluations += 1;
                        perm.swap(i, j);
                        let value = cut_cost(permuted_difference(a, b, &perm).view(), seed);
                        if value < current - 1e-15 {
                            current = value;
                            improved = true;
                        } else {
                            perm.swap(i, j);
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
            Ok(CutDistance {
                value: current,
                permutation: perm,
                exact: false,
            })
        }
    }
}

/// Heap's algorithm.
fn for_each_permutation(perm: &mut [usize], visit: &mut impl FnMut(&[usize])) {
    let n = perm.len();
    let mut c = vec![0; n];
    visit(perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

pub fn cut_distance_graphs(g0: &SampleGraph, g1: &SampleGraph, mode: CutMode, seed: u64) -> Result<CutDistance> {
    if g0.n() != g1.n() {
        return Err(Error::DimensionMismatch(format!(
            "graphs have {} and {} vertices",
            g0.n(),
            g1.n()
        )));
    }
    cut_distance_matrices(
        g0.adjacency.to_dense().view(),
        g1.adjacency.to_dense().view(),
        mode,
        seed,
    )
}

/// Cut distance between a graph and `W`, with `W` replaced by its
/// `n × n` discretization at the quantile midpoints `(i + 1/2)/n`.
pub fn cut_distance_graph_graphon(g: &SampleGraph, w: &StepGraphon, mode: CutMode, seed: u64) -> Result<CutDistance> {
    let n = g.n();
    let mid = |i: usize| (i as f64 + 0.5) / n as f64;
    let discretized = Array2::from_shape_fn((n, n), |(i, j)| w.kernel(mid(i), mid(j)));
    cut_distance_matrices(g.adjacency.to_dense().view(), discretized.view(), mode, seed)
}

/// Number of connected components (breadth-first search).
pub fn connected_components(g: &SampleGraph) -> usize {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut components = 0;
    let mut queue = VecDeque::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        components += 1;
        seen[root] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            for u in g.adjacency.neighbors(v) {
                if !std::mem::replace(&mut seen[u], true) {
                    queue.push_back(u);
                }
            }
        }
    }
    components
}

/// `π_j = deg(j) / 2|E|`, the stationary law of the simple random walk.
pub fn stationary_distribution(g: &SampleGraph) -> Result<Vec<f64>> {
    let degrees = g.degrees();
    let two_m: usize = degrees.iter().sum();
    if two_m == 0 {
        return Err(Error::InvalidParameter("graph has no edges".into()));
    }
    let components = connected_components(g);
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    Ok(degrees.iter().map(|&d| d as f64 / two_m as f64).collect())
}

/// Summary of `|H0_i - H1_i|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffStats {
    pub linf: f64,
    pub median_abs: f64,
    pub frac_below: f64,
}

pub fn diff_stats(h0: &[f64], h1: &[f64], threshold: f64) -> Result<DiffStats> {
    if h0.len() != h1.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors of length {} and {}",
            h0.len(),
            h1.len()
        )));
    }
    if h0.is_empty() {
        return Err(Error::InvalidParameter("empty embedding vectors".into()));
    }
    let mut diffs: Vec<f64> = h0.iter().zip(h1).map(|(a, b)| (a - b).abs()).collect();
    diffs.sort_by(f64::total_cmp);
    let below = diffs.partition_point(|&d| d <= threshold);
    Ok(DiffStats {
        linf: *diffs.last().expect("nonempty"),
        median_abs: median_sorted(&diffs),
        frac_below: below as f64 / diffs.len() as f64,
    })
}

/// Median of an ascending slice (mean of the middle pair for even length).
pub fn median_sorted(sorted: &[f64]) -> f64 {
    let len = sorted.len();
    if len % 2 == 1 {
        sorted[len / 2]
    } else {
        0.5 * (sorted[len / 2 - 1] + sorted[len / 2])
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    median_sorted(&v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowerBound {
    pub value: f64,
    /// Preconditions failed; `value` is the trivial bound 0.
    pub vacuous: bool,
}

/// `(1 - δ/(2 ε_res n))ⁿ`, the error lower bound for `δ`-exceptional pairs.
/// Requires `δ < 2 ε_res n`; otherwise the bound is vacuous.
pub fn error_lb_delta_pos(delta: f64, eps_res: f64, n: usize) -> LowerBound {
    let vacuous = LowerBound {
        value: 0.0,
        vacuous: true,
    };
    if !(delta >= 0.0 && eps_res > 0.0) || n == 0 {
        return vacuous;
    }
    let ratio = delta / (2.0 * eps_res * n as f64);
    if ratio >= 1.0 {
        return vacuous;
    }
    LowerBound {
        value: (n as f64 * (-ratio).ln_1p()).exp(),
        vacuous: false,
    }
}

/// `exp(-c / (ε_res n))`, the error lower bound for `δ = 0` pairs with an
/// explicit constant `c`.
pub fn error_lb_delta_zero(c: f64, eps_res: f64, n: usize) -> Result<f64> {
    if !(c > 0.0 && eps_res > 0.0) || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "need c > 0, eps_res > 0, n > 0 (got c = {c}, eps_res = {eps_res}, n = {n})"
        )));
    }
    Ok((-c / (eps_res * n as f64)).exp())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let points: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}
