//! Sampling graphs from graphons.
//!
//! Vertex `i` receives a latent point `x_i ~ U[0, 1]`; for every pair `i < j`
//! an edge uniform `U_ij ~ U[0, 1]` is drawn and the edge is present in the
//! sample from `W` iff `U_ij < W(x_i, x_j)`. Sampling several graphons from the
//! same latents and edge uniforms gives the monotone coupling used by the
//! convergence experiments.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphon::StepGraphon;
use crate::rng::{self, purpose};

/// Latent positions `x_1, ..., x_n ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct LatentPoints(Vec<f64>);

impl LatentPoints {
    pub fn new(xs: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 latent points, got {}",
                xs.len()
            )));
        }
        if let Some(x) = xs.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidParameter(format!("latent point {x} outside [0, 1]")));
        }
        Ok(Self(xs))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for LatentPoints {
    type Error = Error;

    fn try_from(xs: Vec<f64>) -> Result<Self> {
        Self::new(xs)
    }
}

impl From<LatentPoints> for Vec<f64> {
    fn from(points: LatentPoints) -> Self {
        points.0
    }
}

pub fn sample_latents(n: usize, seed: u64) -> Result<LatentPoints> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2 vertices, got {n}")));
    }
    let mut rng = rng::rng_from_seed(seed);
    LatentPoints::new((0..n).map(|_| rng.random::<f64>()).collect())
}

/// Dense symmetric 0/1 matrix with zero diagonal, one bit per entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl Adjacency {
    pub fn empty(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    /// Inserts the undirected edge `{i, j}`. Self-loops are rejected.
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j || i >= self.n || j >= self.n {
            return Err(Error::InvalidParameter(format!(
                "edge ({i}, {j}) invalid for {} vertices",
                self.n
            )));
        }
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
        self.bits[j * self.words + i / 64] |= 1 << (i % 64);
        Ok(())
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.degree(i)).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.degrees().iter().sum::<usize>() / 2
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().flat_map(|(w, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                (rest != 0).then(|| {
                    let bit = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    w * 64 + bit
                })
            })
        })
    }

    /// Edges `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.neighbors(i).filter(move |&j| j > i).map(move |j| (i, j)))
    }

    pub fn to_dense(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.n, self.n), |(i, j)| if self.has_edge(i, j) { 1.0 } else { 0.0 })
    }

    /// Adjacency of the relabeled graph: vertex `v` of `self` becomes
    /// `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut out = Self::empty(self.n);
        for (i, j) in self.edges() {
            out.add_edge(perm[i], perm[j]).expect("relabeling preserves validity");
        }
        out
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }
}

/// A graph on `n ≥ 2` vertices, optionally with the latent points it was
/// sampled from.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGraph {
    pub adjacency: Adjacency,
    pub latents: Option<LatentPoints>,
}

impl SampleGraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("need n >= 2 vertices, got {n}")));
        }
        let mut adjacency = Adjacency::empty(n);
        for (i, j) in edges {
            adjacency.add_edge(i, j)?;
        }
        Ok(Self {
            adjacency,
            latents: None,
        })
    }

    pub fn n(&self) -> usize {
        self.adjacency.n()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.degrees()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.edge_count()
    }

    /// `2|E| / (n(n-1))`.
    pub fn edge_density(&self) -> f64 {
        let n = self.n() as f64;
        2.0 * self.edge_count() as f64 / (n * (n - 1.0))
    }
}

/// Samples one graph per graphon, all sharing `latents` and the edge
/// uniforms drawn from `seed`.
pub fn sample_coupled(graphons: &[&StepGraphon], latents: &LatentPoints, seed: u64) -> Vec<SampleGraph> {
    let n = latents.len();
    let blocks: Vec<Vec<usize>> = graphons
        .iter()
        .map(|w| latents.as_slice().iter().map(|&x| w.block_of(x)).collect())
        .collect();
    let mut adjacencies: Vec<Adjacency> = graphons.iter().map(|_| Adjacency::empty(n)).collect();
    let mut rng = rng::rng_from_seed(seed);
    for i in 0..n {
        for j in (i + 1)..n {
            let u: f64 = rng.random();
            for ((w, block), adj) in graphons.iter().zip(&blocks).zip(adjacencies.iter_mut()) {
                if u < w.value(block[i], block[j]) {
                    adj.add_edge(i, j).expect("i < j < n");
                }
            }
        }
    }
    adjacencies
        .into_iter()
        .map(|adjacency| SampleGraph {
            adjacency,
            latents: Some(latents.clone()),
        })
        .collect()
}

/// `G ~ W` given the latent points; edge uniforms come from `seed`.
pub fn sample_graph(w: &StepGraphon, latents: &LatentPoints, seed: u64) -> SampleGraph {
    sample_coupled(&[w], latents, seed)
        .pop()
        .expect("one graphon in, one graph out")
}

/// Latents and edges both derived from `seed`.
pub fn sample_from_seed(w: &StepGraphon, n: usize, seed: u64) -> Result<SampleGraph> {
    let latents = sample_latents(n, rng::derive_seed(seed, &[purpose::LATENTS]))?;
    Ok(sample_graph(w, &latents, rng::derive_seed(seed, &[purpose::EDGES])))
}

/// `(G⁰, G¹)` with shared latents and shared edge uniforms, so each edge is
/// present in `G^b` iff `U_ij < W_b(x_i, x_j)`. Marginally `G^b ~ W_b`, and
/// with the same seed `G^b` equals `sample_from_seed(W_b, n, seed)`.
pub fn sample_coupled_pair(
    w0: &StepGraphon,
    w1: &StepGraphon,
    n: usize,
    seed: u64,
) -> Result<(SampleGraph, SampleGraph)> {
    let latents = sample_latents(n, rng::derive_seed(seed, &[purpose::LATENTS]))?;
    let mut pair = sample_coupled(&[w0, w1], &latents, rng::derive_seed(seed, &[purpose::EDGES]));
    let g1 = pair.pop().expect("two graphs");
    let g0 = pair.pop().expect("two graphs");
    Ok((g0, g1))
}

/// Row-stochastic `Â = D⁻¹A`.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomWalkMatrix {
    entries: Array2<f64>,
}

impl RandomWalkMatrix {
    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.entries
    }
}

pub fn random_walk_matrix(g: &SampleGraph) -> Result<RandomWalkMatrix> {
    let n = g.n();
    let mut entries = Array2::zeros((n, n));
    for i in 0..n {
        let deg = g.adjacency.degree(i);
        if deg == 0 {
            return Err(Error::IsolatedVertex { vertex: i });
        }
        let weight = 1.0 / deg as f64;
        for j in g.adjacency.neighbors(i) {
            entries[[i, j]] = weight;
        }
    }
    Ok(RandomWalkMatrix { entries })
}
