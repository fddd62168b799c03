//! The GCN recursion `M^(l) = σ(Â · M^(l-1) · W^(l-1))`, row-averaged
//! embedding vectors and the uniform perturbation channel.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::sampling::RandomWalkMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Identity,
    Relu,
    Tanh,
    Swish,
    Selu,
}

impl ActivationKind {
    fn eval(self, x: f64) -> f64 {
        match self {
            ActivationKind::Identity => x,
            ActivationKind::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            ActivationKind::Tanh => x.tanh(),
            ActivationKind::Swish => x / (1.0 + (-x).exp()),
            // The x <= 0 branch owns zero.
            ActivationKind::Selu => {
                if x <= 0.0 {
                    x.exp_m1()
                } else {
                    x
                }
            }
        }
    }
}

/// Elementwise activation `x ↦ σ(s·x)` with input pre-scale `s` (1 by
/// default).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "ActivationDoc", into = "ActivationDoc")]
pub struct Activation {
    pub kind: ActivationKind,
    pub prescale: f64,
}

/// Numerical check of the smooth-activation conditions
/// `σ(0) = 0`, `σ'(0) = 1` and `σ' ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassCheck {
    pub value_at_zero: f64,
    /// Central difference `(σ(h) - σ(-h)) / 2h` with `h = 1e-7`.
    pub slope_at_zero: f64,
    /// Largest forward-difference slope on a grid over `[-20, 20]`.
    pub max_slope: f64,
}

impl ClassCheck {
    pub fn satisfied(&self, tolerance: f64) -> bool {
        self.value_at_zero == 0.0 && (self.slope_at_zero - 1.0).abs() <= tolerance && self.max_slope <= 1.0 + tolerance
    }
}

impl Activation {
    pub const fn new(kind: ActivationKind) -> Self {
        Self { kind, prescale: 1.0 }
    }

    pub const fn identity() -> Self {
        Self::new(ActivationKind::Identity)
    }

    pub const fn relu() -> Self {
        Self::new(ActivationKind::Relu)
    }

    pub fn with_prescale(self, prescale: f64) -> Self {
        Self { prescale, ..self }
    }

    pub fn apply(&self, x: f64) -> f64 {
        if self.prescale == 1.0 {
            self.kind.eval(x)
        } else {
            self.kind.eval(self.prescale * x)
        }
    }

    pub fn class_check(&self) -> ClassCheck {
        // SELU's second derivative jumps at 0, so the central difference
        // carries an O(h) error of h/4; h = 1e-7 keeps it below 1e-7.
        let h = 1e-7;
        let step = 1e-3;
        let max_slope = (0..40_000)
            .map(|i| {
                let x = -20.0 + i as f64 * step;
                (self.apply(x + step) - self.apply(x)) / step
            })
            .fold(f64::NEG_INFINITY, f64::max);
        ClassCheck {
            value_at_zero: self.apply(0.0),
            slope_at_zero: (self.apply(h) - self.apply(-h)) / (2.0 * h),
            max_slope,
        }
    }

    /// True when `σ(x) = x` on `[0, ∞)`, so a pipeline with nonnegative
    /// inputs never leaves the linear regime.
    pub fn is_identity_on_nonnegatives(&self) -> bool {
        self.prescale == 1.0 && matches!(self.kind, ActivationKind::Identity | ActivationKind::Relu)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ActivationDoc {
    Name(ActivationKind),
    Scaled { kind: ActivationKind, prescale: f64 },
}

impl From<ActivationDoc> for Activation {
    fn from(doc: ActivationDoc) -> Self {
        match doc {
            ActivationDoc::Name(kind) => Activation::new(kind),
            ActivationDoc::Scaled { kind, prescale } => Activation { kind, prescale },
        }
    }
}

impl From<Activation> for ActivationDoc {
    fn from(a: Activation) -> Self {
        if a.prescale == 1.0 {
            ActivationDoc::Name(a.kind)
        } else {
            ActivationDoc::Scaled {
                kind: a.kind,
                prescale: a.prescale,
            }
        }
    }
}

pub fn apply_activation(a: &Activation, x: f64) -> f64 {
    a.apply(x)
}

/// `‖M‖_{op,∞}`: the largest absolute row sum.
pub fn op_inf_norm(m: ArrayView2<'_, f64>) -> f64 {
    m.rows()
        .into_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Weight or initial-embedding matrix. `Identity` adapts to whatever
/// dimension the pipeline needs.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecMatrix {
    Identity,
    Dense(Array2<f64>),
}

impl SpecMatrix {
    /// `‖Mᵀ‖_{op,∞}`.
    pub fn transpose_norm(&self) -> f64 {
        match self {
            SpecMatrix::Identity => 1.0,
            SpecMatrix::Dense(m) => op_inf_norm(m.t()),
        }
    }

    fn is_nonnegative(&self) -> bool {
        match self {
            SpecMatrix::Identity => true,
            SpecMatrix::Dense(m) => m.iter().all(|&v| v >= 0.0),
        }
    }

    fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch(
                "matrix rows must be nonempty and of equal length".into(),
            ));
        }
        Ok(SpecMatrix::Dense(
            Array2::from_shape_vec((r, c), rows.concat()).expect("shape checked"),
        ))
    }
}

impl Serialize for SpecMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SpecMatrix::Identity => s.serialize_str("identity"),
            SpecMatrix::Dense(m) => {
                let rows: Vec<Vec<f64>> = m.rows().into_iter().map(|r| r.to_vec()).collect();
                rows.serialize(s)
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixDoc {
    Name(String),
    Rows(Vec<Vec<f64>>),
}

impl TryFrom<MatrixDoc> for SpecMatrix {
    type Error = Error;

    fn try_from(doc: MatrixDoc) -> Result<Self> {
        match doc {
            MatrixDoc::Name(name) if name == "identity" => Ok(SpecMatrix::Identity),
            MatrixDoc::Name(name) => Err(Error::Parse(format!("unknown matrix shorthand {name:?}"))),
            MatrixDoc::Rows(rows) => SpecMatrix::from_rows(rows),
        }
    }
}

impl<'de> Deserialize<'de> for SpecMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        SpecMatrix::try_from(MatrixDoc::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Constants `(C, E)` bounding the product and the sum of the transposed
/// weight norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBudget {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "E")]
    pub e: f64,
}

/// A `K`-layer GCN: initial embedding, `K` weight matrices, activation and
/// norm budget.
#[derive(Debug, Clone, PartialEq)]
pub struct GcnSpec {
    pub initial: SpecMatrix,
    pub weights: Vec<SpecMatrix>,
    pub activation: Activation,
    pub budget: NormBudget,
}

impl GcnSpec {
    /// `M^(0) = I` and `K` identity weights.
    pub fn identity(layers: usize, activation: Activation, budget: NormBudget) -> Self {
        Self {
            initial: SpecMatrix::Identity,
            weights: vec![SpecMatrix::Identity; layers],
            activation,
            budget,
        }
    }

    pub fn layers(&self) -> usize {
        self.weights.len()
    }

    fn output_dim(&self, n: usize) -> Result<usize> {
        let d = match &self.initial {
            SpecMatrix::Identity => n,
            SpecMatrix::Dense(m) if m.nrows() == n => m.ncols(),
            SpecMatrix::Dense(m) => {
                return Err(Error::DimensionMismatch(format!(
                    "initial embedding has {} rows, graph has {n} vertices",
                    m.nrows()
                )))
            }
        };
        for (j, w) in self.weights.iter().enumerate() {
            if let SpecMatrix::Dense(m) = w {
                if m.dim() != (d, d) {
                    return Err(Error::DimensionMismatch(format!(
                        "weight {j} is {:?}, expected ({d}, {d})",
                        m.dim()
                    )));
                }
            }
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub product_bound: f64,
    pub sum_bound: f64,
    pub satisfied: bool,
}

/// `‖M^(0)ᵀ‖ · ∏‖W^(j)ᵀ‖ ≤ C` and `∑‖W^(j)ᵀ‖ ≤ E`.
pub fn check_norm_budget(spec: &GcnSpec) -> NormReport {
    let norms: Vec<f64> = spec.weights.iter().map(SpecMatrix::transpose_norm).collect();
    let product_bound = spec.initial.transpose_norm() * norms.iter().product::<f64>();
    let sum_bound = norms.iter().sum();
    NormReport {
        product_bound,
        sum_bound,
        satisfied: product_bound <= spec.budget.c && sum_bound <= spec.budget.e,
    }
}

fn ensure_budget(spec: &GcnSpec) -> Result<()> {
    let report = check_norm_budget(spec);
    if report.satisfied {
        Ok(())
    } else {
        Err(Error::NormBudget {
            product: report.product_bound,
            sum: report.sum_bound,
            c: spec.budget.c,
            e: spec.budget.e,
        })
    }
}

/// One application of the recursion: `σ(Â · M · W)`.
pub fn gcn_layer(
    ahat: &RandomWalkMatrix,
    m: ArrayView2<'_, f64>,
    w: &SpecMatrix,
    activation: &Activation,
) -> Result<Array2<f64>> {
    let a = ahat.entries();
    let (rows, d) = m.dim();
    if rows != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "walk matrix is {:?} but embedding has {rows} rows",
            a.dim()
        )));
    }
    let mut out = match w {
        SpecMatrix::Identity => a.dot(&m),
        SpecMatrix::Dense(wm) => {
            if wm.dim() != (d, d) {
                return Err(Error::DimensionMismatch(format!(
                    "weight is {:?}, expected ({d}, {d})",
                    wm.dim()
                )));
            }
            if d < rows {
                a.dot(&m.dot(wm))
            } else {
                a.dot(&m).dot(wm)
            }
        }
    };
    if activation.kind != ActivationKind::Identity || activation.prescale != 1.0 {
        out.mapv_inplace(|x| activation.apply(x));
    }
    Ok(out)
}

/// `M^(K)`, starting from `M^(0)`. The norm budget is checked first.
pub fn gcn_forward(ahat: &RandomWalkMatrix, spec: &GcnSpec) -> Result<Array2<f64>> {
    ensure_budget(spec)?;
    let n = ahat.n();
    spec.output_dim(n)?;
    let mut m = match &spec.initial {
        SpecMatrix::Identity => Array2::eye(n),
        SpecMatrix::Dense(m0) => m0.clone(),
    };
    for w in &spec.weights {
        m = gcn_layer(ahat, m.view(), w, &spec.activation)?;
    }
    Ok(m)
}

/// Graph embedding `Ĥ = (1/n)·1ᵀM`, possibly perturbed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
    pub perturbed: bool,
    pub eps_res: f64,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            perturbed: false,
            eps_res: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn embedding_vector(m: ArrayView2<'_, f64>) -> EmbeddingVector {
    let n = m.nrows() as f64;
    let sums = m.sum_axis(Axis(0));
    EmbeddingVector::new(sums.iter().map(|s| s / n).collect())
}

/// Forward pass followed by row averaging.
///
/// When the activation is the identity on `[0, ∞)` and every factor is
/// entrywise nonnegative, the network is linear and
/// `Ĥ = ((1/n)·1ᵀÂ^K)·M^(0)·W^(0)⋯W^(K-1)`; this is evaluated with
/// vector-matrix products in `O(K n²)` instead of `O(K n³)`. The two routes
/// agree to rounding.
pub fn embed(ahat: &RandomWalkMatrix, spec: &GcnSpec) -> Result<EmbeddingVector> {
    let linear = spec.activation.kind == ActivationKind::Identity && spec.activation.prescale == 1.0
        || spec.activation.is_identity_on_nonnegatives()
            && spec.initial.is_nonnegative()
            && spec.weights.iter().all(SpecMatrix::is_nonnegative);
    if !linear {
        return Ok(embedding_vector(gcn_forward(ahat, spec)?.view()));
    }
    ensure_budget(spec)?;
    let n = ahat.n();
    spec.output_dim(n)?;
    let a = ahat.entries();
    let mut v = Array1::from_elem(n, 1.0 / n as f64);
    for _ in 0..spec.layers() {
        v = v.dot(a);
    }
    if let SpecMatrix::Dense(m0) = &spec.initial {
        v = v.dot(m0);
    }
    for w in &spec.weights {
        if let SpecMatrix::Dense(wm) = w {
            v = v.dot(wm);
        }
    }
    Ok(EmbeddingVector::new(v.to_vec()))
}

/// Adds independent `Uniform[-eps_res, eps_res]` noise to every entry.
pub fn perturb(h: &EmbeddingVector, eps_res: f64, seed: u64) -> Result<EmbeddingVector> {
    if h.perturbed {
        return Err(Error::AlreadyPerturbed);
    }
    if !(eps_res >= 0.0 && eps_res.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eps_res = {eps_res} must be finite and >= 0"
        )));
    }
    let mut rng = rng::rng_from_seed(seed);
    let values = h
        .values
        .iter()
        .map(|&v| v + eps_res * (2.0 * rng.random::<f64>() - 1.0))
        .collect();
    Ok(EmbeddingVector {
        values,
        perturbed: true,
        eps_res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::SbmParams;
    use crate::sampling::tests::{cycle, path3, triangle};
    use crate::sampling::{random_walk_matrix, sample_from_seed, SampleGraph};
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    const ALL: [ActivationKind; 5] = [
        ActivationKind::Identity,
        ActivationKind::Relu,
        ActivationKind::Tanh,
        ActivationKind::Swish,
        ActivationKind::Selu,
    ];

    fn budget(k: usize) -> NormBudget {
        NormBudget { c: 1.0, e: k as f64 }
    }

    fn sbm_walk(n: usize, seed: u64) -> (SampleGraph, RandomWalkMatrix) {
        let w = SbmParams::new(0.5, 0.8, 0.2, 0.5).unwrap().to_graphon().unwrap();
        let g = sample_from_seed(&w, n, seed).unwrap();
        let a = random_walk_matrix(&g).unwrap();
        (g, a)
    }

    #[test]
    fn activation_values() {
        let relu = Activation::relu();
        assert_eq!(relu.apply(-2.0), 0.0);
        assert_eq!(relu.apply(3.0), 3.0);
        for kind in ALL {
            assert_eq!(Activation::new(kind).apply(0.0), 0.0, "{kind:?}");
        }
        assert_abs_diff_eq!(Activation::new(ActivationKind::Selu).apply(-1.0), (-1.0f64).exp() - 1.0);
        assert_eq!(Activation::new(ActivationKind::Selu).apply(2.5), 2.5);
        assert_eq!(
            Activation::new(ActivationKind::Tanh).with_prescale(2.0).apply(0.3),
            0.6f64.tanh()
        );
    }

    #[test]
    fn slopes_at_zero() {
        for kind in [ActivationKind::Tanh, ActivationKind::Selu] {
            let check = Activation::new(kind).class_check();
            assert_abs_diff_eq!(check.slope_at_zero, 1.0, epsilon = 1e-6);
            assert!(check.satisfied(1e-6), "{kind:?}: {check:?}");
        }
        let selu = Activation::new(ActivationKind::Selu);
        let h = 1e-5;
        let wide = (selu.apply(h) - selu.apply(-h)) / (2.0 * h);
        assert_abs_diff_eq!(wide, 1.0 - h / 4.0, epsilon = 1e-9);

        // x/(1+e^{-x}) has slope 1/2 at the origin and peaks near 1.0998.
        let swish = Activation::new(ActivationKind::Swish).class_check();
        assert_abs_diff_eq!(swish.slope_at_zero, 0.5, epsilon = 1e-6);
        assert_abs_diff_eq!(swish.max_slope, 1.0998, epsilon = 1e-3);
        assert!(!swish.satisfied(1e-6));
    }

    #[test]
    fn activation_json() {
        let a: Activation = serde_json::from_str(r#""relu""#).unwrap();
        assert_eq!(a, Activation::relu());
        let b: Activation = serde_json::from_str(r#"{"kind": "swish", "prescale": 2.0}"#).unwrap();
        assert_eq!(b, Activation::new(ActivationKind::Swish).with_prescale(2.0));
        assert_eq!(serde_json::to_string(&b).unwrap(), r#"{"kind":"swish","prescale":2.0}"#);
    }

    #[test]
    fn op_norm_examples() {
        assert_eq!(op_inf_norm(Array2::<f64>::eye(4).view()), 1.0);
        assert_eq!(op_inf_norm(array![[1.0, -2.0], [0.0, 3.0]].view()), 3.0);
        assert_eq!(op_inf_norm(Array2::<f64>::zeros((3, 3)).view()), 0.0);
    }

    #[test]
    fn op_norm_matches_sign_vector_oracle() {
        // sup over ‖v‖∞ = 1 is attained at a sign vector.
        let m = array![[1.0, -2.0], [0.0, 3.0]];
        let mut best: f64 = 0.0;
        for signs in 0..4u32 {
            let v = array![
                if signs & 1 == 0 { 1.0 } else { -1.0 },
                if signs & 2 == 0 { 1.0 } else { -1.0 }
            ];
            best = best.max(m.dot(&v).iter().fold(0.0, |acc: f64, x: &f64| acc.max(x.abs())));
        }
        assert_eq!(best, 3.0);
    }

    #[test]
    fn layer_examples() {
        let a = random_walk_matrix(&triangle()).unwrap();
        let eye = Array2::<f64>::eye(3);
        let one = gcn_layer(&a, eye.view(), &SpecMatrix::Identity, &Activation::identity()).unwrap();
        assert_eq!(&one, a.entries());

        let relu = gcn_layer(&a, eye.view(), &SpecMatrix::Dense(eye.clone()), &Activation::relu()).unwrap();
        assert_eq!(relu, one);

        let two = gcn_layer(&a, one.view(), &SpecMatrix::Identity, &Activation::identity()).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(two[[i, i]], 0.5, epsilon = 1e-15);
        }

        let bad = Array2::<f64>::eye(2);
        assert!(gcn_layer(&a, bad.view(), &SpecMatrix::Identity, &Activation::identity()).is_err());
        assert!(gcn_layer(&a, eye.view(), &SpecMatrix::Dense(bad), &Activation::identity()).is_err());
    }

    #[test]
    fn forward_examples() {
        let a = random_walk_matrix(&path3()).unwrap();
        let spec = GcnSpec {
            initial: SpecMatrix::Dense(array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]),
            weights: vec![],
            activation: Activation::identity(),
            budget: NormBudget { c: 100.0, e: 1.0 },
        };
        assert_eq!(
            gcn_forward(&a, &spec).unwrap(),
            array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]
        );

        let mut over = GcnSpec::identity(3, Activation::identity(), NormBudget { c: 10.0, e: 2.5 });
        assert!(matches!(gcn_forward(&a, &over), Err(Error::NormBudget { .. })));
        over.budget.e = 3.0;
        assert!(gcn_forward(&a, &over).is_ok());
    }

    #[test]
    fn forward_reaches_stationarity() {
        let (g, a) = sbm_walk(150, 3);
        let m = gcn_forward(&a, &GcnSpec::identity(200, Activation::identity(), budget(200))).unwrap();
        let degrees = g.degrees();
        let two_m: usize = degrees.iter().sum();
        for row in m.rows() {
            for (v, &d) in row.iter().zip(&degrees) {
                assert_abs_diff_eq!(*v, d as f64 / two_m as f64, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn embedding_examples() {
        let eye = Array2::<f64>::eye(4);
        assert_eq!(embedding_vector(eye.view()).values, vec![0.25; 4]);
        let rows = array![[0.1, -2.0], [0.1, -2.0], [0.1, -2.0]];
        let h = embedding_vector(rows.view());
        assert_abs_diff_eq!(h.values[0], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(h.values[1], -2.0, epsilon = 1e-15);

        let a = random_walk_matrix(&triangle()).unwrap();
        let h = embed(&a, &GcnSpec::identity(1, Activation::identity(), budget(1))).unwrap();
        for v in h.values {
            assert_abs_diff_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn norm_budget_examples() {
        let k = 5;
        let report = check_norm_budget(&GcnSpec::identity(k, Activation::identity(), budget(k)));
        assert_eq!(
            (report.product_bound, report.sum_bound, report.satisfied),
            (1.0, 5.0, true)
        );

        let mut doubled = GcnSpec::identity(k, Activation::identity(), budget(k + 10));
        doubled.weights[2] = SpecMatrix::Dense(Array2::eye(3) * 2.0);
        assert!(!check_norm_budget(&doubled).satisfied);

        let m0 = array![[1.0, -3.0, 0.5], [0.0, 1.0, 1.0], [2.0, 0.0, 0.0]];
        let halves = GcnSpec {
            initial: SpecMatrix::Dense(m0.clone()),
            weights: vec![SpecMatrix::Dense(Array2::eye(3) * 0.5); k],
            activation: Activation::identity(),
            budget: NormBudget { c: 1.0, e: 10.0 },
        };
        let report = check_norm_budget(&halves);
        // ‖M0ᵀ‖ is the largest absolute column sum of M0: 4.
        assert_abs_diff_eq!(report.product_bound, 4.0 * 0.5f64.powi(5), epsilon = 1e-15);
        assert_abs_diff_eq!(report.sum_bound, 2.5, epsilon = 1e-15);
        assert!(report.satisfied);
    }

    #[test]
    fn perturbation_channel() {
        let h = EmbeddingVector::new(vec![0.25, -1.0, 3.0]);
        let same = perturb(&h, 0.0, 1).unwrap();
        assert_eq!(same.values, h.values);
        assert!(same.perturbed);
        assert!(matches!(perturb(&same, 0.1, 1), Err(Error::AlreadyPerturbed)));
        assert!(perturb(&h, -0.1, 1).is_err());

        let zeros = EmbeddingVector::new(vec![0.0; 100_000]);
        let eps = 0.02;
        let noisy = perturb(&zeros, eps, 99).unwrap();
        assert!(noisy.values.iter().all(|v| v.abs() <= eps));
        let mean_abs = noisy.values.iter().map(|v| v.abs()).sum::<f64>() / 100_000.0;
        assert!((mean_abs - eps / 2.0).abs() <= 0.01 * eps / 2.0, "{mean_abs}");
        assert_eq!(noisy, perturb(&zeros, eps, 99).unwrap());
    }

    #[test]
    fn linear_route_matches_matrix_route() {
        let (_, a) = sbm_walk(40, 17);
        let w = array_from_fn(40, |i, j| if (i + 2 * j) % 5 == 0 { 0.3 } else { 0.01 });
        let spec = GcnSpec {
            initial: SpecMatrix::Dense(array_from_fn(40, |i, j| ((i * j) % 3) as f64 * 0.1)),
            weights: vec![SpecMatrix::Dense(w.clone()), SpecMatrix::Identity, SpecMatrix::Dense(w)],
            activation: Activation::relu(),
            budget: NormBudget { c: 1e6, e: 1e6 },
        };
        let fast = embed(&a, &spec).unwrap();
        let slow = embedding_vector(gcn_forward(&a, &spec).unwrap().view());
        for (x, y) in fast.values.iter().zip(&slow.values) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-13);
        }
    }

    #[test]
    fn cycles_average_to_uniform() {
        let a = random_walk_matrix(&cycle(9)).unwrap();
        let h = embed(&a, &GcnSpec::identity(7, Activation::identity(), budget(7))).unwrap();
        for v in h.values {
            assert_abs_diff_eq!(v, 1.0 / 9.0, epsilon = 1e-15);
        }
    }

    fn array_from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Array2<f64> {
        Array2::from_shape_fn((n, n), |(i, j)| f(i, j))
    }

    proptest! {
        #[test]
        fn contraction_in_smooth_class(x in -30.0f64..30.0, y in -30.0f64..30.0) {
            for kind in [ActivationKind::Tanh, ActivationKind::Selu] {
                let a = Activation::new(kind);
                prop_assert!((a.apply(x) - a.apply(y)).abs() <= (x - y).abs() + 1e-15);
            }
            let swish = Activation::new(ActivationKind::Swish);
            prop_assert!((swish.apply(x) - swish.apply(y)).abs() <= 1.1 * (x - y).abs() + 1e-15);
        }

        #[test]
        fn op_norm_is_submultiplicative(
            a in prop::collection::vec(-5.0f64..5.0, 16),
            b in prop::collection::vec(-5.0f64..5.0, 16),
        ) {
            let a = Array2::from_shape_vec((4, 4), a).unwrap();
            let b = Array2::from_shape_vec((4, 4), b).unwrap();
            let ab = op_inf_norm(a.dot(&b).view());
            prop_assert!(ab <= op_inf_norm(a.view()) * op_inf_norm(b.view()) * (1.0 + 1e-12) + 1e-12);
        }

        #[test]
        fn identity_pipeline_is_a_matrix_power(seed in any::<u64>(), k in 0usize..12) {
            let (_, a) = sbm_walk(30, seed);
            let m = gcn_forward(&a, &GcnSpec::identity(k, Activation::relu(), budget(k))).unwrap();
            let mut power = Array2::<f64>::eye(30);
            for _ in 0..k {
                power = power.dot(a.entries());
            }
            for (x, y) in m.iter().zip(power.iter()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
