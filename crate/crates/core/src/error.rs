use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graphon: {0}")]
    InvalidGraphon(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex {vertex} is isolated")]
    IsolatedVertex { vertex: usize },

    #[error("graph is disconnected: {components} connected components")]
    Disconnected { components: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("norm budget violated: product {product:.6} (C = {c}), sum {sum:.6} (E = {e})")]
    NormBudget { product: f64, sum: f64, c: f64, e: f64 },

    #[error("n = {n} exceeds the exhaustive-search limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("embedding vector is already perturbed")]
    AlreadyPerturbed,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("trial {trial}: {source}")]
    Trial {
        trial: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
