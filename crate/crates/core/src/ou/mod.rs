//! Ornstein-Uhlenbeck processes `dX = M (X - μ) dt + σ₀ dW`.
//!
//! The pipeline: read off the canonical graph of a model, partition the
//! nodes for a separation query, build the Riccati coefficients of the
//! conditional-mean filter, simulate paths and compare filters.

mod filter;
mod generate;
mod partition;
mod riccati;
mod sim;
mod verify;

pub use filter::{kalman_bucy_filter, lambda_hat, FilterRun, PreparedFilter};
pub use generate::{
    example_model, generate_separated_instance, mutate_structural_zero, random_stable_system, sample_model,
    SeparatedInstance,
};
pub use partition::{
    audit_def, audit_gamma, audit_model, partition_for_query, partition_v1_v6, BlockViolation, Partition,
    M_ZERO_BLOCKS, SIGMA_ZERO_BLOCKS,
};
pub use riccati::{build_def, riccati_diff, riccati_rk4, RiccatiFlow, RiccatiSystem};
pub use sim::{euler_maruyama, Path};
pub use verify::{
    verify_global_markov, BetaReport, Mode, SimParams, VerificationReport, POSITIVE_FLOOR, POSITIVE_TOL,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, Graph, GraphClass, GraphError, NodeId};
use crate::linalg::{is_positive_definite, LinalgError, Mat, Vector};
use crate::separation::SeparationError;

/// Threshold for "nonzero" when reading a graph off a model.
pub const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OuError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("B is not μ-separated from A given C; the partition guarantees do not apply")]
    NotSeparated,
    #[error("expected {expected:?} mode, but the query is {}separated", if *separated { "" } else { "not " })]
    ModeMismatch { expected: Mode, separated: bool },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("{0}")]
    Grid(String),
}

/// JSON form: `{nodes, M, mu, sigma0 | Sigma, Gamma0_diag}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuModelSpec {
    pub nodes: Vec<String>,
    #[serde(rename = "M")]
    pub m: Vec<Vec<f64>>,
    pub mu: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Sigma", default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Gamma0_diag", default, skip_serializing_if = "Option::is_none")]
    pub gamma0_diag: Option<Vec<f64>>,
}

/// A validated model. `Σ = σ₀σ₀ᵀ` is positive definite and `Γ₀` is
/// diagonal with positive entries; `X₀ ~ N(μ, Γ₀)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OuModelSpec", into = "OuModelSpec")]
pub struct OuModel {
    labels: Vec<String>,
    m: Mat,
    mu: Vector,
    sigma0: Mat,
    sigma: Mat,
    gamma0_diag: Vector,
}

fn rows_to_mat(rows: &[Vec<f64>], what: &str) -> Result<Mat, OuError> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|row| row.len() != c) {
        return Err(OuError::InvalidModel(format!("{what} has ragged rows")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(OuError::InvalidModel(format!("{what} has non-finite entries")));
    }
    Ok(Mat::from_fn(r, c, |i, j| rows[i][j]))
}

fn mat_to_rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl OuModel {
    pub fn new(labels: Vec<String>, m: Mat, mu: Vector, sigma0: Mat, gamma0_diag: Vector) -> Result<Self, OuError> {
        let n = labels.len();
        Graph::with_nodes(&labels)?;
        if m.shape() != (n, n) {
            return Err(OuError::InvalidModel(format!("M must be {n}x{n}")));
        }
        if mu.len() != n {
            return Err(OuError::InvalidModel(format!("mu must have length {n}")));
        }
        if sigma0.nrows() != n || sigma0.ncols() == 0 {
            return Err(OuError::InvalidModel(format!("sigma0 must have {n} rows")));
        }
        if gamma0_diag.len() != n || gamma0_diag.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return Err(OuError::InvalidModel("Gamma0_diag must be positive, one entry per node".into()));
        }
        let sigma = &sigma0 * sigma0.transpose();
        if !is_positive_definite(&sigma) {
            return Err(OuError::InvalidModel("Sigma = sigma0 sigma0^T is not positive definite".into()));
        }
        Ok(OuModel { labels, m, mu, sigma0, sigma, gamma0_diag })
    }

    /// Uses the lower Cholesky factor of `Σ` as `σ₀`.
    pub fn from_sigma(labels: Vec<String>, m: Mat, mu: Vector, sigma: Mat, gamma0_diag: Vector) -> Result<Self, OuError> {
        if sigma.nrows() != sigma.ncols() || crate::linalg::asymmetry(&sigma) > 0.0 {
            return Err(OuError::InvalidModel("Sigma must be square and symmetric".into()));
        }
        let chol = sigma
            .clone()
            .cholesky()
            .ok_or_else(|| OuError::InvalidModel("Sigma is not positive definite".into()))?;
        let mut model = Self::new(labels, m, mu, chol.l(), gamma0_diag)?;
        model.sigma = sigma;
        Ok(model)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn m(&self) -> &Mat {
        &self.m
    }

    pub fn mu(&self) -> &Vector {
        &self.mu
    }

    pub fn sigma0(&self) -> &Mat {
        &self.sigma0
    }

    pub fn sigma(&self) -> &Mat {
        &self.sigma
    }

    pub fn gamma0_diag(&self) -> &Vector {
        &self.gamma0_diag
    }

    /// `a = -Mμ`.
    pub fn a(&self) -> Vector {
        -(&self.m * &self.mu)
    }

    pub fn with_m(&self, m: Mat) -> Result<Self, OuError> {
        let mut out = self.clone();
        if m.shape() != self.m.shape() {
            return Err(OuError::InvalidModel("M has the wrong shape".into()));
        }
        out.m = m;
        Ok(out)
    }

    pub fn to_spec(&self) -> OuModelSpec {
        OuModelSpec {
            nodes: self.labels.clone(),
            m: mat_to_rows(&self.m),
            mu: self.mu.iter().copied().collect(),
            sigma0: Some(mat_to_rows(&self.sigma0)),
            sigma: None,
            gamma0_diag: Some(self.gamma0_diag.iter().copied().collect()),
        }
    }
}

impl TryFrom<OuModelSpec> for OuModel {
    type Error = OuError;

    fn try_from(s: OuModelSpec) -> Result<Self, OuError> {
        let n = s.nodes.len();
        let m = rows_to_mat(&s.m, "M")?;
        let mu = Vector::from_vec(s.mu);
        let g0 = Vector::from_vec(s.gamma0_diag.unwrap_or_else(|| vec![1.0; n]));
        match (s.sigma0, s.sigma) {
            (Some(s0), None) => OuModel::new(s.nodes, m, mu, rows_to_mat(&s0, "sigma0")?, g0),
            (None, Some(sig)) => OuModel::from_sigma(s.nodes, m, mu, rows_to_mat(&sig, "Sigma")?, g0),
            _ => Err(OuError::InvalidModel("give exactly one of sigma0 and Sigma".into())),
        }
    }
}

impl From<OuModel> for OuModelSpec {
    fn from(m: OuModel) -> Self {
        m.to_spec()
    }
}

/// `α -> β` iff `|M_βα| > τ`, `α |-| β` iff `|Σ_αβ| > τ` for `α ≠ β`.
pub fn canonical_lig(model: &OuModel, tau: f64) -> Graph {
    let mut g = Graph::with_nodes(&model.labels).expect("labels were validated");
    g.set_declared(Some(GraphClass::Cdg));
    let n = model.n();
    for b in 0..n {
        for a in 0..n {
            if model.m[(b, a)].abs() > tau {
                g.insert_edge(Edge::directed(NodeId(a), NodeId(b))).expect("directed edges fit a cDG");
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if model.sigma[(a, b)].abs() > tau {
                g.insert_edge(Edge::blunt(NodeId(a), NodeId(b))).expect("blunt edges fit a cDG");
            }
        }
    }
    g
}

#[cfg(test)]
mod tests;
