//! JSON input formats.

use ellinc::ellipsoid::Ellipsoid;
use ellinc::invariant::DisturbedSystem;
use ellinc::linalg::{Matrix, SymMatrix};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// `{"center": [...], "shape": [[...], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipsoidDoc {
    pub center: Vec<f64>,
    pub shape: Vec<Vec<f64>>,
}

/// `{"E": ..., "E0": ...}`: is `E` contained in `E0`?
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDoc {
    #[serde(rename = "E")]
    pub e: EllipsoidDoc,
    #[serde(rename = "E0")]
    pub e0: EllipsoidDoc,
}

/// A single pair or an array of pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairInput {
    One(PairDoc),
    Batch(Vec<PairDoc>),
}

impl PairInput {
    pub fn pairs(&self) -> &[PairDoc] {
        match self {
            PairInput::One(p) => std::slice::from_ref(p),
            PairInput::Batch(ps) => ps,
        }
    }

    pub fn is_batch(&self) -> bool {
        matches!(self, PairInput::Batch(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverDoc {
    pub template: EllipsoidDoc,
    pub ellipsoids: Vec<EllipsoidDoc>,
    #[serde(default = "default_true")]
    pub exploit_symmetry: bool,
}

fn default_true() -> bool {
    true
}

/// Closed loop `ẋ = (A - BK)x + Hw` with Lyapunov shape `P` and the
/// vertices `W` of the disturbance polytope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct SystemDoc {
    pub A: Vec<Vec<f64>>,
    pub B: Vec<Vec<f64>>,
    pub H: Vec<Vec<f64>>,
    pub P: Vec<Vec<f64>>,
    pub K: Vec<Vec<f64>>,
    pub W: Vec<Vec<f64>>,
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, CliError> {
    Ok(serde_json::from_str(text)?)
}

fn matrix(rows: &[Vec<f64>], what: &str) -> Result<Matrix, CliError> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(CliError::Parse(format!("{what} must be a nonempty matrix")));
    }
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(CliError::Parse(format!("{what} has rows of different lengths")));
    }
    Ok(Matrix::from_rows(rows)?)
}

impl EllipsoidDoc {
    pub fn to_ellipsoid(&self) -> Result<Ellipsoid, CliError> {
        let shape = SymMatrix::new(matrix(&self.shape, "shape")?)?;
        Ok(Ellipsoid::new(self.center.clone(), shape)?)
    }

    pub fn from_ellipsoid(e: &Ellipsoid) -> Self {
        Self {
            center: e.center().to_vec(),
            shape: e.shape().matrix().to_rows(),
        }
    }
}

impl PairDoc {
    pub fn to_pair(&self) -> Result<(Ellipsoid, Ellipsoid), CliError> {
        Ok((self.e.to_ellipsoid()?, self.e0.to_ellipsoid()?))
    }
}

impl SystemDoc {
    pub fn to_system(&self) -> Result<DisturbedSystem, CliError> {
        Ok(DisturbedSystem::new(
            matrix(&self.A, "A")?,
            matrix(&self.B, "B")?,
            matrix(&self.H, "H")?,
            SymMatrix::new(matrix(&self.P, "P")?)?,
            matrix(&self.K, "K")?,
            self.W.clone(),
        )?)
    }
}
