//! Ellipsoids `{x : (x - c)ᵀ P (x - c) ≤ 1}` and the change of variables that
//! maps an inclusion query `E ⊆ E0` onto `Ẽ ⊆ B(0, 1)`.

use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, norm_sq, solve_lower_triangular, sym_eig, CholeskyFactor, Matrix, SymMatrix,
};

/// Absolute slack on the quadratic form in [`Ellipsoid::contains`].
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Relative cutoff below which a rotated-center component counts as zero.
pub const SUPPORT_TOL: f64 = 1e-12;

/// Relative gap under which an eigenvalue is considered equal to the smallest one.
pub const EIGEN_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    center: Vec<f64>,
    shape: SymMatrix,
}

impl Ellipsoid {
    /// Builds an ellipsoid, checking that `shape` is positive definite and
    /// matches the center's dimension.
    pub fn new(center: Vec<f64>, shape: SymMatrix) -> Result<Self> {
        if center.len() != shape.dim() {
            return Err(Error::DimensionMismatch {
                expected: shape.dim(),
                got: center.len(),
            });
        }
        if center.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        cholesky(&shape)?;
        Ok(Self { center, shape })
    }

    /// The Euclidean unit ball in `n` dimensions.
    pub fn unit_ball(n: usize) -> Self {
        Self {
            center: vec![0.0; n],
            shape: SymMatrix::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn shape(&self) -> &SymMatrix {
        &self.shape
    }

    /// `(x - c)ᵀ P (x - c)`
    pub fn level(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        Ok(self.shape.quad_form(&d))
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.level(x)? <= 1.0 + MEMBERSHIP_TOL)
    }

    /// Same center, shape multiplied by `s` (so the semi-axes scale by `s^{-1/2}`).
    pub fn with_shape_scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.center.clone(), self.shape.scaled(s))
    }
}

/// The frame in which `E0` becomes the unit ball: `x̃ = L₀ᵀ (x - c₀)` with
/// `P₀ = L₀ L₀ᵀ`. Holding it lets many ellipsoids share one factorization.
#[derive(Debug, Clone)]
pub struct UnitBallFrame {
    center: Vec<f64>,
    factor: CholeskyFactor,
}

impl UnitBallFrame {
    pub fn new(e0: &Ellipsoid) -> Result<Self> {
        Ok(Self {
            center: e0.center.clone(),
            factor: cholesky(&e0.shape)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// `L₀ᵀ (x - c₀)`
    pub fn to_normalized(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        self.factor.tr_mul_vec(&d)
    }

    /// Inverse map `L₀⁻ᵀ x̃ + c₀`.
    pub fn from_normalized(&self, xt: &[f64]) -> Result<Vec<f64>> {
        let mut x = self.factor.solve_upper_vec(xt)?;
        for (xi, ci) in x.iter_mut().zip(&self.center) {
            *xi += ci;
        }
        Ok(x)
    }

    /// `P̃ = L₀⁻¹ P L₀⁻ᵀ` via two triangular solves.
    pub fn normalized_shape(&self, shape: &SymMatrix) -> Result<SymMatrix> {
        if shape.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: shape.dim(),
            });
        }
        let x = solve_lower_triangular(&self.factor, shape.matrix())?;
        let pt = solve_lower_triangular(&self.factor, &x.transpose())?;
        Ok(SymMatrix::symmetrized(pt))
    }

    /// The image `(c̃, P̃)` of `e` under the frame map, as an ellipsoid.
    pub fn normalized_ellipsoid(&self, e: &Ellipsoid) -> Result<Ellipsoid> {
        let shape = self.normalized_shape(&e.shape)?;
        let center = self.to_normalized(&e.center)?;
        Ok(Ellipsoid { center, shape })
    }

    /// Spectral data of `e` expressed in this frame.
    pub fn normalize(&self, e: &Ellipsoid) -> Result<NormalizedProblem> {
        let c_tilde = self.to_normalized(&e.center)?;
        let p_tilde = self.normalized_shape(&e.shape)?;
        let dec = sym_eig(&p_tilde)?;
        NormalizedProblem::from_spectral(dec.eigenvalues, dec.eigenvectors, c_tilde)
    }
}

/// Spectral data of the normalized ellipsoid `E(c̃, P̃)` against the unit ball.
///
/// With `P̃ = V D Vᵀ` and `c̄ = Vᵀ c̃`, only indices where `c̄ᵢ ≠ 0` (the
/// support) contribute to the dual function.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedProblem {
    pub c_tilde: Vec<f64>,
    pub lambda: Vec<f64>,
    pub c_bar: Vec<f64>,
    pub support: Vec<usize>,
    /// `c̄ᵢ²` for `i` in `support`, in the same order.
    pub c_bar_sq: Vec<f64>,
    /// `λᵢ` for `i` in `support`, in the same order.
    pub lambda_support: Vec<f64>,
    pub lambda_min: f64,
    /// Whether `1/λ_min` is excluded from the dual domain.
    pub lower_open: bool,
    pub eigvectors: Matrix,
}

impl NormalizedProblem {
    /// Assembles the problem from eigenpairs of `P̃` (ascending eigenvalues,
    /// eigenvectors in columns) and the normalized center `c̃`.
    pub fn from_spectral(lambda: Vec<f64>, eigvectors: Matrix, c_tilde: Vec<f64>) -> Result<Self> {
        let n = lambda.len();
        if n == 0 {
            return Err(Error::Empty);
        }
        if c_tilde.len() != n || eigvectors.rows() != n || eigvectors.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c_tilde.len(),
            });
        }
        if lambda.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument(
                "eigenvalues must be sorted ascending".into(),
            ));
        }
        if !(lambda[0] > 0.0) {
            return Err(Error::NotPositiveDefinite {
                index: 0,
                pivot: lambda[0],
            });
        }
        let c_bar = eigvectors.tr_matvec(&c_tilde)?;
        Ok(Self::assemble(lambda, eigvectors, c_tilde, c_bar))
    }

    /// A problem whose normalized shape is already diagonal (`V = I`).
    /// Entries are reordered so that `lambda` is ascending.
    pub fn diagonal(lambda: &[f64], c_tilde: &[f64]) -> Result<Self> {
        if lambda.len() != c_tilde.len() {
            return Err(Error::DimensionMismatch {
                expected: lambda.len(),
                got: c_tilde.len(),
            });
        }
        let n = lambda.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| lambda[a].total_cmp(&lambda[b]));
        let mut v = Matrix::zeros(n, n);
        for (col, &row) in order.iter().enumerate() {
            v[(row, col)] = 1.0;
        }
        let lam = order.iter().map(|&i| lambda[i]).collect();
        Self::from_spectral(lam, v, c_tilde.to_vec())
    }

    fn assemble(lambda: Vec<f64>, eigvectors: Matrix, c_tilde: Vec<f64>, c_bar: Vec<f64>) -> Self {
        let lambda_min = lambda[0];
        let cutoff = SUPPORT_TOL * (1.0 + norm_sq(&c_bar).sqrt());
        let support: Vec<usize> = (0..lambda.len())
            .filter(|&i| c_bar[i].abs() > cutoff)
            .collect();
        let c_bar_sq = support.iter().map(|&i| c_bar[i] * c_bar[i]).collect();
        let lambda_support = support.iter().map(|&i| lambda[i]).collect();
        let lower_open = support
            .iter()
            .any(|&i| lambda[i] <= lambda_min * (1.0 + EIGEN_TIE_TOL));
        Self {
            c_tilde,
            lambda,
            c_bar,
            support,
            c_bar_sq,
            lambda_support,
            lambda_min,
            lower_open,
            eigvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// `c̃ᵀ c̃`
    pub fn center_norm_sq(&self) -> f64 {
        norm_sq(&self.c_tilde)
    }

    /// Indices whose eigenvalue ties with `λ_min`.
    pub fn min_eigenspace(&self) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| self.lambda[i] <= self.lambda_min * (1.0 + EIGEN_TIE_TOL))
            .collect()
    }

    /// The problem obtained when `E0`'s shape is multiplied by `1/γ`: the
    /// normalized shape scales by `γ` and the normalized center by `γ^{-1/2}`.
    pub fn rescaled(&self, gamma: f64) -> Self {
        let s = gamma.sqrt().recip();
        let lambda = self.lambda.iter().map(|l| l * gamma).collect();
        let c_tilde = self.c_tilde.iter().map(|c| c * s).collect();
        let c_bar = self.c_bar.iter().map(|c| c * s).collect();
        Self::assemble(lambda, self.eigvectors.clone(), c_tilde, c_bar)
    }

    /// The problem for `E(c, s·P)`: eigenvalues scale by `s`, center unchanged.
    pub fn with_shape_scaled(&self, s: f64) -> Self {
        let lambda = self.lambda.iter().map(|l| l * s).collect();
        Self::assemble(
            lambda,
            self.eigvectors.clone(),
            self.c_tilde.clone(),
            self.c_bar.clone(),
        )
    }

    /// Same shape spectrum with a different normalized center.
    pub fn with_center(&self, c_tilde: Vec<f64>) -> Result<Self> {
        let c_bar = self.eigvectors.tr_matvec(&c_tilde)?;
        Ok(Self::assemble(
            self.lambda.clone(),
            self.eigvectors.clone(),
            c_tilde,
            c_bar,
        ))
    }
}

/// Normalizes `e` against `e0`: `c̃ = L₀ᵀ(c - c₀)`, `P̃ = L₀⁻¹ P L₀⁻ᵀ`, then
/// the spectral decomposition of `P̃`.
pub fn normalize(e: &Ellipsoid, e0: &Ellipsoid) -> Result<NormalizedProblem> {
    if e.dim() != e0.dim() {
        return Err(Error::DimensionMismatch {
            expected: e0.dim(),
            got: e.dim(),
        });
    }
    UnitBallFrame::new(e0)?.normalize(e)
}
