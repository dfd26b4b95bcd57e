//! Brute-force and closed-form baselines.
//!
//! Nothing here touches the dual function. The boundary of `E` is
//! parameterized directly as `x = c + P^{-1/2}u` with `‖u‖ = 1`, and the
//! squared norm after the `E0`-normalizing map is maximized by sampling
//! plus monotone ascent.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::ellipsoid::Ellipsoid;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, norm, norm_sq, sym_eig, Matrix, SymMatrix};

/// Smallest eigenvalue accepted as positive semidefinite by [`psd_cross_check`].
pub const PSD_TOL: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Low-discrepancy directions evaluated without refinement.
    pub samples: usize,
    /// How many of the leading low-discrepancy directions are also polished.
    pub polished_samples: usize,
    /// How many leading eigen-axes of the quadratic part seed polished starts
    /// (each with both signs). `None` uses all of them.
    pub axis_starts: Option<usize>,
    pub polish_iterations: usize,
}

impl OracleOptions {
    pub fn with_samples(samples: usize) -> Self {
        Self {
            samples,
            polished_samples: 32,
            axis_starts: None,
            polish_iterations: 500,
        }
    }
}

/// How finely the oracle searched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    pub samples: usize,
    pub polished_starts: usize,
    /// Objective gain of the last ascent step taken by the winning start.
    pub polish_gap: f64,
}

impl Resolution {
    /// Uncertainty attached to `max_sq_norm`.
    pub fn tolerance(&self, max_sq_norm: f64) -> f64 {
        self.polish_gap + 1e-12 * max_sq_norm.max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Largest `‖x̃‖²` found over `∂E`, with `x̃` the normalized coordinates.
    pub max_sq_norm: f64,
    /// The maximizing boundary point of `E`, in original coordinates.
    pub argmax_point: Vec<f64>,
    /// `argmax_point` after the normalizing map.
    pub mapped_point: Vec<f64>,
    pub resolution: Resolution,
}

/// Minimum sample count for dimension `n`: both signs of every axis.
pub fn min_samples(n: usize) -> usize {
    2 * n
}

/// Maximum of `‖L₀ᵀ(x - c₀)‖²` over the boundary of `E`.
///
/// `samples` below [`min_samples`] is raised to it.
pub fn boundary_max_norm(e: &Ellipsoid, e0: &Ellipsoid, samples: usize) -> Result<OracleReport> {
    boundary_max_norm_with(e, e0, &OracleOptions::with_samples(samples))
}

pub fn boundary_max_norm_with(
    e: &Ellipsoid,
    e0: &Ellipsoid,
    opts: &OracleOptions,
) -> Result<OracleReport> {
    let n = e.dim();
    if e0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: e0.dim(),
            got: n,
        });
    }
    let l0t = cholesky(e0.shape())?.lower().transpose();
    let p_inv_sqrt = inverse_sqrt(e.shape())?;
    let shift: Vec<f64> = e.center().iter().zip(e0.center()).map(|(c, c0)| c - c0).collect();
    let obj = Objective {
        a: l0t.matvec(&shift)?,
        m: l0t.matmul(&p_inv_sqrt)?,
    };

    let samples = opts.samples.max(min_samples(n));
    let mut best = Candidate {
        u: unit(n, 0),
        value: f64::NEG_INFINITY,
        gap: 0.0,
    };
    let mut consider = |c: Candidate| {
        if c.value > best.value {
            best = c;
        }
    };

    let mut polished = 0;
    for start in obj.deterministic_starts(opts.axis_starts)? {
        consider(obj.polish(start, opts.polish_iterations)?);
        polished += 1;
    }
    let mut halton = HaltonSphere::new(n);
    for k in 0..samples {
        let u = halton.next_direction();
        if k < opts.polished_samples {
            consider(obj.polish(u, opts.polish_iterations)?);
            polished += 1;
        } else {
            let value = obj.value(&u)?;
            consider(Candidate { u, value, gap: 0.0 });
        }
    }

    let argmax_point: Vec<f64> = p_inv_sqrt
        .matvec(&best.u)?
        .iter()
        .zip(e.center())
        .map(|(d, c)| c + d)
        .collect();
    let mapped_point = obj.image(&best.u)?;
    Ok(OracleReport {
        max_sq_norm: norm_sq(&mapped_point),
        argmax_point,
        mapped_point,
        resolution: Resolution {
            samples,
            polished_starts: polished,
            polish_gap: best.gap,
        },
    })
}

struct Candidate {
    u: Vec<f64>,
    value: f64,
    gap: f64,
}

/// `f(u) = ‖a + M u‖²` on the unit sphere.
struct Objective {
    a: Vec<f64>,
    m: Matrix,
}

impl Objective {
    fn image(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut y = self.m.matvec(u)?;
        y.iter_mut().zip(&self.a).for_each(|(y, a)| *y += a);
        Ok(y)
    }

    fn value(&self, u: &[f64]) -> Result<f64> {
        Ok(norm_sq(&self.image(u)?))
    }

    /// Both signs of the leading eigenvectors of `MᵀM`, plus the direction
    /// of `Mᵀa`.
    fn deterministic_starts(&self, axes: Option<usize>) -> Result<Vec<Vec<f64>>> {
        let n = self.a.len();
        let gram = SymMatrix::symmetrized(self.m.transpose().matmul(&self.m)?);
        let spec = sym_eig(&gram)?;
        let take = axes.unwrap_or(n).min(n);
        let mut starts = Vec::with_capacity(2 * take + 1);
        for j in (n - take..n).rev() {
            let v = spec.eigenvectors.col(j);
            starts.push(v.iter().map(|x| -x).collect());
            starts.push(v);
        }
        let pull = self.m.tr_matvec(&self.a)?;
        let len = norm(&pull);
        if len > 0.0 {
            starts.push(pull.iter().map(|x| x / len).collect());
        }
        Ok(starts)
    }

    /// Minorize-maximize ascent: `u ← normalize(Mᵀ(a + M u))`. Since `f` is
    /// convex, the linearization at `u` is a global minorant, so `f` never
    /// decreases.
    fn polish(&self, mut u: Vec<f64>, iterations: usize) -> Result<Candidate> {
        let mut y = self.image(&u)?;
        let mut value = norm_sq(&y);
        let mut gap = 0.0;
        for _ in 0..iterations {
            let g = self.m.tr_matvec(&y)?;
            let len = norm(&g);
            if len == 0.0 {
                break;
            }
            let next: Vec<f64> = g.iter().map(|x| x / len).collect();
            let y_next = self.image(&next)?;
            let v_next = norm_sq(&y_next);
            if !(v_next >= value) {
                break;
            }
            gap = v_next - value;
            u = next;
            y = y_next;
            value = v_next;
            if gap <= 1e-16 * value.max(1.0) {
                break;
            }
        }
        Ok(Candidate { u, value, gap })
    }
}

/// `V D^{-1/2} Vᵀ` for symmetric positive definite `P`.
fn inverse_sqrt(p: &SymMatrix) -> Result<Matrix> {
    let spec = sym_eig(p)?;
    let n = p.dim();
    let v = &spec.eigenvectors;
    let mut out = Matrix::zeros(n, n);
    for k in 0..n {
        let w = spec.eigenvalues[k].sqrt().recip();
        for i in 0..n {
            let vik = v[(i, k)] * w;
            for j in 0..n {
                out[(i, j)] += vik * v[(j, k)];
            }
        }
    }
    Ok(out)
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut u = vec![0.0; n];
    u[i] = 1.0;
    u
}

/// Halton points pushed through the inverse normal CDF and normalized,
/// which spreads them evenly over the sphere.
struct HaltonSphere {
    bases: Vec<u64>,
    index: u64,
    normal: Normal,
}

impl HaltonSphere {
    fn new(n: usize) -> Self {
        Self {
            bases: first_primes(n),
            index: 0,
            normal: Normal::standard(),
        }
    }

    fn next_direction(&mut self) -> Vec<f64> {
        loop {
            self.index += 1;
            let z: Vec<f64> = self
                .bases
                .iter()
                .map(|&b| self.normal.inverse_cdf(radical_inverse(self.index, b)))
                .collect();
            let len = norm(&z);
            if len > 0.0 && len.is_finite() {
                return z.iter().map(|x| x / len).collect();
            }
        }
    }
}

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut digit_weight, mut value) = (inv, 0.0);
    while index > 0 {
        value += (index % base) as f64 * digit_weight;
        index /= base;
        digit_weight *= inv;
    }
    value
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut primes: Vec<u64> = Vec::with_capacity(n);
    let mut k = 2;
    while primes.len() < n {
        if primes.iter().take_while(|&&p| p * p <= k).all(|&p| k % p != 0) {
            primes.push(k);
        }
        k += 1;
    }
    primes
}

/// Exact minimal scaling of the interval `E(c, λ)` against `[-1, 1]`:
/// `(|c| + λ^{-1/2})²`.
pub fn gamma_closed_form_1d(c: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::NonPositiveLambda(lambda));
    }
    let reach = c.abs() + lambda.sqrt().recip();
    Ok(reach * reach)
}

/// The S-procedure matrix for a normalized pair (`E0` the unit ball):
///
/// ```text
/// F(β) = [ βP̃ - I        -βP̃c̃            ]
///        [ -βc̃ᵀP̃    β(c̃ᵀP̃c̃ - 1) + 1 ]
/// ```
pub fn lmi_matrix(normalized: &Ellipsoid, beta: f64) -> SymMatrix {
    let n = normalized.dim();
    let p = normalized.shape();
    let c = normalized.center();
    let pc = p.matrix().matvec(c).expect("dimensions checked at construction");
    let mut f = Matrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            f[(i, j)] = beta * p[(i, j)];
        }
        f[(i, i)] -= 1.0;
        f[(i, n)] = -beta * pc[i];
        f[(n, i)] = -beta * pc[i];
    }
    let cpc: f64 = c.iter().zip(&pc).map(|(a, b)| a * b).sum();
    f[(n, n)] = beta * (cpc - 1.0) + 1.0;
    SymMatrix::symmetrized(f)
}

/// Whether `F(β)` is positive semidefinite (smallest eigenvalue ≥ -1e-9).
/// An eigensolver failure counts as not certified.
pub fn psd_cross_check(normalized: &Ellipsoid, beta: f64) -> bool {
    match sym_eig(&lmi_matrix(normalized, beta)) {
        Ok(spec) => spec.eigenvalues[0] >= PSD_TOL,
        Err(_) => false,
    }
}
