//! Reproducible random pairs with a known verdict and a margin.
//!
//! Both shapes get a random orthogonal frame and log-uniform eigenvalues in
//! `[0.5, 50]`. The shape of `E` is then rescaled so its minimal scaling `γ`
//! lands in `[0.5, 0.95]` (inside) or `[1.05, 2]` (outside). Candidates that
//! some pretest would already settle are rejected, so every emitted pair
//! forces the bisection. Each pair is confirmed independently before it is
//! returned: a boundary point of norm above one for outside pairs, a
//! positive semidefinite S-procedure matrix for inside pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dualfn::DualEvalContext;
use crate::ellipsoid::{Ellipsoid, NormalizedProblem, UnitBallFrame};
use crate::error::{Error, Result};
use crate::inclusion::{maximize_dual, pretest, DEFAULT_TOL};
use crate::linalg::{cholesky, norm, Matrix, SymMatrix};
use crate::oracle::{boundary_max_norm_with, psd_cross_check, OracleOptions};

pub const EIGEN_RANGE: (f64, f64) = (0.5, 50.0);
pub const INSIDE_GAMMA: (f64, f64) = (0.5, 0.95);
pub const OUTSIDE_GAMMA: (f64, f64) = (1.05, 2.0);
const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Inside,
    Outside,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Inside => "inside",
            Label::Outside => "outside",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchCase {
    pub n: usize,
    pub case_id: usize,
    pub label: Label,
    pub gamma: f64,
    pub e: Ellipsoid,
    pub e0: Ellipsoid,
    /// Candidates discarded before this one was accepted.
    pub rejected: usize,
}

/// `cases` pairs of dimension `n`; even case ids are inside, odd are outside.
pub fn generate_cases(n: usize, cases: usize, seed: u64) -> Result<Vec<BenchCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    (0..cases)
        .map(|case_id| {
            let label = if case_id % 2 == 0 {
                Label::Inside
            } else {
                Label::Outside
            };
            generate_case(n, case_id, label, &mut rng)
        })
        .collect()
}

pub fn generate_case(n: usize, case_id: usize, label: Label, rng: &mut impl Rng) -> Result<BenchCase> {
    if n == 0 {
        return Err(Error::Empty);
    }
    let (g_lo, g_hi) = match label {
        Label::Inside => INSIDE_GAMMA,
        Label::Outside => OUTSIDE_GAMMA,
    };
    for rejected in 0..MAX_ATTEMPTS {
        let target = rng.random_range(g_lo..g_hi);
        let Some((e, e0)) = candidate(n, target, rng)? else {
            continue;
        };
        if pretest(&e, &e0)?.is_some() || !confirm(&e, &e0, label)? {
            continue;
        }
        let gamma = crate::inclusion::minimal_scaling(&e, &e0, DEFAULT_TOL)?.gamma;
        return Ok(BenchCase {
            n,
            case_id,
            label,
            gamma,
            e,
            e0,
            rejected,
        });
    }
    Err(Error::InvalidArgument(format!(
        "no acceptable {} pair of dimension {n} after {MAX_ATTEMPTS} attempts",
        label.as_str()
    )))
}

/// A pair whose normalized problem has minimal scaling `target`, or `None`
/// if the drawn center cannot reach it.
fn candidate(n: usize, target: f64, rng: &mut impl Rng) -> Result<Option<(Ellipsoid, Ellipsoid)>> {
    let c0: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let p0 = random_spd(n, rng)?;
    let e0 = Ellipsoid::new(c0, p0)?;

    let direction = random_unit(n, rng);
    let rho = (rng.random::<f64>() * target.min(1.0)).sqrt();
    let c_tilde: Vec<f64> = direction.iter().map(|d| rho * d).collect();
    let q = random_orthogonal(n, rng);
    let mut lambda: Vec<f64> = (0..n).map(|_| log_uniform(rng)).collect();
    let (q, lambda_sorted) = sort_frame(q, &mut lambda);

    let p_tilde_of = |s: f64| -> SymMatrix {
        let scaled: Vec<f64> = lambda_sorted.iter().map(|l| s * l).collect();
        reassemble(&q, &scaled)
    };
    let problem = if n == 1 {
        None
    } else {
        Some(NormalizedProblem::from_spectral(lambda_sorted.clone(), q.clone(), c_tilde.clone())?)
    };
    let s = match &problem {
        // (|c̃| + (sλ)^{-1/2})² = γ
        None => {
            let reach = target.sqrt() - c_tilde[0].abs();
            if !(reach > 0.0) {
                return Ok(None);
            }
            1.0 / (reach * reach * lambda_sorted[0])
        }
        Some(problem) => match scale_for_gamma(problem, target)? {
            Some(s) => s,
            None => return Ok(None),
        },
    };

    let frame = UnitBallFrame::new(&e0)?;
    let l0 = frame.factor().lower().clone();
    let shape = SymMatrix::symmetrized(l0.matmul(p_tilde_of(s).matrix())?.matmul(&l0.transpose())?);
    let center = frame.from_normalized(&c_tilde)?;
    if cholesky(&shape).is_err() {
        return Ok(None);
    }
    Ok(Some((Ellipsoid::new(center, shape)?, e0)))
}

/// Shape scale `s` with `γ(s) = target`, found by bisection on `log s`.
fn scale_for_gamma(problem: &NormalizedProblem, target: f64) -> Result<Option<f64>> {
    if problem.center_norm_sq() >= target {
        return Ok(None);
    }
    let gamma_at = |log_s: f64| -> Result<f64> {
        let ctx = DualEvalContext::new(problem.with_shape_scaled(log_s.exp()));
        Ok(maximize_dual(&ctx, DEFAULT_TOL)?.gamma)
    };
    let (mut lo, mut hi) = (0.0_f64, 0.0_f64);
    while gamma_at(lo)? < target {
        lo -= 1.0;
        if lo < -200.0 {
            return Ok(None);
        }
    }
    while gamma_at(hi)? > target {
        hi += 1.0;
        if hi > 200.0 {
            return Ok(None);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gamma_at(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some((0.5 * (lo + hi)).exp()))
}

fn confirm(e: &Ellipsoid, e0: &Ellipsoid, label: Label) -> Result<bool> {
    let n = e.dim();
    let opts = OracleOptions {
        samples: 2 * n,
        polished_samples: 2,
        axis_starts: Some(2),
        polish_iterations: 300,
    };
    let report = boundary_max_norm_with(e, e0, &opts)?;
    match label {
        Label::Outside => Ok(report.max_sq_norm > 1.0),
        Label::Inside => {
            if report.max_sq_norm >= 1.0 {
                return Ok(false);
            }
            let frame = UnitBallFrame::new(e0)?;
            let normalized = frame.normalized_ellipsoid(e)?;
            let ctx = DualEvalContext::new(frame.normalize(e)?);
            let beta = maximize_dual(&ctx, DEFAULT_TOL)?.beta_star;
            Ok(psd_cross_check(&normalized, beta))
        }
    }
}

fn log_uniform(rng: &mut impl Rng) -> f64 {
    let (a, b) = EIGEN_RANGE;
    rng.random_range(a.ln()..b.ln()).exp()
}

fn random_unit(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let len = norm(&z);
        if len > 1e-12 {
            return z.iter().map(|x| x / len).collect();
        }
    }
}

/// Orthonormalized Gaussian matrix (modified Gram-Schmidt, i.e. the Q of a
/// QR factorization with positive diagonal R).
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> Matrix {
    loop {
        let mut cols: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let mut ok = true;
        for j in 0..n {
            for k in 0..j {
                let proj: f64 = cols[j].iter().zip(&cols[k]).map(|(a, b)| a * b).sum();
                let basis = cols[k].clone();
                cols[j].iter_mut().zip(&basis).for_each(|(a, b)| *a -= proj * b);
            }
            let len = norm(&cols[j]);
            if len < 1e-8 {
                ok = false;
                break;
            }
            cols[j].iter_mut().for_each(|a| *a /= len);
        }
        if ok {
            let mut q = Matrix::zeros(n, n);
            for (j, col) in cols.iter().enumerate() {
                for i in 0..n {
                    q[(i, j)] = col[i];
                }
            }
            return q;
        }
    }
}

fn random_spd(n: usize, rng: &mut impl Rng) -> Result<SymMatrix> {
    let q = random_orthogonal(n, rng);
    let lambda: Vec<f64> = (0..n).map(|_| log_uniform(rng)).collect();
    let shape = reassemble(&q, &lambda);
    cholesky(&shape)?;
    Ok(shape)
}

fn sort_frame(q: Matrix, lambda: &mut [f64]) -> (Matrix, Vec<f64>) {
    let n = lambda.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lambda[a].total_cmp(&lambda[b]));
    let mut sorted_q = Matrix::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..n {
            sorted_q[(i, new)] = q[(i, old)];
        }
    }
    (sorted_q, order.iter().map(|&i| lambda[i]).collect())
}

/// `Q diag(λ) Qᵀ`
fn reassemble(q: &Matrix, lambda: &[f64]) -> SymMatrix {
    let n = lambda.len();
    let mut m = Matrix::zeros(n, n);
    for k in 0..n {
        for i in 0..n {
            let qik = q[(i, k)] * lambda[k];
            for j in 0..n {
                m[(i, j)] += qik * q[(j, k)];
            }
        }
    }
    SymMatrix::symmetrized(m)
}
