//! The scalar dual function of the inclusion problem and its derivatives.
//!
//! For a normalized problem with eigenvalues `λᵢ` and rotated center `c̄`:
//!
//! ```text
//! ℓ(β)   = -β - Σ c̄ᵢ² λᵢβ / (λᵢβ - 1)
//! ℓ'(β)  = -1 + Σ c̄ᵢ² λᵢ / (λᵢβ - 1)²
//! ℓ''(β) = -2 Σ c̄ᵢ² λᵢ² / (λᵢβ - 1)³
//! ```
//!
//! with sums over the support of `c̄`. `ℓ` is concave and negative on
//! `[1/λ_min, ∞)` (open at the left end when the center has a component
//! along the smallest-eigenvalue eigenspace).

use crate::ellipsoid::NormalizedProblem;
use crate::error::{Error, Result};

/// Relative distance to the pole at `1/λ_min` under which evaluation is refused
/// when the domain is open.
pub const POLE_GUARD: f64 = 1e-13;

/// Relative offset applied to `1/λ_min` when the domain is open.
pub const LOWER_NUDGE: f64 = 1e-9;

/// A normalized problem together with its search interval
/// `[1/λ_min, 1 - c̃ᵀc̃]`. The interval may be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct DualEvalContext {
    pub problem: NormalizedProblem,
    pub interval_lo: f64,
    pub interval_hi: f64,
}

/// `ℓ` and its first two derivatives at one `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualSample {
    pub beta: f64,
    pub value: f64,
    pub dvalue: f64,
    pub ddvalue: f64,
}

impl DualEvalContext {
    pub fn new(problem: NormalizedProblem) -> Self {
        let interval_lo = problem.lambda_min.recip();
        let interval_hi = 1.0 - problem.center_norm_sq();
        Self {
            problem,
            interval_lo,
            interval_hi,
        }
    }

    pub fn lower_open(&self) -> bool {
        self.problem.lower_open
    }

    pub fn support_is_empty(&self) -> bool {
        self.problem.support.is_empty()
    }

    /// True when `1 - c̃ᵀc̃ < 1/λ_min`, i.e. no `β` can certify inclusion.
    pub fn interval_is_empty(&self) -> bool {
        self.interval_hi < self.interval_lo
    }

    /// The smallest `β` at which evaluation starts: `1/λ_min`, nudged inward
    /// by [`LOWER_NUDGE`] when the domain is open.
    pub fn lower_start(&self) -> f64 {
        if self.lower_open() {
            self.interval_lo * (1.0 + LOWER_NUDGE)
        } else {
            self.interval_lo
        }
    }

    pub fn in_domain(&self, beta: f64) -> bool {
        if !beta.is_finite() || beta < self.interval_lo {
            return false;
        }
        !(self.lower_open() && beta - self.interval_lo <= POLE_GUARD * self.interval_lo)
    }

    fn check(&self, beta: f64) -> Result<()> {
        if self.in_domain(beta) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                beta,
                lower: self.interval_lo,
                open: self.lower_open(),
            })
        }
    }

    /// Evaluates `ℓ`, `ℓ'` and `ℓ''` together, sharing `λᵢβ - 1`.
    pub fn sample(&self, beta: f64) -> Result<DualSample> {
        self.check(beta)?;
        let mut value = -beta;
        let mut dvalue = -1.0;
        let mut dd = 0.0;
        for (&c2, &lam) in self.problem.c_bar_sq.iter().zip(&self.problem.lambda_support) {
            let t = lam * beta - 1.0;
            let inv = t.recip();
            let q = c2 * lam * inv;
            value -= q * beta;
            dvalue += q * inv;
            dd += q * lam * inv * inv;
        }
        Ok(DualSample {
            beta,
            value,
            dvalue,
            ddvalue: -2.0 * dd,
        })
    }

    pub fn ell(&self, beta: f64) -> Result<f64> {
        self.check(beta)?;
        let mut acc = -beta;
        for (&c2, &lam) in self.problem.c_bar_sq.iter().zip(&self.problem.lambda_support) {
            let lb = lam * beta;
            acc -= c2 * lb / (lb - 1.0);
        }
        Ok(acc)
    }

    pub fn ell_prime(&self, beta: f64) -> Result<f64> {
        self.check(beta)?;
        let mut acc = -1.0;
        for (&c2, &lam) in self.problem.c_bar_sq.iter().zip(&self.problem.lambda_support) {
            let t = lam * beta - 1.0;
            acc += c2 * lam / (t * t);
        }
        Ok(acc)
    }

    pub fn ell_second(&self, beta: f64) -> Result<f64> {
        self.check(beta)?;
        let mut acc = 0.0;
        for (&c2, &lam) in self.problem.c_bar_sq.iter().zip(&self.problem.lambda_support) {
            let t = lam * beta - 1.0;
            acc += c2 * lam * lam / (t * t * t);
        }
        Ok(-2.0 * acc)
    }
}
