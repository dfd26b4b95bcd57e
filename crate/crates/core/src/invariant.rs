//! Forward-invariant level sets of a quadratic Lyapunov function under a
//! bounded additive disturbance.
//!
//! For `ẋ = A_c x + H w` with `A_c = A - BK` and `v(x) = xᵀPx`,
//!
//! ```text
//! v̇(x, w) = 2xᵀPA_c x + 2xᵀPHw = -(x - Gw)ᵀS(x - Gw) + r(w)
//! ```
//!
//! with `S = -A_cᵀP - PA_c`, `G = S⁻¹PH` and `r(w) = wᵀGᵀSGw`. So `v̇ ≥ 0`
//! exactly on the violation ellipsoid `E(Gw, r(w)⁻¹S)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::ellipsoid::Ellipsoid;
use crate::error::{Error, Result};
use crate::inclusion::{cover, CoverResult};
use crate::linalg::{cholesky, dot, CholeskyFactor, Matrix, SymMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct DisturbedSystem {
    a: Matrix,
    b: Matrix,
    h: Matrix,
    p: SymMatrix,
    k: Matrix,
    w_vertices: Vec<Vec<f64>>,
    a_c: Matrix,
    s: SymMatrix,
    s_factor: CholeskyFactor,
    g: Matrix,
}

impl DisturbedSystem {
    pub fn new(
        a: Matrix,
        b: Matrix,
        h: Matrix,
        p: SymMatrix,
        k: Matrix,
        w_vertices: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = p.dim();
        let expect = |got: usize, expected: usize| {
            if got == expected {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected, got })
            }
        };
        expect(a.rows(), n)?;
        expect(a.cols(), n)?;
        expect(b.rows(), n)?;
        expect(k.rows(), b.cols())?;
        expect(k.cols(), n)?;
        expect(h.rows(), n)?;
        if w_vertices.is_empty() {
            return Err(Error::Empty);
        }
        for w in &w_vertices {
            expect(w.len(), h.cols())?;
            if w.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite);
            }
        }

        let a_c = a.sub(&b.matmul(&k)?)?;
        let pa = p.matrix().matmul(&a_c)?;
        let s = SymMatrix::new(pa.transpose().add(&pa)?.scaled(-1.0))?;
        let s_factor = cholesky(&s)?;
        let ph = p.matrix().matmul(&h)?;
        let mut g = Matrix::zeros(n, h.cols());
        for j in 0..h.cols() {
            let y = s_factor.solve_lower_vec(&ph.col(j))?;
            let col = s_factor.solve_upper_vec(&y)?;
            for i in 0..n {
                g[(i, j)] = col[i];
            }
        }
        Ok(Self {
            a,
            b,
            h,
            p,
            k,
            w_vertices,
            a_c,
            s,
            s_factor,
            g,
        })
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn h(&self) -> &Matrix {
        &self.h
    }

    pub fn k(&self) -> &Matrix {
        &self.k
    }

    pub fn p(&self) -> &SymMatrix {
        &self.p
    }

    pub fn closed_loop(&self) -> &Matrix {
        &self.a_c
    }

    pub fn s(&self) -> &SymMatrix {
        &self.s
    }

    pub fn s_factor(&self) -> &CholeskyFactor {
        &self.s_factor
    }

    pub fn g(&self) -> &Matrix {
        &self.g
    }

    pub fn w_vertices(&self) -> &[Vec<f64>] {
        &self.w_vertices
    }

    /// Same system with a different disturbance polytope.
    pub fn with_vertices(&self, w_vertices: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            self.a.clone(),
            self.b.clone(),
            self.h.clone(),
            self.p.clone(),
            self.k.clone(),
            w_vertices,
        )
    }

    /// `v(x) = xᵀPx`
    pub fn lyapunov(&self, x: &[f64]) -> f64 {
        self.p.quad_form(x)
    }

    /// `v̇(x, w) = 2xᵀP(A_c x + H w)`
    pub fn lyapunov_rate(&self, x: &[f64], w: &[f64]) -> Result<f64> {
        let f = self.vector_field(x, w)?;
        Ok(2.0 * dot(&self.p.matrix().matvec(x)?, &f))
    }

    /// `A_c x + H w`
    pub fn vector_field(&self, x: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        let mut f = self.a_c.matvec(x)?;
        let hw = self.h.matvec(w)?;
        f.iter_mut().zip(hw).for_each(|(f, d)| *f += d);
        Ok(f)
    }

    /// `r(w) = wᵀGᵀSGw`
    pub fn radius(&self, w: &[f64]) -> Result<f64> {
        let gw = self.g.matvec(w)?;
        Ok(self.s.quad_form(&gw))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViolationEllipsoid {
    pub ellipsoid: Ellipsoid,
    pub w: Vec<f64>,
    pub r: f64,
}

pub fn violation_ellipsoid(sys: &DisturbedSystem, w: &[f64]) -> Result<ViolationEllipsoid> {
    if w.len() != sys.h.cols() {
        return Err(Error::DimensionMismatch {
            expected: sys.h.cols(),
            got: w.len(),
        });
    }
    if w.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroDisturbance);
    }
    let center = sys.g.matvec(w)?;
    let r = sys.s.quad_form(&center);
    if !(r > 0.0) {
        return Err(Error::ZeroDisturbance);
    }
    let ellipsoid = Ellipsoid::new(center, sys.s.scaled(r.recip()))?;
    Ok(ViolationEllipsoid {
        ellipsoid,
        w: w.to_vec(),
        r,
    })
}

/// Smallest `γ` such that `{v ≤ γ}` contains every vertex violation
/// ellipsoid.
pub fn invariant_level(sys: &DisturbedSystem, tol: f64) -> Result<CoverResult> {
    let template = Ellipsoid::new(vec![0.0; sys.dim()], sys.p.clone())?;
    let regions = sys
        .w_vertices
        .iter()
        .map(|w| violation_ellipsoid(sys, w).map(|v| v.ellipsoid))
        .collect::<Result<Vec<_>>>()?;
    cover(&template, &regions, tol, true)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    pub horizon: f64,
    pub dt: f64,
    /// How long each random disturbance value is held.
    pub hold: f64,
    pub seed: u64,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            horizon: 30.0,
            dt: 1e-3,
            hold: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    pub v: f64,
    pub v_dot: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub trajectory: Vec<TrajectorySample>,
    /// Samples with `v > γ` where `v̇ > 0`.
    pub violations: usize,
    pub first_violation: Option<usize>,
}

impl SimulationReport {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Integrates `ẋ = A_c x + H w(t)` with RK4 under a piecewise-constant
/// disturbance drawn uniformly from the simplex of polytope vertices, and
/// checks `v̇(x_k, w_k) ≤ 0` at every sample with `v(x_k) > γ`.
pub fn simulate_check(
    sys: &DisturbedSystem,
    gamma: f64,
    x0: &[f64],
    opts: &SimulationOptions,
) -> Result<SimulationReport> {
    if x0.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            got: x0.len(),
        });
    }
    if !(opts.dt > 0.0) || !(opts.horizon >= 0.0) || !(opts.hold > 0.0) {
        return Err(Error::InvalidArgument(
            "dt and hold must be positive, horizon nonnegative".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let steps = (opts.horizon / opts.dt).round() as usize;
    let hold_steps = ((opts.hold / opts.dt).round() as usize).max(1);

    let mut x = x0.to_vec();
    let mut w = vec![0.0; sys.h.cols()];
    let mut trajectory = Vec::with_capacity(steps + 1);
    let mut violations = 0;
    let mut first_violation = None;
    for step in 0..=steps {
        if step % hold_steps == 0 {
            w = random_convex_combination(&sys.w_vertices, &mut rng);
        }
        let v = sys.lyapunov(&x);
        let v_dot = sys.lyapunov_rate(&x, &w)?;
        if v > gamma && v_dot > 1e-12 * v.max(1.0) {
            violations += 1;
            first_violation.get_or_insert(step);
        }
        trajectory.push(TrajectorySample {
            t: step as f64 * opts.dt,
            x: x.clone(),
            w: w.clone(),
            v,
            v_dot,
        });
        if step < steps {
            x = rk4_step(sys, &x, &w, opts.dt)?;
        }
    }
    Ok(SimulationReport {
        trajectory,
        violations,
        first_violation,
    })
}

fn random_convex_combination(vertices: &[Vec<f64>], rng: &mut impl Rng) -> Vec<f64> {
    let weights: Vec<f64> = vertices.iter().map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = weights.iter().sum();
    let mut w = vec![0.0; vertices[0].len()];
    for (vertex, weight) in vertices.iter().zip(&weights) {
        for (wi, vi) in w.iter_mut().zip(vertex) {
            *wi += weight / total * vi;
        }
    }
    w
}

fn rk4_step(sys: &DisturbedSystem, x: &[f64], w: &[f64], dt: f64) -> Result<Vec<f64>> {
    let shifted = |k: &[f64], h: f64| -> Vec<f64> { x.iter().zip(k).map(|(x, k)| x + h * k).collect() };
    let k1 = sys.vector_field(x, w)?;
    let k2 = sys.vector_field(&shifted(&k1, 0.5 * dt), w)?;
    let k3 = sys.vector_field(&shifted(&k2, 0.5 * dt), w)?;
    let k4 = sys.vector_field(&shifted(&k3, dt), w)?;
    Ok((0..x.len())
        .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}
