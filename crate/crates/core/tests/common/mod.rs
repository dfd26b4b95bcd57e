#![allow(dead_code)]

use ellinc::ellipsoid::{Ellipsoid, UnitBallFrame};
use ellinc::generate::random_orthogonal;
use ellinc::linalg::{Matrix, SymMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo.ln()..hi.ln()).exp()
}

/// `Q diag(λ) Qᵀ` for a random orthogonal `Q`.
pub fn with_spectrum(lambda: &[f64], rng: &mut impl Rng) -> SymMatrix {
    let n = lambda.len();
    let q = random_orthogonal(n, rng);
    let d = Matrix::from_diag(lambda);
    let m = q.matmul(&d).unwrap().matmul(&q.transpose()).unwrap();
    symmetric(m)
}

pub fn symmetric(m: Matrix) -> SymMatrix {
    let t = m.transpose();
    SymMatrix::new(m.add(&t).unwrap().scaled(0.5)).unwrap()
}

pub fn random_spd(n: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> SymMatrix {
    let lambda: Vec<f64> = (0..n).map(|_| log_uniform(rng, lo, hi)).collect();
    with_spectrum(&lambda, rng)
}

pub fn normal_vec(n: usize, scale: f64, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

pub fn random_unit(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let z = normal_vec(n, 1.0, rng);
    let len = z.iter().map(|x| x * x).sum::<f64>().sqrt();
    z.iter().map(|x| x / len).collect()
}

pub fn random_e0(n: usize, rng: &mut impl Rng) -> Ellipsoid {
    Ellipsoid::new(normal_vec(n, 1.0, rng), random_spd(n, 0.3, 5.0, rng)).unwrap()
}

/// Pulls a pair given in the unit-ball frame of `e0` back to original
/// coordinates: `c = c₀ + L₀⁻ᵀc̃`, `P = L₀ P̃ L₀ᵀ`.
pub fn from_normalized(e0: &Ellipsoid, c_tilde: &[f64], p_tilde: &SymMatrix) -> Ellipsoid {
    let frame = UnitBallFrame::new(e0).unwrap();
    let l0 = frame.factor().lower();
    let p = l0.matmul(p_tilde.matrix()).unwrap().matmul(&l0.transpose()).unwrap();
    Ellipsoid::new(frame.from_normalized(c_tilde).unwrap(), symmetric(p)).unwrap()
}

/// A pair whose normalized center has norm in `[0, 1.2]` and whose
/// normalized shape has eigenvalues in `[0.8, 40]`, so every verdict and
/// every pretest shows up.
pub fn random_pair(n: usize, rng: &mut impl Rng) -> (Ellipsoid, Ellipsoid) {
    let e0 = random_e0(n, rng);
    let radius = rng.random_range(0.0..1.2);
    let c_tilde: Vec<f64> = random_unit(n, rng).iter().map(|x| radius * x).collect();
    let p_tilde = random_spd(n, 0.8, 40.0, rng);
    (from_normalized(&e0, &c_tilde, &p_tilde), e0)
}

/// A pair with the center of `E` inside `E0` and `E` not too flat, the
/// typical input for scaling and contact computations.
pub fn random_scaling_pair(n: usize, rng: &mut impl Rng) -> (Ellipsoid, Ellipsoid) {
    let e0 = random_e0(n, rng);
    let radius = rng.random_range(0.0..0.9);
    let c_tilde: Vec<f64> = random_unit(n, rng).iter().map(|x| radius * x).collect();
    let p_tilde = random_spd(n, 0.5, 50.0, rng);
    (from_normalized(&e0, &c_tilde, &p_tilde), e0)
}

pub fn diag(c: &[f64], d: &[f64]) -> Ellipsoid {
    Ellipsoid::new(c.to_vec(), SymMatrix::from_diag(d)).unwrap()
}

/// A touching pair whose dual maximum sits on the closed lower end of the
/// domain: the normalized center is orthogonal to the `λ_min` eigenspace
/// and small enough that `ℓ'(1/λ_min) ≤ 0`. Returns `E` and the rescaled
/// `E0` it touches.
pub fn degenerate_touching_pair(n: usize, rng: &mut impl Rng) -> (Ellipsoid, Ellipsoid) {
    assert!(n >= 2);
    let block = if n > 2 && rng.random_bool(0.5) { 2 } else { 1 };
    let lam_min = rng.random_range(1.0..3.0);
    let lambda: Vec<f64> = (0..n)
        .map(|i| if i < block { lam_min } else { lam_min * rng.random_range(2.5..20.0) })
        .collect();
    let mut c_bar: Vec<f64> = (0..n)
        .map(|i| if i < block { 0.0 } else { rng.sample::<f64, _>(StandardNormal) })
        .collect();
    let slope: f64 = (block..n)
        .map(|i| c_bar[i] * c_bar[i] * lambda[i] / (lambda[i] / lam_min - 1.0).powi(2))
        .sum();
    let shrink = (rng.random_range(0.05..0.9) / slope).sqrt();
    c_bar.iter_mut().for_each(|c| *c *= shrink);

    let v = random_orthogonal(n, rng);
    let p_tilde = symmetric(
        v.matmul(&Matrix::from_diag(&lambda)).unwrap().matmul(&v.transpose()).unwrap(),
    );
    let c_tilde = v.matvec(&c_bar).unwrap();
    let e0 = random_e0(n, rng);
    let e = from_normalized(&e0, &c_tilde, &p_tilde);
    let gamma = ellinc::inclusion::minimal_scaling(&e, &e0, 1e-12).unwrap().gamma;
    (e, e0.with_shape_scaled(1.0 / gamma).unwrap())
}
