//! Inclusion decisions, minimal scaling factors, contact points and covering
//! level sets.
//!
//! The decision procedure is: cheap necessary-condition tests, normalization
//! of `E0` to the unit ball, then a bisection on the dual function with two
//! certified early exits (a point where `ℓ > -1` proves strict inclusion; a
//! concavity bound below `-1` proves non-inclusion).

use std::fmt;

use crate::dualfn::{DualEvalContext, DualSample, POLE_GUARD};
use crate::ellipsoid::{normalize, Ellipsoid, NormalizedProblem, UnitBallFrame};
use crate::error::{Error, Result};
use crate::linalg::{norm_sq, SymMatrix};

/// Default bracket width at which bisection gives up and reports touching.
pub const DEFAULT_EPS: f64 = 1e-12;

/// Default stationarity tolerance for [`maximize_dual`].
pub const DEFAULT_TOL: f64 = 1e-10;

/// Slack on `λ_min(P̃) ≥ 1` in the shape pretest.
pub const SHAPE_TOL: f64 = 1e-9;

const MAX_NEWTON_ITER: usize = 500;
const MAX_DOUBLINGS: usize = 2100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    /// `E ⊂ int E0`
    StrictlyInside,
    /// `E ⊄ E0`
    Outside,
    /// Neither side could be certified before the `β` bracket shrank below `eps`.
    TouchingWithinEps { lower: f64, upper: f64 },
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::StrictlyInside => "inside",
            Verdict::Outside => "outside",
            Verdict::TouchingWithinEps { .. } => "touching_eps",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PretestRule {
    CenterOutside,
    ShapeNotDominating,
    Concentric,
    IntervalEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BisectionExit {
    EmptyInterval,
    LowerEndpoint,
    UpperEndpoint,
    UpperSlope,
    Midpoint,
    Certificate,
    Exhausted,
}

impl BisectionExit {
    pub fn as_str(&self) -> &'static str {
        match self {
            BisectionExit::EmptyInterval => "empty_interval",
            BisectionExit::LowerEndpoint => "lower_endpoint",
            BisectionExit::UpperEndpoint => "upper_endpoint",
            BisectionExit::UpperSlope => "upper_slope",
            BisectionExit::Midpoint => "midpoint",
            BisectionExit::Certificate => "certificate",
            BisectionExit::Exhausted => "exhausted",
        }
    }
}

/// Which test settled the verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Pretest(PretestRule),
    Bisection(BisectionExit),
}

impl Rule {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rule::Pretest(PretestRule::CenterOutside) => "pretest:center",
            Rule::Pretest(PretestRule::ShapeNotDominating) => "pretest:shape",
            Rule::Pretest(PretestRule::Concentric) => "pretest:concentric",
            Rule::Pretest(PretestRule::IntervalEmpty) => "pretest:interval",
            Rule::Bisection(_) => "bisection",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Bisection(exit) => write!(f, "bisection:{}", exit.as_str()),
            other => f.write_str(other.as_str()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InclusionVerdict {
    pub verdict: Verdict,
    pub rule: Rule,
    /// Number of bisection midpoints evaluated.
    pub iterations: usize,
    /// The `β` bracket `[l, u]` in force when the verdict was reached
    /// (bisection only).
    pub bracket: Option<(f64, f64)>,
    /// A `β` with `ℓ(β) > -1` (strict inclusion from the bisection only).
    pub witness: Option<f64>,
}

impl InclusionVerdict {
    fn pretest(verdict: Verdict, rule: PretestRule) -> Self {
        Self {
            verdict,
            rule: Rule::Pretest(rule),
            iterations: 0,
            bracket: None,
            witness: None,
        }
    }

    fn bisection(verdict: Verdict, exit: BisectionExit, iterations: usize, l: f64, u: f64) -> Self {
        Self {
            verdict,
            rule: Rule::Bisection(exit),
            iterations,
            bracket: Some((l, u)),
            witness: None,
        }
    }

    fn with_witness(mut self, beta: f64) -> Self {
        self.witness = Some(beta);
        self
    }
}

/// Maximizer of the dual function and the derived scaling factor `γ = -ℓ*`.
///
/// `E ⊆ E(c₀, γ⁻¹P₀)` with contact, and `E(d, γP) ⊆ E0` with contact for
/// `d = γ^{-1/2}(c - c₀) + c₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingResult {
    pub beta_star: f64,
    pub ell_star: f64,
    pub gamma: f64,
    pub at_lower_boundary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactPointSet {
    pub points: Vec<Vec<f64>>,
    pub degenerate: bool,
    pub nullspace_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverResult {
    pub gamma: f64,
    pub argmax_index: usize,
    pub per_ellipsoid_gammas: Vec<f64>,
    /// Number of dual maximizations actually run.
    pub maximizations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecideOptions {
    pub eps: f64,
    pub pretests: bool,
}

impl Default for DecideOptions {
    fn default() -> Self {
        Self {
            eps: DEFAULT_EPS,
            pretests: true,
        }
    }
}

fn check_dims(e: &Ellipsoid, e0: &Ellipsoid) -> Result<()> {
    if e.dim() != e0.dim() {
        return Err(Error::DimensionMismatch {
            expected: e0.dim(),
            got: e.dim(),
        });
    }
    Ok(())
}

/// Runs the necessary-condition tests. `None` means inconclusive.
pub fn pretest(e: &Ellipsoid, e0: &Ellipsoid) -> Result<Option<InclusionVerdict>> {
    check_dims(e, e0)?;
    if !e0.contains(e.center())? {
        return Ok(Some(InclusionVerdict::pretest(
            Verdict::Outside,
            PretestRule::CenterOutside,
        )));
    }
    let ctx = DualEvalContext::new(normalize(e, e0)?);
    Ok(pretest_normalized(&ctx))
}

/// Pretests that need the normalized spectrum, in order: shape dominance,
/// concentric sufficiency, then emptiness of the search interval.
fn pretest_normalized(ctx: &DualEvalContext) -> Option<InclusionVerdict> {
    let lam_min = ctx.problem.lambda_min;
    if lam_min < 1.0 - SHAPE_TOL {
        return Some(InclusionVerdict::pretest(
            Verdict::Outside,
            PretestRule::ShapeNotDominating,
        ));
    }
    if ctx.support_is_empty() {
        let verdict = if lam_min > 1.0 + SHAPE_TOL {
            Verdict::StrictlyInside
        } else {
            Verdict::TouchingWithinEps {
                lower: ctx.interval_lo,
                upper: ctx.interval_lo,
            }
        };
        return Some(InclusionVerdict::pretest(verdict, PretestRule::Concentric));
    }
    if ctx.interval_is_empty() {
        return Some(InclusionVerdict::pretest(
            Verdict::Outside,
            PretestRule::IntervalEmpty,
        ));
    }
    None
}

/// Decides `E ⊆ E0` with pretests enabled.
pub fn decide(e: &Ellipsoid, e0: &Ellipsoid, eps: f64) -> Result<InclusionVerdict> {
    decide_with(
        e,
        e0,
        DecideOptions {
            eps,
            pretests: true,
        },
    )
}

pub fn decide_with(e: &Ellipsoid, e0: &Ellipsoid, opts: DecideOptions) -> Result<InclusionVerdict> {
    check_dims(e, e0)?;
    if opts.pretests && !e0.contains(e.center())? {
        return Ok(InclusionVerdict::pretest(
            Verdict::Outside,
            PretestRule::CenterOutside,
        ));
    }
    let ctx = DualEvalContext::new(normalize(e, e0)?);
    if opts.pretests {
        if let Some(v) = pretest_normalized(&ctx) {
            return Ok(v);
        }
    }
    bisect(&ctx, opts.eps)
}

/// Certified bisection for `sup ℓ > -1` on `[1/λ_min, 1 - c̃ᵀc̃]`.
///
/// Exits early with `StrictlyInside` as soon as some `ℓ(β) > -1`, and with
/// `Outside` when `ℓ(β) < -1 + ℓ''(l)(u - l)²/2`, which bounds `ℓ*` from
/// above by concavity. Otherwise returns `TouchingWithinEps` once
/// `u - l ≤ eps`.
pub fn bisect(ctx: &DualEvalContext, eps: f64) -> Result<InclusionVerdict> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let u0 = ctx.interval_hi;
    if ctx.interval_is_empty() {
        return Ok(InclusionVerdict::bisection(
            Verdict::Outside,
            BisectionExit::EmptyInterval,
            0,
            ctx.interval_lo,
            u0,
        ));
    }
    let l0 = ctx.lower_start().min(u0);
    if !ctx.in_domain(l0) {
        // The whole interval sits on the pole.
        return Ok(InclusionVerdict::bisection(
            Verdict::Outside,
            BisectionExit::EmptyInterval,
            0,
            ctx.interval_lo,
            u0,
        ));
    }

    let s_lo = ctx.sample(l0)?;
    if s_lo.value > -1.0 {
        return Ok(InclusionVerdict::bisection(
            Verdict::StrictlyInside,
            BisectionExit::LowerEndpoint,
            0,
            l0,
            u0,
        )
        .with_witness(l0));
    }
    let s_hi = ctx.sample(u0)?;
    if s_hi.value > -1.0 {
        return Ok(InclusionVerdict::bisection(
            Verdict::StrictlyInside,
            BisectionExit::UpperEndpoint,
            0,
            l0,
            u0,
        )
        .with_witness(u0));
    }
    if s_hi.dvalue > 0.0 {
        return Ok(InclusionVerdict::bisection(
            Verdict::Outside,
            BisectionExit::UpperSlope,
            0,
            l0,
            u0,
        ));
    }

    let (mut l, mut u) = (l0, u0);
    let mut dd_l = s_lo.ddvalue;
    let mut k = 0;
    while u - l > eps {
        k += 1;
        let beta = 0.5 * (l + u);
        let s = ctx.sample(beta)?;
        if s.value > -1.0 {
            return Ok(InclusionVerdict::bisection(
                Verdict::StrictlyInside,
                BisectionExit::Midpoint,
                k,
                l,
                u,
            )
            .with_witness(beta));
        }
        let width = u - l;
        if s.value < -1.0 + 0.5 * dd_l * width * width {
            return Ok(InclusionVerdict::bisection(
                Verdict::Outside,
                BisectionExit::Certificate,
                k,
                l,
                u,
            ));
        }
        if s.dvalue < 0.0 {
            u = beta;
        } else if s.dvalue > 0.0 {
            l = beta;
            dd_l = s.ddvalue;
        } else if s.value < -1.0 {
            // Exact stationary point below -1.
            return Ok(InclusionVerdict::bisection(
                Verdict::Outside,
                BisectionExit::Certificate,
                k,
                beta,
                beta,
            ));
        } else {
            l = beta;
            u = beta;
        }
    }
    Ok(InclusionVerdict::bisection(
        Verdict::TouchingWithinEps { lower: l, upper: u },
        BisectionExit::Exhausted,
        k,
        l,
        u,
    ))
}

/// Maximizes `ℓ` over its whole domain `[1/λ_min, ∞)` (not capped at
/// `1 - c̃ᵀc̃`) by safeguarded Newton on `ℓ'`.
pub fn maximize_dual(ctx: &DualEvalContext, tol: f64) -> Result<ScalingResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be positive, got {tol}")));
    }
    let boundary = |s: DualSample| ScalingResult {
        beta_star: s.beta,
        ell_star: s.value,
        gamma: -s.value,
        at_lower_boundary: true,
    };
    if ctx.support_is_empty() {
        return Ok(boundary(ctx.sample(ctx.interval_lo)?));
    }

    let start = ctx.sample(ctx.lower_start())?;
    let (lo, hi) = if start.dvalue > 0.0 {
        // Grow the upper end until the slope turns negative.
        let mut lo = start;
        let mut b = (2.0 * start.beta).max(ctx.interval_hi);
        let mut hi = ctx.sample(b)?;
        let mut doublings = 0;
        while hi.dvalue > 0.0 {
            lo = hi;
            b *= 2.0;
            hi = ctx.sample(b)?;
            doublings += 1;
            if doublings > MAX_DOUBLINGS {
                return Err(Error::InvalidArgument(
                    "dual maximizer could not be bracketed".into(),
                ));
            }
        }
        (lo, hi)
    } else if ctx.lower_open() {
        // Maximum lies between the pole and the nudged start.
        let a = ctx.sample(ctx.interval_lo * (1.0 + 10.0 * POLE_GUARD))?;
        if a.dvalue <= 0.0 {
            return Ok(boundary(a));
        }
        (a, start)
    } else {
        return Ok(boundary(start));
    };

    if hi.dvalue == 0.0 {
        return Ok(interior(hi));
    }
    let s = newton_on_slope(ctx, lo, hi, tol)?;
    Ok(interior(s))
}

fn interior(s: DualSample) -> ScalingResult {
    ScalingResult {
        beta_star: s.beta,
        ell_star: s.value,
        gamma: -s.value,
        at_lower_boundary: false,
    }
}

/// Root of the decreasing function `ℓ'` inside `[lo, hi]` with `ℓ'(lo) > 0 > ℓ'(hi)`.
fn newton_on_slope(
    ctx: &DualEvalContext,
    lo: DualSample,
    hi: DualSample,
    tol: f64,
) -> Result<DualSample> {
    let (mut a, mut b) = (lo.beta, hi.beta);
    let mut x = lo;
    let mut dx_old = b - a;
    let mut dx = dx_old;
    for _ in 0..MAX_NEWTON_ITER {
        if x.dvalue.abs() <= tol || b - a <= tol {
            break;
        }
        let f = x.dvalue;
        let df = x.ddvalue;
        let out_of_bracket = ((x.beta - b) * df - f) * ((x.beta - a) * df - f) > 0.0;
        let slow = (2.0 * f).abs() > (dx_old * df).abs();
        let next = if out_of_bracket || slow || df == 0.0 {
            dx_old = dx;
            dx = 0.5 * (b - a);
            a + dx
        } else {
            dx_old = dx;
            dx = f / df;
            x.beta - dx
        };
        if next <= a || next >= b {
            // Newton step landed on the bracket edge in floating point.
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            x = ctx.sample(mid)?;
        } else {
            x = ctx.sample(next)?;
        }
        if x.dvalue > 0.0 {
            a = x.beta;
        } else if x.dvalue < 0.0 {
            b = x.beta;
        } else {
            break;
        }
    }
    Ok(x)
}

/// `γ` such that `E` touches `E(c₀, γ⁻¹P₀)` from inside.
pub fn minimal_scaling(e: &Ellipsoid, e0: &Ellipsoid, tol: f64) -> Result<ScalingResult> {
    check_dims(e, e0)?;
    maximize_dual(&DualEvalContext::new(normalize(e, e0)?), tol)
}

/// Contact points of a touching pair `E ⊆ E0`, in the original coordinates.
pub fn contact_points(e: &Ellipsoid, e0: &Ellipsoid, tol: f64) -> Result<ContactPointSet> {
    check_dims(e, e0)?;
    let frame = UnitBallFrame::new(e0)?;
    let ctx = DualEvalContext::new(frame.normalize(e)?);
    let sr = maximize_dual(&ctx, tol)?;
    let gap = (sr.ell_star + 1.0).abs();
    if gap > tol {
        return Err(Error::NotTouching { gap, tol });
    }
    let local = contact_points_normalized(&ctx.problem, &sr, tol)?;
    map_back(&frame, local, 1.0)
}

/// Rescales `E0` to `E(c₀, γ⁻¹P₀)` first, then returns the contact points
/// of `E` with it along with the scaling used.
pub fn contact_points_rescaled(
    e: &Ellipsoid,
    e0: &Ellipsoid,
    tol: f64,
) -> Result<(ContactPointSet, ScalingResult)> {
    check_dims(e, e0)?;
    let frame = UnitBallFrame::new(e0)?;
    let problem = frame.normalize(e)?;
    let sr = maximize_dual(&DualEvalContext::new(problem.clone()), tol)?;
    let ctx = DualEvalContext::new(problem.rescaled(sr.gamma));
    let scaled = maximize_dual(&ctx, tol)?;
    let local = contact_points_normalized(&ctx.problem, &scaled, tol)?;
    // The rescaled frame is L₀/√γ, so its inverse map carries an extra √γ.
    Ok((map_back(&frame, local, sr.gamma.sqrt())?, sr))
}

fn map_back(frame: &UnitBallFrame, mut set: ContactPointSet, factor: f64) -> Result<ContactPointSet> {
    for p in set.points.iter_mut() {
        let scaled: Vec<f64> = p.iter().map(|v| v * factor).collect();
        *p = frame.from_normalized(&scaled)?;
    }
    Ok(set)
}

/// Contact points of a touching normalized problem against the unit ball.
///
/// `x̄ = (β*P̃ - I)⁺ β*P̃ c̃ + N v`, where `N` spans the eigenspace of `λ_min`
/// when `β* = 1/λ_min`. In the degenerate case `v = α v₀` for one basis
/// vector `v₀` and `α` solves `‖x̄‖² = 1`.
pub fn contact_points_normalized(
    problem: &NormalizedProblem,
    scaling: &ScalingResult,
    tol: f64,
) -> Result<ContactPointSet> {
    let n = problem.dim();
    let beta = scaling.beta_star;
    let block = if scaling.at_lower_boundary {
        problem.min_eigenspace()
    } else {
        Vec::new()
    };
    let mut y = vec![0.0; n];
    for i in 0..n {
        if block.contains(&i) {
            continue;
        }
        let bl = beta * problem.lambda[i];
        y[i] = bl * problem.c_bar[i] / (bl - 1.0);
    }
    let particular = problem.eigvectors.matvec(&y)?;
    if block.is_empty() {
        return Ok(ContactPointSet {
            points: vec![particular],
            degenerate: false,
            nullspace_dim: 0,
        });
    }

    let v0 = problem.eigvectors.col(block[0]);
    let disc = 1.0 - norm_sq(&particular);
    if disc < -tol {
        return Err(Error::NoRealRoot { discriminant: disc });
    }
    let points = if disc <= 0.0 {
        vec![particular]
    } else {
        let alpha = disc.sqrt();
        [alpha, -alpha]
            .iter()
            .map(|a| particular.iter().zip(&v0).map(|(p, v)| p + a * v).collect())
            .collect()
    };
    Ok(ContactPointSet {
        points,
        degenerate: true,
        nullspace_dim: block.len(),
    })
}

fn scalar_multiple(a: &SymMatrix, b: &SymMatrix) -> Option<f64> {
    let n = a.dim();
    if b.dim() != n {
        return None;
    }
    let tr_a: f64 = (0..n).map(|i| a[(i, i)]).sum();
    let tr_b: f64 = (0..n).map(|i| b[(i, i)]).sum();
    let s = tr_a / tr_b;
    if !(s > 0.0) || !s.is_finite() {
        return None;
    }
    let scale = a.matrix().max_abs();
    let diff = a.matrix().sub(&b.matrix().scaled(s)).ok()?.max_abs();
    (diff <= 1e-12 * scale).then_some(s)
}

fn is_mirror(a: &Ellipsoid, b: &Ellipsoid, c0: &[f64]) -> bool {
    let mut off = 0.0;
    let mut size = 0.0;
    for i in 0..c0.len() {
        let da = a.center()[i] - c0[i];
        let db = b.center()[i] - c0[i];
        off += (da + db) * (da + db);
        size += da * da;
    }
    off.sqrt() <= 1e-12 * (1.0 + size.sqrt())
        && matches!(scalar_multiple(a.shape(), b.shape()), Some(s) if (s - 1.0).abs() <= 1e-12)
}

/// Smallest `γ` with every ellipsoid inside `E(c₀, γ⁻¹P₀)` for the template
/// `E(c₀, P₀)`.
///
/// The template is factored once. Shapes that are positive multiples of an
/// already decomposed shape reuse its spectrum, and with `exploit_symmetry`
/// an ellipsoid that mirrors an earlier one through `c₀` reuses its `γ`.
pub fn cover(
    template: &Ellipsoid,
    ellipsoids: &[Ellipsoid],
    tol: f64,
    exploit_symmetry: bool,
) -> Result<CoverResult> {
    if ellipsoids.is_empty() {
        return Err(Error::Empty);
    }
    for e in ellipsoids {
        check_dims(e, template)?;
    }
    let frame = UnitBallFrame::new(template)?;
    let mut spectra: Vec<(usize, NormalizedProblem)> = Vec::new();
    let mut gammas = Vec::with_capacity(ellipsoids.len());
    let mut maximizations = 0;

    for (i, e) in ellipsoids.iter().enumerate() {
        if exploit_symmetry {
            let mirror = (0..i).find(|&j| is_mirror(e, &ellipsoids[j], template.center()));
            if let Some(j) = mirror {
                gammas.push(gammas[j]);
                continue;
            }
        }
        let reused = spectra.iter().find_map(|(k, prob)| {
            scalar_multiple(e.shape(), ellipsoids[*k].shape()).map(|s| (s, prob))
        });
        let problem = match reused {
            Some((s, prob)) => prob
                .with_shape_scaled(s)
                .with_center(frame.to_normalized(e.center())?)?,
            None => {
                let prob = frame.normalize(e)?;
                spectra.push((i, prob.clone()));
                prob
            }
        };
        let sr = maximize_dual(&DualEvalContext::new(problem), tol)?;
        maximizations += 1;
        gammas.push(sr.gamma);
    }

    let (argmax_index, gamma) = gammas
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, g)| if g > best.1 { (i, g) } else { best });
    Ok(CoverResult {
        gamma,
        argmax_index,
        per_ellipsoid_gammas: gammas,
        maximizations,
    })
}
