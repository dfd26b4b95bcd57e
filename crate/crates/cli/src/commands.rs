//! Subcommands as pure functions from input text to JSON plus exit status.

use ellinc::inclusion::{
    contact_points, contact_points_rescaled, cover, decide, minimal_scaling, InclusionVerdict, Rule,
    Verdict,
};
use ellinc::invariant::{invariant_level, simulate_check, SimulationOptions, SimulationReport};
use serde_json::{json, Value};

use crate::documents::{parse, CoverDoc, PairInput, SystemDoc};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub json: Value,
    pub code: i32,
}

impl Outcome {
    fn ok(json: Value) -> Self {
        Self { json, code: 0 }
    }
}

/// Exit status for a verdict: 0 inside, 1 outside, 2 touching within eps.
pub fn verdict_code(v: &Verdict) -> i32 {
    match v {
        Verdict::StrictlyInside => 0,
        Verdict::Outside => 1,
        Verdict::TouchingWithinEps { .. } => 2,
    }
}

/// Rounds to 15 significant digits.
pub fn sig15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

pub fn verdict_json(v: &InclusionVerdict) -> Value {
    let detail = match v.rule {
        Rule::Bisection(exit) => Value::from(exit.as_str()),
        Rule::Pretest(_) => Value::Null,
    };
    let bracket = match v.verdict {
        Verdict::TouchingWithinEps { lower, upper } => json!([lower, upper]),
        _ => v.bracket.map_or(Value::Null, |(l, u)| json!([l, u])),
    };
    json!({
        "verdict": v.verdict.as_str(),
        "iterations": v.iterations,
        "rule": v.rule.as_str(),
        "detail": detail,
        "bracket": bracket,
        "witness": v.witness,
    })
}

fn collect(input: &PairInput, items: Vec<Value>, code: i32) -> Outcome {
    let json = if input.is_batch() {
        Value::Array(items)
    } else {
        items.into_iter().next().unwrap_or(Value::Null)
    };
    Outcome { json, code }
}

pub fn check(text: &str, eps: f64) -> Result<Outcome, CliError> {
    let input: PairInput = parse(text)?;
    let mut items = Vec::new();
    let mut code = 0;
    for pair in input.pairs() {
        let (e, e0) = pair.to_pair()?;
        let v = decide(&e, &e0, eps)?;
        code = code.max(verdict_code(&v.verdict));
        items.push(verdict_json(&v));
    }
    Ok(collect(&input, items, code))
}

pub fn gamma(text: &str, tol: f64) -> Result<Outcome, CliError> {
    let input: PairInput = parse(text)?;
    let mut items = Vec::new();
    for pair in input.pairs() {
        let (e, e0) = pair.to_pair()?;
        let r = minimal_scaling(&e, &e0, tol)?;
        items.push(json!({
            "gamma": sig15(r.gamma),
            "beta_star": sig15(r.beta_star),
            "at_lower_boundary": r.at_lower_boundary,
        }));
    }
    Ok(collect(&input, items, 0))
}

pub fn contact(text: &str, tol: f64, rescale: bool) -> Result<Outcome, CliError> {
    let input: PairInput = parse(text)?;
    let mut items = Vec::new();
    for pair in input.pairs() {
        let (e, e0) = pair.to_pair()?;
        let (set, touched, gamma) = if rescale {
            let (set, sr) = contact_points_rescaled(&e, &e0, tol)?;
            (set, e0.with_shape_scaled(1.0 / sr.gamma)?, Some(sr.gamma))
        } else {
            (contact_points(&e, &e0, tol)?, e0, None)
        };
        let residuals = set
            .points
            .iter()
            .map(|p| Ok(json!({ "E": e.level(p)? - 1.0, "E0": touched.level(p)? - 1.0 })))
            .collect::<Result<Vec<_>, CliError>>()?;
        let mut item = json!({
            "points": set.points,
            "degenerate": set.degenerate,
            "nullspace_dim": set.nullspace_dim,
            "residuals": residuals,
        });
        if let Some(g) = gamma {
            item["gamma"] = json!(g);
        }
        items.push(item);
    }
    Ok(collect(&input, items, 0))
}

pub fn cover_cmd(text: &str, tol: f64) -> Result<Outcome, CliError> {
    let doc: CoverDoc = parse(text)?;
    let template = doc.template.to_ellipsoid()?;
    let ellipsoids = doc
        .ellipsoids
        .iter()
        .map(|e| e.to_ellipsoid())
        .collect::<Result<Vec<_>, _>>()?;
    let r = cover(&template, &ellipsoids, tol, doc.exploit_symmetry)?;
    Ok(Outcome::ok(json!({
        "gamma": r.gamma,
        "argmax_index": r.argmax_index,
        "per_ellipsoid_gammas": r.per_ellipsoid_gammas,
        "maximizations": r.maximizations,
    })))
}

/// Optional trajectory simulation attached to the invariant command.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRequest {
    pub x0: Vec<f64>,
    pub options: SimulationOptions,
}

pub fn invariant(
    text: &str,
    tol: f64,
    trajectory: Option<&TrajectoryRequest>,
) -> Result<(Outcome, Option<SimulationReport>), CliError> {
    let doc: SystemDoc = parse(text)?;
    let sys = doc.to_system()?;
    let r = invariant_level(&sys, tol)?;
    let mut json = json!({
        "gamma": sig15(r.gamma),
        "per_vertex_gammas": r.per_ellipsoid_gammas.iter().map(|g| sig15(*g)).collect::<Vec<_>>(),
        "maximizations": r.maximizations,
    });
    let report = match trajectory {
        Some(req) => {
            let rep = simulate_check(&sys, r.gamma, &req.x0, &req.options)?;
            json["simulation"] = json!({
                "seed": req.options.seed,
                "steps": rep.trajectory.len(),
                "violations": rep.violations,
                "holds": rep.holds(),
            });
            Some(rep)
        }
        None => None,
    };
    Ok((Outcome::ok(json), report))
}

/// `t,x1..xn,w1..wp,v,v_dot`
pub fn write_trajectory<W: std::io::Write>(out: W, rep: &SimulationReport) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(out);
    if let Some(first) = rep.trajectory.first() {
        let mut header = vec!["t".to_string()];
        header.extend((1..=first.x.len()).map(|i| format!("x{i}")));
        header.extend((1..=first.w.len()).map(|i| format!("w{i}")));
        header.extend(["v".to_string(), "v_dot".to_string()]);
        wtr.write_record(&header)?;
    }
    for s in &rep.trajectory {
        let mut row = vec![s.t.to_string()];
        row.extend(s.x.iter().map(f64::to_string));
        row.extend(s.w.iter().map(f64::to_string));
        row.extend([s.v.to_string(), s.v_dot.to_string()]);
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}
