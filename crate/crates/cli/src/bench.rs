//! Timing harness over generated pairs.

use std::time::Instant;

use ellinc::generate::{generate_cases, BenchCase};
use ellinc::inclusion::{decide, InclusionVerdict};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const REPETITIONS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub n: usize,
    pub case_id: usize,
    pub verdict: String,
    pub iterations: usize,
    pub wall_time_ns: u64,
    pub rule_fired: String,
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRun {
    pub case: BenchCase,
    pub verdict: InclusionVerdict,
    pub record: BenchRecord,
}

/// Median wall time of `reps` calls to `decide`.
pub fn time_decide(case: &BenchCase, eps: f64, reps: usize) -> Result<(InclusionVerdict, u64), CliError> {
    let mut times = Vec::with_capacity(reps);
    let mut verdict = None;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let v = decide(&case.e, &case.e0, eps)?;
        times.push(start.elapsed().as_nanos() as u64);
        verdict = Some(v);
    }
    times.sort_unstable();
    let median = times[times.len() / 2];
    Ok((verdict.expect("at least one repetition"), median.max(1)))
}

pub fn run(dims: &[usize], cases: usize, seed: u64, eps: f64) -> Result<Vec<BenchRun>, CliError> {
    let mut runs = Vec::with_capacity(dims.len() * cases);
    for &n in dims {
        for case in generate_cases(n, cases, seed)? {
            let (verdict, ns) = time_decide(&case, eps, REPETITIONS)?;
            let record = BenchRecord {
                n,
                case_id: case.case_id,
                verdict: verdict.verdict.as_str().to_string(),
                iterations: verdict.iterations,
                wall_time_ns: ns,
                rule_fired: verdict.rule.as_str().to_string(),
                gamma: Some(case.gamma),
            };
            runs.push(BenchRun { case, verdict, record });
        }
    }
    Ok(runs)
}

pub fn write_csv<W: std::io::Write>(out: W, records: &[BenchRecord]) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(out);
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionSummary {
    pub n: usize,
    pub cases: usize,
    pub median_ns: u64,
    pub mean_ns: f64,
}

pub fn summarize(records: &[BenchRecord]) -> Vec<DimensionSummary> {
    let mut dims: Vec<usize> = records.iter().map(|r| r.n).collect();
    dims.dedup();
    dims.into_iter()
        .map(|n| {
            let mut times: Vec<u64> = records.iter().filter(|r| r.n == n).map(|r| r.wall_time_ns).collect();
            times.sort_unstable();
            let mean_ns = times.iter().map(|&t| t as f64).sum::<f64>() / times.len() as f64;
            DimensionSummary {
                n,
                cases: times.len(),
                median_ns: times[times.len() / 2],
                mean_ns,
            }
        })
        .collect()
}
