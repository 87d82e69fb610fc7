//! Generator x method x seed sweeps.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::Result;
use crate::generators::generate;
use crate::methods::{run_method, Method, MethodOptions};
use crate::report::{fmt_db, fmt_rewrap, fmt_ssim, measure, Metrics};
use crate::scenario::Scenario;

/// Outcome of one (cell, method, seed) run.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub method: Method,
    pub seed: u64,
    pub metrics: std::result::Result<Metrics, String>,
    pub wall_ms: u128,
}

fn run_one(scenario: &Scenario, cell: usize, method: Method, seed: u64) -> RunResult {
    let start = Instant::now();
    let params = scenario.cells()[cell].1;
    let metrics = (|| -> Result<Metrics> {
        let (truth, wrapped) = generate(scenario.generator, &params, seed)?;
        let opts = MethodOptions { seed, ..scenario.options };
        let (est, _) = run_method(method, &wrapped, &opts)?;
        measure(&est, &truth, Some(&wrapped))
    })()
    .map_err(|e| e.to_string());
    RunResult {
        method,
        seed,
        metrics,
        wall_ms: start.elapsed().as_millis(),
    }
}

/// Runs every combination on the current rayon pool; results come back in
/// scenario order.
pub fn run_scenario(scenario: &Scenario) -> Vec<RunResult> {
    let mut jobs = Vec::new();
    for cell in 0..scenario.cells().len() {
        for &method in &scenario.methods {
            for &seed in &scenario.seeds {
                jobs.push((cell, method, seed));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(cell, method, seed)| run_one(scenario, cell, method, seed))
        .collect()
}

/// One row per (sweep value, method) with means over seeds.
pub fn table(scenario: &Scenario, results: &[RunResult], timing: bool) -> String {
    let mut out = format!(
        "scenario,{},method,rsnr_mean,ssim_mean,rewrap_error_max,rsnr_per_seed",
        scenario.sweep_param()
    );
    if timing {
        out.push_str(",wall_ms");
    }
    out.push('\n');
    let cells = scenario.cells();
    let per_row = scenario.seeds.len();
    for (chunk, rows) in results.chunks(per_row).enumerate() {
        let (label, _) = &cells[chunk / scenario.methods.len()];
        let method = rows[0].method;
        let ok: Vec<&Metrics> = rows.iter().filter_map(|r| r.metrics.as_ref().ok()).collect();
        let failed = ok.len() < rows.len();
        let n = ok.len() as f64;
        let (rsnr, ssim, rewrap) = if failed {
            ("error".to_string(), "error".to_string(), "error".to_string())
        } else {
            let rsnr = ok.iter().map(|m| m.rsnr_db).sum::<f64>() / n;
            let ssim = ok.iter().map(|m| m.ssim).sum::<Option<f64>>().map(|s| s / n);
            let rewrap = ok.iter().filter_map(|m| m.rewrap).fold(0.0, f64::max);
            (fmt_db(rsnr), fmt_ssim(ssim), fmt_rewrap(rewrap))
        };
        let per_seed = rows
            .iter()
            .map(|r| match &r.metrics {
                Ok(m) => format!("{}:{}", r.seed, fmt_db(m.rsnr_db)),
                Err(_) => format!("{}:error", r.seed),
            })
            .collect::<Vec<_>>()
            .join(";");
        let _ = write!(out, "{},{label},{},{rsnr},{ssim},{rewrap},{per_seed}", scenario.name, method.name());
        if timing {
            let _ = write!(out, ",{}", rows.iter().map(|r| r.wall_ms).sum::<u128>());
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_layout() {
        let s = Scenario::parse(
            "name = t\ngenerator = sample-b\nsize = 24\nsweep = angle: 0, 180\nmethods = ls, itoh\nseeds = 4, 5\n",
        )
        .unwrap();
        let results = run_scenario(&s);
        assert_eq!(results.len(), 8);
        let t = table(&s, &results, false);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines[0], "scenario,angle,method,rsnr_mean,ssim_mean,rewrap_error_max,rsnr_per_seed");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("t,0,ls,inf,"), "{}", lines[1]);
        assert!(lines[1].ends_with(",4:inf;5:inf"));
        assert!(lines[4].starts_with("t,180,itoh,"));
        assert!(table(&s, &results, true).lines().next().unwrap().ends_with(",wall_ms"));
    }

    #[test]
    fn failures_are_recorded() {
        let s = Scenario::parse("generator = sample-b\nsize = 16\nangle = 360\nmethods = ls\nseeds = 1\n").unwrap();
        // an all-zero truth has no defined RSNR
        let t = table(&s, &run_scenario(&s), false);
        assert_eq!(t.lines().nth(1).unwrap(), "sample-b,,ls,error,error,error,1:error");
    }
}
