//! Benchmark table reproduction. Each table id names a fixed experiment
//! grid; the scale factor shrinks node counts and replicate counts for
//! desk-scale runs while leaving every formula untouched.

use std::time::Instant;

use twnet_core::changepoint::ScanConfig;
use twnet_core::error::Error;
use twnet_core::estimators::Estimator;
use twnet_core::io::{digest_bytes, ResultRecord};
use twnet_core::metrics::{
    changepoint_benchmark, estimate_rejection_rate, BenchmarkReport, ReportRow, TestMethod,
};
use twnet_core::model::GraphonFamily;
use twnet_core::scenarios::{
    ChangeScenario, PopulationModel, SeriesScenario, TwoSampleScenario,
};

use crate::BenchArgs;

fn scale_n(n: usize, scale: f64) -> usize {
    (((n as f64 * scale) / 10.0).round() as usize * 10).max(20)
}

fn scale_r(r: u64, scale: f64) -> u64 {
    ((r as f64 * scale).round() as u64).max(1)
}

fn two_sample_methods() -> Vec<TestMethod> {
    vec![
        TestMethod::Tw1(Estimator::Mnbs(Default::default())),
        TestMethod::Tw1(Estimator::Avg),
        TestMethod::Tw1(Estimator::Sbm(Default::default())),
        TestMethod::ChiSq,
        TestMethod::NType,
    ]
}

fn cp_estimators() -> Vec<Estimator> {
    vec![
        Estimator::Mnbs(Default::default()),
        Estimator::Avg,
        Estimator::Sbm(Default::default()),
    ]
}

/// Distinct deterministic seed per table cell, derived from the base seed.
fn cell_seed(base: u64, cell: u64) -> u64 {
    base.wrapping_add(cell.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn cmd_bench(a: BenchArgs) -> twnet_core::Result<()> {
    if !(a.scale > 0.0 && a.scale <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "scale must be in (0, 1], got {}",
            a.scale
        )));
    }
    let started = Instant::now();
    let report = run_table(&a)?;
    if report.replicates < 10 {
        eprintln!(
            "warning: only {} replicate(s); rates are coarse",
            report.replicates
        );
    }
    print!("{}", report.render_table());
    eprintln!("elapsed: {:.1}s", started.elapsed().as_secs_f64());
    if let Some(out) = &a.out {
        let payload = serde_json::to_value(&report)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        let digest = digest_bytes(
            format!("{} scale={} seed={} R={}", a.table, a.scale, a.seed, report.replicates)
                .as_bytes(),
        );
        ResultRecord::new("benchmark", digest, vec![a.seed], crate::invocation(), payload)
            .save(out)?;
        println!("record written to {}", out.display());
    }
    Ok(())
}

fn run_table(a: &BenchArgs) -> twnet_core::Result<BenchmarkReport> {
    match a.table.as_str() {
        "fig1" => two_sample_figure(a, GraphonFamily::Graphon1, (0.05, 0.02)),
        "fig2" => two_sample_figure(a, GraphonFamily::Graphon2, (0.2, 0.17)),
        "tab1" => no_change_table(a, PopulationModel::Graphon(GraphonFamily::Graphon3)),
        "tab2" => no_change_table(a, PopulationModel::SbmTwoBlock { theta0: 0.0 }),
        "tab3" | "tab4" | "tab5" => change_table(a, ChangeScenario::SingleChange),
        "tab6" | "tab7" | "tab8" => change_table(a, ChangeScenario::ThreeChanges),
        other => Err(Error::InvalidInput(format!(
            "unknown table id {other:?} (expected fig1, fig2, tab1..tab8)"
        ))),
    }
}

/// ASL/AP curves over the node grid for one graphon family, at both sample
/// sizes, for all five tests.
fn two_sample_figure(
    a: &BenchArgs,
    family: GraphonFamily,
    theta_by_m: (f64, f64),
) -> twnet_core::Result<BenchmarkReport> {
    let replicates = a.replicates.unwrap_or_else(|| scale_r(1000, a.scale));
    let n_grid: Vec<usize> = (1..=10).map(|k| scale_n(k * 100, a.scale)).collect();
    let mut rows = Vec::new();
    let mut cell = 0u64;
    for &m in &[30usize, 200] {
        let theta = if m == 30 { theta_by_m.0 } else { theta_by_m.1 };
        for &n in &n_grid {
            for null in [true, false] {
                let scenario = if null {
                    TwoSampleScenario::null(PopulationModel::Graphon(family), n, m, m)
                } else {
                    TwoSampleScenario::alternative(
                        PopulationModel::Graphon(family),
                        n,
                        m,
                        m,
                        theta,
                    )
                };
                for method in two_sample_methods() {
                    let rate = estimate_rejection_rate(
                        &scenario,
                        &method,
                        0.05,
                        replicates,
                        cell_seed(a.seed, cell),
                    )?;
                    let label = format!(
                        "n={n} m={m} {}",
                        if null { "null" } else { "alt" }
                    );
                    rows.push(ReportRow::rejection(label, method.name(), rate));
                    cell += 1;
                }
            }
        }
    }
    Ok(BenchmarkReport {
        scenario_id: a.table.clone(),
        replicates,
        seed: a.seed,
        rows,
    })
}

fn cp_grid(a: &BenchArgs) -> (Vec<usize>, Vec<usize>, Vec<f64>, u64) {
    let n_grid: Vec<usize> = [100, 200, 300]
        .iter()
        .map(|&n| scale_n(n, a.scale))
        .collect();
    let m_grid = vec![100usize, 200];
    let rho_grid = vec![1.0, 0.25];
    let replicates = a.replicates.unwrap_or_else(|| scale_r(100, a.scale));
    (n_grid, m_grid, rho_grid, replicates)
}

fn no_change_table(
    a: &BenchArgs,
    model: PopulationModel,
) -> twnet_core::Result<BenchmarkReport> {
    let (n_grid, m_grid, rho_grid, replicates) = cp_grid(a);
    let mut rows = Vec::new();
    let mut cell = 0u64;
    for &m in &m_grid {
        for &n in &n_grid {
            for &rho in &rho_grid {
                let scenario = SeriesScenario::new(ChangeScenario::NoChange { model }, n, m)
                    .with_sparsity(rho);
                for est in cp_estimators() {
                    let row = changepoint_benchmark(
                        &scenario,
                        &ScanConfig::new(est),
                        replicates,
                        cell_seed(a.seed, cell),
                    )?;
                    rows.push(ReportRow::changepoint(
                        format!("m={m} n={n} rho={rho}"),
                        &row,
                    ));
                    cell += 1;
                }
            }
        }
    }
    Ok(BenchmarkReport {
        scenario_id: a.table.clone(),
        replicates,
        seed: a.seed,
        rows,
    })
}

fn change_table(
    a: &BenchArgs,
    change: ChangeScenario,
) -> twnet_core::Result<BenchmarkReport> {
    let (n_grid, m_grid, rho_grid, replicates) = cp_grid(a);
    let mut rows = Vec::new();
    let mut cell = 0u64;
    for &m in &m_grid {
        for &n in &n_grid {
            for &rho in &rho_grid {
                let scenario = SeriesScenario::new(change, n, m).with_sparsity(rho);
                for est in cp_estimators() {
                    let row = changepoint_benchmark(
                        &scenario,
                        &ScanConfig::new(est),
                        replicates,
                        cell_seed(a.seed, cell),
                    )?;
                    rows.push(ReportRow::changepoint(
                        format!("m={m} n={n} rho={rho}"),
                        &row,
                    ));
                    cell += 1;
                }
            }
        }
    }
    Ok(BenchmarkReport {
        scenario_id: a.table.clone(),
        replicates,
        seed: a.seed,
        rows,
    })
}
