//! `twnet`: simulate network populations, run two-sample tests, detect
//! change-points in dynamic series, and reproduce the benchmark tables.
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 data error,
//! 3 internal error.

mod bench;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use twnet_core::changepoint::{detect_changepoints, ScanConfig};
use twnet_core::error::Error;
use twnet_core::estimators::{Estimator, MnbsConfig};
use twnet_core::io::{
    digest_files, load_series, read_adjacency_csv, write_adjacency_csv, ResultRecord,
    SeriesManifest,
};
use twnet_core::metrics::{boysen_distances, TestMethod};
use twnet_core::model::{GraphonFamily, NetworkSample};
use twnet_core::scenarios::{
    ChangeScenario, PopulationModel, SeriesScenario, TwoSampleScenario,
};
use twnet_core::tw1::Tw1Table;

#[derive(Parser)]
#[command(name = "twnet", version, about = "Two-sample testing and change-point detection for network populations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a simulated two-sample pair or dynamic series on disk.
    Simulate(SimulateArgs),
    /// Run a two-sample test on two stored samples.
    Test(TestArgs),
    /// Detect change-points in a stored dynamic series.
    Detect(DetectArgs),
    /// Reproduce a benchmark table at a chosen scale.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    TwoSampleNull,
    TwoSampleAlt,
    NoChange,
    SingleCp,
    ThreeCp,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Graphon1,
    Graphon2,
    Graphon3,
    Graphon4,
    Sbm1,
}

impl ModelArg {
    fn population(self, theta0: f64) -> PopulationModel {
        match self {
            ModelArg::Graphon1 => PopulationModel::Graphon(GraphonFamily::Graphon1),
            ModelArg::Graphon2 => PopulationModel::Graphon(GraphonFamily::Graphon2),
            ModelArg::Graphon3 => PopulationModel::Graphon(GraphonFamily::Graphon3),
            ModelArg::Graphon4 => PopulationModel::Graphon(GraphonFamily::Graphon4),
            ModelArg::Sbm1 => PopulationModel::SbmTwoBlock { theta0 },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Avg,
    Sbm,
    Mnbs,
}

impl EstimatorArg {
    fn build(self, q_const: f64) -> Estimator {
        match self {
            EstimatorArg::Avg => Estimator::Avg,
            EstimatorArg::Sbm => Estimator::Sbm(Default::default()),
            EstimatorArg::Mnbs => Estimator::Mnbs(MnbsConfig {
                c: q_const,
                ..Default::default()
            }),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Tw1Avg,
    Tw1Sbm,
    Tw1Mnbs,
    Chi2,
    Ntype,
}

impl MethodArg {
    fn build(self, q_const: f64) -> TestMethod {
        match self {
            MethodArg::Tw1Avg => TestMethod::Tw1(Estimator::Avg),
            MethodArg::Tw1Sbm => TestMethod::Tw1(Estimator::Sbm(Default::default())),
            MethodArg::Tw1Mnbs => TestMethod::Tw1(Estimator::Mnbs(MnbsConfig {
                c: q_const,
                ..Default::default()
            })),
            MethodArg::Chi2 => TestMethod::ChiSq,
            MethodArg::Ntype => TestMethod::NType,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario preset.
    #[arg(long, value_enum)]
    preset: PresetArg,
    /// Population model (two-sample and no-change presets).
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Number of nodes.
    #[arg(long)]
    n: usize,
    /// Sample size per group (two-sample) or series length.
    #[arg(long)]
    m: usize,
    /// Perturbation on the small subset (two-sample-alt); defaults by model.
    #[arg(long)]
    theta: Option<f64>,
    /// Sparsity scale in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TestArgs {
    /// First sample: directory of CSVs or a manifest path.
    #[arg(long)]
    sample1: PathBuf,
    /// Second sample: directory of CSVs or a manifest path.
    #[arg(long)]
    sample2: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Neighborhood-quantile constant for the MNBS estimator.
    #[arg(long, default_value_t = 3.0)]
    q_const: f64,
    /// Write the result record here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    /// Series manifest path.
    #[arg(long)]
    series: PathBuf,
    /// Scan window; defaults to round(sqrt(m)).
    #[arg(long)]
    h: Option<usize>,
    #[arg(long, value_enum, default_value = "mnbs")]
    estimator: EstimatorArg,
    /// Neighborhood-quantile constant for the MNBS estimator.
    #[arg(long, default_value_t = 3.0)]
    q_const: f64,
    /// Override the threshold level (default derives from n and h).
    #[arg(long)]
    alpha: Option<f64>,
    /// Write the result record here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Table id: fig1, fig2, tab1..tab8.
    #[arg(long)]
    table: String,
    /// Scale factor applied to node counts and replicate counts.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Override the replicate count after scaling.
    #[arg(long)]
    replicates: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the result record here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not failures
            use clap::error::ErrorKind::*;
            let _ = e.print();
            return if matches!(e.kind(), DisplayHelp | DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    init_workers();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Parse { .. } | Error::Io { .. } => 2,
                Error::InvalidInput(_) | Error::Domain(_) | Error::Unsupported(_) => 1,
                _ => 3,
            })
        }
    }
}

fn init_workers() {
    if let Ok(v) = std::env::var("TWNET_WORKERS") {
        if let Ok(threads) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
}

fn run(cli: Cli) -> twnet_core::Result<()> {
    match cli.cmd {
        Cmd::Simulate(a) => cmd_simulate(a),
        Cmd::Test(a) => cmd_test(a),
        Cmd::Detect(a) => cmd_detect(a),
        Cmd::Bench(a) => bench::cmd_bench(a),
    }
}

fn invocation() -> Vec<String> {
    std::env::args().collect()
}

fn write_sample_dir(
    dir: &Path,
    sample: &NetworkSample,
    labels: Option<Vec<usize>>,
) -> twnet_core::Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut paths = Vec::new();
    for (t, a) in sample.matrices().iter().enumerate() {
        let name = format!("net_{t:04}.csv");
        write_adjacency_csv(dir.join(&name), a)?;
        paths.push(name);
    }
    SeriesManifest::new(sample.order(), paths, labels).save(dir.join("sample.json"))
}

fn cmd_simulate(a: SimulateArgs) -> twnet_core::Result<()> {
    let need_model = |m: Option<ModelArg>| {
        m.ok_or_else(|| Error::InvalidInput("this preset requires --model".into()))
    };
    match a.preset {
        PresetArg::TwoSampleNull | PresetArg::TwoSampleAlt => {
            let model = need_model(a.model)?.population(0.0);
            let scenario = if matches!(a.preset, PresetArg::TwoSampleNull) {
                TwoSampleScenario::null(model, a.n, a.m, a.m)
            } else {
                let theta = a.theta.unwrap_or(match a.model {
                    Some(ModelArg::Graphon2) => {
                        if a.m >= 200 {
                            0.17
                        } else {
                            0.2
                        }
                    }
                    _ => {
                        if a.m >= 200 {
                            0.02
                        } else {
                            0.05
                        }
                    }
                });
                TwoSampleScenario::alternative(model, a.n, a.m, a.m, theta)
            }
            .with_sparsity(a.rho);
            let (s1, s2) = scenario.generate(a.seed, 0)?;
            write_sample_dir(&a.out.join("sample1"), &s1, None)?;
            write_sample_dir(&a.out.join("sample2"), &s2, None)?;
            println!(
                "wrote {} + {} networks under {}",
                s1.len(),
                s2.len(),
                a.out.display()
            );
        }
        PresetArg::NoChange | PresetArg::SingleCp | PresetArg::ThreeCp => {
            let change = match a.preset {
                PresetArg::NoChange => ChangeScenario::NoChange {
                    model: need_model(a.model)?.population(0.0),
                },
                PresetArg::SingleCp => ChangeScenario::SingleChange,
                _ => ChangeScenario::ThreeChanges,
            };
            let scenario = SeriesScenario::new(change, a.n, a.m).with_sparsity(a.rho);
            let series = scenario.generate(a.seed, 0)?;
            std::fs::create_dir_all(&a.out)
                .map_err(|e| Error::io(a.out.display().to_string(), e))?;
            let mut paths = Vec::new();
            for (t, mat) in series.matrices().iter().enumerate() {
                let name = format!("t_{:04}.csv", t + 1);
                write_adjacency_csv(a.out.join(&name), mat)?;
                paths.push(name);
            }
            SeriesManifest::new(a.n, paths, Some(scenario.truth()))
                .save(a.out.join("series.json"))?;
            println!(
                "wrote series of {} networks under {} (truth {:?})",
                series.len(),
                a.out.display(),
                scenario.truth()
            );
        }
    }
    Ok(())
}

/// Loads a sample from a manifest file or a directory of CSVs (sorted by
/// file name; a sample.json manifest takes precedence).
fn load_sample(path: &Path) -> twnet_core::Result<(NetworkSample, Vec<PathBuf>)> {
    let manifest_path = if path.is_dir() {
        let m = path.join("sample.json");
        if m.exists() {
            Some(m)
        } else {
            None
        }
    } else {
        Some(path.to_path_buf())
    };
    if let Some(mp) = manifest_path {
        let manifest = SeriesManifest::load(&mp)?;
        let base = mp.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
        let mut files = Vec::new();
        let mut mats = Vec::new();
        for rel in &manifest.paths {
            let p = base.join(rel);
            mats.push(read_adjacency_csv(&p)?);
            files.push(p);
        }
        return Ok((NetworkSample::new(mats)?, files));
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|x| x == "csv").unwrap_or(false))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no CSV files found in {}",
            path.display()
        )));
    }
    let mats = files
        .iter()
        .map(read_adjacency_csv)
        .collect::<twnet_core::Result<Vec<_>>>()?;
    Ok((NetworkSample::new(mats)?, files))
}

fn cmd_test(a: TestArgs) -> twnet_core::Result<()> {
    let (s1, files1) = load_sample(&a.sample1)?;
    let (s2, files2) = load_sample(&a.sample2)?;
    let method = a.method.build(a.q_const);
    let table = Tw1Table::shipped();
    let result = method.run(&s1, &s2, a.alpha, table)?;
    println!("method      : {}", method.name());
    println!("statistic   : {:.6}", result.statistic);
    println!(
        "threshold(s): {}",
        result
            .thresholds
            .iter()
            .map(|t| format!("{t:.6}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    println!("alpha       : {}", result.alpha);
    println!(
        "decision    : {}",
        if result.reject {
            "reject equal populations"
        } else {
            "fail to reject"
        }
    );
    if let Some(out) = a.out {
        let mut all = files1;
        all.extend(files2);
        let record = ResultRecord::new(
            "two-sample",
            digest_files(&all)?,
            vec![],
            invocation(),
            serde_json::to_value(&result)
                .map_err(|e| Error::InvalidInput(e.to_string()))?,
        );
        record.save(&out)?;
        println!("record      : {}", out.display());
    }
    Ok(())
}

fn cmd_detect(a: DetectArgs) -> twnet_core::Result<()> {
    let (series, labels) = load_series(&a.series)?;
    let mut cfg = ScanConfig::new(a.estimator.build(a.q_const));
    if let Some(h) = a.h {
        cfg = cfg.with_window(h);
    }
    cfg.alpha_override = a.alpha;
    let table = Tw1Table::shipped();
    let result = detect_changepoints(&series, &cfg, table)?;
    println!("window h    : {}", result.window);
    println!("estimator   : {}", result.estimator);
    println!("estimated   : {:?}", result.estimated);
    println!("   t      scan     threshold  localmax  selected");
    for c in &result.per_candidate {
        println!(
            "{:>5}  {:>9.4}  {:>9}  {:>8}  {:>8}",
            c.t,
            c.scan,
            c.threshold
                .map(|d| format!("{d:.4}"))
                .unwrap_or_else(|| "-".into()),
            c.is_local_max,
            c.selected
        );
    }
    let mut boysen = None;
    if let Some(truth) = &labels {
        if !truth.is_empty() {
            boysen = boysen_distances(&result.estimated, truth)?;
            match boysen {
                Some((e1, e2)) => println!("boysen      : eps1 = {e1}, eps2 = {e2}"),
                None => println!("boysen      : - (nothing estimated)"),
            }
        }
    }
    if let Some(out) = a.out {
        let record = ResultRecord::new(
            "changepoint",
            digest_files(&[a.series.clone()])?,
            vec![],
            invocation(),
            serde_json::json!({
                "result": result,
                "labels": labels,
                "boysen": boysen,
            }),
        );
        record.save(&out)?;
        println!("record      : {}", out.display());
    }
    Ok(())
}
