//! Command-line front end: single scenarios, the full matrix, and the
//! simulated-vs-historical growth comparison.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 input error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analytics::{self, Histogram, ProductionEstimate, RegressionLine};
use crate::config::{matrix_configs, ExperimentConfig, Scenario, TuningDefaults};
use crate::engine::{self, GenerationResult, MatrixRow, PreExperiment};
use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const SEED_ENV: &str = "AQUASIM_SEED";
pub const RESULTS_HEADER: &str = "exp_no,config,mse,std,mean_size,max_size,min_size,epochs,groups,weeks";

#[derive(Debug, Parser)]
#[command(name = "aquasim", version, about = "Shrimp-pond feed distribution simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one configuration for ten generations.
    Run(RunArgs),
    /// Run all 16 configurations and write results.csv.
    Matrix(MatrixArgs),
    /// Fit growth lines to a simulated trajectory and historical pond records.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scenario's seed; AQUASIM_SEED is used if neither is set.
    #[arg(long)]
    seed: Option<u64>,
    /// Write a text frame of the habitat every N epochs.
    #[arg(long = "dump-grid", value_name = "EVERY_N", value_parser = clap::value_parser!(u32).range(1..))]
    dump_grid: Option<u32>,
}

#[derive(Debug, Args)]
struct MatrixArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, env = SEED_ENV)]
    seed: u64,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,
    /// Optional scenario-style JSON of tuning overrides applied to every config.
    #[arg(long)]
    tuning: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Simulated trajectory CSV with header `epoch,mean_size`.
    simulated: PathBuf,
    /// Historical pond records, one row per pond and week.
    historical: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pond_col: usize,
    #[arg(long, default_value_t = 1)]
    week_col: usize,
    #[arg(long, default_value_t = 2)]
    weight_col: usize,
    /// The historical file has no header row.
    #[arg(long)]
    no_header: bool,
}

/// Input errors map to exit 2, everything else to exit 1.
#[derive(Debug)]
enum Failure {
    Input(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Runtime(m) => m,
        }
    }
}

fn runtime(e: Error) -> Failure {
    Failure::Runtime(e.to_string())
}

fn input(e: Error) -> Failure {
    Failure::Input(e.to_string())
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Matrix(a) => cmd_matrix(&a),
        Command::Compare(a) => cmd_compare(&a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_output(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Input(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// One generation's headline numbers for summary files.
#[derive(Debug, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub generation: usize,
    pub epochs: u32,
    pub capped: bool,
    pub mse: f64,
    pub std: f64,
    pub mean_size: f64,
    pub min_size: u32,
    pub max_size: u32,
    pub groups: usize,
    pub spawn_fitness_variance: f64,
    pub pellets_dropped: usize,
    pub pellets_eaten: usize,
}

impl From<&GenerationResult> for GenerationSummary {
    fn from(g: &GenerationResult) -> Self {
        Self {
            generation: g.generation_index,
            epochs: g.epochs_used,
            capped: g.capped,
            mse: g.mse,
            std: g.std,
            mean_size: g.mean_size,
            min_size: g.min_size,
            max_size: g.max_size,
            groups: g.group_count,
            spawn_fitness_variance: g.spawn_fitness_variance,
            pellets_dropped: g.pellets_dropped,
            pellets_eaten: g.pellets_eaten,
        }
    }
}

/// Contents of `summary.json` written by `run`.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: ExperimentConfig,
    pub code: String,
    pub best_generation: usize,
    pub best: GenerationSummary,
    pub weeks: f64,
    pub final_sizes: Vec<u32>,
    pub generations: Vec<GenerationSummary>,
}

fn cmd_run(a: &RunArgs) -> Result<(), Failure> {
    let text = read_input(&a.scenario)?;
    let scenario = Scenario::from_json(&text).map_err(input)?;
    let seed = match a.seed {
        Some(s) => Some(s),
        None if scenario.seed.is_some() => None,
        None => env_seed()?,
    };
    let config = scenario.into_config(seed).map_err(input)?;
    create_dir(&a.out)?;

    let mut frames: BTreeMap<usize, String> = BTreeMap::new();
    let pre = match a.dump_grid {
        Some(every) => engine::run_pre_experiment_observed(&config, &mut |g, w| {
            if w.epoch % every == 0 {
                let f = frames.entry(g).or_default();
                let _ = writeln!(f, "epoch {} mean {:.3}", w.epoch, w.mean_size());
                f.push_str(&w.render());
                f.push('\n');
            }
        }),
        None => engine::run_pre_experiment(&config),
    }
    .map_err(runtime)?;

    write_run_outputs(&a.out, &pre)?;
    for (g, f) in &frames {
        write_output(&a.out.join(format!("frames_gen{g}.txt")), f)?;
    }
    Ok(())
}

fn write_run_outputs(out: &Path, pre: &PreExperiment) -> Result<(), Failure> {
    for g in &pre.generations {
        let mut s = String::from("epoch,mean_size\n");
        for &(e, m) in &g.mean_size_trajectory {
            let _ = writeln!(s, "{e},{m}");
        }
        write_output(&out.join(format!("trajectory_gen{}.csv", g.generation_index)), &s)?;
    }
    let best = pre.best();
    write_output(&out.join("histogram_best.csv"), &histogram_csv(&best.histogram))?;
    let summary = RunSummary {
        config: pre.config.clone(),
        code: pre.config.code(),
        best_generation: pre.best_index,
        best: best.into(),
        weeks: analytics::epochs_to_weeks(best.epochs_used as f64),
        final_sizes: best.final_sizes.clone(),
        generations: pre.generations.iter().map(GenerationSummary::from).collect(),
    };
    write_output(&out.join("summary.json"), &to_json(&summary)?)
}

fn histogram_csv(h: &Histogram) -> String {
    let mut s = String::from("bin,lower_g,upper_g,count\n");
    for (i, c) in h.bins.iter().enumerate() {
        let _ = writeln!(s, "{i},{},{},{c}", Histogram::lower_edge(i), Histogram::lower_edge(i + 1));
    }
    s
}

/// Contents of `summary.json` written by `matrix`.
#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixSummary {
    pub seed: u64,
    pub tuning: TuningDefaults,
    /// Config with the fewest epochs (first in table order on ties).
    pub fastest: String,
    /// Crop length of the fastest config against the 22-week reference.
    pub production: ProductionEstimate,
    /// `percent_time_reduction = 100 * (baseline_weeks - weeks) / baseline_weeks`.
    pub percent_formula: String,
    pub best_generations: Vec<usize>,
}

fn cmd_matrix(a: &MatrixArgs) -> Result<(), Failure> {
    let tuning = match &a.tuning {
        Some(p) => tuning_overrides(&read_input(p)?).map_err(input)?,
        None => TuningDefaults::default(),
    };
    let configs = matrix_configs(&tuning, a.seed);
    for c in &configs {
        c.validate().map_err(input)?;
    }
    create_dir(&a.out)?;

    let run = || engine::run_configs(configs);
    let result = match a.jobs {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k as usize)
            .build()
            .map_err(|e| Failure::Runtime(e.to_string()))?
            .install(run),
        None => run(),
    }
    .map_err(runtime)?;

    write_output(&a.out.join("results.csv"), &results_csv(&result.rows).map_err(runtime)?)?;
    let fastest = result
        .rows
        .iter()
        .fold(&result.rows[0], |best, r| if r.epochs < best.epochs { r } else { best });
    let summary = MatrixSummary {
        seed: a.seed,
        tuning,
        fastest: fastest.config.clone(),
        production: analytics::production_estimate(fastest.epochs as f64, analytics::REFERENCE_EPOCHS),
        percent_formula: "100 * (baseline_weeks - weeks) / baseline_weeks".into(),
        best_generations: result.experiments.iter().map(|e| e.best_index).collect(),
    };
    write_output(&a.out.join("summary.json"), &to_json(&summary)?)
}

/// Tuning overrides in scenario syntax; axis keys and seed are ignored.
fn tuning_overrides(text: &str) -> crate::Result<TuningDefaults> {
    let mut s = Scenario::from_json(text)?;
    s.disposition.get_or_insert(crate::Disposition::Uniform);
    s.feeding_mode.get_or_insert(crate::FeedingMode::Normal);
    s.density.get_or_insert(crate::Density::Intensive);
    s.seed.get_or_insert(0);
    Ok(s.into_config(None)?.tuning)
}

/// The results table with its fixed header, '.' decimals, one row per line.
pub fn results_csv(rows: &[MatrixRow]) -> crate::Result<String> {
    let err = |e: &dyn std::fmt::Display| Error::Consistency(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| err(&e))?;
    }
    let bytes = w.into_inner().map_err(|e| err(&e))?;
    String::from_utf8(bytes).map_err(|e| err(&e))
}

pub fn parse_results_csv(text: &str) -> crate::Result<Vec<MatrixRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::Config(e.to_string()))?.iter().collect::<Vec<_>>().join(",");
    if header != RESULTS_HEADER {
        return Err(Error::Config(format!("unexpected results header `{header}`")));
    }
    r.deserialize().map(|row| row.map_err(|e| Error::Config(e.to_string()))).collect()
}

/// A historical pond record; the extra columns pass through untouched.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoricalRecord {
    pub pond_id: String,
    pub week: u32,
    pub mean_weight: f64,
    pub extra: Vec<String>,
}

pub struct ColumnMap {
    pub pond: usize,
    pub week: usize,
    pub weight: usize,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self { pond: 0, week: 1, weight: 2 }
    }
}

pub const HISTORICAL_COLUMNS: usize = 7;

/// Parses the 7-column historical format and checks that each pond's weeks
/// are strictly ascending once sorted (no duplicate weeks).
pub fn parse_historical(text: &str, cols: &ColumnMap, has_header: bool) -> crate::Result<Vec<HistoricalRecord>> {
    let bad = |m: String| Error::Config(m);
    for c in [cols.pond, cols.week, cols.weight] {
        if c >= HISTORICAL_COLUMNS {
            return Err(bad(format!("column index {c} outside the {HISTORICAL_COLUMNS}-column format")));
        }
    }
    if cols.pond == cols.week || cols.pond == cols.weight || cols.week == cols.weight {
        return Err(bad("pond, week and weight columns must differ".into()));
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(has_header).from_reader(text.as_bytes());
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let line = i + 1 + has_header as usize;
        if row.len() != HISTORICAL_COLUMNS {
            return Err(bad(format!("line {line}: expected {HISTORICAL_COLUMNS} columns, got {}", row.len())));
        }
        let week = row[cols.week]
            .trim()
            .parse()
            .map_err(|_| bad(format!("line {line}: bad week `{}`", &row[cols.week])))?;
        let mean_weight: f64 = row[cols.weight]
            .trim()
            .parse()
            .map_err(|_| bad(format!("line {line}: bad weight `{}`", &row[cols.weight])))?;
        if !mean_weight.is_finite() {
            return Err(bad(format!("line {line}: non-finite weight")));
        }
        let extra = (0..HISTORICAL_COLUMNS)
            .filter(|c| ![cols.pond, cols.week, cols.weight].contains(c))
            .map(|c| row[c].to_string())
            .collect();
        records.push(HistoricalRecord { pond_id: row[cols.pond].trim().to_string(), week, mean_weight, extra });
    }
    let mut by_pond: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
    for r in &records {
        by_pond.entry(&r.pond_id).or_default().push(r.week);
    }
    for (pond, weeks) in &mut by_pond {
        weeks.sort_unstable();
        if weeks.windows(2).any(|w| w[0] == w[1]) {
            return Err(bad(format!("pond {pond}: duplicate week")));
        }
    }
    Ok(records)
}

pub fn parse_trajectory(text: &str) -> crate::Result<Vec<(f64, f64)>> {
    #[derive(Deserialize)]
    struct Row {
        epoch: f64,
        mean_size: f64,
    }
    csv::Reader::from_reader(text.as_bytes())
        .deserialize::<Row>()
        .map(|r| r.map(|r| (r.epoch, r.mean_size)).map_err(|e| Error::Config(e.to_string())))
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FittedLine {
    pub slope: f64,
    pub intercept: f64,
    pub mse: f64,
    pub points: usize,
}

impl FittedLine {
    fn fit(points: &[(f64, f64)]) -> crate::Result<Self> {
        let RegressionLine { slope, intercept } = analytics::linear_regression(points)?;
        Ok(Self { slope, intercept, mse: analytics::mse_vs_regression(points)?, points: points.len() })
    }
}

/// Contents of the file written by `compare`. Simulated lines are in grams
/// per epoch, historical ones in grams per week; `*_in_*` fields restate each
/// line on the other axis.
#[derive(Debug, Serialize, Deserialize)]
pub struct Comparison {
    pub epochs_per_week: f64,
    pub weeks_per_epoch: f64,
    pub simulated: FittedLine,
    pub simulated_per_week: RegressionLine,
    pub historical: FittedLine,
    pub historical_per_epoch: RegressionLine,
    pub ponds: usize,
}

pub fn compare(simulated: &[(f64, f64)], historical: &[HistoricalRecord]) -> crate::Result<Comparison> {
    let hist_pts: Vec<(f64, f64)> = historical.iter().map(|r| (r.week as f64, r.mean_weight)).collect();
    let sim = FittedLine::fit(simulated)?;
    let hist = FittedLine::fit(&hist_pts)?;
    let epw = analytics::weeks_to_epochs(1.0);
    let ponds = historical.iter().map(|r| r.pond_id.as_str()).collect::<std::collections::BTreeSet<_>>().len();
    Ok(Comparison {
        epochs_per_week: epw,
        weeks_per_epoch: analytics::epochs_to_weeks(1.0),
        simulated_per_week: RegressionLine { slope: sim.slope * epw, intercept: sim.intercept },
        historical_per_epoch: RegressionLine { slope: hist.slope / epw, intercept: hist.intercept },
        simulated: sim,
        historical: hist,
        ponds,
    })
}

fn cmd_compare(a: &CompareArgs) -> Result<(), Failure> {
    let sim = parse_trajectory(&read_input(&a.simulated)?).map_err(input)?;
    let cols = ColumnMap { pond: a.pond_col, week: a.week_col, weight: a.weight_col };
    let hist = parse_historical(&read_input(&a.historical)?, &cols, !a.no_header).map_err(input)?;
    let c = compare(&sim, &hist).map_err(input)?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    write_output(&a.out, &to_json(&c)?)
}
