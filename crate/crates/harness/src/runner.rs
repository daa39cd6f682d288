//! Executes methods and renders their CSV artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use morphopt::baselines::{
    analytic_circle_optimum, band_match_baseline, equal_dex_baseline, phi_sweep, sweep_angle, BaselineResult,
};
use morphopt::blackbox::{bo_optimize, cmaes_optimize, pso_optimize, OptimizerResult, SearchSpace1D};
use morphopt::kinematics::{phi_to_lengths, w_norm_phi, PhiParam};
use morphopt::reward::{circle_analytic_reward, RewardVariant};
use morphopt::rl::{self, Algorithm, BanditEnv, MappedAction, TrainRecord};
use morphopt::rng::RngStream;
use morphopt::taskpath::Band;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{ExperimentConfig, TaskKind};
use crate::csvout::{fmt6, Table};
use crate::error::{HarnessError, Result};
use crate::metadata;
use crate::stats::{mean_std, moving_average};

pub const SUMMARY_FILE: &str = "circle_summary_methods.csv";
pub const SUMMARY_HEADER: [&str; 5] = ["Method", "phi_deg", "L1_m", "L2_m", "w_norm"];
pub const COMBINED_HEADER: [&str; 7] = ["algo", "L1_mean", "L1_std", "L2_mean", "L2_std", "R_mean", "R_std"];
pub const ANNULUS_HEADER: [&str; 7] = ["algo", "rmin_mean", "rmin_std", "rmax_mean", "rmax_std", "band_b", "band_a"];
pub const SEEDS_HEADER: [&str; 13] = [
    "seed",
    "best_phi_deg",
    "best_L1_m",
    "best_L2_m",
    "best_reward",
    "greedy_phi_deg",
    "greedy_L1_m",
    "greedy_L2_m",
    "greedy_reward",
    "greedy_rmin_m",
    "greedy_rmax_m",
    "first500_mean",
    "last500_mean",
];
/// Episodes in the head and tail windows of the learning-progress check.
pub const PROGRESS_WINDOW: usize = 500;

pub fn combined_file(task: TaskKind) -> String {
    format!("combined_{}_hybrid_algos_L1L2R.csv", task.tag())
}

pub fn annulus_file(task: TaskKind) -> String {
    format!("annulus_{}.csv", task.tag())
}

pub fn seeds_file(algo: Algorithm) -> String {
    format!("seeds_{}.csv", algo.slug())
}

pub fn curves_file(algo: Algorithm, seed: u64) -> String {
    format!("curves_{}_{seed}.csv", algo.slug())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Heuristic {
    Pso,
    Bo,
    Cmaes,
}

impl Heuristic {
    pub const ALL: [Heuristic; 3] = [Heuristic::Pso, Heuristic::Bo, Heuristic::Cmaes];

    pub fn label(self) -> &'static str {
        match self {
            Heuristic::Pso => "PSO",
            Heuristic::Bo => "BO",
            Heuristic::Cmaes => "CMA-ES",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Heuristic::Pso => "pso",
            Heuristic::Bo => "bo",
            Heuristic::Cmaes => "cmaes",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineChoice {
    EqualDex,
    BandMatch,
    Analytic,
}

impl BaselineChoice {
    pub fn slug(self) -> &'static str {
        match self {
            BaselineChoice::EqualDex => "equal-dex",
            BaselineChoice::BandMatch => "band-match",
            BaselineChoice::Analytic => "analytic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Sweep,
    Heuristic(Heuristic),
    Rl(Algorithm),
    Baseline(BaselineChoice),
    RunAll,
}

impl Command {
    pub fn slug(&self) -> String {
        match self {
            Command::Sweep => "sweep".into(),
            Command::Heuristic(h) => format!("heuristic-{}", h.slug()),
            Command::Rl(a) => format!("rl-{}", a.slug()),
            Command::Baseline(b) => format!("baseline-{}", b.slug()),
            Command::RunAll => "run-all".into(),
        }
    }
}

/// One row of the circle method summary.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRow {
    pub method: String,
    pub phi_deg: f64,
    pub l1: f64,
    pub l2: f64,
    pub w_norm: f64,
}

impl MethodRow {
    fn from_phi(method: &str, phi: PhiParam, radius: f64) -> Self {
        let (l1, l2) = phi_to_lengths(phi, radius);
        Self { method: method.into(), phi_deg: phi.degrees(), l1, l2, w_norm: w_norm_phi(phi) }
    }

    fn cells(&self) -> Vec<String> {
        vec![self.method.clone(), fmt6(self.phi_deg), fmt6(self.l1), fmt6(self.l2), fmt6(self.w_norm)]
    }
}

#[derive(Debug, Clone)]
pub struct HeuristicRun {
    pub heuristic: Heuristic,
    pub row: MethodRow,
    pub result: OptimizerResult,
}

/// Per-seed digest of a training record.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedSummary {
    pub seed: u64,
    pub best: MappedAction,
    pub best_reward: f64,
    pub greedy: MappedAction,
    pub greedy_reward: f64,
    pub first_mean: f64,
    pub last_mean: f64,
}

impl SeedSummary {
    pub fn from_record(record: &TrainRecord, env: &BanditEnv) -> Self {
        Self {
            seed: record.seed,
            best: record.best(env),
            best_reward: record.best_reward,
            greedy: record.greedy(env),
            greedy_reward: record.greedy_reward,
            first_mean: record.head_mean(PROGRESS_WINDOW),
            last_mean: record.tail_mean(PROGRESS_WINDOW),
        }
    }
}

/// Locus angle in degrees, taken from the action when it carries one.
pub fn phi_deg(m: &MappedAction) -> f64 {
    match m.phi {
        Some(p) => p.degrees(),
        None => m.morphology.l2.atan2(m.morphology.l1).to_degrees(),
    }
}

#[derive(Debug, Clone)]
pub struct AlgoRuns {
    pub algorithm: Algorithm,
    pub records: Vec<TrainRecord>,
    pub seeds: Vec<SeedSummary>,
}

impl AlgoRuns {
    pub fn column(&self, f: impl Fn(&SeedSummary) -> f64) -> Vec<f64> {
        self.seeds.iter().map(f).collect()
    }
}

/// Files produced by one command, held in memory until written together.
#[derive(Debug, Default)]
pub struct Outputs {
    pub dir: PathBuf,
    pub files: BTreeMap<String, Vec<u8>>,
}

impl Outputs {
    fn new(dir: PathBuf) -> Self {
        Self { dir, files: BTreeMap::new() }
    }

    fn add_table(&mut self, name: impl Into<String>, t: &Table) {
        self.files.insert(name.into(), t.to_bytes());
    }

    pub fn sha256(bytes: &[u8]) -> String {
        Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    fn write(&self) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(&self.dir).map_err(|source| HarnessError::Write { path: self.dir.clone(), source })?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            std::fs::write(&path, bytes).map_err(|source| HarnessError::Write { path: path.clone(), source })?;
            written.push(path);
        }
        Ok(written)
    }
}

fn circle_only(cfg: &ExperimentConfig, what: &str) -> Result<f64> {
    if cfg.task != TaskKind::Circle {
        return Err(HarnessError::Config(format!(
            "{what} runs only on the circle task, not on {}",
            cfg.task.tag()
        )));
    }
    Ok(cfg.geometry.circle_radius)
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<(MethodRow, Table)> {
    let radius = circle_only(cfg, "the sweep")?;
    let res = phi_sweep(radius, cfg.sweep_points)?;
    let row = MethodRow::from_phi("Sweep", res.phi.expect("sweep carries φ"), radius);
    let mut curve = Table::new(&["phi_deg", "w_norm"]);
    for i in 0..cfg.sweep_points {
        let p = PhiParam::saturating(sweep_angle(i, cfg.sweep_points));
        curve.push(vec![fmt6(p.degrees()), fmt6(w_norm_phi(p))]);
    }
    Ok((row, curve))
}

pub fn run_heuristic(cfg: &ExperimentConfig, h: Heuristic) -> Result<HeuristicRun> {
    let radius = circle_only(cfg, h.label())?;
    let f = |x: f64| circle_analytic_reward(PhiParam::saturating(x));
    let space = SearchSpace1D::phi();
    let mut rng = RngStream::new(cfg.heuristic_seed);
    let result = match h {
        Heuristic::Pso => pso_optimize(&f, space, &cfg.pso, &mut rng),
        Heuristic::Bo => bo_optimize(&f, space, &cfg.bo, &mut rng)?,
        Heuristic::Cmaes => cmaes_optimize(&f, space, &cfg.cmaes, &mut rng),
    };
    let row = MethodRow::from_phi(h.label(), PhiParam::saturating(result.best_x), radius);
    Ok(HeuristicRun { heuristic: h, row, result })
}

pub fn environment(cfg: &ExperimentConfig) -> Result<BanditEnv> {
    let task = cfg.geometry.task_path(cfg.task)?;
    Ok(BanditEnv::for_task(task, cfg.weights)?)
}

/// Trains every `(algorithm, seed)` pair on the worker pool.
pub fn train_all(cfg: &ExperimentConfig, env: &BanditEnv, algos: &[Algorithm]) -> Result<Vec<AlgoRuns>> {
    let settings = cfg.rl_settings();
    let jobs: Vec<(Algorithm, u64)> =
        algos.iter().flat_map(|&a| cfg.seeds.iter().map(move |&s| (a, s))).collect();
    let records: Vec<TrainRecord> =
        jobs.par_iter().map(|&(a, s)| rl::train(a, env, &settings, s)).collect::<morphopt::Result<_>>()?;
    let mut out = Vec::with_capacity(algos.len());
    for (i, &algorithm) in algos.iter().enumerate() {
        let recs = records[i * cfg.seeds.len()..(i + 1) * cfg.seeds.len()].to_vec();
        let seeds = recs.iter().map(|r| SeedSummary::from_record(r, env)).collect();
        out.push(AlgoRuns { algorithm, records: recs, seeds });
    }
    Ok(out)
}

pub fn circle_rl_row(runs: &AlgoRuns) -> MethodRow {
    let m = |f: fn(&SeedSummary) -> f64| mean_std(&runs.column(f)).0;
    MethodRow {
        method: runs.algorithm.label().into(),
        phi_deg: m(|s| phi_deg(&s.best)),
        l1: m(|s| s.best.morphology.l1),
        l2: m(|s| s.best.morphology.l2),
        w_norm: m(|s| s.best_reward),
    }
}

pub fn seeds_table(runs: &AlgoRuns) -> Table {
    let mut t = Table::new(&SEEDS_HEADER);
    for s in &runs.seeds {
        let g = s.greedy.morphology;
        let ann = g.annulus();
        t.push(vec![
            s.seed.to_string(),
            fmt6(phi_deg(&s.best)),
            fmt6(s.best.morphology.l1),
            fmt6(s.best.morphology.l2),
            fmt6(s.best_reward),
            fmt6(phi_deg(&s.greedy)),
            fmt6(g.l1),
            fmt6(g.l2),
            fmt6(s.greedy_reward),
            fmt6(ann.r_min),
            fmt6(ann.r_max),
            fmt6(s.first_mean),
            fmt6(s.last_mean),
        ]);
    }
    t
}

pub fn curves_table(record: &TrainRecord, window: usize) -> Table {
    let ma_name = format!("reward_ma{window}");
    let mut t = Table::new(&["episode", "reward", &ma_name]);
    for (i, (r, m)) in record.rewards.iter().zip(moving_average(&record.rewards, window)).enumerate() {
        t.push(vec![i.to_string(), fmt6(*r), fmt6(m)]);
    }
    t
}

pub fn trace_table(result: &OptimizerResult) -> Table {
    let mut t = Table::new(&["iteration", "best_f"]);
    for e in &result.trace {
        t.push(vec![e.iteration.to_string(), fmt6(e.best_f)]);
    }
    t
}

pub fn combined_table(runs: &[AlgoRuns]) -> Table {
    let mut t = Table::new(&COMBINED_HEADER);
    for r in runs {
        let (l1m, l1s) = mean_std(&r.column(|s| s.greedy.morphology.l1));
        let (l2m, l2s) = mean_std(&r.column(|s| s.greedy.morphology.l2));
        let (rm, rs) = mean_std(&r.column(|s| s.greedy_reward));
        t.push(vec![r.algorithm.label().into(), fmt6(l1m), fmt6(l1s), fmt6(l2m), fmt6(l2s), fmt6(rm), fmt6(rs)]);
    }
    t
}

pub fn annulus_table(runs: &[AlgoRuns], band: Band) -> Table {
    let mut t = Table::new(&ANNULUS_HEADER);
    for r in runs {
        let (lo_m, lo_s) = mean_std(&r.column(|s| s.greedy.morphology.annulus().r_min));
        let (hi_m, hi_s) = mean_std(&r.column(|s| s.greedy.morphology.annulus().r_max));
        t.push(vec![
            r.algorithm.label().into(),
            fmt6(lo_m),
            fmt6(lo_s),
            fmt6(hi_m),
            fmt6(hi_s),
            fmt6(band.b),
            fmt6(band.a),
        ]);
    }
    t
}

pub fn baseline_result(cfg: &ExperimentConfig, choice: BaselineChoice) -> Result<BaselineResult> {
    let task = cfg.geometry.task_path(cfg.task)?;
    match choice {
        BaselineChoice::Analytic => Ok(analytic_circle_optimum(circle_only(cfg, "the analytic optimum")?)?),
        BaselineChoice::EqualDex => Ok(equal_dex_baseline(&task)?),
        BaselineChoice::BandMatch => {
            if cfg.task == TaskKind::Circle {
                return Err(HarnessError::Config("band-match needs a band with a > b; the circle band is [R, R]".into()));
            }
            Ok(band_match_baseline(morphopt::taskpath::band_for(&task))?)
        }
    }
}

fn applicable_baselines(task: TaskKind) -> &'static [BaselineChoice] {
    match task {
        TaskKind::Circle => &[BaselineChoice::Analytic, BaselineChoice::EqualDex],
        _ => &[BaselineChoice::EqualDex, BaselineChoice::BandMatch],
    }
}

/// Scores baselines on the sampled task path with the hybrid reward terms.
pub fn baselines_table(cfg: &ExperimentConfig, choices: &[BaselineChoice]) -> Result<Table> {
    let task = cfg.geometry.task_path(cfg.task)?;
    let env = BanditEnv::path(task, RewardVariant::Hybrid, cfg.weights)?;
    let mut t = Table::new(&[
        "baseline",
        "L1_m",
        "L2_m",
        "theta2_deg",
        "rmin_m",
        "rmax_m",
        "coverage",
        "w_bar_n",
        "band_penalty",
        "r_hyb",
    ]);
    for &c in choices {
        let b = baseline_result(cfg, c)?;
        let m = b.morphology;
        let e = env.breakdown(&m).expect("path environment");
        let ann = m.annulus();
        t.push(vec![
            b.kind.label().into(),
            fmt6(m.l1),
            fmt6(m.l2),
            fmt6(m.theta2_cmd.to_degrees()),
            fmt6(ann.r_min),
            fmt6(ann.r_max),
            fmt6(e.coverage),
            fmt6(e.w_bar_n),
            fmt6(e.band_penalty),
            fmt6(e.r_hyb),
        ]);
    }
    Ok(t)
}

pub fn analytic_row(cfg: &ExperimentConfig) -> Result<MethodRow> {
    let radius = circle_only(cfg, "the analytic optimum")?;
    let b = analytic_circle_optimum(radius)?;
    Ok(MethodRow::from_phi("Analytic", b.phi.expect("analytic carries φ"), radius))
}

/// Everything a command computed, for metadata and integrity checks.
#[derive(Debug, Default)]
pub struct RunData {
    pub sweep: Option<MethodRow>,
    pub heuristics: Vec<HeuristicRun>,
    pub rl: Vec<AlgoRuns>,
    pub band: Option<Band>,
}

/// Computes and renders the artifacts of `cmd` for the configured task.
pub fn build(cfg: &ExperimentConfig, cmd: &Command) -> Result<(Outputs, RunData)> {
    let mut out = Outputs::new(cfg.out.join(cfg.task.tag()));
    let mut data = RunData::default();
    let slug = cmd.slug();
    match cmd {
        Command::Sweep => {
            let (row, curve) = run_sweep(cfg)?;
            out.add_table("sweep_curve.csv", &curve);
            out.add_table("method_sweep.csv", &summary_table(std::slice::from_ref(&row)));
            data.sweep = Some(row);
        }
        Command::Heuristic(h) => {
            let run = run_heuristic(cfg, *h)?;
            add_heuristic(&mut out, &run);
            data.heuristics.push(run);
        }
        Command::Rl(a) => {
            let env = environment(cfg)?;
            data.band = env.band();
            data.rl = train_all(cfg, &env, &[*a])?;
            add_rl(&mut out, cfg, &data.rl);
        }
        Command::Baseline(b) => {
            out.add_table(format!("baseline_{}.csv", b.slug()), &baselines_table(cfg, &[*b])?);
        }
        Command::RunAll => {
            let env = environment(cfg)?;
            data.band = env.band();
            if cfg.task == TaskKind::Circle {
                let (row, curve) = run_sweep(cfg)?;
                out.add_table("sweep_curve.csv", &curve);
                data.sweep = Some(row);
                for h in Heuristic::ALL {
                    let run = run_heuristic(cfg, h)?;
                    add_heuristic(&mut out, &run);
                    data.heuristics.push(run);
                }
            }
            data.rl = train_all(cfg, &env, &Algorithm::ALL)?;
            add_rl(&mut out, cfg, &data.rl);
            out.add_table(format!("baselines_{}.csv", cfg.task.tag()), &baselines_table(cfg, applicable_baselines(cfg.task))?);
            if cfg.task == TaskKind::Circle {
                let mut rows = vec![data.sweep.clone().expect("sweep ran")];
                rows.extend(data.heuristics.iter().map(|h| h.row.clone()));
                rows.extend(data.rl.iter().map(circle_rl_row));
                rows.push(analytic_row(cfg)?);
                out.add_table(SUMMARY_FILE, &summary_table(&rows));
            } else {
                let band = data.band.expect("path task has a band");
                out.add_table(combined_file(cfg.task), &combined_table(&data.rl));
                out.add_table(annulus_file(cfg.task), &annulus_table(&data.rl, band));
            }
            crate::integrity::verify(cfg, &out, &data)?;
        }
    }
    let meta_name = if *cmd == Command::RunAll { "run_metadata.json".to_string() } else { format!("run_metadata_{slug}.json") };
    let meta = metadata::render(cfg, &slug, &out, &data);
    out.files.insert(meta_name, meta);
    Ok((out, data))
}

fn add_heuristic(out: &mut Outputs, run: &HeuristicRun) {
    out.add_table(format!("trace_{}.csv", run.heuristic.slug()), &trace_table(&run.result));
    out.add_table(format!("method_{}.csv", run.heuristic.slug()), &summary_table(std::slice::from_ref(&run.row)));
}

fn add_rl(out: &mut Outputs, cfg: &ExperimentConfig, runs: &[AlgoRuns]) {
    for r in runs {
        out.add_table(seeds_file(r.algorithm), &seeds_table(r));
        for rec in &r.records {
            out.add_table(curves_file(r.algorithm, rec.seed), &curves_table(rec, cfg.ma_window));
        }
    }
}

pub fn summary_table(rows: &[MethodRow]) -> Table {
    let mut t = Table::new(&SUMMARY_HEADER);
    for r in rows {
        t.push(r.cells());
    }
    t
}

/// Runs `cmd` and writes its files; returns the written paths.
pub fn execute(cfg: &ExperimentConfig, cmd: &Command) -> Result<Vec<PathBuf>> {
    let (out, _) = build(cfg, cmd)?;
    out.write()
}

/// Runs every method on each task in `tasks`, one directory per task.
pub fn run_all(cfg: &ExperimentConfig, tasks: &[TaskKind]) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for &task in tasks {
        let c = ExperimentConfig { task, ..cfg.clone() };
        written.extend(execute(&c, &Command::RunAll)?);
    }
    Ok(written)
}

/// Directory that holds the outputs of `task` under `root`.
pub fn task_dir(root: &Path, task: TaskKind) -> PathBuf {
    root.join(task.tag())
}
