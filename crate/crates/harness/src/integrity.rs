//! Re-derives every written aggregate from the training records.

use morphopt::rl::TrainRecord;

use crate::config::{ExperimentConfig, TaskKind};
use crate::csvout::Table;
use crate::error::{HarnessError, Result};
use crate::runner::{
    annulus_file, circle_rl_row, combined_file, curves_file, environment, phi_deg, seeds_file, AlgoRuns, Outputs,
    RunData, SeedSummary, SUMMARY_FILE,
};
use crate::stats::mean_std;

/// Agreement required between two independent computations of a statistic.
pub const STAT_TOL: f64 = 1e-12;
/// Largest gap between a value and its six-decimal rendering.
const PRINT_TOL: f64 = 5e-7 + 1e-12;

/// Single-pass mean and sample standard deviation.
fn welford(xs: &[f64]) -> (f64, f64) {
    let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
    for &x in xs {
        n += 1.0;
        let d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    let std = if n < 2.0 { 0.0 } else { (m2 / (n - 1.0)).sqrt() };
    (mean, std)
}

struct Checker<'a> {
    out: &'a Outputs,
}

impl Checker<'_> {
    fn table(&self, name: &str) -> Result<Table> {
        let bytes = self.out.files.get(name).ok_or_else(|| HarnessError::Integrity(format!("{name} was not produced")))?;
        let path = self.out.dir.join(name);
        let mut r = csv::ReaderBuilder::new().from_reader(bytes.as_slice());
        let malformed = |e: csv::Error| HarnessError::Malformed { path: path.clone(), msg: e.to_string() };
        let header = r.headers().map_err(malformed)?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()).map_err(malformed))
            .collect::<Result<_>>()?;
        Ok(Table { header, rows })
    }

    fn printed(&self, name: &str, t: &Table, row: usize, col: &str, value: f64) -> Result<()> {
        let got = t.num(&self.out.dir.join(name), row, col)?;
        if (got - value).abs() <= PRINT_TOL {
            Ok(())
        } else {
            Err(HarnessError::Integrity(format!("{name} row {row} {col}: file has {got}, records give {value}")))
        }
    }

    /// Checks a (mean, std) pair both against the independent recomputation
    /// and against the printed cells.
    fn aggregate(&self, name: &str, t: &Table, row: usize, cols: (&str, &str), xs: &[f64]) -> Result<()> {
        let (m1, s1) = mean_std(xs);
        let (m2, s2) = welford(xs);
        if (m1 - m2).abs() > STAT_TOL || (s1 - s2).abs() > STAT_TOL {
            return Err(HarnessError::Integrity(format!(
                "{name} row {row}: aggregate ({m1}, {s1}) disagrees with recomputation ({m2}, {s2})"
            )));
        }
        self.printed(name, t, row, cols.0, m2)?;
        self.printed(name, t, row, cols.1, s2)
    }
}

fn check_record(rec: &TrainRecord, summary: &SeedSummary, env: &morphopt::rl::BanditEnv) -> Result<()> {
    let fail = |m: String| Err(HarnessError::Integrity(format!("{} seed {}: {m}", rec.algorithm.label(), rec.seed)));
    let max = rec.rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if rec.rewards.get(rec.best_episode) != Some(&rec.best_reward) || rec.best_reward != max {
        return fail(format!("best reward {} is not the episode maximum {max}", rec.best_reward));
    }
    let g = env.reward(&rec.greedy_action);
    if g != rec.greedy_reward || g != summary.greedy_reward {
        return fail(format!("greedy reward {} does not re-evaluate ({g})", rec.greedy_reward));
    }
    Ok(())
}

fn check_algo(c: &Checker, cfg: &ExperimentConfig, runs: &AlgoRuns) -> Result<()> {
    let name = seeds_file(runs.algorithm);
    let t = c.table(&name)?;
    for (i, s) in runs.seeds.iter().enumerate() {
        c.printed(&name, &t, i, "best_phi_deg", phi_deg(&s.best))?;
        c.printed(&name, &t, i, "greedy_L1_m", s.greedy.morphology.l1)?;
        c.printed(&name, &t, i, "greedy_L2_m", s.greedy.morphology.l2)?;
        c.printed(&name, &t, i, "greedy_reward", s.greedy_reward)?;
    }
    for rec in &runs.records {
        let name = curves_file(runs.algorithm, rec.seed);
        let t = c.table(&name)?;
        if t.rows.len() != rec.rewards.len() {
            return Err(HarnessError::Integrity(format!("{name} has {} rows for {} episodes", t.rows.len(), rec.rewards.len())));
        }
        let ma_col = format!("reward_ma{}", cfg.ma_window);
        for (i, &r) in rec.rewards.iter().enumerate() {
            let lo = (i + 1).saturating_sub(cfg.ma_window);
            let window = &rec.rewards[lo..=i];
            c.printed(&name, &t, i, "reward", r)?;
            c.printed(&name, &t, i, &ma_col, window.iter().sum::<f64>() / window.len() as f64)?;
        }
    }
    Ok(())
}

/// Errors unless every written number matches its source to the print precision
/// and every aggregate matches an independent recomputation to [`STAT_TOL`].
pub fn verify(cfg: &ExperimentConfig, out: &Outputs, data: &RunData) -> Result<()> {
    let c = Checker { out };
    let env = environment(cfg)?;
    for runs in &data.rl {
        for (rec, s) in runs.records.iter().zip(&runs.seeds) {
            check_record(rec, s, &env)?;
        }
        check_algo(&c, cfg, runs)?;
    }
    if cfg.task == TaskKind::Circle {
        let t = c.table(SUMMARY_FILE)?;
        let mut row = 0;
        let mut expect = |method: &str, vals: [f64; 4], t: &Table| -> Result<()> {
            let path = out.dir.join(SUMMARY_FILE);
            if t.text(&path, row, "Method")? != method {
                return Err(HarnessError::Integrity(format!("{SUMMARY_FILE} row {row} should be {method}")));
            }
            for (col, v) in ["phi_deg", "L1_m", "L2_m", "w_norm"].iter().zip(vals) {
                c.printed(SUMMARY_FILE, t, row, col, v)?;
            }
            row += 1;
            Ok(())
        };
        if let Some(s) = &data.sweep {
            expect("Sweep", [s.phi_deg, s.l1, s.l2, s.w_norm], &t)?;
        }
        for h in &data.heuristics {
            let r = &h.row;
            expect(&r.method, [r.phi_deg, r.l1, r.l2, r.w_norm], &t)?;
        }
        for runs in &data.rl {
            let (phi, _) = welford(&runs.column(|s| phi_deg(&s.best)));
            let (l1, _) = welford(&runs.column(|s| s.best.morphology.l1));
            let (l2, _) = welford(&runs.column(|s| s.best.morphology.l2));
            let (w, _) = welford(&runs.column(|s| s.best_reward));
            let row = circle_rl_row(runs);
            for (a, b) in [(phi, row.phi_deg), (l1, row.l1), (l2, row.l2), (w, row.w_norm)] {
                if (a - b).abs() > STAT_TOL {
                    return Err(HarnessError::Integrity(format!("{} summary mean {b} vs recomputed {a}", runs.algorithm.label())));
                }
            }
            expect(runs.algorithm.label(), [phi, l1, l2, w], &t)?;
        }
        let path = out.dir.join(SUMMARY_FILE);
        let cells = (t.text(&path, row, "Method")?, t.text(&path, row, "phi_deg")?, t.text(&path, row, "w_norm")?);
        if cells != ("Analytic", "45.000000", "1.000000") || t.rows.len() != row + 1 {
            return Err(HarnessError::Integrity(format!("{SUMMARY_FILE} must end with the exact Analytic row")));
        }
    } else {
        let name = combined_file(cfg.task);
        let t = c.table(&name)?;
        let band = env.band().expect("path task has a band");
        for (i, runs) in data.rl.iter().enumerate() {
            c.aggregate(&name, &t, i, ("L1_mean", "L1_std"), &runs.column(|s| s.greedy.morphology.l1))?;
            c.aggregate(&name, &t, i, ("L2_mean", "L2_std"), &runs.column(|s| s.greedy.morphology.l2))?;
            c.aggregate(&name, &t, i, ("R_mean", "R_std"), &runs.column(|s| s.greedy_reward))?;
        }
        let name = annulus_file(cfg.task);
        let t = c.table(&name)?;
        for (i, runs) in data.rl.iter().enumerate() {
            c.aggregate(&name, &t, i, ("rmin_mean", "rmin_std"), &runs.column(|s| s.greedy.morphology.annulus().r_min))?;
            c.aggregate(&name, &t, i, ("rmax_mean", "rmax_std"), &runs.column(|s| s.greedy.morphology.annulus().r_max))?;
            c.printed(&name, &t, i, "band_b", band.b)?;
            c.printed(&name, &t, i, "band_a", band.a)?;
        }
    }
    Ok(())
}
