//! Long-format plot data and charts from finished runs.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use morphopt::rl::{Algorithm, L_MAX, L_MIN};

use crate::config::TaskKind;
use crate::csvout::{fmt6, Table};
use crate::error::{HarnessError, Result};
use crate::runner::{
    annulus_file, combined_file, seeds_file, ANNULUS_HEADER, COMBINED_HEADER, SEEDS_HEADER, SUMMARY_FILE,
    SUMMARY_HEADER,
};
use crate::svg::{Chart, PALETTE};

pub const REPORT_DIR: &str = "report";

/// Per-algorithm deviation points with the BEST and GREEDY deviations.
type DeviationSeries = (Algorithm, Vec<(f64, f64)>, Vec<f64>, Vec<f64>);

struct Loaded {
    path: PathBuf,
    table: Table,
}

impl Loaded {
    fn read(dir: &Path, name: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(name);
        let table = Table::read(&path)?;
        table.expect_header(&path, header)?;
        if table.rows.is_empty() {
            return Err(HarnessError::Malformed { path, msg: "no data rows".into() });
        }
        Ok(Self { path, table })
    }

    fn num(&self, row: usize, col: &str) -> Result<f64> {
        self.table.num(&self.path, row, col)
    }

    fn text(&self, row: usize, col: &str) -> Result<&str> {
        self.table.text(&self.path, row, col)
    }

    fn rows(&self) -> usize {
        self.table.rows.len()
    }
}

struct CircleInputs {
    summary: Loaded,
    seeds: Vec<(Algorithm, Loaded)>,
}

struct PathInputs {
    task: TaskKind,
    combined: Loaded,
    annulus: Loaded,
}

fn primary_file(task: TaskKind) -> String {
    match task {
        TaskKind::Circle => SUMMARY_FILE.to_string(),
        t => combined_file(t),
    }
}

/// Task directories under `dir`, or `dir` itself when it holds one task.
fn discover(dir: &Path) -> Result<Vec<(TaskKind, PathBuf)>> {
    if !dir.is_dir() {
        return Err(HarnessError::MissingInput(dir.to_path_buf()));
    }
    let mut found: Vec<(TaskKind, PathBuf)> =
        TaskKind::ALL.iter().filter(|t| dir.join(t.tag()).is_dir()).map(|&t| (t, dir.join(t.tag()))).collect();
    if found.is_empty() {
        found = TaskKind::ALL.iter().filter(|&&t| dir.join(primary_file(t)).is_file()).map(|&t| (t, dir.to_path_buf())).collect();
    }
    if found.is_empty() {
        return Err(HarnessError::MissingInput(dir.join(TaskKind::Circle.tag()).join(SUMMARY_FILE)));
    }
    Ok(found)
}

fn load_circle(dir: &Path) -> Result<CircleInputs> {
    let summary = Loaded::read(dir, SUMMARY_FILE, &SUMMARY_HEADER)?;
    let seeds = Algorithm::ALL
        .iter()
        .map(|&a| Loaded::read(dir, &seeds_file(a), &SEEDS_HEADER).map(|l| (a, l)))
        .collect::<Result<_>>()?;
    Ok(CircleInputs { summary, seeds })
}

fn load_path(task: TaskKind, dir: &Path) -> Result<PathInputs> {
    Ok(PathInputs {
        task,
        combined: Loaded::read(dir, &combined_file(task), &COMBINED_HEADER)?,
        annulus: Loaded::read(dir, &annulus_file(task), &ANNULUS_HEADER)?,
    })
}

type Files = BTreeMap<String, Vec<u8>>;

fn circle_report(c: &CircleInputs, svg: bool, files: &mut Files) -> Result<()> {
    let mut curve = Table::new(&["phi_deg", "sin2phi"]);
    let curve_pts: Vec<(f64, f64)> = (0..=360).map(|i| {
        let deg = 0.25 * i as f64;
        (deg, (2.0 * deg * PI / 180.0).sin())
    }).collect();
    for &(d, s) in &curve_pts {
        curve.push(vec![fmt6(d), fmt6(s)]);
    }

    let mut endpoints = Table::new(&["method", "seed", "kind", "phi_deg", "w_norm"]);
    for i in 0..c.summary.rows() {
        endpoints.push(vec![
            c.summary.text(i, "Method")?.to_string(),
            String::new(),
            "summary".into(),
            fmt6(c.summary.num(i, "phi_deg")?),
            fmt6(c.summary.num(i, "w_norm")?),
        ]);
    }
    let mut deviation = Table::new(&["algo", "seed", "kind", "abs_dev_deg"]);
    let mut chart_pts: Vec<DeviationSeries> = Vec::new();
    for (algo, l) in &c.seeds {
        let (mut pts, mut best_dev, mut greedy_dev) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..l.rows() {
            let seed = l.text(i, "seed")?.to_string();
            for (kind, phi_col, r_col) in [("BEST", "best_phi_deg", "best_reward"), ("GREEDY", "greedy_phi_deg", "greedy_reward")] {
                let phi = l.num(i, phi_col)?;
                let w = l.num(i, r_col)?;
                endpoints.push(vec![algo.label().into(), seed.clone(), kind.into(), fmt6(phi), fmt6(w)]);
                let dev = (phi - 45.0).abs();
                deviation.push(vec![algo.label().into(), seed.clone(), kind.into(), fmt6(dev)]);
                if kind == "BEST" {
                    best_dev.push(dev);
                } else {
                    greedy_dev.push(dev);
                    pts.push((phi, w));
                }
            }
        }
        chart_pts.push((*algo, pts, best_dev, greedy_dev));
    }
    files.insert("analytic_curve.csv".into(), curve.to_bytes());
    files.insert("endpoints.csv".into(), endpoints.to_bytes());
    files.insert("deviation.csv".into(), deviation.to_bytes());

    if svg {
        let mut ch = Chart::new("GREEDY endpoints on the sin 2φ curve", "φ (deg)", "w_norm", (0.0, 90.0), (0.0, 1.05));
        ch.line(&curve_pts, PALETTE[3], false);
        ch.legend("sin 2φ", PALETTE[3]);
        for (k, (algo, pts, _, _)) in chart_pts.iter().enumerate() {
            ch.points(pts, PALETTE[k]);
            ch.legend(algo.label(), PALETTE[k]);
        }
        files.insert("endpoints.svg".into(), ch.render().into_bytes());

        let max_dev = chart_pts.iter().flat_map(|(_, _, b, g)| b.iter().chain(g)).fold(0.0f64, |m, &d| m.max(d));
        let ticks = chart_pts.iter().enumerate().map(|(k, (a, ..))| (k as f64, a.label().to_string())).collect();
        let mut ch = Chart::new("|φ − 45°| per seed", "algorithm", "deviation (deg)", (-0.5, 2.5), (0.0, (1.1 * max_dev).max(1e-3)))
            .x_categories(ticks);
        for (k, (_, _, best, greedy)) in chart_pts.iter().enumerate() {
            for (j, d) in best.iter().enumerate() {
                let x = k as f64 - 0.3 + 0.05 * j as f64;
                ch.segment((x, 0.0), (x, *d), PALETTE[0], 4.0);
            }
            for (j, d) in greedy.iter().enumerate() {
                let x = k as f64 + 0.05 + 0.05 * j as f64;
                ch.segment((x, 0.0), (x, *d), PALETTE[1], 4.0);
            }
        }
        ch.legend("BEST", PALETTE[0]);
        ch.legend("GREEDY", PALETTE[1]);
        files.insert("deviation.svg".into(), ch.render().into_bytes());
    }
    Ok(())
}

fn path_report(inputs: &[PathInputs], svg: bool, files: &mut Files) -> Result<()> {
    let mut annulus = Table::new(&["task", "series", "r_inner", "r_inner_std", "r_outer", "r_outer_std"]);
    let mut morph = Table::new(&["task", "series", "L1_m", "L1_std", "L2_m", "L2_std"]);
    for p in inputs {
        let tag = p.task.tag();
        let mut intervals = Vec::new();
        for i in 0..p.annulus.rows() {
            let (lo, hi) = (p.annulus.num(i, "rmin_mean")?, p.annulus.num(i, "rmax_mean")?);
            annulus.push(vec![
                tag.into(),
                p.annulus.text(i, "algo")?.into(),
                fmt6(lo),
                fmt6(p.annulus.num(i, "rmin_std")?),
                fmt6(hi),
                fmt6(p.annulus.num(i, "rmax_std")?),
            ]);
            intervals.push((p.annulus.text(i, "algo")?.to_string(), lo, hi));
        }
        let (b, a) = (p.annulus.num(0, "band_b")?, p.annulus.num(0, "band_a")?);
        annulus.push(vec![tag.into(), "Band".into(), fmt6(b), fmt6(0.0), fmt6(a), fmt6(0.0)]);
        intervals.push(("Band".into(), b, a));

        let mut means = Vec::new();
        for i in 0..p.combined.rows() {
            let (l1, l2) = (p.combined.num(i, "L1_mean")?, p.combined.num(i, "L2_mean")?);
            morph.push(vec![
                tag.into(),
                p.combined.text(i, "algo")?.into(),
                fmt6(l1),
                fmt6(p.combined.num(i, "L1_std")?),
                fmt6(l2),
                fmt6(p.combined.num(i, "L2_std")?),
            ]);
            means.push((p.combined.text(i, "algo")?.to_string(), l1, l2));
        }
        for l in [L_MIN, L_MAX] {
            morph.push(vec![tag.into(), "diagonal".into(), fmt6(l), fmt6(0.0), fmt6(l), fmt6(0.0)]);
        }

        if svg {
            let hi = intervals.iter().fold(0.0f64, |m, i| m.max(i.2));
            let ticks = intervals.iter().enumerate().map(|(k, i)| (k as f64, i.0.clone())).collect();
            let mut ch = Chart::new(&format!("Reachable annulus vs band ({tag})"), "series", "radius (m)", (-0.5, intervals.len() as f64 - 0.5), (0.0, 1.1 * hi))
                .x_categories(ticks);
            for (k, (_, lo, hi)) in intervals.iter().enumerate() {
                let color = if k + 1 == intervals.len() { PALETTE[3] } else { PALETTE[k % 3] };
                ch.segment((k as f64, *lo), (k as f64, *hi), color, 14.0);
            }
            files.insert(format!("annulus_{tag}.svg"), ch.render().into_bytes());

            let mut ch = Chart::new(&format!("Mean GREEDY morphology ({tag})"), "L1 (m)", "L2 (m)", (L_MIN, L_MAX), (L_MIN, L_MAX));
            ch.line(&[(L_MIN, L_MIN), (L_MAX, L_MAX)], PALETTE[3], true);
            ch.legend("L1 = L2", PALETTE[3]);
            for (k, (name, l1, l2)) in means.iter().enumerate() {
                ch.points(&[(*l1, *l2)], PALETTE[k % 3]);
                ch.legend(name, PALETTE[k % 3]);
            }
            files.insert(format!("morphology_{tag}.svg"), ch.render().into_bytes());
        }
    }
    files.insert("annulus_long.csv".into(), annulus.to_bytes());
    files.insert("morphology.csv".into(), morph.to_bytes());
    Ok(())
}

/// Reads the run outputs under `dir` and writes plot data into `dir/report`.
/// All inputs are validated before anything is written.
pub fn report(dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    let found = discover(dir)?;
    let mut circle = None;
    let mut paths = Vec::new();
    for (task, d) in &found {
        match task {
            TaskKind::Circle => circle = Some(load_circle(d)?),
            t => paths.push(load_path(*t, d)?),
        }
    }
    let mut files = Files::new();
    if let Some(c) = &circle {
        circle_report(c, svg, &mut files)?;
    }
    if !paths.is_empty() {
        path_report(&paths, svg, &mut files)?;
    }
    let out = dir.join(REPORT_DIR);
    std::fs::create_dir_all(&out).map_err(|source| HarnessError::Write { path: out.clone(), source })?;
    let mut written = Vec::new();
    for (name, bytes) in files {
        let p = out.join(name);
        std::fs::write(&p, bytes).map_err(|source| HarnessError::Write { path: p.clone(), source })?;
        written.push(p);
    }
    Ok(written)
}
