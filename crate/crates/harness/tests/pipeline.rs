use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use morphopt_harness::csvout::Table;
use morphopt_harness::runner::{self, build, Command};
use morphopt_harness::{integrity, metadata, report, ExperimentConfig, HarnessError, TaskKind};

fn small_config(out: &Path) -> ExperimentConfig {
    let cfg = ExperimentConfig { seeds: vec![1, 2, 3], episodes: 300, out: out.to_path_buf(), ..Default::default() };
    cfg.resolve(&Default::default()).unwrap()
}

/// Every file under `root`, keyed by its path relative to `root`.
fn read_all(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn table(dir: &Path, name: &str) -> Table {
    Table::read(&dir.join(name)).unwrap()
}

#[test]
fn run_all_schema_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    runner::run_all(&cfg, &TaskKind::ALL).unwrap();

    for (path, bytes) in read_all(tmp.path()) {
        assert!(!bytes.contains(&b'\r'), "{path:?} has CR");
        assert_eq!(bytes.last(), Some(&b'\n'), "{path:?} lacks a final LF");
        if path.extension().is_some_and(|e| e == "csv") {
            let text = String::from_utf8(bytes).unwrap();
            for cell in text.lines().skip(1).flat_map(|l| l.split(',')) {
                if let Some((_, frac)) = cell.split_once('.') {
                    assert_eq!(frac.len(), 6, "{path:?}: {cell}");
                }
            }
        }
    }

    let circle = tmp.path().join("circle");
    let s = table(&circle, "circle_summary_methods.csv");
    assert_eq!(s.header, ["Method", "phi_deg", "L1_m", "L2_m", "w_norm"]);
    let methods: Vec<&str> = s.rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(methods, ["Sweep", "PSO", "BO", "CMA-ES", "SAC", "DDPG", "PPO", "Analytic"]);
    assert_eq!(s.rows[7], ["Analytic", "45.000000", "0.282843", "0.282843", "1.000000"]);

    for (task, band) in [(TaskKind::Ellipse, ("0.250000", "0.400000")), (TaskKind::Rect, ("0.200000", "0.403113"))] {
        let dir = tmp.path().join(task.tag());
        let c = table(&dir, &runner::combined_file(task));
        assert_eq!(c.header, ["algo", "L1_mean", "L1_std", "L2_mean", "L2_std", "R_mean", "R_std"]);
        let algos: Vec<&str> = c.rows.iter().map(|r| r[0].as_str()).collect();
        assert_eq!(algos, ["SAC", "DDPG", "PPO"]);
        for r in &c.rows {
            assert!(r[1..].iter().all(|v| v.parse::<f64>().unwrap().is_finite()));
        }
        let a = table(&dir, &runner::annulus_file(task));
        assert_eq!(a.header, ["algo", "rmin_mean", "rmin_std", "rmax_mean", "rmax_std", "band_b", "band_a"]);
        for r in &a.rows {
            assert_eq!((r[5].as_str(), r[6].as_str()), band);
        }
        let curve = table(&dir, "curves_sac_2.csv");
        assert_eq!(curve.header, ["episode", "reward", "reward_ma100"]);
        assert_eq!(curve.rows.len(), 300);
        let cfg_back = metadata::load_config(&dir.join("run_metadata.json")).unwrap();
        assert_eq!(cfg_back.hash(), ExperimentConfig { task, ..cfg.clone() }.hash());
    }

    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(circle.join("run_metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["eval_counts"]["PSO"], 3630);
    assert_eq!(meta["eval_counts"]["BO"], 45);
    assert_eq!(meta["eval_counts"]["CMA-ES"], 720);
    for f in meta["files"].as_array().unwrap() {
        let bytes = std::fs::read(circle.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"], runner::Outputs::sha256(&bytes));
    }

    report::report(tmp.path(), true).unwrap();
    let rep = tmp.path().join(report::REPORT_DIR);
    let dev = table(&rep, "deviation.csv");
    assert_eq!(dev.header, ["algo", "seed", "kind", "abs_dev_deg"]);
    assert_eq!(dev.rows.len(), 3 * 3 * 2);
    for algo in ["SAC", "DDPG", "PPO"] {
        for seed in ["1", "2", "3"] {
            for kind in ["BEST", "GREEDY"] {
                let n = dev.rows.iter().filter(|r| r[0] == algo && r[1] == seed && r[2] == kind).count();
                assert_eq!(n, 1, "{algo} {seed} {kind}");
            }
        }
    }
    let ann = table(&rep, "annulus_long.csv");
    let band = ann.rows.iter().find(|r| r[0] == "ellipse" && r[1] == "Band").unwrap();
    assert_eq!((band[2].as_str(), band[4].as_str()), ("0.250000", "0.400000"));
    let morph = table(&rep, "morphology.csv");
    assert_eq!(morph.rows.iter().filter(|r| r[1] == "diagonal").count(), 4);
    for svg in ["endpoints.svg", "deviation.svg", "annulus_ellipse.svg", "morphology_rectangle.svg"] {
        let text = std::fs::read_to_string(rep.join(svg)).unwrap();
        assert!(text.starts_with("<svg") && text.ends_with("</svg>\n"));
    }
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let cfg = ExperimentConfig { seeds: vec![2, 5], episodes: 120, ..small_config(dir.path()) }
            .resolve(&Default::default())
            .unwrap();
        runner::run_all(&cfg, &TaskKind::ALL).unwrap();
        report::report(dir.path(), true).unwrap();
    }
    let (fa, fb) = (read_all(a.path()), read_all(b.path()));
    assert_eq!(fa.len(), 56, "{:?}", fa.keys());
    assert_eq!(fa.keys().collect::<Vec<_>>(), fb.keys().collect::<Vec<_>>());
    for (k, v) in &fa {
        assert!(v == &fb[k], "{k:?} differs between runs");
    }
}

#[test]
fn integrity_check_catches_tampering() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { task: TaskKind::Ellipse, seeds: vec![1, 2], episodes: 60, ..small_config(tmp.path()) };
    let (mut out, data) = build(&cfg, &Command::RunAll).unwrap();
    integrity::verify(&cfg, &out, &data).unwrap();
    let name = runner::combined_file(TaskKind::Ellipse);
    let text = String::from_utf8(out.files[&name].clone()).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let mut cells: Vec<String> = lines[2].split(',').map(str::to_string).collect();
    let l1: f64 = cells[1].parse().unwrap();
    cells[1] = format!("{:.6}", l1 + 1e-6);
    lines[2] = cells.join(",");
    out.files.insert(name, format!("{}\n", lines.join("\n")).into_bytes());
    assert!(matches!(integrity::verify(&cfg, &out, &data), Err(HarnessError::Integrity(_))));
}

#[test]
fn single_seed_std_is_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { task: TaskKind::Rect, seeds: vec![3], episodes: 40, ..small_config(tmp.path()) };
    let (out, _) = build(&cfg, &Command::RunAll).unwrap();
    let text = String::from_utf8(out.files[&runner::combined_file(TaskKind::Rect)].clone()).unwrap();
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!((cells[2], cells[4], cells[6]), ("0.000000", "0.000000", "0.000000"));
    }
}

#[test]
fn report_requires_every_input() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { task: TaskKind::Circle, seeds: vec![1], episodes: 30, ..small_config(tmp.path()) };
    runner::execute(&cfg, &Command::RunAll).unwrap();
    let victim = tmp.path().join("circle").join("seeds_ppo.csv");
    std::fs::remove_file(&victim).unwrap();
    match report::report(tmp.path(), true) {
        Err(HarnessError::MissingInput(p)) => assert_eq!(p, victim),
        other => panic!("expected a missing-input error, got {other:?}"),
    }
    assert!(!tmp.path().join(report::REPORT_DIR).exists());

    std::fs::write(&victim, "seed,oops\n1,2\n").unwrap();
    assert!(matches!(report::report(tmp.path(), false), Err(HarnessError::Malformed { .. })));
    assert!(!tmp.path().join(report::REPORT_DIR).exists());
}

#[test]
fn report_accepts_a_single_task_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { task: TaskKind::Ellipse, seeds: vec![1, 2], episodes: 30, ..small_config(tmp.path()) };
    runner::execute(&cfg, &Command::RunAll).unwrap();
    let dir = tmp.path().join("ellipse");
    let written = report::report(&dir, false).unwrap();
    assert!(written.iter().all(|p| p.extension().unwrap() == "csv"));
    assert!(dir.join("report").join("annulus_long.csv").is_file());
}
