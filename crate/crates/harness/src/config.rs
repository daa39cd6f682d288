use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use morphopt::baselines::DEFAULT_SWEEP_POINTS;
use morphopt::blackbox::{BoSettings, CmaesSettings, PsoSettings};
use morphopt::reward::RewardWeights;
use morphopt::rl::RlSettings;
use morphopt::taskpath::{EllipseSampling, TaskPath, DEFAULT_SAMPLES};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Circle,
    Ellipse,
    #[serde(alias = "rectangle")]
    Rect,
}

impl TaskKind {
    pub const ALL: [TaskKind; 3] = [TaskKind::Circle, TaskKind::Ellipse, TaskKind::Rect];

    /// Name used in output file and directory names.
    pub fn tag(self) -> &'static str {
        match self {
            TaskKind::Circle => "circle",
            TaskKind::Ellipse => "ellipse",
            TaskKind::Rect => "rectangle",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for TaskKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(TaskKind::Circle),
            "ellipse" => Ok(TaskKind::Ellipse),
            "rect" | "rectangle" => Ok(TaskKind::Rect),
            other => Err(HarnessError::Config(format!("unknown task '{other}' (circle, ellipse, rect)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    pub circle_radius: f64,
    pub ellipse_a: f64,
    pub ellipse_b: f64,
    pub rect_width: f64,
    pub rect_height: f64,
    pub samples: usize,
    pub ellipse_sampling: EllipseSampling,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            circle_radius: 0.40,
            ellipse_a: 0.40,
            ellipse_b: 0.25,
            rect_width: 0.70,
            rect_height: 0.40,
            samples: DEFAULT_SAMPLES,
            ellipse_sampling: EllipseSampling::Parameter,
        }
    }
}

impl Geometry {
    pub fn task_path(&self, kind: TaskKind) -> Result<TaskPath> {
        let t = match kind {
            TaskKind::Circle => TaskPath::circle(self.circle_radius)?,
            TaskKind::Ellipse => TaskPath::ellipse(self.ellipse_a, self.ellipse_b)?,
            TaskKind::Rect => TaskPath::rectangle(self.rect_width, self.rect_height)?,
        };
        Ok(t.with_samples(self.samples).with_ellipse_sampling(self.ellipse_sampling))
    }
}

/// Everything a run needs. Unset keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub seeds: Vec<u64>,
    /// Seed for PSO, BO and CMA-ES.
    pub heuristic_seed: u64,
    pub episodes: usize,
    pub out: PathBuf,
    pub sweep_points: usize,
    /// Trailing window of the smoothed training curve.
    pub ma_window: usize,
    pub svg: bool,
    pub geometry: Geometry,
    pub weights: RewardWeights,
    pub pso: PsoSettings,
    pub bo: BoSettings,
    pub cmaes: CmaesSettings,
    pub rl: RlSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: TaskKind::Circle,
            seeds: vec![1, 2, 3, 4, 5],
            heuristic_seed: 0,
            episodes: 5000,
            out: PathBuf::from("runs"),
            sweep_points: DEFAULT_SWEEP_POINTS,
            ma_window: 100,
            svg: true,
            geometry: Geometry::default(),
            weights: RewardWeights::default(),
            pso: PsoSettings::default(),
            bo: BoSettings::default(),
            cmaes: CmaesSettings::default(),
            rl: RlSettings::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub task: Option<TaskKind>,
    pub seed: Option<u64>,
    pub episodes: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| HarnessError::Read { path: p.into(), source })?;
                Self::from_toml(&text)
            }
        }
    }

    /// Applies overrides, syncs the per-agent episode counts and validates.
    pub fn resolve(mut self, o: &Overrides) -> Result<Self> {
        if let Some(t) = o.task {
            self.task = t;
        }
        if let Some(s) = o.seed {
            self.seeds = vec![s];
            self.heuristic_seed = s;
        }
        if let Some(e) = o.episodes {
            self.episodes = e;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        self.rl = self.rl.with_episodes(self.episodes);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::Config(m.to_string()));
        if self.seeds.is_empty() {
            return bad("at least one seed is required");
        }
        let mut uniq = self.seeds.clone();
        uniq.sort_unstable();
        uniq.dedup();
        if uniq.len() != self.seeds.len() {
            return bad("seeds must be distinct");
        }
        if self.episodes == 0 {
            return bad("episodes must be positive");
        }
        if self.sweep_points < 2 {
            return bad("sweep_points must be at least 2");
        }
        if self.ma_window == 0 {
            return bad("ma_window must be positive");
        }
        if self.geometry.samples == 0 {
            return bad("geometry.samples must be positive");
        }
        let (rl, pso, bo, cm) = (&self.rl, &self.pso, &self.bo, &self.cmaes);
        if rl.sac.batch == 0 || rl.ddpg.batch == 0 || rl.ppo.batch == 0 || rl.ppo.minibatch == 0 || rl.ppo.epochs == 0 {
            return bad("RL batch sizes and epochs must be positive");
        }
        if pso.particles == 0 || cm.lambda == 0 || cm.mu == 0 || cm.mu > cm.lambda || bo.grid < 2 {
            return bad("heuristic population sizes must be positive (with mu <= lambda) and the BO grid at least 2");
        }
        for kind in TaskKind::ALL {
            self.geometry.task_path(kind)?;
        }
        Ok(())
    }

    pub fn rl_settings(&self) -> RlSettings {
        self.rl.clone().with_episodes(self.episodes)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The TOML form with the output location blanked, so that a run's
    /// identity does not depend on where it was written.
    pub fn canonical_toml(&self) -> String {
        ExperimentConfig { out: PathBuf::new(), ..self.clone() }.to_toml()
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical_toml().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = ExperimentConfig::default();
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c = ExperimentConfig::from_toml("episodes = 10\n[geometry]\nellipse_a = 0.5\n[rl.sac]\nalpha = 0.1\n").unwrap();
        assert_eq!(c.episodes, 10);
        assert_eq!(c.geometry.ellipse_a, 0.5);
        assert_eq!(c.geometry.ellipse_b, 0.25);
        assert_eq!(c.rl.sac.alpha, 0.1);
        assert_eq!(c.rl.sac.lr, 3e-4);
        let r = c.resolve(&Overrides::default()).unwrap();
        assert_eq!(r.rl.ppo.episodes, 10);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(matches!(ExperimentConfig::from_toml("epsiodes = 3"), Err(HarnessError::Config(_))));
        let c = ExperimentConfig { seeds: vec![], ..Default::default() };
        assert!(c.resolve(&Overrides::default()).is_err());
        let c = ExperimentConfig { seeds: vec![1, 1], ..Default::default() };
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.geometry.rect_width = -1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn overrides() {
        let o = Overrides { task: Some(TaskKind::Rect), seed: Some(3), episodes: Some(50), out: Some("x".into()) };
        let c = ExperimentConfig::default().resolve(&o).unwrap();
        assert_eq!(c.task, TaskKind::Rect);
        assert_eq!(c.seeds, vec![3]);
        assert_eq!(c.heuristic_seed, 3);
        assert_eq!(c.rl.sac.episodes, 50);
        assert_eq!(c.out, PathBuf::from("x"));
        assert_ne!(c.hash(), ExperimentConfig::default().hash());
        let moved = ExperimentConfig { out: "elsewhere".into(), ..c.clone() };
        assert_eq!(moved.hash(), c.hash());
    }

    #[test]
    fn task_names() {
        assert_eq!("rect".parse::<TaskKind>().unwrap().tag(), "rectangle");
        assert_eq!("rectangle".parse::<TaskKind>().unwrap(), TaskKind::Rect);
        assert!("square".parse::<TaskKind>().is_err());
    }
}
