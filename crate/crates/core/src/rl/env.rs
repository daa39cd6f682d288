use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{phi_to_lengths, Morphology, PhiParam, PHI_EPS};
use crate::reward::{circle_analytic_reward, evaluate, RewardBreakdown, RewardVariant, RewardWeights};
use crate::taskpath::{band_for, sample_path, Band, SampledPath, TaskPath, TaskShape};

/// Link-length box for the full morphology action.
pub const L_MIN: f64 = 0.05;
pub const L_MAX: f64 = 0.60;

/// `[one-hot kind (3), param1 / 1 m, param2 / 1 m]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Context(pub [f64; 5]);

impl Context {
    pub const DIM: usize = 5;

    pub fn for_task(t: &TaskPath) -> Self {
        let (p1, p2) = t.params();
        let kind = match t.shape {
            TaskShape::Circle { .. } => 0,
            TaskShape::Ellipse { .. } => 1,
            TaskShape::Rectangle { .. } => 2,
        };
        let mut v = [0.0; 5];
        v[kind] = 1.0;
        v[3] = p1 / 1.0;
        v[4] = p2 / 1.0;
        Self(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ActionSpec {
    /// `u ↦ φ = π/4 + (π/4 − ε) u` on a circle of the given radius.
    CirclePhi { radius: f64 },
    /// `u ↦ (L1, L2, θ2)` through the `[L_MIN, L_MAX]² × (0, π)` box.
    FullMorphology,
}

impl ActionSpec {
    pub fn dim(&self) -> usize {
        match self {
            ActionSpec::CirclePhi { .. } => 1,
            ActionSpec::FullMorphology => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MappedAction {
    pub morphology: Morphology,
    pub phi: Option<PhiParam>,
}

/// Affine map from the squashed action box to physical design parameters.
pub fn map_action(spec: &ActionSpec, u: &[f64]) -> MappedAction {
    assert_eq!(u.len(), spec.dim(), "action dimension");
    match *spec {
        ActionSpec::CirclePhi { radius } => {
            let phi = PhiParam::saturating(FRAC_PI_4 + (FRAC_PI_4 - PHI_EPS) * u[0]);
            let (l1, l2) = phi_to_lengths(phi, radius);
            MappedAction { morphology: Morphology { l1, l2, theta2_cmd: FRAC_PI_2 }, phi: Some(phi) }
        }
        ActionSpec::FullMorphology => {
            let mid = 0.5 * (L_MIN + L_MAX);
            let half = 0.5 * (L_MAX - L_MIN);
            let morphology = Morphology {
                l1: mid + half * u[0],
                l2: mid + half * u[1],
                theta2_cmd: FRAC_PI_2 + FRAC_PI_2 * u[2],
            };
            MappedAction { morphology, phi: None }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `sin 2φ` on the circle locus.
    CircleAnalytic,
    Path { path: SampledPath, band: Band, weights: RewardWeights, variant: RewardVariant },
}

/// A fixed task context, an action map and a pure reward.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditEnv {
    pub task: TaskPath,
    pub context: Context,
    pub spec: ActionSpec,
    pub objective: Objective,
}

impl BanditEnv {
    /// Circle: scalar φ action and the analytic reward.
    pub fn circle(task: TaskPath) -> Result<Self> {
        let TaskShape::Circle { radius } = task.shape else {
            return Err(Error::InvalidParameter(format!("{} task given to the circle environment", task.name())));
        };
        Ok(Self {
            context: Context::for_task(&task),
            spec: ActionSpec::CirclePhi { radius },
            objective: Objective::CircleAnalytic,
            task,
        })
    }

    /// Full morphology action scored on the sampled path.
    pub fn path(task: TaskPath, variant: RewardVariant, weights: RewardWeights) -> Result<Self> {
        if task.n_samples == 0 {
            return Err(Error::InvalidParameter("path needs at least one sample".into()));
        }
        Ok(Self {
            context: Context::for_task(&task),
            spec: ActionSpec::FullMorphology,
            objective: Objective::Path { path: sample_path(&task), band: band_for(&task), weights, variant },
            task,
        })
    }

    /// Circle tasks get the analytic setup, others the hybrid reward.
    pub fn for_task(task: TaskPath, weights: RewardWeights) -> Result<Self> {
        if task.is_circle() {
            Self::circle(task)
        } else {
            Self::path(task, RewardVariant::Hybrid, weights)
        }
    }

    pub fn action_dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn map(&self, u: &[f64]) -> MappedAction {
        map_action(&self.spec, u)
    }

    pub fn reward(&self, u: &[f64]) -> f64 {
        let m = self.map(u);
        match &self.objective {
            Objective::CircleAnalytic => circle_analytic_reward(m.phi.expect("circle action carries φ")),
            Objective::Path { path, band, weights, variant } => evaluate(&m.morphology, path, *band, weights).get(*variant),
        }
    }

    /// Reward terms for a morphology; `None` for the analytic circle objective.
    pub fn breakdown(&self, m: &Morphology) -> Option<RewardBreakdown> {
        match &self.objective {
            Objective::CircleAnalytic => None,
            Objective::Path { path, band, weights, .. } => Some(evaluate(m, path, *band, weights)),
        }
    }

    pub fn band(&self) -> Option<Band> {
        match &self.objective {
            Objective::CircleAnalytic => None,
            Objective::Path { band, .. } => Some(*band),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_midpoint_is_45_degrees() {
        let m = map_action(&ActionSpec::CirclePhi { radius: 0.4 }, &[0.0]);
        assert!((m.phi.unwrap().degrees() - 45.0).abs() < 1e-12);
        assert!((m.morphology.l1 - m.morphology.l2).abs() < 1e-15);
        assert_eq!(m.morphology.theta2_cmd, FRAC_PI_2);
    }

    #[test]
    fn circle_upper_edge() {
        let u = 1.0 - 1e-12;
        let m = map_action(&ActionSpec::CirclePhi { radius: 0.4 }, &[u]);
        let want = 90.0 - PHI_EPS.to_degrees();
        assert!((m.phi.unwrap().degrees() - want).abs() < 1e-8);
        assert!(m.phi.unwrap().radians() < PhiParam::MAX + 1e-15);
    }

    #[test]
    fn full_box_midpoint() {
        let m = map_action(&ActionSpec::FullMorphology, &[0.0, 0.0, 0.0]).morphology;
        assert!((m.l1 - 0.325).abs() < 1e-15 && (m.l2 - 0.325).abs() < 1e-15);
        assert_eq!(m.theta2_cmd, FRAC_PI_2);
        let lo = map_action(&ActionSpec::FullMorphology, &[-1.0, 1.0, -1.0]).morphology;
        assert!((lo.l1 - L_MIN).abs() < 1e-15 && (lo.l2 - L_MAX).abs() < 1e-15 && lo.theta2_cmd == 0.0);
    }

    #[test]
    fn context_encoding() {
        let c = Context::for_task(&TaskPath::ellipse(0.4, 0.25).unwrap());
        assert_eq!(c.0, [0.0, 1.0, 0.0, 0.4, 0.25]);
        let c = Context::for_task(&TaskPath::rectangle(0.7, 0.4).unwrap());
        assert_eq!(c.0[..3].iter().sum::<f64>(), 1.0);
        assert_eq!(c.0[2], 1.0);
    }

    #[test]
    fn environments() {
        let env = BanditEnv::circle(TaskPath::circle(0.4).unwrap()).unwrap();
        assert_eq!(env.reward(&[0.0]), 1.0);
        assert!(BanditEnv::circle(TaskPath::ellipse(0.4, 0.25).unwrap()).is_err());
        let env = BanditEnv::for_task(TaskPath::ellipse(0.4, 0.25).unwrap(), RewardWeights::default()).unwrap();
        assert_eq!(env.action_dim(), 3);
        assert_eq!(env.band().unwrap(), Band { b: 0.25, a: 0.4 });
        // band-match design in action coordinates: L1 = 0.325, L2 = 0.075
        let u2 = (0.075 - 0.325) / 0.275;
        let m = env.map(&[0.0, u2, 0.0]).morphology;
        let bd = env.breakdown(&m).unwrap();
        assert_eq!(bd.coverage, 1.0);
        assert!(bd.band_penalty.abs() < 1e-24);
    }
}
