//! Path-averaged manipulability rewards with feasibility penalties.
//!
//! For every sampled target the arm either reaches it with elbow-up IK or it
//! does not. Reachable targets contribute `L1 L2 |sin θ2|` and `|sin θ2|` to the
//! masked means; the annulus is compared against the task band through a
//! squared hinge; unreached targets and total link length are penalized
//! linearly.

use serde::{Deserialize, Serialize};

use crate::kinematics::{inverse_kinematics_elbow_up, Morphology, PhiParam};
use crate::taskpath::{Band, SampledPath};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardWeights {
    pub w_unr: f64,
    pub w_in: f64,
    pub w_out: f64,
    /// Per meter of total link length.
    pub w_len: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self { w_unr: 5.0, w_in: 5.0, w_out: 5.0, w_len: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardVariant {
    Raw,
    Norm,
    Band,
    #[serde(alias = "hyb")]
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RewardBreakdown {
    pub n_reach: usize,
    pub n_total: usize,
    pub coverage: f64,
    pub w_bar: f64,
    pub w_bar_n: f64,
    pub band_penalty: f64,
    pub unreach_penalty: f64,
    pub length_penalty: f64,
    pub r_raw: f64,
    pub r_norm: f64,
    pub r_band: f64,
    pub r_hyb: f64,
}

impl RewardBreakdown {
    pub fn get(&self, variant: RewardVariant) -> f64 {
        match variant {
            RewardVariant::Raw => self.r_raw,
            RewardVariant::Norm => self.r_norm,
            RewardVariant::Band => self.r_band,
            RewardVariant::Hybrid => self.r_hyb,
        }
    }
}

/// Squared-hinge mismatch between the annulus of `m` and `band`.
pub fn band_penalty(m: &Morphology, band: Band, w: &RewardWeights) -> f64 {
    let ann = m.annulus();
    let inner = (band.b - ann.r_min).max(0.0);
    let outer = (ann.r_max - band.a).max(0.0);
    w.w_in * inner * inner + w.w_out * outer * outer
}

pub fn evaluate(m: &Morphology, path: &SampledPath, band: Band, w: &RewardWeights) -> RewardBreakdown {
    let n_total = path.len();
    let mut n_reach = 0usize;
    let mut sum_sin = 0.0;
    for p in &path.points {
        if let Some(q) = inverse_kinematics_elbow_up(m, *p) {
            n_reach += 1;
            sum_sin += q.theta2.sin().abs();
        }
    }
    let coverage = if n_total == 0 { 0.0 } else { n_reach as f64 / n_total as f64 };
    let (w_bar, w_bar_n) = if n_reach == 0 {
        (0.0, 0.0)
    } else {
        let mean_sin = sum_sin / n_reach as f64;
        (m.l1 * m.l2 * mean_sin, mean_sin)
    };
    let band_penalty = band_penalty(m, band, w);
    let unreach_penalty = w.w_unr * (1.0 - coverage);
    let length_penalty = w.w_len * m.total_length();
    let feasibility = unreach_penalty + length_penalty;
    RewardBreakdown {
        n_reach,
        n_total,
        coverage,
        w_bar,
        w_bar_n,
        band_penalty,
        unreach_penalty,
        length_penalty,
        r_raw: w_bar - feasibility,
        r_norm: w_bar_n - feasibility,
        r_band: -band_penalty - feasibility,
        r_hyb: w_bar_n - band_penalty - feasibility,
    }
}

/// Objective used for every circle experiment: `sin 2φ`, no penalties.
pub fn circle_analytic_reward(p: PhiParam) -> f64 {
    (2.0 * p.radians()).sin()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_4, PI};

    use proptest::prelude::*;

    use super::*;
    use crate::kinematics::{phi_to_lengths, Point2, PHI_EPS};
    use crate::taskpath::{band_for, sample_path, TaskPath};

    fn ellipse() -> (SampledPath, Band) {
        let t = TaskPath::ellipse(0.40, 0.25).unwrap();
        (sample_path(&t), band_for(&t))
    }

    /// Independent per-point oracle: law of cosines without the IK routine.
    fn mean_abs_sin_oracle(l1: f64, l2: f64, path: &SampledPath) -> (usize, f64) {
        let mut n = 0;
        let mut s = 0.0;
        for p in &path.points {
            let r2 = p.x * p.x + p.y * p.y;
            let r = r2.sqrt();
            if r < (l1 - l2).abs() - 1e-9 || r > l1 + l2 + 1e-9 {
                continue;
            }
            let c = ((r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
            n += 1;
            s += (1.0 - c * c).sqrt();
        }
        (n, if n == 0 { 0.0 } else { s / n as f64 })
    }

    #[test]
    fn band_match_on_ellipse() {
        let (path, band) = ellipse();
        let m = Morphology::from_lengths(0.325, 0.075).unwrap();
        let r = evaluate(&m, &path, band, &RewardWeights::default());
        assert_eq!(r.coverage, 1.0);
        assert!(r.band_penalty.abs() < 1e-24);
        assert!((r.length_penalty - 0.20).abs() < 1e-15);
        let (n, mean) = mean_abs_sin_oracle(0.325, 0.075, &path);
        assert_eq!(n, 720);
        assert!((r.w_bar_n - mean).abs() < 1e-12);
        assert!((r.r_hyb - (mean - 0.20)).abs() < 1e-12);
    }

    #[test]
    fn unreachable_path_gets_full_penalty() {
        let (path, band) = ellipse();
        let m = Morphology::from_lengths(0.1, 0.1).unwrap();
        let r = evaluate(&m, &path, band, &RewardWeights::default());
        assert_eq!(r.n_reach, 0);
        assert_eq!((r.coverage, r.w_bar, r.w_bar_n), (0.0, 0.0, 0.0));
        assert!((r.r_norm - (-5.0 - 0.1)).abs() < 1e-12);
    }

    #[test]
    fn long_links_pay_outer_band() {
        let (path, band) = ellipse();
        let m = Morphology::from_lengths(0.60, 0.60).unwrap();
        let r = evaluate(&m, &path, band, &RewardWeights::default());
        // inner term: r_min = 0 against b = 0.25
        let inner = 5.0 * 0.25f64.powi(2);
        assert!((r.band_penalty - (3.2 + inner)).abs() < 1e-12);
        assert!((r.length_penalty - 0.6).abs() < 1e-15);
    }

    #[test]
    fn analytic_circle_reward() {
        assert!((circle_analytic_reward(PhiParam::new(FRAC_PI_4).unwrap()) - 1.0).abs() < 1e-15);
        let p = PhiParam::new(PHI_EPS).unwrap();
        assert_eq!(circle_analytic_reward(p), (2.0 * PHI_EPS).sin());
        let p = PhiParam::new(30f64.to_radians()).unwrap();
        assert!((circle_analytic_reward(p) - 0.866_025_403_784_438_6).abs() < 1e-12);
    }

    #[test]
    fn variants_select_components() {
        let (path, band) = ellipse();
        let m = Morphology::from_lengths(0.3, 0.12).unwrap();
        let r = evaluate(&m, &path, band, &RewardWeights::default());
        assert_eq!(r.get(RewardVariant::Raw), r.r_raw);
        assert_eq!(r.get(RewardVariant::Norm), r.r_norm);
        assert_eq!(r.get(RewardVariant::Band), r.r_band);
        assert_eq!(r.get(RewardVariant::Hybrid), r.r_hyb);
    }

    #[test]
    fn circle_locus_right_elbow_everywhere() {
        // on L1² + L2² = R² every target is met at θ2 = 90°, so the per-target
        // normalized term is 1 and the scale term carries sin 2φ
        let t = TaskPath::circle(0.4).unwrap();
        let path = sample_path(&t);
        for deg in [10.0, 30.0, 45.0, 60.0, 80.0] {
            let p = PhiParam::new(f64::to_radians(deg)).unwrap();
            let (l1, l2) = phi_to_lengths(p, 0.4);
            let m = Morphology::from_lengths(l1, l2).unwrap();
            let r = evaluate(&m, &path, band_for(&t), &RewardWeights::default());
            assert_eq!(r.coverage, 1.0);
            assert!((r.w_bar_n - 1.0).abs() < 1e-9);
            assert!((r.w_bar / (0.4 * 0.4 / 2.0) - (2.0 * p.radians()).sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn band_zero_iff_annulus_inside_band_edges() {
        let band = Band::new(0.25, 0.40).unwrap();
        let w = RewardWeights::default();
        // r_min >= b and r_max <= a
        let m = Morphology::from_lengths(0.33, 0.06).unwrap();
        assert_eq!(band_penalty(&m, band, &w), 0.0);
        let m = Morphology::from_lengths(0.33, 0.09).unwrap();
        assert!(band_penalty(&m, band, &w) > 0.0);
    }

    fn path_and_morph() -> impl Strategy<Value = (Morphology, f64)> {
        (0.05f64..0.6, 0.05f64..0.6, -PI..PI)
            .prop_map(|(a, b, rot)| (Morphology::from_lengths(a, b).unwrap(), rot))
    }

    proptest! {
        #[test]
        fn hybrid_minus_norm_is_band(m in 0.05f64..0.6, n in 0.05f64..0.6) {
            let (path, band) = ellipse();
            let m = Morphology::from_lengths(m, n).unwrap();
            let r = evaluate(&m, &path, band, &RewardWeights::default());
            prop_assert!((r.r_hyb - r.r_norm + r.band_penalty).abs() < 1e-12);
            prop_assert!((r.r_raw - (r.w_bar - r.unreach_penalty - r.length_penalty)).abs() < 1e-12);
            prop_assert!((r.r_band + r.band_penalty + r.unreach_penalty + r.length_penalty).abs() < 1e-12);
            prop_assert!(r.w_bar <= m.l1 * m.l2 + 1e-15);
            prop_assert!(r.w_bar_n <= 1.0);
            prop_assert!((r.coverage - r.n_reach as f64 / r.n_total as f64).abs() == 0.0);
        }

        #[test]
        fn coverage_is_permutation_invariant((m, rot) in path_and_morph()) {
            let (path, band) = ellipse();
            let mut shuffled = path.points.clone();
            let k = ((rot + PI) * 100.0) as usize % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            let a = evaluate(&m, &path, band, &RewardWeights::default());
            let b = evaluate(&m, &SampledPath { points: shuffled }, band, &RewardWeights::default());
            prop_assert_eq!(a.n_reach, b.n_reach);
            prop_assert!((a.w_bar_n - b.w_bar_n).abs() < 1e-12);
        }

        #[test]
        fn outer_band_grows_with_rmax(r_min in 0.0f64..0.5, s in 0.41f64..1.0, d in 1e-4f64..0.2) {
            // r_min held fixed, r_max pushed further past a
            let band = Band::new(0.25, 0.40).unwrap();
            let w = RewardWeights::default();
            let arm = |r_max: f64| {
                Morphology::from_lengths(0.5 * (r_max + r_min), 0.5 * (r_max - r_min)).unwrap()
            };
            prop_assume!(s > r_min + 1e-3);
            let (a, b) = (arm(s), arm(s + d));
            prop_assert!(band_penalty(&b, band, &w) > band_penalty(&a, band, &w));
        }

        #[test]
        fn zero_band_penalty_characterization(l1 in 0.05f64..0.6, l2 in 0.05f64..0.6) {
            let band = Band::new(0.25, 0.40).unwrap();
            let m = Morphology::from_lengths(l1, l2).unwrap();
            let ann = m.annulus();
            let inside = ann.r_min >= band.b && ann.r_max <= band.a;
            prop_assert_eq!(band_penalty(&m, band, &RewardWeights::default()) == 0.0, inside);
        }

        #[test]
        fn reward_ignores_elbow_command(l1 in 0.05f64..0.6, l2 in 0.05f64..0.6, t in 0.01f64..3.1) {
            let (path, band) = ellipse();
            let a = evaluate(&Morphology::new(l1, l2, t).unwrap(), &path, band, &RewardWeights::default());
            let b = evaluate(&Morphology::from_lengths(l1, l2).unwrap(), &path, band, &RewardWeights::default());
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn single_point_path() {
        let path = SampledPath { points: vec![Point2::new(0.3, 0.0)] };
        let m = Morphology::from_lengths(0.2, 0.2).unwrap();
        let r = evaluate(&m, &path, Band::new(0.3, 0.3).unwrap(), &RewardWeights::default());
        assert_eq!(r.n_reach, 1);
    }
}
