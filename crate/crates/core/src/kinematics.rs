//! Planar 2R kinematics.
//!
//! Forward map, Jacobian, elbow-up inverse kinematics and the manipulability
//! measure `w = L1 L2 |sin θ2|`, plus the one-parameter family of designs
//! `L1 = R cos φ, L2 = R sin φ` that trace the circle-task feasibility locus.
//!
//! Angles are radians everywhere in this module.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Margin that keeps φ away from the degenerate one-link designs at 0 and π/2.
pub const PHI_EPS: f64 = 1e-3;

/// Radial slack when deciding whether a target sits on the annulus boundary.
pub const REACH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// A candidate arm design.
///
/// `theta2_cmd` is the elbow command carried by the three-dimensional action.
/// Path rewards recompute the elbow angle per target from inverse kinematics,
/// so this field only travels through logs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Morphology {
    pub l1: f64,
    pub l2: f64,
    pub theta2_cmd: f64,
}

impl Morphology {
    pub fn new(l1: f64, l2: f64, theta2_cmd: f64) -> Result<Self> {
        if !(l1.is_finite() && l1 > 0.0 && l2.is_finite() && l2 > 0.0) {
            return Err(Error::InvalidMorphology(format!(
                "link lengths must be positive and finite, got L1={l1}, L2={l2}"
            )));
        }
        if !theta2_cmd.is_finite() {
            return Err(Error::InvalidMorphology(format!(
                "theta2_cmd must be finite, got {theta2_cmd}"
            )));
        }
        Ok(Self { l1, l2, theta2_cmd })
    }

    /// Links only; the elbow command defaults to a right angle.
    pub fn from_lengths(l1: f64, l2: f64) -> Result<Self> {
        Self::new(l1, l2, FRAC_PI_2)
    }

    pub fn annulus(&self) -> Annulus {
        Annulus {
            r_min: (self.l1 - self.l2).abs(),
            r_max: self.l1 + self.l2,
        }
    }

    pub fn total_length(&self) -> f64 {
        self.l1 + self.l2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointConfig {
    pub theta1: f64,
    pub theta2: f64,
}

impl JointConfig {
    pub const fn new(theta1: f64, theta2: f64) -> Self {
        Self { theta1, theta2 }
    }
}

/// Set of radii the arm can reach: `[|L1 - L2|, L1 + L2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub r_min: f64,
    pub r_max: f64,
}

impl Annulus {
    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_min - REACH_TOL && r <= self.r_max + REACH_TOL
    }
}

/// Row-major 2x2 Jacobian; column j holds ∂(x, y)/∂θ_j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobian2(pub [[f64; 2]; 2]);

impl Jacobian2 {
    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// `sqrt(det(J Jᵀ))`, which for a square Jacobian is `|det J|`.
    pub fn yoshikawa(&self) -> f64 {
        let m = &self.0;
        let a = m[0][0] * m[0][0] + m[0][1] * m[0][1];
        let b = m[0][0] * m[1][0] + m[0][1] * m[1][1];
        let d = m[1][0] * m[1][0] + m[1][1] * m[1][1];
        (a * d - b * b).max(0.0).sqrt()
    }
}

pub fn forward_kinematics(m: &Morphology, q: JointConfig) -> Point2 {
    let t12 = q.theta1 + q.theta2;
    Point2 {
        x: m.l1 * q.theta1.cos() + m.l2 * t12.cos(),
        y: m.l1 * q.theta1.sin() + m.l2 * t12.sin(),
    }
}

pub fn jacobian(m: &Morphology, q: JointConfig) -> Jacobian2 {
    let (s1, c1) = q.theta1.sin_cos();
    let (s12, c12) = (q.theta1 + q.theta2).sin_cos();
    Jacobian2([
        [-m.l1 * s1 - m.l2 * s12, -m.l2 * s12],
        [m.l1 * c1 + m.l2 * c12, m.l2 * c12],
    ])
}

pub fn manipulability(m: &Morphology, theta2: f64) -> f64 {
    m.l1 * m.l2 * theta2.sin().abs()
}

/// Scale-free manipulability `|sin θ2|`.
pub fn manipulability_normalized(theta2: f64) -> f64 {
    theta2.sin().abs()
}

/// Elbow-up inverse kinematics (θ2 in `[0, π]`).
///
/// Returns `None` when the target radius lies outside the reachable annulus.
pub fn inverse_kinematics_elbow_up(m: &Morphology, target: Point2) -> Option<JointConfig> {
    let r = target.norm();
    if !m.annulus().contains(r) {
        return None;
    }
    let c2 = ((r * r - m.l1 * m.l1 - m.l2 * m.l2) / (2.0 * m.l1 * m.l2)).clamp(-1.0, 1.0);
    let theta2 = c2.acos();
    let theta1 = target.y.atan2(target.x) - (m.l2 * theta2.sin()).atan2(m.l1 + m.l2 * c2);
    Some(JointConfig { theta1, theta2 })
}

/// Angle parameterizing the circle-task design locus `L1² + L2² = R²`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PhiParam(f64);

impl PhiParam {
    pub const MIN: f64 = PHI_EPS;
    pub const MAX: f64 = FRAC_PI_2 - PHI_EPS;

    pub fn new(phi: f64) -> Result<Self> {
        if (Self::MIN..=Self::MAX).contains(&phi) {
            Ok(Self(phi))
        } else {
            Err(Error::InvalidParameter(format!(
                "phi = {phi} outside [{}, {}]",
                Self::MIN,
                Self::MAX
            )))
        }
    }

    /// Clamps into the admissible range instead of rejecting.
    pub fn saturating(phi: f64) -> Self {
        Self(phi.clamp(Self::MIN, Self::MAX))
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }
}

pub fn phi_to_lengths(p: PhiParam, radius: f64) -> (f64, f64) {
    let (s, c) = p.0.sin_cos();
    (radius * c, radius * s)
}

/// Normalized manipulability along the locus, `|sin 2φ|`.
pub fn w_norm_phi(p: PhiParam) -> f64 {
    (2.0 * p.0).sin().abs()
}

/// Manipulability on a centered circle as a function of the link lengths
/// alone, after eliminating θ2 through the circle constraint.
pub fn manipulability_on_circle(l1: f64, l2: f64, radius: f64) -> Result<f64> {
    if !(l1 > 0.0 && l2 > 0.0 && radius > 0.0) {
        return Err(Error::InfeasibleGeometry(format!(
            "lengths and radius must be positive (L1={l1}, L2={l2}, R={radius})"
        )));
    }
    let lo = (l1 - l2).abs();
    let hi = l1 + l2;
    if radius < lo - REACH_TOL || radius > hi + REACH_TOL {
        return Err(Error::InfeasibleGeometry(format!(
            "circle of radius {radius} not reachable by annulus [{lo}, {hi}]"
        )));
    }
    let c = ((radius * radius - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
    Ok(l1 * l2 * (1.0 - c * c).sqrt())
}
