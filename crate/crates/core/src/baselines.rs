//! Closed-form and constructive reference designs.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinematics::{phi_to_lengths, w_norm_phi, Morphology, PhiParam, PHI_EPS};
use crate::taskpath::{Band, TaskPath, TaskShape};

pub const DEFAULT_SWEEP_POINTS: usize = 1801;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BaselineKind {
    Analytic,
    Sweep,
    EqualDex,
    BandMatch,
}

impl BaselineKind {
    pub fn label(self) -> &'static str {
        match self {
            Self::Analytic => "Analytic",
            Self::Sweep => "Sweep",
            Self::EqualDex => "Equal-dex",
            Self::BandMatch => "Band-match",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineResult {
    pub kind: BaselineKind,
    pub morphology: Morphology,
    /// Objective native to the baseline: `w_max` for the analytic optimum,
    /// `|sin 2φ|` for the sweep, `E[r²]`-matched length for equal-dex and
    /// band width for band-match.
    pub objective: f64,
    /// Locus angle, for the circle baselines only.
    pub phi: Option<PhiParam>,
}

/// `L1 = L2 = R/√2`, `θ2 = 90°`, `w_max = R²/2`.
pub fn analytic_circle_optimum(radius: f64) -> Result<BaselineResult> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let phi = PhiParam::new(FRAC_PI_4)?;
    let (l1, l2) = phi_to_lengths(phi, radius);
    Ok(BaselineResult {
        kind: BaselineKind::Analytic,
        morphology: Morphology::new(l1, l2, FRAC_PI_2)?,
        objective: 0.5 * radius * radius,
        phi: Some(phi),
    })
}

/// The `i`-th of `n` evenly spaced angles over `[ε, π/2 − ε]`, written around
/// the midpoint so that an odd grid hits π/4 exactly.
pub fn sweep_angle(i: usize, n: usize) -> f64 {
    let u = 2.0 * i as f64 / (n - 1) as f64 - 1.0;
    FRAC_PI_4 + (FRAC_PI_4 - PHI_EPS) * u
}

/// Grid argmax of `|sin 2φ|` along the circle locus.
pub fn phi_sweep(radius: f64, n_grid: usize) -> Result<BaselineResult> {
    if n_grid < 3 {
        return Err(Error::InvalidParameter(format!("sweep needs n_grid >= 3, got {n_grid}")));
    }
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    let mut best = (PhiParam::saturating(sweep_angle(0, n_grid)), f64::NEG_INFINITY);
    for i in 0..n_grid {
        let p = PhiParam::saturating(sweep_angle(i, n_grid));
        let f = w_norm_phi(p);
        if f > best.1 {
            best = (p, f);
        }
    }
    let (l1, l2) = phi_to_lengths(best.0, radius);
    Ok(BaselineResult {
        kind: BaselineKind::Sweep,
        morphology: Morphology::new(l1, l2, FRAC_PI_2)?,
        objective: best.1,
        phi: Some(best.0),
    })
}

/// Mean squared radius of the path, averaged the way the path is sampled:
/// over the angle parameter for the ellipse and over arc length for the
/// rectangle.
pub fn expected_r2(t: &TaskPath) -> f64 {
    match t.shape {
        TaskShape::Circle { radius } => radius * radius,
        TaskShape::Ellipse { a, b } => 0.5 * (a * a + b * b),
        TaskShape::Rectangle { width: w, height: h } => {
            (w.powi(3) + 3.0 * w * h * h + 3.0 * h * w * w + h.powi(3)) / (12.0 * (w + h))
        }
    }
}

/// Independent numerical `E[r²]`: composite Simpson over the ellipse angle
/// parameter, or over arc length along each rectangle side. `panels` is
/// rounded up to an even count.
pub fn expected_r2_quadrature(t: &TaskPath, panels: usize) -> f64 {
    let n = panels.max(2).div_ceil(2) * 2;
    let simpson = |f: &dyn Fn(f64) -> f64, lo: f64, hi: f64| {
        let h = (hi - lo) / n as f64;
        let inner: f64 = (1..n).map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f(lo + h * i as f64)).sum();
        h / 3.0 * (f(lo) + inner + f(hi))
    };
    match t.shape {
        TaskShape::Circle { radius } => radius * radius,
        TaskShape::Ellipse { a, b } => {
            let r2 = |s: f64| (a * s.cos()).powi(2) + (b * s.sin()).powi(2);
            simpson(&r2, 0.0, 2.0 * std::f64::consts::PI) / (2.0 * std::f64::consts::PI)
        }
        TaskShape::Rectangle { width: w, height: h } => {
            let vertical = |y: f64| 0.25 * w * w + y * y;
            let horizontal = |x: f64| x * x + 0.25 * h * h;
            let total = 2.0 * simpson(&vertical, -0.5 * h, 0.5 * h) + 2.0 * simpson(&horizontal, -0.5 * w, 0.5 * w);
            total / (2.0 * (w + h))
        }
    }
}

/// Symmetric arm sized to the mean squared radius: `L* = sqrt(E[r²] / 2)`.
pub fn equal_dex_baseline(t: &TaskPath) -> Result<BaselineResult> {
    let l = (0.5 * expected_r2(t)).sqrt();
    Ok(BaselineResult {
        kind: BaselineKind::EqualDex,
        morphology: Morphology::new(l, l, FRAC_PI_2)?,
        objective: l,
        phi: None,
    })
}

/// Arm whose annulus is exactly the band: `L1 = (a+b)/2 ≥ L2 = (a−b)/2`.
pub fn band_match_baseline(band: Band) -> Result<BaselineResult> {
    if !(band.a > band.b) {
        return Err(Error::DegenerateBand { b: band.b, a: band.a });
    }
    let l1 = 0.5 * (band.a + band.b);
    let l2 = 0.5 * (band.a - band.b);
    Ok(BaselineResult {
        kind: BaselineKind::BandMatch,
        morphology: Morphology::new(l1, l2, FRAC_PI_2)?,
        objective: band.a - band.b,
        phi: None,
    })
}
