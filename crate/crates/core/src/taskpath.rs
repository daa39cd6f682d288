//! Task paths centered at the manipulator base, their sampling, and the
//! radial band each task asks the reachable annulus to match.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::Point2;

pub const DEFAULT_SAMPLES: usize = 720;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TaskShape {
    Circle { radius: f64 },
    /// Semi-axes along x and y.
    Ellipse { a: f64, b: f64 },
    /// Full width along x and full height along y.
    Rectangle { width: f64, height: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EllipseSampling {
    /// Uniform in the angle parameter `t` of `(a cos t, b sin t)`.
    #[default]
    Parameter,
    /// Uniform in arc length.
    ArcLength,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskPath {
    pub shape: TaskShape,
    pub n_samples: usize,
    pub ellipse_sampling: EllipseSampling,
}

/// Target radial interval `[b, a]` for the reachable annulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub b: f64,
    pub a: f64,
}

impl Band {
    pub fn new(b: f64, a: f64) -> Result<Self> {
        if b > 0.0 && b <= a && a.is_finite() {
            Ok(Self { b, a })
        } else {
            Err(Error::InvalidParameter(format!("band needs 0 < b <= a, got [{b}, {a}]")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    pub points: Vec<Point2>,
}

impl SampledPath {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl TaskPath {
    pub fn new(shape: TaskShape, n_samples: usize) -> Result<Self> {
        let dims: &[f64] = match &shape {
            TaskShape::Circle { radius } => &[*radius],
            TaskShape::Ellipse { a, b } => &[*a, *b],
            TaskShape::Rectangle { width, height } => &[*width, *height],
        };
        if dims.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "task dimensions must be positive: {shape:?}"
            )));
        }
        if n_samples == 0 {
            return Err(Error::InvalidParameter("n_samples must be at least 1".into()));
        }
        Ok(Self { shape, n_samples, ellipse_sampling: EllipseSampling::Parameter })
    }

    pub fn circle(radius: f64) -> Result<Self> {
        Self::new(TaskShape::Circle { radius }, DEFAULT_SAMPLES)
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(TaskShape::Ellipse { a, b }, DEFAULT_SAMPLES)
    }

    pub fn rectangle(width: f64, height: f64) -> Result<Self> {
        Self::new(TaskShape::Rectangle { width, height }, DEFAULT_SAMPLES)
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.n_samples = n.max(1);
        self
    }

    pub fn with_ellipse_sampling(mut self, mode: EllipseSampling) -> Self {
        self.ellipse_sampling = mode;
        self
    }

    /// Short lowercase name used in file names.
    pub fn name(&self) -> &'static str {
        match self.shape {
            TaskShape::Circle { .. } => "circle",
            TaskShape::Ellipse { .. } => "ellipse",
            TaskShape::Rectangle { .. } => "rectangle",
        }
    }

    pub fn is_circle(&self) -> bool {
        matches!(self.shape, TaskShape::Circle { .. })
    }

    /// The two shape parameters (second repeats the radius for circles).
    pub fn params(&self) -> (f64, f64) {
        match self.shape {
            TaskShape::Circle { radius } => (radius, radius),
            TaskShape::Ellipse { a, b } => (a, b),
            TaskShape::Rectangle { width, height } => (width, height),
        }
    }
}

pub fn sample_path(t: &TaskPath) -> SampledPath {
    let n = t.n_samples;
    let points = match t.shape {
        TaskShape::Circle { radius } => (0..n)
            .map(|k| {
                let (s, c) = (TAU * k as f64 / n as f64).sin_cos();
                Point2::new(radius * c, radius * s)
            })
            .collect(),
        TaskShape::Ellipse { a, b } => match t.ellipse_sampling {
            EllipseSampling::Parameter => (0..n)
                .map(|k| {
                    let (s, c) = (TAU * k as f64 / n as f64).sin_cos();
                    Point2::new(a * c, b * s)
                })
                .collect(),
            EllipseSampling::ArcLength => ellipse_arc_length_params(a, b, n)
                .into_iter()
                .map(|tt| Point2::new(a * tt.cos(), b * tt.sin()))
                .collect(),
        },
        TaskShape::Rectangle { width, height } => rectangle_points(width, height, n),
    };
    SampledPath { points }
}

/// Counter-clockwise from the corner `(w/2, h/2)`, equal arc-length spacing.
fn rectangle_points(w: f64, h: f64, n: usize) -> Vec<Point2> {
    let (hw, hh) = (0.5 * w, 0.5 * h);
    let perimeter = 2.0 * (w + h);
    (0..n)
        .map(|k| {
            let s = perimeter * k as f64 / n as f64;
            if s < w {
                Point2::new(hw - s, hh)
            } else if s < w + h {
                Point2::new(-hw, hh - (s - w))
            } else if s < 2.0 * w + h {
                Point2::new(-hw + (s - w - h), -hh)
            } else {
                Point2::new(hw, -hh + (s - 2.0 * w - h))
            }
        })
        .collect()
}

/// Parameter values splitting the ellipse into `n` equal arc lengths.
fn ellipse_arc_length_params(a: f64, b: f64, n: usize) -> Vec<f64> {
    let speed = |t: f64| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt();
    // cumulative arc length on a fine table, Simpson per cell
    let cells = 64 * n.max(16);
    let dt = TAU / cells as f64;
    let mut cum = Vec::with_capacity(cells + 1);
    cum.push(0.0);
    for i in 0..cells {
        let t0 = i as f64 * dt;
        let seg = dt / 6.0 * (speed(t0) + 4.0 * speed(t0 + 0.5 * dt) + speed(t0 + dt));
        cum.push(cum[i] + seg);
    }
    let total = cum[cells];
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    for k in 0..n {
        let s = total * k as f64 / n as f64;
        while j + 1 < cells && cum[j + 1] < s {
            j += 1;
        }
        let frac = (s - cum[j]) / (cum[j + 1] - cum[j]);
        out.push((j as f64 + frac) * dt);
    }
    out
}

pub fn band_for(t: &TaskPath) -> Band {
    match t.shape {
        TaskShape::Circle { radius } => Band { b: radius, a: radius },
        TaskShape::Ellipse { a, b } => Band { b: a.min(b), a: a.max(b) },
        TaskShape::Rectangle { width, height } => Band {
            b: 0.5 * width.min(height),
            a: 0.5 * width.hypot(height),
        },
    }
}
