use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Weights and biases per layer. Gradients and Adam moments use the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Layers {
    /// `fan_in × fan_out`, so a batch multiplies from the left.
    pub w: Vec<Array2<f64>>,
    pub b: Vec<Array1<f64>>,
}

impl Layers {
    pub fn zeros_like(other: &Layers) -> Self {
        Self {
            w: other.w.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            b: other.b.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
        }
    }

    pub fn n_params(&self) -> usize {
        self.w.iter().map(|w| w.len()).sum::<usize>() + self.b.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Layer by layer, weights (row-major) before biases.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        for (w, b) in self.w.iter().zip(&self.b) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.n_params() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} parameters, got {}",
                self.n_params(),
                flat.len()
            )));
        }
        let mut it = flat.iter();
        for (w, b) in self.w.iter_mut().zip(self.b.iter_mut()) {
            w.iter_mut().chain(b.iter_mut()).for_each(|p| *p = *it.next().unwrap());
        }
        Ok(())
    }

    /// Euclidean norm over every entry.
    pub fn norm(&self) -> f64 {
        self.w.iter().flat_map(|w| w.iter()).chain(self.b.iter().flat_map(|b| b.iter())).map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.w.iter().all(|w| w.iter().all(|x| x.is_finite()))
            && self.b.iter().all(|b| b.iter().all(|x| x.is_finite()))
    }

    fn check_same_shape(&self, other: &Layers) -> Result<()> {
        let same = self.w.len() == other.w.len()
            && self.w.iter().zip(&other.w).all(|(a, b)| a.dim() == b.dim())
            && self.b.iter().zip(&other.b).all(|(a, b)| a.dim() == b.dim());
        if same {
            Ok(())
        } else {
            Err(Error::ShapeMismatch("layer shapes differ".into()))
        }
    }
}

/// Tanh hidden layers, linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Layers,
}

/// Activations of one forward pass: the input followed by each hidden output.
#[derive(Debug, Clone)]
pub struct Tape {
    sizes: Vec<usize>,
    acts: Vec<Array2<f64>>,
}

impl Tape {
    pub fn batch(&self) -> usize {
        self.acts[0].nrows()
    }
}

impl Mlp {
    /// Uniform `±1/√fan_in` init; the last layer is further scaled by `out_scale`.
    pub fn new(sizes: &[usize], out_scale: f64, rng: &mut RngStream) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::InvalidParameter(format!("bad layer sizes {sizes:?}")));
        }
        let n = sizes.len() - 1;
        let mut w = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for (k, pair) in sizes.windows(2).enumerate() {
            let bound = 1.0 / (pair[0] as f64).sqrt();
            let scale = if k + 1 == n { out_scale } else { 1.0 };
            w.push(Array2::from_shape_simple_fn((pair[0], pair[1]), || scale * rng.uniform_in(-bound, bound)));
            b.push(Array1::from_shape_simple_fn(pair[1], || scale * rng.uniform_in(-bound, bound)));
        }
        Ok(Self { sizes: sizes.to_vec(), params: Layers { w, b } })
    }

    pub fn from_layers(params: Layers) -> Result<Self> {
        if params.w.is_empty() || params.w.len() != params.b.len() {
            return Err(Error::ShapeMismatch("need one bias per weight matrix".into()));
        }
        let mut sizes = vec![params.w[0].nrows()];
        for (w, b) in params.w.iter().zip(&params.b) {
            if w.nrows() != *sizes.last().unwrap() || b.len() != w.ncols() {
                return Err(Error::ShapeMismatch("consecutive layers do not chain".into()));
            }
            sizes.push(w.ncols());
        }
        Ok(Self { sizes, params })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn params(&self) -> &Layers {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut Layers {
        &mut self.params
    }

    pub fn forward(&self, x: &Array2<f64>) -> Result<(Array2<f64>, Tape)> {
        if x.ncols() != self.input_dim() {
            return Err(Error::ShapeMismatch(format!(
                "input width {} but network expects {}",
                x.ncols(),
                self.input_dim()
            )));
        }
        let n = self.params.w.len();
        let mut acts = Vec::with_capacity(n);
        let mut h = x.to_owned();
        for k in 0..n {
            let z = h.dot(&self.params.w[k]) + &self.params.b[k];
            acts.push(h);
            h = if k + 1 == n { z } else { z.mapv(f64::tanh) };
        }
        Ok((h, Tape { sizes: self.sizes.clone(), acts }))
    }

    /// Forward pass without keeping activations.
    pub fn predict(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        self.forward(x).map(|(y, _)| y)
    }

    /// Reverse-mode gradients of `Σ grad_out ⊙ output` with respect to the
    /// parameters and the input.
    pub fn backward(&self, tape: &Tape, grad_out: &Array2<f64>) -> Result<(Layers, Array2<f64>)> {
        if tape.sizes != self.sizes {
            return Err(Error::ShapeMismatch("tape was recorded on a different architecture".into()));
        }
        if grad_out.dim() != (tape.batch(), self.output_dim()) {
            return Err(Error::ShapeMismatch(format!(
                "output gradient {:?} does not match forward output ({}, {})",
                grad_out.dim(),
                tape.batch(),
                self.output_dim()
            )));
        }
        let n = self.params.w.len();
        let mut grads = Layers::zeros_like(&self.params);
        let mut delta = grad_out.to_owned();
        for k in (0..n).rev() {
            let a = &tape.acts[k];
            grads.w[k] = a.t().dot(&delta);
            grads.b[k] = delta.sum_axis(Axis(0));
            let mut up = delta.dot(&self.params.w[k].t());
            if k > 0 {
                // a is tanh(z) of the previous layer
                up.zip_mut_with(a, |d, &h| *d *= 1.0 - h * h);
            }
            delta = up;
        }
        Ok((grads, delta))
    }

    /// `self ← (1 − τ) self + τ other`.
    pub fn soft_update(&mut self, other: &Mlp, tau: f64) -> Result<()> {
        self.params.check_same_shape(&other.params)?;
        for (a, b) in self.params.w.iter_mut().zip(&other.params.w) {
            a.zip_mut_with(b, |x, &y| *x = (1.0 - tau) * *x + tau * y);
        }
        for (a, b) in self.params.b.iter_mut().zip(&other.params.b) {
            a.zip_mut_with(b, |x, &y| *x = (1.0 - tau) * *x + tau * y);
        }
        Ok(())
    }
}

pub(crate) fn check_grads(params: &Layers, grads: &Layers) -> Result<()> {
    params.check_same_shape(grads)
}

/// Outcome of a central-difference gradient check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub checked: usize,
    pub failures: usize,
    /// Largest `|fd − analytic|` over all probes.
    pub max_abs_error: f64,
}

/// Step of the central differences.
pub const FD_STEP: f64 = 1e-5;

/// Tolerance `max(1e-6, 1e-4 |g|)` for an analytic gradient `g`.
pub fn fd_tolerance(g: f64) -> f64 {
    1e-6f64.max(1e-4 * g.abs())
}

/// Checks `backward` against central differences of `Σ c ⊙ f(x)` on `probes`
/// random parameters and on every input entry.
pub fn gradient_check(net: &Mlp, x: &Array2<f64>, c: &Array2<f64>, probes: usize, rng: &mut RngStream) -> Result<GradCheck> {
    gradient_check_with(net, x, c, &|m, x| m.predict(x).map(|y| (y * c).sum()).unwrap_or(f64::NAN), probes, rng)
}

fn gradient_check_with(
    net: &Mlp,
    x: &Array2<f64>,
    grad_out: &Array2<f64>,
    loss: &dyn Fn(&Mlp, &Array2<f64>) -> f64,
    probes: usize,
    rng: &mut RngStream,
) -> Result<GradCheck> {
    let (_, tape) = net.forward(x)?;
    let (g, gx) = net.backward(&tape, grad_out)?;
    let flat = net.params().flatten();
    let gflat = g.flatten();
    let mut report = GradCheck { checked: 0, failures: 0, max_abs_error: 0.0 };
    let mut record = |fd: f64, analytic: f64| {
        let err = (fd - analytic).abs();
        report.checked += 1;
        report.max_abs_error = report.max_abs_error.max(err);
        if !(err <= fd_tolerance(analytic)) {
            report.failures += 1;
        }
    };
    let mut p = net.clone();
    for _ in 0..probes {
        let i = rng.index(flat.len());
        let mut f = flat.clone();
        f[i] += FD_STEP;
        p.params_mut().set_flat(&f)?;
        let up = loss(&p, x);
        f[i] -= 2.0 * FD_STEP;
        p.params_mut().set_flat(&f)?;
        let down = loss(&p, x);
        record((up - down) / (2.0 * FD_STEP), gflat[i]);
    }
    let mut xp = x.clone();
    for r in 0..x.nrows() {
        for col in 0..x.ncols() {
            let orig = xp[[r, col]];
            xp[[r, col]] = orig + FD_STEP;
            let up = loss(net, &xp);
            xp[[r, col]] = orig - FD_STEP;
            let down = loss(net, &xp);
            xp[[r, col]] = orig;
            record((up - down) / (2.0 * FD_STEP), gx[[r, col]]);
        }
    }
    Ok(report)
}
