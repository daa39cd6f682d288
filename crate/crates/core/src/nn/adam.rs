use serde::{Deserialize, Serialize};

use super::mlp::{check_grads, Layers, Mlp};
use crate::error::{Error, Result};

/// Bias-corrected Adam with one moment pair per parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    #[serde(skip)]
    state: Option<Moments>,
}

/// First and second moments, one entry per parameter in canonical order.
#[derive(Debug, Clone, PartialEq)]
struct Moments {
    t: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, state: None }
    }

    pub fn steps(&self) -> u64 {
        self.state.as_ref().map_or(0, |s| s.t)
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &Layers) -> Result<()> {
        check_grads(net.params(), grads)?;
        let n = grads.n_params();
        let params = net.params_mut();
        let p = params.w.iter_mut().zip(params.b.iter_mut()).flat_map(|(w, b)| w.iter_mut().chain(b.iter_mut()));
        let g = grads.w.iter().zip(&grads.b).flat_map(|(w, b)| w.iter().chain(b.iter()));
        self.apply(p, g, n)?;
        if !params.all_finite() {
            return Err(Error::NonFinite("parameters after Adam step".into()));
        }
        Ok(())
    }

    /// Same update on a bare parameter vector.
    pub fn step_slice(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != grads.len() {
            return Err(Error::ShapeMismatch(format!("{} parameters, {} gradients", params.len(), grads.len())));
        }
        let n = params.len();
        self.apply(params.iter_mut(), grads.iter(), n)?;
        if params.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("parameters after Adam step".into()));
        }
        Ok(())
    }

    fn apply<'a>(
        &mut self,
        params: impl Iterator<Item = &'a mut f64>,
        grads: impl Iterator<Item = &'a f64> + Clone,
        n: usize,
    ) -> Result<()> {
        if grads.clone().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("non-finite gradient".into()));
        }
        let st = self.state.get_or_insert_with(|| Moments { t: 0, m: vec![0.0; n], v: vec![0.0; n] });
        if st.m.len() != n {
            return Err(Error::ShapeMismatch(format!("optimizer tracks {} parameters, got {n}", st.m.len())));
        }
        st.t += 1;
        let (b1, b2, eps, lr) = (self.beta1, self.beta2, self.eps, self.lr);
        let c1 = 1.0 - b1.powi(st.t as i32);
        let c2 = 1.0 - b2.powi(st.t as i32);
        for (((p, &g), m), v) in params.zip(grads).zip(st.m.iter_mut()).zip(st.v.iter_mut()) {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        }
        Ok(())
    }
}
