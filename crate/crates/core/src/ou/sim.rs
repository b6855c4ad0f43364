use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{OuError, OuModel};
use crate::linalg::Vector;
use crate::nodeset::NodeSet;

/// A path on the grid `0, dt, 2dt, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    pub dt: f64,
    pub seed: u64,
    pub x: Vec<Vector>,
}

impl Path {
    pub fn steps(&self) -> usize {
        self.x.len().saturating_sub(1)
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.x.len()).map(|j| j as f64 * self.dt).collect()
    }

    /// Copy with the coordinates in `s` taken from `other`.
    pub fn splice(&self, other: &Path, s: &NodeSet) -> Result<Path, OuError> {
        if other.x.len() != self.x.len() || other.dt != self.dt {
            return Err(OuError::Grid("paths live on different grids".into()));
        }
        let mut out = self.clone();
        for (xs, xo) in out.x.iter_mut().zip(&other.x) {
            for v in s.iter() {
                xs[v.index()] = xo[v.index()];
            }
        }
        Ok(out)
    }
}

/// `X_{t+dt} = X_t + dt M (X_t - μ) + √dt σ₀ ε_t`, with `X₀ = μ + Γ₀^{1/2} z`.
pub fn euler_maruyama(model: &OuModel, t_end: f64, dt: f64, seed: u64) -> Result<Path, OuError> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(OuError::Grid(format!("need dt > 0 and T >= 0, got dt={dt}, T={t_end}")));
    }
    let steps = (t_end / dt).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = model.n();
    let noise_dim = model.sigma0().ncols();
    let mut draw = |k: usize| Vector::from_fn(k, |_, _| StandardNormal.sample(&mut rng));
    let z = draw(n);
    let x0 = model.mu() + model.gamma0_diag().map(f64::sqrt).component_mul(&z);
    let sq = dt.sqrt();
    let mut x = Vec::with_capacity(steps + 1);
    x.push(x0);
    for j in 0..steps {
        let cur = &x[j];
        let eps = draw(noise_dim);
        let next = cur + model.m() * (cur - model.mu()) * dt + model.sigma0() * eps * sq;
        x.push(next);
    }
    Ok(Path { dt, seed, x })
}
