use super::{build_def, OuError, OuModel, Path, RiccatiFlow};
use crate::linalg::{subvector, submatrix, Mat, Vector};
use crate::nodeset::NodeSet;
use crate::NodeId;

/// Conditional means `m_t = E(X_t^U | F_t^W)` and covariances `γ_t` on the path grid.
#[derive(Clone, Debug)]
pub struct FilterRun {
    pub u: Vec<usize>,
    pub w: Vec<usize>,
    pub m: Vec<Vector>,
    pub gamma: Vec<Mat>,
}

impl FilterRun {
    /// `E(X_t^v | F_t^W)` at step `j`: the observation if `v ∈ W`.
    pub fn estimate(&self, path: &Path, j: usize, v: usize) -> f64 {
        match self.u.iter().position(|&x| x == v) {
            Some(k) => self.m[j][k],
            None => path.x[j][v],
        }
    }
}

/// Filter coefficients for one observation set, reusable across paths on the same grid.
#[derive(Clone, Debug)]
pub struct PreparedFilter {
    u: Vec<usize>,
    w: Vec<usize>,
    dt: f64,
    gamma: Vec<Mat>,
    m0: Vector,
    a_u: Vector,
    a_w: Vector,
    m_uu: Mat,
    m_uw: Mat,
    m_wu: Mat,
    m_ww: Mat,
    /// `(Σ_UW + γ_j M_WUᵀ) Σ_WW⁻¹` per step.
    gains: Vec<Mat>,
}

impl PreparedFilter {
    pub fn new(model: &OuModel, w: &NodeSet, dt: f64, steps: usize) -> Result<Self, OuError> {
        if w.universe() != model.n() {
            return Err(OuError::Grid("W does not match the model".into()));
        }
        let sys = build_def(model, &w.complement())?;
        let (uu, ww) = (sys.u.clone(), sys.w.clone());
        let gamma = if uu.is_empty() {
            vec![Mat::zeros(0, 0); steps + 1]
        } else {
            let gamma0 = Mat::from_diagonal(&subvector(model.gamma0_diag(), &uu));
            RiccatiFlow::new(&sys, &gamma0)?.uniform(dt, steps)?
        };
        let a = model.a();
        let mm = model.m();
        let m_wu = submatrix(mm, &ww, &uu);
        let m_wu_t = m_wu.transpose();
        let gains = gamma.iter().map(|g| (&sys.sigma_uw + g * &m_wu_t) * &sys.sigma_ww_inv).collect();
        Ok(PreparedFilter {
            dt,
            m0: subvector(model.mu(), &uu),
            a_u: subvector(&a, &uu),
            a_w: subvector(&a, &ww),
            m_uu: submatrix(mm, &uu, &uu),
            m_uw: submatrix(mm, &uu, &ww),
            m_ww: submatrix(mm, &ww, &ww),
            m_wu,
            gains,
            gamma,
            u: uu,
            w: ww,
        })
    }

    pub fn run(&self, path: &Path) -> Result<FilterRun, OuError> {
        let steps = path.steps();
        if path.dt != self.dt || steps + 1 != self.gamma.len() {
            return Err(OuError::Grid("path grid differs from the prepared filter".into()));
        }
        let dt = self.dt;
        let mut m = Vec::with_capacity(steps + 1);
        m.push(self.m0.clone());
        for j in 0..steps {
            let xw = subvector(&path.x[j], &self.w);
            let cur = &m[j];
            let drift = &self.a_u + &self.m_uu * cur + &self.m_uw * &xw;
            let mut next = cur + drift * dt;
            if !self.w.is_empty() && !self.u.is_empty() {
                let dxw = subvector(&path.x[j + 1], &self.w) - &xw;
                let innovation = dxw - (&self.a_w + &self.m_wu * cur + &self.m_ww * &xw) * dt;
                next += &self.gains[j] * innovation;
            }
            m.push(next);
        }
        Ok(FilterRun { u: self.u.clone(), w: self.w.clone(), m, gamma: self.gamma.clone() })
    }
}

/// Euler scheme for
/// `dm = (a_U + M_UU m + M_UW X^W) dt + G (dX^W - (a_W + M_WU m + M_WW X^W) dt)`
/// with gain `G = (Σ_UW + γ M_WUᵀ) Σ_WW⁻¹` and `γ` from the closed-form
/// Riccati solution. Starts at `m₀ = μ_U`, `γ₀ = Γ₀_UU`.
pub fn kalman_bucy_filter(model: &OuModel, w: &NodeSet, path: &Path) -> Result<FilterRun, OuError> {
    if path.x.first().is_some_and(|x| x.len() != model.n()) {
        return Err(OuError::Grid("path does not match the model".into()));
    }
    PreparedFilter::new(model, w, path.dt, path.steps())?.run(path)
}

/// `E(λ_t^β | F_t^W) = Σ_δ M_βδ (E(X_t^δ | F_t^W) - μ_δ)` along the grid.
pub fn lambda_hat(model: &OuModel, run: &FilterRun, path: &Path, beta: NodeId) -> Vec<f64> {
    let b = beta.index();
    let parents: Vec<usize> = (0..model.n()).filter(|&d| model.m()[(b, d)] != 0.0).collect();
    (0..path.x.len())
        .map(|j| parents.iter().map(|&d| model.m()[(b, d)] * (run.estimate(path, j, d) - model.mu()[d])).sum())
        .collect()
}
