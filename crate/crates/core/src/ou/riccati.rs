use super::{OuError, OuModel};
use crate::linalg::{
    care_solve, is_positive_definite, is_psd, lyapunov_solve, submatrix, symmetrize, CareProblem, CareSolution,
    LinalgError, Mat,
};
use crate::nodeset::NodeSet;

/// Coefficients of `γ' = γD + Dᵀγ - γEγ + F` for the filter of `X^U` given `X^W`:
///
/// * `D = M_UUᵀ - M_WUᵀ Σ_WW⁻¹ Σ_UWᵀ`
/// * `E = M_WUᵀ Σ_WW⁻¹ M_WU`
/// * `F = Σ_UU - Σ_UW Σ_WW⁻¹ Σ_UWᵀ`
#[derive(Clone, Debug, PartialEq)]
pub struct RiccatiSystem {
    /// Node indices of `U` and `W`, ascending.
    pub u: Vec<usize>,
    pub w: Vec<usize>,
    pub d: Mat,
    pub e: Mat,
    pub f: Mat,
    /// `Σ_UW`, `Σ_WW⁻¹`, kept for the filter gain.
    pub sigma_uw: Mat,
    pub sigma_ww_inv: Mat,
}

impl RiccatiSystem {
    pub fn k(&self) -> usize {
        self.u.len()
    }

    pub fn care_problem(&self) -> CareProblem {
        CareProblem { d: self.d.clone(), e: self.e.clone(), f: self.f.clone() }
    }

    /// Right-hand side of the differential equation.
    pub fn rhs(&self, g: &Mat) -> Mat {
        g * &self.d + self.d.transpose() * g - g * &self.e * g + &self.f
    }
}

/// Builds `D`, `E`, `F` for the split `U` (given) and `W = V ∖ U`.
pub fn build_def(model: &OuModel, u: &NodeSet) -> Result<RiccatiSystem, OuError> {
    let n = model.n();
    if u.universe() != n {
        return Err(OuError::InvalidModel("U does not match the model's node count".into()));
    }
    let uu: Vec<usize> = u.iter().map(|v| v.index()).collect();
    let ww: Vec<usize> = u.complement().iter().map(|v| v.index()).collect();
    let (m, s) = (model.m(), model.sigma());
    let m_uu = submatrix(m, &uu, &uu);
    let m_wu = submatrix(m, &ww, &uu);
    let s_uu = submatrix(s, &uu, &uu);
    let s_uw = submatrix(s, &uu, &ww);
    let s_ww = submatrix(s, &ww, &ww);
    let s_ww_inv = if ww.is_empty() {
        Mat::zeros(0, 0)
    } else {
        s_ww.cholesky().ok_or(LinalgError::Singular("S∘S"))?.inverse()
    };
    let d = m_uu.transpose() - m_wu.transpose() * &s_ww_inv * s_uw.transpose();
    let e = m_wu.transpose() * &s_ww_inv * &m_wu;
    let f = &s_uu - &s_uw * &s_ww_inv * s_uw.transpose();
    if !uu.is_empty() {
        if !is_positive_definite(&f) {
            return Err(LinalgError::NotPositiveDefinite { what: "F" }.into());
        }
        if !is_psd(&e, 1e-10) {
            return Err(LinalgError::NotPositiveDefinite { what: "E (semidefinite)" }.into());
        }
    }
    Ok(RiccatiSystem { u: uu, w: ww, d, e, f, sigma_uw: s_uw, sigma_ww_inv: s_ww_inv })
}

/// Closed-form solution of the differential Riccati equation,
/// `Γ(t) = Γ̄ + e^{tKᵀ} Δ (I + S(t) Δ)⁻¹ e^{tK}` with `Δ = Γ₀ - Γ̄`,
/// `K = D - EΓ̄` and `S(t) = ∫₀ᵗ e^{sK} E e^{sKᵀ} ds = S∞ - e^{tK} S∞ e^{tKᵀ}`.
#[derive(Clone, Debug)]
pub struct RiccatiFlow {
    pub care: CareSolution,
    pub k_mat: Mat,
    s_inf: Mat,
    delta: Mat,
}

impl RiccatiFlow {
    pub fn new(sys: &RiccatiSystem, gamma0: &Mat) -> Result<Self, OuError> {
        let k = sys.k();
        if gamma0.shape() != (k, k) {
            return Err(OuError::InvalidModel(format!("Gamma0 must be {k}x{k}")));
        }
        if !is_positive_definite(gamma0) {
            return Err(LinalgError::NotPositiveDefinite { what: "Gamma0" }.into());
        }
        let care = care_solve(&sys.care_problem())?;
        let k_mat = &sys.d - &sys.e * &care.x;
        let s_inf = lyapunov_solve(&k_mat, &sys.e)?;
        let delta = gamma0 - &care.x;
        Ok(RiccatiFlow { care, k_mat, s_inf, delta })
    }

    pub fn gamma_bar(&self) -> &Mat {
        &self.care.x
    }

    fn gamma_from_exp(&self, etk: &Mat) -> Result<Mat, OuError> {
        let k = self.k_mat.nrows();
        let s_t = &self.s_inf - etk * &self.s_inf * etk.transpose();
        let inner = (Mat::identity(k, k) + s_t * &self.delta)
            .try_inverse()
            .ok_or(LinalgError::Singular("I + S(t)(Γ₀ - Γ̄)"))?;
        Ok(symmetrize(&(&self.care.x + etk.transpose() * &self.delta * inner * etk)))
    }

    pub fn at(&self, t: f64) -> Result<Mat, OuError> {
        self.gamma_from_exp(&(&self.k_mat * t).exp())
    }

    /// `Γ(j·dt)` for `j = 0..=steps`, reusing `e^{dt K}`.
    pub fn uniform(&self, dt: f64, steps: usize) -> Result<Vec<Mat>, OuError> {
        let k = self.k_mat.nrows();
        let step = (&self.k_mat * dt).exp();
        let mut etk = Mat::identity(k, k);
        let mut out = Vec::with_capacity(steps + 1);
        for _ in 0..=steps {
            out.push(self.gamma_from_exp(&etk)?);
            etk = &etk * &step;
        }
        Ok(out)
    }
}

/// `Γ(t)` for each `t` in `times`.
pub fn riccati_diff(sys: &RiccatiSystem, gamma0: &Mat, times: &[f64]) -> Result<Vec<Mat>, OuError> {
    let flow = RiccatiFlow::new(sys, gamma0)?;
    times.iter().map(|&t| flow.at(t)).collect()
}

/// Classical RK4 on the differential equation, sampled every `h` up to `t_end`.
pub fn riccati_rk4(sys: &RiccatiSystem, gamma0: &Mat, t_end: f64, h: f64) -> Vec<(f64, Mat)> {
    let steps = (t_end / h).round() as usize;
    let mut g = gamma0.clone();
    let mut out = vec![(0.0, g.clone())];
    for i in 0..steps {
        let k1 = sys.rhs(&g);
        let k2 = sys.rhs(&(&g + &k1 * (h / 2.0)));
        let k3 = sys.rhs(&(&g + &k2 * (h / 2.0)));
        let k4 = sys.rhs(&(&g + &k3 * h));
        g += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        out.push(((i + 1) as f64 * h, g.clone()));
    }
    out
}
