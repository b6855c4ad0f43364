//! Small dense solvers: eigenvalues, Lyapunov and algebraic Riccati equations.

use nalgebra::{DMatrix, DVector, Schur};
use thiserror::Error;

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not square ({0}x{1})")]
    NotSquare(usize, usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("singular system in {0}")]
    Singular(&'static str),
    #[error("matrix is not symmetric (asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("{what} is not positive definite")]
    NotPositiveDefinite { what: &'static str },
    #[error("Hamiltonian has an eigenvalue with |Re| = {0:.3e}, too close to the imaginary axis")]
    NearImaginary(f64),
    #[error("Newton iteration diverged after {0} steps (residual {1:.3e})")]
    Divergence(usize, f64),
}

fn require_square(m: &Mat) -> Result<(), LinalgError> {
    if m.nrows() == m.ncols() {
        Ok(())
    } else {
        Err(LinalgError::NotSquare(m.nrows(), m.ncols()))
    }
}

/// Eigenvalues as `(re, im)` pairs.
pub fn eigenvalues(m: &Mat) -> Result<Vec<(f64, f64)>, LinalgError> {
    require_square(m)?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER).or_else(|| {
        // QR sweeps can stall on very regular zero patterns; a reflection
        // keeps the spectrum and breaks the pattern.
        let n = m.nrows();
        let v = Vector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618_034).fract());
        let h = Mat::identity(n, n) - &v * v.transpose() * (2.0 / v.norm_squared());
        Schur::try_new(&h * m * &h, 4.0 * f64::EPSILON, SCHUR_MAX_ITER)
    });
    let schur = schur.ok_or(LinalgError::NoConvergence)?;
    Ok(schur.complex_eigenvalues().iter().map(|c| (c.re, c.im)).collect())
}

/// Largest real part of the spectrum (`-inf` for an empty matrix).
pub fn spectral_abscissa(m: &Mat) -> Result<f64, LinalgError> {
    Ok(eigenvalues(m)?.into_iter().map(|(re, _)| re).fold(f64::NEG_INFINITY, f64::max))
}

/// All eigenvalues have negative real part.
pub fn is_stable(m: &Mat) -> Result<bool, LinalgError> {
    Ok(spectral_abscissa(m)? < 0.0)
}

pub fn asymmetry(m: &Mat) -> f64 {
    (m - m.transpose()).amax()
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Cholesky succeeds after symmetrizing.
pub fn is_positive_definite(m: &Mat) -> bool {
    m.nrows() == m.ncols() && symmetrize(m).cholesky().is_some()
}

/// Smallest eigenvalue of the symmetric part is above `-tol`.
pub fn is_psd(m: &Mat, tol: f64) -> bool {
    if m.nrows() == 0 {
        return true;
    }
    let ev = symmetrize(m).symmetric_eigenvalues();
    ev.min() >= -tol * m.amax().max(1.0)
}

/// Solves `M X + X Mᵀ + Q = 0` through the Kronecker form
/// `(I ⊗ M + M ⊗ I) vec(X) = -vec(Q)`.
pub fn lyapunov_solve(m: &Mat, q: &Mat) -> Result<Mat, LinalgError> {
    require_square(m)?;
    let k = m.nrows();
    if q.shape() != (k, k) {
        return Err(LinalgError::Dimension(format!("M is {k}x{k}, Q is {}x{}", q.nrows(), q.ncols())));
    }
    if k == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    let id = Mat::identity(k, k);
    let big = id.kronecker(m) + m.kronecker(&id);
    let rhs = -Vector::from_column_slice(q.as_slice());
    let x = big.lu().solve(&rhs).ok_or(LinalgError::Singular("Lyapunov equation"))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::Singular("Lyapunov equation"));
    }
    let x = Mat::from_column_slice(k, k, x.as_slice());
    Ok(if asymmetry(q) == 0.0 { symmetrize(&x) } else { x })
}

pub fn lyapunov_residual(m: &Mat, q: &Mat, x: &Mat) -> f64 {
    (m * x + x * m.transpose() + q).norm()
}

/// Coefficients of `0 = Γ D + Dᵀ Γ - Γ E Γ + F`.
#[derive(Clone, Debug, PartialEq)]
pub struct CareProblem {
    pub d: Mat,
    pub e: Mat,
    pub f: Mat,
}

impl CareProblem {
    pub fn dim(&self) -> usize {
        self.d.nrows()
    }

    pub fn residual(&self, x: &Mat) -> Mat {
        x * &self.d + self.d.transpose() * x - x * &self.e * x + &self.f
    }

    /// `‖residual‖_F / (‖F‖ + ‖X‖²‖E‖)`.
    pub fn relative_residual(&self, x: &Mat) -> f64 {
        let scale = self.f.norm() + x.norm().powi(2) * self.e.norm();
        self.residual(x).norm() / scale.max(f64::MIN_POSITIVE)
    }

    /// `[[D, -E], [-F, -Dᵀ]]`.
    pub fn hamiltonian(&self) -> Mat {
        let k = self.dim();
        let mut h = Mat::zeros(2 * k, 2 * k);
        h.view_mut((0, 0), (k, k)).copy_from(&self.d);
        h.view_mut((0, k), (k, k)).copy_from(&(-&self.e));
        h.view_mut((k, 0), (k, k)).copy_from(&(-&self.f));
        h.view_mut((k, k), (k, k)).copy_from(&(-self.d.transpose()));
        h
    }
}

#[derive(Clone, Debug)]
pub struct CareSolution {
    pub x: Mat,
    /// Smallest `|Re λ|` over the Hamiltonian spectrum.
    pub hamiltonian_gap: f64,
    /// Relative residual after each Newton step.
    pub newton_residuals: Vec<f64>,
    /// Newton iterates, starting with the sign-function solution.
    pub iterates: Vec<Mat>,
}

pub const CARE_TOL: f64 = 1e-8;
const HAMILTONIAN_GAP_MIN: f64 = 1e-9;
const NEWTON_MAX: usize = 50;
const SIGN_MAX: usize = 100;

/// Stabilizing solution of the algebraic Riccati equation.
///
/// The stable invariant subspace of the Hamiltonian is found with the
/// matrix sign function, then refined by Newton-Kleinman steps
/// `(D - E X_i)ᵀ X + X (D - E X_i) + X_i E X_i + F = 0`.
pub fn care_solve(p: &CareProblem) -> Result<CareSolution, LinalgError> {
    let k = p.dim();
    for (name, m) in [("D", &p.d), ("E", &p.e), ("F", &p.f)] {
        if m.shape() != (k, k) {
            return Err(LinalgError::Dimension(format!("{name} must be {k}x{k}")));
        }
    }
    if k == 0 {
        return Ok(CareSolution { x: Mat::zeros(0, 0), hamiltonian_gap: f64::INFINITY, newton_residuals: vec![], iterates: vec![] });
    }
    let h = p.hamiltonian();
    let gap = eigenvalues(&h)?.into_iter().map(|(re, _)| re.abs()).fold(f64::INFINITY, f64::min);
    if gap < HAMILTONIAN_GAP_MIN * h.amax().max(1.0) {
        return Err(LinalgError::NearImaginary(gap));
    }
    let s = matrix_sign(&h)?;
    // sign(H) [I; X] = -[I; X] for the stable subspace
    let mut lhs = Mat::zeros(2 * k, k);
    lhs.view_mut((0, 0), (k, k)).copy_from(&s.view((0, k), (k, k)));
    lhs.view_mut((k, 0), (k, k)).copy_from(&(s.view((k, k), (k, k)) + Mat::identity(k, k)));
    let mut rhs = Mat::zeros(2 * k, k);
    rhs.view_mut((0, 0), (k, k)).copy_from(&(-(s.view((0, 0), (k, k)) + Mat::identity(k, k))));
    rhs.view_mut((k, 0), (k, k)).copy_from(&(-s.view((k, 0), (k, k))));
    let x0 = symmetrize(&least_squares(&lhs, &rhs)?);
    let (x, newton_residuals, iterates) = newton_kleinman(p, x0)?;
    Ok(CareSolution { x, hamiltonian_gap: gap, newton_residuals, iterates })
}

/// Newton-Kleinman from a stabilizing start. Returns the final iterate,
/// residual history and all iterates (including `x0`).
pub fn newton_kleinman(p: &CareProblem, x0: Mat) -> Result<(Mat, Vec<f64>, Vec<Mat>), LinalgError> {
    let mut x = x0;
    let mut residuals = vec![p.relative_residual(&x)];
    let mut iterates = vec![x.clone()];
    for step in 0..NEWTON_MAX {
        if residuals.last().is_some_and(|&r| r <= 1e-14) {
            break;
        }
        let closed = &p.d - &p.e * &x;
        let q = &x * &p.e * &x + &p.f;
        let next = lyapunov_solve(&closed.transpose(), &q)?;
        let r = p.relative_residual(&next);
        let prev = *residuals.last().expect("non-empty");
        x = next;
        residuals.push(r);
        iterates.push(x.clone());
        if !r.is_finite() || (step > 5 && r > prev * 10.0) {
            return Err(LinalgError::Divergence(step + 1, r));
        }
        if r >= prev * 0.9 && r <= CARE_TOL {
            break;
        }
    }
    let last = *residuals.last().expect("non-empty");
    if last > CARE_TOL {
        return Err(LinalgError::Divergence(residuals.len() - 1, last));
    }
    Ok((x, residuals, iterates))
}

/// Newton iteration for sign(H) with determinant scaling.
fn matrix_sign(h: &Mat) -> Result<Mat, LinalgError> {
    let n = h.nrows() as f64;
    let mut z = h.clone();
    for _ in 0..SIGN_MAX {
        let inv = z.clone().try_inverse().ok_or(LinalgError::Singular("sign function"))?;
        let det = z.determinant().abs();
        let c = if det > 0.0 && det.is_finite() { det.powf(-1.0 / n) } else { 1.0 };
        let next = (&z * c + inv / c) * 0.5;
        let change = (&next - &z).norm() / next.norm();
        z = next;
        if change < 1e-13 {
            return Ok(z);
        }
    }
    Err(LinalgError::NoConvergence)
}

fn least_squares(a: &Mat, b: &Mat) -> Result<Mat, LinalgError> {
    let svd = a.clone().svd(true, true);
    svd.solve(b, 1e-14).map_err(|_| LinalgError::Singular("least squares"))
}

/// Rows and columns of `m` picked by index lists.
pub fn submatrix(m: &Mat, rows: &[usize], cols: &[usize]) -> Mat {
    Mat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

pub fn subvector(v: &Vector, idx: &[usize]) -> Vector {
    Vector::from_fn(idx.len(), |i, _| v[idx[i]])
}

/// `max |m_ij|`, zero for an empty matrix.
pub fn max_abs(m: &Mat) -> f64 {
    if m.is_empty() {
        0.0
    } else {
        m.amax()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(rows: &[&[f64]]) -> Mat {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn stability() {
        assert!(is_stable(&-Mat::identity(3, 3)).unwrap());
        assert!(!is_stable(&Mat::identity(3, 3)).unwrap());
        assert!(!is_stable(&mat(&[&[0.0, 1.0], &[-1.0, 0.0]])).unwrap());
        let ev = eigenvalues(&mat(&[&[0.0, 1.0], &[-1.0, 0.0]])).unwrap();
        assert!(ev.iter().all(|&(re, im)| re.abs() < 1e-12 && (im.abs() - 1.0).abs() < 1e-12));
        assert!(matches!(is_stable(&Mat::zeros(2, 3)), Err(LinalgError::NotSquare(2, 3))));
    }

    #[test]
    fn lyapunov_examples() {
        let x = lyapunov_solve(&-Mat::identity(2, 2), &(Mat::identity(2, 2) * 2.0)).unwrap();
        assert!((x - Mat::identity(2, 2)).amax() < 1e-14);
        let m = Mat::from_diagonal(&Vector::from_vec(vec![-1.0, -2.0]));
        let x = lyapunov_solve(&m, &Mat::identity(2, 2)).unwrap();
        assert!((x - Mat::from_diagonal(&Vector::from_vec(vec![0.5, 0.25]))).amax() < 1e-14);
        assert!(lyapunov_solve(&Mat::zeros(2, 2), &Mat::identity(2, 2)).is_err());
    }

    #[test]
    fn lyapunov_matches_quadrature() {
        let m = mat(&[&[-1.0, 0.5, 0.0], &[0.2, -0.8, 0.3], &[0.0, -0.4, -1.5]]);
        let q = mat(&[&[1.0, 0.3, 0.0], &[0.3, 2.0, 0.1], &[0.0, 0.1, 0.5]]);
        let x = lyapunov_solve(&m, &q).unwrap();
        // composite Simpson on [0, 40] for the integral of e^{Ms} Q e^{Mᵀs}
        let (n, t) = (8000, 40.0);
        let h = t / n as f64;
        let step = (&m * h).exp();
        let mut e = Mat::identity(3, 3);
        let mut acc = Mat::zeros(3, 3);
        for i in 0..=n {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += &e * &q * e.transpose() * w;
            e = &step * e;
        }
        acc *= h / 3.0;
        assert!((acc - &x).amax() < 1e-9, "{x}");
    }

    #[test]
    fn scalar_care() {
        let p = CareProblem { d: mat(&[&[-1.0]]), e: mat(&[&[1.0]]), f: mat(&[&[1.0]]) };
        let s = care_solve(&p).unwrap();
        assert!((s.x[(0, 0)] - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!(s.hamiltonian_gap > 1.0);
    }

    #[test]
    fn care_without_quadratic_term_is_lyapunov() {
        let d = mat(&[&[-1.0, 0.4], &[0.0, -2.0]]);
        let f = mat(&[&[1.0, 0.2], &[0.2, 1.0]]);
        let s = care_solve(&CareProblem { d: d.clone(), e: Mat::zeros(2, 2), f: f.clone() }).unwrap();
        let l = lyapunov_solve(&d.transpose(), &f).unwrap();
        assert!((s.x - l).amax() < 1e-12);
    }

    fn stable_matrix(k: usize) -> impl Strategy<Value = Mat> {
        prop::collection::vec(-1.0..1.0f64, k * k).prop_map(move |v| {
            let m = Mat::from_vec(k, k, v);
            let a = spectral_abscissa(&m).unwrap();
            m - Mat::identity(k, k) * (a.max(0.0) + 0.5)
        })
    }

    fn spd(k: usize) -> impl Strategy<Value = Mat> {
        prop::collection::vec(-1.0..1.0f64, k * k).prop_map(move |v| {
            let b = Mat::from_vec(k, k, v);
            &b * b.transpose() + Mat::identity(k, k) * 0.1
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn lyapunov_residual_small((m, q) in (1usize..6).prop_flat_map(|k| (stable_matrix(k), spd(k)))) {
            let x = lyapunov_solve(&m, &q).unwrap();
            prop_assert!(lyapunov_residual(&m, &q, &x) <= 1e-10 * q.norm());
            prop_assert!(is_psd(&x, 1e-12));
        }

        #[test]
        fn care_solution_is_stabilizing((d, b, f) in (1usize..6).prop_flat_map(|k| (stable_matrix(k), spd(k), spd(k)))) {
            let p = CareProblem { d, e: b, f };
            let s = care_solve(&p).unwrap();
            prop_assert!(p.relative_residual(&s.x) <= CARE_TOL);
            prop_assert!(is_psd(&s.x, 1e-10));
            prop_assert!(is_stable(&(&p.d - &p.e * &s.x)).unwrap());
        }
    }
}
