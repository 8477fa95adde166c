//! Linear quadrature dynamics over (X, P, x, p): drift, diffusion, stability,
//! and the steady-state covariance.

use nalgebra::{Matrix4, SMatrix, SVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::becmodel::LinearModel;
use crate::error::{domain, Error, Result};

/// Below this magnitude of max Re(lambda) the drift is treated as unstable.
pub const MARGINAL_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(pub Matrix4<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiffusionMatrix {
    /// (D_XX, D_PP, D_xx, D_pp)
    pub diag: [f64; 4],
}

impl DiffusionMatrix {
    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_diagonal(&self.diag.into())
    }
}

/// Symmetrized second moments with vacuum variance 1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(pub Matrix4<f64>);

impl CovarianceMatrix {
    pub fn vacuum() -> Self {
        Self(Matrix4::identity() * 0.5)
    }

    pub fn asymmetry(&self) -> f64 {
        (self.0 - self.0.transpose()).amax()
    }

    /// Determinants of the two diagonal 2x2 mode blocks.
    pub fn block_determinants(&self) -> (f64, f64) {
        let m = &self.0;
        (
            m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
            m[(2, 2)] * m[(3, 3)] - m[(2, 3)] * m[(3, 2)],
        )
    }

    pub fn rows(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.0[(i, j)];
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub eigenvalues: [Complex64; 4],
    pub max_real: f64,
    pub stable_eigen: bool,
    pub stable_routh_hurwitz: bool,
    /// (a3, a2, a1, a0) of the characteristic polynomial of A / |A|_max.
    pub coefficients: [f64; 4],
    /// a3, a0, a3 a2 - a1, (a3 a2 - a1) a1 - a3^2 a0 for the scaled matrix.
    pub hurwitz: [f64; 4],
    /// |max Re lambda| < MARGINAL_MARGIN.
    pub marginal: bool,
}

impl StabilityReport {
    /// Usable for steady-state work: stable and outside the marginal band.
    pub fn is_stable(&self) -> bool {
        self.stable_eigen && !self.marginal
    }

    pub fn to_error(&self) -> Error {
        Error::Unstable {
            max_real: self.max_real,
            eigenvalues: self.eigenvalues,
        }
    }
}

pub fn drift_matrix(model: &LinearModel) -> DriftMatrix {
    let (k, g, w, d) = (model.kappa, model.gamma, model.omega, model.delta_tilde);
    let c = 2.0 * model.g_bar;
    #[rustfmt::skip]
    let a = Matrix4::new(
        -k,   d,   0.0, 0.0,
        -d,  -k,   c,   0.0,
        0.0, 0.0, -g,   w,
        c,   0.0, -w,  -g,
    );
    DriftMatrix(a)
}

pub fn diffusion_matrix(model: &LinearModel) -> DiffusionMatrix {
    let bath = model.kappa_0 * (2.0 * model.n_th + 1.0);
    let mech = model.gamma * (2.0 * model.n_c + 1.0);
    DiffusionMatrix {
        diag: [
            model.kappa_ex * (model.u - model.v).powi(2) + bath,
            model.kappa_ex * (model.u + model.v).powi(2) + bath,
            mech,
            mech,
        ],
    }
}

fn det3(m: &Matrix4<f64>, idx: [usize; 3]) -> f64 {
    let e = |i: usize, j: usize| m[(idx[i], idx[j])];
    e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
        + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
}

/// Characteristic polynomial coefficients (a3, a2, a1, a0) from principal minors.
pub fn characteristic_coefficients(m: &Matrix4<f64>) -> [f64; 4] {
    let a3 = -m.trace();
    let mut a2 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            a2 += m[(i, i)] * m[(j, j)] - m[(i, j)] * m[(j, i)];
        }
    }
    let a1 = -(det3(m, [1, 2, 3]) + det3(m, [0, 2, 3]) + det3(m, [0, 1, 3]) + det3(m, [0, 1, 2]));
    let a0 = m.determinant();
    [a3, a2, a1, a0]
}

pub fn routh_hurwitz(coeffs: [f64; 4]) -> ([f64; 4], bool) {
    let [a3, a2, a1, a0] = coeffs;
    let h2 = a3 * a2 - a1;
    let h3 = h2 * a1 - a3 * a3 * a0;
    let h = [a3, a0, h2, h3];
    (h, h.iter().all(|&x| x > 0.0))
}

pub fn eigenvalues(a: &DriftMatrix) -> [Complex64; 4] {
    let ev = a.0.complex_eigenvalues();
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for (o, e) in out.iter_mut().zip(ev.iter()) {
        *o = *e;
    }
    out.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    out
}

pub fn stability(a: &DriftMatrix) -> StabilityReport {
    let eigs = eigenvalues(a);
    let max_real = eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let scale = a.0.amax();
    let scaled = if scale > 0.0 { a.0 / scale } else { a.0 };
    let coefficients = characteristic_coefficients(&scaled);
    let (hurwitz, stable_rh) = routh_hurwitz(coefficients);
    StabilityReport {
        eigenvalues: eigs,
        max_real,
        stable_eigen: max_real < 0.0,
        stable_routh_hurwitz: stable_rh,
        coefficients,
        hurwitz,
        marginal: max_real.abs() < MARGINAL_MARGIN,
    }
}

fn lyapunov_residual(a: &Matrix4<f64>, v: &Matrix4<f64>, d: &Matrix4<f64>) -> Matrix4<f64> {
    a * v + v * a.transpose() + d
}

/// Solves A V + V A^T = -D through the vectorized 16x16 system.
pub fn solve_lyapunov(a: &DriftMatrix, d: &DiffusionMatrix) -> Result<CovarianceMatrix> {
    let report = stability(a);
    if !report.is_stable() {
        return Err(report.to_error());
    }
    let am = a.0;
    let dm = d.matrix();
    // column-major vec: vec(A V) = (I (x) A) vec V, vec(V A^T) = (A (x) I) vec V
    let mut big = SMatrix::<f64, 16, 16>::zeros();
    for j in 0..4 {
        for i in 0..4 {
            let row = 4 * j + i;
            for k in 0..4 {
                big[(row, 4 * j + k)] += am[(i, k)];
                big[(row, 4 * k + i)] += am[(j, k)];
            }
        }
    }
    let lu = big.lu();
    let rhs = SVector::<f64, 16>::from_iterator(dm.iter().map(|x| -x));
    let mut x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Conditioning("vectorized Lyapunov system is singular".into()))?;
    // one step of iterative refinement
    let r = rhs - big * x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Conditioning("non-finite Lyapunov solution".into()));
    }
    let v = Matrix4::from_column_slice(x.as_slice());
    let v = (v + v.transpose()) * 0.5;
    let res = lyapunov_residual(&am, &v, &dm).amax();
    let bound = 1e-10 * dm.amax();
    if res > bound {
        return Err(Error::Conditioning(format!(
            "Lyapunov residual {res:e} exceeds {bound:e}"
        )));
    }
    Ok(CovarianceMatrix(v))
}

/// Classical RK4 integration of dV/dt = A V + V A^T + D.
pub fn evolve_covariance(
    a: &DriftMatrix,
    d: &DiffusionMatrix,
    v_init: &CovarianceMatrix,
    t_final: f64,
    dt: f64,
) -> Result<CovarianceMatrix> {
    if !(dt > 0.0) || !(t_final >= 0.0) || !t_final.is_finite() {
        return Err(domain(format!(
            "need dt > 0 and finite t_final >= 0, got dt={dt}, t_final={t_final}"
        )));
    }
    let am = a.0;
    let at = am.transpose();
    let dm = d.matrix();
    let f = |v: &Matrix4<f64>| am * v + v * at + dm;
    let steps = (t_final / dt).ceil() as u64;
    let h = if steps > 0 { t_final / steps as f64 } else { 0.0 };
    let limit = 1e12 * (v_init.0.amax() + dm.amax() * t_final.max(1.0) + 1.0);
    let mut v = v_init.0;
    for step in 0..steps {
        let k1 = f(&v);
        let k2 = f(&(v + k1 * (h / 2.0)));
        let k3 = f(&(v + k2 * (h / 2.0)));
        let k4 = f(&(v + k3 * h));
        v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let norm = v.amax();
        if !norm.is_finite() || norm > limit {
            return Err(Error::Integration(format!(
                "covariance norm blew up to {norm:e} at step {step} (dt = {h:e})"
            )));
        }
    }
    Ok(CovarianceMatrix(v))
}

/// Rotates the optical quadratures from the Bogoliubov to the cavity basis:
/// V' = S V S with S = diag(u+v, u-v, 1, 1).
pub fn cavity_basis_covariance(v: &CovarianceMatrix, u: f64, w: f64) -> Result<CovarianceMatrix> {
    if (u * u - w * w - 1.0).abs() > 1e-9 {
        return Err(domain(format!("u^2 - v^2 = {} != 1", u * u - w * w)));
    }
    let s = Matrix4::from_diagonal(&[u + w, u - w, 1.0, 1.0].into());
    Ok(CovarianceMatrix(s * v.0 * s))
}

fn clamp_occupation(name: &str, n: f64) -> Result<f64> {
    if n >= 0.0 {
        Ok(n)
    } else if n > -1e-9 {
        Ok(0.0)
    } else if n > -1e-6 {
        log::warn!("{name} = {n:e} is negative beyond round-off; clamped to 0");
        Ok(0.0)
    } else {
        Err(Error::Physicality(format!("{name} = {n:e} < 0")))
    }
}

/// (n_phonon, n_photon) from the Bogoliubov-basis and cavity-basis covariances.
pub fn steady_state_occupations(v: &CovarianceMatrix, v_prime: &CovarianceMatrix) -> Result<(f64, f64)> {
    let n_phonon = (v.0[(2, 2)] + v.0[(3, 3)] - 1.0) / 2.0;
    let n_photon = (v_prime.0[(0, 0)] + v_prime.0[(1, 1)] - 1.0) / 2.0;
    Ok((
        clamp_occupation("n_phonon", n_phonon)?,
        clamp_occupation("n_photon", n_photon)?,
    ))
}

/// Temperature whose Bose factor at `omega_eff` equals `n_phonon`.
pub fn effective_temperature(n_phonon: f64, omega_eff: f64) -> Result<f64> {
    if !(n_phonon >= 0.0) {
        return Err(domain(format!("occupation must be >= 0, got {n_phonon}")));
    }
    if !(omega_eff > 0.0) {
        return Err(domain(format!("effective frequency must be > 0, got {omega_eff}")));
    }
    if n_phonon == 0.0 {
        return Ok(0.0);
    }
    Ok(omega_eff / (1.0 / n_phonon).ln_1p())
}

/// Full steady-state bundle for one model.
#[derive(Debug, Clone, Copy)]
pub struct SteadyState {
    pub stability: StabilityReport,
    pub v: CovarianceMatrix,
    pub v_prime: CovarianceMatrix,
    pub n_phonon: f64,
    pub n_photon: f64,
    /// Omega_eff evaluated at omega = Omega.
    pub omega_eff: f64,
    pub t_eff: f64,
}

pub fn steady_state(model: &LinearModel) -> Result<SteadyState> {
    let a = drift_matrix(model);
    let report = stability(&a);
    if !report.is_stable() {
        return Err(report.to_error());
    }
    let v = solve_lyapunov(&a, &diffusion_matrix(model))?;
    let v_prime = cavity_basis_covariance(&v, model.u, model.v)?;
    let (n_phonon, n_photon) = steady_state_occupations(&v, &v_prime)?;
    let resp = crate::spectra::mechanical_response(model, model.omega);
    if !(resp.omega_eff_sq > 0.0) {
        return Err(Error::Physicality(format!(
            "Omega_eff^2 = {:e} at omega = Omega",
            resp.omega_eff_sq
        )));
    }
    let omega_eff = resp.omega_eff_sq.sqrt();
    Ok(SteadyState {
        stability: report,
        v,
        v_prime,
        n_phonon,
        n_photon,
        omega_eff,
        t_eff: effective_temperature(n_phonon, omega_eff)?,
    })
}
