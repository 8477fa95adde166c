//! Photon-phonon entanglement of the steady state via logarithmic negativity.

use nalgebra::{Matrix2, Matrix4};

use crate::dynamics::CovarianceMatrix;
use crate::error::{domain, Error, Result};

const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockDecomposition {
    /// Optical block.
    pub v1: Matrix2<f64>,
    /// Mechanical block.
    pub v2: Matrix2<f64>,
    /// Optical-mechanical correlations.
    pub vc: Matrix2<f64>,
}

impl BlockDecomposition {
    pub fn reassemble(&self) -> CovarianceMatrix {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.v1);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.v2);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.vc);
        m.fixed_view_mut::<2, 2>(2, 0).copy_from(&self.vc.transpose());
        CovarianceMatrix(m)
    }
}

pub fn block_decompose(v: &CovarianceMatrix) -> Result<BlockDecomposition> {
    let asym = v.asymmetry();
    let scale = v.0.amax().max(1.0);
    if asym > SYMMETRY_TOL * scale {
        return Err(domain(format!(
            "covariance matrix is not symmetric (max |V - V^T| = {asym:e})"
        )));
    }
    Ok(BlockDecomposition {
        v1: v.0.fixed_view::<2, 2>(0, 0).into_owned(),
        v2: v.0.fixed_view::<2, 2>(2, 2).into_owned(),
        vc: v.0.fixed_view::<2, 2>(0, 2).into_owned(),
    })
}

/// det V1 + det V2 - 2 det V_C.
pub fn sigma_invariant(b: &BlockDecomposition) -> f64 {
    b.v1.determinant() + b.v2.determinant() - 2.0 * b.vc.determinant()
}

/// Smallest symplectic eigenvalue of the partially transposed covariance.
pub fn eta_minus(v: &CovarianceMatrix) -> Result<f64> {
    let b = block_decompose(v)?;
    let sigma = sigma_invariant(&b);
    let det = v.0.determinant();
    if det < 0.0 {
        return Err(Error::InvalidCovariance(format!("det V' = {det:e} < 0")));
    }
    let (d1, d2) = (b.v1.determinant(), b.v2.determinant());
    if d1 < 0.25 - 1e-9 || d2 < 0.25 - 1e-9 {
        return Err(Error::InvalidCovariance(format!(
            "mode block determinants {d1:e}, {d2:e} violate the uncertainty bound 1/4"
        )));
    }
    let disc = sigma * sigma - 4.0 * det;
    if disc < -1e-9 * (sigma * sigma).max(1.0) {
        return Err(Error::Physicality(format!("Sigma^2 - 4 det V' = {disc:e} < 0")));
    }
    let root = disc.max(0.0).sqrt();
    // eta^2 = (Sigma - root)/2, written as 2 det / (Sigma + root) to avoid cancellation
    let denom = sigma + root;
    if denom <= 0.0 {
        return Err(Error::Physicality(format!("Sigma = {sigma:e} is not positive")));
    }
    Ok((2.0 * det / denom).sqrt())
}

/// The same eigenvalue with the radical written sqrt(Sigma - 4 det V').
/// Incorrect; kept only to document the difference.
pub fn eta_minus_unsquared_radical(v: &CovarianceMatrix) -> Result<f64> {
    let b = block_decompose(v)?;
    let sigma = sigma_invariant(&b);
    let disc = sigma - 4.0 * v.0.determinant();
    if disc < 0.0 {
        return Err(Error::Physicality(format!("Sigma - 4 det V' = {disc:e} < 0")));
    }
    let inner = (sigma - disc.sqrt()) / 2.0;
    if inner < 0.0 {
        return Err(Error::Physicality(format!("negative squared eigenvalue {inner:e}")));
    }
    Ok(inner.sqrt())
}

/// E_N = max(0, -ln 2 eta_minus).
pub fn log_negativity(v: &CovarianceMatrix) -> Result<f64> {
    let eta = eta_minus(v)?;
    Ok((-(2.0 * eta).ln()).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Thermal occupations n1, n2 followed by two-mode squeezing r.
    fn two_mode_squeezed(r: f64, n1: f64, n2: f64) -> CovarianceMatrix {
        let (a, b) = (n1 + 0.5, n2 + 0.5);
        let (ch, sh) = (r.cosh(), r.sinh());
        let p = a * ch * ch + b * sh * sh;
        let q = a * sh * sh + b * ch * ch;
        let k = (a + b) * ch * sh;
        #[rustfmt::skip]
        let m = Matrix4::new(
            p, 0.0, k, 0.0,
            0.0, p, 0.0, -k,
            k, 0.0, q, 0.0,
            0.0, -k, 0.0, q,
        );
        CovarianceMatrix(m)
    }

    #[test]
    fn vacuum_invariants() {
        let v = CovarianceMatrix::vacuum();
        let b = block_decompose(&v).unwrap();
        assert_eq!(b.v1, Matrix2::identity() * 0.5);
        assert_eq!(b.vc, Matrix2::zeros());
        assert_eq!(sigma_invariant(&b), 0.5);
        assert!((eta_minus(&v).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(log_negativity(&v).unwrap(), 0.0);
    }

    #[test]
    fn squeezed_vacuum_benchmark() {
        for r in [0.1, 0.5, 1.0, 2.0] {
            let v = two_mode_squeezed(r, 0.0, 0.0);
            let b = block_decompose(&v).unwrap();
            let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
            assert!((sigma_invariant(&b) - (c * c + s * s) / 2.0).abs() < 1e-12 * c * c);
            assert!((eta_minus(&v).unwrap() - (-2.0 * r).exp() / 2.0).abs() < 1e-12);
            assert!((log_negativity(&v).unwrap() - 2.0 * r).abs() < 1e-9);
        }
        let v = two_mode_squeezed(0.5, 0.0, 0.0);
        assert!((log_negativity(&v).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unsquared_radical_misses_benchmark() {
        for r in [0.25, 0.5, 1.0] {
            let v = two_mode_squeezed(r, 0.0, 0.0);
            let wrong = eta_minus_unsquared_radical(&v).map(|e| (-(2.0 * e).ln()).max(0.0));
            if let Ok(en) = wrong {
                assert!((en - 2.0 * r).abs() > 1e-3, "r = {r}: {en}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        let mut v = CovarianceMatrix::vacuum();
        v.0[(0, 2)] = 0.1;
        assert!(matches!(block_decompose(&v), Err(Error::Domain(_))));
        let v = CovarianceMatrix(Matrix4::identity() * 0.1);
        assert!(matches!(eta_minus(&v), Err(Error::InvalidCovariance(_))));
    }

    #[test]
    fn product_thermal_is_separable() {
        let v = CovarianceMatrix(Matrix4::from_diagonal(&[3.0, 3.0, 70.0, 70.0].into()));
        let b = block_decompose(&v).unwrap();
        assert_eq!(sigma_invariant(&b), 9.0 + 4900.0);
        assert!(eta_minus(&v).unwrap() >= 0.5);
        assert_eq!(log_negativity(&v).unwrap(), 0.0);
    }

    fn rotation(t: f64) -> Matrix2<f64> {
        Matrix2::new(t.cos(), -t.sin(), t.sin(), t.cos())
    }

    proptest! {
        #[test]
        fn thermal_squeezed_closed_form(r in 0.0..2.0f64, n in 0.0..5.0f64) {
            // symmetric thermal TMS: eta_minus = (n + 1/2) e^{-2r}
            let v = two_mode_squeezed(r, n, n);
            let expect = (-(2.0 * (n + 0.5) * (-2.0 * r).exp()).ln()).max(0.0);
            prop_assert!((log_negativity(&v).unwrap() - expect).abs() < 1e-9);
        }

        #[test]
        fn local_rotation_invariance(
            r in 0.0..1.5f64,
            n1 in 0.0..3.0f64,
            n2 in 0.0..3.0f64,
            t1 in 0.0..6.3f64,
            t2 in 0.0..6.3f64,
        ) {
            let v = two_mode_squeezed(r, n1, n2);
            let mut s = Matrix4::zeros();
            s.fixed_view_mut::<2, 2>(0, 0).copy_from(&rotation(t1));
            s.fixed_view_mut::<2, 2>(2, 2).copy_from(&rotation(t2));
            let w = CovarianceMatrix(s * v.0 * s.transpose());
            let a = log_negativity(&v).unwrap();
            let b = log_negativity(&w).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
        }

        #[test]
        fn reassembly(
            vals in proptest::collection::vec(-2.0..2.0f64, 10),
        ) {
            let mut m = Matrix4::zeros();
            let mut k = 0;
            for i in 0..4 {
                for j in i..4 {
                    m[(i, j)] = vals[k];
                    m[(j, i)] = vals[k];
                    k += 1;
                }
            }
            let v = CovarianceMatrix(m);
            prop_assert_eq!(block_decompose(&v).unwrap().reassemble(), v);
        }
    }
}
