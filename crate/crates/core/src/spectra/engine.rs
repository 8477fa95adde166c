//! First-principles linear-response engine.
//!
//! The Langevin equations for y = (B, B^dag, C, C^dag) are solved in the
//! frequency domain (d/dt -> -i w) against six noise channels
//! z = (a_in, a_in^dag, f, f^dag, c_in, c_in^dag):
//!
//! ```text
//! y(w) = (-i w I - L)^{-1} G z(w),   <z_a(w) z_b(w')> = N_ab delta(w + w')
//! ```
//!
//! Any operator that is linear in y and z (quadratures, the output field,
//! homodyne quadratures of the output) then has a cross-spectrum
//! K(o1, o2, w) = r1(w)^T N r2(-w), with r the operator's transfer row.

use nalgebra::{Matrix4, SMatrix, SVector};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::{check_grid, closed::Alphas, map_grid, require_stable, SpectrumSeries, DISPLACEMENT_NORM};
use crate::becmodel::LinearModel;
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub const A_IN: usize = 0;
pub const A_IN_DAG: usize = 1;
pub const F: usize = 2;
pub const F_DAG: usize = 3;
pub const C_IN: usize = 4;
pub const C_IN_DAG: usize = 5;

/// Swaps each operator with its adjoint in a 4- or 6-slot ordering.
fn partner(i: usize) -> usize {
    i ^ 1
}

type Transfer = SMatrix<Complex64, 4, 6>;
type Row = SVector<Complex64, 6>;

/// Correlations of the input noises.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseBasis {
    /// N_ab with <z_a(w) z_b(w')> = N_ab delta(w + w').
    pub n: [[f64; 6]; 6],
}

impl NoiseBasis {
    /// Vacuum external input, thermal intracavity reservoir at n_th, thermal
    /// mechanical bath at n_c.
    pub fn from_model(m: &LinearModel) -> Self {
        let mut n = [[0.0; 6]; 6];
        n[A_IN][A_IN_DAG] = 1.0;
        n[F][F_DAG] = m.n_th + 1.0;
        n[F_DAG][F] = m.n_th;
        n[C_IN][C_IN_DAG] = m.n_c + 1.0;
        n[C_IN_DAG][C_IN] = m.n_c;
        Self { n }
    }

    /// Q_ab = <z_a^dag z_b>, which must be Hermitian positive semidefinite.
    pub fn hermitian_form(&self) -> SMatrix<f64, 6, 6> {
        SMatrix::from_fn(|a, b| self.n[partner(a)][b])
    }

    pub fn is_physical(&self) -> bool {
        let q = self.hermitian_form();
        if (q - q.transpose()).amax() > 0.0 {
            return false;
        }
        q.symmetric_eigenvalues().iter().all(|&x| x >= -1e-12)
    }
}

/// An operator written as sys . y + inp . z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearForm {
    pub sys: [Complex64; 4],
    pub inp: [Complex64; 6],
}

impl LinearForm {
    pub fn zero() -> Self {
        Self {
            sys: [ZERO; 4],
            inp: [ZERO; 6],
        }
    }

    fn from_sys(sys: [f64; 4]) -> Self {
        Self {
            sys: sys.map(|x| Complex64::new(x, 0.0)),
            ..Self::zero()
        }
    }

    /// X = (B + B^dag)/sqrt 2.
    pub fn optical_x() -> Self {
        Self::from_sys([FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0])
    }

    /// P = (B - B^dag)/(i sqrt 2).
    pub fn optical_p() -> Self {
        let mut f = Self::zero();
        f.sys[0] = -I * FRAC_1_SQRT_2;
        f.sys[1] = I * FRAC_1_SQRT_2;
        f
    }

    /// x = (C + C^dag)/sqrt 2.
    pub fn position() -> Self {
        Self::from_sys([0.0, 0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2])
    }

    pub fn momentum() -> Self {
        let mut f = Self::zero();
        f.sys[2] = -I * FRAC_1_SQRT_2;
        f.sys[3] = I * FRAC_1_SQRT_2;
        f
    }

    /// A_out = sqrt(2 kappa_ex)(u B + v B^dag) - a_in.
    pub fn output_field(m: &LinearModel) -> Self {
        let s = (2.0 * m.kappa_ex).sqrt();
        let mut f = Self::from_sys([s * m.u, s * m.v, 0.0, 0.0]);
        f.inp[A_IN] = Complex64::new(-1.0, 0.0);
        f
    }

    /// X_phi = e^{-i phi} A_out + e^{i phi} A_out^dag.
    pub fn output_quadrature(m: &LinearModel, phi: f64) -> Self {
        let a = Self::output_field(m);
        a.scale(Complex64::from_polar(1.0, -phi))
            .add(&a.adjoint().scale(Complex64::from_polar(1.0, phi)))
    }

    pub fn adjoint(&self) -> Self {
        Self {
            sys: std::array::from_fn(|i| self.sys[partner(i)].conj()),
            inp: std::array::from_fn(|i| self.inp[partner(i)].conj()),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            sys: self.sys.map(|x| x * s),
            inp: self.inp.map(|x| x * s),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            sys: std::array::from_fn(|i| self.sys[i] + o.sys[i]),
            inp: std::array::from_fn(|i| self.inp[i] + o.inp[i]),
        }
    }
}

/// Transfer matrices at +w and -w.
pub struct Evaluated<'a> {
    engine: &'a Engine,
    plus: Transfer,
    minus: Transfer,
}

impl Evaluated<'_> {
    fn row(t: &Transfer, f: &LinearForm) -> Row {
        let sys = SVector::<Complex64, 4>::from(f.sys);
        Row::from(f.inp) + t.transpose() * sys
    }

    /// K(o1, o2, w) for w = +omega (`flip` false) or -omega (`flip` true).
    pub fn cross(&self, o1: &LinearForm, o2: &LinearForm, flip: bool) -> Complex64 {
        let (a, b) = if flip {
            (&self.minus, &self.plus)
        } else {
            (&self.plus, &self.minus)
        };
        let r1 = Self::row(a, o1);
        let r2 = Self::row(b, o2);
        let n = &self.engine.basis.n;
        let mut acc = ZERO;
        for (i, row) in n.iter().enumerate() {
            for (j, &nij) in row.iter().enumerate() {
                if nij != 0.0 {
                    acc += r1[i] * nij * r2[j];
                }
            }
        }
        acc
    }

    /// 1/2 [K(o, o, w) + K(o, o, -w)].
    pub fn symmetrized(&self, o: &LinearForm) -> Complex64 {
        0.5 * (self.cross(o, o, false) + self.cross(o, o, true))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezingPoint {
    /// Phase-independent part of S_phi.
    pub n: f64,
    /// S_phi = n + 2 Re(e^{-2 i phi} m).
    pub m: Complex64,
    pub s_opt_scan: f64,
    /// In [0, pi).
    pub phi_opt: f64,
    pub s_opt_analytic: f64,
}

impl SqueezingPoint {
    pub fn s_phi(&self, phi: f64) -> f64 {
        self.n + 2.0 * (Complex64::from_polar(1.0, -2.0 * phi) * self.m).re
    }
}

#[derive(Debug, Clone)]
pub struct Engine {
    pub model: LinearModel,
    pub basis: NoiseBasis,
    l: Matrix4<Complex64>,
    g: Transfer,
}

impl Engine {
    pub fn new(m: &LinearModel) -> Self {
        Self::with_basis(m, NoiseBasis::from_model(m))
    }

    pub fn with_basis(m: &LinearModel, basis: NoiseBasis) -> Self {
        let (k, d, om, ga, gb) = (m.kappa, m.delta_tilde, m.omega, m.gamma, m.g_bar);
        let igb = I * gb;
        #[rustfmt::skip]
        let l = Matrix4::new(
            -(I * d + k), ZERO,          igb,           igb,
            ZERO,         -(-I * d + k), -igb,          -igb,
            igb,          igb,           -(I * om + ga), ZERO,
            -igb,         -igb,          ZERO,          -(-I * om + ga),
        );
        let mut g = Transfer::zeros();
        let s = (2.0 * m.kappa_ex).sqrt();
        g[(0, A_IN)] = (s * m.u).into();
        g[(0, A_IN_DAG)] = (-s * m.v).into();
        g[(1, A_IN_DAG)] = (s * m.u).into();
        g[(1, A_IN)] = (-s * m.v).into();
        g[(0, F)] = (2.0 * m.kappa_0).sqrt().into();
        g[(1, F_DAG)] = (2.0 * m.kappa_0).sqrt().into();
        g[(2, C_IN)] = (2.0 * ga).sqrt().into();
        g[(3, C_IN_DAG)] = (2.0 * ga).sqrt().into();
        Self { model: *m, basis, l, g }
    }

    fn kernel(&self, w: f64) -> Matrix4<Complex64> {
        Matrix4::identity() * (-I * w) - self.l
    }

    /// (-i w I - L)^{-1}.
    pub fn response(&self, w: f64) -> Result<Matrix4<Complex64>> {
        let k = self.kernel(w);
        let det = k.determinant();
        if det.norm() < 1e-300 {
            return Err(Error::Pole {
                omega: w,
                modulus: det.norm(),
            });
        }
        let r = k.lu().try_inverse().ok_or(Error::Pole {
            omega: w,
            modulus: det.norm(),
        })?;
        if r.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Pole {
                omega: w,
                modulus: det.norm(),
            });
        }
        Ok(r)
    }

    pub fn transfer(&self, w: f64) -> Result<Transfer> {
        Ok(self.response(w)? * self.g)
    }

    /// Residual max |(-i w I - L) y - G z| for the solved response to each noise channel.
    pub fn equation_residual(&self, w: f64) -> Result<f64> {
        let t = self.transfer(w)?;
        Ok((self.kernel(w) * t - self.g)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max))
    }

    pub fn at(&self, w: f64) -> Result<Evaluated<'_>> {
        Ok(Evaluated {
            engine: self,
            plus: self.transfer(w)?,
            minus: self.transfer(-w)?,
        })
    }

    /// Response of B to (xi_B, xi_B^dag, xi_c, xi_c^dag) where xi_B is the total
    /// optical noise entering B and xi_c = sqrt(2 gamma) c_in; `d` is
    /// det(-i w I - L).
    pub fn alphas(&self, w: f64) -> Result<Alphas> {
        let r = self.response(w)?;
        Ok(Alphas {
            a1: r[(0, 0)],
            a2: r[(0, 1)],
            a3: r[(0, 2)],
            a4: r[(0, 3)],
            d: self.kernel(w).determinant(),
        })
    }

    /// Symmetrized displacement spectrum with the 1/(4 pi) prefactor.
    pub fn displacement(&self, w: f64) -> Result<f64> {
        Ok(DISPLACEMENT_NORM * self.at(w)?.symmetrized(&LinearForm::position()).re)
    }

    /// <A_out^dag(w') A_out(w)> spectrum at w, i.e. K(A^dag, A, -w).
    pub fn output_intensity(&self, w: f64) -> Result<f64> {
        let a = LinearForm::output_field(&self.model);
        Ok(self.at(w)?.cross(&a.adjoint(), &a, true).re)
    }

    pub fn output_intensity_symmetric(&self, w: f64) -> Result<f64> {
        let a = LinearForm::output_field(&self.model);
        let ev = self.at(w)?;
        let ad = a.adjoint();
        Ok(0.5 * (ev.cross(&ad, &a, true).re + ev.cross(&ad, &a, false).re))
    }

    /// S_phi from the full quadrature operator; vacuum gives 1.
    pub fn quadrature_noise(&self, w: f64, phi: f64) -> Result<f64> {
        let x = LinearForm::output_quadrature(&self.model, phi);
        Ok(self.at(w)?.symmetrized(&x).re)
    }

    /// Minimum of S_phi over phi: 64-point scan of [0, pi), then golden-section
    /// refinement around the best sample.
    pub fn squeezing(&self, w: f64) -> Result<SqueezingPoint> {
        let a = LinearForm::output_field(&self.model);
        let ad = a.adjoint();
        let ev = self.at(w)?;
        let n = 0.5
            * (ev.cross(&a, &ad, false) + ev.cross(&ad, &a, false) + ev.cross(&a, &ad, true) + ev.cross(&ad, &a, true))
                .re;
        let m = 0.5 * (ev.cross(&a, &a, false) + ev.cross(&a, &a, true));
        let mut point = SqueezingPoint {
            n,
            m,
            s_opt_scan: f64::INFINITY,
            phi_opt: 0.0,
            s_opt_analytic: n - 2.0 * m.norm(),
        };
        const SAMPLES: usize = 64;
        let h = PI / SAMPLES as f64;
        let mut best = 0;
        let mut best_val = f64::INFINITY;
        for i in 0..SAMPLES {
            let val = point.s_phi(i as f64 * h);
            if val < best_val {
                best_val = val;
                best = i;
            }
        }
        let centre = best as f64 * h;
        let (phi, val) = golden_section(|p| point.s_phi(p), centre - h, centre + h, 1e-12);
        let (phi, val) = if val <= best_val {
            (phi, val)
        } else {
            (centre, best_val)
        };
        point.s_opt_scan = val;
        point.phi_opt = phi.rem_euclid(PI);
        Ok(point)
    }
}

/// Minimizer of a unimodal function on [a, b].
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Symmetrized PSD 1/2[K(o,o,w) + K(o,o,-w)] of a Hermitian operator over a
/// grid, as column `psd`.
pub fn linear_response_psd(
    m: &LinearModel,
    basis: NoiseBasis,
    observable: &LinearForm,
    grid: &[f64],
) -> Result<SpectrumSeries> {
    check_grid(grid)?;
    require_stable(m)?;
    let engine = Engine::with_basis(m, basis);
    let values = map_grid(grid, |w| Ok(engine.at(w)?.symmetrized(observable).re))?;
    Ok(SpectrumSeries {
        omega: grid.to_vec(),
        columns: vec![("psd".into(), values)],
        model: *m,
    })
}
