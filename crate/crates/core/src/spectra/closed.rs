//! Closed-form output-field expressions, kept exactly as written.
//!
//! These are kept verbatim, including their known defects, so they can be
//! compared against the engine. Use [`super::engine`] for physics.

use num_complex::Complex64;
use serde::Serialize;

use crate::becmodel::LinearModel;
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Alphas {
    pub a1: Complex64,
    pub a2: Complex64,
    pub a3: Complex64,
    pub a4: Complex64,
    pub d: Complex64,
}

/// Response of the Bogoliubov field B to the noises (xi_B, xi_B^dag, xi_c, xi_c^dag).
pub fn alpha_coefficients(m: &LinearModel, w: f64) -> Result<Alphas> {
    let (k, g, om, dt, gb) = (m.kappa, m.gamma, m.omega, m.delta_tilde, m.g_bar);
    let mech = (c(g) - I * w).powi(2) + om * om;
    let d = -mech * ((c(k) - I * w).powi(2) - dt * dt) + 4.0 * gb * gb * dt * om;
    if d.norm() < 1e-300 {
        return Err(Error::Pole {
            omega: w,
            modulus: d.norm(),
        });
    }
    let a1 = (mech * (I * (dt + w) - k) - 2.0 * I * gb * gb * dt * om) / d;
    let a2 = -2.0 * I * gb * gb * om / d;
    let a3 = I * gb * (dt + I * k + w) * (om + I * g + w) / d;
    let a4 = -I * gb * (dt + I * k + w) * (om - I * g + w) / d;
    Ok(Alphas { a1, a2, a3, a4, d })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Betas {
    pub b1: f64,
    pub b2: f64,
    pub b3: Complex64,
}

pub fn beta_functions(m: &LinearModel, w: f64) -> Result<Betas> {
    let p = alpha_coefficients(m, w)?;
    let n = alpha_coefficients(m, -w)?;
    let (kex, k0, k, g) = (m.kappa_ex, m.kappa_0, m.kappa, m.gamma);
    let (u, v, nth, nc) = (m.u, m.v, m.n_th, m.n_c);
    let b1 = (2.0 * kex * v * v + 2.0 * k0 * nth) * n.a1.norm_sqr()
        + (2.0 * kex * u * u + 2.0 * k * (nth + 1.0)) * n.a2.norm_sqr()
        - 4.0 * kex * u * v * (n.a1.conj() * n.a2).re
        + 2.0 * g * nc * n.a3.norm_sqr()
        + 2.0 * g * (nc + 1.0) * n.a4.norm_sqr();
    let b2 = (2.0 * kex * u * u + 2.0 * k * (nth + 1.0)) * p.a1.norm_sqr()
        + (2.0 * kex * v * v + 2.0 * k0 * nth) * p.a2.norm_sqr()
        - 4.0 * kex * u * v * (p.a1 * p.a2.conj()).re
        + 2.0 * g * (nc + 1.0) * p.a3.norm_sqr()
        + 2.0 * g * nc * p.a4.norm_sqr();
    let b3 = (2.0 * kex * u * u + 2.0 * k0 * (nth + 1.0)) * p.a1 * n.a2
        + (2.0 * kex * v * v + 2.0 * k0 * nth) * p.a2 * n.a1
        - 2.0 * kex * u * v * (p.a1 * n.a1 + p.a2 * n.a2)
        + 2.0 * g * (nc + 1.0) * p.a3 * n.a4
        + 2.0 * g * nc * n.a3 * p.a4;
    Ok(Betas { b1, b2, b3 })
}

/// Unsymmetrized output intensity S_out(w) from the beta functions.
pub fn output_intensity(m: &LinearModel, w: f64) -> Result<f64> {
    let b = beta_functions(m, w)?;
    let (u, v) = (m.u, m.v);
    Ok(2.0 * m.kappa_ex * (u * u * b.b1 + v * v * b.b2 + 2.0 * u * v * b.b3.re))
}

/// (C1, C2, C3, C4) at one frequency.
pub fn c_functions(m: &LinearModel, w: f64) -> Result<(f64, f64, Complex64, Complex64)> {
    let b = beta_functions(m, w)?;
    let p = alpha_coefficients(m, w)?;
    let n = alpha_coefficients(m, -w)?;
    let (kex, u, v) = (m.kappa_ex, m.u, m.v);
    let c1 = 2.0 * kex * (u * u * b.b2 + v * v * b.b1 + 2.0 * u * v * b.b3.re);
    let c2 = 4.0 * kex * p.a1.re;
    let c3 = 2.0 * kex * (u * u * b.b3 + v * v * b.b3.conj() + u * v * (b.b1 + b.b2));
    let c4 = 2.0 * kex * (u * u * n.a2 - v * v * p.a2.conj() - u * v * n.a1 + u * v * p.a1.conj());
    Ok((c1, c2, c3, c4))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrintedSqueezing {
    pub s_out_sym: f64,
    /// Symmetrized C_{AA^dag}, including the +1 vacuum term.
    pub c_aad: f64,
    pub c_aa: Complex64,
    pub s_opt: f64,
    /// -C_{AA^dag} / |C_{AA}|, the claimed value of exp(2 i phi_opt).
    pub phase_factor: Complex64,
}

impl PrintedSqueezing {
    /// Distance of the claimed phase factor from the unit circle.
    pub fn non_unimodularity(&self) -> f64 {
        (self.phase_factor.norm() - 1.0).abs()
    }
}

pub fn printed_squeezing(m: &LinearModel, w: f64) -> Result<PrintedSqueezing> {
    let (c1p, c2p, c3p, c4p) = c_functions(m, w)?;
    let (c1n, c2n, c3n, c4n) = c_functions(m, -w)?;
    let c_aad = 0.5 * (c1p - c2p + c1n - c2n) + 1.0;
    let c_aa = 0.5 * (c3p - c4p + c3n - c4n);
    let s_out_sym = 0.5 * (output_intensity(m, w)? + output_intensity(m, -w)?);
    Ok(PrintedSqueezing {
        s_out_sym,
        c_aad,
        c_aa,
        s_opt: s_out_sym + c_aad - 2.0 * c_aa.norm_sqr(),
        phase_factor: c(-c_aad) / c_aa.norm(),
    })
}
