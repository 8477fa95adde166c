//! Noise spectra of the linearized system.
//!
//! Each spectrum is available in two forms: the closed-form expressions in
//! [`closed`], transcribed verbatim, and the first-principles linear-response
//! [`engine`], which is the reference for physics claims.

pub mod closed;
pub mod engine;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::becmodel::LinearModel;
use crate::dynamics::{drift_matrix, stability};
use crate::error::{domain, Result};

pub use closed::{alpha_coefficients, beta_functions, printed_squeezing, Alphas, Betas, PrintedSqueezing};
pub use engine::{linear_response_psd, Engine, LinearForm, NoiseBasis, SqueezingPoint};

/// Spectral densities carry this prefactor: S_x = (1/4 pi) x symmetrized PSD.
pub const DISPLACEMENT_NORM: f64 = 1.0 / (4.0 * std::f64::consts::PI);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MechanicalResponse {
    pub omega: f64,
    /// May be negative (static instability).
    pub omega_eff_sq: f64,
    pub gamma_eff: f64,
    pub chi_m: Complex64,
}

impl MechanicalResponse {
    pub fn statically_unstable(&self) -> bool {
        self.omega_eff_sq < 0.0
    }
}

fn optical_denominator(m: &LinearModel, w: f64) -> (f64, f64) {
    let (k, d) = (m.kappa, m.delta_tilde);
    let a = k * k - w * w + d * d;
    (a, a * a + 4.0 * k * k * w * w)
}

/// Effective frequency, damping and susceptibility of the membrane dressed by
/// the condensate excitation.
pub fn mechanical_response(m: &LinearModel, w: f64) -> MechanicalResponse {
    let (a, den) = optical_denominator(m, w);
    let g2 = m.g_bar * m.g_bar;
    let omega_eff_sq = m.gamma * m.gamma + m.omega * m.omega - 4.0 * g2 * m.omega * m.delta_tilde * a / den;
    let gamma_eff = 2.0 * m.gamma + 8.0 * g2 * m.omega * m.delta_tilde * m.kappa / den;
    let chi_m = m.omega / Complex64::new(omega_eff_sq - w * w, -w * gamma_eff);
    MechanicalResponse {
        omega: w,
        omega_eff_sq,
        gamma_eff,
        chi_m,
    }
}

/// Closed-form symmetrized displacement spectrum.
pub fn displacement_closed(m: &LinearModel, w: f64) -> f64 {
    let resp = mechanical_response(m, w);
    let (_, den) = optical_denominator(m, w);
    let (k, d, om, g) = (m.kappa, m.delta_tilde, m.omega, m.gamma);
    let g2 = m.g_bar * m.g_bar;
    let mech = g * (2.0 * m.n_c + 1.0) * (om * om + g * g + w * w) / (om * om);
    let bath = 4.0 * g2 * m.kappa_0 * (2.0 * m.n_th + 1.0) * (d * d + k * k + w * w) / den;
    let input = 4.0 * g2 * m.kappa_ex * (d * d * (m.u + m.v).powi(2) + (k * k + w * w) * (m.u - m.v).powi(2)) / den;
    DISPLACEMENT_NORM * resp.chi_m.norm_sqr() * (mech + bath + input)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalModes {
    /// Complex when the squared frequency is negative.
    pub omega_plus: Complex64,
    pub omega_minus: Complex64,
    /// omega_-^2 < 0.
    pub instability_adjacent: bool,
}

/// Approximate hybridized eigenfrequencies.
pub fn normal_mode_frequencies(m: &LinearModel) -> NormalModes {
    let (d, om) = (m.delta_tilde, m.omega);
    let sum = d * d + om * om;
    let disc = (d * d - om * om).powi(2) + 16.0 * m.g_bar * m.g_bar * om * d;
    let root = Complex64::new(disc, 0.0).sqrt();
    let plus_sq = (sum + root) * 0.5;
    let minus_sq = (sum - root) * 0.5;
    NormalModes {
        omega_plus: plus_sq.sqrt(),
        omega_minus: minus_sq.sqrt(),
        instability_adjacent: minus_sq.re < 0.0 || minus_sq.im != 0.0,
    }
}

/// Frequencies on a grid, with named value columns and the model they came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSeries {
    pub omega: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
    pub model: LinearModel,
}

impl SpectrumSeries {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

/// `points` equally spaced frequencies from `lo * Omega` to `hi * Omega`.
pub fn frequency_grid(omega: f64, lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(domain(format!("grid needs finite lo < hi, got [{lo}, {hi}]")));
    }
    if points < 2 {
        return Err(domain(format!("grid needs at least 2 points, got {points}")));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points).map(|i| omega * (lo + step * i as f64)).collect())
}

pub const DEFAULT_GRID: (f64, f64, usize) = (0.2, 1.8, 2001);

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(domain("empty frequency grid"));
    }
    if grid.iter().any(|w| !w.is_finite()) || grid.windows(2).any(|p| p[1] <= p[0]) {
        return Err(domain("frequency grid must be finite and strictly increasing"));
    }
    Ok(())
}

fn require_stable(m: &LinearModel) -> Result<()> {
    let report = stability(&drift_matrix(m));
    if report.is_stable() {
        Ok(())
    } else {
        Err(report.to_error())
    }
}

/// Evaluates `f` on every grid point in parallel, keeping grid order.
fn map_grid<T: Send>(grid: &[f64], f: impl Fn(f64) -> Result<T> + Sync) -> Result<Vec<T>> {
    grid.par_iter().map(|&w| f(w)).collect()
}

fn unzip<const N: usize>(rows: Vec<[f64; N]>) -> [Vec<f64>; N] {
    std::array::from_fn(|i| rows.iter().map(|r| r[i]).collect())
}

/// Columns `S_x_closed` and `S_x_engine`.
pub fn displacement_spectrum(m: &LinearModel, grid: &[f64]) -> Result<SpectrumSeries> {
    check_grid(grid)?;
    require_stable(m)?;
    let engine = Engine::new(m);
    let rows = map_grid(grid, |w| Ok([displacement_closed(m, w), engine.displacement(w)?]))?;
    let [closed, eng] = unzip(rows);
    Ok(SpectrumSeries {
        omega: grid.to_vec(),
        columns: vec![("S_x_closed".into(), closed), ("S_x_engine".into(), eng)],
        model: *m,
    })
}

/// Columns `S_out` (closed form), `S_out_sym` (its symmetrization) and
/// `S_out_engine` (symmetrized, first principles).
pub fn output_intensity_spectrum(m: &LinearModel, grid: &[f64]) -> Result<SpectrumSeries> {
    check_grid(grid)?;
    require_stable(m)?;
    let engine = Engine::new(m);
    let rows = map_grid(grid, |w| {
        let plus = closed::output_intensity(m, w)?;
        let minus = closed::output_intensity(m, -w)?;
        Ok([plus, 0.5 * (plus + minus), engine.output_intensity_symmetric(w)?])
    })?;
    let [raw, sym, eng] = unzip(rows);
    Ok(SpectrumSeries {
        omega: grid.to_vec(),
        columns: vec![
            ("S_out".into(), raw),
            ("S_out_sym".into(), sym),
            ("S_out_engine".into(), eng),
        ],
        model: *m,
    })
}

/// Columns `S_opt_scan`, `S_opt_printed` and `phi_opt` (phase of the scan
/// minimum, in [0, pi)).
pub fn squeezing_spectrum(m: &LinearModel, grid: &[f64]) -> Result<SpectrumSeries> {
    check_grid(grid)?;
    require_stable(m)?;
    let engine = Engine::new(m);
    let rows = map_grid(grid, |w| {
        let scan = engine.squeezing(w)?;
        let printed = printed_squeezing(m, w)?;
        Ok([scan.s_opt_scan, printed.s_opt, scan.phi_opt])
    })?;
    let [scan, printed, phi] = unzip(rows);
    Ok(SpectrumSeries {
        omega: grid.to_vec(),
        columns: vec![
            ("S_opt_scan".into(), scan),
            ("S_opt_printed".into(), printed),
            ("phi_opt".into(), phi),
        ],
        model: *m,
    })
}

/// Columns `gamma_eff_over_gamma` and `Omega_eff_over_Omega` (NaN where
/// Omega_eff^2 < 0). Needs no stability.
pub fn mechanical_response_spectrum(m: &LinearModel, grid: &[f64]) -> Result<SpectrumSeries> {
    check_grid(grid)?;
    let rows = map_grid(grid, |w| {
        let r = mechanical_response(m, w);
        let om = if r.omega_eff_sq >= 0.0 {
            r.omega_eff_sq.sqrt() / m.omega
        } else {
            f64::NAN
        };
        Ok([r.gamma_eff / m.gamma, om])
    })?;
    let [damping, freq] = unzip(rows);
    Ok(SpectrumSeries {
        omega: grid.to_vec(),
        columns: vec![
            ("gamma_eff_over_gamma".into(), damping),
            ("Omega_eff_over_Omega".into(), freq),
        ],
        model: *m,
    })
}

/// Indices of strict interior local maxima.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])
        .collect()
}
