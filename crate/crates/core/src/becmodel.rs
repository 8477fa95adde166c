//! Effective linear model of the condensate's first excited transverse mode
//! coupled to the membrane.
//!
//! Units: hbar = k_B = 1 and every rate, frequency and temperature is a
//! multiple of the trap frequency omega_t.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// User-facing physical inputs, all dimensionless in units of omega_t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Absolute trap frequency in rad/s. Only used for reporting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_t: Option<f64>,
    /// Mechanical frequency Omega.
    pub omega: f64,
    pub kappa_ex: f64,
    pub kappa_0: f64,
    pub gamma: f64,
    /// Bare single-photon optomechanical coupling.
    pub g: f64,
    /// Total photon number N_t.
    pub n_t: f64,
    pub zeta: f64,
    /// Photon-gas temperature k_B T / (hbar omega_t).
    #[serde(rename = "t")]
    pub temperature: f64,
    /// Mechanical bath temperature k_B T_m / (hbar omega_t).
    #[serde(rename = "t_m")]
    pub temperature_m: f64,
    /// Transverse mode index s = 2l + |m| + 1.
    pub s: u32,
    pub delta_tilde: f64,
}

impl Default for PhysicalParams {
    /// Membrane/microcavity parameters used throughout the figure presets:
    /// room-temperature condensate, resonant detuning.
    fn default() -> Self {
        let omega = 7e-4;
        let kappa_ex = 1e-5;
        Self {
            omega_t: None,
            omega,
            kappa_ex,
            kappa_0: 5.0 * kappa_ex,
            gamma: 1e-3 * kappa_ex,
            g: 4.2e-7,
            n_t: 1e6,
            zeta: 4e-4,
            temperature: 150.0,
            temperature_m: 0.05,
            s: 2,
            delta_tilde: omega,
        }
    }
}

impl PhysicalParams {
    /// Names accepted by [`PhysicalParams::set`], matching the config keys.
    pub const NAMES: [&'static str; 12] = [
        "omega_t",
        "omega",
        "kappa_ex",
        "kappa_0",
        "gamma",
        "g",
        "n_t",
        "zeta",
        "t",
        "t_m",
        "s",
        "delta_tilde",
    ];

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        match name {
            "omega_t" => self.omega_t = Some(value),
            "omega" => self.omega = value,
            "kappa_ex" => self.kappa_ex = value,
            "kappa_0" => self.kappa_0 = value,
            "gamma" => self.gamma = value,
            "g" => self.g = value,
            "n_t" => self.n_t = value,
            "zeta" => self.zeta = value,
            "t" => self.temperature = value,
            "t_m" => self.temperature_m = value,
            "s" => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= f64::from(u32::MAX)) {
                    return Err(domain(format!("s must be a positive integer, got {value}")));
                }
                self.s = value as u32;
            }
            "delta_tilde" => self.delta_tilde = value,
            _ => {
                return Err(Error::Config(format!(
                    "unknown parameter '{name}'; expected one of {}",
                    Self::NAMES.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "omega_t" => return self.omega_t,
            "omega" => self.omega,
            "kappa_ex" => self.kappa_ex,
            "kappa_0" => self.kappa_0,
            "gamma" => self.gamma,
            "g" => self.g,
            "n_t" => self.n_t,
            "zeta" => self.zeta,
            "t" => self.temperature,
            "t_m" => self.temperature_m,
            "s" => f64::from(self.s),
            "delta_tilde" => self.delta_tilde,
            _ => return None,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("omega", self.omega),
            ("kappa_ex", self.kappa_ex),
            ("kappa_0", self.kappa_0),
            ("gamma", self.gamma),
            ("g", self.g),
            ("n_t", self.n_t),
            ("zeta", self.zeta),
            ("t", self.temperature),
            ("t_m", self.temperature_m),
            ("delta_tilde", self.delta_tilde),
        ];
        for (name, value) in named {
            if !value.is_finite() {
                return Err(domain(format!("{name} must be finite, got {value}")));
            }
        }
        for (name, value) in &named[..named.len() - 1] {
            if *value < 0.0 {
                return Err(domain(format!("{name} must be >= 0, got {value}")));
            }
        }
        if let Some(w) = self.omega_t {
            if !(w.is_finite() && w > 0.0) {
                return Err(domain(format!("omega_t must be positive, got {w}")));
            }
        }
        if self.n_t < 1.0 {
            return Err(domain(format!("n_t must be >= 1, got {}", self.n_t)));
        }
        if self.s < 2 {
            return Err(domain(format!("s must be >= 2, got {}", self.s)));
        }
        if self.omega <= 0.0 {
            return Err(domain("omega must be > 0"));
        }
        if self.kappa_ex + self.kappa_0 <= 0.0 {
            return Err(domain("kappa_ex + kappa_0 must be > 0"));
        }
        if self.gamma <= 0.0 {
            return Err(domain("gamma must be > 0"));
        }
        Ok(())
    }
}

/// The derived linear system consumed by everything downstream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub kappa_ex: f64,
    pub kappa_0: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub omega: f64,
    pub delta_tilde: f64,
    pub g_bar: f64,
    pub u: f64,
    pub v: f64,
    pub n_th: f64,
    pub n_c: f64,
    pub n0: f64,
    pub omega_tilde: f64,
}

impl LinearModel {
    /// Copy of the model with the effective coupling replaced.
    pub fn with_g_bar(mut self, g_bar: f64) -> Self {
        self.g_bar = g_bar;
        self
    }

    pub fn with_detuning(mut self, delta_tilde: f64) -> Self {
        self.delta_tilde = delta_tilde;
        self
    }
}

/// omega_t = c / sqrt(R L / 2) in rad/s for mirror curvature `r` and cavity
/// length `l`, both in metres.
pub fn trap_frequency(r: f64, l: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) || !(l > 0.0 && l.is_finite()) {
        return Err(domain(format!("R and L must be positive, got R={r}, L={l}")));
    }
    if l > r / 10.0 {
        log::warn!("L = {l} m is not small compared with R = {r} m; paraxial trap picture is marginal");
    }
    Ok(SPEED_OF_LIGHT / (r * l / 2.0).sqrt())
}

/// Energy of transverse mode `s` above the condensate mode, in hbar omega_t.
pub fn transverse_excitation_energy(s: u32) -> Result<f64> {
    if s < 1 {
        return Err(domain("mode index s must be >= 1"));
    }
    Ok(f64::from(s - 1))
}

/// Number of (l, m) pairs with 2l + |m| + 1 = s.
pub fn mode_degeneracy(s: u32) -> Result<u32> {
    if s < 1 {
        return Err(domain("mode index s must be >= 1"));
    }
    Ok(s)
}

/// N_c = (pi^2 / 3) T^2.
pub fn critical_photon_number(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain(format!("temperature must be > 0, got {t}")));
    }
    Ok(PI * PI / 3.0 * t * t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condensate {
    pub n0: f64,
    /// Photons in the excited transverse modes at zero chemical potential.
    pub thermal: f64,
    /// Set when the thermal population leaves fewer than one photon for the
    /// condensate; `n0` is clamped to 1 in that case.
    pub below_threshold: bool,
}

/// sum_{s>=2} s / (exp((s-1)/T) - 1), the excited-mode Bose population with
/// the degeneracy of the two-dimensional harmonic trap.
///
/// Terms are summed in j = s - 1. Once j > 30 T the ratio of consecutive terms
/// is bounded by r = exp(-1/T) (j + 2) / (j + 1) < 1, so the remaining tail is
/// at most term * r / (1 - r); summation stops when that bound drops below
/// 1e-12 of the running sum, with a hard cap of max(1e6, 1000 T) terms.
pub fn thermal_excited_population(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let cap = (1000.0 * t).max(1e6) as u64;
    let decay = (-1.0 / t).exp();
    let mut sum = 0.0;
    for j in 1..=cap {
        let jf = j as f64;
        let term = (jf + 1.0) / (jf / t).exp_m1();
        sum += term;
        if jf > 30.0 * t {
            let r = decay * (jf + 2.0) / (jf + 1.0);
            if r < 1.0 && term * r / (1.0 - r) < 1e-12 * sum {
                break;
            }
        }
    }
    sum
}

pub fn condensate_occupation(n_t: f64, t: f64) -> Result<Condensate> {
    if !(n_t >= 1.0) {
        return Err(domain(format!("N_t must be >= 1, got {n_t}")));
    }
    if !(t >= 0.0) {
        return Err(domain(format!("temperature must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(Condensate {
            n0: n_t,
            thermal: 0.0,
            below_threshold: false,
        });
    }
    let thermal = thermal_excited_population(t);
    if thermal > n_t - 1.0 {
        log::warn!("below condensation threshold: {thermal:.4e} thermal photons >= N_t - 1");
        return Ok(Condensate {
            n0: 1.0,
            thermal,
            below_threshold: true,
        });
    }
    Ok(Condensate {
        n0: n_t - thermal,
        thermal,
        below_threshold: false,
    })
}

/// V0 = zeta / (2 pi) in hbar omega_t.
pub fn interaction_potential(zeta: f64) -> Result<f64> {
    if !(zeta >= 0.0) {
        return Err(domain(format!("zeta must be >= 0, got {zeta}")));
    }
    Ok(zeta / (2.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bogoliubov {
    pub u: f64,
    /// Non-positive.
    pub v: f64,
    pub omega_tilde: f64,
}

/// Bogoliubov coefficients and dispersion for a mode of bare excitation
/// energy `eps` in a condensate of `n0` photons with contact potential `v0`.
pub fn bogoliubov_coefficients(n0: f64, v0: f64, eps: f64) -> Result<Bogoliubov> {
    if !(eps > 0.0) {
        return Err(domain(format!("excitation energy must be > 0, got {eps}")));
    }
    if !(n0 >= 0.0) || !(v0 >= 0.0) {
        return Err(domain(format!("need N0 >= 0 and V0 >= 0, got {n0}, {v0}")));
    }
    let y = n0 * v0 / eps;
    let root = (1.0 + 2.0 * y).sqrt();
    // v^2 = ((1+y)/root - 1)/2, rearranged to avoid cancellation at small y
    let v_sq = 0.5 * y * y / (root * (1.0 + y + root));
    Ok(Bogoliubov {
        u: (1.0 + v_sq).sqrt(),
        v: -v_sq.sqrt(),
        omega_tilde: eps * root,
    })
}

/// g_bar = 2 sqrt(N0) g (u + v).
pub fn effective_coupling(n0: f64, g: f64, u: f64, v: f64) -> Result<f64> {
    if !(n0 >= 0.0) || !(g >= 0.0) {
        return Err(domain(format!("need N0 >= 0 and g >= 0, got {n0}, {g}")));
    }
    if (u * u - v * v - 1.0).abs() > 1e-9 {
        return Err(domain(format!("u^2 - v^2 = {} != 1", u * u - v * v)));
    }
    Ok(2.0 * n0.sqrt() * g * (u + v))
}

/// Bose occupation 1 / (exp(omega/T) - 1); zero at T = 0.
pub fn thermal_occupation(omega: f64, t: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(domain(format!("frequency must be > 0, got {omega}")));
    }
    if !(t >= 0.0) {
        return Err(domain(format!("temperature must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / t).exp_m1())
}

pub fn build_linear_model(params: &PhysicalParams) -> Result<LinearModel> {
    params.validate()?;
    let condensate = condensate_occupation(params.n_t, params.temperature)?;
    if condensate.below_threshold {
        return Err(Error::BelowThreshold {
            thermal: condensate.thermal,
            limit: params.n_t - 1.0,
        });
    }
    let v0 = interaction_potential(params.zeta)?;
    let eps = transverse_excitation_energy(params.s)?;
    let bog = bogoliubov_coefficients(condensate.n0, v0, eps)?;
    let g_bar = effective_coupling(condensate.n0, params.g, bog.u, bog.v)?;
    Ok(LinearModel {
        kappa_ex: params.kappa_ex,
        kappa_0: params.kappa_0,
        kappa: params.kappa_ex + params.kappa_0,
        gamma: params.gamma,
        omega: params.omega,
        delta_tilde: params.delta_tilde,
        g_bar,
        u: bog.u,
        v: bog.v,
        n_th: thermal_occupation(bog.omega_tilde, params.temperature)?,
        n_c: thermal_occupation(params.omega, params.temperature_m)?,
        n0: condensate.n0,
        omega_tilde: bog.omega_tilde,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    /// Direct summation with no truncation logic.
    fn brute_thermal(t: f64) -> f64 {
        (1..400_000u64)
            .map(|j| {
                let j = j as f64;
                (j + 1.0) / ((j / t).exp() - 1.0)
            })
            .filter(|x| x.is_finite())
            .sum()
    }

    #[test]
    fn trap_frequency_examples() {
        assert!(rel(trap_frequency(1.0, 2.0).unwrap(), SPEED_OF_LIGHT) < 1e-15);
        let w = trap_frequency(6.0, 1.5e-6).unwrap();
        assert!(rel(w / (2.0 * PI), 2.25e10) < 1e-3, "{w}");
        assert!(matches!(trap_frequency(1.0, 0.0), Err(Error::Domain(_))));
        assert!(trap_frequency(-1.0, 1.0).is_err());
    }

    #[test]
    fn mode_ladder() {
        assert_eq!(transverse_excitation_energy(1).unwrap(), 0.0);
        assert_eq!(transverse_excitation_energy(2).unwrap(), 1.0);
        assert_eq!(transverse_excitation_energy(5).unwrap(), 4.0);
        assert!(transverse_excitation_energy(0).is_err());
    }

    #[test]
    fn degeneracy_matches_enumeration() {
        for s in 1..12u32 {
            let mut count = 0;
            for l in 0..s as i64 {
                for m in -(s as i64)..=(s as i64) {
                    if 2 * l + m.abs() + 1 == s as i64 {
                        count += 1;
                    }
                }
            }
            assert_eq!(mode_degeneracy(s).unwrap(), count, "s = {s}");
        }
        assert!(mode_degeneracy(0).is_err());
    }

    #[test]
    fn critical_number() {
        // quoted experimental value (6.3 +- 2.4)e4 at T = 150
        let nc = critical_photon_number(150.0).unwrap();
        assert!(rel(nc, 7.4022e4) < 1e-4);
        assert!((nc - 6.3e4).abs() < 2.4e4);
        assert!(rel(critical_photon_number(50.0).unwrap(), 8.2247e3) < 1e-4);
        assert!(critical_photon_number(1e-9).unwrap() < 1e-15);
        assert!(critical_photon_number(0.0).is_err());
    }

    #[test]
    fn condensate_examples() {
        let c = condensate_occupation(1e6, 0.0).unwrap();
        assert_eq!(c.n0, 1e6);
        // frozen from brute-force summation (see brute_thermal)
        let c = condensate_occupation(1e6, 150.0).unwrap();
        assert!(rel(c.n0, 962_225.514_231_69) < 1e-10, "{}", c.n0);
        assert!(!c.below_threshold);
        let c = condensate_occupation(1e3, 150.0).unwrap();
        assert!(c.below_threshold);
        assert_eq!(c.n0, 1.0);
        assert!(rel(c.thermal, 3.78e4) < 0.01);
    }

    #[test]
    fn truncated_sum_matches_brute_force() {
        for t in [0.5, 1.5, 10.0, 50.0, 150.0] {
            let fast = thermal_excited_population(t);
            let slow = brute_thermal(t);
            assert!(rel(fast, slow) < 1e-11, "T={t}: {fast} vs {slow}");
        }
    }

    #[test]
    fn interaction_examples() {
        assert_eq!(interaction_potential(0.0).unwrap(), 0.0);
        assert!(rel(interaction_potential(7e-4).unwrap(), 1.114e-4) < 1e-3);
        assert!(rel(interaction_potential(4e-4).unwrap(), 6.366e-5) < 1e-4);
        assert!(interaction_potential(-1e-4).is_err());
    }

    #[test]
    fn bogoliubov_examples() {
        let b = bogoliubov_coefficients(1e6, 0.0, 1.0).unwrap();
        assert_eq!((b.u, b.v, b.omega_tilde), (1.0, 0.0, 1.0));

        let v0 = 4e-4 / (2.0 * PI);
        let b = bogoliubov_coefficients(9.6e5, v0, 1.0).unwrap();
        let y: f64 = 9.6e5 * v0;
        assert!((y - 61.1).abs() < 0.05);
        let s2 = (b.u + b.v).powi(2);
        assert!((s2 - 0.0902).abs() < 2e-4, "{s2}");
        assert!((s2 - (1.0 + 2.0 * y).powf(-0.5)).abs() < 1e-13);
        assert!((b.omega_tilde - 11.1).abs() < 0.05);
        assert!(b.v <= 0.0);

        assert!(bogoliubov_coefficients(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn coupling_examples() {
        assert_eq!(effective_coupling(9.6e5, 0.0, 1.0, 0.0).unwrap(), 0.0);
        // u, v with u + v = 0.3 and u^2 - v^2 = 1
        let (u, v) = ((0.3 + 1.0 / 0.3) / 2.0, (0.3 - 1.0 / 0.3) / 2.0);
        let g = effective_coupling(9.6e5, 4.2e-7, u, v).unwrap();
        assert!(rel(g, 2.469e-4) < 1e-3, "{g}");
        assert!(2.0 * g > 6e-5);
        assert!(rel(effective_coupling(1e6, 4.2e-7, 1.0, 0.0).unwrap(), 8.4e-4) < 1e-14);
        assert!(effective_coupling(1e6, 4.2e-7, 1.0, 0.5).is_err());
    }

    #[test]
    fn thermal_examples() {
        assert_eq!(thermal_occupation(1.0, 0.0).unwrap(), 0.0);
        assert!(rel(thermal_occupation(7e-4, 0.05).unwrap(), 1.0 / (0.014f64.exp() - 1.0)) < 1e-12);
        assert!((thermal_occupation(7e-4, 0.05).unwrap() - 70.93).abs() < 0.01);
        assert!((thermal_occupation(11.1, 150.0).unwrap() - 13.0).abs() < 0.05);
        assert!(thermal_occupation(0.0, 1.0).is_err());
    }

    #[test]
    fn fig2_model() {
        let m = build_linear_model(&PhysicalParams::default()).unwrap();
        assert!(rel(m.g_bar, 2.47e-4) < 0.01, "{}", m.g_bar);
        assert!((m.n_c - 70.93).abs() < 0.01);
        assert!((m.n_th - 13.0).abs() < 0.05);
        assert!((m.u * m.u - m.v * m.v - 1.0).abs() < 1e-12);
        assert!(2.0 * m.g_bar / m.kappa > 8.0);
    }

    #[test]
    fn interaction_and_thermal_off() {
        let p = PhysicalParams {
            zeta: 0.0,
            temperature: 0.0,
            ..Default::default()
        };
        let m = build_linear_model(&p).unwrap();
        assert_eq!((m.u, m.v, m.n_th, m.n0), (1.0, 0.0, 0.0, p.n_t));
        assert!(rel(m.g_bar, 2.0 * p.n_t.sqrt() * p.g) < 1e-15);
    }

    #[test]
    fn below_threshold_is_hard_error() {
        let p = PhysicalParams {
            n_t: 1e3,
            ..Default::default()
        };
        assert!(matches!(build_linear_model(&p), Err(Error::BelowThreshold { .. })));
    }

    #[test]
    fn named_access() {
        let mut p = PhysicalParams::default();
        for (i, name) in PhysicalParams::NAMES.iter().enumerate() {
            let value = 2.0 + i as f64;
            p.set(name, value).unwrap();
            assert_eq!(p.get(name), Some(value), "{name}");
        }
        assert!(matches!(p.set("kappa", 1.0), Err(Error::Config(_))));
        assert!(p.set("s", 2.5).is_err());
        assert_eq!(p.get("nope"), None);
    }

    #[test]
    fn invalid_params_rejected() {
        let bad = [
            PhysicalParams {
                gamma: 0.0,
                ..Default::default()
            },
            PhysicalParams {
                kappa_ex: 0.0,
                kappa_0: 0.0,
                ..Default::default()
            },
            PhysicalParams {
                s: 1,
                ..Default::default()
            },
            PhysicalParams {
                n_t: 0.5,
                ..Default::default()
            },
            PhysicalParams {
                zeta: -1.0,
                ..Default::default()
            },
            PhysicalParams {
                temperature: f64::NAN,
                ..Default::default()
            },
        ];
        for p in bad {
            assert!(matches!(build_linear_model(&p), Err(Error::Domain(_))), "{p:?}");
        }
    }

    proptest! {
        #[test]
        fn bogoliubov_identities(n0 in 1.0..1e7f64, zeta in 0.0..1e-2f64, s in 2u32..=10) {
            let v0 = interaction_potential(zeta).unwrap();
            let eps = transverse_excitation_energy(s).unwrap();
            let b = bogoliubov_coefficients(n0, v0, eps).unwrap();
            let y = n0 * v0 / eps;
            prop_assert!((b.u * b.u - b.v * b.v - 1.0).abs() < 1e-12);
            let via_y = (1.0 + 2.0 * y).powf(-0.5);
            let via_omega = eps / b.omega_tilde;
            prop_assert!(((b.u + b.v).powi(2) - via_y).abs() < 1e-12);
            prop_assert!((via_y - via_omega).abs() < 1e-12);
        }

        #[test]
        fn condensate_monotone(n_t in 1e5..1e7f64, t1 in 0.1..150.0f64, dt in 0.1..20.0f64) {
            let a = condensate_occupation(n_t, t1).unwrap().n0;
            let b = condensate_occupation(n_t, t1 + dt).unwrap().n0;
            prop_assert!(b < a);
            let c = condensate_occupation(n_t * 1.1, t1).unwrap().n0;
            prop_assert!(c > a);
        }

        #[test]
        fn bose_factor_monotone(w in 1e-4..10.0f64, t in 1e-3..200.0f64, k in 1.01..2.0f64) {
            let n = thermal_occupation(w, t).unwrap();
            prop_assert!(thermal_occupation(w * k, t).unwrap() < n);
            prop_assert!(thermal_occupation(w, t * k).unwrap() > n);
            if w / t < 0.02 {
                let approx = t / w - 0.5;
                prop_assert!((n - approx).abs() / n < 0.01);
            }
        }

        #[test]
        fn coupling_decreases_with_zeta(z in 0.0..5e-3f64, dz in 1e-5..1e-3f64, t in 0.0..150.0f64) {
            let p = PhysicalParams { zeta: z, temperature: t, ..Default::default() };
            let q = PhysicalParams { zeta: z + dz, ..p };
            let a = build_linear_model(&p).unwrap().g_bar;
            let b = build_linear_model(&q).unwrap().g_bar;
            prop_assert!(b < a);
        }
    }
}
