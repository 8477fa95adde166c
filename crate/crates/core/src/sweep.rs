//! Parameter sweeps and figure presets.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::becmodel::{build_linear_model, LinearModel, PhysicalParams};
use crate::dynamics::{drift_matrix, stability, steady_state};
use crate::entanglement::log_negativity;
use crate::error::{Error, Result};
use crate::spectra::{
    displacement_spectrum, frequency_grid, mechanical_response, mechanical_response_spectrum, normal_mode_frequencies,
    output_intensity_spectrum, squeezing_spectrum, SpectrumSeries, DEFAULT_GRID,
};

/// How axis values map onto the swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisUnit {
    /// Values are the parameter itself.
    #[default]
    Absolute,
    /// parameter = value * Omega
    OverOmega,
    /// parameter = Omega (1 + value)
    OffsetOverOmega,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: String,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub unit: AxisUnit,
}

fn is_default<T: Default + PartialEq>(x: &T) -> bool {
    *x == T::default()
}

impl Axis {
    pub fn new(param: &str, values: Vec<f64>) -> Self {
        Self {
            param: param.into(),
            values,
            unit: AxisUnit::Absolute,
        }
    }

    /// Uniform grid from `lo` to `hi` inclusive with step `step`.
    pub fn range(param: &str, lo: f64, hi: f64, step: f64) -> Self {
        let n = ((hi - lo) / step).round() as usize + 1;
        Self::new(param, (0..n).map(|i| lo + step * i as f64).collect())
    }

    pub fn with_unit(mut self, unit: AxisUnit) -> Self {
        self.unit = unit;
        self
    }

    /// CSV column name for this axis.
    pub fn header(&self) -> String {
        let base = match self.param.as_str() {
            "t" => "T",
            "t_m" => "T_m",
            other => other,
        };
        match self.unit {
            AxisUnit::OverOmega => format!("{base}_over_Omega"),
            AxisUnit::OffsetOverOmega => format!("{base}_minus_Omega_over_Omega"),
            AxisUnit::Absolute => match self.param.as_str() {
                "n_t" | "zeta" | "s" => base.to_string(),
                "omega_t" => "omega_t_rad_per_s".into(),
                _ => format!("{base}_over_omega_t"),
            },
        }
    }

    fn apply(&self, p: &mut PhysicalParams, value: f64) -> Result<()> {
        let x = match self.unit {
            AxisUnit::Absolute => value,
            AxisUnit::OverOmega => value * p.omega,
            AxisUnit::OffsetOverOmega => p.omega * (1.0 + value),
        };
        p.set(&self.param, x)
    }

    fn validate(&self) -> Result<()> {
        if !PhysicalParams::NAMES.contains(&self.param.as_str()) {
            return Err(Error::Config(format!(
                "unknown axis parameter '{}'; expected one of {}",
                self.param,
                PhysicalParams::NAMES.join(", ")
            )));
        }
        if self.values.is_empty() {
            return Err(Error::Config(format!("axis '{}' has no values", self.param)));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config(format!("axis '{}' has non-finite values", self.param)));
        }
        if self.unit != AxisUnit::Absolute && self.param == "omega" {
            return Err(Error::Config("omega cannot be scaled by itself".into()));
        }
        Ok(())
    }
}

/// A named variant of the base parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Curve {
    pub label: String,
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
}

impl Curve {
    pub fn new(label: &str, overrides: &[(&str, f64)]) -> Self {
        Self {
            label: label.into(),
            overrides: overrides.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observable {
    #[serde(rename = "n_phonon")]
    NPhonon,
    #[serde(rename = "n_photon")]
    NPhoton,
    #[serde(rename = "T_eff")]
    TEff,
    #[serde(rename = "T_eff_over_Tm")]
    TEffOverTm,
    #[serde(rename = "E_N")]
    LogNegativity,
    /// max Re(lambda) of the drift matrix.
    #[serde(rename = "stability")]
    Stability,
    #[serde(rename = "g_bar")]
    GBar,
    #[serde(rename = "n0")]
    N0,
    /// Normal-mode frequencies over Omega.
    #[serde(rename = "omega_pm")]
    OmegaPm,
    /// gamma_eff / gamma at omega = Omega.
    #[serde(rename = "gamma_eff_over_gamma")]
    GammaEffOverGamma,
}

impl Observable {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Self::NPhonon => &["n_phonon"],
            Self::NPhoton => &["n_photon"],
            Self::TEff => &["T_eff"],
            Self::TEffOverTm => &["T_eff_over_Tm"],
            Self::LogNegativity => &["E_N"],
            Self::Stability => &["max_re_lambda"],
            Self::GBar => &["g_bar"],
            Self::N0 => &["n0"],
            Self::OmegaPm => &["omega_plus_over_Omega", "omega_minus_over_Omega"],
            Self::GammaEffOverGamma => &["gamma_eff_over_gamma"],
        }
    }

    fn needs_steady_state(self) -> bool {
        matches!(
            self,
            Self::NPhonon | Self::NPhoton | Self::TEff | Self::TEffOverTm | Self::LogNegativity
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    Displacement,
    Output,
    Squeezing,
    /// Effective mechanical damping and frequency.
    Response,
}

impl SpectrumKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "displacement" => Ok(Self::Displacement),
            "output" => Ok(Self::Output),
            "squeezing" => Ok(Self::Squeezing),
            "response" => Ok(Self::Response),
            _ => Err(Error::Config(format!(
                "unknown spectrum kind '{s}'; expected displacement, output, squeezing or response"
            ))),
        }
    }

    pub fn compute(self, m: &LinearModel, grid: &[f64]) -> Result<SpectrumSeries> {
        match self {
            Self::Displacement => displacement_spectrum(m, grid),
            Self::Output => output_intensity_spectrum(m, grid),
            Self::Squeezing => squeezing_spectrum(m, grid),
            Self::Response => mechanical_response_spectrum(m, grid),
        }
    }
}

/// Frequency grid in units of Omega.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumRequest {
    pub kind: SpectrumKind,
    #[serde(default = "default_min")]
    pub omega_min: f64,
    #[serde(default = "default_max")]
    pub omega_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_min() -> f64 {
    DEFAULT_GRID.0
}
fn default_max() -> f64 {
    DEFAULT_GRID.1
}
fn default_points() -> usize {
    DEFAULT_GRID.2
}

impl SpectrumRequest {
    pub fn new(kind: SpectrumKind) -> Self {
        Self {
            kind,
            omega_min: DEFAULT_GRID.0,
            omega_max: DEFAULT_GRID.1,
            points: DEFAULT_GRID.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub name: String,
    pub base: PhysicalParams,
    /// Empty means a single curve labelled "base".
    #[serde(default)]
    pub curves: Vec<Curve>,
    #[serde(default)]
    pub axis1: Option<Axis>,
    #[serde(default)]
    pub axis2: Option<Axis>,
    #[serde(default)]
    pub observables: Vec<Observable>,
    #[serde(default)]
    pub spectrum: Option<SpectrumRequest>,
}

impl SweepConfig {
    pub fn curves(&self) -> Vec<Curve> {
        if self.curves.is_empty() {
            vec![Curve::new("base", &[])]
        } else {
            self.curves.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axis2.is_some() && self.axis1.is_none() {
            return Err(Error::Config("axis2 given without axis1".into()));
        }
        for axis in self.axis1.iter().chain(self.axis2.iter()) {
            axis.validate()?;
        }
        let mut labels = std::collections::BTreeSet::new();
        for c in &self.curves {
            if c.label.is_empty() || !labels.insert(c.label.as_str()) {
                return Err(Error::Config(format!(
                    "curve labels must be unique and non-empty: '{}'",
                    c.label
                )));
            }
            let mut p = self.base;
            for (k, v) in &c.overrides {
                p.set(k, *v)?;
            }
        }
        match (&self.axis1, &self.spectrum) {
            (Some(_), Some(_)) => Err(Error::Config("a sweep has either axes or a spectrum, not both".into())),
            (None, None) => Err(Error::Config("a sweep needs axis1 or a spectrum request".into())),
            (Some(_), None) if self.observables.is_empty() => Err(Error::Config("no observables requested".into())),
            (None, Some(s)) => {
                frequency_grid(self.base.omega, s.omega_min, s.omega_max, s.points)
                    .map_err(|e| Error::Config(e.to_string()))?;
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn columns(&self) -> Vec<&'static str> {
        self.observables
            .iter()
            .flat_map(|o| o.columns().iter().copied())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Ok,
    Unstable,
    BelowThreshold,
    Error(String),
}

impl Status {
    pub fn from_error(e: &Error) -> Self {
        match e {
            Error::Unstable { .. } => Self::Unstable,
            Error::BelowThreshold { .. } => Self::BelowThreshold,
            other => Self::Error(error_code(other).into()),
        }
    }
}

pub fn error_code(e: &Error) -> &'static str {
    match e {
        Error::Domain(_) => "domain",
        Error::BelowThreshold { .. } => "below-threshold",
        Error::Unstable { .. } => "unstable",
        Error::Conditioning(_) => "conditioning",
        Error::Integration(_) => "integration",
        Error::Pole { .. } => "pole",
        Error::Physicality(_) => "physicality",
        Error::InvalidCovariance(_) => "invalid-covariance",
        Error::Config(_) => "config",
        Error::Io(_) => "io",
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ok => f.write_str("ok"),
            Self::Unstable => f.write_str("unstable"),
            Self::BelowThreshold => f.write_str("below-threshold"),
            Self::Error(code) => write!(f, "error:{code}"),
        }
    }
}

impl Serialize for Status {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Status {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(match s.as_str() {
            "ok" => Self::Ok,
            "unstable" => Self::Unstable,
            "below-threshold" => Self::BelowThreshold,
            other => match other.strip_prefix("error:") {
                Some(code) => Self::Error(code.into()),
                None => return Err(serde::de::Error::custom(format!("bad status '{other}'"))),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub curve: String,
    pub axis1: Option<f64>,
    pub axis2: Option<f64>,
    /// One entry per column; NaN where unavailable.
    pub values: Vec<f64>,
    pub status: Status,
    /// Present whenever the model could be built.
    pub max_re_lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSpectrum {
    pub label: String,
    pub status: Status,
    pub series: Option<SpectrumSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub columns: Vec<&'static str>,
    pub rows: Vec<SweepRow>,
    pub spectra: Vec<CurveSpectrum>,
}

fn evaluate_point(params: &PhysicalParams, observables: &[Observable]) -> (Vec<f64>, Status, Option<f64>) {
    let ncols: usize = observables.iter().map(|o| o.columns().len()).sum();
    let mut values = vec![f64::NAN; ncols];
    let model = match build_linear_model(params) {
        Ok(m) => m,
        Err(e) => return (values, Status::from_error(&e), None),
    };
    let report = stability(&drift_matrix(&model));
    let needs_ss = observables.iter().any(|o| o.needs_steady_state());
    let mut status = Status::Ok;
    let steady = if needs_ss && report.is_stable() {
        match steady_state(&model) {
            Ok(ss) => Some(ss),
            Err(e) => {
                status = Status::from_error(&e);
                None
            }
        }
    } else {
        if needs_ss {
            status = Status::Unstable;
        }
        None
    };
    let en = match (&steady, observables.contains(&Observable::LogNegativity)) {
        (Some(ss), true) => match log_negativity(&ss.v_prime) {
            Ok(x) => Some(x),
            Err(e) => {
                status = Status::from_error(&e);
                None
            }
        },
        _ => None,
    };
    let mut col = 0;
    for obs in observables {
        let out: Vec<Option<f64>> = match obs {
            Observable::NPhonon => vec![steady.map(|s| s.n_phonon)],
            Observable::NPhoton => vec![steady.map(|s| s.n_photon)],
            Observable::TEff => vec![steady.map(|s| s.t_eff)],
            Observable::TEffOverTm => vec![steady.map(|s| s.t_eff / params.temperature_m)],
            Observable::LogNegativity => vec![en],
            Observable::Stability => vec![Some(report.max_real)],
            Observable::GBar => vec![Some(model.g_bar)],
            Observable::N0 => vec![Some(model.n0)],
            Observable::OmegaPm => {
                let nm = normal_mode_frequencies(&model);
                let real = |z: num_complex::Complex64| (z.im == 0.0).then_some(z.re / model.omega);
                vec![real(nm.omega_plus), real(nm.omega_minus)]
            }
            Observable::GammaEffOverGamma => {
                vec![Some(mechanical_response(&model, model.omega).gamma_eff / model.gamma)]
            }
        };
        for v in out {
            values[col] = v.unwrap_or(f64::NAN);
            col += 1;
        }
    }
    (values, status, Some(report.max_real))
}

fn curve_params(base: &PhysicalParams, curve: &Curve) -> Result<PhysicalParams> {
    let mut p = *base;
    for (k, v) in &curve.overrides {
        p.set(k, *v)?;
    }
    Ok(p)
}

fn spectrum_for(params: &PhysicalParams, req: &SpectrumRequest) -> Result<SpectrumSeries> {
    let model = build_linear_model(params)?;
    let grid = frequency_grid(model.omega, req.omega_min, req.omega_max, req.points)?;
    req.kind.compute(&model, &grid)
}

/// Evaluates every grid point of every curve on a pool of `workers` threads.
/// Output order is curve, then axis1, then axis2, independent of `workers`.
pub fn run_sweep(config: &SweepConfig, workers: usize) -> Result<SweepResult> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let curves = config.curves();
    pool.install(|| {
        if let Some(req) = &config.spectrum {
            let spectra = curves
                .iter()
                .map(|c| {
                    let outcome = curve_params(&config.base, c).and_then(|p| spectrum_for(&p, req));
                    match outcome {
                        Ok(series) => CurveSpectrum {
                            label: c.label.clone(),
                            status: Status::Ok,
                            series: Some(series),
                        },
                        Err(e) => {
                            log::warn!("curve {}: {e}", c.label);
                            CurveSpectrum {
                                label: c.label.clone(),
                                status: Status::from_error(&e),
                                series: None,
                            }
                        }
                    }
                })
                .collect();
            return Ok(SweepResult {
                columns: vec![],
                rows: vec![],
                spectra,
            });
        }
        let axis1 = config.axis1.as_ref().expect("validated");
        let mut points = Vec::new();
        for c in &curves {
            let p = curve_params(&config.base, c)?;
            for &a in &axis1.values {
                match &config.axis2 {
                    None => points.push((c.label.clone(), p, a, None)),
                    Some(ax2) => {
                        for &b in &ax2.values {
                            points.push((c.label.clone(), p, a, Some(b)));
                        }
                    }
                }
            }
        }
        let rows = points
            .into_par_iter()
            .map(|(label, base, a, b)| {
                let mut p = base;
                let applied = axis1.apply(&mut p, a).and_then(|_| match (b, &config.axis2) {
                    (Some(b), Some(ax2)) => ax2.apply(&mut p, b),
                    _ => Ok(()),
                });
                let (values, status, max_re) = match applied {
                    Ok(()) => evaluate_point(&p, &config.observables),
                    Err(e) => (vec![f64::NAN; config.columns().len()], Status::from_error(&e), None),
                };
                SweepRow {
                    curve: label,
                    axis1: Some(a),
                    axis2: b,
                    values,
                    status,
                    max_re_lambda: max_re,
                }
            })
            .collect();
        Ok(SweepResult {
            columns: config.columns(),
            rows,
            spectra: vec![],
        })
    })
}

pub const FIGURES: [&str; 14] = [
    "fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig5", "fig6a", "fig6b", "fig7a", "fig7b", "fig7c", "fig8",
    "fig9",
];

/// Strong-coupling value of g used from the output-field figures onward.
pub const G_STRONG: f64 = 8.4e-7;

fn zeta_curves(zetas: &[(&str, f64)]) -> Vec<Curve> {
    zetas.iter().map(|(l, z)| Curve::new(l, &[("zeta", *z)])).collect()
}

/// Parameter sets behind each figure preset.
pub fn figure_preset(name: &str) -> Result<SweepConfig> {
    let base = PhysicalParams::default();
    let strong = PhysicalParams { g: G_STRONG, ..base };
    let zeta_pair = || zeta_curves(&[("zeta4e-4", 4e-4), ("zeta10e-4", 1e-3)]);
    let zeta_triple = || zeta_curves(&[("zeta3e-4", 3e-4), ("zeta4e-4", 4e-4), ("zeta5e-4", 5e-4)]);
    let temp_pair = || vec![Curve::new("T150", &[("t", 150.0)]), Curve::new("T50", &[("t", 50.0)])];
    let spectral = |name: &str, base: PhysicalParams, curves: Vec<Curve>, kind| SweepConfig {
        name: name.into(),
        base,
        curves,
        axis1: None,
        axis2: None,
        observables: vec![],
        spectrum: Some(SpectrumRequest::new(kind)),
    };
    let swept = |name: &str, base: PhysicalParams, curves: Vec<Curve>, axis: Axis, obs: Observable| SweepConfig {
        name: name.into(),
        base,
        curves,
        axis1: Some(axis),
        axis2: None,
        observables: vec![obs],
        spectrum: None,
    };
    let t_axis = || Axis::range("t", 1.0, 150.0, 1.0);
    use SpectrumKind::*;
    Ok(match name {
        "fig2a" => spectral(name, base, zeta_pair(), Displacement),
        "fig2b" => spectral(name, base, temp_pair(), Displacement),
        "fig3a" | "fig3b" => spectral(name, base, zeta_pair(), Response),
        "fig4a" => swept(name, base, zeta_pair(), t_axis(), Observable::NPhonon),
        "fig4b" => swept(name, base, zeta_pair(), t_axis(), Observable::TEffOverTm),
        "fig5" => {
            let mut curves = zeta_pair();
            curves.push(Curve::new("g0", &[("zeta", 4e-4), ("g", 0.0)]));
            swept(name, strong, curves, t_axis(), Observable::NPhoton)
        }
        "fig6a" => spectral(name, strong, zeta_pair(), Output),
        "fig6b" => spectral(name, strong, temp_pair(), Output),
        "fig7a" => spectral(name, strong, zeta_pair(), Squeezing),
        "fig7b" => spectral(name, strong, temp_pair(), Squeezing),
        "fig7c" => spectral(
            name,
            PhysicalParams { zeta: 1e-3, ..strong },
            vec![
                Curve::new("g8.4e-7", &[("g", G_STRONG)]),
                Curve::new("g0", &[("g", 0.0)]),
            ],
            Squeezing,
        ),
        "fig8" => swept(
            name,
            PhysicalParams {
                temperature: 1.5,
                ..strong
            },
            zeta_triple(),
            Axis::range("delta_tilde", -1.0, 3.0, 0.01).with_unit(AxisUnit::OffsetOverOmega),
            Observable::LogNegativity,
        ),
        "fig9" => swept(
            name,
            PhysicalParams {
                delta_tilde: 0.8 * strong.omega,
                ..strong
            },
            zeta_triple(),
            Axis::range("t", 0.1, 30.0, 0.1),
            Observable::LogNegativity,
        ),
        _ => {
            return Err(Error::Config(format!(
                "unknown figure '{name}'; valid presets: {}",
                FIGURES.join(", ")
            )))
        }
    })
}
