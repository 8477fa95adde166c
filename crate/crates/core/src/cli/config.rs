//! Flat JSON run configuration.

use serde::{Deserialize, Serialize};

use crate::becmodel::PhysicalParams;
use crate::error::{Error, Result};
use crate::spectra::DEFAULT_GRID;

/// Physical parameters plus grid options, all keys optional. Missing physical
/// keys take the defaults of [`PhysicalParams::default`]; a missing
/// `delta_tilde` means resonance with the membrane (`delta_tilde = omega`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_ex: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_tilde: Option<f64>,
    /// Grid start in units of Omega.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got '{assignment}'")))?;
        let key = key.trim();
        let value = value.trim();
        let num: f64 = value
            .parse()
            .map_err(|_| Error::Config(format!("value for '{key}' is not a number: '{value}'")))?;
        let int = || -> Result<u64> {
            if num >= 0.0 && num.fract() == 0.0 && num <= u32::MAX as f64 {
                Ok(num as u64)
            } else {
                Err(Error::Config(format!(
                    "'{key}' must be a non-negative integer, got {value}"
                )))
            }
        };
        match key {
            "omega_t" => self.omega_t = Some(num),
            "omega" => self.omega = Some(num),
            "kappa_ex" => self.kappa_ex = Some(num),
            "kappa_0" => self.kappa_0 = Some(num),
            "gamma" => self.gamma = Some(num),
            "g" => self.g = Some(num),
            "n_t" => self.n_t = Some(num),
            "zeta" => self.zeta = Some(num),
            "t" => self.t = Some(num),
            "t_m" => self.t_m = Some(num),
            "s" => self.s = Some(int()? as u32),
            "delta_tilde" => self.delta_tilde = Some(num),
            "omega_min" => self.omega_min = Some(num),
            "omega_max" => self.omega_max = Some(num),
            "points" => self.points = Some(int()? as usize),
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn params(&self) -> Result<PhysicalParams> {
        let d = PhysicalParams::default();
        let omega = self.omega.unwrap_or(d.omega);
        let p = PhysicalParams {
            omega_t: self.omega_t,
            omega,
            kappa_ex: self.kappa_ex.unwrap_or(d.kappa_ex),
            kappa_0: self.kappa_0.unwrap_or(d.kappa_0),
            gamma: self.gamma.unwrap_or(d.gamma),
            g: self.g.unwrap_or(d.g),
            n_t: self.n_t.unwrap_or(d.n_t),
            zeta: self.zeta.unwrap_or(d.zeta),
            temperature: self.t.unwrap_or(d.temperature),
            temperature_m: self.t_m.unwrap_or(d.temperature_m),
            s: self.s.unwrap_or(d.s),
            delta_tilde: self.delta_tilde.unwrap_or(omega),
        };
        p.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(p)
    }

    /// (omega_min, omega_max, points) in units of Omega.
    pub fn grid(&self) -> (f64, f64, usize) {
        (
            self.omega_min.unwrap_or(DEFAULT_GRID.0),
            self.omega_max.unwrap_or(DEFAULT_GRID.1),
            self.points.unwrap_or(DEFAULT_GRID.2),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_resonance() {
        let c = RunConfig::from_json(r#"{"omega": 5e-4}"#).unwrap();
        let p = c.params().unwrap();
        assert_eq!(p.delta_tilde, 5e-4);
        assert_eq!(p.zeta, PhysicalParams::default().zeta);
        assert_eq!(RunConfig::default().params().unwrap(), PhysicalParams::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RunConfig::from_json(r#"{"kappa": 1.0}"#).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err = RunConfig::from_json("{\n \"t\": 1.0,,\n}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn overrides() {
        let mut c = RunConfig::default();
        c.set("zeta=0").unwrap();
        c.set(" t = 0 ").unwrap();
        c.set("points=11").unwrap();
        assert_eq!((c.zeta, c.t, c.points), (Some(0.0), Some(0.0), Some(11)));
        assert!(c.set("points=1.5").is_err());
        assert!(c.set("zeta").is_err());
        assert!(c.set("zeta=abc").is_err());
        assert!(c.set("nope=1").is_err());
        c.set("gamma=-1").unwrap();
        assert!(matches!(c.params(), Err(Error::Config(_))));
    }

    #[test]
    fn round_trip() {
        let mut c = RunConfig::default();
        c.set("g=8.4e-7").unwrap();
        c.set("omega_min=0.5").unwrap();
        let back = RunConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
