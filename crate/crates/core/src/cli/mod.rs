//! Command implementations behind the `pbom` binary.

mod config;

pub use config::RunConfig;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::becmodel::{build_linear_model, critical_photon_number, PhysicalParams};
use crate::dynamics::steady_state;
use crate::entanglement::log_negativity;
use crate::error::{Error, Result};
use crate::spectra::{frequency_grid, SpectrumSeries};
use crate::sweep::{figure_preset, run_sweep, SpectrumKind, Status, SweepConfig, SweepResult};

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Domain(_) => 2,
        Error::BelowThreshold { .. } => 3,
        Error::Unstable { .. } => 4,
        _ => 5,
    }
}

/// Worker count from an explicit flag, then `PBOM_WORKERS`, then the machine.
pub fn resolve_workers(flag: Option<usize>) -> Result<usize> {
    if let Some(n) = flag {
        return if n == 0 {
            Err(Error::Config("--workers must be >= 1".into()))
        } else {
            Ok(n)
        };
    }
    match std::env::var("PBOM_WORKERS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Config(format!(
                "PBOM_WORKERS must be a positive integer, got '{s}'"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

/// Shortest representation that parses back to the same f64.
pub fn fmt_float(x: f64) -> String {
    format!("{x:?}")
}

pub fn csv_string(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_float(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Parses a CSV written by [`csv_string`] (numeric columns only).
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Config("empty CSV".into()))?
        .split(',')
        .map(String::from)
        .collect::<Vec<_>>();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(',')
                .map(|c| {
                    c.parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad CSV cell '{c}'")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((header, rows))
}

fn series_csv(series: &SpectrumSeries) -> String {
    let mut header = vec!["omega_over_Omega".to_string()];
    header.extend(series.columns.iter().map(|(n, _)| n.clone()));
    let rows: Vec<Vec<f64>> = series
        .omega
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let mut r = vec![w / series.model.omega];
            r.extend(series.columns.iter().map(|(_, c)| c[i]));
            r
        })
        .collect();
    csv_string(&header, &rows)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

/// Derived linear model as JSON.
pub fn cmd_model(cfg: &RunConfig) -> Result<Value> {
    let p = cfg.params()?;
    let m = build_linear_model(&p)?;
    let mut report = serde_json::to_value(m).map_err(|e| Error::Config(e.to_string()))?;
    let obj = report.as_object_mut().expect("struct serializes to an object");
    obj.insert(
        "N_c".into(),
        json!(if p.temperature > 0.0 {
            critical_photon_number(p.temperature)?
        } else {
            0.0
        }),
    );
    obj.insert("strong_coupling_ratio".into(), json!(2.0 * m.g_bar / m.kappa));
    obj.insert(
        "params".into(),
        serde_json::to_value(p).map_err(|e| Error::Config(e.to_string()))?,
    );
    Ok(report)
}

/// Spectrum CSV for one configuration.
pub fn cmd_spectrum(cfg: &RunConfig, kind: SpectrumKind) -> Result<String> {
    let p = cfg.params()?;
    let m = build_linear_model(&p)?;
    let (lo, hi, n) = cfg.grid();
    let grid = frequency_grid(m.omega, lo, hi, n).map_err(|e| Error::Config(e.to_string()))?;
    Ok(series_csv(&kind.compute(&m, &grid)?))
}

/// Steady-state report as JSON.
pub fn cmd_steady(cfg: &RunConfig) -> Result<Value> {
    let p = cfg.params()?;
    let m = build_linear_model(&p)?;
    let ss = steady_state(&m)?;
    let en = log_negativity(&ss.v_prime)?;
    Ok(json!({
        "n_phonon": ss.n_phonon,
        "n_photon": ss.n_photon,
        "T_eff": ss.t_eff,
        "T_eff_over_Tm": ss.t_eff / p.temperature_m,
        "Omega_eff": ss.omega_eff,
        "E_N": en,
        "stability": {
            "stable": ss.stability.is_stable(),
            "stable_routh_hurwitz": ss.stability.stable_routh_hurwitz,
            "max_re_lambda": ss.stability.max_real,
            "eigenvalues": ss.stability.eigenvalues.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        },
        "covariance": ss.v.rows(),
        "covariance_cavity_basis": ss.v_prime.rows(),
    }))
}

#[derive(Debug, Clone, Serialize)]
struct PointNote {
    axis1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    axis2: Option<f64>,
    status: Status,
}

#[derive(Debug, Clone, Serialize)]
struct ManifestEntry {
    label: String,
    file: Option<String>,
    status: Status,
    params: PhysicalParams,
    /// Grid points whose status is not ok (their values are NaN).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    not_ok: Vec<PointNote>,
}

/// Writes one CSV per curve of a sweep and a manifest; returns the paths written.
pub fn write_sweep_outputs(config: &SweepConfig, result: &SweepResult, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut entries = Vec::new();
    for curve in config.curves() {
        let mut params = config.base;
        for (k, v) in &curve.overrides {
            params.set(k, *v)?;
        }
        let file = format!("{stem}_{}.csv", curve.label);
        let (text, status, not_ok) = if config.spectrum.is_some() {
            let cs = result
                .spectra
                .iter()
                .find(|c| c.label == curve.label)
                .expect("one spectrum per curve");
            match &cs.series {
                Some(series) => (Some(series_csv(series)), Status::Ok, vec![]),
                None => (None, cs.status.clone(), vec![]),
            }
        } else {
            let axis1 = config.axis1.as_ref().expect("sweep has axis1");
            let mut header = vec![axis1.header()];
            if let Some(ax2) = &config.axis2 {
                header.push(ax2.header());
            }
            header.extend(result.columns.iter().map(|c| c.to_string()));
            let rows: Vec<_> = result.rows.iter().filter(|r| r.curve == curve.label).collect();
            let data: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| {
                    let mut v = vec![r.axis1.unwrap_or(f64::NAN)];
                    if config.axis2.is_some() {
                        v.push(r.axis2.unwrap_or(f64::NAN));
                    }
                    v.extend(&r.values);
                    v
                })
                .collect();
            let not_ok: Vec<PointNote> = rows
                .iter()
                .filter(|r| r.status != Status::Ok)
                .map(|r| PointNote {
                    axis1: r.axis1.unwrap_or(f64::NAN),
                    axis2: r.axis2,
                    status: r.status.clone(),
                })
                .collect();
            let status = if not_ok.len() == rows.len() && !rows.is_empty() {
                not_ok[0].status.clone()
            } else {
                Status::Ok
            };
            (Some(csv_string(&header, &data)), status, not_ok)
        };
        let file = match text {
            Some(t) => {
                let path = dir.join(&file);
                std::fs::write(&path, t)?;
                written.push(path);
                Some(file)
            }
            None => None,
        };
        entries.push(ManifestEntry {
            label: curve.label.clone(),
            file,
            status,
            params,
            not_ok,
        });
    }
    let manifest = json!({
        "name": config.name,
        "config": config,
        "curves": entries,
    });
    let path = dir.join(format!("{stem}_manifest.json"));
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    std::fs::write(&path, text)?;
    written.push(path);
    Ok(written)
}

/// Regenerates the data behind a named figure into `dir`.
pub fn cmd_fig(name: &str, dir: &Path, workers: usize) -> Result<Vec<PathBuf>> {
    let config = figure_preset(name)?;
    let result = run_sweep(&config, workers)?;
    write_sweep_outputs(&config, &result, dir, name)
}

pub fn load_sweep_config(path: &Path) -> Result<SweepConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("invalid sweep config: {e}")))
}

/// Runs a user sweep; writes `<name>_<curve>.csv` files and a manifest into `dir`.
pub fn cmd_sweep(config: &SweepConfig, dir: &Path, workers: usize) -> Result<Vec<PathBuf>> {
    let result = run_sweep(config, workers)?;
    write_sweep_outputs(config, &result, dir, &config.name)
}

/// Text summary of written files, one path per line.
pub fn listing(paths: &[PathBuf]) -> String {
    let mut s = String::new();
    for p in paths {
        let _ = writeln!(s, "{}", p.display());
    }
    s
}

pub fn emit_json(value: &Value, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    write_or_print(out, &text)
}

pub fn emit_text(text: &str, out: Option<&Path>) -> Result<()> {
    write_or_print(out, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let values = vec![
            vec![0.1, 1e-300, -2.5e-7, 1.0 / 3.0],
            vec![f64::MAX, 7e-4, 123456789.123, f64::NAN],
        ];
        let header = vec!["a".into(), "b".into(), "c".into(), "d".into()];
        let text = csv_string(&header, &values);
        let (h, back) = parse_csv(&text).unwrap();
        assert_eq!(h, header);
        for (r, s) in values.iter().zip(&back) {
            for (x, y) in r.iter().zip(s) {
                assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
            }
        }
        assert!(!text.contains(' '));
    }

    #[test]
    fn model_report() {
        let v = cmd_model(&RunConfig::default()).unwrap();
        assert!((v["g_bar"].as_f64().unwrap() - 2.47e-4).abs() < 5e-6);
        let mut c = RunConfig::default();
        c.set("zeta=0").unwrap();
        c.set("t=0").unwrap();
        let v = cmd_model(&c).unwrap();
        assert_eq!(v["u"].as_f64(), Some(1.0));
        assert_eq!(v["v"].as_f64(), Some(0.0));
    }

    #[test]
    fn exit_codes() {
        let mut c = RunConfig::default();
        c.set("n_t=1000").unwrap();
        assert_eq!(exit_code(&cmd_model(&c).unwrap_err()), 3);
        let mut c = RunConfig::default();
        c.set("g=8.4e-7").unwrap();
        assert_eq!(exit_code(&cmd_steady(&c).unwrap_err()), 4);
        assert_eq!(exit_code(&cmd_spectrum(&c, SpectrumKind::Displacement).unwrap_err()), 4);
        assert_eq!(exit_code(&RunConfig::from_json("{").unwrap_err()), 2);
        assert_eq!(exit_code(&figure_preset("fig99").unwrap_err()), 2);
    }

    #[test]
    fn decoupled_steady_is_thermal() {
        let mut c = RunConfig::default();
        c.set("g=0").unwrap();
        let v = cmd_steady(&c).unwrap();
        let m = build_linear_model(&c.params().unwrap()).unwrap();
        assert!((v["n_phonon"].as_f64().unwrap() - m.n_c).abs() < 1e-9 * m.n_c);
        assert_eq!(v["E_N"].as_f64(), Some(0.0));
    }

    #[test]
    fn spectrum_csv_header() {
        let mut c = RunConfig::default();
        c.set("points=5").unwrap();
        for (kind, head) in [
            (SpectrumKind::Displacement, "omega_over_Omega,S_x_closed,S_x_engine"),
            (SpectrumKind::Output, "omega_over_Omega,S_out,S_out_sym,S_out_engine"),
            (
                SpectrumKind::Squeezing,
                "omega_over_Omega,S_opt_scan,S_opt_printed,phi_opt",
            ),
        ] {
            let text = cmd_spectrum(&c, kind).unwrap();
            assert_eq!(text.lines().next().unwrap(), head);
            assert_eq!(text.lines().count(), 6);
        }
    }

    #[test]
    fn vacuum_output_column_is_zero() {
        let mut c = RunConfig::default();
        for s in ["g=0", "zeta=0", "t=0", "points=7"] {
            c.set(s).unwrap();
        }
        let (_, rows) = parse_csv(&cmd_spectrum(&c, SpectrumKind::Output).unwrap()).unwrap();
        assert!(rows.iter().all(|r| r[1] == 0.0 && r[2] == 0.0 && r[3] == 0.0));
    }

    #[test]
    fn workers_resolution() {
        assert_eq!(resolve_workers(Some(3)).unwrap(), 3);
        assert!(resolve_workers(Some(0)).is_err());
    }
}
