use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::evolution::{evolve_to_dir, load_series, resume_in_dir, Manifest, MANIFEST_FILE};
use crate::grid::{read_grid, write_grid, GridSpec};
use crate::identity::ab_state;
use crate::radiation::power_series;
use crate::wavefunction::{
    build_initial_state, quantization_check, select_nu, BackgroundFlow, PhysicalConstants, StateMetadata, StateSpec,
};
use crate::{Error, Vec3};

use super::{CliError, Invocation, SourceConfig};

pub const STATE_FILE: &str = "state.qvg";
pub const STATE_NU_FILE: &str = "state_nu.qvg";
pub const STATE_REPORT_FILE: &str = "state.json";
pub const EVOLVE_DIR: &str = "evolve";
pub const POWER_FILE: &str = "power.csv";
pub const RADIATE_FILE: &str = "radiate.json";

/// Sidecar of a built state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateReport {
    pub kind: String,
    pub grid: GridSpec,
    pub metadata: StateMetadata,
    /// `ν` of `state_nu.qvg`.
    pub nu: f64,
    /// `ν = 1`: the stored `ψ_ν` follows the linear equation.
    pub linear: bool,
    /// `max|ψ|` on the filament over `max|ψ|` (knot sources only).
    pub nodal_ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiateSummary {
    /// Emitted energy, the trapezoid of `P` over the snapshot times.
    pub delta_e: f64,
    pub nu: f64,
    pub frames: usize,
    pub peak_power: f64,
    pub max_mask_fraction: f64,
    pub mean_mask_fraction: f64,
}

pub(super) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e).into())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e).into())
}

fn choose_nu(gamma: f64, inv: &Invocation) -> Result<f64, CliError> {
    if let Some(nu) = inv.config.nu {
        return Ok(nu);
    }
    match select_nu(gamma, &inv.config.constants, inv.config.m_index) {
        Ok(s) => Ok(s.nu),
        Err(Error::NoVortex) => Ok(1.0),
        Err(e) => Err(e.into()),
    }
}

/// Builds the configured state and writes `ψ`, `ψ_ν` and the report.
pub fn cmd_build(inv: &Invocation) -> Result<StateReport, CliError> {
    let cfg = &inv.config;
    let spec = cfg.grid.spec()?;
    let c = cfg.constants;
    let (psi, psi_nu, report) = match &cfg.source {
        SourceConfig::Knot {
            geometry,
            gamma,
            envelope,
            n,
            flow,
        } => {
            let (link, mesh) = geometry.build(*gamma, &inv.base)?;
            let mut state_spec = StateSpec::new(spec, *envelope, *n);
            if let Some(v) = flow {
                state_spec = state_spec.with_flow(BackgroundFlow::Uniform(Vec3::from(*v)));
            }
            let state = build_initial_state(&state_spec, &link, mesh.as_ref(), &c)?;
            let nu = choose_nu(*gamma, inv)?;
            let report = StateReport {
                kind: "knot".into(),
                grid: spec,
                metadata: StateMetadata::new(&state, cfg.m_index),
                nu,
                linear: nu == 1.0,
                nodal_ratio: Some(state.nodal_ratio()?),
            };
            (state.psi(), state.psi_nu(nu), report)
        }
        SourceConfig::Solenoid {
            solenoid,
            convention,
            center,
            width,
            momentum,
            n,
        } => {
            let ab = ab_state(
                solenoid,
                spec,
                Vec3::from(*center),
                *width,
                Vec3::from(*momentum),
                *n,
                cfg.m_index,
                &c,
                *convention,
            )?;
            if let Some(nu) = cfg.nu {
                if nu != ab.nu {
                    return Err(CliError::Config(format!(
                        "solenoid states fix nu = {} from the flux; the override {nu} does not match",
                        ab.nu
                    )));
                }
            }
            let metadata = StateMetadata {
                gamma: ab.gamma,
                n: *n,
                constants: c,
                nu: select_nu(ab.gamma, &c, cfg.m_index).ok().map(|s| s.nu),
                m_index: cfg.m_index,
                sheet: 0,
                quantization: quantization_check(ab.gamma, &c),
            };
            let report = StateReport {
                kind: "solenoid".into(),
                grid: spec,
                metadata,
                nu: ab.nu,
                linear: ab.nu == 1.0,
                nodal_ratio: None,
            };
            (ab.psi, ab.psi_nu, report)
        }
    };
    create_dir(&inv.out)?;
    write_grid(&psi, inv.out.join(STATE_FILE))?;
    write_grid(&psi_nu, inv.out.join(STATE_NU_FILE))?;
    write_json(&inv.out.join(STATE_REPORT_FILE), &report)?;
    Ok(report)
}

fn check_constants(stored: &PhysicalConstants, cfg: &PhysicalConstants) -> Result<(), CliError> {
    if stored != cfg {
        return Err(CliError::Config(
            "constants differ from those the state was built with".into(),
        ));
    }
    Ok(())
}

/// Evolves `state_nu.qvg` under the configured equation into `evolve/`.
pub fn cmd_evolve(inv: &Invocation) -> Result<Manifest, CliError> {
    let cfg = &inv.config;
    let section = cfg
        .evolve
        .as_ref()
        .ok_or_else(|| CliError::Config("missing `evolve` section".into()))?;
    let report: StateReport = read_json(&inv.out.join(STATE_REPORT_FILE))?;
    check_constants(&report.metadata.constants, &cfg.constants)?;
    let psi0 = read_grid(inv.out.join(STATE_NU_FILE))?;
    if psi0.spec() != &report.grid {
        return Err(CliError::Io("state grid differs from its report".into()));
    }
    let evolve_cfg = section.config(report.nu);
    let dir = inv.out.join(EVOLVE_DIR);
    if section.resume && dir.join(MANIFEST_FILE).exists() {
        return Ok(resume_in_dir(&dir, &evolve_cfg, &cfg.constants)?);
    }
    if dir.exists() {
        fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    Ok(evolve_to_dir(&psi0, &evolve_cfg, &cfg.constants, &dir)?)
}

/// Radiated power of every snapshot in `evolve/`.
pub fn cmd_radiate(inv: &Invocation) -> Result<RadiateSummary, CliError> {
    let (manifest, series) = load_series(inv.out.join(EVOLVE_DIR))?;
    check_constants(&manifest.constants, &inv.config.constants)?;
    let power = power_series(&series, &manifest.constants)?;
    power.write_csv(inv.out.join(POWER_FILE))?;
    let frames = power.times.len();
    let summary = RadiateSummary {
        delta_e: power.total(),
        nu: series.nu,
        frames,
        peak_power: power.power.iter().copied().fold(0.0, f64::max),
        max_mask_fraction: power.mask_fraction.iter().copied().fold(0.0, f64::max),
        mean_mask_fraction: power.mask_fraction.iter().sum::<f64>() / frames as f64,
    };
    write_json(&inv.out.join(RADIATE_FILE), &summary)?;
    Ok(summary)
}
