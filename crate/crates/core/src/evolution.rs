//! Split-step Fourier evolution of the linear Schrödinger equation and of
//! its single-valued ν-transformed nonlinear form
//!
//! ```text
//! [−(νħ)²/2m Δ + V + (ħ²/2m)(ν²−1) ΔR/R] ψ_ν = iνħ ∂ψ_ν/∂t,   ψ_ν = R e^{iS/(νħ)}.
//! ```
//!
//! `ν = 1` is the linear equation; [`evolve_linear`] runs the same stepper
//! with `ν = 1`, so the two entry points agree bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::{integrate_real, read_grid, write_grid, ComplexGrid3, GridSpec, RealGrid3, Spectral};
use crate::madelung::{NodeMask, NODE_MASK_THRESHOLD};
use crate::wavefunction::PhysicalConstants;
use crate::{Error, Result, Vec3};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MONITORS_FILE: &str = "monitors.csv";

/// External potential `V`.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    Free,
    /// `½ m ω² |x − center|²`
    Harmonic { omega: f64, center: Vec3 },
    Grid(RealGrid3),
}

impl Potential {
    /// Sampled values, or `None` for `V = 0`.
    pub fn values(&self, spec: &GridSpec, constants: &PhysicalConstants) -> Result<Option<Vec<f64>>> {
        match self {
            Potential::Free => Ok(None),
            Potential::Harmonic { omega, center } => {
                let k = 0.5 * constants.mass * omega * omega;
                Ok(Some(
                    (0..spec.len())
                        .map(|i| k * (spec.position_of(i) - center).norm_squared())
                        .collect(),
                ))
            }
            Potential::Grid(v) => {
                if v.spec() != spec {
                    return Err(Error::GridMismatch);
                }
                v.check_finite()?;
                Ok(Some(v.values().to_vec()))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Potential::Free => "free".into(),
            Potential::Harmonic { omega, center } => {
                format!("harmonic omega={omega} center=[{},{},{}]", center.x, center.y, center.z)
            }
            Potential::Grid(_) => "grid".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvolveConfig {
    pub dt: f64,
    pub steps: usize,
    pub potential: Potential,
    /// 1 for the linear equation.
    pub nu: f64,
    pub snapshot_stride: usize,
    /// Fixed-point iterations allowed per step for the `ΔR/R` term.
    pub max_iterations: usize,
    /// Relative amplitude change at which the fixed point is accepted.
    pub tolerance: f64,
    /// Relative norm drift that aborts the run.
    pub drift_limit: f64,
    /// Reject `dt` above [`stability_limit`] before stepping.
    pub enforce_stability: bool,
}

impl EvolveConfig {
    pub fn new(dt: f64, steps: usize) -> Self {
        EvolveConfig {
            dt,
            steps,
            potential: Potential::Free,
            nu: 1.0,
            snapshot_stride: 1,
            max_iterations: 5,
            tolerance: 1e-10,
            drift_limit: 1e-6,
            enforce_stability: true,
        }
    }

    pub fn with_potential(mut self, potential: Potential) -> Self {
        self.potential = potential;
        self
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn validate(&self, spec: &GridSpec, constants: &PhysicalConstants) -> Result<()> {
        constants.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        if self.nu == 0.0 || !self.nu.is_finite() {
            return Err(Error::InvalidArgument(format!("nu must be finite and nonzero, got {}", self.nu)));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidArgument("snapshot_stride must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be at least 1".into()));
        }
        if self.enforce_stability {
            let limit = stability_limit(spec, constants, self.nu);
            if self.dt > limit {
                return Err(Error::StepTooLarge { dt: self.dt, limit });
            }
        }
        Ok(())
    }
}

/// `0.5 m h² / (π ħ |ν|)`: the Nyquist mode turns by at most π/4 per step.
pub fn stability_limit(spec: &GridSpec, constants: &PhysicalConstants, nu: f64) -> f64 {
    let h = spec.min_spacing();
    0.5 * constants.mass * h * h / (std::f64::consts::PI * constants.hbar * nu.abs())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepStats {
    pub iterations: usize,
    pub mask_fraction: f64,
}

/// Strang stepper: half kinetic, full potential, half kinetic.
pub struct Propagator {
    spectral: Spectral,
    kinetic: Vec<Complex64>,
    potential: Option<Vec<f64>>,
    /// `dt/(νħ)`
    phase_scale: f64,
    /// `(ν²−1)`; the nonlinear term is `−(ν²−1) Q_B`.
    nonlinear: f64,
    constants: PhysicalConstants,
    max_iterations: usize,
    tolerance: f64,
}

impl Propagator {
    pub fn new(spec: GridSpec, config: &EvolveConfig, constants: &PhysicalConstants) -> Result<Self> {
        config.validate(&spec, constants)?;
        let spectral = Spectral::new(spec);
        let [nx, ny, _] = spec.dims;
        let a = -config.nu * constants.hbar * config.dt / (4.0 * constants.mass);
        let kinetic = (0..spec.len())
            .map(|idx| {
                let k2 = spectral.k_squared(idx % nx, (idx / nx) % ny, idx / (nx * ny));
                Complex64::from_polar(1.0, a * k2)
            })
            .collect();
        Ok(Propagator {
            spectral,
            kinetic,
            potential: config.potential.values(&spec, constants)?,
            phase_scale: config.dt / (config.nu * constants.hbar),
            nonlinear: config.nu * config.nu - 1.0,
            constants: *constants,
            max_iterations: config.max_iterations,
            tolerance: config.tolerance,
        })
    }

    fn half_kinetic(&self, data: &mut [Complex64]) {
        self.spectral.forward(data);
        data.iter_mut().zip(&self.kinetic).for_each(|(v, k)| *v *= k);
        self.spectral.inverse(data);
    }

    /// `−(ν²−1) Q_B` with `ΔR/R = Re(ψ̄Δψ)/|ψ|² + |Im(ψ̄∇ψ)|²/|ψ|⁴`,
    /// zero on masked points and tapered over the decade above the mask
    /// threshold so that it is continuous in `|ψ|`. Built from the spectral derivatives of `ψ`
    /// itself so that it cancels the matching part of the kinetic step;
    /// the `ρ = R²` form aliases and drives a tail instability.
    fn nonlinear_potential(&self, psi: &ComplexGrid3) -> Result<(Vec<f64>, NodeMask)> {
        let mask = NodeMask::from_psi(psi);
        mask.check()?;
        let sp = &self.spectral;
        let s = sp.spectrum(psi.values());
        let grad = [0, 1, 2].map(|a| {
            sp.apply(&s, |i, j, k| Complex64::new(0.0, sp.k_odd(a, [i, j, k][a])))
        });
        let lap = sp.apply(&s, |i, j, k| Complex64::new(-sp.k_squared(i, j, k), 0.0));
        let c = -self.nonlinear * self.constants.hbar * self.constants.hbar / (2.0 * self.constants.mass);
        let floor = NODE_MASK_THRESHOLD * psi.max_abs();
        let w = (0..psi.spec().len())
            .map(|idx| {
                if mask.masked[idx] {
                    return 0.0;
                }
                let p = psi.values()[idx];
                let r2 = p.norm_sqr();
                let j2: f64 = grad.iter().map(|g| (p.conj() * g[idx]).im.powi(2)).sum();
                let x = (r2.sqrt() / floor).log10().clamp(0.0, 1.0);
                -c * x * x * (3.0 - 2.0 * x) * ((p.conj() * lap[idx]).re / r2 + j2 / (r2 * r2))
            })
            .collect();
        Ok((w, mask))
    }

    fn rotate(&self, psi: &mut [Complex64], w: Option<&[f64]>) {
        let v = self.potential.as_deref();
        let s = self.phase_scale;
        for (idx, p) in psi.iter_mut().enumerate() {
            let total = v.map_or(0.0, |v| v[idx]) + w.map_or(0.0, |w| w[idx]);
            if total != 0.0 {
                *p *= Complex64::from_polar(1.0, -total * s);
            }
        }
    }

    pub fn step(&self, psi: &mut ComplexGrid3, step: usize) -> Result<StepStats> {
        if psi.spec() != self.spectral.spec() {
            return Err(Error::GridMismatch);
        }
        let mut stats = StepStats {
            iterations: 0,
            mask_fraction: 0.0,
        };
        self.half_kinetic(psi.values_mut());
        if self.nonlinear == 0.0 {
            self.rotate(psi.values_mut(), None);
        } else {
            // The potential step is a pure phase, so W depends on the
            // rotated state only through |ψ|; iterate until that settles.
            let start = psi.clone();
            let (mut w, mask) = self.nonlinear_potential(&start)?;
            stats.mask_fraction = mask.fraction;
            let mut previous = start.abs();
            let mut converged = false;
            let mut change = f64::INFINITY;
            for it in 1..=self.max_iterations {
                psi.values_mut().copy_from_slice(start.values());
                self.rotate(psi.values_mut(), Some(&w));
                stats.iterations = it;
                let current = psi.abs();
                let scale = previous.max_abs().max(f64::MIN_POSITIVE);
                change = current
                    .values()
                    .iter()
                    .zip(previous.values())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
                    / scale;
                if change <= self.tolerance {
                    converged = true;
                    break;
                }
                w = self.nonlinear_potential(psi)?.0;
                previous = current;
            }
            if !converged {
                return Err(Error::FixedPointDiverged { step, change });
            }
        }
        self.half_kinetic(psi.values_mut());
        psi.check_finite()?;
        Ok(stats)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub step: usize,
    pub time: f64,
    pub psi: ComplexGrid3,
}

/// Snapshots of one run, in step order.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub dt: f64,
    pub nu: f64,
    pub frames: Vec<Frame>,
}

fn norm(psi: &ComplexGrid3) -> Result<f64> {
    integrate_real(&psi.map(|c| c.norm_sqr()))
}

/// Steps `psi` from `start_step` to `config.steps`, calling `sink` at
/// every stride multiple and at the final step. The start state itself is
/// passed to `sink` only when `start_step == 0`. Drift is measured against
/// `reference_norm` (the norm of `psi` when `None`).
pub fn run_from<F>(
    psi: ComplexGrid3,
    start_step: usize,
    reference_norm: Option<f64>,
    config: &EvolveConfig,
    constants: &PhysicalConstants,
    mut sink: F,
) -> Result<ComplexGrid3>
where
    F: FnMut(usize, f64, &ComplexGrid3) -> Result<()>,
{
    psi.check_finite()?;
    let prop = Propagator::new(*psi.spec(), config, constants)?;
    let mut psi = psi;
    let n0 = match reference_norm {
        Some(n) => n,
        None => norm(&psi)?,
    };
    if start_step == 0 {
        sink(0, 0.0, &psi)?;
    }
    for step in start_step + 1..=config.steps {
        prop.step(&mut psi, step)?;
        let drift = (norm(&psi)? - n0).abs() / n0;
        if drift > config.drift_limit {
            return Err(Error::NormDrift {
                step,
                drift,
                limit: config.drift_limit,
            });
        }
        if step % config.snapshot_stride == 0 || step == config.steps {
            sink(step, step as f64 * config.dt, &psi)?;
        }
    }
    Ok(psi)
}

/// Evolves `psi_nu0` under the ν-transformed equation and keeps every
/// snapshot in memory.
pub fn evolve_nonlinear(
    psi_nu0: &ComplexGrid3,
    config: &EvolveConfig,
    constants: &PhysicalConstants,
) -> Result<Series> {
    let mut frames = Vec::new();
    run_from(psi_nu0.clone(), 0, None, config, constants, |step, time, psi| {
        frames.push(Frame {
            step,
            time,
            psi: psi.clone(),
        });
        Ok(())
    })?;
    Ok(Series {
        dt: config.dt,
        nu: config.nu,
        frames,
    })
}

/// Evolves `psi0` under the linear equation; `config.nu` is ignored.
pub fn evolve_linear(psi0: &ComplexGrid3, config: &EvolveConfig, constants: &PhysicalConstants) -> Result<Series> {
    evolve_nonlinear(psi0, &config.clone().with_nu(1.0), constants)
}

/// `ψ_ν = R e^{i(S/ħ)/ν}` from amplitude and phase grids.
pub fn psi_nu_from_rs(amplitude: &RealGrid3, phase_over_hbar: &RealGrid3, nu: f64) -> Result<ComplexGrid3> {
    amplitude.zip_map(phase_over_hbar, |r, s| Complex64::from_polar(r, s / nu))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonitorRecord {
    pub step: usize,
    pub time: f64,
    pub norm: f64,
    pub energy: f64,
    pub mask_fraction: f64,
}

/// Per-snapshot diagnostics for one governing equation.
pub struct Monitor {
    spectral: Spectral,
    potential: Option<Vec<f64>>,
    nu: f64,
    constants: PhysicalConstants,
}

impl Monitor {
    pub fn new(spec: GridSpec, config: &EvolveConfig, constants: &PhysicalConstants) -> Result<Self> {
        Ok(Monitor {
            spectral: Spectral::new(spec),
            potential: config.potential.values(&spec, constants)?,
            nu: config.nu,
            constants: *constants,
        })
    }

    /// `(ħ²/2m) ∫ [ν²|∇ψ|² − (ν²−1)|∇R|²] + V|ψ|²`, the linear energy
    /// written in terms of `ψ_ν`. `|∇R|² = |Re(ψ̄∇ψ)|²/|ψ|²` is dropped on
    /// masked points.
    pub fn energy(&self, psi: &ComplexGrid3, mask: &NodeMask) -> Result<f64> {
        let grad = self.spectral.gradient(psi)?;
        let nu2 = self.nu * self.nu;
        let c = self.constants.hbar * self.constants.hbar / (2.0 * self.constants.mass);
        let density: Vec<f64> = (0..psi.spec().len())
            .map(|idx| {
                let p = psi.values()[idx];
                let g = [0, 1, 2].map(|a| grad[a].values()[idx]);
                let g2: f64 = g.iter().map(|v| v.norm_sqr()).sum();
                let mut e = c * nu2 * g2;
                if nu2 != 1.0 && !mask.masked[idx] {
                    let r2 = p.norm_sqr();
                    let gr2: f64 = g.iter().map(|v| (p.conj() * v).re.powi(2)).sum::<f64>() / r2;
                    e -= c * (nu2 - 1.0) * gr2;
                }
                if let Some(v) = &self.potential {
                    e += v[idx] * p.norm_sqr();
                }
                e
            })
            .collect();
        integrate_real(&RealGrid3::from_values(*psi.spec(), density)?)
    }

    pub fn record(&self, step: usize, time: f64, psi: &ComplexGrid3) -> Result<MonitorRecord> {
        let mask = NodeMask::from_psi(psi);
        Ok(MonitorRecord {
            step,
            time,
            norm: norm(psi)?,
            energy: self.energy(psi, &mask)?,
            mask_fraction: mask.fraction,
        })
    }
}

/// Norm, energy and node-mask fraction of every frame.
pub fn monitor(series: &Series, config: &EvolveConfig, constants: &PhysicalConstants) -> Result<Vec<MonitorRecord>> {
    let Some(first) = series.frames.first() else {
        return Ok(Vec::new());
    };
    let cfg = config.clone().with_nu(series.nu);
    let m = Monitor::new(*first.psi.spec(), &cfg, constants)?;
    series
        .frames
        .iter()
        .map(|f| m.record(f.step, f.time, &f.psi))
        .collect()
}

pub fn monitors_csv(records: &[MonitorRecord]) -> String {
    let mut s = String::from("step,t,norm,energy,mask_fraction\n");
    for r in records {
        let _ = writeln!(s, "{},{},{},{},{}", r.step, r.time, r.norm, r.energy, r.mask_fraction);
    }
    s
}

pub fn parse_monitors_csv(text: &str) -> Result<Vec<MonitorRecord>> {
    let bad = |line: usize| Error::InvalidArgument(format!("malformed monitors row at line {line}"));
    text.lines()
        .enumerate()
        .skip(1)
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 {
                return Err(bad(n + 1));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(n + 1));
            Ok(MonitorRecord {
                step: f[0].parse().map_err(|_| bad(n + 1))?,
                time: num(f[1])?,
                norm: num(f[2])?,
                energy: num(f[3])?,
                mask_fraction: num(f[4])?,
            })
        })
        .collect()
}

pub fn snapshot_name(step: usize) -> String {
    format!("snap_{step:06}.qvg")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub step: usize,
    pub time: f64,
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub dt: f64,
    pub steps: usize,
    pub snapshot_stride: usize,
    pub nu: f64,
    pub constants: PhysicalConstants,
    pub potential: String,
    pub monitors: String,
    pub snapshots: Vec<SnapshotEntry>,
}

impl Manifest {
    pub fn read(dir: impl AsRef<Path>) -> Result<Self> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn snapshot_path(&self, dir: impl AsRef<Path>, entry: &SnapshotEntry) -> PathBuf {
        dir.as_ref().join(&entry.file)
    }
}

struct DirSink<'a> {
    dir: &'a Path,
    manifest: Manifest,
    monitor: Monitor,
    records: Vec<MonitorRecord>,
}

impl DirSink<'_> {
    fn push(&mut self, step: usize, time: f64, psi: &ComplexGrid3) -> Result<()> {
        let file = snapshot_name(step);
        write_grid(psi, self.dir.join(&file))?;
        self.records.push(self.monitor.record(step, time, psi)?);
        self.manifest.snapshots.push(SnapshotEntry { step, time, file });
        let path = self.dir.join(MONITORS_FILE);
        fs::write(&path, monitors_csv(&self.records)).map_err(|e| Error::io(&path, e))?;
        self.manifest.write(self.dir)
    }
}

fn new_manifest(config: &EvolveConfig, constants: &PhysicalConstants) -> Manifest {
    Manifest {
        dt: config.dt,
        steps: config.steps,
        snapshot_stride: config.snapshot_stride,
        nu: config.nu,
        constants: *constants,
        potential: config.potential.describe(),
        monitors: MONITORS_FILE.into(),
        snapshots: Vec::new(),
    }
}

/// Runs an evolution writing `snap_XXXXXX.qvg`, `monitors.csv` and
/// `manifest.json` into `dir`. The manifest is rewritten after every
/// snapshot so an interrupted run can be resumed.
pub fn evolve_to_dir(
    psi0: &ComplexGrid3,
    config: &EvolveConfig,
    constants: &PhysicalConstants,
    dir: impl AsRef<Path>,
) -> Result<Manifest> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut sink = DirSink {
        dir,
        manifest: new_manifest(config, constants),
        monitor: Monitor::new(*psi0.spec(), config, constants)?,
        records: Vec::new(),
    };
    run_from(psi0.clone(), 0, None, config, constants, |s, t, p| sink.push(s, t, p))?;
    Ok(sink.manifest)
}

/// Continues the run recorded in `dir` from its last snapshot up to
/// `config.steps`. `dt`, `ν`, stride and constants must match the manifest.
pub fn resume_in_dir(
    dir: impl AsRef<Path>,
    config: &EvolveConfig,
    constants: &PhysicalConstants,
) -> Result<Manifest> {
    let dir = dir.as_ref();
    let old = Manifest::read(dir)?;
    if old.dt != config.dt
        || old.nu != config.nu
        || old.snapshot_stride != config.snapshot_stride
        || old.constants != *constants
        || old.potential != config.potential.describe()
    {
        return Err(Error::InvalidArgument(
            "resume config does not match the recorded run".into(),
        ));
    }
    let last = old
        .snapshots
        .last()
        .ok_or_else(|| Error::InvalidArgument("no snapshots to resume from".into()))?
        .clone();
    let path = dir.join(&old.monitors);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let records = parse_monitors_csv(&text)?;
    let reference = records
        .first()
        .map(|r| r.norm)
        .ok_or_else(|| Error::InvalidArgument("monitors file has no rows".into()))?;
    let psi = read_grid(dir.join(&last.file))?;
    let mut manifest = old;
    manifest.steps = config.steps;
    let mut sink = DirSink {
        dir,
        monitor: Monitor::new(*psi.spec(), config, constants)?,
        manifest,
        records,
    };
    if last.step >= config.steps {
        sink.manifest.write(dir)?;
        return Ok(sink.manifest);
    }
    run_from(psi, last.step, Some(reference), config, constants, |s, t, p| {
        sink.push(s, t, p)
    })?;
    Ok(sink.manifest)
}

/// Loads every snapshot listed in the manifest of `dir`.
pub fn load_series(dir: impl AsRef<Path>) -> Result<(Manifest, Series)> {
    let dir = dir.as_ref();
    let manifest = Manifest::read(dir)?;
    if manifest.snapshots.is_empty() {
        return Err(Error::InvalidArgument(format!("no snapshots listed in {}", dir.display())));
    }
    let frames = manifest
        .snapshots
        .iter()
        .map(|e| {
            Ok(Frame {
                step: e.step,
                time: e.time,
                psi: read_grid(manifest.snapshot_path(dir, e))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let series = Series {
        dt: manifest.dt,
        nu: manifest.nu,
        frames,
    };
    Ok((manifest, series))
}
