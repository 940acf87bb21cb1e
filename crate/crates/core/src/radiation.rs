//! Radiated-power diagnostics: classical and quantum Larmor, the two-term
//! condensate formula and the nonlinear power
//!
//! ```text
//! P(t) = (2/3)(q²/c³)(ν²−1)² ∫ |∇Q_B/m|² ρ d³x
//! ```
//!
//! All quantities are passive: nothing here modifies a state.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::evolution::Series;
use num_complex::Complex64;

use crate::grid::{integrate_real, ComplexGrid3, RealGrid3, VectorGrid3};
use crate::madelung::{quantum_potential_gradient_psi, NodeMask};
use crate::wavefunction::PhysicalConstants;
use crate::{Error, Result, Vec3};

/// Column header of the power-series CSV.
pub const POWER_CSV_HEADER: &str = "t,P,emitted,mask_fraction";

fn larmor_coefficient(q: f64, c: f64) -> f64 {
    2.0 / 3.0 * q * q / (c * c * c)
}

/// `(2/3)(q²/c³)|a|²`.
pub fn classical_larmor(q: f64, a: &Vec3, c: f64) -> f64 {
    larmor_coefficient(q, c) * a.norm_squared()
}

/// Central differences in the interior and second-order one-sided
/// differences on the faces, so quadratic potentials are differentiated
/// exactly. Suited to non-periodic `U`.
pub fn finite_difference_gradient(u: &RealGrid3) -> Result<VectorGrid3> {
    u.check_finite()?;
    let spec = *u.spec();
    if spec.dims.iter().any(|&n| n < 3) {
        return Err(Error::InvalidArgument("finite differences need at least 3 points per axis".into()));
    }
    let v = u.values();
    let mut out = VectorGrid3::zeros(spec);
    for axis in 0..3 {
        let n = spec.dims[axis];
        let h = spec.spacing[axis];
        let comp = out.component_mut(axis);
        for (idx, slot) in comp.iter_mut().enumerate() {
            let mut c = spec.coords(idx);
            let i = c[axis];
            let mut at = |k: usize| {
                c[axis] = k;
                v[spec.index(c[0], c[1], c[2])]
            };
            *slot = if i == 0 {
                (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
            } else {
                (at(i + 1) - at(i - 1)) / (2.0 * h)
            };
        }
    }
    Ok(out)
}

/// `⟨a⟩`, `⟨|a|²⟩` and `⟨|a|⟩` of an acceleration field under `ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccelerationMoments {
    pub mean: Vec3,
    pub mean_square: f64,
    pub mean_magnitude: f64,
    pub mask_fraction: f64,
}

fn moments(rho: &RealGrid3, accel: &VectorGrid3, mask: Option<&NodeMask>) -> Result<AccelerationMoments> {
    if rho.spec() != accel.spec() {
        return Err(Error::GridMismatch);
    }
    let spec = *rho.spec();
    let weighted = |f: &dyn Fn(Vec3) -> f64| -> Result<f64> {
        let g = RealGrid3::from_values(
            spec,
            (0..spec.len())
                .map(|i| if mask.is_some_and(|m| m.masked[i]) { 0.0 } else { rho.values()[i] * f(accel.at(i)) })
                .collect(),
        )?;
        integrate_real(&g)
    };
    Ok(AccelerationMoments {
        mean: Vec3::new(weighted(&|a| a.x)?, weighted(&|a| a.y)?, weighted(&|a| a.z)?),
        mean_square: weighted(&|a| a.norm_squared())?,
        mean_magnitude: weighted(&|a| a.norm())?,
        mask_fraction: mask.map_or(0.0, |m| m.fraction),
    })
}

fn check_density(rho: &RealGrid3) -> Result<()> {
    rho.check_finite()?;
    if rho.values().iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument("density must be non-negative".into()));
    }
    let total = integrate_real(rho)?;
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!("density must be normalized, ∫ρ = {total}")));
    }
    Ok(())
}

/// Moments of `a = −∇U/m` under a normalized `ρ`.
pub fn potential_acceleration(rho: &RealGrid3, u: &RealGrid3, constants: &PhysicalConstants) -> Result<AccelerationMoments> {
    constants.validate()?;
    check_density(rho)?;
    if rho.spec() != u.spec() {
        return Err(Error::GridMismatch);
    }
    let mut a = finite_difference_gradient(u)?;
    let s = -1.0 / constants.mass;
    for axis in 0..3 {
        a.component_mut(axis).iter_mut().for_each(|v| *v *= s);
    }
    moments(rho, &a, None)
}

/// `(2/3)(q²/c³) ∫ ρ |∇U/m|² d³x`.
pub fn quantum_larmor(rho: &RealGrid3, u: &RealGrid3, constants: &PhysicalConstants) -> Result<f64> {
    let m = potential_acceleration(rho, u, constants)?;
    Ok(larmor_coefficient(constants.charge, constants.c) * m.mean_square)
}

/// Moments of the Bohm acceleration `a = −∇Q_B/m` under `ρ = R²`, with
/// node-masked points excluded.
pub fn bohm_acceleration(r: &RealGrid3, constants: &PhysicalConstants) -> Result<AccelerationMoments> {
    bohm_acceleration_psi(&r.map(|v| Complex64::new(v, 0.0)), constants)
}

/// As [`bohm_acceleration`] with `R = |ψ|`, differentiating the smooth `ψ`
/// rather than `R`.
pub fn bohm_acceleration_psi(psi: &ComplexGrid3, constants: &PhysicalConstants) -> Result<AccelerationMoments> {
    constants.validate()?;
    let (mut grad, mask) = quantum_potential_gradient_psi(psi, constants)?;
    mask.check()?;
    let s = -1.0 / constants.mass;
    for axis in 0..3 {
        grad.component_mut(axis).iter_mut().for_each(|v| *v *= s);
    }
    let rho = psi.map(|z| z.norm_sqr());
    moments(&rho, &grad, Some(&mask))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSample {
    pub power: f64,
    pub mask_fraction: f64,
}

fn power_from(moments: impl FnOnce() -> Result<AccelerationMoments>, nu: f64, constants: &PhysicalConstants) -> Result<PowerSample> {
    if !nu.is_finite() || nu == 0.0 {
        return Err(Error::InvalidArgument(format!("nu must be finite and nonzero, got {nu}")));
    }
    let k = nu * nu - 1.0;
    let coefficient = larmor_coefficient(constants.charge, constants.c) * k * k;
    let m = moments()?;
    Ok(PowerSample {
        power: if coefficient == 0.0 { 0.0 } else { coefficient * m.mean_square },
        mask_fraction: m.mask_fraction,
    })
}

/// Nonlinear power of the amplitude `R` (with `ρ = R²`). The coefficient
/// `(ν²−1)²` makes the result exactly zero at `ν² = 1`.
pub fn nonlinear_power(r: &RealGrid3, nu: f64, constants: &PhysicalConstants) -> Result<PowerSample> {
    power_from(|| bohm_acceleration(r, constants), nu, constants)
}

/// Nonlinear power of `R = |ψ_ν|`.
pub fn nonlinear_power_psi(psi: &ComplexGrid3, nu: f64, constants: &PhysicalConstants) -> Result<PowerSample> {
    power_from(|| bohm_acceleration_psi(psi, constants), nu, constants)
}

/// `N²(2/3)(q²/c³)|⟨a⟩|² + N(2/3)(q²/c³)⟨|a|²⟩`.
pub fn bec_power(mean_a: &Vec3, mean_a2: f64, n: f64, q: f64, c: f64) -> Result<f64> {
    if !(n >= 1.0 && n.is_finite()) {
        return Err(Error::InvalidArgument(format!("particle number must be at least 1, got {n}")));
    }
    let k = larmor_coefficient(q, c);
    Ok(n * n * k * mean_a.norm_squared() + n * k * mean_a2)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerSeries {
    pub times: Vec<f64>,
    pub power: Vec<f64>,
    /// Cumulative trapezoidal integral of `power`.
    pub emitted: Vec<f64>,
    pub mask_fraction: Vec<f64>,
}

impl PowerSeries {
    pub fn from_samples(times: Vec<f64>, samples: &[PowerSample]) -> Result<Self> {
        if times.len() != samples.len() {
            return Err(Error::InvalidArgument("times and samples differ in length".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("times must be strictly increasing".into()));
        }
        let power: Vec<f64> = samples.iter().map(|s| s.power).collect();
        let mut emitted = Vec::with_capacity(power.len());
        let mut acc = 0.0;
        for i in 0..power.len() {
            if i > 0 {
                acc += 0.5 * (power[i] + power[i - 1]) * (times[i] - times[i - 1]);
            }
            emitted.push(acc);
        }
        Ok(PowerSeries {
            times,
            power,
            emitted,
            mask_fraction: samples.iter().map(|s| s.mask_fraction).collect(),
        })
    }

    /// Total emitted energy (0 for an empty series).
    pub fn total(&self) -> f64 {
        self.emitted.last().copied().unwrap_or(0.0)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(POWER_CSV_HEADER);
        s.push('\n');
        for i in 0..self.times.len() {
            s.push_str(&format!(
                "{},{},{},{}\n",
                self.times[i], self.power[i], self.emitted[i], self.mask_fraction[i]
            ));
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(POWER_CSV_HEADER) {
            return Err(Error::InvalidArgument("power CSV header mismatch".into()));
        }
        let mut out = PowerSeries::default();
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
            let cols: Vec<f64> = line
                .split(',')
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidArgument(format!("power CSV row {}: {e}", n + 1)))?;
            if cols.len() != 4 {
                return Err(Error::InvalidArgument(format!("power CSV row {} has {} columns", n + 1, cols.len())));
            }
            out.times.push(cols[0]);
            out.power.push(cols[1]);
            out.emitted.push(cols[2]);
            out.mask_fraction.push(cols[3]);
        }
        Ok(out)
    }
}

/// Nonlinear power of every frame of an evolved `ψ_ν` series.
pub fn power_series(series: &Series, constants: &PhysicalConstants) -> Result<PowerSeries> {
    let samples = series
        .frames
        .par_iter()
        .map(|f| nonlinear_power_psi(&f.psi, series.nu, constants))
        .collect::<Result<Vec<_>>>()?;
    PowerSeries::from_samples(series.frames.iter().map(|f| f.time).collect(), &samples)
}

/// Energy radiated over the whole series.
pub fn ab_energy_loss(series: &Series, constants: &PhysicalConstants) -> Result<f64> {
    Ok(power_series(series, constants)?.total())
}
