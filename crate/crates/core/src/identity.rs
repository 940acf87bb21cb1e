//! Residual checks of the ν identity
//!
//! ```text
//! [−ħ²/2m Δ + V] R e^{iS/ħ} = iħ ∂_t(R e^{iS/ħ})
//! [−(νħ)²/2m Δ + V + (ħ²/2m)(ν²−1) ΔR/R] R e^{iS/(νħ)} = iνħ ∂_t(R e^{iS/(νħ)})
//! ```
//!
//! and of its minimally coupled form, plus the solenoid fields and states
//! used for the Aharonov-Bohm setup.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::evolution::Potential;
use crate::grid::{ComplexGrid3, GridSpec, RealGrid3, Spectral, VectorGrid3};
use crate::madelung::NodeMask;
use crate::wavefunction::{quantization_check, select_nu, PhysicalConstants, QuantizationReport};
use crate::{Error, Result, Vec3};

/// Relative spectral divergence above which a vector potential is refused.
pub const GAUGE_TOLERANCE: f64 = 1e-8;

/// Amplitude `R` and phase `S/ħ` at `t − dt`, `t`, `t + dt`.
#[derive(Clone, Debug)]
pub struct TimeSlices {
    pub amplitude: [RealGrid3; 3],
    pub phase: [RealGrid3; 3],
    pub dt: f64,
}

impl TimeSlices {
    pub fn new(amplitude: [RealGrid3; 3], phase: [RealGrid3; 3], dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        let spec = amplitude[0].spec();
        if amplitude.iter().chain(phase.iter()).any(|g| g.spec() != spec) {
            return Err(Error::GridMismatch);
        }
        for g in amplitude.iter().chain(phase.iter()) {
            g.check_finite()?;
        }
        Ok(TimeSlices { amplitude, phase, dt })
    }

    /// Samples `f(x, t) = (R, S/ħ)` around `t`.
    pub fn from_fn(spec: GridSpec, t: f64, dt: f64, f: impl Fn(&Vec3, f64) -> (f64, f64) + Sync) -> Result<Self> {
        let slice = |s: f64| {
            (
                RealGrid3::from_fn(spec, |x| f(&x, s).0),
                RealGrid3::from_fn(spec, |x| f(&x, s).1),
            )
        };
        let (r0, p0) = slice(t - dt);
        let (r1, p1) = slice(t);
        let (r2, p2) = slice(t + dt);
        Self::new([r0, r1, r2], [p0, p1, p2], dt)
    }

    pub fn spec(&self) -> &GridSpec {
        self.amplitude[0].spec()
    }

    fn psi(&self, slice: usize, nu: f64) -> ComplexGrid3 {
        self.amplitude[slice]
            .zip_map(&self.phase[slice], |r, s| Complex64::from_polar(r, s / nu))
            .expect("slices share a grid")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub nu: f64,
    pub res1: f64,
    pub res2: f64,
    pub mask_fraction: f64,
}

/// How the bracket `[(−iνħ∇+qA)² − (−iħ∇+qA)²]R / R` enters the
/// transformed equation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketMode {
    /// Real part only: `−(ν²−1)ħ² ΔR/R`. Keeps the continuity equation
    /// intact for any transverse `A`.
    #[default]
    RealPart,
    /// The full complex bracket, including `−2i(ν−1)ħq A·∇R/R`. Agrees
    /// with `RealPart` only where `A·∇R = 0`.
    Literal,
}

struct Equation<'a> {
    hbar_eff: f64,
    nu: f64,
    potential: Option<&'a [f64]>,
    field: Option<&'a VectorGrid3>,
    bracket: BracketMode,
}

/// `‖LHS − RHS‖₂ / ‖RHS‖₂` over unmasked points.
fn residual(
    sp: &Spectral,
    slices: &TimeSlices,
    eq: &Equation<'_>,
    mask: &NodeMask,
    g_over_r: &[f64],
    grad_r_over_r: &[Vec3],
    constants: &PhysicalConstants,
) -> Result<f64> {
    let nu = eq.nu;
    let psi = slices.psi(1, nu);
    let before = slices.psi(0, nu);
    let after = slices.psi(2, nu);
    let lap = sp.laplacian(&psi)?;
    let grad = match eq.field {
        Some(_) => Some(sp.gradient(&psi)?),
        None => None,
    };
    let (hbar, m, q) = (constants.hbar, constants.mass, constants.charge);
    let kin = -eq.hbar_eff * eq.hbar_eff / (2.0 * m);
    let w = (nu * nu - 1.0) * hbar * hbar / (2.0 * m);
    let (mut num, mut den) = (0.0, 0.0);
    for idx in 0..psi.spec().len() {
        if mask.masked[idx] {
            continue;
        }
        let p = psi.values()[idx];
        let mut lhs = lap.values()[idx] * kin;
        if let Some(v) = eq.potential {
            lhs += p * v[idx];
        }
        if w != 0.0 {
            lhs += p * (w * g_over_r[idx]);
        }
        if let (Some(a), Some(grad)) = (eq.field, &grad) {
            let a = a.at(idx);
            let a_grad = a.x * grad[0].values()[idx] + a.y * grad[1].values()[idx] + a.z * grad[2].values()[idx];
            lhs += (Complex64::new(0.0, -2.0 * eq.hbar_eff * q) * a_grad + p * (q * q * a.norm_squared())) / (2.0 * m);
            if eq.bracket == BracketMode::Literal {
                let c = (nu - 1.0) * hbar * q / m * a.dot(&grad_r_over_r[idx]);
                lhs += p * Complex64::new(0.0, c);
            }
        }
        let dpsi = (after.values()[idx] - before.values()[idx]) / (2.0 * slices.dt);
        let rhs = Complex64::new(0.0, eq.hbar_eff) * dpsi;
        num += (lhs - rhs).norm_sqr();
        den += rhs.norm_sqr();
    }
    if den == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((num / den).sqrt())
}

fn residual_pair(
    slices: &TimeSlices,
    potential: &Potential,
    field: Option<&VectorGrid3>,
    bracket: BracketMode,
    nu: f64,
    constants: &PhysicalConstants,
) -> Result<ResidualReport> {
    constants.validate()?;
    if nu == 0.0 || !nu.is_finite() {
        return Err(Error::InvalidArgument(format!("nu must be finite and nonzero, got {nu}")));
    }
    let spec = *slices.spec();
    let sp = Spectral::new(spec);
    let r = &slices.amplitude[1];
    let mask = NodeMask::from_amplitude(r);
    mask.check()?;
    let lap_r = sp.real_laplacian(r)?;
    let grad_r = sp.real_gradient(r)?;
    let g_over_r: Vec<f64> = (0..spec.len())
        .map(|i| if mask.masked[i] { 0.0 } else { lap_r.values()[i] / r.values()[i] })
        .collect();
    let grad_r_over_r: Vec<Vec3> = (0..spec.len())
        .map(|i| if mask.masked[i] { Vec3::zeros() } else { grad_r.at(i) / r.values()[i] })
        .collect();
    let v = potential.values(&spec, constants)?;
    let original = Equation {
        hbar_eff: constants.hbar,
        nu: 1.0,
        potential: v.as_deref(),
        field,
        bracket,
    };
    let transformed = Equation {
        hbar_eff: nu * constants.hbar,
        nu,
        ..original
    };
    let res1 = residual(&sp, slices, &original, &mask, &g_over_r, &grad_r_over_r, constants)?;
    let res2 = residual(&sp, slices, &transformed, &mask, &g_over_r, &grad_r_over_r, constants)?;
    Ok(ResidualReport {
        nu,
        res1,
        res2,
        mask_fraction: mask.fraction,
    })
}

/// Residuals of the original equation on `R e^{iS/ħ}` (`res1`) and of the
/// transformed equation on `R e^{iS/(νħ)}` (`res2`) at the middle slice.
pub fn identity_residual(
    slices: &TimeSlices,
    potential: &Potential,
    nu: f64,
    constants: &PhysicalConstants,
) -> Result<ResidualReport> {
    residual_pair(slices, potential, None, BracketMode::RealPart, nu, constants)
}

/// Spectral divergence `‖∇·A‖₂` relative to `‖∇A‖₂ + (2π/L)‖A‖₂`, with
/// `L` the largest box edge (0 for `A = 0`).
pub fn relative_divergence(a: &VectorGrid3) -> Result<f64> {
    let spec = *a.spec();
    let sp = Spectral::new(spec);
    let div = sp.divergence(a)?;
    let mut jac = 0.0;
    for axis in 0..3 {
        let comp = RealGrid3::from_values(spec, a.component(axis).to_vec())?;
        let g = sp.real_gradient(&comp)?;
        jac += (0..3).map(|b| g.component(b).iter().map(|v| v * v).sum::<f64>()).sum::<f64>();
    }
    let size: f64 = (0..3).map(|c| a.component(c).iter().map(|v| v * v).sum::<f64>()).sum();
    let k = 2.0 * PI / spec.extent().into_iter().fold(0.0, f64::max);
    let scale = jac.sqrt() + k * size.sqrt();
    let num = div.values().iter().map(|v| v * v).sum::<f64>().sqrt();
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(num / scale)
}

/// Residuals of the minimally coupled pair
///
/// ```text
/// [(1/2m)(−iħ∇+qA)² + V] ψ = iħ ∂_t ψ
/// [(1/2m)(−iνħ∇+qA)² + V − (1/2m)[(−iνħ∇+qA)² − (−iħ∇+qA)²]R/R] ψ_ν = iνħ ∂_t ψ_ν
/// ```
///
/// `A` must be transverse; `q` is `constants.charge` and any `1/c` is
/// absorbed into `A`.
pub fn identity_residual_em(
    slices: &TimeSlices,
    potential: &Potential,
    a: &VectorGrid3,
    bracket: BracketMode,
    nu: f64,
    constants: &PhysicalConstants,
) -> Result<ResidualReport> {
    if a.spec() != slices.spec() {
        return Err(Error::GridMismatch);
    }
    a.check_finite()?;
    let divergence = relative_divergence(a)?;
    if divergence > GAUGE_TOLERANCE {
        return Err(Error::GaugeViolation { divergence });
    }
    residual_pair(slices, potential, Some(a), bracket, nu, constants)
}

/// Ideal infinite solenoid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolenoidSpec {
    pub point: [f64; 3],
    pub direction: [f64; 3],
    pub radius: f64,
    pub flux: f64,
}

impl SolenoidSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("solenoid radius must be positive, got {}", self.radius)));
        }
        if !self.flux.is_finite() || self.point.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("solenoid point and flux must be finite".into()));
        }
        let d = Vec3::from(self.direction);
        if !(d.norm() > 0.0 && d.norm().is_finite()) {
            return Err(Error::InvalidArgument("solenoid direction must be nonzero".into()));
        }
        Ok(())
    }

    pub fn axis(&self) -> Vec3 {
        Vec3::from(self.direction).normalize()
    }

    /// Vector from the axis to `x`, perpendicular to the axis.
    pub fn radial(&self, x: &Vec3) -> Vec3 {
        let d = x - Vec3::from(self.point);
        let n = self.axis();
        d - n * n.dot(&d)
    }

    /// Azimuthal angle of `x` about the axis in `(−π, π]`, measured from a
    /// fixed reference direction perpendicular to the axis.
    pub fn azimuth(&self, x: &Vec3) -> f64 {
        let n = self.axis();
        let (e1, e2, _) = crate::knot::plane_basis(&n).expect("axis is nonzero");
        let r = self.radial(x);
        r.dot(&e2).atan2(r.dot(&e1))
    }
}

/// `A_φ = F/(2πρ)` outside the radius, `Fρ/(2πa²)` inside.
pub fn solenoid_vector_potential(s: &SolenoidSpec, x: &Vec3) -> Vec3 {
    let r = s.radial(x);
    let rho = r.norm();
    if rho == 0.0 {
        return Vec3::zeros();
    }
    let phi_hat = s.axis().cross(&r) / rho;
    let a = s.radius;
    let mag = if rho >= a {
        s.flux / (2.0 * PI * rho)
    } else {
        s.flux * rho / (2.0 * PI * a * a)
    };
    phi_hat * mag
}

/// Grid vector potential of a solenoid whose axis is parallel to a grid
/// axis. The core carries `B = F e^{−ρ²/a²}/(πa²)` along the axis and the
/// return flux sits in a Gaussian ring of radius `ring[0]` and width
/// `ring[1]`, scaled so the net flux through the cell is zero. Inside the
/// ring `A_φ = F(1 − e^{−ρ²/a²})/(2πρ)`; outside it `A` vanishes, so the
/// periodic field is free of image contributions. `A = ∇χ × ê` with
/// `−Δχ = B` solved spectrally, hence transverse to roundoff.
pub fn solenoid_grid(s: &SolenoidSpec, spec: GridSpec, ring: [f64; 2]) -> Result<VectorGrid3> {
    s.validate()?;
    let n = s.axis();
    let axis = (0..3)
        .find(|&a| (n[a].abs() - 1.0).abs() < 1e-12)
        .ok_or_else(|| Error::InvalidArgument("grid solenoid axis must be parallel to a grid axis".into()))?;
    let [radius, width] = ring;
    if !(width > 0.0 && radius - 4.0 * width > s.radius) {
        return Err(Error::InvalidArgument("return ring must lie well outside the core".into()));
    }
    let (lo, hi) = spec.bounds();
    let p = Vec3::from(s.point);
    let reach = radius + 4.0 * width;
    for a in (0..3).filter(|&a| a != axis) {
        if p[a] - reach < lo[a] || p[a] + reach > hi[a] {
            return Err(Error::InvalidArgument("return ring does not fit in the grid box".into()));
        }
    }
    let sign = n[axis].signum();
    let a2 = s.radius * s.radius;
    let core = RealGrid3::from_fn(spec, |x| (-s.radial(&x).norm_squared() / a2).exp());
    let shell = RealGrid3::from_fn(spec, |x| {
        let d = (s.radial(&x).norm() - radius) / width;
        (-d * d).exp()
    });
    let core_flux: f64 = core.values().iter().sum();
    let shell_flux: f64 = shell.values().iter().sum();
    let scale = sign * s.flux / (PI * a2);
    let b = core
        .zip_map(&shell, |c, r| scale * (c - r * core_flux / shell_flux))
        .expect("same grid");
    let sp = Spectral::new(spec);
    let spectrum = sp.spectrum_real(b.values());
    let chi: Vec<f64> = sp
        .apply(&spectrum, |i, j, k| {
            let k2 = sp.k_squared(i, j, k);
            Complex64::new(if k2 > 0.0 { 1.0 / k2 } else { 0.0 }, 0.0)
        })
        .into_iter()
        .map(|v| v.re)
        .collect();
    let g = sp.real_gradient(&RealGrid3::from_values(spec, chi)?)?;
    // A = ∇χ × ê_axis
    let mut out = VectorGrid3::zeros(spec);
    let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
    out.component_mut(b).copy_from_slice(g.component(c));
    let neg: Vec<f64> = g.component(b).iter().map(|v| -v).collect();
    out.component_mut(c).copy_from_slice(&neg);
    Ok(out)
}

/// Which phase convention converts flux to circulation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbConvention {
    /// Phase `qF/ħ`.
    #[default]
    Natural,
    /// Phase `qF/(ħc)`.
    Gaussian,
}

/// `Γ_eff = qF/(m·c_factor)` from `e^{iqF/(ħ·c_factor)} = e^{imΓ/ħ}`.
pub fn ab_effective_vorticity(s: &SolenoidSpec, constants: &PhysicalConstants, convention: AbConvention) -> f64 {
    let c_factor = match convention {
        AbConvention::Natural => 1.0,
        AbConvention::Gaussian => constants.c,
    };
    constants.charge * s.flux / (constants.mass * c_factor)
}

/// Single-valued state `ψ_ν` for a packet near a solenoid.
#[derive(Clone, Debug)]
pub struct AbState {
    /// `R e^{iS/ħ}` on the reference sheet (cut at `θ = π`).
    pub psi: ComplexGrid3,
    pub psi_nu: ComplexGrid3,
    pub gamma: f64,
    pub nu: f64,
    pub m_index: u32,
    pub quantization: QuantizationReport,
}

/// Packet `R = G(x)·(ρ²/(ρ²+a²))^{n/2}` with Gaussian envelope `G` of
/// width `width` about `center`, vanishing to order `n` on the solenoid
/// axis, and phase `S/ħ = (mΓ_eff/ħ)·θ/2π + k·x`. Returns
/// `R e^{iS/(νħ)}` with `ν = mΓ_eff/2πMħ`, or the linear state with `ν = 1`
/// when the flux is zero.
#[allow(clippy::too_many_arguments)]
pub fn ab_state(
    s: &SolenoidSpec,
    spec: GridSpec,
    center: Vec3,
    width: f64,
    momentum: Vec3,
    n: u32,
    m_index: u32,
    constants: &PhysicalConstants,
    convention: AbConvention,
) -> Result<AbState> {
    s.validate()?;
    constants.validate()?;
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidArgument(format!("envelope width must be positive, got {width}")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("nodal order n must be at least 2, got {n}")));
    }
    let gamma = ab_effective_vorticity(s, constants, convention);
    let nu = if gamma == 0.0 { 1.0 } else { select_nu(gamma, constants, m_index)?.nu };
    let winding = constants.mass * gamma / constants.hbar / (2.0 * PI);
    let a2 = s.radius * s.radius;
    let sample = |scale: f64| {
        ComplexGrid3::from_fn(spec, |x| {
            let rho2 = s.radial(&x).norm_squared();
            let r = (-(x - center).norm_squared() / (2.0 * width * width)).exp()
                * (rho2 / (rho2 + a2)).powf(0.5 * n as f64);
            let phase = winding * s.azimuth(&x) + momentum.dot(&x);
            Complex64::from_polar(r, phase / scale)
        })
    };
    let mut psi = sample(1.0);
    let mut psi_nu = sample(nu);
    if psi.normalize() == 0.0 || psi_nu.normalize() == 0.0 {
        return Err(Error::InvalidArgument("packet vanishes on the grid".into()));
    }
    Ok(AbState {
        psi,
        psi_nu,
        gamma,
        nu,
        m_index,
        quantization: quantization_check(gamma, constants),
    })
}
