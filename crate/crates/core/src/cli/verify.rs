//! Self-contained invariant suite run by `qvortex verify`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{FreeGaussian, HarmonicOscillator};
use crate::evolution::{evolve_linear, evolve_nonlinear, EvolveConfig, Potential};
use crate::grid::{integrate_real, read_grid, write_grid, ComplexGrid3, GridSpec};
use crate::identity::{
    ab_effective_vorticity, identity_residual, relative_divergence, solenoid_grid, AbConvention, SolenoidSpec,
    TimeSlices, GAUGE_TOLERANCE,
};
use crate::kernels::{biot_savart_velocity, circulation, scalar_potential, KernelConfig, ProbeLoop};
use crate::knot::{circle_curve, disk_mesh, line_filament, trefoil_curve, Link, SeifertMesh};
use crate::radiation::{classical_larmor, nonlinear_power_psi};
use crate::wavefunction::{build_initial_state, quantization_check, EnvelopeSpec, PhysicalConstants, StateSpec};
use crate::{Error, Result, Vec3};

use super::commands::write_json;
use super::{CliError, Invocation};

pub const VERIFY_FILE: &str = "verify.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured error or statistic.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub grid_n: usize,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn below(name: &str, value: f64, tolerance: f64, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed: value.is_finite() && value < tolerance,
        value,
        tolerance,
        detail: detail.into(),
    }
}

fn failed(name: &str, err: impl std::fmt::Display) -> Check {
    Check {
        name: name.into(),
        passed: false,
        value: f64::NAN,
        tolerance: f64::NAN,
        detail: format!("error: {err}"),
    }
}

fn unit_ring(samples: usize, gamma: f64) -> Result<(Link, SeifertMesh)> {
    let curve = circle_curve(1.0, Vec3::zeros(), Vec3::z(), samples)?;
    let mesh = disk_mesh(&curve, 4)?;
    Ok((Link::single(curve, gamma)?, mesh))
}

/// Random point at least `margin` away from the unit ring and its disk.
fn off_surface_point(rng: &mut ChaCha8Rng, margin: f64) -> Vec3 {
    loop {
        let x = Vec3::new(rng.random_range(-1.6..1.6), rng.random_range(-1.6..1.6), rng.random_range(-1.0..1.0));
        let rho = x.x.hypot(x.y);
        let to_ring = (rho - 1.0).hypot(x.z);
        let to_disk = if rho < 1.0 { x.z.abs() } else { to_ring };
        if to_ring > margin && to_disk > margin {
            return x;
        }
    }
}

fn check_circulation(rng: &mut ChaCha8Rng) -> Result<Check> {
    let cfg = KernelConfig::default();
    let gamma = 2.0 * PI;
    let (ring, _) = unit_ring(256, gamma)?;
    let trefoil = Link::single(trefoil_curve(1024)?, gamma)?;
    let line = Link::single(line_filament(Vec3::z(), Vec3::zeros(), 1000.0, 801)?, gamma)?;
    let mut worst: f64 = 0.0;
    for link in [&ring, &trefoil, &line] {
        let curve = &link.curves[0];
        for _ in 0..3 {
            let n = curve.segment_count();
            let i = rng.random_range(n / 4..3 * n / 4);
            let (a, b) = curve.segment(i);
            let probe = ProbeLoop::circle((a + b) * 0.5, b - a, rng.random_range(0.2..0.3), 128)?;
            let g = circulation(link, &probe, &cfg)?;
            worst = worst.max((g.abs() - gamma).abs() / gamma);
        }
    }
    Ok(below(
        "circulation",
        worst,
        1e-3,
        "relative error of the loop integral of v around filament segments",
    ))
}

fn check_potential_gradient(rng: &mut ChaCha8Rng) -> Result<Check> {
    let (link, mesh) = unit_ring(256, 2.0 * PI)?;
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let x = off_surface_point(rng, 0.25);
        let mut grad = Vec3::zeros();
        for ax in 0..3 {
            let mut e = Vec3::zeros();
            e[ax] = h;
            let f = |s: f64| scalar_potential(&link, &mesh, &(x + e * s));
            grad[ax] = (8.0 * (f(1.0)? - f(-1.0)?) - (f(2.0)? - f(-2.0)?)) / (12.0 * h);
        }
        let u = biot_savart_velocity(&link, &x, &KernelConfig::default())?;
        worst = worst.max((grad - u).norm() / u.norm());
    }
    Ok(below(
        "potential_gradient",
        worst,
        1e-5,
        "relative difference of grad(phi) and the Biot-Savart velocity",
    ))
}

fn check_cut_jump(rng: &mut ChaCha8Rng) -> Result<Check> {
    let gamma = 2.0 * PI;
    let (link, mesh) = unit_ring(256, gamma)?;
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let r = rng.random_range(0.0..0.7);
        let t = rng.random_range(0.0..2.0 * PI);
        let p = Vec3::new(r * t.cos(), r * t.sin(), 0.0);
        let d = 1e-7 * Vec3::z();
        let jump = scalar_potential(&link, &mesh, &(p + d))? - scalar_potential(&link, &mesh, &(p - d))?;
        worst = worst.max((jump.abs() - gamma).abs() / gamma);
    }
    Ok(below("cut_jump", worst, 1e-5, "relative error of the potential jump across the disk"))
}

fn check_quantization(rng: &mut ChaCha8Rng) -> Check {
    let c = PhysicalConstants::default();
    let mut bad = 0usize;
    for _ in 0..16 {
        let k = rng.random_range(-5i64..=5);
        let frac = rng.random_range(0.01..0.99);
        let on = quantization_check(2.0 * PI * k as f64, &c);
        let off = quantization_check(2.0 * PI * (k as f64 + frac), &c);
        if !on.single_valued || on.k_nearest != k || off.single_valued {
            bad += 1;
        }
    }
    below(
        "quantization_gate",
        bad as f64,
        0.5,
        "misclassified circulations among integer and fractional quanta",
    )
}

fn check_nodal(n_grid: usize) -> Result<Check> {
    let spec = GridSpec::centered(n_grid, 3.0)?;
    let (link, mesh) = unit_ring(128, 2.0 * PI)?;
    let mut worst: f64 = 0.0;
    for n in [2, 3] {
        let state_spec = StateSpec::new(spec, EnvelopeSpec { center: None, width: 0.8 }, n);
        let s = build_initial_state(&state_spec, &link, Some(&mesh), &PhysicalConstants::default())?;
        worst = worst.max(s.nodal_ratio()?);
    }
    Ok(below("nodal_lines", worst, 1e-8, "max |psi| on the filament over max |psi|, n = 2, 3"))
}

fn check_mesh_orientation(inject_fault: bool) -> Result<Check> {
    let (_, mut mesh) = unit_ring(64, 2.0 * PI)?;
    if inject_fault {
        mesh.flip_triangle(0);
    }
    let (value, detail) = match mesh.check_orientation() {
        Ok(()) => (0.0, "consistently oriented".to_string()),
        Err(e) => (1.0, e.to_string()),
    };
    Ok(below("mesh_orientation", value, 0.5, detail))
}

fn check_identity() -> Result<Check> {
    let c = PhysicalConstants::default();
    let spec = GridSpec::centered(32, 9.0)?;
    let g = FreeGaussian {
        k0: Vec3::new(0.4, 0.0, -0.2),
        ..FreeGaussian::at_rest(1.2, Vec3::zeros(), c.hbar, c.mass)
    };
    let slices = TimeSlices::from_fn(spec, 0.5, 1e-4, |x, t| (g.amplitude(x, t), g.phase(x, t)))?;
    let mut worst: f64 = 0.0;
    for nu in [0.5, 1.5, 2.0] {
        worst = worst.max(identity_residual(&slices, &Potential::Free, nu, &c)?.res2);
    }
    let ho = HarmonicOscillator {
        omega: 1.0,
        center: Vec3::zeros(),
        hbar: c.hbar,
        mass: c.mass,
    };
    let spec = GridSpec::centered(32, 6.0)?;
    let slices = TimeSlices::from_fn(spec, 0.3, 2e-5, |x, t| (ho.ground_amplitude(x), ho.ground_phase(t)))?;
    let pot = Potential::Harmonic {
        omega: ho.omega,
        center: ho.center,
    };
    for nu in [0.5, 2.0] {
        worst = worst.max(identity_residual(&slices, &pot, nu, &c)?.res2);
    }
    Ok(below(
        "nu_identity",
        worst,
        1e-4,
        "residual of the nu-transformed equation on exact linear solutions",
    ))
}

fn width(psi: &ComplexGrid3, axis: usize) -> Result<f64> {
    let rho = psi.map(|z| z.norm_sqr());
    let spec = *psi.spec();
    let w = |f: &(dyn Fn(f64) -> f64 + Sync)| {
        let g = crate::grid::RealGrid3::from_fn(spec, |x| f(x[axis]));
        integrate_real(&rho.zip_map(&g, |a, b| a * b)?)
    };
    let n = integrate_real(&rho)?;
    let m1 = w(&|x| x)? / n;
    let m2 = w(&|x| x * x)? / n;
    Ok((m2 - m1 * m1).sqrt())
}

fn check_width_law() -> Result<Check> {
    let c = PhysicalConstants::default();
    let spec = GridSpec::centered(32, 12.0)?;
    let g = FreeGaussian::at_rest(1.0, Vec3::zeros(), c.hbar, c.mass);
    let cfg = EvolveConfig::new(0.05, 40).with_stride(40);
    let series = evolve_linear(&g.grid(spec, 0.0), &cfg, &c)?;
    let last = series.frames.last().ok_or_else(|| Error::InvalidArgument("no frames".into()))?;
    let err = (width(&last.psi, 0)? - g.width(last.time)).abs() / g.width(last.time);
    Ok(below("width_law", err, 1e-6, "relative error of the spread width against the exact law"))
}

fn check_nonlinear_norm() -> Result<Check> {
    let c = PhysicalConstants::default();
    let spec = GridSpec::centered(32, 12.0)?;
    let g = FreeGaussian::at_rest(1.0, Vec3::zeros(), c.hbar, c.mass);
    let (r, s) = g.rs_grids(spec, 0.0);
    let psi0 = crate::evolution::psi_nu_from_rs(&r, &s, 0.5)?;
    let cfg = EvolveConfig::new(0.01, 40).with_nu(0.5).with_stride(40);
    let series = evolve_nonlinear(&psi0, &cfg, &c)?;
    let n0 = psi0.norm_sqr();
    let n1 = series.frames.last().map(|f| f.psi.norm_sqr()).unwrap_or(f64::NAN);
    Ok(below("nonlinear_norm", (n1 - n0).abs() / n0, 1e-10, "norm drift of the nu = 0.5 evolution"))
}

fn check_strang_order() -> Result<Check> {
    let c = PhysicalConstants::default();
    let ho = HarmonicOscillator {
        omega: 1.0,
        center: Vec3::zeros(),
        hbar: c.hbar,
        mass: c.mass,
    };
    let spec = GridSpec::centered(32, 8.0)?;
    let (d0, p0) = (Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 0.5, 0.0));
    let t = 1.0;
    let psi0 = ho.coherent_grid(spec, d0, p0, 0.0);
    let exact = ho.coherent_grid(spec, d0, p0, t);
    let pot = Potential::Harmonic {
        omega: ho.omega,
        center: ho.center,
    };
    let mut errs = Vec::new();
    for steps in [40, 80, 160] {
        let cfg = EvolveConfig::new(t / steps as f64, steps)
            .with_potential(pot.clone())
            .with_stride(steps);
        let series = evolve_linear(&psi0, &cfg, &c)?;
        let psi = &series.frames.last().ok_or_else(|| Error::InvalidArgument("no frames".into()))?.psi;
        let diff = psi.zip_map(&exact, |a, b| a - b)?;
        errs.push(diff.norm_sqr().sqrt());
    }
    let order = ((errs[0] / errs[1]).log2() + (errs[1] / errs[2]).log2()) / 2.0;
    Ok(below(
        "strang_order",
        (order - 2.0).abs(),
        0.1,
        format!("observed order {order:.3} from errors {errs:?}"),
    ))
}

fn check_radiation() -> Result<Check> {
    let c = PhysicalConstants::default();
    let spec = GridSpec::centered(32, 9.0)?;
    let psi = FreeGaussian::at_rest(1.2, Vec3::zeros(), c.hbar, c.mass).grid(spec, 0.3);
    let linear = nonlinear_power_psi(&psi, 1.0, &c)?.power;
    let nonlinear = nonlinear_power_psi(&psi, 0.5, &c)?.power;
    let a = Vec3::new(0.3, -0.2, 0.1);
    let larmor = classical_larmor(2.0, &a, 3.0);
    let larmor_exact = 2.0 * 4.0 * a.norm_squared() / (3.0 * 27.0);
    let mut value = linear.abs() + (larmor - larmor_exact).abs() / larmor_exact;
    if !(nonlinear > 0.0) {
        value += 1.0;
    }
    Ok(below(
        "radiation_laws",
        value,
        1e-12,
        format!("P(nu=1) = {linear:e}, P(nu=0.5) = {nonlinear:e}"),
    ))
}

fn check_qvg_round_trip(rng: &mut ChaCha8Rng, inv: &Invocation) -> Result<Check> {
    let spec = GridSpec::new([5, 4, 6], [-1.0, 0.5, 2.0], [0.3, 0.2, 0.7])?;
    let values = (0..spec.len())
        .map(|_| crate::Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let g = ComplexGrid3::from_values(spec, values)?;
    let path = inv.out.join("verify_roundtrip.qvg");
    write_grid(&g, &path)?;
    let back = read_grid(&path);
    let _ = std::fs::remove_file(&path);
    let same = back? == g;
    Ok(below("qvg_round_trip", if same { 0.0 } else { 1.0 }, 0.5, "bitwise grid equality after write and read"))
}

fn check_solenoid() -> Result<Check> {
    let s = SolenoidSpec {
        point: [0.0; 3],
        direction: [0.0, 0.0, 1.0],
        radius: 1.0,
        flux: 0.7,
    };
    let a = solenoid_grid(&s, GridSpec::centered(72, 12.0)?, [7.6, 0.9])?;
    let div = relative_divergence(&a)?;
    let c = PhysicalConstants {
        charge: 2.0,
        mass: 4.0,
        c: 3.0,
        ..PhysicalConstants::default()
    };
    let natural = ab_effective_vorticity(&s, &c, AbConvention::Natural);
    let gaussian = ab_effective_vorticity(&s, &c, AbConvention::Gaussian);
    let vort = (natural - 0.35).abs() + (gaussian - 0.35 / 3.0).abs();
    Ok(below(
        "solenoid_gauge",
        div.max(vort),
        GAUGE_TOLERANCE,
        format!("relative divergence {div:e}, effective vorticity error {vort:e}"),
    ))
}

/// Runs every check and writes `verify.json`.
pub fn cmd_verify(inv: &Invocation) -> std::result::Result<VerifyReport, CliError> {
    std::fs::create_dir_all(&inv.out).map_err(|e| Error::io(&inv.out, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(inv.seed);
    let vs = &inv.config.verify;
    let mut checks = Vec::new();
    let mut push = |name: &str, r: Result<Check>| checks.push(r.unwrap_or_else(|e| failed(name, e)));
    push("circulation", check_circulation(&mut rng));
    push("potential_gradient", check_potential_gradient(&mut rng));
    push("cut_jump", check_cut_jump(&mut rng));
    push("quantization_gate", Ok(check_quantization(&mut rng)));
    push("nodal_lines", check_nodal(vs.grid_n));
    push("mesh_orientation", check_mesh_orientation(vs.inject_fault));
    push("nu_identity", check_identity());
    push("width_law", check_width_law());
    push("nonlinear_norm", check_nonlinear_norm());
    push("strang_order", check_strang_order());
    push("radiation_laws", check_radiation());
    push("qvg_round_trip", check_qvg_round_trip(&mut rng, inv));
    push("solenoid_gauge", check_solenoid());
    let passed = checks.iter().all(|c| c.passed);
    let report = VerifyReport {
        grid_n: vs.grid_n,
        seed: inv.seed,
        checks,
        passed,
    };
    write_json(&inv.out.join(VERIFY_FILE), &report)?;
    Ok(report)
}
