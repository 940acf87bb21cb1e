use std::f64::consts::PI;

use proptest::prelude::*;
use qvortex::evolution::{evolve_linear, evolve_nonlinear, psi_nu_from_rs, run_from, EvolveConfig, Potential};
use qvortex::grid::{integrate_real, ComplexGrid3, GridSpec, RealGrid3};
use qvortex::knot::{circle_curve, disk_mesh, Link};
use qvortex::madelung::extract_nodal_lines;
use qvortex::wavefunction::{build_initial_state, select_nu, EnvelopeSpec, MultiValuedState, PhysicalConstants, StateSpec};
use qvortex::{Complex64, Vec3};

fn natural() -> PhysicalConstants {
    PhysicalConstants::default()
}

fn norm(psi: &ComplexGrid3) -> f64 {
    integrate_real(&psi.map(|c| c.norm_sqr())).unwrap()
}

fn max_diff(a: &ComplexGrid3, b: &ComplexGrid3) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Free Gaussian at rest: amplitude and continuous phase `S/ħ` in units
/// `ħ = m = 1`.
fn free_rs(sigma0: f64, x: &Vec3, t: f64) -> (f64, f64) {
    let tau = t / (2.0 * sigma0 * sigma0);
    let r2 = x.norm_squared();
    let s2 = sigma0 * sigma0 * (1.0 + tau * tau);
    let amp = (2.0 * PI * s2).powf(-0.75) * (-r2 / (4.0 * s2)).exp();
    let phase = r2 * tau / (4.0 * s2) - 1.5 * tau.atan();
    (amp, phase)
}

fn free_psi_nu(spec: GridSpec, sigma0: f64, t: f64, nu: f64) -> ComplexGrid3 {
    let amp = RealGrid3::from_fn(spec, |x| free_rs(sigma0, &x, t).0);
    let phase = RealGrid3::from_fn(spec, |x| free_rs(sigma0, &x, t).1);
    psi_nu_from_rs(&amp, &phase, nu).unwrap()
}

fn ring_state(spec: GridSpec, gamma: f64) -> MultiValuedState {
    let c = circle_curve(1.0, Vec3::zeros(), Vec3::z(), 128).unwrap();
    let mesh = disk_mesh(&c, 1).unwrap();
    let link = Link::single(c, gamma).unwrap();
    let s = StateSpec::new(spec, EnvelopeSpec { center: None, width: 1.0 }, 2);
    build_initial_state(&s, &link, Some(&mesh), &natural()).unwrap()
}

/// Spectrally resolved packet, decayed below the node mask at the faces.
fn packet() -> impl Strategy<Value = ComplexGrid3> {
    (
        (-0.5..0.5f64, -0.5..0.5f64, -0.5..0.5f64),
        (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
        0.9..1.2f64,
        0.0..0.5f64,
    )
        .prop_map(|(c, k, w, bump)| {
            let spec = GridSpec::centered(32, 8.0).unwrap();
            let c = Vec3::new(c.0, c.1, c.2);
            let k = Vec3::new(k.0, k.1, k.2);
            let mut psi = ComplexGrid3::from_fn(spec, |x| {
                let d = x - c;
                let b = 1.0 + bump * (-(x + c).norm_squared() / (2.0 * w * w)).exp();
                Complex64::from_polar(b * (-d.norm_squared() / (2.0 * w * w)).exp(), k.dot(&x))
            });
            psi.normalize();
            psi
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn each_step_is_unitary(psi in packet(), nu in prop_oneof![Just(1.0), 0.5..2.0f64]) {
        let cfg = EvolveConfig::new(0.015, 10).with_nu(nu);
        let limit = if nu == 1.0 { 1e-12 } else { 1e-10 };
        let mut last = norm(&psi);
        run_from(psi, 0, None, &cfg, &natural(), |_, _, p| {
            let n = norm(p);
            assert!((n - last).abs() < limit * last, "nu={nu}: {last} -> {n}");
            last = n;
            Ok(())
        })
        .unwrap();
    }

    #[test]
    fn constant_phase_commutes_with_evolution(psi in packet(), theta in 0.0..(2.0 * PI), nu in prop_oneof![Just(1.0), 0.5..2.0f64]) {
        let c = Complex64::from_polar(1.0, theta);
        let cfg = EvolveConfig::new(0.015, 8).with_nu(nu).with_stride(8);
        let plain = evolve_nonlinear(&psi, &cfg, &natural()).unwrap();
        let rotated = evolve_nonlinear(&psi.map(|z| z * c), &cfg, &natural()).unwrap();
        let a = &plain.frames.last().unwrap().psi;
        let b = &rotated.frames.last().unwrap().psi;
        let diff = max_diff(&a.map(|z| z * c), b);
        prop_assert!(diff < 1e-12 * a.max_abs(), "{diff}");
    }
}

#[test]
fn strang_matches_transformed_free_gaussian() {
    let spec = GridSpec::centered(32, 8.0).unwrap();
    let (sigma0, nu, t_end) = (1.0, 2.0, 1.0);
    let exact = free_psi_nu(spec, sigma0, t_end, nu);
    let psi0 = free_psi_nu(spec, sigma0, 0.0, nu);
    let steps = [56usize, 80, 112];
    let errors: Vec<f64> = steps
        .iter()
        .map(|&n| {
            let cfg = EvolveConfig::new(t_end / n as f64, n).with_nu(nu).with_stride(n);
            let s = evolve_nonlinear(&psi0, &cfg, &natural()).unwrap();
            max_diff(&s.frames.last().unwrap().psi, &exact) / exact.max_abs()
        })
        .collect();
    for i in 0..2 {
        let order = (errors[i] / errors[i + 1]).ln() / (steps[i + 1] as f64 / steps[i] as f64).ln();
        assert!((order - 2.0).abs() < 0.15, "{errors:?}");
    }
}

#[test]
fn transformed_state_is_continuous_across_the_disk() {
    // thin slab straddling the spanning disk at z = ±h/2
    let h = 1e-3;
    let spec = GridSpec::new([32, 32, 4], [-2.9, -2.9, -1.5 * h], [0.1875, 0.1875, h]).unwrap();
    let gamma = 3.0 * PI;
    let state = ring_state(spec, gamma);
    let nu = select_nu(gamma, &natural(), 1).unwrap().nu;
    assert_eq!(nu, 1.5);
    let psi = state.psi();
    let psi_nu = state.psi_nu(nu);
    let (mut flip, mut smooth) = (0.0f64, 0.0f64);
    let mut inside = 0;
    for j in 0..spec.dims[1] {
        for i in 0..spec.dims[0] {
            let (below, above) = (spec.index(i, j, 1), spec.index(i, j, 2));
            let p = spec.position_of(above);
            if p.x.hypot(p.y) > 0.7 {
                continue;
            }
            inside += 1;
            let scale = psi.values()[above].norm();
            flip = flip.max((psi.values()[above] + psi.values()[below]).norm() / scale);
            smooth = smooth.max((psi_nu.values()[above] - psi_nu.values()[below]).norm() / scale);
        }
    }
    assert!(inside > 30);
    // ψ changes sign across the sheet, ψ_ν does not
    assert!(flip < 1e-2, "{flip}");
    assert!(smooth < 1e-2, "{smooth}");
}

#[test]
fn ring_nodal_line_persists() {
    let spec = GridSpec::centered(32, 4.0).unwrap();
    let state = ring_state(spec, 2.0 * PI);
    let cfg = EvolveConfig::new(0.005, 120)
        .with_potential(Potential::Harmonic {
            omega: 1.0,
            center: Vec3::zeros(),
        })
        .with_stride(10);
    let series = evolve_linear(&state.psi(), &cfg, &natural()).unwrap();
    assert_eq!(series.frames.last().unwrap().step, 120);
    for f in &series.frames {
        let lines = extract_nodal_lines(&f.psi);
        let closed = lines.iter().filter(|l| l.closed && l.points.len() >= 8).count();
        assert!(closed >= 1, "step {}: {} lines, none closed", f.step, lines.len());
    }
}
