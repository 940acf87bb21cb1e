use std::f64::consts::PI;

use proptest::prelude::*;
use qvortex::grid::{read_grid, spectral_gradient, spectral_laplacian, write_grid, ComplexGrid3, GridSpec, RealGrid3, Spectral};
use qvortex::kernels::{biot_savart_velocity, circulation, scalar_potential, KernelConfig, ProbeLoop};
use qvortex::knot::{circle_curve, disk_mesh, reparametrize_arclength, trefoil_curve, Link};
use qvortex::madelung::{bohm_force_integral, decompose, quantum_potential};
use qvortex::radiation::{bohm_acceleration, nonlinear_power};
use qvortex::wavefunction::{quantization_check, select_nu, sheet_factor, PhysicalConstants};
use qvortex::{Complex64, Vec3};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn vec3() -> impl Strategy<Value = Vec3> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit() -> impl Strategy<Value = Vec3> {
    vec3().prop_filter("nonzero", |v| v.norm() > 0.2).prop_map(|v| v.normalize())
}

fn constants() -> impl Strategy<Value = PhysicalConstants> {
    (0.3..3.0f64, 0.3..3.0f64).prop_map(|(hbar, mass)| PhysicalConstants {
        hbar,
        mass,
        ..PhysicalConstants::default()
    })
}

/// Smooth, decaying, nodeless amplitude with a random anisotropic bump.
fn amplitude(spec: GridSpec, c: Vec3, w: Vec3, bump: f64) -> RealGrid3 {
    RealGrid3::from_fn(spec, |x| {
        let d = x - c;
        let g = (-(0..3).map(|i| d[i] * d[i] / (2.0 * w[i] * w[i])).sum::<f64>()).exp();
        g * (1.0 + bump * (-(x + c).norm_squared()).exp())
    })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn parseval(dims in prop::array::uniform3(4usize..9), seed in any::<u64>()) {
        let spec = GridSpec::new(dims, [0.0; 3], [0.3, 0.5, 0.7]).unwrap();
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let values: Vec<Complex64> = (0..spec.len()).map(|_| Complex64::new(next(), next())).collect();
        let spectrum = Spectral::new(spec).spectrum(&values);
        let direct: f64 = values.iter().map(|z| z.norm_sqr()).sum();
        let fourier: f64 = spectrum.iter().map(|z| z.norm_sqr()).sum::<f64>() / spec.len() as f64;
        prop_assert!(rel(fourier, direct) < 1e-10);
    }

    #[test]
    fn laplacian_is_divergence_of_gradient(
        modes in prop::collection::vec((-3i32..4, -3i32..4, -3i32..4, -1.0..1.0f64, -1.0..1.0f64), 1..6)
    ) {
        let spec = GridSpec::new([8, 10, 12], [0.0; 3], [0.4, 0.3, 0.25]).unwrap();
        let l = spec.extent();
        let psi = ComplexGrid3::from_fn(spec, |x| {
            modes.iter().map(|&(a, b, c, re, im)| {
                let ph = 2.0 * PI * (a as f64 * x.x / l[0] + b as f64 * x.y / l[1] + c as f64 * x.z / l[2]);
                Complex64::new(re, im) * Complex64::from_polar(1.0, ph)
            }).sum()
        });
        let lap = spectral_laplacian(&psi).unwrap();
        let grad = spectral_gradient(&psi).unwrap();
        let mut div = ComplexGrid3::filled(spec, Complex64::new(0.0, 0.0));
        for (axis, g) in grad.iter().enumerate() {
            let d = spectral_gradient(g).unwrap();
            for (o, v) in div.values_mut().iter_mut().zip(d[axis].values()) {
                *o += v;
            }
        }
        let scale = lap.max_abs().max(1e-12);
        for (a, b) in lap.values().iter().zip(div.values()) {
            prop_assert!((a - b).norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn qvg_round_trip_is_bitwise(
        dims in prop::array::uniform3(4usize..7),
        bits in prop::collection::vec(any::<u64>(), 2 * 6 * 6 * 6),
    ) {
        let spec = GridSpec::new(dims, [-1.0, 0.0, 2.5], [0.1, 0.2, 0.3]).unwrap();
        let finite = |b: u64| {
            let v = f64::from_bits(b);
            if v.is_finite() { v } else { f64::from_bits(b & !(0x7ff << 52)) }
        };
        let values = (0..spec.len()).map(|i| Complex64::new(finite(bits[2 * i]), finite(bits[2 * i + 1]))).collect();
        let g = ComplexGrid3::from_values(spec, values).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.qvg");
        write_grid(&g, &path).unwrap();
        let back = read_grid(&path).unwrap();
        prop_assert_eq!(back.spec(), g.spec());
        for (a, b) in back.values().iter().zip(g.values()) {
            prop_assert_eq!((a.re.to_bits(), a.im.to_bits()), (b.re.to_bits(), b.im.to_bits()));
        }
    }

    #[test]
    fn closed_curves_close(radius in 0.1..10.0f64, center in vec3(), normal in unit(), samples in 8usize..300) {
        let c = circle_curve(radius, center * 5.0, normal, samples).unwrap();
        prop_assert!(c.segment_sum().norm() < 1e-12 * c.length());
        let t = trefoil_curve(64.max(samples)).unwrap().transformed(radius, center).unwrap();
        prop_assert!(t.segment_sum().norm() < 1e-12 * t.length());
    }

    #[test]
    fn arclength_resampling_keeps_length(samples in 4096usize..6000, factor in 2usize..4) {
        let c = trefoil_curve(samples).unwrap();
        let r = reparametrize_arclength(&c, factor * samples).unwrap();
        prop_assert!(r.length() <= c.length() * (1.0 + 1e-12));
        prop_assert!(rel(r.length(), c.length()) < 1e-6);
        let mean = r.length() / r.segment_count() as f64;
        prop_assert!(r.segment_lengths().iter().all(|&l| rel(l, mean) < 1e-3));
    }

    #[test]
    fn disk_meshes_are_oriented(radius in 0.2..3.0f64, normal in unit(), rings in 1usize..5, flip in 0usize..10_000) {
        let c = circle_curve(radius, Vec3::zeros(), normal, 48).unwrap();
        let mut mesh = disk_mesh(&c, rings).unwrap();
        prop_assert!(mesh.check_orientation().is_ok());
        mesh.flip_triangle(flip % mesh.triangles().len());
        prop_assert!(mesh.check_orientation().is_err());
    }
}

/// Random point at least `margin` from the unit ring and its spanning disk.
fn off_cut(p: Vec3, margin: f64) -> bool {
    let rho = p.x.hypot(p.y);
    let to_ring = (rho - 1.0).hypot(p.z);
    let to_disk = if rho < 1.0 { p.z.abs() } else { to_ring };
    to_ring > margin && to_disk > margin
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn potential_is_harmonic(p in vec3().prop_map(|v| v * 2.0).prop_filter("off cut", |p| off_cut(*p, 0.3))) {
        let gamma = 2.0 * PI;
        let c = circle_curve(1.0, Vec3::zeros(), Vec3::z(), 256).unwrap();
        let mesh = disk_mesh(&c, 2).unwrap();
        let link = Link::single(c, gamma).unwrap();
        let h = 2e-3;
        let f = |x: Vec3| scalar_potential(&link, &mesh, &x).unwrap();
        let mut lap = -6.0 * f(p);
        for ax in 0..3 {
            let mut e = Vec3::zeros();
            e[ax] = h;
            lap += f(p + e) + f(p - e);
        }
        lap /= h * h;
        prop_assert!(lap.abs() < 1e-4 * gamma, "{lap}");
    }

    #[test]
    fn velocity_is_solenoidal(p in vec3().prop_map(|v| v * 2.0).prop_filter("off ring", |p| off_cut(*p, 0.3) || p.x.hypot(p.y) < 0.7)) {
        let link = Link::single(circle_curve(1.0, Vec3::zeros(), Vec3::z(), 256).unwrap(), 1.0).unwrap();
        let cfg = KernelConfig::default();
        let h = 1e-3;
        let mut div = 0.0;
        for ax in 0..3 {
            let mut e = Vec3::zeros();
            e[ax] = h;
            let up = biot_savart_velocity(&link, &(p + e), &cfg).unwrap();
            let down = biot_savart_velocity(&link, &(p - e), &cfg).unwrap();
            div += (up[ax] - down[ax]) / (2.0 * h);
        }
        let u = biot_savart_velocity(&link, &p, &cfg).unwrap();
        prop_assert!(div.abs() < 1e-4 * u.norm(), "{div} vs {}", u.norm());
    }

    #[test]
    fn circulation_is_quantized(center in vec3(), normal in unit(), radius in 0.2..2.0f64, gamma in 0.1..10.0f64) {
        let link = Link::single(circle_curve(1.0, Vec3::zeros(), Vec3::z(), 256).unwrap(), gamma).unwrap();
        let cfg = KernelConfig::default();
        let probe = ProbeLoop::circle(center, normal, radius, 128).unwrap();
        prop_assume!(probe.validate(&link, &cfg).is_ok());
        let ratio = circulation(&link, &probe, &cfg).unwrap() / gamma;
        prop_assert!((ratio - ratio.round()).abs() < 1e-3, "{ratio}");
    }

    #[test]
    fn cut_jump_is_constant(r in 0.0..0.9f64, t in 0.0..(2.0 * PI), gamma in 0.5..20.0f64) {
        let c = circle_curve(1.0, Vec3::zeros(), Vec3::z(), 128).unwrap();
        let mesh = disk_mesh(&c, 3).unwrap();
        let link = Link::single(c, gamma).unwrap();
        let p = Vec3::new(r * t.cos(), r * t.sin(), 0.0);
        let jump = |d: f64| {
            scalar_potential(&link, &mesh, &(p + Vec3::z() * d)).unwrap()
                - scalar_potential(&link, &mesh, &(p - Vec3::z() * d)).unwrap()
        };
        let j = 2.0 * jump(1e-8) - jump(2e-8);
        prop_assert!((j.abs() - gamma).abs() < 1e-6 * gamma.max(1.0), "{j}");
    }

    #[test]
    fn quantization_matches_sheet_phase(k in -40i64..40, frac in prop_oneof![Just(0.0), 1e-6..0.999], c in constants()) {
        let gamma = (k as f64 + frac) * 2.0 * PI * c.hbar / c.mass;
        let q = quantization_check(gamma, &c);
        let unit = (sheet_factor(gamma, &c, 1) - Complex64::new(1.0, 0.0)).norm() < 1e-12;
        prop_assert_eq!(q.single_valued, unit);
        prop_assert_eq!(q.single_valued, frac == 0.0);
    }

    #[test]
    fn transformed_state_is_single_valued(quanta in 0.05..20.0f64, m_index in 1u32..6, c in constants()) {
        let gamma = quanta * 2.0 * PI * c.hbar / c.mass;
        let nu = select_nu(gamma, &c, m_index).unwrap().nu;
        // continuation multiplies ψ_ν by e^{imΓ/νħ}
        let turns = c.mass * gamma / (nu * c.hbar) / (2.0 * PI);
        prop_assert!((turns - m_index as f64).abs() < 1e-12 * m_index as f64);
    }

    #[test]
    fn density_of_normalized_state_integrates_to_one(c in vec3(), w in (0.5..1.0f64, 0.5..1.0f64, 0.5..1.0f64), k in vec3()) {
        let spec = GridSpec::centered(24, 6.0).unwrap();
        let r = amplitude(spec, c, Vec3::new(w.0, w.1, w.2), 0.3);
        let mut psi = ComplexGrid3::from_fn(spec, |x| Complex64::from_polar(1.0, k.dot(&x)));
        for (p, a) in psi.values_mut().iter_mut().zip(r.values()) {
            *p *= a;
        }
        psi.normalize();
        let f = decompose(&psi, &PhysicalConstants::default()).unwrap();
        let total: f64 = f.density.values().iter().sum::<f64>() * spec.cell_volume();
        prop_assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn quantum_potential_ignores_scale(scale in 1e-3..1e3f64, c in vec3(), bump in 0.0..0.5f64) {
        let spec = GridSpec::centered(24, 7.0).unwrap();
        let r = amplitude(spec, c, Vec3::new(0.8, 0.9, 0.7), bump);
        let k = PhysicalConstants::default();
        let (q1, _) = quantum_potential(&r, &k).unwrap();
        let (q2, _) = quantum_potential(&r.map(|v| v * scale), &k).unwrap();
        let peak = q1.max_abs();
        for (a, b) in q1.values().iter().zip(q2.values()) {
            prop_assert!((a - b).abs() < 1e-9 * peak);
        }
    }

    #[test]
    fn radiated_power_laws(c in vec3(), bump in 0.0..0.5f64, nu in 0.1..4.0f64, nu2 in 0.1..4.0f64) {
        prop_assume!((nu - 1.0).abs() > 1e-3 && (nu2 - 1.0).abs() > 1e-3);
        let spec = GridSpec::centered(32, 8.0).unwrap();
        let r = amplitude(spec, c, Vec3::new(0.8, 0.9, 0.7), bump);
        let k = PhysicalConstants::default();
        let p1 = nonlinear_power(&r, nu, &k).unwrap().power;
        let p2 = nonlinear_power(&r, nu2, &k).unwrap().power;
        prop_assert!(p1 > 0.0 && p2 > 0.0);
        prop_assert_eq!(nonlinear_power(&r, 1.0, &k).unwrap().power, 0.0);
        prop_assert_eq!(nonlinear_power(&r, -1.0, &k).unwrap().power, 0.0);
        let expected = ((nu * nu - 1.0) / (nu2 * nu2 - 1.0)).powi(2);
        prop_assert!(rel(p1 / p2, expected) < 1e-12);
        let a = bohm_acceleration(&r, &k).unwrap();
        prop_assert!(a.mean.norm() < 1e-6 * a.mean_magnitude, "{:?}", a);
    }
}

#[test]
fn bohm_force_vanishes_for_every_box() {
    let k = PhysicalConstants::default();
    let c = Vec3::new(0.2, -0.1, 0.3);
    for n in [8, 16, 32, 64] {
        let spec = GridSpec::centered(n, n as f64 * 0.125).unwrap();
        let r = amplitude(spec, c, Vec3::new(1.5, 1.3, 1.4), 0.3);
        let f = bohm_force_integral(&r, &k).unwrap();
        assert!(f.relative() < 1e-10, "{n}: {f:?}");
    }
}
