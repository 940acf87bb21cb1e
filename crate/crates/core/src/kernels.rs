//! Potential-theory kernels of a vortex filament: Biot-Savart velocity,
//! solid-angle potential with its Seifert cut, circulation and winding
//! number, and the nodal regularizer `I_n`.
//!
//! All line integrals use the midpoint rule on each polyline segment, with
//! recursive bisection of any piece whose length exceeds
//! [`KernelConfig::refine`] times its distance to the evaluation point.

use std::f64::consts::PI;

use crate::knot::{point_segment_distance, FilamentCurve, Link, SeifertMesh};
use crate::{Error, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    /// Core radius in units of the nearest filament segment length.
    pub core_factor: f64,
    /// Maximum ratio of quadrature piece length to distance.
    pub refine: f64,
    /// Bisection depth limit.
    pub max_depth: u32,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            core_factor: 3.0,
            refine: 0.003,
            max_depth: 48,
        }
    }
}

impl KernelConfig {
    /// Core radius around the nearest segment of `link`, and the distance.
    fn core_check(&self, link: &Link, x: &Vec3) -> Result<()> {
        for c in &link.curves {
            let (seg, d) = c.nearest_segment(x);
            let core = self.core_factor * c.segment_lengths()[seg];
            if d <= core {
                return Err(Error::CoreProximity { distance: d, core });
            }
        }
        Ok(())
    }
}

/// Adaptive midpoint quadrature of `f(midpoint, piece)` along `a → b`.
fn adaptive_segment(
    a: Vec3,
    b: Vec3,
    x: &Vec3,
    cfg: &KernelConfig,
    depth: u32,
    f: &mut impl FnMut(Vec3, Vec3),
) {
    let m = (a + b) * 0.5;
    let d = b - a;
    if depth < cfg.max_depth && d.norm() > cfg.refine * (x - m).norm() {
        adaptive_segment(a, m, x, cfg, depth + 1, f);
        adaptive_segment(m, b, x, cfg, depth + 1, f);
    } else {
        f(m, d);
    }
}

/// `u_f(x) = (Γ/4π) Σ ∮ dσ × (x − R_f) / |x − R_f|³` over all link components.
pub fn biot_savart_velocity(link: &Link, x: &Vec3, cfg: &KernelConfig) -> Result<Vec3> {
    cfg.core_check(link, x)?;
    let mut u = Vec3::zeros();
    for c in &link.curves {
        for (a, b) in c.segments() {
            adaptive_segment(a, b, x, cfg, 0, &mut |m, d| {
                let r = x - m;
                let r2 = r.norm_squared();
                u += d.cross(&r) / (r2 * r2.sqrt());
            });
        }
    }
    Ok(u * (link.gamma / (4.0 * PI)))
}

/// Closed polyline used as the integration contour `C` of a circulation.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeLoop {
    points: Vec<Vec3>,
}

impl ProbeLoop {
    pub const MIN_POINTS: usize = 16;

    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.len() < Self::MIN_POINTS {
            return Err(Error::InvalidArgument(format!(
                "probe loop needs at least {} points, got {}",
                Self::MIN_POINTS,
                points.len()
            )));
        }
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidArgument("non-finite probe point".into()));
        }
        Ok(ProbeLoop { points })
    }

    /// Circle right-handed about `normal`.
    pub fn circle(center: Vec3, normal: Vec3, radius: f64, samples: usize) -> Result<Self> {
        let c = crate::knot::circle_curve(radius, center, normal, samples)?;
        ProbeLoop::new(c.points().to_vec())
    }

    /// The same contour traversed `times` times.
    pub fn repeated(&self, times: usize) -> Result<Self> {
        ProbeLoop::new(
            std::iter::repeat_n(&self.points, times)
                .flatten()
                .copied()
                .collect(),
        )
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    /// Rejects loops passing within the core radius of any filament.
    pub fn validate(&self, link: &Link, cfg: &KernelConfig) -> Result<()> {
        let n = self.points.len();
        for c in &link.curves {
            for i in 0..n {
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                for (s, (p, q)) in c.segments().enumerate() {
                    let d = segment_segment_distance(&a, &b, &p, &q);
                    let core = cfg.core_factor * c.segment_lengths()[s];
                    if d <= core {
                        return Err(Error::CoreProximity { distance: d, core });
                    }
                }
            }
        }
        Ok(())
    }
}

fn segment_segment_distance(a: &Vec3, b: &Vec3, p: &Vec3, q: &Vec3) -> f64 {
    let d1 = b - a;
    let d2 = q - p;
    let r = a - p;
    let (aa, ee, f) = (d1.dot(&d1), d2.dot(&d2), d2.dot(&r));
    let c = d1.dot(&r);
    let bb = d1.dot(&d2);
    let denom = aa * ee - bb * bb;
    let mut s = if denom > 1e-14 * aa * ee {
        ((bb * f - c * ee) / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mut t = (bb * s + f) / ee;
    if t < 0.0 {
        t = 0.0;
        s = (-c / aa).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((bb - c) / aa).clamp(0.0, 1.0);
    }
    ((a + d1 * s) - (p + d2 * t)).norm()
}

/// Probe pieces longer than this fraction of their distance to the link
/// are bisected before applying the trapezoidal rule.
const PROBE_REFINE: f64 = 0.02;

/// `∮_C u_f · dx` by the trapezoidal rule, locally refined near filaments.
pub fn circulation(link: &Link, probe: &ProbeLoop, cfg: &KernelConfig) -> Result<f64> {
    fn piece(
        link: &Link,
        a: Vec3,
        ua: Vec3,
        b: Vec3,
        ub: Vec3,
        cfg: &KernelConfig,
        depth: u32,
    ) -> Result<f64> {
        let m = (a + b) * 0.5;
        if depth < 24 && (b - a).norm() > PROBE_REFINE * link.distance_to(&m) {
            let um = biot_savart_velocity(link, &m, cfg)?;
            Ok(piece(link, a, ua, m, um, cfg, depth + 1)? + piece(link, m, um, b, ub, cfg, depth + 1)?)
        } else {
            Ok(0.5 * (ua + ub).dot(&(b - a)))
        }
    }
    let pts = probe.points();
    let u: Vec<Vec3> = pts
        .iter()
        .map(|p| biot_savart_velocity(link, p, cfg))
        .collect::<Result<_>>()?;
    let n = pts.len();
    let mut total = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        total += piece(link, pts[i], u[i], pts[j], u[j], cfg, 0)?;
    }
    Ok(total)
}

/// Nearest integer to `circulation / Γ`.
pub fn winding_number(link: &Link, probe: &ProbeLoop, cfg: &KernelConfig) -> Result<i64> {
    if link.gamma == 0.0 {
        return Err(Error::InvalidArgument("winding number undefined for gamma = 0".into()));
    }
    let ratio = circulation(link, probe, cfg)? / link.gamma;
    let k = ratio.round();
    if (ratio - k).abs() > 0.05 {
        return Err(Error::IllConditionedProbe { ratio });
    }
    Ok(k as i64)
}

/// Relative tolerance (in units of the mesh scale) for on-cut detection.
pub const CUT_TOLERANCE: f64 = 1e-12;

/// Signed solid angle of one triangle seen from `x`, positive on the side
/// its normal points to.
#[inline]
fn triangle_solid_angle(x: &Vec3, p: &[Vec3; 3]) -> (f64, f64) {
    let a1 = x - p[0];
    let a2 = x - p[1];
    let a3 = x - p[2];
    let (l1, l2, l3) = (a1.norm(), a2.norm(), a3.norm());
    let num = a1.dot(&a2.cross(&a3));
    let den = l1 * l2 * l3 + a1.dot(&a2) * l3 + a1.dot(&a3) * l2 + a2.dot(&a3) * l1;
    (2.0 * num.atan2(den), num)
}

fn on_triangle(x: &Vec3, p: &[Vec3; 3], num: f64, tol: f64) -> bool {
    let n = (p[1] - p[0]).cross(&(p[2] - p[0]));
    let nn = n.norm();
    // |num| = plane distance × 2·area
    if num.abs() > tol * nn {
        return false;
    }
    let q = x - n * ((x - p[0]).dot(&n) / (nn * nn));
    let inside = (0..3).all(|e| {
        let (a, b) = (p[e], p[(e + 1) % 3]);
        (b - a).cross(&(q - a)).dot(&n) >= -tol * nn
    });
    inside || (0..3).any(|e| point_segment_distance(x, &p[e], &p[(e + 1) % 3]) <= tol)
}

/// `Ω(x) = ∫_S (x − R)·dS / |x − R|³`, summed per triangle in closed form.
pub fn solid_angle(mesh: &SeifertMesh, x: &Vec3) -> Result<f64> {
    let tol = CUT_TOLERANCE * mesh.scale();
    let mut omega = 0.0;
    for t in 0..mesh.triangles().len() {
        let p = mesh.triangle(t);
        let (w, num) = triangle_solid_angle(x, &p);
        if on_triangle(x, &p, num, tol) {
            let distance = num.abs() / (2.0 * mesh.area_vector(t).norm());
            return Err(Error::OnCut { distance });
        }
        omega += w;
    }
    Ok(omega)
}

/// Solid angle that never fails on the cut: points lying on the mesh are
/// evaluated as the limit from the positive-normal side.
pub fn solid_angle_upper(mesh: &SeifertMesh, x: &Vec3) -> f64 {
    match solid_angle(mesh, x) {
        Ok(w) => w,
        Err(_) => {
            let tol = CUT_TOLERANCE * mesh.scale();
            let t = (0..mesh.triangles().len())
                .find(|&t| {
                    let p = mesh.triangle(t);
                    let (_, num) = triangle_solid_angle(x, &p);
                    on_triangle(x, &p, num, tol)
                })
                .unwrap_or(0);
            let n = mesh.area_vector(t).normalize();
            let y = x + n * (2.0 * tol);
            (0..mesh.triangles().len())
                .map(|s| triangle_solid_angle(&y, &mesh.triangle(s)).0)
                .sum()
        }
    }
}

/// `φ_f(x) = −(Γ/4π) Ω(x)`.
pub fn scalar_potential(link: &Link, mesh: &SeifertMesh, x: &Vec3) -> Result<f64> {
    Ok(-link.gamma / (4.0 * PI) * solid_angle(mesh, x)?)
}

/// `I_n(x) = ∫ dσ / |x − R_f(σ)|ⁿ`; `+∞` on the polyline itself.
///
/// For `n ≤ 3` each straight segment is integrated in closed form, so the
/// result is exact for the polyline and smooth in `x`. Higher powers use
/// the adaptive midpoint rule.
pub fn nodal_regularizer(curve: &FilamentCurve, n: u32, x: &Vec3, cfg: &KernelConfig) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument("regularizer exponent must be >= 1".into()));
    }
    let mut total = 0.0;
    for (a, b) in curve.segments() {
        if point_segment_distance(x, &a, &b) <= 1e-14 * (b - a).norm() {
            return Ok(f64::INFINITY);
        }
        if n <= 3 {
            total += segment_inverse_power(x, &a, &b, n);
        } else {
            adaptive_segment(a, b, x, cfg, 0, &mut |m, d| {
                total += d.norm() / (x - m).norm().powi(n as i32);
            });
        }
    }
    Ok(total)
}

/// `∫_a^b dσ / |x − R(σ)|ⁿ` along a straight segment, `n ∈ {1, 2, 3}`,
/// written to avoid cancellation when `x` lies near the segment's line.
fn segment_inverse_power(x: &Vec3, a: &Vec3, b: &Vec3, n: u32) -> f64 {
    let ab = b - a;
    let len = ab.norm();
    let t = ab / len;
    let xa = a - x;
    let u1 = xa.dot(&t);
    let u2 = u1 + len;
    let d = (xa - t * u1).norm();
    let r1 = xa.norm();
    let r2 = (b - x).norm();
    match n {
        1 => {
            if u1 >= 0.0 {
                ((u2 + r2) / (u1 + r1)).ln()
            } else if u2 <= 0.0 {
                ((r1 - u1) / (r2 - u2)).ln()
            } else {
                ((u2 + r2) * (r1 - u1) / (d * d)).ln()
            }
        }
        2 => {
            if d == 0.0 {
                len / (u1 * u2)
            } else {
                (d * len).atan2(d * d + u1 * u2) / d
            }
        }
        3 => {
            if u1 < 0.0 && u2 > 0.0 {
                (u2 / r2 - u1 / r1) / (d * d)
            } else {
                len * (u1 + u2) / ((u2 * r1 + u1 * r2) * r1 * r2)
            }
        }
        _ => unreachable!(),
    }
}

/// Sum of [`nodal_regularizer`] over every component of `link`.
pub fn link_regularizer(link: &Link, n: u32, x: &Vec3, cfg: &KernelConfig) -> Result<f64> {
    let mut total = 0.0;
    for c in &link.curves {
        total += nodal_regularizer(c, n, x, cfg)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knot::{circle_curve, disk_mesh, line_filament, trefoil_curve};
    use crate::vec3;

    fn cfg() -> KernelConfig {
        KernelConfig::default()
    }

    fn z_line() -> Link {
        let c = line_filament(Vec3::z(), Vec3::zeros(), 1e4, 4001).unwrap();
        Link::single(c, 2.0 * PI).unwrap()
    }

    fn unit_ring(samples: usize) -> (Link, SeifertMesh) {
        let c = circle_curve(1.0, Vec3::zeros(), Vec3::z(), samples).unwrap();
        let mesh = disk_mesh(&c, 1).unwrap();
        (Link::single(c, 2.0 * PI).unwrap(), mesh)
    }

    #[test]
    fn ring_center_velocity() {
        let (link, _) = unit_ring(8192);
        let u = biot_savart_velocity(&link, &Vec3::zeros(), &cfg()).unwrap();
        assert!((u - vec3(0.0, 0.0, PI)).norm() < 1e-6, "{u:?}");
    }

    #[test]
    fn polygon_center_velocity_matches_closed_form() {
        // inscribed N-gon: |u| = (Γ/2a) tan(π/N)/(π/N)
        let n = 64;
        let (link, _) = unit_ring(n);
        let u = biot_savart_velocity(&link, &Vec3::zeros(), &cfg()).unwrap();
        let x = PI / n as f64;
        assert!((u.z - PI * x.tan() / x).abs() < 1e-5 * PI);
    }

    #[test]
    fn straight_wire_limit() {
        let u = biot_savart_velocity(&z_line(), &vec3(1.0, 0.0, 0.0), &cfg()).unwrap();
        assert!((u - vec3(0.0, 1.0, 0.0)).norm() < 1e-6, "{u:?}");
    }

    #[test]
    fn dipole_falloff() {
        let (link, _) = unit_ring(256);
        let dir = vec3(0.3, -0.5, 0.8).normalize();
        let u1 = biot_savart_velocity(&link, &(dir * 50.0), &cfg()).unwrap().norm();
        let u2 = biot_savart_velocity(&link, &(dir * 100.0), &cfg()).unwrap().norm();
        assert!((u1 / u2 / 8.0 - 1.0).abs() < 0.05);
    }

    #[test]
    fn core_rejection() {
        let (link, _) = unit_ring(256);
        let x = vec3(1.0 + 1e-3, 0.0, 0.0);
        assert!(matches!(
            biot_savart_velocity(&link, &x, &cfg()),
            Err(Error::CoreProximity { .. })
        ));
    }

    #[test]
    fn circulation_and_winding() {
        let link = z_line();
        let probe = ProbeLoop::circle(Vec3::zeros(), Vec3::z(), 0.5, 512).unwrap();
        let g = circulation(&link, &probe, &cfg()).unwrap();
        assert!((g / (2.0 * PI) - 1.0).abs() < 1e-4, "{g}");
        assert_eq!(winding_number(&link, &probe, &cfg()).unwrap(), 1);

        let twice = probe.repeated(2).unwrap();
        let g2 = circulation(&link, &twice, &cfg()).unwrap();
        assert!((g2 / (4.0 * PI) - 1.0).abs() < 1e-4);

        let away = ProbeLoop::circle(vec3(3.0, 0.0, 0.0), Vec3::z(), 0.5, 256).unwrap();
        assert!(circulation(&link, &away, &cfg()).unwrap().abs() < 1e-4 * 2.0 * PI);
        assert_eq!(winding_number(&link, &away, &cfg()).unwrap(), 0);

        let reversed = ProbeLoop::circle(Vec3::zeros(), -Vec3::z(), 0.5, 256).unwrap();
        assert_eq!(winding_number(&link, &reversed, &cfg()).unwrap(), -1);
    }

    /// Gauss linking integral between two closed polylines.
    fn gauss_linking(a: &[Vec3], b: &[Vec3]) -> f64 {
        let mut s = 0.0;
        for i in 0..a.len() {
            let da = a[(i + 1) % a.len()] - a[i];
            let ma = (a[(i + 1) % a.len()] + a[i]) * 0.5;
            for j in 0..b.len() {
                let db = b[(j + 1) % b.len()] - b[j];
                let mb = (b[(j + 1) % b.len()] + b[j]) * 0.5;
                let r = ma - mb;
                s += da.cross(&db).dot(&r) / r.norm().powi(3);
            }
        }
        s / (4.0 * PI)
    }

    #[test]
    fn winding_counts_only_threaded_component() {
        let c1 = circle_curve(1.0, Vec3::zeros(), Vec3::z(), 256).unwrap();
        let c2 = circle_curve(1.0, vec3(6.0, 0.0, 0.0), Vec3::y(), 256).unwrap();
        let link = Link::new(vec![c1, c2.clone()], 1.0).unwrap();
        // small loop threaded by c1 only
        let probe = ProbeLoop::circle(vec3(1.0, 0.0, 0.0), Vec3::y(), 0.3, 256).unwrap();
        let w = winding_number(&link, &probe, &cfg()).unwrap();
        let lk1 = gauss_linking(probe.points(), link.curves[0].points());
        let lk2 = gauss_linking(probe.points(), c2.points());
        assert_eq!(lk2.round(), 0.0);
        assert_eq!(w as f64, lk1.round());
        assert_eq!(w.abs(), 1);
    }

    #[test]
    fn probe_validation() {
        let link = z_line();
        let probe = ProbeLoop::circle(vec3(0.5, 0.0, 0.0), Vec3::z(), 0.5, 64).unwrap();
        assert!(probe.validate(&link, &cfg()).is_err());
        let ok = ProbeLoop::circle(Vec3::zeros(), Vec3::z(), 0.5, 64).unwrap();
        ok.validate(&link, &cfg()).unwrap();
        assert!(ProbeLoop::new(vec![Vec3::zeros(); 8]).is_err());
    }

    #[test]
    fn disk_solid_angle_on_axis() {
        let (_, mesh) = unit_ring(64);
        // axial solid angle of the inscribed polygon, by brute-force
        // quadrature of the surface integral in polar coordinates
        let n = 64;
        let apothem = (PI / n as f64).cos();
        let z = 1.0;
        let wedge = 2.0 * PI / n as f64;
        let m = 4000;
        let mut brute = 0.0;
        for i in 0..m {
            let th = -wedge / 2.0 + wedge * (i as f64 + 0.5) / m as f64;
            let rmax = apothem / th.cos();
            // ∫0^rmax z r dr/(r²+z²)^{3/2} = 1 - z/√(rmax²+z²)
            brute += (1.0 - z / (rmax * rmax + z * z).sqrt()) * wedge / m as f64;
        }
        brute *= n as f64;
        let w = solid_angle(&mesh, &vec3(0.0, 0.0, z)).unwrap();
        assert!((w - brute).abs() < 1e-8, "{w} vs {brute}");

        let (_, fine) = unit_ring(8192);
        let w = solid_angle(&fine, &vec3(0.0, 0.0, 1.0)).unwrap();
        let exact = 2.0 * PI * (1.0 - 1.0 / 2f64.sqrt());
        assert!((w - exact).abs() < 1e-6);
    }

    #[test]
    fn solid_angle_far_and_jump() {
        let (link, mesh) = unit_ring(128);
        assert!(solid_angle(&mesh, &vec3(1e3, 2e2, -3e2)).unwrap().abs() < 1e-6);
        let eps = 1e-10;
        let up = solid_angle(&mesh, &vec3(0.1, 0.2, eps)).unwrap();
        let down = solid_angle(&mesh, &vec3(0.1, 0.2, -eps)).unwrap();
        assert!((up - down - 4.0 * PI).abs() < 1e-8);
        let pu = scalar_potential(&link, &mesh, &vec3(0.1, 0.2, eps)).unwrap();
        let pd = scalar_potential(&link, &mesh, &vec3(0.1, 0.2, -eps)).unwrap();
        assert!(((pu - pd).abs() - link.gamma).abs() < 1e-8);
    }

    #[test]
    fn on_cut_detection() {
        let (_, mesh) = unit_ring(128);
        let x = vec3(0.2, -0.1, 0.0);
        assert!(matches!(solid_angle(&mesh, &x), Err(Error::OnCut { .. })));
        let upper = solid_angle_upper(&mesh, &x);
        let above = solid_angle(&mesh, &vec3(0.2, -0.1, 1e-7)).unwrap();
        assert!((upper - above).abs() < 1e-6);
        // outside the disk in its plane is not on the cut
        assert!(solid_angle(&mesh, &vec3(2.0, 0.0, 0.0)).unwrap().abs() < 1e-12);
    }

    #[test]
    fn potential_gradient_is_velocity() {
        let (link, mesh) = unit_ring(256);
        let x = vec3(0.4, -0.3, 0.35);
        let h = 1e-3;
        let mut grad = Vec3::zeros();
        for ax in 0..3 {
            let mut e = Vec3::zeros();
            e[ax] = h;
            let f = |s: f64| scalar_potential(&link, &mesh, &(x + e * s)).unwrap();
            grad[ax] = (8.0 * (f(1.0) - f(-1.0)) - (f(2.0) - f(-2.0))) / (12.0 * h);
        }
        let u = biot_savart_velocity(&link, &x, &cfg()).unwrap();
        assert!((grad - u).norm() < 1e-5 * u.norm(), "{grad:?} {u:?}");
    }

    #[test]
    fn regularizer_values() {
        let (link, _) = unit_ring(4096);
        let c = &link.curves[0];
        for n in [1, 2, 5] {
            let i = nodal_regularizer(c, n, &Vec3::zeros(), &cfg()).unwrap();
            assert!((i - 2.0 * PI).abs() < 1e-5, "{n}: {i}");
        }
        let on = nodal_regularizer(c, 2, &c.points()[7], &cfg()).unwrap();
        assert_eq!(1.0 / on, 0.0);
        let line = line_filament(Vec3::z(), Vec3::zeros(), 10.0, 101).unwrap();
        let d = 1e-3;
        let i2 = nodal_regularizer(&line, 2, &vec3(d, 0.0, 0.0), &cfg()).unwrap();
        assert!((d * i2 / PI - 1.0).abs() < 0.02);
        assert!(nodal_regularizer(c, 0, &Vec3::zeros(), &cfg()).is_err());
    }

    #[test]
    fn closed_form_regularizer_matches_fine_quadrature() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let c = trefoil_curve(64).unwrap();
        let fine = KernelConfig {
            refine: 1e-4,
            ..cfg()
        };
        for _ in 0..20 {
            let x = vec3(
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-1.5..1.5),
            );
            for n in 1..=3 {
                let exact = nodal_regularizer(&c, n, &x, &cfg()).unwrap();
                let mut quad = 0.0;
                for (a, b) in c.segments() {
                    adaptive_segment(a, b, &x, &fine, 0, &mut |m, d| {
                        quad += d.norm() / (x - m).norm().powi(n as i32);
                    });
                }
                assert!((exact - quad).abs() < 1e-7 * quad, "n={n} {exact} {quad}");
            }
        }
        // on the extension of a segment, far from its foot
        let a = vec3(0.0, 0.0, 0.0);
        let b = vec3(1.0, 0.0, 0.0);
        let x = vec3(-0.5, 1e-9, 0.0);
        assert!((segment_inverse_power(&x, &a, &b, 2) - (2.0 - 1.0 / 1.5)).abs() < 1e-12);
        assert!((segment_inverse_power(&x, &a, &b, 1) - 3f64.ln()).abs() < 1e-12);
        let j3 = 0.5 * (1.0 / 0.25 - 1.0 / 2.25);
        assert!((segment_inverse_power(&x, &a, &b, 3) - j3).abs() < 1e-12);
    }

    #[test]
    fn trefoil_circulation_is_integer() {
        let c = trefoil_curve(512).unwrap();
        let link = Link::single(c.clone(), 1.0).unwrap();
        // small loop around one strand
        let p = c.points()[40];
        let t = c.tangents()[40];
        let probe = ProbeLoop::circle(p, t, 0.2, 256).unwrap();
        let r = circulation(&link, &probe, &cfg()).unwrap();
        assert!((r - 1.0).abs() < 1e-3, "{r}");
    }
}
