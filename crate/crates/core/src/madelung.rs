//! Madelung decomposition `ψ = R e^{iS/ħ}` and the Bohmian quantities
//! built on it.
//!
//! `S` is never unwrapped. The guidance velocity comes from the
//! probability current, and the quantum potential is evaluated from
//! spectral derivatives of `ψ` itself, which stays smooth through the
//! nodes and has half the bandwidth of `ρ`:
//!
//! ```text
//! ΔR/R = Re(Δψ/ψ) + |Im(∇ψ/ψ)|²
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::grid::{integrate_real, ComplexGrid3, GridSpec, RealGrid3, Spectral, VectorGrid3};
use crate::kernels::ProbeLoop;
use crate::wavefunction::PhysicalConstants;
use crate::{Error, Result, Vec3};

/// Points with `|ψ| < NODE_MASK_THRESHOLD · max|ψ|` are masked.
pub const NODE_MASK_THRESHOLD: f64 = 1e-6;

/// Mask fraction (within the occupied region) above which nonlinear
/// evolution and radiation quadratures abort.
pub const MASK_FRACTION_LIMIT: f64 = 0.10;

/// Radius of the occupied region in RMS radii of `ρ` about its centroid.
pub const OCCUPIED_RMS_RADII: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct NodeMask {
    pub masked: Vec<bool>,
    /// Masked fraction of the whole grid.
    pub grid_fraction: f64,
    /// Masked fraction of the occupied region.
    pub fraction: f64,
}

impl NodeMask {
    pub fn from_amplitude(r: &RealGrid3) -> Self {
        let spec = r.spec();
        let floor = NODE_MASK_THRESHOLD * r.max_abs();
        let masked: Vec<bool> = r.values().iter().map(|v| v.abs() < floor).collect();
        let total = masked.iter().filter(|&&m| m).count();

        let rho: Vec<f64> = r.values().iter().map(|v| v * v).collect();
        let mass: f64 = rho.iter().sum();
        let (mut fraction, mut occupied) = (0.0, 0usize);
        if mass > 0.0 {
            let centroid = rho
                .iter()
                .enumerate()
                .map(|(i, w)| spec.position_of(i) * *w)
                .sum::<Vec3>()
                / mass;
            let msq = rho
                .iter()
                .enumerate()
                .map(|(i, w)| (spec.position_of(i) - centroid).norm_squared() * w)
                .sum::<f64>()
                / mass;
            let radius = OCCUPIED_RMS_RADII * msq.sqrt();
            let mut hit = 0usize;
            for (i, &m) in masked.iter().enumerate() {
                if (spec.position_of(i) - centroid).norm() <= radius {
                    occupied += 1;
                    hit += m as usize;
                }
            }
            if occupied > 0 {
                fraction = hit as f64 / occupied as f64;
            }
        }
        NodeMask {
            masked,
            grid_fraction: total as f64 / spec.len() as f64,
            fraction,
        }
    }

    pub fn from_psi(psi: &ComplexGrid3) -> Self {
        Self::from_amplitude(&psi.abs())
    }

    pub fn check(&self) -> Result<()> {
        if self.fraction > MASK_FRACTION_LIMIT {
            return Err(Error::MaskExceeded {
                fraction: self.fraction,
                limit: MASK_FRACTION_LIMIT,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct MadelungFields {
    pub amplitude: RealGrid3,
    pub density: RealGrid3,
    /// `∇S/m`, zero on masked points.
    pub velocity: VectorGrid3,
    pub mask: NodeMask,
}

/// `R = |ψ|`, `ρ = R²`, `u = (ħ/m) Im(ψ*∇ψ)/|ψ|²`.
pub fn decompose(psi: &ComplexGrid3, constants: &PhysicalConstants) -> Result<MadelungFields> {
    psi.check_finite()?;
    let spec = *psi.spec();
    let grad = Spectral::new(spec).gradient(psi)?;
    let mask = NodeMask::from_psi(psi);
    let scale = constants.hbar / constants.mass;
    let comp = |axis: usize| -> Vec<f64> {
        psi.values()
            .iter()
            .zip(grad[axis].values())
            .zip(&mask.masked)
            .map(|((p, g), &m)| if m { 0.0 } else { scale * (p.conj() * g).im / p.norm_sqr() })
            .collect()
    };
    let velocity = VectorGrid3::new(spec, [comp(0), comp(1), comp(2)])?;
    let amplitude = psi.abs();
    let density = amplitude.map(|r| r * r);
    Ok(MadelungFields {
        amplitude,
        density,
        velocity,
        mask,
    })
}

/// Spectral derivatives of `ψ` needed for `G = ΔR/R` and `∇G`.
struct PsiDerivatives {
    psi: Vec<Complex64>,
    grad: [Vec<Complex64>; 3],
    lap: Vec<Complex64>,
    /// Hessian `[xx, yy, zz, xy, yz, zx]`.
    hess: [Vec<Complex64>; 6],
    grad_lap: [Vec<Complex64>; 3],
}

const HESSIAN_SLOT: [[usize; 3]; 3] = [[0, 3, 5], [3, 1, 4], [5, 4, 2]];

impl PsiDerivatives {
    fn new(psi: &ComplexGrid3, with_third: bool) -> Result<Self> {
        psi.check_finite()?;
        let sp = Spectral::new(*psi.spec());
        let s = sp.spectrum(psi.values());
        let ik = |axis: usize, i: usize, j: usize, k: usize| {
            Complex64::new(0.0, sp.k_odd(axis, [i, j, k][axis]))
        };
        let grad = [0, 1, 2].map(|a| sp.apply(&s, |i, j, k| ik(a, i, j, k)));
        let lap = sp.apply(&s, |i, j, k| Complex64::new(-sp.k_squared(i, j, k), 0.0));
        let (hess, grad_lap) = if with_third {
            let pairs = [(0, 0), (1, 1), (2, 2), (0, 1), (1, 2), (2, 0)];
            let hess = pairs.map(|(a, b)| {
                sp.apply(&s, |i, j, k| {
                    if a == b {
                        let ka = sp.k(a, [i, j, k][a]);
                        Complex64::new(-ka * ka, 0.0)
                    } else {
                        ik(a, i, j, k) * ik(b, i, j, k)
                    }
                })
            });
            let grad_lap = [0, 1, 2].map(|a| sp.apply(&s, |i, j, k| ik(a, i, j, k) * -sp.k_squared(i, j, k)));
            (hess, grad_lap)
        } else {
            (Default::default(), Default::default())
        };
        Ok(PsiDerivatives {
            psi: psi.values().to_vec(),
            grad,
            lap,
            hess,
            grad_lap,
        })
    }

    fn rho(&self, idx: usize) -> f64 {
        self.psi[idx].norm_sqr()
    }

    fn u(&self, idx: usize) -> [Complex64; 3] {
        let p = self.psi[idx];
        [0, 1, 2].map(|a| self.grad[a][idx] / p)
    }

    fn g(&self, idx: usize) -> f64 {
        let u = self.u(idx);
        (self.lap[idx] / self.psi[idx]).re + u.iter().map(|v| v.im * v.im).sum::<f64>()
    }

    /// `∇(ΔR/R)`; callers mask nodes.
    fn grad_g(&self, idx: usize) -> Vec3 {
        let p = self.psi[idx];
        let u = self.u(idx);
        let lap_over = self.lap[idx] / p;
        let mut out = Vec3::zeros();
        for i in 0..3 {
            let mut v = (self.grad_lap[i][idx] / p - lap_over * u[i]).re;
            for j in 0..3 {
                let du = self.hess[HESSIAN_SLOT[i][j]][idx] / p - u[i] * u[j];
                v += 2.0 * du.im * u[j].im;
            }
            out[i] = v;
        }
        out
    }
}

fn real_psi(r: &RealGrid3) -> ComplexGrid3 {
    r.map(|v| Complex64::new(v, 0.0))
}

/// `Q_B = −(ħ²/2m) ΔR/R` of a real amplitude, zero on masked points.
pub fn quantum_potential(r: &RealGrid3, constants: &PhysicalConstants) -> Result<(RealGrid3, NodeMask)> {
    quantum_potential_psi(&real_psi(r), constants)
}

/// `Q_B` of `R = |ψ|`, zero on masked points.
pub fn quantum_potential_psi(psi: &ComplexGrid3, constants: &PhysicalConstants) -> Result<(RealGrid3, NodeMask)> {
    let d = PsiDerivatives::new(psi, false)?;
    let mask = NodeMask::from_psi(psi);
    let c = -constants.hbar * constants.hbar / (2.0 * constants.mass);
    let values = (0..psi.spec().len())
        .map(|i| if mask.masked[i] { 0.0 } else { c * d.g(i) })
        .collect();
    Ok((RealGrid3::from_values(*psi.spec(), values)?, mask))
}

/// `∇Q_B` of a real amplitude, zero on masked points.
pub fn quantum_potential_gradient(
    r: &RealGrid3,
    constants: &PhysicalConstants,
) -> Result<(VectorGrid3, NodeMask)> {
    quantum_potential_gradient_psi(&real_psi(r), constants)
}

/// `∇Q_B` of `R = |ψ|`, zero on masked points.
pub fn quantum_potential_gradient_psi(
    psi: &ComplexGrid3,
    constants: &PhysicalConstants,
) -> Result<(VectorGrid3, NodeMask)> {
    let d = PsiDerivatives::new(psi, true)?;
    let mask = NodeMask::from_psi(psi);
    let c = -constants.hbar * constants.hbar / (2.0 * constants.mass);
    let spec = *psi.spec();
    let mut out = VectorGrid3::zeros(spec);
    for idx in 0..spec.len() {
        if mask.masked[idx] {
            continue;
        }
        let g = d.grad_g(idx) * c;
        for a in 0..3 {
            out.component_mut(a)[idx] = g[a];
        }
    }
    Ok((out, mask))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BohmForceReport {
    /// `∫ ρ ∇Q_B d³x`.
    pub integral: Vec3,
    /// `∫ ρ |∇Q_B| d³x`, the natural scale of `integral`.
    pub magnitude: f64,
    pub mask_fraction: f64,
    /// `R` does not decay before the box boundary.
    pub boundary_contaminated: bool,
}

impl BohmForceReport {
    pub fn relative(&self) -> f64 {
        if self.magnitude == 0.0 {
            self.integral.norm()
        } else {
            self.integral.norm() / self.magnitude
        }
    }
}

/// `∫ ρ ∇Q_B d³x`, which vanishes for any `R` decaying at the boundary.
pub fn bohm_force_integral(r: &RealGrid3, constants: &PhysicalConstants) -> Result<BohmForceReport> {
    let psi = real_psi(r);
    let d = PsiDerivatives::new(&psi, true)?;
    let mask = NodeMask::from_amplitude(r);
    let spec = *r.spec();
    let c = -constants.hbar * constants.hbar / (2.0 * constants.mass);
    let mut f = [vec![0.0; spec.len()], vec![0.0; spec.len()], vec![0.0; spec.len()]];
    let mut mag = vec![0.0; spec.len()];
    for idx in 0..spec.len() {
        if mask.masked[idx] {
            continue;
        }
        let v = d.grad_g(idx) * (c * d.rho(idx));
        for a in 0..3 {
            f[a][idx] = v[a];
        }
        mag[idx] = v.norm();
    }
    let integ = |v: Vec<f64>| integrate_real(&RealGrid3::from_values(spec, v)?);
    let [fx, fy, fz] = f;
    let integral = Vec3::new(integ(fx)?, integ(fy)?, integ(fz)?);
    let magnitude = integ(mag)?;
    let max = r.max_abs();
    let boundary_contaminated = (0..spec.len())
        .any(|i| spec.is_boundary(i) && r.values()[i].abs() >= NODE_MASK_THRESHOLD * max);
    Ok(BohmForceReport {
        integral,
        magnitude,
        mask_fraction: mask.fraction,
        boundary_contaminated,
    })
}

/// Zero line of `ψ` as a chain of face-piercing points.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalLine {
    pub points: Vec<Vec3>,
    pub closed: bool,
}

/// Faces whose corner amplitudes all fall below this fraction of
/// `max|ψ|` carry no reliable phase and are skipped.
pub const NODAL_SIGNIFICANCE: f64 = 1e-4;

type FaceId = (usize, usize, usize, usize);

/// In-plane axes `(u, v)` of a face normal to `axis`, ordered so that
/// `u × v` points along `+axis`.
fn face_axes(axis: usize) -> (usize, usize) {
    ((axis + 1) % 3, (axis + 2) % 3)
}

/// Locates the zero set of `ψ` by phase winding on grid faces and chains
/// the piercing points through cells.
pub fn extract_nodal_lines(psi: &ComplexGrid3) -> Vec<NodalLine> {
    let spec = *psi.spec();
    let [nx, ny, nz] = spec.dims;
    let floor = NODAL_SIGNIFICANCE * psi.max_abs();
    let at = |c: [usize; 3]| psi.values()[spec.index(c[0], c[1], c[2])];

    // winding about +axis and piercing point of every face
    let mut faces: BTreeMap<FaceId, (i64, Vec3)> = BTreeMap::new();
    for axis in 0..3 {
        let (u, v) = face_axes(axis);
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let base = [i, j, k];
                    if base[u] + 1 >= spec.dims[u] || base[v] + 1 >= spec.dims[v] {
                        continue;
                    }
                    let mut c = [base; 4];
                    c[1][u] += 1;
                    c[2][u] += 1;
                    c[2][v] += 1;
                    c[3][v] += 1;
                    let f = c.map(at);
                    if f.iter().all(|z| z.norm() < floor) {
                        continue;
                    }
                    let turn: f64 = (0..4).map(|e| (f[(e + 1) % 4] * f[e].conj()).arg()).sum();
                    let w = (turn / (2.0 * std::f64::consts::PI)).round() as i64;
                    if w != 0 {
                        let (s, t) = bilinear_zero(f[0], f[1], f[2], f[3]);
                        let mut p = spec.position(i, j, k);
                        p[u] += s * spec.spacing[u];
                        p[v] += t * spec.spacing[v];
                        faces.insert((axis, i, j, k), (w, p));
                    }
                }
            }
        }
    }

    // within each cell, pair entry faces (outward winding < 0) with exits
    let mut next: BTreeMap<FaceId, FaceId> = BTreeMap::new();
    let mut has_prev: BTreeMap<FaceId, bool> = BTreeMap::new();
    let mut cells: BTreeMap<[usize; 3], Vec<(FaceId, i64)>> = BTreeMap::new();
    for (&id, &(w, _)) in &faces {
        let (axis, i, j, k) = id;
        let cell = [i, j, k];
        // this face is the lower face of `cell` and the upper face of the
        // cell below it along `axis`
        if cell[axis] + 1 < spec.dims[axis] {
            cells.entry(cell).or_default().push((id, -w));
        }
        if cell[axis] > 0 {
            let mut below = cell;
            below[axis] -= 1;
            cells.entry(below).or_default().push((id, w));
        }
    }
    for list in cells.values() {
        let mut exits: Vec<FaceId> = list.iter().filter(|f| f.1 > 0).map(|f| f.0).collect();
        for &(entry, _) in list.iter().filter(|f| f.1 < 0) {
            if exits.is_empty() {
                break;
            }
            let pe = faces[&entry].1;
            let best = (0..exits.len())
                .min_by(|&a, &b| {
                    let da = (faces[&exits[a]].1 - pe).norm();
                    let db = (faces[&exits[b]].1 - pe).norm();
                    da.partial_cmp(&db).unwrap()
                })
                .unwrap();
            let exit = exits.swap_remove(best);
            next.insert(entry, exit);
            has_prev.insert(exit, true);
        }
    }

    let mut visited = std::collections::BTreeSet::new();
    let mut lines = Vec::new();
    // open chains first, from faces without a predecessor
    let starts: Vec<FaceId> = next
        .keys()
        .filter(|f| !has_prev.contains_key(f))
        .copied()
        .collect();
    for start in starts {
        let mut pts = vec![faces[&start].1];
        visited.insert(start);
        let mut cur = start;
        while let Some(&n) = next.get(&cur) {
            if !visited.insert(n) {
                break;
            }
            pts.push(faces[&n].1);
            cur = n;
        }
        if pts.len() >= 2 {
            lines.push(NodalLine {
                points: pts,
                closed: false,
            });
        }
    }
    for &start in next.keys() {
        if visited.contains(&start) {
            continue;
        }
        let mut pts = vec![faces[&start].1];
        visited.insert(start);
        let mut cur = start;
        let mut closed = false;
        while let Some(&n) = next.get(&cur) {
            if n == start {
                closed = true;
                break;
            }
            if !visited.insert(n) {
                break;
            }
            pts.push(faces[&n].1);
            cur = n;
        }
        if pts.len() >= 3 {
            lines.push(NodalLine { points: pts, closed });
        }
    }
    lines
}

/// Zero of the bilinear interpolant through corners `f00, f10, f11, f01`
/// on the unit square; the face centre when Newton's method fails.
fn bilinear_zero(f00: Complex64, f10: Complex64, f11: Complex64, f01: Complex64) -> (f64, f64) {
    let (mut s, mut t) = (0.5, 0.5);
    for _ in 0..30 {
        let f = f00 * (1.0 - s) * (1.0 - t) + f10 * s * (1.0 - t) + f11 * s * t + f01 * (1.0 - s) * t;
        let fs = (f10 - f00) * (1.0 - t) + (f11 - f01) * t;
        let ft = (f01 - f00) * (1.0 - s) + (f11 - f10) * s;
        let det = fs.re * ft.im - fs.im * ft.re;
        if det == 0.0 || !det.is_finite() {
            return (0.5, 0.5);
        }
        let ds = (f.re * ft.im - f.im * ft.re) / det;
        let dt = (fs.re * f.im - fs.im * f.re) / det;
        s -= ds;
        t -= dt;
        if !(s.is_finite() && t.is_finite()) {
            return (0.5, 0.5);
        }
        if ds.abs() + dt.abs() < 1e-14 {
            break;
        }
    }
    if (-1e-9..=1.0 + 1e-9).contains(&s) && (-1e-9..=1.0 + 1e-9).contains(&t) {
        (s.clamp(0.0, 1.0), t.clamp(0.0, 1.0))
    } else {
        (0.5, 0.5)
    }
}

/// Trilinear interpolation weights of `x`: lower corner and fractions.
fn cell_of(spec: &GridSpec, x: &Vec3) -> Option<([usize; 3], [f64; 3])> {
    let mut base = [0usize; 3];
    let mut frac = [0.0; 3];
    for a in 0..3 {
        let s = (x[a] - spec.origin[a]) / spec.spacing[a];
        if !(s >= 0.0 && s <= (spec.dims[a] - 1) as f64) {
            return None;
        }
        let b = (s.floor() as usize).min(spec.dims[a] - 2);
        base[a] = b;
        frac[a] = s - b as f64;
    }
    Some((base, frac))
}

fn corners(spec: &GridSpec, base: [usize; 3], frac: [f64; 3]) -> [(usize, f64); 8] {
    let mut out = [(0, 0.0); 8];
    for (n, slot) in out.iter_mut().enumerate() {
        let o = [n & 1, (n >> 1) & 1, (n >> 2) & 1];
        let w: f64 = (0..3)
            .map(|a| if o[a] == 1 { frac[a] } else { 1.0 - frac[a] })
            .product();
        *slot = (spec.index(base[0] + o[0], base[1] + o[1], base[2] + o[2]), w);
    }
    out
}

/// Trilinear interpolant of a complex grid.
pub fn interpolate(psi: &ComplexGrid3, x: &Vec3) -> Option<Complex64> {
    let (base, frac) = cell_of(psi.spec(), x)?;
    Some(
        corners(psi.spec(), base, frac)
            .iter()
            .map(|&(i, w)| psi.values()[i] * w)
            .sum(),
    )
}

/// `∮ u · dx` along `probe`, accumulated as `(ħ/m) Σ arg(ψ_{i+1}/ψ_i)`
/// over the interpolated wavefunction. Exact for the interpolant once the
/// probe steps resolve its phase.
pub fn phase_circulation(
    psi: &ComplexGrid3,
    probe: &ProbeLoop,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let pts = probe.points();
    let vals: Vec<Complex64> = pts
        .iter()
        .map(|p| {
            interpolate(psi, p).ok_or_else(|| Error::InvalidArgument("probe leaves the grid".into()))
        })
        .collect::<Result<_>>()?;
    if vals.iter().any(|v| v.norm() == 0.0) {
        return Err(Error::InvalidArgument("probe crosses a node".into()));
    }
    let total: f64 = (0..vals.len())
        .map(|i| (vals[(i + 1) % vals.len()] * vals[i].conj()).arg())
        .sum();
    Ok(constants.hbar / constants.mass * total)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Vec3>,
    /// The path entered a masked region or left the grid.
    pub truncated: bool,
}

impl Trajectory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,y,z\n");
        for (t, p) in self.times.iter().zip(&self.points) {
            writeln!(s, "{t},{},{},{}", p.x, p.y, p.z).unwrap();
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

struct VelocityFrame {
    velocity: VectorGrid3,
    masked: Vec<bool>,
}

impl VelocityFrame {
    fn at(&self, x: &Vec3) -> Option<Vec3> {
        let spec = self.velocity.spec();
        let (base, frac) = cell_of(spec, x)?;
        let mut u = Vec3::zeros();
        for (i, w) in corners(spec, base, frac) {
            if self.masked[i] {
                return None;
            }
            u += self.velocity.at(i) * w;
        }
        Some(u)
    }
}

/// Integrates `dX/dt = ∇S(X)/m` with RK4 through a series of frames
/// spaced `frame_dt` apart, `substeps` steps per frame. Velocities are
/// trilinear in space and linear in time.
pub fn advect_trajectory(
    series: &[ComplexGrid3],
    frame_dt: f64,
    x0: Vec3,
    substeps: usize,
    constants: &PhysicalConstants,
) -> Result<Trajectory> {
    if series.len() < 2 {
        return Err(Error::InvalidArgument("need at least two frames".into()));
    }
    if !(frame_dt > 0.0) || substeps == 0 {
        return Err(Error::InvalidArgument("frame_dt and substeps must be positive".into()));
    }
    let frames: Vec<VelocityFrame> = series
        .iter()
        .map(|psi| {
            let f = decompose(psi, constants)?;
            Ok(VelocityFrame {
                velocity: f.velocity,
                masked: f.mask.masked,
            })
        })
        .collect::<Result<_>>()?;
    let t_end = frame_dt * (frames.len() - 1) as f64;
    let velocity = |t: f64, x: &Vec3| -> Option<Vec3> {
        let s = (t / frame_dt).clamp(0.0, (frames.len() - 1) as f64);
        let f = (s.floor() as usize).min(frames.len() - 2);
        let w = s - f as f64;
        let a = frames[f].at(x)?;
        let b = frames[f + 1].at(x)?;
        Some(a * (1.0 - w) + b * w)
    };

    let h = frame_dt / substeps as f64;
    let steps = substeps * (frames.len() - 1);
    let mut traj = Trajectory {
        times: vec![0.0],
        points: vec![x0],
        truncated: false,
    };
    let mut x = x0;
    for n in 0..steps {
        let t = n as f64 * h;
        let step = (|| {
            let k1 = velocity(t, &x)?;
            let k2 = velocity(t + 0.5 * h, &(x + k1 * (0.5 * h)))?;
            let k3 = velocity(t + 0.5 * h, &(x + k2 * (0.5 * h)))?;
            let k4 = velocity(t + h, &(x + k3 * h))?;
            Some(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
        })();
        match step {
            Some(y) => {
                x = y;
                traj.times.push(((n + 1) as f64 * h).min(t_end));
                traj.points.push(x);
            }
            None => {
                traj.truncated = true;
                break;
            }
        }
    }
    Ok(traj)
}
