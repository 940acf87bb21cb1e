use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::curve::{point_segment_distance, FilamentCurve, Link};
use crate::{Error, Result, Vec3};

/// Oriented triangulated spanning surface used as the branch cut of the
/// filament potential. Triangle normals follow the right-hand rule of the
/// vertex order; the boundary is traversed along the filament direction.
#[derive(Clone, Debug, PartialEq)]
pub struct SeifertMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
}

impl SeifertMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidArgument("mesh has no triangles".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidArgument(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidArgument(format!("triangle {t} repeats a vertex")));
            }
        }
        Ok(SeifertMesh {
            vertices,
            triangles,
        })
    }

    #[inline]
    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    #[inline]
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    #[inline]
    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    /// Area-weighted normal (half the cross product) of triangle `t`.
    pub fn area_vector(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangle(t);
        (b - a).cross(&(c - a)) * 0.5
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.area_vector(t).norm())
            .sum()
    }

    /// Radius of the bounding sphere about the vertex mean.
    pub fn scale(&self) -> f64 {
        let c = self.vertices.iter().sum::<Vec3>() / self.vertices.len() as f64;
        self.vertices
            .iter()
            .map(|v| (v - c).norm())
            .fold(0.0, f64::max)
    }

    /// Reverses the vertex order of one triangle.
    pub fn flip_triangle(&mut self, t: usize) {
        self.triangles[t].swap(1, 2);
    }

    /// Every interior edge must be shared by exactly two triangles that
    /// traverse it in opposite directions.
    pub fn check_orientation(&self) -> Result<()> {
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        let mut undirected: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                if let Some(other) = directed.insert((a, b), t) {
                    return Err(Error::MeshOrientation(format!(
                        "edge {a}->{b} traversed in the same direction by triangles {other} and {t}"
                    )));
                }
                let count = undirected.entry((a.min(b), a.max(b))).or_insert(0);
                *count += 1;
                if *count > 2 {
                    return Err(Error::MeshOrientation(format!(
                        "edge {a}-{b} shared by more than two triangles"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Boundary edges chained into loops, each in the traversal direction
    /// induced by the triangle orientation.
    pub fn boundary_loops(&self) -> Result<Vec<Vec<usize>>> {
        let mut directed = std::collections::HashSet::new();
        for tri in &self.triangles {
            for e in 0..3 {
                directed.insert((tri[e], tri[(e + 1) % 3]));
            }
        }
        let mut next: HashMap<usize, usize> = HashMap::new();
        let mut edges: Vec<(usize, usize)> = directed
            .iter()
            .filter(|(a, b)| !directed.contains(&(*b, *a)))
            .copied()
            .collect();
        edges.sort_unstable();
        for &(a, b) in &edges {
            if next.insert(a, b).is_some() {
                return Err(Error::MeshOrientation(format!(
                    "boundary vertex {a} has two outgoing boundary edges"
                )));
            }
        }
        let mut loops = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for &(start, _) in &edges {
            if seen.contains(&start) {
                continue;
            }
            let mut lp = vec![start];
            seen.insert(start);
            let mut cur = next[&start];
            while cur != start {
                if !seen.insert(cur) {
                    return Err(Error::MeshOrientation("boundary edges do not form cycles".into()));
                }
                lp.push(cur);
                cur = *next.get(&cur).ok_or_else(|| {
                    Error::MeshOrientation("open boundary chain".into())
                })?;
            }
            loops.push(lp);
        }
        Ok(loops)
    }

    /// Checks orientation and that the boundary coincides with the closed
    /// curves of `link` (within `tol`), traversed in the same direction.
    pub fn validate_against(&self, link: &Link, tol: f64) -> Result<()> {
        self.check_orientation()?;
        if link.curves.iter().any(|c| !c.is_closed()) {
            return Err(Error::InvalidArgument(
                "Seifert meshes are only defined for closed filaments".into(),
            ));
        }
        let loops = self.boundary_loops()?;
        if loops.is_empty() {
            return Err(Error::BoundaryMismatch("mesh has no boundary".into()));
        }
        let boundary_dist = |x: &Vec3| -> f64 {
            loops
                .iter()
                .flat_map(|lp| {
                    (0..lp.len()).map(move |i| {
                        (self.vertices[lp[i]], self.vertices[lp[(i + 1) % lp.len()]])
                    })
                })
                .map(|(a, b)| point_segment_distance(x, &a, &b))
                .fold(f64::INFINITY, f64::min)
        };
        for lp in &loops {
            for (i, &v) in lp.iter().enumerate() {
                let p = self.vertices[v];
                let d = link.distance_to(&p);
                if d > tol {
                    return Err(Error::BoundaryMismatch(format!(
                        "boundary vertex {v} is {d:.3e} from the filament (tolerance {tol:.1e})"
                    )));
                }
                let q = self.vertices[lp[(i + 1) % lp.len()]];
                let mid = (p + q) * 0.5;
                let (curve, seg) = nearest_curve_segment(link, &mid);
                if (q - p).dot(&link.curves[curve].tangents()[seg]) <= 0.0 {
                    return Err(Error::BoundaryMismatch(
                        "boundary traversal opposes the filament direction".into(),
                    ));
                }
            }
        }
        for curve in &link.curves {
            for p in curve.points() {
                let d = boundary_dist(p);
                if d > tol {
                    return Err(Error::BoundaryMismatch(format!(
                        "filament point {p:?} is {d:.3e} from the mesh boundary"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_off(&self) -> String {
        let mut s = String::new();
        writeln!(s, "OFF").unwrap();
        writeln!(s, "{} {} 0", self.vertices.len(), self.triangles.len()).unwrap();
        for v in &self.vertices {
            writeln!(s, "{:?} {:?} {:?}", v.x, v.y, v.z).unwrap();
        }
        for t in &self.triangles {
            writeln!(s, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
        }
        s
    }

    pub fn write_off(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_off()).map_err(|e| Error::io(path, e))
    }

    pub fn from_off(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line, message: &str| Error::MeshFormat {
            line,
            message: message.to_string(),
        };

        let (ln, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
        if header != "OFF" {
            return Err(err(ln, "expected \"OFF\" header"));
        }
        let (ln, counts) = lines.next().ok_or_else(|| err(ln, "missing counts line"))?;
        let counts: Vec<usize> = counts
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err(ln, "bad count")))
            .collect::<Result<_>>()?;
        if counts.len() != 3 {
            return Err(err(ln, "counts line must be \"V F E\""));
        }
        let (nv, nf) = (counts[0], counts[1]);

        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let (ln, l) = lines.next().ok_or_else(|| err(0, "missing vertex line"))?;
            let xyz: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| err(ln, "bad coordinate")))
                .collect::<Result<_>>()?;
            if xyz.len() != 3 {
                return Err(err(ln, "vertex line must have 3 coordinates"));
            }
            vertices.push(Vec3::new(xyz[0], xyz[1], xyz[2]));
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let (ln, l) = lines.next().ok_or_else(|| err(0, "missing face line"))?;
            let idx: Vec<usize> = l
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| err(ln, "bad index")))
                .collect::<Result<_>>()?;
            if idx.len() != 4 || idx[0] != 3 {
                return Err(err(ln, "only triangular faces \"3 i j k\" are supported"));
            }
            triangles.push([idx[1], idx[2], idx[3]]);
        }
        SeifertMesh::new(vertices, triangles)
    }

    pub fn read_off(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_off(&text)
    }
}

fn nearest_curve_segment(link: &Link, x: &Vec3) -> (usize, usize) {
    link.curves
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let (s, d) = c.nearest_segment(x);
            (ci, s, d)
        })
        .fold((0, 0, f64::INFINITY), |b, c| if c.2 < b.2 { c } else { b })
        .pipe(|(c, s, _)| (c, s))
}

trait Pipe: Sized {
    fn pipe<R>(self, f: impl FnOnce(Self) -> R) -> R {
        f(self)
    }
}
impl<T> Pipe for T {}

/// Reads an OFF mesh and validates it against `link`.
pub fn load_seifert_mesh(path: impl AsRef<Path>, link: &Link, tol: f64) -> Result<SeifertMesh> {
    let mesh = SeifertMesh::read_off(path)?;
    mesh.validate_against(link, tol)?;
    Ok(mesh)
}

/// Flat triangulated disk spanning a planar closed curve, with `rings`
/// concentric rings between the centroid and the boundary.
pub fn disk_mesh(circle: &FilamentCurve, rings: usize) -> Result<SeifertMesh> {
    if !circle.is_closed() {
        return Err(Error::InvalidArgument("disk_mesh needs a closed curve".into()));
    }
    if rings == 0 {
        return Err(Error::InvalidArgument("rings must be >= 1".into()));
    }
    let pts = circle.points();
    let n = pts.len();
    let c = circle.centroid();
    // Newell normal, oriented by the traversal direction
    let normal = (0..n)
        .map(|i| (pts[i] - c).cross(&(pts[(i + 1) % n] - c)))
        .sum::<Vec3>();
    let radius = pts.iter().map(|p| (p - c).norm()).fold(0.0, f64::max);
    if normal.norm() <= 1e-300 {
        return Err(Error::NonPlanar { deviation: radius });
    }
    let normal = normal.normalize();
    let deviation = pts
        .iter()
        .map(|p| (p - c).dot(&normal).abs())
        .fold(0.0, f64::max);
    if deviation > 1e-9 * radius {
        return Err(Error::NonPlanar { deviation });
    }

    let mut vertices = Vec::with_capacity(1 + rings * n);
    vertices.push(c);
    for r in 1..=rings {
        if r == rings {
            vertices.extend_from_slice(pts);
        } else {
            let f = r as f64 / rings as f64;
            vertices.extend(pts.iter().map(|p| c + (p - c) * f));
        }
    }
    let ring = |r: usize, i: usize| 1 + (r - 1) * n + (i % n);
    let mut triangles = Vec::with_capacity(n * (2 * rings - 1));
    for i in 0..n {
        triangles.push([0, ring(1, i), ring(1, i + 1)]);
    }
    for r in 1..rings {
        for i in 0..n {
            let (a0, a1) = (ring(r, i), ring(r, i + 1));
            let (b0, b1) = (ring(r + 1, i), ring(r + 1, i + 1));
            triangles.push([a0, b0, b1]);
            triangles.push([a0, b1, a1]);
        }
    }
    SeifertMesh::new(vertices, triangles)
}
