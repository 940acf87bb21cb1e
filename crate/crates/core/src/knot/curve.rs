use std::f64::consts::PI;

use crate::{Error, Result, Vec3};

/// Oriented polyline sampling a vortex filament `R_f(σ)`.
///
/// The traversal direction is the filament tangent; circulation follows
/// the right-hand rule about it.
#[derive(Clone, Debug, PartialEq)]
pub struct FilamentCurve {
    points: Vec<Vec3>,
    closed: bool,
    tangents: Vec<Vec3>,
    lengths: Vec<f64>,
}

impl FilamentCurve {
    pub const MIN_POINTS: usize = 8;

    pub fn new(points: Vec<Vec3>, closed: bool) -> Result<Self> {
        if points.len() < Self::MIN_POINTS {
            return Err(Error::InvalidCurve(format!(
                "{} points, need at least {}",
                points.len(),
                Self::MIN_POINTS
            )));
        }
        if points.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidCurve("non-finite point".into()));
        }
        let n = points.len();
        let segs = if closed { n } else { n - 1 };
        let mut tangents = Vec::with_capacity(segs);
        let mut lengths = Vec::with_capacity(segs);
        for i in 0..segs {
            let d = points[(i + 1) % n] - points[i];
            let len = d.norm();
            if len == 0.0 {
                return Err(Error::InvalidCurve(format!(
                    "points {i} and {} coincide",
                    (i + 1) % n
                )));
            }
            tangents.push(d / len);
            lengths.push(len);
        }
        Ok(FilamentCurve {
            points,
            closed,
            tangents,
            lengths,
        })
    }

    #[inline]
    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    #[inline]
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    #[inline]
    pub fn segment_count(&self) -> usize {
        self.lengths.len()
    }

    #[inline]
    pub fn segment(&self, i: usize) -> (Vec3, Vec3) {
        (self.points[i], self.points[(i + 1) % self.points.len()])
    }

    pub fn segments(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        (0..self.segment_count()).map(|i| self.segment(i))
    }

    /// Unit tangent of each segment.
    #[inline]
    pub fn tangents(&self) -> &[Vec3] {
        &self.tangents
    }

    #[inline]
    pub fn segment_lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn max_segment_length(&self) -> f64 {
        self.lengths.iter().cloned().fold(0.0, f64::max)
    }

    pub fn mean_segment_length(&self) -> f64 {
        self.length() / self.segment_count() as f64
    }

    pub fn centroid(&self) -> Vec3 {
        self.points.iter().sum::<Vec3>() / self.points.len() as f64
    }

    /// Sum of segment vectors; zero up to rounding for a closed curve.
    pub fn segment_sum(&self) -> Vec3 {
        self.segments().map(|(a, b)| b - a).sum()
    }

    /// Distance from `x` to the nearest segment, with that segment's index.
    pub fn nearest_segment(&self, x: &Vec3) -> (usize, f64) {
        self.segments()
            .enumerate()
            .map(|(i, (a, b))| (i, point_segment_distance(x, &a, &b)))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
    }

    pub fn distance_to(&self, x: &Vec3) -> f64 {
        self.nearest_segment(x).1
    }

    /// Same points traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        let mut pts = self.points.clone();
        pts.reverse();
        FilamentCurve::new(pts, self.closed).expect("reversal keeps a valid curve")
    }

    /// `scale * p + offset` applied to every point.
    pub fn transformed(&self, scale: f64, offset: Vec3) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
        }
        FilamentCurve::new(
            self.points.iter().map(|p| p * scale + offset).collect(),
            self.closed,
        )
    }
}

pub(crate) fn point_segment_distance(x: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let t = ((x - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (x - (a + ab * t)).norm()
}

/// Vortex filaments sharing one circulation constant Γ.
#[derive(Clone, Debug, PartialEq)]
pub struct Link {
    pub curves: Vec<FilamentCurve>,
    pub gamma: f64,
}

impl Link {
    pub fn new(curves: Vec<FilamentCurve>, gamma: f64) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::InvalidArgument("a link needs at least one curve".into()));
        }
        if !gamma.is_finite() {
            return Err(Error::InvalidArgument("gamma must be finite".into()));
        }
        Ok(Link { curves, gamma })
    }

    pub fn single(curve: FilamentCurve, gamma: f64) -> Result<Self> {
        Link::new(vec![curve], gamma)
    }

    pub fn distance_to(&self, x: &Vec3) -> f64 {
        self.curves
            .iter()
            .map(|c| c.distance_to(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_segment_length(&self) -> f64 {
        self.curves
            .iter()
            .map(|c| c.max_segment_length())
            .fold(0.0, f64::max)
    }

    pub fn centroid(&self) -> Vec3 {
        let n: usize = self.curves.iter().map(|c| c.points().len()).sum();
        self.curves
            .iter()
            .flat_map(|c| c.points().iter())
            .sum::<Vec3>()
            / n as f64
    }
}

/// Trefoil `x = sin t + 2 sin 2t, y = cos t - 2 cos 2t, z = -sin 3t` sampled
/// uniformly in `t ∈ [0, 2π)`.
pub fn trefoil_curve(samples: usize) -> Result<FilamentCurve> {
    if samples < 64 {
        return Err(Error::InvalidArgument(format!(
            "trefoil needs at least 64 samples, got {samples}"
        )));
    }
    let pts = (0..samples)
        .map(|i| trefoil_point(2.0 * PI * i as f64 / samples as f64))
        .collect();
    FilamentCurve::new(pts, true)
}

pub fn trefoil_point(t: f64) -> Vec3 {
    Vec3::new(
        t.sin() + 2.0 * (2.0 * t).sin(),
        t.cos() - 2.0 * (2.0 * t).cos(),
        -(3.0 * t).sin(),
    )
}

/// In-plane basis `(e1, e2)` with `e1 × e2 = n̂`. `e1` does not depend on
/// the sign of `normal`, so flipping the normal reverses the traversal.
pub(crate) fn plane_basis(normal: &Vec3) -> Result<(Vec3, Vec3, Vec3)> {
    let len = normal.norm();
    if !(len > 1e-300 && len.is_finite()) {
        return Err(Error::InvalidArgument("degenerate normal".into()));
    }
    let n = normal / len;
    let axis = (0..3)
        .min_by(|&a, &b| n[a].abs().partial_cmp(&n[b].abs()).unwrap())
        .unwrap();
    let mut pick = Vec3::zeros();
    pick[axis] = 1.0;
    let e1 = (pick - n * n.dot(&pick)).normalize();
    let e2 = n.cross(&e1);
    Ok((e1, e2, n))
}

/// Planar circle, right-handed about `normal`.
pub fn circle_curve(radius: f64, center: Vec3, normal: Vec3, samples: usize) -> Result<FilamentCurve> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let (e1, e2, _) = plane_basis(&normal)?;
    let pts = (0..samples)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / samples as f64;
            center + (e1 * t.cos() + e2 * t.sin()) * radius
        })
        .collect();
    FilamentCurve::new(pts, true)
}

/// Grading parameter of [`line_filament`]: spacing grows as `cosh(β u)`.
pub const LINE_GRADING: f64 = 10.0;

/// Open straight filament through `point`, truncated at `±half_length`.
///
/// Samples are graded with `s(u) = L sinh(βu) / sinh β` so the spacing is
/// fine near `point` and coarse at the ends. The truncation changes the
/// field at distance ρ from the line by a relative `O(ρ²/L²)`; keep
/// `half_length` at least 100 times the probe distance.
pub fn line_filament(
    direction: Vec3,
    point: Vec3,
    half_length: f64,
    samples: usize,
) -> Result<FilamentCurve> {
    let len = direction.norm();
    if !(len > 0.0 && len.is_finite()) {
        return Err(Error::InvalidArgument("zero direction".into()));
    }
    if !(half_length > 0.0 && half_length.is_finite()) {
        return Err(Error::InvalidArgument("half_length must be positive".into()));
    }
    if samples < FilamentCurve::MIN_POINTS {
        return Err(Error::InvalidCurve(format!("{samples} samples")));
    }
    let d = direction / len;
    let denom = LINE_GRADING.sinh();
    let pts = (0..samples)
        .map(|i| {
            let u = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
            point + d * (half_length * (LINE_GRADING * u).sinh() / denom)
        })
        .collect();
    FilamentCurve::new(pts, false)
}

/// Resamples `c` at points equally spaced in cumulative arclength.
pub fn reparametrize_arclength(c: &FilamentCurve, samples: usize) -> Result<FilamentCurve> {
    let mut cumulative = Vec::with_capacity(c.segment_count() + 1);
    cumulative.push(0.0);
    for &l in c.segment_lengths() {
        cumulative.push(cumulative.last().unwrap() + l);
    }
    let total = *cumulative.last().unwrap();
    let step = if c.is_closed() {
        total / samples as f64
    } else {
        total / (samples - 1).max(1) as f64
    };
    let mut seg = 0;
    let pts = (0..samples)
        .map(|k| {
            let s = (k as f64 * step).min(total);
            while seg + 1 < c.segment_count() && cumulative[seg + 1] < s {
                seg += 1;
            }
            let (a, b) = c.segment(seg);
            let t = ((s - cumulative[seg]) / c.segment_lengths()[seg]).clamp(0.0, 1.0);
            a + (b - a) * t
        })
        .collect();
    FilamentCurve::new(pts, c.is_closed())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trefoil_reference_points() {
        let p = trefoil_point(0.0);
        assert!((p - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-15);
        let p = trefoil_point(PI);
        assert!((p - Vec3::new(0.0, -3.0, 0.0)).norm() < 1e-14);
        let c = trefoil_curve(128).unwrap();
        assert_eq!(c.points()[0], trefoil_point(0.0));
        // closure: the limit t -> 2π returns to the first sample
        assert!((trefoil_point(2.0 * PI) - c.points()[0]).norm() < 1e-14);
        assert!(c.is_closed());
        assert!(trefoil_curve(63).is_err());
    }

    #[test]
    fn closed_segment_sum_vanishes() {
        let c = trefoil_curve(300).unwrap();
        assert!(c.segment_sum().norm() < 1e-12);
    }

    #[test]
    fn circle_properties() {
        let c = circle_curve(1.0, Vec3::zeros(), Vec3::z(), 256).unwrap();
        let dev = c
            .points()
            .iter()
            .map(|p| (p.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-14);
        let n = 256.0;
        let polygon = n * 2.0 * (PI / n).sin();
        assert!((c.length() - polygon).abs() < 1e-12);
        assert!((c.length() - 2.0 * PI).abs() < 2.0 * PI * PI * PI / (6.0 * n * n) * 1.01);
        // counter-clockwise about +z
        assert!(c.tangents()[0].y > 0.99);
        assert!(circle_curve(1.0, Vec3::zeros(), Vec3::zeros(), 16).is_err());
        assert!(circle_curve(-1.0, Vec3::zeros(), Vec3::z(), 16).is_err());
    }

    #[test]
    fn flipping_normal_reverses_traversal() {
        let n = 64;
        let center = Vec3::new(0.5, -0.2, 1.0);
        let normal = Vec3::new(0.3, -1.0, 0.4);
        let a = circle_curve(0.7, center, normal, n).unwrap();
        let b = circle_curve(0.7, center, -normal, n).unwrap();
        assert!((a.points()[0] - b.points()[0]).norm() < 1e-14);
        for i in 1..n {
            assert!((a.points()[i] - b.points()[n - i]).norm() < 1e-14);
        }
    }

    #[test]
    fn line_along_z() {
        let c = line_filament(Vec3::z(), Vec3::zeros(), 1e4, 801).unwrap();
        assert!(!c.is_closed());
        for p in c.points() {
            assert_eq!(p.x, 0.0);
            assert_eq!(p.y, 0.0);
        }
        for t in c.tangents() {
            assert!((t - Vec3::z()).norm() < 1e-12);
        }
        assert!((c.points()[0].z + 1e4).abs() < 1e-9);
        assert!((c.points()[800].z - 1e4).abs() < 1e-9);
        assert!(line_filament(Vec3::zeros(), Vec3::zeros(), 1.0, 16).is_err());
    }

    #[test]
    fn arclength_resampling() {
        let circle = circle_curve(2.0, Vec3::zeros(), Vec3::z(), 200).unwrap();
        let again = reparametrize_arclength(&circle, 200).unwrap();
        for (a, b) in circle.segment_lengths().iter().zip(again.segment_lengths()) {
            assert!((a - b).abs() < 1e-10);
        }

        let fine = trefoil_curve(20000).unwrap();
        let uni = reparametrize_arclength(&fine, 20000).unwrap();
        let lens = uni.segment_lengths();
        let mean = lens.iter().sum::<f64>() / lens.len() as f64;
        let var = lens.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / lens.len() as f64;
        assert!(var.sqrt() / mean < 1e-3, "rel std {}", var.sqrt() / mean);
        assert!((uni.length() - fine.length()).abs() / fine.length() < 1e-6);
    }

    #[test]
    fn rejects_short_and_repeated() {
        let pts: Vec<Vec3> = (0..5).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        assert!(FilamentCurve::new(pts, false).is_err());
        let mut pts: Vec<Vec3> = (0..10).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        pts[4] = pts[3];
        assert!(FilamentCurve::new(pts, false).is_err());
    }
}
