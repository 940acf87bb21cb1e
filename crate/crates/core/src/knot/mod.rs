//! Filament curves, links and oriented spanning surfaces.

mod curve;
mod mesh;

pub use curve::{
    circle_curve, line_filament, reparametrize_arclength, trefoil_curve, trefoil_point,
    FilamentCurve, Link, LINE_GRADING,
};
#[allow(unused_imports)]
pub(crate) use curve::{plane_basis, point_segment_distance};
pub use mesh::{disk_mesh, load_seifert_mesh, SeifertMesh};
