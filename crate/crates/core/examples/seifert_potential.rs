//! Solid-angle potential of a vortex ring, its jump across the spanning
//! disk, and the OFF export of that disk.

use std::f64::consts::PI;

use qvortex::kernels::{scalar_potential, solid_angle};
use qvortex::knot::{circle_curve, disk_mesh, Link, SeifertMesh};
use qvortex::Vec3;

fn main() -> qvortex::Result<()> {
    let gamma = 2.0 * PI;
    let curve = circle_curve(1.0, Vec3::zeros(), Vec3::z(), 128)?;
    let mesh = disk_mesh(&curve, 4)?;
    mesh.check_orientation()?;
    let link = Link::single(curve, gamma)?;
    println!("disk: {} triangles, area {:.6} (π = {:.6})", mesh.triangles().len(), mesh.area(), PI);

    for z in [-2.0, -0.5, 0.5, 2.0] {
        let x = Vec3::new(0.0, 0.0, z);
        let exact = 2.0 * PI * (1.0 - z.abs() / (1.0 + z * z).sqrt()) * z.signum();
        println!("Ω(0,0,{z:+.1})            {:+.10} (on axis {:+.10})", solid_angle(&mesh, &x)?, exact);
    }

    let p = Vec3::new(0.3, -0.2, 0.0);
    for d in [1e-2, 1e-4, 1e-6] {
        let up = scalar_potential(&link, &mesh, &(p + Vec3::z() * d))?;
        let down = scalar_potential(&link, &mesh, &(p - Vec3::z() * d))?;
        println!("φ(+d) − φ(−d), d = {d:.0e} {:+.10} (−Γ = {:+.10})", up - down, -gamma);
    }

    let path = std::env::temp_dir().join("qvortex_disk.off");
    mesh.write_off(&path)?;
    let back = SeifertMesh::read_off(&path)?;
    back.validate_against(&link, 1e-9)?;
    println!("OFF round trip          {} vertices ({})", back.vertices().len(), path.display());
    std::fs::remove_file(&path).ok();
    Ok(())
}
