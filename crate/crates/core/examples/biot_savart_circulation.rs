//! Biot-Savart velocity of ring, trefoil and straight filaments, and the
//! circulation around probe loops that link them.

use std::f64::consts::PI;

use qvortex::kernels::{biot_savart_velocity, circulation, winding_number, KernelConfig, ProbeLoop};
use qvortex::knot::{circle_curve, line_filament, trefoil_curve, trefoil_point, Link};
use qvortex::Vec3;

fn main() -> qvortex::Result<()> {
    let cfg = KernelConfig::default();
    let gamma = 2.0 * PI;

    let ring = Link::single(circle_curve(1.0, Vec3::zeros(), Vec3::z(), 256)?, gamma)?;
    let u = biot_savart_velocity(&ring, &Vec3::zeros(), &cfg)?;
    println!("ring centre velocity    {:.8} (Γ/2R = {:.8})", u.z, gamma / 2.0);

    let linked = ProbeLoop::circle(Vec3::new(1.0, 0.0, 0.0), Vec3::y(), 0.25, 128)?;
    let free = ProbeLoop::circle(Vec3::new(3.0, 0.0, 0.0), Vec3::y(), 0.25, 128)?;
    println!("ring linked loop        Γ_probe/Γ = {:.8}", circulation(&ring, &linked, &cfg)? / gamma);
    println!("ring unlinked loop      Γ_probe/Γ = {:.2e}", circulation(&ring, &free, &cfg)? / gamma);
    println!("twice around            winding {}", winding_number(&ring, &linked.repeated(2)?, &cfg)?);

    let line = Link::single(line_filament(Vec3::z(), Vec3::zeros(), 1000.0, 801)?, gamma)?;
    let r = 0.5;
    let u = biot_savart_velocity(&line, &Vec3::new(r, 0.0, 0.0), &cfg)?;
    println!("line |u| at ρ = {r}       {:.8} (Γ/2πρ = {:.8})", u.norm(), gamma / (2.0 * PI * r));

    let trefoil = Link::single(trefoil_curve(1024)?, gamma)?;
    let p = trefoil_point(0.3);
    let t = (trefoil_point(0.3 + 1e-6) - trefoil_point(0.3 - 1e-6)).normalize();
    let probe = ProbeLoop::circle(p, t, 0.2, 128)?;
    println!("trefoil linked loop     Γ_probe/Γ = {:.8}", circulation(&trefoil, &probe, &cfg)? / gamma);
    Ok(())
}
