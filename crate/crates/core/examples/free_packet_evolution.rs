//! Split-step evolution of a free packet against the analytic width law,
//! with norm and energy monitors.

use qvortex::analytic::FreeGaussian;
use qvortex::evolution::{evolve_linear, monitor, EvolveConfig};
use qvortex::grid::{integrate_real, ComplexGrid3, GridSpec};
use qvortex::wavefunction::PhysicalConstants;
use qvortex::Vec3;

fn width(psi: &ComplexGrid3) -> qvortex::Result<f64> {
    let spec = *psi.spec();
    let rho = psi.map(|z| z.norm_sqr());
    let n = integrate_real(&rho)?;
    let mean = integrate_real(&qvortex::grid::RealGrid3::from_fn(spec, |x| x.x).zip_map(&rho, |x, r| x * r)?)? / n;
    let var = integrate_real(&qvortex::grid::RealGrid3::from_fn(spec, |x| (x.x - mean).powi(2)).zip_map(&rho, |x, r| x * r)?)? / n;
    Ok(var.sqrt())
}

fn main() -> qvortex::Result<()> {
    let c = PhysicalConstants::default();
    let spec = GridSpec::centered(48, 12.0)?;
    let packet = FreeGaussian::at_rest(1.0, Vec3::zeros(), c.hbar, c.mass);
    let cfg = EvolveConfig::new(0.02, 100).with_stride(20);
    let series = evolve_linear(&packet.grid(spec, 0.0), &cfg, &c)?;
    let records = monitor(&series, &cfg, &c)?;
    println!("{:>6} {:>10} {:>10} {:>14} {:>14}", "t", "width", "exact", "norm", "energy");
    for (f, m) in series.frames.iter().zip(&records) {
        println!(
            "{:>6.2} {:>10.6} {:>10.6} {:>14.12} {:>14.10}",
            f.time,
            width(&f.psi)?,
            packet.width(f.time),
            m.norm,
            m.energy
        );
    }
    Ok(())
}
