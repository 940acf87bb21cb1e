//! Guidance-equation trajectories through an evolved coherent state of
//! the harmonic oscillator. The packet centre follows the classical orbit.

use qvortex::analytic::HarmonicOscillator;
use qvortex::evolution::{evolve_linear, EvolveConfig, Potential};
use qvortex::grid::GridSpec;
use qvortex::madelung::advect_trajectory;
use qvortex::wavefunction::PhysicalConstants;
use qvortex::Vec3;

fn main() -> qvortex::Result<()> {
    let c = PhysicalConstants::default();
    let ho = HarmonicOscillator { omega: 1.0, center: Vec3::zeros(), hbar: c.hbar, mass: c.mass };
    let spec = GridSpec::centered(32, 6.0)?;
    let (d0, p0) = (Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0));
    let cfg = EvolveConfig::new(0.01, 300)
        .with_potential(Potential::Harmonic { omega: 1.0, center: Vec3::zeros() })
        .with_stride(10);
    let series = evolve_linear(&ho.coherent_grid(spec, d0, p0, 0.0), &cfg, &c)?;
    let frames: Vec<_> = series.frames.iter().map(|f| f.psi.clone()).collect();
    let frame_dt = cfg.dt * cfg.snapshot_stride as f64;

    for offset in [Vec3::zeros(), Vec3::new(0.3, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.4)] {
        let traj = advect_trajectory(&frames, frame_dt, d0 + offset, 20, &c)?;
        let (t, x) = (*traj.times.last().unwrap(), *traj.points.last().unwrap());
        let (xc, _) = ho.classical(d0, p0, t);
        println!(
            "start {:+.2?}  end t = {t:.2} at {:+.4?}  classical centre {:+.4?}  offset now {:.4}  truncated {}",
            (d0 + offset).as_slice(),
            x.as_slice(),
            xc.as_slice(),
            (x - xc).norm(),
            traj.truncated
        );
    }
    Ok(())
}
