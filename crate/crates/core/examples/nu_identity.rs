//! Residuals of the original and the ν-transformed equation on the same
//! amplitude and phase, for a free packet and a harmonic-oscillator state.

use qvortex::analytic::{FreeGaussian, HarmonicOscillator};
use qvortex::evolution::Potential;
use qvortex::grid::GridSpec;
use qvortex::identity::{identity_residual, TimeSlices};
use qvortex::wavefunction::PhysicalConstants;
use qvortex::Vec3;

fn main() -> qvortex::Result<()> {
    let c = PhysicalConstants::default();
    let (dt, t) = (1e-4, 0.3);

    let free = FreeGaussian {
        k0: Vec3::new(0.5, 0.0, 0.0),
        ..FreeGaussian::at_rest(1.2, Vec3::zeros(), c.hbar, c.mass)
    };
    let spec = GridSpec::centered(48, 10.0)?;
    let slices = TimeSlices::from_fn(spec, t, dt, |x, s| (free.amplitude(x, s), free.phase(x, s)))?;
    println!("free packet");
    for nu in [0.5, 1.0, 1.5, 3.0] {
        let r = identity_residual(&slices, &Potential::Free, nu, &c)?;
        println!("  ν = {nu:<4} res1 {:.2e}  res2 {:.2e}", r.res1, r.res2);
    }

    let ho = HarmonicOscillator { omega: 1.0, center: Vec3::zeros(), hbar: c.hbar, mass: c.mass };
    let spec = GridSpec::centered(32, 6.0)?;
    let slices = TimeSlices::from_fn(spec, t, dt, |x, s| (ho.ground_amplitude(x), ho.ground_phase(s)))?;
    let v = Potential::Harmonic { omega: 1.0, center: Vec3::zeros() };
    println!("oscillator ground state");
    for nu in [0.5, 1.5, 3.0] {
        let r = identity_residual(&slices, &v, nu, &c)?;
        println!("  ν = {nu:<4} res1 {:.2e}  res2 {:.2e}", r.res1, r.res2);
    }
    Ok(())
}
