//! A packet passing an ideal solenoid: the flux fixes ν, and only
//! non-integer flux quanta radiate.

use std::f64::consts::PI;

use qvortex::evolution::{evolve_nonlinear, EvolveConfig};
use qvortex::grid::GridSpec;
use qvortex::identity::{ab_state, AbConvention, SolenoidSpec};
use qvortex::radiation::ab_energy_loss;
use qvortex::wavefunction::PhysicalConstants;
use qvortex::Vec3;

fn main() -> qvortex::Result<()> {
    let c = PhysicalConstants::default();
    let spec = GridSpec::centered(48, 6.0)?;
    for flux in [0.0, PI, 2.0 * PI, 3.0 * PI] {
        let solenoid = SolenoidSpec { point: [0.0; 3], direction: [0.0, 0.0, 1.0], radius: 0.5, flux };
        let ab = ab_state(
            &solenoid,
            spec,
            Vec3::new(-3.0, 0.0, 0.0),
            1.0,
            Vec3::new(1.5, 0.0, 0.0),
            2,
            1,
            &c,
            AbConvention::Natural,
        )?;
        let cfg = EvolveConfig::new(0.005, 60).with_nu(ab.nu).with_stride(10);
        let series = evolve_nonlinear(&ab.psi_nu, &cfg, &c)?;
        println!(
            "flux {:.4}  Γ_eff {:.4}  ν {:.3}  single valued {}  ΔE {:.6e}",
            flux,
            ab.gamma,
            ab.nu,
            ab.quantization.single_valued,
            ab_energy_loss(&series, &c)?
        );
    }
    Ok(())
}
