//! Multi-valued ring-vortex state: quantization, sheet phases, the
//! single-valued ν-transformed state and the phase circulation.

use std::f64::consts::PI;

use qvortex::grid::GridSpec;
use qvortex::kernels::ProbeLoop;
use qvortex::knot::{circle_curve, disk_mesh, Link};
use qvortex::madelung::phase_circulation;
use qvortex::wavefunction::{
    build_initial_state, quantization_check, select_nu, EnvelopeSpec, PhysicalConstants, StateSpec,
};
use qvortex::Vec3;

fn main() -> qvortex::Result<()> {
    let c = PhysicalConstants::default();
    let spec = GridSpec::centered(48, 3.0)?;
    let probe = ProbeLoop::circle(Vec3::new(1.0, 0.0, 0.0), Vec3::y(), 0.4, 256)?;

    for quanta in [1.0, 1.5] {
        let gamma = quanta * 2.0 * PI * c.hbar / c.mass;
        let curve = circle_curve(1.0, Vec3::zeros(), Vec3::z(), 128)?;
        let mesh = disk_mesh(&curve, 1)?;
        let link = Link::single(curve, gamma)?;
        let state = build_initial_state(
            &StateSpec::new(spec, EnvelopeSpec { center: None, width: 1.0 }, 2),
            &link,
            Some(&mesh),
            &c,
        )?;
        let q = quantization_check(gamma, &c);
        let nu = select_nu(gamma, &c, 1)?.nu;
        println!("Γ = {quanta} quanta");
        println!("  single valued         {} (nearest k = {})", q.single_valued, q.k_nearest);
        for sheet in 0..3 {
            let f = qvortex::wavefunction::sheet_phase(&state, sheet);
            println!("  sheet {sheet} factor        {:+.6} {:+.6}i", f.re, f.im);
        }
        println!("  nodal ratio           {:.3e}", state.nodal_ratio()?);
        let psi = state.psi();
        let psi_nu = state.psi_nu(nu);
        println!("  ν                     {nu}");
        // sampled ψ only carries whole 2π windings; the rest is the jump at the cut
        println!("  ∮u·dx of sampled ψ / Γ {:.6}", phase_circulation(&psi, &probe, &c)? / gamma);
        println!("  ν ∮u·dx of ψ_ν / Γ    {:.6}", phase_circulation(&psi_nu, &probe, &c)? * nu / gamma);
    }
    Ok(())
}
