//! Spectral derivatives on a periodic grid and a QVG1 round trip.

use qvortex::grid::{integrate_real, read_grid, spectral_laplacian, write_grid, ComplexGrid3, GridSpec};
use qvortex::{Complex64, Vec3};

fn main() -> qvortex::Result<()> {
    let spec = GridSpec::centered(32, 6.0)?;
    let k = Vec3::new(0.5, 0.0, -0.25);
    let mut psi = ComplexGrid3::from_fn(spec, |x| {
        Complex64::from_polar((-x.norm_squared() / 2.0).exp(), k.dot(&x))
    });
    psi.normalize();

    // Δ[e^{-r²/2 + ik·x}] = (r² − 3 − |k|² − 2i k·x) e^{...}
    let lap = spectral_laplacian(&psi)?;
    let worst = (0..spec.len())
        .map(|i| {
            let x = spec.position_of(i);
            let exact = Complex64::new(x.norm_squared() - 3.0 - k.norm_squared(), -2.0 * k.dot(&x)) * psi.values()[i];
            (lap.values()[i] - exact).norm()
        })
        .fold(0.0, f64::max);
    println!("grid {:?}, spacing {:.4}", spec.dims, spec.spacing[0]);
    println!("norm                    {:.12}", integrate_real(&psi.map(|z| z.norm_sqr()))?);
    println!("max |Δψ − exact|        {worst:.3e}");

    let path = std::env::temp_dir().join("qvortex_grid_io.qvg");
    write_grid(&psi, &path)?;
    let back = read_grid(&path)?;
    let identical = back
        .values()
        .iter()
        .zip(psi.values())
        .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    println!("QVG1 round trip bitwise {identical} ({})", path.display());
    std::fs::remove_file(&path).ok();
    Ok(())
}
