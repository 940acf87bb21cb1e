//! Closed-form Schrödinger solutions used as initial data and as
//! reference solutions for the solvers and the identity residuals.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::grid::{ComplexGrid3, GridSpec, RealGrid3};
use crate::Vec3;

/// Free Gaussian packet `ψ(x,0) ∝ exp(−|x−x0|²/4σ0² + i k0·(x−x0))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeGaussian {
    pub sigma0: f64,
    pub x0: Vec3,
    pub k0: Vec3,
    pub hbar: f64,
    pub mass: f64,
}

impl FreeGaussian {
    pub fn at_rest(sigma0: f64, x0: Vec3, hbar: f64, mass: f64) -> Self {
        FreeGaussian {
            sigma0,
            x0,
            k0: Vec3::zeros(),
            hbar,
            mass,
        }
    }

    /// `s_t = σ0² + iħt/2m`.
    pub fn s(&self, t: f64) -> Complex64 {
        Complex64::new(self.sigma0 * self.sigma0, self.hbar * t / (2.0 * self.mass))
    }

    /// Width of `|ψ|²` along each axis.
    pub fn width(&self, t: f64) -> f64 {
        let tau = self.hbar * t / (2.0 * self.mass * self.sigma0 * self.sigma0);
        self.sigma0 * (1.0 + tau * tau).sqrt()
    }

    pub fn velocity(&self) -> Vec3 {
        self.k0 * (self.hbar / self.mass)
    }

    pub fn amplitude(&self, x: &Vec3, t: f64) -> f64 {
        let s2 = self.s(t).norm_sqr();
        let y = x - self.x0 - self.velocity() * t;
        let s0 = self.sigma0 * self.sigma0;
        (2.0 * PI * s0).powf(-0.75) * (s0 * s0 / s2).powf(0.75)
            * (-y.norm_squared() * s0 / (4.0 * s2)).exp()
    }

    /// `S(x,t)/ħ`.
    pub fn phase(&self, x: &Vec3, t: f64) -> f64 {
        let s2 = self.s(t).norm_sqr();
        let y = x - self.x0 - self.velocity() * t;
        let a = self.hbar * t / (2.0 * self.mass);
        y.norm_squared() * a / (4.0 * s2) + self.k0.dot(&(x - self.x0))
            - self.hbar * self.k0.norm_squared() * t / (2.0 * self.mass)
            - 1.5 * (a / (self.sigma0 * self.sigma0)).atan()
    }

    pub fn psi(&self, x: &Vec3, t: f64) -> Complex64 {
        Complex64::from_polar(self.amplitude(x, t), self.phase(x, t))
    }

    pub fn grid(&self, spec: GridSpec, t: f64) -> ComplexGrid3 {
        ComplexGrid3::from_fn(spec, |x| self.psi(&x, t))
    }

    /// Amplitude `R` and phase `S/ħ` sampled on `spec`.
    pub fn rs_grids(&self, spec: GridSpec, t: f64) -> (RealGrid3, RealGrid3) {
        (
            RealGrid3::from_fn(spec, |x| self.amplitude(&x, t)),
            RealGrid3::from_fn(spec, |x| self.phase(&x, t)),
        )
    }
}

/// Ground and coherent states of `V = ½ m ω² |x − c|²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicOscillator {
    pub omega: f64,
    pub center: Vec3,
    pub hbar: f64,
    pub mass: f64,
}

impl HarmonicOscillator {
    pub fn potential(&self, x: &Vec3) -> f64 {
        0.5 * self.mass * self.omega * self.omega * (x - self.center).norm_squared()
    }

    /// Ground-state width of `|ψ|²`: `√(ħ/2mω)`.
    pub fn ground_width(&self) -> f64 {
        (self.hbar / (2.0 * self.mass * self.omega)).sqrt()
    }

    pub fn ground_energy(&self) -> f64 {
        1.5 * self.hbar * self.omega
    }

    pub fn ground_amplitude(&self, x: &Vec3) -> f64 {
        let a = self.mass * self.omega / self.hbar;
        (a / PI).powf(0.75) * (-0.5 * a * (x - self.center).norm_squared()).exp()
    }

    /// `S/ħ = −E₀ t/ħ`.
    pub fn ground_phase(&self, t: f64) -> f64 {
        -1.5 * self.omega * t
    }

    pub fn ground_rs_grids(&self, spec: GridSpec, t: f64) -> (RealGrid3, RealGrid3) {
        let phase = self.ground_phase(t);
        (
            RealGrid3::from_fn(spec, |x| self.ground_amplitude(&x)),
            RealGrid3::filled(spec, phase),
        )
    }

    /// Classical phase-space point `(x_c, p_c)` at time `t` starting from
    /// displacement `d0` and momentum `p0`.
    pub fn classical(&self, d0: Vec3, p0: Vec3, t: f64) -> (Vec3, Vec3) {
        let (s, c) = (self.omega * t).sin_cos();
        let mw = self.mass * self.omega;
        (d0 * c + p0 * (s / mw), p0 * c - d0 * (mw * s))
    }

    /// Coherent state displaced by `d0` from the centre with momentum `p0`.
    pub fn coherent(&self, d0: Vec3, p0: Vec3, x: &Vec3, t: f64) -> Complex64 {
        let (xc, pc) = self.classical(d0, p0, t);
        let y = x - self.center;
        let gamma = -1.5 * self.omega * t - (pc.dot(&xc) - p0.dot(&d0)) / (2.0 * self.hbar);
        let phase = pc.dot(&y) / self.hbar + gamma;
        let r = self.ground_amplitude(&(x - xc));
        Complex64::from_polar(r, phase)
    }

    pub fn coherent_grid(&self, spec: GridSpec, d0: Vec3, p0: Vec3, t: f64) -> ComplexGrid3 {
        ComplexGrid3::from_fn(spec, |x| self.coherent(d0, p0, &x, t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{integrate_real, Spectral};
    use crate::vec3;

    fn packet() -> FreeGaussian {
        FreeGaussian {
            sigma0: 1.0,
            x0: vec3(0.2, -0.1, 0.0),
            k0: vec3(0.5, 0.0, -0.3),
            hbar: 1.0,
            mass: 1.0,
        }
    }

    #[test]
    fn width_law_and_norm() {
        let g = packet();
        assert_eq!(g.width(0.0), 1.0);
        assert!((g.width(2.0) - 2f64.sqrt()).abs() < 1e-15);
        let spec = GridSpec::centered(48, 10.0).unwrap();
        for t in [0.0, 1.5] {
            let rho = RealGrid3::from_fn(spec, |x| g.amplitude(&x, t).powi(2));
            assert!((integrate_real(&rho).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn free_packet_solves_schrodinger() {
        // iħ∂ψ/∂t = −ħ²/2m Δψ at a sample of interior points
        let g = packet();
        let spec = GridSpec::centered(48, 10.0).unwrap();
        let sp = Spectral::new(spec);
        let t = 0.7;
        let dt = 1e-4;
        let lap = sp.laplacian(&g.grid(spec, t)).unwrap();
        let plus = g.grid(spec, t + dt);
        let minus = g.grid(spec, t - dt);
        let mut worst: f64 = 0.0;
        for idx in (0..spec.len()).step_by(97) {
            let dpsi = (plus.values()[idx] - minus.values()[idx]) / (2.0 * dt);
            let r = Complex64::i() * dpsi + 0.5 * lap.values()[idx];
            worst = worst.max(r.norm());
        }
        assert!(worst < 1e-7, "{worst}");
    }

    #[test]
    fn coherent_state_solves_schrodinger() {
        let ho = HarmonicOscillator {
            omega: 1.3,
            center: Vec3::zeros(),
            hbar: 1.0,
            mass: 1.0,
        };
        let spec = GridSpec::centered(48, 8.0).unwrap();
        let sp = Spectral::new(spec);
        let (d0, p0) = (vec3(1.0, 0.0, -0.5), vec3(0.0, 0.7, 0.2));
        let t = 0.4;
        let dt = 1e-4;
        let psi = ho.coherent_grid(spec, d0, p0, t);
        let lap = sp.laplacian(&psi).unwrap();
        let plus = ho.coherent_grid(spec, d0, p0, t + dt);
        let minus = ho.coherent_grid(spec, d0, p0, t - dt);
        let mut worst: f64 = 0.0;
        for idx in (0..spec.len()).step_by(89) {
            let x = spec.position_of(idx);
            let h = -0.5 * lap.values()[idx] + ho.potential(&x) * psi.values()[idx];
            let dpsi = (plus.values()[idx] - minus.values()[idx]) / (2.0 * dt);
            worst = worst.max((Complex64::i() * dpsi - h).norm());
        }
        assert!(worst < 1e-7, "{worst}");
        // zero displacement is the ground state
        let x = vec3(0.3, 0.1, -0.2);
        let c = ho.coherent(Vec3::zeros(), Vec3::zeros(), &x, t);
        let g = Complex64::from_polar(ho.ground_amplitude(&x), ho.ground_phase(t));
        assert!((c - g).norm() < 1e-15);
    }
}
