//! FFT-based differential operators and grid quadrature.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{ComplexGrid3, GridSpec, RealGrid3, VectorGrid3};
use crate::Result;

/// Compensated (Neumaier) summation with a fixed left-to-right order.
pub(crate) fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Riemann sum times cell volume.
pub fn integrate(g: &ComplexGrid3) -> Result<Complex64> {
    g.check_finite()?;
    let dv = g.spec().cell_volume();
    let re = neumaier_sum(g.values().iter().map(|v| v.re));
    let im = neumaier_sum(g.values().iter().map(|v| v.im));
    Ok(Complex64::new(re * dv, im * dv))
}

pub fn integrate_real(g: &RealGrid3) -> Result<f64> {
    g.check_finite()?;
    Ok(neumaier_sum(g.values().iter().copied()) * g.spec().cell_volume())
}

/// Gradient by multiplication with `ik` per axis.
pub fn spectral_gradient(g: &ComplexGrid3) -> Result<[ComplexGrid3; 3]> {
    Spectral::new(*g.spec()).gradient(g)
}

/// Laplacian by multiplication with `-|k|²`.
pub fn spectral_laplacian(g: &ComplexGrid3) -> Result<ComplexGrid3> {
    Spectral::new(*g.spec()).laplacian(g)
}

/// FFT plans and wavenumber tables for one grid shape.
///
/// Odd-order derivatives drop the Nyquist mode of even-length axes (its
/// derivative is not representable as a real field); even-order ones keep
/// it with `k = -π/h`.
pub struct Spectral {
    spec: GridSpec,
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
    k: [Vec<f64>; 3],
    k_odd: [Vec<f64>; 3],
}

impl Spectral {
    pub fn new(spec: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let forward = [0, 1, 2].map(|a| planner.plan_fft_forward(spec.dims[a]));
        let inverse = [0, 1, 2].map(|a| planner.plan_fft_inverse(spec.dims[a]));
        let k = [0, 1, 2].map(|a| wavenumbers(spec.dims[a], spec.spacing[a]));
        let k_odd = [0, 1, 2].map(|a| {
            let n = spec.dims[a];
            let mut k = wavenumbers(n, spec.spacing[a]);
            if n.is_multiple_of(2) {
                k[n / 2] = 0.0;
            }
            k
        });
        Spectral {
            spec,
            forward,
            inverse,
            k,
            k_odd,
        }
    }

    #[inline]
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Signed wavenumber of index `idx` along `axis` (Nyquist kept).
    #[inline]
    pub fn k(&self, axis: usize, idx: usize) -> f64 {
        self.k[axis][idx]
    }

    /// Wavenumber used for odd derivatives (Nyquist zeroed).
    #[inline]
    pub fn k_odd(&self, axis: usize, idx: usize) -> f64 {
        self.k_odd[axis][idx]
    }

    #[inline]
    pub fn k_squared(&self, i: usize, j: usize, k: usize) -> f64 {
        self.k[0][i].powi(2) + self.k[1][j].powi(2) + self.k[2][k].powi(2)
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse transform in place, scaled by `1/N`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / self.spec.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        let [nx, ny, nz] = self.spec.dims;
        debug_assert_eq!(data.len(), nx * ny * nz);

        // x: contiguous rows
        plans[0].process(data);

        // y: transpose each z-slab so y runs fastest
        let mut slab = vec![Complex64::default(); nx * ny];
        for k in 0..nz {
            let base = k * nx * ny;
            for j in 0..ny {
                for i in 0..nx {
                    slab[j + ny * i] = data[base + i + nx * j];
                }
            }
            plans[1].process(&mut slab);
            for j in 0..ny {
                for i in 0..nx {
                    data[base + i + nx * j] = slab[j + ny * i];
                }
            }
        }

        // z: full transpose so z runs fastest
        let mut buf = vec![Complex64::default(); data.len()];
        for k in 0..nz {
            for j in 0..ny {
                let row = nx * (j + ny * k);
                for i in 0..nx {
                    buf[k + nz * (i + nx * j)] = data[row + i];
                }
            }
        }
        plans[2].process(&mut buf);
        for k in 0..nz {
            for j in 0..ny {
                let row = nx * (j + ny * k);
                for i in 0..nx {
                    data[row + i] = buf[k + nz * (i + nx * j)];
                }
            }
        }
    }

    pub fn spectrum(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut data = values.to_vec();
        self.forward(&mut data);
        data
    }

    pub fn spectrum_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut data);
        data
    }

    /// Multiplies a spectrum by `mult(i, j, k)` and returns the inverse
    /// transform.
    pub fn apply(
        &self,
        spectrum: &[Complex64],
        mult: impl Fn(usize, usize, usize) -> Complex64,
    ) -> Vec<Complex64> {
        let [nx, ny, _] = self.spec.dims;
        let mut out: Vec<Complex64> = spectrum
            .iter()
            .enumerate()
            .map(|(idx, &s)| {
                let i = idx % nx;
                let j = (idx / nx) % ny;
                let k = idx / (nx * ny);
                s * mult(i, j, k)
            })
            .collect();
        self.inverse(&mut out);
        out
    }

    fn derivative_mult(&self, axis: usize) -> impl Fn(usize, usize, usize) -> Complex64 + '_ {
        move |i, j, k| {
            let idx = [i, j, k][axis];
            Complex64::new(0.0, self.k_odd[axis][idx])
        }
    }

    pub fn gradient(&self, g: &ComplexGrid3) -> Result<[ComplexGrid3; 3]> {
        g.check_finite()?;
        let s = self.spectrum(g.values());
        let comp = |axis| {
            ComplexGrid3 {
                spec: self.spec,
                values: self.apply(&s, self.derivative_mult(axis)),
            }
        };
        Ok([comp(0), comp(1), comp(2)])
    }

    pub fn laplacian(&self, g: &ComplexGrid3) -> Result<ComplexGrid3> {
        g.check_finite()?;
        let s = self.spectrum(g.values());
        Ok(ComplexGrid3 {
            spec: self.spec,
            values: self.apply(&s, |i, j, k| Complex64::new(-self.k_squared(i, j, k), 0.0)),
        })
    }

    pub fn real_gradient(&self, g: &RealGrid3) -> Result<VectorGrid3> {
        g.check_finite()?;
        let s = self.spectrum_real(g.values());
        let comp = |axis| -> Vec<f64> {
            self.apply(&s, self.derivative_mult(axis))
                .into_iter()
                .map(|v| v.re)
                .collect()
        };
        VectorGrid3::new(self.spec, [comp(0), comp(1), comp(2)])
    }

    pub fn real_laplacian(&self, g: &RealGrid3) -> Result<RealGrid3> {
        g.check_finite()?;
        let s = self.spectrum_real(g.values());
        let values = self
            .apply(&s, |i, j, k| Complex64::new(-self.k_squared(i, j, k), 0.0))
            .into_iter()
            .map(|v| v.re)
            .collect();
        Ok(RealGrid3 {
            spec: self.spec,
            values,
        })
    }

    pub fn divergence(&self, v: &VectorGrid3) -> Result<RealGrid3> {
        v.check_finite()?;
        let mut acc = vec![Complex64::default(); self.spec.len()];
        for axis in 0..3 {
            let s = self.spectrum_real(v.component(axis));
            let mult = self.derivative_mult(axis);
            acc.iter_mut()
                .zip(s)
                .enumerate()
                .for_each(|(idx, (a, s))| {
                    let [i, j, k] = self.spec.coords(idx);
                    *a += s * mult(i, j, k);
                });
        }
        self.inverse(&mut acc);
        Ok(RealGrid3 {
            spec: self.spec,
            values: acc.into_iter().map(|v| v.re).collect(),
        })
    }

    pub fn curl(&self, v: &VectorGrid3) -> Result<VectorGrid3> {
        v.check_finite()?;
        let s: [Vec<Complex64>; 3] = [0, 1, 2].map(|a| self.spectrum_real(v.component(a)));
        // (curl v)_a = d_b v_c - d_c v_b for cyclic (a, b, c)
        let comp = |a: usize| -> Vec<f64> {
            let b = (a + 1) % 3;
            let c = (a + 2) % 3;
            let db = self.derivative_mult(b);
            let dc = self.derivative_mult(c);
            let mixed: Vec<Complex64> = (0..self.spec.len())
                .map(|idx| {
                    let [i, j, k] = self.spec.coords(idx);
                    db(i, j, k) * s[c][idx] - dc(i, j, k) * s[b][idx]
                })
                .collect();
            let mut out = mixed;
            self.inverse(&mut out);
            out.into_iter().map(|v| v.re).collect()
        };
        VectorGrid3::new(self.spec, [comp(0), comp(1), comp(2)])
    }
}

fn wavenumbers(n: usize, h: f64) -> Vec<f64> {
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * h);
    (0..n)
        .map(|j| {
            let m = if j < n.div_ceil(2) { j as f64 } else { j as f64 - n as f64 };
            m * dk
        })
        .collect()
}
