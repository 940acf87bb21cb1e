//! Multi-valued vortex states on a reference Riemann sheet.
//!
//! A state is stored as its amplitude `R = |Φ|/I_n` and its reference-sheet
//! phase `S/ħ = m(φ_f + φ_w)/ħ`, cut at the Seifert mesh. Other sheets
//! differ by the constant factor [`sheet_phase`]; the ν-transformed
//! single-valued state is `R e^{iS/(νħ)}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::{ComplexGrid3, Grid3, GridSpec, RealGrid3};
use crate::kernels::{link_regularizer, solid_angle_upper, KernelConfig};
use crate::knot::{Link, SeifertMesh};
use crate::{Error, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
    pub charge: f64,
    pub c: f64,
}

impl Default for PhysicalConstants {
    /// Natural units `ħ = m = q = c = 1`.
    fn default() -> Self {
        PhysicalConstants {
            hbar: 1.0,
            mass: 1.0,
            charge: 1.0,
            c: 1.0,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("hbar", self.hbar), ("mass", self.mass), ("c", self.c)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.charge.is_finite() {
            return Err(Error::InvalidArgument("charge must be finite".into()));
        }
        Ok(())
    }

    /// `mΓ/2πħ`, the circulation in quanta.
    pub fn circulation_quanta(&self, gamma: f64) -> f64 {
        self.mass * gamma / (2.0 * PI * self.hbar)
    }
}

/// Isotropic Gaussian envelope `Φ(x) = exp(−|x − c|²/2w²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSpec {
    /// Defaults to the filament centroid.
    #[serde(default)]
    pub center: Option<[f64; 3]>,
    pub width: f64,
}

impl EnvelopeSpec {
    fn center_or(&self, link: &Link) -> Vec3 {
        self.center.map(Vec3::from).unwrap_or_else(|| link.centroid())
    }
}

/// Single-valued background velocity potential `φ_w`.
#[derive(Clone, Debug, PartialEq)]
pub enum BackgroundFlow {
    /// Uniform flow, `φ_w = v · x`.
    Uniform(Vec3),
    /// Arbitrary potential sampled on the state grid.
    Grid(RealGrid3),
}

impl BackgroundFlow {
    fn at(&self, idx: usize, x: &Vec3) -> f64 {
        match self {
            BackgroundFlow::Uniform(v) => v.dot(x),
            BackgroundFlow::Grid(g) => g.values()[idx],
        }
    }
}

#[derive(Clone, Debug)]
pub struct StateSpec {
    pub grid: GridSpec,
    pub envelope: EnvelopeSpec,
    pub n: u32,
    pub phi_w: Option<BackgroundFlow>,
    pub kernel: KernelConfig,
}

impl StateSpec {
    pub fn new(grid: GridSpec, envelope: EnvelopeSpec, n: u32) -> Self {
        StateSpec {
            grid,
            envelope,
            n,
            phi_w: None,
            kernel: KernelConfig::default(),
        }
    }

    pub fn with_flow(mut self, flow: BackgroundFlow) -> Self {
        self.phi_w = Some(flow);
        self
    }
}

/// Reference-sheet vortex state with its sheet bookkeeping.
#[derive(Clone, Debug)]
pub struct MultiValuedState {
    amplitude: RealGrid3,
    phase: RealGrid3,
    link: Link,
    mesh: Option<SeifertMesh>,
    constants: PhysicalConstants,
    n: u32,
    sheet: i64,
    envelope_center: Vec3,
    envelope_width: f64,
    scale: f64,
    kernel: KernelConfig,
}

/// Builds `ψ(x,0) = Φ(x) e^{im(φ_f+φ_w)/ħ} / I_n(x)`, normalized.
pub fn build_initial_state(
    spec: &StateSpec,
    link: &Link,
    mesh: Option<&SeifertMesh>,
    constants: &PhysicalConstants,
) -> Result<MultiValuedState> {
    constants.validate()?;
    spec.grid.validate()?;
    if spec.n < 2 {
        return Err(Error::InvalidArgument(format!(
            "regularizer power n = {} cannot make the filament nodal; need n >= 2",
            spec.n
        )));
    }
    if !(spec.envelope.width > 0.0 && spec.envelope.width.is_finite()) {
        return Err(Error::InvalidArgument("envelope width must be positive".into()));
    }
    if let Some(BackgroundFlow::Grid(g)) = &spec.phi_w {
        if g.spec() != &spec.grid {
            return Err(Error::GridMismatch);
        }
        g.check_finite()?;
    }
    for c in &link.curves {
        if !c.is_closed() {
            return Err(Error::InvalidArgument(
                "initial states need closed filaments".into(),
            ));
        }
        if c.points().iter().any(|p| !spec.grid.contains(p)) {
            return Err(Error::FilamentOutsideGrid);
        }
    }
    let mesh = match mesh {
        Some(m) => {
            m.validate_against(link, 1e-6 * m.scale())?;
            Some(m.clone())
        }
        None if link.gamma != 0.0 => return Err(Error::MeshRequired),
        None => None,
    };

    let center = spec.envelope.center_or(link);
    let width = spec.envelope.width;
    let k = constants.mass / constants.hbar;
    let gamma = link.gamma;
    let values: Grid3<(f64, f64)> = Grid3::from_fn(spec.grid, |x| {
        let inv = link_regularizer(link, spec.n, &x, &spec.kernel).unwrap_or(f64::INFINITY);
        let r = envelope(&x, &center, width) / inv;
        let phi_f = match &mesh {
            Some(m) if gamma != 0.0 => -gamma / (4.0 * PI) * solid_angle_upper(m, &x),
            _ => 0.0,
        };
        (r, k * phi_f)
    });
    let mut amplitude = values.map(|v| v.0);
    let mut phase = values.map(|v| v.1);
    if let Some(flow) = &spec.phi_w {
        let grid = spec.grid;
        for (idx, p) in phase.values_mut().iter_mut().enumerate() {
            *p += k * flow.at(idx, &grid.position_of(idx));
        }
    }
    let norm2 = crate::grid::integrate_real(&amplitude.map(|r| r * r))?;
    if !(norm2 > 0.0) {
        return Err(Error::InvalidArgument("state vanishes on the grid".into()));
    }
    let scale = norm2.sqrt().recip();
    amplitude.values_mut().iter_mut().for_each(|r| *r *= scale);
    amplitude.check_finite()?;
    phase.check_finite()?;

    Ok(MultiValuedState {
        amplitude,
        phase,
        link: link.clone(),
        mesh,
        constants: *constants,
        n: spec.n,
        sheet: 0,
        envelope_center: center,
        envelope_width: width,
        scale,
        kernel: spec.kernel,
    })
}

fn envelope(x: &Vec3, center: &Vec3, width: f64) -> f64 {
    (-(x - center).norm_squared() / (2.0 * width * width)).exp()
}

impl MultiValuedState {
    pub fn amplitude(&self) -> &RealGrid3 {
        &self.amplitude
    }

    /// Reference-sheet phase `S/ħ`.
    pub fn phase(&self) -> &RealGrid3 {
        &self.phase
    }

    pub fn link(&self) -> &Link {
        &self.link
    }

    pub fn mesh(&self) -> Option<&SeifertMesh> {
        self.mesh.as_ref()
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    pub fn gamma(&self) -> f64 {
        self.link.gamma
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn sheet(&self) -> i64 {
        self.sheet
    }

    pub fn spec(&self) -> &GridSpec {
        self.amplitude.spec()
    }

    /// The same state continued onto sheet `N_w`.
    pub fn on_sheet(&self, sheet: i64) -> Self {
        MultiValuedState {
            sheet,
            ..self.clone()
        }
    }

    /// `R e^{iS/ħ}` on the current sheet.
    pub fn psi(&self) -> ComplexGrid3 {
        let c = sheet_phase(self, self.sheet);
        self.amplitude
            .zip_map(&self.phase, |r, s| Complex64::from_polar(r, s) * c)
            .expect("amplitude and phase share a grid")
    }

    /// `R e^{iS/(νħ)}`, single-valued when `ν = mΓ/2πMħ`.
    pub fn psi_nu(&self, nu: f64) -> ComplexGrid3 {
        let offset = self.constants.mass * self.gamma() * self.sheet as f64 / self.constants.hbar;
        self.amplitude
            .zip_map(&self.phase, |r, s| Complex64::from_polar(r, (s + offset) / nu))
            .expect("amplitude and phase share a grid")
    }

    /// Evaluates `ψ` off the grid on the current sheet. Background flows
    /// given only on the grid are not available here.
    pub fn evaluate(&self, x: &Vec3) -> Result<Complex64> {
        let inv = link_regularizer(&self.link, self.n, x, &self.kernel)?;
        let r = envelope(x, &self.envelope_center, self.envelope_width) / inv * self.scale;
        if r == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let phi_f = match &self.mesh {
            Some(m) if self.gamma() != 0.0 => -self.gamma() / (4.0 * PI) * solid_angle_upper(m, x),
            _ => 0.0,
        };
        Ok(Complex64::from_polar(r, self.constants.mass * phi_f / self.constants.hbar)
            * sheet_phase(self, self.sheet))
    }

    /// `max |ψ|` over filament vertices and segment midpoints, relative to
    /// the grid maximum.
    pub fn nodal_ratio(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for c in &self.link.curves {
            for (a, b) in c.segments() {
                worst = worst.max(self.evaluate(&a)?.norm());
                worst = worst.max(self.evaluate(&((a + b) * 0.5))?.norm());
            }
        }
        let max = self.amplitude.max_abs();
        Ok(worst / max)
    }
}

/// `e^{imΓN_w/ħ}`.
pub fn sheet_phase(state: &MultiValuedState, sheet: i64) -> Complex64 {
    sheet_factor(state.gamma(), &state.constants, sheet)
}

/// `e^{imΓN_w/ħ}` from the circulation alone.
pub fn sheet_factor(gamma: f64, constants: &PhysicalConstants, sheet: i64) -> Complex64 {
    let turns = constants.circulation_quanta(gamma) * sheet as f64;
    // reduce before scaling by 2π so large sheets keep full precision
    let frac = turns - turns.round();
    Complex64::from_polar(1.0, 2.0 * PI * frac)
}

/// Quanta tolerance of [`quantization_check`]: chosen so that
/// `single_valued` holds exactly when `|sheet_factor(1) − 1| < 1e-12`.
pub const QUANTIZATION_TOL: f64 = 1e-12 / (2.0 * PI);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizationReport {
    pub gamma: f64,
    pub k_nearest: i64,
    pub residual: f64,
    pub single_valued: bool,
}

/// Checks `mΓ/ħ = 2πK`.
pub fn quantization_check(gamma: f64, constants: &PhysicalConstants) -> QuantizationReport {
    let q = constants.circulation_quanta(gamma);
    let k = q.round();
    let residual = (q - k).abs();
    QuantizationReport {
        gamma,
        k_nearest: k as i64,
        residual,
        single_valued: residual < QUANTIZATION_TOL,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuSelection {
    pub nu: f64,
    pub m_index: u32,
    /// `ν = 1`: the transformed equation is the linear one.
    pub linear: bool,
}

/// `ν = mΓ/(2πMħ)`.
pub fn select_nu(gamma: f64, constants: &PhysicalConstants, m_index: u32) -> Result<NuSelection> {
    if gamma == 0.0 {
        return Err(Error::NoVortex);
    }
    if m_index == 0 {
        return Err(Error::InvalidArgument("M must be a positive integer".into()));
    }
    let nu = constants.mass * gamma / (2.0 * PI * m_index as f64 * constants.hbar);
    Ok(NuSelection {
        nu,
        m_index,
        linear: (nu - 1.0).abs() <= 1e-12,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentInfo {
    pub gamma: f64,
    /// `mΓ_j/2πħ` (with `M = 1`); `None` when `Γ_j = 0`.
    pub nu: Option<f64>,
    pub weight: [f64; 2],
    pub population: f64,
}

#[derive(Clone, Debug)]
pub struct SuperposedState {
    pub psi: ComplexGrid3,
    pub components: Vec<ComponentInfo>,
    /// `⟨ψ_i|ψ_j⟩` of the normalized components.
    pub overlap: Vec<Vec<Complex64>>,
}

/// Normalized `Σ w_j ψ_j` on the reference sheets.
pub fn superpose(states: &[MultiValuedState], weights: &[Complex64]) -> Result<SuperposedState> {
    if states.is_empty() || states.len() != weights.len() {
        return Err(Error::InvalidArgument(
            "need one weight per state and at least one state".into(),
        ));
    }
    let spec = *states[0].spec();
    let constants = states[0].constants;
    if states
        .iter()
        .any(|s| s.spec() != &spec || s.constants != constants)
    {
        return Err(Error::GridMismatch);
    }
    let psis: Vec<ComplexGrid3> = states.iter().map(|s| s.psi()).collect();
    let mut total = ComplexGrid3::filled(spec, Complex64::new(0.0, 0.0));
    for (p, w) in psis.iter().zip(weights) {
        for (t, v) in total.values_mut().iter_mut().zip(p.values()) {
            *t += w * v;
        }
    }
    let norm = total.normalize();
    if !(norm > 0.0) {
        return Err(Error::InvalidArgument("superposition vanishes".into()));
    }
    let mut overlap = vec![vec![Complex64::new(0.0, 0.0); psis.len()]; psis.len()];
    for i in 0..psis.len() {
        for j in 0..psis.len() {
            overlap[i][j] = psis[i].inner(&psis[j])?;
        }
    }
    let components = states
        .iter()
        .zip(weights)
        .enumerate()
        .map(|(i, (s, w))| ComponentInfo {
            gamma: s.gamma(),
            nu: select_nu(s.gamma(), &constants, 1).ok().map(|n| n.nu),
            weight: [w.re, w.im],
            population: w.norm_sqr() * overlap[i][i].re / (norm * norm),
        })
        .collect();
    Ok(SuperposedState {
        psi: total,
        components,
        overlap,
    })
}

/// JSON sidecar of a stored state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateMetadata {
    pub gamma: f64,
    pub n: u32,
    pub constants: PhysicalConstants,
    pub nu: Option<f64>,
    #[serde(rename = "M")]
    pub m_index: u32,
    pub sheet: i64,
    pub quantization: QuantizationReport,
}

impl StateMetadata {
    pub fn new(state: &MultiValuedState, m_index: u32) -> Self {
        StateMetadata {
            gamma: state.gamma(),
            n: state.n,
            constants: state.constants,
            nu: select_nu(state.gamma(), &state.constants, m_index)
                .ok()
                .map(|s| s.nu),
            m_index,
            sheet: state.sheet,
            quantization: quantization_check(state.gamma(), &state.constants),
        }
    }
}
