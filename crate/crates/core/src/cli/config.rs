//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::evolution::{EvolveConfig, Potential};
use crate::grid::GridSpec;
use crate::identity::{AbConvention, SolenoidSpec};
use crate::knot::{circle_curve, disk_mesh, load_seifert_mesh, trefoil_curve, Link, SeifertMesh};
use crate::wavefunction::{EnvelopeSpec, PhysicalConstants};
use crate::Vec3;

use super::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub constants: PhysicalConstants,
    pub source: SourceConfig,
    /// Sheet index `M` used to pick `ν`.
    #[serde(rename = "M", default = "default_m")]
    pub m_index: u32,
    /// Overrides the `ν` derived from `Γ` and `M`.
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default)]
    pub evolve: Option<EvolveSection>,
    #[serde(default)]
    pub verify: VerifySection,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Seed for randomized checks; `--seed` takes precedence.
    #[serde(default)]
    pub seed: u64,
}

fn default_m() -> u32 {
    1
}

/// Either a centred cube or an explicit grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridConfig {
    Cube(CubeGrid),
    Explicit(GridSpec),
}

/// `n` points per axis on `[-half_width, half_width)³`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CubeGrid {
    pub n: usize,
    pub half_width: f64,
}

impl GridConfig {
    pub fn spec(&self) -> crate::Result<GridSpec> {
        match self {
            GridConfig::Cube(c) => GridSpec::centered(c.n, c.half_width),
            GridConfig::Explicit(g) => {
                g.validate()?;
                Ok(*g)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    /// Vortex filament with circulation `gamma`.
    Knot {
        geometry: Geometry,
        gamma: f64,
        envelope: EnvelopeSpec,
        n: u32,
        /// Uniform background flow velocity.
        #[serde(default)]
        flow: Option<[f64; 3]>,
    },
    /// Packet passing an ideal solenoid.
    Solenoid {
        solenoid: SolenoidSpec,
        #[serde(default)]
        convention: AbConvention,
        center: [f64; 3],
        width: f64,
        #[serde(default = "zero3")]
        momentum: [f64; 3],
        n: u32,
    },
}

fn zero3() -> [f64; 3] {
    [0.0; 3]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    Ring {
        radius: f64,
        #[serde(default = "zero3")]
        center: [f64; 3],
        #[serde(default = "z_axis")]
        normal: [f64; 3],
        #[serde(default = "default_samples")]
        samples: usize,
        /// Path to an OFF Seifert mesh; a flat disk is generated if absent.
        #[serde(default)]
        mesh: Option<PathBuf>,
    },
    Trefoil {
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "zero3")]
        offset: [f64; 3],
        #[serde(default)]
        mesh: Option<PathBuf>,
    },
}

fn z_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

fn default_samples() -> usize {
    256
}

fn one() -> f64 {
    1.0
}

impl Geometry {
    /// Filament and Seifert mesh. Relative mesh paths resolve against `base`.
    pub fn build(&self, gamma: f64, base: &Path) -> crate::Result<(Link, Option<SeifertMesh>)> {
        let resolve = |p: &PathBuf| if p.is_absolute() { p.clone() } else { base.join(p) };
        match self {
            Geometry::Ring {
                radius,
                center,
                normal,
                samples,
                mesh,
            } => {
                let curve = circle_curve(*radius, Vec3::from(*center), Vec3::from(*normal), *samples)?;
                let link = Link::single(curve.clone(), gamma)?;
                let mesh = match mesh {
                    Some(p) => load_seifert_mesh(resolve(p), &link, 1e-6 * radius)?,
                    None => disk_mesh(&curve, 4)?,
                };
                Ok((link, Some(mesh)))
            }
            Geometry::Trefoil {
                samples,
                scale,
                offset,
                mesh,
            } => {
                let curve = trefoil_curve(*samples)?.transformed(*scale, Vec3::from(*offset))?;
                let link = Link::single(curve, gamma)?;
                let mesh = match mesh {
                    Some(p) => Some(load_seifert_mesh(resolve(p), &link, 1e-6 * scale)?),
                    None => None,
                };
                Ok((link, mesh))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Free,
    Harmonic {
        omega: f64,
        #[serde(default = "zero3")]
        center: [f64; 3],
    },
}

impl PotentialConfig {
    pub fn potential(&self) -> Potential {
        match self {
            PotentialConfig::Free => Potential::Free,
            PotentialConfig::Harmonic { omega, center } => Potential::Harmonic {
                omega: *omega,
                center: Vec3::from(*center),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    pub dt: f64,
    pub steps: usize,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default = "free")]
    pub potential: PotentialConfig,
    /// Continue from the last snapshot of an existing run.
    #[serde(default)]
    pub resume: bool,
}

fn default_stride() -> usize {
    1
}

fn free() -> PotentialConfig {
    PotentialConfig::Free
}

impl EvolveSection {
    pub fn config(&self, nu: f64) -> EvolveConfig {
        EvolveConfig::new(self.dt, self.steps)
            .with_potential(self.potential.potential())
            .with_nu(nu)
            .with_stride(self.snapshot_stride)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// Points per axis of the verification grids.
    #[serde(default = "default_verify_n")]
    pub grid_n: usize,
    /// Flip one triangle of the test mesh so the orientation check fails.
    #[serde(default)]
    pub inject_fault: bool,
}

fn default_verify_n() -> usize {
    32
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            grid_n: default_verify_n(),
            inject_fault: false,
        }
    }
}

impl RunConfig {
    /// Parses and validates a configuration document.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Config(format!("at `{path}`: {}", e.into_inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.grid.spec().map_err(|e| CliError::Config(e.to_string()))?;
        self.constants.validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(nu) = self.nu {
            if !(nu.is_finite() && nu != 0.0) {
                return bad(format!("nu must be finite and nonzero, got {nu}"));
            }
        }
        if self.m_index == 0 {
            return bad("M must be at least 1".into());
        }
        match &self.source {
            SourceConfig::Knot { gamma, envelope, n, .. } => {
                if !gamma.is_finite() {
                    return bad("gamma must be finite".into());
                }
                if !(envelope.width > 0.0) {
                    return bad("envelope width must be positive".into());
                }
                if *n < 2 {
                    return bad(format!("n must be at least 2, got {n}"));
                }
            }
            SourceConfig::Solenoid { solenoid, width, n, .. } => {
                solenoid.validate().map_err(|e| CliError::Config(e.to_string()))?;
                if !(*width > 0.0) {
                    return bad("packet width must be positive".into());
                }
                if *n < 2 {
                    return bad(format!("n must be at least 2, got {n}"));
                }
            }
        }
        if let Some(ev) = &self.evolve {
            if !(ev.dt > 0.0 && ev.dt.is_finite()) || ev.steps == 0 || ev.snapshot_stride == 0 {
                return bad("evolve needs dt > 0, steps >= 1 and snapshot_stride >= 1".into());
            }
        }
        if self.verify.grid_n < 16 {
            return bad("verify.grid_n must be at least 16".into());
        }
        Ok(())
    }
}

/// Ring configuration with one circulation quantum in natural units.
pub fn example_ring_config() -> RunConfig {
    RunConfig {
        grid: GridConfig::Cube(CubeGrid { n: 32, half_width: 4.0 }),
        constants: PhysicalConstants::default(),
        source: SourceConfig::Knot {
            geometry: Geometry::Ring {
                radius: 1.0,
                center: [0.0; 3],
                normal: z_axis(),
                samples: 128,
                mesh: None,
            },
            gamma: 2.0 * std::f64::consts::PI,
            envelope: EnvelopeSpec {
                center: None,
                width: 0.8,
            },
            n: 2,
            flow: None,
        },
        m_index: 1,
        nu: None,
        evolve: Some(EvolveSection {
            dt: 0.005,
            steps: 20,
            snapshot_stride: 5,
            potential: PotentialConfig::Free,
            resume: false,
        }),
        verify: VerifySection::default(),
        output: None,
        seed: 0,
    }
}
