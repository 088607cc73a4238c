//! Experiment configuration.
//!
//! The file is flat `section.key = value` text (dotted TOML keys), e.g.
//!
//! ```text
//! mesh.coarse = 10
//! mesh.fine = 10
//! coefficient.eta = [1e4, 1e6]
//! solver.method = "I"
//! solver.l_add = [0, 2, 4, 6, 8, 10]
//! ```
//!
//! Every field has a default; unknown keys are rejected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coefficient::{ChannelPattern, CoefficientField, Raster};
use crate::error::{Error, Result};
use crate::mesh::PartitionedMesh;
use crate::spectral::{Method, SnapshotMass};

pub const DEFAULT_L_ADD: [usize; 6] = [0, 2, 4, 6, 8, 10];
pub const DEFAULT_ETA: [f64; 2] = [1e4, 1e6];
pub const DEFAULT_SCALINGS: [f64; 7] = [40.0, 70.0, 100.0, 150.0, 200.0, 300.0, 400.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub mesh: MeshConfig,
    pub coefficient: CoefficientConfig,
    pub solver: SolverConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshConfig {
    /// Blocks per side.
    pub coarse: usize,
    /// Fine cells per block side.
    pub fine: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoefficientConfig {
    /// Read the field from a raster instead of generating it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raster: Option<PathBuf>,
    /// Contrasts for the synthetic generator; one table per value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    pub seed: u64,
    pub pattern: ChannelPattern,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub method: Method,
    /// Right-hand form of Method III; defaults to the boundary mass.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_mass: Option<SnapshotMass>,
    pub delta: f64,
    /// Constant source term `f`.
    pub source: f64,
    pub l_add: Vec<usize>,
    /// Fixed `L_small` for every block instead of gap detection.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_small: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Constant penalty factors replacing `δ/h_ij` in the coarse operator.
    pub scalings: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mesh: MeshConfig::default(),
            coefficient: CoefficientConfig::default(),
            solver: SolverConfig::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            coarse: 10,
            fine: 10,
        }
    }
}

impl Default for CoefficientConfig {
    fn default() -> Self {
        Self {
            raster: None,
            eta: None,
            seed: 2024,
            pattern: ChannelPattern::default(),
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: Method::I,
            snapshot_mass: None,
            delta: 4.0,
            source: 1.0,
            l_add: DEFAULT_L_ADD.to_vec(),
            l_small: None,
        }
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            scalings: DEFAULT_SCALINGS.to_vec(),
        }
    }
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

/// A coefficient field together with the label used in file names.
#[derive(Debug, Clone)]
pub struct LabeledField {
    pub label: String,
    pub eta: f64,
    pub field: CoefficientField,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg: Self = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
        // relative raster paths are taken relative to the config file
        if let (Some(r), Some(dir)) = (&cfg.coefficient.raster, path.parent()) {
            if r.is_relative() {
                cfg.coefficient.raster = Some(dir.join(r));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.mesh.coarse == 0 || self.mesh.fine == 0 {
            return fail("mesh.coarse and mesh.fine must be positive".into());
        }
        if !(self.solver.delta > 0.0) || !self.solver.delta.is_finite() {
            return fail(format!(
                "solver.delta must be positive, got {}",
                self.solver.delta
            ));
        }
        if !self.solver.source.is_finite() {
            return fail("solver.source must be finite".into());
        }
        if self.solver.l_add.is_empty() {
            return fail("solver.l_add must not be empty".into());
        }
        let n_local = if self.solver.method.is_snapshot() {
            4 * self.mesh.fine
        } else {
            (self.mesh.fine + 1) * (self.mesh.fine + 1)
        };
        let small = self.solver.l_small.unwrap_or(1);
        if let Some(&worst) = self.solver.l_add.iter().max() {
            if worst + small > n_local {
                return fail(format!(
                    "solver.l_add = {worst} exceeds the {n_local} local modes available"
                ));
            }
        }
        if self.solver.snapshot_mass.is_some() && !self.solver.method.is_snapshot() {
            return fail("solver.snapshot_mass applies only to methods III and III-m".into());
        }
        if self.solver.snapshot_mass == Some(SnapshotMass::Volume)
            && self.solver.method == Method::III
            || matches!(
                self.solver.snapshot_mass,
                Some(SnapshotMass::Boundary | SnapshotMass::Full)
            ) && self.solver.method == Method::IIIm
        {
            return fail("solver.snapshot_mass contradicts solver.method".into());
        }
        if self
            .sweep
            .scalings
            .iter()
            .any(|s| !(*s > 0.0) || !s.is_finite())
        {
            return fail("sweep.scalings must be positive".into());
        }
        match (&self.coefficient.raster, &self.coefficient.eta) {
            (Some(_), Some(_)) => {
                return fail("coefficient.eta cannot be combined with coefficient.raster".into())
            }
            (None, Some(etas)) if etas.is_empty() => {
                return fail("coefficient.eta must not be empty".into())
            }
            (None, Some(etas)) => {
                if let Some(bad) = etas.iter().find(|e| !(**e >= 1.0) || !e.is_finite()) {
                    return fail(format!("coefficient.eta must be at least 1, got {bad}"));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn etas(&self) -> Vec<f64> {
        self.coefficient
            .eta
            .clone()
            .unwrap_or_else(|| DEFAULT_ETA.to_vec())
    }

    pub fn snapshot_mass(&self) -> SnapshotMass {
        self.solver
            .snapshot_mass
            .unwrap_or(match self.solver.method {
                Method::IIIm => SnapshotMass::Volume,
                _ => SnapshotMass::Boundary,
            })
    }

    pub fn build_mesh(&self) -> Result<PartitionedMesh> {
        PartitionedMesh::build(self.mesh.coarse, self.mesh.fine)
    }

    /// The fields the experiment runs on: the raster, or one synthetic field
    /// per contrast.
    pub fn fields(&self, mesh: &PartitionedMesh) -> Result<Vec<LabeledField>> {
        if let Some(path) = &self.coefficient.raster {
            let raster = Raster::read(path)?;
            let field = CoefficientField::from_raster(&raster, mesh)?;
            return Ok(vec![LabeledField {
                label: "raster".into(),
                eta: field.contrast(),
                field,
            }]);
        }
        self.etas()
            .into_iter()
            .map(|eta| {
                let field = CoefficientField::synthesize(
                    mesh,
                    eta,
                    self.coefficient.seed,
                    &self.coefficient.pattern,
                )?;
                Ok(LabeledField {
                    label: format!("eta-{eta:e}"),
                    eta,
                    field,
                })
            })
            .collect()
    }

    /// Canonical text form; two configs with the same meaning print the same.
    pub fn to_canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical config (and the raster bytes, if any),
    /// truncated to 16 characters.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        let mut cfg = self.clone();
        // the output location does not change any result; defaults are
        // spelled out so that implicit and explicit forms hash alike
        cfg.output = OutputConfig::default();
        if cfg.coefficient.raster.is_none() {
            cfg.coefficient.eta = Some(self.etas());
        }
        if self.solver.method.is_snapshot() {
            cfg.solver.snapshot_mass = Some(self.snapshot_mass());
        }
        h.update(cfg.to_canonical().as_bytes());
        if let Some(path) = &self.coefficient.raster {
            if let Ok(bytes) = std::fs::read(path) {
                h.update(&bytes);
            }
        }
        let digest = hex::encode(h.finalize());
        digest[..16].to_string()
    }

    /// Comment lines carried at the top of every output file.
    pub fn header(&self, what: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# gmsdg {} {what}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# config {}", self.hash());
        let _ = writeln!(
            s,
            "# mesh {}x{} blocks, {} cells per block side; method {}; delta {}",
            self.mesh.coarse,
            self.mesh.coarse,
            self.mesh.fine,
            self.solver.method,
            self.solver.delta
        );
        s
    }
}
