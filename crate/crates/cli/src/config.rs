//! Study configuration: the JSON input and its fully resolved form.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use xnyfem::elasticity::Material;
use xnyfem::mesh::builtin::{builtin_geometry, GEOMETRY_IDS};
use xnyfem::mesh::{load_mesh, Mesh};
use xnyfem::verify::{Pairing, PatchVersion, ReferenceSpec};
use xnyfem::NodeDistribution;

use crate::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    PatchLinear,
    PatchQuadratic,
    PatchCubic,
    PatchHighorder,
    ConvPoly,
    ConvHole,
    SingularCantilever,
    #[serde(rename = "singular-L")]
    SingularL,
    BasisDump,
}

impl StudyKind {
    fn default_mesh(self) -> &'static str {
        match self {
            StudyKind::PatchLinear => "bathe-patch",
            StudyKind::PatchQuadratic | StudyKind::PatchCubic => "beam",
            StudyKind::PatchHighorder => "high-order",
            StudyKind::ConvPoly | StudyKind::BasisDump => "two-quad",
            StudyKind::ConvHole => "hole-quadrant",
            StudyKind::SingularCantilever => "cantilever",
            StudyKind::SingularL => "l-domain",
        }
    }

    pub fn is_patch(self) -> bool {
        matches!(
            self,
            StudyKind::PatchLinear | StudyKind::PatchQuadratic | StudyKind::PatchCubic | StudyKind::PatchHighorder
        )
    }
}

/// Which patch-test combinations to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sample {
    /// Cartesian product of the configured `p_x`, `p_y` and `n_s` values.
    Grid,
    /// The 64-combination stratified sample.
    Stratified,
    /// All 6272 combinations.
    Exhaustive,
}

/// A single value, a list, or an inclusive range `{"from": a, "to": b}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Values {
    One(usize),
    Many(Vec<usize>),
    Range { from: usize, to: usize },
}

impl Values {
    fn expand(&self, name: &str) -> Result<Vec<usize>, CliError> {
        let v = match self {
            Values::One(x) => vec![*x],
            Values::Many(v) => v.clone(),
            Values::Range { from, to } => (*from..=*to).collect(),
        };
        if v.is_empty() {
            return Err(CliError::Config(format!("'{name}' is empty")));
        }
        Ok(v)
    }
}

/// Configuration as written by the user; absent fields take study defaults.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub schema: u32,
    pub study: StudyKind,
    pub mesh: Option<String>,
    pub p_x: Option<Values>,
    pub p_y: Option<Values>,
    pub pairing: Option<Pairing>,
    pub distribution: Option<NodeDistribution>,
    pub n_y: Option<usize>,
    pub n_s: Option<Values>,
    pub levels: Option<usize>,
    pub material: Option<Material>,
    pub version: Option<PatchVersion>,
    pub order: Option<usize>,
    pub window: Option<usize>,
    pub sample: Option<Sample>,
    pub reference: Option<ReferenceSpec>,
    pub field_grid: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Configuration with every default filled in; echoed to `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub schema: u32,
    pub study: StudyKind,
    /// Built-in geometry id or mesh file path.
    pub mesh: String,
    pub p_x: Vec<usize>,
    pub p_y: Vec<usize>,
    pub pairing: Pairing,
    pub distribution: NodeDistribution,
    pub n_y: usize,
    pub n_s: Vec<usize>,
    pub levels: usize,
    pub material: Material,
    pub version: PatchVersion,
    pub order: usize,
    pub window: usize,
    pub sample: Sample,
    pub reference: ReferenceSpec,
    pub field_grid: usize,
    pub out: PathBuf,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        if raw.schema != SCHEMA {
            return Err(CliError::Config(format!("unsupported schema {}, expected {SCHEMA}", raw.schema)));
        }
        Ok(raw)
    }

    pub fn resolve(self) -> Result<Config, CliError> {
        use StudyKind::*;
        let study = self.study;
        let order = self.order.unwrap_or(match study {
            PatchHighorder => 7,
            _ => 8,
        });
        let (px, py): (Vec<usize>, Vec<usize>) = match study {
            PatchLinear => (vec![2], vec![2]),
            PatchQuadratic | PatchCubic | BasisDump => (vec![3], vec![3]),
            PatchHighorder => ((1..=order).collect(), (1..=order).collect()),
            ConvPoly | ConvHole => (vec![8], vec![1, 2, 3]),
            SingularCantilever | SingularL => (vec![2, 3, 4], vec![2, 3, 4]),
        };
        let p_y = match &self.p_y {
            Some(v) => v.expand("p_y")?,
            None => py,
        };
        let p_x = match (&self.p_x, study) {
            (Some(v), _) => v.expand("p_x")?,
            // equal orders on both regions unless stated otherwise
            (None, PatchHighorder | SingularCantilever | SingularL) => p_y.clone(),
            (None, _) => px,
        };
        let n_s = match &self.n_s {
            Some(v) => v.expand("n_s")?,
            None => vec![match study {
                SingularCantilever | SingularL => 4,
                PatchHighorder => 2,
                _ => 1,
            }],
        };
        let cfg = Config {
            schema: self.schema,
            study,
            mesh: self.mesh.unwrap_or_else(|| study.default_mesh().to_string()),
            p_x,
            p_y,
            pairing: self.pairing.unwrap_or(match study {
                PatchHighorder | SingularCantilever | SingularL => Pairing::LaLa,
                _ => Pairing::LaLe,
            }),
            distribution: self.distribution.unwrap_or(NodeDistribution::Gll),
            n_y: self.n_y.unwrap_or(2),
            n_s,
            levels: self.levels.unwrap_or(match study {
                ConvPoly | ConvHole => 5,
                SingularCantilever | SingularL => 2,
                _ => 1,
            }),
            material: self.material.unwrap_or_else(Material::aluminum),
            version: self.version.unwrap_or(match study {
                PatchQuadratic | PatchCubic => PatchVersion::C,
                _ => PatchVersion::B,
            }),
            order,
            window: self.window.unwrap_or(3),
            sample: self.sample.unwrap_or(Sample::Grid),
            reference: self.reference.unwrap_or_default(),
            field_grid: self.field_grid.unwrap_or(0),
            out: self.out.unwrap_or_else(|| PathBuf::from("results")),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl Config {
    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if let Some(p) = self.p_x.iter().chain(&self.p_y).find(|&&p| !(1..=xnyfem::polybasis::MAX_ORDER).contains(&p)) {
            return bad(format!("order {p} outside 1..={}", xnyfem::polybasis::MAX_ORDER));
        }
        if self.n_y == 0 {
            return bad("n_y must be at least 1".into());
        }
        if self.study.is_patch() && self.sample == Sample::Grid && self.n_s.iter().any(|&n| n == 0) {
            return bad("n_s must be at least 1".into());
        }
        if self.field_grid == 1 {
            return bad("field_grid needs at least 2 points per direction".into());
        }
        if self.window < 2 {
            return bad("window must be at least 2".into());
        }
        self.material.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(())
    }

    /// Loads the configured mesh; file paths are relative to `base`.
    pub fn load_mesh(&self, base: &Path) -> Result<Mesh, CliError> {
        if GEOMETRY_IDS.contains(&self.mesh.as_str()) {
            return Ok(builtin_geometry(&self.mesh)?);
        }
        let path = base.join(&self.mesh);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read mesh '{}': {e}", path.display())))?;
        Ok(load_mesh(&text)?)
    }
}
