//! Optional JSON configuration file. Command-line flags take precedence
//! over file values, which take precedence over built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use pseudonorm::asymptotics::{Axis, LevelOrder};
use pseudonorm::operator_lab::Stencil;

use crate::grid::Grid;
use crate::output::Format;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub potential: Option<String>,
    pub axis: Option<String>,
    pub curve: Option<String>,
    pub grid: Option<String>,
    pub tol: Option<f64>,
    pub stencil: Option<String>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub cache: Option<PathBuf>,
    pub force: Option<bool>,
    pub eps: Option<Vec<f64>>,
    pub eps_prime: Option<f64>,
    pub order: Option<LevelOrder>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Problem description after merging flags, config and defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    pub potential: String,
    pub axis: Axis,
    pub curve: Option<String>,
    pub grid: Grid,
    pub tol: f64,
    pub stencil: Stencil,
}

impl Problem {
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        vec![
            ("potential", self.potential.clone()),
            ("axis", self.axis.to_string()),
            ("curve", self.curve.clone().unwrap_or_else(|| "0".into())),
            ("grid", self.grid.to_string()),
            ("tol", format!("{:e}", self.tol)),
            ("stencil", self.stencil.to_string()),
        ]
    }
}

pub const DEFAULT_GRID: &str = "10:1000:5:log";
pub const DEFAULT_TOL: f64 = 1e-6;
