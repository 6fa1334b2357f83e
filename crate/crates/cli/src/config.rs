//! Run configuration: command-line flags over an optional TOML file over defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_tol: f64,
    /// Well-roundedness and search convergence tolerance.
    pub geom_tol: f64,
    pub eta_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub budget: usize,
    pub tolerances: Tolerances,
    pub output_dir: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            budget: 5_000,
            tolerances: Tolerances { rank_tol: wellround::linalg::RANK_TOL, geom_tol: 1e-9, eta_margin: 0.5 },
            output_dir: None,
            format: Format::Json,
        }
    }
}

/// Layer with every field optional; used for both the file and the flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
    pub output_dir: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub rank_tol: Option<f64>,
    pub geom_tol: Option<f64>,
    pub eta_margin: Option<f64>,
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

impl RunConfig {
    /// Applies `layers` in order, later layers winning, then validates.
    pub fn resolve(layers: &[Overrides]) -> Result<Self> {
        let mut c = RunConfig::default();
        for l in layers {
            c.seed = l.seed.unwrap_or(c.seed);
            c.budget = l.budget.unwrap_or(c.budget);
            c.tolerances.rank_tol = l.tolerances.rank_tol.unwrap_or(c.tolerances.rank_tol);
            c.tolerances.geom_tol = l.tolerances.geom_tol.unwrap_or(c.tolerances.geom_tol);
            c.tolerances.eta_margin = l.tolerances.eta_margin.unwrap_or(c.tolerances.eta_margin);
            if l.output_dir.is_some() {
                c.output_dir = l.output_dir.clone();
            }
            c.format = l.format.unwrap_or(c.format);
        }
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        if self.budget < 100 {
            bail!("budget must be at least 100 (got {})", self.budget);
        }
        let t = &self.tolerances;
        for (name, v) in [("rank_tol", t.rank_tol), ("geom_tol", t.geom_tol), ("eta_margin", t.eta_margin)] {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive (got {v})");
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn later_layers_win() {
        let file: Overrides = toml::from_str("seed = 4\nbudget = 800\n[tolerances]\ngeom_tol = 1e-6\n").unwrap();
        let flags = Overrides { budget: Some(300), ..Overrides::default() };
        let c = RunConfig::resolve(&[file, flags]).unwrap();
        assert_eq!((c.seed, c.budget), (4, 300));
        assert_eq!(c.tolerances.geom_tol, 1e-6);
        assert_eq!(c.tolerances.eta_margin, 0.5);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::resolve(&[Overrides { budget: Some(99), ..Overrides::default() }]).is_err());
        let t = ToleranceOverrides { rank_tol: Some(0.0), ..ToleranceOverrides::default() };
        assert!(RunConfig::resolve(&[Overrides { tolerances: t, ..Overrides::default() }]).is_err());
        assert!(toml::from_str::<Overrides>("seeds = 1").is_err());
    }
}
