//! Run configuration (JSON).

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use selrisk_core::bounds::DEFAULT_DIRECTIONS;
use selrisk_core::scenarios::{generate, read_csv, GenSpec};
use selrisk_core::{Error, PortfolioKind, Result, RiskProfile, RiskSpec, ScenarioEnsemble, Strategy, Vec2, Window};

/// Where the scenarios come from.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSource {
    /// Path to a scenario CSV, relative to the config file.
    Csv(PathBuf),
    Generate(GenSpec),
    Points {
        points: Vec<Vec2>,
        #[serde(default)]
        rates: Option<Vec<f64>>,
        #[serde(default)]
        weights: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Shorthand for expected shortfall at this level.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// One functional for every coordinate.
    #[serde(default)]
    pub risk: Option<RiskSpec>,
    /// One functional per coordinate.
    #[serde(default)]
    pub risk_components: Option<Vec<RiskSpec>>,
    #[serde(default)]
    pub portfolio: Option<PortfolioKind>,
    #[serde(default)]
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_directions")]
    pub directions: usize,
    pub data: DataSource,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub window: Option<[f64; 4]>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_directions() -> usize {
    DEFAULT_DIRECTIONS
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cross-field checks that do not need the data.
    pub fn validate(&self) -> Result<()> {
        let given = [self.alpha.is_some(), self.risk.is_some(), self.risk_components.is_some()];
        if given.iter().filter(|g| **g).count() > 1 {
            return Err(Error::InvalidInput("config: give only one of alpha, risk, risk_components".into()));
        }
        if self.directions < 2 {
            return Err(Error::InvalidInput("config: directions must be at least 2".into()));
        }
        if let Some(w) = self.window {
            Window::new(w[0], w[1], w[2], w[3])?;
        }
        if let Some(kind) = &self.portfolio {
            if kind.uses_rates() {
                let missing = match &self.data {
                    DataSource::Generate(g) => g.rate.is_none(),
                    DataSource::Points { rates, .. } => rates.is_none(),
                    DataSource::Csv(_) => false,
                };
                if missing {
                    return Err(Error::InvalidInput(format!(
                        "config: portfolio kind {} needs exchange rates in the data",
                        kind.name()
                    )));
                }
            }
        }
        if let DataSource::Generate(g) = &self.data {
            g.validate()?;
        }
        Ok(())
    }

    /// The per-coordinate risk functionals for `dim` assets.
    pub fn profile(&self, dim: usize) -> Result<RiskProfile> {
        let p = if let Some(a) = self.alpha {
            RiskProfile::identical(RiskSpec::expected_shortfall(a)?, dim)
        } else if let Some(s) = self.risk {
            RiskProfile::identical(s, dim)
        } else if let Some(c) = &self.risk_components {
            if c.len() != dim {
                return Err(Error::Dimension { expected: dim, got: c.len() });
            }
            RiskProfile { components: c.clone() }
        } else {
            return Err(Error::InvalidInput("config: one of alpha, risk, risk_components is required".into()));
        };
        p.validate()?;
        Ok(p)
    }

    /// Applies `--seed` and `--n`; both need a generated data source.
    pub fn override_generation(&mut self, seed: Option<u64>, n: Option<usize>) -> Result<()> {
        if seed.is_none() && n.is_none() {
            return Ok(());
        }
        match &mut self.data {
            DataSource::Generate(g) => {
                if let Some(s) = seed {
                    g.seed = s;
                }
                if let Some(n) = n {
                    g.n = n;
                }
                g.validate()
            }
            _ => Err(Error::InvalidInput("--seed and --n apply only to generated data".into())),
        }
    }

    pub fn load_data(&self) -> Result<ScenarioEnsemble> {
        match &self.data {
            DataSource::Csv(p) => read_csv(self.base_dir.join(p)),
            DataSource::Generate(g) => generate(g),
            DataSource::Points { points, rates, weights } => {
                ScenarioEnsemble::from_points(points, rates.clone(), weights.clone())
            }
        }
    }

    pub fn window(&self, flag: Option<Window>) -> Option<Window> {
        flag.or(self.window.map(|w| Window { x0: w[0], y0: w[1], x1: w[2], y1: w[3] }))
    }
}
