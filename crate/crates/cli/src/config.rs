//! Campaign configuration files (TOML).
//!
//! ```toml
//! kind = "superseparation"   # sweep | superseparation | product | quasimode | domain-compare
//! profile = "exp2"           # exp2, exp, rational or an expression in x
//! mu = ["pi2"]               # numbers or constant expressions
//! transverse = "dirichlet-interval:L=1"
//! t_grid = [0.2, 0.1, 0.05]  # strictly decreasing
//! bc = "dirichlet"
//! k = [1, 3]                 # inclusive index range
//! seed = 42                  # required by randomized kinds
//!
//! [output]
//! csv = "out/supersep.csv"   # relative to the config file
//! json = "out/supersep.json"
//!
//! [tolerances]
//! default = 1e-9
//! fields = { lambda = 1e-6 }
//!
//! [golden]
//! file = "supersep.csv"
//! generator = "python3 golden/oracle.py > golden/supersep.csv"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use specdegen::profile::Expr;
use specdegen::Boundary;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CampaignKind {
    Sweep,
    Superseparation,
    Product,
    Quasimode,
    DomainCompare,
}

/// A scalar written as a number or as a constant expression (`pi2` is π²).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
}

impl Scalar {
    pub fn value(&self) -> Result<f64, CliError> {
        match self {
            Scalar::Number(v) => Ok(*v),
            Scalar::Text(s) => parse_scalar(s),
        }
    }
}

/// `pi2`, `4pi2`, a plain number or an expression without `x`.
pub fn parse_scalar(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    if let Some(coef) = s.strip_suffix("pi2") {
        let c = if coef.is_empty() {
            1.0
        } else {
            coef.trim_end_matches('*')
                .parse::<f64>()
                .map_err(|e| CliError::Validation(format!("`{s}`: {e}")))?
        };
        return Ok(c * std::f64::consts::PI.powi(2));
    }
    if s.contains('x') {
        return Err(CliError::Validation(format!("`{s}` must be a constant")));
    }
    let e = Expr::parse(s).map_err(|e| CliError::Validation(format!("`{s}`: {e}")))?;
    Ok(e.eval(0.0))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_tolerance")]
    pub default: f64,
    #[serde(default)]
    pub fields: BTreeMap<String, f64>,
}

fn default_tolerance() -> f64 {
    1e-9
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            default: default_tolerance(),
            fields: BTreeMap::new(),
        }
    }
}

impl Tolerances {
    pub fn for_field(&self, name: &str) -> f64 {
        self.fields.get(name).copied().unwrap_or(self.default)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenConfig {
    pub file: PathBuf,
    /// Shell command that regenerates the golden file.
    pub generator: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub kind: CampaignKind,
    #[serde(default = "default_profile")]
    pub profile: String,
    #[serde(default)]
    pub mu: Vec<Scalar>,
    pub transverse: Option<String>,
    #[serde(default)]
    pub t_grid: Vec<f64>,
    #[serde(default = "default_bc")]
    pub bc: Boundary,
    #[serde(default = "default_k")]
    pub k: [usize; 2],
    pub lambda_max: Option<f64>,
    /// Eigenvalue count for domain comparisons, dimension for quasimode trials.
    pub n: Option<usize>,
    pub trials: Option<usize>,
    /// Triangle mesh cells across the thin direction.
    pub across: Option<usize>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub golden: Option<GoldenConfig>,
    /// Directory the config was read from; relative paths resolve here.
    #[serde(skip)]
    pub base: PathBuf,
}

fn default_profile() -> String {
    "exp2".into()
}

fn default_bc() -> Boundary {
    Boundary::Dirichlet
}

fn default_k() -> [usize; 2] {
    [1, 3]
}

/// Strictly decreasing positive values.
pub fn check_t_grid(t_grid: &[f64]) -> Result<(), CliError> {
    if t_grid.is_empty() {
        return Err(CliError::Validation("t-grid is empty".into()));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
        return Err(CliError::Validation(format!(
            "t-grid values must be positive, got {t}"
        )));
    }
    if t_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Validation(
            "t-grid must be strictly decreasing".into(),
        ));
    }
    Ok(())
}

impl CampaignConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let c: Self =
            toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut c = Self::parse(&text)?;
        c.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(c)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Validation(format!("config: {m}")));
        if self.kind != CampaignKind::Quasimode {
            check_t_grid(&self.t_grid)?;
        }
        let [k0, k1] = self.k;
        if k0 == 0 || k1 < k0 {
            return bad("k must be a range [first, last] with 1 <= first <= last");
        }
        if !(self.tolerances.default >= 0.0)
            || self.tolerances.fields.values().any(|t| !(*t >= 0.0))
        {
            return bad("tolerances must be non-negative");
        }
        match self.kind {
            CampaignKind::Sweep | CampaignKind::Superseparation if self.mu.is_empty() => {
                bad("`mu` needs at least one value")
            }
            CampaignKind::Product if self.transverse.is_none() || self.lambda_max.is_none() => {
                bad("product campaigns need `transverse` and `lambda_max`")
            }
            CampaignKind::Quasimode if self.seed.is_none() => {
                bad("randomized campaigns need an explicit `seed`")
            }
            CampaignKind::Quasimode if self.n.is_none() || self.trials.is_none() => {
                bad("quasimode campaigns need `n` and `trials`")
            }
            CampaignKind::DomainCompare if self.n.is_none() => {
                bad("domain-compare campaigns need `n`")
            }
            _ => Ok(()),
        }
    }

    pub fn mu_values(&self) -> Result<Vec<f64>, CliError> {
        self.mu.iter().map(Scalar::value).collect()
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars() {
        let pi2 = std::f64::consts::PI.powi(2);
        assert_eq!(parse_scalar("pi2").unwrap(), pi2);
        assert_eq!(parse_scalar("4pi2").unwrap(), 4.0 * pi2);
        assert_eq!(parse_scalar("2.5").unwrap(), 2.5);
        assert!((parse_scalar("pi^2").unwrap() - pi2).abs() < 1e-14);
        assert!(parse_scalar("x+1").is_err());
    }

    #[test]
    fn parses_and_validates() {
        let c = CampaignConfig::parse(
            r#"
            kind = "superseparation"
            mu = ["pi2", 1.0]
            t_grid = [0.2, 0.1]
            [tolerances]
            fields = { lambda = 1e-6 }
            "#,
        )
        .unwrap();
        assert_eq!(c.kind, CampaignKind::Superseparation);
        assert_eq!(c.mu_values().unwrap()[1], 1.0);
        assert_eq!(c.tolerances.for_field("lambda"), 1e-6);
        assert_eq!(c.tolerances.for_field("gap"), 1e-9);

        let up = CampaignConfig::parse("kind = \"sweep\"\nmu = [1.0]\nt_grid = [0.1, 0.2]");
        assert!(matches!(up, Err(CliError::Validation(_))));
        let unseeded = CampaignConfig::parse("kind = \"quasimode\"\nn = 4\ntrials = 3");
        assert!(unseeded.unwrap_err().to_string().contains("seed"));
        assert!(
            CampaignConfig::parse("kind = \"sweep\"\nmu = [1.0]\nt_grid = [0.1]\nbogus = 1")
                .is_err()
        );
    }
}
