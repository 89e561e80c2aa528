use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use blie::blift::Mode;
use blie::dynamics::Method;
use blie::lie::{declared_algebra, BLieGroupPair, LieError};
use blie::reduction::ConnectionKind;
use blie::verify::DeformationSpec;
use blie::{ExactAlgebra, ExactMatrix, Expr, Rational};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Lie(#[from] LieError),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// A matrix entry: an integer or a rational written as text (`"1/2"`).
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Entry {
    Int(i64),
    Text(String),
}

impl Entry {
    fn to_rational(&self) -> Result<Rational, ConfigError> {
        match self {
            Entry::Int(n) => Ok(blie::scalar::rational_int(*n)),
            Entry::Text(t) => {
                let e = Expr::parse_in(t, &[]).map_err(|e| invalid(format!("matrix entry `{t}`: {e}")))?;
                e.as_const().cloned().ok_or_else(|| invalid(format!("matrix entry `{t}` is not a number")))
            }
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    /// `se2`, `galilean` or `heisenberg_q`.
    pub builtin: Option<String>,
    pub n: Option<usize>,
    pub name: Option<String>,
    pub basis: Option<Vec<Vec<Vec<Entry>>>>,
    pub labels: Option<Vec<String>>,
    pub transverse: Option<String>,
    pub phi: Option<String>,
    /// Overrides of the declared brackets, e.g. `"[P1, P2] = J + P1"`.
    #[serde(default)]
    pub structure_constants: Vec<String>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConnectionConfig {
    #[serde(default = "default_kind")]
    pub kind: String,
    pub xi: Option<Vec<f64>>,
    pub c: Option<String>,
    #[serde(default)]
    pub b: bool,
    #[serde(default = "default_mode")]
    pub mode: String,
}

fn default_kind() -> String {
    "default".into()
}

fn default_mode() -> String {
    "b".into()
}

impl Default for ConnectionConfig {
    fn default() -> Self {
        ConnectionConfig { kind: default_kind(), xi: None, c: None, b: false, mode: default_mode() }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub samples: Option<usize>,
    pub tolerance: Option<f64>,
    pub dynamics: Option<bool>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub hamiltonian: Option<String>,
    #[serde(default)]
    pub x0: BTreeMap<String, f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub method: Option<String>,
    #[serde(default)]
    pub casimirs: Vec<String>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub group: GroupConfig,
    #[serde(default)]
    pub connection: ConnectionConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Connection selection after validation.
#[derive(Clone, Debug, PartialEq)]
pub enum ConnectionChoice {
    Standard(ConnectionKind),
    Custom(DeformationSpec),
}

/// Flow settings after validation.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowSettings {
    pub hamiltonian: Expr,
    pub x0: BTreeMap<String, f64>,
    pub dt: f64,
    pub t_end: f64,
    pub method: Method,
    pub casimirs: Vec<Expr>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate_shape()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        RunConfig::parse(&text)
    }

    fn validate_shape(&self) -> Result<(), ConfigError> {
        let g = &self.group;
        let custom = g.basis.is_some() || g.labels.is_some() || g.transverse.is_some();
        match (&g.builtin, custom) {
            (Some(_), true) => return Err(invalid("[group] takes either `builtin` or a custom `basis`, not both")),
            (None, false) => return Err(invalid("[group] needs `builtin` or a custom `basis`")),
            _ => {}
        }
        if let Some(t) = self.verify.tolerance {
            if !(t > 0.0) {
                return Err(invalid(format!("verify.tolerance must be positive, got {t}")));
            }
        }
        if self.verify.samples.is_some_and(|s| s < 4) {
            return Err(invalid("verify.samples must be at least 4"));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(blie::sampling::DEFAULT_SEED)
    }

    pub fn pair(&self) -> Result<BLieGroupPair, ConfigError> {
        let g = &self.group;
        if let Some(name) = &g.builtin {
            return Ok(BLieGroupPair::builtin(name, g.n)?);
        }
        let basis = g.basis.as_ref().ok_or_else(|| invalid("custom group needs `basis`"))?;
        let labels = g.labels.clone().ok_or_else(|| invalid("custom group needs `labels`"))?;
        let transverse = g.transverse.as_ref().ok_or_else(|| invalid("custom group needs `transverse`"))?;
        if labels.len() != basis.len() {
            return Err(invalid(format!("{} labels for {} basis matrices", labels.len(), basis.len())));
        }
        let mut mats = Vec::with_capacity(basis.len());
        for (b, label) in basis.iter().zip(&labels) {
            let m = b.len();
            if m == 0 || b.iter().any(|r| r.len() != m) {
                return Err(invalid(format!("basis matrix `{label}` is not square")));
            }
            let rows: Result<Vec<Vec<Rational>>, ConfigError> =
                b.iter().map(|r| r.iter().map(Entry::to_rational).collect()).collect();
            mats.push(ExactMatrix::from_rows(rows?));
        }
        let name = g.name.clone().unwrap_or_else(|| "custom".into());
        let phi = g.phi.clone().unwrap_or_else(|| "phi".into());
        Ok(BLieGroupPair::custom(&name, mats, labels, transverse, &phi)?)
    }

    /// Structure constants claimed for `𝔤`: the tabulated ones for built-ins
    /// (the matrix model's for custom groups), with overrides applied.
    pub fn declared(&self, pair: &BLieGroupPair) -> Result<ExactAlgebra, ConfigError> {
        let base = match &self.group.builtin {
            Some(name) => declared_algebra(name, self.group.n)?,
            None => pair.g_algebra().clone(),
        };
        Ok(base.with_brackets(&self.group.structure_constants)?)
    }

    pub fn mode(&self) -> Result<Mode, ConfigError> {
        match self.connection.mode.as_str() {
            "b" => Ok(Mode::B),
            "smooth" => Ok(Mode::Smooth),
            other => Err(invalid(format!("connection.mode must be `b` or `smooth`, got `{other}`"))),
        }
    }

    pub fn connection(&self, pair: &BLieGroupPair) -> Result<ConnectionChoice, ConfigError> {
        let c = &self.connection;
        let kind = match c.kind.as_str() {
            "default" => ConnectionKind::Default,
            "smooth-deformed" => ConnectionKind::SmoothDeformed,
            "b-deformed" => ConnectionKind::BDeformed,
            "custom" => {
                let xi = c.xi.clone().ok_or_else(|| invalid("custom connection needs `xi`"))?;
                if xi.len() != pair.dim_h() {
                    return Err(invalid(format!("connection.xi has {} entries, 𝔥 has dimension {}", xi.len(), pair.dim_h())));
                }
                let text = c.c.as_deref().ok_or_else(|| invalid("custom connection needs `c`"))?;
                let expr = Expr::parse_in(text, &[pair.phi_name()]).map_err(|e| invalid(format!("connection.c: {e}")))?;
                return Ok(ConnectionChoice::Custom(DeformationSpec { xi, c: expr, b_flag: c.b }));
            }
            other => return Err(invalid(format!("unknown connection kind `{other}`"))),
        };
        Ok(ConnectionChoice::Standard(kind))
    }

    pub fn flow(&self, names: &[String]) -> Result<FlowSettings, ConfigError> {
        let f = &self.flow;
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let parse = |what: &str, t: &str| Expr::parse_in(t, &refs).map_err(|e| invalid(format!("{what}: {e}")));
        let hamiltonian =
            parse("flow.hamiltonian", f.hamiltonian.as_deref().ok_or_else(|| invalid("[flow] needs `hamiltonian`"))?)?;
        for k in f.x0.keys() {
            if !names.contains(k) {
                return Err(invalid(format!("flow.x0 names unknown coordinate `{k}` (expected one of {})", names.join(", "))));
            }
        }
        let dt = f.dt.unwrap_or(1e-3);
        let t_end = f.t_end.unwrap_or(1.0);
        if !(dt > 0.0) || !(t_end >= dt) {
            return Err(invalid(format!("need flow.dt > 0 and flow.t_end >= dt (dt = {dt}, t_end = {t_end})")));
        }
        let method = match &f.method {
            None => Method::Rk4,
            Some(m) => Method::parse(m).ok_or_else(|| invalid(format!("flow.method must be `rk4` or `midpoint`, got `{m}`")))?,
        };
        let casimirs = f.casimirs.iter().map(|c| parse("flow.casimirs", c)).collect::<Result<_, _>>()?;
        Ok(FlowSettings { hamiltonian, x0: f.x0.clone(), dt, t_end, method, casimirs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_and_defaults() {
        let c = RunConfig::parse("[group]\nbuiltin = \"se2\"\n").unwrap();
        assert_eq!(c.seed(), 42);
        assert_eq!(c.pair().unwrap().dim_g(), 3);
        assert_eq!(c.mode().unwrap(), Mode::B);
        assert_eq!(c.connection(&c.pair().unwrap()).unwrap(), ConnectionChoice::Standard(ConnectionKind::Default));
    }

    #[test]
    fn shape_errors() {
        assert!(RunConfig::parse("").is_err());
        assert!(RunConfig::parse("[group]\nbuiltin = \"se2\"\nbasis = []\n").is_err());
        assert!(RunConfig::parse("[group]\nbuiltin = \"se2\"\n[verify]\ntolerance = -1.0\n").is_err());
        assert!(RunConfig::parse("[group]\nbuiltin = \"se2\"\nbogus = 1\n").is_err());
        assert!(RunConfig::parse("[group\n").is_err());
    }

    #[test]
    fn custom_group() {
        let text = r#"
[group]
name = "se2c"
labels = ["J", "P1", "P2"]
transverse = "J"
basis = [
  [[0, -1, 0], [1, 0, 0], [0, 0, 0]],
  [[0, 0, 1], [0, 0, 0], [0, 0, 0]],
  [[0, 0, 0], [0, 0, 1], [0, 0, 0]],
]
"#;
        let c = RunConfig::parse(text).unwrap();
        let pair = c.pair().unwrap();
        assert_eq!(pair.dim_h(), 2);
        assert_eq!(c.declared(&pair).unwrap(), *pair.g_algebra());
    }

    #[test]
    fn flow_settings() {
        let c = RunConfig::parse("[group]\nbuiltin = \"se2\"\n[flow]\nhamiltonian = \"p\"\nx0 = { phi = 1.0 }\n").unwrap();
        let names: Vec<String> = ["mu_P1", "mu_P2", "phi", "p"].iter().map(|s| s.to_string()).collect();
        let f = c.flow(&names).unwrap();
        assert_eq!(f.method, Method::Rk4);
        assert_eq!(f.x0["phi"], 1.0);
        let bad = RunConfig::parse("[group]\nbuiltin = \"se2\"\n[flow]\nhamiltonian = \"q\"\n").unwrap();
        assert!(bad.flow(&names).is_err());
    }
}
