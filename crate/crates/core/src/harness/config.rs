use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ansatz::Envelope;
use crate::expr::Expr;
use crate::fem::Rect;
use crate::grid::Grid1D;
use crate::profile::DielectricProfile;
use crate::transmission::{OuterBoundary, SolverConfig};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Dispersion,
    HSweep,
    EpsSweep,
    ResidualTrace,
    Audit,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Dispersion => "dispersion",
            Self::HSweep => "h-sweep",
            Self::EpsSweep => "eps-sweep",
            Self::ResidualTrace => "residual-trace",
            Self::Audit => "audit",
        }
    }
}

/// Either a named built-in or four expressions in `x` (one per side and coefficient).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps1_minus: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps1_plus: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps3_minus: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps3_plus: Option<String>,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        Self { builtin: Some("fig1".into()), eps1_minus: None, eps1_plus: None, eps3_minus: None, eps3_plus: None }
    }
}

impl ProfileSpec {
    pub fn build(&self) -> Result<DielectricProfile, HarnessError> {
        let exprs = [&self.eps1_minus, &self.eps1_plus, &self.eps3_minus, &self.eps3_plus];
        match (&self.builtin, exprs) {
            (Some(name), [None, None, None, None]) => Ok(DielectricProfile::builtin(name)?),
            (None, [Some(a), Some(b), Some(c), Some(d)]) => Ok(DielectricProfile::from_expressions(a, b, c, d)?),
            _ => Err(HarnessError::Config(
                "profile needs either `builtin` or all of eps1_minus, eps1_plus, eps3_minus, eps3_plus".into(),
            )),
        }
    }
}

/// Slow envelope `𝒜`; the expression form is written in the variable `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EnvelopeSpec {
    Gaussian { c: f64 },
    Constant { value: f64 },
    Zero,
    Expression { expr: String },
}

impl Default for EnvelopeSpec {
    fn default() -> Self {
        Self::Gaussian { c: 5e6 }
    }
}

impl EnvelopeSpec {
    pub fn build(&self) -> Result<Envelope, HarnessError> {
        Ok(match self {
            Self::Gaussian { c } if *c > 0.0 => Envelope::gaussian(*c),
            Self::Gaussian { c } => return Err(HarnessError::Config(format!("gaussian width c must be positive, got {c}"))),
            Self::Constant { value } => Envelope::constant(*value),
            Self::Zero => Envelope::zero(),
            Self::Expression { expr } => {
                let e = Expr::parse(expr).map_err(|err| HarnessError::Config(format!("envelope: {err}")))?;
                Envelope::from_fn(expr.clone(), move |y| {
                    let d = e.eval_dual(y);
                    (d.v, d.d)
                })
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModeGridSpec {
    pub left: f64,
    pub right: f64,
    pub spacing: f64,
}

impl Default for ModeGridSpec {
    fn default() -> Self {
        Self { left: -40.0, right: 40.0, spacing: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainSpec {
    pub minus: Rect,
    pub plus: Rect,
}

impl Default for DomainSpec {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self { minus: d.minus, plus: d.plus }
    }
}

/// One experiment, read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub profile: ProfileSpec,
    #[serde(default = "default_omega")]
    pub omega0: f64,
    /// Extra frequencies for the dispersion table; `omega0` is always included.
    #[serde(default)]
    pub omegas: Vec<f64>,
    #[serde(default)]
    pub envelope: EnvelopeSpec,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "default_h")]
    pub h: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_relaxation")]
    pub relaxation: f64,
    #[serde(default)]
    pub outer_boundary: OuterBoundary,
    #[serde(default)]
    pub mode_grid: ModeGridSpec,
    #[serde(default)]
    pub domain: DomainSpec,
    /// Bound on the estimate ratio checked by the audit.
    #[serde(default = "default_ratio_bound")]
    pub ratio_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn default_omega() -> f64 {
    3.0
}
fn default_eps() -> Vec<f64> {
    vec![1e-3, 7e-4, 5e-4, 3e-4, 2e-4, 1e-4]
}
fn default_h() -> Vec<f64> {
    vec![0.05]
}
fn default_tol() -> f64 {
    1e-8
}
fn default_max_iter() -> usize {
    50
}
fn default_relaxation() -> f64 {
    1.0
}
fn default_ratio_bound() -> f64 {
    0.1
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let c: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// A minimal config of the given kind with every other field at its default.
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            profile: ProfileSpec::default(),
            omega0: default_omega(),
            omegas: Vec::new(),
            envelope: EnvelopeSpec::default(),
            eps: default_eps(),
            h: default_h(),
            tol: default_tol(),
            max_iter: default_max_iter(),
            relaxation: default_relaxation(),
            outer_boundary: OuterBoundary::default(),
            mode_grid: ModeGridSpec::default(),
            domain: DomainSpec::default(),
            ratio_bound: default_ratio_bound(),
            output_dir: None,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks everything that can be checked without computing.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.eps.is_empty() || self.h.is_empty() {
            return bad("eps and h lists must be non-empty".into());
        }
        if !(self.omega0.is_finite() && self.omega0 != 0.0) || self.omegas.iter().any(|w| !w.is_finite() || *w == 0.0) {
            return bad("frequencies must be finite and nonzero".into());
        }
        if !(self.ratio_bound > 0.0) {
            return bad(format!("ratio_bound must be positive, got {}", self.ratio_bound));
        }
        self.profile.build()?;
        self.envelope.build()?;
        self.mode_grid()?;
        for &eps in &self.eps {
            for &h in &self.h {
                let s = self.solver(eps, h);
                s.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
                crate::fem::build_mesh(s.minus, s.plus, h).map_err(|e| HarnessError::Config(e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn mode_grid(&self) -> Result<Grid1D, HarnessError> {
        let g = &self.mode_grid;
        Grid1D::new(g.left, g.right, g.spacing).map_err(|e| HarnessError::Config(format!("mode grid: {e}")))
    }

    pub fn solver(&self, eps: f64, h: f64) -> SolverConfig {
        SolverConfig {
            eps,
            h,
            tol: self.tol,
            max_iter: self.max_iter,
            p: 3,
            relaxation: self.relaxation,
            outer_boundary: self.outer_boundary,
            minus: self.domain.minus,
            plus: self.domain.plus,
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(self.experiment.name()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::from_toml("experiment = \"eps-sweep\"").unwrap();
        assert_eq!(c, RunConfig::new(ExperimentKind::EpsSweep));
        assert_eq!(c.output_dir(), PathBuf::from("out/eps-sweep"));
    }

    #[test]
    fn round_trip() {
        let mut c = RunConfig::new(ExperimentKind::Audit);
        c.envelope = EnvelopeSpec::Expression { expr: "exp(-x^2)".into() };
        c.profile = ProfileSpec {
            builtin: None,
            eps1_minus: Some("1".into()),
            eps1_plus: Some("2".into()),
            eps3_minus: Some("1".into()),
            eps3_plus: Some("1".into()),
        };
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_values() {
        let cases = [
            "experiment = \"eps-sweep\"\ntol = 0.0",
            "experiment = \"eps-sweep\"\ntol = -1.0",
            "experiment = \"eps-sweep\"\neps = []",
            "experiment = \"eps-sweep\"\nh = [0.07]",
            "experiment = \"nonsense\"",
            "experiment = \"audit\"\nunknown_key = 1",
            "experiment = \"audit\"\n[profile]\nbuiltin = \"nope\"",
            "experiment = \"audit\"\n[profile]\nbuiltin = \"fig1\"\neps1_minus = \"1\"",
            "experiment = \"audit\"\n[envelope]\nkind = \"expression\"\nexpr = \"exp(\"",
        ];
        for text in cases {
            let err = RunConfig::from_toml(text).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}: {err}");
        }
    }
}
