//! JSON run configurations and their translation into library objects.

use std::path::Path;

use serde::{Deserialize, Serialize};
use wulff_core::anisotropy::AnisoNorm;
use wulff_core::pde::{Mesh, SourceTerm};
use wulff_core::radial::ProblemParams;

use crate::CliError;

fn one() -> f64 {
    1.0
}

fn default_points() -> usize {
    256
}

fn default_epsilons() -> Vec<f64> {
    vec![0.1, 0.05, 0.025]
}

fn default_tol() -> f64 {
    1e-8
}

fn default_max_iter() -> usize {
    250
}

fn default_slack_coeff() -> f64 {
    0.5
}

fn default_grid_points() -> usize {
    512
}

fn default_hardy_rings() -> usize {
    48
}

fn default_polygons() -> usize {
    12
}

pub fn load<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Gauge families selectable from a config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormSpec {
    Euclidean,
    RNorm { r: f64 },
    Ellipse { a: f64, b: f64 },
    Sampled { points: Vec<[f64; 2]> },
}

impl NormSpec {
    pub fn build(&self, n: usize) -> Result<AnisoNorm, CliError> {
        let norm = match self {
            NormSpec::Euclidean => AnisoNorm::euclidean(n)?,
            NormSpec::RNorm { r } => AnisoNorm::r_norm(n, *r)?,
            NormSpec::Ellipse { a, b } => AnisoNorm::ellipse(*a, *b)?,
            NormSpec::Sampled { points } => AnisoNorm::sampled(points)?,
        };
        if norm.dim() != n {
            return Err(CliError::Config(format!(
                "norm family is {}-dimensional but the problem needs n = {n}",
                norm.dim()
            )));
        }
        Ok(norm)
    }
}

/// Problem exponents and source strength. The strength may be given
/// directly (`lambda`) or as a fraction of the critical value
/// (`lambda_fraction`); exactly one of the two must be present.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_fraction: Option<f64>,
    #[serde(default = "one")]
    pub radius: f64,
}

impl ParamsConfig {
    pub fn build(&self) -> Result<ProblemParams, CliError> {
        let lambda = match (self.lambda, self.lambda_fraction) {
            (Some(l), None) => l,
            (None, Some(f)) => {
                if !(0.0..1.0).contains(&f) {
                    return Err(CliError::Config(format!(
                        "lambda_fraction must lie in [0, 1), got {f}"
                    )));
                }
                let base = ProblemParams::new(self.n, self.p, self.q, 0.0, self.radius)?;
                f * base.lambda_max()
            }
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "set lambda or lambda_fraction, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "one of lambda or lambda_fraction is required".into(),
                ))
            }
        };
        Ok(ProblemParams::new(self.n, self.p, self.q, lambda, self.radius)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaConfig {
    pub params: ParamsConfig,
}

impl Default for BetaConfig {
    fn default() -> Self {
        Self {
            params: ParamsConfig {
                n: 3,
                p: 2.0,
                q: 2.0,
                lambda: Some(0.1875),
                lambda_fraction: None,
                radius: 1.0,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialConfig {
    pub params: ParamsConfig,
    /// Gauge fixing the Wulff measure of the level sets; Euclidean when
    /// absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm: Option<NormSpec>,
    /// Rows of the profile tables.
    #[serde(default = "default_points")]
    pub points: usize,
    /// Innermost tabulated radius as a fraction of the domain radius.
    #[serde(default = "radial_floor")]
    pub floor: f64,
}

fn radial_floor() -> f64 {
    1e-3
}

impl Default for RadialConfig {
    fn default() -> Self {
        Self {
            params: ParamsConfig {
                n: 2,
                p: 1.8,
                q: 1.8,
                lambda: None,
                lambda_fraction: Some(0.5),
                radius: 1.0,
            },
            norm: None,
            points: default_points(),
            floor: radial_floor(),
        }
    }
}

/// Cell partitions of the Wulff region for sampled fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    /// Square cells on [-r, r]^2 masked to the region.
    Cartesian { cells: usize },
    /// Equal-measure shells split into angular sectors.
    Polar { shells: usize, sectors: usize },
}

/// Scalar fields sampled at cell centers.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    /// lambda / H°(x)^gamma, the critical-scale source.
    SingularPower { lambda: f64, gamma: f64 },
    /// 1 - H°(x)/r.
    Cone,
    /// Indicator of {H° < radius}.
    Indicator { radius: f64 },
    /// (1 - (H°/r)^2)(2 + sin(k x) sin(k y)): a non-radial bump, so the
    /// symmetrization visibly reshuffles it.
    Bump { k: f64 },
}

impl FieldSpec {
    pub fn eval(&self, norm: &AnisoNorm, r: f64, x: &[f64; 2]) -> f64 {
        let rho = norm.polar(x);
        match self {
            FieldSpec::SingularPower { lambda, gamma } => lambda / rho.powf(*gamma),
            FieldSpec::Cone => 1.0 - rho / r,
            FieldSpec::Indicator { radius } => {
                if rho < *radius {
                    1.0
                } else {
                    0.0
                }
            }
            FieldSpec::Bump { k } => {
                let s = rho / r;
                (1.0 - s * s) * (2.0 + (k * x[0]).sin() * (k * x[1]).sin())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetrizeConfig {
    pub norm: NormSpec,
    #[serde(default = "one")]
    pub radius: f64,
    pub grid: GridSpec,
    pub field: FieldSpec,
}

impl Default for SymmetrizeConfig {
    fn default() -> Self {
        Self {
            norm: NormSpec::Ellipse { a: 2.0, b: 1.0 },
            radius: 1.0,
            grid: GridSpec::Cartesian { cells: 128 },
            field: FieldSpec::Bump { k: 3.0 },
        }
    }
}

/// Meshed 2-D domains.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    WulffDisc { radius: f64, rings: usize },
    Rectangle { a: [f64; 2], b: [f64; 2], nx: usize, ny: usize },
}

impl DomainSpec {
    pub fn build(&self, norm: &AnisoNorm) -> Result<Mesh, CliError> {
        Ok(match self {
            DomainSpec::WulffDisc { radius, rings } => Mesh::wulff_disc(norm, *radius, *rings)?,
            DomainSpec::Rectangle { a, b, nx, ny } => Mesh::rectangle(*a, *b, *nx, *ny)?,
        })
    }
}

/// Right-hand sides for the mesh solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    Zero,
    Constant { value: f64 },
    SingularPower { lambda: f64, gamma: f64 },
}

impl SourceSpec {
    pub fn build(&self) -> SourceTerm {
        match self {
            SourceSpec::Zero => SourceTerm::Zero,
            SourceSpec::Constant { value } => SourceTerm::Constant(*value),
            SourceSpec::SingularPower { lambda, gamma } => {
                SourceTerm::SingularPower { lambda: *lambda, gamma: *gamma }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveJobConfig {
    pub norm: NormSpec,
    pub p: f64,
    pub q: f64,
    pub domain: DomainSpec,
    pub source: SourceSpec,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

impl Default for SolveJobConfig {
    fn default() -> Self {
        Self {
            norm: NormSpec::Euclidean,
            p: 1.8,
            q: 1.8,
            domain: DomainSpec::WulffDisc { radius: 1.0, rings: 24 },
            source: SourceSpec::Constant { value: 1.0 },
            epsilons: default_epsilons(),
            tol: default_tol(),
            max_iter: default_max_iter(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub norm: NormSpec,
    pub params: ParamsConfig,
    /// Rings of the solver mesh on the Wulff region of the configured
    /// radius.
    pub rings: usize,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Comparison slack = slack_coeff * sqrt(mesh size).
    #[serde(default = "default_slack_coeff")]
    pub slack_coeff: f64,
    /// Shared evaluation grid for profile comparisons.
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    /// Norm-ladder exponents; when absent a case-appropriate ladder is
    /// chosen.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<f64>>,
    #[serde(default = "default_hardy_rings")]
    pub hardy_rings: usize,
    /// Random convex polygons thrown at the isoperimetric ratio.
    #[serde(default = "default_polygons")]
    pub polygons: usize,
    /// Logarithmic measure axis in the overlay plot.
    #[serde(default)]
    pub log_x: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_fraction_scales_the_critical_value() {
        // n = 3, p = q = 2 has critical strength 1/4.
        let cfg = ParamsConfig {
            n: 3,
            p: 2.0,
            q: 2.0,
            lambda: None,
            lambda_fraction: Some(0.5),
            radius: 1.0,
        };
        let params = cfg.build().unwrap();
        assert!((params.lambda - 0.125).abs() < 1e-14);
    }

    #[test]
    fn lambda_and_fraction_are_mutually_exclusive() {
        let mut cfg = ParamsConfig {
            n: 3,
            p: 2.0,
            q: 2.0,
            lambda: Some(0.1),
            lambda_fraction: Some(0.5),
            radius: 1.0,
        };
        assert!(cfg.build().is_err());
        cfg.lambda = None;
        cfg.lambda_fraction = None;
        assert!(cfg.build().is_err());
        cfg.lambda_fraction = Some(1.0);
        assert!(cfg.build().is_err(), "fraction 1 is the critical value itself");
    }

    #[test]
    fn norm_dimension_must_match_the_problem() {
        let spec = NormSpec::Ellipse { a: 2.0, b: 1.0 };
        assert!(spec.build(2).is_ok());
        assert!(spec.build(3).is_err());
    }

    #[test]
    fn norm_specs_parse_from_tagged_json() {
        let spec: NormSpec = serde_json::from_str(r#"{"family": "r_norm", "r": 4.0}"#).unwrap();
        let norm = spec.build(2).unwrap();
        assert!((norm.h(&[1.0, 0.0]) - 1.0).abs() < 1e-12);
        assert!(serde_json::from_str::<NormSpec>(r#"{"family": "fancy"}"#).is_err());
    }
}
