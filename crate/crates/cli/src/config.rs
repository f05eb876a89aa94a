use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use staticdec_core::catalog::{CatalogSpace, EinsteinChainConfig, StaticFieldFamily};
use staticdec_core::{Interval, SignEpsilon};

use crate::error::CliError;

/// The named verification suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Suite {
    #[serde(rename = "lemma1")]
    ProductIdentities,
    #[serde(rename = "lemma2")]
    LightlikeFormula,
    #[serde(rename = "prop31")]
    KillingProjection,
    #[serde(rename = "prop41")]
    StaticProjection,
    #[serde(rename = "prop42-scan")]
    Dichotomy,
    #[serde(rename = "prop45-catalog")]
    FieldCatalog,
    #[serde(rename = "ode")]
    WarpOde,
    #[serde(rename = "cor34-null")]
    NullPlanes,
    #[serde(rename = "thm52-einstein")]
    Einstein,
    #[serde(rename = "tod-family")]
    TodFamily,
    #[serde(rename = "flow-decomp")]
    FlowDecomposition,
    #[serde(rename = "bianchi-sanity")]
    BianchiSanity,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::ProductIdentities,
        Suite::LightlikeFormula,
        Suite::KillingProjection,
        Suite::StaticProjection,
        Suite::Dichotomy,
        Suite::FieldCatalog,
        Suite::WarpOde,
        Suite::NullPlanes,
        Suite::Einstein,
        Suite::TodFamily,
        Suite::FlowDecomposition,
        Suite::BianchiSanity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::ProductIdentities => "lemma1",
            Suite::LightlikeFormula => "lemma2",
            Suite::KillingProjection => "prop31",
            Suite::StaticProjection => "prop41",
            Suite::Dichotomy => "prop42-scan",
            Suite::FieldCatalog => "prop45-catalog",
            Suite::WarpOde => "ode",
            Suite::NullPlanes => "cor34-null",
            Suite::Einstein => "thm52-einstein",
            Suite::TodFamily => "tod-family",
            Suite::FlowDecomposition => "flow-decomp",
            Suite::BianchiSanity => "bianchi-sanity",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| CliError::UnknownSuite(s.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Sample points per check.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Time slices for projection and dichotomy checks.
    #[serde(default = "default_t_samples")]
    pub t_samples: usize,
    /// Random parameter or plane draws.
    #[serde(default = "default_draws")]
    pub draws: usize,
    /// Degenerate planes per point in null scans.
    #[serde(default = "default_planes")]
    pub planes: usize,
}

fn default_samples() -> usize {
    100
}
fn default_t_samples() -> usize {
    5
}
fn default_draws() -> usize {
    5
}
fn default_planes() -> usize {
    20
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            samples: default_samples(),
            t_samples: default_t_samples(),
            draws: default_draws(),
            planes: default_planes(),
        }
    }
}

/// One member of the Tod family with its `u` interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TodCase {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub u_domain: Interval,
}

/// Suite-specific knobs; each suite reads the ones it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteParams {
    /// ODE constant `k`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<SignEpsilon>,
    /// Rate `r` of the model planes in the field catalog suite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Adds `magnitude · s ∂s` to the field under test.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<f64>,
    /// Replace the configured `α, β, γ` by this many seeded draws in `[−2, 2]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_draws: Option<usize>,
    /// Time slices for the dichotomy scan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_values: Option<Vec<f64>>,
    /// Reference slice for the proportionality check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    /// Explicit evaluation points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<Vec<f64>>>,
    /// Required lower bound on `min |K_u|` instead of a flat plane.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub einstein: Option<EinsteinChainConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tod: Option<Vec<TodCase>>,
    /// RK4 step for flow integration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow_step: Option<f64>,
    /// Point the orthogonal leaf passes through.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaf_origin: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<CatalogSpace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<StaticFieldFamily>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub seed: u64,
    /// Per-check tolerance overrides, keyed by check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub params: SuiteParams,
}

impl SuiteConfig {
    pub fn for_suite(suite: Suite) -> Self {
        SuiteConfig {
            suite: Some(suite),
            space: None,
            field: None,
            grid: GridConfig::default(),
            seed: 0,
            tolerances: BTreeMap::new(),
            params: SuiteParams::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Tolerance for `check`, or `default` when not overridden.
    pub fn tolerance(&self, check: &str, default: f64) -> f64 {
        self.tolerances.get(check).copied().unwrap_or(default)
    }

    pub fn validate(&self) -> Result<Suite, CliError> {
        let suite = self
            .suite
            .ok_or_else(|| CliError::Config("no suite given".into()))?;
        let g = &self.grid;
        if g.samples == 0 || g.t_samples == 0 || g.draws == 0 || g.planes == 0 {
            return Err(CliError::Config("grid sizes must be at least 1".into()));
        }
        for (name, t) in &self.tolerances {
            if !(t.is_finite() && *t >= 0.0) {
                return Err(CliError::Config(format!(
                    "tolerance for {name} must be finite and nonnegative"
                )));
            }
        }
        if let Some(space) = &self.space {
            space.validate()?;
        }
        Ok(suite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.name()));
        }
        assert!("lemma3".parse::<Suite>().is_err());
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = SuiteConfig::from_json(r#"{"suite": "ode", "params": {"k": 1.0, "eps": -1}}"#).unwrap();
        assert_eq!(c.grid, GridConfig::default());
        assert_eq!(c.params.eps, Some(SignEpsilon::Minus));
        assert_eq!(c.validate().unwrap(), Suite::WarpOde);
    }

    #[test]
    fn unknown_fields_and_zero_grids_rejected() {
        assert!(SuiteConfig::from_json(r#"{"suite": "ode", "bogus": 1}"#).is_err());
        let c = SuiteConfig::from_json(r#"{"suite": "ode", "grid": {"samples": 0}}"#).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn space_descriptor_parses() {
        let c = SuiteConfig::from_json(
            r#"{"suite": "prop31",
                "space": {"kind": "h2eps", "eps": -1, "r": 1.0},
                "field": {"family": "Prop45_2", "alpha": 1.0}}"#,
        )
        .unwrap();
        assert_eq!(c.space, Some(CatalogSpace::H2eps { eps: SignEpsilon::Minus, r: 1.0 }));
        assert!(c.field.is_some());
    }
}
