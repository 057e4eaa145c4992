//! TOML scenario files.
//!
//! ```toml
//! [scenario]
//! example = "cox"          # cox | transformation | aft | nonlinear
//! n = 200
//! p = 2000
//! target_cr = 0.3
//! seed = 1
//! # covariance = { kind = "ar1", rho = 0.6 }   optional override
//!
//! [experiment]             # optional
//! n_reps = 500
//! variants = [{ name = "XIM-SIS2", rule = "sqrt" }]
//!
//! [quick]                  # used with --quick
//! n_reps = 100
//! p = 500
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{ExperimentSpec, Variant};
use crate::simgen::{Covariance, SimScenario, SurvivalModel};

pub const QUICK_REPLICATIONS: usize = 100;
pub const QUICK_FEATURES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Cox,
    Transformation,
    Aft,
    Nonlinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub example: Option<Preset>,
    pub model: Option<SurvivalModel>,
    pub covariance: Option<Covariance>,
    pub n: usize,
    pub p: usize,
    pub target_cr: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub n_reps: Option<usize>,
    pub variants: Option<Vec<Variant>>,
    pub model_sizes: Option<Vec<usize>>,
    pub base_seed: Option<u64>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuickSection {
    #[serde(default = "quick_reps")]
    pub n_reps: usize,
    #[serde(default = "quick_features")]
    pub p: usize,
}

fn quick_reps() -> usize {
    QUICK_REPLICATIONS
}

fn quick_features() -> usize {
    QUICK_FEATURES
}

impl Default for QuickSection {
    fn default() -> Self {
        Self {
            n_reps: QUICK_REPLICATIONS,
            p: QUICK_FEATURES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub quick: QuickSection,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn scenario(&self, quick: bool) -> Result<SimScenario> {
        let s = &self.scenario;
        let p = if quick { self.quick.p } else { s.p };
        let mut scenario = match (s.example, &s.model) {
            (Some(Preset::Cox), _) => SimScenario::cox_example(s.n, p, s.target_cr, s.seed),
            (Some(Preset::Transformation), _) => {
                SimScenario::transformation_example(s.n, p, s.target_cr, s.seed)
            }
            (Some(Preset::Aft), _) => SimScenario::aft_example(s.n, p, s.target_cr, s.seed),
            (Some(Preset::Nonlinear), _) => {
                SimScenario::nonlinear_example(s.n, p, s.target_cr, s.seed)
            }
            (None, Some(model)) => SimScenario {
                model: model.clone(),
                n: s.n,
                p,
                covariance: s.covariance.ok_or_else(|| {
                    Error::Config("scenario without `example` needs `covariance`".into())
                })?,
                target_cr: s.target_cr,
                seed: s.seed,
            },
            (None, None) => {
                return Err(Error::Config("scenario needs `example` or `model`".into()))
            }
        };
        if s.example.is_some() {
            if let Some(model) = &s.model {
                scenario.model = model.clone();
            }
            if let Some(cov) = &s.covariance {
                scenario.covariance = *cov;
            }
        }
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_spec(&self, quick: bool) -> Result<ExperimentSpec> {
        let mut spec = ExperimentSpec::new(self.scenario(quick)?);
        let e = &self.experiment;
        if let Some(n) = e.n_reps {
            spec.n_reps = n;
        }
        if let Some(v) = &e.variants {
            spec.variants = v.clone();
        }
        if let Some(d) = &e.model_sizes {
            spec.model_sizes = d.clone();
        }
        if let Some(s) = e.base_seed {
            spec.base_seed = s;
        }
        if let Some(w) = e.workers {
            spec.workers = w;
        }
        if quick {
            spec.n_reps = self.quick.n_reps;
            spec.model_sizes.retain(|&d| d <= spec.scenario.p);
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::screening::NeighborRule;

    const EXAMPLE: &str = r#"
[scenario]
example = "cox"
n = 200
p = 2000
target_cr = 0.3
seed = 9

[experiment]
n_reps = 500
variants = [{ name = "XIM-SIS2", rule = "sqrt" }]
"#;

    #[test]
    fn full_and_quick() {
        let cfg = ScenarioConfig::from_toml(EXAMPLE).unwrap();
        let full = cfg.to_spec(false).unwrap();
        assert_eq!(
            (full.n_reps, full.scenario.p, full.scenario.n),
            (500, 2000, 200)
        );
        assert_eq!(
            full.variants,
            vec![Variant::new("XIM-SIS2", NeighborRule::SqrtOffset(0))]
        );
        let quick = cfg.to_spec(true).unwrap();
        assert_eq!((quick.n_reps, quick.scenario.p), (100, 500));
    }

    #[test]
    fn explicit_model() {
        let text = r#"
[scenario]
model = { family = "aft" }
covariance = { kind = "compound_symmetry", rho = 0.3 }
n = 50
p = 20
target_cr = 0.2
"#;
        let s = ScenarioConfig::from_toml(text)
            .unwrap()
            .scenario(false)
            .unwrap();
        assert_eq!(s.model, SurvivalModel::Aft);
        assert_eq!(s.covariance, Covariance::CompoundSymmetry { rho: 0.3 });
    }

    #[test]
    fn invalid_configs() {
        assert!(
            ScenarioConfig::from_toml("[scenario]\nn = 5\np = 5\ntarget_cr = 0.3\n")
                .unwrap()
                .scenario(false)
                .is_err()
        );
        assert!(ScenarioConfig::from_toml("[scenario]\nexample = \"cox\"\nbogus = 1\n").is_err());
        let bad_cr = EXAMPLE.replace("0.3", "1.5");
        assert!(ScenarioConfig::from_toml(&bad_cr)
            .unwrap()
            .to_spec(false)
            .is_err());
    }
}
