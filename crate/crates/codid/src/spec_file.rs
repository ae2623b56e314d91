//! Random-utility specification files.
//!
//! ```json
//! {
//!   "categories": ["a", "b", "c"],
//!   "groups": ["control", "treated"],
//!   "periods": [0, 1],
//!   "mu": [[[0.1, 0.2, 0.0], [0.3, 0.1, 0.0]], [[0.5, 0.0, 0.2], [0.7, -0.1, 0.2]]],
//!   "totals": [[1000, 1100], [800, 900]],
//!   "family": {"type": "nested_logit", "nests": [["a", "b"], ["c"]], "lambdas": [0.5, 1.0]},
//!   "treatment": {"group": "treated", "first_treated": 1, "mu_shift": [0.2, 0, 0], "total_factor": 1.1}
//! }
//! ```
//!
//! `mu` is indexed `[group][period][category]` and `totals` `[group][period]`.
//! Instead of `mu` and `totals`, a logit file may give `expected_utilities`
//! with the same shape as `mu`; totals then follow from them. Families:
//! `logit`; `nested_logit` (`nests` as label lists, `lambdas`); `pcl`
//! (`lambdas`, a symmetric p×p matrix whose diagonal is ignored); `gnl`
//! (`alphas[m][k]` allocations, `lambdas`).

use serde::{Deserialize, Serialize};

use codid_core::rum::{GevFamily, GnlNest, Nest, Treatment, UtilitySpec};
use codid_core::simplex::Categories;

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyFile {
    #[default]
    Logit,
    NestedLogit {
        nests: Vec<Vec<String>>,
        lambdas: Vec<f64>,
    },
    Pcl {
        lambdas: Vec<Vec<f64>>,
    },
    Gnl {
        alphas: Vec<Vec<f64>>,
        lambdas: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreatmentFile {
    pub group: String,
    pub first_treated: i64,
    #[serde(default)]
    pub mu_shift: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub total_factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub categories: Vec<String>,
    pub groups: Vec<String>,
    pub periods: Vec<i64>,
    #[serde(default)]
    pub mu: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default)]
    pub totals: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub expected_utilities: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default)]
    pub family: FamilyFile,
    #[serde(default)]
    pub treatment: Option<TreatmentFile>,
}

fn family(file: &FamilyFile, cats: &Categories) -> Result<GevFamily> {
    let lookup = |label: &String| {
        cats.index_of(label)
            .ok_or_else(|| codid_core::Error::UnknownCategory(label.clone()))
    };
    let mismatch = |what: &str| {
        codid_core::Error::InvalidNestStructure(format!("{what}: one lambda per nest required"))
    };
    Ok(match file {
        FamilyFile::Logit => GevFamily::Logit,
        FamilyFile::NestedLogit { nests, lambdas } => {
            if nests.len() != lambdas.len() {
                return Err(mismatch("nested_logit").into());
            }
            let nests = nests
                .iter()
                .zip(lambdas)
                .map(|(m, &lambda)| {
                    Ok(Nest {
                        members: m.iter().map(lookup).collect::<codid_core::Result<_>>()?,
                        lambda,
                    })
                })
                .collect::<codid_core::Result<_>>()?;
            GevFamily::NestedLogit(nests)
        }
        FamilyFile::Pcl { lambdas } => GevFamily::PairedCombinatorial(lambdas.clone()),
        FamilyFile::Gnl { alphas, lambdas } => {
            if alphas.len() != lambdas.len() {
                return Err(mismatch("gnl").into());
            }
            GevFamily::GeneralizedNested(
                alphas
                    .iter()
                    .zip(lambdas)
                    .map(|(a, &lambda)| GnlNest { alpha: a.clone(), lambda })
                    .collect(),
            )
        }
    })
}

impl SpecFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn into_spec(self) -> Result<UtilitySpec> {
        let categories = Categories::new(self.categories.iter().cloned())?;
        let family = family(&self.family, &categories)?;
        let mut spec = match (self.expected_utilities, self.mu, self.totals) {
            (Some(eu), None, None) => {
                if family != GevFamily::Logit {
                    return Err(CliError::Usage("expected_utilities requires the logit family".into()));
                }
                UtilitySpec::logit_from_expected_utilities(categories, self.groups, self.periods, eu)?
            }
            (None, Some(mu), Some(totals)) => UtilitySpec {
                categories,
                groups: self.groups,
                periods: self.periods,
                mu,
                totals,
                family,
                treatment: None,
            },
            _ => {
                return Err(CliError::Usage(
                    "give either `mu` and `totals`, or `expected_utilities`".into(),
                ))
            }
        };
        let p = spec.categories.len();
        spec.treatment = self.treatment.map(|t| Treatment {
            group: t.group,
            first_treated: t.first_treated,
            mu_shift: t.mu_shift.unwrap_or_else(|| vec![0.0; p]),
            total_factor: t.total_factor,
        });
        spec.validate()?;
        Ok(spec)
    }
}
