//! JSON wire formats shared by the CLI and the browser demo: constraint
//! files and utility files. Chronicle and macro-facet files are handled by
//! their own types' serde implementations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chronicle::MacroFacetSet;
use crate::error::{Error, Result};
use crate::matroid::QuotaConstraint;
use crate::utility::{
    LiftedUtility, ModularUtility, ScriptedUtility, TraceEntry, Utility, WeightedCoverage,
};

/// `{"constraints":[{"members":[...],"quota":n,"name"?:...}], "exclusive":[[ids]...]}`
///
/// Each exclusive group is sugar for a member set with quota 1.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConstraintsFile {
    #[serde(default)]
    pub constraints: Vec<QuotaConstraint>,
    #[serde(default)]
    pub exclusive: Vec<Vec<String>>,
}

impl ConstraintsFile {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json)
            .map_err(|e| Error::InvalidArgument(format!("constraints JSON: {e}")))
    }

    /// Flatten into plain constraints, expanding the exclusivity sugar.
    pub fn into_constraints(self) -> Vec<QuotaConstraint> {
        let mut out = self.constraints;
        for (i, group) in self.exclusive.into_iter().enumerate() {
            out.push(QuotaConstraint::named(&format!("x{i}"), group, 1));
        }
        out
    }
}

/// Utility file contents, dispatched on `"kind"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum UtilitySpec {
    /// Weighted set cover over an integer universe.
    Coverage {
        universe: usize,
        weights: Vec<f64>,
        covers: BTreeMap<String, Vec<usize>>,
    },
    /// Additive weights. Keys may be macro-facet ids (used directly) or raw
    /// facet ids (lifted through the compiled macro-facet set).
    Modular { weights: BTreeMap<String, f64> },
    /// Recorded marginal gains for golden replays.
    Scripted {
        trace: Vec<TraceEntry>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ground: Option<Vec<String>>,
    },
}

impl UtilitySpec {
    pub fn from_json(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::InvalidArgument(format!("utility JSON: {e}")))
    }

    pub fn is_scripted(&self) -> bool {
        matches!(self, UtilitySpec::Scripted { .. })
    }

    /// Instantiate the utility over `universe` (the selection ground order).
    ///
    /// `mset` enables lifting facet-keyed modular weights; `tolerant` selects
    /// the replay-tolerant mode for scripted traces.
    pub fn build(
        self,
        universe: &[String],
        mset: Option<&MacroFacetSet>,
        tolerant: bool,
    ) -> Result<Box<dyn Utility>> {
        match self {
            UtilitySpec::Coverage {
                universe: size,
                weights,
                covers,
            } => {
                let mut ordered = Vec::with_capacity(universe.len());
                let mut covers = covers;
                for id in universe {
                    let indices = covers.remove(id).ok_or_else(|| Error::GroundMismatch {
                        reason: format!("coverage file has no cover set for `{id}`"),
                    })?;
                    ordered.push((id.clone(), indices));
                }
                if let Some((extra, _)) = covers.into_iter().next() {
                    return Err(Error::GroundMismatch {
                        reason: format!("coverage file covers unknown id `{extra}`"),
                    });
                }
                Ok(Box::new(WeightedCoverage::new(size, weights, ordered)?))
            }
            UtilitySpec::Modular { weights } => {
                let keys_match_universe = weights.len() == universe.len()
                    && universe.iter().all(|id| weights.contains_key(id));
                if keys_match_universe {
                    let ordered: Vec<f64> = universe.iter().map(|id| weights[id]).collect();
                    return Ok(Box::new(ModularUtility::with_ground(
                        universe.to_vec(),
                        ordered,
                    )?));
                }
                // facet-keyed weights: lift through the compiled set
                let mset = mset.ok_or_else(|| Error::GroundMismatch {
                    reason: "modular weights are not keyed by the selection universe and no \
                             compiled macro-facet set is available for lifting"
                        .into(),
                })?;
                let base = ModularUtility::new(weights)?;
                let lifted = LiftedUtility::new(base, mset)?;
                if lifted.ground() != universe {
                    return Err(Error::GroundMismatch {
                        reason: "lifted utility ground does not match the selection universe"
                            .into(),
                    });
                }
                Ok(Box::new(lifted))
            }
            UtilitySpec::Scripted { trace, ground } => {
                let ground = ground.unwrap_or_else(|| universe.to_vec());
                if ground != universe {
                    return Err(Error::GroundMismatch {
                        reason: "scripted ground does not match the selection universe".into(),
                    });
                }
                Ok(Box::new(ScriptedUtility::with_ground(
                    trace, ground, tolerant,
                )?))
            }
        }
    }
}
