//! Monotone submodular set functions over an ordered ground set, the lift
//! from facet-level utilities to macro-facet level, and brute-force
//! monotonicity/submodularity verifiers.
//!
//! Selections are passed to utilities as strictly ascending index slices into
//! the utility's ground order. Utilities are pure values: evaluation has no
//! side effects and identical queries return identical answers.

use std::collections::{BTreeSet, HashMap};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Mask;
use crate::chronicle::MacroFacetSet;
use crate::error::{Error, Result};

/// Absolute tolerance for utility-value comparisons.
pub const VALUE_TOLERANCE: f64 = 1e-9;

/// Default exhaustive ceiling for [`verify_monotone_submodular`].
pub const VERIFY_EXHAUSTIVE_LIMIT: usize = 6;

/// Sample count used by the sampled verifier above the exhaustive ceiling.
pub const VERIFY_SAMPLES: usize = 10_000;

/// A normalized set function over an ordered ground set.
pub trait Utility: Send + Sync {
    /// The ordered universe this function is defined over.
    fn ground(&self) -> &[String];

    /// Value of the selection given as strictly ascending ground indices.
    /// Must return 0 for the empty selection.
    fn evaluate(&self, selection: &[usize]) -> Result<f64>;

    /// Δ(x | S): gain from adding one element. Overridable when a direct
    /// computation beats two full evaluations.
    fn marginal_gain(&self, selection: &[usize], x: usize) -> Result<f64> {
        if selection.binary_search(&x).is_ok() {
            return Ok(0.0);
        }
        let with = insert_sorted(selection, x);
        Ok(self.evaluate(&with)? - self.evaluate(selection)?)
    }

    /// Δ(X | S) for a set of additions; elements already in `selection`
    /// contribute nothing.
    fn marginal_gain_set(&self, selection: &[usize], xs: &[usize]) -> Result<f64> {
        let mut with: Vec<usize> = selection.to_vec();
        for &x in xs {
            if with.binary_search(&x).is_err() {
                with = insert_sorted(&with, x);
            }
        }
        Ok(self.evaluate(&with)? - self.evaluate(selection)?)
    }

    fn index_of(&self, id: &str) -> Result<usize> {
        self.ground()
            .iter()
            .position(|g| g == id)
            .ok_or_else(|| Error::UnknownMacroFacet(id.to_string()))
    }
}

fn insert_sorted(selection: &[usize], x: usize) -> Vec<usize> {
    let pos = selection.partition_point(|&s| s < x);
    let mut out = Vec::with_capacity(selection.len() + 1);
    out.extend_from_slice(&selection[..pos]);
    out.push(x);
    out.extend_from_slice(&selection[pos..]);
    out
}

/// Δ(X | S) by id, validating every id against the ground.
pub fn marginal_gain_ids(u: &dyn Utility, s: &[&str], xs: &[&str]) -> Result<f64> {
    let mut sel: Vec<usize> = s.iter().map(|id| u.index_of(id)).collect::<Result<_>>()?;
    sel.sort_unstable();
    sel.dedup();
    let x_idx: Vec<usize> = xs.iter().map(|id| u.index_of(id)).collect::<Result<_>>()?;
    u.marginal_gain_set(&sel, &x_idx)
}

/// Weighted set cover: each ground element covers a subset of a weighted
/// universe; the value of a selection is the total weight it covers.
/// Monotone and submodular by construction.
#[derive(Debug, Clone)]
pub struct WeightedCoverage {
    ground: Vec<String>,
    weights: Vec<f64>,
    covers: Vec<Mask>,
}

impl WeightedCoverage {
    /// `covers` maps each ground id to the universe indices it covers.
    pub fn new(
        universe_size: usize,
        weights: Vec<f64>,
        covers: Vec<(String, Vec<usize>)>,
    ) -> Result<Self> {
        if weights.len() != universe_size {
            return Err(Error::InvalidArgument(format!(
                "expected {universe_size} weights, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidArgument(format!("invalid weight {w}")));
        }
        let mut ground = Vec::with_capacity(covers.len());
        let mut masks = Vec::with_capacity(covers.len());
        for (id, indices) in covers {
            let mut mask = Mask::new(universe_size);
            for i in indices {
                if i >= universe_size {
                    return Err(Error::InvalidArgument(format!(
                        "cover index {i} out of range for `{id}`"
                    )));
                }
                mask.set(i);
            }
            if ground.contains(&id) {
                return Err(Error::DuplicateMacroFacetId(id));
            }
            ground.push(id);
            masks.push(mask);
        }
        Ok(WeightedCoverage {
            ground,
            weights,
            covers: masks,
        })
    }

    pub fn universe_size(&self) -> usize {
        self.weights.len()
    }

    fn union_mask(&self, selection: &[usize]) -> Mask {
        let mut mask = Mask::new(self.weights.len());
        for &i in selection {
            mask.union_with(&self.covers[i]);
        }
        mask
    }
}

impl Utility for WeightedCoverage {
    fn ground(&self) -> &[String] {
        &self.ground
    }

    fn evaluate(&self, selection: &[usize]) -> Result<f64> {
        Ok(self.union_mask(selection).weight_sum(&self.weights))
    }

    fn marginal_gain(&self, selection: &[usize], x: usize) -> Result<f64> {
        if selection.binary_search(&x).is_ok() {
            return Ok(0.0);
        }
        let covered = self.union_mask(selection);
        Ok(self.covers[x].weight_sum_minus(&covered, &self.weights))
    }
}

/// Additive utility: the value of a selection is the sum of per-element
/// weights. Monotone and submodular (with equality) for non-negative weights.
#[derive(Debug, Clone)]
pub struct ModularUtility {
    ground: Vec<String>,
    weights: Vec<f64>,
}

impl ModularUtility {
    /// Weights keyed by id; ground order is the sorted key order.
    pub fn new(weights: impl IntoIterator<Item = (String, f64)>) -> Result<Self> {
        let map: std::collections::BTreeMap<String, f64> = weights.into_iter().collect();
        let (ground, weights): (Vec<_>, Vec<_>) = map.into_iter().unzip();
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid weight {w}")));
        }
        Ok(ModularUtility { ground, weights })
    }

    /// Uniform weight per id, preserving the given order.
    pub fn uniform(ids: &[String], weight: f64) -> Self {
        ModularUtility {
            ground: ids.to_vec(),
            weights: vec![weight; ids.len()],
        }
    }

    /// Explicit ground order with weights aligned to it.
    pub fn with_ground(ground: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if ground.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} weights, got {}",
                ground.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument(format!("invalid weight {w}")));
        }
        Ok(ModularUtility { ground, weights })
    }
}

impl Utility for ModularUtility {
    fn ground(&self) -> &[String] {
        &self.ground
    }

    fn evaluate(&self, selection: &[usize]) -> Result<f64> {
        Ok(selection.iter().map(|&i| self.weights[i]).sum())
    }

    fn marginal_gain(&self, selection: &[usize], x: usize) -> Result<f64> {
        if selection.binary_search(&x).is_ok() {
            return Ok(0.0);
        }
        Ok(self.weights[x])
    }
}

/// A facet-level utility lifted to macro-facets: the value of a macro-facet
/// selection is the base value of its expansion.
///
/// Per-macro expansion masks over the base ground are precomputed at
/// construction, so repeated queries cost one mask union each.
pub struct LiftedUtility<B: Utility> {
    base: B,
    ground: Vec<String>,
    expansions: Vec<Mask>,
}

impl<B: Utility> LiftedUtility<B> {
    pub fn new(base: B, mset: &MacroFacetSet) -> Result<Self> {
        let base_index: HashMap<&str, usize> = base
            .ground()
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let mut ground = Vec::with_capacity(mset.len());
        let mut expansions = Vec::with_capacity(mset.len());
        for m in mset.macro_facets() {
            let mut mask = Mask::new(base.ground().len());
            for facet in &m.closure {
                let &bi = base_index
                    .get(facet.as_str())
                    .ok_or_else(|| Error::GroundMismatch {
                        reason: format!(
                            "facet `{facet}` from macro-facet `{}` is not in the base ground",
                            m.id
                        ),
                    })?;
                mask.set(bi);
            }
            ground.push(m.id.clone());
            expansions.push(mask);
        }
        Ok(LiftedUtility {
            base,
            ground,
            expansions,
        })
    }

    fn expansion_indices(&self, selection: &[usize]) -> Vec<usize> {
        let mut mask = Mask::new(self.base.ground().len());
        for &i in selection {
            mask.union_with(&self.expansions[i]);
        }
        mask.iter_ones().collect()
    }
}

impl<B: Utility> Utility for LiftedUtility<B> {
    fn ground(&self) -> &[String] {
        &self.ground
    }

    fn evaluate(&self, selection: &[usize]) -> Result<f64> {
        self.base.evaluate(&self.expansion_indices(selection))
    }
}

/// Lift a boxed base utility, erasing its type.
pub fn lift(
    base: Box<dyn Utility>,
    mset: &MacroFacetSet,
) -> Result<LiftedUtility<Box<dyn Utility>>> {
    LiftedUtility::new(base, mset)
}

impl Utility for Box<dyn Utility> {
    fn ground(&self) -> &[String] {
        self.as_ref().ground()
    }

    fn evaluate(&self, selection: &[usize]) -> Result<f64> {
        self.as_ref().evaluate(selection)
    }

    fn marginal_gain(&self, selection: &[usize], x: usize) -> Result<f64> {
        self.as_ref().marginal_gain(selection, x)
    }

    fn marginal_gain_set(&self, selection: &[usize], xs: &[usize]) -> Result<f64> {
        self.as_ref().marginal_gain_set(selection, xs)
    }
}

/// One recorded marginal-gain observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Current selection at the time of the query (any order).
    pub current: Vec<String>,
    pub candidate: String,
    pub gain: f64,
}

/// Replays recorded marginal gains; any query outside the recording is an
/// error (strict mode) or falls back to the entry for the same candidate at
/// the largest recorded subset of the query set (replay-tolerant mode).
///
/// Set values are derived by chaining gains from the empty set, so final
/// selections can still be re-evaluated.
pub struct ScriptedUtility {
    ground: Vec<String>,
    gains: HashMap<(Vec<usize>, usize), f64>,
    values: HashMap<Vec<usize>, f64>,
    tolerant: bool,
}

impl ScriptedUtility {
    pub fn strict(entries: Vec<TraceEntry>) -> Result<Self> {
        Self::build(entries, None, false)
    }

    pub fn replay_tolerant(entries: Vec<TraceEntry>) -> Result<Self> {
        Self::build(entries, None, true)
    }

    /// Explicit ground order (otherwise inferred as the sorted union of all
    /// ids appearing in the trace).
    pub fn with_ground(
        entries: Vec<TraceEntry>,
        ground: Vec<String>,
        tolerant: bool,
    ) -> Result<Self> {
        Self::build(entries, Some(ground), tolerant)
    }

    fn build(
        entries: Vec<TraceEntry>,
        ground: Option<Vec<String>>,
        tolerant: bool,
    ) -> Result<Self> {
        let ground = match ground {
            Some(g) => g,
            None => {
                let mut ids = BTreeSet::new();
                for e in &entries {
                    ids.insert(e.candidate.clone());
                    ids.extend(e.current.iter().cloned());
                }
                ids.into_iter().collect()
            }
        };
        let index_of: HashMap<&str, usize> = ground
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        if index_of.len() != ground.len() {
            return Err(Error::InconsistentTrace {
                reason: "duplicate ids in ground".into(),
            });
        }

        let mut keyed: Vec<(Vec<usize>, usize, f64)> = Vec::with_capacity(entries.len());
        for e in &entries {
            let mut current: Vec<usize> = e
                .current
                .iter()
                .map(|id| {
                    index_of
                        .get(id.as_str())
                        .copied()
                        .ok_or_else(|| Error::UnknownMacroFacet(id.clone()))
                })
                .collect::<Result<_>>()?;
            current.sort_unstable();
            current.dedup();
            let candidate = *index_of
                .get(e.candidate.as_str())
                .ok_or_else(|| Error::UnknownMacroFacet(e.candidate.clone()))?;
            keyed.push((current, candidate, e.gain));
        }

        let mut gains = HashMap::with_capacity(keyed.len());
        for (current, candidate, gain) in &keyed {
            if let Some(prev) = gains.insert((current.clone(), *candidate), *gain) {
                if (prev - gain).abs() > VALUE_TOLERANCE {
                    return Err(Error::InconsistentTrace {
                        reason: format!("conflicting gains for the same query: {prev} vs {gain}"),
                    });
                }
            }
        }

        // Chain set values from the empty set upward.
        let mut values: HashMap<Vec<usize>, f64> = HashMap::new();
        values.insert(Vec::new(), 0.0);
        keyed.sort_by_key(|(current, _, _)| current.len());
        for (current, candidate, gain) in &keyed {
            if let Some(&base) = values.get(current) {
                if current.binary_search(candidate).is_ok() {
                    continue;
                }
                let with = insert_sorted(current, *candidate);
                let value = base + gain;
                if let Some(&prev) = values.get(&with) {
                    if (prev - value).abs() > VALUE_TOLERANCE {
                        return Err(Error::InconsistentTrace {
                            reason: format!(
                                "set reachable with two different values: {prev} vs {value}"
                            ),
                        });
                    }
                } else {
                    values.insert(with, value);
                }
            }
        }

        Ok(ScriptedUtility {
            ground,
            gains,
            values,
            tolerant,
        })
    }

    fn ids(&self, selection: &[usize]) -> Vec<String> {
        selection.iter().map(|&i| self.ground[i].clone()).collect()
    }
}

impl Utility for ScriptedUtility {
    fn ground(&self) -> &[String] {
        &self.ground
    }

    fn evaluate(&self, selection: &[usize]) -> Result<f64> {
        self.values
            .get(selection)
            .copied()
            .ok_or_else(|| Error::UnscriptedQuery {
                current: self.ids(selection),
                candidate: "<set value>".into(),
            })
    }

    fn marginal_gain(&self, selection: &[usize], x: usize) -> Result<f64> {
        if selection.binary_search(&x).is_ok() {
            return Ok(0.0);
        }
        if let Some(&gain) = self.gains.get(&(selection.to_vec(), x)) {
            return Ok(gain);
        }
        if self.tolerant {
            // nearest recorded prefix: largest recorded subset of `selection`
            // with the same candidate
            let best = self
                .gains
                .iter()
                .filter(|((current, cand), _)| {
                    *cand == x && current.iter().all(|i| selection.binary_search(i).is_ok())
                })
                .max_by_key(|((current, _), _)| current.len())
                .map(|(_, &gain)| gain);
            if let Some(gain) = best {
                return Ok(gain);
            }
        }
        Err(Error::UnscriptedQuery {
            current: self.ids(selection),
            candidate: self.ground[x].clone(),
        })
    }
}

/// Verification outcome with a concrete counterexample on failure.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum UtilityVerdict {
    Pass,
    MonotonicityViolated {
        set: Vec<String>,
        element: String,
        gain: f64,
    },
    SubmodularityViolated {
        a: Vec<String>,
        b: Vec<String>,
        element: String,
        gain_a: f64,
        gain_b: f64,
    },
}

fn mask_to_indices(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask & (1 << i) != 0).collect()
}

/// Exhaustively check normalization, monotonicity, and diminishing returns
/// over every A ⊆ B ⊂ ground and e ∉ B. Ground size is capped by `limit`.
pub fn verify_monotone_submodular(u: &dyn Utility, limit: usize) -> Result<UtilityVerdict> {
    let n = u.ground().len();
    if n > limit {
        return Err(Error::UniverseTooLarge { size: n, limit });
    }
    let empty = u.evaluate(&[])?;
    if empty.abs() > VALUE_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "utility is not normalized: U(empty) = {empty}"
        )));
    }
    let ids = |mask: u64| -> Vec<String> {
        mask_to_indices(mask, n)
            .iter()
            .map(|&i| u.ground()[i].clone())
            .collect()
    };

    // Monotonicity: every single-element gain is non-negative.
    for set in 0u64..(1 << n) {
        let s = mask_to_indices(set, n);
        for e in 0..n {
            if set & (1 << e) != 0 {
                continue;
            }
            let gain = u.marginal_gain(&s, e)?;
            if gain < -VALUE_TOLERANCE {
                return Ok(UtilityVerdict::MonotonicityViolated {
                    set: ids(set),
                    element: u.ground()[e].clone(),
                    gain,
                });
            }
        }
    }

    // Diminishing returns over every nested pair.
    for b in 0u64..(1 << n) {
        let b_idx = mask_to_indices(b, n);
        // iterate strict and non-strict submasks of b
        let mut a = b;
        loop {
            let a_idx = mask_to_indices(a, n);
            for e in 0..n {
                if b & (1 << e) != 0 {
                    continue;
                }
                let gain_a = u.marginal_gain(&a_idx, e)?;
                let gain_b = u.marginal_gain(&b_idx, e)?;
                if gain_a < gain_b - VALUE_TOLERANCE {
                    return Ok(UtilityVerdict::SubmodularityViolated {
                        a: ids(a),
                        b: ids(b),
                        element: u.ground()[e].clone(),
                        gain_a,
                        gain_b,
                    });
                }
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & b;
        }
    }
    Ok(UtilityVerdict::Pass)
}

/// Sampled variant for grounds too large to scan exhaustively: checks
/// `samples` random (A ⊆ B, e ∉ B) triples plus single-element monotonicity
/// at random sets.
pub fn verify_monotone_submodular_sampled(
    u: &dyn Utility,
    samples: usize,
    seed: u64,
) -> Result<UtilityVerdict> {
    let n = u.ground().len();
    if n == 0 {
        return Ok(UtilityVerdict::Pass);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids =
        |idx: &[usize]| -> Vec<String> { idx.iter().map(|&i| u.ground()[i].clone()).collect() };
    for _ in 0..samples {
        let mut b_idx: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        let e = rng.random_range(0..n);
        b_idx.retain(|&i| i != e);
        let a_idx: Vec<usize> = b_idx
            .iter()
            .copied()
            .filter(|_| rng.random_bool(0.5))
            .collect();

        let gain_a = u.marginal_gain(&a_idx, e)?;
        let gain_b = u.marginal_gain(&b_idx, e)?;
        if gain_b < -VALUE_TOLERANCE {
            return Ok(UtilityVerdict::MonotonicityViolated {
                set: ids(&b_idx),
                element: u.ground()[e].clone(),
                gain: gain_b,
            });
        }
        if gain_a < gain_b - VALUE_TOLERANCE {
            return Ok(UtilityVerdict::SubmodularityViolated {
                a: ids(&a_idx),
                b: ids(&b_idx),
                element: u.ground()[e].clone(),
                gain_a,
                gain_b,
            });
        }
    }
    Ok(UtilityVerdict::Pass)
}
