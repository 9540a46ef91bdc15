//! Browser bindings for the macro-facet pipeline: compile a chronicle, run a
//! selection with its decision trace, and regenerate a small approximation-
//! ratio experiment. All functions take and return JSON strings so the page
//! stays a thin renderer; they are plain Rust underneath and fully testable
//! off-wasm.

use wasm_bindgen::prelude::*;

use facetsel::selection::BRUTE_FORCE_LIMIT;
use facetsel::{
    approximation_ratio, brute_force_optimal, greedy_select, lazy_greedy_select, run_experiment,
    Chronicle, ConstraintsFile, ExperimentConfig, MacroFacetSet, QuotaTree, UtilitySpec,
};

fn pretty(value: &impl serde::Serialize) -> String {
    let value = serde_json::to_value(value).expect("serializable");
    serde_json::to_string_pretty(&value).expect("serializable")
}

/// Condense a chronicle JSON into its macro-facet set JSON.
#[wasm_bindgen]
pub fn compile_chronicle(chronicle_json: &str) -> Result<String, String> {
    let chronicle = Chronicle::from_json(chronicle_json).map_err(|e| e.to_string())?;
    let mset = chronicle.compile().map_err(|e| e.to_string())?;
    Ok(pretty(&mset))
}

/// Run `greedy`, `lazy`, `optimal`, or `compare` over compiled macro-facets.
/// Returns the selection result (with trace) as JSON.
#[wasm_bindgen]
pub fn run_selection(
    macro_facets_json: &str,
    constraints_json: &str,
    utility_json: &str,
    algo: &str,
) -> Result<String, String> {
    let mset = MacroFacetSet::from_json(macro_facets_json).map_err(|e| e.to_string())?;
    let constraints = ConstraintsFile::from_json(constraints_json)
        .map_err(|e| e.to_string())?
        .into_constraints();
    let tree = QuotaTree::build(&mset.ids(), &constraints).map_err(|e| e.to_string())?;
    let spec = UtilitySpec::from_json(utility_json).map_err(|e| e.to_string())?;
    let scripted = spec.is_scripted();
    let tolerant = algo == "lazy";
    let utility = spec
        .build(&mset.ids(), Some(&mset), tolerant)
        .map_err(|e| e.to_string())?;

    let run = |name: &str| -> Result<facetsel::SelectionResult, String> {
        let result = match name {
            "greedy" => greedy_select(utility.as_ref(), &tree),
            "lazy" => lazy_greedy_select(utility.as_ref(), &tree),
            "optimal" => brute_force_optimal(utility.as_ref(), &tree, BRUTE_FORCE_LIMIT),
            other => return Err(format!("unknown algorithm `{other}`")),
        }
        .map_err(|e| e.to_string())?;
        result.with_disclosure(&mset).map_err(|e| e.to_string())
    };

    if algo == "compare" {
        if scripted {
            return Err("scripted traces cannot drive the exhaustive optimum".into());
        }
        let greedy = run("greedy")?;
        let optimal = run("optimal")?;
        let ratio = approximation_ratio(&greedy, &optimal).map_err(|e| e.to_string())?;
        let payload = serde_json::json!({
            "greedy": serde_json::to_value(&greedy).expect("serializable"),
            "optimal": serde_json::to_value(&optimal).expect("serializable"),
            "ratio": ratio,
        });
        Ok(serde_json::to_string_pretty(&payload).expect("serializable"))
    } else {
        if scripted && algo == "optimal" {
            return Err("scripted traces cannot drive the exhaustive optimum".into());
        }
        Ok(pretty(&run(algo)?))
    }
}

/// Greedy vs exhaustive optimum over seeded random instances; returns the
/// report JSON (mean, min, percentile, histogram bins).
#[wasm_bindgen]
pub fn run_ratio_experiment(
    trials: u32,
    num_macro: u32,
    universe: u32,
    groups: u32,
    seed: u32,
) -> Result<String, String> {
    let config = ExperimentConfig {
        trials: trials as usize,
        num_macro: num_macro as usize,
        universe_size: universe as usize,
        num_groups: groups as usize,
        seed: seed as u64,
        ..ExperimentConfig::default()
    };
    let (report, _records) = run_experiment(&config).map_err(|e| e.to_string())?;
    Ok(pretty(&report))
}
