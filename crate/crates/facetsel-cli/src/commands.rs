//! Subcommand implementations. Payload JSON goes to `--out` (atomic write)
//! or stdout; human-readable summaries and diagnostics go to stderr.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use facetsel::matroid::EXHAUSTIVE_LIMIT;
use facetsel::selection::BRUTE_FORCE_LIMIT;
use facetsel::simulation::{histogram_csv, trials_csv};
use facetsel::utility::{Utility, VERIFY_EXHAUSTIVE_LIMIT, VERIFY_SAMPLES};
use facetsel::{
    approximation_ratio, brute_force_optimal, greedy_select, lazy_greedy_select, run_experiment,
    AxiomVerdict, Chronicle, ConstraintsFile, ExperimentConfig, MacroFacetSet, QuotaTree,
    SelectionResult, UtilitySpec, UtilityVerdict,
};

use crate::diag::{Diagnostic, Failure, EXIT_LIMIT, EXIT_VALIDATION};

pub const OUT_DIR_ENV: &str = "FACETSEL_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Algo {
    Greedy,
    Lazy,
    Optimal,
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::io(&format!("reading {}", path.display()), e))
}

/// Prefix relative paths with $FACETSEL_OUT_DIR when it is set.
fn resolve_out(path: PathBuf) -> PathBuf {
    if path.is_absolute() {
        return path;
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path,
    }
}

/// Write via a temporary file and rename, so a killed run never leaves a
/// truncated file behind.
fn write_atomic(path: &Path, content: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| Failure::io(&format!("creating {}", parent.display()), e))?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, content).map_err(|e| Failure::io(&format!("writing {}", tmp.display()), e))?;
    fs::rename(&tmp, path).map_err(|e| Failure::io(&format!("renaming into {}", path.display()), e))
}

fn emit_payload(out: Option<PathBuf>, payload: &serde_json::Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(payload).expect("payload serializes");
    text.push('\n');
    match out {
        Some(path) => write_atomic(&resolve_out(path), &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_mset(path: &Path) -> Result<MacroFacetSet, Failure> {
    Ok(MacroFacetSet::from_json(&read_file(path)?)?)
}

fn load_tree(mset: &MacroFacetSet, constraints_path: &Path) -> Result<QuotaTree, Failure> {
    let constraints = ConstraintsFile::from_json(&read_file(constraints_path)?)?.into_constraints();
    Ok(QuotaTree::build(&mset.ids(), &constraints)?)
}

fn load_utility(
    path: &Path,
    mset: &MacroFacetSet,
    tolerant: bool,
) -> Result<(Box<dyn Utility>, bool), Failure> {
    let spec = UtilitySpec::from_json(&read_file(path)?)?;
    let scripted = spec.is_scripted();
    let utility = spec.build(&mset.ids(), Some(mset), tolerant)?;
    Ok((utility, scripted))
}

pub fn compile(input: PathBuf, out: Option<PathBuf>, quiet: bool) -> Result<(), Failure> {
    let chronicle = Chronicle::from_json(&read_file(&input)?)?;
    if !quiet {
        for warning in chronicle.warnings() {
            let facetsel::ValidationWarning::ZeroCostFacet { id } = warning;
            Diagnostic::warning("ZERO_COST_FACET", format!("facet `{id}` has zero cost")).emit();
        }
    }
    let mset = chronicle.compile()?;
    let max_closure = mset
        .macro_facets()
        .iter()
        .map(|m| m.closure.len())
        .max()
        .unwrap_or(0);
    let total_cost: f64 = mset.macro_facets().iter().map(|m| m.cost).sum();
    if !quiet {
        eprintln!(
            "macro-facets: {}  max closure: {}  total cost: {}",
            mset.len(),
            max_closure,
            total_cost
        );
    }
    emit_payload(out, &serde_json::to_value(&mset).expect("mset serializes"))
}

pub fn verify(
    input: PathBuf,
    constraints: PathBuf,
    utility: Option<PathBuf>,
    seed: u64,
    out: Option<PathBuf>,
    quiet: bool,
) -> Result<(), Failure> {
    let mset = load_mset(&input)?;
    // laminarity violations surface here as LAMINARITY_VIOLATION failures
    let tree = load_tree(&mset, &constraints)?;
    let mut report = serde_json::Map::new();
    report.insert("laminarity".into(), json!({ "status": "pass" }));

    let axioms = if mset.len() <= EXHAUSTIVE_LIMIT {
        match tree.verify_matroid_axioms(EXHAUSTIVE_LIMIT)? {
            AxiomVerdict::Pass => json!({ "status": "pass", "elements": mset.len() }),
            violation => {
                let witness = serde_json::to_value(&violation).expect("verdict serializes");
                return Err(Failure::new(
                    Diagnostic::error("AXIOM_VIOLATION", "matroid axiom check failed")
                        .with_witness(witness),
                    EXIT_VALIDATION,
                ));
            }
        }
    } else {
        json!({
            "status": "skipped",
            "reason": format!(
                "universe size {} exceeds the exhaustive limit {EXHAUSTIVE_LIMIT}",
                mset.len()
            )
        })
    };
    report.insert("matroid_axioms".into(), axioms);

    if let Some(utility_path) = utility {
        let spec = UtilitySpec::from_json(&read_file(&utility_path)?)?;
        if spec.is_scripted() {
            return Err(Failure::new(
                Diagnostic::error(
                    "SCRIPTED_NOT_VERIFIABLE",
                    "scripted traces cannot answer the verifier's arbitrary-set queries",
                ),
                EXIT_LIMIT,
            ));
        }
        let u = spec.build(&mset.ids(), Some(&mset), false)?;
        let (verdict, mode) = if u.ground().len() <= VERIFY_EXHAUSTIVE_LIMIT {
            (
                facetsel::verify_monotone_submodular(u.as_ref(), VERIFY_EXHAUSTIVE_LIMIT)?,
                "exhaustive",
            )
        } else {
            (
                facetsel::verify_monotone_submodular_sampled(u.as_ref(), VERIFY_SAMPLES, seed)?,
                "sampled",
            )
        };
        match verdict {
            UtilityVerdict::Pass => {
                report.insert("utility".into(), json!({ "status": "pass", "mode": mode }));
            }
            violation => {
                let witness = serde_json::to_value(&violation).expect("verdict serializes");
                return Err(Failure::new(
                    Diagnostic::error(
                        "UTILITY_VIOLATION",
                        "monotonicity/submodularity check failed",
                    )
                    .with_witness(witness),
                    EXIT_VALIDATION,
                ));
            }
        }
    } else {
        report.insert(
            "utility".into(),
            json!({ "status": "skipped", "reason": "no utility file" }),
        );
    }

    report.insert("overall".into(), json!("pass"));
    if !quiet {
        eprintln!("verify: all checks passed");
    }
    emit_payload(out, &serde_json::Value::Object(report))
}

fn result_payload(result: &SelectionResult, include_trace: bool) -> serde_json::Value {
    let mut value = serde_json::to_value(result).expect("result serializes");
    if !include_trace {
        value.as_object_mut().expect("object").remove("trace");
    }
    value
}

#[allow(clippy::too_many_arguments)]
pub fn select(
    input: PathBuf,
    constraints: PathBuf,
    utility: PathBuf,
    algo: Algo,
    include_trace: bool,
    compare: bool,
    out: Option<PathBuf>,
    quiet: bool,
) -> Result<(), Failure> {
    let mset = load_mset(&input)?;
    let tree = load_tree(&mset, &constraints)?;
    // scripted fixtures cannot anticipate the lazy query order, so lazy runs
    // them in replay-tolerant mode; plain greedy stays strict
    let tolerant = algo == Algo::Lazy;
    let (u, scripted) = load_utility(&utility, &mset, tolerant)?;
    if scripted && (compare || algo == Algo::Optimal) {
        return Err(Failure::new(
            Diagnostic::error(
                "SCRIPTED_NOT_VERIFIABLE",
                "the exhaustive optimum queries sets outside a scripted trace",
            ),
            EXIT_LIMIT,
        ));
    }

    let result = match algo {
        Algo::Greedy => greedy_select(u.as_ref(), &tree)?,
        Algo::Lazy => lazy_greedy_select(u.as_ref(), &tree)?,
        Algo::Optimal => brute_force_optimal(u.as_ref(), &tree, BRUTE_FORCE_LIMIT)?,
    }
    .with_disclosure(&mset)?;

    if !quiet {
        eprintln!(
            "{}: chose {} macro-facets, value {}, cost {}",
            result.algorithm,
            result.chosen.len(),
            result.value,
            result.cost.unwrap_or(0.0)
        );
    }

    let payload = if compare {
        let optimal =
            brute_force_optimal(u.as_ref(), &tree, BRUTE_FORCE_LIMIT)?.with_disclosure(&mset)?;
        let ratio = approximation_ratio(&result, &optimal)?;
        if !quiet {
            eprintln!("approximation ratio: {ratio}");
        }
        json!({
            "greedy": result_payload(&result, include_trace),
            "optimal": result_payload(&optimal, include_trace),
            "ratio": ratio,
        })
    } else {
        result_payload(&result, include_trace)
    };
    emit_payload(out, &payload)
}

#[allow(clippy::too_many_arguments)]
pub fn simulate(
    trials: usize,
    num_macro: usize,
    universe: usize,
    groups: usize,
    seed: u64,
    out_dir: Option<PathBuf>,
    quiet: bool,
) -> Result<(), Failure> {
    let config = ExperimentConfig {
        trials,
        num_macro,
        universe_size: universe,
        num_groups: groups,
        seed,
        ..ExperimentConfig::default()
    };
    let (report, records) = run_experiment(&config)?;

    let dir = resolve_out(out_dir.unwrap_or_else(|| PathBuf::from(".")));
    fs::create_dir_all(&dir).map_err(|e| Failure::io(&format!("creating {}", dir.display()), e))?;
    let report_value = serde_json::to_value(&report).expect("report serializes");
    let mut report_json = serde_json::to_string_pretty(&report_value).expect("report serializes");
    report_json.push('\n');
    write_atomic(&dir.join("report.json"), &report_json)?;
    write_atomic(&dir.join("trials.csv"), &trials_csv(&records))?;
    write_atomic(
        &dir.join("histogram.csv"),
        &histogram_csv(&report.histogram),
    )?;

    if !quiet {
        eprintln!(
            "trials: {}  mean: {}  min: {}  p5: {}",
            report.trials, report.mean_ratio, report.min_ratio, report.percentile_5
        );
        eprintln!("wall clock: {:.2}s", report.wall_clock_seconds);
        eprintln!(
            "wrote report.json, trials.csv, histogram.csv to {}",
            dir.display()
        );
    }
    Ok(())
}
