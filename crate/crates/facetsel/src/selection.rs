//! Greedy selection under a laminar quota tree, a lazy variant with identical
//! output, an exhaustive optimal baseline, and approximation-ratio reporting.
//!
//! The greedy loop considers the highest-gain candidate each round, stops as
//! soon as the best gain is non-positive, removes the considered candidate
//! from the pool unconditionally, and keeps it only if the oracle accepts.
//! Tie-breaks are by smallest candidate id, so runs are fully deterministic.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use serde::Serialize;

use crate::chronicle::MacroFacetSet;
use crate::error::{Error, Result};
use crate::matroid::{Feasibility, OracleState, QuotaTree};
use crate::utility::{Utility, VALUE_TOLERANCE};

/// Default ceiling for the exhaustive optimal search.
pub const BRUTE_FORCE_LIMIT: usize = 20;

/// Why the selection loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// The best remaining marginal gain was <= 0.
    NoPositiveGain,
    /// Every candidate was considered once.
    CandidatesExhausted,
}

/// One considered candidate: what it offered and what happened to it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceIteration {
    pub candidate: String,
    pub gain: f64,
    /// None when the loop stopped on this candidate before the oracle ran.
    pub verdict: Option<Feasibility>,
    pub accepted: bool,
    pub remaining_candidates: usize,
}

/// Ordered audit record of the selection control flow.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionTrace {
    pub iterations: Vec<TraceIteration>,
    pub stop_reason: StopReason,
}

/// Instrumentation counters for solver comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SolverStats {
    /// Number of marginal-gain evaluations issued to the utility.
    pub gain_evaluations: u64,
}

/// Result of one solver run. `value` is re-evaluated on the final set, never
/// the running accumulation. `expansion` and `cost` are filled by
/// [`with_disclosure`](SelectionResult::with_disclosure) once a compiled
/// macro-facet set is available.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub algorithm: &'static str,
    pub chosen: Vec<String>,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expansion: Option<BTreeSet<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
    pub trace: SelectionTrace,
    pub stats: SolverStats,
}

impl SelectionResult {
    /// Attach the disclosed raw facets and the modular selection cost.
    pub fn with_disclosure(mut self, mset: &MacroFacetSet) -> Result<Self> {
        let ids: Vec<&str> = self.chosen.iter().map(|s| s.as_str()).collect();
        self.expansion = Some(mset.expand(ids.iter().copied())?);
        self.cost = Some(mset.selection_cost(ids.iter().copied())?);
        Ok(self)
    }
}

fn check_grounds(utility: &dyn Utility, tree: &QuotaTree) -> Result<()> {
    if utility.ground() != tree.universe() {
        return Err(Error::GroundMismatch {
            reason: format!(
                "utility ground has {} elements, quota tree universe has {} (or their orders differ)",
                utility.ground().len(),
                tree.universe().len()
            ),
        });
    }
    Ok(())
}

fn finite_gain(gain: f64) -> Result<f64> {
    if gain.is_finite() {
        Ok(gain)
    } else {
        Err(Error::InvalidArgument(format!("non-finite gain {gain}")))
    }
}

/// Verify that the accumulated value matches an independent re-evaluation.
fn reevaluate(utility: &dyn Utility, chosen_sorted: &[usize], accumulated: f64) -> Result<f64> {
    let value = utility.evaluate(chosen_sorted)?;
    if (value - accumulated).abs() > VALUE_TOLERANCE * (1.0 + value.abs()) {
        return Err(Error::ValueMismatch {
            accumulated,
            reevaluated: value,
        });
    }
    Ok(value)
}

/// Plain greedy: every round recomputes the gain of every remaining
/// candidate.
pub fn greedy_select(utility: &dyn Utility, tree: &QuotaTree) -> Result<SelectionResult> {
    check_grounds(utility, tree)?;
    let universe = tree.universe();
    let n = universe.len();
    let mut remaining: Vec<bool> = vec![true; n];
    let mut remaining_count = n;
    let mut state = OracleState::new(tree);
    let mut chosen_sorted: Vec<usize> = Vec::new();
    let mut chosen_order: Vec<String> = Vec::new();
    let mut accumulated = 0.0;
    let mut stats = SolverStats::default();
    let mut iterations = Vec::new();
    let mut stop_reason = StopReason::CandidatesExhausted;

    while remaining_count > 0 {
        let mut best: Option<(f64, usize)> = None;
        for x in 0..n {
            if !remaining[x] {
                continue;
            }
            stats.gain_evaluations += 1;
            let gain = finite_gain(utility.marginal_gain(&chosen_sorted, x)?)?;
            let better = match best {
                None => true,
                Some((bg, bx)) => gain > bg || (gain == bg && universe[x] < universe[bx]),
            };
            if better {
                best = Some((gain, x));
            }
        }
        let (gain, x) = best.expect("non-empty candidate pool");
        if gain <= 0.0 {
            iterations.push(TraceIteration {
                candidate: universe[x].clone(),
                gain,
                verdict: None,
                accepted: false,
                remaining_candidates: remaining_count,
            });
            stop_reason = StopReason::NoPositiveGain;
            break;
        }
        remaining[x] = false;
        remaining_count -= 1;
        let verdict = state.can_add_element(x);
        let accepted = verdict.is_accept();
        if accepted {
            state.add(&universe[x])?;
            let pos = chosen_sorted.partition_point(|&s| s < x);
            chosen_sorted.insert(pos, x);
            chosen_order.push(universe[x].clone());
            accumulated += gain;
        }
        iterations.push(TraceIteration {
            candidate: universe[x].clone(),
            gain,
            verdict: Some(verdict),
            accepted,
            remaining_candidates: remaining_count,
        });
    }

    let value = reevaluate(utility, &chosen_sorted, accumulated)?;
    debug_assert!(tree
        .is_independent(chosen_order.iter().map(|s| s.as_str()))
        .expect("chosen ids valid"));
    Ok(SelectionResult {
        algorithm: "greedy",
        chosen: chosen_order,
        value,
        expansion: None,
        cost: None,
        trace: SelectionTrace {
            iterations,
            stop_reason,
        },
        stats,
    })
}

/// Heap entry ordered by (gain descending, id ascending). `round` is the
/// number of accepted elements when the gain was computed.
struct HeapEntry {
    gain: f64,
    id_rank: usize,
    element: usize,
    round: usize,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.gain == other.gain && self.id_rank == other.id_rank
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // max-heap: larger gain first, then smaller id
        self.gain
            .partial_cmp(&other.gain)
            .expect("finite gains")
            .then_with(|| other.id_rank.cmp(&self.id_rank))
    }
}

/// Lazy greedy: keeps stale upper bounds in a priority queue and recomputes a
/// candidate's gain only when it surfaces. For monotone submodular utilities
/// the chosen list is identical to [`greedy_select`] under the same
/// tie-breaking, with at most as many gain evaluations.
pub fn lazy_greedy_select(utility: &dyn Utility, tree: &QuotaTree) -> Result<SelectionResult> {
    check_grounds(utility, tree)?;
    let universe = tree.universe();
    let n = universe.len();

    // rank of each element's id in lexicographic order, for tie-breaking
    let mut by_id: Vec<usize> = (0..n).collect();
    by_id.sort_by(|&a, &b| universe[a].cmp(&universe[b]));
    let mut id_rank = vec![0usize; n];
    for (rank, &e) in by_id.iter().enumerate() {
        id_rank[e] = rank;
    }

    let mut state = OracleState::new(tree);
    let mut chosen_sorted: Vec<usize> = Vec::new();
    let mut chosen_order: Vec<String> = Vec::new();
    let mut accumulated = 0.0;
    let mut stats = SolverStats::default();
    let mut iterations = Vec::new();
    let mut stop_reason = StopReason::CandidatesExhausted;
    let mut decided: Vec<bool> = vec![false; n];
    let mut bound_round: Vec<usize> = vec![0; n];
    let mut remaining_count = n;
    let mut round = 0usize;

    let mut heap = BinaryHeap::with_capacity(n);
    for (x, &rank) in id_rank.iter().enumerate() {
        stats.gain_evaluations += 1;
        let gain = finite_gain(utility.marginal_gain(&[], x)?)?;
        heap.push(HeapEntry {
            gain,
            id_rank: rank,
            element: x,
            round: 0,
        });
    }

    while let Some(entry) = heap.pop() {
        let x = entry.element;
        if decided[x] || entry.round < bound_round[x] {
            // selected, discarded, or superseded by a fresher bound
            continue;
        }
        if entry.round < round {
            // stale: recompute against the current selection and requeue
            stats.gain_evaluations += 1;
            let gain = finite_gain(utility.marginal_gain(&chosen_sorted, x)?)?;
            bound_round[x] = round;
            heap.push(HeapEntry {
                gain,
                id_rank: id_rank[x],
                element: x,
                round,
            });
            continue;
        }
        // fresh top: this is the true argmax for the current selection
        if entry.gain <= 0.0 {
            iterations.push(TraceIteration {
                candidate: universe[x].clone(),
                gain: entry.gain,
                verdict: None,
                accepted: false,
                remaining_candidates: remaining_count,
            });
            stop_reason = StopReason::NoPositiveGain;
            break;
        }
        decided[x] = true;
        remaining_count -= 1;
        let verdict = state.can_add_element(x);
        let accepted = verdict.is_accept();
        if accepted {
            state.add(&universe[x])?;
            let pos = chosen_sorted.partition_point(|&s| s < x);
            chosen_sorted.insert(pos, x);
            chosen_order.push(universe[x].clone());
            accumulated += entry.gain;
            round += 1;
        }
        iterations.push(TraceIteration {
            candidate: universe[x].clone(),
            gain: entry.gain,
            verdict: Some(verdict),
            accepted,
            remaining_candidates: remaining_count,
        });
    }

    let value = reevaluate(utility, &chosen_sorted, accumulated)?;
    Ok(SelectionResult {
        algorithm: "lazy-greedy",
        chosen: chosen_order,
        value,
        expansion: None,
        cost: None,
        trace: SelectionTrace {
            iterations,
            stop_reason,
        },
        stats,
    })
}

/// Exhaustive optimum over all independent sets, pruned by downward closure:
/// only independent prefixes are ever extended. Ties resolve to the
/// lexicographically smallest id list.
pub fn brute_force_optimal(
    utility: &dyn Utility,
    tree: &QuotaTree,
    limit: usize,
) -> Result<SelectionResult> {
    check_grounds(utility, tree)?;
    let universe = tree.universe();
    let n = universe.len();
    if n > limit {
        return Err(Error::UniverseTooLarge { size: n, limit });
    }

    // visit candidates in id order so first-found maxima are lex-smallest
    let mut by_id: Vec<usize> = (0..n).collect();
    by_id.sort_by(|&a, &b| universe[a].cmp(&universe[b]));

    struct Search<'a> {
        utility: &'a dyn Utility,
        universe: &'a [String],
        by_id: Vec<usize>,
        state: OracleState<'a>,
        path: Vec<usize>,
        sorted: Vec<usize>,
        best_value: f64,
        best_path: Vec<usize>,
        evaluations: u64,
    }

    impl Search<'_> {
        fn run(&mut self, start: usize, value: f64) -> Result<()> {
            for pos in start..self.by_id.len() {
                let x = self.by_id[pos];
                if !self.state.can_add_element(x).is_accept() {
                    continue;
                }
                self.evaluations += 1;
                let gain = finite_gain(self.utility.marginal_gain(&self.sorted, x)?)?;
                let next = value + gain;
                self.state.add_element_unchecked(x);
                self.path.push(x);
                let ins = self.sorted.partition_point(|&s| s < x);
                self.sorted.insert(ins, x);
                if next > self.best_value {
                    self.best_value = next;
                    self.best_path = self.path.clone();
                }
                self.run(pos + 1, next)?;
                self.sorted.remove(ins);
                self.path.pop();
                self.state.remove_element_unchecked(x);
            }
            Ok(())
        }
    }

    let mut search = Search {
        utility,
        universe,
        by_id,
        state: OracleState::new(tree),
        path: Vec::new(),
        sorted: Vec::new(),
        best_value: 0.0,
        best_path: Vec::new(),
        evaluations: 0,
    };
    search.run(0, 0.0)?;

    let mut chosen_sorted = search.best_path.clone();
    chosen_sorted.sort_unstable();
    let value = reevaluate(utility, &chosen_sorted, search.best_value)?;
    let chosen: Vec<String> = search
        .best_path
        .iter()
        .map(|&i| search.universe[i].clone())
        .collect();
    Ok(SelectionResult {
        algorithm: "brute-force",
        chosen,
        value,
        expansion: None,
        cost: None,
        trace: SelectionTrace {
            iterations: Vec::new(),
            stop_reason: StopReason::CandidatesExhausted,
        },
        stats: SolverStats {
            gain_evaluations: search.evaluations,
        },
    })
}

/// greedy value / optimal value, defined as 1.0 when the optimum is 0.
/// A greedy value exceeding the optimum signals a solver bug.
pub fn approximation_ratio(greedy: &SelectionResult, optimal: &SelectionResult) -> Result<f64> {
    if greedy.value > optimal.value + VALUE_TOLERANCE * (1.0 + optimal.value.abs()) {
        return Err(Error::OptimalityViolated {
            greedy: greedy.value,
            optimal: optimal.value,
        });
    }
    if optimal.value <= 0.0 {
        return Ok(1.0);
    }
    Ok((greedy.value / optimal.value).min(1.0))
}
