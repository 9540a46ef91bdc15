//! Laminar quota constraints over macro-facets and the counter-tree
//! independence oracle.
//!
//! A family of member sets is laminar when any two are nested or disjoint.
//! With a non-negative quota per set, "at most q_A chosen inside A" for every
//! A defines the independent sets of a matroid. The tree stores the family as
//! a rooted forest under a synthetic unbounded super-root; feasibility of
//! adding one element is a walk up its ancestor chain.
//!
//! Quotas count chosen macro-facets only. Facets pulled in by expansion are
//! never counted.

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node id of the synthetic super-root.
pub const SUPER_ROOT: &str = "root";

/// Default ceiling for exhaustive axiom verification (2^10 subsets).
pub const EXHAUSTIVE_LIMIT: usize = 10;

/// One input constraint: at most `quota` chosen elements inside `members`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotaConstraint {
    #[serde(default)]
    pub name: Option<String>,
    pub members: BTreeSet<String>,
    pub quota: u64,
}

impl QuotaConstraint {
    pub fn new<I, S>(members: I, quota: u64) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        QuotaConstraint {
            name: None,
            members: members.into_iter().map(Into::into).collect(),
            quota,
        }
    }

    pub fn named<I, S>(name: &str, members: I, quota: u64) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        QuotaConstraint {
            name: Some(name.to_string()),
            ..QuotaConstraint::new(members, quota)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotaNode {
    pub id: String,
    pub members: BTreeSet<String>,
    /// None means unbounded (super-root only).
    pub quota: Option<u64>,
    pub parent: Option<usize>,
    #[serde(skip)]
    member_indices: Vec<usize>,
}

impl QuotaNode {
    /// Member positions in the universe order, ascending.
    pub fn member_indices(&self) -> &[usize] {
        &self.member_indices
    }
}

/// True iff sorted `a` is a subset of sorted `b`.
fn sorted_subset(a: &[usize], b: &[usize]) -> bool {
    let mut bi = 0;
    'outer: for &x in a {
        while bi < b.len() {
            match b[bi].cmp(&x) {
                std::cmp::Ordering::Less => bi += 1,
                std::cmp::Ordering::Equal => {
                    bi += 1;
                    continue 'outer;
                }
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

/// First common element of two sorted slices, if any.
fn sorted_intersection_witness(a: &[usize], b: &[usize]) -> Option<usize> {
    let (mut ai, mut bi) = (0, 0);
    while ai < a.len() && bi < b.len() {
        match a[ai].cmp(&b[bi]) {
            std::cmp::Ordering::Less => ai += 1,
            std::cmp::Ordering::Greater => bi += 1,
            std::cmp::Ordering::Equal => return Some(a[ai]),
        }
    }
    None
}

/// A validated laminar family with quotas, rooted under [`SUPER_ROOT`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotaTree {
    universe: Vec<String>,
    nodes: Vec<QuotaNode>,
    /// For each universe element, node indices from leaf-most to super-root.
    ancestor_chains: Vec<Vec<usize>>,
}

impl QuotaTree {
    /// Validate laminarity and build the forest.
    ///
    /// Duplicate member sets are merged keeping the minimum quota. The
    /// universe order is preserved and becomes the selection ground order.
    pub fn build(universe: &[String], constraints: &[QuotaConstraint]) -> Result<Self> {
        let index_of: BTreeMap<&str, usize> = universe
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        if index_of.len() != universe.len() {
            return Err(Error::InvalidArgument(
                "universe contains duplicate macro-facet ids".into(),
            ));
        }

        // Resolve member ids to sorted index lists, synthesizing names.
        struct Resolved {
            name: String,
            indices: Vec<usize>,
            members: BTreeSet<String>,
            quota: u64,
        }
        let mut resolved: Vec<Resolved> = Vec::new();
        let mut seen_names = BTreeSet::new();
        for (i, c) in constraints.iter().enumerate() {
            let name = c.name.clone().unwrap_or_else(|| format!("c{i}"));
            if name == SUPER_ROOT {
                return Err(Error::InvalidArgument(format!(
                    "constraint name `{SUPER_ROOT}` is reserved"
                )));
            }
            let mut indices = Vec::with_capacity(c.members.len());
            for member in &c.members {
                let &mi =
                    index_of
                        .get(member.as_str())
                        .ok_or_else(|| Error::MemberNotInUniverse {
                            node: name.clone(),
                            member: member.clone(),
                        })?;
                indices.push(mi);
            }
            indices.sort_unstable();
            // merge identical member sets, keeping the minimum quota
            if let Some(prev) = resolved.iter_mut().find(|r| r.indices == indices) {
                prev.quota = prev.quota.min(c.quota);
                continue;
            }
            if !seen_names.insert(name.clone()) {
                return Err(Error::DuplicateConstraintName(name));
            }
            resolved.push(Resolved {
                name,
                indices,
                members: c.members.clone(),
                quota: c.quota,
            });
        }

        // Laminarity: any two sets must be nested or disjoint.
        for i in 0..resolved.len() {
            for j in (i + 1)..resolved.len() {
                let (a, b) = (&resolved[i], &resolved[j]);
                if !sorted_subset(&a.indices, &b.indices) && !sorted_subset(&b.indices, &a.indices)
                {
                    if let Some(w) = sorted_intersection_witness(&a.indices, &b.indices) {
                        return Err(Error::LaminarityViolation {
                            a: a.name.clone(),
                            b: b.name.clone(),
                            shared: universe[w].clone(),
                        });
                    }
                }
            }
        }

        // Forest: parent of X is the smallest strict superset of X.
        let mut order: Vec<usize> = (0..resolved.len()).collect();
        order.sort_by_key(|&i| std::cmp::Reverse(resolved[i].indices.len()));

        let mut nodes = vec![QuotaNode {
            id: SUPER_ROOT.to_string(),
            members: universe.iter().cloned().collect(),
            quota: None,
            parent: None,
            member_indices: (0..universe.len()).collect(),
        }];
        for &ri in &order {
            let r = &resolved[ri];
            let mut parent = 0usize;
            let mut parent_len = usize::MAX;
            for (ni, node) in nodes.iter().enumerate().skip(1) {
                if node.member_indices.len() > r.indices.len()
                    && node.member_indices.len() < parent_len
                    && sorted_subset(&r.indices, &node.member_indices)
                {
                    parent = ni;
                    parent_len = node.member_indices.len();
                }
            }
            nodes.push(QuotaNode {
                id: r.name.clone(),
                members: r.members.clone(),
                quota: Some(r.quota),
                parent: Some(parent),
                member_indices: r.indices.clone(),
            });
        }

        // Ancestor chain per element, leaf-most first, ending at the super-root.
        let mut ancestor_chains = Vec::with_capacity(universe.len());
        for ei in 0..universe.len() {
            let mut containing: Vec<usize> = nodes
                .iter()
                .enumerate()
                .skip(1)
                .filter(|(_, n)| n.member_indices.binary_search(&ei).is_ok())
                .map(|(i, _)| i)
                .collect();
            containing.sort_by_key(|&i| nodes[i].member_indices.len());
            containing.push(0);
            ancestor_chains.push(containing);
        }

        Ok(QuotaTree {
            universe: universe.to_vec(),
            nodes,
            ancestor_chains,
        })
    }

    /// Partition-matroid construction: disjoint groups with quotas, optionally
    /// capped by an overall budget node spanning the whole universe.
    pub fn partition(
        universe: &[String],
        groups: &[QuotaConstraint],
        overall_budget: Option<u64>,
    ) -> Result<Self> {
        for i in 0..groups.len() {
            for j in (i + 1)..groups.len() {
                if let Some(shared) = groups[i].members.intersection(&groups[j].members).next() {
                    return Err(Error::GroupsOverlap {
                        a: groups[i].name.clone().unwrap_or_else(|| format!("c{i}")),
                        b: groups[j].name.clone().unwrap_or_else(|| format!("c{j}")),
                        shared: shared.clone(),
                    });
                }
            }
        }
        let mut constraints = groups.to_vec();
        if let Some(budget) = overall_budget {
            constraints.push(QuotaConstraint {
                name: Some("budget".to_string()),
                members: universe.iter().cloned().collect(),
                quota: budget,
            });
        }
        QuotaTree::build(universe, &constraints)
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn nodes(&self) -> &[QuotaNode] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &QuotaNode {
        &self.nodes[idx]
    }

    /// Number of nodes on the longest ancestor chain (super-root included).
    pub fn height(&self) -> usize {
        self.ancestor_chains
            .iter()
            .map(|c| c.len())
            .max()
            .unwrap_or(1)
    }

    pub fn element_index(&self, id: &str) -> Result<usize> {
        self.universe
            .iter()
            .position(|u| u == id)
            .ok_or_else(|| Error::UnknownMacroFacet(id.to_string()))
    }

    /// Node indices containing the element, leaf-most first, super-root last.
    pub fn ancestor_chain(&self, element: usize) -> &[usize] {
        &self.ancestor_chains[element]
    }

    /// Stateless independence check: every node's quota is respected by `s`.
    pub fn is_independent<'a, I>(&self, s: I) -> Result<bool>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut chosen = vec![false; self.universe.len()];
        for id in s {
            chosen[self.element_index(id)?] = true;
        }
        Ok(self.is_independent_flags(&chosen))
    }

    /// Independence over a membership vector aligned with the universe order.
    pub fn is_independent_flags(&self, chosen: &[bool]) -> bool {
        self.nodes.iter().all(|n| match n.quota {
            None => true,
            Some(q) => {
                let count = n.member_indices.iter().filter(|&&i| chosen[i]).count() as u64;
                count <= q
            }
        })
    }

    /// Exhaustively verify the three matroid axioms on this tree.
    pub fn verify_matroid_axioms(&self, limit: usize) -> Result<AxiomVerdict> {
        let n = self.universe.len();
        if n > limit {
            return Err(Error::UniverseTooLarge { size: n, limit });
        }
        // node member sets as machine masks; n <= limit <= 24 here
        let node_masks: Vec<(u128, Option<u64>)> = self
            .nodes
            .iter()
            .map(|node| {
                let mask = node.member_indices.iter().fold(0u128, |m, &i| m | (1 << i));
                (mask, node.quota)
            })
            .collect();
        let verdict = verify_axioms_of(n, |s| {
            node_masks.iter().all(|&(mask, quota)| match quota {
                None => true,
                Some(q) => u64::from((s & mask).count_ones()) <= q,
            })
        });
        Ok(verdict.map_sets(|mask| self.ids_of_mask(mask)))
    }

    fn ids_of_mask(&self, mask: u128) -> Vec<String> {
        (0..self.universe.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| self.universe[i].clone())
            .collect()
    }
}

/// Feasibility answer for a single-element addition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Feasibility {
    Accept,
    /// Leaf-most node whose quota the addition would break.
    Violated {
        node: String,
    },
}

impl Feasibility {
    pub fn is_accept(&self) -> bool {
        matches!(self, Feasibility::Accept)
    }
}

/// Incremental oracle: one counter per tree node, updated along ancestor
/// chains. Single-writer; clone for concurrent use.
#[derive(Debug, Clone)]
pub struct OracleState<'t> {
    tree: &'t QuotaTree,
    counters: Vec<u64>,
    chosen: BTreeSet<String>,
    counter_reads: Cell<u64>,
}

impl<'t> OracleState<'t> {
    pub fn new(tree: &'t QuotaTree) -> Self {
        OracleState {
            tree,
            counters: vec![0; tree.nodes.len()],
            chosen: BTreeSet::new(),
            counter_reads: Cell::new(0),
        }
    }

    pub fn tree(&self) -> &QuotaTree {
        self.tree
    }

    pub fn chosen(&self) -> &BTreeSet<String> {
        &self.chosen
    }

    pub fn counters(&self) -> &[u64] {
        &self.counters
    }

    /// Cumulative number of counter comparisons performed by `can_add`;
    /// each query costs at most the tree height.
    pub fn counter_reads(&self) -> u64 {
        self.counter_reads.get()
    }

    /// Would adding `id` keep the state independent? Does not mutate.
    pub fn can_add(&self, id: &str) -> Result<Feasibility> {
        if self.chosen.contains(id) {
            return Err(Error::AlreadyChosen(id.to_string()));
        }
        let element = self.tree.element_index(id)?;
        Ok(self.can_add_element(element))
    }

    /// Index-level variant of [`can_add`](Self::can_add) used on solver hot paths.
    pub(crate) fn can_add_element(&self, element: usize) -> Feasibility {
        for &ni in self.tree.ancestor_chain(element) {
            let node = &self.tree.nodes[ni];
            if let Some(q) = node.quota {
                self.counter_reads.set(self.counter_reads.get() + 1);
                if self.counters[ni] >= q {
                    return Feasibility::Violated {
                        node: node.id.clone(),
                    };
                }
            }
        }
        Feasibility::Accept
    }

    /// Add `id`, incrementing counters along its ancestor chain.
    pub fn add(&mut self, id: &str) -> Result<()> {
        match self.can_add(id)? {
            Feasibility::Accept => {}
            Feasibility::Violated { node } => {
                return Err(Error::InfeasibleAdd {
                    element: id.to_string(),
                    node,
                });
            }
        }
        let element = self.tree.element_index(id)?;
        self.add_element_unchecked(element);
        self.chosen.insert(id.to_string());
        Ok(())
    }

    pub(crate) fn add_element_unchecked(&mut self, element: usize) {
        for &ni in self.tree.ancestor_chain(element) {
            self.counters[ni] += 1;
        }
    }

    /// Remove `id`, decrementing counters along its ancestor chain.
    pub fn remove(&mut self, id: &str) -> Result<()> {
        if !self.chosen.remove(id) {
            return Err(Error::NotChosen(id.to_string()));
        }
        let element = self.tree.element_index(id)?;
        self.remove_element_unchecked(element);
        Ok(())
    }

    pub(crate) fn remove_element_unchecked(&mut self, element: usize) {
        for &ni in self.tree.ancestor_chain(element) {
            self.counters[ni] -= 1;
        }
    }

    /// Recompute every counter from scratch; the incremental values must match.
    pub fn recount(&self) -> Vec<u64> {
        let mut chosen = vec![false; self.tree.universe.len()];
        for id in &self.chosen {
            chosen[self.tree.element_index(id).expect("chosen id in universe")] = true;
        }
        self.tree
            .nodes
            .iter()
            .map(|n| n.member_indices.iter().filter(|&&i| chosen[i]).count() as u64)
            .collect()
    }
}

/// Outcome of exhaustive axiom verification.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum AxiomVerdict {
    Pass,
    EmptySetDependent,
    /// `set` is independent but dropping to `subset` is not.
    DownwardClosureViolated {
        set: Vec<String>,
        subset: Vec<String>,
    },
    /// `a` and `b` are independent, |a| < |b|, yet no element of b \ a extends a.
    AugmentationViolated {
        a: Vec<String>,
        b: Vec<String>,
    },
}

/// Mask-level verdict used by [`verify_axioms_of`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskVerdict {
    Pass,
    EmptySetDependent,
    DownwardClosureViolated { set: u128, subset: u128 },
    AugmentationViolated { a: u128, b: u128 },
}

impl MaskVerdict {
    pub fn map_sets(self, f: impl Fn(u128) -> Vec<String>) -> AxiomVerdict {
        match self {
            MaskVerdict::Pass => AxiomVerdict::Pass,
            MaskVerdict::EmptySetDependent => AxiomVerdict::EmptySetDependent,
            MaskVerdict::DownwardClosureViolated { set, subset } => {
                AxiomVerdict::DownwardClosureViolated {
                    set: f(set),
                    subset: f(subset),
                }
            }
            MaskVerdict::AugmentationViolated { a, b } => {
                AxiomVerdict::AugmentationViolated { a: f(a), b: f(b) }
            }
        }
    }
}

/// Exhaustively check the matroid axioms for an arbitrary independence
/// predicate over an `n`-element ground set. Used both for [`QuotaTree`]s and
/// for mutation-testing corrupted oracles.
pub fn verify_axioms_of(n: usize, is_independent: impl Fn(u128) -> bool) -> MaskVerdict {
    assert!(n <= 24, "exhaustive axiom check limited to 24 elements");
    let total: usize = 1 << n;
    let indep: Vec<bool> = (0..total).map(|s| is_independent(s as u128)).collect();

    if !indep[0] {
        return MaskVerdict::EmptySetDependent;
    }
    for s in 0..total {
        if !indep[s] {
            continue;
        }
        let mut rest = s;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest ^= bit;
            if !indep[s ^ bit] {
                return MaskVerdict::DownwardClosureViolated {
                    set: s as u128,
                    subset: (s ^ bit) as u128,
                };
            }
        }
    }
    // Augmentation: for independent a, b with |a| < |b|, some x in b \ a extends a.
    let sizes: Vec<u32> = (0..total).map(|s| (s as u32).count_ones()).collect();
    for b in 0..total {
        if !indep[b] {
            continue;
        }
        for a in 0..total {
            if !indep[a] || sizes[a] >= sizes[b] {
                continue;
            }
            let mut extra = b & !a;
            let mut extendable = false;
            while extra != 0 {
                let bit = extra & extra.wrapping_neg();
                extra ^= bit;
                if indep[a | bit] {
                    extendable = true;
                    break;
                }
            }
            if !extendable {
                return MaskVerdict::AugmentationViolated {
                    a: a as u128,
                    b: b as u128,
                };
            }
        }
    }
    MaskVerdict::Pass
}
