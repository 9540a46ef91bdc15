//! Raw facets, their implication graph, and compilation into macro-facets.
//!
//! A chronicle is an ordered collection of facets plus directed implication
//! edges: an edge (a, b) means selecting facet `a` entails disclosing `b`.
//! Compilation condenses the strongly connected components of that graph into
//! macro-facets, each carrying its reachability closure and summed cost, and
//! records the condensation DAG between them.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::bits::Mask;
use crate::error::{Error, Result};

fn default_cost() -> f64 {
    1.0
}

/// One atomic unit of user data with a non-negative disclosure cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub id: String,
    #[serde(default)]
    pub label: String,
    #[serde(default = "default_cost")]
    pub cost: f64,
}

impl Facet {
    pub fn new(id: impl Into<String>, label: impl Into<String>, cost: f64) -> Self {
        Facet {
            id: id.into(),
            label: label.into(),
            cost,
        }
    }
}

/// Non-fatal findings reported during validation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ValidationWarning {
    /// Zero-cost facets are admitted but worth flagging.
    ZeroCostFacet { id: String },
}

/// The facet ground set plus its implication graph.
///
/// Facet order is insertion order and is preserved; it seeds every
/// deterministic tie-break downstream. Self-loops and duplicate edges are
/// dropped on construction since they never change closures.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chronicle {
    facets: Vec<Facet>,
    edges: BTreeSet<(String, String)>,
    #[serde(skip)]
    index_of: HashMap<String, usize>,
    #[serde(skip)]
    adjacency: Vec<Vec<usize>>,
}

/// Wire format for chronicle JSON files.
#[derive(Debug, Deserialize)]
struct ChronicleFile {
    facets: Vec<Facet>,
    #[serde(default)]
    edges: Vec<(String, String)>,
}

impl Chronicle {
    pub fn new(facets: Vec<Facet>, edges: Vec<(String, String)>) -> Result<Self> {
        let mut index_of = HashMap::with_capacity(facets.len());
        for (i, facet) in facets.iter().enumerate() {
            if facet.id.is_empty() {
                return Err(Error::EmptyFacetId);
            }
            if !facet.cost.is_finite() || facet.cost < 0.0 {
                return Err(Error::InvalidCost {
                    id: facet.id.clone(),
                    cost: facet.cost,
                });
            }
            if index_of.insert(facet.id.clone(), i).is_some() {
                return Err(Error::DuplicateFacetId(facet.id.clone()));
            }
        }
        let mut dedup = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); facets.len()];
        for (src, dst) in edges {
            let &si = index_of
                .get(&src)
                .ok_or_else(|| Error::EdgeEndpointMissing {
                    src: src.clone(),
                    dst: dst.clone(),
                    missing: src.clone(),
                })?;
            let &di = index_of
                .get(&dst)
                .ok_or_else(|| Error::EdgeEndpointMissing {
                    src: src.clone(),
                    dst: dst.clone(),
                    missing: dst.clone(),
                })?;
            if si != di && dedup.insert((src, dst)) {
                adjacency[si].push(di);
            }
        }
        Ok(Chronicle {
            facets,
            edges: dedup,
            index_of,
            adjacency,
        })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: ChronicleFile = serde_json::from_str(json)
            .map_err(|e| Error::InvalidArgument(format!("chronicle JSON: {e}")))?;
        Chronicle::new(file.facets, file.edges)
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn edges(&self) -> &BTreeSet<(String, String)> {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index_of.contains_key(id)
    }

    /// Non-fatal findings (currently: zero-cost facets, which bend the
    /// strictly-positive cost convention).
    pub fn warnings(&self) -> Vec<ValidationWarning> {
        self.facets
            .iter()
            .filter(|f| f.cost == 0.0)
            .map(|f| ValidationWarning::ZeroCostFacet { id: f.id.clone() })
            .collect()
    }

    fn index(&self, id: &str) -> Result<usize> {
        self.index_of
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownFacet(id.to_string()))
    }

    /// All facets reachable from `seed` along implication edges, including
    /// the seed itself (length-0 paths).
    pub fn closure<'a, I>(&self, seed: I) -> Result<BTreeSet<String>>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut stack = Vec::new();
        let mut seen = vec![false; self.facets.len()];
        for id in seed {
            let i = self.index(id)?;
            if !seen[i] {
                seen[i] = true;
                stack.push(i);
            }
        }
        while let Some(i) = stack.pop() {
            for &j in &self.adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        Ok(seen
            .iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(i, _)| self.facets[i].id.clone())
            .collect())
    }

    /// True iff `s` already contains everything it implies.
    pub fn is_closed<'a, I>(&self, s: I) -> Result<bool>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let ids: Vec<&str> = s.into_iter().collect();
        let closure = self.closure(ids.iter().copied())?;
        Ok(closure.len() == ids.iter().collect::<BTreeSet<_>>().len())
    }

    /// Condense the implication graph into macro-facets.
    ///
    /// One macro-facet per strongly connected component; ids are
    /// `scc:<lexicographically-minimal member id>` and the output is ordered
    /// by that id, so identical input always yields identical output.
    pub fn compile(&self) -> Result<MacroFacetSet> {
        let n = self.facets.len();
        let sccs = tarjan_scc(&self.adjacency);
        let mut scc_of = vec![usize::MAX; n];
        for (c, comp) in sccs.iter().enumerate() {
            for &v in comp {
                scc_of[v] = c;
            }
        }

        // Tarjan emits components children-first, so every component a given
        // one can reach is already available when we take the union.
        let num_sccs = sccs.len();
        let mut reach: Vec<Mask> = Vec::with_capacity(num_sccs);
        let mut dag_edges: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); num_sccs];
        for (c, comp) in sccs.iter().enumerate() {
            let mut mask = Mask::new(num_sccs);
            mask.set(c);
            for &v in comp {
                for &w in &self.adjacency[v] {
                    let cw = scc_of[w];
                    if cw != c {
                        dag_edges[c].insert(cw);
                        mask.union_with(&reach[cw]);
                    }
                }
            }
            reach.push(mask);
        }

        let mut macro_facets: Vec<MacroFacet> = Vec::with_capacity(num_sccs);
        for (c, comp) in sccs.iter().enumerate() {
            let members: BTreeSet<String> =
                comp.iter().map(|&v| self.facets[v].id.clone()).collect();
            let mut closure = BTreeSet::new();
            let mut cost = 0.0;
            for rc in reach[c].iter_ones() {
                for &v in &sccs[rc] {
                    closure.insert(self.facets[v].id.clone());
                    cost += self.facets[v].cost;
                }
            }
            let id = format!("scc:{}", members.first().expect("non-empty SCC"));
            macro_facets.push(MacroFacet {
                id,
                members,
                closure,
                cost,
            });
        }

        let id_of_scc: Vec<String> = macro_facets.iter().map(|m| m.id.clone()).collect();
        let mut condensation_edges = BTreeSet::new();
        for (c, outs) in dag_edges.iter().enumerate() {
            for &t in outs {
                condensation_edges.insert((id_of_scc[c].clone(), id_of_scc[t].clone()));
            }
        }

        macro_facets.sort_by(|a, b| a.id.cmp(&b.id));
        MacroFacetSet::new(macro_facets, condensation_edges)
    }
}

/// One SCC of the implication graph, the atomic unit of selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroFacet {
    pub id: String,
    pub members: BTreeSet<String>,
    pub closure: BTreeSet<String>,
    pub cost: f64,
}

/// The compiled view of a chronicle: macro-facets plus the condensation DAG.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroFacetSet {
    macro_facets: Vec<MacroFacet>,
    condensation_edges: BTreeSet<(String, String)>,
    #[serde(skip)]
    index_of: HashMap<String, usize>,
    #[serde(skip)]
    facet_to_macro: BTreeMap<String, String>,
}

#[derive(Debug, Deserialize)]
struct MacroFacetSetFile {
    macro_facets: Vec<MacroFacet>,
    #[serde(default)]
    condensation_edges: Vec<(String, String)>,
}

impl MacroFacetSet {
    pub fn new(
        macro_facets: Vec<MacroFacet>,
        condensation_edges: BTreeSet<(String, String)>,
    ) -> Result<Self> {
        let mut index_of = HashMap::with_capacity(macro_facets.len());
        let mut facet_to_macro = BTreeMap::new();
        for (i, m) in macro_facets.iter().enumerate() {
            if !m.cost.is_finite() || m.cost < 0.0 {
                return Err(Error::InvalidCost {
                    id: m.id.clone(),
                    cost: m.cost,
                });
            }
            if index_of.insert(m.id.clone(), i).is_some() {
                return Err(Error::DuplicateMacroFacetId(m.id.clone()));
            }
            for member in &m.members {
                if !m.closure.contains(member) {
                    return Err(Error::ClosureMissingMember {
                        id: m.id.clone(),
                        missing: member.clone(),
                    });
                }
                if let Some(other) = facet_to_macro.insert(member.clone(), m.id.clone()) {
                    return Err(Error::MemberInTwoMacroFacets {
                        member: member.clone(),
                        a: other,
                        b: m.id.clone(),
                    });
                }
            }
        }
        Ok(MacroFacetSet {
            macro_facets,
            condensation_edges,
            index_of,
            facet_to_macro,
        })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let file: MacroFacetSetFile = serde_json::from_str(json)
            .map_err(|e| Error::InvalidArgument(format!("macro-facet JSON: {e}")))?;
        MacroFacetSet::new(
            file.macro_facets,
            file.condensation_edges.into_iter().collect(),
        )
    }

    pub fn macro_facets(&self) -> &[MacroFacet] {
        &self.macro_facets
    }

    pub fn condensation_edges(&self) -> &BTreeSet<(String, String)> {
        &self.condensation_edges
    }

    pub fn facet_to_macro(&self) -> &BTreeMap<String, String> {
        &self.facet_to_macro
    }

    pub fn len(&self) -> usize {
        self.macro_facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.macro_facets.is_empty()
    }

    /// Macro-facet ids in set order (the selection universe).
    pub fn ids(&self) -> Vec<String> {
        self.macro_facets.iter().map(|m| m.id.clone()).collect()
    }

    pub fn get(&self, id: &str) -> Result<&MacroFacet> {
        self.index_of
            .get(id)
            .map(|&i| &self.macro_facets[i])
            .ok_or_else(|| Error::UnknownMacroFacet(id.to_string()))
    }

    /// Union of closures over the selected macro-facets: the raw facets that
    /// would actually be disclosed.
    pub fn expand<'a, I>(&self, selection: I) -> Result<BTreeSet<String>>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut out = BTreeSet::new();
        for id in selection {
            out.extend(self.get(id)?.closure.iter().cloned());
        }
        Ok(out)
    }

    /// Modular disclosure cost: the sum of d(m) over the selection. A facet
    /// shared by several chosen closures contributes to each of their costs.
    pub fn selection_cost<'a, I>(&self, selection: I) -> Result<f64>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut total = 0.0;
        for id in selection {
            total += self.get(id)?.cost;
        }
        Ok(total)
    }
}

/// Iterative Tarjan SCC; components are emitted children-first.
fn tarjan_scc(adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adjacency.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut next_index = 0usize;
    // (node, next child position) frames instead of recursion
    let mut frames: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        frames.push((root, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut child)) = frames.last_mut() {
            if *child < adjacency[v].len() {
                let w = adjacency[v][*child];
                *child += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comps.push(comp);
                }
            }
        }
    }
    comps
}
