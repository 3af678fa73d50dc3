//! Narrative graphs: trope nodes joined by plain or entailment edges.

mod canonical;
mod document;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::scalar::Scalar;

pub use canonical::{levenshtein, GraphDigest, Token};
pub use document::{EdgeDocument, GraphDocument, NodeDocument};

/// Base class of a trope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TropeClass {
    #[serde(rename = "hero-character")]
    Hero,
    #[serde(rename = "villain-character")]
    Villain,
    Structure,
    PlotDevice,
}

impl TropeClass {
    pub const ALL: [TropeClass; 4] = [
        TropeClass::Hero,
        TropeClass::Villain,
        TropeClass::Structure,
        TropeClass::PlotDevice,
    ];

    pub fn is_character(self) -> bool {
        matches!(self, TropeClass::Hero | TropeClass::Villain)
    }

    /// Trope used when a class wildcard has to be made concrete.
    pub fn representative(self) -> TropeType {
        match self {
            TropeClass::Hero => TropeType::Hero,
            TropeClass::Villain => TropeType::Enemy,
            TropeClass::Structure => TropeType::Conflict,
            TropeClass::PlotDevice => TropeType::Pld,
        }
    }

    pub fn members(self) -> impl Iterator<Item = TropeType> {
        TropeType::ALL.into_iter().filter(move |t| t.class() == self)
    }
}

/// Trope vocabulary. Variants are declared in code order so the derived
/// `Ord` sorts the same way the codes do as strings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TropeType {
    #[serde(rename = "BAD")]
    Bad,
    #[serde(rename = "CONFLICT")]
    Conflict,
    #[serde(rename = "DRA")]
    Dra,
    #[serde(rename = "EMP")]
    Emp,
    #[serde(rename = "ENEMY")]
    Enemy,
    #[serde(rename = "HERO")]
    Hero,
    #[serde(rename = "MCG")]
    Mcg,
    #[serde(rename = "NEO")]
    Neo,
    #[serde(rename = "PLD")]
    Pld,
    #[serde(rename = "SH")]
    Sh,
}

impl TropeType {
    pub const ALL: [TropeType; 10] = [
        TropeType::Bad,
        TropeType::Conflict,
        TropeType::Dra,
        TropeType::Emp,
        TropeType::Enemy,
        TropeType::Hero,
        TropeType::Mcg,
        TropeType::Neo,
        TropeType::Pld,
        TropeType::Sh,
    ];

    pub fn code(self) -> &'static str {
        match self {
            TropeType::Bad => "BAD",
            TropeType::Conflict => "CONFLICT",
            TropeType::Dra => "DRA",
            TropeType::Emp => "EMP",
            TropeType::Enemy => "ENEMY",
            TropeType::Hero => "HERO",
            TropeType::Mcg => "MCG",
            TropeType::Neo => "NEO",
            TropeType::Pld => "PLD",
            TropeType::Sh => "SH",
        }
    }

    pub fn from_code(code: &str) -> Option<TropeType> {
        TropeType::ALL.into_iter().find(|t| t.code() == code)
    }

    pub fn class(self) -> TropeClass {
        match self {
            TropeType::Hero | TropeType::Neo | TropeType::Sh => TropeClass::Hero,
            TropeType::Enemy | TropeType::Bad | TropeType::Dra | TropeType::Emp => {
                TropeClass::Villain
            }
            TropeType::Conflict => TropeClass::Structure,
            TropeType::Pld | TropeType::Mcg => TropeClass::PlotDevice,
        }
    }

    pub fn is_conflict(self) -> bool {
        self == TropeType::Conflict
    }
}

impl fmt::Display for TropeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EdgeKind {
    /// Entailment (derivative) connection.
    Entail,
    Plain,
}

impl EdgeKind {
    pub fn code(self) -> &'static str {
        match self {
            EdgeKind::Entail => "ENTAIL",
            EdgeKind::Plain => "PLAIN",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NarrativeNode {
    pub id: NodeId,
    pub trope: TropeType,
}

/// Edge between two node positions of the owning graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub kind: EdgeKind,
}

/// Edge addressed by node ids, as used in edits and documents.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NarrativeEdge {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: EdgeKind,
}

/// Budgets of level elements available to the narrative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelConstraints {
    pub heroes: usize,
    pub enemies: usize,
    pub quest_items: usize,
}

impl LevelConstraints {
    pub const fn new(heroes: usize, enemies: usize, quest_items: usize) -> Self {
        LevelConstraints {
            heroes,
            enemies,
            quest_items,
        }
    }
}

/// A single designer edit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphEdit {
    AddNode { id: NodeId, trope: TropeType },
    RemoveNode { id: NodeId },
    AddEdge(NarrativeEdge),
    RemoveEdge(NarrativeEdge),
    RetypeNode { id: NodeId, trope: TropeType },
}

/// Result of a weak-connectivity analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Connectivity {
    pub largest_component: usize,
    pub node_count: usize,
}

impl Connectivity {
    pub fn fully_connected(&self) -> bool {
        self.largest_component == self.node_count
    }

    pub fn reachable_fraction<S: Scalar>(&self) -> S {
        if self.node_count == 0 {
            return S::zero();
        }
        S::ratio(self.largest_component, self.node_count)
    }
}

/// Immutable-by-convention narrative graph. Edits return new values.
///
/// Invariants: at least one node, unique node ids, no self-loops, edge
/// endpoints in range and at most one edge per `(src, dst, kind)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphDocument", into = "GraphDocument")]
pub struct NarrativeGraph {
    nodes: Vec<NarrativeNode>,
    edges: Vec<Edge>,
}

impl NarrativeGraph {
    pub fn new(nodes: Vec<NarrativeNode>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        if nodes.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut ids = HashSet::with_capacity(nodes.len());
        for n in &nodes {
            if !ids.insert(&n.id) {
                return Err(GraphError::DuplicateNode(n.id.clone()));
            }
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            if e.src >= nodes.len() || e.dst >= nodes.len() {
                return Err(GraphError::Dangling(format!("{}->{}", e.src, e.dst)));
            }
            if e.src == e.dst {
                return Err(GraphError::SelfLoop(nodes[e.src].id.clone()));
            }
            if !seen.insert(*e) {
                return Err(GraphError::DuplicateEdge {
                    src: nodes[e.src].id.clone(),
                    dst: nodes[e.dst].id.clone(),
                    kind: e.kind,
                });
            }
        }
        Ok(NarrativeGraph { nodes, edges })
    }

    /// Builds a graph from `(id, trope)` nodes and `(src id, dst id, kind)` edges.
    pub fn from_parts(
        nodes: &[(&str, TropeType)],
        edges: &[(&str, &str, EdgeKind)],
    ) -> Result<Self, GraphError> {
        let nodes: Vec<NarrativeNode> = nodes
            .iter()
            .map(|&(id, trope)| NarrativeNode {
                id: NodeId::new(id),
                trope,
            })
            .collect();
        let lookup = |id: &str| {
            nodes
                .iter()
                .position(|n| n.id.as_str() == id)
                .ok_or_else(|| GraphError::Dangling(id.to_owned()))
        };
        let edges = edges
            .iter()
            .map(|&(s, d, kind)| {
                Ok(Edge {
                    src: lookup(s)?,
                    dst: lookup(d)?,
                    kind,
                })
            })
            .collect::<Result<Vec<_>, GraphError>>()?;
        NarrativeGraph::new(nodes, edges)
    }

    /// The minimal starting graph: HERO -> CONFLICT -> ENEMY.
    pub fn default_graph() -> Self {
        NarrativeGraph::from_parts(
            &[
                ("n0", TropeType::Hero),
                ("n1", TropeType::Conflict),
                ("n2", TropeType::Enemy),
            ],
            &[("n0", "n1", EdgeKind::Plain), ("n1", "n2", EdgeKind::Plain)],
        )
        .expect("default graph is valid")
    }

    pub fn single(trope: TropeType) -> Self {
        NarrativeGraph {
            nodes: vec![NarrativeNode {
                id: NodeId::new("n0"),
                trope,
            }],
            edges: Vec::new(),
        }
    }

    pub fn nodes(&self) -> &[NarrativeNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn trope(&self, index: usize) -> TropeType {
        self.nodes[index].trope
    }

    pub fn index_of(&self, id: &NodeId) -> Option<usize> {
        self.nodes.iter().position(|n| &n.id == id)
    }

    pub fn has_edge(&self, src: usize, dst: usize, kind: EdgeKind) -> bool {
        self.edges.contains(&Edge { src, dst, kind })
    }

    pub fn edge_by_ids(&self, edge: &Edge) -> NarrativeEdge {
        NarrativeEdge {
            src: self.nodes[edge.src].id.clone(),
            dst: self.nodes[edge.dst].id.clone(),
            kind: edge.kind,
        }
    }

    pub fn count_class(&self, class: TropeClass) -> usize {
        self.nodes.iter().filter(|n| n.trope.class() == class).count()
    }

    /// Smallest `n<k>` id not used by this graph.
    pub fn fresh_id(&self) -> NodeId {
        let mut k = self.nodes.len();
        loop {
            let candidate = NodeId(format!("n{k}"));
            if self.index_of(&candidate).is_none() {
                return candidate;
            }
            k += 1;
        }
    }

    pub fn apply_edit(&self, edit: &GraphEdit) -> Result<NarrativeGraph, GraphError> {
        let mut next = self.clone();
        match edit {
            GraphEdit::AddNode { id, trope } => {
                if self.index_of(id).is_some() {
                    return Err(GraphError::DuplicateNode(id.clone()));
                }
                next.nodes.push(NarrativeNode {
                    id: id.clone(),
                    trope: *trope,
                });
            }
            GraphEdit::RemoveNode { id } => {
                let idx = self.require(id)?;
                if self.nodes.len() == 1 {
                    return Err(GraphError::Empty);
                }
                next.remove_node_at(idx);
            }
            GraphEdit::AddEdge(e) => {
                let edge = self.resolve(e)?;
                if edge.src == edge.dst {
                    return Err(GraphError::SelfLoop(e.src.clone()));
                }
                if self.edges.contains(&edge) {
                    return Err(GraphError::DuplicateEdge {
                        src: e.src.clone(),
                        dst: e.dst.clone(),
                        kind: e.kind,
                    });
                }
                next.edges.push(edge);
            }
            GraphEdit::RemoveEdge(e) => {
                let edge = self.resolve(e)?;
                let pos = self
                    .edges
                    .iter()
                    .position(|x| *x == edge)
                    .ok_or_else(|| GraphError::EdgeNotFound(format!("{}->{}", e.src, e.dst)))?;
                next.edges.remove(pos);
            }
            GraphEdit::RetypeNode { id, trope } => {
                let idx = self.require(id)?;
                next.nodes[idx].trope = *trope;
            }
        }
        Ok(next)
    }

    fn require(&self, id: &NodeId) -> Result<usize, GraphError> {
        self.index_of(id)
            .ok_or_else(|| GraphError::NodeNotFound(id.clone()))
    }

    fn resolve(&self, e: &NarrativeEdge) -> Result<Edge, GraphError> {
        Ok(Edge {
            src: self.require(&e.src)?,
            dst: self.require(&e.dst)?,
            kind: e.kind,
        })
    }

    /// Removes the node at `idx` and its incident edges, shifting indices.
    pub(crate) fn remove_node_at(&mut self, idx: usize) {
        self.nodes.remove(idx);
        self.edges.retain(|e| e.src != idx && e.dst != idx);
        for e in &mut self.edges {
            if e.src > idx {
                e.src -= 1;
            }
            if e.dst > idx {
                e.dst -= 1;
            }
        }
    }

    pub(crate) fn push_node(&mut self, id: NodeId, trope: TropeType) -> usize {
        self.nodes.push(NarrativeNode { id, trope });
        self.nodes.len() - 1
    }

    pub(crate) fn set_trope(&mut self, idx: usize, trope: TropeType) {
        self.nodes[idx].trope = trope;
    }

    /// Adds an edge if it is not a self-loop or duplicate. Returns whether it was added.
    pub(crate) fn insert_edge(&mut self, edge: Edge) -> bool {
        if edge.src == edge.dst || self.edges.contains(&edge) {
            return false;
        }
        self.edges.push(edge);
        true
    }

    pub(crate) fn remove_edge(&mut self, edge: &Edge) {
        self.edges.retain(|e| e != edge);
    }

    /// Weak connectivity: edges are followed in both directions.
    pub fn connectivity(&self) -> Connectivity {
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in &self.edges {
            let a = find(&mut parent, e.src);
            let b = find(&mut parent, e.dst);
            if a != b {
                parent[a] = b;
            }
        }
        let mut sizes = vec![0usize; n];
        for i in 0..n {
            let r = find(&mut parent, i);
            sizes[r] += 1;
        }
        Connectivity {
            largest_component: sizes.into_iter().max().unwrap_or(0),
            node_count: n,
        }
    }
}
