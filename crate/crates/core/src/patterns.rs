//! Trope pattern detection.
//!
//! Micro-patterns wrap single nodes, meso-patterns capture narrative
//! relationships between several nodes, and auxiliary patterns mark the
//! nodes and edges that take part in no meso-pattern.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::graph::{EdgeKind, NarrativeGraph, TropeClass};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PatternKind {
    /// Structure pattern (one per CONFLICT node).
    #[serde(rename = "SP")]
    Sp,
    /// Character pattern.
    #[serde(rename = "CP")]
    Cp,
    /// Plot device pattern.
    #[serde(rename = "PDP")]
    Pdp,
    ConfP,
    DerP,
    RevP,
    #[serde(rename = "APD")]
    Apd,
    #[serde(rename = "PP")]
    Pp,
    #[serde(rename = "PT")]
    Pt,
    Nothing,
    BrokenLink,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PatternLevel {
    Micro,
    Meso,
    Auxiliary,
}

impl PatternKind {
    pub const ALL: [PatternKind; 11] = [
        PatternKind::Sp,
        PatternKind::Cp,
        PatternKind::Pdp,
        PatternKind::ConfP,
        PatternKind::DerP,
        PatternKind::RevP,
        PatternKind::Apd,
        PatternKind::Pp,
        PatternKind::Pt,
        PatternKind::Nothing,
        PatternKind::BrokenLink,
    ];

    pub fn level(self) -> PatternLevel {
        use PatternKind::*;
        match self {
            Sp | Cp | Pdp => PatternLevel::Micro,
            ConfP | DerP | RevP | Apd | Pp | Pt => PatternLevel::Meso,
            Nothing | BrokenLink => PatternLevel::Auxiliary,
        }
    }

    pub fn name(self) -> &'static str {
        use PatternKind::*;
        match self {
            Sp => "SP",
            Cp => "CP",
            Pdp => "PDP",
            ConfP => "ConfP",
            DerP => "DerP",
            RevP => "RevP",
            Apd => "APD",
            Pp => "PP",
            Pt => "PT",
            Nothing => "Nothing",
            BrokenLink => "BrokenLink",
        }
    }
}

/// Pattern quality. Every rule in use yields 0, 1/2 or 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quality {
    Zero,
    Half,
    Full,
}

impl Quality {
    pub fn value<S: Scalar>(self) -> S {
        match self {
            Quality::Zero => S::zero(),
            Quality::Half => S::ratio(1, 2),
            Quality::Full => S::one(),
        }
    }
}

impl Serialize for Quality {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        s.serialize_f64(self.value::<f64>())
    }
}

impl<'de> Deserialize<'de> for Quality {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        match v {
            x if x == 0.0 => Ok(Quality::Zero),
            x if x == 0.5 => Ok(Quality::Half),
            x if x == 1.0 => Ok(Quality::Full),
            other => Err(serde::de::Error::custom(format!("invalid quality {other}"))),
        }
    }
}

/// One detected pattern. Anchors are node and edge positions in the graph.
///
/// Anchor layout per kind: micro, PP, PT and Nothing anchor one node; ConfP
/// anchors `[source, conflict, target]`; DerP anchors the root followed by
/// its sorted derivatives; RevP anchors `[source, target]`; APD anchors the
/// plot device followed by its triggering nodes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PatternInstance {
    pub kind: PatternKind,
    pub anchor_nodes: Vec<usize>,
    pub anchor_edges: Vec<usize>,
    pub quality: Quality,
    pub self_conflict: bool,
    pub fake: bool,
}

impl PatternInstance {
    fn new(kind: PatternKind, anchor_nodes: Vec<usize>, anchor_edges: Vec<usize>) -> Self {
        PatternInstance {
            kind,
            anchor_nodes,
            anchor_edges,
            quality: Quality::Zero,
            self_conflict: false,
            fake: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PatternSet {
    instances: Vec<PatternInstance>,
    #[serde(skip)]
    meso_nodes: Vec<bool>,
    #[serde(skip)]
    pt_nodes: Vec<bool>,
}

impl PatternSet {
    pub fn instances(&self) -> &[PatternInstance] {
        &self.instances
    }

    pub fn of_kind(&self, kind: PatternKind) -> impl Iterator<Item = &PatternInstance> {
        self.instances.iter().filter(move |i| i.kind == kind)
    }

    pub fn count(&self, kind: PatternKind) -> usize {
        self.of_kind(kind).count()
    }

    /// Instance counts for every kind, in `PatternKind::ALL` order.
    pub fn summary(&self) -> Vec<(PatternKind, usize)> {
        PatternKind::ALL.iter().map(|&k| (k, self.count(k))).collect()
    }

    pub fn in_meso(&self, node: usize) -> bool {
        self.meso_nodes.get(node).copied().unwrap_or(false)
    }

    pub fn is_plot_twist(&self, node: usize) -> bool {
        self.pt_nodes.get(node).copied().unwrap_or(false)
    }

    /// Number of self-conflict ConfP instances whose party is `node`.
    pub fn self_conflicts_of(&self, node: usize) -> usize {
        self.of_kind(PatternKind::ConfP)
            .filter(|c| c.self_conflict && c.anchor_nodes[0] == node)
            .count()
    }
}

struct Adjacency {
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
}

impl Adjacency {
    fn new(g: &NarrativeGraph) -> Self {
        let n = g.node_count();
        let mut incoming = vec![Vec::new(); n];
        let mut outgoing = vec![Vec::new(); n];
        for (i, e) in g.edges().iter().enumerate() {
            outgoing[e.src].push(i);
            incoming[e.dst].push(i);
        }
        Adjacency { incoming, outgoing }
    }
}

pub fn detect_patterns(g: &NarrativeGraph) -> PatternSet {
    let n = g.node_count();
    let edges = g.edges();
    let adj = Adjacency::new(g);
    let class = |i: usize| g.trope(i).class();
    let mut out = Vec::new();

    for i in 0..n {
        let kind = match class(i) {
            TropeClass::Structure => PatternKind::Sp,
            TropeClass::Hero | TropeClass::Villain => PatternKind::Cp,
            TropeClass::PlotDevice => PatternKind::Pdp,
        };
        out.push(PatternInstance::new(kind, vec![i], vec![]));
    }

    // Conflicts: X -PLAIN-> CONFLICT -PLAIN-> Y.
    let mut conflicts = Vec::new();
    for c in (0..n).filter(|&c| g.trope(c).is_conflict()) {
        for &ein in &adj.incoming[c] {
            let x = edges[ein].src;
            if edges[ein].kind != EdgeKind::Plain || g.trope(x).is_conflict() {
                continue;
            }
            for &eout in &adj.outgoing[c] {
                let y = edges[eout].dst;
                if edges[eout].kind != EdgeKind::Plain || g.trope(y).is_conflict() {
                    continue;
                }
                let mut inst = PatternInstance::new(PatternKind::ConfP, vec![x, c, y], vec![ein, eout]);
                inst.self_conflict = x == y;
                conflicts.push(inst);
            }
        }
    }

    // Reveals: PLAIN edge directly between two characters.
    let mut reveal_sources = BTreeSet::new();
    let mut revealed_pairs = BTreeSet::new();
    for (ei, e) in edges.iter().enumerate() {
        if e.kind == EdgeKind::Plain && class(e.src).is_character() && class(e.dst).is_character() {
            out.push(PatternInstance::new(PatternKind::RevP, vec![e.src, e.dst], vec![ei]));
            reveal_sources.insert(e.src);
            revealed_pairs.insert((e.src.min(e.dst), e.src.max(e.dst)));
        }
    }
    for mut c in conflicts {
        let (x, y) = (c.anchor_nodes[0], c.anchor_nodes[2]);
        c.fake = x != y && revealed_pairs.contains(&(x.min(y), x.max(y)));
        out.push(c);
    }

    // Derivative chains: rooted at nodes with outgoing but no incoming entailment.
    let entails_in = |i: usize| adj.incoming[i].iter().any(|&e| edges[e].kind == EdgeKind::Entail);
    let entails_out = |i: usize| adj.outgoing[i].iter().any(|&e| edges[e].kind == EdgeKind::Entail);
    let mut derivatives = BTreeSet::new();
    let mut twists = BTreeSet::new();
    for root in (0..n).filter(|&r| entails_out(r) && !entails_in(r)) {
        let mut reached = vec![false; n];
        reached[root] = true;
        let mut stack = vec![root];
        let mut chain_edges = Vec::new();
        while let Some(v) = stack.pop() {
            for &ei in &adj.outgoing[v] {
                if edges[ei].kind != EdgeKind::Entail {
                    continue;
                }
                chain_edges.push(ei);
                let d = edges[ei].dst;
                if !reached[d] {
                    reached[d] = true;
                    stack.push(d);
                }
            }
        }
        let derived: Vec<usize> = (0..n).filter(|&d| reached[d] && d != root).collect();
        for &d in &derived {
            derivatives.insert(d);
            let (rc, dc) = (class(root), class(d));
            if rc.is_character() && dc.is_character() && rc != dc {
                twists.insert(d);
            }
        }
        chain_edges.sort_unstable();
        let mut anchors = vec![root];
        anchors.extend(derived);
        out.push(PatternInstance::new(PatternKind::DerP, anchors, chain_edges));
    }

    // Active plot devices: triggered by a non-plot-device node.
    let mut active = BTreeSet::new();
    for p in (0..n).filter(|&p| class(p) == TropeClass::PlotDevice) {
        let mut triggers: Vec<usize> = adj.incoming[p]
            .iter()
            .copied()
            .filter(|&ei| class(edges[ei].src) != TropeClass::PlotDevice)
            .collect();
        if triggers.is_empty() {
            continue;
        }
        triggers.sort_unstable();
        let mut anchors = vec![p];
        let mut sources: Vec<usize> = triggers.iter().map(|&ei| edges[ei].src).collect();
        sources.sort_unstable();
        sources.dedup();
        anchors.extend(sources);
        out.push(PatternInstance::new(PatternKind::Apd, anchors, triggers));
        active.insert(p);
    }

    let plot_points: BTreeSet<usize> = derivatives
        .iter()
        .chain(reveal_sources.iter())
        .chain(active.iter())
        .copied()
        .collect();
    for &p in &plot_points {
        out.push(PatternInstance::new(PatternKind::Pp, vec![p], vec![]));
    }
    for &t in &twists {
        out.push(PatternInstance::new(PatternKind::Pt, vec![t], vec![]));
    }

    let mut meso_nodes = vec![false; n];
    let mut meso_edges = vec![false; edges.len()];
    for inst in out.iter().filter(|i| i.kind.level() == PatternLevel::Meso) {
        for &v in &inst.anchor_nodes {
            meso_nodes[v] = true;
        }
        for &e in &inst.anchor_edges {
            meso_edges[e] = true;
        }
    }
    for v in (0..n).filter(|&v| !meso_nodes[v]) {
        out.push(PatternInstance::new(PatternKind::Nothing, vec![v], vec![]));
    }
    for e in (0..edges.len()).filter(|&e| !meso_edges[e]) {
        out.push(PatternInstance::new(PatternKind::BrokenLink, vec![], vec![e]));
    }

    let mut pt_nodes = vec![false; n];
    for &t in &twists {
        pt_nodes[t] = true;
    }
    let mut set = PatternSet {
        instances: Vec::new(),
        meso_nodes,
        pt_nodes,
    };
    for inst in &mut out {
        inst.quality = instance_quality(inst, g, &set);
    }
    out.sort();
    set.instances = out;
    set
}

/// Quality of one instance given the graph and the meso/twist membership in `patterns`.
pub fn instance_quality(inst: &PatternInstance, g: &NarrativeGraph, patterns: &PatternSet) -> Quality {
    match inst.kind {
        PatternKind::Sp | PatternKind::Cp | PatternKind::Pdp => {
            let v = inst.anchor_nodes[0];
            if patterns.in_meso(v) {
                Quality::Full
            } else if g.edges().iter().any(|e| e.src == v || e.dst == v) {
                Quality::Half
            } else {
                Quality::Zero
            }
        }
        PatternKind::Apd => {
            if inst
                .anchor_edges
                .iter()
                .any(|&e| g.edges()[e].kind == EdgeKind::Entail)
            {
                Quality::Full
            } else {
                Quality::Half
            }
        }
        PatternKind::Pp => {
            if patterns.is_plot_twist(inst.anchor_nodes[0]) {
                Quality::Full
            } else {
                Quality::Zero
            }
        }
        PatternKind::ConfP => {
            if inst.fake {
                Quality::Zero
            } else {
                Quality::Full
            }
        }
        PatternKind::Pt | PatternKind::DerP | PatternKind::RevP => Quality::Full,
        PatternKind::Nothing | PatternKind::BrokenLink => Quality::Zero,
    }
}
