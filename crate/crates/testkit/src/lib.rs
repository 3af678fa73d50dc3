//! Reference implementations and generators used only by tests.
//!
//! The oracles here favor exhaustive enumeration over efficiency so they can
//! be checked by eye against the detection and matching rules.

use num_rational::Ratio;
use proptest::prelude::*;
use rand::Rng;
use story_core::graph::{Edge, NarrativeNode};
use story_core::grammar::ProductionRule;
use story_core::{EdgeKind, NarrativeGraph, NodeId, PatternInstance, PatternKind, Quality, TropeClass, TropeType};

pub const KINDS: [EdgeKind; 2] = [EdgeKind::Plain, EdgeKind::Entail];

/// Random valid graph with `1..=max_nodes` nodes; each ordered pair carries
/// each edge kind with probability `density`.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R, max_nodes: usize, density: f64) -> NarrativeGraph {
    let n = rng.random_range(1..=max_nodes);
    let nodes: Vec<NarrativeNode> = (0..n)
        .map(|i| NarrativeNode {
            id: NodeId::new(format!("v{i}")),
            trope: TropeType::ALL[rng.random_range(0..TropeType::ALL.len())],
        })
        .collect();
    let mut edges = Vec::new();
    for src in 0..n {
        for dst in 0..n {
            if src == dst {
                continue;
            }
            for kind in KINDS {
                if rng.random_bool(density) {
                    edges.push(Edge { src, dst, kind });
                }
            }
        }
    }
    NarrativeGraph::new(nodes, edges).expect("generated graphs are valid")
}

pub fn trope_strategy() -> impl Strategy<Value = TropeType> {
    prop::sample::select(TropeType::ALL.to_vec())
}

/// Proptest strategy for valid graphs with `1..=max_nodes` nodes.
pub fn graph_strategy(max_nodes: usize) -> impl Strategy<Value = NarrativeGraph> {
    (1..=max_nodes)
        .prop_flat_map(|n| {
            let pairs = n * (n - 1) * 2;
            (
                prop::collection::vec(trope_strategy(), n),
                prop::collection::vec(prop::bool::weighted(0.25), pairs),
            )
        })
        .prop_map(|(tropes, mask)| {
            let n = tropes.len();
            let nodes = tropes
                .into_iter()
                .enumerate()
                .map(|(i, trope)| NarrativeNode {
                    id: NodeId::new(format!("v{i}")),
                    trope,
                })
                .collect();
            let mut edges = Vec::new();
            let mut bits = mask.into_iter();
            for src in 0..n {
                for dst in (0..n).filter(|&d| d != src) {
                    for kind in KINDS {
                        if bits.next().unwrap_or(false) {
                            edges.push(Edge { src, dst, kind });
                        }
                    }
                }
            }
            NarrativeGraph::new(nodes, edges).expect("generated graphs are valid")
        })
}

fn edge_index(g: &NarrativeGraph, src: usize, dst: usize, kind: EdgeKind) -> Option<usize> {
    g.edges()
        .iter()
        .position(|e| e.src == src && e.dst == dst && e.kind == kind)
}

fn instance(kind: PatternKind, nodes: Vec<usize>, edges: Vec<usize>) -> PatternInstance {
    PatternInstance {
        kind,
        anchor_nodes: nodes,
        anchor_edges: edges,
        quality: Quality::Zero,
        self_conflict: false,
        fake: false,
    }
}

/// Brute-force pattern detection: every rule is checked over all node
/// tuples of the matching arity, and entailment reach is a full closure.
pub fn oracle_patterns(g: &NarrativeGraph) -> Vec<PatternInstance> {
    let n = g.node_count();
    let class = |i: usize| g.trope(i).class();
    let is_char = |i: usize| matches!(class(i), TropeClass::Hero | TropeClass::Villain);
    let mut out = Vec::new();

    for v in 0..n {
        let kind = match class(v) {
            TropeClass::Structure => PatternKind::Sp,
            TropeClass::Hero | TropeClass::Villain => PatternKind::Cp,
            TropeClass::PlotDevice => PatternKind::Pdp,
        };
        out.push(instance(kind, vec![v], vec![]));
    }

    let mut revealed = vec![vec![false; n]; n];
    let mut reveal_sources = vec![false; n];
    for a in 0..n {
        for b in 0..n {
            if a == b || !is_char(a) || !is_char(b) {
                continue;
            }
            if let Some(e) = edge_index(g, a, b, EdgeKind::Plain) {
                out.push(instance(PatternKind::RevP, vec![a, b], vec![e]));
                revealed[a][b] = true;
                revealed[b][a] = true;
                reveal_sources[a] = true;
            }
        }
    }

    for x in 0..n {
        for c in 0..n {
            for y in 0..n {
                if g.trope(c) != TropeType::Conflict
                    || g.trope(x) == TropeType::Conflict
                    || g.trope(y) == TropeType::Conflict
                {
                    continue;
                }
                let (Some(e1), Some(e2)) = (
                    edge_index(g, x, c, EdgeKind::Plain),
                    edge_index(g, c, y, EdgeKind::Plain),
                ) else {
                    continue;
                };
                let mut inst = instance(PatternKind::ConfP, vec![x, c, y], vec![e1, e2]);
                inst.self_conflict = x == y;
                inst.fake = x != y && revealed[x][y];
                out.push(inst);
            }
        }
    }

    // Transitive closure of the entailment relation.
    let mut reach = vec![vec![false; n]; n];
    for e in g.edges().iter().filter(|e| e.kind == EdgeKind::Entail) {
        reach[e.src][e.dst] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let has_in = |v: usize| g.edges().iter().any(|e| e.kind == EdgeKind::Entail && e.dst == v);
    let has_out = |v: usize| g.edges().iter().any(|e| e.kind == EdgeKind::Entail && e.src == v);
    let mut derivative = vec![false; n];
    let mut twist = vec![false; n];
    for r in (0..n).filter(|&r| has_out(r) && !has_in(r)) {
        let derived: Vec<usize> = (0..n).filter(|&d| d != r && reach[r][d]).collect();
        let edges: Vec<usize> = (0..g.edge_count())
            .filter(|&i| {
                let e = &g.edges()[i];
                e.kind == EdgeKind::Entail && (e.src == r || derived.contains(&e.src))
            })
            .collect();
        for &d in &derived {
            derivative[d] = true;
            if is_char(r) && is_char(d) && class(r) != class(d) {
                twist[d] = true;
            }
        }
        let mut anchors = vec![r];
        anchors.extend(derived);
        out.push(instance(PatternKind::DerP, anchors, edges));
    }

    let mut active = vec![false; n];
    for p in (0..n).filter(|&p| class(p) == TropeClass::PlotDevice) {
        let triggers: Vec<usize> = (0..g.edge_count())
            .filter(|&i| {
                let e = &g.edges()[i];
                e.dst == p && class(e.src) != TropeClass::PlotDevice
            })
            .collect();
        if triggers.is_empty() {
            continue;
        }
        let mut anchors = vec![p];
        for s in 0..n {
            if triggers.iter().any(|&i| g.edges()[i].src == s) {
                anchors.push(s);
            }
        }
        out.push(instance(PatternKind::Apd, anchors, triggers));
        active[p] = true;
    }

    for v in 0..n {
        if derivative[v] || reveal_sources[v] || active[v] {
            out.push(instance(PatternKind::Pp, vec![v], vec![]));
        }
    }
    for v in (0..n).filter(|&v| twist[v]) {
        out.push(instance(PatternKind::Pt, vec![v], vec![]));
    }

    let meso: Vec<&PatternInstance> = out
        .iter()
        .filter(|i| {
            matches!(
                i.kind,
                PatternKind::ConfP
                    | PatternKind::DerP
                    | PatternKind::RevP
                    | PatternKind::Apd
                    | PatternKind::Pp
                    | PatternKind::Pt
            )
        })
        .collect();
    let node_in_meso: Vec<bool> = (0..n)
        .map(|v| meso.iter().any(|i| i.anchor_nodes.contains(&v)))
        .collect();
    let edge_in_meso: Vec<bool> = (0..g.edge_count())
        .map(|e| meso.iter().any(|i| i.anchor_edges.contains(&e)))
        .collect();
    for v in (0..n).filter(|&v| !node_in_meso[v]) {
        out.push(instance(PatternKind::Nothing, vec![v], vec![]));
    }
    for e in (0..g.edge_count()).filter(|&e| !edge_in_meso[e]) {
        out.push(instance(PatternKind::BrokenLink, vec![], vec![e]));
    }

    for inst in &mut out {
        inst.quality = match inst.kind {
            PatternKind::Sp | PatternKind::Cp | PatternKind::Pdp => {
                let v = inst.anchor_nodes[0];
                let incident = g.edges().iter().any(|e| e.src == v || e.dst == v);
                if node_in_meso[v] {
                    Quality::Full
                } else if incident {
                    Quality::Half
                } else {
                    Quality::Zero
                }
            }
            PatternKind::Apd => {
                let entailed = inst
                    .anchor_edges
                    .iter()
                    .any(|&e| g.edges()[e].kind == EdgeKind::Entail);
                if entailed {
                    Quality::Full
                } else {
                    Quality::Half
                }
            }
            PatternKind::Pp => {
                if twist[inst.anchor_nodes[0]] {
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
        };
    }
    out.sort();
    out
}

/// Every injective, label- and edge-preserving occurrence of the rule's
/// left side, by exhaustive enumeration.
pub fn all_occurrences(g: &NarrativeGraph, rule: &ProductionRule) -> Vec<Vec<usize>> {
    let k = rule.lhs.nodes.len();
    let n = g.node_count();
    let mut found = Vec::new();
    if k == 0 || k > n {
        return found;
    }
    let total = n.pow(k as u32);
    for code in 0..total {
        let mut binding = Vec::with_capacity(k);
        let mut c = code;
        for _ in 0..k {
            binding.push(c % n);
            c /= n;
        }
        let injective = (0..k).all(|i| (i + 1..k).all(|j| binding[i] != binding[j]));
        if !injective {
            continue;
        }
        let labels = (0..k).all(|i| rule.lhs.nodes[i].matches(g.trope(binding[i])));
        let edges = rule
            .lhs
            .edges
            .iter()
            .all(|e| g.has_edge(binding[e.src], binding[e.dst], e.kind));
        if labels && edges {
            found.push(binding);
        }
    }
    found
}

/// The occurrence ranked first when graph nodes are ordered by `(trope, id)`
/// and bindings are compared position by position.
pub fn first_occurrence(g: &NarrativeGraph, rule: &ProductionRule) -> Option<Vec<usize>> {
    let mut order: Vec<usize> = (0..g.node_count()).collect();
    order.sort_by_key(|&i| (g.trope(i), g.nodes()[i].id.clone()));
    let mut rank = vec![0; g.node_count()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    all_occurrences(g, rule)
        .into_iter()
        .min_by_key(|b| b.iter().map(|&i| rank[i]).collect::<Vec<_>>())
}

/// Exact scores computed from [`oracle_patterns`] and direct graph scans.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleScores {
    pub feasible: bool,
    pub fitness: Ratio<i64>,
    pub cohesion: Ratio<i64>,
    pub consistency: Ratio<i64>,
    pub coherence: Ratio<i64>,
    pub infeasible_fitness: Ratio<i64>,
    /// In the order step, interestingness, diversity, conflicts, plot points,
    /// plot twists, plot devices.
    pub dimensions: [Ratio<i64>; 7],
}

fn r(n: usize, d: usize) -> Ratio<i64> {
    Ratio::new(n as i64, d as i64)
}

fn unit(x: Ratio<i64>) -> Ratio<i64> {
    x.max(r(0, 1)).min(r(1, 1))
}

/// Token strings sorted as in the canonical form.
pub fn oracle_tokens(g: &NarrativeGraph) -> Vec<String> {
    let mut nodes: Vec<&str> = g.nodes().iter().map(|n| n.trope.code()).collect();
    nodes.sort_unstable();
    let mut edges: Vec<(&str, &str, &str)> = g
        .edges()
        .iter()
        .map(|e| (g.trope(e.src).code(), e.kind.code(), g.trope(e.dst).code()))
        .collect();
    edges.sort_unstable();
    nodes
        .into_iter()
        .map(str::to_owned)
        .chain(edges.into_iter().map(|(a, k, b)| format!("({a},{k},{b})")))
        .collect()
}

/// Size of the largest weakly connected component, by repeated search.
pub fn largest_component(g: &NarrativeGraph) -> usize {
    let n = g.node_count();
    let mut seen = vec![false; n];
    let mut best = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut frontier = vec![s];
        let mut size = 0;
        while let Some(v) = frontier.pop() {
            size += 1;
            for e in g.edges() {
                for (a, b) in [(e.src, e.dst), (e.dst, e.src)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        frontier.push(b);
                    }
                }
            }
        }
        best = best.max(size);
    }
    best
}

pub fn oracle_scores(
    g: &NarrativeGraph,
    target: &NarrativeGraph,
    budgets: Option<(usize, usize, usize)>,
) -> OracleScores {
    let pats = oracle_patterns(g);
    let n = g.node_count();
    let m = g.edge_count();
    let count = |k: PatternKind| pats.iter().filter(|i| i.kind == k).count();
    let quality = |q: Quality| match q {
        Quality::Zero => r(0, 1),
        Quality::Half => r(1, 2),
        Quality::Full => r(1, 1),
    };
    let mean_quality = |k: PatternKind| {
        let c = count(k);
        if c == 0 {
            r(0, 1)
        } else {
            pats.iter()
                .filter(|i| i.kind == k)
                .map(|i| quality(i.quality))
                .sum::<Ratio<i64>>()
                / r(c, 1)
        }
    };

    let aux = count(PatternKind::Nothing) + count(PatternKind::BrokenLink);
    let cohesion = unit(r(1, 1) - r(aux, n + m));

    let micro: Vec<Ratio<i64>> = pats
        .iter()
        .filter(|i| matches!(i.kind, PatternKind::Sp | PatternKind::Cp | PatternKind::Pdp))
        .map(|i| quality(i.quality))
        .collect();
    let micro_mean = micro.iter().copied().sum::<Ratio<i64>>() / r(micro.len(), 1);
    let confs: Vec<&PatternInstance> = pats.iter().filter(|i| i.kind == PatternKind::ConfP).collect();
    let fakes = confs.iter().filter(|c| c.fake).count();
    let penalty = if confs.is_empty() {
        r(0, 1)
    } else {
        r(3, 10) * r(fakes, confs.len())
    };
    let consistency = unit(micro_mean - penalty);
    let coherence = unit((consistency + cohesion) / r(2, 1));

    let mut self_conf = vec![0usize; n];
    for c in confs.iter().filter(|c| c.self_conflict) {
        self_conf[c.anchor_nodes[0]] += 1;
    }
    let invalid: usize = self_conf.iter().map(|&k| k.saturating_sub(1)).sum();
    let largest = largest_component(g);
    let infeasible_fitness = unit(
        r(1, 2) * cohesion + r(1, 4) * r(largest, n) + r(1, 4) * (r(1, 1) - r(invalid, n)),
    );

    let count_class = |c: TropeClass| g.nodes().iter().filter(|v| v.trope.class() == c).count();
    let mut feasible = largest == n && self_conf.iter().all(|&k| k <= 1);
    if let Some((h, e, q)) = budgets {
        feasible &= count_class(TropeClass::Hero) <= h
            && count_class(TropeClass::Villain) <= e
            && count_class(TropeClass::PlotDevice) <= q;
    }

    let (ta, tb) = (oracle_tokens(g), oracle_tokens(target));
    let step = unit(r(strsim::generic_levenshtein(&ta, &tb), ta.len().max(tb.len())));
    let interestingness = (mean_quality(PatternKind::Apd)
        + mean_quality(PatternKind::Pp)
        + mean_quality(PatternKind::Pt))
        / r(3, 1);
    let classes = [
        TropeClass::Hero,
        TropeClass::Villain,
        TropeClass::Structure,
        TropeClass::PlotDevice,
    ]
    .into_iter()
    .filter(|&c| count_class(c) > 0)
    .count();
    let explicit = confs.iter().filter(|c| !c.fake && !c.self_conflict).count();
    let dimensions = [
        step,
        interestingness,
        r(classes, 4),
        unit(r(explicit, 5)),
        unit(r(count(PatternKind::Pp), 5)),
        unit(r(count(PatternKind::Pt), 5)),
        unit(r(count(PatternKind::Apd), 5)),
    ];

    OracleScores {
        feasible,
        fitness: if feasible { coherence } else { infeasible_fitness },
        cohesion,
        consistency,
        coherence,
        infeasible_fitness,
        dimensions,
    }
}
