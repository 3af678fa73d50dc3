use crate::graph::{Edge, NarrativeGraph};

use super::{ProductionRule, MAX_PHENOTYPE_NODES};

/// Graph node position bound to each left-hand node.
pub type Binding = Vec<usize>;

/// Graph node positions sorted by `(trope, id)`.
fn canonical_order(g: &NarrativeGraph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.node_count()).collect();
    order.sort_by(|&a, &b| {
        let (na, nb) = (&g.nodes()[a], &g.nodes()[b]);
        (na.trope, &na.id).cmp(&(nb.trope, &nb.id))
    });
    order
}

/// First occurrence of the rule's left side in `g`.
///
/// Occurrences are injective, label-preserving (class labels match any
/// trope of the class) and require every left-hand edge with its kind.
/// "First" is lexicographic over left-hand node positions, ranking graph
/// nodes in canonical order.
pub fn match_rule(g: &NarrativeGraph, rule: &ProductionRule) -> Option<Binding> {
    let lhs = &rule.lhs;
    if lhs.nodes.is_empty() || lhs.nodes.len() > g.node_count() {
        return None;
    }
    let order = canonical_order(g);
    let mut binding = Vec::with_capacity(lhs.nodes.len());
    let mut used = vec![false; g.node_count()];
    if extend(g, rule, &order, &mut binding, &mut used) {
        Some(binding)
    } else {
        None
    }
}

fn extend(
    g: &NarrativeGraph,
    rule: &ProductionRule,
    order: &[usize],
    binding: &mut Binding,
    used: &mut [bool],
) -> bool {
    let pos = binding.len();
    if pos == rule.lhs.nodes.len() {
        return true;
    }
    let label = rule.lhs.nodes[pos];
    for &candidate in order {
        if used[candidate] || !label.matches(g.trope(candidate)) {
            continue;
        }
        // Edges between this node and already-bound ones must exist.
        let consistent = rule.lhs.edges.iter().all(|e| {
            let (s, d) = (e.src, e.dst);
            if s == pos && d < pos {
                g.has_edge(candidate, binding[d], e.kind)
            } else if d == pos && s < pos {
                g.has_edge(binding[s], candidate, e.kind)
            } else {
                true
            }
        });
        if !consistent {
            continue;
        }
        binding.push(candidate);
        used[candidate] = true;
        if extend(g, rule, order, binding, used) {
            return true;
        }
        binding.pop();
        used[candidate] = false;
    }
    false
}

/// Rewrites the occurrence `binding` of `rule` in `g`.
///
/// Returns `None` when the rewrite would leave no nodes or exceed
/// [`MAX_PHENOTYPE_NODES`].
pub fn apply_rule(g: &NarrativeGraph, rule: &ProductionRule, binding: &[usize]) -> Option<NarrativeGraph> {
    let deleted = rule.mapping.iter().filter(|m| m.is_none()).count();
    let created = rule.rhs.nodes.len() - rule.mapping.iter().flatten().count();
    let final_size = g.node_count() + created - deleted;
    if final_size == 0 || final_size > MAX_PHENOTYPE_NODES.max(g.node_count()) {
        return None;
    }

    let mut out = g.clone();
    let mut rhs_to_graph: Vec<Option<usize>> = vec![None; rule.rhs.nodes.len()];
    for (li, &gi) in binding.iter().enumerate() {
        if let Some(ri) = rule.mapping[li] {
            rhs_to_graph[ri] = Some(gi);
            let trope = rule.rhs.nodes[ri].resolve(Some(out.trope(gi)));
            out.set_trope(gi, trope);
        }
    }
    for e in &rule.lhs.edges {
        out.remove_edge(&Edge {
            src: binding[e.src],
            dst: binding[e.dst],
            kind: e.kind,
        });
    }
    for (ri, slot) in rhs_to_graph.iter_mut().enumerate() {
        if slot.is_none() {
            let id = out.fresh_id();
            *slot = Some(out.push_node(id, rule.rhs.nodes[ri].resolve(None)));
        }
    }
    for e in &rule.rhs.edges {
        out.insert_edge(Edge {
            src: rhs_to_graph[e.src].expect("every rhs node is placed"),
            dst: rhs_to_graph[e.dst].expect("every rhs node is placed"),
            kind: e.kind,
        });
    }
    let mut doomed: Vec<usize> = binding
        .iter()
        .zip(&rule.mapping)
        .filter(|(_, m)| m.is_none())
        .map(|(&gi, _)| gi)
        .collect();
    doomed.sort_unstable_by(|a, b| b.cmp(a));
    for gi in doomed {
        out.remove_node_at(gi);
    }
    Some(out)
}
