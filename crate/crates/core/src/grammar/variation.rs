use rand::seq::IndexedRandom;
use rand::Rng;

use crate::graph::TropeType;

use super::{
    random_kind, GraphGrammar, Label, ProductionRule, RuleEdge, MAX_LHS_NODES, MAX_RHS_NODES,
    MAX_RULES,
};

/// Probability that a mutation adds or removes a whole rule.
pub const STRUCTURAL_MUTATION_RATE: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MutationKind {
    AddRule,
    RemoveRule,
    ModifyRule,
}

#[derive(Clone, Copy)]
enum Edit {
    AddNode,
    RemoveNode,
    Retype,
    AddEdge,
    RemoveEdge,
}

const RHS_EDITS: [(Edit, u32); 5] = [
    (Edit::AddNode, 35),
    (Edit::AddEdge, 20),
    (Edit::Retype, 20),
    (Edit::RemoveEdge, 10),
    (Edit::RemoveNode, 15),
];

const LHS_EDITS: [(Edit, u32); 5] = [
    (Edit::AddNode, 20),
    (Edit::AddEdge, 20),
    (Edit::Retype, 30),
    (Edit::RemoveEdge, 15),
    (Edit::RemoveNode, 15),
];

fn pick_edit<R: Rng + ?Sized>(table: &[(Edit, u32)], rng: &mut R) -> Edit {
    table
        .choose_weighted(rng, |(_, w)| *w)
        .expect("weights are positive")
        .0
}

fn random_edge<R: Rng + ?Sized>(a: usize, b: usize, rng: &mut R) -> RuleEdge {
    let (src, dst) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
    RuleEdge {
        src,
        dst,
        kind: random_kind(rng),
    }
}

fn distinct_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// Applies one random atomic edit to the right-hand side.
pub(crate) fn edit_rhs<R: Rng + ?Sized>(rule: &mut ProductionRule, rng: &mut R) {
    loop {
        let n = rule.rhs.nodes.len();
        match pick_edit(&RHS_EDITS, rng) {
            Edit::AddNode if n < MAX_RHS_NODES => {
                let trope = *TropeType::ALL.choose(rng).expect("non-empty");
                rule.rhs.nodes.push(Label::Trope(trope));
                if n > 0 {
                    let anchor = rng.random_range(0..n);
                    let edge = random_edge(anchor, n, rng);
                    rule.rhs.add_edge(edge);
                }
                return;
            }
            Edit::RemoveNode if n > 0 => {
                let r = rng.random_range(0..n);
                rule.rhs.remove_node(r);
                for m in &mut rule.mapping {
                    *m = match *m {
                        Some(x) if x == r => None,
                        Some(x) if x > r => Some(x - 1),
                        other => other,
                    };
                }
                return;
            }
            Edit::Retype if n > 0 => {
                let r = rng.random_range(0..n);
                rule.rhs.nodes[r] = Label::random(rng);
                return;
            }
            Edit::AddEdge if n >= 2 => {
                let (a, b) = distinct_pair(n, rng);
                if rule.rhs.add_edge(random_edge(a, b, rng)) {
                    return;
                }
            }
            Edit::RemoveEdge if !rule.rhs.edges.is_empty() => {
                let i = rng.random_range(0..rule.rhs.edges.len());
                rule.rhs.edges.remove(i);
                return;
            }
            _ => {}
        }
    }
}

/// Applies one random atomic edit to the left-hand side.
fn edit_lhs<R: Rng + ?Sized>(rule: &mut ProductionRule, rng: &mut R) {
    loop {
        let n = rule.lhs.nodes.len();
        match pick_edit(&LHS_EDITS, rng) {
            Edit::AddNode if n < MAX_LHS_NODES => {
                let label = Label::random(rng);
                rule.lhs.nodes.push(label);
                let anchor = rng.random_range(0..n);
                let edge = random_edge(anchor, n, rng);
                rule.lhs.add_edge(edge);
                // Keep the new node unless the right side is full.
                if rule.rhs.nodes.len() < MAX_RHS_NODES {
                    rule.rhs.nodes.push(label);
                    rule.mapping.push(Some(rule.rhs.nodes.len() - 1));
                } else {
                    rule.mapping.push(None);
                }
                return;
            }
            Edit::RemoveNode if n > 1 => {
                let l = rng.random_range(0..n);
                rule.lhs.remove_node(l);
                rule.mapping.remove(l);
                return;
            }
            Edit::Retype => {
                let l = rng.random_range(0..n);
                rule.lhs.nodes[l] = Label::random(rng);
                return;
            }
            Edit::AddEdge if n >= 2 => {
                let (a, b) = distinct_pair(n, rng);
                if rule.lhs.add_edge(random_edge(a, b, rng)) {
                    return;
                }
            }
            Edit::RemoveEdge if !rule.lhs.edges.is_empty() => {
                let i = rng.random_range(0..rule.lhs.edges.len());
                rule.lhs.edges.remove(i);
                return;
            }
            _ => {}
        }
    }
}

/// Exchanges either the left or the right sides of one rule between two
/// grammars. The rule position is drawn once and used in both parents, so
/// identical parents yield identical offspring.
pub fn crossover<R: Rng + ?Sized>(
    a: &GraphGrammar,
    b: &GraphGrammar,
    rng: &mut R,
) -> (GraphGrammar, GraphGrammar) {
    assert!(!a.is_empty() && !b.is_empty(), "crossover needs non-empty grammars");
    let mut a = a.clone();
    let mut b = b.clone();
    let i = rng.random_range(0..a.len().min(b.len()));
    let (ra, rb) = (&mut a.rules[i], &mut b.rules[i]);
    if rng.random_bool(0.5) {
        std::mem::swap(&mut ra.lhs, &mut rb.lhs);
    } else {
        std::mem::swap(&mut ra.rhs, &mut rb.rhs);
    }
    ra.repair_mapping();
    rb.repair_mapping();
    (a, b)
}

pub fn mutate_traced<R: Rng + ?Sized>(g: &GraphGrammar, rng: &mut R) -> (GraphGrammar, MutationKind) {
    assert!(!g.is_empty(), "mutation needs a non-empty grammar");
    let mut out = g.clone();
    if rng.random_bool(STRUCTURAL_MUTATION_RATE) {
        let mut add = rng.random_bool(0.5);
        if !add && out.len() == 1 {
            add = true;
        } else if add && out.len() >= MAX_RULES {
            add = false;
        }
        if add {
            out.rules.push(ProductionRule::random(rng));
            (out, MutationKind::AddRule)
        } else {
            let i = rng.random_range(0..out.len());
            out.rules.remove(i);
            (out, MutationKind::RemoveRule)
        }
    } else {
        let i = rng.random_range(0..out.len());
        let rule = &mut out.rules[i];
        if rng.random_bool(0.5) {
            edit_lhs(rule, rng);
        } else {
            edit_rhs(rule, rng);
        }
        (out, MutationKind::ModifyRule)
    }
}

/// 10%: add or remove a rule (within 1..=12 rules); 90%: one atomic edit of a rule.
pub fn mutate<R: Rng + ?Sized>(g: &GraphGrammar, rng: &mut R) -> GraphGrammar {
    mutate_traced(g, rng).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TropeClass;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_parents_identical_offspring() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let p = GraphGrammar::random(&mut rng);
            let (a, b) = crossover(&p, &p, &mut rng);
            assert_eq!(a, p);
            assert_eq!(b, p);
        }
    }

    #[test]
    fn crossover_keeps_rule_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = GraphGrammar::new(vec![ProductionRule::random(&mut rng)]);
        let b = GraphGrammar::new(vec![ProductionRule::random(&mut rng)]);
        let (x, y) = crossover(&a, &b, &mut rng);
        assert_eq!((x.len(), y.len()), (1, 1));
    }

    #[test]
    fn removal_at_lower_bound_becomes_addition() {
        let g = GraphGrammar::identity();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut structural = 0;
        for _ in 0..2000 {
            let (m, kind) = mutate_traced(&g, &mut rng);
            assert_ne!(kind, MutationKind::RemoveRule);
            if kind == MutationKind::AddRule {
                structural += 1;
                assert_eq!(m.len(), 2);
            }
        }
        assert!(structural > 0);
    }

    #[test]
    fn addition_at_upper_bound_becomes_removal() {
        let g = GraphGrammar::new(vec![ProductionRule::identity(TropeClass::Villain); MAX_RULES]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let (m, kind) = mutate_traced(&g, &mut rng);
            assert_ne!(kind, MutationKind::AddRule);
            assert!(m.len() <= MAX_RULES);
        }
    }

    #[test]
    fn mutations_stay_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut g = GraphGrammar::random(&mut rng);
        for _ in 0..5000 {
            g = mutate(&g, &mut rng);
            assert!(g.is_valid(), "{g:?}");
        }
    }
}
