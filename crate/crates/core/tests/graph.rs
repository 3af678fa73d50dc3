use proptest::prelude::*;
use story_core::graph::levenshtein;
use story_core::{
    EdgeKind, GraphEdit, NarrativeEdge, NarrativeGraph, NodeId, TropeType,
};
use story_testkit::{graph_strategy, trope_strategy};

fn retyped(g: &NarrativeGraph, id: &str, trope: TropeType) -> NarrativeGraph {
    g.apply_edit(&GraphEdit::RetypeNode {
        id: NodeId::new(id),
        trope,
    })
    .unwrap()
}

#[test]
fn retype_distance_matches_reference() {
    let a = NarrativeGraph::default_graph();
    let b = retyped(&a, "n2", TropeType::Bad);
    let reference = strsim::generic_levenshtein(&a.canonical_tokens(), &b.canonical_tokens());
    assert_eq!(a.edit_distance(&b), reference);
    assert_eq!(reference, 3);
}

#[test]
fn identical_graphs_share_digest() {
    let a = NarrativeGraph::default_graph();
    let b = NarrativeGraph::from_parts(
        &[("x", TropeType::Enemy), ("y", TropeType::Hero), ("z", TropeType::Conflict)],
        &[("z", "x", EdgeKind::Plain), ("y", "z", EdgeKind::Plain)],
    )
    .unwrap();
    assert_eq!(a.canonical_hash(), b.canonical_hash());
    assert_eq!(a.edit_distance(&b), 0);
}

#[derive(Clone, Debug)]
enum Op {
    AddNode(TropeType),
    RemoveNode(usize),
    AddEdge(usize, usize, bool),
    RemoveEdge(usize),
    Retype(usize, TropeType),
}

fn op_strategy() -> impl Strategy<Value = Op> {
    prop_oneof![
        trope_strategy().prop_map(Op::AddNode),
        any::<usize>().prop_map(Op::RemoveNode),
        (any::<usize>(), any::<usize>(), any::<bool>()).prop_map(|(a, b, k)| Op::AddEdge(a, b, k)),
        any::<usize>().prop_map(Op::RemoveEdge),
        (any::<usize>(), trope_strategy()).prop_map(|(i, t)| Op::Retype(i, t)),
    ]
}

fn to_edit(g: &NarrativeGraph, op: &Op) -> GraphEdit {
    let id = |i: usize| g.nodes()[i % g.node_count()].id.clone();
    match *op {
        Op::AddNode(trope) => GraphEdit::AddNode { id: g.fresh_id(), trope },
        Op::RemoveNode(i) => GraphEdit::RemoveNode { id: id(i) },
        Op::AddEdge(a, b, entail) => GraphEdit::AddEdge(NarrativeEdge {
            src: id(a),
            dst: id(b),
            kind: if entail { EdgeKind::Entail } else { EdgeKind::Plain },
        }),
        Op::RemoveEdge(i) => {
            if g.edge_count() == 0 {
                GraphEdit::RemoveNode { id: id(i) }
            } else {
                GraphEdit::RemoveEdge(g.edge_by_ids(&g.edges()[i % g.edge_count()]))
            }
        }
        Op::Retype(i, trope) => GraphEdit::RetypeNode { id: id(i), trope },
    }
}

fn assert_valid(g: &NarrativeGraph) {
    assert!(g.node_count() >= 1);
    for (i, e) in g.edges().iter().enumerate() {
        assert!(e.src < g.node_count() && e.dst < g.node_count());
        assert_ne!(e.src, e.dst);
        assert!(!g.edges()[..i].contains(e));
    }
    let mut ids: Vec<&NodeId> = g.nodes().iter().map(|n| &n.id).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), g.node_count());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn distance_is_a_metric(a in graph_strategy(6), b in graph_strategy(6), c in graph_strategy(6)) {
        prop_assert_eq!(a.edit_distance(&a), 0);
        prop_assert_eq!(a.edit_distance(&b), b.edit_distance(&a));
        prop_assert!(a.edit_distance(&c) <= a.edit_distance(&b) + b.edit_distance(&c));
        let reference = strsim::generic_levenshtein(&a.canonical_tokens(), &b.canonical_tokens());
        prop_assert_eq!(a.edit_distance(&b), reference);
    }

    #[test]
    fn levenshtein_agrees_with_reference(a in "[a-d]{0,12}", b in "[a-d]{0,12}") {
        let (x, y): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        prop_assert_eq!(levenshtein(&x, &y), strsim::levenshtein(&a, &b));
    }

    #[test]
    fn edits_keep_graphs_valid(g in graph_strategy(5), ops in prop::collection::vec(op_strategy(), 0..40)) {
        let mut g = g;
        for op in &ops {
            let edit = to_edit(&g, op);
            if let Ok(next) = g.apply_edit(&edit) {
                g = next;
            }
            assert_valid(&g);
        }
    }

    #[test]
    fn documents_round_trip(g in graph_strategy(7)) {
        let text = g.to_json();
        let back = NarrativeGraph::from_json(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn digest_ignores_ids(g in graph_strategy(7)) {
        let renamed = NarrativeGraph::from_json(&g.to_json().replace("\"v", "\"w")).unwrap();
        prop_assert_eq!(renamed.canonical_hash(), g.canonical_hash());
    }
}
